//! Closed forms and exact identities for the projective geometry PG(N−1, q),
//! plus the stability-ratio scanner that applies to any matroid.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::distribution::{Distribution, SUM_TOLERANCE};
use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::genpoly::{IndepSetIndex, DEFAULT_ENUMERATION_CAP};
use crate::matroid::{Matroid, MatroidSpec};
use crate::projective::ProjectiveSpace;
use crate::rng::{self, StreamFactory};

/// Ratios below this are reported as evidence of a nonunique maximizer.
pub const NONUNIQUE_RATIO_THRESHOLD: f64 = 1e-6;

/// `(N, q, K)` for PG(N−1, q) together with `m = (q^N − 1)/(q − 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PGParams {
    pub n: usize,
    pub q: u64,
    pub k: usize,
    pub m: u64,
}

impl PGParams {
    pub fn new(n: usize, q: u64, k: usize) -> Result<Self> {
        PrimeField::new(q)?;
        if n == 0 {
            return Err(Error::SpecInvalid("N must be at least 1".into()));
        }
        if k < 1 || k > n {
            return Err(Error::KOutOfRange { k, rank: n });
        }
        let m = gaussian_bracket(n, q)
            .to_u64()
            .ok_or_else(|| Error::SpecInvalid(format!("PG({}, {q}) is too large", n - 1)))?;
        Ok(Self { n, q, k, m })
    }

    fn m_big(&self) -> BigInt {
        BigInt::from(self.m)
    }
}

/// `[j]_q = (q^j − 1)/(q − 1)`, the number of projective points spanned by
/// `j` independent ones. `[0]_q = 0`.
pub fn gaussian_bracket(j: usize, q: u64) -> BigInt {
    // 1 + q + … + q^{j−1}
    let q = BigInt::from(q);
    let mut acc = BigInt::zero();
    let mut power = BigInt::one();
    for _ in 0..j {
        acc += &power;
        power *= &q;
    }
    acc
}

/// `F(u) = Π_{j=0}^{K−1} (1 − [j]_q/m)`, cross-checked against the
/// vector-count form `Π_{j=0}^{K−1} (q^N − q^j)/(q^N − 1)`.
pub fn uniform_optimum(params: &PGParams) -> BigRational {
    let m = params.m_big();
    let mut value = BigRational::one();
    for j in 0..params.k {
        value *= BigRational::one() - BigRational::new(gaussian_bracket(j, params.q), m.clone());
    }
    let vector_form = uniform_optimum_vector_form(params);
    assert_eq!(
        value, vector_form,
        "projective and vector forms of the optimum disagree for {params:?}"
    );
    value
}

/// `Π_{j=0}^{K−1} (q^N − q^j)/(q^N − 1)`.
pub fn uniform_optimum_vector_form(params: &PGParams) -> BigRational {
    let q = BigInt::from(params.q);
    let qn = num::pow(q.clone(), params.n);
    let denom = &qn - BigInt::one();
    (0..params.k).fold(BigRational::one(), |acc, j| {
        acc * BigRational::new(&qn - num::pow(q.clone(), j), denom.clone())
    })
}

/// `B₂ = (1/(K−2)!)·Π_{j=2}^{K−1} (m − [j]_q)`: the number of independent
/// K-sets through a fixed pair of distinct points.
pub fn b2_explicit(params: &PGParams) -> Result<BigInt> {
    if params.k < 2 {
        return Err(Error::KOutOfRange {
            k: params.k,
            rank: params.n,
        });
    }
    let m = params.m_big();
    let product = (2..params.k).fold(BigInt::one(), |acc, j| {
        acc * (&m - gaussian_bracket(j, params.q))
    });
    let factorial = (1..=params.k - 2).fold(BigInt::one(), |acc, i| acc * BigInt::from(i));
    let value = BigRational::new(product, factorial);
    assert!(value.is_integer(), "B₂ must be an integer for {params:?}");
    Ok(value.to_integer())
}

/// Counts the enumerated K-sets containing both `e` and `e2`.
pub fn b2_count(idx: &IndepSetIndex, e: usize, e2: usize) -> Result<usize> {
    let size = idx.ground_size();
    for element in [e, e2] {
        if element >= size {
            return Err(Error::ElementOutOfRange { element, size });
        }
    }
    if e == e2 {
        return Err(Error::SameElement(e));
    }
    Ok(idx.count_containing_pair(e, e2))
}

/// `c = K!·B₂·m^{−(K−2)}`, so that `vᵀ∇²F(u)v = −c‖v‖²` for zero-sum `v`.
pub fn hessian_coefficient(params: &PGParams) -> Result<BigRational> {
    let b2 = b2_explicit(params)?;
    let factorial = (1..=params.k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i));
    let m_pow = num::pow(params.m_big(), params.k - 2);
    Ok(BigRational::new(factorial * b2, m_pow))
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// PG(N−1, q) with its enumerated independent K-sets.
#[derive(Debug, Clone)]
pub struct ProjectiveInstance {
    pub params: PGParams,
    pub matroid: Matroid,
    pub index: IndepSetIndex,
}

impl ProjectiveInstance {
    pub fn new(n: usize, q: u64, k: usize) -> Result<Self> {
        Self::with_cap(n, q, k, DEFAULT_ENUMERATION_CAP)
    }

    pub fn with_cap(n: usize, q: u64, k: usize, cap: usize) -> Result<Self> {
        let params = PGParams::new(n, q, k)?;
        let matroid = MatroidSpec::Projective { n, q }.build()?;
        let index = IndepSetIndex::enumerate_with_cap(&matroid, k, cap)?;
        Ok(Self {
            params,
            matroid,
            index,
        })
    }

    /// Wraps an already enumerated projective index.
    pub fn from_parts(matroid: Matroid, index: IndepSetIndex) -> Result<Self> {
        let MatroidSpec::Projective { n, q } = *matroid.spec() else {
            return Err(Error::SpecInvalid("not a projective matroid".into()));
        };
        let params = PGParams::new(n, q, index.k())?;
        Ok(Self {
            params,
            matroid,
            index,
        })
    }

    pub fn space(&self) -> &ProjectiveSpace {
        self.matroid
            .projective_space()
            .expect("projective matroid carries its space")
    }

    pub fn uniform(&self) -> Distribution {
        Distribution::uniform(self.matroid.size())
    }

    /// `(F(u) − F(p), ‖p − u‖²)`, which coincide exactly when K = 2.
    pub fn k2_gap(&self, p: &Distribution) -> Result<(f64, f64)> {
        if self.params.k != 2 {
            return Err(Error::KMismatch {
                expected: 2,
                got: self.params.k,
            });
        }
        let u = self.uniform();
        let lhs = self.index.eval_F(&u)? - self.index.eval_F(p)?;
        Ok((lhs, p.l2_distance_sq(&u)))
    }

    pub fn pushforward(&self, vector_dist: &VectorDistribution) -> Result<Distribution> {
        pushforward(vector_dist, self.space())
    }
}

/// A distribution on the nonzero vectors of 𝔽_q^N, indexed in lexicographic
/// order (see [`ProjectiveSpace::nonzero_vector`]).
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct VectorDistribution(Vec<f64>);

impl VectorDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidDistribution(
                "vector probabilities must be finite and nonnegative".into(),
            ));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "vector probabilities sum to {sum}, not 1"
            )));
        }
        Ok(Self(probs))
    }

    pub fn uniform(space: &ProjectiveSpace) -> Self {
        let n = space.num_nonzero_vectors();
        Self(vec![1.0 / n as f64; n])
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }
}

/// `p_L = Σ_{v ∈ L∖{0}} P(v)` for every projective point `L`.
pub fn pushforward(
    vector_dist: &VectorDistribution,
    space: &ProjectiveSpace,
) -> Result<Distribution> {
    let expected = space.num_nonzero_vectors();
    if vector_dist.0.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: vector_dist.0.len(),
        });
    }
    let mut p = vec![0.0; space.num_points()];
    for (i, &mass) in vector_dist.0.iter().enumerate() {
        p[space.point_of_nonzero_vector(i)] += mass;
    }
    Distribution::new_renormalized(p)
}

/// `R(p) = (F(u) − F(p)) / ‖p − u‖²`.
pub fn stability_ratio(idx: &IndepSetIndex, p: &Distribution, u: &Distribution) -> Result<f64> {
    let dist_sq = p.l2_distance_sq(u);
    if dist_sq.sqrt() <= 1e-12 {
        return Err(Error::DegenerateInput("p coincides with u".into()));
    }
    Ok((idx.eval_F(u)? - idx.eval_F(p)?) / dist_sq)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMode {
    /// Dirichlet(1, …, 1) samples.
    Dirichlet,
    /// Dirichlet(1, …, 1) on a random support, zero elsewhere.
    Sparse,
}

impl std::str::FromStr for ScanMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dirichlet" => Ok(Self::Dirichlet),
            "sparse" => Ok(Self::Sparse),
            other => Err(Error::InvalidConfig(format!("unknown scan mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramBucket {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    #[serde(rename = "min_R")]
    pub min_r: f64,
    pub argmin: Distribution,
    #[serde(rename = "max_R")]
    pub max_r: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub mode: ScanMode,
    pub histogram: Vec<HistogramBucket>,
    pub nonunique_maximizer_detected: bool,
}

const HISTOGRAM_BUCKETS: usize = 20;

/// Samples `samples` distributions and reports the smallest stability
/// ratio. Sample `i` uses stream `i` of `seed`, so the report does not
/// depend on the number of threads.
pub fn stability_scan(
    idx: &IndepSetIndex,
    samples: usize,
    seed: u64,
    mode: ScanMode,
) -> Result<ScanReport> {
    if samples == 0 {
        return Err(Error::InvalidConfig(
            "scan needs at least one sample".into(),
        ));
    }
    let m = idx.ground_size();
    let u = Distribution::uniform(m);
    let factory = StreamFactory::new(seed);
    let draws: Vec<(Distribution, f64)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut r = factory.stream(i as u64);
            loop {
                let p = match mode {
                    ScanMode::Dirichlet => rng::dirichlet_uniform(m, &mut r),
                    ScanMode::Sparse => rng::sparse_dirichlet(m, &mut r),
                };
                // redraw in the measure-zero event p = u
                if let Ok(ratio) = stability_ratio(idx, &p, &u) {
                    return (p, ratio);
                }
            }
        })
        .collect();
    let mut best = 0;
    for (i, (_, r)) in draws.iter().enumerate() {
        if *r < draws[best].1 {
            best = i;
        }
    }
    let min_r = draws[best].1;
    let max_r = draws.iter().map(|d| d.1).fold(f64::NEG_INFINITY, f64::max);
    let width = (max_r - min_r) / HISTOGRAM_BUCKETS as f64;
    let mut histogram: Vec<HistogramBucket> = (0..HISTOGRAM_BUCKETS)
        .map(|b| HistogramBucket {
            lo: min_r + b as f64 * width,
            hi: if b + 1 == HISTOGRAM_BUCKETS {
                max_r
            } else {
                min_r + (b + 1) as f64 * width
            },
            count: 0,
        })
        .collect();
    for (_, r) in &draws {
        let b = if width > 0.0 {
            (((r - min_r) / width) as usize).min(HISTOGRAM_BUCKETS - 1)
        } else {
            0
        };
        histogram[b].count += 1;
    }
    Ok(ScanReport {
        min_r,
        argmin: draws[best].0.clone(),
        max_r,
        n_samples: samples,
        seed,
        mode,
        histogram,
        nonunique_maximizer_detected: min_r < NONUNIQUE_RATIO_THRESHOLD,
    })
}
