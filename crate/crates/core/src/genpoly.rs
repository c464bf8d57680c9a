//! The independent-set generating polynomial
//!
//! ```text
//! f_K(x) = Σ_{S independent, |S| = K} Π_{e ∈ S} x_e
//! ```
//!
//! together with `h_K = f_K^{1/K}`, the sampling probability
//! `F_K(p) = K!·f_K(p)`, exact derivatives and empirical concavity probes.
//!
//! The polynomial is represented by its support, enumerated once and cached
//! in an [`IndepSetIndex`].

use rand::Rng;
use serde::Serialize;

use crate::distribution::{Distribution, NonnegPoint};
use crate::error::{Error, Result};
use crate::matroid::Matroid;
use crate::rng::StreamFactory;

pub const DEFAULT_ENUMERATION_CAP: usize = 10_000_000;

/// Tolerance used by the concavity probes.
pub const CONCAVITY_TOLERANCE: f64 = 1e-9;

// below this many sets a block is summed left to right
const PAIRWISE_BLOCK: usize = 32;
// above this many sets the two halves are summed on separate threads
const PARALLEL_THRESHOLD: usize = 1 << 15;

/// All independent K-subsets of a matroid, in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndepSetIndex {
    k: usize,
    ground_size: usize,
    // row-major, `k` entries per set
    sets: Vec<usize>,
    source: String,
}

impl IndepSetIndex {
    /// Enumerates with the default cap of 10^7 sets.
    pub fn enumerate(matroid: &Matroid, k: usize) -> Result<Self> {
        Self::enumerate_with_cap(matroid, k, DEFAULT_ENUMERATION_CAP)
    }

    /// Depth-first extension of independent prefixes in increasing index
    /// order. Dependent prefixes are pruned, which is sound by downward
    /// closure.
    pub fn enumerate_with_cap(matroid: &Matroid, k: usize, cap: usize) -> Result<Self> {
        let rank = matroid.rank();
        if k < 1 || k > rank {
            return Err(Error::KOutOfRange { k, rank });
        }
        let m = matroid.size();
        let mut sets = Vec::new();
        let mut prefix = Vec::with_capacity(k);
        extend(matroid, k, m, cap, 0, &mut prefix, &mut sets)?;
        Ok(Self {
            k,
            ground_size: m,
            sets,
            source: matroid.spec().to_json(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn ground_size(&self) -> usize {
        self.ground_size
    }

    pub fn len(&self) -> usize {
        self.sets.len().checked_div(self.k).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// JSON of the spec the index was enumerated from.
    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn set(&self, i: usize) -> &[usize] {
        &self.sets[i * self.k..(i + 1) * self.k]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize]> + '_ {
        self.sets.chunks_exact(self.k)
    }

    /// Number of listed sets containing both `a` and `b`.
    pub fn count_containing_pair(&self, a: usize, b: usize) -> usize {
        self.iter()
            .filter(|s| s.binary_search(&a).is_ok() && s.binary_search(&b).is_ok())
            .count()
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.ground_size {
            return Err(Error::DimensionMismatch {
                expected: self.ground_size,
                got: len,
            });
        }
        Ok(())
    }

    /// f_K(x), accumulated with pairwise summation over the support.
    pub fn eval_f(&self, x: &NonnegPoint) -> Result<f64> {
        self.check_dim(x.len())?;
        Ok(self.eval_f_unchecked(x.coords()))
    }

    pub(crate) fn eval_f_unchecked(&self, x: &[f64]) -> f64 {
        pairwise_sum(self, x, 0, self.len())
    }

    /// h_K(x) = f_K(x)^{1/K}, defined as 0 where f vanishes.
    pub fn eval_h(&self, x: &NonnegPoint) -> Result<f64> {
        let f = self.eval_f(x)?;
        Ok(self.h_from_f(f))
    }

    pub(crate) fn h_from_f(&self, f: f64) -> f64 {
        if f <= 0.0 {
            0.0
        } else if self.k == 1 {
            f
        } else {
            f.powf(1.0 / self.k as f64)
        }
    }

    /// F_K(p) = K!·f_K(p): the probability that K i.i.d. draws from `p` are
    /// distinct and independent.
    #[allow(non_snake_case)]
    pub fn eval_F(&self, p: &Distribution) -> Result<f64> {
        Ok(self.k_factorial() * self.eval_f(p.as_point())?)
    }

    pub fn k_factorial(&self) -> f64 {
        (1..=self.k).map(|i| i as f64).product()
    }

    /// ∂f/∂x_e = Σ_{S ∋ e} Π_{e' ∈ S∖{e}} x_{e'}.
    pub fn gradient_f(&self, x: &NonnegPoint) -> Result<Vec<f64>> {
        self.check_dim(x.len())?;
        Ok(self.gradient_unchecked(x.coords()))
    }

    pub(crate) fn gradient_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let k = self.k;
        let mut grad = vec![0.0; self.ground_size];
        let mut prefix = vec![1.0; k + 1];
        for s in self.iter() {
            for i in 0..k {
                prefix[i + 1] = prefix[i] * x[s[i]];
            }
            let mut suffix = 1.0;
            for i in (0..k).rev() {
                grad[s[i]] += prefix[i] * suffix;
                suffix *= x[s[i]];
            }
        }
        grad
    }

    /// Exact Hessian of f. The diagonal is identically zero since f is
    /// multi-affine.
    pub fn hessian_f(&self, x: &NonnegPoint) -> Result<Hessian> {
        self.check_dim(x.len())?;
        let m = self.ground_size;
        let k = self.k;
        let x = x.coords();
        let mut h = Hessian {
            m,
            data: vec![0.0; m * m],
        };
        if k < 2 {
            return Ok(h);
        }
        for s in self.iter() {
            for i in 0..k {
                for j in i + 1..k {
                    let prod: f64 = (0..k)
                        .filter(|&l| l != i && l != j)
                        .map(|l| x[s[l]])
                        .product();
                    h.data[s[i] * m + s[j]] += prod;
                    h.data[s[j] * m + s[i]] += prod;
                }
            }
        }
        Ok(h)
    }

    /// Midpoint tests of concavity of h and convexity of the superlevel sets
    /// of f on random pairs of nonnegative points.
    ///
    /// Coordinates are drawn from the dyadic grid `{0} ∪ {j/1024 : 1 ≤ j ≤ 4096}`
    /// with an atom at zero, so boundary faces are exercised and midpoints are
    /// exact.
    pub fn concavity_probe(&self, trials: usize, seed: u64) -> ConcavityReport {
        let factory = StreamFactory::new(seed);
        let mut report = ConcavityReport {
            trials,
            seed,
            max_concavity_violation: 0.0,
            max_superlevel_violation: 0.0,
        };
        for t in 0..trials {
            let mut rng = factory.stream(t as u64);
            let x = random_grid_point(self.ground_size, &mut rng);
            let y = random_grid_point(self.ground_size, &mut rng);
            let (c, s) = self.probe_pair(&x, &y).expect("dimensions match");
            report.max_concavity_violation = report.max_concavity_violation.max(c);
            report.max_superlevel_violation = report.max_superlevel_violation.max(s);
        }
        report
    }

    /// Returns `(max(0, (h(x)+h(y))/2 − h(mid)), max(0, min(f(x), f(y)) − f(mid)))`.
    pub fn probe_pair(&self, x: &NonnegPoint, y: &NonnegPoint) -> Result<(f64, f64)> {
        let mid = x.midpoint(y)?;
        let (fx, fy, fm) = (self.eval_f(x)?, self.eval_f(y)?, self.eval_f(&mid)?);
        let (hx, hy, hm) = (self.h_from_f(fx), self.h_from_f(fy), self.h_from_f(fm));
        let concavity = ((hx + hy) / 2.0 - hm).max(0.0);
        let superlevel = (fx.min(fy) - fm).max(0.0);
        Ok((concavity, superlevel))
    }
}

fn extend(
    matroid: &Matroid,
    k: usize,
    m: usize,
    cap: usize,
    start: usize,
    prefix: &mut Vec<usize>,
    out: &mut Vec<usize>,
) -> Result<()> {
    let need = k - prefix.len();
    for e in start..=m.saturating_sub(need) {
        prefix.push(e);
        if matroid.independent_sorted(prefix) {
            if prefix.len() == k {
                if out.len() / k >= cap {
                    return Err(Error::EnumerationLimit { cap });
                }
                out.extend_from_slice(prefix);
            } else {
                extend(matroid, k, m, cap, e + 1, prefix, out)?;
            }
        }
        prefix.pop();
    }
    Ok(())
}

fn pairwise_sum(idx: &IndepSetIndex, x: &[f64], lo: usize, hi: usize) -> f64 {
    let n = hi - lo;
    if n <= PAIRWISE_BLOCK {
        return (lo..hi)
            .map(|i| idx.set(i).iter().map(|&e| x[e]).product::<f64>())
            .sum();
    }
    let mid = lo + n / 2;
    if n > PARALLEL_THRESHOLD {
        let (a, b) = rayon::join(
            || pairwise_sum(idx, x, lo, mid),
            || pairwise_sum(idx, x, mid, hi),
        );
        a + b
    } else {
        pairwise_sum(idx, x, lo, mid) + pairwise_sum(idx, x, mid, hi)
    }
}

fn random_grid_point<R: Rng + ?Sized>(m: usize, rng: &mut R) -> NonnegPoint {
    let coords = (0..m)
        .map(|_| {
            if rng.random_bool(0.2) {
                0.0
            } else {
                rng.random_range(1..=4096u32) as f64 / 1024.0
            }
        })
        .collect();
    NonnegPoint::new(coords).expect("grid coordinates are nonnegative")
}

/// Dense symmetric Hessian.
#[derive(Debug, Clone, PartialEq)]
pub struct Hessian {
    m: usize,
    data: Vec<f64>,
}

impl Hessian {
    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.m + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.m..(i + 1) * self.m]
    }

    /// vᵀ H v.
    pub fn quadratic_form(&self, v: &[f64]) -> Result<f64> {
        if v.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                got: v.len(),
            });
        }
        Ok((0..self.m)
            .map(|i| v[i] * self.row(i).iter().zip(v).map(|(h, w)| h * w).sum::<f64>())
            .sum())
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.m).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcavityReport {
    pub trials: usize,
    pub seed: u64,
    pub max_concavity_violation: f64,
    pub max_superlevel_violation: f64,
}

impl ConcavityReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_concavity_violation <= tol && self.max_superlevel_violation <= tol
    }
}
