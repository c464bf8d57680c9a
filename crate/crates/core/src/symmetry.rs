//! Ground-set permutations acting on distributions, orbits of generated
//! groups, and orbit averaging.
//!
//! The generated group is never materialized. Averaging `gp` over a finite
//! group hits every element of the orbit of `e` equally often, so the group
//! average equals the per-orbit mean, which is what [`orbit_average`]
//! computes.

use serde::{Deserialize, Serialize};

use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::field::{FieldMatrix, PrimeField};
use crate::genpoly::IndepSetIndex;
use crate::matroid::{Matroid, MatroidSpec};
use crate::projective::ProjectiveSpace;

/// A bijection of `0..m`, stored as its image vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let m = image.len();
        if m == 0 {
            return Err(Error::InvalidPermutation("empty image vector".into()));
        }
        let mut seen = vec![false; m];
        for &i in &image {
            if i >= m || std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidPermutation(format!(
                    "{image:?} is not a bijection of 0..{m}"
                )));
            }
        }
        Ok(Self { image })
    }

    pub fn identity(m: usize) -> Self {
        Self {
            image: (0..m).collect(),
        }
    }

    pub fn transposition(m: usize, a: usize, b: usize) -> Self {
        let mut image: Vec<usize> = (0..m).collect();
        image.swap(a, b);
        Self { image }
    }

    /// The cycle `0 → 1 → … → m−1 → 0`.
    pub fn cycle(m: usize) -> Self {
        Self {
            image: (0..m).map(|i| (i + 1) % m).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn apply(&self, e: usize) -> usize {
        self.image[e]
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &j)| i == j)
    }

    pub fn inverse(&self) -> Self {
        let mut image = vec![0; self.len()];
        for (i, &j) in self.image.iter().enumerate() {
            image[j] = i;
        }
        Self { image }
    }

    /// `self ∘ other`, i.e. `e ↦ self(other(e))`.
    pub fn compose(&self, other: &Permutation) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(Self {
            image: other.image.iter().map(|&j| self.image[j]).collect(),
        })
    }

    /// `(gp)_e = p_{g⁻¹(e)}`: the mass at `e` moves to `g(e)`.
    pub fn apply_to_distribution(&self, p: &Distribution) -> Result<Distribution> {
        if p.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: p.len(),
            });
        }
        let mut out = vec![0.0; self.len()];
        for (e, &x) in p.probs().iter().enumerate() {
            out[self.image[e]] = x;
        }
        Distribution::new(out)
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Vec<usize> {
        p.image
    }
}

/// A nonempty list of permutations of the same ground set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Permutation>", into = "Vec<Permutation>")]
pub struct GeneratorSet {
    gens: Vec<Permutation>,
}

impl GeneratorSet {
    pub fn new(gens: Vec<Permutation>) -> Result<Self> {
        let Some(first) = gens.first() else {
            return Err(Error::InvalidPermutation("generator set is empty".into()));
        };
        let m = first.len();
        if let Some(g) = gens.iter().find(|g| g.len() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: g.len(),
            });
        }
        Ok(Self { gens })
    }

    pub fn ground_size(&self) -> usize {
        self.gens[0].len()
    }

    pub fn gens(&self) -> &[Permutation] {
        &self.gens
    }

    /// Orbits of the generated group, each sorted, listed by smallest member.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let m = self.ground_size();
        let mut uf = UnionFind::new(m);
        for g in &self.gens {
            for e in 0..m {
                uf.union(e, g.apply(e));
            }
        }
        let mut slot = vec![usize::MAX; m];
        let mut orbits: Vec<Vec<usize>> = Vec::new();
        for e in 0..m {
            let root = uf.find(e);
            if slot[root] == usize::MAX {
                slot[root] = orbits.len();
                orbits.push(Vec::new());
            }
            orbits[slot[root]].push(e);
        }
        orbits
    }

    pub fn is_transitive(&self) -> bool {
        self.orbits().len() == 1
    }

    /// Replaces `p_e` by the mean of `p` over the orbit of `e`.
    pub fn orbit_average(&self, p: &Distribution) -> Result<Distribution> {
        orbit_average(self, p)
    }
}

impl TryFrom<Vec<Permutation>> for GeneratorSet {
    type Error = Error;
    fn try_from(v: Vec<Permutation>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<GeneratorSet> for Vec<Permutation> {
    fn from(g: GeneratorSet) -> Vec<Permutation> {
        g.gens
    }
}

pub fn orbit_average(gens: &GeneratorSet, p: &Distribution) -> Result<Distribution> {
    let m = gens.ground_size();
    if p.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: p.len(),
        });
    }
    let probs = p.probs();
    let mut out = vec![0.0; m];
    for orbit in gens.orbits() {
        if orbit.len() == m {
            // transitive: exactly uniform regardless of p
            out.iter_mut().for_each(|x| *x = 1.0 / m as f64);
            break;
        }
        let first = probs[orbit[0]];
        let mean = if orbit.iter().all(|&e| probs[e] == first) {
            first
        } else {
            orbit.iter().map(|&e| probs[e]).sum::<f64>() / orbit.len() as f64
        };
        for &e in &orbit {
            out[e] = mean;
        }
    }
    Distribution::new(out)
}

/// `|f(gp) − f(p)|`; zero up to rounding when `g` is an automorphism.
pub fn check_invariance(idx: &IndepSetIndex, g: &Permutation, p: &Distribution) -> Result<f64> {
    let gp = g.apply_to_distribution(p)?;
    let a = idx.eval_f(gp.as_point())?;
    let b = idx.eval_f(p.as_point())?;
    Ok((a - b).abs())
}

/// Permutation of canonical projective points induced by `v ↦ Av`.
pub fn pgl_point_permutation(a: &FieldMatrix, space: &ProjectiveSpace) -> Result<Permutation> {
    let n = space.dim();
    if a.rows() != n || a.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: a.rows().max(a.cols()),
        });
    }
    if a.field() != space.field() {
        return Err(Error::InvalidMatrix(format!(
            "matrix over 𝔽_{} acting on PG over 𝔽_{}",
            a.field().modulus(),
            space.field().modulus()
        )));
    }
    if !a.is_invertible() {
        return Err(Error::SingularMatrix);
    }
    let image = space
        .points()
        .iter()
        .map(|v| {
            let w = a.apply(v)?;
            Ok(space
                .point_index(&w)?
                .expect("invertible maps nonzero to nonzero"))
        })
        .collect::<Result<Vec<_>>>()?;
    Permutation::new(image)
}

/// Elementary generators of GL(N, q): a diagonal scaling by a primitive
/// element, the transvection I + E₀₁, and the cyclic coordinate shift.
pub fn gl_generators(field: PrimeField, n: usize) -> Vec<FieldMatrix> {
    let p = field.modulus();
    let mut gens = Vec::new();
    let mut diag = FieldMatrix::identity(field, n);
    if p > 2 {
        let mut rows: Vec<Vec<u32>> = (0..n).map(|r| diag.row(r).to_vec()).collect();
        rows[0][0] = field.primitive_element();
        diag = FieldMatrix::from_rows(field, &rows).expect("square");
        gens.push(diag);
    }
    if n >= 2 {
        let mut rows: Vec<Vec<u32>> = (0..n)
            .map(|r| (0..n).map(|c| u32::from(r == c)).collect())
            .collect();
        rows[0][1] = 1;
        gens.push(FieldMatrix::from_rows(field, &rows).expect("square"));
        let shift: Vec<Vec<u32>> = (0..n)
            .map(|r| (0..n).map(|c| u32::from(c == (r + 1) % n)).collect())
            .collect();
        gens.push(FieldMatrix::from_rows(field, &shift).expect("square"));
    }
    if gens.is_empty() {
        gens.push(FieldMatrix::identity(field, n));
    }
    gens
}

/// Known automorphism generators for the built-in families; `None` for
/// linear and explicit matroids, whose automorphisms are not computed.
pub fn family_generators(matroid: &Matroid) -> Option<GeneratorSet> {
    let m = matroid.size();
    let gens = match matroid.spec() {
        MatroidSpec::Uniform { .. } => {
            if m == 1 {
                vec![Permutation::identity(1)]
            } else {
                vec![Permutation::transposition(m, 0, 1), Permutation::cycle(m)]
            }
        }
        MatroidSpec::ParallelClasses { m_per_class } => {
            let k = *m_per_class;
            let mut gens = Vec::new();
            if k >= 2 {
                // transposition and cycle inside A, mirrored inside B
                let mut t: Vec<usize> = (0..m).collect();
                t.swap(0, 1);
                t.swap(k, k + 1);
                let c: Vec<usize> = (0..m)
                    .map(|i| {
                        if i < k {
                            (i + 1) % k
                        } else {
                            k + (i - k + 1) % k
                        }
                    })
                    .collect();
                gens.push(Permutation::new(t).ok()?);
                gens.push(Permutation::new(c).ok()?);
            }
            let swap: Vec<usize> = (0..m).map(|i| (i + k) % m).collect();
            gens.push(Permutation::new(swap).ok()?);
            gens
        }
        MatroidSpec::Projective { .. } => {
            let space = matroid.projective_space()?;
            gl_generators(space.field(), space.dim())
                .iter()
                .map(|a| pgl_point_permutation(a, space))
                .collect::<Result<Vec<_>>>()
                .ok()?
        }
        MatroidSpec::Linear { .. } | MatroidSpec::Explicit { .. } => return None,
    };
    GeneratorSet::new(gens).ok()
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}
