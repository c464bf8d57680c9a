//! Ground sets, independence oracles and the concrete matroid families.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{rank_of_vectors, PrimeField};
use crate::projective::ProjectiveSpace;

/// Serializable description of a matroid.
///
/// ```json
/// {"type":"projective","n":3,"q":2}
/// {"type":"uniform","r":2,"n":5}
/// {"type":"parallel_classes","m_per_class":2}
/// {"type":"linear","q":3,"columns":[[1,0],[0,1],[1,2]]}
/// {"type":"explicit","ground_size":4,"k":2,"sets":[[0,2],[0,3],[1,2],[1,3]]}
/// ```
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MatroidSpec {
    /// U_{r,n}: every subset of size at most `r` is independent.
    Uniform { r: usize, n: usize },
    /// Column matroid of vectors over 𝔽_q.
    Linear { q: u64, columns: Vec<Vec<u32>> },
    /// PG(n−1, q) on its canonical projective points.
    Projective { n: usize, q: u64 },
    /// Two parallel classes A and B of equal size; elements `0..m` are A, `m..2m` are B.
    ParallelClasses { m_per_class: usize },
    /// A user-supplied size-`k` layer of independent sets.
    Explicit {
        ground_size: usize,
        k: usize,
        sets: Vec<Vec<usize>>,
    },
}

impl MatroidSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::SpecInvalid(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spec serializes")
    }

    pub fn build(&self) -> Result<Matroid> {
        Matroid::build(self.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundSet {
    size: usize,
    labels: Option<Vec<String>>,
}

impl GroundSet {
    pub fn new(size: usize, labels: Option<Vec<String>>) -> Result<Self> {
        if size == 0 {
            return Err(Error::SpecInvalid("ground set must be nonempty".into()));
        }
        if let Some(l) = &labels {
            if l.len() != size {
                return Err(Error::SpecInvalid(format!(
                    "{} labels for {size} elements",
                    l.len()
                )));
            }
            let unique: HashSet<&String> = l.iter().collect();
            if unique.len() != size {
                return Err(Error::SpecInvalid("element labels must be unique".into()));
            }
        }
        Ok(Self { size, labels })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, e: usize) -> String {
        match &self.labels {
            Some(l) => l[e].clone(),
            None => e.to_string(),
        }
    }
}

#[derive(Debug, Clone)]
enum Oracle {
    Uniform {
        r: usize,
    },
    Linear {
        field: PrimeField,
        vectors: Vec<Vec<u32>>,
    },
    ParallelClasses {
        m_per_class: usize,
    },
    Explicit {
        k: usize,
        sets: Vec<Vec<usize>>,
        lookup: HashSet<Vec<usize>>,
    },
}

/// An immutable matroid: ground set, independence oracle and rank.
#[derive(Debug, Clone)]
pub struct Matroid {
    spec: MatroidSpec,
    ground: GroundSet,
    oracle: Oracle,
    projective: Option<ProjectiveSpace>,
    rank: usize,
}

impl Matroid {
    pub fn build(spec: MatroidSpec) -> Result<Self> {
        let invalid = |s: String| Err(Error::SpecInvalid(s));
        let (ground, oracle, projective) = match &spec {
            MatroidSpec::Uniform { r, n } => {
                if r > n {
                    return invalid(format!("uniform rank r = {r} exceeds n = {n}"));
                }
                (GroundSet::new(*n, None)?, Oracle::Uniform { r: *r }, None)
            }
            MatroidSpec::Linear { q, columns } => {
                let field = PrimeField::new(*q).map_err(|e| Error::SpecInvalid(e.to_string()))?;
                let dim = columns.first().map_or(0, Vec::len);
                if dim == 0 {
                    return invalid(
                        "linear matroid needs nonempty columns of dimension ≥ 1".into(),
                    );
                }
                for (i, c) in columns.iter().enumerate() {
                    if c.len() != dim {
                        return invalid(format!(
                            "column {i} has dimension {}, expected {dim}",
                            c.len()
                        ));
                    }
                    if c.iter().any(|&x| x >= field.modulus()) {
                        return invalid(format!("column {i} has entries outside [0, {q})"));
                    }
                    if c.iter().all(|&x| x == 0) {
                        return invalid(format!("column {i} is the zero vector"));
                    }
                }
                let oracle = Oracle::Linear {
                    field,
                    vectors: columns.clone(),
                };
                (GroundSet::new(columns.len(), None)?, oracle, None)
            }
            MatroidSpec::Projective { n, q } => {
                let field = PrimeField::new(*q).map_err(|e| Error::SpecInvalid(e.to_string()))?;
                let space = ProjectiveSpace::new(field, *n)?;
                let labels = (0..space.num_points()).map(|i| space.label(i)).collect();
                let oracle = Oracle::Linear {
                    field,
                    vectors: space.points().to_vec(),
                };
                (
                    GroundSet::new(space.num_points(), Some(labels))?,
                    oracle,
                    Some(space),
                )
            }
            MatroidSpec::ParallelClasses { m_per_class } => {
                let m = *m_per_class;
                if m == 0 {
                    return invalid("m_per_class must be at least 1".into());
                }
                let labels = (1..=m)
                    .map(|i| format!("a{i}"))
                    .chain((1..=m).map(|i| format!("b{i}")))
                    .collect();
                (
                    GroundSet::new(2 * m, Some(labels))?,
                    Oracle::ParallelClasses { m_per_class: m },
                    None,
                )
            }
            MatroidSpec::Explicit {
                ground_size,
                k,
                sets,
            } => {
                let mut normalized = Vec::with_capacity(sets.len());
                for s in sets {
                    let mut s = s.clone();
                    s.sort_unstable();
                    s.dedup();
                    if s.len() != *k || s.len() != sets[normalized.len()].len() {
                        return invalid(format!(
                            "set {:?} does not have exactly {k} distinct elements",
                            sets[normalized.len()]
                        ));
                    }
                    if let Some(&e) = s.iter().find(|&&e| e >= *ground_size) {
                        return invalid(format!(
                            "element {e} outside ground set of size {ground_size}"
                        ));
                    }
                    normalized.push(s);
                }
                let lookup: HashSet<Vec<usize>> = normalized.iter().cloned().collect();
                if lookup.len() != normalized.len() {
                    return invalid("explicit sets contain duplicates".into());
                }
                (
                    GroundSet::new(*ground_size, None)?,
                    Oracle::Explicit {
                        k: *k,
                        sets: normalized,
                        lookup,
                    },
                    None,
                )
            }
        };
        let mut m = Self {
            spec,
            ground,
            oracle,
            projective,
            rank: 0,
        };
        m.rank = m.greedy_rank();
        Ok(m)
    }

    pub fn spec(&self) -> &MatroidSpec {
        &self.spec
    }

    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    /// Number of ground-set elements.
    pub fn size(&self) -> usize {
        self.ground.size
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// The underlying projective space for `Projective` matroids.
    pub fn projective_space(&self) -> Option<&ProjectiveSpace> {
        self.projective.as_ref()
    }

    /// Independence test. A subset listing the same element twice is dependent.
    pub fn is_independent(&self, subset: &[usize]) -> Result<bool> {
        let size = self.size();
        if let Some(&element) = subset.iter().find(|&&e| e >= size) {
            return Err(Error::ElementOutOfRange { element, size });
        }
        let mut sorted = subset.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Ok(false);
        }
        Ok(self.independent_sorted(&sorted))
    }

    /// Oracle call on a strictly increasing, in-range subset.
    pub(crate) fn independent_sorted(&self, s: &[usize]) -> bool {
        match &self.oracle {
            Oracle::Uniform { r } => s.len() <= *r,
            Oracle::Linear { field, vectors } => {
                if s.len() > vectors[0].len() {
                    return false;
                }
                let rows: Vec<&[u32]> = s.iter().map(|&e| vectors[e].as_slice()).collect();
                rank_of_vectors(*field, &rows) == s.len()
            }
            Oracle::ParallelClasses { m_per_class } => match s {
                [] | [_] => true,
                [a, b] => (*a < *m_per_class) != (*b < *m_per_class),
                _ => false,
            },
            Oracle::Explicit { k, sets, lookup } => {
                if s.len() > *k {
                    false
                } else if s.len() == *k {
                    lookup.contains(s)
                } else {
                    sets.iter().any(|t| is_sorted_subset(s, t))
                }
            }
        }
    }

    fn greedy_rank(&self) -> usize {
        let mut basis = Vec::new();
        for e in 0..self.size() {
            basis.push(e);
            if !self.independent_sorted(&basis) {
                basis.pop();
            }
        }
        basis.len()
    }

    /// Random spot check of downward closure and the exchange axiom.
    ///
    /// Not exhaustive; used to flag user-supplied layers that are not
    /// actually the size-k layer of a matroid.
    pub fn spot_check_axioms(&self, trials: usize, seed: u64) -> AxiomReport {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut report = AxiomReport {
            trials,
            ..Default::default()
        };
        for _ in 0..trials {
            let big = self.random_independent(&mut rng);
            let mut sub: Vec<usize> = big
                .iter()
                .copied()
                .filter(|_| rng.random_bool(0.5))
                .collect();
            sub.sort_unstable();
            if !self.independent_sorted(&sub) {
                report.downward_closure_failures += 1;
            }
            let other = self.random_independent(&mut rng);
            let (small, large) = if other.len() < big.len() {
                (other, big)
            } else {
                (big, other)
            };
            if small.len() < large.len() {
                let ok = large.iter().filter(|e| !small.contains(e)).any(|&e| {
                    let mut t = small.clone();
                    t.push(e);
                    t.sort_unstable();
                    self.independent_sorted(&t)
                });
                if !ok {
                    report.exchange_failures += 1;
                }
            }
        }
        report
    }

    /// Greedy independent set along a random order, stopped at a random size.
    pub fn random_independent<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        let target = rng.random_range(0..=self.rank);
        let mut order: Vec<usize> = (0..self.size()).collect();
        order.shuffle(rng);
        let mut set: Vec<usize> = Vec::new();
        for e in order {
            if set.len() == target {
                break;
            }
            let mut t = set.clone();
            t.push(e);
            t.sort_unstable();
            if self.independent_sorted(&t) {
                set = t;
            }
        }
        set
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    pub trials: usize,
    pub downward_closure_failures: usize,
    pub exchange_failures: usize,
}

impl AxiomReport {
    pub fn is_clean(&self) -> bool {
        self.downward_closure_failures == 0 && self.exchange_failures == 0
    }
}

fn is_sorted_subset(small: &[usize], big: &[usize]) -> bool {
    let mut it = big.iter();
    small.iter().all(|x| it.any(|y| y == x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fano() -> Matroid {
        MatroidSpec::Projective { n: 3, q: 2 }.build().unwrap()
    }

    fn index_of(m: &Matroid, v: &[u32]) -> usize {
        m.projective_space()
            .unwrap()
            .point_index(v)
            .unwrap()
            .unwrap()
    }

    #[test]
    fn pg_1_2_ground_set() {
        let m = MatroidSpec::Projective { n: 2, q: 2 }.build().unwrap();
        assert_eq!(m.size(), 3);
        let labels: HashSet<&str> = m
            .ground()
            .labels()
            .unwrap()
            .iter()
            .map(String::as_str)
            .collect();
        assert_eq!(labels, HashSet::from(["(1,0)", "(0,1)", "(1,1)"]));
        assert_eq!(m.rank(), 2);
    }

    #[test]
    fn fano_basics() {
        let m = fano();
        assert_eq!(m.size(), 7);
        assert_eq!(m.rank(), 3);
        assert!(m.is_independent(&[]).unwrap());
        for a in 0..7 {
            for b in 0..7 {
                if a != b {
                    assert!(m.is_independent(&[a, b]).unwrap());
                }
            }
        }
        let line = [
            index_of(&m, &[1, 0, 0]),
            index_of(&m, &[0, 1, 0]),
            index_of(&m, &[1, 1, 0]),
        ];
        assert!(!m.is_independent(&line).unwrap());
        assert!(m
            .is_independent(&[
                index_of(&m, &[1, 0, 0]),
                index_of(&m, &[0, 1, 0]),
                index_of(&m, &[0, 0, 1])
            ])
            .unwrap());
    }

    #[test]
    fn out_of_range_and_duplicates() {
        let m = fano();
        assert_eq!(
            m.is_independent(&[0, 7]),
            Err(Error::ElementOutOfRange {
                element: 7,
                size: 7
            })
        );
        assert!(!m.is_independent(&[2, 2]).unwrap());
    }

    #[test]
    fn ranks_of_families() {
        assert_eq!(
            MatroidSpec::Uniform { r: 2, n: 5 }.build().unwrap().rank(),
            2
        );
        assert_eq!(
            MatroidSpec::ParallelClasses { m_per_class: 3 }
                .build()
                .unwrap()
                .rank(),
            2
        );
        assert_eq!(
            MatroidSpec::Projective { n: 4, q: 3 }
                .build()
                .unwrap()
                .rank(),
            4
        );
        let lin = MatroidSpec::Linear {
            q: 3,
            columns: vec![vec![1, 0], vec![0, 1], vec![1, 2]],
        };
        assert_eq!(lin.build().unwrap().rank(), 2);
    }

    #[test]
    fn parallel_classes_pairs() {
        let m = MatroidSpec::ParallelClasses { m_per_class: 2 }
            .build()
            .unwrap();
        assert_eq!(m.size(), 4);
        assert!(m.is_independent(&[0, 2]).unwrap());
        assert!(m.is_independent(&[1, 3]).unwrap());
        assert!(!m.is_independent(&[0, 1]).unwrap());
        assert!(!m.is_independent(&[2, 3]).unwrap());
        assert!(!m.is_independent(&[0, 2, 3]).unwrap());
    }

    #[test]
    fn invalid_specs() {
        let bad = [
            MatroidSpec::Uniform { r: 3, n: 2 },
            MatroidSpec::Uniform { r: 0, n: 0 },
            MatroidSpec::Projective { n: 0, q: 2 },
            MatroidSpec::Projective { n: 2, q: 4 },
            MatroidSpec::ParallelClasses { m_per_class: 0 },
            MatroidSpec::Linear {
                q: 3,
                columns: vec![vec![1, 0], vec![0, 0]],
            },
            MatroidSpec::Linear {
                q: 3,
                columns: vec![vec![1, 0], vec![3, 1]],
            },
            MatroidSpec::Linear {
                q: 3,
                columns: vec![vec![1, 0], vec![1]],
            },
            MatroidSpec::Explicit {
                ground_size: 3,
                k: 2,
                sets: vec![vec![0, 0]],
            },
            MatroidSpec::Explicit {
                ground_size: 3,
                k: 2,
                sets: vec![vec![0, 3]],
            },
            MatroidSpec::Explicit {
                ground_size: 3,
                k: 2,
                sets: vec![vec![0, 1], vec![1, 0]],
            },
        ];
        for spec in bad {
            assert!(
                matches!(spec.build(), Err(Error::SpecInvalid(_))),
                "{spec:?}"
            );
        }
    }

    #[test]
    fn json_round_trip() {
        let texts = [
            r#"{"type":"projective","n":3,"q":2}"#,
            r#"{"type":"uniform","r":2,"n":5}"#,
            r#"{"type":"parallel_classes","m_per_class":2}"#,
            r#"{"type":"linear","q":3,"columns":[[1,0],[0,1],[1,2]]}"#,
            r#"{"type":"explicit","ground_size":4,"k":2,"sets":[[0,2],[0,3],[1,2],[1,3]]}"#,
        ];
        for t in texts {
            let spec = MatroidSpec::from_json(t).unwrap();
            assert_eq!(spec.to_json(), t);
            spec.build().unwrap();
        }
        assert!(MatroidSpec::from_json(r#"{"type":"graphic"}"#).is_err());
    }

    #[test]
    fn explicit_layer_oracle() {
        let m = MatroidSpec::Explicit {
            ground_size: 4,
            k: 2,
            sets: vec![vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3]],
        }
        .build()
        .unwrap();
        assert_eq!(m.rank(), 2);
        assert!(m.is_independent(&[2, 0]).unwrap());
        assert!(!m.is_independent(&[0, 1]).unwrap());
        assert!(m.is_independent(&[3]).unwrap());
        assert!(!m.is_independent(&[0, 2, 3]).unwrap());
    }

    #[test]
    fn axioms_hold_for_families() {
        let specs = [
            MatroidSpec::Projective { n: 3, q: 2 },
            MatroidSpec::Projective { n: 3, q: 3 },
            MatroidSpec::Uniform { r: 3, n: 6 },
            MatroidSpec::ParallelClasses { m_per_class: 3 },
            MatroidSpec::Linear {
                q: 5,
                columns: vec![
                    vec![1, 0, 0],
                    vec![0, 1, 0],
                    vec![1, 1, 0],
                    vec![2, 3, 1],
                    vec![0, 0, 1],
                ],
            },
        ];
        for spec in specs {
            let report = spec.build().unwrap().spot_check_axioms(300, 5);
            assert!(report.is_clean(), "{spec:?}: {report:?}");
        }
    }

    #[test]
    fn axiom_check_flags_non_matroid_layer() {
        // {0,1} and {2,3} only: {0} vs {2,3} has no valid exchange
        let m = MatroidSpec::Explicit {
            ground_size: 4,
            k: 2,
            sets: vec![vec![0, 1], vec![2, 3]],
        }
        .build()
        .unwrap();
        assert!(!m.spot_check_axioms(500, 1).is_clean());
    }
}
