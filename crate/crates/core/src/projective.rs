//! Canonical point enumeration for the projective space PG(N−1, q).

use crate::error::{Error, Result};
use crate::field::PrimeField;

/// Largest number of vectors in 𝔽_q^N the lookup tables will index.
const MAX_VECTORS: u64 = 1 << 24;

/// The one-dimensional subspaces of 𝔽_q^N.
///
/// Each point is represented by the unique vector whose first nonzero
/// coordinate is 1, and points are listed in lexicographic order of those
/// representatives. Vectors are encoded as base-q integers with the first
/// coordinate most significant, so lexicographic order and code order agree.
#[derive(Debug, Clone)]
pub struct ProjectiveSpace {
    field: PrimeField,
    dim: usize,
    points: Vec<Vec<u32>>,
    // line index of every nonzero vector code; index 0 (the zero vector) unused
    line_of_code: Vec<u32>,
}

impl ProjectiveSpace {
    pub fn new(field: PrimeField, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::SpecInvalid(
                "projective dimension N must be at least 1".into(),
            ));
        }
        let q = field.modulus() as u64;
        let total = (q as u128).checked_pow(dim as u32).unwrap_or(u128::MAX);
        if total > MAX_VECTORS as u128 {
            return Err(Error::SpecInvalid(format!(
                "𝔽_{q}^{dim} has more than {MAX_VECTORS} vectors"
            )));
        }
        let total = total as usize;
        let mut points = Vec::new();
        let mut line_of_code = vec![u32::MAX; total];
        for code in 1..total {
            let v = decode(code, q as u32, dim);
            if first_nonzero(&v) == Some(1) {
                let idx = points.len() as u32;
                for s in 1..q as u32 {
                    let w: Vec<u32> = v.iter().map(|&x| field.mul(x, s)).collect();
                    line_of_code[encode(&w, q as u32)] = idx;
                }
                points.push(v);
            }
        }
        Ok(Self {
            field,
            dim,
            points,
            line_of_code,
        })
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    /// Ambient dimension N.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_points(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Vec<u32>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[u32] {
        &self.points[i]
    }

    /// Number of nonzero vectors, q^N − 1.
    pub fn num_nonzero_vectors(&self) -> usize {
        self.line_of_code.len() - 1
    }

    /// The `i`-th nonzero vector in lexicographic order.
    pub fn nonzero_vector(&self, i: usize) -> Vec<u32> {
        decode(i + 1, self.field.modulus(), self.dim)
    }

    /// Projective point containing the nonzero vector `v`; `None` for the zero vector.
    pub fn point_index(&self, v: &[u32]) -> Result<Option<usize>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        let q = self.field.modulus();
        if v.iter().any(|&x| x >= q) {
            return Err(Error::InvalidPoint(format!(
                "vector {v:?} not reduced modulo {q}"
            )));
        }
        let code = encode(v, q);
        Ok((code != 0).then(|| self.line_of_code[code] as usize))
    }

    /// Point index of the `i`-th nonzero vector.
    pub fn point_of_nonzero_vector(&self, i: usize) -> usize {
        self.line_of_code[i + 1] as usize
    }

    pub fn canonicalize(&self, v: &[u32]) -> Option<Vec<u32>> {
        let lead = first_nonzero(v)?;
        let inv = self.field.inv(lead)?;
        Some(v.iter().map(|&x| self.field.mul(x, inv)).collect())
    }

    pub fn label(&self, i: usize) -> String {
        let coords: Vec<String> = self.points[i].iter().map(u32::to_string).collect();
        format!("({})", coords.join(","))
    }
}

fn first_nonzero(v: &[u32]) -> Option<u32> {
    v.iter().copied().find(|&x| x != 0)
}

fn encode(v: &[u32], q: u32) -> usize {
    v.iter()
        .fold(0usize, |acc, &x| acc * q as usize + x as usize)
}

fn decode(mut code: usize, q: u32, dim: usize) -> Vec<u32> {
    let mut v = vec![0; dim];
    for slot in v.iter_mut().rev() {
        *slot = (code % q as usize) as u32;
        code /= q as usize;
    }
    v
}
