//! Probability that K i.i.d. draws from a distribution on a matroid's ground
//! set are distinct and independent, together with the tooling to study its
//! maximizers: exact polynomial evaluation, symmetry averaging, simplex
//! ascent, Monte Carlo simulation, and closed forms for projective
//! geometries PG(N−1, q) over prime fields.

pub mod analysis;
pub mod distribution;
pub mod error;
pub mod field;
pub mod genpoly;
pub mod matroid;
pub mod montecarlo;
pub mod optimize;
pub mod projective;
pub mod rng;
pub mod symmetry;

pub use distribution::{Distribution, NonnegPoint};
pub use error::{Error, Result};
pub use field::{FieldMatrix, PrimeField};
pub use genpoly::IndepSetIndex;
pub use matroid::{Matroid, MatroidSpec};
pub use projective::ProjectiveSpace;
