//! Maximization of F over the probability simplex.
//!
//! The ascent runs exponentiated-gradient (entropic mirror) steps on
//! `log f`, which has the same maximizers as F and is concave on the
//! interior because `f^{1/K}` is. Multiplicative updates keep every iterate
//! strictly positive and renormalization keeps it on the simplex.

use serde::Serialize;

use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::genpoly::IndepSetIndex;

// consecutive halvings tried before the step is declared stalled
const MAX_HALVINGS: usize = 60;
// fraction of the first-order predicted gain in log f a step must realize
const ARMIJO: f64 = 0.25;
// loss in log f still tolerated; at the optimum the true change is below the
// rounding error of evaluating f
const ROUNDING_SLACK: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct AscentConfig {
    pub step_size: f64,
    pub max_iters: usize,
    /// Threshold on the L∞ norm of the simplex-projected gradient of `log f`.
    pub tol_grad: f64,
    /// Interior starting point; `None` means uniform.
    pub start: Option<Distribution>,
}

impl Default for AscentConfig {
    fn default() -> Self {
        Self {
            step_size: 0.5,
            max_iters: 10_000,
            tol_grad: 1e-10,
            start: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AscentResult {
    pub p: Distribution,
    #[serde(rename = "F")]
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub projected_grad_norm: f64,
    /// F after every accepted step, starting with F(start).
    pub trajectory: Vec<f64>,
}

#[allow(non_snake_case)]
pub fn maximize_F(idx: &IndepSetIndex, cfg: &AscentConfig) -> Result<AscentResult> {
    let m = idx.ground_size();
    if !(cfg.step_size > 0.0 && cfg.step_size.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "step size {} must be positive",
            cfg.step_size
        )));
    }
    let mut p = match &cfg.start {
        Some(s) => {
            if s.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: s.len(),
                });
            }
            if !s.is_interior() {
                return Err(Error::InvalidConfig(
                    "start must have all coordinates > 0".into(),
                ));
            }
            s.probs().to_vec()
        }
        None => vec![1.0 / m as f64; m],
    };
    let scale = idx.k_factorial();
    let mut f = idx.eval_f_unchecked(&p);
    if f <= 0.0 {
        return Err(Error::StartOnZeroSet);
    }
    let mut trajectory = vec![scale * f];
    let mut converged = false;
    let mut iterations = 0;
    let (mut g, mut grad_norm) = log_gradient(idx, &p, f);
    loop {
        if grad_norm <= cfg.tol_grad {
            converged = true;
            break;
        }
        if iterations == cfg.max_iters {
            break;
        }
        let g_max = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut step = cfg.step_size;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let mut cand: Vec<f64> = p
                .iter()
                .zip(&g)
                .map(|(x, gi)| x * (step * (gi - g_max)).exp())
                .collect();
            let sum: f64 = cand.iter().sum();
            cand.iter_mut().for_each(|x| *x /= sum);
            step /= 2.0;
            if !cand.iter().all(|&x| x > 0.0) {
                continue;
            }
            let fc = idx.eval_f_unchecked(&cand);
            if fc <= 0.0 {
                continue;
            }
            let gain = (fc / f).ln();
            let predicted: f64 = cand
                .iter()
                .zip(&p)
                .zip(&g)
                .map(|((c, x), gi)| gi * (c - x))
                .sum();
            if predicted > ROUNDING_SLACK && gain >= ARMIJO * predicted {
                let gn = log_gradient(idx, &cand, fc);
                accepted = Some((cand, fc, gn));
                break;
            }
            // gains below rounding: f cannot rank the points, the gradient can
            if predicted <= ROUNDING_SLACK && gain >= -ROUNDING_SLACK {
                let (gc, nc) = log_gradient(idx, &cand, fc);
                if nc < grad_norm {
                    accepted = Some((cand, fc, (gc, nc)));
                    break;
                }
            }
        }
        let Some((cand, fc, (gc, nc))) = accepted else {
            break;
        };
        p = cand;
        f = fc;
        g = gc;
        grad_norm = nc;
        iterations += 1;
        trajectory.push(scale * f);
    }
    // report F of the returned point itself so it can be re-evaluated exactly
    let p = Distribution::new_renormalized(p)?;
    Ok(AscentResult {
        value: idx.eval_F(&p)?,
        p,
        iterations,
        converged,
        projected_grad_norm: grad_norm,
        trajectory,
    })
}

// gradient of log f and the L∞ norm of its projection onto the simplex tangent
fn log_gradient(idx: &IndepSetIndex, p: &[f64], f: f64) -> (Vec<f64>, f64) {
    let g: Vec<f64> = idx
        .gradient_unchecked(p)
        .into_iter()
        .map(|d| d / f)
        .collect();
    let mean: f64 = p.iter().zip(&g).map(|(a, b)| a * b).sum();
    let norm = g.iter().map(|x| (x - mean).abs()).fold(0.0, f64::max);
    (g, norm)
}

/// `F(u) − F(p)`; nonnegative for transitive matroids.
pub fn optimality_gap(idx: &IndepSetIndex, p: &Distribution) -> Result<f64> {
    let u = Distribution::uniform(idx.ground_size());
    Ok(idx.eval_F(&u)? - idx.eval_F(p)?)
}
