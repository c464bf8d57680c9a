//! One function per subcommand. Each validates its flags, calls into the
//! library and assembles a JSON report.

use matroid_sampling::analysis::{
    b2_count, b2_explicit, hessian_coefficient, rational_to_f64, stability_ratio, stability_scan,
    uniform_optimum, PGParams, ProjectiveInstance, VectorDistribution,
};
use matroid_sampling::genpoly::IndepSetIndex;
use matroid_sampling::montecarlo::estimate_F;
use matroid_sampling::optimize::{maximize_F, AscentConfig};
use matroid_sampling::symmetry::check_invariance;
use matroid_sampling::{rng, Distribution, Error, Matroid, MatroidSpec, NonnegPoint};
use num::{BigInt, BigRational};
use rand::Rng;
use serde_json::{json, Value};

use crate::input::{load_distribution, load_generators, load_probs, load_spec};
use crate::{CliError, Outcome, RunArgs};

// default tolerances, overridable with --tol
const K2_TOL: f64 = 1e-12;
const HESSIAN_TOL: f64 = 1e-10;
const AVERAGING_TOL: f64 = 1e-9;
const MC_Z_LIMIT: f64 = 4.0;
const GAP_TOL: f64 = 1e-12;
// relative agreement required of the central second difference; the
// difference is exact for K ≤ 3 and otherwise off by O(step²)
const FD_TOL: f64 = 1e-5;
const FD_STEP: f64 = 1e-3;
// relative size of f(gp) − f(p) that disqualifies a supplied generator
const INVARIANCE_TOL: f64 = 1e-12;
const INVARIANCE_PROBES: u64 = 8;

const DEFAULT_SCAN_SAMPLES: usize = 10_000;
const DEFAULT_K2_SAMPLES: usize = 100;
const DEFAULT_HESSIAN_SAMPLES: usize = 50;

struct Loaded {
    spec: MatroidSpec,
    matroid: Matroid,
    index: IndepSetIndex,
}

impl Loaded {
    fn m(&self) -> usize {
        self.matroid.size()
    }

    fn k(&self) -> usize {
        self.index.k()
    }
}

fn load(run: &RunArgs) -> Result<Loaded, CliError> {
    let spec = load_spec(run.spec.as_deref())?;
    let matroid = spec.build()?;
    let k = match (run.k, &spec) {
        (Some(k), _) => k,
        (None, MatroidSpec::Explicit { k, .. }) => *k,
        (None, _) => matroid.rank(),
    };
    if k == 0 {
        return Err(CliError::validation(
            "k_out_of_range",
            "--k must be at least 1",
        ));
    }
    let index = IndepSetIndex::enumerate_with_cap(&matroid, k, run.enum_cap)?;
    Ok(Loaded {
        spec,
        matroid,
        index,
    })
}

fn projective(loaded: Loaded) -> Result<ProjectiveInstance, CliError> {
    Ok(ProjectiveInstance::from_parts(
        loaded.matroid,
        loaded.index,
    )?)
}

fn rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn factorial(k: usize) -> BigInt {
    (1..=k).fold(BigInt::from(1), |acc, i| acc * BigInt::from(i))
}

/// `K!·count/m^K`, the value of F at the uniform distribution.
fn enumerated_uniform_value(idx: &IndepSetIndex) -> BigRational {
    let m = BigInt::from(idx.ground_size());
    BigRational::new(
        factorial(idx.k()) * BigInt::from(idx.len()),
        num::pow(m, idx.k()),
    )
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn tol(run: &RunArgs, default: f64) -> Result<f64, CliError> {
    match run.tol {
        Some(t) if !(t >= 0.0 && t.is_finite()) => Err(CliError::validation(
            "invalid_config",
            format!("--tol must be a finite nonnegative number, got {t}"),
        )),
        Some(t) => Ok(t),
        None => Ok(default),
    }
}

pub fn info(run: &RunArgs) -> Result<Outcome, CliError> {
    let loaded = load(run)?;
    let gens = load_generators(run.gens.as_deref(), &loaded.matroid)?;
    let report = json!({
        "spec": to_value(&loaded.spec),
        "m": loaded.m(),
        "rank": loaded.matroid.rank(),
        "k": loaded.k(),
        "independent_sets": loaded.index.len(),
        "transitive": gens.as_ref().map(|g| g.is_transitive()),
        "orbits": gens.as_ref().map(|g| g.orbits()),
    });
    Ok(Outcome { report, pass: true })
}

pub fn eval(run: &RunArgs) -> Result<Outcome, CliError> {
    let loaded = load(run)?;
    let p = load_distribution(run.dist.as_deref(), loaded.m())?
        .ok_or_else(|| CliError::validation("missing_flag", "--dist is required"))?;
    let idx = &loaded.index;
    let exact = (run.dist.as_deref() == Some("uniform")).then(|| {
        let value = enumerated_uniform_value(idx);
        if let MatroidSpec::Projective { n, q } = loaded.spec {
            if let Ok(params) = PGParams::new(n, q, idx.k()) {
                assert_eq!(
                    uniform_optimum(&params),
                    value,
                    "closed form and enumeration disagree"
                );
            }
        }
        value
    });
    let report = json!({
        "k": idx.k(),
        "F": idx.eval_F(&p)?,
        "f": idx.eval_f(p.as_point())?,
        "h": idx.eval_h(p.as_point())?,
        "exact": exact.as_ref().map(rational),
        "p": to_value(&p),
    });
    Ok(Outcome { report, pass: true })
}

pub fn exact_uniform(run: &RunArgs) -> Result<Outcome, CliError> {
    let spec = load_spec(run.spec.as_deref())?;
    let MatroidSpec::Projective { n, q } = spec else {
        return Err(Error::SpecInvalid("exact-uniform needs a projective spec".into()).into());
    };
    let params = PGParams::new(n, q, run.k.unwrap_or(n))?;
    let closed = uniform_optimum(&params);
    let matroid = spec.build()?;
    // the closed form stands on its own when enumeration is out of reach
    let enumerated = match IndepSetIndex::enumerate_with_cap(&matroid, params.k, run.enum_cap) {
        Ok(idx) => Some(idx),
        Err(Error::EnumerationLimit { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let enumerated_value = enumerated.as_ref().map(enumerated_uniform_value);
    let agrees = enumerated_value.as_ref().map(|v| *v == closed);
    let report = json!({
        "n": n,
        "q": q,
        "k": params.k,
        "m": params.m,
        "F_uniform": rational(&closed),
        "F_uniform_f64": rational_to_f64(&closed),
        "independent_sets": enumerated.as_ref().map(|idx| idx.len()),
        "enumerated": enumerated_value.as_ref().map(rational),
        "agrees": agrees,
    });
    Ok(Outcome {
        report,
        pass: agrees != Some(false),
    })
}

pub fn optimize(run: &RunArgs) -> Result<Outcome, CliError> {
    let loaded = load(run)?;
    let m = loaded.m();
    let start = match load_distribution(run.dist.as_deref(), m)? {
        Some(p) => p,
        None => rng::interior_dirichlet(m, &mut rng::stream(run.seed, 0)),
    };
    let cfg = AscentConfig {
        step_size: run.step,
        max_iters: run.max_iters,
        tol_grad: tol(run, AscentConfig::default().tol_grad)?,
        start: Some(start.clone()),
    };
    let res = maximize_F(&loaded.index, &cfg)?;
    let u = Distribution::uniform(m);
    let mut report = to_value(&res);
    let extra = json!({
        "start": to_value(&start),
        "distance_to_uniform": res.p.l2_distance_sq(&u).sqrt(),
        "F_at_uniform": loaded.index.eval_F(&u)?,
    });
    merge(&mut report, extra);
    Ok(Outcome {
        report,
        pass: res.converged,
    })
}

pub fn mc(run: &RunArgs) -> Result<Outcome, CliError> {
    let loaded = load(run)?;
    let p = load_distribution(run.dist.as_deref(), loaded.m())?
        .unwrap_or_else(|| Distribution::uniform(loaded.m()));
    let limit = tol(run, MC_Z_LIMIT)?;
    let est = estimate_F(&loaded.matroid, &p, loaded.k(), run.trials, run.seed)?;
    let exact = loaded.index.eval_F(&p)?;
    let z = est.z_score(exact);
    let mut report = to_value(&est);
    merge(
        &mut report,
        json!({"k": loaded.k(), "exact": exact, "z_score": z, "z_limit": limit}),
    );
    Ok(Outcome {
        report,
        pass: z <= limit,
    })
}

pub fn scan(run: &RunArgs) -> Result<Outcome, CliError> {
    let loaded = load(run)?;
    let samples = run.samples.unwrap_or(DEFAULT_SCAN_SAMPLES);
    let slack = tol(run, GAP_TOL)?;
    let rep = stability_scan(&loaded.index, samples, run.seed, run.mode)?;
    let mut report = to_value(&rep);
    merge(&mut report, json!({"k": loaded.k()}));
    if rep.nonunique_maximizer_detected {
        merge(&mut report, json!({"note": "nonunique maximizer detected"}));
    }
    // a negative ratio means some p beats the uniform distribution
    Ok(Outcome {
        report,
        pass: rep.min_r >= -slack,
    })
}

pub fn k2check(run: &RunArgs) -> Result<Outcome, CliError> {
    if let Some(k) = run.k.filter(|&k| k != 2) {
        return Err(Error::KMismatch {
            expected: 2,
            got: k,
        }
        .into());
    }
    let spec = load_spec(run.spec.as_deref())?;
    let matroid = spec.build()?;
    let idx = IndepSetIndex::enumerate_with_cap(&matroid, 2, run.enum_cap)?;
    let samples = run.samples.unwrap_or(DEFAULT_K2_SAMPLES);
    let limit = tol(run, K2_TOL)?;
    let m = matroid.size();
    let u = Distribution::uniform(m);
    let fu = idx.eval_F(&u)?;
    let mut max_residual: f64 = 0.0;
    let mut max_ratio_deviation: f64 = 0.0;
    for i in 0..samples as u64 {
        let p = rng::dirichlet_uniform(m, &mut rng::stream(run.seed, i));
        let gap = fu - idx.eval_F(&p)?;
        let dist_sq = p.l2_distance_sq(&u);
        max_residual = max_residual.max((gap - dist_sq).abs());
        match stability_ratio(&idx, &p, &u) {
            Ok(r) => max_ratio_deviation = max_ratio_deviation.max((r - 1.0).abs()),
            Err(Error::DegenerateInput(_)) => {}
            Err(e) => return Err(e.into()),
        }
    }
    let report = json!({
        "m": m,
        "samples": samples,
        "seed": run.seed,
        "F_at_uniform": fu,
        "max_residual": max_residual,
        "max_ratio_deviation": max_ratio_deviation,
        "tol": limit,
    });
    Ok(Outcome {
        report,
        pass: max_residual <= limit && max_ratio_deviation <= limit,
    })
}

/// Uniform random direction in the zero-sum hyperplane, scaled to unit length.
fn zero_sum_direction(m: usize, seed: u64, i: u64) -> Vec<f64> {
    let mut r = rng::stream(seed, i);
    loop {
        let mut v: Vec<f64> = (0..m).map(|_| r.random_range(-1.0..1.0)).collect();
        let mean = v.iter().sum::<f64>() / m as f64;
        v.iter_mut().for_each(|x| *x -= mean);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 {
            v.iter_mut().for_each(|x| *x /= norm);
            return v;
        }
    }
}

pub fn hesscheck(run: &RunArgs) -> Result<Outcome, CliError> {
    let inst = projective(load(run)?)?;
    let params = inst.params;
    let m = inst.matroid.size();
    if m < 2 {
        return Err(Error::DegenerateInput("need at least two points".into()).into());
    }
    let c = hessian_coefficient(&params)?;
    let c_f64 = rational_to_f64(&c);
    let b2 = b2_explicit(&params)?;
    let b2_enumerated = b2_count(&inst.index, 0, m - 1)?;
    let b2_matches = BigInt::from(b2_enumerated) == b2;
    let samples = run.samples.unwrap_or(DEFAULT_HESSIAN_SAMPLES);
    let limit = tol(run, HESSIAN_TOL)?;

    let u = inst.uniform();
    let scale = inst.index.k_factorial();
    let hessian = inst.index.hessian_f(u.as_point())?;
    let fu = inst.index.eval_F(&u)?;
    let step = FD_STEP.min(0.5 / m as f64);
    let mut max_rel = 0.0f64;
    let mut max_fd_rel = 0.0f64;
    for i in 0..samples as u64 {
        let v = zero_sum_direction(m, run.seed, i);
        // ‖v‖ = 1, so the predicted form is −c
        let exact = scale * hessian.quadratic_form(&v)?;
        max_rel = max_rel.max((exact + c_f64).abs() / c_f64.abs().max(f64::MIN_POSITIVE));
        let shifted = |t: f64| -> Result<f64, CliError> {
            let x: Vec<f64> = u.probs().iter().zip(&v).map(|(a, b)| a + t * b).collect();
            Ok(scale * inst.index.eval_f(&NonnegPoint::new(x)?)?)
        };
        let fd = (shifted(step)? - 2.0 * fu + shifted(-step)?) / (step * step);
        max_fd_rel = max_fd_rel.max((fd + c_f64).abs() / c_f64.abs().max(f64::MIN_POSITIVE));
    }
    let report = json!({
        "n": params.n,
        "q": params.q,
        "k": params.k,
        "m": params.m,
        "coefficient": rational(&c),
        "coefficient_f64": c_f64,
        "b2_explicit": b2.to_string(),
        "b2_count": b2_enumerated,
        "b2_matches": b2_matches,
        "samples": samples,
        "seed": run.seed,
        "max_relative_error": max_rel,
        "tol": limit,
        "finite_difference_step": step,
        "max_finite_difference_error": max_fd_rel,
        "finite_difference_tol": FD_TOL,
    });
    Ok(Outcome {
        report,
        pass: b2_matches && max_rel <= limit && max_fd_rel <= FD_TOL,
    })
}

pub fn orbitavg(run: &RunArgs) -> Result<Outcome, CliError> {
    let loaded = load(run)?;
    let m = loaded.m();
    let gens = load_generators(
        Some(run.gens.as_deref().unwrap_or("family")),
        &loaded.matroid,
    )?
    .expect("a generator source was given");
    let p = match load_distribution(run.dist.as_deref(), m)? {
        Some(p) => p,
        None => rng::dirichlet_uniform(m, &mut rng::stream(run.seed, 0)),
    };
    let limit = tol(run, AVERAGING_TOL)?;
    let idx = &loaded.index;

    // supplied generators must at least leave f unchanged on random points
    let mut invariance_gap = 0.0f64;
    for i in 0..INVARIANCE_PROBES {
        let x = rng::dirichlet_uniform(m, &mut rng::stream(run.seed, i + 1));
        let fx = idx.eval_f(x.as_point())?;
        for g in gens.gens() {
            invariance_gap =
                invariance_gap.max(check_invariance(idx, g, &x)? / fx.max(f64::MIN_POSITIVE));
        }
    }
    let are_automorphisms = invariance_gap <= INVARIANCE_TOL;

    let averaged = gens.orbit_average(&p)?;
    let h_before = idx.eval_h(p.as_point())?;
    let h_after = idx.eval_h(averaged.as_point())?;
    let transitive = gens.is_transitive();
    let uniform_when_transitive = !transitive || averaged == Distribution::uniform(m);
    let report = json!({
        "k": idx.k(),
        "transitive": transitive,
        "orbits": gens.orbits(),
        "generators_preserve_f": are_automorphisms,
        "max_invariance_gap": invariance_gap,
        "h_before": h_before,
        "h_after": h_after,
        "F_before": idx.eval_F(&p)?,
        "F_after": idx.eval_F(&averaged)?,
        "tol": limit,
        "input": to_value(&p),
        "p": to_value(&averaged),
    });
    Ok(Outcome {
        report,
        pass: are_automorphisms && h_after >= h_before - limit && uniform_when_transitive,
    })
}

pub fn pushforward(run: &RunArgs) -> Result<Outcome, CliError> {
    let inst = projective(load(run)?)?;
    let space = inst.space();
    let vd = match run.dist.as_deref() {
        None | Some("uniform") => VectorDistribution::uniform(space),
        Some(a) => VectorDistribution::new(load_probs(a)?)?,
    };
    let p = inst.pushforward(&vd)?;
    let limit = tol(run, GAP_TOL)?;
    let u = inst.uniform();
    let closed = uniform_optimum(&inst.params);
    let fp = inst.index.eval_F(&p)?;
    let gap = rational_to_f64(&closed) - fp;
    let report = json!({
        "n": inst.params.n,
        "q": inst.params.q,
        "k": inst.params.k,
        "F": fp,
        "F_uniform": rational(&closed),
        "gap": gap,
        "distance_sq_to_uniform": p.l2_distance_sq(&u),
        "max_deviation_from_uniform": p.linf_distance(&u),
        "p": to_value(&p),
    });
    Ok(Outcome {
        report,
        pass: gap >= -limit,
    })
}

fn merge(report: &mut Value, extra: Value) {
    if let (Value::Object(base), Value::Object(more)) = (report, extra) {
        base.extend(more);
    }
}
