//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line per
//! criterion and exits nonzero if any fails.

use std::time::{Duration, Instant};

use matroid_sampling::analysis::{
    b2_count, b2_explicit, hessian_coefficient, rational_to_f64, stability_ratio, stability_scan,
    uniform_optimum, PGParams, ProjectiveInstance, ScanMode, VectorDistribution,
};
use matroid_sampling::genpoly::{IndepSetIndex, CONCAVITY_TOLERANCE};
use matroid_sampling::montecarlo::estimate_F;
use matroid_sampling::optimize::{maximize_F, optimality_gap, AscentConfig};
use matroid_sampling::symmetry::{family_generators, GeneratorSet, Permutation};
use matroid_sampling::{rng, Distribution, MatroidSpec};
use num::{BigInt, BigRational};
use rand::Rng;

const K2_TOL: f64 = 1e-12;
const HESSIAN_REL_TOL: f64 = 1e-10;
const GAP_TOL: f64 = 1e-12;
const OPT_DIST_TOL: f64 = 1e-6;
const OPT_VALUE_TOL: f64 = 1e-10;
const AVERAGING_TOL: f64 = 1e-9;
const MC_Z_LIMIT: f64 = 4.0;
const PUSHFORWARD_TOL: f64 = 1e-12;

const CLOSED_FORM_BUDGET: Duration = Duration::from_secs(10);
const OPTIMALITY_BUDGET: Duration = Duration::from_secs(60);
const MC_BUDGET: Duration = Duration::from_secs(60);

const K2_SAMPLES: u64 = 100;
const HESSIAN_DIRECTIONS: u64 = 50;
const GAP_SAMPLES: u64 = 500;
const RESTARTS: u64 = 10;
const CONCAVITY_PROBES: usize = 1000;
const AVERAGING_SAMPLES: u64 = 200;
const MC_TRIALS: u64 = 1_000_000;
const SCAN_SAMPLES: usize = 10_000;

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail }
    }
}

fn projective(n: usize, q: u64) -> MatroidSpec {
    MatroidSpec::Projective { n, q }
}

fn index(spec: &MatroidSpec, k: usize) -> IndepSetIndex {
    IndepSetIndex::enumerate(&spec.build().unwrap(), k).unwrap()
}

fn factorial(k: usize) -> BigInt {
    (1..=k).fold(BigInt::from(1), |acc, i| acc * BigInt::from(i))
}

/// Transitive matroids exercised by the optimality, concavity and averaging
/// criteria, with their sample size K.
fn transitive_battery() -> Vec<(String, MatroidSpec, usize)> {
    let mut out = Vec::new();
    for (n, q, k) in [
        (2, 2, 2),
        (3, 2, 2),
        (3, 2, 3),
        (3, 3, 2),
        (3, 3, 3),
        (4, 2, 3),
        (4, 2, 4),
    ] {
        out.push((format!("PG({},{q}) K={k}", n - 1), projective(n, q), k));
    }
    out.push(("U(2,5) K=2".into(), MatroidSpec::Uniform { r: 2, n: 5 }, 2));
    out.push(("U(3,6) K=3".into(), MatroidSpec::Uniform { r: 3, n: 6 }, 3));
    out.push((
        "ParallelClasses(2) K=2".into(),
        MatroidSpec::ParallelClasses { m_per_class: 2 },
        2,
    ));
    out.push((
        "ParallelClasses(3) K=2".into(),
        MatroidSpec::ParallelClasses { m_per_class: 3 },
        2,
    ));
    out
}

/// Alternates full-support and sparse Dirichlet samples.
fn random_point(m: usize, seed: u64, i: u64) -> Distribution {
    let mut r = rng::stream(seed, i);
    if i.is_multiple_of(2) {
        rng::dirichlet_uniform(m, &mut r)
    } else {
        rng::sparse_dirichlet(m, &mut r)
    }
}

fn closed_form_optimum() -> Verdict {
    let start = Instant::now();
    let mut checked = 0;
    let mut mismatches = Vec::new();
    for n in 1..=4 {
        for q in [2u64, 3] {
            for k in 1..=n {
                let params = PGParams::new(n, q, k).unwrap();
                let idx = index(&projective(n, q), k);
                let enumerated = BigRational::new(
                    factorial(k) * BigInt::from(idx.len()),
                    num::pow(BigInt::from(params.m), k),
                );
                if uniform_optimum(&params) != enumerated {
                    mismatches.push(format!("(N={n},q={q},K={k})"));
                }
                checked += 1;
            }
        }
    }
    let anchors = [
        ((2, 2, 2), (2, 3)),
        ((3, 2, 3), (24, 49)),
        ((3, 3, 3), (108, 169)),
    ]
    .iter()
    .all(|&((n, q, k), (a, b))| {
        uniform_optimum(&PGParams::new(n, q, k).unwrap()) == BigRational::new(a.into(), b.into())
    });
    let elapsed = start.elapsed();
    Verdict::new(
        mismatches.is_empty() && anchors && elapsed < CLOSED_FORM_BUDGET,
        format!(
            "{checked} (N,q,K) triples exact, anchors {}, mismatches {mismatches:?}, {:.2}s",
            if anchors { "ok" } else { "WRONG" },
            elapsed.as_secs_f64()
        ),
    )
}

fn k2_identity() -> Verdict {
    let mut max_residual: f64 = 0.0;
    let mut max_ratio_dev: f64 = 0.0;
    for (n, q) in [(2, 2), (3, 2), (3, 3)] {
        let inst = ProjectiveInstance::new(n, q, 2).unwrap();
        let u = inst.uniform();
        for i in 0..K2_SAMPLES {
            let p = rng::dirichlet_uniform(
                inst.matroid.size(),
                &mut rng::stream(100 + n as u64 * 10 + q, i),
            );
            let (gap, dist_sq) = inst.k2_gap(&p).unwrap();
            max_residual = max_residual.max((gap - dist_sq).abs());
            let r = stability_ratio(&inst.index, &p, &u).unwrap();
            max_ratio_dev = max_ratio_dev.max((r - 1.0).abs());
        }
    }
    Verdict::new(
        max_residual <= K2_TOL && max_ratio_dev <= K2_TOL,
        format!("max residual {max_residual:.2e}, max |R-1| {max_ratio_dev:.2e} over 3x{K2_SAMPLES} samples"),
    )
}

fn zero_sum_direction(m: usize, seed: u64, i: u64) -> Vec<f64> {
    let mut r = rng::stream(seed, i);
    let mut v: Vec<f64> = (0..m).map(|_| r.random_range(-1.0..1.0)).collect();
    let mean = v.iter().sum::<f64>() / m as f64;
    v.iter_mut().for_each(|x| *x -= mean);
    v
}

fn hessian_theorem() -> Verdict {
    let mut max_rel: f64 = 0.0;
    let mut b2_ok = true;
    let mut fano_b2 = None;
    for (n, q, k) in [(3, 2, 3), (3, 3, 3), (4, 2, 3), (4, 2, 4)] {
        let inst = ProjectiveInstance::new(n, q, k).unwrap();
        let m = inst.matroid.size();
        let c = rational_to_f64(&hessian_coefficient(&inst.params).unwrap());
        let u = inst.uniform();
        let h = inst.index.hessian_f(u.as_point()).unwrap();
        for i in 0..HESSIAN_DIRECTIONS {
            let v = zero_sum_direction(m, 300 + k as u64, i);
            let norm_sq: f64 = v.iter().map(|x| x * x).sum();
            let form = inst.index.k_factorial() * h.quadratic_form(&v).unwrap();
            let predicted = -c * norm_sq;
            max_rel = max_rel.max((form - predicted).abs() / predicted.abs());
        }
        let b2 = b2_explicit(&inst.params).unwrap();
        for a in 0..m {
            for b in a + 1..m {
                b2_ok &= BigInt::from(b2_count(&inst.index, a, b).unwrap()) == b2;
            }
        }
        if (n, q, k) == (3, 2, 3) {
            fano_b2 = Some(b2);
        }
    }
    let fano_ok = fano_b2 == Some(BigInt::from(4));
    Verdict::new(
        max_rel <= HESSIAN_REL_TOL && b2_ok && fano_ok,
        format!(
            "max relative error {max_rel:.2e}, B2 count = explicit on all pairs: {b2_ok}, Fano B2 = {}",
            fano_b2.map(|b| b.to_string()).unwrap_or_default()
        ),
    )
}

fn uniform_optimality() -> Verdict {
    let start = Instant::now();
    let mut min_gap = f64::INFINITY;
    let mut worst_pg_dist: f64 = 0.0;
    let mut all_converged = true;
    let mut worst_pc_value: f64 = 0.0;
    let mut pc_nonuniform = 0;
    for (seed, (_, spec, k)) in transitive_battery().into_iter().enumerate() {
        let idx = index(&spec, k);
        let m = idx.ground_size();
        for i in 0..GAP_SAMPLES {
            min_gap =
                min_gap.min(optimality_gap(&idx, &random_point(m, 400 + seed as u64, i)).unwrap());
        }
        let is_pg = matches!(spec, MatroidSpec::Projective { .. });
        let is_pc2 = spec == (MatroidSpec::ParallelClasses { m_per_class: 2 });
        if !(is_pg || is_pc2) {
            continue;
        }
        for r in 0..RESTARTS {
            let cfg = AscentConfig {
                start: Some(rng::interior_dirichlet(
                    m,
                    &mut rng::stream(500 + seed as u64, r),
                )),
                ..Default::default()
            };
            let res = maximize_F(&idx, &cfg).unwrap();
            all_converged &= res.converged;
            let dist = res.p.l2_distance_sq(&Distribution::uniform(m)).sqrt();
            if is_pg {
                worst_pg_dist = worst_pg_dist.max(dist);
            } else {
                worst_pc_value = worst_pc_value.max((res.value - 0.5).abs());
                pc_nonuniform += (dist > OPT_DIST_TOL) as usize;
            }
        }
    }
    let elapsed = start.elapsed();
    Verdict::new(
        min_gap >= -GAP_TOL
            && all_converged
            && worst_pg_dist <= OPT_DIST_TOL
            && worst_pc_value <= OPT_VALUE_TOL
            && elapsed < OPTIMALITY_BUDGET,
        format!(
            "min gap {min_gap:.2e}, converged {all_converged}, PG max |p-u| {worst_pg_dist:.2e}, \
             ParallelClasses max |F-1/2| {worst_pc_value:.2e} ({pc_nonuniform}/{RESTARTS} non-uniform), {:.2}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn concavity() -> Verdict {
    let mut worst_concavity: f64 = 0.0;
    let mut worst_superlevel: f64 = 0.0;
    let mut failures = Vec::new();
    for (seed, (name, spec, k)) in transitive_battery().into_iter().enumerate() {
        let rep = index(&spec, k).concavity_probe(CONCAVITY_PROBES, 600 + seed as u64);
        worst_concavity = worst_concavity.max(rep.max_concavity_violation);
        worst_superlevel = worst_superlevel.max(rep.max_superlevel_violation);
        if !rep.passes(CONCAVITY_TOLERANCE) {
            failures.push(name);
        }
    }
    Verdict::new(
        failures.is_empty(),
        format!(
            "{CONCAVITY_PROBES} probes per matroid, max violations {worst_concavity:.2e} (midpoint) \
             {worst_superlevel:.2e} (superlevel), failures {failures:?}"
        ),
    )
}

fn averaging() -> Verdict {
    let mut cases: Vec<(String, MatroidSpec, usize, GeneratorSet)> = transitive_battery()
        .into_iter()
        .map(|(name, spec, k)| {
            let gens = family_generators(&spec.build().unwrap()).unwrap();
            (name, spec, k, gens)
        })
        .collect();
    // intransitive subgroups: within-class symmetries, and a single transposition
    let within_classes = GeneratorSet::new(vec![
        Permutation::new(vec![1, 0, 2, 3]).unwrap(),
        Permutation::new(vec![0, 1, 3, 2]).unwrap(),
    ])
    .unwrap();
    cases.push((
        "ParallelClasses(2) within classes".into(),
        MatroidSpec::ParallelClasses { m_per_class: 2 },
        2,
        within_classes,
    ));
    cases.push((
        "U(3,6) one transposition".into(),
        MatroidSpec::Uniform { r: 3, n: 6 },
        3,
        GeneratorSet::new(vec![Permutation::transposition(6, 2, 4)]).unwrap(),
    ));
    let mut worst_drop = f64::NEG_INFINITY;
    let mut transitive_exact = true;
    let mut transitive_cases = 0;
    for (seed, (_, spec, k, gens)) in cases.into_iter().enumerate() {
        let idx = index(&spec, k);
        let m = idx.ground_size();
        let u = Distribution::uniform(m);
        if gens.is_transitive() {
            transitive_cases += 1;
        }
        for i in 0..AVERAGING_SAMPLES {
            let p = random_point(m, 700 + seed as u64, i);
            let avg = gens.orbit_average(&p).unwrap();
            let drop = idx.eval_h(p.as_point()).unwrap() - idx.eval_h(avg.as_point()).unwrap();
            worst_drop = worst_drop.max(drop);
            if gens.is_transitive() {
                transitive_exact &= avg == u;
            }
        }
    }
    Verdict::new(
        worst_drop <= AVERAGING_TOL && transitive_exact,
        format!(
            "max h(p) - h(avg) {worst_drop:.2e}, transitive averages exactly uniform: {transitive_exact} \
             ({transitive_cases} transitive generator sets)"
        ),
    )
}

fn monte_carlo() -> Verdict {
    let point = |m: usize, i: u64| rng::interior_dirichlet(m, &mut rng::stream(800, i));
    let battery: Vec<(MatroidSpec, usize, Distribution)> = vec![
        (
            projective(2, 2),
            2,
            Distribution::new(vec![0.5, 0.25, 0.25]).unwrap(),
        ),
        (projective(3, 2), 3, Distribution::uniform(7)),
        (projective(3, 2), 2, point(7, 1)),
        (projective(3, 3), 3, point(13, 2)),
        (projective(4, 2), 4, Distribution::uniform(15)),
        (MatroidSpec::Uniform { r: 2, n: 5 }, 2, point(5, 3)),
        (
            MatroidSpec::Uniform { r: 3, n: 6 },
            3,
            Distribution::uniform(6),
        ),
        (
            MatroidSpec::ParallelClasses { m_per_class: 2 },
            2,
            point(4, 4),
        ),
        (
            MatroidSpec::Linear {
                q: 3,
                columns: vec![vec![1, 0], vec![0, 1], vec![1, 1], vec![2, 1], vec![1, 2]],
            },
            2,
            point(5, 5),
        ),
        (
            MatroidSpec::Explicit {
                ground_size: 4,
                k: 2,
                sets: vec![vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]],
            },
            2,
            point(4, 6),
        ),
    ];
    let start = Instant::now();
    let mut worst_z: f64 = 0.0;
    let mut deterministic = true;
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let several = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap();
    for (i, (spec, k, p)) in battery.iter().enumerate() {
        let matroid = spec.build().unwrap();
        let exact = index(spec, *k).eval_F(p).unwrap();
        let seed = 900 + i as u64;
        let est = several.install(|| estimate_F(&matroid, p, *k, MC_TRIALS, seed).unwrap());
        worst_z = worst_z.max(est.z_score(exact));
        // a shorter rerun on one thread must reproduce the prefix counts
        let short = MC_TRIALS / 10;
        let a = single.install(|| estimate_F(&matroid, p, *k, short, seed).unwrap());
        let b = several.install(|| estimate_F(&matroid, p, *k, short, seed).unwrap());
        deterministic &= a == b;
    }
    let elapsed = start.elapsed();
    Verdict::new(
        worst_z <= MC_Z_LIMIT && deterministic && elapsed < MC_BUDGET,
        format!(
            "{} instances x {MC_TRIALS} trials, max z {worst_z:.2}, identical across 1 and 4 threads: \
             {deterministic}, {:.2}s",
            battery.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn pushforward() -> Verdict {
    let mut max_dev: f64 = 0.0;
    let mut short_ok = true;
    let mut details = Vec::new();
    for k in [2, 3] {
        let inst = ProjectiveInstance::new(3, 3, k).unwrap();
        let space = inst.space();
        let nv = space.num_nonzero_vectors();
        let lines = space.num_points();
        let optimum = rational_to_f64(&uniform_optimum(&inst.params));

        // uniform on vectors; canonical representatives only; random split
        // of each line's mass between its two nonzero vectors
        let canonical: Vec<f64> = (0..nv)
            .map(|i| {
                let v = space.nonzero_vector(i);
                if space.canonicalize(&v).unwrap() == v {
                    1.0 / lines as f64
                } else {
                    0.0
                }
            })
            .collect();
        let mut r = rng::stream(1000, k as u64);
        let splits: Vec<f64> = (0..lines).map(|_| r.random_range(0.0..1.0)).collect();
        let split: Vec<f64> = (0..nv)
            .map(|i| {
                let v = space.nonzero_vector(i);
                let line = space.point_of_nonzero_vector(i);
                let w = splits[line];
                (if space.canonicalize(&v).unwrap() == v {
                    w
                } else {
                    1.0 - w
                }) / lines as f64
            })
            .collect();
        let vds = [
            VectorDistribution::uniform(space),
            VectorDistribution::new(canonical).unwrap(),
            VectorDistribution::new(split).unwrap(),
        ];
        for vd in &vds {
            let p = inst.pushforward(vd).unwrap();
            max_dev = max_dev.max((inst.index.eval_F(&p).unwrap() - optimum).abs());
        }

        // tilt the mass toward the first vector
        let mut tilted = vec![1.0; nv];
        tilted[0] = 3.0;
        let total: f64 = tilted.iter().sum();
        let vd = VectorDistribution::new(tilted.iter().map(|w| w / total).collect()).unwrap();
        let p = inst.pushforward(&vd).unwrap();
        let u = inst.uniform();
        let gap = optimum - inst.index.eval_F(&p).unwrap();
        let dist_sq = p.l2_distance_sq(&u);
        let predicted = if k == 2 {
            dist_sq
        } else {
            let scan =
                stability_scan(&inst.index, SCAN_SAMPLES, 1100, ScanMode::Dirichlet).unwrap();
            scan.min_r * dist_sq
        };
        short_ok &= gap > 0.0 && gap >= predicted - PUSHFORWARD_TOL;
        details.push(format!("K={k} gap {gap:.3e} vs predicted {predicted:.3e}"));
    }
    Verdict::new(
        max_dev <= PUSHFORWARD_TOL && short_ok,
        format!(
            "3 vector distributions with uniform pushforward reach the optimum within {max_dev:.2e}; \
             perturbed: {}",
            details.join(", ")
        ),
    )
}

fn stability_scan_criterion() -> Verdict {
    let mut min_pg = f64::INFINITY;
    let mut flags = Vec::new();
    for (n, q, k) in [
        (2, 2, 2),
        (3, 2, 2),
        (3, 2, 3),
        (3, 3, 2),
        (3, 3, 3),
        (4, 2, 3),
        (4, 2, 4),
    ] {
        let idx = index(&projective(n, q), k);
        let rep = stability_scan(&idx, SCAN_SAMPLES, 1200 + k as u64, ScanMode::Dirichlet).unwrap();
        min_pg = min_pg.min(rep.min_r);
        flags.push(rep.nonunique_maximizer_detected);
    }
    let pc = index(&MatroidSpec::ParallelClasses { m_per_class: 2 }, 2);
    let rep = stability_scan(&pc, SCAN_SAMPLES, 1300, ScanMode::Dirichlet).unwrap();
    Verdict::new(
        min_pg > 0.0 && !flags.iter().any(|&f| f) && rep.nonunique_maximizer_detected,
        format!(
            "PG min R {min_pg:.4}, ParallelClasses(2) min R {:.2e} flagged nonunique: {}",
            rep.min_r, rep.nonunique_maximizer_detected
        ),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 closed-form optimum", closed_form_optimum),
        ("2 K=2 identity", k2_identity),
        ("3 Hessian at the uniform point", hessian_theorem),
        ("4 uniform optimality", uniform_optimality),
        ("5 concavity probes", concavity),
        ("6 averaging monotonicity", averaging),
        ("7 Monte Carlo consistency", monte_carlo),
        ("8 pushforward", pushforward),
        ("9 stability scan", stability_scan_criterion),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let v = run();
        println!(
            "{} criterion {name}: {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
        failed += (!v.pass) as usize;
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
