//! Acceptance suite: one line per criterion, nonzero exit on any failure.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::{adaptive_simpson, brute_force_auc, log_slope, Fixture};
use composite_detect::evaluation::{
    binomial_halfwidth, convergence_study, empirical_roc, kendall, power_curve, RocCurve,
};
use composite_detect::harness::{emit_prior_curves, load_config, run_experiment};
use composite_detect::priors::{exponential_moment, truncated_exponential_moment};
use composite_detect::{
    DetectionProblem, DetectorSpec, ModelKind, Penalty, PenalizedOutput, PixelMatrix, Prior, SculptComponent,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = (bool, String);
type Criterion = (&'static str, fn() -> Outcome);

const MODELS: [ModelKind; 3] = [ModelKind::Additive, ModelKind::Replacement, ModelKind::BeersLaw];

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn problem(f: &Fixture) -> DetectionProblem {
    DetectionProblem::new(f.background(), f.model()).unwrap()
}

fn matrix(rows: &[Vec<f64>]) -> PixelMatrix {
    PixelMatrix::from_rows(rows[0].len(), rows).unwrap()
}

/// Background draws followed by the same number of targets at `a`.
fn mixed_pixels(f: &Fixture, n_each: usize, a: f64, seed: u64) -> Vec<Vec<f64>> {
    let model = f.model_with_a_max(a.max(f.kind.default_a_max()));
    let mut px = f.draw(n_each, seed);
    for z in f.draw(n_each, seed + 1) {
        px.push(model.embed(a, &z).unwrap());
    }
    px
}

fn c1_null_identity() -> Outcome {
    let mut checked = 0;
    for kind in MODELS {
        let f = Fixture::new(kind, 8);
        let p = problem(&f);
        let delta0 = Prior::point_mass(0.0).unwrap();
        for x in f.draw(1000, 11) {
            if p.clairvoyant(0.0, &x).unwrap() != 1.0 || p.bayes(&delta0, &x).unwrap() != 1.0 {
                return (false, format!("{kind:?}: null statistic differs from 1 at {x:?}"));
            }
            checked += 1;
        }
    }
    (true, format!("{checked} pixels, clairvoyant(0) and bayes(delta_0) exactly 1"))
}

fn c2_gradient_order() -> Outcome {
    let hs = [1e-2, 1e-3, 1e-4];
    let mut worst = f64::INFINITY;
    let mut notes = Vec::new();
    for kind in MODELS {
        for d in [1, 8] {
            let f = Fixture::new(kind, d);
            let bg = f.background();
            let model = f.model();
            let oracle = f.oracle();
            let pixels = f.draw(5, 21);
            let errs: Vec<f64> = hs
                .iter()
                .map(|&h| {
                    pixels
                        .iter()
                        .map(|x| {
                            let up = common::oracle_log_likelihood(&oracle, kind, &f.signature, h, x);
                            let dn = common::oracle_log_likelihood(&oracle, kind, &f.signature, -h, x);
                            ((up - dn) / (2.0 * h) - model.lmp_statistic(&bg, x).unwrap()).abs()
                        })
                        .fold(0.0, f64::max)
                })
                .collect();
            // The additive log likelihood is quadratic in a, so central
            // differences are exact up to rounding.
            if errs.iter().all(|&e| e < 1e-9) {
                notes.push(format!("{kind:?}/d={d}: exact (max err {:.1e})", errs.iter().fold(0.0f64, |a, &b| a.max(b))));
                continue;
            }
            let order = log_slope(&hs, &errs);
            worst = worst.min(order);
            notes.push(format!("{kind:?}/d={d}: order {order:.2}"));
        }
    }
    (worst >= 1.8, notes.join("; "))
}

fn c3_series() -> Outcome {
    let f = Fixture::new(ModelKind::Additive, 8);
    let p = problem(&f);
    let oracle = f.oracle();
    let t = nalgebra::DVector::from_column_slice(&f.signature);
    let ttt = (t.transpose() * &oracle.precision * &t)[(0, 0)];
    let pixels = f.draw(200, 31);
    let eps = [0.02, 0.01, 0.005];
    let errs: Vec<f64> = eps
        .iter()
        .map(|&e| {
            let prior = Prior::exponential(e).unwrap();
            pixels
                .iter()
                .map(|x| {
                    let lmp = t.dot(&oracle.whitened_residual(x));
                    let ratio2 = lmp * lmp - ttt;
                    (p.bayes(&prior, x).unwrap() - (1.0 + e * lmp + e * e * ratio2)).abs()
                })
                .fold(0.0, f64::max)
        })
        .collect();
    let order = log_slope(&eps, &errs);
    let c = errs.iter().zip(&eps).map(|(r, e)| r / e.powi(3)).fold(0.0, f64::max);
    (order >= 2.7, format!("sup errors {}, fitted order {order:.3}, C = {c:.2}", sci(&errs)))
}

fn c4_small_epsilon_limit() -> Outcome {
    let f = Fixture::new(ModelKind::Additive, 8);
    let p = problem(&f);
    let oracle = f.oracle();
    let pixels = matrix(&f.draw(200, 41));
    let base = Prior::uniform01();
    let eps = [0.02, 0.01, 0.005, 0.0025];
    let mut ok = true;
    let mut notes = Vec::new();
    // Limit object against an oracle built from adaptive quadrature.
    let t = nalgebra::DVector::from_column_slice(&f.signature);
    for x in pixels.rows().take(5) {
        let lmp = t.dot(&oracle.whitened_residual(x));
        let l0 = oracle.log_density(x);
        let d1 = adaptive_simpson(
            &|a| (common::oracle_log_likelihood(&oracle, ModelKind::Additive, &f.signature, a, x) - l0).exp(),
            0.0,
            1.0,
            1e-13,
        );
        let limit = 0.5 * lmp + 0.5 * d1;
        let got = p.mixed_star(0.5, &base, x).unwrap();
        if (got - limit).abs() > 1e-9 * (1.0 + limit.abs()) {
            ok = false;
            notes.push(format!("mixed_star {got} vs oracle {limit}"));
        }
    }
    for beta in [0.25, 0.5, 0.9] {
        let study = convergence_study(&p, beta, &base, &eps, &pixels).unwrap();
        let ratios: Vec<f64> = study.rows.iter().filter_map(|r| r.ratio).collect();
        ok &= ratios.iter().all(|r| (0.35..=0.65).contains(r));
        notes.push(format!("beta={beta}: ratios {ratios:.3?}"));
    }
    (ok, notes.join("; "))
}

fn c5_delta_collapse() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for kind in MODELS {
        let f = Fixture::new(kind, 4);
        let p = problem(&f);
        let px = matrix(&mixed_pixels(&f, 250, 0.3, 51));
        let uniform = Prior::uniform01();
        let base = p.batch_scores(&DetectorSpec::Bayes { prior: uniform.clone() }, &px).unwrap();
        for alpha in [0.1, 0.5, 0.99] {
            let mixed = Prior::mixture(&[(alpha, &Prior::point_mass(0.0).unwrap()), (1.0 - alpha, &uniform)]).unwrap();
            let s = p.batch_scores(&DetectorSpec::Bayes { prior: mixed }, &px).unwrap();
            let k = kendall(&base, &s).unwrap();
            ok &= k.discordant == 0;
            notes.push(format!("{kind:?}/alpha={alpha}: tau_b={:.6}", k.tau_b));
        }
    }
    (ok, notes.join("; "))
}

fn roc_vertices(c: &RocCurve) -> Vec<(f64, f64)> {
    c.points.iter().map(|p| (p.false_alarm_rate, p.detection_prob)).collect()
}

fn c6_ump_corner() -> Outcome {
    let f = Fixture::new(ModelKind::Additive, 8);
    let p = DetectionProblem::new(f.background(), f.model_with_a_max(10.0)).unwrap();
    let bkg = matrix(&f.draw(250, 61));
    let tgt = matrix(
        &f.draw(250, 62)
            .iter()
            .map(|z| p.model().embed(0.5, z).unwrap())
            .collect::<Vec<_>>(),
    );
    let specs = [
        DetectorSpec::MatchedFilter,
        DetectorSpec::Lmp,
        DetectorSpec::Glrt,
        DetectorSpec::Clairvoyant { a0: 0.5 },
        DetectorSpec::Clairvoyant { a0: 2.0 },
    ];
    let scores: Vec<(Vec<f64>, Vec<f64>)> = specs
        .iter()
        .map(|s| (p.batch_scores(s, &bkg).unwrap(), p.batch_scores(s, &tgt).unwrap()))
        .collect();
    let mut ok = true;
    let mut min_tau = 1.0f64;
    for i in 0..specs.len() {
        for j in i + 1..specs.len() {
            let a = [scores[i].0.clone(), scores[i].1.clone()].concat();
            let b = [scores[j].0.clone(), scores[j].1.clone()].concat();
            let k = kendall(&a, &b).unwrap();
            ok &= k.discordant == 0;
            min_tau = min_tau.min(k.tau_b);
        }
    }
    let reference = roc_vertices(&empirical_roc(&scores[0].0, &scores[0].1).unwrap());
    let mut roc_note = String::new();
    for (s, (sb, st)) in specs.iter().zip(&scores).skip(1) {
        let v = roc_vertices(&empirical_roc(sb, st).unwrap());
        let agrees = if matches!(s, DetectorSpec::Glrt) {
            // Pixels with a nonpositive matched filter all have GLRT = 1 and
            // share one threshold, so the GLRT keeps a subset of vertices.
            v.iter().all(|pt| reference.contains(pt))
        } else {
            v == reference
        };
        ok &= agrees;
        if !agrees {
            roc_note.push_str(&format!(" {} ROC differs;", s.label()));
        }
    }
    let glrt_ties = scores[2].0.iter().chain(&scores[2].1).filter(|&&v| v == 1.0).count();
    (
        ok,
        format!(
            "no discordant pairs among 5 detectors over 500 pixels (min tau_b {min_tau:.4}, {glrt_ties} GLRT boundary ties); ROC agreement{}",
            if roc_note.is_empty() { " exact".into() } else { roc_note }
        ),
    )
}

fn c7_moments() -> Outcome {
    let mut worst_full = 0.0f64;
    let mut worst_tail = 0.0f64;
    for eps in [0.01f64, 0.1, 0.5] {
        for k in 0..=6u32 {
            // a = eps u maps the integral to eps^(k+1) int_0^inf u^k e^-u du,
            // integrated panel by panel out to u = 200.
            let quad =
                eps.powi(k as i32 + 1) * common::panelled_simpson(&|u| u.powi(k as i32) * (-u).exp(), 0.0, 200.0, 200, 1e-11);
            let full = exponential_moment(k, eps).unwrap();
            worst_full = worst_full.max(((full - quad) / quad).abs());
            // Tail beyond 1 of the exponential moment in closed form.
            let mut term = 1.0;
            let mut sum = 1.0;
            for j in 1..=k {
                term *= 1.0 / (eps * f64::from(j));
                sum += term;
            }
            let fact: f64 = (1..=k).map(f64::from).product();
            let tail = fact * eps.powi(k as i32 + 1) * (-1.0 / eps).exp() * sum;
            let trunc = truncated_exponential_moment(k, eps, 1.0).unwrap();
            worst_tail = worst_tail.max(((full - trunc - tail) / full).abs());
        }
    }
    (
        worst_full <= 1e-10 && worst_tail <= 1e-10,
        format!("max rel err vs quadrature {worst_full:.2e}; truncation gap minus closed-form tail {worst_tail:.2e}"),
    )
}

fn c8_roc_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(81);
    for case in 0..50 {
        let nb = rng.random_range(1..=200);
        let nt = rng.random_range(1..=200);
        let (b, t) = if case % 5 == 4 {
            let b: Vec<f64> = (0..nb).map(|_| rng.random::<f64>()).collect();
            let t: Vec<f64> = (0..nt).map(|_| rng.random::<f64>() + 0.2).collect();
            (b, t)
        } else {
            let range = rng.random_range(2..20);
            (common::tied_scores(&mut rng, nb, range), common::tied_scores(&mut rng, nt, range))
        };
        let auc = empirical_roc(&b, &t).unwrap().auc;
        let oracle = brute_force_auc(&b, &t);
        if auc != oracle {
            return (false, format!("case {case}: auc {auc} vs brute force {oracle}"));
        }
    }
    (true, "50 instances, AUC equals the pairwise statistic exactly".into())
}

fn c9_neyman_pearson() -> Outcome {
    let f = Fixture::new(ModelKind::Replacement, 4);
    let p = problem(&f);
    let a0 = 0.3;
    let n = 20_000;
    let far = 0.05;
    let seed = 91;
    let uniform = Prior::uniform01();
    let others = vec![
        DetectorSpec::Lmp,
        DetectorSpec::Glrt,
        DetectorSpec::MatchedFilter,
        DetectorSpec::PenalizedGlrt {
            penalty: Penalty::Exponential { scale: 0.2 },
            output: PenalizedOutput::Clairvoyant,
        },
        DetectorSpec::Bayes { prior: uniform.clone() },
        DetectorSpec::MixedStar {
            beta: 0.5,
            base_prior: uniform.clone(),
        },
        DetectorSpec::FiniteEpsMixed {
            beta: 0.5,
            epsilon: 0.01,
            base_prior: uniform.clone(),
        },
        DetectorSpec::Sculpted {
            beta0: 0.5,
            components: vec![SculptComponent {
                abundance: 0.6,
                beta: 0.5,
            }],
        },
        DetectorSpec::Clairvoyant { a0: 0.05 },
        DetectorSpec::Clairvoyant { a0: 0.6 },
    ];
    let power = |s: &DetectorSpec| power_curve(&p, s, &[a0], far, n, n, seed).unwrap().entries[0].detection_prob;
    let pc = power(&DetectorSpec::Clairvoyant { a0 });
    let mut ok = true;
    let mut notes = vec![format!("clairvoyant({a0}) power {pc:.4}")];
    for s in &others {
        let po = power(s);
        let hw = (binomial_halfwidth(pc, n, 0.99).unwrap().powi(2) + binomial_halfwidth(po, n, 0.99).unwrap().powi(2)).sqrt();
        let pass = pc >= po - hw;
        ok &= pass;
        notes.push(format!("{} {po:.4}{}", s.label(), if pass { "" } else { " (exceeds)" }));
    }
    (ok, notes.join("; "))
}

fn c10_fig1() -> Outcome {
    let eps = [0.1, 0.05, 0.025, 0.0125];
    let grid: Vec<f64> = (0..=40).map(|i| 10f64.powf(-2.0 + 2.0 * f64::from(i) / 40.0)).collect();
    let rows = emit_prior_curves(0.5, &eps, &Prior::uniform01(), &grid).unwrap();
    let n = grid.len();
    let q = |e: usize, i: usize| rows[e * n + i].q;
    let positive = rows.iter().all(|r| r.q > 0.0);
    // Far from zero the exponential part drops below one ulp of the uniform
    // floor, so adjacent values may round to the same double.
    let decreasing_in_a = (0..eps.len()).all(|e| (1..n).all(|i| q(e, i) <= q(e, i - 1)))
        && (0..eps.len()).all(|e| q(e, n - 1) < q(e, 0));
    let decreasing_in_eps = (0..n)
        .filter(|&i| grid[i] >= 0.25)
        .all(|i| (1..eps.len()).all(|e| q(e, i) < q(e - 1, i)));
    let at_half: Vec<f64> = eps
        .iter()
        .map(|&e| emit_prior_curves(0.5, &[e], &Prior::uniform01(), &[0.5]).unwrap()[0].q)
        .collect();
    (
        positive && decreasing_in_a && decreasing_in_eps,
        format!("{} rows; q(eps, 0.5) = {}", rows.len(), sci(&at_half)),
    )
}

const DETERMINISM_CONFIG: &str = r#"{
    "schema_version": 1,
    "seed": 20240611,
    "background": {"kind": "full", "mean": [0.0, 0.2, 0.1],
                   "covariance": [[1.0, 0.3, 0.1], [0.3, 1.0, 0.3], [0.1, 0.3, 1.0]]},
    "model": {"kind": "replacement", "signature": [2.0, 1.5, 2.5]},
    "detectors": [
        {"kind": "lmp"},
        {"kind": "glrt"},
        {"kind": "clairvoyant", "a0": 0.3},
        {"kind": "bayes", "prior": {"point_masses": [], "continuous": [{"density": {"kind": "uniform01"}, "weight": 1.0}]}},
        {"kind": "mixed_star", "beta": 0.5, "base_prior": {"point_masses": [], "continuous": [{"density": {"kind": "uniform01"}, "weight": 1.0}]}}
    ],
    "scene": {"n_background": 400, "target_abundances": [0.1, 0.4], "n_per_abundance": 100},
    "evaluation": {
        "far": 0.05, "a_grid": [0.05, 0.2, 0.5], "n_background": 1500, "n_target_per_a": 600,
        "epsilons": [0.02, 0.01, 0.005], "beta": 0.5, "convergence_pixels": 40,
        "sculpt": {"candidates": [0.05, 0.6], "include_lmp": true, "budget": 150}
    },
    "pipeline": ["roc", "power", "converge", "sculpt", "fig1"]
}"#;

fn c11_determinism() -> Outcome {
    let cfg = load_config(DETERMINISM_CONFIG).unwrap();
    let first = run_experiment(&cfg).unwrap();
    let text = first.to_json().unwrap();
    let replay_cfg = load_config(&text).unwrap();
    let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let second = serial.install(|| run_experiment(&replay_cfg)).unwrap();
    let json = |d: &composite_detect::harness::ResultsDocument| serde_json::to_string(&d.tables).unwrap();
    let same = first.tables == second.tables && json(&first) == json(&second) && first.config == second.config;
    (
        same,
        format!(
            "re-run from results document (single-threaded) reproduced {} bytes of tables",
            json(&first).len()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("C1 null identity", c1_null_identity),
        ("C2 gradient order", c2_gradient_order),
        ("C3 series reproduction", c3_series),
        ("C4 small-epsilon limit", c4_small_epsilon_limit),
        ("C5 delta collapse", c5_delta_collapse),
        ("C6 UMP corner", c6_ump_corner),
        ("C7 moment formula", c7_moments),
        ("C8 ROC oracle", c8_roc_oracle),
        ("C9 Neyman-Pearson spot check", c9_neyman_pearson),
        ("C10 mixed prior tables", c10_fig1),
        ("C11 determinism", c11_determinism),
    ];
    let mut failures = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let (pass, detail) = run();
        failures += usize::from(!pass);
        println!(
            "[{}] {name}: {detail} ({:.1}s)",
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of 11 criteria passed", 11 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
