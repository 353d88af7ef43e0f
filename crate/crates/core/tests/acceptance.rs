//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Monte-Carlo criteria use master seed 0. The process exits non-zero on a
//! failure only when `FDLAB_ACCEPTANCE_STRICT` is set, so that the regular
//! test run reports failures without aborting.

mod support;

use std::time::Instant;

use fdlab::classifier::Method;
use fdlab::conditions::{dh_power_law, dh_series, empirical_margin, Verdict};
use fdlab::datagen::scenario2;
use fdlab::experiment::{export_csv, rate_fit, run, ErrorCurve, MethodConfig, Plan, Regime, RunOutput, ScenarioConfig};
use fdlab::modelsel::{default_grid_values, Axis, Grid};
use fdlab::rkhs::{fit, gradient, gram, FitOptions, KernelSpec, PenaltyMode};
use support::{fd_gradient_error, min_eigenvalue, mixture_points, naive_decision, random_problem, random_weights};

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Outcome);

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn plan(scenarios: Vec<ScenarioConfig>, n_grid: Vec<usize>, methods: Vec<MethodConfig>) -> Plan {
    Plan {
        scenarios,
        n_grid,
        repetitions: 20,
        m_test: 500,
        methods,
        ..Plan::default()
    }
}

fn run_plan(p: &Plan) -> RunOutput {
    run(p).expect("plan runs")
}

fn describe(c: &ErrorCurve) -> String {
    c.points
        .iter()
        .map(|p| format!("n={} mean={:.4} sd={:.4}", p.n, p.mean, p.std))
        .collect::<Vec<_>>()
        .join("; ")
}

fn c1_series_verdicts() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut notes = Vec::new();
    for (gamma, want) in [
        (1.3, Verdict::Divergent),
        (1.4, Verdict::Divergent),
        (1.6, Verdict::Convergent),
        (1.7, Verdict::Convergent),
    ] {
        let v = dh_series(|j| (j as f64).powi(-2), |j| (j as f64).powf(-gamma), 1_000_000).unwrap();
        let law = dh_power_law(2.0, gamma);
        ok &= v.verdict == want && law == (want == Verdict::Divergent);
        notes.push(format!("γ={gamma}: {:?}/{law}", v.verdict));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 5.0;
    outcome(ok, format!("{} ({secs:.2}s)", notes.join(", ")))
}

fn c2_margin_oracle() -> Outcome {
    let start = Instant::now();
    let hard = empirical_margin(&scenario2(1.2).unwrap(), 51, 10_000, 0)
        .unwrap()
        .empirical_margin;
    let soft = empirical_margin(&scenario2(0.8).unwrap(), 51, 10_000, 0)
        .unwrap()
        .empirical_margin;
    let secs = start.elapsed().as_secs_f64();
    let ok = (0.3456..=0.40).contains(&hard) && soft < 0.05 && secs < 5.0;
    outcome(ok, format!("μ=1.2: {hard:.4}, μ=0.8: {soft:.2e} ({secs:.2}s)"))
}

fn c3_solver() -> Outcome {
    let mut worst = 0.0f64;
    let mut monotone = true;
    for seed in 0..20 {
        let (data, h, lambda) = random_problem(seed, 5);
        let kernel = KernelSpec::gaussian(h).unwrap();
        let g = gram(&data.items, &kernel).unwrap();
        let y: Vec<f64> = data.labels().iter().map(|l| *l as f64).collect();
        let w = random_weights(seed, data.len());
        for mode in [PenaltyMode::PaperSumSquares, PenaltyMode::RkhsQuadratic] {
            let an = gradient(&w, &g, &y, lambda, mode).unwrap();
            worst = worst.max(fd_gradient_error(&w, &g, &y, lambda, mode, &an));
            let m = fit(
                &data.items,
                &data.labels(),
                kernel,
                lambda,
                mode,
                &FitOptions::default(),
            )
            .unwrap();
            monotone &= m.fit_report.history.windows(2).all(|p| p[1] <= p[0]);
        }
    }
    outcome(
        worst < 1e-5 && monotone,
        format!("max relative gradient error {worst:.2e}, monotone histories: {monotone}"),
    )
}

fn c4_oracles() -> Outcome {
    let (data, h, lambda) = random_problem(44, 20);
    let m = fit(
        &data.items,
        &data.labels(),
        KernelSpec::gaussian(h).unwrap(),
        lambda,
        PenaltyMode::PaperSumSquares,
        &FitOptions::default(),
    )
    .unwrap();
    let pts = mixture_points(45, 50);
    let fast = m.decision_values(&pts).unwrap();
    let dev = pts
        .iter()
        .zip(&fast)
        .map(|(x, f)| (naive_decision(&m, x) - f).abs())
        .fold(0.0, f64::max);
    let mut min_eig = f64::INFINITY;
    for seed in 0..10 {
        let pts = mixture_points(100 + seed, 50);
        let h = 2f64.powi(seed as i32 - 5);
        min_eig = min_eig.min(min_eigenvalue(&gram(&pts, &KernelSpec::gaussian(h).unwrap()).unwrap()));
    }
    let scale = fast.iter().fold(0.0f64, |a, f| a.max(f.abs()));
    outcome(
        dev <= 1e-12 && min_eig >= -1e-10,
        format!("max |naive − production| {dev:.2e} (max |f| {scale:.3}), min Gram eigenvalue {min_eig:.2e}"),
    )
}

fn c5_hard_margin() -> Outcome {
    let start = Instant::now();
    let p = plan(
        vec![ScenarioConfig::scenario2(1.2)],
        vec![25, 50, 100, 200],
        vec![MethodConfig::new(Method::rkhs())],
    );
    let out = run_plan(&p);
    let c = &out.curves[0];
    let median = c.point(200).unwrap().median();
    let fit = rate_fit(c, &p.regime).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let ok = median <= 0.02 && fit.regime == Regime::Exponential && secs <= 900.0;
    outcome(
        ok,
        format!(
            "median@200 {median:.4}, regime {} (b_exp {:.2e}, r2_exp {:.3}, r2_poly {:.3}); {} ({secs:.0}s)",
            fit.regime,
            fit.b_exp,
            fit.r2_exp,
            fit.r2_poly,
            describe(c)
        ),
    )
}

fn c6_bayes_floor() -> Outcome {
    let p = plan(
        vec![ScenarioConfig::scenario2(0.8)],
        vec![25, 50, 100, 200, 400],
        vec![MethodConfig::new(Method::rkhs())],
    );
    let out = run_plan(&p);
    let c = &out.curves[0];
    let mean = c.point(400).unwrap().mean;
    let fit = rate_fit(c, &p.regime).unwrap();
    let ok = (mean - 0.10).abs() <= 0.04 && fit.regime != Regime::Exponential;
    outcome(
        ok,
        format!(
            "mean@400 {mean:.4}, regime {} (b_exp {:.2e}, r2_exp {:.3}, r2_poly {:.3}); {}",
            fit.regime,
            fit.b_exp,
            fit.r2_exp,
            fit.r2_poly,
            describe(c)
        ),
    )
}

/// Non-increasing means, allowing one increase no larger than the pooled
/// standard deviation of the two neighbouring points.
fn nearly_monotone(c: &ErrorCurve) -> bool {
    let mut inversions = 0;
    for w in c.points.windows(2) {
        let rise = w[1].mean - w[0].mean;
        if rise > 0.0 {
            let pooled = ((w[0].std.powi(2) + w[1].std.powi(2)) / 2.0).sqrt();
            if rise > pooled {
                return false;
            }
            inversions += 1;
        }
    }
    inversions <= 1
}

fn c7_scenario1_shape() -> Outcome {
    let p = plan(
        vec![ScenarioConfig::scenario1(1.3), ScenarioConfig::scenario1(1.7)],
        vec![25, 50, 100, 200, 400],
        vec![MethodConfig::new(Method::rkhs())],
    );
    let out = run_plan(&p);
    let ok = out.curves.iter().all(nearly_monotone);
    let detail = out
        .curves
        .iter()
        .map(|c| format!("γ={}: {}", c.param, describe(c)))
        .collect::<Vec<_>>()
        .join(" | ");
    outcome(ok, detail)
}

fn fixed_bandwidth(h: f64) -> MethodConfig {
    let grid = Grid::new(vec![
        Axis::new("h", vec![h]),
        Axis::new("lambda", default_grid_values()),
    ])
    .unwrap();
    MethodConfig::named(format!("rkhs_h{h}"), Method::rkhs(), grid)
}

fn c8_bandwidth_sweep() -> Outcome {
    let p = plan(
        vec![ScenarioConfig::scenario1(1.3)],
        vec![200],
        vec![
            MethodConfig::named("rkhs_cv", Method::rkhs(), Grid::default_rkhs()),
            fixed_bandwidth(10.0),
            fixed_bandwidth(50.0),
            fixed_bandwidth(100.0),
        ],
    );
    let out = run_plan(&p);
    let mean = |name: &str| out.curves.iter().find(|c| c.method == name).unwrap().points[0].mean;
    let (cv, h100) = (mean("rkhs_cv"), mean("rkhs_h100"));
    let detail = out
        .curves
        .iter()
        .map(|c| format!("{} {:.4}", c.method, c.points[0].mean))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(h100 > cv, detail)
}

fn c9_baselines() -> Outcome {
    let methods = [
        Method::Centroid,
        Method::KdeBayes,
        Method::gp(),
        Method::Lda,
        Method::PlsCentroid,
    ];
    let p = plan(
        vec![ScenarioConfig::scenario2(1.5)],
        vec![100, 200],
        methods.iter().map(|m| MethodConfig::new(*m)).collect(),
    );
    let out = run_plan(&p);
    let mut ok = true;
    let mut notes = Vec::new();
    for c in &out.curves {
        let (e100, e200) = (c.point(100).unwrap().mean, c.point(200).unwrap().mean);
        let nonlinear = matches!(c.method.as_str(), "centroid" | "kde_bayes" | "gp_laplace");
        if nonlinear {
            ok &= e200 <= 0.02;
        }
        notes.push(format!("{} {e100:.4}->{e200:.4}", c.method));
    }
    outcome(ok, notes.join(", "))
}

fn c10_determinism() -> Outcome {
    let p = Plan {
        repetitions: 3,
        ..plan(
            vec![ScenarioConfig::scenario1(1.3), ScenarioConfig::scenario2(0.8)],
            vec![25, 50],
            vec![MethodConfig::new(Method::rkhs()), MethodConfig::new(Method::Centroid)],
        )
    };
    let csv = || {
        let dir = tempfile::tempdir().unwrap();
        let (long, _) = export_csv(&run_plan(&p).curves, dir.path(), &p.regime).unwrap();
        std::fs::read(long).unwrap()
    };
    let (a, b) = (csv(), csv());
    outcome(a == b, format!("{} bytes, identical: {}", a.len(), a == b))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 series verdicts", c1_series_verdicts),
        ("2 margin oracle", c2_margin_oracle),
        ("3 solver gradient", c3_solver),
        ("4 oracle equivalence", c4_oracles),
        ("5 hard-margin convergence", c5_hard_margin),
        ("6 Bayes floor", c6_bayes_floor),
        ("7 scenario 1 shape", c7_scenario1_shape),
        ("8 bandwidth sweep", c8_bandwidth_sweep),
        ("9 baseline sanity", c9_baselines),
        ("10 determinism", c10_determinism),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} criterion {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 && std::env::var_os("FDLAB_ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
