mod support;

use fdlab::basis::{FuncObs, IpMode};
use fdlab::classifier::{Method, MethodFitEval};
use fdlab::datagen::{cross_basis, sample_balanced, scenario1, scenario2};
use fdlab::modelsel::{default_grid_values, select, ValidationMode};
use fdlab::rkhs::{
    fit, gradient, gram, kernel_eval, logit_loss, objective, FitOptions, FitStatus, KernelSpec, PenaltyMode, RkhsModel,
};
use proptest::prelude::*;
use support::{
    fd_gradient_error, min_eigenvalue, mixture_points, naive_decision, random_points, random_problem, random_weights,
};

const MODES: [PenaltyMode; 2] = [PenaltyMode::PaperSumSquares, PenaltyMode::RkhsQuadratic];

fn labels_f64(l: &[i8]) -> Vec<f64> {
    l.iter().map(|v| *v as f64).collect()
}

#[test]
fn analytic_gradient_matches_finite_differences() {
    for seed in 0..20 {
        let (data, h, lambda) = random_problem(seed, 5);
        let g = gram(&data.items, &KernelSpec::gaussian(h).unwrap()).unwrap();
        let y = labels_f64(&data.labels());
        let w = random_weights(seed, data.len());
        for mode in MODES {
            let an = gradient(&w, &g, &y, lambda, mode).unwrap();
            let err = fd_gradient_error(&w, &g, &y, lambda, mode, &an);
            assert!(err < 1e-5, "seed {seed} {mode:?}: {err}");
        }
    }
}

#[test]
fn objective_matches_scalar_recomputation() {
    let (data, h, lambda) = random_problem(7, 2);
    let data = data.subset(&[0, 1, 2]);
    let kernel = KernelSpec::gaussian(h).unwrap();
    let g = gram(&data.items, &kernel).unwrap();
    let y = labels_f64(&data.labels());
    let w = [0.3, -1.2, 0.8];
    for mode in MODES {
        let mut loss = 0.0;
        let mut quad = 0.0;
        for i in 0..3 {
            let mut f = 0.0;
            for j in 0..3 {
                let k = kernel_eval(&kernel, &data.items[i], &data.items[j]).unwrap();
                f += w[j] * k;
                quad += w[i] * k * w[j];
            }
            loss += (1.0 + (-y[i] * f).exp()).ln();
        }
        let pen = match mode {
            PenaltyMode::PaperSumSquares => w.iter().map(|v| v * v).sum::<f64>(),
            PenaltyMode::RkhsQuadratic => quad,
        };
        let expected = loss / 3.0 + lambda * pen;
        let got = objective(&w, &g, &y, lambda, mode).unwrap();
        assert!((got - expected).abs() < 1e-12, "{mode:?}: {got} vs {expected}");
    }
}

#[test]
fn fits_descend_monotonically_and_beat_zero() {
    for seed in 0..10 {
        let (data, h, lambda) = random_problem(100 + seed, 8);
        for mode in MODES {
            let m = fit(
                &data.items,
                &data.labels(),
                KernelSpec::gaussian(h).unwrap(),
                lambda,
                mode,
                &FitOptions::default(),
            )
            .unwrap();
            let hist = &m.fit_report.history;
            assert!(hist.windows(2).all(|w| w[1] <= w[0]), "seed {seed}");
            assert!(m.fit_report.final_objective <= std::f64::consts::LN_2 + 1e-15);
            assert_eq!(m.fit_report.status, FitStatus::Converged);
        }
    }
}

#[test]
fn production_decision_values_match_double_loop() {
    let (data, h, lambda) = random_problem(9, 20);
    let m = fit(
        &data.items,
        &data.labels(),
        KernelSpec::gaussian(h).unwrap(),
        lambda,
        PenaltyMode::PaperSumSquares,
        &FitOptions::default(),
    )
    .unwrap();
    let pts = mixture_points(10, 50);
    let fast = m.decision_values(&pts).unwrap();
    let bound: f64 = m.weights.iter().map(|w| w.abs()).sum();
    for (x, f) in pts.iter().zip(fast) {
        assert!((naive_decision(&m, x) - f).abs() < 1e-12);
        assert!(f.abs() <= bound);
    }
}

#[test]
fn gram_is_positive_semidefinite() {
    for seed in 0..5 {
        let pts = mixture_points(seed, 50);
        for h in [0.1, 1.0, 10.0] {
            let g = gram(&pts, &KernelSpec::gaussian(h).unwrap()).unwrap();
            assert!(min_eigenvalue(&g) >= -1e-10);
            assert!((0..50).all(|i| g[(i, i)] == 1.0));
            assert_eq!(g, g.transpose());
        }
    }
}

#[test]
fn weight_norm_shrinks_with_lambda() {
    let (data, _, _) = random_problem(21, 15);
    let kernel = KernelSpec::gaussian(2.0).unwrap();
    let norms: Vec<f64> = default_grid_values()
        .into_iter()
        .map(|l| {
            let m = fit(
                &data.items,
                &data.labels(),
                kernel,
                l,
                PenaltyMode::PaperSumSquares,
                &FitOptions::default(),
            )
            .unwrap();
            m.weights.iter().map(|w| w * w).sum::<f64>().sqrt()
        })
        .collect();
    assert!(norms.windows(2).all(|w| w[0] >= w[1]), "{norms:?}");
}

#[test]
fn mirrored_labels_negate_decisions() {
    let data = sample_balanced(&scenario1(1.4).unwrap(), 10, 3).unwrap();
    let flipped = data.with_flipped_labels();
    let kernel = KernelSpec::gaussian(1.0).unwrap();
    let a = fit(
        &data.items,
        &data.labels(),
        kernel,
        0.1,
        PenaltyMode::PaperSumSquares,
        &FitOptions::default(),
    )
    .unwrap();
    let b = fit(
        &flipped.items,
        &flipped.labels(),
        kernel,
        0.1,
        PenaltyMode::PaperSumSquares,
        &FitOptions::default(),
    )
    .unwrap();
    let probes = random_points(4, 20, 51);
    for (x, y) in a
        .decision_values(&probes)
        .unwrap()
        .iter()
        .zip(b.decision_values(&probes).unwrap())
    {
        assert!((x + y).abs() < 1e-12);
    }
    let err = |m: &RkhsModel, d: &fdlab::datagen::Dataset| {
        let p = m.predict_many(&d.items).unwrap();
        p.iter().zip(d.labels()).filter(|(a, b)| **a != *b).count()
    };
    assert_eq!(err(&a, &data), err(&b, &flipped));
}

#[test]
fn zero_weights_predict_plus() {
    let data = sample_balanced(&scenario2(1.2).unwrap(), 3, 1).unwrap();
    let mut m = fit(
        &data.items,
        &data.labels(),
        KernelSpec::gaussian(1.0).unwrap(),
        1.0,
        PenaltyMode::PaperSumSquares,
        &FitOptions::default(),
    )
    .unwrap();
    m.weights.iter_mut().for_each(|w| *w = 0.0);
    assert_eq!(m.decision_value(&data.items[0]).unwrap(), 0.0);
    assert_eq!(m.predict(&data.items[0]).unwrap(), 1);
    assert_eq!(logit_loss(0.0), std::f64::consts::LN_2);
}

#[test]
fn separable_scenario_reaches_zero_training_error() {
    let spec = scenario2(1.2).unwrap();
    let train = sample_balanced(&spec, 100, 5).unwrap();
    let mode = ValidationMode::FreshValidation {
        spec,
        m_val: 1000,
        seed: 6,
    };
    let method = Method::rkhs();
    let report = select(&train, &MethodFitEval::new(method), &method.default_grid(), &mode).unwrap();
    let model = method.fit(&train, &report.chosen).unwrap();
    assert_eq!(model.error_rate(&train).unwrap(), 0.0);
}

#[test]
fn grid_mode_handles_cross_basis_inputs() {
    let spec = cross_basis(&scenario2(1.5).unwrap());
    let train = sample_balanced(&spec, 15, 2).unwrap();
    let test = sample_balanced(&spec, 50, 3).unwrap();
    let kernel = KernelSpec::new(1.0, IpMode::Grid(256)).unwrap();
    assert!(gram(&train.items, &KernelSpec::gaussian(1.0).unwrap()).is_err());
    let m = fit(
        &train.items,
        &train.labels(),
        kernel,
        0.01,
        PenaltyMode::PaperSumSquares,
        &FitOptions::default(),
    )
    .unwrap();
    let wrong = m
        .predict_many(&test.items)
        .unwrap()
        .iter()
        .zip(test.labels())
        .filter(|(a, b)| **a != *b)
        .count();
    assert!(wrong <= 5, "{wrong}");
}

#[test]
fn model_json_roundtrip() {
    let (data, h, lambda) = random_problem(30, 4);
    let m = fit(
        &data.items,
        &data.labels(),
        KernelSpec::gaussian(h).unwrap(),
        lambda,
        PenaltyMode::RkhsQuadratic,
        &FitOptions::default(),
    )
    .unwrap();
    let back: RkhsModel = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
    assert_eq!(back.weights, m.weights);
    let probe: Vec<FuncObs> = random_points(31, 5, 51);
    assert_eq!(
        back.decision_values(&probe).unwrap(),
        m.decision_values(&probe).unwrap()
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn regularized_fit_never_worse_than_zero(seed in any::<u64>(), lambda in 0.01f64..10.0, h in 0.1f64..10.0) {
        let (data, _, _) = random_problem(seed, 4);
        let m = fit(&data.items, &data.labels(), KernelSpec::gaussian(h).unwrap(), lambda, PenaltyMode::PaperSumSquares, &FitOptions::default()).unwrap();
        prop_assert!(m.fit_report.final_objective <= std::f64::consts::LN_2);
        prop_assert!(m.fit_report.history.windows(2).all(|w| w[1] <= w[0]));
    }
}
