use fdlab::basis::BasisId;
use fdlab::conditions::{
    dh_power_law, dh_ratio, dh_ratio_for_label, dh_series, empirical_margin, f_star, f_star_label, identity_overlap,
    psi_m, Verdict,
};
use fdlab::datagen::{sample_total, scenario1, scenario2, NoiseLaw, SpectralSpec};

/// `Σ_{j=1}^{M} j^{-s}` by direct summation to `N` and Euler–Maclaurin beyond.
fn euler_maclaurin_partial(s: f64, m: usize) -> f64 {
    let n = 50usize;
    let f = |x: f64| x.powf(-s);
    let d1 = |x: f64| -s * x.powf(-s - 1.0);
    let d3 = |x: f64| -s * (s + 1.0) * (s + 2.0) * x.powf(-s - 3.0);
    let head: f64 = (1..n).map(|j| f(j as f64)).sum();
    let (a, b) = (n as f64, m as f64);
    let integral = (b.powf(1.0 - s) - a.powf(1.0 - s)) / (1.0 - s);
    head + integral + 0.5 * (f(a) + f(b)) + (d1(b) - d1(a)) / 12.0 - (d3(b) - d3(a)) / 720.0
}

#[test]
fn series_matches_euler_maclaurin_oracle() {
    let m_max = 1_000_000;
    let r = dh_series(|j| (j as f64).powi(-2), |j| (j as f64).powf(-1.7), m_max).unwrap();
    assert_eq!(r.verdict, Verdict::Convergent);
    let oracle = euler_maclaurin_partial(1.4, m_max);
    assert!((r.total() - oracle).abs() < 1e-2, "{} vs {oracle}", r.total());
    for (m, s) in &r.partial_sums {
        assert!((s - euler_maclaurin_partial(1.4, *m)).abs() < 1e-6 * s, "M={m}");
    }
    assert!(r.partial_sums.windows(2).all(|w| w[0].1 <= w[1].1));
}

#[test]
fn series_verdicts_agree_with_power_law() {
    for gamma in [1.1, 1.3, 1.4, 1.6, 1.7, 2.0] {
        let r = dh_series(|j| (j as f64).powi(-2), |j| (j as f64).powf(-gamma), 1_000_000).unwrap();
        let expected = if dh_power_law(2.0, gamma) {
            Verdict::Divergent
        } else {
            Verdict::Convergent
        };
        assert_eq!(r.verdict, expected, "gamma {gamma}");
        let p = r.tail_exponent.unwrap();
        assert!((p - (2.0 - 2.0 * gamma)).abs() < 1e-3, "gamma {gamma}: exponent {p}");
    }
    let boundary = dh_series(|j| (j as f64).powi(-2), |j| (j as f64).powf(-1.5), 1_000_000).unwrap();
    assert_eq!(boundary.verdict, Verdict::Inconclusive);
    assert!(dh_power_law(2.0, 1.5));
}

#[test]
fn ratio_with_identity_overlap_equals_partial_sum() {
    for gamma in [1.3, 1.7] {
        let spec = scenario1(gamma).unwrap();
        let series = dh_series(|j| (j as f64).powi(-2), |j| (j as f64).powf(-gamma), 100).unwrap();
        let mut prev = 0.0;
        for m in 1..=spec.truncation() {
            let s_m: f64 = (0..m).map(|i| spec.mu_plus[i].powi(2) / spec.theta[i]).sum();
            let r = dh_ratio_for_label(&spec, m, -1).unwrap();
            assert!((r.value - s_m).abs() <= 1e-10 * s_m, "M={m}");
            assert!(r.value >= prev);
            prev = r.value;
        }
        let s10 = series.partial_sums.iter().find(|p| p.0 == 10).unwrap().1;
        let r10 = dh_ratio(&spec, &identity_overlap(spec.truncation()), 10).unwrap();
        assert!((r10.value - s10).abs() <= 1e-10 * s10);
    }
}

#[test]
fn cross_basis_ratio_uses_quadrature_overlap() {
    let spec = fdlab::datagen::cross_basis(&scenario1(1.3).unwrap());
    let same = dh_ratio_for_label(&spec, 10, 1).unwrap();
    let cross = dh_ratio_for_label(&spec, 10, -1).unwrap();
    assert!(!cross.zero_denominator && cross.value.is_finite() && cross.value > 0.0);
    assert!((cross.value - same.value).abs() > 1e-6);
}

#[test]
fn psi_for_scenario1_first_entries() {
    let spec = scenario1(1.3).unwrap();
    let psi = psi_m(&spec, 2).unwrap();
    assert!((psi.coeffs()[0] - 1.0).abs() < 1e-15);
    assert!((psi.coeffs()[1] - 2f64.powf(0.7)).abs() < 1e-12);
    assert!(psi.coeffs()[2..].iter().all(|c| *c == 0.0));
}

#[test]
fn f_star_scale_invariance_of_sign() {
    // Scaling the mean difference scales ψ; sign(f*) must not change.
    let spec = scenario1(1.4).unwrap();
    let probes = sample_total(&spec, 200, 5).unwrap();
    let c = 3.0_f64;
    let scaled = SpectralSpec::new(
        spec.theta.iter().map(|t| t * c).collect(),
        spec.mu_plus.clone(),
        spec.mu_minus.clone(),
        NoiseLaw::StdNormal,
        spec.basis_plus,
        spec.basis_minus,
    )
    .unwrap();
    for x in &probes.items {
        let a = f_star(x, &spec, 20).unwrap();
        let b = f_star(x, &scaled, 20).unwrap();
        assert!((b - a / (c * c)).abs() <= 1e-9 * (1.0 + a.abs()));
        assert_eq!(f_star_label(a), f_star_label(b));
    }
}

#[test]
fn margin_hard_and_overlapping_cases() {
    let hard = empirical_margin(&scenario2(1.2).unwrap(), 51, 10_000, 1).unwrap();
    assert!((0.3456 - 1e-12..=0.40).contains(&hard.empirical_margin), "{hard:?}");
    assert!((hard.analytic_margin.unwrap() - 0.3456).abs() < 1e-12);
    let soft = empirical_margin(&scenario2(0.8).unwrap(), 51, 10_000, 1).unwrap();
    assert!(soft.empirical_margin < 0.05 && soft.analytic_margin.is_none());
}

#[test]
fn margin_median_non_increasing_in_probe_count() {
    let spec = scenario2(1.2).unwrap();
    let median = |n: usize| {
        let mut v: Vec<f64> = (0..9)
            .map(|s| empirical_margin(&spec, 51, n, 100 + s).unwrap().empirical_margin)
            .collect();
        v.sort_by(f64::total_cmp);
        v[4]
    };
    let (a, b, c) = (median(100), median(1_000), median(10_000));
    assert!(a >= b && b >= c, "{a} {b} {c}");
}

#[test]
fn f_star_rejects_foreign_basis() {
    let spec = scenario2(1.2).unwrap();
    let x = fdlab::basis::FuncObs::unlabeled(BasisId::cosine(51), vec![0.0; 51]).unwrap();
    assert!(f_star(&x, &spec, 3).is_err());
}
