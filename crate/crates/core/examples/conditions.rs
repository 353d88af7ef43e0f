//! Classifies the mean-difference series for several decay exponents and
//! measures the margin of the optimal rule in the uniform scenario.

use fdlab::conditions::{bayes_risk_scenario2, dh_power_law, dh_series, empirical_margin};
use fdlab::datagen::scenario2;

fn main() -> fdlab::Result<()> {
    println!("gamma  verdict       S(M_max)     exponent  power-law");
    for gamma in [1.1, 1.3, 1.4, 1.5, 1.6, 1.7, 2.0] {
        let v = dh_series(|j| (j as f64).powi(-2), |j| (j as f64).powf(-gamma), 1_000_000)?;
        println!(
            "{gamma:<6} {:<13} {:<12.4e} {:<9.3} {}",
            format!("{:?}", v.verdict),
            v.total(),
            v.tail_exponent.unwrap_or(f64::NAN),
            dh_power_law(2.0, gamma)
        );
    }
    println!();
    println!("mu    empirical margin  analytic  Bayes risk");
    for mu in [0.8, 1.0, 1.2, 1.5] {
        let m = empirical_margin(&scenario2(mu)?, 51, 10_000, 0)?;
        println!(
            "{mu:<5} {:<17.4e} {:<9} {:.3}",
            m.empirical_margin,
            m.analytic_margin.map(|a| format!("{a:.4}")).unwrap_or("-".into()),
            bayes_risk_scenario2(mu)?
        );
    }
    Ok(())
}
