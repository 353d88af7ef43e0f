//! Fits the kernel logistic classifier at a few `(h, λ)` settings under both
//! penalties and reports optimizer diagnostics and test error.

use fdlab::datagen::{sample_balanced, sample_total, scenario1};
use fdlab::rkhs::{fit, FitOptions, KernelSpec, PenaltyMode};

fn main() -> fdlab::Result<()> {
    let spec = scenario1(1.3)?;
    let train = sample_balanced(&spec, 100, 1)?;
    let test = sample_total(&spec, 1000, 2)?;
    let labels = test.labels();
    println!("penalty              h      lambda   iters  objective  status      test error");
    for penalty in [PenaltyMode::PaperSumSquares, PenaltyMode::RkhsQuadratic] {
        for (h, lambda) in [(0.5, 0.03125), (2.0, 0.03125), (2.0, 1.0), (16.0, 0.03125)] {
            let model = fit(
                &train.items,
                &train.labels(),
                KernelSpec::gaussian(h)?,
                lambda,
                penalty,
                &FitOptions::default(),
            )?;
            let pred = model.predict_many(&test.items)?;
            let err = pred.iter().zip(&labels).filter(|(p, y)| p != y).count() as f64 / labels.len() as f64;
            let r = &model.fit_report;
            println!(
                "{:<20} {h:<6} {lambda:<8} {:<6} {:<10.5} {:<11} {err:.3}",
                format!("{penalty:?}"),
                r.iterations,
                r.final_objective,
                format!("{:?}", r.status)
            );
        }
    }
    Ok(())
}
