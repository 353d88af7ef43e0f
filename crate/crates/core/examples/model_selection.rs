//! Compares fresh-sample validation with k-fold cross-validation on the
//! default bandwidth/penalty grid and prints the best few grid points.

use fdlab::classifier::{Method, MethodFitEval};
use fdlab::datagen::{sample_balanced, scenario1};
use fdlab::modelsel::{select, ValidationMode};

fn main() -> fdlab::Result<()> {
    let spec = scenario1(1.3)?;
    let train = sample_balanced(&spec, 60, 3)?;
    let method = Method::rkhs();
    let grid = method.default_grid();
    for mode in [
        ValidationMode::FreshValidation {
            spec: spec.clone(),
            m_val: 1000,
            seed: 4,
        },
        ValidationMode::KFold { k: 5, seed: 4 },
    ] {
        let report = select(&train, &MethodFitEval::new(method), &grid, &mode)?;
        println!(
            "{:?}: chose {} (error {:.3})",
            report.mode, report.chosen, report.chosen_error
        );
        let mut table = report.table.clone();
        table.sort_by(|a, b| a.error.total_cmp(&b.error));
        for e in table.iter().take(5) {
            println!("    {:<28} {:.3}", e.point.to_string(), e.error);
        }
    }
    Ok(())
}
