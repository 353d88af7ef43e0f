//! Tunes and evaluates every classifier on one training sample per scenario.

use fdlab::classifier::{Method, MethodFitEval};
use fdlab::datagen::{sample_balanced, sample_total, scenario1, scenario2};
use fdlab::modelsel::{select, ValidationMode};

fn main() -> fdlab::Result<()> {
    let methods = [
        Method::rkhs(),
        Method::Centroid,
        Method::PlsCentroid,
        Method::Lda,
        Method::KdeBayes,
        Method::gp(),
        Method::ConstantPlus,
    ];
    for (name, spec) in [("scenario1(1.3)", scenario1(1.3)?), ("scenario2(0.8)", scenario2(0.8)?)] {
        let train = sample_balanced(&spec, 50, 11)?;
        let test = sample_total(&spec, 1000, 12)?;
        println!("{name}");
        for method in methods {
            let mode = ValidationMode::FreshValidation {
                spec: spec.clone(),
                m_val: 500,
                seed: 13,
            };
            let report = select(&train, &MethodFitEval::new(method), &method.default_grid(), &mode)?;
            let err = method.fit(&train, &report.chosen)?.error_rate(&test)?;
            println!(
                "  {:<14} {:<28} test error {err:.3}",
                method.tag(),
                report.chosen.to_string()
            );
        }
    }
    Ok(())
}
