//! Runs a small error-rate study, fits decay regimes and writes CSV, SVG and
//! a manifest into a directory under the system temp dir.

use fdlab::classifier::Method;
use fdlab::experiment::{export_svg, rate_fit, run, write_outputs, MethodConfig, Plan, PlotAxes, ScenarioConfig};

fn main() -> fdlab::Result<()> {
    let plan = Plan {
        scenarios: vec![ScenarioConfig::scenario1(1.3), ScenarioConfig::scenario2(0.8)],
        n_grid: vec![10, 20, 40, 80],
        repetitions: 5,
        m_test: 300,
        m_val: 300,
        methods: vec![MethodConfig::new(Method::rkhs()), MethodConfig::new(Method::Centroid)],
        ..Plan::default()
    };
    let out = run(&plan)?;
    for c in &out.curves {
        let fit = rate_fit(c, &plan.regime)?;
        let means: Vec<String> = c.points.iter().map(|p| format!("{:.3}", p.mean)).collect();
        println!(
            "{:<10} {:<10} [{}] regime {}",
            c.method,
            c.scenario,
            means.join(", "),
            fit.regime
        );
    }
    let dir = std::env::temp_dir().join("fdlab_rate_experiment");
    let manifest = write_outputs(&out, &plan, &dir)?;
    export_svg(&out.curves, &dir.join("curves.svg"), PlotAxes::LogLog)?;
    println!(
        "wrote outputs to {} (config {})",
        dir.display(),
        &manifest.config_hash[..12]
    );
    Ok(())
}
