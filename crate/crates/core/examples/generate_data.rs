//! Draws a balanced sample from each scenario and prints class means of the
//! first coefficients and a few curve values.

use fdlab::datagen::{cross_basis, sample_balanced, scenario1, scenario2};

fn main() -> fdlab::Result<()> {
    for (name, spec) in [
        ("scenario1(1.3)", scenario1(1.3)?),
        ("scenario2(1.2)", scenario2(1.2)?),
        ("scenario2(1.2) cross-basis", cross_basis(&scenario2(1.2)?)),
    ] {
        let data = sample_balanced(&spec, 500, 7)?;
        println!("{name}: {} curves", data.len());
        for label in [1i8, -1] {
            let class: Vec<_> = data.items.iter().filter(|x| x.label() == Some(label)).collect();
            let mean = |k: usize| class.iter().map(|x| x.coeffs()[k]).sum::<f64>() / class.len() as f64;
            println!(
                "  label {label:+}: mean coeffs [{:.3}, {:.3}, {:.3}], x(0.25) = {:.3}",
                mean(0),
                mean(1),
                mean(2),
                class[0].value_at(0.25)
            );
        }
    }
    let small = sample_balanced(&scenario2(0.8)?, 2, 1)?;
    print!(
        "{}",
        small
            .to_jsonl()
            .lines()
            .next()
            .unwrap_or_default()
            .chars()
            .take(120)
            .collect::<String>()
    );
    println!("...");
    Ok(())
}
