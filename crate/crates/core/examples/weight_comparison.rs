//! Estimation bias of the five weighting schemes on one MAR population.
//!
//! ```text
//! cargo run --release --example weight_comparison -- [repeats]
//! ```

use fairmiss::harness::{run, ExperimentConfig, WeightMethod};
use fairmiss::stats::sign_test_less;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = ExperimentConfig::load(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/configs/weight_comparison.json"
    ))?;
    cfg.repeats = std::env::args()
        .nth(1)
        .map(|r| r.parse())
        .transpose()?
        .unwrap_or(20);
    let out = run(
        &cfg,
        std::thread::available_parallelism().map_or(1, |n| n.get()),
    )?;
    println!("method                  mean bias  sd       median   failures");
    for m in &cfg.weight_methods {
        let c = out.summary.cell(0, m.id()).expect("cell");
        println!(
            "{:<22}  {:.4}     {:.4}   {:.4}   {}",
            m.id(),
            c.bias_mean.unwrap_or(f64::NAN),
            c.bias_sd.unwrap_or(f64::NAN),
            c.bias_median.unwrap_or(f64::NAN),
            c.failures
        );
    }
    let bias = |m: WeightMethod| -> Vec<f64> {
        out.rows
            .iter()
            .filter(|r| r.method == m.id())
            .filter_map(|r| r.bias)
            .collect()
    };
    for (a, b) in [
        (WeightMethod::TrueWeights, WeightMethod::Unweighted),
        (WeightMethod::Logistic, WeightMethod::LogisticMisspecified),
    ] {
        let (wins, n, p) = sign_test_less(&bias(a), &bias(b));
        println!(
            "{} below {} in {wins}/{n} repeats, one-sided p = {p:.3}",
            a.id(),
            b.id()
        );
    }
    Ok(())
}
