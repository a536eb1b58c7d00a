//! Bias of the logistic-weighted estimator as the group ratio n₁/n₀ grows
//! at a fixed total sample size.
//!
//! ```text
//! cargo run --release --example imbalance_sweep -- [total] [repeats]
//! ```

use fairmiss::harness::{run, ExperimentConfig, Sweep};
use fairmiss::stats::spearman;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = ExperimentConfig::load(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/configs/imbalance_sweep.json"
    ))?;
    let mut args = std::env::args().skip(1);
    if let (Some(t), Some(Sweep::Ratio { total, .. })) = (args.next(), cfg.sweep.as_mut()) {
        *total = t.parse()?;
    }
    cfg.repeats = args.next().map(|r| r.parse()).transpose()?.unwrap_or(10);
    let out = run(
        &cfg,
        std::thread::available_parallelism().map_or(1, |n| n.get()),
    )?;
    let cells = out.summary.method_cells(cfg.weight_methods[0].id());
    println!("n1/n0  mean bias  median");
    for c in &cells {
        println!(
            "{:<5}  {:.4}     {:.4}",
            c.coordinate,
            c.bias_mean.unwrap(),
            c.bias_median.unwrap()
        );
    }
    let x: Vec<f64> = cells.iter().map(|c| c.coordinate).collect();
    let y: Vec<f64> = cells.iter().map(|c| c.bias_mean.unwrap()).collect();
    let s = spearman(&x, &y);
    println!("Spearman rho = {:.3}, p = {:.2e}", s.rho, s.p_value);
    Ok(())
}
