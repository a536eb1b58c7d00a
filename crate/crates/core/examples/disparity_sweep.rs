//! Bias as the feature-mean gap between the groups widens: features are
//! drawn from N(1 − 2M·A, 0.5²) for a grid of M.
//!
//! ```text
//! cargo run --release --example disparity_sweep -- [n_per_group] [repeats]
//! ```

use fairmiss::harness::{run, ExperimentConfig};
use fairmiss::stats::spearman;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = ExperimentConfig::load(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/configs/disparity_sweep.json"
    ))?;
    let mut args = std::env::args().skip(1);
    if let Some(n) = args.next() {
        let n: usize = n.parse()?;
        cfg.synthetic
            .as_mut()
            .expect("synthetic config")
            .n_per_group = [n, n];
    }
    cfg.repeats = args.next().map(|r| r.parse()).transpose()?.unwrap_or(10);
    let out = run(
        &cfg,
        std::thread::available_parallelism().map_or(1, |n| n.get()),
    )?;
    let cells = out.summary.method_cells(cfg.weight_methods[0].id());
    println!("M     mean bias  Δ_T mean");
    for c in &cells {
        println!(
            "{:<4}  {:.4}     {:.4}",
            c.coordinate,
            c.bias_mean.unwrap(),
            c.delta_true_mean.unwrap()
        );
    }
    let x: Vec<f64> = cells.iter().map(|c| c.coordinate).collect();
    let y: Vec<f64> = cells.iter().map(|c| c.bias_mean.unwrap()).collect();
    let s = spearman(&x, &y);
    println!("Spearman rho = {:.3}, p = {:.2e}", s.rho, s.p_value);
    Ok(())
}
