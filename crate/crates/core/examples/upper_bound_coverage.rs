//! Coverage of the upper-bound interval `[0, Δ̂ + U]` with ω ≡ 1.
//!
//! Classification population with 50000 rows per group and missingness that
//! depends on the sensitive attribute only, so the true weights are 1.
//!
//! ```text
//! cargo run --release --example upper_bound_coverage -- [repeats]
//! ```

use fairmiss::bounds::coverage_interval;
use fairmiss::harness::{run, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = ExperimentConfig::load(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/configs/upper_coverage.json"
    ))?;
    if let Some(r) = std::env::args().nth(1) {
        cfg.repeats = r.parse()?;
    }
    let out = run(
        &cfg,
        std::thread::available_parallelism().map_or(1, |n| n.get()),
    )?;
    println!("repeat  n0      n1      Δ̂_S     bound   interval          Δ_T     covered");
    let mut covered = 0;
    for r in &out.rows {
        let (Some(dh), Some(u), Some(dt)) = (r.delta_hat, r.upper, r.delta_true) else {
            println!("{:>6}  failed: {}", r.repeat, r.reason);
            continue;
        };
        let (lo, hi) = coverage_interval(dh, u);
        let ok = lo <= dt && dt <= hi;
        covered += usize::from(ok);
        println!(
            "{:>6}  {:<6}  {:<6}  {dh:.4}  {u:.4}  [{lo:.3}, {hi:.3}]  {dt:.4}  {ok}",
            r.repeat,
            r.n0.unwrap(),
            r.n1.unwrap()
        );
    }
    println!("covered {covered}/{}", out.rows.len());
    Ok(())
}
