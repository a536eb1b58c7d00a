//! Weighting schemes on a tabular dataset under MCAR, MAR and MNAR
//! missingness in the last feature and the outcome.
//!
//! Uses the bundled COMPAS-like fixture. Δ_T is computed on the held-out
//! half of each random split, so it carries sampling noise of its own.
//!
//! ```text
//! cargo run --release --example real_data -- [repeats]
//! ```

use fairmiss::harness::{run, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let repeats: usize = std::env::args()
        .nth(1)
        .map(|r| r.parse())
        .transpose()?
        .unwrap_or(20);
    for mechanism in ["mcar", "mar", "mnar"] {
        let path = format!(
            "{}/configs/compas_like_{mechanism}.json",
            env!("CARGO_MANIFEST_DIR")
        );
        let mut cfg = ExperimentConfig::load(&path)?;
        cfg.repeats = repeats;
        let out = run(
            &cfg,
            std::thread::available_parallelism().map_or(1, |n| n.get()),
        )?;
        println!("{}", mechanism.to_uppercase());
        for m in &cfg.weight_methods {
            let c = out.summary.cell(0, m.id()).expect("cell");
            println!(
                "  {:<22} mean bias {:.4} (sd {:.4}), failures {}",
                m.id(),
                c.bias_mean.unwrap_or(f64::NAN),
                c.bias_sd.unwrap_or(f64::NAN),
                c.failures
            );
        }
    }
    Ok(())
}
