//! Mean estimation bias against the lower bound s/24 as n₀ grows.
//!
//! True weights under MAR missingness driven by the first five features,
//! regression with a linear SVM. Prints the bias quantiles per grid point
//! and the log-log slope of the mean bias.
//!
//! ```text
//! cargo run --release --example lower_bound_assessment -- [repeats]
//! ```

use fairmiss::harness::{run, ExperimentConfig, WeightMethod};
use fairmiss::stats::percentile;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = ExperimentConfig::load(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/configs/lower_assessment.json"
    ))?;
    cfg.repeats = std::env::args()
        .nth(1)
        .map(|r| r.parse())
        .transpose()?
        .unwrap_or(30);
    let out = run(
        &cfg,
        std::thread::available_parallelism().map_or(1, |n| n.get()),
    )?;
    println!("n0      mean bias  p5       p95      s/24     regimes (large/small/inconclusive)");
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for cell in out.summary.method_cells(WeightMethod::TrueWeights.id()) {
        let rows: Vec<_> = out
            .rows
            .iter()
            .filter(|r| r.point == cell.point && r.is_ok())
            .collect();
        let s: Vec<f64> = rows.iter().filter_map(|r| r.s).collect();
        let floor = s.iter().sum::<f64>() / s.len() as f64 / 24.0;
        let count = |id: &str| rows.iter().filter(|r| r.regime == id).count();
        let bias: Vec<f64> = rows.iter().filter_map(|r| r.bias).collect();
        let mean = cell.bias_mean.unwrap();
        println!(
            "{:<6}  {mean:.4}     {:.4}   {:.4}   {floor:.4}   {}/{}/{}",
            cell.coordinate,
            percentile(&bias, 0.05),
            percentile(&bias, 0.95),
            count("large_delta_hat"),
            count("small_delta_hat"),
            count("inconclusive")
        );
        xs.push(cell.coordinate.ln());
        ys.push(mean.ln());
    }
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    println!("log-log slope of mean bias: {:.3}", num / den);
    Ok(())
}
