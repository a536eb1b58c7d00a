//! Fit the three propensity estimators to one MAR sample and compare them
//! with the true propensity on fresh rows.

use fairmiss::dataset::{generate_synthetic, SyntheticSpec, Task};
use fairmiss::forest::ForestConfig;
use fairmiss::missingness::{complete_cases, inject, Mechanism, MissingnessSpec};
use fairmiss::propensity::{fit_forest, fit_logistic, FeatureTransform, LogisticConfig};
use fairmiss::weights::{estimated_weights, true_weights};
use fairmiss::RngStream;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SyntheticSpec::standard(Task::RegressionQuadratic, [5000, 5000]);
    let miss = MissingnessSpec::feature_sum(Mechanism::Mar, -1.0, 0.2, 0..5, 5..10, false);
    let (data, oracle) = inject(
        &generate_synthetic(&spec, RngStream::new(3, 1))?,
        &miss,
        RngStream::new(3, 2),
    )?;
    let columns = miss.always_observed_features(data.p());
    let cfg = LogisticConfig::default();
    let fits = [
        (
            "logistic",
            fit_logistic(&data, &columns, FeatureTransform::Identity, &cfg)?,
        ),
        (
            "logistic (cubed)",
            fit_logistic(&data, &columns, FeatureTransform::Cubed, &cfg)?,
        ),
        (
            "random forest",
            fit_forest(
                &data,
                &columns,
                &ForestConfig {
                    n_trees: 50,
                    ..ForestConfig::default()
                },
            )?,
        ),
    ];

    let fresh = generate_synthetic(&spec.with_sizes([2000, 2000]), RngStream::new(3, 3))?;
    let cc = complete_cases(&data)?;
    let truth = true_weights(&cc, &oracle)?;
    println!("model             MAE |π̂ − π|   mean |ŵ − ω₀|   B");
    for (name, fit) in &fits {
        let mut err = 0.0;
        for i in 0..fresh.n() {
            err += (fit.predict(&fresh, i)? - oracle.evaluate(&fresh, i)).abs();
        }
        let w = estimated_weights(&cc, fit)?;
        let gap: f64 = w
            .values()
            .iter()
            .zip(truth.values())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            / cc.n() as f64;
        println!(
            "{name:<16}  {:.4}          {gap:.4}          {:.2}",
            err / fresh.n() as f64,
            w.max()
        );
    }
    if let Some(model) = fits[0].1.logistic() {
        println!(
            "logistic coefficients (intercept, x0..x4, A): {:.3?}",
            model.coefficients
        );
    }
    Ok(())
}
