//! Train the linear SVM and the random forest on the regression and
//! classification populations and report held-out losses by group.

use fairmiss::dataset::{generate_synthetic, SyntheticSpec, Task};
use fairmiss::fairness::apg_holdout;
use fairmiss::forest::ForestConfig;
use fairmiss::predictors::{train_forest, train_svm, Predictor, SvmConfig};
use fairmiss::RngStream;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for task in [Task::Classification, Task::RegressionQuadratic] {
        let spec = SyntheticSpec::standard(task, [1000, 1000]);
        let train = generate_synthetic(&spec, RngStream::new(5, 1))?;
        let test = generate_synthetic(&spec.with_sizes([20_000, 20_000]), RngStream::new(5, 2))?;
        let models: [(&str, Box<dyn Predictor>); 2] = [
            (
                "linear svm",
                Box::new(train_svm(&train, task, &SvmConfig::default())?),
            ),
            (
                "random forest",
                Box::new(train_forest(
                    &train,
                    task,
                    &ForestConfig {
                        n_trees: 50,
                        ..ForestConfig::default()
                    },
                )?),
            ),
        ];
        println!("{task:?}");
        for (name, g) in &models {
            let t = apg_holdout(g.as_ref(), &test, None)?;
            println!(
                "  {name:<14} E0 = {:.4}  E1 = {:.4}  Δ = {:.4} ± {:.4}",
                t.risks[0], t.risks[1], t.estimate, t.standard_error
            );
        }
    }
    Ok(())
}
