//! Generate a synthetic population, remove values under MAR, and compare
//! the complete-case group risks with and without inverse-propensity weights.

use fairmiss::dataset::{generate_synthetic, SyntheticSpec, Task};
use fairmiss::fairness::{apg_estimate, apg_true, losses, weighted_risk};
use fairmiss::missingness::{complete_cases, inject, Mechanism, MissingnessSpec};
use fairmiss::predictors::{train_svm, SvmConfig};
use fairmiss::weights::{true_weights, unit_weights};
use fairmiss::RngStream;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = RngStream::new(7, 0);
    let spec = SyntheticSpec::standard(Task::Classification, [5000, 5000]);
    let data = generate_synthetic(&spec, root.child(1))?;

    let miss = MissingnessSpec::feature_sum(Mechanism::Mar, 0.0, -0.6, 0..5, 5..10, false);
    let (observed, oracle) = inject(&data, &miss, root.child(2))?;
    let cc = complete_cases(&observed)?;
    println!(
        "complete cases: {} of {} (group 0: {}, group 1: {})",
        cc.n(),
        observed.n(),
        cc.group_counts[0],
        cc.group_counts[1]
    );

    let g = train_svm(
        &generate_synthetic(&spec.with_sizes([1000, 1000]), root.child(3))?,
        Task::Classification,
        &SvmConfig::default(),
    )?;
    let l = losses(&g, &cc.data, None);
    let truth = apg_true(&g, &spec, 100_000, root.child(4), None)?;
    println!(
        "Δ_T = {:.4} ± {:.4} (E0 = {:.4}, E1 = {:.4})",
        truth.estimate, truth.standard_error, truth.risks[0], truth.risks[1]
    );

    for (name, w) in [
        ("unweighted", unit_weights(&cc)?),
        ("true weights", true_weights(&cc, &oracle)?),
    ] {
        let r = [weighted_risk(&l, &w, 0)?, weighted_risk(&l, &w, 1)?];
        println!(
            "{name:<12}  Ê0 = {:.4}  Ê1 = {:.4}  Δ̂ = {:.4}  B = {:.2}  D = ({:.3}, {:.3})",
            r[0].value,
            r[1].value,
            apg_estimate(&r[0], &r[1]),
            w.max(),
            w.second_moment()[0],
            w.second_moment()[1]
        );
    }
    Ok(())
}
