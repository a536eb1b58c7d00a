//! Both error bounds for hand-supplied inputs, without running an experiment.
//!
//! ```text
//! cargo run --example bound_calculator
//! cargo run --example bound_calculator -- inputs.json
//! ```
//!
//! The JSON file has the fields of `BoundInputs` plus an optional
//! `delta_hat`, the same document the `bounds` subcommand reads.

use fairmiss::bounds::{c_d, evaluate, BoundInputs, ModelClass};
use fairmiss::harness::evaluate_request;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    if let Some(path) = std::env::args().nth(1) {
        let report = evaluate_request(&std::fs::read_to_string(path)?)?;
        println!("{}", serde_json::to_string_pretty(&report)?);
        return Ok(());
    }

    let mut inputs = BoundInputs {
        n: [50_000, 50_000],
        second_moment: [1.0, 1.0],
        max_weight: 1.0,
        d: 11,
        delta: 0.05,
        task: ModelClass::Classification,
        range: (0.0, 1.0),
        tv: [Some(0.0), Some(0.0)],
        sigma2: [0.25, 0.25],
    };
    println!(
        "C_d at n_a = 50000, D = 1: {:.3}",
        c_d(inputs.task, 50_000, 1.0, 11, 0.05)?
    );
    println!("n_a      upper bound");
    for n in [1_000, 5_000, 20_000, 50_000, 200_000] {
        inputs.n = [n, n];
        let r = evaluate(&inputs, None)?;
        println!("{n:<8} {:.4}", r.upper.value.unwrap());
    }

    inputs.n = [100, 100];
    for delta_hat in [0.5, 0.0005, 0.1] {
        let lower = evaluate(&inputs, Some(delta_hat))?
            .lower
            .expect("lower bound");
        println!(
            "Δ̂ = {delta_hat}: s = {:.5}, regime {:?}, lower {:?}",
            lower.s, lower.regime, lower.value
        );
    }

    inputs.tv = [None, None];
    inputs.second_moment = [2.5, 3.0];
    inputs.max_weight = 4.0;
    inputs.n = [5_000, 5_000];
    let r = evaluate(&inputs, None)?;
    println!(
        "unknown tv, D = (2.5, 3), B = 4: concentration part {:.4} (partial = {})",
        r.upper.value.unwrap(),
        r.upper.partial
    );
    Ok(())
}
