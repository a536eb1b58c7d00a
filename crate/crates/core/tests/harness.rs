use fairmiss::harness::{run, summarize, ExperimentConfig, Sweep, WeightMethod};

fn config(name: &str) -> ExperimentConfig {
    ExperimentConfig::load(format!("{}/configs/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn small_sweep() -> ExperimentConfig {
    let mut cfg = config("imbalance_sweep.json");
    cfg.sweep = Some(Sweep::Ratio {
        total: 300,
        values: vec![1.0, 3.0],
    });
    cfg.weight_methods = vec![
        WeightMethod::Unweighted,
        WeightMethod::TrueWeights,
        WeightMethod::Logistic,
    ];
    cfg.forest.n_trees = 5;
    cfg.repeats = 3;
    cfg.mc_samples = 2000;
    cfg
}

#[test]
fn one_row_per_point_repeat_and_method() {
    let cfg = small_sweep();
    let out = run(&cfg, 2).unwrap();
    assert_eq!(out.rows.len(), 2 * 3 * 3);
    let keys: Vec<(usize, usize, String)> = out
        .rows
        .iter()
        .map(|r| (r.point, r.repeat, r.method.clone()))
        .collect();
    let mut sorted = keys.clone();
    sorted.sort_by_key(|(p, r, m)| (*p, *r, WeightMethod::from_id(m).unwrap() as usize));
    assert_eq!(keys, sorted);
    assert_eq!(out.summary.cells.len(), 2 * 3);
}

#[test]
fn row_bias_recomputes_from_its_own_columns() {
    let out = run(&small_sweep(), 1).unwrap();
    for r in &out.rows {
        assert!(r.is_ok(), "{}", r.reason);
        let dh = (r.risk0.unwrap() - r.risk1.unwrap()).abs();
        let dt = (r.true_risk0.unwrap() - r.true_risk1.unwrap()).abs();
        assert_eq!(r.delta_hat.unwrap(), dh);
        assert_eq!(r.delta_true.unwrap(), dt);
        assert_eq!(r.bias.unwrap(), (dt - dh).abs());
    }
}

#[test]
fn ratio_sweep_keeps_the_total() {
    let cfg = small_sweep();
    let out = run(&cfg, 1).unwrap();
    for p in &out.points {
        let spec = p.spec.as_ref().unwrap();
        let rate = p.complete_rate.unwrap();
        let expected = [
            300.0 / (1.0 + p.coordinate),
            300.0 * p.coordinate / (1.0 + p.coordinate),
        ];
        for a in 0..2 {
            let cc = spec.n_per_group[a] as f64 * rate[a];
            assert!(
                (cc - expected[a]).abs() <= 2.0,
                "point {}: {cc} vs {}",
                p.index,
                expected[a]
            );
        }
    }
}

#[test]
fn rerun_with_same_seed_is_identical() {
    let cfg = small_sweep();
    let strip = |mut rows: Vec<fairmiss::harness::ResultRow>| {
        rows.iter_mut().for_each(|r| r.wall_ms = 0);
        rows
    };
    let a = strip(run(&cfg, 1).unwrap().rows);
    let b = strip(run(&cfg, 1).unwrap().rows);
    assert_eq!(a, b);
    let mut other = cfg.clone();
    other.seed += 1;
    let c = strip(run(&other, 1).unwrap().rows);
    assert_ne!(a, c);
}

#[test]
fn summary_matches_a_fresh_summarize() {
    let out = run(&small_sweep(), 1).unwrap();
    assert_eq!(summarize(&out.rows), out.summary);
}

#[test]
fn lower_bound_only_for_true_weights() {
    let out = run(&small_sweep(), 1).unwrap();
    for r in &out.rows {
        let is_true = r.method == WeightMethod::TrueWeights.id();
        assert_eq!(r.s.is_some(), is_true, "{}", r.method);
        assert_eq!(r.upper_partial, Some(!is_true));
    }
}

#[test]
fn real_data_runs_on_the_fixture() {
    let mut cfg = config("compas_like_mar.json");
    cfg.repeats = 2;
    cfg.weight_methods = vec![
        WeightMethod::Unweighted,
        WeightMethod::TrueWeights,
        WeightMethod::Logistic,
    ];
    let out = run(&cfg, 1).unwrap();
    assert_eq!(out.rows.len(), 6);
    for r in &out.rows {
        assert!(r.is_ok(), "{}", r.reason);
        assert!(r.n0.unwrap() > 0 && r.n1.unwrap() > 0);
        assert!(r.delta_hat.unwrap() <= 1.0);
    }
}
