use fairmiss::bounds::{c_d, lower_bound, upper_bound, BoundInputs, ModelClass};
use fairmiss::dataset::{generate_synthetic, split, Dataset, SyntheticSpec, Task};
use fairmiss::fairness::{apg_estimate, weighted_risk};
use fairmiss::missingness::{complete_cases, inject, MissingnessSpec};
use fairmiss::{RngStream, WeightVector};
use proptest::prelude::*;

/// Groups with both labels present, paired with propensities in (0, 1].
fn groups_and_pi(max_len: usize) -> impl Strategy<Value = (Vec<u8>, Vec<f64>)> {
    prop::collection::vec((0u8..2, 0.01f64..=1.0), 2..max_len).prop_map(|mut v| {
        v[0].0 = 0;
        v[1].0 = 1;
        v.into_iter().unzip()
    })
}

fn with_losses(max_len: usize) -> impl Strategy<Value = (Vec<u8>, Vec<f64>, Vec<f64>)> {
    groups_and_pi(max_len).prop_flat_map(|(g, pi)| {
        let n = g.len();
        (Just(g), Just(pi), prop::collection::vec(0.0f64..=1.0, n))
    })
}

fn brute_force_risk(groups: &[u8], pi: &[f64], loss: &[f64], a: u8) -> f64 {
    let mut n_a = 0.0;
    let mut inv_sum = 0.0;
    for i in 0..groups.len() {
        if groups[i] == a {
            n_a += 1.0;
            inv_sum += 1.0 / pi[i];
        }
    }
    let mut total = 0.0;
    for i in 0..groups.len() {
        if groups[i] == a {
            total += n_a * (1.0 / pi[i]) / inv_sum * loss[i];
        }
    }
    total / n_a
}

fn c_d_reference(task: ModelClass, n: f64, dm: f64, d: f64, delta: f64) -> f64 {
    let e = std::f64::consts::E;
    match task {
        ModelClass::Classification => {
            ((d + 1.0) * (8.0 * e).powf(d + 1.0) / delta).ln() + d / 2.0 * (n / (2.0 * dm)).ln()
        }
        ModelClass::Regression => {
            ((4.0 / delta) * (8.0 * e / d).powf(d)).ln()
                + 1.5 * d * (n / (2.0 * dm).powf(1.0 / 3.0)).ln()
        }
    }
}

fn task() -> impl Strategy<Value = ModelClass> {
    prop_oneof![
        Just(ModelClass::Classification),
        Just(ModelClass::Regression)
    ]
}

/// Bound inputs with D_a ∈ [1, B²] and n_a ≥ d.
fn bound_inputs() -> impl Strategy<Value = BoundInputs> {
    (
        (50usize..200_000, 50usize..200_000),
        1.0f64..20.0,
        (0.0f64..=1.0, 0.0f64..=1.0),
        1usize..30,
        0.001f64..0.5,
        task(),
        (0.0f64..0.3, 0.0f64..0.3),
    )
        .prop_map(
            |((n0, n1), b, (u0, u1), d, delta, task, (t0, t1))| BoundInputs {
                n: [n0, n1],
                second_moment: [1.0 + u0 * (b * b - 1.0), 1.0 + u1 * (b * b - 1.0)],
                max_weight: b,
                d,
                delta,
                task,
                range: (0.0, 1.0),
                tv: [Some(t0), Some(t1)],
                sigma2: [0.0, 0.0],
            },
        )
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn weights_have_unit_group_mean((groups, pi) in groups_and_pi(300)) {
        let w = WeightVector::from_propensities(&groups, &pi).unwrap();
        for a in 0..2u8 {
            prop_assert!((w.group_mean(a) - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn second_moment_between_one_and_b_squared((groups, pi) in groups_and_pi(300)) {
        let w = WeightVector::from_propensities(&groups, &pi).unwrap();
        let b = w.max();
        for dm in w.second_moment() {
            prop_assert!(dm >= 1.0 - 1e-12);
            prop_assert!(dm <= b * b * (1.0 + 1e-12));
        }
    }

    #[test]
    fn weights_ignore_a_common_factor_within_a_group(
        (groups, pi) in groups_and_pi(100),
        factor in 0.05f64..=1.0,
        which in 0u8..2,
    ) {
        let scaled: Vec<f64> = groups.iter().zip(&pi).map(|(&g, &p)| if g == which { p * factor } else { p }).collect();
        let a = WeightVector::from_propensities(&groups, &pi).unwrap();
        let b = WeightVector::from_propensities(&groups, &scaled).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!(close(*x, *y, 1e-12), "{x} vs {y}");
        }
    }

    #[test]
    fn risks_match_brute_force_on_small_fixtures((groups, pi, loss) in with_losses(7)) {
        let w = WeightVector::from_propensities(&groups, &pi).unwrap();
        let r0 = weighted_risk(&loss, &w, 0).unwrap();
        let r1 = weighted_risk(&loss, &w, 1).unwrap();
        let b0 = brute_force_risk(&groups, &pi, &loss, 0);
        let b1 = brute_force_risk(&groups, &pi, &loss, 1);
        prop_assert!((r0.value - b0).abs() <= 1e-12);
        prop_assert!((r1.value - b1).abs() <= 1e-12);
        prop_assert!((apg_estimate(&r0, &r1) - (b0 - b1).abs()).abs() <= 1e-12);
    }

    #[test]
    fn risk_ignores_row_order((groups, pi, loss) in with_losses(200), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut order: Vec<usize> = (0..groups.len()).collect();
        order.shuffle(&mut RngStream::new(seed, 0).rng());
        let pick = |v: &[f64]| order.iter().map(|&i| v[i]).collect::<Vec<f64>>();
        let g2: Vec<u8> = order.iter().map(|&i| groups[i]).collect();
        let w1 = WeightVector::from_propensities(&groups, &pi).unwrap();
        let w2 = WeightVector::from_propensities(&g2, &pick(&pi)).unwrap();
        for a in 0..2u8 {
            let x = weighted_risk(&loss, &w1, a).unwrap().value;
            let y = weighted_risk(&pick(&loss), &w2, a).unwrap().value;
            prop_assert!(close(x, y, 1e-12), "{x} vs {y}");
        }
    }

    #[test]
    fn risk_variance_obeys_popoviciu((groups, pi, loss) in with_losses(200), width in 0.1f64..10.0) {
        let loss: Vec<f64> = loss.iter().map(|l| l * width).collect();
        let w = WeightVector::from_propensities(&groups, &pi).unwrap();
        let b = w.max();
        for a in 0..2u8 {
            let r = weighted_risk(&loss, &w, a).unwrap();
            prop_assert!(r.value >= 0.0);
            prop_assert!(r.sigma2 >= 0.0);
            prop_assert!(r.sigma2 <= b * b * width * width / 4.0 * (1.0 + 1e-12));
        }
    }

    #[test]
    fn c_d_matches_transliteration(
        task in task(),
        d in 1usize..40,
        n_extra in 0usize..1_000_000,
        b in 1.0f64..100.0,
        u in 0.0f64..=1.0,
        delta in 0.0001f64..0.9999,
    ) {
        let n = d + n_extra;
        let dm = 1.0 + u * (b * b - 1.0);
        let ours = c_d(task, n, dm, d, delta).unwrap();
        let theirs = c_d_reference(task, n as f64, dm, d as f64, delta);
        prop_assert!(close(ours, theirs, 1e-12), "{ours} vs {theirs}");
    }

    #[test]
    fn upper_bound_shrinks_with_n(inputs in bound_inputs(), group in 0usize..2, extra in 1usize..100_000) {
        let mut bigger = inputs.clone();
        bigger.n[group] += extra;
        let (a, b) = (upper_bound(&inputs).unwrap(), upper_bound(&bigger).unwrap());
        if let (Some(x), Some(y)) = (a.value, b.value) {
            prop_assert!(y <= x * (1.0 + 1e-12), "{y} > {x}");
        }
        if a.value.is_some() {
            prop_assert!(b.value.is_some());
        }
    }

    #[test]
    fn upper_bound_grows_with_tv(inputs in bound_inputs(), group in 0usize..2, extra in 0.0f64..0.5) {
        let mut worse = inputs.clone();
        worse.tv[group] = Some(inputs.tv[group].unwrap() + extra);
        let (a, b) = (upper_bound(&inputs).unwrap(), upper_bound(&worse).unwrap());
        if let (Some(x), Some(y)) = (a.value, b.value) {
            prop_assert!(y >= x);
        }
        prop_assert!(a.value.is_none_or(|v| v >= 0.0));
    }

    #[test]
    fn lower_stays_below_upper_when_hypotheses_hold(
        mut inputs in bound_inputs(),
        (v0, v1) in (0.0f64..=1.0, 0.0f64..=1.0),
        delta_hat in 0.0f64..1.0,
    ) {
        let b = inputs.max_weight;
        let n_min = inputs.n[0].min(inputs.n[1]) as f64;
        let lo = b * b / n_min;
        let hi = b * b / 4.0;
        prop_assume!(lo < hi);
        inputs.tv = [Some(0.0), Some(0.0)];
        inputs.sigma2 = [lo + v0 * (hi - lo), lo + v1 * (hi - lo)];
        let upper = upper_bound(&inputs).unwrap();
        let lower = lower_bound(&inputs, delta_hat).unwrap();
        prop_assert!(lower.variance_ok);
        if let (Some(u), Some(l)) = (upper.value, lower.value) {
            prop_assert!(l >= 0.0);
            prop_assert!(l <= u, "lower {l} above upper {u}");
        }
    }

    #[test]
    fn injection_only_touches_the_mask(
        logit in -3.0f64..3.0,
        targets in prop::collection::btree_set(0usize..4, 1..4),
        target_response in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let mut spec = SyntheticSpec::standard(Task::RegressionQuadratic, [40, 40]);
        spec.p = 4;
        spec.beta.truncate(4);
        let data = generate_synthetic(&spec, RngStream::new(seed, 1)).unwrap();
        let miss = MissingnessSpec::mcar(logit, targets.iter().copied(), target_response);
        let (out, oracle) = inject(&data, &miss, RngStream::new(seed, 2)).unwrap();
        for i in 0..data.n() {
            prop_assert_eq!(data.row(i), out.row(i));
            prop_assert_eq!(data.response(i).to_bits(), out.response(i).to_bits());
            prop_assert_eq!(data.sensitive(i), out.sensitive(i));
            let hidden: Vec<usize> = (0..4).filter(|&j| !out.is_observed(i, j)).collect();
            if out.is_complete(i) {
                prop_assert!(hidden.is_empty());
            } else {
                prop_assert_eq!(hidden, targets.iter().copied().collect::<Vec<_>>());
                prop_assert_eq!(out.is_response_observed(i), !target_response);
            }
        }
        if let Ok(cc) = complete_cases(&out) {
            for (k, &i) in cc.index.iter().enumerate() {
                prop_assert_eq!(oracle.evaluate(&cc.data, k).to_bits(), oracle.evaluate(&data, i).to_bits());
            }
        }
    }

    #[test]
    fn complete_case_indicator_matches_mask(
        (n, p) in (1usize..30, 1usize..6),
        seed in any::<u64>(),
    ) {
        use rand::Rng;
        let mut rng = RngStream::new(seed, 3).rng();
        let mask: Vec<bool> = (0..n * p).map(|_| rng.random_bool(0.8)).collect();
        let resp: Vec<bool> = (0..n).map(|_| rng.random_bool(0.8)).collect();
        let data = Dataset::from_parts(
            p,
            (0..n * p).map(|v| v as f64).collect(),
            vec![0.0; n],
            (0..n).map(|i| (i % 2) as u8).collect(),
            mask.clone(),
            resp.clone(),
        )
        .unwrap();
        let r = data.complete_case_indicator();
        for i in 0..n {
            let full = (0..p).all(|j| mask[i * p + j]) && resp[i];
            prop_assert_eq!(r[i], full);
        }
    }

    #[test]
    fn split_is_a_partition(n in 2usize..200, fraction in 0.01f64..0.99, seed in any::<u64>()) {
        let k = (fraction * n as f64).round() as usize;
        prop_assume!(k > 0 && k < n);
        let data = Dataset::new(
            (0..n).map(|i| vec![i as f64]).collect(),
            vec![0.0; n],
            (0..n).map(|i| (i % 2) as u8).collect(),
        )
        .unwrap();
        let (a, b) = split(&data, fraction, RngStream::new(seed, 4)).unwrap();
        prop_assert_eq!(a.n(), k);
        let mut ids: Vec<usize> = a.column(0).into_iter().chain(b.column(0)).map(|v| v as usize).collect();
        ids.sort_unstable();
        prop_assert_eq!(ids, (0..n).collect::<Vec<_>>());
    }
}
