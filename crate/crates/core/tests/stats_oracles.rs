// SPDX-License-Identifier: Apache-2.0

use dataring::stats::{
    binomial, choose_r0, detection_prob, hyper_pmf, hyper_tail, rational_to_f64, v_min, v_opt,
    TailModel, Threshold,
};
use dataring::{ExactProb, Seed};
use num_bigint::BigInt;
use proptest::prelude::*;
use rand::distributions::Distribution;
use rand::Rng;
use statrs::distribution::Hypergeometric;

/// Pr(R ≥ r0) by enumerating every L-subset of N records, V of them marked.
fn enumerate_tail(n: u32, v: u32, l: u32, r0: u32) -> ExactProb {
    let (mut hit, mut all) = (0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() != l {
            continue;
        }
        all += 1;
        if (mask & ((1 << v) - 1)).count_ones() >= r0 {
            hit += 1;
        }
    }
    ExactProb::new(BigInt::from(hit), BigInt::from(all))
}

fn th(s: &str) -> Threshold {
    Threshold::parse(s).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn tail_matches_enumeration(n in 1u32..13, v in 0u32..13, l in 0u32..13, r0 in 0u32..13) {
        prop_assume!(v <= n && l <= n && r0 <= l);
        prop_assert_eq!(hyper_tail(n as u64, v as u64, l as u64, r0 as u64).unwrap(), enumerate_tail(n, v, l, r0));
    }

    #[test]
    fn tail_monotone((n, v, l, r0) in (3u64..80).prop_flat_map(|n| (Just(n), 0..n, 2..=n)).prop_flat_map(|(n, v, l)| (Just(n), Just(v), Just(l), 1..l))) {
        let t = hyper_tail(n, v, l, r0).unwrap();
        prop_assert!(hyper_tail(n, v, l, r0 + 1).unwrap() <= t);
        prop_assert!(hyper_tail(n, v + 1, l, r0).unwrap() >= t);
    }

    #[test]
    fn zero_hit_forms_agree(n in 1u64..300, v in 0u64..300, l in 0u64..300) {
        prop_assume!(v <= n && l <= n);
        let a = ExactProb::new(binomial(n - v, l).into(), binomial(n, l).into());
        let b = ExactProb::new(binomial(n - l, v).into(), binomial(n, v).into());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn pmf_normalized(n in 1u64..120, v in 0u64..120, l in 0u64..120) {
        prop_assume!(v <= n && l <= n);
        let total = (0..=l).map(|r| hyper_pmf(n, v, l, r).unwrap()).fold(ExactProb::from_integer(0.into()), |a, b| a + b);
        prop_assert_eq!(total, ExactProb::from_integer(1.into()));
    }

    #[test]
    fn r0_bound_and_maximality(n in 20u64..400, frac in 0.05f64..0.9, l in 1u64..60) {
        let v = ((n as f64 * frac) as u64).max(1);
        prop_assume!(l <= n);
        let eta = th("0.05");
        match choose_r0(TailModel::Exact, n, v, l, &eta) {
            Ok(r0) => {
                let keep = ExactProb::new(95.into(), 100.into());
                prop_assert!(hyper_tail(n, v, l, r0).unwrap() >= keep);
                if r0 < l {
                    prop_assert!(hyper_tail(n, v, l, r0 + 1).unwrap() < keep);
                }
            }
            Err(_) => prop_assert!(hyper_tail(n, v, l, 1).unwrap() < ExactProb::new(95.into(), 100.into())),
        }
    }
}

/// Twelve fixed random parameter draws, each against 10⁵ simulated
/// sessions of independent Bernoulli trials.
#[test]
fn eq6_agrees_with_bernoulli() {
    let mut pick = Seed(2024).rng();
    for case in 0..12 {
        let m = pick.gen_range(1u32..30);
        let (pt, pc, pd) = (pick.gen::<f64>(), pick.gen::<f64>(), pick.gen::<f64>());
        let want = detection_prob(m, pt, pc, pd);
        let mut rng = Seed(case).rng();
        let trials = 100_000;
        let hits = (0..trials)
            .filter(|_| (0..m).any(|_| rng.gen_bool(pt) && rng.gen_bool(pc) && rng.gen_bool(pd)))
            .count();
        let freq = hits as f64 / trials as f64;
        let sigma = (want * (1.0 - want) / trials as f64).sqrt();
        assert!(
            (freq - want).abs() <= 3.0 * sigma,
            "m={m} pt={pt} pc={pc} pd={pd}: {freq} vs {want}"
        );
    }
}

#[test]
fn v_min_by_scan_and_monte_carlo() {
    let (n, v, l, r0) = (100u64, 50u64, 8u64, 2u64);
    let theta = th("0.9");
    let got = v_min(TailModel::Exact, n, v, l, &theta, r0).unwrap();
    let scan = (0..=v)
        .find(|x| rational_to_f64(&hyper_tail(n, *x, l, r0).unwrap()) >= 0.9)
        .unwrap();
    assert_eq!(got, scan);

    let mut rng = Seed(77).rng();
    let draws = 1_000_000;
    for (vv, above) in [(got, true), (got - 1, false)] {
        let h = Hypergeometric::new(n, vv, l).unwrap();
        let hits = (0..draws)
            .filter(|_| h.sample(&mut rng) >= r0 as f64)
            .count();
        let mc = hits as f64 / draws as f64;
        let exact = rational_to_f64(&hyper_tail(n, vv, l, r0).unwrap());
        assert!((mc - exact).abs() < 0.005, "v={vv}: {mc} vs {exact}");
        assert_eq!(exact >= 0.9, above);
    }
}

#[test]
fn v_opt_and_small_theta() {
    let (best, table) = v_opt(TailModel::Exact, 200, 40, 1, &th("0.1")).unwrap();
    assert_eq!(table.len(), 1);
    assert_eq!(
        best,
        v_min(TailModel::Exact, 200, 40, 1, &th("0.1"), 1).unwrap()
    );
    let tiny = v_min(TailModel::Exact, 500, 100, 20, &th("0.01"), 1).unwrap();
    let scan = (0..=100u64)
        .find(|x| hyper_tail(500, *x, 20, 1).unwrap() >= ExactProb::new(1.into(), 100.into()))
        .unwrap();
    assert_eq!(tiny, scan);
}
