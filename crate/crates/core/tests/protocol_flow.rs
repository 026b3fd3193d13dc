// SPDX-License-Identifier: Apache-2.0

use dataring::group::{AdditiveScheme, ElGamalScheme, Transparent};
use dataring::query::{
    answer_query, answer_query_with_noise, encrypt_query, make_test, schedule, NoiseRule,
    PrivacyBudget, QueryVector, Slot, TestContext, TestKind,
};
use dataring::sim::{
    prepare_target, pv_trials, random_queries, run_query_session, Backend, CheatKind,
    CheatStrategy, PvThresholdConfig, QueryParams, WorldParams,
};
use dataring::stats::Threshold;
use dataring::{Point, Seed};
use std::collections::HashMap;

fn eta() -> Threshold {
    Threshold::parse("0.05").unwrap()
}

#[test]
fn noiseless_tests_hit_their_centers() {
    let (s, keys) = ElGamalScheme::<Point>::setup(1000, &mut Seed(1).rng()).unwrap();
    let world = WorldParams {
        n: 200,
        domain_size: 800,
        v: 40,
        l: 20,
        eta: eta(),
    };
    let t = prepare_target(&s, &keys, &world, CheatKind::Honest, Seed(2)).unwrap();
    let ctx = TestContext {
        domain_size: 800,
        n_claimed: 200,
        background: Some(&t.background),
        pv: Some(&t.pv),
    };
    let mut rng = Seed(3).rng();
    let mut budget = PrivacyBudget::new(0.5, 0.5, 10, 10, NoiseRule::PerBudget).unwrap();
    for (kind, want) in [(TestKind::L, 20), (TestKind::V, 40), (TestKind::N, 200)] {
        let (eq, spec) = make_test(&s, kind, &ctx, 59.9, &mut rng).unwrap();
        assert_eq!(spec.center, want);
        let a = answer_query_with_noise(&s, &t.ds, &eq, &mut budget, 0, &mut rng).unwrap();
        assert_eq!(keys.joint_decrypt(&s, &a).unwrap(), want);
    }
    assert_eq!(budget.answered(), 3);
}

#[test]
fn full_session_accounting() {
    let s = Transparent::new(1 << 16);
    let keys = dataring::group::ServerKeys { s1: (), s2: () };
    let world = WorldParams {
        n: 200,
        domain_size: 800,
        v: 40,
        l: 20,
        eta: eta(),
    };
    let t = prepare_target(&s, &keys, &world, CheatKind::Honest, Seed(4)).unwrap();
    let qs = random_queries(800, 10, Seed(5)).unwrap();
    let params = QueryParams::default();
    let rep = run_query_session(
        &s,
        &keys,
        &t,
        &qs,
        &CheatStrategy::honest(),
        &params,
        Seed(6),
    )
    .unwrap();
    assert_eq!(rep.answered, 20);
    assert_eq!(rep.steps.len(), 20);
    assert_eq!(rep.test_answers.len(), 10);
    assert!(!rep.record.flagged());
    assert_eq!(rep.released.as_ref().map(Vec::len), Some(10));
}

/// Positions of 3 tests among 6 queries are uniform over the 20 placements.
#[test]
fn schedule_placements_uniform() {
    let mut counts: HashMap<Vec<usize>, u32> = HashMap::new();
    let trials = 10_000;
    for i in 0..trials {
        let pos: Vec<usize> = schedule(3, 3, Seed(i))
            .unwrap()
            .iter()
            .enumerate()
            .filter(|(_, s)| matches!(s, Slot::Test(_)))
            .map(|(p, _)| p)
            .collect();
        *counts.entry(pos).or_default() += 1;
    }
    assert_eq!(counts.len(), 20);
    let e = trials as f64 / 20.0;
    let chi2: f64 = counts.values().map(|c| (*c as f64 - e).powi(2) / e).sum();
    // χ²(19) critical value at 0.01.
    assert!(chi2 < 36.191, "{chi2}");
}

#[test]
fn honest_answers_pass_at_the_tail_rate() {
    let s = Transparent::new(1 << 20);
    let ds = dataring::data::synth_dataset(100, 400, Seed(1)).unwrap();
    let eq = encrypt_query(&s, &QueryVector::all(400), &mut Seed(0).rng());
    let mut rng = Seed(9).rng();
    let trials = 10_000;
    let mut pass = 0;
    let nm = dataring::query::noise_max(10.0, 1.0, 0.5, 0.05);
    for _ in 0..trials {
        let mut b = PrivacyBudget::new(0.5, 0.5, 10, 10, NoiseRule::PerBudget).unwrap();
        let a = answer_query(&s, &ds, &eq, &mut b, &mut rng).unwrap();
        if ((a.0 - 100) as f64).abs() <= nm {
            pass += 1;
        }
    }
    let rate = pass as f64 / trials as f64;
    let sigma = (0.05f64 * 0.95 / trials as f64).sqrt();
    assert!(rate >= 0.95 - 3.0 * sigma, "{rate}");
}

/// A classifier that sees one query message at a time and learns the mean
/// fraction of `0x02`-prefixed points per class cannot beat a coin.
#[test]
fn real_and_test_queries_look_alike() {
    let (s, keys) = ElGamalScheme::<Point>::setup(64, &mut Seed(11).rng()).unwrap();
    let world = WorldParams {
        n: 8,
        domain_size: 32,
        v: 4,
        l: 4,
        eta: Threshold::parse("0.5").unwrap(),
    };
    let t = prepare_target(&s, &keys, &world, CheatKind::Honest, Seed(12)).unwrap();
    let ctx = TestContext {
        domain_size: 32,
        n_claimed: 8,
        background: Some(&t.background),
        pv: Some(&t.pv),
    };
    let qs = random_queries(32, 64, Seed(13)).unwrap();
    let mut rng = Seed(14).rng();
    let feature = |bytes: &[u8]| -> f64 {
        let body = &bytes[4..];
        let even = body.chunks(33).filter(|p| p[0] == 0x02).count();
        even as f64 / (body.len() / 33) as f64
    };
    let per_class = 600;
    let mut real = Vec::new();
    let mut test = Vec::new();
    for i in 0..per_class {
        real.push(feature(
            &encrypt_query(&s, &qs[i % qs.len()], &mut rng).to_bytes(&s),
        ));
        let kind = [TestKind::L, TestKind::V, TestKind::N][i % 3];
        test.push(feature(
            &make_test(&s, kind, &ctx, 1.0, &mut rng)
                .unwrap()
                .0
                .to_bytes(&s),
        ));
    }
    let half = per_class / 2;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (mr, mt) = (mean(&real[..half]), mean(&test[..half]));
    let guess_test = |x: f64| (x - mt).abs() < (x - mr).abs();
    let correct = real[half..].iter().filter(|x| !guess_test(**x)).count()
        + test[half..].iter().filter(|x| guess_test(**x)).count();
    let n = (2 * (per_class - half)) as f64;
    let acc = correct as f64 / n;
    assert!(
        (acc - 0.5).abs() <= 3.0 * (0.25 / n).sqrt(),
        "accuracy {acc}"
    );
}

#[test]
fn pv_accept_rates_at_desk_scale() {
    let cfg = PvThresholdConfig {
        world: WorldParams {
            n: 1000,
            domain_size: 4000,
            v: 100,
            l: 60,
            eta: eta(),
        },
        r0: None,
        keeps: vec![],
        trials: 2000,
        backend: Backend::Transparent,
        seed: Seed(21),
        workers: 8,
    };
    let honest = pv_trials(&cfg, 1000).unwrap();
    let rate = honest.iter().filter(|t| t.accept).count() as f64 / 2000.0;
    assert!(rate >= 0.95 - 0.02, "{rate}");
    let fake = pv_trials(&cfg, 0).unwrap();
    assert!(fake.iter().filter(|t| t.accept).count() as f64 / 2000.0 <= 0.05);
}
