// SPDX-License-Identifier: Apache-2.0

//! Count-level session model.
//!
//! A test answer depends on the dataset only through one count: `|ℒ ∩ D|`,
//! `|PV ∩ D|` or `|D|`. For `D*` these counts are drawn directly (the
//! removed records hit `ℒ` and the view hypergeometrically, independently
//! of each other), so a session costs a few dozen random draws instead of
//! `m·|𝒟|` homomorphic operations. Real answers are never inspected by the
//! servers and are skipped.

use super::session::{QueryParams, Step};
use super::strategy::{CheatKind, CheatStrategy, TrialRecord};
use crate::error::{Error, Result};
use crate::query::{laplace_noise, TestKind};
use crate::seed::Seed;
use rand::distributions::Distribution;
use statrs::distribution::Hypergeometric;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountWorld {
    pub n: u64,
    pub domain_size: u64,
    pub v: u64,
    pub l: u64,
}

/// Noiseless answers to tests L, V and N.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TestCounts {
    pub l: i64,
    pub v: i64,
    pub n: i64,
}

impl TestCounts {
    pub fn get(&self, kind: TestKind) -> i64 {
        match kind {
            TestKind::L => self.l,
            TestKind::V => self.v,
            TestKind::N => self.n,
        }
    }
}

impl CountWorld {
    pub fn honest(&self) -> TestCounts {
        TestCounts {
            l: self.l as i64,
            v: self.v as i64,
            n: self.n as i64,
        }
    }

    pub fn check(&self, kind: CheatKind) -> Result<()> {
        if self.v > self.n || self.l > self.n || self.n > self.domain_size {
            return Err(Error::InvalidParameter(format!(
                "inconsistent sizes {self:?}"
            )));
        }
        if kind.domain_needed(self.n as usize) as u64 > self.domain_size {
            return Err(Error::InvalidParameter(format!(
                "{kind} does not fit a domain of {}",
                self.domain_size
            )));
        }
        Ok(())
    }

    /// Test counts on a freshly drawn `D*`.
    pub fn fake<R: rand::Rng>(&self, kind: CheatKind, rng: &mut R) -> Result<TestCounts> {
        let x = kind.fake_labels(self.n as usize) as u64;
        let hits = |k: u64, rng: &mut R| -> Result<i64> {
            if x == 0 || k == 0 {
                return Ok(0);
            }
            let h = Hypergeometric::new(self.n, x, k)
                .map_err(|e| Error::InvalidParameter(e.to_string()))?;
            Ok(h.sample(rng) as i64)
        };
        Ok(match kind {
            CheatKind::Honest => self.honest(),
            CheatKind::Modify(_) => {
                let l = self.l as i64 - hits(self.l, rng)?;
                let v = self.v as i64 - hits(self.v, rng)?;
                TestCounts {
                    l,
                    v,
                    n: self.n as i64,
                }
            }
            CheatKind::Add(_) => TestCounts {
                n: (self.n + x) as i64,
                ..self.honest()
            },
        })
    }
}

/// One session at count level. Uses the same schedule and cheat-position
/// streams as the full protocol run for the same seed.
pub fn fast_trial(
    world: &CountWorld,
    strategy: &CheatStrategy,
    params: &QueryParams,
    seed: Seed,
) -> Result<TrialRecord> {
    world.check(strategy.kind)?;
    let steps = params.steps(seed.derive("session/schedule", 0))?;
    let cheat = if strategy.is_honest() {
        vec![false; steps.len()]
    } else {
        strategy
            .plan
            .positions(steps.len(), &mut seed.stream("session/cheat", 0))?
    };
    let honest = world.honest();
    let fake = world.fake(strategy.kind, &mut seed.stream("session/fake", 0))?;
    let scale = params.budget()?.scale();
    let noise_max = params.noise_max()?;
    let mut noise = seed.stream("session/noise", 0);
    let mut rec = TrialRecord {
        cheated_answers: cheat.iter().filter(|c| **c).count() as u32,
        ..Default::default()
    };
    for (step, cheated) in steps.iter().zip(&cheat) {
        if let Step::Test(kind) = step {
            let truth = if *cheated {
                fake.get(*kind)
            } else {
                honest.get(*kind)
            };
            let ans = truth + laplace_noise(scale, &mut noise);
            let pass = ((ans - honest.get(*kind)) as f64).abs() <= noise_max;
            rec.record_test(*kind, *cheated, pass);
        }
    }
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::Tolerance;
    use crate::sim::strategy::{CheatPlan, DetectionOutcome};

    const W: CountWorld = CountWorld {
        n: 10_000,
        domain_size: 40_000,
        v: 100,
        l: 299,
    };

    #[test]
    fn modify_counts_have_hypergeometric_means() {
        let mut rng = Seed(1).rng();
        let k = 4000;
        let (mut sl, mut sv) = (0i64, 0i64);
        for _ in 0..k {
            let c = W.fake(CheatKind::Modify(0.2), &mut rng).unwrap();
            assert_eq!(c.n, 10_000);
            sl += W.l as i64 - c.l;
            sv += W.v as i64 - c.v;
        }
        let (ml, mv) = (sl as f64 / k as f64, sv as f64 / k as f64);
        assert!((ml - 0.2 * 299.0).abs() < 0.5, "{ml}");
        assert!((mv - 20.0).abs() < 0.3, "{mv}");
        assert_eq!(
            W.fake(CheatKind::Add(0.5), &mut rng).unwrap(),
            TestCounts {
                n: 15_000,
                ..W.honest()
            }
        );
        assert!(W.check(CheatKind::Add(3.5)).is_err());
    }

    #[test]
    fn add_is_always_caught_by_test_n() {
        let p = QueryParams::default();
        let s = CheatStrategy {
            kind: CheatKind::Add(1.0),
            plan: CheatPlan::Forced { x: 20 },
        };
        let out = DetectionOutcome::from_records(
            &(0..200)
                .map(|i| fast_trial(&W, &s, &p, Seed(i)).unwrap())
                .collect::<Vec<_>>(),
        );
        assert_eq!(out.failed_by_kind[2], out.cheated_by_kind[2]);
        assert_eq!(out.accuracy(), Some(1.0));
    }

    #[test]
    fn honest_false_positives_follow_the_tail() {
        let strict = QueryParams {
            tolerance: Tolerance::Strict { tail: 0.05 },
            ..Default::default()
        };
        let recs: Vec<_> = (0..4000)
            .map(|i| fast_trial(&W, &CheatStrategy::honest(), &strict, Seed(i)).unwrap())
            .collect();
        let fails: u32 = recs.iter().map(|r| r.honest_tests_failed).sum();
        let rate = fails as f64 / 40_000.0;
        // Rounded noise against a fractional bound fails slightly more often
        // than the continuous tail.
        assert!((rate - 0.05).abs() < 0.005, "{rate}");
        let wide = QueryParams {
            tolerance: Tolerance::Wide { session_fp: 0.001 },
            ..strict
        };
        let fp = (0..4000)
            .filter(|i| {
                fast_trial(&W, &CheatStrategy::honest(), &wide, Seed(*i))
                    .unwrap()
                    .flagged()
            })
            .count();
        assert!(fp <= 12, "{fp}");
    }
}
