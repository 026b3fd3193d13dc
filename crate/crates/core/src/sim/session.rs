// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use crate::query::{schedule, test_mix, NoiseRule, PrivacyBudget, Slot, TestKind, Tolerance};
use crate::seed::Seed;
use rand::Rng;

/// How tests are placed among the `m = m_q + m_t` queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleMode {
    /// Exactly `m_t` tests (kinds cycling L, V, N), uniformly interleaved.
    Shuffle,
    /// Each of the `m` positions is a test with probability `m_t/m`, of a
    /// uniformly random kind.
    Independent,
}

impl ScheduleMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "shuffle" => Ok(ScheduleMode::Shuffle),
            "independent" => Ok(ScheduleMode::Independent),
            _ => Err(Error::Config(format!(
                "unknown schedule mode {s:?} (shuffle|independent)"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ScheduleMode::Shuffle => "shuffle",
            ScheduleMode::Independent => "independent",
        }
    }
}

/// One position of a participant's query stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    /// Index into the querier's real queries (cycled if the stream holds
    /// more real positions than queries).
    Real(usize),
    Test(TestKind),
}

/// Default flag probability of an honest session in the wide regime.
pub const DEFAULT_SESSION_FP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryParams {
    pub m_q: u32,
    pub m_t: u32,
    pub eps_peer: f64,
    pub eps_server: f64,
    pub rule: NoiseRule,
    pub tolerance: Tolerance,
    pub schedule: ScheduleMode,
}

impl Default for QueryParams {
    fn default() -> Self {
        QueryParams {
            m_q: 10,
            m_t: 10,
            eps_peer: 0.5,
            eps_server: 0.5,
            rule: NoiseRule::PerBudget,
            tolerance: Tolerance::Wide {
                session_fp: DEFAULT_SESSION_FP,
            },
            schedule: ScheduleMode::Shuffle,
        }
    }
}

impl QueryParams {
    pub fn m(&self) -> usize {
        (self.m_q + self.m_t) as usize
    }

    pub fn budget(&self) -> Result<PrivacyBudget> {
        PrivacyBudget::new(
            self.eps_peer,
            self.eps_server,
            self.m_q,
            self.m_t,
            self.rule,
        )
    }

    /// Probability that a given position holds a test.
    pub fn p_t(&self) -> f64 {
        self.m_t as f64 / self.m() as f64
    }

    pub fn noise_max(&self) -> Result<f64> {
        Ok(self
            .tolerance
            .noise_max(self.budget()?.scale(), self.m_t as usize))
    }

    pub fn steps(&self, seed: Seed) -> Result<Vec<Step>> {
        match self.schedule {
            ScheduleMode::Shuffle => {
                let kinds = test_mix(self.m_t as usize);
                Ok(schedule(self.m_q as usize, self.m_t as usize, seed)?
                    .into_iter()
                    .map(|s| match s {
                        Slot::Real(i) => Step::Real(i),
                        Slot::Test(j) => Step::Test(kinds[j]),
                    })
                    .collect())
            }
            ScheduleMode::Independent => {
                self.budget()?;
                let p_t = self.p_t();
                let mut rng = seed.stream("schedule", 0);
                let mut real = 0;
                Ok((0..self.m())
                    .map(|_| {
                        if rng.gen_bool(p_t) {
                            Step::Test([TestKind::L, TestKind::V, TestKind::N][rng.gen_range(0..3)])
                        } else {
                            real += 1;
                            Step::Real(real - 1)
                        }
                    })
                    .collect())
            }
        }
    }
}
