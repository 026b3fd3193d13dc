// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use num_traits::Float;
use rand::Rng;

/// How one answer's Laplace scale is derived from the budgets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseRule {
    /// `m_q · ΔT / ε` per budget. With unequal budgets the smaller ε is used,
    /// which satisfies both.
    #[default]
    PerBudget,
    /// `m · ΔT / (ε + ε_S)` with `m = m_q + m_t`.
    Pooled,
}

impl NoiseRule {
    pub fn as_str(&self) -> &'static str {
        match self {
            NoiseRule::PerBudget => "per-budget",
            NoiseRule::Pooled => "pooled",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "per-budget" => Ok(NoiseRule::PerBudget),
            "pooled" => Ok(NoiseRule::Pooled),
            _ => Err(Error::Config(format!(
                "unknown noise rule `{s}` (per-budget|pooled)"
            ))),
        }
    }
}

/// A participant's budget toward one querier and the server.
#[derive(Debug, Clone, PartialEq)]
pub struct PrivacyBudget {
    eps_peer: f64,
    eps_server: f64,
    m_q: u32,
    m_t: u32,
    sensitivity: f64,
    rule: NoiseRule,
    answered: u32,
}

impl PrivacyBudget {
    pub fn new(
        eps_peer: f64,
        eps_server: f64,
        m_q: u32,
        m_t: u32,
        rule: NoiseRule,
    ) -> Result<Self> {
        if !(eps_peer > 0.0 && eps_server > 0.0 && eps_peer.is_finite() && eps_server.is_finite()) {
            return Err(Error::Config("privacy budgets must be positive".into()));
        }
        if m_q == 0 {
            return Err(Error::Config("m_q must be at least 1".into()));
        }
        if m_t > m_q {
            return Err(Error::Config(format!("m_t={m_t} exceeds m_q={m_q}")));
        }
        Ok(PrivacyBudget {
            eps_peer,
            eps_server,
            m_q,
            m_t,
            sensitivity: 1.0,
            rule,
            answered: 0,
        })
    }

    pub fn m_q(&self) -> u32 {
        self.m_q
    }

    pub fn m_t(&self) -> u32 {
        self.m_t
    }

    pub fn m(&self) -> u32 {
        self.m_q + self.m_t
    }

    pub fn rule(&self) -> NoiseRule {
        self.rule
    }

    pub fn eps_peer(&self) -> f64 {
        self.eps_peer
    }

    pub fn eps_server(&self) -> f64 {
        self.eps_server
    }

    /// Laplace scale applied to every answer.
    pub fn scale(&self) -> f64 {
        match self.rule {
            NoiseRule::PerBudget => {
                f64::from(self.m_q) * self.sensitivity / self.eps_peer.min(self.eps_server)
            }
            NoiseRule::Pooled => {
                f64::from(self.m()) * self.sensitivity / (self.eps_peer + self.eps_server)
            }
        }
    }

    pub fn answered(&self) -> u32 {
        self.answered
    }

    pub fn remaining(&self) -> u32 {
        self.m() - self.answered
    }

    /// Takes one unit, or refuses once all `m` answers have been given.
    pub fn consume(&mut self) -> Result<()> {
        if self.answered >= self.m() {
            return Err(Error::BudgetExhausted {
                answered: self.answered as usize,
            });
        }
        self.answered += 1;
        Ok(())
    }
}

/// Laplace(0, scale) by inverse CDF.
pub fn laplace<T: Float, R: Rng + ?Sized>(scale: T, rng: &mut R) -> T {
    loop {
        let u: f64 = rng.gen();
        if u == 0.0 {
            continue;
        }
        let c = u - 0.5;
        let mag = -(1.0 - 2.0 * c.abs()).ln();
        let x = T::from(mag.copysign(c)).unwrap();
        return x * scale;
    }
}

/// Laplace draw rounded to the nearest integer.
pub fn laplace_noise<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> i64 {
    laplace::<f64, _>(scale, rng).round() as i64
}

/// `ln(1/tail) · m_q · ΔT / ε`.
pub fn noise_max<T: Float>(m_q: T, delta_t: T, eps: T, tail: T) -> T {
    noise_max_for_scale(m_q * delta_t / eps, tail)
}

/// `ln(1/tail) · scale`.
pub fn noise_max_for_scale<T: Float>(scale: T, tail: T) -> T {
    -tail.ln() * scale
}

/// How wide the acceptance interval of a test is.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    /// Each test fails an honest answer with probability `tail`.
    Strict { tail: f64 },
    /// An honest session with `m_t` tests is flagged with probability at
    /// most `session_fp`.
    Wide { session_fp: f64 },
}

impl Tolerance {
    pub fn per_test_tail(&self, m_t: usize) -> f64 {
        match *self {
            Tolerance::Strict { tail } => tail,
            Tolerance::Wide { session_fp } => {
                if m_t == 0 {
                    return session_fp;
                }
                -((-session_fp).ln_1p() / m_t as f64).exp_m1()
            }
        }
    }

    pub fn noise_max(&self, scale: f64, m_t: usize) -> f64 {
        noise_max_for_scale(scale, self.per_test_tail(m_t))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Tolerance::Strict { .. } => "strict",
            Tolerance::Wide { .. } => "wide",
        }
    }
}
