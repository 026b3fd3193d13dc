// SPDX-License-Identifier: Apache-2.0

use super::vector::{encode_query, encrypt_query, EncryptedQuery, Origin, QueryVector};
use crate::data::BackgroundKnowledge;
use crate::error::{Error, Result};
use crate::group::AdditiveScheme;
use crate::pv::VerifiedPartialView;
use crate::seed::Seed;
use rand::seq::SliceRandom;
use rand::RngCore;

/// Hidden test queries with answers known to the servers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestKind {
    /// Counts background records; expected `L`.
    L,
    /// Re-randomized partial view; expected `V`.
    V,
    /// All-ones; expected `N`.
    N,
}

impl TestKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TestKind::L => "L",
            TestKind::V => "V",
            TestKind::N => "N",
        }
    }
}

/// Expected answer and acceptance half-width of one test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestSpec {
    pub kind: TestKind,
    pub center: i64,
    pub noise_max: f64,
}

impl TestSpec {
    pub fn passes(&self, answer: i64) -> bool {
        ((answer - self.center) as f64).abs() <= self.noise_max
    }
}

/// What the servers know when they build tests.
pub struct TestContext<'a, C> {
    pub domain_size: usize,
    /// Dataset size the participant committed to.
    pub n_claimed: u64,
    pub background: Option<&'a BackgroundKnowledge>,
    pub pv: Option<&'a VerifiedPartialView<C>>,
}

pub fn make_test<S: AdditiveScheme, R: RngCore>(
    scheme: &S,
    kind: TestKind,
    ctx: &TestContext<'_, S::Ct>,
    noise_max: f64,
    rng: &mut R,
) -> Result<(EncryptedQuery<S::Ct>, TestSpec)> {
    let (eq, center) = match kind {
        TestKind::L => {
            let bk = ctx
                .background
                .ok_or_else(|| Error::Protocol("Test L needs background knowledge".into()))?;
            let q = encode_query(&bk.labels, ctx.domain_size)?;
            (encrypt_query(scheme, &q, rng), bk.len() as i64)
        }
        TestKind::N => (
            encrypt_query(scheme, &QueryVector::all(ctx.domain_size), rng),
            ctx.n_claimed as i64,
        ),
        TestKind::V => {
            let pv = ctx
                .pv
                .ok_or_else(|| Error::Protocol("Test V needs a verified partial view".into()))?;
            if pv.pv().len() != ctx.domain_size {
                return Err(Error::Protocol(
                    "partial view does not match the domain".into(),
                ));
            }
            let cts = pv
                .pv()
                .cts()
                .iter()
                .map(|c| scheme.rerandomize(c, rng))
                .collect();
            (EncryptedQuery::new(cts, None), pv.v() as i64)
        }
    };
    Ok((
        eq.with_origin(Origin::Test(kind)),
        TestSpec {
            kind,
            center,
            noise_max,
        },
    ))
}

/// Re-randomizes every entry, for reusing a test.
pub fn rerandomize_query<S: AdditiveScheme, R: RngCore>(
    scheme: &S,
    eq: &EncryptedQuery<S::Ct>,
    rng: &mut R,
) -> EncryptedQuery<S::Ct> {
    EncryptedQuery::new(
        eq.cts()
            .iter()
            .map(|c| scheme.rerandomize(c, rng))
            .collect(),
        eq.origin(),
    )
}

/// Test kinds for `m_t` tests, cycling L, V, N.
pub fn test_mix(m_t: usize) -> Vec<TestKind> {
    [TestKind::L, TestKind::V, TestKind::N]
        .into_iter()
        .cycle()
        .take(m_t)
        .collect()
}

/// A position in the query stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    Real(usize),
    Test(usize),
}

/// Uniform interleaving of `m_q` real and `m_t` test queries.
pub fn schedule(m_q: usize, m_t: usize, seed: Seed) -> Result<Vec<Slot>> {
    if m_t > m_q {
        return Err(Error::Config(format!("m_t={m_t} exceeds m_q={m_q}")));
    }
    let mut slots: Vec<Slot> = (0..m_q)
        .map(Slot::Real)
        .chain((0..m_t).map(Slot::Test))
        .collect();
    slots.shuffle(&mut seed.stream("schedule", 0));
    Ok(slots)
}
