// SPDX-License-Identifier: Apache-2.0

use super::pv_session::run_pv_session;
use super::session::{QueryParams, Step};
use super::strategy::{fake_dataset, CheatKind, CheatStrategy, TrialRecord};
use super::transport::{ByteCounts, MsgKind, Party, Transport};
use crate::data::{sample_background, synth_dataset, BackgroundKnowledge, HistogramDataset};
use crate::error::{Error, Result};
use crate::group::{AdditiveScheme, ServerKeys};
use crate::pv::VerifiedPartialView;
use crate::query::{
    answer_query, encode_query, encrypt_query, make_test, EncryptedQuery, QueryVector, Release,
    ReleaseMessage, TestContext, TestSpec,
};
use crate::seed::Seed;
use crate::stats::{choose_r0, TailModel, Threshold};
use crate::Label;
use rand::seq::index;

/// Sizes of a simulated deployment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorldParams {
    pub n: usize,
    pub domain_size: usize,
    pub v: usize,
    pub l: usize,
    pub eta: Threshold,
}

impl WorldParams {
    pub fn r0(&self) -> Result<u64> {
        choose_r0(
            TailModel::Exact,
            self.n as u64,
            self.v as u64,
            self.l as u64,
            &self.eta,
        )
    }
}

/// A participant that has passed partial-view verification, together with
/// the fake dataset it may answer from.
#[derive(Debug, Clone)]
pub struct Target<C> {
    pub ds: HistogramDataset,
    pub fake: HistogramDataset,
    pub background: BackgroundKnowledge,
    pub pv: VerifiedPartialView<C>,
}

/// Synthesizes a dataset, runs honest partial-view sessions until one is
/// accepted, then builds `D*` for `kind`.
pub fn prepare_target<S: AdditiveScheme>(
    scheme: &S,
    keys: &ServerKeys<S::Secret>,
    world: &WorldParams,
    kind: CheatKind,
    seed: Seed,
) -> Result<Target<S::Ct>> {
    let ds = synth_dataset(world.n, world.domain_size, seed.derive("target/ds", 0))?;
    target_from_dataset(scheme, keys, ds, world, kind, seed)
}

/// [`prepare_target`] for a given dataset; `world.n` and
/// `world.domain_size` must describe it.
pub fn target_from_dataset<S: AdditiveScheme>(
    scheme: &S,
    keys: &ServerKeys<S::Secret>,
    ds: HistogramDataset,
    world: &WorldParams,
    kind: CheatKind,
    seed: Seed,
) -> Result<Target<S::Ct>> {
    if ds.len() != world.n || ds.domain_size() != world.domain_size {
        return Err(Error::InvalidParameter(format!(
            "dataset has N={} over {} labels, world says N={} over {}",
            ds.len(),
            ds.domain_size(),
            world.n,
            world.domain_size
        )));
    }
    let background = sample_background(&ds, world.l, seed.derive("target/bk", 0))?;
    let r0 = world.r0()?;
    let mut pv = None;
    for attempt in 0..64 {
        let rep = run_pv_session(
            scheme,
            keys,
            &ds,
            world.n,
            world.v,
            &background,
            r0,
            seed.derive("target/pv", attempt),
        )?;
        if rep.verdict.accept {
            pv = Some(VerifiedPartialView::new(
                rep.pv.expect("accepted view"),
                &rep.verdict,
                world.v,
            )?);
            break;
        }
    }
    let pv =
        pv.ok_or_else(|| Error::Protocol("no honest partial view accepted in 64 attempts".into()))?;
    let fake = fake_dataset(&ds, kind, &mut seed.stream("target/fake", 0))?;
    Ok(Target {
        ds,
        fake,
        background,
        pv,
    })
}

/// `count` random real queries, each selecting half of the domain.
pub fn random_queries(domain_size: usize, count: usize, seed: Seed) -> Result<Vec<QueryVector>> {
    (0..count)
        .map(|i| {
            let mut rng = seed.stream("queries", i as u64);
            let labels: Vec<Label> = index::sample(&mut rng, domain_size, domain_size / 2)
                .into_iter()
                .map(|l| l as Label)
                .collect();
            encode_query(&labels, domain_size)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct QuerySessionReport {
    pub record: TrialRecord,
    pub steps: Vec<Step>,
    /// Real answers decrypted by the querier, in submission order (entry
    /// `k` answers `queries[k % queries.len()]`); `None` when the answers
    /// were discarded.
    pub released: Option<Vec<i64>>,
    /// Test answers as the servers decrypted them (`None` on overflow).
    pub test_answers: Vec<(TestSpec, Option<i64>)>,
    pub answered: u32,
    pub bytes: ByteCounts,
}

fn ct_list<S: AdditiveScheme>(scheme: &S, cts: &[S::Ct]) -> Vec<u8> {
    let mut out = (cts.len() as u32).to_le_bytes().to_vec();
    scheme.write_many(cts, &mut out);
    out
}

fn read_ct_list<S: AdditiveScheme>(scheme: &S, bytes: &[u8]) -> Result<Vec<S::Ct>> {
    ReleaseMessage::decode(scheme, bytes)
}

/// One full query session between an honest querier, the two servers and
/// `target`, which answers from `D*` where `strategy` says so.
pub fn run_query_session<S: AdditiveScheme>(
    scheme: &S,
    keys: &ServerKeys<S::Secret>,
    target: &Target<S::Ct>,
    queries: &[QueryVector],
    strategy: &CheatStrategy,
    params: &QueryParams,
    seed: Seed,
) -> Result<QuerySessionReport> {
    if queries.is_empty() {
        return Err(Error::InvalidParameter(
            "a session needs at least one real query".into(),
        ));
    }
    let steps = params.steps(seed.derive("session/schedule", 0))?;
    let cheat = if strategy.is_honest() {
        vec![false; steps.len()]
    } else {
        strategy
            .plan
            .positions(steps.len(), &mut seed.stream("session/cheat", 0))?
    };
    let noise_max = params.noise_max()?;
    let mut budget = params.budget()?;
    let size = target.ds.domain_size();

    let querier = Party::Querier(0);
    let me = Party::Participant(0);
    let mut net = Transport::new();
    let mut q_rng = seed.stream("session/querier", 0);
    let (usk, upk) = scheme.new_recipient(&mut q_rng);

    let reals = steps.iter().filter(|s| matches!(s, Step::Real(_))).count();
    for i in 0..reals {
        let eq = encrypt_query(scheme, &queries[i % queries.len()], &mut q_rng);
        net.send(querier, Party::S1, MsgKind::Query, eq.to_bytes(scheme));
    }

    // S1: collect real queries, build tests, run the stream.
    let mut s1_rng = seed.stream("session/s1", 0);
    let ctx = TestContext {
        domain_size: size,
        n_claimed: target.ds.len() as u64,
        background: Some(&target.background),
        pv: Some(&target.pv),
    };
    let mut inbox = (0..reals)
        .map(|_| net.expect(Party::S1, querier, MsgKind::Query))
        .collect::<Result<Vec<_>>>()?;
    let mut p_rng = seed.stream("session/participant", 0);
    let mut answers = Vec::with_capacity(steps.len());
    let mut specs = Vec::new();
    for (i, step) in steps.iter().enumerate() {
        let outgoing = match step {
            Step::Real(j) => std::mem::take(&mut inbox[*j]),
            Step::Test(kind) => {
                let (eq, spec) = make_test(scheme, *kind, &ctx, noise_max, &mut s1_rng)?;
                specs.push((i, spec));
                eq.to_bytes(scheme)
            }
        };
        net.send(Party::S1, me, MsgKind::Query, outgoing);

        let eq = EncryptedQuery::from_bytes(scheme, &net.expect(me, Party::S1, MsgKind::Query)?)?;
        let ds = if cheat[i] { &target.fake } else { &target.ds };
        let ans = answer_query(scheme, ds, &eq, &mut budget, &mut p_rng)?;
        let mut wire = Vec::with_capacity(S::CT_LEN);
        scheme.write_ct(&ans, &mut wire);
        net.send(me, Party::S1, MsgKind::Answer, wire);

        answers.push(scheme.read_ct(&net.expect(Party::S1, me, MsgKind::Answer)?)?);
    }

    // Staged decryption of the test answers only: S1 strips its share, S2
    // finishes.
    let stripped: Vec<S::Ct> = specs
        .iter()
        .map(|(i, _)| scheme.strip(&keys.s1, &answers[*i]))
        .collect();
    net.send(
        Party::S1,
        Party::S2,
        MsgKind::PartialDecrypt,
        ct_list(scheme, &stripped),
    );
    let at_s2 = read_ct_list(
        scheme,
        &net.expect(Party::S2, Party::S1, MsgKind::PartialDecrypt)?,
    )?;
    let mut record = TrialRecord {
        cheated_answers: cheat.iter().filter(|c| **c).count() as u32,
        ..Default::default()
    };
    let mut test_answers = Vec::with_capacity(specs.len());
    for ((i, spec), ct) in specs.iter().zip(&at_s2) {
        let value = scheme.decode(&scheme.strip(&keys.s2, ct)).ok();
        let pass = value.is_some_and(|x| spec.passes(x));
        record.record_test(spec.kind, cheat[*i], pass);
        test_answers.push((*spec, value));
    }

    // Release or discard the real answers.
    let mut real_answers: Vec<(usize, &S::Ct)> = steps
        .iter()
        .zip(&answers)
        .filter_map(|(s, a)| match s {
            Step::Real(j) => Some((*j, a)),
            Step::Test(_) => None,
        })
        .collect();
    real_answers.sort_by_key(|(j, _)| *j);
    let real_answers: Vec<&S::Ct> = real_answers.into_iter().map(|(_, a)| a).collect();
    let release = if record.flagged() {
        Release::Discarded { flagged: true }
    } else {
        let mut staged = Vec::with_capacity(2 * real_answers.len());
        for a in &real_answers {
            let st = scheme.reencrypt_init(a);
            staged.push((*a).clone());
            staged.push(scheme.reencrypt_stage(a, &st, &keys.s1, &upk, &mut s1_rng));
        }
        net.send(
            Party::S1,
            Party::S2,
            MsgKind::ReencryptStage,
            ct_list(scheme, &staged),
        );
        let staged = read_ct_list(
            scheme,
            &net.expect(Party::S2, Party::S1, MsgKind::ReencryptStage)?,
        )?;
        let mut s2_rng = seed.stream("session/s2", 0);
        Release::Released(
            staged
                .chunks(2)
                .map(|p| scheme.reencrypt_stage(&p[0], &p[1], &keys.s2, &upk, &mut s2_rng))
                .collect(),
        )
    };
    net.send(
        Party::S2,
        querier,
        MsgKind::Release,
        ReleaseMessage::encode(scheme, &release),
    );
    let got = ReleaseMessage::decode(scheme, &net.expect(querier, Party::S2, MsgKind::Release)?)?;
    let released = match release {
        Release::Released(_) => Some(
            got.iter()
                .map(|c| scheme.open(&usk, c))
                .collect::<Result<Vec<_>>>()?,
        ),
        Release::Discarded { .. } => None,
    };
    debug_assert_eq!(net.pending(), 0);
    Ok(QuerySessionReport {
        record,
        steps,
        released,
        test_answers,
        answered: budget.answered(),
        bytes: net.counts().clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::ElGamalScheme;
    use crate::query::Tolerance;
    use crate::sim::strategy::CheatPlan;
    use crate::Point;

    fn world() -> WorldParams {
        WorldParams {
            n: 60,
            domain_size: 240,
            v: 20,
            l: 15,
            eta: Threshold::parse("0.05").unwrap(),
        }
    }

    #[test]
    fn honest_session_releases_noisy_answers() {
        let mut rng = Seed(9).rng();
        let (s, keys) = ElGamalScheme::<Point>::setup(4096, &mut rng).unwrap();
        let t = prepare_target(&s, &keys, &world(), CheatKind::Modify(1.0), Seed(1)).unwrap();
        let qs = random_queries(240, 3, Seed(2)).unwrap();
        let params = QueryParams {
            m_q: 3,
            m_t: 3,
            tolerance: Tolerance::Wide { session_fp: 1e-6 },
            ..Default::default()
        };
        let rep = run_query_session(
            &s,
            &keys,
            &t,
            &qs,
            &CheatStrategy::honest(),
            &params,
            Seed(3),
        )
        .unwrap();
        assert!(!rep.record.flagged());
        assert_eq!(rep.answered, 6);
        let released = rep.released.unwrap();
        assert_eq!(released.len(), 3);
        let nm = params.noise_max().unwrap();
        for (x, q) in released.iter().zip(&qs) {
            let truth = q.answer(&t.ds).unwrap() as i64;
            assert!(((x - truth) as f64).abs() <= nm * 2.0);
        }
        assert_eq!(rep.bytes.messages(MsgKind::Query), 3 + 6);
        assert_eq!(rep.bytes.messages(MsgKind::Answer), 6);
        assert_eq!(rep.bytes.bytes(MsgKind::Answer), 6 * 66);
        assert_eq!(rep.bytes.bytes(MsgKind::Query), 9 * (4 + 240 * 66));

        let cheat = CheatStrategy {
            kind: CheatKind::Modify(1.0),
            plan: CheatPlan::Forced { x: 6 },
        };
        let sharp = QueryParams {
            eps_peer: 5.0,
            eps_server: 5.0,
            tolerance: Tolerance::Strict { tail: 0.05 },
            ..params
        };
        let rep = run_query_session(&s, &keys, &t, &qs, &cheat, &sharp, Seed(3)).unwrap();
        assert!(rep.record.flagged());
        assert!(rep.record.detected());
        assert!(rep.released.is_none());
        assert_eq!(rep.record.cheated_tests, 3);
    }

    #[test]
    fn released_answers_follow_submission_order() {
        use crate::group::Transparent;
        use crate::sim::session::ScheduleMode;
        let s = Transparent::new(1 << 16);
        let keys = ServerKeys { s1: (), s2: () };
        let t = prepare_target(&s, &keys, &world(), CheatKind::Honest, Seed(1)).unwrap();
        let qs = random_queries(240, 5, Seed(2)).unwrap();
        for schedule in [ScheduleMode::Shuffle, ScheduleMode::Independent] {
            let p = QueryParams {
                m_q: 5,
                m_t: 4,
                eps_peer: 1e5,
                eps_server: 1e5,
                schedule,
                ..Default::default()
            };
            for seed in 0..20 {
                let rep =
                    run_query_session(&s, &keys, &t, &qs, &CheatStrategy::honest(), &p, Seed(seed))
                        .unwrap();
                for (k, x) in rep.released.unwrap().iter().enumerate() {
                    assert_eq!(*x, qs[k % qs.len()].answer(&t.ds).unwrap() as i64);
                }
            }
        }
    }
}
