// SPDX-License-Identifier: Apache-2.0

use super::transport::{ByteCounts, MsgKind, Party, Transport};
use crate::data::{BackgroundKnowledge, HistogramDataset};
use crate::error::{Error, Result};
use crate::group::{AdditiveScheme, ServerKeys};
use crate::pv::{
    participant_prepare, verify_pv, EncryptedUpload, InversePermutation, LbsUpload, PartialView,
    PvVerdict, ServerOne, ServerTwo,
};
use crate::seed::Seed;
use crate::Label;
use rand::seq::index;

/// `D′`: `keep` random records of `ds` plus `N − keep` labels outside it.
pub fn partial_fake<R: rand::RngCore>(
    ds: &HistogramDataset,
    keep: usize,
    rng: &mut R,
) -> Result<HistogramDataset> {
    let n = ds.len();
    let size = ds.domain_size();
    if keep > n {
        return Err(Error::InvalidParameter(format!(
            "keep={keep} exceeds N={n}"
        )));
    }
    if size - n < n - keep {
        return Err(Error::InvalidParameter(format!(
            "{} filler labels needed, domain has {} outside the dataset",
            n - keep,
            size - n
        )));
    }
    let labels = ds.labels();
    let outside: Vec<Label> = (0..size as Label).filter(|l| !ds.contains(*l)).collect();
    let kept = index::sample(rng, n, keep).into_iter().map(|i| labels[i]);
    let filler = index::sample(rng, outside.len(), n - keep)
        .into_iter()
        .map(|i| outside[i]);
    HistogramDataset::from_labels(size, kept.chain(filler))
}

#[derive(Debug, Clone)]
pub struct PvSessionReport<C> {
    pub verdict: PvVerdict,
    /// The view S1 ended up holding, if the flow completed.
    pub pv: Option<PartialView<C>>,
    pub bytes: ByteCounts,
}

/// One partial-view collection and verification over a [`Transport`].
/// The participant submits `D′` keeping `keep` of its true records; the
/// background knowledge `bk` is drawn from the true dataset.
pub fn run_pv_session<S: AdditiveScheme>(
    scheme: &S,
    keys: &ServerKeys<S::Secret>,
    ds: &HistogramDataset,
    keep: usize,
    v: usize,
    bk: &BackgroundKnowledge,
    r0: u64,
    seed: Seed,
) -> Result<PvSessionReport<S::Ct>> {
    let submitted = if keep == ds.len() {
        ds.clone()
    } else {
        partial_fake(ds, keep, &mut seed.stream("pv/fake", 0))?
    };
    let me = Party::Participant(0);
    let mut net = Transport::new();
    let (lbs, inv) = participant_prepare(&submitted, seed.derive("pv/sigma", 0));
    net.send(me, Party::S1, MsgKind::Lbs, lbs.to_bytes());
    net.send(me, Party::S2, MsgKind::InversePerm, inv.to_bytes());

    let mut s1 = ServerOne::<S>::new(keys.s1.clone());
    let mut s2 = ServerTwo::<S>::new(keys.s2.clone());
    let flow = |net: &mut Transport,
                s1: &mut ServerOne<S>,
                s2: &mut ServerTwo<S>|
     -> Result<PartialView<S::Ct>> {
        s1.receive(LbsUpload::from_bytes(&net.expect(
            Party::S1,
            me,
            MsgKind::Lbs,
        )?)?);
        let enc = s1.sample(scheme, v, &mut seed.stream("pv/s1", 0))?;
        net.send(
            Party::S1,
            Party::S2,
            MsgKind::EncryptedLbs,
            enc.to_bytes(scheme),
        );

        s2.receive(InversePermutation::from_bytes(&net.expect(
            Party::S2,
            me,
            MsgKind::InversePerm,
        )?)?);
        let enc = EncryptedUpload::from_bytes(
            scheme,
            &net.expect(Party::S2, Party::S1, MsgKind::EncryptedLbs)?,
        )?;
        let pv = s2.finalize(scheme, enc, &mut seed.stream("pv/s2", 0))?;
        net.send(
            Party::S2,
            Party::S1,
            MsgKind::PartialView,
            pv.to_bytes(scheme),
        );
        PartialView::from_bytes(
            scheme,
            &net.expect(Party::S1, Party::S2, MsgKind::PartialView)?,
        )
    };
    let (verdict, pv) = match flow(&mut net, &mut s1, &mut s2) {
        Ok(pv) => (verify_pv(scheme, &pv, bk, r0, keys), Some(pv)),
        Err(e) => (PvVerdict::aborted(e.to_string()), None),
    };
    Ok(PvSessionReport {
        verdict,
        pv,
        bytes: net.counts().clone(),
    })
}
