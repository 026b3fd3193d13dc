// SPDX-License-Identifier: Apache-2.0

use super::messages::{EncryptedUpload, InversePermutation, LbsUpload, PartialView};
use crate::data::{random_permutation, BackgroundKnowledge, HistogramDataset, Permutation};
use crate::error::{Error, Result};
use crate::group::{AdditiveScheme, ServerKeys};
use crate::seed::Seed;
use crate::Label;
use rand::seq::index;
use rand::RngCore;
use std::collections::VecDeque;

/// Step 1: permute the flags with a fresh σ. The upload goes to S1, σ⁻¹ to
/// S2; σ itself is dropped here.
pub fn participant_prepare(ds: &HistogramDataset, seed: Seed) -> (LbsUpload, InversePermutation) {
    prepare_with(ds, &random_permutation(ds.domain_size(), seed))
}

pub(crate) fn prepare_with(
    ds: &HistogramDataset,
    sigma: &Permutation,
) -> (LbsUpload, InversePermutation) {
    let mut flags = vec![false; ds.domain_size()];
    for i in ds.indicator().iter_ones() {
        flags[sigma.apply(i)] = true;
    }
    (LbsUpload { flags }, InversePermutation::of(sigma))
}

/// Steps 2 and 3: selector vector of weight `v`, popped in ascending
/// position order over the set flags.
pub fn s1_sample<S: AdditiveScheme, R: RngCore>(
    scheme: &S,
    upload: &LbsUpload,
    v: usize,
    rng: &mut R,
) -> Result<EncryptedUpload<S::Ct>> {
    let n = upload.weight();
    if v > n {
        return Err(Error::InvalidParameter(format!(
            "V={v} exceeds the {n} uploaded records"
        )));
    }
    let mut bits = vec![0i64; n];
    for t in index::sample(rng, n, v) {
        bits[t] = 1;
    }
    let mut selector: VecDeque<S::Ct> = bits.iter().map(|b| scheme.encrypt(*b, rng)).collect();
    let entries = upload
        .flags
        .iter()
        .map(|f| {
            if *f {
                selector.pop_front().expect("one selector per set flag")
            } else {
                scheme.encrypt(0, rng)
            }
        })
        .collect();
    Ok(EncryptedUpload { entries })
}

/// Step 4: re-randomize every entry and restore label order,
/// `PV[σ⁻¹(j)] = rerand(E[j])`.
pub fn s2_finalize<S: AdditiveScheme, R: RngCore>(
    scheme: &S,
    upload: &EncryptedUpload<S::Ct>,
    inverse: &InversePermutation,
    rng: &mut R,
) -> Result<PartialView<S::Ct>> {
    if inverse.len() != upload.len() {
        return Err(Error::Protocol(format!(
            "σ⁻¹ has {} entries, encrypted upload has {}",
            inverse.len(),
            upload.len()
        )));
    }
    let inv = Permutation::from_forward(inverse.inv.clone())?;
    let mut slots: Vec<Option<S::Ct>> = vec![None; upload.len()];
    for (j, ct) in upload.entries.iter().enumerate() {
        slots[inv.apply(j)] = Some(scheme.rerandomize(ct, rng));
    }
    Ok(PartialView {
        cts: slots
            .into_iter()
            .map(|c| c.expect("bijection fills every slot"))
            .collect(),
    })
}

/// S1 role state. The upload is dropped as soon as it has been used.
pub struct ServerOne<S: AdditiveScheme> {
    share: S::Secret,
    upload: Option<LbsUpload>,
}

impl<S: AdditiveScheme> ServerOne<S> {
    pub fn new(share: S::Secret) -> Self {
        ServerOne {
            share,
            upload: None,
        }
    }

    pub fn share(&self) -> &S::Secret {
        &self.share
    }

    pub fn receive(&mut self, upload: LbsUpload) {
        self.upload = Some(upload);
    }

    pub fn holds_upload(&self) -> bool {
        self.upload.is_some()
    }

    pub fn sample<R: RngCore>(
        &mut self,
        scheme: &S,
        v: usize,
        rng: &mut R,
    ) -> Result<EncryptedUpload<S::Ct>> {
        let up = self
            .upload
            .take()
            .ok_or_else(|| Error::Protocol("S1 has no upload".into()))?;
        s1_sample(scheme, &up, v, rng)
    }
}

/// S2 role state. σ⁻¹ is dropped as soon as it has been used.
pub struct ServerTwo<S: AdditiveScheme> {
    share: S::Secret,
    inverse: Option<InversePermutation>,
}

impl<S: AdditiveScheme> ServerTwo<S> {
    pub fn new(share: S::Secret) -> Self {
        ServerTwo {
            share,
            inverse: None,
        }
    }

    pub fn share(&self) -> &S::Secret {
        &self.share
    }

    pub fn receive(&mut self, inverse: InversePermutation) {
        self.inverse = Some(inverse);
    }

    pub fn holds_inverse(&self) -> bool {
        self.inverse.is_some()
    }

    pub fn finalize<R: RngCore>(
        &mut self,
        scheme: &S,
        upload: EncryptedUpload<S::Ct>,
        rng: &mut R,
    ) -> Result<PartialView<S::Ct>> {
        let inv = self
            .inverse
            .take()
            .ok_or_else(|| Error::Protocol("S2 has no σ⁻¹".into()))?;
        s2_finalize(scheme, &upload, &inv, rng)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RejectCause {
    BelowThreshold { matched: u64, r0: u64 },
    MalformedFlag { label: Label, value: i64 },
    DecodeOverflow { label: Label },
    Aborted(String),
}

impl std::fmt::Display for RejectCause {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RejectCause::BelowThreshold { matched, r0 } => write!(f, "matched {matched} < r0 {r0}"),
            RejectCause::MalformedFlag { label, value } => {
                write!(f, "malformed flag {value} at label {label}")
            }
            RejectCause::DecodeOverflow { label } => write!(f, "decode overflow at label {label}"),
            RejectCause::Aborted(m) => write!(f, "protocol aborted: {m}"),
        }
    }
}

/// Outcome of checking a PV against background knowledge. Only the `L`
/// background positions are ever decrypted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PvVerdict {
    pub matched: u64,
    /// Decrypted flag per background label; `None` where decoding failed.
    pub bits: Vec<(Label, Option<i64>)>,
    pub accept: bool,
    pub cause: Option<RejectCause>,
}

impl PvVerdict {
    pub fn aborted(msg: impl Into<String>) -> Self {
        PvVerdict {
            matched: 0,
            bits: Vec::new(),
            accept: false,
            cause: Some(RejectCause::Aborted(msg.into())),
        }
    }
}

pub fn verify_pv<S: AdditiveScheme>(
    scheme: &S,
    pv: &PartialView<S::Ct>,
    bk: &BackgroundKnowledge,
    r0: u64,
    keys: &ServerKeys<S::Secret>,
) -> PvVerdict {
    let mut bits = Vec::with_capacity(bk.len());
    let mut matched = 0u64;
    let mut cause = None;
    for &label in &bk.labels {
        let Some(ct) = pv.cts.get(label as usize) else {
            return PvVerdict::aborted(format!(
                "label {label} outside a PV of {} entries",
                pv.len()
            ));
        };
        match keys.joint_decrypt(scheme, ct) {
            Ok(x) => {
                bits.push((label, Some(x)));
                match x {
                    1 => matched += 1,
                    0 => {}
                    _ => {
                        cause.get_or_insert(RejectCause::MalformedFlag { label, value: x });
                    }
                }
            }
            Err(_) => {
                bits.push((label, None));
                cause.get_or_insert(RejectCause::DecodeOverflow { label });
            }
        }
    }
    if cause.is_none() && matched < r0 {
        cause = Some(RejectCause::BelowThreshold { matched, r0 });
    }
    PvVerdict {
        matched,
        bits,
        accept: cause.is_none(),
        cause,
    }
}

/// A partial view that passed verification; the only input Test V accepts.
#[derive(Debug, Clone)]
pub struct VerifiedPartialView<C> {
    pv: PartialView<C>,
    v: usize,
}

impl<C> VerifiedPartialView<C> {
    pub fn new(pv: PartialView<C>, verdict: &PvVerdict, v: usize) -> Result<Self> {
        if !verdict.accept {
            return Err(Error::Protocol(format!(
                "partial view was not accepted ({})",
                verdict
                    .cause
                    .as_ref()
                    .map_or("no cause".into(), |c| c.to_string())
            )));
        }
        Ok(VerifiedPartialView { pv, v })
    }

    pub fn pv(&self) -> &PartialView<C> {
        &self.pv
    }

    /// Sample size `V` the view was built with.
    pub fn v(&self) -> usize {
        self.v
    }
}
