// SPDX-License-Identifier: Apache-2.0

use crate::data::Permutation;
use crate::error::{Error, Result};
use crate::group::AdditiveScheme;

fn le_u32(b: &[u8]) -> u32 {
    u32::from_le_bytes(b.try_into().expect("4 bytes"))
}

/// Permuted flags, `flags[σ(i)] = val(i)`. Wire entry: 4-byte position and
/// 4-byte flag word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LbsUpload {
    pub(crate) flags: Vec<bool>,
}

impl LbsUpload {
    pub const ENTRY_LEN: usize = 8;

    pub fn from_flags(flags: Vec<bool>) -> Self {
        LbsUpload { flags }
    }

    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn weight(&self) -> usize {
        self.flags.iter().filter(|f| **f).count()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.flags.len() * Self::ENTRY_LEN);
        for (j, f) in self.flags.iter().enumerate() {
            out.extend_from_slice(&(j as u32).to_le_bytes());
            out.extend_from_slice(&u32::from(*f).to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() % Self::ENTRY_LEN != 0 {
            return Err(Error::Encoding(
                "lbs message length is not a multiple of 8".into(),
            ));
        }
        let n = bytes.len() / Self::ENTRY_LEN;
        let mut flags = vec![false; n];
        let mut seen = vec![false; n];
        for e in bytes.chunks(Self::ENTRY_LEN) {
            let j = le_u32(&e[..4]) as usize;
            let f = le_u32(&e[4..]);
            if j >= n || seen[j] || f > 1 {
                return Err(Error::Encoding(format!(
                    "bad lbs entry (position {j}, flag {f})"
                )));
            }
            seen[j] = true;
            flags[j] = f == 1;
        }
        Ok(LbsUpload { flags })
    }
}

/// `σ⁻¹` as sent to S2, 4 bytes per entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InversePermutation {
    pub(crate) inv: Vec<u32>,
}

impl InversePermutation {
    pub const ENTRY_LEN: usize = 4;

    pub fn of(p: &Permutation) -> Self {
        InversePermutation {
            inv: p.inverse().to_vec(),
        }
    }

    /// Raw map; not checked until S2 uses it.
    pub fn from_raw(inv: Vec<u32>) -> Self {
        InversePermutation { inv }
    }

    pub fn len(&self) -> usize {
        self.inv.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv.is_empty()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.inv
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.inv.iter().flat_map(|x| x.to_le_bytes()).collect()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() % Self::ENTRY_LEN != 0 {
            return Err(Error::Encoding(
                "σ⁻¹ message length is not a multiple of 4".into(),
            ));
        }
        Ok(InversePermutation {
            inv: bytes.chunks(4).map(le_u32).collect(),
        })
    }
}

/// S1's output, indexed by permuted position. Wire entry: 4-byte position
/// and one ciphertext.
#[derive(Debug, Clone, PartialEq)]
pub struct EncryptedUpload<C> {
    pub(crate) entries: Vec<C>,
}

impl<C> EncryptedUpload<C> {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[C] {
        &self.entries
    }

    pub fn entry_len<S: AdditiveScheme<Ct = C>>() -> usize {
        4 + S::CT_LEN
    }

    pub fn to_bytes<S: AdditiveScheme<Ct = C>>(&self, scheme: &S) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.entries.len() * Self::entry_len::<S>());
        let mut cts = Vec::with_capacity(self.entries.len() * S::CT_LEN);
        scheme.write_many(&self.entries, &mut cts);
        for (j, ct) in cts.chunks(S::CT_LEN).enumerate() {
            out.extend_from_slice(&(j as u32).to_le_bytes());
            out.extend_from_slice(ct);
        }
        out
    }

    pub fn from_bytes<S: AdditiveScheme<Ct = C>>(scheme: &S, bytes: &[u8]) -> Result<Self> {
        let w = Self::entry_len::<S>();
        if bytes.len() % w != 0 {
            return Err(Error::Encoding(format!(
                "encrypted lbs length is not a multiple of {w}"
            )));
        }
        let mut entries = Vec::with_capacity(bytes.len() / w);
        for (j, e) in bytes.chunks(w).enumerate() {
            if le_u32(&e[..4]) as usize != j {
                return Err(Error::Encoding(format!(
                    "encrypted lbs entry {j} out of order"
                )));
            }
            entries.push(scheme.read_ct(&e[4..])?);
        }
        Ok(EncryptedUpload { entries })
    }
}

/// One ciphertext per label, original label order.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialView<C> {
    pub(crate) cts: Vec<C>,
}

impl<C> PartialView<C> {
    pub fn from_cts(cts: Vec<C>) -> Self {
        PartialView { cts }
    }

    pub fn len(&self) -> usize {
        self.cts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cts.is_empty()
    }

    pub fn cts(&self) -> &[C] {
        &self.cts
    }

    pub fn to_bytes<S: AdditiveScheme<Ct = C>>(&self, scheme: &S) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.cts.len() * S::CT_LEN);
        scheme.write_many(&self.cts, &mut out);
        out
    }

    pub fn from_bytes<S: AdditiveScheme<Ct = C>>(scheme: &S, bytes: &[u8]) -> Result<Self> {
        Ok(PartialView {
            cts: scheme.read_many(bytes)?,
        })
    }
}
