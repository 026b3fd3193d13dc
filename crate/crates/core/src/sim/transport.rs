// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use std::collections::{BTreeMap, VecDeque};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Party {
    S1,
    S2,
    Participant(u32),
    Querier(u32),
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Party::S1 => f.write_str("S1"),
            Party::S2 => f.write_str("S2"),
            Party::Participant(i) => write!(f, "P{i}"),
            Party::Querier(i) => write!(f, "Q{i}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MsgKind {
    /// Permuted flags, participant to S1.
    Lbs,
    /// σ⁻¹, participant to S2.
    InversePerm,
    /// Encrypted lbs, S1 to S2.
    EncryptedLbs,
    /// Finished partial view, S2 to S1.
    PartialView,
    /// One encrypted query vector.
    Query,
    /// One encrypted answer.
    Answer,
    /// Test answers with S1's decryption share removed, S1 to S2.
    PartialDecrypt,
    /// Answers after S1's re-encryption stage, S1 to S2.
    ReencryptStage,
    /// Answers under the querier's key, S2 to the querier.
    Release,
}

impl MsgKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MsgKind::Lbs => "lbs",
            MsgKind::InversePerm => "inverse_perm",
            MsgKind::EncryptedLbs => "encrypted_lbs",
            MsgKind::PartialView => "partial_view",
            MsgKind::Query => "query",
            MsgKind::Answer => "answer",
            MsgKind::PartialDecrypt => "partial_decrypt",
            MsgKind::ReencryptStage => "reencrypt_stage",
            MsgKind::Release => "release",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub from: Party,
    pub kind: MsgKind,
    pub payload: Vec<u8>,
}

/// Message count and total bytes per kind.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ByteCounts {
    pub by_kind: BTreeMap<MsgKind, (u64, u64)>,
}

impl ByteCounts {
    pub fn messages(&self, kind: MsgKind) -> u64 {
        self.by_kind.get(&kind).map_or(0, |c| c.0)
    }

    pub fn bytes(&self, kind: MsgKind) -> u64 {
        self.by_kind.get(&kind).map_or(0, |c| c.1)
    }

    pub fn total(&self) -> u64 {
        self.by_kind.values().map(|c| c.1).sum()
    }
}

/// In-process FIFO queues, one per directed edge. Every delivered byte is
/// counted on its edge and under its message kind.
#[derive(Debug, Default)]
pub struct Transport {
    queues: BTreeMap<(Party, Party), VecDeque<Message>>,
    edge_bytes: BTreeMap<(Party, Party), u64>,
    counts: ByteCounts,
    sizes: BTreeMap<MsgKind, Vec<usize>>,
}

impl Transport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn send(&mut self, from: Party, to: Party, kind: MsgKind, payload: Vec<u8>) {
        let len = payload.len();
        *self.edge_bytes.entry((from, to)).or_default() += len as u64;
        let c = self.counts.by_kind.entry(kind).or_default();
        c.0 += 1;
        c.1 += len as u64;
        self.sizes.entry(kind).or_default().push(len);
        self.queues
            .entry((from, to))
            .or_default()
            .push_back(Message {
                from,
                kind,
                payload,
            });
    }

    /// Next message for `me` from `from`, if any.
    pub fn recv(&mut self, me: Party, from: Party) -> Option<Message> {
        self.queues.get_mut(&(from, me))?.pop_front()
    }

    /// Like [`recv`](Self::recv) but the message must exist and be of `kind`.
    pub fn expect(&mut self, me: Party, from: Party, kind: MsgKind) -> Result<Vec<u8>> {
        match self.recv(me, from) {
            Some(m) if m.kind == kind => Ok(m.payload),
            Some(m) => Err(Error::Protocol(format!(
                "{me} expected {} from {from}, got {}",
                kind.as_str(),
                m.kind.as_str()
            ))),
            None => Err(Error::Protocol(format!(
                "{me} has no {} message from {from}",
                kind.as_str()
            ))),
        }
    }

    pub fn edge_bytes(&self, from: Party, to: Party) -> u64 {
        self.edge_bytes.get(&(from, to)).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &ByteCounts {
        &self.counts
    }

    /// Lengths of every message of `kind`, in send order.
    pub fn sizes(&self, kind: MsgKind) -> &[usize] {
        self.sizes.get(&kind).map_or(&[], |v| v.as_slice())
    }

    /// Messages still queued on any edge.
    pub fn pending(&self) -> usize {
        self.queues.values().map(|q| q.len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fifo_per_edge_and_counters() {
        let mut t = Transport::new();
        let p = Party::Participant(0);
        t.send(p, Party::S1, MsgKind::Lbs, vec![1; 8]);
        t.send(p, Party::S1, MsgKind::Lbs, vec![2; 16]);
        t.send(p, Party::S2, MsgKind::InversePerm, vec![3; 4]);
        assert!(t.recv(Party::S2, Party::S1).is_none());
        assert_eq!(t.recv(Party::S1, p).unwrap().payload, vec![1; 8]);
        assert!(t.expect(Party::S1, p, MsgKind::Answer).is_err());
        assert_eq!(
            t.expect(Party::S2, p, MsgKind::InversePerm).unwrap(),
            vec![3; 4]
        );
        assert_eq!(t.edge_bytes(p, Party::S1), 24);
        assert_eq!(t.counts().bytes(MsgKind::Lbs), 24);
        assert_eq!(t.counts().messages(MsgKind::Lbs), 2);
        assert_eq!(t.counts().total(), 28);
        assert_eq!(t.sizes(MsgKind::Lbs), &[8, 16]);
        assert_eq!(t.pending(), 0);
    }
}
