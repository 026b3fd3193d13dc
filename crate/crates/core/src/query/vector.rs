// SPDX-License-Identifier: Apache-2.0

use super::hidden::TestKind;
use crate::bits::Indicator;
use crate::data::HistogramDataset;
use crate::error::{Error, Result};
use crate::group::AdditiveScheme;
use crate::Label;
use rand::RngCore;

/// 0/1 vector over the domain; the answer on `D` is `⟨Q, D⟩`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryVector {
    bits: Indicator,
}

impl QueryVector {
    pub fn from_indicator(bits: Indicator) -> Self {
        QueryVector { bits }
    }

    pub fn all(domain_size: usize) -> Self {
        QueryVector {
            bits: Indicator::ones(domain_size),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, label: Label) -> bool {
        self.bits.get(label as usize)
    }

    pub fn indicator(&self) -> &Indicator {
        &self.bits
    }

    pub fn answer(&self, ds: &HistogramDataset) -> Result<u64> {
        if ds.domain_size() != self.len() {
            return Err(Error::InvalidParameter(
                "query and dataset domains differ".into(),
            ));
        }
        Ok(self.bits.dot(ds.indicator()) as u64)
    }
}

pub fn encode_query(labels: &[Label], domain_size: usize) -> Result<QueryVector> {
    let mut bits = Indicator::zeros(domain_size);
    for &l in labels {
        if l as usize >= domain_size {
            return Err(Error::InvalidParameter(format!(
                "label {l} outside domain of {domain_size}"
            )));
        }
        bits.set(l as usize, true);
    }
    Ok(QueryVector { bits })
}

/// Who built a query. Kept beside the ciphertexts, never on the wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Real(usize),
    Test(TestKind),
}

/// One ciphertext per label.
#[derive(Debug, Clone, PartialEq)]
pub struct EncryptedQuery<C> {
    cts: Vec<C>,
    origin: Option<Origin>,
}

impl<C> EncryptedQuery<C> {
    pub fn new(cts: Vec<C>, origin: Option<Origin>) -> Self {
        EncryptedQuery { cts, origin }
    }

    pub fn cts(&self) -> &[C] {
        &self.cts
    }

    pub fn len(&self) -> usize {
        self.cts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cts.is_empty()
    }

    pub fn origin(&self) -> Option<Origin> {
        self.origin
    }

    pub fn with_origin(mut self, origin: Origin) -> Self {
        self.origin = Some(origin);
        self
    }

    /// `4-byte LE count ‖ count ciphertexts`.
    pub fn to_bytes<S: AdditiveScheme<Ct = C>>(&self, scheme: &S) -> Vec<u8> {
        let mut out = Vec::with_capacity(4 + self.cts.len() * S::CT_LEN);
        out.extend_from_slice(&(self.cts.len() as u32).to_le_bytes());
        scheme.write_many(&self.cts, &mut out);
        out
    }

    pub fn from_bytes<S: AdditiveScheme<Ct = C>>(scheme: &S, bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 4 {
            return Err(Error::Encoding(
                "query message shorter than its count".into(),
            ));
        }
        let count = u32::from_le_bytes(bytes[..4].try_into().unwrap()) as usize;
        if bytes.len() != 4 + count * S::CT_LEN {
            return Err(Error::Encoding(format!(
                "query message holds {} bytes for {count} entries",
                bytes.len()
            )));
        }
        Ok(EncryptedQuery {
            cts: scheme.read_many(&bytes[4..])?,
            origin: None,
        })
    }
}

pub fn encrypt_query<S: AdditiveScheme, R: RngCore>(
    scheme: &S,
    q: &QueryVector,
    rng: &mut R,
) -> EncryptedQuery<S::Ct> {
    let cts = (0..q.len())
        .map(|i| scheme.encrypt(q.bits.get(i) as i64, rng))
        .collect();
    EncryptedQuery { cts, origin: None }
}

#[cfg(test)]
mod unit {
    use super::*;
    use crate::group::{ElGamalScheme, Transparent, TransparentCt};
    use crate::seed::Seed;
    use crate::Point;
    use std::collections::HashSet;

    #[test]
    fn fig2_loan_query() {
        let ds = HistogramDataset::from_labels(8, [0, 3, 4, 7]).unwrap();
        let q = encode_query(&[0, 2, 4, 6], 8).unwrap();
        assert_eq!(q.answer(&ds).unwrap(), 2);
        assert_eq!(QueryVector::all(8).answer(&ds).unwrap(), 4);
        assert_eq!(encode_query(&[], 8).unwrap().answer(&ds).unwrap(), 0);
        assert!(encode_query(&[8], 8).is_err());
    }

    #[test]
    fn wire_drops_origin_and_checks_length() {
        let s = Transparent::new(3);
        let q = EncryptedQuery::new(
            vec![TransparentCt(1), TransparentCt(0)],
            Some(Origin::Test(TestKind::N)),
        );
        let b = q.to_bytes(&s);
        assert_eq!(b.len(), 4 + 2 * 66);
        let back = EncryptedQuery::from_bytes(&s, &b).unwrap();
        assert_eq!(back.cts(), q.cts());
        assert_eq!(back.origin(), None);
        assert!(EncryptedQuery::<TransparentCt>::from_bytes(&s, &b[..70]).is_err());
    }

    #[test]
    fn fresh_randomness_per_entry() {
        let mut rng = Seed(2).rng();
        let (s, _) = ElGamalScheme::<Point>::setup(4, &mut rng).unwrap();
        let eq = encrypt_query(&s, &QueryVector::all(64), &mut rng);
        let distinct: HashSet<Vec<u8>> = eq.cts().iter().map(|c| c.to_bytes()).collect();
        assert_eq!(distinct.len(), 64);
    }
}
