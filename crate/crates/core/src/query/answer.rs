// SPDX-License-Identifier: Apache-2.0

use super::budget::{laplace_noise, PrivacyBudget};
use super::hidden::TestSpec;
use super::vector::EncryptedQuery;
use crate::data::HistogramDataset;
use crate::error::{Error, Result};
use crate::group::{AdditiveScheme, ServerKeys};
use rand::RngCore;

/// Homomorphic `Σ_{val(i)=1} ⟦q_i⟧ + ⟦noise⟧`, with Laplace noise at the
/// budget's scale. Consumes one budget unit.
pub fn answer_query<S: AdditiveScheme, R: RngCore>(
    scheme: &S,
    ds: &HistogramDataset,
    eq: &EncryptedQuery<S::Ct>,
    budget: &mut PrivacyBudget,
    rng: &mut R,
) -> Result<S::Ct> {
    budget.consume()?;
    let noise = laplace_noise(budget.scale(), rng);
    sum_with_noise(scheme, ds, eq, noise, rng)
}

/// As [`answer_query`] with a caller-chosen noise value.
pub fn answer_query_with_noise<S: AdditiveScheme, R: RngCore>(
    scheme: &S,
    ds: &HistogramDataset,
    eq: &EncryptedQuery<S::Ct>,
    budget: &mut PrivacyBudget,
    noise: i64,
    rng: &mut R,
) -> Result<S::Ct> {
    budget.consume()?;
    sum_with_noise(scheme, ds, eq, noise, rng)
}

fn sum_with_noise<S: AdditiveScheme, R: RngCore>(
    scheme: &S,
    ds: &HistogramDataset,
    eq: &EncryptedQuery<S::Ct>,
    noise: i64,
    rng: &mut R,
) -> Result<S::Ct> {
    if eq.len() != ds.domain_size() {
        return Err(Error::Protocol(format!(
            "query has {} entries, domain has {}",
            eq.len(),
            ds.domain_size()
        )));
    }
    let cts = eq.cts();
    let mut ans = scheme.identity();
    for i in ds.indicator().iter_ones() {
        ans = scheme.add(&ans, &cts[i]);
    }
    Ok(scheme.add(&ans, &scheme.encrypt(noise, rng)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TestOutcome {
    /// Decrypted answer, `None` on decode overflow.
    pub value: Option<i64>,
    pub pass: bool,
}

pub fn verify_answer<S: AdditiveScheme>(
    scheme: &S,
    ct: &S::Ct,
    spec: &TestSpec,
    keys: &ServerKeys<S::Secret>,
) -> TestOutcome {
    match keys.joint_decrypt(scheme, ct) {
        Ok(x) => TestOutcome {
            value: Some(x),
            pass: spec.passes(x),
        },
        Err(_) => TestOutcome {
            value: None,
            pass: false,
        },
    }
}

/// Real answers re-encrypted for the querier, or nothing.
#[derive(Debug, Clone, PartialEq)]
pub enum Release<C> {
    Released(Vec<C>),
    /// Some test failed; the answers are dropped and the participant is
    /// flagged for removal.
    Discarded {
        flagged: bool,
    },
}

impl<C> Release<C> {
    pub fn is_released(&self) -> bool {
        matches!(self, Release::Released(_))
    }
}

/// Re-encrypts every real answer to the querier's key in two staged passes
/// (S1 then S2) if every test passed. Answers are never decrypted.
pub fn release_answers<S: AdditiveScheme, R: RngCore>(
    scheme: &S,
    answers: &[S::Ct],
    querier: &S::Recipient,
    verdicts: &[bool],
    keys: &ServerKeys<S::Secret>,
    rng: &mut R,
) -> Release<S::Ct> {
    if !verdicts.iter().all(|p| *p) {
        return Release::Discarded { flagged: true };
    }
    let out = answers
        .iter()
        .map(|a| {
            let st = scheme.reencrypt_init(a);
            let st = scheme.reencrypt_stage(a, &st, &keys.s1, querier, rng);
            scheme.reencrypt_stage(a, &st, &keys.s2, querier, rng)
        })
        .collect();
    Release::Released(out)
}

/// `4-byte LE count ‖ ciphertexts`; a discarded release has count 0.
pub struct ReleaseMessage;

impl ReleaseMessage {
    pub fn encode<S: AdditiveScheme>(scheme: &S, release: &Release<S::Ct>) -> Vec<u8> {
        let cts: &[S::Ct] = match release {
            Release::Released(c) => c,
            Release::Discarded { .. } => &[],
        };
        let mut out = (cts.len() as u32).to_le_bytes().to_vec();
        scheme.write_many(cts, &mut out);
        out
    }

    pub fn decode<S: AdditiveScheme>(scheme: &S, bytes: &[u8]) -> Result<Vec<S::Ct>> {
        if bytes.len() < 4 {
            return Err(Error::Encoding(
                "release message shorter than its count".into(),
            ));
        }
        let count = u32::from_le_bytes(bytes[..4].try_into().unwrap()) as usize;
        if bytes.len() != 4 + count * S::CT_LEN {
            return Err(Error::Encoding("release message length mismatch".into()));
        }
        scheme.read_many(&bytes[4..])
    }
}

#[cfg(test)]
mod unit {
    use super::*;
    use crate::data::synth_dataset;
    use crate::group::{ElGamalScheme, Transparent};
    use crate::query::{encode_query, encrypt_query, NoiseRule, QueryVector, TestKind};
    use crate::seed::Seed;
    use crate::Point;
    use proptest::prelude::*;

    fn budget() -> PrivacyBudget {
        PrivacyBudget::new(0.5, 0.5, 10, 10, NoiseRule::PerBudget).unwrap()
    }

    #[test]
    fn noiseless_answers_and_release_roundtrip() {
        let mut rng = Seed(21).rng();
        let (s, keys) = ElGamalScheme::<Point>::setup(2000, &mut rng).unwrap();
        let ds = synth_dataset(20, 50, Seed(1)).unwrap();
        let q = encode_query(&(0..25).collect::<Vec<_>>(), 50).unwrap();
        let want = q.answer(&ds).unwrap() as i64;
        let mut b = budget();
        let eq = encrypt_query(&s, &q, &mut rng);
        let a0 = answer_query_with_noise(&s, &ds, &eq, &mut b, 0, &mut rng).unwrap();
        assert_eq!(keys.joint_decrypt(&s, &a0).unwrap(), want);
        let a1 = answer_query(&s, &ds, &eq, &mut b, &mut rng).unwrap();
        let noisy = keys.joint_decrypt(&s, &a1).unwrap();
        assert!((noisy - want).abs() < 600);

        let (usk, upk) = s.new_recipient(&mut rng);
        let rel = release_answers(&s, &[a0, a1], &upk, &[true, true], &keys, &mut rng);
        let Release::Released(cts) = &rel else {
            panic!("discarded")
        };
        assert_eq!(s.open(&usk, &cts[0]).unwrap(), want);
        assert_eq!(s.open(&usk, &cts[1]).unwrap(), noisy);
        assert!(keys.joint_decrypt(&s, &cts[0]).is_err());
        let wire = ReleaseMessage::encode(&s, &rel);
        assert_eq!(wire.len(), 4 + 2 * 66);
        assert_eq!(&ReleaseMessage::decode(&s, &wire).unwrap(), cts);

        let gone = release_answers(&s, &[a0], &upk, &[true, false], &keys, &mut rng);
        assert_eq!(gone, Release::Discarded { flagged: true });
        assert_eq!(ReleaseMessage::encode(&s, &gone).len(), 4);
    }

    #[test]
    fn verify_boundaries() {
        let mut rng = Seed(2).rng();
        let (s, keys) = ElGamalScheme::<Point>::setup(500, &mut rng).unwrap();
        let spec = TestSpec {
            kind: TestKind::N,
            center: 100,
            noise_max: 59.91,
        };
        let at = |x| verify_answer(&s, &s.encrypt(x, &mut Seed(x as u64).rng()), &spec, &keys);
        assert!(at(100).pass);
        assert!(!at(100 + 61).pass);
        assert!(at(159).pass);
        let over = verify_answer(&s, &s.encrypt(10_000, &mut rng), &spec, &keys);
        assert_eq!(
            over,
            TestOutcome {
                value: None,
                pass: false
            }
        );
    }

    #[test]
    fn mismatched_query_rejected() {
        let s = Transparent::new(10);
        let ds = synth_dataset(2, 5, Seed(0)).unwrap();
        let eq = encrypt_query(&s, &QueryVector::all(6), &mut Seed(0).rng());
        assert!(answer_query(&s, &ds, &eq, &mut budget(), &mut Seed(0).rng()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn homomorphic_answer_equals_dot(qbits in any::<u64>(), dbits in any::<u64>(), seed in any::<u64>()) {
            static S: std::sync::OnceLock<(ElGamalScheme<Point>, ServerKeys<p256::Scalar>)> = std::sync::OnceLock::new();
            let (s, keys) = S.get_or_init(|| ElGamalScheme::<Point>::setup(64, &mut Seed(1).rng()).unwrap());
            let ds = HistogramDataset::from_labels(64, (0..64).filter(|i| dbits >> i & 1 == 1)).unwrap();
            let q = encode_query(&(0..64).filter(|i| qbits >> i & 1 == 1).collect::<Vec<_>>(), 64).unwrap();
            let mut rng = Seed(seed).rng();
            let eq = encrypt_query(s, &q, &mut rng);
            let a = answer_query_with_noise(s, &ds, &eq, &mut budget(), 0, &mut rng).unwrap();
            prop_assert_eq!(keys.joint_decrypt(s, &a).unwrap(), (qbits & dbits).count_ones() as i64);
        }
    }
}
