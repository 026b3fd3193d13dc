// SPDX-License-Identifier: Apache-2.0

use super::{random_nonzero_scalar, scalar_from_i64, CipherGroup, DecodeWindow, FixedBase};
use crate::error::{Error, Result};
use crate::seed::Seed;
use rand::RngCore;
use std::ops::Add;
use std::sync::Arc;

/// ElGamal ciphertext `(C1, C2) = (rB, xB + rK)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ciphertext<G> {
    pub c1: G,
    pub c2: G,
}

impl<G: CipherGroup> Ciphertext<G> {
    pub const fn len() -> usize {
        2 * G::ELEMENT_LEN
    }

    /// Trivial encryption of zero, the additive identity.
    pub fn identity() -> Self {
        Ciphertext {
            c1: G::identity(),
            c2: G::identity(),
        }
    }

    pub fn scalar_mul(&self, k: &G::Scalar) -> Self {
        Ciphertext {
            c1: self.c1 * *k,
            c2: self.c2 * *k,
        }
    }

    pub fn mul_i64(&self, k: i64) -> Self {
        self.scalar_mul(&scalar_from_i64::<G>(k))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(Self::len());
        out.extend_from_slice(self.c1.to_bytes().as_ref());
        out.extend_from_slice(self.c2.to_bytes().as_ref());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() != Self::len() {
            return Err(Error::Encoding(format!(
                "ciphertext must be {} bytes, got {}",
                Self::len(),
                bytes.len()
            )));
        }
        let (a, b) = bytes.split_at(G::ELEMENT_LEN);
        let c1 = G::decode(a).ok_or_else(|| Error::Encoding("invalid C1".into()))?;
        let c2 = G::decode(b).ok_or_else(|| Error::Encoding("invalid C2".into()))?;
        Ok(Ciphertext { c1, c2 })
    }

    /// Concatenated encodings with one batched normalization.
    pub fn encode_many(cts: &[Self], out: &mut Vec<u8>) {
        let pts: Vec<G> = cts.iter().flat_map(|c| [c.c1, c.c2]).collect();
        for r in G::encode_batch(&pts) {
            out.extend_from_slice(r.as_ref());
        }
    }
}

impl<G: CipherGroup> Add for Ciphertext<G> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Ciphertext {
            c1: self.c1 + o.c1,
            c2: self.c2 + o.c2,
        }
    }
}

impl<G: CipherGroup> std::iter::Sum for Ciphertext<G> {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::identity(), |a, b| a + b)
    }
}

/// Encrypts under a fixed public key using precomputed tables.
#[derive(Clone)]
pub struct Encryptor<G: CipherGroup> {
    key: Arc<FixedBase<G>>,
}

impl<G: CipherGroup> Encryptor<G> {
    pub fn new(key: G) -> Self {
        Encryptor {
            key: Arc::new(FixedBase::new(key)),
        }
    }

    pub fn key(&self) -> G {
        self.key.base()
    }

    pub fn encrypt_with_nonce(&self, x: i64, r: &G::Scalar) -> Ciphertext<G> {
        let b = G::generator_table();
        Ciphertext {
            c1: b.mul(r),
            c2: b.mul(&scalar_from_i64::<G>(x)) + self.key.mul(r),
        }
    }

    pub fn encrypt<R: RngCore>(&self, x: i64, rng: &mut R) -> Ciphertext<G> {
        let r = random_nonzero_scalar::<G, _>(rng);
        self.encrypt_with_nonce(x, &r)
    }

    pub fn encrypt_seeded(&self, x: i64, seed: Seed) -> Ciphertext<G> {
        self.encrypt(x, &mut seed.rng())
    }

    /// `r·K` alone, the mask term of a fresh encryption.
    pub fn mask(&self, r: &G::Scalar) -> G {
        self.key.mul(r)
    }

    /// Adds a fresh encryption of zero.
    pub fn rerandomize<R: RngCore>(&self, ct: &Ciphertext<G>, rng: &mut R) -> Ciphertext<G> {
        *ct + self.encrypt(0, rng)
    }
}

impl<G: CipherGroup> std::fmt::Debug for Encryptor<G> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Encryptor")
            .field("key", &self.key())
            .finish()
    }
}

/// Single-key decryption: `C2 - k·C1`, then window decode.
pub fn decrypt<G: CipherGroup>(
    secret: &G::Scalar,
    ct: &Ciphertext<G>,
    window: &DecodeWindow<G>,
) -> Result<i64> {
    window.decode(&(ct.c2 - ct.c1 * *secret))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{keygen, KeyPair};
    use crate::Point;
    use proptest::prelude::*;
    use std::sync::OnceLock;

    fn fixture() -> &'static (KeyPair<Point>, Encryptor<Point>, DecodeWindow<Point>) {
        static F: OnceLock<(KeyPair<Point>, Encryptor<Point>, DecodeWindow<Point>)> =
            OnceLock::new();
        F.get_or_init(|| {
            let kp = keygen::<Point>(Seed(5));
            let enc = Encryptor::new(kp.public());
            (kp, enc, DecodeWindow::new(10_000).unwrap())
        })
    }

    #[test]
    fn wire_length_and_roundtrip() {
        let (_, enc, _) = fixture();
        let ct = enc.encrypt(-17, &mut Seed(1).rng());
        let bytes = ct.to_bytes();
        assert_eq!(bytes.len(), 66);
        assert_eq!(Ciphertext::<Point>::from_bytes(&bytes).unwrap(), ct);
        let mut batch = Vec::new();
        Ciphertext::encode_many(&[ct, Ciphertext::identity()], &mut batch);
        assert_eq!(&batch[..66], &bytes[..]);
        assert_eq!(batch.len(), 132);
        assert!(Ciphertext::<Point>::from_bytes(&bytes[1..]).is_err());
    }

    #[test]
    fn nonce_determines_ciphertext() {
        let (_, enc, _) = fixture();
        let a = enc.encrypt_seeded(4, Seed(9));
        assert_eq!(a, enc.encrypt_seeded(4, Seed(9)));
        assert_ne!(a, enc.encrypt_seeded(4, Seed(10)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn homomorphic_addition(a in -4000i64..4000, b in -4000i64..4000, s in any::<u64>()) {
            let (kp, enc, win) = fixture();
            let mut rng = Seed(s).rng();
            let sum = enc.encrypt(a, &mut rng) + enc.encrypt(b, &mut rng);
            prop_assert_eq!(decrypt(kp.secret(), &sum, win).unwrap(), a + b);
        }

        #[test]
        fn scalar_multiplication(a in -300i64..300, k in -30i64..30, s in any::<u64>()) {
            let (kp, enc, win) = fixture();
            let ct = enc.encrypt(a, &mut Seed(s).rng()).mul_i64(k);
            prop_assert_eq!(decrypt(kp.secret(), &ct, win).unwrap(), a * k);
        }

        #[test]
        fn rerandomize_preserves_plaintext(a in -9000i64..9000, s in any::<u64>()) {
            let (kp, enc, win) = fixture();
            let mut rng = Seed(s).rng();
            let ct = enc.encrypt(a, &mut rng);
            let ct2 = enc.rerandomize(&ct, &mut rng);
            prop_assert_ne!(ct.to_bytes(), ct2.to_bytes());
            prop_assert_eq!(decrypt(kp.secret(), &ct2, win).unwrap(), a);
        }
    }
}
