// SPDX-License-Identifier: Apache-2.0

//! Additive-homomorphic ElGamal over a prime-order group.
//!
//! Plaintexts are signed integers mapped to `x·B` (negative values as
//! `x mod q`). Decryption recovers `x` by baby-step/giant-step search over a
//! symmetric window `[-W, W]`. Keys held by several parties combine into a
//! collective key; decryption and re-encryption under that key run in
//! per-party stages so no secret ever leaves its holder.

mod dlog;
mod elgamal;
mod fixed_base;
mod p256_impl;
mod scheme;
mod threshold;

pub use dlog::DecodeWindow;
pub use elgamal::{decrypt, Ciphertext, Encryptor};
pub use fixed_base::FixedBase;
pub use scheme::{AdditiveScheme, ElGamalScheme, ServerKeys, Transparent, TransparentCt};
pub use threshold::{reencrypt, threshold_decrypt, PartialDecryption, Reencryption};

use crate::error::{Error, Result};
use crate::seed::Seed;
use p256::elliptic_curve::ff::Field;
use p256::elliptic_curve::group::{Group, GroupEncoding};
use rand::RngCore;

/// Abstract prime-order group used by the cryptosystem.
///
/// Implementors provide fixed-width compressed element encodings and a
/// big-endian scalar encoding.
pub trait CipherGroup: Group + GroupEncoding + Send + Sync + 'static {
    /// Bytes per compressed element.
    const ELEMENT_LEN: usize;
    /// Bytes per scalar.
    const SCALAR_LEN: usize;

    fn scalar_to_be_bytes(s: &Self::Scalar) -> Vec<u8>;
    fn scalar_from_be_bytes(bytes: &[u8]) -> Option<Self::Scalar>;

    /// Group order `q`, big-endian.
    fn order_be_bytes() -> Vec<u8>;

    /// Shared fixed-base table for the generator.
    fn generator_table() -> &'static FixedBase<Self>;

    /// Encodes many elements at once; implementations may batch the
    /// projective-to-affine conversion.
    fn encode_batch(points: &[Self]) -> Vec<Self::Repr> {
        points.iter().map(|p| p.to_bytes()).collect()
    }

    fn decode(bytes: &[u8]) -> Option<Self> {
        if bytes.len() != Self::ELEMENT_LEN {
            return None;
        }
        let mut repr = Self::Repr::default();
        repr.as_mut().copy_from_slice(bytes);
        Option::from(Self::from_bytes(&repr))
    }
}

/// Maps a signed integer into the scalar field (`x mod q`).
pub fn scalar_from_i64<G: CipherGroup>(x: i64) -> G::Scalar {
    let mag = G::Scalar::from(x.unsigned_abs());
    if x < 0 {
        -mag
    } else {
        mag
    }
}

/// Uniform scalar in `[1, q-1]`.
pub fn random_nonzero_scalar<G: CipherGroup, R: RngCore>(rng: &mut R) -> G::Scalar {
    loop {
        let s = G::Scalar::random(&mut *rng);
        if !bool::from(s.is_zero()) {
            return s;
        }
    }
}

/// Public parameters of the group: generator, order and encoding width.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupParams {
    pub order_be: Vec<u8>,
    pub element_len: usize,
    pub scalar_len: usize,
}

impl GroupParams {
    pub fn of<G: CipherGroup>() -> Self {
        GroupParams {
            order_be: G::order_be_bytes(),
            element_len: G::ELEMENT_LEN,
            scalar_len: G::SCALAR_LEN,
        }
    }

    pub fn ciphertext_len(&self) -> usize {
        2 * self.element_len
    }
}

/// Secret scalar `k` and public element `K = k·B`.
#[derive(Clone, PartialEq, Eq)]
pub struct KeyPair<G: CipherGroup> {
    secret: G::Scalar,
    public: G,
}

impl<G: CipherGroup> KeyPair<G> {
    pub fn generate<R: RngCore>(rng: &mut R) -> Self {
        Self::from_secret(random_nonzero_scalar::<G, _>(rng))
    }

    pub fn from_secret(secret: G::Scalar) -> Self {
        let public = G::generator_table().mul(&secret);
        KeyPair { secret, public }
    }

    pub fn secret(&self) -> &G::Scalar {
        &self.secret
    }

    pub fn public(&self) -> G {
        self.public
    }

    /// `scalar ‖ point`, `SCALAR_LEN + ELEMENT_LEN` bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = G::scalar_to_be_bytes(&self.secret);
        out.extend_from_slice(self.public.to_bytes().as_ref());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() != G::SCALAR_LEN + G::ELEMENT_LEN {
            return Err(Error::Encoding(format!(
                "key file must be {} bytes, got {}",
                G::SCALAR_LEN + G::ELEMENT_LEN,
                bytes.len()
            )));
        }
        let secret = G::scalar_from_be_bytes(&bytes[..G::SCALAR_LEN])
            .ok_or_else(|| Error::Encoding("non-canonical scalar".into()))?;
        let public = G::decode(&bytes[G::SCALAR_LEN..])
            .ok_or_else(|| Error::Encoding("invalid group element".into()))?;
        let kp = Self::from_secret(secret);
        if kp.public != public {
            return Err(Error::Encoding("public key does not match secret".into()));
        }
        Ok(kp)
    }
}

impl<G: CipherGroup> std::fmt::Debug for KeyPair<G> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KeyPair")
            .field("public", &self.public)
            .finish_non_exhaustive()
    }
}

/// Deterministic key generation from a seed.
pub fn keygen<G: CipherGroup>(seed: Seed) -> KeyPair<G> {
    KeyPair::generate(&mut seed.stream("keygen", 0))
}

/// Sum of the constituent public keys.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollectiveKey<G> {
    parts: Vec<G>,
    combined: G,
}

impl<G: CipherGroup> CollectiveKey<G> {
    pub fn parts(&self) -> &[G] {
        &self.parts
    }

    pub fn combined(&self) -> G {
        self.combined
    }
}

pub fn collective_key<G: CipherGroup>(pubs: &[G]) -> Result<CollectiveKey<G>> {
    if pubs.len() < 2 {
        return Err(Error::Config(format!(
            "a collective key needs at least 2 public keys, got {}",
            pubs.len()
        )));
    }
    Ok(CollectiveKey {
        parts: pubs.to_vec(),
        combined: pubs.iter().copied().sum(),
    })
}
