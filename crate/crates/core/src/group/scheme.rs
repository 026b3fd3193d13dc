// SPDX-License-Identifier: Apache-2.0

use super::{
    collective_key, CipherGroup, Ciphertext, CollectiveKey, DecodeWindow, Encryptor, KeyPair,
    PartialDecryption, Reencryption,
};
use crate::error::{Error, Result};
use rand::RngCore;
use std::fmt::Debug;
use std::sync::Arc;

/// Operations the protocols need from an additively homomorphic scheme
/// with a two-server collective key.
pub trait AdditiveScheme: Send + Sync + Sized {
    type Ct: Clone + Send + Sync + Debug + PartialEq;
    /// One server's decryption share, or a recipient's secret.
    type Secret: Clone + Send + Sync;
    /// Public re-encryption target.
    type Recipient: Clone + Send + Sync;

    const NAME: &'static str;
    /// Wire bytes per ciphertext.
    const CT_LEN: usize;

    /// Generates both server key shares and the public context.
    fn setup<R: RngCore>(half_width: u64, rng: &mut R) -> Result<(Self, ServerKeys<Self::Secret>)>;

    fn half_width(&self) -> u64;

    fn encrypt<R: RngCore>(&self, x: i64, rng: &mut R) -> Self::Ct;

    /// Trivial encryption of zero.
    fn identity(&self) -> Self::Ct;

    fn add(&self, a: &Self::Ct, b: &Self::Ct) -> Self::Ct;

    fn rerandomize<R: RngCore>(&self, ct: &Self::Ct, rng: &mut R) -> Self::Ct {
        self.add(ct, &self.encrypt(0, rng))
    }

    /// Removes one share from a ciphertext (one decryption stage).
    fn strip(&self, share: &Self::Secret, ct: &Self::Ct) -> Self::Ct;

    /// Final decoding after every share has been stripped.
    fn decode(&self, stripped: &Self::Ct) -> Result<i64>;

    fn new_recipient<R: RngCore>(&self, rng: &mut R) -> (Self::Secret, Self::Recipient);

    fn reencrypt_init(&self, source: &Self::Ct) -> Self::Ct;

    fn reencrypt_stage<R: RngCore>(
        &self,
        source: &Self::Ct,
        state: &Self::Ct,
        share: &Self::Secret,
        to: &Self::Recipient,
        rng: &mut R,
    ) -> Self::Ct;

    /// Decryption by the holder of a recipient secret.
    fn open(&self, secret: &Self::Secret, ct: &Self::Ct) -> Result<i64> {
        self.decode(&self.strip(secret, ct))
    }

    fn write_ct(&self, ct: &Self::Ct, out: &mut Vec<u8>);

    fn write_many(&self, cts: &[Self::Ct], out: &mut Vec<u8>) {
        for c in cts {
            self.write_ct(c, out);
        }
    }

    fn read_ct(&self, bytes: &[u8]) -> Result<Self::Ct>;

    fn read_many(&self, bytes: &[u8]) -> Result<Vec<Self::Ct>> {
        if bytes.len() % Self::CT_LEN != 0 {
            return Err(Error::Encoding(format!(
                "ciphertext block of {} bytes is not a multiple of {}",
                bytes.len(),
                Self::CT_LEN
            )));
        }
        bytes
            .chunks(Self::CT_LEN)
            .map(|c| self.read_ct(c))
            .collect()
    }
}

/// Decryption shares of the two servers.
#[derive(Clone)]
pub struct ServerKeys<K> {
    pub s1: K,
    pub s2: K,
}

impl<K> ServerKeys<K> {
    /// Both stages in order, S1 then S2.
    pub fn joint_decrypt<S: AdditiveScheme<Secret = K>>(
        &self,
        scheme: &S,
        ct: &S::Ct,
    ) -> Result<i64> {
        let half = scheme.strip(&self.s1, ct);
        scheme.decode(&scheme.strip(&self.s2, &half))
    }
}

impl<K> Debug for ServerKeys<K> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("ServerKeys { .. }")
    }
}

/// EC-ElGamal over `G` under the servers' collective key.
#[derive(Clone)]
pub struct ElGamalScheme<G: CipherGroup> {
    collective: CollectiveKey<G>,
    enc: Encryptor<G>,
    window: Arc<DecodeWindow<G>>,
}

impl<G: CipherGroup> ElGamalScheme<G> {
    pub fn new(collective: CollectiveKey<G>, window: Arc<DecodeWindow<G>>) -> Self {
        ElGamalScheme {
            enc: Encryptor::new(collective.combined()),
            collective,
            window,
        }
    }

    pub fn from_keys(s1: &KeyPair<G>, s2: &KeyPair<G>, half_width: u64) -> Result<Self> {
        let ck = collective_key(&[s1.public(), s2.public()])?;
        Ok(Self::new(ck, Arc::new(DecodeWindow::new(half_width)?)))
    }

    pub fn collective(&self) -> &CollectiveKey<G> {
        &self.collective
    }

    pub fn encryptor(&self) -> &Encryptor<G> {
        &self.enc
    }

    pub fn window(&self) -> &DecodeWindow<G> {
        &self.window
    }
}

impl<G: CipherGroup> Debug for ElGamalScheme<G> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ElGamalScheme")
            .field("key", &self.collective.combined())
            .field("half_width", &self.window.half_width())
            .finish()
    }
}

impl<G: CipherGroup> AdditiveScheme for ElGamalScheme<G> {
    type Ct = Ciphertext<G>;
    type Secret = G::Scalar;
    type Recipient = Encryptor<G>;

    const NAME: &'static str = "elgamal";
    const CT_LEN: usize = 2 * G::ELEMENT_LEN;

    fn setup<R: RngCore>(half_width: u64, rng: &mut R) -> Result<(Self, ServerKeys<G::Scalar>)> {
        let s1 = KeyPair::<G>::generate(rng);
        let s2 = KeyPair::<G>::generate(rng);
        let scheme = Self::from_keys(&s1, &s2, half_width)?;
        Ok((
            scheme,
            ServerKeys {
                s1: *s1.secret(),
                s2: *s2.secret(),
            },
        ))
    }

    fn half_width(&self) -> u64 {
        self.window.half_width()
    }

    fn encrypt<R: RngCore>(&self, x: i64, rng: &mut R) -> Ciphertext<G> {
        self.enc.encrypt(x, rng)
    }

    fn identity(&self) -> Ciphertext<G> {
        Ciphertext::identity()
    }

    fn add(&self, a: &Ciphertext<G>, b: &Ciphertext<G>) -> Ciphertext<G> {
        *a + *b
    }

    fn strip(&self, share: &G::Scalar, ct: &Ciphertext<G>) -> Ciphertext<G> {
        PartialDecryption::new(ct).apply(share).ciphertext()
    }

    fn decode(&self, stripped: &Ciphertext<G>) -> Result<i64> {
        self.window.decode(&stripped.c2)
    }

    fn new_recipient<R: RngCore>(&self, rng: &mut R) -> (G::Scalar, Encryptor<G>) {
        let kp = KeyPair::<G>::generate(rng);
        (*kp.secret(), Encryptor::new(kp.public()))
    }

    fn reencrypt_init(&self, source: &Ciphertext<G>) -> Ciphertext<G> {
        Ciphertext {
            c1: G::identity(),
            c2: source.c2,
        }
    }

    fn reencrypt_stage<R: RngCore>(
        &self,
        source: &Ciphertext<G>,
        state: &Ciphertext<G>,
        share: &G::Scalar,
        to: &Encryptor<G>,
        rng: &mut R,
    ) -> Ciphertext<G> {
        Reencryption::resume(source, *state, 0)
            .apply(share, to, rng)
            .finish(1)
            .expect("one stage applied")
    }

    fn write_ct(&self, ct: &Ciphertext<G>, out: &mut Vec<u8>) {
        out.extend_from_slice(&ct.to_bytes());
    }

    fn write_many(&self, cts: &[Ciphertext<G>], out: &mut Vec<u8>) {
        Ciphertext::encode_many(cts, out);
    }

    fn read_ct(&self, bytes: &[u8]) -> Result<Ciphertext<G>> {
        Ciphertext::from_bytes(bytes)
    }
}

/// Ciphertext of [`Transparent`]: the plaintext itself.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TransparentCt(pub i64);

/// Plaintext stand-in with the same interface, wire width and window
/// semantics as [`ElGamalScheme`]. Used to drive large simulations where the
/// cryptography does not influence any count.
#[derive(Clone, Copy, Debug)]
pub struct Transparent {
    half_width: u64,
}

impl Transparent {
    pub fn new(half_width: u64) -> Self {
        Transparent { half_width }
    }
}

impl AdditiveScheme for Transparent {
    type Ct = TransparentCt;
    type Secret = ();
    type Recipient = ();

    const NAME: &'static str = "transparent";
    const CT_LEN: usize = 66;

    fn setup<R: RngCore>(half_width: u64, _rng: &mut R) -> Result<(Self, ServerKeys<()>)> {
        Ok((Transparent { half_width }, ServerKeys { s1: (), s2: () }))
    }

    fn half_width(&self) -> u64 {
        self.half_width
    }

    fn encrypt<R: RngCore>(&self, x: i64, _rng: &mut R) -> TransparentCt {
        TransparentCt(x)
    }

    fn identity(&self) -> TransparentCt {
        TransparentCt(0)
    }

    fn add(&self, a: &TransparentCt, b: &TransparentCt) -> TransparentCt {
        TransparentCt(a.0 + b.0)
    }

    fn rerandomize<R: RngCore>(&self, ct: &TransparentCt, _rng: &mut R) -> TransparentCt {
        *ct
    }

    fn strip(&self, _share: &(), ct: &TransparentCt) -> TransparentCt {
        *ct
    }

    fn decode(&self, ct: &TransparentCt) -> Result<i64> {
        if ct.0.unsigned_abs() > self.half_width {
            return Err(Error::DecodeOverflow {
                half_width: self.half_width,
            });
        }
        Ok(ct.0)
    }

    fn new_recipient<R: RngCore>(&self, _rng: &mut R) -> ((), ()) {
        ((), ())
    }

    fn reencrypt_init(&self, source: &TransparentCt) -> TransparentCt {
        *source
    }

    fn reencrypt_stage<R: RngCore>(
        &self,
        _source: &TransparentCt,
        state: &TransparentCt,
        _share: &(),
        _to: &(),
        _rng: &mut R,
    ) -> TransparentCt {
        *state
    }

    fn write_ct(&self, ct: &TransparentCt, out: &mut Vec<u8>) {
        out.extend_from_slice(&ct.0.to_le_bytes());
        out.extend_from_slice(&[0u8; 58]);
    }

    fn read_ct(&self, bytes: &[u8]) -> Result<TransparentCt> {
        if bytes.len() != Self::CT_LEN || bytes[8..].iter().any(|b| *b != 0) {
            return Err(Error::Encoding("malformed transparent ciphertext".into()));
        }
        Ok(TransparentCt(i64::from_le_bytes(
            bytes[..8].try_into().unwrap(),
        )))
    }
}
