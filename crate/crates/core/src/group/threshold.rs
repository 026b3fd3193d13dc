// SPDX-License-Identifier: Apache-2.0

use super::{random_nonzero_scalar, CipherGroup, Ciphertext, DecodeWindow, Encryptor};
use crate::error::{Error, Result};
use rand::RngCore;

/// Decryption under a collective key, one party stage at a time.
///
/// Each stage strips one secret share from `C2`. Only after every share has
/// been applied does `C2` equal `x·B`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PartialDecryption<G> {
    c1: G,
    c2: G,
    applied: usize,
}

impl<G: CipherGroup> PartialDecryption<G> {
    pub fn new(ct: &Ciphertext<G>) -> Self {
        PartialDecryption {
            c1: ct.c1,
            c2: ct.c2,
            applied: 0,
        }
    }

    pub fn apply(mut self, share: &G::Scalar) -> Self {
        self.c2 -= self.c1 * *share;
        self.applied += 1;
        self
    }

    pub fn applied(&self) -> usize {
        self.applied
    }

    /// Current intermediate value as a ciphertext, for forwarding.
    pub fn ciphertext(&self) -> Ciphertext<G> {
        Ciphertext {
            c1: self.c1,
            c2: self.c2,
        }
    }

    pub fn from_forwarded(ct: &Ciphertext<G>, applied: usize) -> Self {
        PartialDecryption {
            c1: ct.c1,
            c2: ct.c2,
            applied,
        }
    }

    pub fn finish(self, expected: usize, window: &DecodeWindow<G>) -> Result<i64> {
        if self.applied < expected {
            return Err(Error::MissingShare {
                expected,
                applied: self.applied,
            });
        }
        window.decode(&self.c2)
    }
}

pub fn threshold_decrypt<G: CipherGroup>(
    shares: &[G::Scalar],
    ct: &Ciphertext<G>,
    window: &DecodeWindow<G>,
) -> Result<i64> {
    let st = shares
        .iter()
        .fold(PartialDecryption::new(ct), |st, k| st.apply(k));
    st.finish(shares.len().max(1), window)
}

/// Re-encryption from the collective key to a recipient key `U`.
///
/// Starting from `(O, C2)`, party `i` draws `v_i` and maps
/// `(D1, D2) -> (D1 + v_i·B, D2 - k_i·C1 + v_i·U)`. After all parties the
/// result is `(vB, xB + vU)` with `v = Σ v_i`.
#[derive(Clone, Debug)]
pub struct Reencryption<G> {
    source_c1: G,
    state: Ciphertext<G>,
    applied: usize,
}

impl<G: CipherGroup> Reencryption<G> {
    pub fn new(ct: &Ciphertext<G>) -> Self {
        Reencryption {
            source_c1: ct.c1,
            state: Ciphertext {
                c1: G::identity(),
                c2: ct.c2,
            },
            applied: 0,
        }
    }

    /// Continues from a forwarded intermediate state.
    pub fn resume(source: &Ciphertext<G>, state: Ciphertext<G>, applied: usize) -> Self {
        Reencryption {
            source_c1: source.c1,
            state,
            applied,
        }
    }

    pub fn apply<R: RngCore>(
        mut self,
        share: &G::Scalar,
        target: &Encryptor<G>,
        rng: &mut R,
    ) -> Self {
        let v = random_nonzero_scalar::<G, _>(rng);
        self.state.c1 += G::generator_table().mul(&v);
        self.state.c2 += target.mask(&v) - self.source_c1 * *share;
        self.applied += 1;
        self
    }

    pub fn applied(&self) -> usize {
        self.applied
    }

    pub fn finish(self, expected: usize) -> Result<Ciphertext<G>> {
        if self.applied < expected {
            return Err(Error::MissingShare {
                expected,
                applied: self.applied,
            });
        }
        Ok(self.state)
    }
}

pub fn reencrypt<G: CipherGroup, R: RngCore>(
    shares: &[G::Scalar],
    target: &Encryptor<G>,
    ct: &Ciphertext<G>,
    rng: &mut R,
) -> Result<Ciphertext<G>> {
    let mut st = Reencryption::new(ct);
    for k in shares {
        st = st.apply(k, target, rng);
    }
    st.finish(shares.len().max(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{collective_key, decrypt, keygen, KeyPair};
    use crate::seed::Seed;
    use crate::Point;
    use proptest::prelude::*;
    use std::sync::OnceLock;

    struct Fx {
        k1: KeyPair<Point>,
        k2: KeyPair<Point>,
        user: KeyPair<Point>,
        ks: Encryptor<Point>,
        ku: Encryptor<Point>,
        win: DecodeWindow<Point>,
    }

    fn fx() -> &'static Fx {
        static F: OnceLock<Fx> = OnceLock::new();
        F.get_or_init(|| {
            let k1 = keygen::<Point>(Seed(1));
            let k2 = keygen::<Point>(Seed(2));
            let user = keygen::<Point>(Seed(3));
            let ck = collective_key(&[k1.public(), k2.public()]).unwrap();
            Fx {
                ks: Encryptor::new(ck.combined()),
                ku: Encryptor::new(user.public()),
                k1,
                k2,
                user,
                win: DecodeWindow::new(3000).unwrap(),
            }
        })
    }

    #[test]
    fn missing_stage_is_reported() {
        let f = fx();
        let ct = f.ks.encrypt(7, &mut Seed(0).rng());
        let st = PartialDecryption::new(&ct).apply(f.k1.secret());
        assert_eq!(
            st.finish(2, &f.win),
            Err(Error::MissingShare {
                expected: 2,
                applied: 1
            })
        );
        let r = Reencryption::new(&ct).apply(f.k2.secret(), &f.ku, &mut Seed(1).rng());
        assert!(matches!(r.finish(2), Err(Error::MissingShare { .. })));
    }

    #[test]
    fn one_share_alone_does_not_decode() {
        let f = fx();
        let ct = f.ks.encrypt(7, &mut Seed(0).rng());
        assert!(matches!(
            threshold_decrypt(&[*f.k1.secret()], &ct, &f.win),
            Err(Error::DecodeOverflow { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn stages_commute(x in -2500i64..2500, s in any::<u64>()) {
            let f = fx();
            let ct = f.ks.encrypt(x, &mut Seed(s).rng());
            let a = threshold_decrypt(&[*f.k1.secret(), *f.k2.secret()], &ct, &f.win).unwrap();
            let b = threshold_decrypt(&[*f.k2.secret(), *f.k1.secret()], &ct, &f.win).unwrap();
            prop_assert_eq!(a, x);
            prop_assert_eq!(b, x);
        }

        #[test]
        fn reencryption_targets_recipient(x in -2500i64..2500, s in any::<u64>()) {
            let f = fx();
            let mut rng = Seed(s).rng();
            let ct = f.ks.encrypt(x, &mut rng);
            let re = reencrypt(&[*f.k1.secret(), *f.k2.secret()], &f.ku, &ct, &mut rng).unwrap();
            prop_assert_eq!(decrypt(f.user.secret(), &re, &f.win).unwrap(), x);
        }
    }
}
