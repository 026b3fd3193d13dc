// SPDX-License-Identifier: Apache-2.0

//! prime256v1 (NIST P-256) backing for [`CipherGroup`].

use super::{CipherGroup, FixedBase};
use p256::elliptic_curve::ff::PrimeField;
use p256::elliptic_curve::group::{Curve, Group, GroupEncoding};
use p256::{AffinePoint, FieldBytes, ProjectivePoint, Scalar};
use std::sync::OnceLock;

// n = FFFFFFFF00000000FFFFFFFFFFFFFFFFBCE6FAADA7179E84F3B9CAC2FC632551
const P256_ORDER: [u8; 32] = [
    0xff, 0xff, 0xff, 0xff, 0x00, 0x00, 0x00, 0x00, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff,
    0xbc, 0xe6, 0xfa, 0xad, 0xa7, 0x17, 0x9e, 0x84, 0xf3, 0xb9, 0xca, 0xc2, 0xfc, 0x63, 0x25, 0x51,
];

impl CipherGroup for ProjectivePoint {
    const ELEMENT_LEN: usize = 33;
    const SCALAR_LEN: usize = 32;

    fn scalar_to_be_bytes(s: &Scalar) -> Vec<u8> {
        s.to_repr().to_vec()
    }

    fn scalar_from_be_bytes(bytes: &[u8]) -> Option<Scalar> {
        if bytes.len() != 32 {
            return None;
        }
        let mut repr = FieldBytes::default();
        repr.copy_from_slice(bytes);
        Option::from(Scalar::from_repr(repr))
    }

    fn order_be_bytes() -> Vec<u8> {
        P256_ORDER.to_vec()
    }

    fn generator_table() -> &'static FixedBase<Self> {
        static TABLE: OnceLock<FixedBase<ProjectivePoint>> = OnceLock::new();
        TABLE.get_or_init(|| FixedBase::new(ProjectivePoint::generator()))
    }

    fn encode_batch(points: &[Self]) -> Vec<Self::Repr> {
        let mut affine = vec![AffinePoint::IDENTITY; points.len()];
        ProjectivePoint::batch_normalize(points, &mut affine);
        affine.iter().map(|a| a.to_bytes()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;

    #[test]
    fn order_annihilates_generator() {
        let q = BigUint::from_bytes_be(&P256_ORDER);
        let q_minus_1 = ProjectivePoint::scalar_from_be_bytes(&(q - 1u32).to_bytes_be()).unwrap();
        let g = ProjectivePoint::generator();
        assert_eq!(g * q_minus_1 + g, ProjectivePoint::identity());
    }

    #[test]
    fn batch_encoding_matches_single() {
        let g = ProjectivePoint::generator();
        let pts = vec![
            g,
            g.double(),
            ProjectivePoint::identity(),
            g * Scalar::from(77u64),
        ];
        let batch = ProjectivePoint::encode_batch(&pts);
        for (p, b) in pts.iter().zip(&batch) {
            assert_eq!(p.to_bytes(), *b);
            assert_eq!(b.len(), 33);
        }
        assert_eq!(
            ProjectivePoint::decode(&batch[2]),
            Some(ProjectivePoint::identity())
        );
    }
}
