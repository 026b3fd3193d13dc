// SPDX-License-Identifier: Apache-2.0

use super::CipherGroup;

/// Precomputed multiples of a fixed base for 8-bit windowed multiplication.
///
/// `rows[w][d] = d · 256^w · P`, so `k·P` is one addition per scalar byte.
pub struct FixedBase<G> {
    base: G,
    rows: Vec<[G; 256]>,
}

impl<G: CipherGroup> FixedBase<G> {
    pub fn new(base: G) -> Self {
        let mut rows = Vec::with_capacity(G::SCALAR_LEN);
        let mut step = base;
        for _ in 0..G::SCALAR_LEN {
            let mut row = [G::identity(); 256];
            for d in 1..256 {
                row[d] = row[d - 1] + step;
            }
            step = row[255] + step;
            rows.push(row);
        }
        FixedBase { base, rows }
    }

    pub fn base(&self) -> G {
        self.base
    }

    pub fn mul(&self, k: &G::Scalar) -> G {
        let bytes = G::scalar_to_be_bytes(k);
        let mut acc = G::identity();
        for (w, byte) in bytes.iter().rev().enumerate() {
            if *byte != 0 {
                acc += self.rows[w][*byte as usize];
            }
        }
        acc
    }
}

impl<G: CipherGroup> std::fmt::Debug for FixedBase<G> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FixedBase")
            .field("base", &self.base)
            .finish_non_exhaustive()
    }
}
