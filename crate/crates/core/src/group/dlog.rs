// SPDX-License-Identifier: Apache-2.0

use super::{scalar_from_i64, CipherGroup};
use crate::error::{Error, Result};
use std::collections::HashMap;

const GIANT_BATCH: usize = 64;

/// Baby-step/giant-step decoder for plaintexts in `[-W, W]`.
///
/// The input `X = x·B` is shifted to `Y = X + W·B` so the search runs over
/// `[0, 2W]` with step `m = ceil(sqrt(2W + 1))`.
pub struct DecodeWindow<G: CipherGroup> {
    half_width: u64,
    step: u64,
    giants: u64,
    baby: HashMap<Vec<u8>, u64>,
    shift: G,
    giant: G,
}

impl<G: CipherGroup> DecodeWindow<G> {
    pub fn new(half_width: u64) -> Result<Self> {
        let span = half_width
            .checked_mul(2)
            .and_then(|s| s.checked_add(1))
            .filter(|s| *s <= 1 << 62)
            .ok_or_else(|| {
                Error::InvalidParameter(format!("decode half-width {half_width} too large"))
            })?;
        let step = ceil_sqrt(span);
        let giants = span.div_ceil(step);
        let b = G::generator();

        let mut pts = Vec::with_capacity(step as usize);
        let mut acc = G::identity();
        for _ in 0..step {
            pts.push(acc);
            acc += b;
        }
        let baby = G::encode_batch(&pts)
            .into_iter()
            .enumerate()
            .map(|(j, r)| (r.as_ref().to_vec(), j as u64))
            .collect();

        let table = G::generator_table();
        Ok(DecodeWindow {
            half_width,
            step,
            giants,
            baby,
            shift: table.mul(&scalar_from_i64::<G>(half_width as i64)),
            giant: -table.mul(&scalar_from_i64::<G>(step as i64)),
        })
    }

    pub fn half_width(&self) -> u64 {
        self.half_width
    }

    /// Recovers `x` from `x·B`, or fails with [`Error::DecodeOverflow`].
    pub fn decode(&self, point: &G) -> Result<i64> {
        let span = 2 * self.half_width;
        let mut cur = *point + self.shift;
        let mut i = 0u64;
        let mut batch = Vec::with_capacity(GIANT_BATCH);
        while i < self.giants {
            batch.clear();
            let n = GIANT_BATCH.min((self.giants - i) as usize);
            for _ in 0..n {
                batch.push(cur);
                cur += self.giant;
            }
            for (off, repr) in G::encode_batch(&batch).iter().enumerate() {
                if let Some(&j) = self.baby.get(repr.as_ref()) {
                    let y = (i + off as u64) * self.step + j;
                    if y <= span {
                        return Ok(y as i64 - self.half_width as i64);
                    }
                    return Err(Error::DecodeOverflow {
                        half_width: self.half_width,
                    });
                }
            }
            i += n as u64;
        }
        Err(Error::DecodeOverflow {
            half_width: self.half_width,
        })
    }
}

impl<G: CipherGroup> std::fmt::Debug for DecodeWindow<G> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DecodeWindow")
            .field("half_width", &self.half_width)
            .field("step", &self.step)
            .finish_non_exhaustive()
    }
}

fn ceil_sqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while r * r < n {
        r += 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Point;
    use p256::elliptic_curve::group::Group;
    use proptest::prelude::*;

    fn enc(x: i64) -> Point {
        Point::generator() * scalar_from_i64::<Point>(x)
    }

    #[test]
    fn ceil_sqrt_exact() {
        for n in 1..2000u64 {
            let r = ceil_sqrt(n);
            assert!(r * r >= n && (r - 1) * (r - 1) < n, "{n}");
        }
    }

    #[test]
    fn decodes_whole_small_window_and_rejects_edges() {
        let w = DecodeWindow::<Point>::new(40).unwrap();
        for x in -40..=40 {
            assert_eq!(w.decode(&enc(x)).unwrap(), x);
        }
        for x in [41, -41, 100, -100, 1_000_000] {
            assert_eq!(
                w.decode(&enc(x)),
                Err(Error::DecodeOverflow { half_width: 40 })
            );
        }
    }

    #[test]
    fn zero_width_window() {
        let w = DecodeWindow::<Point>::new(0).unwrap();
        assert_eq!(w.decode(&Point::identity()).unwrap(), 0);
        assert!(w.decode(&enc(1)).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn decode_inverts_encoding(x in -5000i64..=5000) {
            static W: std::sync::OnceLock<DecodeWindow<Point>> = std::sync::OnceLock::new();
            let w = W.get_or_init(|| DecodeWindow::new(5000).unwrap());
            prop_assert_eq!(w.decode(&enc(x)).unwrap(), x);
        }
    }
}
