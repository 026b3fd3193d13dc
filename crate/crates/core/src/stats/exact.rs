// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};
use crate::ExactProb;
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

/// Product `lo · (lo+1) · … · hi` by splitting, 1 when empty.
pub(crate) fn range_product(lo: u64, hi: u64) -> BigUint {
    if lo > hi {
        return BigUint::one();
    }
    if hi - lo < 16 {
        return (lo..=hi).fold(BigUint::one(), |acc, x| acc * x);
    }
    let mid = lo + (hi - lo) / 2;
    range_product(lo, mid) * range_product(mid + 1, hi)
}

/// Falling factorial `x (x-1) … (x-k+1)`.
pub(crate) fn falling(x: u64, k: u64) -> BigUint {
    if k == 0 {
        return BigUint::one();
    }
    if k > x {
        return BigUint::zero();
    }
    range_product(x - k + 1, x)
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    falling(n, k) / range_product(1, k)
}

/// `Σ_{k ≥ r0} C(s, k) C(pop - s, d - k)`, the numerator of the upper tail of
/// Hypergeometric(pop, s, d).
///
/// Terms follow `T(k+1) = T(k) (s-k)(d-k) / ((k+1)(pop-s-d+k+1))`, which
/// divides exactly.
pub fn hyper_tail_count(pop: u64, s: u64, d: u64, r0: u64) -> BigUint {
    debug_assert!(s <= pop && d <= pop);
    let hi = s.min(d);
    let lo = r0.max((s + d).saturating_sub(pop));
    if lo > hi {
        return BigUint::zero();
    }
    let mut term = binomial(s, lo) * binomial(pop - s, d - lo);
    let mut sum = BigUint::zero();
    let mut k = lo;
    loop {
        sum += &term;
        if k == hi || term.is_zero() {
            break;
        }
        term *= (s - k) * (d - k);
        let (q, r) = term.div_rem(&BigUint::from((k + 1) * (pop + k + 1 - s - d)));
        debug_assert!(r.is_zero());
        term = q;
        k += 1;
    }
    sum
}

fn check_hyper(pop: u64, s: u64, d: u64) -> Result<()> {
    if s > pop || d > pop {
        return Err(Error::InvalidParameter(format!(
            "hypergeometric parameters need V <= N and L <= N (N={pop}, V={s}, L={d})"
        )));
    }
    Ok(())
}

pub fn hyper_pmf(pop: u64, s: u64, d: u64, r: u64) -> Result<ExactProb> {
    check_hyper(pop, s, d)?;
    if r > s.min(d) || r + pop < s + d {
        return Ok(ExactProb::zero());
    }
    let num = binomial(s, r) * binomial(pop - s, d - r);
    Ok(ExactProb::new(
        BigInt::from(num),
        BigInt::from(binomial(pop, d)),
    ))
}

/// Parses `0.95`, `1e-6`, `19/20` into an exact rational in `[0, 1]`.
pub fn parse_prob(s: &str) -> Result<ExactProb> {
    let bad = || Error::InvalidParameter(format!("`{s}` is not a probability"));
    let t = s.trim();
    let v = if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        ExactProb::new(n, d)
    } else {
        let (mant, exp) = match t.find(['e', 'E']) {
            Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| bad())?),
            None => (t, 0),
        };
        let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
        if int.is_empty() && frac.is_empty() {
            return Err(bad());
        }
        if !int.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
        let scale = exp - frac.len() as i32;
        let ten = BigInt::from(10u32);
        if scale >= 0 {
            ExactProb::from_integer(digits * num_traits::pow(ten, scale as usize))
        } else {
            ExactProb::new(digits, num_traits::pow(ten, (-scale) as usize))
        }
    };
    if v < ExactProb::zero() || v > ExactProb::one() {
        return Err(bad());
    }
    Ok(v)
}

pub fn rational_to_f64(x: &ExactProb) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Probability threshold in both exact and floating form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Threshold {
    exact: ExactProb,
}

impl Threshold {
    pub fn new(exact: ExactProb) -> Result<Self> {
        if exact < ExactProb::zero() || exact > ExactProb::one() {
            return Err(Error::InvalidParameter(
                "threshold must lie in [0, 1]".into(),
            ));
        }
        Ok(Threshold { exact })
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::new(parse_prob(s)?)
    }

    /// `1 - η`.
    pub fn complement(&self) -> Self {
        Threshold {
            exact: ExactProb::one() - &self.exact,
        }
    }

    pub fn exact(&self) -> &ExactProb {
        &self.exact
    }

    pub fn as_f64(&self) -> f64 {
        rational_to_f64(&self.exact)
    }

    /// `count / total >= self`, exactly.
    pub fn met_by(&self, count: &BigUint, total: &BigUint) -> bool {
        let num = self.exact.numer().to_biguint().expect("non-negative");
        let den = self.exact.denom().to_biguint().expect("positive");
        count * den >= num * total
    }

    /// `count / total < self`, exactly.
    pub fn exceeds(&self, count: &BigUint, total: &BigUint) -> bool {
        !self.met_by(count, total)
    }
}

impl std::fmt::Display for Threshold {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.exact)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive_binomial(n: u64, k: u64) -> u128 {
        if k > n {
            return 0;
        }
        let mut r: u128 = 1;
        for i in 0..k {
            r = r * u128::from(n - i) / u128::from(i + 1);
        }
        r
    }

    #[test]
    fn small_binomials() {
        for n in 0..40u64 {
            for k in 0..=n + 1 {
                assert_eq!(
                    binomial(n, k),
                    BigUint::from(naive_binomial(n, k)),
                    "C({n},{k})"
                );
            }
        }
    }

    #[test]
    fn tail_ten_five_two() {
        let t = ExactProb::new(hyper_tail_count(10, 5, 2, 1).into(), binomial(10, 2).into());
        assert_eq!(t, ExactProb::new(7.into(), 9.into()));
    }

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(
            parse_prob("0.95").unwrap(),
            ExactProb::new(19.into(), 20.into())
        );
        assert_eq!(
            parse_prob("1e-6").unwrap(),
            ExactProb::new(1.into(), 1_000_000.into())
        );
        assert_eq!(
            parse_prob("3/4").unwrap(),
            ExactProb::new(3.into(), 4.into())
        );
        assert_eq!(
            parse_prob(".5").unwrap(),
            ExactProb::new(1.into(), 2.into())
        );
        assert_eq!(parse_prob("1").unwrap(), ExactProb::one());
        for bad in ["", "1.5", "-0.1", "abc", "1/0", "0.9x", "."] {
            assert!(parse_prob(bad).is_err(), "{bad}");
        }
    }

    proptest! {
        #[test]
        fn pmf_sums_to_one(pop in 1u64..60, s in 0u64..60, d in 0u64..60) {
            let s = s.min(pop);
            let d = d.min(pop);
            let total: ExactProb = (0..=d).map(|r| hyper_pmf(pop, s, d, r).unwrap()).sum();
            prop_assert_eq!(total, ExactProb::one());
        }

        #[test]
        fn tail_matches_direct_sum(pop in 1u64..80, s in 0u64..80, d in 0u64..80, r0 in 0u64..80) {
            let s = s.min(pop);
            let d = d.min(pop);
            let direct: BigUint = (r0..=d).map(|k| binomial(s, k) * binomial(pop - s, d - k)).sum();
            prop_assert_eq!(hyper_tail_count(pop, s, d, r0), direct);
        }

        #[test]
        fn zero_hit_symmetry(pop in 1u64..200, s in 0u64..200, d in 0u64..200) {
            let s = s.min(pop);
            let d = d.min(pop);
            // C(N-V, L) / C(N, L) == C(N-L, V) / C(N, V)
            let lhs = binomial(pop - s, d) * binomial(pop, s);
            let rhs = binomial(pop - d, s) * binomial(pop, d);
            prop_assert_eq!(lhs, rhs);
        }
    }
}
