// SPDX-License-Identifier: Apache-2.0

use num_traits::Float;

/// `ln n!` by direct summation.
pub fn ln_factorial<T: Float>(n: u64) -> T {
    let mut acc = T::zero();
    let mut comp = T::zero();
    for i in 2..=n {
        // Kahan summation keeps the error near one ulp for large n.
        let y = T::from(i).unwrap().ln() - comp;
        let t = acc + y;
        comp = (t - acc) - y;
        acc = t;
    }
    acc
}

fn ln_pmf<T: Float>(lambda: T, k: u64, ln_fact: T) -> T {
    T::from(k).unwrap() * lambda.ln() - lambda - ln_fact
}

/// `Pr(X ≥ r)` for `X ~ Poisson(λ)`.
pub fn poisson_sf<T: Float>(lambda: T, r: u64) -> T {
    if r == 0 {
        return T::one();
    }
    if lambda <= T::zero() {
        return T::zero();
    }
    let tiny = T::epsilon() * T::from(1e-3).unwrap();
    if T::from(r).unwrap() > lambda {
        // Upper terms decrease from k = r on.
        let mut p = ln_pmf(lambda, r, ln_factorial::<T>(r)).exp();
        let mut sum = T::zero();
        let mut k = r;
        while p > tiny * sum || sum == T::zero() {
            sum = sum + p;
            k += 1;
            p = p * lambda / T::from(k).unwrap();
            if p == T::zero() {
                break;
            }
        }
        sum
    } else {
        // Lower terms decrease from k = r - 1 down.
        let mut k = r - 1;
        let mut p = ln_pmf(lambda, k, ln_factorial::<T>(k)).exp();
        let mut cdf = T::zero();
        loop {
            cdf = cdf + p;
            if k == 0 || (p <= tiny * cdf && cdf > T::zero()) {
                break;
            }
            p = p * T::from(k).unwrap() / lambda;
            k -= 1;
        }
        (T::one() - cdf).max(T::zero())
    }
}

/// `1 - (1 - p_t p_c p_d)^m`.
pub fn detection_prob<T: Float>(m: u32, p_t: T, p_c: T, p_d: T) -> T {
    let q = p_t * p_c * p_d;
    T::one() - (T::one() - q).powi(m as i32)
}
