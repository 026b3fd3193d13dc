// SPDX-License-Identifier: Apache-2.0

use super::approx::poisson_sf;
use super::exact::{binomial, falling, hyper_tail_count, Threshold};
use crate::error::{Error, Result};
use crate::ExactProb;
use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive};

/// How hypergeometric tails are evaluated in the decision rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TailModel {
    /// Exact big-integer sums.
    #[default]
    Exact,
    /// `Pr(X ≥ r)` with `X ~ Poisson(d · s / pop)`, in `f64`.
    Poisson,
}

impl TailModel {
    pub fn as_str(&self) -> &'static str {
        match self {
            TailModel::Exact => "exact",
            TailModel::Poisson => "poisson",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(TailModel::Exact),
            "poisson" => Ok(TailModel::Poisson),
            _ => Err(Error::Config(format!(
                "unknown tail model `{s}` (exact|poisson)"
            ))),
        }
    }
}

/// Upper-tail test `Pr(hits ≥ r0) ≥ θ` for a fixed population and draw
/// count, with the success count as the free variable.
struct TailTest<'a> {
    model: TailModel,
    pop: u64,
    draws: u64,
    total: BigUint,
    theta: &'a Threshold,
}

impl<'a> TailTest<'a> {
    fn new(model: TailModel, pop: u64, draws: u64, theta: &'a Threshold) -> Self {
        let total = match model {
            TailModel::Exact => binomial(pop, draws),
            TailModel::Poisson => BigUint::one(),
        };
        TailTest {
            model,
            pop,
            draws,
            total,
            theta,
        }
    }

    fn meets(&self, succ: u64, r0: u64) -> bool {
        match self.model {
            TailModel::Exact => self.theta.met_by(
                &hyper_tail_count(self.pop, succ, self.draws, r0),
                &self.total,
            ),
            TailModel::Poisson => {
                let lambda = self.draws as f64 * succ as f64 / self.pop as f64;
                poisson_sf(lambda, r0) >= self.theta.as_f64()
            }
        }
    }

    /// Smallest `s` in `[lo, hi]` meeting the test, given that `hi` does.
    fn least_succ(&self, lo: u64, hi: u64, r0: u64) -> u64 {
        let (mut lo, mut hi) = (lo, hi);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if self.meets(mid, r0) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        lo
    }
}

fn check(n: u64, v: u64, l: u64) -> Result<()> {
    if n == 0 || v > n || l > n {
        return Err(Error::InvalidParameter(format!(
            "need V <= N, L <= N, N >= 1 (N={n}, V={v}, L={l})"
        )));
    }
    Ok(())
}

/// `Pr(R ≥ r0)` for `R ~ Hypergeometric(N, V, L)`, exactly.
pub fn hyper_tail(n: u64, v: u64, l: u64, r0: u64) -> Result<ExactProb> {
    check(n, v, l)?;
    if r0 > l {
        return Err(Error::InvalidParameter(format!("r0={r0} exceeds L={l}")));
    }
    Ok(ExactProb::new(
        BigInt::from(hyper_tail_count(n, v, l, r0)),
        BigInt::from(binomial(n, l)),
    ))
}

/// Acceptance probability of a submitted dataset that keeps `keep` of the
/// `N` true records: the view holds `j ~ Hypergeometric(N, keep, V)` true
/// records and then `Pr(R_j ≥ r0)`.
pub fn fake_accept_prob(n: u64, keep: u64, v: u64, l: u64, r0: u64) -> Result<ExactProb> {
    check(n, v, l)?;
    if keep > n || r0 > l {
        return Err(Error::InvalidParameter(format!(
            "need keep <= N and r0 <= L (keep={keep}, r0={r0})"
        )));
    }
    let mut num = BigUint::from(0u32);
    for j in v.saturating_sub(n - keep)..=keep.min(v) {
        num += binomial(keep, j) * binomial(n - keep, v - j) * hyper_tail_count(n, j, l, r0);
    }
    Ok(ExactProb::new(
        BigInt::from(num),
        BigInt::from(binomial(n, v) * binomial(n, l)),
    ))
}

/// Largest `r` in `[1, L]` with `Pr(R ≥ r) ≥ 1 - η`.
pub fn choose_r0(model: TailModel, n: u64, v: u64, l: u64, eta: &Threshold) -> Result<u64> {
    check(n, v, l)?;
    let keep = eta.complement();
    let t = TailTest::new(model, n, l, &keep);
    if l == 0 || !t.meets(v, 1) {
        return Err(Error::BelowLMin { n, v, l });
    }
    let (mut lo, mut hi) = (1u64, l);
    while lo < hi {
        let mid = lo + (hi - lo + 1) / 2;
        if t.meets(v, mid) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    Ok(lo)
}

/// `Pr(R = 0) = C(N-V, L) / C(N, L)` as numerator and denominator.
fn zero_hit_ratio(n: u64, v: u64, l: u64) -> (BigUint, BigUint) {
    (falling(n - v, l), falling(n, l))
}

fn ln_zero_hit(n: u64, v: u64, l: u64) -> f64 {
    if l > n - v {
        return f64::NEG_INFINITY;
    }
    (0..l).map(|i| (-(v as f64) / (n - i) as f64).ln_1p()).sum()
}

/// Smallest `L` with `Pr(R = 0) < η` when `V` of `N` records are sampled.
///
/// A floating-point bisection locates the answer; exact products then
/// confirm or move it.
pub fn l_min(n: u64, v: u64, eta: &Threshold) -> Result<u64> {
    check(n, v, 0)?;
    if v == 0 {
        return Err(Error::InvalidParameter(
            "V = 0 never reveals a record".into(),
        ));
    }
    let below = |l: u64| {
        let (a, b) = zero_hit_ratio(n, v, l);
        eta.exceeds(&a, &b)
    };
    let ln_eta = eta.as_f64().ln();
    let (mut lo, mut hi) = (1u64, n - v + 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if ln_zero_hit(n, v, mid) < ln_eta {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let mut l = lo;
    while !below(l) {
        l += 1;
    }
    while l > 1 && below(l - 1) {
        l -= 1;
    }
    Ok(l)
}

/// Smallest `L` with `(1 - ρ)^L < η`, the large-`N` limit of [`l_min`].
pub fn l_min_limit(rho: &ExactProb, eta: &Threshold) -> Result<u64> {
    if *rho <= ExactProb::from_integer(0.into()) || *rho > ExactProb::one() {
        return Err(Error::InvalidParameter("ρ must lie in (0, 1]".into()));
    }
    let keep = ExactProb::one() - rho;
    let num = keep.numer().to_biguint().unwrap();
    let den = keep.denom().to_biguint().unwrap();
    let below = |l: u64| eta.exceeds(&num.pow(l as u32), &den.pow(l as u32));
    let est = (eta.as_f64().ln() / keep.to_f64().unwrap_or(0.0).ln()).floor();
    let mut l = if est.is_finite() && est >= 1.0 {
        est as u64
    } else {
        1
    };
    while !below(l) {
        l += 1;
    }
    while l > 1 && below(l - 1) {
        l -= 1;
    }
    Ok(l)
}

/// Smallest `v` in `[0, V]` with `Pr(R_v ≥ r0) ≥ θ`, where `R_v` counts
/// background records among `L` draws when only `v` records qualify.
pub fn v_min(model: TailModel, n: u64, v: u64, l: u64, theta: &Threshold, r0: u64) -> Result<u64> {
    check(n, v, l)?;
    if r0 == 0 || r0 > l {
        return Err(Error::InvalidParameter(format!("r0={r0} outside [1, {l}]")));
    }
    let t = TailTest::new(model, n, l, theta);
    if !t.meets(v, r0) {
        return Err(Error::TargetUnattainable(format!(
            "θ={theta} at r0={r0} even with v=V={v}"
        )));
    }
    Ok(t.least_succ(0, v, r0))
}

/// Maximum of [`v_min`] over `r0 = 1, 2, …`, stopping at the first
/// unattainable `r0` (tails only shrink as `r0` grows). Returns the maximum
/// and the per-`r0` table.
pub fn v_opt(
    model: TailModel,
    n: u64,
    v: u64,
    l: u64,
    theta: &Threshold,
) -> Result<(u64, Vec<(u64, u64)>)> {
    check(n, v, l)?;
    let t = TailTest::new(model, n, l, theta);
    let mut table = Vec::new();
    for r0 in 1..=l {
        if !t.meets(v, r0) {
            break;
        }
        table.push((r0, t.least_succ(0, v, r0)));
    }
    let best =
        table.iter().map(|e| e.1).max().ok_or_else(|| {
            Error::TargetUnattainable(format!("θ={theta} unattainable for every r0"))
        })?;
    Ok((best, table))
}

/// Smallest `n` in `[0, N]` such that a PV of `V` records drawn from a
/// dataset keeping `n` true records holds at least `v_opt` of them with
/// probability `θ`.
pub fn n_min(model: TailModel, n: u64, v: u64, v_opt: u64, theta: &Threshold) -> Result<u64> {
    check(n, v, 0)?;
    if v_opt > v {
        return Err(Error::InvalidParameter(format!(
            "v_opt={v_opt} exceeds V={v}"
        )));
    }
    if v_opt == 0 {
        return Ok(0);
    }
    let t = TailTest::new(model, n, v, theta);
    Ok(t.least_succ(0, n, v_opt))
}

/// Cheapest fake dataset that still passes verification with probability θ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdversaryPlan {
    pub model: TailModel,
    pub theta: Threshold,
    /// Threshold the servers use, from [`choose_r0`].
    pub r0: u64,
    /// `(r0, v_min)` for every attainable `r0`.
    pub v_min_table: Vec<(u64, u64)>,
    pub v_opt: u64,
    pub n_min: u64,
    /// True when θ cannot be met at the servers' `r0` with any `v ≤ V`,
    /// so only the full dataset will do.
    pub saturated: bool,
}

/// Builds the adversary's plan against servers that pick `r0` from `η`.
pub fn adversary_plan(
    model: TailModel,
    n: u64,
    v: u64,
    l: u64,
    eta: &Threshold,
    theta: &Threshold,
) -> Result<AdversaryPlan> {
    let r0 = choose_r0(model, n, v, l, eta)?;
    let reachable = TailTest::new(model, n, l, theta).meets(v, r0);
    let (v_opt, table) = match v_opt(model, n, v, l, theta) {
        Ok(x) => x,
        Err(Error::TargetUnattainable(_)) => (v, Vec::new()),
        Err(e) => return Err(e),
    };
    let (n_min, saturated) = if reachable {
        (n_min(model, n, v, v_opt, theta)?, false)
    } else {
        (n, true)
    };
    Ok(AdversaryPlan {
        model,
        theta: theta.clone(),
        r0,
        v_min_table: table,
        v_opt,
        n_min,
        saturated,
    })
}

/// Inputs and derived thresholds of partial-view verification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationParams {
    pub n: u64,
    pub v: u64,
    pub l: u64,
    pub eta: Threshold,
    pub r0: u64,
    pub l_min: u64,
}

impl VerificationParams {
    pub fn new(n: u64, v: u64, l: u64, eta: Threshold) -> Result<Self> {
        let r0 = choose_r0(TailModel::Exact, n, v, l, &eta)?;
        let l_min = l_min(n, v, &eta)?;
        Ok(VerificationParams {
            n,
            v,
            l,
            eta,
            r0,
            l_min,
        })
    }

    pub fn rho(&self) -> f64 {
        self.v as f64 / self.n as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::exact::parse_prob;
    use proptest::prelude::*;

    #[test]
    fn fake_accept_endpoints() {
        assert_eq!(
            fake_accept_prob(200, 200, 40, 20, 2).unwrap(),
            hyper_tail(200, 40, 20, 2).unwrap()
        );
        assert_eq!(
            fake_accept_prob(200, 0, 40, 20, 1).unwrap(),
            ExactProb::from_integer(0.into())
        );
        let mid = fake_accept_prob(200, 100, 40, 20, 2).unwrap();
        assert!(
            mid > ExactProb::from_integer(0.into()) && mid < hyper_tail(200, 40, 20, 2).unwrap()
        );
    }

    fn th(s: &str) -> Threshold {
        Threshold::parse(s).unwrap()
    }

    fn scan_r0(n: u64, v: u64, l: u64, eta: &str) -> Option<u64> {
        let keep = ExactProb::one() - parse_prob(eta).unwrap();
        (1..=l)
            .filter(|&r| hyper_tail(n, v, l, r).unwrap() >= keep)
            .max()
    }

    #[test]
    fn r0_examples() {
        let eta = th("0.05");
        assert_eq!(choose_r0(TailModel::Exact, 100, 50, 8, &eta).unwrap(), 2);
        assert_eq!(scan_r0(100, 50, 8, "0.05"), Some(2));
        let keep = ExactProb::new(19.into(), 20.into());
        assert!(hyper_tail(100, 50, 8, 2).unwrap() >= keep);
        assert!(hyper_tail(100, 50, 8, 3).unwrap() < keep);
        assert_eq!(
            choose_r0(TailModel::Exact, 100, 50, 4, &eta),
            Err(Error::BelowLMin {
                n: 100,
                v: 50,
                l: 4
            })
        );
    }

    #[test]
    fn tail_edges() {
        assert_eq!(hyper_tail(30, 7, 5, 0).unwrap(), ExactProb::one());
        assert_eq!(hyper_tail(30, 30, 5, 5).unwrap(), ExactProb::one());
        assert_eq!(
            hyper_tail(10, 5, 2, 1).unwrap(),
            ExactProb::new(7.into(), 9.into())
        );
        assert!(hyper_tail(10, 11, 2, 1).is_err());
    }

    #[test]
    fn l_min_small() {
        let eta = th("0.05");
        assert_eq!(l_min(100, 10, &eta).unwrap(), 25);
        let p = |l| hyper_tail(100, 10, l, 0).unwrap() - hyper_tail(100, 10, l, 1).unwrap();
        assert!(p(24) >= parse_prob("0.05").unwrap());
        assert!(p(25) < parse_prob("0.05").unwrap());
        assert_eq!(l_min(100, 100, &eta).unwrap(), 1);
        assert_eq!(l_min_limit(&ExactProb::one(), &eta).unwrap(), 1);
        assert_eq!(
            l_min_limit(&parse_prob("0.01").unwrap(), &eta).unwrap(),
            299
        );
    }

    #[test]
    fn v_min_and_v_opt_small() {
        let theta = th("0.9");
        let vm = v_min(TailModel::Exact, 100, 50, 8, &theta, 2).unwrap();
        let scan =
            (0..=50).find(|&v| hyper_tail(100, v, 8, 2).unwrap() >= parse_prob("0.9").unwrap());
        assert_eq!(Some(vm), scan);
        let (best, table) = v_opt(TailModel::Exact, 100, 50, 1, &theta).unwrap_or((0, vec![]));
        if !table.is_empty() {
            assert_eq!(best, table[0].1);
        }
        assert!(v_min(TailModel::Exact, 100, 50, 8, &th("0.999"), 8).is_err());
        assert_eq!(n_min(TailModel::Exact, 100, 50, 0, &theta).unwrap(), 0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn tail_monotone(n in 2u64..60, v in 0u64..60, l in 1u64..60, r in 0u64..59) {
            let v = v.min(n);
            let l = l.min(n);
            let r = r.min(l - 1);
            prop_assert!(hyper_tail(n, v, l, r).unwrap() >= hyper_tail(n, v, l, r + 1).unwrap());
            if v < n {
                prop_assert!(hyper_tail(n, v + 1, l, r).unwrap() >= hyper_tail(n, v, l, r).unwrap());
            }
        }

        #[test]
        fn choose_r0_is_maximal(n in 10u64..120, v in 1u64..120, l in 1u64..60, eta in 1u32..30) {
            let v = v.min(n);
            let l = l.min(n);
            let eta_s = format!("0.{eta:02}");
            let got = choose_r0(TailModel::Exact, n, v, l, &th(&eta_s)).ok();
            prop_assert_eq!(got, scan_r0(n, v, l, &eta_s));
        }

        #[test]
        fn bisection_matches_linear_scans(n in 10u64..90, v in 1u64..90, l in 1u64..30, t in 1u32..99) {
            let v = v.min(n);
            let l = l.min(n);
            let theta_s = format!("0.{t:02}");
            let theta = th(&theta_s);
            let want = parse_prob(&theta_s).unwrap();
            let scan_v = (0..=v).find(|&x| hyper_tail(n, x, l, 1).unwrap() >= want);
            prop_assert_eq!(v_min(TailModel::Exact, n, v, l, &theta, 1).ok(), scan_v);
            if let Some(vo) = scan_v {
                let scan_n = (0..=n).find(|&x| hyper_tail(n, x, v, vo).unwrap() >= want);
                prop_assert_eq!(n_min(TailModel::Exact, n, v, vo, &theta).ok(), scan_n);
            }
            let scan_l = (1..=n).find(|&x| hyper_tail(n, v, x, 0).unwrap() - hyper_tail(n, v, x, 1).unwrap() < want);
            prop_assert_eq!(l_min(n, v, &theta).ok(), scan_l);
        }

        #[test]
        fn v_opt_dominates_first_row(n in 20u64..80, v in 5u64..80, l in 1u64..20) {
            let v = v.min(n);
            let theta = th("0.5");
            if let Ok((best, table)) = v_opt(TailModel::Exact, n, v, l, &theta) {
                prop_assert!(best >= table[0].1);
                prop_assert_eq!(table[0].0, 1);
            }
        }
    }
}
