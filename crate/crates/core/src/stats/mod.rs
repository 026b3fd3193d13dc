// SPDX-License-Identifier: Apache-2.0

//! Hypergeometric verification bounds and detection probabilities.
//!
//! All decisions that produce integers (thresholds, minimum sizes) are made
//! in exact big-integer arithmetic unless the Poisson model is requested
//! explicitly.

mod approx;
mod decision;
mod exact;

pub use approx::{detection_prob, ln_factorial, poisson_sf};
pub use decision::{
    adversary_plan, choose_r0, fake_accept_prob, hyper_tail, l_min, l_min_limit, n_min, v_min,
    v_opt, AdversaryPlan, TailModel, VerificationParams,
};
pub use exact::{binomial, hyper_pmf, hyper_tail_count, parse_prob, rational_to_f64, Threshold};
