// SPDX-License-Identifier: Apache-2.0

//! DataRing: verifiable privacy-preserving queries over label-histogram
//! datasets held by untrusted participants.
//!
//! Two non-colluding servers hold key shares of an additively homomorphic
//! cryptosystem. Participants publish encrypted 0/1 histograms over a public
//! label domain. The partial-view protocol lets a verifier learn a random
//! subset of another participant's labels; queries then mix real and test
//! vectors whose expected answers are known to the querier, so that an
//! answering participant who deviates from its committed dataset is caught
//! with quantifiable probability.

pub mod bits;
pub mod data;
pub mod error;
pub mod group;
pub mod pv;
pub mod query;
pub mod seed;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
pub use seed::Seed;

/// Group element of the default backend (prime256v1).
pub type Point = p256::ProjectivePoint;
/// Scalar of the default backend.
pub type Scalar = p256::Scalar;
/// ElGamal ciphertext over the default backend.
pub type Ct = group::Ciphertext<Point>;
/// ElGamal scheme over the default backend.
pub type EcScheme = group::ElGamalScheme<Point>;
/// Floating-point probability used by approximate models and simulation.
pub type Prob = f64;
/// Exact rational probability.
pub type ExactProb = num_rational::BigRational;
/// Label index into a domain (0-based).
pub type Label = u32;
