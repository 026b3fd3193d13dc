// SPDX-License-Identifier: Apache-2.0

//! Partial-view collection and verification.
//!
//! 1. The participant permutes its 0/1 flags with a fresh σ, sends the
//!    permuted flags to S1 and σ⁻¹ to S2.
//! 2. S1 encrypts a selector vector of Hamming weight V over the N set flags.
//! 3. S1 replaces each set flag with the next selector ciphertext and each
//!    clear flag with a fresh encryption of zero.
//! 4. S2 re-randomizes every entry and undoes the permutation.
//!
//! The servers then jointly decrypt the entries of their background labels
//! and accept if at least `r0` of them are set.

mod messages;
mod protocol;

pub use messages::{EncryptedUpload, InversePermutation, LbsUpload, PartialView};
pub use protocol::{
    participant_prepare, s1_sample, s2_finalize, verify_pv, PvVerdict, RejectCause, ServerOne,
    ServerTwo, VerifiedPartialView,
};
