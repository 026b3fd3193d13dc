// SPDX-License-Identifier: Apache-2.0

//! Encrypted count queries, hidden test queries and answer release.

mod answer;
mod budget;
mod hidden;
mod vector;

pub use answer::{
    answer_query, answer_query_with_noise, release_answers, verify_answer, Release, ReleaseMessage,
    TestOutcome,
};
pub use budget::{
    laplace, laplace_noise, noise_max, noise_max_for_scale, NoiseRule, PrivacyBudget, Tolerance,
};
pub use hidden::{
    make_test, rerandomize_query, schedule, test_mix, Slot, TestContext, TestKind, TestSpec,
};
pub use vector::{encode_query, encrypt_query, EncryptedQuery, Origin, QueryVector};
