// SPDX-License-Identifier: Apache-2.0

//! In-process multi-party runtime, cheating participants and experiment
//! drivers.
//!
//! Seed splitting: an experiment row with tag `t` uses
//! `master.derive(t, 0)`; trial `i` of that row uses
//! `row.derive("trial", i)`, and each role inside a session draws from its
//! own `stream(role, 0)`. Trials therefore do not depend on the worker
//! count or on which other rows are in the grid.

pub mod experiments;
pub mod fast;
pub mod output;
pub mod pv_session;
pub mod query_session;
pub mod session;
pub mod strategy;
pub mod transport;

pub use experiments::{
    experiment_detection, experiment_eq6, experiment_lmin, experiment_nmin_table,
    experiment_pv_threshold, pv_trials, DetectionConfig, Eq6Config, Eq6Row, LminConfig, NminConfig,
    PvThresholdConfig, PvTrial, SessionGrid, SessionPath,
};
pub use fast::{fast_trial, CountWorld, TestCounts};
pub use output::{fmt_float, Manifest, Table};
pub use pv_session::{partial_fake, run_pv_session, PvSessionReport};
pub use query_session::{
    prepare_target, random_queries, run_query_session, target_from_dataset, QuerySessionReport,
    Target, WorldParams,
};
pub use session::{QueryParams, ScheduleMode, Step, DEFAULT_SESSION_FP};
pub use strategy::{
    fake_dataset, CheatKind, CheatPlan, CheatStrategy, DetectionOutcome, TrialRecord,
};
pub use transport::{ByteCounts, Message, MsgKind, Party, Transport};

use crate::error::{Error, Result};

/// Cryptographic backend for full-protocol runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    /// EC-ElGamal over prime256v1.
    Ec,
    /// Plaintext mirror with identical wire sizes.
    Transparent,
}

impl Backend {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ec" | "elgamal" | "p256" => Ok(Backend::Ec),
            "transparent" | "plain" => Ok(Backend::Transparent),
            _ => Err(Error::Config(format!(
                "unknown backend {s:?} (ec|transparent)"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Backend::Ec => "ec",
            Backend::Transparent => "transparent",
        }
    }
}

/// `f(0..count)` on up to `workers` threads, results in index order.
pub fn par_map<T: Send, F: Fn(u64) -> T + Sync>(count: u64, workers: usize, f: F) -> Vec<T> {
    let workers = workers.clamp(1, count.max(1) as usize);
    if workers == 1 {
        return (0..count).map(f).collect();
    }
    let f = &f;
    let mut parts: Vec<Vec<(u64, T)>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                s.spawn(move || {
                    (w as u64..count)
                        .step_by(workers)
                        .map(|i| (i, f(i)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    let mut out: Vec<Option<T>> = (0..count).map(|_| None).collect();
    for part in parts.drain(..) {
        for (i, x) in part {
            out[i as usize] = Some(x);
        }
    }
    out.into_iter()
        .map(|x| x.expect("every index computed"))
        .collect()
}
