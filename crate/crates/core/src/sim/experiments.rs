// SPDX-License-Identifier: Apache-2.0

use super::fast::{fast_trial, CountWorld};
use super::output::{fmt_float, Table};
use super::pv_session::run_pv_session;
use super::query_session::{prepare_target, random_queries, run_query_session, WorldParams};
use super::session::QueryParams;
use super::strategy::{
    kind_index, CheatKind, CheatPlan, CheatStrategy, DetectionOutcome, TrialRecord,
};
use super::{par_map, Backend};
use crate::data::{sample_background, synth_dataset};
use crate::error::{Error, Result};
use crate::group::{AdditiveScheme, ElGamalScheme, ServerKeys, Transparent};
use crate::query::test_mix;
use crate::seed::Seed;
use crate::stats::{
    adversary_plan, detection_prob, fake_accept_prob, l_min, l_min_limit, rational_to_f64,
    TailModel, Threshold,
};
use crate::{ExactProb, Point};
use num_bigint::BigInt;
use num_traits::ToPrimitive;

fn opt_float(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

fn setup<S: AdditiveScheme>(half_width: u64, seed: Seed) -> Result<(S, ServerKeys<S::Secret>)> {
    S::setup(half_width, &mut seed.stream("keys", 0))
}

// ---------------------------------------------------------------- pv-threshold

#[derive(Debug, Clone)]
pub struct PvThresholdConfig {
    pub world: WorldParams,
    /// Servers' threshold; derived from `η` when `None`.
    pub r0: Option<u64>,
    /// True records kept in the submitted dataset, one row each.
    pub keeps: Vec<usize>,
    pub trials: u64,
    pub backend: Backend,
    pub seed: Seed,
    pub workers: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PvTrial {
    pub accept: bool,
    pub matched: u64,
}

impl PvThresholdConfig {
    pub fn r0(&self) -> Result<u64> {
        self.r0.map_or_else(|| self.world.r0(), Ok)
    }
}

/// Independent partial-view sessions (fresh dataset, background and keys
/// per trial) for one value of `keep`.
pub fn pv_trials(cfg: &PvThresholdConfig, keep: usize) -> Result<Vec<PvTrial>> {
    match cfg.backend {
        Backend::Ec => pv_trials_with::<ElGamalScheme<Point>>(cfg, keep),
        Backend::Transparent => pv_trials_with::<Transparent>(cfg, keep),
    }
}

fn pv_trials_with<S: AdditiveScheme>(cfg: &PvThresholdConfig, keep: usize) -> Result<Vec<PvTrial>> {
    let w = &cfg.world;
    let r0 = cfg.r0()?;
    let (scheme, keys) = setup::<S>(16, cfg.seed)?;
    let row = cfg.seed.derive(&format!("pv-threshold/{keep}"), 0);
    par_map(cfg.trials, cfg.workers, |t| {
        let ts = row.derive("trial", t);
        let ds = synth_dataset(w.n, w.domain_size, ts.derive("ds", 0))?;
        let bk = sample_background(&ds, w.l, ts.derive("bk", 0))?;
        let rep = run_pv_session(
            &scheme,
            &keys,
            &ds,
            keep,
            w.v,
            &bk,
            r0,
            ts.derive("session", 0),
        )?;
        Ok(PvTrial {
            accept: rep.verdict.accept,
            matched: rep.verdict.matched,
        })
    })
    .into_iter()
    .collect()
}

pub fn experiment_pv_threshold(cfg: &PvThresholdConfig) -> Result<Table> {
    let w = &cfg.world;
    let r0 = cfg.r0()?;
    let mut t = Table::new(vec![
        "n",
        "domain_size",
        "v",
        "l",
        "r0",
        "keep",
        "trials",
        "accepted",
        "accept_rate",
        "model_accept",
        "mean_matched",
        "backend",
    ]);
    for &keep in &cfg.keeps {
        let trials = pv_trials(cfg, keep)?;
        let accepted = trials.iter().filter(|x| x.accept).count();
        let matched: u64 = trials.iter().map(|x| x.matched).sum();
        let model = fake_accept_prob(w.n as u64, keep as u64, w.v as u64, w.l as u64, r0)?;
        let n = trials.len().max(1) as f64;
        t.push(vec![
            w.n.to_string(),
            w.domain_size.to_string(),
            w.v.to_string(),
            w.l.to_string(),
            r0.to_string(),
            keep.to_string(),
            trials.len().to_string(),
            accepted.to_string(),
            fmt_float(accepted as f64 / n),
            fmt_float(rational_to_f64(&model)),
            fmt_float(matched as f64 / n),
            cfg.backend.as_str().into(),
        ]);
    }
    Ok(t)
}

// ---------------------------------------------------------------- lmin

#[derive(Debug, Clone)]
pub struct LminConfig {
    pub ns: Vec<u64>,
    pub rho: ExactProb,
    pub eta: Threshold,
}

pub fn experiment_lmin(cfg: &LminConfig) -> Result<Table> {
    let mut t = Table::new(vec!["n", "v", "rho", "eta", "l_min", "l_min_limit"]);
    let limit = l_min_limit(&cfg.rho, &cfg.eta)?;
    for &n in &cfg.ns {
        let v = &cfg.rho * ExactProb::from_integer(BigInt::from(n));
        if !v.is_integer() {
            return Err(Error::InvalidParameter(format!(
                "ρ·N = {v} is not an integer for N={n}"
            )));
        }
        let v = v.to_integer().to_u64().expect("V fits u64");
        t.push(vec![
            n.to_string(),
            v.to_string(),
            fmt_float(rational_to_f64(&cfg.rho)),
            fmt_float(cfg.eta.as_f64()),
            l_min(n, v, &cfg.eta)?.to_string(),
            limit.to_string(),
        ]);
    }
    Ok(t)
}

// ---------------------------------------------------------------- nmin-table

#[derive(Debug, Clone)]
pub struct NminConfig {
    pub n: u64,
    pub v: u64,
    pub l: u64,
    pub eta: Threshold,
    pub thetas: Vec<Threshold>,
}

/// One row per θ with the exact and Poisson-tail evaluations side by side.
pub fn experiment_nmin_table(cfg: &NminConfig) -> Result<Table> {
    let mut t = Table::new(vec![
        "theta",
        "r0_exact",
        "v_opt_exact",
        "n_min_exact",
        "saturated_exact",
        "r0_poisson",
        "v_opt_poisson",
        "n_min_poisson",
        "saturated_poisson",
    ]);
    for theta in &cfg.thetas {
        let mut row = vec![fmt_float(theta.as_f64())];
        for model in [TailModel::Exact, TailModel::Poisson] {
            let p = adversary_plan(model, cfg.n, cfg.v, cfg.l, &cfg.eta, theta)?;
            row.extend([
                p.r0.to_string(),
                p.v_opt.to_string(),
                p.n_min.to_string(),
                p.saturated.to_string(),
            ]);
        }
        t.push(row);
    }
    Ok(t)
}

// ---------------------------------------------------------------- detection

/// Which session model runs the trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SessionPath {
    /// Count-level model (see [`super::fast`]).
    Fast,
    /// Every message and homomorphic operation.
    Full(Backend),
}

impl SessionPath {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fast" => Ok(SessionPath::Fast),
            other => Ok(SessionPath::Full(Backend::parse(other)?)),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            SessionPath::Fast => "fast",
            SessionPath::Full(b) => b.as_str(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SessionGrid {
    pub world: WorldParams,
    pub params: QueryParams,
    pub trials: u64,
    pub path: SessionPath,
    pub seed: Seed,
    pub workers: usize,
}

impl SessionGrid {
    pub fn count_world(&self) -> CountWorld {
        let w = &self.world;
        CountWorld {
            n: w.n as u64,
            domain_size: w.domain_size as u64,
            v: w.v as u64,
            l: w.l as u64,
        }
    }

    /// Trial records for one strategy. Seeds depend on `tag` only, so a row
    /// does not change when the grid around it does.
    pub fn records(&self, strategy: &CheatStrategy, tag: &str) -> Result<Vec<TrialRecord>> {
        let row = self.seed.derive(tag, 0);
        match self.path {
            SessionPath::Fast => {
                let world = self.count_world();
                world.check(strategy.kind)?;
                par_map(self.trials, self.workers, |t| {
                    fast_trial(&world, strategy, &self.params, row.derive("trial", t))
                })
                .into_iter()
                .collect()
            }
            SessionPath::Full(Backend::Ec) => {
                self.full_records::<ElGamalScheme<Point>>(strategy, row)
            }
            SessionPath::Full(Backend::Transparent) => {
                self.full_records::<Transparent>(strategy, row)
            }
        }
    }

    fn full_records<S: AdditiveScheme>(
        &self,
        strategy: &CheatStrategy,
        row: Seed,
    ) -> Result<Vec<TrialRecord>> {
        let w = &self.world;
        // Answers reach at most |D*| + noise; the window is sized generously.
        let half_width = (2 * strategy.kind.domain_needed(w.n) + 1024) as u64;
        let (scheme, keys) = setup::<S>(half_width, self.seed)?;
        par_map(self.trials, self.workers, |t| {
            let ts = row.derive("trial", t);
            let target = prepare_target(&scheme, &keys, w, strategy.kind, ts.derive("target", 0))?;
            let qs = random_queries(
                w.domain_size,
                self.params.m_q as usize,
                ts.derive("queries", 0),
            )?;
            Ok(run_query_session(&scheme, &keys, &target, &qs, strategy, &self.params, ts)?.record)
        })
        .into_iter()
        .collect()
    }

    pub fn outcome(&self, strategy: &CheatStrategy, tag: &str) -> Result<DetectionOutcome> {
        Ok(DetectionOutcome::from_records(
            &self.records(strategy, tag)?,
        ))
    }
}

#[derive(Debug, Clone)]
pub struct DetectionConfig {
    pub grid: SessionGrid,
    pub strategies: Vec<CheatKind>,
    /// Numbers of answers forced onto `D*`.
    pub xs: Vec<usize>,
}

pub fn detection_tag(kind: CheatKind, x: usize) -> String {
    format!("detection/{kind}/{x}")
}

/// Accuracy per strategy and number of incorrect answers, after an honest
/// baseline row (`x = 0`) that reports false positives.
pub fn experiment_detection(cfg: &DetectionConfig) -> Result<Table> {
    let g = &cfg.grid;
    let m = g.params.m();
    let mut t = Table::new(vec![
        "strategy",
        "rate",
        "x",
        "trials",
        "true_pos",
        "false_neg",
        "true_neg",
        "false_pos",
        "accuracy",
        "fp_rate",
        "p_d_hat",
        "eq6",
        "path",
        "tolerance",
    ]);
    let mut rows = vec![(CheatKind::Honest, 0usize)];
    for k in &cfg.strategies {
        for &x in &cfg.xs {
            if x == 0 || x > m {
                return Err(Error::InvalidParameter(format!("x={x} outside [1, {m}]")));
            }
            rows.push((*k, x));
        }
    }
    for (kind, x) in rows {
        let s = CheatStrategy {
            kind,
            plan: CheatPlan::Forced { x },
        };
        let o = g.outcome(&s, &detection_tag(kind, x))?;
        let p_d = o.p_d_hat();
        let eq6 = p_d.map(|p| detection_prob(m as u32, g.params.p_t(), x as f64 / m as f64, p));
        t.push(vec![
            kind.name().into(),
            fmt_float(kind.rate()),
            x.to_string(),
            o.trials.to_string(),
            o.true_pos.to_string(),
            o.false_neg.to_string(),
            o.true_neg.to_string(),
            o.false_pos.to_string(),
            opt_float(o.accuracy()),
            opt_float(o.fp_rate()),
            opt_float(p_d),
            opt_float(eq6),
            g.path.as_str().into(),
            g.params.tolerance.name().into(),
        ]);
    }
    Ok(t)
}

// ---------------------------------------------------------------- eq6-check

#[derive(Debug, Clone)]
pub struct Eq6Config {
    pub grid: SessionGrid,
    pub strategies: Vec<CheatKind>,
    pub p_cs: Vec<f64>,
}

/// Simulated detection frequency against the closed-form model `eq6`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eq6Row {
    pub kind: CheatKind,
    pub p_c: f64,
    pub outcome: DetectionOutcome,
    pub p_d_hat: f64,
    /// `1 − (1 − p_t·p_c·p̂_d)^m`.
    pub eq6: f64,
    /// `1 − Π_k (1 − p_c·p̂_{d,k})^{n_k}`: exactly `n_k` tests of each kind
    /// per session, as the shuffled schedule places them.
    pub fixed_mix: f64,
    pub sigma: f64,
    pub z: f64,
}

pub fn eq6_row(g: &SessionGrid, kind: CheatKind, p_c: f64) -> Result<Eq6Row> {
    let s = CheatStrategy {
        kind,
        plan: CheatPlan::Independent { p_c },
    };
    let outcome = g.outcome(&s, &format!("eq6/{kind}/{p_c}"))?;
    let p_d_hat = outcome.p_d_hat().unwrap_or(0.0);
    let m = g.params.m() as u32;
    let eq6 = detection_prob(m, g.params.p_t(), p_c, p_d_hat);
    let mut miss = 1.0;
    for kind in test_mix(g.params.m_t as usize) {
        let k = kind_index(kind);
        let c = outcome.cheated_by_kind[k];
        let p_dk = if c == 0 {
            0.0
        } else {
            outcome.failed_by_kind[k] as f64 / c as f64
        };
        miss *= 1.0 - p_c * p_dk;
    }
    let fixed_mix = 1.0 - miss;
    let sigma = (eq6 * (1.0 - eq6) / outcome.trials as f64).sqrt();
    let freq = outcome.detection_freq();
    let z = if sigma > 0.0 {
        (freq - eq6) / sigma
    } else {
        0.0
    };
    Ok(Eq6Row {
        kind,
        p_c,
        outcome,
        p_d_hat,
        eq6,
        fixed_mix,
        sigma,
        z,
    })
}

pub fn experiment_eq6(cfg: &Eq6Config) -> Result<Table> {
    let g = &cfg.grid;
    let mut t = Table::new(vec![
        "strategy",
        "rate",
        "p_c",
        "schedule",
        "trials",
        "detected",
        "freq",
        "p_t",
        "p_d_hat",
        "eq6",
        "sigma",
        "z",
        "fixed_mix_model",
        "fixed_mix_gap",
    ]);
    for kind in &cfg.strategies {
        for &p_c in &cfg.p_cs {
            let r = eq6_row(g, *kind, p_c)?;
            t.push(vec![
                kind.name().into(),
                fmt_float(kind.rate()),
                fmt_float(p_c),
                g.params.schedule.as_str().into(),
                r.outcome.trials.to_string(),
                r.outcome.detected.to_string(),
                fmt_float(r.outcome.detection_freq()),
                fmt_float(g.params.p_t()),
                fmt_float(r.p_d_hat),
                fmt_float(r.eq6),
                fmt_float(r.sigma),
                fmt_float(r.z),
                fmt_float(r.fixed_mix),
                fmt_float(r.fixed_mix - r.eq6),
            ]);
        }
    }
    Ok(t)
}
