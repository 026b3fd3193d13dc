// SPDX-License-Identifier: Apache-2.0

use crate::config::{List, Resolver};
use crate::{experiment, protocol, Failure};
use clap::{Args, Parser, Subcommand};
use dataring::query::{NoiseRule, Tolerance};
use dataring::sim::{Backend, QueryParams, ScheduleMode, WorldParams, DEFAULT_SESSION_FP};
use dataring::stats::Threshold;
use dataring::{Error, Result, Seed};
use std::io::Write;
use std::path::PathBuf;

/// Verifiable private queries over label-histogram datasets.
///
/// Parameters resolve as flag, then `--config` file (flat key=value, keys
/// named like the long flags), then the default shown in brackets.
#[derive(Parser, Debug)]
#[command(name = "dataring", version)]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Synthetic dataset of N random labels over an anonymous domain
    GenData {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        size: SizeArgs,
        /// Directory receiving domain.txt, dataset.bits and run.manifest
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// CSV records to a domain manifest and dataset bit image
    Ingest {
        #[command(flatten)]
        common: Common,
        /// Input CSV with a header row
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Columns coded by numeric rank instead of first appearance [default: none]
        #[arg(long)]
        integer_cols: Option<List<String>>,
        /// Domain cap a: domain limited to a·N labels when the full cross product is larger [default: 4]
        #[arg(long)]
        a: Option<u32>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Key files for both servers and a participant
    Keygen {
        #[command(flatten)]
        common: Common,
        /// Directory receiving <party>.key (32-byte scalar + 33-byte point) and <party>.pub
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// One partial-view collection and verification
    PvRun(PvRunArgs),
    /// Re-verifies a stored partial view against background knowledge
    PvVerify(PvVerifyArgs),
    /// One query-evaluation session with hidden tests
    QueryRun(QueryRunArgs),
    /// Mean of an integer attribute from per-value counts and a total count
    MeanQuery(MeanQueryArgs),
    /// Experiment drivers writing CSV
    #[command(subcommand)]
    Experiment(ExperimentCmd),
    /// Local per-operation timings, for information only
    Bench(BenchArgs),
    /// Re-runs the command recorded in a run manifest
    Replay {
        manifest: PathBuf,
        /// Extra flags appended to the recorded command (e.g. a new --out)
        #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
        extra: Vec<String>,
    },
}

#[derive(Subcommand, Debug)]
pub enum ExperimentCmd {
    /// Accept rate of partial views from datasets keeping n true records
    PvThreshold(PvThresholdArgs),
    /// Smallest background knowledge for a target rejection rate
    Lmin(LminArgs),
    /// Smallest number of true records passing verification with probability θ
    NminTable(NminArgs),
    /// Detection accuracy by cheating strategy and number of incorrect answers
    Detection(DetectionArgs),
    /// Simulated detection frequency against the closed-form model
    Eq6Check(Eq6Args),
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// Flat key=value parameter file
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed [default: 1]
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct SizeArgs {
    /// Records per dataset, N [default: 500000]
    #[arg(long = "N")]
    pub n: Option<usize>,
    /// Domain cap a [default: 4]
    #[arg(long)]
    pub a: Option<usize>,
    /// Domain size |D| [default: a·N = 2000000]
    #[arg(long)]
    pub domain_size: Option<usize>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct VerifyArgs {
    /// Partial-view size V [default: 5000]
    #[arg(long = "V", visible_alias = "v")]
    pub v: Option<usize>,
    /// Background knowledge size L [default: 500]
    #[arg(long = "L", visible_alias = "l")]
    pub l: Option<usize>,
    /// Honest rejection bound η [default: 0.05]
    #[arg(long)]
    pub eta: Option<String>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct QueryArgs {
    /// Querier privacy budget ε [default: 0.5]
    #[arg(long)]
    pub eps: Option<f64>,
    /// Server privacy budget ε_S [default: 0.5]
    #[arg(long)]
    pub eps_server: Option<f64>,
    /// Real queries per session m_q [default: 10]
    #[arg(long)]
    pub m_q: Option<u32>,
    /// Test queries per session m_t [default: 10]
    #[arg(long)]
    pub m_t: Option<u32>,
    /// Per-test honest failure probability under --tolerance strict [default: 0.05]
    #[arg(long)]
    pub tail: Option<f64>,
    /// Laplace scale rule: per-budget (m_q/min(ε, ε_S)) or pooled (m/(ε+ε_S)) [default: per-budget]
    #[arg(long)]
    pub noise_rule: Option<String>,
    /// wide (session false-flag bound) or strict (per-test tail) [default: wide]
    #[arg(long)]
    pub tolerance: Option<String>,
    /// Honest-session flag probability under --tolerance wide [default: 1e-6]
    #[arg(long)]
    pub session_fp: Option<f64>,
    /// Test placement: shuffle or independent [default: shuffle]
    #[arg(long)]
    pub schedule: Option<String>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Workers {
    /// Worker threads; results do not depend on it [default: available cores]
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct CsvOut {
    /// CSV destination [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Run manifest destination [default: <out>.manifest when --out is given]
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct SchemeArgs {
    /// ec (EC-ElGamal over prime256v1) or transparent (plaintext mirror) [default: ec]
    #[arg(long)]
    pub backend: Option<String>,
    /// Key directory from `keygen` [default: keys derived from --seed]
    #[arg(long)]
    pub keys: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct PvRunArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub size: SizeArgs,
    #[command(flatten)]
    pub verify: VerifyArgs,
    #[command(flatten)]
    pub scheme: SchemeArgs,
    /// Dataset directory from gen-data or ingest [default: synthesize from --N]
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// True records kept in the submitted dataset, n [default: N]
    #[arg(long = "n")]
    pub keep: Option<usize>,
    /// Acceptance threshold r0 [default: largest keeping rejection below η]
    #[arg(long)]
    pub r0: Option<u64>,
    /// Directory receiving pv.bin, background.txt and run.manifest
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct PvVerifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub scheme: SchemeArgs,
    /// Partial view written by pv-run
    #[arg(long)]
    pub pv: Option<PathBuf>,
    /// Background labels, one per line
    #[arg(long)]
    pub background: Option<PathBuf>,
    /// Acceptance threshold r0 [default: from --N, --V, --L, --eta]
    #[arg(long)]
    pub r0: Option<u64>,
    #[command(flatten)]
    pub size: SizeArgs,
    #[command(flatten)]
    pub verify: VerifyArgs,
}

#[derive(Args, Debug, Clone)]
pub struct QueryRunArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub size: SizeArgs,
    #[command(flatten)]
    pub verify: VerifyArgs,
    #[command(flatten)]
    pub query: QueryArgs,
    #[command(flatten)]
    pub scheme: SchemeArgs,
    /// Dataset directory from gen-data or ingest [default: synthesize from --N]
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Answering participant: honest, modify:α or add:ω [default: honest]
    #[arg(long)]
    pub strategy: Option<String>,
    /// Answer each query from the fake dataset with this probability [default: 1 when cheating]
    #[arg(long)]
    pub cheat_p: Option<f64>,
    /// Answer exactly this many queries from the fake dataset (overrides --cheat-p)
    #[arg(long)]
    pub cheat_x: Option<usize>,
    /// CSV of released answers
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct MeanQueryArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub verify: VerifyArgs,
    #[command(flatten)]
    pub query: QueryArgs,
    #[command(flatten)]
    pub scheme: SchemeArgs,
    /// Dataset directory from ingest
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Integer attribute to average
    #[arg(long)]
    pub attr: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct PvThresholdArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub size: SizeArgs,
    #[command(flatten)]
    pub verify: VerifyArgs,
    #[command(flatten)]
    pub workers: Workers,
    #[command(flatten)]
    pub out: CsvOut,
    /// Values of n, one row each [default: 0, N/10, ..., N]
    #[arg(long)]
    pub keeps: Option<List<usize>>,
    /// Acceptance threshold r0 [default: from η]
    #[arg(long)]
    pub r0: Option<u64>,
    /// Sessions per row [default: 100]
    #[arg(long)]
    pub trials: Option<u64>,
    /// ec or transparent [default: transparent]
    #[arg(long)]
    pub backend: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct LminArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub out: CsvOut,
    /// Dataset sizes [default: 500000,1000000,1500000,2000000]
    #[arg(long = "N")]
    pub ns: Option<List<u64>>,
    /// Sampling rate ρ = V/N [default: 0.01]
    #[arg(long)]
    pub rho: Option<String>,
    /// Honest rejection bound η [default: 0.05]
    #[arg(long)]
    pub eta: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct NminArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub out: CsvOut,
    /// Records per dataset, N [default: 500000]
    #[arg(long = "N")]
    pub n: Option<u64>,
    #[command(flatten)]
    pub verify: VerifyArgs,
    /// Adversary success targets θ [default: 0.91,0.93,0.95,0.96,0.97]
    #[arg(long)]
    pub theta: Option<List<String>>,
}

#[derive(Args, Debug, Clone)]
pub struct GridArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub size: SizeArgs,
    #[command(flatten)]
    pub verify: VerifyArgs,
    #[command(flatten)]
    pub query: QueryArgs,
    #[command(flatten)]
    pub workers: Workers,
    #[command(flatten)]
    pub out: CsvOut,
    /// Sessions per row
    #[arg(long)]
    pub trials: Option<u64>,
    /// fast (count-level model), ec or transparent (full sessions) [default: fast]
    #[arg(long)]
    pub path: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct DetectionArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Cheating strategies [default: modify:0.05,modify:0.2,modify:1,add:0.2,add:0.5]
    #[arg(long)]
    pub strategies: Option<List<String>>,
    /// Numbers of incorrect answers [default: 1..=m_q+m_t]
    #[arg(long)]
    pub xs: Option<List<usize>>,
}

#[derive(Args, Debug, Clone)]
pub struct Eq6Args {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Cheating strategies [default: modify:1,modify:0.5,add:0.5]
    #[arg(long)]
    pub strategies: Option<List<String>>,
    /// Per-query cheating probabilities [default: 0.05,0.1,0.3]
    #[arg(long)]
    pub p_c: Option<List<f64>>,
}

#[derive(Args, Debug, Clone)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub size: SizeArgs,
    /// Repetitions per operation [default: 200]
    #[arg(long)]
    pub reps: Option<u32>,
}

// ---------------------------------------------------------------- resolution

pub const DEFAULT_N: usize = 500_000;
pub const DEFAULT_A: usize = 4;
pub const DEFAULT_V: usize = 5000;
pub const DEFAULT_L: usize = 500;
pub const DEFAULT_ETA: &str = "0.05";

pub fn seed(r: &mut Resolver, c: &Common) -> Result<Seed> {
    Ok(Seed(r.get("seed", c.seed, 1)?))
}

pub fn workers(r: &mut Resolver, w: &Workers) -> Result<usize> {
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let w = r.get("workers", w.workers, cores)?;
    if w == 0 {
        return Err(Error::Config("workers must be at least 1".into()));
    }
    Ok(w)
}

/// `(N, |D|)`.
pub fn size(r: &mut Resolver, s: &SizeArgs) -> Result<(usize, usize)> {
    let n = r.get("N", s.n, DEFAULT_N)?;
    let a = r.get("a", s.a, DEFAULT_A)?;
    let d = r.get("domain-size", s.domain_size, a.saturating_mul(n))?;
    if n == 0 || n > d {
        return Err(Error::Config(format!(
            "need 1 <= N <= |D|, got N={n}, |D|={d}"
        )));
    }
    Ok((n, d))
}

pub fn eta(r: &mut Resolver, v: Option<String>) -> Result<Threshold> {
    Threshold::parse(&r.get("eta", v, DEFAULT_ETA.to_string())?)
}

/// `(V, L, η)`, checked against `N`.
pub fn verify(r: &mut Resolver, v: &VerifyArgs, n: usize) -> Result<(usize, usize, Threshold)> {
    let vv = r.get("V", v.v, DEFAULT_V)?;
    let l = r.get("L", v.l, DEFAULT_L)?;
    let eta = eta(r, v.eta.clone())?;
    if vv == 0 || vv > n || l == 0 || l > n {
        return Err(Error::Config(format!(
            "need 1 <= V, L <= N, got V={vv}, L={l}, N={n}"
        )));
    }
    Ok((vv, l, eta))
}

pub fn world(r: &mut Resolver, s: &SizeArgs, v: &VerifyArgs) -> Result<WorldParams> {
    let (n, domain_size) = size(r, s)?;
    let (v, l, eta) = verify(r, v, n)?;
    Ok(WorldParams {
        n,
        domain_size,
        v,
        l,
        eta,
    })
}

pub fn query(
    r: &mut Resolver,
    q: &QueryArgs,
    schedule: ScheduleMode,
    tolerance: &str,
    default_m_q: u32,
) -> Result<QueryParams> {
    let eps_peer = r.get("eps", q.eps, 0.5)?;
    let eps_server = r.get("eps-server", q.eps_server, 0.5)?;
    let m_q = r.get("m-q", q.m_q, default_m_q)?;
    let m_t = r.get("m-t", q.m_t, 10)?;
    let tail = r.get("tail", q.tail, 0.05)?;
    let rule = NoiseRule::parse(&r.get(
        "noise-rule",
        q.noise_rule.clone(),
        NoiseRule::PerBudget.as_str().into(),
    )?)?;
    let tol = r.get("tolerance", q.tolerance.clone(), tolerance.to_string())?;
    let session_fp = r.get("session-fp", q.session_fp, DEFAULT_SESSION_FP)?;
    let tolerance = match tol.as_str() {
        "strict" => Tolerance::Strict { tail },
        "wide" => Tolerance::Wide { session_fp },
        other => {
            return Err(Error::Config(format!(
                "unknown tolerance {other:?} (wide|strict)"
            )))
        }
    };
    for (name, p) in [("tail", tail), ("session-fp", session_fp)] {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Config(format!("{name} must lie in (0, 1), got {p}")));
        }
    }
    let schedule =
        ScheduleMode::parse(&r.get("schedule", q.schedule.clone(), schedule.as_str().into())?)?;
    let p = QueryParams {
        m_q,
        m_t,
        eps_peer,
        eps_server,
        rule,
        tolerance,
        schedule,
    };
    p.budget()?;
    Ok(p)
}

pub fn backend(r: &mut Resolver, b: Option<String>, default: Backend) -> Result<Backend> {
    Backend::parse(&r.get("backend", b, default.as_str().into())?)
}

// ---------------------------------------------------------------- dispatch

pub fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::GenData {
            common,
            size,
            out_dir,
        } => protocol::gen_data(&common, &size, &out_dir, out)?,
        Cmd::Ingest {
            common,
            csv,
            integer_cols,
            a,
            out_dir,
        } => protocol::ingest(&common, csv, integer_cols, a, &out_dir, out)?,
        Cmd::Keygen { common, out_dir } => protocol::keygen(&common, &out_dir, out)?,
        Cmd::PvRun(a) => protocol::pv_run(&a, out)?,
        Cmd::PvVerify(a) => protocol::pv_verify(&a, out)?,
        Cmd::QueryRun(a) => protocol::query_run(&a, out)?,
        Cmd::MeanQuery(a) => protocol::mean_query(&a, out)?,
        Cmd::Bench(a) => protocol::bench(&a, out)?,
        Cmd::Experiment(e) => match e {
            ExperimentCmd::PvThreshold(a) => experiment::pv_threshold(&a, out)?,
            ExperimentCmd::Lmin(a) => experiment::lmin(&a, out)?,
            ExperimentCmd::NminTable(a) => experiment::nmin_table(&a, out)?,
            ExperimentCmd::Detection(a) => experiment::detection(&a, out)?,
            ExperimentCmd::Eq6Check(a) => experiment::eq6_check(&a, out)?,
        },
        Cmd::Replay { manifest, extra } => {
            let m = dataring::sim::Manifest::read(&manifest)?;
            let command = m.get("command").ok_or_else(|| {
                Error::Config(format!("{} records no command", manifest.display()))
            })?;
            let mut argv: Vec<std::ffi::OsString> = vec!["dataring".into()];
            argv.extend(command.split_whitespace().map(Into::into));
            argv.push("--config".into());
            argv.push(manifest.clone().into_os_string());
            argv.extend(extra.into_iter().map(Into::into));
            return crate::run(argv, out);
        }
    }
    Ok(())
}
