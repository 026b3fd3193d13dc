// SPDX-License-Identifier: Apache-2.0

use crate::args::{
    self, CsvOut, DetectionArgs, Eq6Args, GridArgs, LminArgs, NminArgs, PvThresholdArgs,
};
use crate::config::{List, Resolver};
use crate::files::write_manifest_file;
use dataring::sim::{
    experiment_detection, experiment_eq6, experiment_lmin, experiment_nmin_table,
    experiment_pv_threshold, Backend, CheatKind, DetectionConfig, Eq6Config, LminConfig, Manifest,
    NminConfig, PvThresholdConfig, ScheduleMode, SessionGrid, SessionPath, Table,
};
use dataring::stats::{parse_prob, Threshold};
use dataring::{Result, Seed};
use std::io::Write;
use std::path::PathBuf;

fn emit(table: &Table, dest: &CsvOut, manifest: &Manifest, out: &mut dyn Write) -> Result<()> {
    match &dest.out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            table.write_csv(std::fs::File::create(p)?)?;
            writeln!(out, "wrote {} ({} rows)", p.display(), table.rows.len())?;
        }
        None => table.write_csv(&mut *out)?,
    }
    let mpath = dest.manifest.clone().or_else(|| {
        dest.out
            .as_ref()
            .map(|p| PathBuf::from(format!("{}.manifest", p.display())))
    });
    if let Some(mp) = mpath {
        write_manifest_file(&mp, manifest)?;
    }
    Ok(())
}

fn kinds(list: &List<String>) -> Result<Vec<CheatKind>> {
    list.0.iter().map(|s| CheatKind::parse(s)).collect()
}

pub fn pv_threshold(a: &PvThresholdArgs, out: &mut dyn Write) -> Result<()> {
    let mut r = Resolver::new("experiment pv-threshold", a.common.config.as_deref())?;
    let seed = args::seed(&mut r, &a.common)?;
    let world = args::world(&mut r, &a.size, &a.verify)?;
    let workers = args::workers(&mut r, &a.workers)?;
    let n = world.n;
    let keeps = r.get(
        "keeps",
        a.keeps.clone(),
        List((0..=10).map(|i| n * i / 10).collect()),
    )?;
    let r0 = r.opt("r0", a.r0)?;
    let trials = r.get("trials", a.trials, 100u64)?;
    let backend = args::backend(&mut r, a.backend.clone(), Backend::Transparent)?;
    let manifest = r.finish()?;
    let cfg = PvThresholdConfig {
        world,
        r0,
        keeps: keeps.0,
        trials,
        backend,
        seed,
        workers,
    };
    emit(&experiment_pv_threshold(&cfg)?, &a.out, &manifest, out)
}

pub fn lmin(a: &LminArgs, out: &mut dyn Write) -> Result<()> {
    let mut r = Resolver::new("experiment lmin", a.common.config.as_deref())?;
    let ns = r.get(
        "N",
        a.ns.clone(),
        List(vec![500_000u64, 1_000_000, 1_500_000, 2_000_000]),
    )?;
    let rho = parse_prob(&r.get("rho", a.rho.clone(), "0.01".to_string())?)?;
    let eta = args::eta(&mut r, a.eta.clone())?;
    let manifest = r.finish()?;
    emit(
        &experiment_lmin(&LminConfig { ns: ns.0, rho, eta })?,
        &a.out,
        &manifest,
        out,
    )
}

pub fn nmin_table(a: &NminArgs, out: &mut dyn Write) -> Result<()> {
    let mut r = Resolver::new("experiment nmin-table", a.common.config.as_deref())?;
    let n = r.get("N", a.n, args::DEFAULT_N as u64)?;
    let (v, l, eta) = args::verify(&mut r, &a.verify, n as usize)?;
    let default_thetas = ["0.91", "0.93", "0.95", "0.96", "0.97"]
        .map(String::from)
        .to_vec();
    let thetas = r.get("theta", a.theta.clone(), List(default_thetas))?;
    let manifest = r.finish()?;
    let thetas = thetas
        .0
        .iter()
        .map(|t| Threshold::parse(t))
        .collect::<Result<Vec<_>>>()?;
    let cfg = NminConfig {
        n,
        v: v as u64,
        l: l as u64,
        eta,
        thetas,
    };
    emit(&experiment_nmin_table(&cfg)?, &a.out, &manifest, out)
}

fn grid(
    r: &mut Resolver,
    g: &GridArgs,
    schedule: ScheduleMode,
    trials: u64,
) -> Result<(SessionGrid, Seed)> {
    let seed = args::seed(r, &g.common)?;
    let world = args::world(r, &g.size, &g.verify)?;
    let params = args::query(r, &g.query, schedule, "wide", 10)?;
    let workers = args::workers(r, &g.workers)?;
    let trials = r.get("trials", g.trials, trials)?;
    let path = SessionPath::parse(&r.get("path", g.path.clone(), "fast".to_string())?)?;
    Ok((
        SessionGrid {
            world,
            params,
            trials,
            path,
            seed,
            workers,
        },
        seed,
    ))
}

pub fn detection(a: &DetectionArgs, out: &mut dyn Write) -> Result<()> {
    let mut r = Resolver::new("experiment detection", a.grid.common.config.as_deref())?;
    let (grid, _) = grid(&mut r, &a.grid, ScheduleMode::Shuffle, 1000)?;
    let default = [
        "modify:0.05",
        "modify:0.2",
        "modify:1",
        "add:0.2",
        "add:0.5",
    ]
    .map(String::from)
    .to_vec();
    let strategies = kinds(&r.get("strategies", a.strategies.clone(), List(default))?)?;
    let xs = r.get("xs", a.xs.clone(), List((1..=grid.params.m()).collect()))?;
    let manifest = r.finish()?;
    let cfg = DetectionConfig {
        grid,
        strategies,
        xs: xs.0,
    };
    emit(&experiment_detection(&cfg)?, &a.grid.out, &manifest, out)
}

pub fn eq6_check(a: &Eq6Args, out: &mut dyn Write) -> Result<()> {
    let mut r = Resolver::new("experiment eq6-check", a.grid.common.config.as_deref())?;
    let (grid, _) = grid(&mut r, &a.grid, ScheduleMode::Independent, 100_000)?;
    let default = ["modify:1", "modify:0.5", "add:0.5"]
        .map(String::from)
        .to_vec();
    let strategies = kinds(&r.get("strategies", a.strategies.clone(), List(default))?)?;
    let p_cs = r.get("p-c", a.p_c.clone(), List(vec![0.05, 0.1, 0.3]))?;
    let manifest = r.finish()?;
    let cfg = Eq6Config {
        grid,
        strategies,
        p_cs: p_cs.0,
    };
    emit(&experiment_eq6(&cfg)?, &a.grid.out, &manifest, out)
}
