// SPDX-License-Identifier: Apache-2.0

use crate::args::{
    self, BenchArgs, Common, MeanQueryArgs, PvRunArgs, PvVerifyArgs, QueryRunArgs, SizeArgs,
};
use crate::config::{List, Resolver};
use crate::files::{
    derive_keys, read_data_dir, read_keys, read_labels, write_data_dir, write_keys, write_labels,
    write_manifest_file,
};
use dataring::data::{
    build_domain, load_dataset, read_csv, synth_dataset, AttrKind, BackgroundKnowledge, Domain,
};
use dataring::data::{sample_background, HistogramDataset};
use dataring::group::{AdditiveScheme, ElGamalScheme, ServerKeys, Transparent};
use dataring::pv::{verify_pv, PartialView, PvVerdict};
use dataring::query::{encode_query, QueryVector};
use dataring::sim::{
    random_queries, run_pv_session, run_query_session, target_from_dataset, Backend, ByteCounts,
    CheatKind, CheatPlan, CheatStrategy, QueryParams, QuerySessionReport, ScheduleMode,
    WorldParams,
};
use dataring::stats::{choose_r0, TailModel};
use dataring::{Error, Point, Result, Seed};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Work that runs over either backend.
trait WithScheme {
    type Out;
    fn run<S: AdditiveScheme>(self, scheme: &S, keys: &ServerKeys<S::Secret>) -> Result<Self::Out>;
}

fn with_scheme<W: WithScheme>(
    backend: Backend,
    keys: Option<&Path>,
    seed: Seed,
    half_width: u64,
    w: W,
) -> Result<W::Out> {
    match backend {
        Backend::Ec => {
            let k = match keys {
                Some(dir) => read_keys(dir)?,
                None => derive_keys(seed),
            };
            let scheme = ElGamalScheme::<Point>::from_keys(&k[0], &k[1], half_width)?;
            w.run(
                &scheme,
                &ServerKeys {
                    s1: *k[0].secret(),
                    s2: *k[1].secret(),
                },
            )
        }
        Backend::Transparent => w.run(
            &Transparent::new(half_width),
            &ServerKeys { s1: (), s2: () },
        ),
    }
}

fn path_opt(r: &mut Resolver, key: &str, flag: &Option<PathBuf>) -> Result<Option<PathBuf>> {
    Ok(r.opt(key, flag.as_ref().map(|p| p.display().to_string()))?
        .map(PathBuf::from))
}

fn required(r: &mut Resolver, key: &str, flag: &Option<PathBuf>) -> Result<PathBuf> {
    path_opt(r, key, flag)?.ok_or_else(|| Error::Config(format!("--{key} is required")))
}

/// Dataset from `--data`, or synthesized from the size flags.
fn dataset(
    r: &mut Resolver,
    data: &Option<PathBuf>,
    size: &SizeArgs,
    seed: Seed,
) -> Result<HistogramDataset> {
    match path_opt(r, "data", data)? {
        Some(dir) => Ok(read_data_dir(&dir)?.1),
        None => {
            let (n, d) = args::size(r, size)?;
            synth_dataset(n, d, seed.derive("dataset", 0))
        }
    }
}

fn write_bytes(out: &mut dyn Write, bytes: &ByteCounts) -> Result<()> {
    for (kind, (msgs, b)) in &bytes.by_kind {
        writeln!(out, "bytes {} messages={msgs} bytes={b}", kind.as_str())?;
    }
    writeln!(out, "bytes total={}", bytes.total())?;
    Ok(())
}

fn write_verdict(out: &mut dyn Write, v: &PvVerdict, r0: u64) -> Result<()> {
    writeln!(
        out,
        "verdict={}",
        if v.accept { "ACCEPT" } else { "REJECT" }
    )?;
    writeln!(out, "matched={} r0={r0}", v.matched)?;
    if let Some(c) = &v.cause {
        writeln!(out, "cause={c}")?;
    }
    Ok(())
}

// ---------------------------------------------------------------- data and keys

pub fn gen_data(
    common: &Common,
    size: &SizeArgs,
    out_dir: &Path,
    out: &mut dyn Write,
) -> Result<()> {
    let mut r = Resolver::new("gen-data", common.config.as_deref())?;
    let seed = args::seed(&mut r, common)?;
    let (n, d) = args::size(&mut r, size)?;
    let manifest = r.finish()?;
    let domain = Domain::anonymous(
        u32::try_from(d).map_err(|_| Error::Config(format!("|D|={d} too large")))?,
    )?;
    let ds = synth_dataset(n, d, seed.derive("dataset", 0))?;
    write_data_dir(out_dir, &domain, &ds)?;
    write_manifest_file(&out_dir.join("run.manifest"), &manifest)?;
    writeln!(
        out,
        "wrote N={n} labels over |D|={d} to {}",
        out_dir.display()
    )?;
    Ok(())
}

pub fn ingest(
    common: &Common,
    csv: Option<PathBuf>,
    integer_cols: Option<List<String>>,
    a: Option<u32>,
    out_dir: &Path,
    out: &mut dyn Write,
) -> Result<()> {
    let mut r = Resolver::new("ingest", common.config.as_deref())?;
    let seed = args::seed(&mut r, common)?;
    let csv = required(&mut r, "csv", &csv)?;
    let cols = r.get("integer-cols", integer_cols, List(Vec::new()))?;
    let a = r.get("a", a, 4u32)?;
    let manifest = r.finish()?;

    let file =
        std::fs::File::open(&csv).map_err(|e| Error::Io(format!("{}: {e}", csv.display())))?;
    let table = read_csv(file)?;
    let cols: Vec<&str> = cols.0.iter().map(String::as_str).collect();
    let schema = table.infer_codes(&cols)?;
    let mut codes = Vec::with_capacity(table.rows.len());
    for row in &table.rows {
        let tuple: Vec<u32> = schema
            .attributes()
            .iter()
            .zip(row)
            .map(|(attr, v)| {
                attr.code_of(v)
                    .expect("inferred schema covers its own rows")
            })
            .collect();
        codes.push(schema.encode(&tuple)?);
    }
    codes.sort_unstable();
    codes.dedup();
    let domain = if schema.full_size() <= u64::from(a) * codes.len() as u64 {
        Domain::full(schema)?
    } else {
        build_domain(schema, &codes, a, seed.derive("domain", 0))?
    };
    let rep = load_dataset(&table, &domain)?;
    write_data_dir(out_dir, &domain, &rep.dataset)?;
    write_manifest_file(&out_dir.join("run.manifest"), &manifest)?;
    writeln!(
        out,
        "rows={} duplicates={} N={} domain_size={} capped={}",
        rep.rows,
        rep.duplicates,
        rep.dataset.len(),
        domain.size(),
        domain.is_capped()
    )?;
    Ok(())
}

pub fn keygen(common: &Common, out_dir: &Path, out: &mut dyn Write) -> Result<()> {
    let mut r = Resolver::new("keygen", common.config.as_deref())?;
    let seed = args::seed(&mut r, common)?;
    let manifest = r.finish()?;
    for p in write_keys(out_dir, &derive_keys(seed))? {
        writeln!(out, "wrote {}", p.display())?;
    }
    write_manifest_file(&out_dir.join("run.manifest"), &manifest)?;
    Ok(())
}

// ---------------------------------------------------------------- partial view

struct PvRun<'a> {
    ds: &'a HistogramDataset,
    keep: usize,
    v: usize,
    bk: &'a BackgroundKnowledge,
    r0: u64,
    seed: Seed,
}

impl WithScheme for PvRun<'_> {
    type Out = (PvVerdict, Option<Vec<u8>>, ByteCounts);

    fn run<S: AdditiveScheme>(self, s: &S, k: &ServerKeys<S::Secret>) -> Result<Self::Out> {
        let rep = run_pv_session(
            s, k, self.ds, self.keep, self.v, self.bk, self.r0, self.seed,
        )?;
        Ok((rep.verdict, rep.pv.map(|pv| pv.to_bytes(s)), rep.bytes))
    }
}

pub fn pv_run(a: &PvRunArgs, out: &mut dyn Write) -> Result<()> {
    let mut r = Resolver::new("pv-run", a.common.config.as_deref())?;
    let seed = args::seed(&mut r, &a.common)?;
    let ds = dataset(&mut r, &a.data, &a.size, seed)?;
    let n = ds.len();
    let (v, l, eta) = args::verify(&mut r, &a.verify, n)?;
    let keep = r.get("n", a.keep, n)?;
    if keep > n {
        return Err(Error::Config(format!("n={keep} exceeds N={n}")));
    }
    let r0 = match r.opt("r0", a.r0)? {
        Some(x) => x,
        None => choose_r0(TailModel::Exact, n as u64, v as u64, l as u64, &eta)?,
    };
    let backend = args::backend(&mut r, a.scheme.backend.clone(), Backend::Ec)?;
    let keys = path_opt(&mut r, "keys", &a.scheme.keys)?;
    let manifest = r.finish()?;

    let bk = sample_background(&ds, l, seed.derive("background", 0))?;
    let job = PvRun {
        ds: &ds,
        keep,
        v,
        bk: &bk,
        r0,
        seed: seed.derive("pv-session", 0),
    };
    let (verdict, pv, bytes) = with_scheme(backend, keys.as_deref(), seed, 16, job)?;
    write_verdict(out, &verdict, r0)?;
    writeln!(
        out,
        "N={n} n={keep} V={v} L={l} domain_size={}",
        ds.domain_size()
    )?;
    write_bytes(out, &bytes)?;
    if let Some(dir) = &a.out_dir {
        std::fs::create_dir_all(dir)?;
        if let Some(pv) = pv {
            std::fs::write(dir.join("pv.bin"), pv)?;
        }
        write_labels(&dir.join("background.txt"), &bk.labels)?;
        let mut m = manifest;
        m.set("r0", r0);
        write_manifest_file(&dir.join("run.manifest"), &m)?;
    }
    Ok(())
}

struct PvVerify {
    pv: Vec<u8>,
    bk: BackgroundKnowledge,
    r0: u64,
}

impl WithScheme for PvVerify {
    type Out = PvVerdict;

    fn run<S: AdditiveScheme>(self, s: &S, k: &ServerKeys<S::Secret>) -> Result<PvVerdict> {
        let pv = PartialView::from_bytes(s, &self.pv)?;
        Ok(verify_pv(s, &pv, &self.bk, self.r0, k))
    }
}

pub fn pv_verify(a: &PvVerifyArgs, out: &mut dyn Write) -> Result<()> {
    let mut r = Resolver::new("pv-verify", a.common.config.as_deref())?;
    let seed = args::seed(&mut r, &a.common)?;
    let pv = required(&mut r, "pv", &a.pv)?;
    let background = required(&mut r, "background", &a.background)?;
    let r0 = match r.opt("r0", a.r0)? {
        Some(x) => x,
        None => args::world(&mut r, &a.size, &a.verify)?.r0()?,
    };
    let backend = args::backend(&mut r, a.scheme.backend.clone(), Backend::Ec)?;
    let keys = path_opt(&mut r, "keys", &a.scheme.keys)?;
    r.finish()?;
    let job = PvVerify {
        pv: std::fs::read(&pv).map_err(|e| Error::Io(format!("{}: {e}", pv.display())))?,
        bk: BackgroundKnowledge {
            labels: read_labels(&background)?,
            seed: 0,
        },
        r0,
    };
    let verdict = with_scheme(backend, keys.as_deref(), seed, 16, job)?;
    write_verdict(out, &verdict, r0)
}

// ---------------------------------------------------------------- queries

struct QueryJob<'a> {
    ds: HistogramDataset,
    world: &'a WorldParams,
    queries: &'a [QueryVector],
    strategy: CheatStrategy,
    params: &'a QueryParams,
    seed: Seed,
}

impl WithScheme for QueryJob<'_> {
    type Out = QuerySessionReport;

    fn run<S: AdditiveScheme>(
        self,
        s: &S,
        k: &ServerKeys<S::Secret>,
    ) -> Result<QuerySessionReport> {
        let target = target_from_dataset(
            s,
            k,
            self.ds,
            self.world,
            self.strategy.kind,
            self.seed.derive("target", 0),
        )?;
        run_query_session(
            s,
            k,
            &target,
            self.queries,
            &self.strategy,
            self.params,
            self.seed.derive("session", 0),
        )
    }
}

/// Decode window wide enough for any count over `needed` labels plus noise.
fn half_width(needed: usize, params: &QueryParams) -> Result<u64> {
    let scale = params.budget()?.scale();
    Ok(2 * needed as u64 + 1024 + (40.0 * scale).ceil() as u64)
}

/// First released answer of each real query, by query index.
fn answers_by_query(rep: &QuerySessionReport, count: usize) -> Option<Vec<Option<i64>>> {
    let released = rep.released.as_ref()?;
    let mut by = vec![None; count];
    for (k, v) in released.iter().enumerate() {
        by[k % count].get_or_insert(*v);
    }
    Some(by)
}

fn write_session(out: &mut dyn Write, rep: &QuerySessionReport) -> Result<()> {
    writeln!(
        out,
        "released={}",
        if rep.released.is_some() { "yes" } else { "no" }
    )?;
    writeln!(
        out,
        "answered={} tests={} tests_failed={}",
        rep.answered,
        rep.record.tests,
        rep.record.cheated_tests_failed + rep.record.honest_tests_failed
    )?;
    Ok(())
}

pub fn query_run(a: &QueryRunArgs, out: &mut dyn Write) -> Result<()> {
    let mut r = Resolver::new("query-run", a.common.config.as_deref())?;
    let seed = args::seed(&mut r, &a.common)?;
    let ds = dataset(&mut r, &a.data, &a.size, seed)?;
    let (n, d) = (ds.len(), ds.domain_size());
    let (v, l, eta) = args::verify(&mut r, &a.verify, n)?;
    let params = args::query(&mut r, &a.query, ScheduleMode::Shuffle, "wide", 10)?;
    let kind = CheatKind::parse(&r.get("strategy", a.strategy.clone(), "honest".to_string())?)?;
    let x = r.opt("cheat-x", a.cheat_x)?;
    let p_c = r.opt("cheat-p", a.cheat_p)?;
    let backend = args::backend(&mut r, a.scheme.backend.clone(), Backend::Ec)?;
    let keys = path_opt(&mut r, "keys", &a.scheme.keys)?;
    let manifest = r.finish()?;

    let strategy = match (kind, x) {
        (CheatKind::Honest, _) => CheatStrategy::honest(),
        (_, Some(x)) => CheatStrategy {
            kind,
            plan: CheatPlan::Forced { x },
        },
        (_, None) => CheatStrategy {
            kind,
            plan: CheatPlan::Independent {
                p_c: p_c.unwrap_or(1.0),
            },
        },
    };
    let world = WorldParams {
        n,
        domain_size: d,
        v,
        l,
        eta,
    };
    let queries = random_queries(d, params.m_q as usize, seed.derive("queries", 0))?;
    let hw = half_width(kind.domain_needed(n), &params)?;
    let job = QueryJob {
        ds,
        world: &world,
        queries: &queries,
        strategy,
        params: &params,
        seed,
    };
    let rep = with_scheme(backend, keys.as_deref(), seed, hw, job)?;

    write_session(out, &rep)?;
    let mut csv = String::from("query,answer\n");
    if let Some(by) = answers_by_query(&rep, queries.len()) {
        for (i, v) in by.iter().enumerate() {
            let v = v.map_or("".into(), |x| x.to_string());
            writeln!(out, "answer query={i} value={v}")?;
            csv.push_str(&format!("{i},{v}\n"));
        }
    }
    write_bytes(out, &rep.bytes)?;
    if let Some(p) = &a.out {
        std::fs::write(p, csv)?;
        write_manifest_file(
            &PathBuf::from(format!("{}.manifest", p.display())),
            &manifest,
        )?;
    }
    Ok(())
}

pub fn mean_query(a: &MeanQueryArgs, out: &mut dyn Write) -> Result<()> {
    let mut r = Resolver::new("mean-query", a.common.config.as_deref())?;
    let seed = args::seed(&mut r, &a.common)?;
    let data = required(&mut r, "data", &a.data)?;
    let attr = r
        .opt("attr", a.attr.clone())?
        .ok_or_else(|| Error::Config("--attr is required".into()))?;
    let (domain, ds) = read_data_dir(&data)?;
    let (n, d) = (ds.len(), ds.domain_size());

    let (idx, at) = domain
        .schema()
        .attribute(&attr)
        .ok_or_else(|| Error::Config(format!("no attribute named `{attr}`")))?;
    if at.kind() != AttrKind::Integer {
        return Err(Error::Config(format!(
            "attribute `{attr}` is not an integer attribute"
        )));
    }
    let mut values = Vec::new();
    let mut queries = Vec::new();
    for code in 0..at.cardinality() {
        let text = at.value_of(code).expect("code below cardinality");
        values.push(
            text.parse::<i64>()
                .map_err(|_| Error::Encoding(format!("`{text}` is not an integer")))?,
        );
        queries.push(encode_query(&domain.select(|t| t[idx] == code), d)?);
    }
    queries.push(QueryVector::all(d));

    let (v, l, eta) = args::verify(&mut r, &a.verify, n)?;
    let params = args::query(
        &mut r,
        &a.query,
        ScheduleMode::Shuffle,
        "wide",
        queries.len() as u32,
    )?;
    if (params.m_q as usize) < queries.len() {
        return Err(Error::Config(format!(
            "{} value buckets plus a count need m-q >= {}, got {}",
            values.len(),
            queries.len(),
            params.m_q
        )));
    }
    let backend = args::backend(&mut r, a.scheme.backend.clone(), Backend::Ec)?;
    let keys = path_opt(&mut r, "keys", &a.scheme.keys)?;
    r.finish()?;

    let world = WorldParams {
        n,
        domain_size: d,
        v,
        l,
        eta,
    };
    let hw = half_width(n, &params)?;
    let job = QueryJob {
        ds,
        world: &world,
        queries: &queries,
        strategy: CheatStrategy::honest(),
        params: &params,
        seed,
    };
    let rep = with_scheme(backend, keys.as_deref(), seed, hw, job)?;
    write_session(out, &rep)?;
    let by = answers_by_query(&rep, queries.len())
        .ok_or_else(|| Error::Protocol("answers were discarded after a failed test".into()))?;
    let by: Vec<i64> = by
        .into_iter()
        .enumerate()
        .map(|(i, x)| x.ok_or_else(|| Error::Protocol(format!("query {i} was not answered"))))
        .collect::<Result<_>>()?;
    let sum: i64 = values.iter().zip(&by).map(|(v, c)| v * c).sum();
    let count = *by.last().expect("count query present");
    writeln!(out, "buckets={} sum={sum} count={count}", values.len())?;
    if count > 0 {
        writeln!(
            out,
            "mean={}",
            dataring::sim::fmt_float(sum as f64 / count as f64)
        )?;
    } else {
        writeln!(out, "mean=undefined")?;
    }
    Ok(())
}

// ---------------------------------------------------------------- bench

pub fn bench(a: &BenchArgs, out: &mut dyn Write) -> Result<()> {
    let mut r = Resolver::new("bench", a.common.config.as_deref())?;
    let seed = args::seed(&mut r, &a.common)?;
    let (n, d) = args::size(&mut r, &a.size)?;
    let reps = r.get("reps", a.reps, 200u32)?.max(1);
    r.finish()?;

    let k = derive_keys(seed);
    let t0 = Instant::now();
    let s = ElGamalScheme::<Point>::from_keys(&k[0], &k[1], 1 << 20)?;
    let setup = t0.elapsed().as_secs_f64();
    let keys = ServerKeys {
        s1: *k[0].secret(),
        s2: *k[1].secret(),
    };
    let mut rng = seed.stream("bench", 0);
    let per_op = |f: &mut dyn FnMut()| {
        let t = Instant::now();
        for _ in 0..reps {
            f();
        }
        t.elapsed().as_secs_f64() / f64::from(reps)
    };
    let cts: Vec<_> = (0..reps)
        .map(|i| s.encrypt(i64::from(i), &mut rng))
        .collect();
    let enc = per_op(&mut || {
        std::hint::black_box(s.encrypt(1, &mut rng));
    });
    let mut acc = s.identity();
    let add = per_op(&mut || acc = s.add(&acc, &cts[0]));
    let mut i = 0;
    let dec = per_op(&mut || {
        std::hint::black_box(keys.joint_decrypt(&s, &cts[i % cts.len()]).ok());
        i += 1;
    });
    let (_, recipient) = s.new_recipient(&mut rng);
    let re = per_op(&mut || {
        let st = s.reencrypt_init(&cts[0]);
        let st = s.reencrypt_stage(&cts[0], &st, &keys.s1, &recipient, &mut rng);
        std::hint::black_box(s.reencrypt_stage(&cts[0], &st, &keys.s2, &recipient, &mut rng));
    });

    writeln!(out, "op,per_op_us,count,total_s")?;
    let rows = [
        ("setup", setup, 1),
        ("encrypt", enc, 1),
        ("add", add, 1),
        ("joint_decrypt", dec, 1),
        ("reencrypt", re, 1),
        ("query_encrypt", enc, d),
        ("answer_sum", add, n),
        ("pv_encrypt", enc, d),
    ];
    for (op, t, count) in rows {
        writeln!(out, "{op},{:.3},{count},{:.3}", t * 1e6, t * count as f64)?;
    }
    Ok(())
}
