// SPDX-License-Identifier: Apache-2.0

use crate::data::HistogramDataset;
use crate::error::{Error, Result};
use crate::query::TestKind;
use crate::Label;
use rand::seq::index;
use rand::{Rng, RngCore};
use std::fmt;

/// How a cheating participant builds its fake dataset `D*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CheatKind {
    Honest,
    /// Replace `⌊αN⌋` true labels with labels outside the dataset.
    Modify(f64),
    /// Add `⌊ωN⌋` labels outside the dataset.
    Add(f64),
}

impl CheatKind {
    /// `honest`, `modify:α` or `add:ω`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("honest") {
            return Ok(CheatKind::Honest);
        }
        let (name, val) = s.split_once(':').ok_or_else(|| {
            Error::Config(format!(
                "strategy {s:?}: expected honest, modify:α or add:ω"
            ))
        })?;
        let x: f64 = val
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("strategy {s:?}: bad rate")))?;
        if !(0.0..=f64::MAX).contains(&x) || !x.is_finite() {
            return Err(Error::Config(format!(
                "strategy {s:?}: rate must be non-negative"
            )));
        }
        match name.trim().to_ascii_lowercase().as_str() {
            "modify" if x <= 1.0 => Ok(CheatKind::Modify(x)),
            "modify" => Err(Error::Config(format!(
                "strategy {s:?}: modifying rate above 1"
            ))),
            "add" => Ok(CheatKind::Add(x)),
            _ => Err(Error::Config(format!("unknown strategy {name:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CheatKind::Honest => "honest",
            CheatKind::Modify(_) => "modify",
            CheatKind::Add(_) => "add",
        }
    }

    pub fn rate(&self) -> f64 {
        match *self {
            CheatKind::Honest => 0.0,
            CheatKind::Modify(a) | CheatKind::Add(a) => a,
        }
    }

    /// Number of fake labels for a dataset of `n` records.
    pub fn fake_labels(&self, n: usize) -> usize {
        // The small epsilon keeps rates like 0.29·100 from flooring to 28.
        ((self.rate() * n as f64) + 1e-9).floor() as usize
    }

    /// Domain size needed to build `D*` from `n` records.
    pub fn domain_needed(&self, n: usize) -> usize {
        n + self.fake_labels(n)
    }
}

impl fmt::Display for CheatKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheatKind::Honest => f.write_str("honest"),
            CheatKind::Modify(a) => write!(f, "modify:{a}"),
            CheatKind::Add(w) => write!(f, "add:{w}"),
        }
    }
}

/// Builds `D*` from `ds`.
pub fn fake_dataset<R: RngCore>(
    ds: &HistogramDataset,
    kind: CheatKind,
    rng: &mut R,
) -> Result<HistogramDataset> {
    let n = ds.len();
    let size = ds.domain_size();
    let x = kind.fake_labels(n);
    if kind.domain_needed(n) > size {
        return Err(Error::InvalidParameter(format!(
            "{kind} on {n} records needs {} free labels, domain has {}",
            x,
            size - n
        )));
    }
    let outside: Vec<Label> = (0..size as Label).filter(|l| !ds.contains(*l)).collect();
    let added = index::sample(rng, outside.len(), x)
        .into_iter()
        .map(|i| outside[i]);
    match kind {
        CheatKind::Honest => Ok(ds.clone()),
        CheatKind::Modify(_) => {
            let mut labels = ds.labels();
            let mut drop = vec![false; n];
            for i in index::sample(rng, n, x) {
                drop[i] = true;
            }
            let mut kept: Vec<Label> = labels
                .drain(..)
                .zip(drop)
                .filter(|(_, d)| !d)
                .map(|(l, _)| l)
                .collect();
            kept.extend(added);
            HistogramDataset::from_labels(size, kept)
        }
        CheatKind::Add(_) => {
            HistogramDataset::from_labels(size, ds.labels().into_iter().chain(added))
        }
    }
}

/// Which answers use `D*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CheatPlan {
    /// Each answer independently with probability `p_c`.
    Independent { p_c: f64 },
    /// Exactly `x` answers at uniformly random positions.
    Forced { x: usize },
}

impl CheatPlan {
    pub fn positions<R: RngCore>(&self, m: usize, rng: &mut R) -> Result<Vec<bool>> {
        match *self {
            CheatPlan::Independent { p_c } => {
                if !(0.0..=1.0).contains(&p_c) {
                    return Err(Error::InvalidParameter(format!("p_c={p_c} outside [0,1]")));
                }
                Ok((0..m).map(|_| rng.gen_bool(p_c)).collect())
            }
            CheatPlan::Forced { x } => {
                if x > m {
                    return Err(Error::InvalidParameter(format!(
                        "x={x} exceeds the {m} queries"
                    )));
                }
                let mut out = vec![false; m];
                for i in index::sample(rng, m, x) {
                    out[i] = true;
                }
                Ok(out)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheatStrategy {
    pub kind: CheatKind,
    pub plan: CheatPlan,
}

impl CheatStrategy {
    pub fn honest() -> Self {
        CheatStrategy {
            kind: CheatKind::Honest,
            plan: CheatPlan::Forced { x: 0 },
        }
    }

    pub fn is_honest(&self) -> bool {
        self.kind == CheatKind::Honest
            || matches!(self.plan, CheatPlan::Forced { x: 0 })
            || matches!(self.plan, CheatPlan::Independent { p_c } if p_c == 0.0)
    }
}

/// What happened in one query session.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrialRecord {
    /// Answers computed on `D*`.
    pub cheated_answers: u32,
    pub tests: u32,
    pub cheated_tests: u32,
    pub cheated_tests_failed: u32,
    pub honest_tests_failed: u32,
    /// Tests of each kind that were answered on `D*` and failed.
    pub failed_by_kind: [u32; 3],
    pub cheated_by_kind: [u32; 3],
}

impl TrialRecord {
    pub fn cheated(&self) -> bool {
        self.cheated_answers > 0
    }

    /// Some test failed; the participant is flagged.
    pub fn flagged(&self) -> bool {
        self.cheated_tests_failed + self.honest_tests_failed > 0
    }

    /// A test answered on `D*` failed.
    pub fn detected(&self) -> bool {
        self.cheated_tests_failed > 0
    }

    pub(crate) fn record_test(&mut self, kind: TestKind, cheated: bool, passed: bool) {
        self.tests += 1;
        if cheated {
            self.cheated_tests += 1;
            self.cheated_by_kind[kind_index(kind)] += 1;
            if !passed {
                self.cheated_tests_failed += 1;
                self.failed_by_kind[kind_index(kind)] += 1;
            }
        } else if !passed {
            self.honest_tests_failed += 1;
        }
    }
}

pub(crate) fn kind_index(kind: TestKind) -> usize {
    match kind {
        TestKind::L => 0,
        TestKind::V => 1,
        TestKind::N => 2,
    }
}

/// Confusion counts over many sessions. A session that cheated at least
/// once is a positive; flagged sessions are detections.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DetectionOutcome {
    pub trials: u64,
    pub true_pos: u64,
    pub false_neg: u64,
    pub true_neg: u64,
    pub false_pos: u64,
    /// Sessions where a test answered on `D*` failed.
    pub detected: u64,
    pub cheated_tests: u64,
    pub cheated_tests_failed: u64,
    pub cheated_by_kind: [u64; 3],
    pub failed_by_kind: [u64; 3],
}

impl DetectionOutcome {
    pub fn add(&mut self, r: &TrialRecord) {
        self.trials += 1;
        match (r.cheated(), r.flagged()) {
            (true, true) => self.true_pos += 1,
            (true, false) => self.false_neg += 1,
            (false, false) => self.true_neg += 1,
            (false, true) => self.false_pos += 1,
        }
        self.detected += u64::from(r.detected());
        self.cheated_tests += u64::from(r.cheated_tests);
        self.cheated_tests_failed += u64::from(r.cheated_tests_failed);
        for k in 0..3 {
            self.cheated_by_kind[k] += u64::from(r.cheated_by_kind[k]);
            self.failed_by_kind[k] += u64::from(r.failed_by_kind[k]);
        }
    }

    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a TrialRecord>) -> Self {
        let mut out = Self::default();
        for r in records {
            out.add(r);
        }
        out
    }

    /// `TP/(TP+FN)`; `None` when no session cheated.
    pub fn accuracy(&self) -> Option<f64> {
        let pos = self.true_pos + self.false_neg;
        (pos > 0).then(|| self.true_pos as f64 / pos as f64)
    }

    pub fn fp_rate(&self) -> Option<f64> {
        let neg = self.true_neg + self.false_pos;
        (neg > 0).then(|| self.false_pos as f64 / neg as f64)
    }

    /// Fraction of sessions where cheating itself was caught.
    pub fn detection_freq(&self) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        self.detected as f64 / self.trials as f64
    }

    /// Measured probability that a test answered on `D*` fails.
    pub fn p_d_hat(&self) -> Option<f64> {
        (self.cheated_tests > 0)
            .then(|| self.cheated_tests_failed as f64 / self.cheated_tests as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synth_dataset;
    use crate::seed::Seed;

    #[test]
    fn parse_and_display() {
        assert_eq!(CheatKind::parse("honest").unwrap(), CheatKind::Honest);
        assert_eq!(
            CheatKind::parse("modify:0.2").unwrap(),
            CheatKind::Modify(0.2)
        );
        assert_eq!(CheatKind::parse("add:1.5").unwrap(), CheatKind::Add(1.5));
        assert!(CheatKind::parse("modify:1.5").is_err());
        assert!(CheatKind::parse("swap:0.1").is_err());
        assert!(CheatKind::parse("add:-1").is_err());
        assert_eq!(
            CheatKind::parse(&CheatKind::Modify(0.05).to_string()).unwrap(),
            CheatKind::Modify(0.05)
        );
        assert_eq!(CheatKind::Modify(0.29).fake_labels(100), 29);
    }

    #[test]
    fn fake_sizes() {
        let ds = synth_dataset(100, 400, Seed(3)).unwrap();
        let mut rng = Seed(1).rng();
        let m = fake_dataset(&ds, CheatKind::Modify(0.2), &mut rng).unwrap();
        assert_eq!(m.len(), 100);
        assert_eq!(ds.labels().iter().filter(|l| m.contains(**l)).count(), 80);
        let a = fake_dataset(&ds, CheatKind::Add(0.5), &mut rng).unwrap();
        assert_eq!(a.len(), 150);
        assert!(ds.labels().iter().all(|l| a.contains(*l)));
        assert_eq!(fake_dataset(&ds, CheatKind::Honest, &mut rng).unwrap(), ds);
        assert!(fake_dataset(&ds, CheatKind::Add(3.5), &mut rng).is_err());
    }

    #[test]
    fn plans() {
        let mut rng = Seed(2).rng();
        let p = CheatPlan::Forced { x: 7 }.positions(20, &mut rng).unwrap();
        assert_eq!(p.iter().filter(|b| **b).count(), 7);
        assert!(CheatPlan::Forced { x: 21 }.positions(20, &mut rng).is_err());
        assert!(CheatPlan::Independent { p_c: 0.0 }
            .positions(20, &mut rng)
            .unwrap()
            .iter()
            .all(|b| !b));
        assert!(CheatStrategy::honest().is_honest());
    }

    #[test]
    fn outcome_counts() {
        let mut o = DetectionOutcome::default();
        let mut r = TrialRecord {
            cheated_answers: 1,
            ..Default::default()
        };
        r.record_test(TestKind::L, true, false);
        o.add(&r);
        o.add(&TrialRecord {
            cheated_answers: 2,
            ..Default::default()
        });
        o.add(&TrialRecord::default());
        let mut fp = TrialRecord::default();
        fp.record_test(TestKind::N, false, false);
        o.add(&fp);
        assert_eq!(
            (o.true_pos, o.false_neg, o.true_neg, o.false_pos),
            (1, 1, 1, 1)
        );
        assert_eq!(o.trials, 4);
        assert_eq!(o.accuracy(), Some(0.5));
        assert_eq!(o.fp_rate(), Some(0.5));
        assert_eq!(o.p_d_hat(), Some(1.0));
        assert_eq!(o.detection_freq(), 0.25);
        assert_eq!(DetectionOutcome::default().accuracy(), None);
    }
}
