//! Batch experiments and self-checks for the recognizer.

pub mod selfcheck;

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use bncn_core::arith::ExponentTable;
use bncn_core::groups::GroupDescriptor;
use bncn_core::recognizer::{verify_witness, Answer, Recognizer, RecognizerConfig, TestVerdict, WitnessRecord};
use bncn_core::{Error, FieldSpec, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use selfcheck::{self_check, CheckLevel, CheckResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Full test with shortcuts.
    Test,
    /// Plain test without shortcuts.
    Plain,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "test" => Ok(Mode::Test),
            "plain" => Ok(Mode::Plain),
            _ => Err(Error::Parse(format!("unknown mode {s:?}, expected test or plain"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Test => "test",
            Mode::Plain => "plain",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub group: GroupDescriptor,
    pub mode: Mode,
    pub trials: usize,
    pub effort: usize,
    pub seed: u64,
    /// Worker threads; 0 uses all cores.
    pub jobs: usize,
    /// Include full witness matrices in the records.
    pub dump_witness: bool,
    pub verify_invariants: bool,
}

impl ExperimentConfig {
    pub fn new(group: GroupDescriptor, mode: Mode, trials: usize, seed: u64) -> Self {
        ExperimentConfig {
            group,
            mode,
            trials,
            effort: 2,
            seed,
            jobs: 1,
            dump_witness: false,
            verify_invariants: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.effort == 0 {
            return Err(Error::InvalidConfig("effort must be at least 1".into()));
        }
        if self.group.n < 3 {
            return Err(Error::InvalidConfig(format!("rank n = {} must be at least 3", self.group.n)));
        }
        FieldSpec::from_order(self.group.q)?;
        Ok(())
    }

    fn recognizer_config(&self) -> RecognizerConfig {
        RecognizerConfig {
            effort: self.effort,
            verify_invariants: self.verify_invariants,
            ..Default::default()
        }
    }
}

/// Seed of trial `index` derived from the master seed (splitmix64 finalizer).
pub fn trial_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorClass {
    SamplingFailure,
    Invariant,
    Other,
}

impl ErrorClass {
    fn of(e: &Error) -> Self {
        match e {
            Error::SamplingFailure(_) => ErrorClass::SamplingFailure,
            Error::Invariant(_) => ErrorClass::Invariant,
            _ => ErrorClass::Other,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub group: String,
    pub mode: Mode,
    #[serde(flatten)]
    pub verdict: Option<TestVerdict>,
    pub correct: Option<bool>,
    /// Whether the witness of a symplectic verdict replayed successfully.
    pub witness_verified: Option<bool>,
    pub witness: Option<WitnessRecord>,
    /// Largest products-of-conjugates value seen on an involution that had
    /// passed the centralizer filter.
    pub max_filtered_conj: Option<u32>,
    pub error_class: Option<ErrorClass>,
    pub error: Option<String>,
}

impl TrialRecord {
    /// A witness that failed replay or an invariant error.
    pub fn has_invariant_failure(&self) -> bool {
        self.witness_verified == Some(false) || self.error_class == Some(ErrorClass::Invariant)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AggregateStats {
    pub group: String,
    pub mode: Option<Mode>,
    pub trials: usize,
    pub correct: usize,
    pub wrong: usize,
    pub errors: BTreeMap<String, usize>,
    /// Wrong answers over all trials.
    pub error_rate: f64,
    pub mean_reruns: f64,
    /// Keyed by `answer:rule`.
    pub verdict_counts: BTreeMap<String, usize>,
    pub invariant_failures: usize,
}

impl AggregateStats {
    pub fn from_records(cfg: &ExperimentConfig, records: &[TrialRecord]) -> Self {
        let mut s = AggregateStats {
            group: cfg.group.to_string(),
            mode: Some(cfg.mode),
            trials: records.len(),
            ..Default::default()
        };
        let mut reruns = 0usize;
        let mut finished = 0usize;
        for r in records {
            if let Some(v) = &r.verdict {
                finished += 1;
                reruns += v.reruns;
                *s.verdict_counts.entry(format!("{}:{}", i32::from(v.answer), v.rule)).or_insert(0) += 1;
            }
            match r.correct {
                Some(true) => s.correct += 1,
                Some(false) => s.wrong += 1,
                None => {}
            }
            if let Some(c) = r.error_class {
                let key = serde_json::to_value(c).ok().and_then(|v| v.as_str().map(String::from));
                *s.errors.entry(key.unwrap_or_default()).or_insert(0) += 1;
            }
            if r.has_invariant_failure() {
                s.invariant_failures += 1;
            }
        }
        if s.trials > 0 {
            s.error_rate = s.wrong as f64 / s.trials as f64;
        }
        if finished > 0 {
            s.mean_reruns = reruns as f64 / finished as f64;
        }
        s
    }
}

#[derive(Clone, Debug)]
pub struct BatchReport {
    pub records: Vec<TrialRecord>,
    pub aggregate: AggregateStats,
    /// Wall time of each trial in seconds, by trial index.
    pub timings: Vec<f64>,
}

impl BatchReport {
    /// One JSON object per trial followed by `{"aggregate": ...}`. Contains
    /// no timing data, so equal configurations give equal bytes.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut w, r)?;
            writeln!(w)?;
        }
        serde_json::to_writer(&mut w, &serde_json::json!({ "aggregate": &self.aggregate }))?;
        writeln!(w)
    }

    pub fn write_timings<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (trial, secs) in self.timings.iter().enumerate() {
            serde_json::to_writer(&mut w, &serde_json::json!({ "trial": trial, "seconds": secs }))?;
            writeln!(w)?;
        }
        let mean = self.timings.iter().sum::<f64>() / self.timings.len().max(1) as f64;
        serde_json::to_writer(&mut w, &serde_json::json!({ "mean_seconds": mean }))?;
        writeln!(w)
    }

    pub fn jsonl_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("JSON is UTF-8")
    }
}

/// Runs one trial with its own group instance.
pub fn run_trial(cfg: &ExperimentConfig, table: &Arc<ExponentTable>, trial: usize) -> TrialRecord {
    let seed = trial_seed(cfg.seed, trial as u64);
    let mut rec = TrialRecord {
        trial,
        seed,
        group: cfg.group.to_string(),
        mode: cfg.mode,
        verdict: None,
        correct: None,
        witness_verified: None,
        witness: None,
        max_filtered_conj: None,
        error_class: None,
        error: None,
    };
    let outcome = (|| -> Result<()> {
        let mut group = cfg.group.build(seed)?;
        let mut recog = Recognizer::with_table(&mut group, table.clone(), cfg.recognizer_config())?;
        let result = match cfg.mode {
            Mode::Test => recog.test()?,
            Mode::Plain => recog.plain_test()?,
        };
        rec.max_filtered_conj = recog.probes().iter().filter(|p| p.is_filtered()).map(|p| p.conj).max();
        drop(recog);
        rec.correct = Some(result.verdict.answer == Answer::for_kind(cfg.group.kind));
        rec.verdict = Some(result.verdict);
        if let Some(w) = &result.witness {
            rec.witness_verified = Some(verify_witness(&group, table, w).is_ok());
            if cfg.dump_witness {
                rec.witness = Some(w.to_record());
            }
        } else if result.verdict.answer == Answer::Symplectic && matches!(result.verdict.rule, 1 | 13 | 14) {
            rec.witness_verified = Some(false);
        }
        Ok(())
    })();
    if let Err(e) = outcome {
        rec.error_class = Some(ErrorClass::of(&e));
        rec.error = Some(e.to_string());
    }
    rec
}

/// Runs `cfg.trials` independent trials, in parallel when `cfg.jobs != 1`.
/// Results do not depend on the number of jobs.
pub fn run_batch(cfg: &ExperimentConfig) -> Result<BatchReport> {
    cfg.validate()?;
    let field = FieldSpec::from_order(cfg.group.q)?;
    let table = Arc::new(ExponentTable::new(&field, cfg.group.kind.dim(cfg.group.n))?);
    let one = |i: usize| {
        let t = Instant::now();
        let r = run_trial(cfg, &table, i);
        (r, t.elapsed().as_secs_f64())
    };
    let results: Vec<(TrialRecord, f64)> = if cfg.jobs == 1 {
        (0..cfg.trials).map(one).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        pool.install(|| (0..cfg.trials).into_par_iter().map(one).collect())
    };
    let (records, timings): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let aggregate = AggregateStats::from_records(cfg, &records);
    Ok(BatchReport { records, aggregate, timings })
}
