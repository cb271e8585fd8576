//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p bncn-cli --test acceptance -- --nocapture` to see
//! the report.

use std::sync::Arc;
use std::time::{Duration, Instant};

use bncn_cli::selfcheck::{brute_force_order, primitive_part_by_factoring};
use bncn_cli::{run_batch, run_trial, BatchReport, ExperimentConfig, Mode};
use bncn_core::arith::{primitive_divisor, ExponentTable};
use bncn_core::groups::{closure_size, ClassicalGroup, GroupDescriptor, GroupKind};
use bncn_core::recognizer::{minus_dim, Answer, CentraliserType, Recognizer, RecognizerConfig, Witness};
use bncn_core::{FieldSpec, Matrix};
use num_bigint::BigUint;

const GRID: [(usize, u64); 8] = [(3, 5), (4, 5), (5, 5), (6, 5), (3, 7), (4, 7), (3, 9), (4, 9)];
const TRIALS_PER_CONFIG: usize = 30;
/// Plain-mode rates sit close to their tolerance, where 30 trials per
/// configuration give a standard error of about 0.8%. Trial seeds depend
/// only on (master seed, index), so the first 30 plain trials are exactly
/// the 30-trial grid and are reported alongside.
const PLAIN_TRIALS_PER_CONFIG: usize = 100;
const MASTER_SEED: u64 = 20_011_001;

const MAX_TEST_ERROR_RATE: f64 = 0.02;
const MAX_PLAIN_ERROR_RATE_SP: f64 = 0.02;
const MAX_PLAIN_ERROR_RATE_SO: f64 = 0.05;
const GOOD_SHARE_SAMPLES: usize = 2000;
const GOOD_SHARE_SIGMAS: f64 = 3.0;
const DIVISIBILITY_SAMPLES: usize = 200;
const MAX_ORTHOGONAL_CONJ: u32 = 6;
const ORDER_SAMPLES: usize = 500;
const ORDER_CAP: u64 = 2000;
const GRID_BUDGET: Duration = Duration::from_secs(600);

struct Report {
    lines: Vec<(bool, String)>,
}

impl Report {
    fn record(&mut self, id: usize, passed: bool, detail: String) {
        let line = format!("criterion {id}: {} {detail}", if passed { "PASS" } else { "FAIL" });
        println!("{line}");
        self.lines.push((passed, line));
    }
}

fn descriptors() -> Vec<GroupDescriptor> {
    [GroupKind::Symplectic, GroupKind::Orthogonal]
        .into_iter()
        .flat_map(|kind| GRID.iter().map(move |&(n, q)| GroupDescriptor { kind, n, q }))
        .collect()
}

fn run_grid(mode: Mode, trials: usize, jobs: usize) -> Vec<(ExperimentConfig, BatchReport)> {
    descriptors()
        .into_iter()
        .map(|d| {
            let mut cfg = ExperimentConfig::new(d, mode, trials, MASTER_SEED);
            cfg.jobs = jobs;
            cfg.dump_witness = true;
            let report = run_batch(&cfg).expect("grid configuration is valid");
            (cfg, report)
        })
        .collect()
}

fn one_sidedness(report: &mut Report, grid: &[(ExperimentConfig, BatchReport)]) {
    let mut checked = 0;
    let mut violations = Vec::new();
    for (cfg, batch) in grid {
        for r in &batch.records {
            let Some(v) = r.verdict else { continue };
            let witnessed = v.answer == Answer::Symplectic && matches!(v.rule, 1 | 13);
            if !witnessed {
                continue;
            }
            match cfg.group.kind {
                GroupKind::Orthogonal => violations.push(format!("{} trial {}: rule {} symplectic", r.group, r.trial, v.rule)),
                GroupKind::Symplectic => {
                    checked += 1;
                    let need = Witness::required_pdrank(v.rule, cfg.group.n);
                    let ok = r.witness_verified == Some(true) && r.witness.as_ref().is_some_and(|w| w.pdrank >= need);
                    if !ok {
                        violations.push(format!("{} trial {}: witness missing or not replayable", r.group, r.trial));
                    }
                }
            }
        }
    }
    report.record(
        1,
        violations.is_empty(),
        format!("{checked} witnessed symplectic verdicts replayed, {} violations (tolerance 0) {violations:?}", violations.len()),
    );
}

/// (wrong + errored, trials) over the first `limit` trials of each
/// configuration of the given kind.
fn error_count(grid: &[(ExperimentConfig, BatchReport)], kind: Option<GroupKind>, limit: usize) -> (usize, usize) {
    let mut bad = 0;
    let mut trials = 0;
    for (cfg, batch) in grid {
        if kind.is_some_and(|k| k != cfg.group.kind) {
            continue;
        }
        for r in batch.records.iter().take(limit) {
            trials += 1;
            if r.correct != Some(true) {
                bad += 1;
            }
        }
    }
    (bad, trials)
}

fn accuracy(report: &mut Report, test_grid: &[(ExperimentConfig, BatchReport)], plain_grid: &[(ExperimentConfig, BatchReport)]) {
    let rate = |(bad, n): (usize, usize)| (bad, n, bad as f64 / n as f64);
    let (tb, tn, rt) = rate(error_count(test_grid, None, usize::MAX));
    let (sb, sn, rs) = rate(error_count(plain_grid, Some(GroupKind::Symplectic), usize::MAX));
    let (ob, on, ro) = rate(error_count(plain_grid, Some(GroupKind::Orthogonal), usize::MAX));
    let (sb30, sn30, rs30) = rate(error_count(plain_grid, Some(GroupKind::Symplectic), TRIALS_PER_CONFIG));
    let (ob30, on30, ro30) = rate(error_count(plain_grid, Some(GroupKind::Orthogonal), TRIALS_PER_CONFIG));
    let passed = rt <= MAX_TEST_ERROR_RATE && rs <= MAX_PLAIN_ERROR_RATE_SP && ro <= MAX_PLAIN_ERROR_RATE_SO;
    report.record(
        2,
        passed,
        format!(
            "test {tb}/{tn} = {rt:.4} (<= {MAX_TEST_ERROR_RATE}); plain sp {sb}/{sn} = {rs:.4} (<= {MAX_PLAIN_ERROR_RATE_SP}); \
             plain so {ob}/{on} = {ro:.4} (<= {MAX_PLAIN_ERROR_RATE_SO}); first {TRIALS_PER_CONFIG} plain trials per \
             configuration: sp {sb30}/{sn30} = {rs30:.4}, so {ob30}/{on30} = {ro30:.4}"
        ),
    );
}

fn good_share(report: &mut Report) {
    let mut parts = Vec::new();
    let mut passed = true;
    for n in [3usize, 4] {
        let f = FieldSpec::make_field(5, 1).unwrap();
        let mut g = ClassicalGroup::build_sp(n, &f, 77).unwrap();
        let mut r = Recognizer::new(&mut g, RecognizerConfig::default()).unwrap();
        let mut good = 0;
        for _ in 0..GOOD_SHARE_SAMPLES {
            let x = r.random_perfect_element().unwrap();
            if r.is_good(&x).unwrap() {
                good += 1;
            }
        }
        let p = 1.0 / (5.0 * n as f64);
        let bound = p - GOOD_SHARE_SIGMAS * (p * (1.0 - p) / GOOD_SHARE_SAMPLES as f64).sqrt();
        let share = good as f64 / GOOD_SHARE_SAMPLES as f64;
        passed &= share >= bound;
        parts.push(format!("Sp({},5) share {share:.4} >= {bound:.4}", 2 * n));
    }
    report.record(3, passed, parts.join("; "));
}

fn divisibility(report: &mut Report) {
    let mut parts = Vec::new();
    let mut passed = true;
    for n in [3usize, 4] {
        let f = FieldSpec::make_field(5, 1).unwrap();
        let mut g = ClassicalGroup::build_so(n, &f, 5).unwrap();
        let mut r = Recognizer::new(&mut g, RecognizerConfig::default()).unwrap();
        let mut found = None;
        for _ in 0..100 {
            let (j, t) = r.critical_involution().unwrap();
            if t == CentraliserType::BOTH && minus_dim(&j).unwrap() == n {
                found = Some(j);
                break;
            }
        }
        match found {
            Some(j) => {
                let rep = r.divisibility_probe(&j, DIVISIBILITY_SAMPLES).unwrap();
                passed &= rep.violations == 0;
                let max = rep.orders.iter().max().cloned().unwrap_or_default();
                parts.push(format!(
                    "SO({},5): {} violations in {DIVISIBILITY_SAMPLES} (max order {max})",
                    2 * n + 1,
                    rep.violations
                ));
            }
            None => {
                passed = false;
                parts.push(format!("SO({},5): no involution with type [1,2] and full -1 space", 2 * n + 1));
            }
        }
    }
    report.record(4, passed, parts.join("; "));
}

fn ppd_bound(report: &mut Report, grid: &[(ExperimentConfig, BatchReport)]) {
    let mut max = 0;
    let mut observed = 0;
    for (cfg, batch) in grid {
        if cfg.group.kind != GroupKind::Orthogonal {
            continue;
        }
        for r in &batch.records {
            if let Some(c) = r.max_filtered_conj {
                observed += 1;
                max = max.max(c);
            }
        }
    }
    report.record(
        5,
        max <= MAX_ORTHOGONAL_CONJ,
        format!("max over {observed} orthogonal trials with filtered involutions = {max} (<= {MAX_ORTHOGONAL_CONJ})"),
    );
}

fn oracles(report: &mut Report) {
    let mut parts = Vec::new();
    let mut passed = true;

    let mut checked_groups = 0;
    for desc in ["sp:2:5", "so:2:5", "sp:3:5", "so:2:7", "sp:2:9"] {
        let mut g = desc.parse::<GroupDescriptor>().unwrap().build(3).unwrap();
        let tab = ExponentTable::new(g.field(), g.dim()).unwrap();
        let mut agree = 0;
        let mut tries = 0;
        while agree < ORDER_SAMPLES && tries < 20 * ORDER_SAMPLES {
            tries += 1;
            let x = g.random_element();
            if let Some(o) = brute_force_order(&x, ORDER_CAP) {
                if tab.element_order(&x).unwrap() != BigUint::from(o) {
                    passed = false;
                    parts.push(format!("{desc}: order mismatch"));
                    break;
                }
                agree += 1;
            }
        }
        if agree < ORDER_SAMPLES {
            passed = false;
            parts.push(format!("{desc}: only {agree} elements of order <= {ORDER_CAP}"));
        }
        checked_groups += 1;
    }
    parts.push(format!("element orders agree on {ORDER_SAMPLES} elements in each of {checked_groups} groups"));

    let mut pairs = 0;
    for q in [5u64, 7, 9] {
        for k in 1..=12 {
            if primitive_divisor(q, k) != primitive_part_by_factoring(q, k) {
                passed = false;
                parts.push(format!("primitive divisor mismatch q={q} k={k}"));
            }
            pairs += 1;
        }
    }
    parts.push(format!("primitive divisors agree on {pairs} pairs"));

    let f = FieldSpec::make_field(5, 1).unwrap();
    let sp = closure_size(ClassicalGroup::build_sp(1, &f, 0).unwrap().generators(), 1000);
    let so_gens = ClassicalGroup::build_so(1, &f, 0).unwrap().generators().to_vec();
    let so = closure_size(&so_gens, 1000);
    let mut o_gens = so_gens.clone();
    o_gens.push(Matrix::scalar(&f, 3, 4));
    let full_orthogonal = closure_size(&o_gens, 1000);
    passed &= sp == Some(120) && so == Some(120) && full_orthogonal == Some(240);
    parts.push(format!(
        "|Sp(2,5)| = {sp:?} (120), |SO(3,5)| = {so:?} (q(q^2-1) = 120), |<SO(3,5), -I>| = |O(3,5)| = {full_orthogonal:?} (240)"
    ));
    report.record(6, passed, parts.join("; "));
}

fn determinism(report: &mut Report, grid: &[(ExperimentConfig, BatchReport)]) {
    let mut replayed = 0;
    let mut mismatches = 0;
    for (cfg, batch) in grid {
        let field = FieldSpec::from_order(cfg.group.q).unwrap();
        let table = Arc::new(ExponentTable::new(&field, cfg.group.kind.dim(cfg.group.n)).unwrap());
        for trial in [0, TRIALS_PER_CONFIG / 2, TRIALS_PER_CONFIG - 1] {
            let again = run_trial(cfg, &table, trial);
            let a = serde_json::to_string(&again).unwrap();
            let b = serde_json::to_string(&batch.records[trial]).unwrap();
            replayed += 1;
            if a != b {
                mismatches += 1;
            }
        }
    }
    let (cfg, batch) = &grid[1];
    let mut parallel = cfg.clone();
    parallel.jobs = 4;
    let same_parallel = run_batch(&parallel).unwrap().jsonl_string() == batch.jsonl_string();
    report.record(
        7,
        mismatches == 0 && same_parallel,
        format!("{replayed} replayed trials, {mismatches} byte differences; 4-thread rerun of {} identical: {same_parallel}", cfg.group),
    );
}

#[test]
fn acceptance() {
    let mut report = Report { lines: Vec::new() };

    let started = Instant::now();
    let test_grid = run_grid(Mode::Test, TRIALS_PER_CONFIG, 1);
    let grid_time = started.elapsed();
    let plain_grid = run_grid(Mode::Plain, PLAIN_TRIALS_PER_CONFIG, 0);

    one_sidedness(&mut report, &test_grid);
    accuracy(&mut report, &test_grid, &plain_grid);
    good_share(&mut report);
    divisibility(&mut report);
    ppd_bound(&mut report, &test_grid);
    oracles(&mut report);
    determinism(&mut report, &test_grid);

    let within = grid_time <= GRID_BUDGET;
    let line = format!(
        "runtime: {} single-threaded test grid of {} trials took {:.1}s (<= {}s)",
        if within { "PASS" } else { "FAIL" },
        test_grid.len() * TRIALS_PER_CONFIG,
        grid_time.as_secs_f64(),
        GRID_BUDGET.as_secs()
    );
    println!("{line}");
    report.lines.push((within, line));

    let failed: Vec<&String> = report.lines.iter().filter(|(ok, _)| !ok).map(|(_, l)| l).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:#?}");
}
