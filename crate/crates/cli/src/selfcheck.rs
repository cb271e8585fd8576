use std::fmt;
use std::str::FromStr;

use bncn_core::arith::{divides_q_qpm1, factorize, primitive_divisor, ExponentTable};
use bncn_core::groups::{closure_size, commutator, ClassicalGroup, GroupDescriptor};
use bncn_core::recognizer::{minus_dim, verify_witness, Answer, CentraliserType, Recognizer, RecognizerConfig};
use bncn_core::{Error, FieldSpec, Matrix};
use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckLevel {
    Fast,
    Full,
}

impl FromStr for CheckLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "fast" => Ok(CheckLevel::Fast),
            "full" => Ok(CheckLevel::Full),
            _ => Err(Error::Parse(format!("unknown level {s:?}, expected fast or full"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn group(desc: &str, seed: u64) -> Result<ClassicalGroup, String> {
    desc.parse::<GroupDescriptor>()
        .and_then(|d| d.build(seed))
        .map_err(|e| e.to_string())
}

/// Order of `g` by repeated multiplication, or `None` past `cap`.
pub fn brute_force_order(g: &Matrix, cap: u64) -> Option<u64> {
    let mut x = g.clone();
    for o in 1..=cap {
        if x.is_identity() {
            return Some(o);
        }
        x = &x * g;
    }
    None
}

/// Product of the prime powers in `q^k - 1` whose primes divide no
/// `q^l - 1` with `l < k`, computed from a full factorization.
pub fn primitive_part_by_factoring(q: u64, k: u32) -> BigUint {
    let qb = BigUint::from(q);
    let value = qb.pow(k) - 1u32;
    let fac = factorize(&value).expect("small values factor quickly");
    let mut out = BigUint::one();
    for (r, a) in fac.factors() {
        let old = (1..k).any(|l| (qb.pow(l) - 1u32) % r == BigUint::zero());
        if !old {
            out *= r.pow(*a);
        }
    }
    out
}

fn field_axioms() -> Outcome {
    let f = FieldSpec::make_field(3, 2).map_err(|e| e.to_string())?;
    let q = f.q();
    for a in 0..q {
        if a != 0 {
            let inv = f.inv(a).ok_or("missing inverse")?;
            ensure(f.mul(a, inv) == 1, || format!("{a} * {inv} != 1"))?;
        }
        for b in 0..q {
            ensure(f.add(a, f.neg(a)) == 0, || format!("{a} + (-{a}) != 0"))?;
            ensure(f.mul(a, b) == f.mul(b, a), || format!("{a}*{b} not commutative"))?;
            for c in 0..q {
                let lhs = f.mul(a, f.add(b, c));
                let rhs = f.add(f.mul(a, b), f.mul(a, c));
                ensure(lhs == rhs, || format!("distributivity fails at {a},{b},{c}"))?;
            }
        }
    }
    Ok("GF(9) exhaustive".into())
}

fn generator_orders() -> Outcome {
    for q in [5u64, 7, 9, 11, 13, 25, 27, 125] {
        let f = FieldSpec::from_order(q).map_err(|e| e.to_string())?;
        let o = f.multiplicative_generator().multiplicative_order().map_err(|e| e.to_string())?;
        ensure(o == q - 1, || format!("GF({q}) generator has order {o}"))?;
    }
    Ok("q in {5,7,9,11,13,25,27,125}".into())
}

fn primitive_divisor_oracle(qs: &[u64], kmax: u32) -> Outcome {
    let mut n = 0;
    for &q in qs {
        for k in 1..=kmax {
            let a = primitive_divisor(q, k);
            let b = primitive_part_by_factoring(q, k);
            ensure(a == b, || format!("q={q} k={k}: cascade {a}, factoring {b}"))?;
            n += 1;
        }
    }
    Ok(format!("{n} (q,k) pairs agree"))
}

fn order_oracle(samples: usize) -> Outcome {
    let mut checked = 0;
    for desc in ["sp:2:5", "so:2:5", "sp:2:9"] {
        let mut g = group(desc, 17)?;
        let tab = ExponentTable::new(g.field(), g.dim()).map_err(|e| e.to_string())?;
        for _ in 0..samples {
            let x = g.random_element();
            let fast = tab.element_order(&x).map_err(|e| e.to_string())?;
            if let Some(slow) = brute_force_order(&x, 2000) {
                ensure(fast == BigUint::from(slow), || format!("{desc}: {fast} vs {slow}"))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} elements agree with brute force"))
}

fn matrix_inverse() -> Outcome {
    let mut g = group("so:3:9", 3)?;
    for _ in 0..50 {
        let x = g.random_element();
        let xi = x.inverse().map_err(|e| e.to_string())?;
        ensure((&x * &xi).is_identity(), || "x * x^-1 != I".into())?;
        ensure(x.det().code() == 1, || "SO element with det != 1".into())?;
    }
    Ok("50 elements of SO(7,9)".into())
}

fn form_preservation() -> Outcome {
    for desc in ["sp:3:5", "so:3:5", "sp:2:9", "so:3:7"] {
        let mut g = group(desc, 5)?;
        for _ in 0..100 {
            let x = g.random_element();
            let c = g.random_commutator();
            ensure(g.is_member(&x) && g.is_member(&c), || format!("{desc}: element left the group"))?;
        }
    }
    Ok("random elements and commutators of 4 groups".into())
}

fn group_determinism() -> Outcome {
    let mut a = group("sp:3:7", 99)?;
    let mut b = group("sp:3:7", 99)?;
    for _ in 0..50 {
        ensure(a.random_element() == b.random_element(), || "streams differ".into())?;
    }
    Ok("50 elements equal".into())
}

fn centraliser_contract() -> Outcome {
    for desc in ["sp:4:5", "so:4:5"] {
        let mut g = group(desc, 8)?;
        let cfg = RecognizerConfig { verify_invariants: true, ..Default::default() };
        let mut r = Recognizer::new(&mut g, cfg).map_err(|e| e.to_string())?;
        let (j, _) = r.critical_involution().map_err(|e| e.to_string())?;
        let ji = j.inverse().map_err(|e| e.to_string())?;
        for _ in 0..100 {
            let z = r.in_centraliser(&j).map_err(|e| e.to_string())?;
            let zi = z.inverse().map_err(|e| e.to_string())?;
            let c = &(&(&ji * &zi) * &j) * &z;
            ensure(c.is_scalar().is_some(), || format!("{desc}: [j,z] not scalar"))?;
        }
    }
    Ok("100 samples each in Sp(8,5), SO(9,5)".into())
}

fn witness_replay(seeds: u64) -> Outcome {
    let mut replayed = 0;
    for desc in ["sp:3:5", "sp:4:5", "sp:5:5"] {
        for seed in 0..seeds {
            let mut g = group(desc, seed)?;
            let mut r = Recognizer::new(&mut g, RecognizerConfig::default()).map_err(|e| e.to_string())?;
            let table = r.table().clone();
            let v = r.test().map_err(|e| e.to_string())?;
            if let Some(w) = &v.witness {
                verify_witness(&g, &table, w).map_err(|e| format!("{desc} seed {seed}: {e}"))?;
                replayed += 1;
            } else if v.verdict.answer == Answer::Symplectic && matches!(v.verdict.rule, 1 | 13) {
                return Err(format!("{desc} seed {seed}: symplectic verdict without witness"));
            }
        }
    }
    Ok(format!("{replayed} witnesses replayed"))
}

fn orthogonal_divisibility(desc: &str, samples: usize) -> Outcome {
    let mut g = group(desc, 21)?;
    let n = g.n();
    let mut r = Recognizer::new(&mut g, RecognizerConfig::default()).map_err(|e| e.to_string())?;
    for _ in 0..50 {
        let (j, t) = r.critical_involution().map_err(|e| e.to_string())?;
        if t != CentraliserType::BOTH || minus_dim(&j).map_err(|e| e.to_string())? != n {
            continue;
        }
        let rep = r.divisibility_probe(&j, samples).map_err(|e| e.to_string())?;
        ensure(rep.violations == 0, || format!("{} of {samples} orders violate", rep.violations))?;
        return Ok(format!("{desc}: {samples} products divide q(q+1) or q(q-1)"));
    }
    Err(format!("{desc}: no involution with full centralizer type found"))
}

fn recognizer_determinism() -> Outcome {
    for desc in ["sp:4:7", "so:4:7"] {
        let run = || -> Result<_, String> {
            let mut g = group(desc, 31)?;
            let mut r = Recognizer::new(&mut g, RecognizerConfig::default()).map_err(|e| e.to_string())?;
            r.test().map(|v| v.verdict).map_err(|e| e.to_string())
        };
        let (a, b) = (run()?, run()?);
        ensure(a == b, || format!("{desc}: {a:?} vs {b:?}"))?;
    }
    Ok("repeat runs agree".into())
}

fn closures() -> Outcome {
    let f = FieldSpec::make_field(5, 1).map_err(|e| e.to_string())?;
    let sp = ClassicalGroup::build_sp(1, &f, 1).map_err(|e| e.to_string())?;
    let so = ClassicalGroup::build_so(1, &f, 1).map_err(|e| e.to_string())?;
    let a = closure_size(sp.generators(), 10_000);
    let b = closure_size(so.generators(), 10_000);
    let mut with_minus = so.generators().to_vec();
    with_minus.push(Matrix::scalar(&f, 3, 4));
    let c = closure_size(&with_minus, 10_000);
    ensure(a == Some(120), || format!("|Sp(2,5)| = {a:?}"))?;
    ensure(b == Some(120), || format!("|SO(3,5)| = {b:?}"))?;
    ensure(c == Some(240), || format!("|O(3,5)| = {c:?}"))?;
    Ok("|Sp(2,5)| = 120, |SO(3,5)| = 120, |<SO(3,5), -I>| = 240".into())
}

fn commutator_closure() -> Outcome {
    let mut so = group("so:1:5", 4)?;
    let gens: Vec<Matrix> = (0..6).map(|_| so.random_commutator()).collect();
    let size = closure_size(&gens, 10_000);
    ensure(size.is_some_and(|s| 60 % s == 0), || format!("commutator closure {size:?}"))?;
    let x = so.random_element();
    let y = so.random_element();
    ensure(so.is_member(&commutator(&x, &y)), || "commutator left SO(3,5)".into())?;
    Ok(format!("commutators of SO(3,5) generate a group of order {}", size.unwrap_or(0)))
}

fn good_element_share(desc: &str, samples: usize) -> Outcome {
    let mut g = group(desc, 13)?;
    let n = g.n() as f64;
    let mut r = Recognizer::new(&mut g, RecognizerConfig::default()).map_err(|e| e.to_string())?;
    let mut good = 0;
    for _ in 0..samples {
        let x = r.random_perfect_element().map_err(|e| e.to_string())?;
        if r.is_good(&x).map_err(|e| e.to_string())? {
            good += 1;
        }
    }
    let p = 1.0 / (5.0 * n);
    let bound = p - 3.0 * (p * (1.0 - p) / samples as f64).sqrt();
    let share = good as f64 / samples as f64;
    ensure(share >= bound, || format!("{desc}: share {share:.4} < {bound:.4}"))?;
    Ok(format!("{desc}: share {share:.4} >= {bound:.4}"))
}

fn divisibility_helper() -> Outcome {
    let q = 5;
    let ok = [1u32, 2, 4, 5, 6, 10, 20, 30].iter().all(|&o| divides_q_qpm1(&BigUint::from(o), q));
    let bad = [7u32, 31, 8, 25].iter().any(|&o| divides_q_qpm1(&BigUint::from(o), q));
    ensure(ok && !bad, || "divisibility test wrong for q = 5".into())?;
    Ok("q = 5 table".into())
}

/// Runs the named invariant checks. `Full` adds brute-force closures,
/// larger oracle grids and statistical checks.
pub fn self_check(level: CheckLevel) -> Vec<CheckResult> {
    let mut checks: Vec<(&'static str, Box<dyn Fn() -> Outcome>)> = vec![
        ("gf.field_axioms", Box::new(field_axioms)),
        ("gf.generator_order", Box::new(generator_orders)),
        ("matrix.inverse", Box::new(matrix_inverse)),
        ("arith.primitive_divisor_oracle", Box::new(|| primitive_divisor_oracle(&[5, 7, 9], 12))),
        ("arith.divides_q_qpm1", Box::new(divisibility_helper)),
        ("arith.element_order_oracle", Box::new(|| order_oracle(60))),
        ("groups.form_preservation", Box::new(form_preservation)),
        ("groups.determinism", Box::new(group_determinism)),
        ("recognizer.centraliser_contract", Box::new(centraliser_contract)),
        ("recognizer.witness_replay", Box::new(|| witness_replay(3))),
        ("recognizer.orthogonal_divisibility", Box::new(|| orthogonal_divisibility("so:4:5", 50))),
        ("recognizer.determinism", Box::new(recognizer_determinism)),
    ];
    if level == CheckLevel::Full {
        checks.extend([
            ("groups.closure_sizes", Box::new(closures) as Box<dyn Fn() -> Outcome>),
            ("groups.commutator_closure", Box::new(commutator_closure)),
            (
                "arith.primitive_divisor_oracle_wide",
                Box::new(|| primitive_divisor_oracle(&[5, 7, 9, 11, 13, 25, 27], 12)),
            ),
            ("arith.element_order_oracle_wide", Box::new(|| order_oracle(500))),
            ("recognizer.witness_replay_wide", Box::new(|| witness_replay(10))),
            (
                "recognizer.orthogonal_divisibility_wide",
                Box::new(|| orthogonal_divisibility("so:5:5", 200)),
            ),
            ("recognizer.good_element_share", Box::new(|| good_element_share("sp:3:5", 2000))),
        ]);
    }
    checks
        .into_iter()
        .map(|(name, f)| {
            let (passed, detail) = match std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)) {
                Ok(Ok(d)) => (true, d),
                Ok(Err(d)) => (false, d),
                Err(_) => (false, "panicked".into()),
            };
            CheckResult { name, passed, detail }
        })
        .collect()
}
