//! One-sided Monte-Carlo test deciding whether a group given by generators
//! is Sp(2n,q) (symplectic) or SO(2n+1,q) (orthogonal), for odd q > 3.
//!
//! The recognizer only multiplies, inverts and compares group elements,
//! computes element orders, and tests whether a matrix is scalar. It looks
//! at the group kind in exactly three places, all of which describe how the
//! matrix realization differs from the abstract simple group:
//!
//! * random elements of the perfect subgroup are commutators for SO,
//! * the 2-part of a maximal torus order is halved for SO,
//! * only Sp has a central involution, so only there are pseudo-involutions
//!   of order 4 needed.
//!
//! A symplectic verdict with rule 1, 13 or 14 carries a [`Witness`]: a
//! pseudo-involution `j` and a conjugator `x` such that the order of
//! `j·jˣ` has a large primitive prime divisor. Such a pair cannot occur in
//! the orthogonal group, and [`verify_witness`] re-checks it from scratch.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{divides_q_qpm1, even_part, ExponentTable};
use crate::error::{Error, Result};
use crate::gf::FieldSpec;
use crate::groups::{conjugate, ClassicalGroup, GroupKind};
use crate::matrix::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "i32", try_from = "i32")]
pub enum Answer {
    Symplectic,
    Orthogonal,
    Inconclusive,
}

impl From<Answer> for i32 {
    fn from(a: Answer) -> i32 {
        match a {
            Answer::Symplectic => 0,
            Answer::Orthogonal => 1,
            Answer::Inconclusive => -1,
        }
    }
}

impl TryFrom<i32> for Answer {
    type Error = String;

    fn try_from(v: i32) -> std::result::Result<Self, String> {
        match v {
            0 => Ok(Answer::Symplectic),
            1 => Ok(Answer::Orthogonal),
            -1 => Ok(Answer::Inconclusive),
            _ => Err(format!("answer must be 0, 1 or -1, got {v}")),
        }
    }
}

impl Answer {
    pub fn is_conclusive(self) -> bool {
        self != Answer::Inconclusive
    }

    /// The answer that is correct for a group of the given kind.
    pub fn for_kind(kind: GroupKind) -> Self {
        match kind {
            GroupKind::Symplectic => Answer::Symplectic,
            GroupKind::Orthogonal => Answer::Orthogonal,
        }
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Answer::Symplectic => "symplectic",
            Answer::Orthogonal => "orthogonal",
            Answer::Inconclusive => "inconclusive",
        })
    }
}

/// Answer, deciding rule, half the rank of `j - j²` for the deciding
/// pseudo-involution, and the number of reruns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TestVerdict {
    pub answer: Answer,
    pub rule: u8,
    pub minus_dim: usize,
    pub reruns: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecognizerConfig {
    /// Most random searches make `effort * n` attempts.
    pub effort: usize,
    /// Cap on reruns of an inconclusive pre-test in [`Recognizer::test`];
    /// `None` means `20 n`.
    pub max_reruns: Option<usize>,
    /// Cap on the sampling loops that terminate only almost surely;
    /// `None` means `200 n`.
    pub attempt_cap: Option<usize>,
    /// Check centralizer and membership invariants on every sample, even in
    /// release builds.
    pub verify_invariants: bool,
}

impl Default for RecognizerConfig {
    fn default() -> Self {
        RecognizerConfig {
            effort: 2,
            max_reruns: None,
            attempt_cap: None,
            verify_invariants: false,
        }
    }
}

impl RecognizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.effort == 0 {
            return Err(Error::InvalidConfig("effort must be at least 1".into()));
        }
        if self.attempt_cap == Some(0) {
            return Err(Error::InvalidConfig("attempt cap must be at least 1".into()));
        }
        Ok(())
    }

    pub fn max_reruns_for(&self, n: usize) -> usize {
        self.max_reruns.unwrap_or(20 * n)
    }

    pub fn attempt_cap_for(&self, n: usize) -> usize {
        self.attempt_cap.unwrap_or(200 * n)
    }
}

/// Which large tori were seen in a centralizer: marker 1 for an element
/// whose order has a primitive prime divisor of `q^(n-1) - 1`, marker 2
/// for `q^(n-1) + 1` (pdrank `2(n-1)`).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "Vec<u8>", try_from = "Vec<u8>")]
pub struct CentraliserType {
    pub minus_torus: bool,
    pub plus_torus: bool,
}

impl CentraliserType {
    pub const EMPTY: Self = CentraliserType { minus_torus: false, plus_torus: false };
    pub const MINUS: Self = CentraliserType { minus_torus: true, plus_torus: false };
    pub const PLUS: Self = CentraliserType { minus_torus: false, plus_torus: true };
    pub const BOTH: Self = CentraliserType { minus_torus: true, plus_torus: true };

    pub fn is_empty(&self) -> bool {
        !self.minus_torus && !self.plus_torus
    }

    pub fn markers(&self) -> Vec<u8> {
        let mut m = Vec::new();
        if self.minus_torus {
            m.push(1);
        }
        if self.plus_torus {
            m.push(2);
        }
        m
    }
}

impl From<CentraliserType> for Vec<u8> {
    fn from(t: CentraliserType) -> Vec<u8> {
        t.markers()
    }
}

impl TryFrom<Vec<u8>> for CentraliserType {
    type Error = String;

    fn try_from(v: Vec<u8>) -> std::result::Result<Self, String> {
        let mut t = CentraliserType::EMPTY;
        for m in v {
            match m {
                1 => t.minus_torus = true,
                2 => t.plus_torus = true,
                _ => return Err(format!("centralizer marker must be 1 or 2, got {m}")),
            }
        }
        Ok(t)
    }
}

impl fmt::Display for CentraliserType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m: Vec<String> = self.markers().iter().map(u8::to_string).collect();
        write!(f, "[{}]", m.join(","))
    }
}

/// A pseudo-involution `j` and conjugator `x` with `o(j·jˣ)` divisible by
/// a primitive prime divisor of `q^k - 1` for `k = pdrank`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub rule: u8,
    pub involution: Matrix,
    pub conjugator: Matrix,
    pub product_order: BigUint,
    pub pdrank: u32,
}

/// Text form of a [`Witness`] for JSON output.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub rule: u8,
    pub field: String,
    pub involution: String,
    pub conjugator: String,
    pub product_order: String,
    pub pdrank: u32,
}

impl Witness {
    /// Smallest pdrank that rules out the orthogonal group for this rule.
    pub fn required_pdrank(rule: u8, n: usize) -> u32 {
        if n == 3 && (rule == 13 || rule == 14) {
            3
        } else {
            8
        }
    }

    pub fn to_record(&self) -> WitnessRecord {
        WitnessRecord {
            rule: self.rule,
            field: self.involution.field().to_string(),
            involution: self.involution.to_string(),
            conjugator: self.conjugator.to_string(),
            product_order: self.product_order.to_string(),
            pdrank: self.pdrank,
        }
    }

    pub fn from_record(rec: &WitnessRecord) -> Result<Self> {
        let field: FieldSpec = rec.field.parse()?;
        Ok(Witness {
            rule: rec.rule,
            involution: Matrix::parse(&field, &rec.involution)?,
            conjugator: Matrix::parse(&field, &rec.conjugator)?,
            product_order: rec
                .product_order
                .parse()
                .map_err(|_| Error::Parse(format!("bad order {:?}", rec.product_order)))?,
            pdrank: rec.pdrank,
        })
    }
}

/// A verdict together with the witness backing a symplectic answer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Recognition {
    pub verdict: TestVerdict,
    pub witness: Option<Witness>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeStage {
    /// Rank-3 branch: the involution comes straight from a good element.
    SmallRank,
    /// General branch: the involution passed the centralizer filter.
    Critical,
    Plain,
}

/// One call of [`Recognizer::products_of_conjugates`], as seen by the
/// verdict logic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub stage: ProbeStage,
    pub centraliser: Option<CentraliserType>,
    pub minus_dim: usize,
    pub conj: u32,
}

impl ProbeRecord {
    /// Whether the involution was known to have a centralizer containing a
    /// large torus element when the probe ran.
    pub fn is_filtered(&self) -> bool {
        self.centraliser.is_some_and(|t| !t.is_empty())
    }
}

/// Result of [`Recognizer::products_of_conjugates`].
#[derive(Clone, Debug)]
pub struct ConjugateProbe {
    pub max_pdrank: u32,
    /// First conjugator reaching `max_pdrank`, with the product order.
    pub best: Option<(Matrix, BigUint)>,
}

/// Orders of `j·jᵍ` for random `g`, with the count of those not dividing
/// `q(q+1)` or `q(q-1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivisibilityReport {
    pub orders: Vec<BigUint>,
    pub violations: usize,
}

/// `rank(j - j²) / 2`.
pub fn minus_dim(j: &Matrix) -> Result<usize> {
    let r = j.sub(&(j * j))?.rank();
    if r % 2 == 1 {
        return Err(Error::OddRank(r));
    }
    Ok(r / 2)
}

/// Runs the recognition procedures against one group instance.
///
/// The group's random element generator is advanced by every operation, so
/// results depend on the full call history since the group was built.
pub struct Recognizer<'g> {
    group: &'g mut ClassicalGroup,
    table: Arc<ExponentTable>,
    cfg: RecognizerConfig,
    probes: Vec<ProbeRecord>,
}

impl<'g> Recognizer<'g> {
    pub fn new(group: &'g mut ClassicalGroup, cfg: RecognizerConfig) -> Result<Self> {
        let table = Arc::new(ExponentTable::new(group.field(), group.dim())?);
        Self::with_table(group, table, cfg)
    }

    /// Reuse an exponent table built for the same field and dimension.
    pub fn with_table(
        group: &'g mut ClassicalGroup,
        table: Arc<ExponentTable>,
        cfg: RecognizerConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        if table.field() != group.field() {
            return Err(Error::FieldMismatch);
        }
        if table.dim() != group.dim() {
            return Err(Error::DimensionMismatch(table.dim(), group.dim()));
        }
        Ok(Recognizer { group, table, cfg, probes: Vec::new() })
    }

    pub fn group(&self) -> &ClassicalGroup {
        self.group
    }

    pub fn table(&self) -> &Arc<ExponentTable> {
        &self.table
    }

    pub fn config(&self) -> &RecognizerConfig {
        &self.cfg
    }

    pub fn probes(&self) -> &[ProbeRecord] {
        &self.probes
    }

    pub fn take_probes(&mut self) -> Vec<ProbeRecord> {
        std::mem::take(&mut self.probes)
    }

    fn n(&self) -> usize {
        self.group.n()
    }

    fn budget(&self) -> usize {
        self.cfg.effort * self.n()
    }

    fn checks_enabled(&self) -> bool {
        self.cfg.verify_invariants || cfg!(debug_assertions)
    }

    fn check_member(&self, g: &Matrix, what: &str) -> Result<()> {
        if self.cfg.verify_invariants && !self.group.is_member(g) {
            return Err(Error::Invariant(format!("{what} does not preserve the form")));
        }
        Ok(())
    }

    pub fn order(&self, g: &Matrix) -> Result<BigUint> {
        self.table.element_order(g)
    }

    /// pdrank with rank bound `2n`.
    pub fn pdrank_of_order(&self, order: &BigUint) -> u32 {
        self.table.pdrank(2 * self.n() as u32, order)
    }

    pub fn pdrank(&self, g: &Matrix) -> Result<u32> {
        Ok(self.pdrank_of_order(&self.order(g)?))
    }

    fn random_element(&mut self) -> Result<Matrix> {
        let g = self.group.random_element();
        self.check_member(&g, "random element")?;
        Ok(g)
    }

    /// Random element of Sp(2n,q) or Ω(2n+1,q).
    pub fn random_perfect_element(&mut self) -> Result<Matrix> {
        let g = self.group.random_perfect_element();
        self.check_member(&g, "random commutator")?;
        Ok(g)
    }

    /// 2-adic shift between torus orders of the matrix group and of the
    /// perfect subgroup the good elements live in.
    fn torus_two_shift(&self) -> u32 {
        match self.group.kind() {
            GroupKind::Symplectic => 0,
            GroupKind::Orthogonal => 1,
        }
    }

    fn has_central_involution(&self) -> bool {
        self.group.kind() == GroupKind::Symplectic
    }

    /// An element of `<g>` that is an involution modulo scalars, or the
    /// identity if there is none.
    pub fn pseudo_involution(&self, g: &Matrix) -> Result<Matrix> {
        let order = self.order(g)?;
        let id = Matrix::identity(self.group.field(), self.group.dim());
        if order.is_odd() {
            return Ok(id);
        }
        let half = &order >> 1u32;
        let i = g.pow(&half);
        // rank(i + i²) = 0, i.e. i = -I
        let central = i.add(&(&i * &i))?.rank() == 0;
        if central && self.has_central_involution() {
            if !(&order % 4u32).is_zero() {
                return Ok(id);
            }
            return Ok(g.pow(&(&order >> 2u32)));
        }
        Ok(i)
    }

    /// An element centralizing the pseudo-involution `j` modulo scalars,
    /// built from `y = j·jᵍ` for a random `g`.
    pub fn in_centraliser(&mut self, j: &Matrix) -> Result<Matrix> {
        let g = self.random_element()?;
        let y = j * &conjugate(j, &g)?;
        let o = self.order(&y)?;
        let j2 = j * j;
        let order_four = &j2 * &j2 != j2;
        let z = if order_four {
            match (&o % 4u32).to_u32().unwrap_or(0) {
                0 => {
                    if y.pow(&(&o >> 1u32)) == j2 {
                        y.pow(&(&o >> 2u32))
                    } else {
                        y.pow(&(&o >> 1u32))
                    }
                }
                2 => {
                    if y.pow(&(&o >> 1u32)) == j2 {
                        let e = ((&o >> 1u32) - 1u32) >> 1u32;
                        &g * &y.pow(&e)
                    } else {
                        j.clone()
                    }
                }
                _ => &g * &y.pow(&((&o - 1u32) >> 1u32)),
            }
        } else if o.is_even() {
            y.pow(&(&o >> 1u32))
        } else {
            &g * &y.pow(&((&o - 1u32) >> 1u32))
        };
        if self.checks_enabled() {
            let c = &(&(&j.inverse()? * &z.inverse()?) * j) * &z;
            if c.is_scalar().is_none() {
                return Err(Error::Invariant("centralizer sample does not commute with j".into()));
            }
        }
        self.check_member(&z, "centralizer sample")?;
        Ok(z)
    }

    /// Random walk in the centralizer of `j` looking for elements whose
    /// order has pdrank `n-1` or `2(n-1)`.
    pub fn type_of_centraliser(&mut self, j: &Matrix) -> Result<CentraliserType> {
        let n = self.n() as u32;
        let mut x = self.in_centraliser(j)?;
        let mut t = CentraliserType::EMPTY;
        let mut counter = 0;
        while t != CentraliserType::BOTH && counter < self.budget() {
            x = &x * &self.in_centraliser(j)?;
            let r = self.pdrank(&x)?;
            if r == n - 1 {
                t.minus_torus = true;
            }
            if r == 2 * (n - 1) {
                t.plus_torus = true;
            }
            counter += 1;
        }
        Ok(t)
    }

    /// Largest pdrank of `j·jˣ` over up to `effort·n` random `x`, stopping
    /// early once it reaches 8.
    pub fn products_of_conjugates(&mut self, j: &Matrix) -> Result<ConjugateProbe> {
        let mut probe = ConjugateProbe { max_pdrank: 0, best: None };
        let mut counter = 0;
        while probe.max_pdrank < 8 && counter < self.budget() {
            let x = self.random_perfect_element()?;
            let y = j * &conjugate(j, &x)?;
            let o = self.order(&y)?;
            let r = self.pdrank_of_order(&o);
            if r > probe.max_pdrank || probe.best.is_none() {
                probe.max_pdrank = r;
                probe.best = Some((x, o));
            }
            counter += 1;
        }
        Ok(probe)
    }

    /// Whether `g` lies in a maximal twisted torus of the perfect subgroup
    /// with maximal 2-height and pdrank `n` or `2n`.
    pub fn is_good(&self, g: &Matrix) -> Result<bool> {
        let n = self.n() as u32;
        let o = self.order(g)?;
        let r = self.pdrank_of_order(&o);
        let ep = even_part(&o)?;
        let qn = BigUint::from(self.group.q()).pow(n);
        let t = self.torus_two_shift();
        let minus = &qn - 1u32;
        if (&minus % 4u32).is_zero() {
            return Ok(r == n && ep == (even_part(&minus)? >> t));
        }
        let plus = &qn + 1u32;
        if (&plus % 4u32).is_zero() {
            return Ok(r == 2 * n && ep == (even_part(&plus)? >> t));
        }
        Err(Error::Invariant("q^n is neither 1 nor -1 modulo 4".into()))
    }

    pub fn good_element(&mut self) -> Result<Matrix> {
        let cap = self.cfg.attempt_cap_for(self.n());
        for _ in 0..cap {
            let g = self.random_perfect_element()?;
            if self.is_good(&g)? {
                return Ok(g);
            }
        }
        Err(Error::SamplingFailure(cap))
    }

    /// A pseudo-involution from a good element whose centralizer has a
    /// nonempty type.
    pub fn critical_involution(&mut self) -> Result<(Matrix, CentraliserType)> {
        let cap = self.cfg.attempt_cap_for(self.n());
        for _ in 0..cap {
            let x = self.good_element()?;
            let j = self.pseudo_involution(&x)?;
            if j.is_identity() {
                continue;
            }
            let t = self.type_of_centraliser(&j)?;
            if !t.is_empty() {
                return Ok((j, t));
            }
        }
        Err(Error::SamplingFailure(cap))
    }

    fn nontrivial_pseudo_involution(&mut self) -> Result<Matrix> {
        let cap = self.cfg.attempt_cap_for(self.n());
        for _ in 0..cap {
            let g = self.good_element()?;
            let j = self.pseudo_involution(&g)?;
            if !j.is_identity() {
                return Ok(j);
            }
        }
        Err(Error::SamplingFailure(cap))
    }

    fn log_probe(&mut self, stage: ProbeStage, centraliser: Option<CentraliserType>, md: usize, conj: u32) {
        self.probes.push(ProbeRecord { stage, centraliser, minus_dim: md, conj });
    }

    fn conclude(answer: Answer, rule: u8, j: &Matrix) -> Result<Recognition> {
        Ok(Recognition {
            verdict: TestVerdict { answer, rule, minus_dim: minus_dim(j)?, reruns: 0 },
            witness: None,
        })
    }

    fn conclude_with_witness(rule: u8, j: &Matrix, probe: ConjugateProbe, pdrank: u32) -> Result<Recognition> {
        let mut rec = Self::conclude(Answer::Symplectic, rule, j)?;
        if let Some((x, o)) = probe.best {
            rec.witness = Some(Witness {
                rule,
                involution: j.clone(),
                conjugator: x,
                product_order: o,
                pdrank,
            });
        }
        Ok(rec)
    }

    /// One run of the test with all shortcuts; may be inconclusive.
    pub fn pre_test(&mut self) -> Result<Recognition> {
        self.group.check_usable()?;
        let n = self.n();
        let q = self.group.q();

        if n == 3 {
            let j = self.nontrivial_pseudo_involution()?;
            let md = minus_dim(&j)?;
            let mut best = self.products_of_conjugates(&j)?;
            self.log_probe(ProbeStage::SmallRank, None, md, best.max_pdrank);
            let mut counter = 0;
            while best.max_pdrank < 3 && counter < self.budget() {
                let again = self.products_of_conjugates(&j)?;
                self.log_probe(ProbeStage::SmallRank, None, md, again.max_pdrank);
                if again.max_pdrank > best.max_pdrank {
                    best = again;
                }
                counter += 1;
            }
            let conj = best.max_pdrank;
            return if conj < 3 {
                Self::conclude(Answer::Orthogonal, 13, &j)
            } else {
                Self::conclude_with_witness(13, &j, best, conj)
            };
        }

        let (j, filter) = self.critical_involution()?;
        let md = minus_dim(&j)?;
        let probe = self.products_of_conjugates(&j)?;
        let conj = probe.max_pdrank;
        self.log_probe(ProbeStage::Critical, Some(filter), md, conj);
        if conj > 7 {
            return Self::conclude_with_witness(1, &j, probe, conj);
        }

        let t = self.type_of_centraliser(&j)?;
        let orth = |rule| Self::conclude(Answer::Orthogonal, rule, &j);
        if t == CentraliserType::BOTH && conj == 4 {
            return orth(2);
        }
        if n % 4 == 2 && q % 4 == 1 && t == CentraliserType::MINUS && conj == 6 {
            return orth(3);
        }
        if n % 4 == 2 && q % 4 == 3 && t == CentraliserType::PLUS && conj == 6 {
            return orth(4);
        }
        if n % 4 == 0 && t == CentraliserType::BOTH && conj < 3 {
            return orth(5);
        }
        if n % 2 == 1 && t == CentraliserType::BOTH && conj < 3 {
            return orth(6);
        }
        if n % 2 == 0 && t == CentraliserType::BOTH && conj < 3 {
            return self.sl2_probe(&j);
        }
        Self::conclude(Answer::Inconclusive, 11, &j)
    }

    /// Looks for a 2-element of the SL(2,q) factor that the centralizer of
    /// a symplectic involution of type t1 has and an orthogonal one lacks.
    fn sl2_probe(&mut self, j: &Matrix) -> Result<Recognition> {
        let n = self.n() as u32;
        let q = BigUint::from(self.group.q());
        let qn1 = q.pow(n - 1);
        let minus = !(even_part(&(&qn1 - 1u32))? % 4u32).is_zero();
        let plus = !(even_part(&(&qn1 + 1u32))? % 4u32).is_zero();
        if minus == plus {
            return Err(Error::Invariant("q^(n-1) is neither 1 nor -1 modulo 4".into()));
        }

        let mut x = self.in_centraliser(j)?;
        let mut order = BigUint::one();
        let mut evenpart = BigUint::one();
        for (active, target, rule) in [(minus, n - 1, 7u8), (plus, 2 * (n - 1), 8u8)] {
            if !active {
                continue;
            }
            let mut maxppd = 0;
            evenpart = BigUint::one();
            let mut counter = 0;
            let four = BigUint::from(4u32);
            while (maxppd != target || evenpart < four) && counter < 3 * self.budget() {
                x = &x * &self.in_centraliser(j)?;
                order = self.order(&x)?;
                maxppd = self.pdrank_of_order(&order);
                evenpart = even_part(&order)?;
                counter += 1;
            }
            if maxppd != target || evenpart < four {
                return Self::conclude(Answer::Orthogonal, rule, j);
            }
        }

        let y = x.pow(&(&order / &evenpart));
        let mut maxppd2 = 0;
        let mut counter = 0;
        while maxppd2 < 3 && counter < self.budget() {
            x = &x * &self.in_centraliser(j)?;
            let z = &y * &conjugate(&y, &x)?;
            maxppd2 = maxppd2.max(self.pdrank(&z)?);
            counter += 1;
        }
        if maxppd2 < 3 {
            Self::conclude(Answer::Symplectic, 9, j)
        } else {
            Self::conclude(Answer::Orthogonal, 10, j)
        }
    }

    /// Repeats [`pre_test`](Self::pre_test) until it is conclusive. After
    /// `max_reruns` inconclusive reruns the answer is orthogonal, rule 11.
    pub fn test(&mut self) -> Result<Recognition> {
        let cap = self.cfg.max_reruns_for(self.n());
        let mut rec = self.pre_test()?;
        let mut counter = 0;
        while !rec.verdict.answer.is_conclusive() {
            if counter >= cap {
                rec.verdict.answer = Answer::Orthogonal;
                break;
            }
            rec = self.pre_test()?;
            counter += 1;
        }
        rec.verdict.reruns = counter;
        Ok(rec)
    }

    /// One run without shortcuts: symplectic if a product of conjugates has
    /// large pdrank, otherwise inconclusive.
    pub fn plain_pre_test(&mut self) -> Result<Recognition> {
        self.group.check_usable()?;
        let n = self.n();
        let j = self.nontrivial_pseudo_involution()?;
        let probe = self.products_of_conjugates(&j)?;
        let conj = probe.max_pdrank;
        let t = self.type_of_centraliser(&j)?;
        self.log_probe(ProbeStage::Plain, Some(t), minus_dim(&j)?, conj);
        if (conj > 7 && !t.is_empty()) || (conj > 2 && n == 3) {
            Self::conclude_with_witness(14, &j, probe, conj)
        } else {
            Self::conclude(Answer::Inconclusive, 14, &j)
        }
    }

    /// Repeats [`plain_pre_test`](Self::plain_pre_test) up to `effort·n`
    /// more times; if none is conclusive the answer is orthogonal.
    pub fn plain_test(&mut self) -> Result<Recognition> {
        let mut rec = self.plain_pre_test()?;
        let mut counter = 0;
        while !rec.verdict.answer.is_conclusive() && counter < self.budget() {
            rec = self.plain_pre_test()?;
            counter += 1;
        }
        if !rec.verdict.answer.is_conclusive() {
            rec.verdict.answer = Answer::Orthogonal;
        }
        rec.verdict.reruns = counter;
        Ok(rec)
    }

    /// Orders of `j·jᵍ` for `samples` random `g` in the whole group, checked
    /// against `q(q±1)`.
    pub fn divisibility_probe(&mut self, j: &Matrix, samples: usize) -> Result<DivisibilityReport> {
        let q = self.group.q();
        let mut report = DivisibilityReport { orders: Vec::with_capacity(samples), violations: 0 };
        for _ in 0..samples {
            let g = self.random_element()?;
            let o = self.order(&(j * &conjugate(j, &g)?))?;
            if !divides_q_qpm1(&o, q) {
                report.violations += 1;
            }
            report.orders.push(o);
        }
        Ok(report)
    }
}

/// Re-checks a witness against `group` from scratch: both matrices lie in
/// the group, `j` is a non-scalar pseudo-involution, and the order and
/// pdrank of `j·jˣ` are as recorded and large enough for the rule.
pub fn verify_witness(group: &ClassicalGroup, table: &ExponentTable, w: &Witness) -> Result<()> {
    let fail = |m: &str| Err(Error::Invariant(format!("witness: {m}")));
    let j = &w.involution;
    let x = &w.conjugator;
    if j.dim() != group.dim() || x.dim() != group.dim() {
        return fail("dimension does not match the group");
    }
    if !group.preserves_form(j) || !group.preserves_form(x) {
        return fail("element outside the group");
    }
    if j.is_scalar().is_some() || (j * j).is_scalar().is_none() {
        return fail("j is not a pseudo-involution");
    }
    let o = table.element_order(&(j * &conjugate(j, x)?))?;
    if o != w.product_order {
        return fail("recorded product order is wrong");
    }
    let r = table.pdrank(2 * group.n() as u32, &o);
    if r != w.pdrank {
        return fail("recorded pdrank is wrong");
    }
    if r < Witness::required_pdrank(w.rule, group.n()) {
        return fail("pdrank too small to exclude the orthogonal group");
    }
    Ok(())
}

/// Explanation of a verdict.
pub fn interpret(v: &TestVerdict) -> Result<String> {
    let mut out = String::new();
    match v.answer {
        Answer::Symplectic => out.push_str("The group is symplectic.\n"),
        Answer::Orthogonal => out.push_str("The group is orthogonal.\n"),
        Answer::Inconclusive => out.push_str("The run was inconclusive.\n"),
    }
    let repeat = "To be on the safe side, repeat the test.\n";
    let body: String = match (v.rule, v.answer) {
        (1, _) => "This answer is DEFINITE. An involution j was found whose centralizer has an \
                   element of order divisible by a primitive prime divisor of q^(n-1)-1 or \
                   q^(n-1)+1, and some product j*j^x of conjugates has order divisible by a \
                   primitive prime divisor of q^k-1 with k > 6; this is possible only for an \
                   involution of type t_n in the symplectic group.\n"
            .into(),
        (2, _) => format!(
            "The centralizer of the involution j has elements with primitive prime divisors of \
             both q^(n-1)-1 and q^(n-1)+1, and the largest pdrank of a product of conjugates is \
             4. This almost certainly makes j an involution of type t_1 in SO(2n+1,q).\n{repeat}"
        ),
        (3 | 4, _) => format!(
            "The involution found behaves like one of type t_(n-1) in SO(2n+1,q). \
             This is not a strong answer.\n{repeat}"
        ),
        (5 | 6, _) => format!(
            "The involution found behaves like one of type t_n in SO(2n+1,q). \
             This is not a strong answer.\n{repeat}"
        ),
        (7 | 8 | 10, _) => format!(
            "The involution j behaves either like type t_1 in PSp(2n,q) or like type t_n in \
             Omega(2n+1,q). No 2-element of the SL(2,q) factor expected in the symplectic \
             centralizer was found.\n{repeat}"
        ),
        (9, _) => format!(
            "The involution j behaves either like type t_1 in PSp(2n,q) or like type t_n in \
             Omega(2n+1,q). A 2-element of C_G(j) behaving like one from the SL(2,q) factor of \
             the symplectic centralizer was found.\n{repeat}"
        ),
        (11, _) => format!("No rule applied to the involution found.\n{repeat}"),
        (13, Answer::Symplectic) => "Rank 3 case: an involution from a good element has a product \
                                     of conjugates with pdrank at least 3. This DEFINITELY \
                                     identifies the group as symplectic.\n"
            .into(),
        (13, _) => format!(
            "Rank 3 case: every sampled product of conjugates of an involution from a good \
             element has pdrank at most 2. The group is almost certainly orthogonal.\n{repeat}"
        ),
        (14, Answer::Symplectic) => "The plain test found an involution behaving like type t_n in \
                                     PSp(2n,q). This is a DEFINITE answer.\n"
            .into(),
        (14, _) => format!(
            "The plain test did not find an involution behaving like type t_n in PSp(2n,q). \
             This is NOT a definite answer.\n{repeat}"
        ),
        (r, _) => return Err(Error::UnknownRule(r as i32)),
    };
    out.push_str(&body);
    if v.reruns > 0 {
        out.push_str(&format!(
            "The first run was inconclusive; the test was repeated {} times and the answer comes \
             from the last run.\n",
            v.reruns
        ));
    }
    Ok(out)
}

/// Counts of verdicts by (answer, rule).
pub fn tally<'a>(verdicts: impl IntoIterator<Item = &'a TestVerdict>) -> BTreeMap<(Answer, u8), usize> {
    let mut m = BTreeMap::new();
    for v in verdicts {
        *m.entry((v.answer, v.rule)).or_insert(0) += 1;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::GroupDescriptor;

    fn gf5() -> FieldSpec {
        FieldSpec::make_field(5, 1).unwrap()
    }

    fn build(desc: &str, seed: u64) -> ClassicalGroup {
        desc.parse::<GroupDescriptor>().unwrap().build(seed).unwrap()
    }

    /// diag(A, A^{-T}) in Sp(6,5) with A the companion matrix of a primitive
    /// cubic, so the element has order 124 and its 62nd power is -I.
    fn torus_element_124() -> Matrix {
        let f = gf5();
        let id = Matrix::identity(&f, 3);
        for c in 0..125i64 {
            let a = Matrix::from_int_rows(
                &f,
                &[vec![0, 0, -(c % 5)], vec![1, 0, -((c / 5) % 5)], vec![0, 1, -(c / 25)]],
            )
            .unwrap();
            if a.rank() < 3 {
                continue;
            }
            let mut x = a.clone();
            let mut o = 1;
            while x != id && o <= 124 {
                x = &x * &a;
                o += 1;
            }
            if o != 124 {
                continue;
            }
            let ait = a.inverse().unwrap().transpose();
            let mut g = Matrix::zero(&f, 6);
            for i in 0..3 {
                for j in 0..3 {
                    g.set(i, j, a.get(i, j));
                    g.set(3 + i, 3 + j, ait.get(i, j));
                }
            }
            return g;
        }
        unreachable!("a primitive cubic exists over GF(5)")
    }

    #[test]
    fn pseudo_involution_cases() {
        let mut sp = build("sp:3:5", 1);
        let rec = Recognizer::new(&mut sp, RecognizerConfig::default()).unwrap();
        let f = gf5();

        let g = torus_element_124();
        assert!(rec.group().is_member(&g));
        assert_eq!(g.pow_u64(62), Matrix::scalar(&f, 6, 4));
        let j = rec.pseudo_involution(&g).unwrap();
        assert_eq!(j, g.pow_u64(31));
        assert_eq!(&j * &j, Matrix::scalar(&f, 6, 4));
        assert_eq!(minus_dim(&j).unwrap(), 3);

        // An element of odd order (31) gives the identity.
        let odd = g.pow_u64(4);
        assert!(rec.pseudo_involution(&odd).unwrap().is_identity());

        // An involution is its own pseudo-involution.
        let mut t = Matrix::identity(&f, 6);
        for i in [0, 3] {
            t.set(i, i, 4);
        }
        assert!(rec.group().is_member(&t));
        assert_eq!(rec.pseudo_involution(&t).unwrap(), t);
        assert_eq!(minus_dim(&t).unwrap(), 1);

        // -I has order 2, not divisible by 4: identity in the symplectic case.
        let minus = Matrix::scalar(&f, 6, 4);
        assert!(rec.pseudo_involution(&minus).unwrap().is_identity());
    }

    #[test]
    fn minus_dim_rejects_odd_rank() {
        let f = gf5();
        let mut m = Matrix::identity(&f, 3);
        m.set(0, 0, 4);
        assert_eq!(minus_dim(&m), Err(Error::OddRank(1)));
    }

    #[test]
    fn good_elements() {
        let mut sp = build("sp:3:5", 1);
        let mut rec = Recognizer::new(&mut sp, RecognizerConfig::default()).unwrap();
        let f = gf5();
        assert!(rec.is_good(&torus_element_124()).unwrap());
        assert!(!rec.is_good(&Matrix::identity(&f, 6)).unwrap());
        for _ in 0..5 {
            let g = rec.good_element().unwrap();
            assert!(rec.is_good(&g).unwrap());
        }

        let mut so = build("so:3:5", 2);
        let mut rec = Recognizer::new(&mut so, RecognizerConfig::default()).unwrap();
        let g = rec.good_element().unwrap();
        // Good elements of Ω(7,5) have pdrank 3 and 2-part 2.
        let o = rec.order(&g).unwrap();
        assert_eq!(rec.pdrank_of_order(&o), 3);
        assert_eq!(even_part(&o).unwrap(), BigUint::from(2u32));
    }

    #[test]
    fn sampling_cap_is_reported() {
        let mut sp = build("sp:3:5", 1);
        let cfg = RecognizerConfig { attempt_cap: Some(1), ..Default::default() };
        let mut rec = Recognizer::new(&mut sp, cfg).unwrap();
        let failures = (0..50).filter(|_| rec.good_element().is_err()).count();
        assert!(failures > 0);
        assert_eq!(
            (0..50).find_map(|_| rec.good_element().err()),
            Some(Error::SamplingFailure(1))
        );
    }

    #[test]
    fn centraliser_samples_commute_modulo_scalars() {
        for (desc, seed) in [("sp:4:5", 3), ("so:4:5", 4)] {
            let mut g = build(desc, seed);
            let mut rec = Recognizer::new(&mut g, RecognizerConfig { verify_invariants: true, ..Default::default() }).unwrap();
            let (j, t) = rec.critical_involution().unwrap();
            assert!(!t.is_empty());
            assert!(j.is_scalar().is_none());
            assert!((&j * &j).is_scalar().is_some());
            let ji = j.inverse().unwrap();
            for _ in 0..100 {
                let z = rec.in_centraliser(&j).unwrap();
                let c = &(&(&ji * &z.inverse().unwrap()) * &j) * &z;
                assert!(c.is_scalar().is_some(), "{desc}");
            }
        }
    }

    #[test]
    fn small_rank_verdicts() {
        let mut so = build("so:3:5", 11);
        let v = Recognizer::new(&mut so, RecognizerConfig::default()).unwrap().test().unwrap();
        assert_eq!((v.verdict.answer, v.verdict.rule, v.verdict.reruns), (Answer::Orthogonal, 13, 0));
        assert!(v.witness.is_none());

        let mut sp = build("sp:3:5", 11);
        let table = Arc::new(ExponentTable::new(sp.field(), 6).unwrap());
        let v = Recognizer::with_table(&mut sp, table.clone(), RecognizerConfig::default())
            .unwrap()
            .test()
            .unwrap();
        assert_eq!((v.verdict.answer, v.verdict.rule), (Answer::Symplectic, 13));
        verify_witness(&sp, &table, v.witness.as_ref().unwrap()).unwrap();
    }

    #[test]
    fn rule_one_witness_replays() {
        let mut sp = build("sp:4:5", 5);
        let mut rec = Recognizer::new(&mut sp, RecognizerConfig::default()).unwrap();
        let table = rec.table().clone();
        let v = rec.test().unwrap();
        assert_eq!((v.verdict.answer, v.verdict.rule, v.verdict.minus_dim), (Answer::Symplectic, 1, 4));
        let w = v.witness.unwrap();
        assert!(w.pdrank > 7);
        verify_witness(&sp, &table, &w).unwrap();

        let back = Witness::from_record(&w.to_record()).unwrap();
        assert_eq!(back, w);
        verify_witness(&sp, &table, &back).unwrap();

        let mut forged = w.clone();
        forged.product_order += 1u32;
        assert!(verify_witness(&sp, &table, &forged).is_err());
        let mut forged = w.clone();
        forged.conjugator = Matrix::identity(sp.field(), 8);
        assert!(verify_witness(&sp, &table, &forged).is_err());
    }

    #[test]
    fn runs_are_deterministic() {
        for desc in ["sp:4:7", "so:4:7"] {
            let run = |seed| {
                let mut g = build(desc, seed);
                let mut rec = Recognizer::new(&mut g, RecognizerConfig::default()).unwrap();
                let v = rec.test().unwrap();
                (v, rec.take_probes())
            };
            assert_eq!(run(8), run(8));
        }
    }

    #[test]
    fn plain_test_bounds() {
        let mut so = build("so:4:5", 6);
        let cfg = RecognizerConfig { effort: 1, ..Default::default() };
        let v = Recognizer::new(&mut so, cfg).unwrap().plain_test().unwrap();
        assert_eq!((v.verdict.answer, v.verdict.rule), (Answer::Orthogonal, 14));
        assert_eq!(v.verdict.reruns, 4);
    }

    #[test]
    fn rerun_cap_yields_orthogonal() {
        // With a zero rerun cap an inconclusive first run becomes orthogonal.
        for seed in 0..40 {
            let mut g = build("so:6:5", seed);
            let cfg = RecognizerConfig { max_reruns: Some(0), ..Default::default() };
            let v = Recognizer::new(&mut g, cfg).unwrap().test().unwrap();
            assert!(v.verdict.answer.is_conclusive());
            assert_eq!(v.verdict.reruns, 0);
        }
    }

    #[test]
    fn unusable_groups_are_rejected() {
        let mut g = ClassicalGroup::build_sp(2, &gf5(), 1).unwrap();
        let mut rec = Recognizer::new(&mut g, RecognizerConfig::default()).unwrap();
        assert!(matches!(rec.pre_test(), Err(Error::Unusable(_))));
        let mut g = build("sp:3:5", 1);
        let bad = RecognizerConfig { effort: 0, ..Default::default() };
        assert!(matches!(Recognizer::new(&mut g, bad), Err(Error::InvalidConfig(_))));
        let wrong_dim = Arc::new(ExponentTable::new(&gf5(), 7).unwrap());
        assert!(Recognizer::with_table(&mut g, wrong_dim, RecognizerConfig::default()).is_err());
    }

    #[test]
    fn interpretations() {
        let v = |answer, rule| TestVerdict { answer, rule, minus_dim: 4, reruns: 0 };
        let t = interpret(&v(Answer::Symplectic, 1)).unwrap();
        assert!(t.contains("this is possible only for an involution of type t_n in the symplectic group"));
        assert!(interpret(&v(Answer::Orthogonal, 13)).unwrap().contains("repeat the test"));
        assert!(interpret(&v(Answer::Symplectic, 13)).unwrap().contains("DEFINITELY"));
        assert_eq!(interpret(&v(Answer::Orthogonal, 12)), Err(Error::UnknownRule(12)));
        for rule in (1..=11).chain([13, 14]) {
            assert!(interpret(&v(Answer::Orthogonal, rule)).is_ok());
        }
        let rerun = TestVerdict { reruns: 3, ..v(Answer::Orthogonal, 5) };
        assert!(interpret(&rerun).unwrap().contains("repeated 3 times"));
    }

    #[test]
    fn json_shapes() {
        let v = TestVerdict { answer: Answer::Inconclusive, rule: 11, minus_dim: 2, reruns: 0 };
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"{"answer":-1,"rule":11,"minus_dim":2,"reruns":0}"#);
        assert_eq!(serde_json::from_str::<TestVerdict>(&s).unwrap(), v);
        assert!(serde_json::from_str::<TestVerdict>(r#"{"answer":3,"rule":1,"minus_dim":0,"reruns":0}"#).is_err());
        assert_eq!(serde_json::to_string(&CentraliserType::BOTH).unwrap(), "[1,2]");
        assert_eq!(serde_json::from_str::<CentraliserType>("[2]").unwrap(), CentraliserType::PLUS);
        assert_eq!(CentraliserType::MINUS.to_string(), "[1]");
    }
}
