//! The symplectic groups Sp(2n,q) and special orthogonal groups SO(2n+1,q)
//! as matrix groups, together with a product-replacement random element
//! generator.
//!
//! Generators are the Chevalley root elements `x_{±α}(t)` for the simple
//! roots α and `t` running over an additive basis of GF(q) over GF(p);
//! these generate Sp(2n,q) and Ω(2n+1,q) respectively. The orthogonal
//! group also gets a torus element of non-square spinor norm so that the
//! whole of SO(2n+1,q) is generated.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::FieldSpec;
use crate::matrix::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupKind {
    Symplectic,
    Orthogonal,
}

impl GroupKind {
    /// 0 for symplectic, 1 for orthogonal.
    pub fn code(self) -> i32 {
        match self {
            GroupKind::Symplectic => 0,
            GroupKind::Orthogonal => 1,
        }
    }

    pub fn dim(self, n: usize) -> usize {
        match self {
            GroupKind::Symplectic => 2 * n,
            GroupKind::Orthogonal => 2 * n + 1,
        }
    }
}

/// `sp:n:q` or `so:n:q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GroupDescriptor {
    pub kind: GroupKind,
    pub n: usize,
    pub q: u64,
}

impl GroupDescriptor {
    pub fn build(&self, seed: u64) -> Result<ClassicalGroup> {
        let field = FieldSpec::from_order(self.q)?;
        ClassicalGroup::build(self.kind, self.n, &field, seed)
    }
}

impl FromStr for GroupDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad group descriptor {s:?}, expected sp:n:q or so:n:q"));
        let mut it = s.trim().split(':');
        let kind = match it.next() {
            Some("sp") => GroupKind::Symplectic,
            Some("so") => GroupKind::Orthogonal,
            _ => return Err(bad()),
        };
        let n = it.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
        let q = it.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
        if it.next().is_some() {
            return Err(bad());
        }
        Ok(GroupDescriptor { kind, n, q })
    }
}

impl fmt::Display for GroupDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            GroupKind::Symplectic => "sp",
            GroupKind::Orthogonal => "so",
        };
        write!(f, "{k}:{}:{}", self.n, self.q)
    }
}

/// Product replacement with an accumulator.
///
/// Each step replaces a random slot by its product with another slot (or
/// that slot's inverse, on a random side) and multiplies the accumulator
/// by the new slot value. The accumulator is the emitted element.
#[derive(Clone, Debug)]
pub struct Randomizer {
    slots: Vec<Matrix>,
    accumulator: Matrix,
    rng: ChaCha8Rng,
    burned_in: bool,
}

impl Randomizer {
    pub const MIN_SLOTS: usize = 10;
    pub const BURN_IN_FACTOR: usize = 50;

    pub fn new(generators: &[Matrix], seed: u64) -> Self {
        let s = Self::MIN_SLOTS.max(generators.len() + 2);
        let slots = generators.iter().cycle().take(s).cloned().collect();
        let g0 = &generators[0];
        Randomizer {
            slots,
            accumulator: Matrix::identity(g0.field(), g0.dim()),
            rng: ChaCha8Rng::seed_from_u64(seed),
            burned_in: false,
        }
    }

    pub fn slots(&self) -> &[Matrix] {
        &self.slots
    }

    pub fn accumulator(&self) -> &Matrix {
        &self.accumulator
    }

    pub fn is_burned_in(&self) -> bool {
        self.burned_in
    }

    fn step(&mut self) {
        let s = self.slots.len();
        let i = self.rng.gen_range(0..s);
        let mut j = self.rng.gen_range(0..s - 1);
        if j >= i {
            j += 1;
        }
        let other = if self.rng.gen::<bool>() {
            self.slots[j].clone()
        } else {
            self.slots[j].inverse().expect("group elements are invertible")
        };
        self.slots[i] = if self.rng.gen::<bool>() {
            &self.slots[i] * &other
        } else {
            &other * &self.slots[i]
        };
        self.accumulator = &self.accumulator * &self.slots[i];
    }

    pub fn next_element(&mut self) -> Matrix {
        if !self.burned_in {
            for _ in 0..Self::BURN_IN_FACTOR * self.slots.len() {
                self.step();
            }
            self.burned_in = true;
        }
        self.step();
        self.accumulator.clone()
    }
}

/// Sp(2n,q) or SO(2n+1,q) with its invariant form, generators and random
/// element source.
///
/// The randomizer is mutable state: a group instance must be driven by one
/// task at a time. Independent instances share nothing.
#[derive(Clone, Debug)]
pub struct ClassicalGroup {
    kind: GroupKind,
    n: usize,
    field: FieldSpec,
    dim: usize,
    form: Matrix,
    generators: Vec<Matrix>,
    randomizer: Randomizer,
}

impl ClassicalGroup {
    pub fn build(kind: GroupKind, n: usize, field: &FieldSpec, seed: u64) -> Result<Self> {
        match kind {
            GroupKind::Symplectic => Self::build_sp(n, field, seed),
            GroupKind::Orthogonal => Self::build_so(n, field, seed),
        }
    }

    /// Sp(2n,q) preserving the alternating form with `<e_i, f_j> = δ_ij`
    /// in the basis e_1..e_n, f_1..f_n.
    pub fn build_sp(n: usize, field: &FieldSpec, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidRank(n));
        }
        let d = 2 * n;
        let mut form = Matrix::zero(field, d);
        for i in 0..n {
            form.set(i, n + i, 1);
            form.set(n + i, i, field.neg(1));
        }
        let mut gens = Vec::new();
        for t in additive_basis(field) {
            let nt = field.neg(t);
            for i in 0..n - 1 {
                // x_{e_i - e_{i+1}}(t) and its opposite
                let mut x = Matrix::identity(field, d);
                x.set(i, i + 1, t);
                x.set(n + i + 1, n + i, nt);
                gens.push(x);
                let mut y = Matrix::identity(field, d);
                y.set(i + 1, i, t);
                y.set(n + i, n + i + 1, nt);
                gens.push(y);
            }
            // long root 2e_n: symplectic transvections
            let mut x = Matrix::identity(field, d);
            x.set(n - 1, 2 * n - 1, t);
            gens.push(x);
            let mut y = Matrix::identity(field, d);
            y.set(2 * n - 1, n - 1, t);
            gens.push(y);
        }
        Self::assemble(GroupKind::Symplectic, n, field, form, gens, seed)
    }

    /// SO(2n+1,q) preserving the symmetric form with `B(e_i, f_j) = δ_ij`,
    /// `B(h, h) = 2` in the basis e_1..e_n, f_1..f_n, h.
    pub fn build_so(n: usize, field: &FieldSpec, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidRank(n));
        }
        let d = 2 * n + 1;
        let h = 2 * n;
        let (e_n, f_n) = (n - 1, 2 * n - 1);
        let mut form = Matrix::zero(field, d);
        for i in 0..n {
            form.set(i, n + i, 1);
            form.set(n + i, i, 1);
        }
        form.set(h, h, field.int_code(2));
        let mut gens = Vec::new();
        for t in additive_basis(field) {
            let nt = field.neg(t);
            let t2 = field.neg(field.mul(t, t));
            let two_t = field.neg(field.add(t, t));
            for i in 0..n - 1 {
                let mut x = Matrix::identity(field, d);
                x.set(i, i + 1, t);
                x.set(n + i + 1, n + i, nt);
                gens.push(x);
                let mut y = Matrix::identity(field, d);
                y.set(i + 1, i, t);
                y.set(n + i, n + i + 1, nt);
                gens.push(y);
            }
            // short root e_n: f_n -> f_n + t h - t^2 e_n, h -> h - 2t e_n
            let mut x = Matrix::identity(field, d);
            x.set(h, f_n, t);
            x.set(e_n, f_n, t2);
            x.set(e_n, h, two_t);
            gens.push(x);
            let mut y = Matrix::identity(field, d);
            y.set(h, e_n, t);
            y.set(f_n, e_n, t2);
            y.set(f_n, h, two_t);
            gens.push(y);
        }
        // diag(ω, 1, .., ω^{-1}, 1, ..): spinor norm ω, a non-square.
        let w = field.multiplicative_generator().code();
        let mut torus = Matrix::identity(field, d);
        torus.set(0, 0, w);
        torus.set(n, n, field.inv(w).expect("generator is nonzero"));
        gens.push(torus);
        Self::assemble(GroupKind::Orthogonal, n, field, form, gens, seed)
    }

    /// A group with caller-supplied generators, e.g. read from a file. Every
    /// generator must preserve the standard form of the given kind (and
    /// have determinant 1 in the orthogonal case).
    pub fn with_generators(
        kind: GroupKind,
        n: usize,
        field: &FieldSpec,
        generators: Vec<Matrix>,
        seed: u64,
    ) -> Result<Self> {
        let reference = Self::build(kind, n, field, seed)?;
        if generators.is_empty() {
            return Err(Error::Parse("no generators supplied".into()));
        }
        Self::assemble(kind, n, field, reference.form, generators, seed)
    }

    fn assemble(
        kind: GroupKind,
        n: usize,
        field: &FieldSpec,
        form: Matrix,
        generators: Vec<Matrix>,
        seed: u64,
    ) -> Result<Self> {
        let dim = kind.dim(n);
        let mut group = ClassicalGroup {
            kind,
            n,
            field: field.clone(),
            dim,
            form,
            randomizer: Randomizer::new(&generators, seed),
            generators: Vec::new(),
        };
        for g in &generators {
            if g.dim() != dim {
                return Err(Error::DimensionMismatch(g.dim(), dim));
            }
            if g.field() != field {
                return Err(Error::FieldMismatch);
            }
            if !group.is_member(g) {
                return Err(Error::Invariant("generator does not lie in the group".into()));
            }
        }
        group.generators = generators;
        Ok(group)
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn q(&self) -> u64 {
        self.field.q()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn form(&self) -> &Matrix {
        &self.form
    }

    pub fn generators(&self) -> &[Matrix] {
        &self.generators
    }

    pub fn randomizer(&self) -> &Randomizer {
        &self.randomizer
    }

    pub fn descriptor(&self) -> GroupDescriptor {
        GroupDescriptor {
            kind: self.kind,
            n: self.n,
            q: self.q(),
        }
    }

    /// Recognition needs n >= 3 and q > 3.
    pub fn check_usable(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::Unusable(format!("rank n = {} < 3", self.n)));
        }
        if self.q() <= 3 {
            return Err(Error::Unusable(format!("q = {} <= 3", self.q())));
        }
        Ok(())
    }

    pub fn usable_for_recognition(&self) -> bool {
        self.check_usable().is_ok()
    }

    /// `gᵀ·F·g = F`.
    pub fn preserves_form(&self, g: &Matrix) -> bool {
        g.dim() == self.dim
            && g.field() == &self.field
            && &(&g.transpose() * &self.form) * g == self.form
    }

    /// Form preservation, plus determinant 1 for the orthogonal kind.
    pub fn is_member(&self, g: &Matrix) -> bool {
        self.preserves_form(g) && (self.kind == GroupKind::Symplectic || g.det().code() == 1)
    }

    pub fn random_element(&mut self) -> Matrix {
        let g = self.randomizer.next_element();
        debug_assert!(self.is_member(&g), "random element left the group");
        g
    }

    /// `[g1, g2] = g1⁻¹ g2⁻¹ g1 g2` for independent random g1, g2. In the
    /// orthogonal case this lies in Ω(2n+1,q).
    pub fn random_commutator(&mut self) -> Matrix {
        let g1 = self.random_element();
        let g2 = self.random_element();
        commutator(&g1, &g2)
    }

    /// Random element of the perfect subgroup the recognizer works in:
    /// Sp(2n,q) itself, or Ω(2n+1,q) reached through commutators.
    pub fn random_perfect_element(&mut self) -> Matrix {
        match self.kind {
            GroupKind::Symplectic => self.random_element(),
            GroupKind::Orthogonal => self.random_commutator(),
        }
    }
}

/// `t·ω^j` for j < k: an additive basis of GF(q) over GF(p) built from the
/// multiplicative generator ω.
fn additive_basis(field: &FieldSpec) -> Vec<u64> {
    let w = field.multiplicative_generator().code();
    (1..=field.k() as u64).map(|j| field.pow(w, j)).collect()
}

pub fn commutator(a: &Matrix, b: &Matrix) -> Matrix {
    let ai = a.inverse().expect("group elements are invertible");
    let bi = b.inverse().expect("group elements are invertible");
    &(&(&ai * &bi) * a) * b
}

/// `g⁻¹·a·g`.
pub fn conjugate(a: &Matrix, g: &Matrix) -> Result<Matrix> {
    let gi = g.inverse()?;
    gi.mul(a)?.mul(g)
}

/// Order of the group generated by `gens`, by breadth-first closure.
/// Returns `None` once more than `limit` elements have been seen.
pub fn closure_size(gens: &[Matrix], limit: usize) -> Option<usize> {
    let first = gens.first()?;
    let id = Matrix::identity(first.field(), first.dim());
    let mut seen: HashSet<Matrix> = HashSet::from([id.clone()]);
    let mut frontier = vec![id];
    while let Some(x) = frontier.pop() {
        for g in gens {
            let y = &x * g;
            if seen.insert(y.clone()) {
                if seen.len() > limit {
                    return None;
                }
                frontier.push(y);
            }
        }
    }
    Some(seen.len())
}
