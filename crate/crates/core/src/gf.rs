//! Finite fields GF(p^k) of odd characteristic.
//!
//! Elements are stored as integer codes `c_0 + c_1 p + ... + c_{k-1} p^{k-1}`
//! where `c_i` are the coefficients of the polynomial residue modulo the
//! defining polynomial. Prime fields use plain modular arithmetic; small
//! extension fields use log/antilog tables, larger ones fall back to
//! polynomial arithmetic.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;
use std::sync::Arc;

use crate::arith::factor::{factorize_u64, is_prime_u64, mul_mod_u64, pow_mod_u64};
use crate::error::{Error, Result};

const LOG_TABLE_LIMIT: u64 = 1 << 20;
const ADD_TABLE_LIMIT: u64 = 512;

/// Description of a finite field: characteristic, degree and defining
/// polynomial. Cheap to clone; all clones share the same tables.
#[derive(Clone)]
pub struct FieldSpec(Arc<Inner>);

struct Inner {
    p: u64,
    k: u32,
    q: u64,
    /// Monic, constant term first, length k + 1.
    modulus: Vec<u64>,
    generator: u64,
    tables: Option<Tables>,
}

struct Tables {
    exp: Vec<u32>,
    log: Vec<u32>,
    add: Option<Vec<u32>>,
}

impl FieldSpec {
    /// GF(p^k) with the lexicographically smallest monic irreducible
    /// modulus. Requires an odd prime `p` and `p^k > 3`.
    pub fn make_field(p: u64, k: u32) -> Result<Self> {
        let spec = Self::new_allow_small(p, k)?;
        if spec.q() <= 3 {
            return Err(Error::FieldTooSmall(spec.q()));
        }
        Ok(spec)
    }

    /// Like [`FieldSpec::make_field`] but also accepts GF(3). Groups built
    /// over such a field are reported as unusable for recognition.
    pub fn new_allow_small(p: u64, k: u32) -> Result<Self> {
        let q = validate(p, k)?;
        let modulus = if k == 1 {
            vec![0, 1]
        } else {
            smallest_irreducible(p, k)
        };
        Ok(Self::assemble(p, k, q, modulus))
    }

    /// GF(p^k) with a caller-supplied defining polynomial (constant term
    /// first, leading coefficient included).
    pub fn with_modulus(p: u64, k: u32, modulus: &[u64]) -> Result<Self> {
        let q = validate(p, k)?;
        if q <= 3 {
            return Err(Error::FieldTooSmall(q));
        }
        if modulus.len() != k as usize + 1
            || modulus[k as usize] != 1
            || modulus.iter().any(|&c| c >= p)
            || !is_irreducible(modulus, p)
        {
            return Err(Error::BadModulus(k));
        }
        Ok(Self::assemble(p, k, q, modulus.to_vec()))
    }

    /// Field of size `q`, which must be a power of an odd prime.
    pub fn from_order(q: u64) -> Result<Self> {
        if q < 2 {
            return Err(Error::Parse(format!("{q} is not a prime power")));
        }
        let factors = factorize_u64(q)?;
        match factors.as_slice() {
            [(p, k)] => Self::make_field(*p, *k),
            _ => Err(Error::Parse(format!("{q} is not a prime power"))),
        }
    }

    fn assemble(p: u64, k: u32, q: u64, modulus: Vec<u64>) -> Self {
        let mut inner = Inner {
            p,
            k,
            q,
            modulus,
            generator: 0,
            tables: None,
        };
        inner.generator = inner.find_generator();
        if k > 1 && q <= LOG_TABLE_LIMIT {
            inner.tables = Some(inner.build_tables());
        }
        FieldSpec(Arc::new(inner))
    }

    pub fn p(&self) -> u64 {
        self.0.p
    }

    pub fn k(&self) -> u32 {
        self.0.k
    }

    pub fn q(&self) -> u64 {
        self.0.q
    }

    pub fn modulus(&self) -> &[u64] {
        &self.0.modulus
    }

    pub fn zero(&self) -> FieldElement {
        self.element(0)
    }

    pub fn one(&self) -> FieldElement {
        self.element(1)
    }

    /// Element with the given code. Panics if the code is out of range.
    pub fn element(&self, code: u64) -> FieldElement {
        assert!(code < self.q(), "code {code} out of range for GF({})", self.q());
        FieldElement {
            spec: self.clone(),
            code,
        }
    }

    /// Image of an integer under Z -> GF(p).
    pub fn from_int(&self, v: i64) -> FieldElement {
        self.element(self.int_code(v))
    }

    pub(crate) fn int_code(&self, v: i64) -> u64 {
        (v as i128).rem_euclid(self.p() as i128) as u64
    }

    pub fn from_coeffs(&self, coeffs: &[u64]) -> Result<FieldElement> {
        if coeffs.len() > self.k() as usize {
            return Err(Error::Parse(format!(
                "{} coefficients for a degree-{} field",
                coeffs.len(),
                self.k()
            )));
        }
        let code = coeffs
            .iter()
            .rev()
            .fold(0u64, |acc, &c| acc * self.p() + c % self.p());
        Ok(self.element(code))
    }

    /// Element of multiplicative order exactly q - 1: the smallest code
    /// with that property.
    pub fn multiplicative_generator(&self) -> FieldElement {
        self.element(self.0.generator)
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.q()).map(move |c| self.element(c))
    }

    /// Parses the text form produced by `FieldElement`'s `Display`.
    pub fn parse_element(&self, s: &str) -> Result<FieldElement> {
        let coeffs = s
            .split(',')
            .map(|t| {
                let c: u64 = t
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad coefficient {t:?}")))?;
                if c >= self.p() {
                    return Err(Error::Parse(format!("coefficient {c} not reduced mod {}", self.p())));
                }
                Ok(c)
            })
            .collect::<Result<Vec<_>>>()?;
        self.from_coeffs(&coeffs)
    }

    // Code-level arithmetic. Callers guarantee codes are in range.

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let f = &*self.0;
        if f.k == 1 {
            let s = a as u128 + b as u128;
            return (s % f.p as u128) as u64;
        }
        if let Some(Tables { add: Some(add), .. }) = &f.tables {
            return add[(a * f.q + b) as usize] as u64;
        }
        f.digitwise(a, b, |x, y| (x + y) % f.p)
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        let f = &*self.0;
        if f.k == 1 {
            return if a == 0 { 0 } else { f.p - a };
        }
        f.digitwise(a, 0, |x, _| if x == 0 { 0 } else { f.p - x })
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        let f = &*self.0;
        if f.k == 1 {
            return mul_mod_u64(a, b, f.p);
        }
        if a == 0 || b == 0 {
            return 0;
        }
        if let Some(t) = &f.tables {
            let s = t.log[a as usize] as u64 + t.log[b as usize] as u64;
            return t.exp[(s % (f.q - 1)) as usize] as u64;
        }
        f.poly_mul(a, b)
    }

    pub fn inv(&self, a: u64) -> Option<u64> {
        let f = &*self.0;
        if a == 0 {
            return None;
        }
        if f.k == 1 {
            return Some(pow_mod_u64(a, f.p - 2, f.p));
        }
        if let Some(t) = &f.tables {
            let l = t.log[a as usize] as u64;
            return Some(t.exp[((f.q - 1 - l) % (f.q - 1)) as usize] as u64);
        }
        Some(f.pow(a, f.q - 2))
    }

    pub fn pow(&self, a: u64, e: u64) -> u64 {
        self.0.pow(a, e)
    }

    /// `Some(p)` for prime fields with `p < 2^16`, where a dot product of
    /// any practical length can be accumulated in a u64 before reduction.
    #[inline]
    pub(crate) fn small_prime(&self) -> Option<u64> {
        (self.0.k == 1 && self.0.p < (1 << 16)).then_some(self.0.p)
    }
}

fn validate(p: u64, k: u32) -> Result<u64> {
    if !is_prime_u64(p) {
        return Err(Error::NotPrime(p));
    }
    if p == 2 {
        return Err(Error::EvenCharacteristic(p));
    }
    if k == 0 {
        return Err(Error::InvalidDegree(k));
    }
    match p.checked_pow(k) {
        Some(q) if q < (1 << 62) => Ok(q),
        _ => Err(Error::FieldTooLarge { p, k }),
    }
}

impl Inner {
    fn digits(&self, mut code: u64) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.k as usize);
        for _ in 0..self.k {
            out.push(code % self.p);
            code /= self.p;
        }
        out
    }

    fn undigits(&self, d: &[u64]) -> u64 {
        d.iter().rev().fold(0, |acc, &c| acc * self.p + c)
    }

    fn digitwise(&self, a: u64, b: u64, op: impl Fn(u64, u64) -> u64) -> u64 {
        let (mut a, mut b) = (a, b);
        let mut code = 0;
        let mut place = 1;
        for _ in 0..self.k {
            code += op(a % self.p, b % self.p) * place;
            a /= self.p;
            b /= self.p;
            place *= self.p;
        }
        code
    }

    fn poly_mul(&self, a: u64, b: u64) -> u64 {
        let r = poly_mulmod(&self.digits(a), &self.digits(b), &self.modulus, self.p);
        self.undigits(&r)
    }

    fn mul_slow(&self, a: u64, b: u64) -> u64 {
        if self.k == 1 {
            mul_mod_u64(a, b, self.p)
        } else {
            self.poly_mul(a, b)
        }
    }

    fn pow(&self, a: u64, mut e: u64) -> u64 {
        if let Some(t) = &self.tables {
            if a == 0 {
                return u64::from(e == 0);
            }
            let l = t.log[a as usize] as u128 * e as u128 % (self.q - 1) as u128;
            return t.exp[l as usize] as u64;
        }
        let mut base = a;
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_slow(acc, base);
            }
            base = self.mul_slow(base, base);
            e >>= 1;
        }
        acc
    }

    fn find_generator(&self) -> u64 {
        let order = self.q - 1;
        let primes: Vec<u64> = factorize_u64(order)
            .expect("factorization of q - 1 fits the default budget")
            .into_iter()
            .map(|(r, _)| r)
            .collect();
        (1..self.q)
            .find(|&g| primes.iter().all(|&r| self.pow(g, order / r) != 1))
            .expect("the multiplicative group of a finite field is cyclic")
    }

    fn build_tables(&self) -> Tables {
        let n = (self.q - 1) as usize;
        let mut exp = vec![0u32; n];
        let mut log = vec![0u32; self.q as usize];
        let mut x = 1u64;
        for (i, slot) in exp.iter_mut().enumerate() {
            *slot = x as u32;
            log[x as usize] = i as u32;
            x = self.poly_mul(x, self.generator);
        }
        let add = (self.q <= ADD_TABLE_LIMIT).then(|| {
            let q = self.q;
            let mut t = vec![0u32; (q * q) as usize];
            for a in 0..q {
                for b in 0..q {
                    t[(a * q + b) as usize] = self.digitwise(a, b, |x, y| (x + y) % self.p) as u32;
                }
            }
            t
        });
        Tables { exp, log, add }
    }
}

// Polynomials over GF(p): coefficient vectors, constant term first.

fn trim(mut a: Vec<u64>) -> Vec<u64> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

/// Remainder of `a` modulo a nonzero polynomial `b`.
fn poly_rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let b = trim(b.to_vec());
    let db = b.len() - 1;
    let lead_inv = pow_mod_u64(b[db], p - 2, p);
    let mut r = trim(a.to_vec());
    while r.len() > db {
        let top = r.len() - 1;
        let c = mul_mod_u64(r[top], lead_inv, p);
        let shift = top - db;
        for (j, &bj) in b.iter().enumerate() {
            let t = mul_mod_u64(c, bj, p);
            r[shift + j] = (r[shift + j] + p - t) % p;
        }
        r = trim(r);
    }
    r
}

fn poly_mulmod(a: &[u64], b: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    let k = f.len() - 1;
    let mut prod = vec![0u64; a.len() + b.len()];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + mul_mod_u64(ai, bj, p)) % p;
        }
    }
    let mut r = poly_rem(&prod, f, p);
    r.resize(k, 0);
    r
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
    while !b.is_empty() {
        let r = poly_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// Ben-Or test: a monic `f` of degree k is irreducible iff
/// gcd(x^{p^i} - x, f) = 1 for every i <= k/2.
fn is_irreducible(f: &[u64], p: u64) -> bool {
    let k = f.len() - 1;
    if k == 1 {
        return true;
    }
    if f[0] == 0 {
        return false;
    }
    let mut h = vec![0u64; k];
    h[1] = 1;
    for _ in 0..k / 2 {
        // h <- h^p mod f
        let mut base = h.clone();
        let mut acc = {
            let mut one = vec![0u64; k];
            one[0] = 1;
            one
        };
        let mut e = p;
        while e > 0 {
            if e & 1 == 1 {
                acc = poly_mulmod(&acc, &base, f, p);
            }
            base = poly_mulmod(&base, &base, f, p);
            e >>= 1;
        }
        h = acc;
        let mut diff = h.clone();
        diff[1] = (diff[1] + p - 1) % p;
        let g = poly_gcd(&diff, f, p);
        if g.len() > 1 {
            return false;
        }
    }
    true
}

fn smallest_irreducible(p: u64, k: u32) -> Vec<u64> {
    let span = p.pow(k);
    for c in 0..span {
        let mut f = Vec::with_capacity(k as usize + 1);
        let mut rest = c;
        for _ in 0..k {
            f.push(rest % p);
            rest /= p;
        }
        f.push(1);
        if is_irreducible(&f, p) {
            return f;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.p == other.0.p && self.0.k == other.0.k && self.0.modulus == other.0.modulus)
    }
}

impl Eq for FieldSpec {}

impl Hash for FieldSpec {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.p.hash(state);
        self.0.modulus.hash(state);
    }
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self)
    }
}

/// `p^k:c_0,...,c_k` with the modulus coefficients constant term first.
impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m: Vec<String> = self.0.modulus.iter().map(u64::to_string).collect();
        write!(f, "{}^{}:{}", self.0.p, self.0.k, m.join(","))
    }
}

impl FromStr for FieldSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad field descriptor {s:?}"));
        let (head, tail) = s.trim().split_once(':').ok_or_else(bad)?;
        let (p, k) = head.split_once('^').ok_or_else(bad)?;
        let p: u64 = p.parse().map_err(|_| bad())?;
        let k: u32 = k.parse().map_err(|_| bad())?;
        let modulus = tail
            .split(',')
            .map(|t| t.trim().parse::<u64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        FieldSpec::with_modulus(p, k, &modulus)
    }
}

/// An element of GF(p^k) together with its field.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldElement {
    spec: FieldSpec,
    code: u64,
}

impl FieldElement {
    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn code(&self) -> u64 {
        self.code
    }

    pub fn coeffs(&self) -> Vec<u64> {
        self.spec.0.digits(self.code)
    }

    pub fn is_zero(&self) -> bool {
        self.code == 0
    }

    fn check(&self, other: &FieldElement) -> Result<()> {
        if self.spec == other.spec {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }

    fn with(&self, code: u64) -> FieldElement {
        FieldElement {
            spec: self.spec.clone(),
            code,
        }
    }

    pub fn add(&self, other: &FieldElement) -> Result<FieldElement> {
        self.check(other)?;
        Ok(self.with(self.spec.add(self.code, other.code)))
    }

    pub fn sub(&self, other: &FieldElement) -> Result<FieldElement> {
        self.check(other)?;
        Ok(self.with(self.spec.sub(self.code, other.code)))
    }

    pub fn mul(&self, other: &FieldElement) -> Result<FieldElement> {
        self.check(other)?;
        Ok(self.with(self.spec.mul(self.code, other.code)))
    }

    pub fn div(&self, other: &FieldElement) -> Result<FieldElement> {
        self.check(other)?;
        let inv = self.spec.inv(other.code).ok_or(Error::DivisionByZero)?;
        Ok(self.with(self.spec.mul(self.code, inv)))
    }

    pub fn neg(&self) -> FieldElement {
        self.with(self.spec.neg(self.code))
    }

    pub fn inv(&self) -> Result<FieldElement> {
        self.spec
            .inv(self.code)
            .map(|c| self.with(c))
            .ok_or(Error::DivisionByZero)
    }

    /// Integer power; negative exponents invert first.
    pub fn pow(&self, e: i64) -> Result<FieldElement> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        Ok(self.with(self.spec.pow(base.code, e.unsigned_abs())))
    }

    /// Multiplicative order of a nonzero element.
    pub fn multiplicative_order(&self) -> Result<u64> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let mut e = self.spec.q() - 1;
        for (r, _) in factorize_u64(e)? {
            while e % r == 0 && self.spec.pow(self.code, e / r) == 1 {
                e /= r;
            }
        }
        Ok(e)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c: Vec<String> = self.coeffs().iter().map(u64::to_string).collect();
        write!(f, "{}", c.join(","))
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn make_field_examples() {
        let f5 = FieldSpec::make_field(5, 1).unwrap();
        assert_eq!(f5.modulus(), &[0, 1]);
        assert_eq!(f5.to_string(), "5^1:0,1");

        let f9 = FieldSpec::make_field(3, 2).unwrap();
        assert_eq!(f9.modulus(), &[1, 0, 1]);
        assert_eq!(f9.q(), 9);

        assert_eq!(FieldSpec::make_field(2, 3).unwrap_err(), Error::EvenCharacteristic(2));
        assert_eq!(FieldSpec::make_field(9, 1).unwrap_err(), Error::NotPrime(9));
        assert_eq!(FieldSpec::make_field(3, 1).unwrap_err(), Error::FieldTooSmall(3));
        assert_eq!(FieldSpec::make_field(5, 0).unwrap_err(), Error::InvalidDegree(0));
        assert!(FieldSpec::new_allow_small(3, 1).is_ok());
    }

    /// Brute force: a monic quadratic over GF(3) is irreducible iff it has
    /// no root; the smallest such is x^2 + 1.
    #[test]
    fn gf9_modulus_matches_root_enumeration() {
        let p = 3u64;
        let first = (0..p * p)
            .map(|c| [c % p, c / p])
            .find(|&[b, a]| (0..p).all(|x| (x * x + a * x + b) % p != 0))
            .unwrap();
        assert_eq!(first, [1, 0]);
    }

    #[test]
    fn arithmetic_examples() {
        let f5 = FieldSpec::make_field(5, 1).unwrap();
        let two = f5.from_int(2);
        let three = f5.from_int(3);
        assert_eq!(two.mul(&three).unwrap(), f5.one());
        assert_eq!(two.inv().unwrap(), three);
        assert_eq!(f5.zero().inv().unwrap_err(), Error::DivisionByZero);
        assert_eq!(two.div(&f5.zero()).unwrap_err(), Error::DivisionByZero);
        assert_eq!(two.pow(-1).unwrap(), three);

        let f9 = FieldSpec::make_field(3, 2).unwrap();
        let x = f9.from_coeffs(&[0, 1]).unwrap();
        assert_eq!(x.mul(&x).unwrap(), f9.from_int(2));

        let f7 = FieldSpec::make_field(7, 1).unwrap();
        assert_eq!(two.add(&f7.one()).unwrap_err(), Error::FieldMismatch);
    }

    #[test]
    fn generator_examples() {
        let f5 = FieldSpec::make_field(5, 1).unwrap();
        assert_eq!(f5.multiplicative_generator(), f5.from_int(2));
        let f7 = FieldSpec::make_field(7, 1).unwrap();
        // 2 has order 3 in GF(7)*, 3 has order 6.
        assert_eq!(f7.from_int(2).multiplicative_order().unwrap(), 3);
        assert_eq!(f7.multiplicative_generator(), f7.from_int(3));

        let f9 = FieldSpec::make_field(3, 2).unwrap();
        let g = f9.multiplicative_generator();
        assert_eq!(g.pow(8).unwrap(), f9.one());
        assert_ne!(g.pow(4).unwrap(), f9.one());
        assert_ne!(g.pow(2).unwrap(), f9.one());
        assert_eq!(g.coeffs(), vec![1, 1]);
    }

    #[test]
    fn text_round_trip() {
        let f9 = FieldSpec::make_field(3, 2).unwrap();
        assert_eq!(f9.to_string(), "3^2:1,0,1");
        assert_eq!(f9.to_string().parse::<FieldSpec>().unwrap(), f9);
        let e = f9.from_coeffs(&[2, 1]).unwrap();
        assert_eq!(e.to_string(), "2,1");
        assert_eq!(f9.parse_element("2,1").unwrap(), e);
        assert!("3^2:1,1,1".parse::<FieldSpec>().is_err()); // x^2+x+1 = (x-1)^2 over GF(3)
        assert!(f9.parse_element("3,0").is_err());
    }

    #[test]
    fn table_and_polynomial_paths_agree() {
        // GF(5^3) uses tables; compare against direct polynomial products.
        let f = FieldSpec::make_field(5, 3).unwrap();
        for a in (0..f.q()).step_by(7) {
            for b in (0..f.q()).step_by(11) {
                assert_eq!(f.mul(a, b), f.0.poly_mul(a, b));
            }
        }
    }

    #[test]
    fn large_extension_without_tables() {
        // q = 7^8 > 2^20: polynomial fallback.
        let f = FieldSpec::make_field(7, 8).unwrap();
        assert!(f.0.tables.is_none());
        let g = f.multiplicative_generator();
        assert_eq!(g.pow((f.q() - 1) as i64).unwrap(), f.one());
        let a = f.element(123_456);
        assert_eq!(a.mul(&a.inv().unwrap()).unwrap(), f.one());
    }

    fn fields() -> impl Strategy<Value = FieldSpec> {
        prop::sample::select(vec![(5u64, 1u32), (7, 1), (3, 2), (5, 2), (3, 3), (11, 1), (7, 3)])
            .prop_map(|(p, k)| FieldSpec::make_field(p, k).unwrap())
    }

    proptest! {
        #[test]
        fn field_axioms(f in fields(), a in any::<u64>(), b in any::<u64>()) {
            let a = f.element(a % f.q());
            let b = f.element(b % f.q());
            if !a.is_zero() {
                prop_assert_eq!(a.mul(&a.inv().unwrap()).unwrap(), f.one());
            }
            prop_assert_eq!(a.pow(f.q() as i64).unwrap(), a.clone());
            let p = f.p() as i64;
            let lhs = a.add(&b).unwrap().pow(p).unwrap();
            let rhs = a.pow(p).unwrap().add(&b.pow(p).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
            prop_assert_eq!(a.sub(&b).unwrap().add(&b).unwrap(), a.clone());
            prop_assert_eq!(f.parse_element(&a.to_string()).unwrap(), a);
        }

        #[test]
        fn generator_has_full_order(f in fields()) {
            let g = f.multiplicative_generator();
            let n = f.q() - 1;
            prop_assert_eq!(g.pow(n as i64).unwrap(), f.one());
            for (r, _) in factorize_u64(n).unwrap() {
                prop_assert_ne!(g.pow((n / r) as i64).unwrap(), f.one());
            }
        }
    }
}
