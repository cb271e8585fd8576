//! Integer factorization: trial division followed by Pollard's rho with
//! Brent's cycle detection, plus Miller-Rabin primality.
//!
//! Everything here is deterministic. The rho iteration budget turns an
//! unexpectedly hard composite into an explicit error instead of a hang.

use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

const TRIAL_LIMIT: u32 = 1_000_000;

/// Default number of rho iterations allowed per factorization call.
pub const DEFAULT_RHO_BUDGET: u64 = 1 << 24;

/// A positive integer together with its complete prime factorization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactoredInteger {
    value: BigUint,
    /// Sorted by prime, exponents positive.
    factors: Vec<(BigUint, u32)>,
}

impl FactoredInteger {
    pub fn one() -> Self {
        FactoredInteger {
            value: BigUint::one(),
            factors: Vec::new(),
        }
    }

    /// Builds the integer from prime powers. Repeated primes are merged.
    pub fn from_factors(factors: impl IntoIterator<Item = (BigUint, u32)>) -> Self {
        let mut out = FactoredInteger::one();
        for (p, e) in factors {
            out.insert(p, e);
        }
        out
    }

    fn insert(&mut self, p: BigUint, e: u32) {
        if e == 0 {
            return;
        }
        self.value *= p.pow(e);
        match self.factors.binary_search_by(|(q, _)| q.cmp(&p)) {
            Ok(i) => self.factors[i].1 += e,
            Err(i) => self.factors.insert(i, (p, e)),
        }
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn factors(&self) -> &[(BigUint, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = &BigUint> {
        self.factors.iter().map(|(p, _)| p)
    }

    pub fn exponent_of(&self, p: &BigUint) -> u32 {
        self.factors
            .binary_search_by(|(q, _)| q.cmp(p))
            .map(|i| self.factors[i].1)
            .unwrap_or(0)
    }

    /// Least common multiple, taking the larger exponent of each prime.
    pub fn lcm(&self, other: &FactoredInteger) -> FactoredInteger {
        let mut out = self.clone();
        for (p, e) in &other.factors {
            let have = out.exponent_of(p);
            if *e > have {
                out.insert(p.clone(), e - have);
            }
        }
        out
    }

    pub fn product(&self, other: &FactoredInteger) -> FactoredInteger {
        let mut out = self.clone();
        for (p, e) in &other.factors {
            out.insert(p.clone(), *e);
        }
        out
    }

    /// True when the listed prime powers multiply to the value and every
    /// listed prime passes the primality test.
    pub fn is_consistent(&self) -> bool {
        let prod = self
            .factors
            .iter()
            .fold(BigUint::one(), |acc, (p, e)| acc * p.pow(*e));
        prod == self.value && self.factors.iter().all(|(p, _)| is_probable_prime(p))
    }
}

impl fmt::Display for FactoredInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|(p, e)| if *e == 1 { p.to_string() } else { format!("{p}^{e}") })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let n = TRIAL_LIMIT as usize;
        let mut sieve = vec![true; n + 1];
        sieve[0] = false;
        sieve[1] = false;
        let mut i = 2;
        while i * i <= n {
            if sieve[i] {
                let mut j = i * i;
                while j <= n {
                    sieve[j] = false;
                    j += i;
                }
            }
            i += 1;
        }
        (0..=n).filter(|&i| sieve[i]).map(|i| i as u32).collect()
    })
}

#[inline]
pub(crate) fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_u64(acc, base, m);
        }
        base = mul_mod_u64(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Miller-Rabin; exact below 2^64, probabilistic (fixed prime bases) above.
pub fn is_probable_prime(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    if n.is_even() {
        return false;
    }
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    const BASES: [u32; 20] = [
        2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
    ];
    'witness: for a in BASES {
        let a = BigUint::from(a);
        if (n % &a).is_zero() {
            return false;
        }
        let mut x = a.modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn brent_u64(n: u64, c: u64, budget: &mut u64) -> Result<Option<u64>> {
    let f = |y: u64| (mul_mod_u64(y, y, n) + c) % n;
    let m = 128u64;
    let (mut y, mut r, mut q, mut g) = (2u64, 1u64, 1u64, 1u64);
    let (mut x, mut ys) = (0u64, 0u64);
    while g == 1 {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0;
        while k < r && g == 1 {
            ys = y;
            let steps = m.min(r - k);
            for _ in 0..steps {
                y = f(y);
                q = mul_mod_u64(q, x.abs_diff(y), n);
            }
            g = q.gcd(&n);
            k += m;
            *budget = budget.saturating_sub(steps);
            if *budget == 0 {
                return Err(Error::FactorizationTimeout(n.to_string()));
            }
        }
        r *= 2;
    }
    if g == n {
        loop {
            ys = f(ys);
            g = x.abs_diff(ys).gcd(&n);
            if g > 1 {
                break;
            }
        }
    }
    Ok((g != n).then_some(g))
}

fn brent_big(n: &BigUint, c: u64, budget: &mut u64) -> Result<Option<BigUint>> {
    let c = BigUint::from(c);
    let f = |y: &BigUint| (y * y + &c) % n;
    let diff = |a: &BigUint, b: &BigUint| if a > b { a - b } else { b - a };
    let m = 128u64;
    let mut y = BigUint::from(2u32);
    let (mut r, mut q, mut g) = (1u64, BigUint::one(), BigUint::one());
    let (mut x, mut ys) = (BigUint::zero(), BigUint::zero());
    while g.is_one() {
        x = y.clone();
        for _ in 0..r {
            y = f(&y);
        }
        let mut k = 0;
        while k < r && g.is_one() {
            ys = y.clone();
            let steps = m.min(r - k);
            for _ in 0..steps {
                y = f(&y);
                q = (&q * diff(&x, &y)) % n;
            }
            g = q.gcd(n);
            k += m;
            *budget = budget.saturating_sub(steps);
            if *budget == 0 {
                return Err(Error::FactorizationTimeout(n.to_string()));
            }
        }
        r *= 2;
    }
    if &g == n {
        loop {
            ys = f(&ys);
            g = diff(&x, &ys).gcd(n);
            if !g.is_one() {
                break;
            }
        }
    }
    Ok((&g != n).then_some(g))
}

fn find_divisor(n: &BigUint, budget: &mut u64) -> Result<BigUint> {
    for c in 1u64.. {
        let found = match n.to_u64() {
            Some(small) => brent_u64(small, c, budget)?.map(BigUint::from),
            None => brent_big(n, c, budget)?,
        };
        if let Some(d) = found {
            return Ok(d);
        }
    }
    unreachable!()
}

fn split_into(n: BigUint, out: &mut Vec<BigUint>, budget: &mut u64) -> Result<()> {
    if n.is_one() {
        return Ok(());
    }
    if is_probable_prime(&n) {
        out.push(n);
        return Ok(());
    }
    let d = find_divisor(&n, budget)?;
    let rest = &n / &d;
    split_into(d, out, budget)?;
    split_into(rest, out, budget)
}

/// Complete factorization with the default rho budget.
pub fn factorize(m: &BigUint) -> Result<FactoredInteger> {
    factorize_with_budget(m, DEFAULT_RHO_BUDGET)
}

pub fn factorize_with_budget(m: &BigUint, budget: u64) -> Result<FactoredInteger> {
    if m.is_zero() {
        return Err(Error::NonPositive);
    }
    let mut out = FactoredInteger::one();
    let mut rest = m.clone();
    for &p in small_primes() {
        let pb = BigUint::from(p);
        if &pb * &pb > rest {
            break;
        }
        let mut e = 0;
        loop {
            let (quot, rem) = rest.div_rem(&pb);
            if !rem.is_zero() {
                break;
            }
            rest = quot;
            e += 1;
        }
        out.insert(pb, e);
    }
    let mut budget = budget;
    let mut primes = Vec::new();
    split_into(rest, &mut primes, &mut budget)?;
    for p in primes {
        out.insert(p, 1);
    }
    Ok(out)
}

/// Factorization of a machine word, as (prime, exponent) pairs.
pub fn factorize_u64(n: u64) -> Result<Vec<(u64, u32)>> {
    let f = factorize(&BigUint::from(n))?;
    Ok(f.factors()
        .iter()
        .map(|(p, e)| (p.to_u64().expect("factor of a u64 fits in u64"), *e))
        .collect())
}
