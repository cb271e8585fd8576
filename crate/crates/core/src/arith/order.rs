use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use super::factor::{factorize, FactoredInteger};
use super::primitive_divisor;
use crate::error::{Error, Result};
use crate::gf::FieldSpec;
use crate::matrix::Matrix;

/// Precomputed exponent data for GL_d(q): a factored multiple `M` of every
/// element order, and the primitive parts of `q^k - 1` for `k <= d`.
///
/// `M = p^e · lcm(q^i - 1 : i <= d)` where `p^e` is the smallest power of
/// the characteristic that is at least `d` (it bounds unipotent orders).
#[derive(Debug, Clone)]
pub struct ExponentTable {
    field: FieldSpec,
    dim: usize,
    exponent: FactoredInteger,
    per_k_primitive: Vec<BigUint>,
    /// (prime, exponent, prime^exponent), arranged for balanced splitting.
    parts: Vec<(BigUint, u32, BigUint)>,
}

impl ExponentTable {
    pub fn new(field: &FieldSpec, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch(0, 1));
        }
        let q = BigUint::from(field.q());
        let one = BigUint::one();

        // q^i - 1 = prod_{k | i} Phi_k(q); factor the cyclotomic values,
        // which are much smaller than q^i - 1.
        let mut phi: Vec<BigUint> = Vec::with_capacity(dim);
        let mut phi_factored: Vec<FactoredInteger> = Vec::with_capacity(dim);
        for k in 1..=dim {
            let mut v = q.pow(k as u32) - &one;
            for m in (1..k).filter(|m| k % m == 0) {
                v /= &phi[m - 1];
            }
            phi_factored.push(factorize(&v)?);
            phi.push(v);
        }
        let mut lcm = FactoredInteger::one();
        for i in 1..=dim {
            let qi = (1..=i)
                .filter(|k| i % k == 0)
                .fold(FactoredInteger::one(), |acc, k| acc.product(&phi_factored[k - 1]));
            debug_assert_eq!(qi.value(), &(q.pow(i as u32) - &one));
            lcm = lcm.lcm(&qi);
        }

        let p = field.p();
        let mut e = 0u32;
        let mut pe = 1u128;
        while pe < dim as u128 {
            pe *= p as u128;
            e += 1;
        }
        let exponent = lcm.product(&FactoredInteger::from_factors([(BigUint::from(p), e)]));

        let per_k_primitive = (1..=dim as u32).map(|k| primitive_divisor(field.q(), k)).collect();

        let parts = exponent
            .factors()
            .iter()
            .map(|(r, a)| (r.clone(), *a, r.pow(*a)))
            .collect();

        Ok(ExponentTable {
            field: field.clone(),
            dim,
            exponent,
            per_k_primitive,
            parts,
        })
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The factored multiple M of all element orders.
    pub fn exponent(&self) -> &FactoredInteger {
        &self.exponent
    }

    /// Primitive part of `q^k - 1`, for `1 <= k <= dim`.
    pub fn primitive_divisor(&self, k: u32) -> &BigUint {
        &self.per_k_primitive[k as usize - 1]
    }

    /// Cached version of [`super::ppd_occurrences`]; `d` must not exceed
    /// the table dimension.
    pub fn ppd_occurrences(&self, d: u32, m: &BigUint) -> BTreeSet<u32> {
        assert!(d as usize <= self.dim, "rank bound {d} exceeds table dimension {}", self.dim);
        (1..=d)
            .filter(|&k| !self.primitive_divisor(k).gcd(m).is_one())
            .collect()
    }

    pub fn pdrank(&self, d: u32, m: &BigUint) -> u32 {
        assert!(d as usize <= self.dim, "rank bound {d} exceeds table dimension {}", self.dim);
        (1..=d)
            .rev()
            .find(|&k| !self.primitive_divisor(k).gcd(m).is_one())
            .unwrap_or(0)
    }

    /// Exact multiplicative order of `g`.
    ///
    /// Peels the prime factors of M: the primes are split into two halves
    /// A and B, `g^{M_B}` has order supported on A and `g^{M_A}` on B, and
    /// each half is handled recursively. For a single prime power `r^a`
    /// the order is found by repeated r-th powering.
    pub fn element_order(&self, g: &Matrix) -> Result<BigUint> {
        if g.field() != &self.field {
            return Err(Error::FieldMismatch);
        }
        if g.dim() != self.dim {
            return Err(Error::DimensionMismatch(g.dim(), self.dim));
        }
        self.order_rec(g.clone(), &self.parts)
    }

    fn order_rec(&self, h: Matrix, parts: &[(BigUint, u32, BigUint)]) -> Result<BigUint> {
        if h.is_identity() {
            return Ok(BigUint::one());
        }
        match parts {
            [] => Err(Error::ExponentMismatch),
            [(r, a, _)] => {
                let mut x = h;
                let mut ord = BigUint::one();
                let small = r.to_u64();
                for _ in 0..*a {
                    x = match small {
                        Some(s) => x.pow_u64(s),
                        None => x.pow(r),
                    };
                    ord *= r;
                    if x.is_identity() {
                        return Ok(ord);
                    }
                }
                Err(Error::ExponentMismatch)
            }
            _ => {
                let total: u64 = parts.iter().map(|(_, _, pa)| pa.bits()).sum();
                let mut acc = 0;
                let mut mid = 1;
                for (i, (_, _, pa)) in parts.iter().enumerate().take(parts.len() - 1) {
                    acc += pa.bits();
                    mid = i + 1;
                    if 2 * acc >= total {
                        break;
                    }
                }
                let (left, right) = parts.split_at(mid);
                let n_left: BigUint = left.iter().map(|(_, _, pa)| pa).product();
                let n_right: BigUint = right.iter().map(|(_, _, pa)| pa).product();
                let o_left = self.order_rec(h.pow(&n_right), left)?;
                let o_right = self.order_rec(h.pow(&n_left), right)?;
                Ok(o_left * o_right)
            }
        }
    }
}

/// Exact order of `g` using the factored exponent in `tab`.
pub fn element_order(g: &Matrix, tab: &ExponentTable) -> Result<BigUint> {
    tab.element_order(g)
}
