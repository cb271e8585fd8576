//! Integer and order-theoretic utilities: parity parts, primitive prime
//! divisors, primitive divisor rank, factorization and exact element orders.

pub mod factor;
mod order;

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub use factor::{factorize, factorize_u64, factorize_with_budget, is_prime_u64, is_probable_prime, FactoredInteger};
pub use order::{element_order, ExponentTable};

/// `m` with every factor 2 removed.
pub fn odd_part(m: &BigUint) -> Result<BigUint> {
    if m.is_zero() {
        return Err(Error::NonPositive);
    }
    let tz = m.trailing_zeros().unwrap_or(0);
    Ok(m >> tz)
}

/// Largest power of two dividing `m`.
pub fn even_part(m: &BigUint) -> Result<BigUint> {
    if m.is_zero() {
        return Err(Error::NonPositive);
    }
    let tz = m.trailing_zeros().unwrap_or(0);
    Ok(BigUint::one() << tz)
}

/// The part of `q^k - 1` coprime to every `q^l - 1` with `l < k`, found by
/// repeatedly dividing out common factors. Equals 1 exactly when `q^k - 1`
/// has no primitive prime divisor.
pub fn primitive_divisor(q: u64, k: u32) -> BigUint {
    let q = BigUint::from(q);
    let one = BigUint::one();
    let mut pd = q.pow(k) - &one;
    for l in 1..k {
        let ll = q.pow(l) - &one;
        let mut g = pd.gcd(&ll);
        while g > one {
            pd /= &g;
            g = pd.gcd(&g);
        }
    }
    pd
}

/// All `k` in `1..=d` such that `m` shares a factor with the primitive
/// part of `q^k - 1`.
pub fn ppd_occurrences(q: u64, d: u32, m: &BigUint) -> BTreeSet<u32> {
    (1..=d)
        .filter(|&k| !primitive_divisor(q, k).gcd(m).is_one())
        .collect()
}

/// Largest `k <= d` such that a primitive prime divisor of `q^k - 1`
/// divides `m`, or 0 if there is none.
pub fn pdrank(q: u64, d: u32, m: &BigUint) -> u32 {
    ppd_occurrences(q, d, m).last().copied().unwrap_or(0)
}

/// Whether `o` divides `q(q+1)` or `q(q-1)`.
pub fn divides_q_qpm1(o: &BigUint, q: u64) -> bool {
    let q = BigUint::from(q);
    let one = BigUint::one();
    let plus = &q * (&q + &one);
    let minus = &q * (&q - &one);
    (&plus % o).is_zero() || (&minus % o).is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn parity_parts() {
        assert_eq!(odd_part(&big(12)).unwrap(), big(3));
        assert_eq!(even_part(&big(12)).unwrap(), big(4));
        assert_eq!(odd_part(&big(1)).unwrap(), big(1));
        assert_eq!(even_part(&big(1)).unwrap(), big(1));
        assert_eq!(even_part(&big(124)).unwrap(), big(4));
        assert_eq!(odd_part(&big(0)), Err(Error::NonPositive));
        assert_eq!(even_part(&big(0)), Err(Error::NonPositive));
        for m in 1..500u64 {
            let (o, e) = (odd_part(&big(m)).unwrap(), even_part(&big(m)).unwrap());
            assert_eq!(&o * &e, big(m));
            assert!(o.is_odd());
            assert!(e.count_ones() == 1);
        }
    }

    #[test]
    fn primitive_divisor_examples() {
        assert_eq!(primitive_divisor(5, 1), big(4));
        assert_eq!(primitive_divisor(5, 2), big(3));
        assert_eq!(primitive_divisor(2, 6), big(1));
        assert_eq!(primitive_divisor(5, 3), big(31));
        assert_eq!(primitive_divisor(5, 6), big(7));
    }

    #[test]
    fn occurrences_and_rank() {
        assert_eq!(ppd_occurrences(5, 6, &big(124)), BTreeSet::from([1, 3]));
        assert!(ppd_occurrences(5, 6, &big(1)).is_empty());
        assert_eq!(ppd_occurrences(5, 6, &big(7)), BTreeSet::from([6]));
        assert_eq!(pdrank(5, 6, &big(124)), 3);
        assert_eq!(pdrank(7, 8, &big(1)), 0);
        assert_eq!(pdrank(5, 6, &big(7 * 31)), 6);
    }

    #[test]
    fn divisibility_examples() {
        assert!(divides_q_qpm1(&big(1), 5));
        assert!(divides_q_qpm1(&big(30), 5));
        assert!(!divides_q_qpm1(&big(31), 5));
        assert!(divides_q_qpm1(&big(20), 5));
    }

    /// The cascade is coprime to lower q^l - 1, divides q^k - 1, and a prime
    /// dividing the primitive part of q^{2k} - 1 never divides q^k - 1.
    #[test]
    fn primitive_divisor_properties_exhaustive() {
        for q in [5u64, 7, 9] {
            for k in 1..=12u32 {
                let pd = primitive_divisor(q, k);
                let qk = big(q).pow(k) - 1u32;
                assert!((&qk % &pd).is_zero());
                for l in 1..k {
                    assert!(pd.gcd(&(big(q).pow(l) - 1u32)).is_one(), "q={q} k={k} l={l}");
                }
                if 2 * k <= 24 {
                    let pd2 = primitive_divisor(q, 2 * k);
                    for (r, _) in factorize(&pd2).unwrap().factors() {
                        assert!(!(&qk % r).is_zero(), "q={q} k={k} r={r}");
                    }
                }
            }
        }
    }
}
