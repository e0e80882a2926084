//! Integer number theory used by the field builder and the counting formulas.
//!
//! Everything here works on `u64` with checked arithmetic; callers get
//! [`Error::Overflow`] rather than silent wrap-around.

use num_integer::Integer;

use crate::error::{Error, Result};

pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

pub fn checked_pow(base: u64, exp: u32) -> Result<u64> {
    base.checked_pow(exp)
        .ok_or_else(|| Error::Overflow(format!("{base}^{exp}")))
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Prime factorization by trial division, primes ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            let mut k = 0;
            while n.is_multiple_of(d) {
                n /= d;
                k += 1;
            }
            out.push((d, k));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn prime_factors(n: u64) -> Vec<u64> {
    factorize(n).into_iter().map(|(p, _)| p).collect()
}

/// All positive divisors of `n`, ascending. `divisors(0)` is empty.
pub fn divisors(n: u64) -> Vec<u64> {
    if n == 0 {
        return Vec::new();
    }
    let mut divs = vec![1u64];
    for (p, k) in factorize(n) {
        let len = divs.len();
        let mut pk = 1u64;
        for _ in 0..k {
            pk *= p;
            for i in 0..len {
                divs.push(divs[i] * pk);
            }
        }
    }
    divs.sort_unstable();
    divs
}

/// Euler's totient.
pub fn phi(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    factorize(n)
        .into_iter()
        .fold(n, |acc, (p, _)| acc / p * (p - 1))
}

pub fn mobius(n: u64) -> i64 {
    let f = factorize(n);
    if f.iter().any(|&(_, k)| k > 1) {
        0
    } else if f.len().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Multiplicative order of `a` modulo `m`. Requires `gcd(a, m) = 1`, `m ≥ 1`.
pub fn multiplicative_order(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(1);
    }
    if gcd(a % m, m) != 1 {
        return None;
    }
    let group = phi(m);
    let mut ord = group;
    for p in prime_factors(group) {
        while ord.is_multiple_of(p) && pow_mod(a, ord / p, m) == 1 {
            ord /= p;
        }
    }
    Some(ord)
}

/// Split `q = p^n`. Errors when `q` is not a prime power.
pub fn prime_power(q: u64) -> Result<(u64, u32)> {
    let f = factorize(q);
    match f.as_slice() {
        [(p, n)] => Ok((*p, *n)),
        _ => Err(Error::NotPrimePower(q)),
    }
}

/// `(q^d − 1)/(q − 1) = 1 + q + … + q^(d−1)`.
pub fn repunit(q: u64, d: u32) -> Result<u64> {
    let mut acc = 0u64;
    let mut term = 1u64;
    for i in 0..d {
        acc = acc
            .checked_add(term)
            .ok_or_else(|| Error::Overflow(format!("({q}^{d}-1)/({q}-1)")))?;
        if i + 1 < d {
            term = term
                .checked_mul(q)
                .ok_or_else(|| Error::Overflow(format!("{q}^{}", i + 1)))?;
        }
    }
    Ok(acc)
}

/// Modular inverse of `a` mod `m` when it exists.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let e = (a as i128).extended_gcd(&(m as i128));
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.rem_euclid(m as i128) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_factorizations() {
        assert_eq!(factorize(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(factorize(1), vec![]);
        assert_eq!(factorize(97), vec![(97, 1)]);
        assert_eq!(divisors(15), vec![1, 3, 5, 15]);
        assert_eq!(divisors(1), vec![1]);
    }

    #[test]
    fn totient_and_mobius() {
        let brute = |n: u64| (1..=n).filter(|&k| gcd(k, n) == 1).count() as u64;
        for n in 1..200 {
            assert_eq!(phi(n), brute(n), "phi({n})");
        }
        assert_eq!(mobius(1), 1);
        assert_eq!(mobius(6), 1);
        assert_eq!(mobius(12), 0);
        assert_eq!(mobius(30), -1);
    }

    #[test]
    fn orders() {
        assert_eq!(multiplicative_order(2, 5), Some(4));
        assert_eq!(multiplicative_order(4, 5), Some(2));
        assert_eq!(multiplicative_order(4, 15), Some(2));
        assert_eq!(multiplicative_order(2, 4), None);
        assert_eq!(multiplicative_order(7, 1), Some(1));
    }

    #[test]
    fn prime_powers() {
        assert_eq!(prime_power(49).unwrap(), (7, 2));
        assert_eq!(prime_power(2).unwrap(), (2, 1));
        assert!(prime_power(12).is_err());
        assert!(prime_power(1).is_err());
    }

    #[test]
    fn repunits() {
        assert_eq!(repunit(41, 3).unwrap(), 1723);
        assert_eq!(repunit(16, 2).unwrap(), 17);
        assert_eq!(repunit(2, 20).unwrap(), (1 << 20) - 1);
        assert!(repunit(u64::MAX / 2, 3).is_err());
    }

    #[test]
    fn inverses() {
        assert_eq!(inv_mod(3, 7), Some(5));
        assert_eq!(inv_mod(2, 4), None);
    }
}
