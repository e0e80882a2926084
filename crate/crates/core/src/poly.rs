//! Dense univariate polynomials over a finite field.
//!
//! Coefficients are field-element encodings stored constant term first; the
//! zero polynomial has no coefficients. All arithmetic borrows the field it
//! runs over, so the same type serves GF(p), GF(q) and GF(q^d).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::field::{Elem, FiniteField};

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly {
    coeffs: Vec<Elem>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Elem>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self { coeffs: vec![1] }
    }

    pub fn constant(c: Elem) -> Self {
        Self::new(vec![c])
    }

    /// `x^k`.
    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![0; k + 1];
        coeffs[k] = 1;
        Self { coeffs }
    }

    /// `x + a`.
    pub fn linear(a: Elem) -> Self {
        Self { coeffs: vec![a, 1] }
    }

    /// `c·x + 1`.
    pub fn affine(c: Elem) -> Self {
        Self::new(vec![1, c])
    }

    pub fn coeffs(&self) -> &[Elem] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Elem> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Elem {
        self.coeffs.last().copied().unwrap_or(0)
    }

    pub fn coeff(&self, i: usize) -> Elem {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn is_monic(&self) -> bool {
        self.leading() == 1
    }

    pub fn add<F: FiniteField>(&self, other: &Self, f: &F) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        Self::new(
            (0..len)
                .map(|i| f.add(self.coeff(i), other.coeff(i)))
                .collect(),
        )
    }

    pub fn neg<F: FiniteField>(&self, f: &F) -> Self {
        Self::new(self.coeffs.iter().map(|&c| f.neg(c)).collect())
    }

    pub fn sub<F: FiniteField>(&self, other: &Self, f: &F) -> Self {
        self.add(&other.neg(f), f)
    }

    pub fn scale<F: FiniteField>(&self, c: Elem, f: &F) -> Self {
        Self::new(self.coeffs.iter().map(|&a| f.mul(a, c)).collect())
    }

    pub fn mul<F: FiniteField>(&self, other: &Self, f: &F) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(a, b));
            }
        }
        Self::new(out)
    }

    pub fn pow<F: FiniteField>(&self, mut e: u64, f: &F) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base, f);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base, f);
            }
        }
        acc
    }

    /// Quotient and remainder. Panics on a zero divisor.
    pub fn divrem<F: FiniteField>(&self, divisor: &Self, f: &F) -> (Self, Self) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let lead_inv = f.inv(divisor.leading()).expect("leading coefficient is nonzero");
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Self::zero(), self.clone());
        }
        let mut quot = vec![0; rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let c = f.mul(rem[k + dd], lead_inv);
            quot[k] = c;
            if c == 0 {
                continue;
            }
            for (j, &b) in divisor.coeffs.iter().enumerate() {
                rem[k + j] = f.sub(rem[k + j], f.mul(c, b));
            }
        }
        rem.truncate(dd);
        (Self::new(quot), Self::new(rem))
    }

    pub fn rem<F: FiniteField>(&self, divisor: &Self, f: &F) -> Self {
        self.divrem(divisor, f).1
    }

    pub fn monic<F: FiniteField>(&self, f: &F) -> Self {
        match f.inv(self.leading()) {
            Some(inv) if !self.is_zero() => self.scale(inv, f),
            _ => self.clone(),
        }
    }

    /// Monic greatest common divisor; `gcd(0, 0) = 0`.
    pub fn gcd<F: FiniteField>(&self, other: &Self, f: &F) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b, f);
            a = b;
            b = r;
        }
        a.monic(f)
    }

    pub fn mul_mod<F: FiniteField>(&self, other: &Self, modulus: &Self, f: &F) -> Self {
        self.mul(other, f).rem(modulus, f)
    }

    pub fn pow_mod<F: FiniteField>(&self, mut e: u64, modulus: &Self, f: &F) -> Self {
        let mut base = self.rem(modulus, f);
        let mut acc = Self::one().rem(modulus, f);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_mod(&base, modulus, f);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_mod(&base, modulus, f);
            }
        }
        acc
    }

    /// Horner evaluation.
    pub fn eval<F: FiniteField>(&self, x: Elem, f: &F) -> Elem {
        self.coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| f.add(f.mul(acc, x), c))
    }

    /// `p(s·x)`.
    pub fn scale_argument<F: FiniteField>(&self, s: Elem, f: &F) -> Self {
        let mut pw = f.one();
        let mut out = Vec::with_capacity(self.coeffs.len());
        for &c in &self.coeffs {
            out.push(f.mul(c, pw));
            pw = f.mul(pw, s);
        }
        Self::new(out)
    }

    pub fn map_coeffs(&self, mut g: impl FnMut(Elem) -> Elem) -> Self {
        Self::new(self.coeffs.iter().map(|&c| g(c)).collect())
    }

    /// Irreducibility over `f` by the gcd test against `x^(Q^k) − x`,
    /// `1 ≤ k ≤ deg/2`, where `Q` is the field order.
    pub fn is_irreducible<F: FiniteField>(&self, f: &F) -> bool {
        let n = match self.degree() {
            None | Some(0) => return false,
            Some(1) => return true,
            Some(n) => n,
        };
        if self.coeffs[0] == 0 {
            return false;
        }
        let monic = self.monic(f);
        let x = Poly::monomial(1);
        let mut h = x.clone();
        for _ in 0..n / 2 {
            h = h.pow_mod(f.order(), &monic, f);
            let g = monic.gcd(&h.sub(&x, f), f);
            if g.degree() != Some(0) {
                return false;
            }
        }
        true
    }
}

impl fmt::Display for Poly {
    /// Comma-separated coefficients, constant term first.
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(out, "0");
        }
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(out, ",")?;
            }
            write!(out, "{c}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;

    fn gf(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    #[test]
    fn division_identity() {
        let f = gf(7);
        let a = Poly::new(vec![3, 0, 5, 1, 6]);
        let b = Poly::new(vec![2, 4, 1]);
        let (q, r) = a.divrem(&b, &f);
        assert!(r.degree().unwrap_or(0) < 2);
        assert_eq!(q.mul(&b, &f).add(&r, &f), a);
    }

    #[test]
    fn gcd_of_shared_factor() {
        let f = gf(5);
        let common = Poly::linear(2);
        let a = common.mul(&Poly::linear(3), &f);
        let b = common.mul(&Poly::new(vec![2, 0, 1]), &f);
        assert_eq!(a.gcd(&b, &f), common);
    }

    #[test]
    fn known_irreducibles_over_gf2() {
        let f = gf(2);
        assert!(Poly::new(vec![1, 1, 1]).is_irreducible(&f));
        assert!(Poly::new(vec![1, 1, 0, 0, 1]).is_irreducible(&f));
        // x^4 + x^2 + 1 = (x^2 + x + 1)^2
        assert!(!Poly::new(vec![1, 0, 1, 0, 1]).is_irreducible(&f));
        // x^2 + 1 = (x + 1)^2
        assert!(!Poly::new(vec![1, 0, 1]).is_irreducible(&f));
    }

    #[test]
    fn display_is_constant_first() {
        assert_eq!(Poly::new(vec![1, 2, 0, 4]).to_string(), "1,2,0,4");
        assert_eq!(Poly::zero().to_string(), "0");
    }

    #[test]
    fn scale_argument_matches_evaluation() {
        let f = gf(11);
        let p = Poly::new(vec![4, 7, 1, 9]);
        let s = 3;
        let scaled = p.scale_argument(s, &f);
        for x in 0..11 {
            assert_eq!(scaled.eval(x, &f), p.eval(f.mul(s, x), &f));
        }
    }
}
