//! Deterministic construction of GF(q) = GF(p^n) and GF(q^d).
//!
//! # Representation
//!
//! An element is a polynomial of degree below the extension degree, packed as
//! a base-(field order) integer with the constant coefficient least
//! significant. GF(q^d) is a direct degree-d extension of the GF(q)
//! representation, so GF(q) sits inside it as the encodings `0..q`.
//!
//! # Choices
//!
//! - The defining modulus is the smallest monic irreducible in the order that
//!   compares coefficients constant term first.
//! - `beta` is the primitive element of GF(q) with the smallest encoding.
//! - `alpha` is the primitive element of GF(q^d) with the smallest encoding
//!   among those whose norm is `beta`.
//!
//! Multiplication, powers, norm, Frobenius and discrete logs go through full
//! exp/log tables, which bounds field sizes by a configurable table limit.

use serde::Serialize;

use crate::arith::{self, checked_pow, gcd, inv_mod, prime_factors};
use crate::error::{Error, Result};
use crate::poly::Poly;

pub type Elem = u32;

pub const DEFAULT_TABLE_LIMIT: u64 = 1 << 24;

/// Hard ceiling imposed by the `u32` element encoding.
const ENCODING_LIMIT: u64 = 1 << 31;

pub trait FiniteField {
    fn order(&self) -> u64;
    fn characteristic(&self) -> u64;
    fn add(&self, a: Elem, b: Elem) -> Elem;
    fn neg(&self, a: Elem) -> Elem;
    fn mul(&self, a: Elem, b: Elem) -> Elem;

    fn zero(&self) -> Elem {
        0
    }

    fn one(&self) -> Elem {
        1
    }

    fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    fn pow(&self, mut a: Elem, mut e: u64) -> Elem {
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, a);
            }
            e >>= 1;
            if e > 0 {
                a = self.mul(a, a);
            }
        }
        acc
    }

    fn inv(&self, a: Elem) -> Option<Elem> {
        (a != 0).then(|| self.pow(a, self.order() - 2))
    }
}

/// Integers modulo a prime, without tables.
#[derive(Clone, Copy, Debug)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        if !arith::is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if p >= ENCODING_LIMIT {
            return Err(Error::TableLimit { size: p, limit: ENCODING_LIMIT });
        }
        Ok(Self { p })
    }
}

impl FiniteField for PrimeField {
    fn order(&self) -> u64 {
        self.p
    }

    fn characteristic(&self) -> u64 {
        self.p
    }

    fn add(&self, a: Elem, b: Elem) -> Elem {
        ((a as u64 + b as u64) % self.p) as Elem
    }

    fn neg(&self, a: Elem) -> Elem {
        ((self.p - a as u64) % self.p) as Elem
    }

    fn mul(&self, a: Elem, b: Elem) -> Elem {
        (a as u64 * b as u64 % self.p) as Elem
    }
}

/// Digit-wise arithmetic on packed encodings over a coefficient field.
///
/// Used for addition in every table-backed field and, before tables exist,
/// for schoolbook multiplication modulo the defining polynomial.
#[derive(Clone, Debug)]
struct Packing {
    radix: u64,
    degree: usize,
    binary: bool,
}

impl Packing {
    fn decode(&self, mut a: Elem) -> Vec<Elem> {
        let mut out = Vec::with_capacity(self.degree);
        for _ in 0..self.degree {
            out.push((a as u64 % self.radix) as Elem);
            a = (a as u64 / self.radix) as Elem;
        }
        out
    }

    fn encode(&self, digits: &[Elem]) -> Elem {
        digits
            .iter()
            .rev()
            .fold(0u64, |acc, &c| acc * self.radix + c as u64) as Elem
    }

    fn add<F: FiniteField>(&self, coeff: &F, a: Elem, b: Elem) -> Elem {
        if self.binary {
            return a ^ b;
        }
        let (mut a, mut b) = (a as u64, b as u64);
        let mut out = 0u64;
        let mut place = 1u64;
        while a != 0 || b != 0 {
            let s = coeff.add((a % self.radix) as Elem, (b % self.radix) as Elem);
            out += s as u64 * place;
            a /= self.radix;
            b /= self.radix;
            place *= self.radix;
        }
        out as Elem
    }

    fn neg<F: FiniteField>(&self, coeff: &F, a: Elem) -> Elem {
        if self.binary {
            return a;
        }
        let mut a = a as u64;
        let mut out = 0u64;
        let mut place = 1u64;
        while a != 0 {
            out += coeff.neg((a % self.radix) as Elem) as u64 * place;
            a /= self.radix;
            place *= self.radix;
        }
        out as Elem
    }

    fn mul_mod<F: FiniteField>(&self, coeff: &F, modulus: &Poly, a: Elem, b: Elem) -> Elem {
        let pa = Poly::new(self.decode(a));
        let pb = Poly::new(self.decode(b));
        let r = pa.mul(&pb, coeff).rem(modulus, coeff);
        self.encode(r.coeffs())
    }
}

/// Smallest monic irreducible of the given degree, comparing coefficient
/// vectors constant term first.
fn smallest_irreducible<F: FiniteField>(coeff: &F, degree: usize) -> Poly {
    let radix = coeff.order();
    let mut digits = vec![0 as Elem; degree];
    // a zero constant term means x divides the candidate
    if degree >= 2 {
        digits[0] = 1;
    }
    loop {
        let mut c = digits.clone();
        c.push(1);
        let candidate = Poly::new(c);
        if candidate.is_irreducible(coeff) {
            return candidate;
        }
        // odometer with the constant coefficient as the most significant digit
        let mut i = degree;
        loop {
            if i == 0 {
                unreachable!("every degree admits a monic irreducible");
            }
            i -= 1;
            digits[i] += 1;
            if (digits[i] as u64) < radix {
                break;
            }
            digits[i] = 0;
        }
    }
}

/// Exp/log tables with respect to the smallest-encoding primitive element.
struct Tables {
    generator: Elem,
    exp: Vec<Elem>,
    log: Vec<u32>,
}

fn build_tables<F: FiniteField>(coeff: &F, packing: &Packing, modulus: &Poly, size: u64) -> Tables {
    let period = size - 1;
    let mul = |a, b| packing.mul_mod(coeff, modulus, a, b);
    let pow = |mut a: Elem, mut e: u64| {
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = mul(acc, a);
            }
            e >>= 1;
            if e > 0 {
                a = mul(a, a);
            }
        }
        acc
    };
    let primes = prime_factors(period);
    let generator = (1..size as Elem)
        .find(|&g| primes.iter().all(|&r| pow(g, period / r) != 1))
        .expect("the multiplicative group of a finite field is cyclic");
    let exp = if packing.radix == 2 {
        powers_binary(modulus, generator, period)
    } else {
        powers_packed(coeff, packing, modulus, generator, period)
    };
    let mut log = vec![0u32; size as usize];
    for (t, &x) in exp.iter().enumerate() {
        log[x as usize] = t as u32;
    }
    Tables { generator, exp, log }
}

/// `g^0, …, g^(period−1)` over GF(2) with elements as bit vectors.
fn powers_binary(modulus: &Poly, g: Elem, period: u64) -> Vec<Elem> {
    let degree = modulus.coeffs().len() - 1;
    let reduce_bits = modulus
        .coeffs()
        .iter()
        .enumerate()
        .fold(0u64, |acc, (i, &c)| acc | ((c as u64) << i));
    let mut exp = Vec::with_capacity(period as usize);
    let mut acc = 1u64;
    for _ in 0..period {
        exp.push(acc as Elem);
        let mut prod = 0u64;
        let mut bits = g as u64;
        let mut shifted = acc;
        while bits != 0 {
            if bits & 1 == 1 {
                prod ^= shifted;
            }
            bits >>= 1;
            shifted <<= 1;
        }
        for k in (degree..2 * degree).rev() {
            if prod >> k & 1 == 1 {
                prod ^= reduce_bits << (k - degree);
            }
        }
        acc = prod;
    }
    exp
}

/// `g^0, …, g^(period−1)` with digit vectors reused across steps.
fn powers_packed<F: FiniteField>(coeff: &F, packing: &Packing, modulus: &Poly, g: Elem, period: u64) -> Vec<Elem> {
    let degree = packing.degree;
    let m = modulus.coeffs();
    let g_digits = packing.decode(g);
    let mut acc = vec![0 as Elem; degree];
    acc[0] = 1;
    let mut prod = vec![0 as Elem; 2 * degree];
    let mut exp = Vec::with_capacity(period as usize);
    for _ in 0..period {
        exp.push(packing.encode(&acc));
        prod.fill(0);
        for (i, &a) in acc.iter().enumerate().filter(|(_, &a)| a != 0) {
            for (j, &b) in g_digits.iter().enumerate().filter(|(_, &b)| b != 0) {
                prod[i + j] = coeff.add(prod[i + j], coeff.mul(a, b));
            }
        }
        for k in (degree..2 * degree).rev() {
            let top = prod[k];
            if top != 0 {
                for (j, &mj) in m[..degree].iter().enumerate() {
                    prod[k - degree + j] = coeff.sub(prod[k - degree + j], coeff.mul(top, mj));
                }
                prod[k] = 0;
            }
        }
        acc.copy_from_slice(&prod[..degree]);
    }
    exp
}

fn check_limit(size: u64, limit: u64) -> Result<()> {
    let limit = limit.min(ENCODING_LIMIT);
    if size > limit {
        return Err(Error::TableLimit { size, limit });
    }
    Ok(())
}

/// GF(q) with a fixed primitive element `beta` and its log table.
#[derive(Clone, Debug)]
pub struct FieldContext {
    p: u64,
    n: u32,
    q: u64,
    modulus: Poly,
    beta: Elem,
    packing: Packing,
    prime: PrimeField,
    exp: Vec<Elem>,
    log: Vec<u32>,
}

pub fn build_field(p: u64, n: u32) -> Result<FieldContext> {
    build_field_with_limit(p, n, DEFAULT_TABLE_LIMIT)
}

pub fn build_field_with_limit(p: u64, n: u32, limit: u64) -> Result<FieldContext> {
    let prime = PrimeField::new(p)?;
    if n == 0 {
        return Err(Error::InvalidParameter("extension degree n must be at least 1".into()));
    }
    let q = checked_pow(p, n)?;
    check_limit(q, limit)?;
    let modulus = smallest_irreducible(&prime, n as usize);
    let packing = Packing { radix: p, degree: n as usize, binary: p == 2 };
    let tables = build_tables(&prime, &packing, &modulus, q);
    Ok(FieldContext {
        p,
        n,
        q,
        modulus,
        beta: tables.generator,
        packing,
        prime,
        exp: tables.exp,
        log: tables.log,
    })
}

/// Builds GF(q) from the field size, splitting `q = p^n`.
pub fn build_field_of_order(q: u64, limit: u64) -> Result<FieldContext> {
    let (p, n) = arith::prime_power(q)?;
    build_field_with_limit(p, n, limit)
}

impl FieldContext {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn modulus(&self) -> &Poly {
        &self.modulus
    }

    pub fn beta(&self) -> Elem {
        self.beta
    }

    /// Length of the multiplicative group, `q − 1`.
    pub fn period(&self) -> u64 {
        self.q - 1
    }

    /// `log_beta(x)` with the convention `dlog(0) = 0`.
    pub fn dlog(&self, x: Elem) -> u64 {
        self.log[x as usize] as u64
    }

    /// `beta^t` for any integer exponent.
    pub fn exp(&self, t: i64) -> Elem {
        self.exp[t.rem_euclid(self.period() as i64) as usize]
    }

    /// Every element of the field, in encoding order.
    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        0..self.q as Elem
    }

    /// Multiplicative order of a nonzero element.
    pub fn element_order(&self, x: Elem) -> Option<u64> {
        (x != 0).then(|| {
            let period = self.period();
            period / gcd(self.dlog(x), period)
        })
    }

    /// `d · a` as repeated addition.
    pub fn times(&self, a: Elem, d: u64) -> Elem {
        (0..d % self.p).fold(0, |acc, _| self.add(acc, a))
    }

    /// Multiplication by polynomial arithmetic modulo the defining
    /// polynomial, bypassing the log tables.
    pub fn mul_schoolbook(&self, a: Elem, b: Elem) -> Elem {
        self.packing.mul_mod(&self.prime, &self.modulus, a, b)
    }
}

impl FiniteField for FieldContext {
    fn order(&self) -> u64 {
        self.q
    }

    fn characteristic(&self) -> u64 {
        self.p
    }

    fn add(&self, a: Elem, b: Elem) -> Elem {
        self.packing.add(&self.prime, a, b)
    }

    fn neg(&self, a: Elem) -> Elem {
        self.packing.neg(&self.prime, a)
    }

    fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a == 0 || b == 0 {
            return 0;
        }
        let s = self.log[a as usize] as u64 + self.log[b as usize] as u64;
        self.exp[(s % self.period()) as usize]
    }

    fn pow(&self, a: Elem, e: u64) -> Elem {
        if a == 0 {
            return if e == 0 { 1 } else { 0 };
        }
        let t = arith::mul_mod(self.dlog(a), e, self.period());
        self.exp[t as usize]
    }

    fn inv(&self, a: Elem) -> Option<Elem> {
        (a != 0).then(|| self.exp(-(self.dlog(a) as i64)))
    }
}

/// GF(q^d) over a [`FieldContext`], with `alpha` chosen so that
/// `N(alpha) = beta`.
#[derive(Clone, Debug)]
pub struct ExtensionContext {
    base: FieldContext,
    d: u32,
    order: u64,
    repunit: u64,
    modulus: Poly,
    alpha: Elem,
    packing: Packing,
    exp: Vec<Elem>,
    log: Vec<u32>,
}

pub fn build_extension(base: &FieldContext, d: u32) -> Result<ExtensionContext> {
    build_extension_with_limit(base, d, DEFAULT_TABLE_LIMIT)
}

pub fn build_extension_with_limit(base: &FieldContext, d: u32, limit: u64) -> Result<ExtensionContext> {
    if d < 2 {
        return Err(Error::InvalidParameter("extension degree d must be at least 2".into()));
    }
    let q = base.q();
    let order = checked_pow(q, d)?;
    check_limit(order, limit)?;
    let period = order - 1;
    let repunit = period / (q - 1);
    let modulus = smallest_irreducible(base, d as usize);
    let packing = Packing { radix: q, degree: d as usize, binary: base.p() == 2 };
    let tables = build_tables(base, &packing, &modulus, order);

    // alpha = smallest encoding x with x primitive and N(x) = beta, found in
    // log coordinates relative to the auxiliary generator.
    let beta = base.beta();
    let (alpha, k) = (1..order as Elem)
        .find_map(|x| {
            let k = tables.log[x as usize] as u64;
            let norm = tables.exp[arith::mul_mod(k, repunit, period) as usize];
            (gcd(k, period) == 1 && norm == beta).then_some((x, k))
        })
        .ok_or_else(|| Error::Consistency("no primitive element has norm beta".into()))?;
    let k_inv = inv_mod(k, period).expect("k is a unit mod the period");

    let exp: Vec<Elem> = (0..period)
        .map(|t| tables.exp[arith::mul_mod(t, k, period) as usize])
        .collect();
    let mut log = tables.log;
    for entry in log.iter_mut().skip(1) {
        *entry = arith::mul_mod(*entry as u64, k_inv, period) as u32;
    }
    debug_assert_eq!(exp[1], alpha);

    Ok(ExtensionContext {
        base: base.clone(),
        d,
        order,
        repunit,
        modulus,
        alpha,
        packing,
        exp,
        log,
    })
}

impl ExtensionContext {
    pub fn base(&self) -> &FieldContext {
        &self.base
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn q(&self) -> u64 {
        self.base.q()
    }

    pub fn modulus(&self) -> &Poly {
        &self.modulus
    }

    pub fn alpha(&self) -> Elem {
        self.alpha
    }

    /// `q^d − 1`.
    pub fn period(&self) -> u64 {
        self.order - 1
    }

    /// `(q^d − 1)/(q − 1)`, the number of array columns.
    pub fn repunit(&self) -> u64 {
        self.repunit
    }

    /// `log_alpha(x)` with `dlog(0) = 0`.
    pub fn dlog(&self, x: Elem) -> u64 {
        self.log[x as usize] as u64
    }

    /// `alpha^t` for any integer exponent.
    pub fn exp(&self, t: i64) -> Elem {
        self.exp[t.rem_euclid(self.period() as i64) as usize]
    }

    /// GF(q) elements embed as constant polynomials, which share encodings.
    pub fn embed(&self, a: Elem) -> Elem {
        debug_assert!((a as u64) < self.q());
        a
    }

    pub fn in_base(&self, x: Elem) -> bool {
        (x as u64) < self.q()
    }

    /// `N(x) = x^((q^d−1)/(q−1))`, an element of GF(q).
    pub fn norm(&self, x: Elem) -> Elem {
        if x == 0 {
            return 0;
        }
        let t = arith::mul_mod(self.dlog(x), self.repunit, self.period());
        let y = self.exp[t as usize];
        debug_assert!(self.in_base(y));
        y
    }

    /// `sigma^j(x) = x^(q^j)`.
    pub fn frobenius(&self, x: Elem, j: u32) -> Elem {
        if x == 0 {
            return 0;
        }
        let e = arith::pow_mod(self.q(), j as u64, self.period());
        self.exp[arith::mul_mod(self.dlog(x), e, self.period()) as usize]
    }

    /// `Tr(x) = Σ_j x^(q^j)`, an element of GF(q).
    pub fn trace(&self, x: Elem) -> Elem {
        let t = (0..self.d).fold(0, |acc, j| self.add(acc, self.frobenius(x, j)));
        debug_assert!(self.in_base(t));
        t
    }

    /// Multiplication modulo the defining polynomial, bypassing the tables.
    pub fn mul_schoolbook(&self, a: Elem, b: Elem) -> Elem {
        self.packing.mul_mod(&self.base, &self.modulus, a, b)
    }

    pub fn descriptor(&self) -> FieldDescriptor {
        FieldDescriptor {
            p: self.base.p(),
            n: self.base.n(),
            d: Some(self.d),
            base_modulus: self.base.modulus().coeffs().to_vec(),
            extension_modulus: Some(self.modulus.coeffs().to_vec()),
            beta: self.base.beta(),
            alpha: Some(self.alpha),
        }
    }
}

impl FiniteField for ExtensionContext {
    fn order(&self) -> u64 {
        self.order
    }

    fn characteristic(&self) -> u64 {
        self.base.p()
    }

    fn add(&self, a: Elem, b: Elem) -> Elem {
        self.packing.add(&self.base, a, b)
    }

    fn neg(&self, a: Elem) -> Elem {
        self.packing.neg(&self.base, a)
    }

    fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a == 0 || b == 0 {
            return 0;
        }
        let s = self.log[a as usize] as u64 + self.log[b as usize] as u64;
        self.exp[(s % self.period()) as usize]
    }

    fn pow(&self, a: Elem, e: u64) -> Elem {
        if a == 0 {
            return if e == 0 { 1 } else { 0 };
        }
        self.exp[arith::mul_mod(self.dlog(a), e, self.period()) as usize]
    }

    fn inv(&self, a: Elem) -> Option<Elem> {
        (a != 0).then(|| self.exp(-(self.dlog(a) as i64)))
    }
}

/// Reproducibility descriptor for a field pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FieldDescriptor {
    pub p: u64,
    pub n: u32,
    pub d: Option<u32>,
    pub base_modulus: Vec<Elem>,
    pub extension_modulus: Option<Vec<Elem>>,
    pub beta: Elem,
    pub alpha: Option<Elem>,
}

impl FieldContext {
    pub fn descriptor(&self) -> FieldDescriptor {
        FieldDescriptor {
            p: self.p,
            n: self.n,
            d: None,
            base_modulus: self.modulus.coeffs().to_vec(),
            extension_modulus: None,
            beta: self.beta,
            alpha: None,
        }
    }
}
