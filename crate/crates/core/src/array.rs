//! The `(q−1) × (q^d−1)/(q−1)` array view of the period-`(q^d−1)` sequence.
//!
//! Columns are never materialized as a 2-D array. Each column comes either
//! from strided indexing into the long sequence or from the norm formula
//! `v_l(t) = log_beta N(alpha^l beta^t + 1) mod M`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Elem, ExtensionContext, FiniteField};
use crate::poly::Poly;
use crate::sidelnikov::{check_alphabet, MSequence, Provenance};

/// Orbit of `l` under multiplication by `q` modulo `modulus`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CyclotomicCoset {
    pub modulus: u64,
    pub representative: u64,
    /// `l, ql, q²l, …` in orbit order, starting from the generating `l`.
    pub members: Vec<u64>,
}

impl CyclotomicCoset {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

pub fn coset(l: u64, modulus: u64, q: u64) -> CyclotomicCoset {
    let start = l % modulus;
    let mut members = vec![start];
    let mut x = crate::arith::mul_mod(start, q, modulus);
    while x != start {
        members.push(x);
        x = crate::arith::mul_mod(x, q, modulus);
    }
    let representative = *members.iter().min().expect("orbit is nonempty");
    CyclotomicCoset { modulus, representative, members }
}

/// All cosets modulo `modulus`, ordered by representative.
pub fn coset_partition(modulus: u64, q: u64) -> Vec<CyclotomicCoset> {
    let mut seen = vec![false; modulus as usize];
    let mut out = Vec::new();
    for l in 0..modulus {
        if seen[l as usize] {
            continue;
        }
        let c = coset(l, modulus, q);
        for &m in &c.members {
            seen[m as usize] = true;
        }
        out.push(c);
    }
    out
}

/// Column `l` straight from the norm formula; any `l ≥ 0` is accepted.
pub fn column_formula(ext: &ExtensionContext, l: u64, m: u64) -> Result<MSequence> {
    let base = ext.base();
    check_alphabet(base.q(), m)?;
    let stride = ext.repunit() as i64;
    let symbols = (0..base.period() as i64)
        .map(|t| {
            // alpha^l beta^t = alpha^(l + L t)
            let x = ext.add(ext.exp(l as i64 + stride * t), 1);
            (base.dlog(ext.norm(x)) % m) as u32
        })
        .collect();
    MSequence::new(symbols, m as u32, Provenance::Column { l })
}

/// Column `l` of the array, `0 ≤ l < (q^d−1)/(q−1)`.
pub fn column_sequence(ext: &ExtensionContext, l: u64, m: u64) -> Result<MSequence> {
    if l >= ext.repunit() {
        return Err(Error::ColumnOutOfRange { l, bound: ext.repunit() });
    }
    column_formula(ext, l, m)
}

/// Column `l` read off the long sequence: `v_l(t) = s(L·t + l)`.
pub fn column_from_array(ext: &ExtensionContext, long: &MSequence, l: u64) -> Result<MSequence> {
    let stride = ext.repunit();
    if l >= stride {
        return Err(Error::ColumnOutOfRange { l, bound: stride });
    }
    if long.period() as u64 != ext.period() {
        return Err(Error::SequenceMismatch(format!(
            "expected period {}, got {}",
            ext.period(),
            long.period()
        )));
    }
    let symbols = (0..ext.base().period())
        .map(|t| long.symbols()[(stride * t + l) as usize])
        .collect();
    MSequence::new(symbols, long.alphabet(), Provenance::Column { l })
}

/// Column index paired with `l` by the shift identity:
/// `L − ((q^(d−1) − 1)/(q − 1))·l`, reduced modulo `L`.
pub fn shift_partner(ext: &ExtensionContext, l: u64) -> u64 {
    let big = ext.repunit() as i128;
    let small = crate::arith::repunit(ext.q(), ext.d() - 1).expect("smaller than L") as i128;
    (big - small * l as i128).rem_euclid(big) as u64
}

/// Applies `sigma^j` to every coefficient.
pub fn frobenius_coefficients(ext: &ExtensionContext, poly: &Poly, j: u32) -> Poly {
    poly.map_coeffs(|c| ext.frobenius(c, j))
}

/// Reinterprets a polynomial over GF(q^d) whose coefficients all lie in GF(q).
pub fn project_to_base(ext: &ExtensionContext, poly: &Poly) -> Result<Poly> {
    if let Some(c) = poly.coeffs().iter().find(|&&c| !ext.in_base(c)) {
        return Err(Error::Consistency(format!(
            "coefficient {c} of {poly} is not in GF({})",
            ext.q()
        )));
    }
    Ok(poly.clone())
}

/// `∏_j (x + alpha^(−e_j))` over the given exponents, in GF(q^d)[x].
pub fn root_product(ext: &ExtensionContext, exponents: impl IntoIterator<Item = u64>) -> Poly {
    exponents.into_iter().fold(Poly::one(), |acc, e| {
        acc.mul(&Poly::linear(ext.exp(-(e as i64))), ext)
    })
}

/// Number of distinct Frobenius conjugates of `x`, i.e. the degree of its
/// minimal polynomial over GF(q).
pub fn conjugate_orbit_size(ext: &ExtensionContext, x: Elem) -> usize {
    let mut y = ext.frobenius(x, 1);
    let mut k = 1;
    while y != x {
        y = ext.frobenius(y, 1);
        k += 1;
    }
    k
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ColumnPolynomial {
    pub l: u64,
    /// `f_l(x) = N(alpha^l x + 1)`, degree d over GF(q).
    pub f: Poly,
    /// Minimal polynomial of `−alpha^(−l)` over GF(q), degree `d_l`.
    pub p: Poly,
    /// Partial product over the first `m_l` conjugates, over GF(q^d).
    pub q_part: Poly,
    pub d_l: usize,
    pub m_l: usize,
}

pub fn column_polynomial(ext: &ExtensionContext, l: u64) -> Result<ColumnPolynomial> {
    let q = ext.q();
    let d = ext.d();
    let base = ext.base();

    let f_ext = (0..d).fold(Poly::one(), |acc, j| {
        let c = ext.frobenius(ext.exp(l as i64), j);
        acc.mul(&Poly::affine(c), ext)
    });
    let f = project_to_base(ext, &f_ext)?;

    let big = coset(l, ext.period(), q);
    let small = coset(l, ext.repunit(), q);
    let d_l = big.size();
    let m_l = small.size();
    let p = project_to_base(ext, &root_product(ext, big.members.iter().copied()))?;
    // exponents l·q^k for k < m_l, kept modulo q^d − 1 rather than L
    let q_part = root_product(ext, big.members.iter().copied().take(m_l));

    let beta_l = base.exp(l as i64);
    let expected = p.pow((d as usize / d_l) as u64, base).scale(beta_l, base);
    if expected != f {
        return Err(Error::Consistency(format!(
            "f_{l} = {f} but beta^l p_l^(d/d_l) = {expected}"
        )));
    }
    Ok(ColumnPolynomial { l, f, p, q_part, d_l, m_l })
}

impl ColumnPolynomial {
    /// `∏_{i < d_l/m_l} q_l^(sigma^(i m_l))`, which must equal `p_l`.
    pub fn conjugate_product(&self, ext: &ExtensionContext) -> Poly {
        (0..self.d_l / self.m_l).fold(Poly::one(), |acc, i| {
            let conj = frobenius_coefficients(ext, &self.q_part, (i * self.m_l) as u32);
            acc.mul(&conj, ext)
        })
    }
}
