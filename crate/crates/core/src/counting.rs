//! Family size: irreducible counts by constant term and their assembly
//! into |Λ|, plus brute-force oracles and the asymptotic law.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{checked_pow, divisors, gcd, mobius, phi, repunit};
use crate::error::{Error, Result};
use crate::family::coset_representatives;
use crate::field::{Elem, FieldContext, FiniteField};
use crate::poly::Poly;

/// `r ∈ A_f` with `r = d_rf · m_rf`, `d_rf = (r, (q^f−1)/(q−1))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AfEntry {
    pub r: u64,
    pub d_rf: u64,
    pub m_rf: u64,
}

fn check_q(q: u64) -> Result<()> {
    if q < 2 {
        return Err(Error::InvalidParameter(format!("q must be at least 2, got {q}")));
    }
    Ok(())
}

/// Divisors of `q^f − 1` that divide no `q^g − 1` with `g < f`.
pub fn a_f_set(q: u64, f: u32) -> Result<Vec<AfEntry>> {
    check_q(q)?;
    if f == 0 {
        return Err(Error::InvalidParameter("f must be at least 1".into()));
    }
    let top = checked_pow(q, f)? - 1;
    let smaller: Vec<u64> = (1..f).map(|g| q.pow(g) - 1).collect();
    let l = repunit(q, f)?;
    Ok(divisors(top)
        .into_iter()
        .filter(|r| smaller.iter().all(|s| s % r != 0))
        .map(|r| {
            let d_rf = gcd(r, l);
            AfEntry { r, d_rf, m_rf: r / d_rf }
        })
        .collect())
}

/// `Σ φ(r)` over `r ∈ A_f` with `m_rf = m`.
fn phi_sum(q: u64, f: u32, m: u64) -> Result<u64> {
    Ok(a_f_set(q, f)?
        .into_iter()
        .filter(|e| e.m_rf == m)
        .map(|e| phi(e.r))
        .sum())
}

/// Number of monic irreducibles of degree `f` with constant term `(−1)^f b`
/// for any `b` of multiplicative order `m`.
pub fn yucas_count_by_order(f: u32, m: u64, q: u64) -> Result<u64> {
    if m == 0 {
        return Err(Error::InvalidParameter("order must be positive".into()));
    }
    let total = phi_sum(q, f, m)?;
    let denom = f as u64 * phi(m);
    if total % denom != 0 {
        return Err(Error::Consistency(format!(
            "sum {total} not divisible by f·φ(m) = {denom} (q={q}, f={f}, m={m})"
        )));
    }
    Ok(total / denom)
}

pub fn yucas_count(ctx: &FieldContext, f: u32, b: Elem) -> Result<u64> {
    let m = ctx
        .element_order(b)
        .ok_or_else(|| Error::InvalidParameter("constant term b must be nonzero".into()))?;
    yucas_count_by_order(f, m, ctx.q())
}

/// One `(e, m)` cell of the triple sum for |Λ|.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BreakdownTerm {
    pub e: u32,
    pub m: u64,
    /// Elements of order `m` in GF(q)×.
    pub b_count: u64,
    pub per_b: u64,
    pub contribution: u64,
}

/// Cells of the triple sum over `e | d`, `m | d/e`, `o(b) = m`.
pub fn lambda_breakdown(q: u64, d: u32) -> Result<Vec<BreakdownTerm>> {
    check_q(q)?;
    let mut terms = Vec::new();
    for e in divisors(d as u64) {
        let e = e as u32;
        for m in divisors((d / e) as u64) {
            let b_count = if (q - 1).is_multiple_of(m) { phi(m) } else { 0 };
            let per_b = yucas_count_by_order(e, m, q)?;
            terms.push(BreakdownTerm { e, m, b_count, per_b, contribution: b_count * per_b });
        }
    }
    Ok(terms)
}

/// The closed form `Σ_e (1/e) Σ_{m | d/e} Σ_{r ∈ A_e, m_re = m} φ(r)`.
pub fn lambda_closed_form(q: u64, d: u32) -> Result<u64> {
    check_q(q)?;
    let mut total = 0;
    for e in divisors(d as u64) {
        let e = e as u32;
        let inner: u64 = divisors((d / e) as u64)
            .into_iter()
            .map(|m| phi_sum(q, e, m))
            .sum::<Result<u64>>()?;
        if !inner.is_multiple_of(e as u64) {
            return Err(Error::Consistency(format!("inner sum {inner} not divisible by e={e}")));
        }
        total += inner / e as u64;
    }
    Ok(total)
}

/// |Λ|, the number of monic irreducible factors of `x^((q^d−1)/(q−1)) − 1`,
/// from both the closed form and the per-element sum.
pub fn lambda_size(q: u64, d: u32) -> Result<u64> {
    if d < 2 {
        return Err(Error::InvalidParameter("d must be at least 2".into()));
    }
    let closed = lambda_closed_form(q, d)?;
    let summed: u64 = lambda_breakdown(q, d)?.iter().map(|t| t.contribution).sum();
    if closed != summed {
        return Err(Error::Consistency(format!(
            "closed form {closed} disagrees with element sum {summed} (q={q}, d={d})"
        )));
    }
    Ok(closed)
}

/// `(M−1)·q^(d−1)/d`.
pub fn asymptotic_size(q: u64, d: u32, m: u64) -> Result<f64> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("M must be at least 2, got {m}")));
    }
    if d == 0 {
        return Err(Error::InvalidParameter("d must be positive".into()));
    }
    Ok((m - 1) as f64 * (q as f64).powi(d as i32 - 1) / d as f64)
}

/// `|Σ| / asymptotic`, which does not depend on M.
pub fn asymptotic_ratio(q: u64, d: u32) -> Result<f64> {
    let lambda = lambda_size(q, d)?;
    Ok((lambda - 1) as f64 / asymptotic_size(q, d, 2)?)
}

/// Monic irreducibles of degree `f`, by necklace counting.
pub fn mobius_count(q: u64, f: u32) -> Result<u64> {
    check_q(q)?;
    let mut acc: i128 = 0;
    for k in divisors(f as u64) {
        acc += mobius(k) as i128 * checked_pow(q, f / k as u32)? as i128;
    }
    Ok((acc / f as i128) as u64)
}

/// Index `i` as the monic polynomial whose lower coefficients are the
/// base-q digits of `i`.
fn nth_monic(i: u64, q: u64, f: u32) -> Poly {
    let mut coeffs = Vec::with_capacity(f as usize + 1);
    let mut rest = i;
    for _ in 0..f {
        coeffs.push((rest % q) as Elem);
        rest /= q;
    }
    coeffs.push(1);
    Poly::new(coeffs)
}

/// Monic irreducibles of degree `f` counted by constant term, indexed by
/// the constant's encoding. Exhaustive.
pub fn irreducibles_by_constant(ctx: &FieldContext, f: u32) -> Result<Vec<u64>> {
    if f == 0 {
        return Err(Error::InvalidParameter("f must be at least 1".into()));
    }
    let q = ctx.q();
    let total = checked_pow(q, f)?;
    let qs = q as usize;
    Ok((0..total)
        .into_par_iter()
        .fold(
            || vec![0u64; qs],
            |mut acc, i| {
                let poly = nth_monic(i, q, f);
                if poly.is_irreducible(ctx) {
                    acc[poly.coeff(0) as usize] += 1;
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; qs],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        ))
}

/// Brute-force `N(f, b, q)` for every `b`, indexed by the encoding of `b`.
pub fn brute_force_yucas(ctx: &FieldContext, f: u32) -> Result<Vec<u64>> {
    let by_constant = irreducibles_by_constant(ctx, f)?;
    let sign = if f.is_multiple_of(2) { ctx.one() } else { ctx.neg(ctx.one()) };
    let mut out = vec![0u64; by_constant.len()];
    for (c, count) in by_constant.into_iter().enumerate() {
        out[ctx.mul(sign, c as Elem) as usize] = count;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeviationCheck {
    pub q: u64,
    pub f: u32,
    pub m: u64,
    pub exact: u64,
    /// `q^f / (f(q−1))`.
    pub expected: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Exact count against `|N − q^f/(f(q−1))| ≤ (2/f) q^(f/2)`.
pub fn deviation_check(q: u64, f: u32, m: u64) -> Result<DeviationCheck> {
    let exact = yucas_count_by_order(f, m, q)?;
    let qf = (q as f64).powi(f as i32);
    let expected = qf / (f as f64 * (q - 1) as f64);
    let bound = 2.0 / f as f64 * qf.sqrt();
    Ok(DeviationCheck {
        q,
        f,
        m,
        exact,
        expected,
        bound,
        holds: (exact as f64 - expected).abs() <= bound,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LambdaBoundCheck {
    pub lambda: u64,
    /// `d Σ_{e|d} q^e / (e²(q−1))`.
    pub center: f64,
    /// `2d Σ_{e|d} q^(e/2) / e²`.
    pub bound: f64,
    pub holds: bool,
    /// Same estimate weighted by the actual number `(d/e, q−1)` of
    /// constants `b` with `b^(d/e) = 1`, rather than `d/e`.
    pub corrected_center: f64,
    pub corrected_bound: f64,
    pub corrected_holds: bool,
}

pub fn lambda_bound_check(q: u64, d: u32) -> Result<LambdaBoundCheck> {
    let lambda = lambda_size(q, d)?;
    let qf = q as f64;
    let (mut center, mut bound) = (0.0, 0.0);
    let (mut corrected_center, mut corrected_bound) = (0.0, 0.0);
    for e in divisors(d as u64) {
        let ef = e as f64;
        let main = qf.powi(e as i32) / (ef * (qf - 1.0));
        let err = 2.0 / ef * qf.powf(ef / 2.0);
        let nominal = (d as u64 / e) as f64;
        let actual = gcd(d as u64 / e, q - 1) as f64;
        center += nominal * main;
        bound += nominal * err;
        corrected_center += actual * main;
        corrected_bound += actual * err;
    }
    let lf = lambda as f64;
    Ok(LambdaBoundCheck {
        lambda,
        center,
        bound,
        holds: (lf - center).abs() <= bound,
        corrected_center,
        corrected_bound,
        corrected_holds: (lf - corrected_center).abs() <= corrected_bound,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CountReport {
    pub q: u64,
    pub d: u32,
    #[serde(rename = "M")]
    pub m: u64,
    pub lambda_size_formula: u64,
    pub lambda_size_cosets: u64,
    pub family_size: u64,
    pub asymptotic: f64,
    pub ratio: f64,
    pub breakdown: Vec<BreakdownTerm>,
    pub lambda_bound: LambdaBoundCheck,
}

impl CountReport {
    pub fn passed(&self) -> bool {
        self.lambda_size_formula == self.lambda_size_cosets
    }
}

pub fn count_report(q: u64, d: u32, m: u64) -> Result<CountReport> {
    crate::arith::prime_power(q)?;
    crate::sidelnikov::check_alphabet(q, m)?;
    let lambda_size_formula = lambda_size(q, d)?;
    let lambda_size_cosets = coset_representatives(q, d)?.len() as u64;
    let family_size = (m - 1) * (lambda_size_formula - 1);
    let asymptotic = asymptotic_size(q, d, m)?;
    Ok(CountReport {
        q,
        d,
        m,
        lambda_size_formula,
        lambda_size_cosets,
        family_size,
        asymptotic,
        ratio: family_size as f64 / asymptotic,
        breakdown: lambda_breakdown(q, d)?,
        lambda_bound: lambda_bound_check(q, d)?,
    })
}

/// Exact against asymptotic sizes, one row per report.
pub fn sweep_csv(reports: &[CountReport]) -> String {
    let mut out = String::from("q,d,M,lambda,family_size,asymptotic,ratio\n");
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.6},{:.6}",
            r.q, r.d, r.m, r.lambda_size_formula, r.family_size, r.asymptotic, r.ratio
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::build_field_of_order;

    fn rs(q: u64, f: u32) -> Vec<u64> {
        a_f_set(q, f).unwrap().into_iter().map(|e| e.r).collect()
    }

    #[test]
    fn a_f_examples() {
        assert_eq!(rs(4, 2), vec![5, 15]);
        assert_eq!(rs(13, 1), divisors(12));
        assert_eq!(a_f_set(7, 1).unwrap()[0], AfEntry { r: 1, d_rf: 1, m_rf: 1 });
        for e in a_f_set(5, 3).unwrap() {
            assert_eq!(e.d_rf * e.m_rf, e.r);
            assert_eq!(e.d_rf, gcd(e.r, 31));
        }
        assert!(a_f_set(4, 0).is_err());
    }

    #[test]
    fn linear_count_is_one() {
        for q in [2u64, 3, 4, 5, 7, 8, 9, 13, 16] {
            for m in divisors(q - 1) {
                assert_eq!(yucas_count_by_order(1, m, q).unwrap(), 1);
            }
        }
    }

    #[test]
    fn zero_constant_rejected() {
        let ctx = build_field_of_order(5, 1 << 10).unwrap();
        assert!(yucas_count(&ctx, 2, 0).is_err());
        assert_eq!(yucas_count(&ctx, 2, 1).unwrap(), yucas_count_by_order(2, 1, 5).unwrap());
    }

    #[test]
    fn matches_exhaustive_enumeration() {
        for q in [2u64, 3, 4, 5, 7, 8, 9, 16] {
            let ctx = build_field_of_order(q, 1 << 16).unwrap();
            for f in 1..=4u32 {
                if q.pow(f) > 1 << 16 {
                    continue;
                }
                let brute = brute_force_yucas(&ctx, f).unwrap();
                assert_eq!(brute[0], if f == 1 { 1 } else { 0 });
                for b in 1..q as Elem {
                    assert_eq!(yucas_count(&ctx, f, b).unwrap(), brute[b as usize], "q={q} f={f} b={b}");
                }
                assert_eq!(brute.iter().sum::<u64>(), mobius_count(q, f).unwrap());
            }
        }
    }

    #[test]
    fn mobius_small_values() {
        assert_eq!(mobius_count(2, 4).unwrap(), 3);
        assert_eq!(mobius_count(3, 2).unwrap(), 3);
        assert_eq!(mobius_count(2, 1).unwrap(), 2);
    }

    #[test]
    fn lambda_for_d2() {
        assert_eq!(lambda_size(4, 2).unwrap(), 3);
        for q in [3u64, 4, 5, 7, 8, 9, 11, 13, 16, 25, 27, 49, 64, 81, 256] {
            assert_eq!(lambda_size(q, 2).unwrap() - 1, q.div_ceil(2), "q={q}");
        }
        assert!(lambda_size(4, 1).is_err());
    }

    #[test]
    fn lambda_matches_cosets() {
        for (q, d) in [(2u64, 6u32), (3, 4), (4, 3), (5, 3), (7, 3), (16, 3), (2, 12), (3, 6)] {
            let cosets = coset_representatives(q, d).unwrap().len() as u64;
            assert_eq!(lambda_size(q, d).unwrap(), cosets, "q={q} d={d}");
        }
    }

    #[test]
    fn b_counts_match_field() {
        let ctx = build_field_of_order(13, 1 << 10).unwrap();
        for term in lambda_breakdown(13, 6).unwrap() {
            let actual = (1..13).filter(|&b| ctx.element_order(b) == Some(term.m)).count() as u64;
            assert_eq!(term.b_count, actual);
            assert_eq!((6 / term.e) as u64 % term.m, 0);
        }
    }

    #[test]
    fn asymptotics() {
        let a = asymptotic_size(41, 3, 2).unwrap();
        assert!((a - 1681.0 / 3.0).abs() < 1e-9);
        assert!(asymptotic_size(41, 3, 1).is_err());
        let r16 = asymptotic_ratio(16, 2).unwrap();
        assert!((r16 - 1.0).abs() < 1e-12);
        let r13 = asymptotic_ratio(13, 2).unwrap();
        assert!((r13 - 14.0 / 13.0).abs() < 1e-12);
    }

    #[test]
    fn deviation_examples() {
        let c = deviation_check(4, 3, 3).unwrap();
        assert!(c.holds);
        assert!((c.expected - 64.0 / 9.0).abs() < 1e-12);
        assert!(lambda_bound_check(41, 3).unwrap().holds);
    }

    #[test]
    fn lambda_bound_needs_actual_constant_count() {
        // only b = 1 exists over GF(2), but the nominal center counts d/e of them
        let c = lambda_bound_check(2, 18).unwrap();
        assert_eq!(c.lambda, 14601);
        assert!(!c.holds);
        assert!(c.corrected_holds);
        for (q, d) in [(41u64, 3u32), (16, 2), (3, 12), (2, 20), (4, 10)] {
            assert!(lambda_bound_check(q, d).unwrap().corrected_holds, "q={q} d={d}");
        }
    }

    #[test]
    fn report_and_csv() {
        let r = count_report(16, 2, 5).unwrap();
        assert!(r.passed());
        assert_eq!(r.family_size, 32);
        assert_eq!(r.asymptotic, 32.0);
        let csv = sweep_csv(&[r]);
        assert_eq!(csv, "q,d,M,lambda,family_size,asymptotic,ratio\n16,2,5,9,32,32.000000,1.000000\n");
        assert!(count_report(16, 2, 4).is_err());
        assert!(count_report(6, 2, 5).is_err());
    }
}
