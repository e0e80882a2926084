//! The family Σ of constant multiples `c·v_l` over coset representatives.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::arith::{gcd, repunit};
use crate::array::{column_sequence, coset, coset_partition, project_to_base, root_product};
use crate::error::{Error, Result};
use crate::field::{Elem, ExtensionContext, FiniteField};
use crate::poly::Poly;
use crate::sidelnikov::{check_alphabet, write_sequence, ExportHeader, MSequence};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    /// Both restrictions `(d, q−1) = 1` and `d < (√q − 2/√q + 1)/2` enforced.
    Strict,
    /// `d = 2`, `q` odd: the gcd condition is waived and `(q+1)/2` is
    /// dropped from the representatives.
    RelaxedD2,
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Policy::Strict => "strict",
            Policy::RelaxedD2 => "relaxed-d2",
        })
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(Policy::Strict),
            "relaxed-d2" => Ok(Policy::RelaxedD2),
            other => Err(Error::InvalidParameter(format!("unknown policy {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RestrictionReport {
    pub q: u64,
    pub d: u32,
    pub gcd_d_q_minus_1: u64,
    pub coprime: bool,
    /// `(√q − 2/√q + 1)/2`.
    pub degree_threshold: f64,
    pub below_threshold: bool,
    /// `d = 2` and `q` odd: the gcd condition may be waived.
    pub d2_relaxation_available: bool,
    /// Representative that must be dropped when the relaxation is used.
    pub d2_relaxation_drops: Option<u64>,
}

impl RestrictionReport {
    pub fn strict_ok(&self) -> bool {
        self.coprime && self.below_threshold
    }

    pub fn relaxed_ok(&self) -> bool {
        self.d2_relaxation_available && self.below_threshold
    }

    fn violation(&self, policy: Policy) -> Option<String> {
        let mut reasons = Vec::new();
        match policy {
            Policy::Strict => {
                if !self.coprime {
                    reasons.push(format!("gcd(d, q−1) = {} ≠ 1", self.gcd_d_q_minus_1));
                }
            }
            Policy::RelaxedD2 => {
                if !self.d2_relaxation_available {
                    reasons.push("relaxed-d2 requires d = 2 and q odd".to_string());
                }
            }
        }
        if !self.below_threshold {
            reasons.push(format!(
                "d = {} is not below (√q − 2/√q + 1)/2 = {:.6}",
                self.d, self.degree_threshold
            ));
        }
        (!reasons.is_empty()).then(|| reasons.join("; "))
    }
}

pub fn check_restrictions(q: u64, d: u32) -> RestrictionReport {
    let g = gcd(d as u64, q - 1);
    let sq = (q as f64).sqrt();
    let threshold = (sq - 2.0 / sq + 1.0) / 2.0;
    let relax = d == 2 && q % 2 == 1;
    RestrictionReport {
        q,
        d,
        gcd_d_q_minus_1: g,
        coprime: g == 1,
        degree_threshold: threshold,
        below_threshold: (d as f64) < threshold,
        d2_relaxation_available: relax,
        d2_relaxation_drops: relax.then_some(q.div_ceil(2)),
    }
}

/// Smallest member of every q-cyclotomic coset mod `(q^d−1)/(q−1)`, sorted;
/// includes 0.
pub fn coset_representatives(q: u64, d: u32) -> Result<Vec<u64>> {
    if d < 2 {
        return Err(Error::InvalidParameter("d must be at least 2".into()));
    }
    let modulus = repunit(q, d)?;
    Ok(coset_partition(modulus, q)
        .into_iter()
        .map(|c| c.representative)
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyMember {
    pub c: u64,
    pub l: u64,
    /// Size of the coset of `l` mod `q^d − 1`, the degree of `p_l`.
    pub d_l: usize,
    #[serde(skip)]
    pub sequence: MSequence,
}

#[derive(Clone, Debug)]
pub struct SequenceFamily {
    pub q: u64,
    pub d: u32,
    pub m: u64,
    pub policy: Policy,
    pub lambda: Vec<u64>,
    /// Column indices actually used, `Λ∖{0}` or `Λ∖{0, (q+1)/2}`.
    pub columns: Vec<u64>,
    /// Ordered by `(c, l)`.
    pub members: Vec<FamilyMember>,
    pub restrictions: RestrictionReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyManifest {
    pub q: u64,
    pub d: u32,
    #[serde(rename = "M")]
    pub m: u64,
    pub policy: Policy,
    pub lambda: Vec<u64>,
    pub columns: Vec<u64>,
    pub size: usize,
    pub restriction_report: RestrictionReport,
}

pub fn build_family(ext: &ExtensionContext, m: u64, policy: Policy) -> Result<SequenceFamily> {
    let q = ext.q();
    let d = ext.d();
    check_alphabet(q, m)?;
    let restrictions = check_restrictions(q, d);
    if let Some(reason) = restrictions.violation(policy) {
        return Err(Error::RestrictionViolated { policy: policy.to_string(), reason });
    }
    let lambda = coset_representatives(q, d)?;
    let dropped = match policy {
        Policy::Strict => None,
        Policy::RelaxedD2 => restrictions.d2_relaxation_drops,
    };
    let columns: Vec<u64> = lambda
        .iter()
        .copied()
        .filter(|&l| l != 0 && Some(l) != dropped)
        .collect();

    let built: Vec<(u64, usize, MSequence)> = columns
        .par_iter()
        .map(|&l| {
            let v = column_sequence(ext, l, m)?;
            Ok((l, coset(l, ext.period(), q).size(), v))
        })
        .collect::<Result<_>>()?;

    let mut members = Vec::with_capacity((m as usize - 1) * columns.len());
    for c in 1..m {
        for (l, d_l, v) in &built {
            members.push(FamilyMember { c, l: *l, d_l: *d_l, sequence: v.multiple(c, *l) });
        }
    }
    Ok(SequenceFamily { q, d, m, policy, lambda, columns, members, restrictions })
}

impl SequenceFamily {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn period(&self) -> usize {
        (self.q - 1) as usize
    }

    pub fn manifest(&self) -> FamilyManifest {
        FamilyManifest {
            q: self.q,
            d: self.d,
            m: self.m,
            policy: self.policy,
            lambda: self.lambda.clone(),
            columns: self.columns.clone(),
            size: self.members.len(),
            restriction_report: self.restrictions.clone(),
        }
    }

    pub fn write_payload<W: Write>(&self, out: &mut W) -> io::Result<()> {
        for member in &self.members {
            let header = ExportHeader::for_sequence(self.q, self.d, &member.sequence);
            write_sequence(out, &header, &member.sequence)?;
        }
        Ok(())
    }
}

/// `beta^(−tau d_l) p_l(beta^tau x) = ∏_s (x + alpha^(−l q^s) beta^(−tau))`,
/// built from its roots.
pub fn shifted_minimal_polynomial(ext: &ExtensionContext, l: u64, tau: u64) -> Result<Poly> {
    let base = ext.base();
    let shift = ext.embed(base.exp(-(tau as i64)));
    let roots = coset(l, ext.period(), ext.q()).members;
    let poly = roots.into_iter().fold(Poly::one(), |acc, e| {
        let r = ext.mul(ext.exp(-(e as i64)), shift);
        acc.mul(&Poly::linear(r), ext)
    });
    project_to_base(ext, &poly)
}

pub fn minimal_polynomial(ext: &ExtensionContext, l: u64) -> Result<Poly> {
    let members = coset(l, ext.period(), ext.q()).members;
    project_to_base(ext, &root_product(ext, members))
}

/// True iff `p_{l1}` and the `tau`-shifted `p_{l2}` differ.
pub fn distinct_shift_check(ext: &ExtensionContext, l1: u64, l2: u64, tau: u64) -> Result<bool> {
    Ok(minimal_polynomial(ext, l1)? != shifted_minimal_polynomial(ext, l2, tau)?)
}

/// Every `(l1, l2, tau)` with `(l1, l2, tau) ≠ (l, l, 0)` whose polynomials
/// coincide, over the given column set and all `0 ≤ tau ≤ q−2`.
pub fn distinct_shift_violations(ext: &ExtensionContext, columns: &[u64]) -> Result<Vec<(u64, u64, u64)>> {
    let mut seen: FxHashMap<Poly, (u64, u64)> = FxHashMap::default();
    let mut violations = Vec::new();
    for &l in columns {
        for tau in 0..ext.base().period() {
            let poly = shifted_minimal_polynomial(ext, l, tau)?;
            if let Some(&(l0, tau0)) = seen.get(&poly) {
                // (l0, tau0) vs (l, tau) ⇔ (l0, l, tau − tau0) after rescaling
                let rel = (tau + ext.base().period() - tau0) % ext.base().period();
                violations.push((l0, l, rel));
            } else {
                seen.insert(poly, (l, tau));
            }
        }
    }
    Ok(violations)
}

/// A monic irreducible factor of `x^L − 1`, `L = (q^d−1)/(q−1)`.
#[derive(Clone, Debug, Serialize)]
pub struct CyclotomicFactor {
    pub representative: u64,
    pub poly: Poly,
    pub degree: usize,
    /// `b` where the constant term is `(−1)^e b`.
    pub b: Elem,
}

/// `M^(l)(x) = ∏_{j ∈ Ĉ_l} (x − gamma^j)` with `gamma = alpha^(q−1)`, one per
/// representative.
pub fn cyclotomic_factors(ext: &ExtensionContext) -> Result<Vec<CyclotomicFactor>> {
    let q = ext.q();
    let base = ext.base();
    coset_partition(ext.repunit(), q)
        .into_iter()
        .map(|c| {
            let poly = c.members.iter().fold(Poly::one(), |acc, &j| {
                let root = ext.exp(((q - 1) * j) as i64);
                acc.mul(&Poly::linear(ext.neg(root)), ext)
            });
            let poly = project_to_base(ext, &poly)?;
            let degree = c.size();
            let constant = poly.coeff(0);
            let b = if degree % 2 == 0 { constant } else { base.neg(constant) };
            Ok(CyclotomicFactor { representative: c.representative, poly, degree, b })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct FactorizationCheck {
    pub factor_count: usize,
    pub degree_sum: u64,
    pub all_divide: bool,
    pub all_irreducible: bool,
    pub pairwise_distinct: bool,
    /// `e | d` and `b^(d/e) = 1` for every factor.
    pub degrees_and_constants_ok: bool,
    /// Full product compared against `x^L − 1`; `None` when `L` exceeds the
    /// limit given to [`verify_factorization`].
    pub product_matches: Option<bool>,
}

impl FactorizationCheck {
    /// Together these force the factors to be exactly the irreducible
    /// factorization of the squarefree `x^L − 1`.
    pub fn passed(&self, l: u64) -> bool {
        self.all_divide
            && self.all_irreducible
            && self.pairwise_distinct
            && self.degree_sum == l
            && self.degrees_and_constants_ok
            && self.product_matches != Some(false)
    }
}

pub fn verify_factorization(ext: &ExtensionContext, full_product_limit: u64) -> Result<FactorizationCheck> {
    let base = ext.base();
    let big_l = ext.repunit();
    let d = ext.d() as usize;
    let factors = cyclotomic_factors(ext)?;
    let target = Poly::monomial(big_l as usize).sub(&Poly::one(), base);
    let x = Poly::monomial(1);

    let all_divide = factors
        .par_iter()
        .all(|f| x.pow_mod(big_l, &f.poly, base) == Poly::one().rem(&f.poly, base));
    let all_irreducible = factors.par_iter().all(|f| f.poly.is_irreducible(base));
    let mut polys: Vec<&Poly> = factors.iter().map(|f| &f.poly).collect();
    polys.sort();
    let pairwise_distinct = polys.windows(2).all(|w| w[0] != w[1]);
    let degrees_and_constants_ok = factors
        .iter()
        .all(|f| d.is_multiple_of(f.degree) && base.pow(f.b, (d / f.degree) as u64) == 1);
    let product_matches = (big_l <= full_product_limit).then(|| {
        factors
            .iter()
            .fold(Poly::one(), |acc, f| acc.mul(&f.poly, base))
            == target
    });
    Ok(FactorizationCheck {
        factor_count: factors.len(),
        degree_sum: factors.iter().map(|f| f.degree as u64).sum(),
        all_divide,
        all_irreducible,
        pairwise_distinct,
        degrees_and_constants_ok,
        product_matches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{build_extension, build_field};

    #[test]
    fn lambda_for_d2_is_one_to_half() {
        for q in [4u64, 5, 7, 8, 9, 16, 25, 27] {
            let lambda = coset_representatives(q, 2).unwrap();
            let expected: Vec<u64> = (0..=q.div_ceil(2)).collect();
            assert_eq!(lambda, expected, "q={q}");
        }
        assert_eq!(coset_representatives(4, 2).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn restriction_examples() {
        let r = check_restrictions(41, 3);
        assert!(r.coprime && r.below_threshold);
        assert!((r.degree_threshold - 3.5455).abs() < 1e-3);

        let r = check_restrictions(9, 2);
        assert!(!r.below_threshold);
        assert!((r.degree_threshold - 5.0 / 3.0).abs() < 1e-12);
        assert!(r.d2_relaxation_available);
        assert_eq!(r.d2_relaxation_drops, Some(5));

        let r = check_restrictions(16, 2);
        assert!(r.coprime && r.below_threshold);
        assert!((r.degree_threshold - 2.25).abs() < 1e-12);
        assert!(!r.d2_relaxation_available);
    }

    #[test]
    fn bound_condition_fails_exactly_on_small_q_for_d2() {
        let failing: Vec<u64> = [2u64, 3, 4, 5, 7, 8, 9, 11, 13, 16, 17, 19, 23, 25]
            .into_iter()
            .filter(|&q| !check_restrictions(q, 2).below_threshold)
            .collect();
        assert_eq!(failing, vec![2, 3, 4, 5, 7, 8, 9, 11]);
    }

    #[test]
    fn q16_m5_family_size() {
        let base = build_field(2, 4).unwrap();
        let ext = build_extension(&base, 2).unwrap();
        let fam = build_family(&ext, 5, Policy::Strict).unwrap();
        assert_eq!(fam.len(), 32);
        assert!(fam.members.iter().all(|m| m.sequence.period() == 15));
        assert!(fam.members.iter().all(|m| m.sequence.alphabet() == 5));
        assert_eq!(fam.columns, (1..=8).collect::<Vec<_>>());
    }

    #[test]
    fn strict_policy_rejects_and_relaxed_accepts_q13() {
        let base = build_field(13, 1).unwrap();
        let ext = build_extension(&base, 2).unwrap();
        assert!(matches!(
            build_family(&ext, 4, Policy::Strict),
            Err(Error::RestrictionViolated { .. })
        ));
        let fam = build_family(&ext, 4, Policy::RelaxedD2).unwrap();
        assert_eq!(fam.columns, (1..=6).collect::<Vec<_>>());
        assert_eq!(fam.len(), 3 * 6);
    }

    #[test]
    fn relaxed_policy_needs_odd_q() {
        let base = build_field(2, 4).unwrap();
        let ext = build_extension(&base, 2).unwrap();
        assert!(build_family(&ext, 5, Policy::RelaxedD2).is_err());
        assert!(matches!(
            build_family(&ext, 4, Policy::Strict),
            Err(Error::AlphabetMismatch { .. })
        ));
    }

    #[test]
    fn binary_alphabet_has_one_multiplier() {
        let base = build_field(2, 4).unwrap();
        let ext = build_extension(&base, 2).unwrap();
        let fam = build_family(&ext, 3, Policy::Strict).unwrap();
        assert_eq!(fam.len(), 2 * 8);
        let base = build_field(41, 1).unwrap();
        let ext = build_extension(&base, 3).unwrap();
        let fam = build_family(&ext, 2, Policy::Strict).unwrap();
        assert_eq!(fam.len(), fam.lambda.len() - 1);
        assert!(fam.members.iter().all(|m| m.c == 1));
    }

    #[test]
    fn shifted_polynomials_are_monic_and_match_composition() {
        let base = build_field(2, 4).unwrap();
        let ext = build_extension(&base, 2).unwrap();
        for l in 1..=8 {
            let p = minimal_polynomial(&ext, l).unwrap();
            let d_l = p.degree().unwrap() as i64;
            for tau in 0..15u64 {
                let s = shifted_minimal_polynomial(&ext, l, tau).unwrap();
                assert!(s.is_monic());
                let composed = p
                    .scale_argument(base.exp(tau as i64), &base)
                    .scale(base.exp(-(tau as i64) * d_l), &base);
                assert_eq!(s, composed);
            }
        }
    }

    #[test]
    fn distinct_shifts_q16() {
        let base = build_field(2, 4).unwrap();
        let ext = build_extension(&base, 2).unwrap();
        for l1 in 1..=8 {
            for l2 in 1..=8 {
                for tau in 0..15 {
                    let distinct = distinct_shift_check(&ext, l1, l2, tau).unwrap();
                    assert_eq!(distinct, !(l1 == l2 && tau == 0), "({l1},{l2},{tau})");
                }
            }
        }
        assert!(distinct_shift_violations(&ext, &(1..=8).collect::<Vec<_>>())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn relaxation_column_collides_for_odd_q() {
        // (q+1)/2 has a coset of size 1 mod q+1, so its shifted polynomial
        // coincides with itself at tau = (q−1)/2.
        let base = build_field(13, 1).unwrap();
        let ext = build_extension(&base, 2).unwrap();
        let with: Vec<u64> = (1..=7).collect();
        assert!(!distinct_shift_violations(&ext, &with).unwrap().is_empty());
        let without: Vec<u64> = (1..=6).collect();
        assert!(distinct_shift_violations(&ext, &without).unwrap().is_empty());
    }

    #[test]
    fn factorization_of_x_pow_l_minus_one() {
        for (p, n, d) in [(2, 2, 2), (2, 2, 3), (5, 1, 2), (3, 1, 3), (2, 1, 6), (7, 1, 2)] {
            let base = build_field(p, n).unwrap();
            let ext = build_extension(&base, d).unwrap();
            let check = verify_factorization(&ext, 10_000).unwrap();
            assert!(check.passed(ext.repunit()), "{check:?}");
            assert_eq!(check.product_matches, Some(true));
            assert_eq!(check.factor_count, coset_representatives(base.q(), d).unwrap().len());
        }
    }

    #[test]
    fn policy_parsing() {
        assert_eq!("strict".parse::<Policy>().unwrap(), Policy::Strict);
        assert_eq!("relaxed-d2".parse::<Policy>().unwrap(), Policy::RelaxedD2);
        assert!("loose".parse::<Policy>().is_err());
        assert_eq!(Policy::RelaxedD2.to_string(), "relaxed-d2");
    }
}
