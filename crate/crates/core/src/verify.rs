//! Whole-pipeline checks for one parameter set.

use serde::Serialize;

use crate::arith::divisors;
use crate::array::{
    column_formula, column_from_array, column_polynomial, column_sequence, conjugate_orbit_size, shift_partner,
};
use crate::correlation::{
    correlation_via_character_sum, cyclic_inequivalence, cyclic_shift, max_autocorrelation, max_correlation,
    ScanOptions, TOLERANCE,
};
use crate::counting::{brute_force_yucas, deviation_check, lambda_size, yucas_count};
use crate::error::Result;
use crate::family::{build_family, coset_representatives, verify_factorization, Policy};
use crate::field::{Elem, ExtensionContext, FiniteField};
use crate::sidelnikov::{
    sidelnikov_sequence, sidelnikov_sequence_ext, sidelnikov_sequence_ext_direct, sidelnikov_sequence_from_classes,
};

/// Largest `L` for which the factor product is multiplied out in full.
pub const FULL_PRODUCT_LIMIT: u64 = 1 << 12;
/// Largest `q^f` enumerated by the brute-force irreducible count.
pub const BRUTE_FORCE_LIMIT: u64 = 1 << 16;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.to_string(), passed, detail: detail.into() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ArrayIdentityReport {
    /// Strided extraction from the long sequence equals the norm formula.
    pub route_equivalence: bool,
    /// `v_l = v_lq`, and `v_(lq mod L)` is a cyclic shift of both.
    pub frobenius_invariance: bool,
    /// `p_l` has no root in GF(q) for `1 ≤ l < L`.
    pub root_free: bool,
    /// Columns `l` and `l + L` are cyclic shifts of each other.
    pub congruent_columns_equivalent: bool,
    /// Column `shift_partner(l)` equals `v_l(t − l + 1)` for `1 ≤ l ≤ q`.
    pub shift_identity: bool,
    /// `f_l = beta^l p_l^(d/d_l)`, `p_l` irreducible, `m_l | d_l | d`.
    pub polynomial_identity: bool,
    /// `p_l` equals the product of the conjugates of `q_l`.
    pub conjugate_product: bool,
    /// `v_l(t) = log f_l(beta^t) mod M`.
    pub log_form: bool,
    /// Coset size mod `q^d − 1` equals the orbit size of `−alpha^(−l)`.
    pub degree_consistency: bool,
}

impl ArrayIdentityReport {
    pub fn passed(&self) -> bool {
        self.route_equivalence
            && self.frobenius_invariance
            && self.root_free
            && self.congruent_columns_equivalent
            && self.shift_identity
            && self.polynomial_identity
            && self.conjugate_product
            && self.log_form
            && self.degree_consistency
    }

    fn failures(&self) -> Vec<&'static str> {
        [
            (self.route_equivalence, "route_equivalence"),
            (self.frobenius_invariance, "frobenius_invariance"),
            (self.root_free, "root_free"),
            (self.congruent_columns_equivalent, "congruent_columns_equivalent"),
            (self.shift_identity, "shift_identity"),
            (self.polynomial_identity, "polynomial_identity"),
            (self.conjugate_product, "conjugate_product"),
            (self.log_form, "log_form"),
            (self.degree_consistency, "degree_consistency"),
        ]
        .into_iter()
        .filter(|(ok, _)| !ok)
        .map(|(_, name)| name)
        .collect()
    }
}

/// Every array identity over all columns `0 ≤ l < L`. Symbols are compared
/// modulo `m`; `m = q − 1` implies the result for every divisor.
pub fn array_identities(ext: &ExtensionContext, m: u64) -> Result<ArrayIdentityReport> {
    let base = ext.base();
    let q = ext.q();
    let d = ext.d() as usize;
    let big_l = ext.repunit();
    let long = sidelnikov_sequence_ext(ext, m)?;
    let columns: Vec<_> = (0..big_l).map(|l| column_sequence(ext, l, m)).collect::<Result<_>>()?;
    let mut r = ArrayIdentityReport {
        route_equivalence: true,
        frobenius_invariance: true,
        root_free: true,
        congruent_columns_equivalent: true,
        shift_identity: true,
        polynomial_identity: true,
        conjugate_product: true,
        log_form: true,
        degree_consistency: true,
    };

    for l in 0..big_l {
        let v = &columns[l as usize];
        r.route_equivalence &= column_from_array(ext, &long, l)?.symbols() == v.symbols();
        // exact for the unreduced index lq; reducing mod L only shifts
        r.frobenius_invariance &= column_formula(ext, l * q, m)?.symbols() == v.symbols()
            && cyclic_shift(v.symbols(), columns[(l * q % big_l) as usize].symbols()).is_some();
        for k in 1..=2 {
            let far = column_formula(ext, l + k * big_l, m)?;
            r.congruent_columns_equivalent &= cyclic_shift(v.symbols(), far.symbols()).is_some();
        }

        // a failed f_l identity surfaces as an error
        let cp = match column_polynomial(ext, l) {
            Ok(cp) => cp,
            Err(_) => {
                r.polynomial_identity = false;
                continue;
            }
        };
        r.polynomial_identity &= cp.p.is_irreducible(base)
            && cp.p.degree() == Some(cp.d_l)
            && cp.d_l % cp.m_l == 0
            && d.is_multiple_of(cp.d_l);
        r.conjugate_product &= cp.conjugate_product(ext) == cp.p;
        if l >= 1 {
            r.root_free &= base.elements().all(|x| cp.p.eval(x, base) != 0);
        }
        let root = ext.neg(ext.exp(-(l as i64)));
        r.degree_consistency &= conjugate_orbit_size(ext, root) == cp.d_l;
        r.log_form &= (0..base.period()).all(|t| {
            let value = cp.f.eval(base.exp(t as i64), base);
            (base.dlog(value) % m) as u32 == v.symbols()[t as usize]
        });
    }

    for l in 1..=q {
        let partner = &columns[shift_partner(ext, l) as usize];
        let shifted = column_formula(ext, l, m)?.shifted(1 - l as i64);
        r.shift_identity &= partner.symbols() == shifted.symbols();
    }
    Ok(r)
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationSummary {
    pub q: u64,
    pub d: u32,
    #[serde(rename = "M")]
    pub m: u64,
    pub policy: Policy,
    pub checks: Vec<Check>,
    pub passed: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub scan: ScanOptions,
    pub full_product_limit: u64,
    pub brute_force_limit: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            scan: ScanOptions::default(),
            full_product_limit: FULL_PRODUCT_LIMIT,
            brute_force_limit: BRUTE_FORCE_LIMIT,
        }
    }
}

/// Runs every check for `(q, d, M, policy)`. Parameter and restriction
/// errors are returned as `Err`; failed checks are reported in the summary.
pub fn run_verification(
    ext: &ExtensionContext,
    m: u64,
    policy: Policy,
    options: VerifyOptions,
) -> Result<VerificationSummary> {
    let base = ext.base();
    let q = ext.q();
    let d = ext.d();
    let family = build_family(ext, m, policy)?;
    let mut checks = Vec::new();

    checks.push(Check::new(
        "field",
        ext.norm(ext.alpha()) == base.beta(),
        format!("alpha={} beta={}", ext.alpha(), base.beta()),
    ));

    let s = sidelnikov_sequence(base, m)?;
    let routes = sidelnikov_sequence_from_classes(base, m)?.symbols() == s.symbols()
        && sidelnikov_sequence_ext(ext, m)?.symbols() == sidelnikov_sequence_ext_direct(ext, m)?.symbols();
    checks.push(Check::new("sequence_routes", routes, "class and norm routes agree"));

    let auto = max_autocorrelation(&s);
    checks.push(Check::new("autocorrelation", auto <= 4.0 + TOLERANCE, format!("max={auto:.6}")));

    let arrays = array_identities(ext, m)?;
    let detail = if arrays.passed() {
        format!("all identities hold over {} columns", ext.repunit())
    } else {
        format!("failed: {}", arrays.failures().join(","))
    };
    checks.push(Check::new("array_identities", arrays.passed(), detail));

    let report = max_correlation(&family, options.scan)?;
    checks.push(Check::new(
        "correlation_bound",
        report.within_bound && report.trivial_correlations_exact,
        format!("delta_max={:.6} bound={:.6}", report.delta_max, report.bound),
    ));
    checks.push(Check::new(
        "pair_bound",
        report.pair_bound_violations == 0 && report.same_column_violations == 0,
        format!(
            "pair_violations={} same_column_violations={}",
            report.pair_bound_violations, report.same_column_violations
        ),
    ));

    let witness = match report.argmax.first() {
        Some(w) => {
            let form = correlation_via_character_sum(ext, m, (w.c1, w.l1), (w.c2, w.l2), w.tau)?;
            let ok = (form.correlation.norm() - w.magnitude).abs() < TOLERANCE
                && form.reduced_sum.norm() <= form.weil_bound + TOLERANCE;
            (ok, format!("|R|={:.6} reduced={:.6} weil={:.6}", form.correlation.norm(), form.reduced_sum.norm(), form.weil_bound))
        }
        None => (true, "no witness".to_string()),
    };
    checks.push(Check::new("character_sum_form", witness.0, witness.1));

    let ineq = cyclic_inequivalence(&family.members);
    checks.push(Check::new(
        "cyclic_inequivalence",
        ineq.inequivalent,
        format!("equivalent_pairs={}", ineq.equivalent_pairs),
    ));

    let lambda = lambda_size(q, d)?;
    let cosets = coset_representatives(q, d)?.len() as u64;
    let factors = verify_factorization(ext, options.full_product_limit)?;
    checks.push(Check::new(
        "lambda_size",
        lambda == cosets && factors.factor_count as u64 == lambda && factors.passed(ext.repunit()),
        format!("formula={lambda} cosets={cosets} factors={}", factors.factor_count),
    ));
    let expected = (m - 1) * (family.columns.len() as u64);
    let formula_size = (m - 1) * (lambda - 1);
    let size_ok = family.len() as u64 == expected
        && match policy {
            Policy::Strict => expected == formula_size,
            Policy::RelaxedD2 => expected + (m - 1) == formula_size,
        };
    checks.push(Check::new(
        "family_size",
        size_ok,
        format!("built={} formula={formula_size}", family.len()),
    ));

    let mut yucas_ok = true;
    let mut deviation_ok = true;
    let mut degrees = Vec::new();
    for f in 1..=d {
        let Some(qf) = q.checked_pow(f) else { break };
        for order in divisors(q - 1) {
            deviation_ok &= deviation_check(q, f, order)?.holds;
        }
        if qf > options.brute_force_limit {
            continue;
        }
        degrees.push(f);
        let brute = brute_force_yucas(base, f)?;
        for b in 1..q as Elem {
            yucas_ok &= yucas_count(base, f, b)? == brute[b as usize];
        }
    }
    checks.push(Check::new("yucas_oracle", yucas_ok, format!("degrees={degrees:?}")));
    checks.push(Check::new("deviation_bound", deviation_ok, format!("degrees=1..={d}")));

    let passed = checks.iter().all(|c| c.passed);
    Ok(VerificationSummary { q, d, m, policy, checks, passed })
}
