use std::io::Cursor;
use std::sync::LazyLock;

use num_complex::Complex64;
use proptest::prelude::*;
use seqfam_core::arith::{divisors, phi};
use seqfam_core::array::{column_from_array, column_sequence, coset_partition};
use seqfam_core::correlation::{
    correlation_all_shifts_direct, correlation_all_shifts_fft, cross_correlation, cyclic_shift,
};
use seqfam_core::counting::{lambda_closed_form, lambda_size, mobius_count, yucas_count_by_order};
use seqfam_core::field::{build_extension, build_field, ExtensionContext, FieldContext, FiniteField};
use seqfam_core::sidelnikov::{
    read_sequences, sidelnikov_sequence_ext, write_sequence, ExportHeader, MSequence, Provenance,
};

struct Fixture {
    base: FieldContext,
    ext: ExtensionContext,
}

impl std::fmt::Debug for Fixture {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GF({}^{})", self.base.q(), self.ext.d())
    }
}

static FIELDS: LazyLock<Vec<Fixture>> = LazyLock::new(|| {
    [(2, 4, 2), (3, 2, 2), (5, 1, 3), (2, 2, 3), (7, 1, 2), (2, 3, 3)]
        .into_iter()
        .map(|(p, n, d)| {
            let base = build_field(p, n).unwrap();
            let ext = build_extension(&base, d).unwrap();
            Fixture { base, ext }
        })
        .collect()
});

fn fixture() -> impl Strategy<Value = &'static Fixture> {
    (0..FIELDS.len()).prop_map(|i| &FIELDS[i])
}

fn field_and_elems() -> impl Strategy<Value = (&'static Fixture, u32, u32)> {
    fixture().prop_flat_map(|f| {
        let size = f.ext.order() as u32;
        (Just(f), 0..size, 0..size)
    })
}

fn symbols(max_len: usize, alphabet: u32) -> impl Strategy<Value = (Vec<u32>, Vec<u32>)> {
    (1..=max_len).prop_flat_map(move |n| {
        (
            prop::collection::vec(0..alphabet, n),
            prop::collection::vec(0..alphabet, n),
        )
    })
}

fn seq(symbols: Vec<u32>, alphabet: u32) -> MSequence {
    MSequence::new(symbols, alphabet, Provenance::Base).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn table_multiplication_matches_schoolbook((f, a, b) in field_and_elems()) {
        prop_assert_eq!(f.ext.mul(a, b), f.ext.mul_schoolbook(a, b));
        let (x, y) = (a % f.base.order() as u32, b % f.base.order() as u32);
        prop_assert_eq!(f.base.mul(x, y), f.base.mul_schoolbook(x, y));
    }

    #[test]
    fn field_axioms((f, a, b) in field_and_elems()) {
        let e = &f.ext;
        prop_assert_eq!(e.add(a, b), e.add(b, a));
        prop_assert_eq!(e.sub(e.add(a, b), b), a);
        prop_assert_eq!(e.mul(a, e.add(b, 1)), e.add(e.mul(a, b), a));
        if a != 0 {
            prop_assert_eq!(e.mul(a, e.inv(a).unwrap()), 1);
            prop_assert_eq!(e.exp(e.dlog(a) as i64), a);
        }
    }

    #[test]
    fn frobenius_is_an_automorphism((f, a, b) in field_and_elems(), j in 0u32..4) {
        let e = &f.ext;
        prop_assert_eq!(e.frobenius(e.mul(a, b), j), e.mul(e.frobenius(a, j), e.frobenius(b, j)));
        prop_assert_eq!(e.frobenius(e.add(a, b), j), e.add(e.frobenius(a, j), e.frobenius(b, j)));
        prop_assert_eq!(e.frobenius(a, e.d()), a);
    }

    #[test]
    fn norm_is_product_of_conjugates((f, a, b) in field_and_elems()) {
        let e = &f.ext;
        let product = (0..e.d()).fold(1, |acc, j| e.mul_schoolbook(acc, e.frobenius(a, j)));
        prop_assert_eq!(e.norm(a), product);
        prop_assert!(e.in_base(e.norm(a)));
        prop_assert_eq!(e.norm(e.mul(a, b)), f.base.mul(e.norm(a), e.norm(b)));
        prop_assert!(e.in_base(e.trace(a)));
        prop_assert_eq!(e.trace(e.add(a, b)), f.base.add(e.trace(a), e.trace(b)));
    }

    #[test]
    fn columns_read_off_the_array(f in fixture(), l in 0u64..1000) {
        let m = f.base.q() - 1;
        let l = l % f.ext.repunit();
        let long = sidelnikov_sequence_ext(&f.ext, m).unwrap();
        let by_formula = column_sequence(&f.ext, l, m).unwrap();
        let by_array = column_from_array(&f.ext, &long, l).unwrap();
        prop_assert_eq!(by_formula.symbols(), by_array.symbols());
    }

    #[test]
    fn multiples_scale_symbols(f in fixture(), l in 1u64..1000, c in 1u64..64) {
        let m = f.base.q() - 1;
        prop_assume!(m >= 2);
        let l = 1 + l % (f.ext.repunit() - 1);
        let v = column_sequence(&f.ext, l, m).unwrap();
        let cv = v.multiple(c, l);
        for (x, y) in v.symbols().iter().zip(cv.symbols()) {
            prop_assert_eq!(*y as u64, c * *x as u64 % m);
        }
    }

    #[test]
    fn shifts_compose_and_are_found((a, _) in symbols(40, 5), s in 0i64..100, t in 0i64..100) {
        let x = seq(a, 5);
        prop_assert_eq!(x.shifted(s).shifted(t), x.shifted(s + t));
        let n = x.period();
        let found = cyclic_shift(x.symbols(), x.shifted(s).symbols());
        prop_assert!(found.is_some());
        let tau = found.unwrap();
        prop_assert_eq!(x.shifted(s).shifted(tau as i64), x.clone());
        prop_assert!(tau < n);
    }

    #[test]
    fn correlation_paths_agree((a, b) in symbols(160, 7)) {
        let (x, y) = (seq(a, 7), seq(b, 7));
        let direct = correlation_all_shifts_direct(&x, &y).unwrap();
        let fft = correlation_all_shifts_fft(&x, &y).unwrap();
        let n = x.period() as f64;
        for (tau, (u, v)) in direct.iter().zip(&fft).enumerate() {
            prop_assert!((u - v).norm() < 1e-6);
            prop_assert!(u.norm() <= n + 1e-9);
            prop_assert!((cross_correlation(&x, &y, tau).unwrap() - u).norm() < 1e-9);
        }
    }

    #[test]
    fn correlation_conjugate_symmetry((a, b) in symbols(50, 4), tau in 0usize..50) {
        let (x, y) = (seq(a, 4), seq(b, 4));
        let n = x.period();
        let tau = tau % n;
        let forward = cross_correlation(&x, &y, tau).unwrap();
        let backward = cross_correlation(&y, &x, (n - tau) % n).unwrap();
        prop_assert!((forward - backward.conj()).norm() < 1e-9);
    }

    #[test]
    fn autocorrelation_energy((a, _) in symbols(60, 6)) {
        let x = seq(a, 6);
        let n = x.period() as f64;
        let all = correlation_all_shifts_direct(&x, &x).unwrap();
        prop_assert!((all[0] - Complex64::new(n, 0.0)).norm() < 1e-9);
        // Σ_τ R(τ) = |Σ_t w^s(t)|²
        let total: Complex64 = all.iter().sum();
        let w = std::f64::consts::TAU / 6.0;
        let sum: Complex64 = x.symbols().iter().map(|&s| Complex64::from_polar(1.0, w * s as f64)).sum();
        prop_assert!((total - Complex64::new(sum.norm_sqr(), 0.0)).norm() < 1e-6);
    }

    #[test]
    fn export_round_trip((a, _) in symbols(30, 9), l in prop::option::of(0u64..50), c in 1u64..9) {
        let x = seq(a, 9);
        let header = ExportHeader { q: 19, d: 2, m: 9, l, c: l.map(|_| c) };
        let mut buf = Vec::new();
        write_sequence(&mut buf, &header, &x).unwrap();
        let back = read_sequences(Cursor::new(buf)).unwrap();
        prop_assert_eq!(back.len(), 1);
        prop_assert_eq!(back[0].0, header);
        prop_assert_eq!(&back[0].1, x.symbols());
    }
}

const PRIME_POWERS: [u64; 12] = [2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 25, 27];

proptest! {
    #[test]
    fn yucas_counts_sum_to_irreducibles(qi in 0..PRIME_POWERS.len(), f in 1u32..7) {
        let q = PRIME_POWERS[qi];
        // each b of order m contributes N(f, m, q); together they cover every
        // monic irreducible except x itself
        let total: u64 = divisors(q - 1)
            .into_iter()
            .map(|m| phi(m) * yucas_count_by_order(f, m, q).unwrap())
            .sum();
        let expected = mobius_count(q, f).unwrap() - u64::from(f == 1);
        prop_assert_eq!(total, expected);
    }

    #[test]
    fn lambda_routes_agree(qi in 0..PRIME_POWERS.len(), d in 2u32..7) {
        let q = PRIME_POWERS[qi];
        prop_assume!(q.checked_pow(d).is_some_and(|v| v <= 1 << 22));
        let closed = lambda_closed_form(q, d).unwrap();
        prop_assert_eq!(lambda_size(q, d).unwrap(), closed);
        let modulus = (q.pow(d) - 1) / (q - 1);
        let cosets = coset_partition(modulus, q);
        prop_assert_eq!(cosets.len() as u64, closed);
        let covered: usize = cosets.iter().map(|c| c.size()).sum();
        prop_assert_eq!(covered as u64, modulus);
    }
}
