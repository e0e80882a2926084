//! M-ary Sidelnikov sequences and the order-M multiplicative character.
//!
//! Logs follow the `dlog(0) = 0` convention throughout, so the character is
//! 1 at zero and the symbol at the index where `beta^t = −1` is 0.

use std::f64::consts::TAU;
use std::fmt;
use std::io::{self, BufRead, Write};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Elem, ExtensionContext, FieldContext, FiniteField};

/// Where a sequence came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    /// Period `q − 1` over GF(q).
    Base,
    /// Period `q^d − 1` over GF(q^d).
    Extended,
    /// Column `l` of the array listing of the extended sequence.
    Column { l: u64 },
    /// `c · v_l`, a member of the family.
    Multiple { c: u64, l: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MSequence {
    symbols: Vec<u32>,
    alphabet: u32,
    provenance: Provenance,
}

impl MSequence {
    pub fn new(symbols: Vec<u32>, alphabet: u32, provenance: Provenance) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::InvalidParameter("a sequence needs a positive period".into()));
        }
        if alphabet < 1 {
            return Err(Error::InvalidParameter("alphabet size must be positive".into()));
        }
        if let Some(s) = symbols.iter().find(|&&s| s >= alphabet) {
            return Err(Error::InvalidParameter(format!(
                "symbol {s} outside alphabet of size {alphabet}"
            )));
        }
        Ok(Self { symbols, alphabet, provenance })
    }

    pub fn symbols(&self) -> &[u32] {
        &self.symbols
    }

    pub fn period(&self) -> usize {
        self.symbols.len()
    }

    pub fn alphabet(&self) -> u32 {
        self.alphabet
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// `c · s(t) mod M`, tagged as a family member built from column `l`.
    pub fn multiple(&self, c: u64, l: u64) -> Self {
        let m = self.alphabet as u64;
        let symbols = self
            .symbols
            .iter()
            .map(|&s| (c % m * s as u64 % m) as u32)
            .collect();
        Self { symbols, alphabet: self.alphabet, provenance: Provenance::Multiple { c, l } }
    }

    /// `t ↦ s(t + tau)`.
    pub fn shifted(&self, tau: i64) -> Self {
        let n = self.period() as i64;
        let start = tau.rem_euclid(n) as usize;
        let mut symbols = Vec::with_capacity(self.symbols.len());
        symbols.extend_from_slice(&self.symbols[start..]);
        symbols.extend_from_slice(&self.symbols[..start]);
        Self { symbols, ..self.clone() }
    }
}

pub(crate) fn check_alphabet(q: u64, m: u64) -> Result<()> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("M must be at least 2 (got {m})")));
    }
    if !(q - 1).is_multiple_of(m) {
        return Err(Error::AlphabetMismatch { m, q });
    }
    Ok(())
}

/// `s(t) = log_beta(beta^t + 1) mod M`, period `q − 1`.
pub fn sidelnikov_sequence(ctx: &FieldContext, m: u64) -> Result<MSequence> {
    check_alphabet(ctx.q(), m)?;
    let symbols = (0..ctx.period())
        .map(|t| {
            let x = ctx.add(ctx.exp(t as i64), 1);
            (ctx.dlog(x) % m) as u32
        })
        .collect();
    MSequence::new(symbols, m as u32, Provenance::Base)
}

/// The same sequence from the class definition: symbol `k` when
/// `beta^t ∈ D_k = {beta^(Mj+k) − 1}`, and 0 when `beta^t = −1`.
pub fn sidelnikov_sequence_from_classes(ctx: &FieldContext, m: u64) -> Result<MSequence> {
    check_alphabet(ctx.q(), m)?;
    let mut class = vec![None; ctx.q() as usize];
    for k in 0..m {
        for j in 0..(ctx.q() - 1) / m {
            let member = ctx.sub(ctx.exp((m * j + k) as i64), 1);
            class[member as usize] = Some(k as u32);
        }
    }
    let minus_one = ctx.neg(1);
    let symbols = (0..ctx.period())
        .map(|t| {
            let x = ctx.exp(t as i64);
            if x == minus_one {
                0
            } else {
                class[x as usize].expect("every beta^t other than −1 lies in some D_k")
            }
        })
        .collect();
    MSequence::new(symbols, m as u32, Provenance::Base)
}

/// Period `q^d − 1` sequence computed as `log_beta(N(alpha^t + 1)) mod M`.
pub fn sidelnikov_sequence_ext(ext: &ExtensionContext, m: u64) -> Result<MSequence> {
    let base = ext.base();
    check_alphabet(base.q(), m)?;
    let symbols = (0..ext.period())
        .map(|t| {
            let x = ext.add(ext.exp(t as i64), 1);
            (base.dlog(ext.norm(x)) % m) as u32
        })
        .collect();
    MSequence::new(symbols, m as u32, Provenance::Extended)
}

/// Period `q^d − 1` sequence from its definition, `log_alpha(alpha^t + 1) mod M`.
pub fn sidelnikov_sequence_ext_direct(ext: &ExtensionContext, m: u64) -> Result<MSequence> {
    check_alphabet(ext.q(), m)?;
    let symbols = (0..ext.period())
        .map(|t| {
            let x = ext.add(ext.exp(t as i64), 1);
            (ext.dlog(x) % m) as u32
        })
        .collect();
    MSequence::new(symbols, m as u32, Provenance::Extended)
}

/// `w_M^k` for `k = 0..M`.
#[derive(Clone, Debug)]
pub struct RootsOfUnity {
    roots: Vec<Complex64>,
}

impl RootsOfUnity {
    pub fn new(m: u32) -> Self {
        let roots = (0..m)
            .map(|k| Complex64::from_polar(1.0, TAU * k as f64 / m as f64))
            .collect();
        Self { roots }
    }

    pub fn order(&self) -> u32 {
        self.roots.len() as u32
    }

    pub fn get(&self, k: i64) -> Complex64 {
        self.roots[k.rem_euclid(self.roots.len() as i64) as usize]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.roots
    }
}

/// `psi(x) = w_M^(log_beta x)` with `psi(0) = 1`.
#[derive(Clone, Debug)]
pub struct Character<'a> {
    field: &'a FieldContext,
    roots: RootsOfUnity,
}

impl<'a> Character<'a> {
    pub fn new(field: &'a FieldContext, m: u64) -> Result<Self> {
        if m == 0 || !(field.q() - 1).is_multiple_of(m) {
            return Err(Error::AlphabetMismatch { m, q: field.q() });
        }
        Ok(Self { field, roots: RootsOfUnity::new(m as u32) })
    }

    pub fn order(&self) -> u32 {
        self.roots.order()
    }

    pub fn field(&self) -> &FieldContext {
        self.field
    }

    /// The exponent `k` with `psi(x) = w_M^k`.
    pub fn exponent(&self, x: Elem) -> u32 {
        (self.field.dlog(x) % self.order() as u64) as u32
    }

    pub fn value(&self, x: Elem) -> Complex64 {
        self.roots.get(self.exponent(x) as i64)
    }

    /// `psi^k(x)`.
    pub fn power_value(&self, x: Elem, k: i64) -> Complex64 {
        self.roots.get(self.exponent(x) as i64 * k)
    }

    pub fn roots(&self) -> &RootsOfUnity {
        &self.roots
    }
}

/// Header of one record in the sequence export format.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExportHeader {
    pub q: u64,
    pub d: u32,
    pub m: u64,
    /// `None` for whole (non-column) sequences, written as `-`.
    pub l: Option<u64>,
    pub c: Option<u64>,
}

impl ExportHeader {
    pub fn for_sequence(q: u64, d: u32, seq: &MSequence) -> Self {
        let (l, c) = match seq.provenance() {
            Provenance::Base | Provenance::Extended => (None, None),
            Provenance::Column { l } => (Some(l), Some(1)),
            Provenance::Multiple { c, l } => (Some(l), Some(c)),
        };
        Self { q, d, m: seq.alphabet() as u64, l, c }
    }
}

impl fmt::Display for ExportHeader {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |v: Option<u64>| v.map_or_else(|| "-".to_string(), |v| v.to_string());
        write!(
            f,
            "# q={} d={} M={} l={} c={}",
            self.q,
            self.d,
            self.m,
            opt(self.l),
            opt(self.c)
        )
    }
}

pub fn write_sequence<W: Write>(out: &mut W, header: &ExportHeader, seq: &MSequence) -> io::Result<()> {
    writeln!(out, "{header}")?;
    let mut line = String::with_capacity(seq.period() * 3);
    for (i, s) in seq.symbols().iter().enumerate() {
        if i > 0 {
            line.push(',');
        }
        line.push_str(&s.to_string());
    }
    writeln!(out, "{line}")
}

fn parse_header(line: &str) -> Result<ExportHeader> {
    let bad = || Error::InvalidParameter(format!("malformed export header: {line}"));
    let body = line.strip_prefix('#').ok_or_else(bad)?;
    let (mut q, mut d, mut m, mut l, mut c) = (None, None, None, None, None);
    for field in body.split_whitespace() {
        let (key, value) = field.split_once('=').ok_or_else(bad)?;
        let num = || value.parse::<u64>().map_err(|_| bad());
        let opt = || if value == "-" { Ok(None) } else { num().map(Some) };
        match key {
            "q" => q = Some(num()?),
            "d" => d = Some(num()? as u32),
            "M" => m = Some(num()?),
            "l" => l = Some(opt()?),
            "c" => c = Some(opt()?),
            _ => return Err(bad()),
        }
    }
    Ok(ExportHeader {
        q: q.ok_or_else(bad)?,
        d: d.ok_or_else(bad)?,
        m: m.ok_or_else(bad)?,
        l: l.ok_or_else(bad)?,
        c: c.ok_or_else(bad)?,
    })
}

/// Reads every `(header, symbols)` record from an export stream.
pub fn read_sequences<R: BufRead>(input: R) -> Result<Vec<(ExportHeader, Vec<u32>)>> {
    let mut out = Vec::new();
    let mut pending: Option<ExportHeader> = None;
    for line in input.lines() {
        let line = line.map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            pending = Some(parse_header(line)?);
            continue;
        }
        let header = pending
            .take()
            .ok_or_else(|| Error::InvalidParameter("symbol line without header".into()))?;
        let symbols = line
            .split(',')
            .map(|s| s.trim().parse::<u32>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| Error::InvalidParameter(format!("bad symbol: {e}")))?;
        out.push((header, symbols));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{build_extension, build_field};

    #[test]
    fn gf5_hand_values() {
        // powers of beta = 2: 1, 2, 4, 3
        let f = build_field(5, 1).unwrap();
        let s = sidelnikov_sequence(&f, 4).unwrap();
        assert_eq!(s.period(), 4);
        // t=0: 1+1=2=β^1; t=1: 2+1=3=β^3; t=2: 4+1=0; t=3: 3+1=4=β^2
        assert_eq!(s.symbols(), &[1, 3, 0, 2]);
    }

    #[test]
    fn zero_symbol_at_minus_one() {
        for (p, n) in [(5, 1), (7, 1), (13, 1), (3, 2)] {
            let f = build_field(p, n).unwrap();
            let m = f.q() - 1;
            let s = sidelnikov_sequence(&f, m).unwrap();
            let t = f.dlog(f.neg(1)) as usize;
            assert_eq!(s.symbols()[t], 0);
        }
    }

    #[test]
    fn log_and_class_definitions_agree() {
        for (p, n) in [(5, 1), (7, 1), (2, 4), (3, 2), (13, 1), (41, 1)] {
            let f = build_field(p, n).unwrap();
            for m in crate::arith::divisors(f.q() - 1).into_iter().filter(|&m| m >= 2) {
                assert_eq!(
                    sidelnikov_sequence(&f, m).unwrap(),
                    sidelnikov_sequence_from_classes(&f, m).unwrap(),
                    "q={} M={m}",
                    f.q()
                );
            }
        }
    }

    #[test]
    fn character_identity_holds_at_every_index() {
        let f = build_field(13, 1).unwrap();
        for m in [2, 3, 4, 6, 12] {
            let s = sidelnikov_sequence(&f, m).unwrap();
            let chi = Character::new(&f, m).unwrap();
            let roots = RootsOfUnity::new(m as u32);
            for t in 0..12 {
                let lhs = roots.get(s.symbols()[t] as i64);
                let rhs = chi.value(f.add(f.exp(t as i64), 1));
                assert!((lhs - rhs).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn character_values() {
        let f = build_field(7, 1).unwrap();
        let chi = Character::new(&f, 3).unwrap();
        assert!((chi.value(0) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let w = Complex64::from_polar(1.0, TAU / 3.0);
        assert!((chi.value(f.beta()) - w).norm() < 1e-12);
        let total: Complex64 = (1..7).map(|x| chi.value(x)).sum();
        assert!(total.norm() < 1e-9);
    }

    #[test]
    fn rejects_non_divisor_alphabet() {
        let f = build_field(2, 4).unwrap();
        let err = sidelnikov_sequence(&f, 4).unwrap_err();
        assert!(err.to_string().contains("M must divide q−1"));
        assert!(sidelnikov_sequence(&f, 1).is_err());
    }

    #[test]
    fn extension_routes_agree_gf25() {
        let base = build_field(5, 1).unwrap();
        let ext = build_extension(&base, 2).unwrap();
        let via_norm = sidelnikov_sequence_ext(&ext, 4).unwrap();
        let direct = sidelnikov_sequence_ext_direct(&ext, 4).unwrap();
        assert_eq!(via_norm.period(), 24);
        assert_eq!(via_norm, direct);
    }

    #[test]
    fn export_round_trip() {
        let f = build_field(5, 1).unwrap();
        let s = sidelnikov_sequence(&f, 4).unwrap();
        let header = ExportHeader::for_sequence(5, 1, &s);
        let mut buf = Vec::new();
        write_sequence(&mut buf, &header, &s).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text, "# q=5 d=1 M=4 l=- c=-\n1,3,0,2\n");
        let parsed = read_sequences(&buf[..]).unwrap();
        assert_eq!(parsed, vec![(header, vec![1, 3, 0, 2])]);
    }

    #[test]
    fn shift_and_multiple() {
        let s = MSequence::new(vec![0, 1, 2, 3], 4, Provenance::Column { l: 1 }).unwrap();
        assert_eq!(s.shifted(1).symbols(), &[1, 2, 3, 0]);
        assert_eq!(s.shifted(-1).symbols(), &[3, 0, 1, 2]);
        let m = s.multiple(3, 1);
        assert_eq!(m.symbols(), &[0, 3, 2, 1]);
        assert_eq!(m.provenance(), Provenance::Multiple { c: 3, l: 1 });
        assert!(MSequence::new(vec![4], 4, Provenance::Base).is_err());
    }
}
