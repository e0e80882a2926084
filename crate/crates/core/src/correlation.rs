//! Periodic correlation of family members and character-sum bounds.
//!
//! The pair scan visits each unordered pair once: `R_{b,a}(τ)` is the
//! conjugate of `R_{a,b}(P − τ)`, so magnitudes over `(c1,l1) ≤ (c2,l2)`
//! with every shift cover all ordered pairs.

use std::cmp::Ordering;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::array::column_polynomial;
use crate::error::{Error, Result};
use crate::family::{FamilyMember, Policy, SequenceFamily};
use crate::field::{Elem, ExtensionContext, FieldContext};
use crate::poly::Poly;
use crate::sidelnikov::{Character, MSequence, RootsOfUnity};

/// Absolute tolerance for comparing floating correlations against bounds.
pub const TOLERANCE: f64 = 1e-6;

/// Periods at or above this use the FFT path under [`Method::Auto`].
pub const FFT_THRESHOLD: usize = 128;

/// Width of a histogram bin in `|R|`.
pub const HISTOGRAM_STEP: f64 = 1e-3;

/// Ties for the maximum are grouped at this resolution.
const ARGMAX_SCALE: f64 = 1e6;

fn check_pair(a: &MSequence, b: &MSequence) -> Result<()> {
    if a.period() != b.period() {
        return Err(Error::SequenceMismatch(format!(
            "periods {} and {}",
            a.period(),
            b.period()
        )));
    }
    if a.alphabet() != b.alphabet() {
        return Err(Error::SequenceMismatch(format!(
            "alphabets {} and {}",
            a.alphabet(),
            b.alphabet()
        )));
    }
    Ok(())
}

/// `R(τ) = Σ_t w_M^(a(t) − b(t+τ))`.
pub fn cross_correlation(a: &MSequence, b: &MSequence, tau: usize) -> Result<Complex64> {
    check_pair(a, b)?;
    let n = a.period();
    if tau >= n {
        return Err(Error::InvalidParameter(format!("shift {tau} outside [0, {n})")));
    }
    let roots = RootsOfUnity::new(a.alphabet());
    let (x, y) = (a.symbols(), b.symbols());
    Ok((0..n)
        .map(|t| roots.get(x[t] as i64 - y[(t + tau) % n] as i64))
        .sum())
}

/// Every shift at once, via symbol-difference counting.
pub fn correlation_all_shifts_direct(a: &MSequence, b: &MSequence) -> Result<Vec<Complex64>> {
    check_pair(a, b)?;
    let prepared_a = Prepared::new(a, None);
    let prepared_b = Prepared::new(b, None);
    let roots = RootsOfUnity::new(a.alphabet());
    let mut counts = vec![0u32; 2 * a.alphabet() as usize];
    Ok((0..a.period())
        .map(|tau| direct_kernel(&prepared_a, &prepared_b, tau, &roots, &mut counts))
        .collect())
}

/// Every shift at once, via the DFT of the unit-modulus embeddings.
pub fn correlation_all_shifts_fft(a: &MSequence, b: &MSequence) -> Result<Vec<Complex64>> {
    check_pair(a, b)?;
    let n = a.period();
    let fft = FftPlanner::new().plan_fft_forward(n);
    let pa = Prepared::new(a, Some(&fft));
    let pb = Prepared::new(b, Some(&fft));
    let mut buf = vec![Complex64::default(); n];
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    fft_kernel(&pa, &pb, &fft, &mut buf, &mut scratch);
    Ok(buf)
}

/// Largest `|R(τ)|` of a sequence against itself over `1 ≤ τ < P`.
pub fn max_autocorrelation(seq: &MSequence) -> f64 {
    correlation_all_shifts_direct(seq, seq)
        .expect("a sequence matches itself")
        .iter()
        .skip(1)
        .map(|r| r.norm())
        .fold(0.0, f64::max)
}

struct Prepared {
    symbols: Vec<u32>,
    /// `(M − b(t)) mod M`, written twice so shifted reads need no wrap.
    negated: Vec<u32>,
    /// `w^(b(t))` split into parts, also written twice.
    re: Vec<f64>,
    im: Vec<f64>,
    spectrum: Vec<Complex64>,
}

impl Prepared {
    fn new(seq: &MSequence, fft: Option<&Arc<dyn Fft<f64>>>) -> Self {
        let m = seq.alphabet();
        let roots = RootsOfUnity::new(m);
        let symbols = seq.symbols().to_vec();
        let mut negated: Vec<u32> = symbols.iter().map(|&s| (m - s) % m).collect();
        negated.extend_from_within(..);
        let values: Vec<Complex64> = symbols.iter().map(|&s| roots.get(s as i64)).collect();
        let mut re: Vec<f64> = values.iter().map(|v| v.re).collect();
        let mut im: Vec<f64> = values.iter().map(|v| v.im).collect();
        re.extend_from_within(..);
        im.extend_from_within(..);
        let spectrum = match fft {
            Some(fft) => {
                let mut buf = values;
                fft.process(&mut buf);
                buf
            }
            None => Vec::new(),
        };
        Self { symbols, negated, re, im, spectrum }
    }
}

const LANES: usize = 4;

/// `Σ_t w^a(t) · conj(w^b(t+τ))` with independent partial sums so the
/// loop vectorizes.
#[inline]
fn dot_kernel(a: &Prepared, b: &Prepared, tau: usize) -> Complex64 {
    let n = a.symbols.len();
    let (ar, ai) = (&a.re[..n], &a.im[..n]);
    let (br, bi) = (&b.re[tau..tau + n], &b.im[tau..tau + n]);
    let mut sr = [0.0f64; LANES];
    let mut si = [0.0f64; LANES];
    let whole = n - n % LANES;
    for base in (0..whole).step_by(LANES) {
        for k in 0..LANES {
            let t = base + k;
            sr[k] += ar[t] * br[t] + ai[t] * bi[t];
            si[k] += ai[t] * br[t] - ar[t] * bi[t];
        }
    }
    let mut re = sr.iter().sum::<f64>();
    let mut im = si.iter().sum::<f64>();
    for t in whole..n {
        re += ar[t] * br[t] + ai[t] * bi[t];
        im += ai[t] * br[t] - ar[t] * bi[t];
    }
    Complex64::new(re, im)
}

#[inline]
fn direct_kernel(a: &Prepared, b: &Prepared, tau: usize, roots: &RootsOfUnity, counts: &mut [u32]) -> Complex64 {
    counts.fill(0);
    let shifted = &b.negated[tau..tau + a.symbols.len()];
    for (&x, &y) in a.symbols.iter().zip(shifted) {
        counts[(x + y) as usize] += 1;
    }
    let m = roots.order() as usize;
    let r = roots.as_slice();
    let mut acc = Complex64::default();
    for k in 0..m {
        let c = counts[k] + counts[k + m];
        if c != 0 {
            acc += r[k] * c as f64;
        }
    }
    acc
}

/// Leaves `R(τ)` for every τ in `buf`.
fn fft_kernel(a: &Prepared, b: &Prepared, fft: &Arc<dyn Fft<f64>>, buf: &mut [Complex64], scratch: &mut [Complex64]) {
    let n = buf.len() as f64;
    for ((out, x), y) in buf.iter_mut().zip(&a.spectrum).zip(&b.spectrum) {
        *out = x * y.conj();
    }
    fft.process_with_scratch(buf, scratch);
    for v in buf.iter_mut() {
        *v /= n;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Auto,
    Direct,
    Fft,
}

#[derive(Clone, Copy, Debug)]
pub struct ScanOptions {
    pub method: Method,
    /// Maximum number of argmax witnesses kept in the report.
    pub argmax_limit: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { method: Method::Auto, argmax_limit: 64 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub c1: u64,
    pub l1: u64,
    pub c2: u64,
    pub l2: u64,
    pub tau: u64,
    pub magnitude: f64,
}

impl Witness {
    fn key(&self) -> (u64, u64, u64, u64, u64) {
        (self.c1, self.l1, self.c2, self.l2, self.tau)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundViolation {
    pub witness: Witness,
    pub bound: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HistogramBin {
    pub magnitude: f64,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub q: u64,
    pub d: u32,
    #[serde(rename = "M")]
    pub m: u64,
    pub policy: Policy,
    pub family_size: usize,
    pub method: Method,
    /// Largest nontrivial `|R(τ)|`.
    pub delta_max: f64,
    /// `(2d − 1)√q + 1`.
    pub bound: f64,
    pub within_bound: bool,
    /// Every member's `R(0)` against itself equals `q − 1`.
    pub trivial_correlations_exact: bool,
    /// Pairs exceeding `(d_l1 + d_l2 − 1)√q + 1`.
    pub pair_bound_violations: u64,
    pub first_pair_bound_violation: Option<BoundViolation>,
    /// `c1 ≠ c2`, `l1 = l2`, `τ = 0` values exceeding `(d_l1 − 1)√q + 1`.
    pub same_column_violations: u64,
    pub first_same_column_violation: Option<BoundViolation>,
    pub argmax: Vec<Witness>,
    pub argmax_count: u64,
    pub correlations_scanned: u64,
    pub histogram: Vec<HistogramBin>,
    pub elapsed_ms: f64,
}

impl CorrelationReport {
    /// Histogram as `magnitude,count` lines with a header.
    pub fn histogram_csv(&self) -> String {
        let mut out = String::from("magnitude,count\n");
        for bin in &self.histogram {
            out.push_str(&format!("{:.3},{}\n", bin.magnitude, bin.count));
        }
        out
    }

    pub fn passed(&self) -> bool {
        self.within_bound
            && self.trivial_correlations_exact
            && self.pair_bound_violations == 0
            && self.same_column_violations == 0
    }
}

struct ScanState {
    max_key: i64,
    delta_max: f64,
    argmax: Vec<Witness>,
    argmax_count: u64,
    /// Counts per bin of width [`HISTOGRAM_STEP`].
    histogram: Vec<u64>,
    scanned: u64,
    pair_violations: u64,
    first_pair_violation: Option<BoundViolation>,
    same_column_violations: u64,
    first_same_column_violation: Option<BoundViolation>,
}

fn earlier(a: &Option<BoundViolation>, b: Option<BoundViolation>) -> Option<BoundViolation> {
    match (a, b) {
        (None, b) => b,
        (Some(a), None) => Some(a.clone()),
        (Some(a), Some(b)) => Some(if a.witness.key() <= b.witness.key() { a.clone() } else { b }),
    }
}

impl ScanState {
    fn new() -> Self {
        Self {
            max_key: -1,
            delta_max: 0.0,
            argmax: Vec::new(),
            argmax_count: 0,
            histogram: Vec::new(),
            scanned: 0,
            pair_violations: 0,
            first_pair_violation: None,
            same_column_violations: 0,
            first_same_column_violation: None,
        }
    }

    #[inline]
    /// Magnitudes are nonnegative, so `x + 0.5` truncated rounds them
    /// without a libm call.
    fn record(&mut self, magnitude: f64, witness: impl FnOnce(f64) -> Witness, limit: usize) {
        let bin = (magnitude / HISTOGRAM_STEP + 0.5) as usize;
        if bin >= self.histogram.len() {
            self.histogram.resize(bin + 1, 0);
        }
        self.histogram[bin] += 1;
        self.scanned += 1;
        let scaled = magnitude * ARGMAX_SCALE + 0.5;
        if scaled < self.max_key as f64 {
            return;
        }
        if magnitude > self.delta_max {
            self.delta_max = magnitude;
        }
        let key = scaled as i64;
        match key.cmp(&self.max_key) {
            Ordering::Greater => {
                self.max_key = key;
                self.argmax.clear();
                self.argmax.push(witness(magnitude));
                self.argmax_count = 1;
            }
            Ordering::Equal => {
                self.argmax_count += 1;
                self.argmax.push(witness(magnitude));
                // keep the smallest keys whatever the visiting order
                if self.argmax.len() >= 2 * limit {
                    self.argmax.sort_by_key(Witness::key);
                    self.argmax.truncate(limit);
                }
            }
            Ordering::Less => {}
        }
    }

    fn merge(mut self, other: Self, limit: usize) -> Self {
        if other.histogram.len() > self.histogram.len() {
            self.histogram.resize(other.histogram.len(), 0);
        }
        for (mine, theirs) in self.histogram.iter_mut().zip(other.histogram) {
            *mine += theirs;
        }
        self.scanned += other.scanned;
        self.delta_max = self.delta_max.max(other.delta_max);
        match other.max_key.cmp(&self.max_key) {
            Ordering::Greater => {
                self.max_key = other.max_key;
                self.argmax = other.argmax;
                self.argmax_count = other.argmax_count;
            }
            Ordering::Equal => {
                self.argmax.extend(other.argmax);
                self.argmax_count += other.argmax_count;
            }
            Ordering::Less => {}
        }
        self.argmax.sort_by_key(Witness::key);
        self.argmax.truncate(limit);
        self.pair_violations += other.pair_violations;
        self.first_pair_violation = earlier(&self.first_pair_violation, other.first_pair_violation);
        self.same_column_violations += other.same_column_violations;
        self.first_same_column_violation =
            earlier(&self.first_same_column_violation, other.first_same_column_violation);
        self
    }
}

/// Adds one nontrivial value, checking both bounds.
#[inline]
fn observe(state: &mut ScanState, w: Witness, pair_bound: f64, same_column_bound: Option<f64>, limit: usize) {
    let mag = w.magnitude;
    state.record(mag, |_| w, limit);
    if mag > pair_bound + TOLERANCE {
        state.pair_violations += 1;
        let v = BoundViolation { witness: w, bound: pair_bound };
        state.first_pair_violation = earlier(&state.first_pair_violation, Some(v));
    }
    if let Some(bound) = same_column_bound {
        if mag > bound + TOLERANCE {
            state.same_column_violations += 1;
            let v = BoundViolation { witness: w, bound };
            state.first_same_column_violation = earlier(&state.first_same_column_violation, Some(v));
        }
    }
}

struct Bounds {
    sqrt_q: f64,
}

impl Bounds {
    fn pair(&self, d1: usize, d2: usize) -> f64 {
        (d1 + d2) as f64 - 1.0
    }

    fn pair_bound(&self, d1: usize, d2: usize) -> f64 {
        self.pair(d1, d2) * self.sqrt_q + 1.0
    }

    fn same_column_bound(&self, d: usize) -> f64 {
        (d as f64 - 1.0) * self.sqrt_q + 1.0
    }
}

struct Worker {
    state: ScanState,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

/// One member pair at a time, over all shifts.
fn scan_members(
    members: &[FamilyMember],
    prepared: &[Prepared],
    fft: Option<&Arc<dyn Fft<f64>>>,
    bounds: &Bounds,
    limit: usize,
) -> ScanState {
    let n = members[0].sequence.period();
    let scratch_len = fft.map_or(0, |f| f.get_inplace_scratch_len());
    let new_worker = || Worker {
        state: ScanState::new(),
        buf: vec![Complex64::default(); n],
        scratch: vec![Complex64::default(); scratch_len],
    };
    (0..members.len())
        .into_par_iter()
        .fold(new_worker, |mut w, i| {
            let a = &members[i];
            for j in i..members.len() {
                let b = &members[j];
                let pair_bound = bounds.pair_bound(a.d_l, b.d_l);
                if let Some(fft) = fft {
                    fft_kernel(&prepared[i], &prepared[j], fft, &mut w.buf, &mut w.scratch);
                }
                for tau in 0..n {
                    if i == j && tau == 0 {
                        continue;
                    }
                    let r = match fft {
                        Some(_) => w.buf[tau],
                        None => dot_kernel(&prepared[i], &prepared[j], tau),
                    };
                    let witness = Witness { c1: a.c, l1: a.l, c2: b.c, l2: b.l, tau: tau as u64, magnitude: r.norm() };
                    let same = (tau == 0 && a.l == b.l && a.c != b.c).then(|| bounds.same_column_bound(a.d_l));
                    observe(&mut w.state, witness, pair_bound, same, limit);
                }
            }
            w
        })
        .map(|w| w.state)
        .reduce(ScanState::new, |a, b| a.merge(b, limit))
}

/// Family laid out as `build_family` produces it: member `(c−1)·K + k` is
/// `c · v` for the `k`-th column `v`.
struct ColumnLayout {
    ls: Vec<u64>,
    d_ls: Vec<usize>,
    /// Unit multiples, each written twice so shifted reads need no wrap.
    columns: Vec<Vec<u32>>,
}

fn column_layout(family: &SequenceFamily) -> Option<ColumnLayout> {
    let k = family.columns.len();
    let m = family.m;
    if k == 0 || family.members.len() as u64 != (m - 1) * k as u64 {
        return None;
    }
    let units = &family.members[..k];
    for (idx, mem) in family.members.iter().enumerate() {
        let (c, col) = ((idx / k) as u64 + 1, idx % k);
        let unit = &units[col];
        if mem.c != c || mem.l != unit.l || mem.d_l != unit.d_l || unit.c != 1 {
            return None;
        }
        let scaled = mem.sequence.symbols().iter().zip(unit.sequence.symbols());
        if !scaled.into_iter().all(|(&s, &u)| s as u64 == c * u as u64 % m) {
            return None;
        }
    }
    Some(ColumnLayout {
        ls: units.iter().map(|u| u.l).collect(),
        d_ls: units.iter().map(|u| u.d_l).collect(),
        columns: units
            .iter()
            .map(|u| {
                let mut v = u.sequence.symbols().to_vec();
                v.extend_from_within(..);
                v
            })
            .collect(),
    })
}

/// `w^k` and `w^(c·y)` as split parts.
struct Twiddles {
    m: usize,
    re: Vec<f64>,
    im: Vec<f64>,
    /// Row `y` holds `w^(c·y)` for `c = 0..m`.
    by_row_re: Vec<f64>,
    by_row_im: Vec<f64>,
}

impl Twiddles {
    fn new(m: usize) -> Self {
        let roots = RootsOfUnity::new(m as u32);
        let re = roots.as_slice().iter().map(|z| z.re).collect();
        let im = roots.as_slice().iter().map(|z| z.im).collect();
        let (mut by_row_re, mut by_row_im) = (Vec::with_capacity(m * m), Vec::with_capacity(m * m));
        for y in 0..m {
            for c in 0..m {
                let z = roots.get((c * y % m) as i64);
                by_row_re.push(z.re);
                by_row_im.push(z.im);
            }
        }
        Self { m, re, im, by_row_re, by_row_im }
    }
}

struct ColumnWorker {
    state: ScanState,
    /// Joint counts of `(v_a(t), v_b(t+τ))`, indexed `x·M + y`.
    grid: Vec<u32>,
    touched: Vec<usize>,
    slot_of: Vec<usize>,
    rows: Vec<usize>,
    /// `G[x][c2] = Σ_y H[x][y] w^(−c2·y)` per occupied row.
    g_re: Vec<f64>,
    g_im: Vec<f64>,
    r_re: Vec<f64>,
    r_im: Vec<f64>,
}

const NO_SLOT: usize = usize::MAX;

impl ColumnWorker {
    fn new(m: usize) -> Self {
        Self {
            state: ScanState::new(),
            grid: vec![0; m * m],
            touched: Vec::with_capacity(m * m),
            slot_of: vec![NO_SLOT; m],
            rows: Vec::with_capacity(m),
            g_re: vec![0.0; m * m],
            g_im: vec![0.0; m * m],
            r_re: vec![0.0; m],
            r_im: vec![0.0; m],
        }
    }

    /// Every `(c1, c2)` for columns `a ≤ b` at shift `τ`, as a 2-D DFT of
    /// the joint symbol counts.
    fn block(&mut self, layout: &ColumnLayout, tw: &Twiddles, bounds: &Bounds, (a, b, tau): (usize, usize, usize), limit: usize) {
        let m = tw.m;
        let n = layout.columns[a].len() / 2;
        let va = &layout.columns[a][..n];
        let vb = &layout.columns[b][tau..tau + n];
        for (&x, &y) in va.iter().zip(vb) {
            let cell = x as usize * m + y as usize;
            if self.grid[cell] == 0 {
                self.touched.push(cell);
            }
            self.grid[cell] += 1;
        }

        for &cell in &self.touched {
            let (x, y) = (cell / m, cell % m);
            let h = self.grid[cell] as f64;
            self.grid[cell] = 0;
            let slot = match self.slot_of[x] {
                NO_SLOT => {
                    let s = self.rows.len();
                    self.rows.push(x);
                    self.slot_of[x] = s;
                    self.g_re[s * m..(s + 1) * m].fill(0.0);
                    self.g_im[s * m..(s + 1) * m].fill(0.0);
                    s
                }
                s => s,
            };
            let (gr, gi) = (&mut self.g_re[slot * m..(slot + 1) * m], &mut self.g_im[slot * m..(slot + 1) * m]);
            let (tr, ti) = (&tw.by_row_re[y * m..(y + 1) * m], &tw.by_row_im[y * m..(y + 1) * m]);
            for (((gr, gi), tr), ti) in gr.iter_mut().zip(gi.iter_mut()).zip(tr).zip(ti) {
                *gr += h * tr;
                *gi -= h * ti;
            }
        }
        self.touched.clear();

        let pair_bound = bounds.pair_bound(layout.d_ls[a], layout.d_ls[b]);
        let same_column_bound = bounds.same_column_bound(layout.d_ls[a]);
        let (la, lb) = (layout.ls[a], layout.ls[b]);
        for c1 in 1..m {
            let start = if a == b { c1 } else { 1 };
            self.r_re[start..].fill(0.0);
            self.r_im[start..].fill(0.0);
            for (s, &x) in self.rows.iter().enumerate() {
                let k = c1 * x % m;
                let (cr, ci) = (tw.re[k], tw.im[k]);
                let (gr, gi) = (&self.g_re[s * m + start..(s + 1) * m], &self.g_im[s * m + start..(s + 1) * m]);
                let (rr, ri) = (&mut self.r_re[start..], &mut self.r_im[start..]);
                for (((rr, ri), gr), gi) in rr.iter_mut().zip(ri.iter_mut()).zip(gr).zip(gi) {
                    *rr += cr * gr - ci * gi;
                    *ri += cr * gi + ci * gr;
                }
            }
            for c2 in start..m {
                if a == b && c1 == c2 && tau == 0 {
                    continue;
                }
                let magnitude = (self.r_re[c2] * self.r_re[c2] + self.r_im[c2] * self.r_im[c2]).sqrt();
                let (c1, c2) = (c1 as u64, c2 as u64);
                // report in member order, as the member-pair scan would
                let witness = if c1 > c2 {
                    Witness { c1: c2, l1: lb, c2: c1, l2: la, tau: ((n - tau) % n) as u64, magnitude }
                } else {
                    Witness { c1, l1: la, c2, l2: lb, tau: tau as u64, magnitude }
                };
                let same = (tau == 0 && a == b && c1 != c2).then_some(same_column_bound);
                observe(&mut self.state, witness, pair_bound, same, limit);
            }
        }
        for &x in &self.rows {
            self.slot_of[x] = NO_SLOT;
        }
        self.rows.clear();
    }
}

/// All multiples of a column pair at once; same values and witnesses as
/// [`scan_members`].
fn scan_columns(layout: &ColumnLayout, m: usize, bounds: &Bounds, limit: usize) -> ScanState {
    let tw = Twiddles::new(m);
    let k = layout.columns.len();
    let n = layout.columns[0].len() / 2;
    (0..k)
        .into_par_iter()
        .fold(
            || ColumnWorker::new(m),
            |mut w, a| {
                for b in a..k {
                    for tau in 0..n {
                        w.block(layout, &tw, bounds, (a, b, tau), limit);
                    }
                }
                w
            },
        )
        .map(|w| w.state)
        .reduce(ScanState::new, |a, b| a.merge(b, limit))
}

/// Exhaustive scan of all nontrivial auto- and cross-correlations.
pub fn max_correlation(family: &SequenceFamily, options: ScanOptions) -> Result<CorrelationReport> {
    if family.is_empty() {
        return Err(Error::InvalidParameter("family is empty".into()));
    }
    let started = Instant::now();
    let n = family.period();
    let m = family.m as u32;
    let bounds = Bounds { sqrt_q: (family.q as f64).sqrt() };
    let bound = (2.0 * family.d as f64 - 1.0) * bounds.sqrt_q + 1.0;
    let method = match options.method {
        Method::Auto if n >= FFT_THRESHOLD => Method::Fft,
        Method::Auto => Method::Direct,
        other => other,
    };
    let fft = (method == Method::Fft).then(|| FftPlanner::new().plan_fft_forward(n));
    let members = &family.members;
    let prepared: Vec<Prepared> = members
        .par_iter()
        .map(|mem| Prepared::new(&mem.sequence, fft.as_ref()))
        .collect();
    let roots = RootsOfUnity::new(m);
    let limit = options.argmax_limit.max(1);

    let trivial_correlations_exact = prepared.iter().all(|p| {
        let mut counts = vec![0u32; 2 * m as usize];
        let r = direct_kernel(p, p, 0, &roots, &mut counts);
        (r - Complex64::new(n as f64, 0.0)).norm() <= TOLERANCE
    });

    let layout = (method == Method::Direct).then(|| column_layout(family)).flatten();
    let state = match &layout {
        Some(layout) => scan_columns(layout, m as usize, &bounds, limit),
        None => scan_members(members, &prepared, fft.as_ref(), &bounds, limit),
    };
    let mut state = state;
    state.argmax.sort_by_key(Witness::key);
    state.argmax.truncate(limit);

    let histogram: Vec<HistogramBin> = state
        .histogram
        .iter()
        .enumerate()
        .filter(|(_, &count)| count > 0)
        .map(|(k, &count)| HistogramBin { magnitude: k as f64 * HISTOGRAM_STEP, count })
        .collect();

    Ok(CorrelationReport {
        q: family.q,
        d: family.d,
        m: family.m,
        policy: family.policy,
        family_size: members.len(),
        method,
        delta_max: state.delta_max,
        bound,
        within_bound: state.delta_max <= bound + TOLERANCE,
        trivial_correlations_exact,
        pair_bound_violations: state.pair_violations,
        first_pair_bound_violation: state.first_pair_violation,
        same_column_violations: state.same_column_violations,
        first_same_column_violation: state.first_same_column_violation,
        argmax: state.argmax,
        argmax_count: state.argmax_count,
        correlations_scanned: state.scanned,
        histogram,
        elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

/// Smallest `τ` with `a(t) = b(t + τ)` for all `t`, by direct comparison.
pub fn cyclic_shift(a: &[u32], b: &[u32]) -> Option<usize> {
    let n = a.len();
    if n != b.len() {
        return None;
    }
    (0..n).find(|&tau| (0..n).all(|t| a[t] == b[(t + tau) % n]))
}

/// Offset of the lexicographically least rotation, by comparing rotations.
fn least_rotation(s: &[u32]) -> usize {
    let n = s.len();
    let mut best = 0;
    for r in 1..n {
        let cmp = (0..n)
            .map(|t| s[(r + t) % n].cmp(&s[(best + t) % n]))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal);
        if cmp == Ordering::Less {
            best = r;
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EquivalenceWitness {
    pub c1: u64,
    pub l1: u64,
    pub c2: u64,
    pub l2: u64,
    /// `c1·v_l1(t) = c2·v_l2(t + tau)`.
    pub tau: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InequivalenceReport {
    pub inequivalent: bool,
    pub equivalent_pairs: u64,
    pub witness: Option<EquivalenceWitness>,
}

/// Whether any two distinct members are cyclic shifts of each other. Uses
/// exact symbol comparison only.
pub fn cyclic_inequivalence(members: &[FamilyMember]) -> InequivalenceReport {
    let canonical: Vec<(usize, Vec<u32>)> = members
        .par_iter()
        .map(|mem| {
            let s = mem.sequence.symbols();
            let r = least_rotation(s);
            let rotated = s[r..].iter().chain(&s[..r]).copied().collect();
            (r, rotated)
        })
        .collect();
    let mut first: FxHashMap<&[u32], usize> = FxHashMap::default();
    let mut equivalent_pairs = 0u64;
    let mut witness = None;
    let mut classes: FxHashMap<usize, u64> = FxHashMap::default();
    for (j, (rj, form)) in canonical.iter().enumerate() {
        match first.get(form.as_slice()) {
            Some(&i) => {
                let class = classes.entry(i).or_insert(1);
                equivalent_pairs += *class;
                *class += 1;
                if witness.is_none() {
                    let n = form.len();
                    let ri = canonical[i].0;
                    let tau = (rj + n - ri) % n;
                    let (a, b) = (&members[i], &members[j]);
                    let (sa, sb) = (a.sequence.symbols(), b.sequence.symbols());
                    debug_assert!((0..n).all(|t| sa[t] == sb[(t + tau) % n]));
                    witness = Some(EquivalenceWitness { c1: a.c, l1: a.l, c2: b.c, l2: b.l, tau: tau as u64 });
                }
            }
            None => {
                first.insert(form.as_slice(), j);
            }
        }
    }
    InequivalenceReport { inequivalent: equivalent_pairs == 0, equivalent_pairs, witness }
}

/// One factor of a Weil-type character sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct WeilTerm {
    pub degree: usize,
    /// Distinct roots of the polynomial in GF(q).
    pub roots_in_field: usize,
    pub character_order: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WeilBoundInput {
    pub q: u64,
    pub terms: Vec<WeilTerm>,
}

/// `(Σ d_j − 1)√q + Σ e_j`.
pub fn weil_bound(input: &WeilBoundInput) -> Result<f64> {
    if input.terms.is_empty() {
        return Err(Error::InvalidParameter("at least one polynomial is required".into()));
    }
    if input.terms.iter().any(|t| t.character_order < 2) {
        return Err(Error::InvalidParameter("characters must be nontrivial".into()));
    }
    let deg: usize = input.terms.iter().map(|t| t.degree).sum();
    let roots: usize = input.terms.iter().map(|t| t.roots_in_field).sum();
    Ok((deg as f64 - 1.0) * (input.q as f64).sqrt() + roots as f64)
}

pub fn count_roots(ctx: &FieldContext, poly: &Poly) -> usize {
    ctx.elements().filter(|&x| poly.eval(x, ctx) == 0).count()
}

/// `psi^power(poly(x))` as one factor of a character sum.
#[derive(Clone, Debug)]
pub struct CharacterSumTerm {
    pub poly: Poly,
    pub power: i64,
}

/// `Σ_{x ∈ GF(q)} Π_j psi^(k_j)(f_j(x))` with `psi` of order `m` and
/// `psi(0) = 1`.
pub fn empirical_character_sum(ctx: &FieldContext, m: u64, terms: &[CharacterSumTerm]) -> Result<Complex64> {
    let chi = Character::new(ctx, m)?;
    Ok(ctx
        .elements()
        .map(|x| {
            let e: i64 = terms
                .iter()
                .map(|term| chi.exponent(term.poly.eval(x, ctx)) as i64 * term.power)
                .sum();
            chi.roots().get(e)
        })
        .sum())
}

/// The correlation rewritten as a character sum over GF(q).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CharacterSumForm {
    /// `Σ_x psi^c1(f_l1(x)) psi^(−c2)(f_l2(beta^tau x))`.
    pub full_sum: Complex64,
    /// `Σ_x psi^(c1 d/d_l1)(p_l1(x)) psi^(−c2 d/d_l2)(p_l2(beta^tau x))`.
    pub reduced_sum: Complex64,
    /// `psi^c1(beta^l1) psi^(−c2)(beta^l2)`, so `full_sum = phase · reduced_sum`.
    pub phase: Complex64,
    /// `full_sum − 1`, the correlation value.
    pub correlation: Complex64,
    /// `(d_l1 + d_l2 − 1)√q`, which bounds `|reduced_sum|`.
    pub weil_bound: f64,
}

pub fn correlation_via_character_sum(
    ext: &ExtensionContext,
    m: u64,
    (c1, l1): (u64, u64),
    (c2, l2): (u64, u64),
    tau: u64,
) -> Result<CharacterSumForm> {
    let base = ext.base();
    let d = ext.d() as i64;
    let chi = Character::new(base, m)?;
    let cp1 = column_polynomial(ext, l1)?;
    let cp2 = column_polynomial(ext, l2)?;
    let shift: Elem = base.exp(tau as i64);
    let (c1, c2) = (c1 as i64, c2 as i64);

    let full = empirical_character_sum(
        base,
        m,
        &[
            CharacterSumTerm { poly: cp1.f.clone(), power: c1 },
            CharacterSumTerm { poly: cp2.f.scale_argument(shift, base), power: -c2 },
        ],
    )?;
    let k1 = c1 * d / cp1.d_l as i64;
    let k2 = c2 * d / cp2.d_l as i64;
    let reduced = empirical_character_sum(
        base,
        m,
        &[
            CharacterSumTerm { poly: cp1.p.clone(), power: k1 },
            CharacterSumTerm { poly: cp2.p.scale_argument(shift, base), power: -k2 },
        ],
    )?;
    let phase = chi.power_value(base.exp(l1 as i64), c1) * chi.power_value(base.exp(l2 as i64), -c2);
    let input = WeilBoundInput {
        q: base.q(),
        terms: vec![
            WeilTerm { degree: cp1.d_l, roots_in_field: 0, character_order: m },
            WeilTerm { degree: cp2.d_l, roots_in_field: 0, character_order: m },
        ],
    };
    Ok(CharacterSumForm {
        full_sum: full,
        reduced_sum: reduced,
        phase,
        correlation: full - 1.0,
        weil_bound: weil_bound(&input)?,
    })
}
