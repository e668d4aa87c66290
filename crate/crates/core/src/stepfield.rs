//! Two-dimensional step functions over an `n x m` grid (`n = 2^p`, `m = 2^q`),
//! stored as coefficients over a Haar-like orthogonal product basis.
//!
//! Along one axis of length `n` the basis consists of the all-ones vector and,
//! for every level `a < p` and block `k` in `1..=2^(p-a-1)`, the vector that is
//! `+1` on `((2k-2)2^a, (2k-1)2^a]`, `-1` on `((2k-1)2^a, 2k 2^a]` and zero
//! elsewhere. The 2D basis is the set of outer products of two 1D elements.
//!
//! An indicator of a half-open interval `(s, t]` is non-orthogonal to at most
//! two elements per level plus the all-ones vector, so both rectangle sums and
//! rectangle increments touch `O(log n * log m)` coefficients.
//!
//! All intervals are half-open: a rectangle `(a1, b1)-(a2, b2)` covers the
//! cells `(i, j)` with `a1 < i <= a2` and `b1 < j <= b2` (1-based cells).

use std::io::{self, Write};
use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

/// Largest accepted exponent per axis.
pub const MAX_AXIS_EXPONENT: u32 = 15;
/// Largest accepted `p + q`; the dense coefficient store holds `2^(p+q)` entries.
pub const MAX_TOTAL_EXPONENT: u32 = 24;

// 2 * MAX_AXIS_EXPONENT + 1 rounded up.
const MAX_AXIS_TERMS: usize = 32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("grid exponents ({p}, {q}) exceed the supported maximum (per axis {MAX_AXIS_EXPONENT}, total {MAX_TOTAL_EXPONENT})")]
    TooLarge { p: u32, q: u32 },
    #[error("interval ({s}, {t}] is not a non-empty sub-interval of (0, {n}]")]
    BadInterval { s: u32, t: u32, n: u32 },
    #[error("rectangle {rect:?} is not a non-empty rectangle of the {n}x{m} grid")]
    BadRect { rect: GridRect, n: u32, m: u32 },
    #[error("basis index {0:?} does not exist on this grid")]
    BadIndex(BasisIndex),
    #[error("decay factor {0} is outside (0, 1]")]
    BadDecay(f64),
    #[error("increment {0} is not finite")]
    NonFinite(f64),
}

/// A rectangle of grid cells in cell units, half-open on the low side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridRect {
    pub a1: u32,
    pub b1: u32,
    pub a2: u32,
    pub b2: u32,
}

impl GridRect {
    pub const fn new(a1: u32, b1: u32, a2: u32, b2: u32) -> Self {
        GridRect { a1, b1, a2, b2 }
    }

    pub fn is_valid(&self, n: u32, m: u32) -> bool {
        self.a1 < self.a2 && self.a2 <= n && self.b1 < self.b2 && self.b2 <= m
    }

    /// Number of cells covered.
    pub fn cell_count(&self) -> u64 {
        u64::from(self.a2 - self.a1) * u64::from(self.b2 - self.b1)
    }
}

/// Identifies the product basis element `B^a_k (x) B^b_l`.
///
/// A level equal to the axis exponent denotes the all-ones vector, whose block
/// index must be 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisIndex {
    pub a: u32,
    pub k: u32,
    pub b: u32,
    pub l: u32,
}

/// One non-orthogonal 1D basis element together with its inner product
/// against an interval indicator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisTerm {
    pub level: u32,
    pub block: u32,
    pub star: i64,
}

fn valid_1d(level: u32, block: u32, p: u32) -> bool {
    if level == p {
        block == 1
    } else {
        level < p && block >= 1 && block <= 1 << (p - level - 1)
    }
}

/// Position of a 1D element in the dense store: the all-ones vector is 0,
/// level `a` occupies `2^(p-a-1) .. 2^(p-a)`.
fn linear_1d(level: u32, block: u32, p: u32) -> usize {
    if level == p {
        0
    } else {
        (1usize << (p - level - 1)) + (block as usize - 1)
    }
}

fn decode_1d(index: usize, p: u32) -> (u32, u32) {
    if index == 0 {
        (p, 1)
    } else {
        let msb = usize::BITS - 1 - index.leading_zeros();
        let level = p - 1 - msb;
        (level, (index - (1usize << msb)) as u32 + 1)
    }
}

/// Inner product of the indicator of `(s, t]` with `B^level_block`, by the
/// corner case analysis: the prefix sum of a Haar element is a tent, so only
/// blocks containing `s` or `t` contribute.
pub fn star_1d(s: u32, t: u32, level: u32, block: u32, p: u32) -> i64 {
    if level == p {
        return i64::from(t) - i64::from(s);
    }
    let lo = (i64::from(block) * 2 - 2) << level;
    let hi = (i64::from(block) * 2) << level;
    let (s, t) = (i64::from(s), i64::from(t));
    let holds_s = lo < s && s <= hi;
    let holds_t = lo < t && t <= hi;
    let star_s = -(s - lo).min(hi - s);
    let star_t = (t - lo).min(hi - t);
    match (holds_s, holds_t) {
        (true, true) => star_s + star_t,
        (true, false) => star_s,
        (false, true) => star_t,
        (false, false) => 0,
    }
}

/// Block index `k` with `(2k-2)2^level < x <= 2k 2^level`, if any.
fn block_of(x: u32, level: u32) -> Option<u32> {
    if x == 0 {
        None
    } else {
        Some(((x - 1) >> (level + 1)) + 1)
    }
}

/// Every 1D basis element not orthogonal to the indicator of `(s, t]`,
/// all-ones element first, then by increasing level.
pub fn nonzero_basis_1d(s: u32, t: u32, p: u32) -> Result<Vec<BasisTerm>, FieldError> {
    if p > MAX_AXIS_EXPONENT {
        return Err(FieldError::TooLarge { p, q: 0 });
    }
    let n = 1u32 << p;
    if s >= t || t > n {
        return Err(FieldError::BadInterval { s, t, n });
    }
    let terms = AxisTerms::collect(s, t, p);
    Ok((0..terms.len)
        .map(|i| {
            let (level, block) = decode_1d(terms.index[i], p);
            BasisTerm {
                level,
                block,
                star: terms.star[i] as i64,
            }
        })
        .collect())
}

/// Fixed-capacity list of the non-orthogonal elements along one axis.
struct AxisTerms {
    len: usize,
    index: [usize; MAX_AXIS_TERMS],
    star: [f64; MAX_AXIS_TERMS],
    // star / |B|^2; norms are powers of two so this is exact.
    scaled: [f64; MAX_AXIS_TERMS],
}

impl AxisTerms {
    fn collect(s: u32, t: u32, p: u32) -> Self {
        let mut out = AxisTerms {
            len: 0,
            index: [0; MAX_AXIS_TERMS],
            star: [0.0; MAX_AXIS_TERMS],
            scaled: [0.0; MAX_AXIS_TERMS],
        };
        out.push(0, i64::from(t - s), 1u64 << p);
        for level in 0..p {
            let ks = block_of(s, level);
            let kt = block_of(t, level);
            let norm = 2u64 << level;
            if let Some(k) = ks {
                out.push(linear_1d(level, k, p), star_1d(s, t, level, k, p), norm);
            }
            if let Some(k) = kt.filter(|&k| Some(k) != ks) {
                out.push(linear_1d(level, k, p), star_1d(s, t, level, k, p), norm);
            }
        }
        out
    }

    fn push(&mut self, index: usize, star: i64, norm: u64) {
        if star != 0 {
            self.index[self.len] = index;
            self.star[self.len] = star as f64;
            self.scaled[self.len] = star as f64 / norm as f64;
            self.len += 1;
        }
    }
}

/// `A_R * B^{a,b}_{k,l}` for a rectangle on a `2^p x 2^q` grid.
pub fn star_2d(rect: &GridRect, idx: &BasisIndex, p: u32, q: u32) -> f64 {
    let sx = star_1d(rect.a1, rect.a2, idx.a, idx.k, p);
    if sx == 0 {
        return 0.0;
    }
    let sy = star_1d(rect.b1, rect.b2, idx.b, idx.l, q);
    (sx * sy) as f64
}

/// Counters describing how many coefficients `increase` and `cost` touched.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TouchStats {
    pub calls: u64,
    pub touched: u64,
    pub max_per_call: u64,
}

#[derive(Debug, Default)]
struct TouchCounter {
    calls: AtomicU64,
    touched: AtomicU64,
    max_per_call: AtomicU64,
}

impl TouchCounter {
    fn record(&self, touched: u64) {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.touched.fetch_add(touched, Ordering::Relaxed);
        self.max_per_call.fetch_max(touched, Ordering::Relaxed);
    }

    fn snapshot(&self) -> TouchStats {
        TouchStats {
            calls: self.calls.load(Ordering::Relaxed),
            touched: self.touched.load(Ordering::Relaxed),
            max_per_call: self.max_per_call.load(Ordering::Relaxed),
        }
    }
}

/// The dual cost function `P = sum alpha^{a,b}_{k,l} B^{a,b}_{k,l}`.
///
/// Coefficients are kept in a dense store indexed by the pair of 1D linear
/// indices. Inflation is lazy: the field keeps a running `log` of the product
/// of all decay factors applied so far, and each coefficient remembers the
/// value of that running log when it was last written. Its effective value is
/// the stored value times `exp(now - stamp)`. The constant element never
/// decays.
#[derive(Debug)]
pub struct CostField {
    p: u32,
    q: u32,
    coeffs: Vec<f64>,
    stamps: Vec<f64>,
    decay_log: f64,
    inflations: u64,
    increase_touches: TouchCounter,
    cost_touches: TouchCounter,
}

impl Clone for CostField {
    fn clone(&self) -> Self {
        CostField {
            p: self.p,
            q: self.q,
            coeffs: self.coeffs.clone(),
            stamps: self.stamps.clone(),
            decay_log: self.decay_log,
            inflations: self.inflations,
            increase_touches: TouchCounter::default(),
            cost_touches: TouchCounter::default(),
        }
    }
}

impl CostField {
    /// A zero field on a `2^p x 2^q` grid.
    pub fn new(p: u32, q: u32) -> Result<Self, FieldError> {
        if p > MAX_AXIS_EXPONENT || q > MAX_AXIS_EXPONENT || p + q > MAX_TOTAL_EXPONENT {
            return Err(FieldError::TooLarge { p, q });
        }
        let size = 1usize << (p + q);
        Ok(CostField {
            p,
            q,
            coeffs: vec![0.0; size],
            stamps: vec![0.0; size],
            decay_log: 0.0,
            inflations: 0,
            increase_touches: TouchCounter::default(),
            cost_touches: TouchCounter::default(),
        })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Number of columns (`2^p`).
    pub fn n(&self) -> u32 {
        1 << self.p
    }

    /// Number of rows (`2^q`).
    pub fn m(&self) -> u32 {
        1 << self.q
    }

    /// Size of the basis, i.e. the number of coefficients when fully materialized.
    pub fn coefficient_count(&self) -> usize {
        self.coeffs.len()
    }

    /// How many times `inflate` has been applied.
    pub fn inflations(&self) -> u64 {
        self.inflations
    }

    fn check_rect(&self, rect: &GridRect) -> Result<(), FieldError> {
        if rect.is_valid(self.n(), self.m()) {
            Ok(())
        } else {
            Err(FieldError::BadRect {
                rect: *rect,
                n: self.n(),
                m: self.m(),
            })
        }
    }

    fn slot(&self, idx: &BasisIndex) -> Result<usize, FieldError> {
        if !valid_1d(idx.a, idx.k, self.p) || !valid_1d(idx.b, idx.l, self.q) {
            return Err(FieldError::BadIndex(*idx));
        }
        Ok(linear_1d(idx.a, idx.k, self.p) * self.m() as usize + linear_1d(idx.b, idx.l, self.q))
    }

    #[inline]
    fn effective(&self, slot: usize) -> f64 {
        let stamp = self.stamps[slot];
        if slot == 0 || stamp == self.decay_log {
            self.coeffs[slot]
        } else {
            self.coeffs[slot] * (self.decay_log - stamp).exp()
        }
    }

    /// `A_R * B` for a basis element of this field.
    pub fn star(&self, rect: &GridRect, idx: &BasisIndex) -> Result<f64, FieldError> {
        self.check_rect(rect)?;
        self.slot(idx)?;
        Ok(star_2d(rect, idx, self.p, self.q))
    }

    /// Current coefficient of a basis element.
    pub fn coefficient(&self, idx: &BasisIndex) -> Result<f64, FieldError> {
        let slot = self.slot(idx)?;
        Ok(self.effective(slot))
    }

    /// Adds `value` to every cell of `rect`.
    pub fn increase(&mut self, rect: &GridRect, value: f64) -> Result<(), FieldError> {
        self.check_rect(rect)?;
        if !value.is_finite() {
            return Err(FieldError::NonFinite(value));
        }
        let xs = AxisTerms::collect(rect.a1, rect.a2, self.p);
        let ys = AxisTerms::collect(rect.b1, rect.b2, self.q);
        let m = self.m() as usize;
        for i in 0..xs.len {
            let row = xs.index[i] * m;
            let wx = value * xs.scaled[i];
            for j in 0..ys.len {
                let slot = row + ys.index[j];
                if slot != 0 && self.stamps[slot] != self.decay_log {
                    self.coeffs[slot] *= (self.decay_log - self.stamps[slot]).exp();
                    self.stamps[slot] = self.decay_log;
                }
                self.coeffs[slot] += wx * ys.scaled[j];
            }
        }
        self.increase_touches.record((xs.len * ys.len) as u64);
        Ok(())
    }

    /// Sum of the field over the cells of `rect`.
    pub fn cost(&self, rect: &GridRect) -> Result<f64, FieldError> {
        self.check_rect(rect)?;
        let xs = AxisTerms::collect(rect.a1, rect.a2, self.p);
        let ys = AxisTerms::collect(rect.b1, rect.b2, self.q);
        let m = self.m() as usize;
        let mut total = 0.0;
        for i in 0..xs.len {
            let row = xs.index[i] * m;
            let mut acc = 0.0;
            for j in 0..ys.len {
                acc += self.effective(row + ys.index[j]) * ys.star[j];
            }
            total += acc * xs.star[i];
        }
        self.cost_touches.record((xs.len * ys.len) as u64);
        Ok(total)
    }

    /// Scales every non-constant coefficient by `rho`, flattening the field
    /// toward its mean while keeping the total unchanged.
    pub fn inflate(&mut self, rho: f64) -> Result<(), FieldError> {
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(FieldError::BadDecay(rho));
        }
        self.decay_log += rho.ln();
        self.inflations += 1;
        Ok(())
    }

    pub fn increase_touch_stats(&self) -> TouchStats {
        self.increase_touches.snapshot()
    }

    pub fn cost_touch_stats(&self) -> TouchStats {
        self.cost_touches.snapshot()
    }

    /// Value of cell `(i, j)`, 1-based, `i` the column.
    pub fn cell(&self, i: u32, j: u32) -> Result<f64, FieldError> {
        self.cost(&GridRect::new(i.wrapping_sub(1), j.wrapping_sub(1), i, j))
    }

    /// Dense matrix, row-major: entry `(j - 1) * n + (i - 1)` holds cell `(i, j)`.
    pub fn to_dense(&self) -> Vec<f64> {
        let (n, m) = (self.n(), self.m());
        let mut out = Vec::with_capacity((n as usize) * (m as usize));
        for j in 1..=m {
            for i in 1..=n {
                out.push(self.cell(i, j).expect("cell in range"));
            }
        }
        out
    }

    /// Writes the dense matrix as CSV, one grid row per line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let n = self.n() as usize;
        writeln!(
            w,
            "# {}x{} cost field; line j holds row j (j = 1..{}), column i holds cell (i, j)",
            self.n(),
            self.m(),
            self.m()
        )?;
        for row in self.to_dense().chunks(n) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }
}
