//! Adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! The integrator keeps every subinterval in a max-heap keyed on its local
//! error estimate and bisects the worst one until the summed estimate meets
//! `max(abs_tol, rel_tol·|I|)` or the subdivision budget is spent. Callers can
//! seed the heap with breakpoints when they know where the integrand
//! concentrates (the sech² kernel near s = t, for instance).

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{require, Result};

/// Tolerances and budget for the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

pub const MIN_ABS_TOL: f64 = 1e-14;
pub const MAX_SUBDIVISIONS: usize = 1_000_000;

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_subdivisions: 4096,
        }
    }
}

impl QuadConfig {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let q = Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        require(
            self.abs_tol >= MIN_ABS_TOL && self.abs_tol.is_finite(),
            || format!("abs_tol must be >= {MIN_ABS_TOL}, got {}", self.abs_tol),
        )?;
        require(self.rel_tol > 0.0 && self.rel_tol.is_finite(), || {
            format!("rel_tol must be positive, got {}", self.rel_tol)
        })?;
        require(
            self.max_subdivisions >= 1 && self.max_subdivisions <= MAX_SUBDIVISIONS,
            || {
                format!(
                    "max_subdivisions must be in [1, {MAX_SUBDIVISIONS}], got {}",
                    self.max_subdivisions
                )
            },
        )
    }

    /// Same budget, tolerances tightened to `tol` (clamped to the allowed floor).
    pub fn tightened(&self, tol: f64) -> Self {
        Self {
            abs_tol: tol.max(MIN_ABS_TOL),
            rel_tol: tol.max(MIN_ABS_TOL),
            max_subdivisions: self.max_subdivisions.max(4096),
        }
    }

    /// Tolerances divided by `factor`, for integrals that get multiplied by it afterwards.
    pub(crate) fn scaled_abs(&self, factor: f64) -> Self {
        let factor = factor.abs().max(1.0);
        Self {
            abs_tol: (self.abs_tol / factor).max(MIN_ABS_TOL),
            ..*self
        }
    }
}

/// Outcome of one adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<V> {
    pub value: V,
    pub err: f64,
    /// ∫|f| estimate over the same range.
    pub abs_value: f64,
    pub n_evals: usize,
    pub converged: bool,
}

/// Values the integrator can accumulate.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn norm(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn norm(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn norm(self) -> f64 {
        self.norm()
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

struct Panel<V> {
    a: f64,
    b: f64,
    value: V,
    err: f64,
    abs_value: f64,
}

impl<V> PartialEq for Panel<V> {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err) == Ordering::Equal
    }
}
impl<V> Eq for Panel<V> {}
impl<V> PartialOrd for Panel<V> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<V> Ord for Panel<V> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// One 15-point Kronrod panel with the embedded 7-point Gauss estimate.
fn gk15<V: QuadValue, F: FnMut(f64) -> V>(f: &mut F, a: f64, b: f64) -> Panel<V> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = fc.norm() * WGK[7];
    for (j, &x) in XGK.iter().enumerate().take(7) {
        let dx = half * x;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod = kronrod + (f1 + f2) * WGK[j];
        abs_sum += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + (f1 + f2) * WG[j / 2];
        }
    }
    let value = kronrod * half;
    let abs_value = abs_sum * half.abs();
    let mut err = (kronrod - gauss).norm() * half.abs();
    let roundoff = 50.0 * f64::EPSILON * abs_value;
    if err < roundoff {
        err = roundoff;
    }
    if !value.norm().is_finite() {
        err = f64::INFINITY;
    }
    Panel {
        a,
        b,
        value,
        err,
        abs_value,
    }
}

/// Fixed 15-point Kronrod rule on [a, b]; no error control.
pub fn kronrod15<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> f64 {
    gk15(&mut f, a, b).value
}

/// Adaptive integral of `f` over the partition given by `breaks` (sorted, at least two points).
pub fn integrate_pieces<V, F>(mut f: F, breaks: &[f64], q: &QuadConfig) -> QuadResult<V>
where
    V: QuadValue,
    F: FnMut(f64) -> V,
{
    let mut heap: BinaryHeap<Panel<V>> = BinaryHeap::new();
    let mut n_evals = 0;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            heap.push(gk15(&mut f, w[0], w[1]));
            n_evals += 15;
        }
    }
    if heap.is_empty() {
        return QuadResult {
            value: V::zero(),
            err: 0.0,
            abs_value: 0.0,
            n_evals: 0,
            converged: true,
        };
    }
    let totals = |heap: &BinaryHeap<Panel<V>>| {
        heap.iter().fold((V::zero(), 0.0, 0.0), |(v, e, s), p| {
            (v + p.value, e + p.err, s + p.abs_value)
        })
    };
    let (mut value, mut err, mut abs_value) = totals(&heap);
    let mut converged = false;
    let mut since_resum = 0;
    loop {
        if err <= q.abs_tol.max(q.rel_tol * value.norm()) {
            converged = true;
            break;
        }
        if heap.len() >= q.max_subdivisions {
            break;
        }
        let worst = heap.pop().expect("heap is non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) || !worst.err.is_finite() && worst.b - worst.a < 1e-300
        {
            // Cannot split further; keep the panel and give up.
            heap.push(worst);
            break;
        }
        let left = gk15(&mut f, worst.a, mid);
        let right = gk15(&mut f, mid, worst.b);
        n_evals += 30;
        value = value - worst.value + left.value + right.value;
        err = err - worst.err + left.err + right.err;
        abs_value = abs_value - worst.abs_value + left.abs_value + right.abs_value;
        heap.push(left);
        heap.push(right);
        since_resum += 1;
        // Running sums drift; refresh them now and then, and always when an
        // infinite estimate was involved.
        if since_resum >= 64 || !err.is_finite() {
            (value, err, abs_value) = totals(&heap);
            since_resum = 0;
        }
    }
    (value, err, abs_value) = totals(&heap);
    QuadResult {
        value,
        err,
        abs_value,
        n_evals,
        converged: converged && value.norm().is_finite(),
    }
}

/// Adaptive integral of `f` over [a, b]; reversed limits flip the sign.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, q: &QuadConfig) -> QuadResult<f64> {
    if a == b {
        return integrate_pieces(f, &[a, a], q);
    }
    if b < a {
        let mut r = integrate_pieces(f, &[b, a], q);
        r.value = -r.value;
        return r;
    }
    integrate_pieces(f, &[a, b], q)
}

/// Breakpoints on [a, t] at t − c·width for c in `multiples`, plus both ends.
pub(crate) fn endpoint_breaks(a: f64, t: f64, width: f64, multiples: &[f64]) -> Vec<f64> {
    let mut pts = vec![a];
    let mut interior: Vec<f64> = multiples
        .iter()
        .map(|c| t - c * width)
        .filter(|&p| p > a && p < t)
        .collect();
    interior.sort_by(f64::total_cmp);
    interior.dedup();
    pts.extend(interior);
    pts.push(t);
    pts
}

/// Combines the results of consecutive pieces.
pub(crate) fn accumulate<V: QuadValue>(acc: &mut QuadResult<V>, piece: &QuadResult<V>) {
    acc.value = acc.value + piece.value;
    acc.err += piece.err;
    acc.abs_value += piece.abs_value;
    acc.n_evals += piece.n_evals;
    acc.converged &= piece.converged;
}

/// ∫ f over [start, ∞) on dyadic windows [start + w·2^(k-1), start + w·2^k].
///
/// Stops once two consecutive windows contribute less than `abs_tol` in
/// absolute mass, or after `max_windows`. The result is flagged unconverged
/// when the cap is hit first.
pub fn integrate_to_infinity<V, F>(
    mut f: F,
    start: f64,
    width: f64,
    max_windows: usize,
    q: &QuadConfig,
) -> QuadResult<V>
where
    V: QuadValue,
    F: FnMut(f64) -> V,
{
    let mut acc = integrate_pieces(&mut f, &[start, start + width], q);
    let mut lo = start + width;
    let mut span = width;
    let mut quiet = 0;
    for _ in 0..max_windows {
        let hi = lo + span;
        let piece = integrate_pieces(&mut f, &[lo, hi], q);
        accumulate(&mut acc, &piece);
        if piece.abs_value < q.abs_tol {
            quiet += 1;
            if quiet >= 2 {
                return acc;
            }
        } else {
            quiet = 0;
        }
        lo = hi;
        span *= 2.0;
    }
    acc.converged = false;
    acc
}
