//! Adaptive Gauss-Kronrod (7/15) quadrature for real and complex integrands.
//!
//! Integrands here are smooth and exponentially decaying, with jumps only where the
//! caller knows about them (square-wave generators); pass those as breakpoints.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_SPLITS: usize = 20_000;

/// Error estimates below this multiple of `∫|f|` are roundoff.
const ROUNDOFF: f64 = 50.0 * f64::EPSILON;

/// Values that can be integrated: reals and complex numbers.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// Returns the Kronrod estimate, its error estimate, and `∫|f|` for a roundoff floor.
fn kronrod15<T: QuadValue>(f: &impl Fn(f64) -> T, a: f64, b: f64) -> (T, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs = fc.magnitude() * WGK[7];
    for (j, (&x, &w)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let dx = half * x;
        let (lo, hi) = (f(center - dx), f(center + dx));
        abs += (lo.magnitude() + hi.magnitude()) * w;
        let pair = lo + hi;
        kronrod = kronrod + pair * w;
        if j % 2 == 1 {
            gauss = gauss + pair * WG[j / 2];
        }
    }
    let err = ((kronrod - gauss) * half).magnitude();
    (kronrod * half, err, abs * half.abs())
}

struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    err: f64,
    abs: f64,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err).is_eq()
    }
}

impl<T> Eq for Segment<T> {}

impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn segment<T: QuadValue>(f: &impl Fn(f64) -> T, a: f64, b: f64) -> Result<Segment<T>> {
    let (value, err, abs) = kronrod15(f, a, b);
    if !value.magnitude().is_finite() || !err.is_finite() {
        return Err(Error::NonConvergence(format!("non-finite integrand on [{a}, {b}]")));
    }
    Ok(Segment { a, b, value, err, abs })
}

/// Intervals below a few ulps of their endpoints cannot be refined further.
fn unsplittable(a: f64, b: f64) -> bool {
    (b - a).abs() <= 64.0 * f64::EPSILON * a.abs().max(b.abs()).max(1.0)
}

/// Globally adaptive: always bisects the segment with the largest error estimate until
/// the summed estimate meets `tol` or falls to roundoff level relative to `∫|f|`.
fn adapt<T: QuadValue>(f: &impl Fn(f64) -> T, pieces: &[(f64, f64)], tol: f64) -> Result<T> {
    let mut heap = BinaryHeap::new();
    let mut settled = T::zero();
    let mut settled_err = 0.0;
    for &(a, b) in pieces {
        heap.push(segment(f, a, b)?);
    }
    let totals = |heap: &BinaryHeap<Segment<T>>| {
        heap.iter().fold((0.0, 0.0), |(e, s), seg| (e + seg.err, s + seg.abs))
    };
    let (mut err, mut abs) = totals(&heap);
    let mut splits = 0;
    loop {
        if err + settled_err <= tol || err + settled_err <= ROUNDOFF * abs {
            // Running sums drift; confirm against a fresh total before stopping.
            let (e, s) = totals(&heap);
            err = e;
            abs = s;
            if err + settled_err <= tol || err + settled_err <= ROUNDOFF * abs {
                break;
            }
        }
        let Some(worst) = heap.pop() else { break };
        if unsplittable(worst.a, worst.b) {
            settled = settled + worst.value;
            settled_err += worst.err;
            err -= worst.err;
            continue;
        }
        if splits >= MAX_SPLITS {
            let (e, _) = totals(&heap);
            return Err(Error::NonConvergence(format!(
                "quadrature stalled at error {:e} (target {tol:e}) after {MAX_SPLITS} bisections",
                e + worst.err + settled_err
            )));
        }
        splits += 1;
        let mid = 0.5 * (worst.a + worst.b);
        let left = segment(f, worst.a, mid)?;
        let right = segment(f, mid, worst.b)?;
        err += left.err + right.err - worst.err;
        abs += left.abs + right.abs - worst.abs;
        heap.push(left);
        heap.push(right);
    }
    Ok(heap.into_iter().fold(settled, |acc, seg| acc + seg.value))
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<T: QuadValue>(f: impl Fn(f64) -> T, a: f64, b: f64, tol: f64) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    adapt(&f, &[(a, b)], tol)
}

/// Integrates over `[points[0], points[last]]`, splitting at every interior point.
///
/// `points` must be sorted ascending. The error budget is shared by all pieces.
pub fn integrate_pieces<T: QuadValue>(f: impl Fn(f64) -> T, points: &[f64], tol: f64) -> Result<T> {
    let pieces: Vec<(f64, f64)> = points
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| (w[0], w[1]))
        .collect();
    if pieces.is_empty() {
        return Ok(T::zero());
    }
    adapt(&f, &pieces, tol)
}

/// Sorted breakpoint list for `[a, b]` containing the endpoints, every multiple of
/// `step` strictly inside, and the given extra points that fall inside.
pub fn breakpoints(a: f64, b: f64, step: Option<f64>, extra: &[f64]) -> Vec<f64> {
    let mut pts = vec![a, b];
    if let Some(step) = step.filter(|s| *s > 0.0) {
        let first = (a / step).floor() as i64 + 1;
        let last = (b / step).ceil() as i64 - 1;
        if last - first < 100_000 {
            pts.extend((first..=last).map(|k| k as f64 * step));
        }
    }
    pts.extend(extra.iter().copied().filter(|x| *x > a && *x < b));
    pts.sort_by(|x, y| x.total_cmp(y));
    pts.dedup();
    pts
}
