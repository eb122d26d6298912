//! Complete elliptic integral `K`, Jacobi `sn/cn/dn`, and the period-to-parameter solver.
//!
//! All routines use the parameter convention `m = k²` with `K'(m) = K(1 - m)`. Several
//! libraries take the modulus `k` instead; do not mix them.
//!
//! Near `m = 1` the complement `1 - m` cannot be recovered from `m` to full relative
//! precision, so [`EllipticModulus`] stores both and every evaluation uses the stored
//! complement.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const AGM_MAX_ITER: usize = 40;

/// Descending Landen / AGM recursion stops once the auxiliary modulus drops below this.
const LANDEN_CUTOFF: f64 = 1e-16;

/// Smallest complement `1 - m` the solver will hand out.
const MIN_COMPLEMENT: f64 = 1e-15;

fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..AGM_MAX_ITER {
        if (a - b).abs() <= 2.0 * f64::EPSILON * a {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    0.5 * (a + b)
}

/// `K(m)` given the complement `m1 = 1 - m`.
fn k_from_complement(m1: f64) -> f64 {
    PI / (2.0 * agm(1.0, m1.sqrt()))
}

fn check_parameter(m: f64) -> Result<()> {
    if m.is_finite() && m > 0.0 && m < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("elliptic parameter m = {m} outside (0, 1)")))
    }
}

/// Complete elliptic integral of the first kind, `K(m) = ∫₀^{π/2} dθ / √(1 − m sin²θ)`,
/// by the arithmetic-geometric mean.
pub fn complete_elliptic_k(m: f64) -> Result<f64> {
    check_parameter(m)?;
    Ok(k_from_complement(1.0 - m))
}

/// Jacobi elliptic functions `(sn, cn, dn)(u | m)`.
pub fn jacobi_sn_cn_dn(u: f64, m: f64) -> Result<(f64, f64, f64)> {
    check_parameter(m)?;
    if !u.is_finite() {
        return Err(Error::Domain(format!("non-finite argument u = {u}")));
    }
    Ok(sn_cn_dn(u, m, 1.0 - m, k_from_complement(1.0 - m)))
}

/// Core evaluation with the complement and quarter period supplied by the caller.
fn sn_cn_dn(u: f64, m: f64, m1: f64, quarter: f64) -> (f64, f64, f64) {
    if m == 0.0 {
        return (u.sin(), u.cos(), 1.0);
    }
    if m1 == 0.0 {
        let sech = 1.0 / u.cosh();
        return (u.tanh(), sech, sech);
    }
    // sn and cn have period 4K, dn has period 2K.
    let full = 4.0 * quarter;
    let u = u - full * (u / full).round();

    let mut a = [0.0f64; AGM_MAX_ITER + 1];
    let mut c = [0.0f64; AGM_MAX_ITER + 1];
    a[0] = 1.0;
    c[0] = m.sqrt();
    let mut b = m1.sqrt();
    let mut n = 0;
    while c[n].abs() > LANDEN_CUTOFF && n < AGM_MAX_ITER {
        a[n + 1] = 0.5 * (a[n] + b);
        c[n + 1] = 0.5 * (a[n] - b);
        b = (a[n] * b).sqrt();
        n += 1;
    }
    let mut phi = (1u64 << n) as f64 * a[n] * u;
    for k in (1..=n).rev() {
        let s = (c[k] / a[k] * phi.sin()).clamp(-1.0, 1.0);
        phi = 0.5 * (phi + s.asin());
    }
    let (sn, cn) = phi.sin_cos();
    // dn² = m1 + m·cn² has no cancellation, unlike 1 − m·sn².
    let dn = (m1 + m * cn * cn).sqrt();
    (sn, cn, dn)
}

/// Elliptic parameter `m ∈ (0, 1)` with its complement and both quarter periods cached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticModulus {
    m: f64,
    m1: f64,
    big_k: f64,
    big_k_prime: f64,
}

impl EllipticModulus {
    pub fn from_parameter(m: f64) -> Result<Self> {
        check_parameter(m)?;
        Ok(Self::from_parts(m, 1.0 - m))
    }

    /// Builds the modulus from `m1 = 1 − m`, keeping full precision when `m` is near 1.
    pub fn from_complement(m1: f64) -> Result<Self> {
        check_parameter(m1)?;
        Ok(Self::from_parts(1.0 - m1, m1))
    }

    fn from_parts(m: f64, m1: f64) -> Self {
        Self {
            m,
            m1,
            big_k: k_from_complement(m1),
            big_k_prime: k_from_complement(m),
        }
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn complement(&self) -> f64 {
        self.m1
    }

    /// `K(m)`.
    pub fn big_k(&self) -> f64 {
        self.big_k
    }

    /// `K'(m) = K(1 − m)`.
    pub fn big_k_prime(&self) -> f64 {
        self.big_k_prime
    }

    /// The generator period `p = 4πK/K'` matched by this parameter.
    pub fn period(&self) -> f64 {
        4.0 * PI * self.big_k / self.big_k_prime
    }

    pub fn sn_cn_dn(&self, u: f64) -> (f64, f64, f64) {
        sn_cn_dn(u, self.m, self.m1, self.big_k)
    }
}

/// `4πK(t)/K(1 − t)` for `t ∈ (0, 1/2]`, accurate for tiny `t`.
fn lower_ratio(t: f64) -> f64 {
    4.0 * PI * agm(1.0, t.sqrt()) / agm(1.0, (1.0 - t).sqrt())
}

/// Finds the parameter `m` with `4πK(m)/K'(m) = p`.
///
/// The ratio is strictly increasing in `m` and maps `1 − m` to `16π²/p`, so both
/// halves of `(0, 1)` are solved as a small-argument problem in `ln t`: bisection to
/// a bracket of width 1e-8, then secant steps.
pub fn solve_modulus_for_period(p: f64) -> Result<EllipticModulus> {
    if !(p.is_finite() && p > 0.0) {
        return Err(Error::Domain(format!("period p = {p} must be positive")));
    }
    let pivot = 4.0 * PI;
    let upper_half = p > pivot;
    let target = if upper_half { 16.0 * PI * PI / p } else { p };

    let residual = |s: f64| lower_ratio(s.exp()) - target;
    let mut lo = -740.0f64;
    let mut hi = 0.5f64.ln();
    if residual(lo) > 0.0 {
        return Err(Error::PrecisionLoss(format!(
            "period p = {p} needs a parameter below double-precision range"
        )));
    }
    let mut s = if residual(hi) <= 0.0 {
        hi
    } else {
        while hi - lo > 1e-8 {
            let mid = 0.5 * (lo + hi);
            if residual(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let (mut s0, mut s1) = (lo, hi);
        let (mut r0, mut r1) = (residual(s0), residual(s1));
        for _ in 0..50 {
            if r1 == r0 {
                break;
            }
            let s2 = (s1 - r1 * (s1 - s0) / (r1 - r0)).clamp(lo - 1e-8, hi + 1e-8);
            let done = (s2 - s1).abs() <= 1e-14 * s2.abs().max(1.0);
            s0 = s1;
            r0 = r1;
            s1 = s2;
            r1 = residual(s1);
            if done || r1 == 0.0 {
                break;
            }
        }
        s1
    };
    if s > 0.5f64.ln() {
        s = 0.5f64.ln();
    }
    let t = s.exp();
    if upper_half {
        if t < MIN_COMPLEMENT {
            return Err(Error::PrecisionLoss(format!(
                "1 - m = {t:e} for p = {p}; below {MIN_COMPLEMENT:e}"
            )));
        }
        Ok(EllipticModulus::from_parts(1.0 - t, t))
    } else {
        Ok(EllipticModulus::from_parts(t, 1.0 - t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_half() {
        let k = complete_elliptic_k(0.5).unwrap();
        assert!((k - 1.854_074_677_301_372).abs() < 1e-14);
    }

    #[test]
    fn k_domain_errors() {
        assert!(complete_elliptic_k(0.0).is_err());
        assert!(complete_elliptic_k(1.0).is_err());
        assert!(complete_elliptic_k(-0.2).is_err());
        assert!(complete_elliptic_k(f64::NAN).is_err());
    }

    #[test]
    fn k_small_parameter_limit() {
        let k = complete_elliptic_k(1e-14).unwrap();
        assert!((k - PI / 2.0).abs() < 1e-13);
    }

    #[test]
    fn sn_at_origin() {
        for m in [1e-10, 0.3, 0.5, 0.999] {
            let (s, c, d) = jacobi_sn_cn_dn(0.0, m).unwrap();
            assert_eq!(s, 0.0);
            assert!((c - 1.0).abs() < 1e-15 && (d - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn quarter_period_values() {
        let m = 0.5;
        let k = complete_elliptic_k(m).unwrap();
        let (s, c, d) = jacobi_sn_cn_dn(k, m).unwrap();
        assert!((s - 1.0).abs() < 1e-12);
        assert!(c.abs() < 1e-12);
        assert!((d - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sn_domain_error() {
        assert!(jacobi_sn_cn_dn(0.3, 1.0).is_err());
        assert!(jacobi_sn_cn_dn(0.3, 0.0).is_err());
        assert!(jacobi_sn_cn_dn(f64::INFINITY, 0.5).is_err());
    }

    #[test]
    fn modulus_at_symmetric_point() {
        let md = solve_modulus_for_period(4.0 * PI).unwrap();
        assert!((md.m() - 0.5).abs() < 1e-12);
        let above = solve_modulus_for_period(4.0 * PI + 1e-9).unwrap();
        assert!(above.m() > md.m());
    }

    #[test]
    fn modulus_for_period_twenty() {
        let md = solve_modulus_for_period(20.0).unwrap();
        // pinned regression value (independently confirmed by a 30-digit root find)
        assert!((md.m() - 0.897_794_859_630_386_6).abs() < 1e-13);
        assert!((md.period() - 20.0).abs() < 1e-12 * 20.0);
    }

    #[test]
    fn modulus_precision_loss_for_huge_period() {
        assert!(matches!(
            solve_modulus_for_period(400.0),
            Err(Error::PrecisionLoss(_))
        ));
        assert!(solve_modulus_for_period(0.0).is_err());
        assert!(solve_modulus_for_period(-3.0).is_err());
    }

    #[test]
    fn complement_constructor_keeps_precision() {
        let md = EllipticModulus::from_complement(1e-12).unwrap();
        assert_eq!(md.complement(), 1e-12);
        assert!((md.big_k_prime() - PI / 2.0).abs() < 1e-11);
    }
}
