//! Strip functions `S`, representing functions `f`, and the elliptic kernel `E_p`.
//!
//! A generator `Ψ` of period `p` determines `S` on the strip `D = {|Im w| < π}` either by
//! its sine series (when `Ψ` is a trigonometric polynomial) or by quadrature of the
//! Cauchy-type integral
//!
//! ```text
//! S(w) = ½ ∫ Ψ(λ) sinh(w/2) / (cosh(λ/2) cosh((w − λ)/2)) dλ,
//! ```
//!
//! and then `f(z) = √z · exp(S(log z))` is the representing function of a Molnár mean of
//! type `c = e^{p/2}`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::elliptic::EllipticModulus;
use crate::error::{Error, Result};
use crate::generator::{GeneratorForm, GeneratorSpec};
use crate::quadrature::{breakpoints, integrate, integrate_pieces};
use crate::validation::ValidationReport;

/// Default absolute accuracy for quadrature-backed strip functions.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// Default relative distance from the strip boundary below which quadrature refuses.
pub const DEFAULT_MARGIN: f64 = 1e-3;

/// Margin used internally by the boundary-limit recovery, whose schedule reaches
/// `π − 6.25e-4`.
const RECOVERY_MARGIN: f64 = 1e-5;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn check_strip(w: Complex64) -> Result<()> {
    if !(w.re.is_finite() && w.im.is_finite()) || w.im.abs() >= PI {
        return Err(Error::OutsideStrip(w));
    }
    Ok(())
}

fn check_cut(z: Complex64) -> Result<()> {
    if !(z.re.is_finite() && z.im.is_finite()) || (z.im == 0.0 && z.re <= 0.0) {
        return Err(Error::BranchCut(z));
    }
    Ok(())
}

/// `(1 − cos(x + iy)) / sinh(t)` without overflow for `|y| ≤ |t|`.
fn one_minus_cos_over_sinh(x: f64, y: f64, t: f64) -> Complex64 {
    if t == 0.0 {
        return c(f64::NAN, f64::NAN);
    }
    let sign = t.signum();
    let t = t.abs();
    let denom = -(-2.0 * t).exp_m1();
    let e_plus = (y.abs() - t).exp();
    let e_minus = (-y.abs() - t).exp();
    let inv_sinh = 2.0 * (-t).exp() / denom;
    let cosh_ratio = (e_plus + e_minus) / denom;
    let sinh_ratio = y.signum() * (e_plus - e_minus) / denom;
    let (s, co) = x.sin_cos();
    // 1 − cos(x+iy) = 1 − cos x cosh y + i sin x sinh y
    c(inv_sinh - co * cosh_ratio, s * sinh_ratio) * sign
}

// ---------------------------------------------------------------------------
// Strip functions
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StripMethod {
    FourierSeries,
    Quadrature,
}

/// `S ∈ 𝒲_p` built from a validated generator.
#[derive(Debug, Clone, PartialEq)]
pub struct StripFunction {
    generator: GeneratorSpec,
    method: StripMethod,
    tolerance: f64,
    margin: f64,
}

impl StripFunction {
    pub fn new(generator: GeneratorSpec, method: StripMethod, tolerance: f64) -> Result<Self> {
        let report = generator.validate();
        if !report.is_valid() {
            return Err(Error::InvalidGenerator(report.to_string()));
        }
        if method == StripMethod::FourierSeries
            && matches!(generator.form(), GeneratorForm::SquareWave { .. })
        {
            return Err(Error::InvalidGenerator(
                "the series method needs a Fourier or zero generator".into(),
            ));
        }
        if !(tolerance > 0.0 && tolerance.is_finite()) {
            return Err(Error::Domain(format!("tolerance {tolerance} must be positive")));
        }
        Ok(Self {
            generator,
            method,
            tolerance,
            margin: DEFAULT_MARGIN,
        })
    }

    /// Picks the series for Fourier and zero generators and quadrature otherwise.
    pub fn auto(generator: GeneratorSpec) -> Result<Self> {
        let method = match generator.form() {
            GeneratorForm::SquareWave { .. } => StripMethod::Quadrature,
            _ => StripMethod::FourierSeries,
        };
        Self::new(generator, method, DEFAULT_TOLERANCE)
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }

    pub fn generator(&self) -> &GeneratorSpec {
        &self.generator
    }

    pub fn method(&self) -> StripMethod {
        self.method
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn period(&self) -> f64 {
        self.generator.period()
    }

    pub fn eval(&self, w: Complex64) -> Result<Complex64> {
        match self.method {
            StripMethod::FourierSeries => s_fourier(&self.generator, w),
            StripMethod::Quadrature => {
                s_quadrature_with_margin(&self.generator, w, self.tolerance, self.margin)
            }
        }
    }
}

/// Sine-series route: `S(w) = π Σ B_n (1 − cos(anw)) / sinh(aπn)`, `a = 2π/p`.
///
/// The generator's series is finite, so the sum is exact up to rounding; for a series
/// cut at `N` the neglected tail would be bounded by
/// `Σ_{n>N} |B_n| (1 + cosh(an Im w)) / sinh(aπn)`.
pub fn s_fourier(gen: &GeneratorSpec, w: Complex64) -> Result<Complex64> {
    check_strip(w)?;
    match gen.form() {
        GeneratorForm::Zero => Ok(c(0.0, 0.0)),
        GeneratorForm::Fourier { .. } => Ok(s_fourier_unchecked(gen, w)),
        GeneratorForm::SquareWave { .. } => Err(Error::InvalidGenerator(
            "sine-series evaluation needs a Fourier generator".into(),
        )),
    }
}

/// Series evaluation without the strip check; the series is entire, so this also
/// gives the boundary values at `|Im w| = π`.
fn s_fourier_unchecked(gen: &GeneratorSpec, w: Complex64) -> Complex64 {
    let a = gen.frequency();
    gen.coefficients()
        .iter()
        .enumerate()
        .filter(|(_, b)| **b != 0.0)
        .map(|(i, &b)| {
            let an = a * (i + 1) as f64;
            one_minus_cos_over_sinh(an * w.re, an * w.im, an * PI) * (PI * b)
        })
        .sum()
}

/// Quadrature route over `λ ∈ [−L, L]`, `L = |Re w| + 2 ln(4/tol)`.
pub fn s_quadrature(gen: &GeneratorSpec, w: Complex64, tol: f64) -> Result<Complex64> {
    s_quadrature_with_margin(gen, w, tol, DEFAULT_MARGIN)
}

fn s_quadrature_with_margin(
    gen: &GeneratorSpec,
    w: Complex64,
    tol: f64,
    margin: f64,
) -> Result<Complex64> {
    check_strip(w)?;
    if w.im.abs() > PI * (1.0 - margin) {
        return Err(Error::PrecisionLoss(format!(
            "w = {w} is within the quadrature margin of the strip boundary"
        )));
    }
    if gen.is_zero() || w == c(0.0, 0.0) {
        return Ok(c(0.0, 0.0));
    }
    let half_w = w * 0.5;
    let sinh_half_w = half_w.sinh();
    let integrand = |lam: f64| -> Complex64 {
        let psi = gen.eval(lam);
        if psi == 0.0 {
            return c(0.0, 0.0);
        }
        let denom = (0.5 * lam).cosh() * (half_w - 0.5 * lam).cosh();
        sinh_half_w / denom * (0.5 * psi)
    };
    let reach = w.re.abs() + 2.0 * (4.0 / tol).ln();
    let pts = breakpoints(-reach, reach, gen.jump_spacing(), &[0.0, w.re]);
    integrate_pieces(integrand, &pts, 0.25 * tol)
}

/// Boundary recovery of `Ψ(λ)` with the size of the last extrapolation step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Recovery {
    pub value: f64,
    pub gap: f64,
}

/// Recovers `Ψ(λ) = lim_{μ→π⁻} Im S(λ + iμ) / π`.
///
/// Series-backed strip functions take the limit termwise (exact). Quadrature-backed ones
/// sample `μ_k = π − 10⁻²·2^{−k}`, `k = 0..4`, and Richardson-extrapolate.
pub fn psi_recover(sf: &StripFunction, lambda: f64) -> Result<f64> {
    let r = psi_recover_detailed(sf, lambda)?;
    if r.gap > 1e-4 {
        return Err(Error::NonConvergence(format!(
            "boundary extrapolation at λ = {lambda} moved by {:e}",
            r.gap
        )));
    }
    Ok(r.value)
}

/// Like [`psi_recover`] but never fails on a large extrapolation gap.
pub fn psi_recover_detailed(sf: &StripFunction, lambda: f64) -> Result<Recovery> {
    if !lambda.is_finite() {
        return Err(Error::Domain(format!("λ = {lambda} must be finite")));
    }
    if sf.generator.is_zero() {
        return Ok(Recovery { value: 0.0, gap: 0.0 });
    }
    if sf.method == StripMethod::FourierSeries {
        let value = s_fourier_unchecked(&sf.generator, c(lambda, PI)).im / PI;
        return Ok(Recovery { value, gap: 0.0 });
    }
    const LEVELS: usize = 5;
    let delta = 1e-2;
    let mut table = [[0.0f64; LEVELS]; LEVELS];
    for k in 0..LEVELS {
        let mu = PI - delta * 0.5f64.powi(k as i32);
        let s = s_quadrature_with_margin(&sf.generator, c(lambda, mu), sf.tolerance, RECOVERY_MARGIN)?;
        table[k][0] = s.im / PI;
        for j in 1..=k {
            let factor = (1u32 << j) as f64 - 1.0;
            table[k][j] = table[k][j - 1] + (table[k][j - 1] - table[k - 1][j - 1]) / factor;
        }
    }
    let last = table[LEVELS - 1][LEVELS - 1];
    let prev = table[LEVELS - 2][LEVELS - 2];
    Ok(Recovery {
        value: last,
        gap: (last - prev).abs(),
    })
}

/// Independent route to `f` avoiding `S`:
/// `f(z) = √z exp{(z − 1) ∫ Ψ(λ) / ((1 + e^λ)(1 + e^{−λ} z)) dλ}`.
///
/// `tol` bounds the absolute error of the exponent.
pub fn f_integral_eval(gen: &GeneratorSpec, z: Complex64, tol: f64) -> Result<Complex64> {
    check_cut(z)?;
    if gen.is_zero() {
        return Ok(z.sqrt());
    }
    let zm1 = z - 1.0;
    let tol_inner = tol / zm1.norm().max(1.0);
    let log_abs = z.norm().ln();
    let tail = (4.0 / tol_inner).ln();
    let lo = log_abs.min(0.0) - tail;
    let hi = log_abs.max(0.0) + tail;
    let integrand = |lam: f64| -> Complex64 {
        let psi = gen.eval(lam);
        if psi == 0.0 {
            return c(0.0, 0.0);
        }
        // 1/((1 + e^λ)(1 + e^{−λ}z)) = e^{−λ}/((1 + e^{−λ})(1 + e^{−λ}z)) for λ > 0
        if lam > 0.0 {
            let q = (-lam).exp();
            (c(1.0, 0.0) + z * q).inv() * (q / (1.0 + q) * psi)
        } else {
            (c(1.0, 0.0) + z * (-lam).exp()).inv() * (psi / (1.0 + lam.exp()))
        }
    };
    let pts = breakpoints(lo, hi, gen.jump_spacing(), &[0.0, log_abs]);
    let integral = integrate_pieces(integrand, &pts, tol_inner)?;
    Ok(z.sqrt() * (zm1 * integral).exp())
}

// ---------------------------------------------------------------------------
// Representing functions
// ---------------------------------------------------------------------------

#[derive(Clone)]
pub enum RepFunKind {
    FromGenerator(StripFunction),
    /// `f_n` of type `c`: generator `½ sin(πnλ/log c)`.
    ClosedFormFn { n: i64, c: f64 },
    /// `f_α(x) = √x exp{π sin²(α log x) / sinh(2πα)}`.
    ClosedFormFalpha { alpha: f64 },
    FMin(EllipticModulus),
    FMax(EllipticModulus),
    Arithmetic,
    Harmonic,
    Geometric,
    /// Arbitrary positive function on `(0, ∞)`; used for negative controls.
    Custom {
        name: String,
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for RepFunKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RepFunKind::FromGenerator(sf) => f.debug_tuple("FromGenerator").field(sf).finish(),
            RepFunKind::ClosedFormFn { n, c } => {
                f.debug_struct("ClosedFormFn").field("n", n).field("c", c).finish()
            }
            RepFunKind::ClosedFormFalpha { alpha } => {
                f.debug_struct("ClosedFormFalpha").field("alpha", alpha).finish()
            }
            RepFunKind::FMin(m) => f.debug_tuple("FMin").field(m).finish(),
            RepFunKind::FMax(m) => f.debug_tuple("FMax").field(m).finish(),
            RepFunKind::Arithmetic => write!(f, "Arithmetic"),
            RepFunKind::Harmonic => write!(f, "Harmonic"),
            RepFunKind::Geometric => write!(f, "Geometric"),
            RepFunKind::Custom { name, .. } => f.debug_struct("Custom").field("name", name).finish(),
        }
    }
}

/// Representing function of a Kubo-Ando mean, `I σ (xI) = f(x) I`.
#[derive(Debug, Clone)]
pub struct RepFun {
    kind: RepFunKind,
    period_c: Option<f64>,
}

impl RepFun {
    pub fn geometric() -> Self {
        Self { kind: RepFunKind::Geometric, period_c: None }
    }

    pub fn arithmetic() -> Self {
        Self { kind: RepFunKind::Arithmetic, period_c: None }
    }

    pub fn harmonic() -> Self {
        Self { kind: RepFunKind::Harmonic, period_c: None }
    }

    pub fn fn_family(n: i64, c: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("f_n needs n ≠ 0".into()));
        }
        if !(c > 1.0 && c.is_finite()) {
            return Err(Error::Domain(format!("f_n needs c > 1, got {c}")));
        }
        Ok(Self {
            kind: RepFunKind::ClosedFormFn { n, c },
            period_c: Some(c),
        })
    }

    pub fn falpha(alpha: f64) -> Result<Self> {
        if !(alpha != 0.0 && alpha.is_finite()) {
            return Err(Error::Domain(format!("f_α needs α ≠ 0, got {alpha}")));
        }
        Ok(Self {
            kind: RepFunKind::ClosedFormFalpha { alpha },
            period_c: Some((PI / (2.0 * alpha.abs())).exp()),
        })
    }

    pub fn f_min(modulus: EllipticModulus) -> Self {
        Self {
            period_c: Some((0.5 * modulus.period()).exp()),
            kind: RepFunKind::FMin(modulus),
        }
    }

    pub fn f_max(modulus: EllipticModulus) -> Self {
        Self {
            period_c: Some((0.5 * modulus.period()).exp()),
            kind: RepFunKind::FMax(modulus),
        }
    }

    pub fn from_generator(sf: StripFunction) -> Self {
        Self {
            period_c: Some(sf.generator().type_c()),
            kind: RepFunKind::FromGenerator(sf),
        }
    }

    pub fn custom(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            kind: RepFunKind::Custom { name: name.into(), f: Arc::new(f) },
            period_c: None,
        }
    }

    pub fn kind(&self) -> &RepFunKind {
        &self.kind
    }

    /// The type-`c` scalar when this function is known to be a Molnár function.
    pub fn period_c(&self) -> Option<f64> {
        self.period_c
    }

    /// `f(0⁺)`, used when a matrix argument has a zero eigenvalue.
    pub fn limit_at_zero(&self) -> f64 {
        match &self.kind {
            RepFunKind::Arithmetic => 0.5,
            RepFunKind::Custom { f, .. } => f(f64::MIN_POSITIVE),
            _ => 0.0,
        }
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            RepFunKind::FromGenerator(sf) => {
                format!("generator {:?} (p = {})", sf.generator().form(), sf.period())
            }
            RepFunKind::ClosedFormFn { n, c } => format!("f_{n} (c = {c})"),
            RepFunKind::ClosedFormFalpha { alpha } => format!("f_alpha (alpha = {alpha})"),
            RepFunKind::FMin(m) => format!("f_min (p = {}, m = {})", m.period(), m.m()),
            RepFunKind::FMax(m) => format!("f_max (p = {}, m = {})", m.period(), m.m()),
            RepFunKind::Arithmetic => "arithmetic".into(),
            RepFunKind::Harmonic => "harmonic".into(),
            RepFunKind::Geometric => "geometric".into(),
            RepFunKind::Custom { name, .. } => name.clone(),
        }
    }

    /// `f(z)` with principal branches of `√z` and `log z`.
    pub fn f_eval(&self, z: Complex64) -> Result<Complex64> {
        check_cut(z)?;
        let one = c(1.0, 0.0);
        match &self.kind {
            RepFunKind::Geometric => Ok(z.sqrt()),
            RepFunKind::Arithmetic => Ok((one + z) * 0.5),
            RepFunKind::Harmonic => Ok(z * 2.0 / (one + z)),
            RepFunKind::ClosedFormFn { n, c } => {
                Ok(sine_squared_family(PI * *n as f64 / (2.0 * c.ln()), z))
            }
            RepFunKind::ClosedFormFalpha { alpha } => Ok(sine_squared_family(*alpha, z)),
            RepFunKind::FromGenerator(sf) => Ok(z.sqrt() * sf.eval(z.ln())?.exp()),
            RepFunKind::FMin(m) | RepFunKind::FMax(m) if z.im != 0.0 => {
                // Off the real axis go through the square-wave generator ±½ on (0, p/2).
                let amplitude = if matches!(self.kind, RepFunKind::FMax(_)) { 0.5 } else { -0.5 };
                let gen = GeneratorSpec::square_wave(m.period(), amplitude)?;
                let s = s_quadrature(&gen, z.ln(), DEFAULT_TOLERANCE)?;
                Ok(z.sqrt() * s.exp())
            }
            RepFunKind::FMin(m) => Ok(c(f_extremal(m, z.re, Extremal::Min)?, 0.0)),
            RepFunKind::FMax(m) => Ok(c(f_extremal(m, z.re, Extremal::Max)?, 0.0)),
            RepFunKind::Custom { name, f } => {
                if z.im != 0.0 {
                    return Err(Error::Domain(format!("{name} is only defined on (0, ∞)")));
                }
                Ok(c(f(z.re), 0.0))
            }
        }
    }

    /// `f(x)` for real `x > 0`.
    pub fn eval_real(&self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::BranchCut(c(x, 0.0)));
        }
        match &self.kind {
            RepFunKind::Geometric => Ok(x.sqrt()),
            RepFunKind::Arithmetic => Ok(0.5 * (1.0 + x)),
            RepFunKind::Harmonic => Ok(2.0 * x / (1.0 + x)),
            RepFunKind::FMin(m) => f_extremal(m, x, Extremal::Min),
            RepFunKind::FMax(m) => f_extremal(m, x, Extremal::Max),
            RepFunKind::Custom { f, .. } => Ok(f(x)),
            _ => Ok(self.f_eval(c(x, 0.0))?.re),
        }
    }
}

/// `√z exp{π sin²(α log z) / sinh(2πα)}`; `f_n` is the case `α = πn / (2 log c)`.
fn sine_squared_family(alpha: f64, z: Complex64) -> Complex64 {
    let log_z = z.ln();
    // π sin²ζ / sinh T = (π/2)(1 − cos 2ζ)/sinh T with ζ = α log z, T = 2πα
    let exponent = one_minus_cos_over_sinh(
        2.0 * alpha * log_z.re,
        2.0 * alpha * log_z.im,
        2.0 * PI * alpha,
    ) * (0.5 * PI);
    z.sqrt() * exponent.exp()
}

// ---------------------------------------------------------------------------
// Elliptic kernel and extremal functions
// ---------------------------------------------------------------------------

/// Truncation control for the lattice sum defining `E_p(λ; z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticKernelParams {
    period: f64,
    truncation_n: usize,
    tolerance: f64,
}

impl EllipticKernelParams {
    /// Terms decay like `e^{−p|n|}` once past the bulk; `truncation_n` is the minimal
    /// half-width around the bulk that pushes the first omitted term below `tolerance`.
    pub fn new(period: f64, tolerance: f64) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::Domain(format!("period {period} must be positive")));
        }
        if !(tolerance > 0.0 && tolerance < 1.0) {
            return Err(Error::Domain(format!("tolerance {tolerance} must lie in (0, 1)")));
        }
        let truncation_n = ((4.0 / tolerance).ln() / period).ceil() as usize + 1;
        Ok(Self { period, truncation_n, tolerance })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn truncation_n(&self) -> usize {
        self.truncation_n
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }
}

/// One lattice term as a function of `t = |λ + pn|`; the full term is odd in `λ + pn`.
fn ep_term(zm1_sq: Complex64, z: Complex64, t: f64) -> Result<Complex64> {
    let q = (-t).exp();
    let one = c(1.0, 0.0);
    let a = one + z * q;
    let b = z + q;
    if a.norm() < 1e-8 || b.norm() < 1e-8 * z.norm().max(q) {
        return Err(Error::NearPole(format!("E_p lattice term at |λ + pn| = {t}, z = {z}")));
    }
    Ok(zm1_sq * ((1.0 - q) * q / (1.0 + q)) / (a * b))
}

/// `E_p(λ; z) = Σ_n (z−1)²(e^{λ+pn} − 1) / ((e^{λ+pn} + 1)(z + e^{λ+pn})(z + e^{−(λ+pn)}))`.
pub fn ep_series(params: &EllipticKernelParams, lambda: f64, z: Complex64) -> Result<Complex64> {
    check_cut(z)?;
    if !lambda.is_finite() {
        return Err(Error::Domain(format!("λ = {lambda} must be finite")));
    }
    let p = params.period;
    let zm1_sq = (z - 1.0) * (z - 1.0);
    let term = |n: i64| -> Result<Complex64> {
        let mu = lambda + p * n as f64;
        if mu == 0.0 {
            return Ok(c(0.0, 0.0));
        }
        Ok(ep_term(zm1_sq, z, mu.abs())? * mu.signum())
    };
    // Outside |μ| > |log|z|| + ln 2 the terms decay geometrically with ratio e^{−p}.
    let bulk = z.norm().ln().abs() + 2f64.ln();
    let threshold = params.tolerance * -(-p).exp_m1() * 0.5;
    let centre = (-lambda / p).round() as i64;
    let base = params.truncation_n as i64;
    let mut sum = term(centre)?;
    for dir in [1i64, -1] {
        let mut k = 1i64;
        loop {
            let n = centre + dir * k;
            let t = term(n)?;
            sum += t;
            let mu = lambda + p * n as f64;
            if k >= base && mu.abs() > bulk && t.norm() < threshold {
                break;
            }
            if k > 100_000 {
                return Err(Error::NonConvergence("E_p lattice sum".into()));
            }
            k += 1;
        }
    }
    Ok(sum)
}

/// `E_p(λ; c)` at `c = e^{p/2}` in closed form: `(2√m K'/π) sn(K'λ/π | m)`.
pub fn ep_jacobi(modulus: &EllipticModulus, lambda: f64) -> f64 {
    let kp = modulus.big_k_prime();
    let (sn, _, _) = modulus.sn_cn_dn(kp * lambda / PI);
    2.0 * modulus.m().sqrt() * kp / PI * sn
}

/// `∫₀^{p/2} E_p(λ; e^w) sin(2πnλ/p) dλ = 2π sin²(πnw/p) / sinh(2π²n/p)`.
pub fn ep_fourier_coefficient(p: f64, n: u32, w: Complex64) -> Complex64 {
    let nf = n as f64;
    let arg = w * (PI * nf / p);
    let s = arg.sin();
    s * s * (2.0 * PI / (2.0 * PI * PI * nf / p).sinh())
}

/// Left-hand side of [`ep_fourier_coefficient`] by quadrature of [`ep_series`].
pub fn ep_fourier_coefficient_quadrature(
    params: &EllipticKernelParams,
    n: u32,
    w: Complex64,
    tol: f64,
) -> Result<Complex64> {
    let p = params.period;
    let z = w.exp();
    let omega = 2.0 * PI * n as f64 / p;
    let err = std::cell::RefCell::new(None);
    let v = integrate(
        |lam: f64| match ep_series(params, lam, z) {
            Ok(e) => e * (omega * lam).sin(),
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                c(0.0, 0.0)
            }
        },
        0.0,
        0.5 * p,
        tol,
    );
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    v
}

/// `∫₀^{p/2} E_p(λ; x) dλ` for real `x > 0`.
pub fn ep_half_period_integral(params: &EllipticKernelParams, x: f64, tol: f64) -> Result<f64> {
    let z = c(x, 0.0);
    check_cut(z)?;
    let err = std::cell::RefCell::new(None);
    let v = integrate(
        |lam: f64| match ep_series(params, lam, z) {
            Ok(e) => e.re,
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        0.0,
        0.5 * params.period,
        tol,
    );
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremal {
    Min,
    Max,
}

/// Minimal and maximal elements of `ℳ_c`:
/// `f_min(x) = √x (dn(u) + √m cn(u)) / (1 + √m)`, `u = K' log x / π`, and
/// `f_max(x) = x / f_min(x)`.
pub fn f_extremal(modulus: &EllipticModulus, x: f64, which: Extremal) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::BranchCut(c(x, 0.0)));
    }
    let u = modulus.big_k_prime() * x.ln() / PI;
    let (_, cn, dn) = modulus.sn_cn_dn(u);
    let root_m = modulus.m().sqrt();
    let combo = dn + root_m * cn;
    if combo <= 0.0 {
        return Err(Error::Internal(format!(
            "dn + √m·cn = {combo:e} ≤ 0 at u = {u}, m = {}",
            modulus.m()
        )));
    }
    let f_min = x.sqrt() * combo / (1.0 + root_m);
    Ok(match which {
        Extremal::Min => f_min,
        Extremal::Max => x / f_min,
    })
}

// ---------------------------------------------------------------------------
// Molnár-function checks
// ---------------------------------------------------------------------------

/// Tolerance for the scalar identities `f(1) = 1`, `x f(1/x) = f(x)`, `f(c²x) = c f(x)`,
/// taken relative to the size of the compared values.
pub const MOLNAR_TOLERANCE: f64 = 1e-10;

fn rel_gap(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE)
}

/// Checks the Molnár properties of `f` for type `c` on `grid`.
///
/// (ii)–(iv) are checked pointwise; operator monotonicity (i) gets a necessary-condition
/// check on sampled 2×2 Loewner-ordered pairs.
pub fn molnar_validate(rf: &RepFun, c_type: f64, grid: &[f64]) -> ValidationReport {
    let mut report = ValidationReport::new();
    if !(c_type > 0.0 && c_type.is_finite() && c_type != 1.0) {
        report.push("type_c", None, c_type);
        return report;
    }
    match rf.eval_real(1.0) {
        Ok(v) if (v - 1.0).abs() <= MOLNAR_TOLERANCE => {}
        Ok(v) => report.push("normalization", Some(1.0), (v - 1.0).abs()),
        Err(_) => report.push("normalization", Some(1.0), f64::INFINITY),
    }
    let c2 = c_type * c_type;
    let mut worst = [(0.0f64, 0.0f64); 3];
    for &x in grid {
        let fx = match rf.eval_real(x) {
            Ok(v) => v,
            Err(_) => {
                report.push("evaluation", Some(x), f64::INFINITY);
                continue;
            }
        };
        if !(fx > 0.0) {
            report.push("positivity", Some(x), fx);
            continue;
        }
        let sym = rf.eval_real(1.0 / x).map(|v| rel_gap(x * v, fx)).unwrap_or(f64::INFINITY);
        let scale = rf
            .eval_real(c2 * x)
            .map(|v| rel_gap(v, c_type * fx))
            .unwrap_or(f64::INFINITY);
        for (slot, gap) in worst.iter_mut().zip([sym, scale]) {
            if gap > slot.0 {
                *slot = (gap, x);
            }
        }
    }
    for (name, (gap, x)) in ["symmetry", "scaling"].iter().zip(worst) {
        if gap > MOLNAR_TOLERANCE {
            report.push(*name, Some(x), gap);
        }
    }
    let probe = crate::matmean::sample_operator_monotonicity(rf, &[2], 64, 0x5eed);
    if probe.worst_violation > crate::matmean::LOEWNER_FLOOR {
        report.push("operator_monotonicity", None, probe.worst_violation);
    }
    report
}
