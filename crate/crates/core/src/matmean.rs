//! Hermitian positive-definite matrices, functional calculus, and Kubo-Ando means
//! `A σ_f B = A^{1/2} f(A^{−1/2} B A^{−1/2}) A^{1/2}`.
//!
//! Every matrix function goes through a full Hermitian eigendecomposition, and every
//! congruence product is replaced by its Hermitian part before decomposing again.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::repfun::RepFun;

pub type CMatrix = DMatrix<Complex64>;

/// Relative eigenvalue floor for Loewner-order comparisons.
pub const LOEWNER_FLOOR: f64 = 1e-9;

/// Relative asymmetry above which input is rejected instead of symmetrized.
const HERMITIAN_REJECT: f64 = 1e-8;

/// Semidefinite inputs may carry eigenvalues down to `−SEMIDEF_FLOOR·‖A‖`.
const SEMIDEF_FLOOR: f64 = 1e-12;

/// Regularization gap above which [`regularized_mean`] reports non-convergence.
pub const REGULARIZATION_GAP: f64 = 1e-6;

fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

fn spectral_norm_hermitian(values: &DVector<f64>) -> f64 {
    values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    SymmetricEigen::new(hermitian_part(m))
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |acc, v| acc.min(*v))
}

/// Spectral norm of the Hermitian part of `m`.
pub fn hermitian_norm(m: &CMatrix) -> f64 {
    spectral_norm_hermitian(&SymmetricEigen::new(hermitian_part(m)).eigenvalues)
}

/// Hermitian positive (semi)definite matrix with its eigendecomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct PosDefMatrix {
    entries: CMatrix,
    eigenvalues: DVector<f64>,
    eigenvectors: CMatrix,
    norm: f64,
}

impl PosDefMatrix {
    /// Strictly positive definite.
    pub fn new(entries: CMatrix) -> Result<Self> {
        let m = Self::decompose(entries)?;
        let min = m.min_eigenvalue();
        if !(min > 0.0) {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
        }
        Ok(m)
    }

    /// Positive semidefinite up to a roundoff floor of `1e-12·‖A‖`.
    pub fn semidefinite(entries: CMatrix) -> Result<Self> {
        Self::with_floor(entries, SEMIDEF_FLOOR)
    }

    fn with_floor(entries: CMatrix, floor: f64) -> Result<Self> {
        let m = Self::decompose(entries)?;
        let min = m.min_eigenvalue();
        if min < -floor * m.norm || min.is_nan() {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
        }
        Ok(m)
    }

    fn decompose(entries: CMatrix) -> Result<Self> {
        if !entries.is_square() || entries.nrows() == 0 {
            return Err(Error::Domain(format!(
                "expected a non-empty square matrix, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Domain("matrix has non-finite entries".into()));
        }
        let scale = entries.iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
        let asymmetry = (&entries - entries.adjoint())
            .iter()
            .fold(0.0f64, |acc, z| acc.max(z.norm()));
        if asymmetry > HERMITIAN_REJECT * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::NotHermitian { asymmetry });
        }
        let entries = hermitian_part(&entries);
        let eig = SymmetricEigen::new(entries.clone());
        let norm = spectral_norm_hermitian(&eig.eigenvalues);
        Ok(Self {
            entries,
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
            norm,
        })
    }

    pub fn from_real(entries: &DMatrix<f64>) -> Result<Self> {
        Self::new(entries.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        Self::new(diag(values))
    }

    pub fn semidefinite_diagonal(values: &[f64]) -> Result<Self> {
        Self::semidefinite(diag(values))
    }

    pub fn identity(n: usize) -> Self {
        Self::new(CMatrix::identity(n, n)).expect("identity is positive definite")
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    /// Spectral norm.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().fold(f64::INFINITY, |acc, v| acc.min(*v))
    }

    pub fn is_strict(&self) -> bool {
        self.min_eigenvalue() > 0.0
    }

    /// `U diag(g(λ_i)) U*`.
    pub fn apply(&self, mut g: impl FnMut(f64) -> Result<f64>) -> Result<CMatrix> {
        let mut values = DVector::zeros(self.dim());
        for (v, &lam) in values.iter_mut().zip(self.eigenvalues.iter()) {
            *v = g(lam)?;
        }
        let u = &self.eigenvectors;
        let scaled = u * CMatrix::from_diagonal(&values.map(|x| Complex64::new(x, 0.0)));
        Ok(hermitian_part(&(scaled * u.adjoint())))
    }

    fn require_strict(&self) -> Result<()> {
        if self.is_strict() {
            Ok(())
        } else {
            Err(Error::NotPositiveDefinite { min_eigenvalue: self.min_eigenvalue() })
        }
    }

    pub fn sqrt(&self) -> CMatrix {
        self.apply(|x| Ok(x.max(0.0).sqrt())).expect("infallible")
    }

    pub fn inv_sqrt(&self) -> Result<CMatrix> {
        self.require_strict()?;
        self.apply(|x| Ok(1.0 / x.sqrt()))
    }

    pub fn inverse(&self) -> Result<CMatrix> {
        self.require_strict()?;
        self.apply(|x| Ok(1.0 / x))
    }

    /// `self + eps·I`.
    pub fn shifted(&self, eps: f64) -> Result<Self> {
        let n = self.dim();
        Self::new(&self.entries + CMatrix::identity(n, n) * Complex64::new(eps, 0.0))
    }
}

fn diag(values: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&DVector::from_iterator(
        values.len(),
        values.iter().map(|x| Complex64::new(*x, 0.0)),
    ))
}

/// Loewner gap: smallest eigenvalue of `upper − lower`.
pub fn loewner_gap(lower: &CMatrix, upper: &CMatrix) -> f64 {
    min_eigenvalue(&(upper - lower))
}

fn computed_result(entries: CMatrix) -> Result<PosDefMatrix> {
    PosDefMatrix::with_floor(entries, LOEWNER_FLOOR)
}

fn check_dims(a: &PosDefMatrix, b: &PosDefMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { left: a.dim(), right: b.dim() });
    }
    Ok(())
}

/// Functional calculus `f(A)` for strictly positive `A`.
pub fn mat_apply(f: &RepFun, a: &PosDefMatrix) -> Result<PosDefMatrix> {
    a.require_strict()?;
    computed_result(a.apply(|x| f.eval_real(x))?)
}

/// `A σ_f B` for strictly positive `A` and semidefinite `B`.
pub fn kubo_ando_mean(f: &RepFun, a: &PosDefMatrix, b: &PosDefMatrix) -> Result<PosDefMatrix> {
    check_dims(a, b)?;
    let inv_root = a.inv_sqrt()?;
    let root = a.sqrt();
    let inner = PosDefMatrix::with_floor(&inv_root * b.entries() * &inv_root, LOEWNER_FLOOR)?;
    let at_zero = f.limit_at_zero();
    let tiny = SEMIDEF_FLOOR * inner.norm();
    let f_inner = inner.apply(|x| if x <= tiny { Ok(at_zero) } else { f.eval_real(x) })?;
    computed_result(&root * f_inner * &root)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassicalMean {
    Arithmetic,
    Harmonic,
    Geometric,
    ParallelSum,
}

/// Closed-form classical means: `(A+B)/2`, `2(A⁻¹+B⁻¹)⁻¹`,
/// `A^{1/2}(A^{−1/2}BA^{−1/2})^{1/2}A^{1/2}`, and `(A⁻¹+B⁻¹)⁻¹`.
pub fn classical_mean(kind: ClassicalMean, a: &PosDefMatrix, b: &PosDefMatrix) -> Result<PosDefMatrix> {
    check_dims(a, b)?;
    let half = Complex64::new(0.5, 0.0);
    match kind {
        ClassicalMean::Arithmetic => computed_result((a.entries() + b.entries()) * half),
        ClassicalMean::Harmonic | ClassicalMean::ParallelSum => {
            let sum = PosDefMatrix::new(a.inverse()? + b.inverse()?)?;
            let ps = sum.inverse()?;
            let factor = if kind == ClassicalMean::Harmonic { 2.0 } else { 1.0 };
            computed_result(ps * Complex64::new(factor, 0.0))
        }
        ClassicalMean::Geometric => {
            b.require_strict()?;
            let inv_root = a.inv_sqrt()?;
            let root = a.sqrt();
            let inner = PosDefMatrix::new(&inv_root * b.entries() * &inv_root)?;
            computed_result(&root * inner.sqrt() * &root)
        }
    }
}

/// Default regularization schedule `ε_k = 10⁻²·2^{−k}`, `k = 0..=20`.
pub fn default_eps_schedule() -> Vec<f64> {
    (0..=20).map(|k| 1e-2 * 0.5f64.powi(k)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularizedMean {
    pub value: PosDefMatrix,
    /// Spectral norm of the difference between the last two iterates.
    pub cauchy_gap: f64,
    pub converged: bool,
}

/// Semidefinite means as the limit of `(A + εI) σ_f (B + εI)` along a decreasing schedule.
pub fn regularized_mean(
    f: &RepFun,
    a: &PosDefMatrix,
    b: &PosDefMatrix,
    eps_schedule: &[f64],
) -> Result<RegularizedMean> {
    check_dims(a, b)?;
    if eps_schedule.is_empty() {
        return Err(Error::Domain("empty regularization schedule".into()));
    }
    if eps_schedule.windows(2).any(|w| !(w[1] < w[0])) || eps_schedule.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::Domain("schedule must be positive and strictly decreasing".into()));
    }
    let mut prev: Option<PosDefMatrix> = None;
    let mut gap = f64::INFINITY;
    for &eps in eps_schedule {
        let current = kubo_ando_mean(f, &a.shifted(eps)?, &b.shifted(eps)?)?;
        if let Some(p) = &prev {
            gap = hermitian_norm(&(current.entries() - p.entries()));
        }
        prev = Some(current);
    }
    let value = prev.expect("non-empty schedule");
    Ok(RegularizedMean {
        value,
        cauchy_gap: gap,
        converged: gap <= REGULARIZATION_GAP,
    })
}

// ---------------------------------------------------------------------------
// Random test matrices
// ---------------------------------------------------------------------------

fn gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// `G G* + 10⁻³ I` with complex standard-normal `G`.
pub fn random_spd(rng: &mut impl Rng, n: usize) -> PosDefMatrix {
    let g = gaussian_matrix(rng, n, n);
    let m = &g * g.adjoint() + CMatrix::identity(n, n) * Complex64::new(1e-3, 0.0);
    PosDefMatrix::new(m).expect("Gram matrix plus shift is positive definite")
}

/// Random positive semidefinite increment `H H*` of random rank.
pub fn random_psd_increment(rng: &mut impl Rng, n: usize) -> CMatrix {
    let rank = rng.random_range(1..=n);
    let h = gaussian_matrix(rng, n, rank);
    &h * h.adjoint()
}

/// Random Hermitian matrix `(G + G*)/2`.
pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> CMatrix {
    hermitian_part(&gaussian_matrix(rng, n, n))
}

/// Deterministic per-trial generator derived from a suite seed.
pub fn trial_rng(seed: u64, stream: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(u128::from(trial) << 20);
    rng
}

/// Outcome of a randomized operator-monotonicity probe.
#[derive(Debug, Clone)]
pub struct MonotonicityProbe {
    /// Largest `−λ_min(f(B) − f(A)) / (‖f(A)‖ + ‖f(B)‖)` seen; positive means violated.
    pub worst_violation: f64,
    pub witness: Option<(CMatrix, CMatrix)>,
}

/// Samples pairs `A ≤ B` and checks `f(A) ≤ f(B)`.
pub fn sample_operator_monotonicity(f: &RepFun, dims: &[usize], trials: usize, seed: u64) -> MonotonicityProbe {
    let mut probe = MonotonicityProbe { worst_violation: f64::NEG_INFINITY, witness: None };
    for (d, &n) in dims.iter().enumerate() {
        for t in 0..trials {
            let mut rng = trial_rng(seed, 0x6d6f6e + d as u64, t as u64);
            let a = random_spd(&mut rng, n);
            let b = match PosDefMatrix::new(a.entries() + random_psd_increment(&mut rng, n)) {
                Ok(b) => b,
                Err(_) => continue,
            };
            let (fa, fb) = match (mat_apply(f, &a), mat_apply(f, &b)) {
                (Ok(fa), Ok(fb)) => (fa, fb),
                _ => {
                    probe.worst_violation = f64::INFINITY;
                    probe.witness = Some((a.entries().clone(), b.entries().clone()));
                    continue;
                }
            };
            let scale = fa.norm() + fb.norm();
            let violation = -loewner_gap(fa.entries(), fb.entries()) / scale;
            if violation > probe.worst_violation {
                probe.worst_violation = violation;
                probe.witness = Some((a.entries().clone(), b.entries().clone()));
            }
        }
    }
    probe
}

// ---------------------------------------------------------------------------
// Text format
// ---------------------------------------------------------------------------

/// Writes `dim n` followed by `n` rows of comma-separated `re,im` pairs.
pub fn write_matrix(m: &CMatrix) -> String {
    let mut out = format!("dim {}\n", m.nrows());
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|j| format!("{:e},{:e}", m[(i, j)].re, m[(i, j)].im))
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Parses the [`write_matrix`] format. Rows may also hold `n` plain reals.
pub fn parse_matrix(text: &str) -> Result<CMatrix> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| Error::Config("empty matrix file".into()))?;
    let n: usize = header
        .strip_prefix("dim")
        .map(str::trim)
        .and_then(|s| s.parse().ok())
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::Config(format!("bad matrix header `{header}`, expected `dim n`")))?;
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n {
        let line = lines
            .next()
            .ok_or_else(|| Error::Config(format!("matrix file has {i} rows, expected {n}")))?;
        let nums = line
            .split(|ch: char| ch == ',' || ch.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().map_err(|e| Error::Config(format!("bad number `{s}`: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        if nums.len() == 2 * n {
            for j in 0..n {
                m[(i, j)] = Complex64::new(nums[2 * j], nums[2 * j + 1]);
            }
        } else if nums.len() == n {
            for j in 0..n {
                m[(i, j)] = Complex64::new(nums[j], 0.0);
            }
        } else {
            return Err(Error::Config(format!(
                "row {i} has {} numbers, expected {} (re,im pairs) or {n}",
                nums.len(),
                2 * n
            )));
        }
    }
    if lines.next().is_some() {
        return Err(Error::Config(format!("matrix file has more than {n} rows")));
    }
    Ok(m)
}
