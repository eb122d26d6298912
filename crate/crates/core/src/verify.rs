//! Property suites over representing functions, matrix means, and the order structure
//! of `ℳ_c`. Each suite returns a [`VerificationReport`] with one entry per declared check.

use std::collections::BTreeMap;
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::elliptic::{solve_modulus_for_period, EllipticModulus};
use crate::error::{Error, Result};
use crate::generator::GeneratorSpec;
use crate::matmean::{
    classical_mean, default_eps_schedule, hermitian_norm, kubo_ando_mean, loewner_gap, mat_apply,
    random_hermitian, random_psd_increment, random_spd, trial_rng, write_matrix, CMatrix,
    ClassicalMean, PosDefMatrix,
};
use crate::repfun::{
    ep_half_period_integral, ep_series, f_extremal, s_fourier, s_quadrature, EllipticKernelParams,
    Extremal, RepFun,
};

pub const FUNCTION_CHECKS: [&str; 5] =
    ["positivity", "normalization", "symmetry", "scaling", "scaling_inverse"];

pub const MEAN_CHECKS: [&str; 10] = [
    "symmetry",
    "normalization",
    "joint_monotonicity",
    "transformer_inequality",
    "scalar_consistency",
    "arithmetic_bound",
    "harmonic_bound",
    "operator_monotonicity",
    "upper_semicontinuity_monotone",
    "upper_semicontinuity_gap",
];

pub const ORDER_CHECKS: [&str; 12] = [
    "modulus",
    "product_identity",
    "extremal_scaling",
    "sandwich_closed_form",
    "sandwich_fourier",
    "order_preservation",
    "extremal_integral",
    "extremal_square_wave",
    "kernel_positivity",
    "limit_arithmetic",
    "limit_harmonic",
    "interior_margin",
];

/// Built-in tolerance for a check name.
pub fn default_tolerance(name: &str) -> f64 {
    match name {
        "positivity" => 0.0,
        "normalization" => 1e-12,
        "symmetry" | "scaling" | "scaling_inverse" => 1e-10,
        "joint_monotonicity" | "transformer_inequality" | "arithmetic_bound" | "harmonic_bound"
        | "operator_monotonicity" | "upper_semicontinuity_monotone" => 1e-9,
        "scalar_consistency" | "product_identity" | "modulus" => 1e-12,
        "upper_semicontinuity_gap" => 1e-6,
        "extremal_integral" => 1e-7,
        "extremal_square_wave" => 1e-8,
        "limit_arithmetic" | "limit_harmonic" => 1e-4,
        _ => 1e-10,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skip,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub status: CheckStatus,
    pub worst_violation: f64,
    pub tolerance: f64,
    pub witness: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub subject: String,
    pub checks: Vec<CheckResult>,
    pub seed: u64,
    pub elapsed_ms: f64,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Log-spaced grid of `count` points on `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub count: usize,
    pub min: f64,
    pub max: f64,
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        log_grid(self.min, self.max, self.count)
    }
}

pub fn log_grid(min: f64, max: f64, count: usize) -> Vec<f64> {
    let (lo, hi) = (min.ln(), max.ln());
    (0..count)
        .map(|i| (lo + (hi - lo) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub grid: GridSpec,
    pub matrix_dims: Vec<usize>,
    pub trials: usize,
    pub tolerances: BTreeMap<String, f64>,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            grid: GridSpec { count: 64, min: 1e-3, max: 1e3 },
            matrix_dims: vec![2, 3, 4, 5],
            trials: 500,
            tolerances: BTreeMap::new(),
            seed: 20_190_143,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if g.count < 2 || !(g.min > 0.0) || !(g.max > g.min) || !g.max.is_finite() {
            return Err(Error::Config(format!("invalid grid {g:?}")));
        }
        if self.trials < 1 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.matrix_dims.is_empty() || self.matrix_dims.contains(&0) {
            return Err(Error::Config("matrix dimensions must be positive".into()));
        }
        if let Some((k, v)) = self.tolerances.iter().find(|(_, v)| !(**v > 0.0)) {
            return Err(Error::Config(format!("tolerance {k} = {v} must be positive")));
        }
        Ok(())
    }

    pub fn tolerance(&self, name: &str) -> f64 {
        self.tolerances.get(name).copied().unwrap_or_else(|| default_tolerance(name))
    }
}

/// Running worst case for one check.
#[derive(Debug, Clone)]
struct Worst {
    violation: f64,
    witness: String,
}

impl Worst {
    fn new() -> Self {
        Self { violation: f64::NEG_INFINITY, witness: String::new() }
    }

    fn update(&mut self, violation: f64, witness: impl FnOnce() -> String) {
        let violation = if violation.is_nan() { f64::INFINITY } else { violation };
        if violation > self.violation {
            self.violation = violation;
            self.witness = witness();
        }
    }

    fn merge(mut self, other: Worst) -> Worst {
        if other.violation > self.violation {
            self = other;
        }
        self
    }
}

struct ReportBuilder<'a> {
    cfg: &'a SuiteConfig,
    checks: Vec<CheckResult>,
}

impl<'a> ReportBuilder<'a> {
    fn new(cfg: &'a SuiteConfig) -> Self {
        Self { cfg, checks: Vec::new() }
    }

    fn finish_check(&mut self, name: &str, worst: Worst) {
        let tolerance = self.cfg.tolerance(name);
        let (status, violation) = if worst.violation == f64::NEG_INFINITY {
            (CheckStatus::Skip, 0.0)
        } else if worst.violation <= tolerance {
            (CheckStatus::Pass, worst.violation)
        } else {
            (CheckStatus::Fail, worst.violation)
        };
        self.checks.push(CheckResult {
            name: name.to_string(),
            status,
            worst_violation: violation,
            tolerance,
            witness: worst.witness,
        });
    }

    fn skip(&mut self, name: &str, reason: &str) {
        self.checks.push(CheckResult {
            name: name.to_string(),
            status: CheckStatus::Skip,
            worst_violation: 0.0,
            tolerance: self.cfg.tolerance(name),
            witness: reason.to_string(),
        });
    }

    fn build(self, subject: String, started: Instant) -> VerificationReport {
        VerificationReport {
            subject,
            checks: self.checks,
            seed: self.cfg.seed,
            elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
        }
    }
}

fn rel_gap(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE)
}

fn invalid_config_report(subject: String, cfg: &SuiteConfig, names: &[&str], err: &Error) -> VerificationReport {
    let started = Instant::now();
    let mut b = ReportBuilder::new(cfg);
    for name in names {
        b.skip(name, &format!("configuration rejected: {err}"));
    }
    b.build(subject, started)
}

// ---------------------------------------------------------------------------
// Function suite
// ---------------------------------------------------------------------------

/// Scalar Molnár properties of `f` for type `c` (and `1/c`) on the configured grid.
pub fn run_function_suite(rf: &RepFun, c: f64, cfg: &SuiteConfig) -> VerificationReport {
    let subject = format!("function suite: {} with c = {c}", rf.describe());
    if let Err(e) = cfg.validate() {
        return invalid_config_report(subject, cfg, &FUNCTION_CHECKS, &e);
    }
    let started = Instant::now();
    let grid = cfg.grid.points();
    let mut b = ReportBuilder::new(cfg);
    let eval = |x: f64| rf.eval_real(x).unwrap_or(f64::NAN);

    let mut positivity = Worst::new();
    for &x in &grid {
        let fx = eval(x);
        positivity.update(if fx > 0.0 { 0.0 } else { 1.0 + fx.abs() }, || format!("x={x}, f(x)={fx}"));
    }
    b.finish_check("positivity", positivity);

    let mut norm = Worst::new();
    let f1 = eval(1.0);
    norm.update((f1 - 1.0).abs(), || format!("x=1, f(1)={f1}"));
    b.finish_check("normalization", norm);

    let mut sym = Worst::new();
    for &x in &grid {
        let (fx, lhs) = (eval(x), x * eval(1.0 / x));
        sym.update(rel_gap(lhs, fx), || format!("x={x}, x*f(1/x)={lhs}, f(x)={fx}"));
    }
    b.finish_check("symmetry", sym);

    for (name, factor) in [("scaling", c), ("scaling_inverse", 1.0 / c)] {
        let mut w = Worst::new();
        for &x in &grid {
            let lhs = eval(factor * factor * x);
            let rhs = factor * eval(x);
            w.update(rel_gap(lhs, rhs), || {
                format!("x={x}, f({factor}^2 x)={lhs}, {factor}*f(x)={rhs}")
            });
        }
        b.finish_check(name, w);
    }
    b.build(subject, started)
}

// ---------------------------------------------------------------------------
// Mean suite
// ---------------------------------------------------------------------------

fn matrix_witness(label: &str, m: &CMatrix) -> String {
    format!("{label}=[{}]", write_matrix(m).trim_end().replace('\n', "; "))
}

/// Runs `trials` instances per matrix dimension in parallel and reduces to the worst
/// case in trial order, so serial and parallel runs agree.
fn randomized<F>(cfg: &SuiteConfig, stream: u64, dims: &[usize], trials: usize, body: F) -> Worst
where
    F: Fn(&mut rand_chacha::ChaCha8Rng, usize) -> (f64, Box<dyn FnOnce() -> String>) + Sync,
{
    let jobs: Vec<(usize, usize)> = dims
        .iter()
        .flat_map(|&n| (0..trials).map(move |t| (n, t)))
        .collect();
    let results: Vec<Worst> = jobs
        .par_iter()
        .map(|&(n, t)| {
            let mut rng = trial_rng(cfg.seed, stream * 64 + n as u64, t as u64);
            let (violation, witness) = body(&mut rng, n);
            let mut w = Worst::new();
            w.update(violation, || format!("dim={n}, trial={t}: {}", witness()));
            w
        })
        .collect();
    results.into_iter().fold(Worst::new(), Worst::merge)
}

fn failed(e: Error) -> (f64, Box<dyn FnOnce() -> String>) {
    (f64::INFINITY, Box::new(move || format!("error: {e}")))
}

/// Kubo-Ando axiom battery for `σ_f` over random positive-definite instances.
pub fn run_mean_suite(rf: &RepFun, cfg: &SuiteConfig) -> VerificationReport {
    let subject = format!("mean suite: {}", rf.describe());
    if let Err(e) = cfg.validate() {
        return invalid_config_report(subject, cfg, &MEAN_CHECKS, &e);
    }
    let started = Instant::now();
    let mut b = ReportBuilder::new(cfg);
    let dims = &cfg.matrix_dims;
    let trials = cfg.trials;

    let symmetry = randomized(cfg, 1, dims, trials, |rng, n| {
        let a = random_spd(rng, n);
        let bm = random_spd(rng, n);
        match (kubo_ando_mean(rf, &a, &bm), kubo_ando_mean(rf, &bm, &a)) {
            (Ok(ab), Ok(ba)) => {
                let v = hermitian_norm(&(ab.entries() - ba.entries())) / (a.norm() + bm.norm());
                (v, Box::new(move || {
                    format!("{} {}", matrix_witness("A", a.entries()), matrix_witness("B", bm.entries()))
                }))
            }
            (Err(e), _) | (_, Err(e)) => failed(e),
        }
    });
    b.finish_check("symmetry", symmetry);

    let mut norm = Worst::new();
    for &n in dims {
        let id = PosDefMatrix::identity(n);
        match kubo_ando_mean(rf, &id, &id) {
            Ok(m) => norm.update(hermitian_norm(&(m.entries() - id.entries())), || format!("dim={n}")),
            Err(e) => norm.update(f64::INFINITY, || format!("dim={n}: {e}")),
        }
    }
    b.finish_check("normalization", norm);

    let joint = randomized(cfg, 2, dims, trials, |rng, n| {
        let a = random_spd(rng, n);
        let bm = random_spd(rng, n);
        let c = PosDefMatrix::new(a.entries() + random_psd_increment(rng, n));
        let d = PosDefMatrix::new(bm.entries() + random_psd_increment(rng, n));
        let (c, d) = match (c, d) {
            (Ok(c), Ok(d)) => (c, d),
            (Err(e), _) | (_, Err(e)) => return failed(e),
        };
        match (kubo_ando_mean(rf, &a, &bm), kubo_ando_mean(rf, &c, &d)) {
            (Ok(lo), Ok(hi)) => {
                let scale = lo.norm() + hi.norm();
                let v = -loewner_gap(lo.entries(), hi.entries()) / scale;
                (v, Box::new(move || {
                    format!(
                        "{} {} {} {}",
                        matrix_witness("A", a.entries()),
                        matrix_witness("B", bm.entries()),
                        matrix_witness("C", c.entries()),
                        matrix_witness("D", d.entries())
                    )
                }))
            }
            (Err(e), _) | (_, Err(e)) => failed(e),
        }
    });
    b.finish_check("joint_monotonicity", joint);

    let transformer = randomized(cfg, 3, dims, trials, |rng, n| {
        let a = random_spd(rng, n);
        let bm = random_spd(rng, n);
        let c = random_hermitian(rng, n);
        let ca = PosDefMatrix::new(&c * a.entries() * &c);
        let cb = PosDefMatrix::new(&c * bm.entries() * &c);
        let (ca, cb) = match (ca, cb) {
            (Ok(x), Ok(y)) => (x, y),
            (Err(e), _) | (_, Err(e)) => return failed(e),
        };
        match (kubo_ando_mean(rf, &ca, &cb), kubo_ando_mean(rf, &a, &bm)) {
            (Ok(outer), Ok(inner)) => {
                let inner_c = &c * inner.entries() * &c;
                let scale = ca.norm() + cb.norm();
                let v = -loewner_gap(&inner_c, outer.entries()) / scale;
                (v, Box::new(move || {
                    format!(
                        "{} {} {}",
                        matrix_witness("A", a.entries()),
                        matrix_witness("B", bm.entries()),
                        matrix_witness("C", &c)
                    )
                }))
            }
            (Err(e), _) | (_, Err(e)) => failed(e),
        }
    });
    b.finish_check("transformer_inequality", transformer);

    let scalar = randomized(cfg, 4, &[1], trials, |rng, _| {
        let x = 10f64.powf(rng.random_range(-3.0..3.0));
        let y = 10f64.powf(rng.random_range(-3.0..3.0));
        let expected = rf.eval_real(y / x).map(|v| x * v);
        let got = PosDefMatrix::diagonal(&[x])
            .and_then(|a| PosDefMatrix::diagonal(&[y]).map(|bm| (a, bm)))
            .and_then(|(a, bm)| kubo_ando_mean(rf, &a, &bm));
        match (got, expected) {
            (Ok(m), Ok(e)) => {
                let g = m.entries()[(0, 0)].re;
                (rel_gap(g, e), Box::new(move || format!("x={x}, y={y}, mean={g}, x*f(y/x)={e}")))
            }
            (Err(e), _) | (_, Err(e)) => failed(e),
        }
    });
    b.finish_check("scalar_consistency", scalar);

    for (name, stream, kind) in [
        ("arithmetic_bound", 5u64, ClassicalMean::Arithmetic),
        ("harmonic_bound", 6, ClassicalMean::Harmonic),
    ] {
        let w = randomized(cfg, stream, dims, trials, |rng, n| {
            let a = random_spd(rng, n);
            let bm = random_spd(rng, n);
            match (kubo_ando_mean(rf, &a, &bm), classical_mean(kind, &a, &bm)) {
                (Ok(m), Ok(cl)) => {
                    let scale = a.norm() + bm.norm();
                    let gap = if kind == ClassicalMean::Arithmetic {
                        loewner_gap(m.entries(), cl.entries())
                    } else {
                        loewner_gap(cl.entries(), m.entries())
                    };
                    (-gap / scale, Box::new(move || {
                        format!("{} {}", matrix_witness("A", a.entries()), matrix_witness("B", bm.entries()))
                    }))
                }
                (Err(e), _) | (_, Err(e)) => failed(e),
            }
        });
        b.finish_check(name, w);
    }

    let monotone = randomized(cfg, 7, dims, trials, |rng, n| {
        let a = random_spd(rng, n);
        let bm = match PosDefMatrix::new(a.entries() + random_psd_increment(rng, n)) {
            Ok(m) => m,
            Err(e) => return failed(e),
        };
        match (mat_apply(rf, &a), mat_apply(rf, &bm)) {
            (Ok(fa), Ok(fb)) => {
                let scale = fa.norm() + fb.norm();
                let v = -loewner_gap(fa.entries(), fb.entries()) / scale;
                (v, Box::new(move || {
                    format!("{} {}", matrix_witness("A", a.entries()), matrix_witness("B", bm.entries()))
                }))
            }
            (Err(e), _) | (_, Err(e)) => failed(e),
        }
    });
    b.finish_check("operator_monotonicity", monotone);

    // Regularization sequences are 21 means long; sample fewer of them.
    let usc_trials = trials.div_ceil(10).max(1);
    let schedule = default_eps_schedule();
    let usc: Vec<(Worst, Worst)> = {
        let jobs: Vec<(usize, usize)> = dims
            .iter()
            .flat_map(|&n| (0..usc_trials).map(move |t| (n, t)))
            .collect();
        jobs.par_iter()
            .map(|&(n, t)| {
                let mut rng = trial_rng(cfg.seed, 8 * 64 + n as u64, t as u64);
                let a = random_spd(&mut rng, n);
                let bm = random_spd(&mut rng, n);
                let mut mono = Worst::new();
                let mut gap = Worst::new();
                let mut prev: Option<PosDefMatrix> = None;
                for &eps in &schedule {
                    let cur = match a.shifted(eps).and_then(|x| bm.shifted(eps).map(|y| (x, y))) {
                        Ok((x, y)) => kubo_ando_mean(rf, &x, &y),
                        Err(e) => Err(e),
                    };
                    let cur = match cur {
                        Ok(m) => m,
                        Err(e) => {
                            mono.update(f64::INFINITY, || format!("dim={n}, trial={t}: {e}"));
                            gap.update(f64::INFINITY, || format!("dim={n}, trial={t}: {e}"));
                            return (mono, gap);
                        }
                    };
                    if let Some(p) = &prev {
                        let scale = p.norm() + cur.norm();
                        let v = -loewner_gap(cur.entries(), p.entries()) / scale;
                        mono.update(v, || format!("dim={n}, trial={t}, eps={eps}"));
                        let g = hermitian_norm(&(p.entries() - cur.entries())) / scale;
                        if eps == *schedule.last().unwrap() {
                            gap.update(g, || format!("dim={n}, trial={t}"));
                        }
                    }
                    prev = Some(cur);
                }
                (mono, gap)
            })
            .collect()
    };
    let (mono, gap) = usc
        .into_iter()
        .fold((Worst::new(), Worst::new()), |(m, g), (m2, g2)| (m.merge(m2), g.merge(g2)));
    b.finish_check("upper_semicontinuity_monotone", mono);
    b.finish_check("upper_semicontinuity_gap", gap);

    b.build(subject, started)
}

// ---------------------------------------------------------------------------
// Order suite
// ---------------------------------------------------------------------------

const RANDOM_FOURIER_GENERATORS: usize = 5;

/// Random admissible sine-series generator: up to six harmonics scaled so that
/// `Σ|B_n| ≤ 1/2`.
pub fn random_fourier_generator(rng: &mut impl Rng, period: f64) -> GeneratorSpec {
    let n = rng.random_range(1..=6);
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let l1: f64 = raw.iter().map(|b| b.abs()).sum();
    let budget = 0.5 * rng.random_range(0.2..1.0);
    GeneratorSpec::fourier(period, raw.iter().map(|b| b * budget / l1).collect())
        .expect("finite coefficients")
}

/// Extremal elements, sandwich, order preservation, and the `m → 1` limits for period `p`.
pub fn run_order_suite(p: f64, cfg: &SuiteConfig) -> VerificationReport {
    let subject = format!("order suite: p = {p}");
    if let Err(e) = cfg.validate() {
        return invalid_config_report(subject, cfg, &ORDER_CHECKS, &e);
    }
    let started = Instant::now();
    let mut b = ReportBuilder::new(cfg);

    let modulus = match solve_modulus_for_period(p) {
        Ok(m) => m,
        Err(e) => {
            let mut w = Worst::new();
            w.update(f64::INFINITY, || format!("p={p}: {e}"));
            b.finish_check("modulus", w);
            for name in &ORDER_CHECKS[1..] {
                b.skip(name, "no modulus for this period");
            }
            return b.build(subject, started);
        }
    };
    let mut w = Worst::new();
    w.update(rel_gap(modulus.period(), p), || format!("m={}, 1-m={}", modulus.m(), modulus.complement()));
    b.finish_check("modulus", w);

    let c = (0.5 * p).exp();
    let grid = cfg.grid.points();
    let f_min = |x: f64| f_extremal(&modulus, x, Extremal::Min).unwrap_or(f64::NAN);
    let f_max = |x: f64| f_extremal(&modulus, x, Extremal::Max).unwrap_or(f64::NAN);
    // Points where f_min = f_max = √x; strictness is not expected there.
    let on_lattice = |x: f64| {
        let r = x.ln() / p;
        (r - r.round()).abs() < 1e-9
    };

    let mut w = Worst::new();
    for &x in &grid {
        let prod = f_min(x) * f_max(x);
        w.update(rel_gap(prod, x), || format!("x={x}, f_min*f_max={prod}"));
    }
    b.finish_check("product_identity", w);

    let mut w = Worst::new();
    for (label, which) in [("f_min", Extremal::Min), ("f_max", Extremal::Max)] {
        for &x in &grid {
            let lhs = f_extremal(&modulus, c * c * x, which).unwrap_or(f64::NAN);
            let rhs = c * f_extremal(&modulus, x, which).unwrap_or(f64::NAN);
            w.update(rel_gap(lhs, rhs), || format!("{label}, x={x}"));
        }
    }
    b.finish_check("extremal_scaling", w);

    let sandwich = |w: &mut Worst, label: &str, x: f64, fx: f64| {
        let (lo, hi) = (f_min(x), f_max(x));
        let v = ((lo - fx) / lo).max((fx - hi) / hi);
        w.update(v, || format!("{label}, x={x}, f_min={lo}, f={fx}, f_max={hi}"));
    };

    let mut w = Worst::new();
    for n in 1..=3 {
        let f = RepFun::fn_family(n, c).expect("c > 1");
        for &x in &grid {
            sandwich(&mut w, &format!("f_{n}"), x, f.eval_real(x).unwrap_or(f64::NAN));
        }
    }
    b.finish_check("sandwich_closed_form", w);

    let mut w = Worst::new();
    for k in 0..RANDOM_FOURIER_GENERATORS {
        let mut rng = trial_rng(cfg.seed, 9, k as u64);
        let gen = random_fourier_generator(&mut rng, p);
        let label = format!("B={:?}", gen.coefficients());
        for &x in &grid {
            let fx = s_fourier(&gen, Complex64::new(x.ln(), 0.0))
                .map(|s| x.sqrt() * s.re.exp())
                .unwrap_or(f64::NAN);
            sandwich(&mut w, &label, x, fx);
        }
    }
    b.finish_check("sandwich_fourier", w);

    // Square waves s₁ < s₂ give Ψ₁ ≤ Ψ₂ on (0, p/2); so do scaled half-sines.
    let amplitudes = [-0.5, -0.25, 0.0, 0.25, 0.5];
    let square_values: Vec<Vec<f64>> = amplitudes
        .par_iter()
        .map(|&s| {
            let gen = GeneratorSpec::square_wave(p, s).expect("finite amplitude");
            grid.iter()
                .map(|&x| {
                    s_quadrature(&gen, Complex64::new(x.ln(), 0.0), 1e-12)
                        .map(|v| x.sqrt() * v.re.exp())
                        .unwrap_or(f64::NAN)
                })
                .collect()
        })
        .collect();
    let mut w = Worst::new();
    for (i, pair) in square_values.windows(2).enumerate() {
        for (j, &x) in grid.iter().enumerate() {
            let (lo, hi) = (pair[0][j], pair[1][j]);
            w.update((lo - hi) / hi, || {
                format!("square waves s={} vs s={}, x={x}", amplitudes[i], amplitudes[i + 1])
            });
        }
    }
    let scales = [0.0, 0.25, 0.5, 0.75, 1.0];
    for pair in scales.windows(2) {
        let g_lo = GeneratorSpec::fourier(p, vec![0.5 * pair[0]]).expect("finite");
        let g_hi = GeneratorSpec::fourier(p, vec![0.5 * pair[1]]).expect("finite");
        for &x in &grid {
            let wv = Complex64::new(x.ln(), 0.0);
            let lo = s_fourier(&g_lo, wv).map(|s| s.re.exp()).unwrap_or(f64::NAN);
            let hi = s_fourier(&g_hi, wv).map(|s| s.re.exp()).unwrap_or(f64::NAN);
            w.update((lo - hi) / hi, || format!("half-sine scales {} vs {}, x={x}", pair[0], pair[1]));
        }
    }
    b.finish_check("order_preservation", w);

    let params = EllipticKernelParams::new(p, 1e-15).expect("positive period");
    let integrals: Vec<(f64, std::result::Result<f64, String>)> = grid
        .par_iter()
        .map(|&x| (x, ep_half_period_integral(&params, x, 1e-11).map_err(|e| e.to_string())))
        .collect();
    let mut w = Worst::new();
    for (x, integral) in &integrals {
        match integral {
            Ok(i) => {
                let lo = x.sqrt() * (-0.5 * i).exp();
                let hi = x.sqrt() * (0.5 * i).exp();
                w.update(rel_gap(lo, f_min(*x)).max(rel_gap(hi, f_max(*x))), || {
                    format!("x={x}, integral={i}")
                });
            }
            Err(e) => w.update(f64::INFINITY, || format!("x={x}: {e}")),
        }
    }
    b.finish_check("extremal_integral", w);

    let mut w = Worst::new();
    for (j, &x) in grid.iter().enumerate() {
        let (lo, hi) = (square_values[0][j], square_values[4][j]);
        w.update(rel_gap(lo, f_min(x)).max(rel_gap(hi, f_max(x))), || {
            format!("x={x}, square-wave f_min={lo}, f_max={hi}")
        });
    }
    b.finish_check("extremal_square_wave", w);

    let mut w = Worst::new();
    let lambdas: Vec<f64> = (1..32).map(|k| 0.5 * p * k as f64 / 32.0).collect();
    for &x in grid.iter().filter(|x| !on_lattice(**x)) {
        for &lam in &lambdas {
            match ep_series(&params, lam, Complex64::new(x, 0.0)) {
                Ok(e) => w.update(-e.re, || format!("x={x}, λ={lam}, E_p={}", e.re)),
                Err(e) => w.update(f64::INFINITY, || format!("x={x}, λ={lam}: {e}")),
            }
        }
    }
    b.finish_check("kernel_positivity", w);

    let near_one = EllipticModulus::from_complement(1e-12).expect("valid complement");
    let limit_grid = log_grid(0.1, 10.0, 41);
    for (name, which) in [("limit_arithmetic", Extremal::Max), ("limit_harmonic", Extremal::Min)] {
        let mut w = Worst::new();
        for &x in &limit_grid {
            let target = match which {
                Extremal::Max => 0.5 * (x + 1.0),
                Extremal::Min => 2.0 * x / (1.0 + x),
            };
            let v = f_extremal(&near_one, x, which).unwrap_or(f64::NAN);
            w.update((v - target).abs(), || format!("x={x}, f={v}, limit={target}"));
        }
        b.finish_check(name, w);
    }

    // Observed distance of f_1 from the extremal envelope, reported rather than bounded.
    let f1 = RepFun::fn_family(1, c).expect("c > 1");
    let mut min_margin = f64::INFINITY;
    let mut at = f64::NAN;
    for &x in grid.iter().filter(|x| !on_lattice(**x) && (**x - 1.0).abs() > 1e-12) {
        let fx = f1.eval_real(x).unwrap_or(f64::NAN);
        let margin = (fx - f_min(x)).min(f_max(x) - fx) / x.sqrt();
        if margin < min_margin || margin.is_nan() {
            min_margin = margin;
            at = x;
        }
    }
    let mut w = Worst::new();
    w.update(-min_margin, || format!("smallest margin of f_1 inside [f_min, f_max]: {min_margin:e} at x={at}"));
    b.finish_check("interior_margin", w);

    b.build(subject, started)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> SuiteConfig {
        SuiteConfig { trials: 40, ..SuiteConfig::default() }
    }

    #[test]
    fn config_validation() {
        let mut cfg = SuiteConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.grid.count = 1;
        assert!(cfg.validate().is_err());
        let mut cfg = SuiteConfig::default();
        cfg.tolerances.insert("scaling".into(), -1.0);
        assert!(cfg.validate().is_err());
        let report = run_function_suite(&RepFun::geometric(), 2.0, &cfg);
        assert!(report.checks.iter().all(|c| c.status == CheckStatus::Skip));
        assert_eq!(report.checks.len(), FUNCTION_CHECKS.len());
    }

    #[test]
    fn function_suite_examples() {
        let cfg = SuiteConfig::default();
        let r = run_function_suite(&RepFun::geometric(), 5.0, &cfg);
        assert!(r.all_passed(), "{}", r.to_json());
        let r = run_function_suite(&RepFun::arithmetic(), 2.0, &cfg);
        assert_eq!(r.check("scaling").unwrap().status, CheckStatus::Fail);
        assert_eq!(r.check("symmetry").unwrap().status, CheckStatus::Pass);
        let md = solve_modulus_for_period(20.0).unwrap();
        let r = run_function_suite(&RepFun::f_min(md), 10f64.exp(), &cfg);
        assert!(r.all_passed(), "{}", r.to_json());
        let names: Vec<&str> = r.checks.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, FUNCTION_CHECKS);
    }

    #[test]
    fn mean_suite_is_deterministic_and_complete() {
        let cfg = SuiteConfig { trials: 10, ..SuiteConfig::default() };
        let a = run_mean_suite(&RepFun::geometric(), &cfg);
        let b = run_mean_suite(&RepFun::geometric(), &cfg);
        assert_eq!(a.checks, b.checks);
        let names: Vec<&str> = a.checks.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, MEAN_CHECKS);
        assert!(a.all_passed(), "{}", a.to_json());
    }

    #[test]
    fn mean_suite_falpha() {
        let r = run_mean_suite(&RepFun::falpha(0.5).unwrap(), &small_cfg());
        assert!(r.all_passed(), "{}", r.to_json());
    }

    #[test]
    fn mean_suite_rejects_square() {
        let r = run_mean_suite(&RepFun::custom("x^2", |x| x * x), &small_cfg());
        let check = r.check("operator_monotonicity").unwrap();
        assert_eq!(check.status, CheckStatus::Fail);
        assert!(check.witness.contains("A=["));
    }

    #[test]
    fn order_suite_p20() {
        let cfg = SuiteConfig { trials: 1, ..SuiteConfig::default() };
        let r = run_order_suite(20.0, &cfg);
        assert!(r.all_passed(), "{}", r.to_json());
        let names: Vec<&str> = r.checks.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ORDER_CHECKS);
    }

    #[test]
    fn order_suite_unsolvable_period() {
        let r = run_order_suite(1000.0, &SuiteConfig::default());
        assert_eq!(r.check("modulus").unwrap().status, CheckStatus::Fail);
        assert!(!r.all_passed());
        assert_eq!(r.checks.len(), ORDER_CHECKS.len());
    }
}
