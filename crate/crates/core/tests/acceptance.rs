//! Acceptance criteria 1-9. Prints one PASS/FAIL line per criterion and exits non-zero
//! if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use molnar::elliptic::{solve_modulus_for_period, EllipticModulus};
use molnar::generator::GeneratorSpec;
use molnar::matmean::trial_rng;
use molnar::repfun::{
    ep_fourier_coefficient, ep_fourier_coefficient_quadrature, ep_half_period_integral, ep_jacobi,
    ep_series, f_extremal, f_integral_eval, psi_recover, psi_recover_detailed, s_quadrature,
    EllipticKernelParams, Extremal, RepFun, StripFunction, StripMethod,
};
use molnar::verify::{log_grid, random_fourier_generator, run_mean_suite, SuiteConfig};
use molnar::Complex64;
use rand::Rng;

const SEED: u64 = 20_190_143;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn grid64() -> Vec<f64> {
    log_grid(1e-3, 1e3, 64)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

/// Seeded random admissible Fourier generators; the period is drawn from [4, 30].
fn random_generators(stream: u64) -> Vec<GeneratorSpec> {
    (0..5)
        .map(|k| {
            let mut rng = trial_rng(SEED, stream, k);
            let p = rng.random_range(4.0..30.0);
            random_fourier_generator(&mut rng, p)
        })
        .collect()
}

fn ac1() -> Outcome {
    let started = Instant::now();
    let mut worst = 0.0f64;
    for gen in random_generators(100) {
        let rf = RepFun::from_generator(
            StripFunction::new(gen.clone(), StripMethod::FourierSeries, 1e-12).unwrap(),
        );
        for x in grid64() {
            let series = rf.eval_real(x).unwrap();
            let direct = f_integral_eval(&gen, Complex64::new(x, 0.0), 1e-12).unwrap().re;
            worst = worst.max((series - direct).abs());
        }
    }
    let elapsed = started.elapsed();
    outcome(
        worst <= 1e-8 && elapsed <= Duration::from_secs(10),
        format!("max |f_series - f_integral| = {worst:.3e} (tol 1e-8), {elapsed:.2?} (limit 10 s), seed {SEED}"),
    )
}

fn ac2() -> Outcome {
    let started = Instant::now();
    let mut smooth = 0.0f64;
    let mut gens = vec![GeneratorSpec::fourier(2.0 * PI, vec![0.5]).unwrap()];
    gens.extend(random_generators(200));
    for gen in &gens {
        for method in [StripMethod::FourierSeries, StripMethod::Quadrature] {
            let sf = StripFunction::new(gen.clone(), method, 1e-12).unwrap();
            let p = gen.period();
            for k in 0..32 {
                let lam = -0.5 * p + p * k as f64 / 32.0;
                let got = psi_recover(&sf, lam).unwrap();
                smooth = smooth.max((got - gen.eval(lam)).abs());
            }
        }
    }
    let p = 20.0;
    let square = GeneratorSpec::square_wave(p, 0.5).unwrap();
    let sf = StripFunction::new(square.clone(), StripMethod::Quadrature, 1e-12).unwrap();
    let (mut outside, mut inside) = (0.0f64, 0.0f64);
    for k in 0..64 {
        let lam = -0.5 * p + p * k as f64 / 64.0;
        let r = lam.rem_euclid(0.5 * p);
        let err = (psi_recover_detailed(&sf, lam).unwrap().value - square.eval(lam)).abs();
        if r.min(0.5 * p - r) < 0.05 * p {
            inside = inside.max(err);
        } else {
            outside = outside.max(err);
        }
    }
    let elapsed = started.elapsed();
    outcome(
        smooth <= 1e-5 && outside <= 1e-5 && elapsed <= Duration::from_secs(30),
        format!(
            "smooth sup err {smooth:.3e}, square wave outside windows {outside:.3e}, inside {inside:.3e} (tol 1e-5), {elapsed:.2?} (limit 30 s)"
        ),
    )
}

fn ac3() -> Outcome {
    let c = 10f64.exp();
    let md = solve_modulus_for_period(20.0).unwrap();
    let mut cases: Vec<(String, RepFun, f64)> = (1..=3)
        .map(|n| (format!("f_{n}"), RepFun::fn_family(n, c).unwrap(), c))
        .collect();
    cases.push(("f_min".into(), RepFun::f_min(md), c));
    cases.push(("f_max".into(), RepFun::f_max(md), c));
    for (k, gen) in random_generators(300).into_iter().enumerate() {
        let ck = gen.type_c();
        cases.push((format!("fourier #{k}"), RepFun::from_generator(StripFunction::auto(gen).unwrap()), ck));
    }
    let mut worst = (0.0f64, String::new());
    for (name, rf, ck) in &cases {
        for x in grid64() {
            let v = rel(rf.eval_real(ck * ck * x).unwrap(), ck * rf.eval_real(x).unwrap());
            if v > worst.0 {
                worst = (v, format!("{name} at x = {x:.4e}"));
            }
        }
    }
    outcome(
        worst.0 <= 1e-10,
        format!("max relative |f(c^2 x) - c f(x)| = {:.3e} (tol 1e-10), worst {}", worst.0, worst.1),
    )
}

fn ac4() -> Outcome {
    let p = 20.0;
    let md = solve_modulus_for_period(p).unwrap();
    let params = EllipticKernelParams::new(p, 1e-15).unwrap();
    let c = Complex64::new((0.5 * p).exp(), 0.0);
    let mut closed = 0.0f64;
    for k in 0..=200 {
        let lam = 0.1 + (0.5 * p - 0.2) * k as f64 / 200.0;
        let s = ep_series(&params, lam, c).unwrap();
        closed = closed.max((s.re - ep_jacobi(&md, lam)).abs()).max(s.im.abs());
    }
    let ws = [
        Complex64::new(0.3, 0.0),
        Complex64::new(-1.7, 0.0),
        Complex64::new(2.5, 0.0),
        Complex64::new(7.0, 0.0),
        Complex64::new(-12.0, 0.0),
        Complex64::new(15.5, 0.0),
        Complex64::new(1.0, 0.8),
        Complex64::new(-3.0, 2.0),
    ];
    let mut fourier = 0.0f64;
    for n in 1..=4 {
        for w in ws {
            let q = ep_fourier_coefficient_quadrature(&params, n, w, 1e-10).unwrap();
            fourier = fourier.max((q - ep_fourier_coefficient(p, n, w)).norm());
        }
    }
    outcome(
        closed <= 1e-8 && fourier <= 1e-6,
        format!("|E_series - E_jacobi| = {closed:.3e} (tol 1e-8), Fourier coefficients {fourier:.3e} (tol 1e-6)"),
    )
}

fn ac5() -> Outcome {
    let p = 20.0;
    let md = solve_modulus_for_period(p).unwrap();
    let params = EllipticKernelParams::new(p, 1e-15).unwrap();
    let (mut product, mut integral) = (0.0f64, 0.0f64);
    for x in grid64() {
        let lo = f_extremal(&md, x, Extremal::Min).unwrap();
        let hi = f_extremal(&md, x, Extremal::Max).unwrap();
        product = product.max(rel(lo * hi, x));
        let i = ep_half_period_integral(&params, x, 1e-11).unwrap();
        integral = integral.max(rel(x.sqrt() * (-0.5 * i).exp(), lo));
    }
    let near_one = EllipticModulus::from_complement(1e-12).unwrap();
    let mut limits = 0.0f64;
    for x in log_grid(0.1, 10.0, 41) {
        let hi = f_extremal(&near_one, x, Extremal::Max).unwrap();
        let lo = f_extremal(&near_one, x, Extremal::Min).unwrap();
        limits = limits.max((hi - 0.5 * (1.0 + x)).abs()).max((lo - 2.0 * x / (1.0 + x)).abs());
    }
    outcome(
        product <= 1e-12 && integral <= 1e-7 && limits <= 1e-4,
        format!(
            "product {product:.3e} (tol 1e-12), integral form {integral:.3e} (tol 1e-7), m->1 limits {limits:.3e} (tol 1e-4)"
        ),
    )
}

fn ac6() -> Outcome {
    let started = Instant::now();
    let cfg = SuiteConfig { trials: 500, matrix_dims: vec![2, 3, 4, 5], seed: SEED, ..SuiteConfig::default() };
    let md = solve_modulus_for_period(20.0).unwrap();
    let functions = [
        RepFun::geometric(),
        RepFun::arithmetic(),
        RepFun::harmonic(),
        RepFun::fn_family(1, 10f64.exp()).unwrap(),
        RepFun::f_min(md),
        RepFun::f_max(md),
    ];
    let mut failures = Vec::new();
    let mut worst_floor = f64::NEG_INFINITY;
    for rf in &functions {
        let report = run_mean_suite(rf, &cfg);
        for name in ["joint_monotonicity", "transformer_inequality"] {
            worst_floor = worst_floor.max(report.check(name).unwrap().worst_violation);
        }
        failures.extend(report.failures().map(|c| format!("{}: {}", rf.describe(), c.name)));
    }
    let square = run_mean_suite(&RepFun::custom("x^2", |x| x * x), &cfg);
    let control = square.check("operator_monotonicity").unwrap();
    let negative_ok = control.status == molnar::verify::CheckStatus::Fail;
    let elapsed = started.elapsed();
    outcome(
        failures.is_empty() && negative_ok && elapsed <= Duration::from_secs(60),
        format!(
            "6 functions x 500 trials x dims 2-5: failures {failures:?}, worst eigenvalue-floor violation {worst_floor:.3e} (tol 1e-9); x^2 monotonicity {} (violation {:.3e}); {elapsed:.2?} (limit 60 s)",
            if negative_ok { "FAILS as required" } else { "did not fail" },
            control.worst_violation
        ),
    )
}

fn run_cli(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = molnar::cli::run(std::iter::once("molnar").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap())
}

fn parse_csv(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

fn ac7() -> Outcome {
    let (code, text) = run_cli(&["extremal", "--p", "20", "--grid", "1e-12:1e12:10"]);
    if code != 0 {
        return outcome(false, format!("extremal exited with {code}"));
    }
    let rows = parse_csv(&text);
    let n = rows.len();
    let at_one = rows.iter().find(|r| r[0] == 1.0).expect("x = 1 on the grid");
    let unit = (at_one[1] - 1.0).abs().max((at_one[2] - 1.0).abs());
    let mut even = 0.0f64;
    for i in 0..n {
        let j = n - 1 - i;
        even = even.max(rel(rows[i][1], rows[j][1])).max(rel(rows[i][2], rows[j][2]));
    }
    let mut strict = true;
    for r in &rows {
        let t = r[0].ln() / 20.0;
        if (t - t.round()).abs() > 1e-6 && !(r[2] > 1.0 && 1.0 > r[1]) {
            strict = false;
        }
    }

    let (code, text) = run_cli(&["extremal", "--p", "10,15,20,25", "--grid", "1e-12:1e12:10"]);
    if code != 0 {
        return outcome(false, format!("extremal sweep exited with {code}"));
    }
    // Widening is checked within one period of the narrowest curve, |ln x| <= 10; each
    // ratio returns to 1 at x = e^{pk}, so it cannot hold pointwise on all of (0, inf).
    let mut widening = true;
    let mut enveloped = true;
    for r in parse_csv(&text) {
        let x = r[0];
        let arith = 0.5 * (1.0 + x) / x.sqrt();
        let harm = 2.0 * x.sqrt() / (1.0 + x);
        for k in 0..4 {
            let (lo, hi) = (r[1 + 2 * k], r[2 + 2 * k]);
            enveloped &= hi <= arith * (1.0 + 1e-12) && lo >= harm * (1.0 - 1e-12);
        }
        if x.ln().abs() <= 10.0 {
            for k in 0..3 {
                widening &= r[3 + 2 * k] <= r[1 + 2 * k] * (1.0 + 1e-12);
                widening &= r[4 + 2 * k] >= r[2 + 2 * k] * (1.0 - 1e-12);
            }
        }
    }
    outcome(
        unit <= 1e-15 && even <= 1e-12 && strict && widening && enveloped,
        format!(
            "ratio at x=1 off by {unit:.1e}, log-evenness {even:.1e}, strict off lattice: {strict}, widening with p on |ln x|<=10: {widening}, inside f_!/f_nabla envelopes: {enveloped}"
        ),
    )
}

fn ac8() -> Outcome {
    let p = 20.0;
    let amplitudes = [-0.5, -0.3, -0.1, 0.0, 0.05, 0.2, 0.35, 0.5];
    let values: Vec<Vec<f64>> = amplitudes
        .iter()
        .map(|&s| {
            let gen = GeneratorSpec::square_wave(p, s).unwrap();
            grid64()
                .into_iter()
                .map(|x| x.sqrt() * s_quadrature(&gen, Complex64::new(x.ln(), 0.0), 1e-12).unwrap().re.exp())
                .collect()
        })
        .collect();
    let mut worst = f64::NEG_INFINITY;
    for i in 0..amplitudes.len() {
        for j in i + 1..amplitudes.len() {
            for (a, b) in values[i].iter().zip(&values[j]) {
                worst = worst.max((a - b) / b);
            }
        }
    }
    outcome(
        worst <= 1e-10,
        format!("max relative (f_s1 - f_s2) over {} nested pairs = {worst:.3e} (tol 1e-10)", amplitudes.len() * (amplitudes.len() - 1) / 2),
    )
}

fn ac9() -> Outcome {
    let mut worst = 0.0f64;
    for p in [1.0, 2.0 * PI, 20.0] {
        let gen = GeneratorSpec::zero(p).unwrap();
        for method in [StripMethod::FourierSeries, StripMethod::Quadrature] {
            let rf = RepFun::from_generator(StripFunction::new(gen.clone(), method, 1e-12).unwrap());
            for x in log_grid(1e-6, 1e6, 97) {
                worst = worst.max((rf.eval_real(x).unwrap() - x.sqrt()).abs());
            }
        }
        for x in log_grid(1e-6, 1e6, 97) {
            let direct = f_integral_eval(&gen, Complex64::new(x, 0.0), 1e-12).unwrap().re;
            worst = worst.max((direct - x.sqrt()).abs());
        }
    }
    outcome(worst <= 1e-14, format!("max |f - sqrt(x)| = {worst:.3e} (tol 1e-14)"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("route equivalence", ac1),
        ("generator round trip", ac2),
        ("type-c scaling", ac3),
        ("elliptic kernel cross-check", ac4),
        ("extremal identities", ac5),
        ("Kubo-Ando axiom battery", ac6),
        ("figure data", ac7),
        ("order preservation", ac8),
        ("geometric degeneration", ac9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!("AC{} {} {name}: {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
