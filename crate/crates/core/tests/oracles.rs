//! Independent oracles for the special functions and the strip-function routes.

use std::f64::consts::PI;

use molnar::elliptic::{complete_elliptic_k, jacobi_sn_cn_dn, solve_modulus_for_period};
use molnar::generator::GeneratorSpec;
use molnar::repfun::{
    ep_fourier_coefficient, ep_jacobi, ep_series, f_extremal, f_integral_eval, s_fourier,
    s_quadrature, EllipticKernelParams, Extremal, RepFun,
};
use molnar::Complex64;
use proptest::prelude::*;

/// K(m) by the trapezoid rule over a full period of the integrand, which converges
/// geometrically for smooth periodic functions.
fn k_trapezoid(m: f64) -> f64 {
    let n = 4000;
    let h = PI / n as f64;
    let sum: f64 = (0..n)
        .map(|i| {
            let s = (i as f64 * h).sin();
            1.0 / (1.0 - m * s * s).sqrt()
        })
        .sum();
    0.5 * sum * h
}

/// (sn, cn, dn) by classical RK4 on sn' = cn·dn, cn' = −sn·dn, dn' = −m·sn·cn.
fn sn_cn_dn_rk4(u: f64, m: f64) -> (f64, f64, f64) {
    let steps = 20_000;
    let h = u / steps as f64;
    let rhs = |y: [f64; 3]| [y[1] * y[2], -y[0] * y[2], -m * y[0] * y[1]];
    let mut y = [0.0, 1.0, 1.0];
    for _ in 0..steps {
        let k1 = rhs(y);
        let k2 = rhs([y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1], y[2] + 0.5 * h * k1[2]]);
        let k3 = rhs([y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1], y[2] + 0.5 * h * k2[2]]);
        let k4 = rhs([y[0] + h * k3[0], y[1] + h * k3[1], y[2] + h * k3[2]]);
        for i in 0..3 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    (y[0], y[1], y[2])
}

/// F(φ, m) by composite Simpson, then φ with F(φ) = u by bisection.
fn sn_by_inversion(u: f64, m: f64) -> f64 {
    let f = |phi: f64| {
        let n = 2000;
        let h = phi / n as f64;
        let g = |t: f64| 1.0 / (1.0 - m * t.sin().powi(2)).sqrt();
        let mut s = g(0.0) + g(phi);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * g(i as f64 * h);
        }
        s * h / 3.0
    };
    let (mut lo, mut hi) = (0.0, PI / 2.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).sin()
}

#[test]
fn complete_integral_against_trapezoid() {
    for i in 1..=9 {
        let m = i as f64 / 10.0;
        let k = complete_elliptic_k(m).unwrap();
        assert!((k - k_trapezoid(m)).abs() < 1e-13, "m = {m}");
    }
    assert!((complete_elliptic_k(0.5).unwrap() - 1.854_074_677_301_372).abs() < 1e-14);
    assert!((complete_elliptic_k(1e-15).unwrap() - PI / 2.0).abs() < 1e-14);
}

#[test]
fn jacobi_functions_against_ode_and_inversion() {
    for (u, m) in [(0.7, 0.3), (1.3, 0.9), (2.0, 0.1), (0.4, 0.99)] {
        let (s, c, d) = jacobi_sn_cn_dn(u, m).unwrap();
        let (so, co, dout) = sn_cn_dn_rk4(u, m);
        assert!((s - so).abs() < 1e-12 && (c - co).abs() < 1e-12 && (d - dout).abs() < 1e-12, "u={u} m={m}");
    }
    let (s, _, _) = jacobi_sn_cn_dn(0.7, 0.3).unwrap();
    assert!((s - sn_by_inversion(0.7, 0.3)).abs() < 1e-12);
}

#[test]
fn modulus_regression_and_symmetry() {
    let md = solve_modulus_for_period(20.0).unwrap();
    assert!((md.m() - 0.897_794_859_630_386_6).abs() < 1e-14);
    let half = solve_modulus_for_period(4.0 * PI).unwrap();
    assert!((half.m() - 0.5).abs() < 1e-14);
    assert!(solve_modulus_for_period(4.0 * PI + 1e-9).unwrap().m() > 0.5);
}

#[test]
fn strip_function_values() {
    let gen = GeneratorSpec::fourier(2.0 * PI, vec![0.5]).unwrap();
    let expected = PI / PI.sinh();
    let w = Complex64::new(PI, 0.0);
    assert!((s_fourier(&gen, w).unwrap().re - expected).abs() < 1e-15);
    assert!((s_quadrature(&gen, w, 1e-12).unwrap().re - expected).abs() < 1e-8);
    // f(e) via the integral route against √e·e^{S(1)}
    let direct = f_integral_eval(&gen, Complex64::new(1f64.exp(), 0.0), 1e-12).unwrap();
    let series = 0.5f64.exp() * s_fourier(&gen, Complex64::new(1.0, 0.0)).unwrap().exp();
    assert!((direct - series).norm() < 1e-11);
}

#[test]
fn closed_family_value_at_c() {
    let c = 10f64.exp();
    let f1 = RepFun::fn_family(1, c).unwrap();
    let expected = 5f64.exp() * (PI / (PI * PI / 10.0).sinh()).exp();
    assert!(((f1.eval_real(c).unwrap() - expected) / expected).abs() < 1e-14);
    for n in 1..=4 {
        let f = RepFun::fn_family(n, c).unwrap();
        assert!(((f.eval_real(c * c).unwrap() - c) / c).abs() < 1e-13);
    }
}

#[test]
fn extremal_regression_at_ten() {
    let md = solve_modulus_for_period(20.0).unwrap();
    let lo = f_extremal(&md, 10.0, Extremal::Min).unwrap();
    let hi = f_extremal(&md, 10.0, Extremal::Max).unwrap();
    assert!((lo - 1.818_850_344_258_066).abs() < 1e-13);
    assert!(lo < 10f64.sqrt() && 10f64.sqrt() < hi);
    assert!((lo * hi - 10.0).abs() < 1e-13);
    let square = GeneratorSpec::square_wave(20.0, -0.5).unwrap();
    let via_square = 10f64.sqrt() * s_quadrature(&square, Complex64::new(10f64.ln(), 0.0), 1e-12).unwrap().re.exp();
    assert!((via_square - lo).abs() < 1e-10);
}

#[test]
fn kernel_closed_form_at_three() {
    let md = solve_modulus_for_period(20.0).unwrap();
    let params = EllipticKernelParams::new(20.0, 1e-14).unwrap();
    let s = ep_series(&params, 3.0, Complex64::new(10f64.exp(), 0.0)).unwrap();
    assert!((s.re - ep_jacobi(&md, 3.0)).abs() < 1e-10);
    assert!(ep_jacobi(&md, 10.0).abs() < 1e-12);
    let w = Complex64::new(PI, 0.0);
    let expected = 2.0 * PI * (PI * PI / (2.0 * PI)).sin().powi(2) / (2.0 * PI * PI / (2.0 * PI)).sinh();
    assert!((ep_fourier_coefficient(2.0 * PI, 1, w).re - expected).abs() < 1e-14);
    assert!(ep_fourier_coefficient(20.0, 3, Complex64::new(20.0, 0.0)).norm() < 1e-12);
}

fn admissible_generator() -> impl Strategy<Value = GeneratorSpec> {
    (2.0f64..30.0, prop::collection::vec(-1.0f64..1.0, 1..6), 0.05f64..0.5).prop_map(|(p, raw, budget)| {
        let l1: f64 = raw.iter().map(|b| b.abs()).sum::<f64>().max(1e-12);
        GeneratorSpec::fourier(p, raw.iter().map(|b| b * budget / l1).collect()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn jacobi_identities(u in -40.0f64..40.0, m in 0.01f64..0.99) {
        let (s, c, d) = jacobi_sn_cn_dn(u, m).unwrap();
        prop_assert!((s * s + c * c - 1.0).abs() < 1e-13);
        prop_assert!((d * d + m * s * s - 1.0).abs() < 1e-13);
        let k = complete_elliptic_k(m).unwrap();
        let (s4, c4, d4) = jacobi_sn_cn_dn(u + 4.0 * k, m).unwrap();
        prop_assert!((s - s4).abs() < 1e-11 && (c - c4).abs() < 1e-11 && (d - d4).abs() < 1e-11);
    }

    #[test]
    fn strip_function_bound_and_evenness(
        gen in admissible_generator(),
        re in -30.0f64..30.0,
        im in 0.0f64..3.1,
    ) {
        let w = Complex64::new(re, im);
        let s = s_fourier(&gen, w).unwrap();
        let s_neg = s_fourier(&gen, -w).unwrap();
        prop_assert!((s - s_neg).norm() <= 1e-12 * s.norm().max(1.0));
        prop_assert!(s.im.abs() <= 0.5 * im + 1e-12);
        let shifted = s_fourier(&gen, w + gen.period()).unwrap();
        prop_assert!((s - shifted).norm() <= 1e-10 * s.norm().max(1.0));
    }

    #[test]
    fn generated_functions_are_molnar(gen in admissible_generator(), lx in -7.0f64..7.0) {
        let rf = RepFun::from_generator(molnar::repfun::StripFunction::auto(gen.clone()).unwrap());
        let x = lx.exp();
        let c = gen.type_c();
        let fx = rf.eval_real(x).unwrap();
        prop_assert!(fx > 0.0);
        prop_assert!(((x * rf.eval_real(1.0 / x).unwrap() - fx) / fx).abs() < 1e-12);
        prop_assert!(((rf.eval_real(c * c * x).unwrap() - c * fx) / (c * fx)).abs() < 1e-10);
    }
}
