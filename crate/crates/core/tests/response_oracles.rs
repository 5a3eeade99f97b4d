//! Polarization tensor against independent brute-force evaluations.

use std::f64::consts::PI;

use graphene_cp::quadrature::{integrate_pieces, integrate_unit_interval, QuadratureSpec};
use graphene_cp::response::{
    aux_f, phi00, pi00_zero_t, pitr_zero_t, polarization_finite_t, polarization_zero_t, thermal_integrand,
    DiracOperator, MatsubaraPoint, DEFAULT_VF_RATIO,
};
use proptest::prelude::*;

const VF: f64 = DEFAULT_VF_RATIO;
const ALPHA: f64 = 7.2973525693e-3;

/// Midpoint rule in `theta` after `x = sin^2(theta / 2)`, which smooths the
/// `sqrt(x(1-x))` endpoint behaviour.
fn brute_unit<F: Fn(f64) -> f64>(f: F, n: usize) -> f64 {
    let h = PI / n as f64;
    let mut sum = 0.0;
    let mut comp = 0.0;
    for i in 0..n {
        let th = (i as f64 + 0.5) * h;
        let x = (th / 2.0).sin().powi(2);
        let term = f(x) * th.sin() / 2.0 - comp;
        let t = sum + term;
        comp = (t - sum) - term;
        sum = t;
    }
    sum * h
}

/// The full finite-temperature expressions written out literally with cosh.
fn brute_polarization(l: usize, tau: f64, y: f64, dt: f64, vf: f64) -> (f64, f64) {
    let zeta = tau * l as f64;
    let v2 = vf * vf;
    let f = v2 * y * y + (1.0 - v2) * zeta * zeta;
    let first = brute_unit(|x| x * (1.0 - x) / (dt * dt + x * (1.0 - x) * f).sqrt(), 1_000_000);
    let bracket = |x: f64, tr: bool| {
        let xx = x * (1.0 - x);
        let root = (dt * dt + xx * f).sqrt();
        let g = 2.0 * PI / tau * root;
        let c = (2.0 * PI * l as f64 * x).cos();
        let s = (2.0 * PI * l as f64 * x).sin();
        let log = tau / (2.0 * PI) * (1.0 + 2.0 * c * (-g).exp() + (-2.0 * g).exp()).ln();
        let sin_coef = if tr { zeta * (1.0 - 2.0 * v2) / 2.0 } else { zeta / 2.0 };
        let num = if tr {
            dt * dt + xx * ((1.0 - v2).powi(2) * zeta * zeta - v2 * v2 * y * y)
        } else {
            dt * dt + zeta * zeta * xx
        };
        let weight = if root > 0.0 { num / root } else { 0.0 };
        log - sin_coef * (1.0 - 2.0 * x) * s / (g.cosh() + c) + weight * (c + (-g).exp()) / (g.cosh() + c)
    };
    let th00 = brute_unit(|x| bracket(x, false), 1_000_000);
    let thtr = brute_unit(|x| bracket(x, true), 1_000_000);
    (
        8.0 * ALPHA * (y * y - zeta * zeta) * first + 8.0 * ALPHA / v2 * th00,
        8.0 * ALPHA * (y * y + f) * first + 8.0 * ALPHA / v2 * thtr,
    )
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn finite_t_matches_brute_force() {
    let spec = QuadratureSpec::default();
    // (l, tau, y, Dt)
    let cases = [
        (0, 0.49, 1.0, 0.0),
        (0, 0.49, 3.0, 0.2),
        (1, 0.147, 0.5, 0.0),
        (1, 0.49, 0.8, 0.0),
        (1, 0.49, 2.5, 0.05),
        (3, 0.3, 1.5, 0.0),
        (2, 1.2, 4.0, 0.01),
    ];
    for (l, tau, y, dt) in cases {
        let point = MatsubaraPoint::new(l, tau).unwrap();
        let op = DiracOperator::dimensionless(dt, VF);
        let got = polarization_finite_t(&point, y, &op, &spec).unwrap();
        let (p00, ptr) = brute_polarization(l, tau, y, dt, VF);
        assert!(rel(got.pi00, p00) < 1e-7, "Pi00 l={l} tau={tau} y={y}: {} vs {p00}", got.pi00);
        assert!(rel(got.pitr, ptr) < 1e-7, "Pitr l={l} tau={tau} y={y}: {} vs {ptr}", got.pitr);
        assert!(got.pi00 >= 0.0);
    }
}

#[test]
fn static_gapless_term_matches_simplified_form() {
    // l = 0, Dt = 0: only the logarithm survives in the thermal part, and the
    // first term integrates to al pi y / vF.
    let spec = QuadratureSpec::default();
    for (tau, y) in [(0.05, 0.7), (0.49, 1.0), (2.0, 5.0)] {
        let simplified = ALPHA * PI * y / VF
            + 8.0 * ALPHA / (VF * VF) * tau / PI
                * brute_unit(|x| (-(2.0 * PI / tau) * VF * y * (x * (1.0 - x)).sqrt()).exp().ln_1p(), 1_000_000);
        let point = MatsubaraPoint::new(0, tau).unwrap();
        let got = polarization_finite_t(&point, y, &DiracOperator::dimensionless(0.0, VF), &spec).unwrap();
        assert!(rel(got.pi00, simplified) < 1e-7, "{} vs {simplified}", got.pi00);
    }
}

#[test]
fn light_speed_trace_first_term() {
    let op = DiracOperator::dimensionless(0.0, 1.0);
    for y in [0.3, 1.0, 7.5] {
        let got = pitr_zero_t(0.0, y, &op).unwrap();
        assert!(rel(got, 2.0 * PI * ALPHA * y) < 1e-14);
    }
}

#[test]
fn gapless_static_zero_t_value() {
    let op = DiracOperator::dimensionless(0.0, VF);
    for y in [0.1, 1.0, 30.0] {
        assert!(rel(pi00_zero_t(0.0, y, &op).unwrap(), ALPHA * PI * y / VF) < 1e-13);
    }
}

#[test]
fn zero_t_operator_matches_integral_form() {
    for (zeta, y, dt) in [(0.0, 1.0, 0.0), (0.3, 0.9, 0.02), (1.5, 2.0, 1.0), (4.0, 40.0, 0.001)] {
        let op = DiracOperator::dimensionless(dt, VF);
        let f = aux_f(zeta, y, VF);
        let integral = brute_unit(|x| x * (1.0 - x) / (dt * dt + x * (1.0 - x) * f).sqrt(), 1_000_000);
        let p00 = 8.0 * ALPHA * (y * y - zeta * zeta) * integral;
        let ptr = 8.0 * ALPHA * (y * y + f) * integral;
        if p00 > 0.0 {
            assert!(rel(pi00_zero_t(zeta, y, &op).unwrap(), p00) < 1e-9);
        }
        assert!(rel(pitr_zero_t(zeta, y, &op).unwrap(), ptr) < 1e-9);
    }
}

#[test]
fn approaches_zero_t_as_temperature_falls() {
    let spec = QuadratureSpec::default();
    let zeta = 0.5;
    for (l, y) in [(50, 0.8), (100, 0.8), (200, 2.0)] {
        let tau = zeta / l as f64;
        assert!(tau <= 0.01);
        let point = MatsubaraPoint::new(l, tau).unwrap();
        let op = DiracOperator::dimensionless(0.0, VF);
        let finite = polarization_finite_t(&point, y, &op, &spec).unwrap();
        let zero = polarization_zero_t(point.zeta, y, &op).unwrap();
        assert!(rel(finite.pi00, zero.pi00) < 1e-3, "l={l}: {} vs {}", finite.pi00, zero.pi00);
    }
}

#[test]
fn linear_in_coupling() {
    let spec = QuadratureSpec::default();
    let point = MatsubaraPoint::new(1, 0.49).unwrap();
    let op = DiracOperator::dimensionless(0.01, VF);
    let doubled = DiracOperator { alpha: 2.0 * op.alpha, ..op };
    let a = polarization_finite_t(&point, 1.3, &op, &spec).unwrap();
    let b = polarization_finite_t(&point, 1.3, &doubled, &spec).unwrap();
    assert!(rel(b.pi00, 2.0 * a.pi00) < 1e-12);
    assert!(rel(b.pitr, 2.0 * a.pitr) < 1e-12);
}

#[test]
fn half_interval_doubled_matches_full_interval() {
    let spec = QuadratureSpec {
        abs_tol: 1e-15,
        ..QuadratureSpec::with_rel_tol(1e-10)
    };
    for (l, tau, y) in [(0, 0.49, 1.2), (1, 0.49, 0.7), (4, 0.4, 3.0)] {
        let point = MatsubaraPoint::new(l, tau).unwrap();
        let op = DiracOperator::dimensionless(0.0, VF);
        for comp in 0..2 {
            let full = integrate_unit_interval(|x| thermal_integrand(&point, y, &op, x)[comp], &spec, l).unwrap();
            let mut half_breaks: Vec<f64> = (0..=l.max(1)).map(|k| 0.5 * k as f64 / l.max(1) as f64).collect();
            half_breaks.dedup();
            let half = integrate_pieces(|x| thermal_integrand(&point, y, &op, x)[comp], &half_breaks, &spec).unwrap();
            assert!(
                (2.0 * half.value - full.value).abs() <= 1e-9 * full.value.abs() + 1e-14,
                "l={l} comp={comp}: {} vs {}",
                2.0 * half.value,
                full.value
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn phi00_matches_integral_form(
        zeta in 0.0f64..20.0,
        dy in 1e-3f64..30.0,
        log_ratio in -3.0f64..2.0,
        gapless in proptest::bool::weighted(0.25),
    ) {
        let y = zeta + dy;
        let f = aux_f(zeta, y, VF);
        let dt = if gapless { 0.0 } else { 10f64.powf(log_ratio) * f.sqrt() };
        let d = dt * dt / f;
        let oracle = 8.0 * f.sqrt() * brute_unit(|x| x * (1.0 - x) / (d + x * (1.0 - x)).sqrt(), 200_000);
        let got = phi00(zeta, y, dt, VF).unwrap();
        prop_assert!(rel(got, oracle) < 1e-8, "{} vs {}", got, oracle);
    }

    #[test]
    fn zero_t_decreases_with_gap(zeta in 0.0f64..5.0, dy in 1e-3f64..10.0, dt in 0.0f64..5.0, step in 1e-3f64..5.0) {
        let y = zeta + dy;
        let a = pi00_zero_t(zeta, y, &DiracOperator::dimensionless(dt, VF)).unwrap();
        let b = pi00_zero_t(zeta, y, &DiracOperator::dimensionless(dt + step, VF)).unwrap();
        prop_assert!(b < a);
    }
}
