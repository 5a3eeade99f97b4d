//! Polarization tensor of gapped Dirac quasiparticles in graphene, in the
//! dimensionless variables `(zeta, y)` at zero chemical potential.
//!
//! At nonzero temperature each component is the `T = 0` value plus a thermal
//! integral over the Feynman parameter `x`:
//!
//! ```text
//! Pi00 = 8 al (y^2 - zeta^2) I1 + 8 al / vF^2 * int_0^1 h00(x) dx
//! Pitr = 8 al (y^2 + f)      I1 + 8 al / vF^2 * int_0^1 htr(x) dx
//! ```
//!
//! with `I1 = int_0^1 x(1-x) / sqrt(Dt^2 + x(1-x) f) dx = Phi00 / (8 f)`. The
//! first terms are evaluated through the closed form of `Phi00`; only the
//! thermal parts go through quadrature. Every thermal term carries a factor
//! `e^(-g)`, so the `x` range is cut where `g` exceeds [`THERMAL_CUTOFF`], and
//! the integrand is symmetric under `x -> 1 - x`, so only `[0, 1/2]` is
//! integrated.

use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::quadrature::{integrate_pieces_vec, QuadratureSpec};
use crate::units::{Geometry, FINE_STRUCTURE};

/// Fermi velocity over the speed of light used when none is given.
pub const DEFAULT_VF_RATIO: f64 = 1.0 / 300.0;

/// Gap above which the model is outside its physically motivated range, eV.
pub const GAP_SOFT_LIMIT_EV: f64 = 0.1;

/// Thermal terms are dropped where `g` exceeds this (`e^-60 ~ 1e-26`).
pub const THERMAL_CUTOFF: f64 = 60.0;

/// Physical Dirac-model parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiracParams {
    /// Gap parameter, eV.
    pub delta_ev: f64,
    /// `v_F / c`.
    pub vf_ratio: f64,
    mu: f64,
}

impl DiracParams {
    pub fn new(delta_ev: f64, vf_ratio: f64) -> Result<Self> {
        if !(delta_ev >= 0.0 && delta_ev.is_finite()) {
            return domain(format!("gap must be >= 0 eV, got {delta_ev}"));
        }
        if !(vf_ratio > 0.0 && vf_ratio < 1.0) {
            return domain(format!("Fermi velocity ratio must lie in (0, 1), got {vf_ratio}"));
        }
        if delta_ev > GAP_SOFT_LIMIT_EV {
            log::warn!("gap {delta_ev} eV exceeds the {GAP_SOFT_LIMIT_EV} eV upper estimate for graphene");
        }
        Ok(DiracParams {
            delta_ev,
            vf_ratio,
            mu: 0.0,
        })
    }

    pub fn with_gap(delta_ev: f64) -> Result<Self> {
        DiracParams::new(delta_ev, DEFAULT_VF_RATIO)
    }

    /// Only `mu = 0` is supported.
    pub fn with_chemical_potential(self, mu: f64) -> Result<Self> {
        if mu != 0.0 {
            return domain(format!("only zero chemical potential is supported, got {mu}"));
        }
        Ok(DiracParams { mu, ..self })
    }

    pub fn chemical_potential(&self) -> f64 {
        self.mu
    }

    pub fn exceeds_soft_gap_limit(&self) -> bool {
        self.delta_ev > GAP_SOFT_LIMIT_EV
    }
}

/// `Delta / (hbar omega_c)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct DimensionlessGap(pub f64);

impl DimensionlessGap {
    pub fn new(delta_ev: f64, geom: &Geometry) -> Self {
        DimensionlessGap(geom.dimensionless_gap(delta_ev))
    }
}

/// The Dirac model at one separation, in dimensionless form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiracOperator {
    pub delta_tilde: f64,
    pub vf_ratio: f64,
    /// Coupling constant; the fine-structure constant unless overridden.
    pub alpha: f64,
}

impl DiracOperator {
    pub fn new(params: &DiracParams, geom: &Geometry) -> Self {
        DiracOperator {
            delta_tilde: DimensionlessGap::new(params.delta_ev, geom).0,
            vf_ratio: params.vf_ratio,
            alpha: FINE_STRUCTURE,
        }
    }

    pub fn dimensionless(delta_tilde: f64, vf_ratio: f64) -> Self {
        DiracOperator {
            delta_tilde,
            vf_ratio,
            alpha: FINE_STRUCTURE,
        }
    }

    pub fn f(&self, zeta: f64, y: f64) -> f64 {
        aux_f(zeta, y, self.vf_ratio)
    }
}

/// One Matsubara term: index, `zeta_l = l tau`, and `tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatsubaraPoint {
    pub l: usize,
    pub zeta: f64,
    pub tau: f64,
}

impl MatsubaraPoint {
    pub fn new(l: usize, tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return domain(format!("finite-temperature operator needs tau > 0, got {tau}"));
        }
        Ok(MatsubaraPoint {
            l,
            zeta: tau * l as f64,
            tau,
        })
    }
}

/// Both polarization-tensor components at one `(zeta, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polarization {
    pub pi00: f64,
    pub pitr: f64,
    /// Quadrature error bound on each component (zero for closed forms).
    pub error: [f64; 2],
}

/// `f = vF^2 y^2 + (1 - vF^2) zeta^2`.
#[inline]
pub fn aux_f(zeta: f64, y: f64, vf_ratio: f64) -> f64 {
    let v2 = vf_ratio * vf_ratio;
    v2 * y * y + (1.0 - v2) * zeta * zeta
}

/// `g = (2 pi / tau) sqrt(Dt^2 + x(1-x) f)`.
pub fn aux_g(tau: f64, zeta: f64, y: f64, x: f64, delta_tilde: f64, vf_ratio: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return domain("g is undefined at tau = 0; use the zero-temperature operator");
    }
    if !(0.0..=1.0).contains(&x) {
        return domain(format!("x must lie in [0, 1], got {x}"));
    }
    let f = aux_f(zeta, y, vf_ratio);
    Ok(2.0 * PI / tau * (delta_tilde * delta_tilde + x * (1.0 - x) * f).sqrt())
}

fn check_cone(zeta: f64, y: f64) -> Result<f64> {
    if !(zeta >= 0.0 && y.is_finite()) {
        return domain(format!("need zeta >= 0 and finite y, got zeta={zeta}, y={y}"));
    }
    // tolerate rounding when y was produced as zeta + tiny
    if y < zeta * (1.0 - 1e-14) {
        return domain(format!("need y >= zeta, got y={y} < zeta={zeta}"));
    }
    Ok(y.max(zeta))
}

/// Series of `Phi00` in `s = sqrt(f) / (2 Dt)` for small `s`:
/// `4 Dt sum_k (-1)^k (4k+4) / ((2k+1)(2k+3)) s^(2k+2)`.
fn phi00_small_ratio(delta_tilde: f64, s: f64) -> f64 {
    let s2 = s * s;
    let mut power = s2;
    let mut sum = 0.0;
    for k in 0..24 {
        let kf = k as f64;
        let c = (4.0 * kf + 4.0) / ((2.0 * kf + 1.0) * (2.0 * kf + 3.0));
        let term = c * power;
        sum += if k % 2 == 0 { term } else { -term };
        if term < 1e-18 * sum.abs() {
            break;
        }
        power *= s2;
    }
    4.0 * delta_tilde * sum
}

/// `Phi00 = 4 Dt + 2 sqrt(f) (1 - 4 Dt^2 / f) arctan(sqrt(f) / (2 Dt))`.
///
/// Continuous at `Dt -> 0` (`pi sqrt(f)`), and switched to its power series
/// when the gap dominates to avoid cancelling `4 Dt` against the arctan term.
pub fn phi00(zeta: f64, y: f64, delta_tilde: f64, vf_ratio: f64) -> Result<f64> {
    let y = check_cone(zeta, y)?;
    if !(delta_tilde >= 0.0) {
        return domain(format!("gap must be >= 0, got {delta_tilde}"));
    }
    let f = aux_f(zeta, y, vf_ratio);
    if f <= 0.0 {
        if delta_tilde > 0.0 {
            return Ok(0.0);
        }
        return domain("Phi00 is undefined at zeta = y = 0 without a gap");
    }
    let root = f.sqrt();
    if delta_tilde == 0.0 {
        return Ok(PI * root);
    }
    let s = root / (2.0 * delta_tilde);
    if s < 0.2 {
        return Ok(phi00_small_ratio(delta_tilde, s));
    }
    Ok(4.0 * delta_tilde + 2.0 * root * (1.0 - 4.0 * delta_tilde * delta_tilde / f) * s.atan())
}

fn zero_t_parts(zeta: f64, y: f64, op: &DiracOperator) -> Result<(f64, f64, f64)> {
    let y = check_cone(zeta, y)?;
    let f = op.f(zeta, y);
    if !(f > 0.0) {
        return domain("zero-temperature polarization tensor needs f > 0 (y > 0)");
    }
    let phi = phi00(zeta, y, op.delta_tilde, op.vf_ratio)?;
    let d = (y - zeta) * (y + zeta);
    Ok((op.alpha * d / f * phi, op.alpha * (y * y + f) / f * phi, phi))
}

/// `Pi00 = al (y^2 - zeta^2) / f * Phi00` at `T = 0`.
pub fn pi00_zero_t(zeta: f64, y: f64, op: &DiracOperator) -> Result<f64> {
    Ok(zero_t_parts(zeta, y, op)?.0)
}

/// `Pitr = al (y^2 + f) / f * Phi00` at `T = 0`.
pub fn pitr_zero_t(zeta: f64, y: f64, op: &DiracOperator) -> Result<f64> {
    Ok(zero_t_parts(zeta, y, op)?.1)
}

pub fn polarization_zero_t(zeta: f64, y: f64, op: &DiracOperator) -> Result<Polarization> {
    let (pi00, pitr, _) = zero_t_parts(zeta, y, op)?;
    Ok(Polarization {
        pi00,
        pitr,
        error: [0.0; 2],
    })
}

/// Thermal integrands `[h00(x), htr(x)]` (without the `8 al / vF^2` prefactor).
///
/// Written in terms of `e^-g` only, so nothing overflows as `g` grows:
/// `sin/(cosh g + cos) = 2 e sin / (1 + 2 e cos + e^2)` and likewise for the
/// cosine fraction; the logarithm is `ln1p(2 e cos + e^2)`.
pub fn thermal_integrand(point: &MatsubaraPoint, y: f64, op: &DiracOperator, x: f64) -> [f64; 2] {
    let MatsubaraPoint { l, zeta, tau } = *point;
    let v2 = op.vf_ratio * op.vf_ratio;
    let f = aux_f(zeta, y, op.vf_ratio);
    let xx = x * (1.0 - x);
    let dt2 = op.delta_tilde * op.delta_tilde;
    let root = (dt2 + xx * f).sqrt();
    let g = 2.0 * PI / tau * root;
    let e = (-g).exp();
    let (sin, cos) = if l == 0 {
        (0.0, 1.0)
    } else {
        (2.0 * PI * l as f64 * x).sin_cos()
    };
    let den = 1.0 + 2.0 * cos * e + e * e;
    let log_term = tau / (2.0 * PI) * (2.0 * cos * e + e * e).ln_1p();
    let sin_frac = 2.0 * e * sin / den;
    let cos_frac = 2.0 * e * (cos + e) / den;
    let odd = (1.0 - 2.0 * x) * sin_frac;
    let (w00, wtr) = if root > 0.0 {
        (
            (dt2 + zeta * zeta * xx) / root,
            (dt2 + xx * ((1.0 - v2) * (1.0 - v2) * zeta * zeta - v2 * v2 * y * y)) / root,
        )
    } else {
        (0.0, 0.0)
    };
    [
        log_term - 0.5 * zeta * odd + w00 * cos_frac,
        log_term - 0.5 * zeta * (1.0 - 2.0 * v2) * odd + wtr * cos_frac,
    ]
}

/// Upper end of the `x` range (within `[0, 1/2]`) where `g <= THERMAL_CUTOFF`;
/// `None` when the thermal terms vanish everywhere.
fn thermal_window(point: &MatsubaraPoint, f: f64, delta_tilde: f64) -> Option<f64> {
    let gmax = THERMAL_CUTOFF * point.tau / (2.0 * PI);
    let q = (gmax * gmax - delta_tilde * delta_tilde) / f;
    if !(q > 0.0) {
        return None;
    }
    if q >= 0.25 {
        return Some(0.5);
    }
    // smaller root of x(1-x) = q
    Some(2.0 * q / (1.0 + (1.0 - 4.0 * q).sqrt()))
}

/// Both components at nonzero temperature, sharing one thermal quadrature.
pub fn polarization_finite_t(
    point: &MatsubaraPoint,
    y: f64,
    op: &DiracOperator,
    spec: &QuadratureSpec,
) -> Result<Polarization> {
    let y = check_cone(point.zeta, y)?;
    let zero = polarization_zero_t(point.zeta, y, op)?;
    let f = op.f(point.zeta, y);
    let Some(x_end) = thermal_window(point, f, op.delta_tilde) else {
        return Ok(zero);
    };

    // Break at the half periods of cos(2 pi l x) inside the window.
    let mut breaks = vec![0.0];
    if point.l > 0 {
        let step = 0.5 / point.l as f64;
        let mut k = 1;
        while (k as f64) * step < x_end {
            breaks.push(k as f64 * step);
            k += 1;
        }
    }
    breaks.push(x_end);

    // Both halves of [0, 1] contribute equally.
    let prefactor = 2.0 * 8.0 * op.alpha / (op.vf_ratio * op.vf_ratio);
    // The bracket terms are of size tau and cancel near y = zeta, so the
    // attainable absolute accuracy is a few ulps of tau.
    let floor = 64.0 * f64::EPSILON * point.tau;
    let abs_tol = [
        (spec.rel_tol * zero.pi00.abs() / prefactor).max(floor),
        (spec.rel_tol * zero.pitr.abs() / prefactor).max(floor),
    ];
    let est = integrate_pieces_vec(|x| thermal_integrand(point, y, op, x), &breaks, spec, abs_tol)?;
    Ok(Polarization {
        pi00: zero.pi00 + prefactor * est.value[0],
        pitr: zero.pitr + prefactor * est.value[1],
        error: [prefactor * est.error[0], prefactor * est.error[1]],
    })
}

pub fn pi00_finite_t(point: &MatsubaraPoint, y: f64, op: &DiracOperator, spec: &QuadratureSpec) -> Result<f64> {
    Ok(polarization_finite_t(point, y, op, spec)?.pi00)
}

pub fn pitr_finite_t(point: &MatsubaraPoint, y: f64, op: &DiracOperator, spec: &QuadratureSpec) -> Result<f64> {
    Ok(polarization_finite_t(point, y, op, spec)?.pitr)
}
