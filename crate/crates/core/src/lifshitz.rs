//! Casimir-Polder free energy of an atom above graphene as a Lifshitz sum over
//! Matsubara frequencies:
//!
//! ```text
//! F(a, T) = -(kB T / 8 a^3) sum'_l alpha(i zeta_l omega_c)
//!           * int_{zeta_l}^inf dy e^-y [2 y^2 r_TM - zeta_l^2 (r_TM + r_TE)]
//! ```
//!
//! where the prime halves the `l = 0` term. The `T = 0` energy replaces the
//! sum by the frequency integral `kB T sum'_l -> (hbar c / 4 pi a) int d zeta`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::atoms::OscillatorAtom;
use crate::error::{domain, Error, Result};
use crate::quadrature::{integrate_semi_infinite, integrate_semi_infinite_with_companion, QuadratureSpec};
use crate::reflection::{
    dirac_finite_t_coefficients, dirac_zero_t_coefficients, hydro_coefficients, HydrodynamicParams, ReflectionPair,
};
use crate::response::{DiracOperator, DiracParams, MatsubaraPoint};
use crate::units::{Geometry, BOLTZMANN, HBAR, SPEED_OF_LIGHT};

/// Which polarization operator the Dirac model uses at each Matsubara index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorMode {
    /// Finite-temperature operator at every `l`.
    #[serde(rename = "full")]
    FullFiniteT,
    /// Finite-temperature operator at `l = 0`, `T = 0` operator for `l >= 1`.
    Prescription,
    /// `T = 0` operator at every `l`.
    #[serde(rename = "zero-t")]
    ZeroTOperator,
}

impl OperatorMode {
    pub fn label(self) -> &'static str {
        match self {
            OperatorMode::FullFiniteT => "full",
            OperatorMode::Prescription => "prescription",
            OperatorMode::ZeroTOperator => "zero-t",
        }
    }

    fn finite_t_at(self, l: usize) -> bool {
        match self {
            OperatorMode::FullFiniteT => true,
            OperatorMode::Prescription => l == 0,
            OperatorMode::ZeroTOperator => false,
        }
    }
}

impl fmt::Display for OperatorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for OperatorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "full" | "full-finite-t" => Ok(OperatorMode::FullFiniteT),
            "prescription" => Ok(OperatorMode::Prescription),
            "zero-t" | "zero_t" | "zerot" => Ok(OperatorMode::ZeroTOperator),
            other => Err(Error::Config(format!(
                "unknown operator mode `{other}` (expected full, prescription or zero-t)"
            ))),
        }
    }
}

/// Graphene model: hydrodynamic, or Dirac with an operator mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelSpec {
    Hydrodynamic(HydrodynamicParams),
    Dirac { params: DiracParams, mode: OperatorMode },
}

impl ModelSpec {
    pub fn hydrodynamic() -> Self {
        ModelSpec::Hydrodynamic(HydrodynamicParams::default())
    }

    pub fn dirac(delta_ev: f64, mode: OperatorMode) -> Result<Self> {
        Ok(ModelSpec::Dirac {
            params: DiracParams::with_gap(delta_ev)?,
            mode,
        })
    }

    /// Short human-readable descriptor, e.g. `dirac/prescription/delta=0.01eV`.
    pub fn describe(&self) -> String {
        match self {
            ModelSpec::Hydrodynamic(h) => format!("hydrodynamic/K={:e}", h.wavenumber),
            ModelSpec::Dirac { params, mode } => {
                format!("dirac/{mode}/delta={}eV/vf={:e}", params.delta_ev, params.vf_ratio)
            }
        }
    }
}

/// Tolerances and limits for a free-energy evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    /// Relative size below which Matsubara terms (and the tail estimate) stop the sum.
    pub matsubara_tol: f64,
    /// Polarization-tensor `x` quadrature.
    pub x_quadrature: QuadratureSpec,
    /// `y` (and `zeta`) quadrature.
    pub y_quadrature: QuadratureSpec,
    pub max_terms: usize,
    pub keep_breakdown: bool,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            matsubara_tol: 1e-6,
            x_quadrature: QuadratureSpec::with_rel_tol(1e-8),
            y_quadrature: QuadratureSpec::with_rel_tol(1e-9),
            max_terms: 10_000,
            keep_breakdown: false,
        }
    }
}

impl Settings {
    /// All tolerances derived from one free-energy target.
    pub fn with_tolerance(tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol < 1.0) {
            return domain(format!("tolerance must lie in (0, 1), got {tol}"));
        }
        Ok(Settings {
            matsubara_tol: tol,
            x_quadrature: QuadratureSpec::with_rel_tol(tol * 1e-2),
            y_quadrature: QuadratureSpec::with_rel_tol(tol * 1e-3),
            ..Default::default()
        })
    }

    /// Every tolerance multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut s = *self;
        s.matsubara_tol *= factor;
        s.x_quadrature.rel_tol *= factor;
        s.y_quadrature.rel_tol *= factor;
        s
    }

    fn validate(&self) -> Result<()> {
        if !(self.matsubara_tol > 0.0 && self.matsubara_tol < 1.0) {
            return domain(format!("Matsubara tolerance must lie in (0, 1), got {}", self.matsubara_tol));
        }
        if self.max_terms < 4 {
            return domain("max_terms must be at least 4");
        }
        self.x_quadrature.validate()?;
        self.y_quadrature.validate()
    }
}

/// One Matsubara contribution, J.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatsubaraTerm {
    pub l: usize,
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreeEnergyResult {
    /// J; negative for attraction.
    pub free_energy: f64,
    /// `a^4 |F|`, J m^4.
    pub a4_f_abs: f64,
    pub terms_used: usize,
    /// Estimated relative size of the neglected Matsubara tail.
    pub truncation_error_estimate: f64,
    /// Absolute error bound on `free_energy` (quadrature plus truncation), J.
    pub error_estimate: f64,
    pub per_term_breakdown: Option<Vec<MatsubaraTerm>>,
}

/// Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Everything about the model that depends on the separation.
enum Surface {
    Hydro { k_tilde: f64 },
    Dirac { op: DiracOperator, mode: OperatorMode },
}

impl Surface {
    fn new(model: &ModelSpec, geom: &Geometry) -> Surface {
        match model {
            ModelSpec::Hydrodynamic(h) => Surface::Hydro {
                k_tilde: geom.dimensionless_wavenumber(h.wavenumber),
            },
            ModelSpec::Dirac { params, mode } => Surface::Dirac {
                op: DiracOperator::new(params, geom),
                mode: *mode,
            },
        }
    }

    /// Coefficients with temperature-independent response, at continuous `zeta`.
    fn zero_t(&self, zeta: f64, y: f64) -> Result<ReflectionPair> {
        match self {
            Surface::Hydro { k_tilde } => hydro_coefficients(zeta, y, *k_tilde),
            Surface::Dirac { op, .. } => dirac_zero_t_coefficients(zeta, y, op),
        }
    }
}

/// `e^-y [2 y^2 r_TM - zeta^2 (r_TM + r_TE)]`.
fn bracket(zeta: f64, y: f64, r: ReflectionPair) -> f64 {
    (-y).exp() * (2.0 * y * y * r.r_tm - zeta * zeta * (r.r_tm + r.r_te))
}

/// `int_zeta^inf` of [`bracket`] and its error bound. The propagated
/// coefficient errors are integrated on the same nodes as the bracket.
fn y_integral<R>(zeta: f64, spec: &QuadratureSpec, mut coefficients: R) -> Result<(f64, f64)>
where
    R: FnMut(f64) -> Result<(ReflectionPair, [f64; 2])>,
{
    let mut failure = None;
    let (est, coeff_err) = integrate_semi_infinite_with_companion(
        |y| match coefficients(y) {
            // zeta <= y, so the bracket is below 4 y^2; f would underflow
            _ if y < 1e-100 => [0.0; 2],
            Ok((r, err)) => {
                // |r| <= 1 caps any coefficient error at 2
                let (e_tm, e_te) = (err[0].min(2.0), err[1].min(2.0));
                let e = (-y).exp() * (2.0 * y * y * e_tm + zeta * zeta * (e_tm + e_te));
                [bracket(zeta, y, r), e]
            }
            Err(e) => {
                failure.get_or_insert(e);
                [0.0; 2]
            }
        },
        zeta,
        spec,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((est.value, est.error + coeff_err))
}

/// The `y` integral of term `l` (dimensionless) and its error bound.
fn term_integral(l: usize, tau: f64, surface: &Surface, settings: &Settings) -> Result<(f64, f64)> {
    let zeta = tau * l as f64;
    match surface {
        Surface::Dirac { op, mode } if mode.finite_t_at(l) => {
            let point = MatsubaraPoint::new(l, tau)?;
            y_integral(zeta, &settings.y_quadrature, |y| {
                dirac_finite_t_coefficients(&point, y, op, &settings.x_quadrature)
            })
        }
        _ => y_integral(zeta, &settings.y_quadrature, |y| Ok((surface.zero_t(zeta, y)?, [0.0; 2]))),
    }
}

fn check_temperature(geom: &Geometry) -> Result<()> {
    if !(geom.temperature() > 0.0) {
        return domain("the Matsubara sum needs T > 0; use zero_t_energy at T = 0");
    }
    Ok(())
}

fn term_in_joules(l: usize, geom: &Geometry, atom: &OscillatorAtom, surface: &Surface, settings: &Settings) -> Result<MatsubaraTerm> {
    let tau = geom.dimensionless_temperature();
    let zeta = tau * l as f64;
    let polarizability = atom.dynamic_polarizability(zeta, geom.characteristic_frequency())?;
    let a = geom.separation();
    let weight = if l == 0 { 0.5 } else { 1.0 };
    let prefactor = -BOLTZMANN * geom.temperature() / (8.0 * a * a * a) * weight * polarizability;
    let (integral, error) = term_integral(l, tau, surface, settings)?;
    Ok(MatsubaraTerm {
        l,
        value: prefactor * integral,
        error: (prefactor * error).abs(),
    })
}

/// Term `l` of the Matsubara sum (including the half weight at `l = 0`), J.
pub fn matsubara_term(
    l: usize,
    geom: &Geometry,
    atom: &OscillatorAtom,
    model: &ModelSpec,
    settings: &Settings,
) -> Result<MatsubaraTerm> {
    check_temperature(geom)?;
    settings.validate()?;
    term_in_joules(l, geom, atom, &Surface::new(model, geom), settings)
}

/// Terms evaluated per parallel batch. Fixed so the work done never depends on
/// the thread count.
const BATCH: usize = 16;

/// Free energy by the Matsubara sum.
///
/// Terms are added in ascending `l` with compensated summation. The sum stops
/// once three consecutive terms are each below `matsubara_tol * |S|` and the
/// geometric tail estimate `t r / (1 - r)` (with `r` the ratio of the last two
/// terms) is below the same bound.
pub fn free_energy(geom: &Geometry, atom: &OscillatorAtom, model: &ModelSpec, settings: &Settings) -> Result<FreeEnergyResult> {
    check_temperature(geom)?;
    settings.validate()?;
    let surface = Surface::new(model, geom);
    let tol = settings.matsubara_tol;

    let mut sum = CompensatedSum::default();
    let mut quad_error = 0.0;
    let mut terms: Vec<MatsubaraTerm> = Vec::new();
    let mut small_run = 0;
    let mut start = 0;
    while start < settings.max_terms {
        let end = (start + BATCH).min(settings.max_terms);
        let batch: Vec<Result<MatsubaraTerm>> = (start..end)
            .into_par_iter()
            .map(|l| term_in_joules(l, geom, atom, &surface, settings))
            .collect();
        for term in batch {
            let term = term?;
            sum.add(term.value);
            quad_error += term.error;
            let s = sum.value().abs();
            small_run = if term.value.abs() < tol * s { small_run + 1 } else { 0 };
            let tail = match terms.last() {
                Some(prev) if prev.value != 0.0 => {
                    let r = (term.value / prev.value).abs();
                    if r < 1.0 {
                        term.value.abs() * r / (1.0 - r)
                    } else {
                        f64::INFINITY
                    }
                }
                _ => f64::INFINITY,
            };
            terms.push(term);
            if (small_run >= 3 && tail < tol * s) || (term.value == 0.0 && small_run >= 3) {
                let free_energy = sum.value();
                let tail = if tail.is_finite() { tail } else { 0.0 };
                let a = geom.separation();
                return Ok(FreeEnergyResult {
                    free_energy,
                    a4_f_abs: a.powi(4) * free_energy.abs(),
                    terms_used: terms.len(),
                    truncation_error_estimate: tail / free_energy.abs(),
                    error_estimate: quad_error + tail,
                    per_term_breakdown: settings.keep_breakdown.then_some(terms),
                });
            }
        }
        start = end;
    }
    Err(Error::MatsubaraTruncation {
        terms: terms.len(),
        partial_sum: sum.value(),
    })
}

/// `(F_full - F_prescription) / F_full` for a Dirac gap parameter.
pub fn free_energy_mode_delta(
    geom: &Geometry,
    atom: &OscillatorAtom,
    params: &DiracParams,
    settings: &Settings,
) -> Result<f64> {
    let full = free_energy(geom, atom, &ModelSpec::Dirac { params: *params, mode: OperatorMode::FullFiniteT }, settings)?;
    let presc = free_energy(geom, atom, &ModelSpec::Dirac { params: *params, mode: OperatorMode::Prescription }, settings)?;
    Ok((full.free_energy - presc.free_energy) / full.free_energy)
}

/// Energy at `T = 0`, J:
/// `E = -(hbar c / 32 pi a^4) int_0^inf d zeta alpha(i zeta omega_c) int_zeta^inf dy e^-y [...]`,
/// with the `T = 0` Dirac operator (whatever the mode) or the hydrodynamic
/// coefficients. The temperature of `geom` is ignored.
pub fn zero_t_energy(geom: &Geometry, atom: &OscillatorAtom, model: &ModelSpec, settings: &Settings) -> Result<FreeEnergyResult> {
    settings.validate()?;
    let surface = Surface::new(model, geom);
    let omega_c = geom.characteristic_frequency();
    let spec = &settings.y_quadrature;
    let mut failure = None;
    let mut inner_error: f64 = 0.0;
    let outer = integrate_semi_infinite(
        |zeta| {
            let inner = atom
                .dynamic_polarizability(zeta, omega_c)
                .and_then(|pol| y_integral(zeta, spec, |y| Ok((surface.zero_t(zeta, y)?, [0.0; 2]))).map(|v| (pol, v)));
            match inner {
                Ok((pol, (value, error))) => {
                    if value != 0.0 {
                        inner_error = inner_error.max(error / value.abs());
                    }
                    pol * value
                }
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        0.0,
        spec,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let a = geom.separation();
    let prefactor = -HBAR * SPEED_OF_LIGHT / (32.0 * PI * a.powi(4));
    let energy = prefactor * outer.value;
    Ok(FreeEnergyResult {
        free_energy: energy,
        a4_f_abs: a.powi(4) * energy.abs(),
        terms_used: 0,
        truncation_error_estimate: 0.0,
        error_estimate: (prefactor * outer.error).abs() + inner_error * energy.abs(),
        per_term_breakdown: None,
    })
}

/// Relative thermal correction `(F(a, T) - E(a)) / E(a)`, with `F` in the
/// model's own operator mode.
pub fn thermal_correction(geom: &Geometry, atom: &OscillatorAtom, model: &ModelSpec, settings: &Settings) -> Result<f64> {
    let f = free_energy(geom, atom, model, settings)?.free_energy;
    let e = zero_t_energy(geom, atom, model, settings)?.free_energy;
    Ok((f - e) / e)
}
