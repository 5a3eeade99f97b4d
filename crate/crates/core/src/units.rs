//! Physical constants and the conversion from SI inputs to the dimensionless
//! variables used throughout the crate.
//!
//! Every quantity downstream of this module is expressed in units of the
//! characteristic frequency `omega_c = c / (2a)`: frequencies become `zeta`,
//! temperature becomes `tau`, the gap becomes `delta_tilde`.

use std::f64::consts::PI;

use crate::error::{domain, Result};

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// One electron-volt, J.
pub const ELECTRON_VOLT: f64 = 1.602_176_634e-19;
/// Fine-structure constant e^2 / (hbar c).
pub const FINE_STRUCTURE: f64 = 7.297_352_569_3e-3;
/// One atomic unit of polarizability, m^3 (the rounded conversion used for the atom table).
pub const AU_POLARIZABILITY: f64 = 1.482e-31;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub c: f64,
    pub kb: f64,
    pub ev: f64,
    pub alpha_fs: f64,
    pub au_polarizability: f64,
}

impl PhysicalConstants {
    pub const CODATA: PhysicalConstants = PhysicalConstants {
        hbar: HBAR,
        c: SPEED_OF_LIGHT,
        kb: BOLTZMANN,
        ev: ELECTRON_VOLT,
        alpha_fs: FINE_STRUCTURE,
        au_polarizability: AU_POLARIZABILITY,
    };
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA
    }
}

/// Atom-sheet separation and temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    separation: f64,
    temperature: f64,
}

impl Geometry {
    /// `separation` in m, `temperature` in K.
    pub fn new(separation: f64, temperature: f64) -> Result<Self> {
        if !(separation.is_finite() && separation > 0.0) {
            return domain(format!("separation must be positive, got {separation}"));
        }
        if !(temperature.is_finite() && temperature >= 0.0) {
            return domain(format!("temperature must be non-negative, got {temperature}"));
        }
        Ok(Geometry {
            separation,
            temperature,
        })
    }

    pub fn separation(&self) -> f64 {
        self.separation
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn with_temperature(&self, temperature: f64) -> Result<Self> {
        Geometry::new(self.separation, temperature)
    }

    /// `omega_c = c / (2a)` in rad/s.
    pub fn characteristic_frequency(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.separation)
    }

    /// `tau = 4 pi a kB T / (hbar c)`, the spacing of the dimensionless Matsubara frequencies.
    pub fn dimensionless_temperature(&self) -> f64 {
        4.0 * PI * self.separation * BOLTZMANN * self.temperature / (HBAR * SPEED_OF_LIGHT)
    }

    /// `zeta_l = l tau`.
    pub fn matsubara_zeta(&self, l: usize) -> f64 {
        self.dimensionless_temperature() * l as f64
    }

    /// `Delta / (hbar omega_c) = 2 a Delta / (hbar c)` for a gap given in eV.
    pub fn dimensionless_gap(&self, delta_ev: f64) -> f64 {
        2.0 * self.separation * delta_ev * ELECTRON_VOLT / (HBAR * SPEED_OF_LIGHT)
    }

    /// `2 a K` for a wave number in 1/m.
    pub fn dimensionless_wavenumber(&self, wavenumber: f64) -> f64 {
        2.0 * self.separation * wavenumber
    }
}

/// `omega_c` for a bare separation; fails on non-positive input.
pub fn characteristic_frequency(separation: f64) -> Result<f64> {
    Ok(Geometry::new(separation, 0.0)?.characteristic_frequency())
}

/// Photon energy in eV to angular frequency in rad/s.
pub fn ev_to_rad_per_s(energy_ev: f64) -> f64 {
    energy_ev * ELECTRON_VOLT / HBAR
}
