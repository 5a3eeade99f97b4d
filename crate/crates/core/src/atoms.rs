//! Single-oscillator atomic polarizabilities along the imaginary frequency axis.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::error::{domain, Error, Result};
use crate::units::{ev_to_rad_per_s, AU_POLARIZABILITY};

#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorAtom {
    pub name: String,
    /// Static polarizability, m^3.
    pub alpha0: f64,
    /// Characteristic absorption frequency, rad/s.
    pub omega0: f64,
}

impl OscillatorAtom {
    pub fn new(name: impl Into<String>, alpha0: f64, omega0: f64) -> Result<Self> {
        if !(alpha0 > 0.0 && alpha0.is_finite()) {
            return domain(format!("static polarizability must be positive, got {alpha0}"));
        }
        if !(omega0 > 0.0 && omega0.is_finite()) {
            return domain(format!("oscillator frequency must be positive, got {omega0}"));
        }
        Ok(OscillatorAtom {
            name: name.into(),
            alpha0,
            omega0,
        })
    }

    /// From the static polarizability in atomic units and the oscillator energy in eV.
    pub fn from_atomic_units(name: impl Into<String>, alpha0_au: f64, omega0_ev: f64) -> Result<Self> {
        OscillatorAtom::new(name, alpha0_au * AU_POLARIZABILITY, ev_to_rad_per_s(omega0_ev))
    }

    /// `alpha(i zeta omega_c) = alpha0 / (1 + (omega_c / omega0)^2 zeta^2)`, in m^3.
    pub fn dynamic_polarizability(&self, zeta: f64, omega_c: f64) -> Result<f64> {
        if !(zeta >= 0.0) {
            return domain(format!("dimensionless frequency must be >= 0, got {zeta}"));
        }
        if !(omega_c > 0.0) {
            return domain(format!("characteristic frequency must be positive, got {omega_c}"));
        }
        let ratio = omega_c / self.omega0 * zeta;
        Ok(self.alpha0 / (1.0 + ratio * ratio))
    }
}

/// Free-function form of [`OscillatorAtom::dynamic_polarizability`].
pub fn dynamic_polarizability(atom: &OscillatorAtom, zeta: f64, omega_c: f64) -> Result<f64> {
    atom.dynamic_polarizability(zeta, omega_c)
}

/// Parameters printed in atomic units / eV.
const BUILTIN: [(&str, f64, f64); 4] = [
    ("He*", 315.63, 1.18),
    ("Na", 162.68, 2.14),
    ("Rb", 319.9, 5.46),
    ("Cs", 403.6, 1.55),
];

/// Name lookup over the built-in atoms plus any loaded from a definition file.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomTable {
    atoms: BTreeMap<String, OscillatorAtom>,
}

fn key(name: &str) -> String {
    name.trim().to_ascii_lowercase()
}

impl Default for AtomTable {
    fn default() -> Self {
        AtomTable::builtin()
    }
}

/// One entry of an atom-definition file. Exactly one unit for each parameter.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomEntry {
    name: String,
    alpha0_au: Option<f64>,
    alpha0_m3: Option<f64>,
    omega0_ev: Option<f64>,
    omega0_rad_s: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomFile {
    #[serde(default)]
    atom: Vec<AtomEntry>,
}

impl AtomTable {
    pub fn builtin() -> Self {
        let mut atoms = BTreeMap::new();
        for (name, au, ev) in BUILTIN {
            let atom = OscillatorAtom::from_atomic_units(name, au, ev).expect("built-in atom parameters are valid");
            atoms.insert(key(name), atom);
        }
        AtomTable { atoms }
    }

    pub fn insert(&mut self, atom: OscillatorAtom) {
        self.atoms.insert(key(&atom.name), atom);
    }

    pub fn names(&self) -> Vec<String> {
        self.atoms.values().map(|a| a.name.clone()).collect()
    }

    /// Case-insensitive lookup; `He` is accepted for `He*`.
    pub fn get(&self, name: &str) -> Result<OscillatorAtom> {
        let k = key(name);
        self.atoms
            .get(&k)
            .or_else(|| if k == "he" { self.atoms.get("he*") } else { None })
            .cloned()
            .ok_or_else(|| Error::UnknownAtom {
                name: name.to_string(),
                available: self.names(),
            })
    }

    /// Adds the `[[atom]]` entries of a TOML definition:
    ///
    /// ```toml
    /// [[atom]]
    /// name = "K"
    /// alpha0_au = 290.0      # or alpha0_m3
    /// omega0_ev = 1.6        # or omega0_rad_s
    /// ```
    pub fn extend_from_str(&mut self, text: &str) -> Result<()> {
        let file: AtomFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        for entry in file.atom {
            let alpha0 = match (entry.alpha0_au, entry.alpha0_m3) {
                (Some(au), None) => au * AU_POLARIZABILITY,
                (None, Some(m3)) => m3,
                _ => {
                    return Err(Error::Config(format!(
                        "atom `{}`: give exactly one of alpha0_au, alpha0_m3",
                        entry.name
                    )))
                }
            };
            let omega0 = match (entry.omega0_ev, entry.omega0_rad_s) {
                (Some(ev), None) => ev_to_rad_per_s(ev),
                (None, Some(w)) => w,
                _ => {
                    return Err(Error::Config(format!(
                        "atom `{}`: give exactly one of omega0_ev, omega0_rad_s",
                        entry.name
                    )))
                }
            };
            self.insert(OscillatorAtom::new(entry.name, alpha0, omega0)?);
        }
        Ok(())
    }

    pub fn extend_from_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        self.extend_from_str(&text)
    }
}

/// One of the four built-in atoms (He*, Na, Rb, Cs).
pub fn builtin_atom(name: &str) -> Result<OscillatorAtom> {
    AtomTable::builtin().get(name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn builtin_parameters_match_printed_si_values() {
        let he = builtin_atom("He*").unwrap();
        assert!(rel(he.alpha0, 4.678e-29) < 5e-4, "{}", he.alpha0);
        assert!(rel(he.omega0, 1.794e15) < 1e-3, "{}", he.omega0);
        let na = builtin_atom("Na").unwrap();
        assert!(rel(na.alpha0, 2.411e-29) < 5e-4);
        assert!(rel(na.omega0, 3.25e15) < 2e-3);
        let cs = builtin_atom("Cs").unwrap();
        assert!(rel(cs.alpha0, 5.981e-29) < 5e-4);
        assert!(rel(cs.omega0, 2.36e15) < 3e-3);
        let rb = builtin_atom("rb").unwrap();
        assert!(rel(rb.alpha0, 4.73e-29) < 3e-3);
        assert!(rel(rb.omega0, 8.3e15) < 2e-3);
    }

    #[test]
    fn unknown_atom_lists_available() {
        let err = builtin_atom("Xe").unwrap_err();
        match err {
            Error::UnknownAtom { available, .. } => {
                assert_eq!(available.len(), 4);
                assert!(available.contains(&"He*".to_string()));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(builtin_atom("he").unwrap().name, "He*");
    }

    #[test]
    fn polarizability_examples() {
        let he = builtin_atom("He*").unwrap();
        assert_eq!(he.dynamic_polarizability(0.0, 1e14).unwrap(), he.alpha0);
        // omega_c zeta = omega0 halves the polarizability
        let wc = 1e14;
        let zeta = he.omega0 / wc;
        assert!(rel(he.dynamic_polarizability(zeta, wc).unwrap(), he.alpha0 / 2.0) < 1e-14);
        assert!(he.dynamic_polarizability(-1.0, wc).is_err());
    }

    #[test]
    fn polarizability_at_first_matsubara_frequency() {
        // He*, a = 1 um, l = 1, T = 300 K, recomputed from the raw constants.
        let he = builtin_atom("He*").unwrap();
        let a = 1e-6;
        let wc = 299_792_458.0 / (2.0 * a);
        let xi1 = 2.0 * std::f64::consts::PI * 1.380_649e-23 * 300.0 / 1.054_571_817e-34;
        let w0 = 1.18 * 1.602_176_634e-19 / 1.054_571_817e-34;
        let expected = 315.63 * 1.482e-31 / (1.0 + (xi1 / w0).powi(2));
        let geom = crate::units::Geometry::new(a, 300.0).unwrap();
        let got = he.dynamic_polarizability(geom.matsubara_zeta(1), wc).unwrap();
        assert!(rel(got, expected) < 1e-12, "{got} vs {expected}");
    }

    #[test]
    fn definition_file_extends_table() {
        let mut table = AtomTable::builtin();
        table
            .extend_from_str(
                r#"
                [[atom]]
                name = "K"
                alpha0_au = 290.0
                omega0_ev = 1.6

                [[atom]]
                name = "Li"
                alpha0_m3 = 2.4e-29
                omega0_rad_s = 2.8e15
                "#,
            )
            .unwrap();
        assert_eq!(table.get("k").unwrap().alpha0, 290.0 * AU_POLARIZABILITY);
        assert_eq!(table.get("Li").unwrap().omega0, 2.8e15);
        assert!(table
            .extend_from_str("[[atom]]\nname = \"X\"\nalpha0_au = 1.0\nalpha0_m3 = 1.0\nomega0_ev = 1.0\n")
            .is_err());
    }

    proptest! {
        #[test]
        fn polarizability_bounded_monotone_and_scale_free(
            z1 in 0.0f64..50.0, dz in 1e-6f64..10.0, wc in 1e12f64..1e17,
        ) {
            for atom in AtomTable::builtin().atoms.values() {
                let a1 = atom.dynamic_polarizability(z1, wc).unwrap();
                let a2 = atom.dynamic_polarizability(z1 + dz, wc).unwrap();
                prop_assert!(a1 > 0.0 && a1 <= atom.alpha0);
                prop_assert!(a2 < a1);
                let half = atom.dynamic_polarizability(z1 / 2.0, 2.0 * wc).unwrap();
                prop_assert!((half - a1).abs() <= 1e-14 * a1);
            }
        }
    }
}
