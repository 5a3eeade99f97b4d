//! Run configuration: a TOML file, command-line overrides, or both.
//!
//! ```toml
//! atom = ["Na", "Rb"]            # or a single name
//! atoms_file = "extra_atoms.toml"
//! model = ["hydrodynamic", "dirac"]
//! operator_mode = "prescription"  # or a list
//! delta_ev = [0.0, 0.01]
//! temperature_k = 300.0
//! sweep = "separation:5e-8:5e-6:20:log"
//! tol = 1e-6
//! format = "csv"
//! workers = 4
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::atoms::AtomTable;
use crate::error::{Error, Result};
use crate::lifshitz::{ModelSpec, OperatorMode, Settings};
use crate::reflection::{HydrodynamicParams, DEFAULT_WAVENUMBER};
use crate::report::{parse_sweep, recipe, OutputFormat, SweepSpec, SweepVariable};
use crate::response::{DiracParams, DEFAULT_VF_RATIO};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub recipe: Option<String>,
    pub atom: Option<OneOrMany<String>>,
    pub atoms_file: Option<PathBuf>,
    pub model: Option<OneOrMany<String>>,
    pub operator_mode: Option<OneOrMany<String>>,
    pub delta_ev: Option<OneOrMany<f64>>,
    pub vf_ratio: Option<f64>,
    pub k_wavenumber: Option<f64>,
    pub temperature_k: Option<f64>,
    pub separation_m: Option<f64>,
    pub sweep: Option<String>,
    pub tol: Option<f64>,
    pub thermal_correction: Option<bool>,
    pub format: Option<String>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

macro_rules! take {
    ($base:ident, $over:ident, $($field:ident),*) => {
        RunConfig { $($field: $over.$field.or($base.$field)),* }
    };
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file; a relative `atoms_file` is taken relative to it.
    pub fn from_file(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_toml(&std::fs::read_to_string(path)?)?;
        if let (Some(f), Some(dir)) = (&cfg.atoms_file, path.parent()) {
            if f.is_relative() {
                cfg.atoms_file = Some(dir.join(f));
            }
        }
        Ok(cfg)
    }

    /// Fields set in `overrides` win.
    pub fn merged(self, overrides: RunConfig) -> RunConfig {
        let base = self;
        take!(
            base,
            overrides,
            recipe,
            atom,
            atoms_file,
            model,
            operator_mode,
            delta_ev,
            vf_ratio,
            k_wavenumber,
            temperature_k,
            separation_m,
            sweep,
            tol,
            thermal_correction,
            format,
            out,
            workers
        )
    }

    pub fn atom_table(&self) -> Result<AtomTable> {
        let mut table = AtomTable::builtin();
        if let Some(path) = &self.atoms_file {
            table.extend_from_file(path)?;
        }
        Ok(table)
    }

    pub fn settings(&self) -> Result<Settings> {
        match self.tol {
            Some(tol) => Settings::with_tolerance(tol),
            None => Ok(Settings::default()),
        }
    }

    pub fn output_format(&self) -> Result<OutputFormat> {
        self.format.as_deref().unwrap_or("csv").parse()
    }

    pub fn workers(&self) -> usize {
        self.workers.unwrap_or(0)
    }

    fn models(&self) -> Result<Vec<ModelSpec>> {
        let kinds = self.model.as_ref().map(|m| m.to_vec()).unwrap_or_else(|| vec!["dirac".into()]);
        let modes = self
            .operator_mode
            .as_ref()
            .map(|m| m.to_vec())
            .unwrap_or_else(|| vec!["prescription".into()]);
        let gaps = self.delta_ev.as_ref().map(|d| d.to_vec()).unwrap_or_else(|| vec![0.0]);
        let mut models = Vec::new();
        for kind in kinds {
            match kind.trim().to_ascii_lowercase().as_str() {
                "hydrodynamic" | "hydro" => models.push(ModelSpec::Hydrodynamic(HydrodynamicParams::new(
                    self.k_wavenumber.unwrap_or(DEFAULT_WAVENUMBER),
                )?)),
                "dirac" => {
                    for mode in &modes {
                        let mode: OperatorMode = mode.parse()?;
                        for &gap in &gaps {
                            models.push(ModelSpec::Dirac {
                                params: DiracParams::new(gap, self.vf_ratio.unwrap_or(DEFAULT_VF_RATIO))?,
                                mode,
                            });
                        }
                    }
                }
                other => {
                    return Err(Error::Config(format!(
                        "unknown model `{other}` (expected hydrodynamic or dirac)"
                    )))
                }
            }
        }
        Ok(models)
    }

    /// The sweep this configuration describes. A recipe supplies the grid and
    /// models; `tol` still applies to it.
    pub fn sweep_spec(&self) -> Result<SweepSpec> {
        let table = self.atom_table()?;
        let settings = self.settings()?;
        if let Some(name) = &self.recipe {
            return recipe(name, &table, settings);
        }
        let atoms = self
            .atom
            .as_ref()
            .map(|a| a.to_vec())
            .unwrap_or_else(|| vec!["He*".into()])
            .iter()
            .map(|n| table.get(n))
            .collect::<Result<Vec<_>>>()?;
        let separation = self.separation_m.unwrap_or(1e-6);
        let temperature = self.temperature_k.unwrap_or(300.0);
        let mut models = self.models()?;
        let (variable, values) = match &self.sweep {
            Some(text) => {
                let (variable, grid) = parse_sweep(text)?;
                (variable, grid.values())
            }
            None => (SweepVariable::Separation, vec![separation]),
        };
        if variable == SweepVariable::Gap {
            // every Dirac mode once; the gap comes from the grid
            models.dedup_by(|a, b| match (a, b) {
                (ModelSpec::Dirac { mode: ma, .. }, ModelSpec::Dirac { mode: mb, .. }) => ma == mb,
                _ => false,
            });
        }
        let spec = SweepSpec {
            variable,
            values,
            separation,
            temperature,
            models,
            atoms,
            thermal_correction: self.thermal_correction.unwrap_or(false),
            settings,
        };
        spec.validate()?;
        Ok(spec)
    }
}
