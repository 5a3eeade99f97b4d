//! Parameter sweeps, figure recipes, ratio tables and CSV/JSON records.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::atoms::OscillatorAtom;
use crate::error::{Error, Result};
use crate::lifshitz::{free_energy, zero_t_energy, ModelSpec, OperatorMode, Settings};
use crate::reflection::HydrodynamicParams;
use crate::response::DiracParams;
use crate::units::Geometry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepVariable {
    Separation,
    Temperature,
    Gap,
}

impl FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "separation" | "a" => Ok(SweepVariable::Separation),
            "temperature" | "t" => Ok(SweepVariable::Temperature),
            "gap" | "delta" => Ok(SweepVariable::Gap),
            other => Err(Error::Config(format!(
                "unknown sweep variable `{other}` (expected separation, temperature or gap)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

impl FromStr for Spacing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" | "lin" => Ok(Spacing::Linear),
            "log" => Ok(Spacing::Log),
            other => Err(Error::Config(format!("unknown spacing `{other}` (expected linear or log)"))),
        }
    }
}

/// `count` points from `min` to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl Grid {
    pub fn new(min: f64, max: f64, count: usize, spacing: Spacing) -> Result<Self> {
        if count < 2 {
            return Err(Error::Config(format!("grid needs at least 2 points, got {count}")));
        }
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(Error::Config(format!("grid needs min < max, got {min} and {max}")));
        }
        if spacing == Spacing::Log && !(min > 0.0) {
            return Err(Error::Config(format!("log grid needs min > 0, got {min}")));
        }
        Ok(Grid { min, max, count, spacing })
    }

    pub fn values(&self) -> Vec<f64> {
        let n = (self.count - 1) as f64;
        let mut v: Vec<f64> = (0..self.count)
            .map(|i| {
                let t = i as f64 / n;
                match self.spacing {
                    Spacing::Linear => self.min + (self.max - self.min) * t,
                    Spacing::Log => (self.min.ln() + (self.max.ln() - self.min.ln()) * t).exp(),
                }
            })
            .collect();
        // exact endpoints
        v[0] = self.min;
        v[self.count - 1] = self.max;
        v
    }
}

/// `variable:min:max:count:spacing`, e.g. `separation:5e-8:5e-6:30:log`.
pub fn parse_sweep(text: &str) -> Result<(SweepVariable, Grid)> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 5 {
        return Err(Error::Config(format!(
            "sweep `{text}` must look like variable:min:max:count:spacing"
        )));
    }
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("bad number `{s}` in sweep `{text}`")))
    };
    let count = parts[3]
        .trim()
        .parse::<usize>()
        .map_err(|_| Error::Config(format!("bad count `{}` in sweep `{text}`", parts[3])))?;
    Ok((
        parts[0].parse()?,
        Grid::new(num(parts[1])?, num(parts[2])?, count, parts[4].parse()?)?,
    ))
}

/// One sweep: every atom × model × grid value.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    /// Separation used when it is not the swept variable, m.
    pub separation: f64,
    /// Temperature used when it is not the swept variable, K.
    pub temperature: f64,
    pub models: Vec<ModelSpec>,
    pub atoms: Vec<OscillatorAtom>,
    /// Also compute the `T = 0` energy and the relative thermal correction.
    pub thermal_correction: bool,
    pub settings: Settings,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Config("sweep has no grid values".into()));
        }
        if self.models.is_empty() || self.atoms.is_empty() {
            return Err(Error::Config("sweep needs at least one model and one atom".into()));
        }
        if self.variable == SweepVariable::Gap && self.models.iter().all(|m| matches!(m, ModelSpec::Hydrodynamic(_))) {
            return Err(Error::Config("gap sweep needs a Dirac model".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.atoms.len() * self.models.len() * self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Geometry and model at one grid value.
    fn point(&self, model: &ModelSpec, value: f64) -> Result<(Geometry, ModelSpec)> {
        let (a, t, model) = match self.variable {
            SweepVariable::Separation => (value, self.temperature, *model),
            SweepVariable::Temperature => (self.separation, value, *model),
            SweepVariable::Gap => {
                let model = match model {
                    ModelSpec::Dirac { params, mode } => ModelSpec::Dirac {
                        params: DiracParams::new(value, params.vf_ratio)?,
                        mode: *mode,
                    },
                    other => *other,
                };
                (self.separation, self.temperature, model)
            }
        };
        Ok((Geometry::new(a, t)?, model))
    }
}

/// One output row, carrying every parameter needed to regenerate it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub atom: String,
    pub model: String,
    pub operator_mode: Option<String>,
    pub delta_ev: Option<f64>,
    pub vf_ratio: Option<f64>,
    pub k_wavenumber: Option<f64>,
    pub separation_m: f64,
    pub temperature_k: f64,
    pub free_energy_j: Option<f64>,
    pub a4_f_abs: Option<f64>,
    pub zero_t_energy_j: Option<f64>,
    pub delta_t_correction: Option<f64>,
    pub terms_used: Option<usize>,
    pub error_estimate: Option<f64>,
    pub error: Option<String>,
}

impl OutputRecord {
    fn skeleton(atom: &OscillatorAtom, model: &ModelSpec, geom: &Geometry) -> Self {
        let (kind, mode, delta, vf, k) = match model {
            ModelSpec::Hydrodynamic(h) => ("hydrodynamic", None, None, None, Some(h.wavenumber)),
            ModelSpec::Dirac { params, mode } => (
                "dirac",
                Some(mode.label().to_string()),
                Some(params.delta_ev),
                Some(params.vf_ratio),
                None,
            ),
        };
        OutputRecord {
            atom: atom.name.clone(),
            model: kind.to_string(),
            operator_mode: mode,
            delta_ev: delta,
            vf_ratio: vf,
            k_wavenumber: k,
            separation_m: geom.separation(),
            temperature_k: geom.temperature(),
            free_energy_j: None,
            a4_f_abs: None,
            zero_t_energy_j: None,
            delta_t_correction: None,
            terms_used: None,
            error_estimate: None,
            error: None,
        }
    }

    /// Model reconstructed from the record's parameters.
    pub fn model_spec(&self) -> Result<ModelSpec> {
        match self.model.as_str() {
            "hydrodynamic" => Ok(ModelSpec::Hydrodynamic(HydrodynamicParams::new(
                self.k_wavenumber.ok_or_else(|| Error::Config("hydrodynamic record without k_wavenumber".into()))?,
            )?)),
            "dirac" => Ok(ModelSpec::Dirac {
                params: DiracParams::new(
                    self.delta_ev.ok_or_else(|| Error::Config("dirac record without delta_ev".into()))?,
                    self.vf_ratio.ok_or_else(|| Error::Config("dirac record without vf_ratio".into()))?,
                )?,
                mode: self
                    .operator_mode
                    .as_deref()
                    .ok_or_else(|| Error::Config("dirac record without operator_mode".into()))?
                    .parse()?,
            }),
            other => Err(Error::Config(format!("unknown model `{other}` in record"))),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

fn evaluate(spec: &SweepSpec, atom: &OscillatorAtom, model: &ModelSpec, value: f64) -> OutputRecord {
    let (geom, model) = match spec.point(model, value) {
        Ok(p) => p,
        Err(e) => {
            let mut rec = OutputRecord::skeleton(atom, model, &Geometry::new(spec.separation, spec.temperature).unwrap_or_else(|_| Geometry::new(1.0, 0.0).expect("valid fallback")));
            rec.error = Some(e.to_string());
            return rec;
        }
    };
    let mut rec = OutputRecord::skeleton(atom, &model, &geom);
    let computed = free_energy(&geom, atom, &model, &spec.settings).and_then(|f| {
        let e = if spec.thermal_correction {
            Some(zero_t_energy(&geom, atom, &model, &spec.settings)?)
        } else {
            None
        };
        Ok((f, e))
    });
    match computed {
        Ok((f, e)) => {
            rec.free_energy_j = Some(f.free_energy);
            rec.a4_f_abs = Some(f.a4_f_abs);
            rec.terms_used = Some(f.terms_used);
            rec.error_estimate = Some(f.error_estimate);
            if let Some(e) = e {
                rec.zero_t_energy_j = Some(e.free_energy);
                rec.delta_t_correction = Some((f.free_energy - e.free_energy) / e.free_energy);
            }
        }
        Err(err) => {
            log::warn!(
                "{} {} a={:e} T={}: {err}",
                atom.name,
                model.describe(),
                geom.separation(),
                geom.temperature()
            );
            rec.error = Some(err.to_string());
        }
    }
    rec
}

/// Runs every point on a pool of `workers` threads (0 picks the default).
///
/// Records come back ordered by (atom, model, grid index) whatever the
/// completion order; failed points carry their message in `error`.
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<Vec<OutputRecord>> {
    spec.validate()?;
    let jobs: Vec<(&OscillatorAtom, &ModelSpec, f64)> = spec
        .atoms
        .iter()
        .flat_map(|a| spec.models.iter().flat_map(move |m| spec.values.iter().map(move |&v| (a, m, v))))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| jobs.par_iter().map(|(a, m, v)| evaluate(spec, a, m, *v)).collect()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!("unknown format `{other}` (expected csv or json)"))),
        }
    }
}

const CSV_HEADER: [&str; 15] = [
    "atom",
    "model",
    "operator_mode",
    "delta_ev",
    "vf_ratio",
    "k_wavenumber",
    "separation_m",
    "temperature_k",
    "free_energy_j",
    "a4_f_abs",
    "zero_t_energy_j",
    "delta_t_correction",
    "terms_used",
    "error_estimate",
    "error",
];

/// 17 significant digits, enough to recover every `f64` exactly.
fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_sci(x: Option<f64>) -> String {
    x.map(sci).unwrap_or_default()
}

pub fn write_csv<W: Write>(records: &[OutputRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.atom.clone(),
            r.model.clone(),
            r.operator_mode.clone().unwrap_or_default(),
            opt_sci(r.delta_ev),
            opt_sci(r.vf_ratio),
            opt_sci(r.k_wavenumber),
            sci(r.separation_m),
            sci(r.temperature_k),
            opt_sci(r.free_energy_j),
            opt_sci(r.a4_f_abs),
            opt_sci(r.zero_t_energy_j),
            opt_sci(r.delta_t_correction),
            r.terms_used.map(|n| n.to_string()).unwrap_or_default(),
            opt_sci(r.error_estimate),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<OutputRecord>> {
    let mut r = csv::Reader::from_reader(input);
    let mut records = Vec::new();
    for row in r.deserialize() {
        let mut rec: OutputRecord = row?;
        for field in [&mut rec.operator_mode, &mut rec.error] {
            if field.as_deref() == Some("") {
                *field = None;
            }
        }
        records.push(rec);
    }
    Ok(records)
}

pub fn write_json<W: Write>(records: &[OutputRecord], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, records)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn read_json<R: Read>(input: R) -> Result<Vec<OutputRecord>> {
    Ok(serde_json::from_reader(input)?)
}

pub fn write_records<W: Write>(records: &[OutputRecord], format: OutputFormat, out: W) -> Result<()> {
    match format {
        OutputFormat::Csv => write_csv(records, out),
        OutputFormat::Json => write_json(records, out),
    }
}

/// Picks out one model in a record set: `hydrodynamic`, `dirac`,
/// `dirac:<mode>` or `dirac:<mode>:<delta_ev>`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSelector {
    pub kind: String,
    pub operator_mode: Option<OperatorMode>,
    pub delta_ev: Option<f64>,
}

impl FromStr for ModelSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let kind = parts[0].to_ascii_lowercase();
        if kind != "hydrodynamic" && kind != "dirac" {
            return Err(Error::Config(format!("unknown model `{}` (expected hydrodynamic or dirac)", parts[0])));
        }
        if parts.len() > 3 || (kind == "hydrodynamic" && parts.len() > 1) {
            return Err(Error::Config(format!("bad model selector `{s}`")));
        }
        let operator_mode = parts.get(1).map(|m| m.parse()).transpose()?;
        let delta_ev = parts
            .get(2)
            .map(|d| d.parse::<f64>().map_err(|_| Error::Config(format!("bad gap `{d}` in `{s}`"))))
            .transpose()?;
        Ok(ModelSelector {
            kind,
            operator_mode,
            delta_ev,
        })
    }
}

impl fmt::Display for ModelSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.kind)?;
        if let Some(m) = self.operator_mode {
            write!(f, ":{m}")?;
        }
        if let Some(d) = self.delta_ev {
            write!(f, ":{d}")?;
        }
        Ok(())
    }
}

impl ModelSelector {
    pub fn matches(&self, r: &OutputRecord) -> bool {
        r.model == self.kind
            && self.operator_mode.is_none_or(|m| r.operator_mode.as_deref() == Some(m.label()))
            && self.delta_ev.is_none_or(|d| r.delta_ev == Some(d))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub separation_m: f64,
    pub ratio: f64,
}

fn same_point(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * b.abs()
}

/// `|F_a| / |F_b|` for one atom at each requested separation. Grid points
/// must be present for both models; nothing is interpolated.
pub fn ratio_report(
    records: &[OutputRecord],
    atom: &str,
    model_a: &ModelSelector,
    model_b: &ModelSelector,
    separations: &[f64],
) -> Result<Vec<RatioRow>> {
    let find = |sel: &ModelSelector, a: f64| -> Result<f64> {
        records
            .iter()
            .find(|r| r.atom.eq_ignore_ascii_case(atom) && sel.matches(r) && same_point(r.separation_m, a))
            .and_then(|r| r.free_energy_j)
            .ok_or_else(|| Error::MissingGridPoint {
                separation: a,
                model: sel.to_string(),
            })
    };
    separations
        .iter()
        .map(|&a| {
            Ok(RatioRow {
                separation_m: a,
                ratio: find(model_a, a)?.abs() / find(model_b, a)?.abs(),
            })
        })
        .collect()
}

pub const RECIPES: [&str; 10] = [
    "fig2", "fig3a", "fig3b", "fig4a", "fig4b", "fig5a", "fig5b", "fig6a", "fig6b", "fig6c",
];

fn dirac_models(gaps: &[f64], mode: OperatorMode) -> Result<Vec<ModelSpec>> {
    gaps.iter().map(|&d| ModelSpec::dirac(d, mode)).collect()
}

fn three_models() -> Result<Vec<ModelSpec>> {
    Ok(vec![
        ModelSpec::hydrodynamic(),
        ModelSpec::dirac(0.0, OperatorMode::Prescription)?,
        ModelSpec::dirac(0.0, OperatorMode::ZeroTOperator)?,
    ])
}

/// Built-in sweeps reproducing each figure's data.
///
/// * `fig2`: He*, a = 1 um, T from 1 to 300 K, gap 0.1, 0.05, 0.01, 0 eV, full finite-T operator.
/// * `fig3a`/`fig3b`: He*, T = 300 K, thermal correction over 10-500 nm / 10-100 nm,
///   gap 0.1, 0.05, 0.025, 0.01, 0.001, 0 eV.
/// * `fig4a`/`fig4b`: the same at T = 100 K with gaps 0.1, 0.05, 0.025 / 0.025, 0.01, 0.001, 0 eV.
/// * `fig5a`: He*, T = 300 K, 50 nm to 5 um, hydrodynamic, prescription and zero-T operator.
/// * `fig5b`: He*, T = 300 K, 50 nm to 1 um, full operator and zero-T operator with gap 0, 0.001, 0.01 eV.
/// * `fig6a`/`fig6b`/`fig6c`: as `fig5a` for Na, Rb, Cs.
pub fn recipe(name: &str, atoms: &crate::atoms::AtomTable, settings: Settings) -> Result<SweepSpec> {
    let he = || -> Result<Vec<OscillatorAtom>> { Ok(vec![atoms.get("He*")?]) };
    let sep = |min, max, count| Grid::new(min, max, count, Spacing::Log).map(|g| g.values());
    let thermal = |t: f64, max: f64, gaps: &[f64]| -> Result<SweepSpec> {
        Ok(SweepSpec {
            variable: SweepVariable::Separation,
            values: sep(1e-8, max, 12)?,
            separation: 1e-6,
            temperature: t,
            models: dirac_models(gaps, OperatorMode::Prescription)?,
            atoms: he()?,
            thermal_correction: true,
            settings,
        })
    };
    let by_separation = |atom: &str| -> Result<SweepSpec> {
        Ok(SweepSpec {
            variable: SweepVariable::Separation,
            values: sep(5e-8, 5e-6, 13)?,
            separation: 1e-6,
            temperature: 300.0,
            models: three_models()?,
            atoms: vec![atoms.get(atom)?],
            thermal_correction: false,
            settings,
        })
    };
    match name {
        "fig2" => Ok(SweepSpec {
            variable: SweepVariable::Temperature,
            values: Grid::new(1.0, 300.0, 12, Spacing::Log)?.values(),
            separation: 1e-6,
            temperature: 300.0,
            models: dirac_models(&[0.1, 0.05, 0.01, 0.0], OperatorMode::FullFiniteT)?,
            atoms: he()?,
            thermal_correction: false,
            settings,
        }),
        "fig3a" => thermal(300.0, 5e-7, &[0.1, 0.05, 0.025, 0.01, 0.001, 0.0]),
        "fig3b" => thermal(300.0, 1e-7, &[0.1, 0.05, 0.025, 0.01, 0.001, 0.0]),
        "fig4a" => thermal(100.0, 5e-7, &[0.1, 0.05, 0.025]),
        "fig4b" => thermal(100.0, 5e-7, &[0.025, 0.01, 0.001, 0.0]),
        "fig5a" => by_separation("He*"),
        "fig5b" => {
            let mut models = vec![ModelSpec::dirac(0.0, OperatorMode::FullFiniteT)?];
            models.extend(dirac_models(&[0.0, 0.001, 0.01], OperatorMode::ZeroTOperator)?);
            Ok(SweepSpec {
                variable: SweepVariable::Separation,
                values: sep(5e-8, 1e-6, 9)?,
                separation: 1e-6,
                temperature: 300.0,
                models,
                atoms: he()?,
                thermal_correction: false,
                settings,
            })
        }
        "fig6a" => by_separation("Na"),
        "fig6b" => by_separation("Rb"),
        "fig6c" => by_separation("Cs"),
        other => Err(Error::Config(format!(
            "unknown recipe `{other}` (available: {})",
            RECIPES.join(", ")
        ))),
    }
}
