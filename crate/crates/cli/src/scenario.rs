//! Scenario schema: a JSON document selecting a system, a task, an optional
//! parameter sweep, and the output destination.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Deserialize;
use serde_json::Value;

use eit_core::model::{DecoherenceSpec, FieldDrive, Mode, PhotonOccupancy, Scheme, SystemSpec};

use crate::error::{CliError, Result};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub name: String,
    pub system: SystemIn,
    pub task: TaskIn,
    #[serde(default)]
    pub sweep: Option<SweepIn>,
    #[serde(default)]
    pub output: Option<OutputIn>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemIn {
    pub scheme: SchemeIn,
    pub drives: Vec<DriveIn>,
    #[serde(default)]
    pub decoherence: DecoherenceIn,
    #[serde(default = "default_atom_count")]
    pub atom_count: u32,
    #[serde(default)]
    pub dual_rail: bool,
    #[serde(default = "default_reference_rate")]
    pub reference_rate: f64,
}

fn default_atom_count() -> u32 {
    1
}

fn default_reference_rate() -> f64 {
    1.0
}

#[allow(clippy::enum_variant_names)]
#[derive(Clone, Copy, Debug, Deserialize)]
pub enum SchemeIn {
    #[serde(rename = "two-level")]
    TwoLevel,
    #[serde(rename = "three-level")]
    ThreeLevel,
    #[serde(rename = "four-level")]
    FourLevel,
}

impl From<SchemeIn> for Scheme {
    fn from(s: SchemeIn) -> Scheme {
        match s {
            SchemeIn::TwoLevel => Scheme::TwoLevel,
            SchemeIn::ThreeLevel => Scheme::ThreeLevel,
            SchemeIn::FourLevel => Scheme::FourLevel,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveIn {
    pub label: String,
    pub rabi: ComplexIn,
    #[serde(default)]
    pub detuning: f64,
    #[serde(default)]
    pub occupancy: Option<OccupancyIn>,
    #[serde(default)]
    pub vacuum_rabi: Option<ComplexIn>,
}

/// A complex scalar: either a bare real number or `{"re": .., "im": ..}`.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(untagged)]
pub enum ComplexIn {
    Real(f64),
    Parts {
        re: f64,
        #[serde(default)]
        im: f64,
    },
}

impl From<ComplexIn> for Complex64 {
    fn from(c: ComplexIn) -> Complex64 {
        match c {
            ComplexIn::Real(re) => Complex64::new(re, 0.0),
            ComplexIn::Parts { re, im } => Complex64::new(re, im),
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub enum OccupancyIn {
    Fock(u64),
    Coherent(f64),
}

impl From<OccupancyIn> for PhotonOccupancy {
    fn from(o: OccupancyIn) -> PhotonOccupancy {
        match o {
            OccupancyIn::Fock(n) => PhotonOccupancy::FockCount(n),
            OccupancyIn::Coherent(a) => PhotonOccupancy::Coherent(a),
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoherenceIn {
    #[serde(default)]
    pub depop: BTreeMap<String, f64>,
    #[serde(default)]
    pub dephase: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TaskIn {
    /// Integrate the master equation and tabulate selected elements.
    Evolve {
        t_end: f64,
        #[serde(default)]
        step: Option<f64>,
        #[serde(default = "default_stride")]
        stride: usize,
        #[serde(default)]
        initial_state: InitialStateIn,
        /// `[row, column]` element indices into the listed basis order;
        /// defaults to the first column plus the diagonal.
        #[serde(default)]
        elements: Option<Vec<[usize; 2]>>,
    },
    /// Quasi-steady-state elements, lifetime, and validity window.
    Steady,
    /// Normalized susceptibility over a probe-detuning grid.
    Spectrum { axis: GridIn },
    /// Dual-rail gate phase/fidelity/entropy estimates.
    GateMetrics { target_phase: f64 },
    /// Coherent-drive Kerr overlap over an `|alpha_b|^2` grid.
    KerrOverlap {
        n_a: u64,
        n_c: u64,
        phi: f64,
        alpha_sq: LogGridIn,
    },
    /// Dressed states of the resonant three-level manifold.
    Dressed,
    /// Undamped -pi phase milestones for q = 1..=q_max.
    Milestones { q_max: u32 },
}

fn default_stride() -> usize {
    100
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialStateIn {
    #[default]
    Ground,
    DualRail,
    Amplitudes(Vec<ComplexIn>),
}

/// Upper bound on generated grid sizes.
pub const MAX_GRID_POINTS: usize = 10_000_000;

/// Uniform grid given by `step` or by `count` (inclusive endpoints).
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridIn {
    pub start: f64,
    pub stop: f64,
    #[serde(default)]
    pub step: Option<f64>,
    #[serde(default)]
    pub count: Option<usize>,
}

impl GridIn {
    pub fn points(&self) -> Result<Vec<f64>> {
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(CliError::validation("task.axis: start/stop must be finite"));
        }
        match (self.step, self.count) {
            (Some(step), None) => {
                if step <= 0.0 || step.is_nan() || self.stop < self.start {
                    return Err(CliError::validation(
                        "task.axis: need step > 0 and stop >= start",
                    ));
                }
                let n = ((self.stop - self.start) / step).round() + 1.0;
                if n > MAX_GRID_POINTS as f64 {
                    return Err(CliError::validation(format!(
                        "task.axis: {n:.0} grid points exceeds the limit of {MAX_GRID_POINTS}"
                    )));
                }
                let n = n as usize;
                Ok((0..n).map(|i| self.start + i as f64 * step).collect())
            }
            (None, Some(count)) => {
                if count == 0 || count > MAX_GRID_POINTS {
                    return Err(CliError::validation(format!(
                        "task.axis: count must be in 1..={MAX_GRID_POINTS}"
                    )));
                }
                Ok(eit_core::optics::linspace(self.start, self.stop, count))
            }
            _ => Err(CliError::validation(
                "task.axis: exactly one of step or count is required",
            )),
        }
    }
}

/// Logarithmic grid with inclusive endpoints.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogGridIn {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl LogGridIn {
    pub fn points(&self) -> Result<Vec<f64>> {
        if self.start <= 0.0
            || self.start.is_nan()
            || self.stop < self.start
            || self.stop.is_nan()
            || self.points == 0
        {
            return Err(CliError::validation(
                "task.alpha_sq: need 0 < start <= stop and points >= 1",
            ));
        }
        let log = eit_core::optics::linspace(self.start.ln(), self.stop.ln(), self.points);
        Ok(log.into_iter().map(f64::exp).collect())
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepIn {
    /// Dotted path into this document, e.g. `system.drives.1.rabi`.
    pub parameter: String,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub range: Option<RangeIn>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeIn {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputIn {
    pub format: FormatIn,
    pub path: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormatIn {
    Csv,
    Json,
}

/// Parse the raw document, reporting the offending field path on failure.
pub fn parse_scenario(text: &str) -> Result<(Value, ScenarioDoc)> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| CliError::validation(format!("scenario is not valid JSON: {e}")))?;
    let doc = deserialize_doc(&value)?;
    Ok((value, doc))
}

pub fn deserialize_doc(value: &Value) -> Result<ScenarioDoc> {
    let deserializer = value.clone();
    serde_path_to_error::deserialize(deserializer).map_err(|e| {
        let path = e.path().to_string();
        CliError::validation(format!("scenario field `{path}`: {}", e.inner()))
    })
}

impl SystemIn {
    /// Convert to the core system description, naming fields on failure.
    pub fn to_spec(&self) -> Result<SystemSpec> {
        let mut drives = Vec::with_capacity(self.drives.len());
        for (i, d) in self.drives.iter().enumerate() {
            let mode = match d.label.as_str() {
                "a" => Mode::A,
                "b" => Mode::B,
                "c" => Mode::C,
                other => {
                    return Err(CliError::validation(format!(
                        "system.drives.{i}.label: expected one of a, b, c, got `{other}`"
                    )))
                }
            };
            let occupancy = d
                .occupancy
                .map(PhotonOccupancy::from)
                .unwrap_or(PhotonOccupancy::FockCount(1));
            let mut drive = FieldDrive::new(mode, d.rabi.into(), d.detuning, occupancy);
            if let Some(v) = d.vacuum_rabi {
                drive = drive.with_vacuum_rabi(v.into());
            }
            drives.push(drive);
        }
        let mut deco = DecoherenceSpec::none();
        for (kind, map, is_depop) in [
            ("depop", &self.decoherence.depop, true),
            ("dephase", &self.decoherence.dephase, false),
        ] {
            for (key, rate) in map {
                let level: u8 = key.parse().map_err(|_| {
                    CliError::validation(format!(
                        "system.decoherence.{kind}.{key}: level keys are 1..=4"
                    ))
                })?;
                deco = if is_depop {
                    deco.with_depop(level, *rate)
                } else {
                    deco.with_dephase(level, *rate)
                }
                .map_err(|e| {
                    CliError::validation(format!("system.decoherence.{kind}.{key}: {e}"))
                })?;
            }
        }
        let mut spec = SystemSpec::new(self.scheme.into(), drives, deco)
            .with_atom_count(self.atom_count)
            .with_dual_rail(self.dual_rail);
        spec.reference_rate = self.reference_rate;
        spec.validate()
            .map_err(|e| CliError::validation(format!("system: {e}")))?;
        Ok(spec)
    }
}

impl SweepIn {
    pub fn values(&self) -> Result<Vec<f64>> {
        match (&self.values, &self.range) {
            (Some(v), None) => {
                if v.is_empty() {
                    return Err(CliError::validation("sweep.values: must not be empty"));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(CliError::validation(
                        "sweep.values: all values must be finite",
                    ));
                }
                Ok(v.clone())
            }
            (None, Some(r)) => {
                if r.count == 0 || !r.start.is_finite() || !r.stop.is_finite() {
                    return Err(CliError::validation(
                        "sweep.range: need finite bounds and count >= 1",
                    ));
                }
                Ok(eit_core::optics::linspace(r.start, r.stop, r.count))
            }
            _ => Err(CliError::validation(
                "sweep: exactly one of values or range is required",
            )),
        }
    }
}

/// Replace the numeric leaf at `path` (dotted segments, integer segments
/// index arrays) and return the re-deserialized document.
pub fn apply_sweep_value(base: &Value, path: &str, value: f64) -> Result<ScenarioDoc> {
    let mut doc = base.clone();
    let mut cursor = &mut doc;
    for segment in path.split('.') {
        cursor = match cursor {
            Value::Object(map) => map.get_mut(segment).ok_or_else(|| {
                CliError::validation(format!("sweep.parameter: no field `{segment}` in `{path}`"))
            })?,
            Value::Array(items) => {
                let idx: usize = segment.parse().map_err(|_| {
                    CliError::validation(format!(
                        "sweep.parameter: `{segment}` is not an array index in `{path}`"
                    ))
                })?;
                items.get_mut(idx).ok_or_else(|| {
                    CliError::validation(format!(
                        "sweep.parameter: index {idx} out of bounds in `{path}`"
                    ))
                })?
            }
            _ => {
                return Err(CliError::validation(format!(
                    "sweep.parameter: `{path}` descends through a non-container value"
                )))
            }
        };
    }
    if !cursor.is_number() {
        return Err(CliError::validation(format!(
            "sweep.parameter: `{path}` does not reference a numeric field"
        )));
    }
    *cursor = serde_json::json!(value);
    deserialize_doc(&doc)
}
