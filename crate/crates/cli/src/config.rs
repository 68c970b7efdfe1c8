//! Run configuration: one JSON document drives every subcommand. Unknown
//! keys are rejected, defaults are filled before execution, and the
//! resolved document is echoed into each output for reproducibility.

use increlab_core::dissipativity::{QuadraticStorage, StorageMode, SupplyRate};
use increlab_core::falsify::{InputParameterization, ParamKind};
use increlab_core::{Signal, SignalKind, StateSpaceModel};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::Value;

fn default_step() -> f64 {
    1e-3
}

fn default_horizon() -> f64 {
    10.0
}

pub const DEFAULT_BUDGET: usize = 5000;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            step: default_step(),
            horizon: default_horizon(),
        }
    }
}

/// Input signal specification for simulation and the checks.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InputSpec {
    /// Constant level per channel.
    Constant { value: Vec<f64> },
    /// `before` until `at`, then `after`.
    Step {
        at: f64,
        before: Vec<f64>,
        after: Vec<f64>,
    },
    /// `offset + amplitude * sin(2 pi frequency t + phase)` per channel.
    Sine {
        amplitude: Vec<f64>,
        frequency: Vec<f64>,
        #[serde(default)]
        phase: Option<Vec<f64>>,
        #[serde(default)]
        offset: Option<Vec<f64>>,
    },
    /// Read from a signal CSV file (`t,ch0,...`).
    Csv { path: String },
}

impl InputSpec {
    /// Realizes the specification on the grid. Generated inputs are
    /// zero-order-held, exactly as the simulator plays them back.
    pub fn build(&self, grid: &GridConfig) -> Result<Signal, String> {
        let n = (grid.horizon / grid.step).round() as usize + 1;
        match self {
            InputSpec::Constant { value } => {
                Signal::constant(grid.step, n, value, SignalKind::Zoh).map_err(|e| e.to_string())
            }
            InputSpec::Step { at, before, after } => {
                if before.len() != after.len() {
                    return Err("step input: before/after channel mismatch".into());
                }
                let (at, before, after) = (*at, before.clone(), after.clone());
                Signal::from_fn(grid.step, n, before.len(), SignalKind::Zoh, |t, c| {
                    if t < at {
                        before[c]
                    } else {
                        after[c]
                    }
                })
                .map_err(|e| e.to_string())
            }
            InputSpec::Sine {
                amplitude,
                frequency,
                phase,
                offset,
            } => {
                let channels = amplitude.len();
                if frequency.len() != channels {
                    return Err("sine input: frequency/amplitude channel mismatch".into());
                }
                let phase = phase.clone().unwrap_or_else(|| vec![0.0; channels]);
                let offset = offset.clone().unwrap_or_else(|| vec![0.0; channels]);
                if phase.len() != channels || offset.len() != channels {
                    return Err("sine input: phase/offset channel mismatch".into());
                }
                let (amplitude, frequency) = (amplitude.clone(), frequency.clone());
                Signal::from_fn(grid.step, n, channels, SignalKind::Zoh, |t, c| {
                    offset[c]
                        + amplitude[c] * (std::f64::consts::TAU * frequency[c] * t + phase[c]).sin()
                })
                .map_err(|e| e.to_string())
            }
            InputSpec::Csv { path } => {
                let signal = Signal::read_csv_path(path).map_err(|e| e.to_string())?;
                if (signal.step() - grid.step).abs() > 1e-9 * grid.step {
                    return Err(format!(
                        "csv input step {} does not match grid step {}",
                        signal.step(),
                        grid.step
                    ));
                }
                Ok(signal)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckMode {
    Dissipation,
    Incremental,
    Diffpass,
    Gain,
    StorageSearch,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SupplyConfig {
    Passivity,
    Gain { gamma: f64 },
    QuadraticForm { m: Vec<Vec<f64>> },
}

impl SupplyConfig {
    pub fn build(&self) -> Result<SupplyRate, String> {
        match self {
            SupplyConfig::Passivity => Ok(SupplyRate::Passivity),
            SupplyConfig::Gain { gamma } => Ok(SupplyRate::Gain(*gamma)),
            SupplyConfig::QuadraticForm { m } => Ok(SupplyRate::QuadraticForm(parse_matrix(m)?)),
        }
    }
}

/// A symmetric matrix, written as a plain number (1x1) or nested rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    Scalar(f64),
    Rows(Vec<Vec<f64>>),
}

impl MatrixSpec {
    pub fn build(&self) -> Result<DMatrix<f64>, String> {
        match self {
            MatrixSpec::Scalar(v) => Ok(DMatrix::from_element(1, 1, *v)),
            MatrixSpec::Rows(rows) => parse_matrix(rows),
        }
    }
}

fn parse_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>, String> {
    let n = rows.len();
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let m = rows[0].len();
    if rows.iter().any(|r| r.len() != m) {
        return Err("ragged matrix rows".into());
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StorageConfig {
    pub p: MatrixSpec,
    #[serde(default = "default_storage_mode")]
    pub mode: StorageMode,
}

fn default_storage_mode() -> StorageMode {
    StorageMode::State
}

impl StorageConfig {
    pub fn build(&self) -> Result<QuadraticStorage, String> {
        QuadraticStorage::new(self.p.build()?, self.mode).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    pub from: f64,
    pub to: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffpassConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<MatrixSpec>,
    /// Scan of scalar storages `P = 10^e` over `count` exponents in
    /// `[from, to]`; only meaningful for one-state models.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_scan_log10: Option<ScanSpec>,
}

/// How the falsifier maps normalized coefficients onto model inputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RangeSpec {
    /// `"model_box"`: use the model's input-domain box.
    Named(String),
    /// Explicit per-channel `[lo, hi]` intervals.
    Explicit(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamConfig {
    #[serde(default = "default_param_kind")]
    pub kind: ParamKind,
    #[serde(default = "default_segments")]
    pub k: usize,
    /// Defaults to the grid horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default = "default_a_max")]
    pub a_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_range: Option<RangeSpec>,
}

fn default_param_kind() -> ParamKind {
    ParamKind::PiecewiseConstant
}

fn default_segments() -> usize {
    8
}

fn default_a_max() -> f64 {
    1.0
}

impl Default for ParamConfig {
    fn default() -> Self {
        Self {
            kind: default_param_kind(),
            k: default_segments(),
            horizon: None,
            a_max: default_a_max(),
            input_range: None,
        }
    }
}

impl ParamConfig {
    /// Builds the core parameterization for `model`, resolving the range
    /// policy. Without an explicit `input_range`, models whose admissible
    /// input box sits away from the origin (the potassium-current model)
    /// get the box mapping; everything else uses the plain amplitude bound.
    pub fn build(
        &self,
        model: &StateSpaceModel,
        grid: &GridConfig,
    ) -> Result<InputParameterization, String> {
        let horizon = self.horizon.unwrap_or(grid.horizon);
        let mut param = InputParameterization {
            kind: self.kind,
            k: self.k,
            horizon,
            a_max: self.a_max,
            channels: model.n_u(),
            ranges: None,
        };
        match &self.input_range {
            Some(RangeSpec::Named(name)) if name == "model_box" => {
                param = param.with_model_input_range(model);
            }
            Some(RangeSpec::Named(name)) if name == "none" => {}
            Some(RangeSpec::Named(other)) => {
                return Err(format!(
                    "input_range: expected \"model_box\", \"none\" or intervals, got `{other}`"
                ));
            }
            Some(RangeSpec::Explicit(ranges)) => {
                param.ranges = Some(ranges.clone());
            }
            None => {
                if model.name().starts_with("hh_potassium") {
                    param = param.with_model_input_range(model);
                }
            }
        }
        param.validate().map_err(|e| e.to_string())?;
        Ok(param)
    }
}

/// The one configuration document. Which blocks are required depends on
/// the subcommand; unknown keys are always rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: String,
    #[serde(default)]
    pub params: serde_json::Map<String, Value>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<InputSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input2: Option<InputSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0_2: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<CheckMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub supply: Option<SupplyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub storage: Option<StorageConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diffpass: Option<DiffpassConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameterization: Option<ParamConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn from_path(path: &std::path::Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("config parse error: {e}"))
    }

    /// Fills defaults (grid, seed, budget, parameterization horizon) so the
    /// echoed config replays identically.
    pub fn resolve(mut self, seed_override: Option<u64>) -> Self {
        if let Some(seed) = seed_override {
            self.seed = Some(seed);
        }
        self.seed = Some(self.seed.unwrap_or(DEFAULT_SEED));
        self.budget = Some(self.budget.unwrap_or(DEFAULT_BUDGET));
        if let Some(p) = self.parameterization.as_mut() {
            p.horizon = Some(p.horizon.unwrap_or(self.grid.horizon));
        }
        self
    }

    pub fn build_model(&self) -> Result<StateSpaceModel, String> {
        increlab_core::zoo::zoo(&self.model, &self.params).map_err(|e| e.to_string())
    }

    pub fn x0_for(&self, model: &StateSpaceModel) -> Vec<f64> {
        self.x0
            .clone()
            .unwrap_or_else(|| model.x0_default().to_vec())
    }
}
