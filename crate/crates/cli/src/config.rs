//! Run configuration: TOML in, fully resolved TOML echo out.

use std::fmt;
use std::path::{Path, PathBuf};

use fockmet_core::composite::{binary_sinusoidal_schedule, DeviceParams, FilterSpec};
use fockmet_core::fockspace::HilbertSpec;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::CliError;

/// Output-directory override, between `--out` and `output_path`.
pub const OUT_DIR_ENV: &str = "FOCKMET_OUT_DIR";

const MAX_GRID_POINTS: usize = 1_000_000;

/// Shots per grid point, or exact probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Shots {
    #[default]
    Exact,
    Count(u64),
}

impl Serialize for Shots {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Shots::Exact => s.serialize_str("exact"),
            Shots::Count(k) => s.serialize_u64(*k),
        }
    }
}

impl<'de> Deserialize<'de> for Shots {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Count(u64),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Count(k) => Ok(Shots::Count(k)),
            Raw::Word(w) if w == "exact" => Ok(Shots::Exact),
            Raw::Word(w) => Err(serde::de::Error::custom(format!(
                "shots must be a positive integer or \"exact\", got \"{w}\""
            ))),
        }
    }
}

impl fmt::Display for Shots {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shots::Exact => f.write_str("exact"),
            Shots::Count(k) => write!(f, "{k}"),
        }
    }
}

/// Evenly spaced grid `start, start + step, ..., <= stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub const fn new(start: f64, stop: f64, step: f64) -> Self {
        Self { start, stop, step }
    }

    pub fn count(&self) -> usize {
        ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.count())
            .map(|i| self.start + i as f64 * self.step)
            .collect()
    }

    fn validate(&self, field: &str) -> Result<(), CliError> {
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(field_error(field, "start and stop must be finite"));
        }
        if !(self.step > 0.0) {
            return Err(field_error(&format!("{field}.step"), "must be positive"));
        }
        if self.stop < self.start {
            return Err(field_error(
                &format!("{field}.stop"),
                "must not be below start",
            ));
        }
        if (self.stop - self.start) / self.step > MAX_GRID_POINTS as f64 {
            return Err(field_error(field, "more than 1e6 grid points"));
        }
        Ok(())
    }

    fn max_abs(&self) -> f64 {
        self.start.abs().max(self.stop.abs())
    }
}

fn field_error(field: &str, reason: impl Into<String>) -> CliError {
    CliError::Validation {
        field: field.to_string(),
        reason: reason.into(),
    }
}

fn default_output_path() -> String {
    "fockmet-out".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub shots: Shots,
    #[serde(default = "default_output_path")]
    pub output_path: String,
    #[serde(default)]
    pub device: DeviceParams,
    pub experiment: Experiment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Experiment {
    PrepareFock(PrepareFock),
    RamseyScan(RamseyScan),
    DisplacementSweep(DisplacementSweep),
    PhaseSweep(PhaseSweep),
    ResolvedSweep(ResolvedSweep),
    ScalingStudy(ScalingStudy),
    ToyModelStudy(ToyModelStudy),
    WignerMap(WignerMap),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::PrepareFock(_) => "prepare_fock",
            Experiment::RamseyScan(_) => "ramsey_scan",
            Experiment::DisplacementSweep(_) => "displacement_sweep",
            Experiment::PhaseSweep(_) => "phase_sweep",
            Experiment::ResolvedSweep(_) => "resolved_sweep",
            Experiment::ScalingStudy(_) => "scaling_study",
            Experiment::ToyModelStudy(_) => "toy_model_study",
            Experiment::WignerMap(_) => "wigner_map",
        }
    }

    fn uses_shots(&self) -> bool {
        matches!(
            self,
            Experiment::RamseyScan(_)
                | Experiment::DisplacementSweep(_)
                | Experiment::PhaseSweep(_)
        )
    }
}

/// Truncation of the cavity space; filled in during resolution when absent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Truncation {
    pub dim: usize,
    pub guard: usize,
}

impl Truncation {
    pub fn spec(&self) -> Result<HilbertSpec, CliError> {
        HilbertSpec::new(self.dim, self.guard)
            .map_err(|e| field_error("experiment.truncation", e.to_string()))
    }
}

impl From<HilbertSpec> for Truncation {
    fn from(s: HilbertSpec) -> Self {
        Self {
            dim: s.dim(),
            guard: s.guard(),
        }
    }
}

fn coherent_truncation(mean: f64) -> Truncation {
    let r = mean.max(0.0).sqrt();
    HilbertSpec::for_photon_number((mean + 8.0 * r + 10.0).ceil() as usize).into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrepareFock {
    pub target: usize,
    /// Real coherent amplitude of the initial state; `sqrt(target)` if absent.
    pub alpha: Option<f64>,
    /// Binary sinusoidal schedule length used when `filters` is absent.
    pub stages: usize,
    pub filters: Option<Vec<FilterSpec>>,
    pub truncation: Option<Truncation>,
}

impl Default for PrepareFock {
    fn default() -> Self {
        Self {
            target: 10,
            alpha: None,
            stages: 4,
            filters: None,
            truncation: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RamseyScan {
    pub n_values: Vec<usize>,
    pub target: usize,
    /// Conditional phase in radians.
    pub theta: Grid,
}

impl Default for RamseyScan {
    fn default() -> Self {
        Self {
            n_values: vec![30, 50, 70, 100],
            target: 0,
            theta: Grid::new(0.0, 0.5, 0.001),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DisplacementSweep {
    pub n: u32,
    pub beta: Grid,
    /// Use the closed-form noisy parity curve with the device rates.
    pub noisy: bool,
    /// Bootstrap resamples in shot mode; 0 disables the bootstrap.
    pub resamples: usize,
}

impl Default for DisplacementSweep {
    fn default() -> Self {
        Self {
            n: 4,
            beta: Grid::new(0.0, 1.0, 0.02),
            noisy: false,
            resamples: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseSweep {
    /// Probe `D(sqrt(N))|N>`.
    pub n: u32,
    /// Phase in radians.
    pub phi: Grid,
    pub resamples: usize,
}

impl Default for PhaseSweep {
    fn default() -> Self {
        Self {
            n: 4,
            phi: Grid::new(-0.5, 0.5, 0.01),
            resamples: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResolvedSweep {
    /// Mean photon number of the coherent input.
    pub n_mean: f64,
    /// Cascade depth.
    pub m: usize,
    pub beta: Grid,
    pub truncation: Option<Truncation>,
}

impl Default for ResolvedSweep {
    fn default() -> Self {
        Self {
            n_mean: 3.0,
            m: 3,
            beta: Grid::new(0.0, 1.0, 0.02),
            truncation: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingStudy {
    pub n_min: u32,
    pub n_max: u32,
    /// Photon-number window of the log-log fit.
    pub fit_min: u32,
    pub fit_max: u32,
    pub noisy: bool,
    /// Upper end of the displacement search for the Fisher maximum.
    pub beta_max: f64,
}

impl Default for ScalingStudy {
    fn default() -> Self {
        Self {
            n_min: 1,
            n_max: 40,
            fit_min: 10,
            fit_max: 40,
            noisy: false,
            beta_max: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToyModelStudy {
    pub n_max: u32,
}

impl Default for ToyModelStudy {
    fn default() -> Self {
        Self { n_max: 100 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum WignerState {
    Fock { n: u32 },
    Coherent { re: f64, im: f64 },
    DisplacedFock { n: u32, gamma: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WignerMap {
    pub state: WignerState,
    pub re: Grid,
    pub im: Grid,
    pub truncation: Option<Truncation>,
}

impl Default for WignerMap {
    fn default() -> Self {
        Self {
            state: WignerState::Fock { n: 1 },
            re: Grid::new(-2.5, 2.5, 0.125),
            im: Grid::new(-2.5, 2.5, 0.125),
            truncation: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks every field; nothing is computed or written on failure.
    pub fn validate(&self) -> Result<(), CliError> {
        self.device
            .validate()
            .map_err(|e| field_error("device", e.to_string()))?;
        if let Shots::Count(0) = self.shots {
            return Err(field_error("shots", "must be positive"));
        }
        if self.shots != Shots::Exact && !self.experiment.uses_shots() {
            return Err(field_error(
                "shots",
                format!("not used by {}; remove it", self.experiment.name()),
            ));
        }
        if self.output_path.is_empty() {
            return Err(field_error("output_path", "must not be empty"));
        }
        match &self.experiment {
            Experiment::PrepareFock(e) => {
                if let Some(a) = e.alpha {
                    if !a.is_finite() {
                        return Err(field_error("experiment.alpha", "must be finite"));
                    }
                }
                if e.filters.is_none() && !(1..=8).contains(&e.stages) {
                    return Err(field_error("experiment.stages", "must lie in 1..=8"));
                }
                if let Some(fs) = &e.filters {
                    if fs.is_empty() {
                        return Err(field_error("experiment.filters", "must not be empty"));
                    }
                    for (i, f) in fs.iter().enumerate() {
                        f.validate().map_err(|err| {
                            field_error(&format!("experiment.filters[{i}]"), err.to_string())
                        })?;
                    }
                }
                if let Some(t) = e.truncation {
                    t.spec()?;
                }
            }
            Experiment::RamseyScan(e) => {
                if e.n_values.is_empty() {
                    return Err(field_error("experiment.n_values", "must not be empty"));
                }
                if e.n_values.contains(&e.target) {
                    return Err(field_error(
                        "experiment.n_values",
                        "a Fock state at the target photon number gives a flat trace",
                    ));
                }
                e.theta.validate("experiment.theta")?;
                if e.theta.count() < 8 {
                    return Err(field_error("experiment.theta", "needs at least 8 points"));
                }
            }
            Experiment::DisplacementSweep(e) => {
                e.beta.validate("experiment.beta")?;
                check_resamples(e.resamples)?;
                if e.resamples > 0 && self.shots == Shots::Exact {
                    return Err(field_error(
                        "experiment.resamples",
                        "bootstrap needs a shot count",
                    ));
                }
            }
            Experiment::PhaseSweep(e) => {
                if e.n == 0 {
                    return Err(field_error("experiment.n", "must be at least 1"));
                }
                e.phi.validate("experiment.phi")?;
                check_resamples(e.resamples)?;
                if e.resamples > 0 && self.shots == Shots::Exact {
                    return Err(field_error(
                        "experiment.resamples",
                        "bootstrap needs a shot count",
                    ));
                }
            }
            Experiment::ResolvedSweep(e) => {
                if !(e.n_mean > 0.0 && e.n_mean.is_finite()) {
                    return Err(field_error("experiment.n_mean", "must be positive"));
                }
                if !(1..=6).contains(&e.m) {
                    return Err(field_error("experiment.m", "must lie in 1..=6"));
                }
                e.beta.validate("experiment.beta")?;
                if let Some(t) = e.truncation {
                    t.spec()?;
                }
            }
            Experiment::ScalingStudy(e) => {
                if e.n_min == 0 || e.n_max < e.n_min {
                    return Err(field_error("experiment.n_max", "need 1 <= n_min <= n_max"));
                }
                if e.fit_min < e.n_min || e.fit_max > e.n_max || e.fit_max < e.fit_min + 2 {
                    return Err(field_error(
                        "experiment.fit_min",
                        "fit window must hold at least 3 points inside [n_min, n_max]",
                    ));
                }
                if !(e.beta_max > 0.0 && e.beta_max <= 5.0) {
                    return Err(field_error("experiment.beta_max", "must lie in (0, 5]"));
                }
            }
            Experiment::ToyModelStudy(e) => {
                if e.n_max == 0 {
                    return Err(field_error("experiment.n_max", "must be at least 1"));
                }
            }
            Experiment::WignerMap(e) => {
                e.re.validate("experiment.re")?;
                e.im.validate("experiment.im")?;
                if let WignerState::Coherent { re, im } = e.state {
                    if !(re.is_finite() && im.is_finite()) {
                        return Err(field_error("experiment.state", "amplitude must be finite"));
                    }
                }
                if let Some(t) = e.truncation {
                    t.spec()?;
                }
            }
        }
        Ok(())
    }

    /// Fills every derived default so the echo is self-contained.
    pub fn resolved(&self) -> Result<Self, CliError> {
        let mut out = self.clone();
        match &mut out.experiment {
            Experiment::PrepareFock(e) => {
                let alpha = *e.alpha.get_or_insert((e.target as f64).sqrt());
                if e.filters.is_none() {
                    e.filters = Some(binary_sinusoidal_schedule(e.target, e.stages));
                }
                if e.truncation.is_none() {
                    let mean = (alpha * alpha).max(e.target as f64);
                    e.truncation = Some(coherent_truncation(mean));
                }
            }
            Experiment::ResolvedSweep(e) => {
                if e.truncation.is_none() {
                    e.truncation = Some(coherent_truncation(e.n_mean));
                }
            }
            Experiment::WignerMap(e) if e.truncation.is_none() => {
                let reach = e.re.max_abs().hypot(e.im.max_abs());
                let (n, beta) = match e.state {
                    WignerState::Fock { n } => (n, reach),
                    WignerState::Coherent { re, im } => (0, re.hypot(im) + reach),
                    WignerState::DisplacedFock { n, gamma } => (n, gamma.abs() + reach),
                };
                let spec = fockmet_core::noise::displaced_fock_space(n, beta)
                    .map_err(|err| field_error("experiment.truncation", err.to_string()))?;
                e.truncation = Some(spec.into());
            }
            _ => {}
        }
        Ok(out)
    }

    /// `--out` beats the environment variable, which beats `output_path`.
    pub fn output_dir(&self, cli_out: Option<&Path>, env_out: Option<&str>) -> PathBuf {
        match (cli_out, env_out) {
            (Some(p), _) => p.to_path_buf(),
            (None, Some(e)) if !e.is_empty() => PathBuf::from(e),
            _ => PathBuf::from(&self.output_path),
        }
    }
}

fn check_resamples(r: usize) -> Result<(), CliError> {
    if r != 0 && r < fockmet_core::estimation::MIN_RESAMPLES {
        return Err(field_error(
            "experiment.resamples",
            format!(
                "must be 0 or at least {}",
                fockmet_core::estimation::MIN_RESAMPLES
            ),
        ));
    }
    Ok(())
}
