//! Run configuration (TOML).
//!
//! Every section is optional and falls back to the defaults below; unknown
//! keys are rejected. Relative curve paths resolve against the directory of
//! the config file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::analysis::{Axis, BandSelection, Binning, DelayScanOptions};
use crate::eventgen::{SimConfig, Smear};
use crate::fitting::ExpFitOptions;
use crate::model::{BandSpec, ModelError, PathwayModel};
use crate::pathways::{BandParity, XuvSpectrum};
use crate::potentials::{CouplingModel, H2PlusCurves, IrFieldParams};
use crate::units::oscillation_period;
use crate::wkb::DEFAULT_R_MAX;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid `{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        message: message.into(),
    }
}

/// Potential-curve source: `"embedded"`, `"analytic"`, or a pair of files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CurveSource {
    Named(String),
    Files { ground: PathBuf, excited: PathBuf },
}

impl Default for CurveSource {
    fn default() -> Self {
        CurveSource::Named("embedded".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsConfig {
    pub photon_energy_ev: f64,
    pub intensity_w_cm2: f64,
    pub curves: CurveSource,
    pub coupling: CouplingModel,
    /// Outer integration limit of the phase integrals, a.u.
    pub r_max_au: f64,
    pub ker_max_ev: f64,
    /// Spacing of the KER grid on which nuclear phases are tabulated.
    pub phase_grid_step_ev: f64,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        let ir = IrFieldParams::default();
        Self {
            photon_energy_ev: ir.photon_energy_ev,
            intensity_w_cm2: ir.intensity_w_cm2,
            curves: CurveSource::default(),
            coupling: CouplingModel::default(),
            r_max_au: DEFAULT_R_MAX,
            ker_max_ev: 2.0,
            phase_grid_step_ev: 0.02,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicConfig {
    pub order: u32,
    #[serde(default = "one")]
    pub magnitude: f64,
    #[serde(default)]
    pub phase: f64,
}

fn one() -> f64 {
    1.0
}

/// Harmonic comb. Either an explicit `harmonics` list or `first_order` plus
/// the phase steps φ_q − φ_{q−2} of successive pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct XuvConfig {
    pub first_order: u32,
    pub chirp_steps: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub harmonics: Option<Vec<HarmonicConfig>>,
}

impl Default for XuvConfig {
    fn default() -> Self {
        Self {
            first_order: 15,
            chirp_steps: vec![0.0; 6],
            harmonics: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DelayConfig {
    pub count: usize,
    /// Number of π/ω periods covered by the uniform grid.
    pub periods: f64,
    pub start_fs: f64,
    /// Explicit delays; overrides the uniform grid when present.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values_fs: Option<Vec<f64>>,
}

impl Default for DelayConfig {
    fn default() -> Self {
        Self {
            count: 32,
            periods: 1.0,
            start_fs: 0.0,
            values_fs: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationConfig {
    pub events: u64,
    pub seed: u64,
    pub delays: DelayConfig,
    pub smear: Smear,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            events: 1_000_000,
            seed: 1,
            delays: DelayConfig::default(),
            smear: Smear::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    pub ker_bin_ev: f64,
    pub ker_max_ev: f64,
    pub ee_bin_ev: f64,
    pub ee_max_ev: f64,
    /// Half-width of the diagonal band windows in KER + E_e.
    pub half_width_ev: f64,
    /// Bins below this count are left out of exponential fits.
    pub min_count: f64,
    pub refine_exponential: bool,
    pub fit_range_ev: [f64; 2],
    /// KER at which delay oscillations are fitted for the summary.
    pub fit_ker_ev: f64,
    pub subtract_mean: bool,
    /// Align same-parity bands with the chirp recovered from the even bands.
    pub align: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            ker_bin_ev: 0.05,
            ker_max_ev: 2.0,
            ee_bin_ev: 0.1,
            ee_max_ev: 12.0,
            half_width_ev: 0.35,
            min_count: 5.0,
            refine_exponential: false,
            fit_range_ev: [0.0, 0.35],
            fit_ker_ev: 0.6,
            subtract_mean: false,
            align: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: PathBuf,
    /// Also write the events as CSV next to the binary file.
    pub events_csv: bool,
    /// Delay samples per period in model maps.
    pub model_delays: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            events_csv: false,
            model_delays: 32,
        }
    }
}

pub fn default_bands() -> Vec<BandSpec> {
    let mut bands = Vec::new();
    for parity in [BandParity::Odd, BandParity::Even] {
        for order in [19, 21, 23, 25] {
            bands.push(BandSpec::new(parity, order));
        }
    }
    bands
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub physics: PhysicsConfig,
    #[serde(default)]
    pub xuv: XuvConfig,
    #[serde(default = "default_bands")]
    pub bands: Vec<BandSpec>,
    #[serde(default)]
    pub simulation: SimulationConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub output: OutputConfig,
    /// Directory used to resolve relative paths; not part of the file.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            physics: PhysicsConfig::default(),
            xuv: XuvConfig::default(),
            bands: default_bands(),
            simulation: SimulationConfig::default(),
            analysis: AnalysisConfig::default(),
            output: OutputConfig::default(),
            base_dir: None,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg: RunConfig = toml::from_str(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        match &self.base_dir {
            Some(base) if p.is_relative() => base.join(p),
            _ => p.to_path_buf(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let ph = &self.physics;
        self.ir()?;
        match &ph.curves {
            CurveSource::Named(n) if n == "embedded" || n == "analytic" => {}
            CurveSource::Named(n) => {
                return Err(invalid(
                    "physics.curves",
                    format!("unknown source {n:?}; use \"embedded\", \"analytic\" or {{ ground, excited }}"),
                ))
            }
            CurveSource::Files { ground, excited } => {
                for p in [ground, excited] {
                    let r = self.resolve(p);
                    if !r.is_file() {
                        return Err(invalid("physics.curves", format!("{} does not exist", r.display())));
                    }
                }
            }
        }
        if !(ph.r_max_au > 10.0) {
            return Err(invalid("physics.r_max_au", "must exceed 10 a.u."));
        }
        if !(ph.ker_max_ev > 0.0) {
            return Err(invalid("physics.ker_max_ev", "must be positive"));
        }
        if !(ph.phase_grid_step_ev > 0.0 && ph.phase_grid_step_ev <= ph.ker_max_ev) {
            return Err(invalid("physics.phase_grid_step_ev", "must lie in (0, ker_max_ev]"));
        }
        self.xuv()?;
        if self.bands.is_empty() {
            return Err(invalid("bands", "at least one band is required"));
        }
        let sim = &self.simulation;
        if sim.events == 0 {
            return Err(invalid("simulation.events", "must be positive"));
        }
        self.delays_fs()?;
        if !(sim.smear.electron >= 0.0 && sim.smear.ion >= 0.0) {
            return Err(invalid("simulation.smear", "widths must be non-negative"));
        }
        let an = &self.analysis;
        self.binning()?;
        if !(an.half_width_ev > 0.0 && an.half_width_ev < ph.photon_energy_ev / 2.0) {
            return Err(invalid("analysis.half_width_ev", "must lie in (0, ħω/2)"));
        }
        if !(an.fit_range_ev[0] < an.fit_range_ev[1]) {
            return Err(invalid("analysis.fit_range_ev", "lower bound must be below upper"));
        }
        if !(an.min_count >= 0.0) {
            return Err(invalid("analysis.min_count", "must be non-negative"));
        }
        if self.output.model_delays < 8 {
            return Err(invalid("output.model_delays", "need at least 8"));
        }
        Ok(())
    }

    pub fn ir(&self) -> Result<IrFieldParams, ConfigError> {
        IrFieldParams::new(self.physics.photon_energy_ev, self.physics.intensity_w_cm2)
            .map_err(|e| invalid("physics", e.to_string()))
    }

    pub fn curves(&self) -> Result<H2PlusCurves, ConfigError> {
        match &self.physics.curves {
            CurveSource::Named(n) if n == "analytic" => Ok(H2PlusCurves::analytic_fallback()),
            CurveSource::Named(_) => Ok(H2PlusCurves::embedded()),
            CurveSource::Files { ground, excited } => {
                H2PlusCurves::from_files(&self.resolve(ground), &self.resolve(excited))
                    .map_err(|e| invalid("physics.curves", e.to_string()))
            }
        }
    }

    pub fn xuv(&self) -> Result<XuvSpectrum, ConfigError> {
        let hw = self.physics.photon_energy_ev;
        let r = match &self.xuv.harmonics {
            Some(list) => {
                let triples: Vec<(u32, f64, f64)> =
                    list.iter().map(|h| (h.order, h.magnitude, h.phase)).collect();
                XuvSpectrum::new(hw, &triples)
            }
            None => XuvSpectrum::from_chirp(hw, self.xuv.first_order, &self.xuv.chirp_steps),
        };
        r.map_err(|e| invalid("xuv", e.to_string()))
    }

    pub fn delays_fs(&self) -> Result<Vec<f64>, ConfigError> {
        let d = &self.simulation.delays;
        let delays = match &d.values_fs {
            Some(v) => v.clone(),
            None => {
                if d.count == 0 || !(d.periods > 0.0) {
                    return Err(invalid("simulation.delays", "count and periods must be positive"));
                }
                let step = d.periods * oscillation_period(self.physics.photon_energy_ev) / d.count as f64;
                (0..d.count).map(|k| d.start_fs + k as f64 * step).collect()
            }
        };
        if delays.is_empty() || delays.iter().any(|t| !t.is_finite()) {
            return Err(invalid("simulation.delays", "need finite delays"));
        }
        if delays.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("simulation.delays.values_fs", "must be strictly increasing"));
        }
        Ok(delays)
    }

    pub fn sim_config(&self) -> Result<SimConfig, ConfigError> {
        Ok(SimConfig {
            delays_fs: self.delays_fs()?,
            events_total: self.simulation.events,
            smear: self.simulation.smear,
            seed: self.simulation.seed,
        })
    }

    pub fn binning(&self) -> Result<Binning, ConfigError> {
        let a = &self.analysis;
        let ker = Axis::with_width(0.0, a.ker_max_ev, a.ker_bin_ev)
            .map_err(|e| invalid("analysis.ker_bin_ev", e.to_string()))?;
        let ee = Axis::with_width(0.0, a.ee_max_ev, a.ee_bin_ev)
            .map_err(|e| invalid("analysis.ee_bin_ev", e.to_string()))?;
        Ok(Binning { ker, ee })
    }

    /// Analysis windows for the configured bands, without duplicates.
    pub fn band_selections(&self) -> Result<Vec<BandSelection>, ConfigError> {
        let mut out: Vec<BandSelection> = Vec::new();
        for b in &self.bands {
            if out.iter().any(|s| s.parity == b.parity && s.order == b.order) {
                continue;
            }
            out.push(
                BandSelection::new(b.parity, b.order, self.physics.photon_energy_ev, self.analysis.half_width_ev)
                    .map_err(|e| invalid("bands", e.to_string()))?,
            );
        }
        Ok(out)
    }

    pub fn scan_options(&self) -> Result<DelayScanOptions, ConfigError> {
        Ok(DelayScanOptions {
            ker: self.binning()?.ker,
            photon_energy_ev: self.physics.photon_energy_ev,
            subtract_mean: self.analysis.subtract_mean,
        })
    }

    pub fn exp_fit_options(&self) -> ExpFitOptions {
        ExpFitOptions {
            min_count: self.analysis.min_count,
            refine: self.analysis.refine_exponential,
        }
    }

    /// Compute nuclear phases and assemble the band model.
    pub fn build_model(&self) -> Result<PathwayModel, ConfigError> {
        let ph = &self.physics;
        Ok(PathwayModel::build(
            &self.curves()?,
            &self.ir()?,
            &ph.coupling,
            self.xuv()?,
            self.bands.clone(),
            ph.ker_max_ev,
            ph.phase_grid_step_ev,
            ph.r_max_au,
        )?)
    }

    /// Canonical TOML rendering of the resolved configuration.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// First eight bytes of SHA-256 over the canonical rendering.
    pub fn hash(&self) -> u64 {
        let digest = Sha256::digest(self.canonical().as_bytes());
        u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
    }
}
