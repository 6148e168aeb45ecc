//! Experiment configuration: a TOML (or JSON) document with unit-suffixed keys.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use oamswap::measurement::{BackgroundRates, PairRates, Subspace};
use oamswap::state::SpiralSpectrum;
use oamswap::tomography::ReconstructorRegistry;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    #[serde(default = "default_truncation")]
    pub truncation: u32,
    /// Reconstructor name, looked up in the registry.
    #[serde(default = "default_method")]
    pub method: String,
    /// Where reports go; not part of the resolved config.
    #[serde(default, skip_serializing)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub spectrum: SpectrumConfig,
    #[serde(default)]
    pub source: SourceConfig,
    #[serde(default)]
    pub background: BackgroundConfig,
    #[serde(default)]
    pub tomography: TomographyConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub hom: HomConfig,
    #[serde(default)]
    pub purify: PurifyConfig,
    #[serde(default)]
    pub assemble: AssembleConfig,
}

fn default_truncation() -> u32 {
    2
}

fn default_method() -> String {
    "mle".into()
}

/// `c_l` for `l = 0, 1, ...`; phases default to zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    pub coefficients: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub phases_rad: Vec<f64>,
}

impl Default for SpectrumConfig {
    // |c1|^4 : |c2|^4 = 4 : 1, the ratio of the l = ±1 and ±2 count rates
    fn default() -> Self {
        Self { coefficients: vec![0.0, 1.0, std::f64::consts::FRAC_1_SQRT_2], phases_rad: Vec::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub visibility: f64,
    /// Mean four-fold rate per setting in the most strongly populated subspace.
    pub fourfold_rate_hz: f64,
    /// Acquisition time per setting.
    pub duration_s: f64,
    pub rep_rate_hz: f64,
}

impl Default for SourceConfig {
    fn default() -> Self {
        Self { visibility: 0.71, fourfold_rate_hz: 4.0, duration_s: 100.0, rep_rate_hz: 80e6 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackgroundConfig {
    #[serde(default)]
    pub singles_hz: [f64; 4],
    #[serde(default)]
    pub pair_ab_hz: f64,
    #[serde(default)]
    pub pair_cd_hz: f64,
    #[serde(default)]
    pub pair_ac_hz: f64,
    #[serde(default)]
    pub pair_bd_hz: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TomographyConfig {
    pub subspaces: Vec<Subspace>,
    pub bootstrap_resamples: usize,
}

impl Default for TomographyConfig {
    fn default() -> Self {
        Self { subspaces: Subspace::standard_six().to_vec(), bootstrap_resamples: 100 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub visibilities: Vec<f64>,
    /// Also simulate tomography at each grid point on this subspace.
    pub simulate: bool,
    pub subspace: Subspace,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            visibilities: (0..=10).map(|i| i as f64 / 10.0).collect(),
            simulate: true,
            subspace: Subspace::new(-1, 1).expect("distinct"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomConfig {
    pub center_um: f64,
    pub width_um: f64,
    pub visibility: f64,
    pub baseline_counts: f64,
    pub start_um: f64,
    pub stop_um: f64,
    pub points: usize,
    pub poisson_noise: bool,
}

impl Default for HomConfig {
    fn default() -> Self {
        Self {
            center_um: 11.42,
            width_um: 8.0,
            visibility: 0.71,
            baseline_counts: 400.0,
            start_um: -30.0,
            stop_um: 50.0,
            points: 50,
            poisson_noise: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PurifyConfig {
    /// Orders `n = 1..=N` of the singlet superposition filter.
    pub filter_orders: u32,
    /// Use the single BC singlet on these modes instead of the superposition.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter_singlet: Option<Subspace>,
}

impl Default for PurifyConfig {
    fn default() -> Self {
        Self { filter_orders: 2, filter_singlet: None }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssembleConfig {
    /// Six matrix files in the order of the standard subspaces; empty means
    /// simulate them.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub matrix_files: Vec<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: Self = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        } else {
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        self.spectrum()?;
        ReconstructorRegistry::default().get(&self.method).map_err(CliError::config)?;
        if self.truncation == 0 {
            return bad("truncation must be at least 1".into());
        }
        let s = &self.source;
        if !(0.0..=1.0).contains(&s.visibility) {
            return bad(format!("source.visibility {} outside [0, 1]", s.visibility));
        }
        for (name, v) in [("source.fourfold_rate_hz", s.fourfold_rate_hz), ("source.duration_s", s.duration_s)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        self.background_rates()?;
        for sub in &self.tomography.subspaces {
            sub.check_truncation(self.truncation).map_err(CliError::config)?;
        }
        if self.tomography.subspaces.is_empty() {
            return bad("tomography.subspaces is empty".into());
        }
        if self.tomography.bootstrap_resamples < oamswap::tomography::MIN_RESAMPLES {
            return bad(format!(
                "tomography.bootstrap_resamples must be at least {}",
                oamswap::tomography::MIN_RESAMPLES
            ));
        }
        if self.sweep.visibilities.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return bad("sweep.visibilities must lie in [0, 1]".into());
        }
        self.sweep.subspace.check_truncation(self.truncation).map_err(CliError::config)?;
        let h = &self.hom;
        if !(h.width_um > 0.0) || !(0.0..=1.0).contains(&h.visibility) || !(h.baseline_counts > 0.0) {
            return bad("hom needs width_um > 0, visibility in [0, 1] and baseline_counts > 0".into());
        }
        if h.points < 5 || !(h.stop_um > h.start_um) {
            return bad("hom scan needs at least 5 points and stop_um > start_um".into());
        }
        if self.purify.filter_orders == 0 || self.purify.filter_orders > self.truncation {
            return bad(format!(
                "purify.filter_orders must be in 1..={} (the truncation)",
                self.truncation
            ));
        }
        if !self.assemble.matrix_files.is_empty() && self.assemble.matrix_files.len() != 6 {
            return bad("assemble.matrix_files needs exactly six entries".into());
        }
        Ok(())
    }

    pub fn spectrum(&self) -> Result<SpiralSpectrum, CliError> {
        let c = &self.spectrum.coefficients;
        let phases = &self.spectrum.phases_rad;
        if !phases.is_empty() && phases.len() != c.len() {
            return Err(CliError::Config("spectrum.phases_rad must match coefficients in length".into()));
        }
        if c.len() as u32 > self.truncation + 1 {
            return Err(CliError::Config(format!(
                "spectrum has orders beyond the truncation {}",
                self.truncation
            )));
        }
        let coeffs = c.iter().enumerate().map(|(l, &r)| {
            let phase = phases.get(l).copied().unwrap_or(0.0);
            (l as u32, Complex64::from_polar(r, phase))
        });
        SpiralSpectrum::new(coeffs).and_then(|s| s.normalized()).map_err(CliError::config)
    }

    pub fn background_rates(&self) -> Result<BackgroundRates, CliError> {
        let b = &self.background;
        let rates = BackgroundRates {
            singles_hz: b.singles_hz,
            pairs: PairRates { ab_hz: b.pair_ab_hz, cd_hz: b.pair_cd_hz, ac_hz: b.pair_ac_hz, bd_hz: b.pair_bd_hz },
            rep_rate_hz: self.source.rep_rate_hz,
        };
        rates.validate().map_err(CliError::config)?;
        Ok(rates)
    }
}
