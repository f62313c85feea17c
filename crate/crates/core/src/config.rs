//! Scenario and phase-noise model files.
//!
//! Both are TOML. A PSD file describes one oscillator:
//!
//! ```toml
//! variant = "pll"
//! l0_dbchz = -105.0
//! l_floor_dbchz = -155.0
//! f_corner_hz = 1.0e4
//! b_pll_hz = 1.5e5
//! gamma_db = 0.0        # optional
//! ```
//!
//! or `variant = "pole-zero"` with `psd0_dbchz`, `zeros` and `poles`
//! (arrays of `{ freq_hz, exponent }`). A scenario file holds a
//! `[waveform]` table, `[pn]` model references, `[[targets]]` and run
//! settings; see the files under `data/scenarios`.

use std::path::{Path as FsPath, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{derive_psi, Architecture, Path, PathSet, PnApplication, PnMode};
use crate::error::{Error, Result};
use crate::ofdm::WaveformConfig;
use crate::pn_model::{Corner, PllPsdParams, PnPsdModel, PoleZeroPsdParams};
use crate::radar::{Axis, WindowSpec};
use crate::{from_db10, C0};

/// Model files shipped with the crate, by name.
pub const BUILTIN_PSD: [(&str, &str); 3] = [
    ("pll-reference", include_str!("../data/pn/pll_reference.toml")),
    ("tr38803-gnb", include_str!("../data/pn/tr38803_gnb.toml")),
    ("tr38803-ue", include_str!("../data/pn/tr38803_ue.toml")),
];

/// Scenario files shipped with the crate, by id.
pub const BUILTIN_SCENARIOS: [(&str, &str); 4] = [
    ("scenario1", include_str!("../data/scenarios/scenario1.toml")),
    ("scenario2", include_str!("../data/scenarios/scenario2.toml")),
    ("scenario3", include_str!("../data/scenarios/scenario3.toml")),
    ("scenario4", include_str!("../data/scenarios/scenario4.toml")),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum PsdShape {
    Pll { l0_dbchz: f64, l_floor_dbchz: f64, f_corner_hz: f64, b_pll_hz: f64 },
    PoleZero { psd0_dbchz: f64, zeros: Vec<Corner>, poles: Vec<Corner> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdFile {
    #[serde(flatten)]
    pub shape: PsdShape,
    #[serde(default)]
    pub gamma_db: f64,
    /// `false` marks coefficients that have not been checked against their
    /// source.
    #[serde(default = "yes")]
    pub verified: bool,
}

fn yes() -> bool {
    true
}

impl PsdFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_model(&self) -> Result<PnPsdModel> {
        let base = match &self.shape {
            PsdShape::Pll { l0_dbchz, l_floor_dbchz, f_corner_hz, b_pll_hz } => PnPsdModel::Pll(PllPsdParams::new(
                from_db10(*l0_dbchz),
                from_db10(*l_floor_dbchz),
                *f_corner_hz,
                *b_pll_hz,
            )?),
            PsdShape::PoleZero { psd0_dbchz, zeros, poles } => {
                PnPsdModel::PoleZero(PoleZeroPsdParams::new(from_db10(*psd0_dbchz), zeros.clone(), poles.clone())?)
            }
        };
        Ok(if self.gamma_db == 0.0 { base } else { base.scaled_db(self.gamma_db) })
    }
}

/// A PSD model with the provenance flag of the file it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedPsd {
    pub name: String,
    pub model: PnPsdModel,
    pub verified: bool,
}

/// Resolves a built-in model name or a path to a PSD file. Relative paths
/// are taken from `base_dir` when given.
pub fn load_psd(reference: &str, base_dir: Option<&FsPath>) -> Result<LoadedPsd> {
    let text = match BUILTIN_PSD.iter().find(|(name, _)| *name == reference) {
        Some((_, text)) => text.to_string(),
        None => {
            let mut p = PathBuf::from(reference);
            if p.is_relative() {
                if let Some(dir) = base_dir {
                    p = dir.join(p);
                }
            }
            std::fs::read_to_string(&p)
                .map_err(|e| Error::Config(format!("cannot read PSD model `{}`: {e}", p.display())))?
        }
    };
    let file = PsdFile::parse(&text)?;
    Ok(LoadedPsd { name: reference.to_string(), model: file.to_model()?, verified: file.verified })
}

/// Reference PLL model.
pub fn reference_pll() -> PnPsdModel {
    load_psd("pll-reference", None).expect("built-in model parses").model
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CpeCorrection {
    #[default]
    Off,
    /// Least-squares phase over all subcarriers of each symbol.
    FullFrame,
    /// Phase of the range-bin-0 peak of each symbol's impulse response.
    ReferencePath,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PnRefs {
    pub tx: String,
    /// Defaults to `tx`.
    pub rx: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    #[serde(default)]
    pub range_m: f64,
    pub doppler_hz: Option<f64>,
    /// Doppler shift as a fraction of the subcarrier spacing; used when
    /// `doppler_hz` is absent.
    pub doppler_over_delta_f: Option<f64>,
    #[serde(default)]
    pub gain_db: f64,
    /// Aggregate phase. Derived from the carrier and delay when absent.
    pub phase_rad: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    #[serde(default = "rect")]
    pub range: String,
    #[serde(default = "rect")]
    pub doppler: String,
}

fn rect() -> String {
    "rectangular".into()
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self { range: rect(), doppler: rect() }
    }
}

/// Parses `rectangular` or `chebyshev-<dB>`.
pub fn parse_window(text: &str, axis: Axis) -> Result<WindowSpec> {
    let t = text.trim().to_ascii_lowercase();
    if t == "rectangular" || t == "rect" {
        return Ok(WindowSpec::rectangular(axis));
    }
    if let Some(db) = t.strip_prefix("chebyshev-").or_else(|| t.strip_prefix("cheb-")) {
        let db: f64 = db.trim_end_matches("db").parse().map_err(|_| Error::Config(format!("bad window `{text}`")))?;
        if !(db > 0.0) {
            return Err(Error::Config("Chebyshev attenuation must be positive".into()));
        }
        return Ok(WindowSpec::chebyshev(axis, db));
    }
    Err(Error::Config(format!("unknown window `{text}`")))
}

fn default_realizations() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub id: String,
    pub waveform: WaveformConfig,
    pub pn: PnRefs,
    /// Extra power factor applied to both oscillators. `-inf` disables
    /// phase noise.
    #[serde(default)]
    pub gamma_db: f64,
    pub architecture: Architecture,
    #[serde(default)]
    pub targets: Vec<TargetConfig>,
    #[serde(default)]
    pub windows: WindowConfig,
    #[serde(default)]
    pub cpe_correction: CpeCorrection,
    #[serde(default)]
    pub pn_application: PnApplication,
    #[serde(default = "default_realizations")]
    pub n_realizations: usize,
    #[serde(default)]
    pub seed: u64,
}

/// Target after snapping to the delay grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnappedTarget {
    pub requested_range_m: f64,
    pub range_m: f64,
    pub delay_samples: usize,
    pub doppler_hz: f64,
}

/// Fully resolved scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub id: String,
    pub waveform: WaveformConfig,
    pub tx: LoadedPsd,
    pub rx: LoadedPsd,
    pub gamma_db: f64,
    pub pn: PnMode,
    pub paths: PathSet,
    pub targets: Vec<SnappedTarget>,
    pub window_range: WindowSpec,
    pub window_doppler: WindowSpec,
    pub cpe_correction: CpeCorrection,
    pub pn_application: PnApplication,
    pub n_realizations: usize,
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &FsPath) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read `{}`: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn builtin(id: &str) -> Result<Self> {
        let (_, text) = BUILTIN_SCENARIOS
            .iter()
            .find(|(name, _)| *name == id)
            .ok_or_else(|| Error::Config(format!("no built-in scenario `{id}`")))?;
        Self::parse(text)
    }

    /// Loads models, snaps targets to the delay grid and checks every
    /// module precondition.
    pub fn resolve(&self, base_dir: Option<&FsPath>) -> Result<Scenario> {
        let w = self.waveform;
        w.validate()?;
        if self.n_realizations == 0 {
            return Err(Error::Config("n_realizations must be positive".into()));
        }
        if self.gamma_db.is_nan() || self.gamma_db == f64::INFINITY {
            return Err(Error::Config("gamma_db must be finite or -inf".into()));
        }
        let tx = load_psd(&self.pn.tx, base_dir)?;
        let rx = load_psd(self.pn.rx.as_deref().unwrap_or(&self.pn.tx), base_dir)?;
        let scaled = |m: &PnPsdModel| m.clone().scaled_db(self.gamma_db);
        let pn = match self.architecture {
            Architecture::Monostatic => {
                if tx.model != rx.model {
                    return Err(Error::Config(
                        "monostatic scenarios share one oscillator; tx and rx must match".into(),
                    ));
                }
                PnMode::Monostatic(scaled(&tx.model))
            }
            Architecture::Bistatic => PnMode::Bistatic { tx: scaled(&tx.model), rx: scaled(&rx.model) },
        };

        if self.targets.is_empty() {
            return Err(Error::Config("scenario has no targets".into()));
        }
        let dr = self.architecture.range_resolution(w.bandwidth_hz);
        let mut targets = Vec::with_capacity(self.targets.len());
        let mut paths = Vec::with_capacity(self.targets.len());
        for t in &self.targets {
            if !(t.range_m.is_finite() && t.range_m >= 0.0) {
                return Err(Error::Config(format!("target range {} m is not a non-negative number", t.range_m)));
            }
            let delay_samples = (t.range_m / dr).round() as usize;
            let doppler_hz = match (t.doppler_hz, t.doppler_over_delta_f) {
                (Some(hz), _) => hz,
                (None, Some(r)) => r * w.subcarrier_spacing(),
                (None, None) => 0.0,
            };
            let tau = delay_samples as f64 / w.bandwidth_hz;
            let phase_rad = t.phase_rad.unwrap_or_else(|| derive_psi(0.0, 0.0, w.carrier_hz, tau));
            paths.push(Path {
                gain: num_complex::Complex64::new(10f64.powf(t.gain_db / 20.0), 0.0),
                delay_samples,
                doppler_hz,
                phase_rad,
            });
            targets.push(SnappedTarget {
                requested_range_m: t.range_m,
                range_m: delay_samples as f64 * dr,
                delay_samples,
                doppler_hz,
            });
        }
        let paths = PathSet { architecture: self.architecture, paths };
        paths.validate(&w)?;

        Ok(Scenario {
            id: self.id.clone(),
            waveform: w,
            tx,
            rx,
            gamma_db: self.gamma_db,
            pn,
            paths,
            targets,
            window_range: parse_window(&self.windows.range, Axis::Range)?,
            window_doppler: parse_window(&self.windows.doppler, Axis::Doppler)?,
            cpe_correction: self.cpe_correction,
            pn_application: self.pn_application,
            n_realizations: self.n_realizations,
            seed: self.seed,
        })
    }
}

/// Delay of a path of `range_m` in seconds under the architecture's range
/// convention.
pub fn range_to_delay_s(range_m: f64, architecture: Architecture) -> f64 {
    match architecture {
        Architecture::Monostatic => 2.0 * range_m / C0,
        Architecture::Bistatic => range_m / C0,
    }
}
