//! Multipath channel with Doppler and oscillator phase noise.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::ofdm::{TimeFrame, WaveformConfig};
use crate::pn_model::PnPsdModel;
use crate::pn_synth::{delayed_view, synthesize_with, PnRealization, SynthOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    Monostatic,
    Bistatic,
}

impl Architecture {
    /// Range covered by one delay sample at bandwidth `b` (m).
    pub fn range_resolution(self, bandwidth_hz: f64) -> f64 {
        match self {
            Self::Monostatic => crate::C0 / (2.0 * bandwidth_hz),
            Self::Bistatic => crate::C0 / bandwidth_hz,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Monostatic => "monostatic",
            Self::Bistatic => "bistatic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Path {
    /// Linear complex amplitude.
    pub gain: Complex64,
    /// Propagation delay in samples at rate `B`.
    pub delay_samples: usize,
    pub doppler_hz: f64,
    /// Aggregate carrier and oscillator phase (rad).
    pub phase_rad: f64,
}

impl Path {
    pub fn unit(delay_samples: usize, doppler_hz: f64) -> Self {
        Self { gain: Complex64::new(1.0, 0.0), delay_samples, doppler_hz, phase_rad: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    pub architecture: Architecture,
    pub paths: Vec<Path>,
}

impl PathSet {
    pub fn single(architecture: Architecture, path: Path) -> Self {
        Self { architecture, paths: vec![path] }
    }

    pub fn max_delay(&self) -> usize {
        self.paths.iter().map(|p| p.delay_samples).max().unwrap_or(0)
    }

    /// Checks path parameters against `cfg`. Returns a warning for delays
    /// longer than the cyclic prefix, which cause inter-symbol interference.
    pub fn validate(&self, cfg: &WaveformConfig) -> Result<Option<String>> {
        for p in &self.paths {
            if !(p.gain.re.is_finite() && p.gain.im.is_finite() && p.phase_rad.is_finite()) {
                return domain("path gain and phase must be finite");
            }
            if !p.doppler_hz.is_finite() || p.doppler_hz.abs() > cfg.bandwidth_hz / 2.0 {
                return domain(format!("Doppler shift {} Hz outside ±B/2", p.doppler_hz));
            }
        }
        let longest = self.max_delay();
        Ok((longest > cfg.cp_length)
            .then(|| format!("path delay of {longest} samples exceeds the {}-sample cyclic prefix", cfg.cp_length)))
    }
}

/// How the phase noise of the two link ends is generated.
#[derive(Debug, Clone, PartialEq)]
pub enum PnMode {
    None,
    /// One oscillator shared by transmitter and receiver.
    Monostatic(PnPsdModel),
    Bistatic {
        tx: PnPsdModel,
        rx: PnPsdModel,
    },
}

/// How a phase error `Δθ` multiplies the signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PnApplication {
    /// `e^{jΔθ}`
    #[default]
    Exact,
    /// `1 + jΔθ`
    SmallAngle,
}

impl PnApplication {
    #[inline]
    fn factor(self, dtheta: f64) -> Complex64 {
        match self {
            Self::Exact => Complex64::from_polar(1.0, dtheta),
            Self::SmallAngle => Complex64::new(1.0, dtheta),
        }
    }
}

/// Phase-noise realizations covering one frame.
///
/// Sample `s` of the frame sees receive phase `rx[lead + s]` and, through a
/// path of delay `d`, transmit phase `tx[lead + s - d]`.
#[derive(Debug, Clone)]
pub struct PnTrack {
    pub tx: PnRealization,
    /// `None` when the receiver shares the transmit oscillator.
    pub rx: Option<PnRealization>,
    pub lead: usize,
    pub len: usize,
}

impl PnTrack {
    /// Draws realizations for `frame_len` samples with `lead` samples of
    /// history for delayed transmit phase. Returns `None` for [`PnMode::None`].
    pub fn draw(
        mode: &PnMode,
        sample_rate: f64,
        frame_len: usize,
        lead: usize,
        seed: u64,
        opts: &SynthOptions,
    ) -> Result<Option<Self>> {
        let total = frame_len + lead;
        let track = match mode {
            PnMode::None => return Ok(None),
            PnMode::Monostatic(model) => {
                Self { tx: synthesize_with(model, sample_rate, total, seed, opts)?, rx: None, lead, len: frame_len }
            }
            PnMode::Bistatic { tx, rx } => Self {
                tx: synthesize_with(tx, sample_rate, total, seed, opts)?,
                rx: Some(synthesize_with(rx, sample_rate, total, derive_seed(seed, 1), opts)?),
                lead,
                len: frame_len,
            },
        };
        Ok(Some(track))
    }

    /// Transmit phase seen through a path of `delay` samples, aligned with
    /// the frame's output samples.
    pub fn tx_delayed(&self, delay: usize) -> Result<&[f64]> {
        delayed_view(&self.tx, delay, self.lead, self.len)
    }

    pub fn rx_phase(&self) -> &[f64] {
        let r = self.rx.as_ref().unwrap_or(&self.tx);
        &r.samples[self.lead..self.lead + self.len]
    }

    /// `θ_tx[s - delay] - θ_rx[s]` for every frame sample.
    pub fn phase_error(&self, delay: usize) -> Result<Vec<f64>> {
        Ok(self.tx_delayed(delay)?.iter().zip(self.rx_phase()).map(|(t, r)| t - r).collect())
    }
}

/// Independent stream seed derived from a base seed (SplitMix64 finalizer).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Wraps an angle to `(-π, π]`.
pub fn wrap_phase(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// Aggregate path phase `ψ_tx - ψ_rx - 2π f_c τ`, wrapped to `(-π, π]`.
pub fn derive_psi(psi_tx: f64, psi_rx: f64, fc: f64, tau: f64) -> f64 {
    wrap_phase(psi_tx - psi_rx - 2.0 * PI * fc * tau)
}

/// Applies `paths` to `t` with phase noise drawn from `pn` using `seed`.
pub fn apply_channel(t: &TimeFrame, paths: &PathSet, pn: &PnMode, seed: u64) -> Result<TimeFrame> {
    let track =
        PnTrack::draw(pn, t.config.sample_rate(), t.samples.len(), paths.max_delay(), seed, &SynthOptions::default())?;
    apply_channel_with(t, paths, track.as_ref(), PnApplication::Exact)
}

/// Applies `paths` to `t` with explicit phase-noise realizations.
///
/// Output sample `s` is `Σ_p g_p e^{jψ_p} x[s-d_p] e^{j2π f_p s/B} F(Δθ_p[s])`
/// with `x` zero before the start of the frame.
pub fn apply_channel_with(
    t: &TimeFrame,
    paths: &PathSet,
    track: Option<&PnTrack>,
    form: PnApplication,
) -> Result<TimeFrame> {
    let cfg = t.config;
    let len = t.samples.len();
    if let Some(tr) = track {
        if tr.len != len {
            return Err(Error::Range(format!("phase-noise track covers {} samples, frame has {len}", tr.len)));
        }
        if tr.lead < paths.max_delay() {
            return Err(Error::Range(format!(
                "path delay {} exceeds the {} samples of phase-noise history",
                paths.max_delay(),
                tr.lead
            )));
        }
    }
    paths.validate(&cfg)?;
    let mut out = vec![Complex64::default(); len];
    let rx = track.map(|tr| tr.rx_phase());
    const CHUNK: usize = 1 << 14;
    for p in &paths.paths {
        let d = p.delay_samples;
        let tx = track.map(|tr| tr.tx_delayed(d)).transpose()?;
        let amp = p.gain * Complex64::from_polar(1.0, p.phase_rad);
        let w = 2.0 * PI * p.doppler_hz / cfg.bandwidth_hz;
        out.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
            let base = c * CHUNK;
            for (j, y) in chunk.iter_mut().enumerate() {
                let s = base + j;
                if s < d {
                    continue;
                }
                let mut v = amp * t.samples[s - d];
                if w != 0.0 {
                    v *= Complex64::from_polar(1.0, w * s as f64);
                }
                if let (Some(tx), Some(rx)) = (tx, rx) {
                    v *= form.factor(tx[s] - rx[s]);
                }
                *y += v;
            }
        });
    }
    Ok(TimeFrame { config: cfg, samples: out })
}
