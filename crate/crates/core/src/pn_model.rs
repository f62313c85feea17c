//! Analytic phase-noise power spectral densities.
//!
//! All PSDs are double-sided and expressed in rad²/Hz, so the phase
//! variance over a band `±[f_min, f_max]` is `2·∫ S(f) df`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Default lower integration and synthesis cutoff (Hz).
pub const DEFAULT_F_MIN_HZ: f64 = 1.0e4;

/// PLL-shaped PSD: a flat in-band level with a flicker corner, a first-order
/// roll-off beyond the loop bandwidth and a white floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PllPsdParams {
    /// In-band level (rad²/Hz).
    pub l0: f64,
    /// Far-out floor (rad²/Hz).
    pub l_floor: f64,
    /// Flicker corner frequency (Hz).
    pub f_corner: f64,
    /// Loop bandwidth (Hz).
    pub b_pll: f64,
}

impl PllPsdParams {
    pub fn new(l0: f64, l_floor: f64, f_corner: f64, b_pll: f64) -> Result<Self> {
        let p = Self { l0, l_floor, f_corner, b_pll };
        p.validate()?;
        Ok(p)
    }

    /// The 26 GHz-class synthesizer used throughout the experiments:
    /// -105 dBc/Hz in band, -155 dBc/Hz floor, 10 kHz corner, 150 kHz loop.
    pub fn reference() -> Self {
        Self { l0: 10f64.powf(-10.5), l_floor: 10f64.powf(-15.5), f_corner: 1.0e4, b_pll: 1.5e5 }
    }

    pub fn validate(&self) -> Result<()> {
        let all_positive = [self.l0, self.l_floor, self.f_corner, self.b_pll].iter().all(|v| v.is_finite() && *v > 0.0);
        if !all_positive {
            return domain("PLL PSD parameters must be finite and strictly positive");
        }
        if self.l_floor >= self.l0 {
            return domain("PLL PSD floor must lie below the in-band level");
        }
        Ok(())
    }

    fn eval(&self, f: f64) -> f64 {
        let b2 = self.b_pll * self.b_pll;
        b2 * self.l0 / (b2 + f * f) * (1.0 + self.f_corner / f) + self.l_floor
    }
}

/// Corner of a pole-zero PSD: `(1 + (f/freq)^exponent)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Corner {
    pub freq_hz: f64,
    pub exponent: f64,
}

/// Multi-pole/zero PSD `psd0 · Π(1+(f/fz)^az) / Π(1+(f/fp)^ap)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleZeroPsdParams {
    pub psd0: f64,
    pub zeros: Vec<Corner>,
    pub poles: Vec<Corner>,
}

impl PoleZeroPsdParams {
    pub fn new(psd0: f64, zeros: Vec<Corner>, poles: Vec<Corner>) -> Result<Self> {
        let p = Self { psd0, zeros, poles };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.psd0.is_finite() && self.psd0 > 0.0) {
            return domain("pole-zero reference level must be positive");
        }
        if self.zeros.is_empty() || self.poles.is_empty() {
            return domain("pole-zero PSD needs at least one pole and one zero");
        }
        for c in self.zeros.iter().chain(&self.poles) {
            if !(c.freq_hz.is_finite() && c.freq_hz > 0.0 && c.exponent.is_finite()) {
                return domain("pole/zero frequencies must be strictly positive");
            }
        }
        Ok(())
    }

    fn eval(&self, f: f64) -> f64 {
        let num: f64 = self.zeros.iter().map(|c| 1.0 + (f / c.freq_hz).powf(c.exponent)).product();
        let den: f64 = self.poles.iter().map(|c| 1.0 + (f / c.freq_hz).powf(c.exponent)).product();
        self.psd0 * num / den
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PnPsdModel {
    Pll(PllPsdParams),
    PoleZero(PoleZeroPsdParams),
    /// Inner model multiplied by a linear power factor.
    Scaled {
        inner: Box<PnPsdModel>,
        gamma: f64,
    },
}

impl PnPsdModel {
    /// Wraps `self` with a power factor given in dB. `-inf` yields a silent
    /// model.
    pub fn scaled_db(self, gamma_db: f64) -> Self {
        Self::Scaled { inner: Box::new(self), gamma: 10f64.powf(gamma_db / 10.0) }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Pll(p) => p.validate(),
            Self::PoleZero(p) => p.validate(),
            Self::Scaled { inner, gamma } => {
                if !(gamma.is_finite() && *gamma >= 0.0) {
                    return domain("scaling factor must be finite and non-negative");
                }
                inner.validate()
            }
        }
    }

    /// Overall linear power factor applied on top of the base shape.
    pub fn gamma(&self) -> f64 {
        match self {
            Self::Scaled { inner, gamma } => gamma * inner.gamma(),
            _ => 1.0,
        }
    }

    /// True when the model carries no power at all.
    pub fn is_silent(&self) -> bool {
        self.gamma() == 0.0
    }

    /// Short human-readable identifier, used in dumps and CSV headers.
    pub fn id(&self) -> String {
        match self {
            Self::Pll(p) => format!(
                "pll(l0={:.2}dBc/Hz,floor={:.2}dBc/Hz,fc={}Hz,bpll={}Hz)",
                10.0 * p.l0.log10(),
                10.0 * p.l_floor.log10(),
                p.f_corner,
                p.b_pll
            ),
            Self::PoleZero(p) => {
                format!("pole-zero(psd0={:.2}dB,{}z/{}p)", 10.0 * p.psd0.log10(), p.zeros.len(), p.poles.len())
            }
            Self::Scaled { inner, gamma } => {
                format!("{}*{:.2}dB", inner.id(), 10.0 * gamma.log10())
            }
        }
    }

    /// PSD at frequency offset `f > 0` (rad²/Hz).
    pub fn eval_psd(&self, f: f64) -> Result<f64> {
        if !(f.is_finite() && f > 0.0) {
            return domain(format!("PSD evaluated at non-positive frequency {f}"));
        }
        Ok(self.eval_unchecked(f))
    }

    pub(crate) fn eval_unchecked(&self, f: f64) -> f64 {
        match self {
            Self::Pll(p) => p.eval(f),
            Self::PoleZero(p) => p.eval(f),
            Self::Scaled { inner, gamma } => gamma * inner.eval_unchecked(f),
        }
    }
}

/// Quadrature settings for band integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integration {
    /// Lower frequency cutoff (Hz). The flicker term diverges at DC.
    pub f_min: f64,
    /// Log-spaced grid density.
    pub points_per_decade: usize,
}

impl Default for Integration {
    fn default() -> Self {
        Self { f_min: DEFAULT_F_MIN_HZ, points_per_decade: 256 }
    }
}

impl Integration {
    pub fn with_f_min(f_min: f64) -> Self {
        Self { f_min, ..Self::default() }
    }

    fn grid(&self, f_max: f64) -> Result<Vec<f64>> {
        if !(self.f_min.is_finite() && self.f_min > 0.0) {
            return domain("integration cutoff must be positive");
        }
        if !(f_max.is_finite() && f_max > self.f_min) {
            return domain(format!("upper frequency {f_max} Hz must exceed the cutoff {} Hz", self.f_min));
        }
        if self.points_per_decade < 64 {
            return domain("integration grid needs at least 64 points per decade");
        }
        let decades = (f_max / self.f_min).log10();
        let n = ((decades * self.points_per_decade as f64).ceil() as usize).max(2);
        let step = decades / n as f64;
        Ok((0..=n).map(|i| if i == n { f_max } else { self.f_min * 10f64.powf(i as f64 * step) }).collect())
    }
}

/// Phase variance over `±[f_min, f_max]` (rad²).
pub fn integrate_psd(model: &PnPsdModel, f_max: f64, integration: &Integration) -> Result<f64> {
    let grid = integration.grid(f_max)?;
    if model.is_silent() {
        return Ok(0.0);
    }
    let s: Vec<f64> = grid.iter().map(|&f| model.eval_unchecked(f)).collect();
    let one_sided: f64 = grid.windows(2).zip(s.windows(2)).map(|(f, v)| 0.5 * (v[0] + v[1]) * (f[1] - f[0])).sum();
    Ok(2.0 * one_sided)
}

/// Correlation between transmit and receive oscillators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Correlation {
    /// Shared oscillator; the transmit phase reaches the receiver delayed by
    /// `delay_s` seconds.
    Monostatic { delay_s: f64 },
    /// Independent oscillators.
    Bistatic,
}

/// Variance of the combined phase error `θ_tx(t-τ) - θ_rx(t)` (rad²).
pub fn combined_level(
    tx: &PnPsdModel,
    rx: &PnPsdModel,
    mode: Correlation,
    f_max: f64,
    integration: &Integration,
) -> Result<f64> {
    match mode {
        Correlation::Bistatic => Ok(integrate_psd(tx, f_max, integration)? + integrate_psd(rx, f_max, integration)?),
        Correlation::Monostatic { delay_s } => {
            if !(delay_s.is_finite() && delay_s >= 0.0) {
                return domain(format!("delay must be non-negative, got {delay_s}"));
            }
            if tx != rx {
                return domain("monostatic operation requires identical transmit and receive models");
            }
            let grid = integration.grid(f_max)?;
            if delay_s == 0.0 || tx.is_silent() {
                return Ok(0.0);
            }
            let omega = 2.0 * std::f64::consts::PI * delay_s;
            let sum: f64 = grid.windows(2).map(|f| decorrelated_segment(tx, f[0], f[1], omega)).sum();
            // 2·∫ S(f)·2(1 - cos ωf) df
            Ok(4.0 * sum)
        }
    }
}

/// `∫_a^b S(f)(1 - cos ωf) df` over one grid segment. Resolved segments use
/// the trapezoid rule on `2 S sin²(ωf/2)`; fast oscillation is integrated
/// exactly against a linear interpolant of S.
fn decorrelated_segment(model: &PnPsdModel, a: f64, b: f64, omega: f64) -> f64 {
    let h = b - a;
    let (sa, sb) = (model.eval_unchecked(a), model.eval_unchecked(b));
    if omega * h < 0.02 {
        let g = |f: f64, s: f64| 2.0 * s * (0.5 * omega * f).sin().powi(2);
        return 0.5 * h * (g(a, sa) + g(b, sb));
    }
    let slope = (sb - sa) / h;
    let (sin_a, cos_a) = (omega * a).sin_cos();
    let (sin_b, cos_b) = (omega * b).sin_cos();
    let cos_part = sa * (sin_b - sin_a) / omega + slope * (h * sin_b / omega + (cos_b - cos_a) / (omega * omega));
    0.5 * h * (sa + sb) - cos_part
}
