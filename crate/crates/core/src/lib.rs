//! Simulation of OFDM-based integrated sensing and communication links
//! impaired by oscillator phase noise.
//!
//! The crate is organised bottom-up: [`pn_model`] describes phase-noise
//! spectra, [`pn_synth`] draws time series from them, [`ofdm`] and
//! [`channel`] build and distort frames, [`cpe`] and [`radar`] process the
//! received frames and [`metrics`] scores the resulting radar images.
//! [`experiments`] wires everything into reproducible sweeps.

pub mod channel;
pub mod config;
pub mod cpe;
mod error;
pub mod experiments;
mod fft;
pub mod metrics;
pub mod ofdm;
pub mod pn_model;
pub mod pn_synth;
pub mod radar;

pub use num_complex::Complex64;

pub use channel::{apply_channel, derive_psi, Architecture, Path, PathSet, PnApplication, PnMode, PnTrack};
pub use cpe::{correct_cpe, decompose, estimate_cpe, estimate_cpe_from_reference, CpeSeries};
pub use error::{Error, Result};
pub use metrics::{image_sir, islr, pplr, pslr, LobeExtent, MainlobeMask, PeakSearch};
pub use ofdm::{
    demodulate, evm, modulate, random_frame, subcarrier_sir, FreqFrame, Modulation, TimeFrame, WaveformConfig,
};
pub use pn_model::{
    combined_level, integrate_psd, Correlation, Integration, PllPsdParams, PnPsdModel, PoleZeroPsdParams,
};
pub use pn_synth::{delayed_view, estimate_psd_welch, synthesize, PnRealization};
pub use radar::{axes, form_image, make_window, RadarImage, WindowKind, WindowSpec};

/// Speed of light in vacuum (m/s).
pub const C0: f64 = 299_792_458.0;

/// `10·log10(x)`.
#[inline]
pub fn db10(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Inverse of [`db10`].
#[inline]
pub fn from_db10(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
