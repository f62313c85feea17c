//! Monte-Carlo machinery shared by the experiments.

use rayon::prelude::*;
use statrs::statistics::Statistics;

use crate::channel::{apply_channel_with, derive_seed, Architecture, Path, PathSet, PnApplication, PnMode, PnTrack};
use crate::config::CpeCorrection;
use crate::cpe::{correct_cpe, estimate_cpe, estimate_cpe_from_reference, ReferenceCpeOptions};
use crate::error::Result;
use crate::metrics::{image_sir_against, sidelobe_report, CUT_OVERSAMPLE};
use crate::ofdm::{
    demodulate, evm_with, modulate, random_frame, Equalizer, FreqFrame, Modulation, TimeFrame, WaveformConfig,
};
use crate::pn_model::{combined_level, integrate_psd, Correlation, Integration, PnPsdModel};
use crate::pn_synth::SynthOptions;
use crate::radar::{form_image, Axis, RadarImage, WindowSpec};
use crate::{db10, from_db10};

/// Waveform, propagation and oscillators of one simulated link. Phase-noise
/// models are the unscaled base; sweeps apply `γ` on top.
#[derive(Debug, Clone)]
pub struct Link {
    pub waveform: WaveformConfig,
    pub paths: PathSet,
    pub pn: PnMode,
    pub application: PnApplication,
}

impl Link {
    /// Single unit-gain path at range bin 0 with two independent oscillators
    /// of the same model.
    pub fn bistatic_static(waveform: WaveformConfig, model: PnPsdModel) -> Self {
        Self::bistatic_moving(waveform, model, 0.0)
    }

    pub fn bistatic_moving(waveform: WaveformConfig, model: PnPsdModel, doppler_hz: f64) -> Self {
        Self {
            waveform,
            paths: PathSet::single(Architecture::Bistatic, Path::unit(0, doppler_hz)),
            pn: PnMode::Bistatic { tx: model.clone(), rx: model },
            application: PnApplication::Exact,
        }
    }

    /// Combined phase-error variance over the occupied band, for the first
    /// path's delay (rad²).
    pub fn combined_level(&self) -> Result<f64> {
        let f_max = self.waveform.bandwidth_hz / 2.0;
        let integ = Integration::default();
        match &self.pn {
            PnMode::None => Ok(0.0),
            PnMode::Bistatic { tx, rx } => combined_level(tx, rx, Correlation::Bistatic, f_max, &integ),
            PnMode::Monostatic(m) => {
                let delay = self.paths.paths.first().map_or(0, |p| p.delay_samples);
                let delay_s = delay as f64 / self.waveform.bandwidth_hz;
                combined_level(m, m, Correlation::Monostatic { delay_s }, f_max, &integ)
            }
        }
    }

    pub fn combined_dbc(&self) -> Result<f64> {
        Ok(db10(self.combined_level()?))
    }

    /// Level of each oscillator over the occupied band (rad²).
    pub fn oscillator_levels(&self) -> Result<(f64, f64)> {
        let f_max = self.waveform.bandwidth_hz / 2.0;
        let integ = Integration::default();
        let level = |m: &PnPsdModel| integrate_psd(m, f_max, &integ);
        match &self.pn {
            PnMode::None => Ok((0.0, 0.0)),
            PnMode::Monostatic(m) => {
                let l = level(m)?;
                Ok((l, l))
            }
            PnMode::Bistatic { tx, rx } => Ok((level(tx)?, level(rx)?)),
        }
    }

    /// Draws the transmitted frame and the unscaled phase-noise track of
    /// realization `index`.
    pub fn draw(&self, seed: u64, index: u64) -> Result<Realization> {
        let base = derive_seed(seed, index);
        let known = random_frame(&self.waveform, derive_seed(base, 0));
        let sent = modulate(&known);
        let track = PnTrack::draw(
            &self.pn,
            self.waveform.sample_rate(),
            self.waveform.frame_len(),
            self.paths.max_delay(),
            derive_seed(base, 1),
            &SynthOptions::default(),
        )?;
        Ok(Realization { known, sent, track })
    }
}

/// One transmitted frame with its phase-noise track.
pub struct Realization {
    pub known: FreqFrame,
    pub sent: TimeFrame,
    pub track: Option<PnTrack>,
}

impl Realization {
    /// Received frame with every phase sample scaled by `√γ`.
    pub fn receive(&self, link: &Link, gamma_db: f64) -> Result<FreqFrame> {
        let a = from_db10(gamma_db).sqrt();
        let scaled = match &self.track {
            Some(t) if a > 0.0 => Some(scale_track(t, a)),
            _ => None,
        };
        demodulate(&apply_channel_with(&self.sent, &link.paths, scaled.as_ref(), link.application)?)
    }

    pub fn receive_ideal(&self, link: &Link) -> Result<FreqFrame> {
        demodulate(&apply_channel_with(&self.sent, &link.paths, None, link.application)?)
    }
}

fn scale_track(t: &PnTrack, a: f64) -> PnTrack {
    let mut out = t.clone();
    out.tx.samples.iter_mut().for_each(|v| *v *= a);
    if let Some(rx) = out.rx.as_mut() {
        rx.samples.iter_mut().for_each(|v| *v *= a);
    }
    out
}

/// Applies the configured CPE correction.
pub fn apply_correction(received: FreqFrame, known: &FreqFrame, mode: CpeCorrection) -> Result<FreqFrame> {
    match mode {
        CpeCorrection::Off => Ok(received),
        CpeCorrection::FullFrame => {
            let cpe = estimate_cpe(&received, known)?;
            correct_cpe(&received, &cpe)
        }
        CpeCorrection::ReferencePath => {
            let opts = ReferenceCpeOptions { min_dominance_db: None, ..ReferenceCpeOptions::default() };
            let cpe = estimate_cpe_from_reference(&received, known, &opts)?;
            correct_cpe(&received, &cpe)
        }
    }
}

/// Which metric groups a sensing trial evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MetricSel {
    /// PPLR and range/Doppler PSLR and ISLR on rectangular-window images.
    pub sidelobes: bool,
    /// Mean and minimum image SIR on Chebyshev-window images.
    pub image_sir: bool,
    /// EVM of the received frame.
    pub evm: bool,
}

impl MetricSel {
    pub const ALL: Self = Self { sidelobes: true, image_sir: true, evm: true };
    pub const SIDELOBES: Self = Self { sidelobes: true, image_sir: false, evm: false };
    pub const IMAGE_SIR: Self = Self { sidelobes: false, image_sir: true, evm: false };
}

/// Sidelobe attenuation of the image-SIR windows (dB).
pub const SIR_WINDOW_DB: f64 = 100.0;

fn rect_pair() -> (WindowSpec, WindowSpec) {
    (WindowSpec::rectangular(Axis::Range), WindowSpec::rectangular(Axis::Doppler))
}

fn cheb_pair() -> (WindowSpec, WindowSpec) {
    (WindowSpec::chebyshev(Axis::Range, SIR_WINDOW_DB), WindowSpec::chebyshev(Axis::Doppler, SIR_WINDOW_DB))
}

/// Phase-noise-free references of one realization.
pub struct IdealImages {
    pub rect: Option<RadarImage>,
    pub cheb: Option<RadarImage>,
}

impl IdealImages {
    pub fn new(ideal: &FreqFrame, known: &FreqFrame, arch: Architecture, sel: MetricSel) -> Result<Self> {
        let (rr, rd) = rect_pair();
        let (cr, cd) = cheb_pair();
        Ok(Self {
            rect: if sel.sidelobes { Some(form_image(ideal, known, &rr, &rd, arch)?) } else { None },
            cheb: if sel.image_sir { Some(form_image(ideal, known, &cr, &cd, arch)?) } else { None },
        })
    }
}

pub const PPLR: &str = "pplr";
pub const RANGE_PSLR: &str = "range_pslr";
pub const RANGE_ISLR: &str = "range_islr";
pub const DOPPLER_PSLR: &str = "doppler_pslr";
pub const DOPPLER_ISLR: &str = "doppler_islr";
pub const MEAN_IMAGE_SIR: &str = "mean_image_sir";
pub const MIN_IMAGE_SIR: &str = "min_image_sir";
pub const EVM: &str = "evm";

/// Scores one received frame.
pub fn score(
    received: &FreqFrame,
    known: &FreqFrame,
    ideal: &IdealImages,
    arch: Architecture,
    sel: MetricSel,
) -> Result<Vec<(&'static str, f64)>> {
    let mut out = Vec::with_capacity(8);
    if let Some(ideal_rect) = &ideal.rect {
        let (wr, wd) = rect_pair();
        let img = form_image(received, known, &wr, &wd, arch)?;
        let rep = sidelobe_report(&img, ideal_rect, CUT_OVERSAMPLE)?;
        out.extend([
            (PPLR, rep.pplr_db),
            (RANGE_PSLR, rep.range_pslr_db),
            (RANGE_ISLR, rep.range_islr_db),
            (DOPPLER_PSLR, rep.doppler_pslr_db),
            (DOPPLER_ISLR, rep.doppler_islr_db),
        ]);
    }
    if let Some(ideal_cheb) = &ideal.cheb {
        let (wr, wd) = cheb_pair();
        let img = form_image(received, known, &wr, &wd, arch)?;
        let (mean, min) = image_sir_against(&img, ideal_cheb)?;
        out.extend([(MEAN_IMAGE_SIR, mean), (MIN_IMAGE_SIR, min)]);
    }
    if sel.evm {
        out.push((EVM, evm_with(received, known, Equalizer::LeastSquares)?));
    }
    Ok(out)
}

/// Mean and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

impl Stats {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        let mean = values.mean();
        let std = if n > 1 { values.std_dev() } else { 0.0 };
        Self { mean, std, n }
    }
}

/// Averaged metrics at one phase-noise scaling.
#[derive(Debug, Clone)]
pub struct PointResult {
    pub gamma_db: f64,
    pub combined_pn_dbc: f64,
    pub metrics: Vec<(&'static str, Stats)>,
}

impl PointResult {
    pub fn get(&self, metric: &str) -> Option<Stats> {
        self.metrics.iter().find(|(m, _)| *m == metric).map(|(_, s)| *s)
    }
}

/// Runs `realizations` trials of `link` and evaluates every `γ` in
/// `gammas_db` on each, reusing one phase-noise draw per trial across the
/// sweep.
pub fn sweep(
    link: &Link,
    gammas_db: &[f64],
    realizations: usize,
    seed: u64,
    correction: CpeCorrection,
    sel: MetricSel,
) -> Result<Vec<PointResult>> {
    let base_dbc = link.combined_dbc()?;
    let arch = link.paths.architecture;
    let per_trial: Vec<Vec<Vec<(&'static str, f64)>>> = (0..realizations as u64)
        .into_par_iter()
        .map(|r| -> Result<Vec<Vec<(&'static str, f64)>>> {
            let real = link.draw(seed, r)?;
            let ideal_rx = real.receive_ideal(link)?;
            let ideal = IdealImages::new(&ideal_rx, &real.known, arch, sel)?;
            drop(ideal_rx);
            gammas_db
                .iter()
                .map(|&g| {
                    let y = apply_correction(real.receive(link, g)?, &real.known, correction)?;
                    score(&y, &real.known, &ideal, arch, sel)
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    Ok(gammas_db
        .iter()
        .enumerate()
        .map(|(i, &g)| {
            let names: Vec<&'static str> = per_trial.first().map_or(vec![], |t| t[i].iter().map(|(m, _)| *m).collect());
            let metrics = names
                .iter()
                .enumerate()
                .map(|(j, &name)| {
                    let values: Vec<f64> = per_trial.iter().map(|t| t[i][j].1).collect();
                    (name, Stats::of(&values))
                })
                .collect();
            PointResult { gamma_db: g, combined_pn_dbc: base_dbc + g, metrics }
        })
        .collect())
}

/// Scalings that place the combined level of `link` at each of `levels_dbc`.
pub fn gammas_for_levels(link: &Link, levels_dbc: &[f64]) -> Result<Vec<f64>> {
    let base = link.combined_dbc()?;
    Ok(levels_dbc.iter().map(|l| l - base).collect())
}

/// `lo, lo + step, …, hi`.
pub fn level_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

/// Waveform with the reference carrier and bandwidth.
pub fn waveform(n: usize, cp: usize, m: usize, modulation: Modulation) -> WaveformConfig {
    WaveformConfig { carrier_hz: 26.2e9, bandwidth_hz: 1e9, n_subcarriers: n, cp_length: cp, n_symbols: m, modulation }
}
