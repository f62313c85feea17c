//! Phase-noise time series drawn from a PSD model, plus the Welch estimator
//! used to check their spectra.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{domain, Error, Result};
use crate::fft;
use crate::pn_model::{PnPsdModel, DEFAULT_F_MIN_HZ};

/// Largest synthesis transform used to resolve the low-frequency cutoff.
const MAX_RESOLUTION_LEN: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq)]
pub struct PnRealization {
    /// Phase in radians.
    pub samples: Vec<f64>,
    pub sample_rate: f64,
    pub seed: u64,
    pub model_id: String,
}

impl PnRealization {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn variance(&self) -> f64 {
        let n = self.samples.len() as f64;
        let mean = self.samples.iter().sum::<f64>() / n;
        self.samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n
    }

    /// Writes the samples as little-endian `f64` to `path` and a
    /// `key = value` header next to it (`<path>.txt`).
    pub fn dump(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        for v in &self.samples {
            out.write_all(&v.to_le_bytes())?;
        }
        out.flush()?;
        let mut header = BufWriter::new(File::create(sidecar_path(path))?);
        writeln!(header, "format = f64le")?;
        writeln!(header, "n_samples = {}", self.samples.len())?;
        writeln!(header, "sample_rate_hz = {}", self.sample_rate)?;
        writeln!(header, "seed = {}", self.seed)?;
        writeln!(header, "model = {}", self.model_id)?;
        header.flush()?;
        Ok(())
    }

    /// Reads a realization written by [`PnRealization::dump`].
    pub fn load(path: &Path) -> Result<Self> {
        let mut sample_rate = None;
        let mut seed = None;
        let mut model_id = String::new();
        let mut n_samples = None;
        for line in BufReader::new(File::open(sidecar_path(path))?).lines() {
            let line = line?;
            let Some((key, value)) = line.split_once('=') else { continue };
            let value = value.trim();
            let bad = |k: &str| Error::Config(format!("bad `{k}` in realization header"));
            match key.trim() {
                "sample_rate_hz" => sample_rate = Some(value.parse::<f64>().map_err(|_| bad("sample_rate_hz"))?),
                "seed" => seed = Some(value.parse::<u64>().map_err(|_| bad("seed"))?),
                "n_samples" => n_samples = Some(value.parse::<usize>().map_err(|_| bad("n_samples"))?),
                "model" => model_id = value.to_string(),
                "format" if value != "f64le" => return Err(bad("format")),
                _ => {}
            }
        }
        let mut bytes = Vec::new();
        File::open(path)?.read_to_end(&mut bytes)?;
        if bytes.len() % 8 != 0 {
            return Err(Error::Config("realization file is not a whole number of f64 values".into()));
        }
        let samples: Vec<f64> =
            bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8"))).collect();
        if n_samples.is_some_and(|n| n != samples.len()) {
            return Err(Error::Config("sample count does not match the header".into()));
        }
        Ok(Self {
            samples,
            sample_rate: sample_rate.ok_or_else(|| Error::Config("missing sample_rate_hz".into()))?,
            seed: seed.ok_or_else(|| Error::Config("missing seed".into()))?,
            model_id,
        })
    }
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".txt");
    p.into()
}

/// Options for [`synthesize_with`].
#[derive(Debug, Clone, Copy)]
pub struct SynthOptions {
    /// Spectral components below this frequency are not synthesized.
    pub f_min: f64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self { f_min: DEFAULT_F_MIN_HZ }
    }
}

pub fn synthesize(model: &PnPsdModel, sample_rate: f64, n_samples: usize, seed: u64) -> Result<PnRealization> {
    synthesize_with(model, sample_rate, n_samples, seed, &SynthOptions::default())
}

/// Draws a real phase series by shaping a Hermitian Gaussian spectrum.
///
/// Bin `k` of an `L`-point grid (`L ≥ n_samples`, fine enough to resolve
/// `f_min`) receives `E|X_k|² = S(f_k)·Δf`; the unnormalized inverse DFT
/// then has variance `Σ S(f_k)Δf ≈ 2∫S`. The first `n_samples` are kept.
pub fn synthesize_with(
    model: &PnPsdModel,
    sample_rate: f64,
    n_samples: usize,
    seed: u64,
    opts: &SynthOptions,
) -> Result<PnRealization> {
    if n_samples == 0 {
        return domain("realization length must be positive");
    }
    if !(sample_rate.is_finite() && sample_rate > 0.0) {
        return domain("sample rate must be positive");
    }
    model.validate()?;
    let model_id = model.id();
    if model.is_silent() {
        return Ok(PnRealization { samples: vec![0.0; n_samples], sample_rate, seed, model_id });
    }

    let resolution =
        if opts.f_min > 0.0 { ((4.0 * sample_rate / opts.f_min).ceil() as usize).min(MAX_RESOLUTION_LEN) } else { 0 };
    let len = n_samples.max(resolution).max(2).next_power_of_two();
    let df = sample_rate / len as f64;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spec = vec![Complex64::default(); len];
    let half = len / 2;
    for k in 1..half {
        let f = k as f64 * df;
        let g1: f64 = StandardNormal.sample(&mut rng);
        let g2: f64 = StandardNormal.sample(&mut rng);
        if f < opts.f_min {
            continue;
        }
        let a = (model.eval_unchecked(f) * df / 2.0).sqrt();
        spec[k] = Complex64::new(a * g1, a * g2);
        spec[len - k] = spec[k].conj();
    }
    let g: f64 = StandardNormal.sample(&mut rng);
    let nyquist = half as f64 * df;
    if nyquist >= opts.f_min {
        spec[half] = Complex64::new((model.eval_unchecked(nyquist) * df).sqrt() * g, 0.0);
    }

    fft::inverse(len).process(&mut spec);
    let samples = spec[..n_samples].iter().map(|c| c.re).collect();
    Ok(PnRealization { samples, sample_rate, seed, model_id })
}

/// `θ[offset - delay .. offset - delay + length]`.
pub fn delayed_view(r: &PnRealization, delay_samples: usize, offset: usize, length: usize) -> Result<&[f64]> {
    let start = offset.checked_sub(delay_samples).ok_or_else(|| {
        Error::Range(format!("delay {delay_samples} reaches before the start of the series (offset {offset})"))
    })?;
    let end = start + length;
    if end > r.samples.len() {
        return Err(Error::Range(format!("view ends at {end}, series has {} samples", r.samples.len())));
    }
    Ok(&r.samples[start..end])
}

/// Averaged Hann-windowed periodogram.
///
/// Returns the frequencies `0..=fs/2` and the double-sided PSD estimate at
/// those frequencies, so white noise of variance σ² reads `σ²/fs`.
pub fn estimate_psd_welch(
    r: &PnRealization,
    segment_length: usize,
    overlap_fraction: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    welch(&r.samples, r.sample_rate, segment_length, overlap_fraction)
}

pub(crate) fn welch(x: &[f64], fs: f64, seg: usize, overlap: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if seg < 2 || seg > x.len() {
        return domain(format!("segment length {seg} invalid for a series of {} samples", x.len()));
    }
    if !(0.0..1.0).contains(&overlap) {
        return domain("overlap fraction must lie in [0, 1)");
    }
    let hop = (((1.0 - overlap) * seg as f64).round() as usize).max(1);
    let window: Vec<f64> =
        (0..seg).map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / seg as f64).cos()).collect();
    let energy: f64 = window.iter().map(|w| w * w).sum();
    let plan = fft::forward(seg);
    let bins = seg / 2 + 1;
    let mut acc = vec![0.0; bins];
    let mut buf = vec![Complex64::default(); seg];
    let mut count = 0usize;
    let mut start = 0;
    while start + seg <= x.len() {
        for (b, (v, w)) in buf.iter_mut().zip(x[start..start + seg].iter().zip(&window)) {
            *b = Complex64::new(v * w, 0.0);
        }
        plan.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
        count += 1;
        start += hop;
    }
    let scale = 1.0 / (fs * energy * count as f64);
    let freqs = (0..bins).map(|k| k as f64 * fs / seg as f64).collect();
    Ok((freqs, acc.into_iter().map(|a| a * scale).collect()))
}
