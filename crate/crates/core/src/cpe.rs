//! Common phase error: analytic split of the phase-noise distortion and
//! per-symbol estimation and correction.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::channel::{apply_channel_with, PathSet, PnApplication};
use crate::error::{Error, Result};
use crate::fft;
use crate::ofdm::{demodulate, modulate, FreqFrame};
use crate::radar::{make_window, WindowSpec};

/// One phase estimate per OFDM symbol (rad).
#[derive(Debug, Clone, PartialEq)]
pub struct CpeSeries(pub Vec<f64>);

impl CpeSeries {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn write_csv<W: Write>(&self, mut out: W, header_comments: &[String]) -> Result<()> {
        for c in header_comments {
            writeln!(out, "# {c}")?;
        }
        writeln!(out, "symbol,phase_rad")?;
        for (m, v) in self.0.iter().enumerate() {
            writeln!(out, "{m},{v:.12e}")?;
        }
        Ok(())
    }
}

/// Phase-noise distortion of a received frame, split into the part common
/// to all subcarriers of a symbol and the inter-carrier leakage.
#[derive(Debug, Clone)]
pub struct PnDecomposition {
    /// `j·Ỹ_k·Φ_m`, with `Φ_m` the mean phase error over the payload of
    /// symbol `m`.
    pub cpe: FreqFrame,
    /// `j·Σ_{κ≠k} Ỹ_κ·D_{k-κ}`, with `D_q` the normalized DFT of the phase
    /// error over the payload.
    pub ici: FreqFrame,
    /// Per-symbol mean phase error `Φ_m`.
    pub mean_phase: CpeSeries,
    /// Phase-noise-free received frame `Ỹ`.
    pub clean: FreqFrame,
}

/// Splits the first-order phase-noise distortion of a single-path link.
///
/// `phase_error[s]` is `θ_tx[s - d] - θ_rx[s]` for every frame sample. The
/// leakage sum is evaluated directly, so cost grows as `N²` per symbol.
pub fn decompose(phase_error: &[f64], transmitted: &FreqFrame, paths: &PathSet) -> Result<PnDecomposition> {
    if paths.paths.len() != 1 {
        return Err(Error::Unsupported(format!(
            "CPE/ICI split is defined for a single path, got {}",
            paths.paths.len()
        )));
    }
    let cfg = transmitted.config;
    if phase_error.len() != cfg.frame_len() {
        return Err(Error::Frame(format!(
            "phase error covers {} samples, frame has {}",
            phase_error.len(),
            cfg.frame_len()
        )));
    }
    let clean = demodulate(&apply_channel_with(&modulate(transmitted), paths, None, PnApplication::Exact)?)?;
    let (n, m, cp, sl) = (cfg.n_subcarriers, cfg.n_symbols, cfg.cp_length, cfg.symbol_len());

    // D_q = (1/N) Σ_n Δθ[n] e^{-j2πqn/N} per symbol
    let mut leak: Vec<Complex64> = (0..m)
        .flat_map(|sym| phase_error[sym * sl + cp..(sym + 1) * sl].iter().map(|&v| Complex64::new(v, 0.0)))
        .collect();
    let plan = fft::forward(n);
    for chunk in leak.chunks_exact_mut(n) {
        plan.process(chunk);
        chunk.iter_mut().for_each(|v| *v /= n as f64);
    }
    let mean_phase: Vec<f64> = (0..m).map(|sym| leak[sym * n].re).collect();

    let j = Complex64::new(0.0, 1.0);
    let mut cpe = vec![Complex64::default(); n * m];
    let mut ici = vec![Complex64::default(); n * m];
    cpe.par_chunks_mut(n).zip(ici.par_chunks_mut(n)).enumerate().for_each(|(sym, (cpe_sym, ici_sym))| {
        let y = clean.symbol(sym);
        let d = &leak[sym * n..(sym + 1) * n];
        for k in 0..n {
            cpe_sym[k] = j * y[k] * mean_phase[sym];
            let mut acc = Complex64::default();
            for (kappa, yk) in y.iter().enumerate() {
                if kappa != k {
                    acc += yk * d[(k + n - kappa) % n];
                }
            }
            ici_sym[k] = j * acc;
        }
    });
    Ok(PnDecomposition {
        cpe: FreqFrame::from_data(cfg, cpe)?,
        ici: FreqFrame::from_data(cfg, ici)?,
        mean_phase: CpeSeries(mean_phase),
        clean,
    })
}

/// `Θ_m = arg Σ_k Y_{k,m} X*_{k,m}`.
pub fn estimate_cpe(received: &FreqFrame, known: &FreqFrame) -> Result<CpeSeries> {
    check_shapes(received, known)?;
    (0..received.config.n_symbols)
        .map(|m| {
            let acc: Complex64 = received.symbol(m).iter().zip(known.symbol(m)).map(|(y, x)| y * x.conj()).sum();
            if acc.norm_sqr() == 0.0 {
                return Err(Error::Estimation(format!("symbol {m} carries no correlation energy")));
            }
            Ok(acc.arg())
        })
        .collect::<Result<Vec<_>>>()
        .map(CpeSeries)
}

/// `Y_{k,m}·e^{-jΘ_m}`.
pub fn correct_cpe(received: &FreqFrame, cpe: &CpeSeries) -> Result<FreqFrame> {
    if cpe.len() != received.config.n_symbols {
        return Err(Error::Frame(format!("{} phase estimates for {} symbols", cpe.len(), received.config.n_symbols)));
    }
    let mut out = received.clone();
    for (m, &phi) in cpe.0.iter().enumerate() {
        let rot = Complex64::from_polar(1.0, -phi);
        out.symbol_mut(m).iter_mut().for_each(|v| *v *= rot);
    }
    Ok(out)
}

/// Settings for CPE estimation from a channel impulse response peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceCpeOptions {
    pub window: WindowSpec,
    /// Required margin of the reference peak over the strongest other CIR
    /// peak (dB). `None` skips the check.
    pub min_dominance_db: Option<f64>,
}

impl Default for ReferenceCpeOptions {
    fn default() -> Self {
        Self { window: WindowSpec::chebyshev(crate::radar::Axis::Range, 100.0), min_dominance_db: Some(20.0) }
    }
}

/// Per-symbol windowed impulse responses `IDFT_k{w_k·Y_{k,m}/X_{k,m}}`.
pub fn impulse_responses(received: &FreqFrame, known: &FreqFrame, window: &WindowSpec) -> Result<Vec<Complex64>> {
    check_shapes(received, known)?;
    let n = received.config.n_subcarriers;
    let w = make_window(window, n)?;
    let mut cir = Vec::with_capacity(received.data().len());
    for (i, (y, x)) in received.data().iter().zip(known.data()).enumerate() {
        if x.norm_sqr() == 0.0 {
            return Err(Error::Frame("known frame has zero entries".into()));
        }
        cir.push(y / x * w[fft::signed_position(i % n, n)]);
    }
    fft::unitary_chunks(&mut cir, n, true);
    Ok(cir)
}

/// Phase of the CIR at `range_bin` for each symbol.
pub fn estimate_cpe_at_bin(
    received: &FreqFrame,
    known: &FreqFrame,
    window: &WindowSpec,
    range_bin: usize,
) -> Result<CpeSeries> {
    let n = received.config.n_subcarriers;
    if range_bin >= n {
        return Err(Error::Range(format!("range bin {range_bin} outside 0..{n}")));
    }
    let cir = impulse_responses(received, known, window)?;
    Ok(CpeSeries(cir.chunks_exact(n).map(|h| h[range_bin].arg()).collect()))
}

/// CPE taken from the phase of a dominant reference path at range bin 0.
pub fn estimate_cpe_from_reference(
    received: &FreqFrame,
    known: &FreqFrame,
    opts: &ReferenceCpeOptions,
) -> Result<CpeSeries> {
    let n = received.config.n_subcarriers;
    let cir = impulse_responses(received, known, &opts.window)?;
    let mut out = Vec::with_capacity(received.config.n_symbols);
    for (m, h) in cir.chunks_exact(n).enumerate() {
        if let Some(margin) = opts.min_dominance_db {
            let p: Vec<f64> = h.iter().map(|v| v.norm_sqr()).collect();
            let (lo, hi) = lobe_bounds(&p);
            let other = (1..n).filter(|&i| !(i <= hi || i >= lo)).map(|i| p[i]).fold(0.0, f64::max);
            if other > 0.0 && 10.0 * (p[0] / other).log10() < margin {
                return Err(Error::Estimation(format!(
                    "reference path not {margin} dB above the next peak in symbol {m}"
                )));
            }
        }
        out.push(h[0].arg());
    }
    Ok(CpeSeries(out))
}

/// Circular extent of the lobe around bin 0: `(start of the lobe on the
/// negative side, end on the positive side)`, walking down to the first
/// local minimum each way.
fn lobe_bounds(p: &[f64]) -> (usize, usize) {
    let n = p.len();
    let mut hi = 0;
    while hi + 1 < n && p[hi + 1] < p[hi] {
        hi += 1;
    }
    let mut lo = n;
    while lo - 1 > hi && p[lo - 1] < p[lo % n] {
        lo -= 1;
    }
    (lo, hi)
}

fn check_shapes(a: &FreqFrame, b: &FreqFrame) -> Result<()> {
    if a.config.n_subcarriers != b.config.n_subcarriers || a.config.n_symbols != b.config.n_symbols {
        return Err(Error::Frame("received and known frames differ in size".into()));
    }
    Ok(())
}

/// Root-mean-square of the wrapped difference between two phase series.
pub fn rms_phase_difference(a: &CpeSeries, b: &CpeSeries) -> f64 {
    let s: f64 = a.0.iter().zip(&b.0).map(|(x, y)| crate::channel::wrap_phase(x - y).powi(2)).sum();
    (s / a.len().max(1) as f64).sqrt()
}

/// Standard deviation of a phase series around its circular mean.
pub fn phase_std(a: &CpeSeries) -> f64 {
    let mean: Complex64 = a.0.iter().map(|&p| Complex64::from_polar(1.0, p)).sum();
    let c = mean.arg();
    let s: f64 = a.0.iter().map(|&p| crate::channel::wrap_phase(p - c).powi(2)).sum();
    (s / a.len().max(1) as f64).sqrt()
}
