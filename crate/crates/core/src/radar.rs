//! Range-Doppler image formation.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::Architecture;
use crate::error::{domain, Error, Result};
use crate::fft;
use crate::ofdm::{FreqFrame, WaveformConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WindowKind {
    Rectangular,
    /// Dolph-Chebyshev with equiripple sidelobes `sidelobe_db` below the peak.
    Chebyshev {
        sidelobe_db: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Range,
    Doppler,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub kind: WindowKind,
    pub axis: Axis,
}

impl WindowSpec {
    pub fn rectangular(axis: Axis) -> Self {
        Self { kind: WindowKind::Rectangular, axis }
    }

    pub fn chebyshev(axis: Axis, sidelobe_db: f64) -> Self {
        Self { kind: WindowKind::Chebyshev { sidelobe_db }, axis }
    }

    pub fn label(&self) -> String {
        match self.kind {
            WindowKind::Rectangular => "rectangular".into(),
            WindowKind::Chebyshev { sidelobe_db } => format!("chebyshev-{sidelobe_db}dB"),
        }
    }
}

/// Window weights scaled so they sum to `length`.
pub fn make_window(spec: &WindowSpec, length: usize) -> Result<Vec<f64>> {
    if length < 2 {
        return domain(format!("window length {length} too short"));
    }
    let mut w = match spec.kind {
        WindowKind::Rectangular => return Ok(vec![1.0; length]),
        WindowKind::Chebyshev { sidelobe_db } => {
            if !(sidelobe_db.is_finite() && sidelobe_db > 0.0) {
                return domain("Chebyshev attenuation must be positive");
            }
            chebyshev(length, sidelobe_db)
        }
    };
    let sum: f64 = w.iter().sum();
    let scale = length as f64 / sum;
    w.iter_mut().for_each(|v| *v *= scale);
    Ok(w)
}

/// Dolph-Chebyshev weights, peak-normalized, built from samples of the
/// Chebyshev polynomial on the unit circle.
fn chebyshev(m: usize, at_db: f64) -> Vec<f64> {
    let order = (m - 1) as f64;
    let beta = ((10f64.powf(at_db / 20.0)).acosh() / order).cosh();
    let odd = m % 2 == 1;
    let mut p: Vec<Complex64> = (0..m)
        .map(|k| {
            let x = beta * (std::f64::consts::PI * k as f64 / m as f64).cos();
            let v = if x > 1.0 {
                (order * x.acosh()).cosh()
            } else if x < -1.0 {
                let sign = if odd { 1.0 } else { -1.0 };
                sign * (order * (-x).acosh()).cosh()
            } else {
                (order * x.acos()).cos()
            };
            if odd {
                Complex64::new(v, 0.0)
            } else {
                v * Complex64::from_polar(1.0, std::f64::consts::PI * k as f64 / m as f64)
            }
        })
        .collect();
    fft::forward(m).process(&mut p);
    let re: Vec<f64> = p.iter().map(|c| c.re).collect();
    let mut w = Vec::with_capacity(m);
    if odd {
        let n = m.div_ceil(2);
        w.extend(re[1..n].iter().rev());
        w.extend(&re[..n]);
    } else {
        let n = m / 2 + 1;
        w.extend(re[1..n].iter().rev());
        w.extend(&re[1..n]);
    }
    let peak = w.iter().cloned().fold(f64::MIN, f64::max);
    w.iter_mut().for_each(|v| *v /= peak);
    w
}

/// Physical axes of a range-Doppler image.
#[derive(Debug, Clone, PartialEq)]
pub struct Axes {
    pub range_m: Vec<f64>,
    pub doppler_hz: Vec<f64>,
    pub range_resolution_m: f64,
    pub doppler_resolution_hz: f64,
    pub max_unambiguous_range_m: f64,
}

pub fn axes(cfg: &WaveformConfig, architecture: Architecture) -> Axes {
    let dr = architecture.range_resolution(cfg.bandwidth_hz);
    let n = cfg.n_subcarriers;
    let m = cfg.n_symbols;
    let dfd = cfg.bandwidth_hz / (m as f64 * cfg.symbol_len() as f64);
    Axes {
        range_m: (0..n).map(|i| i as f64 * dr).collect(),
        doppler_hz: (0..m).map(|j| (j as f64 - (m / 2) as f64) * dfd).collect(),
        range_resolution_m: dr,
        doppler_resolution_hz: dfd,
        max_unambiguous_range_m: n as f64 * dr,
    }
}

/// Complex range-Doppler grid.
///
/// `grid[r * n_doppler + d]` holds range bin `r` and Doppler bin `d`, where
/// `d = n_doppler/2` is zero Doppler.
#[derive(Debug, Clone)]
pub struct RadarImage {
    pub grid: Vec<Complex64>,
    pub n_range: usize,
    pub n_doppler: usize,
    pub axes: Axes,
    pub range_window: WindowSpec,
    pub doppler_window: WindowSpec,
    pub architecture: Architecture,
    /// Peak power of a unit-gain target on a bin centre with these windows.
    pub reference_power: f64,
}

impl RadarImage {
    #[inline]
    pub fn at(&self, r: usize, d: usize) -> Complex64 {
        self.grid[r * self.n_doppler + d]
    }

    #[inline]
    pub fn power(&self, r: usize, d: usize) -> f64 {
        self.at(r, d).norm_sqr()
    }

    /// Doppler bin index of zero Doppler.
    pub fn zero_doppler(&self) -> usize {
        self.n_doppler / 2
    }

    /// Doppler bin nearest to `f_d`, aliased into the unambiguous interval.
    pub fn doppler_bin(&self, f_d: f64) -> usize {
        let rel = (f_d / self.axes.doppler_resolution_hz).round() as i64;
        (rel + self.zero_doppler() as i64).rem_euclid(self.n_doppler as i64) as usize
    }

    /// Location and power of the strongest pixel.
    pub fn argmax(&self) -> ((usize, usize), f64) {
        let (idx, p) = self.grid.iter().enumerate().map(|(i, v)| (i, v.norm_sqr())).fold((0, f64::MIN), |a, b| {
            if b.1 > a.1 {
                b
            } else {
                a
            }
        });
        ((idx / self.n_doppler, idx % self.n_doppler), p)
    }

    /// Power in dB relative to [`RadarImage::reference_power`].
    pub fn magnitude_db(&self, r: usize, d: usize) -> f64 {
        10.0 * (self.power(r, d) / self.reference_power).log10()
    }

    /// Range profile through Doppler bin `d`, interpolated by `oversample`
    /// through zero-padding of its spectrum. Returns powers; sample
    /// `r * oversample` coincides with range bin `r`.
    pub fn range_cut(&self, d: usize, oversample: usize) -> Vec<f64> {
        let n = self.n_range;
        let mut col: Vec<Complex64> = (0..n).map(|r| self.at(r, d)).collect();
        fft::forward(n).process(&mut col);
        let big = n * oversample.max(1);
        let mut padded = vec![Complex64::default(); big];
        for (i, v) in col.iter().enumerate() {
            // negative subcarriers go to the top of the padded spectrum
            let k = if i < n / 2 { i } else { i + big - n };
            padded[k] = *v;
        }
        fft::inverse(big).process(&mut padded);
        let scale = 1.0 / (n as f64);
        padded.iter().map(|v| (v * scale).norm_sqr()).collect()
    }

    /// Doppler profile through range bin `r`, interpolated by `oversample`.
    /// Sample `d * oversample` coincides with Doppler bin `d`.
    pub fn doppler_cut(&self, r: usize, oversample: usize) -> Vec<f64> {
        let m = self.n_doppler;
        let row = &self.grid[r * m..(r + 1) * m];
        // undo the centring, return to slow time
        let mut slow: Vec<Complex64> = (0..m).map(|j| row[(j + m / 2) % m]).collect();
        fft::inverse(m).process(&mut slow);
        let big = m * oversample.max(1);
        let mut padded = vec![Complex64::default(); big];
        padded[..m].copy_from_slice(&slow);
        fft::forward(big).process(&mut padded);
        let scale = 1.0 / m as f64;
        let shift = (m / 2) * oversample.max(1);
        (0..big).map(|j| (padded[(j + big - shift) % big] * scale).norm_sqr()).collect()
    }

    /// The first `n` range bins.
    pub fn crop_range(&self, n: usize) -> Self {
        let n = n.min(self.n_range);
        let mut out = self.clone();
        out.grid.truncate(n * self.n_doppler);
        out.n_range = n;
        out.axes.range_m.truncate(n);
        out
    }

    /// Writes `range_m,doppler_hz,magnitude_db` rows.
    pub fn write_csv<W: Write>(&self, mut out: W, header_comments: &[String]) -> Result<()> {
        for c in header_comments {
            writeln!(out, "# {c}")?;
        }
        writeln!(out, "range_m,doppler_hz,magnitude_db")?;
        for r in 0..self.n_range {
            for d in 0..self.n_doppler {
                writeln!(
                    out,
                    "{:.6},{:.6},{:.4}",
                    self.axes.range_m[r],
                    self.axes.doppler_hz[d],
                    self.magnitude_db(r, d).max(-400.0)
                )?;
            }
        }
        Ok(())
    }
}

/// Range-Doppler image from the element-wise ratio of received and known
/// frames. Range profiles come from an inverse DFT across subcarriers and
/// Doppler profiles from a DFT across symbols, both unitary.
pub fn form_image(
    received: &FreqFrame,
    known: &FreqFrame,
    win_range: &WindowSpec,
    win_doppler: &WindowSpec,
    architecture: Architecture,
) -> Result<RadarImage> {
    let cfg = received.config;
    if known.config.n_subcarriers != cfg.n_subcarriers || known.config.n_symbols != cfg.n_symbols {
        return Err(Error::Frame("received and known frames differ in size".into()));
    }
    let (n, m) = (cfg.n_subcarriers, cfg.n_symbols);
    let wr = make_window(win_range, n)?;
    let wd = make_window(win_doppler, m)?;

    let mut div = Vec::with_capacity(n * m);
    for (sym, w) in wd.iter().enumerate() {
        let (y, x) = (received.symbol(sym), known.symbol(sym));
        for i in 0..n {
            if x[i].norm_sqr() == 0.0 {
                return Err(Error::Frame(format!("known frame is zero at bin {i} of symbol {sym}")));
            }
            div.push(y[i] / x[i] * (wr[fft::signed_position(i, n)] * w));
        }
    }
    fft::unitary_chunks(&mut div, n, true);

    let mut grid = vec![Complex64::default(); n * m];
    for sym in 0..m {
        for r in 0..n {
            grid[r * m + sym] = div[sym * n + r];
        }
    }
    drop(div);
    fft::unitary_chunks(&mut grid, m, false);
    let half = m / 2;
    for row in grid.chunks_exact_mut(m) {
        row.rotate_right(half);
    }

    let gain_r: f64 = wr.iter().sum();
    let gain_d: f64 = wd.iter().sum();
    Ok(RadarImage {
        grid,
        n_range: n,
        n_doppler: m,
        axes: axes(&cfg, architecture),
        range_window: *win_range,
        doppler_window: *win_doppler,
        architecture,
        reference_power: (gain_r * gain_d).powi(2) / (n * m) as f64,
    })
}
