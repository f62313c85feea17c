//! OFDM frame construction, (de)modulation and communication metrics.
//!
//! Frequency-domain grids are stored symbol by symbol with subcarriers in
//! FFT order (bin `i` holds subcarrier `k = i` for `i < N/2` and `k = i - N`
//! otherwise). Both transform directions use the unitary `1/√N` scaling.

use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::fft;

/// EVM reported when the error vector vanishes.
pub const EVM_FLOOR_DB: f64 = -300.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modulation {
    Qpsk,
    Qam16,
    Qam64,
    Qam256,
}

impl Modulation {
    pub const ALL: [Modulation; 4] = [Self::Qpsk, Self::Qam16, Self::Qam64, Self::Qam256];

    pub fn bits_per_symbol(self) -> u32 {
        match self {
            Self::Qpsk => 2,
            Self::Qam16 => 4,
            Self::Qam64 => 6,
            Self::Qam256 => 8,
        }
    }

    pub fn order(self) -> usize {
        1 << self.bits_per_symbol()
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Qpsk => "QPSK",
            Self::Qam16 => "16-QAM",
            Self::Qam64 => "64-QAM",
            Self::Qam256 => "256-QAM",
        }
    }

    /// Unit-average-power square constellation, indexed by bit label.
    ///
    /// The upper half of the label selects the in-phase level and the lower
    /// half the quadrature level, each Gray coded.
    pub fn constellation(self) -> Vec<Complex64> {
        let half = self.bits_per_symbol() / 2;
        let levels = 1usize << half;
        let norm = (2.0 * ((levels * levels) as f64 - 1.0) / 3.0).sqrt();
        let amplitude = |bits: usize| {
            let level = gray_decode(bits);
            (2.0 * level as f64 - (levels as f64 - 1.0)) / norm
        };
        (0..self.order())
            .map(|label| Complex64::new(amplitude(label >> half), amplitude(label & (levels - 1))))
            .collect()
    }
}

impl std::str::FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "").as_str() {
            "qpsk" | "4qam" => Ok(Self::Qpsk),
            "qam16" | "16qam" => Ok(Self::Qam16),
            "qam64" | "64qam" => Ok(Self::Qam64),
            "qam256" | "256qam" => Ok(Self::Qam256),
            other => Err(Error::Config(format!("unknown modulation `{other}`"))),
        }
    }
}

fn gray_decode(mut g: usize) -> usize {
    let mut b = g;
    while g > 0 {
        g >>= 1;
        b ^= g;
    }
    b
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveformConfig {
    /// Carrier frequency (Hz).
    pub carrier_hz: f64,
    /// Occupied bandwidth, equal to the simulation sample rate (Hz).
    pub bandwidth_hz: f64,
    pub n_subcarriers: usize,
    pub cp_length: usize,
    pub n_symbols: usize,
    pub modulation: Modulation,
}

impl WaveformConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth_hz.is_finite() && self.bandwidth_hz > 0.0) {
            return domain("bandwidth must be positive");
        }
        if !(self.carrier_hz.is_finite() && self.carrier_hz >= 0.0) {
            return domain("carrier frequency must be non-negative");
        }
        if self.n_subcarriers < 2 || self.n_symbols == 0 {
            return domain("frame needs at least two subcarriers and one symbol");
        }
        if self.cp_length > self.n_subcarriers {
            return domain("cyclic prefix longer than the symbol");
        }
        Ok(())
    }

    pub fn subcarrier_spacing(&self) -> f64 {
        self.bandwidth_hz / self.n_subcarriers as f64
    }

    /// Samples per symbol including the cyclic prefix.
    pub fn symbol_len(&self) -> usize {
        self.n_subcarriers + self.cp_length
    }

    pub fn frame_len(&self) -> usize {
        self.symbol_len() * self.n_symbols
    }

    pub fn sample_rate(&self) -> f64 {
        self.bandwidth_hz
    }
}

/// `N × M` grid of subcarrier values.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqFrame {
    pub config: WaveformConfig,
    data: Vec<Complex64>,
}

impl FreqFrame {
    pub fn zeros(config: WaveformConfig) -> Self {
        let n = config.n_subcarriers * config.n_symbols;
        Self { config, data: vec![Complex64::default(); n] }
    }

    /// Builds a frame from symbol-major data in FFT bin order.
    pub fn from_data(config: WaveformConfig, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != config.n_subcarriers * config.n_symbols {
            return Err(Error::Frame(format!(
                "grid of {} values does not match {}x{}",
                data.len(),
                config.n_subcarriers,
                config.n_symbols
            )));
        }
        Ok(Self { config, data })
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    /// Subcarriers of symbol `m` in FFT order.
    pub fn symbol(&self, m: usize) -> &[Complex64] {
        let n = self.config.n_subcarriers;
        &self.data[m * n..(m + 1) * n]
    }

    pub fn symbol_mut(&mut self, m: usize) -> &mut [Complex64] {
        let n = self.config.n_subcarriers;
        &mut self.data[m * n..(m + 1) * n]
    }

    /// FFT-order bin of signed subcarrier `k`.
    pub fn bin(&self, k: i64) -> usize {
        let n = self.config.n_subcarriers as i64;
        k.rem_euclid(n) as usize
    }

    pub fn get(&self, k: i64, m: usize) -> Complex64 {
        self.symbol(m)[self.bin(k)]
    }

    /// Signed subcarrier index of FFT-order bin `i`.
    pub fn subcarrier_index(&self, i: usize) -> i64 {
        let n = self.config.n_subcarriers;
        if i < n.div_ceil(2) {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    fn check_same_shape(&self, other: &FreqFrame) -> Result<()> {
        if self.config.n_subcarriers != other.config.n_subcarriers || self.config.n_symbols != other.config.n_symbols {
            return Err(Error::Frame("frames have different dimensions".into()));
        }
        Ok(())
    }

    /// Writes `I,Q,symbol,subcarrier` rows, preceded by comment lines.
    pub fn write_constellation_csv<W: Write>(&self, mut out: W, header_comments: &[String]) -> Result<()> {
        for c in header_comments {
            writeln!(out, "# {c}")?;
        }
        writeln!(out, "i,q,symbol,subcarrier")?;
        for m in 0..self.config.n_symbols {
            for (i, v) in self.symbol(m).iter().enumerate() {
                writeln!(out, "{:.9e},{:.9e},{},{}", v.re, v.im, m, self.subcarrier_index(i))?;
            }
        }
        Ok(())
    }
}

/// Serialized baseband samples at rate `B`, cyclic prefixes included.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeFrame {
    pub config: WaveformConfig,
    pub samples: Vec<Complex64>,
}

impl TimeFrame {
    pub fn new(config: WaveformConfig, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != config.frame_len() {
            return Err(Error::Frame(format!("{} samples given, frame needs {}", samples.len(), config.frame_len())));
        }
        Ok(Self { config, samples })
    }
}

/// I.i.d. uniformly drawn constellation points.
pub fn random_frame(config: &WaveformConfig, seed: u64) -> FreqFrame {
    let points = config.modulation.constellation();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data =
        (0..config.n_subcarriers * config.n_symbols).map(|_| points[rng.random_range(0..points.len())]).collect();
    FreqFrame { config: *config, data }
}

pub fn modulate(frame: &FreqFrame) -> TimeFrame {
    let cfg = frame.config;
    let (n, cp) = (cfg.n_subcarriers, cfg.cp_length);
    let mut payload = frame.data.clone();
    fft::unitary_chunks(&mut payload, n, true);
    let mut samples = Vec::with_capacity(cfg.frame_len());
    for sym in payload.chunks_exact(n) {
        samples.extend_from_slice(&sym[n - cp..]);
        samples.extend_from_slice(sym);
    }
    TimeFrame { config: cfg, samples }
}

pub fn demodulate(t: &TimeFrame) -> Result<FreqFrame> {
    let cfg = t.config;
    if t.samples.len() != cfg.frame_len() {
        return Err(Error::Frame(format!("{} samples received, frame needs {}", t.samples.len(), cfg.frame_len())));
    }
    let (n, cp) = (cfg.n_subcarriers, cfg.cp_length);
    let mut data = Vec::with_capacity(n * cfg.n_symbols);
    for sym in t.samples.chunks_exact(cfg.symbol_len()) {
        data.extend_from_slice(&sym[cp..]);
    }
    fft::unitary_chunks(&mut data, n, false);
    Ok(FreqFrame { config: cfg, data })
}

/// Scalar applied to the received grid before measuring the error vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Equalizer {
    None,
    /// Single complex scalar per frame minimizing `Σ|cY - X|²`.
    LeastSquares,
}

/// Error-vector magnitude in dB, relative to the RMS reference power.
pub fn evm(received: &FreqFrame, reference: &FreqFrame) -> Result<f64> {
    evm_with(received, reference, Equalizer::LeastSquares)
}

pub fn evm_with(received: &FreqFrame, reference: &FreqFrame, eq: Equalizer) -> Result<f64> {
    received.check_same_shape(reference)?;
    let ref_power: f64 = reference.data.iter().map(|x| x.norm_sqr()).sum();
    if ref_power == 0.0 {
        return domain("reference frame carries no power");
    }
    let scale = match eq {
        Equalizer::None => Complex64::new(1.0, 0.0),
        Equalizer::LeastSquares => {
            let rx_power: f64 = received.data.iter().map(|y| y.norm_sqr()).sum();
            if rx_power == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                let cross: Complex64 = received.data.iter().zip(&reference.data).map(|(y, x)| y.conj() * x).sum();
                cross / rx_power
            }
        }
    };
    let err: f64 = received.data.iter().zip(&reference.data).map(|(y, x)| (scale * y - x).norm_sqr()).sum();
    let db = 10.0 * (err / ref_power).log10();
    Ok(if db.is_nan() || db < EVM_FLOOR_DB { EVM_FLOOR_DB } else { db })
}

/// Signal-to-interference ratio per subcarrier in dB; the negative of [`evm`].
pub fn subcarrier_sir(received: &FreqFrame, reference: &FreqFrame) -> Result<f64> {
    Ok(-evm(received, reference)?)
}
