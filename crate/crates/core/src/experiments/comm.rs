//! Communication-side experiments: EVM, subcarrier SIR, constellations.

use rayon::prelude::*;

use super::engine::{apply_correction, gammas_for_levels, level_grid, waveform, Link, Stats};
use super::pn::N_VALUES;
use super::{num, ExperimentOutput, RunContext, Table, METRIC_COLUMNS};
use crate::config::{reference_pll, CpeCorrection};
use crate::error::Result;
use crate::ofdm::{evm, FreqFrame, Modulation};

/// EVM statistics of one waveform at one phase-noise scaling.
#[derive(Debug, Clone)]
pub struct EvmPoint {
    pub n_subcarriers: usize,
    pub modulation: Modulation,
    pub gamma_db: f64,
    pub combined_pn_dbc: f64,
    pub evm: Stats,
    pub evm_corrected: Stats,
}

impl EvmPoint {
    pub fn scenario_id(&self) -> String {
        format!("n{}-{}", self.n_subcarriers, self.modulation.name())
    }
}

/// EVM with and without full-frame CPE correction over a bistatic link with
/// the reference oscillator at both ends and `N_CP = N/4`.
pub fn evm_sweep(
    ns: &[usize],
    modulations: &[Modulation],
    gammas_db: &[f64],
    n_symbols: usize,
    realizations: usize,
    seed: u64,
) -> Result<Vec<EvmPoint>> {
    let mut out = Vec::new();
    for &n in ns {
        for &modulation in modulations {
            let link = Link::bistatic_static(waveform(n, n / 4, n_symbols, modulation), reference_pll());
            let base = link.combined_dbc()?;
            let trials: Vec<Vec<(f64, f64)>> = (0..realizations as u64)
                .into_par_iter()
                .map(|r| -> Result<Vec<(f64, f64)>> {
                    let real = link.draw(seed, r)?;
                    gammas_db
                        .iter()
                        .map(|&g| {
                            let y = real.receive(&link, g)?;
                            let raw = evm(&y, &real.known)?;
                            let fixed = apply_correction(y, &real.known, CpeCorrection::FullFrame)?;
                            Ok((raw, evm(&fixed, &real.known)?))
                        })
                        .collect()
                })
                .collect::<Result<_>>()?;
            for (i, &g) in gammas_db.iter().enumerate() {
                let raw: Vec<f64> = trials.iter().map(|t| t[i].0).collect();
                let fixed: Vec<f64> = trials.iter().map(|t| t[i].1).collect();
                out.push(EvmPoint {
                    n_subcarriers: n,
                    modulation,
                    gamma_db: g,
                    combined_pn_dbc: base + g,
                    evm: Stats::of(&raw),
                    evm_corrected: Stats::of(&fixed),
                });
            }
        }
    }
    Ok(out)
}

fn push_evm(table: &mut Table, points: &[EvmPoint], as_sir: bool) {
    let sign = if as_sir { -1.0 } else { 1.0 };
    let (plain, fixed) = if as_sir { ("sir", "sir_cpe_corrected") } else { ("evm", "evm_cpe_corrected") };
    for p in points {
        for (name, s) in [(plain, p.evm), (fixed, p.evm_corrected)] {
            table.push(vec![
                p.scenario_id(),
                num(p.gamma_db),
                num(p.combined_pn_dbc),
                name.to_string(),
                num(sign * s.mean),
                num(s.std),
                s.n.to_string(),
            ]);
        }
    }
}

/// Scalings of the communication study.
pub const EVM_GAMMAS_DB: [f64; 7] = [0.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0];

pub fn evm_vs_n(ctx: &RunContext) -> Result<ExperimentOutput> {
    let mut out = ExperimentOutput::new("evm-vs-n", ctx);
    let points = evm_sweep(&N_VALUES, &Modulation::ALL, &EVM_GAMMAS_DB, ctx.symbols(128), ctx.reps(), ctx.seed)?;
    let mut t = Table::new("evm", "evm-vs-n/evm", &METRIC_COLUMNS);
    t.comments.push("bistatic link, single static path, N_CP = N/4".into());
    push_evm(&mut t, &points, false);
    out.tables.push(t);
    Ok(out)
}

/// Subcarrier counts and alphabets of the SIR and sensing studies.
pub const SENSING_N: [usize; 3] = [256, 2048, 16384];
pub const SENSING_MODULATIONS: [Modulation; 2] = [Modulation::Qpsk, Modulation::Qam256];

/// SIR against combined level, with and without CPE correction.
pub fn sir_sweep(levels_dbc: &[f64], n_symbols: usize, realizations: usize, seed: u64) -> Result<Vec<EvmPoint>> {
    let probe = Link::bistatic_static(waveform(256, 64, 8, Modulation::Qpsk), reference_pll());
    let gammas = gammas_for_levels(&probe, levels_dbc)?;
    evm_sweep(&SENSING_N, &SENSING_MODULATIONS, &gammas, n_symbols, realizations, seed)
}

pub fn sir_vs_pn(ctx: &RunContext) -> Result<ExperimentOutput> {
    let mut out = ExperimentOutput::new("sir-vs-pn", ctx);
    let points = sir_sweep(&level_grid(-45.0, 20.0, 5.0), ctx.symbols(128), ctx.reps(), ctx.seed)?;
    let mut t = Table::new("sir", "sir-vs-pn/sir", &METRIC_COLUMNS);
    t.comments.push("bistatic link, single static path, N_CP = N/4".into());
    push_evm(&mut t, &points, true);
    out.tables.push(t);
    Ok(out)
}

pub fn constellations(ctx: &RunContext) -> Result<ExperimentOutput> {
    let mut out = ExperimentOutput::new("constellations", ctx);
    let shown_symbols = 2;
    for n in [256, 16384] {
        for modulation in SENSING_MODULATIONS {
            let link = Link::bistatic_static(waveform(n, n / 4, ctx.symbols(128), modulation), reference_pll());
            let real = link.draw(ctx.seed, 0)?;
            for g in [0.0, 30.0, 50.0, 60.0] {
                let y = real.receive(&link, g)?;
                let name = format!("n{n}_{}_gamma{}", modulation.name(), g as i64);
                let mut t = Table::new(&name, &format!("constellations/{name}"), &["i", "q", "symbol", "subcarrier"]);
                t.comments.push(format!("combined level: {} dBc", num(link.combined_dbc()? + g)));
                push_constellation(&mut t, &y, shown_symbols);
                out.tables.push(t);
            }
        }
    }
    Ok(out)
}

fn push_constellation(t: &mut Table, y: &FreqFrame, symbols: usize) {
    let n = y.config.n_subcarriers;
    for m in 0..symbols.min(y.config.n_symbols) {
        for (i, v) in y.symbol(m).iter().enumerate() {
            t.push(vec![
                format!("{:.6}", v.re),
                format!("{:.6}", v.im),
                m.to_string(),
                y.subcarrier_index(i).to_string(),
            ]);
        }
    }
    debug_assert!(t.rows.len() <= symbols * n);
}
