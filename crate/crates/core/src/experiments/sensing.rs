//! Radar-side experiments on the range-Doppler image.

use rayon::prelude::*;

use super::comm::{SENSING_MODULATIONS, SENSING_N};
use super::engine::{self, gammas_for_levels, level_grid, sweep, waveform, Link, MetricSel, PointResult, Stats};
use super::{num, push_points, ExperimentOutput, NamedImage, RunContext, Table, METRIC_COLUMNS};
use crate::channel::{Architecture, Path, PathSet, PnApplication, PnMode};
use crate::config::{reference_pll, CpeCorrection, Scenario, ScenarioConfig, BUILTIN_SCENARIOS};
use crate::cpe::{
    estimate_cpe_at_bin, estimate_cpe_from_reference, phase_std, rms_phase_difference, ReferenceCpeOptions,
};
use crate::error::Result;
use crate::ofdm::Modulation;
use crate::radar::{form_image, Axis, WindowSpec};
use crate::{db10, C0};

/// Combined levels of the sensing sweeps (dBc).
pub fn sensing_levels() -> Vec<f64> {
    level_grid(-45.0, 35.0, 5.0)
}

/// Combined level treated as the high-noise limit (dBc).
pub const EXTREME_LEVEL_DBC: f64 = 30.0;

/// Static target at bin 0 on a bistatic link with `N_CP = N`.
pub fn sensing_link(n: usize, m: usize, modulation: Modulation, doppler_hz: f64) -> Link {
    Link::bistatic_moving(waveform(n, n, m, modulation), reference_pll(), doppler_hz)
}

/// Sweep of `link` over combined levels, with a phase-noise-free point first
/// when `with_ideal` is set.
pub fn level_sweep(
    link: &Link,
    levels_dbc: &[f64],
    with_ideal: bool,
    realizations: usize,
    seed: u64,
    correction: CpeCorrection,
    sel: MetricSel,
) -> Result<Vec<PointResult>> {
    let mut gammas = if with_ideal { vec![f64::NEG_INFINITY] } else { vec![] };
    gammas.extend(gammas_for_levels(link, levels_dbc)?);
    sweep(link, &gammas, realizations, seed, correction, sel)
}

/// One labelled curve family member.
#[derive(Debug, Clone)]
pub struct Curve {
    pub id: String,
    pub points: Vec<PointResult>,
}

/// Level sweeps for every `N` and modulation of the sensing study.
pub fn n_family(
    ns: &[usize],
    modulations: &[Modulation],
    m: usize,
    levels_dbc: &[f64],
    realizations: usize,
    seed: u64,
    correction: CpeCorrection,
    sel: MetricSel,
) -> Result<Vec<Curve>> {
    let mut out = Vec::new();
    for &n in ns {
        for &modulation in modulations {
            let link = sensing_link(n, m, modulation, 0.0);
            out.push(Curve {
                id: format!("n{n}-{}", modulation.name()),
                points: level_sweep(&link, levels_dbc, true, realizations, seed, correction, sel)?,
            });
        }
    }
    Ok(out)
}

fn family_output(name: &str, table: &str, ctx: &RunContext, curves: &[Curve], note: &str) -> ExperimentOutput {
    let mut out = ExperimentOutput::new(name, ctx);
    let mut t = Table::new(table, &format!("{name}/{table}"), &METRIC_COLUMNS);
    t.comments.push(note.to_string());
    for c in curves {
        push_points(&mut t, &c.id, &c.points);
    }
    out.tables.push(t);
    out
}

const STATIC_NOTE: &str = "bistatic link, single static target at range bin 0, N_CP = N";

pub fn null(ctx: &RunContext) -> Result<ExperimentOutput> {
    let mut out = ExperimentOutput::new("null", ctx);
    let mut t = Table::new("metrics", "null/metrics", &METRIC_COLUMNS);
    t.comments.push(format!("{STATIC_NOTE}, phase noise off"));
    for n in [256, 2048] {
        let link = sensing_link(n, ctx.symbols(128), Modulation::Qpsk, 0.0);
        let pts = sweep(&link, &[f64::NEG_INFINITY], ctx.reps().min(2), ctx.seed, CpeCorrection::Off, MetricSel::ALL)?;
        push_points(&mut t, &format!("n{n}-qpsk"), &pts);
    }
    out.tables.push(t);
    Ok(out)
}

pub fn sidelobes_vs_pn(ctx: &RunContext) -> Result<ExperimentOutput> {
    let curves = n_family(
        &SENSING_N,
        &SENSING_MODULATIONS,
        ctx.symbols(128),
        &sensing_levels(),
        ctx.reps(),
        ctx.seed,
        CpeCorrection::Off,
        MetricSel::SIDELOBES,
    )?;
    Ok(family_output("sidelobes-vs-pn", "sidelobes", ctx, &curves, STATIC_NOTE))
}

pub fn sidelobes_vs_pn_cpe_corrected(ctx: &RunContext) -> Result<ExperimentOutput> {
    let curves = n_family(
        &SENSING_N,
        &SENSING_MODULATIONS,
        ctx.symbols(128),
        &sensing_levels(),
        ctx.reps(),
        ctx.seed,
        CpeCorrection::FullFrame,
        MetricSel::SIDELOBES,
    )?;
    let note = format!("{STATIC_NOTE}, full-frame CPE correction");
    Ok(family_output("sidelobes-vs-pn-cpe-corrected", "sidelobes", ctx, &curves, &note))
}

pub fn image_sir(ctx: &RunContext) -> Result<ExperimentOutput> {
    let curves = n_family(
        &SENSING_N,
        &SENSING_MODULATIONS,
        ctx.symbols(128),
        &sensing_levels(),
        ctx.reps(),
        ctx.seed,
        CpeCorrection::Off,
        MetricSel::IMAGE_SIR,
    )?;
    let note = format!("{STATIC_NOTE}, Chebyshev windows ({} dB)", engine::SIR_WINDOW_DB);
    Ok(family_output("image-sir", "image_sir", ctx, &curves, &note))
}

pub fn image_sir_cpe_corrected(ctx: &RunContext) -> Result<ExperimentOutput> {
    let curves = n_family(
        &SENSING_N,
        &SENSING_MODULATIONS,
        ctx.symbols(128),
        &sensing_levels(),
        ctx.reps(),
        ctx.seed,
        CpeCorrection::FullFrame,
        MetricSel::IMAGE_SIR,
    )?;
    let note = format!("{STATIC_NOTE}, Chebyshev windows ({} dB), full-frame CPE correction", engine::SIR_WINDOW_DB);
    Ok(family_output("image-sir-cpe-corrected", "image_sir", ctx, &curves, &note))
}

/// Symbol counts of the M study.
pub const M_VALUES: [usize; 4] = [32, 128, 512, 2048];

/// Level sweeps for N = 2048, QPSK and every symbol count in `ms`.
pub fn m_family(ms: &[usize], levels_dbc: &[f64], realizations: usize, seed: u64) -> Result<Vec<Curve>> {
    ms.iter()
        .map(|&m| {
            let link = sensing_link(2048, m, Modulation::Qpsk, 0.0);
            Ok(Curve {
                id: format!("m{m}"),
                points: level_sweep(
                    &link,
                    levels_dbc,
                    true,
                    realizations,
                    seed,
                    CpeCorrection::Off,
                    MetricSel::SIDELOBES,
                )?,
            })
        })
        .collect()
}

pub fn sidelobes_vs_m(ctx: &RunContext) -> Result<ExperimentOutput> {
    let ms: Vec<usize> = M_VALUES.iter().map(|&m| ctx.symbols(m)).collect();
    let curves = m_family(&ms, &sensing_levels(), ctx.reps(), ctx.seed)?;
    Ok(family_output("sidelobes-vs-m", "sidelobes", ctx, &curves, "N = N_CP = 2048, QPSK, single static target"))
}

/// Doppler shifts of the moving-target study, in units of `Δf`.
pub const DOPPLER_FRACTIONS: [f64; 5] = [-0.5, -0.1, 0.0, 0.1, 0.5];

/// PPLR sweeps for N = 2048, QPSK and each Doppler fraction. Each curve is
/// referred to its own phase-noise-free image, Doppler included.
pub fn doppler_family(
    fractions: &[f64],
    m: usize,
    levels_dbc: &[f64],
    realizations: usize,
    seed: u64,
) -> Result<Vec<Curve>> {
    let n = 2048;
    fractions
        .iter()
        .map(|&frac| {
            let probe = waveform(n, n, m, Modulation::Qpsk);
            let link = sensing_link(n, m, Modulation::Qpsk, frac * probe.subcarrier_spacing());
            let sel = MetricSel::SIDELOBES;
            Ok(Curve {
                id: format!("fd{frac:+.1}df"),
                points: level_sweep(&link, levels_dbc, true, realizations, seed, CpeCorrection::Off, sel)?,
            })
        })
        .collect()
}

pub fn pplr_vs_doppler(ctx: &RunContext) -> Result<ExperimentOutput> {
    let curves = doppler_family(&DOPPLER_FRACTIONS, ctx.symbols(128), &sensing_levels(), ctx.reps(), ctx.seed)?;
    let mut out = ExperimentOutput::new("pplr-vs-doppler", ctx);
    let mut t = Table::new("pplr", "pplr-vs-doppler/pplr", &METRIC_COLUMNS);
    t.comments.push("N = N_CP = 2048, QPSK; each curve against its own phase-noise-free image".into());
    for c in &curves {
        let pts: Vec<PointResult> = c
            .points
            .iter()
            .map(|p| PointResult {
                metrics: p.metrics.iter().filter(|(m, _)| *m == engine::PPLR).cloned().collect(),
                ..p.clone()
            })
            .collect();
        push_points(&mut t, &c.id, &pts);
    }
    out.tables.push(t);
    Ok(out)
}

/// Doppler cut through range bin 0 of one realization, in dB relative to
/// the phase-noise-free peak. Sample `i` sits at Doppler bin `i / os`.
pub fn doppler_cut_db(link: &Link, gamma_db: f64, seed: u64, os: usize) -> Result<Vec<f64>> {
    let real = link.draw(seed, 0)?;
    let (wr, wd) = (WindowSpec::rectangular(Axis::Range), WindowSpec::rectangular(Axis::Doppler));
    let arch = link.paths.architecture;
    let ideal = form_image(&real.receive_ideal(link)?, &real.known, &wr, &wd, arch)?;
    let peak = ideal.argmax().1;
    let img = form_image(&real.receive(link, gamma_db)?, &real.known, &wr, &wd, arch)?;
    Ok(img.doppler_cut(0, os).iter().map(|p| db10(p / peak)).collect())
}

pub fn doppler_cut(ctx: &RunContext) -> Result<ExperimentOutput> {
    let mut out = ExperimentOutput::new("doppler-cut", ctx);
    let os = 4;
    let mut t = Table::new("doppler_cut", "doppler-cut/cut", &["scenario_id", "level_dbc", "doppler_hz", "power_db"]);
    t.comments.push(format!("{STATIC_NOTE}, QPSK, one realization, range bin 0, oversampled x{os}"));
    for n in SENSING_N {
        let link = sensing_link(n, ctx.symbols(128), Modulation::Qpsk, 0.0);
        let base = link.combined_dbc()?;
        let dfd = link.waveform.bandwidth_hz / (link.waveform.n_symbols * link.waveform.symbol_len()) as f64;
        let zero = (link.waveform.n_symbols / 2) as f64;
        for level in [f64::NEG_INFINITY, 10.0, 35.0] {
            let cut = doppler_cut_db(&link, level - base, ctx.seed, os)?;
            for (i, p) in cut.iter().enumerate() {
                let hz = (i as f64 / os as f64 - zero) * dfd;
                t.push(vec![format!("n{n}-qpsk"), num(level), num(hz), num(p.max(-400.0))]);
            }
        }
    }
    out.tables.push(t);
    Ok(out)
}

/// Range bins shown in the two-target image files.
pub const TWO_TARGET_CROP: usize = 128;

/// Static target at 10 m and a target at 15 m moving at `0.1 Δf`, bistatic,
/// N = 2048, N_CP = 512, QPSK.
pub fn two_target_link(m: usize) -> Link {
    let wf = waveform(2048, 512, m, Modulation::Qpsk);
    let dr = Architecture::Bistatic.range_resolution(wf.bandwidth_hz);
    let bin = |r: f64| (r / dr).round() as usize;
    let model = reference_pll();
    Link {
        waveform: wf,
        paths: PathSet {
            architecture: Architecture::Bistatic,
            paths: vec![Path::unit(bin(10.0), 0.0), Path::unit(bin(15.0), 0.1 * wf.subcarrier_spacing())],
        },
        pn: PnMode::Bistatic { tx: model.clone(), rx: model },
        application: PnApplication::Exact,
    }
}

/// Phase-noise scalings of the two-target images (dB).
pub const TWO_TARGET_GAMMAS_DB: [f64; 3] = [0.0, 30.0, 50.0];

pub fn two_target_images(ctx: &RunContext) -> Result<ExperimentOutput> {
    let mut out = ExperimentOutput::new("two-target-images", ctx);
    let link = two_target_link(ctx.symbols(128));
    let real = link.draw(ctx.seed, 0)?;
    let arch = link.paths.architecture;
    let mut summary = Table::new(
        "peaks",
        "two-target-images/peaks",
        &["window", "gamma_db", "combined_pn_dbc", "target", "range_m", "doppler_hz", "peak_db"],
    );
    summary.comments.push(format!("images keep the first {TWO_TARGET_CROP} range bins"));
    let windows = [
        ("rectangular", WindowSpec::rectangular(Axis::Range), WindowSpec::rectangular(Axis::Doppler)),
        (
            "chebyshev",
            WindowSpec::chebyshev(Axis::Range, engine::SIR_WINDOW_DB),
            WindowSpec::chebyshev(Axis::Doppler, engine::SIR_WINDOW_DB),
        ),
    ];
    let base = link.combined_dbc()?;
    let mut gammas = vec![f64::NEG_INFINITY];
    gammas.extend(TWO_TARGET_GAMMAS_DB);
    for g in gammas {
        let y = real.receive(&link, g)?;
        for (label, wr, wd) in &windows {
            let img = form_image(&y, &real.known, wr, wd, arch)?;
            for (i, p) in link.paths.paths.iter().enumerate() {
                let d = img.doppler_bin(p.doppler_hz);
                summary.push(vec![
                    label.to_string(),
                    num(g),
                    num(base + g),
                    (i + 1).to_string(),
                    num(img.axes.range_m[p.delay_samples]),
                    num(img.axes.doppler_hz[d]),
                    num(img.magnitude_db(p.delay_samples, d)),
                ]);
            }
            let tag = if g.is_finite() { format!("gamma{}", g as i64) } else { "ideal".into() };
            out.images.push(NamedImage { name: format!("{label}_{tag}"), image: img.crop_range(TWO_TARGET_CROP) });
        }
    }
    out.tables.push(summary);
    Ok(out)
}

/// Target ranges of the CPE study, as fractions of the bistatic maximum
/// unambiguous range.
pub fn cpe_range_fractions() -> Vec<f64> {
    level_grid(0.05, 0.95, 0.05)
}

/// Phase-noise scaling of the CPE study (dB).
pub const CPE_STUDY_GAMMA_DB: f64 = 30.0;

/// RMS difference between the reference-path CPE and the CPE at a second
/// target, with the spread of each estimate.
#[derive(Debug, Clone, Copy)]
pub struct CpeRmsePoint {
    pub range_fraction: f64,
    pub range_m: f64,
    pub rmse: Stats,
    pub reference_std: Stats,
    pub target_std: Stats,
}

/// Two equal-gain static paths, one at bin 0 and one at `fraction · N`,
/// on a bistatic link with `N_CP = N`.
pub fn cpe_rmse_sweep(
    n: usize,
    m: usize,
    fractions: &[f64],
    gamma_db: f64,
    realizations: usize,
    seed: u64,
) -> Result<Vec<CpeRmsePoint>> {
    let window = WindowSpec::chebyshev(Axis::Range, engine::SIR_WINDOW_DB);
    let opts = ReferenceCpeOptions { window, min_dominance_db: None };
    fractions
        .iter()
        .map(|&frac| {
            let mut link = sensing_link(n, m, Modulation::Qpsk, 0.0);
            let bin = ((frac * n as f64).round() as usize).clamp(1, n - 1);
            link.paths.paths.push(Path::unit(bin, 0.0));
            let trials: Vec<(f64, f64, f64)> = (0..realizations as u64)
                .into_par_iter()
                .map(|r| -> Result<(f64, f64, f64)> {
                    let real = link.draw(seed, r)?;
                    let y = real.receive(&link, gamma_db)?;
                    let a = estimate_cpe_from_reference(&y, &real.known, &opts)?;
                    let b = estimate_cpe_at_bin(&y, &real.known, &window, bin)?;
                    Ok((rms_phase_difference(&a, &b), phase_std(&a), phase_std(&b)))
                })
                .collect::<Result<_>>()?;
            let col = |f: fn(&(f64, f64, f64)) -> f64| Stats::of(&trials.iter().map(f).collect::<Vec<_>>());
            Ok(CpeRmsePoint {
                range_fraction: frac,
                range_m: bin as f64 * C0 / link.waveform.bandwidth_hz,
                rmse: col(|t| t.0),
                reference_std: col(|t| t.1),
                target_std: col(|t| t.2),
            })
        })
        .collect()
}

pub fn cpe_rmse_vs_range(ctx: &RunContext) -> Result<ExperimentOutput> {
    let mut out = ExperimentOutput::new("cpe-rmse-vs-range", ctx);
    let mut t = Table::new(
        "cpe_rmse",
        "cpe-rmse-vs-range/rmse",
        &[
            "scenario_id",
            "range_fraction",
            "range_m",
            "rmse_rad",
            "rmse_std_rad",
            "reference_std_rad",
            "target_std_rad",
            "n_realizations",
        ],
    );
    t.comments.push(format!(
        "bistatic link, equal-gain paths at bin 0 and at the given range, N_CP = N, QPSK, gamma = {CPE_STUDY_GAMMA_DB} dB"
    ));
    t.comments.push(format!("Chebyshev range window ({} dB), no dominance check", engine::SIR_WINDOW_DB));
    for n in SENSING_N {
        let pts =
            cpe_rmse_sweep(n, ctx.symbols(128), &cpe_range_fractions(), CPE_STUDY_GAMMA_DB, ctx.reps(), ctx.seed)?;
        for p in pts {
            t.push(vec![
                format!("n{n}-qpsk"),
                num(p.range_fraction),
                num(p.range_m),
                format!("{:.6e}", p.rmse.mean),
                format!("{:.6e}", p.rmse.std),
                format!("{:.6e}", p.reference_std.mean),
                format!("{:.6e}", p.target_std.mean),
                p.rmse.n.to_string(),
            ]);
        }
    }
    out.tables.push(t);
    Ok(out)
}

/// Rows of the standardized-scenario table, in order.
pub const TABLE_ROWS: [&str; 10] = [
    "tx_pn_level_dbc",
    "rx_pn_level_dbc",
    "combined_pn_level_dbc",
    engine::PPLR,
    engine::RANGE_PSLR,
    engine::RANGE_ISLR,
    engine::DOPPLER_PSLR,
    engine::DOPPLER_ISLR,
    engine::MEAN_IMAGE_SIR,
    engine::MIN_IMAGE_SIR,
];

/// One column of the standardized-scenario table.
#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub id: String,
    pub verified_models: bool,
    /// `(row, mean, std)` in [`TABLE_ROWS`] order.
    pub rows: Vec<(&'static str, f64, f64)>,
    pub n_realizations: usize,
}

impl ScenarioResult {
    pub fn get(&self, row: &str) -> Option<f64> {
        self.rows.iter().find(|(r, _, _)| *r == row).map(|(_, v, _)| *v)
    }
}

/// Link of a resolved scenario. The scenario's own scaling is already part
/// of its oscillator models.
pub fn scenario_link(s: &Scenario) -> Link {
    Link { waveform: s.waveform, paths: s.paths.clone(), pn: s.pn.clone(), application: s.pn_application }
}

/// Evaluates one scenario with `realizations` trials and `n_symbols`
/// symbols (`None` keeps the configured count).
pub fn run_scenario(s: &Scenario, n_symbols: Option<usize>, realizations: usize, seed: u64) -> Result<ScenarioResult> {
    let mut link = scenario_link(s);
    if let Some(m) = n_symbols {
        link.waveform.n_symbols = m;
    }
    let (tx, rx) = link.oscillator_levels()?;
    let combined = link.combined_dbc()?;
    let sel = MetricSel { sidelobes: true, image_sir: true, evm: false };
    let pts = sweep(&link, &[0.0], realizations, seed, s.cpe_correction, sel)?;
    let p = &pts[0];
    let mut rows = vec![
        ("tx_pn_level_dbc", db10(tx), 0.0),
        ("rx_pn_level_dbc", db10(rx), 0.0),
        ("combined_pn_level_dbc", combined, 0.0),
    ];
    for name in &TABLE_ROWS[3..] {
        let st = p.get(name).unwrap_or(Stats { mean: f64::NAN, std: f64::NAN, n: 0 });
        rows.push((name, st.mean, st.std));
    }
    Ok(ScenarioResult {
        id: s.id.clone(),
        verified_models: s.tx.verified && s.rx.verified,
        rows,
        n_realizations: realizations,
    })
}

pub fn table_iii(ctx: &RunContext) -> Result<ExperimentOutput> {
    let base = ctx.config_dir.as_deref();
    let scenarios: Vec<Scenario> = match &ctx.scenario {
        Some(cfg) => vec![cfg.resolve(base)?],
        None => {
            BUILTIN_SCENARIOS.iter().map(|(id, _)| ScenarioConfig::builtin(id)?.resolve(None)).collect::<Result<_>>()?
        }
    };
    let mut results = Vec::new();
    for s in &scenarios {
        let m = ctx.symbols(s.waveform.n_symbols);
        let seed = if ctx.scenario.is_some() { s.seed } else { ctx.seed };
        results.push(run_scenario(s, Some(m), ctx.reps(), seed)?);
    }

    let mut out = ExperimentOutput::new("table-iii", ctx);
    let mut long =
        Table::new("metrics", "table-iii/metrics", &["scenario_id", "metric", "value_db", "std_db", "n_realizations"]);
    let mut notes = Vec::new();
    for (s, r) in scenarios.iter().zip(&results) {
        notes.push(format!(
            "{}: {} architecture, tx {} rx {}, N {} N_CP {} M {}{}",
            s.id,
            s.paths.architecture.name(),
            s.tx.name,
            s.rx.name,
            s.waveform.n_subcarriers,
            s.waveform.cp_length,
            ctx.symbols(s.waveform.n_symbols),
            if r.verified_models { "" } else { ", UNVERIFIED oscillator coefficients" }
        ));
        for (name, v, sd) in &r.rows {
            long.push(vec![r.id.clone(), name.to_string(), num(*v), num(*sd), r.n_realizations.to_string()]);
        }
    }
    long.comments.extend(notes.iter().cloned());

    let mut cols = vec!["metric"];
    cols.extend(results.iter().map(|r| r.id.as_str()));
    let mut wide = Table::new("table", "table-iii/table", &cols);
    wide.comments.extend(notes);
    for (i, row) in TABLE_ROWS.iter().enumerate() {
        let mut line = vec![row.to_string()];
        line.extend(results.iter().map(|r| num(r.rows[i].1)));
        wide.push(line);
    }
    out.tables.push(long);
    out.tables.push(wide);
    Ok(out)
}
