//! Phase-noise model experiments: spectra, level integrals, correlation
//! against range.

use std::f64::consts::PI;

use rayon::prelude::*;
use statrs::distribution::{Continuous, Normal};

use super::engine::{gammas_for_levels, waveform, Link, Stats};
use super::{num, ExperimentOutput, RunContext, Table};
use crate::channel::{derive_seed, wrap_phase, Architecture};
use crate::config::reference_pll;
use crate::error::Result;
use crate::ofdm::Modulation;
use crate::pn_model::{combined_level, integrate_psd, Correlation, Integration, PnPsdModel, DEFAULT_F_MIN_HZ};
use crate::pn_synth::{estimate_psd_welch, synthesize};
use crate::radar::axes;
use crate::{db10, C0};

/// Subcarrier counts of the reference waveform family.
pub const N_VALUES: [usize; 7] = [256, 512, 1024, 2048, 4096, 8192, 16384];

const FS: f64 = 1e9;

fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let n = ((hi / lo).log10() * per_decade as f64).round() as usize;
    (0..=n).map(|i| lo * 10f64.powf(i as f64 / per_decade as f64)).collect()
}

fn b_pll(model: &PnPsdModel) -> f64 {
    match model {
        PnPsdModel::Pll(p) => p.b_pll,
        _ => f64::NAN,
    }
}

pub fn psd_and_pdf(ctx: &RunContext) -> Result<ExperimentOutput> {
    let mut out = ExperimentOutput::new("pn-psd-and-pdf", ctx);
    let model = reference_pll();
    let reps = ctx.reps();

    // spectra
    let n = 1 << 22;
    let seg = 1 << 16;
    let estimates: Vec<Vec<f64>> = (0..reps as u64)
        .into_par_iter()
        .map(|r| -> Result<Vec<f64>> {
            let x = synthesize(&model, FS, n, derive_seed(ctx.seed, r))?;
            Ok(estimate_psd_welch(&x, seg, 0.5)?.1)
        })
        .collect::<Result<_>>()?;
    let df = FS / seg as f64;
    let mut psd = Table::new("psd", "pn-psd-and-pdf/psd", &["freq_hz", "analytic_dbchz", "synthesized_dbchz"]);
    psd.comments.push(format!("model: {}", model.id()));
    psd.comments.push(format!("welch: {reps} series of {n} samples at {FS} Hz, segments of {seg}"));
    for f in log_grid(1e3, 5e8, 20) {
        let k = (f / df).round() as usize;
        let est = if k >= 2 && k < seg / 2 {
            let mean = estimates.iter().map(|e| e[k]).sum::<f64>() / reps as f64;
            num(db10(mean))
        } else {
            "nan".into()
        };
        psd.push(vec![num(f), num(db10(model.eval_psd(f)?)), est]);
    }
    out.tables.push(psd);

    // integrated level against offset
    let integ = Integration::default();
    let mut level = Table::new("integrated_level", "pn-psd-and-pdf/integrated-level", &["f_offset_hz", "level_dbc"]);
    level.comments.push(format!("lower integration limit: {DEFAULT_F_MIN_HZ} Hz"));
    for f in log_grid(DEFAULT_F_MIN_HZ * 10f64.powf(0.1), 5e8, 20) {
        level.push(vec![num(f), num(db10(integrate_psd(&model, f, &integ)?))]);
    }
    out.tables.push(level);

    let mut spacing =
        Table::new("spacing", "pn-psd-and-pdf/spacing", &["n_subcarriers", "delta_f_hz", "half_delta_f_over_b_pll"]);
    for n in N_VALUES {
        let df = FS / n as f64;
        spacing.push(vec![n.to_string(), num(df), num(df / 2.0 / b_pll(&model))]);
    }
    out.tables.push(spacing);

    // single-oscillator phase distribution
    let x = synthesize(&model, FS, 1 << 20, derive_seed(ctx.seed, 1000))?;
    let sigma = x.variance().sqrt();
    let mut pdf = Table::new("pdf", "pn-psd-and-pdf/pdf", &["phase_rad", "density", "gaussian_fit"]);
    pdf.comments.push(format!("sample std: {} rad", num(sigma)));
    for (c, d) in histogram(&x.samples, 6.0 * sigma, 61) {
        pdf.push(vec![
            format!("{c:.6e}"),
            format!("{d:.6e}"),
            format!("{:.6e}", Normal::new(0.0, sigma).expect("positive sigma").pdf(c)),
        ]);
    }
    out.tables.push(pdf);

    // combined phase error at high levels, raw and wrapped
    let link = Link::bistatic_static(waveform(2048, 512, 8, Modulation::Qpsk), model.clone());
    let levels = [9.0, 34.0];
    let gammas = gammas_for_levels(&link, &levels)?;
    let mut wrapped = Table::new(
        "combined_phase_pdf",
        "pn-psd-and-pdf/combined-phase-pdf",
        &["level_dbc", "gamma_db", "kind", "phase_rad", "density", "fit"],
    );
    for (&lvl, &g) in levels.iter().zip(&gammas) {
        let scaled = model.clone().scaled_db(g);
        let a = synthesize(&scaled, FS, 1 << 20, derive_seed(ctx.seed, 2000))?;
        let b = synthesize(&scaled, FS, 1 << 20, derive_seed(ctx.seed, 2001))?;
        let d: Vec<f64> = a.samples.iter().zip(&b.samples).map(|(p, q)| p - q).collect();
        let s = (d.iter().map(|v| v * v).sum::<f64>() / d.len() as f64).sqrt();
        let normal = Normal::new(0.0, s).expect("positive sigma");
        for (c, dens) in histogram(&d, 5.0 * s, 81) {
            wrapped.push(vec![
                num(lvl),
                num(g),
                "raw".into(),
                format!("{c:.6e}"),
                format!("{dens:.6e}"),
                format!("{:.6e}", normal.pdf(c)),
            ]);
        }
        let w: Vec<f64> = d.iter().map(|&v| wrap_phase(v)).collect();
        for (c, dens) in histogram(&w, PI, 64) {
            let fit: f64 = (-50..=50).map(|k| normal.pdf(c + 2.0 * PI * k as f64)).sum();
            wrapped.push(vec![
                num(lvl),
                num(g),
                "wrapped".into(),
                format!("{c:.6e}"),
                format!("{dens:.6e}"),
                format!("{fit:.6e}"),
            ]);
        }
    }
    out.tables.push(wrapped);
    Ok(out)
}

/// Density histogram over `[-half_width, half_width]` as `(centre, density)`.
pub fn histogram(x: &[f64], half_width: f64, bins: usize) -> Vec<(f64, f64)> {
    let w = 2.0 * half_width / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in x {
        let i = ((v + half_width) / w).floor();
        if i >= 0.0 && (i as usize) < bins {
            counts[i as usize] += 1;
        } else if v == half_width {
            counts[bins - 1] += 1;
        }
    }
    let total = x.len() as f64;
    counts.iter().enumerate().map(|(i, &c)| (-half_width + (i as f64 + 0.5) * w, c as f64 / (total * w))).collect()
}

pub fn combined_level_vs_range(ctx: &RunContext) -> Result<ExperimentOutput> {
    let mut out = ExperimentOutput::new("combined-level-vs-range", ctx);
    let model = reference_pll();
    let integ = Integration::default();
    let f_max = FS / 2.0;
    let bistatic = db10(combined_level(&model, &model, Correlation::Bistatic, f_max, &integ)?);

    let mut t = Table::new(
        "analytic",
        "combined-level-vs-range/analytic",
        &["range_m", "delay_s", "monostatic_dbc", "bistatic_dbc"],
    );
    let mut ranges = vec![0.0];
    ranges.extend(log_grid(0.1, 1e4, 10));
    for r in ranges {
        let tau = 2.0 * r / C0;
        let mono = combined_level(&model, &model, Correlation::Monostatic { delay_s: tau }, f_max, &integ)?;
        t.push(vec![num(r), format!("{tau:.6e}"), num(db10(mono)), num(bistatic)]);
    }
    out.tables.push(t);

    let mut e = Table::new(
        "monte_carlo",
        "combined-level-vs-range/monte-carlo",
        &["range_m", "delay_samples", "analytic_dbc", "empirical_dbc", "std_db", "n_realizations"],
    );
    let reps = ctx.reps();
    for r in [1.0, 10.0, 100.0, 1000.0, 5000.0] {
        let d = (2.0 * r / C0 * FS).round() as usize;
        let analytic =
            combined_level(&model, &model, Correlation::Monostatic { delay_s: d as f64 / FS }, f_max, &integ)?;
        let vals: Vec<f64> = (0..reps as u64)
            .into_par_iter()
            .map(|i| -> Result<f64> {
                Ok(db10(delayed_difference_variance(&model, d, 1 << 20, derive_seed(ctx.seed, i))?))
            })
            .collect::<Result<_>>()?;
        let s = Stats::of(&vals);
        e.push(vec![num(r), d.to_string(), num(db10(analytic)), num(s.mean), num(s.std), reps.to_string()]);
    }
    out.tables.push(e);
    Ok(out)
}

/// Sample variance of `θ[s - delay] - θ[s]` over `n` samples of one
/// synthesized series at 1 GHz.
pub fn delayed_difference_variance(model: &PnPsdModel, delay: usize, n: usize, seed: u64) -> Result<f64> {
    let x = synthesize(model, FS, n + delay, seed)?;
    let d: Vec<f64> = (0..n).map(|s| x.samples[s] - x.samples[s + delay]).collect();
    let mean = d.iter().sum::<f64>() / n as f64;
    Ok(d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64)
}

pub fn max_ua_range(ctx: &RunContext) -> Result<ExperimentOutput> {
    let mut out = ExperimentOutput::new("max-ua-range", ctx);
    let bpll = b_pll(&reference_pll());
    let mut t = Table::new(
        "max_ua_range",
        "max-ua-range/range",
        &["n_subcarriers", "delta_f_hz", "half_delta_f_over_b_pll", "r_max_monostatic_m", "r_max_bistatic_m"],
    );
    for n in N_VALUES {
        let cfg = waveform(n, n, 8, Modulation::Qpsk);
        let mono = axes(&cfg, Architecture::Monostatic).max_unambiguous_range_m;
        let bi = axes(&cfg, Architecture::Bistatic).max_unambiguous_range_m;
        let df = cfg.subcarrier_spacing();
        t.push(vec![n.to_string(), num(df), num(df / 2.0 / bpll), num(mono), num(bi)]);
    }
    out.tables.push(t);
    Ok(out)
}
