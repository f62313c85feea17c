//! Named, reproducible experiment sweeps.
//!
//! Every experiment returns CSV tables (and optionally radar images for
//! plotting). Output depends only on the [`RunContext`], so the same seed
//! gives byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path as FsPath, PathBuf};

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::radar::RadarImage;

pub mod comm;
pub mod engine;
pub mod pn;
pub mod sensing;

pub use engine::{level_grid, sweep, Link, MetricSel, PointResult, Stats};

/// Settings shared by all experiments.
#[derive(Debug, Clone)]
pub struct RunContext {
    pub seed: u64,
    pub realizations: usize,
    /// Divides symbol counts and realization counts for quick runs.
    pub scale: usize,
    /// Scenario used by the scenario-driven experiments in place of the
    /// built-in ones.
    pub scenario: Option<ScenarioConfig>,
    /// Directory relative model paths in `scenario` are resolved against.
    pub config_dir: Option<PathBuf>,
}

impl Default for RunContext {
    fn default() -> Self {
        Self { seed: 1, realizations: 20, scale: 1, scenario: None, config_dir: None }
    }
}

impl RunContext {
    pub fn reps(&self) -> usize {
        (self.realizations / self.scale.max(1)).max(1)
    }

    /// Symbol count after scaling, never below 8.
    pub fn symbols(&self, m: usize) -> usize {
        (m / self.scale.max(1)).max(8.min(m))
    }

    fn header(&self, experiment: &str) -> Vec<String> {
        vec![
            format!("experiment: {experiment}"),
            format!("seed: {}", self.seed),
            format!("realizations: {}", self.reps()),
            format!("scale: {}", self.scale),
        ]
    }
}

/// One CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File stem.
    pub name: String,
    /// Artifact this table reproduces, written as the first header line.
    pub anchor: String,
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, anchor: &str, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            anchor: anchor.into(),
            comments: vec![],
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: vec![],
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, mut out: W, context: &[String]) -> Result<()> {
        writeln!(out, "# anchor: {}", self.anchor)?;
        for c in context.iter().chain(&self.comments) {
            writeln!(out, "# {c}")?;
        }
        writeln!(out, "{}", self.columns.join(","))?;
        for r in &self.rows {
            writeln!(out, "{}", r.join(","))?;
        }
        Ok(())
    }

    /// Column index by name.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

/// Columns of the metric tables.
pub const METRIC_COLUMNS: [&str; 7] =
    ["scenario_id", "gamma_db", "combined_pn_dbc", "metric", "value_db", "std_db", "n_realizations"];

/// Formats a float for CSV output.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.4}")
    } else {
        format!("{x}")
    }
}

/// Appends the rows of a sweep to a metric table.
pub fn push_points(table: &mut Table, scenario_id: &str, points: &[PointResult]) {
    for p in points {
        for (name, s) in &p.metrics {
            table.push(vec![
                scenario_id.to_string(),
                num(p.gamma_db),
                num(p.combined_pn_dbc),
                name.to_string(),
                num(s.mean),
                num(s.std),
                s.n.to_string(),
            ]);
        }
    }
}

/// A radar image kept for plotting.
#[derive(Debug, Clone)]
pub struct NamedImage {
    pub name: String,
    pub image: RadarImage,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub experiment: String,
    pub context: Vec<String>,
    pub tables: Vec<Table>,
    pub images: Vec<NamedImage>,
}

impl ExperimentOutput {
    fn new(experiment: &str, ctx: &RunContext) -> Self {
        Self { experiment: experiment.into(), context: ctx.header(experiment), tables: vec![], images: vec![] }
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// Writes `<dir>/<experiment>/<table>.csv` for every table and image.
    pub fn write(&self, dir: &FsPath) -> Result<Vec<PathBuf>> {
        let root = dir.join(&self.experiment);
        std::fs::create_dir_all(&root)?;
        let mut written = Vec::new();
        for t in &self.tables {
            let path = root.join(format!("{}.csv", t.name));
            let mut out = BufWriter::new(File::create(&path)?);
            t.write(&mut out, &self.context)?;
            out.flush()?;
            written.push(path);
        }
        for img in &self.images {
            let path = root.join(format!("{}.csv", img.name));
            let mut out = BufWriter::new(File::create(&path)?);
            let mut header = vec![format!("anchor: {}/{}", self.experiment, img.name)];
            header.extend(self.context.iter().cloned());
            img.image.write_csv(&mut out, &header)?;
            out.flush()?;
            written.push(path);
        }
        Ok(written)
    }
}

type Runner = fn(&RunContext) -> Result<ExperimentOutput>;

/// Every registered experiment with a one-line description.
pub const EXPERIMENTS: [(&str, &str, Runner); 17] = [
    ("null", "phase noise switched off; every metric at its ideal value", sensing::null),
    ("evm-vs-n", "EVM against subcarrier count, with and without CPE correction", comm::evm_vs_n),
    ("sir-vs-pn", "subcarrier SIR against combined phase-noise level", comm::sir_vs_pn),
    ("constellations", "received constellations at several phase-noise levels", comm::constellations),
    ("pn-psd-and-pdf", "PSD model, synthesized spectra, integrated level and phase PDFs", pn::psd_and_pdf),
    ("combined-level-vs-range", "monostatic and bistatic combined level against range", pn::combined_level_vs_range),
    ("max-ua-range", "maximum unambiguous range and subcarrier spacing against N", pn::max_ua_range),
    ("sidelobes-vs-pn", "PPLR, PSLR and ISLR against combined level for several N", sensing::sidelobes_vs_pn),
    ("doppler-cut", "Doppler cuts of a static target at two high levels", sensing::doppler_cut),
    ("sidelobes-vs-m", "PPLR, PSLR and ISLR against combined level for several M", sensing::sidelobes_vs_m),
    ("pplr-vs-doppler", "PPLR against combined level for moving targets", sensing::pplr_vs_doppler),
    ("two-target-images", "range-Doppler images of two targets, rectangular and Chebyshev", sensing::two_target_images),
    ("image-sir", "mean and minimum image SIR against combined level", sensing::image_sir),
    (
        "sidelobes-vs-pn-cpe-corrected",
        "PPLR, PSLR and ISLR after CPE correction",
        sensing::sidelobes_vs_pn_cpe_corrected,
    ),
    ("image-sir-cpe-corrected", "image SIR after CPE correction", sensing::image_sir_cpe_corrected),
    ("cpe-rmse-vs-range", "reference-path versus target CPE estimates against range", sensing::cpe_rmse_vs_range),
    ("table-iii", "standardized oscillator scenarios, full metric table", sensing::table_iii),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    EXPERIMENTS.iter().map(|(n, _, _)| *n)
}

/// Runs experiment `name`.
pub fn run(name: &str, ctx: &RunContext) -> Result<ExperimentOutput> {
    let (_, _, f) =
        EXPERIMENTS.iter().find(|(n, _, _)| *n == name).ok_or_else(|| Error::UnknownExperiment(name.to_string()))?;
    if ctx.scale == 0 {
        return Err(Error::Config("scale must be at least 1".into()));
    }
    if ctx.realizations == 0 {
        return Err(Error::Config("realizations must be at least 1".into()));
    }
    f(ctx)
}
