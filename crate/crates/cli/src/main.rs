use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use image::{Rgb, RgbImage};
use isac_pn::config::ScenarioConfig;
use isac_pn::experiments::{self, RunContext, EXPERIMENTS};
use isac_pn::RadarImage;

#[derive(Parser)]
#[command(name = "isac-pn-sim", version, about = "Phase-noise experiments for OFDM sensing and communication links")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its CSV files.
    Run(RunArgs),
    /// List the available experiments.
    List,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Experiment name, see `list`.
    experiment: String,
    /// Scenario TOML used by scenario-driven experiments.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Master seed. Defaults to the scenario seed, or 1.
    #[arg(long, value_name = "S")]
    seed: Option<u64>,
    /// Monte-Carlo realizations per point. Defaults to the scenario count, or 20.
    #[arg(long, value_name = "R")]
    realizations: Option<usize>,
    /// Output directory; files go to `<DIR>/<experiment>/`.
    #[arg(long, value_name = "DIR", default_value = "results")]
    out: PathBuf,
    /// Divide symbol and realization counts by K for a quick run.
    #[arg(long, value_name = "K", default_value_t = 1)]
    scale: usize,
    /// Also write PNG heatmaps of any radar images.
    #[arg(long)]
    plots: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::List => {
            for (name, about, _) in EXPERIMENTS {
                println!("{name:<32} {about}");
            }
            Ok(())
        }
        Command::Run(args) => run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(args: RunArgs) -> Result<(), Box<dyn std::error::Error>> {
    let mut ctx = RunContext { scale: args.scale, ..RunContext::default() };
    if let Some(path) = &args.config {
        let cfg = ScenarioConfig::from_file(path)?;
        ctx.seed = cfg.seed;
        ctx.realizations = cfg.n_realizations;
        ctx.config_dir = path.parent().map(Path::to_path_buf);
        ctx.scenario = Some(cfg);
    }
    if let Some(s) = args.seed {
        ctx.seed = s;
    }
    if let Some(r) = args.realizations {
        ctx.realizations = r;
    }

    let out = experiments::run(&args.experiment, &ctx)?;
    for path in out.write(&args.out)? {
        println!("{}", path.display());
    }
    if args.plots {
        let dir = args.out.join(&out.experiment);
        for img in &out.images {
            let path = dir.join(format!("{}.png", img.name));
            heatmap(&img.image, 80.0).save(&path)?;
            println!("{}", path.display());
        }
    }
    Ok(())
}

/// Magnitude image over the top `range_db` below the strongest pixel.
/// Range runs down the rows, Doppler across the columns.
fn heatmap(img: &RadarImage, range_db: f64) -> RgbImage {
    let (_, peak) = img.argmax();
    let top = 10.0 * (peak / img.reference_power).log10();
    RgbImage::from_fn(img.n_doppler as u32, img.n_range as u32, |x, y| {
        let db = img.magnitude_db(y as usize, x as usize);
        colour(((db - top + range_db) / range_db).clamp(0.0, 1.0))
    })
}

fn colour(t: f64) -> Rgb<u8> {
    const STOPS: [[f64; 3]; 5] =
        [[0.0, 0.0, 4.0], [87.0, 16.0, 110.0], [188.0, 55.0, 84.0], [249.0, 142.0, 9.0], [252.0, 255.0, 164.0]];
    let x = t * (STOPS.len() - 1) as f64;
    let i = (x.floor() as usize).min(STOPS.len() - 2);
    let f = x - i as f64;
    let c = |k: usize| (STOPS[i][k] + f * (STOPS[i + 1][k] - STOPS[i][k])).round() as u8;
    Rgb([c(0), c(1), c(2)])
}
