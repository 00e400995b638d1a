//! `fraczeta`: spectra, heat traces, zeta values and pole audits from the command line.
//!
//! Exit codes: 0 success, 1 failed check, 2 configuration or input error,
//! 3 numeric non-convergence. Files written by a failing command are removed.

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fraczeta_core::acceptance;
use fraczeta_core::config::{load_config, parse_window, Grid, Range, RunConfig, SpectrumSource};
use fraczeta_core::io::{self, fmt_f64, ArtifactSet, PoleReport, ProfileRecord, SpectrumMeta};
use fraczeta_core::partition::{fit_expansion, trace_grid};
use fraczeta_core::spectrum::SpectrumBatch;
use fraczeta_core::zeta::poles::{locate_poles, predicted_poles, residue_from_oscillation, Region};
use fraczeta_core::zeta::{Continuation, ContinuationOptions, Mode, ZetaFunction};
use fraczeta_core::{Error, FractalModel};
use num_complex::Complex64;

const DEFAULT_TRACE_GRID: &str = "1e-4:1:200";
const DEFAULT_ZETA_GRID: &str = "0.2:3:0.1,-10:10:0.5";
/// Grid points closer than this to a predicted pole are skipped.
const GRID_POLE_EXCLUSION: f64 = 0.05;
const WEYL_POINTS: usize = 300;
/// Pole searches stay this far inside the continuation domain.
const DOMAIN_MARGIN: f64 = 0.05;

#[derive(Debug, Parser)]
#[command(
    name = "fraczeta",
    version,
    about = "Spectral zeta functions of Laplacians on self-similar sets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration.
    #[arg(long, global = true, conflicts_with = "preset")]
    config: Option<PathBuf>,

    /// Built-in model: interval, gasket, toy(N,tau) or carpet.
    #[arg(long, global = true)]
    preset: Option<String>,

    /// Output directory (overrides the configuration).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Spectral shift gamma.
    #[arg(long, global = true, allow_hyphen_values = true)]
    gamma: Option<f64>,

    /// Sample grid: `t_lo:t_hi:points` for partition and weyl,
    /// `re_lo:re_hi:step,im_lo:im_hi:step` for zeta-grid and poles.
    #[arg(long, global = true, allow_hyphen_values = true)]
    grid: Option<String>,

    /// Fit window `t_lo:t_hi`.
    #[arg(long, global = true)]
    window: Option<String>,

    /// Continuation mode: lemma or expbounds.
    #[arg(long, global = true)]
    mode: Option<Mode>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
enum Command {
    /// Print the model's dimensions and pole lattice spacing.
    Dims,
    /// Write the eigenvalue CSV and its completeness sidecar.
    Spectrum,
    /// Write the heat trace over a log-spaced grid.
    Partition,
    /// Write the Weyl ratio and the fitted oscillation coefficients.
    Weyl,
    /// Write zeta values over a rectangle.
    ZetaGrid,
    /// Write predicted and located poles.
    Poles,
    /// Run the acceptance suite.
    Check,
}

#[derive(Debug)]
enum Failure {
    Core(Error),
    Checks(usize),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Checks(_) => 1,
            Failure::Core(Error::NonConvergence(_)) => 3,
            Failure::Core(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Checks(n) => write!(f, "{n} acceptance criteria failed"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut artifacts = ArtifactSet::new();
    match run(&cli, &mut artifacts) {
        Ok(()) => {
            for p in artifacts.paths() {
                eprintln!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(failure) => {
            artifacts.discard();
            eprintln!("error: {failure}");
            ExitCode::from(failure.code())
        }
    }
}

fn run(cli: &Cli, artifacts: &mut ArtifactSet) -> Outcome {
    if cli.command == Command::Check {
        let dir = match (&cli.out, cli.config.is_some() || cli.preset.is_some()) {
            (Some(dir), _) => dir.clone(),
            (None, true) => load(cli)?.output.dir,
            (None, false) => PathBuf::from("out"),
        };
        return check(&dir, artifacts);
    }
    let config = load(cli)?;
    let dir = config.output.dir.clone();
    match cli.command {
        Command::Dims => {
            dims(&config.model);
            Ok(())
        }
        Command::Spectrum => spectrum(&config, &dir, artifacts),
        Command::Partition => partition(cli, &config, &dir, artifacts),
        Command::Weyl => weyl(cli, &config, &dir, artifacts),
        Command::ZetaGrid => zeta_grid(cli, &config, &dir, artifacts),
        Command::Poles => poles(cli, &config, &dir, artifacts),
        Command::Check => unreachable!(),
    }
}

/// Configuration from `--config` or `--preset`, with command-line overrides applied.
fn load(cli: &Cli) -> Result<RunConfig, Error> {
    let mut config = match (&cli.config, &cli.preset) {
        (Some(path), _) => load_config(path)?,
        (None, Some(name)) => RunConfig::preset(name)?,
        (None, None) => return Err(Error::Config("give --config <path> or --preset <name>".into())),
    };
    if let Some(gamma) = cli.gamma {
        if !gamma.is_finite() {
            return Err(Error::Config(format!("--gamma must be finite, got {gamma}")));
        }
        config.zeta.gamma = gamma;
    }
    if let Some(mode) = cli.mode {
        config.zeta.mode = mode;
    }
    if let Some(w) = &cli.window {
        parse_window(w).map_err(|e| Error::Config(format!("--window: {e}")))?;
        config.zeta.window = Some(w.clone());
        config.partition.window = Some(w.clone());
    }
    if let Some(dir) = &cli.out {
        config.output.dir = dir.clone();
    }
    Ok(config)
}

fn dims(model: &FractalModel) {
    let rows = [
        ("N", model.n_cells.to_string()),
        ("rho_F", fmt_f64(model.rho_f)),
        ("tau", fmt_f64(model.tau)),
        ("d_S", fmt_f64(model.d_s)),
        ("d_f", fmt_f64(model.d_f)),
        ("d_w", fmt_f64(model.d_w)),
        ("d_boundary", fmt_f64(model.d_boundary)),
        ("spacing", fmt_f64(model.lattice_spacing())),
    ];
    println!("model       {}", model.name);
    for (name, value) in rows {
        println!("{name:<11} {value}");
    }
    if let Some(d_k) = &model.d_k {
        let list: Vec<String> = d_k.iter().map(|&d| fmt_f64(d)).collect();
        println!("{:<11} {}", "d_k", list.join(", "));
    }
}

fn spectrum(config: &RunConfig, dir: &Path, artifacts: &mut ArtifactSet) -> Outcome {
    let batch = config.spectrum()?;
    artifacts.write(dir.join("spectrum.csv"), &io::spectrum_csv(&batch))?;
    artifacts.write(
        dir.join("spectrum_meta.json"),
        &io::to_json(&SpectrumMeta::from(&batch))?,
    )?;
    println!(
        "{} eigenvalues, {} with multiplicity",
        batch.pairs().len(),
        batch.total_count()
    );
    Ok(())
}

/// `t_lo:t_hi:points` with `0 < t_lo < t_hi` and an integer `points >= 2`.
fn trace_range(spec: &str) -> Result<(f64, f64, usize), Error> {
    let r: Range = spec.parse()?;
    if !(r.lo > 0.0 && r.hi > r.lo && r.step >= 2.0 && r.step.fract() == 0.0) {
        return Err(Error::Config(format!(
            "grid '{spec}' must be t_lo:t_hi:points with 0 < t_lo < t_hi and integer points >= 2"
        )));
    }
    Ok((r.lo, r.hi, r.step as usize))
}

fn partition(cli: &Cli, config: &RunConfig, dir: &Path, artifacts: &mut ArtifactSet) -> Outcome {
    let spec = match (&cli.grid, config.partition.grid) {
        (Some(g), _) => g.clone(),
        (None, Some(r)) => r.to_string(),
        (None, None) => DEFAULT_TRACE_GRID.to_string(),
    };
    let (lo, hi, points) = trace_range(&spec)?;
    let batch = config.spectrum()?;
    let samples = trace_grid(&batch, lo, hi, points)?;
    artifacts.write(dir.join("trace.csv"), &io::trace_csv(&samples))?;
    let unreliable = samples.iter().filter(|s| !s.reliable).count();
    println!(
        "{} samples on [{lo}, {hi}], {unreliable} above the truncation tolerance",
        samples.len()
    );
    Ok(())
}

fn continuation(config: &RunConfig, batch: &SpectrumBatch) -> Result<Continuation, Error> {
    let options = ContinuationOptions {
        mode: config.zeta.mode,
        n_max: config.zeta.n_max,
        window: config.zeta_window(),
    };
    Continuation::new(batch, options)
}

fn weyl(cli: &Cli, config: &RunConfig, dir: &Path, artifacts: &mut ArtifactSet) -> Outcome {
    let batch = config.spectrum()?;
    let model = &batch.model;
    let (window, profiles) = match config.partition_window() {
        Some(w) => (w, fit_expansion(&batch, model, config.partition.n_max, w)?),
        None => {
            let options = ContinuationOptions {
                n_max: config.partition.n_max,
                ..ContinuationOptions::default()
            };
            let c = Continuation::new(&batch, options)?;
            (c.window, c.profiles)
        }
    };
    let (lo, hi, points) = match (&cli.grid, config.partition.grid) {
        (Some(g), _) => trace_range(g)?,
        (None, Some(r)) => trace_range(&r.to_string())?,
        (None, None) => (window.t_lo / model.tau, (window.t_hi * model.tau).min(1.0), WEYL_POINTS),
    };
    let samples = trace_grid(&batch, lo, hi, points)?;
    artifacts.write(dir.join("weyl.csv"), &io::weyl_csv(&samples, model.leading_exponent()))?;
    let records: Vec<ProfileRecord> = profiles.iter().map(ProfileRecord::from).collect();
    artifacts.write(dir.join("weyl_profiles.json"), &io::to_json(&records)?)?;
    let g0 = profiles[0].coefficient(0).re;
    let g1 = profiles[0].coefficient(1).norm();
    println!(
        "fit window [{}, {}], g_0 = {}, |g_1| = {}, fit residual {:.2e}",
        fmt_f64(window.t_lo),
        fmt_f64(window.t_hi),
        fmt_f64(g0),
        fmt_f64(g1),
        profiles[0].fit_residual
    );
    Ok(())
}

fn points(grid: &Grid) -> Vec<Complex64> {
    let im = grid.im.values();
    grid.re
        .values()
        .into_iter()
        .flat_map(|re| im.iter().map(move |&im| Complex64::new(re, im)))
        .collect()
}

fn zeta_grid(cli: &Cli, config: &RunConfig, dir: &Path, artifacts: &mut ArtifactSet) -> Outcome {
    let grid: Grid = match (&cli.grid, config.zeta.grid) {
        (Some(g), _) => g.parse()?,
        (None, Some(g)) => g,
        (None, None) => DEFAULT_ZETA_GRID.parse()?,
    };
    if !(grid.re.step > 0.0 && grid.im.step > 0.0) {
        return Err(Error::Config(format!("zeta grid '{grid}' needs a positive step in both directions")).into());
    }
    let batch = config.spectrum()?;
    let cont = continuation(config, &batch)?;
    let zf = ZetaFunction::new(batch, cont);
    let points = points(&grid);
    let values = zf.evaluate_grid(&points, config.zeta.gamma, GRID_POLE_EXCLUSION)?;
    artifacts.write(dir.join("zeta_grid.csv"), &io::zeta_csv(&values))?;
    let worst = values.iter().map(|p| p.error_bound).fold(0.0, f64::max);
    println!(
        "{} of {} grid points evaluated ({} near poles skipped), max error bound {worst:.2e}",
        values.len(),
        points.len(),
        points.len() - values.len()
    );
    Ok(())
}

/// Three lattice rows around the leading pole, inside the continuation domain.
fn default_region(model: &FractalModel, half_plane_bound: f64) -> Region {
    let spacing = model.lattice_spacing();
    let lo = (model.d_s - 1.5).max(half_plane_bound + DOMAIN_MARGIN);
    Region::new((lo, model.d_s + 0.5), (-1.5 * spacing, 1.5 * spacing))
}

fn poles(cli: &Cli, config: &RunConfig, dir: &Path, artifacts: &mut ArtifactSet) -> Outcome {
    let model = &config.model;
    let gamma = config.zeta.gamma;
    let region = match (&cli.grid, config.poles.region) {
        (Some(g), _) => Some(g.parse::<Grid>()?.region()),
        (None, Some(g)) => Some(g.region()),
        (None, None) => None,
    };
    let has_spectrum = !matches!(config.spectrum, SpectrumSource::None);
    let report = if has_spectrum {
        let batch = config.spectrum()?;
        let cont = continuation(config, &batch)?;
        let bound = cont.domain.half_plane_bound;
        let region = region.unwrap_or_else(|| default_region(model, bound));
        region.validate()?;
        let mut predicted = predicted_poles(model, &region, gamma);
        for p in predicted.iter_mut().filter(|p| p.m == 0) {
            if let Some(profile) = cont.profiles.get(p.k_index) {
                p.residue = residue_from_oscillation(profile, model, p.n).and_then(|e| e.residue);
            }
        }
        let search = if region.re.0 < bound + DOMAIN_MARGIN {
            let clipped = Region::new((bound + DOMAIN_MARGIN, region.re.1), region.im);
            clipped.validate().map_err(|_| {
                Error::Domain(format!(
                    "pole region lies outside the continuation domain Re(s) > {bound} ({} mode)",
                    config.zeta.mode
                ))
            })?;
            eprintln!(
                "note: searching Re s > {} only; the {} continuation is defined for Re s > {bound}",
                clipped.re.0, config.zeta.mode
            );
            clipped
        } else {
            region
        };
        let located = locate_poles(|s| cont.evaluate(s, gamma).map(|p| p.value), &search, &predicted)?;
        PoleReport {
            model: model.name.clone(),
            gamma,
            region,
            predicted,
            located,
        }
    } else {
        let region = region.unwrap_or_else(|| default_region(model, model.d_s - 2.5));
        region.validate()?;
        let predicted = predicted_poles(model, &region, gamma);
        PoleReport {
            model: model.name.clone(),
            gamma,
            region,
            predicted,
            located: Vec::new(),
        }
    };
    artifacts.write(dir.join("poles.json"), &io::to_json(&report)?)?;
    println!(
        "{} predicted, {} located in Re s in ({}, {}], Im s in [{}, {}]",
        report.predicted.len(),
        report.located.len(),
        report.region.re.0,
        report.region.re.1,
        report.region.im.0,
        report.region.im.1
    );
    for p in &report.located {
        let residue = p
            .residue
            .map_or("-".to_string(), |r| format!("{:.9}{:+.9}i", r.re, r.im));
        println!("  s = {:.9}{:+.9}i  residue {residue}", p.position.re, p.position.im);
    }
    Ok(())
}

fn check(dir: &Path, artifacts: &mut ArtifactSet) -> Outcome {
    let (results, written) = acceptance::run_all(dir)?;
    *artifacts = written;
    for c in &results {
        println!("{}", c.line());
    }
    match results.iter().filter(|c| !c.passed).count() {
        0 => Ok(()),
        n => Err(Failure::Checks(n)),
    }
}
