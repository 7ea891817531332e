//! `chordv-bench`: seeded Monte-Carlo benchmarks for the `chordv` solvers.
//!
//! Subcommands: `noise-sweep` and `rank-sweep` write a results CSV and print
//! aggregate statistics; `converge` traces one run per iteration and writes
//! snapshot spectra; `denoise` processes a single FID file. Flags override
//! config-file values. Exit codes: 0 success, 1 validation error,
//! 2 numerical failure, 3 I/O error.

use std::path::{Path, PathBuf};

use chordv::{load_fid, save_fid, ChordVConfig, Error, Fid, Spectrum};
use chordv_bench::{
    aggregate, emit_csv, run_convergence_trace, run_noise_sweep, run_rank_sweep, ExperimentConfig,
    SolverSpec, SweepOutcome,
};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "chordv-bench", version, about = "Benchmark harness for chordv solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment config file (TOML); flags below override its values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Base seed; trial t uses seed base_seed + t.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Monte-Carlo trials per cell.
    #[arg(long, global = true, value_name = "N")]
    trials: Option<u64>,

    /// Output path (results CSV, trace CSV, or denoised FID).
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Solvers to run (comma-separated names).
    #[arg(long, global = true, value_delimiter = ',', value_name = "NAMES")]
    solver: Vec<String>,

    /// Noise standard deviations (comma-separated).
    #[arg(long, global = true, value_delimiter = ',', value_name = "LIST")]
    sigma: Vec<f64>,

    /// Prior peak counts (comma-separated).
    #[arg(long = "r-hat", global = true, value_delimiter = ',', value_name = "LIST")]
    r_hat: Vec<usize>,

    /// Worker threads (0 = all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Record wall-clock time per trial (off by default: timings vary
    /// between runs, and the determinism guarantee covers everything else).
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep noise levels at a fixed prior peak count (the first --r-hat).
    NoiseSweep,
    /// Sweep prior peak counts at each noise level.
    RankSweep,
    /// Trace one chord_v run per iteration and snapshot spectra.
    Converge,
    /// Denoise one FID file with the first configured solver.
    Denoise {
        /// Input FID CSV.
        input: PathBuf,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    if let Err(err) = run(&cli) {
        eprintln!("error: {err}");
        let code = match err {
            Error::InvalidInput(_) => 1,
            Error::Conditioning(_) | Error::Numeric(_) => 2,
            Error::Io { .. } => 3,
        };
        std::process::exit(code);
    }
}

fn run(cli: &Cli) -> chordv::Result<()> {
    let cfg = effective_config(cli)?;
    match &cli.command {
        Command::NoiseSweep => sweep(&cfg, run_noise_sweep(&cfg)?),
        Command::RankSweep => sweep(&cfg, run_rank_sweep(&cfg)?),
        Command::Converge => converge(&cfg),
        Command::Denoise { input } => denoise(&cfg, input),
    }
}

/// Config-file values (or defaults) with CLI flags layered on top.
fn effective_config(cli: &Cli) -> chordv::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.base_seed = seed;
    }
    if let Some(trials) = cli.trials {
        cfg.trials = trials;
    }
    if let Some(out) = &cli.out {
        cfg.output_path = out.clone();
    }
    if !cli.solver.is_empty() {
        // Selecting a solver by name keeps any parameters the config file
        // set for it; unnamed ones fall back to defaults.
        let configured = cfg.solvers.clone();
        cfg.solvers = cli
            .solver
            .iter()
            .map(|name| {
                configured
                    .iter()
                    .find(|s| s.name() == name)
                    .cloned()
                    .map_or_else(|| SolverSpec::from_name(name), Ok)
            })
            .collect::<chordv::Result<_>>()?;
    }
    if !cli.sigma.is_empty() {
        cfg.sigmas = cli.sigma.clone();
    }
    if !cli.r_hat.is_empty() {
        cfg.r_hats = cli.r_hat.clone();
    }
    if let Some(threads) = cli.threads {
        cfg.threads = threads;
    }
    if cli.timings {
        cfg.timings = true;
    }
    Ok(cfg)
}

fn sweep(cfg: &ExperimentConfig, outcome: SweepOutcome) -> chordv::Result<()> {
    for failure in &outcome.failures {
        eprintln!("{failure}");
    }
    emit_csv(&outcome.records, &cfg.output_path)?;
    println!(
        "wrote {} records to {} ({} trials excluded)",
        outcome.records.len(),
        cfg.output_path.display(),
        outcome.failures.len()
    );
    println!("{:<10} {:>6} {:>6} {:>5} {:>12} {:>12}", "solver", "sigma", "r_hat", "n", "mean_nrmse", "std_nrmse");
    for agg in aggregate(&outcome.records) {
        println!(
            "{:<10} {:>6} {:>6} {:>5} {:>12.6} {:>12.6}",
            agg.solver,
            agg.sigma,
            agg.r_hat.map_or_else(|| "-".to_string(), |r| r.to_string()),
            agg.n,
            agg.mean_nrmse,
            agg.std_nrmse
        );
    }
    Ok(())
}

/// `chord_v` parameters for single-run commands: the configured ones if the
/// solver list names chord_v, defaults otherwise.
fn chord_v_config(cfg: &ExperimentConfig, r_hat: usize) -> ChordVConfig {
    let mut solver_cfg = ChordVConfig::new(r_hat);
    if let Some(SolverSpec::ChordV { lambda, mu, gamma }) =
        cfg.solvers.iter().find(|s| s.name() == "chord_v")
    {
        solver_cfg.lambda = *lambda;
        solver_cfg.mu = *mu;
        solver_cfg.gamma = *gamma;
    }
    solver_cfg
}

fn converge(cfg: &ExperimentConfig) -> chordv::Result<()> {
    cfg.validate()?;
    let truth = match &cfg.model {
        chordv_bench::ModelSource::Reference => {
            chordv::synthesize_fid(&chordv::reference_5peak())?
        }
        chordv_bench::ModelSource::FidFile(path) => load_fid(path)?,
    };
    // The trace studies one noise level and one prior: the first of each.
    let noise = chordv::NoiseSpec::new(cfg.sigmas[0], cfg.base_seed)?;
    let noisy = chordv::add_noise(&truth, &noise)?;
    let r_hat = *cfg.r_hats.first().ok_or_else(|| {
        Error::InvalidInput("converge needs an r_hat (flag --r-hat or config r_hats)".into())
    })?;
    let solver_cfg = chord_v_config(cfg, r_hat);
    let report = run_convergence_trace(&noisy, &truth, &solver_cfg, &cfg.snapshot_iters)?;

    let mut trace = String::from("iteration,delta,nrmse\n");
    let input_nrmse = chordv::nrmse(&noisy, &truth)?;
    trace.push_str(&format!("0,,{input_nrmse}\n"));
    for (i, (delta, err)) in
        report.result.delta_trace.iter().zip(&report.nrmse_trace).enumerate()
    {
        trace.push_str(&format!("{},{delta},{err}\n", i + 1));
    }
    write_text(&cfg.output_path, &trace)?;

    for (k, spectrum) in &report.snapshots {
        let path = sibling_path(&cfg.output_path, &format!("_iter{k}"));
        write_text(&path, &format_spectrum(spectrum))?;
    }
    println!(
        "converged={} in {} iterations; final delta={:.3e}; final nrmse={:.6}",
        report.result.converged,
        report.result.iterations,
        report.result.delta_trace.last().copied().unwrap_or(f64::NAN),
        report.nrmse_trace.last().copied().unwrap_or(f64::NAN),
    );
    println!(
        "wrote trace to {} and {} snapshot spectra",
        cfg.output_path.display(),
        report.snapshots.len()
    );
    Ok(())
}

fn denoise(cfg: &ExperimentConfig, input: &Path) -> chordv::Result<()> {
    let noisy = load_fid(input)?;
    let solver = cfg
        .solvers
        .first()
        .ok_or_else(|| Error::InvalidInput("denoise needs a solver (--solver)".into()))?;
    let r_hat = if solver.needs_r_hat() {
        Some(*cfg.r_hats.first().ok_or_else(|| {
            Error::InvalidInput(format!("solver {} needs an r_hat (--r-hat)", solver.name()))
        })?)
    } else {
        None
    };
    let result = run_one(&noisy, solver, r_hat, cfg.base_seed)?;
    save_fid(&cfg.output_path, &result.denoised)?;
    println!(
        "denoised {} with {}{}: {} iterations, converged={}; wrote {}",
        input.display(),
        solver.name(),
        r_hat.map_or_else(String::new, |r| format!(" (r_hat={r})")),
        result.iterations,
        result.converged,
        cfg.output_path.display()
    );
    Ok(())
}

fn run_one(
    noisy: &Fid,
    solver: &SolverSpec,
    r_hat: Option<usize>,
    seed: u64,
) -> chordv::Result<chordv::SolverResult> {
    let need_r = || {
        r_hat.ok_or_else(|| {
            Error::InvalidInput(format!("solver {} needs an r_hat", solver.name()))
        })
    };
    match solver {
        SolverSpec::ChordV { lambda, mu, gamma } => {
            let mut cfg = ChordVConfig::new(need_r()?);
            cfg.lambda = *lambda;
            cfg.mu = *mu;
            cfg.gamma = *gamma;
            chordv::chord_v(noisy, &cfg)
        }
        SolverSpec::Chord { lambda } => chordv::chord(
            noisy,
            *lambda,
            1.0,
            1.0,
            chordv::defaults::ETA,
            chordv::defaults::MAX_ITER,
        ),
        SolverSpec::Cadzow { max_iter, eta } => chordv::cadzow(noisy, need_r()?, *max_iter, *eta),
        SolverSpec::Rqrd => {
            chordv::rqrd(noisy, need_r()?, seed ^ chordv::defaults::RQRD_SEED_SALT)
        }
        SolverSpec::Tsvd => chordv::tsvd_denoise(noisy, need_r()?),
    }
}

/// `trace.csv` + `_iter8` → `trace_iter8.csv` alongside the original.
fn sibling_path(base: &Path, suffix: &str) -> PathBuf {
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = base.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    base.with_file_name(format!("{stem}{suffix}.{ext}"))
}

fn format_spectrum(spectrum: &Spectrum) -> String {
    let mut text = String::from("freq_hz,real,imag,magnitude\n");
    for (freq, bin) in spectrum.freqs().iter().zip(spectrum.bins()) {
        text.push_str(&format!("{freq},{},{},{}\n", bin.re, bin.im, bin.norm()));
    }
    text
}

fn write_text(path: &Path, text: &str) -> chordv::Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}
