//! The Monte-Carlo sweep engine behind the CLI.
//!
//! A sweep is a grid of independent cells (solver, sigma, r_hat, trial).
//! Each cell synthesizes its own noisy input from `base_seed + trial`, so
//! results do not depend on scheduling and removing one trial leaves all
//! others unchanged. Cells run in parallel; per-cell solver failures are
//! collected with their reason and excluded from the records rather than
//! aborting the sweep.

use std::collections::BTreeMap;
use std::time::Instant;

use chordv::{
    add_noise, cadzow, chord, chord_v, chord_v_traced, defaults, dft_spectrum, load_fid, nrmse,
    reference_5peak, rqrd, synthesize_fid, tsvd_denoise, ChordVConfig, Error, Fid, NoiseSpec,
    Result, SolverResult, Spectrum,
};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, ModelSource, SolverSpec};
use crate::correlation::{default_windows, peak_correlation, PeakWindow};
use crate::records::TrialRecord;

/// One excluded trial and why it failed.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialFailure {
    pub solver: String,
    pub sigma: f64,
    pub r_hat: Option<usize>,
    pub trial: u64,
    pub reason: String,
}

impl std::fmt::Display for TrialFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "trial excluded: solver={} sigma={} r_hat={} trial={}: {}",
            self.solver,
            self.sigma,
            self.r_hat.map_or_else(|| "-".to_string(), |r| r.to_string()),
            self.trial,
            self.reason
        )
    }
}

/// Successful records plus the excluded trials of one sweep.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub records: Vec<TrialRecord>,
    pub failures: Vec<TrialFailure>,
}

/// Ground truth prepared once per sweep.
struct Bench {
    truth: Fid,
    /// Clean spectrum and per-peak windows; absent for file-backed truth,
    /// where no model is available to place windows.
    reference: Option<(Spectrum, Vec<PeakWindow>)>,
}

fn prepare(model: &ModelSource) -> Result<Bench> {
    match model {
        ModelSource::Reference => {
            let spec = reference_5peak();
            let truth = synthesize_fid(&spec)?;
            let spectrum = dft_spectrum(&truth)?;
            let windows = default_windows(&spec)?;
            Ok(Bench { truth, reference: Some((spectrum, windows)) })
        }
        ModelSource::FidFile(path) => {
            Ok(Bench { truth: load_fid(path)?, reference: None })
        }
    }
}

#[derive(Debug, Clone)]
struct Cell {
    solver: SolverSpec,
    sigma: f64,
    r_hat: Option<usize>,
    trial: u64,
}

fn run_solver(
    noisy: &Fid,
    solver: &SolverSpec,
    r_hat: Option<usize>,
    noise_seed: u64,
) -> Result<SolverResult> {
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
            chord_v(noisy, &cfg)
        }
        SolverSpec::Chord { lambda } => {
            chord(noisy, *lambda, 1.0, 1.0, defaults::ETA, defaults::MAX_ITER)
        }
        SolverSpec::Cadzow { max_iter, eta } => cadzow(noisy, need_r()?, *max_iter, *eta),
        // The sketch stream is decorrelated from the noise stream by the
        // committed salt, but still keyed to the trial for reproducibility.
        SolverSpec::Rqrd => rqrd(noisy, need_r()?, noise_seed ^ defaults::RQRD_SEED_SALT),
        SolverSpec::Tsvd => tsvd_denoise(noisy, need_r()?),
    }
}

fn run_cell(
    bench: &Bench,
    cell: &Cell,
    base_seed: u64,
    timings: bool,
) -> std::result::Result<TrialRecord, TrialFailure> {
    let fail = |reason: String| TrialFailure {
        solver: cell.solver.name().to_string(),
        sigma: cell.sigma,
        r_hat: cell.r_hat,
        trial: cell.trial,
        reason,
    };
    let seed = base_seed + cell.trial;
    let noise = NoiseSpec::new(cell.sigma, seed).map_err(|e| fail(e.to_string()))?;
    let noisy = add_noise(&bench.truth, &noise).map_err(|e| fail(e.to_string()))?;

    let start = Instant::now();
    let result =
        run_solver(&noisy, &cell.solver, cell.r_hat, seed).map_err(|e| fail(e.to_string()))?;
    let wall = start.elapsed().as_secs_f64();

    let err = nrmse(&result.denoised, &bench.truth).map_err(|e| fail(e.to_string()))?;
    let peak_correlations = match &bench.reference {
        Some((truth_spectrum, windows)) => {
            let denoised = dft_spectrum(&result.denoised).map_err(|e| fail(e.to_string()))?;
            Some(
                peak_correlation(&denoised, truth_spectrum, windows)
                    .map_err(|e| fail(e.to_string()))?,
            )
        }
        None => None,
    };
    Ok(TrialRecord {
        solver: cell.solver.name().to_string(),
        sigma: cell.sigma,
        r_hat: cell.r_hat,
        trial: cell.trial,
        nrmse: err,
        iterations: result.iterations,
        converged: result.converged,
        wall_time_s: timings.then_some(wall),
        peak_correlations,
    })
}

/// OpenBLAS kernels parallelize over a global pool whose reductions depend
/// on the machine's core count, and they are not safe to enter from many
/// threads at once. Cells are single-threaded by contract, so pin the pool
/// once per process and parallelize across cells instead.
fn pin_blas_single_thread() {
    static ONCE: std::sync::Once = std::sync::Once::new();
    ONCE.call_once(|| {
        extern "C" {
            fn openblas_set_num_threads(num_threads: std::os::raw::c_int);
        }
        unsafe { openblas_set_num_threads(1) };
    });
}

fn run_cells(cfg: &ExperimentConfig, cells: Vec<Cell>) -> Result<SweepOutcome> {
    pin_blas_single_thread();
    let bench = prepare(&cfg.model)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    let results: Vec<std::result::Result<TrialRecord, TrialFailure>> = pool.install(|| {
        cells
            .par_iter()
            .map(|cell| run_cell(&bench, cell, cfg.base_seed, cfg.timings))
            .collect()
    });
    let mut outcome = SweepOutcome { records: Vec::new(), failures: Vec::new() };
    for r in results {
        match r {
            Ok(rec) => outcome.records.push(rec),
            Err(f) => outcome.failures.push(f),
        }
    }
    Ok(outcome)
}

/// The r_hat a solver uses outside of rank sweeps: the first configured one.
fn fixed_r_hat(cfg: &ExperimentConfig, solver: &SolverSpec) -> Option<usize> {
    solver.needs_r_hat().then(|| cfg.r_hats.first().copied()).flatten()
}

/// Sweep noise levels at a fixed prior peak count.
pub fn run_noise_sweep(cfg: &ExperimentConfig) -> Result<SweepOutcome> {
    cfg.validate()?;
    let mut cells = Vec::new();
    for solver in &cfg.solvers {
        for &sigma in &cfg.sigmas {
            for trial in 0..cfg.trials {
                cells.push(Cell {
                    solver: solver.clone(),
                    sigma,
                    r_hat: fixed_r_hat(cfg, solver),
                    trial,
                });
            }
        }
    }
    run_cells(cfg, cells)
}

/// Sweep prior peak counts. Solvers without an r_hat (chord) run once per
/// (sigma, trial) and their records are replicated across the r_hat rows
/// so every solver plots on the same axis.
pub fn run_rank_sweep(cfg: &ExperimentConfig) -> Result<SweepOutcome> {
    cfg.validate()?;
    let mut cells = Vec::new();
    for solver in &cfg.solvers {
        for &sigma in &cfg.sigmas {
            if solver.needs_r_hat() {
                for &r_hat in &cfg.r_hats {
                    for trial in 0..cfg.trials {
                        cells.push(Cell {
                            solver: solver.clone(),
                            sigma,
                            r_hat: Some(r_hat),
                            trial,
                        });
                    }
                }
            } else {
                for trial in 0..cfg.trials {
                    cells.push(Cell { solver: solver.clone(), sigma, r_hat: None, trial });
                }
            }
        }
    }
    let mut outcome = run_cells(cfg, cells)?;
    if !cfg.r_hats.is_empty() {
        let mut replicated = Vec::new();
        for rec in outcome.records {
            if rec.r_hat.is_none() {
                for &r_hat in &cfg.r_hats {
                    let mut copy = rec.clone();
                    copy.r_hat = Some(r_hat);
                    replicated.push(copy);
                }
            } else {
                replicated.push(rec);
            }
        }
        outcome.records = replicated;
    }
    Ok(outcome)
}

/// Per-iteration view of one denoising run.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub result: SolverResult,
    /// NRMSE against the clean signal after each iteration; aligned with
    /// `result.delta_trace`.
    pub nrmse_trace: Vec<f64>,
    /// Requested (iteration, spectrum) snapshots. Iteration 0 is the noisy
    /// input; requests past the last iteration snapshot the final iterate.
    pub snapshots: Vec<(usize, Spectrum)>,
}

fn slice_nrmse(x: &[Complex64], truth: &[Complex64], truth_norm: f64) -> f64 {
    let diff: f64 = x.iter().zip(truth).map(|(a, b)| (a - b).norm_sqr()).sum();
    diff.sqrt() / truth_norm
}

/// Run `chord_v` recording the error trajectory and snapshot spectra.
pub fn run_convergence_trace(
    noisy: &Fid,
    truth: &Fid,
    cfg: &ChordVConfig,
    snapshot_iters: &[usize],
) -> Result<ConvergenceReport> {
    if noisy.len() != truth.len() {
        return Err(Error::InvalidInput(format!(
            "length mismatch: {} vs {}",
            noisy.len(),
            truth.len()
        )));
    }
    let truth_norm = truth.norm();
    if truth_norm == 0.0 {
        return Err(Error::InvalidInput("reference signal has zero norm".into()));
    }

    let mut nrmse_trace = Vec::new();
    let mut captured: BTreeMap<usize, Vec<Complex64>> = BTreeMap::new();
    let result = chord_v_traced(noisy, cfg, |snap| {
        nrmse_trace.push(slice_nrmse(snap.x, truth.samples(), truth_norm));
        if snapshot_iters.contains(&snap.iteration) {
            captured.insert(snap.iteration, snap.x.to_vec());
        }
    })?;

    let mut wanted: Vec<usize> = snapshot_iters.to_vec();
    wanted.sort_unstable();
    wanted.dedup();
    let mut snapshots = Vec::new();
    for k in wanted {
        let fid = if k == 0 {
            noisy.clone()
        } else if let Some(x) = captured.get(&k) {
            Fid::new(x.clone(), noisy.dt())?
        } else {
            result.denoised.clone()
        };
        snapshots.push((k, dft_spectrum(&fid)?));
    }
    Ok(ConvergenceReport { result, nrmse_trace, snapshots })
}
