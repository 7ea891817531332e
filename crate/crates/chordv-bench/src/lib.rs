//! Benchmark harness for the `chordv` solvers: seeded Monte-Carlo sweeps
//! over noise levels and prior peak counts, convergence traces, and CSV
//! emission, all deterministic for a fixed config and base seed.

pub mod config;
pub mod correlation;
pub mod records;
pub mod sweep;

pub use config::{ExperimentConfig, ModelSource, SolverSpec};
pub use correlation::{default_windows, peak_correlation, peak_heights, PeakWindow};
pub use records::{aggregate, emit_csv, format_csv, parse_csv, Aggregate, TrialRecord};
pub use sweep::{
    run_convergence_trace, run_noise_sweep, run_rank_sweep, ConvergenceReport, SweepOutcome,
    TrialFailure,
};
