//! Committed default hyper-parameters.
//!
//! The weights below were selected by grid search on the reference
//! five-peak model (`chordv-bench`'s `tune` example reruns every stage).
//! The search minimizes the mean time-domain NRMSE at noise level
//! sigma = 0.04 over 20 seeds, subject to an exact-recovery constraint:
//! the noiseless reference must come back below 1e-2 NRMSE.
//!
//! The two goals pull `lambda` in opposite directions. The solvers carry
//! an O(1/lambda) bias on noiseless input (the dual of the singular-value
//! shrinkage never vanishes), so no point of the coarse grid
//! `lambda, mu in {1e-2 .. 1e2}`, `gamma in {1e-3 .. 1}` passes the
//! exact-recovery constraint — its best noiseless NRMSE is 1.86e-2 at
//! `lambda = 100`. The grid was therefore extended upward and refined
//! around the feasibility boundary (`lambda` in {150, 185, 190, 195, 200,
//! 250, 300, 1000}). Raising `lambda` weakens the low-rank consensus term
//! relative to the data term, which costs robustness to an overestimated
//! model order, so among admissible points the committed value is the
//! smallest `lambda` that clears the constraint with real margin rather
//! than the unconstrained-NRMSE minimizer (`lambda ~ 1e3`). They are
//! data, not magic numbers: solvers receive them only through
//! configuration.

/// Data-fidelity weight `lambda` for the Vandermonde-constrained solver.
pub const CHORD_V_LAMBDA: f64 = 200.0;

/// Vandermonde-coupling weight `mu`.
pub const CHORD_V_MU: f64 = 10.0;

/// Amplitude-energy weight `gamma`.
pub const CHORD_V_GAMMA: f64 = 1e-2;

/// Data-fidelity weight for the plain low-rank solver, tuned the same
/// way; its noiseless bias is slightly larger, pushing the boundary up.
pub const CHORD_LAMBDA: f64 = 250.0;

/// Stopping tolerance on the relative iterate change.
pub const ETA: f64 = 1e-3;

/// Iteration cap shared by the iterative solvers.
pub const MAX_ITER: usize = 200;

/// XOR'd into a trial's seed to derive the rQRd sketch stream, so the
/// sketch is decorrelated from the noise drawn from the same trial seed.
pub const RQRD_SEED_SALT: u64 = 0x9E37_79B9_7F4A_7C15;
