//! Denoising of damped-exponential time-domain signals (NMR free
//! induction decays) by structured low-rank methods.
//!
//! A noiseless FID is a short sum of damped complex exponentials, so its
//! Hankel lift is low-rank and every anti-diagonal is constant. The
//! solvers here exploit one or both facts:
//!
//! * [`chord_v`] — ADMM on a nuclear-norm model with an explicit
//!   Vandermonde factorization constraint: each iterate is re-projected
//!   onto a fitted sum of `r_hat` exponentials.
//! * [`chord`] — the same ADMM without the Vandermonde terms (low-rank
//!   penalty and data fidelity only).
//! * [`cadzow`] — alternating projection between the rank-`r_hat` matrices
//!   and the Hankel structure.
//! * [`rqrd`] — single-pass randomized range projection.
//! * [`tsvd_denoise`] — one hard rank truncation.
//!
//! ```
//! use chordv::{add_noise, chord_v, nrmse, reference_5peak, synthesize_fid};
//! use chordv::{ChordVConfig, NoiseSpec};
//!
//! let truth = synthesize_fid(&reference_5peak())?;
//! let noisy = add_noise(&truth, &NoiseSpec::new(0.04, 7)?)?;
//! let result = chord_v(&noisy, &ChordVConfig::new(5))?;
//! assert!(nrmse(&result.denoised, &truth)? < nrmse(&noisy, &truth)?);
//! # Ok::<(), chordv::Error>(())
//! ```

pub mod defaults;
mod error;
mod fid_io;
mod hankel;
mod signal;
mod solvers;
mod spectrum;
mod vandermonde;

pub use error::{Error, Result};
pub use fid_io::{format_fid, load_fid, parse_fid, save_fid};
pub use hankel::{
    antidiag_weights, dehankelize_avg, dehankelize_sum, hankelize, singular_values,
    soft_threshold_svd, truncate_rank, CMatrix, HankelShape,
};
pub use signal::{
    add_noise, nrmse, reference_5peak, synthesize_fid, ExponentialComponent, Fid, ModelSpec,
    NoiseSpec,
};
pub use solvers::{
    cadzow, cadzow_traced, chord, chord_traced, chord_v, chord_v_traced, rqrd, tsvd_denoise,
    AdjointKind, ChordVConfig, IterationSnapshot, SolverChecks, SolverResult, SvtRule,
};
pub use spectrum::{dft_spectrum, fft_freqs, Spectrum};
pub use vandermonde::{
    build_vandermonde, estimate_poles, operator_z, solve_amplitudes, AmplitudeVector, PoleSet,
    VandermondeMatrix,
};
