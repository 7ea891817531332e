//! The denoising algorithms: the Vandermonde-constrained ADMM solver
//! (`chord_v`), its unconstrained low-rank counterpart (`chord`), and the
//! Cadzow, rQRd and truncated-SVD baselines.
//!
//! All five share the Hankel kernels and return a [`SolverResult`]; the
//! iterative ones also come in `*_traced` variants that hand every iterate
//! to an observer, which is how the benchmark harness records convergence
//! curves.

use ndarray::prelude::*;
use ndarray_linalg::{Norm, QR};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::hankel::{
    antidiag_weights, dehankelize_avg, dehankelize_sum, hankelize_samples, soft_threshold_svd,
    truncate_rank, CMatrix, HankelShape,
};
use crate::signal::Fid;
use crate::vandermonde::{
    build_vandermonde, operator_z_samples, solve_amplitudes_samples, sort_by_amplitude,
    AmplitudeVector, PoleSet,
};

/// Which de-hankelization plays the role of the adjoint in the x-update.
///
/// The summing map is the true adjoint of the lift, which makes the
/// x-subproblem's normal equations diagonal with the anti-diagonal weights;
/// the averaging variant (weight 1 per sample) is kept for comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AdjointKind {
    #[default]
    Summing,
    Averaging,
}

/// Threshold used in the singular-value shrinkage step.
///
/// `1/beta` is the stationary solution of the X-subproblem and the
/// default; `gamma/beta` is kept as an A/B knob.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SvtRule {
    #[default]
    OneOverBeta,
    GammaOverBeta,
}

/// Parameters of the Vandermonde-constrained solver.
///
/// The trailing flags are ablation/debug knobs; their defaults reproduce
/// the reference algorithm exactly.
#[derive(Debug, Clone)]
pub struct ChordVConfig {
    /// Data-fidelity weight, > 0.
    pub lambda: f64,
    /// Amplitude-energy weight, >= 0.
    pub gamma: f64,
    /// Vandermonde-coupling weight, > 0.
    pub mu: f64,
    /// Augmented-Lagrangian penalty, > 0.
    pub beta: f64,
    /// Dual step size, > 0.
    pub tau: f64,
    /// Stopping tolerance on the relative iterate change; 0 runs all
    /// `max_iter` iterations.
    pub eta: f64,
    /// Iteration cap.
    pub max_iter: usize,
    /// Prior number of exponential components, >= 1.
    pub r_hat: usize,
    /// De-hankelization used in the x-update.
    pub adjoint: AdjointKind,
    /// Shrinkage threshold rule for the X-update.
    pub svt_rule: SvtRule,
    /// Start the dual variable at zero instead of the all-ones matrix.
    pub zero_dual_init: bool,
    /// Skip the overwrite `x <- Z c`, leaving the x-update's output as the
    /// iterate (ablation of the model-projection step).
    pub skip_model_overwrite: bool,
    /// Rescale estimated poles with `|z| > 1` onto the unit circle.
    pub clamp_poles: bool,
    /// Record worst-case stationarity residuals of the x- and c-updates.
    pub debug_checks: bool,
}

impl ChordVConfig {
    /// Tuned defaults with the given model-order prior.
    pub fn new(r_hat: usize) -> Self {
        ChordVConfig {
            lambda: crate::defaults::CHORD_V_LAMBDA,
            gamma: crate::defaults::CHORD_V_GAMMA,
            mu: crate::defaults::CHORD_V_MU,
            beta: 1.0,
            tau: 1.0,
            eta: crate::defaults::ETA,
            max_iter: crate::defaults::MAX_ITER,
            r_hat,
            adjoint: AdjointKind::default(),
            svt_rule: SvtRule::default(),
            zero_dual_init: false,
            skip_model_overwrite: false,
            clamp_poles: false,
            debug_checks: false,
        }
    }

    fn validate(&self, n: usize) -> Result<HankelShape> {
        let shape = HankelShape::from_len(n)?;
        for (name, value, positive) in [
            ("lambda", self.lambda, true),
            ("gamma", self.gamma, false),
            ("mu", self.mu, true),
            ("beta", self.beta, true),
            ("tau", self.tau, true),
            ("eta", self.eta, false),
        ] {
            if !value.is_finite() || value < 0.0 || (positive && value == 0.0) {
                return Err(Error::invalid(format!("{name} must be {} and finite, got {value}",
                    if positive { "positive" } else { "non-negative" })));
            }
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be at least 1"));
        }
        if self.r_hat == 0 || self.r_hat >= shape.min_dim() {
            return Err(Error::invalid(format!(
                "r_hat = {} out of range for a {}x{} embedding",
                self.r_hat,
                shape.p(),
                shape.q()
            )));
        }
        Ok(shape)
    }
}

/// Worst-case stationarity residuals observed across all iterations,
/// recorded when `debug_checks` is set.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SolverChecks {
    /// Relative norm of the x-subproblem gradient right after the x-update.
    pub max_x_grad_rel: f64,
    /// Relative norm of the amplitude-subproblem gradient at each solve.
    pub max_c_grad_rel: f64,
}

/// Outcome of a solver run.
#[derive(Debug, Clone)]
pub struct SolverResult {
    pub denoised: Fid,
    /// Relative iterate change per iteration; length equals `iterations`.
    pub delta_trace: Vec<f64>,
    pub iterations: usize,
    /// Whether the change dropped to the tolerance before the cap.
    pub converged: bool,
    /// Final pole estimates, sorted by descending fitted amplitude
    /// (Vandermonde-constrained solver only).
    pub poles: Option<PoleSet>,
    /// Fitted amplitudes in the same order.
    pub amplitudes: Option<AmplitudeVector>,
    /// Stationarity residuals when requested via `debug_checks`.
    pub checks: Option<SolverChecks>,
}

/// One iterate as seen by a trace observer.
#[derive(Debug)]
pub struct IterationSnapshot<'a> {
    /// 1-based iteration index, aligned with `delta_trace`.
    pub iteration: usize,
    /// The iterate after all of the iteration's updates.
    pub x: &'a [Complex64],
    /// Relative change from the previous iterate.
    pub delta: f64,
}

fn l2(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn l2_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

fn check_finite(x: &[Complex64], k: usize) -> Result<()> {
    if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::numeric(format!("non-finite iterate at iteration {k}")));
    }
    Ok(())
}

fn at_iteration(e: Error, k: usize) -> Error {
    match e {
        Error::Conditioning(msg) => Error::Conditioning(format!("iteration {k}: {msg}")),
        Error::Numeric(msg) => Error::Numeric(format!("iteration {k}: {msg}")),
        other => other,
    }
}

/// Relative change of the iterate, the stopping statistic.
fn delta_x(new: &[Complex64], old: &[Complex64], k: usize) -> Result<f64> {
    let delta = l2_diff(new, old) / l2(new);
    if !delta.is_finite() {
        return Err(Error::numeric(format!("stopping statistic diverged at iteration {k}")));
    }
    Ok(delta)
}

/// Vandermonde-constrained ADMM denoiser.
pub fn chord_v(y: &Fid, cfg: &ChordVConfig) -> Result<SolverResult> {
    chord_v_traced(y, cfg, |_| {})
}

/// [`chord_v`] with an observer that sees every iterate.
pub fn chord_v_traced(
    y: &Fid,
    cfg: &ChordVConfig,
    mut on_iteration: impl FnMut(IterationSnapshot<'_>),
) -> Result<SolverResult> {
    let shape = cfg.validate(y.len())?;
    let n = y.len();
    let (lambda, mu, gamma, beta, tau) = (cfg.lambda, cfg.mu, cfg.gamma, cfg.beta, cfg.tau);
    let w: Vec<f64> = antidiag_weights(shape).iter().map(|&v| v as f64).collect();
    // Under the averaging variant the composed lift-adjoint has unit weight.
    let denom: Vec<f64> = match cfg.adjoint {
        AdjointKind::Summing => w.iter().map(|&wi| lambda + mu + beta * wi).collect(),
        AdjointKind::Averaging => vec![lambda + mu + beta; n],
    };
    let svt_threshold = match cfg.svt_rule {
        SvtRule::OneOverBeta => 1.0 / beta,
        SvtRule::GammaOverBeta => gamma / beta,
    };
    let yv = y.samples();

    // Initialization: dual at all-ones, X at zero, poles/amplitudes from an
    // unregularized fit of the input, iterate at the input.
    let mut d = if cfg.zero_dual_init {
        CMatrix::zeros((shape.p(), shape.q()))
    } else {
        CMatrix::from_elem((shape.p(), shape.q()), Complex64::new(1.0, 0.0))
    };
    let mut big_x = CMatrix::zeros((shape.p(), shape.q()));
    let mut z = operator_z_samples(yv, shape, cfg.r_hat)
        .map_err(|e| at_iteration(e, 0))?;
    if cfg.clamp_poles {
        z = build_vandermonde(&z.poles().clone().clamped_to_unit_disk());
    }
    let mut c = solve_amplitudes_samples(yv, &z, 1.0, 0.0).map_err(|e| at_iteration(e, 0))?;
    let mut x: Vec<Complex64> = yv.to_vec();

    let mut delta_trace = Vec::new();
    let mut converged = false;
    let mut checks = SolverChecks::default();

    for k in 1..=cfg.max_iter {
        let x_prev = x.clone();

        // (1) x-update: the quadratic subproblem is diagonal under the
        // summing adjoint, x_n = (lambda y_n + mu (Zc)_n + [R*(beta X - D)]_n)
        //                       / (lambda + mu + beta w_n).
        let zc = z.apply_raw(c.values());
        let m = big_x.mapv(|v| v * beta) - &d;
        let adj = match cfg.adjoint {
            AdjointKind::Summing => dehankelize_sum(&m, shape)?,
            AdjointKind::Averaging => dehankelize_avg(&m, shape)?,
        };
        for i in 0..n {
            x[i] = (lambda * yv[i] + mu * zc[i] + adj[i]) / denom[i];
        }
        check_finite(&x, k)?;

        if cfg.debug_checks && cfg.adjoint == AdjointKind::Summing {
            // Recompute the subproblem gradient from scratch (fresh lift and
            // adjoint), so an inconsistent adjoint/weight pairing shows up.
            let lifted = hankelize_samples(&x, shape)?;
            let grad_mat = lifted.mapv(|v| v * beta) - &m;
            let adj_grad = dehankelize_sum(&grad_mat, shape)?;
            let mut grad_sq = 0.0;
            let mut rhs_sq = 0.0;
            for i in 0..n {
                let g = lambda * (x[i] - yv[i]) + mu * (x[i] - zc[i]) + adj_grad[i];
                grad_sq += g.norm_sqr();
                rhs_sq += (lambda * yv[i] + mu * zc[i] + adj[i]).norm_sqr();
            }
            checks.max_x_grad_rel = checks.max_x_grad_rel.max((grad_sq / rhs_sq).sqrt());
        }

        // (2) Z-update: re-estimate poles from the current iterate.
        z = operator_z_samples(&x, shape, cfg.r_hat).map_err(|e| at_iteration(e, k))?;
        if cfg.clamp_poles {
            z = build_vandermonde(&z.poles().clone().clamped_to_unit_disk());
        }

        // (3) c-update: ridge-regularized amplitude fit.
        c = solve_amplitudes_samples(&x, &z, mu, gamma).map_err(|e| at_iteration(e, k))?;

        if cfg.debug_checks {
            let cv = ArrayView1::from(c.values());
            let xv = ArrayView1::from(&x[..]);
            let resid = z.entries().dot(&cv) - xv;
            let zh = z.entries().t().mapv(|v| v.conj());
            let grad = cv.mapv(|v| v * gamma) + zh.dot(&resid).mapv(|v| v * mu);
            let scale = gamma * c.norm() + mu * zh.dot(&xv).norm_l2();
            checks.max_c_grad_rel = checks.max_c_grad_rel.max(grad.norm_l2() / scale);
        }

        // (4) Overwrite the iterate with the fitted exponential model.
        if !cfg.skip_model_overwrite {
            x = z.apply_raw(c.values());
            check_finite(&x, k)?;
        }

        // (5) X-update: singular value soft-thresholding.
        let lifted = hankelize_samples(&x, shape)?;
        let arg = &lifted + &d.mapv(|v| v / beta);
        big_x = soft_threshold_svd(&arg, svt_threshold)?;

        // (6) Dual ascent.
        d += &((&lifted - &big_x).mapv(|v| v * tau));

        // (7) Stopping statistic on the post-overwrite iterate.
        let delta = delta_x(&x, &x_prev, k)?;
        delta_trace.push(delta);
        on_iteration(IterationSnapshot { iteration: k, x: &x, delta });
        if delta <= cfg.eta {
            converged = true;
            break;
        }
    }

    let (poles, amplitudes) = sort_by_amplitude(z.poles(), &c);
    let iterations = delta_trace.len();
    Ok(SolverResult {
        denoised: Fid::new(x, y.dt())?,
        delta_trace,
        iterations,
        converged,
        poles: Some(poles),
        amplitudes: Some(amplitudes),
        checks: cfg.debug_checks.then_some(checks),
    })
}

/// Plain low-rank ADMM denoiser: the same skeleton as [`chord_v`] with the
/// Vandermonde terms removed — no pole estimation, no model overwrite, and
/// no model-order prior.
pub fn chord(
    y: &Fid,
    lambda: f64,
    beta: f64,
    tau: f64,
    eta: f64,
    max_iter: usize,
) -> Result<SolverResult> {
    chord_traced(y, lambda, beta, tau, eta, max_iter, |_| {})
}

/// [`chord`] with an observer that sees every iterate.
pub fn chord_traced(
    y: &Fid,
    lambda: f64,
    beta: f64,
    tau: f64,
    eta: f64,
    max_iter: usize,
    mut on_iteration: impl FnMut(IterationSnapshot<'_>),
) -> Result<SolverResult> {
    let shape = HankelShape::from_len(y.len())?;
    for (name, value, positive) in
        [("lambda", lambda, true), ("beta", beta, true), ("tau", tau, true), ("eta", eta, false)]
    {
        if !value.is_finite() || value < 0.0 || (positive && value == 0.0) {
            return Err(Error::invalid(format!("{name} must be {} and finite, got {value}",
                if positive { "positive" } else { "non-negative" })));
        }
    }
    if max_iter == 0 {
        return Err(Error::invalid("max_iter must be at least 1"));
    }

    let n = y.len();
    let w: Vec<f64> = antidiag_weights(shape).iter().map(|&v| v as f64).collect();
    let yv = y.samples();

    let mut d = CMatrix::from_elem((shape.p(), shape.q()), Complex64::new(1.0, 0.0));
    let mut big_x = CMatrix::zeros((shape.p(), shape.q()));
    let mut x: Vec<Complex64> = yv.to_vec();

    let mut delta_trace = Vec::new();
    let mut converged = false;

    for k in 1..=max_iter {
        let x_prev = x.clone();

        let m = big_x.mapv(|v| v * beta) - &d;
        let adj = dehankelize_sum(&m, shape)?;
        for i in 0..n {
            x[i] = (lambda * yv[i] + adj[i]) / (lambda + beta * w[i]);
        }
        check_finite(&x, k)?;

        let lifted = hankelize_samples(&x, shape)?;
        let arg = &lifted + &d.mapv(|v| v / beta);
        big_x = soft_threshold_svd(&arg, 1.0 / beta)?;
        d += &((&lifted - &big_x).mapv(|v| v * tau));

        let delta = delta_x(&x, &x_prev, k)?;
        delta_trace.push(delta);
        on_iteration(IterationSnapshot { iteration: k, x: &x, delta });
        if delta <= eta {
            converged = true;
            break;
        }
    }

    let iterations = delta_trace.len();
    Ok(SolverResult {
        denoised: Fid::new(x, y.dt())?,
        delta_trace,
        iterations,
        converged,
        poles: None,
        amplitudes: None,
        checks: None,
    })
}

/// Cadzow signal enhancement: alternate between the rank-`r_hat`
/// approximation and the Hankel structure (anti-diagonal averaging).
pub fn cadzow(y: &Fid, r_hat: usize, max_iter: usize, eta: f64) -> Result<SolverResult> {
    cadzow_traced(y, r_hat, max_iter, eta, |_| {})
}

/// [`cadzow`] with an observer that sees every iterate.
pub fn cadzow_traced(
    y: &Fid,
    r_hat: usize,
    max_iter: usize,
    eta: f64,
    mut on_iteration: impl FnMut(IterationSnapshot<'_>),
) -> Result<SolverResult> {
    let shape = HankelShape::from_len(y.len())?;
    if r_hat == 0 || r_hat > shape.min_dim() {
        return Err(Error::invalid(format!(
            "r_hat = {r_hat} out of range for a {}x{} embedding",
            shape.p(),
            shape.q()
        )));
    }
    if max_iter == 0 {
        return Err(Error::invalid("max_iter must be at least 1"));
    }
    if !eta.is_finite() || eta < 0.0 {
        return Err(Error::invalid(format!("eta must be non-negative and finite, got {eta}")));
    }

    let mut x: Vec<Complex64> = y.samples().to_vec();
    let mut delta_trace = Vec::new();
    let mut converged = false;

    for k in 1..=max_iter {
        let lifted = hankelize_samples(&x, shape)?;
        let (truncated, _) = truncate_rank(&lifted, r_hat).map_err(|e| at_iteration(e, k))?;
        let next = dehankelize_avg(&truncated, shape)?;
        check_finite(&next, k)?;

        let delta = delta_x(&next, &x, k)?;
        x = next;
        delta_trace.push(delta);
        on_iteration(IterationSnapshot { iteration: k, x: &x, delta });
        if delta <= eta {
            converged = true;
            break;
        }
    }

    let iterations = delta_trace.len();
    Ok(SolverResult {
        denoised: Fid::new(x, y.dt())?,
        delta_trace,
        iterations,
        converged,
        poles: None,
        amplitudes: None,
        checks: None,
    })
}

/// Randomized QR denoising: project the Hankel matrix onto the range of a
/// seeded Gaussian sketch. Single pass.
pub fn rqrd(y: &Fid, r_hat: usize, seed: u64) -> Result<SolverResult> {
    let shape = HankelShape::from_len(y.len())?;
    if r_hat == 0 || r_hat > shape.min_dim() {
        return Err(Error::invalid(format!(
            "r_hat = {r_hat} out of range for a {}x{} embedding",
            shape.p(),
            shape.q()
        )));
    }

    let h = hankelize_samples(y.samples(), shape)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let draw_sketch = |rng: &mut ChaCha12Rng| {
        CMatrix::from_shape_fn((shape.q(), r_hat), |_| {
            Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
        })
    };
    let full_rank = |m: &CMatrix| -> Result<bool> {
        let (_, r) = m.qr().map_err(|e| Error::numeric(format!("QR failed: {e}")))?;
        let diag: Vec<f64> = (0..r_hat).map(|i| r[[i, i]].norm()).collect();
        let max = diag.iter().cloned().fold(0.0, f64::max);
        Ok(max > 0.0 && diag.iter().all(|&v| v >= 1e-12 * max))
    };

    // A Gaussian sketch is full rank almost surely; on the measure-zero
    // failure redraw once, then give up. (The *sampled* matrix H Omega may
    // legitimately have lower rank when the signal itself does — the
    // projector below still reproduces the signal's range in that case.)
    let mut sketch = draw_sketch(&mut rng);
    if !full_rank(&sketch)? {
        sketch = draw_sketch(&mut rng);
        if !full_rank(&sketch)? {
            return Err(Error::conditioning(format!(
                "sketch is rank-deficient after a redraw (r_hat = {r_hat})"
            )));
        }
    }

    let sample = h.dot(&sketch);
    let (b, _) = sample.qr().map_err(|e| Error::numeric(format!("QR failed: {e}")))?;
    let bh = b.t().mapv(|v| v.conj());
    let projected = b.dot(&bh.dot(&h));
    let x = dehankelize_avg(&projected, shape)?;
    check_finite(&x, 1)?;

    let delta = delta_x(&x, y.samples(), 1)?;
    Ok(SolverResult {
        denoised: Fid::new(x, y.dt())?,
        delta_trace: vec![delta],
        iterations: 1,
        converged: true,
        poles: None,
        amplitudes: None,
        checks: None,
    })
}

/// Truncated-SVD baseline: one rank-`r_hat` projection of the Hankel lift.
pub fn tsvd_denoise(y: &Fid, r_hat: usize) -> Result<SolverResult> {
    let shape = HankelShape::from_len(y.len())?;
    if r_hat == 0 || r_hat > shape.min_dim() {
        return Err(Error::invalid(format!(
            "r_hat = {r_hat} out of range for a {}x{} embedding",
            shape.p(),
            shape.q()
        )));
    }

    let lifted = hankelize_samples(y.samples(), shape)?;
    let (truncated, _) = truncate_rank(&lifted, r_hat)?;
    let x = dehankelize_avg(&truncated, shape)?;
    check_finite(&x, 1)?;

    let delta = delta_x(&x, y.samples(), 1)?;
    Ok(SolverResult {
        denoised: Fid::new(x, y.dt())?,
        delta_trace: vec![delta],
        iterations: 1,
        converged: true,
        poles: None,
        amplitudes: None,
        checks: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{add_noise, nrmse, reference_5peak, synthesize_fid, NoiseSpec};

    fn reference_fid() -> Fid {
        synthesize_fid(&reference_5peak()).unwrap()
    }

    #[test]
    fn chord_v_recovers_noiseless_reference() {
        let truth = reference_fid();
        let out = chord_v(&truth, &ChordVConfig::new(5)).unwrap();
        let err = nrmse(&out.denoised, &truth).unwrap();
        assert!(err < 1e-2, "noiseless NRMSE {err}");
        assert_eq!(out.denoised.len(), truth.len());
        assert_eq!(out.delta_trace.len(), out.iterations);
        assert_eq!(out.poles.as_ref().unwrap().len(), 5);
        assert_eq!(out.amplitudes.as_ref().unwrap().len(), 5);
    }

    #[test]
    fn chord_v_improves_on_noisy_input() {
        let truth = reference_fid();
        let mut in_err = 0.0;
        let mut out_err = 0.0;
        for seed in 0..20 {
            let noisy = add_noise(&truth, &NoiseSpec::new(0.05, seed).unwrap()).unwrap();
            let out = chord_v(&noisy, &ChordVConfig::new(5)).unwrap();
            in_err += nrmse(&noisy, &truth).unwrap();
            out_err += nrmse(&out.denoised, &truth).unwrap();
        }
        assert!(out_err < in_err, "mean NRMSE {} vs input {}", out_err / 20.0, in_err / 20.0);
    }

    #[test]
    fn chord_v_converges_on_overshot_rank() {
        // sigma = 0.03 with a generous prior of 20 components.
        let truth = reference_fid();
        let noisy = add_noise(&truth, &NoiseSpec::new(0.03, 7).unwrap()).unwrap();
        let out = chord_v(&noisy, &ChordVConfig::new(20)).unwrap();
        assert!(out.converged, "no convergence in {} iterations", out.iterations);
        assert!(out.iterations <= 200);
        assert!(out.delta_trace.iter().all(|d| d.is_finite() && *d > 0.0));
        assert!(*out.delta_trace.last().unwrap() <= 1e-3);
    }

    #[test]
    fn chord_v_stationarity_residuals_are_tiny() {
        let truth = reference_fid();
        let noisy = add_noise(&truth, &NoiseSpec::new(0.04, 3).unwrap()).unwrap();
        let mut cfg = ChordVConfig::new(5);
        cfg.debug_checks = true;
        let out = chord_v(&noisy, &cfg).unwrap();
        let checks = out.checks.unwrap();
        // Measured ~1e-15 in practice; 1e-8 leaves margin for harder inputs.
        assert!(checks.max_x_grad_rel < 1e-8, "x residual {}", checks.max_x_grad_rel);
        assert!(checks.max_c_grad_rel < 1e-8, "c residual {}", checks.max_c_grad_rel);
    }

    #[test]
    fn chord_v_is_deterministic() {
        let truth = reference_fid();
        let noisy = add_noise(&truth, &NoiseSpec::new(0.04, 11).unwrap()).unwrap();
        let a = chord_v(&noisy, &ChordVConfig::new(5)).unwrap();
        let b = chord_v(&noisy, &ChordVConfig::new(5)).unwrap();
        assert_eq!(a.denoised.samples(), b.denoised.samples());
        assert_eq!(a.delta_trace, b.delta_trace);
    }

    #[test]
    fn chord_v_observer_sees_every_iteration() {
        let truth = reference_fid();
        let noisy = add_noise(&truth, &NoiseSpec::new(0.04, 2).unwrap()).unwrap();
        let mut seen = Vec::new();
        let out = chord_v_traced(&noisy, &ChordVConfig::new(5), |snap| {
            assert_eq!(snap.x.len(), noisy.len());
            seen.push((snap.iteration, snap.delta));
        })
        .unwrap();
        assert_eq!(seen.len(), out.iterations);
        for (i, (k, delta)) in seen.iter().enumerate() {
            assert_eq!(*k, i + 1);
            assert_eq!(*delta, out.delta_trace[i]);
        }
    }

    #[test]
    fn chord_v_ablation_flags_run() {
        let truth = reference_fid();
        let noisy = add_noise(&truth, &NoiseSpec::new(0.04, 5).unwrap()).unwrap();

        let mut zero_dual = ChordVConfig::new(5);
        zero_dual.zero_dual_init = true;
        let out = chord_v(&noisy, &zero_dual).unwrap();
        assert!(nrmse(&out.denoised, &truth).unwrap() < nrmse(&noisy, &truth).unwrap());

        let mut no_overwrite = ChordVConfig::new(5);
        no_overwrite.skip_model_overwrite = true;
        chord_v(&noisy, &no_overwrite).unwrap();

        let mut clamped = ChordVConfig::new(5);
        clamped.clamp_poles = true;
        let out = chord_v(&noisy, &clamped).unwrap();
        for z in out.poles.unwrap().poles() {
            assert!(z.norm() <= 1.0 + 1e-12);
        }

        let mut averaging = ChordVConfig::new(5);
        averaging.adjoint = AdjointKind::Averaging;
        let out = chord_v(&noisy, &averaging).unwrap();
        assert!(nrmse(&out.denoised, &truth).unwrap() < nrmse(&noisy, &truth).unwrap());

        let mut alt_threshold = ChordVConfig::new(5);
        alt_threshold.svt_rule = SvtRule::GammaOverBeta;
        chord_v(&noisy, &alt_threshold).unwrap();
    }

    #[test]
    fn chord_v_rejects_bad_config() {
        let truth = reference_fid();
        let mut cfg = ChordVConfig::new(5);
        cfg.lambda = 0.0;
        assert!(chord_v(&truth, &cfg).is_err());
        let mut cfg = ChordVConfig::new(5);
        cfg.gamma = -1.0;
        assert!(chord_v(&truth, &cfg).is_err());
        assert!(chord_v(&truth, &ChordVConfig::new(0)).is_err());
        assert!(chord_v(&truth, &ChordVConfig::new(128)).is_err());
        let mut cfg = ChordVConfig::new(5);
        cfg.max_iter = 0;
        assert!(chord_v(&truth, &cfg).is_err());
    }

    #[test]
    fn chord_recovers_noiseless_reference() {
        let truth = reference_fid();
        let out = chord(&truth, crate::defaults::CHORD_LAMBDA, 1.0, 1.0, 1e-3, 200).unwrap();
        let err = nrmse(&out.denoised, &truth).unwrap();
        assert!(err < 1e-2, "noiseless NRMSE {err}");
        assert!(out.poles.is_none());
    }

    #[test]
    fn chord_improves_on_noisy_input() {
        let truth = reference_fid();
        let mut in_err = 0.0;
        let mut out_err = 0.0;
        for seed in 100..120 {
            let noisy = add_noise(&truth, &NoiseSpec::new(0.05, seed).unwrap()).unwrap();
            let out = chord(&noisy, crate::defaults::CHORD_LAMBDA, 1.0, 1.0, 1e-3, 200).unwrap();
            in_err += nrmse(&noisy, &truth).unwrap();
            out_err += nrmse(&out.denoised, &truth).unwrap();
        }
        assert!(out_err < in_err);
    }

    #[test]
    fn chord_huge_lambda_returns_input() {
        let truth = reference_fid();
        let noisy = add_noise(&truth, &NoiseSpec::new(0.05, 1).unwrap()).unwrap();
        let out = chord(&noisy, 1e6, 1.0, 1.0, 1e-3, 200).unwrap();
        let stay = nrmse(&out.denoised, &noisy).unwrap();
        assert!(stay < 1e-3, "moved {stay} from the input");
    }

    #[test]
    fn cadzow_fixed_point_on_exact_signal() {
        let truth = reference_fid();
        let out = cadzow(&truth, 5, 50, 1e-3).unwrap();
        assert_eq!(out.iterations, 1);
        assert!(out.converged);
        assert!(out.delta_trace[0] < 1e-10, "delta {}", out.delta_trace[0]);
    }

    #[test]
    fn cadzow_full_rank_is_identity() {
        let truth = reference_fid();
        let noisy = add_noise(&truth, &NoiseSpec::new(0.05, 4).unwrap()).unwrap();
        let out = cadzow(&noisy, 128, 10, 1e-3).unwrap();
        let stay = nrmse(&out.denoised, &noisy).unwrap();
        assert!(stay < 1e-12, "moved {stay} from the input");
    }

    #[test]
    fn cadzow_improves_on_noisy_input() {
        let truth = reference_fid();
        let noisy = add_noise(&truth, &NoiseSpec::new(0.04, 9).unwrap()).unwrap();
        let out = cadzow(&noisy, 5, 50, 1e-3).unwrap();
        assert!(nrmse(&out.denoised, &truth).unwrap() < nrmse(&noisy, &truth).unwrap());
    }

    #[test]
    fn rqrd_full_sketch_is_identity() {
        let truth = reference_fid();
        let noisy = add_noise(&truth, &NoiseSpec::new(0.05, 6).unwrap()).unwrap();
        let out = rqrd(&noisy, 128, 0).unwrap();
        let stay = nrmse(&out.denoised, &noisy).unwrap();
        assert!(stay < 1e-10, "moved {stay} from the input");
    }

    #[test]
    fn rqrd_preserves_exact_low_rank_signals() {
        let truth = reference_fid();
        for r_hat in [5, 8, 20] {
            let out = rqrd(&truth, r_hat, 31).unwrap();
            let err = nrmse(&out.denoised, &truth).unwrap();
            assert!(err < 1e-8, "r_hat = {r_hat}: error {err}");
        }
    }

    #[test]
    fn rqrd_is_seed_stable() {
        let truth = reference_fid();
        let noisy = add_noise(&truth, &NoiseSpec::new(0.05, 8).unwrap()).unwrap();
        let a = rqrd(&noisy, 5, 42).unwrap();
        let b = rqrd(&noisy, 5, 42).unwrap();
        assert_eq!(a.denoised.samples(), b.denoised.samples());
        let other = rqrd(&noisy, 5, 43).unwrap();
        assert_ne!(a.denoised.samples(), other.denoised.samples());
    }

    #[test]
    fn tsvd_matches_first_cadzow_iterate() {
        let truth = reference_fid();
        let noisy = add_noise(&truth, &NoiseSpec::new(0.06, 14).unwrap()).unwrap();
        let tsvd = tsvd_denoise(&noisy, 5).unwrap();
        let one_step = cadzow(&noisy, 5, 1, 0.0).unwrap();
        assert_eq!(tsvd.denoised.samples(), one_step.denoised.samples());
    }

    #[test]
    fn tsvd_recovers_exact_signal() {
        let truth = reference_fid();
        let out = tsvd_denoise(&truth, 5).unwrap();
        assert!(nrmse(&out.denoised, &truth).unwrap() < 1e-8);
    }

    #[test]
    fn tsvd_rejects_rank_zero() {
        let truth = reference_fid();
        assert!(tsvd_denoise(&truth, 0).is_err());
        assert!(rqrd(&truth, 0, 0).is_err());
        assert!(cadzow(&truth, 0, 10, 1e-3).is_err());
    }
}
