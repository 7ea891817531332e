//! Pole estimation from a truncated left singular basis, Vandermonde
//! matrix construction, and the regularized amplitude solve.
//!
//! A sum of `R` damped exponentials has samples `x[n] = sum_r c_r z_r^n`,
//! i.e. `x = Z c` for the `N x R` Vandermonde matrix `Z` with columns
//! `1, z_r, z_r^2, ...`. The poles are recovered from the shift-invariance
//! of the signal subspace: if `U` spans the column space of the rank-`R`
//! Hankel lift, then `pinv(U^l) U^f` (drop the last / first row of `U`) has
//! the poles as its eigenvalues.

use ndarray::prelude::*;
use ndarray_linalg::Eig;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hankel::{hankelize_samples, thin_svd, CMatrix, HankelShape};
use crate::signal::Fid;

/// Relative singular-value cutoff below which a system is declared
/// rank-deficient (pseudoinverse and zero-`gamma` amplitude solves).
const RANK_CUTOFF: f64 = 1e-12;

/// Estimated signal poles together with the signal length they refer to.
///
/// Duplicate poles are permitted (they arise as a degenerate case of the
/// estimator); downstream solves reject them only where they actually make
/// the system singular.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleSet {
    poles: Vec<Complex64>,
    n: usize,
}

impl PoleSet {
    pub fn new(poles: Vec<Complex64>, n: usize) -> Result<Self> {
        if poles.is_empty() {
            return Err(Error::invalid("pole set must be non-empty"));
        }
        if n == 0 {
            return Err(Error::invalid("target signal length must be at least 1"));
        }
        if let Some(bad) = poles.iter().find(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid(format!("pole {bad} is not finite")));
        }
        Ok(PoleSet { poles, n })
    }

    pub fn poles(&self) -> &[Complex64] {
        &self.poles
    }

    /// Signal length a Vandermonde matrix built from this set will have.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.poles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poles.is_empty()
    }

    /// Canonical order when no amplitude fit exists: ascending angle,
    /// magnitude as tie-break.
    pub fn sorted_by_angle(mut self) -> Self {
        self.poles
            .sort_by(|a, b| a.arg().total_cmp(&b.arg()).then(a.norm().total_cmp(&b.norm())));
        self
    }

    /// Experiment knob: rescale any pole with `|z| > 1` onto the unit
    /// circle. Not applied by default anywhere; growing exponentials are
    /// kept as estimated.
    pub fn clamped_to_unit_disk(mut self) -> Self {
        for z in &mut self.poles {
            let r = z.norm();
            if r > 1.0 {
                *z /= r;
            }
        }
        self
    }
}

/// Fitted peak amplitudes `c_r`, aligned with a [`PoleSet`] column order.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeVector {
    values: Vec<Complex64>,
}

impl AmplitudeVector {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::invalid(format!("amplitude {bad} is not finite")));
        }
        Ok(AmplitudeVector { values })
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// `N x R` matrix of pole powers, entry `(n, r) = z_r^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct VandermondeMatrix {
    base: PoleSet,
    entries: CMatrix,
}

impl VandermondeMatrix {
    pub fn poles(&self) -> &PoleSet {
        &self.base
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    /// Signal length (row count).
    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    /// Model order (column count).
    pub fn r(&self) -> usize {
        self.entries.ncols()
    }

    /// The modeled signal `Z c`.
    pub fn apply(&self, c: &AmplitudeVector) -> Result<Vec<Complex64>> {
        if c.len() != self.r() {
            return Err(Error::invalid(format!(
                "amplitude vector has length {}, matrix has {} columns",
                c.len(),
                self.r()
            )));
        }
        Ok(self.apply_raw(c.values()))
    }

    pub(crate) fn apply_raw(&self, c: &[Complex64]) -> Vec<Complex64> {
        let c = ArrayView1::from(c);
        self.entries.dot(&c).to_vec()
    }
}

/// Estimate poles from a `P x R` basis of the signal subspace via the
/// shift-invariance relation: the eigenvalues of `pinv(U^l) U^f`, where
/// `U^l` / `U^f` drop the last / first row. The pseudoinverse treats
/// singular values below `1e-12` of the largest as zero; a deficient `U^l`
/// is reported as a conditioning error.
///
/// `n` is the signal length recorded into the returned [`PoleSet`] (the
/// basis alone does not determine it). Poles come back sorted by angle.
pub fn estimate_poles(left_basis: &CMatrix, n: usize) -> Result<PoleSet> {
    let p = left_basis.nrows();
    let r = left_basis.ncols();
    if r == 0 {
        return Err(Error::invalid("basis must have at least one column"));
    }
    if p < r + 1 {
        return Err(Error::invalid(format!(
            "basis is {p}x{r}; need at least {} rows to shift",
            r + 1
        )));
    }

    let u_l = left_basis.slice(s![..p - 1, ..]).to_owned();
    let u_f = left_basis.slice(s![1.., ..]);

    let (w, sv, vh) = thin_svd(&u_l)?;
    if sv[0] == 0.0 || sv[r - 1] < RANK_CUTOFF * sv[0] {
        return Err(Error::conditioning(format!(
            "shifted basis is rank-deficient (singular values {:.3e}..{:.3e})",
            sv[r - 1],
            sv[0]
        )));
    }

    // A = V S^{-1} W^H U^f; eigenvalues of A are the pole estimates.
    let wh = w.t().mapv(|v| v.conj());
    let mut m = wh.dot(&u_f);
    for (i, mut row) in m.rows_mut().into_iter().enumerate() {
        row.map_inplace(|v| *v /= sv[i]);
    }
    let v = vh.t().mapv(|x| x.conj());
    let a = v.dot(&m);

    let (eigs, _) = a.eig().map_err(|e| Error::numeric(format!("pole eigensolve failed: {e}")))?;
    if eigs.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::numeric("pole eigensolve produced non-finite eigenvalues"));
    }
    Ok(PoleSet::new(eigs.to_vec(), n)?.sorted_by_angle())
}

/// Build the `n x R` matrix of powers by iterated multiplication, so that
/// `entries(n+1, r) = z_r * entries(n, r)` holds exactly as computed.
pub fn build_vandermonde(poles: &PoleSet) -> VandermondeMatrix {
    let n = poles.n();
    let r = poles.len();
    let mut entries = CMatrix::zeros((n, r));
    for (j, &z) in poles.poles().iter().enumerate() {
        let mut power = Complex64::new(1.0, 0.0);
        for i in 0..n {
            entries[[i, j]] = power;
            power *= z;
        }
    }
    VandermondeMatrix { base: poles.clone(), entries }
}

/// The composite operator of the Z-update: lift `x` to its Hankel matrix,
/// take the `r_hat` leading left singular vectors, estimate poles from
/// them, and build the Vandermonde matrix.
pub fn operator_z(x: &Fid, r_hat: usize) -> Result<VandermondeMatrix> {
    let shape = HankelShape::from_len(x.len())?;
    operator_z_samples(x.samples(), shape, r_hat)
}

pub(crate) fn operator_z_samples(
    x: &[Complex64],
    shape: HankelShape,
    r_hat: usize,
) -> Result<VandermondeMatrix> {
    if r_hat == 0 || r_hat + 1 > shape.min_dim() {
        return Err(Error::invalid(format!(
            "r_hat = {r_hat} out of range; embedding is {}x{}",
            shape.p(),
            shape.q()
        )));
    }
    let m = hankelize_samples(x, shape)?;
    let (u, _, _) = thin_svd(&m)?;
    let basis = u.slice(s![.., ..r_hat]).to_owned();
    let poles = estimate_poles(&basis, shape.n())?;
    let z = build_vandermonde(&poles);
    // A runaway pole estimate (|z| far above 1) overflows z^n; turn that
    // into a diagnostic instead of a downstream LAPACK failure.
    if z.entries().iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        let worst = poles.poles().iter().map(|p| p.norm()).fold(0.0, f64::max);
        return Err(Error::numeric(format!(
            "estimated pole magnitude {worst:.3e} overflows a {}-sample power column",
            shape.n()
        )));
    }
    Ok(z)
}

/// Ridge-regularized amplitude fit `(mu Z^H Z + gamma I)^{-1} mu Z^H x`.
/// With `gamma = 0` this is the plain least-squares fit; that path reports
/// a conditioning error when `Z` is rank-deficient (retry with `gamma > 0`).
pub fn solve_amplitudes(
    x: &Fid,
    z: &VandermondeMatrix,
    mu: f64,
    gamma: f64,
) -> Result<AmplitudeVector> {
    solve_amplitudes_samples(x.samples(), z, mu, gamma)
}

pub(crate) fn solve_amplitudes_samples(
    x: &[Complex64],
    z: &VandermondeMatrix,
    mu: f64,
    gamma: f64,
) -> Result<AmplitudeVector> {
    if x.len() != z.n() {
        return Err(Error::invalid(format!(
            "signal length {} does not match matrix rows {}",
            x.len(),
            z.n()
        )));
    }
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::invalid(format!("mu must be positive and finite, got {mu}")));
    }
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::invalid(format!("gamma must be non-negative and finite, got {gamma}")));
    }
    if z.entries().iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::numeric("Vandermonde matrix has non-finite entries"));
    }

    // Z = U S V^H turns the normal equations into a diagonal filter:
    // c = V diag(mu s / (mu s^2 + gamma)) U^H x.
    let (u, sv, vh) = thin_svd(z.entries())?;
    let r = z.r();
    if gamma == 0.0 && (sv[0] == 0.0 || sv[r - 1] < RANK_CUTOFF * sv[0]) {
        return Err(Error::conditioning(format!(
            "Vandermonde matrix is rank-deficient (singular values {:.3e}..{:.3e}); \
             retry with gamma > 0",
            sv[r - 1],
            sv[0]
        )));
    }

    let xv = ArrayView1::from(x);
    let mut uhx = u.t().mapv(|v| v.conj()).dot(&xv);
    for (i, value) in uhx.iter_mut().enumerate() {
        let s = sv[i];
        *value *= mu * s / (mu * s * s + gamma);
    }
    let c = vh.t().mapv(|v| v.conj()).dot(&uhx);
    if c.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::numeric("amplitude solve produced non-finite values"));
    }
    AmplitudeVector::new(c.to_vec())
}

/// Co-sort poles and amplitudes by descending fitted magnitude — the
/// reporting order for solver results.
pub(crate) fn sort_by_amplitude(
    poles: &PoleSet,
    amplitudes: &AmplitudeVector,
) -> (PoleSet, AmplitudeVector) {
    debug_assert_eq!(poles.len(), amplitudes.len());
    let mut order: Vec<usize> = (0..poles.len()).collect();
    order.sort_by(|&i, &j| {
        amplitudes.values()[j].norm().total_cmp(&amplitudes.values()[i].norm())
    });
    let poles_sorted: Vec<Complex64> = order.iter().map(|&i| poles.poles()[i]).collect();
    let amps_sorted: Vec<Complex64> = order.iter().map(|&i| amplitudes.values()[i]).collect();
    (
        PoleSet { poles: poles_sorted, n: poles.n() },
        AmplitudeVector { values: amps_sorted },
    )
}
