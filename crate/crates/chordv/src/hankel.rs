//! Hankel lifting of a signal, its adjoints, and the SVD-based matrix
//! shrinkage primitives built on top of it.
//!
//! `hankelize` maps a length-`N` signal to the `P x Q` matrix whose `(p, q)`
//! entry is `x[p + q]`, so every anti-diagonal is constant and a sum of `R`
//! exponentials lifts to a rank-`R` matrix. Two inverse-direction maps come
//! with it:
//!
//! * [`dehankelize_sum`] is the exact adjoint of the lift under the
//!   Frobenius / l2 inner products: entry `n` is the *sum* over the
//!   anti-diagonal `p + q = n`. Composed with the lift it scales sample `n`
//!   by the anti-diagonal weight `w[n]`, which is what makes the normal
//!   equations of the solvers diagonal.
//! * [`dehankelize_avg`] divides out the weights (the average over each
//!   anti-diagonal) and is a left inverse of the lift; it is the map used to
//!   read a denoised matrix back as a signal.
//!
//! Matrices are plain `ndarray` arrays of `Complex64` in the default
//! row-major layout.

use ndarray::prelude::*;
use ndarray_linalg::{JobSvd, SVDDCInto};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signal::Fid;

/// Dense complex matrix used by the kernels.
pub type CMatrix = Array2<Complex64>;

/// Geometry of the Hankel embedding of a length-`n` signal: `p + q - 1 = n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HankelShape {
    n: usize,
    p: usize,
    q: usize,
}

impl HankelShape {
    /// Default column policy: `Q = (N+1)/2` for odd `N`, `N/2` for even `N`.
    pub fn from_len(n: usize) -> Result<Self> {
        let q = if n % 2 == 1 { (n + 1) / 2 } else { n / 2 };
        Self::with_cols(n, q)
    }

    /// Explicit column count, for experimenting with non-square embeddings.
    pub fn with_cols(n: usize, q: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!("signal length must be at least 2, got {n}")));
        }
        if q < 1 || q > n {
            return Err(Error::invalid(format!("column count {q} out of range for length {n}")));
        }
        Ok(HankelShape { n, p: n - q + 1, q })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn min_dim(&self) -> usize {
        self.p.min(self.q)
    }

    fn check_matrix(&self, m: &CMatrix) -> Result<()> {
        if m.nrows() != self.p || m.ncols() != self.q {
            return Err(Error::invalid(format!(
                "matrix is {}x{}, expected {}x{}",
                m.nrows(),
                m.ncols(),
                self.p,
                self.q
            )));
        }
        Ok(())
    }
}

/// Lift a signal into its Hankel matrix; entry `(p, q)` is `x[p + q]`.
pub fn hankelize(x: &Fid, shape: HankelShape) -> Result<CMatrix> {
    hankelize_samples(x.samples(), shape)
}

pub(crate) fn hankelize_samples(x: &[Complex64], shape: HankelShape) -> Result<CMatrix> {
    if x.len() != shape.n {
        return Err(Error::invalid(format!(
            "signal length {} does not match embedding length {}",
            x.len(),
            shape.n
        )));
    }
    Ok(CMatrix::from_shape_fn((shape.p, shape.q), |(p, q)| x[p + q]))
}

/// Exact adjoint of the lift: entry `n` is the sum over the anti-diagonal
/// `p + q = n`.
pub fn dehankelize_sum(m: &CMatrix, shape: HankelShape) -> Result<Vec<Complex64>> {
    shape.check_matrix(m)?;
    let mut out = vec![Complex64::new(0.0, 0.0); shape.n];
    for p in 0..shape.p {
        for q in 0..shape.q {
            out[p + q] += m[[p, q]];
        }
    }
    Ok(out)
}

/// Anti-diagonal average; a left inverse of the lift.
///
/// Each entry is computed as `first + mean(entry - first)` rather than
/// `sum / w`, so a constant anti-diagonal reproduces its value bit-exactly.
pub fn dehankelize_avg(m: &CMatrix, shape: HankelShape) -> Result<Vec<Complex64>> {
    shape.check_matrix(m)?;
    let weights = antidiag_weights(shape);
    let mut out = Vec::with_capacity(shape.n);
    for n in 0..shape.n {
        let p_lo = n.saturating_sub(shape.q - 1);
        let p_hi = n.min(shape.p - 1);
        let first = m[[p_lo, n - p_lo]];
        let mut spread = Complex64::new(0.0, 0.0);
        for p in p_lo..=p_hi {
            spread += m[[p, n - p]] - first;
        }
        out.push(first + spread / weights[n] as f64);
    }
    Ok(out)
}

/// Number of matrix entries on each anti-diagonal: `w[n] = min(n+1, P, Q, N-n)`.
pub fn antidiag_weights(shape: HankelShape) -> Vec<usize> {
    (0..shape.n)
        .map(|n| (n + 1).min(shape.p).min(shape.q).min(shape.n - n))
        .collect()
}

/// Thin SVD with singular values in non-increasing order (LAPACK
/// divide-and-conquer). Returns `(U, S, V^H)`.
pub(crate) fn thin_svd(m: &CMatrix) -> Result<(CMatrix, Array1<f64>, CMatrix)> {
    let (u, s, vh) = m
        .to_owned()
        .svddc_into(JobSvd::Some)
        .map_err(|e| Error::numeric(format!("SVD failed: {e}")))?;
    let u = u.ok_or_else(|| Error::numeric("SVD returned no left factor"))?;
    let vh = vh.ok_or_else(|| Error::numeric("SVD returned no right factor"))?;
    Ok((u, s, vh))
}

/// Singular values of a dense complex matrix, non-increasing.
pub fn singular_values(m: &CMatrix) -> Result<Array1<f64>> {
    let (_, s, _) = m
        .to_owned()
        .svddc_into(JobSvd::None)
        .map_err(|e| Error::numeric(format!("SVD failed: {e}")))?;
    Ok(s)
}

/// Reassemble `U[.., ..r] * diag(s[..r]) * V^H[..r, ..]`.
fn rebuild(u: &CMatrix, s: &Array1<f64>, vh: &CMatrix, r: usize) -> CMatrix {
    let mut us = u.slice(s![.., ..r]).to_owned();
    for (j, mut col) in us.columns_mut().into_iter().enumerate() {
        col.map_inplace(|v| *v *= s[j]);
    }
    us.dot(&vh.slice(s![..r, ..]))
}

/// Best rank-`r` approximation together with the `r` leading left singular
/// vectors (orthonormal columns).
pub fn truncate_rank(m: &CMatrix, r: usize) -> Result<(CMatrix, CMatrix)> {
    let min_dim = m.nrows().min(m.ncols());
    if r == 0 || r > min_dim {
        return Err(Error::invalid(format!(
            "truncation rank {r} out of range for a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    let (u, s, vh) = thin_svd(m)?;
    let truncated = rebuild(&u, &s, &vh, r);
    let left_basis = u.slice(s![.., ..r]).to_owned();
    Ok((truncated, left_basis))
}

/// Singular value soft-thresholding: `U * diag(max(s - a, 0)) * V^H`.
pub fn soft_threshold_svd(m: &CMatrix, a: f64) -> Result<CMatrix> {
    if !a.is_finite() || a < 0.0 {
        return Err(Error::invalid(format!("threshold must be finite and >= 0, got {a}")));
    }
    let (u, s, vh) = thin_svd(m)?;
    let shrunk = s.mapv(|v| (v - a).max(0.0));
    // Keep only the surviving directions; the rest contribute nothing.
    let kept = shrunk.iter().take_while(|&&v| v > 0.0).count();
    if kept == 0 {
        return Ok(CMatrix::zeros((m.nrows(), m.ncols())));
    }
    Ok(rebuild(&u, &shrunk, &vh, kept))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray_linalg::Norm;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> CMatrix {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
        CMatrix::from_shape_fn((rows, cols), |_| {
            c(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
        })
    }

    fn random_signal(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| c(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
            .collect()
    }

    fn frobenius_inner(a: &CMatrix, b: &CMatrix) -> Complex64 {
        a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
    }

    #[test]
    fn shape_policy_matches_parity() {
        let odd = HankelShape::from_len(5).unwrap();
        assert_eq!((odd.p(), odd.q()), (3, 3));
        let even = HankelShape::from_len(256).unwrap();
        assert_eq!((even.p(), even.q()), (129, 128));
        assert_eq!(even.p() + even.q() - 1, 256);
    }

    #[test]
    fn three_sample_lift() {
        let (a, b, d) = (c(1.0, 2.0), c(-0.5, 0.25), c(3.0, -1.0));
        let fid = Fid::new(vec![a, b, d], 1.0).unwrap();
        let shape = HankelShape::from_len(3).unwrap();
        let m = hankelize(&fid, shape).unwrap();
        assert_eq!(m[[0, 0]], a);
        assert_eq!(m[[0, 1]], b);
        assert_eq!(m[[1, 0]], b);
        assert_eq!(m[[1, 1]], d);
    }

    #[test]
    fn lift_of_one_exponential_is_rank_one() {
        let spec = crate::signal::ModelSpec::new(
            vec![crate::signal::ExponentialComponent::new(1.0, 40.0, 12.0).unwrap()],
            1e-3,
            64,
        )
        .unwrap();
        let fid = crate::signal::synthesize_fid(&spec).unwrap();
        let m = hankelize(&fid, HankelShape::from_len(64).unwrap()).unwrap();
        let (_, s, _) = thin_svd(&m).unwrap();
        assert!(s[1] < 1e-12 * s[0], "second singular value {} vs {}", s[1], s[0]);
    }

    #[test]
    fn sum_adjoint_on_two_by_two() {
        let (a, b, d) = (c(1.0, 0.0), c(2.0, -1.0), c(0.5, 4.0));
        let shape = HankelShape::from_len(3).unwrap();
        let m = CMatrix::from_shape_vec((2, 2), vec![a, b, b, d]).unwrap();
        let sum = dehankelize_sum(&m, shape).unwrap();
        assert_eq!(sum, vec![a, 2.0 * b, d]);
        let avg = dehankelize_avg(&m, shape).unwrap();
        assert_eq!(avg, vec![a, b, d]);
    }

    #[test]
    fn avg_of_non_hankel_matrix() {
        let shape = HankelShape::from_len(3).unwrap();
        let m = CMatrix::from_shape_vec(
            (2, 2),
            vec![c(0.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        )
        .unwrap();
        let avg = dehankelize_avg(&m, shape).unwrap();
        assert_eq!(avg, vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
    }

    #[test]
    fn avg_after_lift_is_bit_exact() {
        let x = random_signal(101, 5);
        let shape = HankelShape::from_len(101).unwrap();
        let m = hankelize_samples(&x, shape).unwrap();
        let back = dehankelize_avg(&m, shape).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn sum_after_lift_scales_by_weights() {
        let x = random_signal(64, 11);
        let shape = HankelShape::from_len(64).unwrap();
        let w = antidiag_weights(shape);
        let m = hankelize_samples(&x, shape).unwrap();
        let summed = dehankelize_sum(&m, shape).unwrap();
        for n in 0..x.len() {
            let expected = x[n] * w[n] as f64;
            assert_relative_eq!(summed[n].re, expected.re, max_relative = 1e-13, epsilon = 1e-13);
            assert_relative_eq!(summed[n].im, expected.im, max_relative = 1e-13, epsilon = 1e-13);
        }
    }

    #[test]
    fn adjoint_identity_over_random_pairs() {
        // <R x, M>_F == <x, R^adj M> for the summing adjoint.
        for trial in 0..100 {
            let n = 17 + (trial % 7);
            let shape = HankelShape::from_len(n).unwrap();
            let x = random_signal(n, 1000 + trial as u64);
            let m = random_matrix(shape.p(), shape.q(), 2000 + trial as u64);
            let lifted = hankelize_samples(&x, shape).unwrap();
            let lhs = frobenius_inner(&lifted, &m);
            let adj = dehankelize_sum(&m, shape).unwrap();
            let rhs: Complex64 = x.iter().zip(&adj).map(|(a, b)| a.conj() * b).sum();
            assert_relative_eq!(lhs.re, rhs.re, max_relative = 1e-12, epsilon = 1e-12);
            assert_relative_eq!(lhs.im, rhs.im, max_relative = 1e-12, epsilon = 1e-12);
        }
    }

    #[test]
    fn weights_for_small_shapes() {
        assert_eq!(antidiag_weights(HankelShape::from_len(5).unwrap()), vec![1, 2, 3, 2, 1]);
        assert_eq!(antidiag_weights(HankelShape::from_len(4).unwrap()), vec![1, 2, 2, 1]);
    }

    #[test]
    fn weights_sum_to_matrix_size() {
        for n in 2..40 {
            let shape = HankelShape::from_len(n).unwrap();
            let total: usize = antidiag_weights(shape).iter().sum();
            assert_eq!(total, shape.p() * shape.q());
        }
        let wide = HankelShape::with_cols(30, 7).unwrap();
        let total: usize = antidiag_weights(wide).iter().sum();
        assert_eq!(total, wide.p() * wide.q());
    }

    #[test]
    fn truncate_diag_matrix() {
        let mut m = CMatrix::zeros((2, 2));
        m[[0, 0]] = c(3.0, 0.0);
        m[[1, 1]] = c(1.0, 0.0);
        let (t, basis) = truncate_rank(&m, 1).unwrap();
        assert_relative_eq!(t[[0, 0]].re, 3.0, max_relative = 1e-14);
        assert!(t[[1, 1]].norm() < 1e-14);
        assert_eq!(basis.shape(), &[2, 1]);
        assert_relative_eq!(basis.column(0).norm_l2(), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn full_rank_truncation_is_identity() {
        let m = random_matrix(9, 6, 3);
        let (t, _) = truncate_rank(&m, 6).unwrap();
        let diff = (&t - &m).norm_l2();
        assert!(diff < 1e-12 * m.norm_l2());
    }

    #[test]
    fn truncation_residual_matches_discarded_singular_values() {
        // Eckart-Young: the squared Frobenius residual is the sum of the
        // squared discarded singular values.
        for trial in 0..20 {
            let m = random_matrix(12, 9, 40 + trial);
            let (_, s, _) = thin_svd(&m).unwrap();
            for r in 1..9 {
                let (t, _) = truncate_rank(&m, r).unwrap();
                let residual = (&m - &t).norm_l2().powi(2);
                let expected: f64 = s.iter().skip(r).map(|v| v * v).sum();
                assert_relative_eq!(residual, expected, max_relative = 1e-10, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn truncation_output_is_low_rank() {
        let m = random_matrix(20, 14, 7);
        let (t, _) = truncate_rank(&m, 4).unwrap();
        let (_, s, _) = thin_svd(&t).unwrap();
        assert!(s[4] < 1e-10 * s[0]);
    }

    #[test]
    fn soft_threshold_diag_matrix() {
        let mut m = CMatrix::zeros((2, 2));
        m[[0, 0]] = c(3.0, 0.0);
        m[[1, 1]] = c(1.0, 0.0);
        let t = soft_threshold_svd(&m, 2.0).unwrap();
        assert_relative_eq!(t[[0, 0]].re, 1.0, max_relative = 1e-12);
        assert!(t[[1, 1]].norm() < 1e-13);
    }

    #[test]
    fn zero_threshold_reproduces_input() {
        let m = random_matrix(8, 8, 21);
        let t = soft_threshold_svd(&m, 0.0).unwrap();
        assert!((&t - &m).norm_l2() < 1e-12 * m.norm_l2());
    }

    #[test]
    fn large_threshold_zeroes_everything() {
        let m = random_matrix(6, 5, 22);
        let (_, s, _) = thin_svd(&m).unwrap();
        let t = soft_threshold_svd(&m, s[0] + 1.0).unwrap();
        assert_eq!(t.iter().map(|v| v.norm()).sum::<f64>(), 0.0);
    }

    #[test]
    fn soft_threshold_is_nonexpansive() {
        for trial in 0..100 {
            let a = random_matrix(10, 8, 300 + trial);
            let b = random_matrix(10, 8, 500 + trial);
            let ta = soft_threshold_svd(&a, 1.3).unwrap();
            let tb = soft_threshold_svd(&b, 1.3).unwrap();
            let before = (&a - &b).norm_l2();
            let after = (&ta - &tb).norm_l2();
            assert!(after <= before * (1.0 + 1e-10), "{after} > {before}");
        }
    }

    #[test]
    fn rank_zero_and_oversize_rejected() {
        let m = random_matrix(4, 4, 1);
        assert!(truncate_rank(&m, 0).is_err());
        assert!(truncate_rank(&m, 5).is_err());
    }
}
