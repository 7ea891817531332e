//! Discrete Fourier transform of a FID and the frequency axis that goes
//! with it.
//!
//! The transform is the plain unnormalized forward DFT
//! `X[k] = sum_n x[n] exp(-2 pi i k n / N)`, so Parseval reads
//! `sum |X[k]|^2 = N * sum |x[n]|^2`. Bins are kept in natural DFT order
//! and the axis follows the usual fftfreq convention: non-negative
//! frequencies first, then the negative ones.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::Result;
use crate::signal::Fid;

/// Complex spectrum with its frequency axis in hertz.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    bins: Vec<Complex64>,
    freqs: Vec<f64>,
}

impl Spectrum {
    pub fn bins(&self) -> &[Complex64] {
        &self.bins
    }

    /// Frequency of each bin in Hz, in DFT order.
    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    /// Magnitude of each bin, in DFT order.
    pub fn magnitudes(&self) -> Vec<f64> {
        self.bins.iter().map(|b| b.norm()).collect()
    }
}

/// Bin frequencies in Hz for an `n`-point DFT with sample spacing `dt`:
/// `[0, 1, .., n/2-1, -(n/2), .., -1] / (n * dt)` for even `n`, and the
/// analogous split at `(n-1)/2` for odd `n`.
pub fn fft_freqs(n: usize, dt: f64) -> Vec<f64> {
    let step = 1.0 / (n as f64 * dt);
    let split = n.div_ceil(2);
    (0..n)
        .map(|k| if k < split { k as f64 * step } else { (k as f64 - n as f64) * step })
        .collect()
}

/// Unnormalized forward DFT of the FID.
pub fn dft_spectrum(fid: &Fid) -> Result<Spectrum> {
    let mut bins: Vec<Complex64> = fid.samples().to_vec();
    FftPlanner::new().plan_fft_forward(bins.len()).process(&mut bins);
    Ok(Spectrum { bins, freqs: fft_freqs(fid.len(), fid.dt()) })
}
