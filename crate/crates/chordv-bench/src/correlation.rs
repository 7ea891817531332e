//! Per-peak spectral agreement statistics.
//!
//! The headline statistic is the Pearson correlation between the
//! magnitude spectra of the denoised and clean signals, restricted to a
//! frequency window around each true peak. Windows default to ±5
//! full-widths-at-half-maximum; for the damped-exponential model a peak's
//! FWHM is `decay / pi` Hz. [`peak_heights`] exposes the scalar peak
//! intensity per window so height-based correlations across trials can be
//! computed from the same windows if preferred.

use chordv::{Error, ModelSpec, Result, Spectrum};

/// One closed frequency window `[lo_hz, hi_hz]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakWindow {
    pub lo_hz: f64,
    pub hi_hz: f64,
}

impl PeakWindow {
    pub fn new(lo_hz: f64, hi_hz: f64) -> Result<Self> {
        if !lo_hz.is_finite() || !hi_hz.is_finite() || lo_hz >= hi_hz {
            return Err(Error::InvalidInput(format!(
                "window bounds must be finite with lo < hi, got [{lo_hz}, {hi_hz}]"
            )));
        }
        Ok(PeakWindow { lo_hz, hi_hz })
    }

    fn contains(&self, f: f64) -> bool {
        self.lo_hz <= f && f <= self.hi_hz
    }
}

/// Lorentzian full width at half maximum, in Hz, of a component with the
/// given decay rate (1/s).
pub fn fwhm_hz(decay: f64) -> f64 {
    decay / std::f64::consts::PI
}

/// The ±5-FWHM window around each model component, one window per
/// component, in model order. Undamped components get a floor of five
/// frequency bins of half-width so the window is never degenerate.
pub fn default_windows(model: &ModelSpec) -> Result<Vec<PeakWindow>> {
    let bin_hz = 1.0 / (model.dt * model.n_samples as f64);
    model
        .components
        .iter()
        .map(|c| {
            let half = (5.0 * fwhm_hz(c.decay)).max(5.0 * bin_hz);
            PeakWindow::new(c.frequency - half, c.frequency + half)
        })
        .collect()
}

fn check_disjoint(windows: &[PeakWindow]) -> Result<()> {
    let mut sorted = windows.to_vec();
    sorted.sort_by(|a, b| a.lo_hz.total_cmp(&b.lo_hz));
    for pair in sorted.windows(2) {
        if pair[1].lo_hz <= pair[0].hi_hz {
            return Err(Error::InvalidInput(format!(
                "windows overlap: [{}, {}] and [{}, {}]",
                pair[0].lo_hz, pair[0].hi_hz, pair[1].lo_hz, pair[1].hi_hz
            )));
        }
    }
    Ok(())
}

fn window_bins(spectrum: &Spectrum, w: &PeakWindow) -> Vec<usize> {
    (0..spectrum.len()).filter(|&i| w.contains(spectrum.freqs()[i])).collect()
}

/// Pearson correlation of two equal-length series; `None` when either
/// side has zero variance.
fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma).powi(2);
        vb += (y - mb).powi(2);
    }
    if va == 0.0 || vb == 0.0 {
        return None;
    }
    // Guard against rounding pushing a perfect correlation past 1.
    Some((cov / (va.sqrt() * vb.sqrt())).clamp(-1.0, 1.0))
}

/// Per-window Pearson correlation between the magnitude bins of the
/// denoised and clean spectra. A zero-variance window yields `None`.
pub fn peak_correlation(
    denoised: &Spectrum,
    truth: &Spectrum,
    windows: &[PeakWindow],
) -> Result<Vec<Option<f64>>> {
    if denoised.len() != truth.len() {
        return Err(Error::InvalidInput(format!(
            "bin count mismatch: {} vs {}",
            denoised.len(),
            truth.len()
        )));
    }
    check_disjoint(windows)?;
    let dmag = denoised.magnitudes();
    let tmag = truth.magnitudes();
    windows
        .iter()
        .map(|w| {
            let bins = window_bins(truth, w);
            if bins.is_empty() {
                return Err(Error::InvalidInput(format!(
                    "window [{}, {}] contains no frequency bins",
                    w.lo_hz, w.hi_hz
                )));
            }
            let a: Vec<f64> = bins.iter().map(|&i| dmag[i]).collect();
            let b: Vec<f64> = bins.iter().map(|&i| tmag[i]).collect();
            Ok(pearson(&a, &b))
        })
        .collect()
}

/// Peak intensity per window: the maximum magnitude bin.
pub fn peak_heights(spectrum: &Spectrum, windows: &[PeakWindow]) -> Result<Vec<f64>> {
    check_disjoint(windows)?;
    let mag = spectrum.magnitudes();
    windows
        .iter()
        .map(|w| {
            let bins = window_bins(spectrum, w);
            if bins.is_empty() {
                return Err(Error::InvalidInput(format!(
                    "window [{}, {}] contains no frequency bins",
                    w.lo_hz, w.hi_hz
                )));
            }
            Ok(bins.into_iter().map(|i| mag[i]).fold(0.0f64, f64::max))
        })
        .collect()
}
