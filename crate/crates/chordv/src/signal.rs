//! Time-domain FID model: damped complex exponentials, noise injection and
//! the NRMSE error metric.
//!
//! A signal of length `N` sampled every `dt` seconds is modelled as
//!
//! ```text
//! x[n] = sum_r  c_r * exp((i*2*pi*f_r - tau_r) * n * dt),   n = 0..N-1
//! ```
//!
//! where each term is one spectral peak with amplitude `c_r`, centre
//! frequency `f_r` (Hz) and decay factor `tau_r` (1/s). The complex pole of
//! a peak is `z_r = exp((i*2*pi*f_r - tau_r) * dt)`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// A finite complex time-domain signal with its sampling interval.
///
/// Invariants enforced at construction: at least two samples, `dt > 0`,
/// all samples finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Fid {
    samples: Vec<Complex64>,
    dt: f64,
}

impl Fid {
    pub fn new(samples: Vec<Complex64>, dt: f64) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::invalid(format!(
                "a signal needs at least 2 samples, got {}",
                samples.len()
            )));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::invalid(format!("sampling interval must be positive, got {dt}")));
        }
        if let Some(n) = samples.iter().position(|s| !s.re.is_finite() || !s.im.is_finite()) {
            return Err(Error::invalid(format!("non-finite sample at index {n}")));
        }
        Ok(Fid { samples, dt })
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires len >= 2
    }

    /// Euclidean norm over the complex samples.
    pub fn norm(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// One damped exponential: a single spectral peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialComponent {
    /// Peak amplitude `c_r`, nonnegative.
    pub amplitude: f64,
    /// Centre frequency `f_r` in Hz.
    pub frequency: f64,
    /// Decay factor `tau_r` in 1/s, nonnegative. Zero means undamped.
    pub decay: f64,
}

impl ExponentialComponent {
    pub fn new(amplitude: f64, frequency: f64, decay: f64) -> Result<Self> {
        let c = ExponentialComponent { amplitude, frequency, decay };
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<()> {
        if !self.amplitude.is_finite() || self.amplitude < 0.0 {
            return Err(Error::invalid(format!("amplitude must be finite and >= 0, got {}", self.amplitude)));
        }
        if !self.decay.is_finite() || self.decay < 0.0 {
            return Err(Error::invalid(format!("decay must be finite and >= 0, got {}", self.decay)));
        }
        if !self.frequency.is_finite() {
            return Err(Error::invalid("frequency must be finite"));
        }
        Ok(())
    }

    /// Complex pole `z = exp((i*2*pi*f - tau) * dt)` for a sampling interval.
    pub fn pole(&self, dt: f64) -> Complex64 {
        (Complex64::new(-self.decay, 2.0 * std::f64::consts::PI * self.frequency) * dt).exp()
    }
}

/// Full synthetic-signal description: components plus sampling geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub components: Vec<ExponentialComponent>,
    pub dt: f64,
    pub n_samples: usize,
}

impl ModelSpec {
    pub fn new(components: Vec<ExponentialComponent>, dt: f64, n_samples: usize) -> Result<Self> {
        let spec = ModelSpec { components, dt, n_samples };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::invalid("a model needs at least one component"));
        }
        if self.n_samples < 2 {
            return Err(Error::invalid("a model needs at least 2 samples"));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::invalid(format!("sampling interval must be positive, got {}", self.dt)));
        }
        let nyquist = 0.5 / self.dt;
        for (r, c) in self.components.iter().enumerate() {
            c.validate()?;
            if c.frequency.abs() >= nyquist {
                return Err(Error::invalid(format!(
                    "component {r} frequency {} Hz is aliased (|f| must stay below {nyquist} Hz)",
                    c.frequency
                )));
            }
        }
        // Distinct poles keep the Vandermonde factor full rank.
        let poles = self.poles();
        for i in 0..poles.len() {
            for j in (i + 1)..poles.len() {
                if (poles[i] - poles[j]).norm() == 0.0 {
                    return Err(Error::invalid(format!("components {i} and {j} share the same pole")));
                }
            }
        }
        // The low-rank regime: component count below the Hankel short side.
        let shape = crate::hankel::HankelShape::from_len(self.n_samples)?;
        if self.components.len() >= shape.min_dim() {
            return Err(Error::invalid(format!(
                "{} components do not fit a {}x{} Hankel embedding (need R < {})",
                self.components.len(),
                shape.p(),
                shape.q(),
                shape.min_dim()
            )));
        }
        Ok(())
    }

    /// Poles of all components for this model's sampling interval.
    pub fn poles(&self) -> Vec<Complex64> {
        self.components.iter().map(|c| c.pole(self.dt)).collect()
    }

    pub fn amplitudes(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.amplitude).collect()
    }
}

/// Additive complex Gaussian noise: real and imaginary parts are drawn
/// independently from `N(0, sigma^2)`.
///
/// The seed-to-stream mapping is fixed: a ChaCha12 generator is seeded with
/// `seed` via `seed_from_u64`, and sample `n` consumes the stream's standard
/// normal variates `2n` (real part) and `2n + 1` (imaginary part). The same
/// `(seed, N)` pair always reproduces the same noise vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::invalid(format!("sigma must be finite and >= 0, got {sigma}")));
        }
        Ok(NoiseSpec { sigma, seed })
    }
}

/// Evaluate the forward model: the noise-free sum of damped exponentials.
pub fn synthesize_fid(spec: &ModelSpec) -> Result<Fid> {
    spec.validate()?;
    let mut samples = vec![Complex64::new(0.0, 0.0); spec.n_samples];
    for c in &spec.components {
        let rate = Complex64::new(-c.decay, 2.0 * std::f64::consts::PI * c.frequency);
        for (n, s) in samples.iter_mut().enumerate() {
            *s += c.amplitude * (rate * (n as f64 * spec.dt)).exp();
        }
    }
    Fid::new(samples, spec.dt)
}

/// Add seeded complex Gaussian noise to a signal. See [`NoiseSpec`] for the
/// exact stream contract.
pub fn add_noise(x: &Fid, noise: &NoiseSpec) -> Result<Fid> {
    NoiseSpec::new(noise.sigma, noise.seed)?;
    let mut rng = ChaCha12Rng::seed_from_u64(noise.seed);
    let samples = x
        .samples()
        .iter()
        .map(|&s| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            s + noise.sigma * Complex64::new(re, im)
        })
        .collect();
    Fid::new(samples, x.dt())
}

/// Normalized root-mean-square error `||denoised - truth||_2 / ||truth||_2`
/// over the complex time-domain samples.
pub fn nrmse(denoised: &Fid, truth: &Fid) -> Result<f64> {
    if denoised.len() != truth.len() {
        return Err(Error::invalid(format!(
            "length mismatch: {} vs {}",
            denoised.len(),
            truth.len()
        )));
    }
    let denom = truth.norm();
    if denom == 0.0 {
        return Err(Error::invalid("reference signal has zero norm"));
    }
    let err = denoised
        .samples()
        .iter()
        .zip(truth.samples())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok(err / denom)
}

/// The committed five-peak reference model used throughout the benchmark
/// suite: N = 256 samples at dt = 1 ms, amplitudes spanning an order of
/// magnitude so the leftmost peak is genuinely low-intensity, and peak
/// separations much larger than the linewidths.
///
/// Leftmost-to-rightmost in frequency: (amplitude, frequency Hz, decay 1/s).
pub fn reference_5peak() -> ModelSpec {
    let components = vec![
        ExponentialComponent { amplitude: 0.10, frequency: -150.0, decay: 20.0 },
        ExponentialComponent { amplitude: 0.30, frequency: -60.0, decay: 25.0 },
        ExponentialComponent { amplitude: 1.00, frequency: 30.0, decay: 15.0 },
        ExponentialComponent { amplitude: 0.85, frequency: 120.0, decay: 30.0 },
        ExponentialComponent { amplitude: 0.70, frequency: 210.0, decay: 22.0 },
    ];
    ModelSpec { components, dt: 1e-3, n_samples: 256 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constant_exponential_is_all_ones() {
        let spec = ModelSpec::new(
            vec![ExponentialComponent::new(1.0, 0.0, 0.0).unwrap()],
            1.0,
            4,
        )
        .unwrap();
        let fid = synthesize_fid(&spec).unwrap();
        for s in fid.samples() {
            assert_relative_eq!(s.re, 1.0, max_relative = 1e-15);
            assert_relative_eq!(s.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn pure_decay_halves_each_sample() {
        // tau = ln 2 with dt = 1 gives z = 1/2.
        let spec = ModelSpec::new(
            vec![ExponentialComponent::new(1.0, 0.0, std::f64::consts::LN_2).unwrap()],
            1.0,
            4,
        )
        .unwrap();
        let fid = synthesize_fid(&spec).unwrap();
        let expected = [1.0, 0.5, 0.25, 0.125];
        for (s, e) in fid.samples().iter().zip(expected) {
            assert_relative_eq!(s.re, e, max_relative = 1e-12);
            assert_relative_eq!(s.im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn synthesis_is_linear_in_components() {
        let all = reference_5peak();
        let (a, b) = {
            let mut a = all.clone();
            let mut b = all.clone();
            a.components = all.components[..2].to_vec();
            b.components = all.components[2..].to_vec();
            (a, b)
        };
        let whole = synthesize_fid(&all).unwrap();
        let fa = synthesize_fid(&a).unwrap();
        let fb = synthesize_fid(&b).unwrap();
        for ((w, x), y) in whole.samples().iter().zip(fa.samples()).zip(fb.samples()) {
            let sum = x + y;
            assert_relative_eq!(w.re, sum.re, max_relative = 1e-12, epsilon = 1e-14);
            assert_relative_eq!(w.im, sum.im, max_relative = 1e-12, epsilon = 1e-14);
        }
    }

    #[test]
    fn aliased_frequency_is_rejected() {
        let spec = ModelSpec {
            components: vec![ExponentialComponent { amplitude: 1.0, frequency: 600.0, decay: 1.0 }],
            dt: 1e-3,
            n_samples: 16,
        };
        assert!(matches!(synthesize_fid(&spec), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn duplicate_poles_are_rejected() {
        let c = ExponentialComponent { amplitude: 1.0, frequency: 10.0, decay: 2.0 };
        let spec = ModelSpec { components: vec![c, c], dt: 1e-3, n_samples: 16 };
        assert!(matches!(synthesize_fid(&spec), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn zero_noise_is_identity() {
        let x = synthesize_fid(&reference_5peak()).unwrap();
        let y = add_noise(&x, &NoiseSpec { sigma: 0.0, seed: 9 }).unwrap();
        assert_eq!(x.samples(), y.samples());
    }

    #[test]
    fn noise_is_deterministic_per_seed() {
        let x = synthesize_fid(&reference_5peak()).unwrap();
        let spec = NoiseSpec { sigma: 0.05, seed: 1234 };
        let y1 = add_noise(&x, &spec).unwrap();
        let y2 = add_noise(&x, &spec).unwrap();
        assert_eq!(y1.samples(), y2.samples());
        let y3 = add_noise(&x, &NoiseSpec { sigma: 0.05, seed: 1235 }).unwrap();
        assert_ne!(y1.samples(), y3.samples());
    }

    #[test]
    fn noise_variance_matches_sigma() {
        // Monte-Carlo moment check: sample variance of the real part of the
        // injected noise should sit within 5% of sigma^2 for N = 4096.
        let n = 4096;
        let x = Fid::new(vec![c(0.0, 0.0); n], 1.0).unwrap();
        let y = add_noise(&x, &NoiseSpec { sigma: 0.05, seed: 77 }).unwrap();
        let mean = y.samples().iter().map(|s| s.re).sum::<f64>() / n as f64;
        let var = y.samples().iter().map(|s| (s.re - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((var - 0.0025).abs() < 0.05 * 0.0025, "sample variance {var}");
    }

    #[test]
    fn noise_mean_is_centred() {
        // 10^4 draws of the first noise sample across seeds; the empirical
        // mean should be within 4 standard errors of zero.
        let m = 10_000;
        let sigma = 0.3;
        let x = Fid::new(vec![c(0.0, 0.0); 2], 1.0).unwrap();
        let mut sum_re = 0.0;
        let mut sum_im = 0.0;
        for seed in 0..m {
            let y = add_noise(&x, &NoiseSpec { sigma, seed }).unwrap();
            sum_re += y.samples()[0].re;
            sum_im += y.samples()[0].im;
        }
        let bound = 4.0 * sigma / (m as f64).sqrt();
        assert!((sum_re / m as f64).abs() < bound);
        assert!((sum_im / m as f64).abs() < bound);
    }

    #[test]
    fn nrmse_basic_values() {
        let truth = synthesize_fid(&reference_5peak()).unwrap();
        assert_eq!(nrmse(&truth, &truth).unwrap(), 0.0);

        let zero = Fid::new(vec![c(0.0, 0.0); truth.len()], truth.dt()).unwrap();
        assert_relative_eq!(nrmse(&zero, &truth).unwrap(), 1.0, max_relative = 1e-15);

        // A perturbation of norm 0.1 * ||truth|| gives NRMSE 0.1 exactly.
        let scale = 0.1 * truth.norm() / (truth.len() as f64).sqrt();
        let perturbed: Vec<Complex64> = truth.samples().iter().map(|s| s + c(scale, 0.0)).collect();
        let perturbed = Fid::new(perturbed, truth.dt()).unwrap();
        assert_relative_eq!(nrmse(&perturbed, &truth).unwrap(), 0.1, max_relative = 1e-12);
    }

    #[test]
    fn nrmse_is_scale_consistent() {
        let truth = synthesize_fid(&reference_5peak()).unwrap();
        let noisy = add_noise(&truth, &NoiseSpec { sigma: 0.05, seed: 3 }).unwrap();
        let alpha = -2.75;
        let scale = |f: &Fid| {
            Fid::new(f.samples().iter().map(|s| alpha * s).collect(), f.dt()).unwrap()
        };
        let base = nrmse(&noisy, &truth).unwrap();
        let scaled = nrmse(&scale(&noisy), &scale(&truth)).unwrap();
        assert_relative_eq!(base, scaled, max_relative = 1e-12);
    }

    #[test]
    fn nrmse_rejects_zero_reference() {
        let z = Fid::new(vec![c(0.0, 0.0); 4], 1.0).unwrap();
        assert!(nrmse(&z, &z).is_err());
    }
}
