//! Sampled signals on a uniform time grid and their spectra.
//!
//! The discrete Fourier transform is scaled so that it realizes the
//! continuous transform as a Riemann sum: `spectrum[j] ~ f_hat(xi_j)` with
//! `xi_j = j / (N dt)` read as a signed frequency, and the time/frequency
//! inner products agree exactly (discrete Plancherel).

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SignalError {
    #[error("signal needs at least 2 samples, got {0}")]
    TooShort(usize),
    #[error("sample interval must be positive and finite, got {0}")]
    BadSampleInterval(f64),
}

/// Finite complex signal with a fixed sampling step (time units).
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    pub samples: Vec<Complex64>,
    pub sample_interval: f64,
}

impl SampledSignal {
    pub fn new(samples: Vec<Complex64>, sample_interval: f64) -> Result<Self, SignalError> {
        if samples.len() < 2 {
            return Err(SignalError::TooShort(samples.len()));
        }
        if !(sample_interval > 0.0 && sample_interval.is_finite()) {
            return Err(SignalError::BadSampleInterval(sample_interval));
        }
        Ok(SampledSignal { samples, sample_interval })
    }

    pub fn zeros(len: usize, sample_interval: f64) -> Result<Self, SignalError> {
        Self::new(vec![Complex64::new(0.0, 0.0); len], sample_interval)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Total duration `N dt`.
    pub fn duration(&self) -> f64 {
        self.len() as f64 * self.sample_interval
    }

    /// Plancherel-consistent energy `dt * sum |f|^2`.
    pub fn norm_sq(&self) -> f64 {
        self.sample_interval * self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>()
    }

    /// `<f, g> = dt * sum f conj(g)`.
    pub fn inner(&self, other: &SampledSignal) -> Complex64 {
        let s: Complex64 = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a * b.conj())
            .sum();
        s * self.sample_interval
    }

    /// Continuous-transform spectrum samples in DFT bin order:
    /// `f_hat(xi_j) = dt * DFT(f)_j`.
    pub fn spectrum(&self) -> Spectrum {
        let mut buf = self.samples.clone();
        FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
        let dt = self.sample_interval;
        for v in &mut buf {
            *v *= dt;
        }
        Spectrum { values: buf, sample_interval: dt }
    }
}

/// Spectrum of a [`SampledSignal`] in DFT bin order with the signed
/// frequency interpretation.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub values: Vec<Complex64>,
    pub sample_interval: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Frequency spacing `1 / (N dt)`.
    pub fn freq_step(&self) -> f64 {
        1.0 / (self.len() as f64 * self.sample_interval)
    }

    /// Signed frequency of bin `j`: bins past `N/2` wrap to the negative
    /// side.
    pub fn frequency(&self, j: usize) -> f64 {
        let n = self.len();
        let signed = if j <= (n - 1) / 2 { j as isize } else { j as isize - n as isize };
        signed as f64 * self.freq_step()
    }

    /// `||f_hat||^2 = dxi * sum |f_hat|^2`; equals the signal energy.
    pub fn norm_sq(&self) -> f64 {
        self.freq_step() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    /// Back to the time grid: `f_m = dxi * sum f_hat(xi_j) e^{2 pi i j m / N}`.
    pub fn signal(&self) -> SampledSignal {
        let mut buf = self.values.clone();
        FftPlanner::new().plan_fft_inverse(buf.len()).process(&mut buf);
        let scale = 1.0 / (buf.len() as f64 * self.sample_interval);
        for v in &mut buf {
            *v *= scale;
        }
        SampledSignal { samples: buf, sample_interval: self.sample_interval }
    }
}
