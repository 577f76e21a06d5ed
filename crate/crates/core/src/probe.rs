//! Seeded band-limited probe signals for empirical certification.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;

use crate::signal::{SampledSignal, Spectrum};
use crate::system::EmpiricalWaveletSystem;

/// Random complex signal whose spectrum is supported on the given
/// half-open frequency intervals of its own DFT grid.
pub fn random_bandlimited(
    len: usize,
    sample_interval: f64,
    intervals: &[(f64, f64)],
    rng: &mut impl Rng,
) -> SampledSignal {
    let mut spec = Spectrum {
        values: vec![Complex64::new(0.0, 0.0); len],
        sample_interval,
    };
    for j in 0..len {
        let xi = spec.frequency(j);
        if intervals.iter().any(|&(lo, hi)| xi >= lo && xi < hi) {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            spec.values[j] = Complex64::new(re, im);
        }
    }
    spec.signal()
}

/// Deterministic probes spectrally contained in the system's gamma
/// region; a fixed seed reproduces the probes bit for bit.
pub fn seeded_gamma_probes(
    system: &EmpiricalWaveletSystem,
    len: usize,
    sample_interval: f64,
    count: usize,
    seed: u64,
) -> Vec<SampledSignal> {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| random_bandlimited(len, sample_interval, &system.gamma.intervals, &mut rng))
        .collect()
}
