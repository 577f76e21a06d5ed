//! Empirical wavelet systems: per-band atoms, filters, transforms, and
//! reconstruction.
//!
//! Each band carries `(omega_n, a_n, b_n)`; its filter is
//! `psi_hat_n(xi) = |a_n|^{-1/2} psi_hat((xi - omega_n) / a_n)` and the
//! translated family is `psi_hat_{n,b} = e^{-2 pi i b xi} psi_hat_n`. The
//! forward transform per band is the inverse DFT of
//! `f_hat * conj(psi_hat_n)`; synthesis is its exact adjoint under the
//! grid inner products.

use num_rational::Ratio;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use thiserror::Error;

use crate::partition::{compute_centers, gamma_region, GammaRegion, Partition};
use crate::signal::{SampledSignal, Spectrum};
use crate::wavelet::{MotherWavelet, RaySide, WaveletError};

/// Relative tolerance for deciding that `b_n` sits on the sample grid.
pub const SHIFT_SNAP_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum SystemError {
    #[error(transparent)]
    Wavelet(#[from] WaveletError),
    #[error(transparent)]
    Partition(#[from] crate::partition::PartitionError),
    #[error("band {0} is excluded and carries no filter or coefficients")]
    ExcludedBand(i32),
    #[error("every band of the system is excluded")]
    EmptySystem,
    #[error("explicit shift list has {got} entries for {expected} supports")]
    ShiftListMismatch { expected: usize, got: usize },
    #[error("shift step {shift} of band {band} is not a multiple of the sample interval {dt}")]
    IncommensurateShiftStep { band: i32, shift: f64, dt: f64 },
    #[error("coefficient set does not match the system: {0}")]
    SystemMismatch(String),
    #[error("shift step must be positive and finite, got {0}")]
    BadShiftStep(f64),
}

/// How to pick the translation steps `b_n`.
#[derive(Debug, Clone, PartialEq)]
pub enum ShiftRule {
    /// `b_n = 1 / |S_n|` for compact profiles; for non-compact profiles
    /// `b_n = 1 / (|a_n| (|E| + 2r))` with enlargement margin `r`
    /// (default `|E| / 2`).
    ReciprocalSupport { margin: Option<f64> },
    /// One step per support, positionally matched.
    Explicit(Vec<f64>),
    /// Exact rational steps; enables exact lattice arithmetic downstream.
    ExplicitRational(Vec<Ratio<i64>>),
}

impl Default for ShiftRule {
    fn default() -> Self {
        ShiftRule::ReciprocalSupport { margin: None }
    }
}

/// Options for [`build_system`].
#[derive(Debug, Clone, PartialEq)]
pub struct SystemOptions {
    pub shift_rule: ShiftRule,
    /// Overlap multiplier `gamma >= 1` for compact profiles:
    /// `|S_n| = gamma |Omega_n|`.
    pub overlap: f64,
}

impl Default for SystemOptions {
    fn default() -> Self {
        SystemOptions { shift_rule: ShiftRule::default(), overlap: 1.0 }
    }
}

/// Scale and shift data of a non-excluded band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomParams {
    /// `a_n`, nonzero; negative only on ray bands.
    pub scale: f64,
    /// `b_n > 0`.
    pub shift_step: f64,
    /// Exact form of `b_n` when the shift rule provided one.
    pub shift_rational: Option<Ratio<i64>>,
}

/// One band of the system. `params == None` marks a band excluded because
/// a compactly supported profile cannot cover its ray.
#[derive(Debug, Clone, PartialEq)]
pub struct BandAtom {
    /// Band index `n` in the partition's indexing set.
    pub index: i32,
    /// Support center `omega_n`.
    pub center: f64,
    pub params: Option<AtomParams>,
}

impl BandAtom {
    pub fn excluded(&self) -> bool {
        self.params.is_none()
    }
}

/// A built empirical wavelet system over a partition.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalWaveletSystem {
    pub partition: Partition,
    pub wavelet: MotherWavelet,
    /// Parallel to `partition.supports`.
    pub atoms: Vec<BandAtom>,
    /// Frequency region the system targets after ray exclusion.
    pub gamma: GammaRegion,
}

/// Assemble atoms from a partition, a mother wavelet, and a shift rule.
///
/// Ray bands are excluded exactly when the profile support is compact;
/// otherwise their scale follows the ray sign cases.
pub fn build_system(
    partition: &Partition,
    wavelet: &MotherWavelet,
    options: &SystemOptions,
) -> Result<EmpiricalWaveletSystem, SystemError> {
    let partition = if partition.centers.is_some() {
        partition.clone()
    } else {
        compute_centers(partition)?
    };
    let centers = partition.centers.clone().unwrap();

    if let ShiftRule::Explicit(list) = &options.shift_rule {
        if list.len() != partition.supports.len() {
            return Err(SystemError::ShiftListMismatch {
                expected: partition.supports.len(),
                got: list.len(),
            });
        }
    }
    if let ShiftRule::ExplicitRational(list) = &options.shift_rule {
        if list.len() != partition.supports.len() {
            return Err(SystemError::ShiftListMismatch {
                expected: partition.supports.len(),
                got: list.len(),
            });
        }
    }

    let mut atoms = Vec::with_capacity(partition.supports.len());
    for (i, support) in partition.supports.iter().enumerate() {
        let center = centers[i];
        let scale = if support.is_ray() {
            if wavelet.support.is_compact() {
                atoms.push(BandAtom { index: support.index, center, params: None });
                continue;
            }
            let (side, boundary) = match (support.lo, support.hi) {
                (None, Some(hi)) => (RaySide::Left, hi),
                (Some(lo), None) => (RaySide::Right, lo),
                _ => unreachable!("ray support has one finite edge"),
            };
            wavelet.scale_factor_ray(side, boundary, center)?.0
        } else {
            let len = support.length().unwrap();
            if wavelet.support.is_compact() {
                wavelet.scale_factor_compact(len, options.overlap)?.0
            } else {
                wavelet.scale_factor_essential(len)?.0
            }
        };

        let (shift_step, shift_rational) = match &options.shift_rule {
            ShiftRule::ReciprocalSupport { margin } => {
                let b = if let Some(s_len) = wavelet.support.length() {
                    1.0 / (scale.abs() * s_len)
                } else {
                    let ess = wavelet
                        .essential
                        .ok_or(WaveletError::MissingEssentialSupport)?;
                    let r = margin.unwrap_or(ess.width() / 2.0);
                    1.0 / (scale.abs() * (ess.width() + 2.0 * r))
                };
                (b, None)
            }
            ShiftRule::Explicit(list) => (list[i], None),
            ShiftRule::ExplicitRational(list) => {
                let r = list[i];
                (*r.numer() as f64 / *r.denom() as f64, Some(r))
            }
        };
        if !(shift_step > 0.0 && shift_step.is_finite()) {
            return Err(SystemError::BadShiftStep(shift_step));
        }

        atoms.push(BandAtom {
            index: support.index,
            center,
            params: Some(AtomParams { scale, shift_step, shift_rational }),
        });
    }

    if atoms.iter().all(|a| a.excluded()) {
        return Err(SystemError::EmptySystem);
    }

    let gamma = gamma_region(&partition);
    Ok(EmpiricalWaveletSystem { partition, wavelet: wavelet.clone(), atoms, gamma })
}

impl EmpiricalWaveletSystem {
    /// Position of band `n` among the supports.
    pub fn position_of(&self, index: i32) -> Option<usize> {
        self.atoms.iter().position(|a| a.index == index)
    }

    /// Non-excluded atoms with their positions.
    pub fn active(&self) -> impl Iterator<Item = (usize, &BandAtom, &AtomParams)> {
        self.atoms
            .iter()
            .enumerate()
            .filter_map(|(i, a)| a.params.as_ref().map(|p| (i, a, p)))
    }

    /// `psi_hat_n(xi)` for one active band.
    pub fn filter_value(&self, atom: &BandAtom, params: &AtomParams, xi: f64) -> Complex64 {
        let arg = (xi - atom.center) / params.scale;
        self.wavelet.eval(arg) / params.scale.abs().sqrt()
    }

    /// Sample `psi_hat_n` on a frequency grid.
    pub fn filter_spectrum(&self, band: usize, freqs: &[f64]) -> Result<Vec<Complex64>, SystemError> {
        let atom = &self.atoms[band];
        let params = atom.params.as_ref().ok_or(SystemError::ExcludedBand(atom.index))?;
        Ok(freqs.iter().map(|&xi| self.filter_value(atom, params, xi)).collect())
    }

    /// Spectral projection onto the gamma region: zero every bin whose
    /// frequency falls outside the surviving supports.
    pub fn project_gamma(&self, f: &SampledSignal) -> SampledSignal {
        let mut spec = f.spectrum();
        for j in 0..spec.len() {
            if !self.gamma.contains(spec.frequency(j)) {
                spec.values[j] = Complex64::new(0.0, 0.0);
            }
        }
        spec.signal()
    }
}

/// Coefficient layout: every grid position, or subsampled at `k b_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoeffMode {
    ContinuousGrid,
    Discrete,
}

/// Coefficients of one band.
#[derive(Debug, Clone, PartialEq)]
pub struct BandCoefficients {
    pub index: i32,
    /// Spacing between consecutive stored coefficients (time units).
    pub shift_step: f64,
    pub values: Vec<Complex64>,
}

/// Transform output; excluded bands are absent, never zero-filled.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    pub mode: CoeffMode,
    pub bands: Vec<BandCoefficients>,
    pub signal_len: usize,
    pub sample_interval: f64,
}

impl CoefficientSet {
    /// `sum_n sum_k |c_{n,k}|^2`.
    pub fn energy(&self) -> f64 {
        self.bands
            .iter()
            .map(|b| b.values.iter().map(|c| c.norm_sqr()).sum::<f64>())
            .sum()
    }
}

fn band_correlation(system: &EmpiricalWaveletSystem, spec: &Spectrum, band: usize) -> Vec<Complex64> {
    let atom = &system.atoms[band];
    let params = atom.params.as_ref().expect("active band");
    let n = spec.len();
    let mut buf: Vec<Complex64> = (0..n)
        .map(|j| spec.values[j] * system.filter_value(atom, params, spec.frequency(j)).conj())
        .collect();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / (n as f64 * spec.sample_interval);
    for v in &mut buf {
        *v *= scale;
    }
    buf
}

/// Continuous transform on the signal grid: for every active band,
/// coefficients at each grid shift `b = m dt`, computed as the inverse DFT
/// of `f_hat * conj(psi_hat_n)`.
pub fn cewt_forward(
    f: &SampledSignal,
    system: &EmpiricalWaveletSystem,
) -> Result<CoefficientSet, SystemError> {
    let spec = f.spectrum();
    let mut bands = Vec::new();
    for (pos, atom, _) in system.active() {
        bands.push(BandCoefficients {
            index: atom.index,
            shift_step: f.sample_interval,
            values: band_correlation(system, &spec, pos),
        });
    }
    Ok(CoefficientSet {
        mode: CoeffMode::ContinuousGrid,
        bands,
        signal_len: f.len(),
        sample_interval: f.sample_interval,
    })
}

/// Number of sample steps per shift, or an error when `b_n` is off-grid.
fn steps_per_shift(atom: &BandAtom, params: &AtomParams, dt: f64) -> Result<usize, SystemError> {
    let ratio = params.shift_step / dt;
    let p = ratio.round();
    if p < 1.0 || (ratio - p).abs() > SHIFT_SNAP_TOL * ratio.abs().max(1.0) {
        return Err(SystemError::IncommensurateShiftStep {
            band: atom.index,
            shift: params.shift_step,
            dt,
        });
    }
    Ok(p as usize)
}

/// Discrete transform: subsample the continuous coefficients at
/// `b = k b_n` over the shifts covering the signal duration.
pub fn dewt_forward(
    f: &SampledSignal,
    system: &EmpiricalWaveletSystem,
) -> Result<CoefficientSet, SystemError> {
    // validate all steps before doing any FFT work
    let mut steps = Vec::new();
    for (pos, atom, params) in system.active() {
        steps.push((pos, steps_per_shift(atom, params, f.sample_interval)?));
    }
    let spec = f.spectrum();
    let mut bands = Vec::new();
    for (pos, p) in steps {
        let atom = &system.atoms[pos];
        let params = atom.params.as_ref().unwrap();
        let full = band_correlation(system, &spec, pos);
        let values: Vec<Complex64> = full.iter().step_by(p).copied().collect();
        bands.push(BandCoefficients { index: atom.index, shift_step: params.shift_step, values });
    }
    Ok(CoefficientSet {
        mode: CoeffMode::Discrete,
        bands,
        signal_len: f.len(),
        sample_interval: f.sample_interval,
    })
}

fn check_match(
    coeffs: &CoefficientSet,
    system: &EmpiricalWaveletSystem,
) -> Result<Vec<(usize, usize)>, SystemError> {
    if coeffs.mode != CoeffMode::Discrete {
        return Err(SystemError::SystemMismatch(
            "synthesis expects discrete-mode coefficients".into(),
        ));
    }
    let active: Vec<usize> = system.active().map(|(pos, _, _)| pos).collect();
    if active.len() != coeffs.bands.len() {
        return Err(SystemError::SystemMismatch(format!(
            "system has {} active bands, coefficient set has {}",
            active.len(),
            coeffs.bands.len()
        )));
    }
    let mut layout = Vec::new();
    for (&pos, band) in active.iter().zip(&coeffs.bands) {
        let atom = &system.atoms[pos];
        let params = atom.params.as_ref().unwrap();
        if band.index != atom.index {
            return Err(SystemError::SystemMismatch(format!(
                "band index {} does not match atom {}",
                band.index, atom.index
            )));
        }
        let rel = (band.shift_step - params.shift_step).abs() / params.shift_step.max(1e-300);
        if rel > 1e-9 {
            return Err(SystemError::SystemMismatch(format!(
                "band {} shift step {} differs from system value {}",
                band.index, band.shift_step, params.shift_step
            )));
        }
        let p = steps_per_shift(atom, params, coeffs.sample_interval)?;
        let max_k = coeffs.signal_len.div_ceil(p);
        if band.values.len() > max_k {
            return Err(SystemError::SystemMismatch(format!(
                "band {} stores {} shifts but the grid admits {}",
                band.index,
                band.values.len(),
                max_k
            )));
        }
        layout.push((pos, p));
    }
    Ok(layout)
}

/// Synthesis `sum_n sum_k c_{n,k} psi_{n,k}` on the signal grid, realized
/// per band as zero-upsampling of the coefficients, an FFT, and a spectral
/// multiply. This is the exact adjoint of [`dewt_forward`] with respect to
/// the grid inner products.
pub fn synthesize(
    coeffs: &CoefficientSet,
    system: &EmpiricalWaveletSystem,
) -> Result<SampledSignal, SystemError> {
    let layout = check_match(coeffs, system)?;
    let n = coeffs.signal_len;
    let dt = coeffs.sample_interval;
    let step = 1.0 / (n as f64 * dt);
    let freqs: Vec<f64> = (0..n)
        .map(|j| if j <= (n - 1) / 2 { j as f64 } else { j as f64 - n as f64 } * step)
        .collect();
    let mut acc = vec![Complex64::new(0.0, 0.0); n];
    let planner_fft = FftPlanner::new().plan_fft_forward(n);
    for ((pos, p), band) in layout.into_iter().zip(&coeffs.bands) {
        let atom = &system.atoms[pos];
        let params = atom.params.as_ref().unwrap();
        let mut up = vec![Complex64::new(0.0, 0.0); n];
        for (k, &c) in band.values.iter().enumerate() {
            up[k * p] = c;
        }
        planner_fft.process(&mut up);
        for (j, u) in up.iter().enumerate() {
            acc[j] += system.filter_value(atom, params, freqs[j]) * u;
        }
    }
    Ok(Spectrum { values: acc, sample_interval: dt }.signal())
}

/// Frame operator `S f = synthesize(dewt_forward(f))`; self-adjoint and
/// positive semidefinite on the grid.
pub fn frame_operator_apply(
    f: &SampledSignal,
    system: &EmpiricalWaveletSystem,
) -> Result<SampledSignal, SystemError> {
    synthesize(&dewt_forward(f, system)?, system)
}

/// Outcome of the iterative inversion; when `converged` is false the
/// signal is the best iterate reached.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub signal: SampledSignal,
    pub relative_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Set when conjugate gradients hit non-positive curvature, meaning
    /// the lower frame bound cannot be positive on this subspace.
    pub non_positive_lower_bound: bool,
}

/// Solve `S g = synthesize(coeffs)` by conjugate gradients on the
/// gamma-projected subspace, where the frame operator is positive
/// definite once the lower frame bound is positive. Parseval systems
/// converge on the first iteration.
pub fn reconstruct(
    coeffs: &CoefficientSet,
    system: &EmpiricalWaveletSystem,
    max_iter: usize,
    tol: f64,
) -> Result<Reconstruction, SystemError> {
    let rhs_raw = synthesize(coeffs, system)?;
    let rhs = system.project_gamma(&rhs_raw);
    let dt = rhs.sample_interval;
    let n = rhs.len();

    let apply = |x: &[Complex64]| -> Result<Vec<Complex64>, SystemError> {
        let sig = SampledSignal { samples: x.to_vec(), sample_interval: dt };
        let projected_in = system.project_gamma(&sig);
        let out = frame_operator_apply(&projected_in, system)?;
        Ok(system.project_gamma(&out).samples)
    };
    let dot = |a: &[Complex64], b: &[Complex64]| -> f64 {
        a.iter().zip(b).map(|(x, y)| (x * y.conj()).re).sum()
    };

    let b = rhs.samples.clone();
    let b_norm = dot(&b, &b).sqrt();
    if b_norm == 0.0 {
        return Ok(Reconstruction {
            signal: SampledSignal { samples: vec![Complex64::new(0.0, 0.0); n], sample_interval: dt },
            relative_residual: 0.0,
            iterations: 0,
            converged: true,
            non_positive_lower_bound: false,
        });
    }

    let mut x = vec![Complex64::new(0.0, 0.0); n];
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rho = dot(&r, &r);
    let mut iterations = 0;
    let mut best = (x.clone(), rho.sqrt() / b_norm);
    let mut indefinite = false;

    while iterations < max_iter {
        let res = rho.sqrt() / b_norm;
        if res < best.1 {
            best = (x.clone(), res);
        }
        if res <= tol {
            return Ok(Reconstruction {
                signal: SampledSignal { samples: x, sample_interval: dt },
                relative_residual: res,
                iterations,
                converged: true,
                non_positive_lower_bound: false,
            });
        }
        let ap = apply(&p)?;
        let denom = dot(&p, &ap);
        if denom <= 0.0 {
            indefinite = true;
            break;
        }
        let alpha = rho / denom;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rho_next = dot(&r, &r);
        let beta = rho_next / rho;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rho = rho_next;
        iterations += 1;
    }
    let res = rho.sqrt() / b_norm;
    if res < best.1 {
        best = (x, res);
    }
    Ok(Reconstruction {
        signal: SampledSignal { samples: best.0, sample_interval: dt },
        relative_residual: best.1,
        iterations,
        converged: best.1 <= tol,
        non_positive_lower_bound: indefinite,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{build_partition, BoundarySet, GammaLabel};
    use crate::wavelet::MotherWavelet;
    use approx::assert_relative_eq;

    fn unit_partition(half_extent: i32) -> Partition {
        let pts: Vec<f64> = (-half_extent..=half_extent).map(f64::from).collect();
        build_partition(&BoundarySet::standard(pts, false, false).unwrap()).unwrap()
    }

    fn shannon_unit_system(half_extent: i32) -> EmpiricalWaveletSystem {
        build_system(&unit_partition(half_extent), &MotherWavelet::shannon(), &SystemOptions::default())
            .unwrap()
    }

    fn both_rays_partition() -> Partition {
        build_partition(&BoundarySet::standard(vec![-2.0, 0.0, 2.0], true, true).unwrap()).unwrap()
    }

    /// 64-sample grid whose bins line up with integer band boundaries.
    fn test_signal(seedish: u64) -> SampledSignal {
        let n = 64;
        let dt = 1.0 / 16.0;
        let samples: Vec<Complex64> = (0..n)
            .map(|m| {
                let x = (m as u64).wrapping_mul(6364136223846793005).wrapping_add(seedish);
                let a = ((x >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
                let b = ((x.wrapping_mul(2862933555777941757) >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
                Complex64::new(a, b)
            })
            .collect();
        SampledSignal::new(samples, dt).unwrap()
    }

    #[test]
    fn canonical_shannon_atoms() {
        let sys = shannon_unit_system(8);
        assert_eq!(sys.atoms.len(), 16);
        for (_, _, params) in sys.active() {
            assert_eq!(params.scale, 1.0);
            assert_eq!(params.shift_step, 1.0);
        }
        assert_eq!(sys.atoms.iter().filter(|a| a.excluded()).count(), 0);
        assert_eq!(sys.gamma.label, GammaLabel::Full);
    }

    #[test]
    fn shannon_on_rays_excludes_and_targets_gamma_c() {
        let sys =
            build_system(&both_rays_partition(), &MotherWavelet::shannon(), &SystemOptions::default())
                .unwrap();
        assert_eq!(sys.atoms.len(), 4);
        assert!(sys.atoms[0].excluded() && sys.atoms[3].excluded());
        assert!(!sys.atoms[1].excluded() && !sys.atoms[2].excluded());
        assert_eq!(sys.gamma.label, GammaLabel::C);
        assert_eq!(sys.gamma.intervals, vec![(-2.0, 0.0), (0.0, 2.0)]);
        assert!(matches!(sys.filter_spectrum(0, &[0.0]), Err(SystemError::ExcludedBand(_))));
    }

    #[test]
    fn gaussian_on_rays_keeps_all_bands() {
        let wavelet = MotherWavelet::gaussian().with_essential(0.01).unwrap();
        let sys = build_system(&both_rays_partition(), &wavelet, &SystemOptions::default()).unwrap();
        assert_eq!(sys.atoms.iter().filter(|a| a.excluded()).count(), 0);
        let e = wavelet.essential.unwrap().width();
        // rays symmetrize to the neighbor width, so every a_n = 2/|E|
        for (_, _, params) in sys.active() {
            assert_relative_eq!(params.scale, 2.0 / e, max_relative = 1e-12);
            assert_relative_eq!(params.shift_step, 0.25, max_relative = 1e-12);
        }
    }

    #[test]
    fn filter_values_match_definition() {
        // Shannon filter with a_n = 2 centered at 3
        let pts = vec![-2.0, 0.0, 2.0, 4.0];
        let p = build_partition(&BoundarySet::standard(pts, false, false).unwrap()).unwrap();
        let sys = build_system(&p, &MotherWavelet::shannon(), &SystemOptions::default()).unwrap();
        let band = sys.position_of(1).unwrap(); // support [2, 4], center 3
        let vals = sys.filter_spectrum(band, &[3.0, 4.1]).unwrap();
        assert_relative_eq!(vals[0].re, std::f64::consts::FRAC_1_SQRT_2, max_relative = 1e-15);
        assert_eq!(vals[1].norm(), 0.0);
        // identity atom reproduces the mother profile
        let g = MotherWavelet::gaussian().with_essential(0.01).unwrap();
        let p = build_partition(
            &BoundarySet::standard(vec![-0.726628, 0.0, 0.726628], false, false).unwrap(),
        )
        .unwrap();
        let sys = build_system(&p, &g, &SystemOptions::default()).unwrap();
        let pos = sys.position_of(0).unwrap();
        let a = sys.atoms[pos].params.unwrap().scale;
        let v = sys.filter_spectrum(pos, &[0.3]).unwrap()[0];
        let expected = g.eval((0.3 - 0.363314) / a) / a.abs().sqrt();
        assert_relative_eq!(v.re, expected.re, max_relative = 1e-12);
    }

    #[test]
    fn filter_peak_inside_band_closure() {
        let sys = shannon_unit_system(4);
        let freqs: Vec<f64> = (0..4096).map(|i| -4.0 + 8.0 * i as f64 / 4096.0).collect();
        for (pos, _, _) in sys.active() {
            let vals = sys.filter_spectrum(pos, &freqs).unwrap();
            let mut best = (0usize, 0.0f64);
            for (j, v) in vals.iter().enumerate() {
                if v.norm() > best.1 {
                    best = (j, v.norm());
                }
            }
            let s = sys.partition.supports[pos];
            let xi = freqs[best.0];
            assert!(xi >= s.lo.unwrap() - 1e-12 && xi <= s.hi.unwrap() + 1e-12);
        }
    }

    #[test]
    fn cewt_vanishes_off_band_and_peaks_on_self() {
        let sys = shannon_unit_system(8);
        // spectrum entirely inside band [2, 3)
        let proto = test_signal(7);
        let mut spec = proto.spectrum();
        for j in 0..spec.len() {
            let xi = spec.frequency(j);
            if !(2.0..3.0).contains(&xi) {
                spec.values[j] = Complex64::new(0.0, 0.0);
            }
        }
        let f = spec.signal();
        let coeffs = cewt_forward(&f, &sys).unwrap();
        for band in &coeffs.bands {
            let peak: f64 = band.values.iter().map(|c| c.norm()).fold(0.0, f64::max);
            if band.index == 2 {
                assert!(peak > 1e-6);
            } else {
                assert!(peak < 1e-12, "band {} leaked {peak}", band.index);
            }
        }

        // f = psi_j itself: c_j(0) = ||psi_j||^2
        let pos = sys.position_of(2).unwrap();
        let atom_spec: Vec<Complex64> = {
            let stub = proto.spectrum();
            let freqs: Vec<f64> = (0..stub.len()).map(|j| stub.frequency(j)).collect();
            sys.filter_spectrum(pos, &freqs).unwrap()
        };
        let atom = Spectrum { values: atom_spec, sample_interval: proto.sample_interval }.signal();
        let coeffs = cewt_forward(&atom, &sys).unwrap();
        let self_band = coeffs.bands.iter().find(|b| b.index == 2).unwrap();
        assert_relative_eq!(self_band.values[0].re, atom.norm_sq(), max_relative = 1e-10);
        assert!(self_band.values[0].im.abs() < 1e-12);

        // zero signal -> zero coefficients
        let zero = SampledSignal::zeros(64, 1.0 / 16.0).unwrap();
        let coeffs = cewt_forward(&zero, &sys).unwrap();
        assert_eq!(coeffs.energy(), 0.0);
    }

    #[test]
    fn dewt_subsamples_cewt() {
        let part = unit_partition(8);
        let f = test_signal(3);
        // b_n = dt: discrete equals continuous
        let opts = SystemOptions {
            shift_rule: ShiftRule::Explicit(vec![f.sample_interval; 16]),
            overlap: 1.0,
        };
        let sys = build_system(&part, &MotherWavelet::shannon(), &opts).unwrap();
        let c = cewt_forward(&f, &sys).unwrap();
        let d = dewt_forward(&f, &sys).unwrap();
        assert_eq!(c.bands[0].values, d.bands[0].values);

        // b_n = 2 dt keeps every other coefficient
        let opts = SystemOptions {
            shift_rule: ShiftRule::Explicit(vec![2.0 * f.sample_interval; 16]),
            overlap: 1.0,
        };
        let sys = build_system(&part, &MotherWavelet::shannon(), &opts).unwrap();
        let c = cewt_forward(&f, &sys).unwrap();
        let d = dewt_forward(&f, &sys).unwrap();
        assert_eq!(d.bands[0].values.len(), 32);
        for (k, v) in d.bands[0].values.iter().enumerate() {
            assert_eq!(*v, c.bands[0].values[2 * k]);
        }

        // off-grid step errors out
        let opts = SystemOptions {
            shift_rule: ShiftRule::Explicit(vec![1.5 * f.sample_interval; 16]),
            overlap: 1.0,
        };
        let sys = build_system(&part, &MotherWavelet::shannon(), &opts).unwrap();
        assert!(matches!(
            dewt_forward(&f, &sys),
            Err(SystemError::IncommensurateShiftStep { .. })
        ));
    }

    #[test]
    fn parseval_round_trip_and_frame_operator() {
        let sys = shannon_unit_system(8);
        let f = test_signal(11);
        let coeffs = dewt_forward(&f, &sys).unwrap();
        // energy identity for the canonical system
        assert_relative_eq!(coeffs.energy(), f.norm_sq(), max_relative = 1e-10);
        let back = synthesize(&coeffs, &sys).unwrap();
        let err = diff_norm(&back, &f) / f.norm_sq().sqrt();
        assert!(err < 1e-10, "round trip error {err}");

        // S f = f, and linearity: doubling the filters quadruples S
        let sf = frame_operator_apply(&f, &sys).unwrap();
        assert!(diff_norm(&sf, &f) / f.norm_sq().sqrt() < 1e-10);
        let doubled = EmpiricalWaveletSystem {
            wavelet: sys.wavelet.clone().with_amplitude(2.0),
            ..sys.clone()
        };
        let s2 = frame_operator_apply(&f, &doubled).unwrap();
        for (a, b) in s2.samples.iter().zip(&f.samples) {
            assert_relative_eq!(a.re, 4.0 * b.re, epsilon = 1e-9);
            assert_relative_eq!(a.im, 4.0 * b.im, epsilon = 1e-9);
        }

        // zero in, zero out
        let zero = SampledSignal::zeros(64, f.sample_interval).unwrap();
        assert_eq!(frame_operator_apply(&zero, &sys).unwrap().norm_sq(), 0.0);
    }

    #[test]
    fn synthesize_single_coefficient_is_the_atom() {
        let sys = shannon_unit_system(8);
        let f = test_signal(0);
        let mut coeffs = dewt_forward(&f, &sys).unwrap();
        for band in &mut coeffs.bands {
            for v in &mut band.values {
                *v = Complex64::new(0.0, 0.0);
            }
        }
        coeffs.bands[5].values[2] = Complex64::new(1.0, 0.0);
        let g = synthesize(&coeffs, &sys).unwrap();
        // compare against the modulated filter route: psi_{n,k} has spectrum
        // e^{-2 pi i (k b_n) xi} psi_hat_n(xi)
        let atom_pos = sys.position_of(coeffs.bands[5].index).unwrap();
        let b_n = sys.atoms[atom_pos].params.unwrap().shift_step;
        let spec0 = f.spectrum();
        let freqs: Vec<f64> = (0..spec0.len()).map(|j| spec0.frequency(j)).collect();
        let filt = sys.filter_spectrum(atom_pos, &freqs).unwrap();
        let shifted: Vec<Complex64> = filt
            .iter()
            .zip(&freqs)
            .map(|(v, &xi)| {
                v * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * 2.0 * b_n * xi)
            })
            .collect();
        let expected = Spectrum { values: shifted, sample_interval: f.sample_interval }.signal();
        assert!(diff_norm(&g, &expected) < 1e-12);

        // all-zero coefficients synthesize to the zero signal
        for band in &mut coeffs.bands {
            for v in &mut band.values {
                *v = Complex64::new(0.0, 0.0);
            }
        }
        assert_eq!(synthesize(&coeffs, &sys).unwrap().norm_sq(), 0.0);
    }

    #[test]
    fn gaussian_atom_matches_time_formula() {
        // the time form e^{2 pi i omega (t - b)} |a|^{1/2} psi(a (t - b))
        // of a Gaussian atom, periodization error excepted
        let wavelet = MotherWavelet::gaussian().with_essential(0.01).unwrap();
        let p = build_partition(&BoundarySet::standard(vec![-2.0, 0.0, 2.0], true, true).unwrap())
            .unwrap();
        let sys = build_system(&p, &wavelet, &SystemOptions::default()).unwrap();
        let n = 512;
        let dt = 1.0 / 16.0; // duration 32, freq range [-8, 8)
        let f = SampledSignal::zeros(n, dt).unwrap();
        let mut coeffs = dewt_forward(&f, &sys).unwrap();
        let band = 2; // support [0, 2], omega = 1
        let k = 4;
        coeffs.bands[band].values[k] = Complex64::new(1.0, 0.0);
        let g = synthesize(&coeffs, &sys).unwrap();

        let atom_pos = sys.position_of(coeffs.bands[band].index).unwrap();
        let params = sys.atoms[atom_pos].params.unwrap();
        let omega = sys.atoms[atom_pos].center;
        let b = k as f64 * params.shift_step;
        let a = params.scale;
        let dur = n as f64 * dt;
        for (m, got) in g.samples.iter().enumerate() {
            // fold the grid time into [-T/2, T/2) around the atom center
            let mut t = m as f64 * dt - b;
            while t >= dur / 2.0 {
                t -= dur;
            }
            while t < -dur / 2.0 {
                t += dur;
            }
            let envelope = a.abs().sqrt() * (-std::f64::consts::PI * (a * t).powi(2)).exp();
            let expected = Complex64::from_polar(envelope, 2.0 * std::f64::consts::PI * omega * t);
            assert!(
                (got - expected).norm() < 1e-8,
                "sample {m}: got {got}, expected {expected}"
            );
        }
    }

    #[test]
    fn synthesize_rejects_mismatched_sets() {
        let sys = shannon_unit_system(8);
        let f = test_signal(1);
        let mut coeffs = dewt_forward(&f, &sys).unwrap();
        coeffs.bands.pop();
        assert!(matches!(synthesize(&coeffs, &sys), Err(SystemError::SystemMismatch(_))));
        let coeffs = cewt_forward(&f, &sys).unwrap();
        assert!(matches!(synthesize(&coeffs, &sys), Err(SystemError::SystemMismatch(_))));
    }

    #[test]
    fn reconstruct_parseval_in_one_iteration() {
        let sys = shannon_unit_system(8);
        let f = test_signal(21);
        let coeffs = dewt_forward(&f, &sys).unwrap();
        let rec = reconstruct(&coeffs, &sys, 100, 1e-12).unwrap();
        assert!(rec.converged);
        assert!(rec.iterations <= 2, "took {} iterations", rec.iterations);
        assert!(diff_norm(&rec.signal, &f) / f.norm_sq().sqrt() < 1e-10);

        let mut zero_coeffs = coeffs.clone();
        for band in &mut zero_coeffs.bands {
            for v in &mut band.values {
                *v = Complex64::new(0.0, 0.0);
            }
        }
        let rec = reconstruct(&zero_coeffs, &sys, 10, 1e-12).unwrap();
        assert_eq!(rec.signal.norm_sq(), 0.0);
        assert!(rec.converged);
    }

    fn diff_norm(a: &SampledSignal, b: &SampledSignal) -> f64 {
        let d: f64 = a
            .samples
            .iter()
            .zip(&b.samples)
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            * a.sample_interval;
        d.sqrt()
    }
}
