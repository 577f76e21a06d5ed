//! Mother wavelets described through their spectral profile `psi_hat`.
//!
//! A profile is a map `xi -> psi_hat(xi)` localized around zero frequency,
//! together with a support descriptor `S` and, when needed, an essential
//! support: the smallest symmetric interval `E = [-e, e]` carrying a
//! `(1 - delta)` fraction of `||psi_hat||^2`. The per-band scale factors
//! derive from `|S|` (compact profiles), `|E|` (non-compact profiles), and
//! the three sign cases for ray bands.

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature::{adaptive_trapezoid, QUAD_REL_TOL};

/// Values of `|psi_hat|` below this fraction of the profile maximum count
/// as zero when checking support claims.
pub const PROFILE_ZERO_TOL: f64 = 1e-14;

#[derive(Debug, Error)]
pub enum WaveletError {
    #[error("delta must lie in [0, 1), got {0}")]
    InvalidDelta(f64),
    #[error("profile mass does not converge on an expanding interval; not square-integrable?")]
    NonIntegrableProfile,
    #[error("support length must be positive, got {0}")]
    ZeroLengthSupport(f64),
    #[error("essential support is empty; delta too close to 1")]
    EmptyEssentialSupport,
    #[error("a compactly supported profile cannot cover a ray band; exclude the band instead")]
    CompactSupportRayUnsupported,
    #[error("profile is nonzero outside its declared support near xi = {0}")]
    ProfileOutsideSupport(f64),
    #[error("Meyer transition half-width must lie in (0, 0.5], got {0}")]
    InvalidTransition(f64),
    #[error("sampled profile needs at least two strictly increasing sample points")]
    InvalidSamples,
    #[error("essential support has not been computed; call with_essential first")]
    MissingEssentialSupport,
}

/// Where `psi_hat` lives on the frequency line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SupportDescriptor {
    /// `[lo, hi]`
    Compact { lo: f64, hi: f64 },
    /// `(-inf, hi]`
    LeftRay { hi: f64 },
    /// `[lo, +inf)`
    RightRay { lo: f64 },
    FullLine,
}

impl SupportDescriptor {
    pub fn is_compact(&self) -> bool {
        matches!(self, SupportDescriptor::Compact { .. })
    }

    pub fn length(&self) -> Option<f64> {
        match self {
            SupportDescriptor::Compact { lo, hi } => Some(hi - lo),
            _ => None,
        }
    }

    /// Radius of the smallest symmetric interval containing a compact `S`.
    pub fn symmetric_hull_radius(&self) -> Option<f64> {
        match self {
            SupportDescriptor::Compact { lo, hi } => Some(lo.abs().max(hi.abs())),
            _ => None,
        }
    }

    pub fn contains(&self, xi: f64) -> bool {
        match *self {
            SupportDescriptor::Compact { lo, hi } => xi >= lo && xi <= hi,
            SupportDescriptor::LeftRay { hi } => xi <= hi,
            SupportDescriptor::RightRay { lo } => xi >= lo,
            SupportDescriptor::FullLine => true,
        }
    }
}

/// Built-in spectral profiles plus sampled custom ones.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// Indicator of `[-1/2, 1/2)`; the half-open edge realizes the a.e.
    /// statements on grids where bins land exactly on band boundaries.
    Shannon,
    /// Compact bump: flat 1 on `[-1/2+tau, 1/2-tau]`, polynomial
    /// cosine transition of half-width `tau`, support `[-1/2-tau, 1/2+tau]`.
    /// Adjacent unit translates satisfy `p^2 + (1-p)^2`-style
    /// complementarity, so their squares sum to one.
    Meyer { transition: f64 },
    /// `exp(-pi xi^2)`; full-line support.
    Gaussian,
    /// Gaussian restricted to one side of zero; gives a genuinely
    /// half-line support for exercising the ray sign rules.
    HalfGaussian { positive: bool },
    /// Piecewise-linear interpolation of `(xi, value)` samples; zero
    /// outside the sampled range.
    Sampled { xs: Vec<f64>, values: Vec<Complex64> },
}

impl Profile {
    fn eval(&self, xi: f64) -> Complex64 {
        match self {
            Profile::Shannon => {
                if (-0.5..0.5).contains(&xi) {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            Profile::Meyer { transition } => Complex64::new(meyer_bump(xi, *transition), 0.0),
            Profile::Gaussian => Complex64::new((-std::f64::consts::PI * xi * xi).exp(), 0.0),
            Profile::HalfGaussian { positive } => {
                let inside = if *positive { xi >= 0.0 } else { xi <= 0.0 };
                if inside {
                    Complex64::new((-std::f64::consts::PI * xi * xi).exp(), 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            Profile::Sampled { xs, values } => {
                if xi < xs[0] || xi > *xs.last().unwrap() {
                    return Complex64::new(0.0, 0.0);
                }
                let j = match xs.binary_search_by(|x| x.partial_cmp(&xi).unwrap()) {
                    Ok(j) => return values[j],
                    Err(j) => j,
                };
                let (x0, x1) = (xs[j - 1], xs[j]);
                let t = (xi - x0) / (x1 - x0);
                values[j - 1] * (1.0 - t) + values[j] * t
            }
        }
    }
}

/// Meyer auxiliary polynomial, `beta(0) = 0`, `beta(1) = 1`,
/// `beta(t) + beta(1-t) = 1`.
fn meyer_beta(t: f64) -> f64 {
    t * t * t * t * (35.0 - 84.0 * t + 70.0 * t * t - 20.0 * t * t * t)
}

fn meyer_bump(xi: f64, tau: f64) -> f64 {
    let x = xi.abs();
    let flat = 0.5 - tau;
    if x <= flat {
        1.0
    } else if x < 0.5 + tau {
        (std::f64::consts::FRAC_PI_2 * meyer_beta((x - flat) / (2.0 * tau))).cos()
    } else {
        0.0
    }
}

/// Symmetric essential support `[-radius, radius]` for a given `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EssentialSupport {
    pub radius: f64,
    pub delta: f64,
}

impl EssentialSupport {
    pub fn width(&self) -> f64 {
        2.0 * self.radius
    }
}

/// Per-band dilation factor; nonzero, possibly negative on ray bands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleFactor(pub f64);

/// A mother wavelet given in the frequency domain.
#[derive(Debug, Clone, PartialEq)]
pub struct MotherWavelet {
    pub profile: Profile,
    pub support: SupportDescriptor,
    /// Scalar multiplier on the profile (used e.g. by homogeneity tests).
    pub amplitude: f64,
    /// `||psi_hat||^2` including the amplitude factor.
    pub l2_norm_sq: f64,
    pub essential: Option<EssentialSupport>,
}

impl MotherWavelet {
    pub fn shannon() -> Self {
        MotherWavelet {
            profile: Profile::Shannon,
            support: SupportDescriptor::Compact { lo: -0.5, hi: 0.5 },
            amplitude: 1.0,
            l2_norm_sq: 1.0,
            essential: None,
        }
    }

    pub fn meyer(transition: f64) -> Result<Self, WaveletError> {
        if !(transition > 0.0 && transition <= 0.5) {
            return Err(WaveletError::InvalidTransition(transition));
        }
        // the transition complementarity makes the squared bump integrate
        // to exactly the flat width plus the two half-transitions
        Ok(MotherWavelet {
            profile: Profile::Meyer { transition },
            support: SupportDescriptor::Compact { lo: -0.5 - transition, hi: 0.5 + transition },
            amplitude: 1.0,
            l2_norm_sq: 1.0,
            essential: None,
        })
    }

    pub fn gaussian() -> Self {
        MotherWavelet {
            profile: Profile::Gaussian,
            support: SupportDescriptor::FullLine,
            amplitude: 1.0,
            l2_norm_sq: std::f64::consts::FRAC_1_SQRT_2,
            essential: None,
        }
    }

    pub fn half_gaussian(positive: bool) -> Self {
        let support = if positive {
            SupportDescriptor::RightRay { lo: 0.0 }
        } else {
            SupportDescriptor::LeftRay { hi: 0.0 }
        };
        MotherWavelet {
            profile: Profile::HalfGaussian { positive },
            support,
            amplitude: 1.0,
            l2_norm_sq: 0.5 * std::f64::consts::FRAC_1_SQRT_2,
            essential: None,
        }
    }

    /// Custom profile from `(xi, value)` samples, linearly interpolated.
    pub fn from_samples(xs: Vec<f64>, values: Vec<Complex64>) -> Result<Self, WaveletError> {
        if xs.len() < 2 || xs.len() != values.len() || xs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(WaveletError::InvalidSamples);
        }
        let support = SupportDescriptor::Compact { lo: xs[0], hi: *xs.last().unwrap() };
        let mut w = MotherWavelet {
            profile: Profile::Sampled { xs, values },
            support,
            amplitude: 1.0,
            l2_norm_sq: 0.0,
            essential: None,
        };
        w.l2_norm_sq = w.mass_within(f64::INFINITY);
        if !(w.l2_norm_sq.is_finite() && w.l2_norm_sq > 0.0) {
            return Err(WaveletError::NonIntegrableProfile);
        }
        Ok(w)
    }

    /// Multiply the profile by `c`; support and essential support are
    /// unchanged since the mass fraction is scale-invariant.
    pub fn with_amplitude(mut self, c: f64) -> Self {
        self.amplitude *= c;
        self.l2_norm_sq *= c * c;
        self
    }

    /// Evaluate `psi_hat(xi)`.
    pub fn eval(&self, xi: f64) -> Complex64 {
        self.profile.eval(xi) * self.amplitude
    }

    /// `int_{-e}^{e} |psi_hat|^2`, clipped to the declared support so the
    /// integrand stays smooth.
    fn mass_within(&self, e: f64) -> f64 {
        let (lo, hi) = match self.support {
            SupportDescriptor::Compact { lo, hi } => (lo.max(-e), hi.min(e)),
            SupportDescriptor::LeftRay { hi } => (-e, hi.min(e)),
            SupportDescriptor::RightRay { lo } => (lo.max(-e), e),
            SupportDescriptor::FullLine => (-e, e),
        };
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            // infinite clip only happens for e = inf on a compact range,
            // handled by the caller passing finite e except for samples
            if let SupportDescriptor::Compact { lo, hi } = self.support {
                return adaptive_trapezoid(&|x| self.eval(x).norm_sqr(), lo, hi, QUAD_REL_TOL);
            }
            return 0.0;
        }
        adaptive_trapezoid(&|x| self.eval(x).norm_sqr(), lo, hi, QUAD_REL_TOL)
    }

    /// Mass outside `[-e, e]`; clamped at zero.
    pub fn tail_mass(&self, e: f64) -> f64 {
        (self.l2_norm_sq - self.mass_within(e)).max(0.0)
    }

    /// `sup_{|u| >= x} |psi_hat(u)|`; used to bound truncation tails.
    pub fn tail_sup(&self, x: f64) -> f64 {
        let x = x.max(0.0);
        match &self.profile {
            Profile::Shannon => {
                if x < 0.5 {
                    self.amplitude.abs()
                } else {
                    0.0
                }
            }
            Profile::Meyer { transition } => {
                if x >= 0.5 + transition {
                    0.0
                } else {
                    self.eval(x).norm().max(self.eval(-x).norm())
                }
            }
            Profile::Gaussian | Profile::HalfGaussian { .. } => {
                self.amplitude.abs() * (-std::f64::consts::PI * x * x).exp()
            }
            Profile::Sampled { xs, values } => {
                let mut sup: f64 = 0.0;
                for (x0, v) in xs.iter().zip(values) {
                    if x0.abs() >= x {
                        sup = sup.max((v * self.amplitude).norm());
                    }
                }
                // the interpolant is bounded by its nodes on each segment
                sup
            }
        }
    }

    /// Compute and attach the essential support for `delta`.
    pub fn with_essential(mut self, delta: f64) -> Result<Self, WaveletError> {
        let e = self.essential_support(delta)?;
        self.essential = Some(EssentialSupport { radius: e, delta });
        Ok(self)
    }

    fn essential(&self) -> Result<EssentialSupport, WaveletError> {
        self.essential.ok_or(WaveletError::MissingEssentialSupport)
    }

    /// Smallest symmetric radius `e` with
    /// `int_{-e}^{e} |psi_hat|^2 >= (1 - delta) ||psi_hat||^2`,
    /// found by monotone bisection on the quadrature mass.
    pub fn essential_support(&self, delta: f64) -> Result<f64, WaveletError> {
        if !(0.0..1.0).contains(&delta) {
            return Err(WaveletError::InvalidDelta(delta));
        }
        if !(self.l2_norm_sq.is_finite() && self.l2_norm_sq > 0.0) {
            return Err(WaveletError::NonIntegrableProfile);
        }
        if delta == 0.0 {
            if let Some(r) = self.support.symmetric_hull_radius() {
                return Ok(r);
            }
        }
        let target = (1.0 - delta) * self.l2_norm_sq;
        // bracket: expand until the mass reaches the target
        let mut hi = self.support.symmetric_hull_radius().unwrap_or(1.0);
        let mut tries = 0;
        while self.mass_within(hi) < target {
            hi *= 2.0;
            tries += 1;
            if tries > 60 {
                return Err(WaveletError::NonIntegrableProfile);
            }
        }
        let mut lo = 0.0f64;
        while hi - lo > 1e-13 * hi.max(1.0) {
            let mid = 0.5 * (lo + hi);
            if self.mass_within(mid) >= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    /// Check that the profile is numerically zero outside the declared
    /// support, sampling `points` values over a widened window.
    pub fn validate_support(&self, points: usize) -> Result<(), WaveletError> {
        let (lo, hi) = match self.support {
            SupportDescriptor::FullLine => return Ok(()),
            SupportDescriptor::Compact { lo, hi } => (lo, hi),
            SupportDescriptor::LeftRay { hi } => (hi - 1.0, hi),
            SupportDescriptor::RightRay { lo } => (lo, lo + 1.0),
        };
        let span = (hi - lo).max(1.0);
        let (wlo, whi) = (lo - 2.0 * span, hi + 2.0 * span);
        let mut max_inside: f64 = 0.0;
        let mut worst_outside: Option<(f64, f64)> = None;
        for i in 0..points {
            let xi = wlo + (whi - wlo) * i as f64 / points as f64;
            let v = self.eval(xi).norm();
            if self.support.contains(xi) {
                max_inside = max_inside.max(v);
            } else if worst_outside.is_none_or(|(_, w)| v > w) {
                worst_outside = Some((xi, v));
            }
        }
        if let Some((xi, v)) = worst_outside {
            if v > PROFILE_ZERO_TOL * max_inside.max(f64::MIN_POSITIVE) {
                return Err(WaveletError::ProfileOutsideSupport(xi));
            }
        }
        Ok(())
    }

    /// Scale factor for a compact band under a compact profile:
    /// `a_n = |S_n| / |S|` with `|S_n| = overlap * |Omega_n|`
    /// (`overlap = 1` is the minimal cover).
    pub fn scale_factor_compact(&self, band_length: f64, overlap: f64) -> Result<ScaleFactor, WaveletError> {
        let s_len = self
            .support
            .length()
            .ok_or(WaveletError::CompactSupportRayUnsupported)?;
        if band_length.is_nan() || band_length <= 0.0 {
            return Err(WaveletError::ZeroLengthSupport(band_length));
        }
        if s_len <= 0.0 {
            return Err(WaveletError::ZeroLengthSupport(s_len));
        }
        if overlap.is_nan() || overlap < 1.0 {
            return Err(WaveletError::ZeroLengthSupport(overlap));
        }
        Ok(ScaleFactor(overlap * band_length / s_len))
    }

    /// Scale factor for a compact band under a non-compact profile:
    /// `a_n = |Omega_n| / |E|`.
    pub fn scale_factor_essential(&self, band_length: f64) -> Result<ScaleFactor, WaveletError> {
        let ess = self.essential()?;
        if band_length.is_nan() || band_length <= 0.0 {
            return Err(WaveletError::ZeroLengthSupport(band_length));
        }
        if ess.width() <= 0.0 {
            return Err(WaveletError::EmptyEssentialSupport);
        }
        Ok(ScaleFactor(band_length / ess.width()))
    }

    /// Scale factor for a ray band. `boundary` is the ray's finite edge,
    /// `center` its symmetrized center. The magnitude is
    /// `2 (nu - omega) / |E|` (left ray) or `2 (omega - nu) / |E|` (right
    /// ray); the sign flips when the profile itself lives on the half-line
    /// pointing away from the ray.
    pub fn scale_factor_ray(
        &self,
        side: RaySide,
        boundary: f64,
        center: f64,
    ) -> Result<ScaleFactor, WaveletError> {
        if self.support.is_compact() {
            return Err(WaveletError::CompactSupportRayUnsupported);
        }
        let ess = self.essential()?;
        if ess.width() <= 0.0 {
            return Err(WaveletError::EmptyEssentialSupport);
        }
        let magnitude = match side {
            RaySide::Left => 2.0 * (boundary - center) / ess.width(),
            RaySide::Right => 2.0 * (center - boundary) / ess.width(),
        };
        if magnitude.is_nan() || magnitude <= 0.0 {
            return Err(WaveletError::ZeroLengthSupport(magnitude));
        }
        let sign = match (self.support, side) {
            (SupportDescriptor::FullLine, _) => 1.0,
            (SupportDescriptor::RightRay { .. }, RaySide::Left) => -1.0,
            (SupportDescriptor::RightRay { .. }, RaySide::Right) => 1.0,
            (SupportDescriptor::LeftRay { .. }, RaySide::Left) => 1.0,
            (SupportDescriptor::LeftRay { .. }, RaySide::Right) => -1.0,
            (SupportDescriptor::Compact { .. }, _) => unreachable!(),
        };
        Ok(ScaleFactor(sign * magnitude))
    }
}

/// Which ray a band sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RaySide {
    Left,
    Right,
}
