//! Empirical wavelet systems over adaptive Fourier partitions.
//!
//! The crate builds wavelet filter banks from arbitrary partitions of the
//! frequency line and a mother wavelet given by its spectral profile,
//! computes the continuous and discrete empirical wavelet transforms,
//! reconstructs signals through the frame operator, and numerically
//! certifies the Parseval and frame conditions of the system (Parseval
//! sums, lattice cross terms, and explicit frame bounds A and B).
//!
//! Pipeline: detect or declare a [`partition::BoundarySet`], build a
//! [`partition::Partition`], pick a [`wavelet::MotherWavelet`], assemble
//! an [`system::EmpiricalWaveletSystem`], then transform with
//! [`system::dewt_forward`] / reconstruct with [`system::reconstruct`],
//! and certify with [`frame::certify`].
//!
//! All types are immutable after construction and all operations are pure
//! functions, so values can be shared freely across threads.

pub mod frame;
pub mod io;
pub mod partition;
pub mod probe;
pub mod quadrature;
pub mod signal;
pub mod system;
pub mod wavelet;

pub use frame::{certify, CertifyOptions, FrameError, FrameReport, FrequencyGrid, Verdict};
pub use partition::{
    build_partition, compute_centers, detect_boundaries, gamma_region, BoundarySet, GammaRegion,
    Partition, PartitionError,
};
pub use signal::{SampledSignal, SignalError, Spectrum};
pub use system::{
    build_system, cewt_forward, dewt_forward, frame_operator_apply, reconstruct, synthesize,
    CoefficientSet, EmpiricalWaveletSystem, Reconstruction, ShiftRule, SystemError, SystemOptions,
};
pub use wavelet::{MotherWavelet, Profile, SupportDescriptor, WaveletError};

use thiserror::Error;

/// Coarse classification used to map failures to process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad inputs or inconsistent configuration.
    Validation,
    /// Truncation, convergence, or certification failures.
    Numerical,
    /// Filesystem and serialization trouble.
    Io,
}

/// Unified error type for callers that do not care which layer failed.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Wavelet(#[from] WaveletError),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Format(#[from] io::FormatError),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Partition(_) | Error::Signal(_) => ErrorClass::Validation,
            Error::Wavelet(e) => wavelet_class(e),
            Error::System(e) => system_class(e),
            Error::Frame(e) => frame_class(e),
            Error::Format(e) => match e {
                io::FormatError::Io(_) => ErrorClass::Io,
                io::FormatError::Signal(_) => ErrorClass::Validation,
                io::FormatError::Wavelet(w) => wavelet_class(w),
                _ => ErrorClass::Validation,
            },
        }
    }
}

fn wavelet_class(e: &WaveletError) -> ErrorClass {
    match e {
        WaveletError::NonIntegrableProfile => ErrorClass::Numerical,
        _ => ErrorClass::Validation,
    }
}

fn system_class(e: &SystemError) -> ErrorClass {
    match e {
        SystemError::Wavelet(w) => wavelet_class(w),
        _ => ErrorClass::Validation,
    }
}

fn frame_class(e: &FrameError) -> ErrorClass {
    match e {
        FrameError::TruncationInsufficient { .. } | FrameError::InconsistentCertificate { .. } => {
            ErrorClass::Numerical
        }
        FrameError::System(s) => system_class(s),
        _ => ErrorClass::Validation,
    }
}
