//! EEG eye-artifact preprocessing.
//!
//! The crate covers the whole chain from raw multichannel recordings to
//! artifact-reduced data: resampling and zero-phase filtering ([`dsp`]),
//! trigger-based trial segmentation ([`segmentation`]), fixed-point ICA
//! ([`ica`]), EOG-correlation component selection with complete or partial
//! rejection and artifact-diminished unmixing ([`artifact`]), quality
//! metrics ([`eval`]), a synthetic ground-truth generator ([`synth`]), file
//! formats ([`io`]) and the end-to-end driver ([`pipeline`]).
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the `*64` and
//! `*32` aliases below fix the scalar type.

pub mod artifact;
pub mod dsp;
pub mod error;
pub mod eval;
pub mod ica;
pub mod io;
pub mod linalg;
pub mod model;
pub mod pipeline;
pub mod scalar;
pub mod segmentation;
pub mod synth;

pub use error::{Error, Result};
pub use ica::{ComponentSet, UnmixingMatrix};
pub use linalg::Matrix;
pub use model::{
    msf_normalize, msf_stats, AnnotationStats, Channel, Interval, MembershipFunction, Recording,
    WindowedMembershipFunction,
};
pub use scalar::Real;

pub type Recording64 = Recording<f64>;
pub type Recording32 = Recording<f32>;
pub type Matrix64 = Matrix<f64>;
pub type Matrix32 = Matrix<f32>;
pub type UnmixingMatrix64 = UnmixingMatrix<f64>;
pub type UnmixingMatrix32 = UnmixingMatrix<f32>;
pub type ComponentSet64 = ComponentSet<f64>;
pub type ComponentSet32 = ComponentSet<f32>;
