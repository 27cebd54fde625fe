//! Downscaling attacks against image preprocessing pipelines.
//!
//! Resizing an image to a model's input size is a linear map that reads only
//! part of the source. This crate builds that map explicitly for
//! nearest-neighbor, bilinear and bicubic kernels ([`kernels`]), crafts images
//! whose downscaled version equals an arbitrary target while the full-size
//! image still looks like a chosen camouflage picture ([`attack`]), and
//! implements input-size policies and histogram-based detection ([`detect`]).
//!
//! Data-parallel loops use rayon when the default `parallel` feature is on;
//! [`Execution`] selects the policy per call and both paths give identical
//! results.

pub mod attack;
pub mod detect;
pub mod exec;
pub mod imagecore;
pub mod kernels;
pub mod profiles;
pub mod synth;

pub use attack::{AttackMode, AttackSpec, CraftResult};
pub use detect::{DetectionReport, HistogramConfig, SizePolicy, Verdict};
pub use exec::Execution;
pub use imagecore::{Dimensions, FloatPlanes, Image, ImageError};
pub use kernels::{KernelKind, SamplingConvention, ScalingOperator};
pub use profiles::{resolve_profile, FrameworkProfile};
