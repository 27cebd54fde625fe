//! Crafting images whose downscaled version equals a chosen target.
//!
//! Given a camouflage `source` (full size), a `target` (model size) and the
//! victim's [`ScalingOperator`], the solvers modify only source pixels the
//! operator reads, and only as much as needed for the resize to land on the
//! target:
//!
//! * [`craft_nearest`]: nearest-neighbor reads one pixel per output, so those
//!   pixels are overwritten and the rest of the image is left alone.
//! * [`craft_local`]: interpolating kernels whose supports do not overlap get
//!   an independent minimum-change solve per output pixel.
//! * [`craft_iterative`]: any kernel, by alternating projection onto the
//!   output constraints and the `[0, 255]` box.
//!
//! All solvers work in floating point and quantize once; success is always
//! judged by re-applying the operator to the 8-bit result.

mod iterative;
mod local;
mod nearest;

pub use iterative::craft_iterative;
pub use local::{craft_local, craft_local_float, project_onto_constraint};
pub use nearest::craft_nearest;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::detect::{self, HistogramConfig};
use crate::exec::Execution;
use crate::imagecore::{self, Image, ImageError, Psnr};
use crate::kernels::{self, KernelError, KernelKind, ScalingOperator};

#[derive(Debug, Error)]
pub enum AttackError {
    #[error("{mode} crafting does not support the {kind} kernel")]
    UnsupportedKernel { mode: AttackMode, kind: KernelKind },
    #[error("supports of distinct output pixels overlap; use the iterative solver")]
    OverlappingSupports,
    #[error("source has {source_channels} channels, target has {target_channels}")]
    ChannelMismatch {
        source_channels: usize,
        target_channels: usize,
    },
    #[error("unknown attack mode '{0}' (expected exact-nn, local or iterative)")]
    UnknownMode(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Image(#[from] ImageError),
}

pub type Result<T> = std::result::Result<T, AttackError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackMode {
    ExactNn,
    Local,
    Iterative,
}

impl fmt::Display for AttackMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AttackMode::ExactNn => "exact-nn",
            AttackMode::Local => "local",
            AttackMode::Iterative => "iterative",
        })
    }
}

impl FromStr for AttackMode {
    type Err = AttackError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "exact-nn" | "nearest" | "exact" => Ok(AttackMode::ExactNn),
            "local" => Ok(AttackMode::Local),
            "iterative" => Ok(AttackMode::Iterative),
            other => Err(AttackError::UnknownMode(other.to_string())),
        }
    }
}

pub const DEFAULT_TOLERANCE: u8 = 1;
pub const DEFAULT_MAX_ITERS: usize = 500;

/// Inputs of one craft.
#[derive(Debug, Clone)]
pub struct AttackSpec {
    /// Camouflage image at the victim's input size.
    pub source: Image,
    /// What the victim should see after resizing.
    pub target: Image,
    pub operator: ScalingOperator,
    pub mode: AttackMode,
    /// Allowed max-abs error (intensity levels) of the resized crafted image.
    pub out_tolerance: u8,
    /// Sweep budget for [`AttackMode::Iterative`].
    pub max_iters: usize,
}

impl AttackSpec {
    pub fn new(source: Image, target: Image, operator: ScalingOperator, mode: AttackMode) -> Result<Self> {
        let spec = Self {
            source,
            target,
            operator,
            mode,
            out_tolerance: DEFAULT_TOLERANCE,
            max_iters: DEFAULT_MAX_ITERS,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_tolerance(mut self, tol: u8) -> Self {
        self.out_tolerance = tol;
        self
    }

    pub fn with_max_iters(mut self, iters: usize) -> Self {
        self.max_iters = iters;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.source.channels() != self.target.channels() {
            return Err(AttackError::ChannelMismatch {
                source_channels: self.source.channels(),
                target_channels: self.target.channels(),
            });
        }
        self.operator.check_input(self.source.dims())?;
        self.operator.check_output(self.target.dims())?;
        Ok(())
    }
}

/// Crafted image plus the quality numbers callers usually want.
#[derive(Debug, Clone, Serialize)]
pub struct CraftResult {
    #[serde(skip)]
    pub crafted: Image,
    /// `linf_diff(apply(op, crafted), target)`.
    pub out_linf: u8,
    /// Fidelity of the crafted image to the camouflage source.
    pub source_psnr: Psnr,
    /// Share of pixel positions where any channel differs from the source.
    pub modified_fraction: f64,
    pub iterations_used: usize,
}

impl CraftResult {
    pub(crate) fn measure(spec: &AttackSpec, crafted: Image, iterations_used: usize) -> Result<Self> {
        let out = kernels::apply(&spec.operator, &crafted)?;
        let out_linf = imagecore::linf_diff(&out, &spec.target)?;
        let source_psnr = imagecore::psnr(&crafted, &spec.source)?;
        let ch = crafted.channels();
        let modified = crafted
            .pixels()
            .chunks_exact(ch)
            .zip(spec.source.pixels().chunks_exact(ch))
            .filter(|(a, b)| a != b)
            .count();
        Ok(Self {
            out_linf,
            source_psnr,
            modified_fraction: modified as f64 / crafted.dims().area() as f64,
            iterations_used,
            crafted,
        })
    }

    pub fn meets(&self, tol: u8) -> bool {
        self.out_linf <= tol
    }
}

/// Runs the solver selected by `spec.mode`.
pub fn craft(spec: &AttackSpec) -> Result<CraftResult> {
    craft_with(spec, Execution::default())
}

pub fn craft_with(spec: &AttackSpec, exec: Execution) -> Result<CraftResult> {
    match spec.mode {
        AttackMode::ExactNn => craft_nearest(spec),
        AttackMode::Local => local::craft_local_with(spec, exec),
        AttackMode::Iterative => iterative::craft_iterative_with(spec, exec),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Verification {
    pub ok: bool,
    pub out_linf: u8,
    pub out_psnr: Psnr,
}

/// Re-applies `op` to the 8-bit crafted image and compares with `target`.
pub fn verify(crafted: &Image, op: &ScalingOperator, target: &Image, tol: u8) -> Result<Verification> {
    let out = kernels::apply(op, crafted)?;
    let out_linf = imagecore::linf_diff(&out, target)?;
    Ok(Verification {
        ok: out_linf <= tol,
        out_linf,
        out_psnr: imagecore::psnr(&out, target)?,
    })
}

/// Largest per-channel histogram distance between an image and its resized
/// version; high values mean the resize changes what the image looks like.
pub fn deceit_score(crafted: &Image, op: &ScalingOperator) -> Result<f64> {
    let scaled = kernels::apply(op, crafted)?;
    let cfg = HistogramConfig::default();
    let d = detect::channel_distances(crafted, &scaled, &cfg).map_err(|e| match e {
        detect::DetectError::Kernel(k) => AttackError::Kernel(k),
        other => unreachable!("same-image channel counts: {other}"),
    })?;
    Ok(d.into_iter().fold(0.0, f64::max))
}
