//! Default resize kernels of common deep-learning framework / image library
//! pairings.
//!
//! A profile fixes the kernel family only. The sampling convention defaults
//! to half-pixel centers; none of these presets reproduces the named
//! library's resize bit-for-bit.

use std::fmt;

use thiserror::Error;

use crate::kernels::{KernelKind, SamplingConvention};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameworkProfile {
    pub name: &'static str,
    pub framework: &'static str,
    pub library: &'static str,
    pub kind: KernelKind,
    pub convention: SamplingConvention,
    pub note: &'static str,
}

const NOTE: &str = "kernel family preset; not a bit-exact emulation of the library";

const fn profile(
    name: &'static str,
    framework: &'static str,
    library: &'static str,
    kind: KernelKind,
) -> FrameworkProfile {
    FrameworkProfile {
        name,
        framework,
        library,
        kind,
        convention: SamplingConvention::HalfPixel,
        note: NOTE,
    }
}

pub static PROFILES: [FrameworkProfile; 6] = [
    profile("caffe-opencv", "Caffe", "opencv", KernelKind::Bilinear),
    profile(
        "tensorflow-python-opencv",
        "TensorFlow",
        "python-opencv",
        KernelKind::Bilinear,
    ),
    profile("tensorflow-pillow", "TensorFlow", "pillow", KernelKind::Nearest),
    profile("tensorflow-tf-image", "TensorFlow", "tf.image", KernelKind::Bilinear),
    profile("torch-opencv", "Torch", "torch-opencv", KernelKind::Bilinear),
    profile("torch-lua-image", "Torch", "lua.image", KernelKind::Bilinear),
];

#[derive(Debug, Error)]
#[error("unknown profile '{name}'; available: {available}")]
pub struct UnknownProfile {
    pub name: String,
    pub available: String,
}

pub fn resolve_profile(name: &str) -> Result<&'static FrameworkProfile, UnknownProfile> {
    PROFILES
        .iter()
        .find(|p| p.name.eq_ignore_ascii_case(name))
        .ok_or_else(|| UnknownProfile {
            name: name.to_string(),
            available: PROFILES.iter().map(|p| p.name).collect::<Vec<_>>().join(", "),
        })
}

impl FrameworkProfile {
    /// `name<TAB>kind<TAB>convention`
    pub fn list_line(&self) -> String {
        format!("{}\t{}\t{}", self.name, self.kind, self.convention)
    }
}

impl fmt::Display for FrameworkProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({} / {}): {}, {}",
            self.name, self.framework, self.library, self.kind, self.convention
        )
    }
}
