//! Pixel containers, lossless file I/O and image-distance metrics.
//!
//! [`Image`] is the 8-bit raster exchanged with files and the outside world;
//! [`FloatPlanes`] is the unclamped working form used while applying scaling
//! operators and running the attack solvers.

mod io;
mod metrics;

pub use io::{load_image, save_image};
pub use metrics::{linf_diff, mse, psnr, Psnr};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("cannot read {path}: {source}")]
    Unreadable {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Unwritable {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("unsupported bit depth: {0}")]
    UnsupportedBitDepth(String),
    #[error("corrupt image stream: {0}")]
    Corrupt(String),
    #[error("images with an alpha channel are not supported")]
    AlphaChannel,
    #[error("unsupported color type: {0}")]
    UnsupportedColorType(String),
    #[error("unsupported file extension for {0} (expected .png, .pgm or .ppm)")]
    UnsupportedExtension(String),
    #[error("cannot store a {channels}-channel image as {format}")]
    UnsupportedCombination { channels: usize, format: &'static str },
    #[error("invalid dimensions {width}x{height}")]
    InvalidDimensions { width: usize, height: usize },
    #[error("invalid channel count {0} (expected 1 or 3)")]
    InvalidChannels(usize),
    #[error("pixel buffer holds {actual} values, expected {expected}")]
    BufferLength { expected: usize, actual: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: String, right: String },
    #[error("non-finite value at plane {channel}, index {index}")]
    NonFinite { channel: usize, index: usize },
}

pub type Result<T> = std::result::Result<T, ImageError>;

/// Width (column count) and height (row count) of a raster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Dimensions {
    pub width: usize,
    pub height: usize,
}

impl Dimensions {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(ImageError::InvalidDimensions { width, height });
        }
        Ok(Self { width, height })
    }

    pub fn area(&self) -> usize {
        self.width * self.height
    }
}

impl fmt::Display for Dimensions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

/// Interleaved 8-bit raster, 1 (gray) or 3 (RGB) channels, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Image {
    dims: Dimensions,
    channels: usize,
    pixels: Vec<u8>,
}

fn check_channels(channels: usize) -> Result<()> {
    match channels {
        1 | 3 => Ok(()),
        c => Err(ImageError::InvalidChannels(c)),
    }
}

impl Image {
    pub fn new(dims: Dimensions, channels: usize, pixels: Vec<u8>) -> Result<Self> {
        Dimensions::new(dims.width, dims.height)?;
        check_channels(channels)?;
        let expected = dims.area() * channels;
        if pixels.len() != expected {
            return Err(ImageError::BufferLength {
                expected,
                actual: pixels.len(),
            });
        }
        Ok(Self { dims, channels, pixels })
    }

    /// Image filled with one value in every channel.
    pub fn filled(dims: Dimensions, channels: usize, value: u8) -> Result<Self> {
        Self::new(dims, channels, vec![value; dims.area() * channels])
    }

    /// Builds an image from a per-pixel function `f(row, col, channel)`.
    pub fn from_fn<F>(dims: Dimensions, channels: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize, usize) -> u8,
    {
        check_channels(channels)?;
        let mut pixels = Vec::with_capacity(dims.area() * channels);
        for r in 0..dims.height {
            for c in 0..dims.width {
                for ch in 0..channels {
                    pixels.push(f(r, c, ch));
                }
            }
        }
        Self::new(dims, channels, pixels)
    }

    pub fn dims(&self) -> Dimensions {
        self.dims
    }

    pub fn width(&self) -> usize {
        self.dims.width
    }

    pub fn height(&self) -> usize {
        self.dims.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, channel: usize) -> u8 {
        self.pixels[(row * self.dims.width + col) * self.channels + channel]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, channel: usize, value: u8) {
        let w = self.dims.width;
        self.pixels[(row * w + col) * self.channels + channel] = value;
    }

    /// Errors unless `other` has the same dims and channel count.
    pub fn ensure_same_shape(&self, other: &Image) -> Result<()> {
        if self.dims != other.dims || self.channels != other.channels {
            return Err(ImageError::DimensionMismatch {
                left: format!("{}x{}", self.dims, self.channels),
                right: format!("{}x{}", other.dims, other.channels),
            });
        }
        Ok(())
    }

    pub fn to_float(&self) -> FloatPlanes {
        to_float(self)
    }
}

/// One real-valued plane per channel, no range clamp.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatPlanes {
    dims: Dimensions,
    planes: Vec<Vec<f64>>,
}

impl FloatPlanes {
    /// Wraps planes after checking shape and finiteness.
    pub fn new(dims: Dimensions, planes: Vec<Vec<f64>>) -> Result<Self> {
        Dimensions::new(dims.width, dims.height)?;
        check_channels(planes.len())?;
        for (channel, plane) in planes.iter().enumerate() {
            if plane.len() != dims.area() {
                return Err(ImageError::BufferLength {
                    expected: dims.area(),
                    actual: plane.len(),
                });
            }
            if let Some(index) = plane.iter().position(|v| !v.is_finite()) {
                return Err(ImageError::NonFinite { channel, index });
            }
        }
        Ok(Self { dims, planes })
    }

    /// Internal constructor for planes produced by finite arithmetic on
    /// already-validated inputs.
    pub(crate) fn from_parts(dims: Dimensions, planes: Vec<Vec<f64>>) -> Self {
        debug_assert!(planes.iter().all(|p| p.len() == dims.area()));
        Self { dims, planes }
    }

    pub fn dims(&self) -> Dimensions {
        self.dims
    }

    pub fn channels(&self) -> usize {
        self.planes.len()
    }

    pub fn plane(&self, channel: usize) -> &[f64] {
        &self.planes[channel]
    }

    pub fn plane_mut(&mut self, channel: usize) -> &mut [f64] {
        &mut self.planes[channel]
    }

    pub fn planes(&self) -> &[Vec<f64>] {
        &self.planes
    }

    pub fn into_planes(self) -> Vec<Vec<f64>> {
        self.planes
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, channel: usize) -> f64 {
        self.planes[channel][row * self.dims.width + col]
    }

    pub fn to_image(&self) -> Result<Image> {
        from_float(self)
    }
}

/// Exact widening of every intensity to `f64`.
pub fn to_float(img: &Image) -> FloatPlanes {
    let ch = img.channels;
    let planes = (0..ch)
        .map(|c| img.pixels.iter().skip(c).step_by(ch).map(|&v| f64::from(v)).collect())
        .collect();
    FloatPlanes::from_parts(img.dims, planes)
}

/// Clamps to `[0, 255]` then rounds half away from zero.
#[inline]
pub fn quantize(value: f64) -> u8 {
    value.clamp(0.0, 255.0).round() as u8
}

/// Quantizes planes back to an 8-bit image; rejects non-finite values.
pub fn from_float(p: &FloatPlanes) -> Result<Image> {
    let ch = p.channels();
    let n = p.dims.area();
    let mut pixels = vec![0u8; n * ch];
    for (c, plane) in p.planes.iter().enumerate() {
        for (i, &v) in plane.iter().enumerate() {
            if !v.is_finite() {
                return Err(ImageError::NonFinite { channel: c, index: i });
            }
            pixels[i * ch + c] = quantize(v);
        }
    }
    Image::new(p.dims, ch, pixels)
}
