use std::fmt;

use serde::{Serialize, Serializer};

use super::{Image, Result};

/// Peak signal-to-noise ratio against peak 255.
///
/// Serializes as a number of decibels, or the string `"identical"` when the
/// mean squared error is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Psnr {
    Identical,
    Decibels(f64),
}

impl Psnr {
    /// Decibels, with `Identical` mapped to +inf for ordering.
    pub fn as_db(self) -> f64 {
        match self {
            Psnr::Identical => f64::INFINITY,
            Psnr::Decibels(db) => db,
        }
    }
}

impl fmt::Display for Psnr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Psnr::Identical => f.write_str("identical"),
            Psnr::Decibels(db) => write!(f, "{db:.2} dB"),
        }
    }
}

impl Serialize for Psnr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Psnr::Identical => s.serialize_str("identical"),
            Psnr::Decibels(db) => s.serialize_f64(*db),
        }
    }
}

/// Mean squared error over every channel value.
pub fn mse(a: &Image, b: &Image) -> Result<f64> {
    a.ensure_same_shape(b)?;
    let sum: u64 = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(&x, &y)| {
            let d = i64::from(x) - i64::from(y);
            (d * d) as u64
        })
        .sum();
    Ok(sum as f64 / a.pixels().len() as f64)
}

pub fn psnr(a: &Image, b: &Image) -> Result<Psnr> {
    let mse = mse(a, b)?;
    if mse == 0.0 {
        return Ok(Psnr::Identical);
    }
    Ok(Psnr::Decibels(10.0 * (255.0f64 * 255.0 / mse).log10()))
}

/// Largest absolute per-value difference.
pub fn linf_diff(a: &Image, b: &Image) -> Result<u8> {
    a.ensure_same_shape(b)?;
    Ok(a.pixels()
        .iter()
        .zip(b.pixels())
        .map(|(&x, &y)| x.abs_diff(y))
        .max()
        .unwrap_or(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imagecore::{Dimensions, ImageError};

    fn d(w: usize, h: usize) -> Dimensions {
        Dimensions::new(w, h).unwrap()
    }

    #[test]
    fn identical_sentinel() {
        let a = Image::filled(d(3, 3), 1, 42).unwrap();
        assert_eq!(psnr(&a, &a).unwrap(), Psnr::Identical);
        assert_eq!(linf_diff(&a, &a).unwrap(), 0);
    }

    #[test]
    fn black_vs_white_is_zero_db() {
        let a = Image::filled(d(4, 2), 1, 0).unwrap();
        let b = Image::filled(d(4, 2), 1, 255).unwrap();
        assert_eq!(psnr(&a, &b).unwrap(), Psnr::Decibels(0.0));
    }

    #[test]
    fn single_pixel_linf() {
        let a = Image::new(d(1, 1), 1, vec![10]).unwrap();
        let b = Image::new(d(1, 1), 1, vec![14]).unwrap();
        assert_eq!(linf_diff(&a, &b).unwrap(), 4);
        assert_eq!(linf_diff(&b, &a).unwrap(), 4);
    }

    #[test]
    fn shape_mismatch() {
        let a = Image::filled(d(2, 2), 1, 0).unwrap();
        let b = Image::filled(d(2, 2), 3, 0).unwrap();
        let c = Image::filled(d(2, 3), 1, 0).unwrap();
        assert!(matches!(psnr(&a, &b), Err(ImageError::DimensionMismatch { .. })));
        assert!(linf_diff(&a, &c).is_err());
    }

    #[test]
    fn psnr_serializes() {
        assert_eq!(serde_json::to_string(&Psnr::Identical).unwrap(), "\"identical\"");
        assert_eq!(serde_json::to_string(&Psnr::Decibels(1.5)).unwrap(), "1.5");
    }
}
