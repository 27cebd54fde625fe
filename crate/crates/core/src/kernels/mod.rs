//! Interpolation operators for downscaling.
//!
//! A [`ScalingOperator`] is the separable linear map `out = R · in · Cᵀ`
//! where `R` (height axis) and `C` (width axis) are sparse
//! [`CoefficientMatrix`] values built by [`build_axis`]. Everything the attack
//! and detection code knows about a resize comes from these two matrices.

mod axis;

pub use axis::{build_axis, keys_cubic, CoefficientMatrix, KernelKind, SamplingConvention, Tap, DEFAULT_BICUBIC_A};

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::exec::Execution;
use crate::imagecore::{self, Dimensions, FloatPlanes, Image, ImageError};

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("upscaling {in_len} -> {out_len} is not supported")]
    Upscaling { in_len: usize, out_len: usize },
    #[error("axis lengths must be positive")]
    ZeroLength,
    #[error("bicubic parameter a = {0} outside [-1, 0)")]
    InvalidBicubic(f64),
    #[error("unknown kernel '{0}' (expected nearest, bilinear or bicubic)")]
    UnknownKernel(String),
    #[error("unknown sampling convention '{0}' (expected half_pixel or corner_aligned)")]
    UnknownConvention(String),
    #[error("operator expects {expected} input, got {actual}")]
    DimensionMismatch { expected: Dimensions, actual: Dimensions },
    #[error("output pixel ({row}, {col}) outside {dims}")]
    IndexOutOfRange { row: usize, col: usize, dims: Dimensions },
    #[error(transparent)]
    Image(#[from] ImageError),
}

pub type Result<T> = std::result::Result<T, KernelError>;

/// Separable downscaling operator from `input` dims to `output` dims.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingOperator {
    kind: KernelKind,
    convention: SamplingConvention,
    rows: CoefficientMatrix,
    cols: CoefficientMatrix,
}

impl ScalingOperator {
    pub fn new(
        input: Dimensions,
        output: Dimensions,
        kind: KernelKind,
        convention: SamplingConvention,
    ) -> Result<Self> {
        let rows = build_axis(input.height, output.height, kind, convention)?;
        let cols = build_axis(input.width, output.width, kind, convention)?;
        Ok(Self {
            kind,
            convention,
            rows,
            cols,
        })
    }

    pub fn identity(dims: Dimensions, kind: KernelKind) -> Result<Self> {
        Self::new(dims, dims, kind, SamplingConvention::HalfPixel)
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn convention(&self) -> SamplingConvention {
        self.convention
    }

    /// Height-axis matrix (`m' x m`).
    pub fn rows(&self) -> &CoefficientMatrix {
        &self.rows
    }

    /// Width-axis matrix (`n' x n`).
    pub fn cols(&self) -> &CoefficientMatrix {
        &self.cols
    }

    pub fn input_dims(&self) -> Dimensions {
        Dimensions {
            width: self.cols.in_len(),
            height: self.rows.in_len(),
        }
    }

    pub fn output_dims(&self) -> Dimensions {
        Dimensions {
            width: self.cols.out_len(),
            height: self.rows.out_len(),
        }
    }

    /// Same geometry with a different kernel.
    pub fn with_kind(&self, kind: KernelKind) -> Result<Self> {
        Self::new(self.input_dims(), self.output_dims(), kind, self.convention)
    }

    pub fn check_input(&self, dims: Dimensions) -> Result<()> {
        if dims != self.input_dims() {
            return Err(KernelError::DimensionMismatch {
                expected: self.input_dims(),
                actual: dims,
            });
        }
        Ok(())
    }

    pub fn check_output(&self, dims: Dimensions) -> Result<()> {
        if dims != self.output_dims() {
            return Err(KernelError::DimensionMismatch {
                expected: self.output_dims(),
                actual: dims,
            });
        }
        Ok(())
    }

    /// Both axes read every source index at most once.
    pub fn has_disjoint_supports(&self) -> bool {
        self.rows.is_disjoint() && self.cols.is_disjoint()
    }
}

/// Applies `op` and quantizes the result.
pub fn apply(op: &ScalingOperator, img: &Image) -> Result<Image> {
    apply_with(op, img, Execution::default())
}

pub fn apply_with(op: &ScalingOperator, img: &Image, exec: Execution) -> Result<Image> {
    let out = apply_float_with(op, &img.to_float(), exec)?;
    Ok(imagecore::from_float(&out)?)
}

/// Applies `op` in floating point, without clamping or rounding.
pub fn apply_float(op: &ScalingOperator, planes: &FloatPlanes) -> Result<FloatPlanes> {
    apply_float_with(op, planes, Execution::default())
}

pub fn apply_float_with(op: &ScalingOperator, planes: &FloatPlanes, exec: Execution) -> Result<FloatPlanes> {
    op.check_input(planes.dims())?;
    let out = planes.planes().iter().map(|p| apply_plane(op, p, exec)).collect();
    Ok(FloatPlanes::from_parts(op.output_dims(), out))
}

/// One plane: horizontal pass over the source rows that are read, then a
/// vertical pass per output row.
pub(crate) fn apply_plane(op: &ScalingOperator, plane: &[f64], exec: Execution) -> Vec<f64> {
    let (w, ow) = (op.cols.in_len(), op.cols.out_len());
    let oh = op.rows.out_len();
    let needed = op.rows.influenced();

    let horizontal: Vec<Option<Vec<f64>>> = exec.map_range(needed.len(), |r| {
        needed[r].then(|| {
            let src = &plane[r * w..(r + 1) * w];
            op.cols
                .rows()
                .iter()
                .map(|taps| taps.iter().map(|t| t.weight * src[t.src]).sum())
                .collect()
        })
    });

    let mut out = vec![0.0; oh * ow];
    exec.for_each_chunk_mut(&mut out, ow, |i, line| {
        for tap in op.rows.row(i) {
            let src = horizontal[tap.src].as_ref().expect("row read by an output is computed");
            for (o, s) in line.iter_mut().zip(src) {
                *o += tap.weight * s;
            }
        }
    });
    out
}

/// One source pixel contributing to an output pixel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupportTap {
    pub row: usize,
    pub col: usize,
    pub weight: f64,
}

/// Source pixels read by output pixel `(out_row, out_col)`, with the product
/// of the two axis weights.
pub fn support(op: &ScalingOperator, out_row: usize, out_col: usize) -> Result<Vec<SupportTap>> {
    let dims = op.output_dims();
    if out_row >= dims.height || out_col >= dims.width {
        return Err(KernelError::IndexOutOfRange {
            row: out_row,
            col: out_col,
            dims,
        });
    }
    Ok(support_unchecked(op, out_row, out_col).collect())
}

pub(crate) fn support_unchecked(
    op: &ScalingOperator,
    out_row: usize,
    out_col: usize,
) -> impl Iterator<Item = SupportTap> + '_ {
    let cols = op.cols.row(out_col);
    op.rows.row(out_row).iter().flat_map(move |r| {
        cols.iter().map(move |c| SupportTap {
            row: r.src,
            col: c.src,
            weight: r.weight * c.weight,
        })
    })
}

/// How much of the source the operator actually reads.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageStats {
    pub influenced_pixels: usize,
    pub total_pixels: usize,
    pub influenced_fraction: f64,
    /// Share of source pixels no output reads: the camouflage region.
    pub camouflage_fraction: f64,
    /// Row-major `m x n` map of the largest `|weight|` any output assigns to
    /// each source pixel.
    #[serde(skip)]
    pub max_abs_weight_map: Vec<f64>,
}

pub fn coverage_stats(op: &ScalingOperator) -> CoverageStats {
    let row_hit = op.rows.influenced();
    let col_hit = op.cols.influenced();
    let hit_rows = row_hit.iter().filter(|&&h| h).count();
    let hit_cols = col_hit.iter().filter(|&&h| h).count();
    let total = row_hit.len() * col_hit.len();
    let influenced = hit_rows * hit_cols;

    let row_w = op.rows.max_abs_weight();
    let col_w = op.cols.max_abs_weight();
    let max_abs_weight_map = row_w.iter().flat_map(|r| col_w.iter().map(move |c| r * c)).collect();

    CoverageStats {
        influenced_pixels: influenced,
        total_pixels: total,
        influenced_fraction: influenced as f64 / total as f64,
        camouflage_fraction: (total - influenced) as f64 / total as f64,
        max_abs_weight_map,
    }
}

/// Coefficient dump: `axis,out_index,src_index,weight`, height axis (`row`)
/// first, then width axis (`col`), ascending indices.
pub fn coefficients_csv(op: &ScalingOperator) -> String {
    let mut out = String::from("axis,out_index,src_index,weight\n");
    for (axis, m) in [("row", &op.rows), ("col", &op.cols)] {
        for (i, taps) in m.rows().iter().enumerate() {
            for t in taps {
                let _ = writeln!(out, "{axis},{i},{},{}", t.src, t.weight);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(w: usize, h: usize) -> Dimensions {
        Dimensions::new(w, h).unwrap()
    }

    fn op(iw: usize, ih: usize, ow: usize, oh: usize, kind: KernelKind) -> ScalingOperator {
        ScalingOperator::new(d(iw, ih), d(ow, oh), kind, SamplingConvention::HalfPixel).unwrap()
    }

    #[test]
    fn fig3_nearest_selects_four_pixels() {
        let img = Image::from_fn(d(4, 4), 1, |r, c, _| (10 * r + c) as u8).unwrap();
        let out = apply(&op(4, 4, 2, 2, KernelKind::Nearest), &img).unwrap();
        // rows {0, 2} x cols {0, 2}
        assert_eq!(out.pixels(), &[0, 2, 20, 22]);
    }

    #[test]
    fn constant_preserved() {
        for kind in [KernelKind::Nearest, KernelKind::Bilinear, KernelKind::BICUBIC] {
            let img = Image::filled(d(13, 7), 3, 77).unwrap();
            let out = apply(&op(13, 7, 5, 3, kind), &img).unwrap();
            assert!(out.pixels().iter().all(|&v| v == 77), "{kind}");
        }
    }

    #[test]
    fn bilinear_support_four_to_two() {
        let s = support(&op(4, 4, 2, 2, KernelKind::Bilinear), 0, 0).unwrap();
        let cells: Vec<_> = s.iter().map(|t| (t.row, t.col, t.weight)).collect();
        assert_eq!(cells, vec![(0, 0, 0.25), (0, 1, 0.25), (1, 0, 0.25), (1, 1, 0.25)]);
        let nn = support(&op(9, 9, 4, 4, KernelKind::Nearest), 3, 1).unwrap();
        assert_eq!(nn.len(), 1);
        assert_eq!(nn[0].weight, 1.0);
    }

    #[test]
    fn support_out_of_range() {
        assert!(matches!(
            support(&op(4, 4, 2, 2, KernelKind::Nearest), 2, 0),
            Err(KernelError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn coverage_examples() {
        let s = coverage_stats(&op(4, 4, 2, 2, KernelKind::Nearest));
        assert_eq!(s.camouflage_fraction, 0.75);
        assert_eq!(s.influenced_pixels, 4);
        let id = coverage_stats(&op(5, 3, 5, 3, KernelKind::BICUBIC));
        assert_eq!(id.camouflage_fraction, 0.0);
        let wide = coverage_stats(&op(672, 224, 224, 224, KernelKind::Nearest));
        assert_eq!(wide.camouflage_fraction, 2.0 / 3.0);
        assert_eq!(wide.max_abs_weight_map.len(), 672 * 224);
        assert_eq!(wide.max_abs_weight_map[1], 1.0);
        assert_eq!(wide.max_abs_weight_map[0], 0.0);
    }

    #[test]
    fn apply_dimension_mismatch() {
        let img = Image::filled(d(5, 5), 1, 0).unwrap();
        assert!(matches!(
            apply(&op(4, 4, 2, 2, KernelKind::Nearest), &img),
            Err(KernelError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn csv_dump() {
        let csv = coefficients_csv(&op(4, 1, 2, 1, KernelKind::Bilinear));
        assert_eq!(
            csv,
            "axis,out_index,src_index,weight\nrow,0,0,1\ncol,0,0,0.5\ncol,0,1,0.5\ncol,1,2,0.5\ncol,1,3,0.5\n"
        );
    }

    #[test]
    fn parallel_and_sequential_identical() {
        let img = Image::from_fn(d(37, 23), 3, |r, c, ch| ((r * 7 + c * 13 + ch * 5) % 256) as u8).unwrap();
        let o = op(37, 23, 11, 9, KernelKind::BICUBIC);
        let a = apply_float_with(&o, &img.to_float(), Execution::Sequential).unwrap();
        let b = apply_float_with(&o, &img.to_float(), Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }
}
