use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::{KernelError, Result};

/// Default Keys parameter (Catmull-Rom).
pub const DEFAULT_BICUBIC_A: f64 = -0.5;

/// Interpolation family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelKind {
    Nearest,
    Bilinear,
    /// Keys cubic convolution with parameter `a` in `[-1, 0)`.
    Bicubic {
        a: f64,
    },
}

impl KernelKind {
    pub const BICUBIC: KernelKind = KernelKind::Bicubic { a: DEFAULT_BICUBIC_A };

    pub fn bicubic(a: f64) -> Result<Self> {
        let k = KernelKind::Bicubic { a };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelKind::Bicubic { a } if !(-1.0..0.0).contains(&a) => Err(KernelError::InvalidBicubic(a)),
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelKind::Nearest => "nearest",
            KernelKind::Bilinear => "bilinear",
            KernelKind::Bicubic { .. } => "bicubic",
        }
    }

    /// Taps may carry negative weight.
    pub fn is_monotone(&self) -> bool {
        !matches!(self, KernelKind::Bicubic { .. })
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelKind::Bicubic { a } if *a != DEFAULT_BICUBIC_A => write!(f, "bicubic(a={a})"),
            k => f.write_str(k.name()),
        }
    }
}

impl FromStr for KernelKind {
    type Err = KernelError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nearest" | "nn" => Ok(KernelKind::Nearest),
            "bilinear" | "linear" => Ok(KernelKind::Bilinear),
            "bicubic" | "cubic" => Ok(KernelKind::BICUBIC),
            other => Err(KernelError::UnknownKernel(other.to_string())),
        }
    }
}

/// Rule mapping output indices to continuous source coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingConvention {
    /// `s(i) = (i + 0.5) * in/out - 0.5`
    #[default]
    HalfPixel,
    /// `s(i) = i * (in - 1)/(out - 1)`, and `s = 0` for a single output.
    CornerAligned,
}

impl SamplingConvention {
    pub fn name(&self) -> &'static str {
        match self {
            SamplingConvention::HalfPixel => "half_pixel",
            SamplingConvention::CornerAligned => "corner_aligned",
        }
    }

    /// Source coordinate of output index `i` as an exact fraction
    /// `(numerator, denominator)`.
    fn source_coord(self, i: usize, in_len: usize, out_len: usize) -> (u128, u128) {
        let (i, n, m) = (i as u128, in_len as u128, out_len as u128);
        match self {
            SamplingConvention::HalfPixel => ((2 * i + 1) * n - m, 2 * m),
            SamplingConvention::CornerAligned if out_len == 1 => (0, 1),
            SamplingConvention::CornerAligned => (i * (n - 1), m - 1),
        }
    }
}

impl fmt::Display for SamplingConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SamplingConvention {
    type Err = KernelError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "half_pixel" | "half" => Ok(SamplingConvention::HalfPixel),
            "corner_aligned" | "corner" | "align_corners" => Ok(SamplingConvention::CornerAligned),
            other => Err(KernelError::UnknownConvention(other.to_string())),
        }
    }
}

/// One nonzero interpolation weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tap {
    pub src: usize,
    pub weight: f64,
}

/// Sparse `out_len x in_len` interpolation matrix for one axis. Each row's
/// taps are sorted by source index and carry nonzero weight.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix {
    in_len: usize,
    rows: Vec<Vec<Tap>>,
}

impl CoefficientMatrix {
    pub fn in_len(&self) -> usize {
        self.in_len
    }

    pub fn out_len(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, out_index: usize) -> &[Tap] {
        &self.rows[out_index]
    }

    pub fn rows(&self) -> &[Vec<Tap>] {
        &self.rows
    }

    /// Per-source flag: does any output read this index?
    pub fn influenced(&self) -> Vec<bool> {
        let mut hit = vec![false; self.in_len];
        for tap in self.rows.iter().flatten() {
            hit[tap.src] = true;
        }
        hit
    }

    /// Per-source largest `|weight|` over all rows (0 when unread).
    pub fn max_abs_weight(&self) -> Vec<f64> {
        let mut m = vec![0.0f64; self.in_len];
        for tap in self.rows.iter().flatten() {
            m[tap.src] = m[tap.src].max(tap.weight.abs());
        }
        m
    }

    /// True when no source index is read by two different outputs.
    pub fn is_disjoint(&self) -> bool {
        let mut owner = vec![usize::MAX; self.in_len];
        for (i, row) in self.rows.iter().enumerate() {
            for tap in row {
                if owner[tap.src] != usize::MAX && owner[tap.src] != i {
                    return false;
                }
                owner[tap.src] = i;
            }
        }
        true
    }

    /// Greedy coloring such that outputs sharing a color never share a
    /// source index. Returns `(color per output, color count)`.
    pub fn conflict_coloring(&self) -> (Vec<usize>, usize) {
        let mut src_colors: Vec<Vec<usize>> = vec![Vec::new(); self.in_len];
        let mut colors = Vec::with_capacity(self.rows.len());
        let mut count = 0;
        for row in &self.rows {
            let c = (0..)
                .find(|c| row.iter().all(|t| !src_colors[t.src].contains(c)))
                .unwrap();
            for t in row {
                src_colors[t.src].push(c);
            }
            colors.push(c);
            count = count.max(c + 1);
        }
        (colors, count)
    }
}

/// Keys cubic convolution kernel.
pub fn keys_cubic(x: f64, a: f64) -> f64 {
    let x = x.abs();
    if x <= 1.0 {
        ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0
    } else if x < 2.0 {
        ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a
    } else {
        0.0
    }
}

/// Builds the interpolation matrix mapping `in_len` samples to `out_len`.
pub fn build_axis(
    in_len: usize,
    out_len: usize,
    kind: KernelKind,
    conv: SamplingConvention,
) -> Result<CoefficientMatrix> {
    if in_len == 0 || out_len == 0 {
        return Err(KernelError::ZeroLength);
    }
    if out_len > in_len {
        return Err(KernelError::Upscaling { in_len, out_len });
    }
    kind.validate()?;

    let last = in_len - 1;
    let rows = (0..out_len)
        .map(|i| {
            let (num, den) = conv.source_coord(i, in_len, out_len);
            let base = (num / den) as usize;
            let frac = (num % den) as f64 / den as f64;
            match kind {
                KernelKind::Nearest => {
                    // round half down: ceil(s - 1/2) == ceil((2num - den) / 2den)
                    let x = 2 * num as i128 - den as i128;
                    let y = 2 * den as i128;
                    let idx = if x <= 0 { 0 } else { ((x + y - 1) / y) as usize };
                    vec![Tap {
                        src: idx.min(last),
                        weight: 1.0,
                    }]
                }
                KernelKind::Bilinear => {
                    if frac == 0.0 {
                        vec![Tap {
                            src: base.min(last),
                            weight: 1.0,
                        }]
                    } else {
                        merge_taps([(base, 1.0 - frac), (base + 1, frac)].into_iter(), last)
                    }
                }
                KernelKind::Bicubic { a } => {
                    let taps = (-1i64..=2).map(|k| {
                        let idx = (base as i64 + k).clamp(0, last as i64) as usize;
                        (idx, keys_cubic(frac - k as f64, a))
                    });
                    merge_taps(taps, last)
                }
            }
        })
        .collect();

    Ok(CoefficientMatrix { in_len, rows })
}

/// Clamps indices into range, sums duplicates, drops zeros and renormalizes
/// to unit sum.
fn merge_taps(taps: impl Iterator<Item = (usize, f64)>, last: usize) -> Vec<Tap> {
    let mut out: Vec<Tap> = Vec::with_capacity(4);
    for (src, weight) in taps {
        let src = src.min(last);
        match out.iter_mut().find(|t| t.src == src) {
            Some(t) => t.weight += weight,
            None => out.push(Tap { src, weight }),
        }
    }
    out.retain(|t| t.weight != 0.0);
    out.sort_by_key(|t| t.src);
    let sum: f64 = out.iter().map(|t| t.weight).sum();
    if sum != 1.0 {
        for t in &mut out {
            t.weight /= sum;
        }
    }
    out
}
