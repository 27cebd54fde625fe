//! Test-only oracles, written directly from the interpolation formulas and
//! sharing no code with the operator construction.

#![allow(dead_code)]

use downscale_attack::{Dimensions, Image, KernelKind, SamplingConvention};

pub fn dims(w: usize, h: usize) -> Dimensions {
    Dimensions::new(w, h).unwrap()
}

fn coord(i: usize, n_in: usize, n_out: usize, conv: SamplingConvention) -> f64 {
    match conv {
        SamplingConvention::HalfPixel => (i as f64 + 0.5) * (n_in as f64 / n_out as f64) - 0.5,
        SamplingConvention::CornerAligned => {
            if n_out == 1 {
                0.0
            } else {
                i as f64 * (n_in as f64 - 1.0) / (n_out as f64 - 1.0)
            }
        }
    }
}

fn keys(x: f64, a: f64) -> f64 {
    let x = x.abs();
    if x < 1.0 {
        (a + 2.0) * x.powi(3) - (a + 3.0) * x.powi(2) + 1.0
    } else if x < 2.0 {
        a * x.powi(3) - 5.0 * a * x.powi(2) + 8.0 * a * x - 4.0 * a
    } else {
        0.0
    }
}

/// (index, weight) list for one coordinate along one axis; no merging.
fn axis_weights(s: f64, n_in: usize, kind: KernelKind) -> Vec<(usize, f64)> {
    let clamp = |k: i64| k.clamp(0, n_in as i64 - 1) as usize;
    // snap float noise so exact integer/half coordinates stay exact
    let s = (s * 1e9).round() / 1e9;
    match kind {
        KernelKind::Nearest => {
            let f = s.floor();
            let idx = if s - f <= 0.5 { f } else { f + 1.0 };
            vec![(clamp(idx as i64), 1.0)]
        }
        KernelKind::Bilinear => {
            let f = s.floor();
            let t = s - f;
            vec![(clamp(f as i64), 1.0 - t), (clamp(f as i64 + 1), t)]
        }
        KernelKind::Bicubic { a } => {
            let f = s.floor();
            let t = s - f;
            let raw: Vec<(usize, f64)> = (-1i64..=2)
                .map(|k| (clamp(f as i64 + k), keys(t - k as f64, a)))
                .collect();
            let sum: f64 = raw.iter().map(|p| p.1).sum();
            raw.into_iter().map(|(i, w)| (i, w / sum)).collect()
        }
    }
}

/// Unquantized output value at (i, j, ch) by direct 2-D summation.
pub fn direct_interpolate(
    img: &Image,
    out: Dimensions,
    kind: KernelKind,
    conv: SamplingConvention,
    i: usize,
    j: usize,
    ch: usize,
) -> f64 {
    let sy = coord(i, img.height(), out.height, conv);
    let sx = coord(j, img.width(), out.width, conv);
    let wy = axis_weights(sy, img.height(), kind);
    let wx = axis_weights(sx, img.width(), kind);
    let mut acc = 0.0;
    for &(r, a) in &wy {
        for &(c, b) in &wx {
            acc += a * b * f64::from(img.get(r, c, ch));
        }
    }
    acc
}

pub const ALL_KINDS: [KernelKind; 3] = [KernelKind::Nearest, KernelKind::Bilinear, KernelKind::BICUBIC];
pub const ALL_CONVS: [SamplingConvention; 2] = [SamplingConvention::HalfPixel, SamplingConvention::CornerAligned];

/// Naive PSNR: explicit loops, no shared helpers.
pub fn naive_psnr(a: &Image, b: &Image) -> Option<f64> {
    let mut sum = 0.0f64;
    let mut n = 0usize;
    for r in 0..a.height() {
        for c in 0..a.width() {
            for ch in 0..a.channels() {
                let d = a.get(r, c, ch) as f64 - b.get(r, c, ch) as f64;
                sum += d * d;
                n += 1;
            }
        }
    }
    if sum == 0.0 {
        None
    } else {
        Some(10.0 * (255.0f64.powi(2) / (sum / n as f64)).log10())
    }
}

pub fn naive_linf(a: &Image, b: &Image) -> u8 {
    let mut m = 0i32;
    for r in 0..a.height() {
        for c in 0..a.width() {
            for ch in 0..a.channels() {
                m = m.max((a.get(r, c, ch) as i32 - b.get(r, c, ch) as i32).abs());
            }
        }
    }
    m as u8
}
