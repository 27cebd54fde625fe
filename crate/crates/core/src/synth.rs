//! Deterministic synthetic images for calibration corpora, tests and
//! benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::imagecore::{quantize, Dimensions, Image};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent uniform intensities.
pub fn uniform_noise<R: Rng>(rng: &mut R, dims: Dimensions, channels: usize) -> Image {
    let px = (0..dims.area() * channels).map(|_| rng.random()).collect();
    Image::new(dims, channels, px).expect("shape is consistent")
}

/// Uniform intensities restricted to `[lo, hi]`.
pub fn banded_noise<R: Rng>(rng: &mut R, dims: Dimensions, channels: usize, lo: u8, hi: u8) -> Image {
    let px = (0..dims.area() * channels).map(|_| rng.random_range(lo..=hi)).collect();
    Image::new(dims, channels, px).expect("shape is consistent")
}

/// Linear ramp in a random direction with per-channel endpoints.
pub fn gradient<R: Rng>(rng: &mut R, dims: Dimensions, channels: usize) -> Image {
    let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let (dx, dy) = (angle.cos(), angle.sin());
    let ends: Vec<(f64, f64)> = (0..channels)
        .map(|_| (rng.random_range(0.0..255.0), rng.random_range(0.0..255.0)))
        .collect();
    let (w, h) = (dims.width as f64, dims.height as f64);
    let span = (dx.abs() * w + dy.abs() * h).max(1.0);
    let offset = dx.min(0.0) * w + dy.min(0.0) * h;
    Image::from_fn(dims, channels, |r, c, ch| {
        let t = ((c as f64 * dx + r as f64 * dy) - offset) / span;
        let (a, b) = ends[ch];
        quantize(a + (b - a) * t)
    })
    .expect("shape is consistent")
}

/// Sum of a few Gaussian blobs over a random background level.
pub fn gaussian_blobs<R: Rng>(rng: &mut R, dims: Dimensions, channels: usize) -> Image {
    let n = rng.random_range(2..6);
    let scale = dims.width.min(dims.height) as f64;
    let blobs: Vec<(f64, f64, f64, Vec<f64>)> = (0..n)
        .map(|_| {
            (
                rng.random_range(0.0..dims.height as f64),
                rng.random_range(0.0..dims.width as f64),
                rng.random_range(0.1..0.4) * scale,
                (0..channels).map(|_| rng.random_range(-150.0..150.0)).collect(),
            )
        })
        .collect();
    let base: Vec<f64> = (0..channels).map(|_| rng.random_range(60.0..200.0)).collect();
    Image::from_fn(dims, channels, |r, c, ch| {
        let v = blobs.iter().fold(base[ch], |acc, (br, bc, s, amp)| {
            let d2 = (r as f64 - br).powi(2) + (c as f64 - bc).powi(2);
            acc + amp[ch] * (-d2 / (2.0 * s * s)).exp()
        });
        quantize(v)
    })
    .expect("shape is consistent")
}

/// `count` benign images cycling through gradients, blobs and noise.
pub fn benign_corpus(dims: Dimensions, channels: usize, count: usize, seed: u64) -> Vec<Image> {
    let mut rng = rng(seed);
    (0..count)
        .map(|i| match i % 3 {
            0 => gradient(&mut rng, dims, channels),
            1 => gaussian_blobs(&mut rng, dims, channels),
            _ => uniform_noise(&mut rng, dims, channels),
        })
        .collect()
}

/// Bright two-tone checkerboard with `cell`-pixel squares; a stand-in for a
/// light camouflage picture.
pub fn bright_checkerboard(dims: Dimensions, channels: usize, cell: usize) -> Image {
    let cell = cell.max(1);
    Image::from_fn(dims, channels, |r, c, _| {
        if (r / cell + c / cell).is_multiple_of(2) {
            250
        } else {
            205
        }
    })
    .expect("shape is consistent")
}

/// Camouflage / target pair with disjoint intensity ranges: bright textured
/// source, dark target with a mid-gray shape.
pub fn contrast_pair<R: Rng>(
    rng: &mut R,
    source_dims: Dimensions,
    target_dims: Dimensions,
    channels: usize,
) -> (Image, Image) {
    let source = if rng.random_bool(0.5) {
        bright_checkerboard(source_dims, channels, rng.random_range(1..8))
    } else {
        banded_noise(rng, source_dims, channels, 190, 255)
    };
    let (cr, cc) = (
        rng.random_range(0.0..target_dims.height as f64),
        rng.random_range(0.0..target_dims.width as f64),
    );
    let radius = rng.random_range(0.15..0.4) * target_dims.width.min(target_dims.height) as f64;
    let noise: Vec<u8> = (0..target_dims.area() * channels)
        .map(|_| rng.random_range(0..24))
        .collect();
    let target = Image::from_fn(target_dims, channels, |r, c, ch| {
        let inside = (r as f64 - cr).powi(2) + (c as f64 - cc).powi(2) < radius * radius;
        let base = if inside { 110 } else { 10 };
        base + noise[(r * target_dims.width + c) * channels + ch]
    })
    .expect("shape is consistent");
    (source, target)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_for_seed() {
        let d = Dimensions::new(17, 9).unwrap();
        assert_eq!(benign_corpus(d, 3, 6, 7), benign_corpus(d, 3, 6, 7));
        assert_ne!(benign_corpus(d, 3, 6, 7), benign_corpus(d, 3, 6, 8));
    }

    #[test]
    fn contrast_pair_ranges() {
        let mut r = rng(3);
        for _ in 0..10 {
            let (s, t) = contrast_pair(
                &mut r,
                Dimensions::new(30, 10).unwrap(),
                Dimensions::new(10, 10).unwrap(),
                3,
            );
            assert!(s.pixels().iter().all(|&v| v >= 190));
            assert!(t.pixels().iter().all(|&v| v < 140));
        }
    }
}
