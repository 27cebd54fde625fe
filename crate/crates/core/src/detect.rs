//! Mitigations: input-size policy, robust-kernel comparison and
//! histogram-change detection.
//!
//! Detection compares the per-channel color histogram of an input with that
//! of its downscaled version. Benign content keeps roughly the same intensity
//! distribution under interpolation; a crafted image whose camouflage is
//! discarded by the resize does not.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::imagecore::{Dimensions, Image};
use crate::kernels::{self, KernelError, KernelKind, ScalingOperator};

/// Default verdict threshold: [`calibrate_threshold`] on
/// `synth::benign_corpus(672x224, 3 channels, 20 images, seed 42)` under the
/// bilinear half-pixel 672x224 -> 224x224 operator. Geometries where every
/// source pixel is read (e.g. 2x bilinear) smooth noise enough to need a
/// higher value; calibrate on representative data for those.
pub const DEFAULT_THRESHOLD: f64 = 0.05;

/// Added on top of the largest benign distance (as a factor).
pub const CALIBRATION_MARGIN: f64 = 1.2;

/// Lower bound for calibrated thresholds.
pub const CALIBRATION_FLOOR: f64 = 0.05;

#[derive(Debug, Error)]
pub enum DetectError {
    #[error("bins per channel must divide 256 and lie in [2, 256], got {0}")]
    InvalidBins(usize),
    #[error("histogram bin counts differ: {0} vs {1}")]
    BinMismatch(usize, usize),
    #[error("channel counts differ: {0} vs {1}")]
    ChannelMismatch(usize, usize),
    #[error("size policy must allow at least one dimension")]
    EmptyPolicy,
    #[error("calibration corpus is empty")]
    EmptyCorpus,
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

pub type Result<T> = std::result::Result<T, DetectError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HistogramConfig {
    bins_per_channel: usize,
}

impl HistogramConfig {
    pub fn new(bins_per_channel: usize) -> Result<Self> {
        if !(2..=256).contains(&bins_per_channel) || 256 % bins_per_channel != 0 {
            return Err(DetectError::InvalidBins(bins_per_channel));
        }
        Ok(Self { bins_per_channel })
    }

    pub fn bins_per_channel(&self) -> usize {
        self.bins_per_channel
    }
}

impl Default for HistogramConfig {
    fn default() -> Self {
        Self { bins_per_channel: 32 }
    }
}

/// Normalized histogram per channel; each vector sums to 1.
pub fn color_histogram(img: &Image, cfg: &HistogramConfig) -> Vec<Vec<f64>> {
    let ch = img.channels();
    let bins = cfg.bins_per_channel;
    let width = 256 / bins;
    let mut counts = vec![vec![0u64; bins]; ch];
    for px in img.pixels().chunks_exact(ch) {
        for (c, &v) in px.iter().enumerate() {
            counts[c][usize::from(v) / width] += 1;
        }
    }
    let n = img.dims().area() as f64;
    counts
        .into_iter()
        .map(|h| h.into_iter().map(|k| k as f64 / n).collect())
        .collect()
}

/// Total-variation distance `½ Σ |h1 − h2|`.
pub fn hist_distance(h1: &[f64], h2: &[f64]) -> Result<f64> {
    if h1.len() != h2.len() {
        return Err(DetectError::BinMismatch(h1.len(), h2.len()));
    }
    let d = 0.5 * h1.iter().zip(h2).map(|(a, b)| (a - b).abs()).sum::<f64>();
    Ok(d.clamp(0.0, 1.0))
}

/// Per-channel distances between the histograms of `a` and `b`.
pub fn channel_distances(a: &Image, b: &Image, cfg: &HistogramConfig) -> Result<Vec<f64>> {
    if a.channels() != b.channels() {
        return Err(DetectError::ChannelMismatch(a.channels(), b.channels()));
    }
    let ha = color_histogram(a, cfg);
    let hb = color_histogram(b, cfg);
    ha.iter().zip(&hb).map(|(x, y)| hist_distance(x, y)).collect()
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Benign,
    Suspicious,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Benign => "BENIGN",
            Verdict::Suspicious => "SUSPICIOUS",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionReport {
    pub hist_distance_per_channel: Vec<f64>,
    pub hist_distance_max: f64,
    /// Mean absolute difference (intensity levels) between the configured
    /// kernel's output and a bicubic reference of the same geometry.
    pub robust_residual: f64,
    pub threshold: f64,
    pub verdict: Verdict,
}

/// Scales `input` with `op` and flags it when the histogram moves by more
/// than `threshold` in any channel.
pub fn detect_scaling_attack(
    input: &Image,
    op: &ScalingOperator,
    cfg: &HistogramConfig,
    threshold: f64,
) -> Result<DetectionReport> {
    let scaled = kernels::apply(op, input)?;
    let per_channel = channel_distances(input, &scaled, cfg)?;
    let max = max_of(&per_channel);

    let reference = match op.kind() {
        KernelKind::Bicubic { .. } => scaled.clone(),
        _ => kernels::apply(&op.with_kind(KernelKind::BICUBIC)?, input)?,
    };
    let robust_residual = scaled
        .pixels()
        .iter()
        .zip(reference.pixels())
        .map(|(&a, &b)| f64::from(a.abs_diff(b)))
        .sum::<f64>()
        / scaled.pixels().len() as f64;

    Ok(DetectionReport {
        hist_distance_per_channel: per_channel,
        hist_distance_max: max,
        robust_residual,
        threshold,
        verdict: if max > threshold {
            Verdict::Suspicious
        } else {
            Verdict::Benign
        },
    })
}

/// Which input sizes a pipeline accepts without rescaling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SizePolicy {
    /// Accept only inputs already at the model size.
    ExactMatch(Dimensions),
    /// Accept any of an explicit, non-empty set of sizes.
    Allowed(BTreeSet<Dimensions>),
}

impl SizePolicy {
    pub fn exact(model: Dimensions) -> Self {
        SizePolicy::ExactMatch(model)
    }

    pub fn allowed(dims: impl IntoIterator<Item = Dimensions>) -> Result<Self> {
        let set: BTreeSet<_> = dims.into_iter().collect();
        if set.is_empty() {
            return Err(DetectError::EmptyPolicy);
        }
        Ok(SizePolicy::Allowed(set))
    }

    fn admits(&self, dims: Dimensions) -> bool {
        match self {
            SizePolicy::ExactMatch(m) => *m == dims,
            SizePolicy::Allowed(set) => set.contains(&dims),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PolicyDecision {
    Accept,
    Reject(String),
}

pub fn enforce_size_policy(img: &Image, policy: &SizePolicy) -> PolicyDecision {
    let dims = img.dims();
    if policy.admits(dims) {
        return PolicyDecision::Accept;
    }
    let reason = match policy {
        SizePolicy::ExactMatch(m) => format!("input {dims} does not match model size {m}"),
        SizePolicy::Allowed(set) => {
            let list: Vec<String> = set.iter().map(ToString::to_string).collect();
            format!("input {dims} not in allowed sizes [{}]", list.join(", "))
        }
    };
    PolicyDecision::Reject(reason)
}

/// Largest histogram distance over a benign corpus, times
/// [`CALIBRATION_MARGIN`], floored at [`CALIBRATION_FLOOR`].
pub fn calibrate_threshold(benign_corpus: &[Image], op: &ScalingOperator, cfg: &HistogramConfig) -> Result<f64> {
    if benign_corpus.is_empty() {
        return Err(DetectError::EmptyCorpus);
    }
    let mut worst = 0.0f64;
    for img in benign_corpus {
        let scaled = kernels::apply(op, img)?;
        worst = worst.max(max_of(&channel_distances(img, &scaled, cfg)?));
    }
    Ok((worst * CALIBRATION_MARGIN).max(CALIBRATION_FLOOR))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::SamplingConvention;

    fn d(w: usize, h: usize) -> Dimensions {
        Dimensions::new(w, h).unwrap()
    }

    #[test]
    fn bins_validated() {
        assert!(HistogramConfig::new(32).is_ok());
        assert!(HistogramConfig::new(256).is_ok());
        assert!(HistogramConfig::new(2).is_ok());
        for bad in [0, 1, 3, 48, 512] {
            assert!(HistogramConfig::new(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn constant_zero_fills_bin_zero() {
        let h = color_histogram(&Image::filled(d(4, 4), 3, 0).unwrap(), &HistogramConfig::default());
        for ch in h {
            assert_eq!(ch[0], 1.0);
            assert_eq!(ch.iter().sum::<f64>(), 1.0);
        }
    }

    #[test]
    fn ramp_is_flat() {
        let img = Image::from_fn(d(256, 2), 1, |_, c, _| c as u8).unwrap();
        let h = color_histogram(&img, &HistogramConfig::default());
        assert!(h[0].iter().all(|&v| v == 1.0 / 32.0));
    }

    #[test]
    fn tv_distance_edges() {
        let a = [0.5, 0.5, 0.0, 0.0];
        let b = [0.0, 0.0, 0.25, 0.75];
        assert_eq!(hist_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(hist_distance(&a, &b).unwrap(), 1.0);
        assert!(matches!(hist_distance(&a, &[1.0]), Err(DetectError::BinMismatch(4, 1))));
    }

    #[test]
    fn identity_operator_is_benign() {
        let img = Image::from_fn(d(8, 8), 1, |r, c, _| (r * 30 + c) as u8).unwrap();
        let op = ScalingOperator::identity(img.dims(), KernelKind::Bilinear).unwrap();
        let rep = detect_scaling_attack(&img, &op, &HistogramConfig::default(), 0.0).unwrap();
        assert_eq!(rep.hist_distance_max, 0.0);
        assert_eq!(rep.verdict, Verdict::Benign);
    }

    #[test]
    fn bicubic_residual_is_zero() {
        let img = Image::from_fn(d(12, 9), 3, |r, c, ch| (r * 17 + c * 9 + ch) as u8).unwrap();
        let op = ScalingOperator::new(img.dims(), d(5, 4), KernelKind::BICUBIC, SamplingConvention::HalfPixel).unwrap();
        let rep = detect_scaling_attack(&img, &op, &HistogramConfig::default(), 0.35).unwrap();
        assert_eq!(rep.robust_residual, 0.0);
    }

    #[test]
    fn size_policy() {
        let model = d(224, 224);
        let ok = Image::filled(model, 3, 0).unwrap();
        let wide = Image::filled(d(672, 224), 3, 0).unwrap();
        let p = SizePolicy::exact(model);
        assert_eq!(enforce_size_policy(&ok, &p), PolicyDecision::Accept);
        assert!(matches!(enforce_size_policy(&wide, &p), PolicyDecision::Reject(_)));
        assert!(matches!(
            SizePolicy::allowed(std::iter::empty()),
            Err(DetectError::EmptyPolicy)
        ));
        let set = SizePolicy::allowed([d(672, 224), d(10, 10)]).unwrap();
        assert_eq!(enforce_size_policy(&wide, &set), PolicyDecision::Accept);
        assert!(matches!(enforce_size_policy(&ok, &set), PolicyDecision::Reject(_)));
    }

    #[test]
    fn calibration_floor_and_margin() {
        let op = ScalingOperator::new(d(8, 8), d(4, 4), KernelKind::Nearest, SamplingConvention::HalfPixel).unwrap();
        let cfg = HistogramConfig::default();
        let consts = vec![
            Image::filled(d(8, 8), 1, 3).unwrap(),
            Image::filled(d(8, 8), 1, 200).unwrap(),
        ];
        assert_eq!(calibrate_threshold(&consts, &op, &cfg).unwrap(), CALIBRATION_FLOOR);
        assert!(matches!(
            calibrate_threshold(&[], &op, &cfg),
            Err(DetectError::EmptyCorpus)
        ));

        // left half black, right half white columns alternating: NN keeps even cols
        let stripes = Image::from_fn(d(8, 8), 1, |_, c, _| if c % 2 == 0 { 0 } else { 255 }).unwrap();
        let t = calibrate_threshold(&[stripes], &op, &cfg).unwrap();
        assert!((t - 0.5 * CALIBRATION_MARGIN).abs() < 1e-12);
    }

    #[test]
    fn report_json_field_names() {
        let rep = DetectionReport {
            hist_distance_per_channel: vec![0.25],
            hist_distance_max: 0.25,
            robust_residual: 1.5,
            threshold: 0.2,
            verdict: Verdict::Suspicious,
        };
        let v = serde_json::to_value(&rep).unwrap();
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        assert_eq!(
            keys,
            [
                "hist_distance_max",
                "hist_distance_per_channel",
                "robust_residual",
                "threshold",
                "verdict"
            ]
        );
        assert_eq!(v["verdict"], "SUSPICIOUS");
    }
}
