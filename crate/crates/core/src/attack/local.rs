use super::{AttackError, AttackMode, AttackSpec, CraftResult, Result};
use crate::exec::Execution;
use crate::imagecore::{quantize, FloatPlanes, Image};
use crate::kernels::{support_unchecked, KernelKind};

/// Per-output-pixel minimum-change solve for kernels with disjoint supports.
pub fn craft_local(spec: &AttackSpec) -> Result<CraftResult> {
    craft_local_with(spec, Execution::default())
}

pub(crate) fn craft_local_with(spec: &AttackSpec, exec: Execution) -> Result<CraftResult> {
    check_local(spec)?;
    let crafted = solve(spec, exec, true).into_image(spec)?;
    CraftResult::measure(spec, crafted, 0)
}

/// The unquantized LOCAL solution: every support's weighted sum equals its
/// (reachable) target value.
pub fn craft_local_float(spec: &AttackSpec) -> Result<FloatPlanes> {
    check_local(spec)?;
    let Solution::Float(p) = solve(spec, Execution::default(), false) else {
        unreachable!()
    };
    Ok(p)
}

fn check_local(spec: &AttackSpec) -> Result<()> {
    spec.validate()?;
    let kind = spec.operator.kind();
    if kind == KernelKind::Nearest {
        return Err(AttackError::UnsupportedKernel {
            mode: AttackMode::Local,
            kind,
        });
    }
    if !spec.operator.has_disjoint_supports() {
        return Err(AttackError::OverlappingSupports);
    }
    Ok(())
}

enum Solution {
    Float(FloatPlanes),
    Quantized(Vec<Vec<u8>>),
}

impl Solution {
    fn into_image(self, spec: &AttackSpec) -> Result<Image> {
        match self {
            Solution::Float(p) => Ok(p.to_image()?),
            Solution::Quantized(planes) => {
                let ch = planes.len();
                let n = spec.source.dims().area();
                let mut px = vec![0u8; n * ch];
                for (c, plane) in planes.iter().enumerate() {
                    for (i, &v) in plane.iter().enumerate() {
                        px[i * ch + c] = v;
                    }
                }
                Ok(Image::new(spec.source.dims(), ch, px)?)
            }
        }
    }
}

fn solve(spec: &AttackSpec, exec: Execution, quantized: bool) -> Solution {
    let op = &spec.operator;
    let source = spec.source.to_float();
    let width = op.input_dims().width;
    let out = op.output_dims();
    let ch = source.channels();

    let mut float_planes = source.clone().into_planes();
    let mut int_planes: Vec<Vec<u8>> = (0..ch)
        .map(|c| source.plane(c).iter().map(|&v| v as u8).collect())
        .collect();

    for c in 0..ch {
        let plane = source.plane(c);
        // one entry per output row: (flat source index, new value) for every
        // pixel in that row's supports
        let updates: Vec<Vec<(usize, f64)>> = exec.map_range(out.height, |i| {
            let mut row_updates = Vec::new();
            for j in 0..out.width {
                let taps: Vec<_> = support_unchecked(op, i, j).collect();
                let idx: Vec<usize> = taps.iter().map(|t| t.row * width + t.col).collect();
                let weights: Vec<f64> = taps.iter().map(|t| t.weight).collect();
                let values: Vec<f64> = idx.iter().map(|&k| plane[k]).collect();
                let target = f64::from(spec.target.get(i, j, c));
                let current: f64 = values.iter().zip(&weights).map(|(v, w)| v * w).sum();
                if quantized && quantize(current) == spec.target.get(i, j, c) {
                    // already rounds onto the target
                    row_updates.extend(idx.into_iter().zip(values));
                    continue;
                }
                let mut solved = project_onto_constraint(&values, &weights, target);
                if quantized {
                    solved = quantize_support(&solved, &weights, target);
                }
                row_updates.extend(idx.into_iter().zip(solved));
            }
            row_updates
        });
        for (k, v) in updates.into_iter().flatten() {
            if quantized {
                int_planes[c][k] = v as u8;
            } else {
                float_planes[c][k] = v;
            }
        }
    }

    if quantized {
        Solution::Quantized(int_planes)
    } else {
        Solution::Float(FloatPlanes::from_parts(op.input_dims(), float_planes))
    }
}

/// Nearest point to `values` (in L2) with `Σ weights·x = target` and every
/// `x` in `[0, 255]`.
///
/// The minimizer has the form `x_k = clamp(values_k + λ·w_k)`; the weighted
/// sum is nondecreasing and piecewise linear in `λ`, so `λ` is found exactly
/// by walking the clamp breakpoints. When the box makes `target` unreachable
/// the closest reachable sum is used.
pub fn project_onto_constraint(values: &[f64], weights: &[f64], target: f64) -> Vec<f64> {
    debug_assert_eq!(values.len(), weights.len());
    let at = |lambda: f64| -> Vec<f64> {
        values
            .iter()
            .zip(weights)
            .map(|(&x, &w)| (x + lambda * w).clamp(0.0, 255.0))
            .collect()
    };
    let sum_at = |lambda: f64| -> f64 { at(lambda).iter().zip(weights).map(|(x, w)| x * w).sum() };

    let start = sum_at(0.0);
    let gap = target - start;
    if gap == 0.0 {
        return at(0.0);
    }
    let dir = gap.signum();

    let mut breaks: Vec<f64> = values
        .iter()
        .zip(weights)
        .filter(|(_, &w)| w != 0.0)
        .flat_map(|(&x, &w)| [(0.0 - x) / w, (255.0 - x) / w])
        .map(|l| l * dir)
        .filter(|&l| l > 0.0)
        .collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let (mut lo, mut g_lo) = (0.0, start);
    for &b in &breaks {
        let g_b = sum_at(b * dir);
        if (g_b - target) * dir >= 0.0 {
            let t = if g_b == g_lo {
                0.0
            } else {
                (target - g_lo) / (g_b - g_lo)
            };
            return at((lo + t * (b - lo)) * dir);
        }
        lo = b;
        g_lo = g_b;
    }
    // every tap saturated: best reachable
    at(lo * dir)
}

/// Rounds a support to integers, then steps single pixels by one level
/// (largest |weight| first) while that brings the weighted sum closer to
/// rounding onto `target`.
fn quantize_support(values: &[f64], weights: &[f64], target: f64) -> Vec<f64> {
    const MAX_STEPS: usize = 64;
    let mut q: Vec<f64> = values.iter().map(|&v| f64::from(quantize(v))).collect();
    let mut order: Vec<usize> = (0..q.len()).collect();
    order.sort_by(|&a, &b| weights[b].abs().total_cmp(&weights[a].abs()));

    for _ in 0..MAX_STEPS {
        let sum: f64 = q.iter().zip(weights).map(|(x, w)| x * w).sum();
        let err = target - sum;
        if err.abs() < 0.5 - 1e-9 {
            break;
        }
        let step = order.iter().find_map(|&k| {
            let delta = err.signum() * weights[k].signum();
            let next = q[k] + delta;
            let improves = (err - delta * weights[k]).abs() < err.abs();
            ((0.0..=255.0).contains(&next) && improves).then_some((k, next))
        });
        match step {
            Some((k, next)) => q[k] = next,
            None => break,
        }
    }
    q
}
