use super::{AttackSpec, CraftResult, Result};
use crate::exec::Execution;
use crate::imagecore::{self, FloatPlanes};
use crate::kernels::{self, support_unchecked, ScalingOperator};

/// Alternating projection for any kernel.
///
/// One iteration is a sweep over every output pixel, each moving its support
/// along the weight vector until the weighted sum hits the target, followed
/// by clamping the whole image to `[0, 255]`. Outputs whose supports overlap
/// are processed in separate passes, so the sweep is a deterministic
/// block-Kaczmarz step whatever the execution policy.
///
/// Stops as soon as the quantized image meets `out_tolerance`, or after
/// `max_iters` sweeps; the result reports whatever `out_linf` was reached.
pub fn craft_iterative(spec: &AttackSpec) -> Result<CraftResult> {
    craft_iterative_with(spec, Execution::default())
}

pub(crate) fn craft_iterative_with(spec: &AttackSpec, exec: Execution) -> Result<CraftResult> {
    spec.validate()?;
    let op = &spec.operator;
    let tol = spec.out_tolerance;
    let target = spec.target.to_float();
    let classes = color_classes(op);

    let mut x = spec.source.to_float();
    let mut iters = 0;
    loop {
        let y = kernels::apply_float_with(op, &x, exec)?;
        let residual = max_abs_residual(&y, &target);
        // rounding the input can move an output by at most Σ|w|/2 and the
        // output rounds by another 1/2, so only near-converged iterates are
        // worth quantizing and checking
        if residual <= f64::from(tol) + 0.5 {
            let crafted = x.to_image()?;
            let out = kernels::apply_with(op, &crafted, exec)?;
            if imagecore::linf_diff(&out, &spec.target)? <= tol {
                return CraftResult::measure(spec, crafted, iters);
            }
        }
        if iters >= spec.max_iters {
            break;
        }
        sweep(&mut x, &target, &classes, exec);
        iters += 1;
    }
    let crafted = x.to_image()?;
    CraftResult::measure(spec, crafted, iters)
}

/// One output pixel's linear constraint over its support.
struct Constraint {
    out: usize,
    idx: Vec<usize>,
    weights: Vec<f64>,
    norm_sq: f64,
}

/// Constraints grouped so that no two members of a group share a source
/// pixel.
fn color_classes(op: &ScalingOperator) -> Vec<Vec<Constraint>> {
    let (row_colors, nr) = op.rows().conflict_coloring();
    let (col_colors, nc) = op.cols().conflict_coloring();
    let width = op.input_dims().width;
    let out_w = op.output_dims().width;
    let mut classes: Vec<Vec<Constraint>> = (0..nr * nc).map(|_| Vec::new()).collect();
    for (i, &rc) in row_colors.iter().enumerate() {
        for (j, &cc) in col_colors.iter().enumerate() {
            let (idx, weights): (Vec<usize>, Vec<f64>) = support_unchecked(op, i, j)
                .map(|s| (s.row * width + s.col, s.weight))
                .unzip();
            let norm_sq = weights.iter().map(|w| w * w).sum();
            classes[rc * nc + cc].push(Constraint {
                out: i * out_w + j,
                idx,
                weights,
                norm_sq,
            });
        }
    }
    classes.retain(|c| !c.is_empty());
    classes
}

fn max_abs_residual(y: &FloatPlanes, target: &FloatPlanes) -> f64 {
    y.planes()
        .iter()
        .zip(target.planes())
        .flat_map(|(a, b)| a.iter().zip(b).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
}

fn sweep(x: &mut FloatPlanes, target: &FloatPlanes, classes: &[Vec<Constraint>], exec: Execution) {
    for c in 0..x.channels() {
        let t = target.plane(c);
        for class in classes {
            let plane = x.plane(c);
            let updates: Vec<Vec<f64>> = exec.map_range(class.len(), |n| {
                let con = &class[n];
                let sum: f64 = con.idx.iter().zip(&con.weights).map(|(&k, w)| w * plane[k]).sum();
                let step = (t[con.out] - sum) / con.norm_sq;
                con.idx
                    .iter()
                    .zip(&con.weights)
                    .map(|(&k, w)| plane[k] + w * step)
                    .collect()
            });
            let plane = x.plane_mut(c);
            for (con, vals) in class.iter().zip(updates) {
                for (&k, v) in con.idx.iter().zip(vals) {
                    plane[k] = v;
                }
            }
        }
        for v in x.plane_mut(c) {
            *v = v.clamp(0.0, 255.0);
        }
    }
}
