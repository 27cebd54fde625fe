use super::{AttackError, AttackMode, AttackSpec, CraftResult, Result};
use crate::kernels::KernelKind;

/// Overwrites the one source pixel each output reads with the target value.
/// Everything else, the camouflage region, is copied from the source.
pub fn craft_nearest(spec: &AttackSpec) -> Result<CraftResult> {
    spec.validate()?;
    let op = &spec.operator;
    if op.kind() != KernelKind::Nearest {
        return Err(AttackError::UnsupportedKernel {
            mode: AttackMode::ExactNn,
            kind: op.kind(),
        });
    }

    let mut crafted = spec.source.clone();
    let ch = crafted.channels();
    for (i, row_taps) in op.rows().rows().iter().enumerate() {
        let r = row_taps[0].src;
        for (j, col_taps) in op.cols().rows().iter().enumerate() {
            let c = col_taps[0].src;
            for k in 0..ch {
                crafted.set(r, c, k, spec.target.get(i, j, k));
            }
        }
    }
    CraftResult::measure(spec, crafted, 0)
}
