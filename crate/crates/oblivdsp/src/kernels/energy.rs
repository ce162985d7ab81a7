//! Kernel 1: energy integration.

use super::bsgs::{assemble_frames, fold_stride};
use crate::vm::{SlotVector, SlotVm, VmError};

/// Slot-wise squared magnitude |z|² = re² + im². Depth 1.
pub fn k1_power(vm: &mut SlotVm, re: &SlotVector, im: &SlotVector) -> Result<SlotVector, VmError> {
    let rr = vm.mul_ct(re, re)?;
    let ii = vm.mul_ct(im, im)?;
    vm.add(&rr, &ii)
}

/// Per-bin energy integrated over a stream of F frames, each packed in
/// the first `range_bins` slots: slot r of the result holds
/// Σ_t Re²+Im². Depth 1 (one squaring level; the frame accumulation is
/// rotations and adds).
///
/// Slots at r ≥ range_bins hold partial fold sums; consumers mask them
/// with their own plaintext operands.
pub fn k1_energy(
    vm: &mut SlotVm,
    re_frames: &[SlotVector],
    im_frames: &[SlotVector],
    range_bins: usize,
) -> Result<SlotVector, VmError> {
    if re_frames.len() != im_frames.len() {
        return Err(VmError::PlainLengthMismatch {
            expected: re_frames.len(),
            got: im_frames.len(),
        });
    }
    let re = assemble_frames(vm, re_frames, range_bins)?;
    let im = assemble_frames(vm, im_frames, range_bins)?;
    let sq = k1_power(vm, &re, &im)?;
    // fold frame blocks down onto the first block
    let count = vm.slot_count / range_bins;
    debug_assert!(count.is_power_of_two());
    fold_stride(vm, &sq, range_bins, count)
}
