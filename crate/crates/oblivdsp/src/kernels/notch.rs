//! Kernel 6: notch mask — fixed binary plaintext mask zeroing the
//! near-zero-Doppler bins (which sit at D/2 after fftshift) in every
//! antenna-range block. Slots past the active span are zeroed too, so
//! downstream fold-based reductions see clean zeros.

use super::dft::DopplerLayout;
use crate::vm::{SlotVector, SlotVm, VmError};

/// The 0/1 mask: zero where |d − D/2| < width inside active blocks, zero
/// outside the active span, one elsewhere.
pub fn notch_mask(slots: usize, layout: &DopplerLayout, width: usize) -> Vec<f64> {
    let d = layout.chirps;
    let center = (d / 2) as i64;
    let mut mask = vec![0.0; slots];
    for b in 0..layout.blocks() {
        for c in 0..d {
            let notched = (c as i64 - center).abs() < width as i64;
            mask[b * d + c] = if notched { 0.0 } else { 1.0 };
        }
    }
    mask
}

/// Apply the mask: one plaintext multiply plus rescale. Depth 1.
pub fn k6_notch(
    vm: &mut SlotVm,
    spectrum: &SlotVector,
    layout: &DopplerLayout,
    width: usize,
) -> Result<SlotVector, VmError> {
    let mask = notch_mask(vm.slot_count, layout, width);
    let masked = vm.mul_pt(spectrum, &mask)?;
    vm.rescale(&masked)
}
