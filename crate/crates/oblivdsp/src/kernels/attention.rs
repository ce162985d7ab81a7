//! Kernel 2: soft power attention — the branch-free replacement for CFAR
//! thresholding and hard argmax.

use super::bsgs::fold_stride;
use crate::vm::{SlotVector, SlotVm, VmError};

/// Output of the range-profile variant: power-weighted statistics with
/// slot 0 of `numer` holding N = Σ r·w_r and slot 0 of `denom` holding
/// D = Σ w_r; the client recovers r̂ = N/D after decryption.
pub struct K2Output {
    pub numer: SlotVector,
    pub denom: SlotVector,
    /// The sharpened weights w_r = E_r^γ (diagnostics and downstream use).
    pub weights: SlotVector,
}

/// Raise the first `count` slots to the γ-th power by repeated squaring.
/// γ must be a power of two; consumes log2(γ) levels.
fn sharpen(vm: &mut SlotVm, v: &SlotVector, gamma: u32) -> Result<SlotVector, VmError> {
    debug_assert!(gamma.is_power_of_two() && gamma >= 1);
    let mut w = v.clone();
    for _ in 0..gamma.trailing_zeros() {
        w = vm.mul_ct(&w, &w)?;
    }
    Ok(w)
}

/// Soft attention over an energy profile in slots [0, range_bins).
/// Depth: log2(γ) squarings; the index-ramp and mask multiplies are
/// plaintext multiplies without rescale (the outputs go straight to the
/// client), so they cost no level.
pub fn k2_soft_attention(
    vm: &mut SlotVm,
    energy: &SlotVector,
    range_bins: usize,
    gamma: u32,
) -> Result<K2Output, VmError> {
    let w = sharpen(vm, energy, gamma)?;
    let slots = vm.slot_count;
    let mut ramp = vec![0.0; slots];
    let mut mask = vec![0.0; slots];
    for r in 0..range_bins {
        ramp[r] = r as f64;
        mask[r] = 1.0;
    }
    let numer_terms = vm.mul_pt(&w, &ramp)?;
    let denom_terms = vm.mul_pt(&w, &mask)?;
    let numer = fold_stride(vm, &numer_terms, 1, range_bins)?;
    let denom = fold_stride(vm, &denom_terms, 1, range_bins)?;
    Ok(K2Output {
        numer,
        denom,
        weights: w,
    })
}

/// Doppler-domain variant: per-Doppler-bin sums across antennas and range
/// (rotations and adds, depth-free), γ sharpening (log2 γ squarings),
/// weights replicated across all blocks by the same fold, then multiplied
/// into the power spectrum (one ct-ct level). Depth log2(γ) + 1.
///
/// `power` must be zero outside the active A·R·D span (the notch mask
/// guarantees this in the pipeline) and the slot count must be a multiple
/// of D.
pub fn k2_doppler_soft_power(
    vm: &mut SlotVm,
    power: &SlotVector,
    chirps: usize,
    gamma: u32,
) -> Result<SlotVector, VmError> {
    debug_assert_eq!(vm.slot_count % chirps, 0);
    // every slot j ends up holding s[j mod D] = Σ_{a,r} P[a,r, j mod D]
    let sums = fold_stride(vm, power, chirps, vm.slot_count / chirps)?;
    let w = sharpen(vm, &sums, gamma)?;
    vm.mul_ct(&w, power)
}
