//! Kernel 4: soft I/Q extraction of the highest-energy bin.
//!
//! A per-frame energy mask m = (Re²+Im²)^{P_φ} concentrates on the
//! dominant range bin without any data-dependent selection; the
//! mask-weighted sums I[t] = Σ_r m_r·Re_r and Q[t] = Σ_r m_r·Im_r are
//! reduced across the R bins by rotations. Outputs are packed with frame
//! t at slot t·R (the off-stride slots carry fold partials that
//! downstream plaintext operands mask away).

use super::bsgs::{assemble_frames, fold_stride};
use super::energy::k1_power;
use crate::vm::{SlotVector, SlotVm, VmError};

/// Pipeline form: operates on pre-assembled frame-major packed inputs,
/// reusing the |z|² map already computed by k1. Consumes
/// log2(P_φ) + 1 levels beyond the shared |z|².
pub fn k4_soft_iq_assembled(
    vm: &mut SlotVm,
    re_packed: &SlotVector,
    im_packed: &SlotVector,
    power: &SlotVector,
    range_bins: usize,
    p_phi: u32,
) -> Result<(SlotVector, SlotVector), VmError> {
    debug_assert!(p_phi.is_power_of_two() && p_phi >= 1);
    let mut mask = power.clone();
    for _ in 0..p_phi.trailing_zeros() {
        mask = vm.mul_ct(&mask, &mask)?;
    }
    let i_terms = vm.mul_ct(&mask, re_packed)?;
    let q_terms = vm.mul_ct(&mask, im_packed)?;
    let i = fold_stride(vm, &i_terms, 1, range_bins)?;
    let q = fold_stride(vm, &q_terms, 1, range_bins)?;
    Ok((i, q))
}

/// Standalone form per the kernel contract: takes the per-frame streams,
/// assembles them, and computes the full circuit. Depth
/// 1 + log2(P_φ) + 1.
pub fn k4_soft_iq(
    vm: &mut SlotVm,
    re_frames: &[SlotVector],
    im_frames: &[SlotVector],
    range_bins: usize,
    p_phi: u32,
) -> Result<(SlotVector, SlotVector), VmError> {
    let re = assemble_frames(vm, re_frames, range_bins)?;
    let im = assemble_frames(vm, im_frames, range_bins)?;
    let power = k1_power(vm, &re, &im)?;
    k4_soft_iq_assembled(vm, &re, &im, &power, range_bins, p_phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ckks::CkksParams;

    fn vm(slots: usize) -> SlotVm {
        let mut p = CkksParams::desk(11);
        p.ring_dim = 64;
        SlotVm::exact_sim(&p, slots, 0)
    }

    #[test]
    fn single_bin_matches_closed_form() {
        // z_k = a + jb alone → I = (a²+b²)^{P}·a, Q = (a²+b²)^{P}·b
        let (a, b) = (0.6, -0.3);
        let mut re = vec![0.0; 4];
        let mut im = vec![0.0; 4];
        re[2] = a;
        im[2] = b;
        let mut vm = vm(32);
        let rf = vec![vm.input_plain(&re)];
        let qf = vec![vm.input_plain(&im)];
        let (i, q) = k4_soft_iq(&mut vm, &rf, &qf, 4, 2).unwrap();
        let m = (a * a + b * b).powi(2);
        assert!((i.plain_values()[0] - m * a).abs() < 1e-12);
        assert!((q.plain_values()[0] - m * b).abs() < 1e-12);
    }

    #[test]
    fn zero_frame_gives_zero_iq() {
        let mut vm = vm(32);
        let rf = vec![vm.input_plain(&[0.0; 4])];
        let qf = vec![vm.input_plain(&[0.0; 4])];
        let (i, q) = k4_soft_iq(&mut vm, &rf, &qf, 4, 2).unwrap();
        assert_eq!(i.plain_values()[0], 0.0);
        assert_eq!(q.plain_values()[0], 0.0);
    }

    #[test]
    fn dominant_bin_phase_within_tolerance() {
        // two bins at 10:1 amplitude, P_φ = 2: the extracted phase sits
        // within 0.02 rad of the dominant bin's phase
        let phase_dom = 0.8f64;
        let phase_weak = 2.5f64;
        let r = 8usize;
        let mut re = vec![0.0; r];
        let mut im = vec![0.0; r];
        re[3] = phase_dom.cos();
        im[3] = phase_dom.sin();
        re[6] = 0.1 * phase_weak.cos();
        im[6] = 0.1 * phase_weak.sin();
        let mut vm = vm(32);
        let rf = vec![vm.input_plain(&re)];
        let qf = vec![vm.input_plain(&im)];
        let (i, q) = k4_soft_iq(&mut vm, &rf, &qf, r, 2).unwrap();
        let got = q.plain_values()[0].atan2(i.plain_values()[0]);
        // oracle: mask-weighted sum then atan2
        let m = |re: f64, im: f64| (re * re + im * im).powi(2);
        let oi: f64 = m(re[3], im[3]) * re[3] + m(re[6], im[6]) * re[6];
        let oq: f64 = m(re[3], im[3]) * im[3] + m(re[6], im[6]) * im[6];
        assert!((got - oq.atan2(oi)).abs() < 1e-12);
        assert!(
            (got - phase_dom).abs() < 0.02,
            "phase err {}",
            (got - phase_dom).abs()
        );
    }

    #[test]
    fn frames_land_on_stride_slots() {
        let mut vm = vm(32);
        let frames_re: Vec<_> = (0..3)
            .map(|t| {
                let mut v = vec![0.0; 4];
                v[0] = 0.1 * (t + 1) as f64;
                vm.input_plain(&v)
            })
            .collect();
        let frames_im: Vec<_> = (0..3).map(|_| vm.input_plain(&[0.0; 4])).collect();
        let (i, _q) = k4_soft_iq(&mut vm, &frames_re, &frames_im, 4, 2).unwrap();
        for t in 0..3 {
            let a = 0.1 * (t + 1) as f64;
            let expect = a.powi(4) * a; // (a²)² · a
            assert!(
                (i.plain_values()[4 * t] - expect).abs() < 1e-12,
                "frame {t}: {} vs {expect}",
                i.plain_values()[4 * t]
            );
        }
    }

    #[test]
    fn depth_is_log2_pphi_plus_two() {
        let mut vm1 = vm(32);
        let rf = vec![vm1.input_plain(&[0.5; 4])];
        let qf = vec![vm1.input_plain(&[0.5; 4])];
        let (i, _) = k4_soft_iq(&mut vm1, &rf, &qf, 4, 2).unwrap();
        assert_eq!(vm1.consumed(&i), 3); // 1 (|z|²) + 1 (square) + 1 (⊙z)

        let mut vm2 = vm(32);
        let rf = vec![vm2.input_plain(&[0.5; 4])];
        let qf = vec![vm2.input_plain(&[0.5; 4])];
        let (i, _) = k4_soft_iq(&mut vm2, &rf, &qf, 4, 4).unwrap();
        assert_eq!(vm2.consumed(&i), 4); // 1 + 2 + 1
    }
}
