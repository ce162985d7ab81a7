//! Kernel 7: differential phase extraction via a low-order series on
//! consecutive-sample cross products.
//!
//! With w[t] = I[t] + jQ[t] near unit magnitude, the cross products
//! y[t] = Q[t]I[t−1] − I[t]Q[t−1] and x[t] = I[t]I[t−1] + Q[t]Q[t−1]
//! satisfy Δφ[t] = atan2(y, x). Order 1 returns y (one ct-ct level);
//! order 3 evaluates y·x² + c·y³ (three levels).
//!
//! At unit magnitude y = sin Δφ and x = cos Δφ, so y·x² + c·y³ expands
//! to Δφ + (c − 7/6)·Δφ³ + O(Δφ⁵): the cubic coefficient
//! [`ARCSIN_CUBIC`] = 7/6 cancels the cubic term exactly (the expression
//! becomes the order-3 arcsin series y + y³/6). The value −1/3 from the
//! plain arctan series is selectable for comparison; it assumes x is
//! held at exactly 1 rather than cos Δφ and overshoots the cubic
//! correction eightfold at unit magnitude.
//!
//! The cubic coefficient rides a second pair of FIR outputs whose taps
//! are pre-scaled by c (`i_cubic`, `q_cubic`), so no mid-circuit
//! plaintext constant is needed and every product stays at the nominal
//! scale. The near-unit-magnitude contract is the caller's: the public
//! per-deployment normalization is folded into the FIR taps one stage
//! earlier.

use crate::vm::{SlotVector, SlotVm, VmError};

/// Cubic coefficient that cancels the Δφ³ error term at unit magnitude.
pub const ARCSIN_CUBIC: f64 = 7.0 / 6.0;

/// Differential phase of a stride-packed I/Q series. Outputs occupy
/// slots t·stride for t ∈ [1, len); slot 0 wraps and is not meaningful.
/// For order 3 the cubic-scaled copies (inputs times the cubic
/// coefficient) must be supplied.
pub fn k7_taylor_phase(
    vm: &mut SlotVm,
    i_f: &SlotVector,
    q_f: &SlotVector,
    i_cubic: Option<&SlotVector>,
    q_cubic: Option<&SlotVector>,
    order: u8,
    stride: usize,
) -> Result<SlotVector, VmError> {
    let back = -(stride as i64);
    let ip = vm.rotate(i_f, back)?; // I[t-1] at slot t·stride
    let qp = vm.rotate(q_f, back)?;
    let a = vm.mul_ct(q_f, &ip)?;
    let b = vm.mul_ct(i_f, &qp)?;
    let y = vm.sub(&a, &b)?;
    match order {
        1 => Ok(y),
        3 => {
            let (i3, q3) = match (i_cubic, q_cubic) {
                (Some(i3), Some(q3)) => (i3, q3),
                _ => {
                    return Err(VmError::PlainLengthMismatch {
                        expected: 2,
                        got: 0,
                    });
                }
            };
            let ip3 = vm.rotate(i3, back)?;
            let qp3 = vm.rotate(q3, back)?;
            let a = vm.mul_ct(i_f, &ip)?;
            let b = vm.mul_ct(q_f, &qp)?;
            let x = vm.add(&a, &b)?;
            // y_cubic = c·y through the pre-scaled copies
            let a = vm.mul_ct(q_f, &ip3)?;
            let b = vm.mul_ct(i_f, &qp3)?;
            let y_cubic = vm.sub(&a, &b)?;
            let x2 = vm.mul_ct(&x, &x)?;
            let y2 = vm.mul_ct(&y, &y)?;
            let t1 = vm.mul_ct(&x2, &y)?;
            let t3 = vm.mul_ct(&y2, &y_cubic)?;
            vm.add(&t1, &t3)
        }
        other => panic!("taylor order {other} unsupported (1 or 3)"),
    }
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

    /// Run k7 on a unit-magnitude phase series and return Δφ estimates
    /// for t in [1, len).
    fn run(phases: &[f64], order: u8, cubic: f64) -> Vec<f64> {
        let mut vmx = vm(64);
        let i: Vec<f64> = phases.iter().map(|p| p.cos()).collect();
        let q: Vec<f64> = phases.iter().map(|p| p.sin()).collect();
        let iv = vmx.input_plain(&i);
        let qv = vmx.input_plain(&q);
        let i3 = vmx.input_plain(&i.iter().map(|v| v * cubic).collect::<Vec<_>>());
        let q3 = vmx.input_plain(&q.iter().map(|v| v * cubic).collect::<Vec<_>>());
        let out = k7_taylor_phase(&mut vmx, &iv, &qv, Some(&i3), Some(&q3), order, 1).unwrap();
        out.plain_values()[1..phases.len()].to_vec()
    }

    #[test]
    fn equal_consecutive_samples_give_zero_phase_step() {
        let phases = vec![0.7; 6];
        for order in [1u8, 3] {
            for v in run(&phases, order, ARCSIN_CUBIC) {
                assert!(v.abs() < 1e-12, "order {order}: {v}");
            }
        }
    }

    #[test]
    fn order3_error_bound_on_small_steps() {
        // sweep |Δφ| ≤ 0.2 at unit magnitude against the atan2 oracle
        let mut worst = 0.0f64;
        let mut step = -0.2f64;
        while step <= 0.2 {
            let phases: Vec<f64> = (0..8).map(|t| 0.3 + step * t as f64).collect();
            let est = run(&phases, 3, ARCSIN_CUBIC);
            for e in est {
                worst = worst.max((e - step).abs());
            }
            step += 0.01;
        }
        assert!(worst <= 5e-3, "worst order-3 error {worst}");
    }

    #[test]
    fn order3_strictly_dominates_order1_in_mid_range() {
        for step in [0.1f64, 0.2, 0.3, 0.4, 0.5] {
            let phases: Vec<f64> = (0..4).map(|t| step * t as f64).collect();
            let e3 = (run(&phases, 3, ARCSIN_CUBIC)[1] - step).abs();
            let e1 = (run(&phases, 1, ARCSIN_CUBIC)[1] - step).abs();
            assert!(e3 < e1, "step {step}: order3 {e3} !< order1 {e1}");
        }
    }

    #[test]
    fn plain_arctan_coefficient_overshoots_at_unit_magnitude() {
        // the -1/3 variant lands at sinΔ − (4/3)sin³Δ = Δ − 1.5Δ³ + O(Δ⁵)
        let step = 0.2f64;
        let phases: Vec<f64> = (0..4).map(|t| step * t as f64).collect();
        let est = run(&phases, 3, -1.0 / 3.0)[1];
        let predicted = step.sin() * step.cos().powi(2) - step.sin().powi(3) / 3.0;
        assert!((est - predicted).abs() < 1e-12);
        assert!((est - step).abs() > 5e-3); // why the default is 7/6
    }

    #[test]
    fn depth_is_three_or_one() {
        let phases = vec![0.1f64, 0.2, 0.3, 0.4];
        let mut vmx = vm(64);
        let i: Vec<f64> = phases.iter().map(|p| p.cos()).collect();
        let q: Vec<f64> = phases.iter().map(|p| p.sin()).collect();
        let iv = vmx.input_plain(&i);
        let qv = vmx.input_plain(&q);
        let i3 = vmx.input_plain(&i.iter().map(|v| v * ARCSIN_CUBIC).collect::<Vec<_>>());
        let q3 = vmx.input_plain(&q.iter().map(|v| v * ARCSIN_CUBIC).collect::<Vec<_>>());
        let o3 = k7_taylor_phase(&mut vmx, &iv, &qv, Some(&i3), Some(&q3), 3, 1).unwrap();
        assert_eq!(vmx.consumed(&o3), 3);
        let o1 = k7_taylor_phase(&mut vmx, &iv, &qv, None, None, 1, 1).unwrap();
        assert_eq!(vmx.consumed(&o1), 1);
    }

    #[test]
    fn order3_without_scaled_copies_is_an_error() {
        let mut vmx = vm(64);
        let iv = vmx.input_plain(&[1.0; 4]);
        let qv = vmx.input_plain(&[0.0; 4]);
        assert!(k7_taylor_phase(&mut vmx, &iv, &qv, None, None, 3, 1).is_err());
    }
}
