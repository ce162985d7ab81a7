//! Kernel 5: FIR filtering over packed time series.
//!
//! Two interchangeable realizations of y = T·x with public taps:
//! a Toeplitz matrix-vector product through the BSGS diagonal machinery,
//! and plain weighted accumulation over slot rotations. Both consume one
//! level (a plaintext multiply plus rescale) and agree slot-for-slot.

use super::bsgs::{bsgs_matvec, DiagMatrix};
use crate::vm::{SlotVector, SlotVm, VmError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FirImpl {
    Toeplitz,
    RotationAccumulation,
}

/// Centered linear-phase taps plus the public normalization folded in.
#[derive(Clone, Debug)]
pub struct FirTaps {
    /// Odd-length impulse response, center tap at index (len-1)/2.
    pub coeffs: Vec<f64>,
}

impl FirTaps {
    pub fn new(coeffs: Vec<f64>) -> Self {
        assert!(coeffs.len() % 2 == 1, "taps must have odd length");
        FirTaps { coeffs }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        FirTaps {
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn half(&self) -> i64 {
        (self.coeffs.len() as i64 - 1) / 2
    }
}

/// Windowed-sinc bandpass design (Hamming window), amplitude-normalized
/// so the pass-band center has unit gain. Taps are designed offline in
/// the sense that they are a pure function of public configuration.
pub fn design_bandpass(taps: usize, low_hz: f64, high_hz: f64, sample_rate: f64) -> FirTaps {
    assert!(taps % 2 == 1);
    assert!(low_hz < high_hz && high_hz < sample_rate / 2.0);
    let m = (taps - 1) as f64 / 2.0;
    let fl = low_hz / sample_rate;
    let fh = high_hz / sample_rate;
    let sinc = |x: f64| {
        if x.abs() < 1e-12 {
            1.0
        } else {
            (std::f64::consts::PI * x).sin() / (std::f64::consts::PI * x)
        }
    };
    let mut h: Vec<f64> = (0..taps)
        .map(|i| {
            let n = i as f64 - m;
            let ideal = 2.0 * fh * sinc(2.0 * fh * n) - 2.0 * fl * sinc(2.0 * fl * n);
            let window =
                0.54 - 0.46 * (2.0 * std::f64::consts::PI * i as f64 / (taps - 1) as f64).cos();
            ideal * window
        })
        .collect();
    // unit gain at the geometric band center
    let fc = (fl * fh).sqrt();
    let (mut re, mut im) = (0.0, 0.0);
    for (i, &c) in h.iter().enumerate() {
        let ang = -2.0 * std::f64::consts::PI * fc * (i as f64 - m);
        re += c * ang.cos();
        im += c * ang.sin();
    }
    let gain = (re * re + im * im).sqrt();
    if gain > 1e-12 {
        for c in h.iter_mut() {
            *c /= gain;
        }
    }
    FirTaps::new(h)
}

/// Toeplitz matrix of the zero-padded convolution, over `len` entries at
/// the given slot stride.
pub fn toeplitz_from_taps(slots: usize, taps: &FirTaps, len: usize, stride: usize) -> DiagMatrix {
    let m = taps.half();
    DiagMatrix::from_dense(
        slots,
        len,
        len,
        |out, inp| {
            let j = inp as i64 - out as i64 + m;
            if (0..taps.coeffs.len() as i64).contains(&j) {
                taps.coeffs[j as usize]
            } else {
                0.0
            }
        },
        |out| out * stride,
        |inp| inp * stride,
    )
}

/// y[t] = Σ_j h[j]·x[t + j − M] on stride-packed slots (zero padding via
/// the empty guard slots past len·stride). Depth 1.
pub fn k5_fir(
    vm: &mut SlotVm,
    x: &SlotVector,
    taps: &FirTaps,
    len: usize,
    stride: usize,
    which: FirImpl,
) -> Result<SlotVector, VmError> {
    if taps.coeffs.len() > len {
        return Err(VmError::PlainLengthMismatch {
            expected: len,
            got: taps.coeffs.len(),
        });
    }
    // cyclic rotations reach (taps-1)/2 past either end; those slots must
    // be zero for wraps to equal zero padding
    assert!(
        vm.slot_count / stride >= len + (taps.coeffs.len() - 1) / 2,
        "need a zero guard band past the packed series for cyclic wraps"
    );
    match which {
        FirImpl::Toeplitz => {
            let t = toeplitz_from_taps(vm.slot_count, taps, len, stride);
            let y = bsgs_matvec(vm, x, &t)?;
            vm.rescale(&y)
        }
        FirImpl::RotationAccumulation => {
            let m = taps.half();
            let mut acc: Option<SlotVector> = None;
            // band-limit the output region like the Toeplitz diagonals do
            let mut region = vec![0.0; vm.slot_count];
            for t in 0..len {
                region[t * stride] = 1.0;
            }
            for (j, &h) in taps.coeffs.iter().enumerate() {
                let offset = (j as i64 - m) * stride as i64;
                let rotated = vm.rotate(x, offset)?;
                let weights: Vec<f64> = region.iter().map(|&r| r * h).collect();
                let term = vm.mul_pt(&rotated, &weights)?;
                acc = Some(match acc {
                    None => term,
                    Some(a) => vm.add(&a, &term)?,
                });
            }
            vm.rescale(&acc.expect("taps are non-empty"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ckks::CkksParams;
    use rand::{Rng, SeedableRng};

    fn vm(slots: usize) -> SlotVm {
        let mut p = CkksParams::desk(11);
        p.ring_dim = 64;
        SlotVm::exact_sim(&p, slots, 0)
    }

    /// Zero-padded direct convolution with centered taps.
    fn conv_oracle(x: &[f64], h: &[f64]) -> Vec<f64> {
        let m = (h.len() - 1) / 2;
        (0..x.len())
            .map(|t| {
                h.iter()
                    .enumerate()
                    .map(|(j, &c)| {
                        let idx = t as i64 + j as i64 - m as i64;
                        if idx >= 0 && (idx as usize) < x.len() {
                            c * x[idx as usize]
                        } else {
                            0.0
                        }
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn identity_taps_pass_signal_through() {
        let mut vm = vm(64);
        let x: Vec<f64> = (0..16).map(|i| (i as f64 * 0.37).sin()).collect();
        let xv = vm.input_plain(&x);
        let taps = FirTaps::new(vec![1.0]);
        let y = k5_fir(&mut vm, &xv, &taps, 16, 1, FirImpl::Toeplitz).unwrap();
        for t in 0..16 {
            assert!((y.plain_values()[t] - x[t]).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_taps_zero_output() {
        let mut vm = vm(64);
        let xv = vm.input_plain(&vec![0.5; 16]);
        let taps = FirTaps::new(vec![0.0, 0.0, 0.0]);
        let y = k5_fir(&mut vm, &xv, &taps, 16, 1, FirImpl::RotationAccumulation).unwrap();
        assert!(y.plain_values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn random_taps_match_convolution_oracle_both_impls() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(3);
        let f = 32usize;
        let x: Vec<f64> = (0..f).map(|_| rng.random_range(-1.0..1.0)).collect();
        let h: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
        let taps = FirTaps::new(h.clone());
        let oracle = conv_oracle(&x, &h);
        for which in [FirImpl::Toeplitz, FirImpl::RotationAccumulation] {
            let mut vm = vm(64);
            let xv = vm.input_plain(&x);
            let y = k5_fir(&mut vm, &xv, &taps, f, 1, which).unwrap();
            for t in 0..f {
                assert!(
                    (y.plain_values()[t] - oracle[t]).abs() < 1e-9,
                    "{which:?} t={t}: {} vs {}",
                    y.plain_values()[t],
                    oracle[t]
                );
            }
        }
    }

    #[test]
    fn impls_agree_on_strided_layout() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(4);
        let f = 8usize;
        let stride = 4usize;
        let mut packed = vec![0.0; 64];
        for t in 0..f {
            packed[t * stride] = rng.random_range(-1.0..1.0);
            packed[t * stride + 1] = rng.random_range(-9.0..9.0); // garbage off-stride
        }
        let taps = FirTaps::new((0..3).map(|_| rng.random_range(-1.0..1.0)).collect());
        let run = |which| {
            let mut vm = vm(64);
            let xv = vm.input_plain(&packed);
            let y = k5_fir(&mut vm, &xv, &taps, f, stride, which).unwrap();
            y.plain_values().to_vec()
        };
        let a = run(FirImpl::Toeplitz);
        let b = run(FirImpl::RotationAccumulation);
        for t in 0..f {
            assert!((a[t * stride] - b[t * stride]).abs() < 1e-9);
        }
        // off-stride slots are cleaned by both
        assert_eq!(a[1], 0.0);
        assert_eq!(b[1], 0.0);
    }

    #[test]
    fn tap_length_beyond_series_is_an_error() {
        let mut vm = vm(64);
        let xv = vm.input_plain(&vec![0.1; 4]);
        let taps = FirTaps::new(vec![0.2; 9]);
        assert!(k5_fir(&mut vm, &xv, &taps, 4, 1, FirImpl::Toeplitz).is_err());
    }

    #[test]
    fn bandpass_design_passes_band_and_rejects_dc() {
        let fs = 20.0;
        let taps = design_bandpass(63, 0.8, 2.5, fs);
        let response = |f_hz: f64| {
            let m = (taps.coeffs.len() - 1) as f64 / 2.0;
            let (mut re, mut im) = (0.0, 0.0);
            for (i, &c) in taps.coeffs.iter().enumerate() {
                let ang = -2.0 * std::f64::consts::PI * f_hz / fs * (i as f64 - m);
                re += c * ang.cos();
                im += c * ang.sin();
            }
            (re * re + im * im) as f64
        };
        assert!(response(1.4).sqrt() > 0.9);
        assert!(response(0.0).sqrt() < 0.05);
        assert!(response(5.0).sqrt() < 0.1);
    }

    #[test]
    fn fir_consumes_exactly_one_level() {
        let mut vm = vm(64);
        let xv = vm.input_plain(&vec![0.1; 16]);
        let taps = FirTaps::new(vec![0.25, 0.5, 0.25]);
        let y = k5_fir(&mut vm, &xv, &taps, 16, 1, FirImpl::Toeplitz).unwrap();
        assert_eq!(vm.consumed(&y), 1);
    }
}
