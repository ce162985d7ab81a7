//! Kernel 3: windowed, shifted DFT as a block-diagonal plaintext
//! matrix-vector multiply.
//!
//! The D×D kernel is W[d,n] = w[n]·exp(-2πi·σ(d)·n/D) with w the Hanning
//! window and σ the fftshift permutation; it is tiled block-diagonally
//! across the A·R chirp blocks of the interleaved layout and applied as
//! four real Halevi-Shoup matvecs with shared baby-step rotations.
//! Depth 1.

use num_complex::Complex64;

use super::bsgs::{bsgs_matvec_many, DiagMatrix};
use crate::vm::{SlotVector, SlotVm, VmError};

/// Interleaved Doppler layout: slot[a·RD + r·D + c].
#[derive(Clone, Copy, Debug)]
pub struct DopplerLayout {
    pub antennas: usize,
    pub range_bins: usize,
    pub chirps: usize,
}

impl DopplerLayout {
    pub fn blocks(&self) -> usize {
        self.antennas * self.range_bins
    }

    pub fn active_slots(&self) -> usize {
        self.blocks() * self.chirps
    }

    pub fn slot(&self, antenna: usize, range_bin: usize, chirp: usize) -> usize {
        (antenna * self.range_bins + range_bin) * self.chirps + chirp
    }
}

/// Symmetric Hanning window of length n.
pub fn hanning(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| 0.5 * (1.0 - (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos()))
        .collect()
}

/// fftshift permutation σ(d) = (d + D/2) mod D.
pub fn fftshift(d: usize, n: usize) -> usize {
    (d + n / 2) % n
}

/// Real and imaginary parts (C, S) of the windowed shifted DFT kernel.
pub fn dft_matrices(chirps: usize, window: &[f64]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let d = chirps;
    let mut c = vec![vec![0.0; d]; d];
    let mut s = vec![vec![0.0; d]; d];
    for row in 0..d {
        let shifted = fftshift(row, d);
        for n in 0..d {
            let angle = -2.0 * std::f64::consts::PI * (shifted * n) as f64 / d as f64;
            let w = window[n] * Complex64::new(angle.cos(), angle.sin());
            c[row][n] = w.re;
            s[row][n] = w.im;
        }
    }
    (c, s)
}

/// Block-diagonal replication of a D×D block over the layout, as slot
/// diagonals. With a single block spanning the whole ring the diagonal
/// set is exactly D entries; with multiple blocks it is two-sided.
pub fn block_diag(slots: usize, layout: &DopplerLayout, block: &[Vec<f64>]) -> DiagMatrix {
    let d = layout.chirps;
    let n = layout.active_slots();
    DiagMatrix::from_dense(
        slots,
        n,
        n,
        |r, c| {
            if r / d == c / d {
                block[r % d][c % d]
            } else {
                0.0
            }
        },
        |r| r,
        |c| c,
    )
}

/// The four-matvec complex DFT over the interleaved layout:
/// out_re = C̃·re − S̃·im, out_im = S̃·re + C̃·im. Depth 1.
pub fn k3_dft(
    vm: &mut SlotVm,
    re: &SlotVector,
    im: &SlotVector,
    layout: &DopplerLayout,
    window: &[f64],
) -> Result<(SlotVector, SlotVector), VmError> {
    let (c, s) = dft_matrices(layout.chirps, window);
    let c_tilde = block_diag(vm.slot_count, layout, &c);
    let s_tilde = block_diag(vm.slot_count, layout, &s);
    let re_products = bsgs_matvec_many(vm, re, &[&c_tilde, &s_tilde])?;
    let im_products = bsgs_matvec_many(vm, im, &[&c_tilde, &s_tilde])?;
    let (c_re, s_re) = (&re_products[0], &re_products[1]);
    let (c_im, s_im) = (&im_products[0], &im_products[1]);
    let out_re = vm.sub(c_re, s_im)?;
    let out_im = vm.add(s_re, c_im)?;
    let out_re = vm.rescale(&out_re)?;
    let out_im = vm.rescale(&out_im)?;
    Ok((out_re, out_im))
}
