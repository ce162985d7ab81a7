//! The seven DSP kernels plus BSGS matrix-vector products and FC
//! inference, each a fixed arithmetic circuit over the slot VM with a
//! declared depth cost.
//!
//! Kernel depth costs (levels consumed on their own path):
//!
//! | kernel | depth |
//! |--------|-------|
//! | k1 energy / power map        | 1 |
//! | k2 soft attention (vital)    | log2 γ |
//! | k2 soft power (Doppler)      | log2 γ + 1 |
//! | k3 block-diagonal DFT        | 1 |
//! | k4 soft I/Q extraction       | log2 P_φ + 2 |
//! | k5 FIR filter                | 1 |
//! | k6 notch mask                | 1 |
//! | k7 Taylor differential phase | 3 (order 3) or 1 (order 1) |
//! | FC network, L layers         | 2L − 1 |

mod attention;
mod bsgs;
mod dft;
mod energy;
mod fc;
mod fir;
mod notch;
mod operand;
mod softiq;
mod taylor;

pub use attention::{k2_doppler_soft_power, k2_soft_attention, K2Output};
pub use bsgs::{
    assemble_frames, bsgs_matvec, bsgs_matvec_many, fold_stride, reduce_stride_count, BsgsPlan,
    DiagMatrix,
};
pub use dft::{dft_matrices, fftshift, hanning, k3_dft, DopplerLayout};
pub use energy::{k1_energy, k1_power};
pub use fc::{fc_forward, fc_forward_layers, fold_first_layer, FcLayer, FcNetwork};
pub use fir::{design_bandpass, k5_fir, toeplitz_from_taps, FirImpl, FirTaps};
pub use notch::{k6_notch, notch_mask};
pub use operand::{OperandError, PlainOperand};
pub use softiq::{k4_soft_iq, k4_soft_iq_assembled};
pub use taylor::{k7_taylor_phase, ARCSIN_CUBIC};

use serde::{Deserialize, Serialize};

/// Public kernel parameters shared by both pipelines.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelConfig {
    /// Range bins R (power of two).
    pub range_bins: usize,
    /// Chirps per frame D (power of two).
    pub chirps: usize,
    /// Antennas A.
    pub antennas: usize,
    /// Frames per window F.
    pub frames: usize,
    /// Sharpening exponent γ for soft attention (power of two ≥ 1).
    pub gamma: u32,
    /// Doppler-path sharpening exponent (power of two ≥ 1).
    pub gamma_doppler: u32,
    /// Phase-mask exponent P_φ (power of two ≥ 1).
    pub p_phi: u32,
    /// Taylor order for differential phase (1 or 3).
    pub taylor_order: u8,
    /// FIR tap count per band (odd).
    pub fir_taps: usize,
    /// Respiration pass-band in Hz.
    pub resp_band: (f64, f64),
    /// Heart-rate pass-band in Hz.
    pub heart_band: (f64, f64),
    /// Public per-deployment normalization applied to filtered I/Q by
    /// folding into the FIR taps, so K7 sees near-unit magnitudes.
    pub fir_norm_resp: f64,
    pub fir_norm_heart: f64,
    /// Notch half-width in Doppler bins around D/2.
    pub notch_width: usize,
    /// FC layer sizes, input first, logits last.
    pub fc_dims: Vec<usize>,
}

impl KernelConfig {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [("range_bins", self.range_bins), ("chirps", self.chirps)] {
            if !v.is_power_of_two() {
                return Err(format!("{name} = {v} must be a power of two"));
            }
        }
        for (name, g) in [
            ("gamma", self.gamma),
            ("gamma_doppler", self.gamma_doppler),
            ("p_phi", self.p_phi),
        ] {
            if g < 1 || !g.is_power_of_two() {
                return Err(format!("{name} = {g} must be a power of two ≥ 1"));
            }
        }
        if self.taylor_order != 1 && self.taylor_order != 3 {
            return Err(format!(
                "taylor_order = {} must be 1 or 3",
                self.taylor_order
            ));
        }
        if self.fir_taps.is_multiple_of(2) {
            return Err("fir_taps must be odd (linear-phase centered taps)".into());
        }
        if self.antennas == 0 || self.frames == 0 {
            return Err("antennas and frames must be ≥ 1".into());
        }
        if self.fc_dims.len() < 2 {
            return Err("fc_dims needs at least input and output sizes".into());
        }
        Ok(())
    }

    /// Declared depth of the vitals pipeline under this config.
    pub fn vitals_depth(&self) -> usize {
        let k2 = (self.gamma as f64).log2() as usize;
        let k4 = (self.p_phi as f64).log2() as usize + 1; // |z|^2 shared with k1
        let k7 = if self.taylor_order == 3 { 3 } else { 1 };
        1 + k2.max(k4) + 1 + k7 + 4
    }

    /// Declared depth of the classification pipeline under this config.
    pub fn gesture_depth(&self) -> usize {
        let k2 = (self.gamma_doppler as f64).log2() as usize;
        let fc = 2 * (self.fc_dims.len() - 1) - 1;
        1 + 1 + 1 + k2 + 1 + fc
    }
}
