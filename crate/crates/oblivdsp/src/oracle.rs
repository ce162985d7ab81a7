//! Plaintext reference DSP and fidelity metrics.
//!
//! Two reference paths exist: `standard_vitals` is conventional radar
//! vital-sign processing (hard argmax, atan2, unwrap, differentiate, FIR,
//! spectral peak picking), and the slot pipelines run on the exact
//! simulator serve as the second reference. `fidelity_report` and
//! `approx_gap_report` quantify, respectively, encryption noise between
//! two runs of the identical pipeline and the approximation gap between
//! the branch-free kernels and standard DSP.

use serde::Serialize;

use crate::kernels::{design_bandpass, FcLayer, FcNetwork};
use crate::pipelines::RadarCube;

/// Result of the conventional plaintext chain.
#[derive(Clone, Debug, Serialize)]
pub struct StandardVitals {
    pub target_bin: usize,
    pub rr_bpm: Option<f64>,
    pub hr_bpm: Option<f64>,
    /// Differential phase series after unwrapping (radians/frame).
    pub phase_diff: Vec<f64>,
}

/// Hard-argmax bin selection, atan2 phase, unwrap, differentiate, FIR,
/// FFT peak pick. Degenerate (empty-band) estimates come back as None.
pub fn standard_vitals(
    cube: &RadarCube,
    resp_band: (f64, f64),
    heart_band: (f64, f64),
    fir_taps: usize,
) -> StandardVitals {
    let f = cube.frames;
    let r = cube.range_bins;
    // clutter removal on the (antenna 0, chirp 0) view
    let mut frames: Vec<Vec<num_complex::Complex64>> = (0..f)
        .map(|t| (0..r).map(|bin| cube.at(t, 0, bin, 0)).collect())
        .collect();
    let mean: Vec<num_complex::Complex64> = (0..r)
        .map(|bin| {
            frames
                .iter()
                .map(|fr| fr[bin])
                .sum::<num_complex::Complex64>()
                / f as f64
        })
        .collect();
    for fr in frames.iter_mut() {
        for (bin, v) in fr.iter_mut().enumerate() {
            *v -= mean[bin];
        }
    }
    // hard argmax on integrated energy, ties to the lowest index
    let energy: Vec<f64> = (0..r)
        .map(|bin| frames.iter().map(|fr| fr[bin].norm_sqr()).sum())
        .collect();
    let target_bin = energy
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
        .unwrap_or(0);

    // atan2 → unwrap → differentiate
    let mut phase: Vec<f64> = frames.iter().map(|fr| fr[target_bin].arg()).collect();
    unwrap_in_place(&mut phase);
    let diff: Vec<f64> = phase.windows(2).map(|w| w[1] - w[0]).collect();

    let fs = cube.frame_rate_hz;
    let rr = band_rate(&diff, fs, resp_band, fir_taps);
    let hr = band_rate(&diff, fs, heart_band, fir_taps);
    StandardVitals {
        target_bin,
        rr_bpm: rr,
        hr_bpm: hr,
        phase_diff: diff,
    }
}

/// Standard ±π jump correction.
pub fn unwrap_in_place(phase: &mut [f64]) {
    for i in 1..phase.len() {
        let mut d = phase[i] - phase[i - 1];
        while d > std::f64::consts::PI {
            d -= 2.0 * std::f64::consts::PI;
        }
        while d < -std::f64::consts::PI {
            d += 2.0 * std::f64::consts::PI;
        }
        phase[i] = phase[i - 1] + d;
    }
}

/// FIR-bandpass the differential phase, then pick the spectral peak in
/// the band; None when the band carries (numerically) no energy.
fn band_rate(diff: &[f64], fs: f64, band: (f64, f64), fir_taps: usize) -> Option<f64> {
    let taps = design_bandpass(
        fir_taps.min(diff.len() / 2 * 2 - 1).max(3) | 1,
        band.0,
        band.1,
        fs,
    );
    let m = (taps.coeffs.len() - 1) / 2;
    let filtered: Vec<f64> = (0..diff.len())
        .map(|t| {
            taps.coeffs
                .iter()
                .enumerate()
                .map(|(j, &c)| {
                    let idx = t as i64 + j as i64 - m as i64;
                    if idx >= 0 && (idx as usize) < diff.len() {
                        c * diff[idx as usize]
                    } else {
                        0.0
                    }
                })
                .sum()
        })
        .collect();
    let n = filtered.len();
    let window = crate::kernels::hanning(n);
    let mut best: Option<(usize, f64)> = None;
    for k in 1..n / 2 {
        let fk = k as f64 * fs / n as f64;
        if fk < band.0 || fk > band.1 {
            continue;
        }
        let (mut re, mut im) = (0.0, 0.0);
        for (t, &x) in filtered.iter().enumerate() {
            let ang = -2.0 * std::f64::consts::PI * (k * t) as f64 / n as f64;
            re += window[t] * x * ang.cos();
            im += window[t] * x * ang.sin();
        }
        let p = re * re + im * im;
        if best.is_none_or(|(_, bp)| p > bp) {
            best = Some((k, p));
        }
    }
    match best {
        Some((k, p)) if p > 1e-18 => Some(60.0 * k as f64 * fs / n as f64),
        _ => None,
    }
}

/// Per-stage mean-squared error and max absolute error between two runs
/// of the identical pipeline (encryption noise when one side is the
/// lattice backend).
#[derive(Clone, Debug, Serialize)]
pub struct FidelityRow {
    pub stage: String,
    pub mse: f64,
    pub max_abs_err: f64,
    pub depth: usize,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct FidelityReport {
    pub rows: Vec<FidelityRow>,
}

#[derive(Debug)]
pub struct ShapeMismatch {
    pub stage: String,
    pub left: usize,
    pub right: usize,
}

impl std::fmt::Display for ShapeMismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "stage {}: shape mismatch {} vs {}",
            self.stage, self.left, self.right
        )
    }
}

impl std::error::Error for ShapeMismatch {}

impl FidelityReport {
    pub fn push_stage(
        &mut self,
        stage: &str,
        depth: usize,
        reference: &[f64],
        measured: &[f64],
    ) -> Result<(), ShapeMismatch> {
        if reference.len() != measured.len() {
            return Err(ShapeMismatch {
                stage: stage.into(),
                left: reference.len(),
                right: measured.len(),
            });
        }
        let n = reference.len().max(1);
        let mut mse = 0.0;
        let mut max_abs = 0.0f64;
        for (a, b) in reference.iter().zip(measured) {
            let d = a - b;
            mse += d * d;
            max_abs = max_abs.max(d.abs());
        }
        self.rows.push(FidelityRow {
            stage: stage.into(),
            mse: mse / n as f64,
            max_abs_err: max_abs,
            depth,
        });
        Ok(())
    }

    pub fn max_mse(&self) -> f64 {
        self.rows.iter().fold(0.0, |m, r| m.max(r.mse))
    }

    /// Text rendering in the fidelity-table format (stage, MSE, max|err|,
    /// depth).
    pub fn to_table(&self) -> String {
        let mut out = String::from("stage                      MSE         max|err|    depth\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{:<26} {:<11.3e} {:<11.3e} {}\n",
                r.stage, r.mse, r.max_abs_err, r.depth
            ));
        }
        out
    }
}

/// Band-wise gap between the branch-free chain and standard DSP.
#[derive(Clone, Debug, Serialize)]
pub struct ApproxGapReport {
    pub resp_phase_mse: f64,
    pub heart_phase_mse: f64,
    pub rr_delta_bpm: f64,
    pub hr_delta_bpm: f64,
}

/// Compare phase series and rate estimates of the two plaintext paths.
#[allow(clippy::too_many_arguments)]
pub fn approx_gap_report(
    fhe_friendly_resp_phase: &[f64],
    fhe_friendly_heart_phase: &[f64],
    fhe_rr_bpm: f64,
    fhe_hr_bpm: f64,
    standard: &StandardVitals,
    fs: f64,
    resp_band: (f64, f64),
    heart_band: (f64, f64),
    fir_taps: usize,
) -> ApproxGapReport {
    // band-filter the standard differential phase for a like-for-like
    // waveform comparison
    let band_filter = |band: (f64, f64)| -> Vec<f64> {
        let taps = design_bandpass(fir_taps | 1, band.0, band.1, fs);
        let m = (taps.coeffs.len() - 1) / 2;
        (0..standard.phase_diff.len())
            .map(|t| {
                taps.coeffs
                    .iter()
                    .enumerate()
                    .map(|(j, &c)| {
                        let idx = t as i64 + j as i64 - m as i64;
                        if idx >= 0 && (idx as usize) < standard.phase_diff.len() {
                            c * standard.phase_diff[idx as usize]
                        } else {
                            0.0
                        }
                    })
                    .sum()
            })
            .collect()
    };
    let mse = |a: &[f64], b: &[f64]| {
        let n = a.len().min(b.len()).max(1);
        a.iter()
            .zip(b)
            .take(n)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            / n as f64
    };
    let resp_ref = band_filter(resp_band);
    let heart_ref = band_filter(heart_band);
    ApproxGapReport {
        resp_phase_mse: mse(fhe_friendly_resp_phase, &resp_ref),
        heart_phase_mse: mse(fhe_friendly_heart_phase, &heart_ref),
        rr_delta_bpm: standard.rr_bpm.map_or(f64::NAN, |r| (r - fhe_rr_bpm).abs()),
        hr_delta_bpm: standard.hr_bpm.map_or(f64::NAN, |r| (r - fhe_hr_bpm).abs()),
    }
}

/// Minimal plaintext gradient trainer for square-activation FC networks.
/// Exists solely to produce nontrivial test weights; not a feature.
pub fn train_fc_fixture(
    dims: &[usize],
    samples: &[(Vec<f64>, usize)],
    epochs: usize,
    lr: f64,
    seed: u64,
) -> FcNetwork {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
    let mut layers: Vec<FcLayer> = dims
        .windows(2)
        .map(|w| FcLayer {
            weight: (0..w[1])
                .map(|_| (0..w[0]).map(|_| rng.random_range(-0.5..0.5)).collect())
                .collect(),
            bias: vec![0.0; w[1]],
        })
        .collect();
    let classes = *dims.last().unwrap();
    for _ in 0..epochs {
        for (x, label) in samples {
            // forward with cached activations
            let mut acts = vec![x.clone()];
            for (i, layer) in layers.iter().enumerate() {
                let mut z = layer.apply_plain(acts.last().unwrap());
                if i + 1 < layers.len() {
                    for v in z.iter_mut() {
                        *v = *v * *v;
                    }
                }
                acts.push(z);
            }
            // squared-error on one-hot target
            let out = acts.last().unwrap().clone();
            let mut grad: Vec<f64> = (0..classes)
                .map(|c| out[c] - if c == *label { 1.0 } else { 0.0 })
                .collect();
            // backward
            for i in (0..layers.len()).rev() {
                let input = acts[i].clone();
                let pre: Vec<f64> = layers[i].apply_plain(&input);
                // through the square activation (none on the last layer)
                if i + 1 < layers.len() {
                    for (g, p) in grad.iter_mut().zip(&pre) {
                        *g *= 2.0 * p;
                    }
                }
                let mut next_grad = vec![0.0; input.len()];
                for (o, g) in grad.iter().enumerate() {
                    for (c, ng) in next_grad.iter_mut().enumerate() {
                        *ng += layers[i].weight[o][c] * g;
                    }
                }
                for (o, g) in grad.iter().enumerate() {
                    for (c, &inp) in input.iter().enumerate() {
                        layers[i].weight[o][c] -= lr * g * inp;
                    }
                    layers[i].bias[o] -= lr * g;
                }
                grad = next_grad;
            }
        }
    }
    FcNetwork { layers }
}
