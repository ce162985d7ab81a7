//! Pre-cloud client-side processing: clutter removal, normalization,
//! packing, and post-cloud result recovery. Everything here runs on
//! plaintext and never leaves the trusted side; the cloud circuits in
//! this module's siblings only ever see slot vectors.

use num_complex::Complex64;

use super::cube::RadarCube;

/// Normalization strategy: frame-local for vital signs (the scalar
/// cancels in differential phase), batch-global for gestures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormMode {
    FrameLocal,
    BatchGlobal,
}

/// Plaintext range FFT for cubes supplied as raw IF samples: an M-point
/// DFT of one chirp's samples, keeping the first `range_bins` bins. Runs
/// client-side before encryption; the encrypted pipelines start from
/// range profiles.
pub fn range_fft(if_samples: &[Complex64], range_bins: usize) -> Vec<Complex64> {
    let m = if_samples.len();
    (0..range_bins.min(m))
        .map(|r| {
            (0..m)
                .map(|n| {
                    let ang = -2.0 * std::f64::consts::PI * (r * n) as f64 / m as f64;
                    if_samples[n] * Complex64::new(ang.cos(), ang.sin())
                })
                .sum()
        })
        .collect()
}

/// Clutter removal via mean-across-frames subtraction, then scaling so
/// every |z| ≤ 1. An all-zero window keeps unit scale.
pub fn client_preprocess(cube: &RadarCube, mode: NormMode) -> RadarCube {
    let mut out = cube.clone();
    let f = cube.frames;
    let per_frame = cube.antennas * cube.range_bins * cube.chirps;
    // mean across frames per (antenna, range, chirp)
    let mut mean = vec![Complex64::new(0.0, 0.0); per_frame];
    for t in 0..f {
        let frame = &cube.samples[t * per_frame..(t + 1) * per_frame];
        for (m, z) in mean.iter_mut().zip(frame) {
            *m += z;
        }
    }
    for m in mean.iter_mut() {
        *m /= f as f64;
    }
    for t in 0..f {
        let frame = &mut out.samples[t * per_frame..(t + 1) * per_frame];
        for (z, m) in frame.iter_mut().zip(&mean) {
            *z -= m;
        }
    }
    match mode {
        NormMode::FrameLocal => {
            for t in 0..f {
                let frame = &mut out.samples[t * per_frame..(t + 1) * per_frame];
                let max = frame.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
                if max > 0.0 {
                    for z in frame.iter_mut() {
                        *z /= max;
                    }
                }
            }
        }
        NormMode::BatchGlobal => {
            let max = out.samples.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
            if max > 0.0 {
                for z in out.samples.iter_mut() {
                    *z /= max;
                }
            }
        }
    }
    out
}

/// Vital packing: frame t's R range bins (antenna 0, chirp 0) into the
/// first R slots of a (re, im) pair; unused slots zero.
pub fn pack_vital(cube: &RadarCube) -> Vec<(Vec<f64>, Vec<f64>)> {
    (0..cube.frames)
        .map(|t| {
            let mut re = vec![0.0; cube.range_bins];
            let mut im = vec![0.0; cube.range_bins];
            for r in 0..cube.range_bins {
                let z = cube.at(t, 0, r, 0);
                re[r] = z.re;
                im[r] = z.im;
            }
            (re, im)
        })
        .collect()
}

/// Inverse of [`pack_vital`] for round-trip checks.
pub fn unpack_vital(frames: &[(Vec<f64>, Vec<f64>)]) -> Vec<Vec<Complex64>> {
    frames
        .iter()
        .map(|(re, im)| {
            re.iter()
                .zip(im)
                .map(|(&a, &b)| Complex64::new(a, b))
                .collect()
        })
        .collect()
}

/// Doppler packing for frame t: slot[a·RD + r·D + c], A·R·D active slots.
pub fn pack_doppler(cube: &RadarCube, frame: usize) -> (Vec<f64>, Vec<f64>) {
    let (a_n, r_n, d_n) = (cube.antennas, cube.range_bins, cube.chirps);
    let mut re = vec![0.0; a_n * r_n * d_n];
    let mut im = vec![0.0; a_n * r_n * d_n];
    for a in 0..a_n {
        for r in 0..r_n {
            for c in 0..d_n {
                let z = cube.at(frame, a, r, c);
                let slot = a * r_n * d_n + r * d_n + c;
                re[slot] = z.re;
                im[slot] = z.im;
            }
        }
    }
    (re, im)
}

/// Inverse of [`pack_doppler`] for round-trip checks: (a, r, c) → value.
pub fn unpack_doppler(
    re: &[f64],
    im: &[f64],
    antennas: usize,
    range_bins: usize,
    chirps: usize,
) -> Vec<Complex64> {
    (0..antennas * range_bins * chirps)
        .map(|slot| Complex64::new(re[slot], im[slot]))
        .collect()
}

/// Scalars decrypted at the two vital decrypt points.
#[derive(Clone, Debug)]
pub struct DecryptedVitals {
    pub bin_numer: f64,
    pub bin_denom: f64,
    pub resp_numer: f64,
    pub resp_denom: f64,
    pub heart_numer: f64,
    pub heart_denom: f64,
    pub phase_waveform: Option<Vec<f64>>,
}

/// Client-side result recovery for the vital pipeline: scalar divisions
/// only, with a low-confidence guard instead of dividing by a vanishing
/// denominator.
#[derive(Clone, Debug, serde::Serialize)]
pub struct VitalResult {
    pub target_bin: f64,
    pub rr_bpm: f64,
    pub hr_bpm: f64,
    pub low_confidence: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_waveform: Option<Vec<f64>>,
}

/// Classification recovery: plaintext argmax over decrypted logits,
/// ties to the lowest index.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ClassResult {
    pub logits: Vec<f64>,
    pub predicted: usize,
}

pub fn argmax_lowest_tie(values: &[f64]) -> usize {
    let mut best = 0usize;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// r̂ = N/D and band rates via scalar division; Dn below 1e-6 of its
/// theoretical maximum (R·F^γ on |z| ≤ 1 inputs) flags low confidence.
pub fn recover_vitals(
    dec: DecryptedVitals,
    range_bins: usize,
    frames: usize,
    gamma: u32,
) -> VitalResult {
    let dn_max = range_bins as f64 * (frames as f64).powi(gamma as i32);
    let bin_threshold = 1e-6 * dn_max;
    let band_threshold = 1e-12;
    let low_confidence = dec.bin_denom.abs() < bin_threshold
        || dec.resp_denom.abs() < band_threshold
        || dec.heart_denom.abs() < band_threshold;
    let safe_div = |n: f64, d: f64, threshold: f64| if d.abs() < threshold { 0.0 } else { n / d };
    VitalResult {
        target_bin: safe_div(dec.bin_numer, dec.bin_denom, bin_threshold),
        rr_bpm: safe_div(dec.resp_numer, dec.resp_denom, band_threshold),
        hr_bpm: safe_div(dec.heart_numer, dec.heart_denom, band_threshold),
        low_confidence,
        phase_waveform: dec.phase_waveform,
    }
}

pub fn recover_class(logits: Vec<f64>) -> ClassResult {
    let predicted = argmax_lowest_tie(&logits);
    ClassResult { logits, predicted }
}
