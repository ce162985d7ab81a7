//! Bundled synthetic fixtures shared by tests, the acceptance suite, and
//! the CLI demo commands.
//!
//! The vital fixture is a single target at range bin 12 breathing at
//! 15 bpm (0.2 mm) with a 72 bpm heart component (0.05 mm) on a slow
//! 1 mm postural drift, λ = 5 mm, 200 frames at 20 Hz. The drift keeps
//! the clutter-removed bin a rotating phasor so the band-passed I/Q
//! carries the rates; the per-band FIR normalizations (1.0, 2.0) put the
//! filtered magnitudes near unit scale for the differential-phase kernel.

use crate::config::PipelineConfig;
use crate::kernels::{FcLayer, FcNetwork};
use crate::synth::{MotionComponent, SceneSpec, Target};

pub const VITAL_FIXTURE_SEED: u64 = 7;
pub const VITAL_TRUE_BIN: usize = 12;
pub const VITAL_TRUE_RR_BPM: f64 = 15.0;
pub const VITAL_TRUE_HR_BPM: f64 = 72.0;

/// The vital-signs scene (see module docs).
pub fn vital_scene() -> SceneSpec {
    SceneSpec {
        targets: vec![Target {
            range_bin: VITAL_TRUE_BIN,
            amplitude: 1.0,
            motion: vec![
                MotionComponent {
                    freq_hz: 0.25,
                    displacement_m: 0.2e-3,
                    phase_rad: 0.0,
                },
                MotionComponent {
                    freq_hz: 1.2,
                    displacement_m: 0.05e-3,
                    phase_rad: 1.1,
                },
                MotionComponent {
                    freq_hz: 0.02,
                    displacement_m: 1.0e-3,
                    phase_rad: 0.5,
                },
            ],
        }],
        clutter_amplitude: 0.3,
        noise_std: 0.005,
        wavelength_m: 0.005,
        frame_rate_hz: 20.0,
        frames: 200,
        antennas: 1,
        range_bins: 16,
        chirps: 1,
    }
}

/// Pipeline configuration matched to [`vital_scene`], with the calibrated
/// public per-band normalizations folded into the FIR taps.
pub fn vital_config() -> PipelineConfig {
    let mut cfg = PipelineConfig::default_vitals();
    cfg.kernel.fir_norm_resp = 1.0;
    cfg.kernel.fir_norm_heart = 2.0;
    cfg.seed = VITAL_FIXTURE_SEED;
    cfg
}

/// A moving-target scene for the classification pipeline: `class`
/// selects the target's radial velocity (hence its Doppler signature).
pub fn gesture_scene(class: usize, classes: usize) -> SceneSpec {
    // velocities chosen so each class concentrates on distinct Doppler bins
    let v_scale = 0.2 + class as f64 / classes as f64;
    SceneSpec {
        targets: vec![Target {
            range_bin: 1,
            amplitude: 1.0,
            motion: vec![MotionComponent {
                freq_hz: 2.0,
                displacement_m: v_scale * 2.0e-3,
                phase_rad: 0.2,
            }],
        }],
        clutter_amplitude: 0.2,
        noise_std: 0.01,
        wavelength_m: 0.005,
        frame_rate_hz: 33.0,
        frames: 4,
        antennas: 1,
        range_bins: 4,
        chirps: 8,
    }
}

/// Small classification config used for backend-agreement runs: A=1,
/// R=4, D=8, F=4 (32 active slots), 32-16-8-5 network, N=1024 desk chain.
pub fn gesture_small_config() -> PipelineConfig {
    let mut cfg = PipelineConfig::default_gesture();
    cfg.kernel.antennas = 1;
    cfg.kernel.range_bins = 4;
    cfg.kernel.chirps = 8;
    cfg.kernel.frames = 4;
    cfg.kernel.fc_dims = vec![32, 16, 8, 5];
    cfg.ckks.ring_dim = 1024;
    cfg
}

/// Deterministic random FC weights sized for a config's feature span.
pub fn random_fc_net(dims: &[usize], seed: u64) -> FcNetwork {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
    let layers = dims
        .windows(2)
        .map(|w| FcLayer {
            weight: (0..w[1])
                .map(|_| (0..w[0]).map(|_| rng.random_range(-0.5..0.5)).collect())
                .collect(),
            bias: (0..w[1]).map(|_| rng.random_range(-0.2..0.2)).collect(),
        })
        .collect();
    FcNetwork { layers }
}
