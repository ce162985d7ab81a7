//! The encrypted dynamic-classification composition: per frame a Doppler
//! DFT (K3), power map (K1), notch mask (K6), and soft power attention
//! (K2, γ=4) produce weighted features; frames accumulate by addition;
//! the accumulated vector passes through the square-activation FC
//! network. Cumulative depth (1, 2, 3, 5, 6, 6, 8, 10, 11).

use super::report::DepthLedger;
use super::vitals::{stage_err, PipelineError, StageSnapshot};
use crate::config::PipelineConfig;
use crate::kernels::{
    fc_forward_layers, hanning, k1_power, k2_doppler_soft_power, k3_dft, k6_notch, DopplerLayout,
    FcNetwork,
};
use crate::vm::{SlotVector, SlotVm};

pub struct GestureCloudOutput {
    pub logits: SlotVector,
    pub ledger: DepthLedger,
    pub snapshots: Vec<StageSnapshot>,
}

/// Expected spectral energy scale s = R·A·(Σ w[n])² used in the weight
/// fold.
pub fn spectral_energy_scale(cfg: &PipelineConfig) -> f64 {
    let w_sum: f64 = hanning(cfg.kernel.chirps).iter().sum();
    cfg.kernel.range_bins as f64 * cfg.kernel.antennas as f64 * w_sum * w_sum
}

/// Soft-power normalization factor folded into the first FC layer:
/// s^γ / F.
pub fn fold_normalization(cfg: &PipelineConfig) -> f64 {
    spectral_energy_scale(cfg).powi(cfg.kernel.gamma_doppler as i32) / cfg.kernel.frames as f64
}

/// The full cloud-side classification circuit over per-frame interleaved
/// (re, im) inputs. `net` must already carry the setup-time folds.
pub fn gesture_cloud(
    vm: &mut SlotVm,
    frames: &[(SlotVector, SlotVector)],
    cfg: &PipelineConfig,
    net: &FcNetwork,
) -> Result<GestureCloudOutput, PipelineError> {
    let k = &cfg.kernel;
    let layout = DopplerLayout {
        antennas: k.antennas,
        range_bins: k.range_bins,
        chirps: k.chirps,
    };
    if frames.len() != k.frames {
        return Err(PipelineError::Config(format!(
            "expected {} frames, got {}",
            k.frames,
            frames.len()
        )));
    }
    if layout.active_slots() > vm.slot_count {
        return Err(PipelineError::Config(format!(
            "interleaved layout needs {} slots, ring provides {}",
            layout.active_slots(),
            vm.slot_count
        )));
    }
    if net.layers[0].in_dim() != layout.active_slots() {
        return Err(PipelineError::Config(format!(
            "first FC layer expects {} inputs, layout provides {}",
            net.layers[0].in_dim(),
            layout.active_slots()
        )));
    }
    let window = hanning(k.chirps);
    let mut ledger = DepthLedger::default();
    let mut snapshots = Vec::new();
    let mut acc: Option<SlotVector> = None;

    for (t, (re, im)) in frames.iter().enumerate() {
        let (d_re, d_im) =
            k3_dft(vm, re, im, &layout, &window).map_err(stage_err("doppler_dft"))?;
        let power = k1_power(vm, &d_re, &d_im).map_err(stage_err("power_map"))?;
        let notched =
            k6_notch(vm, &power, &layout, k.notch_width).map_err(stage_err("notch_mask"))?;
        let weighted = k2_doppler_soft_power(vm, &notched, k.chirps, k.gamma_doppler)
            .map_err(stage_err("soft_power"))?;
        if t == 0 {
            ledger.push("doppler_dft", vm.consumed(&d_re));
            ledger.push("power_map", vm.consumed(&power));
            ledger.push("notch_mask", vm.consumed(&notched));
            // the two squarings land one level above the weighting multiply
            ledger.push("soft_power", vm.consumed(&weighted) - 1);
            ledger.push("feature_weighting", vm.consumed(&weighted));
            let active: Vec<usize> = (0..layout.active_slots()).collect();
            snapshots.push(StageSnapshot {
                stage: "k3_doppler_dft".into(),
                depth: vm.consumed(&d_re),
                vector: d_re.clone(),
                meaningful: active.clone(),
            });
            snapshots.push(StageSnapshot {
                stage: "k1_power_map".into(),
                depth: vm.consumed(&power),
                vector: power.clone(),
                meaningful: active.clone(),
            });
            snapshots.push(StageSnapshot {
                stage: "k6_notch".into(),
                depth: vm.consumed(&notched),
                vector: notched.clone(),
                meaningful: active.clone(),
            });
            snapshots.push(StageSnapshot {
                stage: "k2_soft_power".into(),
                depth: vm.consumed(&weighted),
                vector: weighted.clone(),
                meaningful: active,
            });
        }
        acc = Some(match acc {
            None => weighted,
            Some(a) => vm
                .add(&a, &weighted)
                .map_err(stage_err("frame_accumulation"))?,
        });
    }
    let features = acc.expect("at least one frame");
    ledger.push("frame_accumulation", vm.consumed(&features));
    snapshots.push(StageSnapshot {
        stage: "frame_accumulation".into(),
        depth: vm.consumed(&features),
        vector: features.clone(),
        meaningful: (0..layout.active_slots()).collect(),
    });

    let n_layers = net.layers.len();
    let mut layer_outputs: Vec<(usize, SlotVector)> = Vec::new();
    let logits = fc_forward_layers(vm, &features, net, |i, out| {
        layer_outputs.push((i, out.clone()));
    })
    .map_err(stage_err("fc_network"))?;
    for (i, out) in &layer_outputs {
        let name = if i + 1 < n_layers {
            format!("fc{}_square", i + 1)
        } else {
            format!("fc{}", i + 1)
        };
        ledger.push(&name, vm.consumed(out));
    }
    let classes = net.layers.last().map_or(0, |l| l.out_dim());
    snapshots.push(StageSnapshot {
        stage: "fc_logits".into(),
        depth: vm.consumed(&logits),
        vector: logits.clone(),
        meaningful: (0..classes).collect(),
    });

    Ok(GestureCloudOutput {
        logits,
        ledger,
        snapshots,
    })
}
