//! The encrypted vital-signs composition: K1→K2 (target bin), then
//! K4→K5→K7 for bandpassed differential phase, a narrowband DFT over the
//! passband bins, power spectrum, spectral sharpening, and weighted
//! frequency average. Two decrypt points: (N, D) for the target bin after
//! soft attention, and per-band (N_f, D_f) for the rates at the end.
//!
//! Cumulative depth along the critical path is
//! (1, 2, 3, 4, 7, 8, 9, 10, 11) for the order-3 Taylor variant and
//! totals 9 for order 1, matching the declared budget exactly.

use super::report::DepthLedger;
use crate::config::PipelineConfig;
use crate::kernels::{
    assemble_frames, bsgs_matvec_many, design_bandpass, fold_stride, hanning, k1_power,
    k2_soft_attention, k4_soft_iq_assembled, k5_fir, k7_taylor_phase, DiagMatrix, FirTaps,
};
use crate::vm::{SlotVector, SlotVm, VmError};

#[derive(Debug)]
pub enum PipelineError {
    DepthBudget { stage: String, detail: String },
    Vm { stage: String, error: VmError },
    Config(String),
}

impl std::fmt::Display for PipelineError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PipelineError::DepthBudget { stage, detail } => {
                write!(f, "depth budget violated at stage {stage}: {detail}")
            }
            PipelineError::Vm { stage, error } => write!(f, "stage {stage}: {error}"),
            PipelineError::Config(m) => write!(f, "configuration: {m}"),
        }
    }
}

impl std::error::Error for PipelineError {}

pub(crate) fn stage_err(stage: &str) -> impl Fn(VmError) -> PipelineError + '_ {
    move |e| match e {
        VmError::DepthExhausted { level, needed } => PipelineError::DepthBudget {
            stage: stage.to_string(),
            detail: format!("level {level}, needed {needed}"),
        },
        other => PipelineError::Vm {
            stage: stage.to_string(),
            error: other,
        },
    }
}

/// A stage output retained for fidelity reporting: the vector plus the
/// slot indices that carry meaningful values.
pub struct StageSnapshot {
    pub stage: String,
    pub depth: usize,
    pub vector: SlotVector,
    pub meaningful: Vec<usize>,
}

pub struct VitalsCloudOutput {
    pub bin_numer: SlotVector,
    pub bin_denom: SlotVector,
    pub resp_numer: SlotVector,
    pub resp_denom: SlotVector,
    pub heart_numer: SlotVector,
    pub heart_denom: SlotVector,
    pub phase_resp: Option<SlotVector>,
    pub ledger: DepthLedger,
    pub snapshots: Vec<StageSnapshot>,
}

/// DFT bins whose frequencies fall inside the band for an M-point series
/// at sample rate fs.
pub fn band_bins(m: usize, fs: f64, band: (f64, f64)) -> Vec<usize> {
    (1..=m / 2)
        .filter(|&k| {
            let f = k as f64 * fs / m as f64;
            band.0 <= f && f <= band.1
        })
        .collect()
}

/// Real/imag diagonal matrices of the windowed partial DFT taking the
/// stride-packed Δφ series (sample m at slot (m+1)·stride) to band bins
/// (bin i at slot (offset+i)·stride).
fn band_dft_matrices(
    slots: usize,
    m_len: usize,
    stride: usize,
    bins: &[usize],
    offset: usize,
    window: &[f64],
) -> (DiagMatrix, DiagMatrix) {
    let c = DiagMatrix::from_dense(
        slots,
        bins.len(),
        m_len,
        |row, col| {
            let ang = -2.0 * std::f64::consts::PI * (bins[row] * col) as f64 / m_len as f64;
            window[col] * ang.cos()
        },
        |row| (offset + row) * stride,
        |col| (col + 1) * stride,
    );
    let s = DiagMatrix::from_dense(
        slots,
        bins.len(),
        m_len,
        |row, col| {
            let ang = -2.0 * std::f64::consts::PI * (bins[row] * col) as f64 / m_len as f64;
            window[col] * ang.sin()
        },
        |row| (offset + row) * stride,
        |col| (col + 1) * stride,
    );
    (c, s)
}

/// per-band FIR taps with the public normalization folded in.
fn band_taps(cfg: &PipelineConfig, band: (f64, f64), norm: f64) -> FirTaps {
    design_bandpass(cfg.kernel.fir_taps, band.0, band.1, cfg.frame_rate_hz).scaled(norm)
}

/// The full cloud-side vitals circuit over per-frame packed inputs.
pub fn vitals_cloud(
    vm: &mut SlotVm,
    re_frames: &[SlotVector],
    im_frames: &[SlotVector],
    cfg: &PipelineConfig,
) -> Result<VitalsCloudOutput, PipelineError> {
    let k = &cfg.kernel;
    let (r, f) = (k.range_bins, k.frames);
    if re_frames.len() != f || im_frames.len() != f {
        return Err(PipelineError::Config(format!(
            "expected {f} frames, got {} / {}",
            re_frames.len(),
            im_frames.len()
        )));
    }
    if r * f > vm.slot_count {
        return Err(PipelineError::Config(format!(
            "window needs {} slots, ring provides {}",
            r * f,
            vm.slot_count
        )));
    }
    let mut ledger = DepthLedger::default();
    let mut snapshots = Vec::new();
    let stride_slots: Vec<usize> = (0..f).map(|t| t * r).collect();

    // frame assembly: slot[r + t·R] = z_r[t]; depth-free rotation tree
    let re = assemble_frames(vm, re_frames, r).map_err(stage_err("frame_assembly"))?;
    let im = assemble_frames(vm, im_frames, r).map_err(stage_err("frame_assembly"))?;

    // K1: per-sample power, then per-bin energy folded across frames
    let sq = k1_power(vm, &re, &im).map_err(stage_err("energy"))?;
    let energy = fold_stride(vm, &sq, r, vm.slot_count / r).map_err(stage_err("energy"))?;
    ledger.push("energy", vm.consumed(&energy));
    snapshots.push(StageSnapshot {
        stage: "k1_energy".into(),
        depth: vm.consumed(&energy),
        vector: energy.clone(),
        meaningful: (0..r).collect(),
    });

    // K2: soft attention over the energy profile → first decrypt point
    let k2 = k2_soft_attention(vm, &energy, r, k.gamma).map_err(stage_err("soft_attention"))?;
    ledger.push("soft_attention", vm.consumed(&k2.weights));
    snapshots.push(StageSnapshot {
        stage: "k2_soft_attention".into(),
        depth: vm.consumed(&k2.weights),
        vector: k2.weights.clone(),
        meaningful: (0..r).collect(),
    });

    // K4: mask-weighted I/Q, frame t at slot t·R
    let (iq_i, iq_q) = k4_soft_iq_assembled(vm, &re, &im, &sq, r, k.p_phi)
        .map_err(stage_err("phase_extraction"))?;
    ledger.push("phase_extraction", vm.consumed(&iq_i));
    snapshots.push(StageSnapshot {
        stage: "k4_soft_iq".into(),
        depth: vm.consumed(&iq_i),
        vector: iq_i.clone(),
        meaningful: stride_slots.clone(),
    });

    // K5: per-band FIR, plus the cubic-scaled copies K7 order 3 needs
    let fir_impl = cfg.fir_impl_kind();
    let mut band_phase = Vec::new(); // Δφ per band
    for (band, norm) in [
        (k.resp_band, k.fir_norm_resp),
        (k.heart_band, k.fir_norm_heart),
    ] {
        let taps = band_taps(cfg, band, norm);
        let i_f = k5_fir(vm, &iq_i, &taps, f, r, fir_impl).map_err(stage_err("fir_filter"))?;
        let q_f = k5_fir(vm, &iq_q, &taps, f, r, fir_impl).map_err(stage_err("fir_filter"))?;
        let (i3, q3) = if k.taylor_order == 3 {
            let taps3 = taps.scaled(cfg.taylor_cubic);
            (
                Some(k5_fir(vm, &iq_i, &taps3, f, r, fir_impl).map_err(stage_err("fir_filter"))?),
                Some(k5_fir(vm, &iq_q, &taps3, f, r, fir_impl).map_err(stage_err("fir_filter"))?),
            )
        } else {
            (None, None)
        };
        if band_phase.is_empty() {
            ledger.push("fir_filter", vm.consumed(&i_f));
            snapshots.push(StageSnapshot {
                stage: "k5_fir".into(),
                depth: vm.consumed(&i_f),
                vector: i_f.clone(),
                meaningful: stride_slots.clone(),
            });
        }
        // K7: differential phase
        let dphi = k7_taylor_phase(vm, &i_f, &q_f, i3.as_ref(), q3.as_ref(), k.taylor_order, r)
            .map_err(stage_err("taylor_arctan"))?;
        band_phase.push(dphi);
    }
    ledger.push("taylor_arctan", vm.consumed(&band_phase[0]));
    snapshots.push(StageSnapshot {
        stage: "k7_taylor".into(),
        depth: vm.consumed(&band_phase[0]),
        vector: band_phase[0].clone(),
        meaningful: stride_slots[1..].to_vec(),
    });

    // narrowband DFT per band; heart bins placed after the resp bins so
    // the merged spectrum shares one stride grid
    let m_len = f - 1;
    let fs = cfg.frame_rate_hz;
    let window = hanning(m_len);
    let resp_bins = band_bins(m_len, fs, k.resp_band);
    let heart_bins = band_bins(m_len, fs, k.heart_band);
    if resp_bins.is_empty() || heart_bins.is_empty() {
        return Err(PipelineError::Config(
            "a pass-band contains no DFT bins at this frame count".into(),
        ));
    }
    let mut band_power = Vec::new();
    let mut dft_snapshot: Option<SlotVector> = None;
    for (bi, bins) in [&resp_bins, &heart_bins].into_iter().enumerate() {
        let offset = if bi == 0 { 0 } else { resp_bins.len() };
        let (cmat, smat) = band_dft_matrices(vm.slot_count, m_len, r, bins, offset, &window);
        let products = bsgs_matvec_many(vm, &band_phase[bi], &[&cmat, &smat])
            .map_err(stage_err("window_dft"))?;
        let x_re = vm.rescale(&products[0]).map_err(stage_err("window_dft"))?;
        let x_im = vm.rescale(&products[1]).map_err(stage_err("window_dft"))?;
        if bi == 0 {
            ledger.push("window_dft", vm.consumed(&x_re));
            dft_snapshot = Some(x_re.clone());
        }
        // |X|^2
        let p = k1_power(vm, &x_re, &x_im).map_err(stage_err("power_spectrum"))?;
        band_power.push(p);
    }
    let resp_out_slots: Vec<usize> = (0..resp_bins.len()).map(|i| i * r).collect();
    let heart_out_slots: Vec<usize> = (0..heart_bins.len())
        .map(|i| (resp_bins.len() + i) * r)
        .collect();
    snapshots.push(StageSnapshot {
        stage: "k3_window_dft".into(),
        depth: ledger.rows.last().map_or(0, |r| r.cumulative),
        vector: dft_snapshot.expect("resp band processed"),
        meaningful: resp_out_slots.clone(),
    });
    ledger.push("power_spectrum", vm.consumed(&band_power[0]));
    snapshots.push(StageSnapshot {
        stage: "k1_power_spectrum".into(),
        depth: vm.consumed(&band_power[0]),
        vector: band_power[0].clone(),
        meaningful: resp_out_slots.clone(),
    });

    // merge the disjoint band spectra and sharpen once
    let merged = vm
        .add(&band_power[0], &band_power[1])
        .map_err(stage_err("merge_sharpen"))?;
    let sharpened = vm
        .mul_ct(&merged, &merged)
        .map_err(stage_err("merge_sharpen"))?;
    ledger.push("merge_sharpen", vm.consumed(&sharpened));
    let mut all_out_slots = resp_out_slots.clone();
    all_out_slots.extend(&heart_out_slots);
    snapshots.push(StageSnapshot {
        stage: "k2_merge_sharpen".into(),
        depth: vm.consumed(&sharpened),
        vector: sharpened.clone(),
        meaningful: all_out_slots,
    });

    // weighted frequency average: plaintext bpm ramp and band mask, then
    // stride folds → scalars at slot 0 (second decrypt point)
    let slots = vm.slot_count;
    let bpm = |k_bin: usize| 60.0 * k_bin as f64 * fs / m_len as f64;
    let mut scalars = Vec::new();
    for (bi, bins) in [&resp_bins, &heart_bins].into_iter().enumerate() {
        let offset = if bi == 0 { 0 } else { resp_bins.len() };
        let mut ramp = vec![0.0; slots];
        let mut mask = vec![0.0; slots];
        for (i, &k_bin) in bins.iter().enumerate() {
            ramp[(offset + i) * r] = bpm(k_bin);
            mask[(offset + i) * r] = 1.0;
        }
        for plain in [ramp, mask] {
            let t = vm
                .mul_pt(&sharpened, &plain)
                .map_err(stage_err("weighted_freq_avg"))?;
            let t = vm.rescale(&t).map_err(stage_err("weighted_freq_avg"))?;
            let reduced =
                fold_stride(vm, &t, r, slots / r).map_err(stage_err("weighted_freq_avg"))?;
            scalars.push(reduced);
        }
    }
    ledger.push("weighted_freq_avg", vm.consumed(&scalars[0]));
    snapshots.push(StageSnapshot {
        stage: "weighted_freq_avg".into(),
        depth: vm.consumed(&scalars[0]),
        vector: scalars[0].clone(),
        meaningful: vec![0],
    });

    let heart_denom = scalars.pop().expect("four fold outputs");
    let heart_numer = scalars.pop().expect("four fold outputs");
    let resp_denom = scalars.pop().expect("four fold outputs");
    let resp_numer = scalars.pop().expect("four fold outputs");
    Ok(VitalsCloudOutput {
        bin_numer: k2.numer,
        bin_denom: k2.denom,
        resp_numer,
        resp_denom,
        heart_numer,
        heart_denom,
        phase_resp: cfg.return_phase_waveform.then(|| band_phase[0].clone()),
        ledger,
        snapshots,
    })
}
