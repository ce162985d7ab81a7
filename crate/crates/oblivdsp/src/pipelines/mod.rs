//! Client-side preprocessing/packing/encryption, the two cloud-side
//! kernel compositions, and client-side result recovery.
//!
//! Role separation: the cloud circuits ([`vitals_cloud`],
//! [`gesture_cloud`]) consume a [`SlotVm`] that carries evaluation keys
//! only; decryption and result recovery happen exclusively in the runner
//! functions here, which play the client. One pipeline run = one isolated
//! VM and trace.

mod client;
mod cube;
mod gesture;
mod report;
mod vitals;

pub use client::{
    argmax_lowest_tie, client_preprocess, pack_doppler, pack_vital, range_fft, recover_class,
    recover_vitals, unpack_doppler, unpack_vital, ClassResult, DecryptedVitals, NormMode,
    VitalResult,
};
pub use cube::{CubeError, RadarCube, CUBE_MAGIC, CUBE_VERSION};
pub use gesture::{fold_normalization, gesture_cloud, spectral_energy_scale, GestureCloudOutput};
pub use report::{DepthLedger, PipelineReport, StageDepth};
pub use vitals::{band_bins, vitals_cloud, PipelineError, StageSnapshot, VitalsCloudOutput};

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::ckks::{keygen, CkksContext, EvalKeys, SecretKey};
use crate::config::PipelineConfig;
use crate::kernels::{fold_first_layer, FcNetwork};
use crate::oracle::FidelityReport;
use crate::vm::{OpKind, SlotVector, SlotVm, TraceRecord};

/// Which backend evaluates the cloud circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BackendChoice {
    ExactSim,
    Ckks,
}

impl BackendChoice {
    pub fn name(&self) -> &'static str {
        match self {
            BackendChoice::ExactSim => "exactsim",
            BackendChoice::Ckks => "ckks",
        }
    }
}

pub struct VitalsRun {
    pub result: VitalResult,
    pub report: PipelineReport,
    pub trace: TraceRecord,
}

pub struct GestureRun {
    pub result: ClassResult,
    pub report: PipelineReport,
    pub trace: TraceRecord,
}

/// Rotation amounts a trace requested (the Galois closure for keygen).
pub fn rotations_in_trace(trace: &TraceRecord) -> Vec<i64> {
    let set: BTreeSet<i64> = trace
        .events
        .iter()
        .filter_map(|e| match e.op {
            OpKind::Rotate(k) => Some(k),
            _ => None,
        })
        .collect();
    set.into_iter().collect()
}

/// Lattice material for one pipeline run: context plus a key set whose
/// Galois keys cover the circuit's rotation set (discovered by a dry run
/// on the exact simulator). The secret key never enters a VM.
pub struct LatticeSetup {
    pub ctx: Arc<CkksContext>,
    pub eval: Arc<EvalKeys>,
    pub secret: SecretKey,
}

impl LatticeSetup {
    pub fn for_rotations(cfg: &PipelineConfig, rotations: &[i64]) -> Self {
        let ctx = Arc::new(CkksContext::new(cfg.ckks.clone()));
        let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
        let keys = keygen(&ctx, rotations, &mut rng);
        LatticeSetup {
            ctx,
            eval: Arc::new(keys.eval),
            secret: keys.secret,
        }
    }
}

fn read_scalar(vm_is_exact: bool, v: &SlotVector, setup: Option<&LatticeSetup>) -> f64 {
    if vm_is_exact {
        v.plain_values()[0]
    } else {
        let s = setup.expect("lattice setup present for ckks run");
        s.ctx
            .decrypt(v.ciphertext().expect("ciphertext"), &s.secret)[0]
    }
}

fn read_slots(
    vm_is_exact: bool,
    v: &SlotVector,
    slots: &[usize],
    setup: Option<&LatticeSetup>,
) -> Vec<f64> {
    let all = if vm_is_exact {
        v.plain_values().to_vec()
    } else {
        let s = setup.expect("lattice setup present for ckks run");
        s.ctx
            .decrypt(v.ciphertext().expect("ciphertext"), &s.secret)
    };
    slots.iter().map(|&i| all[i]).collect()
}

/// Run the vital-signs pipeline end to end on the chosen backend.
///
/// On the lattice backend a dry run on the exact simulator first collects
/// the rotation set for key generation and provides the per-stage
/// reference values for the fidelity report.
pub fn run_vitals(
    cube: &RadarCube,
    cfg: &PipelineConfig,
    backend: BackendChoice,
) -> Result<VitalsRun, PipelineError> {
    cfg.validate()
        .map_err(|e| PipelineError::Config(e.to_string()))?;
    let digest = cfg.digest();
    let clean = client_preprocess(cube, NormMode::FrameLocal);
    let packed = pack_vital(&clean);

    // exact-simulator pass: the result itself on ExactSim, the reference
    // and Galois closure on Ckks
    let mut dry = SlotVm::exact_sim(&cfg.ckks, cfg.ckks.slot_count(), digest);
    let dry_inputs: (Vec<SlotVector>, Vec<SlotVector>) = (
        packed.iter().map(|(re, _)| dry.input_plain(re)).collect(),
        packed.iter().map(|(_, im)| dry.input_plain(im)).collect(),
    );
    let dry_out = vitals_cloud(&mut dry, &dry_inputs.0, &dry_inputs.1, cfg)?;

    let (out, vm, setup, reference) = match backend {
        BackendChoice::ExactSim => (dry_out, dry, None, None),
        BackendChoice::Ckks => {
            let setup = LatticeSetup::for_rotations(cfg, &rotations_in_trace(&dry.trace));
            let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed.wrapping_add(1));
            let mut vm = SlotVm::ckks(setup.ctx.clone(), setup.eval.clone(), digest);
            let mut re_in = Vec::with_capacity(packed.len());
            let mut im_in = Vec::with_capacity(packed.len());
            for (re, im) in &packed {
                let pt = setup
                    .ctx
                    .encode(re)
                    .map_err(|e| PipelineError::Config(e.to_string()))?;
                re_in.push(vm.input_cipher(setup.ctx.encrypt(&pt, &setup.eval, &mut rng)));
                let pt = setup
                    .ctx
                    .encode(im)
                    .map_err(|e| PipelineError::Config(e.to_string()))?;
                im_in.push(vm.input_cipher(setup.ctx.encrypt(&pt, &setup.eval, &mut rng)));
            }
            let out = vitals_cloud(&mut vm, &re_in, &im_in, cfg)?;
            (out, vm, Some(setup), Some(dry_out))
        }
    };

    let is_exact = backend == BackendChoice::ExactSim;
    let setup_ref = setup.as_ref();
    let dec = DecryptedVitals {
        bin_numer: read_scalar(is_exact, &out.bin_numer, setup_ref),
        bin_denom: read_scalar(is_exact, &out.bin_denom, setup_ref),
        resp_numer: read_scalar(is_exact, &out.resp_numer, setup_ref),
        resp_denom: read_scalar(is_exact, &out.resp_denom, setup_ref),
        heart_numer: read_scalar(is_exact, &out.heart_numer, setup_ref),
        heart_denom: read_scalar(is_exact, &out.heart_denom, setup_ref),
        phase_waveform: out.phase_resp.as_ref().map(|v| {
            let slots: Vec<usize> = (1..cfg.kernel.frames)
                .map(|t| t * cfg.kernel.range_bins)
                .collect();
            read_slots(is_exact, v, &slots, setup_ref)
        }),
    };
    let result = recover_vitals(
        dec,
        cfg.kernel.range_bins,
        cfg.kernel.frames,
        cfg.kernel.gamma,
    );

    let mut report = PipelineReport::new(
        "vitals",
        backend.name(),
        cfg.ckks.profile.tag(),
        digest,
        out.ledger.clone(),
        &vm.trace,
    );
    report.decrypt_points = vec![
        "target bin numerator/denominator after soft attention".into(),
        "per-band rate numerator/denominator at pipeline end".into(),
    ];
    if let Some(reference) = &reference {
        let mut fid = FidelityReport::default();
        for (reference, measured) in reference.snapshots.iter().zip(&out.snapshots) {
            let ref_vals: Vec<f64> = reference
                .meaningful
                .iter()
                .map(|&i| reference.vector.plain_values()[i])
                .collect();
            let got = read_slots(false, &measured.vector, &measured.meaningful, setup_ref);
            fid.push_stage(&measured.stage, measured.depth, &ref_vals, &got)
                .map_err(|e| PipelineError::Config(e.to_string()))?;
        }
        report.fidelity = Some(fid);
    }
    let trace = vm.trace.clone();
    Ok(VitalsRun {
        result,
        report,
        trace,
    })
}

/// Fold the setup-time transforms into the first FC layer: soft-power
/// normalization s^γ/F and (optionally) a slot-to-feature permutation.
pub fn folded_network(cfg: &PipelineConfig, net: &FcNetwork, perm: Option<&[usize]>) -> FcNetwork {
    let eta = fold_normalization(cfg);
    let identity: Vec<usize> = (0..net.layers[0].in_dim()).collect();
    let map = perm.unwrap_or(&identity);
    let mut layers = net.layers.clone();
    layers[0] = fold_first_layer(&net.layers[0], eta, map);
    FcNetwork { layers }
}

/// Run the dynamic-classification pipeline end to end. `net` is the
/// plaintext-trained network in normalized feature space; folding into
/// the encrypted slot order happens here at setup.
pub fn run_gesture(
    cube: &RadarCube,
    cfg: &PipelineConfig,
    net: &FcNetwork,
    backend: BackendChoice,
) -> Result<GestureRun, PipelineError> {
    run_gesture_with(cube, cfg, net, backend, None)
}

/// [`run_gesture`] with an optional pre-built lattice setup so batched
/// runs under one configuration can share key material.
pub fn run_gesture_with(
    cube: &RadarCube,
    cfg: &PipelineConfig,
    net: &FcNetwork,
    backend: BackendChoice,
    shared: Option<&LatticeSetup>,
) -> Result<GestureRun, PipelineError> {
    cfg.validate()
        .map_err(|e| PipelineError::Config(e.to_string()))?;
    let digest = cfg.digest();
    let clean = client_preprocess(cube, NormMode::BatchGlobal);
    let folded = folded_network(cfg, net, None);
    let packed: Vec<(Vec<f64>, Vec<f64>)> = (0..cfg.kernel.frames)
        .map(|t| pack_doppler(&clean, t))
        .collect();

    let mut dry = SlotVm::exact_sim(&cfg.ckks, cfg.ckks.slot_count(), digest);
    let dry_inputs: Vec<(SlotVector, SlotVector)> = packed
        .iter()
        .map(|(re, im)| (dry.input_plain(re), dry.input_plain(im)))
        .collect();
    let dry_out = gesture_cloud(&mut dry, &dry_inputs, cfg, &folded)?;

    let owned_setup;
    let (out, vm, setup, reference) = match backend {
        BackendChoice::ExactSim => (dry_out, dry, None, None),
        BackendChoice::Ckks => {
            let setup = match shared {
                Some(s) => s,
                None => {
                    owned_setup = LatticeSetup::for_rotations(cfg, &rotations_in_trace(&dry.trace));
                    &owned_setup
                }
            };
            let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed.wrapping_add(1));
            let mut vm = SlotVm::ckks(setup.ctx.clone(), setup.eval.clone(), digest);
            let mut inputs = Vec::with_capacity(packed.len());
            for (re, im) in &packed {
                let pt_re = setup
                    .ctx
                    .encode(re)
                    .map_err(|e| PipelineError::Config(e.to_string()))?;
                let pt_im = setup
                    .ctx
                    .encode(im)
                    .map_err(|e| PipelineError::Config(e.to_string()))?;
                inputs.push((
                    vm.input_cipher(setup.ctx.encrypt(&pt_re, &setup.eval, &mut rng)),
                    vm.input_cipher(setup.ctx.encrypt(&pt_im, &setup.eval, &mut rng)),
                ));
            }
            let out = gesture_cloud(&mut vm, &inputs, cfg, &folded)?;
            (out, vm, Some(setup), Some(dry_out))
        }
    };

    let is_exact = backend == BackendChoice::ExactSim;
    let classes = folded.layers.last().map_or(0, |l| l.out_dim());
    let logit_slots: Vec<usize> = (0..classes).collect();
    let logits = read_slots(is_exact, &out.logits, &logit_slots, setup);
    let result = recover_class(logits);

    let mut report = PipelineReport::new(
        "gesture",
        backend.name(),
        cfg.ckks.profile.tag(),
        digest,
        out.ledger.clone(),
        &vm.trace,
    );
    report.decrypt_points = vec!["class logit vector at pipeline end".into()];
    if let Some(reference) = &reference {
        let mut fid = FidelityReport::default();
        for (reference, measured) in reference.snapshots.iter().zip(&out.snapshots) {
            let ref_vals: Vec<f64> = reference
                .meaningful
                .iter()
                .map(|&i| reference.vector.plain_values()[i])
                .collect();
            let got = read_slots(false, &measured.vector, &measured.meaningful, setup);
            fid.push_stage(&measured.stage, measured.depth, &ref_vals, &got)
                .map_err(|e| PipelineError::Config(e.to_string()))?;
        }
        report.fidelity = Some(fid);
    }
    let trace = vm.trace.clone();
    Ok(GestureRun {
        result,
        report,
        trace,
    })
}
