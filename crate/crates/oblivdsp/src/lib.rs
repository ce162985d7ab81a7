//! Data-oblivious encrypted radar DSP.
//!
//! This crate implements a leveled slot-vector machine with two backends —
//! an exact plaintext simulator and an RNS-CKKS lattice backend — plus a
//! library of seven fixed-circuit DSP kernels (energy integration, soft
//! power attention, block-diagonal DFT, soft I/Q extraction, FIR filtering,
//! notch masking, Taylor differential phase) and square-activation FC
//! inference. The kernels compose into two end-to-end pipelines: vital-sign
//! estimation and dynamic radar classification.
//!
//! Every kernel executes the same sequence of additions, multiplications,
//! and rotations regardless of slot contents; the VM records an execution
//! trace so that obliviousness can be checked empirically.
//!
//! Layering, bottom up:
//!
//! - [`ring`]: negacyclic polynomial arithmetic over an RNS prime basis
//! - [`ckks`]: leveled RNS-CKKS (keys, encoding, encrypt/decrypt, eval ops)
//! - [`vm`]: backend-agnostic slot vectors, depth accounting, trace recorder
//! - [`kernels`]: the seven DSP kernels and FC inference
//! - [`synth`]: synthetic FMCW radar cube generator
//! - [`oracle`]: plaintext reference DSP and fidelity metrics
//! - [`pipelines`]: client preprocessing/packing, the two cloud pipelines,
//!   result recovery, reports

pub mod ckks;
pub mod config;
pub mod fixtures;
pub mod kernels;
pub mod oracle;
pub mod pipelines;
pub mod ring;
pub mod synth;
pub mod vm;

mod digest;

pub use digest::Fnv1a;
// re-export: RadarCube exposes complex samples in its public API
pub use num_complex::Complex64;
