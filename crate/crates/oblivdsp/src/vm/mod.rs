//! Backend-agnostic leveled slot-vector machine.
//!
//! Five primitive operations (add, ciphertext multiply, plaintext multiply,
//! rotate, rescale) over packed slot vectors, with uniform depth/level
//! accounting and a trace recorder. Two backends: `ExactSim` computes the
//! exact slot-wise arithmetic on f64 vectors while still modelling level
//! and scale bookkeeping against the real modulus chain; `Ckks` evaluates
//! on the lattice backend using evaluation keys only (no secret material
//! ever enters a VM).
//!
//! Level discipline: a ciphertext-ciphertext multiply relinearizes and
//! rescales, consuming one level; a plaintext multiply leaves the level
//! alone (scale grows by Δ) until an explicit rescale; add and rotate are
//! depth-free. Binary ops auto-align operand levels by dropping primes
//! from the fresher operand; those drops are recorded as rescale events.

mod trace;

use std::sync::Arc;

use crate::ckks::{CkksCiphertext, CkksContext, CkksError, EvalKeys};
use crate::ring::generate_primes;

pub use trace::{OpKind, TraceComparison, TraceEvent, TraceRecord};

#[derive(Debug, Clone, PartialEq)]
pub enum VmError {
    DepthExhausted { level: usize, needed: usize },
    SlotCountMismatch { left: usize, right: usize },
    ScaleMismatch { left: f64, right: f64 },
    PlainLengthMismatch { expected: usize, got: usize },
    BackendMismatch,
    Ckks(String),
}

impl std::fmt::Display for VmError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VmError::DepthExhausted { level, needed } => {
                write!(
                    f,
                    "depth exhausted: level {level}, operation needs {needed}"
                )
            }
            VmError::SlotCountMismatch { left, right } => {
                write!(f, "slot count mismatch: {left} vs {right}")
            }
            VmError::ScaleMismatch { left, right } => {
                write!(f, "scale mismatch: {left:e} vs {right:e}")
            }
            VmError::PlainLengthMismatch { expected, got } => {
                write!(f, "plaintext operand length {got}, expected {expected}")
            }
            VmError::BackendMismatch => write!(f, "slot vector belongs to a different backend"),
            VmError::Ckks(e) => write!(f, "ckks: {e}"),
        }
    }
}

impl std::error::Error for VmError {}

impl From<CkksError> for VmError {
    fn from(e: CkksError) -> Self {
        match e {
            CkksError::LevelExhausted => VmError::DepthExhausted {
                level: 0,
                needed: 1,
            },
            other => VmError::Ckks(other.to_string()),
        }
    }
}

#[derive(Clone)]
enum SlotData {
    Plain(Vec<f64>),
    Cipher(CkksCiphertext),
}

/// Handle to a packed (simulated-)encrypted vector: backend payload plus
/// level, scale, and slot count.
#[derive(Clone)]
pub struct SlotVector {
    data: SlotData,
    pub level: usize,
    pub scale: f64,
    pub slots: usize,
}

impl SlotVector {
    /// Exact-sim payload (panics on a ciphertext payload).
    pub fn plain_values(&self) -> &[f64] {
        match &self.data {
            SlotData::Plain(v) => v,
            SlotData::Cipher(_) => panic!("ciphertext slot vector has no plaintext view"),
        }
    }

    pub fn ciphertext(&self) -> Option<&CkksCiphertext> {
        match &self.data {
            SlotData::Cipher(ct) => Some(ct),
            SlotData::Plain(_) => None,
        }
    }
}

enum Backend {
    Exact,
    Ckks {
        ctx: Arc<CkksContext>,
        keys: Arc<EvalKeys>,
    },
}

/// The slot machine: one per pipeline run; owns that run's trace.
pub struct SlotVm {
    backend: Backend,
    /// Chain primes, index 0 first; rescale at level l divides by primes[l].
    chain_primes: Vec<u64>,
    pub delta: f64,
    pub slot_count: usize,
    pub depth: usize,
    pub trace: TraceRecord,
}

impl SlotVm {
    /// Exact simulator sharing the given CKKS parameter set's chain so the
    /// level/scale trajectory matches the lattice backend exactly.
    /// `slot_count` may differ from N/2 for standalone kernel runs.
    pub fn exact_sim(
        params: &crate::ckks::CkksParams,
        slot_count: usize,
        config_digest: u64,
    ) -> Self {
        let bits = params.prime_bits();
        let chain_bits = &bits[..bits.len() - 1]; // special prime not part of the chain
        let chain_primes = generate_primes(params.ring_dim, chain_bits);
        SlotVm {
            backend: Backend::Exact,
            chain_primes,
            delta: params.delta(),
            slot_count,
            depth: params.depth,
            trace: TraceRecord::new(config_digest),
        }
    }

    /// Lattice backend; holds evaluation keys only.
    pub fn ckks(ctx: Arc<CkksContext>, keys: Arc<EvalKeys>, config_digest: u64) -> Self {
        let chain_primes = ctx.basis.primes[..ctx.chain_len()].to_vec();
        SlotVm {
            slot_count: ctx.slot_count(),
            delta: ctx.params.delta(),
            depth: ctx.params.depth,
            backend: Backend::Ckks { ctx, keys },
            chain_primes,
            trace: TraceRecord::new(config_digest),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.backend, Backend::Exact)
    }

    /// Fresh full-depth vector from plaintext values (exact-sim inputs and
    /// plaintext reference runs).
    pub fn input_plain(&self, values: &[f64]) -> SlotVector {
        assert!(values.len() <= self.slot_count);
        let mut v = values.to_vec();
        v.resize(self.slot_count, 0.0);
        SlotVector {
            data: SlotData::Plain(v),
            level: self.depth,
            scale: self.delta,
            slots: self.slot_count,
        }
    }

    /// Wrap a client-encrypted ciphertext (CKKS backend inputs).
    pub fn input_cipher(&self, ct: CkksCiphertext) -> SlotVector {
        SlotVector {
            level: ct.level(),
            scale: ct.scale,
            slots: ct.slots,
            data: SlotData::Cipher(ct),
        }
    }

    fn ckks_parts(&self) -> (&Arc<CkksContext>, &Arc<EvalKeys>) {
        match &self.backend {
            Backend::Ckks { ctx, keys } => (ctx, keys),
            Backend::Exact => unreachable!("exact backend has no ckks parts"),
        }
    }

    fn check_pair(&self, a: &SlotVector, b: &SlotVector) -> Result<(), VmError> {
        if a.slots != b.slots {
            return Err(VmError::SlotCountMismatch {
                left: a.slots,
                right: b.slots,
            });
        }
        Ok(())
    }

    /// Drop primes from the fresher operand until levels match; the drops
    /// are modulus truncations (scale-preserving) and are traced as
    /// rescale events.
    pub fn align(
        &mut self,
        a: &SlotVector,
        b: &SlotVector,
    ) -> Result<(SlotVector, SlotVector), VmError> {
        let mut a = a.clone();
        let mut b = b.clone();
        while a.level > b.level {
            a = self.level_drop(&a)?;
        }
        while b.level > a.level {
            b = self.level_drop(&b)?;
        }
        Ok((a, b))
    }

    /// Scale-preserving drop of one prime (level alignment).
    pub fn level_drop(&mut self, v: &SlotVector) -> Result<SlotVector, VmError> {
        if v.level == 0 {
            return Err(VmError::DepthExhausted {
                level: 0,
                needed: 1,
            });
        }
        self.trace.push(OpKind::Rescale, v.slots, v.level);
        let data = match &v.data {
            SlotData::Plain(x) => SlotData::Plain(x.clone()),
            SlotData::Cipher(ct) => {
                let (ctx, _) = self.ckks_parts();
                SlotData::Cipher(ctx.mod_drop(ct)?)
            }
        };
        Ok(SlotVector {
            data,
            level: v.level - 1,
            scale: v.scale,
            slots: v.slots,
        })
    }

    pub fn add(&mut self, a: &SlotVector, b: &SlotVector) -> Result<SlotVector, VmError> {
        self.binary_add(a, b, false)
    }

    pub fn sub(&mut self, a: &SlotVector, b: &SlotVector) -> Result<SlotVector, VmError> {
        self.binary_add(a, b, true)
    }

    fn binary_add(
        &mut self,
        a: &SlotVector,
        b: &SlotVector,
        negate: bool,
    ) -> Result<SlotVector, VmError> {
        self.check_pair(a, b)?;
        let (a, b) = self.align(a, b)?;
        // scales must agree up to prime jitter (primes sit ~2^-24 relative off Δ)
        if (a.scale / b.scale - 1.0).abs() > 1e-5 {
            return Err(VmError::ScaleMismatch {
                left: a.scale,
                right: b.scale,
            });
        }
        self.trace.push(OpKind::Add, a.slots, a.level);
        let data = match (&a.data, &b.data) {
            (SlotData::Plain(x), SlotData::Plain(y)) => SlotData::Plain(
                x.iter()
                    .zip(y)
                    .map(|(p, q)| if negate { p - q } else { p + q })
                    .collect(),
            ),
            (SlotData::Cipher(x), SlotData::Cipher(y)) => {
                let (ctx, _) = self.ckks_parts();
                SlotData::Cipher(if negate {
                    ctx.eval_sub(x, y)?
                } else {
                    ctx.eval_add(x, y)?
                })
            }
            _ => return Err(VmError::BackendMismatch),
        };
        Ok(SlotVector {
            data,
            level: a.level,
            scale: a.scale,
            slots: a.slots,
        })
    }

    /// Ciphertext-ciphertext multiply: relinearize and rescale, one level.
    pub fn mul_ct(&mut self, a: &SlotVector, b: &SlotVector) -> Result<SlotVector, VmError> {
        self.check_pair(a, b)?;
        let (a, b) = self.align(a, b)?;
        if a.level == 0 {
            return Err(VmError::DepthExhausted {
                level: 0,
                needed: 1,
            });
        }
        self.trace.push(OpKind::MulCt, a.slots, a.level);
        self.trace.push(OpKind::Rescale, a.slots, a.level);
        let q = self.chain_primes[a.level] as f64;
        let data = match (&a.data, &b.data) {
            (SlotData::Plain(x), SlotData::Plain(y)) => {
                SlotData::Plain(x.iter().zip(y).map(|(p, v)| p * v).collect())
            }
            (SlotData::Cipher(x), SlotData::Cipher(y)) => {
                let (ctx, keys) = self.ckks_parts();
                SlotData::Cipher(ctx.rescale(&ctx.eval_mul_ct(x, y, keys)?)?)
            }
            _ => return Err(VmError::BackendMismatch),
        };
        Ok(SlotVector {
            data,
            level: a.level - 1,
            scale: a.scale * b.scale / q,
            slots: a.slots,
        })
    }

    /// Plaintext multiply at the nominal scale; level unchanged, scale
    /// grows by Δ until an explicit rescale.
    pub fn mul_pt(&mut self, a: &SlotVector, plain: &[f64]) -> Result<SlotVector, VmError> {
        if plain.len() != a.slots {
            return Err(VmError::PlainLengthMismatch {
                expected: a.slots,
                got: plain.len(),
            });
        }
        self.trace.push(OpKind::MulPt, a.slots, a.level);
        let data = match &a.data {
            SlotData::Plain(x) => {
                SlotData::Plain(x.iter().zip(plain).map(|(p, q)| p * q).collect())
            }
            SlotData::Cipher(ct) => {
                let (ctx, _) = self.ckks_parts();
                let pt = ctx.encode_at(plain, ctx.params.delta(), ct.prime_count())?;
                SlotData::Cipher(ctx.eval_mul_pt(ct, &pt)?)
            }
        };
        Ok(SlotVector {
            data,
            level: a.level,
            scale: a.scale * self.delta,
            slots: a.slots,
        })
    }

    /// Plaintext add at the operand's current scale; depth-free.
    pub fn add_pt(&mut self, a: &SlotVector, plain: &[f64]) -> Result<SlotVector, VmError> {
        if plain.len() != a.slots {
            return Err(VmError::PlainLengthMismatch {
                expected: a.slots,
                got: plain.len(),
            });
        }
        self.trace.push(OpKind::Add, a.slots, a.level);
        let data = match &a.data {
            SlotData::Plain(x) => {
                SlotData::Plain(x.iter().zip(plain).map(|(p, q)| p + q).collect())
            }
            SlotData::Cipher(ct) => {
                let (ctx, _) = self.ckks_parts();
                let pt = ctx.encode_at(plain, ct.scale, ct.prime_count())?;
                SlotData::Cipher(ctx.eval_add_pt(ct, &pt)?)
            }
        };
        Ok(SlotVector {
            data,
            level: a.level,
            scale: a.scale,
            slots: a.slots,
        })
    }

    /// Cyclic left rotation by k slots; depth-free, needs a Galois key on
    /// the lattice backend.
    pub fn rotate(&mut self, a: &SlotVector, k: i64) -> Result<SlotVector, VmError> {
        self.trace.push(OpKind::Rotate(k), a.slots, a.level);
        let data = match &a.data {
            SlotData::Plain(x) => {
                let s = a.slots as i64;
                let shift = k.rem_euclid(s) as usize;
                let mut out = Vec::with_capacity(a.slots);
                out.extend_from_slice(&x[shift..]);
                out.extend_from_slice(&x[..shift]);
                SlotData::Plain(out)
            }
            SlotData::Cipher(ct) => {
                let (ctx, keys) = self.ckks_parts();
                SlotData::Cipher(ctx.eval_rotate(ct, k, keys)?)
            }
        };
        Ok(SlotVector {
            data,
            level: a.level,
            scale: a.scale,
            slots: a.slots,
        })
    }

    /// Exact-division rescale: scale shrinks by the dropped prime, one
    /// level consumed.
    pub fn rescale(&mut self, a: &SlotVector) -> Result<SlotVector, VmError> {
        if a.level == 0 {
            return Err(VmError::DepthExhausted {
                level: 0,
                needed: 1,
            });
        }
        self.trace.push(OpKind::Rescale, a.slots, a.level);
        let q = self.chain_primes[a.level] as f64;
        let data = match &a.data {
            SlotData::Plain(x) => SlotData::Plain(x.clone()),
            SlotData::Cipher(ct) => {
                let (ctx, _) = self.ckks_parts();
                SlotData::Cipher(ctx.rescale(ct)?)
            }
        };
        Ok(SlotVector {
            data,
            level: a.level - 1,
            scale: a.scale / q,
            slots: a.slots,
        })
    }

    /// The levels a vector has consumed so far.
    pub fn consumed(&self, v: &SlotVector) -> usize {
        self.depth - v.level
    }
}

/// Compare two traces element-wise (standalone convenience mirroring
/// `TraceRecord::equals`).
pub fn trace_equals(a: &TraceRecord, b: &TraceRecord) -> TraceComparison {
    a.equals(b)
}
