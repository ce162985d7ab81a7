//! Ciphertexts and the homomorphic evaluation operations.

use std::fmt;

use rand_chacha::ChaCha12Rng;

use super::keys::{CkksContext, EvalKeys, SecretKey};
use super::sampling;
use crate::ring::{RnsError, RnsPoly};

#[derive(Debug, Clone, PartialEq)]
pub enum CkksError {
    /// An operation needed a level on a level-0 ciphertext.
    LevelExhausted,
    MissingGaloisKey(i64),
    ScaleMismatch {
        left: f64,
        right: f64,
    },
    /// Scaled plaintext would not fit the active modulus.
    EncodeOverflow,
    LevelMismatch {
        left: usize,
        right: usize,
    },
    Ring(String),
}

impl fmt::Display for CkksError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CkksError::LevelExhausted => write!(f, "multiplicative depth exhausted"),
            CkksError::MissingGaloisKey(k) => write!(f, "no Galois key for rotation amount {k}"),
            CkksError::ScaleMismatch { left, right } => {
                write!(f, "scale mismatch: {left:e} vs {right:e}")
            }
            CkksError::EncodeOverflow => write!(f, "scaled value overflows the active modulus"),
            CkksError::LevelMismatch { left, right } => {
                write!(f, "level mismatch: {left} vs {right}")
            }
            CkksError::Ring(e) => write!(f, "ring error: {e}"),
        }
    }
}

impl std::error::Error for CkksError {}

impl From<RnsError> for CkksError {
    fn from(e: RnsError) -> Self {
        match e {
            RnsError::DepthExhausted => CkksError::LevelExhausted,
            other => CkksError::Ring(other.to_string()),
        }
    }
}

/// Encoded (unencrypted) slot vector.
#[derive(Clone)]
pub struct CkksPlaintext {
    pub poly: RnsPoly,
    pub scale: f64,
}

/// An RLWE ciphertext pair with tracked scale.
#[derive(Clone)]
pub struct CkksCiphertext {
    pub c0: RnsPoly,
    pub c1: RnsPoly,
    pub scale: f64,
    pub slots: usize,
}

impl CkksCiphertext {
    pub fn prime_count(&self) -> usize {
        self.c0.active.len()
    }

    /// Remaining multiplicative depth.
    pub fn level(&self) -> usize {
        self.prime_count() - 1
    }
}

fn scales_match(a: f64, b: f64) -> bool {
    // equal up to chain-prime jitter around the nominal scale
    (a / b - 1.0).abs() < 1e-5
}

impl CkksContext {
    /// Product of the first `count` chain primes as f64.
    fn modulus_f64(&self, count: usize) -> f64 {
        self.basis.primes[..count]
            .iter()
            .map(|&q| q as f64)
            .product()
    }

    pub fn encode_at(
        &self,
        values: &[f64],
        scale: f64,
        prime_count: usize,
    ) -> Result<CkksPlaintext, CkksError> {
        if values.len() > self.slot_count() {
            return Err(CkksError::EncodeOverflow);
        }
        let max_coeff = self.encoder.max_coeff(values, scale);
        if max_coeff * 2.0 >= self.modulus_f64(prime_count) {
            return Err(CkksError::EncodeOverflow);
        }
        let active = self.basis.chain_active(prime_count);
        let poly = self.encoder.encode(&self.basis, active, values, scale);
        Ok(CkksPlaintext { poly, scale })
    }

    /// Encode at the nominal scale over the full chain.
    pub fn encode(&self, values: &[f64]) -> Result<CkksPlaintext, CkksError> {
        self.encode_at(values, self.params.delta(), self.chain_len())
    }

    pub fn decode(&self, pt: &CkksPlaintext) -> Vec<f64> {
        self.encoder.decode(&pt.poly, pt.scale)
    }

    pub fn encrypt(
        &self,
        pt: &CkksPlaintext,
        keys: &EvalKeys,
        rng: &mut ChaCha12Rng,
    ) -> CkksCiphertext {
        let n = self.params.ring_dim;
        let active = pt.poly.active.clone();
        let v = RnsPoly::from_i64(&self.basis, active.clone(), &sampling::zo_half(rng, n));
        let e0 = RnsPoly::from_i64(
            &self.basis,
            active.clone(),
            &sampling::discrete_gaussian(rng, n, self.params.sigma),
        );
        let e1 = RnsPoly::from_i64(
            &self.basis,
            active.clone(),
            &sampling::discrete_gaussian(rng, n, self.params.sigma),
        );
        let pk_b = keys.public.b.restrict(&active);
        let pk_a = keys.public.a.restrict(&active);
        let c0 = pk_b
            .mul(&v)
            .unwrap()
            .add(&e0)
            .unwrap()
            .add(&pt.poly)
            .unwrap();
        let c1 = pk_a.mul(&v).unwrap().add(&e1).unwrap();
        CkksCiphertext {
            c0,
            c1,
            scale: pt.scale,
            slots: self.slot_count(),
        }
    }

    pub fn decrypt(&self, ct: &CkksCiphertext, sk: &SecretKey) -> Vec<f64> {
        let s = sk.s.restrict(&ct.c0.active);
        let m = ct.c0.add(&ct.c1.mul(&s).unwrap()).unwrap();
        self.encoder.decode(&m, ct.scale)
    }

    fn check_binop(a: &CkksCiphertext, b: &CkksCiphertext) -> Result<(), CkksError> {
        if a.prime_count() != b.prime_count() {
            return Err(CkksError::LevelMismatch {
                left: a.level(),
                right: b.level(),
            });
        }
        if !scales_match(a.scale, b.scale) {
            return Err(CkksError::ScaleMismatch {
                left: a.scale,
                right: b.scale,
            });
        }
        Ok(())
    }

    pub fn eval_add(
        &self,
        a: &CkksCiphertext,
        b: &CkksCiphertext,
    ) -> Result<CkksCiphertext, CkksError> {
        Self::check_binop(a, b)?;
        Ok(CkksCiphertext {
            c0: a.c0.add(&b.c0)?,
            c1: a.c1.add(&b.c1)?,
            scale: a.scale,
            slots: a.slots,
        })
    }

    pub fn eval_sub(
        &self,
        a: &CkksCiphertext,
        b: &CkksCiphertext,
    ) -> Result<CkksCiphertext, CkksError> {
        Self::check_binop(a, b)?;
        Ok(CkksCiphertext {
            c0: a.c0.sub(&b.c0)?,
            c1: a.c1.sub(&b.c1)?,
            scale: a.scale,
            slots: a.slots,
        })
    }

    pub fn eval_neg(&self, a: &CkksCiphertext) -> CkksCiphertext {
        CkksCiphertext {
            c0: a.c0.neg(),
            c1: a.c1.neg(),
            scale: a.scale,
            slots: a.slots,
        }
    }

    /// Ciphertext-ciphertext multiply with relinearization. Scale becomes
    /// the product; the caller rescales.
    pub fn eval_mul_ct(
        &self,
        a: &CkksCiphertext,
        b: &CkksCiphertext,
        keys: &EvalKeys,
    ) -> Result<CkksCiphertext, CkksError> {
        if a.prime_count() != b.prime_count() {
            return Err(CkksError::LevelMismatch {
                left: a.level(),
                right: b.level(),
            });
        }
        if a.prime_count() < 2 {
            return Err(CkksError::LevelExhausted);
        }
        let a0 = a.c0.to_eval();
        let a1 = a.c1.to_eval();
        let b0 = b.c0.to_eval();
        let b1 = b.c1.to_eval();
        let d0 = a0.pointwise_mul(&b0)?;
        let d1 = a0.pointwise_mul(&b1)?.add(&a1.pointwise_mul(&b0)?)?;
        let d2 = a1.pointwise_mul(&b1)?.to_coeff();
        let (kb, ka) = self.key_switch(&d2, &keys.relin);
        Ok(CkksCiphertext {
            c0: d0.to_coeff().add(&kb)?,
            c1: d1.to_coeff().add(&ka)?,
            scale: a.scale * b.scale,
            slots: a.slots,
        })
    }

    /// Plaintext multiply; no rescale, scale becomes ct.scale · pt.scale.
    pub fn eval_mul_pt(
        &self,
        ct: &CkksCiphertext,
        pt: &CkksPlaintext,
    ) -> Result<CkksCiphertext, CkksError> {
        if ct.prime_count() != pt.poly.active.len() {
            return Err(CkksError::LevelMismatch {
                left: ct.level(),
                right: pt.poly.active.len() - 1,
            });
        }
        let m = pt.poly.to_eval();
        Ok(CkksCiphertext {
            c0: ct.c0.to_eval().pointwise_mul(&m)?.to_coeff(),
            c1: ct.c1.to_eval().pointwise_mul(&m)?.to_coeff(),
            scale: ct.scale * pt.scale,
            slots: ct.slots,
        })
    }

    /// Plaintext add; the plaintext must be encoded at the ciphertext scale.
    pub fn eval_add_pt(
        &self,
        ct: &CkksCiphertext,
        pt: &CkksPlaintext,
    ) -> Result<CkksCiphertext, CkksError> {
        if !scales_match(ct.scale, pt.scale) {
            return Err(CkksError::ScaleMismatch {
                left: ct.scale,
                right: pt.scale,
            });
        }
        Ok(CkksCiphertext {
            c0: ct.c0.add(&pt.poly)?,
            c1: ct.c1.clone(),
            scale: ct.scale,
            slots: ct.slots,
        })
    }

    /// Cyclic left rotation by k slots (negative k rotates right).
    pub fn eval_rotate(
        &self,
        ct: &CkksCiphertext,
        k: i64,
        keys: &EvalKeys,
    ) -> Result<CkksCiphertext, CkksError> {
        let amount = self.normalize_rotation(k);
        if amount == 0 {
            return Ok(ct.clone());
        }
        let ksk = keys
            .galois
            .get(&amount)
            .ok_or(CkksError::MissingGaloisKey(k))?;
        let g = self.galois_element(amount);
        let c0r = ct.c0.automorphism(g);
        let c1r = ct.c1.automorphism(g);
        let (kb, ka) = self.key_switch(&c1r, ksk);
        Ok(CkksCiphertext {
            c0: c0r.add(&kb)?,
            c1: ka,
            scale: ct.scale,
            slots: ct.slots,
        })
    }

    /// Drop the last chain prime with exact division: scale shrinks by
    /// that prime, one level is consumed.
    pub fn rescale(&self, ct: &CkksCiphertext) -> Result<CkksCiphertext, CkksError> {
        let count = ct.prime_count();
        if count < 2 {
            return Err(CkksError::LevelExhausted);
        }
        let q_last = self.basis.primes[ct.c0.active[count - 1]] as f64;
        Ok(CkksCiphertext {
            c0: ct.c0.drop_last_prime()?,
            c1: ct.c1.drop_last_prime()?,
            scale: ct.scale / q_last,
            slots: ct.slots,
        })
    }

    /// Drop the last chain prime without dividing (level alignment).
    pub fn mod_drop(&self, ct: &CkksCiphertext) -> Result<CkksCiphertext, CkksError> {
        Ok(CkksCiphertext {
            c0: ct.c0.mod_drop_last()?,
            c1: ct.c1.mod_drop_last()?,
            scale: ct.scale,
            slots: ct.slots,
        })
    }
}
