//! Key generation and hybrid key switching.
//!
//! A key set is a secret key plus evaluation material (public key,
//! relinearization key, Galois keys). The evaluation half is all the cloud
//! ever holds; the secret key stays on the client. One Galois key exists
//! per distinct rotation amount, so the full rotation set of a compiled
//! pipeline must be known at setup.
//!
//! Key switching decomposes the input polynomial into its per-prime RNS
//! digits, MACs them against digit keys carried over the chain plus one
//! 60-bit special prime, and divides the accumulator by that special prime.
//! The division shrinks the digit noise by ~2^60, leaving key-switch noise
//! at the rescale rounding floor.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha12Rng;

use super::encoding::Encoder;
use super::params::CkksParams;
use super::sampling;
use crate::ring::{inv_mod, mul_mod, Form, RnsBasis, RnsPoly};

/// Ternary RLWE secret. Client-side only.
pub struct SecretKey {
    /// s over the full extended basis (chain + special), coefficient form.
    pub s: RnsPoly,
}

/// RLWE encryption key pair (b, a) with b = -(a·s) + e over the full chain.
#[derive(Clone)]
pub struct PublicKey {
    pub b: RnsPoly,
    pub a: RnsPoly,
}

/// Digit keys for switching some target key t back to s: one (b_i, a_i)
/// pair per chain prime, stored in evaluation form over the extended basis.
#[derive(Clone)]
pub struct KeySwitchKey {
    pub digits: Vec<(RnsPoly, RnsPoly)>,
}

/// Everything the evaluator needs; contains no secret material.
pub struct EvalKeys {
    pub public: PublicKey,
    pub relin: KeySwitchKey,
    /// Keyed by normalized rotation amount in [0, slots).
    pub galois: BTreeMap<usize, KeySwitchKey>,
}

/// Secret + evaluation keys, as produced by [`keygen`].
pub struct KeySet {
    pub secret: SecretKey,
    pub eval: EvalKeys,
}

/// Shared CKKS state: parameters, prime basis, transform tables, encoder.
pub struct CkksContext {
    pub params: CkksParams,
    pub basis: Arc<RnsBasis>,
    pub encoder: Encoder,
}

impl CkksContext {
    pub fn new(params: CkksParams) -> Self {
        params.validate().expect("invalid CKKS parameters");
        let basis = RnsBasis::generate(params.ring_dim, &params.prime_bits(), 1);
        let encoder = Encoder::new(params.ring_dim);
        CkksContext {
            params,
            basis,
            encoder,
        }
    }

    pub fn slot_count(&self) -> usize {
        self.params.ring_dim / 2
    }

    pub fn chain_len(&self) -> usize {
        self.basis.chain_len
    }

    /// Normalize a signed rotation amount into [0, slots).
    pub fn normalize_rotation(&self, k: i64) -> usize {
        let s = self.slot_count() as i64;
        k.rem_euclid(s) as usize
    }

    /// Galois element realizing a left rotation by `k` slots.
    pub fn galois_element(&self, k: usize) -> u64 {
        let two_n = 2 * self.params.ring_dim as u64;
        crate::ring::pow_mod(5, k as u64, two_n)
    }

    /// Gadget constant for digit i on basis prime `idx`:
    /// p_special · (Q/q_i) · [(Q/q_i)^{-1}]_{q_i}  mod q_idx.
    fn gadget_scalar(&self, digit: usize, idx: usize) -> u64 {
        let primes = &self.basis.primes;
        let chain = self.basis.chain_len;
        let special = primes[chain]; // single special prime
        let q = primes[idx];
        // hat_i mod q and mod q_i
        let mut hat_mod_q = 1u64;
        let mut hat_mod_qi = 1u64;
        for j in 0..chain {
            if j != digit {
                hat_mod_q = mul_mod(hat_mod_q, primes[j] % q, q);
                hat_mod_qi = mul_mod(hat_mod_qi, primes[j] % primes[digit], primes[digit]);
            }
        }
        let tilde = inv_mod(hat_mod_qi, primes[digit]);
        let g = mul_mod(special % q, hat_mod_q, q);
        mul_mod(g, tilde % q, q)
    }

    /// Generate digit keys encrypting `target` (coefficient form over the
    /// extended basis) under s.
    fn gen_ksk(
        &self,
        s_ext_eval: &RnsPoly,
        target: &RnsPoly,
        rng: &mut ChaCha12Rng,
    ) -> KeySwitchKey {
        let chain = self.basis.chain_len;
        let active = self.basis.extended_active(chain);
        let n = self.params.ring_dim;
        let t_eval = target.to_eval();
        let mut digits = Vec::with_capacity(chain);
        for i in 0..chain {
            // uniform a_i directly in evaluation form
            let mut a = RnsPoly::zero(&self.basis, active.clone(), Form::Eval);
            for (k, row) in a.residues.iter_mut().enumerate() {
                let q = self.basis.primes[active[k]];
                for c in row.iter_mut() {
                    *c = rng.random_range(0..q);
                }
            }
            let e = RnsPoly::from_i64(
                &self.basis,
                active.clone(),
                &sampling::discrete_gaussian(rng, n, self.params.sigma),
            )
            .to_eval();
            let g: Vec<u64> = active
                .iter()
                .map(|&idx| self.gadget_scalar(i, idx))
                .collect();
            let gt = t_eval.mul_scalar_per_prime(&g);
            let b = e
                .sub(&a.pointwise_mul(s_ext_eval).unwrap())
                .unwrap()
                .add(&gt)
                .unwrap();
            digits.push((b, a));
        }
        KeySwitchKey { digits }
    }

    /// Switch `d` (coefficient form over chain primes) from key `t` to s,
    /// where `ksk` encrypts t. Returns the (b, a) contribution pair over
    /// the same chain primes.
    pub fn key_switch(&self, d: &RnsPoly, ksk: &KeySwitchKey) -> (RnsPoly, RnsPoly) {
        let k = d.active.len();
        let target_active = self.basis.extended_active(k);
        let mut acc_b = RnsPoly::zero(&self.basis, target_active.clone(), Form::Eval);
        let mut acc_a = acc_b.clone();
        for i in 0..k {
            let digit =
                RnsPoly::lift_channel(&self.basis, &d.residues[i], target_active.clone()).to_eval();
            let kb = ksk.digits[i].0.restrict(&target_active);
            let ka = ksk.digits[i].1.restrict(&target_active);
            RnsPoly::pointwise_mul_add_into(&mut acc_b, &digit, &kb).unwrap();
            RnsPoly::pointwise_mul_add_into(&mut acc_a, &digit, &ka).unwrap();
        }
        // divide by the special prime (last active row)
        let b = acc_b.to_coeff().drop_last_prime().unwrap();
        let a = acc_a.to_coeff().drop_last_prime().unwrap();
        (b, a)
    }
}

/// Generate a key set with Galois keys for every requested rotation amount.
pub fn keygen(ctx: &CkksContext, rotations: &[i64], rng: &mut ChaCha12Rng) -> KeySet {
    let n = ctx.params.ring_dim;
    let chain = ctx.basis.chain_len;
    let ext = ctx.basis.extended_active(chain);
    let chain_active = ctx.basis.chain_active(chain);

    let s_coeffs = sampling::ternary_uniform(rng, n);
    let s_ext = RnsPoly::from_i64(&ctx.basis, ext.clone(), &s_coeffs);
    let s_ext_eval = s_ext.to_eval();

    // public key over the full chain
    let mut a = RnsPoly::zero(&ctx.basis, chain_active.clone(), Form::Eval);
    for (k, row) in a.residues.iter_mut().enumerate() {
        let q = ctx.basis.primes[chain_active[k]];
        for c in row.iter_mut() {
            *c = rng.random_range(0..q);
        }
    }
    let a = a.to_coeff();
    let e = RnsPoly::from_i64(
        &ctx.basis,
        chain_active.clone(),
        &sampling::discrete_gaussian(rng, n, ctx.params.sigma),
    );
    let s_chain = s_ext.restrict(&chain_active);
    let b = e.sub(&a.mul(&s_chain).unwrap()).unwrap();
    let public = PublicKey { b, a };

    // relinearization key: target s^2 over the extended basis
    let s_sq = s_ext.mul(&s_ext).unwrap();
    let relin = ctx.gen_ksk(&s_ext_eval, &s_sq, rng);

    // Galois keys: target sigma_g(s), one per distinct normalized amount
    let mut galois = BTreeMap::new();
    for &k in rotations {
        let amount = ctx.normalize_rotation(k);
        if amount == 0 || galois.contains_key(&amount) {
            continue;
        }
        let g = ctx.galois_element(amount);
        let s_rot = s_ext.automorphism(g);
        galois.insert(amount, ctx.gen_ksk(&s_ext_eval, &s_rot, rng));
    }

    KeySet {
        secret: SecretKey { s: s_ext },
        eval: EvalKeys {
            public,
            relin,
            galois,
        },
    }
}
