//! RNS polynomials in Z_Q[X]/(X^N + 1).
//!
//! A polynomial is stored as one residue row per active prime of a shared
//! basis. The basis orders chain primes first and key-switching (special)
//! primes last; a poly's `active` list names the basis indices it carries,
//! so chain elements and key-switch-extended elements share one type.

use std::fmt;
use std::sync::Arc;

use super::modmath::{add_mod, inv_mod, mul_mod, sub_mod};
use super::ntt::NttTable;
use super::prime::generate_primes;

/// Coefficient or evaluation (NTT) representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Form {
    Coeff,
    Eval,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RnsError {
    BasisMismatch,
    FormMismatch,
    /// Rescale or level drop requested with a single prime left.
    DepthExhausted,
    NotNttFriendly(u64),
}

impl fmt::Display for RnsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RnsError::BasisMismatch => {
                write!(f, "operands use different RNS bases or active prime sets")
            }
            RnsError::FormMismatch => write!(f, "operands are in different representations"),
            RnsError::DepthExhausted => {
                write!(f, "modulus chain exhausted: a single prime remains")
            }
            RnsError::NotNttFriendly(q) => write!(f, "prime {q} is not ≡ 1 mod 2N"),
        }
    }
}

impl std::error::Error for RnsError {}

/// Ordered list of NTT-friendly primes with per-prime transform tables.
///
/// `chain_len` primes form the rescaling chain; anything after them is
/// key-switching extension material (special primes).
#[derive(Debug)]
pub struct RnsBasis {
    pub ring_dim: usize,
    pub primes: Vec<u64>,
    pub chain_len: usize,
    tables: Vec<NttTable>,
}

impl RnsBasis {
    /// Build a basis from declared bit sizes; `special` of them (at the
    /// tail) are key-switching primes. Generation is deterministic.
    pub fn generate(ring_dim: usize, bits: &[u32], special: usize) -> Arc<Self> {
        let primes = generate_primes(ring_dim, bits);
        let tables = primes.iter().map(|&q| NttTable::new(q, ring_dim)).collect();
        Arc::new(RnsBasis {
            ring_dim,
            chain_len: primes.len() - special,
            primes,
            tables,
        })
    }

    pub fn table(&self, idx: usize) -> &NttTable {
        &self.tables[idx]
    }

    /// Active index list for a chain element at the given prime count.
    pub fn chain_active(&self, count: usize) -> Vec<usize> {
        (0..count).collect()
    }

    /// Active index list for a key-switch-extended element: `count` chain
    /// primes plus every special prime.
    pub fn extended_active(&self, count: usize) -> Vec<usize> {
        let mut v: Vec<usize> = (0..count).collect();
        v.extend(self.chain_len..self.primes.len());
        v
    }
}

#[derive(Clone)]
pub struct RnsPoly {
    pub basis: Arc<RnsBasis>,
    /// Basis indices of the active primes, one residue row each.
    pub active: Vec<usize>,
    pub residues: Vec<Vec<u64>>,
    pub form: Form,
}

impl fmt::Debug for RnsPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "RnsPoly(N={}, primes={:?}, form={:?})",
            self.basis.ring_dim, self.active, self.form
        )
    }
}

impl PartialEq for RnsPoly {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.basis, &other.basis)
            && self.active == other.active
            && self.form == other.form
            && self.residues == other.residues
    }
}

impl RnsPoly {
    pub fn zero(basis: &Arc<RnsBasis>, active: Vec<usize>, form: Form) -> Self {
        let n = basis.ring_dim;
        RnsPoly {
            basis: basis.clone(),
            residues: vec![vec![0u64; n]; active.len()],
            active,
            form,
        }
    }

    /// Lift signed coefficients into every active residue channel.
    pub fn from_i64(basis: &Arc<RnsBasis>, active: Vec<usize>, coeffs: &[i64]) -> Self {
        let n = basis.ring_dim;
        assert_eq!(coeffs.len(), n);
        let residues = active
            .iter()
            .map(|&idx| {
                let q = basis.primes[idx];
                coeffs
                    .iter()
                    .map(|&c| {
                        let r = c % q as i64;
                        if r < 0 {
                            (r + q as i64) as u64
                        } else {
                            r as u64
                        }
                    })
                    .collect()
            })
            .collect();
        RnsPoly {
            basis: basis.clone(),
            active,
            residues,
            form: Form::Coeff,
        }
    }

    pub fn ring_dim(&self) -> usize {
        self.basis.ring_dim
    }

    pub fn prime_count(&self) -> usize {
        self.active.len()
    }

    fn check_compatible(&self, other: &Self) -> Result<(), RnsError> {
        if !Arc::ptr_eq(&self.basis, &other.basis) || self.active != other.active {
            return Err(RnsError::BasisMismatch);
        }
        if self.form != other.form {
            return Err(RnsError::FormMismatch);
        }
        Ok(())
    }

    pub fn to_eval(&self) -> Self {
        match self.form {
            Form::Eval => self.clone(),
            Form::Coeff => {
                let mut out = self.clone();
                for (row, &idx) in out.residues.iter_mut().zip(&out.active) {
                    self.basis.table(idx).forward(row);
                }
                out.form = Form::Eval;
                out
            }
        }
    }

    pub fn to_coeff(&self) -> Self {
        match self.form {
            Form::Coeff => self.clone(),
            Form::Eval => {
                let mut out = self.clone();
                for (row, &idx) in out.residues.iter_mut().zip(&out.active) {
                    self.basis.table(idx).inverse(row);
                }
                out.form = Form::Coeff;
                out
            }
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, RnsError> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (k, row) in out.residues.iter_mut().enumerate() {
            let q = self.basis.primes[self.active[k]];
            for (a, &b) in row.iter_mut().zip(&other.residues[k]) {
                *a = add_mod(*a, b, q);
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, RnsError> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (k, row) in out.residues.iter_mut().enumerate() {
            let q = self.basis.primes[self.active[k]];
            for (a, &b) in row.iter_mut().zip(&other.residues[k]) {
                *a = sub_mod(*a, b, q);
            }
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for (k, row) in out.residues.iter_mut().enumerate() {
            let q = self.basis.primes[self.active[k]];
            for a in row.iter_mut() {
                if *a != 0 {
                    *a = q - *a;
                }
            }
        }
        out
    }

    /// Product mod (X^N + 1, q_i) per active prime. Accepts any forms;
    /// returns coefficient form.
    pub fn mul(&self, other: &Self) -> Result<Self, RnsError> {
        if !Arc::ptr_eq(&self.basis, &other.basis) || self.active != other.active {
            return Err(RnsError::BasisMismatch);
        }
        let a = self.to_eval();
        let b = other.to_eval();
        let mut out = a.pointwise_mul(&b)?;
        out = out.to_coeff();
        Ok(out)
    }

    /// Slot-wise product of two evaluation-form polynomials.
    pub fn pointwise_mul(&self, other: &Self) -> Result<Self, RnsError> {
        self.check_compatible(other)?;
        debug_assert_eq!(self.form, Form::Eval);
        let mut out = self.clone();
        for (k, row) in out.residues.iter_mut().enumerate() {
            let q = self.basis.primes[self.active[k]];
            for (a, &b) in row.iter_mut().zip(&other.residues[k]) {
                *a = mul_mod(*a, b, q);
            }
        }
        Ok(out)
    }

    /// acc += a ⊙ b, all in evaluation form.
    pub fn pointwise_mul_add_into(acc: &mut Self, a: &Self, b: &Self) -> Result<(), RnsError> {
        acc.check_compatible(a)?;
        acc.check_compatible(b)?;
        for k in 0..acc.residues.len() {
            let q = acc.basis.primes[acc.active[k]];
            let (ar, br) = (&a.residues[k], &b.residues[k]);
            for (j, c) in acc.residues[k].iter_mut().enumerate() {
                *c = add_mod(*c, mul_mod(ar[j], br[j], q), q);
            }
        }
        Ok(())
    }

    /// Per-prime scalar multiply (scalars aligned with `active`).
    pub fn mul_scalar_per_prime(&self, scalars: &[u64]) -> Self {
        let mut out = self.clone();
        for (k, row) in out.residues.iter_mut().enumerate() {
            let q = self.basis.primes[self.active[k]];
            let s = scalars[k] % q;
            for a in row.iter_mut() {
                *a = mul_mod(*a, s, q);
            }
        }
        out
    }

    /// Galois automorphism X → X^g on coefficient form (g odd, taken
    /// mod 2N); coefficient i lands at i·g mod 2N with a sign flip when
    /// it crosses X^N = −1.
    pub fn automorphism(&self, galois_elt: u64) -> Self {
        debug_assert_eq!(self.form, Form::Coeff);
        let n = self.basis.ring_dim;
        let two_n = 2 * n as u64;
        let g = galois_elt % two_n;
        debug_assert_eq!(g % 2, 1, "galois element must be odd");
        let mut out = Self::zero(&self.basis, self.active.clone(), Form::Coeff);
        for (k, row) in self.residues.iter().enumerate() {
            let q = self.basis.primes[self.active[k]];
            for (i, &c) in row.iter().enumerate() {
                let j = (i as u64 * g) % two_n;
                if j < n as u64 {
                    out.residues[k][j as usize] = c;
                } else {
                    out.residues[k][(j - n as u64) as usize] = if c == 0 { 0 } else { q - c };
                }
            }
        }
        out
    }

    /// Exact RNS division-and-round by the last active prime: the
    /// rescale primitive. Rounds to nearest on the centered remainder
    /// (ties cannot occur, primes are odd).
    pub fn drop_last_prime(&self) -> Result<Self, RnsError> {
        if self.active.len() < 2 {
            return Err(RnsError::DepthExhausted);
        }
        debug_assert_eq!(self.form, Form::Coeff);
        let last = self.active.len() - 1;
        let q_l = self.basis.primes[self.active[last]];
        let half = q_l / 2;
        let last_row = &self.residues[last];
        let mut out_active = self.active.clone();
        out_active.pop();
        let mut out = Self::zero(&self.basis, out_active, Form::Coeff);
        for k in 0..out.active.len() {
            let q = self.basis.primes[self.active[k]];
            let inv_ql = inv_mod(q_l % q, q);
            let row = &self.residues[k];
            for j in 0..self.basis.ring_dim {
                let r = last_row[j];
                // centered representative of the dropped residue
                let r_mod_q = if r > half {
                    // r - q_l, reduced into [0, q)
                    sub_mod(r % q, q_l % q, q)
                } else {
                    r % q
                };
                let diff = sub_mod(row[j], r_mod_q, q);
                out.residues[k][j] = mul_mod(diff, inv_ql, q);
            }
        }
        Ok(out)
    }

    /// Drop the last active prime without dividing (modulus truncation,
    /// used for level alignment). The encoded value is unchanged as long
    /// as coefficients stay well below the reduced modulus.
    pub fn mod_drop_last(&self) -> Result<Self, RnsError> {
        if self.active.len() < 2 {
            return Err(RnsError::DepthExhausted);
        }
        let mut out = self.clone();
        out.active.pop();
        out.residues.pop();
        Ok(out)
    }

    /// Project onto a subset of the active primes (rows are copied in the
    /// order of `active`, which must be a subsequence of this poly's).
    pub fn restrict(&self, active: &[usize]) -> Self {
        let rows = active
            .iter()
            .map(|idx| {
                let pos = self
                    .active
                    .iter()
                    .position(|a| a == idx)
                    .expect("restrict: prime not active");
                self.residues[pos].clone()
            })
            .collect();
        RnsPoly {
            basis: self.basis.clone(),
            active: active.to_vec(),
            residues: rows,
            form: self.form,
        }
    }

    /// Extend one residue channel (values in [0, q_src)) to a target
    /// active set by direct reduction. This is the hybrid key-switching
    /// digit lift: sound because each digit is a small integer (< q_src)
    /// interpreted exactly, no CRT needed.
    pub fn lift_channel(basis: &Arc<RnsBasis>, channel: &[u64], target_active: Vec<usize>) -> Self {
        let residues = target_active
            .iter()
            .map(|&idx| {
                let q = basis.primes[idx];
                channel.iter().map(|&v| v % q).collect()
            })
            .collect();
        RnsPoly {
            basis: basis.clone(),
            active: target_active,
            residues,
            form: Form::Coeff,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn basis(n: usize, bits: &[u32]) -> Arc<RnsBasis> {
        RnsBasis::generate(n, bits, 0)
    }

    fn random_poly(b: &Arc<RnsBasis>, rng: &mut ChaCha12Rng) -> RnsPoly {
        let active = b.chain_active(b.primes.len());
        let mut p = RnsPoly::zero(b, active, Form::Coeff);
        for (k, row) in p.residues.iter_mut().enumerate() {
            let q = b.primes[p.active[k]];
            for c in row.iter_mut() {
                *c = rng.random_range(0..q);
            }
        }
        p
    }

    /// O(N^2) schoolbook negacyclic convolution, the multiplication oracle.
    fn schoolbook_negacyclic(a: &RnsPoly, b: &RnsPoly) -> RnsPoly {
        let n = a.ring_dim();
        let mut out = RnsPoly::zero(&a.basis, a.active.clone(), Form::Coeff);
        for k in 0..a.active.len() {
            let q = a.basis.primes[a.active[k]];
            for i in 0..n {
                for j in 0..n {
                    let prod = mul_mod(a.residues[k][i], b.residues[k][j], q);
                    let idx = i + j;
                    if idx < n {
                        out.residues[k][idx] = add_mod(out.residues[k][idx], prod, q);
                    } else {
                        // X^N = -1 wraparound
                        out.residues[k][idx - n] = sub_mod(out.residues[k][idx - n], prod, q);
                    }
                }
            }
        }
        out
    }

    #[test]
    fn ring_mul_matches_schoolbook_oracle() {
        let b = basis(32, &[40, 40]);
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..20 {
            let x = random_poly(&b, &mut rng);
            let y = random_poly(&b, &mut rng);
            assert_eq!(x.mul(&y).unwrap(), schoolbook_negacyclic(&x, &y));
        }
    }

    #[test]
    fn x_times_x_pow_nm1_is_minus_one() {
        let b = basis(32, &[40]);
        let n = 32;
        let active = b.chain_active(1);
        let mut coeffs = vec![0i64; n];
        coeffs[1] = 1;
        let x = RnsPoly::from_i64(&b, active.clone(), &coeffs);
        let mut coeffs2 = vec![0i64; n];
        coeffs2[n - 1] = 1;
        let y = RnsPoly::from_i64(&b, active.clone(), &coeffs2);
        let mut expect = vec![0i64; n];
        expect[0] = -1;
        assert_eq!(x.mul(&y).unwrap(), RnsPoly::from_i64(&b, active, &expect));
    }

    #[test]
    fn mul_by_one_is_identity() {
        let b = basis(32, &[40, 40]);
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let p = random_poly(&b, &mut rng);
        let mut one = vec![0i64; 32];
        one[0] = 1;
        let one = RnsPoly::from_i64(&b, p.active.clone(), &one);
        assert_eq!(one.mul(&p).unwrap(), p);
    }

    #[test]
    fn basis_mismatch_rejected() {
        let b = basis(32, &[40, 40]);
        let full = RnsPoly::zero(&b, b.chain_active(2), Form::Coeff);
        let short = RnsPoly::zero(&b, b.chain_active(1), Form::Coeff);
        assert_eq!(full.mul(&short).unwrap_err(), RnsError::BasisMismatch);
    }

    /// CRT reconstruction of the coefficient at index `j`, centered into
    /// (-Q/2, Q/2]. Big-integer oracle for rescale tests.
    fn crt_centered(p: &RnsPoly, j: usize) -> BigInt {
        let mut q_total = BigInt::from(1u64);
        for &idx in &p.active {
            q_total *= BigInt::from(p.basis.primes[idx]);
        }
        let mut acc = BigInt::from(0u64);
        for (k, &idx) in p.active.iter().enumerate() {
            let q_i = BigInt::from(p.basis.primes[idx]);
            let hat = &q_total / &q_i;
            // hat^{-1} mod q_i via Fermat on u64
            let hat_mod = (&hat % &q_i)
                .to_u64_digits()
                .1
                .first()
                .copied()
                .unwrap_or(0);
            let inv = inv_mod(hat_mod, p.basis.primes[idx]);
            acc += BigInt::from(p.residues[k][j]) * &hat * BigInt::from(inv);
        }
        acc %= &q_total;
        if acc > &q_total / 2 {
            acc -= &q_total;
        }
        acc
    }

    #[test]
    fn drop_last_prime_divides_and_rounds() {
        let b = basis(16, &[40, 40, 40]);
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        let p = random_poly(&b, &mut rng);
        let q_l = BigInt::from(b.primes[2]);
        let dropped = p.drop_last_prime().unwrap();
        for j in 0..16 {
            let before = crt_centered(&p, j);
            let after = crt_centered(&dropped, j);
            // |after - before/q_l| ≤ 1/2  ⟺  |2*after*q_l - 2*before| ≤ q_l
            let lhs: BigInt = after * 2 * &q_l - before * 2;
            assert!(
                lhs.magnitude() <= q_l.magnitude(),
                "rescale rounding off by more than 1/2 at coeff {j}"
            );
        }
    }

    #[test]
    fn drop_exact_multiple_is_exact() {
        // p encoding v * q_last exactly drops to v
        let b = basis(16, &[40, 40]);
        let q_l = b.primes[1];
        let vals: Vec<i64> = (0..16).map(|i| i * 37 - 91).collect();
        let scaled: Vec<i64> = vals.iter().map(|&v| v * q_l as i64).collect();
        // build via from_i64 on 128-bit-safe magnitudes
        let active = b.chain_active(2);
        let mut p = RnsPoly::zero(&b, active.clone(), Form::Coeff);
        for (k, &idx) in active.iter().enumerate() {
            let q = b.primes[idx];
            for (j, &s) in scaled.iter().enumerate() {
                let r = (s as i128).rem_euclid(q as i128) as u64;
                p.residues[k][j] = r;
            }
        }
        let dropped = p.drop_last_prime().unwrap();
        let expect = RnsPoly::from_i64(&b, b.chain_active(1), &vals);
        assert_eq!(dropped, expect);
    }

    #[test]
    fn chain_of_two_exhausts_on_second_drop() {
        let b = basis(16, &[40, 40]);
        let p = RnsPoly::zero(&b, b.chain_active(2), Form::Coeff);
        let once = p.drop_last_prime().unwrap();
        assert_eq!(
            once.drop_last_prime().unwrap_err(),
            RnsError::DepthExhausted
        );
    }

    #[test]
    fn crt_reconstruction_unique_in_range() {
        // spec invariant: CRT reconstruction lands in [0, ΠQ) uniquely —
        // equivalently the centered value roundtrips through residues
        let b = basis(16, &[40, 40]);
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        let p = random_poly(&b, &mut rng);
        for j in 0..4 {
            let v = crt_centered(&p, j);
            for (k, &idx) in p.active.iter().enumerate() {
                let q = BigInt::from(b.primes[idx]);
                let r = ((&v % &q) + &q) % &q;
                assert_eq!(r, BigInt::from(p.residues[k][j]));
            }
        }
    }

    #[test]
    fn automorphism_permutes_with_sign() {
        // g = 3 on N=8: X -> X^3; X^3 -> X^9 = -X
        let b = basis(8, &[40]);
        let active = b.chain_active(1);
        let mut c = vec![0i64; 8];
        c[3] = 5;
        let p = RnsPoly::from_i64(&b, active.clone(), &c);
        let out = p.automorphism(3);
        let mut expect = vec![0i64; 8];
        expect[1] = -5;
        assert_eq!(out, RnsPoly::from_i64(&b, active, &expect));
    }
}
