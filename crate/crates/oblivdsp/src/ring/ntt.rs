//! Iterative radix-2 negacyclic NTT with merged ψ-twiddles.
//!
//! Forward is Cooley-Tukey (natural → bit-reversed), inverse is
//! Gentleman-Sande (bit-reversed → natural); composing them with a
//! pointwise product yields multiplication mod (X^N + 1, q) directly,
//! no separate pre/post twist pass. Twiddle factors carry Shoup
//! companions so butterflies avoid 128-bit division.

use super::modmath::{add_mod, inv_mod, mul_mod, mul_mod_shoup, pow_mod, shoup, sub_mod};

/// Precomputed NTT tables for one prime and one ring dimension.
#[derive(Clone, Debug)]
pub struct NttTable {
    pub q: u64,
    pub n: usize,
    /// ψ^bitrev(i), ψ a primitive 2N-th root of unity mod q.
    psi_rev: Vec<u64>,
    psi_rev_shoup: Vec<u64>,
    /// ψ^{-bitrev(i)} companions for the inverse transform.
    psi_inv_rev: Vec<u64>,
    psi_inv_rev_shoup: Vec<u64>,
    n_inv: u64,
    n_inv_shoup: u64,
}

fn bit_reverse(x: usize, bits: u32) -> usize {
    x.reverse_bits() >> (usize::BITS - bits)
}

/// Smallest primitive 2N-th root of unity mod q, found by powering
/// successive bases. Deterministic per (q, N).
fn find_psi(q: u64, n: usize) -> u64 {
    let two_n = 2 * n as u64;
    debug_assert_eq!((q - 1) % two_n, 0);
    let exp = (q - 1) / two_n;
    let mut base = 2u64;
    loop {
        let cand = pow_mod(base, exp, q);
        // cand has order dividing 2N; it is primitive iff cand^N = -1
        if cand != 0 && pow_mod(cand, n as u64, q) == q - 1 {
            return cand;
        }
        base += 1;
    }
}

impl NttTable {
    pub fn new(q: u64, n: usize) -> Self {
        assert!(n.is_power_of_two());
        assert_eq!((q - 1) % (2 * n as u64), 0, "prime {q} not ≡ 1 mod 2N");
        let bits = n.trailing_zeros();
        let psi = find_psi(q, n);
        let psi_inv = inv_mod(psi, q);

        let mut psi_rev = vec![0u64; n];
        let mut psi_inv_rev = vec![0u64; n];
        let mut p = 1u64;
        let mut pi = 1u64;
        let mut pow_fwd = vec![0u64; n];
        let mut pow_inv = vec![0u64; n];
        for i in 0..n {
            pow_fwd[i] = p;
            pow_inv[i] = pi;
            p = mul_mod(p, psi, q);
            pi = mul_mod(pi, psi_inv, q);
        }
        for i in 0..n {
            let r = bit_reverse(i, bits);
            psi_rev[i] = pow_fwd[r];
            psi_inv_rev[i] = pow_inv[r];
        }
        let psi_rev_shoup = psi_rev.iter().map(|&w| shoup(w, q)).collect();
        let psi_inv_rev_shoup = psi_inv_rev.iter().map(|&w| shoup(w, q)).collect();
        let n_inv = inv_mod(n as u64, q);
        Self {
            q,
            n,
            psi_rev,
            psi_rev_shoup,
            psi_inv_rev,
            psi_inv_rev_shoup,
            n_inv,
            n_inv_shoup: shoup(n_inv, q),
        }
    }

    /// In-place forward negacyclic NTT (coefficient → evaluation form).
    pub fn forward(&self, a: &mut [u64]) {
        debug_assert_eq!(a.len(), self.n);
        let q = self.q;
        let n = self.n;
        let mut t = n;
        let mut m = 1;
        while m < n {
            t >>= 1;
            for i in 0..m {
                let j1 = 2 * i * t;
                let w = self.psi_rev[m + i];
                let ws = self.psi_rev_shoup[m + i];
                for j in j1..j1 + t {
                    let u = a[j];
                    let v = mul_mod_shoup(a[j + t], w, ws, q);
                    a[j] = add_mod(u, v, q);
                    a[j + t] = sub_mod(u, v, q);
                }
            }
            m <<= 1;
        }
    }

    /// In-place inverse negacyclic NTT (evaluation → coefficient form).
    pub fn inverse(&self, a: &mut [u64]) {
        debug_assert_eq!(a.len(), self.n);
        let q = self.q;
        let n = self.n;
        let mut t = 1;
        let mut m = n;
        while m > 1 {
            let h = m >> 1;
            let mut j1 = 0;
            for i in 0..h {
                let w = self.psi_inv_rev[h + i];
                let ws = self.psi_inv_rev_shoup[h + i];
                for j in j1..j1 + t {
                    let u = a[j];
                    let v = a[j + t];
                    a[j] = add_mod(u, v, q);
                    a[j + t] = mul_mod_shoup(sub_mod(u, v, q), w, ws, q);
                }
                j1 += 2 * t;
            }
            t <<= 1;
            m = h;
        }
        for x in a.iter_mut() {
            *x = mul_mod_shoup(*x, self.n_inv, self.n_inv_shoup, q);
        }
    }
}
