//! Canonical-embedding encoding between real slot vectors and ring
//! elements.
//!
//! Slot j of a plaintext m(X) is the evaluation m(ζ^{5^j}) with ζ the
//! primitive 2N-th complex root of unity; the transform and its inverse
//! run in O(N log N) using the power-of-five rotation group, so packing
//! N/2 reals costs about as much as an FFT of that length.

use num_complex::Complex64;
use std::sync::Arc;

use crate::ring::{Form, RnsBasis, RnsPoly};

pub struct Encoder {
    pub ring_dim: usize,
    /// ksi_pows[j] = exp(2πi · j / 2N), j in [0, 2N]
    ksi_pows: Vec<Complex64>,
    /// rot_group[i] = 5^i mod 2N
    rot_group: Vec<usize>,
}

fn bit_reverse_inplace(vals: &mut [Complex64]) {
    let n = vals.len();
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j ^= bit;
        if i < j {
            vals.swap(i, j);
        }
    }
}

impl Encoder {
    pub fn new(ring_dim: usize) -> Self {
        let m = 2 * ring_dim;
        let ksi_pows = (0..=m)
            .map(|j| {
                let angle = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
                Complex64::new(angle.cos(), angle.sin())
            })
            .collect();
        let slots = ring_dim / 2;
        let mut rot_group = Vec::with_capacity(slots);
        let mut five = 1usize;
        for _ in 0..slots {
            rot_group.push(five);
            five = (five * 5) % m;
        }
        Encoder {
            ring_dim,
            ksi_pows,
            rot_group,
        }
    }

    /// Forward special FFT: coefficients-packed complex values → slots.
    fn fft(&self, vals: &mut [Complex64]) {
        let size = vals.len();
        let m = 2 * self.ring_dim;
        bit_reverse_inplace(vals);
        let mut len = 2;
        while len <= size {
            let lenh = len >> 1;
            let lenq = len << 2;
            for i in (0..size).step_by(len) {
                for j in 0..lenh {
                    let idx = (self.rot_group[j] % lenq) * m / lenq;
                    let u = vals[i + j];
                    let v = vals[i + j + lenh] * self.ksi_pows[idx];
                    vals[i + j] = u + v;
                    vals[i + j + lenh] = u - v;
                }
            }
            len <<= 1;
        }
    }

    /// Inverse special FFT: slots → coefficients-packed complex values.
    fn fft_inv(&self, vals: &mut [Complex64]) {
        let size = vals.len();
        let m = 2 * self.ring_dim;
        let mut len = size;
        while len >= 2 {
            let lenh = len >> 1;
            let lenq = len << 2;
            for i in (0..size).step_by(len) {
                for j in 0..lenh {
                    let idx = (lenq - (self.rot_group[j] % lenq)) * m / lenq;
                    let u = vals[i + j] + vals[i + j + lenh];
                    let v = (vals[i + j] - vals[i + j + lenh]) * self.ksi_pows[idx];
                    vals[i + j] = u;
                    vals[i + j + lenh] = v;
                }
            }
            len >>= 1;
        }
        let scale = 1.0 / size as f64;
        for v in vals.iter_mut() {
            *v *= scale;
        }
        bit_reverse_inplace(vals);
    }

    /// Real coefficient vector (length N, possibly huge values) of the
    /// scaled embedding of `values`.
    fn embed(&self, values: &[f64], scale: f64) -> Vec<f64> {
        let slots = self.ring_dim / 2;
        assert!(values.len() <= slots, "at most N/2 values fit");
        let mut u: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        u.resize(slots, Complex64::new(0.0, 0.0));
        self.fft_inv(&mut u);
        let mut coeffs = vec![0.0f64; self.ring_dim];
        for j in 0..slots {
            coeffs[j] = (u[j].re * scale).round();
            coeffs[j + slots] = (u[j].im * scale).round();
        }
        coeffs
    }

    /// Encode into a coefficient-form RNS element over `active` primes.
    /// Coefficient magnitudes above 2^63 are reduced through f64 modular
    /// arithmetic (their relative error ~2^-52 lands far below the noise
    /// already present at such scales).
    pub fn encode(
        &self,
        basis: &Arc<RnsBasis>,
        active: Vec<usize>,
        values: &[f64],
        scale: f64,
    ) -> RnsPoly {
        let coeffs = self.embed(values, scale);
        let mut poly = RnsPoly::zero(basis, active, Form::Coeff);
        let exact = coeffs.iter().all(|c| c.abs() < 9.0e18);
        if exact {
            let ic: Vec<i64> = coeffs.iter().map(|&c| c as i64).collect();
            return RnsPoly::from_i64(basis, poly.active, &ic);
        }
        for (k, row) in poly.residues.iter_mut().enumerate() {
            let q = basis.primes[poly.active[k]] as f64;
            for (j, r) in row.iter_mut().enumerate() {
                let c = coeffs[j];
                let m = c - (c / q).floor() * q;
                *r = (m as u64) % basis.primes[poly.active[k]];
            }
        }
        poly
    }

    /// Largest absolute embedded coefficient, for overflow checks.
    pub fn max_coeff(&self, values: &[f64], scale: f64) -> f64 {
        self.embed(values, scale)
            .iter()
            .fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Decode a coefficient-form element: CRT-reconstruct each centered
    /// coefficient, divide by the scale, and run the forward transform.
    pub fn decode(&self, poly: &RnsPoly, scale: f64) -> Vec<f64> {
        debug_assert_eq!(poly.form, Form::Coeff);
        let slots = self.ring_dim / 2;
        let basis = &poly.basis;
        let k = poly.active.len();
        let num_limbs = k + 1;

        // Q and Q/2
        let mut q_total = WideFromPrimes::one(num_limbs);
        for &idx in &poly.active {
            q_total = q_total.mul_u64(basis.primes[idx]);
        }
        let q_half = q_total.shr1();

        // CRT interpolation constants: hat_i = Q / q_i, tilde_i = hat_i^{-1} mod q_i
        let mut hats = Vec::with_capacity(k);
        let mut tildes = Vec::with_capacity(k);
        for (i, &idx) in poly.active.iter().enumerate() {
            let mut hat = WideFromPrimes::one(num_limbs);
            for (j, &jdx) in poly.active.iter().enumerate() {
                if j != i {
                    hat = hat.mul_u64(basis.primes[jdx]);
                }
            }
            let hat_mod = hat.rem_u64(basis.primes[idx]);
            tildes.push(crate::ring::inv_mod(hat_mod, basis.primes[idx]));
            hats.push(hat);
        }

        let mut u = vec![Complex64::new(0.0, 0.0); slots];
        for j in 0..self.ring_dim {
            let mut acc = WideFromPrimes::zero(num_limbs + 1);
            for i in 0..k {
                let t = crate::ring::mul_mod(
                    poly.residues[i][j],
                    tildes[i],
                    basis.primes[poly.active[i]],
                );
                let term = hats[i].widen(num_limbs + 1).mul_u64(t);
                acc.add_assign(&term);
            }
            // reduce mod Q (acc < k·Q so a few subtractions suffice)
            let qt = q_total.widen(num_limbs + 1);
            while acc.cmp_wide(&qt) != std::cmp::Ordering::Less {
                acc = acc.sub(&qt);
            }
            let acc = acc.truncate(num_limbs);
            let centered = if acc.cmp_wide(&q_half) == std::cmp::Ordering::Greater {
                -(q_total.sub(&acc).to_f64())
            } else {
                acc.to_f64()
            };
            let val = centered / scale;
            if j < slots {
                u[j].re = val;
            } else {
                u[j - slots].im = val;
            }
        }
        self.fft(&mut u);
        u.iter().map(|c| c.re).collect()
    }
}

use super::wide::WideUint as WideFromPrimes;

impl WideFromPrimes {
    fn one(num_limbs: usize) -> Self {
        Self::from_u64(1, num_limbs)
    }

    fn widen(&self, num_limbs: usize) -> Self {
        let mut w = Self::zero(num_limbs);
        w.limbs[..self.limbs.len()].copy_from_slice(&self.limbs);
        w
    }

    fn truncate(&self, num_limbs: usize) -> Self {
        let mut w = Self::zero(num_limbs);
        w.limbs.copy_from_slice(&self.limbs[..num_limbs]);
        w
    }
}
