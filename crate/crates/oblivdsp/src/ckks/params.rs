//! CKKS parameter sets and security profiles.

use serde::{Deserialize, Serialize};

use crate::Fnv1a;

/// Named parameter regime.
///
/// `DeskScale` permits small ring dimensions so the full pipelines run in
/// minutes on a laptop; it is NOT SECURE and every report carries that tag.
/// `Standard128` enforces the deployment regime (N = 32768) and is slow.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SecurityProfile {
    DeskScale,
    Standard128,
}

impl SecurityProfile {
    pub fn tag(&self) -> &'static str {
        match self {
            SecurityProfile::DeskScale => "desk-scale (NOT SECURE)",
            SecurityProfile::Standard128 => "standard-128",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CkksParams {
    /// Ring dimension N (power of two); N/2 slots.
    pub ring_dim: usize,
    /// log2 of the nominal scale Δ.
    pub scaling_bits: u32,
    /// Bit size of the first chain prime and of the key-switching prime.
    pub first_bits: u32,
    /// Multiplicative depth L; the chain carries L+1 primes.
    pub depth: usize,
    /// Error std-dev for the discrete Gaussian sampler.
    pub sigma: f64,
    pub profile: SecurityProfile,
}

impl CkksParams {
    /// Desk-scale defaults: N=4096, Δ=2^40, 60-bit first/special primes.
    pub fn desk(depth: usize) -> Self {
        CkksParams {
            ring_dim: 4096,
            scaling_bits: 40,
            first_bits: 60,
            depth,
            sigma: 3.2,
            profile: SecurityProfile::DeskScale,
        }
    }

    /// The deployment regime from the parameter table: N=32768, no
    /// bootstrapping. Slow; exists so the full-size numbers can be
    /// reproduced when wanted.
    pub fn standard_128(depth: usize, scaling_bits: u32) -> Self {
        CkksParams {
            ring_dim: 32768,
            scaling_bits,
            first_bits: 60,
            depth,
            sigma: 3.2,
            profile: SecurityProfile::Standard128,
        }
    }

    pub fn slot_count(&self) -> usize {
        self.ring_dim / 2
    }

    pub fn delta(&self) -> f64 {
        (self.scaling_bits as f64).exp2()
    }

    /// Declared bit sizes of the chain primes followed by the special prime.
    pub fn prime_bits(&self) -> Vec<u32> {
        let mut bits = Vec::with_capacity(self.depth + 2);
        bits.push(self.first_bits);
        bits.extend(std::iter::repeat_n(self.scaling_bits, self.depth));
        bits.push(self.first_bits); // key-switching prime
        bits
    }

    pub fn validate(&self) -> Result<(), String> {
        if !self.ring_dim.is_power_of_two() || self.ring_dim < 16 {
            return Err(format!(
                "ring_dim {} must be a power of two ≥ 16",
                self.ring_dim
            ));
        }
        if self.depth < 1 {
            return Err("depth must be ≥ 1".into());
        }
        if !(20..=60).contains(&self.scaling_bits) {
            return Err(format!(
                "scaling_bits {} out of range [20, 60]",
                self.scaling_bits
            ));
        }
        if self.first_bits < self.scaling_bits || self.first_bits > 60 {
            return Err(format!(
                "first_bits {} must be in [scaling_bits, 60]",
                self.first_bits
            ));
        }
        if self.profile == SecurityProfile::Standard128 && self.ring_dim < 32768 {
            return Err(format!(
                "standard-128 profile requires ring_dim ≥ 32768, got {}",
                self.ring_dim
            ));
        }
        if self.sigma <= 0.0 {
            return Err("sigma must be positive".into());
        }
        Ok(())
    }

    /// Stable fingerprint of the public parameters.
    pub fn digest(&self) -> u64 {
        let mut h = Fnv1a::new();
        h.update_u64(self.ring_dim as u64);
        h.update_u64(self.scaling_bits as u64);
        h.update_u64(self.first_bits as u64);
        h.update_u64(self.depth as u64);
        h.update_u64(self.sigma.to_bits());
        h.update(self.profile.tag().as_bytes());
        h.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_profile_is_tagged_insecure() {
        let p = CkksParams::desk(4);
        assert!(p.profile.tag().contains("NOT SECURE"));
        p.validate().unwrap();
    }

    #[test]
    fn standard_profile_rejects_small_ring() {
        let mut p = CkksParams::standard_128(11, 50);
        p.validate().unwrap();
        p.ring_dim = 4096;
        assert!(p.validate().is_err());
    }

    #[test]
    fn digest_distinguishes_params() {
        let a = CkksParams::desk(4);
        let mut b = CkksParams::desk(4);
        b.scaling_bits = 41;
        assert_ne!(a.digest(), b.digest());
    }
}
