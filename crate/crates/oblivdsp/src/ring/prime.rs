//! Deterministic generation of NTT-friendly primes.
//!
//! For ring dimension N we need primes q ≡ 1 (mod 2N) so that a primitive
//! 2N-th root of unity exists and the negacyclic NTT applies. Generation is
//! deterministic given (N, bit sizes): for each requested size we take
//! successive primes ≡ 1 mod 2N just above 2^bits, skipping any already
//! taken, so a parameter set always reproduces the same chain.

use super::modmath::mul_mod;

/// Deterministic Miller-Rabin for u64 (the standard 12-witness set is
/// conclusive for all 64-bit integers).
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        r += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = super::modmath::pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..r - 1 {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Generate `counts.len()` primes with the given bit sizes, all distinct,
/// all ≡ 1 (mod 2N). The i-th output is the smallest qualifying prime
/// above 2^bits[i] not already used by an earlier entry.
///
/// Primes sit just above 2^bits (within relative ~2^-25 of it for the
/// sizes used here), which keeps rescaling by a "scaling-size" prime an
/// almost exact division by the nominal scale.
pub fn generate_primes(ring_dim: usize, bits: &[u32]) -> Vec<u64> {
    assert!(
        ring_dim.is_power_of_two(),
        "ring dimension must be a power of two"
    );
    let two_n = (2 * ring_dim) as u64;
    let mut taken: Vec<u64> = Vec::with_capacity(bits.len());
    for &b in bits {
        assert!(
            (20..=62).contains(&b),
            "prime size {b} out of supported range"
        );
        // first candidate ≡ 1 mod 2N strictly above 2^b
        let base = 1u64 << b;
        let mut cand = base - (base % two_n) + two_n + 1;
        loop {
            if is_prime_u64(cand) && !taken.contains(&cand) {
                taken.push(cand);
                break;
            }
            cand += two_n;
        }
    }
    taken
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes_are_ntt_friendly_and_sized() {
        let n = 4096;
        let primes = generate_primes(n, &[60, 40, 40, 40]);
        assert_eq!(primes.len(), 4);
        for (i, &q) in primes.iter().enumerate() {
            assert!(is_prime_u64(q));
            assert_eq!(q % (2 * n as u64), 1, "q not ≡ 1 mod 2N");
            let declared = [60u32, 40, 40, 40][i] as f64;
            let lg = (q as f64).log2();
            assert!(
                (lg - declared).abs() <= 1.0,
                "log2({q}) = {lg} vs declared {declared}"
            );
        }
        // same-size primes are distinct
        assert_ne!(primes[1], primes[2]);
        assert_ne!(primes[2], primes[3]);
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_primes(64, &[61, 40]);
        let b = generate_primes(64, &[61, 40]);
        assert_eq!(a, b);
    }

    #[test]
    fn miller_rabin_agrees_with_trial_division() {
        let trial = |n: u64| {
            if n < 2 {
                return false;
            }
            let mut d = 2;
            while d * d <= n {
                if n % d == 0 {
                    return false;
                }
                d += 1;
            }
            true
        };
        for n in 0..2000u64 {
            assert_eq!(is_prime_u64(n), trial(n), "mismatch at {n}");
        }
    }
}
