//! Randomness for key generation and encryption.

use rand::Rng;

/// Uniform ternary coefficients in {-1, 0, 1} (secret key distribution).
pub fn ternary_uniform<R: Rng>(rng: &mut R, n: usize) -> Vec<i64> {
    (0..n).map(|_| rng.random_range(-1..=1)).collect()
}

/// Zero-centered {-1, 0, 1} with P(0) = 1/2 (encryption ephemeral).
pub fn zo_half<R: Rng>(rng: &mut R, n: usize) -> Vec<i64> {
    (0..n)
        .map(|_| match rng.random_range(0..4u8) {
            0 => -1i64,
            1 => 1,
            _ => 0,
        })
        .collect()
}

/// Rounded Gaussian with std-dev sigma, truncated at 6 sigma.
pub fn discrete_gaussian<R: Rng>(rng: &mut R, n: usize, sigma: f64) -> Vec<i64> {
    let bound = (6.0 * sigma).floor() as i64;
    (0..n)
        .map(|_| loop {
            // Box-Muller
            let u1: f64 = rng.random_range(f64::EPSILON..1.0);
            let u2: f64 = rng.random_range(0.0..1.0);
            let g = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
            let v = (g * sigma).round() as i64;
            if v.abs() <= bound {
                break v;
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn gaussian_respects_truncation_and_spread() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(1);
        let v = discrete_gaussian(&mut rng, 20_000, 3.2);
        assert!(v.iter().all(|&x| x.abs() <= 19));
        let var: f64 = v.iter().map(|&x| (x * x) as f64).sum::<f64>() / v.len() as f64;
        assert!(
            (var.sqrt() - 3.2).abs() < 0.2,
            "sample sigma {}",
            var.sqrt()
        );
    }

    #[test]
    fn ternary_is_ternary() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(2);
        assert!(ternary_uniform(&mut rng, 1000)
            .iter()
            .all(|x| (-1..=1).contains(x)));
    }
}
