//! Negacyclic polynomial-ring arithmetic over an RNS basis of word-sized
//! primes: the substrate of the CKKS backend.
//!
//! Elements live in Z_Q[X]/(X^N + 1) where Q is a product of distinct
//! NTT-friendly primes (q ≡ 1 mod 2N), each residue channel held as a flat
//! `Vec<u64>`. Multiplication runs through a merged-twiddle negacyclic NTT;
//! all intermediate products fit in 128 bits — no arbitrary-precision
//! arithmetic on the hot path.

mod modmath;
mod ntt;
mod poly;
mod prime;

pub use modmath::{inv_mod, mul_mod, pow_mod};
pub use ntt::NttTable;
pub use poly::{Form, RnsBasis, RnsError, RnsPoly};
pub use prime::{generate_primes, is_prime_u64};
