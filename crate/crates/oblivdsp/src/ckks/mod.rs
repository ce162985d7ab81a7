//! Leveled RNS-CKKS: key generation, canonical-embedding encode/decode,
//! encrypt/decrypt, homomorphic add, ciphertext and plaintext multiply,
//! relinearization, Galois rotation, and rescaling.
//!
//! The modulus chain is `[first, scaling × depth]` plus one 60-bit
//! key-switching prime. Ciphertexts are pairs of coefficient-form
//! [`crate::ring::RnsPoly`]; each ciphertext-ciphertext multiply consumes
//! one chain prime through rescaling. Key switching is the hybrid variant:
//! per-prime digit decomposition against keys carried over the extended
//! basis, followed by exact division by the special prime, which keeps
//! key-switch noise near the rescale rounding floor.

mod cipher;
mod encoding;
mod keys;
mod params;
mod sampling;
pub mod serial;
mod wide;

pub use cipher::{CkksCiphertext, CkksError, CkksPlaintext};
pub use encoding::Encoder;
pub use keys::{keygen, CkksContext, EvalKeys, KeySet, KeySwitchKey, PublicKey, SecretKey};
pub use params::{CkksParams, SecurityProfile};
