//! Versioned little-endian binary serialization for keys and ciphertexts.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! header:   magic "ODSP" | version u16 | kind u8 | params digest u64
//! poly:     active_len u16 | active indices (u16 each) | form u8
//!           | residue rows, each ring_dim × u64
//! kind 1 =  ciphertext: scale f64 | slots u32 | poly c0 | poly c1
//! kind 2 =  secret key: poly s
//! kind 3 =  eval keys:  poly pk.b | poly pk.a
//!           | relin digit count u16 | (poly b, poly a) per digit
//!           | galois count u16 | per key: amount u32, digit count u16,
//!             (poly b, poly a) per digit
//! ```
//!
//! The params digest binds material to the parameter set that produced it;
//! readers reject mismatches. Stability: layout changes bump `VERSION`
//! within a minor release only.

use std::io::{self, Read, Write};

use super::cipher::CkksCiphertext;
use super::keys::{CkksContext, EvalKeys, KeySet, KeySwitchKey, PublicKey, SecretKey};
use crate::ring::{Form, RnsPoly};

pub const MAGIC: &[u8; 4] = b"ODSP";
pub const VERSION: u16 = 1;

const KIND_CIPHERTEXT: u8 = 1;
const KIND_SECRET: u8 = 2;
const KIND_EVAL: u8 = 3;

#[derive(Debug)]
pub enum SerialError {
    Io(io::Error),
    BadMagic,
    BadVersion(u16),
    BadKind(u8),
    ParamsMismatch { expected: u64, found: u64 },
    Corrupt(&'static str),
}

impl std::fmt::Display for SerialError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SerialError::Io(e) => write!(f, "io error: {e}"),
            SerialError::BadMagic => write!(f, "not an oblivdsp binary object"),
            SerialError::BadVersion(v) => write!(f, "unsupported format version {v}"),
            SerialError::BadKind(k) => write!(f, "unexpected object kind {k}"),
            SerialError::ParamsMismatch { expected, found } => write!(
                f,
                "object was produced under different parameters (digest {found:#x}, expected {expected:#x})"
            ),
            SerialError::Corrupt(what) => write!(f, "corrupt object: {what}"),
        }
    }
}

impl std::error::Error for SerialError {}

impl From<io::Error> for SerialError {
    fn from(e: io::Error) -> Self {
        SerialError::Io(e)
    }
}

fn write_header(w: &mut impl Write, kind: u8, digest: u64) -> io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&[kind])?;
    w.write_all(&digest.to_le_bytes())
}

fn read_header(r: &mut impl Read, want_kind: u8, digest: u64) -> Result<(), SerialError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(SerialError::BadMagic);
    }
    let mut v = [0u8; 2];
    r.read_exact(&mut v)?;
    let version = u16::from_le_bytes(v);
    if version != VERSION {
        return Err(SerialError::BadVersion(version));
    }
    let mut k = [0u8; 1];
    r.read_exact(&mut k)?;
    if k[0] != want_kind {
        return Err(SerialError::BadKind(k[0]));
    }
    let mut d = [0u8; 8];
    r.read_exact(&mut d)?;
    let found = u64::from_le_bytes(d);
    if found != digest {
        return Err(SerialError::ParamsMismatch {
            expected: digest,
            found,
        });
    }
    Ok(())
}

fn write_poly(w: &mut impl Write, p: &RnsPoly) -> io::Result<()> {
    w.write_all(&(p.active.len() as u16).to_le_bytes())?;
    for &idx in &p.active {
        w.write_all(&(idx as u16).to_le_bytes())?;
    }
    w.write_all(&[match p.form {
        Form::Coeff => 0u8,
        Form::Eval => 1,
    }])?;
    for row in &p.residues {
        for &c in row {
            w.write_all(&c.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_poly(r: &mut impl Read, ctx: &CkksContext) -> Result<RnsPoly, SerialError> {
    let mut b2 = [0u8; 2];
    r.read_exact(&mut b2)?;
    let count = u16::from_le_bytes(b2) as usize;
    if count > ctx.basis.primes.len() {
        return Err(SerialError::Corrupt("active prime count exceeds basis"));
    }
    let mut active = Vec::with_capacity(count);
    for _ in 0..count {
        r.read_exact(&mut b2)?;
        let idx = u16::from_le_bytes(b2) as usize;
        if idx >= ctx.basis.primes.len() {
            return Err(SerialError::Corrupt("prime index out of range"));
        }
        active.push(idx);
    }
    let mut fb = [0u8; 1];
    r.read_exact(&mut fb)?;
    let form = match fb[0] {
        0 => Form::Coeff,
        1 => Form::Eval,
        _ => return Err(SerialError::Corrupt("bad form flag")),
    };
    let n = ctx.params.ring_dim;
    let mut poly = RnsPoly::zero(&ctx.basis, active, form);
    let mut b8 = [0u8; 8];
    for (k, row) in poly.residues.iter_mut().enumerate() {
        let q = ctx.basis.primes[poly.active[k]];
        for c in row.iter_mut().take(n) {
            r.read_exact(&mut b8)?;
            let v = u64::from_le_bytes(b8);
            if v >= q {
                return Err(SerialError::Corrupt("residue not reduced"));
            }
            *c = v;
        }
    }
    Ok(poly)
}

fn write_ksk(w: &mut impl Write, k: &KeySwitchKey) -> io::Result<()> {
    w.write_all(&(k.digits.len() as u16).to_le_bytes())?;
    for (b, a) in &k.digits {
        write_poly(w, b)?;
        write_poly(w, a)?;
    }
    Ok(())
}

fn read_ksk(r: &mut impl Read, ctx: &CkksContext) -> Result<KeySwitchKey, SerialError> {
    let mut b2 = [0u8; 2];
    r.read_exact(&mut b2)?;
    let count = u16::from_le_bytes(b2) as usize;
    let mut digits = Vec::with_capacity(count);
    for _ in 0..count {
        let b = read_poly(r, ctx)?;
        let a = read_poly(r, ctx)?;
        digits.push((b, a));
    }
    Ok(KeySwitchKey { digits })
}

pub fn write_ciphertext(
    w: &mut impl Write,
    ctx: &CkksContext,
    ct: &CkksCiphertext,
) -> io::Result<()> {
    write_header(w, KIND_CIPHERTEXT, ctx.params.digest())?;
    w.write_all(&ct.scale.to_le_bytes())?;
    w.write_all(&(ct.slots as u32).to_le_bytes())?;
    write_poly(w, &ct.c0)?;
    write_poly(w, &ct.c1)
}

pub fn read_ciphertext(
    r: &mut impl Read,
    ctx: &CkksContext,
) -> Result<CkksCiphertext, SerialError> {
    read_header(r, KIND_CIPHERTEXT, ctx.params.digest())?;
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let scale = f64::from_le_bytes(b8);
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let slots = u32::from_le_bytes(b4) as usize;
    let c0 = read_poly(r, ctx)?;
    let c1 = read_poly(r, ctx)?;
    Ok(CkksCiphertext {
        c0,
        c1,
        scale,
        slots,
    })
}

pub fn write_secret_key(w: &mut impl Write, ctx: &CkksContext, sk: &SecretKey) -> io::Result<()> {
    write_header(w, KIND_SECRET, ctx.params.digest())?;
    write_poly(w, &sk.s)
}

pub fn read_secret_key(r: &mut impl Read, ctx: &CkksContext) -> Result<SecretKey, SerialError> {
    read_header(r, KIND_SECRET, ctx.params.digest())?;
    Ok(SecretKey {
        s: read_poly(r, ctx)?,
    })
}

pub fn write_eval_keys(w: &mut impl Write, ctx: &CkksContext, ek: &EvalKeys) -> io::Result<()> {
    write_header(w, KIND_EVAL, ctx.params.digest())?;
    write_poly(w, &ek.public.b)?;
    write_poly(w, &ek.public.a)?;
    write_ksk(w, &ek.relin)?;
    w.write_all(&(ek.galois.len() as u16).to_le_bytes())?;
    for (&amount, ksk) in &ek.galois {
        w.write_all(&(amount as u32).to_le_bytes())?;
        write_ksk(w, ksk)?;
    }
    Ok(())
}

pub fn read_eval_keys(r: &mut impl Read, ctx: &CkksContext) -> Result<EvalKeys, SerialError> {
    read_header(r, KIND_EVAL, ctx.params.digest())?;
    let b = read_poly(r, ctx)?;
    let a = read_poly(r, ctx)?;
    let relin = read_ksk(r, ctx)?;
    let mut b2 = [0u8; 2];
    r.read_exact(&mut b2)?;
    let count = u16::from_le_bytes(b2) as usize;
    let mut galois = std::collections::BTreeMap::new();
    for _ in 0..count {
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        let amount = u32::from_le_bytes(b4) as usize;
        galois.insert(amount, read_ksk(r, ctx)?);
    }
    Ok(EvalKeys {
        public: PublicKey { b, a },
        relin,
        galois,
    })
}

pub fn write_keyset(w: &mut impl Write, ctx: &CkksContext, ks: &KeySet) -> io::Result<()> {
    write_secret_key(w, ctx, &ks.secret)?;
    write_eval_keys(w, ctx, &ks.eval)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ckks::{keygen, CkksParams};
    use rand::SeedableRng;

    #[test]
    fn ciphertext_roundtrips() {
        let mut p = CkksParams::desk(2);
        p.ring_dim = 64;
        let ctx = CkksContext::new(p);
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(9);
        let keys = keygen(&ctx, &[], &mut rng);
        let vals = vec![0.25; 32];
        let ct = ctx.encrypt(&ctx.encode(&vals).unwrap(), &keys.eval, &mut rng);
        let mut buf = Vec::new();
        write_ciphertext(&mut buf, &ctx, &ct).unwrap();
        let back = read_ciphertext(&mut &buf[..], &ctx).unwrap();
        assert_eq!(back.c0, ct.c0);
        assert_eq!(back.c1, ct.c1);
        assert_eq!(back.scale, ct.scale);
    }

    #[test]
    fn params_digest_is_enforced() {
        let mut p = CkksParams::desk(2);
        p.ring_dim = 64;
        let ctx = CkksContext::new(p.clone());
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(10);
        let keys = keygen(&ctx, &[], &mut rng);
        let ct = ctx.encrypt(&ctx.encode(&[0.5]).unwrap(), &keys.eval, &mut rng);
        let mut buf = Vec::new();
        write_ciphertext(&mut buf, &ctx, &ct).unwrap();
        let mut other = p;
        other.scaling_bits = 41;
        let other_ctx = CkksContext::new(other);
        assert!(matches!(
            read_ciphertext(&mut &buf[..], &other_ctx),
            Err(SerialError::ParamsMismatch { .. })
        ));
    }

    #[test]
    fn keyset_roundtrips_and_still_decrypts() {
        let mut p = CkksParams::desk(1);
        p.ring_dim = 64;
        let ctx = CkksContext::new(p);
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        let keys = keygen(&ctx, &[2], &mut rng);
        let mut buf = Vec::new();
        write_keyset(&mut buf, &ctx, &keys).unwrap();
        let mut cursor = &buf[..];
        let sk = read_secret_key(&mut cursor, &ctx).unwrap();
        let ek = read_eval_keys(&mut cursor, &ctx).unwrap();
        let vals: Vec<f64> = (0..32).map(|i| i as f64 / 64.0).collect();
        let ct = ctx.encrypt(&ctx.encode(&vals).unwrap(), &ek, &mut rng);
        let rot = ctx.eval_rotate(&ct, 2, &ek).unwrap();
        let out = ctx.decrypt(&rot, &sk);
        for j in 0..32 {
            assert!((out[j] - vals[(j + 2) % 32]).abs() < 1e-5);
        }
    }
}
