//! Minimal variable-width unsigned integers for CRT reconstruction at
//! decode time. Little-endian u64 limbs, only the handful of operations
//! decoding needs; never on the homomorphic hot path.

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WideUint {
    pub limbs: Vec<u64>,
}

impl WideUint {
    pub fn zero(num_limbs: usize) -> Self {
        WideUint {
            limbs: vec![0; num_limbs],
        }
    }

    pub fn from_u64(v: u64, num_limbs: usize) -> Self {
        let mut w = Self::zero(num_limbs);
        w.limbs[0] = v;
        w
    }

    pub fn mul_u64(&self, b: u64) -> Self {
        let mut out = Self::zero(self.limbs.len());
        let mut carry: u128 = 0;
        for (i, &l) in self.limbs.iter().enumerate() {
            let p = l as u128 * b as u128 + carry;
            out.limbs[i] = p as u64;
            carry = p >> 64;
        }
        debug_assert_eq!(carry, 0, "WideUint overflow");
        out
    }

    pub fn add_assign(&mut self, other: &Self) {
        let mut carry: u128 = 0;
        for i in 0..self.limbs.len() {
            let s = self.limbs[i] as u128 + other.limbs[i] as u128 + carry;
            self.limbs[i] = s as u64;
            carry = s >> 64;
        }
        debug_assert_eq!(carry, 0, "WideUint overflow");
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert!(self.cmp_wide(other) != std::cmp::Ordering::Less);
        let mut out = Self::zero(self.limbs.len());
        let mut borrow: i128 = 0;
        for i in 0..self.limbs.len() {
            let d = self.limbs[i] as i128 - other.limbs[i] as i128 - borrow;
            if d < 0 {
                out.limbs[i] = (d + (1i128 << 64)) as u64;
                borrow = 1;
            } else {
                out.limbs[i] = d as u64;
                borrow = 0;
            }
        }
        out
    }

    pub fn cmp_wide(&self, other: &Self) -> std::cmp::Ordering {
        for i in (0..self.limbs.len()).rev() {
            match self.limbs[i].cmp(&other.limbs[i]) {
                std::cmp::Ordering::Equal => continue,
                ord => return ord,
            }
        }
        std::cmp::Ordering::Equal
    }

    /// Shift right by one bit (for computing Q/2).
    pub fn shr1(&self) -> Self {
        let mut out = Self::zero(self.limbs.len());
        for i in 0..self.limbs.len() {
            out.limbs[i] = self.limbs[i] >> 1;
            if i + 1 < self.limbs.len() {
                out.limbs[i] |= self.limbs[i + 1] << 63;
            }
        }
        out
    }

    /// Reduce mod a u64.
    pub fn rem_u64(&self, q: u64) -> u64 {
        let mut r: u128 = 0;
        for &l in self.limbs.iter().rev() {
            r = ((r << 64) | l as u128) % q as u128;
        }
        r as u64
    }

    /// Lossy conversion keeping the top 53 significant bits.
    pub fn to_f64(&self) -> f64 {
        let mut acc = 0.0f64;
        for (i, &l) in self.limbs.iter().enumerate() {
            acc += l as f64 * 2f64.powi(64 * i as i32);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mul_add_sub_roundtrip() {
        let a = WideUint::from_u64(u64::MAX, 4).mul_u64(u64::MAX);
        let mut b = a.clone();
        b.add_assign(&a);
        let back = b.sub(&a);
        assert_eq!(back, a);
    }

    #[test]
    fn rem_matches_u128_math() {
        let a = WideUint::from_u64(0xdead_beef_1234_5678, 3).mul_u64(0x9999_8888_7777_6666);
        let q = 1_000_000_007u64;
        let exact = (0xdead_beef_1234_5678u128 * 0x9999_8888_7777_6666u128 % q as u128) as u64;
        assert_eq!(a.rem_u64(q), exact);
    }
}
