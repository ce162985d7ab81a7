//! Slot-level linear algebra: rotation trees, stride folds, and
//! Halevi-Shoup diagonal matrix-vector products with baby-step/giant-step
//! rotation scheduling.

use std::collections::BTreeMap;

use crate::vm::{SlotVector, SlotVm, VmError};

/// A slot-ring linear map held as generalized diagonals: the map is
/// y[o] = Σ_k diag_k[o] · x[(o + k) mod S].
#[derive(Clone, Debug)]
pub struct DiagMatrix {
    pub slots: usize,
    pub diags: BTreeMap<i64, Vec<f64>>,
}

impl DiagMatrix {
    /// Build from a dense rows × cols matrix and slot placements for the
    /// input columns and output rows. Diagonal indices are normalized to
    /// (-S/2, S/2].
    pub fn from_dense(
        slots: usize,
        rows: usize,
        cols: usize,
        value: impl Fn(usize, usize) -> f64,
        out_pos: impl Fn(usize) -> usize,
        in_pos: impl Fn(usize) -> usize,
    ) -> Self {
        let s = slots as i64;
        let mut diags: BTreeMap<i64, Vec<f64>> = BTreeMap::new();
        for r in 0..rows {
            let o = out_pos(r);
            debug_assert!(o < slots);
            for c in 0..cols {
                let v = value(r, c);
                if v == 0.0 {
                    continue;
                }
                let i = in_pos(c) as i64;
                let mut k = (i - o as i64).rem_euclid(s);
                if k > s / 2 {
                    k -= s;
                }
                diags.entry(k).or_insert_with(|| vec![0.0; slots])[o] = v;
            }
        }
        DiagMatrix { slots, diags }
    }

    pub fn diag_count(&self) -> usize {
        self.diags.len()
    }

    /// Reference product against a dense slot vector (test oracle path).
    pub fn apply_plain(&self, x: &[f64]) -> Vec<f64> {
        let s = self.slots;
        let mut y = vec![0.0; s];
        for (&k, d) in &self.diags {
            for o in 0..s {
                let idx = (o as i64 + k).rem_euclid(s as i64) as usize;
                y[o] += d[o] * x[idx];
            }
        }
        y
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Rotation schedule for a diagonal set: each diagonal index decomposes as
/// k = g·(q·B + r) with baby offsets r·g and giant offsets q·B·g.
pub struct BsgsPlan {
    pub stride: i64,
    pub baby_count: usize,
    /// (giant multiple q, [(baby r, diag key k)]) groups.
    groups: Vec<(i64, Vec<(i64, i64)>)>,
}

impl BsgsPlan {
    pub fn new(diag_keys: &[i64]) -> Self {
        let nonzero: Vec<i64> = diag_keys.iter().copied().filter(|&k| k != 0).collect();
        let stride = nonzero.iter().fold(0i64, |g, &k| gcd(g, k)).max(1);
        // baby-step count = ceil(sqrt(#nonzero diagonals)), ties toward
        // more baby steps
        let n = diag_keys.len().max(1);
        let baby_count = (n as f64).sqrt().ceil() as usize;
        let b = baby_count as i64;
        let mut groups: BTreeMap<i64, Vec<(i64, i64)>> = BTreeMap::new();
        for &k in diag_keys {
            let reduced = k / stride;
            let r = reduced.rem_euclid(b);
            let q = (reduced - r) / b;
            groups.entry(q).or_default().push((r, k));
        }
        BsgsPlan {
            stride,
            baby_count,
            groups: groups.into_iter().collect(),
        }
    }

    /// Rotations this plan issues: distinct nonzero baby offsets plus
    /// distinct nonzero giant offsets.
    pub fn rotation_count(&self) -> usize {
        let babies: std::collections::BTreeSet<i64> = self
            .groups
            .iter()
            .flat_map(|(_, v)| v.iter().map(|&(r, _)| r))
            .filter(|&r| r != 0)
            .collect();
        let giants = self.groups.iter().filter(|(q, _)| *q != 0).count();
        babies.len() + giants
    }
}

/// y = M·x via BSGS; result scale is x.scale · Δ (caller rescales).
pub fn bsgs_matvec(vm: &mut SlotVm, x: &SlotVector, m: &DiagMatrix) -> Result<SlotVector, VmError> {
    bsgs_matvec_many(vm, x, &[m]).map(|mut v| v.pop().unwrap())
}

/// Products of several diagonal matrices with the same input, sharing one
/// set of baby-step rotations. All matrices must have the same diagonal
/// key set (zero-filled diagonals are fine).
pub fn bsgs_matvec_many(
    vm: &mut SlotVm,
    x: &SlotVector,
    mats: &[&DiagMatrix],
) -> Result<Vec<SlotVector>, VmError> {
    assert!(!mats.is_empty());
    let slots = vm.slot_count;
    let keys: Vec<i64> = {
        let mut set = std::collections::BTreeSet::new();
        for m in mats {
            set.extend(m.diags.keys().copied());
        }
        set.into_iter().collect()
    };
    if keys.is_empty() {
        // zero map: multiply by an all-zero plaintext to keep shape/level
        let zero = vec![0.0; slots];
        return (0..mats.len()).map(|_| vm.mul_pt(x, &zero)).collect();
    }
    let plan = BsgsPlan::new(&keys);
    let b = plan.baby_count as i64;

    // baby rotations, shared across all matrices
    let mut babies: BTreeMap<i64, SlotVector> = BTreeMap::new();
    babies.insert(0, x.clone());
    for (_, group) in &plan.groups {
        for &(r, _) in group {
            if r != 0 && !babies.contains_key(&r) {
                let rot = vm.rotate(x, r * plan.stride)?;
                babies.insert(r, rot);
            }
        }
    }

    let mut outputs: Vec<Option<SlotVector>> = vec![None; mats.len()];
    for (q, group) in &plan.groups {
        let giant = q * b * plan.stride;
        for (mi, m) in mats.iter().enumerate() {
            let mut acc: Option<SlotVector> = None;
            for &(r, k) in group {
                let Some(diag) = m.diags.get(&k) else {
                    continue;
                };
                // pre-rotate the diagonal so the giant rotation lands it:
                // d = Rot(diag, -giant), i.e. d[(o+giant) mod S] = diag[o]
                let mut d = vec![0.0; slots];
                #[allow(clippy::needless_range_loop)]
                for o in 0..slots {
                    let idx = (o as i64 + giant).rem_euclid(slots as i64) as usize;
                    d[idx] = diag[o];
                }
                let term = vm.mul_pt(&babies[&r], &d)?;
                acc = Some(match acc {
                    None => term,
                    Some(a) => vm.add(&a, &term)?,
                });
            }
            let Some(acc) = acc else { continue };
            let rotated = if giant != 0 {
                vm.rotate(&acc, giant)?
            } else {
                acc
            };
            outputs[mi] = Some(match outputs[mi].take() {
                None => rotated,
                Some(o) => vm.add(&o, &rotated)?,
            });
        }
    }
    let zero = vec![0.0; slots];
    outputs
        .into_iter()
        .map(|o| match o {
            Some(v) => Ok(v),
            None => vm.mul_pt(x, &zero),
        })
        .collect()
}

/// acc[j] = Σ_{m < count} v[j + stride·m (mod S)] via log2(count)
/// rotate-adds. When stride·count == S every slot ends up holding its
/// full stride-class sum (replication); count must be a power of two.
pub fn fold_stride(
    vm: &mut SlotVm,
    v: &SlotVector,
    stride: usize,
    count: usize,
) -> Result<SlotVector, VmError> {
    assert!(count.is_power_of_two(), "fold count must be a power of two");
    let mut acc = v.clone();
    let mut step = stride;
    while step < stride * count {
        let rot = vm.rotate(&acc, step as i64)?;
        acc = vm.add(&acc, &rot)?;
        step *= 2;
    }
    Ok(acc)
}

/// Sum `count` (power of two) stride-separated slots into slot 0's class,
/// alias for the fold used to reduce a packed block.
pub fn reduce_stride_count(
    vm: &mut SlotVm,
    v: &SlotVector,
    stride: usize,
    count: usize,
) -> Result<SlotVector, VmError> {
    fold_stride(vm, v, stride, count)
}

/// Merge per-frame vectors (each supported on slots [0, stride)) into one
/// packed vector with frame t at slot offset t·stride, via a rotation
/// tree using log2-many distinct rotation amounts. Depth-free.
pub fn assemble_frames(
    vm: &mut SlotVm,
    frames: &[SlotVector],
    stride: usize,
) -> Result<SlotVector, VmError> {
    assert!(!frames.is_empty());
    assert!(
        frames.len() * stride <= vm.slot_count,
        "frames exceed slot capacity"
    );
    let mut layer: Vec<SlotVector> = frames.to_vec();
    let mut span = stride as i64;
    while layer.len() > 1 {
        let mut next = Vec::with_capacity(layer.len().div_ceil(2));
        let mut it = layer.chunks(2);
        for pair in &mut it {
            if pair.len() == 2 {
                let moved = vm.rotate(&pair[1], -span)?;
                next.push(vm.add(&pair[0], &moved)?);
            } else {
                next.push(pair[0].clone());
            }
        }
        layer = next;
        span *= 2;
    }
    Ok(layer.pop().unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ckks::CkksParams;
    use rand::{Rng, SeedableRng};

    fn vm(slots: usize) -> SlotVm {
        let mut p = CkksParams::desk(11);
        p.ring_dim = 64;
        SlotVm::exact_sim(&p, slots, 0)
    }

    #[test]
    fn bsgs_matches_plain_apply() {
        let slots = 32;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(8);
        let m = DiagMatrix::from_dense(
            slots,
            8,
            8,
            |r, c| ((r * 13 + c * 7) % 5) as f64 - 2.0,
            |r| r,
            |c| c,
        );
        let x: Vec<f64> = (0..slots).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut vm = vm(slots);
        let xv = vm.input_plain(&x);
        let y = bsgs_matvec(&mut vm, &xv, &m).unwrap();
        let y = vm.rescale(&y).unwrap();
        let oracle = m.apply_plain(&x);
        for j in 0..slots {
            assert!((y.plain_values()[j] - oracle[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn bsgs_rotation_count_obeys_sqrt_budget() {
        // single-block cyclic map: D diagonals on a D-slot ring
        for d in [8usize, 16, 32] {
            let m = DiagMatrix::from_dense(d, d, d, |r, c| (r + c) as f64 + 1.0, |r| r, |c| c);
            assert_eq!(m.diag_count(), d);
            let mut vm = vm(d);
            let x = vm.input_plain(&vec![1.0; d]);
            let before = vm.trace.rotation_count();
            let _ = bsgs_matvec(&mut vm, &x, &m).unwrap();
            let used = vm.trace.rotation_count() - before;
            let budget =
                (d as f64).sqrt().ceil() as usize + d.div_ceil((d as f64).sqrt().ceil() as usize);
            assert!(used <= budget, "D={d}: {used} rotations > budget {budget}");
        }
    }

    #[test]
    fn fold_stride_sums_blocks() {
        let mut vm = vm(16);
        let vals: Vec<f64> = (0..16).map(|i| i as f64).collect();
        let v = vm.input_plain(&vals);
        // sum within each 4-block: slot 4t collects 4t..4t+3
        let folded = fold_stride(&mut vm, &v, 1, 4).unwrap();
        assert_eq!(folded.plain_values()[0], 0.0 + 1.0 + 2.0 + 3.0);
        assert_eq!(folded.plain_values()[4], 4.0 + 5.0 + 6.0 + 7.0);
        // stride-4 fold over the whole ring replicates the class sums
        let rep = fold_stride(&mut vm, &v, 4, 4).unwrap();
        for j in 0..4 {
            let expect: f64 = (0..4).map(|m| vals[(j + 4 * m) % 16]).sum();
            assert_eq!(rep.plain_values()[j], expect);
            assert_eq!(rep.plain_values()[j + 8], expect);
        }
    }

    #[test]
    fn assemble_places_frames_at_offsets() {
        let mut vm = vm(64);
        let frames: Vec<SlotVector> = (0..5)
            .map(|t| vm.input_plain(&[(t + 1) as f64, 0.5]))
            .collect();
        let packed = assemble_frames(&mut vm, &frames, 8).unwrap();
        for t in 0..5 {
            assert_eq!(packed.plain_values()[8 * t], (t + 1) as f64);
            assert_eq!(packed.plain_values()[8 * t + 1], 0.5);
            assert_eq!(packed.plain_values()[8 * t + 2], 0.0);
        }
        // distinct rotation amounts grow as a tree, not linearly
        let amounts: std::collections::BTreeSet<i64> = vm
            .trace
            .events
            .iter()
            .filter_map(|e| match e.op {
                crate::vm::OpKind::Rotate(k) => Some(k),
                _ => None,
            })
            .collect();
        assert!(amounts.len() <= 3, "amounts {amounts:?}");
    }
}
