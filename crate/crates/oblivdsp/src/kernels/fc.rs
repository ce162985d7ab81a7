//! Fully connected inference with square activations.
//!
//! h_ℓ = (W_ℓ h_{ℓ-1} + b_ℓ)^∘2 for hidden layers, plain affine for the
//! final logits. Each hidden layer costs a matvec level plus a squaring
//! level; the last layer costs the matvec only: 2L−1 total.

use super::bsgs::{bsgs_matvec, DiagMatrix};
use crate::vm::{SlotVector, SlotVm, VmError};

#[derive(Clone, Debug)]
pub struct FcLayer {
    /// rows = outputs, cols = inputs, row-major.
    pub weight: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

impl FcLayer {
    pub fn out_dim(&self) -> usize {
        self.weight.len()
    }

    pub fn in_dim(&self) -> usize {
        self.weight.first().map_or(0, |r| r.len())
    }

    /// Plaintext forward of this layer (reference path).
    pub fn apply_plain(&self, x: &[f64]) -> Vec<f64> {
        self.weight
            .iter()
            .zip(&self.bias)
            .map(|(row, b)| row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b)
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct FcNetwork {
    pub layers: Vec<FcLayer>,
}

impl FcNetwork {
    pub fn depth(&self) -> usize {
        2 * self.layers.len() - 1
    }

    /// Plaintext forward with square activations (oracle path).
    pub fn forward_plain(&self, x: &[f64]) -> Vec<f64> {
        let mut h = x.to_vec();
        for (i, layer) in self.layers.iter().enumerate() {
            h = layer.apply_plain(&h);
            if i + 1 < self.layers.len() {
                for v in h.iter_mut() {
                    *v = *v * *v;
                }
            }
        }
        h
    }
}

/// Fold the public setup transforms into the first layer: a column
/// permutation mapping encrypted slot order to training feature order,
/// and division by the soft-power normalization factor. Zero depth cost,
/// done once on plaintext weights.
pub fn fold_first_layer(layer: &FcLayer, norm_factor: f64, slot_to_feature: &[usize]) -> FcLayer {
    let rows = layer.out_dim();
    let cols = slot_to_feature.len();
    let mut weight = vec![vec![0.0; cols]; rows];
    #[allow(clippy::needless_range_loop)]
    for r in 0..rows {
        for (slot, &feat) in slot_to_feature.iter().enumerate() {
            weight[r][slot] = layer.weight[r][feat] / norm_factor;
        }
    }
    FcLayer {
        weight,
        bias: layer.bias.clone(),
    }
}

/// Encrypted forward pass; input occupies slots [0, in_dim) densely.
pub fn fc_forward(
    vm: &mut SlotVm,
    h0: &SlotVector,
    net: &FcNetwork,
) -> Result<SlotVector, VmError> {
    fc_forward_layers(vm, h0, net, |_, _| {})
}

/// Forward pass with a per-layer observer (for depth ledgers).
pub fn fc_forward_layers(
    vm: &mut SlotVm,
    h0: &SlotVector,
    net: &FcNetwork,
    mut on_layer: impl FnMut(usize, &SlotVector),
) -> Result<SlotVector, VmError> {
    let mut h = h0.clone();
    let last = net.layers.len() - 1;
    for (i, layer) in net.layers.iter().enumerate() {
        let rows = layer.out_dim();
        let cols = layer.in_dim();
        if rows > vm.slot_count || cols > vm.slot_count {
            return Err(VmError::PlainLengthMismatch {
                expected: vm.slot_count,
                got: rows.max(cols),
            });
        }
        let m = DiagMatrix::from_dense(
            vm.slot_count,
            rows,
            cols,
            |r, c| layer.weight[r][c],
            |r| r,
            |c| c,
        );
        let z = bsgs_matvec(vm, &h, &m)?;
        let z = vm.rescale(&z)?;
        let mut bias = vec![0.0; vm.slot_count];
        bias[..rows].copy_from_slice(&layer.bias);
        let z = vm.add_pt(&z, &bias)?;
        h = if i == last { z } else { vm.mul_ct(&z, &z)? };
        on_layer(i, &h);
    }
    Ok(h)
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

    fn random_net(rng: &mut rand_chacha::ChaCha12Rng, dims: &[usize]) -> FcNetwork {
        let layers = dims
            .windows(2)
            .map(|w| FcLayer {
                weight: (0..w[1])
                    .map(|_| (0..w[0]).map(|_| rng.random_range(-0.5..0.5)).collect())
                    .collect(),
                bias: (0..w[1]).map(|_| rng.random_range(-0.2..0.2)).collect(),
            })
            .collect();
        FcNetwork { layers }
    }

    #[test]
    fn zero_weights_and_biases_give_zero_logits() {
        let net = FcNetwork {
            layers: vec![FcLayer {
                weight: vec![vec![0.0; 4]; 3],
                bias: vec![0.0; 3],
            }],
        };
        let mut vmx = vm(32);
        let h0 = vmx.input_plain(&[0.3, -0.4, 0.5, 0.9]);
        let out = fc_forward(&mut vmx, &h0, &net).unwrap();
        assert!(out.plain_values()[..3].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn identity_single_layer_passes_input() {
        let n = 4;
        let mut w = vec![vec![0.0; n]; n];
        for (i, row) in w.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        let net = FcNetwork {
            layers: vec![FcLayer {
                weight: w,
                bias: vec![0.0; n],
            }],
        };
        let mut vmx = vm(32);
        let x = [0.3, -0.4, 0.5, 0.9];
        let h0 = vmx.input_plain(&x);
        let out = fc_forward(&mut vmx, &h0, &net).unwrap();
        for i in 0..n {
            assert!((out.plain_values()[i] - x[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn random_network_matches_plaintext_forward_and_argmax() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(55);
        let net = random_net(&mut rng, &[16, 8, 5]);
        let x: Vec<f64> = (0..16).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut vmx = vm(32);
        let h0 = vmx.input_plain(&x);
        let enc = fc_forward(&mut vmx, &h0, &net).unwrap();
        let oracle = net.forward_plain(&x);
        for (i, &o) in oracle.iter().enumerate() {
            assert!(
                (enc.plain_values()[i] - o).abs() < 1e-6,
                "logit {i}: {} vs {o}",
                enc.plain_values()[i]
            );
        }
        let argmax_enc = (0..5)
            .max_by(|&a, &b| {
                enc.plain_values()[a]
                    .partial_cmp(&enc.plain_values()[b])
                    .unwrap()
            })
            .unwrap();
        let argmax_pl = (0..5)
            .max_by(|&a, &b| oracle[a].partial_cmp(&oracle[b]).unwrap())
            .unwrap();
        assert_eq!(argmax_enc, argmax_pl);
    }

    #[test]
    fn depth_is_two_l_minus_one() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(56);
        let net = random_net(&mut rng, &[8, 6, 4, 3]);
        assert_eq!(net.depth(), 5);
        let mut vmx = vm(32);
        let h0 = vmx.input_plain(&vec![0.1; 8]);
        let out = fc_forward(&mut vmx, &h0, &net).unwrap();
        assert_eq!(vmx.consumed(&out), 5);
    }

    #[test]
    fn folded_first_layer_matches_normalized_permuted_reference() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(57);
        let net = random_net(&mut rng, &[6, 3]);
        let perm = vec![3usize, 1, 4, 0, 5, 2]; // slot -> trained feature index
        let eta = 7.5;
        let folded = fold_first_layer(&net.layers[0], eta, &perm);
        let raw: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
        // reference: normalize then permute into feature order
        let mut feat = vec![0.0; 6];
        for (slot, &f) in perm.iter().enumerate() {
            feat[f] = raw[slot] / eta;
        }
        let expect = net.layers[0].apply_plain(&feat);
        let got = folded.apply_plain(&raw);
        for i in 0..3 {
            assert!((got[i] - expect[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let net = FcNetwork {
            layers: vec![FcLayer {
                weight: vec![vec![0.1; 40]; 3],
                bias: vec![0.0; 3],
            }],
        };
        let mut vmx = vm(32); // 40 inputs cannot fit 32 slots
        let h0 = vmx.input_plain(&[0.5; 8]);
        let r = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
            fc_forward(&mut vmx, &h0, &net)
        }));
        assert!(r.is_err() || r.unwrap().is_err());
    }
}
