//! Permutation alignment of hidden units between two networks.

use super::mlp::MlpParams;
use crate::error::{Error, Result};
use crate::numerics::{dot, hungarian_min_assign, Matrix, Permutation};

#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub params: MlpParams,
    /// Per hidden layer: unit `i` of the aligned network is unit `π(i)` of
    /// the original target.
    pub permutations: Vec<Permutation>,
}

/// Reorders hidden units layer by layer; unit `i` of layer `l` becomes
/// the old unit `perms[l](i)`. Rows of the layer and the matching input
/// columns of the next layer (or head) move together, so the function is
/// unchanged.
pub fn permute_hidden_units(params: &MlpParams, perms: &[Permutation]) -> Result<MlpParams> {
    if perms.len() != params.layers().len() {
        return Err(Error::Architecture(format!("{} permutations for {} layers", perms.len(), params.layers().len())));
    }
    for (l, (p, layer)) in perms.iter().zip(params.layers()).enumerate() {
        if p.len() != layer.outputs() {
            return Err(Error::Architecture(format!("permutation {l} has {} entries for {} units", p.len(), layer.outputs())));
        }
    }
    let mut out = params.clone();
    for (l, perm) in perms.iter().enumerate() {
        let layer = &mut out.layers_mut()[l];
        let w = layer.weight.clone();
        let b = layer.bias.clone();
        layer.weight = Matrix::from_fn(w.rows(), w.cols(), |i, j| w[(perm.apply(i), j)]);
        layer.bias = (0..b.len()).map(|i| b[perm.apply(i)]).collect();
        let next = if l + 1 < out.layers().len() {
            &mut out.layers_mut()[l + 1].weight
        } else {
            &mut out.head_mut().weight
        };
        let w = next.clone();
        *next = Matrix::from_fn(w.rows(), w.cols(), |i, j| w[(i, perm.apply(j))]);
    }
    Ok(out)
}

/// One forward sweep of weight matching: for each hidden layer, after
/// earlier layers are aligned, assign target units to reference units by
/// maximising the inner product of their incoming weights and biases.
pub fn weight_match(reference: &MlpParams, target: &MlpParams) -> Result<Alignment> {
    if !reference.same_architecture(target) {
        return Err(Error::Architecture(format!("{:?} vs {:?}", reference.widths(), target.widths())));
    }
    let mut current = target.clone();
    let mut permutations = Vec::with_capacity(reference.layers().len());
    for l in 0..reference.layers().len() {
        let r = &reference.layers()[l];
        let t = &current.layers()[l];
        let n = r.outputs();
        let cost = Matrix::from_fn(n, n, |i, j| -(dot(r.weight.row(i), t.weight.row(j)) + r.bias[i] * t.bias[j]));
        let perm = hungarian_min_assign(&cost)?;
        let mut step: Vec<Permutation> = (0..reference.layers().len())
            .map(|k| Permutation::identity(reference.layers()[k].outputs()))
            .collect();
        step[l] = perm.clone();
        current = permute_hidden_units(&current, &step)?;
        permutations.push(perm);
    }
    Ok(Alignment { params: current, permutations })
}

pub fn weight_match_permute(reference: &MlpParams, target: &MlpParams) -> Result<MlpParams> {
    weight_match(reference, target).map(|a| a.params)
}
