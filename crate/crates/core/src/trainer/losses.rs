//! Cross-entropy and contrastive objectives with analytic gradients.

use crate::error::{Error, Result};
use crate::features::{LabelSet, LogitSet};
use crate::numerics::{dot, Matrix};

/// Mean `−log softmax(z)[y]` and its gradient `(softmax − onehot)/n`.
pub fn softmax_cross_entropy(logits: &Matrix<f64>, labels: &[usize]) -> Result<(f64, Matrix<f64>)> {
    let (n, k) = logits.shape();
    if labels.len() != n || n == 0 {
        return Err(Error::shape(format!("{} labels for {n} logit rows", labels.len())));
    }
    if let Some(&y) = labels.iter().find(|&&y| y >= k) {
        return Err(Error::arg(format!("label {y} out of range for {k} classes")));
    }
    let mut grad = Matrix::zeros(n, k);
    let mut loss = 0.0;
    let inv_n = 1.0 / n as f64;
    for (i, &y) in labels.iter().enumerate() {
        let row = logits.row(i);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = row.iter().map(|&z| (z - max).exp()).sum();
        let lse = max + sum.ln();
        loss += lse - row[y];
        let g = grad.row_mut(i);
        for (c, (gc, &z)) in g.iter_mut().zip(row).enumerate() {
            *gc = ((z - lse).exp() - f64::from(u8::from(c == y))) * inv_n;
        }
    }
    Ok((loss * inv_n, grad))
}

/// Mean negative log-softmax of the true class, matching rows by id.
pub fn cross_entropy_loss(logits: &LogitSet, labels: &LabelSet) -> Result<f64> {
    let y = labels.aligned_to(logits.ids())?;
    Ok(softmax_cross_entropy(logits.data(), &y)?.0)
}

/// Supervised-contrastive core over rows `u` with similarity `uᵢ·uₖ/τ`:
/// anchor `i` averages `−log softmax_{k≠i}` over its positive set and
/// anchors without positives are skipped.
fn contrastive(u: &Matrix<f64>, temperature: f64, positive: impl Fn(usize, usize) -> bool) -> Result<(f64, Matrix<f64>)> {
    if !(temperature > 0.0) {
        return Err(Error::arg(format!("temperature must be positive, got {temperature}")));
    }
    let n = u.rows();
    let inv_t = 1.0 / temperature;
    let sim = Matrix::from_fn(n, n, |i, k| dot(u.row(i), u.row(k)) * inv_t);
    let mut coef = Matrix::zeros(n, n);
    let mut loss = 0.0;
    let mut anchors = 0usize;
    for i in 0..n {
        let pos: Vec<usize> = (0..n).filter(|&k| k != i && positive(i, k)).collect();
        if pos.is_empty() {
            continue;
        }
        anchors += 1;
        let row = sim.row(i);
        let max = (0..n).filter(|&k| k != i).map(|k| row[k]).fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = (0..n).filter(|&k| k != i).map(|k| (row[k] - max).exp()).sum();
        let lse = max + sum.ln();
        let w = 1.0 / pos.len() as f64;
        loss += lse - w * pos.iter().map(|&p| row[p]).sum::<f64>();
        let c = coef.row_mut(i);
        for k in 0..n {
            if k != i {
                c[k] = (row[k] - lse).exp();
            }
        }
        for &p in &pos {
            c[p] -= w;
        }
    }
    if anchors == 0 {
        return Err(Error::arg("no anchor has a positive partner"));
    }
    let scale = inv_t / anchors as f64;
    let sym = Matrix::from_fn(n, n, |i, k| (coef[(i, k)] + coef[(k, i)]) * scale);
    let grad = sym.matmul(u)?;
    Ok((loss / anchors as f64, grad))
}

fn check_views(u: &Matrix<f64>) -> Result<()> {
    if u.rows() % 2 != 0 {
        return Err(Error::shape(format!("{} rows cannot hold paired views", u.rows())));
    }
    if u.rows() < 4 {
        return Err(Error::arg("contrastive batches need at least 2 samples (4 views)"));
    }
    Ok(())
}

/// NT-Xent over rows `2i`, `2i+1` as the two views of sample `i`, with the
/// gradient w.r.t. the rows as given.
pub fn nt_xent_with_grad(embeddings: &Matrix<f64>, temperature: f64) -> Result<(f64, Matrix<f64>)> {
    check_views(embeddings)?;
    contrastive(embeddings, temperature, |i, k| k == i ^ 1)
}

pub fn nt_xent_loss(embeddings: &Matrix<f64>, temperature: f64) -> Result<f64> {
    nt_xent_with_grad(embeddings, temperature).map(|r| r.0)
}

/// Supervised contrastive loss (positives averaged outside the log) with
/// one label per row.
pub fn supcon_with_grad(embeddings: &Matrix<f64>, labels: &[usize], temperature: f64) -> Result<(f64, Matrix<f64>)> {
    if labels.len() != embeddings.rows() {
        return Err(Error::shape(format!("{} labels for {} rows", labels.len(), embeddings.rows())));
    }
    contrastive(embeddings, temperature, |i, k| labels[i] == labels[k])
}

pub fn supcon_loss(embeddings: &Matrix<f64>, labels: &[usize], temperature: f64) -> Result<f64> {
    supcon_with_grad(embeddings, labels, temperature).map(|r| r.0)
}

/// Row-wise `z/‖z‖`, returning the norms for the backward pass.
pub fn normalize_rows(z: &Matrix<f64>) -> Result<(Matrix<f64>, Vec<f64>)> {
    let mut u = z.clone();
    let mut norms = Vec::with_capacity(z.rows());
    for i in 0..z.rows() {
        let r = u.row_mut(i);
        let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::DegenerateSample { id: format!("row {i}") });
        }
        r.iter_mut().for_each(|v| *v /= norm);
        norms.push(norm);
    }
    Ok((u, norms))
}

/// Maps `∂L/∂u` to `∂L/∂z` for `u = z/‖z‖`: `(g − u(u·g))/‖z‖`.
pub fn normalize_rows_backward(u: &Matrix<f64>, norms: &[f64], grad_u: &Matrix<f64>) -> Matrix<f64> {
    let mut out = grad_u.clone();
    for (i, &norm) in norms.iter().enumerate() {
        let proj = dot(u.row(i), grad_u.row(i));
        for (g, &ui) in out.row_mut(i).iter_mut().zip(u.row(i)) {
            *g = (*g - ui * proj) / norm;
        }
    }
    out
}
