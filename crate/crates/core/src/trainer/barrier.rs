//! Loss along the straight line between two parameter vectors.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::losses::softmax_cross_entropy;
use super::mlp::{interpolate_params, MlpParams};
use crate::error::{Error, Result};
use crate::numerics::Matrix;

pub const DEFAULT_GRID_POINTS: usize = 25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierCurve {
    /// `max_α L(α) − ½(L(0) + L(1))`.
    pub barrier: f64,
    /// First grid point attaining the maximum.
    pub alpha_star: f64,
    /// `(α, L(α))` on the uniform grid.
    pub curve: Vec<(f64, f64)>,
}

pub fn eval_loss(params: &MlpParams, inputs: &Matrix<f64>, labels: &[usize]) -> Result<f64> {
    Ok(softmax_cross_entropy(&params.logits(inputs)?, labels)?.0)
}

/// Cross-entropy of the interpolated network on `grid_points` evenly
/// spaced `α ∈ [0, 1]`.
pub fn loss_barrier(
    a: &MlpParams,
    b: &MlpParams,
    inputs: &Matrix<f64>,
    labels: &[usize],
    grid_points: usize,
) -> Result<BarrierCurve> {
    if grid_points < 3 {
        return Err(Error::arg(format!("barrier grid needs at least 3 points, got {grid_points}")));
    }
    if !a.same_architecture(b) {
        return Err(Error::Architecture(format!("{:?} vs {:?}", a.widths(), b.widths())));
    }
    let last = (grid_points - 1) as f64;
    let curve = (0..grid_points)
        .into_par_iter()
        .map(|g| {
            let alpha = g as f64 / last;
            let p = interpolate_params(a, b, alpha)?;
            Ok((alpha, eval_loss(&p, inputs, labels)?))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let ends = 0.5 * (curve[0].1 + curve[grid_points - 1].1);
    let (alpha_star, peak) = curve.iter().copied().fold((0.0, f64::NEG_INFINITY), |best, (al, l)| if l > best.1 { (al, l) } else { best });
    Ok(BarrierCurve { barrier: peak - ends, alpha_star, curve })
}

/// Writes `alpha,loss`.
pub fn write_barrier_csv(curve: &BarrierCurve, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "alpha,loss")?;
    for (alpha, loss) in &curve.curve {
        writeln!(w, "{alpha},{loss}")?;
    }
    w.flush()?;
    Ok(())
}
