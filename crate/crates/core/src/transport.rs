//! Entropic optimal transport between two feature clouds and the
//! Self-Coupling Index built on top of it.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureSet;
use crate::numerics::{dot, ridge_solve, Matrix};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinkhornConfig {
    /// Entropic regularisation; the kernel is `exp(−C/ε)`.
    pub epsilon: f64,
    pub iterations: usize,
    pub marginal_tol: f64,
}

impl Default for SinkhornConfig {
    fn default() -> Self {
        Self { epsilon: 0.05, iterations: 100, marginal_tol: 1e-6 }
    }
}

impl SinkhornConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::arg(format!("sinkhorn epsilon must be positive, got {}", self.epsilon)));
        }
        if self.iterations == 0 {
            return Err(Error::arg("sinkhorn needs at least one iteration"));
        }
        if !(self.marginal_tol > 0.0) {
            return Err(Error::arg(format!("marginal tolerance must be positive, got {}", self.marginal_tol)));
        }
        Ok(())
    }
}

/// Transport plan `P = diag(u)·K·diag(v)` with the marginals it targets.
#[derive(Debug, Clone)]
pub struct CouplingMatrix<T> {
    plan: Matrix<T>,
    row_masses: Vec<T>,
    col_masses: Vec<T>,
    max_marginal_deviation: T,
}

impl<T: Scalar> CouplingMatrix<T> {
    pub fn plan(&self) -> &Matrix<T> {
        &self.plan
    }

    pub fn row_masses(&self) -> &[T] {
        &self.row_masses
    }

    pub fn col_masses(&self) -> &[T] {
        &self.col_masses
    }

    /// Largest absolute gap between a row/column sum and its target mass.
    pub fn max_marginal_deviation(&self) -> T {
        self.max_marginal_deviation
    }

    /// Wraps an arbitrary nonnegative plan, e.g. a hand-built one; the
    /// targets are taken to be its own marginals.
    pub fn from_plan(plan: Matrix<T>) -> Result<Self> {
        if plan.as_slice().iter().any(|&x| !(x >= T::zero()) || !x.is_finite()) {
            return Err(Error::arg("coupling entries must be finite and nonnegative"));
        }
        Ok(Self {
            row_masses: plan.row_sums(),
            col_masses: plan.col_sums(),
            plan,
            max_marginal_deviation: T::zero(),
        })
    }

    /// Heat-map friendly CSV: a header of column ids, then one line per row id.
    pub fn write_csv(&self, row_ids: &[String], col_ids: &[String], path: impl AsRef<Path>) -> Result<()> {
        if row_ids.len() != self.plan.rows() || col_ids.len() != self.plan.cols() {
            return Err(Error::shape("coupling ids do not match the plan shape"));
        }
        let mut w = BufWriter::new(File::create(path)?);
        write!(w, "id")?;
        for c in col_ids {
            write!(w, ",{c}")?;
        }
        writeln!(w)?;
        for (id, row) in row_ids.iter().zip(self.plan.row_iter()) {
            write!(w, "{id}")?;
            for x in row {
                write!(w, ",{x}")?;
            }
            writeln!(w)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `C[i, j] = ‖aᵢ − bⱼ‖_p` for `p ≥ 1`.
pub fn pairwise_lp_cost<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>, p: T) -> Result<Matrix<T>> {
    if a.cols() != b.cols() {
        return Err(Error::shape(format!("dims {} vs {}", a.cols(), b.cols())));
    }
    if !(p >= T::one()) {
        return Err(Error::arg(format!("L^p cost needs p ≥ 1, got {p}")));
    }
    let two = T::of(2.0);
    let rows: Vec<Vec<T>> = (0..a.rows())
        .into_par_iter()
        .map(|i| {
            let x = a.row(i);
            b.row_iter()
                .map(|y| {
                    if p == two {
                        crate::numerics::squared_distance(x, y).sqrt()
                    } else if p == T::one() {
                        x.iter().zip(y).map(|(&s, &t)| (s - t).abs()).sum()
                    } else {
                        x.iter().zip(y).map(|(&s, &t)| (s - t).abs().powf(p)).sum::<T>().powf(p.recip())
                    }
                })
                .collect()
        })
        .collect();
    Ok(Matrix::from_vec(a.rows(), b.rows(), rows.into_iter().flatten().collect()).expect("rows × cols entries"))
}

/// Cost between two feature sets. `z2` is reordered to `z1`'s id order
/// first, so row `i` and column `i` refer to the same sample.
pub fn cost_matrix(z1: &FeatureSet, z2: &FeatureSet, p: f64) -> Result<Matrix<f64>> {
    if z1.n() != z2.n() || z1.dim() != z2.dim() {
        return Err(Error::shape(format!("{}x{} vs {}x{}", z1.n(), z1.dim(), z2.n(), z2.dim())));
    }
    let z2 = z1.align(z2)?;
    pairwise_lp_cost(z1.data(), z2.data(), p)
}

/// Divides by the largest entry so the cost lies in `[0, 1]`. An all-zero
/// cost is returned unchanged.
pub fn rescale_unit_max<T: Scalar>(cost: &Matrix<T>) -> Matrix<T> {
    let max = cost.max_abs();
    if max > T::zero() {
        cost.map(|c| c / max)
    } else {
        cost.clone()
    }
}

/// Sinkhorn–Knopp scaling with uniform marginals, run for exactly
/// `config.iterations` rounds of `u ← a / K v`, `v ← b / Kᵀ u`.
pub fn sinkhorn<T: Scalar>(cost: &Matrix<T>, config: &SinkhornConfig) -> Result<CouplingMatrix<T>> {
    config.validate()?;
    let (n, m) = cost.shape();
    if n == 0 || m == 0 {
        return Err(Error::arg("sinkhorn on an empty cost matrix"));
    }
    if let Some((i, j)) = cost.find_non_finite() {
        return Err(Error::arg(format!("non-finite cost at ({i}, {j})")));
    }
    let inv_eps = T::of(config.epsilon.recip());
    let kernel = cost.map(|c| (-c * inv_eps).exp());
    if let Some(i) = (0..n).find(|&i| kernel.row(i).iter().all(|&k| k == T::zero())) {
        return Err(Error::Conditioning(format!(
            "kernel row {i} underflows to zero; epsilon {} is too small for this cost scale",
            config.epsilon
        )));
    }
    let kernel_t = kernel.transpose();
    if let Some(j) = (0..m).find(|&j| kernel_t.row(j).iter().all(|&k| k == T::zero())) {
        return Err(Error::Conditioning(format!(
            "kernel column {j} underflows to zero; epsilon {} is too small for this cost scale",
            config.epsilon
        )));
    }
    let a = T::one() / T::of_usize(n);
    let b = T::one() / T::of_usize(m);
    let mut u = vec![T::one(); n];
    let mut v = vec![T::one(); m];
    for it in 0..config.iterations {
        scale_half_step(&kernel, &v, a, &mut u).map_err(|i| {
            Error::Conditioning(format!("row scaling {i} degenerated at iteration {it}"))
        })?;
        scale_half_step(&kernel_t, &u, b, &mut v).map_err(|j| {
            Error::Conditioning(format!("column scaling {j} degenerated at iteration {it}"))
        })?;
    }
    let mut plan = kernel;
    for i in 0..n {
        let ui = u[i];
        for (p, &vj) in plan.row_mut(i).iter_mut().zip(&v) {
            *p = ui * *p * vj;
        }
    }
    let row_dev = plan.row_sums().into_iter().fold(T::zero(), |d, s| d.max((s - a).abs()));
    let col_dev = plan.col_sums().into_iter().fold(T::zero(), |d, s| d.max((s - b).abs()));
    let deviation = row_dev.max(col_dev);
    if !(deviation.as_f64() <= config.marginal_tol) {
        return Err(Error::NotConverged { deviation: deviation.as_f64(), tolerance: config.marginal_tol });
    }
    Ok(CouplingMatrix { plan, row_masses: vec![a; n], col_masses: vec![b; m], max_marginal_deviation: deviation })
}

/// `out[i] = mass / (K[i, :] · other)`; reports the first index whose
/// denominator is zero or non-finite.
fn scale_half_step<T: Scalar>(kernel: &Matrix<T>, other: &[T], mass: T, out: &mut [T]) -> Result<(), usize> {
    out.par_iter_mut().enumerate().for_each(|(i, o)| {
        *o = mass / dot(kernel.row(i), other);
    });
    match out.iter().position(|x| !x.is_finite() || *x == T::zero()) {
        Some(i) => Err(i),
        None => Ok(()),
    }
}

/// Keeps the `k` largest entries of each row (ties resolved toward the
/// lowest column), then returns `(n / k)·trace`, clamped to `[0, 1]`.
pub fn self_coupling_index<T: Scalar>(coupling: &CouplingMatrix<T>, k: usize) -> Result<T> {
    let p = coupling.plan();
    if !p.is_square() {
        return Err(Error::shape(format!("self-coupling needs a square plan, got {}x{}", p.rows(), p.cols())));
    }
    let n = p.rows();
    if k == 0 || k > n {
        return Err(Error::arg(format!("top-k with k = {k} on {n} rows")));
    }
    let mut trace = T::zero();
    for i in 0..n {
        let row = p.row(i);
        let d = row[i];
        // rank of the diagonal entry under (value desc, column asc)
        let ahead = row
            .iter()
            .enumerate()
            .filter(|&(j, &x)| x > d || (x == d && j < i))
            .count();
        if ahead < k {
            trace = trace + d;
        }
    }
    let sci = T::of_usize(n) / T::of_usize(k) * trace;
    Ok(sci.max(T::zero()).min(T::one()))
}

/// `z ↦ A z + b`, with `A = I + Δ` fitted on anchor pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    pub a: Matrix<f64>,
    pub b: Vec<f64>,
    pub anchor_count: usize,
}

impl AffineMap {
    pub fn identity(dim: usize) -> Self {
        Self { a: Matrix::identity(dim), b: vec![0.0; dim], anchor_count: 0 }
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn apply_row(&self, z: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            *o = dot(self.a.row(r), z) + self.b[r];
        }
    }
}

/// Fits `A = I + Δ`, `b` minimising
/// `Σᵢ ‖(I + Δ) z2ᵢ + b − z1ᵢ‖² + ridge·(‖Δ‖² + ‖b‖²)`, so that `anchors2`
/// is mapped onto `anchors1`. Anchors are paired by sample id.
pub fn affine_calibrate(anchors1: &FeatureSet, anchors2: &FeatureSet, ridge: f64) -> Result<AffineMap> {
    if anchors1.n() < 2 {
        return Err(Error::arg(format!("calibration needs at least 2 anchors, got {}", anchors1.n())));
    }
    if anchors1.dim() != anchors2.dim() || anchors1.n() != anchors2.n() {
        return Err(Error::shape(format!(
            "anchor sets {}x{} vs {}x{}",
            anchors1.n(),
            anchors1.dim(),
            anchors2.n(),
            anchors2.dim()
        )));
    }
    let z2 = anchors1.align(anchors2)?;
    let (n, d) = (anchors1.n(), anchors1.dim());
    let design = Matrix::from_fn(n, d + 1, |i, j| if j < d { z2.row(i)[j] } else { 1.0 });
    let resid = anchors1.data().sub(z2.data())?;
    let theta = ridge_solve(&design, &resid, ridge)?;
    let mut a = Matrix::identity(d);
    for r in 0..d {
        for c in 0..d {
            a[(r, c)] += theta[(c, r)];
        }
    }
    let b = theta.row(d).to_vec();
    Ok(AffineMap { a, b, anchor_count: n })
}

pub fn apply_affine(z: &FeatureSet, map: &AffineMap) -> Result<FeatureSet> {
    if z.dim() != map.dim() {
        return Err(Error::shape(format!("features have dim {}, map {}", z.dim(), map.dim())));
    }
    z.map_rows(|src, dst| map.apply_row(src, dst))
}

/// Everything the SCI pipeline produced, for reporting.
#[derive(Debug, Clone)]
pub struct SciOutcome {
    pub sci: f64,
    pub coupling: CouplingMatrix<f64>,
    pub map: AffineMap,
    /// Evaluated sample ids in the (sorted) order used for the plan.
    pub ids: Vec<String>,
}

/// Calibrate on anchors, map `eval2` into `eval1`'s space, transport, and
/// read off the self-coupling. Samples are put in id order first so the
/// result does not depend on row order.
pub fn sci_with_anchor_sets(
    eval1: &FeatureSet,
    eval2: &FeatureSet,
    anchors1: &FeatureSet,
    anchors2: &FeatureSet,
    config: &SinkhornConfig,
    ridge: f64,
    k: usize,
) -> Result<SciOutcome> {
    let map = affine_calibrate(&anchors1.sorted_by_id(), &anchors2.sorted_by_id(), ridge)?;
    let e1 = eval1.sorted_by_id();
    let e2 = e1.align(eval2)?;
    let mapped = apply_affine(&e2, &map)?;
    let cost = rescale_unit_max(&cost_matrix(&e1, &mapped, 2.0)?);
    let coupling = sinkhorn(&cost, config)?;
    let sci = self_coupling_index(&coupling, k)?;
    Ok(SciOutcome { sci, coupling, map, ids: e1.ids().to_vec() })
}

/// SCI between two feature sets over the same samples. Rows whose ids are
/// listed in `anchors` calibrate the affine map and are excluded from the
/// transported set.
pub fn sci_between(
    features1: &FeatureSet,
    features2: &FeatureSet,
    anchors: &[String],
    config: &SinkhornConfig,
    ridge: f64,
    k: usize,
) -> Result<f64> {
    let anchor_set: HashSet<&str> = anchors.iter().map(String::as_str).collect();
    if anchor_set.len() != anchors.len() {
        return Err(Error::arg("anchor ids must be distinct"));
    }
    let eval_ids: Vec<String> = features1.ids().iter().filter(|id| !anchor_set.contains(id.as_str())).cloned().collect();
    if eval_ids.is_empty() {
        return Err(Error::arg("every sample is an anchor; nothing left to evaluate"));
    }
    let a1 = features1.reorder(anchors)?;
    let a2 = features2.reorder(anchors)?;
    let e1 = features1.reorder(&eval_ids)?;
    let e2 = features2.reorder(&eval_ids)?;
    if features2.n() != features1.n() {
        let _ = features1.align(features2)?;
    }
    Ok(sci_with_anchor_sets(&e1, &e2, &a1, &a2, config, ridge, k)?.sci)
}
