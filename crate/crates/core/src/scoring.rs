//! Post-hoc OOD scores and detection metrics.
//!
//! Every score follows one convention: larger means more in-distribution.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{l2_normalize, FeatureSet, LabelSet, LogitSet};
use crate::numerics::{log_sum_exp, squared_distance, Cholesky, Matrix};
use crate::scalar::Scalar;

pub const DEFAULT_SHRINKAGE: f64 = 0.05;
pub const DEFAULT_KNN_K: usize = 5;
pub const DEFAULT_TPR: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Metric {
    Msp,
    Mahalanobis,
    Energy,
    Knn,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Msp, Metric::Mahalanobis, Metric::Energy, Metric::Knn];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Msp => "MSP",
            Metric::Mahalanobis => "MAHALANOBIS",
            Metric::Energy => "ENERGY",
            Metric::Knn => "KNN",
        }
    }

    /// Whether the metric reads logits rather than features.
    pub fn uses_logits(self) -> bool {
        matches!(self, Metric::Msp | Metric::Energy)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "MSP" => Ok(Metric::Msp),
            "MAHALANOBIS" => Ok(Metric::Mahalanobis),
            "ENERGY" => Ok(Metric::Energy),
            "KNN" => Ok(Metric::Knn),
            other => Err(Error::arg(format!("unknown metric {other:?}"))),
        }
    }
}

/// Per-sample scores under one metric.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    ids: Vec<String>,
    scores: Vec<f64>,
    metric: Metric,
}

impl ScoreVector {
    pub fn new(ids: Vec<String>, scores: Vec<f64>, metric: Metric) -> Result<Self> {
        if ids.len() != scores.len() {
            return Err(Error::shape(format!("{} ids for {} scores", ids.len(), scores.len())));
        }
        if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
            return Err(Error::arg(format!("non-finite {metric} score for {:?}", ids[i])));
        }
        Ok(Self { ids, scores, metric })
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// `id,score` CSV.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "id,score")?;
        for (id, s) in self.ids.iter().zip(&self.scores) {
            writeln!(w, "{id},{s}")?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Linear classification head `W z + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearHead {
    pub weight: Matrix<f64>,
    pub bias: Vec<f64>,
}

impl LinearHead {
    pub fn new(weight: Matrix<f64>, bias: Vec<f64>) -> Result<Self> {
        if weight.rows() < 2 {
            return Err(Error::arg("a head needs at least two classes"));
        }
        if bias.len() != weight.rows() {
            return Err(Error::shape(format!("{} biases for {} classes", bias.len(), weight.rows())));
        }
        if !weight.is_finite() || bias.iter().any(|b| !b.is_finite()) {
            return Err(Error::arg("head parameters must be finite"));
        }
        Ok(Self { weight, bias })
    }

    pub fn classes(&self) -> usize {
        self.weight.rows()
    }

    pub fn dim(&self) -> usize {
        self.weight.cols()
    }

    pub fn logits(&self, features: &FeatureSet) -> Result<LogitSet> {
        if features.dim() != self.dim() {
            return Err(Error::shape(format!("features have dim {}, head expects {}", features.dim(), self.dim())));
        }
        let k = self.classes();
        let mut out = Matrix::zeros(features.n(), k);
        for i in 0..features.n() {
            let z = features.row(i);
            for c in 0..k {
                out[(i, c)] = self.bias[c] + crate::numerics::dot(self.weight.row(c), z);
            }
        }
        LogitSet::new(out, features.ids().to_vec())
    }
}

/// Class means and the shared (shrunk) covariance.
#[derive(Debug, Clone)]
pub struct ClassStats {
    pub means: Matrix<f64>,
    pub shared_cov: Matrix<f64>,
    pub shared_cov_inv: Matrix<f64>,
    pub shrinkage: f64,
    factor: Cholesky<f64>,
}

impl ClassStats {
    pub fn classes(&self) -> usize {
        self.means.rows()
    }

    pub fn dim(&self) -> usize {
        self.means.cols()
    }
}

/// Per-class means and pooled within-class covariance, blended toward its
/// own diagonal as `(1 − s)·Σ̂ + s·diag(Σ̂)`.
pub fn fit_class_stats(train: &FeatureSet, labels: &LabelSet, shrinkage: f64) -> Result<ClassStats> {
    fit_class_stats_floored(train, labels, shrinkage, 0.0)
}

/// [`fit_class_stats`] with `variance_floor` added to the diagonal after
/// shrinkage, for feature spaces with constant (dead) dimensions.
pub fn fit_class_stats_floored(
    train: &FeatureSet,
    labels: &LabelSet,
    shrinkage: f64,
    variance_floor: f64,
) -> Result<ClassStats> {
    if !(0.0..1.0).contains(&shrinkage) {
        return Err(Error::arg(format!("shrinkage must lie in [0, 1), got {shrinkage}")));
    }
    if !(variance_floor >= 0.0) {
        return Err(Error::arg(format!("variance floor must be nonnegative, got {variance_floor}")));
    }
    let y = labels.aligned_to(train.ids())?;
    let k = labels.classes();
    let d = train.dim();
    let mut counts = vec![0usize; k];
    let mut means = Matrix::zeros(k, d);
    for (i, &c) in y.iter().enumerate() {
        counts[c] += 1;
        for (m, &z) in means.row_mut(c).iter_mut().zip(train.row(i)) {
            *m += z;
        }
    }
    for (c, &count) in counts.iter().enumerate() {
        if count < 2 {
            return Err(Error::Fit(format!("class {c} has {count} samples, need at least 2")));
        }
        for m in means.row_mut(c) {
            *m /= count as f64;
        }
    }
    let mut cov = Matrix::zeros(d, d);
    let mut centered = vec![0.0; d];
    for (i, &c) in y.iter().enumerate() {
        for ((x, &z), &m) in centered.iter_mut().zip(train.row(i)).zip(means.row(c)) {
            *x = z - m;
        }
        for a in 0..d {
            let ca = centered[a];
            if ca == 0.0 {
                continue;
            }
            for (b, &cb) in centered.iter().enumerate() {
                cov[(a, b)] += ca * cb;
            }
        }
    }
    let n = train.n() as f64;
    for a in 0..d {
        for b in 0..d {
            let v = cov[(a, b)] / n;
            cov[(a, b)] = if a == b { v + variance_floor } else { (1.0 - shrinkage) * v };
        }
    }
    let factor = Cholesky::factor(&cov)
        .map_err(|e| Error::Conditioning(format!("shared covariance after shrinkage: {e}")))?;
    let inv = factor.inverse();
    let err = cov.matmul(&inv)?.max_abs_diff(&Matrix::identity(d))?;
    if !(err <= 1e-6) {
        return Err(Error::Conditioning(format!("covariance inverse check failed (max error {err:e})")));
    }
    Ok(ClassStats { means, shared_cov: cov, shared_cov_inv: inv, shrinkage, factor })
}

/// Maximum softmax probability.
pub fn msp_score(logits: &LogitSet) -> Result<ScoreVector> {
    let scores = logits
        .data()
        .row_iter()
        .map(|row| {
            let lse = log_sum_exp(row)?;
            Ok(row.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v - lse)).exp())
        })
        .collect::<Result<Vec<_>>>()?;
    ScoreVector::new(logits.ids().to_vec(), scores, Metric::Msp)
}

/// Negative energy, `log Σₖ exp(logitₖ)`.
pub fn energy_score(logits: &LogitSet) -> Result<ScoreVector> {
    let scores = logits.data().row_iter().map(log_sum_exp).collect::<Result<Vec<_>>>()?;
    ScoreVector::new(logits.ids().to_vec(), scores, Metric::Energy)
}

/// `maxₖ −(z − μₖ)ᵀ Σ̂⁻¹ (z − μₖ)`.
pub fn mahalanobis_score(features: &FeatureSet, stats: &ClassStats) -> Result<ScoreVector> {
    if features.dim() != stats.dim() {
        return Err(Error::shape(format!(
            "features have dim {}, class statistics {}",
            features.dim(),
            stats.dim()
        )));
    }
    let l = stats.factor.lower();
    let d = stats.dim();
    let scores: Vec<f64> = (0..features.n())
        .into_par_iter()
        .map(|i| {
            let z = features.row(i);
            let mut w = vec![0.0; d];
            let mut best = f64::NEG_INFINITY;
            for c in 0..stats.classes() {
                // ‖L⁻¹(z − μ)‖² is the quadratic form and is never negative
                for (j, (wj, (&zj, &mj))) in w.iter_mut().zip(z.iter().zip(stats.means.row(c))).enumerate() {
                    *wj = zj - mj;
                    let _ = j;
                }
                forward_substitute(l, &mut w);
                let q: f64 = w.iter().map(|x| x * x).sum();
                best = best.max(-q);
            }
            best
        })
        .collect();
    ScoreVector::new(features.ids().to_vec(), scores, Metric::Mahalanobis)
}

fn forward_substitute(l: &Matrix<f64>, b: &mut [f64]) {
    for i in 0..b.len() {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * b[k];
        }
        b[i] = s / l[(i, i)];
    }
}

/// Distance from each query row to its `k`-th nearest reference row.
pub fn kth_neighbor_distances<T: Scalar>(queries: &Matrix<T>, reference: &Matrix<T>, k: usize) -> Result<Vec<T>> {
    if k == 0 || k > reference.rows() {
        return Err(Error::arg(format!("k = {k} with {} reference rows", reference.rows())));
    }
    if queries.cols() != reference.cols() {
        return Err(Error::shape(format!("dims {} vs {}", queries.cols(), reference.cols())));
    }
    Ok((0..queries.rows())
        .into_par_iter()
        .map(|i| {
            let q = queries.row(i);
            let mut d: Vec<T> = reference.row_iter().map(|r| squared_distance(q, r).sqrt()).collect();
            let (_, kth, _) = d.select_nth_unstable_by(k - 1, |a, b| a.partial_cmp(b).expect("finite distances"));
            *kth
        })
        .collect())
}

/// `−r_k(z)`, the negated distance to the `k`-th nearest training row. With
/// `normalize` both sets are projected to the unit sphere first.
pub fn knn_score(test: &FeatureSet, train: &FeatureSet, k: usize, normalize: bool) -> Result<ScoreVector> {
    if k == 0 || k > train.n() {
        return Err(Error::arg(format!("k = {k} but the training set has {} rows", train.n())));
    }
    if test.dim() != train.dim() {
        return Err(Error::shape(format!("test dim {} vs train dim {}", test.dim(), train.dim())));
    }
    let (test_n, train_n);
    let (q, r) = if normalize {
        test_n = l2_normalize(test)?;
        train_n = l2_normalize(train)?;
        (&test_n, &train_n)
    } else {
        (test, train)
    };
    let dists = kth_neighbor_distances(q.data(), r.data(), k)?;
    ScoreVector::new(test.ids().to_vec(), dists.into_iter().map(|d| -d).collect(), Metric::Knn)
}

/// `score > τ`, strictly.
pub fn threshold_detect(scores: &ScoreVector, tau: f64) -> Vec<bool> {
    scores.scores().iter().map(|&s| s > tau).collect()
}

/// Mann–Whitney AUROC: `P(id > ood) + ½·P(tie)`.
pub fn auroc_values<T: Scalar>(id: &[T], ood: &[T]) -> Result<f64> {
    if id.is_empty() || ood.is_empty() {
        return Err(Error::arg("auroc needs nonempty ID and OOD score sets"));
    }
    let mut all: Vec<(T, bool)> = id.iter().map(|&s| (s, true)).chain(ood.iter().map(|&s| (s, false))).collect();
    if all.iter().any(|(s, _)| !s.is_finite()) {
        return Err(Error::arg("auroc scores must be finite"));
    }
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    // twice the 1-based midrank of each tie group is the integer start + end + 1
    let mut twice_rank_sum: u128 = 0;
    let mut start = 0;
    while start < all.len() {
        let mut end = start + 1;
        while end < all.len() && all[end].0 == all[start].0 {
            end += 1;
        }
        let twice_mid = (start + end + 1) as u128;
        let ids_in_group = all[start..end].iter().filter(|x| x.1).count() as u128;
        twice_rank_sum += twice_mid * ids_in_group;
        start = end;
    }
    let n1 = id.len() as u128;
    let n2 = ood.len() as u128;
    let twice_u = twice_rank_sum - n1 * (n1 + 1);
    Ok(twice_u as f64 / (2 * n1 * n2) as f64)
}

pub fn auroc(id: &ScoreVector, ood: &ScoreVector) -> Result<f64> {
    auroc_values(id.scores(), ood.scores())
}

/// Threshold admitting at least `tpr_target` of ID samples under "ID iff
/// score ≥ τ": the largest such τ, which is the ⌈target·n⌉-th largest ID
/// score.
pub fn tpr_threshold(id: &[f64], tpr_target: f64) -> Result<f64> {
    if id.is_empty() {
        return Err(Error::arg("threshold needs nonempty ID scores"));
    }
    if !(0.0..=1.0).contains(&tpr_target) {
        return Err(Error::arg(format!("target TPR {tpr_target} outside [0, 1]")));
    }
    let n = id.len();
    let need = ((tpr_target * n as f64) - 1e-9).ceil().max(0.0) as usize;
    if need == 0 {
        return Ok(f64::INFINITY);
    }
    let mut sorted = id.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(sorted[need.min(n) - 1])
}

/// `(FPR, τ)` at the requested TPR.
pub fn fpr_at_tpr_values(id: &[f64], ood: &[f64], tpr_target: f64) -> Result<(f64, f64)> {
    if ood.is_empty() {
        return Err(Error::arg("fpr needs nonempty OOD scores"));
    }
    let tau = tpr_threshold(id, tpr_target)?;
    let false_pos = ood.iter().filter(|&&s| s >= tau).count();
    Ok((false_pos as f64 / ood.len() as f64, tau))
}

pub fn fpr_at_tpr(id: &ScoreVector, ood: &ScoreVector, tpr_target: f64) -> Result<f64> {
    Ok(fpr_at_tpr_values(id.scores(), ood.scores(), tpr_target)?.0)
}

/// One row of the evaluation report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub metric: Metric,
    pub auroc: f64,
    pub fpr95: f64,
    pub n_id: usize,
    pub n_ood: usize,
    pub tau: f64,
}

pub fn evaluate(id: &ScoreVector, ood: &ScoreVector) -> Result<DetectionReport> {
    if id.metric() != ood.metric() {
        return Err(Error::arg(format!("comparing {} scores with {} scores", id.metric(), ood.metric())));
    }
    let (fpr95, tau) = fpr_at_tpr_values(id.scores(), ood.scores(), DEFAULT_TPR)?;
    Ok(DetectionReport {
        metric: id.metric(),
        auroc: auroc(id, ood)?,
        fpr95,
        n_id: id.len(),
        n_ood: ood.len(),
        tau,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("s{i}")).collect()
    }

    fn logits(rows: &[&[f64]]) -> LogitSet {
        LogitSet::new(Matrix::from_rows(rows).unwrap(), ids(rows.len())).unwrap()
    }

    fn features(rows: &[&[f64]]) -> FeatureSet {
        FeatureSet::new(Matrix::from_rows(rows).unwrap(), ids(rows.len())).unwrap()
    }

    fn sv(scores: &[f64]) -> ScoreVector {
        ScoreVector::new(ids(scores.len()), scores.to_vec(), Metric::Knn).unwrap()
    }

    #[test]
    fn msp_cases() {
        let s = msp_score(&logits(&[&[2.0, 2.0], &[0.0, 3f64.ln()], &[100.0, 0.0]])).unwrap();
        assert!((s.scores()[0] - 0.5).abs() < 1e-15);
        assert!((s.scores()[1] - 0.75).abs() < 1e-15);
        assert!((s.scores()[2] - 1.0).abs() < 1e-12);
        let shifted = msp_score(&logits(&[&[7.0, 7.0 + 3f64.ln()]])).unwrap();
        assert!((shifted.scores()[0] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn energy_cases() {
        let s = energy_score(&logits(&[&[0.0, 0.0, 0.0], &[1.0, 2.0, 3.0], &[6.0, 7.0, 8.0]])).unwrap();
        assert!((s.scores()[0] - 3f64.ln()).abs() < 1e-15);
        let direct = (1f64.exp() + 2f64.exp() + 3f64.exp()).ln();
        assert!((s.scores()[1] - direct).abs() < 1e-9);
        assert!((s.scores()[1] - 3.407_605_96).abs() < 1e-8);
        assert!((s.scores()[2] - (s.scores()[1] + 5.0)).abs() < 1e-12);
    }

    #[test]
    fn degenerate_spread_is_a_conditioning_error() {
        let f = features(&[&[0.0, 0.0], &[0.0, 0.0], &[1.0, 1.0], &[1.0, 1.0]]);
        let l = LabelSet::new(ids(4), vec![0, 0, 1, 1], 2).unwrap();
        assert!(matches!(fit_class_stats(&f, &l, 0.1), Err(Error::Conditioning(_))));
    }

    #[test]
    fn single_sample_class_is_a_fit_error() {
        let f = features(&[&[0.0, 0.0], &[0.1, 0.2], &[1.0, 1.0]]);
        let l = LabelSet::new(ids(3), vec![0, 0, 1], 2).unwrap();
        assert!(matches!(fit_class_stats(&f, &l, 0.1), Err(Error::Fit(_))));
        let l = LabelSet::new(ids(3), vec![0, 0, 0], 2).unwrap();
        assert!(matches!(fit_class_stats(&f, &l, 0.1), Err(Error::Fit(_))));
    }

    #[test]
    fn isotropic_classes_recover_sigma() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let sigma = 1.5;
        let noise = Normal::new(0.0, sigma).unwrap();
        let centers = [[0.0, 0.0, 0.0], [5.0, 5.0, 0.0]];
        let per = 4000;
        let m = Matrix::from_fn(2 * per, 3, |i, j| centers[i / per][j] + noise.sample(&mut rng));
        let f = FeatureSet::with_sequential_ids(m, "g").unwrap();
        let l = LabelSet::new(f.ids().to_vec(), (0..2 * per).map(|i| i / per).collect(), 2).unwrap();
        let st = fit_class_stats(&f, &l, 0.0).unwrap();
        let target = Matrix::identity(3).scaled(sigma * sigma);
        // sampling error of a variance estimate at n = 8000 is about 0.035
        assert!(st.shared_cov.max_abs_diff(&target).unwrap() < 0.15);
        assert!((st.means[(1, 0)] - 5.0).abs() < 0.1);
        let check = st.shared_cov.matmul(&st.shared_cov_inv).unwrap();
        assert!(check.max_abs_diff(&Matrix::identity(3)).unwrap() < 1e-6);
    }

    fn manual_stats(means: Matrix<f64>, cov: Matrix<f64>) -> ClassStats {
        let factor = Cholesky::factor(&cov).unwrap();
        ClassStats { means, shared_cov_inv: factor.inverse(), shared_cov: cov, shrinkage: 0.0, factor }
    }

    #[test]
    fn mahalanobis_cases() {
        let st = manual_stats(Matrix::zeros(1, 2), Matrix::identity(2));
        let s = mahalanobis_score(&features(&[&[3.0, 4.0], &[0.0, 0.0]]), &st).unwrap();
        assert!((s.scores()[0] + 25.0).abs() < 1e-12);
        assert_eq!(s.scores()[1], 0.0);
        let st = manual_stats(Matrix::zeros(1, 2), Matrix::identity(2).scaled(4.0));
        let s = mahalanobis_score(&features(&[&[2.0, 0.0]]), &st).unwrap();
        assert!((s.scores()[0] + 1.0).abs() < 1e-12);
        let bad = features(&[&[1.0, 2.0, 3.0]]);
        assert!(mahalanobis_score(&bad, &st).is_err());
    }

    #[test]
    fn mahalanobis_grows_toward_class_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = Matrix::from_fn(60, 4, |i, _| if i < 30 { 0.0 } else { 4.0 } + rng.random_range(-1.0..1.0));
        let f = FeatureSet::with_sequential_ids(m, "x").unwrap();
        let l = LabelSet::new(f.ids().to_vec(), (0..60).map(|i| i / 30).collect(), 2).unwrap();
        let st = fit_class_stats(&f, &l, DEFAULT_SHRINKAGE).unwrap();
        for t in 0..10 {
            let z: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
            let mut prev = f64::NEG_INFINITY;
            for step in 0..=10 {
                let a = step as f64 / 10.0;
                let moved: Vec<f64> = z.iter().zip(st.means.row(0)).map(|(&zi, &mi)| zi + a * (mi - zi)).collect();
                let s = mahalanobis_score(&features(&[&moved]), &st).unwrap().scores()[0];
                assert!(s >= prev - 1e-12, "trial {t} step {step}");
                assert!(s <= 0.0);
                prev = s;
            }
        }
    }

    #[test]
    fn knn_cases() {
        let train = features(&[&[0.0, 0.0], &[1.0, 0.0]]);
        let s = knn_score(&features(&[&[0.0, 0.0]]), &train, 1, false).unwrap();
        assert_eq!(s.scores()[0], 0.0);
        let s = knn_score(&features(&[&[0.0, 0.0]]), &train, 2, false).unwrap();
        assert_eq!(s.scores()[0], -1.0);
        assert!(knn_score(&train, &train, 3, false).is_err());
        assert!(knn_score(&train, &train, 0, false).is_err());
    }

    #[test]
    fn knn_matches_full_sort() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let train = Matrix::from_fn(200, 6, |_, _| rng.random_range(-1.0..1.0));
        let test = Matrix::from_fn(50, 6, |_, _| rng.random_range(-1.0..1.0));
        let got = kth_neighbor_distances(&test, &train, 5).unwrap();
        for (i, g) in got.iter().enumerate() {
            let mut all: Vec<f64> = (0..200)
                .map(|j| test.row(i).iter().zip(train.row(j)).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
                .collect();
            all.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert_eq!(*g, all[4]);
        }
    }

    #[test]
    fn threshold_is_strict() {
        let s = sv(&[1.0, 2.0]);
        assert_eq!(threshold_detect(&s, 1.5), vec![false, true]);
        assert_eq!(threshold_detect(&s, f64::NEG_INFINITY), vec![true, true]);
        assert_eq!(threshold_detect(&s, 2.0), vec![false, false]);
        assert_eq!(threshold_detect(&s, 1.0), vec![false, true]);
    }

    #[test]
    fn auroc_cases() {
        assert_eq!(auroc(&sv(&[0.9, 0.8]), &sv(&[0.1, 0.2])).unwrap(), 1.0);
        assert_eq!(auroc(&sv(&[0.9, 0.4]), &sv(&[0.5, 0.1])).unwrap(), 0.75);
        assert_eq!(auroc(&sv(&[0.3, 0.1, 0.3]), &sv(&[0.3, 0.1, 0.3])).unwrap(), 0.5);
        assert!(auroc_values::<f64>(&[], &[1.0]).is_err());
    }

    #[test]
    fn fpr_cases() {
        let id: Vec<f64> = (1..=20).map(|i| i as f64 * 0.05).collect();
        let (fpr, tau) = fpr_at_tpr_values(&id, &[0.0, 0.12], 0.95).unwrap();
        assert!((tau - 0.10).abs() < 1e-15);
        assert_eq!(fpr, 0.5);
        assert_eq!(fpr_at_tpr(&sv(&[0.9, 0.8]), &sv(&[0.1, 0.2]), 0.95).unwrap(), 0.0);
        assert!(fpr_at_tpr_values(&[1.0], &[], 0.95).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let same: Vec<f64> = (0..200).map(|_| rng.random()).collect();
        let (fpr, _) = fpr_at_tpr_values(&same, &same, 0.95).unwrap();
        assert!((fpr - 0.95).abs() <= 1.0 / 200.0);
    }

    #[test]
    fn metric_names_parse() {
        for m in Metric::ALL {
            assert_eq!(m.name().parse::<Metric>().unwrap(), m);
        }
        assert!("odin".parse::<Metric>().is_err());
    }
}
