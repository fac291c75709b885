//! Feature-level ensembling, detector bias–variance bookkeeping and
//! SCI-guided member selection.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, FormatError, Result};
use crate::features::FeatureSet;
use crate::numerics::Matrix;

/// `P(Γ = 1 | x)` for each sample.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorDistribution {
    ids: Vec<String>,
    p_positive: Vec<f64>,
}

impl DetectorDistribution {
    pub fn new(ids: Vec<String>, p_positive: Vec<f64>) -> Result<Self> {
        if ids.len() != p_positive.len() {
            return Err(Error::shape(format!("{} ids for {} probabilities", ids.len(), p_positive.len())));
        }
        if let Some(p) = p_positive.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::arg(format!("probability {p} outside [0, 1]")));
        }
        Ok(Self { ids, p_positive })
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn p_positive(&self) -> &[f64] {
        &self.p_positive
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// `[P(Γ=0|x), P(Γ=1|x)]`.
    fn outcome(&self, i: usize) -> [f64; 2] {
        [1.0 - self.p_positive[i], self.p_positive[i]]
    }
}

/// Probability-averaged detector `(1/M) Σᵢ Pᵢ(Γ=1|x)`.
pub fn average_detectors(members: &[DetectorDistribution]) -> Result<DetectorDistribution> {
    let first = members.first().ok_or_else(|| Error::arg("no ensemble members"))?;
    if members.iter().any(|d| d.ids() != first.ids()) {
        return Err(Error::arg("ensemble members cover different samples"));
    }
    let m = members.len() as f64;
    let p = (0..first.len())
        .map(|i| (members.iter().map(|d| d.p_positive[i]).sum::<f64>() / m).clamp(0.0, 1.0))
        .collect();
    DetectorDistribution::new(first.ids.clone(), p)
}

/// Elementwise mean of member feature sets sharing one id order.
pub fn average_features(members: &[FeatureSet]) -> Result<FeatureSet> {
    let first = members.first().ok_or_else(|| Error::arg("no ensemble members"))?;
    for (m, f) in members.iter().enumerate().skip(1) {
        if f.n() != first.n() || f.dim() != first.dim() {
            return Err(Error::shape(format!(
                "member {m} is {}x{}, member 0 is {}x{}",
                f.n(),
                f.dim(),
                first.n(),
                first.dim()
            )));
        }
        if f.ids() != first.ids() {
            return Err(Error::arg(format!("member {m} lists samples in a different order")));
        }
    }
    let scale = 1.0 / members.len() as f64;
    let mut sum = Matrix::zeros(first.n(), first.dim());
    for f in members {
        for (s, &x) in sum.as_mut_slice().iter_mut().zip(f.data().as_slice()) {
            *s += x;
        }
    }
    FeatureSet::new(sum.map(|s| s * scale), first.ids().to_vec())
}

/// Terms of the 0-1 detector loss split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossDecomposition {
    /// `bias² + variance + σ²`.
    pub loss: f64,
    pub bias_sq: f64,
    pub variance: f64,
    pub sigma_sq: f64,
    /// `1 − Σₓ P(x) Σ_y P_H(y|x) P_T(y|x)`, computed separately.
    pub direct_loss: f64,
}

pub fn detector_loss_decomposition(
    detector: &DetectorDistribution,
    truth: &DetectorDistribution,
    weights: &[f64],
) -> Result<LossDecomposition> {
    if detector.ids() != truth.ids() {
        return Err(Error::arg("detector and ground truth cover different samples"));
    }
    if weights.len() != detector.len() {
        return Err(Error::shape(format!("{} weights for {} samples", weights.len(), detector.len())));
    }
    if weights.iter().any(|&w| !(w >= 0.0)) {
        return Err(Error::arg("sample weights must be nonnegative"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::arg(format!("sample weights sum to {total}, not 1")));
    }
    let (mut bias_sq, mut variance, mut sigma_sq, mut agreement) = (0.0, 0.0, 0.0, 0.0);
    for (i, &w) in weights.iter().enumerate() {
        let h = detector.outcome(i);
        let t = truth.outcome(i);
        bias_sq += w * 0.5 * ((h[0] - t[0]).powi(2) + (h[1] - t[1]).powi(2));
        variance += w * 0.5 * (1.0 - h[0] * h[0] - h[1] * h[1]);
        sigma_sq += w * 0.5 * (1.0 - t[0] * t[0] - t[1] * t[1]);
        agreement += w * (h[0] * t[0] + h[1] * t[1]);
    }
    let loss = bias_sq + variance + sigma_sq;
    let direct_loss = 1.0 - agreement;
    if (loss - direct_loss).abs() > 1e-9 {
        return Err(Error::Conditioning(format!("decomposition {loss} disagrees with direct loss {direct_loss}")));
    }
    Ok(LossDecomposition { loss, bias_sq, variance, sigma_sq, direct_loss })
}

/// Per-sample split of the ensemble variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleVariance {
    /// `E[varianceᵢ] = (1/M) Σᵢ (1 − Σ_y Pᵢ(y)²)`.
    pub member_variance_mean: f64,
    /// `(1/M) Σᵢ Σ_{j≠i} (1 − Σ_y Pᵢ(y) Pⱼ(y))`.
    pub covariance_term: f64,
    /// `(1/M)·(E[varianceᵢ] + covariance)`.
    pub ensemble_variance: f64,
    /// `1 − Σ_y (mean Pᵢ(y))²`, computed from the averaged detector.
    pub direct_variance: f64,
    /// Whether `ensemble_variance > E[varianceᵢ]`; possible for
    /// anti-correlated members, reported only.
    pub exceeds_member_mean: bool,
}

pub fn ensemble_variance_decomposition(members: &[DetectorDistribution]) -> Result<Vec<EnsembleVariance>> {
    let m = members.len();
    if m < 2 {
        return Err(Error::arg(format!("an ensemble needs at least 2 members, got {m}")));
    }
    let ids = members[0].ids();
    if members.iter().any(|d| d.ids() != ids) {
        return Err(Error::arg("ensemble members cover different samples"));
    }
    let mf = m as f64;
    let mut out = Vec::with_capacity(ids.len());
    for x in 0..ids.len() {
        let probs: Vec<[f64; 2]> = members.iter().map(|d| d.outcome(x)).collect();
        let member_variance_mean = probs.iter().map(|p| 1.0 - p[0] * p[0] - p[1] * p[1]).sum::<f64>() / mf;
        let mut cross = 0.0;
        for (i, pi) in probs.iter().enumerate() {
            for (j, pj) in probs.iter().enumerate() {
                if i != j {
                    cross += 1.0 - pi[0] * pj[0] - pi[1] * pj[1];
                }
            }
        }
        let covariance_term = cross / mf;
        let ensemble_variance = (member_variance_mean + covariance_term) / mf;
        let mean0 = probs.iter().map(|p| p[0]).sum::<f64>() / mf;
        let mean1 = probs.iter().map(|p| p[1]).sum::<f64>() / mf;
        let direct_variance = 1.0 - mean0 * mean0 - mean1 * mean1;
        if (direct_variance - ensemble_variance).abs() > 1e-9 {
            return Err(Error::Conditioning(format!(
                "variance split {ensemble_variance} disagrees with direct value {direct_variance} at sample {}",
                ids[x]
            )));
        }
        if ensemble_variance < member_variance_mean / mf - 1e-12 {
            return Err(Error::Conditioning(format!(
                "ensemble variance {ensemble_variance} below its lower bound at sample {}",
                ids[x]
            )));
        }
        out.push(EnsembleVariance {
            member_variance_mean,
            covariance_term,
            ensemble_variance,
            direct_variance,
            exceeds_member_mean: ensemble_variance > member_variance_mean,
        });
    }
    Ok(out)
}

/// `(1 + (M − 1)ρ) / M`: the factor by which averaging `M` estimators with
/// intraclass correlation `ρ` scales a member's variance.
pub fn icc_shrinkage_factor(members: usize, rho: f64) -> Result<f64> {
    if members == 0 {
        return Err(Error::arg("member count must be at least 1"));
    }
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::arg(format!("intraclass correlation {rho} outside [0, 1]")));
    }
    let m = members as f64;
    Ok((1.0 + (m - 1.0) * rho) / m)
}

/// One-way random-effects ICC(1) per feature dimension (samples as groups,
/// members as repeated measurements), averaged over dimensions and clamped
/// to `[0, 1]`. Dimensions that are constant everywhere carry no
/// information and are skipped.
pub fn estimate_icc(members: &[FeatureSet]) -> Result<f64> {
    let m = members.len();
    if m < 2 {
        return Err(Error::arg(format!("ICC needs at least 2 members, got {m}")));
    }
    let first = &members[0];
    if members.iter().any(|f| f.n() != first.n() || f.dim() != first.dim() || f.ids() != first.ids()) {
        return Err(Error::arg("ICC members must share samples, order and dimension"));
    }
    let n = first.n();
    if n < 2 {
        return Err(Error::arg("ICC needs at least 2 samples"));
    }
    let (nf, mf) = (n as f64, m as f64);
    let mut total = 0.0;
    let mut used = 0usize;
    for d in 0..first.dim() {
        let mut group_means = vec![0.0; n];
        for f in members {
            for (i, g) in group_means.iter_mut().enumerate() {
                *g += f.row(i)[d];
            }
        }
        group_means.iter_mut().for_each(|g| *g /= mf);
        let grand = group_means.iter().sum::<f64>() / nf;
        let ss_between: f64 = group_means.iter().map(|g| (g - grand).powi(2)).sum::<f64>() * mf;
        let mut ss_within = 0.0;
        for f in members {
            for (i, g) in group_means.iter().enumerate() {
                ss_within += (f.row(i)[d] - g).powi(2);
            }
        }
        let msb = ss_between / (nf - 1.0);
        let msw = ss_within / (nf * (mf - 1.0));
        let denom = msb + (mf - 1.0) * msw;
        if denom <= 0.0 {
            continue;
        }
        total += (msb - msw) / denom;
        used += 1;
    }
    if used == 0 {
        return Ok(1.0);
    }
    Ok((total / used as f64).clamp(0.0, 1.0))
}

/// Symmetric pairwise Self-Coupling Index table keyed by model id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PairwiseSci {
    values: BTreeMap<(String, String), f64>,
}

impl PairwiseSci {
    pub fn new() -> Self {
        Self::default()
    }

    fn key(a: &str, b: &str) -> (String, String) {
        if a <= b {
            (a.to_owned(), b.to_owned())
        } else {
            (b.to_owned(), a.to_owned())
        }
    }

    /// Inserts `C(a, b)`; re-inserting the pair with a different value is
    /// an error because the table must stay symmetric.
    pub fn insert(&mut self, a: &str, b: &str, sci: f64) -> Result<()> {
        if !sci.is_finite() {
            return Err(Error::arg(format!("non-finite SCI for ({a}, {b})")));
        }
        let key = Self::key(a, b);
        if let Some(&old) = self.values.get(&key) {
            if (old - sci).abs() > 1e-12 {
                return Err(Error::arg(format!("asymmetric SCI for ({a}, {b}): {old} vs {sci}")));
            }
        }
        self.values.insert(key, sci);
        Ok(())
    }

    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        self.values.get(&Self::key(a, b)).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.values.iter().map(|((a, b), &v)| (a.as_str(), b.as_str(), v))
    }

    /// Reads `id_a,id_b,sci` rows (with that header).
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(BufReader::new(File::open(path)?));
        let headers = rdr.headers().map_err(|e| FormatError::Csv { line: 1, message: e.to_string() })?;
        if headers.iter().collect::<Vec<_>>() != ["id_a", "id_b", "sci"] {
            return Err(FormatError::Header("pairwise SCI file must start with `id_a,id_b,sci`".into()).into());
        }
        let mut out = Self::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| FormatError::Csv {
                line: e.position().map_or(0, |p| p.line() as usize),
                message: e.to_string(),
            })?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            let sci: f64 = rec[2].trim().parse().map_err(|_| FormatError::Csv {
                line,
                message: format!("SCI value {:?} is not a number", &rec[2]),
            })?;
            out.insert(&rec[0], &rec[1], sci)?;
        }
        Ok(out)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(e.into()))?;
        let to_io = |e: csv::Error| Error::Io(e.into());
        w.write_record(["id_a", "id_b", "sci"]).map_err(to_io)?;
        for (a, b, v) in self.iter() {
            w.write_record([a, b, &v.to_string()]).map_err(to_io)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    /// Sorted member ids.
    pub member_ids: Vec<String>,
    pub selection_lambda: f64,
}

impl EnsembleSpec {
    pub fn new(mut member_ids: Vec<String>, selection_lambda: f64) -> Result<Self> {
        member_ids.sort();
        if member_ids.len() < 2 {
            return Err(Error::arg("an ensemble needs at least 2 members"));
        }
        if member_ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::arg("ensemble member ids must be distinct"));
        }
        if !(selection_lambda >= 0.0) {
            return Err(Error::arg(format!("lambda must be nonnegative, got {selection_lambda}")));
        }
        Ok(Self { member_ids, selection_lambda })
    }

    pub fn size(&self) -> usize {
        self.member_ids.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub spec: EnsembleSpec,
    pub objective: f64,
    pub mean_loss: f64,
    pub mean_pairwise_sci: f64,
    pub subsets_evaluated: usize,
}

/// Objective of one candidate subset:
/// `(1/M) Σ L(Hᵢ) + λ · (1/(M(M−1))) Σ_{i≠j} C(Hᵢ, Hⱼ)`.
pub fn selection_objective(
    members: &[&str],
    losses: &BTreeMap<String, f64>,
    sci: &PairwiseSci,
    lambda: f64,
) -> Result<(f64, f64, f64)> {
    let m = members.len() as f64;
    let mut loss_sum = 0.0;
    for id in members {
        loss_sum += losses.get(*id).ok_or_else(|| Error::MissingInput(format!("no loss for model {id:?}")))?;
    }
    let mut sci_sum = 0.0;
    for (i, a) in members.iter().enumerate() {
        for (j, b) in members.iter().enumerate() {
            if i != j {
                sci_sum += sci.get(a, b).ok_or_else(|| Error::MissingInput(format!("no SCI for pair ({a}, {b})")))?;
            }
        }
    }
    let mean_loss = loss_sum / m;
    let mean_sci = sci_sum / (m * (m - 1.0));
    Ok((mean_loss + lambda * mean_sci, mean_loss, mean_sci))
}

/// Exhaustive minimisation over all size-`m` subsets of the pool. Subsets
/// are visited in lexicographic order of sorted ids and only a strictly
/// smaller objective replaces the incumbent, so ties go to the
/// lexicographically first subset.
pub fn select_ensemble(
    pool_losses: &BTreeMap<String, f64>,
    pairwise_sci: &PairwiseSci,
    m: usize,
    lambda: f64,
) -> Result<Selection> {
    let pool: Vec<&str> = pool_losses.keys().map(String::as_str).collect();
    if m < 2 || m > pool.len() {
        return Err(Error::arg(format!("cannot pick {m} members from a pool of {}", pool.len())));
    }
    if !(lambda >= 0.0) {
        return Err(Error::arg(format!("lambda must be nonnegative, got {lambda}")));
    }
    let unique: HashSet<&str> = pool.iter().copied().collect();
    debug_assert_eq!(unique.len(), pool.len());

    let mut idx: Vec<usize> = (0..m).collect();
    let mut best: Option<(f64, f64, f64, Vec<usize>)> = None;
    let mut evaluated = 0;
    loop {
        let members: Vec<&str> = idx.iter().map(|&i| pool[i]).collect();
        let (obj, ml, ms) = selection_objective(&members, pool_losses, pairwise_sci, lambda)?;
        evaluated += 1;
        if best.as_ref().is_none_or(|b| obj < b.0) {
            best = Some((obj, ml, ms, idx.clone()));
        }
        if !next_combination(&mut idx, pool.len()) {
            break;
        }
    }
    let (objective, mean_loss, mean_pairwise_sci, idx) = best.expect("at least one subset");
    let spec = EnsembleSpec::new(idx.iter().map(|&i| pool[i].to_owned()).collect(), lambda)?;
    Ok(Selection { spec, objective, mean_loss, mean_pairwise_sci, subsets_evaluated: evaluated })
}

/// Advances `idx` to the next k-combination of `0..n` in lexicographic order.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    for pos in (0..k).rev() {
        if idx[pos] < n - k + pos {
            idx[pos] += 1;
            for q in pos + 1..k {
                idx[q] = idx[q - 1] + 1;
            }
            return true;
        }
    }
    false
}
