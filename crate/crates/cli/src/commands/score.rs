use mcens::ensemble::average_features;
use mcens::features::{read_features, read_labels, read_logits};
use mcens::scoring::{
    auroc, energy_score, fit_class_stats_floored, fpr_at_tpr_values, knn_score, mahalanobis_score, msp_score,
    DetectionReport, Metric, ScoreVector,
};
use mcens::trainer::OodKind;
use mcens::{FeatureSet, LabelSet, LogitSet};
use serde::{Deserialize, Serialize};

use super::{par_map, write_json};
use crate::config::{ModelRef, RunConfig};
use crate::error::{AtPath, CliResult};
use crate::layout::{ood_tag, Layout};

pub const ENSEMBLE_ID: &str = "ENSEMBLE";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub tpr: f64,
    pub metrics: Vec<Metric>,
    pub ood_splits: Vec<String>,
    pub models: Vec<EvalEntry>,
    /// Feature-averaged ensemble; present only with two or more members.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EvalEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalEntry {
    pub id: String,
    pub members: Vec<String>,
    pub splits: Vec<SplitResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitResult {
    pub ood: String,
    pub results: Vec<DetectionReport>,
}

/// Scores of one model (or ensemble) under one metric.
struct MetricScores {
    metric: Metric,
    id: ScoreVector,
    ood: Vec<(OodKind, ScoreVector)>,
}

struct Scored {
    id: String,
    members: Vec<String>,
    metrics: Vec<MetricScores>,
}

/// A single model or the average of several; features and logits are
/// averaged member-wise.
struct Source<'a> {
    layout: &'a Layout,
    members: &'a [String],
}

impl Source<'_> {
    fn features(&self, path: impl Fn(&str) -> std::path::PathBuf) -> CliResult<FeatureSet> {
        let sets = self
            .members
            .iter()
            .map(|m| {
                let p = path(m);
                read_features(&p).at(&p)
            })
            .collect::<CliResult<Vec<_>>>()?;
        Ok(average_features(&sets)?)
    }

    fn logits(&self, path: impl Fn(&str) -> std::path::PathBuf) -> CliResult<LogitSet> {
        let sets = self
            .members
            .iter()
            .map(|m| {
                let p = path(m);
                read_logits(&p).at(&p).map(LogitSet::into_features)
            })
            .collect::<CliResult<Vec<_>>>()?;
        Ok(LogitSet::from_features(average_features(&sets)?)?)
    }
}

fn score_source(
    cfg: &RunConfig,
    layout: &Layout,
    id: &str,
    members: &[String],
    train_labels: &LabelSet,
) -> CliResult<Scored> {
    let src = Source { layout, members };
    let kinds = cfg.ood_kinds()?;
    let s = &cfg.scoring;
    let mut out = Vec::new();
    let mut train_feats = None;
    for metric in cfg.metrics()? {
        let scored = match metric {
            Metric::Msp | Metric::Energy => {
                let f = |l: &LogitSet| if metric == Metric::Msp { msp_score(l) } else { energy_score(l) };
                let id_scores = f(&src.logits(|m| src.layout.id_logits(m))?)?;
                let ood = kinds
                    .iter()
                    .map(|&k| Ok((k, f(&src.logits(|m| src.layout.ood_logits(m, k))?)?)))
                    .collect::<CliResult<Vec<_>>>()?;
                MetricScores { metric, id: id_scores, ood }
            }
            Metric::Mahalanobis | Metric::Knn => {
                if train_feats.is_none() {
                    train_feats = Some(src.features(|m| src.layout.train_features(m))?);
                }
                let train = train_feats.as_ref().expect("loaded above");
                let score: Box<dyn Fn(&FeatureSet) -> mcens::Result<ScoreVector>> = if metric == Metric::Knn {
                    Box::new(|z| knn_score(z, train, s.knn_k, s.knn_normalize))
                } else {
                    let stats = fit_class_stats_floored(train, train_labels, s.shrinkage, s.variance_floor)?;
                    Box::new(move |z| mahalanobis_score(z, &stats))
                };
                let id_scores = score(&src.features(|m| src.layout.id_features(m))?)?;
                let ood = kinds
                    .iter()
                    .map(|&k| Ok((k, score(&src.features(|m| src.layout.ood_features(m, k))?)?)))
                    .collect::<CliResult<Vec<_>>>()?;
                MetricScores { metric, id: id_scores, ood }
            }
        };
        out.push(scored);
    }
    Ok(Scored { id: id.to_owned(), members: members.to_vec(), metrics: out })
}

fn score_all(cfg: &RunConfig) -> CliResult<Vec<Scored>> {
    let layout = Layout::new(&cfg.out);
    let metrics = cfg.metrics()?;
    let needs_labels = metrics.contains(&Metric::Mahalanobis);
    let train_labels = if needs_labels {
        let p = layout.train_labels();
        read_labels(&p).at(&p)?
    } else {
        LabelSet::new(Vec::new(), Vec::new(), 1)?
    };
    let mut sources: Vec<(String, Vec<String>)> =
        cfg.models()?.iter().map(ModelRef::id).map(|id| (id.clone(), vec![id])).collect();
    if cfg.scoring.ensemble.len() >= 2 {
        sources.push((ENSEMBLE_ID.to_owned(), cfg.scoring.ensemble.clone()));
    }
    par_map(&sources, |(id, members)| score_source(cfg, &layout, id, members, &train_labels))
}

/// Writes `id,score` CSVs per model, metric and split.
pub fn run_score(cfg: &RunConfig) -> CliResult<usize> {
    let layout = Layout::new(&cfg.out);
    let scored = score_all(cfg)?;
    layout.ensure("scores")?;
    let mut written = 0;
    for s in &scored {
        for m in &s.metrics {
            let path = layout.scores(&s.id, m.metric.name(), "id");
            m.id.write_csv(&path).at(&path)?;
            written += 1;
            for (kind, v) in &m.ood {
                let path = layout.scores(&s.id, m.metric.name(), &format!("ood-{}", ood_tag(*kind)));
                v.write_csv(&path).at(&path)?;
                written += 1;
            }
        }
    }
    Ok(written)
}

pub fn detection_report(id: &ScoreVector, ood: &ScoreVector, tpr: f64) -> CliResult<DetectionReport> {
    let (fpr95, tau) = fpr_at_tpr_values(id.scores(), ood.scores(), tpr)?;
    Ok(DetectionReport { metric: id.metric(), auroc: auroc(id, ood)?, fpr95, n_id: id.len(), n_ood: ood.len(), tau })
}

pub fn run_eval(cfg: &RunConfig) -> CliResult<EvalReport> {
    let layout = Layout::new(&cfg.out);
    let kinds = cfg.ood_kinds()?;
    let scored = score_all(cfg)?;
    let mut models = Vec::new();
    let mut ensemble = None;
    for s in scored {
        let splits = kinds
            .iter()
            .enumerate()
            .map(|(i, &k)| {
                let results = s
                    .metrics
                    .iter()
                    .map(|m| detection_report(&m.id, &m.ood[i].1, cfg.scoring.tpr))
                    .collect::<CliResult<Vec<_>>>()?;
                Ok(SplitResult { ood: ood_tag(k).to_owned(), results })
            })
            .collect::<CliResult<Vec<_>>>()?;
        let entry = EvalEntry { id: s.id, members: s.members, splits };
        if entry.id == ENSEMBLE_ID {
            ensemble = Some(entry);
        } else {
            models.push(entry);
        }
    }
    let report = EvalReport {
        tpr: cfg.scoring.tpr,
        metrics: cfg.metrics()?,
        ood_splits: kinds.iter().map(|&k| ood_tag(k).to_owned()).collect(),
        models,
        ensemble,
    };
    write_json(&report, &layout.eval_json())?;
    Ok(report)
}
