use mcens::features::{write_features, write_labels, write_logits};
use mcens::trainer::{
    accuracy, cross_entropy_loss, forward_features, forward_logits, gen_synthetic, train_mlp_with_history, write_mlp,
    OodKind, SyntheticDataset,
};
use serde::{Deserialize, Serialize};

use super::{par_map, write_json};
use crate::config::{ModelRef, RunConfig};
use crate::error::{AtPath, CliResult};
use crate::layout::Layout;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub id: String,
    pub criterion: String,
    pub seed: u64,
    pub model_seed: u64,
    pub widths: Vec<usize>,
    pub parameter_count: usize,
    pub epochs: usize,
    pub final_loss: f64,
    pub loss_history: Vec<f64>,
    pub head_loss_history: Vec<f64>,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub test_cross_entropy: f64,
}

/// The ID splits come from one dataset; each OOD kind adds its own split.
pub struct Datasets {
    pub id: SyntheticDataset,
    pub ood: Vec<(OodKind, SyntheticDataset)>,
}

pub fn datasets(cfg: &RunConfig) -> CliResult<Datasets> {
    let kinds = cfg.ood_kinds()?;
    let ood = kinds
        .iter()
        .map(|&k| Ok((k, gen_synthetic(&cfg.synthetic_spec(k))?)))
        .collect::<CliResult<Vec<_>>>()?;
    let id = ood[0].1.clone();
    Ok(Datasets { id, ood })
}

pub fn run(cfg: &RunConfig) -> CliResult<Vec<TrainReport>> {
    let layout = Layout::new(&cfg.out);
    let data = datasets(cfg)?;
    layout.ensure("data")?;
    layout.ensure("models")?;
    layout.ensure("features")?;
    write_labels(&data.id.train_labels, layout.train_labels()).at(&layout.train_labels())?;
    write_labels(&data.id.test_labels, layout.test_labels()).at(&layout.test_labels())?;

    let models = cfg.models()?;
    par_map(&models, |m| train_one(cfg, &layout, &data, m))
}

fn train_one(cfg: &RunConfig, layout: &Layout, data: &Datasets, model: &ModelRef) -> CliResult<TrainReport> {
    let id = model.id();
    let tc = cfg.train_config(model);
    let d = &data.id;
    let outcome = train_mlp_with_history(d, &tc)?;
    let params = &outcome.params;

    let path = layout.model(&id);
    write_mlp(params, &path).at(&path)?;

    let feats = forward_features(params, &d.train_inputs, d.train_ids().to_vec())?;
    let path = layout.train_features(&id);
    write_features(&feats, &path).at(&path)?;

    let feats = forward_features(params, &d.test_inputs, d.test_ids().to_vec())?;
    let path = layout.id_features(&id);
    write_features(&feats, &path).at(&path)?;
    let logits = forward_logits(params, &d.test_inputs, d.test_ids().to_vec())?;
    let path = layout.id_logits(&id);
    write_logits(&logits, &path).at(&path)?;
    let test_cross_entropy = cross_entropy_loss(&logits, &d.test_labels)?;

    for (kind, od) in &data.ood {
        let feats = forward_features(params, &od.ood_inputs, od.ood_ids.clone())?;
        let path = layout.ood_features(&id, *kind);
        write_features(&feats, &path).at(&path)?;
        let logits = forward_logits(params, &od.ood_inputs, od.ood_ids.clone())?;
        let path = layout.ood_logits(&id, *kind);
        write_logits(&logits, &path).at(&path)?;
    }

    let report = TrainReport {
        id: id.clone(),
        criterion: model.criterion.name().to_owned(),
        seed: model.seed,
        model_seed: tc.seed,
        widths: params.widths(),
        parameter_count: params.parameter_count(),
        epochs: tc.epochs,
        final_loss: outcome.loss_history.last().copied().unwrap_or_default(),
        loss_history: outcome.loss_history.clone(),
        head_loss_history: outcome.head_loss_history.clone(),
        train_accuracy: accuracy(params, &d.train_inputs, d.train_labels.labels())?,
        test_accuracy: accuracy(params, &d.test_inputs, d.test_labels.labels())?,
        test_cross_entropy,
    };
    write_json(&report, &layout.train_report(&id))?;
    Ok(report)
}
