use mcens::trainer::{forward_logits, loss_barrier, read_mlp, weight_match_permute, write_barrier_csv, MlpParams};
use serde::{Deserialize, Serialize};

use super::train::datasets;
use super::{par_map, write_json};
use crate::config::{ModelRef, RunConfig};
use crate::error::{AtPath, CliError, CliResult};
use crate::layout::Layout;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierReport {
    pub grid_points: usize,
    pub eval_samples: usize,
    pub pairs: Vec<BarrierPair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierPair {
    pub id_a: String,
    pub id_b: String,
    pub raw_barrier: f64,
    pub raw_alpha_star: f64,
    /// After permuting `id_b`'s hidden units onto `id_a`.
    pub matched_barrier: f64,
    pub matched_alpha_star: f64,
    /// `max |logits(b) − logits(matched b)|` over the evaluation inputs.
    pub max_logit_change: f64,
}

/// Parses `A,B` pair arguments.
pub fn parse_pairs(args: &[String], known: &[String]) -> CliResult<Vec<(String, String)>> {
    args.iter()
        .map(|arg| {
            let (a, b) = arg
                .split_once(',')
                .ok_or_else(|| CliError::Config(format!("--pair: expected A,B, got {arg:?}")))?;
            for id in [a, b] {
                if !known.iter().any(|k| k == id) {
                    return Err(CliError::Config(format!("--pair: {id:?} is not one of the configured models")));
                }
            }
            Ok((a.to_owned(), b.to_owned()))
        })
        .collect()
}

/// Every distinct model pair unless `pairs` is given.
pub fn run(cfg: &RunConfig, pairs: &[String]) -> CliResult<BarrierReport> {
    let layout = Layout::new(&cfg.out);
    let ids: Vec<String> = cfg.models()?.iter().map(ModelRef::id).collect();
    let pairs = if pairs.is_empty() {
        let mut out = Vec::new();
        for i in 0..ids.len() {
            for j in i + 1..ids.len() {
                out.push((ids[i].clone(), ids[j].clone()));
            }
        }
        out
    } else {
        parse_pairs(pairs, &ids)?
    };
    let data = datasets(cfg)?.id;
    let load = |id: &str| -> CliResult<MlpParams> {
        let p = layout.model(id);
        read_mlp(&p).at(&p)
    };
    layout.ensure("barrier")?;
    let grid = cfg.train.barrier_grid_points;
    let inputs = &data.test_inputs;
    let labels = data.test_labels.labels();
    let results = par_map(&pairs, |(a_id, b_id)| {
        let a = load(a_id)?;
        let b = load(b_id)?;
        let raw = loss_barrier(&a, &b, inputs, labels, grid)?;
        let matched_b = weight_match_permute(&a, &b)?;
        let matched = loss_barrier(&a, &matched_b, inputs, labels, grid)?;
        let before = forward_logits(&b, inputs, data.test_ids().to_vec())?;
        let after = forward_logits(&matched_b, inputs, data.test_ids().to_vec())?;
        let max_logit_change = before.data().max_abs_diff(after.data())?;
        let path = layout.barrier_curve(a_id, b_id, "raw");
        write_barrier_csv(&raw, &path).at(&path)?;
        let path = layout.barrier_curve(a_id, b_id, "matched");
        write_barrier_csv(&matched, &path).at(&path)?;
        Ok(BarrierPair {
            id_a: a_id.clone(),
            id_b: b_id.clone(),
            raw_barrier: raw.barrier,
            raw_alpha_star: raw.alpha_star,
            matched_barrier: matched.barrier,
            matched_alpha_star: matched.alpha_star,
            max_logit_change,
        })
    })?;
    let report = BarrierReport { grid_points: grid, eval_samples: inputs.rows(), pairs: results };
    write_json(&report, &layout.barrier_json())?;
    Ok(report)
}
