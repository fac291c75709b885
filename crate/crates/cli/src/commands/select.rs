use std::collections::BTreeMap;

use mcens::ensemble::{select_ensemble, PairwiseSci, Selection};
use mcens::features::{read_labels, read_logits};
use mcens::trainer::cross_entropy_loss;
use serde::{Deserialize, Serialize};

use super::write_json;
use crate::config::{ModelRef, RunConfig};
use crate::error::{AtPath, CliError, CliResult};
use crate::layout::Layout;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub size: usize,
    pub lambda: f64,
    /// Test cross-entropy per candidate.
    pub losses: BTreeMap<String, f64>,
    pub selection: Selection,
}

pub fn run(cfg: &RunConfig) -> CliResult<SelectionReport> {
    let layout = Layout::new(&cfg.out);
    let pool: Vec<String> = if cfg.selection.pool.is_empty() {
        cfg.models()?.iter().map(ModelRef::id).collect()
    } else {
        cfg.selection.pool.clone()
    };
    if cfg.selection.size > pool.len() {
        return Err(CliError::Config(format!(
            "selection.size: cannot pick {} members from a pool of {}",
            cfg.selection.size,
            pool.len()
        )));
    }
    let p = layout.test_labels();
    let labels = read_labels(&p).at(&p)?;
    let mut losses = BTreeMap::new();
    for id in &pool {
        let p = layout.id_logits(id);
        let logits = read_logits(&p).at(&p)?;
        losses.insert(id.clone(), cross_entropy_loss(&logits, &labels)?);
    }
    let p = layout.sci_pairs();
    let sci = PairwiseSci::read_csv(&p).at(&p)?;
    let selection = select_ensemble(&losses, &sci, cfg.selection.size, cfg.selection.lambda)?;
    let report = SelectionReport { size: cfg.selection.size, lambda: cfg.selection.lambda, losses, selection };
    write_json(&report, &layout.selection_json())?;
    Ok(report)
}
