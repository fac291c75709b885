use std::fmt::Write as _;

use mcens::ensemble::PairwiseSci;
use mcens::features::read_features;
use mcens::transport::sci_with_anchor_sets;
use mcens::FeatureSet;
use serde::{Deserialize, Serialize};

use super::{par_map, write_json};
use crate::config::{ModelRef, RunConfig};
use crate::error::{AtPath, CliResult};
use crate::layout::Layout;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SciReport {
    pub models: Vec<String>,
    pub epsilon: f64,
    pub iterations: usize,
    pub marginal_tol: f64,
    pub anchors: usize,
    pub ridge: f64,
    pub top_k: usize,
    pub samples: usize,
    pub pairs: Vec<SciPair>,
    /// Mean over distinct pairs; absent with a single model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_pairwise_sci: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SciPair {
    pub id_a: String,
    pub id_b: String,
    pub sci: f64,
    pub marginal_deviation: f64,
}

/// `count` training rows spread evenly over the split.
pub fn anchor_rows(n: usize, count: usize) -> Vec<usize> {
    (0..count).map(|i| i * n / count).collect()
}

struct Loaded {
    anchors: FeatureSet,
    eval: FeatureSet,
}

pub fn run(cfg: &RunConfig) -> CliResult<SciReport> {
    let layout = Layout::new(&cfg.out);
    let ids: Vec<String> = cfg.models()?.iter().map(ModelRef::id).collect();
    let loaded = par_map(&ids, |id| {
        let p = layout.train_features(id);
        let train = read_features(&p).at(&p)?;
        let anchors = train.select_rows(&anchor_rows(train.n(), cfg.sinkhorn.anchors))?;
        let p = layout.id_features(id);
        Ok(Loaded { anchors, eval: read_features(&p).at(&p)? })
    })?;

    let mut pairs = Vec::new();
    for i in 0..ids.len() {
        for j in i..ids.len() {
            pairs.push((i, j));
        }
    }
    let sk = cfg.sinkhorn.sinkhorn();
    let write_couplings = cfg.sinkhorn.write_couplings;
    if write_couplings && ids.len() > 1 {
        layout.ensure("sci/coupling")?;
    }
    let results = par_map(&pairs, |&(i, j)| {
        let (a, b) = (&loaded[i], &loaded[j]);
        let out = sci_with_anchor_sets(&a.eval, &b.eval, &a.anchors, &b.anchors, &sk, cfg.sinkhorn.ridge, cfg.sinkhorn.top_k)?;
        if write_couplings && i != j {
            let path = layout.coupling(&ids[i], &ids[j]);
            out.coupling.write_csv(&out.ids, &out.ids, &path).at(&path)?;
        }
        Ok(SciPair {
            id_a: ids[i].clone(),
            id_b: ids[j].clone(),
            sci: out.sci,
            marginal_deviation: out.coupling.max_marginal_deviation(),
        })
    })?;

    layout.ensure("sci")?;
    let mut table = PairwiseSci::new();
    for p in &results {
        table.insert(&p.id_a, &p.id_b, p.sci)?;
    }
    let path = layout.sci_pairs();
    table.write_csv(&path).at(&path)?;

    let mut csv = String::from("id");
    for id in &ids {
        write!(csv, ",{id}").expect("string write");
    }
    csv.push('\n');
    for a in &ids {
        csv.push_str(a);
        for b in &ids {
            write!(csv, ",{}", table.get(a, b).expect("every pair computed")).expect("string write");
        }
        csv.push('\n');
    }
    let path = layout.sci_matrix();
    std::fs::write(&path, csv).at(&path)?;

    let off: Vec<f64> = results.iter().filter(|p| p.id_a != p.id_b).map(|p| p.sci).collect();
    let report = SciReport {
        models: ids,
        epsilon: sk.epsilon,
        iterations: sk.iterations,
        marginal_tol: sk.marginal_tol,
        anchors: cfg.sinkhorn.anchors,
        ridge: cfg.sinkhorn.ridge,
        top_k: cfg.sinkhorn.top_k,
        samples: loaded[0].eval.n(),
        pairs: results,
        mean_pairwise_sci: (!off.is_empty()).then(|| off.iter().sum::<f64>() / off.len() as f64),
    };
    write_json(&report, &layout.sci_json())?;
    Ok(report)
}
