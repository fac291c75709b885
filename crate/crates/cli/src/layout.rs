//! File names under the output directory.

use std::path::{Path, PathBuf};

use mcens::trainer::OodKind;

use crate::error::{AtPath, CliResult};

#[derive(Debug, Clone)]
pub struct Layout {
    root: PathBuf,
}

pub fn ood_tag(kind: OodKind) -> &'static str {
    match kind {
        OodKind::Ring => "ring",
        OodKind::Shifted => "shifted",
    }
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn ensure(&self, sub: &str) -> CliResult<PathBuf> {
        let dir = self.root.join(sub);
        std::fs::create_dir_all(&dir).at(&dir)?;
        Ok(dir)
    }

    pub fn train_labels(&self) -> PathBuf {
        self.root.join("data/train.labels.csv")
    }

    pub fn test_labels(&self) -> PathBuf {
        self.root.join("data/test.labels.csv")
    }

    pub fn model(&self, id: &str) -> PathBuf {
        self.root.join(format!("models/{id}.mlpw"))
    }

    pub fn train_report(&self, id: &str) -> PathBuf {
        self.root.join(format!("models/{id}.train.json"))
    }

    pub fn train_features(&self, id: &str) -> PathBuf {
        self.root.join(format!("features/{id}.train.feat"))
    }

    pub fn id_features(&self, id: &str) -> PathBuf {
        self.root.join(format!("features/{id}.id.feat"))
    }

    pub fn ood_features(&self, id: &str, kind: OodKind) -> PathBuf {
        self.root.join(format!("features/{id}.ood-{}.feat", ood_tag(kind)))
    }

    pub fn id_logits(&self, id: &str) -> PathBuf {
        self.root.join(format!("features/{id}.id.logt"))
    }

    pub fn ood_logits(&self, id: &str, kind: OodKind) -> PathBuf {
        self.root.join(format!("features/{id}.ood-{}.logt", ood_tag(kind)))
    }

    pub fn scores(&self, id: &str, metric: &str, split: &str) -> PathBuf {
        self.root.join(format!("scores/{id}.{}.{split}.csv", metric.to_ascii_lowercase()))
    }

    pub fn eval_json(&self) -> PathBuf {
        self.root.join("eval.json")
    }

    pub fn sci_matrix(&self) -> PathBuf {
        self.root.join("sci/sci_matrix.csv")
    }

    pub fn sci_pairs(&self) -> PathBuf {
        self.root.join("sci/sci_pairs.csv")
    }

    pub fn coupling(&self, a: &str, b: &str) -> PathBuf {
        self.root.join(format!("sci/coupling/{a}__{b}.csv"))
    }

    pub fn sci_json(&self) -> PathBuf {
        self.root.join("sci.json")
    }

    pub fn barrier_curve(&self, a: &str, b: &str, which: &str) -> PathBuf {
        self.root.join(format!("barrier/{a}__{b}.{which}.csv"))
    }

    pub fn barrier_json(&self) -> PathBuf {
        self.root.join("barrier.json")
    }

    pub fn selection_json(&self) -> PathBuf {
        self.root.join("selection.json")
    }

    pub fn esn_grid(&self) -> PathBuf {
        self.root.join("esn/gap_grid.csv")
    }

    pub fn esn_json(&self) -> PathBuf {
        self.root.join("esn.json")
    }

    pub fn report_json(&self) -> PathBuf {
        self.root.join("report.json")
    }
}
