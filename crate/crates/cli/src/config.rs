//! Run configuration. A TOML file with the sections `[data]`, `[train]`,
//! `[sinkhorn]`, `[scoring]`, `[selection]` and `[esn]`; every key is
//! optional and unknown keys are rejected. Relative paths are resolved
//! against the directory holding the config file.

use std::path::{Path, PathBuf};

use mcens::rng::derive_seed;
use mcens::scoring::{Metric, DEFAULT_KNN_K, DEFAULT_SHRINKAGE, DEFAULT_TPR};
use mcens::trainer::{Criterion, OodKind, SyntheticSpec, TrainConfig, DEFAULT_GRID_POINTS};
use mcens::transport::SinkhornConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub data: DataSection,
    pub train: TrainSection,
    pub sinkhorn: SinkhornSection,
    pub scoring: ScoringSection,
    pub selection: SelectionSection,
    pub esn: EsnSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out: PathBuf::from("out"),
            data: DataSection::default(),
            train: TrainSection::default(),
            sinkhorn: SinkhornSection::default(),
            scoring: ScoringSection::default(),
            selection: SelectionSection::default(),
            esn: EsnSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataSection {
    pub classes: usize,
    pub per_class: usize,
    pub test_per_class: usize,
    /// OOD samples per split.
    pub ood_count: usize,
    pub input_dim: usize,
    /// One OOD split per entry: `ring` or `shifted`.
    pub ood_kinds: Vec<String>,
}

impl Default for DataSection {
    fn default() -> Self {
        Self {
            classes: 3,
            per_class: 200,
            test_per_class: 200,
            ood_count: 600,
            input_dim: 4,
            ood_kinds: vec!["ring".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub criteria: Vec<String>,
    pub seeds: Vec<u64>,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub cosine: bool,
    pub momentum: f64,
    pub weight_decay: f64,
    pub max_grad_norm: f64,
    pub temperature: f64,
    pub augment_noise_sigma: f64,
    pub augment_drop_prob: f64,
    pub hidden: Vec<usize>,
    pub projection_dim: usize,
    pub head_epochs: usize,
    pub head_learning_rate: f64,
    pub barrier_grid_points: usize,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            criteria: Criterion::ALL.iter().map(|c| c.name().to_owned()).collect(),
            seeds: vec![0],
            epochs: t.epochs,
            batch_size: t.batch_size,
            learning_rate: t.learning_rate,
            cosine: t.cosine,
            momentum: t.momentum,
            weight_decay: t.weight_decay,
            max_grad_norm: t.max_grad_norm,
            temperature: t.temperature,
            augment_noise_sigma: t.augment_noise_sigma,
            augment_drop_prob: t.augment_drop_prob,
            hidden: t.hidden,
            projection_dim: t.projection_dim,
            head_epochs: t.head_epochs,
            head_learning_rate: t.head_learning_rate,
            barrier_grid_points: DEFAULT_GRID_POINTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SinkhornSection {
    pub epsilon: f64,
    pub iterations: usize,
    pub marginal_tol: f64,
    /// Training samples used to fit the affine calibration.
    pub anchors: usize,
    pub ridge: f64,
    pub top_k: usize,
    pub write_couplings: bool,
}

impl Default for SinkhornSection {
    fn default() -> Self {
        Self {
            epsilon: 0.05,
            iterations: 1000,
            marginal_tol: 1e-6,
            anchors: 64,
            ridge: 1e-3,
            top_k: 1,
            write_couplings: true,
        }
    }
}

impl SinkhornSection {
    pub fn sinkhorn(&self) -> SinkhornConfig {
        SinkhornConfig { epsilon: self.epsilon, iterations: self.iterations, marginal_tol: self.marginal_tol }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScoringSection {
    pub metrics: Vec<String>,
    pub knn_k: usize,
    pub knn_normalize: bool,
    pub shrinkage: f64,
    pub variance_floor: f64,
    pub tpr: f64,
    /// Model ids averaged into the feature-level ensemble; fewer than two
    /// means no ensemble is scored.
    pub ensemble: Vec<String>,
}

impl Default for ScoringSection {
    fn default() -> Self {
        Self {
            metrics: Metric::ALL.iter().map(|m| m.name().to_owned()).collect(),
            knn_k: DEFAULT_KNN_K,
            knn_normalize: true,
            shrinkage: DEFAULT_SHRINKAGE,
            variance_floor: 1e-6,
            tpr: DEFAULT_TPR,
            ensemble: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SelectionSection {
    pub size: usize,
    pub lambda: f64,
    /// Candidate model ids; empty means every trained model.
    pub pool: Vec<String>,
}

impl Default for SelectionSection {
    fn default() -> Self {
        Self { size: 3, lambda: 1.0, pool: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EsnSection {
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
    pub eps: Vec<f64>,
    pub members: Vec<usize>,
    pub draws: u64,
    pub angle_dims: Vec<usize>,
    pub angle_pairs: usize,
}

impl Default for EsnSection {
    fn default() -> Self {
        Self {
            mu: vec![0.5, 1.0, 2.0],
            sigma: vec![0.5, 1.0],
            eps: vec![-0.1, -0.5, -0.9],
            members: vec![2, 4, 16],
            draws: 200_000,
            angle_dims: vec![2, 10, 100, 1000],
            angle_pairs: 10_000,
        }
    }
}

/// A trained model: `<CRITERION>_<seed>`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ModelRef {
    pub criterion: Criterion,
    pub seed: u64,
}

impl ModelRef {
    pub fn id(&self) -> String {
        format!("{}_{}", self.criterion.name(), self.seed)
    }
}

impl RunConfig {
    /// Reads `path` (or the defaults when `None`), resolves `out` against
    /// the config's directory and validates the result.
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let mut cfg = match path {
            None => Self::default(),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| match e.kind() {
                    std::io::ErrorKind::NotFound => CliError::MissingFile(p.to_owned()),
                    _ => CliError::Io { path: p.to_owned(), source: e },
                })?;
                let mut cfg: Self = toml::from_str(&text)
                    .map_err(|e| CliError::Config(format!("{}: {}", p.display(), e.to_string().trim_end())))?;
                let base = p.parent().unwrap_or(Path::new(""));
                if cfg.out.is_relative() {
                    cfg.out = base.join(&cfg.out);
                }
                cfg
            }
        };
        cfg.out = normalize(&cfg.out);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |key: &str, msg: String| Err(CliError::Config(format!("{key}: {msg}")));
        self.criteria()?;
        self.ood_kinds()?;
        self.metrics()?;
        if self.train.seeds.is_empty() {
            return bad("train.seeds", "list at least one seed".into());
        }
        let mut seeds = self.train.seeds.clone();
        seeds.sort_unstable();
        seeds.dedup();
        if seeds.len() != self.train.seeds.len() {
            return bad("train.seeds", "seeds must be distinct".into());
        }
        if self.train.barrier_grid_points < 3 {
            return bad("train.barrier_grid_points", "need at least 3 grid points".into());
        }
        for m in self.models()? {
            self.train_config(&m).validate().map_err(|e| CliError::Config(format!("train: {e}")))?;
        }
        self.synthetic_spec(OodKind::Ring).validate().map_err(|e| CliError::Config(format!("data: {e}")))?;
        self.sinkhorn.sinkhorn().validate().map_err(|e| CliError::Config(format!("sinkhorn: {e}")))?;
        if self.sinkhorn.anchors < 2 {
            return bad("sinkhorn.anchors", "need at least 2 anchors".into());
        }
        if self.sinkhorn.anchors > self.data.classes * self.data.per_class {
            return bad("sinkhorn.anchors", "more anchors than training samples".into());
        }
        if self.sinkhorn.top_k == 0 {
            return bad("sinkhorn.top_k", "must be positive".into());
        }
        if !(self.sinkhorn.ridge >= 0.0) {
            return bad("sinkhorn.ridge", "must be nonnegative".into());
        }
        if self.scoring.knn_k == 0 {
            return bad("scoring.knn_k", "must be positive".into());
        }
        if !(0.0..1.0).contains(&self.scoring.shrinkage) {
            return bad("scoring.shrinkage", "must lie in [0, 1)".into());
        }
        if !(self.scoring.variance_floor >= 0.0) {
            return bad("scoring.variance_floor", "must be nonnegative".into());
        }
        if !(self.scoring.tpr > 0.0 && self.scoring.tpr <= 1.0) {
            return bad("scoring.tpr", "must lie in (0, 1]".into());
        }
        let ids: Vec<String> = self.models()?.iter().map(ModelRef::id).collect();
        for (key, list) in [("scoring.ensemble", &self.scoring.ensemble), ("selection.pool", &self.selection.pool)] {
            for id in list {
                if !ids.contains(id) {
                    return bad(key, format!("{id:?} is not one of the configured models {ids:?}"));
                }
            }
            let mut sorted = list.clone();
            sorted.sort();
            sorted.dedup();
            if sorted.len() != list.len() {
                return bad(key, "model ids must be distinct".into());
            }
        }
        if self.selection.size < 2 {
            return bad("selection.size", "an ensemble needs at least 2 members".into());
        }
        if !(self.selection.lambda >= 0.0) {
            return bad("selection.lambda", "must be nonnegative".into());
        }
        if self.esn.draws < 2 {
            return bad("esn.draws", "need at least 2 draws".into());
        }
        if self.esn.members.contains(&0) {
            return bad("esn.members", "member counts must be positive".into());
        }
        if self.esn.angle_dims.iter().any(|&d| d < 2) {
            return bad("esn.angle_dims", "dimensions must be at least 2".into());
        }
        Ok(())
    }

    pub fn criteria(&self) -> CliResult<Vec<Criterion>> {
        if self.train.criteria.is_empty() {
            return Err(CliError::Config("train.criteria: list at least one criterion".into()));
        }
        let mut out = Vec::new();
        for name in &self.train.criteria {
            let c: Criterion = name.parse().map_err(|e| CliError::Config(format!("train.criteria: {e}")))?;
            if out.contains(&c) {
                return Err(CliError::Config(format!("train.criteria: {name:?} listed twice")));
            }
            out.push(c);
        }
        Ok(out)
    }

    pub fn ood_kinds(&self) -> CliResult<Vec<OodKind>> {
        if self.data.ood_kinds.is_empty() {
            return Err(CliError::Config("data.ood_kinds: list at least one OOD split".into()));
        }
        let mut out = Vec::new();
        for name in &self.data.ood_kinds {
            let k: OodKind = name.parse().map_err(|e| CliError::Config(format!("data.ood_kinds: {e}")))?;
            if out.contains(&k) {
                return Err(CliError::Config(format!("data.ood_kinds: {name:?} listed twice")));
            }
            out.push(k);
        }
        Ok(out)
    }

    pub fn metrics(&self) -> CliResult<Vec<Metric>> {
        if self.scoring.metrics.is_empty() {
            return Err(CliError::Config("scoring.metrics: list at least one metric".into()));
        }
        let mut out = Vec::new();
        for name in &self.scoring.metrics {
            let m: Metric = name.parse().map_err(|e| CliError::Config(format!("scoring.metrics: {e}")))?;
            if !out.contains(&m) {
                out.push(m);
            }
        }
        Ok(out)
    }

    /// Criteria in config order, seeds in config order within each.
    pub fn models(&self) -> CliResult<Vec<ModelRef>> {
        let criteria = self.criteria()?;
        Ok(criteria
            .into_iter()
            .flat_map(|criterion| self.train.seeds.iter().map(move |&seed| ModelRef { criterion, seed }))
            .collect())
    }

    pub fn data_seed(&self) -> u64 {
        derive_seed(self.seed, "data")
    }

    pub fn synthetic_spec(&self, kind: OodKind) -> SyntheticSpec {
        SyntheticSpec {
            classes: self.data.classes,
            per_class: self.data.per_class,
            test_per_class: self.data.test_per_class,
            ood_count: self.data.ood_count,
            input_dim: self.data.input_dim,
            ood_kind: kind,
            seed: self.data_seed(),
        }
    }

    pub fn train_config(&self, model: &ModelRef) -> TrainConfig {
        let t = &self.train;
        TrainConfig {
            criterion: model.criterion,
            epochs: t.epochs,
            batch_size: t.batch_size,
            learning_rate: t.learning_rate,
            cosine: t.cosine,
            momentum: t.momentum,
            weight_decay: t.weight_decay,
            max_grad_norm: t.max_grad_norm,
            temperature: t.temperature,
            augment_noise_sigma: t.augment_noise_sigma,
            augment_drop_prob: t.augment_drop_prob,
            hidden: t.hidden.clone(),
            projection_dim: t.projection_dim,
            head_epochs: t.head_epochs,
            head_learning_rate: t.head_learning_rate,
            seed: derive_seed(self.seed, &format!("model/{}", model.seed)),
        }
    }

    pub fn esn_seed(&self) -> u64 {
        derive_seed(self.seed, "esn")
    }
}

/// Drops `.` components so reported paths stay tidy.
fn normalize(p: &Path) -> PathBuf {
    p.components().filter(|c| !matches!(c, std::path::Component::CurDir)).collect()
}
