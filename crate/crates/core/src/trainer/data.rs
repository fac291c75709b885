//! Synthetic Gaussian-blob classification data with an OOD split.

use std::f64::consts::TAU;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::LabelSet;
use crate::numerics::Matrix;
use crate::rng::stream;

/// Radius of the circle carrying the ID class centres.
pub const ID_RADIUS: f64 = 6.0;
/// Radius of the OOD ring.
pub const OOD_RING_RADIUS: f64 = 12.0;
/// Offset added to the first coordinate of shifted OOD blobs.
pub const OOD_SHIFT: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OodKind {
    Ring,
    Shifted,
}

impl FromStr for OodKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ring" => Ok(OodKind::Ring),
            "shifted" => Ok(OodKind::Shifted),
            other => Err(Error::arg(format!("unknown OOD kind {other:?} (expected ring or shifted)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub classes: usize,
    /// Training samples per class.
    pub per_class: usize,
    /// Test samples per class.
    pub test_per_class: usize,
    pub ood_count: usize,
    pub input_dim: usize,
    pub ood_kind: OodKind,
    pub seed: u64,
}

impl SyntheticSpec {
    /// Test split the size of the training split and as many OOD samples
    /// as ID test samples.
    pub fn new(classes: usize, per_class: usize, input_dim: usize, ood_kind: OodKind, seed: u64) -> Self {
        Self {
            classes,
            per_class,
            test_per_class: per_class,
            ood_count: classes * per_class,
            input_dim,
            ood_kind,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.classes < 2 {
            return Err(Error::arg("synthetic data needs at least 2 classes"));
        }
        if self.input_dim < 2 {
            return Err(Error::arg("synthetic inputs need at least 2 dimensions"));
        }
        if self.per_class == 0 || self.test_per_class == 0 || self.ood_count == 0 {
            return Err(Error::arg("every split needs at least one sample"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub spec: SyntheticSpec,
    pub train_inputs: Matrix<f64>,
    pub train_labels: LabelSet,
    pub test_inputs: Matrix<f64>,
    pub test_labels: LabelSet,
    pub ood_inputs: Matrix<f64>,
    pub ood_ids: Vec<String>,
}

impl SyntheticDataset {
    pub fn train_ids(&self) -> &[String] {
        self.train_labels.ids()
    }

    pub fn test_ids(&self) -> &[String] {
        self.test_labels.ids()
    }
}

fn class_centre(k: usize, classes: usize, dim: usize) -> Vec<f64> {
    let angle = TAU * k as f64 / classes as f64;
    let mut c = vec![0.0; dim];
    c[0] = ID_RADIUS * angle.cos();
    c[1] = ID_RADIUS * angle.sin();
    c
}

fn noisy_row<R: Rng>(centre: &[f64], rng: &mut R) -> Vec<f64> {
    centre.iter().map(|&c| c + <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng)).collect()
}

fn blob_split<R: Rng>(spec: &SyntheticSpec, per_class: usize, prefix: &str, rng: &mut R) -> Result<(Matrix<f64>, LabelSet)> {
    let n = spec.classes * per_class;
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for k in 0..spec.classes {
        let centre = class_centre(k, spec.classes, spec.input_dim);
        for _ in 0..per_class {
            rows.push(noisy_row(&centre, rng));
            labels.push(k);
        }
    }
    let ids = (0..n).map(|i| format!("{prefix}{i:05}")).collect();
    Ok((Matrix::from_rows(&rows)?, LabelSet::new(ids, labels, spec.classes)?))
}

/// `K` unit-variance Gaussian blobs centred on a radius-6 circle in the
/// first two coordinates (remaining coordinates pure noise), plus an OOD
/// split drawn either around a radius-12 ring or from the same blobs
/// moved by +20 along the first axis.
pub fn gen_synthetic(spec: &SyntheticSpec) -> Result<SyntheticDataset> {
    spec.validate()?;
    let (train_inputs, train_labels) = blob_split(spec, spec.per_class, "tr", &mut stream(spec.seed, "data/train"))?;
    let (test_inputs, test_labels) = blob_split(spec, spec.test_per_class, "te", &mut stream(spec.seed, "data/test"))?;
    let mut rng = stream(spec.seed, "data/ood");
    let mut rows = Vec::with_capacity(spec.ood_count);
    for i in 0..spec.ood_count {
        let mut centre = vec![0.0; spec.input_dim];
        match spec.ood_kind {
            OodKind::Ring => {
                let angle = rng.random::<f64>() * TAU;
                centre[0] = OOD_RING_RADIUS * angle.cos();
                centre[1] = OOD_RING_RADIUS * angle.sin();
            }
            OodKind::Shifted => {
                centre = class_centre(i % spec.classes, spec.classes, spec.input_dim);
                centre[0] += OOD_SHIFT;
            }
        }
        rows.push(noisy_row(&centre, &mut rng));
    }
    Ok(SyntheticDataset {
        spec: spec.clone(),
        train_inputs,
        train_labels,
        test_inputs,
        test_labels,
        ood_inputs: Matrix::from_rows(&rows)?,
        ood_ids: (0..spec.ood_count).map(|i| format!("ood{i:05}")).collect(),
    })
}
