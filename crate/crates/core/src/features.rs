//! Feature, logit and label sets plus their file formats.
//!
//! Binary matrix files are little-endian:
//!
//! | field        | type                                  |
//! |--------------|---------------------------------------|
//! | magic        | 4 bytes, `FEAT` or `LOGT`             |
//! | version      | u32, currently 1                      |
//! | n            | u64                                   |
//! | dim          | u64                                   |
//! | id block len | u32, byte length of the id block      |
//! | id block     | UTF-8 ids joined by `\n`              |
//! | payload      | n·dim IEEE-754 binary32, row-major    |
//!
//! Values are held as `f64` in memory and narrowed to `f32` on write.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, FormatError, Result};
use crate::numerics::Matrix;

pub const FEATURE_MAGIC: [u8; 4] = *b"FEAT";
pub const LOGIT_MAGIC: [u8; 4] = *b"LOGT";
pub const FORMAT_VERSION: u32 = 1;

/// A batch of per-sample vectors keyed by stable string ids.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    data: Matrix<f64>,
    ids: Vec<String>,
}

impl FeatureSet {
    pub fn new(data: Matrix<f64>, ids: Vec<String>) -> Result<Self> {
        if data.rows() == 0 || data.cols() == 0 {
            return Err(Error::arg(format!("empty feature set ({}x{})", data.rows(), data.cols())));
        }
        if ids.len() != data.rows() {
            return Err(Error::shape(format!("{} ids for {} rows", ids.len(), data.rows())));
        }
        validate_ids(&ids)?;
        if let Some((row, col)) = data.find_non_finite() {
            return Err(FormatError::NonFinite { row, col }.into());
        }
        Ok(Self { data, ids })
    }

    /// Ids `prefix00000`, `prefix00001`, … for generated data.
    pub fn with_sequential_ids(data: Matrix<f64>, prefix: &str) -> Result<Self> {
        let ids = (0..data.rows()).map(|i| format!("{prefix}{i:05}")).collect();
        Self::new(data, ids)
    }

    pub fn n(&self) -> usize {
        self.data.rows()
    }

    pub fn dim(&self) -> usize {
        self.data.cols()
    }

    pub fn data(&self) -> &Matrix<f64> {
        &self.data
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.data.row(i)
    }

    pub fn into_parts(self) -> (Matrix<f64>, Vec<String>) {
        (self.data, self.ids)
    }

    pub fn id_index(&self) -> HashMap<&str, usize> {
        self.ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect()
    }

    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let ids = indices.iter().map(|&i| self.ids[i].clone()).collect();
        Self::new(self.data.select_rows(indices), ids)
    }

    /// Rows in the order of `ids`. Every requested id must be present.
    pub fn reorder(&self, ids: &[String]) -> Result<Self> {
        let index = self.id_index();
        let mut rows = Vec::with_capacity(ids.len());
        let mut missing = Vec::new();
        for id in ids {
            match index.get(id.as_str()) {
                Some(&i) => rows.push(i),
                None => missing.push(id.clone()),
            }
        }
        if !missing.is_empty() {
            return Err(Error::Alignment { missing });
        }
        self.select_rows(&rows)
    }

    /// Reorders `other` to this set's id order; both id sets must coincide.
    pub fn align(&self, other: &FeatureSet) -> Result<FeatureSet> {
        let mine: HashSet<&str> = self.ids.iter().map(String::as_str).collect();
        let mut missing: Vec<String> =
            other.ids.iter().filter(|id| !mine.contains(id.as_str())).cloned().collect();
        let theirs = other.id_index();
        missing.extend(self.ids.iter().filter(|id| !theirs.contains_key(id.as_str())).cloned());
        if !missing.is_empty() {
            missing.sort();
            return Err(Error::Alignment { missing });
        }
        other.reorder(&self.ids)
    }

    /// Same rows sorted by id.
    pub fn sorted_by_id(&self) -> Self {
        let mut order: Vec<usize> = (0..self.n()).collect();
        order.sort_by(|&a, &b| self.ids[a].cmp(&self.ids[b]));
        self.select_rows(&order).expect("permuting a valid set stays valid")
    }

    pub fn map_rows(&self, mut f: impl FnMut(&[f64], &mut [f64])) -> Result<Self> {
        let mut data = self.data.clone();
        for i in 0..self.n() {
            let src = self.data.row(i);
            f(src, data.row_mut(i));
        }
        Self::new(data, self.ids.clone())
    }
}

fn validate_ids(ids: &[String]) -> Result<()> {
    let mut seen = HashSet::with_capacity(ids.len());
    for id in ids {
        if id.is_empty() || id.contains('\n') || id.contains('\r') {
            return Err(FormatError::Ids(format!("id {id:?} is empty or contains a newline")).into());
        }
        if !seen.insert(id.as_str()) {
            return Err(FormatError::Ids(format!("duplicate id {id:?}")).into());
        }
    }
    Ok(())
}

/// Per-sample classifier outputs (`K ≥ 2` columns).
#[derive(Debug, Clone, PartialEq)]
pub struct LogitSet(FeatureSet);

impl LogitSet {
    pub fn new(data: Matrix<f64>, ids: Vec<String>) -> Result<Self> {
        Self::from_features(FeatureSet::new(data, ids)?)
    }

    pub fn from_features(set: FeatureSet) -> Result<Self> {
        if set.dim() < 2 {
            return Err(Error::arg(format!("logits need at least 2 classes, got {}", set.dim())));
        }
        Ok(Self(set))
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    pub fn classes(&self) -> usize {
        self.0.dim()
    }

    pub fn ids(&self) -> &[String] {
        self.0.ids()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.0.row(i)
    }

    pub fn data(&self) -> &Matrix<f64> {
        self.0.data()
    }

    pub fn as_features(&self) -> &FeatureSet {
        &self.0
    }

    pub fn into_features(self) -> FeatureSet {
        self.0
    }
}

/// Class labels for a set of samples.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelSet {
    ids: Vec<String>,
    labels: Vec<usize>,
    classes: usize,
}

impl LabelSet {
    pub fn new(ids: Vec<String>, labels: Vec<usize>, classes: usize) -> Result<Self> {
        if ids.len() != labels.len() {
            return Err(Error::shape(format!("{} ids for {} labels", ids.len(), labels.len())));
        }
        validate_ids(&ids)?;
        if let Some(&bad) = labels.iter().find(|&&l| l >= classes) {
            return Err(Error::arg(format!("label {bad} outside 0..{classes}")));
        }
        Ok(Self { ids, labels, classes })
    }

    /// Class count inferred as `max(label) + 1`.
    pub fn inferred(ids: Vec<String>, labels: Vec<usize>) -> Result<Self> {
        let classes = labels.iter().max().map_or(0, |m| m + 1);
        Self::new(ids, labels, classes)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Labels in the order of `ids`.
    pub fn aligned_to(&self, ids: &[String]) -> Result<Vec<usize>> {
        let index: HashMap<&str, usize> =
            self.ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        let mut missing = Vec::new();
        let out = ids
            .iter()
            .map(|id| match index.get(id.as_str()) {
                Some(&i) => self.labels[i],
                None => {
                    missing.push(id.clone());
                    0
                }
            })
            .collect();
        if missing.is_empty() {
            Ok(out)
        } else {
            Err(Error::Alignment { missing })
        }
    }

    pub fn histogram(&self) -> Vec<usize> {
        let mut h = vec![0; self.classes];
        for &l in &self.labels {
            h[l] += 1;
        }
        h
    }
}

/// Scales each row to unit Euclidean norm.
pub fn l2_normalize(set: &FeatureSet) -> Result<FeatureSet> {
    for (i, row) in set.data().row_iter().enumerate() {
        if row.iter().all(|&x| x == 0.0) {
            return Err(Error::DegenerateSample { id: set.ids()[i].clone() });
        }
    }
    set.map_rows(|src, dst| {
        let norm = src.iter().map(|x| x * x).sum::<f64>().sqrt();
        for (d, &s) in dst.iter_mut().zip(src) {
            *d = s / norm;
        }
    })
}

fn encode(magic: [u8; 4], set: &FeatureSet) -> Result<Vec<u8>> {
    let id_block = set.ids().join("\n");
    let id_len = u32::try_from(id_block.len())
        .map_err(|_| FormatError::Ids("id block exceeds 4 GiB".into()))?;
    let mut out = Vec::with_capacity(28 + id_block.len() + 4 * set.n() * set.dim());
    out.extend_from_slice(&magic);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(set.n() as u64).to_le_bytes());
    out.extend_from_slice(&(set.dim() as u64).to_le_bytes());
    out.extend_from_slice(&id_len.to_le_bytes());
    out.extend_from_slice(id_block.as_bytes());
    for (row, r) in set.data().row_iter().enumerate() {
        for (col, &x) in r.iter().enumerate() {
            let narrow = x as f32;
            if !narrow.is_finite() {
                return Err(FormatError::NonFinite { row, col }.into());
            }
            out.extend_from_slice(&narrow.to_le_bytes());
        }
    }
    Ok(out)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize, what: &'static str) -> Result<&'a [u8], FormatError> {
        let end = self.pos.checked_add(len).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let out = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(out)
            }
            None => Err(FormatError::Truncated { what }),
        }
    }

    fn u32(&mut self, what: &'static str) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &'static str) -> Result<u64, FormatError> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

fn decode(magic: [u8; 4], bytes: &[u8]) -> Result<FeatureSet> {
    let mut cur = Cursor { bytes, pos: 0 };
    let found = cur.take(4, "magic")?;
    if found != magic {
        return Err(FormatError::BadMagic {
            expected: String::from_utf8_lossy(&magic).into_owned(),
            found: String::from_utf8_lossy(found).into_owned(),
        }
        .into());
    }
    let version = cur.u32("version")?;
    if version != FORMAT_VERSION {
        return Err(FormatError::Version { found: version, expected: FORMAT_VERSION }.into());
    }
    let n = cur.u64("row count")? as usize;
    let dim = cur.u64("dimension")? as usize;
    let id_len = cur.u32("id block length")? as usize;
    let id_block = std::str::from_utf8(cur.take(id_len, "id block")?)
        .map_err(|e| FormatError::Ids(format!("id block is not UTF-8: {e}")))?;
    let ids: Vec<String> = if id_len == 0 { Vec::new() } else { id_block.split('\n').map(str::to_owned).collect() };
    if ids.len() != n {
        return Err(FormatError::Ids(format!("{} ids for {n} rows", ids.len())).into());
    }
    let count = n.checked_mul(dim).ok_or(FormatError::Truncated { what: "payload" })?;
    let payload = cur.take(count.checked_mul(4).ok_or(FormatError::Truncated { what: "payload" })?, "payload")?;
    if cur.pos != bytes.len() {
        return Err(FormatError::Header(format!("{} trailing bytes", bytes.len() - cur.pos)).into());
    }
    let mut data = Vec::with_capacity(count);
    for (k, chunk) in payload.chunks_exact(4).enumerate() {
        let x = f32::from_le_bytes(chunk.try_into().unwrap());
        if !x.is_finite() {
            return Err(FormatError::NonFinite { row: k / dim, col: k % dim }.into());
        }
        data.push(x as f64);
    }
    FeatureSet::new(Matrix::from_vec(n, dim, data)?, ids)
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(bytes)?;
    w.flush()?;
    Ok(())
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut buf)?;
    Ok(buf)
}

pub fn encode_features(set: &FeatureSet) -> Result<Vec<u8>> {
    encode(FEATURE_MAGIC, set)
}

pub fn decode_features(bytes: &[u8]) -> Result<FeatureSet> {
    decode(FEATURE_MAGIC, bytes)
}

pub fn write_features(set: &FeatureSet, path: impl AsRef<Path>) -> Result<()> {
    write_bytes(path.as_ref(), &encode_features(set)?)
}

pub fn read_features(path: impl AsRef<Path>) -> Result<FeatureSet> {
    decode_features(&read_bytes(path.as_ref())?)
}

pub fn write_logits(set: &LogitSet, path: impl AsRef<Path>) -> Result<()> {
    write_bytes(path.as_ref(), &encode(LOGIT_MAGIC, set.as_features())?)
}

pub fn read_logits(path: impl AsRef<Path>) -> Result<LogitSet> {
    LogitSet::from_features(decode(LOGIT_MAGIC, &read_bytes(path.as_ref())?)?)
}

/// Parses a CSV whose first column is the sample id and the rest are values.
/// The first line is a header.
pub fn parse_csv_features(reader: impl Read) -> Result<FeatureSet> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(reader);
    let width = rdr
        .headers()
        .map_err(|e| FormatError::Csv { line: 1, message: e.to_string() })?
        .len();
    if width < 2 {
        return Err(FormatError::Csv { line: 1, message: "need an id column and at least one value".into() }.into());
    }
    let mut ids = Vec::new();
    let mut data = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| FormatError::Csv {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != width {
            return Err(FormatError::Csv {
                line,
                message: format!("expected {width} fields, found {}", rec.len()),
            }
            .into());
        }
        ids.push(rec[0].to_owned());
        for cell in rec.iter().skip(1) {
            let x: f64 = cell.trim().parse().map_err(|_| FormatError::Csv {
                line,
                message: format!("non-numeric cell {cell:?}"),
            })?;
            if !x.is_finite() {
                return Err(FormatError::Csv { line, message: format!("non-finite cell {cell:?}") }.into());
            }
            data.push(x);
        }
    }
    let n = ids.len();
    FeatureSet::new(Matrix::from_vec(n, width - 1, data)?, ids)
}

pub fn read_csv_features(path: impl AsRef<Path>) -> Result<FeatureSet> {
    parse_csv_features(BufReader::new(File::open(path)?))
}

/// Writes `id,f0,f1,…` with shortest round-trip decimal formatting.
pub fn write_csv_features(set: &FeatureSet, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let header: Vec<String> = std::iter::once("id".to_owned())
        .chain((0..set.dim()).map(|j| format!("f{j}")))
        .collect();
    writeln!(w, "{}", header.join(","))?;
    for (id, row) in set.ids().iter().zip(set.data().row_iter()) {
        write!(w, "{id}")?;
        for x in row {
            write!(w, ",{x}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_labels(path: impl AsRef<Path>) -> Result<LabelSet> {
    let mut rdr = csv::Reader::from_reader(BufReader::new(File::open(path)?));
    let headers = rdr.headers().map_err(|e| FormatError::Csv { line: 1, message: e.to_string() })?;
    if headers.len() != 2 || &headers[0] != "id" || &headers[1] != "label" {
        return Err(FormatError::Header("label file must start with `id,label`".into()).into());
    }
    let mut ids = Vec::new();
    let mut labels = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| FormatError::Csv {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        ids.push(rec[0].to_owned());
        labels.push(rec[1].trim().parse().map_err(|_| FormatError::Csv {
            line,
            message: format!("label {:?} is not a class index", &rec[1]),
        })?);
    }
    LabelSet::inferred(ids, labels)
}

pub fn write_labels(labels: &LabelSet, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "id,label")?;
    for (id, l) in labels.ids().iter().zip(labels.labels()) {
        writeln!(w, "{id},{l}")?;
    }
    w.flush()?;
    Ok(())
}
