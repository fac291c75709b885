//! `MLPW` binary encoding of network parameters.
//!
//! Layout, little endian: magic `MLPW`, `u32` version, `u32` hidden-layer
//! count, `u8` activation code, then for every dense block (hidden layers,
//! then the head) `u64` outputs, `u64` inputs, `outputs·inputs` row-major
//! `f64` weights and `outputs` `f64` biases.

use std::path::Path;

use super::mlp::{Activation, DenseLayer, MlpParams};
use crate::error::{FormatError, Result};
use crate::numerics::Matrix;
use crate::scoring::LinearHead;

pub const MLP_MAGIC: [u8; 4] = *b"MLPW";
pub const MLP_FORMAT_VERSION: u32 = 1;

fn put_block(out: &mut Vec<u8>, weight: &Matrix<f64>, bias: &[f64]) {
    out.extend_from_slice(&(weight.rows() as u64).to_le_bytes());
    out.extend_from_slice(&(weight.cols() as u64).to_le_bytes());
    for v in weight.as_slice().iter().chain(bias) {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

pub fn encode_mlp(params: &MlpParams) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 8 * params.parameter_count() + 16 * (params.layers().len() + 1));
    out.extend_from_slice(&MLP_MAGIC);
    out.extend_from_slice(&MLP_FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(params.layers().len() as u32).to_le_bytes());
    out.push(params.activation().code());
    for l in params.layers() {
        put_block(&mut out, &l.weight, &l.bias);
    }
    put_block(&mut out, &params.head().weight, &params.head().bias);
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &'static str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or(FormatError::Truncated { what })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self, what: &'static str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self, what: &'static str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().expect("8 bytes")))
    }

    fn block(&mut self) -> Result<(Matrix<f64>, Vec<f64>)> {
        let rows = self.u64("block outputs")? as usize;
        let cols = self.u64("block inputs")? as usize;
        let count = rows.checked_mul(cols).and_then(|c| c.checked_add(rows)).ok_or(FormatError::Truncated { what: "weights" })?;
        let raw = self.take(count.checked_mul(8).ok_or(FormatError::Truncated { what: "weights" })?, "weights")?;
        let values: Vec<f64> = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(FormatError::NonFinite { row: i / cols.max(1), col: i % cols.max(1) }.into());
        }
        let bias = values[rows * cols..].to_vec();
        let weight = Matrix::from_vec(rows, cols, values[..rows * cols].to_vec())?;
        Ok((weight, bias))
    }
}

pub fn decode_mlp(bytes: &[u8]) -> Result<MlpParams> {
    let mut c = Cursor { bytes, pos: 0 };
    let magic = c.take(4, "magic")?;
    if magic != MLP_MAGIC {
        return Err(FormatError::BadMagic {
            expected: String::from_utf8_lossy(&MLP_MAGIC).into_owned(),
            found: String::from_utf8_lossy(magic).into_owned(),
        }
        .into());
    }
    let version = c.u32("version")?;
    if version != MLP_FORMAT_VERSION {
        return Err(FormatError::Version { found: version, expected: MLP_FORMAT_VERSION }.into());
    }
    let count = c.u32("layer count")? as usize;
    let code = c.take(1, "activation")?[0];
    let activation =
        Activation::from_code(code).ok_or_else(|| FormatError::Header(format!("unknown activation code {code}")))?;
    let mut layers = Vec::with_capacity(count.min(1024));
    for _ in 0..count {
        let (w, b) = c.block()?;
        layers.push(DenseLayer::new(w, b)?);
    }
    let (w, b) = c.block()?;
    if c.pos != bytes.len() {
        return Err(FormatError::Header(format!("{} trailing bytes", bytes.len() - c.pos)).into());
    }
    MlpParams::new(layers, activation, LinearHead::new(w, b)?)
}

pub fn write_mlp(params: &MlpParams, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, encode_mlp(params))?;
    Ok(())
}

pub fn read_mlp(path: impl AsRef<Path>) -> Result<MlpParams> {
    decode_mlp(&std::fs::read(path)?)
}
