pub mod barrier;
pub mod esn;
pub mod report;
pub mod sci;
pub mod score;
pub mod select;
pub mod train;

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{AtPath, CliError, CliResult};

/// Pretty JSON with a trailing newline.
pub(crate) fn write_json<T: Serialize>(value: &T, path: &Path) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).at(dir)?;
    }
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Config(format!("cannot serialise {}: {e}", path.display())))?;
    text.push('\n');
    std::fs::write(path, text).at(path)
}

pub(crate) fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).at(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Core {
        path: path.to_owned(),
        source: mcens::FormatError::Header(e.to_string()).into(),
    })
}

/// Runs `f` over `items` in parallel and returns results in input order,
/// failing with the first error by position.
pub(crate) fn par_map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> CliResult<U> + Sync) -> CliResult<Vec<U>> {
    use rayon::prelude::*;
    let results: Vec<CliResult<U>> = items.par_iter().map(&f).collect();
    results.into_iter().collect()
}
