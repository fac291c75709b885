use serde_json::{Map, Value};

use super::{read_json, write_json};
use crate::config::{ModelRef, RunConfig};
use crate::error::{CliError, CliResult};
use crate::layout::Layout;

/// Merges every artifact already produced into `report.json`. Sections
/// whose inputs are absent are left out; at least one must exist.
pub fn run(cfg: &RunConfig) -> CliResult<Value> {
    let layout = Layout::new(&cfg.out);
    let mut out = Map::new();
    out.insert("seed".into(), Value::from(cfg.seed));

    let mut training = Vec::new();
    for m in cfg.models()? {
        let path = layout.train_report(&m.id());
        if path.exists() {
            training.push(read_json::<Value>(&path)?);
        }
    }
    let mut found = !training.is_empty();
    if found {
        out.insert("training".into(), Value::Array(training));
    }
    for (key, path) in [
        ("eval", layout.eval_json()),
        ("sci", layout.sci_json()),
        ("barrier", layout.barrier_json()),
        ("selection", layout.selection_json()),
        ("esn", layout.esn_json()),
    ] {
        if path.exists() {
            out.insert(key.into(), read_json(&path)?);
            found = true;
        }
    }
    if !found {
        return Err(CliError::MissingFile(layout.eval_json()));
    }
    let models: Vec<String> = cfg.models()?.iter().map(ModelRef::id).collect();
    out.insert("models".into(), Value::from(models));
    let report = Value::Object(out);
    write_json(&report, &layout.report_json())?;
    Ok(report)
}
