#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

/// A small, fast configuration with every section present.
pub const TINY: &str = r#"
seed = 7
out = "out"

[data]
classes = 3
per_class = 40
test_per_class = 40
ood_count = 60
input_dim = 4
ood_kinds = ["ring"]

[train]
criteria = ["SUPCE", "SIMCLR", "SUPCON"]
seeds = [0]
epochs = 15
batch_size = 32
hidden = [16, 8]
projection_dim = 8
head_epochs = 15
barrier_grid_points = 5

[sinkhorn]
iterations = 2000
anchors = 16

[scoring]
ensemble = ["SUPCE_0", "SIMCLR_0", "SUPCON_0"]

[selection]
size = 2

[esn]
mu = [1.0]
sigma = [1.0]
eps = [-0.5]
members = [1, 4]
draws = 20000
angle_dims = [2, 50]
angle_pairs = 200
"#;

pub fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path
}

pub fn mcens(config: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcens"))
        .args(args)
        .arg("--config")
        .arg(config)
        .output()
        .expect("binary runs")
}

#[track_caller]
pub fn ok(config: &Path, args: &[&str]) -> Output {
    let out = mcens(config, args);
    assert!(
        out.status.success(),
        "mcens {args:?} failed ({:?}): {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Every file under `dir` with its bytes, in path order.
pub fn snapshot(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_owned()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let bytes = std::fs::read(&p).unwrap();
                out.push((p.strip_prefix(dir).unwrap().to_owned(), bytes));
            }
        }
    }
    out.sort();
    out
}

pub fn schema_validator(def: Option<&str>) -> jsonschema::Validator {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/report.schema.json")).unwrap();
    let mut schema: serde_json::Value = serde_json::from_str(&text).unwrap();
    if let Some(def) = def {
        schema["$ref"] = serde_json::Value::from(format!("#/$defs/{def}"));
        let obj = schema.as_object_mut().unwrap();
        for key in ["type", "required", "additionalProperties", "properties"] {
            obj.remove(key);
        }
    }
    jsonschema::validator_for(&schema).expect("schema compiles")
}

#[track_caller]
pub fn assert_valid(validator: &jsonschema::Validator, value: &serde_json::Value) {
    let errors: Vec<String> = validator.iter_errors(value).map(|e| format!("{e} at {}", e.instance_path)).collect();
    assert!(errors.is_empty(), "schema violations: {errors:#?}");
}
