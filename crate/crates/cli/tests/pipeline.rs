mod common;

use common::*;

const ALL: [&str; 8] = ["train", "score", "eval", "sci", "barrier", "select", "esn", "report"];

#[test]
fn full_pipeline_produces_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    for cmd in ALL {
        ok(&cfg, &[cmd]);
    }
    let out = dir.path().join("out");

    let models = ["SUPCE_0", "SIMCLR_0", "SUPCON_0"];
    for id in models {
        assert!(out.join(format!("models/{id}.mlpw")).is_file());
    }
    let feats = std::fs::read_dir(out.join("features"))
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "feat"))
        .count();
    assert_eq!(feats, 9, "train, ID test and OOD features per model");

    let eval = read_json(&out.join("eval.json"));
    assert_eq!(eval["models"].as_array().unwrap().len(), 3);
    assert_eq!(eval["ensemble"]["members"].as_array().unwrap().len(), 3);
    assert_valid(&schema_validator(Some("eval")), &eval);

    let sci = read_json(&out.join("sci.json"));
    for p in sci["pairs"].as_array().unwrap() {
        if p["id_a"] == p["id_b"] {
            assert!(p["sci"].as_f64().unwrap() >= 0.99, "self SCI {p}");
        }
    }
    let pairs = std::fs::read_to_string(out.join("sci/sci_pairs.csv")).unwrap();
    assert!(pairs.starts_with("id_a,id_b,sci\n"));
    assert_eq!(pairs.lines().count(), 1 + 6);
    assert!(out.join("sci/coupling/SUPCE_0__SIMCLR_0.csv").is_file());

    let barrier = read_json(&out.join("barrier.json"));
    for p in barrier["pairs"].as_array().unwrap() {
        assert!(p["max_logit_change"].as_f64().unwrap() <= 1e-9);
    }
    let curve = std::fs::read_to_string(out.join("barrier/SUPCE_0__SIMCLR_0.raw.csv")).unwrap();
    assert!(curve.starts_with("alpha,loss\n"));
    assert_eq!(curve.lines().count(), 1 + 5);

    let grid = std::fs::read_to_string(out.join("esn/gap_grid.csv")).unwrap();
    assert!(grid.starts_with("mu,sigma,eps,M,gap,mc_gap,mc_se\n"));
    assert_eq!(read_json(&out.join("esn.json"))["gap_negative"], true);

    let report = read_json(&out.join("report.json"));
    assert_valid(&schema_validator(None), &report);
    for key in ["training", "eval", "sci", "barrier", "selection", "esn"] {
        assert!(report.get(key).is_some(), "report lacks {key}");
    }
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let run = |sub: &str| {
        let out = dir.path().join(sub);
        for cmd in ALL {
            ok(&cfg, &[cmd, "--out", out.to_str().unwrap()]);
        }
        snapshot(&out)
    };
    let a = run("a");
    let b = run("b");
    assert_eq!(a.len(), b.len());
    for ((pa, ba), (pb, bb)) in a.iter().zip(&b) {
        assert_eq!(pa, pb);
        assert!(ba == bb, "{} differs between runs", pa.display());
    }
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let train = |seed: &str, sub: &str| {
        let out = dir.path().join(sub);
        ok(&cfg, &["train", "--seed", seed, "--out", out.to_str().unwrap()]);
        std::fs::read(out.join("models/SUPCE_0.mlpw")).unwrap()
    };
    assert_eq!(train("7", "x"), std::fs::read(dir.path().join("x/models/SUPCE_0.mlpw")).unwrap());
    assert_ne!(train("7", "p"), train("8", "q"));
}

#[test]
fn ensemble_entry_requires_two_members() {
    let dir = tempfile::tempdir().unwrap();
    let one = TINY.replace(r#"ensemble = ["SUPCE_0", "SIMCLR_0", "SUPCON_0"]"#, r#"ensemble = ["SUPCE_0"]"#);
    let cfg = write_config(dir.path(), &one);
    ok(&cfg, &["train"]);
    ok(&cfg, &["eval"]);
    let eval = read_json(&dir.path().join("out/eval.json"));
    assert!(eval.get("ensemble").is_none());
    assert_valid(&schema_validator(Some("eval")), &eval);

    let two = TINY.replace(r#"ensemble = ["SUPCE_0", "SIMCLR_0", "SUPCON_0"]"#, r#"ensemble = ["SUPCE_0", "SUPCON_0"]"#);
    let cfg = write_config(dir.path(), &two);
    ok(&cfg, &["eval"]);
    let eval = read_json(&dir.path().join("out/eval.json"));
    assert_eq!(eval["ensemble"]["members"], serde_json::json!(["SUPCE_0", "SUPCON_0"]));
}

#[test]
fn barrier_of_a_model_with_itself_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    ok(&cfg, &["train"]);
    ok(&cfg, &["barrier", "--pair", "SUPCE_0,SUPCE_0"]);
    let b = read_json(&dir.path().join("out/barrier.json"));
    let pairs = b["pairs"].as_array().unwrap();
    assert_eq!(pairs.len(), 1);
    assert_eq!(pairs[0]["raw_barrier"].as_f64().unwrap(), 0.0);
    assert_eq!(pairs[0]["matched_barrier"].as_f64().unwrap(), 0.0);
}

#[test]
fn select_with_pool_of_size_m_echoes_the_pool() {
    let dir = tempfile::tempdir().unwrap();
    let text = TINY.replace("[selection]\nsize = 2", "[selection]\nsize = 2\npool = [\"SUPCON_0\", \"SIMCLR_0\"]");
    let cfg = write_config(dir.path(), &text);
    ok(&cfg, &["train"]);
    ok(&cfg, &["sci"]);
    ok(&cfg, &["select"]);
    let s = read_json(&dir.path().join("out/selection.json"));
    assert_eq!(s["selection"]["spec"]["member_ids"], serde_json::json!(["SIMCLR_0", "SUPCON_0"]));
    assert_eq!(s["selection"]["subsets_evaluated"], 1);
}
