//! End-to-end checks of the `fedfuse` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const TINY: &str = r#"
seed = 3

[dataset]
split = [0.6, 0.2, 0.2]

[dataset.source]
kind = "synthetic"
classes = 3
dim = 4
samples_per_class = 40
cluster_spread = 0.5
label_noise = 0.0

[federation]
num_clients = 3
rounds = 2

[federation.train]
epochs = 1
batch_size = 8
learning_rate = 1e-2
optimizer = { kind = "sgd" }

[[federation.models]]
name = "a"
layer_widths = [4, 6, 3]
activation = "relu"
head_start = 1

[[federation.models]]
name = "b"
layer_widths = [4, 5, 3]
activation = "tanh"
head_start = 1

[fusion]
models = ["a", "b"]

[scaling]
client_counts = [2, 4]
samples_per_client = 10
rounds = 1
"#;

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fedfuse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fedfuse"))
        .args(args)
        .output()
        .expect("run fedfuse")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("exp.toml");
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn masses(name: &str) -> String {
    repo().join("configs/masses").join(name).to_str().unwrap().to_owned()
}

#[test]
fn federate_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let out = dir.path().join("out");
    let o = fedfuse(&["federate", "--config", &cfg, "--out", out.to_str().unwrap(), "--threads", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("fused"));

    for f in ["rounds.csv", "summary.json", "metrics/a.csv", "metrics/b.csv", "metrics/fused.csv", "checkpoints/a.fmw"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["models"].as_array().unwrap().len(), 2);
    assert!(summary["fusion"].is_object());

    let rounds = fs::read_to_string(out.join("rounds.csv")).unwrap();
    let mut lines = rounds.lines();
    assert_eq!(
        lines.next().unwrap(),
        "round,model,client_id,train_loss,eval_loss,eval_accuracy,duration_ms"
    );
    // two initial global rows, then per round 3 clients x 2 models + 2 globals
    assert_eq!(lines.count(), 2 + 2 * (6 + 2));
}

#[test]
fn fusion_disabled_omits_block() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &TINY.replace("[fusion]\n", "[fusion]\nenabled = false\n"));
    let out = dir.path().join("out");
    let o = fedfuse(&["federate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert!(summary.get("fusion").is_none_or(|v| v.is_null()));
    assert!(!out.join("metrics/fused.csv").exists());
}

#[test]
fn missing_dataset_file_fails_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let text = TINY.replace(
        "kind = \"synthetic\"\nclasses = 3\ndim = 4\nsamples_per_class = 40\ncluster_spread = 0.5\nlabel_noise = 0.0\n",
        "kind = \"file\"\npath = \"does_not_exist.csv\"\n",
    );
    assert_ne!(text, TINY);
    let cfg = write_config(dir.path(), &text);
    let out = dir.path().join("out");
    let o = fedfuse(&["federate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("does_not_exist.csv"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn unknown_config_key_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &TINY.replace("rounds = 2", "rounds = 2\nroundz = 3"));
    let o = fedfuse(&["federate", "--config", &cfg]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("roundz"), "{}", stderr(&o));
}

#[test]
fn fuse_zadeh_and_vacuous() {
    let o = fedfuse(&["fuse", &masses("zadeh_a.mass"), &masses("zadeh_b.mass")]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("combined: B=1\n"), "{text}");
    assert!(text.contains("conflict: 0.9999"), "{text}");
    assert!(text.contains("decision: B"), "{text}");

    let with = stdout(&fedfuse(&["fuse", &masses("zadeh_a.mass"), &masses("vacuous.mass")]));
    let alone = stdout(&fedfuse(&["fuse", &masses("zadeh_a.mass")]));
    let combined = |t: &str| t.lines().find(|l| l.starts_with("combined:")).unwrap().to_owned();
    assert_eq!(combined(&with), combined(&alone));
}

#[test]
fn fuse_total_conflict_fails() {
    let o = fedfuse(&["fuse", &masses("certain_a.mass"), &masses("certain_b.mass")]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("total conflict"), "{}", stderr(&o));
}

#[test]
fn fuse_joint_matches_pairwise_decision() {
    let pair = stdout(&fedfuse(&["fuse", &masses("three_models.mass")]));
    let joint = stdout(&fedfuse(&["fuse", "--joint", &masses("three_models.mass")]));
    let decision = |t: &str| t.lines().find(|l| l.starts_with("decision:")).unwrap().to_owned();
    assert_eq!(decision(&pair), decision(&joint));
}

#[test]
fn latency_report_and_missing_link() {
    let pipeline = repo().join("configs/pipeline.toml");
    let o = fedfuse(&["latency", pipeline.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("total_ms         15400.000"), "{}", stdout(&o));

    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(&pipeline).unwrap();
    let cut = text.find("[[link]]\nfrom = \"gw\"").expect("gw link present");
    let broken = dir.path().join("p.toml");
    fs::write(&broken, &text[..cut]).unwrap();
    let o = fedfuse(&["latency", broken.to_str().unwrap()]);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.contains("gw") && err.contains("cloud"), "{err}");
}

#[test]
fn metrics_from_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let preds = repo().join("configs/predictions.csv");
    let o = fedfuse(&["metrics", preds.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "class,tp,fp,fn,tn,precision,recall,f1,specificity,mcc");
    assert!(csv.lines().any(|l| l.starts_with("macro,")));

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "true,predicted\n0,x\n").unwrap();
    assert!(!fedfuse(&["metrics", bad.to_str().unwrap()]).status.success());
}

#[test]
fn scaling_report_schema() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let out = dir.path().join("scale");
    let o = fedfuse(&["scaling", "--config", &cfg, "--out", out.to_str().unwrap(), "--threads", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("scaling.json")).unwrap()).unwrap();
    let rows = report["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["clients"], 2);
    assert_eq!(rows[1]["samples"], 40);
    for key in ["host", "ratio", "threshold", "within_threshold"] {
        assert!(report.get(key).is_some(), "missing {key}");
    }
    assert!(out.join("scaling.csv").is_file());
    assert!(out.join("scaling_rounds.csv").is_file());
}

#[test]
fn config_is_required() {
    let o = fedfuse(&["federate"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("--config"));
}
