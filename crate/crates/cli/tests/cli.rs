use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const CATEGORIES: usize = 30;
const FEATURES: usize = 8;

fn feature(i: usize) -> String {
    format!("f{i}")
}

fn category(c: usize) -> String {
    format!("cat{c:02}")
}

fn typicality_csv() -> String {
    let mut s = String::from("category,feature,value\n");
    for c in 0..CATEGORIES {
        let raw: Vec<f64> = (0..FEATURES).map(|i| 1.0 + ((c * 7 + i * 3) % 11) as f64).collect();
        let total: f64 = raw.iter().sum();
        for (i, r) in raw.iter().enumerate() {
            s.push_str(&format!("{},{},{}\n", category(c), feature(i), r / total));
        }
    }
    s
}

/// 24 items, 12 per class, each topic paired with a different vehicle.
fn metaphors_csv() -> String {
    let mut s = String::from("id,topic,vehicle,class,familiarity\n");
    for m in 0..24 {
        let class = if m % 2 == 0 { "inherent" } else { "non_inherent" };
        s.push_str(&format!("m{m:02},{},{},{class},{}\n", category(m), category(m + 5), 1 + m % 7));
    }
    s
}

fn human_csv() -> String {
    let mut s = String::from("metaphor_id,feature,count\n");
    for m in 0..24 {
        for i in 0..FEATURES {
            let count = (m * 5 + i * 11) % 7;
            if count > 0 {
                s.push_str(&format!("m{m:02},{},{count}\n", feature(i)));
            }
        }
    }
    s
}

/// `text` with the line starting with `prefix` swapped for `line`.
fn replace_line(text: &str, prefix: &str, line: &str) -> String {
    assert!(text.lines().any(|l| l.starts_with(prefix)), "no line starts with {prefix}");
    text.lines()
        .map(|l| if l.starts_with(prefix) { line } else { l })
        .map(|l| format!("{l}\n"))
        .collect()
}

struct Workspace {
    _tmp: TempDir,
    data: PathBuf,
    out: PathBuf,
}

fn workspace() -> Workspace {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    fs::create_dir_all(&data).unwrap();
    fs::write(data.join("typicality.csv"), typicality_csv()).unwrap();
    fs::write(data.join("metaphors.csv"), metaphors_csv()).unwrap();
    fs::write(data.join("human.csv"), human_csv()).unwrap();
    let out = tmp.path().join("out");
    Workspace { _tmp: tmp, data, out }
}

impl Workspace {
    fn run(&self, args: &[&str]) -> Output {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_metaphor-rsa"));
        cmd.args(args).arg("--data").arg(&self.data).arg("--output-dir").arg(&self.out);
        cmd.output().unwrap()
    }

    fn json(&self, name: &str) -> Value {
        serde_json::from_str(&fs::read_to_string(self.out.join(name)).unwrap()).unwrap()
    }

    fn out_files(&self) -> Vec<String> {
        let Ok(entries) = fs::read_dir(&self.out) else { return Vec::new() };
        let mut names: Vec<String> = entries.map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
        names.sort();
        names
    }
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn assert_envelope(v: &Value) {
    assert!(v["config"].is_object(), "missing config in {v}");
    assert_eq!(v["dataset_sha256"].as_str().unwrap().len(), 64);
}

fn assert_csv_header(path: &Path) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config: {"));
    assert!(lines.next().unwrap().starts_with("# dataset_sha256: "));
}

#[test]
fn validate_clean_dataset() {
    let ws = workspace();
    let o = ws.run(&["validate"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "ok: 30 categories, 8 features, 24 metaphors");
}

#[test]
fn validate_reports_row_sum_violation() {
    let ws = workspace();
    let text = replace_line(&typicality_csv(), "cat00,f0,", "cat00,f0,0.9");
    fs::write(ws.data.join("typicality.csv"), text).unwrap();
    let o = ws.run(&["validate"]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    assert!(stderr(&o).contains("violation:"), "{}", stderr(&o));
    assert!(stderr(&o).contains("cat00"), "{}", stderr(&o));
}

#[test]
fn missing_file_is_io_error() {
    let ws = workspace();
    fs::remove_file(ws.data.join("human.csv")).unwrap();
    let o = ws.run(&["validate"]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(stderr(&o).starts_with("error:"));
}

#[test]
fn usage_error_exits_one() {
    let ws = workspace();
    let o = ws.run(&["eval", "--mode", "slow"]);
    assert_eq!(code(&o), 1);
    let o = ws.run(&["eval", "--k", "0"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn interpret_prints_sorted_distribution() {
    let ws = workspace();
    let o = ws.run(&["interpret", "--topic", "cat00", "--vehicle", "cat05", "--lambda", "3"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), FEATURES + 2);
    let probs: Vec<f64> = lines[..FEATURES]
        .iter()
        .map(|l| l.split_whitespace().nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(probs.windows(2).all(|w| w[0] >= w[1]));
    assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    let first = lines[0].split_whitespace().next().unwrap();
    assert_eq!(lines[FEATURES], format!("top-1: {first}"));
    assert!(lines[FEATURES + 1].starts_with("top-3: "));
    assert!(ws.out_files().is_empty());
}

#[test]
fn interpret_at_zero_lambda_is_topic_row() {
    let ws = workspace();
    let o = ws.run(&["interpret", "--topic", "cat02", "--vehicle", "cat07", "--lambda", "0", "--mode", "fast"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let raw: Vec<f64> = (0..FEATURES).map(|i| 1.0 + ((2 * 7 + i * 3) % 11) as f64).collect();
    let total: f64 = raw.iter().sum();
    for line in stdout(&o).lines().take(FEATURES) {
        let mut parts = line.split_whitespace();
        let i: usize = parts.next().unwrap()[1..].parse().unwrap();
        let p: f64 = parts.next().unwrap().parse().unwrap();
        assert!((p - raw[i] / total).abs() < 1e-11, "{line}");
    }
}

#[test]
fn unknown_noun_suggests_neighbours() {
    let ws = workspace();
    let o = ws.run(&["interpret", "--topic", "cat00", "--vehicle", "cat5"]);
    assert_eq!(code(&o), 1);
    let err = stderr(&o);
    assert!(err.contains("unknown noun 'cat5'"), "{err}");
    assert!(err.contains("did you mean"), "{err}");
    assert!(err.contains("cat05"), "{err}");
}

#[test]
fn train_is_deterministic_and_feeds_eval() {
    let ws = workspace();
    let o = ws.run(&["train", "--seed", "7"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let first = fs::read(ws.out.join("params.json")).unwrap();
    let o = ws.run(&["train", "--seed", "7"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(first, fs::read(ws.out.join("params.json")).unwrap());

    let params = ws.json("params.json");
    assert_envelope(&params);
    assert_eq!(params["split"]["train"].as_array().unwrap().len(), 18);
    assert_eq!(params["split"]["test"].as_array().unwrap().len(), 6);
    assert!(params["lambda"].as_f64().unwrap().is_finite());

    let o = ws.run(&["eval", "--seed", "7", "--lambda", "learned"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = ws.json("report.json");
    assert_envelope(&report);
    assert_eq!(report["lambda"]["source"], "params.json");
    assert_eq!(report["lambda"]["value"], params["lambda"]);
    assert!(report["report"]["aggregates"].is_object());
    assert_csv_header(&ws.out.join("report.csv"));
}

#[test]
fn learned_lambda_requires_matching_params() {
    let ws = workspace();
    let o = ws.run(&["eval", "--lambda", "learned"]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(ws.out_files().is_empty());

    let o = ws.run(&["train"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = ws.run(&["eval", "--lambda", "learned", "--mode", "fast"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("mode"), "{}", stderr(&o));

    let human = replace_line(&human_csv(), "m00,f1,", "m00,f1,6");
    fs::write(ws.data.join("human.csv"), human).unwrap();
    let o = ws.run(&["eval", "--lambda", "learned"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("different dataset"), "{}", stderr(&o));
    assert_eq!(ws.out_files(), vec!["params.json"]);
}

#[test]
fn ablations_write_their_reports() {
    let ws = workspace();
    let o = ws.run(&["ablate", "--kind", "no-relevance", "--lambda", "5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = ws.json("ablation_no-relevance.json");
    assert_envelope(&v);
    assert_eq!(v["kind"], "no-relevance");
    assert!(v["baseline_aggregates"].is_object());

    let o = ws.run(&["ablate", "--kind", "grid-lambda", "--grid", "0.5:50:20"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = ws.json("ablation_grid-lambda.json");
    assert_envelope(&v);
    assert_eq!(v["grid"].as_array().unwrap().len(), 20);
    assert_eq!(v["config"]["grid"]["count"], 20);
    let best = v["best_lambda"].as_f64().unwrap();
    assert!((0.5..=50.0).contains(&best));
}

#[test]
fn corr_writes_both_matrices() {
    let ws = workspace();
    let o = ws.run(&["corr", "--lambda", "5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for name in ["corr_model.csv", "corr_human.csv"] {
        let path = ws.out.join(name);
        assert_csv_header(&path);
        let body = fs::read_to_string(&path).unwrap();
        assert_eq!(body.lines().count(), 2 + 1 + FEATURES);
    }
}

#[test]
fn failed_run_leaves_no_outputs() {
    let ws = workspace();
    let text = metaphors_csv().replace("m03,cat03,cat08", "m03,cat03,cat03");
    fs::write(ws.data.join("metaphors.csv"), text).unwrap();
    for args in [&["eval"][..], &["train"], &["corr"], &["ablate", "--kind", "grid-lambda"]] {
        let o = ws.run(args);
        assert_eq!(code(&o), 1, "{args:?}: {}", stderr(&o));
        assert!(ws.out_files().is_empty(), "{args:?} left {:?}", ws.out_files());
    }
}
