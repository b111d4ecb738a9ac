use std::path::Path;
use std::process::{Command, Output};

use infocausal_core::infotheory::ic_sum;
use infocausal_core::{Rational, Scalar};
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_infocausal"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON output")
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exit code")
}

#[test]
fn box_examples() {
    let iso = json(&["box", "iso", "1/2"]);
    assert_eq!(iso["chsh"]["value"], "3/4");
    assert_eq!(iso["chsh"]["tier"], "classical");

    let pr = json(&["box", "pr"]);
    assert_eq!(pr["chsh"]["tier"], "superquantum");
    for check in ["nonNegativity", "normalization", "noSignaling"] {
        assert_eq!(pr["validation"][check]["passed"], true);
    }

    let mix = json(&["box", "mix", "pr:17/20", "noise:3/20"]);
    assert_eq!(mix["chsh"]["value"], "37/40");
}

#[test]
fn invalid_box_file_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let mut table = vec!["1/4"; 16];
    table[0] = "1/2";
    table[1] = "0/1";
    let text = serde_json::json!({ "scenario": [2, 2, 2, 2], "table": table }).to_string();
    std::fs::write(&path, text).unwrap();
    let out_path = dir.path().join("out.json");
    let out = run(&["box", "file", path.to_str().unwrap(), "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let written: Value = serde_json::from_slice(&std::fs::read(&out_path).unwrap()).unwrap();
    assert_eq!(written["validation"]["noSignaling"]["passed"], false);
    assert_eq!(written["chsh"], Value::Null);
    assert_eq!(code(&["membership", "file", path.to_str().unwrap()]), 2);
    assert_eq!(code(&["box", "iso", "3/2"]), 2);
}

#[test]
fn membership_reports_certificates() {
    let inside = json(&["membership", "iso", "1/2"]);
    assert_eq!(inside["status"], "feasible");
    let outside = json(&["membership", "iso", "51/100"]);
    assert_eq!(outside["status"], "infeasible");
    assert_eq!(outside["witness"].as_array().unwrap().len(), 16);
}

#[test]
fn ot_over_pr_box() {
    let out = json(&["ot", "--trials", "50", "--seed", "3"]);
    let cases = out["cases"].as_array().unwrap();
    assert_eq!(cases.len(), 8);
    for c in cases {
        assert_eq!(c["exact"], "1/1");
        assert_eq!(c["correct"], 50);
    }
    let single = json(&["ot", "--x0", "1", "--x1", "0", "-k", "1", "--box", "noise", "--trials", "0"]);
    assert_eq!(single["cases"][0]["exact"], "1/2");
    assert_eq!(code(&["ot", "--x0", "1"]), 64);
    assert_eq!(code(&["ot", "--x0", "2", "--x1", "0", "-k", "0"]), 64);
}

#[test]
fn rac_examples() {
    let exact = json(&["rac", "-n", "2", "-E", "4/5", "--trials", "0"]);
    let bits = exact["perBit"].as_array().unwrap();
    assert_eq!(bits.len(), 4);
    assert!(bits.iter().all(|b| b["exact"] == "41/50" && b.get("successes").is_none()));

    let perfect = json(&["rac", "-n", "1", "-E", "1", "--trials", "1000", "--seed", "7"]);
    for b in perfect["perBit"].as_array().unwrap() {
        assert_eq!((b["successes"].as_u64(), b["trials"].as_u64()), (Some(1000), Some(1000)));
    }

    let three = json(&["rac", "-n", "3", "-E", "3/4", "--trials", "0"]);
    assert!((three["icSum"].as_f64().unwrap() - 1.059).abs() < 1e-3);
    assert_eq!(three["violated"], true);
}

#[test]
fn rac_errors_and_transcript() {
    assert_eq!(code(&["rac", "-n", "2"]), 64);
    assert_eq!(code(&["rac", "-n", "30", "-E", "1/2"]), 65);
    assert_eq!(code(&["rac", "-n", "25", "-E", "1/2", "--trials", "1"]), 65);
    assert_eq!(code(&["rac", "-n", "0", "-E", "1/2"]), 65);

    let dir = tempfile::tempdir().unwrap();
    let transcript = dir.path().join("trials.jsonl");
    let out = run(&[
        "rac", "-n", "2", "-E", "1/2", "--trials", "25", "--transcript",
        transcript.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&transcript).unwrap();
    let lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 4 * 25);
    let result: Value = serde_json::from_slice(&out.stdout).unwrap();
    for k in 0..4 {
        let hits = lines
            .iter()
            .filter(|l| l["k"] == k && l["correct"] == true)
            .count() as u64;
        assert_eq!(Some(hits), result["perBit"][k]["successes"].as_u64());
    }
}

#[test]
fn rac_with_per_pair_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pairs.json");
    let boxes: Vec<Value> = ["1/1", "1/2", "1/3"]
        .iter()
        .map(|e| json(&["box", "iso", e])["box"].clone())
        .collect();
    std::fs::write(&path, Value::Array(boxes).to_string()).unwrap();
    let out = json(&["rac", "-n", "2", "--pairs", path.to_str().unwrap()]);
    assert_eq!(out["perBit"][0]["exact"], "3/4");
    assert_eq!(out["perBit"][3]["exact"], "2/3");
    assert_eq!(code(&["rac", "-n", "3", "--pairs", path.to_str().unwrap()]), 65);
}

#[test]
fn sweep_csv_round_trips() {
    let out = run(&["sweep", "--n", "1..5", "-E", "0.70..0.75", "--step", "0.01", "--format", "csv"]);
    assert!(out.status.success());
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    assert_eq!(
        reader.headers().unwrap(),
        vec!["n", "E", "icSum", "logSum2", "violated"]
    );
    let mut rows = 0;
    let mut last = (0u32, Rational::from_ratio(-1, 1));
    for record in reader.records() {
        let r = record.unwrap();
        let n: u32 = r[0].parse().unwrap();
        let e = Rational::parse_text(&r[1]).unwrap();
        assert!((n, e.clone()) > last, "rows out of order");
        last = (n, e.clone());
        let want = ic_sum(n, e.to_f64()).unwrap();
        assert_eq!(r[2].parse::<f64>().unwrap(), want.sum);
        assert_eq!(r[3].parse::<f64>().unwrap(), want.log_sum2);
        assert_eq!(r[4].parse::<bool>().unwrap(), want.violated);
        if n == 3 && e == Rational::from_ratio(3, 4) {
            assert!(want.violated);
        }
        rows += 1;
    }
    assert_eq!(rows, 5 * 6);
}

#[test]
fn sweep_below_the_bound_never_violates() {
    let out = json(&["sweep", "--n", "1..30", "-E", "0.70710"]);
    let rows = out.as_array().unwrap();
    assert_eq!(rows.len(), 30);
    assert!(rows.iter().all(|r| r["violated"] == false));
}

#[test]
fn empty_sweep_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let args = ["sweep", "--n", "1..3", "-E", "0.75..0.70", "--step", "0.01", "--out"];
    let mut full: Vec<&str> = args.to_vec();
    full.push(path.to_str().unwrap());
    assert_eq!(code(&full), 64);
    assert!(!path.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn threshold_examples() {
    let one = json(&["threshold", "--n-max", "1"]);
    assert!((one["threshold"].as_f64().unwrap() - 0.7799443).abs() < 1e-3);
    let twenty = json(&["threshold", "--n-max", "20"]);
    assert!((twenty["threshold"].as_f64().unwrap() - 0.71290).abs() < 1e-4);
    let million = json(&["threshold", "--n-max", "1000000"]);
    assert!((million["threshold"].as_f64().unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-4);
    assert!(million["gapToLimit"].as_f64().unwrap().abs() < 1e-4);
    assert_eq!(code(&["threshold", "--n-max", "0"]), 64);
}

#[test]
fn usage_and_io_errors() {
    assert_eq!(code(&[]), 64);
    assert_eq!(code(&["frobnicate"]), 64);
    assert_eq!(code(&["box", "iso", "x/y"]), 64);
    assert_eq!(code(&["--format", "xml", "box", "pr"]), 64);
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["box", "pr", "--out", "/nonexistent-dir/box.json"]), 74);
    assert_eq!(code(&["box", "file", "/nonexistent-dir/box.json"]), 74);
}

#[test]
fn out_file_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rac.csv");
    let p = path.to_str().unwrap();
    let out = run(&["--seed", "5", "--format", "csv", "--out", p, "rac", "-n", "2", "-E", "1/2", "--trials", "100"]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let data = std::fs::read_to_string(&path).unwrap();
    assert!(data.starts_with("n,k,exact,exactBias,successes,trials,stdErr,icSum,violated\n"));
    assert_eq!(data.lines().count(), 5);
    let manifest_path = format!("{p}.manifest.json");
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(Path::new(&manifest_path)).unwrap()).unwrap();
    assert_eq!(manifest["command"], "rac");
    assert_eq!(manifest["seed"], 5);
    assert_eq!(manifest["parameters"]["command"]["rac"]["trials"], 100);

    // Replaying the recorded arguments reproduces the data bytes.
    let replay_path = dir.path().join("replay.csv");
    let mut args: Vec<String> = manifest["args"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| a.as_str().unwrap().to_owned())
        .collect();
    let at = args.iter().position(|a| a == p).unwrap();
    args[at] = replay_path.to_str().unwrap().to_owned();
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    assert!(run(&refs).status.success());
    assert_eq!(std::fs::read(&replay_path).unwrap(), data.as_bytes());
}

#[test]
fn negative_bias_after_separator() {
    let anti = json(&["box", "--", "iso", "-1/2"]);
    assert_eq!(anti["chsh"]["value"], "1/4");
    let token = json(&["rac", "-n", "1", "--box", "iso=-1/2"]);
    assert_eq!(token["perBit"][0]["exact"], "1/4");
}
