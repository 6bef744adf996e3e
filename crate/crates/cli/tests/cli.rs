//! End-to-end tests driving the compiled `vos` binary.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_vos")
}

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(bin())
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// 1000/50 imbalanced CSV with two correlated features.
fn write_imbalanced_csv(path: &Path) {
    let mut s = String::from("v1,v2,class\n");
    let mut state = 0x9e3779b97f4a7c15u64;
    let mut next = move || {
        // xorshift-style generator; keeps the fixture self-contained.
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut gauss = move || {
        let (u1, u2): (f64, f64) = (next().max(1e-12), next());
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    };
    for i in 0..1050 {
        let minority = i >= 1000;
        let x0 = if minority { 2.0 + 0.9 * gauss() } else { gauss() };
        let x1 = x0 + 0.05 * gauss();
        s.push_str(&format!("{x0:.6},{x1:.6},{}\n", u8::from(minority)));
    }
    std::fs::write(path, s).unwrap();
}

fn quick_fit_args<'a>(data: &'a str, out: &'a str, seed: &'a str) -> Vec<&'a str> {
    vec![
        "fit", "--data", data, "--out", out, "--seed", seed, "--epochs", "5", "--lr", "0.02",
        "--batch", "64", "--arch", "8:3:2",
    ]
}

#[test]
fn fit_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("train.csv");
    write_imbalanced_csv(&csv);

    assert_ok(&run(&quick_fit_args("train.csv", "a.vos", "7"), dir.path()));
    assert_ok(&run(&quick_fit_args("train.csv", "b.vos", "7"), dir.path()));
    let a = std::fs::read(dir.path().join("a.vos")).unwrap();
    let b = std::fs::read(dir.path().join("b.vos")).unwrap();
    assert_eq!(a, b, "same seed must produce byte-identical model files");

    assert_ok(&run(&quick_fit_args("train.csv", "c.vos", "8"), dir.path()));
    let c = std::fs::read(dir.path().join("c.vos")).unwrap();
    assert_ne!(a, c, "different seeds should differ");
}

#[test]
fn generate_emits_requested_rows() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("train.csv");
    write_imbalanced_csv(&csv);
    assert_ok(&run(&quick_fit_args("train.csv", "m.vos", "1"), dir.path()));

    let out = run(
        &[
            "generate", "--model", "m.vos", "--count", "25", "--out", "synth.csv", "--seed", "3",
        ],
        dir.path(),
    );
    assert_ok(&out);
    let text = std::fs::read_to_string(dir.path().join("synth.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "v1,v2,class");
    assert_eq!(text.lines().count(), 26);
    // All rows carry the minority label.
    for line in text.lines().skip(1) {
        assert!(line.ends_with(",1"), "line {line}");
    }
}

#[test]
fn augment_reaches_requested_balance_with_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("train.csv");
    write_imbalanced_csv(&csv);

    let out = run(
        &[
            "augment", "--data", "train.csv", "--ratio", "1.0", "--out", "aug.csv", "--seed",
            "2", "--epochs", "5", "--arch", "8:3:2",
        ],
        dir.path(),
    );
    assert_ok(&out);

    let text = std::fs::read_to_string(dir.path().join("aug.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "v1,v2,class,sample_weight,provenance");
    // 1000 majority + 50 real minority + 950 synthetic -> 1000/1000 final.
    assert_eq!(text.lines().count(), 1 + 2000);
    let synthetic = text.lines().filter(|l| l.ends_with(",synthetic")).count();
    assert_eq!(synthetic, 950);
    let real = text.lines().filter(|l| l.ends_with(",real")).count();
    assert_eq!(real, 1000 + 50);
    // Synthetic rows carry the configured weight.
    assert!(text
        .lines()
        .filter(|l| l.ends_with(",synthetic"))
        .all(|l| l.contains(",0.2,")));
}

#[test]
fn augment_smote_works_without_model() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("train.csv");
    write_imbalanced_csv(&csv);
    let out = run(
        &[
            "augment", "--data", "train.csv", "--method", "smote", "--ratio", "0.5", "--out",
            "smote.csv", "--seed", "5",
        ],
        dir.path(),
    );
    assert_ok(&out);
    let text = std::fs::read_to_string(dir.path().join("smote.csv")).unwrap();
    // ceil(0.5 * 1000) - 50 = 450 synthetic rows.
    let synthetic = text.lines().filter(|l| l.ends_with(",synthetic")).count();
    assert_eq!(synthetic, 450);
}

#[test]
fn benchmark_emits_fixed_schema_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("train.csv");
    write_imbalanced_csv(&csv);

    let args = [
        "benchmark",
        "--data",
        "train.csv",
        "--method",
        "smote",
        "--classifier",
        "lr",
        "--seed",
        "11",
        "--epochs",
        "5",
        "--arch",
        "8:3:2",
        "--out-dir",
        "run1",
    ];
    assert_ok(&run(&args, dir.path()));
    let csv1 = std::fs::read_to_string(dir.path().join("run1/results.csv")).unwrap();
    let jsonl1 = std::fs::read_to_string(dir.path().join("run1/results.jsonl")).unwrap();

    let mut lines = csv1.lines();
    assert_eq!(
        lines.next().unwrap(),
        "method,accuracy,precision,recall,f1,predicted"
    );
    // (1 method + raw baseline) x 1 classifier.
    assert_eq!(csv1.lines().count(), 3);
    assert_eq!(jsonl1.lines().count(), 2);

    let mut args2 = args;
    args2[args.len() - 1] = "run2";
    assert_ok(&run(&args2, dir.path()));
    let csv2 = std::fs::read_to_string(dir.path().join("run2/results.csv")).unwrap();
    assert_eq!(csv1, csv2, "same master seed must reproduce the table");
}

#[test]
fn search_reports_candidates_and_selection() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("train.csv");
    write_imbalanced_csv(&csv);
    let out = run(
        &[
            "search",
            "--data",
            "train.csv",
            "--k-folds",
            "2",
            "--candidate",
            "6:3:2",
            "--candidate",
            "10:4:2",
            "--epochs",
            "3",
            "--seed",
            "4",
            "--out",
            "search.json",
        ],
        dir.path(),
    );
    assert_ok(&out);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("selected:"), "stdout: {stdout}");
    assert_eq!(stdout.matches("candidate ").count(), 2);
    let report = std::fs::read_to_string(dir.path().join("search.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert!(v.get("best_index").is_some());
}

#[test]
fn unknown_flag_exits_2_with_usage() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["fit", "--bogus-flag"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.to_lowercase().contains("usage"), "stderr: {stderr}");
}

#[test]
fn missing_data_fails_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["fit", "--data", "nope.csv"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("error"), "stderr: {stderr}");
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("train.csv");
    write_imbalanced_csv(&csv);
    std::fs::write(
        dir.path().join("run.conf"),
        "data=train.csv\nepochs=5\narch=8:3:2\nseed=9\nout=from_conf.vos\n",
    )
    .unwrap();

    // Everything from the config file.
    assert_ok(&run(&["--config", "run.conf", "fit"], dir.path()));
    assert!(dir.path().join("from_conf.vos").exists());

    // CLI flag overrides the config's out path.
    assert_ok(&run(
        &["--config", "run.conf", "fit", "--out", "cli_wins.vos"],
        dir.path(),
    ));
    assert!(dir.path().join("cli_wins.vos").exists());
}

#[test]
fn augment_round_trips_through_load() {
    // The augmented CSV reloads into the same dataset (kinds, labels,
    // weights, provenance, printed-precision values) via the library loader.
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("train.csv");
    write_imbalanced_csv(&csv);
    assert_ok(&run(
        &[
            "augment", "--data", "train.csv", "--method", "smote", "--out", "aug.csv", "--seed",
            "6",
        ],
        dir.path(),
    ));
    let reloaded = vos_core::data::load_csv(&dir.path().join("aug.csv"), "class").unwrap();
    assert_eq!(reloaded.n_rows(), 2000);
    assert_eq!(reloaded.real_row_count(), 1050);
    let (zeros, ones) = reloaded.class_counts();
    assert_eq!((zeros, ones), (1000, 1000));
    // Weights: 1.0 for real rows, 0.2 for synthetic.
    for i in 0..reloaded.n_rows() {
        let expect = if reloaded.provenance[i] == vos_core::data::Provenance::Real {
            1.0
        } else {
            0.2
        };
        assert_eq!(reloaded.weights[i], expect);
    }
}
