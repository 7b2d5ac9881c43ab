mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use selfrocket::bench::summary_from_results;
use selfrocket::TimeSeriesDataset;

fn selfrocket(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_selfrocket")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Writes `ds` as a UCR-style TSV: class label first, then the values.
fn write_tsv(ds: &TimeSeriesDataset, path: &Path) {
    let mut text = String::new();
    for (i, row) in ds.rows().enumerate() {
        text.push_str(&ds.class_names()[ds.labels()[i]]);
        for v in row {
            text.push_str(&format!("\t{v}"));
        }
        text.push('\n');
    }
    std::fs::write(path, text).unwrap();
}

struct Fixture {
    dir: tempfile::TempDir,
}

impl Fixture {
    /// `Toy_TRAIN.tsv` / `Toy_TEST.tsv` (T = 64) and an unlabeled copy of the test set.
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        write_tsv(&common::sign_pattern_dataset(30, 64, 1), &dir.path().join("Toy_TRAIN.tsv"));
        let test = common::sign_pattern_dataset(20, 64, 2);
        write_tsv(&test, &dir.path().join("Toy_TEST.tsv"));
        let unlabeled: String = test
            .rows()
            .map(|r| r.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("\t") + "\n")
            .collect();
        std::fs::write(dir.path().join("unlabeled.tsv"), unlabeled).unwrap();
        Fixture { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn arg(&self, name: &str) -> String {
        self.path(name).to_str().unwrap().to_string()
    }

    fn fit(&self) -> String {
        let model = self.arg("model.bin");
        let out = selfrocket(&["fit", &self.arg("Toy_TRAIN.tsv"), "-o", &model, "--seed", "42", "--nr", "3"]);
        assert!(out.status.success(), "{}", stderr(&out));
        model
    }
}

#[test]
fn fit_writes_model_report_and_selection_table() {
    let fx = Fixture::new();
    fx.fit();
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(fx.path("model.bin.report.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 42);
    assert!(report["combo"].is_string());
    assert!(report["timings"]["fit_seconds"].as_f64().unwrap() >= 0.0);
    let table = std::fs::read_to_string(fx.path("model.bin.selection.csv")).unwrap();
    assert!(table.starts_with("voter,PPV,GMP,"));
    assert_eq!(table.lines().count(), 1 + 3 * 2);
}

#[test]
fn predict_prints_one_label_per_instance_or_accuracy() {
    let fx = Fixture::new();
    let model = fx.fit();
    let out = selfrocket(&["predict", &model, &fx.arg("Toy_TEST.tsv")]);
    assert!(out.status.success(), "{}", stderr(&out));
    let lines: Vec<String> = stdout(&out).lines().map(str::to_string).collect();
    assert_eq!(lines.len(), 20);
    assert!(lines.iter().all(|l| l == "c0" || l == "c1"));

    let out = selfrocket(&["predict", &model, &fx.arg("unlabeled.tsv"), "--no-labels"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().collect::<Vec<_>>(), lines);

    let out = selfrocket(&["predict", &model, &fx.arg("Toy_TEST.tsv"), "--score"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let value = text.trim().strip_prefix("accuracy: ").expect(&text);
    assert_eq!(value.len(), 6, "{value}");
    assert!((0.0..=1.0).contains(&value.parse::<f64>().unwrap()));
}

#[test]
fn missing_file_exits_2_naming_the_path() {
    let fx = Fixture::new();
    let missing = fx.arg("Nope_TRAIN.tsv");
    let out = selfrocket(&["fit", &missing, "-o", &fx.arg("m.bin")]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains(&missing) && err.to_lowercase().contains("no such file"), "{err}");
    assert!(!fx.path("m.bin").exists());
}

#[test]
fn invalid_k_exits_2_citing_the_bound() {
    let fx = Fixture::new();
    let out = selfrocket(&["fit", &fx.arg("Toy_TRAIN.tsv"), "-o", &fx.arg("m.bin"), "--k", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("k must be >= 2"), "{}", stderr(&out));
    assert!(!fx.path("m.bin").exists());
}

#[test]
fn failed_fit_leaves_no_model_file() {
    let fx = Fixture::new();
    let one_class: String = (0..10).map(|i| format!("a\t{i}\t1\t2\t3\t4\t5\t6\t7\t8\t9\t10\n")).collect();
    std::fs::write(fx.path("One_TRAIN.tsv"), one_class).unwrap();
    let out = selfrocket(&["fit", &fx.arg("One_TRAIN.tsv"), "-o", &fx.arg("m.bin")]);
    assert_ne!(out.status.code(), Some(0));
    assert!(!fx.path("m.bin").exists());
    assert!(std::fs::read_dir(fx.dir.path()).unwrap().all(|e| !e.unwrap().file_name().to_string_lossy().starts_with(".tmp")));
}

#[test]
fn score_without_labels_exits_2() {
    let fx = Fixture::new();
    let model = fx.fit();
    let out = selfrocket(&["predict", &model, &fx.arg("unlabeled.tsv"), "--no-labels", "--score"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn series_length_mismatch_exits_3_with_both_lengths() {
    let fx = Fixture::new();
    let model = fx.fit();
    write_tsv(&common::sign_pattern_dataset(6, 48, 3), &fx.path("short.tsv"));
    let out = selfrocket(&["predict", &model, &fx.arg("short.tsv")]);
    assert_eq!(out.status.code(), Some(3));
    let err = stderr(&out);
    assert!(err.contains("64") && err.contains("48"), "{err}");
}

#[test]
fn inspect_is_read_only_and_reports_the_combo() {
    let fx = Fixture::new();
    let model = fx.fit();
    let before = std::fs::read(&model).unwrap();
    let out = selfrocket(&["inspect", &model]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(std::fs::read(&model).unwrap(), before);

    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let combo = value["combo"].as_str().unwrap();
    assert!(selfrocket::ComboId::all().iter().any(|c| c.to_string() == combo), "{combo}");
    assert!([9_996, 19_992].contains(&value["num_features"].as_u64().unwrap()));
    assert!(value["plans"]["base"]["dilations"].is_array());
    assert!(value["alpha"].as_f64().unwrap() > 0.0);
}

#[test]
fn inspect_rejects_corrupt_files_with_exit_3() {
    let fx = Fixture::new();
    let model = fx.fit();
    let mut bytes = std::fs::read(&model).unwrap();
    bytes.truncate(bytes.len() / 2);
    std::fs::write(fx.path("broken.bin"), bytes).unwrap();
    let out = selfrocket(&["inspect", &fx.arg("broken.bin")]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn splits_reports_the_schedule() {
    let fx = Fixture::new();
    let out = selfrocket(&["splits", &fx.arg("Toy_TRAIN.tsv"), "--nr", "2"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(value["splits"].as_array().unwrap().len(), 4);
}

#[test]
fn oracle_lists_all_fifteen_accuracies() {
    let fx = Fixture::new();
    let out = selfrocket(&["oracle", &fx.arg("Toy_TRAIN.tsv"), &fx.arg("Toy_TEST.tsv"), "--seed", "1"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(value["accuracies"].as_object().unwrap().len(), 15);
}

#[test]
fn benchmark_outputs_round_trip_through_the_summary() {
    let fx = Fixture::new();
    let out_dir = fx.arg("bench");
    let out = selfrocket(&[
        "benchmark",
        fx.dir.path().to_str().unwrap(),
        "--datasets",
        "Toy",
        "--resamples",
        "2",
        "--variants",
        "PPV,PPV_MIX,selfrocket,oracle",
        "--nr",
        "2",
        "--out-dir",
        &out_dir,
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let dir = PathBuf::from(&out_dir);

    let results = std::fs::read_to_string(dir.join("results.csv")).unwrap();
    assert!(results.starts_with("dataset,resample,variant,combo,accuracy,voted,consensus,validated,fit_seconds,predict_seconds"));
    assert_eq!(results.lines().count(), 1 + 2 * 4);

    let summary = std::fs::read_to_string(dir.join("summary.csv")).unwrap();
    assert_eq!(summary_from_results(&dir.join("results.csv")).unwrap().to_csv(), summary);
    assert_eq!(summary.lines().next().unwrap(), "dataset,PPV,PPV_MIX,selfrocket,oracle");

    let wdl = std::fs::read_to_string(dir.join("win_draw_loss.csv")).unwrap();
    assert_eq!(wdl.lines().count(), 1 + 4 * 3);
    for file in ["combo_histogram.csv", "selection_medians.csv", "oracle.csv", "selection/Toy_r0.csv"] {
        assert!(dir.join(file).is_file(), "{file}");
    }
}

#[test]
fn benchmark_with_a_missing_dataset_fails_but_keeps_the_rest() {
    let fx = Fixture::new();
    let out_dir = fx.arg("bench");
    let out = selfrocket(&[
        "benchmark",
        fx.dir.path().to_str().unwrap(),
        "--datasets",
        "Toy,Absent",
        "--resamples",
        "1",
        "--variants",
        "PPV",
        "--out-dir",
        &out_dir,
    ]);
    assert_ne!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("Absent"), "{}", stderr(&out));
    let results = std::fs::read_to_string(PathBuf::from(&out_dir).join("results.csv")).unwrap();
    assert_eq!(results.lines().count(), 2);
}
