//! Dataset × resample benchmark harness.
//!
//! Each job loads `<name>_TRAIN` / `<name>_TEST`, draws one stratified
//! resample, fits the transform plans once and evaluates every requested
//! variant on the shared features. Jobs run on a bounded worker pool; their
//! results are written by a single writer in (dataset, resample, variant)
//! order so that output files are independent of scheduling.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::data::{load_dataset, stratified_resample, znormalize, LabelPosition};
use crate::pipeline::{fit_from_features, oracle_from_features, FitMode, OracleReport};
use crate::seed::{derive_seed, SeedPart};
use crate::selection::{PerformanceTable, SelectionConfig};
use crate::transform::{transform, transform_with, ComboId, FeatureSet, Plans, Pooling, Representation};
use crate::{Error, Result, TimeSeriesDataset};

/// A method compared by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    /// Full pipeline with the selection module.
    SelfRocket,
    /// Selection bypassed, the given combination used directly.
    Fixed(ComboIndex),
    /// Best combination chosen on the test set (upper bound).
    Oracle,
}

/// [`ComboId`] ordered by enumeration position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ComboIndex(usize);

impl ComboIndex {
    pub fn combo(self) -> ComboId {
        ComboId::all()[self.0]
    }
}

impl From<ComboId> for Variant {
    fn from(c: ComboId) -> Self {
        Variant::Fixed(ComboIndex(c.index()))
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::SelfRocket => f.write_str("selfrocket"),
            Variant::Fixed(c) => write!(f, "{}", c.combo()),
            Variant::Oracle => f.write_str("oracle"),
        }
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "selfrocket" => Ok(Variant::SelfRocket),
            "oracle" => Ok(Variant::Oracle),
            _ => s.parse::<ComboId>().map(Variant::from),
        }
    }
}

/// Parses a comma-separated variant list, keeping the given order and
/// dropping duplicates.
pub fn parse_variants(list: &str) -> Result<Vec<Variant>> {
    let mut out = Vec::new();
    for part in list.split(',').filter(|p| !p.trim().is_empty()) {
        let v: Variant = part.parse()?;
        if !out.contains(&v) {
            out.push(v);
        }
    }
    if out.is_empty() {
        return Err(Error::Config("no benchmark variants given".into()));
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct BenchmarkConfig {
    pub data_dir: PathBuf,
    pub datasets: Vec<String>,
    /// Resample ids `0..resamples`; id 0 is the published split.
    pub resamples: usize,
    pub variants: Vec<Variant>,
    /// Selection hyperparameters; `seed` is replaced per run.
    pub selection: SelectionConfig,
    pub seed: u64,
    /// Worker pool size.
    pub jobs: usize,
    pub znormalize: bool,
    pub num_features: usize,
}

/// One (dataset, resample, variant) measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRow {
    pub dataset: String,
    pub resample: usize,
    pub variant: Variant,
    pub combo: ComboId,
    pub accuracy: f64,
    /// Selection details, SelF-Rocket rows only.
    pub vote: Option<VoteRecord>,
    pub fit_seconds: f64,
    pub predict_seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoteRecord {
    pub voted: ComboId,
    pub consensus: f64,
    pub validated: bool,
}

/// Everything one job produced.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub dataset: String,
    pub resample: usize,
    pub rows: Vec<BenchmarkRow>,
    pub table: Option<PerformanceTable>,
    pub oracle: Option<OracleReport>,
}

#[derive(Debug, Default)]
pub struct BenchmarkReport {
    pub runs: Vec<RunResult>,
    /// `(dataset, message)` for every dataset that failed.
    pub failures: Vec<(String, String)>,
}

impl BenchmarkReport {
    pub fn rows(&self) -> impl Iterator<Item = &BenchmarkRow> {
        self.runs.iter().flat_map(|r| &r.rows)
    }
}

/// Loads `<dir>/<name>_TRAIN.*` and `<dir>/<name>_TEST.*`, test classes aligned to train.
pub fn load_pair(dir: &Path, name: &str, normalize: bool) -> Result<(TimeSeriesDataset, TimeSeriesDataset)> {
    let find = |suffix: &str| -> Result<PathBuf> {
        for ext in ["tsv", "txt", "csv"] {
            let p = dir.join(format!("{name}_{suffix}.{ext}"));
            if p.is_file() {
                return Ok(p);
            }
        }
        Err(Error::io(
            dir.join(format!("{name}_{suffix}.tsv")),
            std::io::Error::new(std::io::ErrorKind::NotFound, "no such file"),
        ))
    };
    let train = load_dataset(&find("TRAIN")?, None, LabelPosition::FirstColumn)?;
    let test = load_dataset(&find("TEST")?, None, LabelPosition::FirstColumn)?.align_classes(train.class_names());
    let mut train = train.align_classes(test.class_names());
    if normalize {
        train = znormalize(&train);
    }
    let test = if normalize { znormalize(&test) } else { test };
    Ok((train, test))
}

/// Seed of one (dataset, resample) run, used for the plans and the voters.
pub fn run_seed(seed: u64, dataset: &str, resample: usize) -> u64 {
    derive_seed(seed, &[SeedPart::Str("run"), SeedPart::Str(dataset), resample.into()])
}

/// Runs every (dataset, resample) job; failing datasets are reported, not fatal.
pub fn run_benchmark(cfg: &BenchmarkConfig) -> Result<BenchmarkReport> {
    if cfg.variants.contains(&Variant::SelfRocket) {
        cfg.selection.validate()?;
    }
    if cfg.resamples == 0 {
        return Err(Error::Config("resamples must be >= 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;

    let mut report = BenchmarkReport::default();
    let mut loaded = Vec::new();
    for name in &cfg.datasets {
        match load_pair(&cfg.data_dir, name, cfg.znormalize) {
            Ok(pair) => loaded.push((name.clone(), pair)),
            Err(e) => report.failures.push((name.clone(), e.to_string())),
        }
    }
    let jobs: Vec<(usize, usize)> =
        (0..loaded.len()).flat_map(|d| (0..cfg.resamples).map(move |r| (d, r))).collect();
    let results: Vec<Result<RunResult>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(d, r)| {
                let (name, (train, test)) = &loaded[d];
                run_one(cfg, name, train, test, r)
            })
            .collect()
    });

    let mut failed: BTreeMap<String, String> = BTreeMap::new();
    for ((d, r), result) in jobs.iter().zip(results) {
        let name = &loaded[*d].0;
        match result {
            Ok(run) => report.runs.push(run),
            Err(e) => {
                failed.entry(name.clone()).or_insert_with(|| format!("resample {r}: {e}"));
            }
        }
    }
    // A dataset counts entirely as failed if any of its runs failed.
    report.runs.retain(|run| !failed.contains_key(&run.dataset));
    report.failures.extend(failed);
    Ok(report)
}

fn run_one(
    cfg: &BenchmarkConfig,
    name: &str,
    train: &TimeSeriesDataset,
    test: &TimeSeriesDataset,
    resample: usize,
) -> Result<RunResult> {
    let (train, test) = stratified_resample(train, test, resample, cfg.seed)?;
    let seed = run_seed(cfg.seed, name, resample);
    let selection = SelectionConfig { seed, ..cfg.selection };

    let start = Instant::now();
    let plans = Plans::fit(&train, cfg.num_features, seed)?;
    let needs_all = cfg.variants.iter().any(|v| matches!(v, Variant::SelfRocket | Variant::Oracle));
    let train_features = if needs_all {
        transform(&train, &plans)?
    } else {
        let fixed: Vec<ComboId> = cfg
            .variants
            .iter()
            .filter_map(|v| if let Variant::Fixed(c) = v { Some(c.combo()) } else { None })
            .collect();
        let reps: Vec<Representation> = Representation::ALL
            .into_iter()
            .filter(|r| fixed.iter().any(|c| c.representations.members().contains(r)))
            .collect();
        let poolings: Vec<Pooling> =
            Pooling::ALL.into_iter().filter(|p| fixed.iter().any(|c| c.pooling == *p)).collect();
        transform_with(&train, &plans, &reps, &poolings)?
    };
    let shared_seconds = start.elapsed().as_secs_f64();

    let mut rows = Vec::new();
    let mut table = None;
    let mut oracle = None;
    for &variant in &cfg.variants {
        match variant {
            Variant::SelfRocket | Variant::Fixed(_) => {
                let mode = match variant {
                    Variant::Fixed(c) => FitMode::Fixed(c.combo()),
                    _ => FitMode::Select,
                };
                let start = Instant::now();
                let model = fit_from_features(&train, plans.clone(), &train_features, &selection, seed, mode)?;
                let fit_seconds = shared_seconds + start.elapsed().as_secs_f64();
                let start = Instant::now();
                let predicted = model.predict(&test)?;
                let predict_seconds = start.elapsed().as_secs_f64();
                let accuracy = crate::ridge::accuracy(test.labels(), &predicted)?;
                let vote = model.selection().map(|s| {
                    table = Some(s.table.clone());
                    VoteRecord { voted: s.voted, consensus: s.consensus, validated: s.validated }
                });
                rows.push(BenchmarkRow {
                    dataset: name.to_string(),
                    resample,
                    variant,
                    combo: model.combo(),
                    accuracy,
                    vote,
                    fit_seconds,
                    predict_seconds,
                });
            }
            Variant::Oracle => {
                let start = Instant::now();
                let test_features: FeatureSet = transform(&test, &plans)?;
                let report = oracle_from_features(&train_features, train.labels(), &test_features, test.labels())?;
                let seconds = shared_seconds + start.elapsed().as_secs_f64();
                rows.push(BenchmarkRow {
                    dataset: name.to_string(),
                    resample,
                    variant,
                    combo: report.best,
                    accuracy: report.best_accuracy,
                    vote: None,
                    fit_seconds: seconds,
                    predict_seconds: 0.0,
                });
                oracle = Some(report);
            }
        }
    }
    Ok(RunResult { dataset: name.to_string(), resample, rows, table, oracle })
}

/// Mean accuracy per (dataset, variant), datasets and variants in first-seen order.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub variants: Vec<String>,
    /// `(dataset, mean accuracy per variant)`; `None` where a variant has no rows.
    pub datasets: Vec<(String, Vec<Option<f64>>)>,
}

/// Builds a [`Summary`] from `(dataset, variant, accuracy)` triples in row order.
pub fn summarize<'a>(rows: impl IntoIterator<Item = (&'a str, &'a str, f64)>) -> Summary {
    let mut variants: Vec<String> = Vec::new();
    let mut datasets: Vec<String> = Vec::new();
    let mut sums: BTreeMap<(usize, usize), (f64, usize)> = BTreeMap::new();
    for (dataset, variant, acc) in rows {
        let d = position_or_push(&mut datasets, dataset);
        let v = position_or_push(&mut variants, variant);
        let e = sums.entry((d, v)).or_insert((0.0, 0));
        e.0 += acc;
        e.1 += 1;
    }
    let datasets = datasets
        .into_iter()
        .enumerate()
        .map(|(d, name)| {
            let means = (0..variants.len()).map(|v| sums.get(&(d, v)).map(|&(s, n)| s / n as f64)).collect();
            (name, means)
        })
        .collect();
    Summary { variants, datasets }
}

fn position_or_push(list: &mut Vec<String>, item: &str) -> usize {
    match list.iter().position(|x| x == item) {
        Some(i) => i,
        None => {
            list.push(item.to_string());
            list.len() - 1
        }
    }
}

impl Summary {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dataset");
        for v in &self.variants {
            out.push(',');
            out.push_str(v);
        }
        out.push('\n');
        for (name, means) in &self.datasets {
            out.push_str(name);
            for m in means {
                out.push(',');
                if let Some(m) = m {
                    out.push_str(&m.to_string());
                }
            }
            out.push('\n');
        }
        out
    }

    /// Pairwise (wins, draws, losses) of variant `a` against `b` over datasets
    /// where both have results, comparing mean accuracies.
    pub fn win_draw_loss(&self, a: usize, b: usize) -> (usize, usize, usize) {
        let mut wdl = (0, 0, 0);
        for (_, means) in &self.datasets {
            if let (Some(x), Some(y)) = (means[a], means[b]) {
                if x > y {
                    wdl.0 += 1;
                } else if x == y {
                    wdl.1 += 1;
                } else {
                    wdl.2 += 1;
                }
            }
        }
        wdl
    }

    pub fn win_draw_loss_csv(&self) -> String {
        let mut out = String::from("variant,opponent,wins,draws,losses\n");
        for a in 0..self.variants.len() {
            for b in 0..self.variants.len() {
                if a != b {
                    let (w, d, l) = self.win_draw_loss(a, b);
                    out.push_str(&format!("{},{},{w},{d},{l}\n", self.variants[a], self.variants[b]));
                }
            }
        }
        out
    }
}

const RESULT_COLUMNS: [&str; 8] =
    ["dataset", "resample", "variant", "combo", "accuracy", "voted", "consensus", "validated"];

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e.to_string()))
}

/// Writes `results.csv`; timing columns are appended when `timings` is set.
pub fn write_results(path: &Path, rows: &[&BenchmarkRow], timings: bool) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut header: Vec<&str> = RESULT_COLUMNS.to_vec();
    if timings {
        header.extend(["fit_seconds", "predict_seconds"]);
    }
    w.write_record(&header).map_err(|e| csv_error(path, e))?;
    for r in rows {
        let (voted, consensus, validated) = match r.vote {
            Some(v) => (v.voted.to_string(), v.consensus.to_string(), v.validated.to_string()),
            None => (String::new(), String::new(), String::new()),
        };
        let mut record = vec![
            r.dataset.clone(),
            r.resample.to_string(),
            r.variant.to_string(),
            r.combo.to_string(),
            r.accuracy.to_string(),
            voted,
            consensus,
            validated,
        ];
        if timings {
            record.push(format!("{:.6}", r.fit_seconds));
            record.push(format!("{:.6}", r.predict_seconds));
        }
        w.write_record(&record).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Recomputes the summary from a `results.csv` written by [`write_results`].
pub fn summary_from_results(path: &Path) -> Result<Summary> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut triples = Vec::new();
    for (row, record) in r.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let acc: f64 = record[4].parse().map_err(|_| Error::Parse {
            row: row + 2,
            col: 4,
            msg: format!("bad accuracy '{}'", &record[4]),
        })?;
        triples.push((record[0].to_string(), record[2].to_string(), acc));
    }
    Ok(summarize(triples.iter().map(|(d, v, a)| (d.as_str(), v.as_str(), *a))))
}

/// Writes all harness outputs into `dir`:
///
/// - `results.csv`: one row per (dataset, resample, variant);
/// - `summary.csv`: mean accuracy per dataset and variant;
/// - `win_draw_loss.csv`: pairwise comparison (two or more variants);
/// - `combo_histogram.csv`: selected-combo counts for the raw vote, the
///   high-consensus runs only, and after validation (SelF-Rocket runs);
/// - `selection_medians.csv` and `selection/<dataset>_r<id>.csv`: voter tables;
/// - `oracle.csv`: every combination's test accuracy (oracle runs).
pub fn write_outputs(report: &BenchmarkReport, dir: &Path, timings: bool) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let rows: Vec<&BenchmarkRow> = report.rows().collect();
    write_results(&dir.join("results.csv"), &rows, timings)?;
    let names: Vec<String> = rows.iter().map(|r| r.variant.to_string()).collect();
    let summary = summarize(rows.iter().zip(&names).map(|(r, v)| (r.dataset.as_str(), v.as_str(), r.accuracy)));
    write_file(&dir.join("summary.csv"), &summary.to_csv())?;
    if summary.variants.len() >= 2 {
        write_file(&dir.join("win_draw_loss.csv"), &summary.win_draw_loss_csv())?;
    }

    let votes: Vec<(&BenchmarkRow, VoteRecord)> = rows.iter().filter_map(|r| r.vote.map(|v| (*r, v))).collect();
    if !votes.is_empty() {
        let mut out = String::from("combo,raw_vote,high_consensus,post_validation\n");
        for c in ComboId::all() {
            let raw = votes.iter().filter(|(_, v)| v.voted == c).count();
            let high = votes.iter().filter(|(_, v)| v.voted == c && v.validated).count();
            let post = votes.iter().filter(|(r, _)| r.combo == c).count();
            out.push_str(&format!("{c},{raw},{high},{post}\n"));
        }
        write_file(&dir.join("combo_histogram.csv"), &out)?;

        let sel_dir = dir.join("selection");
        fs::create_dir_all(&sel_dir).map_err(|e| Error::io(&sel_dir, e))?;
        let mut medians = String::from("dataset,resample,combo,median\n");
        for run in &report.runs {
            if let Some(table) = &run.table {
                write_file(&sel_dir.join(format!("{}_r{}.csv", run.dataset, run.resample)), &table.to_csv())?;
                for (c, m) in table.combos().iter().zip(table.medians()) {
                    medians.push_str(&format!("{},{},{c},{m}\n", run.dataset, run.resample));
                }
            }
        }
        write_file(&dir.join("selection_medians.csv"), &medians)?;
    }

    if report.runs.iter().any(|r| r.oracle.is_some()) {
        let mut out = String::from("dataset,resample,combo,accuracy\n");
        for run in &report.runs {
            if let Some(o) = &run.oracle {
                for (c, a) in o.combos.iter().zip(&o.accuracies) {
                    out.push_str(&format!("{},{},{c},{a}\n", run.dataset, run.resample));
                }
            }
        }
        write_file(&dir.join("oracle.csv"), &out)?;
    }
    Ok(())
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}
