//! The `selfrocket` command-line interface.
//!
//! Exit codes: 0 success; 2 usage, configuration or missing-input errors;
//! 3 shape mismatches and incompatible or corrupt model files; 1 anything else.

use std::ffi::OsString;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::bench::{parse_variants, run_benchmark, write_outputs, BenchmarkConfig};
use crate::data::{load_dataset, make_splits, znormalize, Delimiter, LabelPosition};
use crate::pipeline::{fit_oracle, fit_with_mode, FitMode, FittedModel};
use crate::selection::SelectionConfig;
use crate::transform::{ComboId, DEFAULT_NUM_FEATURES};
use crate::{Error, Result, TimeSeriesDataset};

#[derive(Parser, Debug)]
#[command(name = "selfrocket", version, about = "Random-convolution time series classification with combo selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a model on a labeled training file.
    Fit(FitArgs),
    /// Predict labels (or score accuracy) with a saved model.
    Predict(PredictArgs),
    /// Test-set accuracy of every combination (upper-bound diagnostic).
    Oracle(OracleArgs),
    /// Fit and evaluate over datasets and resamples, writing CSV tables.
    Benchmark(BenchmarkArgs),
    /// Print a model's metadata as JSON.
    Inspect(InspectArgs),
    /// Print the voter train/validation splits of a training file as JSON.
    Splits(SplitsArgs),
}

#[derive(Args, Debug, Clone)]
struct SelectionArgs {
    /// Folds per repeat.
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Repeats of the k-fold split.
    #[arg(long, default_value_t = 10)]
    nr: usize,
    /// Features per mini-classifier.
    #[arg(long, default_value_t = 2500)]
    f: usize,
    /// Instance count above which shuffle splits are used.
    #[arg(long, default_value_t = 500)]
    mds: usize,
    /// Rank window of the vote validation.
    #[arg(long, default_value_t = 5)]
    top: usize,
    /// Consensus threshold of the vote validation.
    #[arg(long, default_value_t = 0.9)]
    thresh: f64,
    /// Combination used when the vote fails validation.
    #[arg(long, default_value = "PPV_MIX")]
    default_combo: String,
}

impl SelectionArgs {
    fn config(&self, seed: u64) -> Result<SelectionConfig> {
        let cfg = SelectionConfig {
            k: self.k,
            nr: self.nr,
            f: self.f,
            mds: self.mds,
            top: self.top,
            thresh: self.thresh,
            default_combo: self.default_combo.parse()?,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args, Debug, Clone)]
struct InputArgs {
    /// Field delimiter: tab, comma or whitespace (detected when omitted).
    #[arg(long)]
    delimiter: Option<Delimiter>,
    /// Z-normalise every series before use.
    #[arg(long)]
    znormalize: bool,
}

impl InputArgs {
    fn load(&self, path: &Path, labels: LabelPosition) -> Result<TimeSeriesDataset> {
        let ds = load_dataset(path, self.delimiter, labels)?;
        Ok(if self.znormalize { znormalize(&ds) } else { ds })
    }
}

#[derive(Args, Debug)]
struct FitArgs {
    /// Training file (label in the first column).
    train: PathBuf,
    /// Output model path.
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Skip selection and use this combination.
    #[arg(long)]
    combo: Option<String>,
    /// Fit report path (default: `<output>.report.json`).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = "SELFROCKET_JOBS")]
    jobs: Option<usize>,
    #[command(flatten)]
    selection: SelectionArgs,
    #[command(flatten)]
    input: InputArgs,
}

#[derive(Args, Debug)]
struct PredictArgs {
    model: PathBuf,
    data: PathBuf,
    /// Print accuracy instead of labels.
    #[arg(long)]
    score: bool,
    /// The data file has no label column.
    #[arg(long)]
    no_labels: bool,
    #[arg(long, env = "SELFROCKET_JOBS")]
    jobs: Option<usize>,
    #[command(flatten)]
    input: InputArgs,
}

#[derive(Args, Debug)]
struct OracleArgs {
    train: PathBuf,
    test: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, env = "SELFROCKET_JOBS")]
    jobs: Option<usize>,
    #[command(flatten)]
    input: InputArgs,
}

#[derive(Args, Debug)]
struct BenchmarkArgs {
    /// Directory holding `<name>_TRAIN.tsv` and `<name>_TEST.tsv` files.
    data_dir: PathBuf,
    /// Comma-separated dataset names.
    #[arg(long, value_delimiter = ',', required = true)]
    datasets: Vec<String>,
    #[arg(long, default_value_t = 30)]
    resamples: usize,
    /// Comma-separated variants: selfrocket, oracle, or any combination name.
    #[arg(long, default_value = "selfrocket")]
    variants: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Concurrent (dataset, resample) jobs.
    #[arg(long, env = "SELFROCKET_JOBS", default_value_t = 1)]
    jobs: usize,
    #[arg(long, default_value = "bench-out")]
    out_dir: PathBuf,
    /// Omit timing columns so outputs are byte-reproducible.
    #[arg(long)]
    no_timings: bool,
    /// Z-normalise every series before use.
    #[arg(long)]
    znormalize: bool,
    #[command(flatten)]
    selection: SelectionArgs,
}

#[derive(Args, Debug)]
struct InspectArgs {
    model: PathBuf,
}

#[derive(Args, Debug)]
struct SplitsArgs {
    train: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    selection: SelectionArgs,
    #[command(flatten)]
    input: InputArgs,
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e.root() {
        Error::Io { source, .. } if source.kind() == io::ErrorKind::NotFound => 2,
        Error::Config(_) => 2,
        Error::Shape(_) | Error::Version { .. } | Error::Integrity(_) => 3,
        _ => 1,
    }
}

fn set_threads(jobs: Option<usize>) {
    if let Some(n) = jobs {
        // Fails only if a pool already exists, in which case it is kept.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Fit(a) => cmd_fit(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Benchmark(a) => cmd_benchmark(a),
        Command::Inspect(a) => cmd_inspect(a),
        Command::Splits(a) => cmd_splits(a),
    }
}

fn write_json(value: &serde_json::Value) -> Result<()> {
    let mut out = io::stdout().lock();
    let text = serde_json::to_string_pretty(value).expect("JSON values always serialise");
    writeln!(out, "{text}").map_err(|e| Error::io("<stdout>", e))
}

fn cmd_fit(a: FitArgs) -> Result<()> {
    set_threads(a.jobs);
    let cfg = a.selection.config(a.seed)?;
    let mode = match &a.combo {
        Some(c) => FitMode::Fixed(c.parse::<ComboId>()?),
        None => FitMode::Select,
    };
    let train = a.input.load(&a.train, LabelPosition::FirstColumn)?;
    let start = Instant::now();
    let model = fit_with_mode(&train, &cfg, a.seed, mode, DEFAULT_NUM_FEATURES)?;
    let fit_seconds = start.elapsed().as_secs_f64();
    model.save(&a.output)?;

    let report_path = a.report.unwrap_or_else(|| with_suffix(&a.output, ".report.json"));
    let mut report = json!({
        "model": a.output,
        "dataset": train.name(),
        "n_train": train.len(),
        "series_length": train.series_length(),
        "combo": model.combo().to_string(),
        "num_features": model.num_features(),
        "alpha": model.ridge().alpha(),
        "seed": a.seed,
        "timings": { "fit_seconds": fit_seconds },
    });
    if let Some(sel) = model.selection() {
        let table_path = with_suffix(&a.output, ".selection.csv");
        std::fs::write(&table_path, sel.table.to_csv()).map_err(|e| Error::io(&table_path, e))?;
        report["voted"] = json!(sel.voted.to_string());
        report["consensus"] = json!(sel.consensus);
        report["validated"] = json!(sel.validated);
        report["selection_table"] = json!(table_path);
    }
    let text = serde_json::to_string_pretty(&report).expect("JSON values always serialise");
    std::fs::write(&report_path, text + "\n").map_err(|e| Error::io(&report_path, e))?;
    eprintln!("fitted {} on {} ({} instances) in {fit_seconds:.2}s", model.combo(), train.name(), train.len());
    Ok(())
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn cmd_predict(a: PredictArgs) -> Result<()> {
    set_threads(a.jobs);
    if a.score && a.no_labels {
        return Err(Error::Config("--score needs a labeled data file; drop --no-labels".into()));
    }
    let model = FittedModel::load(&a.model)?;
    let labels = if a.no_labels { LabelPosition::None } else { LabelPosition::FirstColumn };
    let ds = a.input.load(&a.data, labels)?;
    let mut out = io::stdout().lock();
    let io_err = |e| Error::io("<stdout>", e);
    if a.score {
        writeln!(out, "accuracy: {:.4}", model.score(&ds)?).map_err(io_err)?;
    } else {
        for label in model.predict_labels(&ds)? {
            writeln!(out, "{label}").map_err(io_err)?;
        }
    }
    Ok(())
}

fn cmd_oracle(a: OracleArgs) -> Result<()> {
    set_threads(a.jobs);
    let train = a.input.load(&a.train, LabelPosition::FirstColumn)?;
    let test = a.input.load(&a.test, LabelPosition::FirstColumn)?;
    let report = fit_oracle(&train, &test, a.seed)?;
    let per_combo: serde_json::Map<String, serde_json::Value> =
        report.combos.iter().zip(&report.accuracies).map(|(c, &acc)| (c.to_string(), json!(acc))).collect();
    write_json(&json!({
        "note": "upper bound: combinations are ranked on the test set",
        "best": report.best.to_string(),
        "best_accuracy": report.best_accuracy,
        "accuracies": per_combo,
    }))
}

fn cmd_benchmark(a: BenchmarkArgs) -> Result<()> {
    let cfg = BenchmarkConfig {
        data_dir: a.data_dir,
        datasets: a.datasets,
        resamples: a.resamples,
        variants: parse_variants(&a.variants)?,
        selection: a.selection.config(a.seed)?,
        seed: a.seed,
        jobs: a.jobs,
        znormalize: a.znormalize,
        num_features: DEFAULT_NUM_FEATURES,
    };
    let report = run_benchmark(&cfg)?;
    write_outputs(&report, &a.out_dir, !a.no_timings)?;
    for (dataset, msg) in &report.failures {
        eprintln!("dataset {dataset} failed: {msg}");
    }
    if report.failures.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{} dataset(s) failed", report.failures.len())))
    }
}

fn cmd_inspect(a: InspectArgs) -> Result<()> {
    let model = FittedModel::load(&a.model)?;
    let plan_json = |p: &crate::TransformPlan| {
        json!({
            "dilations": p.dilations(),
            "features_per_dilation": p.features_per_dilation(),
            "num_features": p.num_features(),
        })
    };
    let mut value = json!({
        "combo": model.combo().to_string(),
        "num_features": model.num_features(),
        "series_length": model.series_length(),
        "class_names": model.class_names(),
        "alpha": model.ridge().alpha(),
        "plans": {
            "base": plan_json(&model.plans().base),
            "diff": plan_json(&model.plans().diff),
        },
        "config": model.config(),
        "metadata": model.metadata(),
    });
    if let Some(sel) = model.selection() {
        value["selection"] = json!({
            "voted": sel.voted.to_string(),
            "consensus": sel.consensus,
            "validated": sel.validated,
            "voters": sel.table.n_voters(),
        });
    }
    write_json(&value)
}

fn cmd_splits(a: SplitsArgs) -> Result<()> {
    let cfg = a.selection.config(a.seed)?;
    let train = a.input.load(&a.train, LabelPosition::FirstColumn)?;
    let spec = cfg.split_spec();
    let splits = make_splits(train.labels(), &spec)?;
    write_json(&json!({
        "kind": spec.kind_for(train.len()).to_string(),
        "splits": splits,
    }))
}
