//! Dataset ingestion, normalisation, resampling and split generation.
//!
//! Datasets follow the UCR archive convention: one instance per row, the class
//! label in the first field and the series values in the remaining fields.
//! Tab, comma and whitespace delimiters are recognised.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::seed::{rng_for, SeedPart};
use crate::{Error, Result};

/// Denominator floor applied when z-normalising a constant series.
pub const ZNORM_EPS: f64 = 1e-8;

/// Labeled, fixed-length univariate series stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesDataset {
    name: String,
    values: Vec<f64>,
    n_instances: usize,
    length: usize,
    labels: Vec<usize>,
    class_names: Vec<String>,
}

impl TimeSeriesDataset {
    /// Builds a dataset from row-major `values`, validating every invariant.
    pub fn new(
        name: impl Into<String>,
        values: Vec<f64>,
        length: usize,
        labels: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let name = name.into();
        if labels.is_empty() {
            return Err(Error::EmptyInput(format!("dataset '{name}' has no instances")));
        }
        if length < 2 {
            return Err(Error::Shape(format!("series length must be at least 2, got {length}")));
        }
        let n = labels.len();
        if values.len() != n * length {
            return Err(Error::Shape(format!(
                "expected {n} x {length} = {} values, got {}",
                n * length,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parse {
                row: pos / length,
                col: pos % length + 1,
                msg: "non-finite value".into(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(Error::InvalidInput(format!(
                "label id {bad} out of range for {} classes",
                class_names.len()
            )));
        }
        Ok(Self { name, values, n_instances: n, length, labels, class_names })
    }

    /// Builds an unlabeled dataset: every instance gets label 0 of a single
    /// placeholder class. Used for prediction-only inputs.
    pub fn unlabeled(name: impl Into<String>, values: Vec<f64>, length: usize) -> Result<Self> {
        let n = values.len().checked_div(length).unwrap_or(0);
        Self::new(name, values, length, vec![0; n], vec![String::new()])
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.n_instances
    }

    pub fn is_empty(&self) -> bool {
        self.n_instances == 0
    }

    /// Series length T.
    pub fn series_length(&self) -> usize {
        self.length
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.length..(i + 1) * self.length]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.length)
    }

    /// Instance count per class id.
    pub fn class_counts(&self) -> Vec<usize> {
        class_counts(&self.labels, self.n_classes())
    }

    /// New dataset holding the given instances, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        let mut values = Vec::with_capacity(indices.len() * self.length);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        Self {
            name: self.name.clone(),
            values,
            n_instances: indices.len(),
            length: self.length,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            class_names: self.class_names.clone(),
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Re-expresses labels against `class_names`, appending any class names
    /// not already present. Used to align a test file with its training file.
    pub fn align_classes(&self, class_names: &[String]) -> Self {
        let mut names = class_names.to_vec();
        let index: HashMap<&str, usize> =
            class_names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let mut remap = Vec::with_capacity(self.class_names.len());
        for name in &self.class_names {
            let id = match index.get(name.as_str()) {
                Some(&id) => id,
                None => {
                    names.push(name.clone());
                    names.len() - 1
                }
            };
            remap.push(id);
        }
        Self {
            name: self.name.clone(),
            values: self.values.clone(),
            n_instances: self.n_instances,
            length: self.length,
            labels: self.labels.iter().map(|&l| remap[l]).collect(),
            class_names: names,
        }
    }
}

pub(crate) fn class_counts(labels: &[usize], n_classes: usize) -> Vec<usize> {
    let mut counts = vec![0usize; n_classes];
    for &l in labels {
        counts[l] += 1;
    }
    counts
}

/// Field separator of a dataset file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Delimiter {
    Tab,
    Comma,
    /// Runs of spaces or tabs (the older UCR `.txt` distribution).
    Whitespace,
}

impl Delimiter {
    /// Picks the delimiter from the first non-empty line.
    pub fn detect(line: &str) -> Self {
        if line.contains('\t') {
            Delimiter::Tab
        } else if line.contains(',') {
            Delimiter::Comma
        } else {
            Delimiter::Whitespace
        }
    }

    fn split<'a>(self, line: &'a str) -> Box<dyn Iterator<Item = &'a str> + 'a> {
        match self {
            Delimiter::Tab => Box::new(line.split('\t')),
            Delimiter::Comma => Box::new(line.split(',')),
            Delimiter::Whitespace => Box::new(line.split_whitespace()),
        }
    }
}

impl std::str::FromStr for Delimiter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tab" | "\\t" | "\t" => Ok(Delimiter::Tab),
            "comma" | "," => Ok(Delimiter::Comma),
            "whitespace" | "space" | " " => Ok(Delimiter::Whitespace),
            other => Err(Error::Config(format!(
                "unknown delimiter '{other}' (expected tab, comma or whitespace)"
            ))),
        }
    }
}

/// Where the class label sits in each row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelPosition {
    #[default]
    FirstColumn,
    /// No label column; every field is a series value.
    None,
}

/// Reads a UCR-style delimited dataset. The dataset name is the file stem
/// with any `_TRAIN`/`_TEST` suffix removed.
pub fn load_dataset(
    path: &Path,
    delimiter: Option<Delimiter>,
    labels: LabelPosition,
) -> Result<TimeSeriesDataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("dataset");
    let name = stem.trim_end_matches("_TRAIN").trim_end_matches("_TEST");
    parse_dataset(&text, name, delimiter, labels)
}

/// Parses dataset text; see [`load_dataset`].
pub fn parse_dataset(
    text: &str,
    name: &str,
    delimiter: Option<Delimiter>,
    label_position: LabelPosition,
) -> Result<TimeSeriesDataset> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty())
        .collect();
    let Some(&(_, first)) = lines.first() else {
        return Err(Error::EmptyInput(format!("dataset '{name}' contains no rows")));
    };
    let delimiter = delimiter.unwrap_or_else(|| Delimiter::detect(first));
    let labeled = label_position == LabelPosition::FirstColumn;
    let min_fields = if labeled { 3 } else { 2 };

    let mut width = None;
    let mut values = Vec::new();
    let mut label_ids = Vec::with_capacity(lines.len());
    let mut class_names: Vec<String> = Vec::new();
    let mut class_index: HashMap<String, usize> = HashMap::new();

    for &(row, line) in &lines {
        let fields: Vec<&str> = delimiter.split(line.trim()).map(str::trim).collect();
        match width {
            None => {
                if fields.len() < min_fields {
                    return Err(Error::Format {
                        row,
                        msg: format!("expected at least {min_fields} fields, found {}", fields.len()),
                    });
                }
                width = Some(fields.len());
            }
            Some(w) if w != fields.len() => {
                return Err(Error::Format {
                    row,
                    msg: format!("row has {} fields, previous rows have {w}", fields.len()),
                });
            }
            Some(_) => {}
        }
        let series_fields = if labeled {
            let label = fields[0];
            if label.is_empty() {
                return Err(Error::Parse { row, col: 0, msg: "empty label".into() });
            }
            let next = class_names.len();
            let id = *class_index.entry(label.to_string()).or_insert_with(|| {
                class_names.push(label.to_string());
                next
            });
            label_ids.push(id);
            &fields[1..]
        } else {
            label_ids.push(0);
            &fields[..]
        };
        let offset = usize::from(labeled);
        for (j, field) in series_fields.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                row,
                col: j + offset,
                msg: format!("cannot parse '{field}' as a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse { row, col: j + offset, msg: format!("non-finite value '{field}'") });
            }
            values.push(v);
        }
    }
    if !labeled {
        class_names.push(String::new());
    }
    let length = width.unwrap_or(0) - usize::from(labeled);
    TimeSeriesDataset::new(name, values, length, label_ids, class_names)
}

/// Z-normalises every series to mean 0 and population standard deviation 1.
/// Constant series map to all zeros.
pub fn znormalize(ds: &TimeSeriesDataset) -> TimeSeriesDataset {
    let mut out = ds.clone();
    let t = ds.length as f64;
    for row in out.values.chunks_exact_mut(ds.length) {
        let mean = row.iter().sum::<f64>() / t;
        let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / t;
        let sd = var.sqrt().max(ZNORM_EPS);
        for v in row.iter_mut() {
            *v = (*v - mean) / sd;
        }
    }
    out
}

/// Re-partitions the pooled train and test instances into a new train/test
/// pair of the original sizes, preserving per-class train counts.
///
/// Resample 0 is the original split. Other resamples draw from an RNG stream
/// derived from `(seed, dataset name, resample_id)`.
pub fn stratified_resample(
    train: &TimeSeriesDataset,
    test: &TimeSeriesDataset,
    resample_id: usize,
    seed: u64,
) -> Result<(TimeSeriesDataset, TimeSeriesDataset)> {
    if train.length != test.length {
        return Err(Error::Shape(format!(
            "train series length {} differs from test series length {}",
            train.length, test.length
        )));
    }
    if train.class_names != test.class_names {
        return Err(Error::InvalidInput("train and test class names differ; align them first".into()));
    }
    if resample_id == 0 {
        return Ok((train.clone(), test.clone()));
    }

    let n_train = train.len();
    let pooled_labels: Vec<usize> = train.labels.iter().chain(&test.labels).copied().collect();
    let quotas = train.class_counts();
    let mut by_class = vec![Vec::new(); train.n_classes()];
    for (i, &l) in pooled_labels.iter().enumerate() {
        by_class[l].push(i);
    }

    let mut rng = rng_for(seed, &[SeedPart::Str("resample"), SeedPart::Str(&train.name), resample_id.into()]);
    let mut new_train = Vec::with_capacity(n_train);
    let mut new_test = Vec::with_capacity(pooled_labels.len() - n_train);
    for (class, members) in by_class.iter_mut().enumerate() {
        if members.len() < quotas[class] {
            return Err(Error::Stratification(format!(
                "class '{}' has {} instances but its train quota is {}",
                train.class_names[class],
                members.len(),
                quotas[class]
            )));
        }
        members.shuffle(&mut rng);
        new_train.extend_from_slice(&members[..quotas[class]]);
        new_test.extend_from_slice(&members[quotas[class]..]);
    }
    new_train.sort_unstable();
    new_test.sort_unstable();

    let pooled = pooled(train, test);
    Ok((pooled.subset(&new_train), pooled.subset(&new_test)))
}

fn pooled(train: &TimeSeriesDataset, test: &TimeSeriesDataset) -> TimeSeriesDataset {
    let mut values = train.values.clone();
    values.extend_from_slice(&test.values);
    let mut labels = train.labels.clone();
    labels.extend_from_slice(&test.labels);
    TimeSeriesDataset {
        name: train.name.clone(),
        values,
        n_instances: labels.len(),
        length: train.length,
        labels,
        class_names: train.class_names.clone(),
    }
}

/// Which splitter [`make_splits`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitKind {
    RepeatedStratifiedKFold,
    StratifiedShuffle,
}

impl fmt::Display for SplitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SplitKind::RepeatedStratifiedKFold => "repeated_stratified_kfold",
            SplitKind::StratifiedShuffle => "stratified_shuffle",
        })
    }
}

/// Parameters of the voter split generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    /// Fold count.
    pub k: usize,
    /// Number of repeats (k-fold) or multiplier of the shuffle split count.
    pub nr: usize,
    /// Datasets larger than this use shuffle splits of `mds / 2` per side.
    pub mds: usize,
    pub seed: u64,
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::Config(format!("k must be >= 2, got {}", self.k)));
        }
        if self.nr < 1 {
            return Err(Error::Config(format!("nr must be >= 1, got {}", self.nr)));
        }
        if self.mds < 2 * self.k {
            return Err(Error::Config(format!("mds must be >= 2*k = {}, got {}", 2 * self.k, self.mds)));
        }
        Ok(())
    }

    pub fn kind_for(&self, n: usize) -> SplitKind {
        if n <= self.mds {
            SplitKind::RepeatedStratifiedKFold
        } else {
            SplitKind::StratifiedShuffle
        }
    }
}

/// One train/validation partition of instance indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
}

/// Generates `k * nr` stratified train/validation splits of `labels`.
///
/// Up to `mds` instances, this is `nr` independently shuffled stratified
/// k-fold partitions (fold-major within each repeat). Beyond that, it is
/// `k * nr` stratified shuffle splits with `mds / 2` instances on each side.
pub fn make_splits(labels: &[usize], spec: &SplitSpec) -> Result<Vec<Split>> {
    spec.validate()?;
    let n = labels.len();
    if n == 0 {
        return Err(Error::EmptyInput("no labels to split".into()));
    }
    let n_classes = labels.iter().max().map_or(0, |&m| m + 1);
    let counts = class_counts(labels, n_classes);
    let mut by_class = vec![Vec::new(); n_classes];
    for (i, &l) in labels.iter().enumerate() {
        by_class[l].push(i);
    }

    match spec.kind_for(n) {
        SplitKind::RepeatedStratifiedKFold => {
            if let Some((class, &c)) = counts.iter().enumerate().find(|&(_, &c)| c > 0 && c < spec.k) {
                return Err(Error::Stratification(format!(
                    "class {class} has {c} instances, fewer than k = {}",
                    spec.k
                )));
            }
            let allocation = kfold_allocation(&counts, spec.k);
            let mut splits = Vec::with_capacity(spec.k * spec.nr);
            for repeat in 0..spec.nr {
                let mut rng = rng_for(spec.seed, &[SeedPart::Str("kfold"), repeat.into()]);
                let mut fold_of = vec![0usize; n];
                for (class, members) in by_class.iter().enumerate() {
                    let mut shuffled = members.clone();
                    shuffled.shuffle(&mut rng);
                    let mut it = shuffled.into_iter();
                    for (fold, per_class) in allocation.iter().enumerate() {
                        for idx in it.by_ref().take(per_class[class]) {
                            fold_of[idx] = fold;
                        }
                    }
                }
                for fold in 0..spec.k {
                    let (validation, train): (Vec<usize>, Vec<usize>) =
                        (0..n).partition(|&i| fold_of[i] == fold);
                    splits.push(Split { train, validation });
                }
            }
            Ok(splits)
        }
        SplitKind::StratifiedShuffle => {
            if let Some((class, &c)) = counts.iter().enumerate().find(|&(_, &c)| c > 0 && c < 2) {
                return Err(Error::Stratification(format!(
                    "class {class} has {c} instance, stratified shuffle splits need at least 2"
                )));
            }
            let half = spec.mds / 2;
            let train_alloc = proportional_allocation(half, &counts, &counts);
            let remaining: Vec<usize> = counts.iter().zip(&train_alloc).map(|(c, t)| c - t).collect();
            let val_alloc = proportional_allocation(half, &counts, &remaining);
            let mut splits = Vec::with_capacity(spec.k * spec.nr);
            for s in 0..spec.k * spec.nr {
                let mut rng = rng_for(spec.seed, &[SeedPart::Str("shuffle"), s.into()]);
                let mut train = Vec::with_capacity(half);
                let mut validation = Vec::with_capacity(half);
                for (class, members) in by_class.iter().enumerate() {
                    let mut shuffled = members.clone();
                    shuffled.shuffle(&mut rng);
                    train.extend_from_slice(&shuffled[..train_alloc[class]]);
                    validation
                        .extend_from_slice(&shuffled[train_alloc[class]..train_alloc[class] + val_alloc[class]]);
                }
                train.sort_unstable();
                validation.sort_unstable();
                splits.push(Split { train, validation });
            }
            Ok(splits)
        }
    }
}

/// Per-fold, per-class validation counts: instances sorted by class are dealt
/// to folds round-robin, so fold sizes differ by at most one overall and each
/// class is spread evenly.
fn kfold_allocation(counts: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut alloc = vec![vec![0usize; counts.len()]; k];
    let mut pos = 0usize;
    for (class, &c) in counts.iter().enumerate() {
        for _ in 0..c {
            alloc[pos % k][class] += 1;
            pos += 1;
        }
    }
    alloc
}

/// Largest-remainder allocation of `total` draws proportional to `weights`,
/// never exceeding `caps`. Remainder ties go to the lower class id.
fn proportional_allocation(total: usize, weights: &[usize], caps: &[usize]) -> Vec<usize> {
    let wsum: usize = weights.iter().sum();
    let total = total.min(caps.iter().sum());
    let mut alloc: Vec<usize> = weights
        .iter()
        .zip(caps)
        .map(|(&w, &cap)| ((total * w) / wsum).min(cap))
        .collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    // Sort by fractional part descending, exact integer arithmetic.
    order.sort_by(|&a, &b| {
        let ra = (total * weights[a]) % wsum;
        let rb = (total * weights[b]) % wsum;
        rb.cmp(&ra).then(a.cmp(&b))
    });
    let mut assigned: usize = alloc.iter().sum();
    while assigned < total {
        let before = assigned;
        for &c in &order {
            if assigned == total {
                break;
            }
            if alloc[c] < caps[c] {
                alloc[c] += 1;
                assigned += 1;
            }
        }
        if assigned == before {
            break;
        }
    }
    alloc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(rows: &[(&str, &[f64])]) -> TimeSeriesDataset {
        let text: String = rows
            .iter()
            .map(|(l, v)| {
                let vals: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                format!("{l}\t{}\n", vals.join("\t"))
            })
            .collect();
        parse_dataset(&text, "toy", None, LabelPosition::FirstColumn).unwrap()
    }

    #[test]
    fn minimal_tab_file_parses() {
        let d = parse_dataset("1\t0.0\t1.0\n2\t1.0\t0.0\n", "toy", None, LabelPosition::FirstColumn).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.series_length(), 2);
        assert_eq!(d.n_classes(), 2);
        assert_eq!(d.row(1), &[1.0, 0.0]);
    }

    #[test]
    fn labels_follow_first_appearance() {
        let d = parse_dataset("b,1,2\na,3,4\nb,5,6\n", "toy", None, LabelPosition::FirstColumn).unwrap();
        assert_eq!(d.class_names(), &["b".to_string(), "a".to_string()]);
        assert_eq!(d.labels(), &[0, 1, 0]);
    }

    #[test]
    fn crlf_and_whitespace_formats() {
        let d = parse_dataset("1,0.5,1\r\n2,1,0\r\n", "toy", None, LabelPosition::FirstColumn).unwrap();
        assert_eq!(d.row(0), &[0.5, 1.0]);
        let d = parse_dataset("  1.0000e+00  0.5  1\n 2.0 1 0\n", "toy", None, LabelPosition::FirstColumn).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.class_names()[0], "1.0000e+00");
    }

    #[test]
    fn ragged_rows_name_the_row() {
        let err = parse_dataset("1\t0\t1\n2\t1\n", "toy", None, LabelPosition::FirstColumn).unwrap_err();
        assert!(matches!(err, Error::Format { row: 2, .. }), "{err}");
    }

    #[test]
    fn non_finite_values_are_rejected() {
        let err = parse_dataset("1\t0\tNaN\n", "toy", None, LabelPosition::FirstColumn).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 1, col: 2, .. }), "{err}");
        let err = parse_dataset("1\t0\tabc\n", "toy", None, LabelPosition::FirstColumn).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 1, col: 2, .. }), "{err}");
    }

    #[test]
    fn empty_file_is_an_error() {
        let err = parse_dataset("\n\n", "toy", None, LabelPosition::FirstColumn).unwrap_err();
        assert!(matches!(err, Error::EmptyInput(_)));
    }

    #[test]
    fn unlabeled_rows() {
        let d = parse_dataset("0.1,0.2,0.3\n1,2,3\n", "u", None, LabelPosition::None).unwrap();
        assert_eq!(d.series_length(), 3);
        assert_eq!(d.len(), 2);
    }

    #[test]
    fn znormalize_examples() {
        let d = ds(&[("a", &[1.0, 3.0]), ("b", &[5.0, 5.0])]);
        let z = znormalize(&d);
        assert_eq!(z.row(0), &[-1.0, 1.0]);
        assert_eq!(z.row(1), &[0.0, 0.0]);

        let d = ds(&[("a", &[0.0, 2.0, 4.0])]);
        let z = znormalize(&d);
        // mean 2, population sd sqrt(8/3) = 1.63299
        for (got, want) in z.row(0).iter().zip([-1.2247, 0.0, 1.2247]) {
            assert!((got - want).abs() < 1e-4, "{got} vs {want}");
        }
    }

    #[test]
    fn resample_zero_is_identity() {
        let train = ds(&[("a", &[1.0, 2.0]), ("b", &[3.0, 4.0])]);
        let test = ds(&[("a", &[5.0, 6.0]), ("b", &[7.0, 8.0])]);
        let (r_train, r_test) = stratified_resample(&train, &test, 0, 7).unwrap();
        assert_eq!(r_train, train);
        assert_eq!(r_test, test);
    }

    #[test]
    fn resample_preserves_class_quotas_and_is_deterministic() {
        let train = ds(&[("a", &[1.0, 2.0]), ("b", &[3.0, 4.0])]);
        let test = ds(&[("a", &[5.0, 6.0]), ("b", &[7.0, 8.0])]);
        for id in 1..20 {
            let (r_train, r_test) = stratified_resample(&train, &test, id, 7).unwrap();
            assert_eq!(r_train.class_counts(), vec![1, 1]);
            assert_eq!(r_test.len(), 2);
            let again = stratified_resample(&train, &test, id, 7).unwrap();
            assert_eq!(again.0, r_train);
            assert_eq!(again.1, r_test);
        }
    }

    #[test]
    fn resample_rejects_length_mismatch() {
        let train = ds(&[("a", &[1.0, 2.0])]);
        let test = ds(&[("a", &[5.0, 6.0, 7.0])]);
        assert!(matches!(stratified_resample(&train, &test, 1, 0), Err(Error::Shape(_))));
    }

    #[test]
    fn kfold_two_balanced_classes() {
        let labels = vec![0, 1, 0, 1, 0, 1, 0, 1, 0, 1];
        let spec = SplitSpec { k: 2, nr: 1, mds: 500, seed: 3 };
        let splits = make_splits(&labels, &spec).unwrap();
        assert_eq!(splits.len(), 2);
        for s in &splits {
            assert_eq!(s.validation.len(), 5);
            let zeros = s.validation.iter().filter(|&&i| labels[i] == 0).count();
            assert!(zeros == 2 || zeros == 3);
        }
        let mut all: Vec<usize> = splits.iter().flat_map(|s| s.validation.clone()).collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn shuffle_split_sizes_follow_half_mds() {
        let labels: Vec<usize> = (0..600).map(|i| i % 3).collect();
        let spec = SplitSpec { k: 2, nr: 10, mds: 500, seed: 1 };
        let splits = make_splits(&labels, &spec).unwrap();
        assert_eq!(splits.len(), 20);
        for s in &splits {
            assert_eq!(s.train.len(), 250);
            assert_eq!(s.validation.len(), 250);
            assert!(s.train.iter().all(|i| !s.validation.contains(i)));
        }
    }

    #[test]
    fn too_small_class_is_named() {
        let labels = vec![0, 0, 0, 1];
        let spec = SplitSpec { k: 2, nr: 1, mds: 500, seed: 0 };
        let err = make_splits(&labels, &spec).unwrap_err();
        assert!(err.to_string().contains("class 1"), "{err}");
    }

    #[test]
    fn invalid_spec_is_rejected() {
        let labels = vec![0, 0, 1, 1];
        for spec in [
            SplitSpec { k: 1, nr: 1, mds: 500, seed: 0 },
            SplitSpec { k: 2, nr: 0, mds: 500, seed: 0 },
            SplitSpec { k: 2, nr: 1, mds: 3, seed: 0 },
        ] {
            assert!(matches!(make_splits(&labels, &spec), Err(Error::Config(_))));
        }
    }

    #[test]
    fn allocation_respects_caps() {
        let alloc = proportional_allocation(5, &[1, 9], &[1, 9]);
        assert_eq!(alloc.iter().sum::<usize>(), 5);
        assert!(alloc[0] <= 1);
        let alloc = proportional_allocation(3, &[2, 2, 2], &[0, 2, 2]);
        assert_eq!(alloc[0], 0);
        assert_eq!(alloc.iter().sum::<usize>(), 3);
    }
}
