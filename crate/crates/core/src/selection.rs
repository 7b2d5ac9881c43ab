//! Feature selection by mini-classifier voting.
//!
//! Every (representation set, pooling operator) combination is scored by
//! `k · nr` voters. A voter is one train/validation split; for each combo it
//! fits a ridge mini-classifier on `f` randomly drawn columns and records the
//! validation accuracy. The combo with the highest median accuracy wins the
//! vote, which is kept only if it ranks in the top `top` scores of at least a
//! `thresh` fraction of voters; otherwise the default combo is returned.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read};

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{make_splits, Split, SplitSpec};
use crate::ridge::{accuracy, default_alphas, fit_ridge};
use crate::seed::{rng_for, SeedPart};
use crate::transform::{ComboId, FeatureSet};
use crate::{Error, Result};

/// Hyperparameters of the selection module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    /// Folds per repeat.
    pub k: usize,
    /// Repeats; there are `k * nr` voters.
    pub nr: usize,
    /// Columns drawn per mini-classifier.
    pub f: usize,
    /// Datasets larger than this use shuffle splits of `mds / 2` per side.
    pub mds: usize,
    /// Rank window of the validation step.
    pub top: usize,
    /// Fraction of voters that must rank the winner inside `top`.
    pub thresh: f64,
    /// Returned when the vote fails validation.
    pub default_combo: ComboId,
    pub seed: u64,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig { k: 2, nr: 10, f: 2500, mds: 500, top: 5, thresh: 0.9, default_combo: ComboId::PPV_MIX, seed: 0 }
    }
}

impl SelectionConfig {
    pub fn n_voters(&self) -> usize {
        self.k * self.nr
    }

    pub fn split_spec(&self) -> SplitSpec {
        SplitSpec { k: self.k, nr: self.nr, mds: self.mds, seed: self.seed }
    }

    pub fn validate(&self) -> Result<()> {
        self.split_spec().validate()?;
        if self.f < 1 {
            return Err(Error::Config("f must be >= 1".into()));
        }
        if !(self.thresh > 0.0 && self.thresh <= 1.0) {
            return Err(Error::Config(format!("thresh must be in (0, 1], got {}", self.thresh)));
        }
        if !(1..=ComboId::all().len()).contains(&self.top) {
            return Err(Error::Config(format!("top must be in 1..=15, got {}", self.top)));
        }
        Ok(())
    }
}

/// Validation accuracy of every voter (rows) on every combo (columns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceTable {
    combos: Vec<ComboId>,
    n_voters: usize,
    /// Row-major `n_voters × combos.len()`.
    scores: Vec<f64>,
}

impl PerformanceTable {
    /// `scores` is row-major, one row per voter.
    pub fn new(combos: Vec<ComboId>, scores: Vec<f64>) -> Result<Self> {
        if combos.is_empty() {
            return Err(Error::EmptyInput("performance table without combos".into()));
        }
        if scores.is_empty() || !scores.len().is_multiple_of(combos.len()) {
            return Err(Error::Shape(format!("{} scores do not fill rows of {} combos", scores.len(), combos.len())));
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidInput("non-finite score in performance table".into()));
        }
        let n_voters = scores.len() / combos.len();
        Ok(PerformanceTable { combos, n_voters, scores })
    }

    pub fn combos(&self) -> &[ComboId] {
        &self.combos
    }

    pub fn n_voters(&self) -> usize {
        self.n_voters
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn voter(&self, v: usize) -> &[f64] {
        let c = self.combos.len();
        &self.scores[v * c..(v + 1) * c]
    }

    fn position(&self, combo: ComboId) -> Option<usize> {
        self.combos.iter().position(|&c| c == combo)
    }

    /// Scores of `combo` across voters, or `None` if it was not evaluated.
    pub fn column(&self, combo: ComboId) -> Option<Vec<f64>> {
        let j = self.position(combo)?;
        Some((0..self.n_voters).map(|v| self.voter(v)[j]).collect())
    }

    /// Per-combo median over voters (midpoint of the central pair for even counts).
    pub fn medians(&self) -> Vec<f64> {
        self.combos.iter().map(|&c| median(&self.column(c).expect("own combo"))).collect()
    }

    pub fn means(&self) -> Vec<f64> {
        self.combos
            .iter()
            .map(|&c| {
                let col = self.column(c).expect("own combo");
                col.iter().sum::<f64>() / col.len() as f64
            })
            .collect()
    }

    /// CSV with a `voter` column followed by one column per combo display name.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("voter");
        for c in &self.combos {
            write!(out, ",{c}").unwrap();
        }
        out.push('\n');
        for v in 0..self.n_voters {
            write!(out, "{v}").unwrap();
            for s in self.voter(v) {
                write!(out, ",{s}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Parses the output of [`PerformanceTable::to_csv`].
    pub fn from_csv(reader: impl Read) -> Result<Self> {
        let mut lines = BufReader::new(reader).lines();
        let header = match lines.next() {
            Some(line) => line.map_err(|e| Error::io("<performance table>", e))?,
            None => return Err(Error::EmptyInput("empty performance table".into())),
        };
        let mut fields = header.trim_end().split(',');
        if fields.next() != Some("voter") {
            return Err(Error::Format { row: 0, msg: "header must start with `voter`".into() });
        }
        let combos = fields
            .map(|name| name.parse::<ComboId>().map_err(|e| Error::Format { row: 0, msg: e.to_string() }))
            .collect::<Result<Vec<_>>>()?;
        let mut scores = Vec::new();
        for (row, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::io("<performance table>", e))?;
            let line = line.trim_end();
            if line.is_empty() {
                continue;
            }
            let values: Vec<&str> = line.split(',').skip(1).collect();
            if values.len() != combos.len() {
                return Err(Error::Format { row: row + 1, msg: format!("expected {} scores", combos.len()) });
            }
            for (col, v) in values.iter().enumerate() {
                scores.push(v.parse::<f64>().map_err(|e| Error::Parse { row: row + 1, col: col + 1, msg: e.to_string() })?);
            }
        }
        PerformanceTable::new(combos, scores)
    }
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Result of [`select_features`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionOutcome {
    /// Combo after validation.
    pub combo: ComboId,
    /// Winner of the highest-median vote.
    pub voted: ComboId,
    /// Fraction of voters ranking `voted` within the top window.
    pub consensus: f64,
    /// Whether the vote passed validation (`consensus >= thresh`).
    pub validated: bool,
    pub table: PerformanceTable,
}

/// Column indices used by voter `voter` for a combo with `n_cols` columns.
///
/// All columns when `f >= n_cols`; otherwise `f` distinct columns drawn
/// uniformly, returned in ascending order.
pub fn voter_columns(cfg: &SelectionConfig, voter: usize, combo: ComboId, n_cols: usize) -> Vec<usize> {
    if cfg.f >= n_cols {
        return (0..n_cols).collect();
    }
    let mut rng = rng_for(cfg.seed, &[SeedPart::Str("voter"), voter.into(), combo.index().into()]);
    let mut cols = index::sample(&mut rng, n_cols, cfg.f).into_vec();
    cols.sort_unstable();
    cols
}

/// Scores every combo present in `features` with every voter.
pub fn evaluate_combos(features: &FeatureSet, labels: &[usize], cfg: &SelectionConfig) -> Result<PerformanceTable> {
    cfg.validate()?;
    if features.n_rows() != labels.len() {
        return Err(Error::Shape(format!("{} feature rows but {} labels", features.n_rows(), labels.len())));
    }
    let combos = features.combos();
    if combos.is_empty() {
        return Err(Error::EmptyInput("no feature matrices to select from".into()));
    }
    let splits = make_splits(labels, &cfg.split_spec())?;
    let matrices = combos.iter().map(|&c| features.matrix(c)).collect::<Result<Vec<_>>>()?;

    let cells: Vec<(usize, usize)> =
        (0..splits.len()).flat_map(|v| (0..combos.len()).map(move |j| (v, j))).collect();
    let alphas = default_alphas();
    let scores = cells
        .par_iter()
        .map(|&(v, j)| {
            let matrix = &matrices[j];
            let cols = voter_columns(cfg, v, combos[j], matrix.n_cols());
            score_voter(&splits[v], labels, |rows| matrix.gather(rows, &cols), &alphas)
                .map_err(|e| e.context(format!("voter {v}, combo {}", combos[j])))
        })
        .collect::<Result<Vec<f64>>>()?;
    PerformanceTable::new(combos, scores)
}

fn score_voter(
    split: &Split,
    labels: &[usize],
    gather: impl Fn(&[usize]) -> nalgebra::DMatrix<f64>,
    alphas: &[f64],
) -> Result<f64> {
    let y_train: Vec<usize> = split.train.iter().map(|&i| labels[i]).collect();
    let y_val: Vec<usize> = split.validation.iter().map(|&i| labels[i]).collect();
    let model = fit_ridge(&gather(&split.train), &y_train, alphas)?;
    let predicted = model.predict(&gather(&split.validation))?;
    accuracy(&y_val, &predicted)
}

/// Combo with the highest median score; ties go to the higher mean, then to
/// the earlier column.
pub fn highest_median_vote(table: &PerformanceTable) -> ComboId {
    let medians = table.medians();
    let means = table.means();
    let mut best = 0;
    for j in 1..medians.len() {
        if medians[j] > medians[best] || (medians[j] == medians[best] && means[j] > means[best]) {
            best = j;
        }
    }
    table.combos[best]
}

/// Fraction of voters for which fewer than `top` combos score strictly
/// higher than `chosen` (ties at the cutoff count as inside the window).
pub fn consensus(table: &PerformanceTable, chosen: ComboId, top: usize) -> f64 {
    let Some(j) = table.position(chosen) else {
        return 0.0;
    };
    let inside = (0..table.n_voters)
        .filter(|&v| {
            let row = table.voter(v);
            row.iter().filter(|&&s| s > row[j]).count() < top
        })
        .count();
    inside as f64 / table.n_voters as f64
}

/// Keeps `chosen` if its consensus reaches `cfg.thresh`, else `cfg.default_combo`.
pub fn validate_vote(table: &PerformanceTable, chosen: ComboId, cfg: &SelectionConfig) -> ComboId {
    if consensus(table, chosen, cfg.top) >= cfg.thresh {
        chosen
    } else {
        cfg.default_combo
    }
}

/// Scores, votes and validates; see the module documentation.
pub fn select_features(features: &FeatureSet, labels: &[usize], cfg: &SelectionConfig) -> Result<SelectionOutcome> {
    let table = evaluate_combos(features, labels, cfg)?;
    Ok(outcome_from_table(table, cfg))
}

/// Vote and validation on an existing table.
pub fn outcome_from_table(table: PerformanceTable, cfg: &SelectionConfig) -> SelectionOutcome {
    let voted = highest_median_vote(&table);
    let consensus = consensus(&table, voted, cfg.top);
    let validated = consensus >= cfg.thresh;
    let combo = if validated { voted } else { cfg.default_combo };
    SelectionOutcome { combo, voted, consensus, validated, table }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::{Pooling, RepresentationSet};

    fn combo(s: &str) -> ComboId {
        s.parse().unwrap()
    }

    fn table(combos: &[&str], rows: &[&[f64]]) -> PerformanceTable {
        PerformanceTable::new(combos.iter().map(|s| combo(s)).collect(), rows.concat()).unwrap()
    }

    #[test]
    fn defaults_match_documented_values() {
        let cfg = SelectionConfig::default();
        assert_eq!((cfg.k, cfg.nr, cfg.f, cfg.mds, cfg.top), (2, 10, 2500, 500, 5));
        assert_eq!(cfg.thresh, 0.9);
        assert_eq!(cfg.default_combo, ComboId { representations: RepresentationSet::Mix, pooling: Pooling::Ppv });
        cfg.validate().unwrap();
        for bad in [
            SelectionConfig { k: 1, ..cfg },
            SelectionConfig { nr: 0, ..cfg },
            SelectionConfig { f: 0, ..cfg },
            SelectionConfig { thresh: 0.0, ..cfg },
            SelectionConfig { thresh: 1.5, ..cfg },
            SelectionConfig { top: 0, ..cfg },
            SelectionConfig { top: 16, ..cfg },
            SelectionConfig { mds: 3, ..cfg },
        ] {
            assert!(matches!(bad.validate(), Err(Error::Config(_))), "{bad:?}");
        }
    }

    #[test]
    fn median_prefers_robust_combo() {
        let t = table(&["PPV", "GMP"], &[&[0.9, 0.8], &[0.9, 0.8], &[0.1, 0.8]]);
        assert_eq!(highest_median_vote(&t), combo("PPV"));
    }

    #[test]
    fn dominating_combo_wins() {
        let t = table(&["PPV", "GMP", "MPV_MIX"], &[&[0.5, 0.6, 0.9], &[0.7, 0.1, 0.8]]);
        assert_eq!(highest_median_vote(&t), combo("MPV_MIX"));
    }

    #[test]
    fn ties_go_to_mean_then_order() {
        let flat = table(&["PPV", "GMP", "LSPV_MIX"], &[&[0.5, 0.5, 0.5], &[0.5, 0.5, 0.5]]);
        assert_eq!(highest_median_vote(&flat), combo("PPV"));
        // Equal medians (0.5); GMP has the higher mean.
        let t = table(&["PPV", "GMP"], &[&[0.4, 0.5], &[0.5, 0.5], &[0.6, 0.9]]);
        assert_eq!(highest_median_vote(&t), combo("GMP"));
    }

    #[test]
    fn even_voter_count_uses_midpoint() {
        assert_eq!(median(&[0.2, 0.9, 0.4, 0.6]), 0.5);
        assert_eq!(median(&[0.3]), 0.3);
    }

    #[test]
    fn validation_examples() {
        let cfg = SelectionConfig::default();
        // chosen is best for every voter
        let t = table(&["PPV", "GMP"], &[&[0.9, 0.1], &[0.8, 0.2]]);
        assert_eq!(validate_vote(&t, combo("PPV"), &SelectionConfig { thresh: 1.0, top: 1, ..cfg }), combo("PPV"));

        // chosen inside the top 5 for 17 of 20 voters
        let combos: Vec<ComboId> = ComboId::all().to_vec();
        let chosen = combo("GMP");
        let mut scores = Vec::new();
        for v in 0..20 {
            for (j, &c) in combos.iter().enumerate() {
                let s = if c == chosen {
                    if v < 17 { 0.95 } else { 0.05 }
                } else {
                    0.5 + j as f64 * 0.01
                };
                scores.push(s);
            }
        }
        let t = PerformanceTable::new(combos, scores).unwrap();
        assert!((consensus(&t, chosen, 5) - 0.85).abs() < 1e-12);
        assert_eq!(validate_vote(&t, chosen, &cfg), ComboId::PPV_MIX);
        let lenient = SelectionConfig { thresh: 0.85, ..cfg };
        assert_eq!(validate_vote(&t, chosen, &lenient), chosen);
        // thresh 0 always keeps the vote (bypassing config validation on purpose)
        let zero = SelectionConfig { thresh: 0.0, ..cfg };
        assert_eq!(validate_vote(&t, chosen, &zero), chosen);
    }

    #[test]
    fn ties_at_cutoff_are_inside() {
        // Five combos tie for first: with top = 1 every one of them is inside.
        let t = table(&["PPV", "GMP", "MPV", "MIPV", "LSPV", "PPV_DIFF"], &[&[0.7, 0.7, 0.7, 0.7, 0.7, 0.2]]);
        assert_eq!(consensus(&t, combo("LSPV"), 1), 1.0);
        assert_eq!(consensus(&t, combo("PPV_DIFF"), 5), 0.0);
        assert_eq!(consensus(&t, combo("PPV_DIFF"), 6), 1.0);
    }

    #[test]
    fn csv_round_trip() {
        let t = table(&["PPV", "GMP_DIFF", "LSPV_MIX"], &[&[0.1, 0.25, 1.0], &[0.3333333333333333, 0.0, 0.75]]);
        let csv = t.to_csv();
        assert!(csv.starts_with("voter,PPV,GMP_DIFF,LSPV_MIX\n0,0.1,"));
        assert_eq!(PerformanceTable::from_csv(csv.as_bytes()).unwrap(), t);
        assert!(PerformanceTable::from_csv("".as_bytes()).is_err());
        assert!(PerformanceTable::from_csv("voter,PPV\n0,x\n".as_bytes()).is_err());
    }

    #[test]
    fn voter_columns_clamp_and_determinism() {
        let cfg = SelectionConfig { f: 10, ..Default::default() };
        assert_eq!(voter_columns(&cfg, 0, ComboId::PPV, 7), (0..7).collect::<Vec<_>>());
        let a = voter_columns(&cfg, 3, ComboId::PPV, 100);
        assert_eq!(a, voter_columns(&cfg, 3, ComboId::PPV, 100));
        assert_eq!(a.len(), 10);
        assert!(a.windows(2).all(|w| w[0] < w[1]) && a[9] < 100);
        assert_ne!(a, voter_columns(&cfg, 4, ComboId::PPV, 100));
        assert_ne!(a, voter_columns(&cfg, 3, ComboId::PPV_MIX, 100));
    }
}
