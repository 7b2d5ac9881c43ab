//! End-to-end estimator: transform plans, feature generation, combo
//! selection and the final ridge classifier, plus model files.
//!
//! # Model file layout
//!
//! | offset | size | content                                   |
//! |--------|------|-------------------------------------------|
//! | 0      | 8    | magic `SFRKMDL\0`                         |
//! | 8      | 4    | format version, `u32` little-endian       |
//! | 12     | 8    | payload length in bytes, `u64` LE         |
//! | 20     | 32   | SHA-256 of the payload                    |
//! | 52     | …    | payload: the [`FittedModel`] as UTF-8 JSON |
//!
//! Floats in the payload are written in shortest round-trip form and parsed
//! exactly, so a loaded model predicts bit-identically to the saved one.

use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ridge::{accuracy, default_alphas, fit_ridge, RidgeModel};
use crate::selection::{select_features, SelectionConfig, SelectionOutcome};
use crate::transform::{transform, transform_combo, ComboId, FeatureSet, Plans, DEFAULT_NUM_FEATURES};
use crate::{Error, Result, Stage, TimeSeriesDataset, VERSION};

/// Leading bytes of every model file.
pub const MODEL_MAGIC: [u8; 8] = *b"SFRKMDL\0";
/// Current model file format version.
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 8 + 32;

/// How the final combination is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "combo", rename_all = "snake_case")]
pub enum FitMode {
    /// Run the selection module.
    Select,
    /// Bypass selection and use the given combination.
    Fixed(ComboId),
}

/// Provenance stored with a model. Deliberately free of wall-clock data so
/// that a fixed seed yields byte-identical model files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub dataset: String,
    pub seed: u64,
    pub library_version: String,
    pub n_train: usize,
    pub series_length: usize,
    pub mode: FitMode,
}

/// A trained classifier: plans, selected combination and ridge weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    plans: Plans,
    combo: ComboId,
    ridge: RidgeModel,
    cfg: SelectionConfig,
    class_names: Vec<String>,
    /// Vote details; absent for fixed-combination models.
    selection: Option<SelectionOutcome>,
    metadata: ModelMetadata,
}

/// Fits with the selection module and the default feature count.
pub fn fit(train: &TimeSeriesDataset, cfg: &SelectionConfig, seed: u64) -> Result<FittedModel> {
    fit_with_mode(train, cfg, seed, FitMode::Select, DEFAULT_NUM_FEATURES)
}

/// Fits plans with `num_features` per representation, then finishes as
/// [`fit_from_features`].
pub fn fit_with_mode(
    train: &TimeSeriesDataset,
    cfg: &SelectionConfig,
    seed: u64,
    mode: FitMode,
    num_features: usize,
) -> Result<FittedModel> {
    if mode == FitMode::Select {
        cfg.validate()?;
    }
    let plans = Plans::fit(train, num_features, seed).map_err(|e| e.at(Stage::Transform))?;
    let features = match mode {
        FitMode::Select => transform(train, &plans),
        FitMode::Fixed(combo) => transform_combo(train, &plans, combo),
    }
    .map_err(|e| e.at(Stage::Transform))?;
    fit_from_features(train, plans, &features, cfg, seed, mode)
}

/// Selection (if requested) and the final ridge on precomputed training
/// features. `features` must come from `plans` applied to `train`.
pub fn fit_from_features(
    train: &TimeSeriesDataset,
    plans: Plans,
    features: &FeatureSet,
    cfg: &SelectionConfig,
    seed: u64,
    mode: FitMode,
) -> Result<FittedModel> {
    if features.n_rows() != train.len() {
        return Err(Error::Shape(format!("{} feature rows for {} instances", features.n_rows(), train.len())));
    }
    let (combo, selection) = match mode {
        FitMode::Select => {
            let outcome = select_features(features, train.labels(), cfg).map_err(|e| e.at(Stage::Selection))?;
            (outcome.combo, Some(outcome))
        }
        FitMode::Fixed(combo) => (combo, None),
    };
    let x = features.matrix(combo).map_err(|e| e.at(Stage::Classifier))?.to_dmatrix();
    let ridge = fit_ridge(&x, train.labels(), &default_alphas()).map_err(|e| e.at(Stage::Classifier))?;
    Ok(FittedModel {
        combo,
        ridge,
        cfg: *cfg,
        class_names: train.class_names().to_vec(),
        selection,
        metadata: ModelMetadata {
            dataset: train.name().to_string(),
            seed,
            library_version: VERSION.to_string(),
            n_train: train.len(),
            series_length: plans.input_length(),
            mode,
        },
        plans,
    })
}

impl FittedModel {
    pub fn combo(&self) -> ComboId {
        self.combo
    }

    pub fn plans(&self) -> &Plans {
        &self.plans
    }

    pub fn ridge(&self) -> &RidgeModel {
        &self.ridge
    }

    pub fn config(&self) -> &SelectionConfig {
        &self.cfg
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn selection(&self) -> Option<&SelectionOutcome> {
        self.selection.as_ref()
    }

    pub fn metadata(&self) -> &ModelMetadata {
        &self.metadata
    }

    pub fn series_length(&self) -> usize {
        self.plans.input_length()
    }

    /// Column count of the classifier's input.
    pub fn num_features(&self) -> usize {
        self.ridge.n_features()
    }

    /// Per-class scores for every series in `ds`.
    pub fn decision_function(&self, ds: &TimeSeriesDataset) -> Result<nalgebra::DMatrix<f64>> {
        if ds.series_length() != self.series_length() {
            return Err(Error::Shape(format!(
                "model expects series of length {}, input has length {}",
                self.series_length(),
                ds.series_length()
            )));
        }
        // Only the selected combination's blocks are computed.
        let features = transform_combo(ds, &self.plans, self.combo).map_err(|e| e.at(Stage::Transform))?;
        let x = features.matrix(self.combo)?.to_dmatrix();
        self.ridge.decision_function(&x).map_err(|e| e.at(Stage::Classifier))
    }

    /// Predicted class ids, indexing [`FittedModel::class_names`].
    pub fn predict(&self, ds: &TimeSeriesDataset) -> Result<Vec<usize>> {
        if ds.series_length() != self.series_length() {
            return Err(Error::Shape(format!(
                "model expects series of length {}, input has length {}",
                self.series_length(),
                ds.series_length()
            )));
        }
        let features = transform_combo(ds, &self.plans, self.combo).map_err(|e| e.at(Stage::Transform))?;
        self.predict_features(&features)
    }

    /// Predictions from features already computed with this model's plans.
    pub fn predict_features(&self, features: &FeatureSet) -> Result<Vec<usize>> {
        let x = features.matrix(self.combo)?.to_dmatrix();
        self.ridge.predict(&x).map_err(|e| e.at(Stage::Classifier))
    }

    /// Predicted class names.
    pub fn predict_labels(&self, ds: &TimeSeriesDataset) -> Result<Vec<String>> {
        Ok(self.predict(ds)?.into_iter().map(|c| self.class_names[c].clone()).collect())
    }

    /// Accuracy on a labeled dataset whose class names are matched to the model's.
    pub fn score(&self, ds: &TimeSeriesDataset) -> Result<f64> {
        let aligned = ds.align_classes(&self.class_names);
        accuracy(aligned.labels(), &self.predict(&aligned)?)
    }

    /// Internal consistency, checked on load.
    pub fn validate(&self) -> Result<()> {
        self.plans.validate()?;
        self.ridge.validate()?;
        let expected = self.combo.num_features(self.plans.features_per_representation());
        if self.ridge.n_features() != expected {
            return Err(Error::InvalidInput(format!(
                "classifier has {} inputs but {} implies {expected}",
                self.ridge.n_features(),
                self.combo
            )));
        }
        if self.ridge.n_classes() > self.class_names.len() {
            return Err(Error::InvalidInput("more classifier outputs than class names".into()));
        }
        Ok(())
    }

    /// Serialises the model into the documented container.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let payload = serde_json::to_vec(self).map_err(|e| Error::InvalidInput(format!("cannot serialise model: {e}")))?;
        let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
        out.extend_from_slice(&MODEL_MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
        out.extend_from_slice(&Sha256::digest(&payload));
        out.extend_from_slice(&payload);
        Ok(out)
    }

    /// Parses a container produced by [`FittedModel::to_bytes`].
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 12 {
            return Err(Error::Integrity(format!("file is truncated ({} bytes)", bytes.len())));
        }
        if bytes[..8] != MODEL_MAGIC {
            return Err(Error::Integrity("not a selfrocket model file (bad magic)".into()));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
        if version != FORMAT_VERSION {
            return Err(Error::Version { found: version, expected: FORMAT_VERSION });
        }
        if bytes.len() < HEADER_LEN {
            return Err(Error::Integrity(format!("file is truncated ({} bytes)", bytes.len())));
        }
        let declared = u64::from_le_bytes(bytes[12..20].try_into().expect("8 bytes"));
        let payload = &bytes[HEADER_LEN..];
        if declared != payload.len() as u64 {
            return Err(Error::Integrity(format!(
                "payload is {} bytes but the header declares {declared}",
                payload.len()
            )));
        }
        if Sha256::digest(payload).as_slice() != &bytes[20..52] {
            return Err(Error::Integrity("checksum mismatch".into()));
        }
        let model: FittedModel =
            serde_json::from_slice(payload).map_err(|e| Error::Integrity(format!("malformed payload: {e}")))?;
        model.validate().map_err(|e| Error::Integrity(e.to_string()))?;
        Ok(model)
    }

    /// Writes the model atomically: a partially written file is never left at `path`.
    pub fn save(&self, path: &Path) -> Result<()> {
        let bytes = self.to_bytes()?;
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
        tmp.write_all(&bytes).map_err(|e| Error::io(tmp.path(), e))?;
        tmp.as_file().sync_all().map_err(|e| Error::io(tmp.path(), e))?;
        tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

/// Test-set accuracy of every combination: an upper bound on what selection
/// can achieve. Not a model; it cannot be saved or used to predict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub combos: Vec<ComboId>,
    pub accuracies: Vec<f64>,
    /// Highest accuracy; ties go to the earlier combination.
    pub best: ComboId,
    pub best_accuracy: f64,
}

impl OracleReport {
    pub fn accuracy_of(&self, combo: ComboId) -> Option<f64> {
        self.combos.iter().position(|&c| c == combo).map(|i| self.accuracies[i])
    }
}

/// Fits one final classifier per combination on `train` and scores each on `test`.
pub fn fit_oracle(train: &TimeSeriesDataset, test: &TimeSeriesDataset, seed: u64) -> Result<OracleReport> {
    let plans = Plans::fit(train, DEFAULT_NUM_FEATURES, seed).map_err(|e| e.at(Stage::Transform))?;
    let test = test.align_classes(train.class_names());
    let train_features = transform(train, &plans).map_err(|e| e.at(Stage::Transform))?;
    let test_features = transform(&test, &plans).map_err(|e| e.at(Stage::Transform))?;
    oracle_from_features(&train_features, train.labels(), &test_features, test.labels())
}

/// [`fit_oracle`] on precomputed features; test labels must use the training ids.
pub fn oracle_from_features(
    train: &FeatureSet,
    train_labels: &[usize],
    test: &FeatureSet,
    test_labels: &[usize],
) -> Result<OracleReport> {
    let combos: Vec<ComboId> = train.combos().into_iter().filter(|&c| test.contains(c)).collect();
    if combos.is_empty() {
        return Err(Error::EmptyInput("no combination present in both feature sets".into()));
    }
    let alphas = default_alphas();
    let accuracies = combos
        .iter()
        .map(|&c| {
            let ridge = fit_ridge(&train.matrix(c)?.to_dmatrix(), train_labels, &alphas)
                .map_err(|e| e.context(format!("combo {c}")).at(Stage::Classifier))?;
            accuracy(test_labels, &ridge.predict(&test.matrix(c)?.to_dmatrix())?)
        })
        .collect::<Result<Vec<f64>>>()?;
    let best_i = accuracies
        .iter()
        .enumerate()
        .fold(0, |b, (i, &a)| if a > accuracies[b] { i } else { b });
    Ok(OracleReport { best: combos[best_i], best_accuracy: accuracies[best_i], combos, accuracies })
}
