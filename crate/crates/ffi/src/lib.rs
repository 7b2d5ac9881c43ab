//! C ABI for the selfrocket classifier.
//!
//! Datasets and models are opaque handles created and destroyed through this
//! API. Every fallible function returns an [`SfrStatus`]; on failure a
//! human-readable message is available from [`sfr_last_error_message`] on the
//! same thread until the next failing call. Panics never cross the boundary.

use std::cell::RefCell;
use std::collections::HashMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use selfrocket::data::{load_dataset, LabelPosition};
use selfrocket::pipeline::{fit_with_mode, FitMode};
use selfrocket::transform::DEFAULT_NUM_FEATURES;
use selfrocket::{ComboId, Error, FittedModel, SelectionConfig, TimeSeriesDataset};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfrStatus {
    Ok = 0,
    /// Null pointer, bad UTF-8 path, or an out-of-range argument.
    InvalidArgument = 1,
    Io = 2,
    /// Malformed input data.
    Parse = 3,
    /// Dimension mismatch, e.g. series length differs from the model's.
    Shape = 4,
    /// Invalid hyperparameters.
    Config = 5,
    /// Model file written by an incompatible format version.
    Version = 6,
    /// Model file is truncated or corrupt.
    Integrity = 7,
    /// Training labels contain fewer than two classes or cannot be stratified.
    Degenerate = 8,
    /// Internal failure (a caught panic).
    Internal = 9,
}

/// Fitting parameters. Obtain defaults with [`sfr_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SfrConfig {
    pub k: u32,
    pub nr: u32,
    pub f: u32,
    pub mds: u32,
    pub top: u32,
    pub thresh: f64,
    /// Index (0..15) of the combination used when the vote fails validation.
    pub default_combo: i32,
    /// Index (0..15) of a combination to use without selection, or -1 to select.
    pub fixed_combo: i32,
    pub seed: u64,
}

/// Opaque dataset handle.
pub struct SfrDataset {
    inner: TimeSeriesDataset,
}

/// Opaque fitted-model handle.
pub struct SfrModel {
    inner: FittedModel,
    combo_name: CString,
    class_names: Vec<CString>,
}

impl SfrModel {
    fn new(inner: FittedModel) -> Self {
        let combo_name = CString::new(inner.combo().to_string()).expect("combo names contain no NUL");
        let class_names =
            inner.class_names().iter().map(|n| CString::new(n.replace('\0', "")).expect("NUL removed")).collect();
        SfrModel { inner, combo_name, class_names }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("NUL removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> SfrStatus {
    match e.root() {
        Error::Io { .. } => SfrStatus::Io,
        Error::EmptyInput(_) | Error::Format { .. } | Error::Parse { .. } | Error::InvalidInput(_) => SfrStatus::Parse,
        Error::Shape(_) | Error::SeriesTooShort { .. } => SfrStatus::Shape,
        Error::Config(_) => SfrStatus::Config,
        Error::Version { .. } => SfrStatus::Version,
        Error::Integrity(_) => SfrStatus::Integrity,
        Error::Stratification(_) | Error::DegenerateLabels(_) => SfrStatus::Degenerate,
        _ => SfrStatus::Internal,
    }
}

/// Failure of an FFI call: a status plus its message.
struct Failure(SfrStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn invalid(msg: &str) -> Failure {
    Failure(SfrStatus::InvalidArgument, msg.to_string())
}

/// Runs `f`, converting errors and panics into a status and the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SfrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SfrStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal error: panic caught at the C boundary");
            SfrStatus::Internal
        }
    }
}

unsafe fn path_arg(path: *const c_char) -> Result<PathBuf, Failure> {
    if path.is_null() {
        return Err(invalid("path is null"));
    }
    let s = CStr::from_ptr(path).to_str().map_err(|_| invalid("path is not valid UTF-8"))?;
    Ok(PathBuf::from(s))
}

fn combo_arg(index: i32, what: &str) -> Result<ComboId, Failure> {
    usize::try_from(index)
        .ok()
        .and_then(|i| ComboId::all().get(i).copied())
        .ok_or_else(|| Failure(SfrStatus::Config, format!("{what} must be a combination index in 0..15, got {index}")))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sfr_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// Message of the last failed call on this thread, or null if none.
/// The pointer is valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn sfr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |m| m.as_ptr()))
}

/// Writes the default configuration to `out`.
///
/// # Safety
/// `out` must be null or point to writable memory for one `SfrConfig`.
#[no_mangle]
pub unsafe extern "C" fn sfr_config_default(out: *mut SfrConfig) -> SfrStatus {
    guard(|| {
        if out.is_null() {
            return Err(invalid("out is null"));
        }
        *out = default_config();
        Ok(())
    })
}

fn default_config() -> SfrConfig {
    let d = SelectionConfig::default();
    SfrConfig {
        k: d.k as u32,
        nr: d.nr as u32,
        f: d.f as u32,
        mds: d.mds as u32,
        top: d.top as u32,
        thresh: d.thresh,
        default_combo: d.default_combo.index() as i32,
        fixed_combo: -1,
        seed: d.seed,
    }
}

/// Builds a dataset from row-major `values` (`n_instances × series_length`)
/// and optional integer `labels` (null for unlabeled data). Class names are
/// the label values in decimal, ordered by first appearance.
///
/// # Safety
/// `values` must point to `n_instances * series_length` doubles, `labels` to
/// `n_instances` integers (or be null), and `out` to a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn sfr_dataset_from_arrays(
    values: *const f64,
    n_instances: usize,
    series_length: usize,
    labels: *const i64,
    out: *mut *mut SfrDataset,
) -> SfrStatus {
    guard(|| {
        if values.is_null() || out.is_null() {
            return Err(invalid("values and out must not be null"));
        }
        let total = n_instances.checked_mul(series_length).ok_or_else(|| invalid("dataset size overflows"))?;
        let values = std::slice::from_raw_parts(values, total).to_vec();
        let ds = if labels.is_null() {
            TimeSeriesDataset::unlabeled("arrays", values, series_length)?
        } else {
            let raw = std::slice::from_raw_parts(labels, n_instances);
            let mut index: HashMap<i64, usize> = HashMap::new();
            let mut names = Vec::new();
            let ids = raw
                .iter()
                .map(|&l| {
                    *index.entry(l).or_insert_with(|| {
                        names.push(l.to_string());
                        names.len() - 1
                    })
                })
                .collect();
            TimeSeriesDataset::new("arrays", values, series_length, ids, names)?
        };
        *out = Box::into_raw(Box::new(SfrDataset { inner: ds }));
        Ok(())
    })
}

/// Loads a UCR-style delimited file; `labeled` is non-zero when the first
/// column holds class labels.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn sfr_dataset_load(path: *const c_char, labeled: i32, out: *mut *mut SfrDataset) -> SfrStatus {
    guard(|| {
        if out.is_null() {
            return Err(invalid("out is null"));
        }
        let path = path_arg(path)?;
        let pos = if labeled != 0 { LabelPosition::FirstColumn } else { LabelPosition::None };
        let ds = load_dataset(&path, None, pos)?;
        *out = Box::into_raw(Box::new(SfrDataset { inner: ds }));
        Ok(())
    })
}

/// Number of instances, or 0 for a null handle.
///
/// # Safety
/// `ds` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn sfr_dataset_len(ds: *const SfrDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.inner.len())
}

/// Series length, or 0 for a null handle.
///
/// # Safety
/// `ds` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn sfr_dataset_series_length(ds: *const SfrDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.inner.series_length())
}

/// Releases a dataset; null is ignored.
///
/// # Safety
/// `ds` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sfr_dataset_free(ds: *mut SfrDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Fits a model on a labeled dataset. `config` may be null for defaults.
///
/// # Safety
/// `train` must be a live dataset handle, `config` null or a valid
/// `SfrConfig`, and `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn sfr_model_fit(
    train: *const SfrDataset,
    config: *const SfrConfig,
    out: *mut *mut SfrModel,
) -> SfrStatus {
    guard(|| {
        let train = train.as_ref().ok_or_else(|| invalid("train is null"))?;
        if out.is_null() {
            return Err(invalid("out is null"));
        }
        let c = config.as_ref().copied().unwrap_or_else(default_config);
        let cfg = SelectionConfig {
            k: c.k as usize,
            nr: c.nr as usize,
            f: c.f as usize,
            mds: c.mds as usize,
            top: c.top as usize,
            thresh: c.thresh,
            default_combo: combo_arg(c.default_combo, "default_combo")?,
            seed: c.seed,
        };
        let mode = if c.fixed_combo < 0 { FitMode::Select } else { FitMode::Fixed(combo_arg(c.fixed_combo, "fixed_combo")?) };
        let model = fit_with_mode(&train.inner, &cfg, c.seed, mode, DEFAULT_NUM_FEATURES)?;
        *out = Box::into_raw(Box::new(SfrModel::new(model)));
        Ok(())
    })
}

/// Writes one predicted class id per instance of `ds` into `out_ids`
/// (capacity `capacity`). Ids index the model's classes; see
/// [`sfr_model_class_name`].
///
/// # Safety
/// `model` and `ds` must be live handles and `out_ids` must point to
/// `capacity` writable `size_t` slots.
#[no_mangle]
pub unsafe extern "C" fn sfr_model_predict(
    model: *const SfrModel,
    ds: *const SfrDataset,
    out_ids: *mut usize,
    capacity: usize,
) -> SfrStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| invalid("model is null"))?;
        let ds = ds.as_ref().ok_or_else(|| invalid("dataset is null"))?;
        if out_ids.is_null() {
            return Err(invalid("out_ids is null"));
        }
        if capacity < ds.inner.len() {
            return Err(invalid(&format!("capacity {capacity} is smaller than {} instances", ds.inner.len())));
        }
        let ids = model.inner.predict(&ds.inner)?;
        std::slice::from_raw_parts_mut(out_ids, ids.len()).copy_from_slice(&ids);
        Ok(())
    })
}

/// Accuracy of `model` on a labeled dataset, matching classes by name.
///
/// # Safety
/// `model` and `ds` must be live handles and `out` a writable double.
#[no_mangle]
pub unsafe extern "C" fn sfr_model_score(model: *const SfrModel, ds: *const SfrDataset, out: *mut f64) -> SfrStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| invalid("model is null"))?;
        let ds = ds.as_ref().ok_or_else(|| invalid("dataset is null"))?;
        if out.is_null() {
            return Err(invalid("out is null"));
        }
        *out = model.inner.score(&ds.inner)?;
        Ok(())
    })
}

/// Saves the model (atomically) to `path`.
///
/// # Safety
/// `model` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sfr_model_save(model: *const SfrModel, path: *const c_char) -> SfrStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| invalid("model is null"))?;
        model.inner.save(&path_arg(path)?)?;
        Ok(())
    })
}

/// Loads a model saved by [`sfr_model_save`] or the CLI.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn sfr_model_load(path: *const c_char, out: *mut *mut SfrModel) -> SfrStatus {
    guard(|| {
        if out.is_null() {
            return Err(invalid("out is null"));
        }
        let model = FittedModel::load(&path_arg(path)?)?;
        *out = Box::into_raw(Box::new(SfrModel::new(model)));
        Ok(())
    })
}

/// Display name of the selected combination (e.g. `PPV_MIX`), owned by the
/// model; null for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sfr_model_combo_name(model: *const SfrModel) -> *const c_char {
    model.as_ref().map_or(ptr::null(), |m| m.combo_name.as_ptr())
}

/// Classifier input width (9,996 or 19,992 by default); 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sfr_model_num_features(model: *const SfrModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.num_features())
}

/// Number of class names known to the model; 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sfr_model_num_classes(model: *const SfrModel) -> usize {
    model.as_ref().map_or(0, |m| m.class_names.len())
}

/// Name of class `id`, owned by the model; null if out of range.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sfr_model_class_name(model: *const SfrModel, id: usize) -> *const c_char {
    model.as_ref().and_then(|m| m.class_names.get(id)).map_or(ptr::null(), |n| n.as_ptr())
}

/// Releases a model; null is ignored.
///
/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sfr_model_free(model: *mut SfrModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}
