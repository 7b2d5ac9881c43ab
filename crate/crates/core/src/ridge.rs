//! Closed-form ridge classifier.
//!
//! Features are standardised column-wise, classes are encoded one-vs-rest as
//! ±1 targets, and the regularisation strength is picked from a grid by the
//! exact leave-one-out squared error. One eigendecomposition of the smaller
//! Gram matrix (`n × n` or `F × F`) serves every alpha in the grid.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Floor on a feature's standard deviation.
pub const SCALE_EPS: f64 = 1e-8;

/// 10 values spaced logarithmically on `[1e-3, 1e3]`.
pub fn default_alphas() -> Vec<f64> {
    (0..10).map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / 9.0)).collect()
}

/// Fitted one-vs-rest ridge classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeModel {
    n_classes: usize,
    n_features: usize,
    alpha: f64,
    /// Row-major `n_classes × n_features`, in standardised feature space.
    weights: Vec<f64>,
    intercepts: Vec<f64>,
    feature_means: Vec<f64>,
    feature_scales: Vec<f64>,
}

/// A fitted model together with the leave-one-out error of every alpha tried.
#[derive(Debug, Clone)]
pub struct RidgeFit {
    pub model: RidgeModel,
    pub alphas: Vec<f64>,
    /// Mean squared leave-one-out residual over all instances and classes.
    pub loo_errors: Vec<f64>,
}

/// Column means and floored population standard deviations.
pub fn standardization(x: &DMatrix<f64>) -> (Vec<f64>, Vec<f64>) {
    let n = x.nrows() as f64;
    let mut means = Vec::with_capacity(x.ncols());
    let mut scales = Vec::with_capacity(x.ncols());
    for col in x.column_iter() {
        let mean = col.iter().sum::<f64>() / n;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        means.push(mean);
        scales.push(var.sqrt().max(SCALE_EPS));
    }
    (means, scales)
}

fn standardize(x: &DMatrix<f64>, means: &[f64], scales: &[f64]) -> DMatrix<f64> {
    let mut xs = x.clone();
    for (j, mut col) in xs.column_iter_mut().enumerate() {
        let (m, s) = (means[j], scales[j]);
        for v in col.iter_mut() {
            *v = (*v - m) / s;
        }
    }
    xs
}

/// Fits with the alpha minimising leave-one-out error; see [`fit_ridge_cv`].
pub fn fit_ridge(x: &DMatrix<f64>, labels: &[usize], alphas: &[f64]) -> Result<RidgeModel> {
    fit_ridge_cv(x, labels, alphas).map(|fit| fit.model)
}

/// Fits a ridge classifier on `x` (`n × F`) and class ids `labels`.
///
/// The class count is `max(label) + 1`; at least two distinct labels must be
/// present. Ties between alphas go to the smaller alpha.
pub fn fit_ridge_cv(x: &DMatrix<f64>, labels: &[usize], alphas: &[f64]) -> Result<RidgeFit> {
    let n = x.nrows();
    let f = x.ncols();
    if n != labels.len() {
        return Err(Error::Shape(format!("{n} feature rows but {} labels", labels.len())));
    }
    if n < 2 {
        return Err(Error::InvalidInput(format!("ridge needs at least 2 instances, got {n}")));
    }
    if f == 0 {
        return Err(Error::InvalidInput("ridge needs at least one feature".into()));
    }
    if alphas.is_empty() || alphas.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
        return Err(Error::Config("alphas must be a non-empty list of positive finite values".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite feature value".into()));
    }
    let n_classes = labels.iter().max().map_or(0, |&m| m + 1);
    let mut present = vec![false; n_classes];
    for &l in labels {
        present[l] = true;
    }
    if present.iter().filter(|&&p| p).count() < 2 {
        return Err(Error::DegenerateLabels("ridge classifier needs at least two classes".into()));
    }

    let (means, scales) = standardization(x);
    let xs = standardize(x, &means, &scales);

    // One-vs-rest ±1 targets, centred; the intercept is the target mean since
    // the standardised columns are centred.
    let mut y = DMatrix::from_element(n, n_classes, -1.0);
    for (i, &l) in labels.iter().enumerate() {
        y[(i, l)] = 1.0;
    }
    let y_means: Vec<f64> = y.column_iter().map(|c| c.sum() / n as f64).collect();
    let mut yc = y;
    for (c, mut col) in yc.column_iter_mut().enumerate() {
        col.add_scalar_mut(-y_means[c]);
    }

    let solver = GramSolver::new(&xs, &yc);
    let inv_n = 1.0 / n as f64;
    let loo_errors: Vec<f64> = alphas.iter().map(|&alpha| solver.loo_error(alpha, inv_n, &yc)).collect();
    let best = loo_errors
        .iter()
        .enumerate()
        .fold(0, |best, (i, &e)| if e < loo_errors[best] { i } else { best });
    let alpha = alphas[best];
    let w = solver.weights(alpha, &xs); // F × C

    let mut weights = Vec::with_capacity(n_classes * f);
    for c in 0..n_classes {
        weights.extend(w.column(c).iter());
    }
    let model = RidgeModel {
        n_classes,
        n_features: f,
        alpha,
        weights,
        intercepts: y_means,
        feature_means: means,
        feature_scales: scales,
    };
    Ok(RidgeFit { model, alphas: alphas.to_vec(), loo_errors })
}

/// Spectral form of the regularised system, shared across alphas.
enum GramSolver {
    /// `n ≤ F`: `Xs Xsᵀ = U diag(s) Uᵀ`; holds `U`, `s`, `Uᵀ Yc`.
    Dual { u: DMatrix<f64>, s: Vec<f64>, uty: DMatrix<f64> },
    /// `F < n`: `Xsᵀ Xs = V diag(s) Vᵀ`; holds `V`, `s`, `P = Xs V`, `Pᵀ Yc`.
    Primal { v: DMatrix<f64>, s: Vec<f64>, p: DMatrix<f64>, pty: DMatrix<f64> },
}

/// Eigenvalues of a PSD Gram matrix with roundoff-level values set to 0.
///
/// Centring puts the constant vector in the null space exactly; leaving its
/// eigenvalue at ~1e-14 instead of 0 perturbs `1 - h_ii` by about
/// `eigenvalue / alpha`, which matters at the small end of the alpha grid.
fn clean_eigenvalues(values: &nalgebra::DVector<f64>) -> Vec<f64> {
    let largest = values.iter().copied().fold(0.0, f64::max);
    let tol = largest * values.len() as f64 * f64::EPSILON;
    values.iter().map(|&e| if e <= tol { 0.0 } else { e }).collect()
}

impl GramSolver {
    fn new(xs: &DMatrix<f64>, yc: &DMatrix<f64>) -> Self {
        if xs.nrows() <= xs.ncols() {
            let gram = xs * xs.transpose();
            let eig = SymmetricEigen::new(gram);
            let s = clean_eigenvalues(&eig.eigenvalues);
            let uty = eig.eigenvectors.tr_mul(yc);
            GramSolver::Dual { u: eig.eigenvectors, s, uty }
        } else {
            let gram = xs.tr_mul(xs);
            let eig = SymmetricEigen::new(gram);
            let s = clean_eigenvalues(&eig.eigenvalues);
            let p = xs * &eig.eigenvectors;
            let pty = p.tr_mul(yc);
            GramSolver::Primal { v: eig.eigenvectors, s, p, pty }
        }
    }

    /// Mean squared leave-one-out residual, from `e_i / (1 - h_ii)` with the
    /// hat matrix `H = 11ᵀ/n + Xs (XsᵀXs + αI)⁻¹ Xsᵀ`.
    fn loo_error(&self, alpha: f64, inv_n: f64, yc: &DMatrix<f64>) -> f64 {
        // Residuals `e` and leverages' complements `1 - h_ii`.
        let (residuals, one_minus_h) = match self {
            GramSolver::Dual { u, s, uty } => {
                // U is a complete basis, so I - H = U diag(α/(s+α)) Uᵀ - 11ᵀ/n;
                // working with α/(s+α) avoids cancelling terms close to 1
                // when alpha is small.
                let keep: Vec<f64> = s.iter().map(|&si| alpha / (si + alpha)).collect();
                let mut scaled = uty.clone();
                for (k, mut row) in scaled.row_iter_mut().enumerate() {
                    row *= keep[k];
                }
                let residuals = u * scaled;
                let one_minus_h = u
                    .row_iter()
                    .map(|row| row.iter().zip(&keep).map(|(b, g)| b * b * g).sum::<f64>() - inv_n)
                    .collect::<Vec<f64>>();
                (residuals, one_minus_h)
            }
            GramSolver::Primal { s, p, pty, .. } => {
                let shrink: Vec<f64> = s.iter().map(|&si| 1.0 / (si + alpha)).collect();
                let mut scaled = pty.clone();
                for (k, mut row) in scaled.row_iter_mut().enumerate() {
                    row *= shrink[k];
                }
                let residuals = yc - p * scaled;
                let one_minus_h = p
                    .row_iter()
                    .map(|row| 1.0 - inv_n - row.iter().zip(&shrink).map(|(b, g)| b * b * g).sum::<f64>())
                    .collect::<Vec<f64>>();
                (residuals, one_minus_h)
            }
        };
        let mut total = 0.0;
        for (i, denom) in one_minus_h.iter().enumerate() {
            for c in 0..yc.ncols() {
                let r = residuals[(i, c)] / denom;
                total += r * r;
            }
        }
        total / (residuals.nrows() * yc.ncols()) as f64
    }

    /// `(XsᵀXs + αI)⁻¹ Xsᵀ Yc` as an `F × C` matrix.
    fn weights(&self, alpha: f64, xs: &DMatrix<f64>) -> DMatrix<f64> {
        match self {
            GramSolver::Dual { u, s, uty } => {
                let mut a = uty.clone();
                for (k, mut row) in a.row_iter_mut().enumerate() {
                    row /= s[k] + alpha;
                }
                let dual = u * a;
                xs.tr_mul(&dual)
            }
            GramSolver::Primal { v, s, pty, .. } => {
                let mut a = pty.clone();
                for (k, mut row) in a.row_iter_mut().enumerate() {
                    row /= s[k] + alpha;
                }
                v * a
            }
        }
    }
}

impl RidgeModel {
    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn intercepts(&self) -> &[f64] {
        &self.intercepts
    }

    pub fn feature_means(&self) -> &[f64] {
        &self.feature_means
    }

    pub fn feature_scales(&self) -> &[f64] {
        &self.feature_scales
    }

    /// Weights of class `c` in standardised feature space.
    pub fn class_weights(&self, c: usize) -> &[f64] {
        &self.weights[c * self.n_features..(c + 1) * self.n_features]
    }

    /// Per-class scores `standardize(x) · w_c + b_c`, `n × n_classes`.
    pub fn decision_function(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.ncols() != self.n_features {
            return Err(Error::Shape(format!(
                "model expects {} features, got {}",
                self.n_features,
                x.ncols()
            )));
        }
        let xs = standardize(x, &self.feature_means, &self.feature_scales);
        let w = DMatrix::from_column_slice(self.n_features, self.n_classes, &self.weights);
        let mut scores = xs * w;
        for (c, mut col) in scores.column_iter_mut().enumerate() {
            col.add_scalar_mut(self.intercepts[c]);
        }
        Ok(scores)
    }

    /// Arg-max class per row; ties go to the lowest class id.
    pub fn predict(&self, x: &DMatrix<f64>) -> Result<Vec<usize>> {
        let scores = self.decision_function(x)?;
        Ok(scores
            .row_iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) })
                    .0
            })
            .collect())
    }

    /// Consistency check after deserialisation.
    pub fn validate(&self) -> Result<()> {
        let f = self.n_features;
        let ok = self.n_classes >= 2
            && self.weights.len() == self.n_classes * f
            && self.intercepts.len() == self.n_classes
            && self.feature_means.len() == f
            && self.feature_scales.len() == f
            && self.feature_scales.iter().all(|&s| s > 0.0)
            && self.alpha > 0.0
            && self.weights.iter().chain(&self.intercepts).chain(&self.feature_means).all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput("inconsistent ridge model".into()))
        }
    }
}

/// Fraction of positions where `y_true` and `y_pred` agree.
pub fn accuracy(y_true: &[usize], y_pred: &[usize]) -> Result<f64> {
    if y_true.len() != y_pred.len() {
        return Err(Error::Shape(format!("{} true labels but {} predictions", y_true.len(), y_pred.len())));
    }
    if y_true.is_empty() {
        return Err(Error::Shape("accuracy of an empty prediction set".into()));
    }
    let hits = y_true.iter().zip(y_pred).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / y_true.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_problem(n: usize, f: usize, classes: usize, seed: u64) -> (DMatrix<f64>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_fn(n, f, |_, _| rng.random_range(-1.0..1.0));
        let labels = (0..n).map(|i| i % classes).collect();
        (x, labels)
    }

    #[test]
    fn alpha_grid() {
        let a = default_alphas();
        assert_eq!(a.len(), 10);
        assert!((a[0] - 1e-3).abs() < 1e-15);
        assert!((a[9] - 1e3).abs() < 1e-9);
        assert!(a.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn symmetric_two_point_problem() {
        let x = DMatrix::from_column_slice(2, 1, &[-1.0, 1.0]);
        for &alpha in &default_alphas() {
            let m = fit_ridge(&x, &[0, 1], &[alpha]).unwrap();
            assert_eq!(m.predict(&x).unwrap(), vec![0, 1]);
            // boundary at 0: both classes score equally there
            let s = m.decision_function(&DMatrix::from_element(1, 1, 0.0)).unwrap();
            assert!((s[(0, 0)] - s[(0, 1)]).abs() < 1e-12);
        }
    }

    #[test]
    fn normal_equations_hold() {
        for (n, f) in [(20, 50), (40, 10)] {
            let (x, labels) = random_problem(n, f, 3, 9);
            let m = fit_ridge(&x, &labels, &[0.7]).unwrap();
            let (means, scales) = standardization(&x);
            let xs = standardize(&x, &means, &scales);
            for c in 0..3 {
                let w = DMatrix::from_column_slice(f, 1, m.class_weights(c));
                let mut y = DMatrix::from_fn(n, 1, |i, _| if labels[i] == c { 1.0 } else { -1.0 });
                let mean = y.sum() / n as f64;
                y.add_scalar_mut(-mean);
                let lhs = (xs.tr_mul(&xs) + DMatrix::identity(f, f) * 0.7) * &w;
                let rhs = xs.tr_mul(&y);
                let resid = (lhs - rhs).amax();
                assert!(resid < 1e-8, "n={n} f={f} class {c}: residual {resid}");
            }
        }
    }

    #[test]
    fn separable_training_set_is_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let labels: Vec<usize> = (0..30).map(|i| i % 3).collect();
        let x = DMatrix::from_fn(30, 5, |i, j| if j == labels[i] { 5.0 } else { 0.0 } + rng.random_range(-0.1..0.1));
        let m = fit_ridge(&x, &labels, &default_alphas()).unwrap();
        assert_eq!(accuracy(&labels, &m.predict(&x).unwrap()).unwrap(), 1.0);
    }

    #[test]
    fn zero_row_predicts_largest_intercept() {
        // Unbalanced classes make intercepts differ; a row at the feature means
        // standardises to zero, leaving only the intercepts.
        let (x, _) = random_problem(12, 4, 2, 5);
        let labels = vec![0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 2];
        let m = fit_ridge(&x, &labels, &[1.0]).unwrap();
        let row = DMatrix::from_row_slice(1, 4, m.feature_means());
        let best = (0..3).max_by(|&a, &b| m.intercepts()[a].total_cmp(&m.intercepts()[b])).unwrap();
        assert_eq!(m.predict(&row).unwrap(), vec![best]);
    }

    #[test]
    fn weights_shrink_as_alpha_grows() {
        let (x, labels) = random_problem(25, 30, 2, 6);
        let norms: Vec<f64> = [1e-2, 1e-1, 1.0, 10.0, 100.0, 1e4]
            .iter()
            .map(|&a| {
                let m = fit_ridge(&x, &labels, &[a]).unwrap();
                m.class_weights(0).iter().map(|w| w * w).sum::<f64>().sqrt()
            })
            .collect();
        assert!(norms.windows(2).all(|w| w[1] < w[0]), "{norms:?}");
    }

    #[test]
    fn degenerate_and_invalid_inputs() {
        let x = DMatrix::from_element(3, 2, 1.0);
        assert!(matches!(fit_ridge(&x, &[1, 1, 1], &[1.0]), Err(Error::DegenerateLabels(_))));
        let mut bad = x.clone();
        bad[(0, 0)] = f64::NAN;
        assert!(matches!(fit_ridge(&bad, &[0, 1, 1], &[1.0]), Err(Error::InvalidInput(_))));
        assert!(matches!(fit_ridge(&x, &[0, 1], &[1.0]), Err(Error::Shape(_))));
        let m = fit_ridge(&x, &[0, 1, 1], &[1.0]).unwrap();
        assert!(matches!(m.predict(&DMatrix::zeros(1, 3)), Err(Error::Shape(_))));
    }

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy(&[0, 1, 2], &[0, 1, 2]).unwrap(), 1.0);
        assert_eq!(accuracy(&[0, 0], &[1, 1]).unwrap(), 0.0);
        assert_eq!(accuracy(&[0, 1, 1, 0], &[0, 1, 0, 0]).unwrap(), 0.75);
        assert!(accuracy(&[0], &[0, 1]).is_err());
        assert!(accuracy(&[], &[]).is_err());
    }
}
