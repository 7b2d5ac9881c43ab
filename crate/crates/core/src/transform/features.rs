//! Feature matrices for every (representation, pooling) pair.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::convolve::convolve_padded_into;
use super::kernel::KERNEL_LENGTH;
use super::plan::{apply_representation, fit_plan, FeatureGroup, TransformPlan};
use super::pooling::{pool_all_slots, pool_slots};
use super::{ComboId, Pooling, Representation};
use crate::{Error, Result, TimeSeriesDataset};

/// The BASE and DIFF plans of one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plans {
    pub base: TransformPlan,
    pub diff: TransformPlan,
}

impl Plans {
    /// Fits independent plans for both representations on `train`.
    pub fn fit(train: &TimeSeriesDataset, num_features: usize, seed: u64) -> Result<Self> {
        Ok(Self {
            base: fit_plan(train, num_features, Representation::Base, seed)?,
            diff: fit_plan(train, num_features, Representation::Diff, seed)?,
        })
    }

    pub fn get(&self, rep: Representation) -> &TransformPlan {
        match rep {
            Representation::Base => &self.base,
            Representation::Diff => &self.diff,
        }
    }

    pub fn input_length(&self) -> usize {
        self.base.input_length()
    }

    /// Features per representation (identical for both plans by construction).
    pub fn features_per_representation(&self) -> usize {
        self.base.num_features()
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        self.diff.validate()?;
        if self.base.representation() != Representation::Base || self.diff.representation() != Representation::Diff {
            return Err(Error::InvalidInput("plans are stored under the wrong representation".into()));
        }
        if self.base.input_length() != self.diff.input_length() {
            return Err(Error::InvalidInput("BASE and DIFF plans disagree on input length".into()));
        }
        Ok(())
    }
}

/// Row-major `n × F` matrix of one representation pooled with one operator.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBlock {
    n_rows: usize,
    n_cols: usize,
    values: Vec<f64>,
}

impl FeatureBlock {
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Pooled features of a dataset, stored once per (representation, pooling).
///
/// MIX matrices are views over the BASE and DIFF blocks rather than copies.
#[derive(Debug, Clone)]
pub struct FeatureSet {
    n_rows: usize,
    blocks: Vec<Option<FeatureBlock>>,
}

fn block_slot(rep: Representation, pooling: Pooling) -> usize {
    let r = match rep {
        Representation::Base => 0,
        Representation::Diff => 1,
    };
    r * 5 + pooling.index()
}

impl FeatureSet {
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn block(&self, rep: Representation, pooling: Pooling) -> Option<&FeatureBlock> {
        self.blocks[block_slot(rep, pooling)].as_ref()
    }

    pub fn contains(&self, combo: ComboId) -> bool {
        combo.representations.members().iter().all(|&r| self.block(r, combo.pooling).is_some())
    }

    /// Combinations whose features are all present, in enumeration order.
    pub fn combos(&self) -> Vec<ComboId> {
        ComboId::all().into_iter().filter(|&c| self.contains(c)).collect()
    }

    /// The feature matrix of `combo`; MIX is BASE columns followed by DIFF columns.
    pub fn matrix(&self, combo: ComboId) -> Result<FeatureMatrix<'_>> {
        let parts = combo
            .representations
            .members()
            .iter()
            .map(|&r| {
                self.block(r, combo.pooling)
                    .ok_or_else(|| Error::InvalidInput(format!("features for {combo} were not computed")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FeatureMatrix { combo, parts })
    }
}

/// Read-only view of one combination's `n × F` feature matrix.
#[derive(Debug, Clone)]
pub struct FeatureMatrix<'a> {
    combo: ComboId,
    parts: Vec<&'a FeatureBlock>,
}

impl FeatureMatrix<'_> {
    pub fn combo(&self) -> ComboId {
        self.combo
    }

    pub fn n_rows(&self) -> usize {
        self.parts[0].n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.parts.iter().map(|p| p.n_cols).sum()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let first = self.parts[0].n_cols;
        if col < first {
            self.parts[0].values[row * first + col]
        } else {
            let p = self.parts[1];
            p.values[row * p.n_cols + col - first]
        }
    }

    /// Dense copy of the selected rows and columns, in the given orders.
    pub fn gather(&self, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
        let first = self.parts[0].n_cols;
        let mut out = DMatrix::zeros(rows.len(), cols.len());
        for (j, &c) in cols.iter().enumerate() {
            let (part, c) = if c < first { (self.parts[0], c) } else { (self.parts[1], c - first) };
            let stride = part.n_cols;
            let column = out.column_mut(j);
            for (dst, &r) in column.into_iter().zip(rows) {
                *dst = part.values[r * stride + c];
            }
        }
        out
    }

    /// Dense copy of all rows and columns.
    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        let n = self.n_rows();
        let mut out = DMatrix::zeros(n, self.n_cols());
        let mut offset = 0;
        for part in &self.parts {
            for i in 0..n {
                for (c, &v) in part.row(i).iter().enumerate() {
                    out[(i, offset + c)] = v;
                }
            }
            offset += part.n_cols;
        }
        out
    }
}

/// All 15 combinations (both representations, all five operators).
pub fn transform(ds: &TimeSeriesDataset, plans: &Plans) -> Result<FeatureSet> {
    transform_with(ds, plans, &Representation::ALL, &Pooling::ALL)
}

/// Only the blocks `combo` needs: one operator over one or two representations.
pub fn transform_combo(ds: &TimeSeriesDataset, plans: &Plans, combo: ComboId) -> Result<FeatureSet> {
    transform_with(ds, plans, combo.representations.members(), &[combo.pooling])
}

/// Computes the requested (representation × pooling) blocks.
pub fn transform_with(
    ds: &TimeSeriesDataset,
    plans: &Plans,
    reps: &[Representation],
    poolings: &[Pooling],
) -> Result<FeatureSet> {
    if ds.series_length() != plans.input_length() {
        return Err(Error::Shape(format!(
            "series length {} does not match the plan's input length {}",
            ds.series_length(),
            plans.input_length()
        )));
    }
    let mut blocks: Vec<Option<FeatureBlock>> = vec![None; 10];
    for &rep in reps {
        let plan = plans.get(rep);
        for (pooling, block) in poolings.iter().zip(transform_plan(ds, plan, poolings)?) {
            blocks[block_slot(rep, *pooling)] = Some(block);
        }
    }
    Ok(FeatureSet { n_rows: ds.len(), blocks })
}

/// One block per entry of `poolings` for a single plan.
fn transform_plan(ds: &TimeSeriesDataset, plan: &TransformPlan, poolings: &[Pooling]) -> Result<Vec<FeatureBlock>> {
    let groups = plan.groups();
    let f = plan.num_features();
    let rows: Vec<Vec<Vec<f64>>> = (0..ds.len())
        .into_par_iter()
        .map(|i| series_features(ds.row(i), plan, &groups, poolings))
        .collect::<Result<_>>()?;
    Ok(poolings
        .iter()
        .enumerate()
        .map(|(p, _)| {
            let mut values = Vec::with_capacity(ds.len() * f);
            for row in &rows {
                values.extend_from_slice(&row[p]);
            }
            FeatureBlock { n_rows: ds.len(), n_cols: f, values }
        })
        .collect())
}

/// Pooled features of one raw series, one vector per requested operator.
fn series_features(
    raw: &[f64],
    plan: &TransformPlan,
    groups: &[FeatureGroup],
    poolings: &[Pooling],
) -> Result<Vec<Vec<f64>>> {
    let x = apply_representation(plan.representation(), raw)?;
    let f = plan.num_features();
    let mut out = vec![vec![0.0; f]; poolings.len()];
    let fused = poolings == Pooling::ALL;
    let mut map = Vec::with_capacity(x.len());
    let mut scratch: Vec<[f64; 5]> = Vec::new();
    for g in groups {
        convolve_padded_into(&x, &g.kernel.weights(), g.dilation, &mut map);
        let region = if g.padding {
            &map[..]
        } else {
            let half = (KERNEL_LENGTH / 2) * g.dilation;
            &map[half..map.len() - half]
        };
        let biases = &plan.biases()[g.features.clone()];
        if fused {
            scratch.resize(biases.len(), [0.0; 5]);
            pool_all_slots(region, biases, &mut scratch);
            for (slot, values) in scratch.iter().enumerate() {
                for p in 0..5 {
                    out[p][g.features.start + slot] = values[p];
                }
            }
        } else {
            for (p, &op) in poolings.iter().enumerate() {
                pool_slots(region, biases, op, &mut out[p][g.features.clone()]);
            }
        }
    }
    Ok(out)
}
