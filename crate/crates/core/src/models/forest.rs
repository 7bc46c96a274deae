//! Tree ensembles: bagging random forest and extremely-randomized trees.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use super::tree::{grow_classification, GrowConfig, ThresholdRule, TreeNode};
use super::{
    classify, design_matrix, fraction_count, sample_weights, ModelMeta, ModelsError, Prediction,
    TrainedModel, TreeParams,
};
use crate::num::child_seed_index;
use crate::splits::LabeledDataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForestMode {
    /// Bootstrap rows, best midpoint split on a random feature subset.
    BaggingRf,
    /// Rows without replacement, one uniform-random threshold per candidate
    /// feature.
    Extra,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub mode: ForestMode,
    pub trees: Vec<TreeNode>,
    pub dim: usize,
    pub params: TreeParams,
    pub meta: ModelMeta,
}

impl ForestModel {
    /// Majority vote; the score is the malicious vote fraction.
    pub fn predict(&self, rows: &[Vec<f64>]) -> Vec<Prediction> {
        rows.iter()
            .map(|row| {
                let votes = self
                    .trees
                    .iter()
                    .filter(|t| t.score(row) > 0.5)
                    .count();
                classify(votes as f64 / self.trees.len() as f64)
            })
            .collect()
    }
}

fn draw_rows(n: usize, count: usize, with_replacement: bool, rng: &mut ChaCha12Rng) -> Vec<usize> {
    if with_replacement {
        (0..count).map(|_| rng.gen_range(0..n)).collect()
    } else {
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..count.min(n) {
            let j = rng.gen_range(i..n);
            pool.swap(i, j);
        }
        pool.truncate(count.min(n));
        pool
    }
}

pub fn fit_forest(
    train: &LabeledDataset,
    params: &TreeParams,
    mode: ForestMode,
) -> Result<TrainedModel, ModelsError> {
    params.validate()?;
    let (x, y) = design_matrix(train)?;
    let n = x.len();
    let dim = x[0].len();
    let weights = sample_weights(&y, params.class_weight);
    let max_features = fraction_count(params.max_features, dim);
    let row_count = ((params.max_samples * n as f64).round() as usize).clamp(1, n);

    let mut trees = Vec::with_capacity(params.n_estimators);
    for member in 0..params.n_estimators {
        // independent streams for row, feature, and threshold draws
        let member_seed = child_seed_index(params.seed, member as u64);
        let mut row_rng = ChaCha12Rng::seed_from_u64(child_seed_index(member_seed, 0));
        let mut feature_rng = ChaCha12Rng::seed_from_u64(child_seed_index(member_seed, 1));
        let mut threshold_rng = ChaCha12Rng::seed_from_u64(child_seed_index(member_seed, 2));
        let rows = match mode {
            ForestMode::BaggingRf => {
                if params.bootstrap {
                    draw_rows(n, row_count, true, &mut row_rng)
                } else {
                    (0..n).collect()
                }
            }
            ForestMode::Extra => draw_rows(n, row_count, false, &mut row_rng),
        };
        let mut cfg = GrowConfig {
            criterion: params.criterion,
            max_features,
            min_samples_leaf: params.min_samples_leaf,
            min_samples_split: params.min_samples_split,
            max_depth: None,
            thresholds: match mode {
                ForestMode::BaggingRf => ThresholdRule::Midpoints,
                ForestMode::Extra => ThresholdRule::UniformRandom(&mut threshold_rng),
            },
            feature_rng: (max_features < dim).then_some(&mut feature_rng),
        };
        trees.push(grow_classification(&x, &y, &weights, &rows, &mut cfg));
    }

    Ok(TrainedModel::Forest(ForestModel {
        mode,
        trees,
        dim,
        params: params.clone(),
        meta: ModelMeta {
            seed: params.seed,
            train_size: n,
        },
    }))
}
