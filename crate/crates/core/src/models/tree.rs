//! CART-style trees: weighted classification growth and regression growth
//! for the boosting stages.
//!
//! Split search walks features in ascending index order and thresholds in
//! ascending value order, replacing the incumbent only on strictly larger
//! gain, so ties break toward the lowest feature index and lowest threshold
//! and trees are reproducible across platforms.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

pub const MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf {
        /// Malicious probability for classification, additive step for
        /// regression stages.
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn score(&self, row: &[f64]) -> f64 {
        match self {
            TreeNode::Leaf { value } => *value,
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if row[*feature] <= *threshold {
                    left.score(row)
                } else {
                    right.score(row)
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Entropy,
    Gini,
}

impl Criterion {
    fn impurity(&self, w_pos: f64, w_total: f64) -> f64 {
        if w_total <= 0.0 {
            return 0.0;
        }
        let p = w_pos / w_total;
        match self {
            Criterion::Gini => 2.0 * p * (1.0 - p),
            Criterion::Entropy => {
                let mut h = 0.0;
                if p > 0.0 {
                    h -= p * p.ln();
                }
                if p < 1.0 {
                    h -= (1.0 - p) * (1.0 - p).ln();
                }
                h
            }
        }
    }
}

/// How split thresholds are chosen.
pub enum ThresholdRule<'a> {
    /// Midpoints between consecutive distinct sorted values.
    Midpoints,
    /// One threshold per candidate feature, uniform between the node's
    /// per-feature min and max (extremely-randomized variant).
    UniformRandom(&'a mut ChaCha12Rng),
}

pub struct GrowConfig<'a> {
    pub criterion: Criterion,
    /// Number of features examined per node.
    pub max_features: usize,
    pub min_samples_leaf: usize,
    pub min_samples_split: usize,
    pub max_depth: Option<usize>,
    pub thresholds: ThresholdRule<'a>,
    /// Feature subsets are drawn from this when `max_features` is below the
    /// dimension; `None` keeps node feature choice deterministic.
    pub feature_rng: Option<&'a mut ChaCha12Rng>,
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    gain: f64,
}

/// Grow a weighted binary classification tree over the given row indices.
pub fn grow_classification(
    x: &[Vec<f64>],
    y: &[bool],
    weights: &[f64],
    rows: &[usize],
    cfg: &mut GrowConfig<'_>,
) -> TreeNode {
    grow_cls_rec(x, y, weights, rows, cfg, 0)
}

fn node_feature_set(dim: usize, cfg: &mut GrowConfig<'_>) -> Vec<usize> {
    let m = cfg.max_features.clamp(1, dim);
    if m == dim {
        return (0..dim).collect();
    }
    let rng = cfg
        .feature_rng
        .as_deref_mut()
        .expect("feature subsampling requires an rng");
    let mut pool: Vec<usize> = (0..dim).collect();
    for i in 0..m {
        let j = rng.gen_range(i..dim);
        pool.swap(i, j);
    }
    let mut chosen = pool[..m].to_vec();
    chosen.sort_unstable();
    chosen
}

fn grow_cls_rec(
    x: &[Vec<f64>],
    y: &[bool],
    weights: &[f64],
    rows: &[usize],
    cfg: &mut GrowConfig<'_>,
    depth: usize,
) -> TreeNode {
    let w_total: f64 = rows.iter().map(|&r| weights[r]).sum();
    let w_pos: f64 = rows.iter().filter(|&&r| y[r]).map(|&r| weights[r]).sum();
    let leaf = || TreeNode::Leaf {
        value: if w_total > 0.0 { w_pos / w_total } else { 0.0 },
    };

    let pure = w_pos == 0.0 || w_pos == w_total;
    let depth_done = cfg.max_depth.is_some_and(|d| depth >= d);
    if pure || depth_done || rows.len() < cfg.min_samples_split {
        return leaf();
    }

    let parent_impurity = cfg.criterion.impurity(w_pos, w_total);
    let candidates = node_feature_set(x[0].len(), cfg);
    let mut best: Option<SplitChoice> = None;
    for feature in candidates {
        let choice = match &mut cfg.thresholds {
            ThresholdRule::Midpoints => best_midpoint_split(
                x,
                y,
                weights,
                rows,
                feature,
                cfg.criterion,
                cfg.min_samples_leaf,
                parent_impurity,
                w_total,
            ),
            ThresholdRule::UniformRandom(rng) => random_threshold_split(
                x,
                y,
                weights,
                rows,
                feature,
                cfg.criterion,
                cfg.min_samples_leaf,
                parent_impurity,
                w_total,
                rng,
            ),
        };
        if let Some(c) = choice {
            if best.as_ref().is_none_or(|b| c.gain > b.gain) {
                best = Some(c);
            }
        }
    }

    // Accept the best candidate even at zero gain (an even split of an
    // impure node may unlock pure grandchildren); both children are strictly
    // smaller, so recursion terminates.
    let Some(split) = best else { return leaf() };
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
        .iter()
        .partition(|&&r| x[r][split.feature] <= split.threshold);
    let left = grow_cls_rec(x, y, weights, &left_rows, cfg, depth + 1);
    let right = grow_cls_rec(x, y, weights, &right_rows, cfg, depth + 1);
    TreeNode::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: Box::new(left),
        right: Box::new(right),
    }
}

#[allow(clippy::too_many_arguments)]
fn best_midpoint_split(
    x: &[Vec<f64>],
    y: &[bool],
    weights: &[f64],
    rows: &[usize],
    feature: usize,
    criterion: Criterion,
    min_leaf: usize,
    parent_impurity: f64,
    w_total: f64,
) -> Option<SplitChoice> {
    let mut vals: Vec<(f64, f64, f64)> = rows
        .iter()
        .map(|&r| {
            let w = weights[r];
            (x[r][feature], if y[r] { w } else { 0.0 }, w)
        })
        .collect();
    vals.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite features"));

    let total_pos: f64 = vals.iter().map(|v| v.1).sum();
    let n = vals.len();
    let mut best: Option<SplitChoice> = None;
    let mut left_w = 0.0;
    let mut left_pos = 0.0;
    for i in 0..n - 1 {
        left_w += vals[i].2;
        left_pos += vals[i].1;
        if vals[i + 1].0 <= vals[i].0 {
            continue;
        }
        let left_n = i + 1;
        if left_n < min_leaf || n - left_n < min_leaf {
            continue;
        }
        let right_w = w_total - left_w;
        let right_pos = total_pos - left_pos;
        let child = (left_w * criterion.impurity(left_pos, left_w)
            + right_w * criterion.impurity(right_pos, right_w))
            / w_total;
        let gain = parent_impurity - child;
        if best.as_ref().is_none_or(|b| gain > b.gain) {
            best = Some(SplitChoice {
                feature,
                threshold: (vals[i].0 + vals[i + 1].0) / 2.0,
                gain,
            });
        }
    }
    best
}

#[allow(clippy::too_many_arguments)]
fn random_threshold_split(
    x: &[Vec<f64>],
    y: &[bool],
    weights: &[f64],
    rows: &[usize],
    feature: usize,
    criterion: Criterion,
    min_leaf: usize,
    parent_impurity: f64,
    w_total: f64,
    rng: &mut ChaCha12Rng,
) -> Option<SplitChoice> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &r in rows {
        lo = lo.min(x[r][feature]);
        hi = hi.max(x[r][feature]);
    }
    if !(lo < hi) {
        return None;
    }
    let threshold = rng.gen_range(lo..hi);
    let mut left_n = 0usize;
    let mut left_w = 0.0;
    let mut left_pos = 0.0;
    let mut total_pos = 0.0;
    for &r in rows {
        let w = weights[r];
        let pos = if y[r] { w } else { 0.0 };
        total_pos += pos;
        if x[r][feature] <= threshold {
            left_n += 1;
            left_w += w;
            left_pos += pos;
        }
    }
    if left_n < min_leaf || rows.len() - left_n < min_leaf {
        return None;
    }
    let right_w = w_total - left_w;
    let right_pos = total_pos - left_pos;
    let child = (left_w * criterion.impurity(left_pos, left_w)
        + right_w * criterion.impurity(right_pos, right_w))
        / w_total;
    Some(SplitChoice {
        feature,
        threshold,
        gain: parent_impurity - child,
    })
}

/// Grow an unweighted regression tree on `targets`, minimizing squared error
/// with midpoint thresholds. Leaf values come from `leaf_value` over the leaf
/// membership, which lets boosting install its own per-leaf step.
pub fn grow_regression(
    x: &[Vec<f64>],
    targets: &[f64],
    rows: &[usize],
    max_depth: usize,
    min_leaf: usize,
    leaf_value: &impl Fn(&[usize]) -> f64,
) -> TreeNode {
    let leaf = || TreeNode::Leaf {
        value: leaf_value(rows),
    };
    if max_depth == 0 || rows.len() < 2 * min_leaf.max(1) {
        return leaf();
    }

    let sse = |sum: f64, sumsq: f64, n: f64| sumsq - sum * sum / n;
    let total_sum: f64 = rows.iter().map(|&r| targets[r]).sum();
    let total_sumsq: f64 = rows.iter().map(|&r| targets[r] * targets[r]).sum();
    let parent_sse = sse(total_sum, total_sumsq, rows.len() as f64);

    let mut best: Option<SplitChoice> = None;
    for feature in 0..x[0].len() {
        let mut vals: Vec<(f64, f64)> = rows.iter().map(|&r| (x[r][feature], targets[r])).collect();
        vals.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite features"));
        let n = vals.len();
        let mut lsum = 0.0;
        let mut lsumsq = 0.0;
        for i in 0..n - 1 {
            lsum += vals[i].1;
            lsumsq += vals[i].1 * vals[i].1;
            if vals[i + 1].0 <= vals[i].0 {
                continue;
            }
            let left_n = i + 1;
            if left_n < min_leaf || n - left_n < min_leaf {
                continue;
            }
            let child = sse(lsum, lsumsq, left_n as f64)
                + sse(total_sum - lsum, total_sumsq - lsumsq, (n - left_n) as f64);
            let gain = parent_sse - child;
            if best.as_ref().is_none_or(|b| gain > b.gain) {
                best = Some(SplitChoice {
                    feature,
                    threshold: (vals[i].0 + vals[i + 1].0) / 2.0,
                    gain,
                });
            }
        }
    }

    let Some(split) = best else { return leaf() };
    if split.gain <= MIN_GAIN {
        return leaf();
    }
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
        .iter()
        .partition(|&&r| x[r][split.feature] <= split.threshold);
    TreeNode::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: Box::new(grow_regression(
            x,
            targets,
            &left_rows,
            max_depth - 1,
            min_leaf,
            leaf_value,
        )),
        right: Box::new(grow_regression(
            x,
            targets,
            &right_rows,
            max_depth - 1,
            min_leaf,
            leaf_value,
        )),
    }
}

/// A single fitted CART classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTreeModel {
    pub root: TreeNode,
    pub dim: usize,
    pub params: super::TreeParams,
    pub meta: super::ModelMeta,
}

impl DecisionTreeModel {
    pub fn predict(&self, rows: &[Vec<f64>]) -> Vec<super::Prediction> {
        rows.iter()
            .map(|row| super::classify(self.root.score(row)))
            .collect()
    }
}

/// Fit one classification tree on the full training set (no row sampling).
pub fn fit_tree(
    train: &crate::splits::LabeledDataset,
    params: &super::TreeParams,
) -> Result<super::TrainedModel, super::ModelsError> {
    params.validate()?;
    let (x, y) = super::design_matrix(train)?;
    let dim = x[0].len();
    let weights = super::sample_weights(&y, params.class_weight);
    let rows: Vec<usize> = (0..x.len()).collect();
    let max_features = super::fraction_count(params.max_features, dim);
    let mut rng = ChaCha12Rng::seed_from_u64(params.seed);
    let mut cfg = GrowConfig {
        criterion: params.criterion,
        max_features,
        min_samples_leaf: params.min_samples_leaf,
        min_samples_split: params.min_samples_split,
        max_depth: None,
        thresholds: ThresholdRule::Midpoints,
        feature_rng: (max_features < dim).then_some(&mut rng),
    };
    let root = grow_classification(&x, &y, &weights, &rows, &mut cfg);
    Ok(super::TrainedModel::Dt(DecisionTreeModel {
        root,
        dim,
        params: params.clone(),
        meta: super::ModelMeta {
            seed: params.seed,
            train_size: train.len(),
        },
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grow_default(x: &[Vec<f64>], y: &[bool]) -> TreeNode {
        let weights = vec![1.0; y.len()];
        let rows: Vec<usize> = (0..y.len()).collect();
        let mut cfg = GrowConfig {
            criterion: Criterion::Entropy,
            max_features: x[0].len(),
            min_samples_leaf: 1,
            min_samples_split: 2,
            max_depth: None,
            thresholds: ThresholdRule::Midpoints,
            feature_rng: None,
        };
        grow_classification(x, y, &weights, &rows, &mut cfg)
    }

    #[test]
    fn separable_1d_gets_depth_one() {
        let x: Vec<Vec<f64>> = (-5..5).map(|i| vec![i as f64 + 0.5]).collect();
        let y: Vec<bool> = (-5..5).map(|i| i >= 0).collect();
        let tree = grow_default(&x, &y);
        assert_eq!(tree.depth(), 1);
        for (row, label) in x.iter().zip(&y) {
            assert_eq!(tree.score(row) > 0.5, *label);
        }
    }

    #[test]
    fn xor_needs_depth_two_and_fits() {
        let x = vec![
            vec![0.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
        ];
        let y = vec![false, true, true, false];
        // no depth-1 tree on midpoint thresholds separates xor
        for feature in 0..2 {
            for (left_mal, right_mal) in [(true, false), (false, true)] {
                let acc = x
                    .iter()
                    .zip(&y)
                    .filter(|(row, &label)| {
                        let pred = if row[feature] <= 0.5 { left_mal } else { right_mal };
                        pred == label
                    })
                    .count();
                assert!(acc < 4, "depth-1 tree cannot fit xor");
            }
        }
        let tree = grow_default(&x, &y);
        assert!(tree.depth() >= 2);
        for (row, label) in x.iter().zip(&y) {
            assert_eq!(tree.score(row) > 0.5, *label);
        }
    }

    #[test]
    fn min_samples_leaf_forces_single_leaf() {
        let x: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64]).collect();
        let y: Vec<bool> = (0..8).map(|i| i >= 3).collect();
        let weights = vec![1.0; 8];
        let rows: Vec<usize> = (0..8).collect();
        let mut cfg = GrowConfig {
            criterion: Criterion::Entropy,
            max_features: 1,
            min_samples_leaf: 8,
            min_samples_split: 2,
            max_depth: None,
            thresholds: ThresholdRule::Midpoints,
            feature_rng: None,
        };
        let tree = grow_classification(&x, &y, &weights, &rows, &mut cfg);
        assert_eq!(tree.depth(), 0);
        // majority is malicious: 5 of 8
        assert!(tree.score(&[0.0]) > 0.5);
    }

    #[test]
    fn weighted_growth_matches_duplication() {
        // 2 malicious, 6 benign; balanced weights equal duplicating the
        // minority 3x with unit weights
        let x: Vec<Vec<f64>> = vec![
            vec![0.1],
            vec![0.4],
            vec![1.1],
            vec![1.3],
            vec![2.0],
            vec![2.2],
            vec![2.6],
            vec![3.0],
        ];
        let y = vec![true, true, false, false, false, false, false, false];
        let rows: Vec<usize> = (0..8).collect();
        let n = 8.0;
        let w_mal = n / (2.0 * 2.0);
        let w_ben = n / (2.0 * 6.0);
        let weights: Vec<f64> = y.iter().map(|&m| if m { w_mal } else { w_ben }).collect();
        let mut cfg = GrowConfig {
            criterion: Criterion::Entropy,
            max_features: 1,
            min_samples_leaf: 1,
            min_samples_split: 2,
            max_depth: None,
            thresholds: ThresholdRule::Midpoints,
            feature_rng: None,
        };
        let weighted = grow_classification(&x, &y, &weights, &rows, &mut cfg);

        // duplication oracle: each malicious row repeated 3x (ratio 6/2)
        let mut x2 = x.clone();
        let mut y2 = y.clone();
        for (row, &label) in x.iter().zip(&y) {
            if label {
                for _ in 0..2 {
                    x2.push(row.clone());
                    y2.push(true);
                }
            }
        }
        let rows2: Vec<usize> = (0..x2.len()).collect();
        let w2 = vec![1.0; x2.len()];
        let mut cfg2 = GrowConfig {
            criterion: Criterion::Entropy,
            max_features: 1,
            min_samples_leaf: 1,
            min_samples_split: 2,
            max_depth: None,
            thresholds: ThresholdRule::Midpoints,
            feature_rng: None,
        };
        let duplicated = grow_classification(&x2, &y2, &w2, &rows2, &mut cfg2);
        assert_eq!(weighted, duplicated);
    }

    #[test]
    fn regression_tree_splits_step_function() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let targets: Vec<f64> = (0..10).map(|i| if i < 5 { -1.0 } else { 2.0 }).collect();
        let rows: Vec<usize> = (0..10).collect();
        let mean = |ids: &[usize]| {
            ids.iter().map(|&r| targets[r]).sum::<f64>() / ids.len() as f64
        };
        let tree = grow_regression(&x, &targets, &rows, 3, 1, &mean);
        assert!((tree.score(&[2.0]) - -1.0).abs() < 1e-12);
        assert!((tree.score(&[7.0]) - 2.0).abs() < 1e-12);
    }
}
