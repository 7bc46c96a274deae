//! Boosting: discrete two-class AdaBoost over stumps and logistic-loss
//! gradient boosting over shallow regression trees.

use serde::{Deserialize, Serialize};

use super::tree::{grow_regression, TreeNode};
use super::{classify, design_matrix, ModelMeta, ModelsError, Prediction, TrainedModel};
use crate::num::sigmoid;
use crate::splits::LabeledDataset;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdaParams {
    pub rounds: usize,
}

impl Default for AdaParams {
    fn default() -> Self {
        AdaParams { rounds: 50 }
    }
}

/// Depth-1 weak learner: class decision on one feature threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    pub left_malicious: bool,
    pub right_malicious: bool,
}

impl Stump {
    fn predict(&self, row: &[f64]) -> bool {
        if row[self.feature] <= self.threshold {
            self.left_malicious
        } else {
            self.right_malicious
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaRound {
    pub stump: Stump,
    pub alpha: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostModel {
    pub rounds: Vec<AdaRound>,
    /// Train-set malicious fraction; used when no round survived.
    pub fallback_score: f64,
    pub dim: usize,
    pub meta: ModelMeta,
}

impl AdaBoostModel {
    /// Weighted vote fraction for the malicious side.
    pub fn predict(&self, rows: &[Vec<f64>]) -> Vec<Prediction> {
        rows.iter()
            .map(|row| {
                if self.rounds.is_empty() {
                    return classify(self.fallback_score);
                }
                let total: f64 = self.rounds.iter().map(|r| r.alpha).sum();
                let mal: f64 = self
                    .rounds
                    .iter()
                    .filter(|r| r.stump.predict(row))
                    .map(|r| r.alpha)
                    .sum();
                classify(mal / total)
            })
            .collect()
    }
}

/// Minimum-weighted-error stump; sides predict their weighted majority
/// (ties toward benign). Ties in error break toward the lowest feature
/// index, then lowest threshold.
fn best_stump(x: &[Vec<f64>], y: &[bool], weights: &[f64]) -> Option<(Stump, f64)> {
    let dim = x[0].len();
    let mut best: Option<(Stump, f64)> = None;
    for feature in 0..dim {
        let mut vals: Vec<(f64, f64, f64)> = x
            .iter()
            .zip(y)
            .zip(weights)
            .map(|((row, &label), &w)| {
                (row[feature], if label { w } else { 0.0 }, if label { 0.0 } else { w })
            })
            .collect();
        vals.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite features"));
        let total_pos: f64 = vals.iter().map(|v| v.1).sum();
        let total_neg: f64 = vals.iter().map(|v| v.2).sum();
        let mut left_pos = 0.0;
        let mut left_neg = 0.0;
        for i in 0..vals.len() - 1 {
            left_pos += vals[i].1;
            left_neg += vals[i].2;
            if vals[i + 1].0 <= vals[i].0 {
                continue;
            }
            let right_pos = total_pos - left_pos;
            let right_neg = total_neg - left_neg;
            let left_malicious = left_pos > left_neg;
            let right_malicious = right_pos > right_neg;
            let error = if left_malicious { left_neg } else { left_pos }
                + if right_malicious { right_neg } else { right_pos };
            if best.as_ref().is_none_or(|(_, e)| error < *e) {
                best = Some((
                    Stump {
                        feature,
                        threshold: (vals[i].0 + vals[i + 1].0) / 2.0,
                        left_malicious,
                        right_malicious,
                    },
                    error,
                ));
            }
        }
    }
    best
}

/// Discrete AdaBoost: round weight `alpha = ln((1 - eps) / eps) / 2`, early
/// stop at `eps >= 0.5` or a perfect round.
pub fn fit_adaboost(
    train: &LabeledDataset,
    params: &AdaParams,
) -> Result<TrainedModel, ModelsError> {
    let (x, y) = design_matrix(train)?;
    let n = x.len();
    let dim = x[0].len();
    let mut w = vec![1.0 / n as f64; n];
    let mut rounds = Vec::new();

    const EPS_FLOOR: f64 = 1e-10;
    for _ in 0..params.rounds {
        let Some((stump, epsilon)) = best_stump(&x, &y, &w) else {
            break;
        };
        if epsilon >= 0.5 {
            break;
        }
        if epsilon <= 0.0 {
            rounds.push(AdaRound {
                stump,
                alpha: 0.5 * ((1.0 - EPS_FLOOR) / EPS_FLOOR).ln(),
                epsilon: 0.0,
            });
            break;
        }
        let alpha = 0.5 * ((1.0 - epsilon) / epsilon).ln();
        // w_i <- w_i * exp(-alpha * y_i * h_i), renormalized
        let mut z = 0.0;
        for ((wi, row), &label) in w.iter_mut().zip(&x).zip(&y) {
            let agree = stump.predict(row) == label;
            *wi *= if agree { (-alpha).exp() } else { alpha.exp() };
            z += *wi;
        }
        for wi in &mut w {
            *wi /= z;
        }
        rounds.push(AdaRound {
            stump,
            alpha,
            epsilon,
        });
    }

    let fallback_score = y.iter().filter(|&&b| b).count() as f64 / n as f64;
    Ok(TrainedModel::Ada(AdaBoostModel {
        rounds,
        fallback_score,
        dim,
        meta: ModelMeta {
            seed: 0,
            train_size: n,
        },
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GboostParams {
    pub rounds: usize,
    pub learning_rate: f64,
    pub depth: usize,
    pub min_samples_leaf: usize,
}

impl Default for GboostParams {
    fn default() -> Self {
        GboostParams {
            rounds: 100,
            learning_rate: 0.1,
            depth: 3,
            min_samples_leaf: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GboostModel {
    /// Prior log-odds.
    pub f0: f64,
    pub learning_rate: f64,
    pub stages: Vec<TreeNode>,
    /// Train log-loss before boosting and after each stage.
    pub staged_train_loss: Vec<f64>,
    pub dim: usize,
    pub meta: ModelMeta,
}

impl GboostModel {
    fn raw(&self, row: &[f64]) -> f64 {
        self.f0
            + self.learning_rate
                * self.stages.iter().map(|s| s.score(row)).sum::<f64>()
    }

    pub fn predict(&self, rows: &[Vec<f64>]) -> Vec<Prediction> {
        rows.iter()
            .map(|row| classify(sigmoid(self.raw(row))))
            .collect()
    }
}

fn log_loss(raw: &[f64], y: &[bool]) -> f64 {
    raw.iter()
        .zip(y)
        .map(|(&z, &label)| {
            let t = if label { 1.0 } else { 0.0 };
            // numerically stable -[t ln p + (1-t) ln (1-p)]
            z.max(0.0) - z * t + (1.0 + (-z.abs()).exp()).ln()
        })
        .sum::<f64>()
        / raw.len() as f64
}

/// Logistic-loss gradient boosting: each round fits a regression tree to the
/// residual `y - sigmoid(F)`; leaf steps use the per-leaf Newton value
/// `sum(residual) / sum(p (1 - p))`.
pub fn fit_gboost(
    train: &LabeledDataset,
    params: &GboostParams,
) -> Result<TrainedModel, ModelsError> {
    let (x, y) = design_matrix(train)?;
    let n = x.len();
    let dim = x[0].len();
    let pos = y.iter().filter(|&&b| b).count() as f64 / n as f64;
    let f0 = (pos / (1.0 - pos)).ln();

    let mut raw = vec![f0; n];
    let mut staged_train_loss = vec![log_loss(&raw, &y)];
    let mut stages = Vec::with_capacity(params.rounds);
    let all_rows: Vec<usize> = (0..n).collect();

    for _ in 0..params.rounds {
        let p: Vec<f64> = raw.iter().map(|&z| sigmoid(z)).collect();
        let residuals: Vec<f64> = y
            .iter()
            .zip(&p)
            .map(|(&label, &pi)| if label { 1.0 - pi } else { -pi })
            .collect();
        let leaf_value = |ids: &[usize]| {
            let num: f64 = ids.iter().map(|&r| residuals[r]).sum();
            let den: f64 = ids.iter().map(|&r| p[r] * (1.0 - p[r])).sum();
            num / den.max(1e-12)
        };
        let stage = grow_regression(
            &x,
            &residuals,
            &all_rows,
            params.depth,
            params.min_samples_leaf,
            &leaf_value,
        );
        for (z, row) in raw.iter_mut().zip(&x) {
            *z += params.learning_rate * stage.score(row);
        }
        stages.push(stage);
        staged_train_loss.push(log_loss(&raw, &y));
    }

    Ok(TrainedModel::Gboost(GboostModel {
        f0,
        learning_rate: params.learning_rate,
        stages,
        staged_train_loss,
        dim,
        meta: ModelMeta {
            seed: 0,
            train_size: n,
        },
    }))
}
