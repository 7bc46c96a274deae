//! Self-contained supervised classifier suite: decision tree, random forest,
//! extra-trees, AdaBoost, gradient boosting, and a feed-forward network.
//!
//! Every fit is deterministic given (data, params, seed). Fitted models are
//! immutable, predict purely, and round-trip through a versioned JSON
//! document with bit-identical predictions.

pub mod boost;
pub mod forest;
pub mod mlp;
pub mod tree;

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

pub use boost::{AdaBoostModel, AdaParams, GboostModel, GboostParams};
pub use forest::{ForestMode, ForestModel};
pub use mlp::{MlpModel, MlpNet, MlpParams};
pub use tree::Criterion;

use crate::splits::LabeledDataset;
use crate::txio::Klass;

const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ModelsError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("training set contains a single class")]
    SingleClass,
    #[error("input has {got} features, model expects {want}")]
    DimensionMismatch { got: usize, want: usize },
    #[error("{field} must lie in (0, 1], got {value}")]
    BadFraction { field: &'static str, value: f64 },
    #[error("training diverged (non-finite loss) at epoch {epoch}, batch {batch}")]
    Diverged { epoch: usize, batch: usize },
    #[error("unsupported model file version {0}")]
    BadVersion(u32),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Dt,
    Rf,
    Etc,
    Adaboost,
    Gboost,
    Nn,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::Dt,
        ModelKind::Rf,
        ModelKind::Etc,
        ModelKind::Adaboost,
        ModelKind::Gboost,
        ModelKind::Nn,
    ];
}

impl std::str::FromStr for ModelKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dt" => Ok(ModelKind::Dt),
            "rf" => Ok(ModelKind::Rf),
            "etc" => Ok(ModelKind::Etc),
            "adaboost" => Ok(ModelKind::Adaboost),
            "gboost" => Ok(ModelKind::Gboost),
            "nn" => Ok(ModelKind::Nn),
            other => Err(format!("unknown model kind `{other}`")),
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ModelKind::Dt => "dt",
            ModelKind::Rf => "rf",
            ModelKind::Etc => "etc",
            ModelKind::Adaboost => "adaboost",
            ModelKind::Gboost => "gboost",
            ModelKind::Nn => "nn",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassWeight {
    None,
    Balanced,
}

/// Hyperparameters shared by the single tree and the tree ensembles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub criterion: Criterion,
    /// Fraction of features examined per node, in (0, 1].
    pub max_features: f64,
    pub min_samples_leaf: usize,
    pub min_samples_split: usize,
    pub n_estimators: usize,
    /// Fraction of rows drawn per ensemble member, in (0, 1].
    pub max_samples: f64,
    pub class_weight: ClassWeight,
    /// Bootstrap row sampling for the bagging forest; extra-trees always
    /// samples without replacement.
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            criterion: Criterion::Entropy,
            max_features: 0.3,
            min_samples_leaf: 14,
            min_samples_split: 20,
            n_estimators: 200,
            max_samples: 0.3,
            class_weight: ClassWeight::Balanced,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl TreeParams {
    pub fn validate(&self) -> Result<Vec<String>, ModelsError> {
        for (field, value) in [("max_features", self.max_features), ("max_samples", self.max_samples)] {
            if !(value > 0.0 && value <= 1.0) {
                return Err(ModelsError::BadFraction { field, value });
            }
        }
        let mut warnings = Vec::new();
        if self.min_samples_split < 2 * self.min_samples_leaf {
            warnings.push(format!(
                "min_samples_split ({}) below 2 * min_samples_leaf ({}); leaf rule dominates",
                self.min_samples_split, self.min_samples_leaf
            ));
        }
        Ok(warnings)
    }
}

/// The full hyperparameter bundle, one sub-struct per model family.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelParams {
    pub tree: TreeParams,
    pub ada: AdaParams,
    pub gboost: GboostParams,
    pub mlp: MlpParams,
}

/// Training metadata kept on every fitted model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub seed: u64,
    pub train_size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub klass: Klass,
    /// Malicious score in [0, 1].
    pub score: f64,
}

/// Score exactly 0.5 stays benign.
pub(crate) fn classify(score: f64) -> Prediction {
    Prediction {
        klass: if score > 0.5 {
            Klass::Malicious
        } else {
            Klass::Benign
        },
        score,
    }
}

/// An opaque fitted classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TrainedModel {
    Dt(tree::DecisionTreeModel),
    Forest(ForestModel),
    Ada(AdaBoostModel),
    Gboost(GboostModel),
    Nn(MlpModel),
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            TrainedModel::Dt(_) => ModelKind::Dt,
            TrainedModel::Forest(f) => match f.mode {
                ForestMode::BaggingRf => ModelKind::Rf,
                ForestMode::Extra => ModelKind::Etc,
            },
            TrainedModel::Ada(_) => ModelKind::Adaboost,
            TrainedModel::Gboost(_) => ModelKind::Gboost,
            TrainedModel::Nn(_) => ModelKind::Nn,
        }
    }

    pub fn feature_count(&self) -> usize {
        match self {
            TrainedModel::Dt(m) => m.dim,
            TrainedModel::Forest(m) => m.dim,
            TrainedModel::Ada(m) => m.dim,
            TrainedModel::Gboost(m) => m.dim,
            TrainedModel::Nn(m) => m.dim,
        }
    }

    /// Deterministic batch prediction; concatenating batches concatenates
    /// outputs.
    pub fn predict(&self, rows: &[Vec<f64>]) -> Result<Vec<Prediction>, ModelsError> {
        let want = self.feature_count();
        for row in rows {
            if row.len() != want {
                return Err(ModelsError::DimensionMismatch {
                    got: row.len(),
                    want,
                });
            }
        }
        Ok(match self {
            TrainedModel::Dt(m) => m.predict(rows),
            TrainedModel::Forest(m) => m.predict(rows),
            TrainedModel::Ada(m) => m.predict(rows),
            TrainedModel::Gboost(m) => m.predict(rows),
            TrainedModel::Nn(m) => m.predict(rows),
        })
    }

    pub fn save_json<W: Write>(&self, out: W) -> Result<(), ModelsError> {
        #[derive(Serialize)]
        struct ModelFile<'a> {
            format_version: u32,
            model: &'a TrainedModel,
        }
        serde_json::to_writer(
            out,
            &ModelFile {
                format_version: MODEL_FORMAT_VERSION,
                model: self,
            },
        )?;
        Ok(())
    }

    pub fn load_json<R: Read>(input: R) -> Result<TrainedModel, ModelsError> {
        #[derive(Deserialize)]
        struct ModelFile {
            format_version: u32,
            model: TrainedModel,
        }
        let file: ModelFile = serde_json::from_reader(input)?;
        if file.format_version != MODEL_FORMAT_VERSION {
            return Err(ModelsError::BadVersion(file.format_version));
        }
        Ok(file.model)
    }
}

/// Extract the design matrix and binary targets, rejecting degenerate sets.
pub(crate) fn design_matrix(
    train: &LabeledDataset,
) -> Result<(Vec<Vec<f64>>, Vec<bool>), ModelsError> {
    if train.is_empty() {
        return Err(ModelsError::EmptyTrainingSet);
    }
    let (mal, ben) = train.class_counts();
    if mal == 0 || ben == 0 {
        return Err(ModelsError::SingleClass);
    }
    let x: Vec<Vec<f64>> = train.rows().iter().map(|r| r.vector.values.clone()).collect();
    let y: Vec<bool> = train.rows().iter().map(|r| r.is_malicious()).collect();
    Ok((x, y))
}

pub(crate) fn sample_weights(y: &[bool], class_weight: ClassWeight) -> Vec<f64> {
    match class_weight {
        ClassWeight::None => vec![1.0; y.len()],
        ClassWeight::Balanced => {
            let n = y.len() as f64;
            let pos = y.iter().filter(|&&b| b).count() as f64;
            let w_pos = n / (2.0 * pos);
            let w_neg = n / (2.0 * (n - pos));
            y.iter().map(|&b| if b { w_pos } else { w_neg }).collect()
        }
    }
}

/// Fraction-of-dimension count, at least 1.
pub(crate) fn fraction_count(fraction: f64, total: usize) -> usize {
    ((fraction * total as f64).floor() as usize).clamp(1, total)
}

/// Fit one model kind with the bundled params, overriding its seed.
pub fn fit_model(
    kind: ModelKind,
    train: &LabeledDataset,
    params: &ModelParams,
    seed: u64,
) -> Result<TrainedModel, ModelsError> {
    match kind {
        ModelKind::Dt => {
            let p = TreeParams { seed, ..params.tree.clone() };
            tree::fit_tree(train, &p)
        }
        ModelKind::Rf => {
            let p = TreeParams { seed, ..params.tree.clone() };
            forest::fit_forest(train, &p, ForestMode::BaggingRf)
        }
        ModelKind::Etc => {
            let p = TreeParams { seed, ..params.tree.clone() };
            forest::fit_forest(train, &p, ForestMode::Extra)
        }
        ModelKind::Adaboost => boost::fit_adaboost(train, &params.ada),
        ModelKind::Gboost => boost::fit_gboost(train, &params.gboost),
        ModelKind::Nn => {
            let p = MlpParams { seed, ..params.mlp.clone() };
            mlp::fit_mlp(train, &p)
        }
    }
}
