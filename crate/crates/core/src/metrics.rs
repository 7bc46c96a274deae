//! Scoring: per-class recall, balanced accuracy, per-activity confusion
//! breakdown, and multi-repeat experiment averaging.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::models::{fit_model, ModelKind, ModelParams, Prediction};
use crate::num::child_seed_index;
use crate::splits::{
    derive_config, make_c0, make_c5, LabeledDataset, SplitConfig, SplitPair, SplitsError,
};
use crate::txio::Klass;

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("predictions ({predictions}) and truth ({truth}) differ in length")]
    LengthMismatch { predictions: usize, truth: usize },
    #[error("repeat {repeat} failed: {source}")]
    RepeatFailed {
        repeat: usize,
        #[source]
        source: Box<dyn std::error::Error + Send + Sync>,
    },
    #[error(transparent)]
    Splits(#[from] SplitsError),
}

/// Confusion counts and recalls; malicious is the positive class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionReport {
    pub tp: f64,
    pub fp: f64,
    pub tn: f64,
    pub fn_: f64,
    /// Absent when the test side carries no malicious (resp. benign) rows.
    pub recall_mal: Option<f64>,
    pub recall_ben: Option<f64>,
    pub balanced_accuracy: Option<f64>,
    /// activity -> (total, correctly classified) on the test side.
    pub per_activity: BTreeMap<String, (f64, f64)>,
    pub repeats: usize,
    /// Per-metric standard deviation across repeats (populated by
    /// `run_experiment`): keys recall_mal, recall_ben, balanced_accuracy.
    pub dispersion: BTreeMap<String, f64>,
}

/// Exact confusion counts for one prediction batch.
pub fn score(
    predictions: &[Prediction],
    truth: &[(Klass, String)],
) -> Result<ConfusionReport, MetricsError> {
    if predictions.len() != truth.len() {
        return Err(MetricsError::LengthMismatch {
            predictions: predictions.len(),
            truth: truth.len(),
        });
    }
    let mut tp = 0u64;
    let mut fp = 0u64;
    let mut tn = 0u64;
    let mut fn_ = 0u64;
    let mut per_activity: BTreeMap<String, (f64, f64)> = BTreeMap::new();
    for (pred, (klass, activity)) in predictions.iter().zip(truth) {
        let correct = pred.klass == *klass;
        match (klass, pred.klass) {
            (Klass::Malicious, Klass::Malicious) => tp += 1,
            (Klass::Malicious, Klass::Benign) => fn_ += 1,
            (Klass::Benign, Klass::Benign) => tn += 1,
            (Klass::Benign, Klass::Malicious) => fp += 1,
        }
        let slot = per_activity.entry(activity.clone()).or_insert((0.0, 0.0));
        slot.0 += 1.0;
        if correct {
            slot.1 += 1.0;
        }
    }
    let ratio = |num: u64, den: u64| {
        if den == 0 {
            None
        } else {
            Some(num as f64 / den as f64)
        }
    };
    let recall_mal = ratio(tp, tp + fn_);
    let recall_ben = ratio(tn, tn + fp);
    let balanced_accuracy = match (recall_mal, recall_ben) {
        (Some(m), Some(b)) => Some((m + b) / 2.0),
        _ => None,
    };
    Ok(ConfusionReport {
        tp: tp as f64,
        fp: fp as f64,
        tn: tn as f64,
        fn_: fn_ as f64,
        recall_mal,
        recall_ben,
        balanced_accuracy,
        per_activity,
        repeats: 1,
        dispersion: BTreeMap::new(),
    })
}

/// Score a fitted model against a split's test side.
pub fn score_split(
    model: &crate::models::TrainedModel,
    split: &SplitPair,
) -> Result<ConfusionReport, MetricsError> {
    let rows: Vec<Vec<f64>> = split
        .test
        .rows()
        .iter()
        .map(|r| r.vector.values.clone())
        .collect();
    let truth: Vec<(Klass, String)> = split
        .test
        .rows()
        .iter()
        .map(|r| (r.klass, r.activity.clone()))
        .collect();
    let predictions = model.predict(&rows).map_err(|e| MetricsError::RepeatFailed {
        repeat: 0,
        source: Box::new(e),
    })?;
    score(&predictions, &truth)
}

/// Which split each experiment repeat builds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SplitSpec {
    C0,
    C5,
    Derived {
        config: SplitConfig,
        focus_activity: String,
    },
}

impl SplitSpec {
    pub fn build(&self, dataset: &LabeledDataset, seed: u64) -> Result<SplitPair, SplitsError> {
        match self {
            SplitSpec::C0 => make_c0(dataset, seed),
            SplitSpec::C5 => make_c5(dataset, seed),
            SplitSpec::Derived {
                config,
                focus_activity,
            } => {
                let base = make_c0(dataset, seed)?;
                derive_config(&base, *config, focus_activity)
            }
        }
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    (crate::num::mean(values), crate::num::pop_std(values))
}

/// Repeat split+fit+score with per-repeat seeds `base_seed + i`, averaging
/// the metrics and reporting their dispersion.
pub fn run_experiment(
    dataset: &LabeledDataset,
    split: &SplitSpec,
    kind: ModelKind,
    params: &ModelParams,
    repeats: usize,
    base_seed: u64,
) -> Result<ConfusionReport, MetricsError> {
    assert!(repeats >= 1, "at least one repeat");
    let mut reports = Vec::with_capacity(repeats);
    for i in 0..repeats {
        let seed = base_seed + i as u64;
        let pair = split
            .build(dataset, seed)
            .map_err(|e| MetricsError::RepeatFailed {
                repeat: i,
                source: Box::new(e),
            })?;
        let model = fit_model(kind, &pair.train, params, child_seed_index(seed, 1))
            .map_err(|e| MetricsError::RepeatFailed {
                repeat: i,
                source: Box::new(e),
            })?;
        reports.push(score_split(&model, &pair).map_err(|e| MetricsError::RepeatFailed {
            repeat: i,
            source: Box::new(e),
        })?);
    }
    Ok(aggregate(&reports))
}

/// Average a set of single-run reports; optional metrics average over the
/// repeats where they were defined.
pub fn aggregate(reports: &[ConfusionReport]) -> ConfusionReport {
    let n = reports.len() as f64;
    let avg = |f: &dyn Fn(&ConfusionReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
    let avg_opt = |f: &dyn Fn(&ConfusionReport) -> Option<f64>| {
        let defined: Vec<f64> = reports.iter().filter_map(f).collect();
        if defined.is_empty() {
            None
        } else {
            Some(crate::num::mean(&defined))
        }
    };

    let mut per_activity: BTreeMap<String, (f64, f64)> = BTreeMap::new();
    for report in reports {
        for (activity, (total, correct)) in &report.per_activity {
            let slot = per_activity.entry(activity.clone()).or_insert((0.0, 0.0));
            slot.0 += total / n;
            slot.1 += correct / n;
        }
    }

    let mut dispersion = BTreeMap::new();
    let collect = |f: &dyn Fn(&ConfusionReport) -> Option<f64>| -> Vec<f64> {
        reports.iter().filter_map(f).collect()
    };
    for (name, values) in [
        ("recall_mal", collect(&|r| r.recall_mal)),
        ("recall_ben", collect(&|r| r.recall_ben)),
        ("balanced_accuracy", collect(&|r| r.balanced_accuracy)),
    ] {
        if !values.is_empty() {
            dispersion.insert(name.to_string(), mean_std(&values).1);
        }
    }

    ConfusionReport {
        tp: avg(&|r| r.tp),
        fp: avg(&|r| r.fp),
        tn: avg(&|r| r.tn),
        fn_: avg(&|r| r.fn_),
        recall_mal: avg_opt(&|r| r.recall_mal),
        recall_ben: avg_opt(&|r| r.recall_ben),
        balanced_accuracy: avg_opt(&|r| r.balanced_accuracy),
        per_activity,
        repeats: reports.len(),
        dispersion,
    }
}

/// Round per-activity averages to two decimals for table emission.
pub fn rounded_per_activity(report: &ConfusionReport) -> BTreeMap<String, (f64, f64)> {
    report
        .per_activity
        .iter()
        .map(|(k, (t, c))| {
            (
                k.clone(),
                ((t * 100.0).round() / 100.0, (c * 100.0).round() / 100.0),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Prediction;

    fn pred(mal: bool) -> Prediction {
        Prediction {
            klass: if mal { Klass::Malicious } else { Klass::Benign },
            score: if mal { 0.9 } else { 0.1 },
        }
    }

    #[test]
    fn all_correct_gives_unit_recalls() {
        let truth = vec![
            (Klass::Malicious, "Phishing".to_string()),
            (Klass::Benign, "benign".to_string()),
        ];
        let preds = vec![pred(true), pred(false)];
        let r = score(&preds, &truth).unwrap();
        assert_eq!(r.recall_mal, Some(1.0));
        assert_eq!(r.recall_ben, Some(1.0));
        assert_eq!(r.balanced_accuracy, Some(1.0));
    }

    #[test]
    fn all_malicious_missed() {
        let truth = vec![
            (Klass::Malicious, "Phishing".to_string()),
            (Klass::Malicious, "Scamming".to_string()),
            (Klass::Benign, "benign".to_string()),
        ];
        let preds = vec![pred(false), pred(false), pred(false)];
        let r = score(&preds, &truth).unwrap();
        assert_eq!(r.recall_mal, Some(0.0));
        assert_eq!(r.recall_ben, Some(1.0));
        assert_eq!(r.per_activity["Phishing"], (1.0, 0.0));
    }

    #[test]
    fn hand_arithmetic_example() {
        let mut preds = Vec::new();
        let mut truth = Vec::new();
        for _ in 0..3 {
            preds.push(pred(true));
            truth.push((Klass::Malicious, "Phishing".to_string()));
        }
        truth.push((Klass::Malicious, "Phishing".to_string()));
        preds.push(pred(false)); // fn
        for _ in 0..90 {
            preds.push(pred(false));
            truth.push((Klass::Benign, "benign".to_string()));
        }
        for _ in 0..10 {
            preds.push(pred(true)); // fp
            truth.push((Klass::Benign, "benign".to_string()));
        }
        let r = score(&preds, &truth).unwrap();
        assert_eq!(r.recall_mal, Some(0.75));
        assert_eq!(r.recall_ben, Some(0.9));
        assert_eq!(r.balanced_accuracy, Some(0.825));
        assert_eq!(r.tp + r.fp + r.tn + r.fn_, 104.0);
    }

    #[test]
    fn empty_class_reported_absent() {
        let truth = vec![(Klass::Benign, "benign".to_string())];
        let preds = vec![pred(false)];
        let r = score(&preds, &truth).unwrap();
        assert_eq!(r.recall_mal, None);
        assert_eq!(r.balanced_accuracy, None);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let truth = vec![(Klass::Benign, "benign".to_string())];
        assert!(matches!(
            score(&[], &truth),
            Err(MetricsError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn class_relabel_symmetry() {
        // swapping positive/negative swaps the two recalls
        let truth = vec![
            (Klass::Malicious, "Phishing".to_string()),
            (Klass::Malicious, "Phishing".to_string()),
            (Klass::Benign, "benign".to_string()),
        ];
        let preds = vec![pred(true), pred(false), pred(false)];
        let r = score(&preds, &truth).unwrap();

        let flipped_truth: Vec<(Klass, String)> = truth
            .iter()
            .map(|(k, a)| {
                let k = match k {
                    Klass::Malicious => Klass::Benign,
                    Klass::Benign => Klass::Malicious,
                };
                (k, a.clone())
            })
            .collect();
        let flipped_preds: Vec<Prediction> = preds
            .iter()
            .map(|p| pred(p.klass == Klass::Benign))
            .collect();
        let f = score(&flipped_preds, &flipped_truth).unwrap();
        assert_eq!(r.recall_mal, f.recall_ben);
        assert_eq!(r.recall_ben, f.recall_mal);
        assert_eq!(r.balanced_accuracy, f.balanced_accuracy);
    }

    #[test]
    fn aggregate_of_one_is_identity() {
        let truth = vec![
            (Klass::Malicious, "Phishing".to_string()),
            (Klass::Benign, "benign".to_string()),
        ];
        let r = score(&[pred(true), pred(false)], &truth).unwrap();
        let agg = aggregate(std::slice::from_ref(&r));
        assert_eq!(agg.recall_mal, r.recall_mal);
        assert_eq!(agg.per_activity, r.per_activity);
    }

    #[test]
    fn aggregate_averages_recalls_exactly() {
        let mk = |mal_recall: f64| ConfusionReport {
            tp: mal_recall,
            fp: 0.0,
            tn: 1.0,
            fn_: 1.0 - mal_recall,
            recall_mal: Some(mal_recall),
            recall_ben: Some(1.0),
            balanced_accuracy: Some((mal_recall + 1.0) / 2.0),
            per_activity: BTreeMap::new(),
            repeats: 1,
            dispersion: BTreeMap::new(),
        };
        let agg = aggregate(&[mk(0.5), mk(1.0)]);
        assert!((agg.recall_mal.unwrap() - 0.75).abs() < 1e-12);
        assert_eq!(agg.repeats, 2);
        assert!(agg.dispersion["recall_mal"] > 0.0);
    }
}
