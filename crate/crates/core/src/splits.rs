//! Labeled feature datasets and the C0-C5 train/test split protocol.
//!
//! C0 is the class-agnostic 80/20 baseline. C1-C4 manipulate one focus
//! activity around a C0 base split; C5 stratifies the 80/20 split per
//! activity. `make_newdata_eval` rebuilds the baseline for scoring freshly
//! observed malicious accounts without training leakage.

use std::collections::BTreeSet;
use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::features::FeatureVector;
use crate::txio::{AccountLabel, Address, Klass, LabelSource};

#[derive(Debug, thiserror::Error)]
pub enum SplitsError {
    #[error("dataset has {0} rows; at least 5 are required")]
    TooSmall(usize),
    #[error("dataset must contain both classes")]
    SingleClass,
    #[error("focus activity `{0}` not present in the dataset")]
    UnknownFocus(String),
    #[error("derived configs build on a C0 base split, got {0}")]
    BaseNotC0(SplitConfig),
    #[error("{0} cannot be built by derive_config")]
    InvalidDerivation(SplitConfig),
    #[error("new-data dataset is empty")]
    EmptyNewData,
    #[error("duplicate row for address {address} from source {origin}")]
    DuplicateRow { address: Address, origin: LabelSource },
    #[error("feature row for {0} has no label")]
    MissingLabel(Address),
    #[error("no feature row found for {0}")]
    MissingFeatures(Address),
    #[error("benign row {0} carries activity `{1}`")]
    BenignActivity(Address, String),
    #[error(transparent)]
    Features(#[from] crate::features::FeaturesError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// One labeled feature row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledRow {
    pub vector: FeatureVector,
    pub klass: Klass,
    pub activity: String,
    pub source: LabelSource,
}

impl LabeledRow {
    pub fn address(&self) -> &Address {
        &self.vector.address
    }

    pub fn is_malicious(&self) -> bool {
        self.klass == Klass::Malicious
    }
}

/// Feature vectors with class and activity tags.
///
/// Rows are unique by `(address, source)`; the same account may legitimately
/// appear once per collection in mixed evaluation sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    rows: Vec<LabeledRow>,
    pub provenance: LabelSource,
}

impl LabeledDataset {
    pub fn new(rows: Vec<LabeledRow>, provenance: LabelSource) -> Result<Self, SplitsError> {
        let mut seen = BTreeSet::new();
        for row in &rows {
            if row.klass == Klass::Benign && row.activity != "benign" {
                return Err(SplitsError::BenignActivity(
                    row.address().clone(),
                    row.activity.clone(),
                ));
            }
            if !seen.insert((row.address().clone(), row.source)) {
                return Err(SplitsError::DuplicateRow {
                    address: row.address().clone(),
                    origin: row.source,
                });
            }
        }
        Ok(LabeledDataset { rows, provenance })
    }

    pub fn rows(&self) -> &[LabeledRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// (malicious, benign) row counts.
    pub fn class_counts(&self) -> (usize, usize) {
        let mal = self.rows.iter().filter(|r| r.is_malicious()).count();
        (mal, self.rows.len() - mal)
    }

    /// Distinct malicious activities, sorted.
    pub fn activities(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self
            .rows
            .iter()
            .filter(|r| r.is_malicious())
            .map(|r| r.activity.as_str())
            .collect();
        set.into_iter().map(str::to_string).collect()
    }

    pub fn count_activity(&self, activity: &str) -> usize {
        self.rows.iter().filter(|r| r.activity == activity).count()
    }

    pub fn filter(&self, keep: impl Fn(&LabeledRow) -> bool) -> LabeledDataset {
        LabeledDataset {
            rows: self.rows.iter().filter(|r| keep(r)).cloned().collect(),
            provenance: self.provenance,
        }
    }

    pub fn addresses(&self) -> BTreeSet<Address> {
        self.rows.iter().map(|r| r.address().clone()).collect()
    }
}

/// Join a feature matrix with its label map; every feature row must be
/// labeled and every label must have features.
pub fn join_features_labels(
    mut features: Vec<FeatureVector>,
    labels: &std::collections::BTreeMap<Address, AccountLabel>,
    provenance: LabelSource,
) -> Result<LabeledDataset, SplitsError> {
    features.sort_by(|a, b| a.address.cmp(&b.address));
    let mut rows = Vec::with_capacity(features.len());
    for vector in features {
        let label = labels
            .get(&vector.address)
            .ok_or_else(|| SplitsError::MissingLabel(vector.address.clone()))?;
        rows.push(LabeledRow {
            vector,
            klass: label.klass,
            activity: label.activity.clone(),
            source: label.source,
        });
    }
    if rows.len() != labels.len() {
        let have: BTreeSet<&Address> = rows.iter().map(|r| r.address()).collect();
        let missing = labels
            .keys()
            .find(|a| !have.contains(a))
            .expect("some label lacks features");
        return Err(SplitsError::MissingFeatures(missing.clone()));
    }
    LabeledDataset::new(rows, provenance)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitConfig {
    C0,
    C1,
    C2,
    C3,
    C4,
    C5,
    /// Baseline retrained for newly observed malicious accounts.
    NewData,
}

impl std::str::FromStr for SplitConfig {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "C0" => Ok(SplitConfig::C0),
            "C1" => Ok(SplitConfig::C1),
            "C2" => Ok(SplitConfig::C2),
            "C3" => Ok(SplitConfig::C3),
            "C4" => Ok(SplitConfig::C4),
            "C5" => Ok(SplitConfig::C5),
            "NEWDATA" => Ok(SplitConfig::NewData),
            other => Err(format!("unknown split config `{other}`")),
        }
    }
}

impl std::fmt::Display for SplitConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SplitConfig::C0 => "C0",
            SplitConfig::C1 => "C1",
            SplitConfig::C2 => "C2",
            SplitConfig::C3 => "C3",
            SplitConfig::C4 => "C4",
            SplitConfig::C5 => "C5",
            SplitConfig::NewData => "newdata",
        };
        f.write_str(s)
    }
}

/// A train/test pair under one split configuration.
#[derive(Debug, Clone)]
pub struct SplitPair {
    pub config: SplitConfig,
    pub focus_activity: Option<String>,
    pub train: LabeledDataset,
    pub test: LabeledDataset,
    pub seed: u64,
}

fn shuffled_indices(n: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    idx.shuffle(&mut rng);
    idx
}

fn take_rows(dataset: &LabeledDataset, keep: &BTreeSet<usize>) -> LabeledDataset {
    LabeledDataset {
        rows: dataset
            .rows()
            .iter()
            .enumerate()
            .filter(|(i, _)| keep.contains(i))
            .map(|(_, r)| r.clone())
            .collect(),
        provenance: dataset.provenance,
    }
}

/// Class-agnostic uniform 80/20 split; the train side holds
/// `floor(0.8 * n)` rows.
pub fn make_c0(dataset: &LabeledDataset, seed: u64) -> Result<SplitPair, SplitsError> {
    if dataset.len() < 5 {
        return Err(SplitsError::TooSmall(dataset.len()));
    }
    let (mal, ben) = dataset.class_counts();
    if mal == 0 || ben == 0 {
        return Err(SplitsError::SingleClass);
    }
    let order = shuffled_indices(dataset.len(), seed);
    let train_n = dataset.len() * 4 / 5;
    let train_set: BTreeSet<usize> = order[..train_n].iter().copied().collect();
    let test_set: BTreeSet<usize> = order[train_n..].iter().copied().collect();
    Ok(SplitPair {
        config: SplitConfig::C0,
        focus_activity: None,
        train: take_rows(dataset, &train_set),
        test: take_rows(dataset, &test_set),
        seed,
    })
}

/// Derive C1-C4 from a C0 base split by dropping or moving the focus
/// activity's rows:
///
/// - C1: test loses the focus activity, train unchanged
/// - C2: train loses every focus-activity row, test unchanged
/// - C3: both sides lose the focus activity
/// - C4: train additionally absorbs the base test side's focus rows,
///   test loses them
pub fn derive_config(
    base: &SplitPair,
    config: SplitConfig,
    focus_activity: &str,
) -> Result<SplitPair, SplitsError> {
    if base.config != SplitConfig::C0 {
        return Err(SplitsError::BaseNotC0(base.config));
    }
    let present =
        base.train.count_activity(focus_activity) + base.test.count_activity(focus_activity);
    if present == 0 {
        return Err(SplitsError::UnknownFocus(focus_activity.to_string()));
    }
    let not_focus = |r: &LabeledRow| r.activity != focus_activity;
    let (train, test) = match config {
        SplitConfig::C1 => (base.train.clone(), base.test.filter(not_focus)),
        SplitConfig::C2 => (base.train.filter(not_focus), base.test.clone()),
        SplitConfig::C3 => (base.train.filter(not_focus), base.test.filter(not_focus)),
        SplitConfig::C4 => {
            let mut rows = base.train.rows().to_vec();
            rows.extend(
                base.test
                    .rows()
                    .iter()
                    .filter(|r| r.activity == focus_activity)
                    .cloned(),
            );
            let train = LabeledDataset::new(rows, base.train.provenance)?;
            (train, base.test.filter(not_focus))
        }
        other => return Err(SplitsError::InvalidDerivation(other)),
    };
    Ok(SplitPair {
        config,
        focus_activity: Some(focus_activity.to_string()),
        train,
        test,
        seed: base.seed,
    })
}

/// Stratified 80/20: each malicious activity and the benign pool split
/// separately, with the ceiling on the train side so singleton activities
/// land in training.
pub fn make_c5(dataset: &LabeledDataset, seed: u64) -> Result<SplitPair, SplitsError> {
    if dataset.len() < 5 {
        return Err(SplitsError::TooSmall(dataset.len()));
    }
    let (mal, ben) = dataset.class_counts();
    if mal == 0 || ben == 0 {
        return Err(SplitsError::SingleClass);
    }

    let mut strata: Vec<String> = dataset.activities();
    strata.push("benign".to_string());

    let mut train_idx: BTreeSet<usize> = BTreeSet::new();
    let mut test_idx: BTreeSet<usize> = BTreeSet::new();
    for (stratum_no, activity) in strata.iter().enumerate() {
        let members: Vec<usize> = dataset
            .rows()
            .iter()
            .enumerate()
            .filter(|(_, r)| &r.activity == activity)
            .map(|(i, _)| i)
            .collect();
        let order = shuffled_indices(
            members.len(),
            crate::num::child_seed_index(seed, stratum_no as u64),
        );
        let train_n = (members.len() * 4).div_ceil(5);
        for (rank, &pos) in order.iter().enumerate() {
            if rank < train_n {
                train_idx.insert(members[pos]);
            } else {
                test_idx.insert(members[pos]);
            }
        }
    }

    Ok(SplitPair {
        config: SplitConfig::C5,
        focus_activity: None,
        train: take_rows(dataset, &train_idx),
        test: take_rows(dataset, &test_idx),
        seed,
    })
}

/// Rebuild the baseline for newly observed malicious accounts: accounts
/// shared between the training side and the new collection move to the test
/// side, and the test side becomes the benign baseline rows plus the whole
/// new collection.
pub fn make_newdata_eval(
    base: &SplitPair,
    new_malicious: &LabeledDataset,
) -> Result<SplitPair, SplitsError> {
    if base.config != SplitConfig::C0 {
        return Err(SplitsError::BaseNotC0(base.config));
    }
    if new_malicious.is_empty() {
        return Err(SplitsError::EmptyNewData);
    }
    let new_addresses = new_malicious.addresses();
    let overlap = |r: &LabeledRow| new_addresses.contains(r.address());

    let train = base.train.filter(|r| !overlap(r));
    let mut test_rows: Vec<LabeledRow> = base
        .test
        .rows()
        .iter()
        .filter(|r| !r.is_malicious())
        .cloned()
        .collect();
    test_rows.extend(base.train.rows().iter().filter(|r| overlap(r)).cloned());
    test_rows.extend(new_malicious.rows().iter().cloned());

    let test = LabeledDataset::new(test_rows, new_malicious.provenance)?;
    Ok(SplitPair {
        config: SplitConfig::NewData,
        focus_activity: None,
        train,
        test,
        seed: base.seed,
    })
}

/// Persistable record of a split: address lists, not row copies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub config: SplitConfig,
    pub focus_activity: Option<String>,
    pub seed: u64,
    pub train: Vec<ManifestEntry>,
    pub test: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub address: Address,
    pub source: LabelSource,
}

impl SplitPair {
    pub fn manifest(&self) -> SplitManifest {
        let entries = |d: &LabeledDataset| {
            d.rows()
                .iter()
                .map(|r| ManifestEntry {
                    address: r.address().clone(),
                    source: r.source,
                })
                .collect()
        };
        SplitManifest {
            config: self.config,
            focus_activity: self.focus_activity.clone(),
            seed: self.seed,
            train: entries(&self.train),
            test: entries(&self.test),
        }
    }
}

impl SplitManifest {
    pub fn write_json<W: Write>(&self, out: W) -> Result<(), SplitsError> {
        serde_json::to_writer_pretty(out, self).map_err(std::io::Error::other)?;
        Ok(())
    }

    pub fn read_json<R: Read>(input: R) -> Result<SplitManifest, SplitsError> {
        Ok(serde_json::from_reader(input).map_err(std::io::Error::other)?)
    }

    /// Rebuild the split pair by looking rows up by (address, source) across
    /// the given datasets.
    pub fn materialize(&self, datasets: &[&LabeledDataset]) -> Result<SplitPair, SplitsError> {
        let lookup = |entry: &ManifestEntry| -> Result<LabeledRow, SplitsError> {
            for d in datasets {
                if let Some(row) = d
                    .rows()
                    .iter()
                    .find(|r| r.address() == &entry.address && r.source == entry.source)
                {
                    return Ok(row.clone());
                }
            }
            Err(SplitsError::MissingFeatures(entry.address.clone()))
        };
        let train: Vec<LabeledRow> = self.train.iter().map(&lookup).collect::<Result<_, _>>()?;
        let test: Vec<LabeledRow> = self.test.iter().map(&lookup).collect::<Result<_, _>>()?;
        let provenance = datasets
            .first()
            .map(|d| d.provenance)
            .unwrap_or(LabelSource::Da);
        Ok(SplitPair {
            config: self.config,
            focus_activity: self.focus_activity.clone(),
            train: LabeledDataset::new(train, provenance)?,
            test: LabeledDataset::new(test, provenance)?,
            seed: self.seed,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FEATURE_COUNT;

    pub(crate) fn row(tag: u32, klass: Klass, activity: &str, source: LabelSource) -> LabeledRow {
        let address = Address::parse(&format!("0x{:040x}", tag)).unwrap();
        let mut values = vec![0.0; FEATURE_COUNT];
        values[0] = tag as f64;
        LabeledRow {
            vector: FeatureVector::new(address, values),
            klass,
            activity: activity.to_string(),
            source,
        }
    }

    fn dataset(mal: &[(&str, u32)], benign: u32) -> LabeledDataset {
        let mut rows = Vec::new();
        let mut tag = 1u32;
        for &(activity, count) in mal {
            for _ in 0..count {
                rows.push(row(tag, Klass::Malicious, activity, LabelSource::Da));
                tag += 1;
            }
        }
        for _ in 0..benign {
            rows.push(row(tag, Klass::Benign, "benign", LabelSource::Da));
            tag += 1;
        }
        LabeledDataset::new(rows, LabelSource::Da).unwrap()
    }

    #[test]
    fn c0_is_an_80_20_partition() {
        let d = dataset(&[("Phishing", 30)], 70);
        let split = make_c0(&d, 7).unwrap();
        assert_eq!(split.train.len(), 80);
        assert_eq!(split.test.len(), 20);
        let mut union = split.train.addresses();
        union.extend(split.test.addresses());
        assert_eq!(union, d.addresses());
        assert!(split.train.addresses().is_disjoint(&split.test.addresses()));
    }

    #[test]
    fn c0_is_deterministic() {
        let d = dataset(&[("Phishing", 10)], 40);
        let a = make_c0(&d, 99).unwrap();
        let b = make_c0(&d, 99).unwrap();
        assert_eq!(a.train.rows(), b.train.rows());
        assert_eq!(a.test.rows(), b.test.rows());
        let c = make_c0(&d, 100).unwrap();
        assert_ne!(a.train.rows(), c.train.rows());
    }

    #[test]
    fn c0_preconditions() {
        let tiny = dataset(&[("Phishing", 1)], 3);
        assert!(matches!(make_c0(&tiny, 1), Err(SplitsError::TooSmall(4))));
        let single = dataset(&[("Phishing", 8)], 0);
        assert!(matches!(make_c0(&single, 1), Err(SplitsError::SingleClass)));
    }

    #[test]
    fn derived_configs_move_focus_rows() {
        let d = dataset(&[("Phishing", 40), ("Scamming", 10)], 50);
        let base = make_c0(&d, 3).unwrap();
        let focus_in_test = base.test.count_activity("Phishing");
        let focus_in_train = base.train.count_activity("Phishing");
        assert!(focus_in_test > 0 && focus_in_train > 0, "seed must scatter focus rows");

        let c1 = derive_config(&base, SplitConfig::C1, "Phishing").unwrap();
        assert_eq!(c1.train.rows(), base.train.rows());
        assert_eq!(c1.test.count_activity("Phishing"), 0);
        assert_eq!(c1.test.len(), base.test.len() - focus_in_test);

        let c2 = derive_config(&base, SplitConfig::C2, "Phishing").unwrap();
        assert_eq!(c2.train.count_activity("Phishing"), 0);
        assert_eq!(c2.test.rows(), base.test.rows());

        let c3 = derive_config(&base, SplitConfig::C3, "Phishing").unwrap();
        assert_eq!(c3.train.rows(), c2.train.rows());
        assert_eq!(c3.test.rows(), c1.test.rows());

        let c4 = derive_config(&base, SplitConfig::C4, "Phishing").unwrap();
        assert_eq!(c4.train.len(), base.train.len() + focus_in_test);
        assert_eq!(c4.test.count_activity("Phishing"), 0);
        assert!(c4.train.addresses().is_disjoint(&c4.test.addresses()));
    }

    #[test]
    fn derive_rejects_bad_inputs() {
        let d = dataset(&[("Phishing", 10)], 30);
        let base = make_c0(&d, 3).unwrap();
        assert!(matches!(
            derive_config(&base, SplitConfig::C1, "Nope"),
            Err(SplitsError::UnknownFocus(_))
        ));
        assert!(matches!(
            derive_config(&base, SplitConfig::C5, "Phishing"),
            Err(SplitsError::InvalidDerivation(SplitConfig::C5))
        ));
        let c1 = derive_config(&base, SplitConfig::C1, "Phishing").unwrap();
        assert!(matches!(
            derive_config(&c1, SplitConfig::C2, "Phishing"),
            Err(SplitsError::BaseNotC0(SplitConfig::C1))
        ));
    }

    #[test]
    fn c5_stratifies_with_train_ceiling() {
        let d = dataset(&[("Phishing", 5), ("Scam", 1), ("Upbit Hack", 10)], 20);
        let split = make_c5(&d, 11).unwrap();
        assert_eq!(split.train.count_activity("Phishing"), 4);
        assert_eq!(split.test.count_activity("Phishing"), 1);
        // singleton activity lands entirely in training
        assert_eq!(split.train.count_activity("Scam"), 1);
        assert_eq!(split.test.count_activity("Scam"), 0);
        assert_eq!(split.train.count_activity("Upbit Hack"), 8);
        assert_eq!(split.train.count_activity("benign"), 16);
        assert!(split.train.addresses().is_disjoint(&split.test.addresses()));
    }

    #[test]
    fn newdata_eval_moves_overlap() {
        let d = dataset(&[("Phishing", 20)], 40);
        let base = make_c0(&d, 5).unwrap();

        // new collection: 3 accounts overlapping train + 4 brand new
        let overlap: Vec<LabeledRow> = base
            .train
            .rows()
            .iter()
            .filter(|r| r.is_malicious())
            .take(3)
            .cloned()
            .collect();
        assert_eq!(overlap.len(), 3);
        let mut db_rows: Vec<LabeledRow> = overlap
            .iter()
            .map(|r| LabeledRow {
                source: LabelSource::Db,
                ..r.clone()
            })
            .collect();
        for i in 0..4u32 {
            db_rows.push(row(9000 + i, Klass::Malicious, "Upbit Hack", LabelSource::Db));
        }
        let db = LabeledDataset::new(db_rows, LabelSource::Db).unwrap();

        let eval = make_newdata_eval(&base, &db).unwrap();
        assert_eq!(eval.train.len(), base.train.len() - 3);
        let benign_in_test = base.test.rows().iter().filter(|r| !r.is_malicious()).count();
        assert_eq!(eval.test.len(), benign_in_test + 3 + db.len());
        assert!(eval.train.addresses().is_disjoint(&eval.test.addresses()));
    }

    #[test]
    fn newdata_zero_overlap_keeps_train() {
        let d = dataset(&[("Phishing", 20)], 40);
        let base = make_c0(&d, 5).unwrap();
        let db = LabeledDataset::new(
            (0..5u32)
                .map(|i| row(8000 + i, Klass::Malicious, "Ponzi", LabelSource::Db))
                .collect(),
            LabelSource::Db,
        )
        .unwrap();
        let eval = make_newdata_eval(&base, &db).unwrap();
        assert_eq!(eval.train.rows(), base.train.rows());
        let benign_in_test = base.test.rows().iter().filter(|r| !r.is_malicious()).count();
        assert_eq!(eval.test.len(), benign_in_test + 5);
    }

    #[test]
    fn newdata_requires_rows() {
        let d = dataset(&[("Phishing", 20)], 40);
        let base = make_c0(&d, 5).unwrap();
        let empty = LabeledDataset::new(vec![], LabelSource::Db).unwrap();
        assert!(matches!(
            make_newdata_eval(&base, &empty),
            Err(SplitsError::EmptyNewData)
        ));
    }

    #[test]
    fn manifest_roundtrip_and_materialize() {
        let d = dataset(&[("Phishing", 10)], 30);
        let split = make_c0(&d, 21).unwrap();
        let manifest = split.manifest();

        let mut buf = Vec::new();
        manifest.write_json(&mut buf).unwrap();
        let back = SplitManifest::read_json(buf.as_slice()).unwrap();
        assert_eq!(back, manifest);

        let rebuilt = back.materialize(&[&d]).unwrap();
        assert_eq!(rebuilt.train.rows(), split.train.rows());
        assert_eq!(rebuilt.test.rows(), split.test.rows());
    }

    #[test]
    fn duplicate_rows_rejected() {
        let rows = vec![
            row(1, Klass::Malicious, "Phishing", LabelSource::Da),
            row(1, Klass::Malicious, "Phishing", LabelSource::Da),
        ];
        assert!(matches!(
            LabeledDataset::new(rows, LabelSource::Da),
            Err(SplitsError::DuplicateRow { .. })
        ));
    }
}
