//! The ordered 59-dimensional account feature vector.
//!
//! [`extract_features`] evaluates every catalog entry against an account's
//! temporal profile and the transaction graph. Features on undefined
//! substrates (an empty inter-event series, a degree-1 graph node) take the
//! degenerate value 0, so vectors are always finite.

pub mod catalog;
pub mod graph;
pub mod tsf;

use std::collections::BTreeSet;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

pub use catalog::{CatalogEntry, Formula, ScalarKind, SourceSeries, CATALOG, CATALOG_VERSION, FEATURE_COUNT};
pub use graph::{clustering_coefficient, NeighborIndex};

use crate::series::{detect_bursts, AccountProfile, BurstReport, EpochConfig, ThresholdMode};
use crate::txio::{Address, Ledger};

#[derive(Debug, thiserror::Error)]
pub enum FeaturesError {
    #[error("feature matrix header mismatch at column {column}: got `{got}`, want `{want}`")]
    HeaderMismatch {
        column: usize,
        got: String,
        want: String,
    },
    #[error("feature matrix row {row}: {reason}")]
    BadRow { row: usize, reason: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Series(#[from] crate::series::SeriesError),
}

/// One account's ordered feature values, aligned with [`CATALOG`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub address: Address,
    pub values: Vec<f64>,
    pub catalog_version: String,
}

impl FeatureVector {
    pub fn new(address: Address, values: Vec<f64>) -> FeatureVector {
        assert_eq!(values.len(), FEATURE_COUNT, "feature vector must have 59 entries");
        assert!(
            values.iter().all(|v| v.is_finite()),
            "feature vector must be finite"
        );
        FeatureVector {
            address,
            values,
            catalog_version: CATALOG_VERSION.to_string(),
        }
    }
}

struct SeriesBundle<'a> {
    indegree: &'a [f64],
    outdegree: &'a [f64],
    degree_total: Vec<f64>,
    ittime_all: &'a [f64],
    ittime_in: Vec<f64>,
    ittime_out: Vec<f64>,
    gas_price: &'a [f64],
    attractiveness: &'a [f64],
    balance_in: &'a [f64],
    balance_out: &'a [f64],
    max_in_payment: &'a [f64],
    max_out_payment: &'a [f64],
}

impl<'a> SeriesBundle<'a> {
    fn new(profile: &'a AccountProfile) -> SeriesBundle<'a> {
        SeriesBundle {
            indegree: &profile.indegree,
            outdegree: &profile.outdegree,
            degree_total: profile.degree_total(),
            ittime_all: &profile.inter_event_times,
            ittime_in: profile.inter_event_times_in(),
            ittime_out: profile.inter_event_times_out(),
            gas_price: &profile.gas_price_sequence,
            attractiveness: &profile.attractiveness,
            balance_in: &profile.balance_in,
            balance_out: &profile.balance_out,
            max_in_payment: &profile.max_in_payment,
            max_out_payment: &profile.max_out_payment,
        }
    }

    fn get(&self, source: SourceSeries) -> &[f64] {
        match source {
            SourceSeries::Indegree => self.indegree,
            SourceSeries::Outdegree => self.outdegree,
            SourceSeries::DegreeTotal => &self.degree_total,
            SourceSeries::IttimeAll => self.ittime_all,
            SourceSeries::IttimeIn => &self.ittime_in,
            SourceSeries::IttimeOut => &self.ittime_out,
            SourceSeries::GasPrice => self.gas_price,
            SourceSeries::Attractiveness => self.attractiveness,
            SourceSeries::BalanceIn => self.balance_in,
            SourceSeries::BalanceOut => self.balance_out,
            SourceSeries::MaxInPayment => self.max_in_payment,
            SourceSeries::MaxOutPayment => self.max_out_payment,
        }
    }
}

fn burst_or_default(series: &[f64], sigma: f64) -> Option<BurstReport> {
    if series.is_empty() {
        return None;
    }
    Some(
        detect_bursts("", series, ThresholdMode::Sigma, sigma)
            .expect("non-empty series cannot fail"),
    )
}

/// `(indegree, outdegree, degree) / max(active epochs, 1)`.
///
/// The denominator is the whole-epoch span between the first and last
/// transaction, clamped to 1 for accounts active within a single epoch.
pub fn degree_time_inverse(profile: &AccountProfile, cfg: &EpochConfig) -> (f64, f64, f64) {
    let denom = profile.epoch_span(cfg).max(1) as f64;
    (
        profile.in_txs.len() as f64 / denom,
        profile.out_txs.len() as f64 / denom,
        profile.total_transactions() as f64 / denom,
    )
}

fn zero_value_count(profile: &AccountProfile) -> usize {
    let self_addr = &profile.address;
    let in_zeros = profile.in_txs.iter().filter(|t| t.value.is_zero()).count();
    // self-transfers already counted on the incoming side
    let out_zeros = profile
        .out_txs
        .iter()
        .filter(|t| t.value.is_zero() && t.to_addr.as_ref() != Some(self_addr))
        .count();
    in_zeros + out_zeros
}

/// Evaluate all 59 catalog entries for one account.
pub fn extract_features(
    profile: &AccountProfile,
    graph: &NeighborIndex,
    cfg: &EpochConfig,
    snapshot_time: u64,
) -> FeatureVector {
    let bundle = SeriesBundle::new(profile);
    let first_ts = profile.first_timestamp();
    let last_ts = profile.last_timestamp();
    let total_in: f64 = profile.in_txs.iter().map(|t| t.value.to_ether()).sum();
    let total_out: f64 = profile.out_txs.iter().map(|t| t.value.to_ether()).sum();
    let unique_in = profile
        .in_txs
        .iter()
        .map(|t| &t.from_addr)
        .collect::<BTreeSet<_>>()
        .len();
    let (in_inv, out_inv, deg_inv) = degree_time_inverse(profile, cfg);

    let scalar = |kind: ScalarKind| -> f64 {
        match kind {
            ScalarKind::IndegreeTimeInv => in_inv,
            ScalarKind::OutdegreeTimeInv => out_inv,
            ScalarKind::DegreeTimeInv => deg_inv,
            ScalarKind::ZeroTransactions => zero_value_count(profile) as f64,
            ScalarKind::TotalBal => total_in - total_out,
            ScalarKind::TransactedFirst => snapshot_time.saturating_sub(first_ts) as f64,
            ScalarKind::TransactedLast => snapshot_time.saturating_sub(last_ts) as f64,
            ScalarKind::ActiveDuration => (last_ts - first_ts) as f64,
            ScalarKind::AveragePerInBal => {
                if profile.in_txs.is_empty() {
                    0.0
                } else {
                    total_in / profile.in_txs.len() as f64
                }
            }
            ScalarKind::UniqueIn => unique_in as f64,
            ScalarKind::LastActiveSince => snapshot_time.saturating_sub(last_ts) as f64,
            ScalarKind::ClusteringCoeff => match clustering_coefficient(graph, &profile.address) {
                Ok(cc) => cc,
                // isolated in the undirected graph (e.g. only self-transfers)
                Err(_) => 0.0,
            },
        }
    };

    let values: Vec<f64> = CATALOG
        .iter()
        .map(|entry| match entry.formula {
            Formula::Scalar(kind) => scalar(kind),
            Formula::Quantile(src, q) => tsf::ts_quantile(bundle.get(src), q),
            Formula::Median(src) => tsf::ts_median(bundle.get(src)),
            Formula::Mean(src) => tsf::ts_mean(bundle.get(src)),
            Formula::FftCoeff0Real(src) => tsf::fft_coeff0_real(bundle.get(src)),
            Formula::EnergyRatioChunks {
                source,
                segments,
                focus,
            } => tsf::energy_ratio_by_chunks(bundle.get(source), segments, focus),
            Formula::IndexMassQuantile(src, q) => tsf::index_mass_quantile(bundle.get(src), q),
            Formula::LinearTrendPValue(src) => tsf::linear_trend_pvalue(bundle.get(src)),
            Formula::CwtCoeff0 { source, width } => tsf::cwt_coeff0(bundle.get(source), width),
            Formula::BurstCount(src) => burst_or_default(bundle.get(src), cfg.burst_sigma)
                .map(|r| r.count as f64)
                .unwrap_or(0.0),
            Formula::BurstLongestRun(src) => burst_or_default(bundle.get(src), cfg.burst_sigma)
                .map(|r| r.longest_run as f64)
                .unwrap_or(0.0),
            Formula::BurstFirstInstance(src) => burst_or_default(bundle.get(src), cfg.burst_sigma)
                .and_then(|r| r.first_instance)
                .map(|i| i as f64)
                .unwrap_or(0.0),
        })
        .collect();

    FeatureVector::new(profile.address.clone(), values)
}

/// Outcome of applying one catalog formula to a caller-supplied series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TsOutcome {
    pub value: f64,
    /// True when the substrate was empty or carried no mass.
    pub degenerate: bool,
}

/// Apply the named catalog formula to an arbitrary series. Burst formulas use
/// the sigma rule with the default multiplier. Returns `None` for names not
/// in the catalog or for account-scalar entries that have no series form.
pub fn ts_feature(name: &str, series: &[f64]) -> Option<TsOutcome> {
    let entry = CATALOG.iter().find(|e| e.name == name)?;
    let sigma = EpochConfig::default().burst_sigma;
    let degenerate = series.is_empty();
    let value = match entry.formula {
        Formula::Scalar(_) => return None,
        Formula::Quantile(_, q) => tsf::ts_quantile(series, q),
        Formula::Median(_) => tsf::ts_median(series),
        Formula::Mean(_) => tsf::ts_mean(series),
        Formula::FftCoeff0Real(_) => tsf::fft_coeff0_real(series),
        Formula::EnergyRatioChunks { segments, focus, .. } => {
            tsf::energy_ratio_by_chunks(series, segments, focus)
        }
        Formula::IndexMassQuantile(_, q) => tsf::index_mass_quantile(series, q),
        Formula::LinearTrendPValue(_) => tsf::linear_trend_pvalue(series),
        Formula::CwtCoeff0 { width, .. } => tsf::cwt_coeff0(series, width),
        Formula::BurstCount(_) => burst_or_default(series, sigma)
            .map(|r| r.count as f64)
            .unwrap_or(0.0),
        Formula::BurstLongestRun(_) => burst_or_default(series, sigma)
            .map(|r| r.longest_run as f64)
            .unwrap_or(0.0),
        Formula::BurstFirstInstance(_) => burst_or_default(series, sigma)
            .and_then(|r| r.first_instance)
            .map(|i| i as f64)
            .unwrap_or(0.0),
    };
    Some(TsOutcome { value, degenerate })
}

/// Build profiles and feature vectors for every labeled account, in address
/// order.
pub fn extract_for_labels(
    ledger: &Ledger,
    cfg: &EpochConfig,
) -> Result<Vec<FeatureVector>, FeaturesError> {
    let graph = NeighborIndex::from_ledger(ledger, cfg);
    let mut out = Vec::with_capacity(ledger.labels().len());
    for address in ledger.labels().keys() {
        let profile = crate::series::build_profile(ledger, address, cfg)?;
        out.push(extract_features(&profile, &graph, cfg, ledger.snapshot_time()));
    }
    Ok(out)
}

/// Write the feature matrix CSV: `address` plus the 59 catalog names.
pub fn write_feature_matrix<W: Write>(rows: &[FeatureVector], out: W) -> Result<(), FeaturesError> {
    let mut writer = csv::Writer::from_writer(out);
    let mut header = vec!["address".to_string()];
    header.extend(CATALOG.iter().map(|e| e.name.to_string()));
    writer.write_record(&header)?;
    for row in rows {
        let mut record = vec![row.address.to_string()];
        record.extend(row.values.iter().map(|v| v.to_string()));
        writer.write_record(&record)?;
    }
    writer.into_inner().map_err(|e| FeaturesError::BadRow {
        row: 0,
        reason: e.to_string(),
    })?;
    Ok(())
}

/// Read a feature matrix CSV, verifying the header is exactly the catalog.
pub fn read_feature_matrix<R: Read>(input: R) -> Result<Vec<FeatureVector>, FeaturesError> {
    let mut reader = csv::Reader::from_reader(input);
    {
        let headers = reader.headers()?.clone();
        let want: Vec<&str> = std::iter::once("address")
            .chain(CATALOG.iter().map(|e| e.name))
            .collect();
        for (column, (got, want)) in headers.iter().zip(&want).enumerate() {
            if got != *want {
                return Err(FeaturesError::HeaderMismatch {
                    column,
                    got: got.to_string(),
                    want: want.to_string(),
                });
            }
        }
        if headers.len() != want.len() {
            return Err(FeaturesError::HeaderMismatch {
                column: headers.len().min(want.len()),
                got: format!("{} columns", headers.len()),
                want: format!("{} columns", want.len()),
            });
        }
    }
    let mut out = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 2;
        let record = record?;
        let address = Address::parse(&record[0]).map_err(|reason| FeaturesError::BadRow {
            row,
            reason,
        })?;
        let values: Vec<f64> = record
            .iter()
            .skip(1)
            .map(|s| {
                s.parse::<f64>().map_err(|e| FeaturesError::BadRow {
                    row,
                    reason: format!("bad value `{s}`: {e}"),
                })
            })
            .collect::<Result<_, _>>()?;
        if values.len() != FEATURE_COUNT {
            return Err(FeaturesError::BadRow {
                row,
                reason: format!("{} values, want {}", values.len(), FEATURE_COUNT),
            });
        }
        out.push(FeatureVector::new(address, values));
    }
    Ok(out)
}
