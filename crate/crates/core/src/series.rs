//! Per-account temporal activity series and burst detection.
//!
//! A [`AccountProfile`] discretizes an account's transactions into fixed-width
//! epochs and derives the series every downstream feature consumes: degree
//! counts, balances, max payments, fees, attractiveness, inter-event times,
//! and the gas-price sequence.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::num::{mean, pop_std};
use crate::txio::{Address, Ledger, Transaction};

#[derive(Debug, thiserror::Error)]
pub enum SeriesError {
    #[error("no activity for address {0}")]
    NoActivity(Address),
    #[error("cannot detect bursts on an empty series")]
    EmptySeries,
}

/// Epoch discretization and burst-threshold settings.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EpochConfig {
    /// Bucket width in seconds.
    pub epoch_seconds: u64,
    /// Sigma-mode burst threshold multiplier (mean + sigma * stddev).
    pub burst_sigma: f64,
    /// Whether failed (`isError = 1`) transactions enter the series.
    pub include_failed: bool,
}

impl Default for EpochConfig {
    fn default() -> Self {
        EpochConfig {
            epoch_seconds: 3600,
            burst_sigma: 2.0,
            include_failed: false,
        }
    }
}

impl EpochConfig {
    pub fn epoch_of(&self, timestamp: u64) -> u64 {
        timestamp / self.epoch_seconds
    }
}

/// An account's time-ordered transactions plus derived per-epoch series.
///
/// All per-epoch series share one contiguous index range covering the
/// account's first through last epoch, zero-filled where nothing happened.
#[derive(Debug, Clone)]
pub struct AccountProfile {
    pub address: Address,
    pub in_txs: Vec<Transaction>,
    pub out_txs: Vec<Transaction>,
    /// Absolute epoch index (timestamp / epoch_seconds) of the first event.
    pub first_epoch: u64,
    pub indegree: Vec<f64>,
    pub outdegree: Vec<f64>,
    pub balance_in: Vec<f64>,
    pub balance_out: Vec<f64>,
    pub max_in_payment: Vec<f64>,
    pub max_out_payment: Vec<f64>,
    pub fee: Vec<f64>,
    pub attractiveness: Vec<f64>,
    /// Seconds between consecutive events of the merged in+out stream.
    pub inter_event_times: Vec<f64>,
    /// Gas price (ether per gas unit) of each merged-stream event.
    pub gas_price_sequence: Vec<f64>,
    /// Timestamps of the merged stream, ascending.
    merged_timestamps: Vec<u64>,
    in_timestamps: Vec<u64>,
    out_timestamps: Vec<u64>,
}

impl AccountProfile {
    pub fn epoch_count(&self) -> usize {
        self.indegree.len()
    }

    pub fn first_timestamp(&self) -> u64 {
        self.merged_timestamps[0]
    }

    pub fn last_timestamp(&self) -> u64 {
        *self.merged_timestamps.last().expect("profile is non-empty")
    }

    /// Epoch span between first and last event, in whole epochs.
    pub fn epoch_span(&self, cfg: &EpochConfig) -> u64 {
        cfg.epoch_of(self.last_timestamp()) - cfg.epoch_of(self.first_timestamp())
    }

    pub fn total_transactions(&self) -> usize {
        self.merged_timestamps.len()
    }

    /// Per-epoch total degree (indegree + outdegree).
    pub fn degree_total(&self) -> Vec<f64> {
        self.indegree
            .iter()
            .zip(&self.outdegree)
            .map(|(i, o)| i + o)
            .collect()
    }

    /// Inter-event times over incoming transactions only.
    pub fn inter_event_times_in(&self) -> Vec<f64> {
        diffs(&self.in_timestamps)
    }

    /// Inter-event times over outgoing transactions only.
    pub fn inter_event_times_out(&self) -> Vec<f64> {
        diffs(&self.out_timestamps)
    }
}

fn diffs(ts: &[u64]) -> Vec<f64> {
    ts.windows(2).map(|w| (w[1] - w[0]) as f64).collect()
}

/// Build the temporal profile of one account.
///
/// A self-transfer counts toward both the in and out series but appears once
/// in the merged event stream. Fees accumulate over every event the account
/// participates in, as gas * gas_price in ether.
pub fn build_profile(
    ledger: &Ledger,
    address: &Address,
    cfg: &EpochConfig,
) -> Result<AccountProfile, SeriesError> {
    let mut in_txs = Vec::new();
    let mut out_txs = Vec::new();
    let mut merged: Vec<&Transaction> = Vec::new();
    for tx in ledger.transactions() {
        if tx.is_error && !cfg.include_failed {
            continue;
        }
        let incoming = tx.to_addr.as_ref() == Some(address);
        let outgoing = &tx.from_addr == address;
        if !incoming && !outgoing {
            continue;
        }
        if incoming {
            in_txs.push(tx.clone());
        }
        if outgoing {
            out_txs.push(tx.clone());
        }
        merged.push(tx);
    }
    if merged.is_empty() {
        return Err(SeriesError::NoActivity(address.clone()));
    }

    let first_epoch = cfg.epoch_of(merged[0].timestamp);
    let last_epoch = cfg.epoch_of(merged.last().expect("non-empty").timestamp);
    let len = (last_epoch - first_epoch + 1) as usize;

    let mut indegree = vec![0.0f64; len];
    let mut outdegree = vec![0.0f64; len];
    let mut balance_in = vec![0.0f64; len];
    let mut balance_out = vec![0.0f64; len];
    let mut max_in_payment = vec![0.0f64; len];
    let mut max_out_payment = vec![0.0f64; len];
    let mut fee = vec![0.0f64; len];

    for tx in &in_txs {
        let e = (cfg.epoch_of(tx.timestamp) - first_epoch) as usize;
        let ether = tx.value.to_ether();
        indegree[e] += 1.0;
        balance_in[e] += ether;
        max_in_payment[e] = max_in_payment[e].max(ether);
    }
    for tx in &out_txs {
        let e = (cfg.epoch_of(tx.timestamp) - first_epoch) as usize;
        let ether = tx.value.to_ether();
        outdegree[e] += 1.0;
        balance_out[e] += ether;
        max_out_payment[e] = max_out_payment[e].max(ether);
    }
    for tx in &merged {
        let e = (cfg.epoch_of(tx.timestamp) - first_epoch) as usize;
        fee[e] += tx.gas_price.to_ether() * tx.gas as f64;
    }

    let merged_timestamps: Vec<u64> = merged.iter().map(|t| t.timestamp).collect();
    let inter_event_times = diffs(&merged_timestamps);
    let gas_price_sequence = merged.iter().map(|t| t.gas_price.to_ether()).collect();
    let in_timestamps = in_txs.iter().map(|t| t.timestamp).collect();
    let out_timestamps = out_txs.iter().map(|t| t.timestamp).collect();

    let attractiveness = attractiveness_over(&in_txs, cfg, first_epoch, len);

    Ok(AccountProfile {
        address: address.clone(),
        in_txs,
        out_txs,
        first_epoch,
        indegree,
        outdegree,
        balance_in,
        balance_out,
        max_in_payment,
        max_out_payment,
        fee,
        attractiveness,
        inter_event_times,
        gas_price_sequence,
        merged_timestamps,
        in_timestamps,
        out_timestamps,
    })
}

/// Per-epoch fraction of distinct senders never seen in any earlier epoch.
/// Epochs without receipts score 0. Novelty is cumulative over the whole
/// history.
pub fn attractiveness_series(profile: &AccountProfile) -> Vec<f64> {
    profile.attractiveness.clone()
}

fn attractiveness_over(
    in_txs: &[Transaction],
    cfg: &EpochConfig,
    first_epoch: u64,
    len: usize,
) -> Vec<f64> {
    let mut per_epoch_senders: Vec<BTreeSet<&Address>> = vec![BTreeSet::new(); len];
    for tx in in_txs {
        let e = (cfg.epoch_of(tx.timestamp) - first_epoch) as usize;
        per_epoch_senders[e].insert(&tx.from_addr);
    }
    let mut seen: BTreeSet<&Address> = BTreeSet::new();
    let mut out = vec![0.0; len];
    for (e, senders) in per_epoch_senders.iter().enumerate() {
        if senders.is_empty() {
            continue;
        }
        let fresh = senders.iter().filter(|s| !seen.contains(*s)).count();
        out[e] = fresh as f64 / senders.len() as f64;
        seen.extend(senders.iter().copied());
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ThresholdMode {
    /// threshold = mean + param * population stddev
    Sigma,
    /// threshold = param
    Absolute,
}

/// Strict-exceedance burst summary of one series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BurstReport {
    pub series_name: String,
    pub threshold: f64,
    pub event_indices: Vec<usize>,
    pub count: usize,
    /// Longest stretch of consecutive above-threshold indices.
    pub longest_run: usize,
    /// Index of the first burst, if any.
    pub first_instance: Option<usize>,
}

/// Detect strict exceedances of a per-series threshold.
pub fn detect_bursts(
    series_name: &str,
    series: &[f64],
    mode: ThresholdMode,
    param: f64,
) -> Result<BurstReport, SeriesError> {
    if series.is_empty() {
        return Err(SeriesError::EmptySeries);
    }
    let threshold = match mode {
        ThresholdMode::Sigma => mean(series) + param * pop_std(series),
        ThresholdMode::Absolute => param,
    };
    let event_indices: Vec<usize> = series
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > threshold)
        .map(|(i, _)| i)
        .collect();

    let mut longest_run = 0usize;
    let mut run = 0usize;
    let mut prev: Option<usize> = None;
    for &i in &event_indices {
        run = match prev {
            Some(p) if i == p + 1 => run + 1,
            _ => 1,
        };
        longest_run = longest_run.max(run);
        prev = Some(i);
    }

    Ok(BurstReport {
        series_name: series_name.to_string(),
        threshold,
        count: event_indices.len(),
        longest_run,
        first_instance: event_indices.first().copied(),
        event_indices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::txio::Ledger;
    use crate::wei::Wei;
    use std::collections::BTreeMap;

    pub(crate) fn test_addr(tag: u8) -> Address {
        Address::parse(&format!("0x{:040x}", tag as u128)).unwrap()
    }

    pub(crate) fn tx(n: u64, ts: u64, from: &Address, to: &Address, ether: f64) -> Transaction {
        Transaction {
            tx_hash: format!("0x{n:064x}"),
            block_number: n,
            timestamp: ts,
            from_addr: from.clone(),
            to_addr: Some(to.clone()),
            value: Wei::from_u64((ether * 1e18) as u64),
            gas: 21000,
            gas_price: Wei::from_u64(2_000_000_000),
            is_error: false,
        }
    }

    fn ledger(txs: Vec<Transaction>) -> Ledger {
        Ledger::new(txs, BTreeMap::new(), None).unwrap()
    }

    #[test]
    fn single_incoming_tx_profile() {
        let a = test_addr(1);
        let me = test_addr(9);
        let l = ledger(vec![tx(1, 10, &a, &me, 5.0)]);
        let p = build_profile(&l, &me, &EpochConfig::default()).unwrap();
        assert_eq!(p.indegree, vec![1.0]);
        assert_eq!(p.balance_in, vec![5.0]);
        assert!(p.inter_event_times.is_empty());
        assert_eq!(p.outdegree, vec![0.0]);
    }

    #[test]
    fn hand_bucketing_three_incoming() {
        let a = test_addr(1);
        let me = test_addr(9);
        let l = ledger(vec![
            tx(1, 1, &a, &me, 1.0), // epoch widths count from t=0 buckets; use ts 1 to keep timestamp > 0
            tx(2, 100, &a, &me, 1.0),
            tx(3, 8000, &a, &me, 1.0),
        ]);
        let p = build_profile(&l, &me, &EpochConfig::default()).unwrap();
        assert_eq!(p.indegree, vec![2.0, 0.0, 1.0]);
        assert_eq!(p.inter_event_times, vec![99.0, 7900.0]);
    }

    #[test]
    fn sender_only_account_has_zero_attractiveness() {
        let me = test_addr(9);
        let b = test_addr(2);
        let l = ledger(vec![tx(1, 10, &me, &b, 1.0), tx(2, 5000, &me, &b, 1.0)]);
        let p = build_profile(&l, &me, &EpochConfig::default()).unwrap();
        assert!(p.attractiveness.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn no_activity_is_an_error() {
        let a = test_addr(1);
        let b = test_addr(2);
        let l = ledger(vec![tx(1, 10, &a, &b, 1.0)]);
        let missing = test_addr(7);
        assert!(matches!(
            build_profile(&l, &missing, &EpochConfig::default()),
            Err(SeriesError::NoActivity(_))
        ));
    }

    #[test]
    fn attractiveness_repeat_sender() {
        let s = test_addr(1);
        let me = test_addr(9);
        let l = ledger(vec![tx(1, 10, &s, &me, 1.0), tx(2, 3700, &s, &me, 1.0)]);
        let p = build_profile(&l, &me, &EpochConfig::default()).unwrap();
        assert_eq!(p.attractiveness, vec![1.0, 0.0]);
    }

    #[test]
    fn attractiveness_all_new_senders() {
        let me = test_addr(9);
        let l = ledger(vec![
            tx(1, 10, &test_addr(1), &me, 1.0),
            tx(2, 3700, &test_addr(2), &me, 1.0),
            tx(3, 7300, &test_addr(3), &me, 1.0),
        ]);
        let p = build_profile(&l, &me, &EpochConfig::default()).unwrap();
        assert_eq!(p.attractiveness, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn attractiveness_half_new() {
        let me = test_addr(9);
        let a = test_addr(1);
        let b = test_addr(2);
        // epoch 0: A; epoch 1: A and B -> 1 fresh of 2 distinct
        let l = ledger(vec![
            tx(1, 10, &a, &me, 1.0),
            tx(2, 3700, &a, &me, 1.0),
            tx(3, 3800, &b, &me, 1.0),
        ]);
        let p = build_profile(&l, &me, &EpochConfig::default()).unwrap();
        assert_eq!(p.attractiveness, vec![1.0, 0.5]);
    }

    #[test]
    fn burst_hand_counts() {
        let r = detect_bursts("s", &[1.0, 5.0, 1.0, 6.0, 1.0], ThresholdMode::Absolute, 4.0).unwrap();
        assert_eq!(r.count, 2);
        assert_eq!(r.longest_run, 1);
        assert_eq!(r.first_instance, Some(1));

        let r = detect_bursts("s", &[0.0, 5.0, 6.0, 7.0, 0.0], ThresholdMode::Absolute, 4.0).unwrap();
        assert_eq!(r.count, 3);
        assert_eq!(r.longest_run, 3);
    }

    #[test]
    fn constant_series_has_no_sigma_bursts() {
        let r = detect_bursts("s", &[3.0, 3.0, 3.0], ThresholdMode::Sigma, 2.0).unwrap();
        assert_eq!(r.threshold, 3.0);
        assert_eq!(r.count, 0);
        assert_eq!(r.first_instance, None);
    }

    #[test]
    fn extreme_absolute_thresholds() {
        let series = [1.0, 2.0, 3.0];
        let all = detect_bursts("s", &series, ThresholdMode::Absolute, f64::NEG_INFINITY).unwrap();
        assert_eq!(all.count, series.len());
        let none = detect_bursts("s", &series, ThresholdMode::Absolute, f64::INFINITY).unwrap();
        assert_eq!(none.count, 0);
    }

    #[test]
    fn empty_series_is_an_error() {
        assert!(matches!(
            detect_bursts("s", &[], ThresholdMode::Sigma, 2.0),
            Err(SeriesError::EmptySeries)
        ));
    }

    #[test]
    fn degree_conservation() {
        let me = test_addr(9);
        let other = test_addr(1);
        let mut txs = Vec::new();
        for i in 0..17u64 {
            txs.push(tx(i, 100 + i * 977, &other, &me, 0.5));
        }
        for i in 0..11u64 {
            txs.push(tx(100 + i, 150 + i * 1381, &me, &other, 0.25));
        }
        let l = ledger(txs);
        let p = build_profile(&l, &me, &EpochConfig::default()).unwrap();
        assert_eq!(p.indegree.iter().sum::<f64>(), 17.0);
        assert_eq!(p.outdegree.iter().sum::<f64>(), 11.0);
        let total_in: f64 = p.balance_in.iter().sum();
        assert!((total_in - 17.0 * 0.5).abs() / total_in < 1e-9);
        assert_eq!(p.inter_event_times.len(), p.total_transactions() - 1);
        assert!(p.inter_event_times.iter().all(|&d| d >= 0.0));
    }

    #[test]
    fn attractiveness_invariant_under_sender_relabeling() {
        let me = test_addr(9);
        // senders 1,2,1,3 across epochs vs relabeled 5,6,5,7: same novelty structure
        let pattern = [(1u8, 10u64), (2, 3700), (1, 7300), (3, 10900)];
        let build = |offset: u8| {
            let txs = pattern
                .iter()
                .enumerate()
                .map(|(i, &(s, ts))| tx(i as u64, ts, &test_addr(s + offset), &me, 1.0))
                .collect();
            build_profile(&ledger(txs), &me, &EpochConfig::default()).unwrap()
        };
        assert_eq!(build(0).attractiveness, build(4).attractiveness);
    }

    #[test]
    fn failed_transactions_are_excluded_by_default() {
        let a = test_addr(1);
        let me = test_addr(9);
        let mut failing = tx(1, 10, &a, &me, 5.0);
        failing.is_error = true;
        let ok = tx(2, 20, &a, &me, 1.0);
        let l = ledger(vec![failing.clone(), ok.clone()]);

        let p = build_profile(&l, &me, &EpochConfig::default()).unwrap();
        assert_eq!(p.indegree.iter().sum::<f64>(), 1.0);

        let include = EpochConfig {
            include_failed: true,
            ..EpochConfig::default()
        };
        let p = build_profile(&l, &me, &include).unwrap();
        assert_eq!(p.indegree.iter().sum::<f64>(), 2.0);
    }
}
