//! Transaction-log and account-label ingestion.
//!
//! Reads Etherscan-style external-transaction records (JSONL or CSV, one
//! record per row with string-encoded integers) and label lists
//! (`address,klass,activity,source`), validates them, and assembles an
//! immutable [`Ledger`]. Live fetching from an Etherscan-compatible endpoint
//! lives in [`fetch`].

pub mod fetch;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::wei::Wei;

#[derive(Debug, thiserror::Error)]
pub enum TxioError {
    #[error("line {line}: field `{field}`: {reason}")]
    Malformed {
        line: usize,
        field: &'static str,
        reason: String,
    },
    #[error("duplicate transaction hash {0}")]
    DuplicateTxHash(String),
    #[error("address {address} labeled with conflicting activities `{first}` and `{second}`")]
    ConflictingLabel {
        address: String,
        first: String,
        second: String,
    },
    #[error("line {line}: {reason}")]
    BadLabelRow { line: usize, reason: String },
    #[error("label file has no header row")]
    MissingHeader,
    #[error("snapshot time {snapshot} predates last transaction at {last}")]
    SnapshotBeforeLastTx { snapshot: u64, last: u64 },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, TxioError>;

/// Lowercase `0x`-prefixed 40-hex-digit account address.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Address(String);

impl Address {
    /// Validate and normalize to lowercase.
    pub fn parse(s: &str) -> std::result::Result<Address, String> {
        let lower = s.trim().to_ascii_lowercase();
        let hex = lower
            .strip_prefix("0x")
            .ok_or_else(|| format!("address `{s}` missing 0x prefix"))?;
        if hex.len() != 40 {
            return Err(format!("address `{s}` has {} hex digits, want 40", hex.len()));
        }
        if !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(format!("address `{s}` contains non-hex characters"));
        }
        Ok(Address(lower))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for Address {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Address::parse(s)
    }
}

fn parse_tx_hash(s: &str) -> std::result::Result<String, String> {
    let lower = s.trim().to_ascii_lowercase();
    let hex = lower
        .strip_prefix("0x")
        .ok_or_else(|| format!("hash `{s}` missing 0x prefix"))?;
    if hex.len() != 64 || !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(format!("hash `{s}` is not 32 bytes of hex"));
    }
    Ok(lower)
}

/// One external transfer record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transaction {
    pub tx_hash: String,
    pub block_number: u64,
    pub timestamp: u64,
    pub from_addr: Address,
    /// Absent for contract creation.
    pub to_addr: Option<Address>,
    pub value: Wei,
    pub gas: u64,
    pub gas_price: Wei,
    pub is_error: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Klass {
    Malicious,
    Benign,
}

/// Which collection a labeled account came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LabelSource {
    /// Original labeled dataset.
    Da,
    /// Newly observed malicious accounts.
    Db,
    /// Generated adversarial feature vectors.
    Dg,
    #[serde(rename = "synthetic")]
    Synthetic,
}

impl fmt::Display for LabelSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LabelSource::Da => "Da",
            LabelSource::Db => "Db",
            LabelSource::Dg => "Dg",
            LabelSource::Synthetic => "synthetic",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccountLabel {
    pub address: Address,
    pub klass: Klass,
    /// Activity tag, e.g. "Phishing"; benign accounts always carry "benign".
    pub activity: String,
    pub source: LabelSource,
}

/// Time-sorted transaction list plus account labels.
///
/// `snapshot_time` is the "now" recency features are measured against; it
/// never precedes the last transaction.
#[derive(Debug, Clone)]
pub struct Ledger {
    transactions: Vec<Transaction>,
    labels: BTreeMap<Address, AccountLabel>,
    snapshot_time: u64,
}

impl Ledger {
    /// Build a ledger; transactions are re-sorted by timestamp and the
    /// snapshot defaults to the last transaction's timestamp.
    pub fn new(
        mut transactions: Vec<Transaction>,
        labels: BTreeMap<Address, AccountLabel>,
        snapshot_time: Option<u64>,
    ) -> Result<Ledger> {
        transactions.sort_by_key(|t| t.timestamp);
        let last = transactions.last().map(|t| t.timestamp).unwrap_or(0);
        let snapshot_time = snapshot_time.unwrap_or(last);
        if snapshot_time < last {
            return Err(TxioError::SnapshotBeforeLastTx {
                snapshot: snapshot_time,
                last,
            });
        }
        Ok(Ledger {
            transactions,
            labels,
            snapshot_time,
        })
    }

    pub fn transactions(&self) -> &[Transaction] {
        &self.transactions
    }

    pub fn labels(&self) -> &BTreeMap<Address, AccountLabel> {
        &self.labels
    }

    pub fn snapshot_time(&self) -> u64 {
        self.snapshot_time
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TxFormat {
    Jsonl,
    Csv,
}

/// Raw Etherscan-style record; every integer field is string-encoded.
#[derive(Debug, Serialize, Deserialize)]
struct RawTxRecord {
    #[serde(rename = "blockNumber")]
    block_number: String,
    #[serde(rename = "timeStamp")]
    time_stamp: String,
    hash: String,
    from: String,
    #[serde(default)]
    to: String,
    value: String,
    gas: String,
    #[serde(rename = "gasPrice")]
    gas_price: String,
    #[serde(rename = "isError")]
    is_error: String,
}

fn malformed(line: usize, field: &'static str, reason: impl ToString) -> TxioError {
    TxioError::Malformed {
        line,
        field,
        reason: reason.to_string(),
    }
}

impl RawTxRecord {
    fn into_transaction(self, line: usize) -> Result<Transaction> {
        let tx_hash = parse_tx_hash(&self.hash).map_err(|e| malformed(line, "hash", e))?;
        let block_number: u64 = self
            .block_number
            .trim()
            .parse()
            .map_err(|e| malformed(line, "blockNumber", e))?;
        let timestamp: u64 = self
            .time_stamp
            .trim()
            .parse()
            .map_err(|e| malformed(line, "timeStamp", e))?;
        if timestamp == 0 {
            return Err(malformed(line, "timeStamp", "timestamp must be positive"));
        }
        let from_addr = Address::parse(&self.from).map_err(|e| malformed(line, "from", e))?;
        let to_addr = if self.to.trim().is_empty() {
            None
        } else {
            Some(Address::parse(&self.to).map_err(|e| malformed(line, "to", e))?)
        };
        let value: Wei = self
            .value
            .trim()
            .parse()
            .map_err(|e| malformed(line, "value", e))?;
        let gas: u64 = self.gas.trim().parse().map_err(|e| malformed(line, "gas", e))?;
        let gas_price: Wei = self
            .gas_price
            .trim()
            .parse()
            .map_err(|e| malformed(line, "gasPrice", e))?;
        let is_error = match self.is_error.trim() {
            "0" => false,
            "1" => true,
            other => return Err(malformed(line, "isError", format!("expected 0 or 1, got `{other}`"))),
        };
        Ok(Transaction {
            tx_hash,
            block_number,
            timestamp,
            from_addr,
            to_addr,
            value,
            gas,
            gas_price,
            is_error,
        })
    }

    fn from_transaction(tx: &Transaction) -> RawTxRecord {
        RawTxRecord {
            block_number: tx.block_number.to_string(),
            time_stamp: tx.timestamp.to_string(),
            hash: tx.tx_hash.clone(),
            from: tx.from_addr.to_string(),
            to: tx.to_addr.as_ref().map(|a| a.to_string()).unwrap_or_default(),
            value: tx.value.to_string(),
            gas: tx.gas.to_string(),
            gas_price: tx.gas_price.to_string(),
            is_error: if tx.is_error { "1" } else { "0" }.to_string(),
        }
    }
}

/// Parse a transaction stream; the output is sorted by timestamp and checked
/// for duplicate hashes. Failed (`isError = 1`) transactions are retained.
pub fn parse_transactions<R: Read>(input: R, format: TxFormat) -> Result<Vec<Transaction>> {
    let mut txs = match format {
        TxFormat::Jsonl => parse_jsonl(input)?,
        TxFormat::Csv => parse_csv(input)?,
    };
    let mut seen = HashSet::new();
    for tx in &txs {
        if !seen.insert(tx.tx_hash.clone()) {
            return Err(TxioError::DuplicateTxHash(tx.tx_hash.clone()));
        }
    }
    txs.sort_by_key(|t| t.timestamp);
    Ok(txs)
}

fn parse_jsonl<R: Read>(input: R) -> Result<Vec<Transaction>> {
    let reader = BufReader::new(input);
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawTxRecord = serde_json::from_str(&line)
            .map_err(|e| malformed(line_no, "record", e))?;
        out.push(raw.into_transaction(line_no)?);
    }
    Ok(out)
}

fn parse_csv<R: Read>(input: R) -> Result<Vec<Transaction>> {
    let mut reader = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for result in reader.deserialize::<RawTxRecord>() {
        let line = out.len() + 2; // header is line 1
        let raw = result.map_err(|e| malformed(line, "record", e))?;
        out.push(raw.into_transaction(line)?);
    }
    Ok(out)
}

/// Serialize transactions in the same record schema `parse_transactions`
/// reads, so serialize ∘ parse round-trips structurally.
pub fn serialize_transactions<W: Write>(
    txs: &[Transaction],
    format: TxFormat,
    mut out: W,
) -> Result<()> {
    match format {
        TxFormat::Jsonl => {
            for tx in txs {
                let raw = RawTxRecord::from_transaction(tx);
                serde_json::to_writer(&mut out, &raw).map_err(std::io::Error::other)?;
                out.write_all(b"\n")?;
            }
        }
        TxFormat::Csv => {
            let mut writer = csv::Writer::from_writer(out);
            for tx in txs {
                writer
                    .serialize(RawTxRecord::from_transaction(tx))
                    .map_err(std::io::Error::other)?;
            }
            writer.flush()?;
        }
    }
    Ok(())
}

/// Load the `address,klass,activity,source` label CSV.
///
/// Duplicate rows for one address are tolerated only when they agree on the
/// activity; each account carries exactly one activity.
pub fn load_labels<R: Read>(input: R) -> Result<BTreeMap<Address, AccountLabel>> {
    let mut reader = csv::Reader::from_reader(input);
    {
        let headers = reader.headers().map_err(|_| TxioError::MissingHeader)?;
        let expected = ["address", "klass", "activity", "source"];
        if headers.iter().take(4).map(str::trim).ne(expected) {
            return Err(TxioError::MissingHeader);
        }
    }

    #[derive(Deserialize)]
    struct Row {
        address: String,
        klass: String,
        activity: String,
        source: String,
    }

    let mut labels: BTreeMap<Address, AccountLabel> = BTreeMap::new();
    for (idx, result) in reader.deserialize::<Row>().enumerate() {
        let line = idx + 2;
        let row = result.map_err(|e| TxioError::BadLabelRow {
            line,
            reason: e.to_string(),
        })?;
        let address = Address::parse(&row.address).map_err(|reason| TxioError::BadLabelRow {
            line,
            reason,
        })?;
        let klass = match row.klass.trim() {
            "malicious" => Klass::Malicious,
            "benign" => Klass::Benign,
            other => {
                return Err(TxioError::BadLabelRow {
                    line,
                    reason: format!("unknown klass `{other}`"),
                })
            }
        };
        let activity = row.activity.trim().to_string();
        if klass == Klass::Benign && activity != "benign" {
            return Err(TxioError::BadLabelRow {
                line,
                reason: format!("benign account carries activity `{activity}`"),
            });
        }
        let source = match row.source.trim() {
            "Da" => LabelSource::Da,
            "Db" => LabelSource::Db,
            "Dg" => LabelSource::Dg,
            "synthetic" => LabelSource::Synthetic,
            other => {
                return Err(TxioError::BadLabelRow {
                    line,
                    reason: format!("unknown source `{other}`"),
                })
            }
        };
        let label = AccountLabel {
            address: address.clone(),
            klass,
            activity,
            source,
        };
        if let Some(existing) = labels.get(&address) {
            if existing.activity != label.activity {
                return Err(TxioError::ConflictingLabel {
                    address: address.to_string(),
                    first: existing.activity.clone(),
                    second: label.activity,
                });
            }
        } else {
            labels.insert(address, label);
        }
    }
    Ok(labels)
}

/// Write labels back out in the `address,klass,activity,source` schema.
pub fn serialize_labels<W: Write>(
    labels: impl IntoIterator<Item = AccountLabel>,
    out: W,
) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer
        .write_record(["address", "klass", "activity", "source"])
        .map_err(std::io::Error::other)?;
    for label in labels {
        let klass = match label.klass {
            Klass::Malicious => "malicious",
            Klass::Benign => "benign",
        };
        writer
            .write_record([
                label.address.as_str(),
                klass,
                &label.activity,
                &label.source.to_string(),
            ])
            .map_err(std::io::Error::other)?;
    }
    writer.flush()?;
    Ok(())
}
