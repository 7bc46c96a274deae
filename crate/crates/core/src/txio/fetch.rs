//! Paginated account-transaction fetch from an Etherscan-compatible endpoint.
//!
//! Optional plumbing: every analysis path also works from file fixtures. The
//! fetch result is exactly what `parse_transactions` would return on the
//! concatenated page payloads.

use std::thread::sleep;
use std::time::Duration;

use serde::Deserialize;

use super::{Address, RawTxRecord, Transaction, TxioError};

#[derive(Debug, thiserror::Error)]
pub enum FetchError {
    #[error("request to {url} failed after {attempts} attempts: {reason}")]
    Exhausted {
        url: String,
        attempts: u32,
        reason: String,
    },
    #[error("unexpected response body: {0}")]
    BadBody(String),
    #[error(transparent)]
    Txio(#[from] TxioError),
}

/// Retry and pacing policy.
#[derive(Debug, Clone)]
pub struct FetchConfig {
    /// Minimum delay between consecutive requests.
    pub min_delay: Duration,
    /// Total attempts per page before giving up.
    pub max_attempts: u32,
    /// First retry waits this long; doubles per retry.
    pub backoff_base: Duration,
}

impl Default for FetchConfig {
    fn default() -> Self {
        FetchConfig {
            min_delay: Duration::from_millis(250),
            max_attempts: 3,
            backoff_base: Duration::from_millis(250),
        }
    }
}

#[derive(Deserialize)]
struct EndpointResponse {
    status: String,
    #[serde(default)]
    message: String,
    result: serde_json::Value,
}

enum Page {
    Records(Vec<RawTxRecord>),
    RateLimited,
}

fn get_page(
    client: &reqwest::blocking::Client,
    url: &str,
) -> Result<Page, String> {
    let resp = client.get(url).send().map_err(|e| e.to_string())?;
    if resp.status().as_u16() == 429 {
        return Ok(Page::RateLimited);
    }
    if !resp.status().is_success() {
        return Err(format!("http status {}", resp.status()));
    }
    let body: EndpointResponse = resp.json().map_err(|e| e.to_string())?;
    if body.result.is_array() {
        let records: Vec<RawTxRecord> =
            serde_json::from_value(body.result).map_err(|e| e.to_string())?;
        return Ok(Page::Records(records));
    }
    // Etherscan signals rate limiting with status "0" and a string result.
    let text = body.result.as_str().unwrap_or("").to_ascii_lowercase();
    if body.status == "0" && text.contains("rate limit") {
        return Ok(Page::RateLimited);
    }
    if body.status == "0" && body.message.to_ascii_lowercase().contains("no transactions") {
        return Ok(Page::Records(Vec::new()));
    }
    Err(format!("unrecognized payload: status={} message={}", body.status, body.message))
}

/// Fetch all external transactions of one account, page by page, until a
/// short or empty page signals exhaustion.
pub fn fetch_account_transactions(
    endpoint: &str,
    api_key: &str,
    address: &Address,
    page_size: usize,
    cfg: &FetchConfig,
) -> Result<Vec<Transaction>, FetchError> {
    assert!(page_size > 0, "page_size must be positive");
    let client = reqwest::blocking::Client::builder()
        .timeout(Duration::from_secs(30))
        .build()
        .expect("client construction cannot fail with static options");

    let mut raw: Vec<RawTxRecord> = Vec::new();
    let mut page = 1usize;
    let mut first_request = true;
    loop {
        let url = format!(
            "{endpoint}?module=account&action=txlist&address={address}&page={page}&offset={page_size}&sort=asc&apikey={api_key}"
        );
        let mut attempt = 0u32;
        let records = loop {
            attempt += 1;
            if !first_request {
                sleep(cfg.min_delay);
            }
            first_request = false;
            match get_page(&client, &url) {
                Ok(Page::Records(r)) => break r,
                Ok(Page::RateLimited) | Err(_) if attempt < cfg.max_attempts => {
                    sleep(cfg.backoff_base * 2u32.pow(attempt - 1));
                }
                Ok(Page::RateLimited) => {
                    return Err(FetchError::Exhausted {
                        url,
                        attempts: attempt,
                        reason: "rate limited".to_string(),
                    })
                }
                Err(reason) => {
                    return Err(FetchError::Exhausted {
                        url,
                        attempts: attempt,
                        reason,
                    })
                }
            }
        };
        let got = records.len();
        raw.extend(records);
        if got < page_size {
            break;
        }
        page += 1;
    }

    // Same conversion, duplicate check, and ordering as the file parser.
    let mut txs = Vec::with_capacity(raw.len());
    for (idx, record) in raw.into_iter().enumerate() {
        txs.push(record.into_transaction(idx + 1)?);
    }
    let mut seen = std::collections::HashSet::new();
    for tx in &txs {
        if !seen.insert(tx.tx_hash.clone()) {
            return Err(TxioError::DuplicateTxHash(tx.tx_hash.clone()).into());
        }
    }
    txs.sort_by_key(|t| t.timestamp);
    Ok(txs)
}
