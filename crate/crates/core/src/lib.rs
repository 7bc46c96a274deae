//! Behavioral screening toolkit for permissionless-blockchain accounts.
//!
//! The pipeline: ingest external-transaction logs and account labels
//! ([`txio`]), derive per-account temporal series ([`series`]) and the
//! 59-dimensional feature vector ([`features`]), analyze cross-activity
//! similarity and clustering ([`similarity`]), build bias-probing train/test
//! splits ([`splits`]), fit the classifier suite ([`models`]), generate
//! adversarial feature vectors with a tabular GAN ([`advgen`]), and score
//! everything ([`metrics`]). [`synth`] provides deterministic desk-scale
//! ledgers for all of the above.

pub mod advgen;
pub mod config;
pub mod features;
pub mod metrics;
pub mod models;
pub mod num;
pub mod series;
pub mod similarity;
pub mod splits;
pub mod synth;
pub mod txio;
pub mod wei;

#[cfg(feature = "oracle")]
pub mod oracle;
