//! The ordered 59-entry feature catalog.
//!
//! Every feature vector position maps to exactly one catalog entry; names are
//! kept verbatim from the upstream catalog, quirks included (`enegy`,
//! `q_0_0.4`, and the inconsistent widths spelling on the balanceIn wavelet
//! entry). `burstInstance_outdegree` appears twice in the upstream listing;
//! the catalog collapses it to a single slot and flags the entry.

pub const CATALOG_VERSION: &str = "b59-v1";
pub const FEATURE_COUNT: usize = 59;

/// Which derived series a formula reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceSeries {
    /// Per-epoch indegree counts.
    Indegree,
    /// Per-epoch outdegree counts.
    Outdegree,
    /// Per-epoch indegree + outdegree.
    DegreeTotal,
    /// Inter-event times over the merged in+out stream.
    IttimeAll,
    /// Inter-event times over incoming transactions.
    IttimeIn,
    /// Inter-event times over outgoing transactions.
    IttimeOut,
    /// Gas price per merged-stream event, ether per gas unit.
    GasPrice,
    /// Per-epoch attractiveness fractions.
    Attractiveness,
    /// Per-epoch ether received.
    BalanceIn,
    /// Per-epoch ether sent.
    BalanceOut,
    /// Per-epoch largest single incoming payment.
    MaxInPayment,
    /// Per-epoch largest single outgoing payment.
    MaxOutPayment,
}

/// Account-level scalar features.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarKind {
    /// Incoming-transaction count over max(epoch span, 1).
    IndegreeTimeInv,
    /// Outgoing-transaction count over max(epoch span, 1).
    OutdegreeTimeInv,
    /// Total transaction count over max(epoch span, 1).
    DegreeTimeInv,
    /// Number of the account's transactions transferring zero value.
    ZeroTransactions,
    /// Net balance: total ether received minus total ether sent.
    TotalBal,
    /// Seconds from the first transaction to the ledger snapshot.
    TransactedFirst,
    /// Seconds from the last transaction to the ledger snapshot.
    TransactedLast,
    /// Seconds between the first and last transaction.
    ActiveDuration,
    /// Mean ether received per incoming transaction.
    AveragePerInBal,
    /// Number of distinct sender addresses.
    UniqueIn,
    /// Seconds from the last transaction to the ledger snapshot.
    LastActiveSince,
    /// Watts-Strogatz local clustering coefficient.
    ClusteringCoeff,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Formula {
    Scalar(ScalarKind),
    Quantile(SourceSeries, f64),
    Median(SourceSeries),
    Mean(SourceSeries),
    /// Real part of FFT coefficient 0 (sum of the series).
    FftCoeff0Real(SourceSeries),
    EnergyRatioChunks {
        source: SourceSeries,
        segments: usize,
        focus: usize,
    },
    IndexMassQuantile(SourceSeries, f64),
    LinearTrendPValue(SourceSeries),
    /// Ricker-wavelet convolution coefficient 0 at the given width.
    CwtCoeff0 {
        source: SourceSeries,
        width: usize,
    },
    BurstCount(SourceSeries),
    BurstLongestRun(SourceSeries),
    /// Index of the first burst; 0 when the series never bursts.
    BurstFirstInstance(SourceSeries),
}

#[derive(Debug, Clone, Copy)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub formula: Formula,
    /// The upstream listing repeats this name; kept as one slot.
    pub listed_twice: bool,
}

const fn entry(name: &'static str, formula: Formula) -> CatalogEntry {
    CatalogEntry {
        name,
        formula,
        listed_twice: false,
    }
}

use Formula::*;
use ScalarKind::*;
use SourceSeries::*;

pub static CATALOG: [CatalogEntry; FEATURE_COUNT] = [
    entry("indegreeTimeInv", Scalar(IndegreeTimeInv)),
    entry("outdegreeTimeInv", Scalar(OutdegreeTimeInv)),
    entry("degreeTimeInv", Scalar(DegreeTimeInv)),
    entry("numberOfburstTemporalInOut", BurstCount(IttimeAll)),
    entry("longestBurstTemporalInOut", BurstLongestRun(IttimeAll)),
    entry("numberOfburstTemporalIn", BurstCount(IttimeIn)),
    entry("longestBurstTemporalIn", BurstLongestRun(IttimeIn)),
    entry("numberOfburstTemporalOut", BurstCount(IttimeOut)),
    entry("longestBurstTemporalOut", BurstLongestRun(IttimeOut)),
    entry("numberOfburstDegreeInOut", BurstCount(DegreeTotal)),
    entry("longestBurstDegreeInOutAtTime", BurstLongestRun(DegreeTotal)),
    entry("numberOfburstDegreeIn", BurstCount(Indegree)),
    entry("longestBurstDegreeInAtTime", BurstLongestRun(Indegree)),
    entry("numberOfburstDegreeOut", BurstCount(Outdegree)),
    entry("longestBurstDegreeOutAtTime", BurstLongestRun(Outdegree)),
    entry("zeroTransactions", Scalar(ZeroTransactions)),
    entry("totalBal", Scalar(TotalBal)),
    entry("transactedFirst", Scalar(TransactedFirst)),
    entry("transactedLast", Scalar(TransactedLast)),
    entry("activeDuration", Scalar(ActiveDuration)),
    entry("averagePerInBal", Scalar(AveragePerInBal)),
    entry("uniqueIn", Scalar(UniqueIn)),
    entry("lastActiveSince", Scalar(LastActiveSince)),
    entry(
        "indegree__index_mass_quantile__q_0.1",
        IndexMassQuantile(Indegree, 0.1),
    ),
    entry(
        "indegree__energy_ratio_by_chunks__num_segments_10__segment_focus_0",
        EnergyRatioChunks {
            source: Indegree,
            segments: 10,
            focus: 0,
        },
    ),
    entry(
        "indegree__linear_trend__attr_\"pvalue\"",
        LinearTrendPValue(Indegree),
    ),
    entry("ittime__quantile__q_0.7", Quantile(IttimeAll, 0.7)),
    entry(
        "ittime__fft_coefficient__coeff_0__attr_\"real\"",
        FftCoeff0Real(IttimeAll),
    ),
    entry("ittime__median", Median(IttimeAll)),
    entry(
        "outdegree__energy_ratio_by_chunks__num_segments_10__segment_focus_0",
        EnergyRatioChunks {
            source: Outdegree,
            segments: 10,
            focus: 0,
        },
    ),
    entry(
        "outdegree__enegy_ratio_by_chunks__num_segments_10__segment_focus_1",
        EnergyRatioChunks {
            source: Outdegree,
            segments: 10,
            focus: 1,
        },
    ),
    entry(
        "outdegree__fft_coefficient__coeff_0__attr_\"real\"",
        FftCoeff0Real(Outdegree),
    ),
    entry("gasPrice__quantile__q_0.2", Quantile(GasPrice, 0.2)),
    entry("gasPrice__quantile__q_0.1", Quantile(GasPrice, 0.1)),
    entry(
        "gasPrice__cwt_coefficients__widths_(2, 5, 10, 20)__coeff_0__w_20",
        CwtCoeff0 {
            source: GasPrice,
            width: 20,
        },
    ),
    entry("attractiveness__median", Median(Attractiveness)),
    entry(
        "attractiveness__quantile__q_0_0.4",
        Quantile(Attractiveness, 0.4),
    ),
    entry("attractiveness__mean", Mean(Attractiveness)),
    entry("balanceOut__quantile__q_0.1", Quantile(BalanceOut, 0.1)),
    entry("balanceOut__quantile__q_0.3", Quantile(BalanceOut, 0.3)),
    entry(
        "balanceOut__cwt_coefficients__widths_(2, 5, 10, 20)__coeff_0__w_2",
        CwtCoeff0 {
            source: BalanceOut,
            width: 2,
        },
    ),
    entry("balanceIn__quantile__q_0.4", Quantile(BalanceIn, 0.4)),
    entry(
        "balanceIn__cwt_coefficients__widths_(2, 5, 10,20)__coeff_0__w_20",
        CwtCoeff0 {
            source: BalanceIn,
            width: 20,
        },
    ),
    entry("balanceIn__quantile__q_0.3", Quantile(BalanceIn, 0.3)),
    entry("maxInPayment__quantile__q_0.3", Quantile(MaxInPayment, 0.3)),
    entry("maxInPayment__quantile__q_0.2", Quantile(MaxInPayment, 0.2)),
    entry(
        "maxInPayment__cwt_coefficients__widths_(2, 5, 10, 20)__coeff_0__w_5",
        CwtCoeff0 {
            source: MaxInPayment,
            width: 5,
        },
    ),
    entry("maxOutPayment__quantile__q_0.6", Quantile(MaxOutPayment, 0.6)),
    entry("maxOutPayment__quantile__q_0.1", Quantile(MaxOutPayment, 0.1)),
    entry(
        "maxOutPayment__cwt_coefficients__widths_(2, 5, 10, 20)__coeff_0__w_2",
        CwtCoeff0 {
            source: MaxOutPayment,
            width: 2,
        },
    ),
    entry("clusteringCoeff", Scalar(ClusteringCoeff)),
    entry("burstCount_gasPrice", BurstCount(GasPrice)),
    entry("burstCount_balanceIn", BurstCount(BalanceIn)),
    entry("burstCount_balanceOut", BurstCount(BalanceOut)),
    entry("burstInstance_indegree", BurstFirstInstance(Indegree)),
    CatalogEntry {
        name: "burstInstance_outdegree",
        formula: BurstFirstInstance(Outdegree),
        listed_twice: true,
    },
    entry("burstInstance_maxInPayment", BurstFirstInstance(MaxInPayment)),
    entry(
        "burstInstance_maxOutPayment",
        BurstFirstInstance(MaxOutPayment),
    ),
    entry("burstInstance_gasPrice", BurstFirstInstance(GasPrice)),
];

/// Position of a feature name in the catalog.
pub fn position(name: &str) -> Option<usize> {
    CATALOG.iter().position(|e| e.name == name)
}
