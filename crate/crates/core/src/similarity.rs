//! Cosine-similarity analysis and K-Means homophily clustering.
//!
//! Feature columns are z-scored over the analysis set by default (raw scales
//! differ by orders of magnitude); pass `standardize = false` for the literal
//! raw-feature reading.

use std::collections::BTreeMap;
use std::io::Write;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::num::child_seed_index;
use crate::splits::LabeledDataset;
use crate::txio::Address;

#[derive(Debug, thiserror::Error)]
pub enum SimilarityError {
    #[error("cosine of a zero vector is undefined")]
    ZeroVector,
    #[error("vector lengths differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("k-means needs at least k points: n = {n}, k = {k}")]
    TooFewPoints { n: usize, k: usize },
    #[error("k must be positive")]
    ZeroK,
    #[error("no malicious rows to analyze")]
    NoMaliciousRows,
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Cosine similarity, clamped to [-1, 1].
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64, SimilarityError> {
    if a.len() != b.len() {
        return Err(SimilarityError::DimensionMismatch(a.len(), b.len()));
    }
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(SimilarityError::ZeroVector);
    }
    Ok((dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0))
}

/// Z-score each column over the given rows. Zero-variance columns are only
/// centered.
pub fn standardize_columns(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    if rows.is_empty() {
        return Vec::new();
    }
    let dim = rows[0].len();
    let n = rows.len() as f64;
    let mut means = vec![0.0; dim];
    for row in rows {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut means {
        *m /= n;
    }
    let mut stds = vec![0.0; dim];
    for row in rows {
        for ((s, v), m) in stds.iter_mut().zip(row).zip(&means) {
            *s += (v - m) * (v - m);
        }
    }
    for s in &mut stds {
        *s = (*s / n).sqrt();
        if *s == 0.0 {
            *s = 1.0;
        }
    }
    rows.iter()
        .map(|row| {
            row.iter()
                .zip(&means)
                .zip(&stds)
                .map(|((v, m), s)| (v - m) / s)
                .collect()
        })
        .collect()
}

/// Symmetric account-level cosine matrix with a unit diagonal.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    pub addresses: Vec<Address>,
    pub values: Vec<Vec<f64>>,
}

impl SimilarityMatrix {
    pub fn compute(items: &[(Address, Vec<f64>)]) -> Result<SimilarityMatrix, SimilarityError> {
        let n = items.len();
        let mut values = vec![vec![0.0; n]; n];
        for i in 0..n {
            values[i][i] = 1.0;
            for j in i + 1..n {
                let cs = cosine(&items[i].1, &items[j].1)?;
                values[i][j] = cs;
                values[j][i] = cs;
            }
        }
        Ok(SimilarityMatrix {
            addresses: items.iter().map(|(a, _)| a.clone()).collect(),
            values,
        })
    }

    /// CSV with address row/column headers (heatmap substrate).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), SimilarityError> {
        let mut writer = csv::Writer::from_writer(out);
        let mut header = vec![String::new()];
        header.extend(self.addresses.iter().map(|a| a.to_string()));
        writer.write_record(&header).map_err(std::io::Error::other)?;
        for (addr, row) in self.addresses.iter().zip(&self.values) {
            let mut record = vec![addr.to_string()];
            record.extend(row.iter().map(|v| v.to_string()));
            writer.write_record(&record).map_err(std::io::Error::other)?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Activity-pair similarity probabilities: element (a, b) is the fraction of
/// cross-activity account pairs with cosine similarity >= 0.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ActivitySimilarity {
    pub activities: Vec<String>,
    pub p_geq0: Vec<Vec<f64>>,
    pub p_lt0: Vec<Vec<f64>>,
    /// True where every pair scored >= 0.
    pub similar: Vec<Vec<bool>>,
}

impl ActivitySimilarity {
    pub fn write_csv<W: Write>(&self, matrix: &[Vec<f64>], out: W) -> Result<(), SimilarityError> {
        let mut writer = csv::Writer::from_writer(out);
        let mut header = vec![String::new()];
        header.extend(self.activities.iter().cloned());
        writer.write_record(&header).map_err(std::io::Error::other)?;
        for (activity, row) in self.activities.iter().zip(matrix) {
            let mut record = vec![activity.clone()];
            record.extend(row.iter().map(|v| v.to_string()));
            writer.write_record(&record).map_err(std::io::Error::other)?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Probability of non-negative cosine similarity for every pair of malicious
/// activities. Within-activity cells enumerate unordered distinct pairs and
/// default to 1 for singleton activities; cross-activity cells enumerate the
/// full product.
pub fn pairwise_activity_similarity(
    dataset: &LabeledDataset,
    standardize: bool,
) -> Result<ActivitySimilarity, SimilarityError> {
    let rows: Vec<&crate::splits::LabeledRow> =
        dataset.rows().iter().filter(|r| r.is_malicious()).collect();
    if rows.is_empty() {
        return Err(SimilarityError::NoMaliciousRows);
    }
    let raw: Vec<Vec<f64>> = rows.iter().map(|r| r.vector.values.clone()).collect();
    let vectors = if standardize {
        standardize_columns(&raw)
    } else {
        raw
    };

    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, row) in rows.iter().enumerate() {
        groups.entry(row.activity.as_str()).or_default().push(i);
    }
    let activities: Vec<String> = groups.keys().map(|s| s.to_string()).collect();
    let index_sets: Vec<&Vec<usize>> = groups.values().collect();

    let m = activities.len();
    let mut p_geq0 = vec![vec![0.0; m]; m];
    let mut p_lt0 = vec![vec![0.0; m]; m];
    let mut similar = vec![vec![false; m]; m];
    for a in 0..m {
        for b in a..m {
            let (geq, lt) = if a == b {
                let ids = index_sets[a];
                let mut geq = 0usize;
                let mut lt = 0usize;
                for x in 0..ids.len() {
                    for y in x + 1..ids.len() {
                        let cs = cosine(&vectors[ids[x]], &vectors[ids[y]])?;
                        if cs >= 0.0 {
                            geq += 1;
                        } else {
                            lt += 1;
                        }
                    }
                }
                (geq, lt)
            } else {
                let mut geq = 0usize;
                let mut lt = 0usize;
                for &x in index_sets[a] {
                    for &y in index_sets[b] {
                        let cs = cosine(&vectors[x], &vectors[y])?;
                        if cs >= 0.0 {
                            geq += 1;
                        } else {
                            lt += 1;
                        }
                    }
                }
                (geq, lt)
            };
            let total = geq + lt;
            let (pg, pl) = if total == 0 {
                // singleton activity against itself: trivially similar
                (1.0, 0.0)
            } else {
                (geq as f64 / total as f64, lt as f64 / total as f64)
            };
            p_geq0[a][b] = pg;
            p_geq0[b][a] = pg;
            p_lt0[a][b] = pl;
            p_lt0[b][a] = pl;
            similar[a][b] = pg == 1.0;
            similar[b][a] = pg == 1.0;
        }
    }

    Ok(ActivitySimilarity {
        activities,
        p_geq0,
        p_lt0,
        similar,
    })
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// K-Means result on plain vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct KmeansOutcome {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    /// Inertia after each assignment step of the winning restart.
    pub inertia_history: Vec<f64>,
    /// Inertia trajectories of every restart, for monotonicity checks.
    pub restart_histories: Vec<Vec<f64>>,
}

/// Lloyd's algorithm with k-means++ seeding and best-of-restarts selection by
/// (inertia, restart index). Empty clusters are repaired by splitting the
/// highest-inertia cluster at its farthest member.
pub fn kmeans(
    points: &[Vec<f64>],
    k: usize,
    seed: u64,
    max_iter: usize,
    restarts: usize,
) -> Result<KmeansOutcome, SimilarityError> {
    if k == 0 {
        return Err(SimilarityError::ZeroK);
    }
    if points.len() < k {
        return Err(SimilarityError::TooFewPoints {
            n: points.len(),
            k,
        });
    }

    let mut best: Option<KmeansOutcome> = None;
    let mut restart_histories = Vec::with_capacity(restarts);
    for restart in 0..restarts.max(1) {
        let mut rng = ChaCha12Rng::seed_from_u64(child_seed_index(seed, restart as u64));
        let run = lloyd_once(points, k, &mut rng, max_iter);
        restart_histories.push(run.inertia_history.clone());
        let better = match &best {
            None => true,
            Some(b) => run.inertia < b.inertia,
        };
        if better {
            best = Some(run);
        }
    }
    let mut outcome = best.expect("at least one restart");
    outcome.restart_histories = restart_histories;
    Ok(outcome)
}

fn lloyd_once(
    points: &[Vec<f64>],
    k: usize,
    rng: &mut ChaCha12Rng,
    max_iter: usize,
) -> KmeansOutcome {
    let mut centroids = plus_plus_seeds(points, k, rng);
    let mut assignments = vec![usize::MAX; points.len()];
    let mut history = Vec::new();

    for _ in 0..max_iter {
        let mut changed = false;
        let mut inertia = 0.0;
        for (i, p) in points.iter().enumerate() {
            let (mut best_c, mut best_d) = (0usize, sq_dist(p, &centroids[0]));
            for (c, centroid) in centroids.iter().enumerate().skip(1) {
                let d = sq_dist(p, centroid);
                if d < best_d {
                    best_d = d;
                    best_c = c;
                }
            }
            if assignments[i] != best_c {
                assignments[i] = best_c;
                changed = true;
            }
            inertia += best_d;
        }
        history.push(inertia);
        if !changed {
            break;
        }

        let mut sums = vec![vec![0.0; points[0].len()]; k];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assignments) {
            counts[a] += 1;
            for (s, v) in sums[a].iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for s in &mut sums[c] {
                    *s /= counts[c] as f64;
                }
                centroids[c] = sums[c].clone();
            }
        }
        // repair empty clusters from the highest-inertia cluster
        for c in 0..k {
            if counts[c] == 0 {
                if let Some((idx, _)) = worst_member(points, &assignments, &centroids, &counts) {
                    centroids[c] = points[idx].clone();
                }
            }
        }
    }

    let inertia = *history.last().expect("at least one iteration");
    KmeansOutcome {
        k,
        assignments,
        centroids,
        inertia,
        inertia_history: history,
        restart_histories: Vec::new(),
    }
}

/// Farthest point of the cluster with the largest within-cluster SSE.
fn worst_member(
    points: &[Vec<f64>],
    assignments: &[usize],
    centroids: &[Vec<f64>],
    counts: &[usize],
) -> Option<(usize, usize)> {
    let k = centroids.len();
    let mut sse = vec![0.0; k];
    for (p, &a) in points.iter().zip(assignments) {
        sse[a] += sq_dist(p, &centroids[a]);
    }
    let donor = (0..k)
        .filter(|&c| counts[c] > 1)
        .max_by(|&a, &b| sse[a].partial_cmp(&sse[b]).expect("finite"))?;
    let idx = points
        .iter()
        .enumerate()
        .filter(|(i, _)| assignments[*i] == donor)
        .max_by(|(_, p), (_, q)| {
            sq_dist(p, &centroids[donor])
                .partial_cmp(&sq_dist(q, &centroids[donor]))
                .expect("finite")
        })
        .map(|(i, _)| i)?;
    Some((idx, donor))
}

fn plus_plus_seeds(points: &[Vec<f64>], k: usize, rng: &mut ChaCha12Rng) -> Vec<Vec<f64>> {
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    centroids.push(points[rng.gen_range(0..points.len())].clone());
    let mut dists: Vec<f64> = points
        .iter()
        .map(|p| sq_dist(p, &centroids[0]))
        .collect();
    while centroids.len() < k {
        let total: f64 = dists.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.gen_range(0.0..total);
            let mut chosen = points.len() - 1;
            for (i, d) in dists.iter().enumerate() {
                if target < *d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            chosen
        } else {
            rng.gen_range(0..points.len())
        };
        centroids.push(points[next].clone());
        for (d, p) in dists.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, centroids.last().expect("non-empty")));
        }
    }
    centroids
}

/// Cluster assignment over labeled accounts, with the activity-by-cluster
/// contingency table ranked by malicious-account count.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub k: usize,
    pub labels: BTreeMap<Address, usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    pub contingency: ContingencyTable,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContingencyTable {
    pub activities: Vec<String>,
    /// Original cluster ids ordered by descending malicious-account count.
    pub cluster_order: Vec<usize>,
    /// counts[activity][rank]
    pub counts: Vec<Vec<usize>>,
}

impl ContingencyTable {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), SimilarityError> {
        let mut writer = csv::Writer::from_writer(out);
        let mut header = vec!["activity".to_string(), "total".to_string()];
        header.extend((1..=self.cluster_order.len()).map(|r| format!("cluster_{r}")));
        writer.write_record(&header).map_err(std::io::Error::other)?;
        for (activity, row) in self.activities.iter().zip(&self.counts) {
            let total: usize = row.iter().sum();
            let mut record = vec![activity.clone(), total.to_string()];
            record.extend(row.iter().map(|c| c.to_string()));
            writer.write_record(&record).map_err(std::io::Error::other)?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// K-Means over the malicious accounts of a dataset, with k = activities + 1
/// unless overridden.
pub fn cluster_accounts(
    dataset: &LabeledDataset,
    k_override: Option<usize>,
    standardize: bool,
    seed: u64,
    restarts: usize,
) -> Result<ClusterAssignment, SimilarityError> {
    let rows: Vec<&crate::splits::LabeledRow> =
        dataset.rows().iter().filter(|r| r.is_malicious()).collect();
    if rows.is_empty() {
        return Err(SimilarityError::NoMaliciousRows);
    }
    let k = k_override.unwrap_or(dataset.activities().len() + 1);
    let raw: Vec<Vec<f64>> = rows.iter().map(|r| r.vector.values.clone()).collect();
    let points = if standardize {
        standardize_columns(&raw)
    } else {
        raw
    };
    let outcome = kmeans(&points, k, seed, 300, restarts)?;

    let labels: BTreeMap<Address, usize> = rows
        .iter()
        .zip(&outcome.assignments)
        .map(|(r, &c)| (r.address().clone(), c))
        .collect();

    let mut cluster_sizes = vec![0usize; k];
    for &c in &outcome.assignments {
        cluster_sizes[c] += 1;
    }
    let mut cluster_order: Vec<usize> = (0..k).collect();
    cluster_order.sort_by_key(|&c| std::cmp::Reverse(cluster_sizes[c]));

    let activities: Vec<String> = dataset.activities();
    let counts: Vec<Vec<usize>> = activities
        .iter()
        .map(|activity| {
            cluster_order
                .iter()
                .map(|&c| {
                    rows.iter()
                        .zip(&outcome.assignments)
                        .filter(|(r, &a)| a == c && &r.activity == activity)
                        .count()
                })
                .collect()
        })
        .collect();

    Ok(ClusterAssignment {
        k,
        labels,
        centroids: outcome.centroids,
        inertia: outcome.inertia,
        contingency: ContingencyTable {
            activities,
            cluster_order,
            counts,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pad59(head: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; crate::features::FEATURE_COUNT];
        v[..head.len()].copy_from_slice(head);
        v
    }

    #[test]
    fn cosine_identical_and_orthogonal() {
        let a = pad59(&[1.0]);
        assert_eq!(cosine(&a, &a).unwrap(), 1.0);
        let b = pad59(&[0.0, 1.0]);
        assert_eq!(cosine(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn cosine_hand_value() {
        let a = pad59(&[1.0, 2.0, 3.0]);
        let b = pad59(&[4.0, 5.0, 6.0]);
        let want = 32.0 / (14.0f64.sqrt() * 77.0f64.sqrt());
        assert!((cosine(&a, &b).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn cosine_rejects_zero_vector_and_mismatch() {
        let a = pad59(&[1.0]);
        let zero = vec![0.0; crate::features::FEATURE_COUNT];
        assert!(matches!(cosine(&a, &zero), Err(SimilarityError::ZeroVector)));
        assert!(matches!(
            cosine(&a, &[1.0, 2.0]),
            Err(SimilarityError::DimensionMismatch(_, _))
        ));
    }

    #[test]
    fn cosine_scale_invariance() {
        let a = pad59(&[1.0, -2.0, 0.5]);
        let b = pad59(&[0.3, 4.0, -1.0]);
        let base = cosine(&a, &b).unwrap();
        for c in [0.5, 3.0, 1e6] {
            let scaled: Vec<f64> = a.iter().map(|x| x * c).collect();
            assert!((cosine(&scaled, &b).unwrap() - base).abs() < 1e-12);
        }
    }

    #[test]
    fn kmeans_k1_centroid_is_mean() {
        let points = vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![1.0, 3.0]];
        let out = kmeans(&points, 1, 7, 300, 5).unwrap();
        assert!(out.assignments.iter().all(|&a| a == 0));
        assert!((out.centroids[0][0] - 1.0).abs() < 1e-12);
        assert!((out.centroids[0][1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kmeans_k_equals_n_zero_inertia() {
        let points = vec![vec![0.0], vec![5.0], vec![9.0]];
        let out = kmeans(&points, 3, 3, 300, 5).unwrap();
        assert_eq!(out.inertia, 0.0);
    }

    #[test]
    fn kmeans_rejects_n_less_than_k() {
        let points = vec![vec![0.0], vec![1.0]];
        assert!(matches!(
            kmeans(&points, 3, 1, 300, 5),
            Err(SimilarityError::TooFewPoints { n: 2, k: 3 })
        ));
    }

    #[test]
    fn kmeans_deterministic_and_monotone() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let points: Vec<Vec<f64>> = (0..40)
            .map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            .collect();
        let a = kmeans(&points, 4, 11, 300, 10).unwrap();
        let b = kmeans(&points, 4, 11, 300, 10).unwrap();
        assert_eq!(a, b);
        for history in &a.restart_histories {
            for w in history.windows(2) {
                assert!(w[1] <= w[0] + 1e-9, "inertia must not increase: {history:?}");
            }
        }
    }

    #[test]
    fn kmeans_final_assignment_is_fixed_point() {
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let points: Vec<Vec<f64>> = (0..30)
            .map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            .collect();
        let out = kmeans(&points, 3, 2, 300, 5).unwrap();
        for (p, &a) in points.iter().zip(&out.assignments) {
            let nearest = (0..out.k)
                .min_by(|&x, &y| {
                    sq_dist(p, &out.centroids[x])
                        .partial_cmp(&sq_dist(p, &out.centroids[y]))
                        .unwrap()
                })
                .unwrap();
            assert_eq!(
                sq_dist(p, &out.centroids[nearest]),
                sq_dist(p, &out.centroids[a])
            );
        }
    }

    #[test]
    fn similarity_matrix_symmetric_unit_diagonal() {
        let items: Vec<(Address, Vec<f64>)> = (0..6u32)
            .map(|i| {
                let addr = Address::parse(&format!("0x{:040x}", i + 1)).unwrap();
                (addr, pad59(&[i as f64 + 1.0, (i % 3) as f64 - 1.0, 0.5]))
            })
            .collect();
        let m = SimilarityMatrix::compute(&items).unwrap();
        for i in 0..6 {
            assert_eq!(m.values[i][i], 1.0);
            for j in 0..6 {
                assert_eq!(m.values[i][j], m.values[j][i]);
                assert!(m.values[i][j].abs() <= 1.0 + 1e-12);
            }
        }
    }

    mod activity {
        use super::*;
        use crate::splits::{LabeledDataset, LabeledRow};
        use crate::txio::{Klass, LabelSource};

        fn dataset(groups: &[(&str, Vec<Vec<f64>>)]) -> LabeledDataset {
            let mut rows = Vec::new();
            let mut tag = 1u32;
            for (activity, vectors) in groups {
                for v in vectors {
                    let addr = Address::parse(&format!("0x{:040x}", tag)).unwrap();
                    rows.push(LabeledRow {
                        vector: crate::features::FeatureVector::new(addr, v.clone()),
                        klass: Klass::Malicious,
                        activity: activity.to_string(),
                        source: LabelSource::Da,
                    });
                    tag += 1;
                }
            }
            LabeledDataset::new(rows, LabelSource::Da).unwrap()
        }

        #[test]
        fn identical_vectors_are_similar() {
            let v = pad59(&[1.0, 2.0]);
            let d = dataset(&[("A", vec![v.clone()]), ("B", vec![v.clone()])]);
            let sim = pairwise_activity_similarity(&d, false).unwrap();
            assert_eq!(sim.p_geq0[0][1], 1.0);
            assert!(sim.similar[0][1]);
        }

        #[test]
        fn antipodal_vectors_are_dissimilar() {
            let v = pad59(&[1.0, 2.0]);
            let neg: Vec<f64> = v.iter().map(|x| -x).collect();
            let d = dataset(&[("A", vec![v]), ("B", vec![neg])]);
            let sim = pairwise_activity_similarity(&d, false).unwrap();
            assert_eq!(sim.p_geq0[0][1], 0.0);
            assert_eq!(sim.p_lt0[0][1], 1.0);
            assert!(!sim.similar[0][1]);
        }

        #[test]
        fn two_by_two_exhaustive() {
            // pairs: (a1,b1) +, (a1,b2) -, (a2,b1) +, (a2,b2) + -> p = 3/4
            let a1 = pad59(&[1.0, 0.0]);
            let a2 = pad59(&[0.0, 1.0]);
            let b1 = pad59(&[1.0, 0.5]);
            let b2 = pad59(&[-1.0, 0.5]);
            assert!(cosine(&a1, &b1).unwrap() >= 0.0);
            assert!(cosine(&a1, &b2).unwrap() < 0.0);
            assert!(cosine(&a2, &b1).unwrap() >= 0.0);
            assert!(cosine(&a2, &b2).unwrap() >= 0.0);
            let d = dataset(&[("A", vec![a1, a2]), ("B", vec![b1, b2])]);
            let sim = pairwise_activity_similarity(&d, false).unwrap();
            assert!((sim.p_geq0[0][1] - 0.75).abs() < 1e-12);
            assert!((sim.p_lt0[0][1] - 0.25).abs() < 1e-12);
        }

        #[test]
        fn complementarity_holds() {
            let d = dataset(&[
                ("A", vec![pad59(&[1.0, 2.0]), pad59(&[-1.0, 1.0])]),
                ("B", vec![pad59(&[0.5, -2.0]), pad59(&[3.0, 0.1])]),
            ]);
            let sim = pairwise_activity_similarity(&d, false).unwrap();
            for (row_g, row_l) in sim.p_geq0.iter().zip(&sim.p_lt0) {
                for (g, l) in row_g.iter().zip(row_l) {
                    assert!((g + l - 1.0).abs() < 1e-12);
                }
            }
        }
    }
}
