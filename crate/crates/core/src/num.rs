//! Small shared numeric helpers and deterministic seed derivation.

/// Arithmetic mean; 0 for an empty slice.
pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population standard deviation; 0 for an empty slice.
pub fn pop_std(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64;
    var.sqrt()
}

/// Quantile with linear interpolation between order statistics.
///
/// `q` is clamped to [0, 1]. Returns 0 for an empty slice (degenerate
/// substrate convention used throughout the feature catalog).
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite series"));
    let q = q.clamp(0.0, 1.0);
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 < sorted.len() {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    } else {
        sorted[lo]
    }
}

pub fn median(xs: &[f64]) -> f64 {
    quantile(xs, 0.5)
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// FNV-1a over the label bytes; stable across runs and platforms.
fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Derive a child seed from a root seed and a stable textual label.
///
/// All randomness in a pipeline run flows from one root seed through labels
/// like `"synth"` or `"split:C2:repeat:7"`, so reruns are reproducible.
pub fn child_seed(root: u64, label: &str) -> u64 {
    splitmix64(root ^ fnv1a64(label.as_bytes()))
}

/// Derive a child seed from a root seed and an index (ensemble members,
/// experiment repeats).
pub fn child_seed_index(root: u64, index: u64) -> u64 {
    splitmix64(root ^ splitmix64(index))
}

/// Per-column z-score transform with its exact inverse. Zero-variance
/// columns keep std 1 so the transform stays invertible.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ColumnStandardizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl ColumnStandardizer {
    pub fn fit(rows: &[Vec<f64>]) -> ColumnStandardizer {
        assert!(!rows.is_empty(), "cannot fit a standardizer on no rows");
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
        ColumnStandardizer { means, stds }
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.means)
            .zip(&self.stds)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }

    pub fn inverse_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.means)
            .zip(&self.stds)
            .map(|((v, m), s)| v * s + m)
            .collect()
    }
}

/// Round half to even, used for percentage draws.
pub fn round_half_even(x: f64) -> u64 {
    let floor = x.floor();
    let frac = x - floor;
    if (frac - 0.5).abs() < 1e-12 {
        let f = floor as u64;
        if f % 2 == 0 {
            f
        } else {
            f + 1
        }
    } else {
        x.round() as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_linear_interpolation() {
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 4.0], 0.5), 2.5);
        assert_eq!(quantile(&[1.0, 2.0, 3.0], 0.0), 1.0);
        assert_eq!(quantile(&[1.0, 2.0, 3.0], 1.0), 3.0);
        // (n-1)*q = 3*0.7 = 2.1 -> 3 + 0.1*(4-3)
        assert!((quantile(&[1.0, 2.0, 3.0, 4.0], 0.7) - 3.1).abs() < 1e-12);
        assert_eq!(quantile(&[], 0.5), 0.0);
    }

    #[test]
    fn median_of_singleton() {
        assert_eq!(median(&[7.0]), 7.0);
    }

    #[test]
    fn pop_std_matches_hand_value() {
        // mean 2, squared deviations 2+0+2 over 3
        let s = pop_std(&[1.0, 2.0, 3.0]);
        assert!((s - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(pop_std(&[5.0, 5.0, 5.0]), 0.0);
    }

    #[test]
    fn child_seed_is_stable_and_label_sensitive() {
        assert_eq!(child_seed(42, "synth"), child_seed(42, "synth"));
        assert_ne!(child_seed(42, "synth"), child_seed(42, "split"));
        assert_ne!(child_seed(42, "synth"), child_seed(43, "synth"));
    }

    #[test]
    fn rounding_half_even() {
        assert_eq!(round_half_even(10.5), 10);
        assert_eq!(round_half_even(11.5), 12);
        assert_eq!(round_half_even(10.4), 10);
        assert_eq!(round_half_even(10.6), 11);
        assert_eq!(round_half_even(0.3), 0);
    }

    #[test]
    fn sigmoid_is_symmetric_and_bounded() {
        assert!((sigmoid(0.0) - 0.5).abs() < 1e-15);
        assert!((sigmoid(3.0) + sigmoid(-3.0) - 1.0).abs() < 1e-12);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
    }
}
