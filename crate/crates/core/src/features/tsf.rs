//! Time-series feature formulas.
//!
//! Empty or all-zero substrates yield the degenerate value 0 so every
//! downstream consumer sees finite input.

use statrs::function::beta::beta_reg;

use crate::num::{mean, median, quantile};

/// Real part of FFT coefficient 0, i.e. the plain sum of the series.
pub fn fft_coeff0_real(xs: &[f64]) -> f64 {
    xs.iter().sum()
}

/// Sum of squares inside one of `segments` contiguous chunks divided by the
/// total sum of squares. Chunks follow array-split sizing: the first
/// `n % segments` chunks hold one extra element.
pub fn energy_ratio_by_chunks(xs: &[f64], segments: usize, focus: usize) -> f64 {
    assert!(focus < segments, "focus chunk out of range");
    if xs.is_empty() {
        return 0.0;
    }
    let total: f64 = xs.iter().map(|x| x * x).sum();
    if total == 0.0 {
        return 0.0;
    }
    let n = xs.len();
    let q = n / segments;
    let r = n % segments;
    let size = if focus < r { q + 1 } else { q };
    let start = focus * q + focus.min(r);
    xs[start..start + size].iter().map(|x| x * x).sum::<f64>() / total
}

/// Smallest relative index where the cumulative absolute mass reaches
/// `q` of the total: `(i + 1) / n` for the first qualifying index `i`.
pub fn index_mass_quantile(xs: &[f64], q: f64) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let total: f64 = xs.iter().map(|x| x.abs()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let target = q * total;
    let mut cum = 0.0;
    for (i, x) in xs.iter().enumerate() {
        cum += x.abs();
        if cum >= target {
            return (i + 1) as f64 / xs.len() as f64;
        }
    }
    1.0
}

/// Two-sided p-value of the least-squares slope of the series against its
/// index, via the t statistic with n-2 degrees of freedom and the regularized
/// incomplete beta function.
///
/// Degenerate cases return 0: fewer than 3 points, or zero residual variance
/// (a constant series or an exact linear fit).
pub fn linear_trend_pvalue(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 3 {
        return 0.0;
    }
    let nf = n as f64;
    let x_mean = (nf - 1.0) / 2.0;
    let y_mean = mean(xs);
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (i, &y) in xs.iter().enumerate() {
        let dx = i as f64 - x_mean;
        let dy = y - y_mean;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let rss = (syy - slope * sxy).max(0.0);
    if rss <= f64::MIN_POSITIVE {
        return 0.0;
    }
    let df = nf - 2.0;
    let se = (rss / df / sxx).sqrt();
    let t = slope / se;
    beta_reg(df / 2.0, 0.5, df / (df + t * t))
}

/// Ricker (mexican-hat) wavelet sampled at `points` positions centered on
/// `(points - 1) / 2`, with width parameter `a`.
fn ricker(points: usize, a: f64) -> Vec<f64> {
    let amp = 2.0 / ((3.0 * a).sqrt() * std::f64::consts::PI.powf(0.25));
    let center = (points as f64 - 1.0) / 2.0;
    (0..points)
        .map(|i| {
            let t = i as f64 - center;
            let u = t / a;
            amp * (1.0 - u * u) * (-t * t / (2.0 * a * a)).exp()
        })
        .collect()
}

/// Coefficient 0 of the same-length convolution of the series with a Ricker
/// wavelet of the given width; the wavelet spans `min(10 * width, n)` points.
pub fn cwt_coeff0(xs: &[f64], width: usize) -> f64 {
    let n = xs.len();
    if n == 0 {
        return 0.0;
    }
    let m = (10 * width).min(n);
    let kernel = ricker(m, width as f64);
    // convolve(xs, kernel, mode="same")[0] == full[(m - 1) / 2]
    let c = (m - 1) / 2;
    let mut acc = 0.0;
    for (j, &x) in xs.iter().enumerate().take(c + 1) {
        acc += x * kernel[c - j];
    }
    acc
}

pub fn ts_quantile(xs: &[f64], q: f64) -> f64 {
    quantile(xs, q)
}

pub fn ts_median(xs: &[f64]) -> f64 {
    median(xs)
}

pub fn ts_mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        mean(xs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fft_dc_component_is_sum() {
        assert_eq!(fft_coeff0_real(&[1.0, 2.0, 3.0]), 6.0);
        assert_eq!(fft_coeff0_real(&[]), 0.0);
    }

    #[test]
    fn energy_ratio_equal_values() {
        let xs = vec![2.0; 10];
        assert!((energy_ratio_by_chunks(&xs, 10, 0) - 0.1).abs() < 1e-12);
        assert!((energy_ratio_by_chunks(&xs, 10, 7) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn energy_ratio_uneven_split() {
        // n=12, 10 segments: first two chunks hold 2 items each
        let xs: Vec<f64> = (1..=12).map(|i| i as f64).collect();
        let total: f64 = xs.iter().map(|x| x * x).sum();
        let expect = (1.0 + 4.0) / total;
        assert!((energy_ratio_by_chunks(&xs, 10, 0) - expect).abs() < 1e-12);
        // chunk 2 starts after the two fat chunks: element 5
        let expect2 = 25.0 / total;
        assert!((energy_ratio_by_chunks(&xs, 10, 2) - expect2).abs() < 1e-12);
    }

    #[test]
    fn energy_ratio_short_series_has_empty_tail_chunks() {
        let xs = [3.0, 4.0];
        assert!((energy_ratio_by_chunks(&xs, 10, 0) - 9.0 / 25.0).abs() < 1e-12);
        assert_eq!(energy_ratio_by_chunks(&xs, 10, 5), 0.0);
    }

    #[test]
    fn index_mass_all_at_front() {
        let mut xs = vec![0.0; 8];
        xs[0] = 10.0;
        assert!((index_mass_quantile(&xs, 0.1) - 1.0 / 8.0).abs() < 1e-12);
    }

    #[test]
    fn index_mass_uniform() {
        let xs = vec![1.0; 10];
        assert!((index_mass_quantile(&xs, 0.5) - 0.5).abs() < 1e-12);
        assert!((index_mass_quantile(&xs, 1.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn linear_trend_flat_series_is_degenerate() {
        assert_eq!(linear_trend_pvalue(&[5.0, 5.0, 5.0, 5.0]), 0.0);
        assert_eq!(linear_trend_pvalue(&[1.0, 2.0]), 0.0);
        // exact linear fit: zero residual
        assert_eq!(linear_trend_pvalue(&[1.0, 2.0, 3.0, 4.0]), 0.0);
    }

    #[test]
    fn linear_trend_no_slope_high_pvalue() {
        // odd-length zig-zag: slope exactly 0, plenty of residual -> p = 1
        let p = linear_trend_pvalue(&[1.0, -1.0, 1.0, -1.0, 1.0]);
        assert!((p - 1.0).abs() < 1e-9, "got {p}");
    }

    #[test]
    fn linear_trend_strong_slope_small_pvalue() {
        let xs: Vec<f64> = (0..30).map(|i| i as f64 + if i % 2 == 0 { 0.1 } else { -0.1 }).collect();
        let p = linear_trend_pvalue(&xs);
        assert!(p < 1e-12, "got {p}");
    }

    #[test]
    fn ricker_peak_at_center() {
        let k = ricker(21, 2.0);
        let max = k.iter().cloned().fold(f64::MIN, f64::max);
        assert_eq!(k[10], max);
        // symmetric
        for i in 0..10 {
            assert!((k[i] - k[20 - i]).abs() < 1e-12);
        }
    }

    #[test]
    fn cwt_single_point() {
        // kernel length min(10w, 1) = 1; center t = 0 -> amplitude only
        let a: f64 = 2.0;
        let amp = 2.0 / ((3.0 * a).sqrt() * std::f64::consts::PI.powf(0.25));
        let got = cwt_coeff0(&[3.0], 2);
        assert!((got - 3.0 * amp).abs() < 1e-12);
    }

    #[test]
    fn cwt_empty_is_zero() {
        assert_eq!(cwt_coeff0(&[], 20), 0.0);
    }
}
