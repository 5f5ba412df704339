//! Small statistics helpers for the scenario reports.

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than two
/// values.
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Median; the mean of the two middle values for even lengths.
pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Centred moving average over `width` points, truncated at the ends.
pub fn moving_average(xs: &[f64], width: usize) -> Vec<f64> {
    let half = width / 2;
    (0..xs.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(xs.len());
            mean(&xs[lo..hi])
        })
        .collect()
}

/// Width of the moving average used to read peaks off noisy curves.
pub const PEAK_SMOOTHING: usize = 5;

/// Peak of a per-bin curve after centred smoothing.
pub fn smoothed_peak(xs: &[f64]) -> f64 {
    moving_average(xs, PEAK_SMOOTHING).into_iter().fold(0.0, f64::max)
}

/// Two-sided pooled two-proportion z-test. Returns the p-value of
/// `k1/n1 == k2/n2`; identical or degenerate samples give 1.
pub fn two_proportion_p_value(k1: usize, n1: usize, k2: usize, n2: usize) -> f64 {
    if n1 == 0 || n2 == 0 {
        return 1.0;
    }
    let (p1, p2) = (k1 as f64 / n1 as f64, k2 as f64 / n2 as f64);
    let pooled = (k1 + k2) as f64 / (n1 + n2) as f64;
    let var = pooled * (1.0 - pooled) * (1.0 / n1 as f64 + 1.0 / n2 as f64);
    if var == 0.0 {
        return if p1 == p2 { 1.0 } else { 0.0 };
    }
    let z = (p1 - p2).abs() / var.sqrt();
    libm::erfc(z / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_values() {
        assert_eq!(mean(&[1.0, 2.0, 6.0]), 3.0);
        assert_eq!(median(&[5.0, 1.0, 3.0]), 3.0);
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
        assert!((std_dev(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]) - (32.0f64 / 7.0).sqrt()).abs() < 1e-12);
        assert_eq!(std_dev(&[1.0]), 0.0);
    }

    #[test]
    fn smoothing_truncates_at_edges() {
        let m = moving_average(&[0.0, 0.0, 5.0, 0.0, 0.0], 5);
        assert_eq!(m, vec![5.0 / 3.0, 1.25, 1.0, 1.25, 5.0 / 3.0]);
        assert_eq!(smoothed_peak(&[0.0, 0.0, 5.0, 0.0, 0.0]), 5.0 / 3.0);
    }

    #[test]
    fn two_proportion_reference_values() {
        // 30/50 vs 20/50: pooled 0.5, standard error 0.1, z = 2
        let p = two_proportion_p_value(30, 50, 20, 50);
        assert!((p - 0.045500263896358).abs() < 1e-9, "{p}");
        assert_eq!(two_proportion_p_value(7, 10, 7, 10), 1.0);
        assert_eq!(two_proportion_p_value(10, 10, 10, 10), 1.0);
        assert!(two_proportion_p_value(0, 10, 10, 10) < 1e-4);
        assert_eq!(two_proportion_p_value(0, 10, 0, 5), 1.0);
    }
}
