//! Binomial confidence intervals and small numeric helpers.

use num_traits::Float;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `failures` out of `shots`.
pub fn wilson_interval<F: Float>(failures: u64, shots: u64, z: F) -> (F, F) {
    if shots == 0 {
        return (F::zero(), F::one());
    }
    let n = F::from(shots).unwrap();
    let p = F::from(failures).unwrap() / n;
    let two = F::from(2.0).unwrap();
    let four = F::from(4.0).unwrap();
    let z2 = z * z;
    let denom = F::one() + z2 / n;
    let centre = (p + z2 / (two * n)) / denom;
    let half = z * ((p * (F::one() - p) / n) + z2 / (four * n * n)).sqrt() / denom;
    let lo = (centre - half).max(F::zero());
    let hi = (centre + half).min(F::one());
    // guard against rounding pushing the bounds past the point estimate
    (lo.min(p), hi.max(p))
}

/// Ordinary least-squares slope and intercept of `y` on `x`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_contains_estimate() {
        for (k, n) in [(0u64, 10u64), (5, 10), (10, 10), (1, 2000), (700, 2000)] {
            let (lo, hi) = wilson_interval(k, n, Z95);
            let p = k as f64 / n as f64;
            assert!(lo <= p && p <= hi, "{k}/{n}: {lo} {p} {hi}");
            assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
        }
    }

    #[test]
    fn wilson_known_value() {
        // 10/100 at z = 1.96: [0.0552, 0.1744]
        let (lo, hi) = wilson_interval(10, 100, 1.96f64);
        assert!((lo - 0.05522).abs() < 1e-4);
        assert!((hi - 0.17437).abs() < 1e-4);
    }

    #[test]
    fn wilson_f32() {
        let (lo, hi) = wilson_interval(3u64, 50u64, 1.96f32);
        assert!(lo < 0.06 && hi > 0.06);
    }

    #[test]
    fn fit_recovers_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x - 1.0).collect();
        let (m, b) = linear_fit(&xs, &ys).unwrap();
        assert!((m - 2.0).abs() < 1e-12 && (b + 1.0).abs() < 1e-12);
        assert!(linear_fit(&[1.0], &[1.0]).is_none());
    }
}
