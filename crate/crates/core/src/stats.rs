//! Small statistical helpers shared by the estimators and the verification
//! suites. Summation is pairwise so that Monte Carlo aggregates stay
//! deterministic and well conditioned at large sample counts.

use statrs::function::erf::erfc;

/// Pairwise (cascade) sum; error grows like log(n) rather than n.
pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 128 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Sample mean and standard error of the mean.
pub(crate) fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    if xs.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub(crate) fn median_of(mut xs: Vec<f64>) -> f64 {
    assert!(!xs.is_empty());
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Least-squares slope of ys against xs.
pub(crate) fn linreg_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    sxy / sxx
}

pub(crate) fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Kolmogorov-Smirnov statistic of a sample against a continuous cdf.
pub(crate) fn ks_statistic(sample: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    sample.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sample.len() as f64;
    let mut d = 0.0f64;
    for (i, x) in sample.iter().enumerate() {
        let f = cdf(*x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

/// Asymptotic KS p-value with Stephens' small-sample correction.
pub(crate) fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.06 {
        // The series oscillates as lambda -> 0; the survival probability
        // is 1 to double precision below this point.
        return 1.0;
    }
    let mut q = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64) * (k as f64) * lambda * lambda).exp();
        q += if k % 2 == 1 { 2.0 * term } else { -2.0 * term };
    }
    q.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-9);
    }

    #[test]
    fn mean_stderr_on_known_sample() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let (m, se) = mean_stderr(&xs);
        assert!((m - 2.5).abs() < 1e-15);
        // var = 5/3, se = sqrt(5/12)
        assert!((se - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn median_handles_both_parities() {
        assert_eq!(median_of(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median_of(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn slope_recovers_line() {
        let xs: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 2.0 * x).collect();
        assert!((linreg_slope(&xs, &ys) + 2.0).abs() < 1e-12);
    }

    #[test]
    fn normal_cdf_reference_points() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.959963984540054) - 0.975).abs() < 1e-10);
    }

    #[test]
    fn ks_accepts_exact_uniform_quantiles() {
        // Sample at the (i + 1/2)/n quantiles: D = 1/(2n), p close to 1.
        let n = 200;
        let mut xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic(&mut xs, |x| x);
        assert!((d - 0.5 / n as f64).abs() < 1e-12);
        assert!(ks_pvalue(d, n) > 0.999);
    }

    #[test]
    fn ks_rejects_shifted_sample() {
        let n = 400;
        let mut xs: Vec<f64> = (0..n)
            .map(|i| ((i as f64 + 0.5) / n as f64).powi(3))
            .collect();
        let d = ks_statistic(&mut xs, |x| x);
        assert!(ks_pvalue(d, n) < 1e-6);
    }
}
