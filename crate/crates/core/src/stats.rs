//! Small numerical helpers shared by the estimators.

/// Fixed-shape pairwise summation. The tree depends only on the length, so
/// the result is bit-identical regardless of how the inputs were produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n if n <= 8 => xs.iter().fold(0.0, |acc, x| acc + x),
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        pairwise_sum(xs) / xs.len() as f64
    }
}

/// Mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    let m = mean(xs);
    if n < 2 {
        return (m, 0.0);
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
    let var = pairwise_sum(&dev) / (n - 1) as f64;
    (m, (var / n as f64).sqrt())
}

/// Ordinary least squares fit y = a + b x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    /// Standard error of the slope from the residuals (0 for exact fits or
    /// two-point fits).
    pub slope_stderr: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> LineFit {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n == 0 {
        return LineFit { intercept: 0.0, slope: 0.0, slope_stderr: 0.0 };
    }
    let mx = mean(xs);
    let my = mean(ys);
    if n == 1 {
        return LineFit { intercept: my, slope: 0.0, slope_stderr: 0.0 };
    }
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let slope_stderr = if n > 2 && sxx > 0.0 {
        let rss: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| {
                let r = y - intercept - slope * x;
                r * r
            })
            .sum();
        (rss / (n - 2) as f64 / sxx).sqrt()
    } else {
        0.0
    };
    LineFit { intercept, slope, slope_stderr }
}

/// Weights w_k such that the OLS slope of (x_k, y_k) equals Σ w_k y_k.
pub fn slope_weights(xs: &[f64]) -> Vec<f64> {
    let mx = mean(xs);
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return vec![0.0; xs.len()];
    }
    xs.iter().map(|x| (x - mx) / sxx).collect()
}

/// Fit over the last half of a series (at least two points when available).
pub fn fit_last_half(xs: &[f64], ys: &[f64]) -> LineFit {
    let n = xs.len();
    let start = if n >= 4 { n / 2 } else { 0 };
    fit_line(&xs[start..], &ys[start..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [3.0, 5.0, 7.0, 9.0];
        let f = fit_line(&xs, &ys);
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!((f.intercept - 1.0).abs() < 1e-12);
        let w = slope_weights(&xs);
        let s: f64 = w.iter().zip(ys).map(|(a, b)| a * b).sum();
        assert!((s - 2.0).abs() < 1e-12);
    }

    #[test]
    fn pairwise_matches_naive() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64 * 0.5).collect();
        assert_eq!(pairwise_sum(&xs), 249750.0);
        let (m, se) = mean_stderr(&[1.0, 1.0, 1.0]);
        assert_eq!((m, se), (1.0, 0.0));
    }
}
