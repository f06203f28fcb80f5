//! Small statistics toolkit: least squares, binomial intervals, moments.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: f64,
    pub slope_se: f64,
    pub points: usize,
}

/// Weighted least squares `y ≈ a + b x`. Weights must be non-negative.
pub fn weighted_linear_fit(x: &[f64], y: &[f64], w: &[f64]) -> Option<LinearFit> {
    assert_eq!(x.len(), y.len());
    assert_eq!(x.len(), w.len());
    let sw: f64 = w.iter().sum();
    if x.len() < 2 || sw <= 0.0 {
        return None;
    }
    let mx = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..x.len() {
        let dx = x[i] - mx;
        sxx += w[i] * dx * dx;
        sxy += w[i] * dx * (y[i] - my);
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    // with 1/variance weights the slope variance is 1/sxx; otherwise scale
    // by the residual mean square
    let dof = (x.len() as f64 - 2.0).max(1.0);
    let rss: f64 = (0..x.len())
        .map(|i| w[i] * (y[i] - intercept - slope * x[i]).powi(2))
        .sum();
    let slope_se = (rss / dof / sxx).sqrt();
    Some(LinearFit {
        intercept,
        slope,
        slope_se,
        points: x.len(),
    })
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let w = vec![1.0; x.len()];
    weighted_linear_fit(x, y, &w)
}

/// Fit `ln y = a + b ln x` over positive pairs.
pub fn log_log_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .unzip();
    linear_fit(&lx, &ly)
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (phat + z2 / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Plain sums; merging is exact for the counts and order-dependent only in
/// the last bits of the float sums, which callers fix by merging in batch order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub n: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(&mut self, other: &Moments) {
        self.n += other.n;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            f64::NAN
        } else {
            self.sum / self.n as f64
        }
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return f64::NAN;
        }
        let n = self.n as f64;
        ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        (self.variance() / self.n as f64).sqrt()
    }
}

/// Log-spaced grid from `lo` to `hi` inclusive with `per_decade` points per decade.
pub fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo && per_decade > 0);
    let decades = (hi / lo).log10();
    let steps = (decades * per_decade as f64).round().max(1.0) as usize;
    (0..=steps)
        .map(|k| lo * 10f64.powf(decades * k as f64 / steps as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_line_is_recovered() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 0.5 * v).collect();
        let f = linear_fit(&x, &y).unwrap();
        assert_relative_eq!(f.slope, -0.5, epsilon = 1e-12);
        assert_relative_eq!(f.intercept, 3.0, epsilon = 1e-12);
        assert!(f.slope_se < 1e-10);
    }

    #[test]
    fn power_law_slope() {
        let x = log_grid(1.0, 1e4, 5);
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v.powf(-1.0 / 3.0)).collect();
        let f = log_log_fit(&x, &y).unwrap();
        assert_relative_eq!(f.slope, -1.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(f.intercept.exp(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn wilson_contains_estimate() {
        let (lo, hi) = wilson_interval(30, 1000, 1.96);
        assert!(lo < 0.03 && 0.03 < hi);
        assert_eq!(wilson_interval(0, 100, 1.96).0, 0.0);
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(100.0, 1e4, 4);
        assert_eq!(g.len(), 9);
        assert_relative_eq!(g[0], 100.0);
        assert_relative_eq!(*g.last().unwrap(), 1e4, epsilon = 1e-9);
    }
}
