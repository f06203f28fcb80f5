use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::excursion::{run_excursion_until, Outcome};
use super::rng::{Domain, Schedule};
use crate::model::Model;
use crate::{Error, Result};

/// Completed return times from independent excursions, sorted ascending.
/// Excursions that ran past the horizon are only counted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcursionStore {
    pub taus: Vec<f64>,
    pub censored: u64,
    pub capped: u64,
    pub horizon: f64,
}

/// Monte-Carlo mean with standard error and a bound on what the censored
/// samples could have contributed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McValue {
    pub value: Complex64,
    pub std_error: f64,
    pub truncation: f64,
}

impl McValue {
    pub fn tolerance(&self, sigmas: f64) -> f64 {
        sigmas * self.std_error + self.truncation
    }
}

impl ExcursionStore {
    pub fn collect(model: &Model, trials: u64, horizon: f64, cap: u64, sched: &Schedule) -> Result<Self> {
        if trials == 0 {
            return Err(Error::InvalidArgument("empty excursion store".into()));
        }
        let law = &model.law;
        let parts = sched.run(Domain::Store, trials, |rng, n| {
            let mut taus = Vec::with_capacity(n as usize);
            let (mut cens, mut capped) = (0u64, 0u64);
            for _ in 0..n {
                match run_excursion_until(law, rng, cap, horizon) {
                    Outcome::Complete(e) => taus.push(e.tau),
                    Outcome::Censored { .. } => cens += 1,
                    Outcome::Capped { .. } => capped += 1,
                }
            }
            (taus, cens, capped)
        });
        let mut store = ExcursionStore {
            taus: Vec::with_capacity(trials as usize),
            censored: 0,
            capped: 0,
            horizon,
        };
        for (t, c, k) in parts {
            store.taus.extend(t);
            store.censored += c;
            store.capped += k;
        }
        store.taus.sort_by(f64::total_cmp);
        Ok(store)
    }

    pub fn from_taus(mut taus: Vec<f64>, censored: u64, horizon: f64) -> Self {
        taus.sort_by(f64::total_cmp);
        ExcursionStore {
            taus,
            censored,
            capped: 0,
            horizon,
        }
    }

    pub fn trials(&self) -> u64 {
        self.taus.len() as u64 + self.censored + self.capped
    }

    fn lost_fraction(&self) -> f64 {
        (self.censored + self.capped) as f64 / self.trials() as f64
    }

    /// MC mean of `f(τ)` over all trials; censored samples count as zero and
    /// `bound` caps |f| beyond the horizon.
    pub fn mean_of<F: Fn(f64) -> Complex64>(&self, f: F, bound: f64) -> McValue {
        let n = self.trials() as f64;
        let mut sum = Complex64::new(0.0, 0.0);
        let mut sq = 0.0;
        for &x in &self.taus {
            let v = f(x);
            sum += v;
            sq += v.norm_sqr();
        }
        let mean = sum / n;
        let var = (sq / n - mean.norm_sqr()).max(0.0) * n / (n - 1.0).max(1.0);
        McValue {
            value: mean,
            std_error: (var / n).sqrt(),
            truncation: self.lost_fraction() * bound,
        }
    }

    /// `E[e^{-sτ}]`, `Re s > 0` or horizon-free stores.
    pub fn laplace(&self, s: Complex64) -> McValue {
        let bound = (-s.re * self.horizon).exp();
        self.mean_of(|x| (-s * x).exp(), bound)
    }

    /// `A(s) = E[τ e^{-sτ}]`.
    pub fn tau_laplace(&self, s: Complex64) -> Result<McValue> {
        if s.re <= 0.0 {
            return Err(Error::InvalidArgument("E[τ e^{-sτ}] by Monte Carlo needs u > 0".into()));
        }
        Ok(self.mean_of(|x| x * (-s * x).exp(), sup_x_exp(s.re, self.horizon)))
    }

    /// Empirical survival `μ̂(τ > x)`.
    pub fn survival(&self, x: f64) -> f64 {
        let below = self.taus.partition_point(|&t| t <= x) as u64;
        (self.trials() - below) as f64 / self.trials() as f64
    }

    /// `m̂(t) = ∫_0^t μ̂(τ>x) dx = E[min(τ, t)]`, for t below the horizon.
    pub fn m_hat(&self, t: f64) -> f64 {
        assert!(t <= self.horizon, "m_hat beyond horizon");
        let k = self.taus.partition_point(|&x| x <= t);
        let below: f64 = self.taus[..k].iter().sum();
        (below + t * (self.trials() - k as u64) as f64) / self.trials() as f64
    }
}

/// sup of x e^{-ux} over x > h.
pub fn sup_x_exp(u: f64, h: f64) -> f64 {
    if h * u >= 1.0 {
        h * (-u * h).exp()
    } else {
        1.0 / (u * std::f64::consts::E)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn store_means() {
        let st = ExcursionStore::from_taus(vec![3.0, 2.0, 5.0], 1, 10.0);
        assert_eq!(st.trials(), 4);
        assert_eq!(st.taus, vec![2.0, 3.0, 5.0]);
        let v = st.laplace(Complex64::new(0.0, 0.0));
        assert!((v.value.re - 0.75).abs() < 1e-15);
        assert!((st.survival(2.5) - 0.75).abs() < 1e-15);
        // E min(τ, 4) with the censored sample counted at 4
        assert!((st.m_hat(4.0) - (2.0 + 3.0 + 4.0 + 4.0) / 4.0).abs() < 1e-15);
        assert!(st.tau_laplace(Complex64::new(0.0, 1.0)).is_err());
    }

    #[test]
    fn sup_bound() {
        assert!((sup_x_exp(1.0, 0.5) - 1.0 / std::f64::consts::E).abs() < 1e-15);
        assert!((sup_x_exp(1.0, 3.0) - 3.0 * (-3f64).exp()).abs() < 1e-15);
    }
}
