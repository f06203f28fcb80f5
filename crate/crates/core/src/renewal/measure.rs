use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::simulate::{sup_x_exp, ExcursionStore, McValue};

/// `dν_u = x e^{-ux} dμ∘τ`, represented by reweighting stored return times.
#[derive(Debug, Clone, Copy)]
pub struct WeightedTauMeasure<'a> {
    pub store: &'a ExcursionStore,
    pub u: f64,
}

/// One value of the truncated integral `∫_1^T x^{-2} dν̂_0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CauchyPoint {
    pub t: f64,
    pub value: f64,
    /// Change from the previous T.
    pub increment: f64,
}

impl<'a> WeightedTauMeasure<'a> {
    pub fn new(store: &'a ExcursionStore, u: f64) -> Self {
        assert!(u >= 0.0, "damping must be non-negative");
        WeightedTauMeasure { store, u }
    }

    fn weight(&self, x: f64) -> f64 {
        x * (-self.u * x).exp()
    }

    /// Largest weight a censored sample could carry.
    fn censored_weight(&self) -> f64 {
        if self.u > 0.0 {
            sup_x_exp(self.u, self.store.horizon)
        } else {
            f64::INFINITY
        }
    }

    /// `∫ h dν_u` as a mean over all trials.
    pub fn integrate<F: Fn(f64) -> Complex64>(&self, h: F, h_bound: f64) -> McValue {
        self.store.mean_of(|x| h(x) * self.weight(x), h_bound * self.censored_weight())
    }

    /// `∫ h dV_u`, V_u the even part `½(ν_u + ν_u∘(-1))`.
    pub fn integrate_symmetric<F: Fn(f64) -> Complex64>(&self, h: F, h_bound: f64) -> McValue {
        self.integrate(|x| 0.5 * (h(x) + h(-x)), h_bound)
    }

    pub fn total_mass(&self) -> McValue {
        self.integrate(|_| Complex64::new(1.0, 0.0), 1.0)
    }

    /// `ν_u([lo, hi])`; needs `hi` below the horizon.
    pub fn window(&self, lo: f64, hi: f64) -> f64 {
        assert!(hi <= self.store.horizon, "window beyond horizon");
        let t = &self.store.taus;
        let i = t.partition_point(|&x| x < lo);
        let j = t.partition_point(|&x| x <= hi);
        t[i..j].iter().map(|&x| self.weight(x)).sum::<f64>() / self.store.trials() as f64
    }

    /// `t μ̂(t<τ<t+1) ≤ ν̂_0([t,t+1]) ≤ (t+1) μ̂(t≤τ≤t+1)`, sample by sample.
    pub fn sandwich_holds(&self, t: f64) -> bool {
        let taus = &self.store.taus;
        let n = self.store.trials() as f64;
        let open = taus.iter().filter(|&&x| x > t && x < t + 1.0).count() as f64 / n;
        let closed = taus.iter().filter(|&&x| x >= t && x <= t + 1.0).count() as f64 / n;
        let nu = WeightedTauMeasure::new(self.store, 0.0).window(t, t + 1.0);
        t * open <= nu * (1.0 + 1e-12) && nu <= (t + 1.0) * closed * (1.0 + 1e-12)
    }

    /// `∫_1^T x^{-2} dν̂_0 = E[τ^{-1}; 1 ≤ τ ≤ T]` along a grid of T.
    pub fn cauchy_sequence(store: &ExcursionStore, ts: &[f64]) -> Vec<CauchyPoint> {
        let n = store.trials() as f64;
        let mut prev = 0.0;
        ts.iter()
            .map(|&t| {
                let v: f64 = store.taus.iter().filter(|&&x| (1.0..=t).contains(&x)).map(|x| 1.0 / x).sum::<f64>() / n;
                let p = CauchyPoint {
                    t,
                    value: v,
                    increment: v - prev,
                };
                prev = v;
                p
            })
            .collect()
    }
}
