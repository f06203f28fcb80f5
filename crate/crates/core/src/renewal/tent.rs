//! The tent-kernel form of the renewal Laplace identity, and the Lipschitz
//! bounds used when shifting the inversion contour.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::kernel::KernelPair;
use crate::quad::GaussLegendre;
use crate::simulate::ExcursionStore;
use crate::{Error, Result};

/// ω(x) = (1 - |x|)_+.
pub fn tent(x: f64) -> f64 {
    (1.0 - x.abs()).max(0.0)
}

/// `ω̂(s) = ∫_{-1}^{1} ω(x) e^{-sx} dx = (e^s + e^{-s} - 2)/s²`.
pub fn tent_laplace(s: Complex64) -> Complex64 {
    if s.norm() < 1e-2 {
        let s2 = s * s;
        // 2 Σ s^{2k}/(2k+2)!
        1.0 + s2 / 12.0 + s2 * s2 / 360.0 + s2 * s2 * s2 / 20160.0
    } else {
        (s.exp() + (-s).exp() - 2.0) / (s * s)
    }
}

pub fn tent_laplace_quadrature(s: Complex64) -> Complex64 {
    let gl = GaussLegendre::new(20);
    let f = |x: f64| (-s * x).exp() * tent(x);
    gl.integrate(-1.0, 0.0, f) + gl.integrate(0.0, 1.0, f)
}

/// `g_0 = 1/ω̂`.
pub fn g0(s: Complex64) -> Complex64 {
    1.0 / tent_laplace(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TentRow {
    pub s: Complex64,
    /// `Ê[e^{-sτ}]`.
    pub laplace: Complex64,
    /// `g_0(s) ∫_0^∞ Ê[ω(t-τ)] e^{-st} dt` by quadrature in t.
    pub smoothed: Complex64,
    pub residual: f64,
    pub omega_hat: Complex64,
    pub omega_hat_quadrature: Complex64,
}

/// `Ê[ω(t - τ)]` in O(log n) from prefix sums over the sorted return times.
struct TentSmoother<'a> {
    taus: &'a [f64],
    prefix: Vec<f64>,
    n: f64,
}

impl<'a> TentSmoother<'a> {
    fn new(store: &'a ExcursionStore) -> Self {
        let mut prefix = Vec::with_capacity(store.taus.len() + 1);
        let mut acc = 0.0;
        prefix.push(0.0);
        for &x in &store.taus {
            acc += x;
            prefix.push(acc);
        }
        TentSmoother {
            taus: &store.taus,
            prefix,
            n: store.trials() as f64,
        }
    }

    fn range(&self, lo: f64, hi: f64) -> (f64, f64) {
        let i = self.taus.partition_point(|&x| x < lo);
        let j = self.taus.partition_point(|&x| x < hi);
        ((j - i) as f64, self.prefix[j] - self.prefix[i])
    }

    fn at(&self, t: f64) -> f64 {
        // τ ∈ [t-1, t): 1 - t + τ;  τ ∈ [t, t+1): 1 + t - τ
        let (c1, s1) = self.range(t - 1.0, t);
        let (c2, s2) = self.range(t, t + 1.0);
        ((1.0 - t) * c1 + s1 + (1.0 + t) * c2 - s2) / self.n
    }
}

pub fn tent_laplace_check(store: &ExcursionStore, s_grid: &[Complex64]) -> Result<Vec<TentRow>> {
    let sm = TentSmoother::new(store);
    let gl = GaussLegendre::new(4);
    let mut out = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        if !(s.re > 0.0) {
            return Err(Error::InvalidArgument(format!("tent check needs Re s > 0, got {s}")));
        }
        let t_max = (40.0 / s.re).min(store.horizon + 1.0);
        // unit-spaced kinks at every sample: keep panels narrow so the
        // piecewise-linear integrand is resolved
        let width = 0.01;
        let panels = (t_max / width).ceil() as usize;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..panels {
            let a = k as f64 * width;
            acc += gl.integrate(a, a + width, |t: f64| (-s * t).exp() * sm.at(t));
        }
        let laplace = store.laplace(s).value;
        let smoothed = g0(s) * acc;
        out.push(TentRow {
            s,
            laplace,
            smoothed,
            residual: (laplace - smoothed).norm(),
            omega_hat: tent_laplace(s),
            omega_hat_quadrature: tent_laplace_quadrature(s),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzReport {
    pub gamma: f64,
    /// `sup |g^±(u+ib) - g^±(ib)| / u^γ` over the grid.
    pub max_ratio: f64,
    /// Bound implied by linearity: `(max u)^{1-γ} / a²`.
    pub bound: f64,
    /// Largest `|ω(x) - ω(y)| / |x - y|` on the grid; 1 for the tent.
    pub tent_lipschitz: f64,
}

impl LipschitzReport {
    pub fn passes(&self) -> bool {
        self.max_ratio <= self.bound * (1.0 + 1e-12) && self.tent_lipschitz <= 1.0 + 1e-12
    }
}

pub fn lipschitz_check(kernel: KernelPair, gamma: f64, us: &[f64], bs: &[f64]) -> LipschitzReport {
    let mut max_ratio: f64 = 0.0;
    for &u in us {
        for &b in bs {
            let ib = Complex64::new(0.0, b);
            let shifted = Complex64::new(u, b);
            let dp = (kernel.g_plus(shifted) - kernel.g_plus(ib)).norm();
            let dm = (kernel.g_minus(shifted) - kernel.g_minus(ib)).norm();
            max_ratio = max_ratio.max(dp.max(dm) / u.powf(gamma));
        }
    }
    let u_max = us.iter().copied().fold(0.0, f64::max);
    let xs: Vec<f64> = (0..=400).map(|k| -2.0 + 0.01 * k as f64).collect();
    let mut tl: f64 = 0.0;
    for w in xs.windows(2) {
        tl = tl.max((tent(w[1]) - tent(w[0])).abs() / (w[1] - w[0]));
    }
    LipschitzReport {
        gamma,
        max_ratio,
        bound: u_max.powf(1.0 - gamma) / (kernel.a * kernel.a),
        tent_lipschitz: tl,
    }
}
