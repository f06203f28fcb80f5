//! Fixed-rule quadrature: Gauss–Legendre panels on caller-controlled meshes.
//!
//! Nothing here is adaptive in the usual sense. Meshes are built from known
//! feature locations (near-singular points, oscillation period) so that the
//! same nodes can be reused across nearby parameter values, which keeps
//! finite differences of quadrature results smooth.

use std::f64::consts::PI;
use std::ops::{Add, Mul};

#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes and weights on [-1, 1] by Newton iteration on P_n.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn degree(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate<T, F>(&self, a: f64, b: f64, mut f: F) -> T
    where
        T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
        F: FnMut(f64) -> T,
    {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = T::default();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(mid + half * x) * (w * half);
        }
        acc
    }

    /// Sum of panel integrals over consecutive breakpoints.
    pub fn integrate_mesh<T, F>(&self, breaks: &[f64], mut f: F) -> T
    where
        T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
        F: FnMut(f64) -> T,
    {
        let mut acc = T::default();
        for pair in breaks.windows(2) {
            acc = acc + self.integrate(pair[0], pair[1], &mut f);
        }
        acc
    }

    /// Mapped nodes and weights for a whole mesh.
    pub fn mesh_nodes(&self, breaks: &[f64]) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(breaks.len().saturating_sub(1) * self.degree());
        for pair in breaks.windows(2) {
            let half = 0.5 * (pair[1] - pair[0]);
            let mid = 0.5 * (pair[0] + pair[1]);
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                out.push((mid + half * x, w * half));
            }
        }
        out
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Breakpoints on `[lo, hi]` refined geometrically toward each feature point.
///
/// Around every feature `f` the mesh contains `f ± min_scale·ratio^k` for
/// all k until the offset leaves the interval; afterwards any panel wider
/// than `max_width` is split evenly.
pub fn graded_mesh(lo: f64, hi: f64, features: &[f64], min_scale: f64, ratio: f64, max_width: f64) -> Vec<f64> {
    assert!(hi > lo && min_scale > 0.0 && ratio > 1.0 && max_width > 0.0);
    let mut pts = vec![lo, hi];
    for &f in features {
        if f < lo || f > hi {
            continue;
        }
        pts.push(f);
        let mut off = min_scale;
        while off < hi - lo {
            for cand in [f - off, f + off] {
                if cand > lo && cand < hi {
                    pts.push(cand);
                }
            }
            off *= ratio;
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * (1.0 + b.abs()));
    let mut out = Vec::with_capacity(pts.len() * 2);
    for pair in pts.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let pieces = ((b - a) / max_width).ceil().max(1.0) as usize;
        for j in 0..pieces {
            out.push(a + (b - a) * j as f64 / pieces as f64);
        }
    }
    out.push(hi);
    out
}

/// Wynn's epsilon algorithm applied to a sequence of partial sums; returns
/// the last diagonal estimate.
pub fn wynn_epsilon(partial_sums: &[f64]) -> f64 {
    let n = partial_sums.len();
    if n < 3 {
        return partial_sums.last().copied().unwrap_or(0.0);
    }
    let mut prev = vec![0.0; n + 1];
    let mut cur: Vec<f64> = partial_sums.to_vec();
    let mut best = *partial_sums.last().unwrap();
    let mut col = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let diff = cur[i + 1] - cur[i];
            let v = if diff == 0.0 { f64::INFINITY } else { prev[i + 1] + 1.0 / diff };
            next.push(v);
        }
        prev = cur;
        cur = next;
        col += 1;
        if col % 2 == 0 {
            if let Some(&v) = cur.last() {
                if v.is_finite() {
                    best = v;
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let rule = GaussLegendre::new(8);
        let v: f64 = rule.integrate(0.0, 2.0, |x| x.powi(15));
        assert_relative_eq!(v, 2f64.powi(16) / 16.0, epsilon = 1e-10);
        let w_sum: f64 = rule.integrate(-1.0, 1.0, |_| 1.0);
        assert_relative_eq!(w_sum, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn graded_mesh_refines_toward_feature() {
        let m = graded_mesh(-1.0, 1.0, &[0.0], 1e-6, 2.0, 0.25);
        assert_eq!(m[0], -1.0);
        assert_eq!(*m.last().unwrap(), 1.0);
        assert!(m.windows(2).all(|w| w[1] > w[0]));
        assert!(m.iter().any(|&x| x > 0.0 && x <= 1e-6 * 1.0001));
        assert!(m.windows(2).all(|w| w[1] - w[0] <= 0.25 + 1e-12));
    }

    #[test]
    fn singular_integrand_on_graded_mesh() {
        // ∫_0^1 x^{-1/2} dx = 2
        let rule = GaussLegendre::new(20);
        let mesh = graded_mesh(0.0, 1.0, &[0.0], 1e-12, 2.0, 1.0);
        let v: f64 = rule.integrate_mesh(&mesh, |x| x.powf(-0.5));
        assert_relative_eq!(v, 2.0, epsilon = 1e-5);
    }

    #[test]
    fn wynn_accelerates_alternating_series() {
        // log 2 = 1 - 1/2 + 1/3 - ...
        let mut s = 0.0;
        let partial: Vec<f64> = (1..=15)
            .map(|k| {
                s += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
                s
            })
            .collect();
        assert_relative_eq!(wynn_epsilon(&partial), 2f64.ln(), epsilon = 1e-9);
    }
}
