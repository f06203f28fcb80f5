//! Scan of |λ(-ib, θ)| away from the origin, and the (u, b, θ) sweep grid.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::aggregate::{Aggregator, DEFAULT_S_TOL};
use super::eigen::Eigen;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AperiodicityConfig {
    pub b_max: f64,
    pub b_points: usize,
    pub theta_points: usize,
    /// Radius of the excluded ball around (0, 0).
    pub radius: f64,
    pub threshold: f64,
}

impl Default for AperiodicityConfig {
    fn default() -> Self {
        AperiodicityConfig {
            b_max: 20.0,
            b_points: 1601,
            theta_points: 256,
            radius: 0.01,
            threshold: 0.999,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AperiodicityReport {
    pub max_abs: f64,
    pub b: f64,
    pub theta: f64,
    pub threshold: f64,
    /// Max over the rim of the excluded ball alone.
    pub rim_max: f64,
    /// Smallest excluded radius whose rim max is below the threshold, when
    /// the one requested is too small.
    pub radius_for_threshold: Option<f64>,
    pub evaluations: usize,
}

impl AperiodicityReport {
    pub fn passes(&self) -> bool {
        self.max_abs < self.threshold
    }
}

/// Push (b, θ) out of the excluded ball if a search step fell inside it.
fn project(b: f64, th: f64, radius: f64) -> (f64, f64) {
    let r = b.hypot(th);
    if r >= radius {
        (b, th)
    } else if r == 0.0 {
        (radius, 0.0)
    } else {
        (b * radius / r, th * radius / r)
    }
}

fn compass<F: Fn(f64, f64) -> f64>(abs: &F, start: (f64, f64, f64), step: f64, radius: f64, b_max: f64) -> (f64, f64, f64, usize) {
    let (mut v, mut b, mut th) = start;
    let mut step = step;
    let mut n = 0;
    while step > 1e-10 {
        let mut moved = false;
        for (eb, et) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)] {
            let (nb, nt) = project(b + eb * step, th + et * step, radius);
            if nb.abs() > b_max {
                continue;
            }
            let nv = abs(nb, nt);
            n += 1;
            if nv > v {
                (v, b, th) = (nv, nb, nt);
                moved = true;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    (v, b, th, n)
}

/// Max of |λ| on the circle of the given radius, refined in angle.
fn rim_max<F: Fn(f64, f64) -> f64>(abs: &F, radius: f64, b_max: f64) -> (f64, f64, f64) {
    let n = 720;
    let at = |a: f64| {
        let (b, th) = (radius * a.cos(), radius * a.sin());
        if b.abs() > b_max {
            (0.0, b, th)
        } else {
            (abs(b, th), b, th)
        }
    };
    let (mut best, mut ba) = ((0.0, 0.0, 0.0), 0.0);
    for k in 0..n {
        let a = 2.0 * PI * k as f64 / n as f64;
        let v = at(a);
        if v.0 > best.0 {
            (best, ba) = (v, a);
        }
    }
    let mut step = PI / n as f64;
    while step > 1e-12 {
        let mut moved = false;
        for a in [ba - step, ba + step] {
            let v = at(a);
            if v.0 > best.0 {
                (best, ba) = (v, a);
                moved = true;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    best
}

pub fn aperiodicity_scan(eig: &Eigen, cfg: &AperiodicityConfig) -> Result<AperiodicityReport> {
    if cfg.b_points < 2 || cfg.theta_points < 2 || !(cfg.radius > 0.0) {
        return Err(Error::InvalidArgument("aperiodicity grid needs at least 2x2 points and a positive radius".into()));
    }
    let abs = |b: f64, th: f64| eig.lambda(Complex64::new(0.0, -b), th).norm();
    let db = 2.0 * cfg.b_max / (cfg.b_points - 1) as f64;
    let dth = 2.0 * PI / cfg.theta_points as f64;
    let mut pts: Vec<(f64, f64, f64)> = (0..cfg.b_points)
        .into_par_iter()
        .flat_map_iter(|i| {
            let b = -cfg.b_max + i as f64 * db;
            (0..cfg.theta_points).filter_map(move |j| {
                let th = -PI + j as f64 * dth;
                (b.hypot(th) >= cfg.radius).then_some((b, th))
            })
        })
        .map(|(b, th)| (abs(b, th), b, th))
        .collect();
    // the supremum usually sits on the rim of the excluded ball
    let rim = rim_max(&abs, cfg.radius, cfg.b_max);
    pts.push(rim);
    let mut evaluations = pts.len();
    pts.sort_by(|x, y| y.0.total_cmp(&x.0));
    // seeds: the best grid points that are pairwise apart
    let mut seeds: Vec<(f64, f64, f64)> = Vec::new();
    for &p in &pts {
        if seeds.len() == 16 {
            break;
        }
        if seeds.iter().all(|q| (p.1 - q.1).hypot(p.2 - q.2) > 0.25) {
            seeds.push(p);
        }
    }
    let mut best = pts[0];
    for &seed in &seeds {
        let (v, b, th, n) = compass(&abs, seed, db.max(dth), cfg.radius, cfg.b_max);
        evaluations += n;
        if v > best.0 {
            best = (v, b, th);
        }
    }
    let radius_for_threshold = (rim.0 >= cfg.threshold).then(|| {
        let (mut lo, mut hi) = (cfg.radius, cfg.radius);
        while rim_max(&abs, hi, cfg.b_max).0 >= cfg.threshold && hi < 1.0 {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..30 {
            let mid = 0.5 * (lo + hi);
            if rim_max(&abs, mid, cfg.b_max).0 >= cfg.threshold {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    });
    Ok(AperiodicityReport {
        max_abs: best.0,
        b: best.1,
        theta: super::aggregate::wrap(best.2),
        threshold: cfg.threshold,
        rim_max: rim.0,
        radius_for_threshold,
        evaluations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub u: f64,
    pub b: f64,
    pub theta: f64,
    pub lambda: Complex64,
    /// `S(u - ib)`; absent at s = 0 or when the quadrature failed.
    pub s_value: Option<Complex64>,
}

/// λ on the full product grid, with S once per (u, b).
pub fn spectral_sweep(agg: &Aggregator, us: &[f64], bs: &[f64], thetas: &[f64]) -> Vec<SweepRow> {
    let pairs: Vec<(f64, f64)> = us.iter().flat_map(|&u| bs.iter().map(move |&b| (u, b))).collect();
    pairs
        .par_iter()
        .flat_map_iter(|&(u, b)| {
            let s = Complex64::new(u, -b);
            let sv = if s.norm() > 0.0 {
                agg.s_scalar(s, DEFAULT_S_TOL).ok().map(|v| v.value)
            } else {
                None
            };
            thetas.iter().map(move |&theta| SweepRow {
                u,
                b,
                theta,
                lambda: agg.eigen().lambda(s, theta),
                s_value: sv,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_model, ModelParams, XiTag};

    fn small() -> AperiodicityConfig {
        AperiodicityConfig {
            b_max: 8.0,
            b_points: 321,
            theta_points: 64,
            ..AperiodicityConfig::default()
        }
    }

    #[test]
    fn default_model_is_aperiodic() {
        let e = Eigen::new(&build_model(ModelParams::new(1.5)).unwrap());
        let r = aperiodicity_scan(&e, &small()).unwrap();
        // |λ| stays below 1 off the origin, but the rim of a radius 0.01 ball
        // comes within 1e-3 of it along θ = -b
        assert!(r.max_abs < 1.0 - 5e-4, "{r:?}");
        assert!(r.b.hypot(r.theta) >= 0.01 - 1e-12);
        assert_eq!(r.max_abs, r.rim_max);
        let rho = r.radius_for_threshold.unwrap();
        assert!(rho > 0.01 && rho < 0.05, "{rho}");
        let wide = AperiodicityConfig { radius: 2.0 * rho, ..small() };
        assert!(aperiodicity_scan(&e, &wide).unwrap().passes());
    }

    #[test]
    fn integer_roof_is_periodic() {
        let e = Eigen::new(&build_model(ModelParams::new(1.5).with_xi(XiTag::IntegerRoof)).unwrap());
        let r = aperiodicity_scan(&e, &small()).unwrap();
        assert!(r.max_abs > 1.0 - 1e-6, "{r:?}");
        assert!(((r.b.abs() - 2.0 * PI).abs()) < 1e-3 && r.theta.abs() < 1e-3, "{r:?}");
    }

    #[test]
    fn sweep_shapes() {
        let a = Aggregator::new(&build_model(ModelParams::new(1.5)).unwrap());
        let rows = spectral_sweep(&a, &[0.0, 0.1], &[0.0, 0.5], &[0.0, 1.0, 2.0]);
        assert_eq!(rows.len(), 12);
        assert!(rows[0].s_value.is_none());
        assert!(rows.iter().filter(|r| r.u > 0.0).all(|r| r.s_value.is_some()));
        assert!(rows.iter().all(|r| r.lambda.norm() <= 1.0 + 1e-12));
    }
}
