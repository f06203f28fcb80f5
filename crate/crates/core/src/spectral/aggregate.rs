//! `S(s) = ∫_{-π}^{π} dθ / (1 - λ(s, θ))` and what follows from it.
//!
//! Summing the renewal series over visits to 0 gives
//! `E[e^{-sτ}] = 1 - 2π / S(s)` and `A(s) = E[τ e^{-sτ}] = -i·2π·S_b / S²`,
//! where `S_b = ∂S/∂b = ∫ (∂λ/∂b) / (1 - λ)² dθ` at `s = u - ib`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::eigen::Eigen;
use crate::model::Model;
use crate::quad::{graded_mesh, GaussLegendre};
use crate::simulate::ExcursionStore;
use crate::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
pub const DEFAULT_S_TOL: f64 = 1e-9;
const MIN_SCALE: f64 = 1e-11;
const MAX_REFINEMENTS: usize = 4;
/// Below this |1 - λ| at a node the integrand is treated as singular.
const DENOM_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SValue {
    pub s: Complex64,
    pub value: Complex64,
    /// `∂S/∂b`, when requested.
    pub db: Option<Complex64>,
    pub error_estimate: f64,
    pub nodes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AMethod {
    /// Sample mean over an excursion store; needs u > 0.
    MonteCarlo,
    /// Central difference of `1 - 2π/S` in b, step `|s|·1e-4`, on a shared mesh.
    Spectral,
    /// `-i·2π·S_b/S²` with `S_b` integrated directly.
    SpectralExact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AValue {
    pub s: Complex64,
    pub value: Complex64,
    /// Quadrature estimate for the spectral routes, 4σ + truncation for Monte Carlo.
    pub error: f64,
    pub method: AMethod,
}

#[derive(Debug, Clone)]
pub struct Aggregator {
    eigen: Eigen,
    hi: GaussLegendre,
    lo: GaussLegendre,
}

impl Aggregator {
    pub fn new(model: &Model) -> Self {
        Aggregator {
            eigen: Eigen::new(model),
            hi: GaussLegendre::new(24),
            lo: GaussLegendre::new(12),
        }
    }

    pub fn eigen(&self) -> &Eigen {
        &self.eigen
    }

    /// Breakpoints for `s`: graded toward θ = 0, where the backward branch is
    /// singular, and toward θ = -b, where the forward branch is.
    pub fn mesh(&self, s: Complex64, refinement: usize) -> Vec<f64> {
        let b = -s.im;
        let theta_b = wrap(-b);
        // level 0 grades by 4 with panels up to 0.5; each level takes a square root
        let ratio = 4f64.powf(1.0 / (1 << refinement) as f64);
        let width = 0.5 / (1 << refinement) as f64;
        graded_mesh(
            -PI,
            PI,
            &[0.0, theta_b, theta_b - 2.0 * PI, theta_b + 2.0 * PI],
            MIN_SCALE,
            ratio,
            width,
        )
    }

    fn integrate(&self, s: Complex64, breaks: &[f64], with_db: bool) -> Result<(Complex64, Complex64, Complex64, Complex64)> {
        let mut acc = [Complex64::new(0.0, 0.0); 4];
        for (k, rule) in [&self.hi, &self.lo].into_iter().enumerate() {
            for (theta, w) in rule.mesh_nodes(breaks) {
                let v = self.eigen.eval(s, theta);
                let d = v.one_minus;
                if !(d.norm() > DENOM_FLOOR) {
                    return Err(Error::NearZeroDenominator { u: s.re, b: -s.im, theta });
                }
                let inv = 1.0 / d;
                acc[2 * k] += inv * w;
                if with_db {
                    acc[2 * k + 1] += v.db * inv * inv * w;
                }
            }
        }
        Ok((acc[0], acc[1], acc[2], acc[3]))
    }

    fn s_on_mesh(&self, s: Complex64, breaks: &[f64], with_db: bool) -> Result<SValue> {
        let (v, db, v_lo, db_lo) = self.integrate(s, breaks, with_db)?;
        let mut err = (v - v_lo).norm() / v.norm();
        if with_db {
            err = err.max((db - db_lo).norm() / db.norm().max(1e-300));
        }
        Ok(SValue {
            s,
            value: v,
            db: with_db.then_some(db),
            error_estimate: err,
            nodes: (breaks.len() - 1) * self.hi.degree(),
        })
    }

    fn s_refined(&self, s: Complex64, tol: f64, with_db: bool) -> Result<SValue> {
        if s.re < 0.0 {
            return Err(Error::InvalidArgument(format!("S(s) needs Re s >= 0, got {s}")));
        }
        if s.norm() == 0.0 {
            return Err(Error::InvalidArgument("S diverges at s = 0".into()));
        }
        let mut last = None;
        for r in 0..=MAX_REFINEMENTS {
            let v = self.s_on_mesh(s, &self.mesh(s, r), with_db)?;
            if v.error_estimate <= tol {
                return Ok(v);
            }
            last = Some(v);
        }
        let v = last.unwrap();
        Err(Error::Quadrature(format!(
            "S({s}) relative error {:.2e} above {tol:.1e} after {MAX_REFINEMENTS} refinements ({} nodes)",
            v.error_estimate, v.nodes
        )))
    }

    pub fn s_scalar(&self, s: Complex64, tol: f64) -> Result<SValue> {
        self.s_refined(s, tol, false)
    }

    pub fn s_with_db(&self, s: Complex64, tol: f64) -> Result<SValue> {
        self.s_refined(s, tol, true)
    }

    /// `E[e^{-sτ}] = 1 - 2π/S(s)`.
    pub fn laplace(&self, s: Complex64, tol: f64) -> Result<Complex64> {
        let v = self.s_scalar(s, tol)?;
        Ok(1.0 - 2.0 * PI / v.value)
    }

    pub fn a_spectral(&self, s: Complex64, method: AMethod, tol: f64) -> Result<AValue> {
        match method {
            AMethod::SpectralExact => {
                let v = self.s_with_db(s, tol)?;
                let db = v.db.unwrap();
                Ok(AValue {
                    s,
                    value: -I * 2.0 * PI * db / (v.value * v.value),
                    error: 3.0 * v.error_estimate,
                    method,
                })
            }
            AMethod::Spectral => {
                let base = self.s_scalar(s, tol)?;
                let breaks = self.mesh(s, 0);
                let h = s.norm() * 1e-4;
                // s = u - ib, so b ± h is s ∓ ih
                let plus = self.s_on_mesh(s - I * h, &breaks, false)?;
                let minus = self.s_on_mesh(s + I * h, &breaks, false)?;
                let phi = |v: &SValue| 1.0 - 2.0 * PI / v.value;
                let dphi = (phi(&plus) - phi(&minus)) / (2.0 * h);
                let err = base.error_estimate.max(plus.error_estimate) * 2.0 * PI / (base.value.norm() * h) + 1e-8;
                Ok(AValue {
                    s,
                    value: -I * dphi,
                    error: err,
                    method,
                })
            }
            AMethod::MonteCarlo => Err(Error::InvalidArgument("Monte Carlo A(s) needs an excursion store".into())),
        }
    }
}

/// Monte-Carlo route for `A(s)`.
pub fn a_monte_carlo(store: &ExcursionStore, s: Complex64) -> Result<AValue> {
    let v = store.tau_laplace(s)?;
    Ok(AValue {
        s,
        value: v.value,
        error: v.tolerance(4.0),
        method: AMethod::MonteCarlo,
    })
}

/// `A(s)` by the chosen route; the store is only used for Monte Carlo.
pub fn a_of_s(agg: &Aggregator, s: Complex64, method: AMethod, store: Option<&ExcursionStore>) -> Result<AValue> {
    match (method, store) {
        (AMethod::MonteCarlo, Some(st)) => a_monte_carlo(st, s),
        _ => agg.a_spectral(s, method, DEFAULT_S_TOL),
    }
}

/// Representative of x in [-π, π).
pub fn wrap(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y >= PI {
        y - 2.0 * PI
    } else {
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_model, ModelParams};

    fn agg() -> Aggregator {
        Aggregator::new(&build_model(ModelParams::new(1.5)).unwrap())
    }

    #[test]
    fn wrap_range() {
        assert!((wrap(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert_eq!(wrap(0.0), 0.0);
        assert!((wrap(-PI) + PI).abs() < 1e-15);
    }

    #[test]
    fn laplace_is_a_probability_generating_value() {
        let a = agg();
        for u in [2.0, 0.5, 0.05] {
            let f = a.laplace(Complex64::new(u, 0.0), 1e-9).unwrap();
            assert!(f.im.abs() < 1e-10);
            assert!(f.re > 0.0 && f.re < (-u * 2.0f64).exp().max(f.re), "{f}");
            assert!(f.re < 1.0);
        }
    }

    /// `E[e^{-uτ}]` by propagating the sub-probability of the walk over
    /// positions, jumps up to `nmax`, for `steps` steps.
    fn path_sum(m: &Model, u: f64, nmax: i64, steps: usize) -> f64 {
        let xi = m.law.xi();
        let off = 4 * nmax;
        let w = (2 * off + 1) as usize;
        let mut f = vec![0.0f64; w];
        f[off as usize] = 1.0;
        let mut phi = 0.0;
        for step in 0..steps {
            let mut g = vec![0.0f64; w];
            for (i, &v) in f.iter().enumerate() {
                let q = i as i64 - off;
                if v == 0.0 || (step > 0 && q == 0) {
                    continue;
                }
                for n in 1..=nmax {
                    let pr = m.law.prob(n as u64);
                    for (sg, r) in [(1i64, n as f64 + xi), (-1, 1.0)] {
                        let nq = q + sg * n;
                        if nq.abs() > off {
                            continue;
                        }
                        let add = v * pr * (-u * r).exp();
                        if nq == 0 {
                            phi += add;
                        } else {
                            g[(nq + off) as usize] += add;
                        }
                    }
                }
            }
            f = g;
        }
        phi
    }

    #[test]
    fn laplace_matches_path_enumeration() {
        let m = build_model(ModelParams::new(1.5)).unwrap();
        let a = Aggregator::new(&m);
        for (u, want) in [(3.0, path_sum(&m, 3.0, 200, 30)), (1.5, path_sum(&m, 1.5, 300, 60))] {
            let f = a.laplace(Complex64::new(u, 0.0), 1e-11).unwrap().re;
            assert!((f - want).abs() < 1e-9 * want, "u={u}: {f} vs {want}");
        }
        // frozen from the enumeration
        let f = a.laplace(Complex64::new(3.0, 0.0), 1e-11).unwrap().re;
        assert!((f - 1.502_706_629e-4).abs() < 1e-13);
    }

    #[test]
    fn derivative_routes_agree() {
        let a = agg();
        for s in [Complex64::new(0.1, -0.3), Complex64::new(0.01, 0.05), Complex64::new(1e-3, -1e-3)] {
            let ex = a.a_spectral(s, AMethod::SpectralExact, 1e-9).unwrap();
            let fd = a.a_spectral(s, AMethod::Spectral, 1e-9).unwrap();
            assert!((ex.value - fd.value).norm() < 1e-5 * ex.value.norm(), "{s}: {} vs {}", ex.value, fd.value);
        }
    }

    #[test]
    fn conjugate_symmetry() {
        let a = agg();
        let s = Complex64::new(0.02, 0.4);
        let x = a.s_scalar(s, 1e-9).unwrap().value;
        let y = a.s_scalar(s.conj(), 1e-9).unwrap().value;
        assert!((x - y.conj()).norm() < 1e-8 * x.norm());
    }

    #[test]
    fn boundary_of_half_plane() {
        let a = agg();
        let v = a.a_spectral(Complex64::new(0.0, -0.01), AMethod::SpectralExact, 1e-8).unwrap();
        assert!(v.value.norm().is_finite() && v.value.norm() > 1.0);
        assert!(a.s_scalar(Complex64::new(0.0, 0.0), 1e-8).is_err());
        assert!(a.s_scalar(Complex64::new(-0.1, 0.0), 1e-8).is_err());
    }

    #[test]
    fn integer_roof_hits_zero_denominator() {
        let m = build_model(ModelParams::new(1.5).with_xi(crate::model::XiTag::IntegerRoof)).unwrap();
        let a = Aggregator::new(&m);
        match a.s_scalar(Complex64::new(0.0, -2.0 * PI), 1e-8) {
            Err(Error::NearZeroDenominator { theta, .. }) => assert!(theta.abs() < 1e-6, "{theta}"),
            other => panic!("{other:?}"),
        }
    }
}
