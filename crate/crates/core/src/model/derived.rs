use serde::{Deserialize, Serialize};

use super::law::{SeriesValue, SymbolLaw};
use crate::{Error, Result};

const SERIES_TOL: f64 = 1e-10;
const SERIES_MAX_TERMS: u64 = 1 << 26;
const MAX_DOUBLINGS: u32 = 200;

/// Constants derived from a law: mean roof, ℓ, ℓ_p and the asymptotic
/// inverse factor ℓ*.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub p: f64,
    pub kappa: f64,
    pub xi: f64,
    pub r_star: f64,
    pub r_star_error: f64,
    /// Prefactor of ℓ: `ℓ(t) = c_ell (1 + ln t)^κ`.
    pub c_ell: f64,
    pub beta: f64,
    pub gamma: f64,
    pub series_terms: u64,
}

impl DerivedConstants {
    pub fn from_law(law: &SymbolLaw) -> Result<Self> {
        let sum: SeriesValue = law.tail_sum(SERIES_TOL, SERIES_MAX_TERMS)?;
        let xi = law.xi();
        Ok(DerivedConstants {
            p: law.p(),
            kappa: law.kappa(),
            xi,
            // E r = Σ_n prob(+,n)(n + ξ) + 1/2 = (Σ_n T(n) + ξ + 1)/2
            r_star: 0.5 * (sum.value + xi + 1.0),
            r_star_error: 0.5 * sum.error_bound,
            c_ell: 0.5,
            beta: 1.0 - 1.0 / law.p(),
            gamma: law.p() + 1.0,
            series_terms: sum.terms,
        })
    }

    pub fn is_boundary(&self) -> bool {
        self.p == 2.0
    }

    /// ℓ(x); for x < 1 it is held at ℓ(1).
    pub fn ell(&self, x: f64) -> f64 {
        if self.kappa == 0.0 {
            return self.c_ell;
        }
        self.c_ell * (1.0 + x.max(1.0).ln()).powf(self.kappa)
    }

    /// ℓ_p: ℓ itself for p < 2, and `2∫_1^y ℓ(v)/v dv` at p = 2.
    pub fn ell_p(&self, y: f64) -> f64 {
        if !self.is_boundary() {
            return self.ell(y);
        }
        if y <= 1.0 {
            return 0.0;
        }
        let l = y.ln();
        let k1 = self.kappa + 1.0;
        if k1.abs() < 1e-12 {
            2.0 * self.c_ell * l.ln_1p()
        } else {
            2.0 * self.c_ell * (k1 * l.ln_1p()).exp_m1() / k1
        }
    }

    /// ℓ*(t): with x solving `x^p / ℓ_p(x) = t`, returns `x t^{-1/p}`.
    pub fn ell_star(&self, t: f64) -> Result<f64> {
        let lo = if self.is_boundary() { self.boundary_minimiser() } else { 1e-100 };
        let x = invert_increasing(t, lo, |x| x.powf(self.p) / self.ell_p(x))?;
        Ok(x * t.powf(-1.0 / self.p))
    }

    /// Minimiser of `x^2/ℓ_2(x)` on (1, ∞); `x^2/ℓ_2` is increasing beyond it.
    fn boundary_minimiser(&self) -> f64 {
        let f = |x: f64| 2.0 * x.ln() - self.ell_p(x).ln();
        let golden = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (1e-9f64, 30.0f64);
        // search in y = ln x
        for _ in 0..200 {
            let c = b - golden * (b - a);
            let d = a + golden * (b - a);
            if f(c.exp()) < f(d.exp()) {
                b = d;
            } else {
                a = c;
            }
            if b - a < 1e-13 {
                break;
            }
        }
        (0.5 * (a + b)).exp()
    }

    /// Relative error of the defining composition at each x:
    /// `s = ℓ_p(x) x^-p`, then `ℓ*(1/s) (1/s)^{1/p} / x - 1`.
    pub fn composition_errors(&self, xs: &[f64]) -> Result<Vec<(f64, f64)>> {
        xs.iter()
            .map(|&x| {
                let t = x.powf(self.p) / self.ell_p(x);
                let back = self.ell_star(t)? * t.powf(1.0 / self.p);
                Ok((x, back / x - 1.0))
            })
            .collect()
    }
}

/// Solve `f(x) = target` for increasing f on `[lo, ∞)`, doubling the upper end
/// until it brackets, then bisecting in log space to relative width 1e-12.
pub fn invert_increasing<F: Fn(f64) -> f64>(target: f64, lo: f64, f: F) -> Result<f64> {
    if !(target.is_finite() && target > 0.0) {
        return Err(Error::InvalidArgument(format!("cannot invert at {target}")));
    }
    let mut a = lo;
    if f(a) > target {
        return Err(Error::NoBracket { target, doublings: 0 });
    }
    let mut b = a.max(1.0) * 2.0;
    let mut doublings = 0;
    while f(b) < target {
        a = b;
        b *= 2.0;
        doublings += 1;
        if doublings >= MAX_DOUBLINGS {
            return Err(Error::NoBracket { target, doublings });
        }
    }
    let (mut la, mut lb) = (a.ln(), b.ln());
    while lb - la > 1e-12 {
        let mid = 0.5 * (la + lb);
        if f(mid.exp()) < target {
            la = mid;
        } else {
            lb = mid;
        }
    }
    Ok((0.5 * (la + lb)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::params::{EllKind, ModelParams};
    use approx::assert_relative_eq;

    fn consts(params: ModelParams) -> DerivedConstants {
        DerivedConstants::from_law(&SymbolLaw::new(params).unwrap()).unwrap()
    }

    #[test]
    fn r_star_matches_zeta_oracle() {
        let c = consts(ModelParams::new(1.5));
        let oracle = 0.5 * (crate::special::zeta(1.5) + std::f64::consts::SQRT_2);
        assert!((c.r_star - oracle).abs() < 1e-10);
        assert_relative_eq!(c.r_star, 2.013_294_455_5, epsilon = 1e-9);
        assert_eq!(c.c_ell, 0.5);
        assert_relative_eq!(c.beta, 1.0 / 3.0);
        assert_eq!(c.gamma, 2.5);
    }

    #[test]
    fn ell_star_constant_limit() {
        let c = consts(ModelParams::new(1.5));
        let want = 0.5f64.powf(2.0 / 3.0);
        for t in [10.0, 1e3, 1e8] {
            assert_relative_eq!(c.ell_star(t).unwrap(), want, max_relative = 1e-9);
        }
        assert_relative_eq!(want, 0.63, epsilon = 0.001);
    }

    #[test]
    fn unit_ell_gives_unit_inverse() {
        for t in [1.0, 3.0, 1e6] {
            let x = invert_increasing(t, 1e-12, |x: f64| x.powf(1.7)).unwrap();
            assert_relative_eq!(x * t.powf(-1.0 / 1.7), 1.0, max_relative = 1e-10);
        }
    }

    #[test]
    fn boundary_case_is_logarithmic() {
        let c = consts(ModelParams::new(2.0));
        for y in [3.0, 100.0, 1e5] {
            assert_relative_eq!(c.ell_p(y), 2.0 * c.c_ell * f64::ln(y), max_relative = 1e-12);
        }
        // x^2/ln x = t gives ℓ*(t)^2 = ln x ~ (1/2) ln t
        let t: f64 = 1e12;
        let ls = c.ell_star(t).unwrap();
        let x = ls * t.sqrt();
        assert_relative_eq!(ls * ls, x.ln(), max_relative = 1e-9);
        let ratio = ls / (0.5 * t.ln()).sqrt();
        assert!((ratio - 1.0).abs() < 0.05, "ratio {ratio}");
        assert!(c.ell_star(3.0).is_err());
    }

    #[test]
    fn composition_is_tight() {
        for params in [
            ModelParams::new(1.5),
            ModelParams::new(1.5).with_ell(EllKind::LogPower { kappa: 0.5 }),
            ModelParams::new(2.0),
        ] {
            let c = consts(params);
            let xs: Vec<f64> = (2..=6).map(|k| 10f64.powi(k)).collect();
            for (x, err) in c.composition_errors(&xs).unwrap() {
                assert!(err.abs() < 1e-9, "x={x} err={err}");
            }
        }
    }
}
