//! The leading eigenvalue of the twisted transfer operator.
//!
//! On constants the operator acts by the scalar
//! `λ(s, θ) = Σ prob(ε,n) e^{-s r(ε,n)} e^{iθ φ(ε,n)}`. With `D(n) = T(n) - T(n+1)`
//! and `L(z) = Σ T(n) z^n` one has `Σ D(n) z^n = 1 - L(z)(1 - z)/z`, so
//!
//! ```text
//! λ = ½ [e^{-sξ} G(e^{-s+iθ}) + e^{-s} G(e^{-iθ})],   G(z) = 1 - L(z)(1/z - 1).
//! ```
//!
//! For constant ℓ, `L = Li_p` and everything is evaluated through the
//! polylogarithm; `1 - λ` is assembled without cancellation. Other tails use
//! direct summation with a remainder bound.

use num_complex::Complex64;

use crate::model::{Model, SymbolLaw};
use crate::special::Polylog;
use crate::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
pub const DEFAULT_MAX_TERMS: u64 = 20_000_000;

/// `e^z - 1` without cancellation for small |z|.
pub fn cexpm1(z: Complex64) -> Complex64 {
    if z.norm() > 0.5 {
        return z.exp() - 1.0;
    }
    let em1 = z.re.exp_m1();
    let (s, c) = z.im.sin_cos();
    let half = (0.5 * z.im).sin();
    // e^a cos b - 1 = (e^a - 1) cos b - 2 sin^2(b/2)
    Complex64::new(em1 * c - 2.0 * half * half, (em1 + 1.0) * s)
}

/// `1 - λ`, `dλ/db`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenValue {
    pub one_minus: Complex64,
    pub db: Complex64,
}

impl EigenValue {
    pub fn lambda(&self) -> Complex64 {
        Complex64::new(1.0, 0.0) - self.one_minus
    }
}

#[derive(Debug, Clone)]
pub struct Eigen {
    law: SymbolLaw,
    p: f64,
    xi: f64,
    zeta_p: f64,
    closed: Option<(Polylog, Polylog)>,
}

impl Eigen {
    pub fn new(model: &Model) -> Self {
        let law = model.law.clone();
        let p = law.p();
        let closed = if law.kappa() == 0.0 {
            Some((Polylog::new(p), Polylog::new(p - 1.0)))
        } else {
            None
        };
        Eigen {
            xi: law.xi(),
            p,
            zeta_p: crate::special::zeta(p),
            law,
            closed,
        }
    }

    pub fn law(&self) -> &SymbolLaw {
        &self.law
    }

    pub fn has_closed_form(&self) -> bool {
        self.closed.is_some()
    }

    /// `1 - λ(s, θ)` and `dλ/db` at `s = u - ib`.
    pub fn eval(&self, s: Complex64, theta: f64) -> EigenValue {
        match &self.closed {
            Some((li_p, li_pm1)) => self.eval_closed(li_p, li_pm1, s, theta),
            None => self
                .eval_series(s, theta, 1e-9, DEFAULT_MAX_TERMS)
                .expect("series evaluation within the default budget"),
        }
    }

    pub fn lambda(&self, s: Complex64, theta: f64) -> Complex64 {
        self.eval(s, theta).lambda()
    }

    fn eval_closed(&self, li_p: &Polylog, li_pm1: &Polylog, s: Complex64, theta: f64) -> EigenValue {
        let one = Complex64::new(1.0, 0.0);
        let wp = -s + I * theta;
        let wm = Complex64::new(0.0, -theta);
        let lp = li_p.eval_exp(wp);
        let lm = li_p.eval_exp(wm);
        // 1 - G(e^w) = Li_p(e^w)(e^{-w} - 1)
        let xp = if wp == Complex64::new(0.0, 0.0) { Complex64::new(0.0, 0.0) } else { lp * cexpm1(-wp) };
        let xm = if theta == 0.0 { Complex64::new(0.0, 0.0) } else { lm * cexpm1(-wm) };
        let esx = (-s * self.xi).exp();
        let es = (-s).exp();
        let one_minus = 0.5 * (-cexpm1(-s * self.xi) + esx * xp - cexpm1(-s) + es * xm);
        // z G'(z) = -Li_{p-1}(z)(1/z - 1) + Li_p(z)/z, which is ζ(p) at z = 1
        let zgp = if wp.norm() == 0.0 {
            Complex64::new(self.zeta_p, 0.0)
        } else {
            -li_pm1.eval_exp(wp) * cexpm1(-wp) + lp * (-wp).exp()
        };
        let gp = one - xp;
        let gm = one - xm;
        let db = 0.5 * I * (esx * (self.xi * gp + zgp) + es * gm);
        EigenValue { one_minus, db }
    }

    /// Direct summation over n with absolute remainder at most `tol` in both
    /// outputs. The forward branch is damped by e^{-u n}, the backward one is not.
    pub fn eval_series(&self, s: Complex64, theta: f64, tol: f64, max_terms: u64) -> Result<EigenValue> {
        let n = self.series_terms(s.re, tol, max_terms, true)?;
        Ok(self.sum_terms(s, theta, n))
    }

    fn sum_terms(&self, s: Complex64, theta: f64, n: u64) -> EigenValue {
        let mut one_minus = Complex64::new(0.0, 0.0);
        let mut db = Complex64::new(0.0, 0.0);
        for k in (1..=n).rev() {
            let q = self.law.prob(k);
            let kf = k as f64;
            let rp = kf + self.xi;
            let ep = -s * rp + I * (theta * kf);
            let em = -s + I * (-theta * kf);
            one_minus -= q * (cexpm1(ep) + cexpm1(em));
            db += q * I * (rp * ep.exp() + em.exp());
        }
        EigenValue { one_minus, db }
    }

    /// Smallest power-of-two N whose remainder bound is below tol.
    fn series_terms(&self, u: f64, tol: f64, max_terms: u64, with_db: bool) -> Result<u64> {
        // 1-λ: each dropped term is at most 2 prob, so ≤ T(N+1) in total.
        // dλ/db: Σ_{n>N} prob (n+ξ) e^{-un} + ½T(N+1).
        let bound = |n: u64| {
            let nf = n as f64;
            let t = self.law.tail_fn(nf + 1.0);
            if !with_db {
                return t;
            }
            let moment = (nf + 2.0 + self.xi) * t + self.law.tail_integral(nf + 1.0);
            t.max(0.5 * (moment * (-u * nf).exp() + t))
        };
        let mut n = 256u64;
        while bound(n) > tol {
            if n >= max_terms {
                // remainders decay like N^{-p} for λ and N^{1-p} for its derivative
                let rate = if with_db && u == 0.0 { self.p - 1.0 } else { self.p };
                let need = (n as f64) * (bound(n) / tol).powf(1.0 / rate);
                return Err(Error::TruncationUnreachable {
                    tol,
                    required_terms: need.min(1e18) as u64,
                    limit: max_terms,
                });
            }
            n = (n * 2).min(max_terms);
        }
        Ok(n)
    }

    /// `λ(s, θ)` by direct summation, the reference route.
    pub fn lambda_series(&self, s: Complex64, theta: f64, tol: f64, max_terms: u64) -> Result<Complex64> {
        let n = self.series_terms(s.re, tol, max_terms, false)?;
        Ok(self.sum_terms(s, theta, n).lambda())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_model, EllKind, ModelParams};

    fn eigen(p: f64) -> Eigen {
        Eigen::new(&build_model(ModelParams::new(p)).unwrap())
    }

    #[test]
    fn expm1_small_and_large() {
        let z = Complex64::new(1e-9, -2e-9);
        let want = Complex64::new(1e-9 + 0.5 * (1e-18 - 4e-18), -2e-9 - 2e-18);
        assert!((cexpm1(z) - want).norm() < 1e-24);
        let z = Complex64::new(-0.7, 2.0);
        assert!((cexpm1(z) - (z.exp() - 1.0)).norm() < 1e-15);
    }

    #[test]
    fn fixed_point_and_real_damping() {
        let e = eigen(1.5);
        let v = e.eval(Complex64::new(0.0, 0.0), 0.0);
        assert_eq!(v.lambda(), Complex64::new(1.0, 0.0));
        for u in [0.01, 0.3, 2.0] {
            let l = e.lambda(Complex64::new(u, 0.0), 0.0);
            assert!(l.im.abs() < 1e-14);
            assert!(l.re > 0.0 && l.re < 1.0 && l.re <= (-u).exp() + 1e-15);
        }
    }

    #[test]
    fn closed_form_matches_series() {
        for p in [1.5, 1.3, 2.0] {
            let e = eigen(p);
            for &(u, b, th) in &[(0.3, 0.2, 0.5), (0.05, -1.0, -2.0), (1.0, 3.0, 0.1), (0.2, 0.0, 3.0)] {
                let s = Complex64::new(u, -b);
                let c = e.eval(s, th);
                let r = e.eval_series(s, th, 1e-9, 1 << 25).unwrap();
                assert!((c.one_minus - r.one_minus).norm() < 2e-9, "p={p} {s} {th}: {} vs {}", c.one_minus, r.one_minus);
                assert!((c.db - r.db).norm() < 2e-9, "p={p} {s} {th}: {} vs {}", c.db, r.db);
            }
        }
    }

    #[test]
    fn undamped_series_agrees_at_moderate_tolerance() {
        let e = eigen(1.5);
        let s = Complex64::new(0.0, -0.4);
        let c = e.eval(s, 0.7);
        let r = e.lambda_series(s, 0.7, 1e-7, 1 << 26).unwrap();
        assert!((c.lambda() - r).norm() < 2e-7);
        assert!(e.eval_series(s, 0.7, 1e-7, 1 << 26).is_err());
    }

    #[test]
    fn derivative_at_origin_is_plus_i_r_star() {
        let m = build_model(ModelParams::new(1.5)).unwrap();
        let e = Eigen::new(&m);
        let d = e.eval(Complex64::new(0.0, 0.0), 0.0).db;
        assert!(d.re.abs() < 1e-14);
        assert!((d.im - m.constants.r_star).abs() < 1e-10, "{} vs {}", d.im, m.constants.r_star);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let e = eigen(1.5);
        let (u, b, th) = (0.2, 0.3, 0.4);
        let h = 1e-5;
        let f = |b: f64| e.lambda(Complex64::new(u, -b), th);
        let fd = (f(b + h) - f(b - h)) / (2.0 * h);
        let d = e.eval(Complex64::new(u, -b), th).db;
        assert!((fd - d).norm() < 1e-6 * d.norm(), "{fd} vs {d}");
    }

    #[test]
    fn truncation_error_names_required_terms() {
        let e = eigen(1.5);
        match e.eval_series(Complex64::new(0.0, 0.0), 0.1, 1e-12, 1 << 12) {
            Err(Error::TruncationUnreachable { required_terms, .. }) => assert!(required_terms > 1 << 12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn log_power_uses_series() {
        let m = build_model(ModelParams::new(1.5).with_ell(EllKind::LogPower { kappa: 0.5 })).unwrap();
        let e = Eigen::new(&m);
        assert!(!e.has_closed_form());
        let l = e.lambda(Complex64::new(0.5, 0.0), 0.0);
        assert!(l.re > 0.0 && l.re < (-0.5f64).exp());
    }
}
