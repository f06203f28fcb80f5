//! The constant chain behind the A(s) asymptotics and the d_p candidates.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::model::Model;
use crate::quad::{wynn_epsilon, GaussLegendre};
use crate::simulate::d_beta;
use crate::special::gamma;
use crate::{Error, Result};

/// Coefficient of |θ|^p in `Re(1 - λ)`: `2Γ(1-p)cos(πp/2)`, and 1/2 at p = 2.
pub fn c_p(p: f64) -> f64 {
    if p >= 2.0 {
        0.5
    } else {
        2.0 * gamma(1.0 - p) * (PI * p / 2.0).cos()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tagged<T> {
    pub tag: String,
    pub value: T,
}

fn tagged<T>(tag: &str, value: T) -> Tagged<T> {
    Tagged { tag: tag.to_owned(), value }
}

/// Leading-order constants of the scalar model `1 - λ ≈ s r* + C|θ|^p`,
/// `C = c_p c_ell`, for constant ℓ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarLimits {
    pub c: f64,
    /// `1 - E e^{-sτ} ≈ K0 s^β`.
    pub k0: f64,
    /// `lim μ(τ > t) t^β`.
    pub tail: f64,
    /// `lim μ(t < τ < t+1) t^{1+β}`.
    pub smooth_tail: f64,
    pub ell_star: f64,
    pub tail_rescaled: f64,
    /// d_p as the smooth-tail statistic sees it: `smooth_tail · ℓ*`.
    pub d_p: f64,
    /// `lim |A(-ib)| b^{1/p}`.
    pub a_limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub p: f64,
    pub r_star: f64,
    pub c_ell: f64,
    pub c_p: f64,
    pub k_p: Complex64,
    pub k_p_closed: f64,
    pub k_p_prime: Complex64,
    pub k_p_prime_closed: f64,
    #[serde(rename = "C_0")]
    pub big_c0: f64,
    /// Two readings of C_1, both carried through.
    #[serde(rename = "C_1")]
    pub big_c1: Vec<Tagged<Complex64>>,
    #[serde(rename = "C_p")]
    pub big_cp: Vec<Tagged<Complex64>>,
    pub d_0: Vec<Tagged<f64>>,
    pub j_quadrature: f64,
    pub j_closed: f64,
    pub d_p_candidates: Vec<Tagged<f64>>,
    pub d_beta: f64,
    /// `p sin(π/p) r*^{1-1/p} / Γ(1/p)`.
    pub tail_target: f64,
    pub scalar_limits: Option<ScalarLimits>,
}

impl ConstantsReport {
    /// Candidate closest to `empirical` in relative terms.
    pub fn closest_candidate(&self, empirical: f64) -> &Tagged<f64> {
        self.d_p_candidates
            .iter()
            .min_by(|a, b| {
                let ea = (a.value / empirical - 1.0).abs();
                let eb = (b.value / empirical - 1.0).abs();
                ea.total_cmp(&eb)
            })
            .expect("candidate list is never empty")
    }
}

/// `∫_{-∞}^{∞} (1 + (i/r) sign(σ)|σ|^p)^{-k} dσ` by substituting σ = r^{1/p} e^x.
pub fn k_integral(p: f64, r: f64, k: i32) -> Complex64 {
    let gl = GaussLegendre::new(20);
    let lo = -40.0;
    let hi = 40.0 / (p * k as f64 - 1.0);
    let panels = ((hi - lo) / 0.5).ceil() as usize;
    let w = (hi - lo) / panels as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for sign in [1.0, -1.0] {
        for j in 0..panels {
            let a = lo + j as f64 * w;
            total += gl.integrate(a, a + w, |x: f64| {
                Complex64::new(1.0, sign * (p * x).exp()).powi(-k) * x.exp()
            });
        }
    }
    total * r.powf(1.0 / p)
}

/// `∫_0^∞ b^{-1/p} cos b db` over half-periods, accelerated with Wynn's epsilon.
pub fn j_integral(p: f64) -> f64 {
    let gl = GaussLegendre::new(24);
    let m = p / (p - 1.0);
    // on [0, π/2] put b = v^m, which removes the endpoint singularity
    let first = gl.integrate(0.0, (PI / 2.0).powf(1.0 / m), |v: f64| m * v.powf(m).cos());
    let mut partial = Vec::with_capacity(40);
    let mut acc = first;
    partial.push(acc);
    for k in 1..40 {
        let a = PI / 2.0 + (k - 1) as f64 * PI;
        acc += gl.integrate(a, a + PI, |b: f64| b.powf(-1.0 / p) * b.cos());
        partial.push(acc);
    }
    wynn_epsilon(&partial)
}

pub fn compute_constants(model: &Model) -> Result<ConstantsReport> {
    let p = model.p();
    let dc = &model.constants;
    let r = dc.r_star;
    let cp = c_p(p);
    let k_p = k_integral(p, r, 1);
    let k_p_closed = r.powf(1.0 / p) * PI / (p * (PI / (2.0 * p)).sin());
    let k_p_prime = k_integral(p, r, 2);
    let k_p_prime_closed = (1.0 - 1.0 / p) * k_p_closed;
    if (k_p.re / k_p_closed - 1.0).abs() > 1e-8 {
        return Err(Error::Quadrature(format!("K_p quadrature {} disagrees with closed form {k_p_closed}", k_p.re)));
    }
    let c0 = cp.powf(1.0 / p) * k_p.re / r;
    let c1 = vec![
        tagged("K'/r*^2", k_p_prime / (r * r)),
        tagged("c_p^(1/p) K'/r*^2", k_p_prime * cp.powf(1.0 / p) / (r * r)),
    ];
    let big_cp: Vec<_> = c1.iter().map(|c| tagged(&c.tag, c.value / (c0 * c0))).collect();
    let d0: Vec<_> = big_cp.iter().map(|c| tagged(&c.tag, 2.0 * c.value.re)).collect();
    let j_closed = gamma(1.0 - 1.0 / p) * (PI / (2.0 * p)).sin();
    let j_quad = j_integral(p);
    let mut cands = Vec::new();
    for d in &d0 {
        cands.push(tagged(&format!("(d0/pi) J [{}]", d.tag), d.value / PI * j_closed));
        cands.push(tagged(&format!("d0 J [{}]", d.tag), d.value * j_closed));
        cands.push(tagged(&format!("d0 J/pi^2 [{}]", d.tag), d.value * j_closed / (PI * PI)));
    }
    let beta = 1.0 - 1.0 / p;
    let scalar_limits = (model.law.kappa() == 0.0 && p < 2.0).then(|| {
        let c = cp * dc.c_ell;
        let k0 = p * (PI / p).sin() * c.powf(1.0 / p) * r.powf(beta);
        let tail = k0 / gamma(1.0 / p);
        let ell_star = dc.c_ell.powf(1.0 / p);
        ScalarLimits {
            c,
            k0,
            tail,
            smooth_tail: beta * tail,
            ell_star,
            tail_rescaled: tail * ell_star,
            d_p: beta * tail * ell_star,
            a_limit: beta * k0,
        }
    });
    Ok(ConstantsReport {
        p,
        r_star: r,
        c_ell: dc.c_ell,
        c_p: cp,
        k_p,
        k_p_closed,
        k_p_prime,
        k_p_prime_closed,
        big_c0: c0,
        big_c1: c1,
        big_cp,
        d_0: d0,
        j_quadrature: j_quad,
        j_closed,
        d_p_candidates: cands,
        d_beta: d_beta(beta),
        tail_target: p * (PI / p).sin() * r.powf(beta) / gamma(1.0 / p),
        scalar_limits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_model, ModelParams};

    #[test]
    fn c_p_values() {
        assert!((c_p(1.5) - 5.013_256_549).abs() < 1e-8);
        assert_eq!(c_p(2.0), 0.5);
        // approaches π as p -> 1
        assert!((c_p(1.0 + 1e-6) - PI).abs() < 1e-4);
    }

    #[test]
    fn k_integrals_against_beta_functions() {
        for p in [1.2, 1.5, 1.9] {
            let k1 = k_integral(p, 1.0, 1);
            let want = PI / (p * (PI / (2.0 * p)).sin());
            assert!((k1.re / want - 1.0).abs() < 1e-12, "p={p}");
            let k2 = k_integral(p, 1.0, 2);
            assert!((k2.re / ((1.0 - 1.0 / p) * want) - 1.0).abs() < 1e-12);
            assert!(k2.im.abs() < 1e-15);
        }
    }

    #[test]
    fn j_integral_closed_form() {
        for p in [1.3, 1.5, 2.0] {
            let want = gamma(1.0 - 1.0 / p) * (PI / (2.0 * p)).sin();
            assert!((j_integral(p) - want).abs() < 1e-9, "p={p}: {} vs {want}", j_integral(p));
        }
    }

    #[test]
    fn chain_at_three_halves() {
        let m = build_model(ModelParams::new(1.5)).unwrap();
        let c = compute_constants(&m).unwrap();
        assert!((c.k_p.re - 3.855_963).abs() < 1e-5, "{}", c.k_p);
        assert!((c.big_c0 - 5.6101).abs() < 1e-3, "{}", c.big_c0);
        assert!((c.big_cp[0].value.re - 0.010_07).abs() < 1e-4, "{:?}", c.big_cp);
        assert!((c.big_cp[1].value.re - 0.029_51).abs() < 1e-4, "{:?}", c.big_cp);
        assert_eq!(c.d_p_candidates.len(), 6);
        assert!((c.j_closed - 2.3199).abs() < 1e-3);
        let s = c.scalar_limits.unwrap();
        assert!((s.d_p - 0.4696).abs() < 2e-3, "{s:?}");
        assert!((s.a_limit - 1.0093).abs() < 2e-3, "{s:?}");
        assert!((c.tail_target - 1.2115).abs() < 1e-3);
    }
}
