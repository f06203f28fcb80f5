//! Special functions needed by the spectral side: real-argument Riemann zeta
//! and the polylogarithm `Li_q(e^w)` on the closed unit disc.
//!
//! The polylogarithm is evaluated either by its defining power series (when
//! `|e^w|` is small) or by the expansion about `w = 0`,
//!
//! ```text
//! Li_q(e^w) = Γ(1-q) (-w)^(q-1) + Σ_k ζ(q-k) w^k / k!      (q not an integer)
//! ```
//!
//! which converges for `|w| < 2π`. Integer orders use the logarithmic variant.

use num_complex::Complex64;
use std::f64::consts::{LN_2, PI};
use std::sync::OnceLock;

pub use statrs::function::gamma::{gamma, ln_gamma};

const BORWEIN_N: usize = 50;

fn borwein_d() -> &'static [f64; BORWEIN_N + 1] {
    static D: OnceLock<[f64; BORWEIN_N + 1]> = OnceLock::new();
    D.get_or_init(|| {
        let n = BORWEIN_N as f64;
        let mut d = [0.0; BORWEIN_N + 1];
        let mut term = 1.0 / n;
        let mut acc = 0.0;
        for (i, slot) in d.iter_mut().enumerate() {
            acc += term;
            *slot = n * acc;
            let fi = i as f64;
            term *= 4.0 * (n + fi) * (n - fi) / ((2.0 * fi + 1.0) * (2.0 * fi + 2.0));
        }
        d
    })
}

/// Riemann zeta for real `s`. Returns `+inf` at the pole `s = 1`.
pub fn zeta(s: f64) -> f64 {
    if s == 1.0 {
        return f64::INFINITY;
    }
    if s == 0.0 {
        return -0.5;
    }
    if s >= 0.5 {
        zeta_borwein(s)
    } else {
        // ζ(s) = 2^s π^(s-1) sin(πs/2) Γ(1-s) ζ(1-s)
        let half = (0.5 * PI * s).sin();
        if half == 0.0 {
            return 0.0;
        }
        let one_minus = 1.0 - s;
        let log_mag = s * LN_2 + (s - 1.0) * PI.ln() + ln_gamma(one_minus);
        half * log_mag.exp() * zeta_borwein(one_minus)
    }
}

fn zeta_borwein(s: f64) -> f64 {
    let d = borwein_d();
    let dn = d[BORWEIN_N];
    let mut sum = 0.0;
    for k in 0..BORWEIN_N {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * (d[k] - dn) / ((k + 1) as f64).powf(s);
    }
    // 1 - 2^(1-s), computed without cancellation near s = 1
    let denom = -((1.0 - s) * LN_2).exp_m1();
    -sum / (dn * denom)
}

/// Precomputed expansion of `Li_q(e^w)` about `w = 0`.
///
/// Construction costs a few hundred zeta evaluations; evaluation is a short
/// Horner loop, so build one per order and reuse it.
#[derive(Debug, Clone)]
pub struct Polylog {
    order: f64,
    integer_order: Option<u32>,
    /// ζ(q-k)/k!, with the k = q-1 slot zeroed for integer orders.
    coeffs: Vec<f64>,
    gamma_one_minus: f64,
    zeta_at_one: f64,
}

const SERIES_TERMS: usize = 110;
const DIRECT_RADIUS: f64 = 0.5;

impl Polylog {
    pub fn new(order: f64) -> Self {
        assert!(order > 0.0, "polylog order must be positive");
        let rounded = order.round();
        let integer_order = if (order - rounded).abs() < 1e-13 {
            Some(rounded as u32)
        } else {
            None
        };
        let mut coeffs = Vec::with_capacity(SERIES_TERMS);
        for k in 0..SERIES_TERMS {
            let s = order - k as f64;
            let c = match integer_order {
                Some(n) if k as u32 + 1 == n => 0.0,
                _ => zeta_over_factorial(s, k),
            };
            coeffs.push(c);
        }
        let gamma_one_minus = match integer_order {
            Some(_) => f64::NAN,
            None => gamma(1.0 - order),
        };
        Polylog {
            order,
            integer_order,
            coeffs,
            gamma_one_minus,
            zeta_at_one: if order > 1.0 { zeta(order) } else { f64::INFINITY },
        }
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    /// `Li_q(e^w)` for `Re w <= 0`.
    pub fn eval_exp(&self, w: Complex64) -> Complex64 {
        debug_assert!(w.re <= 1e-12, "polylog evaluated outside the unit disc");
        let w = reduce_imag(w);
        if w.re == 0.0 && w.im == 0.0 {
            return Complex64::new(self.zeta_at_one, 0.0);
        }
        let z = w.exp();
        if z.norm() <= DIRECT_RADIUS {
            return self.direct(z);
        }
        // coefficients decay like (2π)^-k, and vanish at the trivial zeros,
        // so the cut-off is set from |w| rather than from term size
        let ratio = w.norm() / (2.0 * PI);
        let terms = ((-42.0 / ratio.ln()).ceil() as usize + 4).min(self.coeffs.len());
        let mut acc = Complex64::new(0.0, 0.0);
        let mut pow = Complex64::new(1.0, 0.0);
        for &c in &self.coeffs[..terms] {
            acc += pow * c;
            pow *= w;
        }
        let singular = match self.integer_order {
            None => self.gamma_one_minus * (-w).powf(self.order - 1.0),
            Some(n) => {
                let nm1 = n - 1;
                let harmonic: f64 = (1..=nm1).map(|j| 1.0 / j as f64).sum();
                let fact: f64 = (1..=nm1).map(|j| j as f64).product();
                w.powu(nm1) / fact * (Complex64::new(harmonic, 0.0) - (-w).ln())
            }
        };
        acc + singular
    }

    fn direct(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut pow = z;
        for k in 1..200 {
            let term = pow / (k as f64).powf(self.order);
            acc += term;
            if term.norm() < 1e-18 {
                break;
            }
            pow *= z;
        }
        acc
    }
}

fn zeta_over_factorial(s: f64, k: usize) -> f64 {
    let lnfact = ln_gamma(k as f64 + 1.0);
    if s >= 0.5 || s == 0.0 {
        return zeta(s) / lnfact.exp();
    }
    let half = (0.5 * PI * s).sin();
    if half.abs() < 1e-300 {
        return 0.0;
    }
    let log_mag = s * LN_2 + (s - 1.0) * PI.ln() + ln_gamma(1.0 - s) - lnfact;
    half * log_mag.exp() * zeta_borwein(1.0 - s)
}

/// Shift `Im w` into `(-π, π]`; `e^w` is unchanged.
fn reduce_imag(w: Complex64) -> Complex64 {
    let two_pi = 2.0 * PI;
    let mut im = w.im;
    if im > PI || im <= -PI {
        im -= two_pi * ((im + PI) / two_pi).floor();
        if im <= -PI {
            im += two_pi;
        }
    }
    Complex64::new(w.re, im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zeta_known_values() {
        assert_relative_eq!(zeta(2.0), PI * PI / 6.0, epsilon = 1e-14);
        assert_relative_eq!(zeta(1.5), 2.612_375_348_685_488, epsilon = 1e-13);
        assert_relative_eq!(zeta(0.5), -1.460_354_508_809_586_8, epsilon = 1e-13);
        assert_relative_eq!(zeta(0.0), -0.5, epsilon = 1e-14);
        assert_relative_eq!(zeta(-1.0), -1.0 / 12.0, epsilon = 1e-14);
        assert_relative_eq!(zeta(-0.5), -0.207_886_224_977_354_57, epsilon = 1e-13);
        assert_relative_eq!(zeta(3.0), 1.202_056_903_159_594_3, epsilon = 1e-14);
        assert!(zeta(-2.0).abs() < 1e-15);
        assert!(zeta(1.0).is_infinite());
    }

    #[test]
    fn zeta_near_pole() {
        // ζ(1+ε) ≈ 1/ε + γ
        let eps = 1e-6;
        assert_relative_eq!(zeta(1.0 + eps), 1.0 / eps + 0.577_215_664_9, epsilon = 1e-4);
    }

    #[test]
    fn gamma_negative_argument() {
        assert_relative_eq!(gamma(-0.5), -2.0 * PI.sqrt(), epsilon = 1e-12);
    }

    fn brute_polylog(q: f64, z: Complex64, terms: usize) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut pow = z;
        for k in 1..=terms {
            acc += pow / (k as f64).powf(q);
            pow *= z;
        }
        acc
    }

    #[test]
    fn expansion_matches_power_series_inside_disc() {
        for &q in &[0.5, 1.0, 1.5, 1.7, 2.0] {
            let li = Polylog::new(q);
            for &(re, im) in &[(-0.1, 0.3), (-0.5, -2.0), (-0.05, 3.0), (-0.2, 0.0), (-0.69, 1.0)] {
                let w = Complex64::new(re, im);
                let z = w.exp();
                let want = brute_polylog(q, z, 20_000);
                let got = li.eval_exp(w);
                assert!(
                    (got - want).norm() < 1e-10 * (1.0 + want.norm()),
                    "q={q} w={w}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn integer_orders_match_closed_forms() {
        let li1 = Polylog::new(1.0);
        let w = Complex64::new(-0.3, 0.7);
        let want = -(Complex64::new(1.0, 0.0) - w.exp()).ln();
        assert!((li1.eval_exp(w) - want).norm() < 1e-13);
        let li2 = Polylog::new(2.0);
        assert_relative_eq!(li2.eval_exp(Complex64::new(0.0, 0.0)).re, PI * PI / 6.0, epsilon = 1e-14);
        // Li_2(-1) = -π²/12
        let at_minus_one = li2.eval_exp(Complex64::new(0.0, PI));
        assert_relative_eq!(at_minus_one.re, -PI * PI / 12.0, epsilon = 1e-12);
    }

    #[test]
    fn on_unit_circle_matches_slow_series() {
        // Σ cos(kθ)/k^2 = π²/6 - πθ/2 + θ²/4 on [0, 2π]
        let li2 = Polylog::new(2.0);
        let theta: f64 = 0.4;
        let want = PI * PI / 6.0 - PI * theta / 2.0 + theta * theta / 4.0;
        assert_relative_eq!(li2.eval_exp(Complex64::new(0.0, theta)).re, want, epsilon = 1e-13);
    }

    #[test]
    fn imaginary_reduction_is_periodic() {
        let li = Polylog::new(1.5);
        let a = li.eval_exp(Complex64::new(-0.01, 0.3));
        let b = li.eval_exp(Complex64::new(-0.01, 0.3 + 4.0 * PI));
        assert!((a - b).norm() < 1e-12);
    }
}
