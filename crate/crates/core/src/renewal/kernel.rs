//! The Fejér pair: the triangle `g_a` and its transform `ĝ_a`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::quad::GaussLegendre;
use crate::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelPair {
    pub a: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelWhich {
    G,
    GHat,
    GPlus,
    GMinus,
}

impl KernelPair {
    pub fn new(a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidArgument(format!("kernel bandwidth must be positive, got {a}")));
        }
        Ok(KernelPair { a })
    }

    /// Triangle `a^{-1}(1 - |b|/a)_+` of the real argument b (written g_a(ib)).
    pub fn g(&self, b: f64) -> f64 {
        let w = 1.0 - b.abs() / self.a;
        if w > 0.0 {
            w / self.a
        } else {
            0.0
        }
    }

    /// `2(1 - cos ax)/(a²x²)` written as a squared sinc so it is exact near 0.
    pub fn ghat(&self, x: f64) -> f64 {
        let h = 0.5 * self.a * x;
        if h.abs() < 1e-4 {
            let h2 = h * h;
            1.0 - h2 / 3.0 + 2.0 * h2 * h2 / 45.0
        } else {
            let s = h.sin() / h;
            s * s
        }
    }

    /// `a^{-1}(1 + is/a)`, equal to g on the segment `s = ib`, `0 < b < a`.
    pub fn g_plus(&self, s: Complex64) -> Complex64 {
        (1.0 + I * s / self.a) / self.a
    }

    /// `a^{-1}(1 - is/a)`, equal to g on `s = ib`, `-a < b < 0`.
    pub fn g_minus(&self, s: Complex64) -> Complex64 {
        (1.0 - I * s / self.a) / self.a
    }

    /// `∫ e^{-iλx} ĝ_a(x) dx` by quadrature on [-X, X] plus an asymptotic tail.
    pub fn fourier_of_ghat(&self, lambda: f64) -> f64 {
        // ĝ is even, so the transform is 2∫_0^∞ cos(λx) ĝ(x) dx.
        let kmax = lambda.abs() + self.a;
        let width = (PI / (4.0 * kmax)).min(0.5);
        let x_max = 2000.0 * PI / self.a.min(1.0);
        let panels = (x_max / width).ceil() as usize;
        let w = x_max / panels as f64;
        let gl = GaussLegendre::new(12);
        let mut acc = 0.0;
        for j in 0..panels {
            let lo = j as f64 * w;
            acc += gl.integrate(lo, lo + w, |x: f64| (lambda * x).cos() * self.ghat(x));
        }
        // on [X, ∞) write cos λx (1 - cos ax) = cos λx - ½cos(λ+a)x - ½cos(λ-a)x
        let tail = |k: f64| cos_over_x2_tail(k, x_max);
        let t = tail(lambda) - 0.5 * tail(lambda + self.a) - 0.5 * tail(lambda - self.a);
        2.0 * (acc + 2.0 / (self.a * self.a) * t)
    }
}

/// `∫_X^∞ cos(kx)/x² dx`, exact for k = 0, by integration by parts otherwise.
fn cos_over_x2_tail(k: f64, x: f64) -> f64 {
    if k == 0.0 {
        return 1.0 / x;
    }
    let (s, c) = (k * x).sin_cos();
    let kx = k * x;
    // -sin/(kx²) + 2cos/(k²x³) + 6 sin/(k³x⁴) - 24 cos/(k⁴x⁵)
    (-s / kx + 2.0 * c / (kx * kx) + 6.0 * s / (kx * kx * kx) - 24.0 * c / (kx * kx * kx * kx)) / x
}

pub fn kernel_eval(a: f64, which: KernelWhich, point: Complex64) -> Result<Complex64> {
    let k = KernelPair::new(a)?;
    Ok(match which {
        KernelWhich::G => Complex64::new(k.g(point.re), 0.0),
        KernelWhich::GHat => Complex64::new(k.ghat(point.re), 0.0),
        KernelWhich::GPlus => k.g_plus(point),
        KernelWhich::GMinus => k.g_minus(point),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ghat_values() {
        let k = KernelPair::new(2.0).unwrap();
        assert_eq!(k.ghat(0.0), 1.0);
        assert!(k.ghat(2.0 * PI / 2.0).abs() < 1e-30);
        // the direct form cancels badly below 1e-3
        assert!((k.ghat(1e-6) - (1.0 - 1e-12 / 3.0)).abs() < 1e-15);
        for x in [1e-3f64, 0.3, 5.0] {
            let direct = 2.0 * (1.0 - (2.0 * x).cos()) / (4.0 * x * x);
            assert!((k.ghat(x) - direct).abs() < 1e-9, "{x}");
        }
        assert!(KernelPair::new(0.0).is_err());
    }

    #[test]
    fn analytic_extensions_match_on_segments() {
        let k = KernelPair::new(1.5).unwrap();
        for b in [0.1, 0.7, 1.4] {
            let v = k.g_plus(Complex64::new(0.0, b));
            assert!((v.re - k.g(b)).abs() < 1e-15 && v.im.abs() < 1e-15);
            let v = k.g_minus(Complex64::new(0.0, -b));
            assert!((v.re - k.g(-b)).abs() < 1e-15 && v.im.abs() < 1e-15);
        }
        assert_eq!(k.g(1.5), 0.0);
    }

    #[test]
    fn fourier_pair() {
        for a in [0.5, 1.0, 4.0] {
            let k = KernelPair::new(a).unwrap();
            for lambda in [0.0, 0.2, 0.9 * a, a, 1.7 * a] {
                let got = k.fourier_of_ghat(lambda);
                let want = 2.0 * PI * k.g(lambda);
                assert!((got - want).abs() < 1e-8, "a={a} λ={lambda}: {got} vs {want}");
            }
        }
    }
}
