//! Everything the spectral side knows about one point (u, b, θ).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::aggregate::{AMethod, Aggregator, DEFAULT_S_TOL};
use crate::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralSample {
    pub u: f64,
    pub b: f64,
    pub theta: f64,
    pub lambda: Complex64,
    /// Central difference with step `h = |s|·1e-4`.
    pub dlambda_db: Complex64,
    /// The same derivative from the differentiated series.
    pub dlambda_db_exact: Complex64,
    /// Five-point stencil with step `10h`.
    pub d2lambda_db2: Complex64,
    pub s_value: Option<Complex64>,
    pub a_value: Option<Complex64>,
}

pub fn spectral_sample(agg: &Aggregator, u: f64, b: f64, theta: f64) -> Result<SpectralSample> {
    if !(u >= 0.0) {
        return Err(Error::InvalidArgument(format!("damping must be non-negative, got {u}")));
    }
    let s = Complex64::new(u, -b);
    let eig = agg.eigen();
    let ev = eig.eval(s, theta);
    // b ↦ λ(u - ib, θ); moving b by x moves s by -ix
    let at = |x: f64| eig.lambda(s - I * x, theta);
    let scale = s.norm().max(1e-3);
    let h = scale * 1e-4;
    let d1 = (at(h) - at(-h)) / (2.0 * h);
    let k = 10.0 * h;
    let d2 = (-at(2.0 * k) + 16.0 * at(k) - 30.0 * ev.lambda() + 16.0 * at(-k) - at(-2.0 * k)) / (12.0 * k * k);
    let (s_value, a_value) = if s.norm() > 0.0 {
        let sv = agg.s_scalar(s, DEFAULT_S_TOL).ok().map(|v| v.value);
        let av = agg.a_spectral(s, AMethod::SpectralExact, DEFAULT_S_TOL).ok().map(|v| v.value);
        (sv, av)
    } else {
        (None, None)
    };
    Ok(SpectralSample {
        u,
        b,
        theta,
        lambda: ev.lambda(),
        dlambda_db: d1,
        dlambda_db_exact: ev.db,
        d2lambda_db2: d2,
        s_value,
        a_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_model, ModelParams};

    #[test]
    fn stencils_track_the_series() {
        let m = build_model(ModelParams::new(1.5)).unwrap();
        let agg = Aggregator::new(&m);
        let x = spectral_sample(&agg, 0.3, 0.7, 0.4).unwrap();
        assert!((x.dlambda_db - x.dlambda_db_exact).norm() < 1e-6 * x.dlambda_db_exact.norm());
        // second derivative against a difference of the exact first derivative
        let h = 1e-5;
        let s = Complex64::new(0.3, -0.7);
        let d = (agg.eigen().eval(s - I * h, 0.4).db - agg.eigen().eval(s + I * h, 0.4).db) / (2.0 * h);
        assert!((x.d2lambda_db2 - d).norm() < 1e-5 * d.norm(), "{} vs {d}", x.d2lambda_db2);
        assert!(x.s_value.is_some() && x.a_value.is_some());
        assert!(x.lambda.norm() <= agg.eigen().lambda(Complex64::new(0.3, 0.0), 0.0).re + 1e-15);
        let o = spectral_sample(&agg, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(o.lambda, Complex64::new(1.0, 0.0));
        assert!(o.s_value.is_none());
        assert!(spectral_sample(&agg, -1.0, 0.0, 0.0).is_err());
    }
}
