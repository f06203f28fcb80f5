//! Both sides of the inversion identity
//! `∫ e^{-iλ(x-t)} ĝ_a(x-t) dV_u(x) = ∫ e^{-itb} g_a(b+λ) Re A(u-ib) db`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::kernel::KernelPair;
use super::measure::WeightedTauMeasure;
use crate::quad::{graded_mesh, GaussLegendre};
use crate::simulate::ExcursionStore;
use crate::spectral::{AMethod, Aggregator};
use crate::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const A_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InversionCase {
    pub a: f64,
    pub t: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InversionResult {
    pub u: f64,
    pub a: f64,
    pub t: f64,
    pub lambda: f64,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub diff: f64,
    pub mc_error: f64,
    pub quad_error: f64,
    pub passes: bool,
}

impl InversionResult {
    pub fn tolerance(&self) -> f64 {
        self.mc_error + self.quad_error
    }
}

/// `Re A(u - ib)` on the nodes of a b-mesh shared by all cases.
struct ReASamples {
    hi: Vec<(f64, f64, f64)>,
    lo: Vec<(f64, f64, f64)>,
    max_err: f64,
}

fn sample_re_a(agg: &Aggregator, u: f64, breaks: &[f64]) -> Result<ReASamples> {
    use rayon::prelude::*;
    let eval = |rule: &GaussLegendre| -> Result<(Vec<(f64, f64, f64)>, f64)> {
        let nodes = rule.mesh_nodes(breaks);
        let vals: Vec<Result<(f64, f64, f64, f64)>> = nodes
            .par_iter()
            .map(|&(b, w)| {
                let v = agg.a_spectral(Complex64::new(u, -b), AMethod::SpectralExact, A_TOL)?;
                Ok((b, w, v.value.re, v.error * v.value.norm()))
            })
            .collect();
        let mut out = Vec::with_capacity(vals.len());
        let mut err: f64 = 0.0;
        for v in vals {
            let (b, w, re, e) = v?;
            out.push((b, w, re));
            err = err.max(e);
        }
        Ok((out, err))
    };
    let (hi, e1) = eval(&GaussLegendre::new(16))?;
    let (lo, e2) = eval(&GaussLegendre::new(10))?;
    Ok(ReASamples { hi, lo, max_err: e1.max(e2) })
}

fn rhs_of(samples: &[(f64, f64, f64)], k: &KernelPair, c: &InversionCase) -> Complex64 {
    samples
        .iter()
        .map(|&(b, w, re_a)| (-I * c.t * b).exp() * (k.g(b + c.lambda) * re_a * w))
        .sum()
}

/// Evaluate all `cases` at damping `u`, reusing one set of A values.
pub fn inversion_batch(store: &ExcursionStore, agg: &Aggregator, u: f64, cases: &[InversionCase]) -> Result<Vec<InversionResult>> {
    if !(u > 0.0) {
        return Err(Error::InvalidArgument("inversion check needs u > 0".into()));
    }
    if cases.is_empty() {
        return Ok(Vec::new());
    }
    let mut features = vec![0.0];
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut t_max: f64 = 1.0;
    let mut kernels = Vec::with_capacity(cases.len());
    for c in cases {
        let k = KernelPair::new(c.a)?;
        kernels.push(k);
        // the triangle has kinks at -λ and -λ ± a
        features.extend([-c.lambda, -c.lambda - c.a, -c.lambda + c.a]);
        lo = lo.min(-c.lambda - c.a);
        hi = hi.max(-c.lambda + c.a);
        t_max = t_max.max(c.t.abs());
    }
    // A(u - ib) varies on the scale u around b = 0
    let mut breaks = graded_mesh(lo, hi, &features, 1e-2 * u, 2.0, (PI / (4.0 * t_max)).min(0.25));
    breaks.dedup();
    let samples = sample_re_a(agg, u, &breaks)?;
    let nu = WeightedTauMeasure::new(store, u);
    let mut out = Vec::with_capacity(cases.len());
    for (c, k) in cases.iter().zip(&kernels) {
        let h = |x: f64| (-I * c.lambda * (x - c.t)).exp() * k.ghat(x - c.t);
        let lhs = nu.integrate_symmetric(h, 1.0);
        let rhs = rhs_of(&samples.hi, k, c);
        let rhs_lo = rhs_of(&samples.lo, k, c);
        // ∫ g_a = 1, so per-node A errors add at most max_err
        let quad_error = (rhs - rhs_lo).norm() + samples.max_err;
        let mc_error = lhs.tolerance(4.0);
        let diff = (lhs.value - rhs).norm();
        out.push(InversionResult {
            u,
            a: c.a,
            t: c.t,
            lambda: c.lambda,
            lhs: lhs.value,
            rhs,
            diff,
            mc_error,
            quad_error,
            passes: diff <= mc_error + quad_error,
        });
    }
    Ok(out)
}

pub fn inversion_check(store: &ExcursionStore, agg: &Aggregator, u: f64, kernel: KernelPair, t: f64, lambda: f64) -> Result<InversionResult> {
    let case = InversionCase { a: kernel.a, t, lambda };
    Ok(inversion_batch(store, agg, u, &[case])?.remove(0))
}
