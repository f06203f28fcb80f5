//! The large-t limit of `m(t) ∫ e^{-itb} g_a(b+λ) A(1/t - ib) e db`, with the
//! split into `|b| ≤ M/t` and the rest.

use std::f64::consts::{E, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::KernelPair;
use crate::model::Model;
use crate::quad::GaussLegendre;
use crate::spectral::{AMethod, Aggregator};
use crate::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
pub const DEFAULT_MAX_PANELS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "rule", content = "value")]
pub enum MRule {
    /// M = t^{1/2}.
    Sqrt,
    /// M = t^k.
    Power(f64),
}

impl MRule {
    pub fn m(&self, t: f64) -> f64 {
        match *self {
            MRule::Sqrt => t.sqrt(),
            MRule::Power(k) => t.powf(k),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FgaRow {
    pub t: f64,
    pub m_t: f64,
    /// `m(t) e ∫ e^{-itb} g_a(b+λ) A(1/t - ib) db`.
    pub value: Complex64,
    /// Contribution of `|b| ≤ M/t`, before the m(t) factor.
    pub i1: Complex64,
    pub i2: Complex64,
    pub scaled_i2: f64,
    pub panels: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FgaReport {
    pub a: f64,
    pub lambda: f64,
    pub rule: MRule,
    pub g_at_lambda: f64,
    pub rows: Vec<FgaRow>,
}

/// `m(t) = t^{1-1/p} / ℓ*(t)`.
pub fn m_of_t(model: &Model, t: f64) -> Result<f64> {
    Ok(t.powf(1.0 - 1.0 / model.p()) / model.constants.ell_star(t)?)
}

pub fn fga_limit(
    model: &Model,
    agg: &Aggregator,
    kernel: KernelPair,
    lambda: f64,
    t_grid: &[f64],
    rule: MRule,
    max_panels: usize,
) -> Result<FgaReport> {
    // a ≤ |λ| is allowed: g_a(λ) = 0 and the value should tend to 0
    let gl = GaussLegendre::new(8);
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        if t < 10.0 {
            return Err(Error::InvalidArgument(format!("fga limit needs t ≥ 10, got {t}")));
        }
        let width = PI / (4.0 * t);
        let edge = kernel.a + lambda.abs();
        let cut = rule.m(t) / t;
        let mut pts = vec![-edge, edge, -lambda - kernel.a, -lambda, -lambda + kernel.a, 0.0];
        if cut < edge {
            pts.extend([-cut, cut]);
        }
        pts.retain(|x| (-edge..=edge).contains(x));
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let mut breaks = Vec::new();
        for w in pts.windows(2) {
            let n = ((w[1] - w[0]) / width).ceil().max(1.0) as usize;
            breaks.extend((0..n).map(|j| w[0] + (w[1] - w[0]) * j as f64 / n as f64));
        }
        breaks.push(edge);
        let panels = breaks.len() - 1;
        if panels > max_panels {
            return Err(Error::Quadrature(format!(
                "fga at t = {t} needs {panels} panels of width ≤ π/(4t), budget {max_panels}"
            )));
        }
        let nodes = gl.mesh_nodes(&breaks);
        let u = 1.0 / t;
        let parts: Vec<Result<(Complex64, Complex64)>> = nodes
            .par_iter()
            .map(|&(b, w)| {
                let g = kernel.g(b + lambda);
                if g == 0.0 {
                    return Ok((Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)));
                }
                let a = agg.a_spectral(Complex64::new(u, -b), AMethod::SpectralExact, 1e-8)?;
                let v = (-I * b * t).exp() * a.value * (g * w * E);
                Ok(if b.abs() <= cut { (v, Complex64::new(0.0, 0.0)) } else { (Complex64::new(0.0, 0.0), v) })
            })
            .collect();
        let (mut i1, mut i2) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for p in parts {
            let (x, y) = p?;
            i1 += x;
            i2 += y;
        }
        let m_t = m_of_t(model, t)?;
        rows.push(FgaRow {
            t,
            m_t,
            value: (i1 + i2) * m_t,
            i1,
            i2,
            scaled_i2: m_t * i2.norm(),
            panels,
        });
    }
    Ok(FgaReport {
        a: kernel.a,
        lambda,
        rule,
        g_at_lambda: kernel.g(lambda),
        rows,
    })
}
