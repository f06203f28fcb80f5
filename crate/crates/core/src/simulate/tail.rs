use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::excursion::{run_excursion_until, Outcome};
use super::rng::{Domain, Schedule};
use crate::model::{Model, SymbolLaw};
use crate::stats::{weighted_linear_fit, wilson_interval, LinearFit, Moments};
use crate::{Error, Result};

pub const WILSON_Z: f64 = 1.96;

/// Tent kernel ω(x) = max(0, 1 - |x|).
#[inline]
pub fn tent(x: f64) -> f64 {
    (1.0 - x.abs()).max(0.0)
}

/// Streaming tail accumulator.
///
/// `points` are the survival evaluation times (grid and anchors merged);
/// `cells[k]` counts samples with exactly k points strictly below τ, so the
/// exceedance count at point i is the sum of cells above i.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailHistogram {
    pub points: Vec<f64>,
    cells: Vec<u64>,
    pub anchors: Vec<f64>,
    /// Samples with t < τ < t + 1, per anchor.
    pub unit_counts: Vec<u64>,
    /// Σ τ over the unit bin: trials × ν̂_0([t, t+1]).
    pub unit_tau_sum: Vec<f64>,
    /// Σ ω(t - τ).
    pub tent_sum: Vec<f64>,
    pub trials: u64,
    pub completed: u64,
    pub censored: u64,
    pub capped: u64,
    pub horizon: f64,
    pub steps: Moments,
}

impl TailHistogram {
    pub fn new(grid: &[f64], anchors: &[f64], horizon: f64) -> Result<Self> {
        let mut points: Vec<f64> = grid.iter().chain(anchors).copied().collect();
        points.sort_by(f64::total_cmp);
        points.dedup();
        let mut anchors = anchors.to_vec();
        anchors.sort_by(f64::total_cmp);
        anchors.dedup();
        if let Some(&top) = points.last() {
            if top + 1.0 > horizon {
                return Err(Error::InvalidArgument(format!(
                    "horizon {horizon} must exceed the largest evaluation time {top} by at least 1"
                )));
            }
        }
        if points.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::InvalidArgument("evaluation times must be finite and non-negative".into()));
        }
        let na = anchors.len();
        Ok(TailHistogram {
            cells: vec![0; points.len() + 1],
            points,
            anchors,
            unit_counts: vec![0; na],
            unit_tau_sum: vec![0.0; na],
            tent_sum: vec![0.0; na],
            trials: 0,
            completed: 0,
            censored: 0,
            capped: 0,
            horizon,
            steps: Moments::default(),
        })
    }

    pub fn empty_like(&self) -> Self {
        let mut h = self.clone();
        h.cells.iter_mut().for_each(|c| *c = 0);
        h.unit_counts.iter_mut().for_each(|c| *c = 0);
        h.unit_tau_sum.iter_mut().for_each(|c| *c = 0.0);
        h.tent_sum.iter_mut().for_each(|c| *c = 0.0);
        h.trials = 0;
        h.completed = 0;
        h.censored = 0;
        h.capped = 0;
        h.steps = Moments::default();
        h
    }

    pub fn record(&mut self, out: &Outcome) {
        self.trials += 1;
        match *out {
            Outcome::Complete(e) => {
                self.completed += 1;
                self.steps.push(e.steps as f64);
                self.record_tau(e.tau);
            }
            Outcome::Censored { .. } => {
                self.censored += 1;
                // τ > horizon > every point
                *self.cells.last_mut().unwrap() += 1;
            }
            Outcome::Capped { tau_so_far, .. } => {
                // only the lower bound τ > tau_so_far is known; survival is
                // exact up to there and the capped mass is reported separately
                self.capped += 1;
                let k = self.points.partition_point(|&t| t < tau_so_far);
                self.cells[k] += 1;
            }
        }
    }

    fn record_tau(&mut self, tau: f64) {
        let k = self.points.partition_point(|&t| t < tau);
        self.cells[k] += 1;
        let start = self.anchors.partition_point(|&t| t <= tau - 1.0);
        for (i, &t) in self.anchors.iter().enumerate().skip(start) {
            if t >= tau + 1.0 {
                break;
            }
            self.tent_sum[i] += tent(t - tau);
            if t < tau && tau < t + 1.0 {
                self.unit_counts[i] += 1;
                self.unit_tau_sum[i] += tau;
            }
        }
    }

    pub fn merge(&mut self, other: &TailHistogram) {
        assert_eq!(self.points, other.points, "merging histograms over different grids");
        assert_eq!(self.anchors, other.anchors);
        for (a, b) in self.cells.iter_mut().zip(&other.cells) {
            *a += b;
        }
        for i in 0..self.anchors.len() {
            self.unit_counts[i] += other.unit_counts[i];
            self.unit_tau_sum[i] += other.unit_tau_sum[i];
            self.tent_sum[i] += other.tent_sum[i];
        }
        self.trials += other.trials;
        self.completed += other.completed;
        self.censored += other.censored;
        self.capped += other.capped;
        self.steps.merge(&other.steps);
    }

    /// Number of samples with τ > t for an evaluation point t.
    pub fn exceed_count(&self, t: f64) -> Option<u64> {
        let i = self.points.iter().position(|&x| x == t)?;
        Some(self.cells[i + 1..].iter().sum())
    }

    pub fn survival_counts(&self) -> Vec<(f64, u64)> {
        let mut out = Vec::with_capacity(self.points.len());
        let mut acc: u64 = self.cells.iter().sum();
        for (i, &t) in self.points.iter().enumerate() {
            acc -= self.cells[i];
            out.push((t, acc));
        }
        out
    }

    pub fn survival(&self, t: f64) -> Option<Estimate> {
        self.exceed_count(t).map(|k| Estimate::binomial(k, self.trials))
    }

    pub fn unit_mass(&self, i: usize) -> Estimate {
        Estimate::binomial(self.unit_counts[i], self.trials)
    }

    /// ν̂_0([t, t+1]) for anchor i.
    pub fn nu0(&self, i: usize) -> f64 {
        self.unit_tau_sum[i] / self.trials as f64
    }

    pub fn tent_mean(&self, i: usize) -> f64 {
        self.tent_sum[i] / self.trials as f64
    }

    pub fn capped_fraction(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.capped as f64 / self.trials as f64
        }
    }

    /// `t μ̂ ≤ ν̂_0 ≤ (t+1) μ̂` on every anchor.
    pub fn sandwich_holds(&self) -> bool {
        self.anchors.iter().enumerate().all(|(i, &t)| {
            let n = self.unit_counts[i] as f64;
            let s = self.unit_tau_sum[i];
            t * n <= s * (1.0 + 1e-12) && s <= (t + 1.0) * n * (1.0 + 1e-12)
        })
    }

    pub fn survival_is_monotone(&self) -> bool {
        self.survival_counts().windows(2).all(|w| w[1].1 <= w[0].1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub count: u64,
}

impl Estimate {
    pub fn binomial(k: u64, n: u64) -> Self {
        let (lo, hi) = wilson_interval(k, n, WILSON_Z);
        Estimate {
            value: if n == 0 { f64::NAN } else { k as f64 / n as f64 },
            ci_low: lo,
            ci_high: hi,
            count: k,
        }
    }

    pub fn scaled(&self, f: f64) -> Self {
        Estimate {
            value: self.value * f,
            ci_low: self.ci_low * f,
            ci_high: self.ci_high * f,
            count: self.count,
        }
    }

    /// CI wider than the estimate itself.
    pub fn unresolved(&self) -> bool {
        self.ci_high - self.ci_low > self.value
    }

    pub fn contains(&self, x: f64) -> bool {
        self.ci_low <= x && x <= self.ci_high
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailConfig {
    pub trials: u64,
    pub grid: Vec<f64>,
    pub anchors: Vec<f64>,
    pub horizon: f64,
    pub cap: u64,
}

impl TailConfig {
    /// Horizon just past the last evaluation time.
    pub fn new(trials: u64, grid: Vec<f64>, anchors: Vec<f64>, cap: u64) -> Self {
        let top = grid.iter().chain(&anchors).fold(0.0f64, |a, &b| a.max(b));
        TailConfig {
            trials,
            grid,
            anchors,
            horizon: top + 2.0,
            cap,
        }
    }
}

pub fn accumulate_tail<R: RngCore + ?Sized>(law: &SymbolLaw, rng: &mut R, hist: &mut TailHistogram, trials: u64, cap: u64) {
    for _ in 0..trials {
        let out = run_excursion_until(law, rng, cap, hist.horizon);
        hist.record(&out);
    }
}

fn run_histogram(law: &SymbolLaw, cfg: &TailConfig, sched: &Schedule, domain: Domain) -> Result<TailHistogram> {
    if cfg.cap < 2 {
        return Err(Error::InvalidArgument("cap must be at least 2".into()));
    }
    let template = TailHistogram::new(&cfg.grid, &cfg.anchors, cfg.horizon)?;
    let parts = sched.run(domain, cfg.trials, |rng, n| {
        let mut h = template.empty_like();
        accumulate_tail(law, rng, &mut h, n, cfg.cap);
        h
    });
    let mut total = template;
    for part in &parts {
        total.merge(part);
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorRow {
    pub t: f64,
    pub estimate: Estimate,
    pub rescaled: Estimate,
    pub target: f64,
    pub unresolved: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauTailReport {
    pub histogram: TailHistogram,
    /// Survival on the merged grid.
    pub survival: Vec<AnchorRow>,
    /// Target of the rescaled statistic `μ(τ>t) t^{1-1/p} ℓ*(t)`.
    pub target: f64,
}

/// `p sin(π/p) (r*)^{1-1/p} / Γ(1/p)`.
pub fn tail_constant_target(p: f64, r_star: f64) -> f64 {
    p * (std::f64::consts::PI / p).sin() * r_star.powf(1.0 - 1.0 / p) / crate::special::gamma(1.0 / p)
}

pub fn estimate_tau_tail(model: &Model, cfg: &TailConfig, sched: &Schedule) -> Result<TauTailReport> {
    if cfg.trials < 10_000 {
        return Err(Error::InvalidArgument("tail estimation needs at least 1e4 trials".into()));
    }
    let h = run_histogram(&model.law, cfg, sched, Domain::Tail)?;
    let p = model.p();
    let target = tail_constant_target(p, model.constants.r_star);
    let mut rows = Vec::new();
    for (t, k) in h.survival_counts() {
        let est = Estimate::binomial(k, h.trials);
        let scale = if t > 0.0 {
            t.powf(1.0 - 1.0 / p) * model.constants.ell_star(t.max(1.0)).unwrap_or(f64::NAN)
        } else {
            f64::NAN
        };
        rows.push(AnchorRow {
            t,
            estimate: est,
            rescaled: est.scaled(scale),
            target,
            unresolved: est.unresolved(),
        });
    }
    Ok(TauTailReport {
        histogram: h,
        survival: rows,
        target,
    })
}

/// Log-log fit over rows with t in [lo, hi] and a positive estimate.
/// Weights are the binomial inverse variances of the log estimate.
pub fn fit_rows(rows: &[AnchorRow], lo: f64, hi: f64, weighted: bool) -> Option<LinearFit> {
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut w = Vec::new();
    for r in rows {
        if r.t >= lo && r.t <= hi && r.estimate.count > 0 {
            x.push(r.t.ln());
            y.push(r.estimate.value.ln());
            let v = r.estimate.value;
            w.push(if weighted { r.estimate.count as f64 / (1.0 - v).max(1e-12) } else { 1.0 });
        }
    }
    weighted_linear_fit(&x, &y, &w)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothAnchorRow {
    pub t: f64,
    pub unit_mass: Estimate,
    pub nu0: f64,
    pub tent: f64,
    /// `μ̂(t<τ<t+1) t^{2-1/p} ℓ*(t)`: the empirical d_p.
    pub rescaled: Estimate,
    pub unresolved: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothTailReport {
    pub histogram: TailHistogram,
    pub rows: Vec<SmoothAnchorRow>,
}

pub fn estimate_smooth_tail(model: &Model, cfg: &TailConfig, sched: &Schedule) -> Result<SmoothTailReport> {
    if cfg.trials < 10_000 {
        return Err(Error::InvalidArgument("smooth-tail estimation needs at least 1e4 trials".into()));
    }
    let h = run_histogram(&model.law, cfg, sched, Domain::SmoothTail)?;
    let p = model.p();
    let mut rows = Vec::with_capacity(h.anchors.len());
    for (i, &t) in h.anchors.iter().enumerate() {
        let m = h.unit_mass(i);
        let scale = t.powf(2.0 - 1.0 / p) * model.constants.ell_star(t.max(1.0)).unwrap_or(f64::NAN);
        rows.push(SmoothAnchorRow {
            t,
            unit_mass: m,
            nu0: h.nu0(i),
            tent: h.tent_mean(i),
            rescaled: m.scaled(scale),
            unresolved: m.unresolved(),
        });
    }
    Ok(SmoothTailReport { histogram: h, rows })
}

impl SmoothTailReport {
    pub fn fit(&self, lo: f64, hi: f64) -> Option<LinearFit> {
        let rows: Vec<AnchorRow> = self
            .rows
            .iter()
            .map(|r| AnchorRow {
                t: r.t,
                estimate: r.unit_mass,
                rescaled: r.rescaled,
                target: f64::NAN,
                unresolved: r.unresolved,
            })
            .collect();
        fit_rows(&rows, lo, hi, true)
    }

    pub fn row_at(&self, t: f64) -> Option<&SmoothAnchorRow> {
        self.rows.iter().find(|r| (r.t - t).abs() <= 1e-9 * t.max(1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_model, ModelParams};
    use crate::stats::log_grid;

    #[test]
    fn tent_shape() {
        assert_eq!(tent(0.0), 1.0);
        assert_eq!(tent(1.0), 0.0);
        assert_eq!(tent(-0.25), 0.75);
        assert_eq!(tent(3.0), 0.0);
    }

    #[test]
    fn histogram_bookkeeping() {
        let mut h = TailHistogram::new(&[1.0, 5.0], &[3.0], 10.0).unwrap();
        for tau in [2.5, 3.2, 3.9, 6.0] {
            h.trials += 1;
            h.record_tau(tau);
        }
        assert_eq!(h.exceed_count(1.0), Some(4));
        assert_eq!(h.exceed_count(3.0), Some(3));
        assert_eq!(h.exceed_count(5.0), Some(1));
        assert_eq!(h.unit_counts[0], 2);
        assert!((h.unit_tau_sum[0] - 7.1).abs() < 1e-12);
        assert!((h.tent_sum[0] - (0.5 + 0.8 + 0.1)).abs() < 1e-12);
        assert!(h.sandwich_holds());
        assert!(h.survival_is_monotone());
        assert!(TailHistogram::new(&[1.0], &[9.5], 10.0).is_err());
    }

    #[test]
    fn small_run_invariants() {
        let model = build_model(ModelParams::new(1.5)).unwrap();
        let cfg = TailConfig::new(20_000, log_grid(1.0, 100.0, 5), vec![10.0, 30.0], 1_000_000);
        let rep = estimate_tau_tail(&model, &cfg, &Schedule::new(1, 1)).unwrap();
        let h = &rep.histogram;
        assert_eq!(h.trials, 20_000);
        assert_eq!(h.capped, 0);
        assert_eq!(h.exceed_count(1.0), Some(20_000));
        assert!(h.survival(2.0).is_none() || h.survival(2.0).unwrap().value < 1.0);
        assert!(h.sandwich_holds());
        assert!(h.survival_is_monotone());
        for (i, &t) in h.anchors.iter().enumerate() {
            assert!(h.unit_counts[i] <= h.exceed_count(t).unwrap());
        }
    }

    #[test]
    fn tail_target_value() {
        let v = tail_constant_target(1.5, 2.013_294_455_5);
        assert!((v - 1.2115).abs() < 5e-3, "{v}");
    }
}
