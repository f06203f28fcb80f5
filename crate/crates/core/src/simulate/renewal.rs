use serde::{Deserialize, Serialize};

use super::excursion::{run_excursion_from, run_excursion_until, Outcome, SymbolSet};
use super::rng::{Domain, Schedule};
use super::store::ExcursionStore;
use super::tail::Estimate;
use crate::model::{Model, Symbol, SymbolLaw};
use crate::stats::Moments;
use crate::{Error, Result};

/// `d_β = sin(πβ)/π`.
pub fn d_beta(beta: f64) -> f64 {
    (std::f64::consts::PI * beta).sin() / std::f64::consts::PI
}

/// Renewal points `τ_0 = 0 < τ_1 < ...` of one path started in A, with the
/// first symbol of the excursion that starts at each point.
struct RenewalPath {
    starts: Vec<(f64, Symbol)>,
    voided: bool,
}

fn renewal_path<R: rand::RngCore + ?Sized>(law: &SymbolLaw, rng: &mut R, a: &SymbolSet, until: f64, cap: u64) -> RenewalPath {
    let mut starts = Vec::new();
    let mut s = 0.0;
    let mut out = run_excursion_from(law, rng, a, cap, until);
    loop {
        starts.push((s, out.first()));
        match out {
            Outcome::Complete(e) => {
                s += e.tau;
                if s > until {
                    break;
                }
                out = run_excursion_until(law, rng, cap, until - s);
            }
            Outcome::Censored { .. } => break,
            Outcome::Capped { .. } => return RenewalPath { starts, voided: true },
        }
    }
    RenewalPath { starts, voided: false }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenewalConfig {
    pub trials: u64,
    pub a: SymbolSet,
    pub b: SymbolSet,
    /// Closed windows `[lo, hi]`.
    pub windows: Vec<(f64, f64)>,
    pub cap: u64,
    /// Independent unconditioned excursions used for μ̂(τ>t) and m̂(t).
    pub normaliser_trials: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RenewalTally {
    per_window: Vec<Moments>,
    trials: u64,
    voided: u64,
}

impl RenewalTally {
    fn merge(&mut self, o: &RenewalTally) {
        for (a, b) in self.per_window.iter_mut().zip(&o.per_window) {
            a.merge(b);
        }
        self.trials += o.trials;
        self.voided += o.voided;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenewalRow {
    pub lo: f64,
    pub hi: f64,
    /// `U_{A,B}([lo, hi])` with a ±1.96σ interval.
    pub u: Estimate,
    /// `(U(I) + U(-I))/2`.
    pub v: f64,
    /// `ℓ(t) t^{1-β} U(I)` with `ℓ(t) = t^β μ̂(τ > t)`, t = lo.
    pub rescaled: f64,
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenewalAccumulator {
    pub rows: Vec<RenewalRow>,
    pub mu_a: f64,
    pub mu_b: f64,
    pub mu_ab: f64,
    pub trials: u64,
    pub voided: u64,
}

pub fn estimate_renewal(model: &Model, cfg: &RenewalConfig, sched: &Schedule) -> Result<RenewalAccumulator> {
    let law = &model.law;
    cfg.a.validate(law)?;
    cfg.b.validate(law)?;
    if cfg.windows.iter().any(|&(lo, hi)| !(hi >= lo && lo.is_finite() && hi.is_finite())) {
        return Err(Error::InvalidArgument("renewal windows must be finite with lo <= hi".into()));
    }
    let until = cfg.windows.iter().fold(0.0f64, |m, w| m.max(w.1));
    let nw = cfg.windows.len();
    let parts = sched.run(Domain::Renewal, cfg.trials, |rng, n| {
        let mut t = RenewalTally {
            per_window: vec![Moments::default(); nw],
            trials: 0,
            voided: 0,
        };
        let mut hits = vec![0u32; nw];
        for _ in 0..n {
            t.trials += 1;
            let path = renewal_path(law, rng, &cfg.a, until, cfg.cap);
            if path.voided {
                t.voided += 1;
                continue;
            }
            hits.iter_mut().for_each(|h| *h = 0);
            for &(s, first) in &path.starts {
                if !cfg.b.contains(first) {
                    continue;
                }
                for (k, &(lo, hi)) in cfg.windows.iter().enumerate() {
                    if lo <= s && s <= hi {
                        hits[k] += 1;
                    }
                }
            }
            for (m, &h) in t.per_window.iter_mut().zip(&hits) {
                m.push(h as f64);
            }
        }
        t
    });
    let mut tally = RenewalTally {
        per_window: vec![Moments::default(); nw],
        trials: 0,
        voided: 0,
    };
    for p in &parts {
        tally.merge(p);
    }
    let norm = ExcursionStore::collect(
        model,
        cfg.normaliser_trials.max(1),
        until + 1.0,
        cfg.cap,
        sched,
    )?;
    let mu_a = cfg.a.mass(law);
    let mu_b = cfg.b.mass(law);
    let mu_ab = intersection_mass(&cfg.a, &cfg.b, law);
    let beta = model.constants.beta;
    let db = d_beta(beta);
    let rows = cfg
        .windows
        .iter()
        .zip(&tally.per_window)
        .map(|(&(lo, hi), m)| {
            let mean = m.mean();
            let se = m.std_error();
            let u = Estimate {
                value: mu_a * mean,
                ci_low: mu_a * (mean - 1.96 * se).max(0.0),
                ci_high: mu_a * (mean + 1.96 * se),
                count: m.sum as u64,
            };
            let u_neg = if lo <= 0.0 && 0.0 <= hi { mu_ab } else { 0.0 };
            let ell_t = lo.powf(beta) * norm.survival(lo);
            RenewalRow {
                lo,
                hi,
                u,
                v: 0.5 * (u.value + u_neg),
                rescaled: ell_t * lo.powf(1.0 - beta) * u.value,
                target: db * mu_a * mu_b * (hi - lo),
            }
        })
        .collect();
    Ok(RenewalAccumulator {
        rows,
        mu_a,
        mu_b,
        mu_ab,
        trials: tally.trials,
        voided: tally.voided,
    })
}

fn intersection_mass(a: &SymbolSet, b: &SymbolSet, law: &SymbolLaw) -> f64 {
    match (a, b) {
        (SymbolSet::All, x) | (x, SymbolSet::All) => x.mass(law),
        (SymbolSet::Magnitudes(x), SymbolSet::Magnitudes(y)) => {
            SymbolSet::Magnitudes(x.iter().filter(|n| y.contains(n)).copied().collect()).mass(law)
        }
    }
}

/// `C × [lo, hi]` under the roof.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSet {
    pub set: SymbolSet,
    pub lo: f64,
    pub hi: f64,
}

impl FlowSet {
    pub fn measure(&self, law: &SymbolLaw) -> f64 {
        self.set.mass(law) * (self.hi - self.lo)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub trials: u64,
    pub a1: FlowSet,
    pub b1: FlowSet,
    pub t_grid: Vec<f64>,
    pub cap: u64,
    pub normaliser_trials: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowRow {
    pub t: f64,
    /// `μ̂^τ(A₁ ∩ Ψ_t^{-1} B₁)`.
    pub correlation: Estimate,
    /// `m̂(t) = ∫_0^t μ̂(τ>x) dx`.
    pub m_hat: f64,
    /// `m̂(t) · correlation`.
    pub value: Estimate,
    /// `t μ̂(τ>t) · correlation`.
    pub value_tail_norm: f64,
    /// `d_β μ^τ(A₁) μ^τ(B₁)`.
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowReport {
    pub rows: Vec<FlowRow>,
    pub mu_a1: f64,
    pub mu_b1: f64,
    pub d_beta: f64,
    pub trials: u64,
    pub voided: u64,
}

pub fn estimate_flow_correlation(model: &Model, cfg: &FlowConfig, sched: &Schedule) -> Result<FlowReport> {
    let law = &model.law;
    cfg.a1.set.validate(law)?;
    cfg.b1.set.validate(law)?;
    for fs in [&cfg.a1, &cfg.b1] {
        if !(0.0 <= fs.lo && fs.lo < fs.hi && fs.hi <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "flow interval [{}, {}] must lie in [0, 1] so it sits under the roof",
                fs.lo, fs.hi
            )));
        }
    }
    if cfg.t_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::InvalidArgument("flow times must be finite and non-negative".into()));
    }
    let t_max = cfg.t_grid.iter().fold(0.0f64, |m, &t| m.max(t));
    let until = t_max + cfg.a1.hi;
    let nt = cfg.t_grid.len();
    let parts = sched.run(Domain::Flow, cfg.trials, |rng, n| {
        let mut hits = vec![0u64; nt];
        let mut voided = 0u64;
        for _ in 0..n {
            // u uniform on [a1.lo, a1.hi] from 53 random bits
            let bits = rand::RngCore::next_u64(rng) >> 11;
            let u = cfg.a1.lo + (cfg.a1.hi - cfg.a1.lo) * (bits as f64 / (1u64 << 53) as f64);
            let path = renewal_path(law, rng, &cfg.a1.set, until, cfg.cap);
            if path.voided {
                voided += 1;
                continue;
            }
            for (k, &t) in cfg.t_grid.iter().enumerate() {
                let x = u + t;
                let idx = path.starts.partition_point(|&(s, _)| s <= x) - 1;
                let (s, first) = path.starts[idx];
                let h = x - s;
                if cfg.b1.set.contains(first) && cfg.b1.lo <= h && h <= cfg.b1.hi {
                    hits[k] += 1;
                }
            }
        }
        (hits, voided)
    });
    let mut hits = vec![0u64; nt];
    let mut voided = 0;
    for (h, v) in &parts {
        for (a, b) in hits.iter_mut().zip(h) {
            *a += b;
        }
        voided += v;
    }
    let valid = cfg.trials - voided;
    let norm = ExcursionStore::collect(model, cfg.normaliser_trials.max(1), t_max + 1.0, cfg.cap, sched)?;
    let mu_a1 = cfg.a1.measure(law);
    let mu_b1 = cfg.b1.measure(law);
    let db = d_beta(model.constants.beta);
    let rows = cfg
        .t_grid
        .iter()
        .zip(&hits)
        .map(|(&t, &k)| {
            let corr = Estimate::binomial(k, valid).scaled(mu_a1);
            let m = norm.m_hat(t);
            FlowRow {
                t,
                correlation: corr,
                m_hat: m,
                value: corr.scaled(m),
                value_tail_norm: t * norm.survival(t) * corr.value,
                target: db * mu_a1 * mu_b1,
            }
        })
        .collect();
    Ok(FlowReport {
        rows,
        mu_a1,
        mu_b1,
        d_beta: db,
        trials: cfg.trials,
        voided,
    })
}
