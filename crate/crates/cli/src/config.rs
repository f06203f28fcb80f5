//! `RunConfig`: everything a run depends on, echoed verbatim into the manifest.

use std::path::PathBuf;

use anyhow::{bail, ensure, Context, Result};
use clap::ValueEnum;
use krick::model::ModelConfig;
use krick::renewal::MRule;
use krick::simulate::{SymbolSet, DEFAULT_CAP};
use krick::spectral::{AperiodicityConfig, ExpansionConfig};
use krick::stats::log_grid;
use serde::{Deserialize, Serialize};

use crate::numbers::check_anchors;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    ModelReport,
    Tail,
    SmoothTail,
    Renewal,
    Mixing,
    SpectralSweep,
    Constants,
    Aperiodicity,
    InversionCheck,
    FgaLimit,
    TentCheck,
    All,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::ModelReport => "model-report",
            Command::Tail => "tail",
            Command::SmoothTail => "smooth-tail",
            Command::Renewal => "renewal",
            Command::Mixing => "mixing",
            Command::SpectralSweep => "spectral-sweep",
            Command::Constants => "constants",
            Command::Aperiodicity => "aperiodicity",
            Command::InversionCheck => "inversion-check",
            Command::FgaLimit => "fga-limit",
            Command::TentCheck => "tent-check",
            Command::All => "all",
        }
    }
}

/// Smoke runs in seconds; desk is sized for the acceptance thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Budget {
    #[default]
    Smoke,
    Desk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailPlan {
    pub trials: u64,
    pub anchors: Vec<f64>,
    pub fit_lo: f64,
    pub fit_hi: f64,
    /// Time at which the rescaled statistic is held to its target.
    pub check_at: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothPlan {
    pub trials: u64,
    pub anchors: Vec<f64>,
    pub fit_lo: f64,
    pub fit_hi: f64,
    /// Anchors whose empirical d_p intervals must overlap.
    pub compare: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenewalPlan {
    pub trials: u64,
    pub normaliser_trials: u64,
    pub a: SymbolSet,
    pub b: SymbolSet,
    pub window_starts: Vec<f64>,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixingPlan {
    pub trials: u64,
    pub normaliser_trials: u64,
    /// First-symbol magnitudes of A = B.
    pub magnitudes: Vec<u64>,
    pub lo: f64,
    pub hi: f64,
    pub t_grid: Vec<f64>,
}

/// Excursions shared by the Laplace, inversion and tent checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StorePlan {
    pub trials: u64,
    pub horizon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralPlan {
    pub us: Vec<f64>,
    pub bs: Vec<f64>,
    pub thetas: Vec<f64>,
    /// Points (u, b) of the Laplace identity check.
    pub laplace_points: Vec<[f64; 2]>,
    pub expansion: ExpansionConfig,
    /// b grid of the |A(-ib)| scaling check.
    pub a_bs: Vec<f64>,
    pub aperiodicity: AperiodicityConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InversionPlan {
    pub us: Vec<f64>,
    pub a: Vec<f64>,
    pub t: Vec<f64>,
    pub lambda: Vec<f64>,
    /// Bandwidths of the kernel Fourier-pair check.
    pub pair_a: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FgaPlan {
    pub a: f64,
    pub lambda: f64,
    pub t_grid: Vec<f64>,
    pub rule: MRule,
    pub max_panels: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TentPlan {
    /// Points (Re s, Im s).
    pub s_grid: Vec<[f64; 2]>,
    pub cauchy_t: Vec<f64>,
    pub lipschitz_gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub budget: Budget,
    pub model: ModelConfig,
    pub seed: u64,
    pub workers: usize,
    pub cap: u64,
    pub out_dir: PathBuf,
    pub tail: TailPlan,
    pub smooth_tail: SmoothPlan,
    pub renewal: RenewalPlan,
    pub mixing: MixingPlan,
    pub store: StorePlan,
    pub spectral: SpectralPlan,
    pub inversion: InversionPlan,
    pub fga: FgaPlan,
    pub tent: TentPlan,
}

pub const DEFAULT_SEED: u64 = 7;

impl RunConfig {
    pub fn preset(command: Command, budget: Budget) -> Self {
        let desk = budget == Budget::Desk;
        let pick = |smoke: u64, d: u64| if desk { d } else { smoke };
        let laplace_points = [0.01, 0.0316, 0.1, 0.316, 1.0]
            .iter()
            .flat_map(|&u| [-1.0, -0.3, 0.0, 0.6].map(|b| [u, b]))
            .collect();
        RunConfig {
            command,
            budget,
            model: ModelConfig::default(),
            seed: DEFAULT_SEED,
            workers: 1,
            cap: DEFAULT_CAP,
            out_dir: PathBuf::from("krick-out"),
            tail: TailPlan {
                trials: pick(20_000, 1_000_000),
                anchors: log_grid(10.0, 1e4, 4),
                fit_lo: 1e2,
                fit_hi: 1e4,
                check_at: 1e3,
            },
            smooth_tail: SmoothPlan {
                trials: pick(20_000, 10_000_000),
                anchors: log_grid(1e2, 1e4, 4),
                fit_lo: 1e3,
                fit_hi: 1e4,
                compare: vec![1e2, 1e3, 1e4],
            },
            renewal: RenewalPlan {
                trials: pick(2_000, 100_000),
                normaliser_trials: pick(20_000, 1_000_000),
                a: SymbolSet::Magnitudes(vec![1]),
                b: SymbolSet::Magnitudes(vec![1]),
                window_starts: vec![10.0, 100.0, 1000.0],
                h: 1.0,
            },
            mixing: MixingPlan {
                trials: pick(20_000, 2_000_000),
                normaliser_trials: pick(20_000, 1_000_000),
                magnitudes: vec![1],
                lo: 0.0,
                hi: 1.0,
                t_grid: vec![1e2, 1e3],
            },
            store: StorePlan {
                trials: pick(20_000, 1_000_000),
                horizon: 4000.0,
            },
            spectral: SpectralPlan {
                us: vec![0.01, 0.1, 1.0],
                bs: (0..9).map(|k| -2.0 + 0.5 * k as f64).collect(),
                thetas: (0..16).map(|k| -std::f64::consts::PI + k as f64 * std::f64::consts::PI / 8.0).collect(),
                laplace_points,
                expansion: ExpansionConfig::default(),
                a_bs: log_grid(1e-4, 1e-2, 3),
                aperiodicity: AperiodicityConfig::default(),
            },
            inversion: InversionPlan {
                us: if desk { vec![0.1, 0.01] } else { vec![0.5] },
                a: if desk { vec![1.0, 4.0] } else { vec![1.0] },
                t: if desk { vec![0.0, 10.0] } else { vec![0.0, 3.0] },
                lambda: vec![0.0, 0.3],
                pair_a: vec![0.5, 1.0, 4.0],
            },
            fga: FgaPlan {
                a: 1.0,
                lambda: 0.2,
                t_grid: if desk { vec![10.0, 30.0, 100.0] } else { vec![10.0] },
                rule: MRule::Sqrt,
                max_panels: krick::renewal::DEFAULT_MAX_PANELS,
            },
            tent: TentPlan {
                s_grid: vec![[0.5, 0.0], [1.0, 0.0], [0.3, 1.0], [0.1, 0.0]],
                cauchy_t: vec![1e2, 3e2, 1e3, 2e3, 3e3],
                lipschitz_gamma: 0.9,
            },
        }
    }

    /// A config or a manifest (whose `config` member is taken).
    pub fn from_json(text: &str) -> Result<Self> {
        let v: serde_json::Value = serde_json::from_str(text).context("config is not valid JSON")?;
        let v = match v.get("config") {
            Some(inner) if v.get("krick_version").is_some() => inner.clone(),
            _ => v,
        };
        let cfg: RunConfig = serde_json::from_value(v).context("config does not match the RunConfig schema")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// Apply `--trials`: the primary count of the command, every count for `all`.
    pub fn set_trials(&mut self, n: u64) {
        let c = self.command;
        let all = c == Command::All;
        if all || c == Command::Tail {
            self.tail.trials = n;
        }
        if all || c == Command::SmoothTail {
            self.smooth_tail.trials = n;
        }
        if all || c == Command::Renewal {
            self.renewal.trials = n;
        }
        if all || c == Command::Mixing {
            self.mixing.trials = n;
        }
        if all || matches!(c, Command::SpectralSweep | Command::InversionCheck | Command::TentCheck) {
            self.store.trials = n;
        }
    }

    pub fn set_anchors(&mut self, anchors: Vec<f64>) {
        self.tail.anchors = anchors.clone();
        self.smooth_tail.anchors = anchors;
    }

    pub fn validate(&self) -> Result<()> {
        self.model.params().context("model")?;
        ensure!(self.workers >= 1, "workers must be positive");
        ensure!(self.cap >= 2, "cap must be at least 2");
        ensure!(self.tail.trials >= 10_000, "tail needs at least 1e4 trials");
        ensure!(self.smooth_tail.trials >= 10_000, "smooth-tail needs at least 1e4 trials");
        check_anchors(&self.tail.anchors).context("tail anchors")?;
        check_anchors(&self.smooth_tail.anchors).context("smooth-tail anchors")?;
        ensure!(self.tail.fit_lo < self.tail.fit_hi && self.smooth_tail.fit_lo < self.smooth_tail.fit_hi, "empty fit range");
        ensure!(self.renewal.trials >= 1 && self.mixing.trials >= 1 && self.store.trials >= 1, "trial counts must be positive");
        ensure!(self.renewal.h > 0.0 && self.renewal.window_starts.iter().all(|&t| t > 0.0 && t.is_finite()), "renewal windows must start at t > 0");
        ensure!(!self.mixing.magnitudes.is_empty(), "mixing set is empty");
        ensure!(self.store.horizon > 0.0 && self.store.horizon.is_finite(), "store horizon must be positive");
        for &[u, b] in &self.spectral.laplace_points {
            ensure!(u > 0.0 && b.is_finite(), "Laplace points need u > 0");
        }
        ensure!(self.spectral.us.iter().all(|&u| u >= 0.0), "sweep damping must be non-negative");
        ensure!(self.spectral.a_bs.iter().all(|&b| b > 0.0), "A scaling grid must be positive");
        ensure!(self.inversion.us.iter().all(|&u| u > 0.0), "inversion needs u > 0");
        ensure!(self.inversion.a.iter().chain(&self.inversion.pair_a).all(|&a| a > 0.0), "kernel bandwidths must be positive");
        ensure!(self.fga.a > 0.0 && self.fga.t_grid.iter().all(|&t| t >= 10.0), "fga needs a > 0 and t >= 10");
        for &[re, _] in &self.tent.s_grid {
            ensure!(re > 0.0, "tent check needs Re s > 0");
        }
        if let Some(&t) = self.tent.cauchy_t.iter().find(|&&t| t > self.store.horizon) {
            bail!("Cauchy check time {t} lies beyond the store horizon {}", self.store.horizon);
        }
        Ok(())
    }
}
