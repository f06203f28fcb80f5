use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use krick::model::{ModelConfig, XiTag};
use krick_cli::numbers::{parse_anchors, parse_count, parse_real};
use krick_cli::{run, Budget, Command, RunConfig};

/// Excursion Monte Carlo and spectral checks for heavy-tailed Z-extensions.
///
/// Exit status: 0 when every gating verdict passes, 1 when one fails,
/// 2 on invalid configuration or a runtime error.
#[derive(Parser)]
#[command(name = "krick", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Derived constants and tail samples of the symbol law.
    ModelReport(Common),
    /// Survival of τ and the rescaled tail statistic.
    Tail(Common),
    /// Unit-window masses and the empirical d_p.
    SmoothTail(Common),
    /// Renewal increments U_{A,B}.
    Renewal(Common),
    /// Flow correlation times m(t).
    Mixing(Common),
    /// λ and S on a (u, b, θ) grid, plus the Laplace identity.
    SpectralSweep(Common),
    /// The constant chain, the eigenvalue expansion and the A(s) scaling.
    Constants(Common),
    /// Scan of |λ| off the origin, with the integer-roof control.
    Aperiodicity(Common),
    /// Both sides of the inversion formula.
    InversionCheck(Common),
    /// The large-t limit with its I1/I2 split.
    FgaLimit(Common),
    /// Tent-kernel Laplace identity, Cauchy and Lipschitz checks.
    TentCheck(Common),
    /// Everything above in one run.
    All(Common),
    /// Re-run a manifest.json or config file as recorded.
    Rerun {
        path: PathBuf,
        /// Write to this directory instead of the recorded one.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// One parsed grid; the alias keeps clap from treating it as a repeated flag.
type Grid = Vec<f64>;

#[derive(Args, Clone, Default)]
struct Common {
    /// Start from this RunConfig (or manifest) instead of a preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Preset sizes.
    #[arg(long, value_enum)]
    budget: Option<Budget>,
    /// Model JSON {p, xi_tag, ell_kind, kappa}.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Tail exponent p in (1, 2].
    #[arg(long, value_parser = parse_real)]
    p: Option<f64>,
    /// Roof offset tag.
    #[arg(long)]
    xi: Option<String>,
    /// Log-power exponent of the slowly varying factor.
    #[arg(long, value_parser = parse_real)]
    kappa: Option<f64>,
    /// Monte Carlo trials, e.g. 1e6.
    #[arg(long, value_parser = parse_count)]
    trials: Option<u64>,
    #[arg(long, env = "KRICK_SEED", value_parser = parse_count)]
    seed: Option<u64>,
    #[arg(long, value_parser = parse_count)]
    workers: Option<u64>,
    /// Excursion step cap.
    #[arg(long, value_parser = parse_count)]
    cap: Option<u64>,
    /// Anchor times: `1e2,1e3,1e4` or `lo:hi:per_decade`.
    #[arg(long, value_parser = parse_anchors)]
    anchors: Option<Grid>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn build(command: Command, c: &Common) -> Result<RunConfig> {
    let mut cfg = match (&c.config, c.budget) {
        (Some(_), Some(_)) => bail!("--config and --budget are mutually exclusive"),
        (Some(path), None) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let mut cfg = RunConfig::from_json(&text)?;
            cfg.command = command;
            cfg
        }
        (None, b) => RunConfig::preset(command, b.unwrap_or_default()),
    };
    if let Some(path) = &c.model {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        cfg.model = ModelConfig::from_json(&text)?;
    }
    if let Some(p) = c.p {
        cfg.model.p = p;
    }
    if let Some(xi) = &c.xi {
        cfg.model.xi_tag = XiTag::parse(xi)?.as_str().to_string();
    }
    if let Some(k) = c.kappa {
        cfg.model.ell_kind = "log-power".into();
        cfg.model.kappa = Some(k);
    }
    if let Some(n) = c.trials {
        cfg.set_trials(n);
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(w) = c.workers {
        cfg.workers = usize::try_from(w).context("workers")?;
    }
    if let Some(cap) = c.cap {
        cfg.cap = cap;
    }
    if let Some(a) = &c.anchors {
        cfg.set_anchors(a.clone());
    }
    if let Some(out) = &c.out {
        cfg.out_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn config_of(sub: Sub) -> Result<RunConfig> {
    let (command, common) = match sub {
        Sub::Rerun { path, out } => {
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let mut cfg = RunConfig::from_json(&text)?;
            if let Ok(seed) = std::env::var("KRICK_SEED") {
                cfg.seed = parse_count(&seed).context("KRICK_SEED")?;
            }
            if let Some(out) = out {
                cfg.out_dir = out;
            }
            return Ok(cfg);
        }
        Sub::ModelReport(c) => (Command::ModelReport, c),
        Sub::Tail(c) => (Command::Tail, c),
        Sub::SmoothTail(c) => (Command::SmoothTail, c),
        Sub::Renewal(c) => (Command::Renewal, c),
        Sub::Mixing(c) => (Command::Mixing, c),
        Sub::SpectralSweep(c) => (Command::SpectralSweep, c),
        Sub::Constants(c) => (Command::Constants, c),
        Sub::Aperiodicity(c) => (Command::Aperiodicity, c),
        Sub::InversionCheck(c) => (Command::InversionCheck, c),
        Sub::FgaLimit(c) => (Command::FgaLimit, c),
        Sub::TentCheck(c) => (Command::TentCheck, c),
        Sub::All(c) => (Command::All, c),
    };
    build(command, &common)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match config_of(cli.command) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("krick: invalid configuration: {e:#}");
            return ExitCode::from(2);
        }
    };
    match run(&cfg) {
        Ok(report) => {
            for v in &report.verdicts {
                println!("{}", v.line());
            }
            println!("artifacts in {}", cfg.out_dir.display());
            if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("krick: {e:#}");
            ExitCode::from(2)
        }
    }
}
