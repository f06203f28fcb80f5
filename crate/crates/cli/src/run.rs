//! One function per subcommand; `all` runs them in sequence over shared
//! state (the excursion store, the aggregator, the constants).

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::Instant;

use anyhow::{Context, Result};
use num_complex::Complex64;
use serde_json::json;

use krick::model::{build_model, Model, ModelConfig, XiTag};
use krick::renewal::{
    fga_limit, inversion_batch, lipschitz_check, tent_laplace_check, InversionCase, KernelPair, WeightedTauMeasure,
};
use krick::simulate::{
    estimate_flow_correlation, estimate_renewal, estimate_smooth_tail, estimate_tau_tail, fit_rows, prob_two_step,
    AnchorRow, ExcursionStore, FlowConfig, FlowSet, RenewalConfig, Schedule, SymbolSet, TailConfig,
};
use krick::spectral::{
    aperiodicity_scan, compute_constants, spectral_sweep, verify_eigenvalue_expansion, AMethod, Aggregator,
    ConstantsReport, Eigen, DEFAULT_S_TOL,
};
use krick::stats::linear_fit;

use crate::config::{Command, RunConfig};
use crate::output::{num, opt, write_json, Artifacts, Manifest, Table, Verdict};

/// What `run` hands back besides the files.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub passed: bool,
    pub verdicts: Vec<Verdict>,
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    model: Model,
    sched: Schedule,
    art: Artifacts,
    agg: Option<Aggregator>,
    constants: Option<ConstantsReport>,
    store: Option<ExcursionStore>,
    capped: BTreeMap<String, f64>,
}

impl Ctx<'_> {
    fn agg(&mut self) -> &Aggregator {
        if self.agg.is_none() {
            self.agg = Some(Aggregator::new(&self.model));
        }
        self.agg.as_ref().unwrap()
    }

    fn constants(&mut self) -> Result<ConstantsReport> {
        if self.constants.is_none() {
            self.constants = Some(compute_constants(&self.model)?);
        }
        Ok(self.constants.clone().unwrap())
    }

    fn ensure_store(&mut self) -> Result<()> {
        if self.store.is_none() {
            let p = &self.cfg.store;
            let st = ExcursionStore::collect(&self.model, p.trials, p.horizon, self.cfg.cap, &self.sched)?;
            let n = st.trials() as f64;
            self.capped.insert("store".into(), st.capped as f64 / n);
            self.store = Some(st);
        }
        Ok(())
    }

    fn p(&self) -> f64 {
        self.model.p()
    }
}

fn rel(x: f64, target: f64) -> f64 {
    (x / target - 1.0).abs()
}

fn nearest<T, F: Fn(&T) -> f64>(rows: &[T], t: f64, key: F) -> Option<&T> {
    rows.iter().min_by(|a, b| (key(a) / t).ln().abs().total_cmp(&(key(b) / t).ln().abs()))
}

/// Widen a fit range by a hair so grid endpoints computed through powers are kept.
fn widen(lo: f64, hi: f64) -> (f64, f64) {
    (lo * (1.0 - 1e-9), hi * (1.0 + 1e-9))
}

pub fn run(cfg: &RunConfig) -> Result<RunReport> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build()?;
    pool.install(|| run_inner(cfg))
}

fn run_inner(cfg: &RunConfig) -> Result<RunReport> {
    let start = Instant::now();
    let model = build_model(cfg.model.params()?)?;
    let mut ctx = Ctx {
        cfg,
        model,
        sched: Schedule::new(cfg.seed, cfg.workers),
        art: Artifacts::create(&cfg.out_dir, cfg.command.as_str())?,
        agg: None,
        constants: None,
        store: None,
        capped: BTreeMap::new(),
    };
    ctx.art.summary(false)?;
    let stages: Vec<Command> = match cfg.command {
        Command::All => vec![
            Command::ModelReport,
            Command::Constants,
            Command::Tail,
            Command::SmoothTail,
            Command::Renewal,
            Command::Mixing,
            Command::SpectralSweep,
            Command::Aperiodicity,
            Command::InversionCheck,
            Command::FgaLimit,
            Command::TentCheck,
        ],
        c => vec![c],
    };
    let mut times = BTreeMap::new();
    for stage in stages {
        let t0 = Instant::now();
        match stage {
            Command::ModelReport => model_report(&mut ctx),
            Command::Tail => tail(&mut ctx),
            Command::SmoothTail => smooth_tail(&mut ctx),
            Command::Renewal => renewal(&mut ctx),
            Command::Mixing => mixing(&mut ctx),
            Command::SpectralSweep => spectral(&mut ctx),
            Command::Constants => constants(&mut ctx),
            Command::Aperiodicity => aperiodicity(&mut ctx),
            Command::InversionCheck => inversion(&mut ctx),
            Command::FgaLimit => fga(&mut ctx),
            Command::TentCheck => tent(&mut ctx),
            Command::All => unreachable!("all is expanded above"),
        }
        .with_context(|| format!("stage {}", stage.as_str()))?;
        times.insert(stage.as_str().to_string(), t0.elapsed().as_secs_f64());
        ctx.art.summary(false)?;
    }
    ctx.art.summary(true)?;
    let mut outputs = ctx.art.outputs.clone();
    outputs.push("manifest.json".into());
    let manifest = Manifest {
        krick_version: env!("CARGO_PKG_VERSION").to_string(),
        rustc: option_env!("RUSTC_VERSION").map(str::to_string),
        config: cfg.clone(),
        wall_time_s: start.elapsed().as_secs_f64(),
        stage_times_s: times,
        capped_fraction: ctx.capped.clone(),
        outputs,
    };
    write_json(&cfg.out_dir.join("manifest.json"), &manifest)?;
    Ok(RunReport {
        passed: ctx.art.passed(),
        verdicts: ctx.art.verdicts.clone(),
    })
}

fn model_report(ctx: &mut Ctx) -> Result<()> {
    let law = &ctx.model.law;
    let dc = &ctx.model.constants;
    let samples: Vec<_> = [1u64, 2, 3, 10, 100, 1000, 10_000, 100_000, 1_000_000]
        .iter()
        .map(|&n| json!({"n": n, "tail": law.tail_fn(n as f64), "prob": law.prob(n)}))
        .collect();
    let ell_star: Vec<_> = [1e2, 1e3, 1e4]
        .iter()
        .map(|&t| Ok(json!({"t": t, "ell_star": dc.ell_star(t)?})))
        .collect::<Result<_>>()?;
    let report = json!({
        "model": ModelConfig::from(*ctx.model.params()),
        "xi": dc.xi,
        "r_star": dc.r_star,
        "r_star_error": dc.r_star_error,
        "c_ell": dc.c_ell,
        "beta": dc.beta,
        "gamma": dc.gamma,
        "kappa": dc.kappa,
        "prob_two_step": prob_two_step(law),
        "tail_samples": samples,
        "ell_star": ell_star,
    });
    ctx.art.json("model_report", &report)
}

const TAIL_HEADER: [&str; 9] = [
    "t",
    "estimate",
    "ci_low",
    "ci_high",
    "rescaled",
    "target",
    "rescaled_ci_low",
    "rescaled_ci_high",
    "unresolved",
];

fn tail(ctx: &mut Ctx) -> Result<()> {
    let plan = &ctx.cfg.tail;
    let tc = TailConfig::new(plan.trials, plan.anchors.clone(), plan.anchors.clone(), ctx.cfg.cap);
    let rep = estimate_tau_tail(&ctx.model, &tc, &ctx.sched)?;
    let mut t = Table::new("tail", &TAIL_HEADER);
    for r in &rep.survival {
        t.push(vec![
            num(r.t),
            num(r.estimate.value),
            num(r.estimate.ci_low),
            num(r.estimate.ci_high),
            num(r.rescaled.value),
            num(r.target),
            num(r.rescaled.ci_low),
            num(r.rescaled.ci_high),
            r.unresolved.to_string(),
        ]);
    }
    ctx.art.table(&t)?;
    let h = &rep.histogram;
    ctx.capped.insert("tail".into(), h.capped_fraction());
    let p = ctx.p();
    let (lo, hi) = widen(plan.fit_lo, plan.fit_hi);
    let fit = fit_rows(&rep.survival, lo, hi, true).context("tail fit has too few resolved anchors")?;
    let want = -(1.0 - 1.0 / p);
    ctx.art.verdict(Verdict::criterion(
        1,
        "tail-exponent",
        (fit.slope - want).abs() <= 0.05,
        fit.slope,
        format!("{} ± 0.05", num(want)),
        format!("log-log fit over [{}, {}], {} trials", plan.fit_lo, plan.fit_hi, plan.trials),
    ));
    let dev = |t: f64| nearest(&rep.survival, t, |r: &AnchorRow| r.t).map(|r| (r.t, rel(r.rescaled.value, rep.target)));
    let (tc_, dc_) = dev(plan.check_at).context("no tail anchors")?;
    let (t_lo, d_lo) = dev(plan.fit_lo).unwrap();
    let (t_hi, d_hi) = dev(plan.fit_hi).unwrap();
    ctx.art.verdict(Verdict::criterion(
        2,
        "tail-constant",
        dc_ <= 0.15 && d_hi < d_lo,
        dc_,
        "relative deviation <= 0.15, shrinking across anchors",
        format!(
            "target {}; deviation {} at t={}, {} at t={}, {} at t={}",
            num(rep.target),
            num(d_lo),
            t_lo,
            num(dc_),
            tc_,
            num(d_hi),
            t_hi
        ),
    ));
    ctx.art.verdict(Verdict::check(
        "tail-histogram-invariants",
        h.sandwich_holds() && h.survival_is_monotone(),
        true,
        h.completed as f64,
        "sandwich and monotone survival",
        format!("{} completed, {} censored, {} capped", h.completed, h.censored, h.capped),
    ));
    capped_warning(ctx, "tail", h.capped_fraction());
    ctx.art.json(
        "tail_report",
        &json!({"target": rep.target, "fit": fit, "trials": h.trials, "censored": h.censored, "capped": h.capped}),
    )
}

fn capped_warning(ctx: &mut Ctx, stage: &str, frac: f64) {
    ctx.art.verdict(Verdict::check(
        &format!("{stage}-capped-fraction"),
        frac < 1e-3,
        false,
        frac,
        "< 1e-3",
        "excursions stopped at the step cap",
    ));
}

fn smooth_tail(ctx: &mut Ctx) -> Result<()> {
    let consts = ctx.constants()?;
    let plan = &ctx.cfg.smooth_tail;
    let tc = TailConfig::new(plan.trials, plan.anchors.clone(), plan.anchors.clone(), ctx.cfg.cap);
    let rep = estimate_smooth_tail(&ctx.model, &tc, &ctx.sched)?;
    let p = ctx.p();
    let last = rep.rows.last().context("no smooth-tail anchors")?;
    let inside: Vec<_> = consts.d_p_candidates.iter().filter(|c| last.rescaled.contains(c.value)).collect();
    let chosen = match inside.as_slice() {
        [one] => (*one).clone(),
        _ => consts.closest_candidate(last.rescaled.value).clone(),
    };
    let mut t = Table::new(
        "smooth_tail",
        &[
            "t",
            "estimate",
            "ci_low",
            "ci_high",
            "rescaled",
            "target",
            "rescaled_ci_low",
            "rescaled_ci_high",
            "nu0",
            "tent",
            "unresolved",
        ],
    );
    for r in &rep.rows {
        t.push(vec![
            num(r.t),
            num(r.unit_mass.value),
            num(r.unit_mass.ci_low),
            num(r.unit_mass.ci_high),
            num(r.rescaled.value),
            num(chosen.value),
            num(r.rescaled.ci_low),
            num(r.rescaled.ci_high),
            num(r.nu0),
            num(r.tent),
            r.unresolved.to_string(),
        ]);
    }
    ctx.art.table(&t)?;
    ctx.capped.insert("smooth-tail".into(), rep.histogram.capped_fraction());
    let (lo, hi) = widen(plan.fit_lo, plan.fit_hi);
    let fit = rep.fit(lo, hi).context("smooth-tail fit has too few resolved anchors")?;
    let want = -(2.0 - 1.0 / p);
    let cmp: Vec<_> = plan.compare.iter().filter_map(|&t| nearest(&rep.rows, t, |r| r.t)).collect();
    let overlap = cmp.windows(2).all(|w| w[0].rescaled.ci_low <= w[1].rescaled.ci_high && w[1].rescaled.ci_low <= w[0].rescaled.ci_high);
    let enough = plan.trials >= 10_000_000;
    let shown: Vec<String> = cmp
        .iter()
        .map(|r| format!("t={} d_p={} [{}, {}]", r.t, num(r.rescaled.value), num(r.rescaled.ci_low), num(r.rescaled.ci_high)))
        .collect();
    ctx.art.verdict(Verdict::criterion(
        3,
        "smooth-tail-exponent",
        (fit.slope - want).abs() <= 0.08 && overlap && enough,
        fit.slope,
        format!("{} ± 0.08, ≥ 1e7 trials, overlapping d_p intervals", num(want)),
        format!(
            "fit over [{}, {}], {} trials; intervals overlap: {overlap}; {}",
            plan.fit_lo,
            plan.fit_hi,
            plan.trials,
            shown.join("; ")
        ),
    ));
    let names: Vec<String> = inside.iter().map(|c| format!("{} = {}", c.tag, num(c.value))).collect();
    let scalar = consts.scalar_limits.map(|s| s.d_p);
    ctx.art.verdict(Verdict::criterion(
        4,
        "constant-adjudication",
        inside.len() == 1,
        inside.len() as f64,
        "exactly one candidate inside the interval",
        format!(
            "empirical d_p {} [{}, {}] at t={}; inside: [{}]; closest: {} = {}; scalar-model d_p {}",
            num(last.rescaled.value),
            num(last.rescaled.ci_low),
            num(last.rescaled.ci_high),
            last.t,
            names.join(", "),
            chosen.tag,
            num(chosen.value),
            opt(scalar)
        ),
    ));
    let bracket = rep.rows.iter().all(|r| r.unit_mass.count == 0 || (r.t * r.unit_mass.value <= r.nu0 * (1.0 + 1e-12) && r.nu0 <= (r.t + 1.0) * r.unit_mass.value * (1.0 + 1e-12)));
    ctx.art.verdict(Verdict::check(
        "smooth-tail-sandwich",
        bracket && rep.histogram.sandwich_holds(),
        true,
        rep.rows.len() as f64,
        "t μ̂ ≤ ν̂_0 ≤ (t+1) μ̂ on every anchor",
        "",
    ));
    capped_warning(ctx, "smooth-tail", rep.histogram.capped_fraction());
    ctx.art.json(
        "smooth_tail_report",
        &json!({
            "fit": fit,
            "adjudicated": chosen,
            "inside": inside,
            "candidates": consts.d_p_candidates,
            "scalar_model_d_p": scalar,
            "trials": rep.histogram.trials,
        }),
    )
}

fn renewal(ctx: &mut Ctx) -> Result<()> {
    let plan = &ctx.cfg.renewal;
    let rc = RenewalConfig {
        trials: plan.trials,
        a: plan.a.clone(),
        b: plan.b.clone(),
        windows: plan.window_starts.iter().map(|&t| (t, t + plan.h)).collect(),
        cap: ctx.cfg.cap,
        normaliser_trials: plan.normaliser_trials,
    };
    let acc = estimate_renewal(&ctx.model, &rc, &ctx.sched)?;
    let mut t = Table::new("renewal", &["t", "estimate", "ci_low", "ci_high", "rescaled", "target", "hi", "v"]);
    for r in &acc.rows {
        t.push(vec![
            num(r.lo),
            num(r.u.value),
            num(r.u.ci_low),
            num(r.u.ci_high),
            num(r.rescaled),
            num(r.target),
            num(r.hi),
            num(r.v),
        ]);
    }
    ctx.art.table(&t)?;
    let voided = acc.voided as f64 / acc.trials as f64;
    ctx.capped.insert("renewal".into(), voided);
    capped_warning(ctx, "renewal", voided);
    ctx.art.json(
        "renewal_report",
        &json!({"mu_a": acc.mu_a, "mu_b": acc.mu_b, "mu_ab": acc.mu_ab, "trials": acc.trials, "voided": acc.voided}),
    )
}

fn mixing(ctx: &mut Ctx) -> Result<()> {
    let plan = &ctx.cfg.mixing;
    let set = FlowSet {
        set: SymbolSet::Magnitudes(plan.magnitudes.clone()),
        lo: plan.lo,
        hi: plan.hi,
    };
    let fc = FlowConfig {
        trials: plan.trials,
        a1: set.clone(),
        b1: set,
        t_grid: plan.t_grid.clone(),
        cap: ctx.cfg.cap,
        normaliser_trials: plan.normaliser_trials,
    };
    let rep = estimate_flow_correlation(&ctx.model, &fc, &ctx.sched)?;
    let mut t = Table::new(
        "mixing",
        &[
            "t",
            "estimate",
            "ci_low",
            "ci_high",
            "rescaled",
            "target",
            "rescaled_ci_low",
            "rescaled_ci_high",
            "m_hat",
            "tail_normalised",
        ],
    );
    for r in &rep.rows {
        t.push(vec![
            num(r.t),
            num(r.correlation.value),
            num(r.correlation.ci_low),
            num(r.correlation.ci_high),
            num(r.value.value),
            num(r.target),
            num(r.value.ci_low),
            num(r.value.ci_high),
            num(r.m_hat),
            num(r.value_tail_norm),
        ]);
    }
    ctx.art.table(&t)?;
    let voided = rep.voided as f64 / rep.trials as f64;
    ctx.capped.insert("mixing".into(), voided);
    let (first, last) = (rep.rows.first().context("empty t grid")?, rep.rows.last().unwrap());
    let d_first = rel(first.value.value, first.target);
    let d_last = rel(last.value.value, last.target);
    ctx.art.verdict(Verdict::criterion(
        9,
        "mixing",
        d_last <= 0.2 && d_last < d_first,
        d_last,
        "relative deviation <= 0.2 at the last time, smaller than at the first",
        format!(
            "target d_β μ(A₁)μ(B₁) = {}; m̂·corr {} at t={} (dev {}), {} at t={} (dev {})",
            num(last.target),
            num(first.value.value),
            first.t,
            num(d_first),
            num(last.value.value),
            last.t,
            num(d_last)
        ),
    ));
    capped_warning(ctx, "mixing", voided);
    ctx.art.json(
        "mixing_report",
        &json!({"mu_a1": rep.mu_a1, "mu_b1": rep.mu_b1, "d_beta": rep.d_beta, "trials": rep.trials, "voided": rep.voided}),
    )
}

fn spectral(ctx: &mut Ctx) -> Result<()> {
    let plan = ctx.cfg.spectral.clone();
    let rows = spectral_sweep(ctx.agg(), &plan.us, &plan.bs, &plan.thetas);
    let mut t = Table::new("spectral_sweep", &["u", "b", "theta", "re_lambda", "im_lambda", "abs_s", "arg_s"]);
    for r in &rows {
        t.push(vec![
            num(r.u),
            num(r.b),
            num(r.theta),
            num(r.lambda.re),
            num(r.lambda.im),
            opt(r.s_value.map(|s| s.norm())),
            opt(r.s_value.map(|s| s.arg())),
        ]);
    }
    ctx.art.table(&t)?;
    let bound_ok = rows.iter().all(|r| {
        let top = ctx.agg.as_ref().unwrap().eigen().lambda(Complex64::new(r.u, 0.0), 0.0).re;
        r.lambda.norm() <= top + 1e-12 && top <= 1.0 + 1e-15
    });
    ctx.art.verdict(Verdict::check(
        "eigenvalue-bound",
        bound_ok,
        true,
        rows.len() as f64,
        "|λ(u-ib, θ)| ≤ λ(u, 0) ≤ 1",
        "",
    ));
    ctx.ensure_store()?;
    let store = ctx.store.as_ref().unwrap();
    let agg = ctx.agg.as_ref().unwrap();
    let mut t = Table::new(
        "laplace_identity",
        &["u", "b", "mc_re", "mc_im", "spectral_re", "spectral_im", "diff", "budget", "passes"],
    );
    let mut all_ok = plan.laplace_points.len() >= 20;
    let mut worst: f64 = 0.0;
    for &[u, b] in &plan.laplace_points {
        let s = Complex64::new(u, -b);
        let mc = store.laplace(s);
        let sv = agg.s_scalar(s, DEFAULT_S_TOL)?;
        let spectral = 1.0 - 2.0 * PI / sv.value;
        let quad = 2.0 * PI / sv.value.norm() * sv.error_estimate;
        let budget = mc.tolerance(4.0) + quad;
        let diff = (mc.value - spectral).norm();
        let ok = diff <= budget;
        all_ok &= ok;
        worst = worst.max(diff / budget);
        t.push(vec![
            num(u),
            num(b),
            num(mc.value.re),
            num(mc.value.im),
            num(spectral.re),
            num(spectral.im),
            num(diff),
            num(budget),
            ok.to_string(),
        ]);
    }
    ctx.art.table(&t)?;
    ctx.art.verdict(Verdict::criterion(
        6,
        "laplace-identity",
        all_ok,
        worst,
        "every |MC - (1 - 2π/S)| within its budget, ≥ 20 points",
        format!("{} points; largest diff/budget {}", plan.laplace_points.len(), num(worst)),
    ));
    Ok(())
}

fn constants(ctx: &mut Ctx) -> Result<()> {
    let consts = ctx.constants()?;
    ctx.art.json("constants", &consts)?;
    let plan = ctx.cfg.spectral.clone();
    let exp = verify_eigenvalue_expansion(&ctx.model, &plan.expansion)?;
    let mut t = Table::new("expansion", &["theta", "value", "target"]);
    for (&th, &v) in exp.thetas.iter().zip(&exp.values) {
        t.push(vec![num(th), num(v), num(exp.target_coefficient * th.powf(exp.target_exponent))]);
    }
    ctx.art.table(&t)?;
    ctx.art.json("expansion", &exp)?;
    let f = exp.primary();
    ctx.art.verdict(Verdict::criterion(
        5,
        "eigenvalue-expansion",
        exp.exponent_error() <= 0.02 && exp.coefficient_rel_error() <= 0.02,
        f.exponent,
        format!("exponent {} ± 0.02, coefficient {} ± 2%", num(exp.target_exponent), num(exp.target_coefficient)),
        format!(
            "coefficient {} (rel err {}); naive slope {}; dλ/db(0,0) = {} + {}i",
            num(f.coefficient),
            num(exp.coefficient_rel_error()),
            num(exp.naive.exponent),
            num(exp.db_origin.re),
            num(exp.db_origin.im)
        ),
    ));
    // |A(-ib)| b^{1/p} ℓ*(1/b) along u = 0
    let p = ctx.p();
    let dc = ctx.model.constants;
    let agg = ctx.agg();
    let mut vals = Vec::new();
    for &b in &plan.a_bs {
        let a = agg.a_spectral(Complex64::new(0.0, -b), AMethod::SpectralExact, DEFAULT_S_TOL)?;
        let scaled = a.value.norm() * b.powf(1.0 / p) * dc.ell_star(1.0 / b)?;
        vals.push((b, a.value, scaled));
    }
    let mean = vals.iter().map(|v| v.2).sum::<f64>() / vals.len() as f64;
    let (mn, mx) = vals.iter().fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(v.2), b.max(v.2)));
    let flat = mx / mn - 1.0;
    let best = consts
        .big_cp
        .iter()
        .min_by(|x, y| rel(mean, x.value.norm()).total_cmp(&rel(mean, y.value.norm())))
        .context("no C_p readings")?;
    let best_err = rel(mean, best.value.norm());
    let scalar = consts.scalar_limits.map(|s| s.a_limit * s.ell_star);
    let mut t = Table::new("a_scaling", &["b", "re_a", "im_a", "abs_a", "rescaled", "target", "scalar_limit"]);
    for &(b, a, sc) in &vals {
        t.push(vec![num(b), num(a.re), num(a.im), num(a.norm()), num(sc), num(best.value.norm()), opt(scalar)]);
    }
    ctx.art.table(&t)?;
    let readings: Vec<String> = consts.big_cp.iter().map(|c| format!("|C_p| [{}] = {}", c.tag, num(c.value.norm()))).collect();
    ctx.art.verdict(Verdict::criterion(
        7,
        "a-asymptotics",
        flat <= 0.05 && best_err <= 0.10,
        flat,
        "flat within 5% and within 10% of |C_p|",
        format!(
            "rescaled mean {} over b in [{}, {}], range [{}, {}]; {}; nearest off by {}; scalar-model limit {}",
            num(mean),
            num(plan.a_bs[0]),
            num(*plan.a_bs.last().unwrap()),
            num(mn),
            num(mx),
            readings.join(", "),
            num(best_err),
            opt(scalar)
        ),
    ));
    let lx: Vec<f64> = vals.iter().map(|v| v.0.ln()).collect();
    let ly: Vec<f64> = vals.iter().map(|v| (v.1.norm() * v.0.powf(1.0 / p)).ln()).collect();
    if let Some(fit) = linear_fit(&lx, &ly) {
        ctx.art.verdict(Verdict::check(
            "a-log-slope",
            fit.slope.abs() < 0.02,
            false,
            fit.slope,
            "|slope| < 0.02",
            "slope of log|A(-ib)| + log(b)/p against log b",
        ));
    }
    Ok(())
}

fn aperiodicity(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg.spectral.aperiodicity;
    let own = aperiodicity_scan(&Eigen::new(&ctx.model), &cfg)?;
    let control_model = build_model(ctx.model.params().with_xi(XiTag::IntegerRoof))?;
    let control = aperiodicity_scan(&Eigen::new(&control_model), &cfg)?;
    ctx.art.json("aperiodicity", &json!({"model": own, "integer_roof_control": control}))?;
    ctx.art.verdict(Verdict::check(
        "aperiodicity-scan",
        own.passes(),
        false,
        own.max_abs,
        format!("< {}", cfg.threshold),
        format!(
            "max at b={}, θ={}; rim max {}; threshold first met at radius {}",
            num(own.b),
            num(own.theta),
            num(own.rim_max),
            opt(own.radius_for_threshold)
        ),
    ));
    let lim = 1.0 - 1e-6;
    ctx.art.verdict(Verdict::criterion(
        10,
        "integer-roof-control",
        control.max_abs > lim && !control.passes(),
        control.max_abs,
        format!("> {}", num(lim)),
        format!("integer roof reaches |λ| = {} at b={}, θ={}", num(control.max_abs), num(control.b), num(control.theta)),
    ));
    Ok(())
}

fn inversion(ctx: &mut Ctx) -> Result<()> {
    let consts = ctx.constants()?;
    let plan = ctx.cfg.inversion.clone();
    ctx.ensure_store()?;
    ctx.agg();
    let store = ctx.store.as_ref().unwrap();
    let agg = ctx.agg.as_ref().unwrap();
    let mut cases = Vec::new();
    for &a in &plan.a {
        for &t in &plan.t {
            for &lambda in &plan.lambda {
                cases.push(InversionCase { a, t, lambda });
            }
        }
    }
    let mut t = Table::new(
        "inversion",
        &[
            "t", "value", "target", "I1", "I2", "residual", "tolerance", "u", "a", "lambda", "value_im", "target_im", "passes",
        ],
    );
    let mut all_ok = true;
    let mut worst: f64 = 0.0;
    for &u in &plan.us {
        for r in inversion_batch(store, agg, u, &cases)? {
            all_ok &= r.passes;
            worst = worst.max(r.diff / r.tolerance());
            t.push(vec![
                num(r.t),
                num(r.lhs.re),
                num(r.rhs.re),
                String::new(),
                String::new(),
                num(r.diff),
                num(r.tolerance()),
                num(r.u),
                num(r.a),
                num(r.lambda),
                num(r.lhs.im),
                num(r.rhs.im),
                r.passes.to_string(),
            ]);
        }
    }
    ctx.art.table(&t)?;
    let mut pt = Table::new("kernel_pair", &["a", "lambda", "value", "target", "residual"]);
    let mut pair_max: f64 = 0.0;
    for &a in &plan.pair_a {
        let k = KernelPair::new(a)?;
        for lambda in [0.0, 0.2, 0.9 * a, a, 1.7 * a] {
            let v = k.fourier_of_ghat(lambda);
            let want = 2.0 * PI * k.g(lambda);
            pair_max = pair_max.max((v - want).abs());
            pt.push(vec![num(a), num(lambda), num(v), num(want), num((v - want).abs())]);
        }
    }
    ctx.art.table(&pt)?;
    let kp_err = rel(consts.k_p.re, consts.k_p_closed);
    ctx.art.verdict(Verdict::criterion(
        8,
        "inversion",
        all_ok && pair_max <= 1e-8 && kp_err <= 1e-8,
        worst,
        "every diff within tolerance; K_p and Fourier pair to 1e-8",
        format!(
            "{} cases at u in {:?}; largest diff/tolerance {}; K_p rel err {}; pair max residual {}",
            cases.len() * plan.us.len(),
            plan.us,
            num(worst),
            num(kp_err),
            num(pair_max)
        ),
    ));
    Ok(())
}

fn fga(ctx: &mut Ctx) -> Result<()> {
    let consts = ctx.constants()?;
    let plan = ctx.cfg.fga.clone();
    let k = KernelPair::new(plan.a)?;
    ctx.agg();
    let rep = fga_limit(&ctx.model, ctx.agg.as_ref().unwrap(), k, plan.lambda, &plan.t_grid, plan.rule, plan.max_panels)?;
    let d = consts.scalar_limits.map(|s| s.d_p);
    let target = d.map(|d| PI * d * rep.g_at_lambda).unwrap_or(f64::NAN);
    let mut t = Table::new(
        "fga",
        &["t", "value", "target", "I1", "I2", "residual", "value_im", "m_t", "scaled_i2", "panels"],
    );
    for r in &rep.rows {
        t.push(vec![
            num(r.t),
            num(r.value.re),
            num(target),
            num(r.m_t * r.i1.re),
            num(r.m_t * r.i2.re),
            num((r.value.re - target).abs()),
            num(r.value.im),
            num(r.m_t),
            num(r.scaled_i2),
            r.panels.to_string(),
        ]);
    }
    ctx.art.table(&t)?;
    let decays = rep.rows.windows(2).all(|w| w[1].scaled_i2 <= w[0].scaled_i2);
    ctx.art.verdict(Verdict::check(
        "fga-i2-decay",
        decays,
        false,
        rep.rows.last().map(|r| r.scaled_i2).unwrap_or(f64::NAN),
        "m(t)|I2| non-increasing in t",
        "",
    ));
    let ell = ctx.model.constants.ell_star(1e4)?;
    ctx.art.json(
        "fga_report",
        &json!({
            "report": rep,
            "target_pi_d_g": target,
            "target_two_pi_d_g_over_ell_sq": d.map(|d| 2.0 * PI * d * rep.g_at_lambda / (ell * ell)),
            "d_p": d,
        }),
    )
}

fn tent(ctx: &mut Ctx) -> Result<()> {
    let plan = ctx.cfg.tent.clone();
    ctx.ensure_store()?;
    let store = ctx.store.as_ref().unwrap();
    let s_grid: Vec<Complex64> = plan.s_grid.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
    let rows = tent_laplace_check(store, &s_grid)?;
    let mut t = Table::new("tent", &["s_re", "s_im", "value", "target", "residual", "omega_hat_residual"]);
    for r in &rows {
        t.push(vec![
            num(r.s.re),
            num(r.s.im),
            num(r.laplace.re),
            num(r.smoothed.re),
            num(r.residual),
            num((r.omega_hat - r.omega_hat_quadrature).norm()),
        ]);
    }
    ctx.art.table(&t)?;
    if let Some(r) = rows.iter().find(|r| r.s == Complex64::new(0.5, 0.0)) {
        ctx.art.verdict(Verdict::check(
            "tent-identity",
            r.residual < 1e-3,
            true,
            r.residual,
            "< 1e-3 at s = 0.5",
            format!("{} excursions", store.trials()),
        ));
    }
    let cs = WeightedTauMeasure::cauchy_sequence(store, &plan.cauchy_t);
    let mut ct = Table::new("cauchy", &["t", "value", "increment"]);
    for c in &cs {
        ct.push(vec![num(c.t), num(c.value), num(c.increment)]);
    }
    ctx.art.table(&ct)?;
    let late = cs.iter().skip(1).filter(|c| c.t > 1e3).map(|c| c.increment.abs()).fold(0.0, f64::max);
    ctx.art.verdict(Verdict::check(
        "cauchy-increments",
        late < 1e-3,
        true,
        late,
        "< 1e-3 beyond T = 1e3",
        "increments of E[1/τ; 1 ≤ τ ≤ T]",
    ));
    let k = KernelPair::new(ctx.cfg.fga.a)?;
    let bs: Vec<f64> = (0..19).map(|i| -0.9 * k.a + 0.1 * k.a * i as f64).collect();
    let lip = lipschitz_check(k, plan.lipschitz_gamma, &[1e-4, 1e-3, 1e-2, 1e-1], &bs);
    ctx.art.json("lipschitz", &lip)?;
    ctx.art.verdict(Verdict::check(
        "kernel-lipschitz",
        lip.passes(),
        true,
        lip.max_ratio,
        format!("≤ {}", num(lip.bound)),
        format!("γ = {}", lip.gamma),
    ));
    let sandwich = [10.0, 100.0, 1000.0]
        .iter()
        .filter(|&&t| t + 1.0 <= store.horizon)
        .all(|&t| WeightedTauMeasure::new(store, 0.0).sandwich_holds(t));
    ctx.art.verdict(Verdict::check("nu0-sandwich", sandwich, true, 0.0, "holds", "t in {10, 100, 1000}"));
    Ok(())
}
