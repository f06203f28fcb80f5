//! Command-line numbers: counts such as `1e6` and grids such as
//! `1e2,1e3,1e4` or `1e2:1e4:5` (five log-spaced points per decade).

use anyhow::{bail, ensure, Context, Result};

/// Largest grid a flag may expand to.
pub const MAX_GRID: usize = 10_000;

/// A non-negative integer, written plainly, with `_` separators or in
/// scientific form as long as the value is integral.
pub fn parse_count(text: &str) -> Result<u64> {
    let t = text.trim().replace('_', "");
    ensure!(!t.is_empty(), "empty count");
    if t.bytes().all(|c| c.is_ascii_digit()) {
        return t.parse::<u64>().with_context(|| format!("count {text:?} overflows u64"));
    }
    let x: f64 = t.parse().with_context(|| format!("{text:?} is not a number"))?;
    ensure!(x.is_finite() && x >= 0.0, "count {text:?} must be finite and non-negative");
    ensure!(x.fract() == 0.0, "count {text:?} is not an integer");
    // 2^64 is the first float past u64::MAX
    ensure!(x < 18_446_744_073_709_551_616.0, "count {text:?} overflows u64");
    Ok(x as u64)
}

pub fn parse_real(text: &str) -> Result<f64> {
    let t = text.trim();
    let x: f64 = t.parse().with_context(|| format!("{text:?} is not a number"))?;
    ensure!(x.is_finite(), "{text:?} is not finite");
    Ok(x)
}

pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let t = text.trim();
    ensure!(!t.is_empty(), "empty grid");
    if t.contains(':') {
        let parts: Vec<&str> = t.split(':').collect();
        if parts.len() != 3 {
            bail!("log grid {text:?} must read lo:hi:per_decade");
        }
        let lo = parse_real(parts[0])?;
        let hi = parse_real(parts[1])?;
        let per = parse_count(parts[2])?;
        ensure!(lo > 0.0 && hi >= lo, "log grid needs 0 < lo <= hi, got {lo}:{hi}");
        ensure!(per >= 1, "log grid needs at least one point per decade");
        let points = (hi / lo).log10() * per as f64;
        ensure!(points < MAX_GRID as f64, "log grid {text:?} has more than {MAX_GRID} points");
        return Ok(krick::stats::log_grid(lo, hi, per as usize));
    }
    let xs = t.split(',').map(parse_real).collect::<Result<Vec<_>>>()?;
    ensure!(xs.len() <= MAX_GRID, "grid has more than {MAX_GRID} points");
    Ok(xs)
}

/// A grid of positive, strictly increasing times.
pub fn parse_anchors(text: &str) -> Result<Vec<f64>> {
    let xs = parse_grid(text)?;
    check_anchors(&xs)?;
    Ok(xs)
}

pub fn check_anchors(xs: &[f64]) -> Result<()> {
    ensure!(!xs.is_empty(), "no anchors");
    ensure!(xs.iter().all(|&x| x > 0.0 && x.is_finite()), "anchors must be positive and finite");
    ensure!(xs.windows(2).all(|w| w[0] < w[1]), "anchors must be strictly increasing");
    Ok(())
}
