use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::model::{Symbol, SymbolLaw};
use crate::{Error, Result};

pub const DEFAULT_CAP: u64 = 100_000_000;

/// One completed first return of the φ-walk to 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Excursion {
    pub steps: u64,
    pub tau: f64,
    pub first: Symbol,
    pub last: Symbol,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Outcome {
    Complete(Excursion),
    /// Accumulated roof time passed the horizon before the walk returned, so
    /// only `tau > horizon` is known.
    Censored { steps: u64, tau_so_far: f64, first: Symbol },
    /// Step cap reached first.
    Capped { steps: u64, tau_so_far: f64, first: Symbol },
}

impl Outcome {
    pub fn first(&self) -> Symbol {
        match *self {
            Outcome::Complete(e) => e.first,
            Outcome::Censored { first, .. } | Outcome::Capped { first, .. } => first,
        }
    }

    pub fn complete(&self) -> Option<&Excursion> {
        match self {
            Outcome::Complete(e) => Some(e),
            _ => None,
        }
    }
}

/// Union of first-symbol cylinders.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymbolSet {
    All,
    /// Both signs of each listed magnitude.
    Magnitudes(Vec<u64>),
}

impl SymbolSet {
    pub fn contains(&self, s: Symbol) -> bool {
        match self {
            SymbolSet::All => true,
            SymbolSet::Magnitudes(ns) => ns.contains(&s.n),
        }
    }

    pub fn mass(&self, law: &SymbolLaw) -> f64 {
        match self {
            SymbolSet::All => 1.0,
            SymbolSet::Magnitudes(ns) => {
                let mut ns = ns.clone();
                ns.sort_unstable();
                ns.dedup();
                ns.iter().map(|&n| 2.0 * law.prob(n)).sum()
            }
        }
    }

    pub fn validate(&self, law: &SymbolLaw) -> Result<()> {
        if self.mass(law) <= 0.0 {
            return Err(Error::InvalidArgument("symbol set has zero mass".into()));
        }
        Ok(())
    }
}

/// Walk from a given first symbol, drawing later symbols from `next`.
pub fn walk_with<F: FnMut() -> Symbol>(law: &SymbolLaw, first: Symbol, mut next: F, cap: u64, horizon: f64) -> Outcome {
    let xi = law.xi();
    // τ = Σn over + steps + ξ·#(+) + #(−), kept in integers; the float
    // running total only drives the horizon test. Updates are branch-free
    // because the sign is a coin flip. The position fits in i64: it is
    // bounded by the accumulated time, or by cap · max n without a horizon.
    let mut q = 0i64;
    let mut steps = 0u64;
    let mut pos_sum = 0u128;
    let mut n_pos = 0u64;
    let mut tau_run = 0.0;
    let mut s = first;
    loop {
        let pos = s.positive as u64;
        let sign = 2 * pos as i64 - 1;
        q += sign * s.n as i64;
        pos_sum += (s.n * pos) as u128;
        n_pos += pos;
        steps += 1;
        tau_run += if s.positive { s.n as f64 + xi } else { 1.0 };
        if q == 0 {
            break;
        }
        if tau_run > horizon {
            return Outcome::Censored { steps, tau_so_far: tau_run, first };
        }
        if steps >= cap {
            return Outcome::Capped { steps, tau_so_far: tau_run, first };
        }
        s = next();
    }
    let tau = pos_sum as f64 + xi * n_pos as f64 + (steps - n_pos) as f64;
    Outcome::Complete(Excursion { steps, tau, first, last: s })
}

pub fn run_excursion<R: RngCore + ?Sized>(law: &SymbolLaw, rng: &mut R, cap: u64) -> Outcome {
    run_excursion_until(law, rng, cap, f64::INFINITY)
}

/// As `run_excursion`, but gives up once accumulated time exceeds `horizon`.
pub fn run_excursion_until<R: RngCore + ?Sized>(law: &SymbolLaw, rng: &mut R, cap: u64, horizon: f64) -> Outcome {
    let first = law.sample(rng);
    walk_with(law, first, || law.sample(rng), cap, horizon)
}

/// Excursion whose first symbol is drawn from μ conditioned on `set`.
pub fn run_excursion_from<R: RngCore + ?Sized>(
    law: &SymbolLaw,
    rng: &mut R,
    set: &SymbolSet,
    cap: u64,
    horizon: f64,
) -> Outcome {
    let first = loop {
        let s = law.sample(rng);
        if set.contains(s) {
            break s;
        }
    };
    walk_with(law, first, || law.sample(rng), cap, horizon)
}

/// Exact `P(𝒩 = 2) = 2 Σ_n prob(+,n) prob(−,n)`, summed until terms vanish.
pub fn prob_two_step(law: &SymbolLaw) -> f64 {
    let mut acc = 0.0;
    let mut n = 1u64;
    loop {
        let q = law.prob(n);
        let term = 2.0 * q * q;
        acc += term;
        if term < 1e-18 * acc || n > 10_000_000 {
            break;
        }
        n += 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn law() -> SymbolLaw {
        SymbolLaw::new(ModelParams::new(1.5)).unwrap()
    }

    #[test]
    fn shortest_excursion() {
        let l = law();
        let mut seq = vec![Symbol::minus(1)].into_iter();
        let out = walk_with(&l, Symbol::plus(1), || seq.next().unwrap(), 10, f64::INFINITY);
        let e = out.complete().copied().unwrap();
        assert_eq!(e.steps, 2);
        assert!((e.tau - (2.0 + l.xi())).abs() < 1e-15);
        assert_eq!(e.last, Symbol::minus(1));
    }

    #[test]
    fn longer_scripted_excursion() {
        let l = law();
        let mut seq = vec![Symbol::plus(2), Symbol::minus(1), Symbol::minus(4)].into_iter();
        let out = walk_with(&l, Symbol::plus(3), || seq.next().unwrap(), 10, f64::INFINITY);
        let e = out.complete().copied().unwrap();
        assert_eq!(e.steps, 4);
        assert!((e.tau - (3.0 + 2.0 + 2.0 * l.xi() + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn cap_and_horizon() {
        let l = law();
        let out = walk_with(&l, Symbol::plus(1), || Symbol::plus(1), 5, f64::INFINITY);
        assert!(matches!(out, Outcome::Capped { steps: 5, .. }));
        let out = walk_with(&l, Symbol::plus(1), || Symbol::plus(1), 100, 4.0);
        match out {
            Outcome::Censored { tau_so_far, .. } => assert!(tau_so_far > 4.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn two_step_probability_oracle() {
        let l = law();
        let exact = prob_two_step(&l);
        // direct enumeration with the unreduced differences
        let brute: f64 = (1..200_000u64)
            .map(|n| {
                let d = l.tail_fn(n as f64) - l.tail_fn((n + 1) as f64);
                0.5 * d * d
            })
            .sum();
        assert!((exact - brute).abs() < 1e-12);
        assert!((exact - 0.225_6).abs() < 1e-3, "{exact}");
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let trials = 100_000;
        let hits = (0..trials)
            .filter(|_| matches!(run_excursion_until(&l, &mut rng, 1000, 1e9), Outcome::Complete(e) if e.steps == 2))
            .count();
        let phat = hits as f64 / trials as f64;
        let sd = (exact * (1.0 - exact) / trials as f64).sqrt();
        assert!((phat - exact).abs() < 5.0 * sd, "{phat} vs {exact}");
    }

    #[test]
    fn conditioned_first_symbol() {
        let l = law();
        let set = SymbolSet::Magnitudes(vec![1]);
        assert!((set.mass(&l) - (1.0 - 2f64.powf(-1.5))).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let out = run_excursion_from(&l, &mut rng, &set, 1000, 100.0);
            assert_eq!(out.first().n, 1);
        }
        assert!(SymbolSet::Magnitudes(vec![]).validate(&l).is_err());
    }
}
