use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::params::ModelParams;
use crate::quad::GaussLegendre;
use crate::{Error, Result};

/// Largest magnitude served from the exact lookup table.
pub const TABLE_N: u64 = 1 << 16;
const GUIDE_BITS: u32 = 16;
const GUIDE_BUCKETS: usize = 1 << GUIDE_BITS;

/// One base symbol `(ε, n)`: sign of the displacement and its magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Symbol {
    pub positive: bool,
    pub n: u64,
}

impl Symbol {
    pub fn plus(n: u64) -> Self {
        Symbol { positive: true, n }
    }

    pub fn minus(n: u64) -> Self {
        Symbol { positive: false, n }
    }

    /// Signed index `±n`, also the displacement φ.
    pub fn index(&self) -> i64 {
        if self.positive {
            self.n as i64
        } else {
            -(self.n as i64)
        }
    }
}

/// Tail-first Bernoulli law: `prob(±, n) = (T(n) - T(n+1)) / 2`.
#[derive(Debug, Clone)]
pub struct SymbolLaw {
    params: ModelParams,
    p: f64,
    kappa: f64,
    xi: f64,
    /// T(n) for n = 0..=TABLE_N + 1, with T(0) = +inf as a sentinel.
    table: Vec<f64>,
    /// guide[j] = largest n with T(n) >= (j+1)/G (within the table).
    guide: Vec<u32>,
}

impl SymbolLaw {
    pub fn new(params: ModelParams) -> Result<Self> {
        params.validate()?;
        let p = params.p;
        let kappa = params.ell.kappa();
        // continuous log-slope is -p + kappa/(1 + ln x); beyond the table it
        // must stay negative
        if kappa >= p * (1.0 + (TABLE_N as f64).ln()) {
            return Err(Error::InvalidParams(format!("kappa = {kappa} too large for p = {p}")));
        }
        let tail = |n: f64| tail_value(p, kappa, n);
        let mut table = Vec::with_capacity(TABLE_N as usize + 2);
        table.push(f64::INFINITY);
        for n in 1..=TABLE_N + 1 {
            table.push(tail(n as f64));
        }
        for n in 1..=TABLE_N as usize {
            if !(table[n + 1] < table[n]) {
                return Err(Error::NonMonotoneTail {
                    n: n as u64,
                    t_n: table[n],
                    t_next: table[n + 1],
                });
            }
        }
        let mut guide = vec![0u32; GUIDE_BUCKETS];
        for (j, slot) in guide.iter_mut().enumerate() {
            let u = (j + 1) as f64 / GUIDE_BUCKETS as f64;
            let count = table[1..].partition_point(|&t| t >= u);
            *slot = count.max(1) as u32;
        }
        Ok(SymbolLaw {
            params,
            p,
            kappa,
            xi: params.xi_value(),
            table,
            guide,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    /// `T(n) = n^-p (1 + ln n)^κ`, `T(1) = 1`; real argument allowed.
    pub fn tail_fn(&self, x: f64) -> f64 {
        if x >= 1.0 && x <= (TABLE_N + 1) as f64 && x.fract() == 0.0 {
            return self.table[x as usize];
        }
        tail_value(self.p, self.kappa, x)
    }

    /// Mass of a single symbol, computed without the cancellation in T(n) - T(n+1).
    pub fn prob(&self, n: u64) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let nf = n as f64;
        let l1 = (1.0 / nf).ln_1p();
        let mut log_ratio = -self.p * l1;
        if self.kappa != 0.0 {
            log_ratio += self.kappa * (l1 / (1.0 + nf.ln())).ln_1p();
        }
        0.5 * self.tail_fn(nf) * (-log_ratio.exp_m1())
    }

    pub fn roof(&self, s: Symbol) -> f64 {
        if s.positive {
            s.n as f64 + self.xi
        } else {
            1.0
        }
    }

    pub fn phi(&self, s: Symbol) -> i64 {
        s.index()
    }

    /// `μ(φ > t)` for `t >= 0`; by symmetry also `μ(φ < -t)`.
    pub fn tail_phi(&self, t: f64) -> f64 {
        assert!(t >= 0.0, "tail_phi needs t >= 0");
        0.5 * self.tail_fn(t.floor() + 1.0)
    }

    /// `μ(|φ| > t)`.
    pub fn tail_abs_phi(&self, t: f64) -> f64 {
        2.0 * self.tail_phi(t)
    }

    /// `μ(r > t)`.
    pub fn tail_r(&self, t: f64) -> f64 {
        assert!(t >= 0.0, "tail_r needs t >= 0");
        if t < 1.0 {
            return 1.0;
        }
        // r(+, n) = n + ξ > t  <=>  n >= floor(t - ξ) + 1
        0.5 * self.tail_fn((t - self.xi).floor() + 1.0)
    }

    /// Largest n with T(n) >= u, for u in (0, 1].
    pub fn invert_tail(&self, u: f64) -> u64 {
        debug_assert!(u > 0.0 && u <= 1.0);
        let j = ((u * GUIDE_BUCKETS as f64).ceil() as usize).clamp(1, GUIDE_BUCKETS) - 1;
        self.invert_in_bucket(u, j)
    }

    /// Bucket j covers u in (j/G, (j+1)/G].
    #[inline]
    fn invert_in_bucket(&self, u: f64, j: usize) -> u64 {
        let lo = self.guide[j] as usize;
        if j == 0 {
            if u <= self.table[TABLE_N as usize] {
                return self.invert_tail_analytic(u);
            }
            let count = self.table[lo..=TABLE_N as usize].partition_point(|&t| t >= u);
            return (lo + count - 1) as u64;
        }
        let hi = self.guide[j - 1] as usize;
        if lo == hi {
            return lo as u64;
        }
        // T(lo) >= u by construction; search for the last index with T >= u
        let count = self.table[lo..=hi].partition_point(|&t| t >= u);
        (lo + count - 1) as u64
    }

    fn invert_tail_analytic(&self, u: f64) -> u64 {
        let lu = u.ln();
        let mut y = -lu / self.p;
        if self.kappa != 0.0 {
            for _ in 0..60 {
                let g = -self.p * y + self.kappa * (1.0 + y).ln() - lu;
                let dg = -self.p + self.kappa / (1.0 + y);
                let step = g / dg;
                y -= step;
                if step.abs() < 1e-14 * (1.0 + y.abs()) {
                    break;
                }
            }
        }
        let mut n = y.exp().floor().max(TABLE_N as f64) as u64;
        while self.tail_fn((n + 1) as f64) >= u {
            n += 1;
        }
        while n > 1 && self.tail_fn(n as f64) < u {
            n -= 1;
        }
        n
    }

    /// One symbol from a single 64-bit draw: bit 0 is the sign, the top 53
    /// bits give U in (0, 1].
    #[inline]
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> Symbol {
        let bits = rng.next_u64();
        let k = bits >> 11;
        let u = (k + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        // ceil(u·G) - 1 computed on the integer k
        let j = (k >> (53 - GUIDE_BITS)) as usize;
        Symbol {
            positive: bits & 1 == 1,
            n: self.invert_in_bucket(u, j),
        }
    }

    /// `∫_a^∞ T(x) dx` for `a >= 1`.
    pub fn tail_integral(&self, a: f64) -> f64 {
        let pm1 = self.p - 1.0;
        let base = a.powf(-pm1) / pm1;
        if self.kappa == 0.0 {
            return base;
        }
        // x = a·e^{z/(p-1)} turns the integral into base·∫ e^{-z}(1 + ln a + z/(p-1))^κ dz
        let la = 1.0 + a.ln();
        let rule = gl20();
        let mut acc = 0.0;
        for k in 0..60 {
            let (lo, hi) = (k as f64, (k + 1) as f64);
            acc += rule.integrate(lo, hi, |z| (-z).exp() * (la + z / pm1).powf(self.kappa));
        }
        base * acc
    }

    fn tail_derivs(&self, x: f64) -> (f64, f64) {
        let t = self.tail_fn(x);
        let l = 1.0 + x.ln();
        let g = -self.p + self.kappa / l;
        let d1 = t * g / x;
        let d2 = t / (x * x) * (g * g - g - self.kappa / (l * l));
        (d1, d2)
    }

    /// `Σ_{n>=1} T(n)` to absolute tolerance `tol`.
    ///
    /// The first N terms are summed directly and the rest replaced by the
    /// midpoint integral `∫_{N+1/2}^∞ T`. For convex T with decreasing second
    /// derivative the replacement error is at most `(T''(N+½) - T'(N+½))/24`.
    pub fn tail_sum(&self, tol: f64, max_terms: u64) -> Result<SeriesValue> {
        let mut n = 64u64;
        loop {
            let x = n as f64 + 0.5;
            let (d1, d2) = self.tail_derivs(x);
            let bound = (d2.abs() + d1.abs()) / 24.0;
            if bound <= 0.5 * tol {
                break;
            }
            if n >= max_terms {
                // bound decays like x^-(p+1); extrapolate the needed N
                let needed = x * (bound / (0.5 * tol)).powf(1.0 / (self.p + 1.0));
                return Err(Error::TruncationUnreachable {
                    tol,
                    required_terms: needed.ceil() as u64,
                    limit: max_terms,
                });
            }
            n = (n * 2).min(max_terms);
        }
        let x = n as f64 + 0.5;
        let (d1, d2) = self.tail_derivs(x);
        let bound = (d2.abs() + d1.abs()) / 24.0;
        let mut head = 0.0;
        for k in (1..=n).rev() {
            head += self.tail_fn(k as f64);
        }
        Ok(SeriesValue {
            value: head + self.tail_integral(x),
            error_bound: bound,
            terms: n,
        })
    }

    /// Total probability with the analytic tail mass added back.
    pub fn total_mass(&self, terms: u64) -> f64 {
        let mut acc = self.tail_fn((terms + 1) as f64);
        for n in (1..=terms).rev() {
            acc += 2.0 * self.prob(n);
        }
        acc
    }
}

fn gl20() -> &'static GaussLegendre {
    static RULE: std::sync::OnceLock<GaussLegendre> = std::sync::OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(20))
}

fn tail_value(p: f64, kappa: f64, x: f64) -> f64 {
    if x <= 1.0 {
        return 1.0;
    }
    let base = x.powf(-p);
    if kappa == 0.0 {
        base
    } else {
        base * (1.0 + x.ln()).powf(kappa)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: f64,
    pub error_bound: f64,
    pub terms: u64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::params::EllKind;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn law(p: f64) -> SymbolLaw {
        SymbolLaw::new(ModelParams::new(p)).unwrap()
    }

    #[test]
    fn tail_values_are_exact() {
        let l = law(1.5);
        assert_eq!(l.tail_phi(0.0), 0.5);
        assert_relative_eq!(l.tail_phi(10.0), 11f64.powf(-1.5) / 2.0, epsilon = 1e-16);
        assert_relative_eq!(l.tail_phi(10.0), 0.013_705_06, epsilon = 1e-7);
        for t in [1u64, 2, 7, 100, 5000] {
            assert_eq!(l.tail_abs_phi(t as f64), l.tail_fn((t + 1) as f64));
        }
    }

    #[test]
    fn roof_tail_tracks_phi_tail() {
        let l = law(1.5);
        assert_eq!(l.tail_r(0.5), 1.0);
        assert_eq!(l.tail_r(1.2), 0.5);
        for t in [10.0, 100.0, 1000.0, 1e4] {
            let diff = (l.tail_r(t) - l.tail_phi(t - 1.0)).abs();
            assert!(diff <= 2.0 * t.powf(-2.5), "t={t} diff={diff}");
        }
    }

    #[test]
    fn probabilities_sum_to_one() {
        for p in [1.1, 1.5, 2.0] {
            let l = law(p);
            assert!((l.total_mass(10_000) - 1.0).abs() < 1e-12);
        }
        let lp = SymbolLaw::new(ModelParams::new(1.5).with_ell(EllKind::LogPower { kappa: 0.7 })).unwrap();
        assert!((lp.total_mass(10_000) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn prob_matches_naive_difference() {
        let l = law(1.5);
        for n in [1u64, 2, 10, 1000] {
            let naive = 0.5 * (l.tail_fn(n as f64) - l.tail_fn((n + 1) as f64));
            assert_relative_eq!(l.prob(n), naive, max_relative = 1e-9);
        }
    }

    #[test]
    fn large_kappa_is_rejected() {
        let err = SymbolLaw::new(ModelParams::new(1.5).with_ell(EllKind::LogPower { kappa: 5.0 })).unwrap_err();
        assert!(matches!(err, Error::NonMonotoneTail { n: 1, .. }), "{err:?}");
        assert!(SymbolLaw::new(ModelParams::new(2.5)).is_err());
        assert!(SymbolLaw::new(ModelParams::new(1.0)).is_err());
    }

    #[test]
    fn inversion_is_consistent_with_tail() {
        let l = law(1.5);
        for &u in &[1.0, 0.999, 0.5, 0.3536, 0.1, 1e-3, 1e-6, 1.1e-7, 1e-9, 1e-15, 2f64.powi(-53)] {
            let n = l.invert_tail(u);
            assert!(l.tail_fn(n as f64) >= u, "u={u} n={n}");
            assert!(l.tail_fn((n + 1) as f64) < u, "u={u} n={n}");
        }
    }

    #[test]
    fn inversion_log_power_tail() {
        let l = SymbolLaw::new(ModelParams::new(1.3).with_ell(EllKind::LogPower { kappa: -0.5 })).unwrap();
        for &u in &[0.7, 1e-4, 1e-8, 1e-12] {
            let n = l.invert_tail(u);
            assert!(l.tail_fn(n as f64) >= u && l.tail_fn((n + 1) as f64) < u);
        }
    }

    #[test]
    fn empirical_frequencies() {
        let l = law(1.5);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let trials = 200_000;
        let mut ones = 0u64;
        let mut pos = 0u64;
        for _ in 0..trials {
            let s = l.sample(&mut rng);
            ones += (s.n == 1) as u64;
            pos += s.positive as u64;
        }
        let want = 1.0 - 2f64.powf(-1.5);
        let sd = (want * (1.0 - want) / trials as f64).sqrt();
        assert!((ones as f64 / trials as f64 - want).abs() < 5.0 * sd);
        assert!((pos as f64 / trials as f64 - 0.5).abs() < 5.0 * 0.5 / (trials as f64).sqrt());
    }

    #[test]
    fn tail_sum_matches_zeta() {
        let l = law(1.5);
        let s = l.tail_sum(1e-10, 1 << 26).unwrap();
        assert!(s.error_bound <= 0.5e-10);
        assert!((s.value - crate::special::zeta(1.5)).abs() < 1e-10);
    }

    #[test]
    fn tail_sum_reports_required_terms() {
        let l = law(1.5);
        match l.tail_sum(1e-14, 128) {
            Err(Error::TruncationUnreachable { required_terms, limit, .. }) => {
                assert_eq!(limit, 128);
                assert!(required_terms > 128);
            }
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn log_power_tail_integral() {
        // κ = 1: ∫_a^∞ x^-p (1 + ln x) dx = a^{1-p}/(p-1) · (1 + ln a + 1/(p-1))
        let l = SymbolLaw::new(ModelParams::new(1.5).with_ell(EllKind::LogPower { kappa: 1.0 })).unwrap();
        let a: f64 = 37.0;
        let want = a.powf(-0.5) / 0.5 * (1.0 + a.ln() + 2.0);
        assert_relative_eq!(l.tail_integral(a), want, max_relative = 1e-12);
    }
}
