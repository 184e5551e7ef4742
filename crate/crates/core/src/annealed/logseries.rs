//! The auxiliary crossing probability `U_n(q)` over i.i.d. geometric gaps,
//! its growth rate `mu(q)`, and the root `q(rho, M)`.
//!
//! With `G_q(r) = q (1-q)^{r-1}` the first factor `e^{-M}/(2 r_1)` averages
//! to `U_1 = q log(1/q) / (2 e^M (1-q))`, and reweighting every gap by
//! `1/r` turns `G_q` into the log-series law with parameter `1 - q`.
//! Hence `U_n = U_1^n E[prod_{i>=2} phi_i]` with log-series gaps and
//! `phi_i = F_M(r_{i-1}, r_i, u_{i-1}) 2 r_i e^M`, which lies in
//! `[1, 1/(1 - e^{-M})]`. Everything is carried relative to `U_1`, so
//! values of `q` far below `f64` range only enter through `log q`.

use serde::Serialize;

use crate::environment::WalkParams;
use crate::error::{Error, Result};
use crate::estimate::Moments;
use crate::seed;

/// Log-series law `P(R = r) = s^r / (r log(1/(1-s)))`, parametrized by
/// `log(1 - s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSeries {
    ln_q: f64,
}

impl LogSeries {
    /// Law with parameter `s = 1 - q`, given `log q < 0`.
    pub fn from_log_q(ln_q: f64) -> Result<Self> {
        if ln_q.is_nan() || ln_q >= 0.0 || ln_q.is_infinite() {
            return Err(Error::InvalidParameter(format!("log q must be negative and finite, got {ln_q}")));
        }
        Ok(Self { ln_q })
    }

    pub fn pmf(&self, r: u64) -> f64 {
        let s_ln = (-self.ln_q.exp()).ln_1p();
        (r as f64 * s_ln - (r as f64).ln()).exp() / -self.ln_q
    }

    /// Kemp's inversion with two uniforms per draw; the result is a real
    /// number because gaps can exceed `u64` when `q` is tiny.
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u1: f64 = 1.0 - rng.random::<f64>();
        let u2: f64 = 1.0 - rng.random::<f64>();
        let t = u1 * self.ln_q;
        let e = t.exp();
        let ln_k = if e < 0.5 { (-e).ln_1p() } else { (-t.exp_m1()).ln() };
        if ln_k == 0.0 {
            return f64::INFINITY;
        }
        1.0 + (u2.ln() / ln_k).floor()
    }
}

/// `log U_1(q)`.
fn log_u1(ln_q: f64, height: f64) -> f64 {
    let q = ln_q.exp();
    ln_q + (-ln_q).ln() - (2.0f64).ln() - height - (-q).ln_1p()
}

/// `phi` for a gap `r` after a gap `ell` with previous factor `behind`.
#[inline]
fn phi(ell: f64, r: f64, behind: f64, survive: f64, kill: f64) -> f64 {
    1.0 / (kill + survive * (0.5 / r + (1.0 - behind) / (2.0 * ell)))
}

/// Moments of `prod_{i=2}^n phi_i` for every `n <= n_max` from one set of
/// gap sequences.
fn phi_products(ln_q: f64, height: f64, n_max: usize, budget: u64, seed: u64) -> Result<Vec<Moments>> {
    let law = LogSeries::from_log_q(ln_q)?;
    let survive = (-height).exp();
    let kill = -(-height).exp_m1();
    let mut rng = seed::rng(seed);
    let mut acc = vec![Moments::default(); n_max];
    for _ in 0..budget {
        let mut ell = law.sample(&mut rng);
        let mut behind = 0.0;
        let mut prod = 1.0;
        acc[0].push(1.0);
        for slot in acc.iter_mut().skip(1) {
            let r = law.sample(&mut rng);
            let ph = phi(ell, r, behind, survive, kill);
            prod *= ph;
            slot.push(prod);
            behind = survive / (2.0 * r) * ph;
            ell = r;
        }
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum UMode {
    MonteCarlo,
    TruncatedSum,
}

/// Estimate of `U_n(q)` with a bracket. Monte Carlo brackets are three
/// standard errors clipped to `[U_1^n, U_1^n / (1-e^{-M})^{n-1}]`;
/// truncated-sum brackets are rigorous.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UEstimate {
    pub n: usize,
    pub estimate: f64,
    pub lo: f64,
    pub hi: f64,
    pub stderr: f64,
    pub mode: UMode,
}

/// Relative bracket `[lo, hi]` on `E[prod phi]` with its mean and error.
struct Relative {
    mean: f64,
    lo: f64,
    hi: f64,
    stderr: f64,
}

fn relative_brackets(moments: &[Moments], kill: f64) -> Vec<Relative> {
    moments
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let top = kill.powi(-(i as i32));
            let se = m.stderr().unwrap_or(0.0);
            Relative {
                mean: m.mean(),
                lo: (m.mean() - 3.0 * se).max(1.0),
                hi: (m.mean() + 3.0 * se).min(top),
                stderr: se,
            }
        })
        .collect()
}

fn check_q(q: f64) -> Result<()> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidParameter(format!("q must lie in (0, 1), got {q}")));
    }
    Ok(())
}

/// Monte Carlo estimates of `U_1..U_{n_max}` from shared gap sequences.
pub fn u_n_series(q: f64, height: f64, n_max: usize, budget: u64, seed: u64) -> Result<Vec<UEstimate>> {
    check_q(q)?;
    if n_max == 0 || budget < 2 {
        return Err(Error::InvalidParameter("n_max >= 1 and budget >= 2 required".into()));
    }
    let ln_q = q.ln();
    let u1 = log_u1(ln_q, height).exp();
    let kill = -(-height).exp_m1();
    let moments = phi_products(ln_q, height, n_max, budget, seed)?;
    Ok(relative_brackets(&moments, kill)
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let base = u1.powi(i as i32 + 1);
            UEstimate {
                n: i + 1,
                estimate: base * r.mean,
                lo: base * r.lo,
                hi: base * r.hi,
                stderr: base * r.stderr,
                mode: UMode::MonteCarlo,
            }
        })
        .collect())
}

/// `U_n(q)` by Monte Carlo (`budget` gap sequences) or by an exhaustive
/// sum over gaps up to a cutoff (at most `budget` terms).
pub fn u_n_estimate(q: f64, height: f64, n: usize, mode: UMode, budget: u64, seed: u64) -> Result<UEstimate> {
    check_q(q)?;
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    match mode {
        UMode::MonteCarlo => Ok(u_n_series(q, height, n, budget, seed)?[n - 1]),
        UMode::TruncatedSum => truncated_sum(q, height, n, budget),
    }
}

/// Relative width above which a truncated sum is reported as exhausted.
const TRUNCATION_WIDTH: f64 = 1e-6;

fn truncated_sum(q: f64, height: f64, n: usize, budget: u64) -> Result<UEstimate> {
    let wanted = ((1e-13f64).ln() / (-q).ln_1p()).ceil().max(1.0);
    let affordable = (budget as f64).powf(1.0 / n as f64).floor();
    let r_max = wanted.min(affordable);
    if r_max < 1.0 {
        return Err(Error::BudgetExhausted(format!("budget {budget} allows no terms at depth {n}")));
    }
    let r_max = r_max as u64;
    let survive = (-height).exp();
    let kill = -(-height).exp_m1();
    let geo: Vec<f64> = (1..=r_max).map(|r| q * ((r - 1) as f64 * (-q).ln_1p()).exp()).collect();

    struct Terms<'a> {
        geo: &'a [f64],
        n: usize,
        survive: f64,
        kill: f64,
    }

    impl Terms<'_> {
        fn walk(&self, i: usize, ell: u64, behind: f64, acc: f64) -> f64 {
            if i == self.n {
                return acc;
            }
            let mut s = 0.0;
            for (k, &g) in self.geo.iter().enumerate() {
                let r = (k + 1) as u64;
                let base = self.survive / (2.0 * r as f64);
                let f = if i == 0 { base } else { base * phi(ell as f64, r as f64, behind, self.survive, self.kill) };
                let next_behind = if i == 0 { 0.0 } else { f };
                s += self.walk(i + 1, r, next_behind, acc * g * f);
            }
            s
        }
    }
    let sum = Terms { geo: &geo, n, survive, kill }.walk(0, 0, 0.0, 1.0);

    let u1 = log_u1(q.ln(), height).exp();
    let b = u1 / kill;
    let t = (r_max as f64 * (-q).ln_1p()).exp() * survive / (2.0 * (r_max + 1) as f64 * kill);
    let tail = n as f64 * t * b.powi(n as i32 - 1);
    if tail > TRUNCATION_WIDTH * sum {
        return Err(Error::BudgetExhausted(format!(
            "truncated sum at depth {n} with cutoff {r_max}: tail {tail:e} exceeds {TRUNCATION_WIDTH:e} of {sum:e}"
        )));
    }
    Ok(UEstimate { n, estimate: sum + 0.5 * tail, lo: sum, hi: sum + tail, stderr: 0.0, mode: UMode::TruncatedSum })
}

/// Bracket on `mu(q)`: the intersection over `n <= n_max` of
/// `[U_n^{1/n}, (U_n / (1-e^{-M}))^{1/n}]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MuBracket {
    pub lo: f64,
    pub hi: f64,
    pub n_max: usize,
}

impl MuBracket {
    pub fn mid(&self) -> f64 {
        (self.lo * self.hi).sqrt()
    }
}

/// `log(mu / U_1)` bounds.
fn relative_mu(ln_q: f64, height: f64, n_max: usize, budget: u64, seed: u64) -> Result<(f64, f64)> {
    let kill = -(-height).exp_m1();
    let rel = relative_brackets(&phi_products(ln_q, height, n_max, budget, seed)?, kill);
    let mut lo = 0.0f64;
    let mut hi = -kill.ln();
    for (i, r) in rel.iter().enumerate() {
        let n = (i + 1) as f64;
        lo = lo.max(r.lo.ln() / n);
        hi = hi.min((r.hi.ln() - kill.ln()) / n);
    }
    if lo > hi {
        return Err(Error::EmptyBracket { lo, hi });
    }
    Ok((lo, hi))
}

pub fn mu_bracket(q: f64, height: f64, n_max: usize, budget: u64, seed: u64) -> Result<MuBracket> {
    check_q(q)?;
    if n_max == 0 {
        return Err(Error::InvalidParameter("n_max must be >= 1".into()));
    }
    let ln_q = q.ln();
    let u1 = log_u1(ln_q, height);
    let (lo, hi) = relative_mu(ln_q, height, n_max, budget.max(2), seed)?;
    Ok(MuBracket { lo: (u1 + lo).exp(), hi: (u1 + hi).exp(), n_max })
}

/// Knobs for [`solve_q`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveOptions {
    pub n_max: usize,
    /// Relative tolerance on `log q`.
    pub tol: f64,
    /// Gap sequences per evaluation of `mu`.
    pub budget: u64,
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { n_max: 12, tol: 1e-6, budget: 20_000, seed: 0 }
    }
}

/// Gap-law parameters for given `(p, M)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogSeriesModel {
    pub p: f64,
    #[serde(rename = "M")]
    pub height: f64,
    pub rho: f64,
    pub q: f64,
    pub log_q: f64,
    pub mu: f64,
    pub mu_lo: f64,
    pub mu_hi: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub mean_gap_heuristic: f64,
}

impl LogSeriesModel {
    /// `e^{-M} rho log(1/q)`.
    pub fn rho_statistic(&self) -> f64 {
        (-self.height).exp() * self.rho * -self.log_q
    }

    /// `2(1 - e^{-M}) <= e^{-M} rho log(1/q) <= 2`.
    pub fn rho_bracket_holds(&self) -> bool {
        let s = self.rho_statistic();
        2.0 * -(-self.height).exp_m1() <= s && s <= 2.0
    }

    pub fn to_json(&self) -> String {
        format!(
            "{{\"p\": {}, \"M\": {}, \"rho\": {}, \"q\": {:e}, \"mu_lo\": {:e}, \"mu_hi\": {:e}, \"K\": {}}}",
            self.p, self.height, self.rho, self.q, self.mu_lo, self.mu_hi, self.k
        )
    }
}

/// Solve `rho = q / (mu(q)(1-q))` by bisection in `log q`.
///
/// The search interval is where the analytic bounds on `mu` place the
/// root, `2(e^M - 1)/rho <= log(1/q) <= 2 e^M / rho`. Each evaluation uses
/// the same seed, so the map is a fixed function of `q`; the sign at
/// every midpoint is checked against both ends.
pub fn solve_q(params: &WalkParams, opts: &SolveOptions) -> Result<LogSeriesModel> {
    let rho = params.rho().ok_or_else(|| Error::InvalidParameter("rho is infinite at p = 1".into()))?;
    let m = params.height();
    let kill = params.kill();
    let ln_em1 = m + kill.ln();
    let mut lo = -(2.0f64.ln() + m - rho.ln()).exp();
    let mut hi = -(2.0f64.ln() + ln_em1 - rho.ln()).exp();
    // g(log q) = log(q / (mu (1-q))) - log rho = log(2 e^M) - log log(1/q) - log(mu/U_1) - log rho
    let g = |ln_q: f64| -> Result<f64> {
        let (a, b) = relative_mu(ln_q, m, opts.n_max, opts.budget, opts.seed)?;
        Ok(2.0f64.ln() + m - (-ln_q).ln() - 0.5 * (a + b) - rho.ln())
    };
    let mut g_lo = g(lo)?;
    let mut g_hi = g(hi)?;
    if g_lo > 0.0 || g_hi < 0.0 {
        return Err(Error::EmptyBracket { lo: g_lo, hi: g_hi });
    }
    while (hi - lo) > opts.tol * hi.abs() {
        let mid = 0.5 * (lo + hi);
        let g_mid = g(mid)?;
        if g_mid <= 0.0 {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
            g_hi = g_mid;
        }
        if g_lo > 0.0 || g_hi < 0.0 {
            return Err(Error::EmptyBracket { lo: g_lo, hi: g_hi });
        }
    }
    let ln_q = 0.5 * (lo + hi);
    let (a, b) = relative_mu(ln_q, m, opts.n_max, opts.budget, opts.seed)?;
    let u1 = log_u1(ln_q, m);
    let p = params.p();
    let k = 2.0 * (1.0 - p) * m.exp_m1() / p;
    Ok(LogSeriesModel {
        p,
        height: m,
        rho,
        q: ln_q.exp(),
        log_q: ln_q,
        mu: (u1 + 0.5 * (a + b)).exp(),
        mu_lo: (u1 + a).exp(),
        mu_hi: (u1 + b).exp(),
        k,
        mean_gap_heuristic: k.exp_m1() / k,
    })
}

/// Product laws bounding the gaps of the normalized gap measure from
/// above (`y_tail`) and below (`z_tail`). The per-gap mass is
/// `rho (1-q)^r / (2 r (e^M - 1))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonDistributions {
    #[serde(rename = "Gamma")]
    pub big_gamma: f64,
    pub gamma: f64,
    pub rho: f64,
    pub log_q: f64,
    pub height: f64,
}

impl ComparisonDistributions {
    pub fn new(model: &LogSeriesModel) -> Self {
        let kill = -(-model.height).exp_m1();
        Self { big_gamma: kill.powi(-2), gamma: kill * kill, rho: model.rho, log_q: model.log_q, height: model.height }
    }

    /// `rho / (2(e^M - 1)) sum_{r >= x} (1-q)^r / r`.
    pub fn mass_from(&self, x: u64) -> f64 {
        let ln_s = (-self.log_q.exp()).ln_1p();
        let head: f64 = (1..x).map(|r| (r as f64 * ln_s).exp() / r as f64).sum();
        let full = -self.log_q;
        (full - head).max(0.0) * self.rho / (2.0 * self.height.exp_m1())
    }

    pub fn y_tail(&self, x: u64) -> f64 {
        (self.big_gamma * self.mass_from(x)).min(1.0)
    }

    pub fn z_tail(&self, x: u64) -> f64 {
        (self.gamma * self.mass_from(x)).min(1.0)
    }
}
