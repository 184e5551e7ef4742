//! Quenched speed.
//!
//! For one environment the conditioned one-site crossing time
//! `E^omega(tau_1 | tau_1 < infinity)` depends on the whole half-line left
//! of the origin. It is computed on a truncated window: the sweep started
//! with a cemetery left of the `j`-th obstacle gives a lower value, and the
//! same sweep started from the extreme state `(a, d) = (1, D_cap)` gives an
//! upper one. The sweep is increasing in both state components, so the
//! true value lies in between whenever the true crossing time at the
//! truncation point is below `D_cap`.

use serde::Serialize;

use crate::environment::{sample_with, Environment, WalkParams};
use crate::error::{Error, Result};
use crate::estimate::{batch_means, Method, Moments, SpeedEstimate};
use crate::exact_walk::Sweep;
use crate::{par, seed};

/// How far left of the origin the environment is kept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationPolicy {
    /// Number of obstacles at or left of the origin retained initially.
    pub depth_obstacles: usize,
    /// Requested additive error on the crossing expectation.
    pub tolerance: f64,
    /// Assumed upper bound on the conditioned crossing time at the
    /// truncation point.
    pub tail_time_cap: f64,
}

impl TruncationPolicy {
    pub fn new(depth_obstacles: usize, tolerance: f64, tail_time_cap: f64) -> Result<Self> {
        if depth_obstacles == 0 {
            return Err(Error::InvalidParameter("depth_obstacles must be >= 1".into()));
        }
        if tolerance.is_nan() || tolerance <= 0.0 {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tolerance}")));
        }
        if tail_time_cap.is_nan() || tail_time_cap < 1.0 {
            return Err(Error::InvalidParameter(format!("tail_time_cap must be >= 1, got {tail_time_cap}")));
        }
        Ok(Self { depth_obstacles, tolerance, tail_time_cap })
    }

    /// Smallest depth whose tail bound is below `tolerance`.
    pub fn for_params(params: &WalkParams, tolerance: f64) -> Result<Self> {
        if tolerance.is_nan() || tolerance <= 0.0 {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tolerance}")));
        }
        let mut j = 1;
        while tail_bound(params, j) >= tolerance {
            j += 1;
        }
        let cap = 1.0 + 2.0 * (20.0 / params.p()).powi(2);
        Self::new(j, tolerance, cap)
    }
}

/// `e^{-M j} log(1/p) / ((1 - p)(1 - e^{-M})^3)`; the `p`-factor is `1` at `p = 1`.
pub fn tail_bound(params: &WalkParams, depth: usize) -> f64 {
    let p = params.p();
    let phi = if p < 1.0 { -p.ln() / (1.0 - p) } else { 1.0 };
    (-params.height() * depth as f64).exp() * phi / params.kill().powi(3)
}

/// Crossing expectation at the origin with its truncation bracket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SiteCrossing {
    /// Lower end of the bracket (cemetery left of the last kept obstacle).
    pub value: f64,
    /// Width of the bracket.
    pub error_bound: f64,
    pub depth_used: usize,
}

/// Positions of the obstacles at or left of `0`, nearest first.
fn left_obstacles(env: &Environment) -> Vec<i64> {
    let (start, _) = env.window();
    let flags = env.flags();
    (start..=0.min(env.window().1)).rev().filter(|&x| flags[(x - start) as usize]).collect()
}

fn sweep_to_origin(w: &[f64], init: Sweep) -> Sweep {
    w.iter().fold(init, |s, &w| s.next(w).0)
}

/// Bracket for `E^omega(tau_1 | tau_1 < infinity)` keeping `depth`
/// obstacles left of (or at) the origin.
pub fn crossing_at_depth(env: &Environment, depth: usize, tail_time_cap: f64) -> Result<SiteCrossing> {
    if !env.contains(0) {
        let (start, end) = env.window();
        return Err(Error::OutsideWindow { site: 0, start, end });
    }
    let obstacles = left_obstacles(env);
    if obstacles.is_empty() {
        return Err(Error::NonConvergent);
    }
    if depth == 0 || depth > obstacles.len() {
        return Err(Error::WindowTooShort { found: obstacles.len(), width: f64::INFINITY, tolerance: 0.0 });
    }
    let b = obstacles[depth - 1];
    let w = env.survival_factors(b, 0, 0.0)?;
    let lo = sweep_to_origin(&w, Sweep::CEMETERY).d;
    let hi = sweep_to_origin(&w, Sweep { a: 1.0, d: tail_time_cap }).d;
    Ok(SiteCrossing { value: lo, error_bound: (hi - lo).max(0.0), depth_used: depth })
}

/// `E^omega(tau_1 | tau_1 < infinity)` to within `policy.tolerance`,
/// deepening the truncation as far as the window allows.
pub fn site_crossing_expectation(env: &Environment, policy: &TruncationPolicy) -> Result<SiteCrossing> {
    let available = left_obstacles(env).len();
    if available == 0 {
        if !env.contains(0) {
            let (start, end) = env.window();
            return Err(Error::OutsideWindow { site: 0, start, end });
        }
        return Err(Error::NonConvergent);
    }
    let mut depth = policy.depth_obstacles.max(1);
    let mut width = f64::INFINITY;
    while depth <= available {
        let r = crossing_at_depth(env, depth, policy.tail_time_cap)?;
        if r.error_bound <= policy.tolerance {
            return Ok(r);
        }
        width = r.error_bound;
        depth += 1 + depth / 4;
    }
    if width.is_infinite() {
        width = crossing_at_depth(env, available, policy.tail_time_cap)?.error_bound;
    }
    Err(Error::WindowTooShort { found: available, width, tolerance: policy.tolerance })
}

/// Conditioned crossing time from `0` to `1` with the failure boundary
/// just left of the window.
pub fn window_crossing_expectation(env: &Environment) -> Result<f64> {
    let (start, _) = env.window();
    if !env.contains(0) {
        let (start, end) = env.window();
        return Err(Error::OutsideWindow { site: 0, start, end });
    }
    let w = env.survival_factors(start, 0, 0.0)?;
    Ok(sweep_to_origin(&w, Sweep::CEMETERY).d)
}

/// `(2 - p + 2 p^2) / (3 p)`: expected crossing time when the walk is
/// stopped at the first obstacle left of the origin.
pub fn main_term(params: &WalkParams) -> f64 {
    let p = params.p();
    (2.0 - p + 2.0 * p * p) / (3.0 * p)
}

/// Monte Carlo estimate of [`main_term`]: draw the distance `a` to the
/// nearest obstacle at or left of the origin and solve the vacant strip
/// `(-a, 0]` with failure at `-a`.
pub fn main_term_mc(params: &WalkParams, n_envs: u64, seed: u64) -> Result<SpeedEstimate> {
    if n_envs == 0 {
        return Err(Error::InvalidParameter("n_envs must be >= 1".into()));
    }
    let samples = par::map_range(n_envs, |i| {
        let mut rng = seed::child_rng(seed, i);
        let mut a = 0usize;
        while !sample_with(params, 0, 1, &mut rng).flags()[0] {
            a += 1;
        }
        if a == 0 {
            return 1.0;
        }
        let env = Environment::vacant(-(a as i64) + 1, 0).expect("non-empty strip");
        window_crossing_expectation(&env).expect("origin in window")
    });
    let m: Moments = samples.into_iter().collect();
    Ok(SpeedEstimate::from_inverse(m.mean(), m.stderr().unwrap_or(0.0), n_envs, Method::IidMc, seed, *params))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuenchedMode {
    /// Independent environments, one crossing expectation each.
    #[default]
    Iid,
    /// One long environment averaged along the sites.
    Ergodic,
}

/// Sample the half-line left of the origin until `need` obstacles are in.
fn extend_left(params: &WalkParams, flags: &mut Vec<bool>, need: usize, rng: &mut seed::Rng) {
    let mut have = flags.iter().filter(|&&o| o).count();
    while have < need {
        let o = sample_with(params, 0, 1, rng).flags()[0];
        have += o as usize;
        flags.push(o);
    }
}

fn env_from_left(flags: &[bool], height: f64) -> Environment {
    let occupied: Vec<bool> = flags.iter().rev().copied().collect();
    Environment::new(-(flags.len() as i64) + 1, occupied, height).expect("non-empty window")
}

/// Quenched inverse speed `E[E^omega(tau_1 | tau_1 < infinity)]`.
pub fn quenched_speed_mc(
    params: &WalkParams,
    n_sites: u64,
    policy: &TruncationPolicy,
    seed: u64,
    mode: QuenchedMode,
) -> Result<SpeedEstimate> {
    if n_sites < 2 {
        return Err(Error::InvalidParameter("n_sites must be >= 2".into()));
    }
    match mode {
        QuenchedMode::Iid => {
            let samples = par::map_range(n_sites, |i| -> Result<f64> {
                let mut rng = seed::child_rng(seed, i);
                let mut flags = Vec::new();
                let mut need = policy.depth_obstacles + 8;
                loop {
                    extend_left(params, &mut flags, need, &mut rng);
                    let env = env_from_left(&flags, params.height());
                    match site_crossing_expectation(&env, policy) {
                        Ok(r) => return Ok(r.value),
                        Err(Error::WindowTooShort { .. }) if need < 1 << 20 => need *= 2,
                        Err(e) => return Err(e),
                    }
                }
            });
            let m: Moments = samples.into_iter().collect::<Result<Vec<_>>>()?.into_iter().collect();
            Ok(SpeedEstimate::from_inverse(m.mean(), m.stderr().unwrap_or(0.0), n_sites, Method::IidMc, seed, *params))
        }
        QuenchedMode::Ergodic => {
            let series = ergodic_series(params, n_sites as usize, policy, seed);
            let (mean, se) = batch_means(&series, 100);
            Ok(SpeedEstimate::from_inverse(mean, se, n_sites, Method::ErgodicMc, seed, *params))
        }
    }
}

/// Crossing expectations `D(k)` at `n` consecutive sites of one
/// environment, after a burn-in of `4 depth` obstacles.
pub fn ergodic_series(params: &WalkParams, n: usize, policy: &TruncationPolicy, seed: u64) -> Vec<f64> {
    let mut rng = seed::rng(seed);
    let mut state = Sweep::CEMETERY;
    let w_occ = params.survival();
    let step = |s: Sweep, rng: &mut seed::Rng| {
        let o = sample_with(params, 0, 1, rng).flags()[0];
        s.next(if o { w_occ } else { 1.0 }).0
    };
    let burn = 4 * policy.depth_obstacles.max(8);
    let mut seen = 0;
    while seen < burn {
        let o = sample_with(params, 0, 1, &mut rng).flags()[0];
        seen += o as usize;
        state = state.next(if o { w_occ } else { 1.0 }).0;
    }
    (0..n)
        .map(|_| {
            state = step(state, &mut rng);
            state.d
        })
        .collect()
}

/// `-log a(k)` for `k` in `[0, y)`, with the sweep started at the window's
/// left end from the constant-potential fixed point of the window average.
pub fn lyapunov_profile(env: &Environment, lambda: f64, y: u64) -> Result<Vec<f64>> {
    if lambda.is_nan() || lambda < 0.0 {
        return Err(Error::InvalidParameter(format!("lambda must be >= 0, got {lambda}")));
    }
    let (start, end) = env.window();
    let last = y as i64 - 1;
    if y == 0 || start > 0 || end < last {
        return Err(Error::OutsideWindow { site: if start > 0 { 0 } else { last }, start, end });
    }
    let w = env.survival_factors(start, last, lambda)?;
    let mean_w = w.iter().sum::<f64>() / w.len() as f64;
    let mut a = fixed_point(mean_w);
    let skip = (-start) as usize;
    let mut out = Vec::with_capacity(y as usize);
    for (i, &wk) in w.iter().enumerate() {
        let c = 0.5 * wk;
        a = c / (1.0 - c * a);
        if i >= skip {
            out.push(-a.ln());
        }
    }
    Ok(out)
}

/// Fixed point of `a -> (w/2) / (1 - (w/2) a)`.
fn fixed_point(w: f64) -> f64 {
    if w >= 1.0 {
        1.0
    } else {
        (1.0 - (1.0 - w * w).sqrt()) / w
    }
}

/// `-(1/y) sum_{k<y} log a(k)`.
pub fn quenched_lyapunov(env: &Environment, lambda: f64, y: u64) -> Result<f64> {
    let prof = lyapunov_profile(env, lambda, y)?;
    Ok(prof.iter().sum::<f64>() / y as f64)
}

/// `log(e^gamma + sqrt(e^{2 gamma} - 1))`.
pub fn constant_lyapunov(gamma: f64) -> f64 {
    let e = gamma.exp();
    (e + (e * e - 1.0).sqrt()).ln()
}

/// Forward-difference grid `lambda = 2^{-k}`, `k` in `coarse..=fine`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DifferenceGrid {
    pub coarse: u32,
    pub fine: u32,
}

impl Default for DifferenceGrid {
    fn default() -> Self {
        Self { coarse: 4, fine: 12 }
    }
}

impl DifferenceGrid {
    pub fn lambdas(&self) -> Vec<f64> {
        (self.coarse..=self.fine).map(|k| (-(k as f64)).exp2()).collect()
    }
}

/// Derivative of the Lyapunov exponent at `0+`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LyapunovDerivative {
    pub inverse: f64,
    /// Batch-means error of the finest extrapolant, combined with the
    /// extrapolation proxy.
    pub stderr: f64,
    pub extrapolation_error: f64,
    /// Forward quotients, coarsest first.
    pub quotients: Vec<f64>,
}

/// Richardson-extrapolated one-sided derivative of `quenched_lyapunov`
/// over `[0, y)` in `env`. Fails with [`Error::Unreliable`] if the forward
/// quotients do not increase as `lambda` shrinks.
pub fn lyapunov_derivative(env: &Environment, y: u64, grid: &DifferenceGrid) -> Result<LyapunovDerivative> {
    if grid.fine < grid.coarse + 2 {
        return Err(Error::InvalidParameter("grid needs at least three levels".into()));
    }
    let base = lyapunov_profile(env, 0.0, y)?;
    let lambdas = grid.lambdas();
    let mut per_level = Vec::with_capacity(lambdas.len());
    for &h in &lambdas {
        let prof = lyapunov_profile(env, h, y)?;
        per_level.push(prof.iter().zip(&base).map(|(a, b)| (a - b) / h).collect::<Vec<f64>>());
    }
    let n = y as f64;
    let quotients: Vec<f64> = per_level.iter().map(|d| d.iter().sum::<f64>() / n).collect();
    let slack = 1e-9 * quotients.last().copied().unwrap_or(1.0).abs().max(1.0);
    if quotients.windows(2).any(|q| q[1] < q[0] - slack) {
        return Err(Error::Unreliable(format!("non-monotone difference quotients {quotients:?}")));
    }
    let r1: Vec<f64> = quotients.windows(2).map(|q| 2.0 * q[1] - q[0]).collect();
    let r2: Vec<f64> = r1.windows(2).map(|r| (4.0 * r[1] - r[0]) / 3.0).collect();
    let k = r2.len();
    let inverse = r2[k - 1];
    let extrapolation_error = if k >= 2 { (r2[k - 1] - r2[k - 2]).abs() } else { 0.0 };
    let l = per_level.len();
    let series: Vec<f64> = (0..y as usize)
        .map(|s| (8.0 * per_level[l - 1][s] - 6.0 * per_level[l - 2][s] + per_level[l - 3][s]) / 3.0)
        .collect();
    let (_, se) = batch_means(&series, 100);
    let se = if se.is_finite() { se } else { 0.0 };
    Ok(LyapunovDerivative {
        inverse,
        stderr: (se * se + extrapolation_error * extrapolation_error).sqrt(),
        extrapolation_error,
        quotients,
    })
}

/// Inverse speed as the derivative of the Lyapunov exponent, on one
/// environment of length `y` sampled with a burn-in margin on the left.
pub fn speed_from_lyapunov(params: &WalkParams, y: u64, grid: &DifferenceGrid, seed: u64) -> Result<SpeedEstimate> {
    if y < 200 {
        return Err(Error::InvalidParameter("y must be >= 200".into()));
    }
    let burn = (200.0 / params.p()).ceil() as usize + 100;
    let mut rng = seed::rng(seed);
    let env = sample_with(params, -(burn as i64), burn + y as usize, &mut rng);
    let d = lyapunov_derivative(&env, y, grid)?;
    Ok(SpeedEstimate::from_inverse(d.inverse, d.stderr, y, Method::LyapunovDerivative, seed, *params).at_distance(y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::sample_environment;

    fn params(p: f64, m: f64) -> WalkParams {
        WalkParams::new(p, m).unwrap()
    }

    /// Dense Gaussian elimination for `h = P(tau_1 < tau_kill)` and
    /// `g = E(tau_1; tau_1 < tau_kill)` on `[start, 0]`, cemetery at
    /// `start - 1`, target `1`.
    fn dense_oracle(env: &Environment) -> f64 {
        let (start, _) = env.window();
        let n = (1 - start) as usize;
        let w: Vec<f64> = (start..=0).map(|x| (-env.potential(x).unwrap()).exp()).collect();
        let solve = |rhs: &[f64]| -> Vec<f64> {
            let mut m = vec![vec![0.0; n + 1]; n];
            for i in 0..n {
                m[i][i] = 1.0;
                if i > 0 {
                    m[i][i - 1] = -0.5 * w[i];
                }
                if i + 1 < n {
                    m[i][i + 1] = -0.5 * w[i];
                }
                m[i][n] = rhs[i];
            }
            for c in 0..n {
                let piv = (c..n).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs())).unwrap();
                m.swap(c, piv);
                for r in 0..n {
                    if r != c {
                        let f = m[r][c] / m[c][c];
                        let pivot = m[c].clone();
                        for (dst, src) in m[r][c..=n].iter_mut().zip(&pivot[c..=n]) {
                            *dst -= f * src;
                        }
                    }
                }
            }
            (0..n).map(|i| m[i][n] / m[i][i]).collect()
        };
        let mut rhs = vec![0.0; n];
        rhs[n - 1] = 0.5 * w[n - 1];
        let h = solve(&rhs);
        let g_rhs: Vec<f64> = (0..n)
            .map(|i| {
                let left = if i > 0 { h[i - 1] } else { 0.0 };
                let right = if i + 1 < n { h[i + 1] } else { 1.0 };
                0.5 * w[i] * (left + right)
            })
            .collect();
        let g = solve(&g_rhs);
        g[n - 1] / h[n - 1]
    }

    #[test]
    fn single_obstacle_window_matches_dense_solve() {
        let env = Environment::new(-2, vec![true, false, false, false], 2.0).unwrap();
        let r = crossing_at_depth(&env, 1, 1e3).unwrap();
        let exact = dense_oracle(&Environment::new(-2, vec![true, false, false], 2.0).unwrap());
        assert!((r.value - exact).abs() < 1e-10);
        assert!(r.error_bound > 0.0);
    }

    #[test]
    fn window_solve_matches_dense_on_random_envs() {
        for s in 0..10 {
            let env = sample_environment(&params(0.3, 1.5), -30 - s, 0, s as u64).unwrap();
            let v = window_crossing_expectation(&env).unwrap();
            let o = dense_oracle(&env);
            assert!((v - o).abs() < 1e-9 * o, "{v} {o}");
        }
    }

    #[test]
    fn full_occupation_gives_constant_potential_speed() {
        for m in [0.5, 1.0, 3.0] {
            let env = Environment::constant(-400, 1, m).unwrap();
            let pol = TruncationPolicy::for_params(&params(1.0, m), 1e-9).unwrap();
            let r = site_crossing_expectation(&env, &pol).unwrap();
            let exact = 1.0 / (1.0 - (-2.0 * m).exp()).sqrt();
            assert!(r.value <= exact + 1e-12 && exact <= r.value + r.error_bound + 1e-12);
            assert!(r.error_bound <= 1e-9);
        }
    }

    #[test]
    fn vacant_window_grows_and_is_flagged() {
        let mut last = 0.0;
        for l in [5, 10, 20, 40] {
            let v = window_crossing_expectation(&Environment::vacant(-l, 1).unwrap()).unwrap();
            assert!(v > last);
            last = v;
        }
        let pol = TruncationPolicy::new(3, 1e-6, 100.0).unwrap();
        assert_eq!(site_crossing_expectation(&Environment::vacant(-50, 1).unwrap(), &pol), Err(Error::NonConvergent));
    }

    #[test]
    fn short_window_is_reported() {
        let env = Environment::new(-3, vec![true, false, false, false], 0.1).unwrap();
        let pol = TruncationPolicy::new(1, 1e-12, 100.0).unwrap();
        assert!(matches!(site_crossing_expectation(&env, &pol), Err(Error::WindowTooShort { found: 1, .. })));
    }

    #[test]
    fn deeper_truncation_stays_in_bracket() {
        let p = params(0.4, 1.0);
        for s in 0..20 {
            let env = sample_environment(&p, -300, 0, 100 + s).unwrap();
            let cap = TruncationPolicy::for_params(&p, 1e-6).unwrap().tail_time_cap;
            let mut prev = crossing_at_depth(&env, 1, cap).unwrap();
            for j in 2..30 {
                let r = crossing_at_depth(&env, j, cap).unwrap();
                assert!(r.value >= prev.value - 1e-12);
                assert!(r.value <= prev.value + prev.error_bound + 1e-9);
                prev = r;
            }
        }
    }

    #[test]
    fn policy_depth_formula() {
        let p = params(0.5, 2.0);
        let pol = TruncationPolicy::for_params(&p, 1e-6).unwrap();
        let j = pol.depth_obstacles;
        assert!(tail_bound(&p, j) < 1e-6 && tail_bound(&p, j - 1) >= 1e-6);
        assert!((tail_bound(&params(1.0, 1.0), 0) - 1.0 / (1.0 - (-1.0f64).exp()).powi(3)).abs() < 1e-12);
    }

    #[test]
    fn main_term_values_and_series() {
        assert_eq!(main_term(&params(1.0, 1.0)), 1.0);
        assert!((main_term(&params(0.5, 1.0)) - 4.0 / 3.0).abs() < 1e-15);
        assert!((main_term(&params(0.25, 1.0)) - 2.5).abs() < 1e-15);
        for k in 1..10 {
            let p = k as f64 / 10.0;
            let mut s = p;
            let mut q = 1.0;
            for a in 1..2000 {
                q *= 1.0 - p;
                s += p * q * (2 * a + 1) as f64 / 3.0;
            }
            assert!((s - main_term(&params(p, 1.0))).abs() < 1e-10);
        }
    }

    #[test]
    fn main_term_mc_matches() {
        let p = params(0.5, 3.0);
        let e = main_term_mc(&p, 20_000, 4).unwrap();
        assert!((e.inverse - 4.0 / 3.0).abs() < 4.0 * e.stderr);
        let one = main_term_mc(&params(1.0, 3.0), 100, 4).unwrap();
        assert_eq!((one.inverse, one.stderr), (1.0, 0.0));
    }

    #[test]
    fn iid_mc_at_full_occupation() {
        let p = params(1.0, 1.0);
        let pol = TruncationPolicy::for_params(&p, 1e-10).unwrap();
        let e = quenched_speed_mc(&p, 50, &pol, 1, QuenchedMode::Iid).unwrap();
        assert!((e.inverse - 1.0 / (1.0 - (-2.0f64).exp()).sqrt()).abs() < 1e-9);
        assert!((e.value * e.inverse - 1.0).abs() < 1e-12);
    }

    #[test]
    fn modes_agree() {
        let p = params(0.5, 2.0);
        let pol = TruncationPolicy::for_params(&p, 1e-7).unwrap();
        let a = quenched_speed_mc(&p, 20_000, &pol, 5, QuenchedMode::Iid).unwrap();
        let b = quenched_speed_mc(&p, 200_000, &pol, 6, QuenchedMode::Ergodic).unwrap();
        let se = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
        assert!((a.inverse - b.inverse).abs() < 4.0 * se, "{} {} {}", a.inverse, b.inverse, se);
    }

    #[test]
    fn iid_is_reproducible() {
        let p = params(0.3, 1.0);
        let pol = TruncationPolicy::for_params(&p, 1e-6).unwrap();
        let a = quenched_speed_mc(&p, 500, &pol, 9, QuenchedMode::Iid).unwrap();
        let b = quenched_speed_mc(&p, 500, &pol, 9, QuenchedMode::Iid).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn lyapunov_constant_potential() {
        for gamma in [0.1, 0.5, 2.0] {
            let env = Environment::constant(-10, 100_000, gamma).unwrap();
            for lambda in [0.0, 0.3] {
                let l = quenched_lyapunov(&env, lambda, 100_000).unwrap();
                assert!((l - constant_lyapunov(gamma + lambda)).abs() < 1e-6);
            }
        }
        let env = Environment::vacant(-10, 100).unwrap();
        assert_eq!(quenched_lyapunov(&env, 0.0, 100).unwrap(), 0.0);
    }

    #[test]
    fn lyapunov_halves_agree() {
        let env = sample_environment(&params(0.5, 1.0), -500, 200_000, 3).unwrap();
        let prof = lyapunov_profile(&env, 0.0, 200_000).unwrap();
        let (a, sa) = batch_means(&prof[..100_000], 50);
        let (b, sb) = batch_means(&prof[100_000..], 50);
        assert!((a - b).abs() <= 3.0 * (sa * sa + sb * sb).sqrt());
    }

    #[test]
    fn derivative_on_constant_potential() {
        let env = Environment::constant(-10, 2000, 0.5).unwrap();
        let d = lyapunov_derivative(&env, 2000, &DifferenceGrid::default()).unwrap();
        assert!((1.0 / d.inverse - (1.0 - (-1.0f64).exp()).sqrt()).abs() < 1e-6);
        let mut last = 0.0;
        for gamma in [0.5, 0.1, 0.02] {
            let env = Environment::constant(-10, 2000, gamma).unwrap();
            let grid = DifferenceGrid { coarse: 8, fine: 16 };
            let v = 1.0 / lyapunov_derivative(&env, 2000, &grid).unwrap().inverse;
            let ratio = v / (2.0 * gamma).sqrt();
            assert!(ratio > last && ratio < 1.0);
            last = ratio;
        }
        assert!(last > 0.98);
    }

    #[test]
    fn derivative_equals_ergodic_average_on_same_environment() {
        let p = params(0.5, 2.0);
        let env = sample_environment(&p, -400, 5000, 2).unwrap();
        let d = lyapunov_derivative(&env, 5000, &DifferenceGrid::default()).unwrap();
        let w = env.survival_factors(-400, 4999, 0.0).unwrap();
        let mut s = Sweep { a: fixed_point(w.iter().sum::<f64>() / w.len() as f64), d: 0.0 };
        let mut total = 0.0;
        for (i, &wk) in w.iter().enumerate() {
            s = s.next(wk).0;
            if i >= 400 {
                total += s.d;
            }
        }
        assert!((d.inverse - total / 5000.0).abs() < 1e-5 * d.inverse, "{} {}", d.inverse, total / 5000.0);
    }
}
