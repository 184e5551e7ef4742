//! Exact computations for the killed walk in one fixed environment.
//!
//! The hitting probability `h(x) = P^x(tau_y < tau_0)` solves a tridiagonal
//! system. Rather than storing `h` directly (it decays like `e^{-beta y}`),
//! the solver eliminates left to right through the one-site crossing
//! probabilities `a(x) = h(x) / h(x+1)`, which stay in `(0, 1)`, and keeps
//! `log h` as a running sum. The same sweep yields the Doob-transformed
//! step probabilities and the conditioned one-site crossing times, so all
//! conditioned expectations are computed from positive quantities only.

use std::io::{self, Write};

use num_rational::Ratio;
use serde::Serialize;

use crate::environment::{Environment, GapVector};
use crate::error::{Error, Result};

/// `P^k(tau_n < tau_0)` for the simple symmetric walk: `k / n`.
pub fn ruin_probability(k: i64, n: i64) -> Result<Ratio<i64>> {
    if n < 1 || !(0..=n).contains(&k) {
        return Err(Error::InvalidParameter(format!("need 0 <= k <= n, n >= 1; got k={k}, n={n}")));
    }
    Ok(Ratio::new(k, n))
}

/// `E^k(tau_n; tau_n < tau_0) = k (n - k) (n + k) / (3n)` for the simple
/// symmetric walk started at `1 <= k <= n - 1`.
pub fn restricted_crossing_time(k: i64, n: i64) -> Result<Ratio<i64>> {
    if !(1..n).contains(&k) {
        return Err(Error::InvalidParameter(format!("need 1 <= k <= n-1; got k={k}, n={n}")));
    }
    let num = k as i128 * (n - k) as i128 * (n + k) as i128;
    let den = 3 * n as i128;
    let num = i64::try_from(num).map_err(|_| Error::InvalidParameter("n too large".into()))?;
    Ok(Ratio::new(num, den as i64))
}

/// Left-to-right elimination state after processing one site.
///
/// `a` is the probability of stepping from the current site to its right
/// neighbour before hitting the left boundary, and `d` is the expected
/// time of that crossing under the conditioned (Doob-transformed) law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Sweep {
    pub a: f64,
    pub d: f64,
}

impl Sweep {
    /// State left of an absorbing (failure) site.
    pub const CEMETERY: Sweep = Sweep { a: 0.0, d: 0.0 };

    /// Advance by one site whose survival factor is `w`. Returns the new
    /// state and the conditioned probability of stepping right.
    #[inline]
    pub fn next(self, w: f64) -> (Sweep, f64) {
        let c = 0.5 * w;
        let back = c * self.a;
        let right = 1.0 - back;
        (Sweep { a: c / right, d: (1.0 + back * self.d) / right }, right)
    }
}

/// Conditioned hitting data of the killed walk on `[0, y]`, with `0` a
/// failure boundary (the return time `tau_0`) and `y` the target.
#[derive(Debug, Clone)]
pub struct CrossingSolution {
    pub y: u64,
    /// `h(x) = P^{omega,x}(tau_y < tau_0)`; may underflow to 0 (see `log_h`).
    pub h: Vec<f64>,
    pub log_h: Vec<f64>,
    /// `g(x) = E^{omega,x}(tau_y; tau_y < tau_0)`.
    pub g: Vec<f64>,
    /// `g(x) / h(x)`: conditioned expected time to reach `y` from `x >= 1`.
    pub cond_time: Vec<f64>,
    /// Conditioned probability of stepping right from `x` (`1` at `x = 0, 1`).
    pub step_right: Vec<f64>,
    /// `Z^omega_{0,y} = P^omega(tau_y < tau_0)` from the origin.
    pub z: f64,
    pub log_z: f64,
    /// `E_{Q^omega_{0,y}}(tau_y)`.
    pub t_cond: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CrossingSummary {
    pub y: u64,
    pub z: f64,
    pub log_z: f64,
    pub t_cond: f64,
}

/// Solve the hitting and conditioned-time systems on `[0, y]`.
pub fn solve_crossing(env: &Environment, y: u64) -> Result<CrossingSolution> {
    if y < 1 {
        return Err(Error::InvalidParameter("y must be >= 1".into()));
    }
    let yi = y as i64;
    if !env.contains(0) || !env.contains(yi) {
        let (start, end) = env.window();
        return Err(Error::OutsideWindow { site: if env.contains(0) { yi } else { 0 }, start, end });
    }
    let w = env.survival_factors(0, yi - 1, 0.0)?;
    let n = y as usize;

    let mut a = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut step_right = vec![1.0; n + 1];
    let mut state = Sweep::CEMETERY;
    for x in 1..n {
        let (next, right) = state.next(w[x]);
        if next.a <= 0.0 {
            return Err(Error::Singular { site: x as i64 });
        }
        state = next;
        a[x] = next.a;
        d[x] = next.d;
        step_right[x] = right;
    }
    step_right[n] = 0.0;

    let mut log_h = vec![0.0; n + 1];
    let mut cond_time = vec![0.0; n + 1];
    for x in (1..n).rev() {
        log_h[x] = log_h[x + 1] + a[x].ln();
        cond_time[x] = cond_time[x + 1] + d[x];
    }
    log_h[0] = f64::NEG_INFINITY;

    let log_z = (0.5 * w[0]).ln() + log_h[1];
    if !log_z.is_finite() {
        return Err(Error::Singular { site: 0 });
    }
    let h: Vec<f64> = log_h.iter().map(|l| l.exp()).collect();
    let g = h.iter().zip(&cond_time).map(|(h, t)| h * t).collect();
    Ok(CrossingSolution { y, h, log_h, g, t_cond: 1.0 + cond_time[1], cond_time, step_right, z: log_z.exp(), log_z })
}

impl CrossingSolution {
    pub fn summary(&self) -> CrossingSummary {
        CrossingSummary { y: self.y, z: self.z, log_z: self.log_z, t_cond: self.t_cond }
    }

    /// CSV with columns `site,h,g`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "site,h,g")?;
        for (x, (h, g)) in self.h.iter().zip(&self.g).enumerate() {
            writeln!(out, "{x},{h:e},{g:e}")?;
        }
        Ok(())
    }
}

/// `F_M(ell, r, u)`: probability of crossing a vacant gap of length `r`
/// that starts at an obstacle, given the previous gap `ell` and the
/// previous crossing probability `u`. `ell = 0` means the gap starts at
/// the origin with nothing behind it.
pub fn f_m(ell: u64, r: u64, u: f64, height: f64) -> f64 {
    debug_assert!(r >= 1);
    let survive = (-height).exp();
    let base = survive / (2.0 * r as f64);
    if ell == 0 {
        return base;
    }
    // 1 - e^{-M}(1 - delta) written as (1 - e^{-M}) + e^{-M} delta
    let delta = 0.5 / r as f64 + (1.0 - u) / (2.0 * ell as f64);
    base / (-(-height).exp_m1() + survive * delta)
}

/// One step of the gap-to-gap crossing recursion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecursionState {
    /// Probability of reaching the `index`-th obstacle from the previous
    /// one before returning to the origin.
    pub u: f64,
    /// Length of the gap preceding this one (`0` for the first).
    pub last_gap: u64,
    pub index: usize,
}

/// Run `u_1 = e^{-v0} / (2 r_1)`, `u_n = F_M(r_{n-1}, r_n, u_{n-1})`.
///
/// The origin is absorbing, so the step to `u_2` sees `u = 0` in place of
/// `u_1`; `u_1` only enters the product `z = u_1 u_2 ... u_n`.
pub fn run_recursion(gaps: &GapVector, v0: f64, height: f64) -> Vec<RecursionState> {
    let g = gaps.gaps();
    let factors = crossing_factors(g, height);
    let mut out = Vec::with_capacity(g.len());
    out.push(RecursionState { u: (-v0).exp() / (2.0 * g[0] as f64), last_gap: 0, index: 1 });
    for i in 1..g.len() {
        out.push(RecursionState { u: factors[i], last_gap: g[i - 1], index: i + 1 });
    }
    out
}

/// `F_M(r_{i-1}, r_i, u_{i-1})` for `i = 1..n` with `r_0 = 0` and the
/// origin occupied: the first factor is `e^{-M} / (2 r_1)`, and the
/// second sees `u = 0` because a return to the origin ends the walk.
pub fn crossing_factors(gaps: &[u64], height: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(gaps.len());
    let mut behind = 0.0;
    for (i, &r) in gaps.iter().enumerate() {
        let ell = if i == 0 { 0 } else { gaps[i - 1] };
        let f = f_m(ell, r, behind, height);
        out.push(f);
        behind = if i == 0 { 0.0 } else { f };
    }
    out
}

/// Gap-based bounds on `E_{Q^omega_{0,y}}(tau_y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossingBounds {
    /// `(1/3) sum r_j^2`.
    pub lower: f64,
    /// `(1/(3(1 - e^{-M}))) sum r_j^2`.
    pub upper: f64,
    /// `1 + 2 y^2`.
    pub cap: f64,
}

pub fn crossing_time_bounds(gaps: &GapVector, height: f64) -> CrossingBounds {
    let s = gaps.sum_of_squares();
    let y = gaps.total() as f64;
    CrossingBounds { lower: s / 3.0, upper: s / (3.0 * -(-height).exp_m1()), cap: 1.0 + 2.0 * y * y }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{sample_environment, WalkParams};

    /// Dense tridiagonal elimination of `h` and `g` on `[0, y]`; no
    /// log-domain tricks.
    fn thomas_oracle(env: &Environment, y: usize) -> (Vec<f64>, Vec<f64>) {
        let w: Vec<f64> = (0..=y).map(|x| (-env.potential(x as i64).unwrap()).exp()).collect();
        let solve = |rhs: &dyn Fn(usize) -> f64, right: f64| -> Vec<f64> {
            // unknowns x = 1..y-1: v(x) - (w/2)(v(x-1) + v(x+1)) = rhs(x)
            let n = y - 1;
            let mut cp = vec![0.0; n];
            let mut dp = vec![0.0; n];
            for i in 0..n {
                let x = i + 1;
                let lo = if i > 0 { -0.5 * w[x] } else { 0.0 };
                let up = if x == y - 1 { 0.0 } else { -0.5 * w[x] };
                let mut r = rhs(x);
                if x == y - 1 {
                    r += 0.5 * w[x] * right;
                }
                let denom = 1.0 - lo * if i > 0 { cp[i - 1] } else { 0.0 };
                cp[i] = up / denom;
                dp[i] = (r - lo * if i > 0 { dp[i - 1] } else { 0.0 }) / denom;
            }
            let mut v = vec![0.0; y + 1];
            v[y] = right;
            for i in (0..n).rev() {
                v[i + 1] = dp[i] - cp[i] * v[i + 2];
            }
            v
        };
        let h = solve(&|_| 0.0, 1.0);
        let g = solve(&|x| 0.5 * w[x] * (h[x - 1] + h[x + 1]), 0.0);
        (h, g)
    }

    #[test]
    fn ruin_values() {
        assert_eq!(ruin_probability(1, 2).unwrap(), Ratio::new(1, 2));
        assert_eq!(ruin_probability(0, 5).unwrap(), Ratio::new(0, 1));
        assert_eq!(ruin_probability(5, 5).unwrap(), Ratio::new(1, 1));
        assert_eq!(ruin_probability(3, 7).unwrap(), Ratio::new(3, 7));
        assert!(ruin_probability(8, 7).is_err());
        assert!(ruin_probability(0, 0).is_err());
    }

    #[test]
    fn restricted_crossing_examples() {
        assert_eq!(restricted_crossing_time(1, 2).unwrap(), Ratio::new(1, 2));
        assert_eq!(restricted_crossing_time(2, 4).unwrap(), Ratio::new(2, 1));
        assert!(restricted_crossing_time(0, 4).is_err());
        assert!(restricted_crossing_time(4, 4).is_err());
    }

    #[test]
    fn vacant_reduces_to_simple_walk() {
        for y in 1..30u64 {
            let env = Environment::vacant(0, y as i64).unwrap();
            let sol = solve_crossing(&env, y).unwrap();
            for x in 0..=y as usize {
                assert!((sol.h[x] - x as f64 / y as f64).abs() < 1e-13);
            }
            let expected = if y == 1 {
                1.0
            } else {
                let r = restricted_crossing_time(1, y as i64).unwrap();
                1.0 + (*r.numer() as f64 / *r.denom() as f64) * y as f64
            };
            assert!((sol.t_cond - expected).abs() < 1e-10 * expected, "y={y}");
            assert!((sol.t_cond - (y * y + 2) as f64 / 3.0).abs() < 1e-9 * sol.t_cond);
        }
    }

    #[test]
    fn single_step() {
        for v0 in [0.0, 1.3] {
            let env = Environment::from_values(0, &[v0, v0]).unwrap();
            let sol = solve_crossing(&env, 1).unwrap();
            assert!((sol.z - 0.5 * (-v0).exp()).abs() < 1e-15);
            assert_eq!(sol.t_cond, 1.0);
        }
    }

    #[test]
    fn matches_dense_elimination() {
        let params = WalkParams::new(0.35, 1.2).unwrap();
        for seed in 0..20 {
            let y = 5 + 7 * seed as usize;
            let env = sample_environment(&params, 0, y as i64, seed).unwrap();
            let sol = solve_crossing(&env, y as u64).unwrap();
            let (h, g) = thomas_oracle(&env, y);
            for x in 1..y {
                assert!((sol.h[x] - h[x]).abs() <= 1e-12 * h[x].max(1e-300), "h x={x}");
                assert!((sol.g[x] - g[x]).abs() <= 1e-10 * g[x].max(1e-300), "g x={x}");
            }
            let t = 1.0 + g[1] / h[1];
            assert!((sol.t_cond - t).abs() < 1e-9 * t);
            let z = 0.5 * (-env.potential(0).unwrap()).exp() * h[1];
            assert!((sol.z - z).abs() < 1e-12 * z);
        }
    }

    #[test]
    fn invariants_hold() {
        let params = WalkParams::new(0.5, 2.0).unwrap();
        let env = sample_environment(&params, 0, 80, 3).unwrap();
        let sol = solve_crossing(&env, 80).unwrap();
        assert_eq!(sol.h[0], 0.0);
        assert_eq!(sol.h[80], 1.0);
        assert!(sol.h.iter().all(|&h| (0.0..=1.0).contains(&h)));
        assert!(sol.g.iter().all(|&g| g >= 0.0));
        assert_eq!(sol.g[0], 0.0);
        assert_eq!(sol.g[80], 0.0);
        assert!(sol.t_cond >= 80.0);
    }

    #[test]
    fn huge_height_is_log_safe() {
        let params = WalkParams::new(0.9, 300.0).unwrap();
        let env = sample_environment(&params, 0, 400, 1).unwrap();
        let sol = solve_crossing(&env, 400).unwrap();
        assert_eq!(sol.z, 0.0);
        assert!(sol.log_z.is_finite() && sol.log_z < -1e4);
        assert!(sol.t_cond.is_finite());
    }

    #[test]
    fn underflowing_survival_is_singular() {
        let env = Environment::constant(0, 5, 800.0).unwrap();
        assert!(matches!(solve_crossing(&env, 5), Err(Error::Singular { .. })));
    }

    #[test]
    fn window_must_cover_target() {
        let env = Environment::vacant(0, 5).unwrap();
        assert!(solve_crossing(&env, 6).is_err());
        assert!(solve_crossing(&env, 0).is_err());
    }

    #[test]
    fn f_m_examples() {
        for m in [0.3f64, 1.0, 4.0] {
            for r in [1, 2, 17] {
                assert_eq!(f_m(0, r, 0.0, m), (-m).exp() / (2.0 * r as f64));
            }
        }
        assert!((f_m(1, 1, 1.0, 1e-14) - 1.0).abs() < 1e-12);
        assert!((f_m(1, 1, 1.0, 0.0) - 1.0).abs() < 1e-15);
        for m in [0.5f64, 1.0, 2.0] {
            let limit = (-m).exp() / (2.0e4 * -(-m).exp_m1());
            for u in [0.0, 0.5, 1.0] {
                let v = f_m(10_000, 10_000, u, m);
                assert!((v / limit - 1.0).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn f_m_sandwich() {
        for m in [0.2f64, 1.0, 3.0] {
            let kill = -(-m).exp_m1();
            for ell in 1..20 {
                for r in 1..20 {
                    for u in [0.0, 0.3, 1.0] {
                        let f = f_m(ell, r, u, m);
                        let base = f_m(0, r, 0.0, m);
                        assert!(base <= f * (1.0 + 1e-15) && f <= base / kill * (1.0 + 1e-15));
                    }
                }
            }
        }
    }

    #[test]
    fn recursion_matches_solver() {
        let gaps: GapVector = "2,3".parse().unwrap();
        let m = 1.0;
        let states = run_recursion(&gaps, m, m);
        let env = Environment::from_gaps(&gaps, m, true, false).unwrap();
        // u_2 = P^{x_1}(tau_{x_2} < tau_0)
        let sol = solve_crossing(&env, 5).unwrap();
        assert!((states[1].u - sol.h[2]).abs() < 1e-12);
        let sol1 = solve_crossing(&env, 2).unwrap();
        assert!((states[0].u - sol1.z).abs() < 1e-15);

        let single = run_recursion(&"7".parse().unwrap(), 0.0, 2.0);
        assert_eq!(single.len(), 1);
        assert!((single[0].u - 1.0 / 14.0).abs() < 1e-16);
    }

    #[test]
    fn every_factor_matches_solver() {
        let params = WalkParams::new(0.3, 1.0).unwrap();
        for seed in 0..30 {
            for m in [0.5, 2.0, 4.0] {
                let mut env = sample_environment(&params, 0, 60, seed).unwrap();
                env = Environment::new(0, env.flags().to_vec(), m).unwrap();
                let gaps = env.to_gaps(60).unwrap();
                let sol = solve_crossing(&env, 60).unwrap();
                let states = run_recursion(&gaps, env.potential(0).unwrap(), m);
                let mut x = 0;
                for (k, s) in states.iter().enumerate() {
                    let next = x + gaps.gaps()[k] as usize;
                    if k > 0 {
                        let exact = (sol.log_h[x] - sol.log_h[next]).exp();
                        assert!((s.u - exact).abs() < 1e-12, "seed {seed} n {k}: {} vs {exact}", s.u);
                    }
                    x = next;
                }
                let log_z: f64 = states.iter().map(|s| s.u.ln()).sum();
                assert!((log_z - sol.log_z).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn bounds_examples() {
        let b = crossing_time_bounds(&"9".parse().unwrap(), 1.0);
        assert!((b.lower - 27.0).abs() < 1e-12);
        assert!((b.upper - 81.0 / (3.0 * (1.0 - (-1.0f64).exp()))).abs() < 1e-12);
        assert_eq!(b.cap, 163.0);
        let b = crossing_time_bounds(&"4,4,4".parse().unwrap(), 2.0);
        assert!((b.lower - 16.0).abs() < 1e-12);
    }

    #[test]
    fn csv_export() {
        let env = Environment::vacant(0, 2).unwrap();
        let sol = solve_crossing(&env, 2).unwrap();
        let mut buf = Vec::new();
        sol.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("site,h,g\n0,"));
        assert_eq!(text.lines().count(), 4);
    }
}
