//! Annealed crossing: the environment is averaged jointly with the path.
//!
//! Under `Q_{0,y}` an interior configuration `omega` on `(0, y)` has weight
//! proportional to `P(omega) Z^omega_{0,y}`, where the value at the origin
//! is averaged out, so `Z^omega_{0,y} = E[e^{-V(0)}] / 2 * h(1)`.

mod gaps;
mod logseries;
mod mc;

pub use gaps::{gap_statistics, GapDiagnostics};
pub use logseries::{
    mu_bracket, solve_q, u_n_estimate, u_n_series, ComparisonDistributions, LogSeries, LogSeriesModel, MuBracket,
    SolveOptions, UEstimate, UMode,
};
pub use mc::{
    annealed_lyapunov_mc, annealed_speed_mc, restriction_ratio, AnnealedMcEstimate, RestrictionRatio, ESS_MIN,
};

use std::io::{self, Write};

use serde::Serialize;

use crate::environment::{GapVector, WalkParams};
use crate::error::{Error, Result};
use crate::estimate::{Method, SpeedEstimate};
use crate::exact_walk::{crossing_factors, Sweep};
use crate::par;

/// Largest `y` enumerated by default (`2^21` configurations).
pub const DEFAULT_CAP: u64 = 22;

/// Sites fixed per parallel task.
const PREFIX: usize = 10;

/// One interior configuration. Bit `x - 1` of `mask` is set when site `x`
/// is occupied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnealedRow {
    pub mask: u32,
    /// Normalized weight under `Q_{0,y}`.
    pub weight: f64,
    /// `log Z^omega_{0,y}` with the origin averaged.
    pub log_z: f64,
    pub t_cond: f64,
}

impl AnnealedRow {
    pub fn gaps(&self, y: u64) -> GapVector {
        mask_to_gaps(self.mask, y)
    }
}

fn mask_to_gaps(mask: u32, y: u64) -> GapVector {
    let mut gaps = Vec::new();
    let mut last = 0;
    for x in 1..y {
        if mask >> (x - 1) & 1 == 1 {
            gaps.push(x - last);
            last = x;
        }
    }
    gaps.push(y - last);
    GapVector::new(gaps).expect("positive gaps")
}

/// Exact `Q_{0,y}` over all interior configurations of positive
/// probability, sorted by mask.
#[derive(Debug, Clone, Serialize)]
pub struct AnnealedTable {
    pub y: u64,
    pub params: WalkParams,
    pub rows: Vec<AnnealedRow>,
    pub z0y: f64,
    pub log_z0y: f64,
    pub t_ann: f64,
    pub beta_hat: f64,
}

impl AnnealedTable {
    /// CSV with columns `gaps,weight,t_cond`; gaps dash-separated.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "gaps,weight,t_cond")?;
        for r in &self.rows {
            writeln!(out, "{},{:e},{:e}", r.gaps(self.y).dashed(), r.weight, r.t_cond)?;
        }
        Ok(())
    }
}

/// `log(E[e^{-V(0)}] / 2)`.
fn log_origin_half(params: &WalkParams) -> f64 {
    let p = params.p();
    (0.5 * (p * params.survival() + (1.0 - p))).ln()
}

struct Frame {
    state: Sweep,
    log_h: f64,
    sum_d: f64,
    log_prob: f64,
    mask: u32,
}

fn descend(x: u64, y: u64, f: Frame, ctx: &Ctx, out: &mut Vec<Leaf>) {
    if x == y {
        out.push(Leaf { mask: f.mask, log_prob: f.log_prob, log_h: f.log_h, t: 1.0 + f.sum_d });
        return;
    }
    for occ in [false, true] {
        let lp = f.log_prob + if occ { ctx.ln_p } else { ctx.ln_1mp };
        if lp == f64::NEG_INFINITY {
            continue;
        }
        let (s, _) = f.state.next(if occ { ctx.w_occ } else { 1.0 });
        let frame = Frame {
            state: s,
            log_h: f.log_h + s.a.ln(),
            sum_d: f.sum_d + s.d,
            log_prob: lp,
            mask: f.mask | (occ as u32) << (x - 1),
        };
        descend(x + 1, y, frame, ctx, out);
    }
}

struct Leaf {
    mask: u32,
    log_prob: f64,
    log_h: f64,
    t: f64,
}

struct Ctx {
    w_occ: f64,
    ln_p: f64,
    ln_1mp: f64,
}

fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Enumerate `Q_{0,y}` with the default cap.
pub fn enumerate_annealed(params: &WalkParams, y: u64) -> Result<AnnealedTable> {
    enumerate_annealed_capped(params, y, DEFAULT_CAP)
}

pub fn enumerate_annealed_capped(params: &WalkParams, y: u64, cap: u64) -> Result<AnnealedTable> {
    if y < 1 {
        return Err(Error::InvalidParameter("y must be >= 1".into()));
    }
    if y > cap || y > 32 {
        return Err(Error::CapExceeded { y, cap: cap.min(32) });
    }
    let ctx = Ctx { w_occ: params.survival(), ln_p: params.p().ln(), ln_1mp: (1.0 - params.p()).ln() };
    let interior = (y - 1) as usize;
    let prefix = interior.min(PREFIX);
    let chunks = par::map_range(1 << prefix, |bits| {
        let mut f = Frame { state: Sweep::CEMETERY, log_h: 0.0, sum_d: 0.0, log_prob: 0.0, mask: bits as u32 };
        for x in 1..=prefix as u64 {
            let occ = bits >> (x - 1) & 1 == 1;
            f.log_prob += if occ { ctx.ln_p } else { ctx.ln_1mp };
            f.state = f.state.next(if occ { ctx.w_occ } else { 1.0 }).0;
            f.log_h += f.state.a.ln();
            f.sum_d += f.state.d;
        }
        let mut out = Vec::new();
        if f.log_prob > f64::NEG_INFINITY {
            descend(prefix as u64 + 1, y, f, &ctx, &mut out);
        }
        out
    });
    let mut leaves: Vec<Leaf> = chunks.into_iter().flatten().collect();
    leaves.sort_unstable_by_key(|l| l.mask);

    let origin = log_origin_half(params);
    let log_total = log_sum_exp(leaves.iter().map(|l| l.log_prob + l.log_h));
    let log_z0y = log_total + origin;
    let mut t_ann = 0.0;
    let rows: Vec<AnnealedRow> = leaves
        .iter()
        .map(|l| {
            let weight = (l.log_prob + l.log_h - log_total).exp();
            t_ann += weight * l.t;
            AnnealedRow { mask: l.mask, weight, log_z: l.log_h + origin, t_cond: l.t }
        })
        .collect();
    Ok(AnnealedTable { y, params: *params, rows, z0y: log_z0y.exp(), log_z0y, t_ann, beta_hat: -log_z0y / y as f64 })
}

/// Normalized `Q_{0,y}` weights from the gap-product formula, indexed by
/// mask, together with the formula's total mass `Z_{0,y}`.
pub fn product_formula_weights(params: &WalkParams, y: u64) -> Result<(Vec<(u32, f64)>, f64)> {
    if !(1..=26).contains(&y) {
        return Err(Error::CapExceeded { y, cap: 26 });
    }
    let p = params.p();
    let m = params.height();
    let ln_p = p.ln();
    let ln_1mp = (1.0 - p).ln();
    let prefactor = (m.exp() * (1.0 - p) / p + 1.0).ln();
    let n = 1u32 << (y - 1);
    let logs: Vec<(u32, f64)> = par::map_range(n as u64, |mask| {
        let mask = mask as u32;
        let gaps = mask_to_gaps(mask, y);
        let factors = crossing_factors(gaps.gaps(), m);
        let mut lw = prefactor;
        for (&r, f) in gaps.gaps().iter().zip(factors) {
            lw += ln_p + f.ln();
            if r > 1 {
                lw += (r - 1) as f64 * ln_1mp;
            }
        }
        (mask, lw)
    })
    .into_iter()
    .filter(|r| r.1 > f64::NEG_INFINITY)
    .collect();
    let log_total = log_sum_exp(logs.iter().map(|r| r.1));
    Ok((logs.iter().map(|&(k, lw)| (k, (lw - log_total).exp())).collect(), log_total.exp()))
}

/// Total variation distance between a table and mask-indexed weights.
pub fn total_variation(table: &AnnealedTable, weights: &[(u32, f64)]) -> f64 {
    use std::collections::HashMap;
    let mut diff: HashMap<u32, f64> = table.rows.iter().map(|r| (r.mask, r.weight)).collect();
    for &(k, w) in weights {
        *diff.entry(k).or_insert(0.0) -= w;
    }
    0.5 * diff.values().map(|d| d.abs()).sum::<f64>()
}

/// `E_{Q_{0,y}}(tau_y) / y` for each `y`.
pub fn annealed_speed_exact(params: &WalkParams, ys: &[u64]) -> Result<Vec<SpeedEstimate>> {
    ys.iter()
        .map(|&y| {
            let t = enumerate_annealed(params, y)?;
            let n = t.rows.len() as u64;
            Ok(SpeedEstimate::from_inverse(t.t_ann / y as f64, 0.0, n, Method::ExactEnumeration, 0, *params)
                .at_distance(y))
        })
        .collect()
}

/// `-(1/y) log Z_{0,y}` at one distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapunovPoint {
    pub y: u64,
    pub beta: f64,
    pub stderr: f64,
}

/// Exact annealed Lyapunov exponents by enumeration.
pub fn annealed_lyapunov(params: &WalkParams, ys: &[u64]) -> Result<Vec<LyapunovPoint>> {
    ys.iter()
        .map(|&y| {
            let t = enumerate_annealed(params, y)?;
            Ok(LyapunovPoint { y, beta: t.beta_hat, stderr: 0.0 })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::Environment;
    use crate::exact_walk::solve_crossing;

    fn params(p: f64, m: f64) -> WalkParams {
        WalkParams::new(p, m).unwrap()
    }

    #[test]
    fn single_step() {
        let pr = params(0.3, 1.5);
        let t = enumerate_annealed(&pr, 1).unwrap();
        assert_eq!(t.rows.len(), 1);
        let expect = 0.5 * (0.3 * (-1.5f64).exp() + 0.7);
        assert!((t.z0y - expect).abs() < 1e-15);
        assert_eq!(t.t_ann, 1.0);
    }

    #[test]
    fn rows_match_direct_solves() {
        let pr = params(0.4, 1.2);
        let y = 9;
        let t = enumerate_annealed(&pr, y).unwrap();
        assert_eq!(t.rows.len(), 1 << (y - 1));
        let origin = 0.5 * (0.4 * (-1.2f64).exp() + 0.6);
        let mut z = 0.0;
        for r in &t.rows {
            let mut flags: Vec<bool> = (0..=y as usize).map(|x| x > 0 && r.mask >> (x - 1) & 1 == 1).collect();
            flags[y as usize] = false;
            let env = Environment::new(0, flags, 1.2).unwrap();
            let sol = solve_crossing(&env, y).unwrap();
            let z_omega = origin * (sol.log_z - (0.5f64).ln()).exp();
            assert!((r.log_z - z_omega.ln()).abs() < 1e-12);
            assert!((r.t_cond - sol.t_cond).abs() < 1e-12 * sol.t_cond);
            let occ = r.mask.count_ones() as i32;
            z += 0.4f64.powi(occ) * 0.6f64.powi(y as i32 - 1 - occ) * z_omega;
        }
        assert!((t.z0y - z).abs() < 1e-14 * z);
        let sum: f64 = t.rows.iter().map(|r| r.weight).sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!(t.z0y > 0.0 && t.z0y < 1.0 && t.beta_hat > 0.0);
    }

    #[test]
    fn formula_matches_enumeration() {
        for (p, m) in [(0.5, 1.0), (0.3, 0.5), (0.6, 2.0), (0.1, 3.0)] {
            for y in [1, 2, 3, 6, 10] {
                let pr = params(p, m);
                let t = enumerate_annealed(&pr, y).unwrap();
                let (w, z) = product_formula_weights(&pr, y).unwrap();
                assert!(total_variation(&t, &w) < 1e-12, "p={p} M={m} y={y}");
                assert!((z - t.z0y).abs() < 1e-12 * t.z0y);
            }
        }
    }

    #[test]
    fn full_occupation_limit() {
        // vacancies carry relative weight ~ e^M (1 - p) y, so M must stay moderate
        let pr = params(1.0 - 1e-9, 5.0);
        for y in [3, 8, 12] {
            let t = enumerate_annealed(&pr, y).unwrap();
            let env = Environment::constant(0, y as i64, 5.0).unwrap();
            let direct = solve_crossing(&env, y).unwrap().t_cond;
            assert!((t.t_ann - direct).abs() < 1e-5 * direct);
            assert!((t.t_ann / y as f64 - 1.0).abs() < 0.02);
        }
        let t = enumerate_annealed(&params(1.0, 1.0), 6).unwrap();
        assert_eq!(t.rows.len(), 1);
    }

    #[test]
    fn constant_potential_exponent() {
        let t = enumerate_annealed(&params(1.0, 2.0), 20).unwrap();
        let exact = crate::quenched::constant_lyapunov(2.0);
        assert!((t.beta_hat - exact).abs() < 1e-3, "{} {}", t.beta_hat, exact);
    }

    #[test]
    fn cap_is_enforced() {
        assert_eq!(enumerate_annealed(&params(0.5, 1.0), 23).unwrap_err(), Error::CapExceeded { y: 23, cap: 22 });
    }

    #[test]
    fn csv_rows() {
        let t = enumerate_annealed(&params(0.5, 1.0), 3).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "gaps,weight,t_cond");
        assert!(lines[1].starts_with("3,"));
        assert!(lines.iter().any(|l| l.starts_with("1-1-1,")));
    }
}
