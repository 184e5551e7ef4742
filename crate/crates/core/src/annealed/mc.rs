//! Annealed estimators from sampled environments.
//!
//! Environments are drawn from the product law and reweighted by their
//! crossing probability `Z^omega_{0,y}`, which makes the annealed mean a
//! self-normalized ratio `E[t Z] / E[Z]`.

use serde::Serialize;

use super::{log_origin_half, log_sum_exp, LyapunovPoint};
use crate::environment::{sample_with, WalkParams};
use crate::error::{Error, Result};
use crate::estimate::{Method, SpeedEstimate};
use crate::exact_walk::Sweep;
use crate::{par, seed};

/// Effective sample size below which an estimate is flagged.
pub const ESS_MIN: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnealedMcEstimate {
    pub estimate: SpeedEstimate,
    /// `E_{Q_{0,y}}(tau_y)`.
    pub t_ann: f64,
    pub t_stderr: f64,
    pub ess: f64,
    pub reliable: bool,
    /// `log` of the sample mean of `Z^omega_{0,y}`.
    pub log_z_mean: f64,
    /// Relative standard error of that mean.
    pub z_rel_stderr: f64,
}

/// `(log Z^omega_{0,y}, t_cond)` for one environment on `(0, y)`.
fn crossing_sample(params: &WalkParams, y: u64, rng: &mut seed::Rng) -> (f64, f64) {
    let w_occ = params.survival();
    let env = sample_with(params, 1, (y - 1) as usize, rng);
    let mut s = Sweep::CEMETERY;
    let mut log_h = 0.0;
    let mut t = 1.0;
    for &o in &env.flags()[..(y - 1) as usize] {
        s = s.next(if o { w_occ } else { 1.0 }).0;
        log_h += s.a.ln();
        t += s.d;
    }
    (log_h, t)
}

struct Weighted {
    log_mean: f64,
    rel_se: f64,
    ratio: f64,
    ratio_se: f64,
    ess: f64,
}

fn self_normalize(samples: &[(f64, f64)]) -> Weighted {
    let n = samples.len() as f64;
    let m = samples.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = samples.iter().map(|s| (s.0 - m).exp()).collect();
    let sw: f64 = w.iter().sum();
    let sw2: f64 = w.iter().map(|x| x * x).sum();
    let ratio = w.iter().zip(samples).map(|(w, s)| w * s.1).sum::<f64>() / sw;
    let var = w.iter().zip(samples).map(|(w, s)| (w * (s.1 - ratio)).powi(2)).sum::<f64>() / (sw * sw);
    let mean_w = sw / n;
    let var_w = w.iter().map(|x| (x - mean_w).powi(2)).sum::<f64>() / (n - 1.0);
    Weighted {
        log_mean: m + mean_w.ln(),
        rel_se: (var_w / n).sqrt() / mean_w,
        ratio,
        ratio_se: var.sqrt(),
        ess: sw * sw / sw2,
    }
}

/// Self-normalized estimate of `E_{Q_{0,y}}(tau_y) / y` from `n_env`
/// environments.
pub fn annealed_speed_mc(params: &WalkParams, y: u64, n_env: u64, seed: u64) -> Result<AnnealedMcEstimate> {
    if y < 1 {
        return Err(Error::InvalidParameter("y must be >= 1".into()));
    }
    if n_env < 1000 {
        return Err(Error::InvalidParameter("n_env must be >= 1000".into()));
    }
    let samples = par::map_range(n_env, |i| crossing_sample(params, y, &mut seed::child_rng(seed, i)));
    let wt = self_normalize(&samples);
    let yf = y as f64;
    let estimate =
        SpeedEstimate::from_inverse(wt.ratio / yf, wt.ratio_se / yf, n_env, Method::ImportanceMc, seed, *params)
            .at_distance(y);
    Ok(AnnealedMcEstimate {
        estimate,
        t_ann: wt.ratio,
        t_stderr: wt.ratio_se,
        ess: wt.ess,
        reliable: wt.ess >= ESS_MIN,
        log_z_mean: wt.log_mean + log_origin_half(params),
        z_rel_stderr: wt.rel_se,
    })
}

/// Monte Carlo `-(1/y) log Z_{0,y}` with a delta-method error.
pub fn annealed_lyapunov_mc(params: &WalkParams, ys: &[u64], n_env: u64, seed: u64) -> Result<Vec<LyapunovPoint>> {
    ys.iter()
        .map(|&y| {
            let e = annealed_speed_mc(params, y, n_env, seed)?;
            Ok(LyapunovPoint { y, beta: -e.log_z_mean / y as f64, stderr: e.z_rel_stderr / y as f64 })
        })
        .collect()
}

/// The measure `Q_y` (walk free to go left of the origin) against
/// `Q_{0,y}`, on environments with a vacant-or-random left window of
/// `left` sites and a failure boundary beyond it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RestrictionRatio {
    pub y: u64,
    pub left: u64,
    /// `Z_{0,y} / Z_y`.
    pub z_ratio: f64,
    pub t_restricted: f64,
    pub t_free: f64,
}

pub fn restriction_ratio(params: &WalkParams, y: u64, left: u64, n_env: u64, seed: u64) -> Result<RestrictionRatio> {
    if y < 1 || n_env < 2 {
        return Err(Error::InvalidParameter("y >= 1 and n_env >= 2 required".into()));
    }
    let w_occ = params.survival();
    let pairs = par::map_range(n_env, |i| {
        let mut rng = seed::child_rng(seed, i);
        let env = sample_with(params, -(left as i64), (left + y) as usize, &mut rng);
        let w: Vec<f64> = env.flags().iter().map(|&o| if o { w_occ } else { 1.0 }).collect();
        let origin = left as usize;
        let mut s = Sweep::CEMETERY;
        let (mut log_free, mut t_free) = (0.0, 0.0);
        for (k, &wk) in w.iter().enumerate() {
            s = s.next(wk).0;
            if k >= origin {
                log_free += s.a.ln();
                t_free += s.d;
            }
        }
        let mut s = Sweep::CEMETERY;
        let (mut log_r, mut t_r) = ((0.5 * w[origin]).ln(), 1.0);
        for &wk in &w[origin + 1..] {
            s = s.next(wk).0;
            log_r += s.a.ln();
            t_r += s.d;
        }
        ((log_r, t_r), (log_free, t_free))
    });
    let restricted: Vec<(f64, f64)> = pairs.iter().map(|p| p.0).collect();
    let free: Vec<(f64, f64)> = pairs.iter().map(|p| p.1).collect();
    let n = n_env as f64;
    let lr = log_sum_exp(restricted.iter().map(|s| s.0)) - n.ln();
    let lf = log_sum_exp(free.iter().map(|s| s.0)) - n.ln();
    Ok(RestrictionRatio {
        y,
        left,
        z_ratio: (lr - lf).exp(),
        t_restricted: self_normalize(&restricted).ratio,
        t_free: self_normalize(&free).ratio,
    })
}
