//! Exact sampling of paths under the conditioned measure `Q^omega_{0,y}`.
//!
//! The Doob transform by `h(x) = P^x(tau_y < tau_0)` steps right from `x`
//! with probability `e^{-V(x)} h(x+1) / (2 h(x))`. The ratios are taken
//! from [`CrossingSolution::step_right`], which is computed without
//! forming `h`, so deep underflow of `h` is harmless.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::io::{self, Write};

use rand::Rng as _;
use serde::Serialize;

use crate::environment::Environment;
use crate::error::{Error, Result};
use crate::estimate::Moments;
use crate::exact_walk::{solve_crossing, CrossingSolution};
use crate::{par, seed};

/// Step count at which a path is declared defective.
pub const STEP_CAP: u64 = 1_000_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionedPath {
    /// Visited sites, from `0` to `y`.
    pub steps: Vec<i64>,
    /// `tau_y`.
    pub length: u64,
    pub env_ref: u64,
    pub seed: u64,
}

impl ConditionedPath {
    /// Number of times `x` is visited before `tau_y`.
    pub fn visits(&self, x: i64) -> u64 {
        self.steps[..self.steps.len() - 1].iter().filter(|&&s| s == x).count() as u64
    }

    /// Newline-separated sites.
    pub fn write_sites<W: Write>(&self, mut out: W) -> io::Result<()> {
        for s in &self.steps {
            writeln!(out, "{s}")?;
        }
        Ok(())
    }
}

/// Stable-within-a-build identifier of an environment.
pub fn environment_id(env: &Environment) -> u64 {
    let mut h = DefaultHasher::new();
    env.window().hash(&mut h);
    env.flags().hash(&mut h);
    env.height().to_bits().hash(&mut h);
    h.finish()
}

fn check(sol: &CrossingSolution, env: &Environment) -> Result<()> {
    let (start, end) = env.window();
    if start > 0 || end < sol.y as i64 {
        return Err(Error::OutsideWindow { site: if start > 0 { 0 } else { sol.y as i64 }, start, end });
    }
    Ok(())
}

/// Walk from `start` to `y` under the transformed kernel, reporting each
/// visited site to `visit`.
fn run<F: FnMut(usize)>(step_right: &[f64], start: usize, rng: &mut seed::Rng, mut visit: F) -> Result<u64> {
    let y = step_right.len() - 1;
    let mut x = start;
    let mut n = 0u64;
    visit(x);
    while x != y {
        if n >= STEP_CAP {
            return Err(Error::StepCap(STEP_CAP));
        }
        if rng.random::<f64>() < step_right[x] {
            x += 1;
        } else {
            x -= 1;
        }
        n += 1;
        visit(x);
    }
    Ok(n)
}

/// One path of `Q^omega_{0,y}`.
pub fn sample_conditioned_path(sol: &CrossingSolution, env: &Environment, seed: u64) -> Result<ConditionedPath> {
    check(sol, env)?;
    let mut rng = seed::rng(seed);
    let mut steps = Vec::new();
    let length = run(&sol.step_right, 0, &mut rng, |x| steps.push(x as i64))?;
    Ok(ConditionedPath { steps, length, env_ref: environment_id(env), seed })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BatchTime {
    pub mean: f64,
    /// `None` for a single path.
    pub stderr: Option<f64>,
    pub n_paths: u64,
}

/// Mean and standard error of `tau_y` over `n_paths` sampled paths.
pub fn batch_crossing_time(env: &Environment, y: u64, n_paths: u64, seed: u64) -> Result<BatchTime> {
    if n_paths == 0 {
        return Err(Error::InvalidParameter("n_paths must be >= 1".into()));
    }
    let sol = solve_crossing(env, y)?;
    let lengths = par::map_range(n_paths, |i| run(&sol.step_right, 0, &mut seed::child_rng(seed, i), |_| ()));
    let m: Moments =
        lengths.into_iter().map(|l| l.map(|l| l as f64)).collect::<Result<Vec<_>>>()?.into_iter().collect();
    Ok(BatchTime { mean: m.mean(), stderr: m.stderr(), n_paths })
}
