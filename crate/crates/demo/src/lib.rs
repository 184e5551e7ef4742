//! WebAssembly bindings for a single-page demo: the crossing profile of a
//! sampled environment, conditioned sample paths, and speed curves in `M`.
//!
//! Each export has a plain Rust counterpart returning a JSON string, which
//! is what the native tests exercise.

use crossing::annealed::annealed_speed_exact;
use crossing::montecarlo::sample_conditioned_path;
use crossing::quenched::{quenched_speed_mc, QuenchedMode, TruncationPolicy};
use crossing::{sample_environment, solve_crossing, Environment, WalkParams};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest `y` accepted for exact annealed curves.
pub const ANNEALED_Y_MAX: u64 = 18;

#[derive(Debug, Serialize)]
pub struct Profile {
    pub y: u64,
    pub occupied: Vec<bool>,
    /// `log10 h(x)` for `x = 0..=y`; `h(0) = 0` is reported as `null`.
    pub log10_h: Vec<Option<f64>>,
    pub step_right: Vec<f64>,
    pub t_cond: f64,
    pub log_z: f64,
}

#[derive(Debug, Serialize)]
pub struct Curves {
    pub heights: Vec<f64>,
    pub quenched: Vec<f64>,
    pub quenched_stderr: Vec<f64>,
    pub annealed: Vec<f64>,
    pub reference: Vec<f64>,
}

fn environment(p: f64, height: f64, y: u64, seed: u64) -> crossing::Result<Environment> {
    sample_environment(&WalkParams::new(p, height)?, 0, y as i64, seed)
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("plain data serializes")
}

pub fn profile_json(p: f64, height: f64, y: u64, seed: u64) -> crossing::Result<String> {
    let env = environment(p, height, y, seed)?;
    let sol = solve_crossing(&env, y)?;
    let ln10 = std::f64::consts::LN_10;
    Ok(to_json(&Profile {
        y,
        occupied: env.flags().to_vec(),
        log10_h: sol.log_h.iter().map(|&l| l.is_finite().then_some(l / ln10)).collect(),
        step_right: sol.step_right.clone(),
        t_cond: sol.t_cond,
        log_z: sol.log_z,
    }))
}

/// Sites visited by one conditioned path in the environment of
/// [`profile_json`] with the same arguments.
pub fn path_sites(p: f64, height: f64, y: u64, seed: u64, path_seed: u64) -> crossing::Result<Vec<i32>> {
    let env = environment(p, height, y, seed)?;
    let sol = solve_crossing(&env, y)?;
    let path = sample_conditioned_path(&sol, &env, path_seed)?;
    Ok(path.steps.iter().map(|&x| x as i32).collect())
}

/// Quenched (Monte Carlo over `n` sites) and exact finite-`y` annealed
/// speeds against `M`, with the small-`M` reference `sqrt(2 p M)`.
pub fn curves_json(p: f64, heights: &[f64], y: u64, n: u64, seed: u64) -> crossing::Result<String> {
    if y > ANNEALED_Y_MAX {
        return Err(crossing::Error::InvalidParameter(format!("y must be <= {ANNEALED_Y_MAX} in the demo")));
    }
    let mut c = Curves {
        heights: heights.to_vec(),
        quenched: vec![],
        quenched_stderr: vec![],
        annealed: vec![],
        reference: vec![],
    };
    for &m in heights {
        let params = WalkParams::new(p, m)?;
        let policy = TruncationPolicy::for_params(&params, 1e-6)?;
        let q = quenched_speed_mc(&params, n, &policy, seed, QuenchedMode::Iid)?;
        c.quenched.push(q.value);
        c.quenched_stderr.push(q.stderr / (q.inverse * q.inverse));
        let a = if p < 1.0 { annealed_speed_exact(&params, &[y])?[0].value } else { f64::NAN };
        c.annealed.push(a);
        c.reference.push((2.0 * p * m).sqrt());
    }
    Ok(to_json(&c))
}

fn js_err(e: crossing::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = crossingProfile)]
pub fn crossing_profile(p: f64, height: f64, y: u32, seed: u32) -> Result<String, JsError> {
    profile_json(p, height, y as u64, seed as u64).map_err(js_err)
}

#[wasm_bindgen(js_name = samplePath)]
pub fn sample_path(p: f64, height: f64, y: u32, seed: u32, path_seed: u32) -> Result<Vec<i32>, JsError> {
    path_sites(p, height, y as u64, seed as u64, path_seed as u64).map_err(js_err)
}

#[wasm_bindgen(js_name = speedCurves)]
pub fn speed_curves(p: f64, heights: Vec<f64>, y: u32, n: u32, seed: u32) -> Result<String, JsError> {
    curves_json(p, &heights, y as u64, n as u64, seed as u64).map_err(js_err)
}
