//! Bernoulli potentials on a finite window of the integers, and the gap
//! encoding of the obstacles between the origin and a target site.

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// Model parameters: obstacle density `p`, potential height `M` and the
/// tilt `lambda` used for Lyapunov exponents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkParams {
    p: f64,
    height: f64,
    lambda: f64,
}

impl WalkParams {
    pub fn new(p: f64, height: f64) -> Result<Self> {
        Self::with_lambda(p, height, 0.0)
    }

    pub fn with_lambda(p: f64, height: f64, lambda: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidParameter(format!("p = {p} not in (0, 1]")));
        }
        if !(height > 0.0 && height.is_finite()) {
            return Err(Error::InvalidParameter(format!("M = {height} not in (0, inf)")));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("lambda = {lambda} < 0")));
        }
        Ok(Self { p, height, lambda })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Potential height `M`.
    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `rho = p / (1 - p)`, undefined at `p = 1`.
    pub fn rho(&self) -> Option<f64> {
        (self.p < 1.0).then(|| self.p / (1.0 - self.p))
    }

    /// Survival probability `e^{-M}` at an obstacle.
    pub fn survival(&self) -> f64 {
        (-self.height).exp()
    }

    /// `1 - e^{-M}`, computed without cancellation.
    pub fn kill(&self) -> f64 {
        -(-self.height).exp_m1()
    }
}

/// Potential values on the window `[start, start + len - 1]`. Every site
/// carries either `0` or the common height `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    start: i64,
    occupied: Vec<bool>,
    height: f64,
}

impl Environment {
    pub fn new(start: i64, occupied: Vec<bool>, height: f64) -> Result<Self> {
        if occupied.is_empty() {
            return Err(Error::InvalidParameter("empty window".into()));
        }
        if !(height >= 0.0 && height.is_finite()) {
            return Err(Error::InvalidParameter(format!("height {height}")));
        }
        Ok(Self { start, occupied, height })
    }

    /// `V = 0` on `[start, end]`.
    pub fn vacant(start: i64, end: i64) -> Result<Self> {
        let len = window_len(start, end)?;
        Self::new(start, vec![false; len], 0.0)
    }

    /// Constant potential `V = gamma` on `[start, end]`.
    pub fn constant(start: i64, end: i64, gamma: f64) -> Result<Self> {
        let len = window_len(start, end)?;
        Self::new(start, vec![gamma > 0.0; len], gamma)
    }

    /// Build from explicit potential values, which must all be `0` or one
    /// common positive height.
    pub fn from_values(start: i64, values: &[f64]) -> Result<Self> {
        let height = values.iter().copied().fold(0.0, f64::max);
        let mut occupied = Vec::with_capacity(values.len());
        for &v in values {
            if v == 0.0 {
                occupied.push(false);
            } else if v == height {
                occupied.push(true);
            } else {
                return Err(Error::InvalidParameter(format!("potential value {v} is neither 0 nor {height}")));
            }
        }
        Self::new(start, occupied, height)
    }

    /// Inclusive window `[a, b]`.
    pub fn window(&self) -> (i64, i64) {
        (self.start, self.start + self.occupied.len() as i64 - 1)
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn len(&self) -> usize {
        self.occupied.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupied.is_empty()
    }

    pub fn contains(&self, x: i64) -> bool {
        let (a, b) = self.window();
        (a..=b).contains(&x)
    }

    fn index(&self, x: i64) -> Result<usize> {
        if self.contains(x) {
            Ok((x - self.start) as usize)
        } else {
            let (start, end) = self.window();
            Err(Error::OutsideWindow { site: x, start, end })
        }
    }

    pub fn is_occupied(&self, x: i64) -> Result<bool> {
        Ok(self.occupied[self.index(x)?])
    }

    pub fn potential(&self, x: i64) -> Result<f64> {
        Ok(if self.is_occupied(x)? { self.height } else { 0.0 })
    }

    /// Potential at the origin, when the window contains it.
    pub fn origin_value(&self) -> Option<f64> {
        self.potential(0).ok()
    }

    /// Replace the value at site `x` (occupied or vacant).
    pub fn set_occupied(&mut self, x: i64, occupied: bool) -> Result<()> {
        let i = self.index(x)?;
        self.occupied[i] = occupied;
        Ok(())
    }

    /// Occupation flags over the window, left to right.
    pub fn flags(&self) -> &[bool] {
        &self.occupied
    }

    pub fn obstacles(&self) -> impl Iterator<Item = i64> + '_ {
        self.occupied.iter().enumerate().filter(|(_, &o)| o).map(|(i, _)| self.start + i as i64)
    }

    /// Per-site survival factors `e^{-(lambda + V(x))}` on `[from, to]`.
    pub fn survival_factors(&self, from: i64, to: i64, lambda: f64) -> Result<Vec<f64>> {
        if from > to {
            return Ok(Vec::new());
        }
        let (i, j) = (self.index(from)?, self.index(to)?);
        let occupied = (-(lambda + self.height)).exp();
        let vacant = (-lambda).exp();
        Ok(self.occupied[i..=j].iter().map(|&o| if o { occupied } else { vacant }).collect())
    }

    /// Gap vector of the obstacles strictly inside `(0, y)`.
    pub fn to_gaps(&self, y: i64) -> Result<GapVector> {
        if y < 1 {
            return Err(Error::InvalidParameter(format!("y = {y} < 1")));
        }
        if y > 1 {
            self.index(1)?;
            self.index(y - 1)?;
        }
        let mut gaps = Vec::new();
        let mut last = 0;
        for x in 1..y {
            if self.occupied[(x - self.start) as usize] {
                gaps.push((x - last) as u64);
                last = x;
            }
        }
        gaps.push((y - last) as u64);
        GapVector::new(gaps)
    }

    /// Environment on `[0, y]` with obstacles exactly at the partial sums
    /// of `gaps` (excluding the total). The values at `0` and `y` are
    /// taken from `origin` and `target`.
    pub fn from_gaps(gaps: &GapVector, height: f64, origin: bool, target: bool) -> Result<Self> {
        let y = gaps.total();
        let mut occupied = vec![false; y as usize + 1];
        let mut x = 0;
        for &r in &gaps.gaps[..gaps.gaps.len() - 1] {
            x += r;
            occupied[x as usize] = true;
        }
        occupied[0] = origin;
        occupied[y as usize] = target;
        Self::new(0, occupied, height)
    }
}

fn window_len(start: i64, end: i64) -> Result<usize> {
    if end < start {
        return Err(Error::InvalidParameter(format!("window [{start}, {end}] is empty")));
    }
    Ok((end - start + 1) as usize)
}

/// Draw an i.i.d. Bernoulli environment on `[start, end]`.
pub fn sample_environment(params: &WalkParams, start: i64, end: i64, seed: u64) -> Result<Environment> {
    let len = window_len(start, end)?;
    let mut rng = seed::rng(seed);
    Ok(sample_with(params, start, len, &mut rng))
}

pub(crate) fn sample_with(params: &WalkParams, start: i64, len: usize, rng: &mut seed::Rng) -> Environment {
    let occupied = (0..len).map(|_| rng.random_bool(params.p())).collect();
    Environment { start, occupied, height: params.height() }
}

impl fmt::Display for Environment {
    /// One line: `a b v_a ... v_b`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.window();
        write!(f, "{a} {b}")?;
        for &o in &self.occupied {
            if o {
                write!(f, " {}", self.height)?;
            } else {
                f.write_str(" 0")?;
            }
        }
        Ok(())
    }
}

impl FromStr for Environment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut it = s.split_whitespace();
        let mut next_int = |what: &str| -> Result<i64> {
            it.next()
                .ok_or_else(|| Error::Parse(format!("missing {what}")))?
                .parse()
                .map_err(|e| Error::Parse(format!("{what}: {e}")))
        };
        let a = next_int("window start")?;
        let b = next_int("window end")?;
        let values = s
            .split_whitespace()
            .skip(2)
            .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("value {t:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        if values.len() as i64 != b - a + 1 {
            return Err(Error::Parse(format!("window [{a}, {b}] needs {} values, got {}", b - a + 1, values.len())));
        }
        Self::from_values(a, &values)
    }
}

/// Successive distances `(r_1, ..., r_n)` between the origin, the occupied
/// sites in `(0, y)`, and `y`. An empty interval is `(y)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GapVector {
    gaps: Vec<u64>,
}

impl GapVector {
    pub fn new(gaps: Vec<u64>) -> Result<Self> {
        if gaps.is_empty() {
            return Err(Error::InvalidParameter("gap vector needs at least one gap".into()));
        }
        if gaps.contains(&0) {
            return Err(Error::InvalidParameter("gaps must be positive".into()));
        }
        Ok(Self { gaps })
    }

    pub fn gaps(&self) -> &[u64] {
        &self.gaps
    }

    /// `y = r_1 + ... + r_n`.
    pub fn total(&self) -> u64 {
        self.gaps.iter().sum()
    }

    /// Number of gaps `N`.
    pub fn len(&self) -> usize {
        self.gaps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.gaps.iter().map(|&r| (r as f64) * (r as f64)).sum()
    }

    /// Dash-separated form used in table exports.
    pub fn dashed(&self) -> String {
        join(&self.gaps, "-")
    }
}

fn join(gaps: &[u64], sep: &str) -> String {
    gaps.iter().map(u64::to_string).collect::<Vec<_>>().join(sep)
}

impl fmt::Display for GapVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&join(&self.gaps, ","))
    }
}

impl FromStr for GapVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let gaps = s
            .split([',', '-'])
            .map(|t| t.trim().parse::<u64>().map_err(|e| Error::Parse(format!("gap {t:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(gaps)
    }
}
