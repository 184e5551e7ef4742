//! Point estimates with error bars, and streaming moment accumulators.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::environment::WalkParams;
use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ErgodicMc,
    IidMc,
    LyapunovDerivative,
    ClosedForm,
    ExactEnumeration,
    ImportanceMc,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ErgodicMc => "ergodic-mc",
            Method::IidMc => "iid-mc",
            Method::LyapunovDerivative => "lyapunov-derivative",
            Method::ClosedForm => "closed-form",
            Method::ExactEnumeration => "exact-enumeration",
            Method::ImportanceMc => "importance-mc",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Ok(match s {
            "ergodic-mc" => Method::ErgodicMc,
            "iid-mc" => Method::IidMc,
            "lyapunov-derivative" => Method::LyapunovDerivative,
            "closed-form" => Method::ClosedForm,
            "exact-enumeration" => Method::ExactEnumeration,
            "importance-mc" => Method::ImportanceMc,
            other => return Err(Error::Parse(format!("unknown method {other:?}"))),
        })
    }
}

/// A speed estimate. The primary quantity is the inverse speed (expected
/// time per site); `stderr` refers to it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeedEstimate {
    pub value: f64,
    pub inverse: f64,
    pub stderr: f64,
    pub n_samples: u64,
    pub method: Method,
    pub seed: u64,
    pub params: WalkParams,
    /// Crossing distance, for finite-`y` estimators.
    pub y: Option<u64>,
}

impl SpeedEstimate {
    pub fn from_inverse(
        inverse: f64,
        stderr: f64,
        n_samples: u64,
        method: Method,
        seed: u64,
        params: WalkParams,
    ) -> Self {
        Self { value: 1.0 / inverse, inverse, stderr, n_samples, method, seed, params, y: None }
    }

    pub fn at_distance(mut self, y: u64) -> Self {
        self.y = Some(y);
        self
    }

    /// Header matching [`SpeedEstimate::csv_row`].
    pub const CSV_HEADER: &'static str = "method,p,M,lambda,y,value,inverse,stderr,n,seed";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:.12e},{:.12e},{:.6e},{},{}",
            self.method,
            self.params.p(),
            self.params.height(),
            self.params.lambda(),
            self.y.map(|y| y.to_string()).unwrap_or_default(),
            self.value,
            self.inverse,
            self.stderr,
            self.n_samples,
            self.seed
        )
    }
}

/// Welford accumulator for mean and variance.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Combine two accumulators (Chan et al. parallel update).
    pub fn merge(self, other: Moments) -> Moments {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        Moments {
            n,
            mean: self.mean + delta * other.n as f64 / n as f64,
            m2: self.m2 + other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64,
        }
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample variance; `None` below two samples.
    pub fn variance(&self) -> Option<f64> {
        (self.n >= 2).then(|| self.m2 / (self.n - 1) as f64)
    }

    pub fn stderr(&self) -> Option<f64> {
        self.variance().map(|v| (v / self.n as f64).sqrt())
    }
}

impl FromIterator<f64> for Moments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = Moments::default();
        for x in iter {
            m.push(x);
        }
        m
    }
}

/// Mean and batch-means standard error of a correlated series.
pub fn batch_means(series: &[f64], batches: usize) -> (f64, f64) {
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let batches = batches.clamp(2, n.max(2));
    let size = n / batches;
    if size == 0 {
        return (mean, f64::NAN);
    }
    let m: Moments = series.chunks_exact(size).take(batches).map(|c| c.iter().sum::<f64>() / size as f64).collect();
    (mean, m.stderr().unwrap_or(f64::NAN))
}
