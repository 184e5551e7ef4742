//! Parameter sweeps over `(p, M, method)` grids.
//!
//! Every cell uses the master seed, so a one-cell sweep reproduces the
//! corresponding library call and the curves share random numbers. Rows
//! are written in grid order regardless of the number of worker threads.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use crossing::annealed::{annealed_speed_exact, annealed_speed_mc};
use crossing::quenched::{
    main_term, quenched_speed_mc, speed_from_lyapunov, DifferenceGrid, QuenchedMode, TruncationPolicy,
};
use crossing::{Method, SpeedEstimate, WalkParams};
use rayon::prelude::*;

use crate::error::{CliError, Result};

/// Last line of an interrupted sweep.
pub const RESUME_MARKER: &str = "# incomplete";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub p_grid: Vec<f64>,
    pub m_grid: Vec<f64>,
    /// Crossing distance for finite-`y` methods.
    pub y: u64,
    pub methods: Vec<Method>,
    /// Sample size: sites, environments, or the Lyapunov length.
    pub n: u64,
    pub seed: u64,
    /// Truncation tolerance for the quenched estimators.
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub p: f64,
    pub m: f64,
    pub method: Method,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.p_grid.is_empty() || self.m_grid.is_empty() || self.methods.is_empty() {
            return Err(CliError::Usage("p grid, M grid and methods must be nonempty".into()));
        }
        for &p in &self.p_grid {
            for &m in &self.m_grid {
                WalkParams::new(p, m)?;
            }
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(CliError::Usage("tolerance must be positive".into()));
        }
        Ok(())
    }

    /// Cells in canonical order: `p`, then `M`, then method.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &p in &self.p_grid {
            for &m in &self.m_grid {
                for &method in &self.methods {
                    out.push(Cell { p, m, method });
                }
            }
        }
        out
    }
}

pub fn run_cell(spec: &SweepSpec, cell: Cell) -> crossing::Result<SpeedEstimate> {
    let params = WalkParams::new(cell.p, cell.m)?;
    match cell.method {
        Method::IidMc | Method::ErgodicMc => {
            let mode = if cell.method == Method::IidMc { QuenchedMode::Iid } else { QuenchedMode::Ergodic };
            let policy = TruncationPolicy::for_params(&params, spec.tolerance)?;
            quenched_speed_mc(&params, spec.n, &policy, spec.seed, mode)
        }
        Method::LyapunovDerivative => speed_from_lyapunov(&params, spec.n, &DifferenceGrid::default(), spec.seed),
        Method::ClosedForm => {
            Ok(SpeedEstimate::from_inverse(main_term(&params), 0.0, 0, Method::ClosedForm, spec.seed, params))
        }
        Method::ExactEnumeration => Ok(annealed_speed_exact(&params, &[spec.y])?.remove(0)),
        Method::ImportanceMc => Ok(annealed_speed_mc(&params, spec.y, spec.n, spec.seed)?.estimate),
    }
}

/// Evaluate all cells in parallel, in canonical order.
pub fn evaluate(spec: &SweepSpec) -> Result<Vec<SpeedEstimate>> {
    spec.cells().par_iter().map(|&c| run_cell(spec, c).map_err(CliError::from)).collect()
}

fn output_error(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |source| CliError::Output { path: path.to_path_buf(), source }
}

/// Number of completed rows in an interrupted sweep file, after removing
/// its resume marker. `None` if the file does not exist.
fn completed_rows(path: &Path) -> Result<Option<usize>> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(source) => return Err(CliError::Input { path: path.to_path_buf(), source }),
    };
    let mut lines = Vec::new();
    for l in BufReader::new(file).lines() {
        lines.push(l.map_err(|source| CliError::Input { path: path.to_path_buf(), source })?);
    }
    if lines.first().map(String::as_str) != Some(SpeedEstimate::CSV_HEADER) {
        return Err(CliError::Usage(format!("{} is not a sweep file", path.display())));
    }
    let complete = lines.last().is_some_and(|l| !l.starts_with(RESUME_MARKER));
    if complete {
        return Err(CliError::Usage(format!("{} is already complete", path.display())));
    }
    let rows: Vec<&String> = lines[1..].iter().filter(|l| !l.starts_with('#')).collect();
    let mut text = String::new();
    text.push_str(SpeedEstimate::CSV_HEADER);
    text.push('\n');
    for r in &rows {
        text.push_str(r);
        text.push('\n');
    }
    std::fs::write(path, text).map_err(output_error(path))?;
    Ok(Some(rows.len()))
}

/// Run the sweep into a CSV file, flushing after every batch of cells. On
/// failure the file ends with a resume marker, and `resume` continues it.
pub fn write_csv(spec: &SweepSpec, path: &PathBuf, resume: bool, batch: usize) -> Result<Vec<SpeedEstimate>> {
    let cells = spec.cells();
    let start = if resume { completed_rows(path)?.unwrap_or(0) } else { 0 };
    if start > cells.len() {
        return Err(CliError::Usage(format!("{} has more rows than the grid", path.display())));
    }
    let mut file = if start > 0 {
        OpenOptions::new().append(true).open(path).map_err(output_error(path))?
    } else {
        let mut f = File::create(path).map_err(output_error(path))?;
        writeln!(f, "{}", SpeedEstimate::CSV_HEADER).map_err(output_error(path))?;
        f
    };
    let mut done = Vec::new();
    for (k, chunk) in cells[start..].chunks(batch.max(1)).enumerate() {
        let results: Vec<crossing::Result<SpeedEstimate>> = chunk.par_iter().map(|&c| run_cell(spec, c)).collect();
        for (j, r) in results.into_iter().enumerate() {
            let index = start + k * batch.max(1) + j;
            match r {
                Ok(e) => {
                    writeln!(file, "{}", e.csv_row()).map_err(output_error(path))?;
                    done.push(e);
                }
                Err(err) => {
                    let _ = writeln!(
                        file,
                        "{RESUME_MARKER}: cell {index} of {} failed ({err}); rerun with --resume",
                        cells.len()
                    );
                    let _ = file.flush();
                    return Err(err.into());
                }
            }
        }
        file.flush().map_err(output_error(path))?;
    }
    Ok(done)
}

/// One row of a sweep CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub method: String,
    pub p: f64,
    pub m: f64,
    pub value: f64,
    pub inverse: f64,
    pub stderr: f64,
}

pub fn parse_csv(text: &str) -> Result<Vec<Row>> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    if lines.next() != Some(SpeedEstimate::CSV_HEADER) {
        return Err(CliError::Usage("missing sweep CSV header".into()));
    }
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            let num = |i: usize| -> Result<f64> {
                f.get(i).and_then(|s| s.parse().ok()).ok_or_else(|| CliError::Usage(format!("bad sweep row {l:?}")))
            };
            Ok(Row {
                method: f[0].to_string(),
                p: num(1)?,
                m: num(2)?,
                value: num(5)?,
                inverse: num(6)?,
                stderr: num(7)?,
            })
        })
        .collect()
}

fn is_quenched(method: &str) -> bool {
    matches!(method, "iid-mc" | "ergodic-mc" | "lyapunov-derivative")
}

/// Shape diagnostics for each `(p, method)` curve, reported but not
/// asserted.
pub fn diagnostics(rows: &[Row]) -> Vec<String> {
    let mut keys: Vec<(String, f64)> = Vec::new();
    for r in rows {
        if !keys.iter().any(|(m, p)| *m == r.method && *p == r.p) {
            keys.push((r.method.clone(), r.p));
        }
    }
    let mut out = Vec::new();
    for (method, p) in keys {
        let mut curve: Vec<&Row> = rows.iter().filter(|r| r.method == method && r.p == p).collect();
        curve.sort_by(|a, b| a.m.total_cmp(&b.m));
        if curve.len() < 3 {
            continue;
        }
        if is_quenched(&method) {
            // speed error from the inverse-speed error
            let drops = curve
                .windows(2)
                .filter(|w| {
                    let s = |r: &Row| r.stderr / (r.inverse * r.inverse);
                    w[1].value + 2.0 * (s(w[0]).hypot(s(w[1]))) < w[0].value
                })
                .count();
            out.push(format!("{method} p={p}: {drops} significant decreases in M (2 stderr)"));
        } else if method != "closed-form" {
            let (imax, _) = curve.iter().enumerate().max_by(|a, b| a.1.value.total_cmp(&b.1.value)).unwrap();
            let interior = imax > 0 && imax + 1 < curve.len();
            out.push(format!(
                "{method} p={p}: maximum at M={} ({})",
                curve[imax].m,
                if interior { "interior" } else { "endpoint" }
            ));
        }
    }
    out
}
