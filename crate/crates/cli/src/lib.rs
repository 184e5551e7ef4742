//! Command-line front end: sweeps, validation suites and single runs.

pub mod config;
pub mod error;
pub mod svg;
pub mod sweep;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use crossing::annealed::{annealed_speed_mc, enumerate_annealed};
use crossing::montecarlo::{batch_crossing_time, sample_conditioned_path};
use crossing::quenched::{
    quenched_lyapunov, quenched_speed_mc, speed_from_lyapunov, DifferenceGrid, QuenchedMode, TruncationPolicy,
};
use crossing::validate::{run_suite, Suite};
use crossing::{sample_environment, seed, solve_crossing, Environment, Method, SpeedEstimate, WalkParams};
use serde_json::json;

use config::{Config, List};
pub use error::{CliError, Result};
use sweep::SweepSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        <Format as ValueEnum>::from_str(s, false)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Iid,
    Ergodic,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        <Mode as ValueEnum>::from_str(s, false)
    }
}

#[derive(Debug, Parser)]
#[command(name = "crossing", version, about = "Crossing speeds of killed random walks among Bernoulli obstacles")]
pub struct Cli {
    /// Obstacle density.
    #[arg(long, global = true)]
    pub p: Option<f64>,
    /// Obstacle height.
    #[arg(long = "M", global = true)]
    pub m: Option<f64>,
    /// Crossing distance.
    #[arg(long, global = true)]
    pub y: Option<u64>,
    /// Sample size (sites, environments, paths, or Lyapunov length).
    #[arg(long, global = true)]
    pub n: Option<u64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file (default: standard output).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// `key = value` file; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Speed estimates over a (p, M, method) grid.
    Sweep {
        #[arg(long = "p-grid")]
        p_grid: Option<List<f64>>,
        #[arg(long = "M-grid")]
        m_grid: Option<List<f64>>,
        /// Comma-separated: iid-mc, ergodic-mc, lyapunov-derivative,
        /// closed-form, exact-enumeration, importance-mc.
        #[arg(long)]
        methods: Option<List<Method>>,
        #[arg(long)]
        tolerance: Option<f64>,
        /// Continue an interrupted sweep file.
        #[arg(long)]
        resume: bool,
    },
    /// Run a validation suite (or `all`).
    Validate { suite: String },
    /// Quenched inverse speed by Monte Carlo over sites.
    Quenched {
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Exact annealed table over all obstacle configurations in (0, y).
    AnnealedExact,
    /// Annealed crossing time by importance sampling of environments.
    AnnealedMc,
    /// Inverse speed from the Lyapunov exponent, or the exponent itself
    /// when --lambda is given.
    Lyapunov {
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Sample paths of the walk conditioned to cross.
    SamplePaths {
        /// Environment file in the `a b v_a ... v_b` format.
        #[arg(long)]
        env: Option<PathBuf>,
    },
}

/// Global settings after merging flags and the configuration file.
struct Settings {
    cfg: Config,
    p: f64,
    m: f64,
    y: Option<u64>,
    n: Option<u64>,
    seed: u64,
    out: Option<PathBuf>,
    format: Format,
}

impl Settings {
    fn params(&self) -> Result<WalkParams> {
        Ok(WalkParams::new(self.p, self.m)?)
    }

    fn y(&self, default: u64) -> u64 {
        self.y.unwrap_or(default)
    }

    fn n(&self, default: u64) -> u64 {
        self.n.unwrap_or(default)
    }

    fn formats(&self, allowed: &[Format]) -> Result<Format> {
        if allowed.contains(&self.format) {
            Ok(self.format)
        } else {
            let name = self.format.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
            Err(CliError::Usage(format!("format {name} not supported by this command")))
        }
    }

    fn emit(&self, text: &str) -> Result<()> {
        emit(self.out.as_deref(), text)
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|source| CliError::Output { path: path.to_path_buf(), source })
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Output { path: PathBuf::from("<stdout>"), source })
        }
    }
}

fn estimate_text(e: &SpeedEstimate, format: Format) -> Result<String> {
    Ok(match format {
        Format::Json => format!("{}\n", serde_json::to_string_pretty(e)?),
        _ => format!("{}\n{}\n", SpeedEstimate::CSV_HEADER, e.csv_row()),
    })
}

pub fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(t) = cfg.resolve(cli.threads, "threads")? {
        if t == 0 {
            return Err(CliError::Usage("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    let s = Settings {
        p: cfg.resolve(cli.p, "p")?.unwrap_or(0.5),
        m: cfg.resolve(cli.m, "M")?.unwrap_or(1.0),
        y: cfg.resolve(cli.y, "y")?,
        n: cfg.resolve(cli.n, "n")?,
        seed: cfg.resolve(cli.seed, "seed")?.unwrap_or(1),
        out: cfg.resolve(cli.out.map(|p| p.display().to_string()), "out")?.map(PathBuf::from),
        format: cfg.resolve(cli.format, "format")?.unwrap_or(Format::Csv),
        cfg,
    };
    match cli.command {
        Command::Sweep { p_grid, m_grid, methods, tolerance, resume } => {
            let spec = SweepSpec {
                p_grid: s.cfg.resolve(p_grid, "p_grid")?.map(|l| l.0).unwrap_or_else(|| vec![s.p]),
                m_grid: s.cfg.resolve(m_grid, "M_grid")?.map(|l| l.0).unwrap_or_else(|| vec![s.m]),
                y: s.y(16),
                methods: s.cfg.resolve(methods, "methods")?.map(|l| l.0).unwrap_or_else(|| vec![Method::IidMc]),
                n: s.n(10_000),
                seed: s.seed,
                tolerance: s.cfg.resolve(tolerance, "tolerance")?.unwrap_or(1e-6),
            };
            cmd_sweep(&s, &spec, resume)
        }
        Command::Validate { suite } => cmd_validate(&s, &suite),
        Command::Quenched { mode, tolerance } => {
            let format = s.formats(&[Format::Csv, Format::Json])?;
            let params = s.params()?;
            let tol = s.cfg.resolve(tolerance, "tolerance")?.unwrap_or(1e-6);
            let mode = match s.cfg.resolve(mode, "mode")?.unwrap_or(Mode::Iid) {
                Mode::Iid => QuenchedMode::Iid,
                Mode::Ergodic => QuenchedMode::Ergodic,
            };
            let e =
                quenched_speed_mc(&params, s.n(10_000), &TruncationPolicy::for_params(&params, tol)?, s.seed, mode)?;
            s.emit(&estimate_text(&e, format)?)
        }
        Command::AnnealedExact => {
            let format = s.formats(&[Format::Csv, Format::Json])?;
            let table = enumerate_annealed(&s.params()?, s.y(16))?;
            match format {
                Format::Json => {
                    let v = json!({
                        "p": s.p, "M": s.m, "y": table.y,
                        "t_ann": table.t_ann, "speed": table.y as f64 / table.t_ann,
                        "log_z0y": table.log_z0y, "beta_hat": table.beta_hat, "configurations": table.rows.len(),
                    });
                    s.emit(&format!("{}\n", serde_json::to_string_pretty(&v)?))
                }
                _ => {
                    let mut buf = Vec::new();
                    table.write_csv(&mut buf).map_err(|source| CliError::Output { path: "<buffer>".into(), source })?;
                    s.emit(&String::from_utf8_lossy(&buf))
                }
            }
        }
        Command::AnnealedMc => {
            let format = s.formats(&[Format::Csv, Format::Json])?;
            let e = annealed_speed_mc(&s.params()?, s.y(16), s.n(10_000), s.seed)?;
            if !e.reliable {
                eprintln!("warning: effective sample size {:.1} is below the reliability threshold", e.ess);
            }
            match format {
                Format::Json => s.emit(&format!("{}\n", serde_json::to_string_pretty(&e)?)),
                _ => s.emit(&estimate_text(&e.estimate, format)?),
            }
        }
        Command::Lyapunov { lambda } => {
            let format = s.formats(&[Format::Csv, Format::Json])?;
            let params = s.params()?;
            let y = s.n(100_000);
            match s.cfg.resolve(lambda, "lambda")? {
                Some(l) => {
                    let env = sample_environment(&params, -1000, y as i64, s.seed)?;
                    let exponent = quenched_lyapunov(&env, l, y)?;
                    let text = match format {
                        Format::Json => format!(
                            "{}\n",
                            serde_json::to_string_pretty(
                                &json!({"p": s.p, "M": s.m, "lambda": l, "y": y, "exponent": exponent, "seed": s.seed})
                            )?
                        ),
                        _ => format!(
                            "p,M,lambda,y,exponent,seed\n{},{},{},{},{:.12e},{}\n",
                            s.p, s.m, l, y, exponent, s.seed
                        ),
                    };
                    s.emit(&text)
                }
                None => s.emit(&estimate_text(
                    &speed_from_lyapunov(&params, y, &DifferenceGrid::default(), s.seed)?,
                    format,
                )?),
            }
        }
        Command::SamplePaths { env } => {
            let format = s.formats(&[Format::Csv, Format::Json])?;
            let env_path = s.cfg.resolve(env.map(|p| p.display().to_string()), "env")?;
            let env = match env_path {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|source| CliError::Input { path: path.clone().into(), source })?;
                    text.trim().parse::<Environment>()?
                }
                None => sample_environment(&s.params()?, 0, s.y(16) as i64, s.seed)?,
            };
            let y = s.y.unwrap_or(env.window().1.max(1) as u64);
            let n = s.n(10);
            match format {
                Format::Json => {
                    let sol = solve_crossing(&env, y)?;
                    let b = batch_crossing_time(&env, y, n, s.seed)?;
                    let v = json!({"y": y, "t_cond": sol.t_cond, "mean": b.mean, "stderr": b.stderr, "n_paths": n, "seed": s.seed, "environment": env.to_string()});
                    s.emit(&format!("{}\n", serde_json::to_string_pretty(&v)?))
                }
                _ => {
                    let sol = solve_crossing(&env, y)?;
                    let mut buf = Vec::new();
                    for i in 0..n {
                        if i > 0 {
                            buf.push(b'\n');
                        }
                        let path = sample_conditioned_path(&sol, &env, seed::child_seed(s.seed, i))?;
                        path.write_sites(&mut buf)
                            .map_err(|source| CliError::Output { path: "<buffer>".into(), source })?;
                    }
                    s.emit(&String::from_utf8_lossy(&buf))
                }
            }
        }
    }
}

fn cmd_sweep(s: &Settings, spec: &SweepSpec, resume: bool) -> Result<()> {
    spec.validate()?;
    let batch = rayon::current_num_threads().max(1);
    let rows = match (s.format, &s.out) {
        (Format::Json, _) => {
            if resume {
                return Err(CliError::Usage("--resume needs CSV output".into()));
            }
            let est = sweep::evaluate(spec)?;
            s.emit(&format!("{}\n", serde_json::to_string_pretty(&est)?))?;
            est.iter().map(row_of).collect()
        }
        (Format::Csv, Some(path)) => sweep::write_csv(spec, path, resume, batch)?.iter().map(row_of).collect(),
        (Format::Csv, None) => {
            if resume {
                return Err(CliError::Usage("--resume needs --out".into()));
            }
            let est = sweep::evaluate(spec)?;
            let mut text = format!("{}\n", SpeedEstimate::CSV_HEADER);
            for e in &est {
                text.push_str(&e.csv_row());
                text.push('\n');
            }
            s.emit(&text)?;
            est.iter().map(row_of).collect()
        }
        (Format::Svg, out) => {
            let svg_path = out.as_ref().ok_or_else(|| CliError::Usage("--format svg needs --out".into()))?;
            let csv_path = svg_path.with_extension("csv");
            sweep::write_csv(spec, &csv_path, resume, batch)?;
            let text = std::fs::read_to_string(&csv_path)
                .map_err(|source| CliError::Input { path: csv_path.clone(), source })?;
            let rows = sweep::parse_csv(&text)?;
            emit(Some(svg_path), &svg::render(&rows))?;
            rows
        }
    };
    for d in sweep::diagnostics(&rows) {
        eprintln!("note: {d}");
    }
    Ok(())
}

fn row_of(e: &SpeedEstimate) -> sweep::Row {
    sweep::Row {
        method: e.method.to_string(),
        p: e.params.p(),
        m: e.params.height(),
        value: e.value,
        inverse: e.inverse,
        stderr: e.stderr,
    }
}

fn cmd_validate(s: &Settings, name: &str) -> Result<()> {
    let format = s.formats(&[Format::Csv, Format::Json])?;
    let suites: Vec<Suite> = if name == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![name.parse().map_err(|e: crossing::Error| CliError::Usage(e.to_string()))?]
    };
    let reports = suites.into_iter().map(|suite| run_suite(suite, s.seed)).collect::<crossing::Result<Vec<_>>>()?;
    let text = match format {
        Format::Json => format!("{}\n", serde_json::to_string_pretty(&reports)?),
        _ => reports.iter().map(|r| format!("{r}\n")).collect(),
    };
    s.emit(&text)?;
    if reports.iter().all(|r| r.passed()) {
        Ok(())
    } else {
        Err(CliError::ValidationFailed)
    }
}
