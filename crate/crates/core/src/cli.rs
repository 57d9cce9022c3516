//! Command-line front end.
//!
//! Every setting lives in [`RunConfig`]. A `key = value` config file is
//! applied first, then any flags given on the command line. Both routes go
//! through [`RunConfig::set`], so the key names are the same everywhere.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::empirical::{correlogram_c1, correlogram_c2, monotone_cutoff, semivariogram, Correlogram};
use crate::error::Error;
use crate::fit::{FitOptions, Pooling};
use crate::ingest::{load_series, Format, TimeSeries};
use crate::montecarlo::{self, CorrModel, SyntheticSpec};
use crate::pipeline::{self, PipelineConfig};
use crate::plot::{emit_plot_data, fmt_sig};
use crate::scan::{ScanConfig, DEFAULT_EPSILON, DEFAULT_J_SPAN, DEFAULT_S_MAX};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const IO: i32 = 3;
    pub const DATA: i32 = 4;
    pub const NUMERICAL: i32 = 5;
    pub const NO_ROOT: i32 = 6;
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io { .. } => exit::IO,
        Error::MalformedRow { .. } | Error::EmptyInput | Error::TooShort { .. } => exit::DATA,
        Error::DegenerateVariogram(_)
        | Error::LagOutOfRange { .. }
        | Error::NoInformativePoints
        | Error::NonFiniteResidual
        | Error::SingularSystem { .. }
        | Error::NotPositiveDefinite => exit::NUMERICAL,
        Error::InvalidArgument(_) => exit::USAGE,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub format: Format,
    pub label: Option<String>,
    pub window_start: usize,
    /// `None` takes every point from `window_start` on.
    pub window_n: Option<usize>,
    pub pooling: Pooling,
    pub fit: FitOptions,
    pub s_max: u64,
    /// `None` means `n + 350`.
    pub j_max: Option<u64>,
    pub epsilon: f64,
    pub require_nonneg_variance: bool,
    pub sign_change_fallback: bool,
    pub pivot_tol: f64,
    pub out_dir: PathBuf,
    pub trials: usize,
    pub seed: u64,
    pub mc_n: usize,
    pub mc_mean: f64,
    pub mc_sigma2: f64,
    pub mc_model: String,
    /// Decay length for `gaussian_decay`; `None` means `n / 4`.
    pub mc_a: Option<f64>,
    pub trials_csv: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: None,
            format: Format::Plain,
            label: None,
            window_start: 1,
            window_n: None,
            pooling: Pooling::Pooled,
            fit: FitOptions::default(),
            s_max: DEFAULT_S_MAX,
            j_max: None,
            epsilon: DEFAULT_EPSILON,
            require_nonneg_variance: true,
            sign_change_fallback: false,
            pivot_tol: crate::kriging::DEFAULT_PIVOT_TOL,
            out_dir: PathBuf::from("out"),
            trials: 500,
            seed: 1,
            mc_n: 30,
            mc_mean: 0.0,
            mc_sigma2: 1.0,
            mc_model: "white_noise".into(),
            mc_a: None,
            trials_csv: None,
        }
    }
}

/// Config keys in the order they are documented.
pub const KEYS: &[&str] = &[
    "input",
    "format",
    "label",
    "window",
    "pooling",
    "init_theta",
    "tol",
    "max_iter",
    "s_max",
    "j_max",
    "epsilon",
    "require_nonneg_variance",
    "sign_change_fallback",
    "pivot_tol",
    "out_dir",
    "trials",
    "seed",
    "mc_n",
    "mc_mean",
    "mc_sigma2",
    "mc_model",
    "mc_a",
    "trials_csv",
];

fn bad(key: &str, value: &str) -> Error {
    Error::InvalidArgument(format!("invalid value {value:?} for {key}"))
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, Error> {
    value.trim().parse().map_err(|_| bad(key, value))
}

fn boolean(key: &str, value: &str) -> Result<bool, Error> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(bad(key, value)),
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), Error> {
        let v = value.trim();
        match key {
            "input" => self.input = Some(PathBuf::from(v)),
            "format" => self.format = v.parse()?,
            "label" => self.label = Some(v.to_string()),
            "window" => {
                let (start, n) = v.split_once(',').ok_or_else(|| bad(key, value))?;
                self.window_start = num(key, start)?;
                self.window_n = Some(num(key, n)?);
            }
            "pooling" => self.pooling = v.parse()?,
            "init_theta" => self.fit.init_theta = num(key, v)?,
            "tol" => self.fit.tol = num(key, v)?,
            "max_iter" => self.fit.max_iter = num(key, v)?,
            "s_max" => self.s_max = num(key, v)?,
            "j_max" => self.j_max = Some(num(key, v)?),
            "epsilon" => self.epsilon = num(key, v)?,
            "require_nonneg_variance" => self.require_nonneg_variance = boolean(key, v)?,
            "sign_change_fallback" => self.sign_change_fallback = boolean(key, v)?,
            "pivot_tol" => self.pivot_tol = num(key, v)?,
            "out_dir" => self.out_dir = PathBuf::from(v),
            "trials" => self.trials = num(key, v)?,
            "seed" => self.seed = num(key, v)?,
            "mc_n" => self.mc_n = num(key, v)?,
            "mc_mean" => self.mc_mean = num(key, v)?,
            "mc_sigma2" => self.mc_sigma2 = num(key, v)?,
            "mc_model" => self.mc_model = v.to_string(),
            "mc_a" => self.mc_a = Some(num(key, v)?),
            "trials_csv" => self.trials_csv = Some(PathBuf::from(v)),
            _ => return Err(Error::InvalidArgument(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// Apply a `key = value` file; `#` starts a comment.
    pub fn apply_file_text(&mut self, text: &str) -> Result<(), Error> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::MalformedRow {
                line: i + 1,
                content: raw.to_string(),
            })?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    pub fn scan_config(&self, n: usize) -> ScanConfig {
        ScanConfig {
            s_max: self.s_max,
            j_max: self.j_max.unwrap_or(n as u64 + DEFAULT_J_SPAN),
            epsilon: self.epsilon,
            require_nonneg_variance: self.require_nonneg_variance,
            sign_change_fallback: self.sign_change_fallback,
            pivot_tol: self.pivot_tol,
        }
    }

    pub fn pipeline_config(&self, n: usize) -> PipelineConfig {
        PipelineConfig {
            pooling: self.pooling,
            fit: self.fit,
            scan: self.scan_config(n),
        }
    }

    pub fn synthetic_spec(&self) -> Result<SyntheticSpec, Error> {
        let corr_model = match self.mc_model.as_str() {
            "white_noise" => CorrModel::WhiteNoise,
            "gaussian_decay" => CorrModel::GaussianDecay {
                a: self.mc_a.unwrap_or(self.mc_n as f64 / 4.0),
            },
            other => return Err(bad("mc_model", other)),
        };
        Ok(SyntheticSpec {
            n: self.mc_n,
            mean: self.mc_mean,
            sigma2: self.mc_sigma2,
            corr_model,
            seed: self.seed,
        })
    }

    /// Load the input and cut the configured window.
    pub fn load(&self) -> Result<TimeSeries, Error> {
        let path = self
            .input
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("no input file given".into()))?;
        let ts = load_series(path, self.format)?;
        let n = self
            .window_n
            .unwrap_or_else(|| (ts.len() + 1).saturating_sub(self.window_start));
        if n < crate::ingest::MIN_LEN {
            return Err(Error::TooShort { n });
        }
        ts.window(self.window_start, n)
    }

    fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| {
            self.input
                .as_deref()
                .and_then(Path::file_stem)
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "series".into())
        })
    }
}

#[derive(Debug, Parser)]
#[command(name = "krigmean", version, about = "Kriging-based GLS estimate of a constant mean")]
struct Cli {
    /// Config file with `key = value` lines; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(flatten)]
    opts: Overrides,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Experimental semivariogram and its monotone cutoff.
    Variogram,
    /// Both experimental correlograms up to the cutoff.
    Correlogram,
    /// Fit the decay exponent of the correlogram model.
    Fit,
    /// Full pipeline: fit, constraint scan, estimate and plot data.
    Estimate,
    /// Monte-Carlo bias and interval coverage on synthetic series.
    Coverage,
}

#[derive(Debug, Args)]
struct Overrides {
    /// Input series file.
    #[arg(long, global = true)]
    input: Option<String>,
    /// `plain` or `dated`.
    #[arg(long, global = true)]
    format: Option<String>,
    #[arg(long, global = true)]
    label: Option<String>,
    /// `start,n` (1-based start).
    #[arg(long, global = true)]
    window: Option<String>,
    /// `pooled`, `averaged`, `first` or `second`.
    #[arg(long, global = true)]
    pooling: Option<String>,
    #[arg(long, global = true)]
    init_theta: Option<String>,
    #[arg(long, global = true)]
    tol: Option<String>,
    #[arg(long, global = true)]
    max_iter: Option<String>,
    #[arg(long, global = true)]
    s_max: Option<String>,
    #[arg(long, global = true)]
    j_max: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    epsilon: Option<String>,
    #[arg(long, global = true)]
    require_nonneg_variance: Option<String>,
    #[arg(long, global = true)]
    sign_change_fallback: Option<String>,
    #[arg(long, global = true)]
    pivot_tol: Option<String>,
    #[arg(long, global = true)]
    out_dir: Option<String>,
    #[arg(long, global = true)]
    trials: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    #[arg(long, global = true)]
    mc_n: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    mc_mean: Option<String>,
    #[arg(long, global = true)]
    mc_sigma2: Option<String>,
    #[arg(long, global = true)]
    mc_model: Option<String>,
    #[arg(long, global = true)]
    mc_a: Option<String>,
    #[arg(long, global = true)]
    trials_csv: Option<String>,
}

impl Overrides {
    fn pairs(&self) -> Vec<(&'static str, &str)> {
        let fields: [(&'static str, &Option<String>); 23] = [
            ("input", &self.input),
            ("format", &self.format),
            ("label", &self.label),
            ("window", &self.window),
            ("pooling", &self.pooling),
            ("init_theta", &self.init_theta),
            ("tol", &self.tol),
            ("max_iter", &self.max_iter),
            ("s_max", &self.s_max),
            ("j_max", &self.j_max),
            ("epsilon", &self.epsilon),
            ("require_nonneg_variance", &self.require_nonneg_variance),
            ("sign_change_fallback", &self.sign_change_fallback),
            ("pivot_tol", &self.pivot_tol),
            ("out_dir", &self.out_dir),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("mc_n", &self.mc_n),
            ("mc_mean", &self.mc_mean),
            ("mc_sigma2", &self.mc_sigma2),
            ("mc_model", &self.mc_model),
            ("mc_a", &self.mc_a),
            ("trials_csv", &self.trials_csv),
        ];
        fields
            .into_iter()
            .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
            .collect()
    }
}

/// Outcome of a command that ran to completion but may still need a
/// non-zero exit.
enum Done {
    Ok,
    NoRoot,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_out(dir: &Path, name: &str, body: &str) -> Result<PathBuf, Error> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join(name);
    std::fs::write(&path, body).map_err(io_err(&path))?;
    Ok(path)
}

fn two_column(header: &str, values: &[f64]) -> String {
    let mut s = format!("{header}\n");
    for (h, v) in values.iter().enumerate() {
        let _ = writeln!(s, "{h},{}", fmt_sig(*v));
    }
    s
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize")
}

fn cmd_variogram(cfg: &RunConfig, out: &mut dyn Write) -> Result<Done, Error> {
    let ts = cfg.load()?;
    let vg = semivariogram(&ts);
    write_out(&cfg.out_dir, "variogram.csv", &two_column("h,value", vg.values()))?;
    let d = monotone_cutoff(&vg)?;
    let _ = writeln!(out, "d={d} sigma2={}", vg.values()[d]);
    Ok(Done::Ok)
}

fn correlograms(ts: &TimeSeries) -> Result<(Correlogram, Correlogram), Error> {
    let vg = semivariogram(ts);
    let d = monotone_cutoff(&vg)?;
    Ok((correlogram_c1(&vg, d)?, correlogram_c2(ts, d.min(ts.len() - 2))?))
}

fn cmd_correlogram(cfg: &RunConfig, out: &mut dyn Write) -> Result<Done, Error> {
    let ts = cfg.load()?;
    let (c1, c2) = correlograms(&ts)?;
    write_out(&cfg.out_dir, "correlogram_c1.csv", &two_column("h,value", &c1.rho_abs))?;
    write_out(&cfg.out_dir, "correlogram_c2.csv", &two_column("h,value", &c2.rho_abs))?;
    let _ = writeln!(
        out,
        "d={} sigma2={}",
        c1.cutoff,
        c1.sigma2_hat.unwrap_or(f64::NAN)
    );
    Ok(Done::Ok)
}

#[derive(Serialize)]
struct FitReport {
    n: usize,
    d: usize,
    pooling: Pooling,
    theta: f64,
    iterations: usize,
    final_sse: f64,
    converged: bool,
}

fn cmd_fit(cfg: &RunConfig, out: &mut dyn Write) -> Result<Done, Error> {
    let ts = cfg.load()?;
    let v = pipeline::variography(&ts)?;
    let fit = pipeline::fit_theta(&v, ts.len(), cfg.pooling, &cfg.fit)?;
    let report = FitReport {
        n: ts.len(),
        d: v.cutoff,
        pooling: cfg.pooling,
        theta: fit.theta,
        iterations: fit.iterations,
        final_sse: fit.final_sse,
        converged: fit.converged,
    };
    let _ = writeln!(out, "{}", to_json(&report));
    Ok(Done::Ok)
}

/// `label, n, Θ, t, j, m̂` as a single line.
pub fn table_row(label: &str, n: usize, theta: f64, t: u64, j: u64, m_hat: f64) -> String {
    format!("{label}, {n}, {theta:.5}, {t}, {j}, {m_hat:.2}")
}

fn cmd_estimate(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<Done, Error> {
    let ts = cfg.load()?;
    let n = ts.len();
    let result = pipeline::run(&ts, &cfg.pipeline_config(n))?;
    emit_plot_data(&result.scan, &ts, &cfg.out_dir)?;
    match &result.scan.accepted {
        Some(acc) => {
            write_out(&cfg.out_dir, "estimate.json", &to_json(&acc.estimate))?;
            let _ = writeln!(
                out,
                "{}",
                table_row(&cfg.label(), n, result.fit.theta, acc.t, acc.j, acc.estimate.m_hat)
            );
            let _ = writeln!(out, "{}", to_json(&acc.estimate));
            Ok(Done::Ok)
        }
        None => {
            let _ = writeln!(
                err,
                "no root found: |g| <= {} not reached for t in {}..={}, j in {}..={} (theta = {:.5})",
                cfg.epsilon,
                n + 1,
                n as u64 + cfg.s_max,
                n + 1,
                result.scan.config.j_max,
                result.fit.theta
            );
            Ok(Done::NoRoot)
        }
    }
}

fn cmd_coverage(cfg: &RunConfig, out: &mut dyn Write) -> Result<Done, Error> {
    if cfg.trials < montecarlo::MIN_TRIALS {
        return Err(Error::InvalidArgument(format!(
            "trials = {}, at least {} are required",
            cfg.trials,
            montecarlo::MIN_TRIALS
        )));
    }
    let spec = cfg.synthetic_spec()?;
    let outcomes = montecarlo::run_trials(&spec, cfg.trials, &cfg.pipeline_config(spec.n))?;
    let report = montecarlo::summarize(&spec, &outcomes);
    if let Some(path) = &cfg.trials_csv {
        let mut s = String::from("trial,sample_mean,theta,t,j,m_hat,ci_low,ci_high\n");
        let opt = |x: Option<f64>| x.map(fmt_sig).unwrap_or_default();
        let opt_u = |x: Option<u64>| x.map(|v| v.to_string()).unwrap_or_default();
        for o in &outcomes {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                o.trial,
                fmt_sig(o.sample_mean),
                opt(o.theta),
                opt_u(o.t),
                opt_u(o.j),
                opt(o.m_hat),
                opt(o.ci_low),
                opt(o.ci_high)
            );
        }
        std::fs::write(path, s).map_err(io_err(path))?;
    }
    let _ = writeln!(out, "{}", to_json(&report));
    Ok(Done::Ok)
}

/// Parse `args` (including the program name), run the command, and return
/// the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            if code == exit::OK {
                let _ = write!(out, "{e}");
            } else {
                let _ = write!(err, "{e}");
            }
            return code;
        }
    };

    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        let applied = std::fs::read_to_string(path)
            .map_err(io_err(path))
            .and_then(|text| cfg.apply_file_text(&text));
        if let Err(e) = applied {
            let _ = writeln!(err, "error: {e}");
            return exit_code(&e);
        }
    }
    for (k, v) in cli.opts.pairs() {
        if let Err(e) = cfg.set(k, v) {
            let _ = writeln!(err, "error: {e}");
            return exit_code(&e);
        }
    }

    let result = match cli.command {
        Command::Variogram => cmd_variogram(&cfg, out),
        Command::Correlogram => cmd_correlogram(&cfg, out),
        Command::Fit => cmd_fit(&cfg, out),
        Command::Estimate => cmd_estimate(&cfg, out, err),
        Command::Coverage => cmd_coverage(&cfg, out),
    };
    match result {
        Ok(Done::Ok) => exit::OK,
        Ok(Done::NoRoot) => exit::NO_ROOT,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
