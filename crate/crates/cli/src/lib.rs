//! Command-line front end for `esb3`: fit, sample, eval, diagnose and gof.
//!
//! Structured results are JSON, curves are CSV with the run manifest in a
//! leading `#` comment.

pub mod format;
pub mod input;
pub mod manifest;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use esb3::fit::{fit_ml, loglik, FitConfig, Init};
use esb3::gof::{ecdf, Dataset, GofReport, KS_CAVEAT, KS_PVALUE_METHOD};
use esb3::robust::score_report;
use esb3::{Error, Params64};
use serde_json::{json, Value};

use format::{num, to_json, to_json_line};
use input::parse_values;
use manifest::RunManifest;

#[derive(Debug, Parser)]
#[command(name = "esb3", version, about = "Epsilon-skew Burr III distribution toolkit")]
pub struct Cli {
    /// Record start and finish times in the manifest (outputs are then no
    /// longer byte-reproducible).
    #[arg(long, global = true)]
    pub timestamps: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Maximum-likelihood fit of a data column, with KS and AIC.
    Fit(FitArgs),
    /// Draw a seeded sample, one value per line.
    Sample(SampleArgs),
    /// Tabulate pdf, cdf or quantile on a grid.
    Eval(EvalArgs),
    /// Score-function robustness report for a standardized member.
    Diagnose(DiagnoseArgs),
    /// Goodness of fit of given parameters to a data column.
    Gof(GofArgs),
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// 1-based column for delimited input.
    #[arg(long)]
    pub column: Option<usize>,
    /// Hold c at this value (4 free parameters).
    #[arg(long, allow_hyphen_values = true)]
    pub fixed_c: Option<f64>,
    /// Start the ascent from "mu,sigma,c,k,eps" instead of the built-in starts.
    #[arg(long, allow_hyphen_values = true)]
    pub init: Option<String>,
    /// Relative parameter-change tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_cycles: Option<u32>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct ParamArgs {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub mu: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub sigma: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub c: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub k: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub eps: f64,
}

impl ParamArgs {
    fn params(&self) -> Result<Params64, CliError> {
        Params64::new(self.mu, self.sigma, self.c, self.k, self.eps).map_err(CliError::from)
    }
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Pdf,
    Cdf,
    Quantile,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_enum)]
    pub mode: Mode,
    /// "lo:hi:points", at least 2 points.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub c: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub k: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub eps: f64,
    /// Rate for the heavy-tail probe.
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GofArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub column: Option<usize>,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "fit_result")]
    pub mu: Option<f64>,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "fit_result")]
    pub sigma: Option<f64>,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "fit_result")]
    pub c: Option<f64>,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "fit_result")]
    pub k: Option<f64>,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "fit_result")]
    pub eps: Option<f64>,
    /// JSON document written by `fit`.
    #[arg(long)]
    pub fit_result: Option<PathBuf>,
    /// Where to write the ECDF / model CDF overlay CSV.
    #[arg(long)]
    pub overlay: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Failure with its process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable or invalid input, bad flags, invalid parameters.
    Input(String),
    /// Data the model cannot describe.
    Degenerate(String),
    /// Numerical failure inside the library.
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Degenerate(_) => 4,
            CliError::Internal(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) | CliError::Degenerate(m) | CliError::Internal(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::DegenerateData(_) | Error::SingularLikelihood => CliError::Degenerate(e.to_string()),
            Error::InvalidParams(_)
            | Error::Domain { .. }
            | Error::SmallSample { .. }
            | Error::EmptyData
            | Error::NonFinite(_) => CliError::Input(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

/// Exit code 0 or, after writing a result, 3 for a fit that did not converge.
pub type Outcome = Result<u8, CliError>;

pub fn run(cli: Cli) -> Outcome {
    let t = cli.timestamps;
    match cli.command {
        Command::Fit(a) => cmd_fit(&a, t),
        Command::Sample(a) => cmd_sample(&a, t),
        Command::Eval(a) => cmd_eval(&a, t),
        Command::Diagnose(a) => cmd_diagnose(&a, t),
        Command::Gof(a) => cmd_gof(&a, t),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Input(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_dataset(path: &Path, column: Option<usize>) -> Result<Dataset<f64>, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let values = parse_values(&text, column).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let label = match column {
        Some(c) => format!("column {c}"),
        None => "values".into(),
    };
    Ok(Dataset::new(values, label, path.display().to_string())?)
}

fn params_json(p: &Params64) -> Value {
    json!({"mu": p.mu, "sigma": p.sigma, "c": p.c, "k": p.k, "eps": p.eps})
}

fn parse_init(s: &str) -> Result<Params64, CliError> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Input(format!("--init {s:?}: expected five comma-separated numbers")))?;
    let arr: [f64; 5] =
        v.try_into().map_err(|_| CliError::Input(format!("--init {s:?}: expected five comma-separated numbers")))?;
    Ok(Params64::from_array(arr)?)
}

pub fn cmd_fit(a: &FitArgs, record_time: bool) -> Outcome {
    let data = read_dataset(&a.input, a.column)?;
    let mut cfg = FitConfig::default();
    if let Some(c) = a.fixed_c {
        cfg.fixed_c = Some(c);
    }
    if let Some(s) = &a.init {
        cfg.init = Init::UserInit(parse_init(s)?);
    }
    if let Some(t) = a.tol {
        cfg.param_tol = t;
    }
    if let Some(m) = a.max_cycles {
        cfg.max_cycles = m;
    }
    let mut manifest = RunManifest::new(
        "fit",
        json!({
            "input": a.input.display().to_string(),
            "column": a.column,
            "config": cfg,
        }),
        None,
        record_time,
    );
    let r = fit_ml(&data, &cfg)?;
    let p = r.params;
    let gof = GofReport::new(&data, "ESBIII", |y| p.cdf(y), r.loglik, r.free_params);
    manifest.finish();
    let doc = json!({
        "manifest": manifest,
        "dataset": {"source": data.source, "label": data.label, "n": data.len()},
        "fit": r,
        "gof": gof,
        "summary": {
            "mu": p.mu, "sigma": p.sigma, "c": p.c, "k": p.k, "eps": p.eps,
            "p_ks": gof.ks_pvalue, "aic": gof.aic,
        },
        "notes": [KS_CAVEAT],
    });
    emit(a.out.as_deref(), &to_json(&doc))?;
    Ok(if r.converged { 0 } else { 3 })
}

pub fn cmd_sample(a: &SampleArgs, record_time: bool) -> Outcome {
    let p = a.params.params()?;
    if a.n == 0 {
        return Err(CliError::Input("--n must be at least 1".into()));
    }
    let mut manifest = RunManifest::new("sample", json!({"params": params_json(&p), "n": a.n}), Some(a.seed), record_time);
    let draws = p.sample(a.n, a.seed);
    manifest.finish();
    let mut text = format!("# manifest {}\n", to_json_line(&manifest));
    for x in draws {
        text.push_str(&num(x));
        text.push('\n');
    }
    emit(a.out.as_deref(), &text)?;
    Ok(0)
}

fn parse_grid(s: &str) -> Result<(f64, f64, usize), CliError> {
    let bad = || CliError::Input(format!("--grid {s:?}: expected lo:hi:points with at least 2 points"));
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, pts] = parts.as_slice() else { return Err(bad()) };
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    let pts: usize = pts.trim().parse().map_err(|_| bad())?;
    if pts < 2 || !lo.is_finite() || !hi.is_finite() || !(hi > lo) {
        return Err(bad());
    }
    Ok((lo, hi, pts))
}

pub fn cmd_eval(a: &EvalArgs, record_time: bool) -> Outcome {
    let p = a.params.params()?;
    let (lo, hi, pts) = parse_grid(&a.grid)?;
    if a.mode == Mode::Quantile && !(lo > 0.0 && hi < 1.0) {
        return Err(CliError::Input(format!("quantile grid [{lo}, {hi}] must lie inside (0, 1)")));
    }
    let (mode, header) = match a.mode {
        Mode::Pdf => ("pdf", "y,pdf"),
        Mode::Cdf => ("cdf", "y,cdf"),
        Mode::Quantile => ("quantile", "p,quantile"),
    };
    let mut manifest = RunManifest::new(
        "eval",
        json!({"params": params_json(&p), "mode": mode, "grid": {"lo": lo, "hi": hi, "points": pts}}),
        None,
        record_time,
    );
    let mut rows = Vec::with_capacity(pts);
    for i in 0..pts {
        // exact endpoints, and exactly mirrored points when lo = -hi
        let x = (lo * (pts - 1 - i) as f64 + hi * i as f64) / (pts - 1) as f64;
        let v = match a.mode {
            Mode::Pdf => p.pdf(x),
            Mode::Cdf => p.cdf(x),
            Mode::Quantile => p.quantile(x)?,
        };
        rows.push(format!("{},{}\n", num(x), num(v)));
    }
    manifest.finish();
    let mut text = format!("# manifest {}\n# columns: {header}\n", to_json_line(&manifest));
    text.extend(rows);
    emit(a.out.as_deref(), &text)?;
    Ok(0)
}

pub fn cmd_diagnose(a: &DiagnoseArgs, record_time: bool) -> Outcome {
    let p = Params64::standard(a.c, a.k, a.eps)?;
    if !(a.lambda > 0.0 && a.lambda.is_finite()) {
        return Err(CliError::Input(format!("--lambda must be positive, got {}", a.lambda)));
    }
    let mut manifest =
        RunManifest::new("diagnose", json!({"params": params_json(&p), "lambda": a.lambda}), None, record_time);
    let report = score_report(&p, a.lambda)?;
    manifest.finish();
    let doc = json!({"manifest": manifest, "params": params_json(&p), "report": report});
    emit(a.out.as_deref(), &to_json(&doc))?;
    Ok(0)
}

/// Parameters and free-parameter count from a `fit` output document.
fn params_from_fit_result(path: &Path) -> Result<(Params64, u32), CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let doc: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("{}: not a JSON document: {e}", path.display())))?;
    let fit = &doc["fit"];
    let p: Params64 = serde_json::from_value(fit["params"].clone())
        .map_err(|e| CliError::Input(format!("{}: no fit.params: {e}", path.display())))?;
    let free = fit["free_params"].as_u64().unwrap_or(5) as u32;
    Ok((Params64::new(p.mu, p.sigma, p.c, p.k, p.eps)?, free))
}

pub fn cmd_gof(a: &GofArgs, record_time: bool) -> Outcome {
    let data = read_dataset(&a.input, a.column)?;
    let (p, free) = match &a.fit_result {
        Some(path) => params_from_fit_result(path)?,
        None => {
            let (Some(c), Some(k)) = (a.c, a.k) else {
                return Err(CliError::Input("give --c and --k (and optionally --mu --sigma --eps) or --fit-result".into()));
            };
            (Params64::new(a.mu.unwrap_or(0.0), a.sigma.unwrap_or(1.0), c, k, a.eps.unwrap_or(0.0))?, 5)
        }
    };
    let mut manifest = RunManifest::new(
        "gof",
        json!({
            "input": a.input.display().to_string(),
            "column": a.column,
            "params": params_json(&p),
            "fit_result": a.fit_result.as_ref().map(|x| x.display().to_string()),
        }),
        None,
        record_time,
    );
    let ll = loglik(&p, &data)?;
    let report = GofReport::new(&data, "ESBIII", |y| p.cdf(y), ll, free);
    if let Some(path) = &a.overlay {
        let mut text = format!("# manifest {}\n# columns: y,ecdf,model_cdf\n", to_json_line(&manifest));
        let mut sorted = data.sorted().to_vec();
        sorted.dedup();
        for y in sorted {
            text.push_str(&format!("{},{},{}\n", num(y), num(ecdf(&data, y)), num(p.cdf(y))));
        }
        emit(Some(path), &text)?;
    }
    manifest.finish();
    let doc = json!({
        "manifest": manifest,
        "dataset": {"source": data.source, "label": data.label, "n": data.len()},
        "params": params_json(&p),
        "loglik": ll,
        "free_params": free,
        "report": report,
        "ks_pvalue_method": KS_PVALUE_METHOD,
        "notes": [KS_CAVEAT],
        "overlay": a.overlay.as_ref().map(|x| x.display().to_string()),
    });
    emit(a.out.as_deref(), &to_json(&doc))?;
    Ok(0)
}
