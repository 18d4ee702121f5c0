//! Experiment runner behind the `nilcircle` binary.
//!
//! Every subcommand resolves its parameters (flags, then a JSON config file
//! on top), validates them, runs, and emits a [`Report`]. Reports carry the
//! library version, a schema tag `<command>/<n>`, the resolved parameters and
//! a table. CSV output puts that metadata in `#` comment lines above the
//! header row; JSON output is a single object with the same fields.
//!
//! | schema | columns |
//! |---|---|
//! | `selfcheck/1` | `check,cases,failures,max_error` |
//! | `gauss-scan/1` | `q,count,max_abs,q_pow_neg_half,argmax` |
//! | `nilgauss-scan/1` | `q,count,max_abs,mean_abs,argmax` |
//! | `weyl-scan/1` | `p,theta,normalized,weight` |
//! | `decompose/1` | `name,l_support,n_support,max_abs,probe_mass` (JSON adds `document`) |
//! | `ergodic-run/1` | `n,max_deviation,l2_ratio,maximal_ratio,variation_ratio` |
//! | `variation/1` | `rho,seminorm,value,rm_lhs,rm_rhs` |
//! | `quasi-geometry/1` | `r,count,volume,ratio,above_threshold,comparable` |

mod args;
mod commands;
mod selfcheck;

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

pub use args::{Cli, Command, CommonArgs, Format, IntRange, RealList};

/// One experiment: the subcommand, its resolved parameters and where to write.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub timestamp: bool,
    pub gnuplot: bool,
}

/// A table plus everything needed to reproduce it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub nilcircle: String,
    pub schema: String,
    pub params: Value,
    #[serde(skip_serializing_if = "Map::is_empty", default)]
    pub summary: Map<String, Value>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    /// Extra structured payload, JSON output only.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub document: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timestamp: Option<u64>,
    /// Columns plotted by the optional gnuplot script: x, then y columns, then log axes.
    #[serde(skip)]
    pub plot: Option<(usize, Vec<usize>, bool)>,
    /// Selfcheck failures turn into exit status 1.
    #[serde(skip)]
    pub failed: bool,
}

impl Report {
    pub(crate) fn new(schema: &str, params: &impl Serialize, columns: &[&str]) -> Result<Self> {
        Ok(Report {
            nilcircle: crate::VERSION.to_string(),
            schema: schema.to_string(),
            params: serde_json::to_value(params).map_err(|e| Error::Parse(e.to_string()))?,
            summary: Map::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            document: None,
            timestamp: None,
            plot: None,
            failed: false,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# nilcircle {}\n# schema: {}\n", self.nilcircle, self.schema));
        out.push_str(&format!("# params: {}\n", self.params));
        if !self.summary.is_empty() {
            out.push_str(&format!("# summary: {}\n", Value::Object(self.summary.clone())));
        }
        if let Some(t) = self.timestamp {
            out.push_str(&format!("# timestamp: {t}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(csv_cell).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    fn gnuplot(&self, data: &Path) -> Option<String> {
        let (x, ys, log) = self.plot.as_ref()?;
        let mut s = String::from("set datafile separator ','\nset datafile commentschars '#'\nset key autotitle columnhead\n");
        if *log {
            s.push_str("set logscale xy\n");
        }
        s.push_str(&format!("set xlabel '{}'\nplot ", self.columns[*x]));
        let parts: Vec<String> =
            ys.iter().map(|y| format!("'{}' using {}:{} with linespoints", data.display(), x + 1, y + 1)).collect();
        s.push_str(&parts.join(", \\\n     "));
        s.push('\n');
        Some(s)
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::String(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// A float as a JSON value; non-finite values become strings.
pub(crate) fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or_else(|| Value::String(x.to_string()))
}

/// Machine-readable error record written to stderr on failure.
pub fn error_record(e: &Error) -> String {
    serde_json::json!({ "error": { "kind": e.kind(), "message": e.to_string(), "exit_code": e.exit_code() } }).to_string()
}

/// Merges the config file over the flags.
pub fn resolve(cli: Cli) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig {
        command: cli.command,
        output: cli.common.output,
        format: cli.common.format,
        timestamp: cli.common.timestamp,
        gnuplot: cli.common.gnuplot,
    };
    let Some(path) = cli.common.config else {
        return Ok(cfg);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let file: Value = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let Value::Object(mut file) = file else {
        return Err(Error::Parse("the config file must hold a JSON object".into()));
    };
    if let Some(v) = file.remove("output") {
        cfg.output = Some(serde_json::from_value(v).map_err(|e| Error::Parse(format!("output: {e}")))?);
    }
    if let Some(v) = file.remove("format") {
        cfg.format = Some(serde_json::from_value(v).map_err(|e| Error::Parse(format!("format: {e}")))?);
    }
    if let Some(v) = file.remove("timestamp") {
        cfg.timestamp = v.as_bool().ok_or_else(|| Error::Parse("timestamp must be a boolean".into()))?;
    }
    if let Some(v) = file.remove("gnuplot") {
        cfg.gnuplot = v.as_bool().ok_or_else(|| Error::Parse("gnuplot must be a boolean".into()))?;
    }
    if let Some(v) = file.remove("command") {
        if v.as_str() != Some(cfg.command.name()) {
            return Err(Error::invalid(format!("config file is for {v}, not {}", cfg.command.name())));
        }
    }
    let params = match file.remove("params") {
        Some(Value::Object(p)) if file.is_empty() => p,
        Some(_) => return Err(Error::Parse("params must be an object and the only remaining key".into())),
        None => file,
    };
    cfg.command = cfg.command.with_overrides(params)?;
    Ok(cfg)
}

/// Caps the worker pool at `NILCIRCLE_THREADS` when set.
pub fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("NILCIRCLE_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| Error::invalid(format!("NILCIRCLE_THREADS={v:?} is not a count")))?;
        if n == 0 {
            return Err(Error::invalid("NILCIRCLE_THREADS must be >= 1"));
        }
        // a second initialisation in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Runs one experiment and writes its report.
pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    let mut report = commands::dispatch(&cfg.command)?;
    if cfg.timestamp {
        let now = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        report.timestamp = Some(now);
    }
    let format = cfg.format.unwrap_or(cfg.command.default_format());
    let body = match format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json(),
    };
    match &cfg.output {
        Some(path) => {
            std::fs::write(path, body).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            if cfg.gnuplot && format == Format::Csv {
                if let Some(script) = report.gnuplot(path) {
                    let gp = path.with_extension("gp");
                    std::fs::write(&gp, script).map_err(|e| Error::Io(format!("{}: {e}", gp.display())))?;
                }
            }
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(report)
}

/// Full command-line entry point; returns the process exit status.
pub fn main_with(cli: Cli) -> i32 {
    let result = init_threads().and_then(|_| resolve(cli)).and_then(|cfg| run(&cfg));
    match result {
        Ok(r) if r.failed => 1,
        Ok(_) => 0,
        Err(e) => {
            eprintln!("{}", error_record(&e));
            e.exit_code()
        }
    }
}
