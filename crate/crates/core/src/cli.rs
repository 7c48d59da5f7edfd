//! Command-line front end: flag and config parsing, the subcommand
//! pipelines, and CSV/JSON output.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::airy::airy_kernel;
use crate::diagnostics::{
    diagnostic_table, edge_kernel_error, nu_error, recurrence_asymptotics, rescaled_kernel, two_point_det_error,
    verify, ConvergenceReport, RecurrenceAsymptotics, VerifyOptions, MIN_N,
};
use crate::equilibrium::{EdgeSelector, EquilibriumMeasure, EquilibriumRecord, KindHint};
use crate::error::Error;
use crate::fredholm::{hole_probability_finite_n, tw_report, DetReport, TW_START_ORDER};
use crate::orthopoly::TableMetadata;
use crate::potential::Potential;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIAGNOSTIC: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

const VERSION: &str = env!("CARGO_PKG_VERSION");
const MODULES: [&str; 8] = [
    "airy",
    "cli",
    "diagnostics",
    "equilibrium",
    "fredholm",
    "orthopoly",
    "potential",
    "quadrature",
];

#[derive(Parser, Debug)]
#[command(name = "edge-lab", version, about = "Edge asymptotics of polynomial matrix models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Subcommand, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Support, density and edge constants.
    Equilibrium,
    /// Recurrence coefficients and their edge asymptotics.
    Recurrence,
    /// Rescaled kernel and edge density against the Airy limit.
    KernelEdge,
    /// Tracy-Widom distribution table.
    Tw,
    /// Finite-n hole probabilities against F₂.
    HoleProb,
    /// Full diagnostic sweep; exit 1 if any check fails.
    Verify,
}

#[derive(Args, Debug, Default, Clone)]
pub struct Flags {
    /// Potential spec, e.g. `poly:0,0,2`.
    #[arg(long, global = true)]
    pub potential: Option<String>,
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Comma-separated matrix sizes.
    #[arg(long, global = true, value_delimiter = ',')]
    pub n_list: Option<Vec<usize>>,
    /// `lo:hi:step`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub s_range: Option<String>,
    #[arg(long, global = true)]
    pub quad_order: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Flat `key = value` file; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

/// Inclusive grid `lo, lo + step, ..., hi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SRange {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl SRange {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let bad = || CliError::Usage(format!("--s-range expects lo:hi:step, got {text:?}"));
        let parts: Vec<f64> = text
            .split(':')
            .map(|t| t.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?;
        let [lo, hi, step] = parts[..] else { return Err(bad()) };
        if !(lo.is_finite() && hi.is_finite() && hi >= lo && step > 0.0) || (hi - lo) / step > 1e5 {
            return Err(bad());
        }
        Ok(SRange { lo, hi, step })
    }

    pub fn values(&self) -> Vec<f64> {
        let count = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1;
        // Rounded so that decimal steps print cleanly.
        (0..count)
            .map(|i| ((self.lo + i as f64 * self.step) * 1e12).round() / 1e12)
            .collect()
    }
}

/// Resolved settings for one run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub potential: Option<String>,
    pub n_list: Vec<usize>,
    pub s_range: SRange,
    pub quad_order: usize,
    pub tol: f64,
    #[serde(skip)]
    pub output_dir: PathBuf,
}

impl RunConfig {
    /// Defaults, then the config file, then flags.
    pub fn resolve(command: Command, flags: &Flags) -> Result<Self, CliError> {
        let mut cfg = RunConfig {
            command,
            potential: None,
            n_list: if command == Command::Verify {
                vec![100, 200, 400]
            } else {
                vec![100]
            },
            s_range: match command {
                Command::Tw => SRange {
                    lo: -6.0,
                    hi: 4.0,
                    step: 0.1,
                },
                _ => SRange {
                    lo: 0.0,
                    hi: 0.0,
                    step: 1.0,
                },
            },
            quad_order: TW_START_ORDER,
            tol: 1e-10,
            output_dir: PathBuf::from("."),
        };
        if let Some(path) = &flags.config {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
            for (key, value) in parse_config(&text)? {
                cfg.set(&key, &value)?;
            }
        }
        if flags.n.is_some() && flags.n_list.is_some() {
            return Err(CliError::Usage("give either --n or --n-list, not both".into()));
        }
        if let Some(p) = &flags.potential {
            cfg.potential = Some(p.clone());
        }
        if let Some(n) = flags.n {
            cfg.n_list = vec![n];
        }
        if let Some(ns) = &flags.n_list {
            cfg.n_list = ns.clone();
        }
        if let Some(s) = &flags.s_range {
            cfg.s_range = SRange::parse(s)?;
        }
        if let Some(q) = flags.quad_order {
            cfg.quad_order = q;
        }
        if let Some(out) = &flags.out {
            cfg.output_dir = out.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let num = |v: &str| {
            v.parse::<usize>()
                .map_err(|_| CliError::Usage(format!("{key}: not an integer: {v:?}")))
        };
        match key {
            "potential" => self.potential = Some(value.to_string()),
            "n" => self.n_list = vec![num(value)?],
            "n_list" | "n-list" => self.n_list = value.split(',').map(|v| num(v.trim())).collect::<Result<_, _>>()?,
            "s_range" | "s-range" => self.s_range = SRange::parse(value)?,
            "quad_order" | "quad-order" => self.quad_order = num(value)?,
            "tol" => {
                self.tol = value
                    .parse()
                    .map_err(|_| CliError::Usage(format!("tol: not a number: {value:?}")))?
            }
            "out" => self.output_dir = PathBuf::from(value),
            _ => return Err(CliError::Usage(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.n_list.is_empty() {
            return Err(CliError::Usage("n list is empty".into()));
        }
        // verify reports small n itself.
        if self.command != Command::Verify && self.n_list.iter().any(|&n| n < MIN_N) {
            return Err(CliError::Usage(format!("every n must be at least {MIN_N}")));
        }
        if self.quad_order < 8 {
            return Err(CliError::Usage("--quad-order must be at least 8".into()));
        }
        if !(self.tol >= 1e-12) {
            return Err(CliError::Usage("tol must be at least 1e-12".into()));
        }
        if self.command != Command::Tw && self.potential.is_none() {
            return Err(CliError::Usage("missing --potential".into()));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form (output directory excluded).
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    fn parsed_potential(&self) -> Result<Potential, CliError> {
        let spec = self
            .potential
            .as_deref()
            .ok_or_else(|| CliError::Usage("missing --potential".into()))?;
        Potential::parse(spec).map_err(CliError::from)
    }

    fn sorted_n(&self) -> Vec<usize> {
        let mut ns = self.n_list.clone();
        ns.sort_unstable();
        ns.dedup();
        ns
    }
}

/// `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", i + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::MalformedPotential { .. }
            | Error::InvalidPotential(_)
            | Error::InvalidArgument(_)
            | Error::Io(_) => CliError::Usage(e.to_string()),
            other => CliError::Numerical(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    modules: BTreeMap<&'static str, &'static str>,
    config_hash: String,
    config: &'a RunConfig,
    result: T,
}

fn header(cfg: &RunConfig) -> String {
    format!("# edge-lab {VERSION} config_hash={}\n", cfg.hash())
}

fn write_json<T: Serialize>(cfg: &RunConfig, name: &str, result: T) -> Result<PathBuf, CliError> {
    let env = Envelope {
        tool: "edge-lab",
        version: VERSION,
        modules: MODULES.iter().map(|m| (*m, VERSION)).collect(),
        config_hash: cfg.hash(),
        config: cfg,
        result,
    };
    let mut text = serde_json::to_string_pretty(&env).map_err(|e| CliError::Numerical(e.into()))?;
    text.push('\n');
    write_file(&cfg.output_dir, name, &text)
}

fn write_csv(cfg: &RunConfig, name: &str, body: &str) -> Result<PathBuf, CliError> {
    write_file(&cfg.output_dir, name, &(header(cfg) + body))
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<PathBuf, CliError> {
    let io = |e: std::io::Error| CliError::Usage(format!("cannot write to {}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io)?;
    let path = dir.join(name);
    fs::write(&path, text).map_err(io)?;
    Ok(path)
}

/// What a subcommand produced.
#[derive(Debug)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: String,
    pub pass: bool,
}

pub fn cmd_equilibrium(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = cfg.parsed_potential()?;
    let eq = EquilibriumMeasure::solve(&p, KindHint::Auto)?;
    let record: EquilibriumRecord = eq.to_record()?;
    let ends = eq.support.endpoints();
    let (lo, hi) = (ends[0], *ends.last().unwrap());
    let pad = 0.1 * (hi - lo);
    let mut csv = String::from("lambda,rho\n");
    for i in 0..=400 {
        let x = lo - pad + (hi - lo + 2.0 * pad) * i as f64 / 400.0;
        writeln!(csv, "{x:e},{:e}", eq.density(x)).unwrap();
    }
    let files = vec![
        write_json(cfg, "equilibrium.json", &record)?,
        write_csv(cfg, "density.csv", &csv)?,
    ];
    let summary = format!("{:?} support {:?}", record.kind, eq.support.intervals());
    Ok(Outcome {
        files,
        summary,
        pass: true,
    })
}

#[derive(Serialize)]
struct RecurrenceEntry {
    metadata: TableMetadata,
    asymptotics: RecurrenceAsymptotics,
}

pub fn cmd_recurrence(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = cfg.parsed_potential()?;
    let eq = EquilibriumMeasure::solve(&p, KindHint::Auto)?;
    let ns = cfg.sorted_n();
    let tables = ns
        .par_iter()
        .map(|&n| diagnostic_table(&p, &eq, n))
        .collect::<Result<Vec<_>, _>>()?;
    let mut files = Vec::new();
    let mut entries = Vec::new();
    for t in &tables {
        files.push(write_csv(cfg, &format!("recurrence_n{}.csv", t.n), &t.to_csv())?);
        entries.push(RecurrenceEntry {
            metadata: t.metadata(),
            asymptotics: recurrence_asymptotics(t, &eq)?,
        });
    }
    let summary = entries
        .iter()
        .map(|e| format!("n={} C={:.4}", e.metadata.n, e.asymptotics.constant))
        .collect::<Vec<_>>()
        .join(", ");
    files.insert(0, write_json(cfg, "recurrence.json", &entries)?);
    Ok(Outcome {
        files,
        summary,
        pass: true,
    })
}

const T_GRID: [f64; 5] = [-2.0, -1.0, 0.0, 1.0, 2.0];

#[derive(Serialize)]
struct KernelEdgeResult {
    kernel: ConvergenceReport,
    density: ConvergenceReport,
    two_point: ConvergenceReport,
}

pub fn cmd_kernel_edge(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = cfg.parsed_potential()?;
    let eq = EquilibriumMeasure::solve(&p, KindHint::Auto)?;
    let edge = eq.edge_constants(EdgeSelector::Right)?;
    let ns = cfg.sorted_n();
    let s_grid = VerifyOptions::default().s_grid;
    let tables = ns
        .par_iter()
        .map(|&n| diagnostic_table(&p, &eq, n))
        .collect::<Result<Vec<_>, _>>()?;
    let mut csv = String::from("n,t1,t2,kernel_n,airy\n");
    for t in &tables {
        for &x in &T_GRID {
            for &y in &T_GRID {
                writeln!(
                    csv,
                    "{},{x},{y},{:e},{:e}",
                    t.n,
                    rescaled_kernel(t, &edge, x, y),
                    airy_kernel(x, y)
                )
                .unwrap();
            }
        }
    }
    let result = KernelEdgeResult {
        kernel: ConvergenceReport::new(
            "kernel-edge",
            ns.clone(),
            tables.iter().map(|t| edge_kernel_error(t, &edge, &T_GRID)).collect(),
        ),
        density: ConvergenceReport::new(
            "edge-density",
            ns.clone(),
            tables.iter().map(|t| nu_error(t, &edge, &s_grid)).collect(),
        ),
        two_point: ConvergenceReport::new(
            "two-point-det",
            ns.clone(),
            tables.iter().map(|t| two_point_det_error(t, &edge, 0.0, 1.0)).collect(),
        ),
    };
    let summary = format!("kernel errors {:?}", result.kernel.errors);
    let files = vec![
        write_json(cfg, "kernel_edge.json", &result)?,
        write_csv(cfg, "kernel_edge.csv", &csv)?,
    ];
    Ok(Outcome {
        files,
        summary,
        pass: true,
    })
}

pub fn cmd_tw(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let s = cfg.s_range.values();
    let reports: Vec<DetReport> = s.par_iter().map(|&s| tw_report(s, cfg.tol)).collect::<Result<_, _>>()?;
    let mut csv = String::from("s,F2\n");
    for r in &reports {
        writeln!(csv, "{},{:e}", r.s, r.det).unwrap();
    }
    let files = vec![write_csv(cfg, "tw.csv", &csv)?, write_json(cfg, "tw.json", &reports)?];
    Ok(Outcome {
        files,
        summary: format!("{} rows", reports.len()),
        pass: true,
    })
}

#[derive(Serialize)]
struct HoleRow {
    n: usize,
    s: f64,
    finite_n: f64,
    f2: f64,
}

pub fn cmd_hole_prob(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = cfg.parsed_potential()?;
    let eq = EquilibriumMeasure::solve(&p, KindHint::Auto)?;
    let edge = eq.edge_constants(EdgeSelector::Right)?;
    let ss = cfg.s_range.values();
    let f2: Vec<f64> = ss
        .par_iter()
        .map(|&s| tw_report(s, cfg.tol).map(|r| r.det))
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::new();
    for n in cfg.sorted_n() {
        let t = diagnostic_table(&p, &eq, n)?;
        let vals: Vec<f64> = ss
            .par_iter()
            .map(|&s| hole_probability_finite_n(&t, &edge, &[(s, f64::INFINITY)], cfg.quad_order))
            .collect::<Result<_, _>>()?;
        rows.extend(ss.iter().zip(&vals).zip(&f2).map(|((&s, &v), &f)| HoleRow {
            n,
            s,
            finite_n: v,
            f2: f,
        }));
    }
    let mut csv = String::from("n,s,finite_n,F2\n");
    for r in &rows {
        writeln!(csv, "{},{},{:e},{:e}", r.n, r.s, r.finite_n, r.f2).unwrap();
    }
    let worst = rows.iter().map(|r| (r.finite_n - r.f2).abs()).fold(0.0, f64::max);
    let files = vec![
        write_json(cfg, "hole_prob.json", &rows)?,
        write_csv(cfg, "hole_prob.csv", &csv)?,
    ];
    Ok(Outcome {
        files,
        summary: format!("max |E_n - F2| = {worst:.3e}"),
        pass: true,
    })
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = cfg.parsed_potential()?;
    let opts = VerifyOptions {
        quad_order: cfg.quad_order,
        ..VerifyOptions::default()
    };
    let reports = verify(&p, &cfg.n_list, &opts)?;
    let pass = reports.iter().all(|r| r.pass);
    let summary = reports
        .iter()
        .map(|r| format!("{}: {}", r.name, if r.pass { "pass" } else { "FAIL" }))
        .collect::<Vec<_>>()
        .join("\n");
    let files = vec![write_json(cfg, "verify.json", &reports)?];
    Ok(Outcome { files, summary, pass })
}

pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cfg.command {
        Command::Equilibrium => cmd_equilibrium(cfg),
        Command::Recurrence => cmd_recurrence(cfg),
        Command::KernelEdge => cmd_kernel_edge(cfg),
        Command::Tw => cmd_tw(cfg),
        Command::HoleProb => cmd_hole_prob(cfg),
        Command::Verify => cmd_verify(cfg),
    }
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = RunConfig::resolve(cli.command, &cli.flags).and_then(|cfg| execute(&cfg));
    match result {
        Ok(out) => {
            println!("{}", out.summary);
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            if out.pass {
                EXIT_OK
            } else {
                EXIT_DIAGNOSTIC
            }
        }
        Err(e) => {
            eprintln!("edge-lab: {e}");
            e.exit_code()
        }
    }
}
