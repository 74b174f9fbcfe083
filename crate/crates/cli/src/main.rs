use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cliffordian_cli::bench::run_bench;
use cliffordian_cli::check::run_check;
use cliffordian_cli::config::{
    parse_index, parse_lattice, parse_tuple, CheckSpec, ConfigError, Fault, Function, JobConfig, Suite,
};
use cliffordian_cli::{cmd_eval, cmd_grid, exit, CliError};

/// Holomorphic Cliffordian functions on R(0,3): evaluation, grids, identity
/// checks and summation benchmarks.
#[derive(Parser)]
#[command(name = "cliffordian", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one function at one point and print a JSON record.
    Eval(Common),
    /// Evaluate over a 2-D grid and write CSV.
    Grid(Common),
    /// Run an identity suite and print a JSON report; exit 4 on failure.
    Check(CheckArgs),
    /// Error-versus-work and worker-scaling sweeps as JSON.
    Bench(Common),
}

#[derive(Args)]
struct Common {
    /// JSON job file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// zeta, zeta_1..zeta_4, p_alpha, p_alpha_direct, d0_p0, eta, exp, sin, cos, cotan, polynomial, singular
    #[arg(long)]
    function: Option<Function>,
    /// Half-periods as "a,b,c,d;a,b,c,d;...".
    #[arg(long)]
    lattice: Option<String>,
    /// Shell cap for the lattice sums.
    #[arg(long)]
    shells: Option<usize>,
    /// Target tail bound.
    #[arg(long)]
    tol: Option<f64>,
    /// Worker threads.
    #[arg(long)]
    workers: Option<usize>,
    /// Evaluation point "x0,x1,x2,x3".
    #[arg(long)]
    point: Option<String>,
    /// Multi-index "a0,a1,a2,a3".
    #[arg(long)]
    alpha: Option<String>,
    /// Half-period for eta, "w0,w1,w2,w3".
    #[arg(long)]
    omega: Option<String>,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    common: Common,
    /// default, eta_literal or all
    #[arg(long, value_parser = parse_suite)]
    suite: Option<Suite>,
    /// Inject a known fault (eta_sign) as a negative control
    #[arg(long, value_parser = parse_fault)]
    fault: Option<Fault>,
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    serde_json::from_value(serde_json::Value::String(s.into()))
        .map_err(|_| format!("unknown suite '{s}' (default, eta_literal, all)"))
}

fn parse_fault(s: &str) -> Result<Fault, String> {
    serde_json::from_value(serde_json::Value::String(s.into())).map_err(|_| format!("unknown fault '{s}' (eta_sign)"))
}

impl Common {
    fn job(&self) -> Result<JobConfig, ConfigError> {
        let mut cfg = match &self.config {
            Some(p) => JobConfig::from_file(p)?,
            None => JobConfig::default(),
        };
        if let Some(f) = self.function {
            cfg.function = Some(f);
        }
        if let Some(l) = &self.lattice {
            cfg.lattice = Some(parse_lattice(l)?);
        }
        if self.shells.is_some() {
            cfg.sum.max_shells = self.shells;
        }
        if self.tol.is_some() {
            cfg.sum.target_tol = self.tol;
        }
        if self.workers.is_some() {
            cfg.sum.workers = self.workers;
        }
        if let Some(p) = &self.point {
            cfg.point = Some(parse_tuple(p)?);
        }
        if let Some(a) = &self.alpha {
            cfg.alpha = Some(parse_index(a)?);
        }
        if let Some(w) = &self.omega {
            cfg.omega = Some(parse_tuple(w)?);
        }
        Ok(cfg)
    }

    fn output(&self) -> Result<Box<dyn Write>, CliError> {
        Ok(match &self.out {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Eval(c) => {
            let rec = cmd_eval(&c.job()?)?;
            let mut out = c.output()?;
            writeln!(out, "{rec}")?;
            out.flush()?;
        }
        Command::Grid(c) => {
            let cfg = c.job()?;
            let mut out = c.output()?;
            cmd_grid(&cfg, &mut out)?;
            out.flush()?;
        }
        Command::Check(a) => {
            let mut cfg = a.common.job()?;
            let spec = cfg.check.get_or_insert_with(CheckSpec::default);
            if let Some(s) = a.suite {
                spec.suite = s;
            }
            if a.fault.is_some() {
                spec.fault = a.fault;
            }
            if a.common.shells.is_some() {
                spec.shells = a.common.shells;
            }
            let report = run_check(&cfg)?;
            let mut out = a.common.output()?;
            writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("report serializes"))?;
            out.flush()?;
            if !report.all_pass {
                return Err(CliError::ChecksFailed(report.failures()));
            }
        }
        Command::Bench(c) => {
            let cfg = c.job()?;
            let report = run_bench(&cfg)?;
            let mut out = c.output()?;
            writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("report serializes"))?;
            out.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { exit::CONFIG } else { exit::OK };
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
