//! Command-line front end: point evaluation, CSV grids, identity checks and
//! summation benchmarks over the `cliffordian` library.

pub mod bench;
pub mod check;
pub mod config;

use std::fmt;
use std::io::Write;

use cliffordian::polynomials::{eval_p, eval_s};
use cliffordian::summation::run_ordered;
use cliffordian::trig::{cos_cl, cotan_cl, exp_cl, sin_cl};
use cliffordian::weierstrass::{d0_p0, eta, p_alpha, p_alpha_direct, zeta};
use cliffordian::{Error, Lattice64, MultiIndex, Paravector64, SumConfig, ZetaForm};
use serde::Serialize;

use config::{ConfigError, Function, JobConfig};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 1;
    pub const POLE: i32 = 2;
    pub const UNCONVERGED: i32 = 3;
    pub const CHECK_FAILED: i32 = 4;
    pub const GRADE_LEAK: i32 = 5;
}

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Compute(Error),
    Io(std::io::Error),
    /// At least one identity of a check suite failed.
    ChecksFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Io(_) => exit::CONFIG,
            Self::ChecksFailed(_) => exit::CHECK_FAILED,
            Self::Compute(e) => compute_exit_code(e),
        }
    }
}

/// Exit code for a library error.
pub fn compute_exit_code(e: &Error) -> i32 {
    match e {
        Error::NearPole { .. } | Error::ZeroNorm { .. } | Error::PoleOfCotan { .. } | Error::NotInvertible => {
            exit::POLE
        }
        Error::Unconverged { .. } | Error::RadiusTooLarge { .. } => exit::UNCONVERGED,
        Error::GradeLeak { .. } => exit::GRADE_LEAK,
        _ => exit::CONFIG,
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(e) => write!(f, "{e}"),
            Self::Compute(e) => write!(f, "{e}"),
            Self::Io(e) => write!(f, "i/o error: {e}"),
            Self::ChecksFailed(n) => write!(f, "{n} identities failed"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        Self::Config(e)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self::Compute(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e)
    }
}

/// A configured function, ready to evaluate at points.
pub struct Evaluator {
    pub function: Function,
    pub lattice: Option<Lattice64>,
    pub sum: SumConfig,
    form: ZetaForm,
    alpha: Option<MultiIndex>,
    omega: Option<Paravector64>,
}

/// One function value with its truncation record.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointValue {
    pub value: [f64; 4],
    pub shells: usize,
    pub tail_bound: f64,
}

impl Evaluator {
    pub fn new(cfg: &JobConfig) -> Result<Self, ConfigError> {
        let function = cfg.function();
        let lattice = if function.needs_lattice() { Some(cfg.lattice()?) } else { None };
        let rank = lattice.as_ref().map_or(1, |l| l.rank());
        let sum = cfg.sum_config(rank)?;
        let alpha = match function {
            Function::PAlpha | Function::Polynomial | Function::Singular => Some(cfg.multi_index()?),
            _ => None,
        };
        let omega = match function {
            Function::Eta => match cfg.omega {
                Some(w) => Some(Paravector64::from_coords(w)),
                None => return Err(ConfigError("function eta needs 'omega'".into())),
            },
            _ => None,
        };
        Ok(Self { function, lattice, sum, form: cfg.form.unwrap_or_default().into(), alpha, omega })
    }

    pub fn eval(&self, x: &Paravector64) -> Result<PointValue, Error> {
        let exact = |p: Paravector64| PointValue { value: p.to_f64(), shells: 0, tail_bound: 0.0 };
        let series = |e: cliffordian::Evaluation64| PointValue {
            value: e.value.to_f64(),
            shells: e.shells,
            tail_bound: e.tail_bound,
        };
        let l = || self.lattice.as_ref().expect("lattice functions carry a lattice");
        Ok(match self.function {
            Function::Zeta(_) => series(zeta(l(), x, &self.sum, self.form)?),
            Function::PAlpha => series(p_alpha(l(), self.alpha.as_ref().expect("checked"), x, &self.sum)?),
            Function::PAlphaDirect => series(p_alpha_direct(l(), x, &self.sum)?),
            Function::D0P0 => series(d0_p0(l(), x, &self.sum)?),
            Function::Eta => series(eta(l(), x, self.omega.as_ref().expect("checked"), &self.sum)?),
            Function::Exp => exact(exp_cl(x)),
            Function::Sin => exact(sin_cl(x)?),
            Function::Cos => exact(cos_cl(x)),
            Function::Cotan => exact(cotan_cl(x)?),
            Function::Polynomial => exact(eval_p(self.alpha.as_ref().expect("checked"), x)?),
            Function::Singular => exact(eval_s(self.alpha.as_ref().expect("checked"), x)?),
        })
    }
}

#[derive(Serialize)]
struct EvalRecord {
    function: String,
    point: [f64; 4],
    value: [f64; 4],
    shells: usize,
    tail_bound: f64,
}

/// `eval`: one JSON record with the value, shell count and tail bound.
pub fn cmd_eval(cfg: &JobConfig) -> Result<String, CliError> {
    let ev = Evaluator::new(cfg)?;
    let Some(point) = cfg.point else {
        return Err(ConfigError("eval needs 'point'".into()).into());
    };
    let v = ev.eval(&Paravector64::from_coords(point))?;
    let rec = EvalRecord {
        function: ev.function.to_string(),
        point,
        value: v.value,
        shells: v.shells,
        tail_bound: v.tail_bound,
    };
    Ok(serde_json::to_string(&rec).expect("plain record serializes"))
}

/// CSV flag for a per-point outcome.
pub fn point_flag(r: &Result<PointValue, Error>) -> &'static str {
    match r {
        Ok(_) => "ok",
        Err(Error::NearPole { .. } | Error::ZeroNorm { .. } | Error::PoleOfCotan { .. } | Error::NotInvertible) => {
            "pole"
        }
        Err(Error::Unconverged { .. }) => "unconverged",
        Err(Error::RadiusTooLarge { .. }) => "radius_too_large",
        Err(Error::GradeLeak { .. }) => "grade_leak",
        Err(_) => "error",
    }
}

pub const GRID_HEADER: &str = "x0,x1,x2,x3,f0,f1,f2,f3,tail_bound,flag";

/// `grid`: CSV over the configured grid, rows in row-major order. Points are
/// spread over `sum.workers` threads; the bytes do not depend on that count.
pub fn cmd_grid(cfg: &JobConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let Some(grid) = &cfg.grid else {
        return Err(ConfigError("grid needs a 'grid' section".into()).into());
    };
    grid.validate()?;
    let mut ev = Evaluator::new(cfg)?;
    let workers = ev.sum.workers;
    ev.sum.workers = 1;
    let points = grid.points();
    let rows = run_ordered(points.len(), workers, |i| {
        let p = points[i];
        let r = ev.eval(&Paravector64::from_coords(p));
        let (f, tail) = match &r {
            Ok(v) => (v.value, v.tail_bound),
            Err(_) => ([f64::NAN; 4], f64::NAN),
        };
        let mut line = String::with_capacity(200);
        for v in p.iter().chain(&f).chain(std::iter::once(&tail)) {
            line.push_str(&format!("{v:.16e},"));
        }
        line.push_str(point_flag(&r));
        line.push('\n');
        line
    });
    writeln!(out, "{GRID_HEADER}")?;
    for row in rows {
        out.write_all(row.as_bytes())?;
    }
    Ok(())
}
