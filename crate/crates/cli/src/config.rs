//! Job configuration: a JSON document (see `schema/job_config.schema.json`)
//! merged with command-line overrides and resolved into typed settings.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use cliffordian::{Lattice64, MultiIndex, Paravector64, SumConfig};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// Configuration problems; all map to exit code 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// Function selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Function {
    /// `ζ_N`; `zeta_N` additionally pins the lattice rank.
    Zeta(Option<usize>),
    PAlpha,
    PAlphaDirect,
    D0P0,
    Eta,
    Exp,
    Sin,
    Cos,
    Cotan,
    Polynomial,
    Singular,
}

impl FromStr for Function {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Ok(match s {
            "zeta" => Self::Zeta(None),
            "zeta_1" => Self::Zeta(Some(1)),
            "zeta_2" => Self::Zeta(Some(2)),
            "zeta_3" => Self::Zeta(Some(3)),
            "zeta_4" => Self::Zeta(Some(4)),
            "p_alpha" => Self::PAlpha,
            "p_alpha_direct" => Self::PAlphaDirect,
            "d0_p0" => Self::D0P0,
            "eta" => Self::Eta,
            "exp" => Self::Exp,
            "sin" => Self::Sin,
            "cos" => Self::Cos,
            "cotan" => Self::Cotan,
            "polynomial" => Self::Polynomial,
            "singular" => Self::Singular,
            _ => return bad(format!("unknown function '{s}'")),
        })
    }
}

impl TryFrom<String> for Function {
    type Error = ConfigError;
    fn try_from(s: String) -> Result<Self, ConfigError> {
        s.parse()
    }
}

impl From<Function> for String {
    fn from(f: Function) -> String {
        f.to_string()
    }
}

impl fmt::Display for Function {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Zeta(None) => "zeta".to_string(),
            Self::Zeta(Some(n)) => format!("zeta_{n}"),
            Self::PAlpha => "p_alpha".into(),
            Self::PAlphaDirect => "p_alpha_direct".into(),
            Self::D0P0 => "d0_p0".into(),
            Self::Eta => "eta".into(),
            Self::Exp => "exp".into(),
            Self::Sin => "sin".into(),
            Self::Cos => "cos".into(),
            Self::Cotan => "cotan".into(),
            Self::Polynomial => "polynomial".into(),
            Self::Singular => "singular".into(),
        };
        f.write_str(&s)
    }
}

impl Function {
    pub fn needs_lattice(&self) -> bool {
        matches!(self, Self::Zeta(_) | Self::PAlpha | Self::PAlphaDirect | Self::D0P0 | Self::Eta)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    Defining,
    #[default]
    Collapsed,
    PowerSeries,
}

impl From<Form> for cliffordian::ZetaForm {
    fn from(f: Form) -> Self {
        match f {
            Form::Defining => Self::Defining,
            Form::Collapsed => Self::Collapsed,
            Form::PowerSeries => Self::PowerSeries,
        }
    }
}

/// Summation overrides; unset fields take the per-rank defaults.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SumSettings {
    pub max_shells: Option<usize>,
    pub target_tol: Option<f64>,
    pub pairing: Option<bool>,
    pub compensated: Option<bool>,
    pub pole_guard: Option<f64>,
    pub adaptive: Option<bool>,
    pub workers: Option<usize>,
}

impl SumSettings {
    pub fn resolve(&self, rank: usize) -> Result<SumConfig, ConfigError> {
        let d = SumConfig::for_rank(rank);
        let cfg = SumConfig {
            max_shells: self.max_shells.unwrap_or(d.max_shells),
            target_tol: self.target_tol.unwrap_or(d.target_tol),
            pairing: self.pairing.unwrap_or(d.pairing),
            compensated: self.compensated.unwrap_or(d.compensated),
            pole_guard: self.pole_guard.unwrap_or(d.pole_guard),
            adaptive: self.adaptive.unwrap_or(d.adaptive),
            workers: self.workers.unwrap_or(d.workers),
        };
        cfg.validate().map_err(|e| ConfigError(e.to_string()))?;
        if cfg.workers == 0 {
            return bad("workers must be at least 1");
        }
        Ok(cfg)
    }
}

/// A two-dimensional grid: two free coordinates swept over `[lower, upper]`
/// with `counts` nodes each, the other two frozen at their `base` values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub base: [f64; 4],
    pub free: [usize; 2],
    pub lower: [f64; 2],
    pub upper: [f64; 2],
    pub counts: [usize; 2],
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.free[0] > 3 || self.free[1] > 3 || self.free[0] == self.free[1] {
            return bad("grid.free must name two distinct coordinates in 0..=3");
        }
        if self.counts[0] == 0 || self.counts[1] == 0 {
            return bad("grid.counts must be positive");
        }
        if self.lower.iter().chain(&self.upper).chain(&self.base).any(|v| !v.is_finite()) {
            return bad("grid bounds must be finite");
        }
        Ok(())
    }

    /// Node coordinate `i` of `n` along `[lo, hi]`; a single node sits at `lo`.
    fn node(lo: f64, hi: f64, i: usize, n: usize) -> f64 {
        if n == 1 {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    }

    /// Points in row-major order over (`free[0]`, `free[1]`).
    pub fn points(&self) -> Vec<[f64; 4]> {
        let mut out = Vec::with_capacity(self.counts[0] * self.counts[1]);
        for i in 0..self.counts[0] {
            for j in 0..self.counts[1] {
                let mut p = self.base;
                p[self.free[0]] = Self::node(self.lower[0], self.upper[0], i, self.counts[0]);
                p[self.free[1]] = Self::node(self.lower[1], self.upper[1], j, self.counts[1]);
                out.push(p);
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    /// Identities that hold, including the corrected quasi-period laws.
    #[default]
    Default,
    /// The quasi-period laws exactly as printed, several of which fail.
    EtaLiteral,
    All,
}

/// Deliberate faults for negative controls.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    /// Flip the sign of `η` in the quasi-periodicity checks.
    EtaSign,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    #[serde(default)]
    pub suite: Suite,
    pub fault: Option<Fault>,
    /// Random points per sampled identity.
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    /// Shells for the rank-4 identities (fixed truncation).
    pub shells: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSpec {
    /// Shell counts of the error-vs-work sweep.
    pub shells: Option<Vec<usize>>,
    /// Worker counts for the scaling sweep.
    pub workers: Option<Vec<usize>>,
    pub point: Option<[f64; 4]>,
}

/// The job document. Every field is optional; flags fill or override them.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub schema_version: Option<u32>,
    pub function: Option<Function>,
    pub form: Option<Form>,
    /// Multi-index for `p_alpha`, `polynomial` and `singular`.
    pub alpha: Option<[u32; 4]>,
    /// Half-period for `eta`.
    pub omega: Option<[f64; 4]>,
    /// Half-periods, one 4-tuple each.
    pub lattice: Option<Vec<[f64; 4]>>,
    #[serde(default)]
    pub sum: SumSettings,
    pub point: Option<[f64; 4]>,
    pub grid: Option<GridSpec>,
    pub check: Option<CheckSpec>,
    pub bench: Option<BenchSpec>,
}

impl JobConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        if let Some(v) = cfg.schema_version {
            if v != SCHEMA_VERSION {
                return bad(format!("schema_version {v} is not supported (expected {SCHEMA_VERSION})"));
            }
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// The lattice, or the built-in default when none is configured.
    pub fn lattice(&self) -> Result<Lattice64, ConfigError> {
        let periods = match &self.lattice {
            Some(p) => p.clone(),
            None => default_half_periods(self.required_rank().unwrap_or(4)),
        };
        if let Some(n) = self.required_rank() {
            if n != periods.len() {
                return bad(format!("function {} needs rank {n}, lattice has rank {}", self.function(), periods.len()));
            }
        }
        Lattice64::new(periods.into_iter().map(Paravector64::from_coords).collect())
            .map_err(|e| ConfigError(format!("lattice: {e}")))
    }

    fn required_rank(&self) -> Option<usize> {
        match self.function {
            Some(Function::Zeta(n)) => n,
            Some(Function::PAlpha | Function::PAlphaDirect | Function::D0P0) => Some(4),
            _ => None,
        }
    }

    pub fn function(&self) -> Function {
        self.function.unwrap_or(Function::Zeta(None))
    }

    pub fn sum_config(&self, rank: usize) -> Result<SumConfig, ConfigError> {
        self.sum.resolve(rank)
    }

    pub fn multi_index(&self) -> Result<MultiIndex, ConfigError> {
        match self.alpha {
            Some(a) => Ok(MultiIndex(a)),
            None => bad(format!("function {} needs 'alpha'", self.function())),
        }
    }
}

/// Default half-periods: a mildly skewed lattice with periods near 2.
pub fn default_half_periods(rank: usize) -> Vec<[f64; 4]> {
    let all = [[2.0, 0.1, 0.0, 0.2], [0.0, 2.2, 0.3, 0.0], [0.1, 0.0, 1.8, -0.2], [0.0, 0.2, 0.1, 2.0]];
    all[..rank.clamp(1, 4)].to_vec()
}

/// Parses `"a,b,c,d"`.
pub fn parse_tuple(s: &str) -> Result<[f64; 4], ConfigError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return bad(format!("'{s}' is not a comma-separated 4-tuple"));
    }
    let mut out = [0.0; 4];
    for (o, p) in out.iter_mut().zip(&parts) {
        *o = p.parse().map_err(|_| ConfigError(format!("'{p}' is not a number")))?;
    }
    Ok(out)
}

/// Parses `"ω₁;ω₂;..."`, each a comma-separated 4-tuple.
pub fn parse_lattice(s: &str) -> Result<Vec<[f64; 4]>, ConfigError> {
    let periods: Vec<[f64; 4]> =
        s.split(';').filter(|p| !p.trim().is_empty()).map(parse_tuple).collect::<Result<_, _>>()?;
    if periods.is_empty() || periods.len() > 4 {
        return bad("lattice needs between 1 and 4 half-periods");
    }
    Ok(periods)
}

/// Parses `"a,b,c,d"` as a multi-index.
pub fn parse_index(s: &str) -> Result<[u32; 4], ConfigError> {
    let t = parse_tuple(s)?;
    if t.iter().any(|v| *v < 0.0 || v.fract() != 0.0) {
        return bad(format!("'{s}' is not a multi-index"));
    }
    Ok(t.map(|v| v as u32))
}
