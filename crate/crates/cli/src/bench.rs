//! Error-versus-work and worker-scaling sweeps for the lattice sums.

use std::time::Instant;

use cliffordian::weierstrass::zeta;
use cliffordian::{Lattice64, Paravector64, SumConfig, ZetaForm};
use serde::Serialize;

use crate::config::{ConfigError, JobConfig, SCHEMA_VERSION};
use crate::CliError;

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub shells: usize,
    pub paired: bool,
    pub compensated: bool,
    pub seconds: f64,
    pub evals_per_second: f64,
    pub tail_bound: f64,
    /// Distance to the reference value.
    pub error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct StrategySlope {
    pub paired: bool,
    pub compensated: bool,
    pub error_slope: Option<f64>,
    /// Same fit for the certified tail bound.
    pub tail_slope: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingRow {
    pub workers: usize,
    pub seconds: f64,
    pub speedup: f64,
    /// Bitwise equal to the single-worker value.
    pub identical: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub schema_version: u32,
    pub rank: usize,
    pub point: [f64; 4],
    pub reference_shells: usize,
    pub reference_tail_bound: f64,
    pub sweep: Vec<SweepRow>,
    /// Least-squares slope of log(error) against log(shells) per strategy.
    pub slopes: Vec<StrategySlope>,
    pub scaling: Vec<ScalingRow>,
}

fn default_shells(rank: usize) -> Vec<usize> {
    match rank {
        1 => vec![100, 1000, 10_000, 100_000],
        2 => vec![10, 20, 40, 80],
        3 => vec![4, 8, 16, 32],
        _ => vec![2, 4, 8, 12],
    }
}

fn log_log_slope(points: &[(usize, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        points.iter().filter(|(_, e)| *e > 0.0 && e.is_finite()).map(|&(k, e)| ((k as f64).ln(), e.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn timed(l: &Lattice64, x: &Paravector64, cfg: &SumConfig) -> Result<(cliffordian::Evaluation64, f64), CliError> {
    let start = Instant::now();
    let e = zeta(l, x, cfg, ZetaForm::Collapsed)?;
    Ok((e, start.elapsed().as_secs_f64()))
}

/// `bench`: sweeps `ζ_N` of the configured lattice at one point.
pub fn run_bench(cfg: &JobConfig) -> Result<BenchReport, CliError> {
    let spec = cfg.bench.clone().unwrap_or_default();
    let lattice = cfg.lattice()?;
    let rank = lattice.rank();
    let shells = spec.shells.clone().unwrap_or_else(|| default_shells(rank));
    let workers = spec.workers.clone().unwrap_or_else(|| vec![1, 2, 4]);
    if shells.is_empty() || shells.contains(&0) || workers.is_empty() || workers.contains(&0) {
        return Err(ConfigError("bench.shells and bench.workers must be non-empty and positive".into()).into());
    }
    let point = spec.point.or(cfg.point).unwrap_or([0.3, 0.2, -0.1, 0.15]);
    let x = Paravector64::from_coords(point);
    let kmax = *shells.iter().max().expect("non-empty");
    let reference_shells = 2 * kmax;
    let reference = zeta(&lattice, &x, &SumConfig::fixed(rank, reference_shells), ZetaForm::Collapsed)?;

    let mut sweep = Vec::new();
    for &k in &shells {
        for paired in [true, false] {
            for compensated in [true, false] {
                let c = SumConfig { pairing: paired, compensated, ..SumConfig::fixed(rank, k) };
                let (e, secs) = timed(&lattice, &x, &c)?;
                sweep.push(SweepRow {
                    shells: k,
                    paired,
                    compensated,
                    seconds: secs,
                    evals_per_second: 1.0 / secs.max(1e-12),
                    tail_bound: e.tail_bound,
                    error: (e.value - reference.value).norm(),
                });
            }
        }
    }

    let mut slopes = Vec::new();
    for paired in [true, false] {
        for compensated in [true, false] {
            let rows: Vec<&SweepRow> =
                sweep.iter().filter(|r| r.paired == paired && r.compensated == compensated).collect();
            let errors: Vec<(usize, f64)> = rows.iter().map(|r| (r.shells, r.error)).collect();
            let tails: Vec<(usize, f64)> = rows.iter().map(|r| (r.shells, r.tail_bound)).collect();
            slopes.push(StrategySlope {
                paired,
                compensated,
                error_slope: log_log_slope(&errors),
                tail_slope: log_log_slope(&tails),
            });
        }
    }

    let mut scaling: Vec<ScalingRow> = Vec::new();
    let mut base: Option<(Paravector64, f64)> = None;
    for &w in &workers {
        let c = SumConfig::fixed(rank, kmax).with_workers(w);
        let (e, secs) = timed(&lattice, &x, &c)?;
        let (v0, t0) = *base.get_or_insert((e.value, secs));
        scaling.push(ScalingRow { workers: w, seconds: secs, speedup: t0 / secs.max(1e-12), identical: e.value == v0 });
    }

    Ok(BenchReport {
        schema_version: SCHEMA_VERSION,
        rank,
        point,
        reference_shells,
        reference_tail_bound: reference.tail_bound,
        sweep,
        slopes,
        scaling,
    })
}
