//! Identity-check suite with a machine-readable report.

use cliffordian::oracles::{
    classical_cot_partial_fractions, classical_weierstrass_zeta, cot_partial_fraction_tail, weierstrass_zeta_tail,
};
use cliffordian::trig::cotan_cl;
use cliffordian::weierstrass::{d0_p0, p_alpha, p_alpha_direct, z_function, zeta, EtaPolynomial};
use cliffordian::{Evaluation64, Lattice64, MultiIndex, Paravector64, SumConfig, ZetaForm};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{ConfigError, Fault, JobConfig, Suite, SCHEMA_VERSION};
use crate::CliError;

/// Allowed residual as a multiple of the combined tail bounds.
pub const TAIL_FACTOR: f64 = 10.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityResult {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub schema_version: u32,
    pub suite: Suite,
    pub lattice: Vec<[f64; 4]>,
    pub shells: usize,
    pub identities: Vec<IdentityResult>,
    pub all_pass: bool,
}

impl CheckReport {
    pub fn failures(&self) -> usize {
        self.identities.iter().filter(|i| !i.pass).count()
    }
}

/// Default fixed truncation per rank for the check suite.
pub fn default_check_shells(rank: usize) -> usize {
    match rank {
        1 => 2000,
        2 => 60,
        3 => 20,
        _ => 8,
    }
}

struct Runner {
    results: Vec<IdentityResult>,
}

impl Runner {
    fn record(&mut self, name: String, outcome: cliffordian::Result<(f64, f64)>) {
        let r = match outcome {
            Ok((residual, tolerance)) => {
                IdentityResult { name, residual, tolerance, pass: residual <= tolerance, error: None }
            }
            Err(e) => IdentityResult {
                name,
                residual: f64::NAN,
                tolerance: f64::NAN,
                pass: false,
                error: Some(e.to_string()),
            },
        };
        self.results.push(r);
    }
}

fn tails(es: &[&Evaluation64]) -> f64 {
    TAIL_FACTOR * es.iter().map(|e| e.tail_bound).sum::<f64>()
}

fn small_offset(rng: &mut ChaCha8Rng, scale: f64) -> Paravector64 {
    Paravector64::from_coords([0; 4].map(|_| rng.gen_range(-scale..scale)))
}

/// `cmd_check`: runs the configured suite and returns its report.
pub fn run_check(cfg: &JobConfig) -> Result<CheckReport, CliError> {
    let spec = cfg.check.clone().unwrap_or_default();
    let lattice = cfg.lattice()?;
    let rank = lattice.rank();
    let shells = spec.shells.unwrap_or_else(|| default_check_shells(rank));
    if shells == 0 {
        return Err(ConfigError("check.shells must be positive".into()).into());
    }
    let samples = spec.samples.unwrap_or(2);
    let sum = SumConfig { workers: cfg.sum.workers.unwrap_or(1), ..SumConfig::fixed(rank, shells) };
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.unwrap_or(7));
    let mut run = Runner { results: Vec::new() };
    let ctx = Ctx { l: &lattice, sum, samples, fault: spec.fault };
    if matches!(spec.suite, Suite::Default | Suite::All) {
        ctx.default_suite(&mut run, &mut rng);
    }
    if matches!(spec.suite, Suite::EtaLiteral | Suite::All) {
        ctx.literal_suite(&mut run, &mut rng);
    }
    let all_pass = run.results.iter().all(|r| r.pass);
    Ok(CheckReport {
        schema_version: SCHEMA_VERSION,
        suite: spec.suite,
        lattice: lattice.half_periods().iter().map(|w| w.to_f64()).collect(),
        shells,
        identities: run.results,
        all_pass,
    })
}

struct Ctx<'a> {
    l: &'a Lattice64,
    sum: SumConfig,
    samples: usize,
    fault: Option<Fault>,
}

impl Ctx<'_> {
    fn zeta(&self, x: &Paravector64) -> cliffordian::Result<Evaluation64> {
        zeta(self.l, x, &self.sum, ZetaForm::Collapsed)
    }

    fn eta(&self, w: &Paravector64) -> cliffordian::Result<EtaPolynomial<f64>> {
        EtaPolynomial::new(self.l, w, &self.sum)
    }

    fn omegas(&self) -> Vec<Paravector64> {
        self.l.half_periods().to_vec()
    }

    fn default_suite(&self, run: &mut Runner, rng: &mut ChaCha8Rng) {
        let rank = self.l.rank();
        for i in 0..self.samples {
            let x = small_offset(rng, 0.5);
            run.record(
                format!("zeta_odd#{i}"),
                (|| {
                    let (a, b) = (self.zeta(&x)?, self.zeta(&-x)?);
                    Ok(((a.value + b.value).norm(), 1e-12 * (1.0 + a.value.norm())))
                })(),
            );
        }
        for (j, w) in self.omegas().into_iter().enumerate() {
            let scale = 0.1 * w.norm();
            let eta = self.eta(&w);
            let eta_neg = self.eta(&-w);
            for i in 0..self.samples {
                let x = -w + small_offset(rng, scale);
                run.record(
                    format!("quasi_periodicity[{j}]#{i}"),
                    (|| {
                        let eta = eta.as_ref().map_err(Clone::clone)?;
                        let a = self.zeta(&(x + w.scale(2.0)))?;
                        let b = self.zeta(&x)?;
                        let mut e = eta.eval(&x);
                        if self.fault == Some(Fault::EtaSign) {
                            e.value = -e.value;
                        }
                        Ok(((a.value - b.value - e.value).norm(), tails(&[&a, &b, &e])))
                    })(),
                );
                let y = w + small_offset(rng, scale);
                run.record(
                    format!("shift_back[{j}]#{i}"),
                    (|| {
                        // ζ(x - 2ω) = ζ(x) - η(x - 2ω, ω)
                        let eta = eta.as_ref().map_err(Clone::clone)?;
                        let a = self.zeta(&(y - w.scale(2.0)))?;
                        let b = self.zeta(&y)?;
                        let e = eta.eval(&(y - w.scale(2.0)));
                        Ok(((a.value - b.value + e.value).norm(), tails(&[&a, &b, &e])))
                    })(),
                );
                let z = small_offset(rng, 2.0 * scale);
                run.record(
                    format!("eta_negated_period[{j}]#{i}"),
                    (|| {
                        // η(x, -ω) = -η(x - 2ω, ω)
                        let (eta, eta_neg) =
                            (eta.as_ref().map_err(Clone::clone)?, eta_neg.as_ref().map_err(Clone::clone)?);
                        let a = eta_neg.eval(&z);
                        let b = eta.eval(&(z - w.scale(2.0)));
                        Ok(((a.value + b.value).norm(), tails(&[&a, &b])))
                    })(),
                );
                run.record(
                    format!("eta_joint_oddness[{j}]#{i}"),
                    (|| {
                        // η(-x, -ω) = -η(x, ω)
                        let (eta, eta_neg) =
                            (eta.as_ref().map_err(Clone::clone)?, eta_neg.as_ref().map_err(Clone::clone)?);
                        let a = eta_neg.eval(&-z);
                        let b = eta.eval(&z);
                        Ok(((a.value + b.value).norm(), tails(&[&a, &b])))
                    })(),
                );
            }
            run.record(
                format!("eta_at_minus_period[{j}]"),
                (|| {
                    // η(-ω, ω) = 2ζ(ω)
                    let eta = eta.as_ref().map_err(Clone::clone)?;
                    let a = eta.eval(&-w);
                    let z = eta.zeta_omega();
                    Ok(((a.value - z.value.scale(2.0)).norm(), tails(&[&a, z, z])))
                })(),
            );
            run.record(
                format!("z_periodic_in_a[{j}]"),
                (|| {
                    let x = small_offset(rng, scale);
                    let a = Paravector64::new(0.3, -0.2, 0.1, 0.25).scale(0.1 * w.norm());
                    let p = z_function(self.l, &x, &a, &self.sum)?;
                    let q = z_function(self.l, &x, &(a + w.scale(2.0)), &self.sum)?;
                    Ok(((p.value - q.value).norm(), tails(&[&p, &q])))
                })(),
            );
        }
        if rank >= 2 {
            let (w1, w2) = (self.l.half_periods()[0], self.l.half_periods()[1]);
            let w12 = -w1 - w2;
            for i in 0..self.samples {
                let x = small_offset(rng, 0.5);
                run.record(
                    format!("addition_law_shifted#{i}"),
                    (|| {
                        // η(x, ω¹) + η(x + 2ω¹, ω²) + η(x + 2ω¹ + 2ω², ω¹²) = 0
                        let a = self.eta(&w1)?.eval(&x);
                        let b = self.eta(&w2)?.eval(&(x + w1.scale(2.0)));
                        let c = self.eta(&w12)?.eval(&(x + w1.scale(2.0) + w2.scale(2.0)));
                        Ok(((a.value + b.value + c.value).norm(), tails(&[&a, &b, &c])))
                    })(),
                );
            }
        }
        if rank == 4 {
            self.elliptic_identities(run, rng);
        }
        oracle_identities(run, rng, self.samples);
    }

    fn elliptic_identities(&self, run: &mut Runner, rng: &mut ChaCha8Rng) {
        let alphas = [MultiIndex::new(3, 0, 0, 0), MultiIndex::new(1, 1, 1, 0), MultiIndex::new(0, 1, 0, 2)];
        for i in 0..self.samples {
            let x = small_offset(rng, 0.6);
            for a in &alphas {
                let name = format!("p_even[{}{}{}{}]#{i}", a.0[0], a.0[1], a.0[2], a.0[3]);
                run.record(
                    name,
                    (|| {
                        let (p, q) = (p_alpha(self.l, a, &x, &self.sum)?, p_alpha(self.l, a, &-x, &self.sum)?);
                        Ok(((p.value - q.value).norm(), 1e-12 * (1.0 + p.value.norm())))
                    })(),
                );
            }
            run.record(
                format!("p_routes#{i}"),
                (|| {
                    let p = p_alpha(self.l, &alphas[0], &x, &self.sum)?;
                    let q = p_alpha_direct(self.l, &x, &self.sum)?;
                    Ok(((p.value - q.value).norm(), tails(&[&p, &q])))
                })(),
            );
            run.record(
                format!("d0_p0_odd#{i}"),
                (|| {
                    let (p, q) = (d0_p0(self.l, &x, &self.sum)?, d0_p0(self.l, &-x, &self.sum)?);
                    Ok(((p.value + q.value).norm(), 1e-12 * (1.0 + p.value.norm())))
                })(),
            );
        }
        for (j, w) in self.omegas().into_iter().enumerate() {
            // centre the pair on the half-period so both points see the same radius
            let x = -w + small_offset(rng, 0.1 * w.norm());
            for a in &alphas[..2] {
                let name = format!("p_periodic[{}{}{}{}][{j}]", a.0[0], a.0[1], a.0[2], a.0[3]);
                run.record(
                    name,
                    (|| {
                        let p = p_alpha(self.l, a, &x, &self.sum)?;
                        let q = p_alpha(self.l, a, &(x + w.scale(2.0)), &self.sum)?;
                        Ok(((p.value - q.value).norm(), tails(&[&p, &q])))
                    })(),
                );
            }
        }
        for (v, point) in self.l.half_period_vertices().iter().enumerate() {
            run.record(
                format!("vertex_zero[{v}]"),
                (|| {
                    let e = d0_p0(self.l, point, &self.sum)?;
                    Ok((e.value.norm(), tails(&[&e])))
                })(),
            );
        }
    }

    fn literal_suite(&self, run: &mut Runner, rng: &mut ChaCha8Rng) {
        for (j, w) in self.omegas().into_iter().enumerate() {
            let scale = 0.1 * w.norm();
            let eta = self.eta(&w);
            let eta_neg = self.eta(&-w);
            let get = || -> cliffordian::Result<(&EtaPolynomial<f64>, &EtaPolynomial<f64>)> {
                Ok((eta.as_ref().map_err(Clone::clone)?, eta_neg.as_ref().map_err(Clone::clone)?))
            };
            for i in 0..self.samples {
                let x = small_offset(rng, 2.0 * scale);
                run.record(
                    format!("eta_odd_in_period[{j}]#{i}"),
                    (|| {
                        let (e, n) = get()?;
                        let (a, b) = (n.eval(&x), e.eval(&x));
                        Ok(((a.value + b.value).norm(), tails(&[&a, &b])))
                    })(),
                );
                run.record(
                    format!("eta_even_in_x[{j}]#{i}"),
                    (|| {
                        let (e, _) = get()?;
                        let (a, b) = (e.eval(&-x), e.eval(&x));
                        Ok(((a.value - b.value).norm(), tails(&[&a, &b])))
                    })(),
                );
                run.record(
                    format!("eta_joint_oddness[{j}]#{i}"),
                    (|| {
                        let (e, n) = get()?;
                        let (a, b) = (n.eval(&-x), e.eval(&x));
                        Ok(((a.value + b.value).norm(), tails(&[&a, &b])))
                    })(),
                );
                run.record(
                    format!("eta_formula_in_x[{j}]#{i}"),
                    (|| {
                        // η(x, ω) = 2ζ(ω) + (x|∇)²ζ(ω)
                        let (e, _) = get()?;
                        let a = e.eval(&x);
                        let (second, second_tail) = e.second_derivative(&x);
                        let z = e.zeta_omega();
                        let rhs = z.value.scale(2.0) + second;
                        Ok(((a.value - rhs).norm(), tails(&[&a, z, z]) + TAIL_FACTOR * second_tail))
                    })(),
                );
                let y = w + small_offset(rng, scale);
                run.record(
                    format!("shift_back_literal[{j}]#{i}"),
                    (|| {
                        // ζ(x - 2ω) = ζ(x) - η(x, ω)
                        let (e, _) = get()?;
                        let a = self.zeta(&(y - w.scale(2.0)))?;
                        let b = self.zeta(&y)?;
                        let c = e.eval(&y);
                        Ok(((a.value - b.value + c.value).norm(), tails(&[&a, &b, &c])))
                    })(),
                );
            }
            run.record(
                format!("eta_at_period[{j}]"),
                (|| {
                    // η(ω, ω) = 2ζ(ω)
                    let (e, _) = get()?;
                    let a = e.eval(&w);
                    let z = e.zeta_omega();
                    Ok(((a.value - z.value.scale(2.0)).norm(), tails(&[&a, z, z])))
                })(),
            );
        }
        if self.l.rank() >= 2 {
            let (w1, w2) = (self.l.half_periods()[0], self.l.half_periods()[1]);
            for i in 0..self.samples {
                let x = small_offset(rng, 0.5);
                run.record(
                    format!("addition_law#{i}"),
                    (|| {
                        // η(x, ω¹) + η(x, ω²) + η(x, ω¹²) = 0, ω¹² = -ω¹ - ω²
                        let a = self.eta(&w1)?.eval(&x);
                        let b = self.eta(&w2)?.eval(&x);
                        let c = self.eta(&(-w1 - w2))?.eval(&x);
                        Ok(((a.value + b.value + c.value).norm(), tails(&[&a, &b, &c])))
                    })(),
                );
            }
        }
    }
}

/// Comparisons with the classical complex oracles on their own slice lattices.
fn oracle_identities(run: &mut Runner, rng: &mut ChaCha8Rng, samples: usize) {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let l1 = Lattice64::rectangular(1, half_pi).expect("valid lattice");
    let k1 = 2000;
    let (w1, w2) = (Complex64::new(1.0, 0.0), Complex64::new(0.2, 1.1));
    let l2 = Lattice64::new(vec![Paravector64::new(w1.re, w1.im, 0.0, 0.0), Paravector64::new(w2.re, w2.im, 0.0, 0.0)])
        .expect("valid lattice");
    let k2 = 40;
    for i in 0..samples {
        let t: f64 = rng.gen_range(-1.4..1.4);
        run.record(
            format!("zeta1_cot_partial_fractions#{i}"),
            (|| {
                let e = zeta(&l1, &Paravector64::scalar(t), &SumConfig::fixed(1, k1), ZetaForm::Collapsed)?;
                let c = classical_cot_partial_fractions(t, k1)?;
                Ok((
                    (e.value - Paravector64::scalar(c)).norm(),
                    TAIL_FACTOR * (e.tail_bound + cot_partial_fraction_tail(t, k1)),
                ))
            })(),
        );
        run.record(
            format!("cotan_real_axis#{i}"),
            (|| {
                let c = cotan_cl(&Paravector64::scalar(t))?;
                let exact = 1.0 / t.tan();
                Ok(((c - Paravector64::scalar(exact)).norm(), 1e-10 * (1.0 + exact.abs())))
            })(),
        );
        let z = Complex64::new(rng.gen_range(-0.45..0.45), rng.gen_range(-0.45..0.45));
        run.record(
            format!("zeta2_complex_slice#{i}"),
            (|| {
                let e =
                    zeta(&l2, &Paravector64::new(z.re, z.im, 0.0, 0.0), &SumConfig::fixed(2, k2), ZetaForm::Collapsed)?;
                let c = classical_weierstrass_zeta(z, w1, w2, k2)?;
                let diff = (e.value - Paravector64::new(c.re, c.im, 0.0, 0.0)).norm();
                Ok((diff, TAIL_FACTOR * (e.tail_bound + weierstrass_zeta_tail(z.norm(), w1, w2, k2))))
            })(),
        );
    }
}
