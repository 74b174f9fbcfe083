//! Weierstrass-type functions `ζ_N` (`N = 1..4`), their exact directional
//! derivatives, the functions `Z_N`, the quasi-periods `η_N` and the elliptic
//! family `℘_α` built from third derivatives of `ζ_4`.
//!
//! `ζ_N(x) = x⁻¹ + Σ_{w ≠ 0} [(x - w)⁻¹ + Σ_{μ<N} (w⁻¹x)^μ w⁻¹]`. Each bracket
//! equals `(w⁻¹x)^N (x - w)⁻¹ = -Σ_{n≥N} (w⁻¹x)^n w⁻¹`, and joining `w` with
//! `-w` keeps only odd `n`. Every returned value carries the shell count used
//! and a rigorous bound on the discarded tail.

use nalgebra::{Matrix4, Vector4};

use crate::calculus::{DirectionList, WordForest, WordPlan, MAX_DIRECTIONS};
use crate::clifford::{MultiIndex, Multivector, Paravector};
use crate::error::{Error, Result};
use crate::lattice::{Lattice, SumConfig, TailTerm};
use crate::scalar::{factorial, Scalar};
use crate::summation::{lattice_sum, lattice_sum_with};

/// How the general term of the `ζ_N` series is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ZetaForm {
    /// `(x - w)⁻¹ + Σ_{μ<N} (w⁻¹x)^μ w⁻¹`, summed as written.
    Defining,
    /// `(w⁻¹x)^N (x - w)⁻¹`.
    Collapsed,
    /// `-Σ_{n≥N} (w⁻¹x)^n w⁻¹`, expanded per lattice point; needs `|x|` below
    /// the shortest lattice vector.
    PowerSeries,
}

/// A truncated series value with its truncation record.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation<T> {
    pub value: Paravector<T>,
    /// Number of shells summed.
    pub shells: usize,
    /// Upper bound on the norm of the discarded part of the series.
    pub tail_bound: f64,
    /// Norm of the grade-2/3 part of the summed multivector before projection.
    pub residue: f64,
}

impl<T: Scalar> Evaluation<T> {
    /// Projects a summed multivector, failing with `GradeLeak` past the default tolerance.
    fn from_sum(total: Multivector<T>, shells: usize, tail_bound: f64) -> Result<Self> {
        Ok(Self { value: total.to_paravector()?, shells, tail_bound, residue: total.residue().as_f64() })
    }

    /// Grade-2/3 residue relative to `|value|`.
    pub fn relative_residue(&self) -> f64 {
        let v = self.value.norm().as_f64();
        if v == 0.0 {
            self.residue
        } else {
            self.residue / v
        }
    }
}

fn check_near<T: Scalar>(x: &Paravector<T>, w: &Paravector<T>, guard: f64) -> Result<()> {
    let d = x.distance(w).as_f64();
    if d < guard {
        return Err(Error::NearPole { distance: d, lattice_point: w.to_f64() });
    }
    Ok(())
}

fn check_pair<T: Scalar>(x: &Paravector<T>, w: &Paravector<T>, guard: f64) -> Result<()> {
    check_near(x, w, guard)?;
    check_near(x, &-*w, guard)
}

/// `(w⁻¹x)^n m`.
#[inline]
fn apply_power<T: Scalar>(winv: &Paravector<T>, x: &Paravector<T>, n: usize, mut m: Multivector<T>) -> Multivector<T> {
    for _ in 0..n {
        m = winv.left_mul(&x.left_mul(&m));
    }
    m
}

/// `Σ_{μ<N, keep(μ)} (w⁻¹x)^μ w⁻¹`.
fn polynomial_part<T: Scalar>(
    winv: &Paravector<T>,
    x: &Paravector<T>,
    n: usize,
    keep: impl Fn(usize) -> bool,
) -> Multivector<T> {
    let mut acc = Multivector::zero();
    let mut m = winv.to_multivector();
    for mu in 0..n {
        if keep(mu) {
            acc += m;
        }
        if mu + 1 < n {
            m = apply_power(winv, x, 1, m);
        }
    }
    acc
}

/// Expands `-c Σ_{n ≥ n0, step} (w⁻¹x)^n w⁻¹` until the geometric remainder is
/// negligible next to the leading term; returns the sum and a bound on what
/// was left out.
fn power_series_term<T: Scalar>(
    winv: &Paravector<T>,
    x: &Paravector<T>,
    n0: usize,
    step: usize,
    c: T,
) -> (Multivector<T>, f64) {
    let rho = (x.norm() * winv.norm()).as_f64();
    let mut m = apply_power(winv, x, n0, winv.to_multivector());
    let mut acc = Multivector::zero();
    let mut n = n0;
    loop {
        acc -= m.scale(c);
        let rel = rho.powi((n + step - n0) as i32) / (1.0 - rho.powi(step as i32));
        if rel <= 1e-17 || n > 4000 {
            let rem = c.as_f64() * winv.norm().as_f64() * rho.powi((n + step) as i32) / (1.0 - rho.powi(step as i32));
            return (acc, rem);
        }
        m = apply_power(winv, x, step, m);
        n += step;
    }
}

fn guard_origin<T: Scalar>(x: &Paravector<T>, cfg: &SumConfig) -> Result<()> {
    check_near(x, &Paravector::zero(), cfg.pole_guard)
}

/// Truncated `ζ_N(x)` for the lattice's rank `N`.
pub fn zeta<T: Scalar>(l: &Lattice<T>, x: &Paravector<T>, cfg: &SumConfig, form: ZetaForm) -> Result<Evaluation<T>> {
    guard_origin(x, cfg)?;
    let n = l.rank();
    let r = x.norm().as_f64();
    let (shells, mut tail) = cfg.choose_shells(l, r, &TailTerm::value(cfg.pairing))?;
    if form == ZetaForm::PowerSeries {
        let s = l.shortest_vector();
        if !(r < s) {
            return Err(Error::RadiusTooLarge { radius: r, limit: s });
        }
    }
    let guard = cfg.pole_guard;
    let paired = cfg.pairing;
    let two = T::lit(2.0);
    let sums = lattice_sum(l, shells, cfg, 2, |w, sink| {
        check_pair(x, w, guard)?;
        let winv = w.inverse_unchecked();
        match (form, paired) {
            (ZetaForm::Collapsed, true) => {
                let a = (*x - *w).inverse_unchecked();
                let b = (*x + *w).inverse_unchecked();
                let s = if n.is_multiple_of(2) { a + b } else { a - b };
                sink.add(0, &apply_power(&winv, x, n, s.to_multivector()));
            }
            (ZetaForm::Collapsed, false) => {
                let a = (*x - *w).inverse_unchecked();
                let b = (*x + *w).inverse_unchecked();
                sink.add(0, &apply_power(&winv, x, n, a.to_multivector()));
                sink.add(0, &apply_power(&-winv, x, n, b.to_multivector()));
            }
            (ZetaForm::Defining, true) => {
                let a = (*x - *w).inverse_unchecked();
                let b = (*x + *w).inverse_unchecked();
                let poly = polynomial_part(&winv, x, n, |mu| mu % 2 == 1).scale(two);
                sink.add(0, &((a + b).to_multivector() + poly));
            }
            (ZetaForm::Defining, false) => {
                for s in [*w, -*w] {
                    let sinv = s.inverse_unchecked();
                    let a = (*x - s).inverse_unchecked();
                    sink.add(0, &(a.to_multivector() + polynomial_part(&sinv, x, n, |_| true)));
                }
            }
            (ZetaForm::PowerSeries, true) => {
                let n0 = if n.is_multiple_of(2) { n + 1 } else { n };
                let (v, rem) = power_series_term(&winv, x, n0, 2, two);
                sink.add(0, &v);
                sink.add(1, &Multivector::scalar(T::lit(rem)));
            }
            (ZetaForm::PowerSeries, false) => {
                for s in [winv, -winv] {
                    let (v, rem) = power_series_term(&s, x, n, 1, T::one());
                    sink.add(0, &v);
                    sink.add(1, &Multivector::scalar(T::lit(rem)));
                }
            }
        }
        Ok(())
    })?;
    tail += sums[1][0].as_f64();
    let total = x.inverse()?.to_multivector() + sums[0];
    Evaluation::from_sum(total, shells, tail)
}

/// Per-request word lists for the fused derivative pass.
struct DerivativeRequest<T> {
    /// Words of the inverse part, with sign, multiplicity and request weight folded in.
    inverse: Vec<u32>,
    inverse_weight: T,
    /// `(μ, words, weight)` for the polynomial corrections `(w⁻¹a)^μ w⁻¹`.
    polys: Vec<(usize, Vec<u32>, T)>,
}

fn letter_id<T: Scalar>(letters: &mut Vec<Paravector<T>>, p: &Paravector<T>) -> u16 {
    match letters.iter().position(|q| q == p) {
        Some(i) => i as u16,
        None => {
            letters.push(*p);
            (letters.len() - 1) as u16
        }
    }
}

/// Exact termwise derivatives of the truncated `ζ_N` at `a`, one per direction
/// list, all from a single pass over the lattice. Values and tails are
/// multiplied by `weights[i]` (resp. its absolute value).
fn weighted_derivatives<T: Scalar>(
    l: &Lattice<T>,
    a: &Paravector<T>,
    requests: &[DirectionList<T>],
    weights: &[T],
    cfg: &SumConfig,
) -> Result<Vec<Evaluation<T>>> {
    guard_origin(a, cfg)?;
    let n = l.rank();
    let r = a.norm().as_f64();
    let paired = cfg.pairing;
    let terms: Vec<TailTerm> = requests
        .iter()
        .zip(weights)
        .map(|(d, w)| TailTerm::derivative(d.len(), d.norm_product() * w.abs().as_f64(), paired))
        .collect();
    let mut shells = 0;
    for t in &terms {
        shells = shells.max(cfg.choose_shells(l, r, t)?.0);
    }

    let mut letters = vec![*a];
    let mut inverse_forest = WordForest::new();
    let mut poly_forest = WordForest::new();
    let plans: Vec<DerivativeRequest<T>> = requests
        .iter()
        .zip(weights)
        .map(|(d, &weight)| {
            let q = d.len();
            let ids: Vec<u16> = d.as_slice().iter().map(|h| letter_id(&mut letters, h)).collect();
            // local letter q is the undifferentiated point `a`, global letter 0
            let relabel = |word: &[u8]| -> Vec<u16> {
                word.iter().map(|&c| if c as usize == q { 0 } else { ids[c as usize] }).collect()
            };
            let inv = WordPlan::inverse_derivative(d);
            let sign = if q % 2 == 1 { -T::one() } else { T::one() };
            let inverse = inv.words().iter().map(|w| inverse_forest.insert(&relabel(w))).collect();
            let polys = (q..n)
                .filter(|mu| !paired || mu % 2 == 1)
                .filter_map(|mu| WordPlan::power_derivative(d, mu).map(|p| (mu, p)))
                .map(|(mu, p)| {
                    let words = p.words().iter().map(|w| poly_forest.insert(&relabel(w))).collect();
                    let scale = if paired { T::lit(2.0) } else { T::one() };
                    (mu, words, T::lit(p.weight()) * scale * weight)
                })
                .collect();
            DerivativeRequest { inverse, inverse_weight: sign * T::lit(inv.weight()) * weight, polys }
        })
        .collect();

    let sum_words = |u: &Paravector<T>, values: &[Multivector<T>], ids: &[u32]| -> Multivector<T> {
        let mut m = Multivector::zero();
        for &id in ids {
            m += WordForest::value(u, values, id);
        }
        m
    };
    let guard = cfg.pole_guard;
    let sums = lattice_sum_with(
        l,
        shells,
        cfg,
        plans.len(),
        || (Vec::new(), Vec::new(), Vec::new()),
        |w, (inv1, inv2, poly), sink| {
            check_pair(a, w, guard)?;
            let winv = w.inverse_unchecked();
            let u1 = (*a - *w).inverse_unchecked();
            let u2 = (*a + *w).inverse_unchecked();
            inverse_forest.eval_into(&u1, &letters, inv1);
            inverse_forest.eval_into(&u2, &letters, inv2);
            poly_forest.eval_into(&winv, &letters, poly);
            for (i, p) in plans.iter().enumerate() {
                let inv_a = sum_words(&u1, inv1, &p.inverse);
                let inv_b = sum_words(&u2, inv2, &p.inverse);
                if paired {
                    let mut m = (inv_a + inv_b).scale(p.inverse_weight);
                    for (_, ids, c) in &p.polys {
                        m += sum_words(&winv, poly, ids).scale(*c);
                    }
                    sink.add(i, &m);
                } else {
                    // the polynomial words at -w pick up (-1)^(μ+1)
                    let mut ma = inv_a.scale(p.inverse_weight);
                    let mut mb = inv_b.scale(p.inverse_weight);
                    for (mu, ids, c) in &p.polys {
                        let v = sum_words(&winv, poly, ids).scale(*c);
                        ma += v;
                        if mu % 2 == 1 {
                            mb += v;
                        } else {
                            mb -= v;
                        }
                    }
                    sink.add(i, &ma);
                    sink.add(i, &mb);
                }
            }
            Ok(())
        },
    )?;
    let ainv = a.inverse()?;
    let mut origin_values = Vec::new();
    inverse_forest.eval_into(&ainv, &letters, &mut origin_values);
    plans
        .iter()
        .zip(sums)
        .zip(&terms)
        .map(|((p, s), t)| {
            let origin = sum_words(&ainv, &origin_values, &p.inverse).scale(p.inverse_weight);
            Evaluation::from_sum(origin + s, shells, l.tail_bound(r, shells, t)?)
        })
        .collect()
}

/// Exact derivatives `(h_1|∇)⋯(h_q|∇) ζ_N(a)` of the truncated series for
/// several direction lists at once (one lattice pass).
pub fn zeta_derivatives<T: Scalar>(
    l: &Lattice<T>,
    a: &Paravector<T>,
    requests: &[DirectionList<T>],
    cfg: &SumConfig,
) -> Result<Vec<Evaluation<T>>> {
    weighted_derivatives(l, a, requests, &vec![T::one(); requests.len()], cfg)
}

/// `(h_1|∇)⋯(h_q|∇) ζ_N(a)`, `1 ≤ q ≤ 4`, computed termwise from exact
/// derivatives of `(a - w)⁻¹` and of the polynomial correction terms.
pub fn zeta_dir_deriv<T: Scalar>(
    l: &Lattice<T>,
    a: &Paravector<T>,
    dirs: &DirectionList<T>,
    cfg: &SumConfig,
) -> Result<Evaluation<T>> {
    if dirs.len() > 4 {
        return Err(Error::InvalidArgument(format!("at most 4 directions, got {}", dirs.len())));
    }
    Ok(zeta_derivatives(l, a, std::slice::from_ref(dirs), cfg)?.remove(0))
}

/// `Z_N(x, a) = ζ_N(x + a) - Σ_{n=0}^{N-1} (x|∇)^n/n! ζ_N(a)`.
pub fn z_function<T: Scalar>(
    l: &Lattice<T>,
    x: &Paravector<T>,
    a: &Paravector<T>,
    cfg: &SumConfig,
) -> Result<Evaluation<T>> {
    let shifted = zeta(l, &(*x + *a), cfg, ZetaForm::Collapsed)?;
    let base = zeta(l, a, cfg, ZetaForm::Collapsed)?;
    let mut value = shifted.value - base.value;
    let mut tail = shifted.tail_bound + base.tail_bound;
    let mut shells = shifted.shells.max(base.shells);
    let mut residue = shifted.residue + base.residue;
    let n = l.rank();
    if n >= 2 {
        let requests: Vec<DirectionList<T>> = (1..n).map(|q| DirectionList::new(vec![*x; q])).collect::<Result<_>>()?;
        let weights: Vec<T> = (1..n).map(|q| factorial::<T>(q).recip()).collect();
        for d in weighted_derivatives(l, a, &requests, &weights, cfg)? {
            value -= d.value;
            tail += d.tail_bound;
            residue += d.residue;
            shells = shells.max(d.shells);
        }
    }
    Ok(Evaluation { value, shells, tail_bound: tail, residue })
}

/// `η_N(·, ω)` as a polynomial: `ζ_N(ω)` and, for `N ≥ 3`, the Hessian of
/// `ζ_N` at `ω`.
#[derive(Clone, Debug)]
pub struct EtaPolynomial<T> {
    omega: Paravector<T>,
    zeta_omega: Evaluation<T>,
    hessian: Option<[[Paravector<T>; 4]; 4]>,
    /// Largest grade-2/3 residue among the Hessian entries.
    hessian_residue: f64,
    /// Tail bound of a second derivative along unit directions.
    hessian_tail: f64,
    shells: usize,
}

impl<T: Scalar> EtaPolynomial<T> {
    pub fn new(l: &Lattice<T>, omega: &Paravector<T>, cfg: &SumConfig) -> Result<Self> {
        l.check_half_period(omega)?;
        let zeta_omega = zeta(l, omega, cfg, ZetaForm::Collapsed)?;
        let mut shells = zeta_omega.shells;
        let mut hessian_residue: f64 = 0.0;
        let (hessian, hessian_tail) = if l.rank().div_ceil(2) >= 2 {
            let mut pairs = Vec::new();
            let mut requests = Vec::new();
            for i in 0..4 {
                for j in i..4 {
                    pairs.push((i, j));
                    requests.push(DirectionList::new(vec![Paravector::basis(i), Paravector::basis(j)])?);
                }
            }
            let d = zeta_derivatives(l, omega, &requests, cfg)?;
            let mut h = [[Paravector::zero(); 4]; 4];
            let mut tail: f64 = 0.0;
            for ((i, j), e) in pairs.into_iter().zip(d) {
                hessian_residue = hessian_residue.max(e.residue);
                h[i][j] = e.value;
                h[j][i] = e.value;
                tail = tail.max(e.tail_bound);
                shells = shells.max(e.shells);
            }
            (Some(h), tail)
        } else {
            (None, 0.0)
        };
        Ok(Self { omega: *omega, zeta_omega, hessian, hessian_residue, hessian_tail, shells })
    }

    pub fn omega(&self) -> Paravector<T> {
        self.omega
    }

    pub fn zeta_omega(&self) -> &Evaluation<T> {
        &self.zeta_omega
    }

    /// `(v|∇)² ζ_N(ω)` with its tail bound; zero when `N ≤ 2`.
    pub fn second_derivative(&self, v: &Paravector<T>) -> (Paravector<T>, f64) {
        match &self.hessian {
            None => (Paravector::zero(), 0.0),
            Some(h) => {
                let mut s = Paravector::zero();
                for i in 0..4 {
                    for j in 0..4 {
                        s += h[i][j].scale(v.c[i] * v.c[j]);
                    }
                }
                (s, v.norm_sqr().as_f64() * self.hessian_tail)
            }
        }
    }

    /// `η_N(x, ω) = 2 Σ_{p} ((x+ω)|∇)^{2p}/(2p)! ζ_N(ω)`, `p < [(N+1)/2]`.
    /// The reported residue bounds the Hessian contribution from its entries.
    pub fn eval(&self, x: &Paravector<T>) -> Evaluation<T> {
        let (second, second_tail) = self.second_derivative(&(*x + self.omega));
        Evaluation {
            value: self.zeta_omega.value.scale(T::lit(2.0)) + second,
            shells: self.shells,
            tail_bound: 2.0 * self.zeta_omega.tail_bound + second_tail,
            residue: 2.0 * self.zeta_omega.residue + 4.0 * (*x + self.omega).norm_sqr().as_f64() * self.hessian_residue,
        }
    }
}

/// `η_N(x, ω)` for a half-period `ω`.
pub fn eta<T: Scalar>(
    l: &Lattice<T>,
    x: &Paravector<T>,
    omega: &Paravector<T>,
    cfg: &SumConfig,
) -> Result<Evaluation<T>> {
    Ok(EtaPolynomial::new(l, omega, cfg)?.eval(x))
}

fn require_rank4<T: Scalar>(l: &Lattice<T>) -> Result<()> {
    if l.rank() != 4 {
        return Err(Error::InvalidRank(l.rank()));
    }
    Ok(())
}

/// `℘_α(x) = -(1/3!) ∂^α ζ_4(x)` for `|α| = 3`, from exact third derivatives.
pub fn p_alpha<T: Scalar>(
    l: &Lattice<T>,
    alpha: &MultiIndex,
    x: &Paravector<T>,
    cfg: &SumConfig,
) -> Result<Evaluation<T>> {
    require_rank4(l)?;
    if alpha.len() != 3 {
        return Err(Error::BadIndex { length: alpha.len(), expected: 3 });
    }
    let dirs = DirectionList::from_letters(&alpha.letters())?;
    Ok(weighted_derivatives(l, x, &[dirs], &[-T::lit(1.0 / 6.0)], cfg)?.remove(0))
}

/// `p^n` for a paravector, computed in the commutative slice through `p`.
pub fn paravector_powi<T: Scalar>(p: &Paravector<T>, n: u32) -> Paravector<T> {
    let r = p.vector_norm();
    let (a, b) = (p.x0(), r);
    let (mut re, mut im) = (T::one(), T::zero());
    for _ in 0..n {
        (re, im) = (re * a - im * b, re * b + im * a);
    }
    if r == T::zero() {
        return Paravector::scalar(re);
    }
    let s = im / r;
    Paravector::new(re, p.c[1] * s, p.c[2] * s, p.c[3] * s)
}

/// Direct series `x⁻⁴ + Σ [(x - w)⁻⁴ - w⁻⁴]` for `℘_{(3,0,0,0)}`.
pub fn p_alpha_direct<T: Scalar>(l: &Lattice<T>, x: &Paravector<T>, cfg: &SumConfig) -> Result<Evaluation<T>> {
    require_rank4(l)?;
    guard_origin(x, cfg)?;
    let r = x.norm().as_f64();
    let term = TailTerm::derivative(3, 1.0 / 6.0, cfg.pairing);
    let (shells, tail) = cfg.choose_shells(l, r, &term)?;
    let guard = cfg.pole_guard;
    let paired = cfg.pairing;
    let sums = lattice_sum(l, shells, cfg, 1, |w, sink| {
        check_pair(x, w, guard)?;
        let w4 = paravector_powi(&w.inverse_unchecked(), 4);
        let a = paravector_powi(&(*x - *w).inverse_unchecked(), 4);
        let b = paravector_powi(&(*x + *w).inverse_unchecked(), 4);
        if paired {
            sink.add(0, &(a + b - w4.scale(T::lit(2.0))).to_multivector());
        } else {
            sink.add(0, &(a - w4).to_multivector());
            sink.add(0, &(b - w4).to_multivector());
        }
        Ok(())
    })?;
    let total = paravector_powi(&x.inverse()?, 4).to_multivector() + sums[0];
    Evaluation::from_sum(total, shells, tail)
}

/// `∂_0 ℘_{(3,0,0,0)}(x) = -4 [x⁻⁵ + Σ (x - w)⁻⁵]`.
pub fn d0_p0<T: Scalar>(l: &Lattice<T>, x: &Paravector<T>, cfg: &SumConfig) -> Result<Evaluation<T>> {
    require_rank4(l)?;
    guard_origin(x, cfg)?;
    let r = x.norm().as_f64();
    let term = TailTerm::derivative(4, 1.0 / 6.0, cfg.pairing);
    let (shells, tail) = cfg.choose_shells(l, r, &term)?;
    let guard = cfg.pole_guard;
    let paired = cfg.pairing;
    let sums = lattice_sum(l, shells, cfg, 1, |w, sink| {
        check_pair(x, w, guard)?;
        let a = paravector_powi(&(*x - *w).inverse_unchecked(), 5);
        let b = paravector_powi(&(*x + *w).inverse_unchecked(), 5);
        if paired {
            sink.add(0, &(a + b).to_multivector());
        } else {
            sink.add(0, &a.to_multivector());
            sink.add(0, &b.to_multivector());
        }
        Ok(())
    })?;
    let total = paravector_powi(&x.inverse()?, 5).to_multivector() + sums[0];
    Evaluation::from_sum(total.scale(T::lit(-4.0)), shells, tail)
}

/// Jacobian `J[i][j] = ∂_j (D₀℘₀)_i` from exact fifth derivatives of `ζ_4`.
pub fn d0_p0_jacobian<T: Scalar>(l: &Lattice<T>, x: &Paravector<T>, cfg: &SumConfig) -> Result<[[f64; 4]; 4]> {
    require_rank4(l)?;
    let requests: Vec<DirectionList<T>> = (0..4)
        .map(|j| {
            let mut d = vec![Paravector::basis(0); 4];
            d.push(Paravector::basis(j));
            DirectionList::with_max(d, MAX_DIRECTIONS)
        })
        .collect::<Result<_>>()?;
    let cols = weighted_derivatives(l, x, &requests, &[-T::lit(1.0 / 6.0); 4], cfg)?;
    let mut jac = [[0.0; 4]; 4];
    for (j, c) in cols.iter().enumerate() {
        for (i, row) in jac.iter_mut().enumerate() {
            row[j] = c.value.c[i].as_f64();
        }
    }
    Ok(jac)
}

/// One candidate zero of `D₀℘₀` found by [`zero_scan`].
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroCandidate {
    pub point: [f64; 4],
    /// Coordinates `t` with `point = 2 Σ t_j ω_j`, reduced to `[0, 1)`.
    pub cell_coords: [f64; 4],
    /// `|D₀℘₀|` at `point`.
    pub residual: f64,
    pub tail_bound: f64,
    /// 1 for a nondegenerate zero; 2 means "at least 2" (singular Jacobian).
    pub multiplicity: u32,
    /// Index into [`Lattice::half_period_vertices`] when the candidate is one.
    pub vertex: Option<usize>,
    /// Whether Newton refinement reduced the residual.
    pub refined: bool,
}

/// Value of `D₀℘₀` at one half-period vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexResidual {
    pub index: usize,
    pub point: [f64; 4],
    pub residual: f64,
    pub tail_bound: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZeroScan {
    pub candidates: Vec<ZeroCandidate>,
    pub vertices: Vec<VertexResidual>,
    pub grid_points: usize,
}

const CELL_TOL: f64 = 1e-6;

fn reduce_cell(c: f64) -> f64 {
    let r = c.rem_euclid(1.0);
    if r > 1.0 - CELL_TOL {
        0.0
    } else {
        r
    }
}

fn torus_close(a: &[f64; 4], b: &[f64; 4], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| {
        let d = (x - y).rem_euclid(1.0);
        d.min(1.0 - d) <= tol
    })
}

fn vertex_index(t: &[f64; 4]) -> Option<usize> {
    let mut mask = 0usize;
    for (j, &v) in t.iter().enumerate() {
        if (v - 0.5).abs() <= CELL_TOL {
            mask |= 1 << j;
        } else if v.min(1.0 - v) > CELL_TOL {
            return None;
        }
    }
    (mask != 0).then(|| mask - 1)
}

/// Grid search for zeros of `D₀℘₀` over one fundamental cell, followed by
/// Newton refinement of every grid-local minimum of `|D₀℘₀|`.
///
/// The grid has `density^4` nodes `2 Σ (g_j/density) ω_j`; the origin (a pole)
/// is skipped. With an even density all 15 half-period vertices are nodes.
pub fn zero_scan<T: Scalar>(l: &Lattice<T>, density: usize, cfg: &SumConfig) -> Result<ZeroScan> {
    require_rank4(l)?;
    if density < 2 {
        return Err(Error::InvalidArgument("grid density must be at least 2".into()));
    }
    let omegas = l.half_periods().to_vec();
    let point_at = |t: &[f64; 4]| -> Paravector<T> {
        let mut p = Paravector::zero();
        for (j, w) in omegas.iter().enumerate() {
            p += w.scale(T::lit(2.0 * t[j]));
        }
        p
    };
    let d = density;
    let total = d.pow(4);
    let index_of = |g: [usize; 4]| ((g[0] * d + g[1]) * d + g[2]) * d + g[3];
    let mut norms = vec![f64::INFINITY; total];
    for (flat, slot) in norms.iter_mut().enumerate() {
        let g = [flat / (d * d * d), (flat / (d * d)) % d, (flat / d) % d, flat % d];
        if flat == 0 {
            continue;
        }
        let t = g.map(|v| v as f64 / d as f64);
        match d0_p0(l, &point_at(&t), cfg) {
            Ok(e) => *slot = e.value.norm().as_f64(),
            Err(Error::NearPole { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    let mut candidates: Vec<ZeroCandidate> = Vec::new();
    for flat in 1..total {
        let g = [flat / (d * d * d), (flat / (d * d)) % d, (flat / d) % d, flat % d];
        let here = norms[flat];
        if !here.is_finite() {
            continue;
        }
        let is_min = (0..4).all(|axis| {
            [1, d - 1].iter().all(|&s| {
                let mut n = g;
                n[axis] = (n[axis] + s) % d;
                here <= norms[index_of(n)]
            })
        });
        if !is_min {
            continue;
        }
        let t0 = g.map(|v| v as f64 / d as f64);
        let cand = refine(l, &point_at(&t0), here, cfg)?;
        if !candidates.iter().any(|c| torus_close(&c.cell_coords, &cand.cell_coords, CELL_TOL)) {
            candidates.push(cand);
        }
    }
    let vertices = l
        .half_period_vertices()
        .iter()
        .enumerate()
        .map(|(index, v)| {
            let e = d0_p0(l, v, cfg)?;
            Ok(VertexResidual { index, point: v.to_f64(), residual: e.value.norm().as_f64(), tail_bound: e.tail_bound })
        })
        .collect::<Result<_>>()?;
    Ok(ZeroScan { candidates, vertices, grid_points: total })
}

fn refine<T: Scalar>(l: &Lattice<T>, start: &Paravector<T>, start_norm: f64, cfg: &SumConfig) -> Result<ZeroCandidate> {
    let mut x = *start;
    let mut best = start_norm;
    let mut refined = false;
    for _ in 0..8 {
        let f = d0_p0(l, &x, cfg)?.value;
        let fnorm = f.norm().as_f64();
        if fnorm < best {
            best = fnorm;
            refined = true;
        }
        if fnorm == 0.0 {
            break;
        }
        let j = d0_p0_jacobian(l, &x, cfg)?;
        let Some(inv) = Matrix4::from_fn(|r, c| j[r][c]).try_inverse() else { break };
        let step = inv * Vector4::from_iterator(f.c.iter().map(|v| v.as_f64()));
        if !step.iter().all(|v| v.is_finite()) {
            break;
        }
        let next = x - Paravector::from_f64([step[0], step[1], step[2], step[3]]);
        match d0_p0(l, &next, cfg) {
            Ok(e) if e.value.norm().as_f64() < fnorm => x = next,
            _ => break,
        }
        if step.norm() <= 1e-13 * (1.0 + x.norm().as_f64()) {
            break;
        }
    }
    let e = d0_p0(l, &x, cfg)?;
    let jac = d0_p0_jacobian(l, &x, cfg)?;
    let sv = Matrix4::from_fn(|i, j| jac[i][j]).singular_values();
    let multiplicity = if sv.min() <= 1e-8 * sv.max() { 2 } else { 1 };
    let (coords, _) = l.coordinates(&x);
    let cell_coords = [0, 1, 2, 3].map(|j| reduce_cell(coords[j] / 2.0));
    Ok(ZeroCandidate {
        point: x.to_f64(),
        cell_coords,
        residual: e.value.norm().as_f64(),
        tail_bound: e.tail_bound,
        multiplicity,
        vertex: vertex_index(&cell_coords),
        refined: refined || e.value.norm().as_f64() < start_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::fd_dir_deriv_richardson;
    use std::f64::consts::FRAC_PI_2;

    fn skew(rank: usize, s: f64) -> Lattice<f64> {
        let all = [
            Paravector::new(s, 0.1, 0.0, 0.2),
            Paravector::new(0.0, 1.1 * s, 0.3, 0.0),
            Paravector::new(0.1, 0.0, 0.9 * s, -0.2),
            Paravector::new(0.0, 0.2, 0.1, s),
        ];
        Lattice::new(all[..rank].to_vec()).unwrap()
    }

    fn close(a: &Paravector<f64>, b: &Paravector<f64>, tol: f64) -> bool {
        a.distance(b) <= tol
    }

    #[test]
    fn zeta_is_odd() {
        for rank in 1..=4 {
            let l = skew(rank, 2.0);
            let cfg = SumConfig::fixed(rank, 4);
            let x = Paravector::new(0.3, -0.2, 0.25, 0.1);
            let a = zeta(&l, &x, &cfg, ZetaForm::Collapsed).unwrap().value;
            let b = zeta(&l, &-x, &cfg, ZetaForm::Collapsed).unwrap().value;
            assert!(close(&a, &-b, 1e-13 * a.norm()), "rank {rank}");
        }
    }

    #[test]
    fn series_forms_agree() {
        for rank in 1..=4 {
            let l = skew(rank, 2.0);
            let x = Paravector::new(0.2, 0.1, -0.15, 0.05);
            for pairing in [true, false] {
                let cfg = SumConfig { pairing, ..SumConfig::fixed(rank, 5) };
                let c = zeta(&l, &x, &cfg, ZetaForm::Collapsed).unwrap();
                let d = zeta(&l, &x, &cfg, ZetaForm::Defining).unwrap();
                let p = zeta(&l, &x, &cfg, ZetaForm::PowerSeries).unwrap();
                assert!(close(&c.value, &d.value, 1e-12 * c.value.norm()), "rank {rank}");
                assert!(close(&c.value, &p.value, p.tail_bound - c.tail_bound + 1e-12), "rank {rank}");
            }
        }
    }

    #[test]
    fn pairing_does_not_change_the_truncated_sum() {
        let l = skew(3, 2.0);
        let x = Paravector::new(0.4, -0.3, 0.2, 0.6);
        let p = zeta(&l, &x, &SumConfig::fixed(3, 6), ZetaForm::Collapsed).unwrap();
        let u = zeta(&l, &x, &SumConfig { pairing: false, ..SumConfig::fixed(3, 6) }, ZetaForm::Collapsed).unwrap();
        assert!(close(&p.value, &u.value, 1e-13 * p.value.norm()));
        assert!(p.tail_bound <= u.tail_bound);
    }

    #[test]
    fn rank_one_is_the_cotangent() {
        let l = Lattice::rectangular(1, FRAC_PI_2).unwrap();
        for t in [0.1, 0.7, -1.2, 2.9] {
            let e =
                zeta(&l, &Paravector::scalar(t), &SumConfig::for_rank(1).with_tol(1e-6), ZetaForm::Collapsed).unwrap();
            assert!((e.value.x0() - 1.0 / f64::tan(t)).abs() <= e.tail_bound, "t = {t}");
            assert!(e.tail_bound <= 1e-6);
        }
    }

    #[test]
    fn truncation_error_is_within_tail_bound() {
        for (rank, k, far) in [(2, 4, 60), (3, 3, 20), (4, 2, 8)] {
            let l = skew(rank, 2.0);
            let x = Paravector::new(0.9, -0.5, 0.4, 0.3);
            let near = zeta(&l, &x, &SumConfig::fixed(rank, k), ZetaForm::Collapsed).unwrap();
            let reference = zeta(&l, &x, &SumConfig::fixed(rank, far), ZetaForm::Collapsed).unwrap();
            let diff = near.value.distance(&reference.value);
            assert!(diff <= near.tail_bound, "rank {rank}: {diff} > {}", near.tail_bound);
        }
    }

    #[test]
    fn adaptive_shells_meet_target() {
        let l = skew(2, 2.0);
        let x = Paravector::new(0.5, 0.5, 0.0, 0.0);
        let cfg = SumConfig::for_rank(2).with_tol(1e-5);
        let e = zeta(&l, &x, &cfg, ZetaForm::Collapsed).unwrap();
        assert!(e.tail_bound <= 1e-5);
        let tighter = cfg.with_tol(e.tail_bound * 0.5);
        assert!(zeta(&l, &x, &tighter, ZetaForm::Collapsed).unwrap().shells > e.shells);
        let starved = SumConfig { max_shells: 2, ..cfg.with_tol(1e-12) };
        assert!(matches!(zeta(&l, &x, &starved, ZetaForm::Collapsed), Err(Error::Unconverged { .. })));
    }

    #[test]
    fn poles_are_reported() {
        let l = skew(2, 2.0);
        let cfg = SumConfig::fixed(2, 3);
        let w = l.point(&[1, -1, 0, 0]);
        assert!(matches!(zeta(&l, &w, &cfg, ZetaForm::Collapsed), Err(Error::NearPole { .. })));
        assert!(matches!(zeta(&l, &Paravector::zero(), &cfg, ZetaForm::Collapsed), Err(Error::NearPole { .. })));
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for rank in 1..=4 {
            let l = skew(rank, 2.0);
            let cfg = SumConfig::fixed(rank, 3);
            let a = Paravector::new(0.35, -0.2, 0.3, 0.15);
            let f = |p: &Paravector<f64>| Ok(zeta(&l, p, &cfg, ZetaForm::Collapsed)?.value.to_multivector());
            for q in 1..=3 {
                let dirs: Vec<_> =
                    (0..q).map(|i| Paravector::basis((i + rank) % 4) + Paravector::basis(i).scale(0.5)).collect();
                let dirs = DirectionList::new(dirs).unwrap();
                let exact = zeta_dir_deriv(&l, &a, &dirs, &cfg).unwrap().value.to_multivector();
                let fd = fd_dir_deriv_richardson(f, &a, &dirs, 4e-3).unwrap();
                assert!((exact - fd).norm() <= 1e-6 * (1.0 + exact.norm()), "rank {rank} q {q}");
            }
        }
    }

    #[test]
    fn fused_requests_match_single_requests() {
        let l = skew(4, 2.0);
        let cfg = SumConfig::fixed(4, 2);
        let a = Paravector::new(0.3, 0.2, -0.1, 0.4);
        let reqs: Vec<_> = [vec![0], vec![1, 2], vec![3, 3, 1], vec![0, 1, 2, 3]]
            .iter()
            .map(|l| DirectionList::from_letters(l).unwrap())
            .collect();
        let fused = zeta_derivatives(&l, &a, &reqs, &cfg).unwrap();
        for (r, f) in reqs.iter().zip(&fused) {
            let single = zeta_dir_deriv(&l, &a, r, &cfg).unwrap();
            assert!(close(&single.value, &f.value, 1e-13 * (1.0 + f.value.norm())));
            assert_eq!(single.tail_bound, f.tail_bound);
        }
    }

    #[test]
    fn z_function_vanishes_at_zero_offset() {
        for rank in 1..=4 {
            let l = skew(rank, 2.0);
            let cfg = SumConfig::fixed(rank, 3);
            let a = Paravector::new(0.5, 0.1, 0.2, -0.3);
            let z = z_function(&l, &Paravector::zero(), &a, &cfg).unwrap();
            assert!(z.value.norm() <= 1e-13, "rank {rank}");
            // for N = 1 Z is ζ(x + a) - ζ(a)
            if rank == 1 {
                let x = Paravector::new(0.2, 0.3, 0.0, 0.1);
                let z = z_function(&l, &x, &a, &cfg).unwrap();
                let d = zeta(&l, &(x + a), &cfg, ZetaForm::Collapsed).unwrap().value
                    - zeta(&l, &a, &cfg, ZetaForm::Collapsed).unwrap().value;
                assert!(close(&z.value, &d, 1e-14));
            }
        }
    }

    #[test]
    fn eta_is_constant_for_low_rank() {
        for rank in [1, 2] {
            let l = skew(rank, 2.0);
            let cfg = SumConfig::fixed(rank, 10);
            let w = l.half_periods()[0];
            let p = EtaPolynomial::new(&l, &w, &cfg).unwrap();
            let a = p.eval(&Paravector::new(0.1, 0.2, 0.3, 0.4));
            let b = p.eval(&Paravector::new(-1.0, 0.5, 0.0, 2.0));
            assert_eq!(a.value, b.value);
            assert_eq!(a.value, p.zeta_omega().value.scale(2.0));
        }
        let l = skew(2, 2.0);
        let not_half = Paravector::new(0.3, 0.0, 0.0, 0.0);
        assert!(matches!(EtaPolynomial::new(&l, &not_half, &SumConfig::fixed(2, 2)), Err(Error::NotHalfPeriod(_))));
    }

    #[test]
    fn quasi_periodicity_rank_three() {
        let l = skew(3, 2.0);
        let cfg = SumConfig::fixed(3, 12);
        for w in l.half_periods().to_vec() {
            let eta = EtaPolynomial::new(&l, &w, &cfg).unwrap();
            let x = -w + Paravector::new(0.1, -0.05, 0.2, 0.1);
            let a = zeta(&l, &(x + w.scale(2.0)), &cfg, ZetaForm::Collapsed).unwrap();
            let b = zeta(&l, &x, &cfg, ZetaForm::Collapsed).unwrap();
            let e = eta.eval(&x);
            let res = (a.value - b.value - e.value).norm();
            assert!(res <= 10.0 * (a.tail_bound + b.tail_bound + e.tail_bound), "{res}");
        }
    }

    #[test]
    fn weierstrass_p_routes_agree() {
        let l = skew(4, 2.0);
        let cfg = SumConfig::fixed(4, 3);
        let x = Paravector::new(0.3, 0.4, -0.2, 0.1);
        let alpha = MultiIndex::new(3, 0, 0, 0);
        let a = p_alpha(&l, &alpha, &x, &cfg).unwrap();
        let b = p_alpha_direct(&l, &x, &cfg).unwrap();
        assert!(close(&a.value, &b.value, 1e-12 * a.value.norm()));
        assert_eq!(a.tail_bound, b.tail_bound);
        assert!(matches!(p_alpha(&l, &MultiIndex::new(2, 0, 0, 0), &x, &cfg), Err(Error::BadIndex { .. })));
        assert!(matches!(p_alpha(&skew(3, 2.0), &alpha, &x, &cfg), Err(Error::InvalidRank(3))));
    }

    #[test]
    fn weierstrass_p_is_even_and_d0_p0_odd() {
        let l = skew(4, 2.0);
        let cfg = SumConfig::fixed(4, 3);
        let x = Paravector::new(0.3, 0.4, -0.2, 0.1);
        for alpha in [[3, 0, 0, 0], [1, 1, 1, 0], [0, 0, 2, 1]] {
            let alpha = MultiIndex(alpha);
            let a = p_alpha(&l, &alpha, &x, &cfg).unwrap().value;
            let b = p_alpha(&l, &alpha, &-x, &cfg).unwrap().value;
            assert!(close(&a, &b, 1e-13 * a.norm()));
        }
        let a = d0_p0(&l, &x, &cfg).unwrap().value;
        let b = d0_p0(&l, &-x, &cfg).unwrap().value;
        assert!(close(&a, &-b, 1e-13 * a.norm()));
    }

    #[test]
    fn d0_p0_matches_derivative_of_p() {
        let l = skew(4, 2.0);
        let cfg = SumConfig::fixed(4, 2);
        let x = Paravector::new(0.3, 0.4, -0.2, 0.1);
        let f = |p: &Paravector<f64>| Ok(p_alpha_direct(&l, p, &cfg)?.value.to_multivector());
        let e0 = DirectionList::new(vec![Paravector::basis(0)]).unwrap();
        let fd = fd_dir_deriv_richardson(f, &x, &e0, 1e-3).unwrap();
        let exact = d0_p0(&l, &x, &cfg).unwrap().value.to_multivector();
        assert!((exact - fd).norm() <= 1e-7 * exact.norm());
        let jac = d0_p0_jacobian(&l, &x, &cfg).unwrap();
        let g = |p: &Paravector<f64>| Ok(d0_p0(&l, p, &cfg)?.value.to_multivector());
        for j in 0..4 {
            let dj = DirectionList::new(vec![Paravector::basis(j)]).unwrap();
            let col = fd_dir_deriv_richardson(g, &x, &dj, 1e-3).unwrap();
            for i in 0..4 {
                assert!((col[i] - jac[i][j]).abs() <= 1e-6 * (1.0 + jac[i][j].abs()), "J[{i}][{j}]");
            }
        }
    }

    #[test]
    fn paravector_powers() {
        let p = Paravector::new(0.7, -0.3, 0.5, 0.2);
        let mut m = Multivector::one();
        for n in 0..7u32 {
            let q = paravector_powi(&p, n);
            assert!((q.to_multivector() - m).norm() <= 1e-14 * (1.0 + m.norm()));
            m = m * p.to_multivector();
        }
        assert_eq!(paravector_powi(&Paravector::scalar(2.0), 3), Paravector::scalar(8.0));
    }

    #[test]
    fn vertices_are_zeros_of_d0_p0() {
        let l = Lattice::<f64>::rectangular(4, 2.0).unwrap();
        let cfg = SumConfig::fixed(4, 4);
        let scan = zero_scan(&l, 2, &cfg).unwrap();
        assert_eq!(scan.grid_points, 16);
        assert_eq!(scan.vertices.len(), 15);
        for v in &scan.vertices {
            assert!(v.residual <= v.tail_bound, "vertex {}: {} > {}", v.index, v.residual, v.tail_bound);
        }
    }

    #[test]
    fn residues_are_tiny() {
        let l = skew(4, 2.0);
        let cfg = SumConfig::fixed(4, 2);
        let x = Paravector::new(0.3, 0.4, -0.2, 0.1);
        let z = zeta(&l, &x, &cfg, ZetaForm::Collapsed).unwrap();
        assert!(z.relative_residue() <= 1e-14);
        let p = p_alpha(&l, &MultiIndex::new(1, 1, 1, 0), &x, &cfg).unwrap();
        assert!(p.relative_residue() <= 1e-13);
    }
}
