//! Period lattices `2ℤ^N ω ⊂ S ⊕ V`, Chebyshev shells and truncation-tail bounds.
//!
//! Shell `k` holds the lattice points `2 Σ m_i ω_i` with `max |m_i| = k`. Every
//! point satisfies `|w| ≥ 2σk`, where `σ` is the smallest singular value of the
//! 4×N matrix of half-periods; the tail bounds below rest on that inequality and
//! on `|p m| = |p| |m|` for paravectors `p`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::clifford::Paravector;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Half-period matrices with a smaller relative singular value are rejected.
const INDEPENDENCE_TOL: f64 = 1e-10;

/// Multi-index of a lattice point; entries past the rank are zero.
pub type LatticeIndex = [i64; 4];

#[derive(Clone, Debug, PartialEq)]
pub struct Lattice<T> {
    half_periods: Vec<Paravector<T>>,
    sigma_min: f64,
}

impl<T: Scalar> Lattice<T> {
    /// Builds the lattice generated by `2ω_1, …, 2ω_N`, `N = half_periods.len()`.
    pub fn new(half_periods: Vec<Paravector<T>>) -> Result<Self> {
        let n = half_periods.len();
        if !(1..=4).contains(&n) {
            return Err(Error::InvalidRank(n));
        }
        let m = Self::matrix(&half_periods);
        let sv = m.clone().svd(false, false).singular_values;
        let smax = sv.max();
        let smin = sv.min();
        if !(smin > INDEPENDENCE_TOL * smax) {
            return Err(Error::DependentPeriods { min_singular_value: smin });
        }
        Ok(Self { half_periods, sigma_min: smin })
    }

    /// Half-periods `s·e_1, …, s·e_N`.
    pub fn rectangular(rank: usize, scale: f64) -> Result<Self> {
        Self::new((0..rank).map(|i| Paravector::basis(i).scale(T::lit(scale))).collect())
    }

    fn matrix(half_periods: &[Paravector<T>]) -> DMatrix<f64> {
        DMatrix::from_fn(4, half_periods.len(), |r, c| half_periods[c].c[r].as_f64())
    }

    pub fn rank(&self) -> usize {
        self.half_periods.len()
    }

    pub fn half_periods(&self) -> &[Paravector<T>] {
        &self.half_periods
    }

    /// Smallest singular value of the half-period matrix (independence certificate).
    pub fn sigma_min(&self) -> f64 {
        self.sigma_min
    }

    /// `2 Σ m_i ω_i`.
    pub fn point(&self, m: &LatticeIndex) -> Paravector<T> {
        let mut p = Paravector::zero();
        for (i, w) in self.half_periods.iter().enumerate() {
            p += w.scale(T::lit(2.0 * m[i] as f64));
        }
        p
    }

    /// Lower bound `2σk` on the norm of every point in shell `k`.
    pub fn shell_norm_lower_bound(&self, k: usize) -> f64 {
        2.0 * self.sigma_min * k as f64
    }

    /// Least-squares coordinates `c` with `x ≈ Σ c_i ω_i`, and the residual norm.
    pub fn coordinates(&self, x: &Paravector<T>) -> (Vec<f64>, f64) {
        let m = Self::matrix(&self.half_periods);
        let b = DVector::from_iterator(4, x.c.iter().map(|v| v.as_f64()));
        let svd = m.clone().svd(true, true);
        let c = svd.solve(&b, 1e-300).expect("svd with both factors");
        let resid = (&m * &c - &b).norm();
        (c.iter().copied().collect(), resid)
    }

    /// Integer coordinates of `x` in the half-period basis, if `x = Σ m_i ω_i`
    /// with integer `m_i` (to within `1e-9` relative).
    pub fn half_period_multiplier(&self, x: &Paravector<T>) -> Option<Vec<i64>> {
        let (c, resid) = self.coordinates(x);
        let scale = 1.0 + x.norm().as_f64();
        if resid > 1e-9 * scale {
            return None;
        }
        let rounded: Vec<i64> = c.iter().map(|v| v.round() as i64).collect();
        if c.iter().zip(&rounded).all(|(v, r)| (v - *r as f64).abs() <= 1e-9 * (1.0 + v.abs())) {
            Some(rounded)
        } else {
            None
        }
    }

    /// Checks that `omega` is half a lattice point but not a lattice point.
    pub fn check_half_period(&self, omega: &Paravector<T>) -> Result<Vec<i64>> {
        match self.half_period_multiplier(omega) {
            Some(m) if m.iter().any(|v| v.rem_euclid(2) == 1) => Ok(m),
            _ => Err(Error::NotHalfPeriod(omega.to_f64())),
        }
    }

    /// The `2^N - 1` vertices `Σ ε_j ω_j`, `ε ∈ {0,1}^N ∖ {0}`, in binary order of `ε`.
    pub fn half_period_vertices(&self) -> Vec<Paravector<T>> {
        let n = self.rank();
        (1..(1usize << n))
            .map(|mask| {
                let mut p = Paravector::zero();
                for (j, w) in self.half_periods.iter().enumerate() {
                    if mask & (1 << j) != 0 {
                        p += *w;
                    }
                }
                p
            })
            .collect()
    }

    /// Norm of the shortest nonzero lattice vector, by enumeration of the shells
    /// that can still contain something shorter than the best candidate.
    pub fn shortest_vector(&self) -> f64 {
        let mut best = self.half_periods.iter().map(|w| 2.0 * w.norm().as_f64()).fold(f64::INFINITY, f64::min);
        let mut k = 1;
        while self.shell_norm_lower_bound(k) < best && k <= 10_000 {
            for_each_shell_index(self.rank(), k, |m| {
                best = best.min(self.point(m).norm().as_f64());
            });
            k += 1;
        }
        best
    }

    /// All points of shell `k` with `w` and `-w` adjacent, in deterministic order.
    pub fn shell_points(&self, k: usize) -> Vec<(LatticeIndex, Paravector<T>)> {
        let mut out = Vec::with_capacity(shell_count(self.rank(), k));
        for_each_shell_representative(self.rank(), k, |m| {
            let w = self.point(m);
            out.push((*m, w));
            out.push((m.map(|v| -v), -w));
        });
        out
    }

    /// Rigorous bound on the part of a series beyond shell `k` (see [`TailTerm`]),
    /// valid for every evaluation point with `|x| ≤ r`.
    pub fn tail_bound(&self, r: f64, k: usize, term: &TailTerm) -> Result<f64> {
        tail_bound_impl(self.rank(), self.sigma_min, r, k, term)
    }

    /// Smallest shell count `K ≤ max_shells` whose tail bound is at most `target`.
    pub fn shells_needed(&self, r: f64, term: &TailTerm, target: f64, max_shells: usize) -> Result<(usize, f64)> {
        let top = self.tail_bound(r, max_shells, term)?;
        if !(top <= target) {
            return Err(Error::Unconverged { tail_bound: top, target, shells: max_shells });
        }
        // the bound is only defined once r < σ(K+1)
        let mut lo = ((r / self.sigma_min).floor() as usize).min(max_shells);
        while lo < max_shells && self.tail_bound(r, lo, term).is_err() {
            lo += 1;
        }
        let mut hi = max_shells;
        let mut hi_val = top;
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            match self.tail_bound(r, mid, term) {
                Ok(b) if b <= target => {
                    hi = mid;
                    hi_val = b;
                }
                _ => lo = mid + 1,
            }
        }
        Ok((hi, hi_val))
    }
}

/// `(2k+1)^N - (2k-1)^N`, the number of points in shell `k ≥ 1`.
pub fn shell_count(rank: usize, k: usize) -> usize {
    if k == 0 {
        return 1;
    }
    (2 * k + 1).pow(rank as u32) - (2 * k - 1).pow(rank as u32)
}

/// Visits every multi-index with `max |m_i| = k` (first `rank` entries) in
/// lexicographic order.
pub fn for_each_shell_index(rank: usize, k: usize, mut f: impl FnMut(&LatticeIndex)) {
    assert!((1..=4).contains(&rank) && k >= 1);
    let k = k as i64;
    let mut m: LatticeIndex = [0; 4];
    let lead = rank - 1;
    for i in 0..lead {
        m[i] = -k;
    }
    loop {
        let on_shell = m[..lead].iter().any(|v| v.abs() == k);
        if on_shell {
            for last in -k..=k {
                m[lead] = last;
                f(&m);
            }
        } else {
            m[lead] = -k;
            f(&m);
            m[lead] = k;
            f(&m);
        }
        m[lead] = 0;
        // odometer over the leading coordinates
        let mut i = lead;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if m[i] < k {
                m[i] += 1;
                break;
            }
            m[i] = -k;
        }
    }
}

/// Visits one representative of each pair `{m, -m}` of shell `k`: the member
/// whose first nonzero entry is positive.
pub fn for_each_shell_representative(rank: usize, k: usize, mut f: impl FnMut(&LatticeIndex)) {
    for_each_shell_index(rank, k, |m| {
        if m.iter().find(|v| **v != 0).is_some_and(|v| *v > 0) {
            f(m);
        }
    });
}

/// Which series a tail bound refers to.
///
/// The remainder of every series summed here is, per lattice point `w`,
/// `D_H[-Σ_{n ≥ N} (w⁻¹x)^n w⁻¹]` for `q = |H|` directions. Its norm is at most
/// `Π|h| Σ_{n≥max(N,q)} n!/(n-q)! r^{n-q} |w|^{-(n+1)}`. When `w` and `-w`
/// are summed jointly only odd `n` survive, with a factor 2 per pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailTerm {
    /// Number of differentiations `q`.
    pub order: usize,
    /// `Π |h_i|` over the directions.
    pub dir_product: f64,
    pub paired: bool,
}

impl TailTerm {
    pub fn value(paired: bool) -> Self {
        Self { order: 0, dir_product: 1.0, paired }
    }

    pub fn derivative(order: usize, dir_product: f64, paired: bool) -> Self {
        Self { order, dir_product, paired }
    }
}

fn ln_falling_factorial(n: usize, q: usize) -> f64 {
    ((n - q + 1)..=n).map(|v| (v as f64).ln()).sum()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn tail_bound_impl(rank: usize, sigma: f64, r: f64, k: usize, term: &TailTerm) -> Result<f64> {
    let limit = sigma * (k as f64 + 1.0);
    if !(r < limit) || !(r >= 0.0) {
        return Err(Error::RadiusTooLarge { radius: r, limit });
    }
    if term.dir_product == 0.0 {
        return Ok(0.0);
    }
    let q = term.order;
    let per_shell = if term.paired { 0.5 } else { 1.0 };
    let kk = k as f64;
    // shell count = Σ_j a_j k^{m_j}, j odd, m_j = N - j, with |w| ≥ 2σk on shell k;
    // Σ_{k' > K} k'^{m-n-1} ≤ K^{m-n}/(n-m), or 1 + 1/(n-m) when K = 0
    let shell_coefs: Vec<(f64, usize)> = (1..=rank)
        .step_by(2)
        .map(|j| (per_shell * 2.0 * binomial(rank, j) * 2f64.powi((rank - j) as i32), rank - j))
        .collect();
    let shell_sum = |n: usize| -> f64 {
        let mut s = 0.0;
        for &(a, m) in &shell_coefs {
            let d = (n - m) as f64;
            s += if k == 0 { a * (1.0 + 1.0 / d) } else { a * (kk.ln() * (m as f64 - n as f64)).exp() / d };
        }
        s.ln()
    };
    let shell_total = series_total(rank, q, r, sigma, kk.max(1.0), term, &shell_sum);

    // |w| ≥ 2σ|k|₂ and comparison with ∫_{|t| ≥ K+1/2} (|t| - √N/2)^{-(n+1)} dt
    let c = (rank as f64).sqrt() / 2.0;
    let l = kk + 0.5 - c;
    let ball_total = if l > 0.0 && r < 2.0 * sigma * l {
        let sphere = match rank {
            1 => 2.0,
            2 => 2.0 * PI,
            3 => 4.0 * PI,
            _ => 2.0 * PI * PI,
        };
        let ball_sum = |n: usize| -> f64 {
            let p = n + 1;
            let mut s = 0.0;
            for j in 0..rank {
                let a = per_shell * sphere * binomial(rank - 1, j) * c.powi((rank - 1 - j) as i32);
                s += a * (l.ln() * (j as f64 + 1.0 - p as f64)).exp() / (p - j - 1) as f64;
            }
            s.ln()
        };
        series_total(rank, q, r, sigma, l, term, &ball_sum)
    } else {
        None
    };
    match (shell_total, ball_total) {
        (Some(a), Some(b)) => Ok(a.min(b)),
        (Some(a), None) | (None, Some(a)) => Ok(a),
        (None, None) => Err(Error::RadiusTooLarge { radius: r, limit }),
    }
}

/// `Σ_n c·P·n!/(n-q)!·r^{n-q}·(2σ)^{-(n+1)}·S(n)` over `n ≥ max(N, q)` (odd `n` when
/// paired), where `ln_sum(n)` is the log of the lattice factor `S(n)`, which shrinks
/// by at least `keff^{-1}` per unit step in `n`. `None` when the series does not settle.
fn series_total(
    rank: usize,
    q: usize,
    r: f64,
    sigma: f64,
    keff: f64,
    term: &TailTerm,
    ln_sum: &dyn Fn(usize) -> f64,
) -> Option<f64> {
    let step: usize = if term.paired { 2 } else { 1 };
    let unit = if term.paired { 2.0 } else { 1.0 };
    let mut n = rank.max(q);
    if term.paired && n.is_multiple_of(2) {
        n += 1;
    }
    let base = (unit * term.dir_product).ln();
    let two_sigma = 2.0 * sigma;
    let mut total = 0.0f64;
    for _ in 0..100_000 {
        let power = (n - q) as f64;
        let ln_r = if power == 0.0 { 0.0 } else { power * r.ln() };
        let ln_term = base + ln_falling_factorial(n, q) + ln_r - (n as f64 + 1.0) * two_sigma.ln() + ln_sum(n);
        let t = ln_term.exp();
        total += t;
        if r == 0.0 {
            return Some(total);
        }
        // ratio of consecutive terms is at most rho, and rho decreases with n
        let ff = (n as f64 + 1.0) / (n as f64 + 1.0 - q as f64);
        let rho = (ff * r / (two_sigma * keff)).powi(step as i32);
        if rho < 1.0 && t * rho / (1.0 - rho) <= 1e-17 * total {
            return Some(total + t * rho / (1.0 - rho));
        }
        n += step;
    }
    None
}

/// Truncation and accuracy settings for a lattice sum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SumConfig {
    /// Largest shell index summed.
    pub max_shells: usize,
    /// Largest acceptable tail bound.
    pub target_tol: f64,
    /// Sum `w` and `-w` jointly.
    pub pairing: bool,
    /// Neumaier-compensated accumulation.
    pub compensated: bool,
    /// Points closer than this to a lattice point raise `NearPole`.
    pub pole_guard: f64,
    /// Stop at the first shell count whose tail bound meets `target_tol`;
    /// otherwise always sum `max_shells` shells.
    pub adaptive: bool,
    /// Worker threads for the shell sum; results do not depend on it.
    pub workers: usize,
}

impl SumConfig {
    pub const DEFAULT_POLE_GUARD: f64 = 1e-8;

    /// Defaults per lattice rank.
    pub fn for_rank(rank: usize) -> Self {
        let (max_shells, target_tol) = match rank {
            1 => (1_000_000, 1e-6),
            2 => (200, 1e-6),
            3 => (100, 1e-4),
            _ => (60, 1e-4),
        };
        Self {
            max_shells,
            target_tol,
            pairing: true,
            compensated: true,
            pole_guard: Self::DEFAULT_POLE_GUARD,
            adaptive: true,
            workers: 1,
        }
    }

    /// Exactly `shells` shells, no convergence requirement.
    pub fn fixed(rank: usize, shells: usize) -> Self {
        Self { max_shells: shells, target_tol: f64::INFINITY, adaptive: false, ..Self::for_rank(rank) }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.target_tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_shells < 1 {
            return Err(Error::InvalidArgument("max_shells must be at least 1".into()));
        }
        if !(self.target_tol > 0.0) {
            return Err(Error::InvalidArgument("target_tol must be positive".into()));
        }
        if !(self.pole_guard > 0.0) {
            return Err(Error::InvalidArgument("pole_guard must be positive".into()));
        }
        Ok(())
    }

    /// Shell count and tail bound to use for a series at radius `r`.
    pub fn choose_shells<T: Scalar>(&self, lattice: &Lattice<T>, r: f64, term: &TailTerm) -> Result<(usize, f64)> {
        self.validate()?;
        if self.adaptive {
            lattice.shells_needed(r, term, self.target_tol, self.max_shells)
        } else {
            let b = lattice.tail_bound(r, self.max_shells, term)?;
            if !(b <= self.target_tol) {
                return Err(Error::Unconverged { tail_bound: b, target: self.target_tol, shells: self.max_shells });
            }
            Ok((self.max_shells, b))
        }
    }
}
