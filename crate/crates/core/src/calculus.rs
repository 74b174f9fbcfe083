//! Directional derivatives, finite-difference oracles and the operators
//! `D`, `D*`, `Δ`, `DΔ` used to probe holomorphy numerically.
//!
//! `D = Σ_{i=0}^{3} e_i ∂/∂x_i` with `e_0 = 1`; `D* = ∂_0 - Σ_{i≥1} e_i ∂_i`.
//! A function is (left) holomorphic Cliffordian when `D Δ f = 0`.

use std::collections::HashMap;

use crate::clifford::{Multivector, Paravector};
use crate::error::{Error, Result};
use crate::polynomials::distinct_arrangements;
use crate::scalar::{factorial, Scalar};

pub const MAX_DIRECTIONS: usize = 6;

/// Step used inside the third-order `DΔ` stencils.
pub const DDELTA_STEP: f64 = 5e-2;

/// Default step for first and second derivatives at `x`.
pub fn default_step<T: Scalar>(x: &Paravector<T>) -> T {
    T::lit(1e-3) * (T::one() + x.norm())
}

/// Ordered directions `h_1..h_q` for a mixed derivative `(h_1|∇)⋯(h_q|∇)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionList<T> {
    dirs: Vec<Paravector<T>>,
}

impl<T: Scalar> DirectionList<T> {
    pub fn new(dirs: Vec<Paravector<T>>) -> Result<Self> {
        Self::with_max(dirs, MAX_DIRECTIONS)
    }

    pub fn with_max(dirs: Vec<Paravector<T>>, max: usize) -> Result<Self> {
        if dirs.is_empty() || dirs.len() > max {
            return Err(Error::InvalidArgument(format!(
                "direction list must have 1..={max} entries, got {}",
                dirs.len()
            )));
        }
        Ok(Self { dirs })
    }

    /// `q` copies of the basis direction `e_i`.
    pub fn repeated(i: usize, q: usize) -> Result<Self> {
        Self::new(vec![Paravector::basis(i); q])
    }

    /// Directions `e_i` following the letters of a multi-index.
    pub fn from_letters(letters: &[usize]) -> Result<Self> {
        Self::new(letters.iter().map(|&l| Paravector::basis(l)).collect())
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    pub fn as_slice(&self) -> &[Paravector<T>] {
        &self.dirs
    }

    /// `Π |h_i|`.
    pub fn norm_product(&self) -> f64 {
        self.dirs.iter().map(|h| h.norm().as_f64()).product()
    }

    /// Class label of each direction (index of its first exact duplicate) and
    /// the multiplicity weight `Π m_c!`.
    fn classes(&self) -> (Vec<u8>, f64) {
        let mut labels = Vec::with_capacity(self.dirs.len());
        let mut counts: HashMap<u8, usize> = HashMap::new();
        for (i, h) in self.dirs.iter().enumerate() {
            let first = self.dirs.iter().position(|g| g == h).unwrap_or(i) as u8;
            labels.push(first);
            *counts.entry(first).or_default() += 1;
        }
        let weight = counts.values().map(|&m| factorial::<f64>(m)).product();
        (labels, weight)
    }
}

/// Precomputed family of words `Π_ν (u L_ν) u` summed over distinct
/// arrangements of a multiset of letters, times a fixed weight.
///
/// Mixed derivatives of `x ↦ x⁻¹` and of `x ↦ (w⁻¹x)^μ w⁻¹` are both of this
/// shape, so one plan serves every lattice point of a sum.
#[derive(Clone, Debug)]
pub struct WordPlan {
    words: Vec<Vec<u8>>,
    weight: f64,
}

impl WordPlan {
    /// Plan for `(h_1|∇)⋯(h_q|∇) x⁻¹ = (-1)^q Σ_perm x⁻¹h x⁻¹⋯h x⁻¹`
    /// (without the sign). Letters index into the direction list.
    pub fn inverse_derivative<T: Scalar>(dirs: &DirectionList<T>) -> Self {
        let (labels, weight) = dirs.classes();
        Self { words: distinct_arrangements(&labels), weight }
    }

    /// Plan for `(h_1|∇)⋯(h_q|∇) (w⁻¹a)^μ w⁻¹` with respect to `a`. The letter
    /// with index `dirs.len()` stands for the undifferentiated `a`.
    /// Returns `None` when `q > μ` (the derivative vanishes).
    pub fn power_derivative<T: Scalar>(dirs: &DirectionList<T>, mu: usize) -> Option<Self> {
        let q = dirs.len();
        if q > mu {
            return None;
        }
        let (mut labels, weight) = dirs.classes();
        labels.extend(std::iter::repeat_n(q as u8, mu - q));
        Some(Self { words: distinct_arrangements(&labels), weight })
    }

    pub fn word_count(&self) -> usize {
        self.words.len()
    }

    pub fn words(&self) -> &[Vec<u8>] {
        &self.words
    }

    /// Multiplicity factor `Π m_c!` shared by every word.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// `weight · Σ_words Π (u L_ν) u`.
    pub fn eval<T: Scalar>(&self, u: &Paravector<T>, letters: &[Paravector<T>]) -> Multivector<T> {
        let mut sum = Multivector::zero();
        let um = u.to_multivector();
        for w in &self.words {
            let mut m = um;
            for &l in w.iter().rev() {
                m = u.left_mul(&letters[l as usize].left_mul(&m));
            }
            sum += m;
        }
        sum.scale(T::lit(self.weight))
    }
}

/// Words `u L_1 u L_2 ⋯ u L_k u` from many plans, stored as a suffix trie so
/// that shared tails are multiplied out once per evaluation point.
#[derive(Clone, Debug, Default)]
pub struct WordForest {
    /// `(suffix node, letter)`; node value is `u · letter · value(suffix)`.
    nodes: Vec<(u32, u16)>,
    index: HashMap<(u32, u16), u32>,
}

/// Node id of the empty word, whose value is `u`.
pub const FOREST_ROOT: u32 = u32::MAX;

impl WordForest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Adds `word` (letters left to right) and returns its node id.
    pub fn insert(&mut self, word: &[u16]) -> u32 {
        let mut node = FOREST_ROOT;
        for &l in word.iter().rev() {
            node = match self.index.get(&(node, l)) {
                Some(&id) => id,
                None => {
                    let id = self.nodes.len() as u32;
                    self.nodes.push((node, l));
                    self.index.insert((node, l), id);
                    id
                }
            };
        }
        node
    }

    /// Values of every node at `u`, written to `out` (resized as needed).
    pub fn eval_into<T: Scalar>(&self, u: &Paravector<T>, letters: &[Paravector<T>], out: &mut Vec<Multivector<T>>) {
        out.clear();
        let um = u.to_multivector();
        for &(parent, l) in &self.nodes {
            let below = if parent == FOREST_ROOT { &um } else { &out[parent as usize] };
            let m = u.left_mul(&letters[l as usize].left_mul(below));
            out.push(m);
        }
    }

    /// Value of node `id` from the output of [`WordForest::eval_into`].
    pub fn value<T: Scalar>(u: &Paravector<T>, values: &[Multivector<T>], id: u32) -> Multivector<T> {
        if id == FOREST_ROOT {
            u.to_multivector()
        } else {
            values[id as usize]
        }
    }
}

/// Exact mixed derivative `(h_1|∇)⋯(h_q|∇)(x⁻¹)`
/// `= (-1)^q Σ_{σ ∈ S_q} x⁻¹h_{σ1}x⁻¹⋯h_{σq}x⁻¹`.
pub fn dir_deriv_inverse<T: Scalar>(x: &Paravector<T>, dirs: &DirectionList<T>) -> Result<Paravector<T>> {
    let xinv = x.inverse()?;
    let plan = WordPlan::inverse_derivative(dirs);
    let m = plan.eval(&xinv, dirs.as_slice());
    let m = if dirs.len() % 2 == 1 { -m } else { m };
    m.to_paravector()
}

/// `(h|∇)^q (x⁻¹) = (-1)^q q! (x⁻¹h)^q x⁻¹`.
pub fn dir_deriv_inverse_equal<T: Scalar>(x: &Paravector<T>, h: &Paravector<T>, q: usize) -> Result<Paravector<T>> {
    let xinv = x.inverse()?;
    let xh = xinv.product(h);
    let mut m = xinv.to_multivector();
    for _ in 0..q {
        m = xh * m;
    }
    let sign = if q % 2 == 1 { -T::one() } else { T::one() };
    m.scale(sign * factorial::<T>(q)).to_paravector()
}

/// Central-difference mixed directional derivative with `2^q` evaluations:
/// `Σ_{s ∈ {±1}^q} (Π s_k) f(x + h Σ s_k d_k) / (2h)^q`. Error `O(h²)`.
pub fn fd_dir_deriv<T, F>(f: F, x: &Paravector<T>, dirs: &DirectionList<T>, step: T) -> Result<Multivector<T>>
where
    T: Scalar,
    F: Fn(&Paravector<T>) -> Result<Multivector<T>>,
{
    let q = dirs.len();
    let mut sum = Multivector::zero();
    for mask in 0..(1usize << q) {
        let mut p = *x;
        let mut negative = false;
        for (k, h) in dirs.as_slice().iter().enumerate() {
            if mask & (1 << k) != 0 {
                p -= h.scale(step);
                negative = !negative;
            } else {
                p += h.scale(step);
            }
        }
        let v = f(&p)?;
        if negative {
            sum -= v;
        } else {
            sum += v;
        }
    }
    Ok(sum.scale((T::lit(2.0) * step).powi(q as i32).recip()))
}

/// One Richardson step on [`fd_dir_deriv`]: `(4 D(h/2) - D(h)) / 3`.
pub fn fd_dir_deriv_richardson<T, F>(
    f: F,
    x: &Paravector<T>,
    dirs: &DirectionList<T>,
    step: T,
) -> Result<Multivector<T>>
where
    T: Scalar,
    F: Fn(&Paravector<T>) -> Result<Multivector<T>>,
{
    let coarse = fd_dir_deriv(&f, x, dirs, step)?;
    let fine = fd_dir_deriv(&f, x, dirs, step * T::lit(0.5))?;
    Ok((fine.scale(T::lit(4.0)) - coarse).scale(T::lit(1.0 / 3.0)))
}

/// Which side the Clifford units of `D` multiply from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Memoised evaluations of `f` on the integer stencil `x + h·offset`.
struct Stencil<'a, T, F> {
    f: &'a F,
    x: Paravector<T>,
    h: T,
    cache: HashMap<[i8; 4], Multivector<T>>,
}

impl<'a, T: Scalar, F: Fn(&Paravector<T>) -> Result<Multivector<T>>> Stencil<'a, T, F> {
    fn new(f: &'a F, x: Paravector<T>, h: T) -> Self {
        Self { f, x, h, cache: HashMap::new() }
    }

    fn at(&mut self, off: [i8; 4]) -> Result<Multivector<T>> {
        if let Some(v) = self.cache.get(&off) {
            return Ok(*v);
        }
        let p = Paravector::from_coords(std::array::from_fn(|i| self.x.c[i] + self.h * T::lit(off[i] as f64)));
        let v = (self.f)(&p)?;
        self.cache.insert(off, v);
        Ok(v)
    }
}

fn offset(pairs: &[(usize, i8)]) -> [i8; 4] {
    let mut o = [0i8; 4];
    for &(i, a) in pairs {
        o[i] += a;
    }
    o
}

fn combine<T: Scalar>(parts: &[(T, Multivector<T>)]) -> Multivector<T> {
    parts.iter().fold(Multivector::zero(), |acc, (c, m)| acc + m.scale(*c))
}

/// `∂_i ∂_j² f` by central differences, `O(h²)`.
fn third_partial<T, F>(st: &mut Stencil<'_, T, F>, i: usize, j: usize) -> Result<Multivector<T>>
where
    T: Scalar,
    F: Fn(&Paravector<T>) -> Result<Multivector<T>>,
{
    let h3 = st.h * st.h * st.h;
    let two = T::lit(2.0);
    if i == j {
        let parts = [
            (T::one(), st.at(offset(&[(i, 2)]))?),
            (-two, st.at(offset(&[(i, 1)]))?),
            (two, st.at(offset(&[(i, -1)]))?),
            (-T::one(), st.at(offset(&[(i, -2)]))?),
        ];
        Ok(combine(&parts).scale((two * h3).recip()))
    } else {
        let parts = [
            (T::one(), st.at(offset(&[(i, 1), (j, 1)]))?),
            (-two, st.at(offset(&[(i, 1)]))?),
            (T::one(), st.at(offset(&[(i, 1), (j, -1)]))?),
            (-T::one(), st.at(offset(&[(i, -1), (j, 1)]))?),
            (two, st.at(offset(&[(i, -1)]))?),
            (-T::one(), st.at(offset(&[(i, -1), (j, -1)]))?),
        ];
        Ok(combine(&parts).scale((two * h3).recip()))
    }
}

/// Finite-difference `DΔf` at `x` with stencil step `h` (`O(h²)`).
pub fn apply_ddelta_side<T, F>(f: F, x: &Paravector<T>, h: T, side: Side) -> Result<Multivector<T>>
where
    T: Scalar,
    F: Fn(&Paravector<T>) -> Result<Multivector<T>>,
{
    let mut st = Stencil::new(&f, *x, h);
    let mut out = Multivector::zero();
    for i in 0..4 {
        let mut lap_i = Multivector::zero();
        for j in 0..4 {
            lap_i += third_partial(&mut st, i, j)?;
        }
        let e = Multivector::blade(i);
        out += match side {
            Side::Left => e * lap_i,
            Side::Right => lap_i * e,
        };
    }
    Ok(out)
}

/// Finite-difference left `DΔf`.
pub fn apply_ddelta<T, F>(f: F, x: &Paravector<T>, h: T) -> Result<Multivector<T>>
where
    T: Scalar,
    F: Fn(&Paravector<T>) -> Result<Multivector<T>>,
{
    apply_ddelta_side(f, x, h, Side::Left)
}

/// Results of a `DΔ` step-refinement probe.
#[derive(Clone, Copy, Debug)]
pub struct DDeltaProbe {
    /// `|DΔ_h f|` at steps `h`, `h/2`, `h/4`.
    pub norms: [f64; 3],
    /// Norm of the Richardson combination of the two finest steps.
    pub extrapolated: f64,
    /// `log2` of successive norm ratios (meaningful only above the noise floor).
    pub orders: [f64; 2],
}

impl DDeltaProbe {
    /// Smallest observed order of the two refinements.
    pub fn min_order(&self) -> f64 {
        self.orders[0].min(self.orders[1])
    }
}

/// Evaluates `DΔf` at `h`, `h/2`, `h/4` and reports norms and observed orders.
pub fn ddelta_probe<T, F>(f: F, x: &Paravector<T>, h: T, side: Side) -> Result<DDeltaProbe>
where
    T: Scalar,
    F: Fn(&Paravector<T>) -> Result<Multivector<T>>,
{
    let half = T::lit(0.5);
    let d0 = apply_ddelta_side(&f, x, h, side)?;
    let d1 = apply_ddelta_side(&f, x, h * half, side)?;
    let d2 = apply_ddelta_side(&f, x, h * half * half, side)?;
    let extrapolated = (d2.scale(T::lit(4.0)) - d1).scale(T::lit(1.0 / 3.0));
    let norms = [d0.norm().as_f64(), d1.norm().as_f64(), d2.norm().as_f64()];
    Ok(DDeltaProbe {
        norms,
        extrapolated: extrapolated.norm().as_f64(),
        orders: [observed_order(norms[0], norms[1], 2.0), observed_order(norms[1], norms[2], 2.0)],
    })
}

/// `log(coarse / fine) / log(ratio)`.
pub fn observed_order(coarse: f64, fine: f64, ratio: f64) -> f64 {
    (coarse / fine).ln() / ratio.ln()
}

/// `Σ_i e_i ∂_i f` (left) by central differences.
pub fn apply_d<T, F>(f: F, x: &Paravector<T>, h: T) -> Result<Multivector<T>>
where
    T: Scalar,
    F: Fn(&Paravector<T>) -> Result<Multivector<T>>,
{
    let mut out = Multivector::zero();
    for i in 0..4 {
        let d = fd_dir_deriv(&f, x, &DirectionList::repeated(i, 1)?, h)?;
        out += Multivector::blade(i) * d;
    }
    Ok(out)
}

/// `∂_0 f - Σ_{i≥1} e_i ∂_i f` by central differences.
pub fn apply_dstar<T, F>(f: F, x: &Paravector<T>, h: T) -> Result<Multivector<T>>
where
    T: Scalar,
    F: Fn(&Paravector<T>) -> Result<Multivector<T>>,
{
    let mut out = Multivector::zero();
    for i in 0..4 {
        let d = fd_dir_deriv(&f, x, &DirectionList::repeated(i, 1)?, h)?;
        if i == 0 {
            out += d;
        } else {
            out -= Multivector::blade(i) * d;
        }
    }
    Ok(out)
}

/// Five-point-per-axis Laplacian `Σ_j ∂_j² f`, `O(h²)`.
pub fn laplacian<T, F>(f: F, x: &Paravector<T>, h: T) -> Result<Multivector<T>>
where
    T: Scalar,
    F: Fn(&Paravector<T>) -> Result<Multivector<T>>,
{
    let mut st = Stencil::new(&f, *x, h);
    let centre = st.at([0; 4])?;
    let mut out = Multivector::zero();
    for j in 0..4 {
        out += st.at(offset(&[(j, 1)]))? + st.at(offset(&[(j, -1)]))? - centre.scale(T::lit(2.0));
    }
    Ok(out.scale((h * h).recip()))
}

/// `Δ²f` as the discrete Laplacian applied twice, `O(h²)`.
pub fn bilaplacian<T, F>(f: F, x: &Paravector<T>, h: T) -> Result<Multivector<T>>
where
    T: Scalar,
    F: Fn(&Paravector<T>) -> Result<Multivector<T>>,
{
    let mut st = Stencil::new(&f, *x, h);
    let two = T::lit(2.0);
    let mut out = Multivector::zero();
    for i in 0..4 {
        for j in 0..4 {
            // δ_i² δ_j² on the integer stencil
            let mut acc = Multivector::zero();
            for (a, ca) in [(-1i8, T::one()), (0, -two), (1, T::one())] {
                for (b, cb) in [(-1i8, T::one()), (0, -two), (1, T::one())] {
                    acc += st.at(offset(&[(i, a), (j, b)]))?.scale(ca * cb);
                }
            }
            out += acc;
        }
    }
    let h2 = h * h;
    Ok(out.scale((h2 * h2).recip()))
}

/// Lift of a planar function `u + iv` to `F(x) = u(x0, |x⃗|) + (x⃗/|x⃗|) v(x0, |x⃗|)`.
///
/// On the real axis the vector term is dropped, which is the continuous limit
/// when `v` is odd in its second argument; a nonzero `v(x0, 0)` is reported as
/// [`Error::AxisSingularity`].
pub fn slice_lift<T, U, V>(u: U, v: V, x: &Paravector<T>) -> Result<Paravector<T>>
where
    T: Scalar,
    U: Fn(T, T) -> T,
    V: Fn(T, T) -> T,
{
    let r = x.vector_norm();
    let x0 = x.x0();
    let uu = u(x0, r);
    let vv = v(x0, r);
    if r == T::zero() {
        if vv.abs() > T::grade_tol() * (T::one() + uu.abs()) {
            return Err(Error::AxisSingularity { value: vv.as_f64() });
        }
        return Ok(Paravector::scalar(uu));
    }
    let s = vv / r;
    Ok(Paravector::new(uu, x.c[1] * s, x.c[2] * s, x.c[3] * s))
}
