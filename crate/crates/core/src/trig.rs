//! Exponential and trigonometric Cliffordian functions.
//!
//! Every paravector `x = x0 + x⃗` lies in the commutative slice
//! `span{1, n}` with `n = x⃗/|x⃗|` and `n² = -1`, a copy of ℂ in which `n`
//! plays the role of `i`. The trigonometric functions are built from
//! `exp(±n x)` exactly as their complex counterparts are built from `e^{±iz}`.
//! On the real axis `n = e1` is used.

use crate::clifford::Paravector;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const SINC_SERIES_BELOW: f64 = 1e-4;

/// `sin t / t`, with a short series near zero.
pub fn sinc<T: Scalar>(t: T) -> T {
    if t.abs() < T::lit(SINC_SERIES_BELOW) {
        let t2 = t * t;
        T::one() - t2 / T::lit(6.0) + t2 * t2 / T::lit(120.0)
    } else {
        t.sin() / t
    }
}

/// `e^{x0} (cos|x⃗| + x⃗ sinc|x⃗|)`.
pub fn exp_cl<T: Scalar>(x: &Paravector<T>) -> Paravector<T> {
    let r = x.vector_norm();
    let g = x.x0().exp();
    let s = g * sinc(r);
    Paravector::new(g * r.cos(), x.c[1] * s, x.c[2] * s, x.c[3] * s)
}

/// Unit vector of the slice containing `x` (`e1` on the real axis).
fn slice_unit<T: Scalar>(x: &Paravector<T>) -> Paravector<T> {
    let r = x.vector_norm();
    if r == T::zero() {
        Paravector::basis(1)
    } else {
        Paravector::new(T::zero(), x.c[1] / r, x.c[2] / r, x.c[3] / r)
    }
}

/// `(exp(n x), exp(-n x), n)`.
fn exp_pair<T: Scalar>(x: &Paravector<T>) -> (Paravector<T>, Paravector<T>, Paravector<T>) {
    let n = slice_unit(x);
    // n x = -|x⃗| + x0 n because n is parallel to x⃗ and squares to -1
    let nx = Paravector::new(-x.vector_norm(), n.c[1] * x.x0(), n.c[2] * x.x0(), n.c[3] * x.x0());
    (exp_cl(&nx), exp_cl(&-nx), n)
}

/// `-n (exp(nx) - exp(-nx)) / 2`.
pub fn sin_cl<T: Scalar>(x: &Paravector<T>) -> Result<Paravector<T>> {
    let (ep, em, n) = exp_pair(x);
    (-n).product(&(ep - em)).scale(T::lit(0.5)).to_paravector()
}

/// `(exp(nx) + exp(-nx)) / 2`.
pub fn cos_cl<T: Scalar>(x: &Paravector<T>) -> Paravector<T> {
    let (ep, em, _) = exp_pair(x);
    (ep + em).scale(T::lit(0.5))
}

/// `n (exp(nx) + exp(-nx)) (exp(nx) - exp(-nx))⁻¹`, inverse taken on the right.
pub fn cotan_cl<T: Scalar>(x: &Paravector<T>) -> Result<Paravector<T>> {
    let (ep, em, n) = exp_pair(x);
    let diff = ep - em;
    let dinv = diff.inverse().map_err(|_| Error::PoleOfCotan { norm: diff.norm().as_f64() })?;
    (n.product(&(ep + em)) * dinv).to_paravector()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::slice_lift;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn pv(c: [f64; 4]) -> Paravector<f64> {
        Paravector::from_coords(c)
    }

    #[test]
    fn exp_examples() {
        assert_eq!(exp_cl(&Paravector::<f64>::zero()), Paravector::one());
        let e = exp_cl(&pv([0.0, PI, 0.0, 0.0]));
        assert!((e - Paravector::scalar(-1.0)).norm() < 1e-15);
        assert!((exp_cl(&Paravector::scalar(1.3)) - Paravector::scalar(1.3f64.exp())).norm() < 1e-15);
    }

    #[test]
    fn axis_values() {
        assert_eq!(cos_cl(&Paravector::<f64>::zero()), Paravector::one());
        let c = cotan_cl(&Paravector::scalar(FRAC_PI_4)).unwrap();
        assert!((c - Paravector::one()).norm() < 1e-15);
        let s = sin_cl(&Paravector::scalar(0.7)).unwrap();
        assert!((s - Paravector::scalar(0.7f64.sin())).norm() < 1e-15);
        assert!(matches!(cotan_cl(&Paravector::<f64>::zero()), Err(Error::PoleOfCotan { .. })));
    }

    #[test]
    fn sine_on_e1_axis() {
        // sin(i t) = i sinh t
        let t = 0.8;
        let s = sin_cl(&pv([0.0, t, 0.0, 0.0])).unwrap();
        assert!((s - pv([0.0, t.sinh(), 0.0, 0.0])).norm() < 1e-15);
    }

    fn arb_pv() -> impl Strategy<Value = Paravector<f64>> {
        prop::array::uniform4(-2.5f64..2.5).prop_map(Paravector::from_coords)
    }

    proptest! {
        #[test]
        fn exp_times_exp_of_negative(x in arb_pv()) {
            let p = exp_cl(&x) * exp_cl(&-x);
            prop_assert!((p - crate::Multivector::one()).norm() < 1e-12);
        }

        #[test]
        fn pythagoras_on_slice(x in arb_pv()) {
            let s = sin_cl(&x).unwrap();
            let c = cos_cl(&x);
            let sum = s * s + c * c;
            prop_assert!((sum - crate::Multivector::one()).norm() <= 1e-12 * (1.0 + s.norm_sqr() + c.norm_sqr()));
        }

        #[test]
        fn agrees_with_planar_lifts(x in arb_pv()) {
            prop_assume!(x.vector_norm() > 1e-3);
            let e = slice_lift(|a: f64, b: f64| a.exp() * b.cos(), |a: f64, b: f64| a.exp() * b.sin(), &x).unwrap();
            prop_assert!((e - exp_cl(&x)).norm() <= 1e-12 * (1.0 + e.norm()));
            let s = slice_lift(|a: f64, b: f64| a.sin() * b.cosh(), |a: f64, b: f64| a.cos() * b.sinh(), &x).unwrap();
            prop_assert!((s - sin_cl(&x).unwrap()).norm() <= 1e-12 * (1.0 + s.norm()));
            let c = slice_lift(|a: f64, b: f64| a.cos() * b.cosh(), |a: f64, b: f64| -a.sin() * b.sinh(), &x).unwrap();
            prop_assert!((c - cos_cl(&x)).norm() <= 1e-12 * (1.0 + c.norm()));
            // cot(ξ + iη) = (sin 2ξ - i sinh 2η) / (cosh 2η - cos 2ξ)
            let cot_u = |a: f64, b: f64| (2.0 * a).sin() / ((2.0 * b).cosh() - (2.0 * a).cos());
            let cot_v = |a: f64, b: f64| -(2.0 * b).sinh() / ((2.0 * b).cosh() - (2.0 * a).cos());
            let k = slice_lift(cot_u, cot_v, &x).unwrap();
            prop_assume!(k.norm() < 1e6);
            prop_assert!((k - cotan_cl(&x).unwrap()).norm() <= 1e-10 * (1.0 + k.norm()));
        }
    }
}
