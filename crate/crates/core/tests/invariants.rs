//! Algebraic invariants of the public API, as property tests.

use cliffordian::calculus::{dir_deriv_inverse, DirectionList};
use cliffordian::polynomials::{eval_p, eval_p_multivector, eval_s};
use cliffordian::weierstrass::{zeta, ZetaForm};
use cliffordian::{sandwich_power, Lattice64, MultiIndex, Multivector64, Paravector64, SumConfig};
use proptest::prelude::*;

fn coord() -> impl Strategy<Value = f64> {
    -2.0..2.0f64
}

fn paravector() -> impl Strategy<Value = Paravector64> {
    [coord(), coord(), coord(), coord()].prop_map(Paravector64::from_coords)
}

fn multivector() -> impl Strategy<Value = Multivector64> {
    proptest::array::uniform8(coord()).prop_map(Multivector64::from_coeffs)
}

fn multi_index(max: u32) -> impl Strategy<Value = MultiIndex> {
    [0..=max, 0..=max, 0..=max, 0..=max]
        .prop_map(MultiIndex)
        .prop_filter("nonempty, bounded", move |a| !a.is_empty() && a.len() <= max)
}

proptest! {
    #[test]
    fn product_is_associative(a in multivector(), b in multivector(), c in multivector()) {
        let l = (a * b) * c;
        let r = a * (b * c);
        prop_assert!((l - r).norm() <= 1e-12 * (1.0 + a.norm() * b.norm() * c.norm()));
    }

    #[test]
    fn paravector_norm_is_multiplicative(p in paravector(), m in multivector()) {
        let lhs = p.left_mul(&m).norm();
        prop_assert!((lhs - p.norm() * m.norm()).abs() <= 1e-12 * (1.0 + lhs));
        let rhs = (m * p).norm();
        prop_assert!((rhs - p.norm() * m.norm()).abs() <= 1e-12 * (1.0 + rhs));
    }

    #[test]
    fn inverse_is_two_sided(p in paravector()) {
        prop_assume!(p.norm() > 1e-3);
        let q = p.inverse().unwrap();
        prop_assert!((p.product(&q) - Multivector64::one()).norm() <= 1e-12 * p.norm() * q.norm());
        prop_assert!((q.product(&p) - Multivector64::one()).norm() <= 1e-12 * p.norm() * q.norm());
    }

    #[test]
    fn sandwich_powers_stay_paravector(h in paravector(), x in paravector(), n in 0usize..6) {
        prop_assert!(sandwich_power(&h, &x, n).is_ok());
    }

    #[test]
    fn p_is_homogeneous(alpha in multi_index(4), x in paravector(), t in -2.0..2.0f64) {
        let a = eval_p(&alpha, &x.scale(t)).unwrap();
        let b = eval_p(&alpha, &x).unwrap().scale(t.powi(alpha.len() as i32 - 1));
        prop_assert!(a.distance(&b) <= 1e-11 * (1.0 + b.norm()));
    }

    #[test]
    fn p_has_no_bivector_part(alpha in multi_index(5), x in paravector()) {
        let m = eval_p_multivector(&alpha, &x).unwrap();
        prop_assert!(m.residue() <= 1e-12 * (1.0 + m.norm()));
    }

    #[test]
    fn s_is_a_derivative_of_the_inverse(beta in multi_index(4), x in paravector()) {
        prop_assume!(x.norm() > 0.3);
        let dirs = DirectionList::from_letters(&beta.letters()).unwrap();
        let d = dir_deriv_inverse(&x, &dirs).unwrap();
        let s = eval_s(&beta, &x).unwrap();
        let sign = if beta.len() % 2 == 1 { -1.0 } else { 1.0 };
        let expected = s.scale(sign * beta.factorial() as f64);
        prop_assert!(d.distance(&expected) <= 1e-10 * (1.0 + d.norm()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn zeta_is_odd_everywhere(x in paravector(), rank in 1usize..=4) {
        let l = Lattice64::rectangular(rank, 1.7).unwrap();
        let cfg = SumConfig::fixed(rank, 2);
        prop_assume!(x.norm() > 1e-3);
        match (zeta(&l, &x, &cfg, ZetaForm::Collapsed), zeta(&l, &-x, &cfg, ZetaForm::Collapsed)) {
            (Ok(a), Ok(b)) => prop_assert!(a.value.distance(&-b.value) <= 1e-12 * (1.0 + a.value.norm())),
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "only one side hit a pole"),
        }
    }
}
