//! Commutative slices against the classical complex oracles.

use std::f64::consts::FRAC_PI_2;

use cliffordian::oracles::{
    classical_cot_partial_fractions, classical_weierstrass_zeta, cot_partial_fraction_tail, weierstrass_zeta_tail,
};
use cliffordian::trig::{cos_cl, cotan_cl, exp_cl, sin_cl};
use cliffordian::weierstrass::{zeta, ZetaForm};
use cliffordian::{Lattice64, Paravector64, SumConfig};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn rank_one_zeta_is_the_cot_partial_fraction_sum() {
    let l = Lattice64::rectangular(1, FRAC_PI_2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let t: f64 = rng.gen_range(-3.0..3.0);
        let k = 400;
        let ours = zeta(&l, &Paravector64::scalar(t), &SumConfig::fixed(1, k), ZetaForm::Collapsed).unwrap();
        let theirs = classical_cot_partial_fractions(t, k).unwrap();
        let tails = ours.tail_bound + cot_partial_fraction_tail(t, k);
        assert!((ours.value.x0() - theirs).abs() <= 10.0 * tails);
        assert!((ours.value.x0() - theirs).abs() <= 1e-12 * (1.0 + theirs.abs()));
        assert!((ours.value.x0() - 1.0 / t.tan()).abs() <= ours.tail_bound);
    }
}

#[test]
fn rank_two_zeta_is_the_weierstrass_zeta() {
    let (w1, w2) = (Complex64::new(1.0, 0.0), Complex64::new(0.25, 1.2));
    let l = Lattice64::new(vec![Paravector64::new(w1.re, w1.im, 0.0, 0.0), Paravector64::new(w2.re, w2.im, 0.0, 0.0)])
        .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let z = Complex64::new(rng.gen_range(-0.9..0.9), rng.gen_range(-0.9..0.9));
        let k = 60;
        let ours =
            zeta(&l, &Paravector64::new(z.re, z.im, 0.0, 0.0), &SumConfig::fixed(2, k), ZetaForm::Collapsed).unwrap();
        let theirs = classical_weierstrass_zeta(z, w1, w2, k).unwrap();
        let diff = ((ours.value.x0() - theirs.re).powi(2) + (ours.value.c[1] - theirs.im).powi(2)).sqrt();
        let tails = ours.tail_bound + weierstrass_zeta_tail(z.norm(), w1, w2, k);
        assert!(diff <= 10.0 * tails);
        assert!(diff <= 1e-12 * (1.0 + theirs.norm()), "{diff}");
        assert_eq!(ours.value.c[2], 0.0);
        assert_eq!(ours.value.c[3], 0.0);
    }
}

#[test]
fn trig_functions_restrict_to_the_real_ones() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..20 {
        let t: f64 = rng.gen_range(-3.0..3.0);
        let x = Paravector64::scalar(t);
        assert!((exp_cl(&x).x0() - t.exp()).abs() <= 1e-14 * t.exp());
        assert!((sin_cl(&x).unwrap().x0() - t.sin()).abs() <= 1e-15);
        assert!((cos_cl(&x).x0() - t.cos()).abs() <= 1e-15);
        let c = cotan_cl(&x).unwrap();
        assert!((c.x0() - 1.0 / t.tan()).abs() <= 1e-10 * (1.0 + 1.0 / t.tan().abs()));
    }
}

#[test]
fn trig_functions_on_a_complex_slice() {
    // on span{1, e2}, e2 plays the role of i
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..20 {
        let z = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-1.5..1.5));
        let x = Paravector64::new(z.re, 0.0, z.im, 0.0);
        for (ours, theirs) in [(exp_cl(&x), z.exp()), (sin_cl(&x).unwrap(), z.sin()), (cos_cl(&x), z.cos())] {
            assert!((ours.x0() - theirs.re).abs() <= 1e-13 * (1.0 + theirs.norm()));
            assert!((ours.c[2] - theirs.im).abs() <= 1e-13 * (1.0 + theirs.norm()));
        }
        let cot = z.cos() / z.sin();
        let ours = cotan_cl(&x).unwrap();
        assert!((ours.x0() - cot.re).abs() <= 1e-12 * (1.0 + cot.norm()));
        assert!((ours.c[2] - cot.im).abs() <= 1e-12 * (1.0 + cot.norm()));
    }
}
