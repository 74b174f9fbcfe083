//! The usage example from the README.

use cliffordian::weierstrass::{zeta, ZetaForm};
use cliffordian::{Lattice64, Paravector64, SumConfig};

#[test]
fn rank_one_zeta_is_cot() {
    let lattice = Lattice64::rectangular(1, std::f64::consts::FRAC_PI_2).unwrap();
    let x = Paravector64::new(0.25, 0.0, 0.0, 0.0);
    let z = zeta(&lattice, &x, &SumConfig::for_rank(1), ZetaForm::Collapsed).unwrap();
    assert!((z.value.x0() - 1.0 / 0.25f64.tan()).abs() < 1e-5);
    assert!(z.tail_bound <= 1e-6);
}
