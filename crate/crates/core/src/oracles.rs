//! Classical complex-analysis implementations used as independent test oracles.
//!
//! Nothing here uses the Clifford arithmetic, lattice or summation modules:
//! values are plain `f64` / `Complex64` sums with their own shell enumeration.

use num_complex::Complex64;

use crate::error::{Error, Result};

const ORACLE_POLE_GUARD: f64 = 1e-8;

/// Truncated Weierstrass zeta
/// `1/z + Σ' [1/(z - w) + 1/w + z/w²]` over `w = 2mω1 + 2nω2`, `max(|m|,|n|) ≤ K`,
/// each shell summed with `w` and `-w` together.
pub fn classical_weierstrass_zeta(z: Complex64, w1: Complex64, w2: Complex64, k: usize) -> Result<Complex64> {
    let det = w1.re * w2.im - w1.im * w2.re;
    if det.abs() <= 1e-12 * w1.norm() * w2.norm() {
        return Err(Error::DependentPeriods { min_singular_value: det.abs() });
    }
    if z.norm() < ORACLE_POLE_GUARD {
        return Err(Error::NearPole { distance: z.norm(), lattice_point: [0.0; 4] });
    }
    let mut total = Complex64::new(0.0, 0.0);
    let k = k as i64;
    for s in 1..=k {
        let mut shell = Complex64::new(0.0, 0.0);
        for m in -s..=s {
            for n in -s..=s {
                if m.abs().max(n.abs()) != s || (m, n) < (0, 0) {
                    continue;
                }
                let w = 2.0 * (m as f64 * w1 + n as f64 * w2);
                for p in [w, -w] {
                    let d = z - p;
                    if d.norm() < ORACLE_POLE_GUARD {
                        return Err(Error::NearPole { distance: d.norm(), lattice_point: [p.re, p.im, 0.0, 0.0] });
                    }
                }
                // pair sum: 1/(z-w) + 1/(z+w) + 2z/w²
                shell += 1.0 / (z - w) + 1.0 / (z + w) + 2.0 * z / (w * w);
            }
        }
        total += shell;
    }
    Ok(1.0 / z + total)
}

/// Truncated `cot t = 1/t + Σ_{k=1}^{K} [1/(t - kπ) + 1/(t + kπ)]`.
pub fn classical_cot_partial_fractions(t: f64, k: usize) -> Result<f64> {
    let pi = std::f64::consts::PI;
    let nearest = (t / pi).round();
    let dist = (t - nearest * pi).abs();
    if dist < ORACLE_POLE_GUARD && nearest.abs() <= k as f64 {
        return Err(Error::NearPole { distance: dist, lattice_point: [nearest * pi, 0.0, 0.0, 0.0] });
    }
    // accumulate from the far end so the small terms go in first
    let mut s = 0.0;
    for j in (1..=k).rev() {
        let p = j as f64 * pi;
        s += 2.0 * t / (t * t - p * p);
    }
    Ok(1.0 / t + s)
}

/// Bound on the omitted part of [`classical_cot_partial_fractions`] for `|t| < Kπ`:
/// `Σ_{k>K} 2|t|/(k²π² - t²) ≤ 2|t| / (π² (K - |t|/π))`.
pub fn cot_partial_fraction_tail(t: f64, k: usize) -> f64 {
    let pi = std::f64::consts::PI;
    let a = t.abs() / pi;
    assert!(a < k as f64);
    2.0 * t.abs() / (pi * pi * (k as f64 - a))
}

/// Bound on the omitted part of [`classical_weierstrass_zeta`] for `|z| ≤ r`,
/// using `|w| ≥ 2 s k` on shell `k` with `s` the smaller singular value of the
/// real 2×2 period matrix: per pair `|2z³/(w²(z²-w²))| ≤ 2r³/(|w|²(|w|²-r²))`.
pub fn weierstrass_zeta_tail(r: f64, w1: Complex64, w2: Complex64, k: usize) -> f64 {
    let (a, b, c, d) = (w1.re, w2.re, w1.im, w2.im);
    let t = a * a + b * b + c * c + d * d;
    let det = a * d - b * c;
    let s = ((t - (t * t - 4.0 * det * det).max(0.0).sqrt()) / 2.0).sqrt();
    let kk = k as f64;
    assert!(2.0 * s * kk > 2.0 * r);
    // 4k pairs per shell; Σ_{k>K} 4k·2r³/((2sk)²((2sk)²-r²)) ≤ 8r³/(16 s⁴) Σ k⁻³ / (1 - (r/2sK)²)
    let damp = 1.0 / (1.0 - (r / (2.0 * s * kk)).powi(2));
    8.0 * r.powi(3) / (16.0 * s.powi(4)) * damp / (2.0 * kk * kk) * (1.0 + 1.0 / kk).powi(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn cot_values() {
        let k = 200_000;
        assert!((classical_cot_partial_fractions(FRAC_PI_4, k).unwrap() - 1.0).abs() < 1e-5);
        assert!(classical_cot_partial_fractions(FRAC_PI_2, k).unwrap().abs() < 1e-5);
        let a = classical_cot_partial_fractions(0.3, 50).unwrap();
        let b = classical_cot_partial_fractions(-0.3, 50).unwrap();
        assert_eq!(a, -b);
        let exact = 1.0 / 0.3f64.tan();
        assert!((a - exact).abs() <= cot_partial_fraction_tail(0.3, 50));
    }

    #[test]
    fn weierstrass_zeta_is_odd_and_quasi_periodic() {
        let w1 = Complex64::new(1.0, 0.0);
        let w2 = Complex64::new(0.2, 1.1);
        let z = Complex64::new(0.31, -0.17);
        let k = 300;
        let a = classical_weierstrass_zeta(z, w1, w2, k).unwrap();
        let b = classical_weierstrass_zeta(-z, w1, w2, k).unwrap();
        assert_eq!(a, -b);
        let shifted = classical_weierstrass_zeta(z + 2.0 * w1, w1, w2, k).unwrap();
        let eta = 2.0 * classical_weierstrass_zeta(w1, w1, w2, k).unwrap();
        let tol = weierstrass_zeta_tail(3.0, w1, w2, k) * 3.0;
        assert!((shifted - a - eta).norm() < 10.0 * tol, "{}", (shifted - a - eta).norm());
    }

    #[test]
    fn legendre_relation() {
        // η1 ω2 - η2 ω1 = iπ/2 for Im(ω2/ω1) > 0, with η_i = ζ(ω_i)
        let w1 = Complex64::new(1.0, 0.0);
        let w2 = Complex64::new(0.3, 0.9);
        let k = 400;
        let e1 = classical_weierstrass_zeta(w1, w1, w2, k).unwrap();
        let e2 = classical_weierstrass_zeta(w2, w1, w2, k).unwrap();
        let lhs = e1 * w2 - e2 * w1;
        assert!((lhs - Complex64::new(0.0, FRAC_PI_2)).norm() < 1e-3, "{lhs}");
    }
}
