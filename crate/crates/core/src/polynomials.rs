//! Holomorphic Cliffordian polynomials `P_α`, the singular basis `S_β`, and the
//! generating function `(1 - λx)⁻¹λ = Σ P_α(x) λ_α`.

use std::collections::HashMap;

use crate::clifford::{MultiIndex, Multivector, Paravector};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Rearranges `v` into the next lexicographically larger permutation.
/// Returns `false` (leaving `v` sorted ascending) once the last one is passed.
pub fn next_permutation<E: Ord>(v: &mut [E]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        v.reverse();
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Every distinct arrangement of a multiset of letters, lexicographic order.
pub fn distinct_arrangements<E: Ord + Clone>(letters: &[E]) -> Vec<Vec<E>> {
    let mut cur = letters.to_vec();
    cur.sort();
    let mut out = vec![cur.clone()];
    while next_permutation(&mut cur) {
        out.push(cur.clone());
    }
    out
}

/// Distinct arrangements of `{e0^α0, e1^α1, e2^α2, e3^α3}`, as blade indices 0..=3.
pub fn multiset_permutations(alpha: &MultiIndex) -> Result<Vec<Vec<usize>>> {
    if alpha.is_empty() {
        return Err(Error::EmptyIndex);
    }
    Ok(distinct_arrangements(&alpha.letters()))
}

/// `|α|! / (α0! α1! α2! α3!)`.
pub fn multinomial(alpha: &MultiIndex) -> u64 {
    let n = alpha.len() as u64;
    let num: u64 = (1..=n).product();
    num / alpha.factorial()
}

/// Number of multi-indices of length `k`, i.e. the number of polynomials `P_α`
/// of degree `k - 1`, counted by enumeration.
pub fn basis_count(k: u32) -> usize {
    MultiIndex::all_with_length(k).len()
}

/// `(e_{σ1} x)(e_{σ2} x)⋯(e_{σ(n-1)} x) e_{σn}` for one letter sequence.
fn p_word<T: Scalar>(word: &[usize], x: &Paravector<T>) -> Multivector<T> {
    let (&last, rest) = word.split_last().expect("nonempty word");
    let mut m = Multivector::blade(last);
    for &l in rest.iter().rev() {
        m = Paravector::basis(l).left_mul(&x.left_mul(&m));
    }
    m
}

/// `x⁻¹ e_{σ1} x⁻¹ e_{σ2} ⋯ e_{σn} x⁻¹` for one letter sequence.
fn s_word<T: Scalar>(word: &[usize], xinv: &Paravector<T>) -> Multivector<T> {
    let mut m = xinv.to_multivector();
    for &l in word.iter().rev() {
        m = xinv.left_mul(&Paravector::basis(l).left_mul(&m));
    }
    m
}

/// `P_α(x)` as a full multivector, before paravector extraction.
pub fn eval_p_multivector<T: Scalar>(alpha: &MultiIndex, x: &Paravector<T>) -> Result<Multivector<T>> {
    let words = multiset_permutations(alpha)?;
    let mut sum = Multivector::zero();
    for w in &words {
        sum += p_word(w, x);
    }
    Ok(sum)
}

/// `P_α(x) = Σ_σ Π_{ν<|α|} (e_{σν} x) e_{σ|α|}` over distinct arrangements σ.
pub fn eval_p<T: Scalar>(alpha: &MultiIndex, x: &Paravector<T>) -> Result<Paravector<T>> {
    eval_p_multivector(alpha, x)?.to_paravector()
}

/// `S_β(x)` as a full multivector, before paravector extraction.
pub fn eval_s_multivector<T: Scalar>(beta: &MultiIndex, x: &Paravector<T>) -> Result<Multivector<T>> {
    let xinv = x.inverse()?;
    if beta.is_empty() {
        return Ok(xinv.to_multivector());
    }
    let mut sum = Multivector::zero();
    for w in distinct_arrangements(&beta.letters()) {
        sum += s_word(&w, &xinv);
    }
    Ok(sum)
}

/// `S_β(x) = Σ_σ Π (x⁻¹ e_{σν}) x⁻¹`; `S_0 = x⁻¹`.
pub fn eval_s<T: Scalar>(beta: &MultiIndex, x: &Paravector<T>) -> Result<Paravector<T>> {
    eval_s_multivector(beta, x)?.to_paravector()
}

/// All `P_α(x)` with `1 ≤ |α| ≤ k_max`, built by splitting off the first letter:
/// `P_α = Σ_{i: α_i > 0} e_i x P_{α - e_i}`.
pub fn p_table<T: Scalar>(x: &Paravector<T>, k_max: u32) -> HashMap<MultiIndex, Multivector<T>> {
    let mut table: HashMap<MultiIndex, Multivector<T>> = HashMap::new();
    for i in 0..4 {
        let mut a = [0u32; 4];
        a[i] = 1;
        table.insert(MultiIndex(a), Multivector::blade(i));
    }
    for k in 2..=k_max {
        for alpha in MultiIndex::all_with_length(k) {
            let mut sum = Multivector::zero();
            for i in 0..4 {
                if alpha.0[i] == 0 {
                    continue;
                }
                let mut rest = alpha;
                rest.0[i] -= 1;
                let tail = &table[&rest];
                sum += Paravector::basis(i).left_mul(&x.left_mul(tail));
            }
            table.insert(alpha, sum);
        }
    }
    table
}

/// Returns `((1 - λx)⁻¹λ, Σ_{1≤|α|≤k} P_α(x) λ_α)`.
///
/// The closed form is evaluated as `(λ⁻¹ - x)⁻¹`, which equals `(1 - λx)⁻¹λ`
/// and stays in paravector arithmetic.
pub fn generating_check<T: Scalar>(
    lambda: &[T; 4],
    x: &Paravector<T>,
    k: u32,
) -> Result<(Paravector<T>, Paravector<T>)> {
    if k == 0 {
        return Err(Error::InvalidArgument("generating_check needs K >= 1".into()));
    }
    let lam = Paravector::from_coords(*lambda);
    if lam.norm() == T::zero() {
        return Ok((Paravector::zero(), Paravector::zero()));
    }
    let denom = lam.inverse()? - *x;
    let closed = denom.inverse().map_err(|_| Error::NotInvertible)?;
    let mut alphas: Vec<MultiIndex> = (1..=k).flat_map(MultiIndex::all_with_length).collect();
    alphas.sort();
    let table = p_table(x, k);
    let mut sum = Multivector::zero();
    for a in &alphas {
        sum += table[a].scale(a.monomial(lambda));
    }
    Ok((closed, sum.to_paravector()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pv(c: [f64; 4]) -> Paravector<f64> {
        Paravector::from_coords(c)
    }

    #[test]
    fn permutations_of_small_multisets() {
        assert_eq!(multiset_permutations(&MultiIndex::new(1, 0, 0, 0)).unwrap(), vec![vec![0]]);
        assert_eq!(multiset_permutations(&MultiIndex::new(0, 1, 1, 0)).unwrap(), vec![vec![1, 2], vec![2, 1]]);
        let p = multiset_permutations(&MultiIndex::new(2, 1, 0, 0)).unwrap();
        assert_eq!(p, vec![vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 0]]);
        assert!(matches!(multiset_permutations(&MultiIndex::default()), Err(Error::EmptyIndex)));
    }

    #[test]
    fn permutation_count_is_multinomial() {
        for alpha in MultiIndex::all_with_length(6) {
            assert_eq!(multiset_permutations(&alpha).unwrap().len() as u64, multinomial(&alpha));
        }
    }

    #[test]
    fn p_of_length_one_is_basis_element() {
        let x = pv([0.3, 1.2, -0.7, 2.0]);
        assert_eq!(eval_p(&MultiIndex::new(1, 0, 0, 0), &x).unwrap(), Paravector::one());
        assert_eq!(eval_p(&MultiIndex::new(0, 0, 1, 0), &x).unwrap(), Paravector::basis(2));
    }

    #[test]
    fn p_of_two_letters() {
        let x = pv([0.3, 1.2, -0.7, 2.0]);
        let e1 = Multivector::blade(1);
        let e2 = Multivector::blade(2);
        let xm = x.to_multivector();
        let want = e1 * xm * e2 + e2 * xm * e1;
        let got = eval_p(&MultiIndex::new(0, 1, 1, 0), &x).unwrap();
        assert!((got.to_multivector() - want).norm() < 1e-14);
    }

    #[test]
    fn s_examples() {
        let x = pv([0.5, -1.0, 0.25, 0.75]);
        let xi = x.inverse().unwrap();
        assert_eq!(eval_s(&MultiIndex::default(), &x).unwrap(), xi);
        let s = eval_s(&MultiIndex::new(1, 0, 0, 0), &x).unwrap();
        assert!((s.to_multivector() - xi * xi).norm() < 1e-14);
        let (e1, e2) = (Multivector::blade(1), Multivector::blade(2));
        let xm = xi.to_multivector();
        let want = xm * e1 * xm * e2 * xm + xm * e2 * xm * e1 * xm;
        let got = eval_s(&MultiIndex::new(0, 1, 1, 0), &x).unwrap();
        assert!((got.to_multivector() - want).norm() < 1e-14);
        assert!(matches!(
            eval_s(&MultiIndex::new(1, 0, 0, 0), &Paravector::<f64>::zero()),
            Err(Error::ZeroNorm { .. })
        ));
    }

    #[test]
    fn table_matches_direct_enumeration() {
        let x = pv([0.1, 0.4, -0.3, 0.2]);
        let table = p_table(&x, 5);
        for k in 1..=5 {
            for a in MultiIndex::all_with_length(k) {
                let direct = eval_p_multivector(&a, &x).unwrap();
                assert!((table[&a] - direct).norm() <= 1e-14 * (1.0 + direct.norm()));
            }
        }
    }

    #[test]
    fn generating_function_scalar_lambda() {
        let x = pv([0.2, 0.5, -0.1, 0.3]);
        let t = 0.3;
        let (closed, partial) = generating_check(&[t, 0.0, 0.0, 0.0], &x, 30).unwrap();
        assert!((closed - partial).norm() < 1e-12);
        let (c0, p0) = generating_check(&[0.0; 4], &x, 5).unwrap();
        assert_eq!((c0, p0), (Paravector::zero(), Paravector::zero()));
    }

    #[test]
    fn basis_counts() {
        for k in 1..=6u32 {
            let c = ((k + 1) * (k + 2) * (k + 3) / 6) as usize;
            assert_eq!(basis_count(k), c);
        }
    }

    fn arb_pv() -> impl Strategy<Value = Paravector<f64>> {
        prop::array::uniform4(-2.0f64..2.0).prop_map(Paravector::from_coords)
    }

    fn arb_index(max_len: u32) -> impl Strategy<Value = MultiIndex> {
        prop::array::uniform4(0u32..=max_len)
            .prop_filter("length in range", move |a| {
                let l: u32 = a.iter().sum();
                l >= 1 && l <= max_len
            })
            .prop_map(MultiIndex)
    }

    proptest! {
        #[test]
        fn p_is_paravector_valued(a in arb_index(5), x in arb_pv()) {
            let m = eval_p_multivector(&a, &x).unwrap();
            prop_assert!(m.residue() <= 1e-12 * (1.0 + m.norm()));
        }

        #[test]
        fn p_is_homogeneous(a in arb_index(5), x in arb_pv(), t in -2.0f64..2.0) {
            let lhs = eval_p(&a, &x.scale(t)).unwrap();
            let rhs = eval_p(&a, &x).unwrap().scale(t.powi(a.len() as i32 - 1));
            prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
        }

        #[test]
        fn s_is_paravector_valued(b in arb_index(4), x in arb_pv()) {
            prop_assume!(x.norm() > 0.1);
            let m = eval_s_multivector(&b, &x).unwrap();
            prop_assert!(m.residue() <= 1e-12 * (1.0 + m.norm()));
        }
    }
}
