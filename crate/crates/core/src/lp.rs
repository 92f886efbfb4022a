//! Noncommutative `L^p` norms, the trace duality and disjointness.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::algebra::{polar, same_algebra, Element};
use crate::error::{domain, Error, Result};
use crate::linalg::{self, Mat, C64};

/// Conjugate exponent `p' = p/(p−1)`, with `1' = ∞` and `∞' = 1`.
pub fn conjugate_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        Err(domain!("exponent must lie in [1, ∞], got {p}"))
    } else {
        Ok(())
    }
}

/// `‖x‖_p = τ(|x|^p)^{1/p}` for `p ∈ [1, ∞]`.
pub fn lp_norm(x: &Element, p: f64) -> Result<f64> {
    check_exponent(p)?;
    Ok(schatten(x, p))
}

/// Weighted Schatten functional for any `p > 0`; a quasi-norm below 1.
pub(crate) fn schatten(x: &Element, p: f64) -> f64 {
    let sv = x.singular_values();
    weighted_schatten(x, &sv, p)
}

pub(crate) fn weighted_schatten(x: &Element, sv: &[Vec<f64>], p: f64) -> f64 {
    let top = sv.iter().filter_map(|s| s.first().copied()).fold(0.0, f64::max);
    if top == 0.0 {
        return 0.0;
    }
    if p.is_infinite() {
        return top;
    }
    let weights = x.algebra().blocks();
    let sum: f64 = sv
        .iter()
        .zip(weights)
        .map(|(s, b)| b.weight * s.iter().map(|&v| (v / top).powf(p)).sum::<f64>())
        .sum();
    top * sum.powf(1.0 / p)
}

/// `‖x‖_p` for positive `x` from its eigenvalues (cheaper than an SVD).
pub(crate) fn schatten_psd(x: &Element, p: f64) -> f64 {
    let ev: Vec<Vec<f64>> = x
        .blocks()
        .iter()
        .map(|m| linalg::herm_eig(m).0.into_iter().rev().map(|l| l.max(0.0)).collect())
        .collect();
    weighted_schatten(x, &ev, p)
}

/// The trace pairing `τ(ab)` realizing `L^p(M)* = L^{p'}(M)`.
pub fn duality_pair(a: &Element, b: &Element) -> Result<C64> {
    Ok(a.checked_mul(b)?.trace())
}

/// Self-adjoint with eigenvalues `≥ −tol·‖x‖_∞`.
pub fn is_positive(x: &Element, tol: f64) -> bool {
    if !x.is_self_adjoint(tol) {
        return false;
    }
    let floor = -tol * x.norm_inf();
    x.blocks().iter().all(|m| linalg::herm_eig(m).0.first().is_none_or(|&l| l >= floor))
}

/// `a*b = ab* = 0` up to `tol·‖a‖_∞‖b‖_∞`.
pub fn disjoint(a: &Element, b: &Element, tol: f64) -> Result<bool> {
    if !same_algebra(a.algebra(), b.algebra()) {
        return Err(Error::DescriptorMismatch);
    }
    let scale = a.norm_inf() * b.norm_inf();
    let cross = (&a.adjoint() * b).norm_inf().max((a * &b.adjoint()).norm_inf());
    Ok(cross <= tol * scale)
}

/// The norming functional of `y` in `L^{p'}`: `z` with `‖z‖_{p'} = 1` (or
/// `z = 0` when `y = 0`) and `τ(zy) = ‖y‖_p`.
pub fn norming_dual(y: &Element, p: f64, rank_cutoff: f64) -> Result<Element> {
    check_exponent(p)?;
    Ok(norming_dual_unchecked(y, p, rank_cutoff))
}

pub(crate) fn norming_dual_unchecked(y: &Element, p: f64, rank_cutoff: f64) -> Element {
    let alg = y.algebra().clone();
    if y.norm_inf() == 0.0 {
        return Element::zero(&alg);
    }
    if p.is_infinite() {
        // rank one on the top singular pair of the dominant block
        let mut best = (0usize, -1.0);
        for (k, m) in y.blocks().iter().enumerate() {
            let s = linalg::op_norm(m);
            if s > best.1 {
                best = (k, s);
            }
        }
        let k = best.0;
        let (u, _, v) = linalg::svd(y.block(k));
        let w = alg.blocks()[k].weight;
        let m: Mat = (v.column(0) * u.column(0).adjoint()).unscale(w);
        let mut z = Element::zero(&alg);
        z.blocks_mut()[k] = m;
        return z;
    }
    let pol = polar(y, rank_cutoff);
    if p == 1.0 {
        return pol.u.adjoint();
    }
    let norm = schatten(y, p);
    let power = pol.modulus.psd_apply(|l| (l / norm).powf(p - 1.0));
    &power * &pol.u.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{AlgebraDescriptor, Block};
    use crate::random::Sampler;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn identity_norm_is_n_to_the_one_over_q() {
        for n in 1..=64usize {
            let alg = AlgebraDescriptor::full(n, 1.0).unwrap();
            let one = Element::identity(&alg);
            for q in [1.0, 1.5, 2.0, 3.0, 4.0, 6.0] {
                let got = lp_norm(&one, q).unwrap();
                assert!((got - (n as f64).powf(1.0 / q)).abs() < 1e-12 * got);
            }
            assert_eq!(lp_norm(&one, f64::INFINITY).unwrap(), 1.0);
        }
    }

    #[test]
    fn rejects_exponents_below_one() {
        let one = Element::identity(&AlgebraDescriptor::full(2, 1.0).unwrap());
        assert!(matches!(lp_norm(&one, 0.5), Err(Error::Domain(_))));
        assert!(lp_norm(&one, f64::NAN).is_err());
        // the internal quasi-norm still works
        assert!((schatten(&one, 0.5) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn adjoint_and_modulus_share_norms() {
        let alg = AlgebraDescriptor::new(vec![Block::new(3, 0.7), Block::new(2, 1.3)]).unwrap();
        let mut s = Sampler::new(17);
        for _ in 0..30 {
            let x = s.ginibre(&alg);
            for p in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
                let n = lp_norm(&x, p).unwrap();
                assert!((lp_norm(&x.adjoint(), p).unwrap() - n).abs() < 1e-12 * n);
                assert!((lp_norm(&x.abs(), p).unwrap() - n).abs() < 1e-12 * n);
            }
        }
    }

    #[test]
    fn weighted_two_norm_matches_trace_formula() {
        let alg = AlgebraDescriptor::new(vec![Block::new(2, 0.25), Block::new(3, 2.0)]).unwrap();
        let x = Sampler::new(1).ginibre(&alg);
        let direct = (&x.adjoint() * &x).trace().re.sqrt();
        assert!((lp_norm(&x, 2.0).unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn holder_inequality() {
        let alg = AlgebraDescriptor::new(vec![Block::new(3, 1.0), Block::new(2, 0.4)]).unwrap();
        let mut s = Sampler::new(5);
        for _ in 0..50 {
            let x = s.ginibre(&alg);
            let y = s.ginibre(&alg);
            for (p, q) in [(2.0, 2.0), (3.0, 1.5), (4.0, 4.0), (1.5, 6.0)] {
                let r = 1.0 / (1.0 / p + 1.0 / q);
                let lhs = schatten(&(&x * &y), r);
                assert!(lhs <= lp_norm(&x, p).unwrap() * lp_norm(&y, q).unwrap() * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn duality_pairing_bounds() {
        let alg = AlgebraDescriptor::full(2, 1.0).unwrap();
        let e11 = Element::unit(&alg, 0, 0, 0).unwrap();
        assert_eq!(duality_pair(&e11, &e11).unwrap(), C64::new(1.0, 0.0));

        let alg = AlgebraDescriptor::new(vec![Block::new(3, 1.0), Block::new(1, 2.5)]).unwrap();
        let mut s = Sampler::new(2);
        for _ in 0..50 {
            let a = s.ginibre(&alg);
            let b = s.ginibre(&alg);
            for p in [1.0, 1.5, 2.0, 4.0, f64::INFINITY] {
                let pp = conjugate_exponent(p);
                let bound = lp_norm(&a, p).unwrap() * lp_norm(&b, pp).unwrap();
                assert!(duality_pair(&a, &b).unwrap().norm() <= bound + 1e-9);
            }
        }
    }

    #[test]
    fn norming_dual_attains_the_norm() {
        let alg = AlgebraDescriptor::new(vec![Block::new(3, 1.0), Block::new(2, 0.3)]).unwrap();
        let mut s = Sampler::new(12);
        for _ in 0..30 {
            let y = s.ginibre(&alg);
            for p in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
                let z = norming_dual(&y, p, 1e-12).unwrap();
                let pp = conjugate_exponent(p);
                let pairing = duality_pair(&z, &y).unwrap();
                let n = lp_norm(&y, p).unwrap();
                assert!((pairing.re - n).abs() < 1e-10 * n, "p={p}");
                assert!(pairing.im.abs() < 1e-10 * n);
                assert!((lp_norm(&z, pp).unwrap() - 1.0).abs() < 1e-10, "p={p}");
            }
        }
    }

    #[test]
    fn matrix_unit_disjointness() {
        let alg = AlgebraDescriptor::full(2, 1.0).unwrap();
        let e11 = Element::unit(&alg, 0, 0, 0).unwrap();
        let e22 = Element::unit(&alg, 0, 1, 1).unwrap();
        let e12 = Element::unit(&alg, 0, 0, 1).unwrap();
        assert!(disjoint(&e11, &e22, 1e-9).unwrap());
        assert!(!disjoint(&e11, &e12, 1e-9).unwrap());
        let other = Element::identity(&AlgebraDescriptor::full(3, 1.0).unwrap());
        assert_eq!(disjoint(&e11, &other, 1e-9).unwrap_err(), Error::DescriptorMismatch);
    }

    #[test]
    fn disjointness_through_moduli() {
        let alg = AlgebraDescriptor::new(vec![Block::new(3, 1.0), Block::new(2, 2.0)]).unwrap();
        let mut s = Sampler::new(31);
        for i in 0..200 {
            let (a, mut b) = s.disjoint_pair(&alg);
            if i % 2 == 1 {
                b = &b + &s.ginibre(&alg).scale_real(1e-3);
            }
            let direct = disjoint(&a, &b, 1e-9).unwrap();
            let via_moduli = disjoint(&a.abs(), &b.abs(), 1e-9).unwrap()
                && disjoint(&a.adjoint().abs(), &b.adjoint().abs(), 1e-9).unwrap();
            assert_eq!(direct, via_moduli);
            assert_eq!(direct, i % 2 == 0);
        }
    }

    #[test]
    fn orthogonal_positives_are_disjoint() {
        let alg = AlgebraDescriptor::full(4, 1.0).unwrap();
        let mut s = Sampler::new(8);
        for i in 0..100 {
            let (a, b) = s.disjoint_pair(&alg);
            let (a, mut b) = (a.abs(), b.abs());
            if i % 2 == 1 {
                b = &b + &s.rank_one_positive(&alg).scale_real(0.1);
            }
            let orth = duality_pair(&a, &b).unwrap().norm() <= 1e-9 * lp_norm(&a, 2.0).unwrap() * lp_norm(&b, 2.0).unwrap();
            assert_eq!(orth, (&a * &b).norm_inf() <= 1e-9 * a.norm_inf() * b.norm_inf());
            assert_eq!(orth, i % 2 == 0);
        }
    }

    #[test]
    fn positivity() {
        let alg = AlgebraDescriptor::full(3, 1.0).unwrap();
        let mut s = Sampler::new(2);
        assert!(is_positive(&s.wishart(&alg), 1e-9));
        let h = s.hermitian(&alg);
        assert!(!is_positive(&(&h - &Element::identity(&alg).scale_real(10.0)), 1e-9));
        assert!(!is_positive(&Element::unit(&alg, 0, 0, 1).unwrap(), 1e-9));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn triangle_and_homogeneity(seed in any::<u64>(), p in 1.0f64..6.0, t in -5.0f64..5.0) {
            let alg = AlgebraDescriptor::new(vec![Block::new(2, 0.5), Block::new(3, 1.5)]).unwrap();
            let mut s = Sampler::new(seed);
            let x = s.ginibre(&alg);
            let y = s.ginibre(&alg);
            let nx = lp_norm(&x, p).unwrap();
            prop_assert!(lp_norm(&(&x + &y), p).unwrap() <= (nx + lp_norm(&y, p).unwrap()) * (1.0 + 1e-12));
            let scaled = lp_norm(&x.scale_real(t), p).unwrap();
            prop_assert!((scaled - t.abs() * nx).abs() <= 1e-12 * nx.max(1.0) * t.abs().max(1.0));
        }
    }
}
