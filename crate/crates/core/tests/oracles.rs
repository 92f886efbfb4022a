use nalgebra::DMatrix;
use nclp_core::certify::{certify_l1_norm, classify_l2_isometry, L1Route, L2Verdict};
use nclp_core::maps::{op_norm, positivity_tests, PositivityLevel, Provenance};
use nclp_core::sequence::{dinq_disjoint_test, l12_norm, l1_norm_bounds, DisjointVerdict};
use nclp_core::yeadon::{certify_separating, extract_yeadon, random_yeadon, yeadon_synthetic, SeparatingVerdict};
use nclp_core::{
    conjugate_exponent, disjoint, duality_pair, lp_norm, AlgebraDescriptor, Block, Element, ElementSequence,
    LinearMap, Sampler, ToleranceConfig, C64,
};
use proptest::prelude::*;

fn cfg() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn matrix_unit_norm_is_weight_to_one_over_p() {
    // ‖E_11‖_p in (M_n, w Tr) is w^{1/p}
    for &w in &[0.5, 1.0, 2.5] {
        let alg = AlgebraDescriptor::full(3, w).unwrap();
        let e = Element::unit(&alg, 0, 0, 0).unwrap();
        for &p in &[1.0, 1.5, 2.0, 4.0] {
            assert!(close(lp_norm(&e, p).unwrap(), w.powf(1.0 / p), 1e-13));
        }
        assert!(close(lp_norm(&e, f64::INFINITY).unwrap(), 1.0, 1e-13));
    }
}

#[test]
fn diagonal_norm_is_weighted_sum() {
    let weights = [0.5, 1.0, 2.0];
    let alg = AlgebraDescriptor::diagonal(&weights).unwrap();
    let d = [3.0, -1.0, 0.5];
    let coords = nalgebra::DVector::from_iterator(3, d.iter().map(|&v| C64::new(v, 0.0)));
    let x = Element::from_coords(&alg, &coords).unwrap();
    for &p in &[1.0, 2.0, 3.0] {
        let oracle: f64 = weights.iter().zip(d).map(|(w, v)| w * v.abs().powf(p)).sum::<f64>().powf(1.0 / p);
        assert!(close(lp_norm(&x, p).unwrap(), oracle, 1e-13));
    }
}

#[test]
fn positive_sequence_norm_is_norm_of_sum() {
    let alg = AlgebraDescriptor::new(vec![Block::new(2, 1.0), Block::new(1, 0.7)]).unwrap();
    let mut s = Sampler::new(3);
    let seq = ElementSequence::new((0..4).map(|_| s.positive(&alg)).collect()).unwrap();
    for &p in &[1.0, 2.0, 3.0] {
        let iv = l1_norm_bounds(&seq, p, &cfg()).unwrap();
        let exact = lp_norm(&seq.sum(), p).unwrap();
        assert!(iv.lower <= exact * (1.0 + 1e-9) && exact <= iv.upper * (1.0 + 1e-9));
        assert!(iv.width() <= 1e-6 * exact);
    }
}

#[test]
fn matrix_units_in_distinct_rows_and_columns_are_disjoint() {
    // E_11 and E_22 are disjoint; E_11 and E_12 are not
    let alg = AlgebraDescriptor::full(2, 1.0).unwrap();
    let e11 = Element::unit(&alg, 0, 0, 0).unwrap();
    let e22 = Element::unit(&alg, 0, 1, 1).unwrap();
    let e12 = Element::unit(&alg, 0, 0, 1).unwrap();
    assert!(disjoint(&e11, &e22, 1e-9).unwrap());
    assert!(!disjoint(&e11, &e12, 1e-9).unwrap());
    let r = dinq_disjoint_test(&e11, &e22, &cfg()).unwrap();
    assert_eq!(r.verdict, DisjointVerdict::Disjoint);
    // ‖(E_11, E_22)‖ = ‖E_11 + E_22‖_2 = √2
    let iv = l12_norm(&e11, &e22, 2.0, &cfg()).unwrap();
    assert!(close(iv.upper, 2f64.sqrt(), 1e-6));
    let r = dinq_disjoint_test(&e11, &e12, &cfg()).unwrap();
    assert_eq!(r.verdict, DisjointVerdict::NotDisjoint);
}

#[test]
fn transpose_is_separating_with_unit_l1_norm_at_two() {
    let alg = AlgebraDescriptor::full(2, 1.0).unwrap();
    let t = LinearMap::transpose(&alg, 2.0).unwrap();
    assert!(matches!(certify_separating(&t, &cfg()), SeparatingVerdict::Certified(_)));
    let cert = certify_l1_norm(&t, 2.0, &cfg()).unwrap();
    assert_eq!(cert.route, L1Route::Separating);
    assert!(close(cert.value_interval.lower, 1.0, 1e-9) && close(cert.value_interval.upper, 1.0, 1e-9));
}

#[test]
fn rotation_mixing_is_not_separating() {
    let t = LinearMap::rotation_mixing(0.7854, 2.0).unwrap();
    assert!(matches!(certify_separating(&t, &cfg()), SeparatingVerdict::Falsified { .. }));
    let cls = classify_l2_isometry(&t, &cfg()).unwrap();
    assert!(matches!(cls.verdict, L2Verdict::NoYtf { .. }));
}

#[test]
fn depolarizing_is_completely_positive_without_provenance() {
    let alg = AlgebraDescriptor::full(3, 1.0).unwrap();
    let t = LinearMap::depolarizing(&alg, 0.4, 2.0).unwrap().with_provenance(Provenance::NONE);
    for level in [PositivityLevel::Positive, PositivityLevel::TwoPositive, PositivityLevel::CompletelyPositive] {
        assert!(positivity_tests(&t, level, &cfg()).is_certified());
    }
}

#[test]
fn reduction_on_two_by_two_is_positive_but_not_two_positive() {
    let t = LinearMap::reduction(2, 2.0).unwrap().with_provenance(Provenance::NONE);
    assert!(!positivity_tests(&t, PositivityLevel::Positive, &cfg()).is_falsified());
    assert!(positivity_tests(&t, PositivityLevel::TwoPositive, &cfg()).is_falsified());
}

#[test]
fn commutative_maps_use_the_regular_route() {
    let entries = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, 1.0, 1.0]);
    let t = LinearMap::commutative_matrix(&[1.0, 1.0], &[1.0, 1.0], &entries, 2.0).unwrap();
    let cert = certify_l1_norm(&t, 2.0, &cfg()).unwrap();
    assert_eq!(cert.route, L1Route::CommutativeRegular);
    // |T| is the all-ones matrix, whose norm on ℓ²_2 is 2 while ‖T‖ = √2
    assert!(close(cert.value_interval.upper, 2.0, 1e-6));
    let norm = op_norm(&t, 2.0, &cfg()).unwrap();
    assert!(close(norm.upper, 2f64.sqrt(), 1e-9));
}

#[test]
fn yeadon_roundtrip_recovers_the_triple() {
    let mut s = Sampler::new(11);
    for i in 0..10 {
        let data = random_yeadon(&mut s, 1 + i % 3, i % 2 == 0, 2.0).unwrap();
        let t = yeadon_synthetic(&data.w, &data.b, &data.j, &cfg()).unwrap();
        let triple = extract_yeadon(&t, &cfg()).expect("extraction succeeds");
        assert!(triple.distance(&data.w, &data.b, &data.j) <= 1e-8);
    }
}

#[test]
fn seeded_sampling_is_reproducible() {
    let alg = AlgebraDescriptor::full(3, 1.0).unwrap();
    let (mut a, mut b) = (Sampler::new(42), Sampler::new(42));
    assert_eq!(a.ginibre(&alg).coords(), b.ginibre(&alg).coords());
}

fn algebra_strategy() -> impl Strategy<Value = nclp_core::Algebra> {
    prop::collection::vec((1usize..4, 0.5f64..2.0), 1..3)
        .prop_map(|bs| AlgebraDescriptor::new(bs.into_iter().map(|(d, w)| Block::new(d, w)).collect()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn holder_inequality(alg in algebra_strategy(), seed in any::<u64>(), p in 1.0f64..6.0) {
        let mut s = Sampler::new(seed);
        let (a, b) = (s.ginibre(&alg), s.ginibre(&alg));
        let q = conjugate_exponent(p);
        let lhs = duality_pair(&a, &b).unwrap().norm();
        prop_assert!(lhs <= lp_norm(&a, p).unwrap() * lp_norm(&b, q).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn adjoint_and_modulus_share_the_norm(alg in algebra_strategy(), seed in any::<u64>(), p in 1.0f64..6.0) {
        let mut s = Sampler::new(seed);
        let x = s.ginibre(&alg);
        let n = lp_norm(&x, p).unwrap();
        prop_assert!(close(lp_norm(&x.adjoint(), p).unwrap(), n, 1e-12));
        prop_assert!(close(lp_norm(&x.abs(), p).unwrap(), n, 1e-12));
    }

    #[test]
    fn unitary_conjugation_is_isometric(alg in algebra_strategy(), seed in any::<u64>(), p in 1.0f64..6.0) {
        let mut s = Sampler::new(seed);
        let u = s.unitary(&alg);
        let t = LinearMap::unitary_conjugation(&u, p).unwrap();
        let x = s.ginibre(&alg);
        prop_assert!(close(lp_norm(&t.apply(&x).unwrap(), p).unwrap(), lp_norm(&x, p).unwrap(), 1e-10));
    }

    #[test]
    fn disjoint_pairs_are_disjoint(alg in algebra_strategy(), seed in any::<u64>()) {
        prop_assume!(alg.space_dim() >= 2);
        let mut s = Sampler::new(seed);
        let (a, b) = s.disjoint_pair(&alg);
        prop_assert!(disjoint(&a, &b, 1e-9).unwrap());
        prop_assert!((&a.adjoint() * &b).norm_inf() <= 1e-9 * a.norm_inf() * b.norm_inf());
    }
}
