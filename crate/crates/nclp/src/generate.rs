//! Seeded random instances: algebras, sequences, pairs and maps of the
//! classes the theorems talk about.

use nalgebra::DMatrix;
use nclp_core::maps::{positivity_tests, BlockCopy, PositivityLevel, Provenance};
use nclp_core::yeadon::{random_jordan_automorphism, random_yeadon, yeadon_synthetic};
use nclp_core::{
    Algebra, AlgebraDescriptor, Block, Element, ElementSequence, LinearMap, Result, Sampler, ToleranceConfig,
};

/// Random algebra with `1..=max_blocks` blocks of dimension `1..=max_dim`
/// and weights in `[0.5, 2)`.
pub fn algebra(s: &mut Sampler, max_blocks: usize, max_dim: usize) -> Algebra {
    let count = 1 + s.index(max_blocks.max(1));
    let blocks = (0..count).map(|_| Block::new(1 + s.index(max_dim.max(1)), s.range(0.5, 2.0))).collect();
    AlgebraDescriptor::new(blocks).expect("valid random algebra")
}

/// Like [`algebra`] but with at least one block of dimension ≥ 2.
pub fn noncommutative_algebra(s: &mut Sampler, max_blocks: usize, max_dim: usize) -> Algebra {
    loop {
        let alg = algebra(s, max_blocks, max_dim.max(2));
        if !alg.is_commutative() {
            return alg;
        }
    }
}

pub fn diagonal_weights(s: &mut Sampler, n: usize) -> Vec<f64> {
    (0..n).map(|_| s.range(0.5, 2.0)).collect()
}

pub fn positive_sequence(s: &mut Sampler, alg: &Algebra, len: usize) -> ElementSequence {
    let items = (0..len)
        .map(|_| match s.index(3) {
            0 => s.rank_one_positive(alg),
            1 => s.wishart(alg),
            _ => {
                let r = 1 + s.index(2);
                let g = s.low_rank(alg, r);
                &g.adjoint() * &g
            }
        })
        .collect();
    ElementSequence::new(items).expect("non-empty sequence")
}

/// General sequence mixing Ginibre, low-rank, Hermitian and disjoint terms.
pub fn general_sequence(s: &mut Sampler, alg: &Algebra, len: usize) -> ElementSequence {
    let mut items = Vec::with_capacity(len);
    while items.len() < len {
        match s.index(4) {
            0 => items.push(s.ginibre(alg)),
            1 => items.push(s.low_rank(alg, 1)),
            2 => items.push(s.hermitian(alg)),
            _ => {
                let (a, b) = s.disjoint_pair(alg);
                items.push(a);
                if items.len() < len {
                    items.push(b);
                }
            }
        }
    }
    ElementSequence::new(items).expect("non-empty sequence")
}

/// A pair that is not disjoint: Ginibre pairs, perturbed disjoint pairs or
/// overlapping positive elements.
pub fn nondisjoint_pair(s: &mut Sampler, alg: &Algebra) -> (Element, Element) {
    match s.index(3) {
        0 => (s.ginibre(alg), s.ginibre(alg)),
        1 => {
            let (a, b) = s.disjoint_pair(alg);
            let eps = s.range(0.1, 0.5);
            let g = s.ginibre(alg);
            let g = g.scale_real(eps * b.frobenius().max(a.frobenius()) / g.frobenius().max(1e-300));
            (a, &b + &g)
        }
        _ => {
            let a = s.positive(alg);
            let b = &s.positive(alg) + &a.scale_real(s.range(0.2, 1.0));
            (a, b)
        }
    }
}

pub fn arbitrary_map(s: &mut Sampler, dom: &Algebra, cod: &Algebra, p: f64) -> Result<LinearMap> {
    let action = s.ginibre_matrix(cod.space_dim(), dom.space_dim());
    LinearMap::new(dom, cod, action, p)
}

/// Random real matrix between diagonal algebras with mixed signs and
/// occasional zero rows or columns.
pub fn commutative_map(s: &mut Sampler, p: f64) -> Result<LinearMap> {
    let (n, m) = (1 + s.index(6), 1 + s.index(6));
    let dw = diagonal_weights(s, n);
    let cw = diagonal_weights(s, m);
    let sparse = s.coin();
    let entries = DMatrix::from_fn(m, n, |_, _| if sparse && s.index(3) == 0 { 0.0 } else { s.normal() });
    LinearMap::commutative_matrix(&dw, &cw, &entries, p)
}

/// Kraus map with one to three operators per random block pair, scaled so
/// that `‖T(1)‖_∞ ≤ 1` and `‖T*(1)‖_∞ ≤ 1`; a contraction on every `L^p`.
pub fn cp_contraction(s: &mut Sampler, dom: &Algebra, cod: &Algebra, p: f64) -> Result<LinearMap> {
    let mut ops = Vec::new();
    for k in 0..dom.block_count() {
        let count = 1 + s.index(3);
        for _ in 0..count {
            let l = s.index(cod.block_count());
            let m = s.ginibre_matrix(cod.blocks()[l].dim, dom.blocks()[k].dim);
            ops.push((k, l, m));
        }
    }
    let t = LinearMap::kraus(dom, cod, &ops, p)?;
    contraction_scale(&t, p)
}

/// Scales a CP map by `1/max(‖T(1)‖_∞, ‖T*(1)‖_∞)`.
pub fn contraction_scale(t: &LinearMap, p: f64) -> Result<LinearMap> {
    let up = t.apply(&Element::identity(t.domain()))?.norm_inf();
    let down = t.adjoint_map(p)?.apply(&Element::identity(t.codomain()))?.norm_inf();
    let top = up.max(down);
    Ok(if top > 0.0 { t.scale(1.0 / top) } else { t.clone() })
}

/// Positive maps that are not 2-positive, built from the transpose, the
/// reduction map, transpose/channel mixtures and Jordan maps with an
/// anti-homomorphic part. The constructor provenance is `positive`; the
/// returned map has passed sampled positivity and failed 2-positivity.
pub fn positive_non_two_positive(s: &mut Sampler, p: f64, cfg: &ToleranceConfig) -> Result<LinearMap> {
    loop {
        let candidate = match s.index(4) {
            0 => {
                let alg = noncommutative_algebra(s, 2, 4);
                let u = s.unitary(&alg);
                LinearMap::transpose(&alg, p)?.then(&LinearMap::unitary_conjugation(&u, p)?)?.scale(s.range(0.3, 2.0))
            }
            1 => LinearMap::reduction(2 + s.index(3), p)?.scale(s.range(0.2, 1.0)),
            2 => {
                let n = 2 + s.index(3);
                let alg = AlgebraDescriptor::full(n, s.range(0.5, 2.0))?;
                let t = LinearMap::transpose(&alg, p)?;
                let d = LinearMap::depolarizing(&alg, s.range(0.0, 1.0), p)?;
                t.convex_combination(&d, s.range(0.6, 1.0))?.with_provenance(Provenance::POSITIVE)
            }
            _ => {
                let blocks = 2 + s.index(2);
                let data = random_yeadon(s, blocks, true, p)?;
                yeadon_synthetic(&data.w, &data.b, &data.j, cfg)?
            }
        };
        if !candidate.provenance().positive {
            continue;
        }
        let stripped = candidate.clone().with_provenance(Provenance::NONE);
        if positivity_tests(&stripped, PositivityLevel::TwoPositive, cfg).is_falsified()
            && !positivity_tests(&stripped, PositivityLevel::Positive, cfg).is_falsified()
        {
            return Ok(candidate);
        }
    }
}

/// Block embedding `x ↦ u(x ⊕ 0)u*` with one copy per domain block in its
/// own target block of the same weight (an `L²` isometry), optionally
/// transposed and padded.
pub fn block_embedding(s: &mut Sampler, p: f64) -> Result<LinearMap> {
    let dom = algebra(s, 2, 3);
    let mut cod_blocks = Vec::new();
    let mut copies = Vec::new();
    for (k, b) in dom.blocks().iter().enumerate() {
        let pad = s.index(3);
        copies.push(BlockCopy { source: k, target: k, offset: s.index(pad + 1), transposed: s.coin() });
        cod_blocks.push(Block::new(b.dim + pad, b.weight));
    }
    let cod = AlgebraDescriptor::new(cod_blocks)?;
    let u = s.unitary(&cod);
    LinearMap::jordan_embedding(&dom, &cod, &copies, Some(&u), p)
}

/// `L²` isometries by family: 0 unitary conjugations, 1 block embeddings,
/// 2 positive isometries (cycling through scaled `x ⊕ xᵗ`, Jordan
/// automorphisms and weight changes by `variant`), 3 rotation mixings.
/// Returns the map and whether it has a Yeadon type factorization.
pub fn l2_isometry(s: &mut Sampler, family: usize, variant: usize) -> Result<(LinearMap, bool)> {
    Ok(match family % 4 {
        0 => {
            let alg = algebra(s, 3, 3);
            let u = s.unitary(&alg);
            (LinearMap::unitary_conjugation(&u, 2.0)?, true)
        }
        1 => (block_embedding(s, 2.0)?, true),
        2 => {
            let map = match variant % 3 {
                0 => {
                    let alg = AlgebraDescriptor::full(1 + s.index(3), s.range(0.5, 2.0))?;
                    LinearMap::jordan_direct_sum(&alg, 2.0)?.scale(std::f64::consts::FRAC_1_SQRT_2)
                }
                1 => {
                    let (n, transposed) = (2 + s.index(2), s.coin());
                    random_jordan_automorphism(s, n, transposed, 2.0)?
                }
                _ => {
                    // x ↦ (w/w')^{1/2} u x u* into M_n with trace weight w'
                    let n = 1 + s.index(3);
                    let (w, w2) = (s.range(0.5, 2.0), s.range(0.5, 2.0));
                    let dom = AlgebraDescriptor::full(n, w)?;
                    let cod = AlgebraDescriptor::full(n, w2)?;
                    let u = s.unitary(&cod);
                    let copies = [BlockCopy { source: 0, target: 0, offset: 0, transposed: s.coin() }];
                    LinearMap::jordan_embedding(&dom, &cod, &copies, Some(&u), 2.0)?.scale((w / w2).sqrt())
                }
            };
            (map, true)
        }
        _ => {
            let theta = s.range(0.1, std::f64::consts::FRAC_PI_2 - 0.1);
            (LinearMap::rotation_mixing(theta, 2.0)?, false)
        }
    })
}
