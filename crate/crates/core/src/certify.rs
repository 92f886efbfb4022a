//! Estimation and certification of the ℓ¹-bounded norm `‖T‖_{ℓ¹}`.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::algebra::{amplify_matrix, matrix_entry, Element};
use crate::config::ToleranceConfig;
use crate::error::{domain, structural, Result};
use crate::linalg::{self, c, C64};
use crate::lp::schatten;
use crate::maps::{amplified_map, op_norm, positivity_tests, power_method, LinearMap, PositivityLevel, PositivityVerdict, Provenance};
use crate::random::Sampler;
use crate::sequence::{dinq_disjoint_test, l1_norm_bounds, DinqReport, DisjointVerdict, ElementSequence, Factorization, NormInterval};
use crate::yeadon::{certify_separating, extract_yeadon, ExtractionFailure, SeparatingVerdict, YeadonTriple};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleKind {
    /// A single positive element; both ℓ¹ norms are exact.
    PositiveSingleton,
    /// The maximizer of the operator-norm power method, as a singleton.
    AscentSingleton,
    PositiveSequence,
    GeneralSequence,
    /// A disjoint pair at `p = 2`.
    DisjointPair,
}

#[derive(Debug, Clone, Copy)]
pub struct RatioSample {
    pub kind: SampleKind,
    pub len: usize,
    /// Lower bound of `‖(T x_n)‖` over the upper bound of `‖(x_n)‖`.
    pub ratio: f64,
}

#[derive(Debug, Clone, Default)]
pub struct SampleSet {
    pub samples: Vec<RatioSample>,
}

impl SampleSet {
    pub fn best(&self) -> f64 {
        self.samples.iter().map(|s| s.ratio).fold(0.0, f64::max)
    }

    pub fn best_of(&self, kind: SampleKind) -> f64 {
        self.samples.iter().filter(|s| s.kind == kind).map(|s| s.ratio).fold(0.0, f64::max)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Ratio for one input sequence; `None` when the input is zero.
pub fn sequence_ratio(t: &LinearMap, seq: &ElementSequence, p: f64, cfg: &ToleranceConfig) -> Result<Option<f64>> {
    if seq.len() == 1 {
        let x = &seq.items()[0];
        let nx = schatten(x, p);
        if nx == 0.0 {
            return Ok(None);
        }
        return Ok(Some(schatten(&t.apply(x)?, p) / nx));
    }
    let den = l1_norm_bounds(seq, p, cfg)?.upper;
    if den == 0.0 {
        return Ok(None);
    }
    let image = ElementSequence::new(seq.items().iter().map(|x| t.apply(x)).collect::<Result<_>>()?)?;
    let num = l1_norm_bounds(&image, p, cfg)?.lower;
    Ok(Some(num / den))
}

/// Default number of random sequences used by [`l1_ratio_lower`].
pub const DEFAULT_SAMPLES: usize = 12;

/// Sampled lower bound for `‖T‖_{ℓ¹}`.
pub fn l1_ratio_lower(t: &LinearMap, p: f64, cfg: &ToleranceConfig) -> Result<f64> {
    Ok(l1_ratio_samples(t, p, cfg, DEFAULT_SAMPLES)?.best())
}

/// Positive singletons (the unit, block units, rank-one projections), the
/// power-method maximizer, then `count` random sequences cycling through
/// positive sequences, general sequences and (at `p = 2`) disjoint pairs.
pub fn l1_ratio_samples(t: &LinearMap, p: f64, cfg: &ToleranceConfig, count: usize) -> Result<SampleSet> {
    if p.is_nan() || p < 1.0 {
        return Err(domain!("exponent must lie in [1, ∞], got {p}"));
    }
    cfg.validate()?;
    let dom = t.domain().clone();
    let mut s = Sampler::new(cfg.derived_seed(0x4c31));
    let mut set = SampleSet::default();
    let push = |set: &mut SampleSet, kind: SampleKind, seq: ElementSequence| -> Result<()> {
        let len = seq.len();
        if let Some(ratio) = sequence_ratio(t, &seq, p, cfg)? {
            set.samples.push(RatioSample { kind, len, ratio });
        }
        Ok(())
    };
    let mut singles = vec![Element::identity(&dom)];
    for k in 0..dom.block_count() {
        singles.push(Element::block_unit(&dom, k));
    }
    singles.push(s.rank_one_positive(&dom));
    for x in singles {
        push(&mut set, SampleKind::PositiveSingleton, ElementSequence::new(vec![x])?)?;
    }
    let (_, maximizer) = power_method(t, p, cfg);
    push(&mut set, SampleKind::AscentSingleton, ElementSequence::new(vec![maximizer])?)?;
    for i in 0..count {
        match i % 3 {
            0 => {
                let len = 2 + s.index(3);
                let items = (0..len).map(|_| if s.coin() { s.wishart(&dom) } else { s.rank_one_positive(&dom) }).collect();
                push(&mut set, SampleKind::PositiveSequence, ElementSequence::new(items)?)?;
            }
            1 => {
                let len = 2 + s.index(2);
                let items = (0..len).map(|_| s.ginibre(&dom)).collect();
                push(&mut set, SampleKind::GeneralSequence, ElementSequence::new(items)?)?;
            }
            _ if p == 2.0 && dom.space_dim() > 1 => {
                let (a, b) = s.disjoint_pair(&dom);
                push(&mut set, SampleKind::DisjointPair, ElementSequence::new(vec![a, b])?)?;
            }
            _ => {
                let items = (0..2).map(|_| s.low_rank(&dom, 1)).collect();
                push(&mut set, SampleKind::GeneralSequence, ElementSequence::new(items)?)?;
            }
        }
    }
    Ok(set)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum L1Route {
    CommutativeRegular,
    PEqualsOne,
    Separating,
    TwoPositiveContraction,
    Positive4x,
    SampledOnly,
}

impl L1Route {
    pub fn name(&self) -> &'static str {
        match self {
            Self::CommutativeRegular => "commutative_regular",
            Self::PEqualsOne => "p_equals_one",
            Self::Separating => "separating",
            Self::TwoPositiveContraction => "two_positive_contraction",
            Self::Positive4x => "positive_4x",
            Self::SampledOnly => "sampled_only",
        }
    }
}

#[derive(Debug, Clone)]
pub enum L1Evidence {
    RegularNorm(NormInterval),
    OperatorNorm(NormInterval),
    Separating { triple: Box<YeadonTriple>, norm: NormInterval },
    TwoPositive { verdict: PositivityVerdict, norm: NormInterval },
    Positive { verdict: PositivityVerdict, norm: NormInterval },
    Samples,
}

#[derive(Debug, Clone)]
pub struct L1Certificate {
    /// Interval for `‖T‖_{ℓ¹}`; the upper end is infinite on the sampled-only route.
    pub value_interval: NormInterval,
    pub route: L1Route,
    pub evidence: L1Evidence,
    pub samples: SampleSet,
    /// Set when a sampled lower bound exceeds the certified upper bound.
    pub alarm: Option<String>,
}

pub fn certify_l1_norm(t: &LinearMap, p: f64, cfg: &ToleranceConfig) -> Result<L1Certificate> {
    certify_l1_norm_with(t, p, cfg, DEFAULT_SAMPLES)
}

/// Tries the routes in order: commutative regular norm, `p = 1`, separating,
/// 2-positive, positive (`4‖T‖`), sampled only.
pub fn certify_l1_norm_with(t: &LinearMap, p: f64, cfg: &ToleranceConfig, samples: usize) -> Result<L1Certificate> {
    let set = l1_ratio_samples(t, p, cfg, samples)?;
    let sampled = set.best();
    let (route, evidence, lower, upper) = if t.domain().is_commutative() && t.codomain().is_commutative() {
        let reg = regular_norm_commutative(t, p, cfg)?;
        let (l, u) = (reg.lower, reg.upper);
        (L1Route::CommutativeRegular, L1Evidence::RegularNorm(reg), l, u)
    } else if p == 1.0 {
        let n = op_norm(t, p, cfg)?;
        let (l, u) = (n.lower, n.upper);
        (L1Route::PEqualsOne, L1Evidence::OperatorNorm(n), l, u)
    } else if let SeparatingVerdict::Certified(triple) = certify_separating(t, cfg) {
        let n = op_norm(t, p, cfg)?;
        let (l, u) = (n.lower, n.upper);
        (L1Route::Separating, L1Evidence::Separating { triple, norm: n }, l, u)
    } else {
        let two = positivity_tests(t, PositivityLevel::TwoPositive, cfg);
        if two.is_certified() {
            let n = op_norm(t, p, cfg)?;
            let (l, u) = (n.lower, n.upper);
            (L1Route::TwoPositiveContraction, L1Evidence::TwoPositive { verdict: two, norm: n }, l, u)
        } else {
            let pos = positivity_tests(t, PositivityLevel::Positive, cfg);
            if pos.is_certified() {
                let n = op_norm(t, p, cfg)?;
                let (l, u) = (n.lower, 4.0 * n.upper);
                (L1Route::Positive4x, L1Evidence::Positive { verdict: pos, norm: n }, l, u)
            } else {
                (L1Route::SampledOnly, L1Evidence::Samples, 0.0, f64::INFINITY)
            }
        }
    };
    let lower = lower.max(sampled);
    let alarm = (sampled > upper * (1.0 + cfg.opt_tol) + 1e-12).then(|| {
        format!("sampled lower bound {sampled:.12e} exceeds the certified upper bound {upper:.12e} on route {}", route.name())
    });
    let value_interval = if upper.is_finite() {
        NormInterval::bounded(lower.min(upper), upper, cfg.opt_tol)
    } else {
        NormInterval { lower, upper, certified_exact: false, witness: None }
    };
    Ok(L1Certificate { value_interval, route, evidence, samples: set, alarm })
}

/// `‖|T|‖_{p→p}` for the entrywise modulus of the matrix of a map between
/// commutative algebras; this is the ℓ¹-bounded norm.
pub fn regular_norm_commutative(t: &LinearMap, p: f64, cfg: &ToleranceConfig) -> Result<NormInterval> {
    if !t.domain().is_commutative() || !t.codomain().is_commutative() {
        return Err(domain!("the regular norm needs diagonal domain and codomain"));
    }
    let modulus = t.action().map(|z| c(z.norm()));
    let abs = LinearMap::new(t.domain(), t.codomain(), modulus, p)?.with_provenance(Provenance::CP);
    op_norm(&abs, p, cfg)
}

#[derive(Debug, Clone)]
pub enum L2Verdict {
    Ytf(Box<YeadonTriple>),
    /// A disjoint pair whose images fail the `L²(ℓ¹₂)` disjointness criterion.
    NoYtf { a: Element, b: Element, report: Box<DinqReport> },
    NotIsometry { defect: f64 },
    Undetermined,
}

#[derive(Debug, Clone)]
pub struct L2Classification {
    pub verdict: L2Verdict,
    /// Outcome of the extraction route; `None` when it succeeded.
    pub extraction_failure: Option<ExtractionFailure>,
    /// Whether the disjointness route found a violating pair.
    pub disjointness_witness: bool,
    pub pairs_tested: usize,
    pub undetermined_pairs: usize,
    /// Largest `‖(Ta, Tb)‖ / ‖(a, b)‖` over tested disjoint pairs (lower end of the image norm).
    pub max_l12_ratio: f64,
    pub positive: bool,
    pub consistent: bool,
    pub alarm: Option<String>,
}

/// `‖Â*Â − 1‖` for the trace-weighted matrix `Â` of `T` at `p = 2`.
pub fn isometry_defect(t: &LinearMap) -> f64 {
    let mut a = t.action().clone();
    for r in 0..a.nrows() {
        a.row_mut(r).scale_mut(t.codomain().coord_weight(r).sqrt());
    }
    for col in 0..a.ncols() {
        a.column_mut(col).unscale_mut(t.domain().coord_weight(col).sqrt());
    }
    let g = a.adjoint() * &a;
    let n = g.nrows();
    linalg::op_norm(&(g - nalgebra::DMatrix::<C64>::identity(n, n)))
}

/// Default number of random disjoint pairs in the disjointness route.
pub const L2_RANDOM_PAIRS: usize = 16;

/// Decides whether an `L²` isometry has a Yeadon type factorization, by
/// extraction and independently through disjointness of images of disjoint
/// pairs, and checks that both routes agree.
pub fn classify_l2_isometry(t: &LinearMap, cfg: &ToleranceConfig) -> Result<L2Classification> {
    cfg.validate()?;
    let defect = isometry_defect(t);
    let positive = positivity_tests(t, PositivityLevel::Positive, cfg).is_certified();
    if defect > cfg.algebraic_tol * 10.0 {
        return Ok(L2Classification {
            verdict: L2Verdict::NotIsometry { defect },
            extraction_failure: None,
            disjointness_witness: false,
            pairs_tested: 0,
            undetermined_pairs: 0,
            max_l12_ratio: 0.0,
            positive,
            consistent: true,
            alarm: None,
        });
    }
    let extraction = extract_yeadon(t, cfg);
    let dom = t.domain().clone();
    let mut pairs: Vec<(Element, Element)> = Vec::new();
    let mut units = Vec::new();
    for (k, b) in dom.blocks().iter().enumerate() {
        for i in 0..b.dim {
            for j in 0..b.dim {
                units.push((k, i, j));
            }
        }
    }
    for (x, &(k, i, j)) in units.iter().enumerate() {
        for &(l, r, s) in &units[x + 1..] {
            if k != l || (i != r && j != s) {
                pairs.push((Element::unit(&dom, k, i, j)?, Element::unit(&dom, l, r, s)?));
            }
        }
    }
    pairs.truncate(48);
    let mut sampler = Sampler::new(cfg.derived_seed(0x6c32));
    if dom.space_dim() > 1 {
        for _ in 0..L2_RANDOM_PAIRS {
            pairs.push(sampler.disjoint_pair(&dom));
        }
    }
    let mut witness = None;
    let mut undetermined = 0usize;
    let mut tested = 0usize;
    let mut max_ratio = 0.0f64;
    for (a, b) in pairs {
        tested += 1;
        let ta = t.apply(&a)?;
        let tb = t.apply(&b)?;
        let report = dinq_disjoint_test(&ta, &tb, cfg)?;
        let input = (schatten(&a, 2.0).powi(2) + schatten(&b, 2.0).powi(2)).sqrt();
        if input > 0.0 {
            max_ratio = max_ratio.max(report.interval.lower / input);
        }
        match report.verdict {
            DisjointVerdict::NotDisjoint => {
                witness = Some((a, b, report));
                break;
            }
            DisjointVerdict::Undetermined => undetermined += 1,
            DisjointVerdict::Disjoint => {}
        }
    }
    let has_witness = witness.is_some();
    let consistent = extraction.is_ok() != has_witness;
    let mut alarm = None;
    if !consistent {
        alarm = Some(String::from(if has_witness {
            "extraction succeeded but a disjoint pair has non-disjoint images"
        } else {
            "extraction failed but every tested disjoint pair stayed disjoint"
        }));
    }
    if positive && extraction.is_err() {
        alarm = Some(String::from("a positive isometry failed Yeadon extraction"));
    }
    let (verdict, failure) = match (extraction, witness) {
        (Ok(triple), _) => (L2Verdict::Ytf(Box::new(triple)), None),
        (Err(f), Some((a, b, report))) => (L2Verdict::NoYtf { a, b, report: Box::new(report) }, Some(f)),
        (Err(f), None) => (L2Verdict::Undetermined, Some(f)),
    };
    Ok(L2Classification {
        verdict,
        extraction_failure: failure,
        disjointness_witness: has_witness,
        pairs_tested: tested,
        undetermined_pairs: undetermined,
        max_l12_ratio: max_ratio,
        positive,
        consistent,
        alarm,
    })
}

/// Rescales `x_n = a_n b_n` so both factor norms equal one; returns the scale `s`
/// with `a_n b_n = x_n / s` afterwards.
pub fn normalized(f: &Factorization, p: f64) -> (Factorization, f64) {
    let r = f.row_factor(p);
    let col = f.column_factor(p);
    if r == 0.0 || col == 0.0 {
        return (f.clone(), 0.0);
    }
    let a = f.a.iter().map(|a| a.scale_real(1.0 / r)).collect();
    let b = f.b.iter().map(|b| b.scale_real(1.0 / col)).collect();
    (Factorization { a, b }, r * col)
}

#[derive(Debug, Clone)]
pub struct PolarizationWitness {
    pub factorization: Factorization,
    pub scale: f64,
    /// `y_n^k = (a_n* + i^k b_n)*(a_n* + i^k b_n)` for `k = 0..4`.
    pub y: [Vec<Element>; 4],
    /// `max_n ‖Σ_k (−i)^k y_n^k / 4 − a_n b_n‖_∞`, relative.
    pub reconstruction_residual: f64,
    /// `‖Σ_n y_n^k‖_p` for each `k`; at most 4.
    pub sum_norms: [f64; 4],
    /// `scale · Σ_k ‖Σ_n T(y_n^k)‖_p / 4`, an upper bound for `‖(T(a_n b_n))‖` when `T` is positive.
    pub image_bound: Option<f64>,
}

fn i_pow(k: usize) -> C64 {
    [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0)][k % 4]
}

pub fn polarization_witness(t: Option<&LinearMap>, f: &Factorization, p: f64) -> Result<PolarizationWitness> {
    if f.a.is_empty() || f.a.len() != f.b.len() {
        return Err(structural!("factorization must have matching non-empty factor lists"));
    }
    let (nf, scale) = normalized(f, p);
    let mut y: [Vec<Element>; 4] = Default::default();
    for (k, yk) in y.iter_mut().enumerate() {
        for (a, b) in nf.a.iter().zip(&nf.b) {
            let cc = &a.adjoint() + &b.scale(i_pow(k));
            yk.push(&cc.adjoint() * &cc);
        }
    }
    let mut residual = 0.0f64;
    for (n, ab) in nf.products().iter().enumerate() {
        let mut rec = Element::zero(ab.algebra());
        for (k, yk) in y.iter().enumerate() {
            rec = &rec + &yk[n].scale(i_pow(k).conj() * 0.25);
        }
        let s = ab.norm_inf().max(nf.a[n].norm_inf() * nf.b[n].norm_inf()).max(f64::MIN_POSITIVE);
        residual = residual.max((&rec - ab).norm_inf() / s);
    }
    let alg = nf.a[0].algebra().clone();
    let sum = |items: &[Element]| items.iter().fold(Element::zero(items[0].algebra()), |acc, x| &acc + x);
    let mut sum_norms = [0.0; 4];
    for k in 0..4 {
        sum_norms[k] = schatten(&sum(&y[k]), p);
    }
    let image_bound = match t {
        Some(t) if t.domain().blocks() == alg.blocks() => {
            let mut total = 0.0;
            for yk in &y {
                let imgs: Vec<Element> = yk.iter().map(|x| t.apply(x)).collect::<Result<_>>()?;
                total += schatten(&sum(&imgs), p);
            }
            Some(scale * total / 4.0)
        }
        Some(_) => return Err(crate::error::Error::DescriptorMismatch),
        None => None,
    };
    Ok(PolarizationWitness { factorization: nf, scale, y, reconstruction_residual: residual, sum_norms, image_bound })
}

#[derive(Debug, Clone)]
pub struct TwoPositiveSqrtWitness {
    pub factorization: Factorization,
    pub scale: f64,
    pub alpha: Vec<Element>,
    pub beta: Vec<Element>,
    pub delta: Vec<Element>,
    /// Largest relative residual of the three identities.
    pub residual: f64,
    /// `scale · ‖Σ T(a_n a_n*)‖_p^{1/2} ‖Σ T(b_n* b_n)‖_p^{1/2}`, an upper bound for `‖(T(a_n b_n))‖`.
    pub image_bound: f64,
    /// `scale · ‖T‖` with the upper end of the operator norm.
    pub norm_bound: f64,
}

/// Square root of the positive image of `[[aa*, ab], [b*a*, b*b]]` under
/// `I_{S_2} ⊗ T`, which factors `T(ab)` through `α_n β_n + β_n δ_n`.
pub fn two_positive_sqrt_witness(t: &LinearMap, f: &Factorization, p: f64, cfg: &ToleranceConfig) -> Result<TwoPositiveSqrtWitness> {
    if !positivity_tests(t, PositivityLevel::TwoPositive, cfg).is_certified() {
        return Err(domain!("the map is not certified 2-positive"));
    }
    if f.a.is_empty() || f.a.len() != f.b.len() {
        return Err(structural!("factorization must have matching non-empty factor lists"));
    }
    let (nf, scale) = normalized(f, p);
    let base = t.domain().clone();
    let big = base.amplify(2)?;
    let amp = amplified_map(t, 2)?;
    let cod = t.codomain().clone();
    let (mut alpha, mut beta, mut delta) = (Vec::new(), Vec::new(), Vec::new());
    let mut residual = 0.0f64;
    for (a, b) in nf.a.iter().zip(&nf.b) {
        let x = amplify_matrix(&big, &[vec![a * &a.adjoint(), a * b], vec![&b.adjoint() * &a.adjoint(), &b.adjoint() * b]])?;
        let y = amp.apply(&x)?.hermitian_part();
        let root = y.sqrt_psd();
        let al = matrix_entry(&root, &cod, 2, 0, 0)?;
        let be = matrix_entry(&root, &cod, 2, 0, 1)?;
        let de = matrix_entry(&root, &cod, 2, 1, 1)?;
        let taa = t.apply(&(a * &a.adjoint()))?;
        let tbb = t.apply(&(&b.adjoint() * b))?;
        let tab = t.apply(&(a * b))?;
        let s = y.norm_inf().max(f64::MIN_POSITIVE);
        let r1 = (&taa - &(&(&al * &al) + &(&be * &be.adjoint()))).norm_inf();
        let r2 = (&tbb - &(&(&be.adjoint() * &be) + &(&de * &de))).norm_inf();
        let r3 = (&tab - &(&(&al * &be) + &(&be * &de))).norm_inf();
        residual = residual.max(r1.max(r2).max(r3) / s);
        alpha.push(al);
        beta.push(be);
        delta.push(de);
    }
    if residual > cfg.algebraic_tol * 10.0 {
        return Err(structural!("square-root identities fail with residual {residual:.3e}"));
    }
    let zero = Element::zero(&cod);
    let row = nf.a.iter().map(|a| t.apply(&(a * &a.adjoint()))).collect::<Result<Vec<_>>>()?;
    let col = nf.b.iter().map(|b| t.apply(&(&b.adjoint() * b))).collect::<Result<Vec<_>>>()?;
    let rsum = row.iter().fold(zero.clone(), |acc, x| &acc + x).hermitian_part();
    let csum = col.iter().fold(zero, |acc, x| &acc + x).hermitian_part();
    let image_bound = scale * (schatten(&rsum, p) * schatten(&csum, p)).sqrt();
    let norm_bound = scale * op_norm(t, p, cfg)?.upper;
    Ok(TwoPositiveSqrtWitness { factorization: nf, scale, alpha, beta, delta, residual, image_bound, norm_bound })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessKind {
    Polarization,
    TwoPositiveSqrt,
}

#[derive(Debug, Clone)]
pub enum ConstructiveWitness {
    Polarization(PolarizationWitness),
    TwoPositiveSqrt(TwoPositiveSqrtWitness),
}

/// Builds the witness from the factorization found by [`l1_norm_bounds`].
pub fn constructive_witnesses(
    t: &LinearMap,
    seq: &ElementSequence,
    kind: WitnessKind,
    p: f64,
    cfg: &ToleranceConfig,
) -> Result<ConstructiveWitness> {
    let iv = l1_norm_bounds(seq, p, cfg)?;
    let f = iv.witness.ok_or_else(|| structural!("the norm optimizer returned no factorization"))?;
    Ok(match kind {
        WitnessKind::Polarization => ConstructiveWitness::Polarization(polarization_witness(Some(t), &f, p)?),
        WitnessKind::TwoPositiveSqrt => ConstructiveWitness::TwoPositiveSqrt(two_positive_sqrt_witness(t, &f, p, cfg)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{AlgebraDescriptor, Block};
    use crate::maps::BlockCopy;
    use nalgebra::DMatrix;

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn m2() -> crate::algebra::Algebra {
        AlgebraDescriptor::full(2, 1.0).unwrap()
    }

    #[test]
    fn ratio_lower_trivial_maps() {
        let alg = AlgebraDescriptor::new(vec![Block::new(2, 1.0), Block::new(1, 0.5)]).unwrap();
        let id = LinearMap::identity(&alg, 2.0).unwrap();
        for p in [1.0, 1.5, 2.0, 3.0] {
            let l = l1_ratio_lower(&id, p, &cfg()).unwrap();
            assert!(l >= 1.0 - 1e-6 && l <= 1.0 + 1e-6, "p={p}: {l}");
            let l2 = l1_ratio_lower(&id.scale(2.0), p, &cfg()).unwrap();
            assert!(l2 >= 2.0 - 1e-6, "p={p}: {l2}");
        }
    }

    #[test]
    fn transpose_is_l1_contractive_in_samples() {
        let t = LinearMap::transpose(&AlgebraDescriptor::full(3, 1.0).unwrap(), 2.0).unwrap();
        for p in [1.5, 2.0, 3.0] {
            let set = l1_ratio_samples(&t, p, &cfg(), 12).unwrap();
            assert!(set.best() <= 1.0 + 1e-6, "p={p}: {}", set.best());
        }
    }

    #[test]
    fn routes() {
        let t = LinearMap::transpose(&m2(), 2.0).unwrap();
        let cert = certify_l1_norm(&t, 2.0, &cfg()).unwrap();
        assert_eq!(cert.route, L1Route::Separating);
        assert!((cert.value_interval.lower - 1.0).abs() < 1e-6 && (cert.value_interval.upper - 1.0).abs() < 1e-9);
        assert!(cert.alarm.is_none());

        let r = LinearMap::rotation_mixing(0.7, 1.0).unwrap();
        let cert = certify_l1_norm(&r, 1.0, &cfg()).unwrap();
        assert_eq!(cert.route, L1Route::PEqualsOne);
        let n = op_norm(&r, 1.0, &cfg()).unwrap();
        assert!((cert.value_interval.upper - n.upper).abs() < 1e-12);

        let dep = LinearMap::depolarizing(&AlgebraDescriptor::full(3, 1.0).unwrap(), 0.5, 3.0).unwrap();
        let cert = certify_l1_norm(&dep, 3.0, &cfg()).unwrap();
        assert_eq!(cert.route, L1Route::TwoPositiveContraction);
        assert!((cert.value_interval.upper - 1.0).abs() < 1e-9);

        let red = LinearMap::reduction(2, 2.0).unwrap().scale(0.5);
        let sum = LinearMap::jordan_direct_sum(&m2(), 2.0).unwrap();
        let _ = sum;
        let cert = certify_l1_norm(&red, 2.0, &cfg()).unwrap();
        // the reduction map on M₂ is a Jordan map up to scaling: it is separating
        assert!(matches!(cert.route, L1Route::Separating | L1Route::Positive4x), "{:?}", cert.route);

        let red3 = LinearMap::reduction(3, 2.0).unwrap();
        let cert = certify_l1_norm(&red3, 2.0, &cfg()).unwrap();
        assert_eq!(cert.route, L1Route::Positive4x);
        let n = op_norm(&red3, 2.0, &cfg()).unwrap();
        assert!((cert.value_interval.upper - 4.0 * n.upper).abs() < 1e-9);
        assert!(cert.alarm.is_none());

        let ts = LinearMap::trace_shift(3, 2.0, 2.0).unwrap();
        let cert = certify_l1_norm(&ts, 2.0, &cfg()).unwrap();
        assert_eq!(cert.route, L1Route::SampledOnly);
        assert!(cert.value_interval.upper.is_infinite() && !cert.value_interval.certified_exact);
    }

    #[test]
    fn regular_norm_examples() {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let m = DMatrix::from_row_slice(2, 2, &[h, -h, h, h]);
        let t = LinearMap::commutative_matrix(&[1.0, 1.0], &[1.0, 1.0], &m, 2.0).unwrap();
        let reg = regular_norm_commutative(&t, 2.0, &cfg()).unwrap();
        assert!((reg.upper - 2f64.sqrt()).abs() < 1e-12 && reg.certified_exact);
        assert!((op_norm(&t, 2.0, &cfg()).unwrap().upper - 1.0).abs() < 1e-12);
        let cert = certify_l1_norm(&t, 2.0, &cfg()).unwrap();
        assert_eq!(cert.route, L1Route::CommutativeRegular);
        assert!(cert.samples.best() <= 2f64.sqrt() * (1.0 + 1e-6));
        let pos = DMatrix::from_row_slice(2, 3, &[1.0, 0.5, 0.0, 0.2, 1.0, 3.0]);
        let t = LinearMap::commutative_matrix(&[1.0, 2.0, 0.5], &[1.0, 1.0], &pos, 2.0).unwrap();
        let reg = regular_norm_commutative(&t, 2.0, &cfg()).unwrap();
        assert!((reg.upper - op_norm(&t, 2.0, &cfg()).unwrap().upper).abs() < 1e-12);
        assert!(regular_norm_commutative(&LinearMap::identity(&m2(), 2.0).unwrap(), 2.0, &cfg()).is_err());
    }

    #[test]
    fn l2_classification() {
        let mut s = Sampler::new(1);
        let u = LinearMap::unitary_conjugation(&s.unitary(&m2()), 2.0).unwrap();
        let cl = classify_l2_isometry(&u, &cfg()).unwrap();
        assert!(matches!(cl.verdict, L2Verdict::Ytf(_)) && cl.consistent && cl.alarm.is_none());
        let r = LinearMap::rotation_mixing(core::f64::consts::FRAC_PI_4, 2.0).unwrap();
        let cl = classify_l2_isometry(&r, &cfg()).unwrap();
        let L2Verdict::NoYtf { a, b, report } = &cl.verdict else { panic!("{:?}", cl.verdict) };
        assert!(crate::lp::disjoint(a, b, 1e-12).unwrap());
        assert_eq!(report.verdict, DisjointVerdict::NotDisjoint);
        assert!(cl.consistent);
        // x ↦ x ⊕ 0 into M₂ ⊕ M₂
        let cod = AlgebraDescriptor::new(vec![Block::new(2, 1.0), Block::new(2, 1.0)]).unwrap();
        let emb = LinearMap::jordan_embedding(&m2(), &cod, &[BlockCopy { source: 0, target: 0, offset: 0, transposed: false }], None, 2.0).unwrap();
        let cl = classify_l2_isometry(&emb, &cfg()).unwrap();
        assert!(cl.positive && matches!(cl.verdict, L2Verdict::Ytf(_)) && cl.alarm.is_none());
        let dep = LinearMap::depolarizing(&m2(), 0.5, 2.0).unwrap();
        assert!(matches!(classify_l2_isometry(&dep, &cfg()).unwrap().verdict, L2Verdict::NotIsometry { .. }));
    }

    #[test]
    fn polarization_single_product() {
        let mut s = Sampler::new(2);
        let alg = AlgebraDescriptor::new(vec![Block::new(2, 1.0), Block::new(1, 2.0)]).unwrap();
        let (a, b) = (s.ginibre(&alg), s.ginibre(&alg));
        let f = Factorization { a: vec![a.clone()], b: vec![b.clone()] };
        let w = polarization_witness(None, &f, 2.0).unwrap();
        assert!(w.reconstruction_residual < 1e-12);
        for k in 0..4 {
            assert!(w.sum_norms[k] <= 4.0 + 1e-12);
            assert!(crate::lp::is_positive(&w.y[k][0], 1e-12));
        }
        let back = w.factorization.products()[0].scale_real(w.scale);
        assert!(back.distance(&(&a * &b)) < 1e-12);
    }

    #[test]
    fn two_positive_sqrt_identity_example() {
        let id = LinearMap::identity(&m2(), 2.0).unwrap();
        let e11 = Element::unit(&m2(), 0, 0, 0).unwrap();
        let e12 = Element::unit(&m2(), 0, 0, 1).unwrap();
        let f = Factorization { a: vec![e11.clone()], b: vec![e12.clone()] };
        let w = two_positive_sqrt_witness(&id, &f, 2.0, &cfg()).unwrap();
        assert!(w.residual < 1e-12);
        // [[E11, E12],[E21, E22]] is twice a projection, its root is itself over √2
        let r = core::f64::consts::FRAC_1_SQRT_2;
        assert!(w.alpha[0].distance(&e11.scale_real(r)) < 1e-12);
        assert!(w.beta[0].distance(&e12.scale_real(r)) < 1e-12);
        assert!(w.delta[0].distance(&Element::unit(&m2(), 0, 1, 1).unwrap().scale_real(r)) < 1e-12);
        assert!(w.image_bound <= w.norm_bound * (1.0 + 1e-12));
        let tr = LinearMap::transpose(&m2(), 2.0).unwrap();
        assert!(two_positive_sqrt_witness(&tr, &f, 2.0, &cfg()).is_err());
    }

    #[test]
    fn two_positive_sqrt_on_channels() {
        let mut s = Sampler::new(3);
        let alg = AlgebraDescriptor::full(3, 1.0).unwrap();
        let ch = LinearMap::mixed_unitary(&[s.unitary(&alg), s.unitary(&alg)], &[0.4, 0.6], 1.5).unwrap();
        let seq = ElementSequence::new(vec![s.ginibre(&alg), s.ginibre(&alg)]).unwrap();
        let ConstructiveWitness::TwoPositiveSqrt(w) = constructive_witnesses(&ch, &seq, WitnessKind::TwoPositiveSqrt, 1.5, &cfg()).unwrap() else {
            panic!()
        };
        assert!(w.residual < 1e-8);
        assert!(w.image_bound <= w.norm_bound * (1.0 + 1e-9));
        let image = ElementSequence::new(seq.items().iter().map(|x| ch.apply(x).unwrap()).collect()).unwrap();
        let lower = l1_norm_bounds(&image, 1.5, &cfg()).unwrap().lower;
        assert!(lower <= w.image_bound * (1.0 + 1e-6));
    }

    #[test]
    fn polarization_bound_for_positive_map() {
        let mut s = Sampler::new(4);
        let t = LinearMap::reduction(3, 2.0).unwrap();
        let seq = ElementSequence::new(vec![s.ginibre(t.domain()), s.ginibre(t.domain())]).unwrap();
        let ConstructiveWitness::Polarization(w) = constructive_witnesses(&t, &seq, WitnessKind::Polarization, 2.0, &cfg()).unwrap() else {
            panic!()
        };
        assert!(w.reconstruction_residual < 1e-9);
        let n = op_norm(&t, 2.0, &cfg()).unwrap().upper;
        assert!(w.image_bound.unwrap() <= 4.0 * n * w.scale * (1.0 + 1e-9));
    }
}
