//! Yeadon type factorizations `T = wBJ(·)` and the separating property.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::DVector;
#[allow(unused_imports)]
use num_traits::Float;

use crate::algebra::{polar, support, AlgebraDescriptor, Block, Element};
use crate::config::ToleranceConfig;
use crate::error::{structural, Error, Result};
use crate::linalg::{self, c, Mat, C64};
use crate::lp;
use crate::maps::{amplified_map, BlockCopy, LinearMap, Provenance};
use crate::random::Sampler;

/// The conditions of a Yeadon type factorization, in the order they are checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YtfCondition {
    /// `w` partial isometry, `B ≥ 0` and `T(x) = wBJ(x)`.
    A,
    /// `w*w = J(1) = s(B)`.
    B,
    /// `J(x²) = J(x)²` and `J(x*) = J(x)*`.
    Jordan,
    /// `B` commutes with the range of `J`.
    C,
}

impl fmt::Display for YtfCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::A => "(a) T = wBJ with w a partial isometry and B positive",
            Self::B => "(b) w*w = J(1) = s(B)",
            Self::Jordan => "J is a Jordan *-homomorphism",
            Self::C => "(c) B commutes with J(M)",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionFailure {
    pub condition: YtfCondition,
    pub residual: f64,
    pub detail: String,
}

impl fmt::Display for ExtractionFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "condition {} fails (residual {:.3e}): {}", self.condition, self.residual, self.detail)
    }
}

fn failure(condition: YtfCondition, residual: f64, detail: impl Into<String>) -> ExtractionFailure {
    ExtractionFailure { condition, residual, detail: detail.into() }
}

/// Residuals of the defining identities, relative to the size of `T`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TripleResiduals {
    pub reconstruction: f64,
    pub support: f64,
    pub jordan: f64,
    pub commutation: f64,
}

impl TripleResiduals {
    pub fn max(&self) -> f64 {
        self.reconstruction.max(self.support).max(self.jordan).max(self.commutation)
    }
}

#[derive(Debug, Clone)]
pub struct CentralDecomposition {
    /// Sum of the central projections on which `J` is multiplicative.
    pub g: Element,
    /// Sum of the central projections on which `J` is anti-multiplicative.
    pub f: Element,
    /// `x ↦ J(x)g`.
    pub pi: LinearMap,
    /// `x ↦ J(x)f`.
    pub sigma: LinearMap,
    /// Minimal central projections of the algebra generated by `J(M)`.
    pub projections: Vec<Element>,
}

#[derive(Debug, Clone)]
pub struct YeadonTriple {
    pub w: Element,
    pub b: Element,
    pub j: LinearMap,
    pub jordan_certified: bool,
    pub g: Element,
    pub f: Element,
    pub pi: LinearMap,
    pub sigma: LinearMap,
    pub residuals: TripleResiduals,
}

impl YeadonTriple {
    /// `e = J(1)`.
    pub fn e(&self) -> Element {
        self.j.apply_unchecked(&Element::identity(self.j.domain()))
    }

    /// Largest of the distances to another triple's `w`, `B` and `J`.
    pub fn distance(&self, w: &Element, b: &Element, j: &LinearMap) -> f64 {
        let dj = linalg::max_abs(&(self.j.action() - j.action())) / linalg::max_abs(j.action()).max(1.0);
        self.w.distance(w).max(self.b.distance(b)).max(dj)
    }
}

#[derive(Debug, Clone)]
pub struct JordanReport {
    pub is_jordan: bool,
    pub defect: f64,
}

fn images(j: &LinearMap) -> Vec<Element> {
    (0..j.domain().space_dim()).map(|i| j.basis_image(i)).collect()
}

fn image_scale(imgs: &[Element]) -> f64 {
    imgs.iter().map(Element::norm_inf).fold(1.0, f64::max)
}

/// Checks `J(x*) = J(x)*` and `J(ab + ba) = J(a)J(b) + J(b)J(a)` on all pairs
/// of matrix units, plus `J(x²) = J(x)²` on random self-adjoint `x`.
pub fn verify_jordan(j: &LinearMap, cfg: &ToleranceConfig) -> JordanReport {
    let dom = j.domain().clone();
    let imgs = images(j);
    let scale = image_scale(&imgs);
    let mut defect = 0.0f64;
    let n = dom.space_dim();
    for a in 0..n {
        let (k, r, s) = dom.coord_position(a);
        let adj = &imgs[dom.coord(k, s, r)];
        defect = defect.max((&imgs[a].adjoint() - adj).norm_inf() / scale);
    }
    for a in 0..n {
        let (k, r, s) = dom.coord_position(a);
        for b in a..n {
            let (l, t, u) = dom.coord_position(b);
            if k != l {
                // products vanish in both orders
                let prod = &imgs[a] * &imgs[b];
                let rev = &imgs[b] * &imgs[a];
                defect = defect.max((&prod + &rev).norm_inf() / (scale * scale));
                continue;
            }
            let mut lhs = Element::zero(j.codomain());
            if s == t {
                lhs = &lhs + &imgs[dom.coord(k, r, u)];
            }
            if u == r {
                lhs = &lhs + &imgs[dom.coord(k, t, s)];
            }
            let rhs = &(&imgs[a] * &imgs[b]) + &(&imgs[b] * &imgs[a]);
            defect = defect.max((&lhs - &rhs).norm_inf() / (scale * scale));
        }
    }
    let mut sampler = Sampler::new(cfg.derived_seed(0x6a6f));
    for _ in 0..4 {
        let x = sampler.hermitian(&dom);
        let x = x.scale_real(1.0 / x.norm_inf().max(f64::MIN_POSITIVE));
        let jx = j.apply_unchecked(&x);
        let jxx = j.apply_unchecked(&(&x * &x));
        defect = defect.max((&jxx - &(&jx * &jx)).norm_inf() / (scale * scale));
    }
    JordanReport { is_jordan: defect <= cfg.algebraic_tol, defect }
}

/// Orthonormal basis (Euclidean coordinates) of a span, built incrementally.
struct Span {
    basis: Vec<DVector<C64>>,
}

impl Span {
    fn new() -> Self {
        Self { basis: Vec::new() }
    }

    /// Adds `v` if it is not in the span up to `tol` relative; returns whether it was added.
    fn push(&mut self, v: &DVector<C64>, tol: f64) -> bool {
        let norm = v.norm();
        if norm == 0.0 {
            return false;
        }
        let mut r = v.clone();
        for _ in 0..2 {
            for q in &self.basis {
                let proj = q.dotc(&r);
                r -= q * proj;
            }
        }
        let rn = r.norm();
        if rn <= tol * norm {
            return false;
        }
        self.basis.push(r / c(rn));
        true
    }
}

/// Center of the ∗-algebra generated by `J(M)`, split into minimal central
/// projections, each classified as multiplicative or anti-multiplicative.
/// Blocks where both laws hold go to `g`.
pub fn central_decompose(j: &LinearMap, cfg: &ToleranceConfig) -> Result<CentralDecomposition> {
    let cod = j.codomain().clone();
    let dom = j.domain().clone();
    let imgs = images(j);
    let scale = image_scale(&imgs);
    let span_tol = 1e-7;
    let mut span = Span::new();
    for g in &imgs {
        span.push(&g.coords(), span_tol);
    }
    let mut next = 0;
    while next < span.basis.len() {
        let d = Element::from_coords(&cod, &span.basis[next])?;
        next += 1;
        for g in &imgs {
            let prod = &d * g;
            span.push(&prod.coords(), span_tol);
        }
        if span.basis.len() > cod.space_dim() {
            return Err(structural!("generated algebra exceeds the codomain dimension"));
        }
    }
    let basis: Vec<Element> = span.basis.iter().map(|v| Element::from_coords(&cod, v)).collect::<Result<_>>()?;
    // null space of d ↦ ([d, J(e_a)])_a restricted to span(basis)
    let m = basis.len();
    let mut gram = Mat::zeros(m, m);
    let comms: Vec<Vec<DVector<C64>>> = basis
        .iter()
        .map(|d| imgs.iter().map(|g| (&(d * g) - &(g * d)).coords()).collect())
        .collect();
    for p in 0..m {
        for q in p..m {
            let mut acc = C64::new(0.0, 0.0);
            for (x, y) in comms[p].iter().zip(&comms[q]) {
                acc += x.dotc(y);
            }
            gram[(p, q)] = acc;
            gram[(q, p)] = acc.conj();
        }
    }
    let (vals, vecs) = linalg::herm_eig(&gram);
    let top = vals.last().copied().unwrap_or(0.0).max(scale * scale);
    let null: Vec<Element> = vals
        .iter()
        .enumerate()
        .filter(|(_, &v)| v <= 1e-12 * top)
        .map(|(i, _)| {
            let mut z = Element::zero(&cod);
            for (p, d) in basis.iter().enumerate() {
                z = &z + &d.scale(vecs[(p, i)]);
            }
            z
        })
        .collect();
    let e = j.apply_unchecked(&Element::identity(&dom));
    let projections = if null.is_empty() {
        Vec::new()
    } else {
        minimal_projections(&null, &e, cfg)
    };
    let mut g = Element::zero(&cod);
    let mut f = Element::zero(&cod);
    let n = dom.space_dim();
    for z in &projections {
        let mut hom = 0.0f64;
        let mut anti = 0.0f64;
        for a in 0..n {
            let (k, r, s) = dom.coord_position(a);
            for b in 0..n {
                let (l, t, u) = dom.coord_position(b);
                if k != l {
                    continue;
                }
                let jab = if s == t { imgs[dom.coord(k, r, u)].clone() } else { Element::zero(&cod) };
                let jajb = &imgs[a] * &imgs[b];
                let jbja = &imgs[b] * &imgs[a];
                hom = hom.max((&(&jab - &jajb) * z).norm_inf());
                anti = anti.max((&(&jab - &jbja) * z).norm_inf());
            }
        }
        let tol = cfg.algebraic_tol * scale * scale;
        if hom <= tol {
            g = &g + z;
        } else if anti <= tol {
            f = &f + z;
        } else {
            return Err(structural!(
                "a central block is neither multiplicative nor anti-multiplicative (defects {hom:.3e}, {anti:.3e})"
            ));
        }
    }
    let pi = right_multiplied(j, &g)?;
    let sigma = right_multiplied(j, &f)?;
    Ok(CentralDecomposition { g, f, pi, sigma, projections })
}

fn right_multiplied(j: &LinearMap, z: &Element) -> Result<LinearMap> {
    LinearMap::from_fn(j.domain(), j.codomain(), j.exponent(), |x| Ok(&j.apply_unchecked(x) * z))
}

/// Spectral projections of a generic self-adjoint central element supported on `e`.
fn minimal_projections(center: &[Element], e: &Element, cfg: &ToleranceConfig) -> Vec<Element> {
    let cod = e.algebra().clone();
    let mut sampler = Sampler::new(cfg.derived_seed(0x7a));
    let mut z = Element::zero(&cod);
    for n in center {
        let h = n.hermitian_part();
        let k = n.scale(C64::new(0.0, 1.0)).hermitian_part();
        z = &(&z + &h.scale_real(sampler.range(-1.0, 1.0))) + &k.scale_real(sampler.range(-1.0, 1.0));
    }
    let z = z.scale_real(1.0 / z.norm_inf().max(f64::MIN_POSITIVE));
    let shifted = &z + &e.scale_real(3.0);
    let mut pairs: Vec<(f64, usize, DVector<C64>)> = Vec::new();
    for (l, m) in shifted.blocks().iter().enumerate() {
        let (vals, vecs) = linalg::herm_eig(m);
        for (i, &v) in vals.iter().enumerate() {
            if v > 1.5 {
                pairs.push((v, l, vecs.column(i).into_owned()));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<Element> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for (v, l, vec) in pairs {
        if v - last > 1e-6 || out.is_empty() {
            out.push(Element::zero(&cod));
        }
        last = v;
        let p = out.last_mut().expect("pushed above");
        p.blocks_mut()[l] += &vec * vec.adjoint();
    }
    out
}

fn map_scale(t: &LinearMap) -> f64 {
    (0..t.domain().space_dim()).map(|i| t.basis_image(i).norm_inf()).fold(0.0, f64::max)
}

/// Recovers `(w, B, J)` from `T` with `B = |T(1)|`, `w` the polar part of
/// `T(1)` and `J(x) = B⁺w*T(x)`, then checks (a), (b), the Jordan property
/// and (c), in that order.
pub fn extract_yeadon(t: &LinearMap, cfg: &ToleranceConfig) -> core::result::Result<YeadonTriple, ExtractionFailure> {
    let dom = t.domain().clone();
    let cod = t.codomain().clone();
    let scale = map_scale(t);
    let tol = cfg.algebraic_tol;
    let one = t.apply_unchecked(&Element::identity(&dom));
    if scale == 0.0 {
        let zero = LinearMap::new(&dom, &cod, t.action().clone(), t.exponent()).expect("same shape");
        let z = Element::zero(&cod);
        return Ok(YeadonTriple {
            w: z.clone(),
            b: z.clone(),
            j: zero.clone(),
            jordan_certified: true,
            g: z.clone(),
            f: z,
            pi: zero.clone(),
            sigma: zero,
            residuals: TripleResiduals::default(),
        });
    }
    if one.norm_inf() <= tol * scale {
        return Err(failure(YtfCondition::A, 1.0, "T(1) = 0 while T ≠ 0"));
    }
    let pol = polar(&one, cfg.rank_cutoff);
    let w = pol.u.clone();
    let b = pol.modulus.clone();
    let bp = b.pinv_psd(cfg.rank_cutoff);
    let left = &bp * &w.adjoint();
    let j = LinearMap::from_fn(&dom, &cod, t.exponent(), |x| Ok(&left * &t.apply_unchecked(x))).expect("shapes match");
    let wb = &w * &b;
    let mut residuals = TripleResiduals::default();
    for i in 0..dom.space_dim() {
        let te = t.basis_image(i);
        let back = &wb * &j.basis_image(i);
        residuals.reconstruction = residuals.reconstruction.max((&back - &te).norm_inf() / scale);
    }
    if residuals.reconstruction > tol {
        return Err(failure(YtfCondition::A, residuals.reconstruction, "T(x) leaves the left support of T(1)"));
    }
    let e = j.apply_unchecked(&Element::identity(&dom));
    let sb = support(&b, cfg.rank_cutoff);
    residuals.support = (&(&w.adjoint() * &w) - &e).norm_inf().max((&e - &sb).norm_inf());
    if residuals.support > tol.sqrt() {
        return Err(failure(YtfCondition::B, residuals.support, "w*w, J(1) and s(B) differ"));
    }
    let jr = verify_jordan(&j, cfg);
    residuals.jordan = jr.defect;
    if !jr.is_jordan {
        return Err(failure(YtfCondition::Jordan, jr.defect, "J(x²) ≠ J(x)² on the matrix units"));
    }
    let bscale = b.norm_inf();
    for i in 0..dom.space_dim() {
        let je = j.basis_image(i);
        let comm = &(&b * &je) - &(&je * &b);
        residuals.commutation = residuals.commutation.max(comm.norm_inf() / bscale);
    }
    if residuals.commutation > tol {
        return Err(failure(YtfCondition::C, residuals.commutation, "B does not commute with J(M)"));
    }
    let cd = match central_decompose(&j, cfg) {
        Ok(cd) => cd,
        Err(err) => return Err(failure(YtfCondition::Jordan, jr.defect, alloc::format!("{err}"))),
    };
    Ok(YeadonTriple {
        w,
        b,
        j,
        jordan_certified: true,
        g: cd.g,
        f: cd.f,
        pi: cd.pi,
        sigma: cd.sigma,
        residuals,
    })
}

/// Checks the data of a Yeadon type factorization and reports the first
/// violated condition.
pub fn validate_yeadon_data(
    w: &Element,
    b: &Element,
    j: &LinearMap,
    cfg: &ToleranceConfig,
) -> core::result::Result<(), ExtractionFailure> {
    let cod = j.codomain();
    if !crate::algebra::same_algebra(w.algebra(), cod) || !crate::algebra::same_algebra(b.algebra(), cod) {
        return Err(failure(YtfCondition::A, f64::INFINITY, "w and B must live in the codomain of J"));
    }
    let tol = cfg.algebraic_tol;
    let ww = &w.adjoint() * w;
    let idem = (&(&ww * &ww) - &ww).norm_inf();
    if idem > tol.sqrt() {
        return Err(failure(YtfCondition::A, idem, "w is not a partial isometry"));
    }
    let bscale = b.norm_inf().max(f64::MIN_POSITIVE);
    if !b.is_self_adjoint(tol * bscale) || !lp::is_positive(b, tol) {
        return Err(failure(YtfCondition::A, 1.0, "B is not positive"));
    }
    let e = j.apply_unchecked(&Element::identity(j.domain()));
    let p = rounded_projection(&ww);
    let q = rounded_projection(&e);
    let s = support(b, cfg.rank_cutoff);
    let res = (&p - &q).norm_inf().max((&q - &s).norm_inf()).max((&e - &q).norm_inf());
    if res > tol.sqrt() {
        return Err(failure(YtfCondition::B, res, "w*w = J(1) = s(B) fails"));
    }
    let jr = verify_jordan(j, cfg);
    if !jr.is_jordan {
        return Err(failure(YtfCondition::Jordan, jr.defect, "J is not a Jordan *-homomorphism"));
    }
    let mut comm = 0.0f64;
    for i in 0..j.domain().space_dim() {
        let je = j.basis_image(i);
        comm = comm.max((&(b * &je) - &(&je * b)).norm_inf() / bscale);
    }
    if comm > tol {
        return Err(failure(YtfCondition::C, comm, "B does not commute with J(M)"));
    }
    Ok(())
}

/// Projection obtained by rounding the eigenvalues of a self-adjoint element at 1/2.
fn rounded_projection(x: &Element) -> Element {
    x.hermitian_part().psd_apply(|v| if v > 0.5 { 1.0 } else { 0.0 })
}

/// `x ↦ wBJ(x)` after validating the data.
pub fn yeadon_synthetic(w: &Element, b: &Element, j: &LinearMap, cfg: &ToleranceConfig) -> Result<LinearMap> {
    validate_yeadon_data(w, b, j, cfg).map_err(|f| Error::Structural(alloc::format!("invalid Yeadon data: {f}")))?;
    let wb = w * b;
    let map = LinearMap::from_fn(j.domain(), j.codomain(), j.exponent(), |x| Ok(&wb * &j.apply_unchecked(x)))?;
    let w_positive = w.is_self_adjoint(cfg.algebraic_tol) && lp::is_positive(w, cfg.algebraic_tol);
    let multiplicative = central_decompose(j, cfg).map(|cd| cd.f.norm_inf() < 0.5).unwrap_or(false);
    let prov = match (w_positive, multiplicative) {
        (true, true) => Provenance::CP,
        (true, false) => Provenance::POSITIVE,
        _ => Provenance::NONE,
    };
    Ok(map.with_provenance(prov))
}

#[derive(Debug, Clone)]
pub enum SeparatingVerdict {
    Certified(Box<YeadonTriple>),
    /// Positive `a`, `b` with `ab = 0` whose images are not disjoint.
    Falsified { a: Element, b: Element, defect: f64 },
    Undetermined { extraction: ExtractionFailure, tried: usize },
}

/// Default witness budget: random self-adjoint seeds, each cut at 4 places.
pub const WITNESS_SEEDS: usize = 64;

pub fn certify_separating(t: &LinearMap, cfg: &ToleranceConfig) -> SeparatingVerdict {
    certify_separating_with_budget(t, cfg, WITNESS_SEEDS)
}

pub fn certify_separating_with_budget(t: &LinearMap, cfg: &ToleranceConfig, seeds: usize) -> SeparatingVerdict {
    let extraction = match extract_yeadon(t, cfg) {
        Ok(triple) => return SeparatingVerdict::Certified(Box::new(triple)),
        Err(f) => f,
    };
    let (found, tried) = find_disjointness_witness(t, cfg, seeds);
    match found {
        Some((a, b, defect)) => SeparatingVerdict::Falsified { a, b, defect },
        None => SeparatingVerdict::Undetermined { extraction, tried },
    }
}

/// Relative size of `T(a)*T(b)` and `T(a)T(b)*`.
pub fn disjointness_defect(t: &LinearMap, a: &Element, b: &Element) -> f64 {
    let ta = t.apply_unchecked(a);
    let tb = t.apply_unchecked(b);
    let denom = (ta.norm_inf() * tb.norm_inf()).max(f64::MIN_POSITIVE);
    let x = (&ta.adjoint() * &tb).norm_inf();
    let y = (&ta * &tb.adjoint()).norm_inf();
    x.max(y) / denom
}

fn find_disjointness_witness(t: &LinearMap, cfg: &ToleranceConfig, seeds: usize) -> (Option<(Element, Element, f64)>, usize) {
    let dom = t.domain().clone();
    let threshold = cfg.algebraic_tol.sqrt();
    let mut tried = 0usize;
    let check = |a: Element, b: Element, tried: &mut usize| {
        *tried += 1;
        let d = disjointness_defect(t, &a, &b);
        (d > threshold).then_some((a, b, d))
    };
    // diagonal matrix units and block units first
    let mut units: Vec<Element> = Vec::new();
    for (k, blk) in dom.blocks().iter().enumerate() {
        for i in 0..blk.dim {
            units.push(Element::unit(&dom, k, i, i).expect("in range"));
        }
    }
    for i in 0..units.len() {
        for jdx in (i + 1)..units.len() {
            if let Some(w) = check(units[i].clone(), units[jdx].clone(), &mut tried) {
                return (Some(w), tried);
            }
        }
    }
    let mut sampler = Sampler::new(cfg.derived_seed(0x5e9));
    for _ in 0..seeds {
        let h = sampler.hermitian(&dom);
        let mut vecs: Vec<(f64, usize, DVector<C64>)> = Vec::new();
        for (k, m) in h.blocks().iter().enumerate() {
            let (vals, v) = linalg::herm_eig(m);
            for (i, &val) in vals.iter().enumerate() {
                vecs.push((val, k, v.column(i).into_owned()));
            }
        }
        vecs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let n = vecs.len();
        if n < 2 {
            break;
        }
        for _ in 0..4 {
            let cut = 1 + sampler.index(n - 1);
            let mut a = Element::zero(&dom);
            let mut b = Element::zero(&dom);
            for (idx, (val, k, v)) in vecs.iter().enumerate() {
                let weight = 1.0 + val.abs();
                let target = if idx < cut { &mut a } else { &mut b };
                target.blocks_mut()[*k] += (v * v.adjoint()) * c(weight);
            }
            if let Some(w) = check(a, b, &mut tried) {
                return (Some(w), tried);
            }
        }
    }
    (None, tried)
}

#[derive(Debug, Clone)]
pub struct StructuralReport {
    pub injective: bool,
    pub positive: bool,
    pub two_separating: bool,
    /// Whether each verdict agrees with its independent cross-check.
    pub injective_confirmed: bool,
    pub positive_confirmed: bool,
    pub two_separating_confirmed: bool,
}

impl StructuralReport {
    pub fn consistent(&self) -> bool {
        self.injective_confirmed && self.positive_confirmed && self.two_separating_confirmed
    }
}

/// Injectivity (kernel of `J`), positivity (`w ≥ 0`) and 2-separation
/// (`f = 0`), each cross-checked against `T` directly.
pub fn structural_checks(triple: &YeadonTriple, t: &LinearMap, cfg: &ToleranceConfig) -> StructuralReport {
    let dim = t.domain().space_dim();
    let injective = triple.j.rank(cfg.rank_cutoff) == dim;
    let injective_confirmed = (t.rank(cfg.rank_cutoff) == dim) == injective;
    let tol = cfg.algebraic_tol;
    let positive = triple.w.is_self_adjoint(tol) && lp::is_positive(&triple.w, tol);
    let one = t.apply_unchecked(&Element::identity(t.domain()));
    let mut positive_confirmed = (one.is_self_adjoint(tol * one.norm_inf()) && lp::is_positive(&one, tol)) == positive;
    if positive {
        let mut s = Sampler::new(cfg.derived_seed(0x9051));
        for _ in 0..32 {
            let x = s.rank_one_positive(t.domain());
            let y = t.apply_unchecked(&x);
            if !lp::is_positive(&y, tol) {
                positive_confirmed = false;
            }
        }
    }
    let two_separating = triple.f.norm_inf() < 0.5;
    let two_separating_confirmed = match amplified_map(t, 2) {
        Ok(amp) => match certify_separating_with_budget(&amp, cfg, 16) {
            SeparatingVerdict::Certified(_) => two_separating,
            SeparatingVerdict::Falsified { .. } => !two_separating,
            SeparatingVerdict::Undetermined { .. } => !two_separating,
        },
        Err(_) => false,
    };
    StructuralReport { injective, positive, two_separating, injective_confirmed, positive_confirmed, two_separating_confirmed }
}

/// Inputs of a synthetic Yeadon map.
#[derive(Debug, Clone)]
pub struct YeadonData {
    pub w: Element,
    pub b: Element,
    pub j: LinearMap,
}

/// Random valid `(w, B, J)`: a domain with `blocks` blocks (dimensions 1 to
/// 3), each embedded one or two times, as a homomorphism or transposed,
/// into a codomain of at most `blocks` blocks of dimension ≤ 8, conjugated
/// by random unitaries. `B` is a random positive element of the commutant
/// of `J(M)` inside `J(1)NJ(1)`, and `w` a random unitary times `J(1)`
/// (or `J(1)` itself when `positive_w`).
pub fn random_yeadon(s: &mut Sampler, blocks: usize, positive_w: bool, p: f64) -> Result<YeadonData> {
    let blocks = blocks.max(1);
    let dom_blocks: Vec<Block> = (0..blocks).map(|_| Block::new(1 + s.index(3), s.range(0.5, 2.0))).collect();
    let dom = AlgebraDescriptor::new(dom_blocks.clone())?;
    // groups: (source, transposed, multiplicity) per target block
    let targets = blocks.max(1);
    let mut layout: Vec<Vec<(usize, bool, usize)>> = vec![Vec::new(); targets];
    let mut used = vec![0usize; targets];
    for (src, blk) in dom_blocks.iter().enumerate() {
        let copies = 1 + usize::from(s.coin() && blk.dim <= 2);
        let mut placed = 0;
        while placed < copies {
            let tgt = s.index(targets);
            let mult = if copies - placed == 2 && s.coin() { 2 } else { 1 };
            let need = mult * blk.dim;
            let tgt = if used[tgt] + need <= 8 { tgt } else { (0..targets).find(|&t| used[t] + need <= 8).unwrap_or(tgt) };
            if used[tgt] + need > 8 {
                break;
            }
            layout[tgt].push((src, s.coin(), mult));
            used[tgt] += need;
            placed += mult;
        }
    }
    let mut cod_blocks = Vec::new();
    let mut target_index = vec![usize::MAX; targets];
    for t in 0..targets {
        if used[t] == 0 {
            continue;
        }
        let pad = usize::from(s.coin() && used[t] < 8);
        target_index[t] = cod_blocks.len();
        cod_blocks.push(Block::new(used[t] + pad, s.range(0.5, 2.0)));
    }
    let cod = AlgebraDescriptor::new(cod_blocks)?;
    let mut copies = Vec::new();
    let mut b_blocks: Vec<Mat> = cod.blocks().iter().map(|b| Mat::zeros(b.dim, b.dim)).collect();
    for (t, groups) in layout.iter().enumerate() {
        let ti = target_index[t];
        if ti == usize::MAX {
            continue;
        }
        let mut offset = 0;
        for &(src, transposed, mult) in groups {
            let d = dom_blocks[src].dim;
            for m in 0..mult {
                copies.push(BlockCopy { source: src, target: ti, offset: offset + m * d, transposed });
            }
            // C ⊗ 1_d with C positive definite, well conditioned
            let g = s.ginibre_matrix(mult, mult);
            let cmat = &g * g.adjoint() * c(0.3) + Mat::identity(mult, mult) * c(0.5);
            for r in 0..mult {
                for col in 0..mult {
                    for i in 0..d {
                        b_blocks[ti][(offset + r * d + i, offset + col * d + i)] = cmat[(r, col)];
                    }
                }
            }
            offset += mult * d;
        }
    }
    let u = s.unitary(&cod);
    let j = LinearMap::jordan_embedding(&dom, &cod, &copies, Some(&u), p)?;
    let b0 = Element::from_blocks(&cod, b_blocks)?;
    let b = &(&u * &b0) * &u.adjoint();
    let e = j.apply_unchecked(&Element::identity(&dom));
    let w = if positive_w { e } else { &s.unitary(&cod) * &e };
    Ok(YeadonData { w, b, j })
}

/// Random unital ∗-homomorphisms and anti-homomorphisms of `M_n` conjugated by
/// a unitary: the positive isometries used to exercise the separating route.
pub fn random_jordan_automorphism(s: &mut Sampler, n: usize, transposed: bool, p: f64) -> Result<LinearMap> {
    let alg = AlgebraDescriptor::full(n, 1.0)?;
    let u = s.unitary(&alg);
    let copies = [BlockCopy { source: 0, target: 0, offset: 0, transposed }];
    LinearMap::jordan_embedding(&alg, &alg, &copies, Some(&u), p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn m2() -> crate::Algebra {
        AlgebraDescriptor::full(2, 1.0).unwrap()
    }

    #[test]
    fn transpose_triple() {
        let t = LinearMap::transpose(&m2(), 2.0).unwrap();
        let tr = extract_yeadon(&t, &cfg()).unwrap();
        let one = Element::identity(&m2());
        assert!(tr.w.distance(&one) < 1e-12 && tr.b.distance(&one) < 1e-12);
        assert!(linalg::max_abs(&(tr.j.action() - t.action())) < 1e-12);
        assert!(tr.g.norm_inf() < 1e-12);
        assert!(tr.f.distance(&one) < 1e-12);
        let rep = structural_checks(&tr, &t, &cfg());
        assert!(rep.injective && rep.positive && !rep.two_separating, "{rep:?}");
        assert!(rep.consistent(), "{rep:?}");
    }

    #[test]
    fn rotation_fails_jordan_and_is_falsified() {
        let t = LinearMap::rotation_mixing(core::f64::consts::FRAC_PI_4, 2.0).unwrap();
        let err = extract_yeadon(&t, &cfg()).unwrap_err();
        assert_eq!(err.condition, YtfCondition::Jordan);
        match certify_separating(&t, &cfg()) {
            SeparatingVerdict::Falsified { a, b, defect } => {
                assert!(lp::is_positive(&a, 1e-12) && lp::is_positive(&b, 1e-12));
                assert!((&a * &b).norm_inf() < 1e-12);
                assert!(defect > 0.1);
            }
            v => panic!("expected falsification, got {v:?}"),
        }
    }

    #[test]
    fn jordan_checks() {
        let id = LinearMap::identity(&m2(), 2.0).unwrap();
        assert!(verify_jordan(&id, &cfg()).is_jordan);
        let tr = LinearMap::transpose(&m2(), 2.0).unwrap();
        assert!(verify_jordan(&tr, &cfg()).is_jordan);
        let eps = 1e-5;
        let mut s = Sampler::new(3);
        let noise = LinearMap::new(&m2(), &m2(), s.ginibre_matrix(4, 4), 2.0).unwrap();
        let scale = linalg::max_abs(noise.action());
        let bumped = id.add(&noise.scale(eps / scale)).unwrap();
        let rep = verify_jordan(&bumped, &cfg());
        assert!(!rep.is_jordan);
        assert!(rep.defect > 0.1 * eps && rep.defect < 20.0 * eps, "{}", rep.defect);
    }

    #[test]
    fn central_decompositions() {
        let id = LinearMap::identity(&m2(), 2.0).unwrap();
        let cd = central_decompose(&id, &cfg()).unwrap();
        assert!(cd.g.distance(&Element::identity(&m2())) < 1e-12 && cd.f.norm_inf() < 1e-12);
        let sum = LinearMap::jordan_direct_sum(&m2(), 2.0).unwrap();
        let cd = central_decompose(&sum, &cfg()).unwrap();
        let cod = sum.codomain().clone();
        assert!(cd.g.distance(&Element::block_unit(&cod, 0)) < 1e-12);
        assert!(cd.f.distance(&Element::block_unit(&cod, 1)) < 1e-12);
        // commutative codomain: everything is assigned to g
        let dom = AlgebraDescriptor::diagonal(&[1.0, 1.0]).unwrap();
        let cod = AlgebraDescriptor::diagonal(&[1.0, 2.0, 1.0]).unwrap();
        let copies = [
            BlockCopy { source: 0, target: 0, offset: 0, transposed: false },
            BlockCopy { source: 1, target: 2, offset: 0, transposed: false },
        ];
        let j = LinearMap::jordan_embedding(&dom, &cod, &copies, None, 2.0).unwrap();
        let cd = central_decompose(&j, &cfg()).unwrap();
        let e = j.apply(&Element::identity(&dom)).unwrap();
        assert!(cd.g.distance(&e) < 1e-12 && cd.f.norm_inf() < 1e-12);
    }

    #[test]
    fn mixed_block_inside_one_target() {
        // x ↦ U(x ⊕ xᵗ)U* inside M₄
        let m4 = AlgebraDescriptor::full(4, 1.0).unwrap();
        let mut s = Sampler::new(11);
        let u = s.unitary(&m4);
        let copies = [
            BlockCopy { source: 0, target: 0, offset: 0, transposed: false },
            BlockCopy { source: 0, target: 0, offset: 2, transposed: true },
        ];
        let j = LinearMap::jordan_embedding(&m2(), &m4, &copies, Some(&u), 2.0).unwrap();
        let cd = central_decompose(&j, &cfg()).unwrap();
        assert_eq!(cd.projections.len(), 2);
        assert!((&cd.g * &cd.f).norm_inf() < 1e-10);
        assert!((&cd.g + &cd.f).distance(&Element::identity(&m4)) < 1e-10);
        assert!((cd.g.trace().re - 2.0).abs() < 1e-10);
    }

    #[test]
    fn synthetic_roundtrip() {
        let mut s = Sampler::new(5);
        for round in 0..30 {
            let data = random_yeadon(&mut s, 2 + round % 2, round % 3 == 0, 2.0).unwrap();
            let t = yeadon_synthetic(&data.w, &data.b, &data.j, &cfg()).unwrap();
            let tr = extract_yeadon(&t, &cfg()).unwrap_or_else(|f| panic!("round {round}: {f}"));
            let d = tr.distance(&data.w, &data.b, &data.j);
            assert!(d < 1e-8, "round {round}: distance {d}");
            let cd_ok = (&tr.g * &tr.f).norm_inf() < 1e-9 && (&tr.g + &tr.f).distance(&tr.e()) < 1e-9;
            assert!(cd_ok);
            // soundness: sampled disjoint pairs stay disjoint
            for _ in 0..10 {
                let (a, b) = s.disjoint_pair(t.domain());
                assert!(disjointness_defect(&t, &a, &b) < 1e-9);
            }
        }
    }

    #[test]
    fn synthetic_identity_and_validation() {
        let one = Element::identity(&m2());
        let id = LinearMap::identity(&m2(), 2.0).unwrap();
        let t = yeadon_synthetic(&one, &one, &id, &cfg()).unwrap();
        assert!(linalg::max_abs(&(t.action() - id.action())) < 1e-15);
        let e11 = Element::unit(&m2(), 0, 0, 0).unwrap();
        let err = validate_yeadon_data(&e11, &one, &id, &cfg()).unwrap_err();
        assert_eq!(err.condition, YtfCondition::B);
        let h = Element::from_blocks(&m2(), vec![Mat::from_row_slice(2, 2, &[c(2.0), c(0.0), c(0.0), c(1.0)])]).unwrap();
        let tr = LinearMap::transpose(&m2(), 2.0).unwrap();
        assert_eq!(validate_yeadon_data(&one, &h, &tr, &cfg()).unwrap_err().condition, YtfCondition::C);
        let two = one.scale_real(2.0);
        assert_eq!(validate_yeadon_data(&two, &one, &id, &cfg()).unwrap_err().condition, YtfCondition::A);
        let rot = LinearMap::rotation_mixing(0.3, 2.0).unwrap();
        assert!(yeadon_synthetic(&one, &one, &rot, &cfg()).is_err());
    }

    #[test]
    fn unitary_conjugation_structure() {
        let mut s = Sampler::new(8);
        let u = s.unitary(&m2());
        let t = LinearMap::unitary_conjugation(&u, 2.0).unwrap();
        let SeparatingVerdict::Certified(tr) = certify_separating(&t, &cfg()) else { panic!() };
        let rep = structural_checks(&tr, &t, &cfg());
        assert!(rep.injective && rep.two_separating && rep.consistent(), "{rep:?}");
    }

    #[test]
    fn rank_deficient_synthetic() {
        // J: M₂ ⊕ ℂ → M₂ kills the second block
        let dom = AlgebraDescriptor::new(vec![Block::new(2, 1.0), Block::new(1, 1.0)]).unwrap();
        let copies = [BlockCopy { source: 0, target: 0, offset: 0, transposed: false }];
        let j = LinearMap::jordan_embedding(&dom, &m2(), &copies, None, 2.0).unwrap();
        let one = Element::identity(&m2());
        let t = yeadon_synthetic(&one, &one, &j, &cfg()).unwrap();
        let tr = extract_yeadon(&t, &cfg()).unwrap();
        let rep = structural_checks(&tr, &t, &cfg());
        assert!(!rep.injective && rep.injective_confirmed);
        assert!(t.rank(1e-10) < dom.space_dim());
    }

    #[test]
    fn zero_unit_image_fails() {
        let t = LinearMap::trace_shift(2, 1.0, 2.0).unwrap();
        let err = extract_yeadon(&t, &cfg()).unwrap_err();
        assert_eq!(err.condition, YtfCondition::A);
    }

    #[test]
    fn repeated_runs_never_conflict() {
        let t = LinearMap::rotation_mixing(0.7, 2.0).unwrap();
        for seed in 0..5 {
            let v = certify_separating(&t, &cfg().with_seed(seed));
            assert!(!matches!(v, SeparatingVerdict::Certified(_)));
        }
    }
}
