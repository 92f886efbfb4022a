//! Linear maps `T: L^p(M) → L^p(N)` between finite-dimensional algebras.
//!
//! A map is stored as its action matrix on the block-major, row-major
//! coordinates of the two algebras (see [`AlgebraDescriptor::coord`]).

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

use crate::algebra::{amplify_matrix, matrix_entry, same_algebra, Algebra, AlgebraDescriptor, Element};
use crate::config::ToleranceConfig;
use crate::error::{domain, structural, Error, Result};
use crate::linalg::{self, c, Mat, C64};
use crate::lp::{self, conjugate_exponent, schatten};
use crate::random::Sampler;
use crate::sequence::NormInterval;

/// Properties a constructor guarantees by design.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Provenance {
    pub positive: bool,
    pub two_positive: bool,
    pub completely_positive: bool,
}

impl Provenance {
    pub const NONE: Self = Self { positive: false, two_positive: false, completely_positive: false };
    pub const CP: Self = Self { positive: true, two_positive: true, completely_positive: true };
    pub const POSITIVE: Self = Self { positive: true, two_positive: false, completely_positive: false };

    fn and(self, other: Self) -> Self {
        Self {
            positive: self.positive && other.positive,
            two_positive: self.two_positive && other.two_positive,
            completely_positive: self.completely_positive && other.completely_positive,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LinearMap {
    domain: Algebra,
    codomain: Algebra,
    action: DMatrix<C64>,
    exponent: f64,
    provenance: Provenance,
}

fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        Err(domain!("exponent must lie in [1, ∞], got {p}"))
    } else {
        Ok(())
    }
}

impl LinearMap {
    pub fn new(domain: &Algebra, codomain: &Algebra, action: DMatrix<C64>, exponent: f64) -> Result<Self> {
        check_exponent(exponent)?;
        if action.nrows() != codomain.space_dim() || action.ncols() != domain.space_dim() {
            return Err(structural!(
                "action matrix is {}x{}, expected {}x{}",
                action.nrows(),
                action.ncols(),
                codomain.space_dim(),
                domain.space_dim()
            ));
        }
        if action.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(domain!("action matrix has non-finite entries"));
        }
        Ok(Self { domain: domain.clone(), codomain: codomain.clone(), action, exponent, provenance: Provenance::NONE })
    }

    /// Builds the action matrix by evaluating `f` on the matrix units of the domain.
    pub fn from_fn(
        domain: &Algebra,
        codomain: &Algebra,
        exponent: f64,
        mut f: impl FnMut(&Element) -> Result<Element>,
    ) -> Result<Self> {
        let mut action = DMatrix::zeros(codomain.space_dim(), domain.space_dim());
        for idx in 0..domain.space_dim() {
            let (k, i, j) = domain.coord_position(idx);
            let image = f(&Element::unit(domain, k, i, j)?)?;
            if !same_algebra(image.algebra(), codomain) {
                return Err(Error::DescriptorMismatch);
            }
            action.set_column(idx, &image.coords());
        }
        Self::new(domain, codomain, action, exponent)
    }

    pub fn identity(alg: &Algebra, exponent: f64) -> Result<Self> {
        let n = alg.space_dim();
        Ok(Self::new(alg, alg, DMatrix::identity(n, n), exponent)?.with_provenance(Provenance::CP))
    }

    /// Attaches constructor guarantees. Callers are trusted; the positivity
    /// tests treat provenance as proof.
    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn with_exponent(mut self, exponent: f64) -> Result<Self> {
        check_exponent(exponent)?;
        self.exponent = exponent;
        Ok(self)
    }

    pub fn domain(&self) -> &Algebra {
        &self.domain
    }

    pub fn codomain(&self) -> &Algebra {
        &self.codomain
    }

    pub fn action(&self) -> &DMatrix<C64> {
        &self.action
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn apply(&self, x: &Element) -> Result<Element> {
        if !same_algebra(x.algebra(), &self.domain) {
            return Err(Error::DescriptorMismatch);
        }
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &Element) -> Element {
        let y = &self.action * x.coords();
        Element::from_coords(&self.codomain, &y).expect("action shape is validated")
    }

    /// Image of the matrix unit with coordinate index `idx`.
    pub(crate) fn basis_image(&self, idx: usize) -> Element {
        let col: DVector<C64> = self.action.column(idx).into_owned();
        Element::from_coords(&self.codomain, &col).expect("action shape is validated")
    }

    /// `S ∘ T` where `self = T`.
    pub fn then(&self, s: &LinearMap) -> Result<Self> {
        if !same_algebra(&self.codomain, &s.domain) {
            return Err(Error::DescriptorMismatch);
        }
        let mut out = Self::new(&self.domain, &s.codomain, &s.action * &self.action, self.exponent)?;
        out.provenance = self.provenance.and(s.provenance);
        Ok(out)
    }

    pub fn scale(&self, t: f64) -> Self {
        let mut out = self.clone();
        out.action *= c(t);
        if t < 0.0 {
            out.provenance = Provenance::NONE;
        }
        out
    }

    /// `λT + (1−λ)S` for `λ ∈ [0, 1]`; provenance is kept where both agree.
    pub fn convex_combination(&self, s: &LinearMap, lambda: f64) -> Result<Self> {
        if !same_algebra(&self.domain, &s.domain) || !same_algebra(&self.codomain, &s.codomain) {
            return Err(Error::DescriptorMismatch);
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(domain!("convex weight {lambda} outside [0, 1]"));
        }
        let action = &self.action * c(lambda) + &s.action * c(1.0 - lambda);
        Ok(Self::new(&self.domain, &self.codomain, action, self.exponent)?.with_provenance(self.provenance.and(s.provenance)))
    }

    pub fn add(&self, s: &LinearMap) -> Result<Self> {
        if !same_algebra(&self.domain, &s.domain) || !same_algebra(&self.codomain, &s.codomain) {
            return Err(Error::DescriptorMismatch);
        }
        Self::new(&self.domain, &self.codomain, &self.action + &s.action, self.exponent)
    }

    /// The Banach adjoint `T*: L^{p'}(N) → L^{p'}(M)` for the pairing
    /// `τ_N(T(x) y) = τ_M(x T*(y))`.
    pub fn adjoint_map(&self, p: f64) -> Result<Self> {
        check_exponent(p)?;
        let (m, n) = (&self.domain, &self.codomain);
        let mut adj = DMatrix::zeros(m.space_dim(), n.space_dim());
        for row in 0..m.space_dim() {
            let (k, i, j) = m.coord_position(row);
            let src = m.coord(k, j, i);
            let wk = m.blocks()[k].weight;
            for col in 0..n.space_dim() {
                let (l, r, s) = n.coord_position(col);
                let wl = n.blocks()[l].weight;
                adj[(row, col)] = self.action[(n.coord(l, s, r), src)] * (wl / wk);
            }
        }
        let mut out = Self::new(n, m, adj, conjugate_exponent(p))?;
        out.provenance = self.provenance;
        Ok(out)
    }

    /// Rank of the action matrix with a relative cutoff.
    pub fn rank(&self, cutoff: f64) -> usize {
        let sv = linalg::singular_values(&self.action);
        let top = sv.first().copied().unwrap_or(0.0);
        sv.iter().filter(|&&s| s > cutoff * top && s > 0.0).count()
    }

    /// `‖Tx‖_p / ‖x‖_p`, or 0 for `x = 0`.
    pub fn ratio(&self, x: &Element, p: f64) -> f64 {
        let nx = schatten(x, p);
        if nx == 0.0 {
            0.0
        } else {
            schatten(&self.apply_unchecked(x), p) / nx
        }
    }

    /// Whether `T(x*) = T(x)*` on the matrix units.
    pub fn is_hermitian_preserving(&self, tol: f64) -> bool {
        let scale = linalg::max_abs(&self.action).max(f64::MIN_POSITIVE);
        (0..self.domain.space_dim()).all(|idx| {
            let (k, i, j) = self.domain.coord_position(idx);
            let a = self.basis_image(idx);
            let b = self.basis_image(self.domain.coord(k, j, i));
            (&a.adjoint() - &b).max_abs() <= tol * scale
        })
    }
}

/// `I_{S_n} ⊗ T` acting entrywise on `M_n(domain)`.
pub fn amplified_map(t: &LinearMap, n: usize) -> Result<LinearMap> {
    let dom = t.domain.amplify(n)?;
    let cod = t.codomain.amplify(n)?;
    let base = t.domain.clone();
    let mut out = LinearMap::from_fn(&dom, &cod, t.exponent, |x| {
        let mut rows = Vec::with_capacity(n);
        for r in 0..n {
            let mut row = Vec::with_capacity(n);
            for col in 0..n {
                row.push(t.apply_unchecked(&matrix_entry(x, &base, n, r, col)?));
            }
            rows.push(row);
        }
        amplify_matrix(&cod, &rows)
    })?;
    out.provenance = if n == 1 {
        t.provenance
    } else if n == 2 {
        Provenance {
            positive: t.provenance.two_positive,
            two_positive: t.provenance.completely_positive,
            completely_positive: t.provenance.completely_positive,
        }
    } else {
        Provenance {
            positive: t.provenance.completely_positive,
            two_positive: t.provenance.completely_positive,
            completely_positive: t.provenance.completely_positive,
        }
    };
    Ok(out)
}

/// Operator norm `‖T: L^p(M) → L^p(N)‖`.
///
/// Exact at `p = 2`. Elsewhere the lower endpoint comes from a nonlinear
/// power method and the upper endpoint is the best of several certified
/// bounds (norm equivalence, Riesz-Thorin interpolation with exact or
/// bounded endpoint norms, exact formulas for commutative sides).
pub fn op_norm(t: &LinearMap, p: f64, cfg: &ToleranceConfig) -> Result<NormInterval> {
    check_exponent(p)?;
    cfg.validate()?;
    let two = two_norm(t);
    if p == 2.0 {
        return Ok(NormInterval::exact(two));
    }
    if two == 0.0 {
        return Ok(NormInterval::exact(0.0));
    }
    let lower = power_method(t, p, cfg).0;
    let upper = norm_upper_bound(t, p, two);
    Ok(NormInterval::bounded(lower, upper.max(lower), cfg.opt_tol))
}

/// `σ_max(D_N^{1/2} A D_M^{-1/2})` with the trace weights on the diagonal.
pub(crate) fn two_norm(t: &LinearMap) -> f64 {
    let mut a = t.action.clone();
    for r in 0..a.nrows() {
        let w = t.codomain.coord_weight(r).sqrt();
        a.row_mut(r).scale_mut(w);
    }
    for col in 0..a.ncols() {
        let w = t.domain.coord_weight(col).sqrt();
        a.column_mut(col).unscale_mut(w);
    }
    // the top singular value from the Gram matrix is accurate to machine precision
    let gram = a.adjoint() * &a;
    linalg::herm_eig(&gram).0.last().map_or(0.0, |&l| l.max(0.0).sqrt())
}

/// Best ratio `‖Tx‖_p / ‖x‖_p` found by the nonlinear power method, with its input.
pub(crate) fn power_method(t: &LinearMap, p: f64, cfg: &ToleranceConfig) -> (f64, Element) {
    let adj = t.adjoint_map(p).expect("valid exponent");
    let pp = conjugate_exponent(p);
    let mut starts: Vec<Element> = vec![Element::identity(&t.domain)];
    let n = t.domain.space_dim();
    // columns with the largest images
    let mut cols: Vec<(usize, f64)> = (0..n).map(|i| (i, t.action.column(i).norm())).collect();
    cols.sort_by(|a, b| b.1.total_cmp(&a.1));
    for &(idx, _) in cols.iter().take(4) {
        let (k, i, j) = t.domain.coord_position(idx);
        starts.push(Element::unit(&t.domain, k, i, j).expect("coordinate in range"));
    }
    let mut sampler = Sampler::new(cfg.derived_seed(0x6f70));
    for _ in 0..(2 * cfg.restarts) {
        starts.push(sampler.ginibre(&t.domain));
        starts.push(sampler.rank_one_positive(&t.domain));
    }
    let mut best = (0.0f64, Element::identity(&t.domain));
    for start in starts {
        let mut x = start;
        let mut value = t.ratio(&x, p);
        for _ in 0..200 {
            let y = t.apply_unchecked(&x);
            if y.norm_inf() == 0.0 {
                break;
            }
            let z = lp::norming_dual_unchecked(&y, p, cfg.rank_cutoff);
            let g = adj.apply_unchecked(&z);
            let next = lp::norming_dual_unchecked(&g, pp, cfg.rank_cutoff);
            let v = t.ratio(&next, p);
            if v <= value * (1.0 + 1e-13) {
                if v > value {
                    value = v;
                    x = next;
                }
                break;
            }
            value = v;
            x = next;
        }
        if value > best.0 {
            best = (value, x);
        }
    }
    best
}

/// `c` with `‖x‖_b ≤ c ‖x‖_a` on the algebra.
fn equivalence_constant(alg: &AlgebraDescriptor, a: f64, b: f64) -> f64 {
    let inv = |p: f64| if p.is_infinite() { 0.0 } else { 1.0 / p };
    let e = inv(b) - inv(a);
    if e >= 0.0 {
        // smaller exponent on the left: Hölder with τ(1)
        alg.unit_trace().powf(e)
    } else {
        alg.min_weight().powf(e)
    }
}

fn interpolate(a_norm: f64, a: f64, b_norm: f64, b: f64, p: f64) -> f64 {
    // 1/p = (1−θ)/a + θ/b
    let inv = |x: f64| if x.is_infinite() { 0.0 } else { 1.0 / x };
    let theta = (inv(p) - inv(a)) / (inv(b) - inv(a));
    if !(0.0..=1.0).contains(&theta) {
        return f64::INFINITY;
    }
    a_norm.powf(1.0 - theta) * b_norm.powf(theta)
}

/// Certified upper bounds for `‖T‖_{1→1}` and `‖T‖_{∞→∞}`.
fn endpoint_bounds(t: &LinearMap, two: f64) -> (f64, f64) {
    let (m, n) = (&t.domain, &t.codomain);
    let mut one = equivalence_constant(m, 1.0, 2.0) * two * equivalence_constant(n, 2.0, 1.0);
    let mut inf = equivalence_constant(m, f64::INFINITY, 2.0) * two * equivalence_constant(n, 2.0, f64::INFINITY);
    if m.is_commutative() {
        // extreme points of the unit ball of L^1 are e_i / w_i
        let exact = (0..m.space_dim())
            .map(|i| schatten(&t.basis_image(i), 1.0) / m.blocks()[i].weight)
            .fold(0.0, f64::max);
        one = one.min(exact);
    }
    if n.is_commutative() {
        // coordinate functionals of the output are τ(x T*(e_j)) / w_j
        let adj = t.adjoint_map(2.0).expect("valid exponent");
        let exact = (0..n.space_dim())
            .map(|j| schatten(&adj.basis_image(j), 1.0) / n.blocks()[j].weight)
            .fold(0.0, f64::max);
        inf = inf.min(exact);
    }
    if t.provenance.positive {
        // Russo-Dye: a positive map attains its norm at the unit
        let unit_n = Element::identity(n);
        let unit_m = Element::identity(m);
        inf = inf.min(t.apply_unchecked(&unit_m).norm_inf());
        let adj = t.adjoint_map(1.0).expect("valid exponent");
        one = one.min(adj.apply_unchecked(&unit_n).norm_inf());
    }
    (one, inf)
}

fn norm_upper_bound(t: &LinearMap, p: f64, two: f64) -> f64 {
    let (m, n) = (&t.domain, &t.codomain);
    let direct = equivalence_constant(m, p, 2.0) * two * equivalence_constant(n, 2.0, p);
    let (one, inf) = endpoint_bounds(t, two);
    let mut best = direct;
    if p == 1.0 {
        best = best.min(one);
    } else if p.is_infinite() {
        best = best.min(inf);
    } else {
        best = best.min(interpolate(one, 1.0, inf, f64::INFINITY, p));
        if p < 2.0 {
            best = best.min(interpolate(one, 1.0, two, 2.0, p));
        } else {
            best = best.min(interpolate(two, 2.0, inf, f64::INFINITY, p));
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PositivityLevel {
    Positive,
    TwoPositive,
    CompletelyPositive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificationMethod {
    /// Choi matrices of all block pairs are positive semidefinite.
    Choi,
    /// Guaranteed by the constructor.
    Provenance,
    /// Exact check of the images of minimal projections of a commutative domain.
    CommutativeDomain,
}

/// A positive input of `I_{S_order} ⊗ T` whose image fails to be positive.
#[derive(Debug, Clone)]
pub struct PositivityWitness {
    pub order: usize,
    pub input: Element,
    /// Most negative eigenvalue of the image (or minus the size of its
    /// anti-Hermitian part when the image is not self-adjoint).
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone)]
pub enum PositivityVerdict {
    Certified(CertificationMethod),
    Falsified(PositivityWitness),
    Undetermined { samples: usize },
}

impl PositivityVerdict {
    pub fn is_certified(&self) -> bool {
        matches!(self, Self::Certified(_))
    }

    pub fn is_falsified(&self) -> bool {
        matches!(self, Self::Falsified(_))
    }
}

/// Decides or tests positivity, 2-positivity and complete positivity.
pub fn positivity_tests(t: &LinearMap, level: PositivityLevel, cfg: &ToleranceConfig) -> PositivityVerdict {
    let prov = t.provenance;
    let by_provenance = match level {
        PositivityLevel::Positive => prov.positive,
        PositivityLevel::TwoPositive => prov.two_positive,
        PositivityLevel::CompletelyPositive => prov.completely_positive,
    };
    if by_provenance {
        return PositivityVerdict::Certified(CertificationMethod::Provenance);
    }
    let choi = choi_test(t, cfg.algebraic_tol);
    if choi.is_none() {
        return PositivityVerdict::Certified(CertificationMethod::Choi);
    }
    match level {
        PositivityLevel::CompletelyPositive => PositivityVerdict::Falsified(choi.expect("checked above")),
        PositivityLevel::Positive => {
            if t.domain.is_commutative() {
                return match commutative_domain_test(t, cfg.algebraic_tol) {
                    None => PositivityVerdict::Certified(CertificationMethod::CommutativeDomain),
                    Some(w) => PositivityVerdict::Falsified(w),
                };
            }
            search_negative(t, 1, cfg)
        }
        PositivityLevel::TwoPositive => {
            if let PositivityVerdict::Falsified(w) = positivity_tests(t, PositivityLevel::Positive, cfg) {
                // E₁₁ ⊗ x lifts a witness of non-positivity
                let lifted = lift_witness(t, &w);
                return PositivityVerdict::Falsified(lifted);
            }
            if t.domain.is_commutative() {
                // positive maps on commutative domains are completely positive
                if let Some(w) = choi {
                    return PositivityVerdict::Falsified(w);
                }
            }
            if let Some(w) = choi.filter(|w| w.order <= 2) {
                return PositivityVerdict::Falsified(w);
            }
            let amp = match amplified_map(t, 2) {
                Ok(a) => a,
                Err(_) => return PositivityVerdict::Undetermined { samples: 0 },
            };
            match search_negative(&amp, 2, cfg) {
                PositivityVerdict::Falsified(mut w) => {
                    w.order = 2;
                    PositivityVerdict::Falsified(w)
                }
                other => other,
            }
        }
    }
}

fn lift_witness(t: &LinearMap, w: &PositivityWitness) -> PositivityWitness {
    let big = t.domain.amplify(2).expect("valid order");
    let z = Element::zero(&t.domain);
    let input = amplify_matrix(&big, &[vec![w.input.clone(), z.clone()], vec![z.clone(), z]]).expect("shapes match");
    PositivityWitness { order: 2, input, min_eigenvalue: w.min_eigenvalue }
}

/// Choi matrix `Σ_ij E_ij ⊗ T(E^{(k)}_ij)` restricted to codomain block `l`.
pub fn choi_matrix(t: &LinearMap, k: usize, l: usize) -> Mat {
    let nk = t.domain.blocks()[k].dim;
    let ml = t.codomain.blocks()[l].dim;
    let mut out = Mat::zeros(nk * ml, nk * ml);
    for i in 0..nk {
        for j in 0..nk {
            let img = t.basis_image(t.domain.coord(k, i, j));
            out.view_mut((i * ml, j * ml), (ml, ml)).copy_from(img.block(l));
        }
    }
    out
}

fn choi_scale(t: &LinearMap) -> f64 {
    linalg::frobenius(&t.action).max(f64::MIN_POSITIVE)
}

/// `None` when every Choi block is positive semidefinite.
fn choi_test(t: &LinearMap, tol: f64) -> Option<PositivityWitness> {
    let scale = choi_scale(t);
    let mut worst: Option<(f64, usize)> = None;
    for k in 0..t.domain.block_count() {
        for l in 0..t.codomain.block_count() {
            let cm = choi_matrix(t, k, l);
            let skew = linalg::op_norm(&(&cm - cm.adjoint())) * 0.5;
            let min = if skew > tol * scale { -skew } else { linalg::herm_eig(&cm).0[0] };
            if min < -tol * scale && worst.is_none_or(|(v, _)| min < v) {
                worst = Some((min, k));
            }
        }
    }
    let (min, k) = worst?;
    let nk = t.domain.blocks()[k].dim;
    let big = t.domain.amplify(nk).expect("valid order");
    let rows: Vec<Vec<Element>> = (0..nk)
        .map(|i| (0..nk).map(|j| Element::unit(&t.domain, k, i, j).expect("in range")).collect())
        .collect();
    let input = amplify_matrix(&big, &rows).expect("shapes match");
    Some(PositivityWitness { order: nk, input, min_eigenvalue: min })
}

fn image_defect(y: &Element) -> (f64, Option<(usize, DVector<C64>)>) {
    let skew = (y - &y.adjoint()).norm_inf() * 0.5;
    let mut best = (f64::INFINITY, None);
    for (l, m) in y.blocks().iter().enumerate() {
        let (vals, vecs) = linalg::herm_eig(m);
        if let Some(&v) = vals.first() {
            if v < best.0 {
                best = (v, Some((l, vecs.column(0).into_owned())));
            }
        }
    }
    if skew > best.0.abs().max(1e-300) && skew > 0.0 {
        (-skew, best.1)
    } else {
        best
    }
}

fn commutative_domain_test(t: &LinearMap, tol: f64) -> Option<PositivityWitness> {
    let scale = choi_scale(t);
    let mut worst: Option<(f64, usize)> = None;
    for i in 0..t.domain.space_dim() {
        let (v, _) = image_defect(&t.basis_image(i));
        if v < -tol * scale && worst.is_none_or(|(w, _)| v < w) {
            worst = Some((v, i));
        }
    }
    let (v, i) = worst?;
    let (k, _, _) = t.domain.coord_position(i);
    Some(PositivityWitness { order: 1, input: Element::block_unit(&t.domain, k), min_eigenvalue: v })
}

/// Seesaw search for a rank-one positive `vv*` with `T(vv*)` not positive:
/// alternately pick the most negative eigenvector `ψ` of the image and the
/// `v` minimizing `⟨ψ, T(vv*) ψ⟩`.
fn search_negative(t: &LinearMap, order: usize, cfg: &ToleranceConfig) -> PositivityVerdict {
    let scale = choi_scale(t);
    let threshold = -cfg.algebraic_tol * scale;
    let mut sampler = Sampler::new(cfg.derived_seed(0x7073 + order as u64));
    let dom = t.domain.clone();
    let mut starts: Vec<(usize, DVector<C64>)> = Vec::new();
    for (k, b) in dom.blocks().iter().enumerate() {
        for i in 0..b.dim {
            starts.push((k, linalg::unit_vector(b.dim, i)));
        }
    }
    let budget = 16 * cfg.restarts;
    for _ in 0..budget {
        let k = sampler.index(dom.block_count());
        let v = sampler.ginibre_matrix(dom.blocks()[k].dim, 1).column(0).into_owned();
        starts.push((k, v));
    }
    let samples = starts.len();
    let mut worst: Option<(f64, Element)> = None;
    for (k, v0) in starts {
        let mut v = v0.normalize();
        let mut best_here = f64::INFINITY;
        for _ in 0..50 {
            let x = rank_one(&dom, k, &v);
            let y = t.apply_unchecked(&x);
            let (val, vec) = image_defect(&y);
            if worst.as_ref().is_none_or(|(w, _)| val < *w) {
                worst = Some((val, x));
            }
            if val >= best_here * (1.0 - 1e-12) && best_here.is_finite() {
                break;
            }
            best_here = best_here.min(val);
            let Some((l, psi)) = vec else { break };
            // q_ij = ψ* T(E_ij)_l ψ ; minimize conj(v)ᵀ-form through the Hermitian part
            let n = dom.blocks()[k].dim;
            let q = Mat::from_fn(n, n, |i, j| {
                let img = t.basis_image(dom.coord(k, i, j));
                (psi.adjoint() * img.block(l) * &psi)[(0, 0)]
            });
            let (_, vecs) = linalg::herm_eig(&q);
            v = vecs.column(0).map(|z| z.conj());
        }
    }
    match worst {
        Some((val, input)) if val < threshold => {
            PositivityVerdict::Falsified(PositivityWitness { order, input, min_eigenvalue: val })
        }
        _ => PositivityVerdict::Undetermined { samples },
    }
}

fn rank_one(alg: &Algebra, k: usize, v: &DVector<C64>) -> Element {
    let mut x = Element::zero(alg);
    x.blocks_mut()[k] = v * v.adjoint();
    x
}

/// One copy of a domain block placed on the diagonal of a codomain block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockCopy {
    pub source: usize,
    pub target: usize,
    pub offset: usize,
    pub transposed: bool,
}

impl LinearMap {
    /// Blockwise transposition `x ↦ xᵗ`.
    pub fn transpose(alg: &Algebra, p: f64) -> Result<Self> {
        let copies: Vec<BlockCopy> = (0..alg.block_count())
            .map(|k| BlockCopy { source: k, target: k, offset: 0, transposed: true })
            .collect();
        Self::jordan_embedding(alg, alg, &copies, None, p)
    }

    /// Jordan ∗-homomorphism `x ↦ U (⊕ copies of x_k or x_kᵗ) U*`.
    ///
    /// `unitary`, when given, is an element of the codomain conjugating the result.
    pub fn jordan_embedding(
        domain: &Algebra,
        codomain: &Algebra,
        copies: &[BlockCopy],
        unitary: Option<&Element>,
        p: f64,
    ) -> Result<Self> {
        let mut used: Vec<Vec<bool>> = codomain.blocks().iter().map(|b| vec![false; b.dim]).collect();
        for (idx, cp) in copies.iter().enumerate() {
            let src = domain
                .blocks()
                .get(cp.source)
                .ok_or_else(|| structural!("copy {idx}: source block {} out of range", cp.source))?;
            let tgt = codomain
                .blocks()
                .get(cp.target)
                .ok_or_else(|| structural!("copy {idx}: target block {} out of range", cp.target))?;
            if cp.offset + src.dim > tgt.dim {
                return Err(structural!("copy {idx} does not fit in target block {}", cp.target));
            }
            for slot in &mut used[cp.target][cp.offset..cp.offset + src.dim] {
                if core::mem::replace(slot, true) {
                    return Err(structural!("copy {idx} overlaps another copy in block {}", cp.target));
                }
            }
        }
        if let Some(u) = unitary {
            if !same_algebra(u.algebra(), codomain) {
                return Err(Error::DescriptorMismatch);
            }
            let uu = &u.adjoint() * u;
            if uu.distance(&Element::identity(codomain)) > 1e-9 {
                return Err(domain!("conjugating element is not unitary"));
            }
        }
        let map = Self::from_fn(domain, codomain, p, |x| {
            let mut y = Element::zero(codomain);
            for cp in copies {
                let xb = if cp.transposed { x.block(cp.source).transpose() } else { x.block(cp.source).clone() };
                let d = xb.nrows();
                y.blocks_mut()[cp.target].view_mut((cp.offset, cp.offset), (d, d)).copy_from(&xb);
            }
            Ok(match unitary {
                Some(u) => &(u * &y) * &u.adjoint(),
                None => y,
            })
        })?;
        let twisted = copies.iter().any(|cp| cp.transposed && domain.blocks()[cp.source].dim > 1);
        let prov = if twisted { Provenance::POSITIVE } else { Provenance::CP };
        Ok(map.with_provenance(prov))
    }

    /// Unital ∗-homomorphism embedding each block once, in order.
    pub fn star_homomorphism(domain: &Algebra, codomain: &Algebra, targets: &[(usize, usize)], p: f64) -> Result<Self> {
        Self::jordan_embedding(domain, codomain, &Self::copies(targets, false)?, None, p)
    }

    /// Anti-∗-homomorphism `x ↦ xᵗ` placed like [`LinearMap::star_homomorphism`].
    pub fn anti_star_homomorphism(domain: &Algebra, codomain: &Algebra, targets: &[(usize, usize)], p: f64) -> Result<Self> {
        Self::jordan_embedding(domain, codomain, &Self::copies(targets, true)?, None, p)
    }

    fn copies(targets: &[(usize, usize)], transposed: bool) -> Result<Vec<BlockCopy>> {
        Ok(targets
            .iter()
            .enumerate()
            .map(|(source, &(target, offset))| BlockCopy { source, target, offset, transposed })
            .collect())
    }

    /// `x ↦ x ⊕ xᵗ` from a single-block algebra into two copies of it.
    pub fn jordan_direct_sum(alg: &Algebra, p: f64) -> Result<Self> {
        if alg.block_count() != 1 {
            return Err(structural!("jordan_direct_sum expects a single full block"));
        }
        let b = alg.blocks()[0];
        let cod = AlgebraDescriptor::new(vec![b, b])?;
        let copies = [
            BlockCopy { source: 0, target: 0, offset: 0, transposed: false },
            BlockCopy { source: 0, target: 1, offset: 0, transposed: true },
        ];
        Self::jordan_embedding(alg, &cod, &copies, None, p)
    }

    /// A map between commutative algebras given by its matrix.
    pub fn commutative_matrix(domain_weights: &[f64], codomain_weights: &[f64], entries: &DMatrix<f64>, p: f64) -> Result<Self> {
        let dom = AlgebraDescriptor::diagonal(domain_weights)?;
        let cod = AlgebraDescriptor::diagonal(codomain_weights)?;
        let action = entries.map(c);
        let positive = entries.iter().all(|&v| v >= 0.0);
        let map = Self::new(&dom, &cod, action, p)?;
        Ok(if positive { map.with_provenance(Provenance::CP) } else { map })
    }

    /// `x ↦ u x u*`.
    pub fn unitary_conjugation(u: &Element, p: f64) -> Result<Self> {
        let alg = u.algebra().clone();
        if (&u.adjoint() * u).distance(&Element::identity(&alg)) > 1e-9 {
            return Err(domain!("conjugating element is not unitary"));
        }
        Ok(Self::from_fn(&alg, &alg, p, |x| Ok(&(u * x) * &u.adjoint()))?.with_provenance(Provenance::CP))
    }

    /// Rotation by `θ` of the `E₁₁`, `E₁₂` coordinates of `L²(M₂)`; the other
    /// matrix units are fixed. A unitary of the Hilbert space that is not
    /// separating for `θ ∉ πℤ/2`.
    pub fn rotation_mixing(theta: f64, p: f64) -> Result<Self> {
        let alg = AlgebraDescriptor::full(2, 1.0)?;
        let (cs, sn) = (theta.cos(), theta.sin());
        let mut a = DMatrix::identity(4, 4);
        let (e11, e12) = (alg.coord(0, 0, 0), alg.coord(0, 0, 1));
        a[(e11, e11)] = c(cs);
        a[(e12, e11)] = c(sn);
        a[(e11, e12)] = c(-sn);
        a[(e12, e12)] = c(cs);
        Self::new(&alg, &alg, a, p)
    }

    /// `x ↦ (1−λ)x + λ τ(x)/τ(1) · 1`, a unital trace-preserving CP map for `λ ∈ [0, 1]`.
    pub fn depolarizing(alg: &Algebra, lambda: f64, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(domain!("depolarizing parameter {lambda} outside [0, 1]"));
        }
        let t1 = alg.unit_trace();
        let one = Element::identity(alg);
        Ok(Self::from_fn(alg, alg, p, |x| Ok(&x.scale_real(1.0 - lambda) + &one.scale(x.trace() * (lambda / t1))))?
            .with_provenance(Provenance::CP))
    }

    /// `x ↦ Σ_i p_i u_i x u_i*` with probabilities `p_i`.
    pub fn mixed_unitary(unitaries: &[Element], probs: &[f64], p: f64) -> Result<Self> {
        if unitaries.is_empty() || unitaries.len() != probs.len() {
            return Err(structural!("need one probability per unitary"));
        }
        if probs.iter().any(|&q| q < 0.0) || (probs.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(domain!("probabilities must be nonnegative and sum to 1"));
        }
        let mut acc: Option<LinearMap> = None;
        for (u, &q) in unitaries.iter().zip(probs) {
            let m = Self::unitary_conjugation(u, p)?.scale(q);
            acc = Some(match acc {
                None => m,
                Some(a) => a.add(&m)?,
            });
        }
        Ok(acc.expect("non-empty").with_provenance(Provenance::CP))
    }

    /// `x ↦ Σ K x_k K*` summed over Kraus operators `(k, l, K)` mapping domain
    /// block `k` into codomain block `l`.
    pub fn kraus(domain: &Algebra, codomain: &Algebra, ops: &[(usize, usize, Mat)], p: f64) -> Result<Self> {
        for (idx, (k, l, m)) in ops.iter().enumerate() {
            let (Some(bk), Some(bl)) = (domain.blocks().get(*k), codomain.blocks().get(*l)) else {
                return Err(structural!("Kraus operator {idx} refers to a missing block"));
            };
            if m.nrows() != bl.dim || m.ncols() != bk.dim {
                return Err(structural!("Kraus operator {idx} has shape {}x{}, expected {}x{}", m.nrows(), m.ncols(), bl.dim, bk.dim));
            }
        }
        Ok(Self::from_fn(domain, codomain, p, |x| {
            let mut y = Element::zero(codomain);
            for (k, l, m) in ops {
                let add = m * x.block(*k) * m.adjoint();
                y.blocks_mut()[*l] += add;
            }
            Ok(y)
        })?
        .with_provenance(Provenance::CP))
    }

    /// `x ↦ Tr(x)·1 − x` on `M_n`: positive but not 2-positive for `n ≥ 2`.
    pub fn reduction(n: usize, p: f64) -> Result<Self> {
        let alg = AlgebraDescriptor::full(n, 1.0)?;
        let one = Element::identity(&alg);
        let map = Self::from_fn(&alg, &alg, p, |x| Ok(&one.scale(x.block(0).trace()) - x))?;
        Ok(map.with_provenance(if n == 1 { Provenance::CP } else { Provenance::POSITIVE }))
    }

    /// `x ↦ x − s · Tr(x)·1/n` on `M_n`.
    pub fn trace_shift(n: usize, s: f64, p: f64) -> Result<Self> {
        let alg = AlgebraDescriptor::full(n, 1.0)?;
        let one = Element::identity(&alg);
        Self::from_fn(&alg, &alg, p, |x| Ok(x - &one.scale(x.block(0).trace() * (s / n as f64))))
    }

    /// Human-readable summary used in diagnostics.
    pub fn describe(&self) -> String {
        alloc::format!(
            "map {:?} -> {:?} at p = {}",
            self.domain.blocks().iter().map(|b| b.dim).collect::<Vec<_>>(),
            self.codomain.blocks().iter().map(|b| b.dim).collect::<Vec<_>>(),
            self.exponent
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Block;
    use crate::lp::duality_pair;

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn random_map(s: &mut Sampler, dom: &Algebra, cod: &Algebra) -> LinearMap {
        let a = s.ginibre_matrix(cod.space_dim(), dom.space_dim());
        LinearMap::new(dom, cod, a, 2.0).unwrap()
    }

    #[test]
    fn identity_applies_as_identity() {
        let alg = AlgebraDescriptor::new(vec![Block::new(2, 1.0), Block::new(1, 3.0)]).unwrap();
        let x = Sampler::new(1).ginibre(&alg);
        let id = LinearMap::identity(&alg, 2.0).unwrap();
        assert!(id.apply(&x).unwrap().distance(&x) < 1e-15);
        for p in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
            let n = op_norm(&id, p, &cfg()).unwrap();
            assert!((n.lower - 1.0).abs() < 1e-9 && (n.upper - 1.0).abs() < 1e-9, "p={p} {n:?}");
        }
        let other = Element::identity(&AlgebraDescriptor::full(3, 1.0).unwrap());
        assert_eq!(id.apply(&other).unwrap_err(), Error::DescriptorMismatch);
    }

    #[test]
    fn adjoint_pairing_identity() {
        let dom = AlgebraDescriptor::new(vec![Block::new(2, 0.5), Block::new(3, 2.0)]).unwrap();
        let cod = AlgebraDescriptor::new(vec![Block::new(3, 1.5), Block::new(1, 0.25)]).unwrap();
        let mut s = Sampler::new(2);
        for _ in 0..10 {
            let t = random_map(&mut s, &dom, &cod);
            let adj = t.adjoint_map(3.0).unwrap();
            assert_eq!(adj.exponent(), 1.5);
            for _ in 0..5 {
                let x = s.ginibre(&dom);
                let y = s.ginibre(&cod);
                let lhs = duality_pair(&t.apply(&x).unwrap(), &y).unwrap();
                let rhs = duality_pair(&x, &adj.apply(&y).unwrap()).unwrap();
                assert!((lhs - rhs).norm() < 1e-10 * (1.0 + lhs.norm()));
            }
            let back = adj.adjoint_map(1.5).unwrap();
            assert!(linalg::frobenius(&(back.action() - t.action())) < 1e-12);
        }
    }

    #[test]
    fn two_norms() {
        let alg = AlgebraDescriptor::full(3, 1.0).unwrap();
        let tr = LinearMap::transpose(&alg, 2.0).unwrap();
        assert!((op_norm(&tr, 2.0, &cfg()).unwrap().upper - 1.0).abs() < 1e-12);
        let id = LinearMap::identity(&alg, 2.0).unwrap().scale(2.0);
        let n = op_norm(&id, 2.0, &cfg()).unwrap();
        assert!((n.lower - 2.0).abs() < 1e-12 && n.certified_exact);
        // p = 2 against a sampling oracle with weights
        let dom = AlgebraDescriptor::new(vec![Block::new(2, 0.3), Block::new(1, 2.0)]).unwrap();
        let mut s = Sampler::new(3);
        let t = random_map(&mut s, &dom, &alg);
        let exact = two_norm(&t);
        for _ in 0..200 {
            assert!(t.ratio(&s.ginibre(&dom), 2.0) <= exact * (1.0 + 1e-12));
        }
    }

    #[test]
    fn op_norm_intervals_are_sound() {
        let dom = AlgebraDescriptor::new(vec![Block::new(2, 1.0), Block::new(1, 0.5)]).unwrap();
        let cod = AlgebraDescriptor::full(2, 2.0).unwrap();
        let mut s = Sampler::new(4);
        for _ in 0..5 {
            let t = random_map(&mut s, &dom, &cod);
            for p in [1.0, 1.5, 3.0, f64::INFINITY] {
                let iv = op_norm(&t, p, &cfg()).unwrap();
                assert!(iv.lower <= iv.upper * (1.0 + 1e-12));
                for _ in 0..50 {
                    assert!(t.ratio(&s.ginibre(&dom), p) <= iv.upper * (1.0 + 1e-9));
                }
            }
        }
    }

    #[test]
    fn commutative_domain_at_p_one_is_exact() {
        let mut s = Sampler::new(5);
        let dom = AlgebraDescriptor::diagonal(&[0.5, 1.0, 2.0]).unwrap();
        let cod = AlgebraDescriptor::full(2, 1.0).unwrap();
        for _ in 0..5 {
            let t = random_map(&mut s, &dom, &cod);
            let iv = op_norm(&t, 1.0, &cfg()).unwrap();
            assert!(iv.certified_exact, "{iv:?}");
        }
    }

    #[test]
    fn positive_maps_use_interpolation() {
        let alg = AlgebraDescriptor::full(3, 1.0).unwrap();
        let dep = LinearMap::depolarizing(&alg, 0.3, 3.0).unwrap();
        for p in [1.0, 1.5, 3.0, f64::INFINITY] {
            let iv = op_norm(&dep, p, &cfg()).unwrap();
            assert!((iv.upper - 1.0).abs() < 1e-9 && iv.certified_exact, "p={p} {iv:?}");
        }
    }

    #[test]
    fn transpose_and_basic_constructors() {
        let alg = AlgebraDescriptor::full(2, 1.0).unwrap();
        let tr = LinearMap::transpose(&alg, 2.0).unwrap();
        let e12 = Element::unit(&alg, 0, 0, 1).unwrap();
        assert!(tr.apply(&e12).unwrap().distance(&Element::unit(&alg, 0, 1, 0).unwrap()) == 0.0);
        let id = LinearMap::identity(&alg, 2.0).unwrap();
        let back = id.adjoint_map(2.0).unwrap().adjoint_map(2.0).unwrap();
        assert_eq!(back.action(), id.action());
    }

    #[test]
    fn rotation_images_are_not_disjoint() {
        let t = LinearMap::rotation_mixing(core::f64::consts::FRAC_PI_4, 2.0).unwrap();
        let alg = t.domain().clone();
        let a = t.apply(&Element::unit(&alg, 0, 0, 0).unwrap()).unwrap();
        let b = t.apply(&Element::unit(&alg, 0, 1, 1).unwrap()).unwrap();
        assert!(!lp::disjoint(&a, &b, 1e-9).unwrap());
        // it is a unitary of L²(M₂)
        assert!((two_norm(&t) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn amplification() {
        let alg = AlgebraDescriptor::full(2, 1.0).unwrap();
        let mut s = Sampler::new(6);
        let id2 = amplified_map(&LinearMap::identity(&alg, 2.0).unwrap(), 2).unwrap();
        let n = id2.action().nrows();
        assert_eq!(id2.action(), &DMatrix::identity(n, n));
        let t = random_map(&mut s, &alg, &alg);
        let amp = amplified_map(&t, 2).unwrap();
        let big = alg.amplify(2).unwrap();
        let x = s.ginibre(&alg);
        let z = Element::zero(&alg);
        let input = amplify_matrix(&big, &[vec![x.clone(), z.clone()], vec![z.clone(), z.clone()]]).unwrap();
        let out = amp.apply(&input).unwrap();
        assert!(matrix_entry(&out, &alg, 2, 0, 0).unwrap().distance(&t.apply(&x).unwrap()) < 1e-14);
        assert!(matrix_entry(&out, &alg, 2, 1, 1).unwrap().norm_inf() < 1e-14);
        // amplified transpose is the partial transpose
        let tr = LinearMap::transpose(&alg, 2.0).unwrap();
        let amp = amplified_map(&tr, 2).unwrap();
        for _ in 0..10 {
            let y = s.ginibre(&big);
            let img = amp.apply(&y).unwrap();
            for r in 0..2 {
                for col in 0..2 {
                    let want = matrix_entry(&y, &alg, 2, r, col).unwrap().transpose();
                    assert!(matrix_entry(&img, &alg, 2, r, col).unwrap().distance(&want) < 1e-14);
                }
            }
        }
    }

    #[test]
    fn transpose_positivity_hierarchy() {
        let alg = AlgebraDescriptor::full(2, 1.0).unwrap();
        let tr = LinearMap::transpose(&alg, 2.0).unwrap();
        assert!(positivity_tests(&tr, PositivityLevel::Positive, &cfg()).is_certified());
        let PositivityVerdict::Falsified(w) = positivity_tests(&tr, PositivityLevel::TwoPositive, &cfg()) else {
            panic!("transpose is not 2-positive");
        };
        assert_eq!(w.order, 2);
        assert!(lp::is_positive(&w.input, 1e-9));
        let amp = amplified_map(&tr, 2).unwrap();
        let img = amp.apply(&w.input).unwrap();
        assert!(img.spectrum(1e-9).unwrap().iter().flatten().any(|&l| l < -1e-6));
        assert!(positivity_tests(&tr, PositivityLevel::CompletelyPositive, &cfg()).is_falsified());
        // without provenance the sampled positive test stays undetermined and 2-positivity is still refuted
        let bare = LinearMap::new(&alg, &alg, tr.action().clone(), 2.0).unwrap();
        assert!(matches!(positivity_tests(&bare, PositivityLevel::Positive, &cfg()), PositivityVerdict::Undetermined { .. }));
        assert!(positivity_tests(&bare, PositivityLevel::TwoPositive, &cfg()).is_falsified());
        // brute force over rank-one projections of M₂(M₂) agrees
        let big = alg.amplify(2).unwrap();
        let mut s = Sampler::new(7);
        let mut found = false;
        for _ in 0..2000 {
            let x = s.rank_one_positive(&big);
            if amp.apply(&x).unwrap().spectrum(1e-9).unwrap().iter().flatten().any(|&l| l < -1e-9) {
                found = true;
                break;
            }
        }
        assert!(found);
    }

    #[test]
    fn cp_constructors_are_choi_certified() {
        let alg = AlgebraDescriptor::new(vec![Block::new(2, 1.0), Block::new(3, 0.5)]).unwrap();
        let mut s = Sampler::new(8);
        let u = s.unitary(&alg);
        let maps = [
            LinearMap::unitary_conjugation(&u, 2.0).unwrap(),
            LinearMap::depolarizing(&alg, 0.4, 2.0).unwrap(),
            LinearMap::mixed_unitary(&[u.clone(), s.unitary(&alg)], &[0.3, 0.7], 2.0).unwrap(),
        ];
        for m in maps {
            let bare = LinearMap::new(m.domain(), m.codomain(), m.action().clone(), 2.0).unwrap();
            for level in [PositivityLevel::Positive, PositivityLevel::TwoPositive, PositivityLevel::CompletelyPositive] {
                assert!(matches!(positivity_tests(&bare, level, &cfg()), PositivityVerdict::Certified(CertificationMethod::Choi)));
                assert!(positivity_tests(&m, level, &cfg()).is_certified());
            }
        }
    }

    #[test]
    fn trace_shift_is_not_positive() {
        let t = LinearMap::trace_shift(3, 2.0, 2.0).unwrap();
        let PositivityVerdict::Falsified(w) = positivity_tests(&t, PositivityLevel::Positive, &cfg()) else {
            panic!("expected a witness");
        };
        assert_eq!(w.order, 1);
        let img = t.apply(&w.input).unwrap();
        assert!(img.spectrum(1e-9).unwrap()[0][0] < 0.0);
        // E₁₁ is already a witness
        let e11 = Element::unit(t.domain(), 0, 0, 0).unwrap();
        assert!(t.apply(&e11).unwrap().spectrum(1e-9).unwrap()[0][0] < 0.0);
    }

    #[test]
    fn reduction_map_is_positive_not_two_positive() {
        for n in [2usize, 3] {
            let r = LinearMap::reduction(n, 2.0).unwrap();
            let bare = LinearMap::new(r.domain(), r.codomain(), r.action().clone(), 2.0).unwrap();
            assert!(!positivity_tests(&bare, PositivityLevel::Positive, &cfg()).is_falsified());
            assert!(positivity_tests(&r, PositivityLevel::TwoPositive, &cfg()).is_falsified());
        }
    }

    #[test]
    fn amplified_two_positivity_matches() {
        let alg = AlgebraDescriptor::full(2, 1.0).unwrap();
        let mut s = Sampler::new(9);
        let maps = [
            LinearMap::transpose(&alg, 2.0).unwrap(),
            LinearMap::reduction(2, 2.0).unwrap(),
            LinearMap::depolarizing(&alg, 0.5, 2.0).unwrap(),
            LinearMap::unitary_conjugation(&s.unitary(&alg), 2.0).unwrap(),
        ];
        for m in maps {
            let bare = LinearMap::new(m.domain(), m.codomain(), m.action().clone(), 2.0).unwrap();
            let amp = amplified_map(&bare, 2).unwrap();
            let direct = positivity_tests(&bare, PositivityLevel::TwoPositive, &cfg()).is_falsified();
            let via_amp = positivity_tests(&amp, PositivityLevel::Positive, &cfg()).is_falsified();
            assert_eq!(direct, via_amp);
        }
    }

    #[test]
    fn commutative_constructor_and_positivity() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, 1.0, 1.0]);
        let t = LinearMap::commutative_matrix(&[1.0, 1.0], &[1.0, 1.0], &m, 2.0).unwrap();
        assert!(positivity_tests(&t, PositivityLevel::Positive, &cfg()).is_falsified());
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        let t = LinearMap::commutative_matrix(&[1.0, 1.0], &[1.0, 1.0], &m, 2.0).unwrap();
        let bare = LinearMap::new(t.domain(), t.codomain(), t.action().clone(), 2.0).unwrap();
        assert!(positivity_tests(&bare, PositivityLevel::Positive, &cfg()).is_certified());
    }

    #[test]
    fn jordan_embedding_validation() {
        let m2 = AlgebraDescriptor::full(2, 1.0).unwrap();
        let m3 = AlgebraDescriptor::full(3, 1.0).unwrap();
        let bad = [BlockCopy { source: 0, target: 0, offset: 2, transposed: false }];
        assert!(LinearMap::jordan_embedding(&m2, &m3, &bad, None, 2.0).is_err());
        let m4 = AlgebraDescriptor::full(4, 1.0).unwrap();
        let overlap = [
            BlockCopy { source: 0, target: 0, offset: 0, transposed: false },
            BlockCopy { source: 0, target: 0, offset: 1, transposed: true },
        ];
        assert!(LinearMap::jordan_embedding(&m2, &m4, &overlap, None, 2.0).is_err());
        let sum = LinearMap::jordan_direct_sum(&m2, 2.0).unwrap();
        let x = Sampler::new(1).ginibre(&m2);
        let y = sum.apply(&x).unwrap();
        assert!((y.block(1) - x.block(0).transpose()).iter().all(|z| z.norm() < 1e-15));
    }
}
