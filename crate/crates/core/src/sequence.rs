//! Norms of finite sequences in column, row and ℓ¹-valued `L^p` spaces.
//!
//! `‖(x_n)‖_{L^p(ℓ¹)}` is an infimum over factorizations `x_n = a_n b_n` of
//! `‖Σ a_n a_n*‖_p^{1/2} ‖Σ b_n* b_n‖_p^{1/2}`. It is reported as a
//! [`NormInterval`]: the upper endpoint comes from an explicit factorization,
//! the lower endpoint from dual certificates.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::algebra::{same_algebra, Algebra, Element};
use crate::config::ToleranceConfig;
use crate::error::{domain, structural, Error, Result};
use crate::linalg::{self, C64};
use crate::lp::{self, conjugate_exponent, schatten, schatten_psd};
use crate::random::Sampler;

/// A non-empty finite sequence of elements of one algebra.
#[derive(Debug, Clone)]
pub struct ElementSequence {
    alg: Algebra,
    items: Vec<Element>,
}

impl ElementSequence {
    pub fn new(items: Vec<Element>) -> Result<Self> {
        let alg = items
            .first()
            .ok_or_else(|| structural!("a sequence needs at least one element"))?
            .algebra()
            .clone();
        if items.iter().any(|x| !same_algebra(x.algebra(), &alg)) {
            return Err(Error::DescriptorMismatch);
        }
        Ok(Self { alg, items })
    }

    pub fn algebra(&self) -> &Algebra {
        &self.alg
    }

    pub fn items(&self) -> &[Element] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn adjoint(&self) -> Self {
        Self { alg: self.alg.clone(), items: self.items.iter().map(Element::adjoint).collect() }
    }

    pub fn sum(&self) -> Element {
        sum(&self.alg, &self.items)
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { alg: self.alg.clone(), items: self.items.iter().map(|x| x.scale(s)).collect() }
    }

    /// Reorders items: the `i`-th item of the result is `items[order[i]]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.len()];
        if order.len() != self.len() || order.iter().any(|&i| i >= self.len() || core::mem::replace(&mut seen[i], true)) {
            return Err(structural!("not a permutation of 0..{}", self.len()));
        }
        Ok(Self { alg: self.alg.clone(), items: order.iter().map(|&i| self.items[i].clone()).collect() })
    }

    pub fn is_positive(&self, tol: f64) -> bool {
        self.items.iter().all(|x| lp::is_positive(x, tol))
    }
}

fn sum(alg: &Algebra, items: &[Element]) -> Element {
    let mut total = Element::zero(alg);
    for x in items {
        total = &total + x;
    }
    total
}

/// A factorization `x_n ≈ a_n b_n` witnessing an ℓ¹ upper bound.
#[derive(Debug, Clone)]
pub struct Factorization {
    pub a: Vec<Element>,
    pub b: Vec<Element>,
}

impl Factorization {
    /// `‖Σ a_n a_n*‖_p^{1/2}`, the row norm of `(a_n)` in `L^{2p}`.
    pub fn row_factor(&self, p: f64) -> f64 {
        let alg = self.a[0].algebra();
        let s = sum(alg, &self.a.iter().map(|a| a * &a.adjoint()).collect::<Vec<_>>());
        schatten_psd(&s, p).sqrt()
    }

    /// `‖Σ b_n* b_n‖_p^{1/2}`, the column norm of `(b_n)` in `L^{2p}`.
    pub fn column_factor(&self, p: f64) -> f64 {
        let alg = self.b[0].algebra();
        let s = sum(alg, &self.b.iter().map(|b| &b.adjoint() * b).collect::<Vec<_>>());
        schatten_psd(&s, p).sqrt()
    }

    /// The value `row_factor · column_factor` of the factorization.
    pub fn value(&self, p: f64) -> f64 {
        self.row_factor(p) * self.column_factor(p)
    }

    pub fn products(&self) -> Vec<Element> {
        self.a.iter().zip(&self.b).map(|(a, b)| a * b).collect()
    }

    /// `Σ_n ‖x_n − a_n b_n‖_p`.
    pub fn residual(&self, xs: &[Element], p: f64) -> f64 {
        self.products().iter().zip(xs).map(|(ab, x)| schatten(&(ab - x), p)).sum()
    }
}

/// Two-sided bound on a norm.
#[derive(Debug, Clone)]
pub struct NormInterval {
    pub lower: f64,
    pub upper: f64,
    pub certified_exact: bool,
    pub witness: Option<Factorization>,
}

impl NormInterval {
    pub fn exact(value: f64) -> Self {
        Self { lower: value, upper: value, certified_exact: true, witness: None }
    }

    /// Builds an interval and marks it exact when the relative gap is at most `opt_tol`.
    pub fn bounded(lower: f64, upper: f64, opt_tol: f64) -> Self {
        let lower = lower.max(0.0).min(upper);
        Self { lower, upper, certified_exact: upper - lower <= opt_tol * upper, witness: None }
    }

    pub fn with_witness(mut self, witness: Factorization) -> Self {
        self.witness = Some(witness);
        self
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn contains(&self, v: f64, tol: f64) -> bool {
        v >= self.lower - tol && v <= self.upper + tol
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            lower: self.lower * s,
            upper: self.upper * s,
            certified_exact: self.certified_exact,
            witness: self.witness.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Column,
    Row,
}

fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        Err(domain!("exponent must lie in [1, ∞], got {p}"))
    } else {
        Ok(())
    }
}

/// `‖(x_n)‖_{L^p(ℓ²_c)} = ‖Σ x_n* x_n‖_{p/2}^{1/2}` or the row analogue with `x_n x_n*`.
pub fn column_row_norm(seq: &ElementSequence, p: f64, side: Side) -> Result<f64> {
    check_exponent(p)?;
    let squares: Vec<Element> = seq
        .items
        .iter()
        .map(|x| match side {
            Side::Column => &x.adjoint() * x,
            Side::Row => x * &x.adjoint(),
        })
        .collect();
    Ok(schatten_psd(&sum(&seq.alg, &squares), p / 2.0).sqrt())
}

/// `‖Σ x_n‖_p`, the exact ℓ¹ norm of a sequence of positive elements.
pub fn l1_norm_positive(seq: &ElementSequence, p: f64, tol: f64) -> Result<f64> {
    check_exponent(p)?;
    if let Some(i) = seq.items.iter().position(|x| !lp::is_positive(x, tol)) {
        return Err(domain!("item {i} is not positive"));
    }
    Ok(schatten_psd(&seq.sum().hermitian_part(), p))
}

/// Bounds on `‖(x_n)‖_{L^p(ℓ¹)}`.
pub fn l1_norm_bounds(seq: &ElementSequence, p: f64, cfg: &ToleranceConfig) -> Result<NormInterval> {
    l1_norm_bounds_observed(seq, p, cfg, &mut |_| {})
}

/// Summary of one run of the factorization optimizer, for diagnostics.
#[derive(Debug, Clone, Copy, Default)]
pub struct OptimizerTrace {
    pub initial_upper: f64,
    pub final_upper: f64,
    pub iterations: usize,
}

/// [`l1_norm_bounds`] with a callback receiving every factorization the
/// optimizer evaluates (in the caller's scale).
pub fn l1_norm_bounds_observed(
    seq: &ElementSequence,
    p: f64,
    cfg: &ToleranceConfig,
    observer: &mut dyn FnMut(&Factorization),
) -> Result<NormInterval> {
    l1_norm_bounds_traced(seq, p, cfg, observer).map(|(i, _)| i)
}

pub fn l1_norm_bounds_traced(
    seq: &ElementSequence,
    p: f64,
    cfg: &ToleranceConfig,
    observer: &mut dyn FnMut(&Factorization),
) -> Result<(NormInterval, OptimizerTrace)> {
    bounds_impl(seq, p, cfg, observer, true)
}

/// [`l1_norm_bounds_traced`] without the closed form for positive sequences:
/// the optimizer and the dual bound run on every input. Used to test them
/// against the exact positive value.
pub fn l1_norm_bounds_optimizer_only(
    seq: &ElementSequence,
    p: f64,
    cfg: &ToleranceConfig,
    observer: &mut dyn FnMut(&Factorization),
) -> Result<(NormInterval, OptimizerTrace)> {
    bounds_impl(seq, p, cfg, observer, false)
}

fn bounds_impl(
    seq: &ElementSequence,
    p: f64,
    cfg: &ToleranceConfig,
    observer: &mut dyn FnMut(&Factorization),
    shortcut: bool,
) -> Result<(NormInterval, OptimizerTrace)> {
    check_exponent(p)?;
    cfg.validate()?;
    let scale = seq.items.iter().map(Element::norm_inf).fold(0.0, f64::max);
    if scale == 0.0 {
        let zero = Element::zero(&seq.alg);
        let witness = Factorization { a: vec![zero.clone(); seq.len()], b: vec![zero; seq.len()] };
        return Ok((NormInterval::exact(0.0).with_witness(witness), OptimizerTrace::default()));
    }
    if shortcut && seq.is_positive(cfg.algebraic_tol) {
        let value = l1_norm_positive(seq, p, cfg.algebraic_tol)?;
        let roots: Vec<Element> = seq.items.iter().map(Element::sqrt_psd).collect();
        let witness = Factorization { a: roots.clone(), b: roots };
        observer(&witness);
        let trace = OptimizerTrace { initial_upper: value, final_upper: value, iterations: 0 };
        return Ok((NormInterval::exact(value).with_witness(witness), trace));
    }
    let xs: Vec<Element> = seq.items.iter().map(|x| x.scale_real(1.0 / scale)).collect();
    let rescale = scale.sqrt();
    let mut observe = |f: &Factorization| {
        let scaled = Factorization {
            a: f.a.iter().map(|a| a.scale_real(rescale)).collect(),
            b: f.b.iter().map(|b| b.scale_real(rescale)).collect(),
        };
        observer(&scaled);
    };

    let mut lower = xs.iter().map(|x| schatten(x, p)).fold(0.0, f64::max);
    let mut best: Option<Gauge> = None;
    let mut trace = OptimizerTrace::default();
    for restart in 0..cfg.restarts {
        let mut sampler = Sampler::new(cfg.derived_seed(restart as u64));
        let start = if restart == 0 {
            Gauge::polar(&seq.alg, &xs, p, cfg.rank_cutoff)
        } else {
            Gauge::perturbed(&seq.alg, &xs, p, cfg.rank_cutoff, &mut sampler)
        };
        if restart == 0 {
            trace.initial_upper = start.upper() * scale;
        }
        let (g, iters) = minimize(start, &xs, p, cfg, &mut observe);
        trace.iterations += iters;
        lower = lower.max(dual_lower(&xs, p, Some(&g), cfg));
        if best.as_ref().is_none_or(|b| g.upper() < b.upper()) {
            best = Some(g);
        }
        let up = best.as_ref().map_or(f64::INFINITY, Gauge::upper);
        if up - lower <= 1e-3 * cfg.opt_tol * up {
            break;
        }
    }
    let best = best.expect("at least one restart");
    let upper = best.upper();
    if upper - lower > cfg.opt_tol * upper {
        lower = lower.max(sign_lower(&xs, p));
    }
    trace.final_upper = upper * scale;
    let witness = Factorization {
        a: best.fact.a.iter().map(|a| a.scale_real(rescale)).collect(),
        b: best.fact.b.iter().map(|b| b.scale_real(rescale)).collect(),
    };
    let interval = NormInterval::bounded(lower * scale, upper * scale, cfg.opt_tol).with_witness(witness);
    Ok((interval, trace))
}

/// Factorizations parametrized by `H_n = a_n a_n*`, with `a_n = H_n^{1/2}`
/// and `b_n = a_n⁺ x_n`. The map `H ↦ ‖Σ H_n‖_p + ‖Σ x_n* H_n⁺ x_n‖_p` is
/// convex, so descent in `H` does not get trapped.
#[derive(Debug, Clone)]
struct Gauge {
    h: Vec<Element>,
    fact: Factorization,
    row: Element,
    col: Element,
    row_norm: f64,
    col_norm: f64,
    residual: f64,
}

impl Gauge {
    fn build(alg: &Algebra, h: Vec<Element>, xs: &[Element], p: f64, cutoff: f64) -> Self {
        let mut a = Vec::with_capacity(xs.len());
        let mut b = Vec::with_capacity(xs.len());
        for (hn, x) in h.iter().zip(xs) {
            let floor = cutoff * hn.norm_inf();
            let (root, inv_root) = root_pair(hn, floor);
            b.push(&inv_root * x);
            a.push(root);
        }
        let fact = Factorization { a, b };
        let row = sum(alg, &h).hermitian_part();
        let col = sum(alg, &fact.b.iter().map(|b| &b.adjoint() * b).collect::<Vec<_>>()).hermitian_part();
        let row_norm = schatten_psd(&row, p);
        let col_norm = schatten_psd(&col, p);
        let residual = fact.residual(xs, p);
        Self { h, fact, row, col, row_norm, col_norm, residual }
    }

    /// `H_n = |x_n*|`, i.e. `a_n = u_n|x_n|^{1/2}`-type polar factors.
    fn polar(alg: &Algebra, xs: &[Element], p: f64, cutoff: f64) -> Self {
        let h = xs.iter().map(|x| x.adjoint().abs()).collect();
        Self::build(alg, h, xs, p, cutoff)
    }

    fn perturbed(alg: &Algebra, xs: &[Element], p: f64, cutoff: f64, s: &mut Sampler) -> Self {
        let h = xs
            .iter()
            .map(|x| {
                let base = x.adjoint().abs();
                let w = s.wishart(alg);
                let t = 0.5 * base.norm_inf() / w.norm_inf().max(f64::MIN_POSITIVE);
                &base + &w.scale_real(t)
            })
            .collect();
        Self::build(alg, h, xs, p, cutoff)
    }

    fn value(&self) -> f64 {
        (self.row_norm * self.col_norm).sqrt()
    }

    fn upper(&self) -> f64 {
        self.value() + self.residual
    }

    /// Rescales `H ↦ tH` so that both factor norms agree.
    fn balance(&mut self) {
        if self.row_norm <= 0.0 || self.col_norm <= 0.0 {
            return;
        }
        let t = (self.col_norm / self.row_norm).sqrt();
        let st = t.sqrt();
        for h in &mut self.h {
            *h = h.scale_real(t);
        }
        for a in &mut self.fact.a {
            *a = a.scale_real(st);
        }
        for b in &mut self.fact.b {
            *b = b.scale_real(1.0 / st);
        }
        self.row = self.row.scale_real(t);
        self.col = self.col.scale_real(1.0 / t);
        self.row_norm *= t;
        self.col_norm /= t;
    }
}

/// `(h^{1/2}, (h^{1/2})⁺)` with eigenvalues at or below `floor` dropped.
fn root_pair(h: &Element, floor: f64) -> (Element, Element) {
    let mut roots = Vec::with_capacity(h.blocks().len());
    let mut invs = Vec::with_capacity(h.blocks().len());
    for m in h.blocks() {
        let (vals, vecs) = linalg::herm_eig(m);
        let r: Vec<f64> = vals.iter().map(|&l| if l > floor && l > 0.0 { l.sqrt() } else { 0.0 }).collect();
        let ri: Vec<f64> = r.iter().map(|&v| if v > 0.0 { 1.0 / v } else { 0.0 }).collect();
        roots.push(linalg::reassemble(&vecs, &r, &vecs));
        invs.push(linalg::reassemble(&vecs, &ri, &vecs));
    }
    let alg = h.algebra();
    (Element::from_blocks_unchecked(alg, roots), Element::from_blocks_unchecked(alg, invs))
}

const MAX_ITERATIONS: usize = 400;

/// Step lengths tried on every iteration. The full step flips the relative
/// scale of reducing subspaces by the factor `1 − p`, so the step `1/p`
/// is always tried as well and the better of the two is kept.
fn step_candidates(p: f64) -> Vec<f64> {
    if p == 1.0 {
        vec![1.0]
    } else if p.is_infinite() {
        vec![1.0, 0.5]
    } else {
        vec![1.0, 1.0 / p]
    }
}

fn minimize(
    mut g: Gauge,
    xs: &[Element],
    p: f64,
    cfg: &ToleranceConfig,
    observe: &mut dyn FnMut(&Factorization),
) -> (Gauge, usize) {
    let alg = xs[0].algebra().clone();
    observe(&g.fact);
    g.balance();
    let steps = step_candidates(p);
    let mut iterations = 0;
    let mut stalls = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let target = fixed_point_target(&g, xs, p, cfg.rank_cutoff);
        let current = g.upper();
        let mix = |step: f64| -> Gauge {
            let h: Vec<Element> = g
                .h
                .iter()
                .zip(&target)
                .map(|(old, new)| &old.scale_real(1.0 - step) + &new.scale_real(step))
                .collect();
            Gauge::build(&alg, h, xs, p, cfg.rank_cutoff)
        };
        let acceptable = |cand: &Gauge| cand.upper() < current * (1.0 - 1e-15) && cand.residual <= 1e-9 * cand.value();
        let mut accepted: Option<Gauge> = None;
        for &step in &steps {
            let cand = mix(step);
            observe(&cand.fact);
            if acceptable(&cand) && accepted.as_ref().is_none_or(|a| cand.upper() < a.upper()) {
                accepted = Some(cand);
            }
        }
        if accepted.is_none() {
            let mut step = steps[steps.len() - 1] * 0.5;
            while step > 1e-4 {
                let cand = mix(step);
                observe(&cand.fact);
                if acceptable(&cand) {
                    accepted = Some(cand);
                    break;
                }
                step *= 0.5;
            }
        }
        let Some(mut next) = accepted else { break };
        next.balance();
        let gain = (current - next.upper()) / current;
        g = next;
        if gain < 1e-14 {
            stalls += 1;
            if stalls >= 2 {
                break;
            }
        } else {
            stalls = 0;
        }
    }
    (g, iterations)
}

/// Minimizer of the linearized objective `Σ τ(W H_n) + τ(V x_n* H_n⁻¹ x_n)` with
/// `W = A^{p−1}`, `V = B^{p−1}`: the matrix geometric mean `W⁻¹ # (x_n V x_n*)`.
fn fixed_point_target(g: &Gauge, xs: &[Element], p: f64, cutoff: f64) -> Vec<Element> {
    let alg = xs[0].algebra();
    let (w_half, w_half_inv, v) = if p == 1.0 {
        (Element::identity(alg), Element::identity(alg), Element::identity(alg))
    } else if p.is_infinite() {
        // the limits of the normalized powers are the top spectral projections
        let top = |m: &Element| {
            let n = m.norm_inf();
            m.psd_apply(|l| if l >= n * (1.0 - 1e-9) { 1.0 } else { 0.0 })
        };
        let w = top(&g.row);
        (w.clone(), w, top(&g.col))
    } else {
        let w = g.row.psd_pow(0.5 * (p - 1.0), cutoff);
        let wi = w.pinv_psd(cutoff);
        (w, wi, g.col.psd_pow(p - 1.0, cutoff))
    };
    xs.iter()
        .map(|x| {
            let inner = &(&(&w_half * x) * &v) * &(&x.adjoint() * &w_half);
            let root = inner.hermitian_part().sqrt_psd();
            (&(&w_half_inv * &root) * &w_half_inv).hermitian_part()
        })
        .collect()
}

/// `Σ_n ‖β x_n α‖_1 / (‖α‖_q ‖β‖_q)` with `q = 2p'` is a lower bound for the
/// ℓ¹ norm (Hölder on each factorization). Maximized by alternating ascent
/// from the trivial start and, when available, from the primal optimality
/// condition `β ∝ A^{(p−1)/2}`, `α ∝ B^{(p−1)/2}`.
fn dual_lower(xs: &[Element], p: f64, primal: Option<&Gauge>, cfg: &ToleranceConfig) -> f64 {
    let alg = xs[0].algebra();
    let one = Element::identity(alg);
    let mut best = dual_value(xs, p, &one, &one);
    if p == 1.0 {
        return best;
    }
    let mut starts = vec![(one.clone(), one)];
    if let Some(g) = primal {
        if p.is_finite() {
            let half = 0.5 * (p - 1.0);
            starts.push((g.col.psd_pow(half, cfg.rank_cutoff), g.row.psd_pow(half, cfg.rank_cutoff)));
        }
    }
    for (alpha, beta) in starts {
        best = best.max(dual_ascent(xs, p, alpha, beta, cfg.rank_cutoff));
    }
    best
}

fn dual_value(xs: &[Element], p: f64, alpha: &Element, beta: &Element) -> f64 {
    let q = 2.0 * conjugate_exponent(p);
    let den = schatten(alpha, q) * schatten(beta, q);
    if den == 0.0 {
        return 0.0;
    }
    xs.iter().map(|x| schatten(&(&(beta * x) * alpha), 1.0)).sum::<f64>() / den
}

fn dual_ascent(xs: &[Element], p: f64, mut alpha: Element, mut beta: Element, cutoff: f64) -> f64 {
    let alg = xs[0].algebra();
    let q_dual = conjugate_exponent(2.0 * conjugate_exponent(p));
    let mut best = dual_value(xs, p, &alpha, &beta);
    for _ in 0..200 {
        let phases = |alpha: &Element, beta: &Element| -> Vec<Element> {
            xs.iter().map(|x| lp::norming_dual_unchecked(&(&(beta * x) * alpha), 1.0, cutoff)).collect()
        };
        let z = phases(&alpha, &beta);
        let y = sum(alg, &z.iter().zip(xs).map(|(z, x)| &(z * &beta) * x).collect::<Vec<_>>());
        let next_alpha = lp::norming_dual_unchecked(&y, q_dual, cutoff);
        if next_alpha.norm_inf() == 0.0 {
            break;
        }
        alpha = next_alpha;
        let z = phases(&alpha, &beta);
        let y = sum(alg, &xs.iter().zip(&z).map(|(x, z)| &(x * &alpha) * z).collect::<Vec<_>>());
        let next_beta = lp::norming_dual_unchecked(&y, q_dual, cutoff);
        if next_beta.norm_inf() == 0.0 {
            break;
        }
        beta = next_beta;
        let v = dual_value(xs, p, &alpha, &beta);
        let improved = v > best * (1.0 + 1e-13);
        best = best.max(v);
        if !improved {
            break;
        }
    }
    best
}

const PHASES: usize = 16;

/// `sup_ε ‖Σ ε_n x_n‖_p` over unimodular scalars on a 16-point phase grid:
/// exhaustive for at most four terms, coordinate ascent beyond.
fn sign_lower(xs: &[Element], p: f64) -> f64 {
    let alg = xs[0].algebra();
    let grid: Vec<C64> = (0..PHASES).map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 / PHASES as f64)).collect();
    let eval = |idx: &[usize]| -> f64 {
        let mut total = Element::zero(alg);
        for (x, &k) in xs.iter().zip(idx) {
            total = &total + &x.scale(grid[k]);
        }
        schatten(&total, p)
    };
    let n = xs.len();
    let mut idx = vec![0usize; n];
    if n <= 4 {
        let mut best = 0.0f64;
        let combos = PHASES.pow((n - 1) as u32);
        for mut code in 0..combos {
            for slot in idx.iter_mut().skip(1) {
                *slot = code % PHASES;
                code /= PHASES;
            }
            best = best.max(eval(&idx));
        }
        return best;
    }
    let mut best = eval(&idx);
    for _ in 0..10 {
        let mut improved = false;
        for i in 1..n {
            let mut keep = idx[i];
            for k in 0..PHASES {
                idx[i] = k;
                let v = eval(&idx);
                if v > best * (1.0 + 1e-14) {
                    best = v;
                    keep = k;
                    improved = true;
                }
            }
            idx[i] = keep;
        }
        if !improved {
            break;
        }
    }
    best
}

/// `‖x ⊗ e₁ + y ⊗ e₂‖_{L^p(ℓ¹₂)}`.
pub fn l12_norm(a: &Element, b: &Element, p: f64, cfg: &ToleranceConfig) -> Result<NormInterval> {
    l1_norm_bounds(&ElementSequence::new(vec![a.clone(), b.clone()])?, p, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DisjointVerdict {
    Disjoint,
    NotDisjoint,
    Undetermined,
}

/// Outcome of the `L²(ℓ¹₂)` disjointness criterion.
#[derive(Debug, Clone)]
pub struct DinqReport {
    pub verdict: DisjointVerdict,
    pub interval: NormInterval,
    /// `(‖a‖₂² + ‖b‖₂²)^{1/2}`.
    pub threshold: f64,
    /// Result of the algebraic test `a*b = ab* = 0`.
    pub algebraic: bool,
}

impl DinqReport {
    /// Whether the norm criterion agrees with the algebraic test (undetermined counts as agreement).
    pub fn consistent(&self) -> bool {
        match self.verdict {
            DisjointVerdict::Disjoint => self.algebraic,
            DisjointVerdict::NotDisjoint => !self.algebraic,
            DisjointVerdict::Undetermined => true,
        }
    }
}

/// Decides disjointness through `‖(a, b)‖_{L²(ℓ¹₂)} ≤ (‖a‖₂² + ‖b‖₂²)^{1/2}`,
/// which holds exactly for disjoint pairs.
pub fn dinq_disjoint_test(a: &Element, b: &Element, cfg: &ToleranceConfig) -> Result<DinqReport> {
    let interval = l12_norm(a, b, 2.0, cfg)?;
    let threshold = (schatten(a, 2.0).powi(2) + schatten(b, 2.0).powi(2)).sqrt();
    let margin = threshold * (1.0 + cfg.opt_tol);
    let verdict = if interval.upper <= margin {
        DisjointVerdict::Disjoint
    } else if interval.lower > margin {
        DisjointVerdict::NotDisjoint
    } else {
        DisjointVerdict::Undetermined
    };
    let algebraic = lp::disjoint(a, b, cfg.algebraic_tol)?;
    Ok(DinqReport { verdict, interval, threshold, algebraic })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{AlgebraDescriptor, Block};
    use crate::lp::lp_norm;
    use proptest::prelude::*;

    fn m2() -> Algebra {
        AlgebraDescriptor::full(2, 1.0).unwrap()
    }

    fn unit(i: usize, j: usize) -> Element {
        Element::unit(&m2(), 0, i, j).unwrap()
    }

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn column_norm_of_matrix_units() {
        let seq = ElementSequence::new(vec![unit(0, 0), unit(1, 0)]).unwrap();
        // Σ b*b = E11 + E11 = 2E11, ‖2E11‖_1^{1/2} = √2
        assert!((column_row_norm(&seq, 2.0, Side::Column).unwrap() - 2f64.sqrt()).abs() < 1e-14);
        assert!((column_row_norm(&seq, 2.0, Side::Row).unwrap() - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn column_row_norms_of_singletons_and_adjoints() {
        let alg = AlgebraDescriptor::new(vec![Block::new(3, 1.0), Block::new(2, 0.5)]).unwrap();
        let mut s = Sampler::new(1);
        for p in [1.0, 1.5, 2.0, 3.0] {
            let x = s.ginibre(&alg);
            let seq = ElementSequence::new(vec![x.clone()]).unwrap();
            let n = lp_norm(&x, p).unwrap();
            assert!((column_row_norm(&seq, p, Side::Column).unwrap() - n).abs() < 1e-12 * n);
            assert!((column_row_norm(&seq, p, Side::Row).unwrap() - n).abs() < 1e-12 * n);
            let seq = ElementSequence::new((0..3).map(|_| s.ginibre(&alg)).collect()).unwrap();
            let col = column_row_norm(&seq, p, Side::Column).unwrap();
            let row_adj = column_row_norm(&seq.adjoint(), p, Side::Row).unwrap();
            assert!((col - row_adj).abs() < 1e-12 * col);
        }
    }

    #[test]
    fn positive_formula() {
        let seq = ElementSequence::new(vec![unit(0, 0), unit(0, 0)]).unwrap();
        assert!((l1_norm_positive(&seq, 1.0, 1e-9).unwrap() - 2.0).abs() < 1e-14);
        let alg = AlgebraDescriptor::diagonal(&[0.5, 2.0, 1.5]).unwrap();
        let e = Element::unit(&alg, 0, 0, 0).unwrap();
        let f = Element::unit(&alg, 2, 0, 0).unwrap();
        let seq = ElementSequence::new(vec![e, f]).unwrap();
        for p in [1.0, 2.0, 3.5] {
            let want = (0.5f64 + 1.5).powf(1.0 / p);
            assert!((l1_norm_positive(&seq, p, 1e-9).unwrap() - want).abs() < 1e-13);
        }
        let bad = ElementSequence::new(vec![unit(0, 1)]).unwrap();
        assert!(matches!(l1_norm_positive(&bad, 2.0, 1e-9), Err(Error::Domain(_))));
    }

    #[test]
    fn singletons_collapse_to_the_lp_norm() {
        let alg = AlgebraDescriptor::new(vec![Block::new(3, 1.0), Block::new(2, 0.5)]).unwrap();
        let mut s = Sampler::new(2);
        for p in [1.0, 1.5, 2.0, 3.0] {
            let x = s.ginibre(&alg);
            let iv = l1_norm_bounds(&ElementSequence::new(vec![x.clone()]).unwrap(), p, &cfg()).unwrap();
            let n = lp_norm(&x, p).unwrap();
            assert!(iv.certified_exact);
            assert!(iv.contains(n, 1e-9 * n), "p={p} {iv:?} {n}");
        }
    }

    #[test]
    fn disjoint_pair_attains_the_hilbert_value() {
        let alg = AlgebraDescriptor::full(3, 1.0).unwrap();
        let mut s = Sampler::new(3);
        for _ in 0..20 {
            let (a, b) = s.disjoint_pair(&alg);
            let r = dinq_disjoint_test(&a, &b, &cfg()).unwrap();
            assert_eq!(r.verdict, DisjointVerdict::Disjoint);
            assert!(r.algebraic && r.consistent());
            assert!(r.interval.upper <= r.threshold * (1.0 + 1e-12), "{:?} {}", r.interval, r.threshold);
        }
    }

    #[test]
    fn equal_projections_are_not_disjoint() {
        let r = dinq_disjoint_test(&unit(0, 0), &unit(0, 0), &cfg()).unwrap();
        assert_eq!(r.verdict, DisjointVerdict::NotDisjoint);
        assert!((r.interval.lower - 2.0).abs() < 1e-12);
        let r = dinq_disjoint_test(&unit(0, 0), &unit(1, 1), &cfg()).unwrap();
        assert_eq!(r.verdict, DisjointVerdict::Disjoint);
        let iv = l12_norm(&unit(0, 0), &unit(0, 0), 2.0, &cfg()).unwrap();
        assert!((iv.upper - 2.0).abs() < 1e-12 && iv.certified_exact);
    }

    #[test]
    fn rotated_pair_is_detected() {
        let (c, s) = (0.7f64.cos(), 0.7f64.sin());
        let a = &unit(0, 0).scale_real(c) + &unit(0, 1).scale_real(s);
        let r = dinq_disjoint_test(&a, &unit(1, 1), &cfg()).unwrap();
        assert_eq!(r.verdict, DisjointVerdict::NotDisjoint);
        assert!(r.interval.certified_exact);
        assert!(r.interval.lower > 1.54);
    }

    #[test]
    fn zero_partner() {
        let x = Sampler::new(4).ginibre(&m2());
        let iv = l12_norm(&x, &Element::zero(&m2()), 1.5, &cfg()).unwrap();
        let n = lp_norm(&x, 1.5).unwrap();
        assert!(iv.contains(n, 1e-8 * n) && iv.certified_exact);
    }

    #[test]
    fn p_one_is_the_sum_of_trace_norms() {
        let alg = AlgebraDescriptor::new(vec![Block::new(2, 1.0), Block::new(3, 0.25)]).unwrap();
        let mut s = Sampler::new(5);
        let xs: Vec<Element> = (0..4).map(|_| s.ginibre(&alg)).collect();
        let want: f64 = xs.iter().map(|x| lp_norm(x, 1.0).unwrap()).sum();
        let iv = l1_norm_bounds(&ElementSequence::new(xs).unwrap(), 1.0, &cfg()).unwrap();
        assert!(iv.contains(want, 1e-9 * want) && iv.certified_exact, "{iv:?} {want}");
    }

    #[test]
    fn general_sequences_close_the_gap() {
        let alg = AlgebraDescriptor::new(vec![Block::new(3, 1.0), Block::new(2, 2.0)]).unwrap();
        let mut s = Sampler::new(6);
        for p in [1.5, 2.0, 3.0, f64::INFINITY] {
            for n in 1..=4 {
                let xs: Vec<Element> = (0..n).map(|_| s.ginibre(&alg)).collect();
                let mut holder_ok = true;
                let seq = ElementSequence::new(xs).unwrap();
                let (iv, tr) = l1_norm_bounds_traced(&seq, p, &cfg(), &mut |f| {
                    let lhs = schatten(&sum(&alg, &f.products()), p);
                    holder_ok &= lhs <= f.value(p) * (1.0 + 1e-9) + 1e-12;
                })
                .unwrap();
                assert!(holder_ok);
                assert!(tr.final_upper <= tr.initial_upper * (1.0 + 1e-15));
                assert!(iv.lower <= iv.upper);
                if p.is_finite() {
                    assert!(iv.certified_exact, "p={p} n={n} {} {}", iv.lower, iv.upper);
                }
                let w = iv.witness.as_ref().unwrap();
                assert!(w.value(p) <= iv.upper * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn sign_search_is_a_lower_bound() {
        let alg = AlgebraDescriptor::full(2, 1.0).unwrap();
        let mut s = Sampler::new(7);
        for n in [2usize, 5] {
            let xs: Vec<Element> = (0..n).map(|_| s.ginibre(&alg)).collect();
            let lb = sign_lower(&xs, 2.0);
            let iv = l1_norm_bounds(&ElementSequence::new(xs).unwrap(), 2.0, &cfg()).unwrap();
            assert!(lb <= iv.upper * (1.0 + 1e-9));
        }
    }

    #[test]
    fn errors() {
        assert!(ElementSequence::new(vec![]).is_err());
        let other = Element::identity(&AlgebraDescriptor::full(3, 1.0).unwrap());
        assert_eq!(ElementSequence::new(vec![unit(0, 0), other]).unwrap_err(), Error::DescriptorMismatch);
        let seq = ElementSequence::new(vec![unit(0, 0)]).unwrap();
        assert!(l1_norm_bounds(&seq, 0.5, &cfg()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn permutation_and_homogeneity(seed in any::<u64>(), p in prop::sample::select(vec![1.0, 1.5, 2.0, 3.0]), t in 0.1f64..10.0) {
            let alg = AlgebraDescriptor::new(vec![Block::new(2, 1.0), Block::new(1, 0.5)]).unwrap();
            let mut s = Sampler::new(seed);
            let seq = ElementSequence::new((0..3).map(|_| s.ginibre(&alg)).collect()).unwrap();
            let base = l1_norm_bounds(&seq, p, &cfg()).unwrap();
            let perm = l1_norm_bounds(&seq.permuted(&[2, 0, 1]).unwrap(), p, &cfg()).unwrap();
            let scaled = l1_norm_bounds(&seq.scale(C64::from_polar(t, 1.0)), p, &cfg()).unwrap();
            let tol = 1e-6 * base.upper;
            prop_assert!((perm.upper - base.upper).abs() <= tol && (perm.lower - base.lower).abs() <= tol);
            prop_assert!((scaled.upper - t * base.upper).abs() <= t * tol);
            prop_assert!((scaled.lower - t * base.lower).abs() <= t * tol);
        }

        #[test]
        fn positive_sequences_are_exact(seed in any::<u64>(), p in prop::sample::select(vec![1.0, 1.5, 2.0, 3.0])) {
            let alg = AlgebraDescriptor::new(vec![Block::new(3, 1.0), Block::new(2, 0.7)]).unwrap();
            let mut s = Sampler::new(seed);
            let seq = ElementSequence::new((0..4).map(|_| s.positive(&alg)).collect()).unwrap();
            let iv = l1_norm_bounds(&seq, p, &cfg()).unwrap();
            let want = lp_norm(&seq.sum(), p).unwrap();
            prop_assert!(iv.certified_exact && iv.contains(want, 1e-12 * want));
        }
    }

    #[test]
    fn optimizer_recovers_positive_closed_form() {
        let mut s = Sampler::new(21);
        for round in 0..40 {
            let blocks: Vec<Block> = (0..1 + round % 3).map(|_| Block::new(1 + s.index(4), s.range(0.5, 2.0))).collect();
            let alg = AlgebraDescriptor::new(blocks).unwrap();
            let len = 1 + s.index(6);
            let seq = ElementSequence::new((0..len).map(|_| s.wishart(&alg)).collect()).unwrap();
            let p = [1.0, 1.5, 2.0, 3.0][round % 4];
            let exact = lp_norm(&seq.sum(), p).unwrap();
            let (iv, _) = l1_norm_bounds_optimizer_only(&seq, p, &cfg(), &mut |_| {}).unwrap();
            assert!(iv.contains(exact, 1e-12 * exact), "round {round} p={p}: {iv:?} vs {exact}");
            assert!(iv.width() <= 1e-6 * exact, "round {round} p={p}: width {}", iv.width() / exact);
        }
    }
}
