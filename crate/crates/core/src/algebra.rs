//! Finite-dimensional tracial von Neumann algebras and their elements.
//!
//! An algebra is a direct sum `⊕_k M_{n_k}(ℂ)` carrying the faithful trace
//! `τ(x) = Σ_k w_k Tr(x_k)`. Every object of the theory (measurable operators,
//! `L^p` elements, spectral projections) is a block-diagonal matrix here.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use nalgebra::DVector;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{domain, structural, Error, Result};
use crate::linalg::{self, c, Mat, C64};

/// One full matrix block `M_dim(ℂ)` with trace weight `weight`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Block {
    pub dim: usize,
    pub weight: f64,
}

impl Block {
    pub fn new(dim: usize, weight: f64) -> Self {
        Self { dim, weight }
    }
}

/// A weighted direct sum of full matrix blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraDescriptor {
    blocks: Vec<Block>,
    offsets: Vec<usize>,
}

/// Shared handle to a descriptor; elements and maps hold one of these.
pub type Algebra = Arc<AlgebraDescriptor>;

impl AlgebraDescriptor {
    /// Validates faithfulness (`weight > 0`) and block sizes.
    pub fn new(blocks: Vec<Block>) -> Result<Algebra> {
        if blocks.is_empty() {
            return Err(structural!("an algebra needs at least one block"));
        }
        for (k, b) in blocks.iter().enumerate() {
            if b.dim == 0 {
                return Err(structural!("block {k} has dimension 0"));
            }
            if !(b.weight.is_finite() && b.weight > 0.0) {
                return Err(domain!("block {k} has non-positive trace weight {}", b.weight));
            }
        }
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut acc = 0;
        for b in &blocks {
            offsets.push(acc);
            acc += b.dim * b.dim;
        }
        Ok(Arc::new(Self { blocks, offsets }))
    }

    /// `M_n(ℂ)` with trace `weight · Tr`.
    pub fn full(n: usize, weight: f64) -> Result<Algebra> {
        Self::new(vec![Block::new(n, weight)])
    }

    /// The commutative algebra `ℓ^∞_m` with point masses `weights`.
    pub fn diagonal(weights: &[f64]) -> Result<Algebra> {
        Self::new(weights.iter().map(|&w| Block::new(1, w)).collect())
    }

    /// `M_n(A)` with trace `Tr ⊗ τ`.
    pub fn amplify(&self, n: usize) -> Result<Algebra> {
        if n == 0 {
            return Err(structural!("amplification order must be at least 1"));
        }
        Self::new(self.blocks.iter().map(|b| Block::new(n * b.dim, b.weight)).collect())
    }

    /// The opposite algebra. It has the same blocks; elements are carried
    /// into it by blockwise transposition (see [`Element::to_opposite`]).
    pub fn opposite(&self) -> Result<Algebra> {
        Self::new(self.blocks.clone())
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_commutative(&self) -> bool {
        self.blocks.iter().all(|b| b.dim == 1)
    }

    /// `τ(1) = Σ_k w_k n_k`.
    pub fn unit_trace(&self) -> f64 {
        self.blocks.iter().map(|b| b.weight * b.dim as f64).sum()
    }

    pub fn min_weight(&self) -> f64 {
        self.blocks.iter().map(|b| b.weight).fold(f64::INFINITY, f64::min)
    }

    /// Complex dimension of the underlying vector space.
    pub fn space_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim * b.dim).sum()
    }

    /// Coordinate index of matrix entry `(i, j)` of block `k` (row-major).
    pub fn coord(&self, k: usize, i: usize, j: usize) -> usize {
        self.offsets[k] + i * self.blocks[k].dim + j
    }

    /// Inverse of [`AlgebraDescriptor::coord`].
    pub fn coord_position(&self, index: usize) -> (usize, usize, usize) {
        let k = match self.offsets.binary_search(&index) {
            Ok(k) => k,
            Err(k) => k - 1,
        };
        let local = index - self.offsets[k];
        let n = self.blocks[k].dim;
        (k, local / n, local % n)
    }

    /// Trace weight attached to coordinate `index`.
    pub fn coord_weight(&self, index: usize) -> f64 {
        self.blocks[self.coord_position(index).0].weight
    }
}

pub(crate) fn same_algebra(a: &Algebra, b: &Algebra) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// An element of an algebra: one complex matrix per block.
#[derive(Debug, Clone)]
pub struct Element {
    alg: Algebra,
    blocks: Vec<Mat>,
}

impl Element {
    pub fn from_blocks(alg: &Algebra, blocks: Vec<Mat>) -> Result<Self> {
        if blocks.len() != alg.block_count() {
            return Err(structural!(
                "expected {} blocks, got {}",
                alg.block_count(),
                blocks.len()
            ));
        }
        for (k, (m, b)) in blocks.iter().zip(alg.blocks()).enumerate() {
            if m.nrows() != b.dim || m.ncols() != b.dim {
                return Err(structural!(
                    "block {k} has shape {}x{}, expected {}x{}",
                    m.nrows(),
                    m.ncols(),
                    b.dim,
                    b.dim
                ));
            }
        }
        Ok(Self { alg: alg.clone(), blocks })
    }

    pub(crate) fn from_blocks_unchecked(alg: &Algebra, blocks: Vec<Mat>) -> Self {
        debug_assert_eq!(blocks.len(), alg.block_count());
        Self { alg: alg.clone(), blocks }
    }

    pub fn zero(alg: &Algebra) -> Self {
        let blocks = alg.blocks().iter().map(|b| Mat::zeros(b.dim, b.dim)).collect();
        Self { alg: alg.clone(), blocks }
    }

    pub fn identity(alg: &Algebra) -> Self {
        let blocks = alg.blocks().iter().map(|b| Mat::identity(b.dim, b.dim)).collect();
        Self { alg: alg.clone(), blocks }
    }

    /// Matrix unit `E_ij` in block `k`.
    pub fn unit(alg: &Algebra, k: usize, i: usize, j: usize) -> Result<Self> {
        let dim = alg
            .blocks()
            .get(k)
            .ok_or_else(|| structural!("block index {k} out of range"))?
            .dim;
        if i >= dim || j >= dim {
            return Err(structural!("matrix unit ({i},{j}) outside block {k} of size {dim}"));
        }
        let mut x = Self::zero(alg);
        x.blocks[k][(i, j)] = c(1.0);
        Ok(x)
    }

    /// The unit of block `k`, a central projection.
    pub fn block_unit(alg: &Algebra, k: usize) -> Self {
        let mut x = Self::zero(alg);
        x.blocks[k] = Mat::identity(alg.blocks()[k].dim, alg.blocks()[k].dim);
        x
    }

    /// Element supported in a single block.
    pub fn in_block(alg: &Algebra, k: usize, m: Mat) -> Result<Self> {
        let mut x = Self::zero(alg);
        let dim = alg.blocks().get(k).ok_or_else(|| structural!("block index {k} out of range"))?.dim;
        if m.nrows() != dim || m.ncols() != dim {
            return Err(structural!("block {k} expects a {dim}x{dim} matrix"));
        }
        x.blocks[k] = m;
        Ok(x)
    }

    pub fn from_coords(alg: &Algebra, coords: &DVector<C64>) -> Result<Self> {
        if coords.len() != alg.space_dim() {
            return Err(structural!(
                "coordinate vector has length {}, expected {}",
                coords.len(),
                alg.space_dim()
            ));
        }
        let mut x = Self::zero(alg);
        let mut idx = 0;
        for m in x.blocks.iter_mut() {
            let n = m.nrows();
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] = coords[idx];
                    idx += 1;
                }
            }
        }
        Ok(x)
    }

    pub fn coords(&self) -> DVector<C64> {
        let mut v = DVector::zeros(self.alg.space_dim());
        let mut idx = 0;
        for m in &self.blocks {
            let n = m.nrows();
            for i in 0..n {
                for j in 0..n {
                    v[idx] = m[(i, j)];
                    idx += 1;
                }
            }
        }
        v
    }

    pub fn algebra(&self) -> &Algebra {
        &self.alg
    }

    pub fn blocks(&self) -> &[Mat] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &Mat {
        &self.blocks[k]
    }

    pub(crate) fn blocks_mut(&mut self) -> &mut [Mat] {
        &mut self.blocks
    }

    pub fn map_blocks(&self, mut f: impl FnMut(usize, &Mat) -> Mat) -> Self {
        let blocks = self.blocks.iter().enumerate().map(|(k, m)| f(k, m)).collect();
        Self { alg: self.alg.clone(), blocks }
    }

    fn zip_blocks(&self, other: &Self, f: impl Fn(&Mat, &Mat) -> Mat) -> Self {
        assert!(same_algebra(&self.alg, &other.alg), "algebra descriptors do not match");
        let blocks = self.blocks.iter().zip(&other.blocks).map(|(a, b)| f(a, b)).collect();
        Self { alg: self.alg.clone(), blocks }
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if same_algebra(&self.alg, &other.alg) {
            Ok(())
        } else {
            Err(Error::DescriptorMismatch)
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(self + other)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(self - other)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(self * other)
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map_blocks(|_, m| m * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(c(s))
    }

    pub fn adjoint(&self) -> Self {
        self.map_blocks(|_, m| m.adjoint())
    }

    /// Blockwise transpose.
    pub fn transpose(&self) -> Self {
        self.map_blocks(|_, m| m.transpose())
    }

    /// `τ(x) = Σ_k w_k Tr(x_k)`.
    pub fn trace(&self) -> C64 {
        self.blocks
            .iter()
            .zip(self.alg.blocks())
            .map(|(m, b)| m.trace() * b.weight)
            .sum()
    }

    /// Operator norm `max_k ‖x_k‖_∞`.
    pub fn norm_inf(&self) -> f64 {
        self.blocks.iter().map(linalg::op_norm).fold(0.0, f64::max)
    }

    /// Largest entry modulus; a cheap size proxy.
    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().map(linalg::max_abs).fold(0.0, f64::max)
    }

    /// Unweighted Frobenius norm of all blocks together.
    pub fn frobenius(&self) -> f64 {
        self.blocks.iter().map(|m| linalg::frobenius(m).powi(2)).sum::<f64>().sqrt()
    }

    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        let scale = self.norm_inf().max(f64::MIN_POSITIVE);
        self.blocks
            .iter()
            .all(|m| linalg::op_norm(&(m - m.adjoint())) <= tol * scale)
    }

    pub fn hermitian_part(&self) -> Self {
        self.map_blocks(|_, m| linalg::hermitize(m))
    }

    /// Relative distance `‖x − y‖_∞ / max(‖x‖_∞, ‖y‖_∞, 1)`.
    pub fn distance(&self, other: &Self) -> f64 {
        let diff = (self - other).norm_inf();
        diff / self.norm_inf().max(other.norm_inf()).max(1.0)
    }

    /// Image in the opposite algebra: `x ↦ xᵗ`, which reverses products.
    pub fn to_opposite(&self, opposite: &Algebra) -> Result<Self> {
        if opposite.blocks() != self.alg.blocks() {
            return Err(Error::DescriptorMismatch);
        }
        Ok(Self { alg: opposite.clone(), blocks: self.transpose().blocks })
    }

    /// Moves the element to an algebra with identical blocks.
    pub fn reinterpret(&self, alg: &Algebra) -> Result<Self> {
        if alg.blocks() != self.alg.blocks() {
            return Err(Error::DescriptorMismatch);
        }
        Ok(Self { alg: alg.clone(), blocks: self.blocks.clone() })
    }

    /// Eigenvalues (ascending) of each block of a self-adjoint element.
    pub fn spectrum(&self, tol: f64) -> Result<Vec<Vec<f64>>> {
        self.require_self_adjoint(tol)?;
        Ok(self.blocks.iter().map(|m| linalg::herm_eig(m).0).collect())
    }

    /// Singular values (descending) of each block.
    pub fn singular_values(&self) -> Vec<Vec<f64>> {
        self.blocks.iter().map(linalg::singular_values).collect()
    }

    fn require_self_adjoint(&self, tol: f64) -> Result<()> {
        if self.is_self_adjoint(tol) {
            Ok(())
        } else {
            Err(domain!("element is not self-adjoint"))
        }
    }

    /// `f(x)` for self-adjoint `x` through the eigen-decomposition.
    pub fn apply_hermitian(&self, f: impl Fn(f64) -> f64, tol: f64) -> Result<Self> {
        self.require_self_adjoint(tol)?;
        Ok(self.map_blocks(|_, m| linalg::herm_apply(m, &f)))
    }

    /// `f(x)` for nominally positive `x`; negative round-off eigenvalues are
    /// clipped to zero before `f` is applied.
    pub(crate) fn psd_apply(&self, f: impl Fn(f64) -> f64) -> Self {
        self.map_blocks(|_, m| linalg::herm_apply(m, |l| f(l.max(0.0))))
    }

    /// `|x|^t = (x*x)^{t/2}` for `t > 0`.
    pub fn abs_pow(&self, t: f64) -> Self {
        self.map_blocks(|_, m| {
            let (_, s, v) = linalg::svd(m);
            let d: Vec<f64> = s.iter().map(|&x| x.powf(t)).collect();
            linalg::reassemble(&v, &d, &v)
        })
    }

    /// `|x| = (x*x)^{1/2}`.
    pub fn abs(&self) -> Self {
        self.abs_pow(1.0)
    }

    /// Positive square root of a nominally positive element.
    pub fn sqrt_psd(&self) -> Self {
        self.psd_apply(f64::sqrt)
    }

    /// Power `x^t` of a nominally positive element on its support; eigenvalues
    /// below `cutoff · ‖x‖_∞` are treated as zero, so negative `t` gives the
    /// Moore-Penrose power.
    pub fn psd_pow(&self, t: f64, cutoff: f64) -> Self {
        let floor = cutoff * self.norm_inf();
        self.psd_apply(|l| if l > floor && l > 0.0 { l.powf(t) } else { 0.0 })
    }

    /// Moore-Penrose inverse of a positive element.
    pub fn pinv_psd(&self, cutoff: f64) -> Self {
        self.psd_pow(-1.0, cutoff)
    }
}

impl<'a> Add<&'a Element> for &'a Element {
    type Output = Element;
    fn add(self, rhs: &'a Element) -> Element {
        self.zip_blocks(rhs, |a, b| a + b)
    }
}

impl<'a> Sub<&'a Element> for &'a Element {
    type Output = Element;
    fn sub(self, rhs: &'a Element) -> Element {
        self.zip_blocks(rhs, |a, b| a - b)
    }
}

impl<'a> Mul<&'a Element> for &'a Element {
    type Output = Element;
    fn mul(self, rhs: &'a Element) -> Element {
        self.zip_blocks(rhs, |a, b| a * b)
    }
}

impl Neg for &Element {
    type Output = Element;
    fn neg(self) -> Element {
        self.scale_real(-1.0)
    }
}

impl Add for Element {
    type Output = Element;
    fn add(self, rhs: Element) -> Element {
        &self + &rhs
    }
}

impl Sub for Element {
    type Output = Element;
    fn sub(self, rhs: Element) -> Element {
        &self - &rhs
    }
}

impl Mul for Element {
    type Output = Element;
    fn mul(self, rhs: Element) -> Element {
        &self * &rhs
    }
}

/// An interval of the real line with open or closed ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    /// `[lo, ∞)`.
    pub fn at_least(lo: f64) -> Self {
        Self { lo, hi: f64::INFINITY, lo_closed: true, hi_closed: false }
    }

    /// `(−∞, hi)`.
    pub fn below(hi: f64) -> Self {
        Self { lo: f64::NEG_INFINITY, hi, lo_closed: false, hi_closed: false }
    }

    pub fn closed(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_closed: true, hi_closed: true }
    }

    pub fn contains(&self, v: f64) -> bool {
        let above = if self.lo_closed { v >= self.lo } else { v > self.lo };
        let under = if self.hi_closed { v <= self.hi } else { v < self.hi };
        above && under
    }
}

/// Spectral functions understood by [`functional_calculus`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralFunction {
    /// `|x|^t`, any `x`, `t > 0`.
    AbsPower(f64),
    /// Positive square root of a positive element.
    Sqrt,
    /// `x^t` on the support of a positive element.
    Power(f64),
    /// Spectral projection `χ_I(x)` of a self-adjoint element.
    Indicator(Interval),
}

pub fn functional_calculus(x: &Element, f: SpectralFunction, tol: f64) -> Result<Element> {
    match f {
        SpectralFunction::AbsPower(t) => {
            if !(t > 0.0) {
                return Err(domain!("|x|^t needs t > 0, got {t}"));
            }
            Ok(x.abs_pow(t))
        }
        SpectralFunction::Sqrt => {
            x.require_self_adjoint(tol)?;
            Ok(x.sqrt_psd())
        }
        SpectralFunction::Power(t) => {
            x.require_self_adjoint(tol)?;
            Ok(x.psd_pow(t, tol))
        }
        SpectralFunction::Indicator(interval) => {
            x.apply_hermitian(|l| if interval.contains(l) { 1.0 } else { 0.0 }, tol)
        }
    }
}

/// Polar decomposition `x = u|x|` with the support projection of `|x|`.
#[derive(Debug, Clone)]
pub struct Polar {
    /// Partial isometry with `u*u = support`.
    pub u: Element,
    /// `|x|`.
    pub modulus: Element,
    /// `s(|x|)`, computed with the rank cutoff.
    pub support: Element,
}

impl Polar {
    /// `uu*`, the support of `|x*|`.
    pub fn left_support(&self) -> Element {
        &self.u * &self.u.adjoint()
    }
}

/// Polar decomposition from per-block SVDs. Singular values at or below
/// `rank_cutoff · ‖x‖_∞` are dropped from `u`, so `u*u` is exactly the
/// support used for `|x|`.
pub fn polar(x: &Element, rank_cutoff: f64) -> Polar {
    let floor = rank_cutoff * x.norm_inf();
    let alg = x.algebra().clone();
    let mut us = Vec::with_capacity(alg.block_count());
    let mut ms = Vec::with_capacity(alg.block_count());
    let mut ss = Vec::with_capacity(alg.block_count());
    for m in x.blocks() {
        let n = m.nrows();
        let (u, s, v) = linalg::svd(m);
        let keep: Vec<f64> = s.iter().map(|&sv| if sv > floor && sv > 0.0 { 1.0 } else { 0.0 }).collect();
        us.push(linalg::reassemble(&u, &keep, &v));
        let dropped: Vec<f64> = s.iter().zip(&keep).map(|(&sv, &k)| sv * k).collect();
        ms.push(linalg::reassemble(&v, &dropped, &v));
        ss.push(if n == 0 { Mat::zeros(0, 0) } else { linalg::reassemble(&v, &keep, &v) });
    }
    Polar {
        u: Element::from_blocks_unchecked(&alg, us),
        modulus: Element::from_blocks_unchecked(&alg, ms),
        support: Element::from_blocks_unchecked(&alg, ss),
    }
}

/// Support projection `s(x)` of a self-adjoint element (`= u*u = uu*`).
pub fn support(x: &Element, rank_cutoff: f64) -> Element {
    polar(x, rank_cutoff).support
}

/// Places an `n × n` operator matrix of elements of `A` into `M_n(A)`.
pub fn amplify_matrix(amplified: &Algebra, entries: &[Vec<Element>]) -> Result<Element> {
    let n = entries.len();
    if n == 0 || entries.iter().any(|row| row.len() != n) {
        return Err(structural!("operator matrix must be square and non-empty"));
    }
    let base = entries[0][0].algebra().clone();
    if amplified.block_count() != base.block_count()
        || amplified
            .blocks()
            .iter()
            .zip(base.blocks())
            .any(|(a, b)| a.dim != n * b.dim || a.weight != b.weight)
    {
        return Err(structural!("target is not M_{n} of the entries' algebra"));
    }
    let mut blocks = Vec::with_capacity(base.block_count());
    for (k, b) in base.blocks().iter().enumerate() {
        let d = b.dim;
        let mut big = Mat::zeros(n * d, n * d);
        for (r, row) in entries.iter().enumerate() {
            for (col, e) in row.iter().enumerate() {
                if !same_algebra(e.algebra(), &base) {
                    return Err(Error::DescriptorMismatch);
                }
                big.view_mut((r * d, col * d), (d, d)).copy_from(e.block(k));
            }
        }
        blocks.push(big);
    }
    Element::from_blocks(amplified, blocks)
}

/// Entry `(r, col)` of an element of `M_n(A)`.
pub fn matrix_entry(big: &Element, base: &Algebra, n: usize, r: usize, col: usize) -> Result<Element> {
    if r >= n || col >= n {
        return Err(structural!("entry ({r},{col}) outside a {n}x{n} operator matrix"));
    }
    let blocks = base
        .blocks()
        .iter()
        .enumerate()
        .map(|(k, b)| {
            let d = b.dim;
            big.block(k).view((r * d, col * d), (d, d)).into_owned()
        })
        .collect();
    Element::from_blocks(base, blocks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::Sampler;

    fn m2() -> Algebra {
        AlgebraDescriptor::full(2, 1.0).unwrap()
    }

    #[test]
    fn identity_trace_is_weighted_dimension() {
        assert_eq!(Element::identity(&m2()).trace(), c(2.0));
        let alg = AlgebraDescriptor::diagonal(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(Element::identity(&alg).trace(), c(6.0));
        assert_eq!(alg.unit_trace(), 6.0);
    }

    #[test]
    fn descriptor_validation() {
        assert!(AlgebraDescriptor::full(2, 0.0).is_err());
        assert!(AlgebraDescriptor::full(0, 1.0).is_err());
        assert!(AlgebraDescriptor::new(vec![]).is_err());
        assert!(AlgebraDescriptor::full(2, -1.0).is_err());
    }

    #[test]
    fn mismatched_operands_are_rejected() {
        let a = Element::identity(&m2());
        let b = Element::identity(&AlgebraDescriptor::full(3, 1.0).unwrap());
        assert_eq!(a.checked_add(&b).unwrap_err(), Error::DescriptorMismatch);
        assert_eq!(a.checked_mul(&b).unwrap_err(), Error::DescriptorMismatch);
        let bad = Element::from_blocks(&m2(), vec![Mat::zeros(3, 3)]);
        assert!(matches!(bad, Err(Error::Structural(_))));
    }

    #[test]
    fn involution_and_traciality() {
        let alg = AlgebraDescriptor::new(vec![Block::new(2, 0.5), Block::new(3, 2.0)]).unwrap();
        let mut s = Sampler::new(11);
        for _ in 0..20 {
            let x = s.ginibre(&alg);
            let y = s.ginibre(&alg);
            assert!(x.adjoint().adjoint().distance(&x) < 1e-15);
            let d = (&x * &y).trace() - (&y * &x).trace();
            assert!(d.norm() < 1e-11);
        }
    }

    #[test]
    fn faithful_trace() {
        let alg = AlgebraDescriptor::new(vec![Block::new(2, 0.3), Block::new(1, 4.0)]).unwrap();
        let mut s = Sampler::new(5);
        for _ in 0..20 {
            let x = s.ginibre(&alg);
            assert!((&x.adjoint() * &x).trace().re > 0.0);
        }
    }

    #[test]
    fn abs_sqrt_of_diagonal() {
        let x = Element::from_blocks(&m2(), vec![Mat::from_diagonal(&DVector::from_vec(vec![c(3.0), c(-4.0)]))])
            .unwrap();
        let r = functional_calculus(&x, SpectralFunction::AbsPower(0.5), 1e-9).unwrap();
        assert!((r.block(0)[(0, 0)].re - 3f64.sqrt()).abs() < 1e-14);
        assert!((r.block(0)[(1, 1)].re - 2.0).abs() < 1e-14);
        assert!(r.block(0)[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn spectral_projection_rank_matches_eigenvalue_count() {
        let alg = AlgebraDescriptor::full(5, 1.0).unwrap();
        let mut s = Sampler::new(3);
        for _ in 0..10 {
            let h = s.hermitian(&alg);
            // oracle: eigenvalues straight from nalgebra on the raw block
            let mut eig: Vec<f64> = h.block(0).clone().symmetric_eigen().eigenvalues.iter().copied().collect();
            eig.sort_by(f64::total_cmp);
            let lambda = 0.5 * (eig[2] + eig[3]);
            let p = functional_calculus(&h, SpectralFunction::Indicator(Interval::at_least(lambda)), 1e-9).unwrap();
            let rank = p.trace().re.round() as usize;
            assert_eq!(rank, eig.iter().filter(|&&l| l >= lambda).count());
            assert!((&p * &p).distance(&p) < 1e-12);
            assert!(p.adjoint().distance(&p) < 1e-12);
            let q = functional_calculus(&h, SpectralFunction::Indicator(Interval::below(eig[1] + 1e-9)), 1e-9).unwrap();
            assert!((&p * &q).norm_inf() < 1e-12);
        }
    }

    #[test]
    fn non_self_adjoint_indicator_is_a_domain_error() {
        let x = Element::unit(&m2(), 0, 0, 1).unwrap();
        let r = functional_calculus(&x, SpectralFunction::Indicator(Interval::at_least(0.0)), 1e-9);
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn abs_power_roundtrip_against_gram_oracle() {
        let alg = AlgebraDescriptor::new(vec![Block::new(3, 1.0), Block::new(2, 0.5)]).unwrap();
        let mut s = Sampler::new(8);
        for _ in 0..10 {
            let x = s.ginibre(&alg);
            let back = x.abs_pow(3.0).psd_pow(1.0 / 3.0, 1e-14);
            // oracle: square root of x*x through the eigen-decomposition
            let oracle = (&x.adjoint() * &x).map_blocks(|_, m| {
                let e = linalg::hermitize(m).symmetric_eigen();
                let d: Vec<f64> = e.eigenvalues.iter().map(|l| l.max(0.0).sqrt()).collect();
                linalg::reassemble(&e.eigenvectors, &d, &e.eigenvectors)
            });
            assert!(back.distance(&oracle) < 1e-10);
        }
    }

    #[test]
    fn polar_of_matrix_unit_and_zero() {
        let e12 = Element::unit(&m2(), 0, 0, 1).unwrap();
        let p = polar(&e12, 1e-10);
        assert!(p.u.distance(&e12) < 1e-14);
        let e22 = Element::unit(&m2(), 0, 1, 1).unwrap();
        assert!(p.modulus.distance(&e22) < 1e-14);
        assert!(p.support.distance(&e22) < 1e-14);

        let z = polar(&Element::zero(&m2()), 1e-10);
        assert_eq!(z.u.norm_inf(), 0.0);
        assert_eq!(z.modulus.norm_inf(), 0.0);
        assert_eq!(z.support.norm_inf(), 0.0);
    }

    #[test]
    fn polar_roundtrip_on_random_elements() {
        let alg = AlgebraDescriptor::new(vec![Block::new(3, 1.0), Block::new(2, 2.0)]).unwrap();
        let mut s = Sampler::new(21);
        for i in 0..1000 {
            let x = if i % 3 == 0 { s.low_rank(&alg, 1) } else { s.ginibre(&alg) };
            let p = polar(&x, 1e-10);
            let tol = 1e-9 * x.norm_inf().max(1.0);
            assert!((&p.u * &p.modulus - x.clone()).norm_inf() < tol);
            let uu = &p.u.adjoint() * &p.u;
            assert!((&uu * &p.modulus - p.modulus.clone()).norm_inf() < tol);
            assert!((&(&p.u * &uu) - &p.u).norm_inf() < 1e-9);
            assert!(uu.distance(&p.support) < 1e-9);
        }
    }

    #[test]
    fn amplification_layout() {
        let alg = m2();
        let big = alg.amplify(2).unwrap();
        assert_eq!(big.blocks(), &[Block::new(4, 1.0)]);
        let mut s = Sampler::new(2);
        let xs: Vec<Element> = (0..4).map(|_| s.ginibre(&alg)).collect();
        let z = amplify_matrix(&big, &[vec![xs[0].clone(), xs[1].clone()], vec![xs[2].clone(), xs[3].clone()]]).unwrap();
        assert!(matrix_entry(&z, &alg, 2, 1, 0).unwrap().distance(&xs[2]) < 1e-15);
        // Tr ⊗ τ
        let tr = xs[0].trace() + xs[3].trace();
        assert!((z.trace() - tr).norm() < 1e-12);
    }

    #[test]
    fn opposite_reverses_products() {
        let alg = AlgebraDescriptor::new(vec![Block::new(2, 1.0), Block::new(3, 0.5)]).unwrap();
        let op = alg.opposite().unwrap();
        let mut s = Sampler::new(9);
        let x = s.ginibre(&alg);
        let y = s.ginibre(&alg);
        let lhs = (&x * &y).to_opposite(&op).unwrap();
        let rhs = &y.to_opposite(&op).unwrap() * &x.to_opposite(&op).unwrap();
        assert!(lhs.distance(&rhs) < 1e-13);
    }

    #[test]
    fn coordinates_roundtrip() {
        let alg = AlgebraDescriptor::new(vec![Block::new(2, 1.0), Block::new(1, 3.0), Block::new(3, 0.5)]).unwrap();
        let mut s = Sampler::new(4);
        let x = s.ginibre(&alg);
        let back = Element::from_coords(&alg, &x.coords()).unwrap();
        assert_eq!(back.distance(&x), 0.0);
        for idx in 0..alg.space_dim() {
            let (k, i, j) = alg.coord_position(idx);
            assert_eq!(alg.coord(k, i, j), idx);
        }
    }
}
