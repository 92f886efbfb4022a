//! Dense complex matrix kernels used by the element layer.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

pub type C64 = Complex64;
pub type Mat = DMatrix<C64>;

pub(crate) fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Hermitian part `(m + m*)/2`.
pub(crate) fn hermitize(m: &Mat) -> Mat {
    (m + m.adjoint()).scale(0.5)
}

/// Eigen-decomposition of the Hermitian part of `m`, eigenvalues ascending.
pub(crate) fn herm_eig(m: &Mat) -> (Vec<f64>, Mat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), Mat::zeros(0, 0));
    }
    let eig = hermitize(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = Mat::from_fn(n, n, |r, col| eig.eigenvectors[(r, order[col])]);
    (values, vectors)
}

/// Singular value decomposition `m = u diag(s) v*` of a square matrix,
/// singular values descending.
///
/// One-sided Jacobi: columns of `m v` are orthogonalized by plane rotations.
/// This stays accurate on exactly rank-deficient input, where the LAPACK-style
/// bidiagonal routine in nalgebra can return wrong factors for complex data.
pub(crate) fn svd(m: &Mat) -> (Mat, Vec<f64>, Mat) {
    let (a, v) = jacobi_columns(m, true);
    let n = m.ncols();
    let norms: Vec<f64> = (0..n).map(|j| a.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let s: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let v = Mat::from_fn(n, n, |r, col| v[(r, order[col])]);
    let top = s.first().copied().unwrap_or(0.0);
    let floor = top * 4.0 * f64::EPSILON * n as f64;
    let mut u = Mat::zeros(m.nrows(), n);
    let mut filled = 0;
    for (col, &j) in order.iter().enumerate() {
        if s[col] > floor && s[col] > 0.0 {
            u.set_column(col, &a.column(j).unscale(s[col]));
            filled += 1;
        }
    }
    // complete the left factor to a unitary with Gram-Schmidt on unit vectors
    for col in filled..n {
        let mut best: Option<DVector<C64>> = None;
        for e in 0..m.nrows() {
            let mut cand = unit_vector(m.nrows(), e);
            for k in 0..col {
                let proj = u.column(k).dotc(&cand);
                cand -= u.column(k) * proj;
            }
            if best.as_ref().is_none_or(|b| cand.norm() > b.norm()) {
                best = Some(cand);
            }
        }
        let cand = best.expect("non-empty basis");
        let norm = cand.norm();
        u.set_column(col, &cand.unscale(norm));
    }
    (u, s, v)
}

/// Runs cyclic one-sided Jacobi sweeps on the columns of `m`; returns the
/// orthogonalized columns and, if requested, the accumulated rotation.
fn jacobi_columns(m: &Mat, with_v: bool) -> (Mat, Mat) {
    let n = m.ncols();
    let mut a = m.clone();
    let mut v = if with_v { Mat::identity(n, n) } else { Mat::zeros(0, 0) };
    for _ in 0..80 {
        let mut rotated = false;
        for i in 0..n {
            for j in (i + 1)..n {
                let alpha = a.column(i).norm_squared();
                let beta = a.column(j).norm_squared();
                let gamma = a.column(i).dotc(&a.column(j));
                let g = gamma.norm();
                if g == 0.0 || g <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut a, i, j, phase, c, s);
                if with_v {
                    rotate(&mut v, i, j, phase, c, s);
                }
            }
        }
        if !rotated {
            break;
        }
    }
    (a, v)
}

/// `(x_i, x_j) ← (c x_i − s e x_j, s x_i + c e x_j)` with `e` a phase.
fn rotate(m: &mut Mat, i: usize, j: usize, phase: C64, c: f64, s: f64) {
    for r in 0..m.nrows() {
        let xi = m[(r, i)];
        let xj = m[(r, j)] * phase;
        m[(r, i)] = xi * c - xj * s;
        m[(r, j)] = xi * s + xj * c;
    }
}

pub(crate) fn singular_values(m: &Mat) -> Vec<f64> {
    let (a, _) = jacobi_columns(m, false);
    let mut s: Vec<f64> = (0..m.ncols()).map(|j| a.column(j).norm()).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// `v diag(f(λ)) v*` for the eigen-decomposition of the Hermitian part of `m`.
pub(crate) fn herm_apply(m: &Mat, f: impl Fn(f64) -> f64) -> Mat {
    let (vals, vecs) = herm_eig(m);
    reassemble(&vecs, &vals.iter().map(|&l| f(l)).collect::<Vec<_>>(), &vecs)
}

/// `left diag(d) right*`.
pub(crate) fn reassemble(left: &Mat, d: &[f64], right: &Mat) -> Mat {
    let mut scaled = left.clone();
    for (j, &dj) in d.iter().enumerate() {
        scaled.column_mut(j).scale_mut(dj);
    }
    scaled * right.adjoint()
}

pub(crate) fn op_norm(m: &Mat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub(crate) fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub(crate) fn unit_vector(n: usize, i: usize) -> DVector<C64> {
    let mut v = DVector::zeros(n);
    v[i] = c(1.0);
    v
}

pub(crate) fn frobenius(m: &Mat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svd_is_sorted_and_reconstructs() {
        let m = Mat::from_row_slice(
            2,
            2,
            &[C64::new(1.0, 2.0), C64::new(0.5, 0.0), C64::new(-3.0, 1.0), C64::new(0.0, -1.0)],
        );
        let (u, s, v) = svd(&m);
        assert!(s[0] >= s[1]);
        let back = reassemble(&u, &s, &v);
        assert!(frobenius(&(back - &m)) < 1e-12);
    }

    fn lcg(state: &mut u64) -> f64 {
        *state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
    }

    #[test]
    fn svd_handles_exact_rank_deficiency() {
        let mut st = 7u64;
        for n in 1..9 {
            for r in 0..=n {
                for _ in 0..40 {
                    let left = Mat::from_fn(n, r, |_, _| C64::new(lcg(&mut st), lcg(&mut st)));
                    let right = Mat::from_fn(r, n, |_, _| C64::new(lcg(&mut st), lcg(&mut st)));
                    let m = &left * &right;
                    let (u, s, v) = svd(&m);
                    let scale = s.first().copied().unwrap_or(0.0).max(1.0);
                    assert!(frobenius(&(reassemble(&u, &s, &v) - &m)) < 1e-13 * scale * n as f64);
                    let id = Mat::identity(n, n);
                    assert!(frobenius(&(u.adjoint() * &u - &id)) < 1e-12);
                    assert!(frobenius(&(v.adjoint() * &v - &id)) < 1e-12);
                    assert!(s.windows(2).all(|w| w[0] >= w[1]));
                    assert!(s.iter().skip(r).all(|&x| x < 1e-13 * scale));
                    let sv = singular_values(&m);
                    assert!(sv.iter().zip(&s).all(|(a, b)| (a - b).abs() < 1e-13 * scale));
                }
            }
        }
    }

    #[test]
    fn eig_ascending() {
        let m = Mat::from_row_slice(2, 2, &[c(2.0), C64::new(0.0, 1.0), C64::new(0.0, -1.0), c(2.0)]);
        let (vals, vecs) = herm_eig(&m);
        assert!((vals[0] - 1.0).abs() < 1e-12 && (vals[1] - 3.0).abs() < 1e-12);
        let back = reassemble(&vecs, &vals, &vecs);
        assert!(frobenius(&(back - &m)) < 1e-12);
    }
}
