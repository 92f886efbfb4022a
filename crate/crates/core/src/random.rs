//! Seeded samplers for elements of an algebra.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{Algebra, Element};
use crate::linalg::{self, c, Mat, C64};

/// Deterministic random source; every randomized routine takes one.
#[derive(Debug, Clone)]
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn coin(&mut self) -> bool {
        self.rng.random::<bool>()
    }

    /// Standard normal by Box-Muller.
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
    }

    /// Standard complex Gaussian (`E|z|² = 1`).
    pub fn complex_normal(&mut self) -> C64 {
        C64::new(self.normal(), self.normal()) * core::f64::consts::FRAC_1_SQRT_2
    }

    pub fn phase(&mut self) -> C64 {
        C64::from_polar(1.0, 2.0 * PI * self.uniform())
    }

    pub fn ginibre_matrix(&mut self, rows: usize, cols: usize) -> Mat {
        Mat::from_fn(rows, cols, |_, _| self.complex_normal())
    }

    /// Haar-distributed unitary through QR with phase correction.
    pub fn unitary_matrix(&mut self, n: usize) -> Mat {
        let qr = self.ginibre_matrix(n, n).qr();
        let (q, r) = (qr.q(), qr.r());
        let mut q = q;
        for j in 0..n {
            let d = r[(j, j)];
            let ph = if d.norm() > 0.0 { d / d.norm() } else { c(1.0) };
            let mut col = q.column_mut(j);
            col *= ph;
        }
        q
    }

    pub fn ginibre(&mut self, alg: &Algebra) -> Element {
        let blocks = alg.blocks().iter().map(|b| self.ginibre_matrix(b.dim, b.dim)).collect();
        Element::from_blocks_unchecked(alg, blocks)
    }

    pub fn hermitian(&mut self, alg: &Algebra) -> Element {
        self.ginibre(alg).hermitian_part()
    }

    /// Full-rank positive element `g*g`.
    pub fn wishart(&mut self, alg: &Algebra) -> Element {
        let g = self.ginibre(alg);
        &g.adjoint() * &g
    }

    /// Element with rank at most `rank` in every block.
    pub fn low_rank(&mut self, alg: &Algebra, rank: usize) -> Element {
        let blocks = alg
            .blocks()
            .iter()
            .map(|b| {
                let r = rank.min(b.dim);
                self.ginibre_matrix(b.dim, r) * self.ginibre_matrix(r, b.dim)
            })
            .collect();
        Element::from_blocks_unchecked(alg, blocks)
    }

    /// Positive element of rank one in one random block.
    pub fn rank_one_positive(&mut self, alg: &Algebra) -> Element {
        let k = self.index(alg.block_count());
        let mut blocks: Vec<Mat> = alg.blocks().iter().map(|b| Mat::zeros(b.dim, b.dim)).collect();
        let v = self.ginibre_matrix(alg.blocks()[k].dim, 1);
        blocks[k] = &v * v.adjoint();
        Element::from_blocks_unchecked(alg, blocks)
    }

    /// Rank-one or full-rank positive element with equal probability.
    pub fn positive(&mut self, alg: &Algebra) -> Element {
        if self.coin() {
            self.rank_one_positive(alg)
        } else {
            self.wishart(alg)
        }
    }

    pub fn unitary(&mut self, alg: &Algebra) -> Element {
        let blocks = alg.blocks().iter().map(|b| self.unitary_matrix(b.dim)).collect();
        Element::from_blocks_unchecked(alg, blocks)
    }

    /// A pair of disjoint elements: `a = UΣ_S V*`, `b = UΣ_{S'}V*` for a random
    /// split of the singular directions in each block.
    pub fn disjoint_pair(&mut self, alg: &Algebra) -> (Element, Element) {
        let mut a = Vec::with_capacity(alg.block_count());
        let mut b = Vec::with_capacity(alg.block_count());
        let total: usize = alg.blocks().iter().map(|bl| bl.dim).sum();
        // guarantee that each side receives at least one direction overall
        let forced_a = self.index(total);
        let mut forced_b = self.index(total);
        if total > 1 {
            while forced_b == forced_a {
                forced_b = self.index(total);
            }
        }
        let mut slot = 0;
        for bl in alg.blocks() {
            let u = self.unitary_matrix(bl.dim);
            let v = self.unitary_matrix(bl.dim);
            let mut da = alloc::vec![0.0; bl.dim];
            let mut db = alloc::vec![0.0; bl.dim];
            for i in 0..bl.dim {
                let s = self.range(0.2, 2.0);
                let to_a = if slot == forced_a {
                    true
                } else if slot == forced_b {
                    false
                } else {
                    self.coin()
                };
                if to_a {
                    da[i] = s;
                } else {
                    db[i] = s;
                }
                slot += 1;
            }
            a.push(linalg::reassemble(&u, &da, &v));
            b.push(linalg::reassemble(&u, &db, &v));
        }
        (Element::from_blocks_unchecked(alg, a), Element::from_blocks_unchecked(alg, b))
    }
}
