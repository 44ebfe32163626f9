#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use sepfaces::linalg::C64;
use sepfaces::{HermOp, SystemShape};

pub fn gaussian<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

/// GUE-like Hermitian operator.
pub fn random_hermitian<R: Rng>(shape: &SystemShape, rng: &mut R) -> HermOp {
    let g = gaussian(shape.dim(), shape.dim(), rng);
    HermOp::from_hermitian(shape.clone(), (&g + g.adjoint()).scale(0.5))
}

/// `G G† / tr` with `G` a `d × rank` Gaussian matrix.
pub fn random_state<R: Rng>(shape: &SystemShape, rank: usize, rng: &mut R) -> HermOp {
    let g = gaussian(shape.dim(), rank, rng);
    let op = HermOp::from_hermitian(shape.clone(), &g * g.adjoint());
    let t = op.trace();
    op.scale(1.0 / t)
}

/// Sum of all `k × k` principal minors, by brute force over index subsets.
pub fn brute_minor_sums(m: &DMatrix<C64>) -> Vec<f64> {
    let d = m.nrows();
    let mut sums = vec![0.0; d];
    for subset in 1u32..(1 << d) {
        let idx: Vec<usize> = (0..d).filter(|&i| subset >> i & 1 == 1).collect();
        let sub = DMatrix::from_fn(idx.len(), idx.len(), |r, c| m[(idx[r], idx[c])]);
        sums[idx.len() - 1] += sub.determinant().re;
    }
    sums
}

pub fn shape(dims: &[usize]) -> SystemShape {
    SystemShape::new(dims).unwrap()
}
