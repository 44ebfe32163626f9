//! Alternating minimization of `⟨a|W|a⟩` over unit product vectors.
//!
//! With every factor but one held fixed the objective is a Hermitian form
//! in the free factor, so each step replaces that factor by the bottom
//! eigenvector of the contracted matrix. The value never increases.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::faces::stream_rng;
use crate::herm::HermOp;
use crate::linalg::{jacobi_eigh, C64};
use crate::multilinear::{basis, ProductVector, SystemShape};

pub const DEFAULT_STARTS: usize = 64;
pub const MAX_ROUNDS: usize = 500;
pub const STOP_DELTA: f64 = 1e-12;

/// History of a single start.
#[derive(Debug, Clone)]
pub struct SeesawTrace {
    /// Objective after every full round, starting with the initial value.
    pub values: Vec<f64>,
    pub argmin: ProductVector,
    pub converged: bool,
}

impl SeesawTrace {
    pub fn value(&self) -> f64 {
        *self.values.last().expect("trace holds the initial value")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeesawResult {
    pub value: f64,
    pub argmin: ProductVector,
    /// Index of the winning start.
    pub start: usize,
    pub starts: usize,
}

/// `A_i = B†WB` where column `a` of `B` is the expansion of `pv` with
/// factor `party` replaced by `|a⟩`.
fn contracted(w: &DMatrix<C64>, pv: &ProductVector, party: usize) -> DMatrix<C64> {
    let di = pv.shape().dims()[party];
    let d = w.nrows();
    let mut b = DMatrix::<C64>::zeros(d, di);
    for a in 0..di {
        let e = pv
            .with_factor(party, basis(di, a))
            .expect("basis vector keeps the shape");
        b.set_column(a, e.expand().as_dvector());
    }
    b.adjoint() * w * b
}

fn check_shape(w: &HermOp, shape: &SystemShape) -> Result<()> {
    if w.shape().dim() != shape.dim() {
        return Err(Error::ShapeMismatch(format!(
            "witness of dimension {} for shape {shape}",
            w.dim()
        )));
    }
    Ok(())
}

fn run_rounds<F>(w: &HermOp, init: &ProductVector, max_rounds: usize, done: F) -> Result<SeesawTrace>
where
    F: Fn(f64, f64) -> bool,
{
    check_shape(w, init.shape())?;
    let m = w.matrix();
    let mut pv = init.gauge_fixed();
    let mut values = vec![w.expectation(pv.expand().as_dvector())];
    let mut converged = false;
    for _ in 0..max_rounds {
        for party in 0..pv.shape().parties() {
            let a = contracted(m, &pv, party);
            let (_, vecs) = jacobi_eigh(&a);
            let bottom = vecs.column(vecs.ncols() - 1).into_owned();
            pv = pv.with_factor(party, bottom)?;
        }
        pv = pv.gauge_fixed();
        let v = w.expectation(pv.expand().as_dvector());
        let prev = values[values.len() - 1];
        values.push(v);
        if done(prev, v) {
            converged = true;
            break;
        }
    }
    Ok(SeesawTrace {
        values,
        argmin: pv,
        converged,
    })
}

/// Runs one start from `init` until the round-to-round change drops below
/// [`STOP_DELTA`] or [`MAX_ROUNDS`] is reached.
pub fn seesaw_from(w: &HermOp, init: &ProductVector) -> Result<SeesawTrace> {
    run_rounds(w, init, MAX_ROUNDS, |prev, v| (prev - v).abs() < STOP_DELTA)
}

/// Rounds allowed when polishing a near-zero point.
pub const POLISH_ROUNDS: usize = 2_000;
/// Polishing stops once the value falls below this.
pub const POLISH_FLOOR: f64 = 1e-15;

/// Continues from a point where `⟨a|W|a⟩` is already tiny. Where `W` is
/// flat to high order around a zero, progress per round falls under
/// [`STOP_DELTA`] long before the point itself has converged; this keeps
/// going until the value drops under [`POLISH_FLOOR`] or stops moving.
pub fn seesaw_polish(w: &HermOp, init: &ProductVector) -> Result<SeesawTrace> {
    run_rounds(w, init, POLISH_ROUNDS, |prev, v| v <= POLISH_FLOOR || prev - v <= 0.0)
}

/// All starts, in start order. Start `k` uses the ChaCha stream `k` of `seed`.
pub fn seesaw_all(w: &HermOp, shape: &SystemShape, starts: usize, seed: u64) -> Result<Vec<SeesawTrace>> {
    check_shape(w, shape)?;
    if starts == 0 {
        return Err(Error::InvalidArgument("starts must be positive".into()));
    }
    (0..starts)
        .into_par_iter()
        .map(|k| {
            let init = ProductVector::random(shape, &mut stream_rng(seed, k as u64));
            seesaw_from(w, &init)
        })
        .collect()
}

/// Minimum of `⟨a|W|a⟩` over unit product vectors, best of `starts` runs.
pub fn seesaw_min(w: &HermOp, shape: &SystemShape, starts: usize, seed: u64) -> Result<SeesawResult> {
    let traces = seesaw_all(w, shape, starts, seed)?;
    let (start, best) = traces
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.value().total_cmp(&b.value()).then(i.cmp(j)))
        .expect("at least one start");
    Ok(SeesawResult {
        value: best.value(),
        argmin: best.argmin.clone(),
        start,
        starts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multilinear::sample_product_vector;

    #[test]
    fn constant_on_maximally_mixed() {
        let s = SystemShape::bipartite(2, 3).unwrap();
        let w = HermOp::identity(&s).scale(1.0 / 6.0);
        let r = seesaw_min(&w, &s, 4, 0).unwrap();
        assert!((r.value - 1.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn finds_diagonal_minimum() {
        let s = SystemShape::bipartite(2, 2).unwrap();
        let mut m = DMatrix::<C64>::identity(4, 4);
        m[(0, 0)] = C64::new(-1.0, 0.0);
        let w = HermOp::new(s.clone(), m).unwrap();
        let r = seesaw_min(&w, &s, 8, 1).unwrap();
        assert!((r.value + 1.0).abs() < 1e-12);
        assert!(r.argmin.expand()[0].norm() > 1.0 - 1e-9);
    }

    #[test]
    fn values_never_increase() {
        let s = SystemShape::new(&[2, 2, 2]).unwrap();
        let g = sample_product_vector(&s, 4).projector();
        let w = HermOp::identity(&s).lin_comb(0.2, &g, -1.0).unwrap();
        for k in 0..6 {
            let init = sample_product_vector(&s, 100 + k);
            let t = seesaw_from(&w, &init).unwrap();
            for pair in t.values.windows(2) {
                assert!(pair[1] <= pair[0] + 1e-14);
            }
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let s = SystemShape::bipartite(3, 3).unwrap();
        let w = sample_product_vector(&s, 2).projector();
        let a = seesaw_min(&w, &s, 16, 9).unwrap();
        let b = seesaw_min(&w, &s, 16, 9).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(a.argmin, b.argmin);
    }

    #[test]
    fn rejects_mismatched_shape() {
        let s = SystemShape::bipartite(2, 2).unwrap();
        let t = SystemShape::bipartite(3, 3).unwrap();
        assert!(seesaw_min(&HermOp::identity(&s), &t, 1, 0).is_err());
        assert!(seesaw_min(&HermOp::identity(&s), &s, 0, 0).is_err());
    }
}
