//! Product vectors in a subspace `V ⊂ ℂ² ⊗ ℂᵐ` of dimension `m`.
//!
//! A vector `(x₀, x₁) ⊗ y` lies in `V` iff it is orthogonal to every `n_j`
//! spanning `V^⊥`, i.e. `(x₀A₀ + x₁A₁) y = 0` where row `j` of `A_a` is the
//! conjugate of the `a`-th block of `n_j`. Generic `V` gives a regular
//! pencil with `m` simple roots, one product vector each.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::faces::{count_generic_pv, stream_rng};
use crate::herm::{real_span_rank, HermOp, TolPolicy};
use crate::linalg::{det, jacobi_eigh, matrix_rank, poly_roots, svd_jacobi, Lu, C64};
use crate::multilinear::{random_complex_vector, ComplexVector, ProductVector, SystemShape};

/// Roots closer than this (relative) are treated as one.
pub const MERGE_TOL: f64 = 1e-7;
/// Angle of the projective change of variable applied before root finding,
/// so that a root at `t = ∞` becomes an ordinary one.
const ROTATION: f64 = 0.7;
const NEWTON_STEPS: usize = 8;
const CLUSTER_TOL: f64 = 1e-4;
const CLUSTER_KERNEL_RTOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubspaceSpec {
    pub shape: SystemShape,
    pub basis: Vec<ComplexVector>,
}

impl SubspaceSpec {
    pub fn new(shape: SystemShape, basis: Vec<ComplexVector>, policy: &TolPolicy) -> Result<Self> {
        if basis.is_empty() {
            return Err(Error::Empty("subspace basis"));
        }
        if let Some(v) = basis.iter().find(|v| v.len() != shape.dim()) {
            return Err(Error::ShapeMismatch(format!(
                "basis vector of length {} in {shape}",
                v.len()
            )));
        }
        let spec = Self { shape, basis };
        let rank = matrix_rank(&spec.basis_matrix(), policy.rank_rtol);
        if rank != spec.basis.len() {
            return Err(Error::InvalidArgument(format!(
                "basis of {} vectors has rank {rank}",
                spec.basis.len()
            )));
        }
        Ok(spec)
    }

    /// A subspace spanned by `dim` independent Gaussian vectors.
    pub fn random<R: rand::Rng + ?Sized>(shape: &SystemShape, dim: usize, rng: &mut R) -> Result<Self> {
        let basis = (0..dim)
            .map(|_| ComplexVector::from_dvector(random_complex_vector(shape.dim(), rng)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(shape.clone(), basis, &TolPolicy::default())
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis_matrix(&self) -> DMatrix<C64> {
        let cols: Vec<DVector<C64>> = self.basis.iter().map(|v| v.as_dvector().clone()).collect();
        DMatrix::from_columns(&cols)
    }

    /// Orthonormal basis of `V^⊥`.
    pub fn complement(&self) -> Vec<DVector<C64>> {
        let b = self.basis_matrix();
        let gram = b.adjoint() * &b;
        let inv = gram.try_inverse().expect("basis is independent");
        let p = DMatrix::<C64>::identity(self.shape.dim(), self.shape.dim()) - &b * inv * b.adjoint();
        let (_, vecs) = jacobi_eigh(&p);
        let k = self.shape.dim() - self.dim();
        (0..k).map(|j| vecs.column(j).into_owned()).collect()
    }

    /// The same subspace under the basis change `basis · g`.
    pub fn rebased(&self, g: &DMatrix<C64>) -> Result<Self> {
        if g.shape() != (self.dim(), self.dim()) {
            return Err(Error::ShapeMismatch("basis change must be dim × dim".into()));
        }
        let nb = self.basis_matrix() * g;
        let basis = nb
            .column_iter()
            .map(|c| ComplexVector::from_dvector(c.into_owned()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.shape.clone(), basis, &TolPolicy::default())
    }

    /// `max_j |⟨n_j|v⟩| / ‖v‖` over an orthonormal basis of `V^⊥`.
    pub fn residual(&self, pv: &ProductVector) -> f64 {
        let v = pv.expand();
        let norm = v.norm();
        self.complement()
            .iter()
            .map(|n| n.dotc(v.as_dvector()).norm() / norm)
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PencilFlag {
    Regular,
    /// `det(x₀A₀ + x₁A₁)` is not identically zero, but `A₀` or `A₁` has a
    /// kernel of dimension at least two.
    Degenerate,
    /// `det(x₀A₀ + x₁A₁) ≡ 0`.
    Singular,
}

#[derive(Debug, Clone)]
pub struct PencilProblem {
    pub shape: SystemShape,
    pub a0: DMatrix<C64>,
    pub a1: DMatrix<C64>,
    pub flag: PencilFlag,
}

fn check_dims(spec: &SubspaceSpec) -> Result<usize> {
    let m = match spec.shape.dims() {
        [2, m] => *m,
        _ => {
            return Err(Error::Unsupported(format!(
                "exact enumeration needs shape 2⊗m, got {}",
                spec.shape
            )))
        }
    };
    if spec.dim() != m {
        return Err(Error::InvalidArgument(format!(
            "subspace of dimension {} in 2⊗{m}, expected {m}",
            spec.dim()
        )));
    }
    Ok(m)
}

impl PencilProblem {
    /// `x₀A₀ + x₁A₁`.
    pub fn at(&self, x0: C64, x1: C64) -> DMatrix<C64> {
        self.a0.map(|z| z * x0) + self.a1.map(|z| z * x1)
    }

    /// Rotated pair `(B₀, B₁)` with `B₀ + sB₁ ∝ x₀A₀ + x₁A₁`.
    fn rotated(&self) -> (DMatrix<C64>, DMatrix<C64>) {
        let (c, s) = (ROTATION.cos(), ROTATION.sin());
        (
            self.a0.scale(c) + self.a1.scale(s),
            self.a0.scale(-s) + self.a1.scale(c),
        )
    }

    /// Coefficients of `det(B₀ + sB₁)` in `s`, ascending, from values at
    /// the `m+1` roots of unity.
    fn det_coefficients(&self) -> Vec<C64> {
        let (b0, b1) = self.rotated();
        let n = self.a0.nrows() + 1;
        let nodes: Vec<C64> = (0..n)
            .map(|j| C64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64))
            .collect();
        let values: Vec<C64> = nodes.iter().map(|&w| det(&(&b0 + b1.map(|z| z * w)))).collect();
        (0..n)
            .map(|k| {
                values
                    .iter()
                    .zip(&nodes)
                    .map(|(&v, &w)| v * w.powu(k as u32).conj())
                    .sum::<C64>()
                    / n as f64
            })
            .collect()
    }

    fn det_scale(&self) -> f64 {
        (self.a0.norm() + self.a1.norm()).max(1.0).powi(self.a0.nrows() as i32)
    }
}

pub fn build_pencil(spec: &SubspaceSpec, policy: &TolPolicy) -> Result<PencilProblem> {
    let m = check_dims(spec)?;
    let normals = spec.complement();
    let a0 = DMatrix::from_fn(m, m, |j, k| normals[j][k].conj());
    let a1 = DMatrix::from_fn(m, m, |j, k| normals[j][m + k].conj());
    let mut p = PencilProblem {
        shape: spec.shape.clone(),
        a0,
        a1,
        flag: PencilFlag::Regular,
    };
    let coeffs = p.det_coefficients();
    let top = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    p.flag = if top <= 1e-12 * p.det_scale() {
        PencilFlag::Singular
    } else if matrix_rank(&p.a0, policy.rank_rtol) + 2 <= m || matrix_rank(&p.a1, policy.rank_rtol) + 2 <= m {
        PencilFlag::Degenerate
    } else {
        PencilFlag::Regular
    };
    Ok(p)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnumeratedVector {
    pub vector: ProductVector,
    /// Root `t = x₁/x₀` of `det(A₀ + tA₁)`; `None` for `t = ∞`.
    pub t: Option<C64>,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Enumeration {
    Finite {
        vectors: Vec<EnumeratedVector>,
        notes: Vec<String>,
    },
    /// `V` contains a product vector family of positive dimension.
    Infinite {
        reason: String,
        candidates: Vec<ProductVector>,
    },
}

impl Enumeration {
    pub fn count(&self) -> Option<usize> {
        match self {
            Enumeration::Finite { vectors, .. } => Some(vectors.len()),
            Enumeration::Infinite { .. } => None,
        }
    }

    pub fn vectors(&self) -> Vec<ProductVector> {
        match self {
            Enumeration::Finite { vectors, .. } => vectors.iter().map(|e| e.vector.clone()).collect(),
            Enumeration::Infinite { candidates, .. } => candidates.clone(),
        }
    }

    pub fn max_residual(&self) -> f64 {
        match self {
            Enumeration::Finite { vectors, .. } => vectors.iter().map(|e| e.residual).fold(0.0, f64::max),
            Enumeration::Infinite { .. } => f64::NAN,
        }
    }
}

/// `(x₀, x₁)` for the rotated parameter `s`, or the point at infinity.
fn x_of(s: Option<C64>) -> DVector<C64> {
    let (c, sn) = (ROTATION.cos(), ROTATION.sin());
    let x = match s {
        Some(s) => DVector::from_vec(vec![C64::new(c, 0.0) - s * sn, C64::new(sn, 0.0) + s * c]),
        None => DVector::from_vec(vec![C64::new(-sn, 0.0), C64::new(c, 0.0)]),
    };
    let n = x.norm();
    x.unscale(n)
}

fn polish(b0: &DMatrix<C64>, b1: &DMatrix<C64>, mut s: C64) -> C64 {
    for _ in 0..NEWTON_STEPS {
        let lu = Lu::new(&(b0 + b1.map(|z| z * s)));
        if lu.is_singular() {
            break;
        }
        let Some(x) = lu.solve(b1) else { break };
        let tr = x.trace();
        if tr.norm() == 0.0 {
            break;
        }
        let step = tr.inv();
        s -= step;
        if step.norm() <= 1e-15 * s.norm().max(1.0) {
            break;
        }
    }
    s
}

/// Right kernel of `m`: singular vectors whose values fall below the rank
/// threshold, at least one.
fn kernel(m: &DMatrix<C64>, rtol: f64) -> Vec<DVector<C64>> {
    let (values, vecs) = svd_jacobi(m);
    let scale = values.first().copied().unwrap_or(0.0).max(1.0);
    let n = values.len();
    let dim = values.iter().filter(|&&v| v <= rtol * scale).count().max(1);
    (n - dim..n).map(|j| vecs.column(j).into_owned()).collect()
}

fn infinite_family(shape: &SystemShape, x: DVector<C64>, ker: Vec<DVector<C64>>) -> Result<Enumeration> {
    let t = if x[0].norm() <= 1e-14 { None } else { Some(x[1] / x[0]) };
    let candidates = ker
        .into_iter()
        .map(|y| ProductVector::new(shape.clone(), vec![x.clone(), y]).map(|p| p.gauge_fixed()))
        .collect::<Result<Vec<_>>>()?;
    Ok(Enumeration::Infinite {
        reason: format!("kernel of dimension {} at t = {t:?}", candidates.len()),
        candidates,
    })
}

/// All product vectors in `V`, or the [`Enumeration::Infinite`] flag.
pub fn enumerate_pv(spec: &SubspaceSpec, policy: &TolPolicy) -> Result<Enumeration> {
    let pencil = build_pencil(spec, policy)?;
    let shape = spec.shape.clone();
    if pencil.flag == PencilFlag::Singular {
        return Ok(Enumeration::Infinite {
            reason: "det(x₀A₀ + x₁A₁) vanishes identically".into(),
            candidates: Vec::new(),
        });
    }
    let m = pencil.a0.nrows();
    let (b0, b1) = pencil.rotated();
    let coeffs = pencil.det_coefficients();
    let top = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let degree = (0..=m).rev().find(|&k| coeffs[k].norm() > 1e-10 * top).unwrap_or(0);

    let mut roots: Vec<Option<C64>> = poly_roots(&coeffs[..=degree])
        .into_iter()
        .map(|s| Some(polish(&b0, &b1, s)))
        .collect();
    if degree < m {
        roots.push(None);
    }

    // A multiple root comes back from the companion matrix as a cluster of
    // width about eps^(1/k); its mean is accurate again, and a kernel of
    // dimension two or more there means a whole family of product vectors.
    let finite: Vec<C64> = roots.iter().flatten().copied().collect();
    for &r in &finite {
        let group: Vec<C64> = finite
            .iter()
            .copied()
            .filter(|q| (q - r).norm() <= CLUSTER_TOL * r.norm().max(1.0))
            .collect();
        if group.len() < 2 {
            continue;
        }
        let mean = group.iter().sum::<C64>() / group.len() as f64;
        let ker = kernel(&(&b0 + b1.map(|z| z * mean)), CLUSTER_KERNEL_RTOL);
        if ker.len() > 1 {
            let x = x_of(Some(mean));
            return infinite_family(&shape, x, ker);
        }
    }

    let mut merged: Vec<Option<C64>> = Vec::new();
    let mut notes = Vec::new();
    for r in roots {
        let dup = merged.iter().any(|q| match (q, r) {
            (Some(a), Some(b)) => (a - b).norm() <= MERGE_TOL * a.norm().max(1.0),
            (None, None) => true,
            _ => false,
        });
        if dup {
            notes.push(format!("merged a repeated root near {r:?}"));
        } else {
            merged.push(r);
        }
    }

    let mut vectors = Vec::new();
    for s in merged {
        let mat = match s {
            Some(s) => &b0 + b1.map(|z| z * s),
            None => b1.clone(),
        };
        let ker = kernel(&mat, policy.rank_rtol);
        let x = x_of(s);
        let t = if x[0].norm() <= 1e-14 { None } else { Some(x[1] / x[0]) };
        if ker.len() > 1 {
            return infinite_family(&shape, x, ker);
        }
        let y = ker.into_iter().next().expect("nonempty kernel");
        let vector = ProductVector::new(shape.clone(), vec![x, y])?.gauge_fixed();
        vectors.push(EnumeratedVector {
            residual: spec.residual(&vector),
            vector,
            t,
        });
    }
    Ok(Enumeration::Finite { vectors, notes })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnumerationBatch {
    pub shape: SystemShape,
    pub trials: usize,
    pub expected: usize,
    /// Number of product vectors found, keyed by count; infinite cases are
    /// tallied separately.
    pub histogram: BTreeMap<usize, usize>,
    pub infinite: usize,
    pub max_residual: f64,
    pub passed: bool,
}

/// Enumerates `trials` random subspaces of dimension `m` in `2⊗m`. Trial
/// `i` draws from ChaCha stream `i` of `seed`.
pub fn enumerate_batch(shape: &SystemShape, trials: usize, seed: u64, policy: &TolPolicy) -> Result<EnumerationBatch> {
    let m = match shape.dims() {
        [2, m] => *m,
        _ => return Err(Error::Unsupported(format!("exact enumeration needs 2⊗m, got {shape}"))),
    };
    let expected: usize = count_generic_pv(shape)
        .try_into()
        .map_err(|_| Error::InvalidArgument("count overflows usize".into()))?;
    let runs: Vec<Enumeration> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let spec = SubspaceSpec::random(shape, m, &mut stream_rng(seed, i))?;
            enumerate_pv(&spec, policy)
        })
        .collect::<Result<_>>()?;
    let mut histogram = BTreeMap::new();
    let mut infinite = 0;
    let mut max_residual: f64 = 0.0;
    for r in &runs {
        match r.count() {
            Some(c) => {
                *histogram.entry(c).or_insert(0) += 1;
                max_residual = max_residual.max(r.max_residual());
            }
            None => infinite += 1,
        }
    }
    let passed = infinite == 0 && histogram.len() == 1 && histogram.contains_key(&expected) && max_residual <= 1e-9;
    Ok(EnumerationBatch {
        shape: shape.clone(),
        trials,
        expected,
        histogram,
        infinite,
        max_residual,
        passed,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PiPolytope {
    pub shape: SystemShape,
    pub vertices: Vec<HermOp>,
    pub span_rank: usize,
    pub affine_dim: usize,
    /// `d − Σ(d_i − 1)`, the dimension of `V`.
    pub lower_bound: usize,
    pub affine_dim_meets_bound: bool,
    /// Rank of the stacked product vectors, equal to `dim V` when they span it.
    pub vector_rank: usize,
}

/// Polytope spanned by the projectors onto the product vectors of a
/// random generic `V`. Its exact dimension is not known in general; this
/// only reports data.
pub fn example_pi_polytope(shape: &SystemShape, seed: u64, policy: &TolPolicy) -> Result<PiPolytope> {
    let m = match shape.dims() {
        [2, m] => *m,
        _ => return Err(Error::Unsupported(format!("exact enumeration needs 2⊗m, got {shape}"))),
    };
    let spec = SubspaceSpec::random(shape, m, &mut stream_rng(seed, 0))?;
    let found = enumerate_pv(&spec, policy)?;
    let vectors = match &found {
        Enumeration::Finite { vectors, .. } => vectors.iter().map(|e| e.vector.clone()).collect::<Vec<_>>(),
        Enumeration::Infinite { reason, .. } => {
            return Err(Error::InvalidArgument(format!("infinitely many product vectors: {reason}")))
        }
    };
    let vertices: Vec<HermOp> = vectors.iter().map(|v| v.projector()).collect();
    let span_rank = real_span_rank(&vertices, policy)?;
    let cols: Vec<DVector<C64>> = vectors.iter().map(|v| v.expand().into_dvector()).collect();
    let vector_rank = if cols.is_empty() {
        0
    } else {
        matrix_rank(&DMatrix::from_columns(&cols), policy.rank_rtol)
    };
    let affine_dim = span_rank.saturating_sub(1);
    Ok(PiPolytope {
        shape: shape.clone(),
        vertices,
        span_rank,
        affine_dim,
        lower_bound: m,
        affine_dim_meets_bound: affine_dim >= m,
        vector_rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ZERO;
    use crate::multilinear::basis;

    fn pol() -> TolPolicy {
        TolPolicy::default()
    }

    fn spec_from(shape: &SystemShape, vs: Vec<DVector<C64>>) -> SubspaceSpec {
        let basis = vs.into_iter().map(|v| ComplexVector::from_dvector(v).unwrap()).collect();
        SubspaceSpec::new(shape.clone(), basis, &pol()).unwrap()
    }

    fn ket(d: usize, j: usize) -> DVector<C64> {
        basis(d, j)
    }

    #[test]
    fn generic_counts() {
        for m in 2..=4 {
            let s = SystemShape::bipartite(2, m).unwrap();
            for i in 0..20 {
                let spec = SubspaceSpec::random(&s, m, &mut stream_rng(11, i)).unwrap();
                let e = enumerate_pv(&spec, &pol()).unwrap();
                assert_eq!(e.count(), Some(m), "m={m} trial {i}");
                assert!(e.max_residual() <= 1e-9);
            }
        }
    }

    #[test]
    fn quadratic_oracle_in_two_by_two() {
        let s = SystemShape::bipartite(2, 2).unwrap();
        let spec = SubspaceSpec::random(&s, 2, &mut stream_rng(3, 0)).unwrap();
        let p = build_pencil(&spec, &pol()).unwrap();
        let (a, b) = (&p.a0, &p.a1);
        // det(A + tB) = c0 + c1 t + c2 t² for 2×2 matrices
        let c0 = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
        let c2 = b[(0, 0)] * b[(1, 1)] - b[(0, 1)] * b[(1, 0)];
        let c1 = a[(0, 0)] * b[(1, 1)] + b[(0, 0)] * a[(1, 1)] - a[(0, 1)] * b[(1, 0)] - b[(0, 1)] * a[(1, 0)];
        let disc = (c1 * c1 - c0 * c2 * 4.0).sqrt();
        let mut expected = vec![(-c1 + disc) / (c2 * 2.0), (-c1 - disc) / (c2 * 2.0)];
        let found = enumerate_pv(&spec, &pol()).unwrap();
        let Enumeration::Finite { vectors, .. } = found else { panic!("finite expected") };
        assert_eq!(vectors.len(), 2);
        for v in vectors {
            let t = v.t.unwrap();
            let k = expected
                .iter()
                .position(|e| (e - t).norm() < 1e-8 * e.norm().max(1.0))
                .expect("root matches the quadratic formula");
            expected.remove(k);
        }
    }

    #[test]
    fn regular_pencil_has_nonzero_det() {
        let s = SystemShape::bipartite(2, 3).unwrap();
        let spec = SubspaceSpec::random(&s, 3, &mut stream_rng(5, 2)).unwrap();
        let p = build_pencil(&spec, &pol()).unwrap();
        assert_eq!(p.flag, PencilFlag::Regular);
        for k in 0..5 {
            let t = C64::new(0.3 * k as f64 - 0.5, 0.17 * k as f64);
            assert!(det(&p.at(C64::new(1.0, 0.0), t)).norm() > 1e-8);
        }
    }

    #[test]
    fn first_qubit_zero_block_is_flagged() {
        let s = SystemShape::bipartite(2, 3).unwrap();
        let spec = spec_from(&s, (0..3).map(|j| ket(6, j)).collect());
        let p = build_pencil(&spec, &pol()).unwrap();
        assert_eq!(p.flag, PencilFlag::Degenerate);
        assert!(p.a0.norm() < 1e-12);
        assert!(matches!(enumerate_pv(&spec, &pol()).unwrap(), Enumeration::Infinite { .. }));

        let s2 = SystemShape::bipartite(2, 2).unwrap();
        let spec = spec_from(&s2, vec![ket(4, 0), ket(4, 1)]);
        let e = enumerate_pv(&spec, &pol()).unwrap();
        let Enumeration::Infinite { candidates, .. } = e else { panic!("infinite expected") };
        assert_eq!(candidates.len(), 2);
        for c in candidates {
            assert!(spec.residual(&c) < 1e-12);
        }
    }

    #[test]
    fn identically_singular_pencil() {
        // V^⊥ spanned by |0⟩(|0⟩+|1⟩) and |1⟩(|0⟩+|1⟩): both rows kill y = |0⟩ − |1⟩
        let s = SystemShape::bipartite(2, 2).unwrap();
        let h = 1.0 / 2f64.sqrt();
        let r = |v: &[f64]| DVector::from_iterator(4, v.iter().map(|&x| C64::new(x, 0.0)));
        let spec = spec_from(&s, vec![r(&[h, -h, 0.0, 0.0]), r(&[0.0, 0.0, h, -h])]);
        assert_eq!(build_pencil(&spec, &pol()).unwrap().flag, PencilFlag::Singular);
        assert_eq!(enumerate_pv(&spec, &pol()).unwrap().count(), None);
    }

    #[test]
    fn root_at_infinity_is_found() {
        let s = SystemShape::bipartite(2, 3).unwrap();
        let mut rng = stream_rng(8, 0);
        let y = random_complex_vector(3, &mut rng);
        let mut v = DVector::from_element(6, ZERO);
        v.rows_mut(3, 3).copy_from(&y);
        let spec = spec_from(
            &s,
            vec![v.clone(), random_complex_vector(6, &mut rng), random_complex_vector(6, &mut rng)],
        );
        let e = enumerate_pv(&spec, &pol()).unwrap();
        assert_eq!(e.count(), Some(3));
        let target = ProductVector::new(s.clone(), vec![ket(2, 1), y]).unwrap();
        assert!(e.vectors().iter().any(|p| p.fidelity(&target) > 1.0 - 1e-9));
        let Enumeration::Finite { vectors, .. } = e else { unreachable!() };
        assert!(vectors.iter().any(|v| v.t.is_none() || v.t.unwrap().norm() > 1e6));
    }

    #[test]
    fn basis_change_keeps_the_set() {
        let s = SystemShape::bipartite(2, 4).unwrap();
        let mut rng = stream_rng(21, 0);
        let spec = SubspaceSpec::random(&s, 4, &mut rng).unwrap();
        let g = DMatrix::from_fn(4, 4, |_, _| random_complex_vector(1, &mut rng)[0]);
        let other = spec.rebased(&g).unwrap();
        let a = enumerate_pv(&spec, &pol()).unwrap().vectors();
        let b = enumerate_pv(&other, &pol()).unwrap().vectors();
        assert_eq!(a.len(), b.len());
        for p in &a {
            assert!(b.iter().any(|q| p.fidelity(q) > 1.0 - 1e-7));
        }
    }

    #[test]
    fn batch_histogram() {
        let s = SystemShape::bipartite(2, 3).unwrap();
        let b = enumerate_batch(&s, 50, 0, &pol()).unwrap();
        assert_eq!(b.histogram, BTreeMap::from([(3, 50)]));
        assert!(b.passed);
    }

    #[test]
    fn polytope_data() {
        for m in 2..=4 {
            let s = SystemShape::bipartite(2, m).unwrap();
            let p = example_pi_polytope(&s, 1, &pol()).unwrap();
            assert_eq!(p.vertices.len(), m);
            assert_eq!(p.vector_rank, m);
            assert_eq!(p.affine_dim, p.span_rank - 1);
        }
    }

    #[test]
    fn wrong_shapes() {
        let s = SystemShape::bipartite(3, 3).unwrap();
        let spec = SubspaceSpec::random(&s, 3, &mut stream_rng(0, 0)).unwrap();
        assert!(build_pencil(&spec, &pol()).is_err());
        let s = SystemShape::bipartite(2, 3).unwrap();
        let spec = SubspaceSpec::random(&s, 2, &mut stream_rng(0, 0)).unwrap();
        assert!(enumerate_pv(&spec, &pol()).is_err());
    }
}
