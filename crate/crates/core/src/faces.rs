//! Face dimensions of the separable set, measured as span ranks of sampled
//! extreme points and compared against closed-form counts.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::herm::{real_span_rank, HermOp, TolPolicy};
use crate::linalg::{self, binomial, C64};
use crate::multilinear::{
    kron_vectors, random_complex_vector, symmetric_projector, ComplexVector, ProductVector,
    SystemShape,
};

/// Bound on resampling when a draw lands on a degenerate configuration.
pub const MAX_RETRIES: usize = 100;

/// Parallel-safe RNG for sample `index` under a root seed: one ChaCha
/// stream per index.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub enum HyperplaneKind {
    /// The normal is the product vector `|α⟩`.
    Product(ProductVector),
    /// Bipartite normal of the given Schmidt rank.
    SchmidtRank(usize),
    General,
}

/// The hyperplane `V = normal^⊥`.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperplaneSpec {
    shape: SystemShape,
    normal: ComplexVector,
    kind: HyperplaneKind,
}

impl HyperplaneSpec {
    pub fn product(alpha: ProductVector) -> Self {
        let alpha = alpha.gauge_fixed();
        Self {
            shape: alpha.shape().clone(),
            normal: alpha.expand(),
            kind: HyperplaneKind::Product(alpha),
        }
    }

    /// `|0,1⟩ - |1,0⟩` placed in the top-left 2×2 block of a bipartite shape.
    pub fn schmidt_rank2_canonical(shape: &SystemShape) -> Result<Self> {
        if shape.parties() != 2 {
            return Err(Error::InvalidShape(format!(
                "Schmidt rank needs a bipartite shape, got {shape}"
            )));
        }
        let d2 = shape.dims()[1];
        let mut v = DVector::from_element(shape.dim(), C64::new(0.0, 0.0));
        v[1] = C64::new(1.0, 0.0);
        v[d2] = C64::new(-1.0, 0.0);
        Ok(Self {
            shape: shape.clone(),
            normal: ComplexVector::from_dvector(v)?,
            kind: HyperplaneKind::SchmidtRank(2),
        })
    }

    /// Bipartite normal tagged with its numerically measured Schmidt rank.
    pub fn schmidt(shape: &SystemShape, normal: ComplexVector, policy: &TolPolicy) -> Result<Self> {
        if shape.parties() != 2 {
            return Err(Error::InvalidShape(format!(
                "Schmidt rank needs a bipartite shape, got {shape}"
            )));
        }
        let spec = Self::general(shape, normal)?;
        let r = schmidt_rank(&spec.normal, shape, policy);
        Ok(Self {
            kind: HyperplaneKind::SchmidtRank(r),
            ..spec
        })
    }

    pub fn general(shape: &SystemShape, normal: ComplexVector) -> Result<Self> {
        if normal.len() != shape.dim() {
            return Err(Error::ShapeMismatch(format!(
                "normal of length {} for shape {shape}",
                normal.len()
            )));
        }
        if normal.norm() == 0.0 {
            return Err(Error::ZeroVector("hyperplane normal"));
        }
        Ok(Self {
            shape: shape.clone(),
            normal,
            kind: HyperplaneKind::General,
        })
    }

    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    pub fn normal(&self) -> &ComplexVector {
        &self.normal
    }

    pub fn kind(&self) -> &HyperplaneKind {
        &self.kind
    }

    pub fn kind_label(&self) -> String {
        match &self.kind {
            HyperplaneKind::Product(_) => "product-hyperplane".into(),
            HyperplaneKind::SchmidtRank(r) => format!("rank{r}-hyperplane"),
            HyperplaneKind::General => "general-hyperplane".into(),
        }
    }

    /// Closed-form face dimension where one is known.
    pub fn formula_dim(&self) -> Option<usize> {
        let d = self.shape.dim();
        match self.kind {
            HyperplaneKind::Product(_) => {
                let prod: usize = self.shape.dims().iter().map(|&di| 2 * di - 1).product();
                Some(d * d - 1 - prod)
            }
            HyperplaneKind::SchmidtRank(2) if self.shape.parties() == 2 => Some(d * (d - 2)),
            _ => None,
        }
    }

    /// `|⟨normal|v⟩|` normalized by both norms.
    pub fn residual(&self, pv: &ProductVector) -> f64 {
        let v = pv.expand();
        self.normal.inner(&v).norm() / (self.normal.norm() * v.norm())
    }
}

/// Schmidt rank of a bipartite vector: rank of its `d_1 × d_2` reshaping.
pub fn schmidt_rank(v: &DVector<C64>, shape: &SystemShape, policy: &TolPolicy) -> usize {
    let (d1, d2) = (shape.dims()[0], shape.dim() / shape.dims()[0]);
    let m = DMatrix::from_row_slice(d1, d2, v.as_slice());
    linalg::matrix_rank(&m, policy.rank_rtol)
}

fn orthogonal_complement_draw<R: Rng + ?Sized>(
    constraint: &DVector<C64>,
    rng: &mut R,
) -> Option<DVector<C64>> {
    // returns g projected onto constraint^⊥, or None for a zero result
    let n = constraint.norm();
    let g = random_complex_vector(constraint.len(), rng);
    let x = if n > 0.0 {
        let u = constraint.unscale(n);
        let overlap = u.dotc(&g);
        &g - u * overlap
    } else {
        g
    };
    (x.norm() > 1e-12).then_some(x)
}

/// One product vector in `V = normal^⊥`, drawn with `rng`.
pub fn sample_pv_in_hyperplane_with<R: Rng + ?Sized>(
    spec: &HyperplaneSpec,
    rng: &mut R,
) -> Result<ProductVector> {
    let shape = &spec.shape;
    let n = shape.parties();
    for _ in 0..MAX_RETRIES {
        let mut pv = ProductVector::random(shape, rng);
        match &spec.kind {
            HyperplaneKind::Product(alpha) => {
                let party = rng.random_range(0..n);
                let Some(x) = orthogonal_complement_draw(alpha.factor(party), rng) else {
                    continue;
                };
                pv = pv.with_factor(party, x)?;
            }
            _ => {
                // ⟨ψ|x ⊗ r⟩ = Σ_j a_j x_j with a_j = Σ_k conj(ψ_jk) r_k
                let d1 = shape.dims()[0];
                let rest = shape.dim() / d1;
                let r = kron_vectors(&pv.factors()[1..]);
                let psi = spec.normal.as_dvector();
                let a = DVector::from_fn(d1, |j, _| {
                    (0..rest).map(|k| psi[j * rest + k].conj() * r[k]).sum::<C64>()
                });
                if a.norm() <= 1e-12 * psi.norm() * r.norm() {
                    continue;
                }
                let Some(x) = orthogonal_complement_draw(&a.map(|z| z.conj()), rng) else {
                    continue;
                };
                pv = pv.with_factor(0, x)?;
            }
        }
        return Ok(pv.gauge_fixed());
    }
    Err(Error::SamplingFailed(MAX_RETRIES))
}

pub fn sample_pv_in_hyperplane(spec: &HyperplaneSpec, seed: u64) -> Result<ProductVector> {
    sample_pv_in_hyperplane_with(spec, &mut ChaCha8Rng::seed_from_u64(seed))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceDimReport {
    pub shape: String,
    pub kind: String,
    pub samples: usize,
    pub span_rank: usize,
    pub face_dim: usize,
    pub formula_dim: Option<usize>,
    pub agrees: Option<bool>,
    /// The rank still grew over the last third of the samples.
    pub unstable: bool,
}

impl FaceDimReport {
    fn from_projectors(
        shape: &SystemShape,
        kind: String,
        projectors: &[HermOp],
        formula_dim: Option<usize>,
        policy: &TolPolicy,
    ) -> Result<Self> {
        let span_rank = real_span_rank(projectors, policy)?;
        let head = (2 * projectors.len()).div_ceil(3).max(1);
        let head_rank = real_span_rank(&projectors[..head], policy)?;
        let face_dim = span_rank.saturating_sub(1);
        Ok(Self {
            shape: shape.to_string(),
            kind,
            samples: projectors.len(),
            span_rank,
            face_dim,
            agrees: formula_dim.map(|f| f == face_dim),
            formula_dim,
            unstable: head_rank != span_rank,
        })
    }

    /// Formula known, matched, and the sampled rank saturated.
    pub fn passed(&self) -> bool {
        self.agrees.unwrap_or(true) && !self.unstable
    }
}

/// Default sample count `3·d²`.
pub fn default_samples(shape: &SystemShape) -> usize {
    3 * shape.dim() * shape.dim()
}

pub fn face_dim_hyperplane(
    spec: &HyperplaneSpec,
    samples: usize,
    seed: u64,
    policy: &TolPolicy,
) -> Result<FaceDimReport> {
    let min = default_samples(&spec.shape);
    if samples < min {
        return Err(Error::InvalidArgument(format!(
            "need at least 3·d² = {min} samples, got {samples}"
        )));
    }
    let projectors = (0..samples as u64)
        .into_par_iter()
        .map(|i| sample_pv_in_hyperplane_with(spec, &mut stream_rng(seed, i)).map(|pv| pv.projector()))
        .collect::<Result<Vec<_>>>()?;
    FaceDimReport::from_projectors(
        &spec.shape,
        spec.kind_label(),
        &projectors,
        spec.formula_dim(),
        policy,
    )
}

fn require_uniform(shape: &SystemShape) -> Result<usize> {
    shape.uniform_local_dim().ok_or_else(|| {
        Error::InvalidShape(format!("needs equal local dimensions, got {shape}"))
    })
}

fn power_projectors(
    shape: &SystemShape,
    samples: usize,
    seed: u64,
    real: bool,
) -> Vec<HermOp> {
    let d1 = shape.dims()[0];
    let n = shape.parties();
    (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i);
            let x = if real {
                DVector::from_fn(d1, |_, _| C64::new(rng.sample(StandardNormal), 0.0))
            } else {
                random_complex_vector(d1, &mut rng)
            };
            let x = x.unscale(x.norm());
            HermOp::projector(shape, &kron_vectors(&vec![x; n]))
        })
        .collect()
}

/// Face spanned by `|x,…,x⟩⟨x,…,x|` over complex unit `x`.
pub fn symmetric_face_dim(shape: &SystemShape, seed: u64, policy: &TolPolicy) -> Result<FaceDimReport> {
    let d1 = require_uniform(shape)? as u64;
    let n = shape.parties() as u64;
    let sym = binomial(n + d1 - 1, n) as usize;
    let projectors = power_projectors(shape, default_samples(shape), seed, false);
    FaceDimReport::from_projectors(
        shape,
        "symmetric-face".into(),
        &projectors,
        Some(sym * sym - 1),
        policy,
    )
}

/// Face spanned by `|x,…,x⟩⟨x,…,x|` over real unit `x`.
pub fn real_symmetric_face_dim(
    shape: &SystemShape,
    seed: u64,
    policy: &TolPolicy,
) -> Result<FaceDimReport> {
    let d1 = require_uniform(shape)? as u64;
    let n = shape.parties() as u64;
    let theta = binomial(2 * n + d1 - 1, 2 * n) as usize;
    let projectors = power_projectors(shape, default_samples(shape), seed, true);
    FaceDimReport::from_projectors(
        shape,
        "real-symmetric-face".into(),
        &projectors,
        Some(theta - 1),
        policy,
    )
}

/// Sorted multi-index `l_1 ≤ … ≤ l_m` with entries below `d_1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IndexMultiset(Vec<usize>);

impl IndexMultiset {
    pub fn new(entries: Vec<usize>, d1: usize) -> Result<Self> {
        if entries.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidArgument(format!("{entries:?} is not sorted")));
        }
        if entries.iter().any(|&e| e >= d1) {
            return Err(Error::InvalidArgument(format!(
                "{entries:?} has an entry ≥ {d1}"
            )));
        }
        Ok(Self(entries))
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    /// All multisets of size `m` over `0..d1`, in lexicographic order.
    pub fn all(m: usize, d1: usize) -> Vec<IndexMultiset> {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(m);
        fn rec(m: usize, d1: usize, lo: usize, cur: &mut Vec<usize>, out: &mut Vec<IndexMultiset>) {
            if cur.len() == m {
                out.push(IndexMultiset(cur.clone()));
                return;
            }
            for v in lo..d1 {
                cur.push(v);
                rec(m, d1, v, cur, out);
                cur.pop();
            }
        }
        rec(m, d1, 0, &mut cur, &mut out);
        out
    }
}

/// The operators `ρ[l] = Σ |j⟩⟨k|` over all `(j, k)` whose joint digits
/// sort to `l`, one per multiset of size `2n`, in the order of
/// [`IndexMultiset::all`].
pub fn theta_basis(shape: &SystemShape) -> Result<Vec<HermOp>> {
    let d1 = require_uniform(shape)?;
    let n = shape.parties();
    let labels = IndexMultiset::all(2 * n, d1);
    let position: HashMap<Vec<usize>, usize> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.0.clone(), i))
        .collect();
    let d = shape.dim();
    let mut mats = vec![DMatrix::<C64>::zeros(d, d); labels.len()];
    let digits: Vec<Vec<usize>> = (0..d).map(|f| shape.multi_index(f)).collect();
    for r in 0..d {
        for c in 0..d {
            let mut key: Vec<usize> = digits[r].iter().chain(&digits[c]).copied().collect();
            key.sort_unstable();
            mats[position[&key]][(r, c)] = C64::new(1.0, 0.0);
        }
    }
    Ok(mats
        .into_iter()
        .map(|m| HermOp::from_hermitian(shape.clone(), m))
        .collect())
}

/// Distance from `op` to the span of the (mutually orthogonal) theta basis.
pub fn theta_residual(op: &HermOp, basis: &[HermOp]) -> f64 {
    let mut rest = op.clone();
    for b in basis {
        let coeff = op.hs_inner(b) / b.hs_inner(b);
        rest = rest.lin_comb(1.0, b, -coeff).expect("same shape");
    }
    rest.matrix().norm()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimCheck {
    pub measured: usize,
    pub formula: usize,
}

impl DimCheck {
    pub fn ok(&self) -> bool {
        self.measured == self.formula
    }
}

/// Measured dimensions of `H_s`, `H_s^re` and `H_s^Θ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymSubspaceDims {
    pub h_s: DimCheck,
    pub h_s_re: DimCheck,
    pub h_s_theta: DimCheck,
}

/// All six subspaces of `H` tracked for equal local dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceTower {
    pub shape: String,
    pub h: DimCheck,
    pub h_re: DimCheck,
    pub h_s: DimCheck,
    pub h_theta: DimCheck,
    pub h_s_theta: DimCheck,
    pub h_s_re: DimCheck,
}

impl SubspaceTower {
    pub fn all_ok(&self) -> bool {
        [self.h, self.h_re, self.h_s, self.h_theta, self.h_s_theta, self.h_s_re]
            .iter()
            .all(DimCheck::ok)
    }
}

fn span_of<F>(shape: &SystemShape, target: usize, seed: u64, policy: &TolPolicy, draw: F) -> Result<usize>
where
    F: Fn(&mut ChaCha8Rng) -> DVector<C64> + Sync,
{
    let count = 2 * target + 8;
    let ops: Vec<HermOp> = (0..count as u64)
        .into_par_iter()
        .map(|i| HermOp::projector(shape, &draw(&mut stream_rng(seed, i))))
        .collect();
    real_span_rank(&ops, policy)
}

fn real_gaussian(d: usize, rng: &mut ChaCha8Rng) -> DVector<C64> {
    DVector::from_fn(d, |_, _| C64::new(rng.sample(StandardNormal), 0.0))
}

pub fn real_sym_subspace_dims(
    shape: &SystemShape,
    seed: u64,
    policy: &TolPolicy,
) -> Result<SymSubspaceDims> {
    let t = subspace_tower(shape, seed, policy)?;
    Ok(SymSubspaceDims {
        h_s: t.h_s,
        h_s_re: t.h_s_re,
        h_s_theta: t.h_s_theta,
    })
}

/// Ranks of sampled spanning sets for `H`, `H^re`, `H_s`, `H^Θ`, `H_s^Θ`
/// and `H_s^re`, each paired with its closed form.
pub fn subspace_tower(shape: &SystemShape, seed: u64, policy: &TolPolicy) -> Result<SubspaceTower> {
    let d1 = require_uniform(shape)?;
    let n = shape.parties();
    let d = shape.dim();
    let sym = binomial((n + d1 - 1) as u64, n as u64) as usize;
    let theta_sym = binomial((2 * n + d1 - 1) as u64, (2 * n) as u64) as usize;
    let theta: usize = shape.dims().iter().map(|&k| k * (k + 1) / 2).product();
    let ps = symmetric_projector(shape)?.into_matrix();

    let h = DimCheck {
        measured: span_of(shape, d * d, seed, policy, |rng| random_complex_vector(d, rng))?,
        formula: d * d,
    };
    let h_re = DimCheck {
        measured: span_of(shape, d * (d + 1) / 2, seed ^ 1, policy, |rng| real_gaussian(d, rng))?,
        formula: d * (d + 1) / 2,
    };
    let h_s = DimCheck {
        measured: span_of(shape, sym * sym, seed ^ 2, policy, |rng| {
            &ps * random_complex_vector(d, rng)
        })?,
        formula: sym * sym,
    };
    let h_theta = DimCheck {
        measured: span_of(shape, theta, seed ^ 3, policy, |rng| {
            ProductVector::random_real(shape, rng).expand().into_dvector()
        })?,
        formula: theta,
    };
    let h_s_theta = DimCheck {
        measured: span_of(shape, theta_sym, seed ^ 4, policy, |rng| {
            let x = real_gaussian(d1, rng);
            kron_vectors(&vec![x; n])
        })?,
        formula: theta_sym,
    };
    let h_s_re = DimCheck {
        measured: span_of(shape, sym * (sym + 1) / 2, seed ^ 5, policy, |rng| {
            &ps * real_gaussian(d, rng)
        })?,
        formula: sym * (sym + 1) / 2,
    };
    Ok(SubspaceTower {
        shape: shape.to_string(),
        h,
        h_re,
        h_s,
        h_theta,
        h_s_theta,
        h_s_re,
    })
}

/// Smallest face containing two product projectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairFace {
    /// At least two parties differ: the face is the segment between them.
    Segment,
    /// Exactly one (0-based) party differs: the face is the Bloch ball of
    /// states on `span{a_i, b_i}` tensored with the common factors.
    BlochFamily(usize),
}

const PARALLEL_TOL: f64 = 1e-10;

pub fn face_of_pair(a: &ProductVector, b: &ProductVector) -> Result<PairFace> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch(format!("{} vs {}", a.shape(), b.shape())));
    }
    if a.fidelity(b) > 1.0 - PARALLEL_TOL {
        return Err(Error::InvalidArgument(
            "product vectors are parallel".into(),
        ));
    }
    let differing: Vec<usize> = a
        .factors()
        .iter()
        .zip(b.factors())
        .enumerate()
        .filter(|(_, (x, y))| {
            x.dotc(y).norm_sqr() / (x.norm_squared() * y.norm_squared()) < 1.0 - PARALLEL_TOL
        })
        .map(|(i, _)| i)
        .collect();
    Ok(match differing.as_slice() {
        [i] => PairFace::BlochFamily(*i),
        _ => PairFace::Segment,
    })
}

/// `N = (Σ(d_i − 1))! / ∏(d_i − 1)!`, the number of product vectors in a
/// generic subspace of dimension `d − Σ(d_i − 1)`.
pub fn count_generic_pv(shape: &SystemShape) -> BigUint {
    let factorial = |k: usize| -> BigUint { (1..=k).map(BigUint::from).product() };
    let total: usize = shape.dims().iter().map(|d| d - 1).sum();
    let denom: BigUint = shape.dims().iter().map(|d| factorial(d - 1)).product();
    factorial(total) / denom
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::herm::{partial_transpose, TransposeMask};

    fn pol() -> TolPolicy {
        TolPolicy::default()
    }

    fn shape(dims: &[usize]) -> SystemShape {
        SystemShape::new(dims).unwrap()
    }

    fn ket_pv(s: &SystemShape, digits: &[usize]) -> ProductVector {
        let factors = digits
            .iter()
            .zip(s.dims())
            .map(|(&j, &d)| crate::multilinear::basis(d, j))
            .collect();
        ProductVector::new(s.clone(), factors).unwrap()
    }

    #[test]
    fn hyperplane_sampler_respects_basis_normal() {
        let s = shape(&[2, 2]);
        let spec = HyperplaneSpec::product(ket_pv(&s, &[0, 0]));
        for seed in 0..50 {
            let pv = sample_pv_in_hyperplane(&spec, seed).unwrap();
            assert!(pv.expand()[0].norm() < 1e-10);
        }
    }

    #[test]
    fn product_sampler_makes_one_factor_orthogonal() {
        let s = shape(&[2, 3, 2]);
        let alpha = crate::multilinear::sample_product_vector(&s, 11);
        let spec = HyperplaneSpec::product(alpha.clone());
        for seed in 0..50 {
            let pv = sample_pv_in_hyperplane(&spec, seed).unwrap();
            let orth = (0..3)
                .filter(|&i| alpha.factor(i).dotc(pv.factor(i)).norm() < 1e-10)
                .count();
            assert!(orth >= 1);
            assert!(spec.residual(&pv) < 1e-10);
        }
    }

    #[test]
    fn general_sampler_on_antisymmetric_normal() {
        let s = shape(&[2, 2]);
        let spec = HyperplaneSpec::schmidt_rank2_canonical(&s).unwrap();
        for seed in 0..50 {
            let pv = sample_pv_in_hyperplane(&spec, seed).unwrap();
            let (x, y) = (pv.factor(0), pv.factor(1));
            assert!((x[0] * y[1] - x[1] * y[0]).norm() < 1e-10);
        }
    }

    #[test]
    fn schmidt_tagging() {
        let s = shape(&[3, 3]);
        let pol = pol();
        let canonical = HyperplaneSpec::schmidt_rank2_canonical(&s).unwrap();
        let tagged = HyperplaneSpec::schmidt(&s, canonical.normal().clone(), &pol).unwrap();
        assert_eq!(tagged.kind(), &HyperplaneKind::SchmidtRank(2));
        assert_eq!(tagged.formula_dim(), Some(63));
    }

    #[test]
    fn small_face_dimensions_match_formulas() {
        let pol = pol();
        let s = shape(&[2, 2]);
        let alpha = crate::multilinear::sample_product_vector(&s, 1);
        let r = face_dim_hyperplane(&HyperplaneSpec::product(alpha), 48, 7, &pol).unwrap();
        assert_eq!((r.face_dim, r.formula_dim), (6, Some(6)));
        assert!(r.passed());
        let spec = HyperplaneSpec::schmidt_rank2_canonical(&s).unwrap();
        let r = face_dim_hyperplane(&spec, 48, 7, &pol).unwrap();
        assert_eq!((r.face_dim, r.formula_dim), (8, Some(8)));
        assert!(face_dim_hyperplane(&spec, 10, 7, &pol).is_err());
    }

    #[test]
    fn symmetric_faces() {
        let pol = pol();
        for (dims, want) in [(vec![2, 2], 8), (vec![3, 3], 35), (vec![2, 2, 2], 15)] {
            let r = symmetric_face_dim(&shape(&dims), 3, &pol).unwrap();
            assert_eq!(r.face_dim, want, "{dims:?}");
            assert!(r.passed());
        }
        assert!(symmetric_face_dim(&shape(&[2, 3]), 3, &pol).is_err());
    }

    #[test]
    fn theta_basis_properties() {
        for (dims, count) in [(vec![3, 3], 15), (vec![2, 2], 5), (vec![2, 2, 2], 7)] {
            let s = shape(&dims);
            let basis = theta_basis(&s).unwrap();
            assert_eq!(basis.len(), count);
            for (i, a) in basis.iter().enumerate() {
                for mask in TransposeMask::all(&s) {
                    assert!(partial_transpose(a, &mask).max_deviation(a) < 1e-12);
                }
                for b in &basis[i + 1..] {
                    assert!(a.hs_inner(b).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn real_symmetric_faces_live_in_theta_span() {
        let pol = pol();
        let s = shape(&[3, 3]);
        let r = real_symmetric_face_dim(&s, 5, &pol).unwrap();
        assert_eq!(r.face_dim, 14);
        assert_eq!(real_symmetric_face_dim(&shape(&[2, 2]), 5, &pol).unwrap().face_dim, 4);

        let basis = theta_basis(&s).unwrap();
        let mut rng = stream_rng(9, 0);
        for _ in 0..20 {
            let x = real_gaussian(3, &mut rng);
            let op = HermOp::projector(&s, &kron_vectors(&[x.clone(), x]));
            assert!(theta_residual(&op, &basis) < 1e-10);
        }
    }

    #[test]
    fn symmetric_subspace_dims() {
        let pol = pol();
        for (dims, want) in [
            (vec![3, 3], (36, 21, 15)),
            (vec![2, 2], (9, 6, 5)),
            (vec![2, 2, 2], (16, 10, 7)),
        ] {
            let r = real_sym_subspace_dims(&shape(&dims), 1, &pol).unwrap();
            assert_eq!(
                (r.h_s.measured, r.h_s_re.measured, r.h_s_theta.measured),
                want,
                "{dims:?}"
            );
        }
    }

    #[test]
    fn pair_faces() {
        let s = shape(&[2, 2]);
        let a = ket_pv(&s, &[0, 0]);
        assert_eq!(face_of_pair(&a, &ket_pv(&s, &[1, 1])).unwrap(), PairFace::Segment);
        assert_eq!(
            face_of_pair(&a, &ket_pv(&s, &[0, 1])).unwrap(),
            PairFace::BlochFamily(1)
        );
        let h = 1.0 / 2f64.sqrt();
        let plus = ProductVector::from_real(s.clone(), &[&[1.0, 0.0], &[h, h]]).unwrap();
        assert_eq!(face_of_pair(&a, &plus).unwrap(), PairFace::BlochFamily(1));
        assert_eq!(face_of_pair(&plus, &a).unwrap(), PairFace::BlochFamily(1));
        assert!(face_of_pair(&a, &a).is_err());
    }

    #[test]
    fn generic_counts() {
        for (dims, n) in [(vec![2, 2], 2u32), (vec![3, 3], 6), (vec![2, 2, 2], 6), (vec![2, 4], 4)] {
            assert_eq!(count_generic_pv(&shape(&dims)), BigUint::from(n));
        }
        let big = count_generic_pv(&shape(&[20, 20, 20]));
        assert_eq!(big.to_string(), "22514366432046593564460000");
    }
}
