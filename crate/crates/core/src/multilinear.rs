//! Multipartite index arithmetic and product vectors.
//!
//! Multi-indices are row-major with party 0 slowest: the flat index of
//! `(j_0, ..., j_{n-1})` is `((j_0 * d_1 + j_1) * d_2 + ...)`. Party indices in
//! this crate are 0-based, so party `0` is the first tensor factor.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::herm::HermOp;
use crate::linalg::{C64, ONE, ZERO};

/// Components with modulus below this (relative to the factor norm) are
/// treated as zero when fixing the phase gauge.
const GAUGE_ZERO: f64 = 1e-12;

/// Local dimensions `(d_0, ..., d_{n-1})` of a multipartite system.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct SystemShape {
    dims: Vec<usize>,
}

impl SystemShape {
    /// A genuine multipartite shape: at least two parties, each of local
    /// dimension at least two.
    pub fn new(dims: &[usize]) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::InvalidShape(format!(
                "need at least two parties, got {dims:?}"
            )));
        }
        if let Some(d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidShape(format!(
                "local dimension {d} < 2 in {dims:?}"
            )));
        }
        Ok(Self {
            dims: dims.to_vec(),
        })
    }

    /// A single-factor helper shape, used for local operators.
    pub fn single(d: usize) -> Result<Self> {
        if d < 1 {
            return Err(Error::InvalidShape("dimension must be positive".into()));
        }
        Ok(Self { dims: vec![d] })
    }

    pub fn bipartite(d1: usize, d2: usize) -> Result<Self> {
        Self::new(&[d1, d2])
    }

    /// `n` copies of a `local`-dimensional factor.
    pub fn uniform(n: usize, local: usize) -> Result<Self> {
        Self::new(&vec![local; n])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Number of parties.
    pub fn parties(&self) -> usize {
        self.dims.len()
    }

    /// Total dimension `d = ∏ d_i`.
    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// The common local dimension when every party has the same one.
    pub fn uniform_local_dim(&self) -> Option<usize> {
        let d0 = self.dims[0];
        self.dims.iter().all(|&d| d == d0).then_some(d0)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (slot, &d) in out.iter_mut().zip(&self.dims).rev() {
            *slot = flat % d;
            flat /= d;
        }
        out
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&j, &d)| acc * d + j)
    }

    /// Party-wise merge `C_i = A_i ⊗ B_i`.
    pub fn merge(&self, other: &SystemShape) -> Result<SystemShape> {
        if self.parties() != other.parties() {
            return Err(Error::ShapeMismatch(format!(
                "cannot merge {self} with {other}: party counts differ"
            )));
        }
        let dims: Vec<usize> = self.dims.iter().zip(&other.dims).map(|(a, b)| a * b).collect();
        Ok(SystemShape { dims })
    }

    /// Same local dimensions in reverse party order.
    pub fn reversed(&self) -> SystemShape {
        let mut dims = self.dims.clone();
        dims.reverse();
        SystemShape { dims }
    }
}

impl TryFrom<Vec<usize>> for SystemShape {
    type Error = Error;
    fn try_from(dims: Vec<usize>) -> Result<Self> {
        if dims.len() == 1 {
            return SystemShape::single(dims[0]);
        }
        SystemShape::new(&dims)
    }
}

impl From<SystemShape> for Vec<usize> {
    fn from(s: SystemShape) -> Self {
        s.dims
    }
}

impl fmt::Display for SystemShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        write!(f, "{}", parts.join("x"))
    }
}

impl FromStr for SystemShape {
    type Err = Error;

    /// Parses `AxB[xC...]`, also accepting `⊗` as separator.
    fn from_str(s: &str) -> Result<Self> {
        let dims: std::result::Result<Vec<usize>, _> = s
            .split(['x', 'X', '⊗', '*'])
            .map(|p| p.trim().parse::<usize>())
            .collect();
        let dims = dims.map_err(|e| Error::InvalidShape(format!("`{s}`: {e}")))?;
        SystemShape::new(&dims)
    }
}

/// A vector in `ℂ^k` with finite entries. JSON form: `[[re, im], ..]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct ComplexVector(DVector<C64>);

impl TryFrom<Vec<[f64; 2]>> for ComplexVector {
    type Error = Error;
    fn try_from(v: Vec<[f64; 2]>) -> Result<Self> {
        Self::new(v.into_iter().map(|e| C64::new(e[0], e[1])).collect())
    }
}

impl From<ComplexVector> for Vec<[f64; 2]> {
    fn from(v: ComplexVector) -> Self {
        v.0.iter().map(|z| [z.re, z.im]).collect()
    }
}

impl ComplexVector {
    pub fn new(entries: Vec<C64>) -> Result<Self> {
        Self::from_dvector(DVector::from_vec(entries))
    }

    pub fn from_dvector(v: DVector<C64>) -> Result<Self> {
        if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("complex vector"));
        }
        Ok(Self(v))
    }

    pub fn from_real(entries: &[f64]) -> Self {
        Self(DVector::from_iterator(
            entries.len(),
            entries.iter().map(|&x| C64::new(x, 0.0)),
        ))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn as_dvector(&self) -> &DVector<C64> {
        &self.0
    }

    pub fn into_dvector(self) -> DVector<C64> {
        self.0
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &ComplexVector) -> C64 {
        self.0.dotc(&other.0)
    }
}

impl std::ops::Deref for ComplexVector {
    type Target = DVector<C64>;
    fn deref(&self) -> &DVector<C64> {
        &self.0
    }
}

/// `|a_0⟩ ⊗ ... ⊗ |a_{n-1}⟩`, stored factor by factor.
///
/// JSON form: `{"shape": [..], "factors": [[[re, im], ..], ..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProductVectorJson", into = "ProductVectorJson")]
pub struct ProductVector {
    shape: SystemShape,
    factors: Vec<DVector<C64>>,
}

impl ProductVector {
    pub fn new(shape: SystemShape, factors: Vec<DVector<C64>>) -> Result<Self> {
        if factors.len() != shape.parties() {
            return Err(Error::ShapeMismatch(format!(
                "{} factors for a {}-party shape",
                factors.len(),
                shape.parties()
            )));
        }
        for (i, (f, &d)) in factors.iter().zip(shape.dims()).enumerate() {
            if f.len() != d {
                return Err(Error::ShapeMismatch(format!(
                    "factor {i} has length {} but d_{i} = {d}",
                    f.len()
                )));
            }
            if f.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite("product vector factor"));
            }
            if f.norm() == 0.0 {
                return Err(Error::ZeroVector("product vector factor"));
            }
        }
        Ok(Self { shape, factors })
    }

    /// Convenience constructor from real factor entries.
    pub fn from_real(shape: SystemShape, factors: &[&[f64]]) -> Result<Self> {
        let f = factors
            .iter()
            .map(|v| DVector::from_iterator(v.len(), v.iter().map(|&x| C64::new(x, 0.0))))
            .collect();
        Self::new(shape, f)
    }

    /// Draws every factor from the complex standard Gaussian, then
    /// normalizes and gauge-fixes.
    pub fn random<R: Rng + ?Sized>(shape: &SystemShape, rng: &mut R) -> Self {
        let factors = shape
            .dims()
            .iter()
            .map(|&d| loop {
                let v = random_complex_vector(d, rng);
                if v.norm() > 0.0 {
                    break v;
                }
            })
            .collect();
        Self {
            shape: shape.clone(),
            factors,
        }
        .gauge_fixed()
    }

    /// Random product vector whose factors are all real.
    pub fn random_real<R: Rng + ?Sized>(shape: &SystemShape, rng: &mut R) -> Self {
        let factors = shape
            .dims()
            .iter()
            .map(|&d| loop {
                let v = DVector::from_fn(d, |_, _| C64::new(rng.sample(StandardNormal), 0.0));
                if v.norm() > 0.0 {
                    break v;
                }
            })
            .collect();
        Self {
            shape: shape.clone(),
            factors,
        }
        .gauge_fixed()
    }

    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    pub fn factors(&self) -> &[DVector<C64>] {
        &self.factors
    }

    pub fn factor(&self, party: usize) -> &DVector<C64> {
        &self.factors[party]
    }

    pub fn with_factor(&self, party: usize, factor: DVector<C64>) -> Result<Self> {
        let mut factors = self.factors.clone();
        factors[party] = factor;
        Self::new(self.shape.clone(), factors)
    }

    pub fn norm(&self) -> f64 {
        self.factors.iter().map(|f| f.norm()).product()
    }

    /// Each factor scaled to unit norm with its first nonzero component
    /// real and nonnegative. Idempotent and blind to per-factor phases.
    pub fn gauge_fixed(&self) -> Self {
        let factors = self.factors.iter().map(gauge_factor).collect();
        Self {
            shape: self.shape.clone(),
            factors,
        }
    }

    /// Complex conjugate of the factors on the given parties.
    pub fn conjugated_on(&self, parties: &[usize]) -> Self {
        let mut out = self.clone();
        for &p in parties {
            out.factors[p] = out.factors[p].map(|z| z.conj());
        }
        out
    }

    /// Kronecker expansion into `ℂ^d`.
    pub fn expand(&self) -> ComplexVector {
        ComplexVector(kron_vectors(&self.factors))
    }

    /// `|self⟩⟨self|` as a Hermitian operator on the full space.
    pub fn projector(&self) -> HermOp {
        HermOp::projector(&self.shape, self.expand().as_dvector())
    }

    /// `true` when every factor is real up to its gauge phase.
    pub fn is_real(&self, tol: f64) -> bool {
        self.gauge_fixed()
            .factors
            .iter()
            .all(|f| f.iter().all(|z| z.im.abs() <= tol))
    }

    /// `|⟨self|other⟩|² / (‖self‖²‖other‖²)`.
    pub fn fidelity(&self, other: &ProductVector) -> f64 {
        self.factors
            .iter()
            .zip(&other.factors)
            .map(|(a, b)| a.dotc(b).norm_sqr() / (a.norm_squared() * b.norm_squared()))
            .product()
    }

    /// Party-wise composition with another product vector: the factor of
    /// party `i` becomes `a_i ⊗ b_i`.
    pub fn compose(&self, other: &ProductVector) -> Result<ProductVector> {
        let shape = self.shape.merge(&other.shape)?;
        let factors = self
            .factors
            .iter()
            .zip(&other.factors)
            .map(|(a, b)| a.kronecker(b))
            .collect();
        ProductVector::new(shape, factors)
    }

    /// Swaps the two factors of a bipartite product vector.
    pub fn swapped(&self) -> Result<ProductVector> {
        if self.shape.parties() != 2 {
            return Err(Error::Unsupported("swap needs a bipartite vector".into()));
        }
        ProductVector::new(
            self.shape.reversed(),
            vec![self.factors[1].clone(), self.factors[0].clone()],
        )
    }
}

#[derive(Serialize, Deserialize)]
struct ProductVectorJson {
    shape: Vec<usize>,
    factors: Vec<Vec<[f64; 2]>>,
}

impl From<ProductVector> for ProductVectorJson {
    fn from(pv: ProductVector) -> Self {
        Self {
            shape: pv.shape.into(),
            factors: pv
                .factors
                .iter()
                .map(|f| f.iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }
}

impl TryFrom<ProductVectorJson> for ProductVector {
    type Error = Error;
    fn try_from(j: ProductVectorJson) -> Result<Self> {
        let shape = SystemShape::try_from(j.shape)?;
        let factors = j
            .factors
            .iter()
            .map(|f| DVector::from_iterator(f.len(), f.iter().map(|e| C64::new(e[0], e[1]))))
            .collect();
        ProductVector::new(shape, factors)
    }
}

fn gauge_factor(f: &DVector<C64>) -> DVector<C64> {
    let n = f.norm();
    let mut v = f.unscale(n);
    if let Some(z) = v.iter().find(|z| z.norm() > GAUGE_ZERO).copied() {
        let phase = z.conj() / z.norm();
        v *= phase;
        // the pivot is exactly real after the phase rotation
        if let Some(pivot) = v.iter_mut().find(|z| z.norm() > GAUGE_ZERO) {
            *pivot = C64::new(pivot.norm(), 0.0);
        }
    }
    v
}

pub(crate) fn random_complex_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DVector<C64> {
    DVector::from_fn(d, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub(crate) fn kron_vectors(factors: &[DVector<C64>]) -> DVector<C64> {
    factors
        .iter()
        .fold(DVector::from_element(1, ONE), |acc, f| acc.kronecker(f))
}

/// Deterministic product-vector sampler: the same `(shape, seed)` always
/// yields the same vector.
pub fn sample_product_vector(shape: &SystemShape, seed: u64) -> ProductVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ProductVector::random(shape, &mut rng)
}

/// Kronecker expansion of a product vector.
pub fn expand(pv: &ProductVector) -> ComplexVector {
    pv.expand()
}

/// Orthogonal projector onto the symmetric subspace of `⊗^n ℂ^{d_1}`,
/// computed as the average of the `n!` party permutations.
pub fn symmetric_projector(shape: &SystemShape) -> Result<HermOp> {
    if shape.uniform_local_dim().is_none() {
        return Err(Error::InvalidShape(format!(
            "symmetric projector needs equal local dimensions, got {shape}"
        )));
    }
    let n = shape.parties();
    let d = shape.dim();
    let perms = permutations(n);
    let weight = 1.0 / perms.len() as f64;
    let mut m = DMatrix::<C64>::zeros(d, d);
    for row in 0..d {
        let j = shape.multi_index(row);
        for perm in &perms {
            let k: Vec<usize> = perm.iter().map(|&p| j[p]).collect();
            m[(row, shape.flat_index(&k))] += C64::new(weight, 0.0);
        }
    }
    Ok(HermOp::from_hermitian(shape.clone(), m))
}

/// All permutations of `0..n` (Heap's algorithm).
pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        heap(k - 1, a, out);
        for i in 0..(k - 1) {
            if k.is_multiple_of(2) {
                a.swap(i, k - 1);
            } else {
                a.swap(0, k - 1);
            }
            heap(k - 1, a, out);
        }
    }
    let mut a: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    heap(n, &mut a, &mut out);
    out
}

/// `ρ ⊗ σ` regrouped party-wise: system `C_i` combines `A_i` and `B_i`.
pub fn compose(rho: &HermOp, sigma: &HermOp) -> Result<HermOp> {
    let sa = rho.shape();
    let sb = sigma.shape();
    let sc = sa.merge(sb)?;
    let dc = sc.dim();
    let split = |c: usize| -> (usize, usize) {
        let mc = sc.multi_index(c);
        let ma: Vec<usize> = mc.iter().zip(sb.dims()).map(|(&x, &db)| x / db).collect();
        let mb: Vec<usize> = mc.iter().zip(sb.dims()).map(|(&x, &db)| x % db).collect();
        (sa.flat_index(&ma), sb.flat_index(&mb))
    };
    let index: Vec<(usize, usize)> = (0..dc).map(split).collect();
    let a = rho.matrix();
    let b = sigma.matrix();
    let m = DMatrix::from_fn(dc, dc, |r, c| {
        let (ar, br) = index[r];
        let (ac, bc) = index[c];
        a[(ar, ac)] * b[(br, bc)]
    });
    Ok(HermOp::from_hermitian(sc, m))
}

/// The bipartite swap `|i,j⟩ ↦ |j,i⟩` applied by conjugation: the returned
/// operator acts on the reversed shape.
pub fn swap_parties(op: &HermOp) -> Result<HermOp> {
    let shape = op.shape();
    if shape.parties() != 2 {
        return Err(Error::Unsupported("party swap needs a bipartite operator".into()));
    }
    let rev = shape.reversed();
    let d = shape.dim();
    let map: Vec<usize> = (0..d)
        .map(|r| {
            let mut m = rev.multi_index(r);
            m.reverse();
            shape.flat_index(&m)
        })
        .collect();
    let src = op.matrix();
    let m = DMatrix::from_fn(d, d, |r, c| src[(map[r], map[c])]);
    Ok(HermOp::from_hermitian(rev, m))
}

/// Basis vector `|j⟩` of `ℂ^d`.
pub fn basis(d: usize, j: usize) -> DVector<C64> {
    let mut v = DVector::from_element(d, ZERO);
    v[j] = ONE;
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::herm::{is_full, TolPolicy};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn shape_validation_and_indexing() {
        assert!(SystemShape::new(&[2]).is_err());
        assert!(SystemShape::new(&[2, 1]).is_err());
        let s = SystemShape::new(&[2, 3, 2]).unwrap();
        assert_eq!(s.dim(), 12);
        for flat in 0..12 {
            assert_eq!(s.flat_index(&s.multi_index(flat)), flat);
        }
        assert_eq!(s.multi_index(7), vec![1, 0, 1]);
        assert_eq!("2x3".parse::<SystemShape>().unwrap().dims(), &[2, 3]);
        assert_eq!("3⊗3".parse::<SystemShape>().unwrap().dim(), 9);
        assert!("2x".parse::<SystemShape>().is_err());
    }

    #[test]
    fn expand_basis_and_sign_pattern() {
        let s = SystemShape::bipartite(2, 2).unwrap();
        let pv = ProductVector::from_real(s.clone(), &[&[1.0, 0.0], &[1.0, 0.0]]).unwrap();
        let e = expand(&pv);
        assert_eq!(e.as_slice(), &[ONE, ZERO, ZERO, ZERO]);

        let h = 1.0 / 2f64.sqrt();
        let pv = ProductVector::from_real(s, &[&[h, h], &[h, -h]]).unwrap();
        let e = expand(&pv);
        let want = [0.5, -0.5, 0.5, -0.5];
        for (z, w) in e.iter().zip(want) {
            assert!((z - c(w, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn expand_uniform_superposition_in_qutrits() {
        let s = SystemShape::bipartite(3, 3).unwrap();
        let u = 1.0 / 3f64.sqrt();
        let pv = ProductVector::from_real(s, &[&[u, u, u], &[u, u, u]]).unwrap();
        for z in expand(&pv).iter() {
            assert!((z - c(1.0 / 3.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn expand_rejects_mismatched_factors() {
        let s = SystemShape::bipartite(2, 3).unwrap();
        let bad = ProductVector::from_real(s.clone(), &[&[1.0, 0.0], &[1.0, 0.0]]);
        assert!(matches!(bad, Err(Error::ShapeMismatch(_))));
        let zero = ProductVector::from_real(s, &[&[0.0, 0.0], &[1.0, 0.0, 0.0]]);
        assert!(matches!(zero, Err(Error::ZeroVector(_))));
    }

    #[test]
    fn sampler_is_deterministic_and_gauged() {
        let s = SystemShape::new(&[2, 3, 2]).unwrap();
        let a = sample_product_vector(&s, 42);
        let b = sample_product_vector(&s, 42);
        assert_eq!(a, b);
        assert_ne!(a, sample_product_vector(&s, 43));
        for f in a.factors() {
            assert!((f.norm() - 1.0).abs() < 1e-14);
            assert!(f[0].im == 0.0 && f[0].re >= 0.0);
        }
    }

    #[test]
    fn gauge_is_phase_invariant_and_idempotent() {
        let s = SystemShape::bipartite(2, 3).unwrap();
        let pv = sample_product_vector(&s, 7);
        let rotated = ProductVector::new(
            s,
            pv.factors()
                .iter()
                .enumerate()
                .map(|(i, f)| f * C64::from_polar(2.5, 0.7 + i as f64))
                .collect(),
        )
        .unwrap();
        let g = rotated.gauge_fixed();
        for (a, b) in g.factors().iter().zip(pv.factors()) {
            assert!((a - b).norm() < 1e-14);
        }
        assert_eq!(g.gauge_fixed(), g);
    }

    #[test]
    fn gauge_skips_leading_zero_component() {
        let s = SystemShape::bipartite(2, 2).unwrap();
        let pv = ProductVector::new(
            s,
            vec![
                DVector::from_vec(vec![ZERO, c(0.0, 3.0)]),
                DVector::from_vec(vec![c(-1.0, 0.0), c(0.0, 1.0)]),
            ],
        )
        .unwrap()
        .gauge_fixed();
        assert_eq!(pv.factor(0)[1], ONE);
        assert!(pv.factor(1)[0].re > 0.0 && pv.factor(1)[0].im == 0.0);
    }

    #[test]
    fn symmetric_projector_traces_and_fixed_points() {
        for (n, d, tr) in [(2, 2, 3.0), (2, 3, 6.0), (3, 2, 4.0)] {
            let s = SystemShape::uniform(n, d).unwrap();
            let p = symmetric_projector(&s).unwrap();
            assert!((p.trace() - tr).abs() < 1e-12);
            let p2 = p.matrix() * p.matrix();
            assert!((p2 - p.matrix()).iter().all(|z| z.norm() < 1e-12));

            let mut rng = ChaCha8Rng::seed_from_u64(n as u64 * 10 + d as u64);
            let x = random_complex_vector(d, &mut rng);
            let v = kron_vectors(&vec![x; n]);
            assert!((p.matrix() * &v - &v).norm() < 1e-12 * v.norm());
        }
        assert!(symmetric_projector(&SystemShape::bipartite(2, 3).unwrap()).is_err());
    }

    #[test]
    fn compose_identities_and_product_vectors() {
        let sa = SystemShape::bipartite(2, 3).unwrap();
        let sb = SystemShape::bipartite(2, 2).unwrap();
        let id = compose(&HermOp::identity(&sa), &HermOp::identity(&sb)).unwrap();
        assert_eq!(id.shape().dims(), &[4, 6]);
        assert_eq!(id.matrix(), &DMatrix::identity(24, 24));

        let a = sample_product_vector(&sa, 1);
        let b = sample_product_vector(&sb, 2);
        let lhs = compose(&a.projector(), &b.projector()).unwrap();
        let rhs = a.compose(&b).unwrap().projector();
        assert!((lhs.matrix() - rhs.matrix()).norm() < 1e-14);

        let tri = SystemShape::new(&[2, 2, 2]).unwrap();
        assert!(compose(&HermOp::identity(&sa), &HermOp::identity(&tri)).is_err());
    }

    #[test]
    fn compose_of_full_states_is_full() {
        let sa = SystemShape::bipartite(2, 2).unwrap();
        let ia = HermOp::identity(&sa).scale(0.25);
        let ib = HermOp::identity(&sa).scale(0.25);
        let pol = TolPolicy::default();
        assert!(is_full(&compose(&ia, &ib).unwrap(), &pol));
    }

    #[test]
    fn swap_parties_reverses_product_vectors() {
        let s = SystemShape::bipartite(2, 3).unwrap();
        let pv = sample_product_vector(&s, 3);
        let swapped = swap_parties(&pv.projector()).unwrap();
        let expect = pv.swapped().unwrap().projector();
        assert_eq!(swapped.shape().dims(), &[3, 2]);
        assert!((swapped.matrix() - expect.matrix()).norm() < 1e-14);
    }

    #[test]
    fn product_vector_json_round_trip() {
        let s = SystemShape::new(&[2, 3]).unwrap();
        let pv = sample_product_vector(&s, 17);
        let text = serde_json::to_string(&pv).unwrap();
        let back: ProductVector = serde_json::from_str(&text).unwrap();
        assert_eq!(back, pv);
        assert!(serde_json::from_str::<ProductVector>(r#"{"shape":[2,2],"factors":[[[1,0]]]}"#).is_err());
    }

    #[test]
    fn permutation_count() {
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(4).len(), 24);
    }
}
