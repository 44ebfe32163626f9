//! Hermitian operators on a multipartite space and the partial-transpose
//! group acting on them.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, C64};
use crate::multilinear::SystemShape;

/// Construction-time Hermiticity tolerance, relative to `max(1, max|M_jk|)`.
const HERMITIAN_TOL: f64 = 1e-12;

/// Tolerances shared by every rank and positivity decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TolPolicy {
    /// Eigen/singular values at or below `rank_rtol * max(1, max|λ|)` count as zero.
    pub rank_rtol: f64,
    /// PSD iff `λ_min >= -psd_tol * max(1, ‖op‖)`.
    pub psd_tol: f64,
}

impl Default for TolPolicy {
    fn default() -> Self {
        Self {
            rank_rtol: 1e-8,
            psd_tol: 1e-9,
        }
    }
}

impl TolPolicy {
    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !ok(self.rank_rtol) || !ok(self.psd_tol) {
            return Err(Error::InvalidArgument(format!(
                "tolerances must be positive and finite: {self:?}"
            )));
        }
        Ok(())
    }
}

/// A Hermitian matrix tagged with the shape of the space it acts on.
///
/// The stored matrix is always exactly `(M + M†)/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HermOpJson", into = "HermOpJson")]
pub struct HermOp {
    shape: SystemShape,
    m: DMatrix<C64>,
}

impl HermOp {
    /// Validates squareness, finiteness and Hermiticity, then symmetrizes.
    pub fn new(shape: SystemShape, m: DMatrix<C64>) -> Result<Self> {
        let d = shape.dim();
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} matrix for shape {shape} (d = {d})",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("Hermitian operator"));
        }
        let scale = m.iter().fold(1.0f64, |acc, z| acc.max(z.norm()));
        let dev = (&m - m.adjoint()).iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
        if dev > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self::from_hermitian(shape, m))
    }

    /// Symmetrizes `m` without checking it. The caller guarantees the
    /// dimensions match and the input is Hermitian up to rounding.
    pub fn from_hermitian(shape: SystemShape, m: DMatrix<C64>) -> Self {
        debug_assert_eq!(m.nrows(), shape.dim());
        let m = (&m + m.adjoint()).scale(0.5);
        Self { shape, m }
    }

    pub fn from_real(shape: SystemShape, m: &DMatrix<f64>) -> Result<Self> {
        Self::new(shape, m.map(|x| C64::new(x, 0.0)))
    }

    pub fn identity(shape: &SystemShape) -> Self {
        let d = shape.dim();
        Self {
            shape: shape.clone(),
            m: DMatrix::identity(d, d),
        }
    }

    pub fn zeros(shape: &SystemShape) -> Self {
        let d = shape.dim();
        Self {
            shape: shape.clone(),
            m: DMatrix::zeros(d, d),
        }
    }

    /// `|v⟩⟨v|` (not normalized).
    pub fn projector(shape: &SystemShape, v: &DVector<C64>) -> Self {
        Self {
            shape: shape.clone(),
            m: v * v.adjoint(),
        }
    }

    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            shape: self.shape.clone(),
            m: self.m.scale(s),
        }
    }

    /// `alpha * self + beta * other`.
    pub fn lin_comb(&self, alpha: f64, other: &HermOp, beta: f64) -> Result<Self> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch(format!(
                "{} vs {}",
                self.shape, other.shape
            )));
        }
        Ok(Self {
            shape: self.shape.clone(),
            m: self.m.scale(alpha) + other.m.scale(beta),
        })
    }

    pub fn add(&self, other: &HermOp) -> Result<Self> {
        self.lin_comb(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &HermOp) -> Result<Self> {
        self.lin_comb(1.0, other, -1.0)
    }

    /// `⟨v|self|v⟩` (real part; the imaginary part vanishes for Hermitian input).
    pub fn expectation(&self, v: &DVector<C64>) -> f64 {
        v.dotc(&(&self.m * v)).re
    }

    /// Hilbert–Schmidt inner product `tr(self · other)`.
    pub fn hs_inner(&self, other: &HermOp) -> f64 {
        self.m
            .iter()
            .zip(other.m.transpose().iter())
            .map(|(a, b)| (a * b).re)
            .sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_deviation(&self, other: &HermOp) -> f64 {
        self.m
            .iter()
            .zip(other.m.iter())
            .fold(0.0, |acc, (a, b)| acc.max((a - b).norm()))
    }

    /// Whether every entry is real to within `tol`.
    pub fn is_real(&self, tol: f64) -> bool {
        self.m.iter().all(|z| z.im.abs() <= tol)
    }

    /// Entrywise complex conjugate, which equals the full transpose.
    pub fn conj(&self) -> Self {
        Self {
            shape: self.shape.clone(),
            m: self.m.map(|z| z.conj()),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct HermOpJson {
    shape: Vec<usize>,
    entries: Vec<[f64; 2]>,
}

impl From<HermOp> for HermOpJson {
    fn from(op: HermOp) -> Self {
        let d = op.dim();
        let mut entries = Vec::with_capacity(d * d);
        for r in 0..d {
            for c in 0..d {
                let z = op.m[(r, c)];
                entries.push([z.re, z.im]);
            }
        }
        Self {
            shape: op.shape.into(),
            entries,
        }
    }
}

impl TryFrom<HermOpJson> for HermOp {
    type Error = Error;
    fn try_from(j: HermOpJson) -> Result<Self> {
        let shape = SystemShape::try_from(j.shape)?;
        let d = shape.dim();
        if j.entries.len() != d * d {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for dimension {d}",
                j.entries.len()
            )));
        }
        let m = DMatrix::from_row_iterator(d, d, j.entries.iter().map(|e| C64::new(e[0], e[1])));
        HermOp::new(shape, m)
    }
}

/// Spectral decomposition with eigenvalues in descending order; column `k`
/// of `vectors` belongs to `values[k]`.
#[derive(Debug, Clone)]
pub struct EigenData {
    pub values: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

impl EigenData {
    pub fn min(&self) -> f64 {
        *self.values.last().expect("nonempty spectrum")
    }

    pub fn max(&self) -> f64 {
        self.values[0]
    }

    /// Spectral norm `max |λ|`.
    pub fn norm(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn min_vector(&self) -> DVector<C64> {
        self.vectors.column(self.values.len() - 1).into_owned()
    }

    pub fn reconstruct(&self) -> DMatrix<C64> {
        let lam = DMatrix::from_diagonal(&DVector::from_iterator(
            self.values.len(),
            self.values.iter().map(|&x| C64::new(x, 0.0)),
        ));
        &self.vectors * lam * self.vectors.adjoint()
    }

    pub fn rank(&self, policy: &TolPolicy) -> usize {
        linalg::count_above(&self.values, policy.rank_rtol)
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.min() >= -tol * self.norm().max(1.0)
    }
}

pub fn eigh(op: &HermOp) -> Result<EigenData> {
    if op.m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("Hermitian operator"));
    }
    let (values, vectors) = linalg::jacobi_eigh(&op.m);
    Ok(EigenData { values, vectors })
}

fn eigh_finite(op: &HermOp) -> EigenData {
    let (values, vectors) = linalg::jacobi_eigh(&op.m);
    EigenData { values, vectors }
}

/// Number of eigenvalues with `|λ| > rank_rtol * max(1, max|λ|)`.
pub fn numerical_rank(op: &HermOp, policy: &TolPolicy) -> usize {
    eigh_finite(op).rank(policy)
}

pub fn is_psd(op: &HermOp, tol: f64) -> bool {
    eigh_finite(op).is_psd(tol)
}

/// A subset `S` of parties (0-based) selecting `Γ_S`, the transpose on
/// every factor in `S`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TransposeMask {
    shape: SystemShape,
    bits: u64,
}

impl TransposeMask {
    pub fn new(shape: &SystemShape, parties: &[usize]) -> Result<Self> {
        let mut bits = 0u64;
        for &p in parties {
            if p >= shape.parties() {
                return Err(Error::InvalidArgument(format!(
                    "party {p} out of range for shape {shape}"
                )));
            }
            if bits & (1 << p) != 0 {
                return Err(Error::InvalidArgument(format!("party {p} listed twice")));
            }
            bits |= 1 << p;
        }
        Ok(Self {
            shape: shape.clone(),
            bits,
        })
    }

    pub fn from_bits(shape: &SystemShape, bits: u64) -> Result<Self> {
        if shape.parties() < 64 && bits >> shape.parties() != 0 {
            return Err(Error::InvalidArgument(format!(
                "mask {bits:#b} has parties outside {shape}"
            )));
        }
        Ok(Self {
            shape: shape.clone(),
            bits,
        })
    }

    /// All `2^n` elements of the partial-transpose group, identity first.
    pub fn all(shape: &SystemShape) -> Vec<TransposeMask> {
        (0..(1u64 << shape.parties()))
            .map(|bits| TransposeMask {
                shape: shape.clone(),
                bits,
            })
            .collect()
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn contains(&self, party: usize) -> bool {
        self.bits & (1 << party) != 0
    }

    pub fn parties(&self) -> Vec<usize> {
        (0..self.shape.parties()).filter(|&p| self.contains(p)).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.bits == 0
    }
}

impl fmt::Display for TransposeMask {
    /// Physics labelling with 1-based parties: `id`, `Γ1`, `Γ1,3`, ...
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "id");
        }
        let labels: Vec<String> = self.parties().iter().map(|p| (p + 1).to_string()).collect();
        write!(f, "Γ{}", labels.join(","))
    }
}

/// Applies `Γ_S`: for parties in `S` the row and column indices of that
/// factor are exchanged.
pub fn partial_transpose(op: &HermOp, mask: &TransposeMask) -> HermOp {
    if mask.is_identity() {
        return op.clone();
    }
    let shape = op.shape();
    let d = shape.dim();
    // flat = s_part + r_part, where s_part collects the digits in S
    let mut strides = vec![1usize; shape.parties()];
    for i in (0..shape.parties().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * shape.dims()[i + 1];
    }
    let s_part: Vec<usize> = (0..d)
        .map(|flat| {
            let multi = shape.multi_index(flat);
            (0..shape.parties())
                .filter(|&p| mask.contains(p))
                .map(|p| multi[p] * strides[p])
                .sum()
        })
        .collect();
    let src = op.matrix();
    let m = DMatrix::from_fn(d, d, |r, c| {
        let rs = s_part[r];
        let cs = s_part[c];
        src[(r - rs + cs, c - cs + rs)]
    });
    HermOp {
        shape: shape.clone(),
        m,
    }
}

/// `(Φ_1, ..., Φ_d)`: `Φ_k` is the sum of all `k×k` principal minors, i.e.
/// the `k`-th elementary symmetric polynomial of the eigenvalues.
pub fn principal_minor_sums(op: &HermOp) -> Result<Vec<f64>> {
    Ok(elementary_symmetric(&eigh(op)?.values))
}

pub(crate) fn elementary_symmetric(values: &[f64]) -> Vec<f64> {
    let d = values.len();
    let mut e = vec![0.0; d + 1];
    e[0] = 1.0;
    for (count, &lam) in values.iter().enumerate() {
        for k in (1..=count + 1).rev() {
            e[k] += lam * e[k - 1];
        }
    }
    e.remove(0);
    e
}

/// PSD test through the minor sums: every `Φ_k` nonnegative up to a
/// tolerance scaled like `binom(d,k) · ‖op‖^k`.
pub fn psd_by_minor_sums(op: &HermOp, tol: f64) -> Result<bool> {
    let eig = eigh(op)?;
    let scale = eig.norm().max(1.0);
    let phi = elementary_symmetric(&eig.values);
    let d = phi.len() as u64;
    Ok(phi.iter().enumerate().all(|(i, &p)| {
        let k = i as u64 + 1;
        p >= -tol * linalg::binomial(d, k) as f64 * scale.powi(k as i32)
    }))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaskEntry {
    pub mask: String,
    pub min_eigenvalue: f64,
    pub rank: usize,
    pub psd: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PptReport {
    pub is_ppt: bool,
    pub is_full: bool,
    pub masks: Vec<MaskEntry>,
}

/// Eigen-analysis of every partial transpose `Γ_S(op)`.
pub fn ppt_report(op: &HermOp, policy: &TolPolicy) -> PptReport {
    let d = op.dim();
    let masks: Vec<MaskEntry> = TransposeMask::all(op.shape())
        .iter()
        .map(|mask| {
            let eig = eigh_finite(&partial_transpose(op, mask));
            MaskEntry {
                mask: mask.to_string(),
                min_eigenvalue: eig.min(),
                rank: eig.rank(policy),
                psd: eig.is_psd(policy.psd_tol),
            }
        })
        .collect();
    PptReport {
        is_ppt: masks.iter().all(|m| m.psd),
        is_full: masks.iter().all(|m| m.rank == d),
        masks,
    }
}

pub fn is_ppt(op: &HermOp, policy: &TolPolicy) -> bool {
    TransposeMask::all(op.shape())
        .iter()
        .all(|mask| is_psd(&partial_transpose(op, mask), policy.psd_tol))
}

/// Full: every partial transpose, the identity included, has rank `d`.
pub fn is_full(op: &HermOp, policy: &TolPolicy) -> bool {
    let d = op.dim();
    TransposeMask::all(op.shape())
        .iter()
        .all(|mask| numerical_rank(&partial_transpose(op, mask), policy) == d)
}

/// Coordinates of `op` in `ℝ^{d²}`: the diagonal, then `(Re, Im)` of each
/// entry above the diagonal in row-major order.
pub fn real_coordinates(op: &HermOp) -> Vec<f64> {
    let d = op.dim();
    let mut out = Vec::with_capacity(d * d);
    out.extend(op.m.diagonal().iter().map(|z| z.re));
    for r in 0..d {
        for c in (r + 1)..d {
            let z = op.m[(r, c)];
            out.push(z.re);
            out.push(z.im);
        }
    }
    out
}

/// Rank of the real linear span of a family of operators.
pub fn real_span_rank(ops: &[HermOp], policy: &TolPolicy) -> Result<usize> {
    let first = ops.first().ok_or(Error::Empty("operator family"))?;
    if let Some(bad) = ops.iter().find(|o| o.shape() != first.shape()) {
        return Err(Error::ShapeMismatch(format!(
            "{} vs {}",
            first.shape(),
            bad.shape()
        )));
    }
    let cols = first.dim() * first.dim();
    let mut data = Vec::with_capacity(ops.len() * cols);
    for op in ops {
        data.extend(real_coordinates(op));
    }
    let stacked = DMatrix::from_row_slice(ops.len(), cols, &data);
    Ok(linalg::matrix_rank(&stacked, policy.rank_rtol))
}
