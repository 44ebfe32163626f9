//! A one-parameter family `W_b`, `b ∈ [0, ∞]`, of trace-one two-qutrit
//! entanglement witnesses together with the checks that certify them.
//!
//! `W_b = ¼ I − (1+b)²/(12q) Σ_{i≤6} |z_i⟩⟨z_i| − 3(1−3b+b²)/(16q) Σ_{i>6} |z_i⟩⟨z_i|`
//! with `q = 1 − b + b²` and ten real product vectors `z_i`.

pub mod cyclic;
pub mod seesaw;

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::faces::stream_rng;
use crate::herm::{eigh, HermOp, TolPolicy};
use crate::linalg::{self, C64};
use crate::multilinear::{basis, random_complex_vector, swap_parties, ComplexVector, ProductVector, SystemShape};

pub use cyclic::{cyclic_gap, cyclic_survey, CyclicParams, CyclicReport};
pub use seesaw::{
    seesaw_all, seesaw_from, seesaw_min, seesaw_polish, SeesawResult, SeesawTrace, DEFAULT_STARTS,
};


/// A negative eigenvalue must lie below `-NEG_EIG_TOL * max(1, ‖W‖)`.
pub const NEG_EIG_TOL: f64 = 1e-6;
/// Product expectations down to `-PRODUCT_TOL` count as nonnegative.
pub const PRODUCT_TOL: f64 = 1e-8;
/// A see-saw result with value at most this belongs to the zero set.
pub const ZERO_TOL: f64 = 1e-8;
/// Zero-set points closer than this fidelity gap are merged.
pub const CLUSTER_FIDELITY: f64 = 1.0 - 1e-6;
/// Start count for zero-set recovery; more than [`DEFAULT_STARTS`] since
/// every one of up to ten clusters has to be hit.
/// Second, coarser merge for clusters left apart by slow convergence.
pub const MERGE_FIDELITY: f64 = 1.0 - 1e-3;
pub const ZERO_SET_STARTS: usize = 1024;

/// A point of `[0, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BParam {
    Finite(f64),
    Infinity,
}

impl BParam {
    pub fn new(b: f64) -> Result<Self> {
        if b.is_nan() || b < 0.0 {
            return Err(Error::InvalidArgument(format!("b must lie in [0, ∞], got {b}")));
        }
        Ok(if b.is_infinite() {
            BParam::Infinity
        } else {
            BParam::Finite(b)
        })
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            BParam::Finite(b) => Some(b),
            BParam::Infinity => None,
        }
    }

    /// `b ∈ {0, ∞}`, where three pairs of zero vectors coincide.
    pub fn is_endpoint(&self) -> bool {
        matches!(self, BParam::Infinity | BParam::Finite(0.0))
    }

    pub fn as_f64(&self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl fmt::Display for BParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BParam::Finite(b) => write!(f, "{b}"),
            BParam::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for BParam {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(BParam::Infinity),
            t => {
                let b: f64 = t
                    .parse()
                    .map_err(|e| Error::InvalidArgument(format!("b = `{t}`: {e}")))?;
                BParam::new(b)
            }
        }
    }
}

impl Serialize for BParam {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            BParam::Finite(b) => s.serialize_f64(*b),
            BParam::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for BParam {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(b) => BParam::new(b),
            Raw::Text(t) => t.parse(),
        }
        .map_err(serde::de::Error::custom)
    }
}

/// The 50-point grid: `0`, `∞` and 48 log-spaced values in `[10⁻², 10²]`.
pub fn default_b_grid() -> Vec<BParam> {
    let mut grid = vec![BParam::Finite(0.0), BParam::Infinity];
    grid.extend((0..48).map(|k| BParam::Finite(10f64.powf(-2.0 + 4.0 * k as f64 / 47.0))));
    grid
}

pub fn qutrit_pair() -> SystemShape {
    SystemShape::bipartite(3, 3).expect("3x3 is a valid shape")
}

#[derive(Debug, Clone)]
pub struct WitnessFamilyPoint {
    pub b: BParam,
    pub w: HermOp,
    /// Ten real product vectors with `⟨z|W_b|z⟩ = 0`, seven at the endpoints.
    pub zero_vectors: Vec<ProductVector>,
}

fn real_factor(v: [f64; 3]) -> DVector<C64> {
    DVector::from_iterator(3, v.iter().map(|&x| C64::new(x, 0.0)))
}

/// `z_1, …, z_10` at finite `b`, normalized, in their usual order.
pub fn z_vectors(b: f64) -> Vec<ProductVector> {
    let shape = qutrit_pair();
    let r = b.sqrt();
    let mut out = Vec::with_capacity(10);
    for shift in 0..3 {
        for sign in [1.0, -1.0] {
            // (|k⟩ ± √b|k+1⟩) ⊗ (±√b|k⟩ + |k+1⟩) / (1+b)
            let mut x = [0.0; 3];
            let mut y = [0.0; 3];
            x[shift] = 1.0;
            x[(shift + 1) % 3] = sign * r;
            y[shift] = sign * r;
            y[(shift + 1) % 3] = 1.0;
            let s = 1.0 / (1.0 + b).sqrt();
            let f = |v: [f64; 3]| real_factor([v[0] * s, v[1] * s, v[2] * s]);
            out.push(ProductVector::new(shape.clone(), vec![f(x), f(y)]).expect("nonzero"));
        }
    }
    let third = 1.0 / 3f64.sqrt();
    for v in [[1.0, 1.0, 1.0], [1.0, 1.0, -1.0], [1.0, -1.0, 1.0], [-1.0, 1.0, 1.0]] {
        let f = real_factor([v[0] * third, v[1] * third, v[2] * third]);
        out.push(ProductVector::new(shape.clone(), vec![f.clone(), f]).expect("nonzero"));
    }
    out
}

fn wb_finite(b: f64) -> HermOp {
    let shape = qutrit_pair();
    let q = 1.0 - b + b * b;
    let c1 = (1.0 + b).powi(2) / (12.0 * q);
    let c2 = 3.0 * (1.0 - 3.0 * b + b * b) / (16.0 * q);
    let mut m = DMatrix::<C64>::identity(9, 9).scale(0.25);
    for (i, z) in z_vectors(b).iter().enumerate() {
        let v = z.expand().into_dvector();
        let c = if i < 6 { c1 } else { c2 };
        m -= (&v * v.adjoint()).scale(c);
    }
    HermOp::from_hermitian(shape, m)
}

/// `W_b` and its listed zero vectors; `b = ∞` is the party swap of `W_0`.
pub fn make_wb(b: BParam) -> WitnessFamilyPoint {
    let (w, mut zs) = match b {
        BParam::Finite(b) => (wb_finite(b), z_vectors(b)),
        BParam::Infinity => {
            let w = swap_parties(&wb_finite(0.0)).expect("bipartite");
            let zs = z_vectors(0.0)
                .iter()
                .map(|z| z.swapped().expect("bipartite"))
                .collect();
            (w, zs)
        }
    };
    if b.is_endpoint() {
        // z_2, z_4, z_6 coincide with z_1, z_3, z_5
        zs = zs
            .into_iter()
            .enumerate()
            .filter(|(i, _)| !(*i < 6 && i % 2 == 1))
            .map(|(_, z)| z)
            .collect();
    }
    WitnessFamilyPoint {
        b,
        w,
        zero_vectors: zs.into_iter().map(|z| z.gauge_fixed()).collect(),
    }
}

/// Roots of the factored characteristic polynomial, as eigenvalues of the
/// rescaled operator `6(1−b+b²) W_b`, in descending order.
pub fn charpoly_roots(b: f64) -> Vec<f64> {
    let lin = (3.0 - 5.0 * b + 3.0 * b * b) / 2.0;
    let s = 1.0 + b * b;
    let c0 = -1.0 + 2.0 * b + b * b + 2.0 * b.powi(3) - b.powi(4);
    let disc = (s * s - c0).sqrt();
    let (hi, lo) = ((s + disc) / 2.0, (s - disc) / 2.0);
    let mut roots = vec![-b, lin, lin, hi, hi, hi, lo, lo, lo];
    roots.sort_by(|x, y| y.total_cmp(x));
    roots
}

/// Largest mismatch between the spectrum of `6(1−b+b²) W_b` and the
/// analytic roots, matched after sorting.
pub fn charpoly_check(point: &WitnessFamilyPoint) -> Result<f64> {
    // W_∞ is unitarily equivalent to W_0 through the party swap
    let b = point.b.finite().unwrap_or(0.0);
    let q = 1.0 - b + b * b;
    let eig = eigh(&point.w.scale(6.0 * q))?;
    Ok(eig
        .values
        .iter()
        .zip(charpoly_roots(b))
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

/// Deduplicated product vectors of a zero set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZeroSet {
    pub clusters: Vec<ProductVector>,
    /// Largest `⟨z|W|z⟩` among the representatives.
    pub max_value: f64,
    /// Rank of the representatives in `ℂ^d`.
    pub span_rank: usize,
    /// Clusters absorbed by a neighbour at fidelity above [`MERGE_FIDELITY`].
    /// Nonzero only near a degenerate zero, where the see-saw creeps.
    pub merged: usize,
    pub starts: usize,
}

/// Greedy clustering: a point joins the first representative with
/// fidelity above [`CLUSTER_FIDELITY`].
pub fn cluster_product_vectors(points: &[ProductVector]) -> Vec<ProductVector> {
    let mut reps: Vec<ProductVector> = Vec::new();
    for p in points {
        if !reps.iter().any(|r| r.fidelity(p) > CLUSTER_FIDELITY) {
            reps.push(p.gauge_fixed());
        }
    }
    reps
}

/// Rank of expanded product vectors stacked as columns.
pub fn vector_span_rank(vectors: &[ProductVector], policy: &TolPolicy) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let cols: Vec<DVector<C64>> = vectors.iter().map(|v| v.expand().into_dvector()).collect();
    linalg::matrix_rank(&DMatrix::from_columns(&cols), policy.rank_rtol)
}

/// Polishes the starts that ended below [`ZERO_TOL`] and clusters them.
fn zeros_of(w: &HermOp, traces: &[SeesawTrace], starts: usize, policy: &TolPolicy) -> Result<ZeroSet> {
    let zeros: Vec<ProductVector> = traces
        .par_iter()
        .filter(|t| t.value() <= ZERO_TOL)
        .map(|t| seesaw_polish(w, &t.argmin).map(|p| p.argmin))
        .collect::<Result<_>>()?;
    let fine = cluster_product_vectors(&zeros);
    let value = |p: &ProductVector| w.expectation(p.expand().as_dvector());
    let mut ranked: Vec<(f64, ProductVector)> = fine.iter().map(|p| (value(p), p.clone())).collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut clusters: Vec<ProductVector> = Vec::new();
    for (_, p) in ranked {
        if !clusters.iter().any(|c| c.fidelity(&p) > MERGE_FIDELITY) {
            clusters.push(p);
        }
    }
    let max_value = clusters.iter().map(value).fold(f64::NEG_INFINITY, f64::max);
    Ok(ZeroSet {
        span_rank: vector_span_rank(&clusters, policy),
        merged: fine.len() - clusters.len(),
        clusters,
        max_value,
        starts,
    })
}

/// Zero set of a witness sampled by multi-start see-saw.
pub fn zero_set(
    w: &HermOp,
    shape: &SystemShape,
    starts: usize,
    seed: u64,
    policy: &TolPolicy,
) -> Result<ZeroSet> {
    let traces = seesaw_all(w, shape, starts, seed)?;
    zeros_of(w, &traces, starts, policy)
}

pub fn zero_set_recover(
    point: &WitnessFamilyPoint,
    starts: usize,
    seed: u64,
    policy: &TolPolicy,
) -> Result<ZeroSet> {
    zero_set(&point.w, &qutrit_pair(), starts, seed, policy)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessFlags {
    pub is_ew: bool,
    pub spanning: bool,
    /// The zero set is nonempty, so `W` supports a proper face.
    pub boundary_supported: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessReport {
    pub shape: String,
    pub spectrum: Vec<f64>,
    pub min_eigenvalue: f64,
    pub min_product_expectation: f64,
    pub argmin: ProductVector,
    pub zero_set: ZeroSet,
    pub flags: WitnessFlags,
}

/// `W` has an eigenvalue below `-NEG_EIG_TOL·max(1,‖W‖)` and its product
/// minimum is at least `-PRODUCT_TOL`.
pub fn ew_verdict(min_eigenvalue: f64, norm: f64, product_min: f64) -> bool {
    min_eigenvalue < -NEG_EIG_TOL * norm.max(1.0) && product_min >= -PRODUCT_TOL
}

/// Spectrum, see-saw minimum and zero set of a candidate witness.
pub fn analyze_witness(
    w: &HermOp,
    shape: &SystemShape,
    starts: usize,
    seed: u64,
    policy: &TolPolicy,
) -> Result<WitnessReport> {
    let eig = eigh(w)?;
    let traces = seesaw_all(w, shape, starts, seed)?;
    let best = traces
        .iter()
        .min_by(|a, b| a.value().total_cmp(&b.value()))
        .expect("at least one start");
    let zero_set = zeros_of(w, &traces, starts, policy)?;
    let is_ew = ew_verdict(eig.min(), eig.norm(), best.value());
    Ok(WitnessReport {
        shape: shape.to_string(),
        min_eigenvalue: eig.min(),
        min_product_expectation: best.value(),
        argmin: best.argmin.clone(),
        flags: WitnessFlags {
            is_ew,
            spanning: zero_set.span_rank == shape.dim(),
            boundary_supported: !zero_set.clusters.is_empty(),
        },
        zero_set,
        spectrum: eig.values,
    })
}

/// The `3×3` matrix `X(b) = diag(p) − (q/2)(|x⟩⟨x| + |x*⟩⟨x*|)` with
/// `p_i = (2−3b+2b²)|x_i|² + |x_{i+1}|² + b²|x_{i+2}|²`.
pub fn xb_matrix(b: f64, x: &ComplexVector) -> Result<HermOp> {
    if x.len() != 3 {
        return Err(Error::ShapeMismatch(format!("x has length {}, need 3", x.len())));
    }
    if x.norm() == 0.0 {
        return Err(Error::ZeroVector("x"));
    }
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::InvalidArgument(format!("b must be positive, got {b}")));
    }
    let q = 1.0 - b + b * b;
    let m2: Vec<f64> = x.iter().map(|z| z.norm_sqr()).collect();
    let mut m = DMatrix::<C64>::zeros(3, 3);
    for i in 0..3 {
        let p = (2.0 - 3.0 * b + 2.0 * b * b) * m2[i] + m2[(i + 1) % 3] + b * b * m2[(i + 2) % 3];
        m[(i, i)] = C64::new(p, 0.0);
    }
    let v = x.as_dvector();
    let vc = v.map(|z| z.conj());
    m -= (v * v.adjoint() + &vc * vc.adjoint()).scale(q / 2.0);
    HermOp::new(SystemShape::single(3)?, m)
}

/// `|e_ij⟩ = |ij⟩ − |ji⟩` for `i < j` in `3⊗3`.
fn antisymmetric_pairs() -> Vec<DVector<C64>> {
    let mut out = Vec::new();
    for i in 0..3 {
        for j in (i + 1)..3 {
            out.push(basis(9, 3 * i + j) - basis(9, 3 * j + i));
        }
    }
    out
}

/// `(1/6)(I − Σ_{i,j} |ii⟩⟨jj|)`, the reduced witness obtained from `W_1`.
pub fn reduced_w1() -> HermOp {
    let mut m = DMatrix::<C64>::identity(9, 9);
    for i in 0..3 {
        for j in 0..3 {
            m[(4 * i, 4 * j)] -= C64::new(1.0, 0.0);
        }
    }
    HermOp::from_hermitian(qutrit_pair(), m.scale(1.0 / 6.0))
}

/// `P = (1/12) Σ_{i<j} |e_ij⟩⟨e_ij|`, so that `W_1 − P` is half the reduced witness.
pub fn w1_subtracted_p() -> HermOp {
    let mut m = DMatrix::<C64>::zeros(9, 9);
    for e in antisymmetric_pairs() {
        m += &e * e.adjoint();
    }
    HermOp::from_hermitian(qutrit_pair(), m.scale(1.0 / 12.0))
}

/// Six-term sum of squared `2×2` minors equal to `12⟨x,y|W_1|x,y⟩`.
pub fn w1_minor_sum(x: &DVector<C64>, y: &DVector<C64>) -> f64 {
    let mut s = 0.0;
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        s += (x[i] * y[j] - x[j] * y[i]).norm_sqr();
        s += (x[i] * y[j].conj() - x[j] * y[i].conj()).norm_sqr();
    }
    s
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct W1IdentityReport {
    pub samples: usize,
    /// Worst `|12⟨x,y|W_1|x,y⟩ − Σ|minors|²|` over random unit product vectors.
    pub product_residual: f64,
    /// Entrywise deviation of `2W_1 − (1/6)Σ|e_ij⟩⟨e_ij|` from the reduced witness.
    pub matrix_identity_deviation: f64,
    pub reduced_min_eigenvalue: f64,
    pub reduced_seesaw_min: f64,
    pub reduced_is_ew: bool,
}

pub fn w1_identity_check(samples: usize, starts: usize, seed: u64) -> Result<W1IdentityReport> {
    let w1 = make_wb(BParam::Finite(1.0)).w;
    let mut worst = 0.0f64;
    for k in 0..samples as u64 {
        let mut rng = stream_rng(seed, k);
        let x = random_complex_vector(3, &mut rng);
        let y = random_complex_vector(3, &mut rng);
        let (x, y) = (x.unscale(x.norm()), y.unscale(y.norm()));
        let lhs = 12.0 * w1.expectation(&x.kronecker(&y));
        worst = worst.max((lhs - w1_minor_sum(&x, &y)).abs());
    }
    let reduced = reduced_w1();
    let lhs = w1.lin_comb(2.0, &w1_subtracted_p(), -2.0)?;
    let eig = eigh(&reduced)?;
    let ss = seesaw_min(&reduced, &qutrit_pair(), starts, seed ^ 0x77)?;
    Ok(W1IdentityReport {
        samples,
        product_residual: worst,
        matrix_identity_deviation: lhs.max_deviation(&reduced),
        reduced_min_eigenvalue: eig.min(),
        reduced_seesaw_min: ss.value,
        reduced_is_ew: ew_verdict(eig.min(), eig.norm(), ss.value),
    })
}

/// Expectations of `W_0 − P` on `z_1(b)` and `z_3(b)` for
/// `P = |pα+qβ⟩⟨·| + |rα+sβ⟩⟨·|`, `α = |00⟩−|11⟩`, `β = |11⟩−|22⟩`,
/// compared with `−b(|q|²+|s|²−b/6)/(1+b)²` and `−b(p²+r²−b/6)/(1+b)²`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimalityProbe {
    pub cases: usize,
    /// Worst disagreement between measured and closed-form expectations.
    pub formula_deviation: f64,
    /// Cases where some probe `b` drove one of the expectations negative.
    pub detected: usize,
    pub passed: bool,
}

pub fn b0_optimality_probe() -> Result<OptimalityProbe> {
    let w0 = make_wb(BParam::Finite(0.0)).w;
    let alpha = basis(9, 0) - basis(9, 4);
    let beta = basis(9, 4) - basis(9, 8);
    let reals = [0.0, 0.3, 1.0];
    let complexes = [
        C64::new(0.0, 0.0),
        C64::new(0.5, 0.0),
        C64::new(0.0, -0.7),
        C64::new(-1.0, 1.0),
    ];
    let probes = [1e-1, 1e-2, 1e-3];
    let mut cases = 0;
    let mut detected = 0;
    let mut dev = 0.0f64;
    for &p in &reals {
        for &r in &reals {
            for &q in &complexes {
                for &s in &complexes {
                    let u = alpha.scale(p) + &beta * q;
                    let v = alpha.scale(r) + &beta * s;
                    if u.norm() == 0.0 && v.norm() == 0.0 {
                        continue;
                    }
                    cases += 1;
                    let pm = &u * u.adjoint() + &v * v.adjoint();
                    let diff = HermOp::from_hermitian(qutrit_pair(), w0.matrix() - pm);
                    let mut hit = false;
                    for &b in &probes {
                        let zs = z_vectors(b);
                        let e1 = diff.expectation(zs[0].expand().as_dvector());
                        let e3 = diff.expectation(zs[2].expand().as_dvector());
                        let den = (1.0 + b) * (1.0 + b);
                        let f1 = -b * (q.norm_sqr() + s.norm_sqr() - b / 6.0) / den;
                        let f3 = -b * (p * p + r * r - b / 6.0) / den;
                        dev = dev.max((e1 - f1).abs()).max((e3 - f3).abs());
                        hit |= e1 < 0.0 || e3 < 0.0;
                    }
                    detected += usize::from(hit);
                }
            }
        }
    }
    Ok(OptimalityProbe {
        cases,
        formula_deviation: dev,
        detected,
        passed: dev <= 1e-12 && detected == cases,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SequencePoint {
    pub b: f64,
    /// Rank of the listed zero vectors of `W_b` in `ℂ⁹`.
    pub zero_vector_rank: usize,
    /// Largest `|⟨z|W_b|z⟩|` over the listed zero vectors.
    pub zero_residual: f64,
    /// Entrywise distance to `W_1`.
    pub distance_to_w1: f64,
}

/// Spanning witnesses `W_{1+1/m}` converging to the non-optimal `W_1`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NonClosednessDemo {
    pub sequence: Vec<SequencePoint>,
    /// `W_1 − P` is still an entanglement witness, so `W_1` is not optimal.
    pub w1_minus_p_is_ew: bool,
    pub passed: bool,
}

pub fn non_closedness_demo(terms: usize, starts: usize, seed: u64, policy: &TolPolicy) -> Result<NonClosednessDemo> {
    let w1 = make_wb(BParam::Finite(1.0)).w;
    let sequence: Vec<SequencePoint> = (1..=terms)
        .map(|m| {
            let b = 1.0 + 1.0 / m as f64;
            let pt = make_wb(BParam::Finite(b));
            let zero_residual = pt
                .zero_vectors
                .iter()
                .map(|z| pt.w.expectation(z.expand().as_dvector()).abs())
                .fold(0.0, f64::max);
            SequencePoint {
                b,
                zero_vector_rank: vector_span_rank(&pt.zero_vectors, policy),
                zero_residual,
                distance_to_w1: pt.w.max_deviation(&w1),
            }
        })
        .collect();
    let diff = w1.sub(&w1_subtracted_p())?;
    let eig = eigh(&diff)?;
    let ss = seesaw_min(&diff, &qutrit_pair(), starts, seed)?;
    let w1_minus_p_is_ew = ew_verdict(eig.min(), eig.norm(), ss.value);
    let decreasing = sequence
        .windows(2)
        .all(|p| p[1].distance_to_w1 < p[0].distance_to_w1);
    let spans = sequence
        .iter()
        .all(|p| p.zero_vector_rank == 9 && p.zero_residual <= 1e-10);
    Ok(NonClosednessDemo {
        passed: w1_minus_p_is_ew && decreasing && spans,
        sequence,
        w1_minus_p_is_ew,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::herm::is_psd;
    use crate::multilinear::kron_vectors;

    fn pol() -> TolPolicy {
        TolPolicy::default()
    }

    #[test]
    fn trace_and_zero_vectors() {
        for b in [0.0, 0.1, 0.5, 1.0, 2.0, 7.5] {
            let pt = make_wb(BParam::Finite(b));
            assert!((pt.w.trace() - 1.0).abs() < 1e-12);
            for z in &pt.zero_vectors {
                assert!(pt.w.expectation(z.expand().as_dvector()).abs() < 1e-10);
                assert!(z.is_real(1e-15));
            }
            let want = if b == 0.0 { 7 } else { 10 };
            assert_eq!(pt.zero_vectors.len(), want);
        }
        let inf = make_wb(BParam::Infinity);
        assert_eq!(inf.zero_vectors.len(), 7);
        assert!((inf.w.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn z7_is_uniform() {
        let z7 = &z_vectors(0.5)[6];
        for e in z7.expand().iter() {
            assert!((e - C64::new(1.0 / 3.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn charpoly_at_sample_points() {
        for b in [0.5, 2.0, 1.0, 0.0, 0.03] {
            let pt = make_wb(BParam::Finite(b));
            assert!(charpoly_check(&pt).unwrap() < 1e-9, "b = {b}");
        }
        let roots = charpoly_roots(1.0);
        assert!(roots.contains(&-1.0));
        // the linear factor contributes 1/2 twice, the quadratic three more times
        assert_eq!(roots.iter().filter(|&&r| r == 0.5).count(), 5);
        assert!(charpoly_check(&make_wb(BParam::Infinity)).unwrap() < 1e-9);
    }

    #[test]
    fn half_has_the_minus_b_eigenvalue_after_rescaling() {
        // the rescaled operator 6(1-b+b²)W_b carries the root -b
        let b = 0.5;
        let pt = make_wb(BParam::Finite(b));
        let eig = eigh(&pt.w.scale(6.0 * (1.0 - b + b * b))).unwrap();
        let hits = eig.values.iter().filter(|v| (*v + 0.5).abs() < 1e-9).count();
        assert_eq!(hits, 1);
    }

    #[test]
    fn reciprocal_symmetry() {
        for b in [0.2, 0.5, 3.0] {
            let w = make_wb(BParam::Finite(b)).w;
            let inv = make_wb(BParam::Finite(1.0 / b)).w;
            assert!(swap_parties(&w).unwrap().max_deviation(&inv) < 1e-10);
        }
    }

    #[test]
    fn nine_of_ten_are_independent() {
        let zs = z_vectors(0.5);
        for skip in 0..10 {
            let rest: Vec<ProductVector> = zs
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != skip)
                .map(|(_, z)| z.clone())
                .collect();
            assert_eq!(vector_span_rank(&rest, &pol()), 9);
        }
        let projs: Vec<HermOp> = zs.iter().map(|z| z.projector()).collect();
        assert_eq!(crate::herm::real_span_rank(&projs, &pol()).unwrap(), 10);
    }

    #[test]
    fn xb_is_psd_and_matches_witness() {
        let mut rng = stream_rng(8, 0);
        for k in 0..200 {
            let b = 0.05 + 1.9 * (k as f64 / 200.0);
            let x = random_complex_vector(3, &mut rng);
            let y = random_complex_vector(3, &mut rng);
            let x = x.unscale(x.norm());
            let xb = xb_matrix(b, &ComplexVector::from_dvector(x.clone()).unwrap()).unwrap();
            assert!(is_psd(&xb, 1e-9), "b = {b}");
            let q = 1.0 - b + b * b;
            let w = make_wb(BParam::Finite(b)).w;
            let lhs = xb.expectation(&y);
            let rhs = 6.0 * q * w.expectation(&kron_vectors(&[x.clone(), y.clone()]));
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn xb_determinant_on_unimodular_points() {
        let b = 0.7;
        let q: f64 = 1.0 - b + b * b;
        for (a, c) in [(0.3f64, 1.1f64), (2.0, -0.4), (0.9, 0.9)] {
            let x = DVector::from_vec(vec![
                C64::new(1.0, 0.0),
                C64::from_polar(1.0, a),
                C64::from_polar(1.0, c),
            ]);
            let xb = xb_matrix(b, &ComplexVector::from_dvector(x).unwrap()).unwrap();
            let det = linalg::det(xb.matrix()).re;
            let trig = 3.0 - (2.0 * a).cos() - (2.0 * c).cos() - (2.0 * (a - c)).cos();
            assert!((det - 1.5 * q.powi(3) * trig).abs() < 1e-12);
        }
        let real = ComplexVector::from_real(&[1.0, -1.0, 1.0]);
        assert!(linalg::det(xb_matrix(b, &real).unwrap().matrix()).norm() < 1e-12);
        assert!(xb_matrix(b, &ComplexVector::from_real(&[0.0, 0.0, 0.0])).is_err());
    }

    #[test]
    fn w1_identities() {
        let r = w1_identity_check(500, 32, 1).unwrap();
        assert!(r.product_residual < 1e-10);
        assert!(r.matrix_identity_deviation < 1e-12);
        assert!((r.reduced_min_eigenvalue + 1.0 / 3.0).abs() < 1e-12);
        assert!(r.reduced_seesaw_min.abs() < 1e-8);
        assert!(r.reduced_is_ew);
    }

    #[test]
    fn b0_probe() {
        let p = b0_optimality_probe().unwrap();
        assert!(p.passed, "{p:?}");
    }

    #[test]
    fn non_closedness() {
        let d = non_closedness_demo(6, 32, 0, &pol()).unwrap();
        assert!(d.passed, "{d:?}");
    }

    #[test]
    fn b_param_parsing() {
        assert_eq!("inf".parse::<BParam>().unwrap(), BParam::Infinity);
        assert_eq!("0.5".parse::<BParam>().unwrap(), BParam::Finite(0.5));
        assert!("-1".parse::<BParam>().is_err());
        assert_eq!(serde_json::to_string(&BParam::Infinity).unwrap(), "\"inf\"");
        let b: BParam = serde_json::from_str("2.0").unwrap();
        assert_eq!(b, BParam::Finite(2.0));
        assert_eq!(default_b_grid().len(), 50);
    }

    #[test]
    fn zero_set_at_half() {
        let pt = make_wb(BParam::Finite(0.5));
        let zs = zero_set_recover(&pt, ZERO_SET_STARTS, 0, &pol()).unwrap();
        assert_eq!(zs.clusters.len(), 10);
        assert_eq!(zs.span_rank, 9);
        for c in &zs.clusters {
            assert!(pt.zero_vectors.iter().any(|z| z.fidelity(c) > CLUSTER_FIDELITY));
        }
    }
}
