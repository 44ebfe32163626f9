//! Named separable states, the simplex spanned by the witness zero vectors,
//! and boundary certificates.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::herm::{eigh, is_full, is_ppt, ppt_report, real_span_rank, HermOp, PptReport, TolPolicy};
use crate::linalg::C64;
use crate::multilinear::{compose, ProductVector, SystemShape};
use crate::witness::{self, make_wb, seesaw_min, BParam, NEG_EIG_TOL, PRODUCT_TOL};

/// `|tr(Wρ)|` at most this puts `ρ` on the hyperplane of `W`.
pub const TOUCH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateName {
    Werner,
    Isotropic,
    GhzMixed,
}

impl StateName {
    pub const ALL: [StateName; 3] = [StateName::Werner, StateName::Isotropic, StateName::GhzMixed];

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "werner" => Ok(StateName::Werner),
            "isotropic" => Ok(StateName::Isotropic),
            "ghz" | "ghz-mixed" => Ok(StateName::GhzMixed),
            _ => Err(Error::UnknownState(s.to_string())),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            StateName::Werner => "werner",
            StateName::Isotropic => "isotropic",
            StateName::GhzMixed => "ghz-mixed",
        }
    }

    /// Shape used when none is given.
    pub fn default_shape(&self) -> SystemShape {
        match self {
            StateName::Werner | StateName::Isotropic => SystemShape::bipartite(3, 3),
            StateName::GhzMixed => SystemShape::uniform(3, 2),
        }
        .expect("valid default shape")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NamedState {
    pub name: StateName,
    pub shape: SystemShape,
    /// The unnormalized operator as usually written.
    pub raw: HermOp,
    /// `raw / tr(raw)`.
    pub unit: HermOp,
    pub note: String,
}

/// Werner `I − F/d₁`, isotropic `I + Σ|ii⟩⟨jj|`, or `I + |GHZ⟩⟨GHZ|`
/// with the unnormalized `|GHZ⟩ = |0…0⟩ + |1…1⟩`.
pub fn make_named(name: StateName, shape: &SystemShape) -> Result<NamedState> {
    let d = shape.dim();
    let one = C64::new(1.0, 0.0);
    let mut m = DMatrix::<C64>::identity(d, d);
    let note = match name {
        StateName::Werner | StateName::Isotropic => {
            let d1 = match shape.dims() {
                [a, b] if a == b => *a,
                _ => {
                    return Err(Error::InvalidShape(format!(
                        "{} needs d₁ = d₂, got {shape}",
                        name.label()
                    )))
                }
            };
            for i in 0..d1 {
                for j in 0..d1 {
                    if name == StateName::Werner {
                        m[(i * d1 + j, j * d1 + i)] -= one / d1 as f64;
                    } else {
                        m[(i * d1 + i, j * d1 + j)] += one;
                    }
                }
            }
            if name == StateName::Werner {
                "I - (1/d1) sum |ij><ji|".to_string()
            } else {
                "I + sum |ii><jj|".to_string()
            }
        }
        StateName::GhzMixed => {
            if shape.dims().iter().any(|&k| k != 2) {
                return Err(Error::InvalidShape(format!(
                    "ghz-mixed needs qubits, got {shape}"
                )));
            }
            for &r in &[0, d - 1] {
                for &c in &[0, d - 1] {
                    m[(r, c)] += one;
                }
            }
            "I + |GHZ><GHZ| with |GHZ> = |0..0> + |1..1>".to_string()
        }
    };
    let raw = HermOp::new(shape.clone(), m)?;
    let unit = raw.scale(1.0 / raw.trace());
    Ok(NamedState {
        name,
        shape: shape.clone(),
        raw,
        unit,
        note,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CatalogRow {
    pub name: String,
    pub shape: String,
    pub rank: usize,
    pub ppt: PptReport,
    /// Smallest rank over all partial transposes.
    pub min_transposed_rank: usize,
    /// Separability is a known fact about these states, not decided here
    /// when `d > 6`.
    pub separable: &'static str,
}

pub fn catalog_row(state: &NamedState, policy: &TolPolicy) -> CatalogRow {
    let ppt = ppt_report(&state.unit, policy);
    let min_transposed_rank = ppt.masks.iter().map(|m| m.rank).min().unwrap_or(0);
    let separable = if state.shape.dim() <= 6 {
        if ppt.is_ppt { "yes (PPT, d ≤ 6)" } else { "no (NPT)" }
    } else {
        "known separable"
    };
    CatalogRow {
        name: state.name.label().into(),
        shape: state.shape.to_string(),
        rank: ppt.masks[0].rank,
        min_transposed_rank,
        ppt,
        separable,
    }
}

/// Vertices `|z_i⟩⟨z_i|` of the witness zero set and their barycenter.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeltaSimplex {
    pub b: BParam,
    pub vectors: Vec<ProductVector>,
    pub vertices: Vec<HermOp>,
    pub barycenter: HermOp,
    pub span_rank: usize,
    pub affine_dim: usize,
}

pub fn delta_simplex(b: BParam, policy: &TolPolicy) -> Result<DeltaSimplex> {
    let pt = make_wb(b);
    let vertices: Vec<HermOp> = pt.zero_vectors.iter().map(|z| z.projector()).collect();
    let mut sum = HermOp::zeros(&witness::qutrit_pair());
    for v in &vertices {
        sum = sum.add(v)?;
    }
    let barycenter = sum.scale(1.0 / vertices.len() as f64);
    let span_rank = real_span_rank(&vertices, policy)?;
    Ok(DeltaSimplex {
        b,
        vectors: pt.zero_vectors,
        vertices,
        barycenter,
        span_rank,
        affine_dim: span_rank - 1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    CertifiedBoundary,
    NotCertified,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryCertificate {
    pub tr_product: f64,
    pub witness_min_eigenvalue: f64,
    pub witness_min_product: f64,
    pub verdict: Verdict,
    pub full: bool,
}

/// A state touching the hyperplane of a genuine witness lies on the
/// boundary of the separable set.
pub fn boundary_certificate(
    state: &HermOp,
    witness: &HermOp,
    starts: usize,
    seed: u64,
    policy: &TolPolicy,
) -> Result<BoundaryCertificate> {
    if state.shape() != witness.shape() {
        return Err(Error::ShapeMismatch(format!(
            "state on {} but witness on {}",
            state.shape(),
            witness.shape()
        )));
    }
    let eig = eigh(witness)?;
    let ss = seesaw_min(witness, witness.shape(), starts, seed)?;
    let tr_product = state.hs_inner(witness);
    let negative = eig.min() < -NEG_EIG_TOL * eig.norm().max(1.0);
    let certified = negative && ss.value >= -PRODUCT_TOL && tr_product.abs() <= TOUCH_TOL;
    Ok(BoundaryCertificate {
        tr_product,
        witness_min_eigenvalue: eig.min(),
        witness_min_product: ss.value,
        verdict: if certified {
            Verdict::CertifiedBoundary
        } else {
            Verdict::NotCertified
        },
        full: is_full(state, policy),
    })
}

/// Separability by the PPT test, which is exact only for `d ≤ 6`.
pub fn separable_d_le_6(state: &HermOp, policy: &TolPolicy) -> Result<bool> {
    if state.dim() > 6 {
        return Err(Error::Unsupported(format!(
            "PPT decides separability only for d ≤ 6, got d = {}",
            state.dim()
        )));
    }
    Ok(is_ppt(state, policy))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryPoint {
    /// Position on the line `(1−t) I/d + t ρ`.
    pub t: f64,
    pub sigma: HermOp,
    pub oracle_value: f64,
    pub full: bool,
}

/// Upper end of the bisection bracket, past `t = 1`.
pub const BRACKET_END: f64 = 1.5;
const SCAN_POINTS: usize = 31;

/// Walks from `I/d` toward `ρ` and locates where `oracle` changes sign.
///
/// `oracle` must be positive near `I/d` and nonpositive at the far end of
/// the bracket, with a single sign change in between.
pub fn full_boundary_from_pptes<F>(
    pptes: &HermOp,
    oracle: F,
    tol: f64,
    policy: &TolPolicy,
) -> Result<BoundaryPoint>
where
    F: Fn(&HermOp) -> f64,
{
    let d = pptes.dim();
    if d <= 6 {
        return Err(Error::Unsupported(format!(
            "no PPT entangled states exist for d = {d} ≤ 6"
        )));
    }
    if !is_ppt(pptes, policy) {
        return Err(Error::InvalidArgument("input state is not PPT".into()));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let mixed = HermOp::identity(pptes.shape()).scale(1.0 / d as f64);
    let point = |t: f64| mixed.lin_comb(1.0 - t, pptes, t).expect("same shape");

    let signs: Vec<bool> = (0..SCAN_POINTS)
        .map(|k| oracle(&point(BRACKET_END * k as f64 / (SCAN_POINTS - 1) as f64)) > 0.0)
        .collect();
    if !signs[0] {
        return Err(Error::InconsistentOracle("I/d is not inside".into()));
    }
    let flips = signs.windows(2).filter(|w| w[0] != w[1]).count();
    if flips != 1 {
        return Err(Error::InconsistentOracle(format!(
            "{flips} sign changes along the segment"
        )));
    }
    let cell = signs.iter().position(|&s| !s).expect("one flip") - 1;
    let step = BRACKET_END / (SCAN_POINTS - 1) as f64;
    let (mut lo, mut hi) = (cell as f64 * step, (cell + 1) as f64 * step);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if oracle(&point(mid)) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    let sigma = point(t);
    Ok(BoundaryPoint {
        t,
        oracle_value: oracle(&sigma),
        full: is_full(&sigma, policy),
        sigma,
    })
}

/// How boundary membership of a composite is known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Membership {
    /// A factor is a full boundary state, so the product is one as well.
    ByComposition,
    /// Neither factor is known to lie on the boundary.
    NotClaimed,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComposedState {
    pub op: HermOp,
    pub full: bool,
    pub rank: usize,
    pub membership: Membership,
}

/// `ρ ⊗ σ` regrouped party-wise. `rho_on_boundary` states whether `ρ` is
/// a full state known to lie on the boundary.
pub fn compose_boundary(
    rho: &HermOp,
    rho_on_boundary: bool,
    sigma: &HermOp,
    policy: &TolPolicy,
) -> Result<ComposedState> {
    let op = compose(rho, sigma)?;
    let full = is_full(&op, policy);
    Ok(ComposedState {
        rank: crate::herm::numerical_rank(&op, policy),
        membership: if rho_on_boundary && full {
            Membership::ByComposition
        } else {
            Membership::NotClaimed
        },
        full,
        op,
    })
}

/// A random mixture of `count` product projectors, with unit trace.
pub fn random_separable<R: rand::Rng + ?Sized>(shape: &SystemShape, count: usize, rng: &mut R) -> HermOp {
    let mut acc = HermOp::zeros(shape);
    let mut total = 0.0;
    for _ in 0..count {
        let w: f64 = rng.random_range(0.05..1.0);
        total += w;
        let p = ProductVector::random(shape, rng).projector();
        acc = acc.lin_comb(1.0, &p, w).expect("same shape");
    }
    acc.scale(1.0 / total)
}

/// `|φ⁺⟩⟨φ⁺|` on `d₁ ⊗ d₁`, normalized.
pub fn maximally_entangled(d1: usize) -> Result<HermOp> {
    let shape = SystemShape::bipartite(d1, d1)?;
    let mut v = DVector::from_element(d1 * d1, C64::new(0.0, 0.0));
    for i in 0..d1 {
        v[i * d1 + i] = C64::new(1.0 / (d1 as f64).sqrt(), 0.0);
    }
    Ok(HermOp::projector(&shape, &v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::faces::stream_rng;
    use crate::herm::{numerical_rank, partial_transpose, TransposeMask};

    fn pol() -> TolPolicy {
        TolPolicy::default()
    }

    #[test]
    fn named_states_are_ppt_but_not_full() {
        let pol = pol();
        for name in StateName::ALL {
            let st = make_named(name, &name.default_shape()).unwrap();
            assert!((st.unit.trace() - 1.0).abs() < 1e-12);
            let row = catalog_row(&st, &pol);
            assert!(row.ppt.is_ppt, "{}", row.name);
            assert!(!row.ppt.is_full, "{}", row.name);
            assert_eq!(row.rank, st.shape.dim());
        }
    }

    #[test]
    fn deficient_ranks() {
        let pol = pol();
        let s = SystemShape::bipartite(3, 3).unwrap();
        let g1 = TransposeMask::new(&s, &[0]).unwrap();
        let w = make_named(StateName::Werner, &s).unwrap();
        assert_eq!(numerical_rank(&partial_transpose(&w.raw, &g1), &pol), 8);
        let iso = make_named(StateName::Isotropic, &s).unwrap();
        assert_eq!(numerical_rank(&partial_transpose(&iso.raw, &g1), &pol), 6);
        let g = make_named(StateName::GhzMixed, &StateName::GhzMixed.default_shape()).unwrap();
        let row = catalog_row(&g, &pol);
        assert_eq!(row.min_transposed_rank, 7);
    }

    #[test]
    fn shape_and_name_errors() {
        assert!(make_named(StateName::Werner, &SystemShape::bipartite(2, 3).unwrap()).is_err());
        assert!(make_named(StateName::GhzMixed, &SystemShape::bipartite(3, 3).unwrap()).is_err());
        assert!(matches!(StateName::parse("bell"), Err(Error::UnknownState(_))));
        assert_eq!(StateName::parse("GHZ").unwrap(), StateName::GhzMixed);
    }

    #[test]
    fn simplex_dimensions() {
        let pol = pol();
        let half = delta_simplex(BParam::Finite(0.5), &pol).unwrap();
        assert_eq!((half.vertices.len(), half.affine_dim), (10, 9));
        let zero = delta_simplex(BParam::Finite(0.0), &pol).unwrap();
        assert_eq!((zero.vertices.len(), zero.affine_dim), (7, 6));
        let s = half.barycenter.shape().clone();
        let g1 = TransposeMask::new(&s, &[0]).unwrap();
        assert!(partial_transpose(&half.barycenter, &g1).max_deviation(&half.barycenter) < 1e-15);
        assert!(is_full(&half.barycenter, &pol));
    }

    #[test]
    fn certificates() {
        let pol = pol();
        let half = delta_simplex(BParam::Finite(0.5), &pol).unwrap();
        let w = make_wb(BParam::Finite(0.5)).w;
        let c = boundary_certificate(&half.barycenter, &w, 64, 0, &pol).unwrap();
        assert_eq!(c.verdict, Verdict::CertifiedBoundary);
        assert!(c.full);

        let mixed = HermOp::identity(w.shape()).scale(1.0 / 9.0);
        let c = boundary_certificate(&mixed, &w, 16, 0, &pol).unwrap();
        assert_eq!(c.verdict, Verdict::NotCertified);
        assert!((c.tr_product - 1.0 / 9.0).abs() < 1e-12);

        let c = boundary_certificate(&half.barycenter, &mixed, 16, 0, &pol).unwrap();
        assert_eq!(c.verdict, Verdict::NotCertified);
    }

    #[test]
    fn small_separability() {
        let pol = pol();
        let s = SystemShape::bipartite(2, 3).unwrap();
        let mut rng = stream_rng(4, 0);
        assert!(separable_d_le_6(&random_separable(&s, 5, &mut rng), &pol).unwrap());
        assert!(!separable_d_le_6(&maximally_entangled(2).unwrap(), &pol).unwrap());
        let w = make_named(StateName::Werner, &SystemShape::bipartite(2, 2).unwrap()).unwrap();
        assert!(separable_d_le_6(&w.unit, &pol).unwrap());
        let big = make_named(StateName::Werner, &SystemShape::bipartite(3, 3).unwrap()).unwrap();
        assert!(separable_d_le_6(&big.unit, &pol).is_err());
    }

    #[test]
    fn bisection_hits_the_witness_hyperplane() {
        let pol = pol();
        let half = delta_simplex(BParam::Finite(0.5), &pol).unwrap();
        let w = make_wb(BParam::Finite(0.5)).w;
        let oracle = |s: &HermOp| s.hs_inner(&w);
        let coarse = full_boundary_from_pptes(&half.barycenter, oracle, 1e-10, &pol).unwrap();
        let fine = full_boundary_from_pptes(&half.barycenter, oracle, 1e-12, &pol).unwrap();
        assert!(coarse.oracle_value.abs() < 1e-10);
        assert!((coarse.t - 1.0).abs() < 1e-9);
        assert!(coarse.full);
        let dist = eigh(&coarse.sigma.sub(&fine.sigma).unwrap()).unwrap();
        assert!(dist.values.iter().map(|v| v.abs()).sum::<f64>() < 1e-8);

        let bad = |_: &HermOp| 1.0;
        assert!(matches!(
            full_boundary_from_pptes(&half.barycenter, bad, 1e-10, &pol),
            Err(Error::InconsistentOracle(_))
        ));
    }

    #[test]
    fn composition_keeps_fullness() {
        let pol = pol();
        let half = delta_simplex(BParam::Finite(0.5), &pol).unwrap();
        let q = SystemShape::bipartite(2, 2).unwrap();
        let c = compose_boundary(&half.barycenter, true, &HermOp::identity(&q).scale(0.25), &pol).unwrap();
        assert_eq!(c.op.shape().dims(), &[6, 6]);
        assert!(c.full);
        assert_eq!(c.membership, Membership::ByComposition);

        let id = HermOp::identity(&q);
        let c = compose_boundary(&id, false, &id, &pol).unwrap();
        assert!(c.full);
        assert_eq!(c.membership, Membership::NotClaimed);

        let a = crate::multilinear::sample_product_vector(&q, 1).projector();
        let b = crate::multilinear::sample_product_vector(&q, 2).projector();
        let c = compose_boundary(&a, false, &b, &pol).unwrap();
        assert_eq!(c.rank, 1);
        assert!(!c.full);
    }
}
