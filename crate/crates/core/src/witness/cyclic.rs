//! The cyclic rational inequality behind positivity of the qutrit witnesses:
//!
//! ```text
//! x/(ax+by+cz) + y/(ay+bz+cx) + z/(az+bx+cy) ≤ 3/(a+b+c)
//! ```
//!
//! for `a, b > 0`, `c ≥ 0`, `a ≥ 2(b+c) − 3√(bc)` and `(ab−c²)(ac−b²) < 0`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::faces::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CyclicParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Slack allowed in `a ≥ 2(b+c) − 3√(bc)` so that boundary parameters
/// computed in floating point stay admissible.
const BOUNDARY_SLACK: f64 = 1e-12;

/// `2(b+c) − 3√(bc)`, the smallest admissible `a`.
pub fn a_threshold(b: f64, c: f64) -> f64 {
    2.0 * (b + c) - 3.0 * (b * c).sqrt()
}

/// Coefficients `(2−3β+2β², 1, β²)` used for the qutrit witnesses.
pub fn witness_coefficients(beta: f64) -> (f64, f64, f64) {
    (2.0 - 3.0 * beta + 2.0 * beta * beta, 1.0, beta * beta)
}

impl CyclicParams {
    pub fn new(a: f64, b: f64, c: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        if [a, b, c, x, y, z].iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("cyclic parameters"));
        }
        if a <= 0.0 || b <= 0.0 || c < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "need a, b > 0 and c ≥ 0, got ({a}, {b}, {c})"
            )));
        }
        if a < a_threshold(b, c) - BOUNDARY_SLACK * a.max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "a = {a} below 2(b+c) − 3√(bc) = {}",
                a_threshold(b, c)
            )));
        }
        if (a * b - c * c) * (a * c - b * b) >= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "(ab−c²)(ac−b²) must be negative for ({a}, {b}, {c})"
            )));
        }
        if x < 0.0 || y < 0.0 || z < 0.0 {
            return Err(Error::InvalidArgument("point must be nonnegative".into()));
        }
        if x == 0.0 && y == 0.0 && z == 0.0 {
            return Err(Error::ZeroVector("cyclic point"));
        }
        Ok(Self { a, b, c, x, y, z })
    }
}

/// `3/(a+b+c) − f(x,y,z)`; nonnegative on admissible input.
pub fn cyclic_gap(p: &CyclicParams) -> Result<f64> {
    let CyclicParams { a, b, c, x, y, z } = *p;
    let dens = [a * x + b * y + c * z, a * y + b * z + c * x, a * z + b * x + c * y];
    if dens.iter().any(|&d| d <= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "zero denominator at ({x}, {y}, {z})"
        )));
    }
    let f = x / dens[0] + y / dens[1] + z / dens[2];
    Ok(3.0 / (a + b + c) - f)
}

/// Points where equality is expected: the diagonal and, when `a` sits on
/// its threshold, `x = 0, bz² = cy²` with its two cyclic shifts.
pub fn equality_points(a: f64, b: f64, c: f64) -> Vec<[f64; 3]> {
    let mut pts = vec![[1.0, 1.0, 1.0]];
    if c > 0.0 && (a - a_threshold(b, c)).abs() <= BOUNDARY_SLACK * a.max(1.0) {
        let t = (c / b).sqrt();
        pts.push([0.0, 1.0, t]);
        pts.push([1.0, t, 0.0]);
        pts.push([t, 0.0, 1.0]);
    }
    pts
}

/// `2(b+c) − 3√(bc) − (b²+c²)/(b+c)`, positive whenever `b ≠ c`.
pub fn threshold_margin(b: f64, c: f64) -> f64 {
    a_threshold(b, c) - (b * b + c * c) / (b + c)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CyclicReport {
    pub trials: usize,
    pub min_gap: f64,
    pub argmin: CyclicParams,
    /// Worst `|gap|` over the listed equality points of every sampled β.
    pub equality_max_abs_gap: f64,
    /// Samples with gap below `1e-6` that lie within `1e-2` of an equality point.
    pub near_locus_hits: usize,
    /// Samples with gap below `1e-6` away from every equality point, with
    /// `|β − 1| ≥ 0.1`.
    pub off_locus_small_gaps: usize,
    /// Small gaps with `|β − 1| < 0.1`, where all coefficients approach 1
    /// and the gap flattens to zero everywhere.
    pub flat_band_small_gaps: usize,
    pub margin_trials: usize,
    pub margin_min: f64,
    pub passed: bool,
}

/// Half-width of the band around `β = 1` where `(a, b, c) → (1, 1, 1)` and
/// `f ≡ 3/(a+b+c)`.
const FLAT_BAND: f64 = 0.1;

fn distance_to(p: [f64; 3], q: [f64; 3]) -> f64 {
    // compare directions: both points projected to the simplex x+y+z = 1
    let sp: f64 = p.iter().sum();
    let sq: f64 = q.iter().sum();
    (0..3)
        .map(|i| (p[i] / sp - q[i] / sq).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn sample_beta<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let beta: f64 = rng.random_range(0.0..2.0);
        if beta > 0.0 && (beta - 1.0).abs() > 1e-9 {
            return beta;
        }
    }
}

/// Random search over witness coefficients `β ∈ (0,1) ∪ (1,2)` and points
/// in `[0,1]³`, plus the equality loci and the threshold chain.
pub fn cyclic_survey(trials: usize, margin_trials: usize, seed: u64) -> Result<CyclicReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    let rows: Vec<(CyclicParams, f64, f64, bool, f64)> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i);
            let beta = sample_beta(&mut rng);
            let (a, b, c) = witness_coefficients(beta);
            let p = loop {
                let (x, y, z) = (rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>());
                if let Ok(p) = CyclicParams::new(a, b, c, x, y, z) {
                    break p;
                }
            };
            let gap = cyclic_gap(&p)?;
            let eq = equality_points(a, b, c);
            let eq_gap = eq
                .iter()
                .map(|q| {
                    let e = CyclicParams::new(a, b, c, q[0], q[1], q[2])?;
                    cyclic_gap(&e).map(f64::abs)
                })
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            let near = eq.iter().any(|q| distance_to([p.x, p.y, p.z], *q) < 1e-2);
            Ok((p, gap, eq_gap, near, beta))
        })
        .collect::<Result<_>>()?;

    let (idx, min_gap) = rows
        .iter()
        .enumerate()
        .map(|(i, r)| (i, r.1))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .expect("nonempty");
    let equality_max_abs_gap = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    let near_locus_hits = rows.iter().filter(|r| r.1 < 1e-6 && r.3).count();
    let flat = |beta: f64| (beta - 1.0).abs() < FLAT_BAND;
    let off_locus_small_gaps = rows
        .iter()
        .filter(|r| r.1 < 1e-6 && !r.3 && !flat(r.4))
        .count();
    let flat_band_small_gaps = rows
        .iter()
        .filter(|r| r.1 < 1e-6 && !r.3 && flat(r.4))
        .count();

    let margin_min = (0..margin_trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed ^ 0x5eed, i);
            loop {
                let b: f64 = rng.random_range(1e-3..10.0);
                let c: f64 = rng.random_range(1e-3..10.0);
                if (b - c).abs() > 1e-6 * b.max(c) {
                    // relative margin, so tiny b and c do not hide the sign
                    return threshold_margin(b, c) / (b + c);
                }
            }
        })
        .reduce(|| f64::INFINITY, f64::min);

    let passed = min_gap >= -1e-12 && equality_max_abs_gap <= 1e-10 && margin_min > 0.0;
    Ok(CyclicReport {
        trials,
        min_gap,
        argmin: rows[idx].0,
        equality_max_abs_gap,
        near_locus_hits,
        off_locus_small_gaps,
        flat_band_small_gaps,
        margin_trials,
        margin_min,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_is_an_equality_point() {
        let (a, b, c) = witness_coefficients(0.5);
        let p = CyclicParams::new(a, b, c, 1.0, 1.0, 1.0).unwrap();
        assert!(cyclic_gap(&p).unwrap().abs() < 1e-15);
    }

    #[test]
    fn boundary_family_attains_equality() {
        for beta in [0.3, 0.5, 1.5, 1.9] {
            let (a, b, c) = witness_coefficients(beta);
            assert!((a - a_threshold(b, c)).abs() <= 1e-12);
            let pts = equality_points(a, b, c);
            assert_eq!(pts.len(), 4);
            for q in pts {
                let p = CyclicParams::new(a, b, c, q[0], q[1], q[2]).unwrap();
                assert!(cyclic_gap(&p).unwrap().abs() < 1e-12, "β={beta} {q:?}");
            }
        }
    }

    #[test]
    fn admissibility_is_enforced() {
        assert!(CyclicParams::new(1.0, 1.0, 1.0, 1.0, 1.0, 1.0).is_err());
        let (a, b, c) = witness_coefficients(1.0);
        assert!(CyclicParams::new(a, b, c, 1.0, 0.0, 0.0).is_err());
        let (a, b, c) = witness_coefficients(0.5);
        assert!(CyclicParams::new(a, b, c, 0.0, 0.0, 0.0).is_err());
        assert!(CyclicParams::new(a - 0.1, b, c, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn small_survey_passes() {
        let r = cyclic_survey(2000, 500, 3).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.off_locus_small_gaps, 0);
    }
}
