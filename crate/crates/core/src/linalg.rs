//! Dense numerical kernels shared by the geometry modules.
//!
//! Everything here works on small dense matrices (dimension well below a
//! thousand): a cyclic Jacobi eigensolver for Hermitian matrices, a one-sided
//! Jacobi SVD used for numerical ranks and kernels, a partially pivoted LU,
//! and a shifted QR iteration for companion matrices.

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex64;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

const MAX_JACOBI_SWEEPS: usize = 100;

/// Full spectral decomposition of a Hermitian matrix by cyclic Jacobi
/// rotations. Eigenvalues come back sorted in descending order, with the
/// matching orthonormal eigenvectors as columns.
///
/// Only the Hermitian part of `a` is used; callers are expected to pass a
/// matrix that is already exactly symmetrized.
pub fn jacobi_eigh(a: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "jacobi_eigh needs a square matrix");
    let mut m = a.clone();
    let mut v = DMatrix::<C64>::identity(n, n);
    for i in 0..n {
        m[(i, i)] = C64::new(m[(i, i)].re, 0.0);
    }

    let fro: f64 = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if fro > 0.0 {
        for _ in 0..MAX_JACOBI_SWEEPS {
            let off: f64 = (0..n)
                .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
                .map(|(p, q)| m[(p, q)].norm_sqr())
                .sum::<f64>()
                .sqrt();
            if off <= 1e-15 * fro {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    rotate_hermitian(&mut m, &mut v, p, q);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].re.total_cmp(&m[(i, i)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    (values, vectors)
}

fn rotate_hermitian(m: &mut DMatrix<C64>, v: &mut DMatrix<C64>, p: usize, q: usize) {
    let apq = m[(p, q)];
    let beta = apq.norm();
    if beta == 0.0 || beta < 1e-300 {
        return;
    }
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    // Skip rotations that cannot change anything at working precision.
    if beta <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        m[(p, q)] = ZERO;
        m[(q, p)] = ZERO;
        return;
    }
    let phase = apq / beta;
    let theta = (aqq - app) / (2.0 * beta);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
        sign / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let conj_phase = phase.conj();
    let n = m.nrows();

    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = mkp * c - mkq * conj_phase * s;
        m[(k, q)] = mkp * s + mkq * conj_phase * c;
    }
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = mpk * c - mqk * phase * s;
        m[(q, k)] = mpk * s + mqk * phase * c;
    }
    m[(p, q)] = ZERO;
    m[(q, p)] = ZERO;
    m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = C64::new(m[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * conj_phase * s;
        v[(k, q)] = vkp * s + vkq * conj_phase * c;
    }
}

/// Singular values and right singular vectors by one-sided (Hestenes)
/// Jacobi orthogonalization of the columns of `a`.
///
/// Singular values are sorted descending; column `k` of the returned matrix
/// is the right singular vector for the `k`-th value. Tall inputs are first
/// reduced to their triangular QR factor, which has the same singular values
/// and right singular vectors.
pub fn svd_jacobi<T>(a: &DMatrix<T>) -> (Vec<f64>, DMatrix<T>)
where
    T: ComplexField<RealField = f64> + Copy,
{
    let (rows, cols) = a.shape();
    let mut u = if rows > cols {
        a.clone().qr().r()
    } else {
        a.clone()
    };
    let n = cols;
    let mut v = DMatrix::<T>::identity(n, n);
    let m = u.nrows();

    for _ in 0..80 {
        let mut rotated = false;
        for i in 0..n {
            for j in (i + 1)..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = T::zero();
                for k in 0..m {
                    let ui = u[(k, i)];
                    let uj = u[(k, j)];
                    alpha += ui.modulus_squared();
                    beta += uj.modulus_squared();
                    gamma += ui.conjugate() * uj;
                }
                let g = gamma.modulus();
                if g == 0.0 || g <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma.unscale(g);
                let conj_phase = phase.conjugate();
                let zeta = (beta - alpha) / (2.0 * g);
                let sign = if zeta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..m {
                    let ui = u[(k, i)];
                    let uj = u[(k, j)] * conj_phase;
                    u[(k, i)] = ui.scale(c) - uj.scale(s);
                    u[(k, j)] = ui.scale(s) + uj.scale(c);
                }
                for k in 0..n {
                    let vi = v[(k, i)];
                    let vj = v[(k, j)] * conj_phase;
                    v[(k, i)] = vi.scale(c) - vj.scale(s);
                    v[(k, j)] = vi.scale(s) + vj.scale(c);
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|k| u[(k, j)].modulus_squared()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let values = order.iter().map(|&i| norms[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    (values, vectors)
}

/// Singular values only, transposing wide inputs so the Jacobi sweep runs
/// over the shorter side.
pub fn singular_values<T>(a: &DMatrix<T>) -> Vec<f64>
where
    T: ComplexField<RealField = f64> + Copy,
{
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    if a.ncols() > a.nrows() {
        svd_jacobi(&a.adjoint()).0
    } else {
        svd_jacobi(a).0
    }
}

/// Number of values above `rtol * max(1, max |value|)`.
pub fn count_above(values: &[f64], rtol: f64) -> usize {
    let scale = values.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
    let tau = rtol * scale;
    values.iter().filter(|v| v.abs() > tau).count()
}

/// Numerical rank of a dense matrix under the relative tolerance policy.
pub fn matrix_rank<T>(a: &DMatrix<T>, rtol: f64) -> usize
where
    T: ComplexField<RealField = f64> + Copy,
{
    count_above(&singular_values(a), rtol)
}

/// LU factorization with partial pivoting of a square complex matrix.
pub struct Lu {
    lu: DMatrix<C64>,
    perm: Vec<usize>,
    sign: f64,
    singular: bool,
}

impl Lu {
    pub fn new(a: &DMatrix<C64>) -> Self {
        let n = a.nrows();
        assert_eq!(n, a.ncols(), "LU needs a square matrix");
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut singular = false;
        for k in 0..n {
            let (piv, best) = (k..n)
                .map(|r| (r, lu[(r, k)].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best == 0.0 {
                singular = true;
                continue;
            }
            if piv != k {
                lu.swap_rows(piv, k);
                perm.swap(piv, k);
                sign = -sign;
            }
            let pivot = lu[(k, k)];
            for r in (k + 1)..n {
                let f = lu[(r, k)] / pivot;
                lu[(r, k)] = f;
                for c in (k + 1)..n {
                    let u = lu[(k, c)];
                    lu[(r, c)] -= f * u;
                }
            }
        }
        Self {
            lu,
            perm,
            sign,
            singular,
        }
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn det(&self) -> C64 {
        let n = self.lu.nrows();
        (0..n).fold(C64::new(self.sign, 0.0), |acc, i| acc * self.lu[(i, i)])
    }

    /// Solves `A x = b` for every column of `b`. Returns `None` when the
    /// factorization hit an exactly zero pivot.
    pub fn solve(&self, b: &DMatrix<C64>) -> Option<DMatrix<C64>> {
        if self.singular {
            return None;
        }
        let n = self.lu.nrows();
        let mut x = DMatrix::from_fn(n, b.ncols(), |r, c| b[(self.perm[r], c)]);
        for col in 0..b.ncols() {
            for i in 0..n {
                let mut s = x[(i, col)];
                for k in 0..i {
                    s -= self.lu[(i, k)] * x[(k, col)];
                }
                x[(i, col)] = s;
            }
            for i in (0..n).rev() {
                let mut s = x[(i, col)];
                for k in (i + 1)..n {
                    s -= self.lu[(i, k)] * x[(k, col)];
                }
                x[(i, col)] = s / self.lu[(i, i)];
            }
        }
        Some(x)
    }
}

/// Determinant of a square complex matrix.
pub fn det(a: &DMatrix<C64>) -> C64 {
    Lu::new(a).det()
}

/// Roots of `c[0] + c[1] t + ... + c[n] t^n` as eigenvalues of the companion
/// matrix. The leading coefficient must be nonzero.
pub fn poly_roots(coeffs: &[C64]) -> Vec<C64> {
    let n = coeffs.len().saturating_sub(1);
    if n == 0 {
        return Vec::new();
    }
    let lead = coeffs[n];
    assert!(lead.norm() > 0.0, "leading coefficient must be nonzero");
    let mut h = DMatrix::<C64>::zeros(n, n);
    for j in 0..n {
        h[(0, j)] = -coeffs[n - 1 - j] / lead;
    }
    for i in 1..n {
        h[(i, i - 1)] = ONE;
    }
    hessenberg_eigenvalues(h)
}

/// Eigenvalues of an upper Hessenberg matrix by single-shift complex QR
/// iteration with Wilkinson shifts and deflation.
pub fn hessenberg_eigenvalues(mut h: DMatrix<C64>) -> Vec<C64> {
    let n = h.nrows();
    let mut eig = vec![ZERO; n];
    if n == 0 {
        return eig;
    }
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    loop {
        if hi == 0 {
            eig[0] = h[(0, 0)];
            break;
        }
        let mut l = hi;
        while l > 0 {
            let sub = h[(l, l - 1)].norm();
            let diag = h[(l, l)].norm() + h[(l - 1, l - 1)].norm();
            if sub <= f64::EPSILON * diag.max(f64::MIN_POSITIVE) {
                h[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            eig[hi] = h[(hi, hi)];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > 10_000 * n {
            // Give up on the remaining block; report its diagonal.
            for (i, e) in eig.iter_mut().enumerate().take(hi + 1) {
                *e = h[(i, i)];
            }
            break;
        }

        let shift = if iter.is_multiple_of(11) {
            // Exceptional shift to break cycles.
            h[(hi, hi)] + C64::new(0.75 * h[(hi, hi - 1)].norm(), 0.3)
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };

        for i in l..=hi {
            h[(i, i)] -= shift;
        }
        let mut rotations = Vec::with_capacity(hi - l);
        for k in l..hi {
            let a = h[(k, k)];
            let b = h[(k + 1, k)];
            let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
            let (c, s) = if r == 0.0 { (ONE, ZERO) } else { (a / r, b / r) };
            for col in k..=hi {
                let x = h[(k, col)];
                let y = h[(k + 1, col)];
                h[(k, col)] = c.conj() * x + s.conj() * y;
                h[(k + 1, col)] = -s * x + c * y;
            }
            rotations.push((c, s));
        }
        for (idx, k) in (l..hi).enumerate() {
            let (c, s) = rotations[idx];
            let top = (k + 2).min(hi);
            for row in l..=top {
                let x = h[(row, k)];
                let y = h[(row, k + 1)];
                h[(row, k)] = c * x + s * y;
                h[(row, k + 1)] = -s.conj() * x + c.conj() * y;
            }
        }
        for i in l..=hi {
            h[(i, i)] += shift;
        }
    }
    eig
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let m1 = (a + d) * 0.5 + disc;
    let m2 = (a + d) * 0.5 - disc;
    if (m1 - d).norm() <= (m2 - d).norm() {
        m1
    } else {
        m2
    }
}

/// `binom(n, k)` in floating point-free integer arithmetic.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_hermitian(n: usize, seed: u64) -> DMatrix<C64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        (&a + a.adjoint()).scale(0.5)
    }

    #[test]
    fn jacobi_reconstructs_random_hermitian() {
        for (n, seed) in [(1, 1), (2, 2), (5, 3), (9, 4), (16, 5)] {
            let a = random_hermitian(n, seed);
            let (vals, vecs) = jacobi_eigh(&a);
            let lambda = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                n,
                vals.iter().map(|&x| C64::new(x, 0.0)),
            ));
            let rec = &vecs * lambda * vecs.adjoint();
            let err = (&rec - &a).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(err < 1e-12, "n={n} err={err}");
            let ortho = (vecs.adjoint() * &vecs - DMatrix::identity(n, n))
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            assert!(ortho < 1e-12);
            assert!(vals.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn jacobi_handles_degenerate_spectrum() {
        let a = DMatrix::<C64>::identity(4, 4).scale(2.0);
        let (vals, _) = jacobi_eigh(&a);
        assert_eq!(vals, vec![2.0; 4]);
    }

    #[test]
    fn svd_matches_known_singular_values() {
        let a = DMatrix::from_row_slice(3, 2, &[3.0, 0.0, 0.0, 4.0, 0.0, 0.0]);
        let s = singular_values(&a);
        assert!((s[0] - 4.0).abs() < 1e-14 && (s[1] - 3.0).abs() < 1e-14);
        let wide = a.transpose();
        let s = singular_values(&wide);
        assert!((s[0] - 4.0).abs() < 1e-14 && (s[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn svd_right_vector_spans_kernel() {
        let a = DMatrix::from_row_slice(
            3,
            3,
            &[
                C64::new(1.0, 1.0),
                C64::new(2.0, 0.0),
                C64::new(3.0, -1.0),
                C64::new(0.0, 1.0),
                C64::new(1.0, 0.0),
                C64::new(0.5, 0.0),
                C64::new(1.0, 2.0),
                C64::new(3.0, 0.0),
                C64::new(3.5, -1.0),
            ],
        );
        // third row = first + second, so rank 2
        let (s, v) = svd_jacobi(&a);
        assert!(s[2] < 1e-13 * s[0]);
        let k = v.column(2).into_owned();
        assert!((&a * k).norm() < 1e-12);
        assert_eq!(matrix_rank(&a, 1e-8), 2);
    }

    #[test]
    fn lu_determinant_and_solve() {
        let a = DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.0, 0.0), C64::new(2.0, 0.0), C64::new(1.0, 0.0), C64::new(3.0, 1.0)],
        );
        let lu = Lu::new(&a);
        assert!((lu.det() - C64::new(-2.0, 0.0)).norm() < 1e-15);
        let b = DMatrix::from_column_slice(2, 1, &[C64::new(2.0, 0.0), C64::new(4.0, 1.0)]);
        let x = lu.solve(&b).unwrap();
        assert!((&a * x - b).norm() < 1e-14);
    }

    #[test]
    fn companion_roots_of_known_polynomials() {
        // (t - 1)(t + 2)(t - 3i) expanded
        let r = [ONE, C64::new(-2.0, 0.0), C64::new(0.0, 3.0)];
        let mut coeffs = vec![ONE];
        for root in r {
            let mut next = vec![ZERO; coeffs.len() + 1];
            for (i, c) in coeffs.iter().enumerate() {
                next[i + 1] += *c;
                next[i] -= *c * root;
            }
            coeffs = next;
        }
        let mut found = poly_roots(&coeffs);
        for root in r {
            let (idx, d) = found
                .iter()
                .enumerate()
                .map(|(i, z)| (i, (z - root).norm()))
                .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
            assert!(d < 1e-12, "root {root} missed by {d}");
            found.remove(idx);
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(7, 4), 35);
        assert_eq!(binomial(6, 4), 15);
        assert_eq!(binomial(3, 5), 0);
    }
}
