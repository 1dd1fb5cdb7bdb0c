//! Eigendecomposition of small non-Hermitian matrices and of Hermitian
//! Fock-space matrices.
//!
//! Non-Hermitian systems are returned in biorthogonal form: unit-norm right
//! eigenvectors as the columns of `right`, and left eigenvectors as the rows of
//! `left = right⁻¹`, so that `left · right = I`. The condition score of
//! `right` measures how close the matrix is to a defective (exceptional-point)
//! configuration.

use std::cmp::Ordering;

use num_complex::Complex64 as C64;

use super::matrix::{ComplexMatrix, LargeMatrix};
use crate::error::{Error, Result};

/// Condition score at which biorthogonal normalization is refused.
pub const DEFECTIVE_THRESHOLD: f64 = 1e6;

const SCHUR_MAX_ITER_PER_EIGENVALUE: usize = 60;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    /// Sorted by descending real part, then descending imaginary part.
    pub eigenvalues: Vec<C64>,
    /// Columns are the right eigenvectors.
    pub right: ComplexMatrix,
    /// Rows are the left eigenvectors.
    pub left: ComplexMatrix,
    /// `‖V‖_F ‖V⁻¹‖_F / n`; equals 1 for a unitary eigenbasis.
    pub defectiveness: f64,
}

impl EigenSystem {
    pub fn right_vector(&self, i: usize) -> Vec<C64> {
        self.right.column(i)
    }

    pub fn left_vector(&self, i: usize) -> Vec<C64> {
        self.left.row(i)
    }

    /// Assemble from unsorted eigenpairs, sorting, fixing phases and
    /// computing the left vectors.
    pub(crate) fn from_right_pairs(mut pairs: Vec<(C64, Vec<C64>)>) -> Result<Self> {
        let n = pairs.len();
        let scale = pairs.iter().map(|(l, _)| l.norm()).fold(0.0, f64::max);
        pairs.sort_by(|a, b| eigenvalue_order(a.0, b.0, scale));
        let eigenvalues: Vec<C64> = pairs.iter().map(|(l, _)| *l).collect();
        let mut right = ComplexMatrix::zeros(n)?;
        for (j, (_, v)) in pairs.iter().enumerate() {
            let v = normalize_phase(v);
            for i in 0..n {
                right[(i, j)] = v[i];
            }
        }
        let left = match right.inverse() {
            Ok(l) => l,
            Err(_) => return Err(Error::NearDefective { score: f64::INFINITY }),
        };
        let defectiveness = right.norm() * left.norm() / n as f64;
        if !(defectiveness < DEFECTIVE_THRESHOLD) {
            return Err(Error::NearDefective { score: defectiveness });
        }
        Ok(Self { eigenvalues, right, left, defectiveness })
    }
}

/// Descending real part; real parts within `1e-12·(1+scale)` count as tied and
/// fall back to descending imaginary part.
pub fn eigenvalue_order(a: C64, b: C64, scale: f64) -> Ordering {
    let tol = 1e-12 * (1.0 + scale);
    if (a.re - b.re).abs() > tol {
        b.re.total_cmp(&a.re)
    } else {
        b.im.total_cmp(&a.im)
    }
}

pub fn sort_eigenvalues(values: &mut [C64]) {
    let scale = values.iter().map(|l| l.norm()).fold(0.0, f64::max);
    values.sort_by(|&a, &b| eigenvalue_order(a, b, scale));
}

/// Unit Euclidean norm, with the first component of (near-)maximal modulus
/// made real and positive.
pub fn normalize_phase(v: &[C64]) -> Vec<C64> {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let pivot = v.iter().find(|z| z.norm() >= (1.0 - 1e-8) * max).copied().unwrap_or(C64::new(1.0, 0.0));
    let phase = if pivot.norm() > 0.0 { pivot.conj() / pivot.norm() } else { C64::new(1.0, 0.0) };
    v.iter().map(|&z| z * phase / norm).collect()
}

/// Full biorthogonal eigendecomposition.
///
/// Two-dimensional input uses the closed-form quadratic roots; larger input
/// goes through Hessenberg reduction and shifted complex QR.
pub fn eig(m: &ComplexMatrix) -> Result<EigenSystem> {
    let pairs = match m.dim() {
        1 => vec![(m[(0, 0)], vec![C64::new(1.0, 0.0)])],
        2 => eig2_pairs(m),
        _ => schur_pairs(m)?,
    };
    EigenSystem::from_right_pairs(pairs)
}

/// Sorted eigenvalues only; never fails on defective input.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<C64>> {
    let mut values = match m.dim() {
        1 => vec![m[(0, 0)]],
        2 => {
            let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
            let half = (a + d) * 0.5;
            let root = ((a - d) * (a - d) * 0.25 + b * c).sqrt();
            vec![half + root, half - root]
        }
        _ => {
            let (t, _) = schur(m)?;
            (0..m.dim()).map(|i| t[(i, i)]).collect()
        }
    };
    sort_eigenvalues(&mut values);
    Ok(values)
}

fn eig2_pairs(m: &ComplexMatrix) -> Vec<(C64, Vec<C64>)> {
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let half = (a + d) * 0.5;
    let root = ((a - d) * (a - d) * 0.25 + b * c).sqrt();
    let scale = m.norm().max(f64::MIN_POSITIVE);
    [(half + root, 0usize), (half - root, 1usize)]
        .into_iter()
        .map(|(lambda, fallback)| {
            // Null vectors of the two rows of (M − λ); keep the better conditioned.
            let from_row0 = [b, lambda - a];
            let from_row1 = [lambda - d, c];
            let n0 = from_row0[0].norm_sqr() + from_row0[1].norm_sqr();
            let n1 = from_row1[0].norm_sqr() + from_row1[1].norm_sqr();
            let v = if n0.max(n1) <= (1e-14 * scale).powi(2) {
                let mut e = vec![C64::new(0.0, 0.0); 2];
                e[fallback] = C64::new(1.0, 0.0);
                e
            } else if n0 >= n1 {
                from_row0.to_vec()
            } else {
                from_row1.to_vec()
            };
            (lambda, v)
        })
        .collect()
}

/// Complex Schur form `M = Q T Q†` with `T` upper triangular.
pub fn schur(m: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let n = m.dim();
    let mut h = m.clone();
    let mut q = ComplexMatrix::identity(n)?;
    hessenberg(&mut h, &mut q);
    qr_iterate(&mut h, &mut q)?;
    Ok((h, q))
}

fn hessenberg(h: &mut ComplexMatrix, q: &mut ComplexMatrix) {
    let n = h.dim();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let alpha = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if alpha == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { C64::new(1.0, 0.0) };
        let mut v = x.clone();
        v[0] += phase * alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // H ← P H P with P = I − 2 v v† acting on indices k+1..n.
        for j in 0..n {
            let dot: C64 = (0..v.len()).map(|i| v[i].conj() * h[(k + 1 + i, j)]).sum();
            for i in 0..v.len() {
                h[(k + 1 + i, j)] -= v[i] * dot * 2.0;
            }
        }
        for i in 0..n {
            let dot: C64 = (0..v.len()).map(|j| h[(i, k + 1 + j)] * v[j]).sum();
            for j in 0..v.len() {
                h[(i, k + 1 + j)] -= dot * v[j].conj() * 2.0;
            }
        }
        for i in 0..n {
            let dot: C64 = (0..v.len()).map(|j| q[(i, k + 1 + j)] * v[j]).sum();
            for j in 0..v.len() {
                q[(i, k + 1 + j)] -= dot * v[j].conj() * 2.0;
            }
        }
        for i in k + 2..n {
            h[(i, k)] = C64::new(0.0, 0.0);
        }
    }
}

/// Rotation `U = [[c, s], [−s̄, c]]` with `U [a; b] = [r; 0]`.
fn givens(a: C64, b: C64) -> (f64, C64) {
    let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
    if r == 0.0 {
        return (1.0, C64::new(0.0, 0.0));
    }
    if a.norm() == 0.0 {
        return (0.0, C64::new(1.0, 0.0));
    }
    let c = a.norm() / r;
    let s = (a / a.norm()) * b.conj() / r;
    (c, s)
}

fn qr_iterate(h: &mut ComplexMatrix, q: &mut ComplexMatrix) -> Result<()> {
    let n = h.dim();
    let eps = f64::EPSILON;
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut since_deflation = 0usize;
    let max_iter = SCHUR_MAX_ITER_PER_EIGENVALUE * n;
    let zero = C64::new(0.0, 0.0);
    while hi > 0 {
        if h[(hi, hi - 1)].norm() <= eps * (h[(hi, hi)].norm() + h[(hi - 1, hi - 1)].norm()) {
            h[(hi, hi - 1)] = zero;
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        let mut lo = hi - 1;
        while lo > 0 {
            if h[(lo, lo - 1)].norm() <= eps * (h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm()) {
                h[(lo, lo - 1)] = zero;
                break;
            }
            lo -= 1;
        }
        iter += 1;
        since_deflation += 1;
        if iter > max_iter {
            return Err(Error::NonConvergence { iterations: iter });
        }

        let mu = if since_deflation % 11 == 10 {
            // Exceptional shift to break cycles.
            h[(hi, hi)] + C64::new(h[(hi, hi - 1)].norm(), 0.0) * 0.75
        } else {
            let (a, b, c, d) = (h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)]);
            let half = (a + d) * 0.5;
            let root = ((a - d) * (a - d) * 0.25 + b * c).sqrt();
            let (l1, l2) = (half + root, half - root);
            if (l1 - d).norm() <= (l2 - d).norm() {
                l1
            } else {
                l2
            }
        };

        for i in lo..=hi {
            h[(i, i)] -= mu;
        }
        let mut rotations = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..n {
                let (x, y) = (h[(k, j)], h[(k + 1, j)]);
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * c;
            }
            rotations.push((k, c, s));
        }
        for &(k, c, s) in &rotations {
            let last = (k + 2).min(hi);
            for i in 0..=last {
                let (x, y) = (h[(i, k)], h[(i, k + 1)]);
                h[(i, k)] = x * c + s.conj() * y;
                h[(i, k + 1)] = -s * x + y * c;
            }
            for i in 0..n {
                let (x, y) = (q[(i, k)], q[(i, k + 1)]);
                q[(i, k)] = x * c + s.conj() * y;
                q[(i, k + 1)] = -s * x + y * c;
            }
        }
        for i in lo..=hi {
            h[(i, i)] += mu;
        }
    }
    Ok(())
}

fn schur_pairs(m: &ComplexMatrix) -> Result<Vec<(C64, Vec<C64>)>> {
    let n = m.dim();
    let (t, q) = schur(m)?;
    let small = f64::EPSILON * t.norm().max(f64::MIN_POSITIVE);
    let mut pairs = Vec::with_capacity(n);
    for k in 0..n {
        let lambda = t[(k, k)];
        let mut y = vec![C64::new(0.0, 0.0); n];
        y[k] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let rhs: C64 = (i + 1..=k).map(|j| t[(i, j)] * y[j]).sum();
            let mut denom = t[(i, i)] - lambda;
            if denom.norm() < small {
                denom = C64::new(small, 0.0);
            }
            y[i] = -rhs / denom;
        }
        pairs.push((lambda, q.mul_vec(&y)));
    }
    Ok(pairs)
}

/// Eigenvalues (ascending) and eigenvectors (columns) of a Hermitian matrix by
/// cyclic complex Jacobi rotations.
pub fn hermitian_eigen(m: &LargeMatrix) -> Result<(Vec<f64>, LargeMatrix)> {
    let n = m.dim();
    let mut a = m.clone();
    let mut v = LargeMatrix::identity(n)?;
    let total = a.norm().max(f64::MIN_POSITIVE);
    const MAX_SWEEPS: usize = 100;
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * total {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                let phase = apq / mag;
                let (app, aqq) = (a[(p, p)].re, a[(q, q)].re);
                let theta = (aqq - app) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // W = diag(1, e^{-iφ}) · [[c, s], [−s, c]]
                let w_pp = C64::new(c, 0.0);
                let w_pq = C64::new(s, 0.0);
                let w_qp = -phase.conj() * s;
                let w_qq = phase.conj() * c;
                for i in 0..n {
                    let (x, y) = (a[(i, p)], a[(i, q)]);
                    a[(i, p)] = x * w_pp + y * w_qp;
                    a[(i, q)] = x * w_pq + y * w_qq;
                }
                for j in 0..n {
                    let (x, y) = (a[(p, j)], a[(q, j)]);
                    a[(p, j)] = w_pp.conj() * x + w_qp.conj() * y;
                    a[(q, j)] = w_pq.conj() * x + w_qq.conj() * y;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                for i in 0..n {
                    let (x, y) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = x * w_pp + y * w_qp;
                    v[(i, q)] = x * w_pq + y * w_qq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NonConvergence { iterations: MAX_SWEEPS });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = LargeMatrix::from_fn(n, |i, j| v[(i, order[j])])?;
    Ok((values, vectors))
}
