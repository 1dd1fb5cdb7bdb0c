//! Dense complex matrices.
//!
//! [`ComplexMatrix`] is the small-system workhorse (dimension at most
//! [`MAX_SMALL_DIM`]); every coefficient matrix in the crate lives there.
//! [`LargeMatrix`] backs the truncated Fock-space computations and only
//! supports what those need.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub const MAX_SMALL_DIM: usize = 8;
pub const MAX_LARGE_DIM: usize = 256;

/// Below this |det| a matrix is reported as singular.
pub const SINGULAR_DET: f64 = 1e-300;

fn matmul(n: usize, a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == C64::new(0.0, 0.0) {
                continue;
            }
            let row = &b[k * n..(k + 1) * n];
            let dst = &mut out[i * n..(i + 1) * n];
            for (d, &bkj) in dst.iter_mut().zip(row) {
                *d += aik * bkj;
            }
        }
    }
    out
}

fn adjoint_of(n: usize, a: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = a[i * n + j].conj();
        }
    }
    out
}

fn frobenius(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Square complex matrix with `1 <= dim <= 8`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    fn check_dim(dim: usize) -> Result<()> {
        if dim == 0 || dim > MAX_SMALL_DIM {
            return Err(Error::Dimension { dim, max: MAX_SMALL_DIM });
        }
        Ok(())
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::check_dim(dim)?;
        Ok(Self { dim, data: vec![C64::new(0.0, 0.0); dim * dim] })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut m = Self::zeros(dim)?;
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        Ok(m)
    }

    pub fn from_diagonal(diag: &[C64]) -> Result<Self> {
        let mut m = Self::zeros(diag.len())?;
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        Ok(m)
    }

    pub fn from_row_major(dim: usize, data: Vec<C64>) -> Result<Self> {
        Self::check_dim(dim)?;
        if data.len() != dim * dim {
            return Err(Error::Shape { expected: dim * dim, got: data.len() });
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows<R: AsRef<[C64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.len();
        let data: Vec<C64> = rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect();
        Self::from_row_major(dim, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn row(&self, i: usize) -> Vec<C64> {
        self.data[i * self.dim..(i + 1) * self.dim].to_vec()
    }

    pub fn adjoint(&self) -> Self {
        Self { dim: self.dim, data: adjoint_of(self.dim, &self.data) }
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut data = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j];
            }
        }
        Self { dim: n, data }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        frobenius(&self.data)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `ν I − self`.
    pub fn shifted(&self, nu: C64) -> Self {
        let mut out = self.scale(C64::new(-1.0, 0.0));
        for i in 0..self.dim {
            out[(i, i)] += nu;
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim;
        (0..n).map(|i| (0..n).map(|j| self.data[i * n + j] * v[j]).sum()).collect()
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim;
        (0..n).map(|j| (0..n).map(|i| v[i] * self.data[i * n + j]).sum()).collect()
    }

    /// Determinant; cofactor expansion up to 3×3, partial-pivot LU above.
    pub fn det(&self) -> C64 {
        let m = |i: usize, j: usize| self.data[i * self.dim + j];
        match self.dim {
            1 => m(0, 0),
            2 => m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0),
            3 => {
                m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
                    + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
            }
            n => {
                let mut a = self.data.clone();
                let mut det = C64::new(1.0, 0.0);
                for col in 0..n {
                    let pivot = (col..n)
                        .max_by(|&x, &y| a[x * n + col].norm().total_cmp(&a[y * n + col].norm()))
                        .unwrap_or(col);
                    let p = a[pivot * n + col];
                    if p == C64::new(0.0, 0.0) {
                        return C64::new(0.0, 0.0);
                    }
                    if pivot != col {
                        for j in 0..n {
                            a.swap(col * n + j, pivot * n + j);
                        }
                        det = -det;
                    }
                    det *= p;
                    for r in col + 1..n {
                        let f = a[r * n + col] / p;
                        for j in col..n {
                            let v = a[col * n + j];
                            a[r * n + j] -= f * v;
                        }
                    }
                }
                det
            }
        }
    }

    /// Gauss–Jordan inverse with partial pivoting.
    pub fn inverse(&self) -> Result<Self> {
        let det_abs = self.det().norm();
        if !(det_abs > SINGULAR_DET) {
            return Err(Error::Singular { det_abs });
        }
        let n = self.dim;
        let mut a = self.data.clone();
        let mut inv = Self::identity(n)?.data;
        for col in 0..n {
            let pivot =
                (col..n).max_by(|&x, &y| a[x * n + col].norm().total_cmp(&a[y * n + col].norm())).unwrap_or(col);
            if pivot != col {
                for j in 0..n {
                    a.swap(col * n + j, pivot * n + j);
                    inv.swap(col * n + j, pivot * n + j);
                }
            }
            let p = a[col * n + col];
            if p == C64::new(0.0, 0.0) {
                return Err(Error::Singular { det_abs });
            }
            let pinv = p.inv();
            for j in 0..n {
                a[col * n + j] *= pinv;
                inv[col * n + j] *= pinv;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[r * n + col];
                if f == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    let (av, iv) = (a[col * n + j], inv[col * n + j]);
                    a[r * n + j] -= f * av;
                    inv[r * n + j] -= f * iv;
                }
            }
        }
        Ok(Self { dim: n, data: inv })
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix { dim: self.dim, data: matmul(self.dim, &self.data, &rhs.data) }
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        ComplexMatrix { dim: self.dim, data }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        ComplexMatrix { dim: self.dim, data }
    }
}

/// Square complex matrix for truncated Fock spaces (`dim <= 256`).
#[derive(Debug, Clone, PartialEq)]
pub struct LargeMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl LargeMatrix {
    pub fn zeros(dim: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_LARGE_DIM {
            return Err(Error::Dimension { dim, max: MAX_LARGE_DIM });
        }
        Ok(Self { dim, data: vec![C64::new(0.0, 0.0); dim * dim] })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut m = Self::zeros(dim)?;
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        Ok(m)
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        let mut m = Self::zeros(dim)?;
        for i in 0..dim {
            for j in 0..dim {
                m.data[i * dim + j] = f(i, j);
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self { dim: self.dim, data: adjoint_of(self.dim, &self.data) }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn norm(&self) -> f64 {
        frobenius(&self.data)
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        let n = self.dim;
        (0..n).map(|j| (0..n).map(|i| self.data[i * n + j].norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// Leading `n × n` block.
    pub fn truncate(&self, n: usize) -> Result<Self> {
        assert!(n <= self.dim, "cannot truncate to a larger dimension");
        Self::from_fn(n, |i, j| self[(i, j)])
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim;
        (0..n).map(|i| (0..n).map(|j| self.data[i * n + j] * v[j]).sum()).collect()
    }
}

impl Index<(usize, usize)> for LargeMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for LargeMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &LargeMatrix {
    type Output = LargeMatrix;
    fn mul(self, rhs: &LargeMatrix) -> LargeMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        LargeMatrix { dim: self.dim, data: matmul(self.dim, &self.data, &rhs.data) }
    }
}

impl Add for &LargeMatrix {
    type Output = LargeMatrix;
    fn add(self, rhs: &LargeMatrix) -> LargeMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        LargeMatrix { dim: self.dim, data }
    }
}

impl Sub for &LargeMatrix {
    type Output = LargeMatrix;
    fn sub(self, rhs: &LargeMatrix) -> LargeMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        LargeMatrix { dim: self.dim, data }
    }
}
