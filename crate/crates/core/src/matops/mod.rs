//! Dense complex matrix kernel.
//!
//! Sizes in this crate never exceed a few dozen rows, so everything is plain
//! row-major storage with Jacobi-type factorizations that are accurate to a
//! small multiple of machine precision.

mod cholesky;
mod eig;
mod expm;
mod lu;
mod svd;

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::scalar::{cr, Real, C};

pub use cholesky::{indefinite_cholesky_upper, indefinite_cholesky_upper_nn};
pub use eig::{eigenvalues_general, hermitian_eig, HermitianEig};
pub use expm::expm;
pub use lu::Lu;
pub use svd::{svd_ordered, Svd};

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix<T = f64> {
    rows: usize,
    cols: usize,
    data: Vec<C<T>>,
}

impl<T: fmt::Debug> fmt::Debug for CMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = &self.data[i * self.cols + j];
                write!(f, "({:?}, {:?})  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds from row-major data. Panics if the length does not match.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C<T>>) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major data has wrong length");
        Self { rows, cols, data }
    }

    pub fn from_real_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        Self::from_fn(rows, cols, |i, j| cr(f(i, j)))
    }

    pub fn from_diag(d: &[C<T>]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &z) in d.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn from_real_diag(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = cr(x);
        }
        m
    }

    /// The signature matrix `diag(I_n, -I_n)`.
    pub fn signature_nn(n: usize) -> Self {
        Self::from_real_diag(&signature_nn_diag(n))
    }

    /// Assembles `[[a, b], [c, d]]` from four blocks of compatible shapes.
    pub fn from_blocks(a: &Self, b: &Self, c: &Self, d: &Self) -> Self {
        assert!(a.rows == b.rows && c.rows == d.rows && a.cols == c.cols && b.cols == d.cols);
        let rows = a.rows + c.rows;
        let cols = a.cols + b.cols;
        Self::from_fn(rows, cols, |i, j| match (i < a.rows, j < a.cols) {
            (true, true) => a[(i, j)],
            (true, false) => b[(i, j - a.cols)],
            (false, true) => c[(i - a.rows, j)],
            (false, false) => d[(i - a.rows, j - a.cols)],
        })
    }

    pub fn block_diag(a: &Self, d: &Self) -> Self {
        Self::from_blocks(a, &Self::zeros(a.rows, d.cols), &Self::zeros(d.rows, a.cols), d)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C<T>] {
        &self.data
    }

    /// Copies the `nr x nc` block starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Self {
        assert!(r0 + nr <= self.rows && c0 + nc <= self.cols, "block out of range");
        Self::from_fn(nr, nc, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Self) {
        assert!(r0 + b.rows <= self.rows && c0 + b.cols <= self.cols, "block out of range");
        for i in 0..b.rows {
            for j in 0..b.cols {
                self[(r0 + i, c0 + j)] = b[(i, j)];
            }
        }
    }

    /// The four `n x n` blocks of a `2n x 2n` matrix.
    pub fn quadrants(&self) -> [Self; 4] {
        assert!(self.is_square() && self.rows.is_multiple_of(2), "quadrants need an even square matrix");
        let n = self.rows / 2;
        [self.block(0, 0, n, n), self.block(0, n, n, n), self.block(n, 0, n, n), self.block(n, n, n, n)]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(C<T>) -> C<T>) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| f(z)).collect() }
    }

    pub fn scale(&self, s: C<T>) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_real(&self, s: T) -> Self {
        self.map(|z| z * s)
    }

    pub fn diag(&self) -> Vec<C<T>> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn trace(&self) -> C<T> {
        self.diag().into_iter().fold(C::zero(), |a, b| a + b)
    }

    pub fn column(&self, j: usize) -> Vec<C<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn row(&self, i: usize) -> Vec<C<T>> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn mul_vec(&self, v: &[C<T>]) -> Vec<C<T>> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| (0..self.cols).fold(C::zero(), |acc, j| acc + self[(i, j)] * v[j])).collect()
    }

    /// Left multiplication by `diag(d)`.
    pub fn scale_rows(&self, d: &[C<T>]) -> Self {
        assert_eq!(d.len(), self.rows);
        Self::from_fn(self.rows, self.cols, |i, j| d[i] * self[(i, j)])
    }

    /// Right multiplication by `diag(d)`.
    pub fn scale_cols(&self, d: &[C<T>]) -> Self {
        assert_eq!(d.len(), self.cols);
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * d[j])
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] = out.data[i * rhs.cols + j] + a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        out
    }

    pub fn powi(&self, k: u32) -> Self {
        assert!(self.is_square());
        let mut out = Self::identity(self.rows);
        for _ in 0..k {
            out = out.matmul(self);
        }
        out
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> T {
        (0..self.cols).map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<T>()).fold(T::zero(), T::max)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest imaginary part in absolute value.
    pub fn max_imag(&self) -> T {
        self.data.iter().map(|z| z.im.abs()).fold(T::zero(), T::max)
    }

    pub fn hermitian_defect(&self) -> T {
        (self - &self.adjoint()).frobenius_norm() / self.frobenius_norm().max(T::min_positive_value())
    }

    /// `||M - M^dagger|| <= tol ||M||`.
    pub fn is_hermitian(&self, tol: T) -> bool {
        self.is_square() && (self - &self.adjoint()).frobenius_norm() <= tol * self.frobenius_norm()
    }

    pub fn unitary_defect(&self) -> T {
        (&self.adjoint().matmul(self) - &Self::identity(self.cols)).frobenius_norm()
    }

    pub fn is_unitary(&self, tol: T) -> bool {
        self.is_square() && self.unitary_defect() <= tol
    }

    /// `||M^dagger I_nn M - I_nn||`.
    pub fn pseudo_unitary_defect(&self) -> T {
        assert!(self.is_square() && self.rows.is_multiple_of(2));
        let s = Self::signature_nn(self.rows / 2);
        (&self.adjoint().matmul(&s).matmul(self) - &s).frobenius_norm()
    }

    pub fn is_pseudo_unitary(&self, tol: T) -> bool {
        self.is_square() && self.rows.is_multiple_of(2) && self.pseudo_unitary_defect() <= tol
    }

    /// Largest strictly-lower entry relative to the matrix norm.
    pub fn lower_defect(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.rows {
            for j in 0..i.min(self.cols) {
                worst = worst.max(self[(i, j)].norm());
            }
        }
        worst / self.frobenius_norm().max(T::one())
    }

    /// Upper triangular with a real positive diagonal.
    pub fn is_upper_triangular_positive(&self, tol: T) -> bool {
        let scale = self.frobenius_norm().max(T::one());
        self.is_square()
            && self.lower_defect() <= tol
            && self.diag().iter().all(|z| z.re > T::zero() && z.im.abs() <= tol * scale)
    }

    pub fn lu(&self) -> Lu<T> {
        Lu::new(self)
    }

    pub fn determinant(&self) -> C<T> {
        self.lu().determinant()
    }

    pub fn inverse(&self) -> crate::Result<Self> {
        self.lu().inverse()
    }

    /// Solves `self * X = rhs`.
    pub fn solve(&self, rhs: &Self) -> crate::Result<Self> {
        self.lu().solve(rhs)
    }

    /// Converts the scalar type.
    pub fn cast<U: Real>(&self) -> CMatrix<U> {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .map(|z| Complex::new(U::lit(z.re.to_f64_lossy()), U::lit(z.im.to_f64_lossy())))
                .collect(),
        }
    }
}

/// `||a - b||_F / max(1, ||b||_F)`.
pub fn rel_diff<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> T {
    (a - b).frobenius_norm() / b.frobenius_norm().max(T::one())
}

pub fn signature_nn_diag<T: Real>(n: usize) -> Vec<T> {
    (0..2 * n).map(|i| if i < n { T::one() } else { -T::one() }).collect()
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = C<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Add for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn add(self, rhs: Self) -> CMatrix<T> {
        assert!(self.rows == rhs.rows && self.cols == rhs.cols, "add shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn sub(self, rhs: Self) -> CMatrix<T> {
        assert!(self.rows == rhs.rows && self.cols == rhs.cols, "sub shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }
}

impl<T: Real> Neg for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn neg(self) -> CMatrix<T> {
        self.map(|z| -z)
    }
}

impl<T: Real> Mul for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn mul(self, rhs: Self) -> CMatrix<T> {
        self.matmul(rhs)
    }
}
