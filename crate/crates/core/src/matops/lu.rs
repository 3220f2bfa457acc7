use num_traits::{One, Zero};

use super::CMatrix;
use crate::error::{Error, Result};
use crate::scalar::{Real, C};

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    lu: CMatrix<T>,
    perm: Vec<usize>,
    swaps: usize,
    singular: bool,
}

impl<T: Real> Lu<T> {
    pub fn new(a: &CMatrix<T>) -> Self {
        assert!(a.is_square(), "LU needs a square matrix");
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        let mut singular = false;
        let scale = a.max_abs();
        for k in 0..n {
            let (piv, best) =
                (k..n).map(|i| (i, lu[(i, k)].norm())).fold((k, T::zero()), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best <= T::epsilon() * scale * T::lit(1e-3) || best == T::zero() {
                singular = true;
                continue;
            }
            if piv != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(piv, j)];
                    lu[(piv, j)] = tmp;
                }
                perm.swap(k, piv);
                swaps += 1;
            }
            let d = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / d;
                lu[(i, k)] = f;
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] = lu[(i, j)] - f * u;
                }
            }
        }
        Self { lu, perm, swaps, singular }
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn determinant(&self) -> C<T> {
        if self.singular {
            return C::zero();
        }
        let d = self.lu.diag().into_iter().fold(C::one(), |a, b| a * b);
        if self.swaps % 2 == 1 {
            -d
        } else {
            d
        }
    }

    pub fn solve(&self, rhs: &CMatrix<T>) -> Result<CMatrix<T>> {
        let n = self.lu.rows();
        if rhs.rows() != n {
            return Err(Error::InvalidInput("LU solve: right-hand side has wrong row count".into()));
        }
        if self.singular {
            return Err(Error::NumericalFailure("singular matrix in LU solve".into()));
        }
        let m = rhs.cols();
        let mut x = CMatrix::from_fn(n, m, |i, j| rhs[(self.perm[i], j)]);
        for col in 0..m {
            for i in 0..n {
                let mut s = x[(i, col)];
                for k in 0..i {
                    s = s - self.lu[(i, k)] * x[(k, col)];
                }
                x[(i, col)] = s;
            }
            for i in (0..n).rev() {
                let mut s = x[(i, col)];
                for k in i + 1..n {
                    s = s - self.lu[(i, k)] * x[(k, col)];
                }
                x[(i, col)] = s / self.lu[(i, i)];
            }
        }
        if !x.is_finite() {
            return Err(Error::NumericalFailure("non-finite LU solution".into()));
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<CMatrix<T>> {
        self.solve(&CMatrix::identity(self.lu.rows()))
    }
}
