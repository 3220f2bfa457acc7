use num_traits::Zero;

use super::CMatrix;
use crate::error::{Error, Result};
use crate::scalar::{cr, Real, C};

/// `M = U diag(S) V^dagger`, singular values descending.
#[derive(Debug, Clone)]
pub struct Svd<T> {
    pub u: CMatrix<T>,
    pub s: Vec<T>,
    pub v: CMatrix<T>,
}

impl<T: Real> Svd<T> {
    pub fn reconstruct(&self) -> CMatrix<T> {
        let s: Vec<C<T>> = self.s.iter().map(|&x| cr(x)).collect();
        self.u.scale_cols(&s).matmul(&self.v.adjoint())
    }
}

/// Singular value decomposition of a square matrix by one-sided (Hestenes)
/// Jacobi rotations. Ties are broken by original column index.
pub fn svd_ordered<T: Real>(m: &CMatrix<T>) -> Result<Svd<T>> {
    if !m.is_square() {
        return Err(Error::InvalidInput("svd_ordered: matrix is not square".into()));
    }
    if !m.is_finite() {
        return Err(Error::InvalidInput("svd_ordered: non-finite entries".into()));
    }
    let n = m.rows();
    let mut w = m.clone();
    let mut v = CMatrix::identity(n);
    let eps = T::epsilon();

    let mut converged = false;
    for _sweep in 0..80 {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let mut alpha = T::zero();
                let mut beta = T::zero();
                let mut gamma = C::<T>::zero();
                for k in 0..n {
                    alpha += w[(k, i)].norm_sqr();
                    beta += w[(k, j)].norm_sqr();
                    gamma = gamma + w[(k, i)].conj() * w[(k, j)];
                }
                let g = gamma.norm();
                if g == T::zero() || g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (g + g);
                let t = if zeta >= T::zero() {
                    T::one() / (zeta + (T::one() + zeta * zeta).sqrt())
                } else {
                    -T::one() / (-zeta + (T::one() + zeta * zeta).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                let pc = phase.conj();
                for k in 0..n {
                    let wi = w[(k, i)];
                    let wj = w[(k, j)] * pc;
                    w[(k, i)] = wi * c - wj * s;
                    w[(k, j)] = wi * s + wj * c;
                    let vi = v[(k, i)];
                    let vj = v[(k, j)] * pc;
                    v[(k, i)] = vi * c - vj * s;
                    v[(k, j)] = vi * s + vj * c;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NumericalFailure("one-sided Jacobi SVD did not converge".into()));
    }

    let norms: Vec<T> = (0..n).map(|j| (0..n).map(|k| w[(k, j)].norm_sqr()).sum::<T>().sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).unwrap().then(a.cmp(&b)));

    let scale = norms.iter().copied().fold(T::zero(), T::max);
    let tiny = scale * eps * T::lit(n as f64);
    let mut u = CMatrix::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    let mut filled = Vec::with_capacity(n);
    for (col, &j) in order.iter().enumerate() {
        s.push(norms[j]);
        if norms[j] > tiny && norms[j] > T::zero() {
            for k in 0..n {
                u[(k, col)] = w[(k, j)] / norms[j];
            }
            filled.push(col);
        }
    }
    // complete U for (numerically) zero singular values
    let mut basis = 0usize;
    for col in 0..n {
        if filled.contains(&col) {
            continue;
        }
        loop {
            let mut cand = vec![C::zero(); n];
            cand[basis % n] = cr(T::one());
            basis += 1;
            for &f in &filled {
                let dot = (0..n).fold(C::zero(), |acc, k| acc + u[(k, f)].conj() * cand[k]);
                for k in 0..n {
                    cand[k] = cand[k] - u[(k, f)] * dot;
                }
            }
            let nn = cand.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
            if nn > T::lit(0.1) {
                for k in 0..n {
                    u[(k, col)] = cand[k] / nn;
                }
                filled.push(col);
                break;
            }
            if basis > 2 * n {
                return Err(Error::NumericalFailure("could not complete singular basis".into()));
            }
        }
    }
    let v = CMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(Svd { u, s, v })
}
