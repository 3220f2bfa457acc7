use num_traits::Zero;

use super::{signature_nn_diag, CMatrix};
use crate::error::{Error, Result};
use crate::scalar::{cr, Real};

/// Factors a Hermitian `h` as `b^dagger S b`, `S = diag(signature)`, with `b`
/// upper triangular and real positive on the diagonal.
///
/// The factor is unique when it exists. A pivot whose sign disagrees with the
/// signature means `h` is not in the image of the map, reported as
/// [`Error::NotOnLeaf`].
pub fn indefinite_cholesky_upper<T: Real>(h: &CMatrix<T>, signature: &[T]) -> Result<CMatrix<T>> {
    let m = h.rows();
    if !h.is_square() || signature.len() != m {
        return Err(Error::InvalidInput("indefinite_cholesky_upper: shape mismatch".into()));
    }
    if !h.is_finite() {
        return Err(Error::InvalidInput("indefinite_cholesky_upper: non-finite entries".into()));
    }
    if !h.is_hermitian(T::tol(1e-10)) {
        return Err(Error::InvalidInput("indefinite_cholesky_upper: matrix is not Hermitian".into()));
    }
    let scale = h.max_abs().max(T::min_positive_value());
    let mut b = CMatrix::zeros(m, m);
    for j in 0..m {
        let mut piv = h[(j, j)].re;
        for k in 0..j {
            piv -= signature[k] * b[(k, j)].norm_sqr();
        }
        let ratio = piv / signature[j];
        if !(ratio > T::epsilon() * scale * T::lit(16.0)) {
            return Err(Error::NotOnLeaf { pivot: j });
        }
        let bjj = ratio.sqrt();
        b[(j, j)] = cr(bjj);
        for i in j + 1..m {
            let mut acc = h[(j, i)];
            for k in 0..j {
                acc = acc - b[(k, j)].conj() * b[(k, i)] * signature[k];
            }
            b[(j, i)] = acc / (signature[j] * bjj);
        }
        for i in 0..j {
            b[(j, i)] = num_complex::Complex::zero();
        }
    }
    Ok(b)
}

/// [`indefinite_cholesky_upper`] with the signature `diag(I_n, -I_n)`.
pub fn indefinite_cholesky_upper_nn<T: Real>(h: &CMatrix<T>) -> Result<CMatrix<T>> {
    if !h.rows().is_multiple_of(2) {
        return Err(Error::InvalidInput("signature I_nn needs an even dimension".into()));
    }
    indefinite_cholesky_upper(h, &signature_nn_diag(h.rows() / 2))
}
