use num_complex::Complex;
use num_traits::Zero;

use super::CMatrix;
use crate::error::{Error, Result};
use crate::scalar::{cr, Real, C};

/// `M = U diag(values) U^dagger` with eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEig<T> {
    pub values: Vec<T>,
    pub vectors: CMatrix<T>,
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Ties in the eigenvalues keep the order in which the Jacobi sweep left them.
pub fn hermitian_eig<T: Real>(m: &CMatrix<T>) -> Result<HermitianEig<T>> {
    if !m.is_square() {
        return Err(Error::InvalidInput("hermitian_eig: matrix is not square".into()));
    }
    if !m.is_finite() {
        return Err(Error::InvalidInput("hermitian_eig: non-finite entries".into()));
    }
    if !m.is_hermitian(T::tol(1e-10)) {
        return Err(Error::InvalidInput("hermitian_eig: matrix is not Hermitian".into()));
    }
    let n = m.rows();
    let half = T::lit(0.5);
    let mut a = (m + &m.adjoint()).scale_real(half);
    let mut v = CMatrix::identity(n);
    let norm = a.frobenius_norm();

    for _sweep in 0..64 {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<T>()
            .sqrt();
        if off <= T::epsilon() * norm * T::lit(0.25) || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r == T::zero() {
                    continue;
                }
                let phase = apq / r;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (r + r);
                let t = if tau >= T::zero() {
                    T::one() / (tau + (T::one() + tau * tau).sqrt())
                } else {
                    -T::one() / (-tau + (T::one() + tau * tau).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                // U = diag(1, conj(phase)) * [[c, s], [-s, c]]
                let u_pp = cr(c);
                let u_pq = cr(s);
                let u_qp = phase.conj() * (-s);
                let u_qq = phase.conj() * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * u_pp + akq * u_qp;
                    a[(k, q)] = akp * u_pq + akq * u_qq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
                    a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
                }
                a[(p, q)] = C::zero();
                a[(q, p)] = C::zero();
                a[(p, p)] = cr(a[(p, p)].re);
                a[(q, q)] = cr(a[(q, q)].re);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * u_pp + vkq * u_qp;
                    v[(k, q)] = vkp * u_pq + vkq * u_qq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap().then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(HermitianEig { values, vectors })
}

fn hessenberg<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    let n = m.rows();
    let mut h = m.clone();
    for k in 0..n.saturating_sub(2) {
        let norm_x = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<T>().sqrt();
        if norm_x == T::zero() {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() == T::zero() { cr(T::one()) } else { x0 / x0.norm() };
        let alpha = -phase * norm_x;
        let mut w: Vec<C<T>> = (k + 1..n).map(|i| h[(i, k)]).collect();
        w[0] = w[0] - alpha;
        let wn = w.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if wn == T::zero() {
            continue;
        }
        for z in w.iter_mut() {
            *z = *z / wn;
        }
        let two = T::lit(2.0);
        // left: rows k+1.. of H <- (I - 2 w w^dagger) H
        for j in 0..n {
            let dot = w.iter().enumerate().fold(C::<T>::zero(), |acc, (i, wi)| acc + wi.conj() * h[(k + 1 + i, j)]);
            for (i, wi) in w.iter().enumerate() {
                h[(k + 1 + i, j)] = h[(k + 1 + i, j)] - *wi * dot * two;
            }
        }
        // right: columns k+1.. of H <- H (I - 2 w w^dagger)
        for i in 0..n {
            let dot = w.iter().enumerate().fold(C::<T>::zero(), |acc, (j, wj)| acc + h[(i, k + 1 + j)] * *wj);
            for (j, wj) in w.iter().enumerate() {
                h[(i, k + 1 + j)] = h[(i, k + 1 + j)] - dot * wj.conj() * two;
            }
        }
    }
    h
}

/// Eigenvalues of a general square matrix, via Hessenberg reduction and
/// single-shift complex QR. Returned in the order they deflate.
pub fn eigenvalues_general<T: Real>(m: &CMatrix<T>) -> Result<Vec<C<T>>> {
    if !m.is_square() {
        return Err(Error::InvalidInput("eigenvalues_general: matrix is not square".into()));
    }
    if !m.is_finite() {
        return Err(Error::InvalidInput("eigenvalues_general: non-finite entries".into()));
    }
    let n = m.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut h = hessenberg(m);
    let mut eig = vec![C::zero(); n];
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let eps = T::epsilon();
    let scale = m.max_abs().max(T::min_positive_value());
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            let s = if s == T::zero() { scale } else { s };
            if h[(l, l - 1)].norm() <= eps * s {
                h[(l, l - 1)] = C::zero();
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
        total += 1;
        iter += 1;
        if total > 200 * n {
            return Err(Error::NumericalFailure("QR iteration did not converge".into()));
        }
        let a = h[(hi - 1, hi - 1)];
        let b = h[(hi - 1, hi)];
        let c = h[(hi, hi - 1)];
        let d = h[(hi, hi)];
        let mu = if iter % 11 == 10 {
            d + cr(c.norm())
        } else {
            let half = T::lit(0.5);
            let mean = (a + d) * half;
            let disc = (((a - d) * half) * ((a - d) * half) + b * c).sqrt();
            let m1 = mean + disc;
            let m2 = mean - disc;
            if (m1 - d).norm() <= (m2 - d).norm() {
                m1
            } else {
                m2
            }
        };
        for k in l..=hi {
            h[(k, k)] = h[(k, k)] - mu;
        }
        let mut rots: Vec<(C<T>, C<T>)> = Vec::with_capacity(hi - l);
        for k in l..hi {
            let x = h[(k, k)];
            let y = h[(k + 1, k)];
            let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let (cc, ss) = if r == T::zero() { (cr(T::one()), C::zero()) } else { (x / r, y / r) };
            for j in k..=hi {
                let hk = h[(k, j)];
                let hk1 = h[(k + 1, j)];
                h[(k, j)] = cc.conj() * hk + ss.conj() * hk1;
                h[(k + 1, j)] = -ss * hk + cc * hk1;
            }
            rots.push((cc, ss));
        }
        for (idx, (cc, ss)) in rots.into_iter().enumerate() {
            let k = l + idx;
            for i in l..=(k + 1).min(hi) {
                let hik = h[(i, k)];
                let hik1 = h[(i, k + 1)];
                h[(i, k)] = hik * cc + hik1 * ss;
                h[(i, k + 1)] = -hik * ss.conj() + hik1 * cc.conj();
            }
        }
        for k in l..=hi {
            h[(k, k)] = h[(k, k)] + mu;
        }
    }
    eig[0] = h[(0, 0)];
    if eig.iter().any(|z: &Complex<T>| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NumericalFailure("non-finite eigenvalue".into()));
    }
    Ok(eig)
}
