//! From a group element back to reduced coordinates.
//!
//! Iwasawa-type splittings `g = k b` and `g = b k`, the Cartan
//! decomposition of `SU(n,n)` elements and the first-gauge extraction of
//! `(q, p)`.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::matops::{indefinite_cholesky_upper, rel_diff, signature_nn_diag, svd_ordered, CMatrix};
use crate::model::{ModelParams, ReducedPoint};
use crate::reconstruction::{build_ttilde, solve_v};
use crate::scalar::{cr, wrap_angle, Real, C};

/// `g = k b` with `k` pseudo-unitary and `b` upper triangular positive.
pub fn decompose_kb<T: Real>(g: &CMatrix<T>) -> Result<(CMatrix<T>, CMatrix<T>)> {
    check_even_square(g)?;
    let n = g.rows() / 2;
    let s = CMatrix::signature_nn(n);
    let h = g.adjoint().matmul(&s).matmul(g);
    let h = (&h + &h.adjoint()).scale_real(T::lit(0.5));
    let b = indefinite_cholesky_upper(&h, &signature_nn_diag(n))?;
    let k = g.matmul(&b.inverse()?);
    Ok((k, b))
}

/// `g = b k` with `b` upper triangular positive and `k` pseudo-unitary.
pub fn decompose_bk<T: Real>(g: &CMatrix<T>) -> Result<(CMatrix<T>, CMatrix<T>)> {
    check_even_square(g)?;
    let m = g.rows();
    let n = m / 2;
    let s = CMatrix::signature_nn(n);
    let h = g.matmul(&s).matmul(&g.adjoint());
    // reversal J turns the lower factor b^dagger into an upper one
    let rev = |a: &CMatrix<T>| CMatrix::from_fn(m, m, |i, j| a[(m - 1 - i, m - 1 - j)]);
    let hr = rev(&h);
    let hr = (&hr + &hr.adjoint()).scale_real(T::lit(0.5));
    let mut sig = signature_nn_diag::<T>(n);
    sig.reverse();
    let u = indefinite_cholesky_upper(&hr, &sig)?;
    let b = rev(&u.adjoint());
    let k = b.solve(g)?;
    Ok((b, k))
}

fn check_even_square<T: Real>(g: &CMatrix<T>) -> Result<()> {
    if !g.is_square() || g.rows() == 0 || !g.rows().is_multiple_of(2) {
        return Err(Error::InvalidInput(format!("expected a 2n x 2n matrix, got {}x{}", g.rows(), g.cols())));
    }
    if !g.is_finite() {
        return Err(Error::InvalidInput("non-finite matrix entries".into()));
    }
    Ok(())
}

/// `k = diag(rho_hat, tau_hat) (Gamma, Sigma; Sigma, Gamma) diag(khat, lhat)`
/// with `Sigma = sinh(Delta)`, `Gamma = cosh(Delta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KakData<T = f64> {
    pub rho_hat: CMatrix<T>,
    pub tau_hat: CMatrix<T>,
    pub khat: CMatrix<T>,
    pub lhat: CMatrix<T>,
    /// Strictly decreasing and positive.
    pub delta: Vec<T>,
}

impl<T: Real> KakData<T> {
    pub fn sigma(&self) -> Vec<T> {
        self.delta.iter().map(|d| d.sinh()).collect()
    }

    pub fn gamma(&self) -> Vec<T> {
        self.delta.iter().map(|d| d.cosh()).collect()
    }

    /// The middle factor `(Gamma, Sigma; Sigma, Gamma)`.
    pub fn middle(&self) -> CMatrix<T> {
        let s = CMatrix::from_real_diag(&self.sigma());
        let g = CMatrix::from_real_diag(&self.gamma());
        CMatrix::from_blocks(&g, &s, &s, &g)
    }

    pub fn reassemble(&self) -> CMatrix<T> {
        let left = CMatrix::block_diag(&self.rho_hat, &self.tau_hat);
        let right = CMatrix::block_diag(&self.khat, &self.lhat);
        left.matmul(&self.middle()).matmul(&right)
    }
}

/// Cartan decomposition of a pseudo-unitary `k`.
///
/// The radial part is read from the singular values of the lower-left block
/// `C = tau_hat Sigma khat`, which stay well separated even when several
/// `Sigma_i` are small.
pub fn cartan_kak<T: Real>(k: &CMatrix<T>) -> Result<KakData<T>> {
    check_even_square(k)?;
    let n = k.rows() / 2;
    let scale = k.frobenius_norm();
    if k.pseudo_unitary_defect() > T::tol(1e-8) * (scale * scale).max(T::one()) {
        return Err(Error::InvalidInput("cartan_kak: matrix is not pseudo-unitary".into()));
    }
    let [a, _b, c, d] = k.quadrants();
    let svd = svd_ordered(&c)?;
    let sigma = svd.s.clone();
    let top = sigma[0].max(T::one());
    let gap_tol = T::tol(1e-9) * top;
    if !(sigma[n - 1] > gap_tol) {
        return Err(Error::DegenerateElement(format!(
            "singular value {} of the off-diagonal block vanishes",
            sigma[n - 1]
        )));
    }
    for i in 0..n.saturating_sub(1) {
        if !(sigma[i] - sigma[i + 1] > gap_tol) {
            return Err(Error::DegenerateElement(format!("radial coordinates {i} and {} collide", i + 1)));
        }
    }
    let gamma: Vec<T> = sigma.iter().map(|&s| T::one().hypot(s)).collect();
    let gamma_inv: Vec<C<T>> = gamma.iter().map(|&g| cr(g.recip())).collect();
    let tau_hat = svd.u;
    let khat = svd.v.adjoint();
    let rho_hat = a.matmul(&khat.adjoint()).scale_cols(&gamma_inv);
    let lhat = tau_hat.adjoint().matmul(&d).scale_rows(&gamma_inv);
    let delta = sigma.iter().map(|s| s.asinh()).collect();
    let kak = KakData { rho_hat, tau_hat, khat, lhat, delta };
    let res = rel_diff(&kak.reassemble(), k);
    if res > T::tol(1e-8) {
        return Err(Error::NumericalFailure(format!("Cartan reassembly residual {res}")));
    }
    Ok(kak)
}

/// Step residuals collected during extraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractionDiagnostics<T = f64> {
    /// `b_R` diagonal blocks against `(x I, I / x)`.
    pub b_r_blocks: T,
    /// Reassembly of the Cartan decomposition.
    pub kak: T,
    /// `|v|` read from the element against the rational solution.
    pub v_mismatch: T,
    /// Largest off-diagonal modulus of `T T~^T`.
    pub off_diagonal: T,
    /// Largest deviation of the diagonal moduli of `T T~^T` from one.
    pub phase_modulus: T,
}

impl<T: Real> ExtractionDiagnostics<T> {
    pub fn max(&self) -> T {
        [self.b_r_blocks, self.kak, self.v_mismatch, self.off_diagonal, self.phase_modulus]
            .into_iter()
            .fold(T::zero(), T::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extraction<T = f64> {
    pub point: ReducedPoint<T>,
    /// `T` after the residual torus has been fixed.
    pub t: CMatrix<T>,
    pub diagnostics: ExtractionDiagnostics<T>,
}

/// Reduced coordinates of an element of the constraint surface, with `p`
/// in `(-pi, pi]`.
pub fn extract_reduced<T: Real>(g: &CMatrix<T>, params: &ModelParams<T>) -> Result<ReducedPoint<T>> {
    extract_with_diagnostics(g, params).map(|e| e.point)
}

pub fn extract_with_diagnostics<T: Real>(g: &CMatrix<T>, params: &ModelParams<T>) -> Result<Extraction<T>> {
    check_even_square(g)?;
    let n = params.n();
    if g.rows() != 2 * n {
        return Err(Error::InvalidInput(format!("element is {}x{}, parameters expect n = {n}", g.rows(), g.cols())));
    }
    let limit = T::tol(1e-6);
    let surface = |what: &str, r: T| Error::NotOnConstraintSurface(format!("{what} residual {r}"));
    let (x, alpha) = (params.x(), params.alpha());

    let (k_l, b_r) = decompose_kb(g).map_err(|e| match e {
        Error::NotOnLeaf { pivot } => Error::NotOnConstraintSurface(format!("no K B splitting (pivot {pivot})")),
        other => other,
    })?;
    let ident = CMatrix::identity(n);
    let [r11, _, _, r22] = b_r.quadrants();
    let b_r_blocks = rel_diff(&r11, &ident.scale_real(x)).max(rel_diff(&r22, &ident.scale_real(x.recip())));
    if !(b_r_blocks <= limit) {
        return Err(surface("b_R diagonal block", b_r_blocks));
    }

    let kak = cartan_kak(&k_l)?;
    let kak_res = rel_diff(&kak.reassemble(), &k_l);
    let sigma = kak.sigma();
    let q: Vec<T> = sigma.iter().map(|s| s.ln()).collect();

    let left = CMatrix::block_diag(&ident, &kak.tau_hat.adjoint());
    let right = CMatrix::block_diag(&kak.khat.adjoint(), &kak.lhat.adjoint());
    let gp = left.matmul(g).matmul(&right);
    let big_omega = gp.block(n, n, n, n);
    let lambda_inv: Vec<C<T>> = sigma.iter().map(|&s| cr(params.y().hypot(x * s).recip())).collect();
    let t_raw = big_omega.scale_rows(&lambda_inv);

    let v = solve_v(&sigma, alpha).map_err(|e| match e {
        Error::SeparationViolation { i, k } => {
            Error::NotOnConstraintSurface(format!("extracted q violates separation for pair ({i}, {k})"))
        }
        other => other,
    })?;
    let mut vhat = vec![C::zero(); n];
    vhat[0] = cr(params.vhat_norm_sq().sqrt());
    let vc: Vec<C<T>> = kak.rho_hat.adjoint().mul_vec(&vhat).iter().zip(&sigma).map(|(z, &s)| *z * s).collect();
    let v_mismatch = vc.iter().zip(&v).map(|(z, &w)| (z.norm() - w).abs() / w.max(T::one())).fold(T::zero(), T::max);
    if !(v_mismatch <= limit) {
        return Err(surface("|v|", v_mismatch));
    }
    let delta: Vec<C<T>> = vc.iter().map(|z| C::from_polar(T::one(), z.arg())).collect();
    let delta_conj: Vec<C<T>> = delta.iter().map(|z| z.conj()).collect();
    let t = t_raw.scale_rows(&delta_conj).scale_cols(&delta);

    let ttilde = build_ttilde(&sigma, alpha, &v)?;
    let m = t.matmul(&ttilde.transpose());
    let mut off_diagonal = T::zero();
    let mut phase_modulus = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                phase_modulus = phase_modulus.max((m[(i, i)].norm() - T::one()).abs());
            } else {
                off_diagonal = off_diagonal.max(m[(i, j)].norm());
            }
        }
    }
    if !(off_diagonal <= limit) {
        return Err(surface("off-diagonal of T T~^T", off_diagonal));
    }
    if !(phase_modulus <= limit) {
        return Err(surface("modulus of diagonal of T T~^T", phase_modulus));
    }
    let p: Vec<T> = (0..n).map(|i| wrap_angle(m[(i, i)].arg())).collect();
    let point = ReducedPoint::new(q, p).map_err(|e| match e {
        Error::ChamberViolation(s) => Error::DegenerateElement(s),
        other => other,
    })?;
    let diagnostics = ExtractionDiagnostics { b_r_blocks, kak: kak_res, v_mismatch, off_diagonal, phase_modulus };
    Ok(Extraction { point, t, diagnostics })
}

/// Checks that a phase difference is a multiple of `2 pi` within `tol`.
pub fn angles_agree<T: Real>(a: T, b: T, tol: T) -> bool {
    wrap_angle(a - b).abs() <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reconstruction::assemble;

    fn params(alpha: f64, x: f64, y: f64, n: usize) -> ModelParams<f64> {
        ModelParams::new(alpha, x, y, n).unwrap()
    }

    fn diag_phase(th: &[f64]) -> CMatrix<f64> {
        CMatrix::from_diag(&th.iter().map(|&t| C::from_polar(1.0, t)).collect::<Vec<_>>())
    }

    fn normal_form(delta: &[f64]) -> CMatrix<f64> {
        let s = CMatrix::from_real_diag(&delta.iter().map(|d| d.sinh()).collect::<Vec<_>>());
        let g = CMatrix::from_real_diag(&delta.iter().map(|d| d.cosh()).collect::<Vec<_>>());
        CMatrix::from_blocks(&g, &s, &s, &g)
    }

    #[test]
    fn kb_of_pure_factors() {
        let k =
            CMatrix::block_diag(&diag_phase(&[0.3, -1.0]), &diag_phase(&[2.0, 0.1])).matmul(&normal_form(&[1.0, 0.5]));
        let (k2, b2) = decompose_kb(&k).unwrap();
        assert!(rel_diff(&k2, &k) < 1e-12 && rel_diff(&b2, &CMatrix::identity(4)) < 1e-12);

        let b = CMatrix::from_fn(4, 4, |i, j| {
            if i == j {
                cr(1.0 + i as f64)
            } else if j > i {
                C::new(0.3 * j as f64, -0.2 * i as f64)
            } else {
                C::zero()
            }
        });
        let (k3, b3) = decompose_kb(&b).unwrap();
        assert!(rel_diff(&k3, &CMatrix::identity(4)) < 1e-12 && rel_diff(&b3, &b) < 1e-12);
        let (b4, k4) = decompose_bk(&b).unwrap();
        assert!(rel_diff(&k4, &CMatrix::identity(4)) < 1e-12 && rel_diff(&b4, &b) < 1e-12);
    }

    #[test]
    fn splittings_of_assembled_element() {
        let p = params(0.5, 1.3, 0.7, 2);
        let pt = ReducedPoint::new(vec![1.1, -0.6], vec![0.4, -2.0]).unwrap();
        let (f, _) = assemble(&pt, &p).unwrap();
        let (k, b) = decompose_kb(&f.g).unwrap();
        assert!(rel_diff(&b, &f.b_r) < 1e-10);
        assert!(rel_diff(&k, &f.k_l) < 1e-10);
        let (bl, kr) = decompose_bk(&f.g).unwrap();
        assert!(rel_diff(&bl.block(2, 2, 2, 2), &CMatrix::identity(2).scale_real(0.7)) < 1e-10);
        assert!(rel_diff(&bl, &f.b_l) < 1e-10);
        assert!(rel_diff(&kr, &f.k_r) < 1e-10);
    }

    #[test]
    fn wrong_signature_not_on_leaf() {
        // swapping the two halves flips the signature of g^dagger I g
        let mut g = CMatrix::<f64>::zeros(2, 2);
        g[(0, 1)] = cr(1.0);
        g[(1, 0)] = cr(1.0);
        assert!(matches!(decompose_kb(&g), Err(Error::NotOnLeaf { .. })));
        assert!(matches!(decompose_bk(&g), Err(Error::NotOnLeaf { .. })));
    }

    #[test]
    fn kak_normal_form() {
        let kak = cartan_kak(&normal_form(&[1.0, 0.5])).unwrap();
        assert!((kak.delta[0] - 1.0).abs() < 1e-12 && (kak.delta[1] - 0.5).abs() < 1e-12);
        for u in [&kak.rho_hat, &kak.tau_hat, &kak.khat, &kak.lhat] {
            // diagonal unitary: a point of the phase torus
            assert!(u.is_unitary(1e-12));
            assert!((0..2).all(|i| (0..2).all(|j| i == j || u[(i, j)].norm() < 1e-12)));
        }
    }

    #[test]
    fn kak_rejects_collision() {
        assert!(matches!(cartan_kak(&normal_form(&[0.7, 0.7])), Err(Error::DegenerateElement(_))));
        assert!(matches!(cartan_kak(&normal_form(&[0.7, 0.0])), Err(Error::DegenerateElement(_))));
    }

    #[test]
    fn extract_scalar_phase() {
        let p = params(0.5, 1.0, 1.0, 1);
        let pt = ReducedPoint::new(vec![0.2], vec![0.3]).unwrap();
        let (f, _) = assemble(&pt, &p).unwrap();
        let e = extract_with_diagnostics(&f.g, &p).unwrap();
        assert!((e.t[(0, 0)] - C::from_polar(1.0, 0.3)).norm() < 1e-12);
        assert!((e.point.q()[0] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn extract_rejects_identity() {
        let p = params(0.5, 1.3, 1.0, 2);
        assert!(extract_reduced(&CMatrix::identity(4), &p).is_err());
    }
}
