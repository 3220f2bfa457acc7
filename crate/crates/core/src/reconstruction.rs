//! From reduced coordinates to a point on the constraint surface.
//!
//! Given `(q, p)` and the couplings, builds the group element
//! `g = k_L b_R = b_L k_R` of `SU(n,n)` in the first gauge together with
//! every intermediate object (`v`, `T`, `rho`, `sigma`, `Omega`, ...).

use num_traits::One;

use crate::error::{Error, Result};
use crate::matops::{rel_diff, CMatrix};
use crate::model::{ensure_admissible, CartanData, ModelParams, ReducedPoint};
use crate::scalar::{cr, Real, C};

/// Intermediate data of the first gauge.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintData<T = f64> {
    pub cartan: CartanData<T>,
    /// Nonnegative solution of the rational identity; `v_k = Sigma_k vtilde_k`.
    pub v: Vec<T>,
    pub vtilde: Vec<T>,
    /// `|vtilde| e_1`.
    pub vhat: Vec<T>,
    /// Real orthogonal, row `i` proportional to `v_k / (Sigma_i^2 - alpha^2 Sigma_k^2)`.
    pub ttilde: CMatrix<T>,
    /// `exp(i p)`.
    pub phases: Vec<C<T>>,
    /// `diag(phases) * ttilde`.
    pub t: CMatrix<T>,
    /// `Lambda T`.
    pub big_omega: CMatrix<T>,
    /// `Sigma^-1 (Omega - Gamma / x)`.
    pub omega: CMatrix<T>,
    /// `rho Sigma^-1 (y^2 Gamma - Omega^dagger / x)`.
    pub nu: CMatrix<T>,
    pub rho: CMatrix<T>,
    pub sigma: CMatrix<T>,
}

/// The two splittings `g = k_L b_R = b_L k_R`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafFactorization<T = f64> {
    pub g: CMatrix<T>,
    pub k_l: CMatrix<T>,
    pub k_r: CMatrix<T>,
    pub b_l: CMatrix<T>,
    pub b_r: CMatrix<T>,
}

fn check_sigma<T: Real>(sigma: &[T]) -> Result<()> {
    if sigma.iter().any(|s| !(*s > T::zero()) || !s.is_finite()) {
        return Err(Error::InvalidInput("Sigma must be positive and finite".into()));
    }
    for (i, w) in sigma.windows(2).enumerate() {
        if !(w[0] > w[1]) {
            return Err(Error::ChamberViolation(format!("Sigma[{i}] <= Sigma[{}]", i + 1)));
        }
    }
    Ok(())
}

/// Nonnegative `v` with
/// `1 + v^T (alpha^2 Sigma^2 - lambda)^-1 v = det(Sigma^2 - lambda) / det(alpha^2 Sigma^2 - lambda)`.
pub fn solve_v<T: Real>(sigma: &[T], alpha: T) -> Result<Vec<T>> {
    check_sigma(sigma)?;
    let a2 = alpha * alpha;
    let s2: Vec<T> = sigma.iter().map(|&s| s * s).collect();
    let n = sigma.len();
    let mut v = Vec::with_capacity(n);
    for k in 0..n {
        let mut val = s2[k] * (T::one() - a2);
        for j in (0..n).filter(|&j| j != k) {
            let f = (s2[j] - a2 * s2[k]) / (a2 * (s2[j] - s2[k]));
            if !(f > T::zero()) {
                return Err(Error::SeparationViolation { i: j.min(k), k: j.max(k) });
            }
            val *= f;
        }
        if !(val > T::zero()) || !val.is_finite() {
            return Err(Error::NumericalFailure(format!("radicand for v[{k}] is {val}")));
        }
        v.push(val.sqrt());
    }
    Ok(v)
}

/// Real orthogonal `T~` whose row `i` is the normalized vector
/// `v_k / (Sigma_i^2 - alpha^2 Sigma_k^2)`.
pub fn build_ttilde<T: Real>(sigma: &[T], alpha: T, v: &[T]) -> Result<CMatrix<T>> {
    check_sigma(sigma)?;
    if v.len() != sigma.len() {
        return Err(Error::InvalidInput("v and Sigma differ in length".into()));
    }
    let n = sigma.len();
    let a2 = alpha * alpha;
    let mut t = CMatrix::zeros(n, n);
    for i in 0..n {
        let si2 = sigma[i] * sigma[i];
        let row: Vec<T> = (0..n).map(|k| v[k] / (si2 - a2 * sigma[k] * sigma[k])).collect();
        let norm = row.iter().map(|&r| r * r).sum::<T>().sqrt();
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::NumericalFailure(format!("row {i} of T~ cannot be normalized")));
        }
        for (k, r) in row.iter().enumerate() {
            t[(i, k)] = cr(*r / norm);
        }
    }
    Ok(t)
}

/// Reference KKS element and the rotation taking `vtilde` to `vhat`.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaRho<T> {
    /// `diag(alpha^(1-n), alpha, ..., alpha)`.
    pub sigma: CMatrix<T>,
    /// Real orthogonal with `det = 1` and `rho vtilde = vhat`.
    pub rho: CMatrix<T>,
    pub vhat: Vec<T>,
}

pub fn build_sigma_rho<T: Real>(cartan: &CartanData<T>, v: &[T], params: &ModelParams<T>) -> Result<SigmaRho<T>> {
    let n = cartan.n();
    if v.len() != n || params.n() != n {
        return Err(Error::InvalidInput("dimension mismatch in build_sigma_rho".into()));
    }
    let vt: Vec<T> = v.iter().zip(&cartan.sigma).map(|(v, s)| *v / *s).collect();
    let norm_sq = vt.iter().map(|&x| x * x).sum::<T>();
    let expect = params.vhat_norm_sq();
    if (norm_sq - expect).abs() > T::tol(1e-8) * expect.max(T::one()) {
        return Err(Error::InternalInconsistency(format!("|vtilde|^2 = {norm_sq}, expected {expect}")));
    }
    let norm = norm_sq.sqrt();
    let mut vhat = vec![T::zero(); n];
    vhat[0] = norm;

    let alpha = params.alpha();
    let mut sig = vec![alpha; n];
    sig[0] = alpha.powi(1 - n as i32);
    let sigma = CMatrix::from_real_diag(&sig);

    let w: Vec<T> = vt.iter().zip(&vhat).map(|(a, b)| *a - *b).collect();
    let wn = w.iter().map(|&x| x * x).sum::<T>();
    let mut rho = CMatrix::identity(n);
    if wn > T::epsilon() * T::epsilon() * norm_sq {
        let two = T::lit(2.0);
        rho = CMatrix::from_real_fn(n, n, |i, j| {
            let d = if i == j { T::one() } else { T::zero() };
            d - two * w[i] * w[j] / wn
        });
        // a single reflection has det -1; flip the last row (n >= 2 here)
        for j in 0..n {
            rho[(n - 1, j)] = -rho[(n - 1, j)];
        }
    }
    Ok(SigmaRho { sigma, rho, vhat })
}

/// Builds the constrained group element in the first gauge.
pub fn assemble<T: Real>(
    point: &ReducedPoint<T>,
    params: &ModelParams<T>,
) -> Result<(LeafFactorization<T>, ConstraintData<T>)> {
    assemble_gauged(point, params, None)
}

/// As [`assemble`], with `rho` replaced by `R rho` for `R` in the stabilizer
/// `U(1) x U(n-1)` of the line through `vhat`.
pub fn assemble_gauged<T: Real>(
    point: &ReducedPoint<T>,
    params: &ModelParams<T>,
    gauge: Option<&CMatrix<T>>,
) -> Result<(LeafFactorization<T>, ConstraintData<T>)> {
    ensure_admissible(point, params)?;
    let n = params.n();
    let cartan = CartanData::from_sigma(point.sigma(), params);
    let alpha = params.alpha();
    let (x, y) = (params.x(), params.y());

    let v = solve_v(&cartan.sigma, alpha)?;
    let ttilde = build_ttilde(&cartan.sigma, alpha, &v)?;
    let SigmaRho { sigma, mut rho, vhat } = build_sigma_rho(&cartan, &v, params)?;
    if let Some(r) = gauge {
        check_stabilizer(r, n)?;
        rho = r.matmul(&rho);
    }
    let vtilde: Vec<T> = v.iter().zip(&cartan.sigma).map(|(v, s)| *v / *s).collect();

    let phases: Vec<C<T>> = point.p().iter().map(|&p| C::from_polar(T::one(), p)).collect();
    let t = ttilde.scale_rows(&phases);
    let lam: Vec<C<T>> = cartan.lambda.iter().map(|&l| cr(l)).collect();
    let gam: Vec<C<T>> = cartan.gamma.iter().map(|&g| cr(g)).collect();
    let sig: Vec<C<T>> = cartan.sigma.iter().map(|&s| cr(s)).collect();
    let sig_inv: Vec<C<T>> = cartan.sigma.iter().map(|&s| cr(s.recip())).collect();
    let gam_m = CMatrix::from_diag(&gam);
    let sig_m = CMatrix::from_diag(&sig);

    let big_omega = t.scale_rows(&lam);
    let omega = (&big_omega - &gam_m.scale_real(x.recip())).scale_rows(&sig_inv);
    let nu = rho.matmul(&(&gam_m.scale_real(y * y) - &big_omega.adjoint().scale_real(x.recip())).scale_rows(&sig_inv));

    let ident = CMatrix::identity(n);
    let zero = CMatrix::zeros(n, n);
    let k_l = CMatrix::from_blocks(&rho.matmul(&gam_m), &rho.matmul(&sig_m), &sig_m, &gam_m);
    let b_r = CMatrix::from_blocks(&ident.scale_real(x), &omega, &zero, &ident.scale_real(x.recip()));
    let g = k_l.matmul(&b_r);
    let b_l =
        CMatrix::from_blocks(&sigma.scale_real(y.recip()), &nu.scale_real(y.recip()), &zero, &ident.scale_real(y));
    let k_r = b_l.solve(&g)?;

    let fact = LeafFactorization { g, k_l, k_r, b_l, b_r };
    let data = ConstraintData { cartan, v, vtilde, vhat, ttilde, phases, t, big_omega, omega, nu, rho, sigma };
    Ok((fact, data))
}

fn check_stabilizer<T: Real>(r: &CMatrix<T>, n: usize) -> Result<()> {
    if r.rows() != n || !r.is_square() {
        return Err(Error::InvalidInput("gauge matrix has the wrong shape".into()));
    }
    if !r.is_unitary(T::tol(1e-10)) {
        return Err(Error::InvalidInput("gauge matrix is not unitary".into()));
    }
    let off = (1..n).map(|i| r[(i, 0)].norm() + r[(0, i)].norm()).fold(T::zero(), T::max);
    if off > T::tol(1e-10) {
        return Err(Error::InvalidInput("gauge matrix does not preserve the line through vhat".into()));
    }
    Ok(())
}

/// Named residuals of the constraint identities.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport<T = f64> {
    pub entries: Vec<(&'static str, T)>,
}

impl<T: Real> ResidualReport<T> {
    fn push(&mut self, name: &'static str, value: T) {
        self.entries.push((name, value));
    }

    pub fn get(&self, name: &str) -> Option<T> {
        self.entries.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
    }

    /// Largest residual; NaN entries count as infinite.
    pub fn max(&self) -> T {
        self.entries.iter().map(|(_, v)| if v.is_nan() { T::infinity() } else { *v }).fold(T::zero(), T::max)
    }

    pub fn violations(&self, tol: T) -> Vec<&'static str> {
        self.entries.iter().filter(|(_, v)| !(*v <= tol)).map(|(n, _)| *n).collect()
    }

    pub fn ensure(&self, tol: T) -> Result<()> {
        let bad = self.violations(tol);
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::NotOnConstraintSurface(format!("residuals above {tol}: {}", bad.join(", "))))
        }
    }
}

fn rel_pseudo_unitary<T: Real>(k: &CMatrix<T>) -> T {
    let scale = k.frobenius_norm();
    k.pseudo_unitary_defect() / (scale * scale).max(T::one())
}

/// Evaluates every constraint identity. `data` adds the checks on the
/// intermediate objects; without it only the group element is examined.
pub fn verify_constraints<T: Real>(
    fact: &LeafFactorization<T>,
    data: Option<&ConstraintData<T>>,
    params: &ModelParams<T>,
) -> ResidualReport<T> {
    let n = params.n();
    let (x, y, alpha) = (params.x(), params.y(), params.alpha());
    let mut rep = ResidualReport { entries: Vec::new() };
    let shapes_ok =
        [&fact.g, &fact.k_l, &fact.k_r, &fact.b_l, &fact.b_r].iter().all(|m| m.rows() == 2 * n && m.cols() == 2 * n);
    if !shapes_ok {
        rep.push("shape", T::infinity());
        return rep;
    }
    let ident = CMatrix::identity(n);
    let zero = CMatrix::zeros(n, n);

    rep.push("g = k_L b_R", rel_diff(&fact.k_l.matmul(&fact.b_r), &fact.g));
    rep.push("g = b_L k_R", rel_diff(&fact.b_l.matmul(&fact.k_r), &fact.g));
    rep.push("k_L pseudo-unitary", rel_pseudo_unitary(&fact.k_l));
    rep.push("k_R pseudo-unitary", rel_pseudo_unitary(&fact.k_r));
    rep.push("det g = 1", (fact.g.determinant() - C::one()).norm());

    let [r11, _r12, r21, r22] = fact.b_r.quadrants();
    rep.push("b_R(1,1) = x I", rel_diff(&r11, &ident.scale_real(x)));
    rep.push("b_R(2,2) = I/x", rel_diff(&r22, &ident.scale_real(x.recip())));
    rep.push("b_R(2,1) = 0", rel_diff(&r21, &zero));

    let mut sig = vec![alpha; n];
    sig[0] = alpha.powi(1 - n as i32);
    let sigma_ref = CMatrix::from_real_diag(&sig);
    let [l11, _l12, l21, l22] = fact.b_l.quadrants();
    rep.push("b_L(1,1) = sigma / y", rel_diff(&l11, &sigma_ref.scale_real(y.recip())));
    rep.push("b_L(2,2) = y I", rel_diff(&l22, &ident.scale_real(y)));
    rep.push("b_L(2,1) = 0", rel_diff(&l21, &zero));

    // g I g^dagger = b_L I b_L^dagger
    let s = CMatrix::signature_nn(n);
    let ggd = fact.g.matmul(&s).matmul(&fact.g.adjoint());
    let [h11, h12, _h21, h22] = ggd.quadrants();
    rep.push("(g I g^dagger)(2,2) = -y^2 I", rel_diff(&h22, &ident.scale_real(-y * y)));
    let kks = (&sigma_ref.matmul(&sigma_ref.adjoint()) - &h12.matmul(&h12.adjoint())).scale_real((y * y).recip());
    rep.push("(g I g^dagger)(1,1) = (sigma sigma^dagger - nu nu^dagger) / y^2", rel_diff(&h11, &kks));

    if let Some(d) = data {
        push_data_residuals(&mut rep, d, params, &h12);
    }
    rep
}

fn push_data_residuals<T: Real>(
    rep: &mut ResidualReport<T>,
    d: &ConstraintData<T>,
    params: &ModelParams<T>,
    h12: &CMatrix<T>,
) {
    let n = params.n();
    let alpha = params.alpha();
    let a2 = alpha * alpha;
    let ident = CMatrix::identity(n);
    let min_v = d.v.iter().copied().fold(T::infinity(), T::min);
    rep.push("v >= 0", (-min_v).max(T::zero()));
    let vt2 = d.vtilde.iter().map(|&x| x * x).sum::<T>();
    rep.push(
        "|vtilde|^2 = alpha^(2-2n) - alpha^2",
        (vt2 - params.vhat_norm_sq()).abs() / params.vhat_norm_sq().max(T::one()),
    );
    rep.push("T~ real", d.ttilde.max_imag());
    rep.push("T~^T T~ = I", rel_diff(&d.ttilde.transpose().matmul(&d.ttilde), &ident));

    let s2: Vec<T> = d.cartan.sigma.iter().map(|&s| s * s).collect();
    let s2m = CMatrix::from_real_diag(&s2);
    let vv = CMatrix::from_real_fn(n, n, |i, j| d.v[i] * d.v[j]);
    let now_t = &s2m.scale_real(a2) + &vv;
    rep.push(
        "T^dagger Sigma^2 T = alpha^2 Sigma^2 + v v^T",
        rel_diff(&d.t.adjoint().matmul(&s2m).matmul(&d.t), &now_t),
    );
    let l2: Vec<T> = d.cartan.lambda.iter().map(|&l| l * l).collect();
    rep.push(
        "Omega Omega^dagger = Lambda^2",
        rel_diff(&d.big_omega.matmul(&d.big_omega.adjoint()), &CMatrix::from_real_diag(&l2)),
    );
    let vh = CMatrix::from_real_fn(n, n, |i, j| d.vhat[i] * d.vhat[j]);
    rep.push(
        "sigma sigma^dagger = alpha^2 I + vhat vhat^dagger",
        rel_diff(&d.sigma.matmul(&d.sigma.adjoint()), &(&ident.scale_real(a2) + &vh)),
    );
    rep.push("rho unitary", d.rho.unitary_defect());
    let rv = d.rho.mul_vec(&d.vtilde.iter().map(|&x| cr(x)).collect::<Vec<_>>());
    let line = rv.iter().skip(1).map(|z| z.norm_sqr()).sum::<T>().sqrt();
    let len = (rv[0].norm() - d.vhat[0]).abs();
    rep.push("rho vtilde on the vhat line", (line + len) / d.vhat[0].max(T::one()));
    rep.push("(g I g^dagger)(1,2) = -nu", rel_diff(h12, &d.nu.scale_real(-T::one())));
}
