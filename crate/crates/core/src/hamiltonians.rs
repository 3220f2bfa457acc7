//! The commuting family `Phi_nu(g) = -(1/2nu) tr (g I g^dagger I)^nu`, the
//! closed-form reduced Hamiltonian and the reduced Poisson bracket.

use serde::Serialize;

use crate::dual::Dual;
use crate::error::{Error, Result};
use crate::matops::{eigenvalues_general, CMatrix};
use crate::model::{ModelParams, ReducedPoint, RuijsenaarsCouplings};
use crate::reconstruction::assemble;
use crate::scalar::{Real, C};

/// `g I g^dagger I`, conserved by the flow of `Phi_1`.
pub fn lax_matrix<T: Real>(g: &CMatrix<T>) -> Result<CMatrix<T>> {
    if !g.is_square() || !g.rows().is_multiple_of(2) || g.rows() == 0 {
        return Err(Error::InvalidInput("expected a 2n x 2n matrix".into()));
    }
    if !g.is_finite() {
        return Err(Error::InvalidInput("non-finite matrix entries".into()));
    }
    let s = CMatrix::signature_nn(g.rows() / 2);
    Ok(g.matmul(&s).matmul(&g.adjoint()).matmul(&s))
}

/// `Phi_nu(g)`. The trace is real in exact arithmetic; a relative imaginary
/// residue above `1e-8` is reported as a numerical failure.
pub fn phi_trace<T: Real>(g: &CMatrix<T>, nu: u32) -> Result<T> {
    if nu == 0 {
        return Err(Error::InvalidInput("order nu must be at least 1".into()));
    }
    let m = lax_matrix(g)?;
    let tr = m.powi(nu).trace();
    if tr.im.abs() > T::tol(1e-8) * tr.re.abs().max(T::one()) {
        return Err(Error::NumericalFailure(format!("trace has imaginary part {}", tr.im)));
    }
    Ok(-tr.re / T::lit(2.0 * nu as f64))
}

/// The closed form of `Phi_1` in the variables `(Sigma, p)` for arbitrary
/// nonzero `Sigma` and any `alpha > 0` (including `alpha = 1`).
///
/// The pair factor is written as `sqrt(ab) / |Sigma_k^2 - Sigma_i^2|`, which
/// is even in every `Sigma` and symmetric in each pair.
pub fn phi1_sigma_raw<T: Real>(sigma: &[T], p: &[T], x: T, y: T, alpha: T) -> Result<T> {
    let n = sigma.len();
    if p.len() != n || n == 0 {
        return Err(Error::InvalidInput("Sigma and p must be non-empty of equal length".into()));
    }
    if sigma.iter().any(|s| *s == T::zero() || !s.is_finite()) {
        return Err(Error::InvalidInput("Sigma must be finite and nonzero".into()));
    }
    let half = T::lit(0.5);
    let c2 = (alpha - alpha.recip()).powi(2);
    let inv2: Vec<T> = sigma.iter().map(|&s| (s * s).recip()).collect();
    let mut total = half * (x.powi(-2) + y * y) * inv2.iter().copied().sum::<T>();
    for i in 0..n {
        let si2 = sigma[i] * sigma[i];
        let mut prod = T::one();
        for k in (0..n).filter(|&k| k != i) {
            let sk2 = sigma[k] * sigma[k];
            let d = sk2 - si2;
            let ab = d * d - c2 * si2 * sk2;
            if !(ab > T::zero()) {
                return Err(Error::SeparationViolation { i: i.min(k), k: i.max(k) });
            }
            prod *= ab.sqrt() / d.abs();
        }
        let radial = (T::one() + inv2[i]).sqrt() * (x * x + y * y * inv2[i]).sqrt();
        total -= p[i].cos() * radial * prod / x;
    }
    Ok(total)
}

/// `Phi_1` on the reduced space in the variables `(Sigma, p)`.
pub fn hamiltonian_sigma<T: Real>(sigma: &[T], p: &[T], params: &ModelParams<T>) -> Result<T> {
    if sigma.len() != params.n() {
        return Err(Error::InvalidInput(format!("expected {} particles, got {}", params.n(), sigma.len())));
    }
    phi1_sigma_raw(sigma, p, params.x(), params.y(), params.alpha())
}

fn pair_factor<T: Real>(d: T, c2: T) -> Option<(T, T)> {
    let s = d.sinh();
    let f2 = T::one() - c2 / (T::lit(4.0) * s * s);
    if !(f2 > T::zero()) {
        return None;
    }
    // d ln F / d d
    let g = c2 * d.cosh() / (T::lit(4.0) * s * s * s * f2);
    Some((f2.sqrt(), g))
}

struct QTerms<T> {
    u: Vec<T>,
    w: Vec<T>,
    dw: Vec<T>,
    prod: Vec<T>,
    /// `dlog[i][k] = d ln F(q_i - q_k) / d q_i`
    dlog: Vec<Vec<T>>,
}

fn q_terms<T: Real>(q: &[T], p: &[T], c: &RuijsenaarsCouplings<T>) -> Result<QTerms<T>> {
    let n = q.len();
    if p.len() != n || n == 0 {
        return Err(Error::InvalidInput("q and p must be non-empty of equal length".into()));
    }
    if q.iter().chain(p).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("coordinates must be finite".into()));
    }
    let b2 = c.b_sq;
    let u: Vec<T> = q.iter().map(|&q| (-(q + q)).exp()).collect();
    let w: Vec<T> = u.iter().map(|&u| (T::one() + (T::one() + b2) * u + b2 * u * u).sqrt()).collect();
    let dw: Vec<T> = u.iter().zip(&w).map(|(&u, &w)| -(u * (T::one() + b2) + T::lit(2.0) * b2 * u * u) / w).collect();
    let mut prod = vec![T::one(); n];
    let mut dlog = vec![vec![T::zero(); n]; n];
    for i in 0..n {
        for k in (0..n).filter(|&k| k != i) {
            let (f, g) =
                pair_factor(q[i] - q[k], c.c_sq).ok_or(Error::SeparationViolation { i: i.min(k), k: i.max(k) })?;
            prod[i] *= f;
            dlog[i][k] = g;
        }
    }
    Ok(QTerms { u, w, dw, prod, dlog })
}

/// The Ruijsenaars-type Hamiltonian in `q`-form with couplings `(a^2, b^2, c^2)`.
pub fn hamiltonian_q<T: Real>(q: &[T], p: &[T], c: &RuijsenaarsCouplings<T>) -> Result<T> {
    let t = q_terms(q, p, c)?;
    let mut h = c.a_sq * t.u.iter().copied().sum::<T>();
    for ((p, w), f) in p.iter().zip(&t.w).zip(&t.prod) {
        h -= p.cos() * *w * *f;
    }
    Ok(h)
}

/// Analytic partial derivatives `(dH/dq, dH/dp)` of [`hamiltonian_q`].
pub fn hamiltonian_q_gradient<T: Real>(q: &[T], p: &[T], c: &RuijsenaarsCouplings<T>) -> Result<(Vec<T>, Vec<T>)> {
    let n = q.len();
    let t = q_terms(q, p, c)?;
    let two = T::lit(2.0);
    let dp: Vec<T> = (0..n).map(|i| p[i].sin() * t.w[i] * t.prod[i]).collect();
    let mut dq: Vec<T> = t.u.iter().map(|&u| -two * c.a_sq * u).collect();
    for i in 0..n {
        let cp = p[i].cos();
        let own: T = t.dlog[i].iter().copied().sum();
        dq[i] -= cp * (t.dw[i] + t.w[i] * own) * t.prod[i];
        for j in (0..n).filter(|&j| j != i) {
            dq[j] += cp * t.w[i] * t.prod[i] * t.dlog[i][j];
        }
    }
    Ok((dq, dp))
}

/// `Phi_nu` evaluated on the reconstructed group element.
pub fn phi_reduced<T: Real>(point: &ReducedPoint<T>, params: &ModelParams<T>, nu: u32) -> Result<T> {
    let (fact, _) = assemble(point, params)?;
    phi_trace(&fact.g, nu)
}

/// Step control for finite-difference brackets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FdConfig {
    /// Initial step; the coordinate scale `max(1, |z|)` multiplies it.
    pub h0: f64,
    /// Combine steps `h0` and `h0 / 2` to cancel the `h^2` error term.
    pub richardson: bool,
}

impl Default for FdConfig {
    fn default() -> Self {
        Self { h0: 1e-4, richardson: true }
    }
}

fn shifted<T: Real>(point: &ReducedPoint<T>, idx: usize, h: T) -> Result<ReducedPoint<T>> {
    let n = point.n();
    let mut q = point.q().to_vec();
    let mut p = point.p().to_vec();
    if idx < n {
        q[idx] += h;
    } else {
        p[idx - n] += h;
    }
    ReducedPoint::new(q, p)
}

/// Central-difference gradient in the order `(q_1..q_n, p_1..p_n)`.
pub fn fd_gradient<T: Real, F>(f: &F, point: &ReducedPoint<T>, cfg: &FdConfig) -> Result<Vec<T>>
where
    F: Fn(&ReducedPoint<T>) -> Result<T>,
{
    let n = point.n();
    let mut grad = Vec::with_capacity(2 * n);
    for idx in 0..2 * n {
        let z = if idx < n { point.q()[idx] } else { point.p()[idx - n] };
        let h = T::lit(cfg.h0) * z.abs().max(T::one());
        let central =
            |h: T| -> Result<T> { Ok((f(&shifted(point, idx, h)?)? - f(&shifted(point, idx, -h)?)?) / (h + h)) };
        let d1 = central(h)?;
        let d = if cfg.richardson {
            let d2 = central(h * T::lit(0.5))?;
            (T::lit(4.0) * d2 - d1) / T::lit(3.0)
        } else {
            d1
        };
        grad.push(d);
    }
    Ok(grad)
}

/// `{f, h} = (1/2) sum_i (df/dq_i dh/dp_i - df/dp_i dh/dq_i)`.
pub fn bracket_from_gradients<T: Real>(df: &[T], dh: &[T]) -> T {
    let n = df.len() / 2;
    let s: T = (0..n).map(|i| df[i] * dh[n + i] - df[n + i] * dh[i]).sum();
    s * T::lit(0.5)
}

pub fn poisson_bracket_fd<T: Real, F, H>(f: &F, h: &H, point: &ReducedPoint<T>, cfg: &FdConfig) -> Result<T>
where
    F: Fn(&ReducedPoint<T>) -> Result<T>,
    H: Fn(&ReducedPoint<T>) -> Result<T>,
{
    let df = fd_gradient(f, point, cfg)?;
    let dh = fd_gradient(h, point, cfg)?;
    Ok(bracket_from_gradients(&df, &dh))
}

/// Exact gradient of `Phi_nu` in the order `(q_1..q_n, p_1..p_n)`, one
/// forward-mode pass per coordinate through [`assemble`].
pub fn phi_gradient_dual<T: Real>(point: &ReducedPoint<T>, params: &ModelParams<T>, nu: u32) -> Result<Vec<T>> {
    let n = point.n();
    let dparams: ModelParams<Dual<T>> =
        ModelParams::new(Dual::constant(params.alpha()), Dual::constant(params.x()), Dual::constant(params.y()), n)?;
    (0..2 * n)
        .map(|idx| {
            let seed = |k: usize, v: T| if k == idx { Dual::variable(v) } else { Dual::constant(v) };
            let q = point.q().iter().enumerate().map(|(k, &v)| seed(k, v)).collect();
            let p = point.p().iter().enumerate().map(|(k, &v)| seed(n + k, v)).collect();
            Ok(phi_reduced(&ReducedPoint::new(q, p)?, &dparams, nu)?.eps)
        })
        .collect()
}

/// How [`involution_report`] differentiates the reduced Hamiltonians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[derive(Default)]
pub enum GradientMethod {
    FiniteDifference(FdConfig),
    /// Forward-mode dual numbers; exact up to rounding.
    #[default]
    Dual,
}

/// Pairwise brackets of `Phi_1 .. Phi_max_order` over a set of points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvolutionReport {
    pub orders: Vec<u32>,
    /// Largest `|{Phi_mu, Phi_nu}|` over the sample points.
    pub bracket_matrix: Vec<Vec<f64>>,
    /// The same, divided by `|grad Phi_mu| |grad Phi_nu| / 2`.
    pub relative_matrix: Vec<Vec<f64>>,
    pub method: GradientMethod,
    /// Finite-difference step, absent for dual-number gradients.
    pub fd_step: Option<f64>,
    /// 2 for plain central differences, 4 with Richardson extrapolation.
    pub extrapolation_order: Option<u32>,
    pub samples: usize,
    /// `(mu, nu, value)` of the largest entry.
    pub worst: (u32, u32, f64),
}

impl InvolutionReport {
    pub fn max_abs(&self) -> f64 {
        self.worst.2
    }

    pub fn max_relative(&self) -> f64 {
        self.relative_matrix.iter().flatten().fold(0.0, |a, &b| if b.is_nan() { f64::INFINITY } else { a.max(b) })
    }
}

pub fn involution_report<T: Real>(
    params: &ModelParams<T>,
    points: &[ReducedPoint<T>],
    max_order: u32,
    method: GradientMethod,
) -> Result<InvolutionReport> {
    if max_order == 0 || max_order > 4 {
        return Err(Error::InvalidInput(format!("max_order must be in 1..=4, got {max_order}")));
    }
    let orders: Vec<u32> = (1..=max_order).collect();
    let m = orders.len();
    let mut abs = vec![vec![0.0f64; m]; m];
    let mut rel = vec![vec![0.0f64; m]; m];
    for point in points {
        let grads = orders
            .iter()
            .map(|&nu| match method {
                GradientMethod::FiniteDifference(cfg) => {
                    fd_gradient(&|z: &ReducedPoint<T>| phi_reduced(z, params, nu), point, &cfg)
                }
                GradientMethod::Dual => phi_gradient_dual(point, params, nu),
            })
            .collect::<Result<Vec<_>>>()?;
        for a in 0..m {
            for b in a + 1..m {
                let v = bracket_from_gradients(&grads[a], &grads[b]).to_f64_lossy();
                let norm = |g: &[T]| g.iter().map(|x| x.to_f64_lossy().powi(2)).sum::<f64>().sqrt();
                let scale = 0.5 * norm(&grads[a]) * norm(&grads[b]);
                let r = if scale > 0.0 { v.abs() / scale } else { v.abs() };
                abs[a][b] = abs[a][b].max(v.abs());
                abs[b][a] = abs[a][b];
                rel[a][b] = rel[a][b].max(r);
                rel[b][a] = rel[a][b];
            }
        }
    }
    let mut worst = (orders[0], orders[0], 0.0);
    for a in 0..m {
        for b in 0..m {
            if abs[a][b] > worst.2 || abs[a][b].is_nan() {
                worst = (orders[a], orders[b], abs[a][b]);
            }
        }
    }
    let (fd_step, extrapolation_order) = match method {
        GradientMethod::FiniteDifference(cfg) => (Some(cfg.h0), Some(if cfg.richardson { 4 } else { 2 })),
        GradientMethod::Dual => (None, None),
    };
    Ok(InvolutionReport {
        orders,
        bracket_matrix: abs,
        relative_matrix: rel,
        method,
        fd_step,
        extrapolation_order,
        samples: points.len(),
        worst,
    })
}

/// Result of evaluating the Hamiltonian on a whole Weyl orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct WeylReport<T> {
    pub value: T,
    pub actions: usize,
    /// Largest `|H(w z) - H(z)| / max(1, |H(z)|)` over the orbit.
    pub max_deviation: T,
}

impl<T: Real> WeylReport<T> {
    pub fn holds(&self, tol: T) -> bool {
        self.max_deviation <= tol
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for perm in permutations(n - 1) {
        for pos in 0..=perm.len() {
            let mut p = perm.clone();
            p.insert(pos, n - 1);
            out.push(p);
        }
    }
    out
}

/// Evaluates [`hamiltonian_sigma`] under all `2^n n!` signed permutations
/// `(Sigma_i, p_i) -> (+-Sigma_w(i), p_w(i))`.
pub fn weyl_check<T: Real>(sigma: &[T], p: &[T], params: &ModelParams<T>) -> Result<WeylReport<T>> {
    let n = sigma.len();
    let value = hamiltonian_sigma(sigma, p, params)?;
    let scale = value.abs().max(T::one());
    let mut worst = T::zero();
    let mut actions = 0;
    for perm in permutations(n) {
        for signs in 0u32..(1 << n) {
            let s: Vec<T> =
                (0..n).map(|i| if signs >> i & 1 == 1 { -sigma[perm[i]] } else { sigma[perm[i]] }).collect();
            let q: Vec<T> = perm.iter().map(|&j| p[j]).collect();
            let v = hamiltonian_sigma(&s, &q, params)?;
            worst = worst.max((v - value).abs() / scale);
            actions += 1;
        }
    }
    Ok(WeylReport { value, actions, max_deviation: worst })
}

/// Eigenvalues of `g I g^dagger I`, sorted by real then imaginary part.
pub fn spectral_invariants<T: Real>(g: &CMatrix<T>) -> Result<Vec<C<T>>> {
    let mut ev = eigenvalues_general(&lax_matrix(g)?)?;
    ev.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
    Ok(ev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::abc_from_params;

    fn params(alpha: f64, x: f64, y: f64, n: usize) -> ModelParams<f64> {
        ModelParams::new(alpha, x, y, n).unwrap()
    }

    #[test]
    fn identity_trace() {
        for nu in 1..4 {
            let v = phi_trace(&CMatrix::<f64>::identity(6), nu).unwrap();
            assert!((v + 6.0 / (2.0 * nu as f64)).abs() < 1e-15);
        }
    }

    #[test]
    fn scalar_minimum() {
        let p = params(0.5, 1.0, 1.0, 1);
        let pt = ReducedPoint::new(vec![0.0], vec![0.0]).unwrap();
        assert!((phi_reduced(&pt, &p, 1).unwrap() + 1.0).abs() < 1e-12);
        for q in [-1.5, 0.0, 0.7, 3.0] {
            let s = [f64::exp(q)];
            assert!((hamiltonian_sigma(&s, &[0.0], &p).unwrap() + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn far_apart_tends_to_minus_n() {
        let p = params(0.5, 1.3, 0.8, 3);
        let s = [60f64.exp(), 40f64.exp(), 20f64.exp()];
        assert!((hamiltonian_sigma(&s, &[0.0; 3], &p).unwrap() + 3.0).abs() < 1e-8);
    }

    #[test]
    fn sigma_form_matches_trace() {
        let p = params(0.35, 1.4, 0.6, 3);
        let pt = ReducedPoint::new(vec![1.9, 0.4, -1.6], vec![0.3, -2.2, 1.1]).unwrap();
        let h = hamiltonian_sigma(&pt.sigma(), pt.p(), &p).unwrap();
        let t = phi_reduced(&pt, &p, 1).unwrap();
        assert!((h - t).abs() < 1e-9 * h.abs().max(1.0), "{h} {t}");
    }

    #[test]
    fn q_form_matches_sigma_form() {
        let p = params(0.6, 0.9, 1.7, 2);
        let q = [0.8, -0.5];
        let pp = [1.0, -0.4];
        let a = hamiltonian_q(&q, &pp, &abc_from_params(&p)).unwrap();
        let b = hamiltonian_sigma(&[q[0].exp(), q[1].exp()], &pp, &p).unwrap();
        assert!((a - b).abs() < 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn decoupled_product_is_one() {
        let c = RuijsenaarsCouplings::<f64> { a_sq: 1.0, b_sq: 2.0, c_sq: 0.0 };
        let q = [0.3, 0.1];
        let pp = [0.5, 0.2];
        let whole = hamiltonian_q(&q, &pp, &c).unwrap();
        let parts = hamiltonian_q(&q[..1], &pp[..1], &c).unwrap() + hamiltonian_q(&q[1..], &pp[1..], &c).unwrap();
        assert!((whole - parts).abs() < 1e-14);
    }

    #[test]
    fn separation_reported() {
        let p = params(0.5, 1.0, 1.0, 2);
        assert_eq!(hamiltonian_sigma(&[1.1, 1.0], &[0.0, 0.0], &p), Err(Error::SeparationViolation { i: 0, k: 1 }));
        let c = abc_from_params(&p);
        assert!(matches!(hamiltonian_q(&[0.1, 0.0], &[0.0, 0.0], &c), Err(Error::SeparationViolation { .. })));
    }

    #[test]
    fn gradient_matches_differences() {
        let p = params(0.45, 1.2, 0.7, 3);
        let c = abc_from_params(&p);
        let pt = ReducedPoint::new(vec![1.5, 0.1, -1.4], vec![0.4, -1.3, 2.5]).unwrap();
        let (dq, dp) = hamiltonian_q_gradient(pt.q(), pt.p(), &c).unwrap();
        let fd =
            fd_gradient(&|z: &ReducedPoint<f64>| hamiltonian_q(z.q(), z.p(), &c), &pt, &FdConfig::default()).unwrap();
        for (a, b) in dq.iter().chain(&dp).zip(&fd) {
            assert!((a - b).abs() < 1e-6 * b.abs().max(1.0), "{a} {b}");
        }
    }

    #[test]
    fn canonical_pairs() {
        let pt = ReducedPoint::new(vec![0.9, -0.4], vec![0.2, 0.3]).unwrap();
        let cfg = FdConfig::default();
        for i in 0..2 {
            for j in 0..2 {
                let qi = |z: &ReducedPoint<f64>| Ok(z.q()[i]);
                let pj = |z: &ReducedPoint<f64>| Ok(z.p()[j]);
                let b = poisson_bracket_fd(&qi, &pj, &pt, &cfg).unwrap();
                let want = if i == j { 0.5 } else { 0.0 };
                assert!((b - want).abs() < 1e-8);
            }
        }
        let p = params(0.5, 1.0, 1.0, 2);
        let f = |z: &ReducedPoint<f64>| phi_reduced(z, &p, 2);
        assert!(poisson_bracket_fd(&f, &f, &pt, &cfg).unwrap().abs() < 1e-10);
    }

    #[test]
    fn first_two_hamiltonians_commute() {
        let p = params(0.5, 1.0, 1.0, 2);
        let pt = ReducedPoint::new(vec![0.6, -0.5], vec![1.1, -2.0]).unwrap();
        let f = |z: &ReducedPoint<f64>| phi_reduced(z, &p, 1);
        let h = |z: &ReducedPoint<f64>| phi_reduced(z, &p, 2);
        assert!(poisson_bracket_fd(&f, &h, &pt, &FdConfig::default()).unwrap().abs() < 1e-5);
    }

    #[test]
    fn dual_gradient_agrees_with_differences() {
        let p = params(0.4, 1.3, 0.8, 3);
        let pt = ReducedPoint::new(vec![1.2, 0.1, -0.9], vec![0.4, -1.3, 2.5]).unwrap();
        for nu in 1..=3 {
            let exact = phi_gradient_dual(&pt, &p, nu).unwrap();
            let fd = fd_gradient(&|z: &ReducedPoint<f64>| phi_reduced(z, &p, nu), &pt, &FdConfig::default()).unwrap();
            for (a, b) in exact.iter().zip(&fd) {
                assert!((a - b).abs() < 1e-7 * b.abs().max(1.0), "nu={nu}: {a} {b}");
            }
        }
    }

    #[test]
    fn involution_report_shape() {
        let p = params(0.5, 1.0, 1.0, 2);
        let pts = [ReducedPoint::new(vec![0.6, -0.5], vec![1.1, -2.0]).unwrap()];
        let r = involution_report(&p, &pts, 3, GradientMethod::Dual).unwrap();
        assert_eq!(r.orders, vec![1, 2, 3]);
        for a in 0..3 {
            assert_eq!(r.bracket_matrix[a][a], 0.0);
            for b in 0..3 {
                assert_eq!(r.bracket_matrix[a][b], r.bracket_matrix[b][a]);
            }
        }
        assert!(r.max_abs() < 1e-8 && r.fd_step.is_none());
        let fd = involution_report(&p, &pts, 2, GradientMethod::FiniteDifference(FdConfig::default())).unwrap();
        assert_eq!((fd.fd_step, fd.extrapolation_order), (Some(1e-4), Some(4)));
        assert!(involution_report(&p, &pts, 5, GradientMethod::Dual).is_err());
    }

    #[test]
    fn weyl_orbit_size_and_invariance() {
        let p = params(0.5, 1.2, 0.9, 3);
        let r = weyl_check(&[3.0, 1.0, 0.3], &[0.2, -0.7, 1.9], &p).unwrap();
        assert_eq!(r.actions, 48);
        assert!(r.holds(1e-12), "{r:?}");
    }

    #[test]
    fn spectrum_of_identity_and_trace_powers() {
        let ev = spectral_invariants(&CMatrix::<f64>::identity(4)).unwrap();
        assert!(ev.iter().all(|z| (z - C::new(1.0, 0.0)).norm() < 1e-14));

        let p = params(0.5, 1.1, 0.8, 2);
        let pt = ReducedPoint::new(vec![0.9, -0.3], vec![0.4, -0.7]).unwrap();
        let (f, _) = assemble(&pt, &p).unwrap();
        let ev = spectral_invariants(&f.g).unwrap();
        for nu in 1..=3u32 {
            let s: C<f64> = ev.iter().map(|z| z.powu(nu)).sum();
            let phi = phi_trace(&f.g, nu).unwrap();
            assert!((-s.re / (2.0 * nu as f64) - phi).abs() < 1e-10 * phi.abs().max(1.0));
        }
    }
}
