//! Coupling constants, reduced phase-space points and the radial chart.
//!
//! The reduced coordinates are `(q, p)` with `Sigma_i = exp(q_i)`; the
//! radial coordinate of the `SU(n,n)` element is `Delta_i = asinh(Sigma_i)`.
//! `q` must be strictly decreasing (open Weyl chamber) and pairwise
//! separated so that every square root in the Hamiltonian has a positive
//! argument: `4 sinh^2(q_i - q_k) > (alpha - 1/alpha)^2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Coupling data `(alpha, x, y)` for `n` particles.
///
/// `alpha` is normalized into `(0, 1)`; the reduced system is invariant
/// under `alpha -> 1/alpha`, and with `alpha < 1` the KKS element is
/// `sigma sigma^dagger = alpha^2 I + vhat vhat^dagger` with a plus sign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams<T>", bound(serialize = "T: Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct ModelParams<T = f64> {
    alpha: T,
    x: T,
    y: T,
    n: usize,
}

#[derive(Deserialize)]
struct RawParams<T> {
    alpha: T,
    x: T,
    y: T,
    n: usize,
}

impl<T: Real> TryFrom<RawParams<T>> for ModelParams<T> {
    type Error = Error;
    fn try_from(r: RawParams<T>) -> Result<Self> {
        Self::new(r.alpha, r.x, r.y, r.n)
    }
}

impl<T: Real> ModelParams<T> {
    pub fn new(alpha: T, x: T, y: T, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("particle count must be at least 1".into()));
        }
        if !(alpha.is_finite() && x.is_finite() && y.is_finite()) {
            return Err(Error::InvalidInput("parameters must be finite".into()));
        }
        if !(alpha > T::zero()) || alpha == T::one() {
            return Err(Error::InvalidInput(format!("alpha must be positive and different from 1, got {alpha}")));
        }
        if !(x > T::zero()) || !(y > T::zero()) {
            return Err(Error::InvalidInput(format!("x and y must be positive, got x={x}, y={y}")));
        }
        let alpha = if alpha > T::one() { alpha.recip() } else { alpha };
        let p = Self { alpha, x, y, n };
        if !(p.vhat_norm_sq() > T::zero()) {
            return Err(Error::InvalidInput("alpha too close to 1 for this particle count".into()));
        }
        Ok(p)
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn x(&self) -> T {
        self.x
    }

    pub fn y(&self) -> T {
        self.y
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Sign in front of `vhat vhat^dagger`; always `+1` after normalization.
    pub fn epsilon(&self) -> i8 {
        1
    }

    /// `|vhat|^2 = alpha^(2-2n) - alpha^2`, fixed by `det sigma = 1`.
    pub fn vhat_norm_sq(&self) -> T {
        self.alpha.powi(2 - 2 * self.n as i32) - self.alpha * self.alpha
    }

    /// `(alpha - 1/alpha)^2`.
    pub fn coupling_sq(&self) -> T {
        let d = self.alpha - self.alpha.recip();
        d * d
    }

    pub fn cast<U: Real>(&self) -> ModelParams<U> {
        ModelParams {
            alpha: U::lit(self.alpha.to_f64_lossy()),
            x: U::lit(self.x.to_f64_lossy()),
            y: U::lit(self.y.to_f64_lossy()),
            n: self.n,
        }
    }
}

/// Canonical coordinates on the reduced phase space.
///
/// `p` is stored as given (unwrapped); only `p mod 2 pi` is meaningful.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPoint<T>", bound(serialize = "T: Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct ReducedPoint<T = f64> {
    q: Vec<T>,
    p: Vec<T>,
}

#[derive(Deserialize)]
struct RawPoint<T> {
    q: Vec<T>,
    p: Vec<T>,
}

impl<T: Real> TryFrom<RawPoint<T>> for ReducedPoint<T> {
    type Error = Error;
    fn try_from(r: RawPoint<T>) -> Result<Self> {
        Self::new(r.q, r.p)
    }
}

impl<T: Real> ReducedPoint<T> {
    pub fn new(q: Vec<T>, p: Vec<T>) -> Result<Self> {
        if q.is_empty() || q.len() != p.len() {
            return Err(Error::InvalidInput(format!(
                "q and p must be non-empty of equal length ({} vs {})",
                q.len(),
                p.len()
            )));
        }
        if q.iter().chain(&p).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("coordinates must be finite".into()));
        }
        check_chamber(&q)?;
        Ok(Self { q, p })
    }

    pub fn q(&self) -> &[T] {
        &self.q
    }

    pub fn p(&self) -> &[T] {
        &self.p
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    /// `Sigma_i = exp(q_i)`.
    pub fn sigma(&self) -> Vec<T> {
        self.q.iter().map(|q| q.exp()).collect()
    }

    /// The same point with every `p_i` shifted into `(-pi, pi]`.
    pub fn wrapped(&self) -> Self {
        Self { q: self.q.clone(), p: self.p.iter().map(|&p| crate::scalar::wrap_angle(p)).collect() }
    }
}

fn check_chamber<T: Real>(q: &[T]) -> Result<()> {
    for (i, w) in q.windows(2).enumerate() {
        if !(w[0] > w[1]) {
            return Err(Error::ChamberViolation(format!(
                "q[{i}] = {} is not greater than q[{}] = {}",
                w[0],
                i + 1,
                w[1]
            )));
        }
    }
    Ok(())
}

/// Diagonal data of the radial chart at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct CartanData<T = f64> {
    /// `asinh(Sigma)`.
    pub delta: Vec<T>,
    /// `exp(q)`.
    pub sigma: Vec<T>,
    /// `cosh(Delta) = sqrt(1 + Sigma^2)`.
    pub gamma: Vec<T>,
    /// `sqrt(y^2 + x^2 Sigma^2)`.
    pub lambda: Vec<T>,
}

impl<T: Real> CartanData<T> {
    pub fn from_sigma(sigma: Vec<T>, params: &ModelParams<T>) -> Self {
        let delta = sigma.iter().map(|s| s.asinh()).collect();
        let gamma = sigma.iter().map(|&s| T::one().hypot(s)).collect();
        let lambda = sigma.iter().map(|&s| params.y().hypot(params.x() * s)).collect();
        Self { delta, sigma, gamma, lambda }
    }

    pub fn n(&self) -> usize {
        self.sigma.len()
    }
}

/// Radial chart at `q`; `q` must be strictly decreasing.
pub fn cartan_from_q<T: Real>(q: &[T], params: &ModelParams<T>) -> Result<CartanData<T>> {
    check_chamber(q)?;
    Ok(CartanData::from_sigma(q.iter().map(|q| q.exp()).collect(), params))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairMargin<T> {
    pub i: usize,
    pub k: usize,
    /// `4 sinh^2(q_i - q_k) - (alpha - 1/alpha)^2`.
    pub margin: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparationReport<T> {
    pub ordered: bool,
    pub margins: Vec<PairMargin<T>>,
}

impl<T: Real> SeparationReport<T> {
    pub fn holds(&self) -> bool {
        self.ordered && self.margins.iter().all(|m| m.margin > T::zero())
    }

    pub fn min_margin(&self) -> Option<T> {
        self.margins.iter().map(|m| m.margin).reduce(T::min)
    }

    pub fn first_violation(&self) -> Option<&PairMargin<T>> {
        self.margins.iter().find(|m| !(m.margin > T::zero()))
    }
}

pub fn separation_margins<T: Real>(q: &[T], coupling_sq: T) -> SeparationReport<T> {
    let four = T::lit(4.0);
    let mut margins = Vec::new();
    for i in 0..q.len() {
        for k in i + 1..q.len() {
            let s = (q[i] - q[k]).sinh();
            margins.push(PairMargin { i, k, margin: four * s * s - coupling_sq });
        }
    }
    SeparationReport { ordered: q.windows(2).all(|w| w[0] > w[1]), margins }
}

pub fn check_separation<T: Real>(point: &ReducedPoint<T>, params: &ModelParams<T>) -> SeparationReport<T> {
    separation_margins(point.q(), params.coupling_sq())
}

/// Validates that `point` is admissible for `params`.
pub fn ensure_admissible<T: Real>(point: &ReducedPoint<T>, params: &ModelParams<T>) -> Result<()> {
    if point.n() != params.n() {
        return Err(Error::InvalidInput(format!(
            "point has {} particles, parameters expect {}",
            point.n(),
            params.n()
        )));
    }
    let rep = check_separation(point, params);
    if let Some(m) = rep.first_violation() {
        return Err(Error::SeparationViolation { i: m.i, k: m.k });
    }
    Ok(())
}

/// Couplings `(a^2, b^2, c^2)` of the Ruijsenaars-type Hamiltonian written
/// in `q`-form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuijsenaarsCouplings<T = f64> {
    pub a_sq: T,
    pub b_sq: T,
    pub c_sq: T,
}

/// `a^2 = (x^-2 + y^2)/2`, `b^2 = y^2/x^2`, `c^2 = (alpha - 1/alpha)^2`.
pub fn abc_from_params<T: Real>(params: &ModelParams<T>) -> RuijsenaarsCouplings<T> {
    let (x, y) = (params.x(), params.y());
    RuijsenaarsCouplings { a_sq: T::lit(0.5) * (x.powi(-2) + y * y), b_sq: (y / x).powi(2), c_sq: params.coupling_sq() }
}

/// Inverse of [`abc_from_params`].
///
/// `(x, y)` and `(1/y, 1/x)` give the same couplings; the branch with
/// `x y >= 1` is returned, together with `alpha < 1`.
pub fn params_from_abc<T: Real>(c: &RuijsenaarsCouplings<T>, n: usize) -> Result<ModelParams<T>> {
    if !(c.a_sq > T::zero() && c.b_sq > T::zero() && c.c_sq > T::zero()) {
        return Err(Error::InvalidInput("a^2, b^2, c^2 must be positive".into()));
    }
    let disc = c.a_sq * c.a_sq - c.b_sq;
    let slack = T::tol(1e-14) * c.a_sq * c.a_sq;
    if disc < -slack {
        return Err(Error::InvalidInput(format!(
            "inconsistent couplings: a^4 - b^2 = {disc} is negative, no real (x, y)"
        )));
    }
    let disc = disc.max(T::zero());
    let x_sq = (c.a_sq + disc.sqrt()) / c.b_sq;
    let x = x_sq.sqrt();
    let y = c.b_sq.sqrt() * x;
    let cc = c.c_sq.sqrt();
    let alpha = T::lit(0.5) * ((cc * cc + T::lit(4.0)).sqrt() - cc);
    ModelParams::new(alpha, x, y, n)
}
