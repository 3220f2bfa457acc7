//! Time evolution: the exact flow on the group, the reduced canonical
//! equations, and tools to compare the two.

use std::fmt::Write as _;

use serde::Serialize;

use crate::decomposition::{decompose_bk, decompose_kb, extract_reduced};
use crate::error::{Error, Result};
use crate::hamiltonians::{hamiltonian_q, hamiltonian_q_gradient, phi_trace};
use crate::matops::{expm, CMatrix};
use crate::model::{abc_from_params, separation_margins, ModelParams, ReducedPoint};
use crate::reconstruction::{assemble, verify_constraints, LeafFactorization};
use crate::scalar::{wrap_angle, Real, C};

/// Integration stops once the separation margin or the smallest `Sigma_i`
/// falls below this value.
pub const CHAMBER_MARGIN: f64 = 1e-6;

/// Distance to the chamber walls: the smallest pair separation margin and
/// the smallest `Sigma_i = exp(q_i)`, whichever is less.
pub fn wall_distance<T: Real>(q: &[T], coupling_sq: T) -> f64 {
    let report = separation_margins(q, coupling_sq);
    if !report.ordered {
        return f64::NEG_INFINITY;
    }
    let pair = report.min_margin().map_or(f64::INFINITY, |m| m.to_f64_lossy());
    let radial = q.iter().fold(f64::INFINITY, |m, v| m.min(v.to_f64_lossy().exp()));
    if q.iter().any(|v| !v.is_finite()) {
        return f64::NAN;
    }
    pair.min(radial)
}

/// `g(t) = g0 exp(-2 i t A)` with `A` the traceless part of `I g0^dagger I g0`.
///
/// The trace of `I g0^dagger I g0` only contributes a central phase
/// `exp(-2 i t tr/2n)`; dropping it keeps `det g = 1` and changes neither
/// `Phi_nu` nor the reduced coordinates.
pub fn exact_flow<T: Real>(g0: &CMatrix<T>, t: T) -> Result<CMatrix<T>> {
    if !g0.is_finite() || !t.is_finite() {
        return Err(Error::InvalidInput("exact_flow needs finite data".into()));
    }
    let n2 = g0.rows();
    if !n2.is_multiple_of(2) || !g0.is_square() {
        return Err(Error::InvalidInput(format!(
            "expected a square matrix of even size, got {}x{}",
            g0.rows(),
            g0.cols()
        )));
    }
    let i_nn = CMatrix::signature_nn(n2 / 2);
    let mut generator = i_nn.matmul(&g0.adjoint()).matmul(&i_nn).matmul(g0);
    let mean = generator.trace() / C::new(T::lit(n2 as f64), T::zero());
    for k in 0..n2 {
        generator[(k, k)] = generator[(k, k)] - mean;
    }
    let e = expm(&generator.scale(C::new(T::zero(), -(t + t))))?;
    Ok(g0.matmul(&e))
}

/// Orientation and normalisation of the reduced Hamiltonian vector field:
/// `qdot = sign * kappa * time_scale * dH/dp`, `pdot = -sign * kappa * time_scale * dH/dq`.
///
/// `kappa = 1/2` comes from the symplectic form `2 sum dp ^ dq`. `sign` and
/// `time_scale` relate the reduced time to the time of [`exact_flow`] and are
/// fixed by [`calibrate`]; the defaults are the calibrated values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowConvention {
    pub sign: f64,
    pub kappa: f64,
    pub time_scale: f64,
}

impl Default for FlowConvention {
    fn default() -> Self {
        Self { sign: 1.0, kappa: 0.5, time_scale: 4.0 }
    }
}

impl FlowConvention {
    pub fn rate(&self) -> f64 {
        self.sign * self.kappa * self.time_scale
    }
}

/// `(qdot, pdot)` of the reduced flow generated by `Phi_1`.
pub fn reduced_rhs<T: Real>(
    point: &ReducedPoint<T>,
    params: &ModelParams<T>,
    convention: &FlowConvention,
) -> Result<(Vec<T>, Vec<T>)> {
    if point.n() != params.n() {
        return Err(Error::InvalidInput(format!("point has n = {}, parameters n = {}", point.n(), params.n())));
    }
    let (dq, dp) = hamiltonian_q_gradient(point.q(), point.p(), &abc_from_params(params))?;
    let r = T::lit(convention.rate());
    Ok((dp.into_iter().map(|d| r * d).collect(), dq.into_iter().map(|d| -r * d).collect()))
}

/// Outcome of a calibration run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Calibration {
    /// Orientation that makes the reduced field match the projected exact flow.
    pub sign: f64,
    /// Ratio of the projected velocity to the `kappa`-only reduced velocity, in magnitude.
    pub scale: f64,
    /// Relative misfit of the best single-factor match.
    pub misfit: f64,
}

impl Calibration {
    /// The convention the measurement was made against, with the measured
    /// orientation and time normalisation attached.
    pub fn convention(&self, kappa: f64) -> FlowConvention {
        FlowConvention { sign: self.sign, kappa, time_scale: self.scale }
    }
}

/// Measures the factor between the projected exact flow and the reduced
/// field `kappa * (dH/dp, -dH/dq)` at the given points.
///
/// The projected velocity is a Richardson-extrapolated central difference
/// of [`extract_reduced`] along [`exact_flow`] with steps `h` and `h / 2`,
/// where `h` is divided by the local speed when that exceeds 1. Fails with `InternalInconsistency` if
/// no single real factor explains all velocities to `tol`.
pub fn calibrate(
    params: &ModelParams<f64>,
    points: &[ReducedPoint<f64>],
    kappa: f64,
    h: f64,
    tol: f64,
) -> Result<Calibration> {
    let unit = FlowConvention { sign: 1.0, kappa, time_scale: 1.0 };
    let mut projected = Vec::new();
    let mut model = Vec::new();
    for point in points {
        let (f, _) = assemble(point, params)?;
        let (qd, pd) = reduced_rhs(point, params, &unit)?;
        let speed = qd.iter().chain(&pd).fold(1.0f64, |m, v| m.max(v.abs()));
        let h = h / speed;
        let velocity = |h: f64| -> Result<Vec<f64>> {
            let fwd = extract_reduced(&exact_flow(&f.g, h)?, params)?;
            let bwd = extract_reduced(&exact_flow(&f.g, -h)?, params)?;
            let dq = fwd.q().iter().zip(bwd.q()).map(|(a, b)| (a - b) / (2.0 * h));
            let dp = fwd.p().iter().zip(bwd.p()).map(|(a, b)| wrap_angle(a - b) / (2.0 * h));
            Ok(dq.chain(dp).collect())
        };
        let (coarse, fine) = (velocity(h)?, velocity(0.5 * h)?);
        projected.extend(coarse.iter().zip(&fine).map(|(c, f)| (4.0 * f - c) / 3.0));
        model.extend(qd);
        model.extend(pd);
    }
    let mm: f64 = model.iter().map(|m| m * m).sum();
    if mm == 0.0 {
        return Err(Error::InvalidInput("calibration points are all stationary".into()));
    }
    let lambda = model.iter().zip(&projected).map(|(m, v)| m * v).sum::<f64>() / mm;
    let resid = model.iter().zip(&projected).map(|(m, v)| (v - lambda * m).powi(2)).sum::<f64>().sqrt();
    let misfit = resid / (lambda.abs() * mm.sqrt());
    if !(misfit <= tol) {
        return Err(Error::InternalInconsistency(format!(
            "reduced and projected flows are not proportional (misfit {misfit:.3e}, factor {lambda:.6})"
        )));
    }
    Ok(Calibration { sign: lambda.signum(), scale: lambda.abs(), misfit })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
pub enum Integrator {
    /// Classical fourth-order Runge-Kutta with fixed step `dt`.
    #[default]
    Rk4,
    /// Dormand-Prince 5(4) with error control, reporting on the `dt` grid.
    DormandPrince { rtol: f64, atol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TrajectoryStatus {
    Complete,
    /// Stopped because [`wall_distance`] fell below [`CHAMBER_MARGIN`].
    ChamberApproach {
        t: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T = f64> {
    pub times: Vec<T>,
    pub points: Vec<ReducedPoint<T>>,
    /// `Phi_1` at each sample.
    pub energy: Vec<T>,
    /// Largest constraint residual of the assembled (or projected) group element.
    pub residual: Vec<T>,
    pub status: TrajectoryStatus,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max_energy_drift(&self) -> T {
        let e0 = self.energy.first().copied().unwrap_or_else(T::zero);
        self.energy.iter().fold(T::zero(), |m, &e| m.max((e - e0).abs()))
    }

    /// CSV with header `t,q1..qn,p1..pn,energy,residual`; values round-trip exactly.
    pub fn to_csv(&self) -> String {
        let n = self.points.first().map_or(0, |p| p.n());
        let mut out = String::from("t");
        for k in 1..=n {
            let _ = write!(out, ",q{k}");
        }
        for k in 1..=n {
            let _ = write!(out, ",p{k}");
        }
        out.push_str(",energy,residual\n");
        for (i, pt) in self.points.iter().enumerate() {
            let row = std::iter::once(self.times[i])
                .chain(pt.q().iter().copied())
                .chain(pt.p().iter().copied())
                .chain([self.energy[i], self.residual[i]]);
            let cells: Vec<String> = row.map(|v| format!("{:.16e}", v.to_f64_lossy())).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Sample times `0, dt, 2 dt, ...` ending exactly at `t_max`.
pub fn time_grid(t_max: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0) || !dt.is_finite() || !(t_max >= 0.0) || !t_max.is_finite() {
        return Err(Error::InvalidInput(format!("need dt > 0 and t_max >= 0, got dt = {dt}, t_max = {t_max}")));
    }
    let steps = (t_max / dt - 1e-9).ceil().max(0.0) as usize;
    let mut times: Vec<f64> = (0..steps).map(|k| k as f64 * dt).collect();
    times.push(t_max);
    Ok(times)
}

fn residual_of<T: Real>(point: &ReducedPoint<T>, params: &ModelParams<T>) -> Result<T> {
    let (f, d) = assemble(point, params)?;
    Ok(verify_constraints(&f, Some(&d), params).max())
}

type State<T> = Vec<T>;

fn to_point<T: Real>(z: &[T], n: usize) -> Result<ReducedPoint<T>> {
    ReducedPoint::new(z[..n].to_vec(), z[n..].to_vec())
}

fn field<T: Real>(z: &[T], params: &ModelParams<T>, conv: &FlowConvention) -> Result<State<T>> {
    let n = params.n();
    let (qd, pd) = reduced_rhs(&to_point(z, n)?, params, conv)?;
    Ok(qd.into_iter().chain(pd).collect())
}

fn axpy<T: Real>(z: &[T], a: T, k: &[T]) -> State<T> {
    z.iter().zip(k).map(|(&x, &d)| x + a * d).collect()
}

fn rk4_step<T: Real>(z: &[T], h: T, params: &ModelParams<T>, conv: &FlowConvention) -> Result<State<T>> {
    let half = h * T::lit(0.5);
    let k1 = field(z, params, conv)?;
    let k2 = field(&axpy(z, half, &k1), params, conv)?;
    let k3 = field(&axpy(z, half, &k2), params, conv)?;
    let k4 = field(&axpy(z, h, &k3), params, conv)?;
    let sixth = h / T::lit(6.0);
    Ok((0..z.len()).map(|i| z[i] + sixth * (k1[i] + T::lit(2.0) * (k2[i] + k3[i]) + k4[i])).collect())
}

const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

/// One Dormand-Prince trial step: fifth-order solution and scaled error norm.
fn dp_step<T: Real>(
    z: &[T],
    h: T,
    params: &ModelParams<T>,
    conv: &FlowConvention,
    rtol: f64,
    atol: f64,
) -> Result<(State<T>, f64)> {
    let mut ks: Vec<State<T>> = Vec::with_capacity(7);
    for row in DP_A.iter() {
        let mut y = z.to_vec();
        for (k, &a) in ks.iter().zip(row) {
            if a != 0.0 {
                for (yi, ki) in y.iter_mut().zip(k) {
                    *yi += h * T::lit(a) * *ki;
                }
            }
        }
        ks.push(field(&y, params, conv)?);
    }
    let mut y5 = z.to_vec();
    let mut err = 0.0f64;
    for i in 0..z.len() {
        let mut d5 = T::zero();
        let mut d4 = T::zero();
        for s in 0..7 {
            d5 += T::lit(DP_B5[s]) * ks[s][i];
            d4 += T::lit(DP_B4[s]) * ks[s][i];
        }
        y5[i] += h * d5;
        let e = (h * (d5 - d4)).to_f64_lossy();
        let sc = atol + rtol * z[i].to_f64_lossy().abs().max(y5[i].to_f64_lossy().abs());
        err = err.max((e / sc).abs());
    }
    Ok((y5, err))
}

fn dp_advance<T: Real>(
    z: &[T],
    span: f64,
    h_guess: &mut f64,
    params: &ModelParams<T>,
    conv: &FlowConvention,
    rtol: f64,
    atol: f64,
) -> Result<State<T>> {
    let mut z = z.to_vec();
    let mut done = 0.0f64;
    let mut rejections = 0usize;
    while done < span * (1.0 - 1e-14) {
        let h = h_guess.min(span - done);
        let (y, err) = match dp_step(&z, T::lit(h), params, conv, rtol, atol) {
            Ok(r) => r,
            Err(Error::SeparationViolation { .. } | Error::ChamberViolation(_)) => (z.clone(), f64::INFINITY),
            Err(e) => return Err(e),
        };
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        if err <= 1.0 {
            z = y;
            done += h;
            *h_guess = h * factor;
            rejections = 0;
        } else {
            *h_guess = h * factor.min(0.5);
            rejections += 1;
            if rejections > 60 || *h_guess < 1e-14 * span.max(1.0) {
                return Err(if err.is_finite() {
                    Error::NumericalFailure(format!("step size underflow near t + {done:.6e}"))
                } else {
                    Error::SeparationViolation { i: 0, k: 0 }
                });
            }
        }
    }
    Ok(z)
}

/// Integrates the reduced equations from `point0` and samples on [`time_grid`].
///
/// Stops early, with [`TrajectoryStatus::ChamberApproach`], once the
/// [`wall_distance`] drops below [`CHAMBER_MARGIN`] or a stage leaves the chamber.
pub fn integrate_reduced<T: Real>(
    point0: &ReducedPoint<T>,
    params: &ModelParams<T>,
    t_max: f64,
    dt: f64,
    method: Integrator,
    convention: &FlowConvention,
) -> Result<Trajectory<T>> {
    let times = time_grid(t_max, dt)?;
    let n = params.n();
    let c2 = params.coupling_sq();
    let margin_ok = |z: &[T]| wall_distance(&z[..n], c2) >= CHAMBER_MARGIN;
    if !margin_ok(&point0.q().iter().chain(point0.p()).copied().collect::<Vec<_>>()) {
        return Err(Error::SeparationViolation { i: 0, k: 1 });
    }
    let couplings = abc_from_params(params);
    let mut traj = Trajectory {
        times: Vec::with_capacity(times.len()),
        points: Vec::with_capacity(times.len()),
        energy: Vec::with_capacity(times.len()),
        residual: Vec::with_capacity(times.len()),
        status: TrajectoryStatus::Complete,
    };
    let record = |traj: &mut Trajectory<T>, t: f64, pt: ReducedPoint<T>| -> Result<()> {
        traj.energy.push(hamiltonian_q(pt.q(), pt.p(), &couplings)?);
        traj.residual.push(residual_of(&pt, params)?);
        traj.times.push(T::lit(t));
        traj.points.push(pt);
        Ok(())
    };
    let mut z: State<T> = point0.q().iter().chain(point0.p()).copied().collect();
    record(&mut traj, 0.0, point0.clone())?;
    let mut h_guess = dt;
    for w in times.windows(2) {
        let span = w[1] - w[0];
        let next = match method {
            Integrator::Rk4 => rk4_step(&z, T::lit(span), params, convention),
            Integrator::DormandPrince { rtol, atol } => {
                dp_advance(&z, span, &mut h_guess, params, convention, rtol, atol)
            }
        };
        let next = match next {
            Ok(v) if margin_ok(&v) => v,
            Ok(_) | Err(Error::SeparationViolation { .. } | Error::ChamberViolation(_)) => {
                log::warn!("integration stopped near a chamber wall at t = {}", w[0]);
                traj.status = TrajectoryStatus::ChamberApproach { t: w[0] };
                return Ok(traj);
            }
            Err(e) => return Err(e),
        };
        z = next;
        record(&mut traj, w[1], to_point(&z, n)?)?;
    }
    Ok(traj)
}

/// Extracts the reduced point of `exact_flow(g0, t)` at each time.
pub fn project_flow<T: Real>(g0: &CMatrix<T>, params: &ModelParams<T>, times: &[T]) -> Result<Trajectory<T>> {
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("sample times must be strictly increasing".into()));
    }
    let mut traj = Trajectory {
        times: times.to_vec(),
        points: Vec::with_capacity(times.len()),
        energy: Vec::with_capacity(times.len()),
        residual: Vec::with_capacity(times.len()),
        status: TrajectoryStatus::Complete,
    };
    for &t in times {
        let g = exact_flow(g0, t)?;
        let (k_l, b_r) = decompose_kb(&g)?;
        let (b_l, k_r) = decompose_bk(&g)?;
        let fact = LeafFactorization { g, k_l, k_r, b_l, b_r };
        traj.residual.push(verify_constraints(&fact, None, params).max());
        traj.energy.push(phi_trace(&fact.g, 1)?);
        traj.points.push(extract_reduced(&fact.g, params)?);
    }
    Ok(traj)
}

/// Largest deviations between two trajectories on the same grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Deviation {
    pub q: f64,
    /// Compared modulo `2 pi`.
    pub p: f64,
    pub energy: f64,
    pub samples: usize,
}

impl Deviation {
    pub fn max(&self) -> f64 {
        self.q.max(self.p)
    }
}

pub fn compare_trajectories<T: Real>(a: &Trajectory<T>, b: &Trajectory<T>) -> Result<Deviation> {
    let same_grid = a.len() == b.len()
        && a.times.iter().zip(&b.times).all(|(x, y)| (*x - *y).abs() <= T::tol(1e-12) * x.abs().max(T::one()));
    if !same_grid {
        return Err(Error::GridMismatch);
    }
    let mut dev = Deviation { q: 0.0, p: 0.0, energy: 0.0, samples: a.len() };
    for (i, (pa, pb)) in a.points.iter().zip(&b.points).enumerate() {
        for (x, y) in pa.q().iter().zip(pb.q()) {
            dev.q = dev.q.max((*x - *y).abs().to_f64_lossy());
        }
        for (x, y) in pa.p().iter().zip(pb.p()) {
            dev.p = dev.p.max(wrap_angle(*x - *y).abs().to_f64_lossy());
        }
        dev.energy = dev.energy.max((a.energy[i] - b.energy[i]).abs().to_f64_lossy());
    }
    Ok(dev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::fd_gradient;
    use crate::hamiltonians::FdConfig;

    fn params(n: usize) -> ModelParams<f64> {
        ModelParams::new(0.5, 1.1, 0.9, n).unwrap()
    }

    fn pt(q: &[f64], p: &[f64]) -> ReducedPoint<f64> {
        ReducedPoint::new(q.to_vec(), p.to_vec()).unwrap()
    }

    #[test]
    fn flow_at_zero_is_identity_map() {
        let (f, _) = assemble(&pt(&[0.7, -0.4], &[0.3, 1.0]), &params(2)).unwrap();
        assert!(crate::matops::rel_diff(&exact_flow(&f.g, 0.0).unwrap(), &f.g) < 1e-15);
    }

    #[test]
    fn flow_composes() {
        let (f, _) = assemble(&pt(&[0.7, -0.4], &[0.3, 1.0]), &params(2)).unwrap();
        let a = exact_flow(&exact_flow(&f.g, 0.3).unwrap(), 0.45).unwrap();
        let b = exact_flow(&f.g, 0.75).unwrap();
        assert!(crate::matops::rel_diff(&a, &b) < 1e-9);
    }

    #[test]
    fn stationary_in_q_at_zero_momentum() {
        let (qd, _) = reduced_rhs(&pt(&[0.9, -0.2, -1.5], &[0.0; 3]), &params(3), &FlowConvention::default()).unwrap();
        assert!(qd.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn scalar_partials_match_differences() {
        let p = params(1);
        let point = pt(&[0.4], &[0.9]);
        let c = abc_from_params(&p);
        let fd = fd_gradient(&|z: &ReducedPoint<f64>| hamiltonian_q(z.q(), z.p(), &c), &point, &FdConfig::default())
            .unwrap();
        let (dq, dp) = hamiltonian_q_gradient(point.q(), point.p(), &c).unwrap();
        assert!((dq[0] - fd[0]).abs() < 1e-8 && (dp[0] - fd[1]).abs() < 1e-8);
    }

    #[test]
    fn field_is_tangent_to_energy_levels() {
        let p = params(3);
        let point = pt(&[1.2, 0.1, -1.1], &[0.5, -2.0, 1.4]);
        let (qd, pd) = reduced_rhs(&point, &p, &FlowConvention::default()).unwrap();
        let (dq, dp) = hamiltonian_q_gradient(point.q(), point.p(), &abc_from_params(&p)).unwrap();
        let rate: f64 = (0..3).map(|i| dq[i] * qd[i] + dp[i] * pd[i]).sum();
        assert!(rate.abs() < 1e-12);
    }

    #[test]
    fn zero_length_run_has_one_sample() {
        let t =
            integrate_reduced(&pt(&[0.3], &[0.2]), &params(1), 0.0, 0.1, Integrator::Rk4, &FlowConvention::default())
                .unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.status, TrajectoryStatus::Complete);
    }

    #[test]
    fn grid_ends_at_t_max() {
        let g = time_grid(1.0, 0.3).unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(*g.last().unwrap(), 1.0);
        assert_eq!(time_grid(1.0, 1e-3).unwrap().len(), 1001);
        assert!(time_grid(1.0, 0.0).is_err());
    }

    #[test]
    fn csv_round_trips_values() {
        let t = integrate_reduced(
            &pt(&[0.6, -0.3], &[0.2, 0.1]),
            &params(2),
            0.05,
            0.01,
            Integrator::Rk4,
            &FlowConvention::default(),
        )
        .unwrap();
        let csv = t.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("t,q1,q2,p1,p2,energy,residual"));
        let row: Vec<f64> = lines.nth(2).unwrap().split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(row[0], t.times[2]);
        assert_eq!(row[1], t.points[2].q()[0]);
        assert_eq!(row[5], t.energy[2]);
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let c = FlowConvention::default();
        let a = integrate_reduced(&pt(&[0.3], &[0.2]), &params(1), 0.1, 0.05, Integrator::Rk4, &c).unwrap();
        let b = integrate_reduced(&pt(&[0.3], &[0.2]), &params(1), 0.1, 0.02, Integrator::Rk4, &c).unwrap();
        assert_eq!(compare_trajectories(&a, &b), Err(Error::GridMismatch));
        assert_eq!(compare_trajectories(&a, &a).unwrap().max(), 0.0);
    }
}
