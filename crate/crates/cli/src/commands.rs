use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use bcn_core::decomposition::extract_reduced;
use bcn_core::dynamics::{
    compare_trajectories, integrate_reduced, project_flow, time_grid, Deviation, FlowConvention, Integrator,
    Trajectory, TrajectoryStatus,
};
use bcn_core::hamiltonians::{
    hamiltonian_sigma, involution_report, phi_trace, FdConfig, GradientMethod, InvolutionReport,
};
use bcn_core::limits::{default_grid, limit_convergence, ConvergenceReport, LimitParams};
use bcn_core::reconstruction::{assemble, verify_constraints};
use bcn_core::sampling::Sampler;
use bcn_core::scalar::wrap_angle;
use bcn_core::{Error, ModelParams, ReducedPoint};
use log::info;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Format, Gradient, Method, RunConfig, Stepper};
use crate::CliError;

const MASTER_TOL: f64 = 1e-9;
const ROUND_TRIP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
pub enum Task {
    Verify,
    Simulate,
    Involution,
    Limit,
}

pub fn run(task: Task, cfg: &RunConfig) -> Result<(), CliError> {
    match task {
        Task::Verify => verify(cfg),
        Task::Simulate => simulate(cfg),
        Task::Involution => involution(cfg),
        Task::Limit => limit(cfg),
    }
}

fn model(cfg: &RunConfig) -> Result<ModelParams<f64>, CliError> {
    Ok(ModelParams::new(cfg.alpha(), cfg.x(), cfg.y(), cfg.n())?)
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), CliError> {
    match output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn to_json<S: Serialize>(value: &S) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn csv_cell(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Serialize)]
struct SampleRecord {
    index: usize,
    q: Vec<f64>,
    p: Vec<f64>,
    residual: f64,
    worst_constraint: &'static str,
    master_relative: f64,
    round_trip: f64,
}

#[derive(Debug, Serialize)]
struct VerifySummary {
    n: usize,
    alpha: f64,
    x: f64,
    y: f64,
    seed: u64,
    samples: usize,
    tol: f64,
    max_residual: f64,
    worst_sample: usize,
    worst_constraint: &'static str,
    max_master_relative: f64,
    max_round_trip: f64,
    passed: bool,
    points: Vec<SampleRecord>,
}

fn check_sample(index: usize, pt: &ReducedPoint<f64>, params: &ModelParams<f64>) -> bcn_core::Result<SampleRecord> {
    let (fact, data) = assemble(pt, params)?;
    let rep = verify_constraints(&fact, Some(&data), params);
    let (worst_constraint, residual) =
        rep.entries
            .iter()
            .fold(("none", 0.0f64), |acc, &(name, v)| if v > acc.1 || v.is_nan() { (name, v) } else { acc });
    let traced = phi_trace(&fact.g, 1)?;
    let closed = hamiltonian_sigma(&pt.sigma(), pt.p(), params)?;
    let back = extract_reduced(&fact.g, params)?;
    let dq = back.q().iter().zip(pt.q()).map(|(a, b)| (a - b).abs());
    let dp = back.p().iter().zip(pt.p()).map(|(a, b)| wrap_angle(a - b).abs());
    Ok(SampleRecord {
        index,
        q: pt.q().to_vec(),
        p: pt.p().to_vec(),
        residual,
        worst_constraint,
        master_relative: (traced - closed).abs() / closed.abs().max(1.0),
        round_trip: dq.chain(dp).fold(0.0, f64::max),
    })
}

fn verify(cfg: &RunConfig) -> Result<(), CliError> {
    let params = model(cfg)?;
    let samples = cfg.samples.unwrap_or(100);
    let tol = cfg.tol.unwrap_or(1e-10);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed());
    let points: Vec<ReducedPoint<f64>> = (0..samples).map(|_| Sampler::default().sample(&mut rng, &params)).collect();
    let records = points
        .par_iter()
        .enumerate()
        .map(|(i, pt)| check_sample(i, pt, &params))
        .collect::<bcn_core::Result<Vec<_>>>()?;

    let worst = records.iter().fold(None::<&SampleRecord>, |acc, r| match acc {
        Some(a) if a.residual >= r.residual => Some(a),
        _ => Some(r),
    });
    let max_residual = worst.map_or(0.0, |r| r.residual);
    let max_master = records.iter().map(|r| r.master_relative).fold(0.0, f64::max);
    let max_round_trip = records.iter().map(|r| r.round_trip).fold(0.0, f64::max);
    let passed = max_residual < tol && max_master < MASTER_TOL && max_round_trip < ROUND_TRIP_TOL;
    eprintln!("max residual {max_residual:.3e} over {samples} samples (tol {tol:e})");

    let text = match cfg.format.unwrap_or(Format::Json) {
        Format::Csv => {
            let n = params.n();
            let mut out = String::from("sample");
            (1..=n).for_each(|k| write!(out, ",q{k}").unwrap());
            (1..=n).for_each(|k| write!(out, ",p{k}").unwrap());
            out.push_str(",residual,master_relative,round_trip\n");
            for r in &records {
                let cells: Vec<String> =
                    r.q.iter()
                        .chain(&r.p)
                        .chain([&r.residual, &r.master_relative, &r.round_trip])
                        .map(|&v| csv_cell(v))
                        .collect();
                writeln!(out, "{},{}", r.index, cells.join(",")).unwrap();
            }
            out
        }
        Format::Json => {
            let summary = VerifySummary {
                n: params.n(),
                alpha: params.alpha(),
                x: params.x(),
                y: params.y(),
                seed: cfg.seed(),
                samples,
                tol,
                max_residual,
                worst_sample: worst.map_or(0, |r| r.index),
                worst_constraint: worst.map_or("none", |r| r.worst_constraint),
                max_master_relative: max_master,
                max_round_trip,
                passed,
                points: records,
            };
            to_json(&summary)
        }
    };
    emit(cfg.output.as_deref(), &text)?;
    if passed {
        Ok(())
    } else {
        Err(CliError::Breach(format!(
            "residual {max_residual:.3e} (tol {tol:e}), master {max_master:.3e}, round trip {max_round_trip:.3e}"
        )))
    }
}

fn start_point(cfg: &RunConfig, params: &ModelParams<f64>) -> Result<ReducedPoint<f64>, CliError> {
    let n = params.n();
    match (&cfg.q, &cfg.p) {
        (None, None) => Ok(Sampler::default().sample(&mut ChaCha8Rng::seed_from_u64(cfg.seed()), params)),
        (Some(q), p) => {
            let p = p.clone().unwrap_or_else(|| vec![0.0; q.len()]);
            if q.len() != n || p.len() != n {
                return Err(
                    Error::InvalidInput(format!("q and p need {n} entries, got {} and {}", q.len(), p.len())).into()
                );
            }
            Ok(ReducedPoint::new(q.clone(), p)?)
        }
        (None, Some(_)) => Err(CliError::Usage("--p needs --q".into())),
    }
}

#[derive(Debug, Serialize)]
struct TrajectoryJson<'a> {
    times: &'a [f64],
    q: Vec<&'a [f64]>,
    p: Vec<&'a [f64]>,
    energy: &'a [f64],
    residual: &'a [f64],
    status: TrajectoryStatus,
}

fn render(traj: &Trajectory<f64>, format: Format) -> String {
    match format {
        Format::Csv => traj.to_csv(),
        Format::Json => to_json(&TrajectoryJson {
            times: &traj.times,
            q: traj.points.iter().map(|p| p.q()).collect(),
            p: traj.points.iter().map(|p| p.p()).collect(),
            energy: &traj.energy,
            residual: &traj.residual,
            status: traj.status,
        }),
    }
}

#[derive(Debug, Serialize)]
struct DeviationReport {
    deviation: Deviation,
    max: f64,
    tol: f64,
    passed: bool,
    status: TrajectoryStatus,
    energy_drift_reduced: f64,
    energy_drift_exact: f64,
}

fn sibling(path: &Path, tag: &str, ext: &str) -> PathBuf {
    path.with_extension(format!("{tag}.{ext}"))
}

fn simulate(cfg: &RunConfig) -> Result<(), CliError> {
    let params = model(cfg)?;
    let start = start_point(cfg, &params)?;
    let t_max = cfg.t_max.unwrap_or(1.0);
    let dt = cfg.dt.unwrap_or(1e-3);
    let format = cfg.format.unwrap_or(Format::Csv);
    let method = match cfg.integrator.unwrap_or(Stepper::Rk4) {
        Stepper::Rk4 => Integrator::Rk4,
        Stepper::Dp => Integrator::DormandPrince { rtol: 1e-10, atol: 1e-12 },
    };
    let conv = FlowConvention::default();
    info!("start q={:?} p={:?}", start.q(), start.p());

    let reduced =
        || -> Result<Trajectory<f64>, CliError> { Ok(integrate_reduced(&start, &params, t_max, dt, method, &conv)?) };
    let exact = |times: &[f64]| -> Result<Trajectory<f64>, CliError> {
        let (fact, _) = assemble(&start, &params)?;
        Ok(project_flow(&fact.g, &params, times)?)
    };

    match cfg.method.unwrap_or(Method::Reduced) {
        Method::Reduced => emit(cfg.output.as_deref(), &render(&reduced()?, format)),
        Method::Exact => emit(cfg.output.as_deref(), &render(&exact(&time_grid(t_max, dt)?)?, format)),
        Method::Both => {
            let red = reduced()?;
            let ex = exact(&red.times)?;
            let deviation = compare_trajectories(&red, &ex)?;
            let tol = cfg.tol.unwrap_or(1e-6);
            let report = DeviationReport {
                deviation,
                max: deviation.max(),
                tol,
                passed: deviation.max() < tol,
                status: red.status,
                energy_drift_reduced: red.max_energy_drift(),
                energy_drift_exact: ex.max_energy_drift(),
            };
            let ext = match format {
                Format::Csv => "csv",
                Format::Json => "json",
            };
            match cfg.output.as_deref() {
                Some(path) => {
                    std::fs::write(sibling(path, "reduced", ext), render(&red, format))?;
                    std::fs::write(sibling(path, "exact", ext), render(&ex, format))?;
                    std::fs::write(sibling(path, "deviation", "json"), to_json(&report))?;
                }
                None => print!("{}", to_json(&report)),
            }
            eprintln!("max deviation {:.3e} (tol {tol:e})", report.max);
            if report.passed {
                Ok(())
            } else {
                Err(CliError::Breach(format!("flows deviate by {:.3e}", report.max)))
            }
        }
    }
}

fn involution(cfg: &RunConfig) -> Result<(), CliError> {
    let params = model(cfg)?;
    let samples = cfg.samples.unwrap_or(20);
    let tol = cfg.tol.unwrap_or(1e-5);
    let method = match cfg.gradient.unwrap_or(Gradient::Dual) {
        Gradient::Dual => GradientMethod::Dual,
        Gradient::Fd => {
            let mut fd = FdConfig::default();
            if let Some(h) = cfg.fd_step {
                fd.h0 = h;
            }
            GradientMethod::FiniteDifference(fd)
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed());
    let points: Vec<ReducedPoint<f64>> = (0..samples).map(|_| Sampler::default().sample(&mut rng, &params)).collect();
    let report = involution_report(&params, &points, cfg.max_order.unwrap_or(3), method)?;
    emit(cfg.output.as_deref(), &render_involution(&report, cfg.format.unwrap_or(Format::Json)))?;
    eprintln!("max |bracket| {:.3e} (tol {tol:e})", report.max_abs());
    if report.max_abs() < tol {
        Ok(())
    } else {
        let (mu, nu, v) = report.worst;
        Err(CliError::Breach(format!("{{Phi_{mu}, Phi_{nu}}} = {v:.3e}")))
    }
}

fn render_involution(report: &InvolutionReport, format: Format) -> String {
    match format {
        Format::Json => to_json(report),
        Format::Csv => {
            let mut out = String::from("mu,nu,bracket,relative\n");
            for (a, &mu) in report.orders.iter().enumerate() {
                for (b, &nu) in report.orders.iter().enumerate().skip(a + 1) {
                    let cells = [report.bracket_matrix[a][b], report.relative_matrix[a][b]].map(csv_cell);
                    writeln!(out, "{mu},{nu},{}", cells.join(",")).unwrap();
                }
            }
            out
        }
    }
}

/// Decreasing positions at least 0.3 apart and momenta, both in `[-1.5, 1.5]`.
fn limit_configuration(rng: &mut ChaCha8Rng, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut q: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect();
    q.sort_by(|a, b| b.partial_cmp(a).unwrap());
    for i in 1..n {
        q[i] = q[i].min(q[i - 1] - 0.3);
    }
    let pi = (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect();
    (q, pi)
}

fn limit(cfg: &RunConfig) -> Result<(), CliError> {
    let n = cfg.n();
    let lp = LimitParams::new(cfg.xi.unwrap_or(0.3), cfg.eta.unwrap_or(-0.7), cfg.zeta.unwrap_or(0.9));
    let (q, pi) = match (&cfg.q, &cfg.pi) {
        (Some(q), Some(pi)) => (q.clone(), pi.clone()),
        (None, None) => limit_configuration(&mut ChaCha8Rng::seed_from_u64(cfg.seed()), n),
        _ => return Err(CliError::Usage("--q and --pi go together".into())),
    };
    if q.len() != pi.len() || q.is_empty() {
        return Err(Error::InvalidInput("q and pi must be non-empty of equal length".into()).into());
    }
    let grid = cfg.t_grid.clone().unwrap_or_else(default_grid);
    let report = limit_convergence(&q, &pi, &lp, &grid)?;
    emit(cfg.output.as_deref(), &render_limit(&report, cfg.format.unwrap_or(Format::Json)))?;
    eprintln!("fitted order {:.3}, H2 {:.12}", report.fitted_order, report.h2_closed);
    if report.passed {
        Ok(())
    } else {
        Err(CliError::Breach(format!(
            "order {:.3}, terminal error {:.3e}",
            report.fitted_order,
            report.error.last().copied().unwrap_or(f64::NAN)
        )))
    }
}

fn render_limit(report: &ConvergenceReport, format: Format) -> String {
    match format {
        Format::Json => to_json(report),
        Format::Csv => {
            let mut out = String::from("t,error\n");
            for (t, e) in report.t.iter().zip(&report.error) {
                writeln!(out, "{},{}", csv_cell(*t), csv_cell(*e)).unwrap();
            }
            out
        }
    }
}
