use bcn_core::dynamics::{
    calibrate, compare_trajectories, exact_flow, integrate_reduced, project_flow, time_grid, FlowConvention,
    Integrator, Trajectory, TrajectoryStatus,
};
use bcn_core::hamiltonians::{phi_trace, spectral_invariants};
use bcn_core::matops::{rel_diff, CMatrix};
use bcn_core::reconstruction::assemble;
use bcn_core::sampling::Sampler;
use bcn_core::{ModelParams, ReducedPoint};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pt(q: &[f64], p: &[f64]) -> ReducedPoint<f64> {
    ReducedPoint::new(q.to_vec(), p.to_vec()).unwrap()
}

#[test]
fn calibration_reproduces_frozen_convention() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for n in 1..=3 {
        let params = ModelParams::new(0.45, 1.2, 0.8, n).unwrap();
        let points: Vec<_> = (0..5).map(|_| Sampler::default().sample(&mut rng, &params)).collect();
        let cal = calibrate(&params, &points, 0.5, 1e-3, 1e-8).unwrap();
        let conv = cal.convention(0.5);
        let frozen = FlowConvention::default();
        println!("n={n} calibration {cal:?}");
        assert_eq!(conv.sign, frozen.sign);
        assert!((conv.time_scale - frozen.time_scale).abs() < 1e-8, "{conv:?}");
    }
}

#[test]
fn exact_flow_conserves_invariants() {
    // x > 1 > y gives a confining well; this start lies on a bound orbit
    let params = ModelParams::new(0.7, 2.0, 0.6, 2).unwrap();
    let (f, _) = assemble(&pt(&[0.1, -1.6], &[0.1, -0.05]), &params).unwrap();
    let i_nn = CMatrix::<f64>::signature_nn(2);
    let m0 = f.g.matmul(&i_nn).matmul(&f.g.adjoint());
    let ev0 = spectral_invariants(&f.g).unwrap();
    for t in [0.1, 1.0, 10.0] {
        let g = exact_flow(&f.g, t).unwrap();
        assert!(rel_diff(&g.matmul(&i_nn).matmul(&g.adjoint()), &m0) < 1e-10);
        for nu in 1..=3 {
            let (a, b) = (phi_trace(&g, nu).unwrap(), phi_trace(&f.g, nu).unwrap());
            assert!((a - b).abs() < 1e-10 * b.abs().max(1.0), "t={t} nu={nu} {a} {b}");
        }
        for a in spectral_invariants(&g).unwrap() {
            let nearest = ev0.iter().map(|b| (a - b).norm() / b.norm().max(1.0)).fold(f64::INFINITY, f64::min);
            assert!(nearest < 1e-10, "t={t} {a} {ev0:?}");
        }
    }
}

#[test]
fn reduced_and_projected_flows_agree() {
    let params = ModelParams::new(0.5, 1.2, 1.1, 2).unwrap();
    let start = pt(&[0.9, -0.5], &[0.4, -0.3]);
    let red = integrate_reduced(&start, &params, 1.0, 1e-4, Integrator::Rk4, &FlowConvention::default()).unwrap();
    let (f, _) = assemble(&start, &params).unwrap();
    let proj = project_flow(&f.g, &params, &red.times).unwrap();
    let dev = compare_trajectories(&red, &proj).unwrap();
    println!("{dev:?}");
    assert!(dev.max() < 1e-6);
    assert!(proj.residual.iter().all(|&r| r < 1e-8));
    assert!(proj.max_energy_drift() < 1e-10);
}

#[test]
fn energy_drift_is_fourth_order() {
    let params = ModelParams::new(0.5, 1.2, 1.1, 2).unwrap();
    let start = pt(&[0.9, -0.5], &[0.4, -0.3]);
    let c = FlowConvention::default();
    let d1 = integrate_reduced(&start, &params, 2.0, 0.02, Integrator::Rk4, &c).unwrap().max_energy_drift();
    let d2 = integrate_reduced(&start, &params, 2.0, 0.01, Integrator::Rk4, &c).unwrap().max_energy_drift();
    println!("drift ratio {}", d1 / d2);
    assert!(d1 / d2 > 12.0 && d1 / d2 < 20.0, "{d1} {d2}");
}

#[test]
fn adaptive_pair_matches_fixed_step() {
    let params = ModelParams::new(0.6, 1.3, 0.7, 3).unwrap();
    let start = pt(&[1.4, 0.2, -1.0], &[0.3, -0.4, 0.5]);
    let c = FlowConvention::default();
    let run = |dt: f64, m: Integrator| integrate_reduced(&start, &params, 1.0, dt, m, &c).unwrap();
    let adaptive = run(0.05, Integrator::DormandPrince { rtol: 1e-12, atol: 1e-13 });
    let thin = |t: Trajectory| {
        let step = (t.len() - 1) / 20;
        let idx: Vec<usize> = (0..=20).map(|k| k * step).collect();
        Trajectory {
            times: idx.iter().map(|&i| t.times[i]).collect(),
            points: idx.iter().map(|&i| t.points[i].clone()).collect(),
            energy: idx.iter().map(|&i| t.energy[i]).collect(),
            residual: idx.iter().map(|&i| t.residual[i]).collect(),
            status: t.status,
        }
    };
    let reference = thin(run(2.5e-4, Integrator::Rk4));
    let coarse = compare_trajectories(&run(0.05, Integrator::Rk4), &reference).unwrap().max();
    let finer = compare_trajectories(&thin(run(0.025, Integrator::Rk4)), &reference).unwrap().max();
    let da = compare_trajectories(&adaptive, &reference).unwrap().max();
    println!("adaptive {da:e} rk4 {coarse:e} -> {finer:e}");
    assert!(da < 1e-9);
    assert!(coarse / finer > 12.0);
}

#[test]
fn time_reversal_returns_to_start() {
    let params = ModelParams::new(0.5, 1.2, 1.1, 2).unwrap();
    let start = pt(&[0.9, -0.5], &[0.4, -0.3]);
    let c = FlowConvention::default();
    let fwd = integrate_reduced(&start, &params, 1.0, 1e-3, Integrator::Rk4, &c).unwrap();
    let end = fwd.points.last().unwrap();
    let flipped = pt(end.q(), &end.p().iter().map(|p| -p).collect::<Vec<_>>());
    let back = integrate_reduced(&flipped, &params, 1.0, 1e-3, Integrator::Rk4, &c).unwrap();
    let home = back.points.last().unwrap();
    for (a, b) in home.q().iter().zip(start.q()) {
        assert!((a - b).abs() < 1e-9);
    }
    for (a, b) in home.p().iter().zip(start.p()) {
        assert!((a + b).abs() < 1e-9);
    }
}

#[test]
fn small_oscillation_stays_bounded() {
    let params = ModelParams::new(0.5, 1.0, 1.0, 1).unwrap();
    let t = integrate_reduced(&pt(&[0.0], &[0.05]), &params, 100.0, 1e-2, Integrator::Rk4, &FlowConvention::default())
        .unwrap();
    assert_eq!(t.status, TrajectoryStatus::Complete);
    assert!(t.points.iter().all(|z| z.p()[0].abs() < 0.1));
    assert!(t.max_energy_drift() < 1e-8);
}

#[test]
fn collision_course_stops_at_the_wall() {
    let params = ModelParams::new(0.5, 1.2, 1.1, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let c = FlowConvention::default();
    for _ in 0..5 {
        let start = Sampler::default().sample(&mut rng, &params);
        let t = integrate_reduced(&start, &params, 5.0, 1e-2, Integrator::Rk4, &c).unwrap();
        assert_eq!(t.times.len(), t.points.len());
        if let TrajectoryStatus::ChamberApproach { t: at } = t.status {
            assert!(at < 5.0);
        }
    }
    assert_eq!(time_grid(0.0, 1.0).unwrap(), vec![0.0]);
}
