use bcn_core::decomposition::{decompose_kb, extract_reduced};
use bcn_core::hamiltonians::{
    fd_gradient, hamiltonian_q, hamiltonian_q_gradient, phi_gradient_dual, phi_reduced, weyl_check, FdConfig,
};
use bcn_core::limits::{h2_sigma_form, hat_coordinates, sutherland_h2, LimitParams};
use bcn_core::matops::{expm, hermitian_eig, indefinite_cholesky_upper_nn, rel_diff, svd_ordered, CMatrix};
use bcn_core::model::{abc_from_params, cartan_from_q};
use bcn_core::reconstruction::{assemble, assemble_gauged};
use bcn_core::sampling::Sampler;
use bcn_core::scalar::wrap_angle;
use bcn_core::{ModelParams, ReducedPoint, C};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn params() -> impl Strategy<Value = ModelParams<f64>> {
    (0.3..0.8f64, 0.5..2.0f64, 0.5..2.0f64, 1..=3usize).prop_map(|(a, x, y, n)| ModelParams::new(a, x, y, n).unwrap())
}

fn matrix(n: usize) -> impl Strategy<Value = CMatrix<f64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n * n)
        .prop_map(move |v| CMatrix::from_row_major(n, n, v.into_iter().map(|(a, b)| C::new(a, b)).collect()))
}

fn sized_matrix() -> impl Strategy<Value = CMatrix<f64>> {
    (1..=8usize).prop_flat_map(matrix)
}

fn point(params: &ModelParams<f64>, seed: u64) -> ReducedPoint<f64> {
    Sampler::default().sample(&mut ChaCha8Rng::seed_from_u64(seed), params)
}

fn unitary(rng: &mut ChaCha8Rng, n: usize) -> CMatrix<f64> {
    let m = CMatrix::from_fn(n, n, |_, _| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let s = svd_ordered(&m).unwrap();
    s.u.matmul(&s.v.adjoint())
}

fn point_distance(a: &ReducedPoint<f64>, b: &ReducedPoint<f64>) -> f64 {
    let dq = a.q().iter().zip(b.q()).map(|(x, y)| (x - y).abs());
    let dp = a.p().iter().zip(b.p()).map(|(x, y)| wrap_angle(x - y).abs());
    dq.chain(dp).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hermitian_eig_reconstructs(a in sized_matrix()) {
        let h = &a + &a.adjoint();
        let e = hermitian_eig(&h).unwrap();
        let d: Vec<C<f64>> = e.values.iter().map(|&v| C::new(v, 0.0)).collect();
        let back = e.vectors.matmul(&CMatrix::from_diag(&d)).matmul(&e.vectors.adjoint());
        prop_assert!((&back - &h).frobenius_norm() <= 1e-12 * h.frobenius_norm().max(1e-300));
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn svd_reconstructs(a in sized_matrix()) {
        let s = svd_ordered(&a).unwrap();
        prop_assert!((&s.reconstruct() - &a).frobenius_norm() <= 1e-12 * a.frobenius_norm());
        prop_assert!(s.s.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(s.u.is_unitary(1e-12) && s.v.is_unitary(1e-12));
    }

    #[test]
    fn expm_inverse_pair(a in sized_matrix(), norm in 0.0..10.0f64) {
        let n = a.rows();
        let g = a.scale_real(norm / a.frobenius_norm());
        let prod = expm(&g).unwrap().matmul(&expm(&-&g).unwrap());
        prop_assert!((&prod - &CMatrix::identity(n)).frobenius_norm() < 1e-11);
    }

    #[test]
    fn indefinite_cholesky_inverts_the_square(half in 1..=4usize, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = 2 * half;
        let b0 = CMatrix::from_fn(m, m, |i, j| {
            if i == j {
                C::new(rng.gen_range(0.5..2.0), 0.0)
            } else if i < j {
                C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            } else {
                C::new(0.0, 0.0)
            }
        });
        let s = CMatrix::signature_nn(half);
        let b = indefinite_cholesky_upper_nn(&b0.adjoint().matmul(&s).matmul(&b0)).unwrap();
        prop_assert!(rel_diff(&b, &b0) < 1e-11);
    }

    #[test]
    fn q_recovered_from_radial_chart(p in params(), seed in any::<u64>()) {
        let pt = point(&p, seed);
        let cartan = cartan_from_q(pt.q(), &p).unwrap();
        for (s, q) in cartan.sigma.iter().zip(pt.q()) {
            prop_assert!((s.ln() - q).abs() <= 1e-15 * q.abs().max(1.0));
        }
    }

    #[test]
    fn both_forms_of_the_hamiltonian_agree(p in params(), seed in any::<u64>()) {
        let pt = point(&p, seed);
        let a = bcn_core::hamiltonians::hamiltonian_sigma(&pt.sigma(), pt.p(), &p).unwrap();
        let b = hamiltonian_q(pt.q(), pt.p(), &abc_from_params(&p)).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn both_splittings_agree_and_are_unique(p in params(), seed in any::<u64>()) {
        let pt = point(&p, seed);
        let (f, _) = assemble(&pt, &p).unwrap();
        prop_assert!(rel_diff(&f.k_l.matmul(&f.b_r), &f.b_l.matmul(&f.k_r)) < 1e-10);
        let (k, b) = decompose_kb(&f.g).unwrap();
        prop_assert!(rel_diff(&k, &f.k_l) < 1e-10 && rel_diff(&b, &f.b_r) < 1e-10);
    }

    #[test]
    fn extraction_ignores_the_residual_gauge(p in params(), seed in any::<u64>()) {
        let n = p.n();
        let pt = point(&p, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let mut r = CMatrix::identity(n);
        r[(0, 0)] = C::from_polar(1.0, rng.gen_range(-3.0..3.0));
        if n > 1 {
            r.set_block(1, 1, &unitary(&mut rng, n - 1));
        }
        let r = r.scale(C::from_polar(1.0, -r.determinant().arg() / n as f64));
        let (f, _) = assemble_gauged(&pt, &p, Some(&r)).unwrap();
        let right = CMatrix::block_diag(&unitary(&mut rng, n), &unitary(&mut rng, n));
        let back = extract_reduced(&f.g.matmul(&right), &p).unwrap();
        prop_assert!(point_distance(&back, &pt) < 1e-9);
    }

    #[test]
    fn weyl_orbit_leaves_the_hamiltonian_fixed(p in params(), seed in any::<u64>()) {
        let pt = point(&p, seed);
        prop_assert!(weyl_check(&pt.sigma(), pt.p(), &p).unwrap().holds(1e-12));
    }

    #[test]
    fn q_form_gradient_matches_differences(p in params(), seed in any::<u64>()) {
        let pt = point(&p, seed);
        let c = abc_from_params(&p);
        let (dq, dp) = hamiltonian_q_gradient(pt.q(), pt.p(), &c).unwrap();
        let f = |z: &ReducedPoint<f64>| hamiltonian_q(z.q(), z.p(), &c);
        let fd = fd_gradient(&f, &pt, &FdConfig::default()).unwrap();
        let scale = dq.iter().chain(&dp).fold(1.0f64, |a, b| a.max(b.abs()));
        for (a, b) in dq.iter().chain(&dp).zip(&fd) {
            prop_assert!((a - b).abs() <= 1e-6 * scale, "{a} {b}");
        }
    }

    #[test]
    fn dual_gradient_matches_differences(p in params(), seed in any::<u64>(), nu in 1..=2u32) {
        let pt = point(&p, seed);
        let exact = phi_gradient_dual(&pt, &p, nu).unwrap();
        let f = |z: &ReducedPoint<f64>| phi_reduced(z, &p, nu);
        let fd = fd_gradient(&f, &pt, &FdConfig::default()).unwrap();
        let scale = exact.iter().fold(1.0f64, |a, b| a.max(b.abs()));
        for (a, b) in exact.iter().zip(&fd) {
            prop_assert!((a - b).abs() <= 1e-6 * scale, "{a} {b}");
        }
    }

    #[test]
    fn hyperbolic_identities(a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let (sa, sb, ca, cb) = (a.sinh(), b.sinh(), a.cosh(), b.cosh());
        let lhs = sa * sa - sb * sb;
        prop_assert!((lhs - (a + b).sinh() * (a - b).sinh()).abs() <= 1e-12 * lhs.abs().max(1.0));
        let lhs = sa * sa * cb * cb + sb * sb * ca * ca;
        let rhs = 0.5 * ((a + b).sinh().powi(2) + (a - b).sinh().powi(2));
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(1.0));
    }

    #[test]
    fn kinetic_term_in_hat_momenta(q in prop::collection::vec(-2.0..2.0f64, 1..4), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pi: Vec<f64> = q.iter().map(|_| rng.gen_range(-2.0..2.0)).collect();
        let (_, phat) = hat_coordinates(&q, &pi);
        let direct: f64 = q.iter().zip(&pi).map(|(q, p)| {
            let s = q.exp();
            0.5 * (p * (1.0 + s * s).sqrt() / s).powi(2)
        }).sum();
        let hat: f64 = phat.iter().map(|p| 0.5 * p * p).sum();
        prop_assert!((direct - hat).abs() <= 1e-12 * direct.max(1.0));
    }

    #[test]
    fn sutherland_form_equals_sigma_form(
        xi in -1.0..1.0f64, eta in -1.0..1.0f64, zeta in -1.0..1.0f64,
        p in params(), seed in any::<u64>(),
    ) {
        let lp = LimitParams::new(xi, eta, zeta);
        let pt = point(&p, seed);
        let (qh, ph) = hat_coordinates(pt.q(), pt.p());
        let a = sutherland_h2(&qh, &ph, &lp).unwrap();
        let b = h2_sigma_form(pt.q(), pt.p(), &lp).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "{a} {b}");
        let flipped = sutherland_h2(&qh, &ph, &LimitParams::new(xi, eta, -zeta)).unwrap();
        prop_assert!((a - flipped).abs() <= 1e-14 * a.abs().max(1.0));
    }
}
