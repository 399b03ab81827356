use kgman_core::fit::log_log_slope;
use kgman_core::homoclinic::HomoclinicOrbit;
use kgman_core::manifolds::*;
use kgman_core::{Model, ModelParams, State};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn model(n: usize) -> Model {
    Model::new(ModelParams::new(0.5, 1, n).unwrap()).unwrap()
}

/// Decaying profile over every elliptic mode, scaled to `norm`.
fn center_data(model: &Model, norm: f64, symmetric: bool) -> State {
    let mut v = model.zero_state();
    for n in 1..model.dim() {
        v.a[n] = 1.0 / (n as f64).powi(2);
        if !symmetric {
            v.b[n] = 0.5 / (n as f64).powi(2);
        }
    }
    let s = model.spectrum().norm(&v);
    v.scaled(norm / s)
}

fn random_deviation(rng: &mut ChaCha8Rng, model: &Model, scale: f64) -> State {
    let mut z = model.zero_state();
    for n in 0..model.dim() {
        z.a[n] = rng.gen_range(-scale..scale);
        z.b[n] = rng.gen_range(-scale..scale);
    }
    z
}

#[test]
fn remainder_is_quadratic_along_a_ray() {
    let model = model(4);
    let cfg = TruncationConfig::new(0.5, 0.5).unwrap();
    let h = HomoclinicOrbit::new(model.params()).state(0.3, model.spectrum());
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let dir = random_deviation(&mut rng, &model, 1.0);
    let dir = dir.scaled(1.0 / model.spectrum().norm(&dir));
    let scales = [1e-4, 3e-4, 1e-3, 3e-3, 1e-2];
    let sizes: Vec<f64> = scales
        .iter()
        .map(|s| model.spectrum().norm(&truncated_n(&dir.scaled(*s), &h, &model, &cfg)))
        .collect();
    let slope = log_log_slope(&scales, &sizes).unwrap();
    assert!((slope - 2.0).abs() <= 0.1, "slope {slope}");
    assert_eq!(
        truncated_n(&model.zero_state(), &h, &model, &cfg).max_abs(),
        0.0
    );
}

#[test]
fn remainder_is_lipschitz_with_constant_of_order_delta() {
    // ‖𝒩(Z) - 𝒩(Z')‖ ≤ C δ ‖Z - Z'‖ for |Z_h|, |Z'_h| ≤ δ, C frozen from a fit
    const C_FROZEN: f64 = 0.3;
    let model = model(4);
    let cfg = TruncationConfig::new(0.1, 0.5).unwrap();
    let orbit = HomoclinicOrbit::new(model.params());
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let t = rng.gen_range(-10.0..10.0);
        let h = orbit.state(t, model.spectrum());
        let scale = cfg.delta / (2.0 * model.dim() as f64);
        let z = random_deviation(&mut rng, &model, 2.0 * scale);
        let w = random_deviation(&mut rng, &model, 2.0 * scale);
        assert!(z.project_h().norm() <= cfg.delta && w.project_h().norm() <= cfg.delta);
        let diff = truncated_n(&z, &h, &model, &cfg).sub(&truncated_n(&w, &h, &model, &cfg));
        let ratio = model.spectrum().norm(&diff) / (cfg.delta * model.spectrum().norm(&z.sub(&w)));
        worst = worst.max(ratio);
    }
    assert!(worst <= C_FROZEN, "fitted constant {worst}");
}

#[test]
fn truncated_field_is_reversible() {
    let model = model(4);
    let cfg = TruncationConfig::new(0.1, 0.5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let x = random_deviation(&mut rng, &model, 0.05);
        let lhs = truncated_f(&x.apply_symmetry(), &model, &cfg);
        let rhs = truncated_f(&x, &model, &cfg).apply_symmetry().scaled(-1.0);
        assert!(lhs.sub(&rhs).max_abs() < 1e-15);
    }
}

#[test]
fn shooting_and_fixed_point_agree_on_a_small_grid() {
    let model = model(3);
    let cfg = TruncationConfig::from_epsilon_sq(1e-4, 0.5)
        .unwrap()
        .with_horizon(30.0);
    let v_c = center_data(&model, 0.8e-4, false);
    let solver = CenterStableSolver::new(&model, &cfg).unwrap();
    let fp = solver.fixed_point(&v_c, -0.5e-4).unwrap();
    let sh = solver.shooting(&v_c, -0.5e-4).unwrap();
    let tol = 10.0 * cfg.fp_tol.max(cfg.shoot_tol);
    assert!(sh.sup_distance(&fp, 20.0, &model) < tol);
    for sol in [&fp, &sh] {
        let (stable, center) = sol.boundary_residual(solver.basis());
        assert!(stable < cfg.fp_tol && center < cfg.fp_tol);
    }
    let (sup_h, sup_c) = fp.sup_norms(cfg.t_horizon, &model);
    assert!(sup_h <= 10.0 * cfg.data_radius() && sup_c <= 10.0 * cfg.data_radius());
    let scan = classification_scan(&solver, &v_c, -0.5e-4, -cfg.epsilon, cfg.epsilon, 21);
    assert!(is_monotone(&scan));
    assert!(scan.first().unwrap().1 != scan.last().unwrap().1);
}

#[test]
fn stable_coefficient_only() {
    let model = model(2);
    let cfg = TruncationConfig::from_epsilon_sq(1e-4, 0.5)
        .unwrap()
        .with_horizon(40.0);
    let v_s = cfg.data_radius();
    let sol = solve_center_stable(&model.zero_state(), v_s, &model, &cfg, Method::FixedPoint).unwrap();
    let (sup_h, sup_c) = sol.sup_norms(40.0, &model);
    assert!(sup_h <= 10.0 * v_s);
    // the elliptic modes are never excited by the planar dynamics
    assert_eq!(sup_c, 0.0);
}

#[test]
fn center_manifold_graph() {
    let model = model(3);
    let cfg = TruncationConfig::new(0.1, 0.5).unwrap();
    let psi0 = center_manifold_psi(&model.zero_state(), &model, &cfg).unwrap();
    assert_eq!((psi0.a0, psi0.b0), (0.0, 0.0));
    let v = center_data(&model, 0.5 * cfg.delta, true);
    let psi = center_manifold_psi(&v, &model, &cfg).unwrap();
    assert!(psi.b0.abs() <= cfg.fp_tol);
    assert!(psi.norm() <= cfg.delta.powi(3));
    let orbit = center_manifold_orbit(&v, &model, &cfg, cfg.center_window, cfg.center_dt).unwrap();
    let mid = orbit.mid_index();
    for k in 1..=mid {
        let fwd = &orbit.states[mid + k];
        let bwd = &orbit.states[mid - k];
        assert!(fwd.sub(&bwd.apply_symmetry()).max_abs() < 1e-14);
    }
}

#[test]
fn lyapunov_report_for_zero_data() {
    let model = model(2);
    let cfg = TruncationConfig::new(0.1, 0.5).unwrap().with_horizon(20.0);
    let report = lyapunov_within_wc(&model.zero_state(), &model, &cfg, 10.0).unwrap();
    assert_eq!(report.sup_center, 0.0);
    assert_eq!(report.sup_hyperbolic, 0.0);
}

#[test]
fn homoclinic_converges_to_the_origin_at_rate_m() {
    let model = model(2);
    let base = TruncationConfig::new(0.1, 0.5).unwrap();
    let cfg = base.with_horizon(2.0 * base.t_eps + 10.0);
    let sol = solve_center_stable(&model.zero_state(), 0.0, &model, &cfg, Method::FixedPoint).unwrap();
    let report = convergence_to_wc(&sol, &model, &cfg, 6).unwrap();
    assert!((report.rate - 0.5).abs() < 1e-3, "rate {}", report.rate);
    assert!(report.passes());
}

#[test]
fn zero_heteroclinic_is_the_homoclinic() {
    let model = model(2);
    let cfg = TruncationConfig::new(0.1, 0.5).unwrap().with_horizon(20.0);
    let het = reversible_heteroclinic(&model.zero_state(), &model, &cfg, 1.0).unwrap();
    let orbit = HomoclinicOrbit::new(model.params());
    for (t, x) in het.times.iter().zip(&het.states) {
        assert!(x.sub(&orbit.state(*t, model.spectrum())).max_abs() < 1e-15);
    }
    assert!(het.symmetry_residual < 1e-8);
    let mut moving = model.zero_state();
    moving.a[1] = 1e-3;
    moving.b[1] = 1e-3;
    assert!(reversible_heteroclinic(&moving, &model, &cfg, 1.0).is_err());
}

#[test]
fn untruncated_reintegration_reproduces_a_tube_orbit() {
    let model = model(3);
    let cfg = TruncationConfig::from_epsilon_sq(1e-4, 0.5)
        .unwrap()
        .with_horizon(30.0);
    let v_c = center_data(&model, 0.5e-4, false);
    let sol = solve_center_stable(&v_c, 0.2e-4, &model, &cfg, Method::FixedPoint).unwrap();
    let report = truncation_consistency(&sol, &model, &cfg, cfg.t_horizon, 1.0).unwrap();
    assert!(report.inside_tube);
    assert!(report.max_mismatch < 1e-8, "mismatch {}", report.max_mismatch);
}
