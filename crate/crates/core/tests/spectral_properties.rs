use kgman_core::{ManifoldKind, Model, ModelParams, State};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn circle(p: u32, n: usize) -> Model {
    Model::new(ModelParams::new(0.5, p, n).unwrap()).unwrap()
}

fn state_strategy(dim: usize, scale: f64) -> impl Strategy<Value = State> {
    (
        prop::collection::vec(-scale..scale, dim),
        prop::collection::vec(-scale..scale, dim),
    )
        .prop_map(|(a, b)| State::new(a, b).unwrap())
}

fn random_state(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> State {
    let a = (0..dim).map(|_| rng.gen_range(-scale..scale)).collect();
    let b = (0..dim).map(|_| rng.gen_range(-scale..scale)).collect();
    State::new(a, b).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projections_split_the_state(x in state_strategy(17, 2.0)) {
        let h = x.project_h();
        let c = x.project_c();
        let rebuilt = c.clone().with_hyperbolic(h);
        prop_assert_eq!(&rebuilt, &x);
        prop_assert_eq!(c.project_c(), c.clone());
        prop_assert_eq!(c.a[0], 0.0);
        prop_assert_eq!(c.b[0], 0.0);
        let only_h = x.sub(&c);
        prop_assert_eq!(only_h.project_c().max_abs(), 0.0);
    }

    #[test]
    fn symmetry_is_an_involution_preserving_energies(x in state_strategy(17, 1.0)) {
        let model = circle(1, 8);
        let s = x.apply_symmetry();
        prop_assert_eq!(s.apply_symmetry(), x.clone());
        prop_assert_eq!(model.energy(&s), model.energy(&x));
        prop_assert_eq!(model.j_functional(&s), model.j_functional(&x));
        // reversibility of the vector field: F(SX) = -S F(X)
        prop_assert_eq!(
            model.nonlinear_term(&s),
            model.nonlinear_term(&x).apply_symmetry().scaled(-1.0)
        );
    }

    #[test]
    fn energy_is_even_in_the_state(x in state_strategy(9, 1.0)) {
        let model = circle(2, 4);
        let neg = x.scaled(-1.0);
        prop_assert!((model.energy(&neg) - model.energy(&x)).abs() <= 1e-14 * (1.0 + model.energy(&x).abs()));
    }
}

/// Dense trapezoid oracle for `⟨u^{2p+1}, e_n⟩` on the circle.
fn dense_power_coefficients(model: &Model, a: &[f64], points: usize) -> Vec<f64> {
    let degree = model.params().degree() as i32;
    let entries = model.spectrum().entries();
    let mut out = vec![0.0; entries.len()];
    for j in 0..points {
        let x = [2.0 * PI * j as f64 / points as f64, 0.0];
        let u: f64 = entries.iter().zip(a).map(|(e, c)| c * e.basis.eval(x)).sum();
        let f = u.powi(degree);
        for (o, e) in out.iter_mut().zip(entries) {
            *o += f * e.basis.eval(x);
        }
    }
    out.iter().map(|v| v / points as f64).collect()
}

#[test]
fn dealiased_power_matches_dense_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (p, n) in [(1, 8), (2, 6), (3, 5)] {
        let model = circle(p, n);
        for _ in 0..5 {
            let x = random_state(&mut rng, model.dim(), 0.5);
            let fast = model.nonlinear_term(&x);
            let dense = dense_power_coefficients(&model, &x.a, 4096);
            for (f, d) in fast.b.iter().zip(&dense) {
                assert!((f + d).abs() < 1e-13 * d.abs().max(1.0), "p={p} n={n}: {f} vs {}", -d);
            }
            assert!(fast.a.iter().all(|v| *v == 0.0));
        }
    }
}

#[test]
fn dealiased_power_on_the_torus_matches_dense_quadrature() {
    let model = Model::new(ModelParams::on(ManifoldKind::Torus2, 0.5, 1, 2).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let x = random_state(&mut rng, model.dim(), 0.3);
    let fast = model.nonlinear_term(&x);
    let entries = model.spectrum().entries();
    let points = 64;
    let mut dense = vec![0.0; entries.len()];
    for i in 0..points {
        for j in 0..points {
            let pt = [
                2.0 * PI * i as f64 / points as f64,
                2.0 * PI * j as f64 / points as f64,
            ];
            let u: f64 = entries.iter().zip(&x.a).map(|(e, c)| c * e.basis.eval(pt)).sum();
            for (d, e) in dense.iter_mut().zip(entries) {
                *d += u.powi(3) * e.basis.eval(pt);
            }
        }
    }
    let area = (points * points) as f64;
    for (f, d) in fast.b.iter().zip(&dense) {
        assert!((f + d / area).abs() < 1e-13 * (d / area).abs().max(1.0));
    }
}

#[test]
fn nonlinearity_lipschitz_constant_scales_with_amplitude() {
    // ‖F(X) - F(X')‖ ≤ C max(‖X‖, ‖X'‖)^{2p} ‖X - X'‖ with C frozen from a fit
    const C_FROZEN: f64 = 0.05;
    let model = circle(1, 8);
    let spectrum = model.spectrum();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let scale = 10f64.powf(rng.gen_range(-4.0..-1.0));
        let x = random_state(&mut rng, model.dim(), scale);
        let y = random_state(&mut rng, model.dim(), scale);
        let amp = spectrum.norm(&x).max(spectrum.norm(&y));
        let lhs = spectrum.norm(&model.nonlinear_term(&x).sub(&model.nonlinear_term(&y)));
        let ratio = lhs / (amp * amp * spectrum.norm(&x.sub(&y)));
        worst = worst.max(ratio);
    }
    assert!(worst <= C_FROZEN, "fitted constant {worst} exceeds {C_FROZEN}");
}

#[test]
fn energy_of_homoclinic_start_and_j_example() {
    let model = circle(1, 4);
    let mut x = model.zero_state();
    x.a[0] = 0.5 * 2f64.sqrt();
    assert!(model.energy(&x).abs() < 1e-16);
    let mut y = model.zero_state();
    y.a[1] = 1.0;
    assert!((model.j_functional(&y) - 0.375).abs() < 1e-15);
    let mut s = model.zero_state();
    s.a[1] = 1.0;
    s.b[1] = 2.0;
    let r = s.apply_symmetry();
    assert_eq!((r.a[1], r.b[1]), (1.0, -2.0));
}
