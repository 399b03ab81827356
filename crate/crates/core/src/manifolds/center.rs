use super::{cutoff_theta, truncated_f_momentum, TruncatedForce, TruncationConfig};
use crate::error::{Error, Result};
use crate::evolve::{integrate_with, SchemeConfig, SchemeOrder};
use crate::spectral::{HyperbolicPoint, Model, State};

/// Orbit of the truncated system on the center manifold, sampled on a grid
/// symmetric around `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterOrbit {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub iterations: usize,
    pub last_update: f64,
}

impl CenterOrbit {
    pub fn mid_index(&self) -> usize {
        self.times.len() / 2
    }

    /// Hyperbolic part at `t = 0`.
    pub fn psi(&self) -> HyperbolicPoint {
        self.states[self.mid_index()].project_h()
    }
}

fn check_center_data(v_c: &State, model: &Model, cfg: &TruncationConfig) -> Result<()> {
    if v_c.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: v_c.dim(),
        });
    }
    if v_c.a[0] != 0.0 || v_c.b[0] != 0.0 {
        return Err(Error::InvalidParameter(
            "center data must have zero hyperbolic part".into(),
        ));
    }
    let norm = model.spectrum().norm(v_c);
    if norm > cfg.delta {
        return Err(Error::InvalidParameter(format!(
            "center data of norm {norm:e} outside the admissible ball of radius δ = {:e}",
            cfg.delta
        )));
    }
    Ok(())
}

/// Fixed point of the center-manifold map on `[-window, window]`:
/// the hyperbolic part uses the constant basis `σ₀ = (1,-m)`, `ρ₀ = (1,m)`
/// with exponentially weighted trapezoid sums, the center part the free
/// elliptic rotation started from `V_c` at `t = 0`.
pub fn center_manifold_orbit(
    v_c: &State,
    model: &Model,
    cfg: &TruncationConfig,
    window: f64,
    dt: f64,
) -> Result<CenterOrbit> {
    check_center_data(v_c, model, cfg)?;
    if !(window > 0.0 && dt > 0.0) {
        return Err(Error::InvalidParameter(
            "center window and step must be positive".into(),
        ));
    }
    let m = model.params().m;
    let dim = model.dim();
    let half = (window / dt).ceil() as usize;
    let h = window / half as f64;
    let len = 2 * half + 1;
    let times: Vec<f64> = (0..len).map(|i| (i as f64 - half as f64) * h).collect();
    let omegas: Vec<f64> = (0..dim)
        .map(|n| if n == 0 { 0.0 } else { model.spectrum().omega(n, m) })
        .collect();
    let rotation: Vec<[f64; 3]> = omegas
        .iter()
        .map(|w| {
            if *w == 0.0 {
                return [1.0, 0.0, 0.0];
            }
            let (s, c) = (w * h).sin_cos();
            [c, s / w, -w * s]
        })
        .collect();
    let decay = (-m * h).exp();

    // free center evolution K(t) V_c
    let free: Vec<State> = times
        .iter()
        .map(|t| {
            let mut x = State::zeros(dim);
            for n in 1..dim {
                let w = omegas[n];
                let (s, c) = (w * t).sin_cos();
                x.a[n] = v_c.a[n] * c + v_c.b[n] * s / w;
                x.b[n] = -v_c.a[n] * w * s + v_c.b[n] * c;
            }
            x
        })
        .collect();
    let mut states = free.clone();
    let mut iterations = 0;
    let mut last_update = f64::INFINITY;
    let mut converged = false;
    let mut polish = 0;
    loop {
        iterations += 1;
        let forcing: Vec<Vec<f64>> = states
            .iter()
            .map(|x| {
                let theta = cutoff_theta(model.spectrum().center_norm(x), cfg.delta);
                truncated_f_momentum(x, theta, model)
            })
            .collect();
        let mut next = free.clone();

        // X_h = σ₀ A - ρ₀ B with A' = -mA + ⟨PF, σ₀*⟩, B' = mB - ⟨PF, ρ₀*⟩
        let fa: Vec<f64> = forcing.iter().map(|g| -g[0] / (2.0 * m)).collect();
        let fb: Vec<f64> = forcing.iter().map(|g| g[0] / (2.0 * m)).collect();
        let mut forward = vec![0.0; len];
        for i in 0..len - 1 {
            forward[i + 1] = decay * forward[i] + 0.5 * h * (decay * fa[i] + fa[i + 1]);
        }
        let mut backward = vec![0.0; len];
        for i in (0..len - 1).rev() {
            backward[i] = decay * backward[i + 1] + 0.5 * h * (fb[i] + decay * fb[i + 1]);
        }
        for i in 0..len {
            next[i].a[0] = forward[i] - backward[i];
            next[i].b[0] = -m * (forward[i] + backward[i]);
        }

        // ∫_0^t K(t-τ)(0, g(τ)) dτ in both directions from t = 0
        for n in 1..dim {
            let r = rotation[n];
            let rot = |z: [f64; 2], sign: f64| {
                [z[0] * r[0] + sign * z[1] * r[1], sign * z[0] * r[2] + z[1] * r[0]]
            };
            let mut acc = [0.0, 0.0];
            for i in half..len - 1 {
                let kq = rot([0.0, forcing[i][n]], 1.0);
                let prev = rot(acc, 1.0);
                acc = [
                    prev[0] + 0.5 * h * kq[0],
                    prev[1] + 0.5 * h * (kq[1] + forcing[i + 1][n]),
                ];
                next[i + 1].a[n] += acc[0];
                next[i + 1].b[n] += acc[1];
            }
            let mut acc = [0.0, 0.0];
            for i in (1..=half).rev() {
                let kq = rot([0.0, forcing[i][n]], -1.0);
                let prev = rot(acc, -1.0);
                acc = [
                    prev[0] - 0.5 * h * kq[0],
                    prev[1] - 0.5 * h * (kq[1] + forcing[i - 1][n]),
                ];
                next[i - 1].a[n] += acc[0];
                next[i - 1].b[n] += acc[1];
            }
        }

        let update = next
            .iter()
            .zip(&states)
            .map(|(a, b)| model.spectrum().norm(&a.sub(b)))
            .fold(0.0, f64::max);
        let scale = next
            .iter()
            .map(|x| model.spectrum().norm(x))
            .fold(0.0, f64::max);
        states = next;
        if !update.is_finite() {
            return Err(Error::Divergence(format!(
                "non-finite center-manifold update at iteration {iterations}"
            )));
        }
        let sup_h = states
            .iter()
            .map(|x| x.project_h().norm())
            .fold(0.0, f64::max);
        if sup_h > cfg.delta {
            return Err(Error::Divergence(format!(
                "hyperbolic part {sup_h:e} left the tube of radius {:e}",
                cfg.delta
            )));
        }
        if converged {
            polish += 1;
            if update <= 1e-15 * scale || update >= last_update || polish >= 10 {
                last_update = update.min(last_update);
                break;
            }
        } else if update < cfg.fp_tol {
            converged = true;
        }
        last_update = update;
        if iterations >= cfg.max_iter && !converged {
            return Err(Error::Divergence(format!(
                "center-manifold map did not converge in {iterations} iterations"
            )));
        }
    }
    Ok(CenterOrbit {
        times,
        states,
        iterations,
        last_update,
    })
}

/// Hyperbolic coordinates of the center-manifold point above `V_c`.
pub fn center_manifold_psi(
    v_c: &State,
    model: &Model,
    cfg: &TruncationConfig,
) -> Result<HyperbolicPoint> {
    if v_c.max_abs() == 0.0 && v_c.dim() == model.dim() {
        return Ok(HyperbolicPoint::new(0.0, 0.0));
    }
    Ok(center_manifold_orbit(v_c, model, cfg, cfg.center_window, cfg.center_dt)?.psi())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovReport {
    pub data_norm: f64,
    pub sup_center: f64,
    pub inf_center: f64,
    /// `‖X_c(t*)‖`.
    pub center_at_t_star: f64,
    pub sup_hyperbolic: f64,
    /// `sup |X_h| / δ³`.
    pub hyperbolic_constant: f64,
    /// `max |J(t) - J(0)| / J(0)`.
    pub j_drift: f64,
    /// Largest mismatch between orbit samples and short direct integrations.
    pub integration_mismatch: f64,
    pub window: f64,
}

impl LyapunovReport {
    pub fn ratio_max(&self) -> f64 {
        if self.data_norm == 0.0 {
            return 0.0;
        }
        self.sup_center / self.data_norm
    }

    pub fn ratio_min(&self) -> f64 {
        if self.data_norm == 0.0 {
            return 0.0;
        }
        self.inf_center / self.data_norm
    }
}

/// Stability of the center-manifold orbit through `(Ψ(V_c), V_c)` over
/// `[-T_horizon, T_horizon]`.
pub fn lyapunov_within_wc(
    v_c: &State,
    model: &Model,
    cfg: &TruncationConfig,
    t_star: f64,
) -> Result<LyapunovReport> {
    let window = cfg.t_horizon;
    if !(t_star.abs() <= window) {
        return Err(Error::InvalidParameter(format!(
            "t* = {t_star} outside [-{window}, {window}]"
        )));
    }
    let data_norm = model.spectrum().norm(v_c);
    if v_c.dim() == model.dim() && v_c.max_abs() == 0.0 {
        return Ok(LyapunovReport {
            data_norm: 0.0,
            sup_center: 0.0,
            inf_center: 0.0,
            center_at_t_star: 0.0,
            sup_hyperbolic: 0.0,
            hyperbolic_constant: 0.0,
            j_drift: 0.0,
            integration_mismatch: 0.0,
            window,
        });
    }
    let orbit = center_manifold_orbit(v_c, model, cfg, window, cfg.center_dt)?;
    let spectrum = model.spectrum();
    let centers: Vec<f64> = orbit.states.iter().map(|x| spectrum.center_norm(x)).collect();
    let sup_center = centers.iter().copied().fold(0.0, f64::max);
    let inf_center = centers.iter().copied().fold(f64::INFINITY, f64::min);
    let h = orbit.times[1] - orbit.times[0];
    let star = (((t_star + window) / h).round() as usize).min(orbit.times.len() - 1);
    let sup_hyperbolic = orbit
        .states
        .iter()
        .map(|x| x.project_h().norm())
        .fold(0.0, f64::max);
    let j0 = model.j_functional(&orbit.states[orbit.mid_index()]);
    let j_drift = orbit
        .states
        .iter()
        .map(|x| (model.j_functional(x) - j0).abs() / j0)
        .fold(0.0, f64::max);

    // unit-length direct integrations of the truncated system from samples
    let per_unit = (1.0 / h).round().max(1.0) as usize;
    let scheme = SchemeConfig::new(SchemeOrder::Fourth, h / 10.0)?;
    let force = TruncatedForce::new(model, cfg);
    let mut integration_mismatch: f64 = 0.0;
    let mut start = 0;
    while start + per_unit < orbit.times.len() {
        let end = start + per_unit;
        let run = integrate_with(
            &force,
            &orbit.states[start],
            orbit.times[start],
            orbit.times[end],
            model,
            &scheme,
            &mut [],
        )?;
        integration_mismatch =
            integration_mismatch.max(spectrum.norm(&run.last().sub(&orbit.states[end])));
        start += 10 * per_unit;
    }

    Ok(LyapunovReport {
        data_norm,
        sup_center,
        inf_center,
        center_at_t_star: centers[star],
        sup_hyperbolic,
        hyperbolic_constant: sup_hyperbolic / cfg.delta.powi(3),
        j_drift,
        integration_mismatch,
        window,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::ModelParams;

    fn setup() -> (Model, TruncationConfig) {
        let model = Model::new(ModelParams::new(0.5, 1, 3).unwrap()).unwrap();
        let cfg = TruncationConfig::new(0.1, 0.5).unwrap();
        (model, cfg)
    }

    #[test]
    fn origin_is_a_fixed_point() {
        let (model, cfg) = setup();
        let psi = center_manifold_psi(&model.zero_state(), &model, &cfg).unwrap();
        assert_eq!((psi.a0, psi.b0), (0.0, 0.0));
        let orbit = center_manifold_orbit(&model.zero_state(), &model, &cfg, 5.0, 0.1).unwrap();
        assert!(orbit.states.iter().all(|x| x.max_abs() == 0.0));
    }

    #[test]
    fn symmetric_data_give_symmetric_point() {
        let (model, cfg) = setup();
        let mut v = model.zero_state();
        v.a[1] = 4e-3;
        v.a[3] = 3e-3;
        let orbit = center_manifold_orbit(&v, &model, &cfg, 40.0, 0.02).unwrap();
        let psi = orbit.psi();
        assert!(psi.a0 != 0.0);
        assert!(psi.b0.abs() <= cfg.fp_tol);
        // the whole orbit is reversible
        let last = orbit.times.len() - 1;
        for i in [0, 17, 500] {
            let d = orbit.states[i].sub(&orbit.states[last - i].apply_symmetry());
            assert!(d.max_abs() < 1e-14);
        }
    }

    #[test]
    fn large_data_rejected() {
        let (model, cfg) = setup();
        let mut v = model.zero_state();
        v.a[1] = 0.1;
        assert!(center_manifold_psi(&v, &model, &cfg).is_err());
    }
}
