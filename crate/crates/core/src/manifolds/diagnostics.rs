use super::{center_manifold_psi, CenterStableSolution, CenterStableSolver, TruncationConfig};
use crate::error::{Error, Result};
use crate::evolve::{integrate_with, KleinGordonForce, SchemeConfig, SchemeOrder};
use crate::fit::exponential_rate;
use crate::homoclinic::HomoclinicOrbit;
use crate::spectral::{Model, State};

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub times: Vec<f64>,
    /// `d(t) = ‖X(t) - (Ψ(X_c(t)), X_c(t))‖`.
    pub distances: Vec<f64>,
    /// Minus the slope of `ln d` against `t`.
    pub rate: f64,
    pub required_rate: f64,
    pub distance_at_t_eps: f64,
}

impl ConvergenceReport {
    pub fn passes(&self) -> bool {
        self.rate >= self.required_rate
    }
}

/// Fits the approach of a center-stable solution to the center-manifold
/// graph on `samples` times evenly spread over `[t_ε, 2t_ε]`.
pub fn convergence_to_wc(
    sol: &CenterStableSolution,
    model: &Model,
    cfg: &TruncationConfig,
    samples: usize,
) -> Result<ConvergenceReport> {
    let (t0, t1) = (cfg.t_eps, 2.0 * cfg.t_eps);
    if sol.horizon() < t1 * (1.0 - 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "solution horizon {} shorter than 2t_ε = {t1}",
            sol.horizon()
        )));
    }
    if samples < 2 {
        return Err(Error::InvalidParameter("need at least two sample times".into()));
    }
    let orbit = HomoclinicOrbit::new(model.params());
    let dt = sol.dt();
    let mut times = Vec::with_capacity(samples);
    let mut distances = Vec::with_capacity(samples);
    for k in 0..samples {
        let target = t0 + (t1 - t0) * k as f64 / (samples - 1) as f64;
        let i = ((target / dt).round() as usize).min(sol.states.len() - 1);
        let x = sol.full_state(i, &orbit);
        let x_c = x.project_c();
        let psi = center_manifold_psi(&x_c, model, cfg)?;
        let manifold_point = x_c.with_hyperbolic(psi);
        times.push(sol.times[i]);
        distances.push(model.spectrum().norm(&x.sub(&manifold_point)));
    }
    let slope = exponential_rate(&times, &distances)
        .ok_or_else(|| Error::InvalidParameter("distance fit is degenerate".into()))?;
    Ok(ConvergenceReport {
        rate: -slope,
        required_rate: cfg.r,
        distance_at_t_eps: distances[0],
        times,
        distances,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationReport {
    /// `sup |Z_h|` and `sup ‖Z_c‖` over the checked window.
    pub sup_hyperbolic: f64,
    pub sup_center: f64,
    /// Both sups at most `δ`, so the cutoff is inactive.
    pub inside_tube: bool,
    /// Largest distance between the solution and its untruncated re-integration.
    pub max_mismatch: f64,
    pub segments: usize,
}

/// Re-integrates `X = h + Z` with the full (untruncated) equation on
/// consecutive segments of length `segment` started from solution samples
/// over `[0, t_max]`, and compares every step with the solution.
pub fn truncation_consistency(
    sol: &CenterStableSolution,
    model: &Model,
    cfg: &TruncationConfig,
    t_max: f64,
    segment: f64,
) -> Result<TruncationReport> {
    let orbit = HomoclinicOrbit::new(model.params());
    let dt = sol.dt();
    let per_segment = (segment / dt).round().max(1.0) as usize;
    let last = (((t_max / dt).round() as usize).min(sol.states.len() - 1)).max(1);
    let (sup_hyperbolic, sup_center) = sol.sup_norms(sol.times[last], model);
    let scheme = SchemeConfig::new(SchemeOrder::Fourth, dt)?;
    let force = KleinGordonForce::new(model);
    let mut max_mismatch: f64 = 0.0;
    let mut segments = 0;
    let mut start = 0;
    while start < last {
        let end = (start + per_segment).min(last);
        let x0 = sol.full_state(start, &orbit);
        let run = integrate_with(
            &force,
            &x0,
            sol.times[start],
            sol.times[end],
            model,
            &scheme,
            &mut [],
        )?;
        for (k, x) in run.states.iter().enumerate() {
            let reference = sol.full_state(start + k, &orbit);
            max_mismatch = max_mismatch.max(model.spectrum().norm(&x.sub(&reference)));
        }
        segments += 1;
        start = end;
    }
    Ok(TruncationReport {
        sup_hyperbolic,
        sup_center,
        inside_tube: sup_hyperbolic <= cfg.delta && sup_center <= cfg.delta,
        max_mismatch,
        segments,
    })
}

/// Reversible orbit through the symmetric center-stable datum, on `[-T, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeteroclinicOrbit {
    pub times: Vec<f64>,
    /// Full states `X = h + Z`.
    pub states: Vec<State>,
    /// Largest momentum component of `X(0)`.
    pub momentum_residual: f64,
    /// Largest distance between the reflected orbit `S X(-t)` and direct
    /// backward integration.
    pub symmetry_residual: f64,
    /// `sup_t ‖X(t) - h(t)‖ / ‖f_c‖`.
    pub tracking_constant: f64,
    pub data_norm: f64,
    /// Center-manifold point approached as `t → +∞` and its reflection.
    pub target_time: f64,
    pub target: State,
    pub reflected_target: State,
    pub solution: CenterStableSolution,
}

impl HeteroclinicOrbit {
    pub fn mid_index(&self) -> usize {
        self.times.len() / 2
    }
}

/// Solves the center-stable problem with `V_s = 0` and symmetric data
/// `f_c` (no momentum), extends it by reflection, and checks the reflected
/// half against backward integration of the full equation on segments of
/// length `segment`.
pub fn reversible_heteroclinic(
    f_c: &State,
    model: &Model,
    cfg: &TruncationConfig,
    segment: f64,
) -> Result<HeteroclinicOrbit> {
    if f_c.b.iter().any(|b| *b != 0.0) {
        return Err(Error::InvalidParameter(
            "heteroclinic data must have zero momentum".into(),
        ));
    }
    let solver = CenterStableSolver::new(model, cfg)?;
    let sol = solver.fixed_point(f_c, 0.0)?;
    let orbit = HomoclinicOrbit::new(model.params());
    let n = sol.states.len();
    let forward: Vec<State> = (0..n).map(|i| sol.full_state(i, &orbit)).collect();
    let momentum_residual = forward[0].b.iter().fold(0.0f64, |m, b| m.max(b.abs()));
    if momentum_residual > cfg.fp_tol {
        return Err(Error::Reversibility {
            residual: momentum_residual,
            tolerance: cfg.fp_tol,
        });
    }

    let mut times = Vec::with_capacity(2 * n - 1);
    let mut states = Vec::with_capacity(2 * n - 1);
    for i in (1..n).rev() {
        times.push(-sol.times[i]);
        states.push(forward[i].apply_symmetry());
    }
    times.extend_from_slice(&sol.times);
    states.extend(forward.iter().cloned());

    // backward integration from reflected samples, segment by segment
    let dt = sol.dt();
    let per_segment = (segment / dt).round().max(1.0) as usize;
    let scheme = SchemeConfig::new(SchemeOrder::Fourth, dt)?;
    let force = KleinGordonForce::new(model);
    let mid = n - 1;
    let mut symmetry_residual: f64 = 0.0;
    let mut start = 0;
    while start < n - 1 {
        let end = (start + per_segment).min(n - 1);
        let run = integrate_with(
            &force,
            &states[mid - start],
            times[mid - start],
            times[mid - end],
            model,
            &scheme,
            &mut [],
        )?;
        for (k, x) in run.states.iter().enumerate() {
            let reference = &states[mid - start - k];
            symmetry_residual = symmetry_residual.max(model.spectrum().norm(&x.sub(reference)));
        }
        start = end;
    }

    let data_norm = model.spectrum().norm(f_c);
    let sup_dev = sol
        .states
        .iter()
        .map(|z| model.spectrum().norm(z))
        .fold(0.0, f64::max);
    let tracking_constant = if data_norm > 0.0 { sup_dev / data_norm } else { 0.0 };

    let target_index = (((2.0 * cfg.t_eps) / dt).round() as usize).min(n - 1);
    let x_c = forward[target_index].project_c();
    let psi = center_manifold_psi(&x_c, model, cfg)?;
    let target = x_c.with_hyperbolic(psi);
    let reflected_target = target.apply_symmetry();

    Ok(HeteroclinicOrbit {
        times,
        states,
        momentum_residual,
        symmetry_residual,
        tracking_constant,
        data_norm,
        target_time: sol.times[target_index],
        target,
        reflected_target,
        solution: sol,
    })
}
