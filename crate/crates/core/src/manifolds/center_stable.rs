use super::{cutoff_theta, truncated_n_momentum, DeviationForce, TruncationConfig};
use crate::error::{Error, Result};
use crate::evolve::{SchemeOrder, Splitting, Trajectory};
use crate::homoclinic::HomoclinicOrbit;
use crate::linearized::{rk4_step, Frame, HyperbolicBasis};
use crate::spectral::{Model, State};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Shooting,
    FixedPoint,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shooting" => Ok(Method::Shooting),
            "fixed_point" | "fixed-point" => Ok(Method::FixedPoint),
            other => Err(Error::InvalidParameter(format!("unknown solve method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveDiagnostics {
    /// Picard iterations or bisection steps.
    pub iterations: usize,
    /// Last sup-norm Picard update, or final bracket width for shooting.
    pub last_update: f64,
    /// `sup_{[0, T_horizon]} |Z_h|`.
    pub sup_hyperbolic: f64,
    /// `sup ‖Z_c‖` over `[0, min(1/ε, T_horizon)]`.
    pub sup_center: f64,
    pub center_window: f64,
    /// First tube exit of the accepted shooting orbit, if any.
    pub exit_time: Option<f64>,
}

/// Deviation `Z = X - h` of a center-stable solution on a uniform grid over
/// `[0, T_horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterStableSolution {
    pub method: Method,
    pub v_c: State,
    pub v_s: f64,
    /// `⟨Z_h(0), ρ*(0)⟩`.
    pub v_u: f64,
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub diagnostics: SolveDiagnostics,
}

impl CenterStableSolution {
    pub fn dt(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("empty solution")
    }

    /// Deviation samples with their observables.
    pub fn trajectory(&self, model: &Model) -> Trajectory {
        Trajectory::from_states(model, self.times.clone(), self.states.clone())
    }

    /// `X = h + Z` at grid index `i`.
    pub fn full_state(&self, i: usize, orbit: &HomoclinicOrbit) -> State {
        let mut x = self.states[i].clone();
        x.a[0] += orbit.alpha(self.times[i]);
        x.b[0] += orbit.beta(self.times[i]);
        x
    }

    /// `(|⟨Z_h(0), σ*(0)⟩ - V_s|, ‖Z_c(0) - V_c‖_∞)`.
    pub fn boundary_residual(&self, basis: &HyperbolicBasis) -> (f64, f64) {
        let f = basis.at_index(0);
        let z0 = &self.states[0];
        let stable = z0.a[0] * f.sigma_star[0] + z0.b[0] * f.sigma_star[1];
        let center = z0.project_c().sub(&self.v_c).max_abs();
        ((stable - self.v_s).abs(), center)
    }

    /// `sup ‖Z - Z'‖` over common grid times `t ≤ t_max`.
    pub fn sup_distance(&self, other: &CenterStableSolution, t_max: f64, model: &Model) -> f64 {
        assert!(
            (self.dt() - other.dt()).abs() <= 1e-12 * self.dt(),
            "solutions live on different grids"
        );
        self.times
            .iter()
            .zip(self.states.iter().zip(&other.states))
            .take_while(|(t, _)| **t <= t_max * (1.0 + 1e-12))
            .map(|(_, (a, b))| model.spectrum().norm(&a.sub(b)))
            .fold(0.0, f64::max)
    }

    /// `sup_{t ≤ t_max} |Z_h|` and `sup_{t ≤ t_max} ‖Z_c‖`.
    pub fn sup_norms(&self, t_max: f64, model: &Model) -> (f64, f64) {
        sup_norms(&self.times, &self.states, t_max, model)
    }
}

fn sup_norms(times: &[f64], states: &[State], t_max: f64, model: &Model) -> (f64, f64) {
    times
        .iter()
        .zip(states)
        .take_while(|(t, _)| **t <= t_max * (1.0 + 1e-12))
        .fold((0.0f64, 0.0f64), |(h, c), (_, z)| {
            (
                h.max(z.project_h().norm()),
                c.max(model.spectrum().center_norm(z)),
            )
        })
}

/// Fundamental matrices per distinct eigenvalue.
struct Fundamentals {
    paths: Vec<Vec<[f64; 4]>>,
    per_mode: Vec<usize>,
}

impl Fundamentals {
    fn mode(&self, n: usize) -> &[[f64; 4]] {
        &self.paths[self.per_mode[n]]
    }
}

/// Solver for the center-stable problem with shared precomputations.
#[derive(Debug, Clone)]
pub struct CenterStableSolver<'a> {
    model: &'a Model,
    cfg: TruncationConfig,
    basis: HyperbolicBasis,
    orbit: HomoclinicOrbit,
}

/// Tube exit side for one trial value of the unstable coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    /// Sign of `⟨Z_h, ρ*⟩` at exit (or at the horizon).
    pub side: f64,
    pub exit_time: Option<f64>,
}

impl<'a> CenterStableSolver<'a> {
    pub fn new(model: &'a Model, cfg: &TruncationConfig) -> Result<Self> {
        cfg.validate(model.params().m)?;
        let basis = HyperbolicBasis::build(model.params(), cfg.t_horizon, cfg.dt)?;
        Ok(CenterStableSolver {
            model,
            cfg: *cfg,
            basis,
            orbit: HomoclinicOrbit::new(model.params()),
        })
    }

    pub fn basis(&self) -> &HyperbolicBasis {
        &self.basis
    }

    pub fn config(&self) -> &TruncationConfig {
        &self.cfg
    }

    fn check_data(&self, v_c: &State, v_s: f64) -> Result<()> {
        if v_c.dim() != self.model.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.model.dim(),
                found: v_c.dim(),
            });
        }
        if v_c.a[0] != 0.0 || v_c.b[0] != 0.0 {
            return Err(Error::InvalidParameter(
                "center data must have zero hyperbolic part".into(),
            ));
        }
        let radius = self.cfg.data_radius() * (1.0 + 1e-12);
        let norm = self.model.spectrum().norm(v_c);
        if norm > radius || v_s.abs() > radius {
            return Err(Error::InvalidParameter(format!(
                "data outside the admissible ball: ‖V_c‖ = {norm:e}, |V_s| = {:e}, ε² = {:e}",
                v_s.abs(),
                self.cfg.data_radius()
            )));
        }
        Ok(())
    }

    fn initial(&self, v_c: &State, v_s: f64, v_u: f64) -> State {
        let f = self.basis.at_index(0);
        let mut z = v_c.clone();
        z.a[0] = v_s * f.sigma[0] + v_u * f.rho[0];
        z.b[0] = v_s * f.sigma[1] + v_u * f.rho[1];
        z
    }

    fn steps(&self) -> usize {
        self.basis.len() - 1
    }

    /// Integrates the truncated deviation equation from the trial datum and
    /// reports the sign of the unstable coordinate at the first tube exit.
    pub fn classify(&self, v_c: &State, v_s: f64, v_u: f64) -> Classification {
        let splitting = Splitting::new(self.model, SchemeOrder::Fourth);
        let force = DeviationForce::new(self.model, &self.cfg);
        let dt = self.basis.dt();
        let mut z = self.initial(v_c, v_s, v_u);
        let side = |z: &State, f: &Frame| {
            if z.a[0] * f.rho_star[0] + z.b[0] * f.rho_star[1] >= 0.0 {
                1.0
            } else {
                -1.0
            }
        };
        for i in 0..=self.steps() {
            if z.project_h().norm() > self.cfg.delta {
                return Classification {
                    side: side(&z, &self.basis.at_index(i)),
                    exit_time: Some(self.basis.time(i)),
                };
            }
            if i < self.steps() {
                z = splitting.step(&force, self.basis.time(i), &z, dt);
            }
        }
        Classification {
            side: side(&z, &self.basis.at_index(self.steps())),
            exit_time: None,
        }
    }

    /// Deviation path for a given unstable coefficient.
    pub fn path(&self, v_c: &State, v_s: f64, v_u: f64) -> Vec<State> {
        let splitting = Splitting::new(self.model, SchemeOrder::Fourth);
        let force = DeviationForce::new(self.model, &self.cfg);
        let dt = self.basis.dt();
        let mut states = Vec::with_capacity(self.basis.len());
        let mut z = self.initial(v_c, v_s, v_u);
        for i in 0..=self.steps() {
            if i < self.steps() {
                let next = splitting.step(&force, self.basis.time(i), &z, dt);
                states.push(std::mem::replace(&mut z, next));
            } else {
                states.push(z.clone());
            }
        }
        states
    }

    /// Bisection on `V_u ∈ [-ε, ε]` until the bracket is narrower than
    /// `shoot_tol` or cannot be split in floating point.
    pub fn shooting(&self, v_c: &State, v_s: f64) -> Result<CenterStableSolution> {
        self.check_data(v_c, v_s)?;
        let eps = self.cfg.epsilon;
        let (mut lo, mut hi) = (-eps, eps);
        let side_lo = self.classify(v_c, v_s, lo).side;
        let side_hi = self.classify(v_c, v_s, hi).side;
        if side_lo == side_hi {
            return Err(Error::Bracket(format!(
                "both ends of [-{eps}, {eps}] leave the tube on the same side"
            )));
        }
        let mut iterations = 0;
        while hi - lo > self.cfg.shoot_tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            iterations += 1;
            if self.classify(v_c, v_s, mid).side == side_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let v_u = 0.5 * (lo + hi);
        let states = self.path(v_c, v_s, v_u);
        let times: Vec<f64> = (0..states.len()).map(|i| self.basis.time(i)).collect();
        let exit_time = times
            .iter()
            .zip(&states)
            .find(|(_, z)| z.project_h().norm() > self.cfg.delta)
            .map(|(t, _)| *t);
        let diagnostics = self.diagnostics(&times, &states, iterations, hi - lo, exit_time);
        Ok(CenterStableSolution {
            method: Method::Shooting,
            v_c: v_c.clone(),
            v_s,
            v_u,
            times,
            states,
            diagnostics,
        })
    }

    fn diagnostics(
        &self,
        times: &[f64],
        states: &[State],
        iterations: usize,
        last_update: f64,
        exit_time: Option<f64>,
    ) -> SolveDiagnostics {
        let (sup_hyperbolic, _) = sup_norms(times, states, f64::INFINITY, self.model);
        let center_window = (1.0 / self.cfg.epsilon).min(self.cfg.t_horizon);
        let (_, sup_center) = sup_norms(times, states, center_window, self.model);
        SolveDiagnostics {
            iterations,
            last_update,
            sup_hyperbolic,
            sup_center,
            center_window,
            exit_time,
        }
    }

    /// Picard iteration of the Duhamel map on the grid, trapezoid quadrature.
    pub fn fixed_point(&self, v_c: &State, v_s: f64) -> Result<CenterStableSolution> {
        self.check_data(v_c, v_s)?;
        let model = self.model;
        let dim = model.dim();
        let steps = self.steps();
        let dt = self.basis.dt();
        let times: Vec<f64> = (0..=steps).map(|i| self.basis.time(i)).collect();
        let frames: Vec<Frame> = (0..=steps).map(|i| self.basis.at_index(i)).collect();
        let alphas: Vec<f64> = times.iter().map(|t| self.orbit.alpha(*t)).collect();
        let fundamentals = self.fundamentals(steps, dt);

        // linear part: V_s σ(t) + K(t,0) V_c
        let mut states: Vec<State> = (0..=steps)
            .map(|i| {
                let mut z = State::zeros(dim);
                z.a[0] = v_s * frames[i].sigma[0];
                z.b[0] = v_s * frames[i].sigma[1];
                for n in 1..dim {
                    let phi = &fundamentals.mode(n)[i];
                    z.a[n] = phi[0] * v_c.a[n] + phi[1] * v_c.b[n];
                    z.b[n] = phi[2] * v_c.a[n] + phi[3] * v_c.b[n];
                }
                z
            })
            .collect();

        let mut iterations = 0;
        let mut last_update = f64::INFINITY;
        let mut converged = false;
        let mut polish = 0;
        loop {
            iterations += 1;
            let forcing: Vec<Vec<f64>> = states
                .iter()
                .zip(&alphas)
                .map(|(z, alpha)| {
                    let theta = cutoff_theta(model.spectrum().center_norm(z), self.cfg.delta);
                    truncated_n_momentum(z, *alpha, theta, model)
                })
                .collect();
            let mut next: Vec<State> = vec![State::zeros(dim); steps + 1];

            // hyperbolic part
            let stable_rate: Vec<f64> = (0..=steps)
                .map(|i| forcing[i][0] * frames[i].sigma_star[1])
                .collect();
            let unstable_rate: Vec<f64> = (0..=steps)
                .map(|i| forcing[i][0] * frames[i].rho_star[1])
                .collect();
            let mut forward = 0.0;
            let mut backward = vec![0.0; steps + 1];
            for i in (0..steps).rev() {
                backward[i] = backward[i + 1] + 0.5 * dt * (unstable_rate[i] + unstable_rate[i + 1]);
            }
            for i in 0..=steps {
                if i > 0 {
                    forward += 0.5 * dt * (stable_rate[i - 1] + stable_rate[i]);
                }
                let f = &frames[i];
                let cs = v_s + forward;
                next[i].a[0] = cs * f.sigma[0] - backward[i] * f.rho[0];
                next[i].b[0] = cs * f.sigma[1] - backward[i] * f.rho[1];
            }

            // center part, mode by mode: Φ(t)[V_c + ∫_0^t Φ(τ)^{-1}(0, g)]
            for n in 1..dim {
                let phi = fundamentals.mode(n);
                let integrand = |i: usize| {
                    let g = forcing[i][n];
                    [-phi[i][1] * g, phi[i][0] * g]
                };
                let mut acc = [v_c.a[n], v_c.b[n]];
                let mut prev = integrand(0);
                for i in 0..=steps {
                    if i > 0 {
                        let cur = integrand(i);
                        acc[0] += 0.5 * dt * (prev[0] + cur[0]);
                        acc[1] += 0.5 * dt * (prev[1] + cur[1]);
                        prev = cur;
                    }
                    let p = &phi[i];
                    next[i].a[n] = p[0] * acc[0] + p[1] * acc[1];
                    next[i].b[n] = p[2] * acc[0] + p[3] * acc[1];
                }
            }

            let update = next
                .iter()
                .zip(&states)
                .map(|(a, b)| model.spectrum().norm(&a.sub(b)))
                .fold(0.0, f64::max);
            let scale = next
                .iter()
                .map(|z| model.spectrum().norm(z))
                .fold(0.0, f64::max);
            states = next;
            if !update.is_finite() {
                return Err(Error::Divergence(format!(
                    "non-finite update at iteration {iterations}"
                )));
            }
            let (sup_h, _) = sup_norms(&times, &states, f64::INFINITY, model);
            if sup_h > self.cfg.delta {
                return Err(Error::Divergence(format!(
                    "iterate left the tube: sup |Z_h| = {sup_h:e} > δ = {:e}",
                    self.cfg.delta
                )));
            }
            if converged {
                // extra sweeps down to the rounding floor; keep the last one
                polish += 1;
                if update <= 1e-15 * scale || update >= last_update || polish >= 10 {
                    last_update = update.min(last_update);
                    break;
                }
            } else if update < self.cfg.fp_tol {
                converged = true;
            }
            last_update = update;
            if iterations >= self.cfg.max_iter && !converged {
                return Err(Error::Divergence(format!(
                    "no convergence after {iterations} iterations, last update {update:e}"
                )));
            }
        }

        let f0 = frames[0];
        let v_u = states[0].a[0] * f0.rho_star[0] + states[0].b[0] * f0.rho_star[1];
        let diagnostics = self.diagnostics(&times, &states, iterations, last_update, None);
        Ok(CenterStableSolution {
            method: Method::FixedPoint,
            v_c: v_c.clone(),
            v_s,
            v_u,
            times,
            states,
            diagnostics,
        })
    }

    /// `K(t_i, 0)` as `[k11, k12, k21, k22]` for every elliptic mode, by RK4 on
    /// the grid; one computation per distinct eigenvalue.
    fn fundamentals(&self, steps: usize, dt: f64) -> Fundamentals {
        let m = self.model.params().m;
        let spectrum = self.model.spectrum();
        let mut table: Vec<(f64, usize)> = Vec::new();
        let mut paths: Vec<Vec<[f64; 4]>> = Vec::new();
        let mut per_mode: Vec<usize> = vec![usize::MAX; spectrum.len()];
        for n in 1..spectrum.len() {
            let lambda = spectrum.lambda(n);
            if let Some((_, k)) = table.iter().find(|(l, _)| *l == lambda) {
                per_mode[n] = *k;
                continue;
            }
            let w2 = lambda * lambda - m * m;
            let orbit = self.orbit;
            let coef = move |t: f64| -(w2 + orbit.potential(t));
            let mut c0 = [1.0, 0.0];
            let mut c1 = [0.0, 1.0];
            let mut path = Vec::with_capacity(steps + 1);
            for i in 0..=steps {
                path.push([c0[0], c1[0], c0[1], c1[1]]);
                if i < steps {
                    let t = i as f64 * dt;
                    c0 = rk4_step(c0, t, dt, &coef);
                    c1 = rk4_step(c1, t, dt, &coef);
                }
            }
            table.push((lambda, paths.len()));
            per_mode[n] = paths.len();
            paths.push(path);
        }
        Fundamentals { paths, per_mode }
    }

    pub fn solve(&self, v_c: &State, v_s: f64, method: Method) -> Result<CenterStableSolution> {
        match method {
            Method::Shooting => self.shooting(v_c, v_s),
            Method::FixedPoint => self.fixed_point(v_c, v_s),
        }
    }
}

/// One-shot center-stable solve.
pub fn solve_center_stable(
    v_c: &State,
    v_s: f64,
    model: &Model,
    cfg: &TruncationConfig,
    method: Method,
) -> Result<CenterStableSolution> {
    CenterStableSolver::new(model, cfg)?.solve(v_c, v_s, method)
}

/// Exit-side classification at `count` evenly spaced values of `V_u` in `[lo, hi]`.
pub fn classification_scan(
    solver: &CenterStableSolver<'_>,
    v_c: &State,
    v_s: f64,
    lo: f64,
    hi: f64,
    count: usize,
) -> Vec<(f64, f64)> {
    (0..count)
        .map(|k| {
            let v = lo + (hi - lo) * k as f64 / (count.max(2) - 1) as f64;
            (v, solver.classify(v_c, v_s, v).side)
        })
        .collect()
}

/// The side changes at most once along the (sorted) scan.
pub fn is_monotone(scan: &[(f64, f64)]) -> bool {
    scan.windows(2).filter(|w| w[0].1 != w[1].1).count() <= 1
}
