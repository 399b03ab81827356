//! Invariant manifolds near the homoclinic loop.
//!
//! Deviations `Z = X - h(t)` from the homoclinic orbit solve
//! `Ż = ΛZ + dF[h]Z + 𝒩(Z)`; the nonlinear remainder is evaluated at the
//! rescaled argument `θ(‖Z_c‖) Z` so that it stays globally Lipschitz with a
//! small constant. The center-stable solutions are computed by shooting and
//! by a Duhamel fixed point, the center manifold graph `Ψ` by a fixed point
//! on a symmetric window around `t = 0`.

mod center;
mod center_stable;
mod diagnostics;

pub use center::{
    center_manifold_orbit, center_manifold_psi, lyapunov_within_wc, CenterOrbit,
    LyapunovReport,
};
pub use center_stable::{
    classification_scan, is_monotone, solve_center_stable, CenterStableSolution, Method,
    CenterStableSolver, SolveDiagnostics,
};
pub use diagnostics::{
    convergence_to_wc, reversible_heteroclinic, truncation_consistency, ConvergenceReport,
    HeteroclinicOrbit, TruncationReport,
};

use crate::error::{Error, Result};
use crate::evolve::Force;
use crate::homoclinic::HomoclinicOrbit;
use crate::spectral::{Model, State};

/// Amplitude scales and numerical controls of the truncated problems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationConfig {
    pub epsilon: f64,
    /// Cutoff radius `ε^{3/2}`.
    pub delta: f64,
    /// Target decay rate, `0 < r < m`.
    pub r: f64,
    /// `(4/m) ln(1/ε)`.
    pub t_eps: f64,
    pub t_horizon: f64,
    /// Half-width of the symmetric window used to evaluate `Ψ`.
    pub center_window: f64,
    pub fp_tol: f64,
    pub shoot_tol: f64,
    /// Grid step of the center-stable solvers.
    pub dt: f64,
    /// Grid step of the center-manifold solver.
    pub center_dt: f64,
    pub max_iter: usize,
}

impl TruncationConfig {
    /// Defaults for mass `m`: `r = m/2`, `T_horizon = max(2t_ε, 40/m)`.
    pub fn new(epsilon: f64, m: f64) -> Result<Self> {
        let t_eps = 4.0 / m * (1.0 / epsilon).ln();
        let cfg = TruncationConfig {
            epsilon,
            delta: epsilon.powf(1.5),
            r: 0.5 * m,
            t_eps,
            t_horizon: (2.0 * t_eps).max(40.0 / m),
            center_window: 40.0 / m,
            fp_tol: 1e-9,
            shoot_tol: 1e-22,
            dt: 1e-3,
            center_dt: 1e-2,
            max_iter: 200,
        };
        cfg.validate(m)?;
        Ok(cfg)
    }

    /// Same as [`TruncationConfig::new`] with `ε` given through `ε²`.
    pub fn from_epsilon_sq(epsilon_sq: f64, m: f64) -> Result<Self> {
        if !(epsilon_sq > 0.0) {
            return Err(Error::InvalidParameter("ε² must be positive".into()));
        }
        Self::new(epsilon_sq.sqrt(), m)
    }

    pub fn with_horizon(mut self, t_horizon: f64) -> Self {
        self.t_horizon = t_horizon;
        self
    }

    pub fn validate(&self, m: f64) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad(format!("ε must lie in (0, 1), got {}", self.epsilon));
        }
        if (self.delta - self.epsilon.powf(1.5)).abs() > 1e-12 * self.delta {
            return bad("δ must equal ε^{3/2}".into());
        }
        if !(self.r > 0.0 && self.r < m) {
            return bad(format!("decay rate r must lie in (0, m), got {}", self.r));
        }
        let t_eps = 4.0 / m * (1.0 / self.epsilon).ln();
        if (self.t_eps - t_eps).abs() > 1e-12 * t_eps {
            return bad("t_ε must equal (4/m) ln(1/ε)".into());
        }
        for (name, v) in [
            ("T_horizon", self.t_horizon),
            ("center window", self.center_window),
            ("fp_tol", self.fp_tol),
            ("shoot_tol", self.shoot_tol),
            ("dt", self.dt),
            ("center dt", self.center_dt),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if self.max_iter == 0 {
            return bad("max_iter must be at least 1".into());
        }
        Ok(())
    }

    /// Radius of the admissible data ball, `ε²`.
    pub fn data_radius(&self) -> f64 {
        self.epsilon * self.epsilon
    }
}

/// Smooth cutoff: `1` on `[0, δ]`, `0` on `[2δ, ∞)`, cubic smoothstep between.
pub fn cutoff_theta(s: f64, delta: f64) -> f64 {
    let x = ((s - delta) / delta).clamp(0.0, 1.0);
    1.0 - x * x * (3.0 - 2.0 * x)
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Pointwise `Σ_{j≥2} C(2p+1, j) α^{2p+1-j} z^j`, the part of
/// `(α + z)^{2p+1}` beyond first order in `z`.
fn remainder_polynomial(p: u32, alpha: f64) -> impl Fn(f64) -> f64 {
    let degree = 2 * p + 1;
    let coef: Vec<f64> = (2..=degree)
        .map(|j| binomial(degree, j) * alpha.powi((degree - j) as i32))
        .collect();
    move |z: f64| {
        // Horner in z, then times z²
        let mut acc = 0.0;
        for c in coef.iter().rev() {
            acc = acc * z + c;
        }
        acc * z * z
    }
}

/// `𝒩(θ(‖Z_c‖) Z)` for the deviation `Z` at a point of the homoclinic orbit
/// with position `h_t.a[0]`. Only momentum components are nonzero.
pub fn truncated_n(z: &State, h_t: &State, model: &Model, cfg: &TruncationConfig) -> State {
    let theta = cutoff_theta(model.spectrum().center_norm(z), cfg.delta);
    let b = truncated_n_momentum(z, h_t.a[0], theta, model);
    State {
        a: vec![0.0; model.dim()],
        b,
    }
}

fn truncated_n_momentum(z: &State, alpha: f64, theta: f64, model: &Model) -> Vec<f64> {
    if theta == 0.0 {
        return vec![0.0; model.dim()];
    }
    let scaled: Vec<f64> = z.a.iter().map(|v| theta * v).collect();
    let f = remainder_polynomial(model.params().p, alpha);
    model.project_pointwise(&scaled, |u| -f(u))
}

/// `F(θ(‖X_c‖) X)` around the origin.
pub fn truncated_f(x: &State, model: &Model, cfg: &TruncationConfig) -> State {
    let theta = cutoff_theta(model.spectrum().center_norm(x), cfg.delta);
    State {
        a: vec![0.0; model.dim()],
        b: truncated_f_momentum(x, theta, model),
    }
}

fn truncated_f_momentum(x: &State, theta: f64, model: &Model) -> Vec<f64> {
    if theta == 0.0 {
        return vec![0.0; model.dim()];
    }
    let power = model.params().degree() as i32;
    model.project_pointwise(&x.a, |u| -(theta * u).powi(power))
}

/// Kick of the deviation equation: `-(2p+1)α^{2p}(t) a + 𝒩`, with or without cutoff.
#[derive(Debug, Clone, Copy)]
pub struct DeviationForce<'a> {
    model: &'a Model,
    orbit: HomoclinicOrbit,
    delta: f64,
    truncate: bool,
}

impl<'a> DeviationForce<'a> {
    pub fn new(model: &'a Model, cfg: &TruncationConfig) -> Self {
        DeviationForce {
            model,
            orbit: HomoclinicOrbit::new(model.params()),
            delta: cfg.delta,
            truncate: true,
        }
    }

    pub fn untruncated(mut self) -> Self {
        self.truncate = false;
        self
    }
}

impl Force for DeviationForce<'_> {
    fn force(&self, t: f64, z: &State) -> Vec<f64> {
        let theta = if self.truncate {
            cutoff_theta(self.model.spectrum().center_norm(z), self.delta)
        } else {
            1.0
        };
        let mut out = truncated_n_momentum(z, self.orbit.alpha(t), theta, self.model);
        let v = self.orbit.potential(t);
        for (o, a) in out.iter_mut().zip(&z.a) {
            *o -= v * a;
        }
        out
    }
}

/// Kick of the truncated system around the origin, `F(θ(‖X_c‖) X)`.
#[derive(Debug, Clone, Copy)]
pub struct TruncatedForce<'a> {
    model: &'a Model,
    delta: f64,
}

impl<'a> TruncatedForce<'a> {
    pub fn new(model: &'a Model, cfg: &TruncationConfig) -> Self {
        TruncatedForce {
            model,
            delta: cfg.delta,
        }
    }
}

impl Force for TruncatedForce<'_> {
    fn force(&self, _t: f64, x: &State) -> Vec<f64> {
        let theta = cutoff_theta(self.model.spectrum().center_norm(x), self.delta);
        truncated_f_momentum(x, theta, self.model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::ModelParams;

    #[test]
    fn cutoff_plateaus_and_midpoint() {
        let d = 1e-3;
        assert_eq!(cutoff_theta(0.5 * d, d), 1.0);
        assert_eq!(cutoff_theta(d, d), 1.0);
        assert_eq!(cutoff_theta(3.0 * d, d), 0.0);
        assert_eq!(cutoff_theta(2.0 * d, d), 0.0);
        assert!((cutoff_theta(1.5 * d, d) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 0..=200 {
            let v = cutoff_theta(i as f64 * 0.015 * d, d);
            assert!(v <= prev && (0.0..=1.0).contains(&v));
            prev = v;
        }
    }

    #[test]
    fn defaults() {
        let cfg = TruncationConfig::from_epsilon_sq(1e-4, 0.5).unwrap();
        assert!((cfg.delta - 1e-3).abs() < 1e-18);
        assert_eq!(cfg.r, 0.25);
        assert!((cfg.t_eps - 8.0 * 100f64.ln()).abs() < 1e-12);
        assert_eq!(cfg.t_horizon, 80.0);
        assert!(TruncationConfig::new(1.5, 0.5).is_err());
        let mut bad = cfg;
        bad.delta = 2e-3;
        assert!(bad.validate(0.5).is_err());
    }

    #[test]
    fn binomial_remainder_matches_direct_expansion() {
        for p in 1..4u32 {
            let alpha = 0.37;
            let f = remainder_polynomial(p, alpha);
            let d = 2 * p as i32 + 1;
            for z in [1e-3, -0.2, 0.8] {
                let direct: f64 = (alpha + z).powi(d)
                    - alpha.powi(d)
                    - d as f64 * alpha.powi(d - 1) * z;
                assert!((f(z) - direct).abs() < 1e-14, "p={p} z={z}");
            }
        }
    }

    #[test]
    fn zero_deviation_has_zero_remainder() {
        let model = Model::new(ModelParams::new(0.5, 1, 4).unwrap()).unwrap();
        let cfg = TruncationConfig::from_epsilon_sq(1e-4, 0.5).unwrap();
        let h = HomoclinicOrbit::new(model.params()).state(0.3, model.spectrum());
        let n = truncated_n(&model.zero_state(), &h, &model, &cfg);
        assert!(n.max_abs() == 0.0);
    }

    #[test]
    fn cutoff_switches_remainder_off() {
        let model = Model::new(ModelParams::new(0.5, 1, 4).unwrap()).unwrap();
        let cfg = TruncationConfig::from_epsilon_sq(1e-4, 0.5).unwrap();
        let h = HomoclinicOrbit::new(model.params()).state(0.0, model.spectrum());
        let mut z = model.zero_state();
        z.a[1] = 1.0;
        assert_eq!(truncated_n(&z, &h, &model, &cfg).max_abs(), 0.0);
        assert_eq!(truncated_f(&z, &model, &cfg).max_abs(), 0.0);
    }
}
