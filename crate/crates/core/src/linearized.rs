//! Linearization of the flow around the homoclinic orbit.
//!
//! The potential `V(t) = (2p+1) α(t)^{2p}` does not depend on `x`, so the
//! linearized system decouples: the hyperbolic pair obeys
//! `ȧ = b, ḃ = (m² - V) a` and each elliptic mode obeys
//! `ȧ = b, ḃ = -(ω_n² + V) a`.

use crate::error::{Error, Result};
use crate::fit::exponential_rate;
use crate::homoclinic::HomoclinicOrbit;
use crate::spectral::{Model, ModelParams, State};

/// One classical RK4 step of `ȧ = b, ḃ = c(t) a`.
pub(crate) fn rk4_step(z: [f64; 2], t: f64, dt: f64, c: &impl Fn(f64) -> f64) -> [f64; 2] {
    let f = |t: f64, z: [f64; 2]| [z[1], c(t) * z[0]];
    let k1 = f(t, z);
    let k2 = f(t + 0.5 * dt, [z[0] + 0.5 * dt * k1[0], z[1] + 0.5 * dt * k1[1]]);
    let k3 = f(t + 0.5 * dt, [z[0] + 0.5 * dt * k2[0], z[1] + 0.5 * dt * k2[1]]);
    let k4 = f(t + dt, [z[0] + dt * k3[0], z[1] + dt * k3[1]]);
    [
        z[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        z[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

fn step_count(span: f64, dt: f64) -> usize {
    (span.abs() / dt).ceil().max(1.0) as usize
}

fn dot(u: [f64; 2], v: [f64; 2]) -> f64 {
    u[0] * v[0] + u[1] * v[1]
}

/// Values of the hyperbolic pair and its duals at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub sigma: [f64; 2],
    pub rho: [f64; 2],
    pub sigma_star: [f64; 2],
    pub rho_star: [f64; 2],
}

/// Exponential rates fitted to `|σ|, |ρ|, |σ*|, |ρ*|` and the constants `C`
/// with `|v(t)| ≤ C e^{±mt}` over the fitting window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthFit {
    pub t0: f64,
    pub t1: f64,
    pub sigma_rate: f64,
    pub rho_rate: f64,
    pub sigma_star_rate: f64,
    pub rho_star_rate: f64,
    pub sigma_const: f64,
    pub rho_const: f64,
    pub sigma_star_const: f64,
    pub rho_star_const: f64,
}

/// Fundamental pair of `ȧ = b, ḃ = (m² - V(t)) a` on `[0, T]`:
/// `σ` decays, `ρ` grows, `σ(0) = (0,1)`, `ρ(0) = (1,0)`.
#[derive(Debug, Clone)]
pub struct HyperbolicBasis {
    orbit: HomoclinicOrbit,
    dt: f64,
    sigma: Vec<[f64; 2]>,
    rho: Vec<[f64; 2]>,
    wronskian: f64,
    wronskian_drift: f64,
}

/// Wronskian drift tolerated by [`HyperbolicBasis::build`].
pub const WRONSKIAN_TOLERANCE: f64 = 1e-10;

impl HyperbolicBasis {
    /// `σ = μ(β, β̇)` in closed form with `μ = 1/β̇(0)`, `ρ` by RK4.
    pub fn build(params: &ModelParams, t_max: f64, dt: f64) -> Result<Self> {
        if !(t_max > 0.0 && dt > 0.0) {
            return Err(Error::InvalidParameter(
                "hyperbolic basis needs T_max > 0 and dt > 0".into(),
            ));
        }
        let orbit = HomoclinicOrbit::new(params);
        let steps = step_count(t_max, dt);
        let dt = t_max / steps as f64;
        let mu = 1.0 / orbit.beta_dot(0.0);
        let m2 = params.m * params.m;
        let coef = |t: f64| m2 - orbit.potential(t);

        let mut sigma = Vec::with_capacity(steps + 1);
        let mut rho = Vec::with_capacity(steps + 1);
        let mut z = [1.0, 0.0];
        for i in 0..=steps {
            let t = i as f64 * dt;
            sigma.push([mu * orbit.beta(t), mu * orbit.beta_dot(t)]);
            rho.push(z);
            if i < steps {
                z = rk4_step(z, t, dt, &coef);
            }
        }
        // exact initial values: β(0) = 0 in closed form
        sigma[0] = [0.0, 1.0];

        let det = |s: [f64; 2], r: [f64; 2]| s[0] * r[1] - s[1] * r[0];
        let wronskian = det(sigma[0], rho[0]);
        let wronskian_drift = sigma
            .iter()
            .zip(&rho)
            .map(|(s, r)| (det(*s, *r) - wronskian).abs())
            .fold(0.0, f64::max);
        if wronskian_drift > WRONSKIAN_TOLERANCE {
            return Err(Error::WronskianDrift {
                drift: wronskian_drift,
                tolerance: WRONSKIAN_TOLERANCE,
            });
        }
        Ok(HyperbolicBasis {
            orbit,
            dt,
            sigma,
            rho,
            wronskian,
            wronskian_drift,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t_max(&self) -> f64 {
        (self.sigma.len() - 1) as f64 * self.dt
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    /// `det[σ ρ]` at `t = 0`, equal to `-1`.
    pub fn wronskian(&self) -> f64 {
        self.wronskian
    }

    pub fn wronskian_drift(&self) -> f64 {
        self.wronskian_drift
    }

    /// `μ = 1/β̇(0) = -1/(p m² α(0))`.
    pub fn sigma_normalization(&self) -> f64 {
        1.0 / self.orbit.beta_dot(0.0)
    }

    fn duals(&self, sigma: [f64; 2], rho: [f64; 2]) -> ([f64; 2], [f64; 2]) {
        let w = self.wronskian;
        ([rho[1] / w, -rho[0] / w], [-sigma[1] / w, sigma[0] / w])
    }

    /// Frame at grid index `i`.
    pub fn at_index(&self, i: usize) -> Frame {
        let (sigma, rho) = (self.sigma[i], self.rho[i]);
        let (sigma_star, rho_star) = self.duals(sigma, rho);
        Frame {
            sigma,
            rho,
            sigma_star,
            rho_star,
        }
    }

    /// Frame at any `|t| ≤ T_max`, by cubic Hermite interpolation between
    /// grid points (derivatives from the ODE). Negative times use the
    /// parities `σ(-t) = -Sσ(t)`, `ρ(-t) = Sρ(t)`.
    ///
    /// # Panics
    /// If `|t|` exceeds the computed window.
    pub fn at(&self, t: f64) -> Frame {
        let tau = t.abs();
        let t_max = self.t_max();
        assert!(
            tau <= t_max * (1.0 + 1e-12),
            "time {t} outside the basis window [-{t_max}, {t_max}]"
        );
        let x = (tau / self.dt).min((self.len() - 1) as f64);
        let i = (x.floor() as usize).min(self.len() - 2);
        let s = x - i as f64;
        let coef0 = self.coefficient(i as f64 * self.dt);
        let coef1 = self.coefficient((i + 1) as f64 * self.dt);
        let hermite = |v: &[[f64; 2]]| -> [f64; 2] {
            let (p0, p1) = (v[i], v[i + 1]);
            let d0 = [p0[1], coef0 * p0[0]];
            let d1 = [p1[1], coef1 * p1[0]];
            let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
            let h10 = s * (1.0 - s) * (1.0 - s);
            let h01 = s * s * (3.0 - 2.0 * s);
            let h11 = s * s * (s - 1.0);
            let mut out = [0.0; 2];
            for k in 0..2 {
                out[k] = h00 * p0[k] + h10 * self.dt * d0[k] + h01 * p1[k] + h11 * self.dt * d1[k];
            }
            out
        };
        let mut sigma = hermite(&self.sigma);
        let mut rho = hermite(&self.rho);
        if t < 0.0 {
            sigma = [-sigma[0], sigma[1]];
            rho = [rho[0], -rho[1]];
        }
        let (sigma_star, rho_star) = self.duals(sigma, rho);
        Frame {
            sigma,
            rho,
            sigma_star,
            rho_star,
        }
    }

    fn coefficient(&self, t: f64) -> f64 {
        self.orbit.m() * self.orbit.m() - self.orbit.potential(t)
    }

    /// Largest deviation of the four pairings from the identity over the grid.
    pub fn duality_residual(&self) -> f64 {
        (0..self.len())
            .map(|i| {
                let f = self.at_index(i);
                (dot(f.sigma, f.sigma_star) - 1.0).abs()
                    + dot(f.sigma, f.rho_star).abs()
                    + (dot(f.rho, f.rho_star) - 1.0).abs()
                    + dot(f.rho, f.sigma_star).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Log-linear fits of the four norms over the grid points in `[t0, t1]`.
    pub fn growth_fit(&self, t0: f64, t1: f64) -> Result<GrowthFit> {
        let m = self.orbit.m();
        let idx: Vec<usize> = (0..self.len())
            .filter(|&i| {
                let t = self.time(i);
                t >= t0 && t <= t1
            })
            .collect();
        if idx.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "fitting window [{t0}, {t1}] holds fewer than two samples"
            )));
        }
        let ts: Vec<f64> = idx.iter().map(|&i| self.time(i)).collect();
        let frames: Vec<Frame> = idx.iter().map(|&i| self.at_index(i)).collect();
        let norm = |v: [f64; 2]| v[0].hypot(v[1]);
        let series = |pick: fn(&Frame) -> [f64; 2]| -> Vec<f64> {
            frames.iter().map(|f| norm(pick(f))).collect()
        };
        let s = series(|f| f.sigma);
        let r = series(|f| f.rho);
        let ss = series(|f| f.sigma_star);
        let rs = series(|f| f.rho_star);
        let rate = |v: &[f64]| {
            exponential_rate(&ts, v)
                .ok_or_else(|| Error::InvalidParameter("degenerate growth fit".into()))
        };
        let constant = |v: &[f64], sign: f64| {
            ts.iter()
                .zip(v)
                .map(|(t, y)| y * (-sign * m * t).exp())
                .fold(0.0, f64::max)
        };
        Ok(GrowthFit {
            t0,
            t1,
            sigma_rate: rate(&s)?,
            rho_rate: rate(&r)?,
            sigma_star_rate: rate(&ss)?,
            rho_star_rate: rate(&rs)?,
            sigma_const: constant(&s, -1.0),
            rho_const: constant(&r, 1.0),
            sigma_star_const: constant(&ss, 1.0),
            rho_star_const: constant(&rs, -1.0),
        })
    }

    /// Independent construction of the growing solution on `[t_start, T]` by
    /// reduction of order, `g(t) = β(t) ∫_{t_start}^t β^{-2}`, matched to `ρ`
    /// at `t_start`. Returns the largest relative deviation from `ρ`.
    ///
    /// `t_start` must be positive: `β(0) = 0` makes the quadrature singular.
    pub fn reduction_of_order_check(&self, t_start: f64) -> Result<f64> {
        if !(t_start > 0.0 && t_start < self.t_max()) {
            return Err(Error::InvalidParameter(
                "reduction of order needs 0 < t_start < T_max".into(),
            ));
        }
        let i0 = (t_start / self.dt).round() as usize;
        let o = &self.orbit;
        // solutions: β (decaying) and g with g(t0) = 0, ġ(t0) = 1/β(t0)
        let t0 = self.time(i0);
        let (b0, bd0) = (o.beta(t0), o.beta_dot(t0));
        let rho0 = self.rho[i0];
        // ρ = c1 β + c2 g on the matching point
        let c1 = rho0[0] / b0;
        let c2 = (rho0[1] - c1 * bd0) * b0;
        let mut integral = 0.0;
        let mut prev = 1.0 / (b0 * b0);
        let mut worst: f64 = 0.0;
        for i in i0 + 1..self.len() {
            let t = self.time(i);
            let b = o.beta(t);
            let cur = 1.0 / (b * b);
            // midpoint-corrected trapezoid: Simpson on [t-dt, t]
            let mid = o.beta(t - 0.5 * self.dt);
            integral += self.dt / 6.0 * (prev + 4.0 / (mid * mid) + cur);
            prev = cur;
            let g = [b * integral, o.beta_dot(t) * integral + 1.0 / b];
            let cand = [c1 * b + c2 * g[0], c1 * o.beta_dot(t) + c2 * g[1]];
            let r = self.rho[i];
            let rel = ((cand[0] - r[0]).hypot(cand[1] - r[1])) / r[0].hypot(r[1]);
            worst = worst.max(rel);
        }
        Ok(worst)
    }
}

pub fn hyperbolic_basis(params: &ModelParams, t_max: f64, dt: f64) -> Result<HyperbolicBasis> {
    HyperbolicBasis::build(params, t_max, dt)
}

/// Propagator of one elliptic mode `ȧ = b, ḃ = -(ω² + V(t)) a`.
#[derive(Debug, Clone, Copy)]
pub struct ModePropagator {
    omega: f64,
    lambda: f64,
    orbit: HomoclinicOrbit,
    potential: bool,
    dt: f64,
}

impl ModePropagator {
    /// Mode `n ≥ 1` of the model's spectrum.
    pub fn new(model: &Model, n: usize, dt: f64) -> Result<Self> {
        if n == 0 || n >= model.dim() {
            return Err(Error::InvalidParameter(format!(
                "elliptic mode index must lie in 1..{}, got {n}",
                model.dim()
            )));
        }
        let m = model.params().m;
        let lambda = model.spectrum().lambda(n);
        Self::with_lambda(model.params(), lambda, dt).map(|p| ModePropagator {
            omega: model.spectrum().omega(n, m),
            ..p
        })
    }

    /// Mode with eigenvalue `λ > m`.
    pub fn with_lambda(params: &ModelParams, lambda: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter("mode propagation needs dt > 0".into()));
        }
        if !(lambda > params.m) {
            return Err(Error::InvalidParameter(format!(
                "elliptic mode needs λ > m, got λ = {lambda}"
            )));
        }
        Ok(ModePropagator {
            omega: (lambda * lambda - params.m * params.m).sqrt(),
            lambda,
            orbit: HomoclinicOrbit::new(params),
            potential: true,
            dt,
        })
    }

    /// Switches the homoclinic potential off (free rotation) or on.
    pub fn with_potential(mut self, on: bool) -> Self {
        self.potential = on;
        self
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Energy norm `(ω² a² + b²)^{1/2}`, conserved by the free flow.
    pub fn norm(&self, z: [f64; 2]) -> f64 {
        (self.omega * z[0]).hypot(z[1])
    }

    /// Free flow `S(t)`.
    pub fn free(&self, z: [f64; 2], t: f64) -> [f64; 2] {
        let (s, c) = (self.omega * t).sin_cos();
        [z[0] * c + z[1] * s / self.omega, -z[0] * self.omega * s + z[1] * c]
    }

    fn coefficient(&self, t: f64) -> f64 {
        -(self.omega * self.omega + self.orbit.potential(t))
    }

    /// `K(t1, t0) z`.
    pub fn propagate(&self, z: [f64; 2], t0: f64, t1: f64) -> [f64; 2] {
        if t1 == t0 {
            return z;
        }
        if !self.potential {
            return self.free(z, t1 - t0);
        }
        let n = step_count(t1 - t0, self.dt);
        let h = (t1 - t0) / n as f64;
        let coef = |t: f64| self.coefficient(t);
        let mut z = z;
        for i in 0..n {
            z = rk4_step(z, t0 + i as f64 * h, h, &coef);
        }
        z
    }

    /// Samples of `K(t, t0) z` at `t0 + i·h`, `h ≈ dt`, up to `t1`.
    pub fn path(&self, z: [f64; 2], t0: f64, t1: f64) -> (Vec<f64>, Vec<[f64; 2]>) {
        let n = step_count(t1 - t0, self.dt);
        let h = (t1 - t0) / n as f64;
        let coef = |t: f64| self.coefficient(t);
        let mut times = Vec::with_capacity(n + 1);
        let mut zs = Vec::with_capacity(n + 1);
        let mut cur = z;
        times.push(t0);
        zs.push(cur);
        for i in 0..n {
            let t = t0 + i as f64 * h;
            cur = if self.potential {
                rk4_step(cur, t, h, &coef)
            } else {
                self.free(cur, h)
            };
            times.push(t + h);
            zs.push(cur);
        }
        (times, zs)
    }

    /// Columns `K(t1,t0)(1,0)` and `K(t1,t0)(0,1)`, as `[[k11, k21], [k12, k22]]`.
    pub fn fundamental(&self, t0: f64, t1: f64) -> [[f64; 2]; 2] {
        [
            self.propagate([1.0, 0.0], t0, t1),
            self.propagate([0.0, 1.0], t0, t1),
        ]
    }
}

/// `K(t1, t0) z0` for elliptic mode `n` with RK4 step `1e-3`.
pub fn mode_propagate(model: &Model, n: usize, z0: [f64; 2], t0: f64, t1: f64) -> Result<[f64; 2]> {
    Ok(ModePropagator::new(model, n, 1e-3)?.propagate(z0, t0, t1))
}

/// Limit tori of the linearized elliptic dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusInvariants {
    pub a_plus: Vec<f64>,
    pub b_plus: Vec<f64>,
    /// `c_n = (ω_n² a_n⁺² + b_n⁺²)^{1/2}`.
    pub c: Vec<f64>,
    pub omega: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterConfig {
    pub t_trunc: f64,
    pub dt: f64,
    pub tail_tolerance: f64,
    pub potential: bool,
}

impl ScatterConfig {
    pub fn new(t_trunc: f64, dt: f64) -> Self {
        ScatterConfig {
            t_trunc,
            dt,
            tail_tolerance: 1e-8,
            potential: true,
        }
    }
}

/// `‖z(t) - S(t) z⁺‖` per elliptic mode at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub t: f64,
    pub residual: Vec<f64>,
    /// `(ω² a(t)² + b(t)²)^{1/2}` per mode.
    pub c_at_t: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterReport {
    pub invariants: TorusInvariants,
    /// Closed-form bound on the neglected part of the Duhamel integral.
    pub tail_bound: f64,
    pub checkpoints: Vec<Checkpoint>,
}

/// Asymptotic states `z⁺ = z(0) - ∫_0^∞ S(-s)(0, V(s) a(s)) ds` of every
/// elliptic mode of `zc0`, integral cut at `t_trunc` (composite Simpson).
/// Residuals `‖z(t) - S(t)z⁺‖` are reported at each `checkpoint` time.
pub fn scatter_asymptotics(
    zc0: &State,
    model: &Model,
    cfg: &ScatterConfig,
    checkpoints: &[f64],
) -> Result<ScatterReport> {
    if zc0.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: zc0.dim(),
        });
    }
    if zc0.a[0] != 0.0 || zc0.b[0] != 0.0 {
        return Err(Error::InvalidParameter(
            "scattering data must have zero hyperbolic part".into(),
        ));
    }
    if !(cfg.t_trunc > 0.0 && cfg.dt > 0.0) {
        return Err(Error::InvalidParameter(
            "scattering needs T_trunc > 0 and dt > 0".into(),
        ));
    }
    let orbit = HomoclinicOrbit::new(model.params());
    let degree = model.params().degree() as f64;
    let t_end = checkpoints.iter().copied().fold(cfg.t_trunc, f64::max);
    // even number of Simpson panels up to t_trunc on a grid shared with the path
    let mut panels = step_count(cfg.t_trunc, cfg.dt);
    panels += panels % 2;
    let h = cfg.t_trunc / panels as f64;
    let total_steps = (t_end / h).ceil() as usize;

    let dim = model.dim();
    let mut a_plus = vec![0.0; dim - 1];
    let mut b_plus = vec![0.0; dim - 1];
    let mut omega = vec![0.0; dim - 1];
    let mut c = vec![0.0; dim - 1];
    let mut sup_a: f64 = 0.0;
    let mut cps: Vec<Checkpoint> = checkpoints
        .iter()
        .map(|&t| Checkpoint {
            t,
            residual: vec![0.0; dim - 1],
            c_at_t: vec![0.0; dim - 1],
        })
        .collect();

    for n in 1..dim {
        let prop = ModePropagator::new(model, n, h)?.with_potential(cfg.potential);
        let w = prop.omega();
        let z0 = [zc0.a[n], zc0.b[n]];
        let v = |t: f64| if cfg.potential { orbit.potential(t) } else { 0.0 };
        let integrand = |t: f64, a: f64| {
            let y = v(t) * a;
            let (s, co) = (w * t).sin_cos();
            [-y * s / w, y * co]
        };
        let mut acc = [0.0, 0.0];
        let mut z = z0;
        let mut path = Vec::with_capacity(total_steps + 1);
        path.push(z);
        for i in 0..=total_steps {
            let t = i as f64 * h;
            if i <= panels {
                let weight = if i == 0 || i == panels {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                let f = integrand(t, z[0]);
                acc[0] += weight * f[0];
                acc[1] += weight * f[1];
                sup_a = sup_a.max(z[0].abs());
            }
            if i < total_steps {
                z = prop.propagate(z, t, t + h);
                path.push(z);
            }
        }
        let zp = [z0[0] - h / 3.0 * acc[0], z0[1] - h / 3.0 * acc[1]];
        a_plus[n - 1] = zp[0];
        b_plus[n - 1] = zp[1];
        omega[n - 1] = w;
        c[n - 1] = prop.norm(zp);
        for cp in cps.iter_mut() {
            // exact grid point closest to the checkpoint, then free remainder
            let k = ((cp.t / h).round() as usize).min(total_steps);
            let zt = prop.propagate(path[k], k as f64 * h, cp.t);
            let target = prop.free(zp, cp.t);
            cp.residual[n - 1] = prop.norm([zt[0] - target[0], zt[1] - target[1]]);
            cp.c_at_t[n - 1] = prop.norm(zt);
        }
    }

    let tail_bound = if cfg.potential {
        degree * sup_a * orbit.alpha_pow_2p_tail(cfg.t_trunc)
    } else {
        0.0
    };
    if tail_bound > cfg.tail_tolerance {
        return Err(Error::TailTolerance {
            bound: tail_bound,
            tolerance: cfg.tail_tolerance,
            t_trunc: cfg.t_trunc,
        });
    }
    Ok(ScatterReport {
        invariants: TorusInvariants {
            a_plus,
            b_plus,
            c,
            omega,
        },
        tail_bound,
        checkpoints: cps,
    })
}

/// Partition-based bound on solutions of `ẍ + (ω² + q(t)) x = 0` on the half line.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    /// Number of interior cuts, each segment carrying exactly `1/2` of `∫|q|`.
    pub k: usize,
    /// `2^{k+1}`.
    pub bound: f64,
    pub cuts: Vec<f64>,
    pub q_total: f64,
}

/// Builds the partition `0 < T_1 < … < T_k` with `∫_{T_{j-1}}^{T_j} |q| = 1/2`
/// and tail `∫_{T_k}^∞ |q| ≤ 1/2`; the growth bound is `2^{k+1}`.
///
/// `q_integral(t)` must be the nondecreasing partial integral `∫_0^t |q|`
/// with limit `q_total`.
pub fn boundedness_certificate(
    q_integral: impl Fn(f64) -> f64,
    q_total: f64,
) -> Result<Certificate> {
    if !q_total.is_finite() || q_total < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "total potential integral must be finite and nonnegative, got {q_total}"
        )));
    }
    // cuts at j/2 strictly below the total (relative guard against rounding)
    let guard = 1e-12 * q_total.max(1.0);
    let mut cuts = Vec::new();
    let mut j = 1;
    while (j as f64) * 0.5 < q_total - guard {
        let target = j as f64 * 0.5;
        let mut hi = 1.0;
        while q_integral(hi) < target {
            hi *= 2.0;
            if hi > 1e12 {
                return Err(Error::InvalidParameter(
                    "partial integral never reaches the cut level".into(),
                ));
            }
        }
        let mut lo = cuts.last().copied().unwrap_or(0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if q_integral(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-14 * hi {
                break;
            }
        }
        cuts.push(0.5 * (lo + hi));
        j += 1;
    }
    let k = cuts.len();
    Ok(Certificate {
        k,
        bound: 2f64.powi(k as i32 + 1),
        cuts,
        q_total,
    })
}

/// Certificate for the homoclinic potential `q = (2p+1) α^{2p}` on `t ≥ 0`.
pub fn homoclinic_certificate(params: &ModelParams) -> Result<Certificate> {
    let orbit = HomoclinicOrbit::new(params);
    let degree = params.degree() as f64;
    let total = degree * (params.p as f64 + 1.0) * params.m / params.p as f64;
    boundedness_certificate(|t| degree * orbit.alpha_pow_2p_integral(t), total)
}
