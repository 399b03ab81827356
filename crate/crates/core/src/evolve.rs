//! Time integration of the spectral system `Ẋ = ΛX + F(X)`.
//!
//! The linear part (including the unstable `m²` term of mode 0) is solved
//! exactly mode by mode; only the nonlinear force enters the kick. The second
//! order step is the Strang composition `L(dt/2) ∘ K(dt) ∘ L(dt/2)` and the
//! fourth order step is its triple-jump composition. Both are time-symmetric
//! and conjugate to their inverses by the reversibility symmetry `S`.

use std::cell::RefCell;
use std::io::{self, Read, Write};

use crate::error::{Error, Result};
use crate::spectral::{Model, ModelParams, State};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeOrder {
    Second,
    Fourth,
}

impl SchemeOrder {
    pub fn from_order(order: u32) -> Result<Self> {
        match order {
            2 => Ok(SchemeOrder::Second),
            4 => Ok(SchemeOrder::Fourth),
            other => Err(Error::InvalidParameter(format!(
                "scheme order must be 2 or 4, got {other}"
            ))),
        }
    }

    pub fn order(self) -> u32 {
        match self {
            SchemeOrder::Second => 2,
            SchemeOrder::Fourth => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub order: SchemeOrder,
    pub dt: f64,
    /// Bound on the relative energy drift; `f64::INFINITY` disables the check.
    pub drift_tolerance: f64,
    /// Record every `sample_every`-th step (the final step is always recorded).
    pub sample_every: usize,
}

impl SchemeConfig {
    pub fn new(order: SchemeOrder, dt: f64) -> Result<Self> {
        let cfg = SchemeConfig {
            order,
            dt,
            drift_tolerance: f64::INFINITY,
            sample_every: 1,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_drift_tolerance(mut self, tol: f64) -> Self {
        self.drift_tolerance = tol;
        self
    }

    pub fn with_sample_every(mut self, every: usize) -> Self {
        self.sample_every = every.max(1);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "time step must be positive, got {}",
                self.dt
            )));
        }
        if self.drift_tolerance.is_nan() || self.drift_tolerance <= 0.0 {
            return Err(Error::InvalidParameter(
                "drift tolerance must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Momentum forcing applied by the kick, as a function of time and state.
pub trait Force {
    fn force(&self, t: f64, x: &State) -> Vec<f64>;
}

/// Linear dynamics only.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoForce;

impl Force for NoForce {
    fn force(&self, _t: f64, x: &State) -> Vec<f64> {
        vec![0.0; x.dim()]
    }
}

/// `-u^{2p+1}` projected on the retained modes.
#[derive(Debug, Clone, Copy)]
pub struct KleinGordonForce<'a> {
    model: &'a Model,
}

impl<'a> KleinGordonForce<'a> {
    pub fn new(model: &'a Model) -> Self {
        KleinGordonForce { model }
    }
}

impl Force for KleinGordonForce<'_> {
    fn force(&self, _t: f64, x: &State) -> Vec<f64> {
        self.model.nonlinear_term(x).b
    }
}

/// `-a_0^{2p+1}` for the one-mode planar system.
#[derive(Debug, Clone, Copy)]
pub struct PlanarForce {
    power: i32,
}

impl PlanarForce {
    pub fn new(params: &ModelParams) -> Self {
        PlanarForce {
            power: params.degree() as i32,
        }
    }
}

impl Force for PlanarForce {
    fn force(&self, _t: f64, x: &State) -> Vec<f64> {
        vec![-x.a[0].powi(self.power)]
    }
}

/// Exact linear flow plus kick composition.
#[derive(Debug, Clone)]
pub struct Splitting {
    m: f64,
    /// `λ_n²` for every retained mode; entry 0 is the hyperbolic mode.
    lambda_sq: Vec<f64>,
    order: SchemeOrder,
    cache: RefCell<Vec<FlowCoefficients>>,
}

/// Linear flow over a fixed time, tabulated.
#[derive(Debug, Clone)]
struct FlowCoefficients {
    t: f64,
    grow: f64,
    decay: f64,
    /// Per elliptic mode: `[cos ωt, sin ωt / ω, -ω sin ωt]`.
    rotation: Vec<[f64; 3]>,
}

const FLOW_CACHE: usize = 8;

impl Splitting {
    pub fn new(model: &Model, order: SchemeOrder) -> Self {
        Splitting {
            m: model.params().m,
            lambda_sq: model.spectrum().lambdas().iter().map(|l| l * l).collect(),
            order,
            cache: RefCell::new(Vec::new()),
        }
    }

    /// Mode 0 alone.
    pub fn planar(m: f64, order: SchemeOrder) -> Self {
        Splitting {
            m,
            lambda_sq: vec![0.0],
            order,
            cache: RefCell::new(Vec::new()),
        }
    }

    pub fn order(&self) -> SchemeOrder {
        self.order
    }

    /// Exact flow of `Ẋ = ΛX` over time `t`.
    pub fn linear(&self, x: &State, t: f64) -> State {
        let mut out = x.clone();
        self.linear_in_place(&mut out, t);
        out
    }

    fn coefficients(&self, t: f64) -> FlowCoefficients {
        let m = self.m;
        let rotation = self
            .lambda_sq
            .iter()
            .skip(1)
            .map(|l2| {
                let omega = (l2 - m * m).sqrt();
                let (s, c) = (omega * t).sin_cos();
                [c, s / omega, -omega * s]
            })
            .collect();
        FlowCoefficients {
            t,
            grow: (m * t).exp(),
            decay: (-m * t).exp(),
            rotation,
        }
    }

    fn linear_in_place(&self, x: &mut State, t: f64) {
        let mut cache = self.cache.borrow_mut();
        let idx = match cache.iter().position(|c| c.t.to_bits() == t.to_bits()) {
            Some(i) => i,
            None => {
                if cache.len() == FLOW_CACHE {
                    cache.remove(0);
                }
                cache.push(self.coefficients(t));
                cache.len() - 1
            }
        };
        let coef = &cache[idx];
        let m = self.m;
        // hyperbolic mode in the eigenbasis (1, ±m)
        let (a, b) = (x.a[0], x.b[0]);
        let grow = 0.5 * (a + b / m) * coef.grow;
        let decay = 0.5 * (a - b / m) * coef.decay;
        x.a[0] = grow + decay;
        x.b[0] = m * (grow - decay);
        for (n, r) in coef.rotation.iter().enumerate().take(x.dim() - 1) {
            let (a, b) = (x.a[n + 1], x.b[n + 1]);
            x.a[n + 1] = a * r[0] + b * r[1];
            x.b[n + 1] = a * r[2] + b * r[0];
        }
    }

    /// Strang step `L(dt/2) K(dt) L(dt/2)` from time `t`.
    pub fn strang<F: Force + ?Sized>(&self, force: &F, t: f64, x: &State, dt: f64) -> State {
        let mut y = x.clone();
        self.linear_in_place(&mut y, 0.5 * dt);
        let f = force.force(t + 0.5 * dt, &y);
        for (b, f) in y.b.iter_mut().zip(&f) {
            *b += dt * f;
        }
        self.linear_in_place(&mut y, 0.5 * dt);
        y
    }

    /// One step of the configured order from time `t`; `dt` may be negative.
    pub fn step<F: Force + ?Sized>(&self, force: &F, t: f64, x: &State, dt: f64) -> State {
        match self.order {
            SchemeOrder::Second => self.strang(force, t, x, dt),
            SchemeOrder::Fourth => {
                let cbrt2 = 2f64.cbrt();
                let w1 = 1.0 / (2.0 - cbrt2);
                let w0 = -cbrt2 / (2.0 - cbrt2);
                let y = self.strang(force, t, x, w1 * dt);
                let y = self.strang(force, t + w1 * dt, &y, w0 * dt);
                self.strang(force, t + (w1 + w0) * dt, &y, w1 * dt)
            }
        }
    }
}

/// Exact flow of the linear part for time `t`.
pub fn linear_flow(x: &State, t: f64, model: &Model) -> State {
    Splitting::new(model, SchemeOrder::Second).linear(x, t)
}

/// One step of the full nonlinear system with the configured scheme.
pub fn step(x: &State, model: &Model, scheme: &SchemeConfig) -> State {
    Splitting::new(model, scheme.order).step(&KleinGordonForce::new(model), 0.0, x, scheme.dt)
}

/// Per-sample diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    /// Hamiltonian.
    pub h: f64,
    /// Elliptic energy.
    pub j: f64,
    /// `|X_h|`, Euclidean.
    pub hyperbolic_norm: f64,
    /// `‖X_c‖` in `H¹ × L²`.
    pub center_norm: f64,
}

impl Observables {
    pub fn of(model: &Model, x: &State) -> Self {
        Observables {
            h: model.energy(x),
            j: model.j_functional(x),
            hyperbolic_norm: x.project_h().norm(),
            center_norm: model.spectrum().center_norm(x),
        }
    }
}

/// Accumulator called at every step of an integration.
pub trait Observer {
    fn observe(&mut self, t: f64, x: &State);
}

/// Tracks `sup_t |X_h|` and `sup_t ‖X_c‖`.
#[derive(Debug)]
pub struct SupNorms<'a> {
    model: &'a Model,
    pub sup_hyperbolic: f64,
    pub sup_center: f64,
}

impl<'a> SupNorms<'a> {
    pub fn new(model: &'a Model) -> Self {
        SupNorms {
            model,
            sup_hyperbolic: 0.0,
            sup_center: 0.0,
        }
    }
}

impl Observer for SupNorms<'_> {
    fn observe(&mut self, _t: f64, x: &State) {
        self.sup_hyperbolic = self.sup_hyperbolic.max(x.project_h().norm());
        self.sup_center = self
            .sup_center
            .max(self.model.spectrum().center_norm(x));
    }
}

/// Sampled solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub observables: Vec<Observables>,
}

impl Trajectory {
    pub fn from_states(model: &Model, times: Vec<f64>, states: Vec<State>) -> Self {
        let observables = states.iter().map(|x| Observables::of(model, x)).collect();
        Trajectory {
            times,
            states,
            observables,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> &State {
        self.states.last().expect("empty trajectory")
    }

    /// CSV with header `t,a0,b0,H,J,norm_c`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,a0,b0,H,J,norm_c")?;
        for ((t, x), o) in self.times.iter().zip(&self.states).zip(&self.observables) {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                t, x.a[0], x.b[0], o.h, o.j, o.center_norm
            )?;
        }
        Ok(())
    }

    /// Little-endian dump: `u64` state dimension, `u64` sample count, then
    /// per sample `t`, the `a` vector and the `b` vector as `f64`.
    pub fn write_binary<W: Write>(&self, mut w: W) -> io::Result<()> {
        let dim = self.states.first().map_or(0, State::dim) as u64;
        w.write_all(&dim.to_le_bytes())?;
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        for (t, x) in self.times.iter().zip(&self.states) {
            w.write_all(&t.to_le_bytes())?;
            for v in x.a.iter().chain(&x.b) {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }
}

/// Reads a dump written by [`Trajectory::write_binary`] as `(times, states)`.
pub fn read_binary<R: Read>(mut r: R) -> Result<(Vec<f64>, Vec<State>)> {
    let mut word = [0u8; 8];
    let mut next = |r: &mut R| -> Result<[u8; 8]> {
        r.read_exact(&mut word)
            .map_err(|e| Error::Format(format!("truncated trajectory dump: {e}")))?;
        Ok(word)
    };
    let dim = u64::from_le_bytes(next(&mut r)?) as usize;
    let count = u64::from_le_bytes(next(&mut r)?) as usize;
    let mut times = Vec::with_capacity(count);
    let mut states = Vec::with_capacity(count);
    for _ in 0..count {
        times.push(f64::from_le_bytes(next(&mut r)?));
        let mut x = State::zeros(dim);
        for v in x.a.iter_mut() {
            *v = f64::from_le_bytes(next(&mut r)?);
        }
        for v in x.b.iter_mut() {
            *v = f64::from_le_bytes(next(&mut r)?);
        }
        states.push(x);
    }
    Ok((times, states))
}

/// Scale used to turn energy differences into relative drift: the sum of the
/// absolute values of the energy contributions at the initial state.
pub fn energy_scale(model: &Model, x: &State) -> f64 {
    let m2 = model.params().m * model.params().m;
    let quadratic: f64 = model
        .spectrum()
        .entries()
        .iter()
        .enumerate()
        .map(|(n, e)| (e.lambda * e.lambda - m2).abs() * x.a[n] * x.a[n] + x.b[n] * x.b[n])
        .sum();
    let power = 2 * model.params().p as i32 + 2;
    let u = model.quadrature().synthesize(&x.a);
    let potential: Vec<f64> = u.iter().map(|v| v.powi(power)).collect();
    0.5 * quadratic + model.quadrature().mean(&potential) / power as f64
}

/// Integrates the full system from `x0` over `[0, t_end]` (backward when
/// `t_end < 0`, with negative steps).
pub fn integrate(
    x0: &State,
    t_end: f64,
    model: &Model,
    scheme: &SchemeConfig,
    observers: &mut [&mut dyn Observer],
) -> Result<Trajectory> {
    integrate_with(
        &KleinGordonForce::new(model),
        x0,
        0.0,
        t_end,
        model,
        scheme,
        observers,
    )
}

/// Backward integration through the reversibility symmetry:
/// `X(-t) = S Φ_t(S X0)`. Sample times are `0, -dt, -2dt, …`.
pub fn integrate_reflected(
    x0: &State,
    t_end: f64,
    model: &Model,
    scheme: &SchemeConfig,
) -> Result<Trajectory> {
    let forward = integrate(&x0.apply_symmetry(), -t_end, model, scheme, &mut [])?;
    let states = forward.states.iter().map(State::apply_symmetry).collect();
    let times = forward.times.iter().map(|t| -t).collect();
    Ok(Trajectory::from_states(model, times, states))
}

/// Integrates `Ẋ = ΛX + force(t, X)` from `t0` to `t_end`.
pub fn integrate_with<F: Force + ?Sized>(
    force: &F,
    x0: &State,
    t0: f64,
    t_end: f64,
    model: &Model,
    scheme: &SchemeConfig,
    observers: &mut [&mut dyn Observer],
) -> Result<Trajectory> {
    scheme.validate()?;
    let span = t_end - t0;
    if span == 0.0 || !span.is_finite() {
        return Err(Error::InvalidParameter(
            "integration span must be nonzero and finite".into(),
        ));
    }
    if x0.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: x0.dim(),
        });
    }
    let steps = (span.abs() / scheme.dt).round().max(1.0) as usize;
    let dt = span / steps as f64;
    let splitting = Splitting::new(model, scheme.order);

    let check_drift = scheme.drift_tolerance.is_finite();
    let h0 = model.energy(x0);
    let scale = energy_scale(model, x0);

    let mut times = vec![t0];
    let mut states = vec![x0.clone()];
    for obs in observers.iter_mut() {
        obs.observe(t0, x0);
    }
    let mut x = x0.clone();
    for i in 1..=steps {
        x = splitting.step(force, t0 + (i - 1) as f64 * dt, &x, dt);
        let t = t0 + i as f64 * dt;
        for obs in observers.iter_mut() {
            obs.observe(t, &x);
        }
        if i % scheme.sample_every == 0 || i == steps {
            if check_drift && scale > 0.0 {
                let drift = (model.energy(&x) - h0).abs() / scale;
                if drift > scheme.drift_tolerance {
                    return Err(Error::EnergyDrift {
                        time: t,
                        drift,
                        tolerance: scheme.drift_tolerance,
                    });
                }
            }
            times.push(t);
            states.push(x.clone());
        }
    }
    Ok(Trajectory::from_states(model, times, states))
}

/// Worst-case check of `∫(v² + |∇u|²) ≤ 2H⁰ + p/(p+1) m^{2+2/p}` along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AprioriReport {
    /// Right-hand side with `H⁰` taken at the first sample.
    pub bound: f64,
    pub max_lhs: f64,
    /// `max_lhs / bound` (infinite when the bound is zero and the left side is not).
    pub max_ratio: f64,
    pub worst_time: f64,
    /// Samples exceeding `bound + slack`.
    pub violations: usize,
    pub slack: f64,
}

impl AprioriReport {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// `b_0² + Σ_{k≥1}(b_k² + λ_k² a_k²)`.
pub fn gradient_energy(model: &Model, x: &State) -> f64 {
    model
        .spectrum()
        .entries()
        .iter()
        .enumerate()
        .map(|(n, e)| x.b[n] * x.b[n] + e.lambda * e.lambda * x.a[n] * x.a[n])
        .sum()
}

pub fn apriori_bound_report(traj: &Trajectory, model: &Model, slack: f64) -> AprioriReport {
    assert!(!traj.is_empty(), "a-priori report needs a nonempty trajectory");
    let ModelParams { m, p, .. } = *model.params();
    let pf = p as f64;
    let h0 = traj.observables[0].h;
    let bound = 2.0 * h0 + pf / (pf + 1.0) * m.powf(2.0 + 2.0 / pf);
    let mut max_lhs = f64::NEG_INFINITY;
    let mut worst_time = traj.times[0];
    let mut violations = 0;
    for (t, x) in traj.times.iter().zip(&traj.states) {
        let lhs = gradient_energy(model, x);
        if lhs > max_lhs {
            max_lhs = lhs;
            worst_time = *t;
        }
        if lhs > bound + slack {
            violations += 1;
        }
    }
    let max_ratio = if bound > 0.0 {
        max_lhs / bound
    } else if max_lhs <= 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    AprioriReport {
        bound,
        max_lhs,
        max_ratio,
        worst_time,
        violations,
        slack,
    }
}
