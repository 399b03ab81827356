//! The explicit homoclinic orbit and the planar `(a_0, b_0)` dynamics.
//!
//! Space-independent solutions reduce the field equation to
//! `ȧ_0 = b_0`, `ḃ_0 = m² a_0 - a_0^{2p+1}`. The homoclinic loop to the origin
//! is `α(t) = A sech(pmt)^{1/p}` with `A = m^{1/p} (p+1)^{1/(2p)}` and
//! `β = α̇ = -m α tanh(pmt)`.

use crate::error::{Error, Result};
use crate::evolve::{PlanarForce, SchemeOrder, Splitting};
use crate::spectral::{HyperbolicPoint, ModelParams, Spectrum, State};

/// Closed-form homoclinic solution `h(t) = (α(t), β(t))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomoclinicOrbit {
    m: f64,
    p: u32,
    amplitude: f64,
}

impl HomoclinicOrbit {
    pub fn new(params: &ModelParams) -> Self {
        let pf = params.p as f64;
        let amplitude = params.m.powf(1.0 / pf) * (pf + 1.0).powf(0.5 / pf);
        HomoclinicOrbit {
            m: params.m,
            p: params.p,
            amplitude,
        }
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// `α(0) = m^{1/p} (p+1)^{1/(2p)}`.
    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// `sech(x)` through `2e^{-|x|} / (1 + e^{-2|x|})`, finite for every `x`.
    fn sech(x: f64) -> f64 {
        let e = (-x.abs()).exp();
        2.0 * e / (1.0 + e * e)
    }

    pub fn alpha(&self, t: f64) -> f64 {
        let x = self.p as f64 * self.m * t;
        self.amplitude * Self::sech(x).powf(1.0 / self.p as f64)
    }

    pub fn beta(&self, t: f64) -> f64 {
        let x = self.p as f64 * self.m * t;
        -self.m * self.alpha(t) * x.tanh()
    }

    /// `β̇ = m² α - α^{2p+1}`.
    pub fn beta_dot(&self, t: f64) -> f64 {
        let a = self.alpha(t);
        a * (self.m * self.m - self.alpha_pow_2p(t))
    }

    /// `α^{2p}(t) = (p+1) m² sech²(pmt)`, evaluated without powers of `α`.
    pub fn alpha_pow_2p(&self, t: f64) -> f64 {
        let s = Self::sech(self.p as f64 * self.m * t);
        (self.p as f64 + 1.0) * self.m * self.m * s * s
    }

    /// Linearized potential `V(t) = (2p+1) α^{2p}(t)`.
    pub fn potential(&self, t: f64) -> f64 {
        (2 * self.p + 1) as f64 * self.alpha_pow_2p(t)
    }

    /// `∫_0^t α^{2p} = (p+1) m tanh(pmt) / p` (odd in `t`).
    pub fn alpha_pow_2p_integral(&self, t: f64) -> f64 {
        let pf = self.p as f64;
        (pf + 1.0) * self.m * (pf * self.m * t).tanh() / pf
    }

    /// `∫_t^∞ α^{2p}` for `t ≥ 0`, computed without cancellation.
    pub fn alpha_pow_2p_tail(&self, t: f64) -> f64 {
        let pf = self.p as f64;
        let x = pf * self.m * t;
        // 1 - tanh(x) = 2e^{-2x} / (1 + e^{-2x})
        let e = (-2.0 * x).exp();
        (pf + 1.0) * self.m / pf * 2.0 * e / (1.0 + e)
    }

    pub fn point(&self, t: f64) -> HyperbolicPoint {
        HyperbolicPoint::new(self.alpha(t), self.beta(t))
    }

    /// Full phase-space state with `(a_0, b_0) = (α(t), β(t))` and no elliptic part.
    pub fn state(&self, t: f64, spectrum: &Spectrum) -> State {
        State::zeros(spectrum.len()).with_hyperbolic(self.point(t))
    }

    /// Planar energy `½(b² - m²a²) + a^{2p+2}/(2p+2)`; zero on the loop.
    pub fn planar_energy(&self, a: f64, b: f64) -> f64 {
        planar_energy(self.m, self.p, a, b)
    }
}

pub fn planar_energy(m: f64, p: u32, a: f64, b: f64) -> f64 {
    let k = 2 * p as i32 + 2;
    0.5 * (b * b - m * m * a * a) + a.powi(k) / k as f64
}

/// Stationary amplitudes `{0, m^{1/p}, -m^{1/p}}`.
pub fn equilibria(params: &ModelParams) -> [f64; 3] {
    let a = params.equilibrium_amplitude();
    [0.0, a, -a]
}

/// One sample of a planar trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarSample {
    pub t: f64,
    pub a0: f64,
    pub b0: f64,
    pub energy: f64,
}

/// Sampled trajectory of the planar system from `(η, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarOrbit {
    pub eta: f64,
    pub samples: Vec<PlanarSample>,
}

impl PlanarOrbit {
    pub fn max_energy_drift(&self) -> f64 {
        let e0 = self.samples[0].energy;
        self.samples
            .iter()
            .map(|s| (s.energy - e0).abs())
            .fold(0.0, f64::max)
    }

    /// First crossing of the section `b_0 = 0` with `a_0 > 0` from below,
    /// linearly interpolated. Returns `(t, a_0)`.
    pub fn first_return(&self) -> Option<(f64, f64)> {
        // skip the starting point, which lies on the section; the orbit
        // returns by crossing into the half plane it first moved into
        let mut side = 0.0;
        for w in self.samples.windows(2) {
            let (s0, s1) = (w[0], w[1]);
            if side == 0.0 {
                if s1.b0 != 0.0 {
                    side = s1.b0.signum();
                }
                continue;
            }
            if side * s0.b0 < 0.0 && side * s1.b0 >= 0.0 && s1.a0 > 0.0 {
                let theta = -s0.b0 / (s1.b0 - s0.b0);
                return Some((
                    s0.t + theta * (s1.t - s0.t),
                    s0.a0 + theta * (s1.a0 - s0.a0),
                ));
            }
        }
        None
    }
}

/// Integrates the planar system from `(η, 0)` with the reversible splitting
/// scheme restricted to mode 0.
///
/// Fails when the planar energy drifts by more than `drift_bound` (absolute).
pub fn planar_orbit(
    eta: f64,
    params: &ModelParams,
    t_end: f64,
    dt: f64,
    drift_bound: f64,
) -> Result<PlanarOrbit> {
    if !(dt > 0.0 && t_end > 0.0) {
        return Err(Error::InvalidParameter(
            "planar orbit needs dt > 0 and T > 0".into(),
        ));
    }
    let force = PlanarForce::new(params);
    let splitting = Splitting::planar(params.m, SchemeOrder::Second);
    let steps = (t_end / dt).round() as usize;
    let mut x = State::new(vec![eta], vec![0.0])?;
    let e0 = planar_energy(params.m, params.p, eta, 0.0);
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push(PlanarSample {
        t: 0.0,
        a0: eta,
        b0: 0.0,
        energy: e0,
    });
    for i in 1..=steps {
        x = splitting.step(&force, (i - 1) as f64 * dt, &x, dt);
        let t = i as f64 * dt;
        let energy = planar_energy(params.m, params.p, x.a[0], x.b[0]);
        if (energy - e0).abs() > drift_bound {
            return Err(Error::EnergyDrift {
                time: t,
                drift: (energy - e0).abs(),
                tolerance: drift_bound,
            });
        }
        samples.push(PlanarSample {
            t,
            a0: x.a[0],
            b0: x.b[0],
            energy,
        });
    }
    Ok(PlanarOrbit { eta, samples })
}
