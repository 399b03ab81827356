//! Spectral discretization of the Klein-Gordon phase space.
//!
//! A field `u(x) = Σ a_n e_n(x)` and its velocity `v(x) = Σ b_n e_n(x)` are
//! stored as coefficient vectors over a truncated eigenbasis of the
//! Laplace-Beltrami operator, `-Δ e_n = λ_n² e_n`. Inner products use the
//! volume-one normalization `<f, g> = (1/Vol M) ∫ f g`, so `e_0 = 1` and every
//! basis function has unit norm.
//!
//! Polynomial nonlinearities are evaluated pseudo-spectrally on a uniform grid
//! large enough that the retained coefficients are exact (no aliasing).

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Compact manifold carrying the field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ManifoldKind {
    /// The circle `R / 2πZ`.
    Circle,
    /// The flat square torus `(R / 2πZ)²`.
    Torus2,
}

impl ManifoldKind {
    /// Smallest nonzero eigenvalue `λ_1` (both manifolds have `λ_1 = 1`).
    pub fn first_eigenvalue(self) -> f64 {
        1.0
    }

    pub fn name(self) -> &'static str {
        match self {
            ManifoldKind::Circle => "circle",
            ManifoldKind::Torus2 => "torus2",
        }
    }
}

impl fmt::Display for ManifoldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ManifoldKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circle" => Ok(ManifoldKind::Circle),
            "torus2" => Ok(ManifoldKind::Torus2),
            other => Err(Error::InvalidParameter(format!(
                "unknown manifold `{other}` (expected circle or torus2)"
            ))),
        }
    }
}

/// Mass, nonlinearity exponent and spectral cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub m: f64,
    pub p: u32,
    pub n_cut: usize,
    pub manifold: ManifoldKind,
}

impl ModelParams {
    /// Parameters on the circle.
    pub fn new(m: f64, p: u32, n_cut: usize) -> Result<Self> {
        Self::on(ManifoldKind::Circle, m, p, n_cut)
    }

    pub fn on(manifold: ManifoldKind, m: f64, p: u32, n_cut: usize) -> Result<Self> {
        let params = ModelParams {
            m,
            p,
            n_cut,
            manifold,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let lambda_1 = self.manifold.first_eigenvalue();
        if !(self.m > 0.0 && self.m < lambda_1) {
            return Err(Error::InvalidParameter(format!(
                "mass m = {} must satisfy 0 < m < λ_1 = {lambda_1}",
                self.m
            )));
        }
        if self.p == 0 {
            return Err(Error::InvalidParameter(
                "exponent p must be a positive integer".into(),
            ));
        }
        if self.n_cut == 0 {
            return Err(Error::InvalidParameter(
                "mode cutoff N must be at least 1 (no elliptic modes otherwise)".into(),
            ));
        }
        Ok(())
    }

    /// Degree `2p + 1` of the nonlinearity.
    pub fn degree(&self) -> usize {
        2 * self.p as usize + 1
    }

    /// Nonzero equilibrium amplitude `m^{1/p}`.
    pub fn equilibrium_amplitude(&self) -> f64 {
        self.m.powf(1.0 / self.p as f64)
    }
}

/// Real eigenfunction attached to a spectrum entry.
///
/// Wavevectors are stored in two components; the circle uses `[k, 0]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisFunction {
    Constant,
    Cos([i32; 2]),
    Sin([i32; 2]),
}

impl BasisFunction {
    pub fn eval(&self, x: [f64; 2]) -> f64 {
        match *self {
            BasisFunction::Constant => 1.0,
            BasisFunction::Cos(k) => SQRT_2 * (k[0] as f64 * x[0] + k[1] as f64 * x[1]).cos(),
            BasisFunction::Sin(k) => SQRT_2 * (k[0] as f64 * x[0] + k[1] as f64 * x[1]).sin(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumEntry {
    pub index: usize,
    /// Square root of the Laplace eigenvalue.
    pub lambda: f64,
    pub basis: BasisFunction,
}

/// Ordered table of the retained eigenpairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    kind: ManifoldKind,
    n_cut: usize,
    entries: Vec<SpectrumEntry>,
}

impl Spectrum {
    /// Builds the truncated eigenbasis.
    ///
    /// On the circle frequency `k ≤ N` contributes `√2 cos(kx)` then
    /// `√2 sin(kx)`. On the torus every wavevector with `|k| ≤ N` in the
    /// half-plane `k_1 > 0 or (k_1 = 0, k_2 > 0)` contributes a cosine and a
    /// sine; entries are ordered by `|k|²`, then lexicographically.
    pub fn build(kind: ManifoldKind, n_cut: usize) -> Result<Self> {
        if n_cut == 0 {
            return Err(Error::InvalidParameter(
                "mode cutoff N must be at least 1 (no elliptic modes otherwise)".into(),
            ));
        }
        let mut wavevectors: Vec<[i32; 2]> = match kind {
            ManifoldKind::Circle => (1..=n_cut as i32).map(|k| [k, 0]).collect(),
            ManifoldKind::Torus2 => {
                let n = n_cut as i32;
                let mut ks = Vec::new();
                for k1 in 0..=n {
                    for k2 in -n..=n {
                        let upper = k1 > 0 || k2 > 0;
                        if upper && k1 * k1 + k2 * k2 <= n * n {
                            ks.push([k1, k2]);
                        }
                    }
                }
                ks
            }
        };
        wavevectors.sort_by_key(|k| (k[0] * k[0] + k[1] * k[1], k[0], k[1]));

        let mut entries = Vec::with_capacity(2 * wavevectors.len() + 1);
        entries.push(SpectrumEntry {
            index: 0,
            lambda: 0.0,
            basis: BasisFunction::Constant,
        });
        for k in wavevectors {
            let lambda = ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt();
            for basis in [BasisFunction::Cos(k), BasisFunction::Sin(k)] {
                entries.push(SpectrumEntry {
                    index: entries.len(),
                    lambda,
                    basis,
                });
            }
        }
        Ok(Spectrum {
            kind,
            n_cut,
            entries,
        })
    }

    pub fn kind(&self) -> ManifoldKind {
        self.kind
    }

    pub fn n_cut(&self) -> usize {
        self.n_cut
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[SpectrumEntry] {
        &self.entries
    }

    pub fn lambda(&self, n: usize) -> f64 {
        self.entries[n].lambda
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.lambda).collect()
    }

    /// Elliptic frequency `ω_n = sqrt(λ_n² - m²)`; only meaningful for `n ≥ 1`.
    pub fn omega(&self, n: usize, m: f64) -> f64 {
        let l = self.entries[n].lambda;
        (l * l - m * m).sqrt()
    }

    /// Norm of the phase space `H¹ × L²`: `‖u‖_{H¹} + ‖v‖_{L²}`.
    pub fn norm(&self, x: &State) -> f64 {
        self.check(x);
        let h1: f64 = self
            .entries
            .iter()
            .zip(&x.a)
            .map(|(e, a)| (1.0 + e.lambda * e.lambda) * a * a)
            .sum();
        let l2: f64 = x.b.iter().map(|b| b * b).sum();
        h1.sqrt() + l2.sqrt()
    }

    /// Norm of the center projection `Q X`.
    pub fn center_norm(&self, x: &State) -> f64 {
        self.norm(&x.project_c())
    }

    fn check(&self, x: &State) {
        assert_eq!(
            x.dim(),
            self.len(),
            "state dimension does not match the spectrum"
        );
    }
}

/// Phase-space point `(a_n, b_n)`: position and momentum coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl State {
    pub fn zeros(dim: usize) -> Self {
        State {
            a: vec![0.0; dim],
            b: vec![0.0; dim],
        }
    }

    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.len(),
                found: b.len(),
            });
        }
        Ok(State { a, b })
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    /// `P X = (a_0, b_0)`.
    pub fn project_h(&self) -> HyperbolicPoint {
        HyperbolicPoint {
            a0: self.a[0],
            b0: self.b[0],
        }
    }

    /// `Q X = X - P X`: mode 0 zeroed.
    pub fn project_c(&self) -> State {
        let mut out = self.clone();
        out.a[0] = 0.0;
        out.b[0] = 0.0;
        out
    }

    /// Replaces the hyperbolic pair.
    pub fn with_hyperbolic(mut self, h: HyperbolicPoint) -> State {
        self.a[0] = h.a0;
        self.b[0] = h.b0;
        self
    }

    /// Reversibility symmetry `S(a, b) = (a, -b)`.
    pub fn apply_symmetry(&self) -> State {
        State {
            a: self.a.clone(),
            b: self.b.iter().map(|b| -b).collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> State {
        State {
            a: self.a.iter().map(|v| v * s).collect(),
            b: self.b.iter().map(|v| v * s).collect(),
        }
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: f64, other: &State) {
        for (x, y) in self.a.iter_mut().zip(&other.a) {
            *x += s * y;
        }
        for (x, y) in self.b.iter_mut().zip(&other.b) {
            *x += s * y;
        }
    }

    pub fn add(&self, other: &State) -> State {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn sub(&self, other: &State) -> State {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    /// Largest absolute coefficient.
    pub fn max_abs(&self) -> f64 {
        self.a
            .iter()
            .chain(&self.b)
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }
}

/// The `(a_0, b_0)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HyperbolicPoint {
    pub a0: f64,
    pub b0: f64,
}

impl HyperbolicPoint {
    pub fn new(a0: f64, b0: f64) -> Self {
        HyperbolicPoint { a0, b0 }
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.a0.hypot(self.b0)
    }

    pub fn dot(&self, v: [f64; 2]) -> f64 {
        self.a0 * v[0] + self.b0 * v[1]
    }
}

enum Backend {
    Circle {
        forward: Arc<dyn Fft<f64>>,
        inverse: Arc<dyn Fft<f64>>,
    },
    /// Basis values tabulated on the grid, entry-major.
    Dense { table: Vec<f64>, points: usize },
}

/// Uniform-grid transform between coefficients and grid values.
///
/// With `M ≥ (p+1)(2N+1)` points per dimension the trapezoid rule integrates
/// every trigonometric polynomial of degree `(2p+2)N` exactly, which covers
/// both `∫u^{2p+2}` and the projections of `u^{2p+1}` on modes `≤ N`.
pub struct Quadrature {
    kind: ManifoldKind,
    n_cut: usize,
    dim: usize,
    size: usize,
    backend: Backend,
}

impl fmt::Debug for Quadrature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Quadrature")
            .field("kind", &self.kind)
            .field("n_cut", &self.n_cut)
            .field("size", &self.size)
            .finish()
    }
}

impl Quadrature {
    /// Minimal points per dimension for exponent `p`.
    pub fn required_size(n_cut: usize, p: u32) -> usize {
        (p as usize + 1) * (2 * n_cut + 1)
    }

    /// Smallest power of two satisfying the padding rule.
    pub fn new(spectrum: &Spectrum, p: u32) -> Self {
        let size = Self::required_size(spectrum.n_cut, p).next_power_of_two();
        Self::build(spectrum, size)
    }

    /// Explicit grid size; rejected when it would alias degree `2p+2` products.
    pub fn with_size(spectrum: &Spectrum, p: u32, size: usize) -> Result<Self> {
        let required = Self::required_size(spectrum.n_cut, p);
        if size < required {
            return Err(Error::InsufficientQuadrature {
                size,
                required,
                degree: 2 * p as usize + 2,
            });
        }
        Ok(Self::build(spectrum, size))
    }

    fn build(spectrum: &Spectrum, size: usize) -> Self {
        let backend = match spectrum.kind {
            ManifoldKind::Circle => {
                let mut planner = FftPlanner::new();
                Backend::Circle {
                    forward: planner.plan_fft_forward(size),
                    inverse: planner.plan_fft_inverse(size),
                }
            }
            ManifoldKind::Torus2 => {
                let points = size * size;
                let h = 2.0 * PI / size as f64;
                let mut table = Vec::with_capacity(points * spectrum.len());
                for entry in &spectrum.entries {
                    for i in 0..size {
                        for j in 0..size {
                            table.push(entry.basis.eval([i as f64 * h, j as f64 * h]));
                        }
                    }
                }
                Backend::Dense { table, points }
            }
        };
        Quadrature {
            kind: spectrum.kind,
            n_cut: spectrum.n_cut,
            dim: spectrum.len(),
            size,
            backend,
        }
    }

    /// Points per dimension.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn points(&self) -> usize {
        match self.kind {
            ManifoldKind::Circle => self.size,
            ManifoldKind::Torus2 => self.size * self.size,
        }
    }

    /// Grid values of `Σ a_n e_n`.
    pub fn synthesize(&self, a: &[f64]) -> Vec<f64> {
        assert_eq!(a.len(), self.dim, "coefficient vector has wrong length");
        match &self.backend {
            Backend::Circle { inverse, .. } => {
                let mut buf = vec![Complex::new(0.0, 0.0); self.size];
                buf[0] = Complex::new(a[0], 0.0);
                for k in 1..=self.n_cut {
                    let c = a[2 * k - 1];
                    let s = a[2 * k];
                    // Re Σ √2 (c - i s) e^{ikx} = √2 (c cos kx + s sin kx)
                    buf[k] = Complex::new(SQRT_2 * c, -SQRT_2 * s);
                }
                inverse.process(&mut buf);
                buf.iter().map(|z| z.re).collect()
            }
            Backend::Dense { table, points } => {
                let mut u = vec![0.0; *points];
                for (n, coef) in a.iter().enumerate() {
                    if *coef == 0.0 {
                        continue;
                    }
                    let row = &table[n * points..(n + 1) * points];
                    for (u, e) in u.iter_mut().zip(row) {
                        *u += coef * e;
                    }
                }
                u
            }
        }
    }

    /// Projections `<f, e_n>` of grid values on every retained mode.
    pub fn analyze(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.points(), "grid vector has wrong length");
        match &self.backend {
            Backend::Circle { forward, .. } => {
                let mut buf: Vec<Complex<f64>> = f.iter().map(|&v| Complex::new(v, 0.0)).collect();
                forward.process(&mut buf);
                let scale = 1.0 / self.size as f64;
                let mut out = vec![0.0; self.dim];
                out[0] = buf[0].re * scale;
                for k in 1..=self.n_cut {
                    out[2 * k - 1] = SQRT_2 * buf[k].re * scale;
                    out[2 * k] = -SQRT_2 * buf[k].im * scale;
                }
                out
            }
            Backend::Dense { table, points } => {
                let scale = 1.0 / *points as f64;
                (0..self.dim)
                    .map(|n| {
                        let row = &table[n * points..(n + 1) * points];
                        row.iter().zip(f).map(|(e, v)| e * v).sum::<f64>() * scale
                    })
                    .collect()
            }
        }
    }

    /// Volume-normalized integral `(1/Vol M) ∫ f`.
    pub fn mean(&self, f: &[f64]) -> f64 {
        f.iter().sum::<f64>() / f.len() as f64
    }
}

/// Parameters, spectrum and quadrature bundled for evaluation.
#[derive(Debug)]
pub struct Model {
    params: ModelParams,
    spectrum: Spectrum,
    quadrature: Quadrature,
}

impl Model {
    pub fn new(params: ModelParams) -> Result<Self> {
        params.validate()?;
        let spectrum = Spectrum::build(params.manifold, params.n_cut)?;
        let quadrature = Quadrature::new(&spectrum, params.p);
        Ok(Model {
            params,
            spectrum,
            quadrature,
        })
    }

    /// Model with an explicit grid size (validated against the padding rule).
    pub fn with_grid_size(params: ModelParams, size: usize) -> Result<Self> {
        params.validate()?;
        let spectrum = Spectrum::build(params.manifold, params.n_cut)?;
        let quadrature = Quadrature::with_size(&spectrum, params.p, size)?;
        Ok(Model {
            params,
            spectrum,
            quadrature,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn quadrature(&self) -> &Quadrature {
        &self.quadrature
    }

    pub fn dim(&self) -> usize {
        self.spectrum.len()
    }

    pub fn zero_state(&self) -> State {
        State::zeros(self.dim())
    }

    /// Hamiltonian `½Σ[(λ²-m²)a² + b²] + (1/(2p+2)) ∫ u^{2p+2}`.
    pub fn energy(&self, x: &State) -> f64 {
        let m2 = self.params.m * self.params.m;
        let quadratic: f64 = self
            .spectrum
            .entries
            .iter()
            .enumerate()
            .map(|(n, e)| (e.lambda * e.lambda - m2) * x.a[n] * x.a[n] + x.b[n] * x.b[n])
            .sum();
        let power = 2 * self.params.p as i32 + 2;
        let u = self.quadrature.synthesize(&x.a);
        let potential: Vec<f64> = u.iter().map(|v| v.powi(power)).collect();
        0.5 * quadratic + self.quadrature.mean(&potential) / power as f64
    }

    /// Elliptic energy `J = ½Σ_{k≥1}[(λ_k²-m²)a_k² + b_k²]`.
    pub fn j_functional(&self, x: &State) -> f64 {
        let m2 = self.params.m * self.params.m;
        0.5 * self.spectrum.entries[1..]
            .iter()
            .map(|e| {
                let n = e.index;
                (e.lambda * e.lambda - m2) * x.a[n] * x.a[n] + x.b[n] * x.b[n]
            })
            .sum::<f64>()
    }

    /// `F(X) = (0, -u^{2p+1})` projected on the retained modes.
    pub fn nonlinear_term(&self, x: &State) -> State {
        let power = self.params.degree() as i32;
        let force = self.project_pointwise(&x.a, |u| -u.powi(power));
        State {
            a: vec![0.0; self.dim()],
            b: force,
        }
    }

    /// Projects `f(u(x))` for a pointwise polynomial `f` of degree at most `2p+1`.
    pub fn project_pointwise(&self, a: &[f64], f: impl Fn(f64) -> f64) -> Vec<f64> {
        let u = self.quadrature.synthesize(a);
        let values: Vec<f64> = u.into_iter().map(f).collect();
        self.quadrature.analyze(&values)
    }

    /// Projects `f(u(x), w(x))` for two fields; the total degree must stay at most `2p+1`.
    pub fn project_pointwise2(
        &self,
        a: &[f64],
        c: &[f64],
        f: impl Fn(f64, f64) -> f64,
    ) -> Vec<f64> {
        let u = self.quadrature.synthesize(a);
        let w = self.quadrature.synthesize(c);
        let values: Vec<f64> = u.into_iter().zip(w).map(|(u, w)| f(u, w)).collect();
        self.quadrature.analyze(&values)
    }
}
