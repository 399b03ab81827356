//! Named experiments. Each one writes its tables and plots, then returns
//! the list of in-run checks.

mod linear;
mod manifold;
mod planar;

use std::fmt;

use clap::ValueEnum;
use kgman_core::evolve::{apriori_bound_report, Trajectory};
use kgman_core::Model;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{ConfigError, Settings};
use crate::output::{Sink, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    PhasePortrait,
    HomoclinicTrack,
    LinearizedScatter,
    HyperbolicBasis,
    OdeBound,
    Shadow,
    PsiScan,
    Heteroclinic,
    ConvergeWc,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::PhasePortrait => "phase-portrait",
            Experiment::HomoclinicTrack => "homoclinic-track",
            Experiment::LinearizedScatter => "linearized-scatter",
            Experiment::HyperbolicBasis => "hyperbolic-basis",
            Experiment::OdeBound => "ode-bound",
            Experiment::Shadow => "shadow",
            Experiment::PsiScan => "psi-scan",
            Experiment::Heteroclinic => "heteroclinic",
            Experiment::ConvergeWc => "converge-wc",
        }
    }
}

#[derive(Debug)]
pub enum RunError {
    Config(String),
    /// A library computation refused to complete (divergence, drift, ...).
    Failure(String),
    Io(anyhow::Error),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "config error: {m}"),
            RunError::Failure(m) => write!(f, "computation failed: {m}"),
            RunError::Io(e) => write!(f, "output error: {e:#}"),
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e.0)
    }
}

impl From<kgman_core::Error> for RunError {
    fn from(e: kgman_core::Error) -> Self {
        use kgman_core::Error as E;
        match e {
            E::InvalidParameter(_) | E::InsufficientQuadrature { .. } | E::DimensionMismatch { .. } => {
                RunError::Config(e.to_string())
            }
            _ => RunError::Failure(e.to_string()),
        }
    }
}

impl From<anyhow::Error> for RunError {
    fn from(e: anyhow::Error) -> Self {
        RunError::Io(e)
    }
}

pub type RunResult<T> = Result<T, RunError>;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: &'static str,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    pub fn below(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check {
            name: name.into(),
            value,
            relation: "<",
            threshold: limit,
            passed: value < limit,
        }
    }

    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check {
            name: name.into(),
            value,
            relation: "<=",
            threshold: limit,
            passed: value <= limit,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check {
            name: name.into(),
            value,
            relation: ">=",
            threshold: limit,
            passed: value >= limit,
        }
    }

    pub fn equals(name: impl Into<String>, value: f64, expected: f64) -> Self {
        Check {
            name: name.into(),
            value,
            relation: "==",
            threshold: expected,
            passed: value == expected,
        }
    }

    /// `|value - target| <= tol`; the recorded threshold is `tol`.
    pub fn near(name: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            value,
            relation: "|x-target|<=",
            threshold: tol,
            passed: (value - target).abs() <= tol,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&["check", "value", "relation", "threshold", "passed"]);
        for c in &self.checks {
            t.push(vec![
                c.name.as_str().into(),
                c.value.into(),
                c.relation.into(),
                c.threshold.into(),
                c.passed.into(),
            ]);
        }
        t
    }

    /// A-priori energy bound along an integrated trajectory.
    pub fn apriori(&mut self, label: &str, traj: &Trajectory, model: &Model) {
        let r = apriori_bound_report(traj, model, 1e-8);
        self.push(Check::at_most(
            format!("{label}: a-priori bound excess"),
            r.max_lhs - r.bound,
            r.slack,
        ));
    }
}

pub struct Context<'a> {
    pub settings: &'a Settings,
    pub sink: &'a mut Sink,
}

impl Context<'_> {
    pub fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.settings.seed);
        rng.set_stream(stream);
        rng
    }
}

pub fn run(experiment: Experiment, ctx: &mut Context<'_>) -> RunResult<Report> {
    match experiment {
        Experiment::PhasePortrait => planar::phase_portrait(ctx),
        Experiment::HomoclinicTrack => planar::homoclinic_track(ctx),
        Experiment::LinearizedScatter => linear::linearized_scatter(ctx),
        Experiment::HyperbolicBasis => linear::hyperbolic_basis(ctx),
        Experiment::OdeBound => linear::ode_bound(ctx),
        Experiment::Shadow => manifold::shadow(ctx),
        Experiment::PsiScan => manifold::psi_scan(ctx),
        Experiment::Heteroclinic => manifold::heteroclinic(ctx),
        Experiment::ConvergeWc => manifold::converge_wc(ctx),
    }
}

/// Every `stride`-th index plus the last one.
pub fn thin(len: usize, stride: usize) -> impl Iterator<Item = usize> {
    let stride = stride.max(1);
    (0..len).filter(move |i| i % stride == 0 || *i + 1 == len)
}
