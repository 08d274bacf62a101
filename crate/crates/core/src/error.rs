use thiserror::Error;

/// Errors raised across the toolkit.
///
/// Numerical failures carry enough context to be printed directly by the
/// command-line front end.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("parameter file: {0}")]
    Config(String),
    #[error("well-posedness violated: gamma = {gamma} must exceed kappa2 = {kappa2}")]
    WellPosednessViolated { gamma: f64, kappa2: f64 },
    #[error("state dependence is degenerate (c = 0): the solution bound is unbounded")]
    DegenerateStateDependence,
    #[error("delay became advanced at t = {t}: alpha = {alpha}")]
    DelayAdvanced { t: f64, alpha: f64 },
    #[error("history queried at t = {t}, outside the covered interval [{lo}, {hi}]")]
    HistoryOutOfRange { t: f64, lo: f64, hi: f64 },
    #[error("history interval too short: need {needed}, have {available}")]
    HistoryTooShort { needed: f64, available: f64 },
    #[error("solution left the bound interval at t = {t}: u = {u} not in ({lo}, {hi})")]
    BoundViolated { t: f64, u: f64, lo: f64, hi: f64 },
    #[error("step size collapsed to {step:e} at {at}")]
    StepCollapse { step: f64, at: f64 },
    #[error("query at t = {t} outside solution range [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("singular Jacobian in {0}")]
    JacobianSingular(&'static str),
    #[error("seed is not on branch {0}")]
    SeedNotOnBranch(String),
    #[error("unknown {kind} '{name}'")]
    UnknownName { kind: &'static str, name: String },
    #[error("strong resonance: {k}*omega1 = {l}*omega2 within {margin:e}")]
    StrongResonance { k: u32, l: u32, margin: f64 },
    #[error("characteristic root is degenerate (|Delta'(lambda)| = {0:e})")]
    CharacteristicDegenerate(f64),
    #[error("map kappa -> mu is not regular (|det J| = {0:e})")]
    RegularityViolated(f64),
    #[error("adjoint normalization is degenerate (|<e, e>| = {0:e})")]
    NormalizationDegenerate(f64),
    #[error("resonant denominator in {what}: |value| = {value:e}")]
    ResonantDenominator { what: String, value: f64 },
    #[error("degenerate cubic coefficients: p11 = {p11:e}, p22 = {p22:e}")]
    DegenerateCubic { p11: f64, p22: f64 },
    #[error("torus rays require case III, got {0}")]
    WrongCase(String),
    #[error("too few section crossings: {found} < {required}")]
    TooFewEvents { found: usize, required: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
