//! Evaluation contracts for past values of the solution.

use std::sync::Arc;

use crate::error::{Error, Result};

/// A function of time with an explicit domain. Queries outside the domain are
/// rejected rather than extrapolated.
pub trait HistoryLookup: Send + Sync {
    /// Closed interval on which values are available.
    fn domain(&self) -> (f64, f64);

    /// Value at `t` without a range check.
    fn eval_unchecked(&self, t: f64) -> f64;

    /// Derivative at `t`, if the history provides one.
    fn derivative_unchecked(&self, _t: f64) -> Option<f64> {
        None
    }

    fn contains(&self, t: f64) -> bool {
        let (lo, hi) = self.domain();
        let slack = 1e-12 * (1.0 + t.abs());
        t >= lo - slack && t <= hi + slack
    }

    fn value(&self, t: f64) -> Result<f64> {
        if !self.contains(t) {
            let (lo, hi) = self.domain();
            return Err(Error::HistoryOutOfRange { t, lo, hi });
        }
        Ok(self.eval_unchecked(t))
    }

    fn derivative(&self, t: f64) -> Result<Option<f64>> {
        if !self.contains(t) {
            let (lo, hi) = self.domain();
            return Err(Error::HistoryOutOfRange { t, lo, hi });
        }
        Ok(self.derivative_unchecked(t))
    }
}

/// Constant function on `[lo, hi]`.
#[derive(Debug, Clone, Copy)]
pub struct ConstantHistory {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
}

impl ConstantHistory {
    pub fn new(value: f64, lo: f64, hi: f64) -> Self {
        Self { value, lo, hi }
    }
}

impl HistoryLookup for ConstantHistory {
    fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }
    fn eval_unchecked(&self, _t: f64) -> f64 {
        self.value
    }
    fn derivative_unchecked(&self, _t: f64) -> Option<f64> {
        Some(0.0)
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Closed-form history given by a closure (and optionally its derivative).
#[derive(Clone)]
pub struct FnHistory {
    f: ScalarFn,
    df: Option<ScalarFn>,
    lo: f64,
    hi: f64,
}

impl FnHistory {
    pub fn new(lo: f64, hi: f64, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            f: Arc::new(f),
            df: None,
            lo,
            hi,
        }
    }

    pub fn with_derivative(mut self, df: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.df = Some(Arc::new(df));
        self
    }
}

impl std::fmt::Debug for FnHistory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FnHistory")
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .finish_non_exhaustive()
    }
}

impl HistoryLookup for FnHistory {
    fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }
    fn eval_unchecked(&self, t: f64) -> f64 {
        (self.f)(t)
    }
    fn derivative_unchecked(&self, t: f64) -> Option<f64> {
        self.df.as_ref().map(|df| df(t))
    }
}

/// Sampled history with linear interpolation between strictly increasing nodes.
#[derive(Debug, Clone)]
pub struct TableHistory {
    ts: Vec<f64>,
    us: Vec<f64>,
}

impl TableHistory {
    pub fn new(ts: Vec<f64>, us: Vec<f64>) -> Result<Self> {
        if ts.len() != us.len() || ts.len() < 2 {
            return Err(Error::InvalidParameters(
                "table history needs at least two (t, u) pairs".into(),
            ));
        }
        if ts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameters(
                "table history times must be strictly increasing".into(),
            ));
        }
        if us.iter().chain(&ts).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameters(
                "table history has non-finite entries".into(),
            ));
        }
        Ok(Self { ts, us })
    }

    fn segment(&self, t: f64) -> usize {
        let n = self.ts.len();
        match self.ts.partition_point(|&s| s <= t) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        }
    }
}

impl HistoryLookup for TableHistory {
    fn domain(&self) -> (f64, f64) {
        (self.ts[0], *self.ts.last().unwrap())
    }
    fn eval_unchecked(&self, t: f64) -> f64 {
        let k = self.segment(t);
        let (t0, t1) = (self.ts[k], self.ts[k + 1]);
        let s = (t - t0) / (t1 - t0);
        self.us[k] + s * (self.us[k + 1] - self.us[k])
    }
    fn derivative_unchecked(&self, t: f64) -> Option<f64> {
        let k = self.segment(t);
        Some((self.us[k + 1] - self.us[k]) / (self.ts[k + 1] - self.ts[k]))
    }
}
