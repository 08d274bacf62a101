//! Adaptive explicit integration of delay equations with dense output.

use crate::error::{Error, Result};
use crate::history::HistoryLookup;
use crate::model::{solution_bound_interval, DelayModel, StateDependent};
use crate::params::Parameters;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrationOptions {
    pub atol: f64,
    pub rtol: f64,
    pub max_step: f64,
    pub initial_step: Option<f64>,
    /// Fail with `BoundViolated` when the solution leaves the a-priori interval.
    pub bound_check: bool,
    pub max_steps: usize,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        Self {
            atol: 1e-9,
            rtol: 1e-7,
            max_step: 0.05,
            initial_step: None,
            bound_check: true,
            max_steps: 50_000_000,
        }
    }
}

impl IntegrationOptions {
    pub fn validate(&self) -> Result<()> {
        let ok = self.atol > 0.0
            && self.rtol > 0.0
            && self.max_step > 0.0
            && self.initial_step.is_none_or(|h| h > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::Config(
                "tolerances and step sizes must be positive".into(),
            ))
        }
    }
}

/// Cubic Hermite interpolant on `[t0, t1]`.
#[derive(Debug, Clone, Copy)]
struct Hermite {
    t0: f64,
    t1: f64,
    y0: f64,
    y1: f64,
    d0: f64,
    d1: f64,
}

impl Hermite {
    fn eval(&self, t: f64) -> f64 {
        let h = self.t1 - self.t0;
        let s = (t - self.t0) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        self.y0 * (2.0 * s3 - 3.0 * s2 + 1.0)
            + h * self.d0 * (s3 - 2.0 * s2 + s)
            + self.y1 * (-2.0 * s3 + 3.0 * s2)
            + h * self.d1 * (s3 - s2)
    }

    fn derivative(&self, t: f64) -> f64 {
        let h = self.t1 - self.t0;
        let s = (t - self.t0) / h;
        let s2 = s * s;
        (self.y0 * (6.0 * s2 - 6.0 * s)) / h
            + self.d0 * (3.0 * s2 - 4.0 * s + 1.0)
            + (self.y1 * (-6.0 * s2 + 6.0 * s)) / h
            + self.d1 * (3.0 * s2 - 2.0 * s)
    }
}

/// A computed solution: the initial history for `t <= t0`, then piecewise cubics.
#[derive(Clone)]
pub struct DenseSolution {
    history: Arc<dyn HistoryLookup>,
    ts: Vec<f64>,
    us: Vec<f64>,
    ds: Vec<f64>,
}

impl fmt::Debug for DenseSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DenseSolution")
            .field("history_domain", &self.history.domain())
            .field("steps", &(self.ts.len().saturating_sub(1)))
            .field("span", &(self.t0(), self.t_end()))
            .finish()
    }
}

impl DenseSolution {
    /// Builds a solution from breakpoint values and derivatives; `ts[0]` must be the end of the history.
    pub fn from_samples(
        history: Arc<dyn HistoryLookup>,
        ts: Vec<f64>,
        us: Vec<f64>,
        ds: Vec<f64>,
    ) -> Result<Self> {
        if ts.is_empty() || ts.len() != us.len() || ts.len() != ds.len() {
            return Err(Error::InvalidParameters(
                "breakpoint arrays must be non-empty and equal length".into(),
            ));
        }
        if ts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameters("breakpoints must increase".into()));
        }
        Ok(Self {
            history,
            ts,
            us,
            ds,
        })
    }

    fn start(history: Arc<dyn HistoryLookup>, t0: f64, u0: f64, d0: f64) -> Self {
        Self {
            history,
            ts: vec![t0],
            us: vec![u0],
            ds: vec![d0],
        }
    }

    pub fn t0(&self) -> f64 {
        self.ts[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.ts.last().unwrap()
    }

    /// Covered interval, history included.
    pub fn domain(&self) -> (f64, f64) {
        (self.history.domain().0, self.t_end())
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.ts
    }

    pub fn values(&self) -> &[f64] {
        &self.us
    }

    pub fn history(&self) -> &Arc<dyn HistoryLookup> {
        &self.history
    }

    fn piece(&self, i: usize) -> Hermite {
        Hermite {
            t0: self.ts[i],
            t1: self.ts[i + 1],
            y0: self.us[i],
            y1: self.us[i + 1],
            d0: self.ds[i],
            d1: self.ds[i + 1],
        }
    }

    /// Index of the interval `[ts[i], ts[i+1])` holding `t`.
    fn locate(&self, t: f64) -> usize {
        self.ts.partition_point(|&x| x <= t).saturating_sub(1)
    }

    fn out_of_range(&self, t: f64) -> Error {
        let (lo, hi) = self.domain();
        Error::OutOfRange { t, lo, hi }
    }

    pub fn evaluate(&self, t: f64) -> Result<f64> {
        if t < self.t0() {
            return self.history.value(t).map_err(|_| self.out_of_range(t));
        }
        if t > self.t_end() || t.is_nan() {
            return Err(self.out_of_range(t));
        }
        if t == self.t_end() {
            return Ok(*self.us.last().unwrap());
        }
        Ok(self.piece(self.locate(t)).eval(t))
    }

    pub fn derivative(&self, t: f64) -> Result<f64> {
        if t < self.t0() {
            let d = self
                .history
                .derivative(t)
                .map_err(|_| self.out_of_range(t))?;
            return Ok(d.unwrap_or_else(|| {
                let (lo, hi) = self.history.domain();
                let e = 1e-6 * (hi - lo).max(1.0);
                let (a, b) = ((t - e).max(lo), (t + e).min(hi));
                (self.history.eval_unchecked(b) - self.history.eval_unchecked(a)) / (b - a)
            }));
        }
        if t > self.t_end() || t.is_nan() {
            return Err(self.out_of_range(t));
        }
        if t == self.t_end() {
            return Ok(*self.ds.last().unwrap());
        }
        Ok(self.piece(self.locate(t)).derivative(t))
    }

    /// Final `span` of the solution, shifted so that it ends at `t = 0`, for restarting.
    pub fn tail_history(&self, span: f64) -> Result<SegmentHistory> {
        let available = self.t_end() - self.t0();
        if available < span {
            return Err(Error::HistoryTooShort {
                needed: span,
                available,
            });
        }
        let from = self.locate(self.t_end() - span);
        let shift = self.t_end();
        Ok(SegmentHistory {
            ts: self.ts[from..].iter().map(|t| t - shift).collect(),
            us: self.us[from..].to_vec(),
            ds: self.ds[from..].to_vec(),
        })
    }

    /// Downward zero crossings after `t0 + skip`.
    pub fn events(&self, p: &Parameters, skip: f64) -> Vec<EventRecord> {
        find_events(self, p, skip)
    }
}

/// Piecewise cubic history cut from an earlier solution.
#[derive(Debug, Clone)]
pub struct SegmentHistory {
    ts: Vec<f64>,
    us: Vec<f64>,
    ds: Vec<f64>,
}

impl SegmentHistory {
    fn piece(&self, t: f64) -> Hermite {
        let i = self
            .ts
            .partition_point(|&x| x <= t)
            .saturating_sub(1)
            .min(self.ts.len() - 2);
        Hermite {
            t0: self.ts[i],
            t1: self.ts[i + 1],
            y0: self.us[i],
            y1: self.us[i + 1],
            d0: self.ds[i],
            d1: self.ds[i + 1],
        }
    }
}

impl HistoryLookup for SegmentHistory {
    fn domain(&self) -> (f64, f64) {
        (self.ts[0], *self.ts.last().unwrap())
    }

    fn eval_unchecked(&self, t: f64) -> f64 {
        if t >= *self.ts.last().unwrap() {
            return *self.us.last().unwrap();
        }
        self.piece(t).eval(t)
    }

    fn derivative_unchecked(&self, t: f64) -> Option<f64> {
        Some(self.piece(t).derivative(t))
    }
}

// Zonneveld 4(3): fourth-order solution, third-order companion for error estimation.
const C: [f64; 5] = [0.0, 0.5, 0.5, 1.0, 0.75];
const A5: [f64; 4] = [5.0 / 32.0, 7.0 / 32.0, 13.0 / 32.0, -1.0 / 32.0];
const B: [f64; 5] = [1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0, 0.0];
const B_HAT: [f64; 5] = [-0.5, 7.0 / 3.0, 7.0 / 3.0, 13.0 / 6.0, -16.0 / 3.0];

const SAFETY: f64 = 0.9;
const PI_ALPHA: f64 = 0.7 / 4.0;
const PI_BETA: f64 = 0.4 / 4.0;
const MAX_FIXED_POINT: usize = 10;
const BOUND_SLACK: f64 = 1e-6;

struct Stepper<'a> {
    model: &'a dyn DelayModel,
    p: &'a Parameters,
}

impl Stepper<'_> {
    /// Right-hand side; delayed values past the last breakpoint come from `tentative`.
    fn rhs(
        &self,
        sol: &DenseSolution,
        tentative: &Hermite,
        t: f64,
        y: f64,
        overlap: &mut bool,
    ) -> Result<f64> {
        let t_last = sol.t_end();
        self.model.rhs(self.p, t, y, &mut |s| {
            if s <= t_last {
                sol.evaluate(s).map_err(|e| match e {
                    Error::OutOfRange { t, lo, hi } => Error::HistoryOutOfRange { t, lo, hi },
                    other => other,
                })
            } else {
                *overlap = true;
                Ok(tentative.eval(s))
            }
        })
    }

    /// One attempted step of size `h`; returns `(y_new, f_new, error estimate)`.
    fn attempt(
        &self,
        sol: &DenseSolution,
        t: f64,
        y: f64,
        k1: f64,
        h: f64,
        tol: f64,
    ) -> Result<Option<(f64, f64, f64)>> {
        let mut tentative = Hermite {
            t0: t,
            t1: t + h,
            y0: y,
            y1: y + h * k1,
            d0: k1,
            d1: k1,
        };
        let mut previous: Option<f64> = None;
        for _ in 0..MAX_FIXED_POINT {
            let mut overlap = false;
            let k2 = self.rhs(
                sol,
                &tentative,
                t + C[1] * h,
                y + 0.5 * h * k1,
                &mut overlap,
            )?;
            let k3 = self.rhs(
                sol,
                &tentative,
                t + C[2] * h,
                y + 0.5 * h * k2,
                &mut overlap,
            )?;
            let k4 = self.rhs(sol, &tentative, t + C[3] * h, y + h * k3, &mut overlap)?;
            let y5 = y + h * (A5[0] * k1 + A5[1] * k2 + A5[2] * k3 + A5[3] * k4);
            let k5 = self.rhs(sol, &tentative, t + C[4] * h, y5, &mut overlap)?;
            let k = [k1, k2, k3, k4, k5];
            let y_new = y + h * (0..5).map(|i| B[i] * k[i]).sum::<f64>();
            let err = h * (0..5).map(|i| (B[i] - B_HAT[i]) * k[i]).sum::<f64>();
            tentative.y1 = y_new;
            let f_new = self.rhs(sol, &tentative, t + h, y_new, &mut overlap)?;
            if !overlap {
                return Ok(Some((y_new, f_new, err)));
            }
            if let Some(prev) = previous {
                if (prev - y_new).abs() <= 0.1 * tol {
                    return Ok(Some((y_new, f_new, err)));
                }
            }
            previous = Some(y_new);
            tentative.d1 = f_new;
        }
        Ok(None)
    }
}

/// Integrates the state-dependent equation from the end of `history` to `t_end`.
pub fn integrate(
    p: &Parameters,
    history: Arc<dyn HistoryLookup>,
    t_end: f64,
    opts: &IntegrationOptions,
) -> Result<DenseSolution> {
    integrate_model(&StateDependent, p, history, t_end, opts)
}

fn check_history(h: &dyn HistoryLookup, needed: f64) -> Result<()> {
    let (lo, hi) = h.domain();
    if hi - lo < needed * (1.0 - 1e-12) {
        return Err(Error::HistoryTooShort {
            needed,
            available: hi - lo,
        });
    }
    let n = 400;
    let dt = (hi - lo) / n as f64;
    let mut prev = h.eval_unchecked(lo);
    for i in 1..=n {
        let v = h.eval_unchecked(lo + i as f64 * dt);
        if !v.is_finite() || ((v - prev) / dt).abs() > 1e8 {
            return Err(Error::InvalidParameters(
                "initial history must be finite and Lipschitz".into(),
            ));
        }
        prev = v;
    }
    Ok(())
}

/// Integrates any registered right-hand side.
pub fn integrate_model(
    model: &dyn DelayModel,
    p: &Parameters,
    history: Arc<dyn HistoryLookup>,
    t_end: f64,
    opts: &IntegrationOptions,
) -> Result<DenseSolution> {
    opts.validate()?;
    p.validate()?;
    check_history(history.as_ref(), model.max_lag(p))?;
    let bounds = if opts.bound_check && model.requires_well_posedness() {
        match solution_bound_interval(p) {
            Ok(b) => Some(b),
            Err(e) => {
                log::warn!("bound check disabled: {e}");
                None
            }
        }
    } else {
        None
    };

    let t0 = history.domain().1;
    let u0 = history.eval_unchecked(t0);
    let stepper = Stepper { model, p };
    let mut sol = DenseSolution::start(history, t0, u0, 0.0);
    let dummy = Hermite {
        t0,
        t1: t0 + 1.0,
        y0: u0,
        y1: u0,
        d0: 0.0,
        d1: 0.0,
    };
    let mut k1 = stepper.rhs(&sol, &dummy, t0, u0, &mut false)?;
    sol.ds[0] = k1;

    let mut t = t0;
    let mut y = u0;
    let mut h = opts.initial_step.unwrap_or(0.01).min(opts.max_step);
    let mut err_prev: f64 = 1.0;
    let mut steps = 0usize;
    while t < t_end {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::NoConvergence {
                iterations: opts.max_steps,
                residual: t_end - t,
            });
        }
        let last = t + h >= t_end;
        let h_try = if last { t_end - t } else { h };
        let tol = opts.atol + opts.rtol * y.abs();
        match stepper.attempt(&sol, t, y, k1, h_try, tol)? {
            Some((y_new, f_new, err)) => {
                let scale = opts.atol + opts.rtol * y.abs().max(y_new.abs());
                let e = (err / scale).abs().max(1e-10);
                if e <= 1.0 {
                    let t_new = if last { t_end } else { t + h_try };
                    if let Some((lo, hi)) = bounds {
                        if y_new <= lo - BOUND_SLACK || y_new >= hi + BOUND_SLACK {
                            return Err(Error::BoundViolated {
                                t: t_new,
                                u: y_new,
                                lo,
                                hi,
                            });
                        }
                    }
                    sol.ts.push(t_new);
                    sol.us.push(y_new);
                    sol.ds.push(f_new);
                    t = t_new;
                    y = y_new;
                    k1 = f_new;
                    let factor = SAFETY * e.powf(-PI_ALPHA) * err_prev.powf(PI_BETA);
                    if !last {
                        h = (h_try * factor.clamp(0.2, 5.0)).min(opts.max_step);
                    }
                    err_prev = e;
                } else {
                    h = h_try * (SAFETY * e.powf(-0.25)).clamp(0.2, 1.0);
                }
            }
            None => h = 0.5 * h_try,
        }
        if h < 1e-12 * t.abs().max(1.0) {
            return Err(Error::StepCollapse { step: h, at: t });
        }
    }
    Ok(sol)
}

/// A downward crossing of `u = 0` with the delayed coordinates used for the section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub t: f64,
    pub u_a1: f64,
    pub u_a2: f64,
    pub du: f64,
}

const EVENT_TOL: f64 = 1e-10;

/// Root of a Hermite piece on `[a, b]` with `u(a) > 0 >= u(b)`, by Illinois false position.
fn refine(piece: &Hermite, mut a: f64, mut b: f64) -> f64 {
    let (mut fa, mut fb) = (piece.eval(a), piece.eval(b));
    if fb == 0.0 {
        return b;
    }
    let mut side = 0;
    for _ in 0..200 {
        let mut m = (a * fb - b * fa) / (fb - fa);
        if !(m > a && m < b) {
            m = 0.5 * (a + b);
        }
        let fm = piece.eval(m);
        if fm.abs() < 1e-14 || b - a < 1e-15 * (1.0 + b.abs()) {
            return m;
        }
        if fm > 0.0 {
            a = m;
            fa = fm;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        } else {
            b = m;
            fb = fm;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        }
    }
    0.5 * (a + b)
}

/// All downward zero crossings of `u` after `t0 + skip`.
pub fn find_events(sol: &DenseSolution, p: &Parameters, skip: f64) -> Vec<EventRecord> {
    let start = sol.t0() + skip;
    let mut out = Vec::new();
    for i in 0..sol.ts.len().saturating_sub(1) {
        if sol.ts[i + 1] <= start {
            continue;
        }
        let (u0, u1) = (sol.us[i], sol.us[i + 1]);
        if !(u0 > 0.0 && u1 <= 0.0) {
            continue;
        }
        let piece = sol.piece(i);
        let t = refine(&piece, sol.ts[i], sol.ts[i + 1]);
        if t <= start {
            continue;
        }
        let u = piece.eval(t);
        let du = piece.derivative(t);
        if u.abs() >= EVENT_TOL || du >= 0.0 {
            continue;
        }
        let (Ok(u_a1), Ok(u_a2)) = (sol.evaluate(t - p.a1), sol.evaluate(t - p.a2)) else {
            continue;
        };
        out.push(EventRecord { t, u_a1, u_a2, du });
    }
    out
}
