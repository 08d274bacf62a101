//! The state-dependent delay equation, its linear part, and the constant-delay
//! cubic truncation used for the center-manifold reduction.

use crate::error::{Error, Result};
use crate::history::HistoryLookup;
use crate::params::Parameters;

/// State-dependent delay arguments `alpha_i = t - a_i - c u(t)`.
pub fn delay_arguments(p: &Parameters, t: f64, u_now: f64) -> (f64, f64) {
    (t - p.a1 - p.c * u_now, t - p.a2 - p.c * u_now)
}

/// Global bound `tau = a2 + (a1 / gamma)(kappa1 + kappa2)` on the state-dependent delays.
pub fn max_delay_bound(p: &Parameters) -> Result<f64> {
    ensure_well_posed(p)?;
    Ok(p.a2 + p.a1 / p.gamma * (p.kappa1 + p.kappa2))
}

/// Open interval `(-a1/c, a1 (kappa1 + kappa2) / (gamma c))` that solutions never leave.
pub fn solution_bound_interval(p: &Parameters) -> Result<(f64, f64)> {
    ensure_well_posed(p)?;
    if p.c == 0.0 {
        return Err(Error::DegenerateStateDependence);
    }
    Ok((-p.a1 / p.c, p.a1 / (p.gamma * p.c) * (p.kappa1 + p.kappa2)))
}

fn ensure_well_posed(p: &Parameters) -> Result<()> {
    if p.is_well_posed() {
        Ok(())
    } else {
        Err(Error::WellPosednessViolated {
            gamma: p.gamma,
            kappa2: p.kappa2,
        })
    }
}

/// Right-hand side of the full state-dependent equation at time `t`.
pub fn evaluate_rhs(p: &Parameters, h: &dyn HistoryLookup, t: f64) -> Result<f64> {
    let u = h.value(t)?;
    StateDependent.rhs(p, t, u, &mut |s| h.value(s))
}

/// `L u(t) = -gamma u(t) - kappa1 u(t - a1) - kappa2 u(t - a2)`.
pub fn difference_l(p: &Parameters, h: &dyn HistoryLookup, t: f64) -> Result<f64> {
    let u = h.value(t)?;
    Linear.rhs(p, t, u, &mut |s| h.value(s))
}

/// `L` applied twice, expanded into constant-delay terms.
pub fn difference_l2(p: &Parameters, h: &dyn HistoryLookup, t: f64) -> Result<f64> {
    let g = p.gamma;
    let (k1, k2) = (p.kappa1, p.kappa2);
    let at = |m: f64, n: f64| h.value(t - m * p.a1 - n * p.a2);
    Ok(g * g * at(0.0, 0.0)?
        + 2.0 * g * k1 * at(1.0, 0.0)?
        + 2.0 * g * k2 * at(0.0, 1.0)?
        + k1 * k1 * at(2.0, 0.0)?
        + 2.0 * k1 * k2 * at(1.0, 1.0)?
        + k2 * k2 * at(0.0, 2.0)?)
}

/// Constant-delay truncation of the state-dependent equation up to cubic order.
pub fn rhs_cubic_truncation(p: &Parameters, h: &dyn HistoryLookup, t: f64) -> Result<f64> {
    let u = h.value(t)?;
    CubicTruncation.rhs(p, t, u, &mut |s| h.value(s))
}

/// A right-hand side `u'(t) = f(t, u(t), u(past))` that the integrator can drive.
///
/// `past` returns solution values at earlier (or, for state-dependent
/// delays, possibly current-step) times.
pub trait DelayModel: Send + Sync {
    fn name(&self) -> &'static str;

    fn description(&self) -> &'static str;

    /// Largest lag below `t` the model may query.
    fn max_lag(&self, p: &Parameters) -> f64;

    /// Whether the model tolerates `gamma <= kappa2` (no well-posedness bound needed).
    fn requires_well_posedness(&self) -> bool {
        false
    }

    fn rhs(
        &self,
        p: &Parameters,
        t: f64,
        u_now: f64,
        past: &mut dyn FnMut(f64) -> Result<f64>,
    ) -> Result<f64>;
}

/// The full equation with state-dependent delays.
#[derive(Debug, Clone, Copy, Default)]
pub struct StateDependent;

impl DelayModel for StateDependent {
    fn name(&self) -> &'static str {
        "state-dependent"
    }
    fn description(&self) -> &'static str {
        "full equation with delays a_i + c u(t)"
    }
    fn max_lag(&self, p: &Parameters) -> f64 {
        p.a2 + p.a1 / p.gamma * (p.kappa1 + p.kappa2)
    }
    fn requires_well_posedness(&self) -> bool {
        true
    }
    fn rhs(
        &self,
        p: &Parameters,
        t: f64,
        u_now: f64,
        past: &mut dyn FnMut(f64) -> Result<f64>,
    ) -> Result<f64> {
        let (alpha1, alpha2) = delay_arguments(p, t, u_now);
        for alpha in [alpha1, alpha2] {
            if alpha > t {
                return Err(Error::DelayAdvanced { t, alpha });
            }
        }
        Ok(-p.gamma * u_now - p.kappa1 * past(alpha1)? - p.kappa2 * past(alpha2)?)
    }
}

/// The linearization about `u = 0` (constant delays `a1`, `a2`).
#[derive(Debug, Clone, Copy, Default)]
pub struct Linear;

impl DelayModel for Linear {
    fn name(&self) -> &'static str {
        "linear"
    }
    fn description(&self) -> &'static str {
        "linearization with constant delays a1, a2"
    }
    fn max_lag(&self, p: &Parameters) -> f64 {
        p.a2
    }
    fn rhs(
        &self,
        p: &Parameters,
        t: f64,
        u_now: f64,
        past: &mut dyn FnMut(f64) -> Result<f64>,
    ) -> Result<f64> {
        Ok(-p.gamma * u_now - p.kappa1 * past(t - p.a1)? - p.kappa2 * past(t - p.a2)?)
    }
}

/// Cubic constant-delay truncation; queries only `t - m a1 - n a2` with `1 <= m + n <= 3`.
#[derive(Debug, Clone, Copy, Default)]
pub struct CubicTruncation;

impl DelayModel for CubicTruncation {
    fn name(&self) -> &'static str {
        "cubic"
    }
    fn description(&self) -> &'static str {
        "cubic truncation with nine constant delays"
    }
    fn max_lag(&self, p: &Parameters) -> f64 {
        3.0 * p.a2
    }
    fn rhs(
        &self,
        p: &Parameters,
        t: f64,
        u: f64,
        past: &mut dyn FnMut(f64) -> Result<f64>,
    ) -> Result<f64> {
        // lag[m][n] = u(t - m a1 - n a2)
        let mut lag = [[0.0; 4]; 4];
        lag[0][0] = u;
        for m in 0..=3usize {
            for n in 0..=(3 - m) {
                if m + n > 0 {
                    lag[m][n] = past(t - m as f64 * p.a1 - n as f64 * p.a2)?;
                }
            }
        }
        let g = p.gamma;
        let c = p.c;
        let kappa = [p.kappa1, p.kappa2];
        // unit offsets for delay index i
        let e = [[1usize, 0usize], [0, 1]];
        let at = |ds: &[usize]| {
            let (mut m, mut n) = (0, 0);
            for &i in ds {
                m += e[i][0];
                n += e[i][1];
            }
            lag[m][n]
        };

        let mut rhs = -g * u - kappa[0] * at(&[0]) - kappa[1] * at(&[1]);
        for i in 0..2 {
            let inner: f64 = g * at(&[i]) + (0..2).map(|j| kappa[j] * at(&[i, j])).sum::<f64>();
            rhs -= kappa[i] * c * u * inner;
        }
        for i in 0..2 {
            for j in 0..2 {
                let inner: f64 =
                    g * at(&[i, j]) + (0..2).map(|m| kappa[m] * at(&[i, j, m])).sum::<f64>();
                rhs -= kappa[i] * kappa[j] * c * c * u * at(&[i]) * inner;
            }
        }
        let mut l2 = 0.0;
        for i in 0..2 {
            let mut inner = g * g * at(&[i]);
            for j in 0..2 {
                inner += 2.0 * g * kappa[j] * at(&[i, j]);
                for m in 0..2 {
                    inner += kappa[j] * kappa[m] * at(&[i, j, m]);
                }
            }
            l2 += kappa[i] * inner;
        }
        rhs -= 0.5 * (c * u) * (c * u) * l2;
        Ok(rhs)
    }
}
