use super::{char_fn_derivative, hopf_residual};
use crate::error::{Error, Result};
use crate::params::Parameters;
use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// A point on a Hopf curve: `±i omega` are characteristic roots at `(kappa1, kappa2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopfPoint {
    pub kappa1: f64,
    pub kappa2: f64,
    pub omega: f64,
    pub branch_label: String,
}

impl HopfPoint {
    pub fn residual(&self, template: &Parameters) -> f64 {
        let p = (*template).set_kappa(self.kappa1, self.kappa2);
        hopf_residual(&p, self.omega).norm()
    }
}

/// Which feedback strength `solve_hopf` is allowed to move.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FreeKappa {
    Kappa1,
    Kappa2,
}

/// The four Hopf curves with built-in seeds at the default parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    H1,
    H2,
    H3,
    Hu,
}

impl Branch {
    pub const ALL: [Branch; 4] = [Branch::H1, Branch::H2, Branch::H3, Branch::Hu];

    pub fn label(self) -> &'static str {
        match self {
            Branch::H1 => "H1",
            Branch::H2 => "H2",
            Branch::H3 => "H3",
            Branch::Hu => "Hu",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Branch::ALL
            .into_iter()
            .find(|b| b.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownName {
                kind: "branch",
                name: s.to_string(),
            })
    }
}

/// Starting guess for a branch: `kappa2` held fixed, `(kappa1, omega)` free.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchSeed {
    pub kappa1: f64,
    pub kappa2: f64,
    pub omega: f64,
}

/// Seeds from an omega-grid scan at the default parameters: the `Hj` on `kappa2 = 0`, `Hu` on `kappa2 = 4.7`.
pub fn builtin_seed(branch: Branch) -> BranchSeed {
    let (kappa1, kappa2, omega) = match branch {
        Branch::H1 => (5.192225327690635, 0.0, 2.0968318610495156),
        Branch::H2 => (8.07125123195748, 0.0, 6.525534188813598),
        Branch::H3 => (12.150619716710953, 0.0, 11.183696146629053),
        Branch::Hu => (0.45341761847789996, 4.7, 1.5308157884394764),
    };
    BranchSeed {
        kappa1,
        kappa2,
        omega,
    }
}

const NEWTON_MAX_ITER: usize = 50;
const HOPF_TOL: f64 = 1e-12;

/// Real 2x3 Jacobian of `(Re, Im) Delta(i omega)` with respect to `(kappa1, kappa2, omega)`.
fn residual_jacobian(p: &Parameters, omega: f64) -> [[f64; 3]; 2] {
    let iw = Complex64::new(0.0, omega);
    let d1 = (-p.a1 * iw).exp();
    let d2 = (-p.a2 * iw).exp();
    let dw = Complex64::i() * char_fn_derivative(p, iw);
    [[d1.re, d2.re, dw.re], [d1.im, d2.im, dw.im]]
}

/// Newton solve of `Delta(i omega) = 0` for one free feedback strength and `omega`.
///
/// `seed` is `(kappa_free, omega)`; the other strength is taken from `p`.
pub fn solve_hopf(p: &Parameters, free: FreeKappa, seed: (f64, f64)) -> Result<HopfPoint> {
    let col = match free {
        FreeKappa::Kappa1 => 0,
        FreeKappa::Kappa2 => 1,
    };
    let mut q = *p;
    let (mut k, mut w) = seed;
    let mut residual = f64::INFINITY;
    for _ in 0..NEWTON_MAX_ITER {
        set_free(&mut q, free, k);
        let r = hopf_residual(&q, w);
        residual = r.norm();
        if residual < HOPF_TOL && w > 1e-8 {
            return Ok(HopfPoint {
                kappa1: q.kappa1,
                kappa2: q.kappa2,
                omega: w,
                branch_label: String::new(),
            });
        }
        let jac = residual_jacobian(&q, w);
        let m = Matrix2::new(jac[0][col], jac[0][2], jac[1][col], jac[1][2]);
        if m.determinant().abs() < 1e-14 {
            return Err(Error::JacobianSingular("hopf residual"));
        }
        let step = m
            .lu()
            .solve(&Vector2::new(-r.re, -r.im))
            .ok_or(Error::JacobianSingular("hopf residual"))?;
        // damped: halve until the residual decreases
        let mut t = 1.0;
        loop {
            let (kt, wt) = (k + t * step[0], w + t * step[1]);
            set_free(&mut q, free, kt);
            let rt = hopf_residual(&q, wt).norm();
            if rt < residual || t < 1e-4 {
                k = kt;
                w = wt;
                break;
            }
            t *= 0.5;
        }
    }
    Err(Error::NoConvergence {
        iterations: NEWTON_MAX_ITER,
        residual,
    })
}

fn set_free(p: &mut Parameters, free: FreeKappa, value: f64) {
    match free {
        FreeKappa::Kappa1 => p.kappa1 = value,
        FreeKappa::Kappa2 => p.kappa2 = value,
    }
}

/// Rectangle in the `(kappa1, kappa2)` plane that bounds a trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceBox {
    pub kappa1: (f64, f64),
    pub kappa2: (f64, f64),
}

impl Default for TraceBox {
    fn default() -> Self {
        TraceBox {
            kappa1: (0.0, 14.0),
            kappa2: (0.0, 4.75),
        }
    }
}

impl TraceBox {
    fn contains(&self, k1: f64, k2: f64) -> bool {
        let slack = 1e-9;
        k1 >= self.kappa1.0 - slack
            && k1 <= self.kappa1.1 + slack
            && k2 >= self.kappa2.0 - slack
            && k2 <= self.kappa2.1 + slack
    }
}

const STEP_MIN: f64 = 1e-4;
const STEP_MAX: f64 = 0.1;
const STEP_COLLAPSE: f64 = 1e-10;
const MAX_POINTS: usize = 100_000;

fn tangent(p: &Parameters, x: &Vector3<f64>) -> Vector3<f64> {
    let q = (*p).set_kappa(x[0], x[1]);
    let j = residual_jacobian(&q, x[2]);
    let r0 = Vector3::new(j[0][0], j[0][1], j[0][2]);
    let r1 = Vector3::new(j[1][0], j[1][1], j[1][2]);
    r0.cross(&r1).normalize()
}

/// Newton corrector on the residual plus the arclength constraint `t . (x - x_pred) = 0`.
fn correct(p: &Parameters, pred: Vector3<f64>, t: &Vector3<f64>) -> Option<(Vector3<f64>, usize)> {
    let mut x = pred;
    for it in 0..8 {
        let q = (*p).set_kappa(x[0], x[1]);
        let r = hopf_residual(&q, x[2]);
        let c = t.dot(&(x - pred));
        if r.norm() < HOPF_TOL * 0.1 && c.abs() < 1e-12 {
            return Some((x, it));
        }
        let j = residual_jacobian(&q, x[2]);
        let m = Matrix3::new(
            j[0][0], j[0][1], j[0][2], j[1][0], j[1][1], j[1][2], t[0], t[1], t[2],
        );
        let dx = m.lu().solve(&Vector3::new(-r.re, -r.im, -c))?;
        x += dx;
        if !x.iter().all(|v| v.is_finite()) {
            return None;
        }
    }
    let q = (*p).set_kappa(x[0], x[1]);
    (hopf_residual(&q, x[2]).norm() < HOPF_TOL).then_some((x, 8))
}

/// Pseudo-arclength continuation of one Hopf curve inside `bounds`.
///
/// The seed is polished with [`solve_hopf`] at fixed `kappa2`, then the curve
/// is followed in both directions until it leaves the box. Points are
/// returned ordered along the curve.
pub fn trace_hopf_curve(
    template: &Parameters,
    branch: Branch,
    bounds: TraceBox,
    step: f64,
) -> Result<Vec<HopfPoint>> {
    let seed = builtin_seed(branch);
    trace_from_seed(template, branch.label(), seed, bounds, step)
}

pub(crate) fn trace_from_seed(
    template: &Parameters,
    label: &str,
    seed: BranchSeed,
    bounds: TraceBox,
    step: f64,
) -> Result<Vec<HopfPoint>> {
    let p = (*template).set_kappa(seed.kappa1, seed.kappa2);
    let start = solve_hopf(&p, FreeKappa::Kappa1, (seed.kappa1, seed.omega))
        .map_err(|e| Error::SeedNotOnBranch(format!("{label}: {e}")))?;
    if (start.omega - seed.omega).abs() > 0.25 || !bounds.contains(start.kappa1, start.kappa2) {
        return Err(Error::SeedNotOnBranch(format!(
            "{label}: seed converged to ({}, {}, {})",
            start.kappa1, start.kappa2, start.omega
        )));
    }
    let x0 = Vector3::new(start.kappa1, start.kappa2, start.omega);
    let h0 = step.clamp(STEP_MIN, STEP_MAX);
    let t0 = tangent(template, &x0);
    let forward = march(template, x0, t0, h0, bounds)?;
    let backward = march(template, x0, -t0, h0, bounds)?;

    let mut pts: Vec<Vector3<f64>> = backward.into_iter().rev().collect();
    pts.push(x0);
    pts.extend(forward);
    Ok(pts
        .into_iter()
        .map(|x| HopfPoint {
            kappa1: x[0],
            kappa2: x[1],
            omega: x[2],
            branch_label: label.to_string(),
        })
        .collect())
}

fn march(
    p: &Parameters,
    x0: Vector3<f64>,
    t0: Vector3<f64>,
    h0: f64,
    bounds: TraceBox,
) -> Result<Vec<Vector3<f64>>> {
    let mut out = Vec::new();
    let mut x = x0;
    let mut t = t0;
    let mut h = h0;
    while out.len() < MAX_POINTS {
        match correct(p, x + h * t, &t) {
            Some((xn, iters)) => {
                if xn[2] <= 0.0 {
                    break;
                }
                if !bounds.contains(xn[0], xn[1]) {
                    if let Some(edge) = land_on_edge(p, &x, &xn, bounds) {
                        out.push(edge);
                    }
                    break;
                }
                let mut tn = tangent(p, &xn);
                if tn.dot(&t) < 0.0 {
                    tn = -tn;
                }
                // reject steps that turn too sharply
                if tn.dot(&t) < 0.9 && h > STEP_COLLAPSE * 2.0 {
                    h *= 0.5;
                    continue;
                }
                x = xn;
                t = tn;
                out.push(x);
                if iters <= 3 {
                    h = (h * 1.5).min(STEP_MAX);
                }
                h = h.max(STEP_MIN);
            }
            None => {
                h *= 0.5;
                if h < STEP_COLLAPSE {
                    return Err(Error::StepCollapse { step: h, at: x[0] });
                }
            }
        }
    }
    Ok(out)
}

/// Closes a trace on the box edge crossed between `inside` and `outside`.
fn land_on_edge(
    p: &Parameters,
    inside: &Vector3<f64>,
    outside: &Vector3<f64>,
    bounds: TraceBox,
) -> Option<Vector3<f64>> {
    let edges = [
        (FreeKappa::Kappa2, 0, bounds.kappa1.0),
        (FreeKappa::Kappa2, 0, bounds.kappa1.1),
        (FreeKappa::Kappa1, 1, bounds.kappa2.0),
        (FreeKappa::Kappa1, 1, bounds.kappa2.1),
    ];
    for (free, fixed, level) in edges {
        let (a, b) = (inside[fixed] - level, outside[fixed] - level);
        if a * b > 0.0 || a == 0.0 {
            continue;
        }
        let s = a / (a - b);
        let guess = inside + s * (outside - inside);
        let q = if fixed == 0 {
            (*p).set_kappa(level, guess[1])
        } else {
            (*p).set_kappa(guess[0], level)
        };
        let other = if fixed == 0 { guess[1] } else { guess[0] };
        if let Ok(h) = solve_hopf(&q, free, (other, guess[2])) {
            let x = Vector3::new(h.kappa1, h.kappa2, h.omega);
            if bounds.contains(x[0], x[1]) && (x - guess).norm() < (outside - inside).norm() {
                return Some(x);
            }
        }
    }
    None
}
