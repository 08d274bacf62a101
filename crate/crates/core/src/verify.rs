//! Golden-value comparisons and invariant checks with pass/fail margins.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{detect_locking, poincare_trace, DEFAULT_SKIP};
use crate::error::{Error, Result};
use crate::golden::{agreeing_digits, agreeing_digits_complex, TABLE};
use crate::history::FnHistory;
use crate::integrator::{integrate, IntegrationOptions};
use crate::model::{max_delay_bound, solution_bound_interval};
use crate::normalform::{analyze, bilinear, complex_obj, NormalForm, Taylor};
use crate::params::Parameters;
use crate::spectral::{
    find_hopf_hopf, solve_hopf, trace_hopf_curve, Branch, FreeKappa, HopfHopfPoint, TraceBox,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckLine {
    pub name: String,
    pub status: Status,
    /// Positive when the check passes.
    pub margin: Option<f64>,
    pub detail: String,
}

impl CheckLine {
    /// `value` must reach at least `limit`.
    fn at_least(name: String, value: f64, limit: f64) -> Self {
        Self {
            name,
            status: if value >= limit {
                Status::Pass
            } else {
                Status::Fail
            },
            margin: Some(value - limit),
            detail: format!("{value:.3} >= {limit}"),
        }
    }

    /// `value` must stay below `limit`.
    fn below(name: String, value: f64, limit: f64) -> Self {
        Self {
            name,
            status: if value < limit {
                Status::Pass
            } else {
                Status::Fail
            },
            margin: Some(limit - value),
            detail: format!("{value:.3e} < {limit:e}"),
        }
    }

    fn flag(name: String, pass: bool, detail: String) -> Self {
        Self {
            name,
            status: if pass { Status::Pass } else { Status::Fail },
            margin: None,
            detail,
        }
    }

    fn failed(name: String, err: &Error) -> Self {
        Self::flag(name, false, err.to_string())
    }

    fn skipped(name: String, reason: &str) -> Self {
        Self {
            name,
            status: Status::Skipped,
            margin: None,
            detail: reason.to_string(),
        }
    }
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
        };
        write!(f, "{tag}  {:<40} {}", self.name, self.detail)?;
        if let Some(m) = self.margin {
            write!(f, "  (margin {m:.3e})")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub lines: Vec<CheckLine>,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.lines.iter().all(|l| l.status != Status::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckLine> {
        self.lines.iter().filter(|l| l.status == Status::Fail)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lines {
            writeln!(f, "{l}")?;
        }
        let failed = self.failures().count();
        write!(f, "{} checks, {} failed", self.lines.len(), failed)
    }
}

/// Reference values at one Hopf-Hopf point, in a file-friendly form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenEntry {
    pub name: String,
    /// `(kappa1, omega1, kappa2, omega2)` starting guess.
    pub seed: [f64; 4],
    pub hh: HopfHopfPoint,
    #[serde(with = "complex_obj")]
    pub gt2100_1: Complex64,
    #[serde(with = "complex_obj")]
    pub gt1011_1: Complex64,
    #[serde(with = "complex_obj")]
    pub gt1110_2: Complex64,
    #[serde(with = "complex_obj")]
    pub gt0021_2: Complex64,
    #[serde(with = "complex_obj", rename = "G2100_1")]
    pub big_g2100_1: Complex64,
    #[serde(with = "complex_obj", rename = "G1011_1")]
    pub big_g1011_1: Complex64,
    #[serde(with = "complex_obj", rename = "G1110_2")]
    pub big_g1110_2: Complex64,
    #[serde(with = "complex_obj", rename = "G0021_2")]
    pub big_g0021_2: Complex64,
    pub p11: f64,
    pub p12: f64,
    pub p21: f64,
    pub p22: f64,
    pub theta: f64,
    pub delta: f64,
}

/// The built-in reference set at the default parameters.
pub fn builtin_golden() -> Vec<GoldenEntry> {
    TABLE
        .iter()
        .map(|g| GoldenEntry {
            name: g.name.to_string(),
            seed: [g.seed.0, g.seed.1, g.seed.2, g.seed.3],
            hh: g.hh,
            gt2100_1: g.gt2100_1,
            gt1011_1: g.gt1011_1,
            gt1110_2: g.gt1110_2,
            gt0021_2: g.gt0021_2,
            big_g2100_1: g.g2100_1,
            big_g1011_1: g.g1011_1,
            big_g1110_2: g.g1110_2,
            big_g0021_2: g.g0021_2,
            p11: g.p11,
            p12: g.p12,
            p21: g.p21,
            p22: g.p22,
            theta: g.theta,
            delta: g.delta,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Simulations with compliant histories for the bound checks.
    pub bound_simulations: usize,
    pub dynamics: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            bound_simulations: 6,
            dynamics: true,
        }
    }
}

pub const LOCATION_DIGITS: f64 = 12.0;
pub const COEFF_DIGITS: f64 = 9.0;
pub const AMPLITUDE_DIGITS: f64 = 12.0;

/// Runs all checks. `p` supplies the constants and the feedback strengths for the simulations.
pub fn verify(p: &Parameters, golden: &[GoldenEntry], opts: &VerifyOptions) -> VerifyReport {
    let mut r = VerifyReport::default();
    for g in golden {
        check_golden(p, g, &mut r.lines);
    }
    check_anchors(p, &mut r.lines);
    check_bounds(p, opts.bound_simulations, &mut r.lines);
    if opts.dynamics {
        check_locking(p, &mut r.lines);
    }
    r
}

fn check_golden(p: &Parameters, g: &GoldenEntry, out: &mut Vec<CheckLine>) {
    let n = &g.name;
    let [k1, w1, k2, w2] = g.seed;
    let hh = match find_hopf_hopf(p, (k1, w1, k2, w2)) {
        Ok(hh) => hh,
        Err(e) => return out.push(CheckLine::failed(format!("{n} location"), &e)),
    };
    let loc = [
        agreeing_digits(hh.kappa1, g.hh.kappa1),
        agreeing_digits(hh.kappa2, g.hh.kappa2),
        agreeing_digits(hh.omega1, g.hh.omega1),
        agreeing_digits(hh.omega2, g.hh.omega2),
    ];
    out.push(CheckLine::at_least(
        format!("{n} location digits"),
        min(&loc),
        LOCATION_DIGITS,
    ));
    out.push(CheckLine::below(
        format!("{n} location residual"),
        hh.residual(p),
        1e-13,
    ));

    let nf = match analyze(p, &hh, &Taylor) {
        Ok(nf) => nf,
        Err(e) => return out.push(CheckLine::failed(format!("{n} normal form"), &e)),
    };
    let gt = [
        agreeing_digits_complex(nf.scaled.gt2100_1, g.gt2100_1),
        agreeing_digits_complex(nf.scaled.gt1011_1, g.gt1011_1),
        agreeing_digits_complex(nf.scaled.gt1110_2, g.gt1110_2),
        agreeing_digits_complex(nf.scaled.gt0021_2, g.gt0021_2),
    ];
    out.push(CheckLine::at_least(
        format!("{n} scaled cubic digits"),
        min(&gt),
        COEFF_DIGITS,
    ));
    let big = [
        agreeing_digits_complex(nf.g.g2100_1, g.big_g2100_1),
        agreeing_digits_complex(nf.g.g1011_1, g.big_g1011_1),
        agreeing_digits_complex(nf.g.g1110_2, g.big_g1110_2),
        agreeing_digits_complex(nf.g.g0021_2, g.big_g0021_2),
    ];
    out.push(CheckLine::at_least(
        format!("{n} G digits"),
        min(&big),
        COEFF_DIGITS,
    ));
    let a = &nf.amplitude;
    let amp = [
        agreeing_digits(a.p11, g.p11),
        agreeing_digits(a.p12, g.p12),
        agreeing_digits(a.p21, g.p21),
        agreeing_digits(a.p22, g.p22),
        agreeing_digits(a.theta, g.theta),
        agreeing_digits(a.delta, g.delta),
    ];
    out.push(CheckLine::at_least(
        format!("{n} p, theta, delta digits"),
        min(&amp),
        AMPLITUDE_DIGITS,
    ));

    let signs = a.p11 < 0.0 && a.p22 < 0.0 && a.theta > 0.0 && a.delta < 0.0;
    out.push(CheckLine::flag(
        format!("{n} case III"),
        signs && nf.case.is_case_iii(),
        format!("case {}", nf.case),
    ));
    for c in &nf.nondegeneracy.conditions {
        out.push(CheckLine::flag(
            format!("{n} nondegeneracy {}", c.name),
            c.pass,
            format!("{:.3e}", c.value),
        ));
    }
    out.push(CheckLine::below(
        format!("{n} biorthonormality"),
        biorthonormality_error(&nf),
        1e-12,
    ));
    let (ode, bnd) = nf.w.max_residuals(&nf.params, 20);
    out.push(CheckLine::below(
        format!("{n} w residuals"),
        ode.max(bnd),
        1e-10,
    ));
    match analyze(p, &hh.swapped(), &Taylor) {
        Ok(sw) => out.push(CheckLine::below(
            format!("{n} frequency swap"),
            swap_error(&nf, &sw),
            1e-10,
        )),
        Err(e) => out.push(CheckLine::failed(format!("{n} frequency swap"), &e)),
    }
}

fn min(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

fn biorthonormality_error(nf: &NormalForm) -> f64 {
    let b = &nf.basis;
    let mut err: f64 = 0.0;
    for j in 1..=2 {
        for k in 1..=2 {
            let want = if j == k { 1.0 } else { 0.0 };
            err = err.max((bilinear(&nf.params, b.p(j), b.q(k)) - want).norm());
            err = err.max(bilinear(&nf.params, b.p(j), &b.q(k).conj()).norm());
        }
    }
    err
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
}

fn swap_error(a: &NormalForm, b: &NormalForm) -> f64 {
    [
        rel(a.scaled.gt2100_1, b.scaled.gt0021_2),
        rel(a.scaled.gt1011_1, b.scaled.gt1110_2),
        rel(a.g.g2100_1, b.g.g0021_2),
        rel(a.g.g1011_1, b.g.g1110_2),
        rel(a.amplitude.theta.into(), b.amplitude.delta.into()),
        rel(a.amplitude.delta.into(), b.amplitude.theta.into()),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

/// `kappa1` on the first Hopf curve at the given `kappa2`.
pub fn h1_at_kappa2(template: &Parameters, kappa2: f64) -> Result<f64> {
    let curve = trace_hopf_curve(template, Branch::H1, TraceBox::default(), 0.02)?;
    let seg = curve
        .windows(2)
        .find(|w| (w[0].kappa2 - kappa2) * (w[1].kappa2 - kappa2) <= 0.0)
        .ok_or_else(|| Error::SeedNotOnBranch(format!("H1 does not reach kappa2 = {kappa2}")))?;
    let s = (kappa2 - seg[0].kappa2) / (seg[1].kappa2 - seg[0].kappa2);
    let k1 = seg[0].kappa1 + s * (seg[1].kappa1 - seg[0].kappa1);
    let w = seg[0].omega + s * (seg[1].omega - seg[0].omega);
    let p = template.set_kappa(k1, kappa2);
    Ok(solve_hopf(&p, FreeKappa::Kappa1, (k1, w))?.kappa1)
}

/// Smallest `kappa2` reached by the `Hu` curve, refined by a parabola through the lowest vertices.
pub fn hu_min_kappa2(template: &Parameters) -> Result<f64> {
    let curve = trace_hopf_curve(template, Branch::Hu, TraceBox::default(), 0.02)?;
    let i = (0..curve.len())
        .min_by(|&a, &b| curve[a].kappa2.total_cmp(&curve[b].kappa2))
        .ok_or(Error::NoConvergence {
            iterations: 0,
            residual: f64::NAN,
        })?;
    if i == 0 || i + 1 == curve.len() {
        return Ok(curve[i].kappa2);
    }
    // parabola in omega through three vertices
    let (x0, x1, x2) = (curve[i - 1].omega, curve[i].omega, curve[i + 1].omega);
    let (y0, y1, y2) = (curve[i - 1].kappa2, curve[i].kappa2, curve[i + 1].kappa2);
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let a = (d12 - d01) / (x2 - x0);
    if a <= 0.0 {
        return Ok(y1);
    }
    let b = d01 - a * (x0 + x1);
    let xm = -b / (2.0 * a);
    Ok(y1 + a * (xm - x1).powi(2) + (2.0 * a * x1 + b) * (xm - x1))
}

fn check_anchors(p: &Parameters, out: &mut Vec<CheckLine>) {
    match h1_at_kappa2(p, 3.0) {
        Ok(k) => out.push(CheckLine::below(
            "H1 at kappa2 = 3".into(),
            (k - 3.2061).abs(),
            1e-3,
        )),
        Err(e) => out.push(CheckLine::failed("H1 at kappa2 = 3".into(), &e)),
    }
    match hu_min_kappa2(p) {
        Ok(k) => out.push(CheckLine::below(
            "Hu minimum kappa2".into(),
            (k - 2.627).abs(),
            5e-3,
        )),
        Err(e) => out.push(CheckLine::failed("Hu minimum kappa2".into(), &e)),
    }
}

/// Deterministic smooth history inside the central part of the bound interval.
pub fn compliant_history(p: &Parameters, k: usize) -> Result<FnHistory> {
    let (lo, hi) = solution_bound_interval(p)?;
    let tau = max_delay_bound(p)?;
    let mid = 0.5 * (lo + hi);
    let half = 0.45 * (hi - lo);
    let w = 0.3 + 0.7 * k as f64;
    let phase = 1.1 * k as f64;
    Ok(FnHistory::new(-tau, 0.0, move |t| {
        mid + half * (0.6 * (w * t + phase).sin() + 0.4 * (0.37 * w * t).cos())
    }))
}

fn check_bounds(p: &Parameters, n: usize, out: &mut Vec<CheckLine>) {
    let name = "bound preservation".to_string();
    if !p.is_well_posed() {
        out.push(CheckLine::skipped(
            name.clone(),
            "gamma <= kappa2: no a-priori solution bound",
        ));
        out.push(CheckLine::skipped(
            "delay positivity".into(),
            "gamma <= kappa2: delays may advance",
        ));
        return;
    }
    if p.c == 0.0 {
        out.push(CheckLine::skipped(
            name,
            "c = 0: bound interval is unbounded",
        ));
        return;
    }
    let (lo, hi) = match solution_bound_interval(p) {
        Ok(b) => b,
        Err(e) => return out.push(CheckLine::failed(name, &e)),
    };
    let mut worst = f64::INFINITY;
    let mut failure = None;
    for k in 0..n {
        let run = compliant_history(p, k)
            .and_then(|h| integrate(p, Arc::new(h), 100.0, &IntegrationOptions::default()));
        match run {
            Ok(sol) => {
                for &u in sol.values() {
                    worst = worst.min(u - lo).min(hi - u);
                }
            }
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    match failure {
        Some(e @ Error::DelayAdvanced { .. }) => {
            out.push(CheckLine::failed("delay positivity".into(), &e))
        }
        Some(e) => out.push(CheckLine::failed(name, &e)),
        None => {
            out.push(CheckLine::at_least(name, worst, 0.0));
            out.push(CheckLine::flag(
                "delay positivity".into(),
                true,
                format!("{n} simulations"),
            ));
        }
    }
}

fn check_locking(template: &Parameters, out: &mut Vec<CheckLine>) {
    let cases: [(f64, Option<(u32, u32)>); 4] = [
        (4.409556, Some((3, 7))),
        (4.44, None),
        (5.79, Some((1, 3))),
        (6.93, Some((1, 4))),
    ];
    for (k1, want) in cases {
        let p = template.set_kappa(k1, 3.0);
        let name = format!("locking at kappa1 = {k1}");
        let run = crate::dynamics::constant_history(&p, 0.01).and_then(|h| {
            let sol = integrate(&p, Arc::new(h), 2000.0, &IntegrationOptions::default())?;
            poincare_trace(&p, &sol, DEFAULT_SKIP)
        });
        match run {
            Ok(tr) => {
                let got = detect_locking(&tr, None).ratio();
                let show = |r: Option<(u32, u32)>| {
                    r.map_or("unresolved".to_string(), |(p, q)| format!("{p}:{q}"))
                };
                out.push(CheckLine::flag(
                    name,
                    got == want,
                    format!("{} (expected {})", show(got), show(want)),
                ));
            }
            Err(e) => out.push(CheckLine::failed(name, &e)),
        }
    }
}
