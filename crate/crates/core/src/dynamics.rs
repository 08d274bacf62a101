//! Poincaré traces, projections, locking detection and parameter sweeps.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::history::{ConstantHistory, HistoryLookup};
use crate::integrator::{find_events, integrate, DenseSolution, EventRecord, IntegrationOptions};
use crate::model::max_delay_bound;
use crate::params::Parameters;

pub const MIN_EVENTS: usize = 20;
pub const DEFAULT_SKIP: f64 = 300.0;
pub const Q_MAX: usize = 13;

/// Section points `(u(t - a1), u(t - a2))` at downward crossings of `u = 0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PoincareTrace {
    pub params: Parameters,
    pub events: Vec<EventRecord>,
}

impl PoincareTrace {
    pub fn points(&self) -> Vec<[f64; 2]> {
        self.events.iter().map(|e| [e.u_a1, e.u_a2]).collect()
    }

    pub fn times(&self) -> Vec<f64> {
        self.events.iter().map(|e| e.t).collect()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn diameter(&self) -> f64 {
        diameter(&self.points())
    }
}

fn dist(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

pub fn poincare_trace(p: &Parameters, sol: &DenseSolution, skip: f64) -> Result<PoincareTrace> {
    let events = find_events(sol, p, skip);
    if events.len() < MIN_EVENTS {
        return Err(Error::TooFewEvents {
            found: events.len(),
            required: MIN_EVENTS,
        });
    }
    Ok(PoincareTrace { params: *p, events })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionSample {
    pub t: f64,
    pub u: f64,
    pub u_a1: f64,
    pub u_a2: f64,
}

/// Uniform samples of `(u(t), u(t - a1), u(t - a2))` on `[t0 + a2, t_end]`.
pub fn project3(sol: &DenseSolution, p: &Parameters, dt: f64) -> Result<Vec<ProjectionSample>> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameters(
            "sampling step must be positive".into(),
        ));
    }
    let start = sol.t0() + p.a2;
    let span = sol.t_end() - start;
    if span < 0.0 {
        return Err(Error::OutOfRange {
            t: start,
            lo: sol.domain().0,
            hi: sol.t_end(),
        });
    }
    let n = (span / dt + 1e-9).floor() as usize + 1;
    (0..n)
        .map(|k| {
            let t = (start + k as f64 * dt).min(sol.t_end());
            Ok(ProjectionSample {
                t,
                u: sol.evaluate(t)?,
                u_a1: sol.evaluate(t - p.a1)?,
                u_a2: sol.evaluate(t - p.a2)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LockingKind {
    Locked,
    QuasiperiodicOrUnresolved,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LockingResult {
    pub kind: LockingKind,
    pub p: Option<u32>,
    pub q: Option<u32>,
    /// Time for one full round through all clusters.
    pub period: Option<f64>,
    pub clusters: usize,
    pub cluster_radii: Vec<f64>,
}

impl LockingResult {
    fn unresolved(clusters: usize, cluster_radii: Vec<f64>) -> Self {
        Self {
            kind: LockingKind::QuasiperiodicOrUnresolved,
            p: None,
            q: None,
            period: None,
            clusters,
            cluster_radii,
        }
    }

    pub fn is_locked(&self) -> bool {
        self.kind == LockingKind::Locked
    }

    pub fn ratio(&self) -> Option<(u32, u32)> {
        self.p.zip(self.q)
    }
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Single-linkage clusters at radius `tol`; labels are numbered by first appearance.
pub fn cluster(points: &[[f64; 2]], tol: f64) -> Vec<usize> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            if dist(&points[i], &points[j]) <= tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut ids = vec![usize::MAX; n];
    let mut next = 0;
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let r = find(&mut parent, i);
        if ids[r] == usize::MAX {
            ids[r] = next;
            next += 1;
        }
        labels.push(ids[r]);
    }
    labels
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Smallest clustering radius, above the integrator's noise floor.
pub const TOL_FLOOR: f64 = 1e-5;

fn diameter(pts: &[[f64; 2]]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            d = d.max(dist(a, b));
        }
    }
    d
}

/// Classifies a trace as `p:q` locked or unresolved.
///
/// Only the trailing half of the trace is used, and its cluster count must
/// agree with that of the trailing quarter. `tol` defaults to `1e-3` times the
/// diameter of the analysed points, but never below [`TOL_FLOOR`]. The stride
/// is reported as `p <= q / 2`, i.e. up to orientation of the section.
pub fn detect_locking(trace: &PoincareTrace, tol: Option<f64>) -> LockingResult {
    let all = trace.points();
    let n = all.len() / 2;
    if n == 0 {
        return LockingResult::unresolved(0, vec![]);
    }
    let pts = &all[all.len() - n..];
    let times = &trace.times()[all.len() - n..];
    let tol = tol.unwrap_or((1e-3 * diameter(pts)).max(TOL_FLOOR));
    let labels = cluster(pts, tol);
    let q = labels.iter().max().unwrap() + 1;

    let mut centers = vec![[0.0; 2]; q];
    let mut counts = vec![0usize; q];
    for (pt, &l) in pts.iter().zip(&labels) {
        centers[l][0] += pt[0];
        centers[l][1] += pt[1];
        counts[l] += 1;
    }
    for (c, &m) in centers.iter_mut().zip(&counts) {
        c[0] /= m as f64;
        c[1] /= m as f64;
    }
    let mut radii = vec![0.0f64; q];
    for (pt, &l) in pts.iter().zip(&labels) {
        radii[l] = radii[l].max(dist(pt, &centers[l]));
    }

    if q > Q_MAX || n < 5 * q {
        return LockingResult::unresolved(q, radii);
    }
    let quarter = cluster(&pts[n - n / 2..], tol);
    if quarter.iter().max().map_or(0, |m| m + 1) != q {
        return LockingResult::unresolved(q, radii);
    }
    if (0..n - q).any(|k| labels[k + q] != labels[k]) {
        return LockingResult::unresolved(q, radii);
    }

    let stride = if q == 1 {
        1
    } else {
        let cx = centers.iter().map(|c| c[0]).sum::<f64>() / q as f64;
        let cy = centers.iter().map(|c| c[1]).sum::<f64>() / q as f64;
        let mut order: Vec<usize> = (0..q).collect();
        let angle = |c: &[f64; 2]| (c[1] - cy).atan2(c[0] - cx);
        order.sort_by(|&a, &b| angle(&centers[a]).total_cmp(&angle(&centers[b])));
        let mut rank = vec![0usize; q];
        for (r, &c) in order.iter().enumerate() {
            rank[c] = r;
        }
        let step = |k: usize| (rank[labels[k + 1]] + q - rank[labels[k]]) % q;
        let s = step(0);
        if s == 0 || gcd(s, q) != 1 || (1..n - 1).any(|k| step(k) != s) {
            return LockingResult::unresolved(q, radii);
        }
        s.min(q - s)
    };

    let rounds = (n - 1) / q;
    let period = (rounds > 0).then(|| (times[rounds * q] - times[0]) / rounds as f64);
    LockingResult {
        kind: LockingKind::Locked,
        p: Some(stride as u32),
        q: Some(q as u32),
        period,
        clusters: q,
        cluster_radii: radii,
    }
}

/// Mean angular advance per return about the trace centroid, in turns.
pub fn rotation_number(trace: &PoincareTrace) -> Option<f64> {
    let pts = trace.points();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let cx = pts.iter().map(|p| p[0]).sum::<f64>() / n;
    let cy = pts.iter().map(|p| p[1]).sum::<f64>() / n;
    let mut total = 0.0;
    for w in pts.windows(2) {
        let a0 = (w[0][1] - cy).atan2(w[0][0] - cx);
        let a1 = (w[1][1] - cy).atan2(w[1][0] - cx);
        total += (a1 - a0).rem_euclid(2.0 * PI);
    }
    Some(total / (2.0 * PI * (n - 1.0)))
}

/// `max u - min u` over `t >= t0 + skip`, with extrema located on the dense output.
pub fn amplitude(sol: &DenseSolution, skip: f64) -> Result<f64> {
    let from = sol.t0() + skip;
    if from >= sol.t_end() {
        return Err(Error::OutOfRange {
            t: from,
            lo: sol.t0(),
            hi: sol.t_end(),
        });
    }
    let ts = sol.breakpoints();
    let mut lo = sol.evaluate(from)?;
    let mut hi = lo;
    for w in ts.windows(2) {
        let (a, b) = (w[0].max(from), w[1]);
        if b <= from {
            continue;
        }
        let (ua, ub) = (sol.evaluate(a)?, sol.evaluate(b)?);
        lo = lo.min(ua).min(ub);
        hi = hi.max(ua).max(ub);
        let (mut da, db) = (sol.derivative(a)?, sol.derivative(b)?);
        if da * db < 0.0 {
            let (mut x0, mut x1) = (a, b);
            for _ in 0..60 {
                let m = 0.5 * (x0 + x1);
                let dm = sol.derivative(m)?;
                if dm * da > 0.0 {
                    x0 = m;
                    da = dm;
                } else {
                    x1 = m;
                }
            }
            let u = sol.evaluate(0.5 * (x0 + x1))?;
            lo = lo.min(u);
            hi = hi.max(u);
        }
    }
    Ok(hi - lo)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub t_end: f64,
    pub skip: f64,
    /// Constant initial history for cold starts.
    pub history_const: f64,
    pub warm_start: bool,
    /// Worker threads when warm start is off.
    pub threads: usize,
    pub integration: IntegrationOptions,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            t_end: 2000.0,
            skip: DEFAULT_SKIP,
            history_const: 0.01,
            warm_start: true,
            threads: 1,
            integration: IntegrationOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub kappa1: f64,
    pub ordinates: Vec<f64>,
    pub locking: Option<LockingResult>,
    pub amplitude: Option<f64>,
    pub error: Option<String>,
}

/// Constant history covering the longest possible lag at `p`.
pub fn constant_history(p: &Parameters, value: f64) -> Result<ConstantHistory> {
    Ok(ConstantHistory::new(value, -max_delay_bound(p)?, 0.0))
}

/// Integrates from `history` and analyses the post-transient attractor.
fn analyse(
    p: &Parameters,
    history: Arc<dyn HistoryLookup>,
    opts: &SweepOptions,
) -> (SweepRecord, Option<DenseSolution>) {
    let mut rec = SweepRecord {
        kappa1: p.kappa1,
        ordinates: vec![],
        locking: None,
        amplitude: None,
        error: None,
    };
    let sol = match integrate(p, history, opts.t_end, &opts.integration) {
        Ok(s) => s,
        Err(e) => {
            rec.error = Some(e.to_string());
            return (rec, None);
        }
    };
    rec.amplitude = amplitude(&sol, opts.skip).ok();
    match poincare_trace(p, &sol, opts.skip) {
        Ok(tr) => {
            rec.ordinates = tr.events.iter().map(|e| e.u_a1).collect();
            rec.locking = Some(detect_locking(&tr, None));
        }
        Err(e) => rec.error = Some(e.to_string()),
    }
    (rec, Some(sol))
}

fn cold_history(p: &Parameters, opts: &SweepOptions) -> Result<Arc<dyn HistoryLookup>> {
    Ok(Arc::new(constant_history(p, opts.history_const)?))
}

/// Runs one simulation per `kappa1` value with `kappa2` and the rest taken from `template`.
pub fn sweep(
    template: &Parameters,
    kappa1: &[f64],
    opts: &SweepOptions,
) -> Result<Vec<SweepRecord>> {
    let up = kappa1.windows(2).all(|w| w[1] > w[0]);
    let down = kappa1.windows(2).all(|w| w[1] < w[0]);
    if !(up || down) {
        return Err(Error::InvalidParameters(
            "sweep grid must be strictly monotone".into(),
        ));
    }
    template.validate()?;
    max_delay_bound(template)?;

    if opts.warm_start || opts.threads <= 1 {
        let mut out = Vec::with_capacity(kappa1.len());
        let mut prev: Option<DenseSolution> = None;
        for &k in kappa1 {
            let p = template.set_kappa(k, template.kappa2);
            log::info!("sweep point kappa1 = {k}");
            let warm = prev
                .as_ref()
                .filter(|_| opts.warm_start)
                .and_then(|s| s.tail_history(max_delay_bound(&p).ok()?).ok());
            let history: Arc<dyn HistoryLookup> = match warm {
                Some(h) => Arc::new(h),
                None => cold_history(&p, opts)?,
            };
            let (rec, sol) = analyse(&p, history, opts);
            out.push(rec);
            if sol.is_some() {
                prev = sol;
            }
        }
        return Ok(out);
    }

    let slots: Vec<Mutex<Option<SweepRecord>>> = kappa1.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..opts.threads.min(kappa1.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= kappa1.len() {
                    break;
                }
                let p = template.set_kappa(kappa1[i], template.kappa2);
                let rec = match cold_history(&p, opts) {
                    Ok(h) => analyse(&p, h, opts).0,
                    Err(e) => SweepRecord {
                        kappa1: p.kappa1,
                        ordinates: vec![],
                        locking: None,
                        amplitude: None,
                        error: Some(e.to_string()),
                    },
                };
                *slots[i].lock().unwrap() = Some(rec);
            });
        }
    });
    Ok(slots
        .into_iter()
        .map(|m| m.into_inner().unwrap().expect("every sweep slot is filled"))
        .collect())
}
