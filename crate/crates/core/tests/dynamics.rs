use std::f64::consts::PI;
use std::sync::Arc;

use twodelay::dynamics::*;
use twodelay::integrator::{integrate, DenseSolution, EventRecord, IntegrationOptions};
use twodelay::{Error, Parameters};

fn simulate(k1: f64, t_end: f64) -> (Parameters, DenseSolution) {
    let p = Parameters::with_kappa(k1, 3.0);
    let h = Arc::new(constant_history(&p, 0.01).unwrap());
    let sol = integrate(&p, h, t_end, &IntegrationOptions::default()).unwrap();
    (p, sol)
}

fn rotation(p: usize, q: usize, n: usize) -> PoincareTrace {
    let events = (0..n)
        .map(|k| {
            let th = 2.0 * PI * ((k * p) % q) as f64 / q as f64;
            EventRecord {
                t: k as f64,
                u_a1: 0.3 * th.cos(),
                u_a2: 0.3 * th.sin(),
                du: -1.0,
            }
        })
        .collect();
    PoincareTrace {
        params: Parameters::default(),
        events,
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[test]
fn rigid_rotations_up_to_thirteen() {
    for q in 1..=13 {
        for p in 1..=q {
            if gcd(p, q) != 1 {
                continue;
            }
            let r = detect_locking(&rotation(p, q, 20 * q), None);
            assert_eq!(
                r.ratio(),
                Some((p.min(q - p).max(1) as u32, q as u32)),
                "{p}:{q}"
            );
            assert_eq!(r.clusters, q);
        }
    }
}

#[test]
fn irrational_rotation_is_unresolved() {
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let events = (0..400)
        .map(|k| {
            let th = 2.0 * PI * golden * k as f64;
            EventRecord {
                t: k as f64,
                u_a1: th.cos(),
                u_a2: th.sin(),
                du: -1.0,
            }
        })
        .collect();
    let tr = PoincareTrace {
        params: Parameters::default(),
        events,
    };
    let r = detect_locking(&tr, None);
    assert_eq!(r.kind, LockingKind::QuasiperiodicOrUnresolved);
    assert!((rotation_number(&tr).unwrap() - golden).abs() < 1e-3);
}

#[test]
fn too_few_events() {
    let (p, sol) = simulate(3.4, 40.0);
    assert!(matches!(
        poincare_trace(&p, &sol, 0.0),
        Err(Error::TooFewEvents { required: 20, .. })
    ));
}

#[test]
fn stable_orbit_trace_is_a_point() {
    let (p, sol) = simulate(3.4, 2500.0);
    let tr = poincare_trace(&p, &sol, 1200.0).unwrap();
    let pts = tr.points();
    assert!(pts
        .iter()
        .all(|x| (x[0] - pts[0][0]).hypot(x[1] - pts[0][1]) < 1e-4));
    assert_eq!(detect_locking(&tr, None).ratio(), Some((1, 1)));
}

#[test]
fn three_seven_orbit_revisits_clusters_in_stride() {
    let (p, sol) = simulate(4.409556, 2000.0);
    let tr = poincare_trace(&p, &sol, DEFAULT_SKIP).unwrap();
    let r = detect_locking(&tr, None);
    assert_eq!(r.ratio(), Some((3, 7)));
    // independent check on the last five rounds
    let pts = tr.points();
    let tail = &pts[pts.len() - 35..];
    let tol = 1e-3 * tr.diameter();
    for k in 0..28 {
        let d = (tail[k][0] - tail[k + 7][0]).hypot(tail[k][1] - tail[k + 7][1]);
        assert!(d < tol);
        let e = (tail[k][0] - tail[k + 1][0]).hypot(tail[k][1] - tail[k + 1][1]);
        assert!(e > tol);
    }
}

fn mean_nn_gap(pts: &[[f64; 2]]) -> f64 {
    let mut total = 0.0;
    for (i, a) in pts.iter().enumerate() {
        let mut best = f64::INFINITY;
        for (j, b) in pts.iter().enumerate() {
            if i != j {
                best = best.min((a[0] - b[0]).hypot(a[1] - b[1]));
            }
        }
        total += best;
    }
    total / pts.len() as f64
}

#[test]
fn quasiperiodic_trace_fills_a_curve() {
    let (p, sol) = simulate(4.44, 3000.0);
    let short = poincare_trace(&p, &sol.clone(), 1000.0).unwrap();
    let half: Vec<[f64; 2]> = short.points()[..short.len() / 2].to_vec();
    let full = short.points();
    assert!(mean_nn_gap(&full) < 0.75 * mean_nn_gap(&half));
    assert!(!detect_locking(&short, None).is_locked());
}

#[test]
fn locked_orbits_at_one_third_and_one_quarter() {
    for (k1, expected) in [(5.79, (1, 3)), (6.93, (1, 4))] {
        let (p, sol) = simulate(k1, 2000.0);
        let tr = poincare_trace(&p, &sol, DEFAULT_SKIP).unwrap();
        assert_eq!(
            detect_locking(&tr, None).ratio(),
            Some(expected),
            "kappa1 = {k1}"
        );
    }
}

#[test]
fn projection_rows_and_closure() {
    let (p, sol) = simulate(3.4, 2000.0);
    let dt = 0.01;
    let rows = project3(&sol, &p, dt).unwrap();
    let span = sol.t_end() - p.a2;
    assert_eq!(rows.len(), (span / dt).floor() as usize + 1);
    let ev = sol.events(&p, 1800.0);
    let period = ev[1].t - ev[0].t;
    let a = sol.evaluate(ev[0].t + 0.3).unwrap();
    let b = sol.evaluate(ev[0].t + 0.3 + period).unwrap();
    assert!((a - b).abs() < 1e-6);
    let zero = integrate(
        &p,
        Arc::new(constant_history(&p, 0.0).unwrap()),
        20.0,
        &IntegrationOptions::default(),
    )
    .unwrap();
    let rows = project3(&zero, &p, 0.5).unwrap();
    assert_eq!(rows.len(), 29);
    assert!(rows
        .iter()
        .all(|r| r.u == 0.0 && r.u_a1 == 0.0 && r.u_a2 == 0.0));
}

#[test]
fn amplitude_stable_under_longer_horizon() {
    let (_, a) = simulate(5.79, 2000.0);
    let (_, b) = simulate(5.79, 3000.0);
    let na = amplitude(&a, 1000.0).unwrap();
    let nb = amplitude(&b, 1000.0).unwrap();
    assert!((na - nb).abs() < 1e-4, "{na} vs {nb}");
}

fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

fn locked_indices(recs: &[SweepRecord], ratio: (u32, u32)) -> Vec<usize> {
    recs.iter()
        .enumerate()
        .filter(|(_, r)| r.locking.as_ref().and_then(|l| l.ratio()) == Some(ratio))
        .map(|(i, _)| i)
        .collect()
}

fn assert_contiguous(idx: &[usize]) {
    assert!(!idx.is_empty());
    assert_eq!(
        idx.last().unwrap() - idx[0] + 1,
        idx.len(),
        "window has gaps: {idx:?}"
    );
}

#[test]
fn one_third_window_is_contiguous() {
    let template = Parameters::with_kappa(0.0, 3.0);
    let opts = SweepOptions::default();
    let recs = sweep(&template, &grid(5.70, 5.85, 31), &opts).unwrap();
    let idx = locked_indices(&recs, (1, 3));
    assert_contiguous(&idx);
    assert!(recs[*idx.last().unwrap() + 1..].iter().all(|r| !r
        .locking
        .as_ref()
        .unwrap()
        .is_locked()));
    assert!(recs
        .iter()
        .all(|r| r.error.is_none() && r.ordinates.len() >= 20));

    // widened grid: unresolved on both sides
    let recs = sweep(&template, &grid(5.60, 5.85, 26), &opts).unwrap();
    let idx = locked_indices(&recs, (1, 3));
    assert_contiguous(&idx);
    assert!(idx[0] > 0 && *idx.last().unwrap() < recs.len() - 1);
}

#[test]
fn one_quarter_window_is_contiguous() {
    let recs = sweep(
        &Parameters::with_kappa(0.0, 3.0),
        &grid(6.85, 7.00, 16),
        &SweepOptions::default(),
    )
    .unwrap();
    let idx = locked_indices(&recs, (1, 4));
    assert_contiguous(&idx);
    assert!(idx.contains(&8));
}

#[test]
fn periodic_region_is_single_point_locked() {
    let opts = SweepOptions {
        t_end: 4000.0,
        ..Default::default()
    };
    let recs = sweep(&Parameters::with_kappa(0.0, 3.0), &grid(3.3, 3.5, 5), &opts).unwrap();
    for r in recs {
        assert_eq!(
            r.locking.unwrap().ratio(),
            Some((1, 1)),
            "kappa1 = {}",
            r.kappa1
        );
    }
}

#[test]
fn parallel_cold_sweep_matches_sequential() {
    let g = grid(4.0, 4.2, 4);
    let base = SweepOptions {
        t_end: 800.0,
        warm_start: false,
        ..Default::default()
    };
    let seq = sweep(&Parameters::with_kappa(0.0, 3.0), &g, &base).unwrap();
    let par = sweep(
        &Parameters::with_kappa(0.0, 3.0),
        &g,
        &SweepOptions { threads: 3, ..base },
    )
    .unwrap();
    assert_eq!(seq, par);
}

#[test]
fn non_monotone_grid_rejected() {
    let r = sweep(
        &Parameters::with_kappa(0.0, 3.0),
        &[4.0, 4.1, 4.05],
        &SweepOptions::default(),
    );
    assert!(r.is_err());
}
