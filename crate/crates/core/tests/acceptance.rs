//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line before asserting.

use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use twodelay::dynamics::{constant_history, detect_locking, poincare_trace, DEFAULT_SKIP};
use twodelay::golden::{agreeing_digits, agreeing_digits_complex, TABLE};
use twodelay::history::{FnHistory, HistoryLookup};
use twodelay::integrator::{integrate, IntegrationOptions};
use twodelay::model::{
    difference_l, evaluate_rhs, max_delay_bound, rhs_cubic_truncation, solution_bound_interval,
};
use twodelay::normalform::*;
use twodelay::spectral::{builtin_seed, find_hopf_hopf, Branch};
use twodelay::verify::{h1_at_kappa2, hu_min_kappa2};
use twodelay::{Error, Parameters};

fn report(id: u32, title: &str, pass: bool, detail: impl AsRef<str>) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(
        out,
        "[{tag}] criterion {id:>2}: {title} ({})",
        detail.as_ref()
    );
    assert!(pass, "criterion {id} ({title}): {}", detail.as_ref());
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn fmin(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(f64::INFINITY, f64::min)
}

fn fmax(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, f64::max)
}

#[test]
fn c01_hopf_hopf_locations() {
    let p = Parameters::default();
    let (mut digits, mut resid, mut slowest) = (f64::INFINITY, 0.0_f64, Duration::ZERO);
    for g in TABLE.iter() {
        let t = Instant::now();
        let hh = find_hopf_hopf(&p, g.seed).unwrap();
        slowest = slowest.max(t.elapsed());
        digits = digits.min(fmin([
            agreeing_digits(hh.kappa1, g.hh.kappa1),
            agreeing_digits(hh.kappa2, g.hh.kappa2),
            agreeing_digits(hh.omega1, g.hh.omega1),
            agreeing_digits(hh.omega2, g.hh.omega2),
        ]));
        resid = resid.max(hh.residual(&p));
    }
    report(
        1,
        "Hopf-Hopf locations",
        digits >= 12.0 && resid < 1e-13 && slowest < Duration::from_secs(1),
        format!("{digits:.1} digits, residual {resid:.1e}, slowest {slowest:.2?}"),
    );
}

#[test]
fn c02_normal_form_golden_values() {
    let p = Parameters::default();
    let (mut coeff, mut amp, mut slowest) = (f64::INFINITY, f64::INFINITY, Duration::ZERO);
    for g in TABLE.iter() {
        let t = Instant::now();
        let hh = find_hopf_hopf(&p, g.seed).unwrap();
        let nf = analyze(&p, &hh, &Taylor).unwrap();
        slowest = slowest.max(t.elapsed());
        coeff = coeff.min(fmin([
            agreeing_digits_complex(nf.scaled.gt2100_1, g.gt2100_1),
            agreeing_digits_complex(nf.scaled.gt1011_1, g.gt1011_1),
            agreeing_digits_complex(nf.scaled.gt1110_2, g.gt1110_2),
            agreeing_digits_complex(nf.scaled.gt0021_2, g.gt0021_2),
            agreeing_digits_complex(nf.g.g2100_1, g.g2100_1),
            agreeing_digits_complex(nf.g.g1011_1, g.g1011_1),
            agreeing_digits_complex(nf.g.g1110_2, g.g1110_2),
            agreeing_digits_complex(nf.g.g0021_2, g.g0021_2),
        ]));
        let a = nf.amplitude;
        amp = amp.min(fmin([
            agreeing_digits(a.p11, g.p11),
            agreeing_digits(a.p12, g.p12),
            agreeing_digits(a.p21, g.p21),
            agreeing_digits(a.p22, g.p22),
            agreeing_digits(a.theta, g.theta),
            agreeing_digits(a.delta, g.delta),
        ]));
    }
    report(
        2,
        "normal-form coefficients",
        coeff >= 9.0 && amp >= 12.0 && slowest < Duration::from_secs(5),
        format!("cubic {coeff:.1} digits, amplitude {amp:.1} digits, slowest {slowest:.2?}"),
    );
}

#[test]
fn c03_classification() {
    let p = Parameters::default();
    let mut bad = Vec::new();
    for g in TABLE.iter() {
        let nf = analyze(&p, &g.hh, &Taylor).unwrap();
        let a = nf.amplitude;
        if !(a.p11 < 0.0 && a.p22 < 0.0 && a.theta > 0.0 && 0.0 > a.delta) {
            bad.push(format!("{} signs", g.name));
        }
        if !nf.case.is_case_iii() {
            bad.push(format!("{} case {}", g.name, nf.case));
        }
        for k in 0..=6 {
            let name = format!("HH{k}");
            match nf.nondegeneracy.get(&name) {
                Some(cond) if cond.pass => {}
                Some(_) => bad.push(format!("{} {name}", g.name)),
                None => bad.push(format!("{} {name} missing", g.name)),
            }
        }
    }
    report(
        3,
        "case III and nondegeneracy",
        bad.is_empty(),
        if bad.is_empty() {
            "HH0-HH6 hold at all points".into()
        } else {
            bad.join(", ")
        },
    );
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm())
}

#[test]
fn c04_frequency_swap() {
    let p = Parameters::default();
    let mut worst = 0.0_f64;
    for g in TABLE.iter() {
        let a = analyze(&p, &g.hh, &Taylor).unwrap();
        let b = analyze(&p, &g.hh.swapped(), &Taylor).unwrap();
        worst = worst.max(fmax([
            rel(a.scaled.gt2100_1, b.scaled.gt0021_2),
            rel(a.scaled.gt1011_1, b.scaled.gt1110_2),
            rel(a.scaled.gt1110_2, b.scaled.gt1011_1),
            rel(a.scaled.gt0021_2, b.scaled.gt2100_1),
            rel(a.g.g2100_1, b.g.g0021_2),
            rel(a.g.g1011_1, b.g.g1110_2),
            rel(a.g.g1110_2, b.g.g1011_1),
            rel(a.g.g0021_2, b.g.g2100_1),
            rel(a.amplitude.theta.into(), b.amplitude.delta.into()),
            rel(a.amplitude.delta.into(), b.amplitude.theta.into()),
        ]));
    }
    report(
        4,
        "frequency swap symmetry",
        worst < 1e-10,
        format!("worst relative {worst:.1e}"),
    );
}

/// Sup of `|full - truncated|` over the last 5 time units of a solution started from `eps * phi`.
///
/// The truncation substitutes the equation for delayed derivatives, so the history it
/// sees must itself be a solution; a generic smooth segment only gives an `eps^2` residual.
fn truncation_residual(
    p: &Parameters,
    phi: &Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    eps: f64,
) -> f64 {
    let f = phi.clone();
    let h = FnHistory::new(-20.0, 0.0, move |t| eps * f(t));
    let o = IntegrationOptions {
        atol: 1e-16,
        rtol: 1e-12,
        max_step: 0.02,
        bound_check: false,
        ..Default::default()
    };
    let sol = integrate(p, Arc::new(h), 50.0, &o).unwrap();
    let tail = sol.tail_history(30.0).unwrap();
    fmax((0..=40).map(|k| {
        let t = -5.0 + k as f64 / 8.0;
        (evaluate_rhs(p, &tail, t).unwrap() - rhs_cubic_truncation(p, &tail, t).unwrap()).abs()
    }))
}

#[test]
fn c05_expansion_order() {
    // both critical modes are neutral here, so the amplitude stays of order eps
    let p = TABLE[0].hh.parameters(&Parameters::default());
    let mut rng = StdRng::seed_from_u64(0x0e4);
    let mut ratios = Vec::new();
    for _ in 0..20 {
        let modes: Vec<(f64, f64, f64)> = (0..3)
            .map(|_| {
                (
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(0.2..2.0),
                    rng.gen_range(0.0..6.3),
                )
            })
            .collect();
        let phi: Arc<dyn Fn(f64) -> f64 + Send + Sync> =
            Arc::new(move |t| modes.iter().map(|(a, w, ph)| a * (w * t + ph).sin()).sum());
        let r1 = truncation_residual(&p, &phi, 1e-2);
        let r2 = truncation_residual(&p, &phi, 5e-3);
        ratios.push(r1 / r2);
    }
    let lo = fmin(ratios.iter().copied());
    let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    report(
        5,
        "cubic truncation error scales as eps^4",
        lo >= 12.0 && hi <= 21.3,
        format!(
            "ratios in [{lo:.2}, {hi:.2}] over {} histories",
            ratios.len()
        ),
    );
}

type Nonlinearity = fn(&Parameters, &FnHistory) -> f64;

fn full_nonlinearity(p: &Parameters, h: &FnHistory) -> f64 {
    evaluate_rhs(p, h, 0.0).unwrap() - difference_l(p, h, 0.0).unwrap()
}

fn truncated_nonlinearity(p: &Parameters, h: &FnHistory) -> f64 {
    rhs_cubic_truncation(p, h, 0.0).unwrap() - difference_l(p, h, 0.0).unwrap()
}

/// Real history `sum_k s_k part_k(nu_k)`.
fn combo(nus: &[ExpSum], parts: &[bool], s: &[f64]) -> FnHistory {
    let (nus, parts, s) = (nus.to_vec(), parts.to_vec(), s.to_vec());
    FnHistory::new(-40.0, 0.0, move |t| {
        (0..nus.len())
            .map(|k| {
                let v = nus[k].eval(t);
                s[k] * if parts[k] { v.im } else { v.re }
            })
            .sum()
    })
}

/// Complex multilinear form from central differences of `f` along the real and imaginary parts.
fn polarized(p: &Parameters, f: Nonlinearity, nus: &[ExpSum], h: f64) -> Complex64 {
    let n = nus.len();
    let mut z = c(0.0, 0.0);
    for mask in 0..(1u32 << n) {
        let parts: Vec<bool> = (0..n).map(|k| mask >> k & 1 == 1).collect();
        let factor = parts.iter().fold(
            c(1.0, 0.0),
            |acc, &im| if im { acc * c(0.0, 1.0) } else { acc },
        );
        let mut acc = 0.0;
        for signs in 0..(1u32 << n) {
            let s: Vec<f64> = (0..n)
                .map(|k| if signs >> k & 1 == 1 { -h } else { h })
                .collect();
            let sign = s.iter().map(|x| x.signum()).product::<f64>();
            acc += sign * f(p, &combo(nus, &parts, &s));
        }
        z += factor * acc / (2.0 * h).powi(n as i32);
    }
    z
}

#[test]
fn c06_multilinear_forms_against_finite_differences() {
    let mut rng = StdRng::seed_from_u64(6);
    let mut random = || {
        ExpSum::from_terms((0..2).map(|_| {
            (
                c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                c(rng.gen_range(-0.5..0.5), rng.gen_range(-4.0..4.0)),
            )
        }))
    };
    let (mut e2, mut e3) = (0.0_f64, 0.0_f64);
    for g in TABLE.iter() {
        let p = g.hh.parameters(&Parameters::default());
        let q1 = ExpSum::mode(g.hh.omega1);
        let q2 = ExpSum::mode(g.hh.omega2);
        for args in [
            [q1.clone(), q1.conj(), q2.clone()],
            [random(), random(), q1.clone()],
        ] {
            for (forms, f) in [
                (
                    &Taylor as &dyn MultilinearForms,
                    full_nonlinearity as Nonlinearity,
                ),
                (&Truncated, truncated_nonlinearity),
            ] {
                let [a, b, d] = &args;
                let exact2 = forms.f2(&p, a, b);
                let fd2 = polarized(&p, f, &args[..2], 3e-5);
                e2 = e2.max((exact2 - fd2).norm() / exact2.norm());
                let exact3 = forms.f3(&p, a, b, d);
                let fd3 = polarized(&p, f, &args, 1e-4);
                e3 = e3.max((exact3 - fd3).norm() / exact3.norm());
            }
        }
    }
    report(
        6,
        "F2 and F3 against finite differences",
        e2 < 1e-6 && e3 < 1e-4,
        format!("F2 {e2:.1e}, F3 {e3:.1e}"),
    );
}

#[test]
fn c07_biorthonormality_and_w_residuals() {
    let p0 = Parameters::default();
    let (mut orth, mut wres) = (0.0_f64, 0.0_f64);
    for g in TABLE.iter() {
        let nf = analyze(&p0, &g.hh, &Taylor).unwrap();
        let b = &nf.basis;
        for j in 1..=2 {
            for k in 1..=2 {
                let want = if j == k { 1.0 } else { 0.0 };
                orth = orth.max((bilinear(&nf.params, b.p(j), b.q(k)) - want).norm());
            }
        }
        let (ode, bnd) = nf.w.max_residuals(&nf.params, 40);
        wres = wres.max(ode).max(bnd);
    }
    report(
        7,
        "biorthonormal basis and w equations",
        orth < 1e-12 && wres < 1e-10,
        format!("orthonormality {orth:.1e}, w residual {wres:.1e}"),
    );
}

/// Hopf curve through the exact frequency parametrization, valid where `sin((a2 - a1) w) != 0`.
fn curve_at(p: &Parameters, w: f64) -> (f64, f64) {
    let det = ((p.a2 - p.a1) * w).sin();
    let k1 = (-p.gamma * (p.a2 * w).sin() - w * (p.a2 * w).cos()) / det;
    let k2 = (w * (p.a1 * w).cos() + p.gamma * (p.a1 * w).sin()) / det;
    (k1, k2)
}

/// Open frequency interval between consecutive zeros of the parametrization's denominator.
fn cell(p: &Parameters, w: f64) -> (f64, f64) {
    let step = std::f64::consts::PI / (p.a2 - p.a1);
    let k = (w / step).floor();
    (k * step, (k + 1.0) * step)
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn c08_hopf_curve_anchors() {
    let p = Parameters::default();

    // oracle: scan the H1 frequency cell for kappa2 = 3
    let (a, b) = cell(&p, builtin_seed(Branch::H1).omega);
    let grid: Vec<f64> = (1..2000).map(|i| a + (b - a) * i as f64 / 2000.0).collect();
    let k2 = |w: f64| curve_at(&p, w).1 - 3.0;
    let i = grid
        .windows(2)
        .position(|s| k2(s[0]) * k2(s[1]) <= 0.0)
        .unwrap();
    let h1_oracle = curve_at(&p, bisect(grid[i], grid[i + 1], k2)).0;

    // oracle: minimum of kappa2 along the Hu cell by golden section around the sampled minimum
    let (a, b) = cell(&p, builtin_seed(Branch::Hu).omega);
    let grid: Vec<f64> = (1..2000).map(|i| a + (b - a) * i as f64 / 2000.0).collect();
    let j = (0..grid.len())
        .min_by(|&x, &y| curve_at(&p, grid[x]).1.total_cmp(&curve_at(&p, grid[y]).1))
        .unwrap();
    let (mut lo, mut hi) = (grid[j.saturating_sub(1)], grid[(j + 1).min(grid.len() - 1)]);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let (x1, x2) = (hi - r * (hi - lo), lo + r * (hi - lo));
        if curve_at(&p, x1).1 < curve_at(&p, x2).1 {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    let hu_oracle = curve_at(&p, 0.5 * (lo + hi)).1;

    let h1 = h1_at_kappa2(&p, 3.0).unwrap();
    // the library refines the minimum with a parabola through traced vertices
    let hu = hu_min_kappa2(&p).unwrap();
    report(
        8,
        "Hopf curve anchors",
        (h1 - 3.2061).abs() < 1e-3
            && (hu - 2.627).abs() < 5e-3
            && (h1 - h1_oracle).abs() < 1e-9
            && (hu - hu_oracle).abs() < 1e-5,
        format!("H1 kappa1 = {h1:.6} (oracle {h1_oracle:.6}, gap {:.1e}), Hu min kappa2 = {hu:.6} (oracle {hu_oracle:.6}, gap {:.1e})", (h1 - h1_oracle).abs(), (hu - hu_oracle).abs()),
    );
}

#[test]
fn c09_locking_types() {
    let cases: [(f64, Option<(u32, u32)>); 4] = [
        (4.409556, Some((3, 7))),
        (4.44, None),
        (5.79, Some((1, 3))),
        (6.93, Some((1, 4))),
    ];
    let show =
        |r: Option<(u32, u32)>| r.map_or("unresolved".to_string(), |(p, q)| format!("{p}:{q}"));
    let mut pass = true;
    let mut parts = Vec::new();
    for (k1, want) in cases {
        let p = Parameters::with_kappa(k1, 3.0);
        let t = Instant::now();
        let h = constant_history(&p, 0.01).unwrap();
        let sol = integrate(&p, Arc::new(h), 2000.0, &IntegrationOptions::default()).unwrap();
        let elapsed = t.elapsed();
        let got = detect_locking(&poincare_trace(&p, &sol, DEFAULT_SKIP).unwrap(), None).ratio();
        pass &= got == want && elapsed < Duration::from_secs(60);
        parts.push(format!("{k1}: {} in {elapsed:.1?}", show(got)));
    }
    report(9, "locking at kappa2 = 3", pass, parts.join(", "));
}

#[test]
fn c10_bound_preservation() {
    let mut rng = StdRng::seed_from_u64(10);
    let mut worst = f64::INFINITY;
    let mut failures = Vec::new();
    for run in 0..30 {
        let p = Parameters::with_kappa(rng.gen_range(0.5..10.0), rng.gen_range(0.0..4.5));
        let (lo, hi) = solution_bound_interval(&p).unwrap();
        let tau = max_delay_bound(&p).unwrap();
        let (mid, half) = (0.5 * (lo + hi), 0.45 * (hi - lo));
        let terms: Vec<(f64, f64, f64)> = (0..3)
            .map(|_| {
                (
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(0.1..4.0),
                    rng.gen_range(0.0..6.3),
                )
            })
            .collect();
        let norm: f64 = terms.iter().map(|t| t.0.abs()).sum();
        let h = FnHistory::new(-tau, 0.0, move |t| {
            mid + half / norm
                * terms
                    .iter()
                    .map(|(a, w, ph)| a * (w * t + ph).sin())
                    .sum::<f64>()
        });
        assert!((0..=200).all(|k| {
            let u = h.value(-tau * k as f64 / 200.0).unwrap();
            lo < u && u < hi
        }));
        match integrate(&p, Arc::new(h), 100.0, &IntegrationOptions::default()) {
            Ok(sol) => {
                for &u in sol.values() {
                    worst = worst.min(u - lo).min(hi - u);
                }
            }
            Err(e @ (Error::BoundViolated { .. } | Error::DelayAdvanced { .. })) => {
                failures.push(format!("run {run}: {e}"))
            }
            Err(e) => failures.push(format!("run {run}: unexpected {e}")),
        }
    }
    report(
        10,
        "bound preservation over 30 runs",
        failures.is_empty() && worst > 0.0,
        if failures.is_empty() {
            format!("closest approach {worst:.2e}")
        } else {
            failures.join("; ")
        },
    );
}
