use super::continuation::HopfPoint;
use super::{char_fn_derivative, find_root, hopf_residual};
use crate::error::{Error, Result};
use crate::params::Parameters;
use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Two distinct imaginary pairs `±i omega1`, `±i omega2` at the same `(kappa1, kappa2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopfHopfPoint {
    pub kappa1: f64,
    pub kappa2: f64,
    pub omega1: f64,
    pub omega2: f64,
}

impl HopfHopfPoint {
    pub fn parameters(&self, template: &Parameters) -> Parameters {
        (*template).set_kappa(self.kappa1, self.kappa2)
    }

    /// Euclidean norm of the four real residuals.
    pub fn residual(&self, template: &Parameters) -> f64 {
        let p = self.parameters(template);
        (hopf_residual(&p, self.omega1).norm_sqr() + hopf_residual(&p, self.omega2).norm_sqr())
            .sqrt()
    }

    /// The same point with the two frequencies exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            omega1: self.omega2,
            omega2: self.omega1,
            ..*self
        }
    }
}

/// Largest `k + l` checked for strong resonances `k omega1 = l omega2`.
pub const RESONANCE_ORDER: u32 = 5;
pub const RESONANCE_TOL: f64 = 1e-8;

/// `min |k omega1 - l omega2|` over `k, l >= 0`, `1 <= k + l <= 5`, with the minimizing `(k, l)`.
pub fn resonance_margin(omega1: f64, omega2: f64) -> (f64, u32, u32) {
    let mut best = (f64::INFINITY, 0, 0);
    for k in 0..=RESONANCE_ORDER {
        for l in 0..=(RESONANCE_ORDER - k) {
            if k + l == 0 {
                continue;
            }
            let m = (k as f64 * omega1 - l as f64 * omega2).abs();
            if m < best.0 {
                best = (m, k, l);
            }
        }
    }
    best
}

fn residual_vec(template: &Parameters, x: &Vector4<f64>) -> Vector4<f64> {
    let p = (*template).set_kappa(x[0], x[1]);
    let r1 = hopf_residual(&p, x[2]);
    let r2 = hopf_residual(&p, x[3]);
    Vector4::new(r1.re, r1.im, r2.re, r2.im)
}

fn residual_jac(template: &Parameters, x: &Vector4<f64>) -> Matrix4<f64> {
    let p = (*template).set_kappa(x[0], x[1]);
    let mut m = Matrix4::zeros();
    for (row, w) in [(0usize, x[2]), (2usize, x[3])] {
        let iw = Complex64::new(0.0, w);
        let d1 = (-p.a1 * iw).exp();
        let d2 = (-p.a2 * iw).exp();
        let dw = Complex64::i() * char_fn_derivative(&p, iw);
        let col = if row == 0 { 2 } else { 3 };
        m[(row, 0)] = d1.re;
        m[(row + 1, 0)] = d1.im;
        m[(row, 1)] = d2.re;
        m[(row + 1, 1)] = d2.im;
        m[(row, col)] = dw.re;
        m[(row + 1, col)] = dw.im;
    }
    m
}

const HH_TOL: f64 = 1e-14;
const HH_ACCEPT: f64 = 1e-13;

fn newton(template: &Parameters, mut x: Vector4<f64>) -> (Vector4<f64>, f64) {
    let mut f = residual_vec(template, &x).norm();
    let mut stalled = 0;
    for _ in 0..60 {
        if f < HH_TOL || stalled >= 3 {
            break;
        }
        let Some(dx) = residual_jac(template, &x)
            .lu()
            .solve(&-residual_vec(template, &x))
        else {
            break;
        };
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-6 {
            let xt = x + t * dx;
            let ft = residual_vec(template, &xt).norm();
            if ft < f {
                x = xt;
                f = ft;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // rounding floor: take the full step once more and stop if it does not help
            stalled += 1;
            if t <= 1e-6 {
                break;
            }
        } else {
            stalled = 0;
        }
    }
    (x, f)
}

/// Derivative-free polish of `|f|^2` for seeds outside the Newton basin.
fn nelder_mead(template: &Parameters, x0: Vector4<f64>) -> Vector4<f64> {
    let obj = |x: &Vector4<f64>| residual_vec(template, x).norm_squared();
    let mut simplex: Vec<(Vector4<f64>, f64)> = (0..5)
        .map(|i| {
            let mut x = x0;
            if i > 0 {
                x[i - 1] += 0.05;
            }
            (x, obj(&x))
        })
        .collect();
    for _ in 0..4000 {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[4].1 - simplex[0].1 < 1e-28 {
            break;
        }
        let centroid = simplex[..4]
            .iter()
            .fold(Vector4::zeros(), |acc, s| acc + s.0)
            / 4.0;
        let worst = simplex[4];
        let xr = centroid + (centroid - worst.0);
        let fr = obj(&xr);
        if fr < simplex[0].1 {
            let xe = centroid + 2.0 * (centroid - worst.0);
            let fe = obj(&xe);
            simplex[4] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[3].1 {
            simplex[4] = (xr, fr);
        } else {
            let xc = centroid + 0.5 * (worst.0 - centroid);
            let fc = obj(&xc);
            if fc < worst.1 {
                simplex[4] = (xc, fc);
            } else {
                let best = simplex[0].0;
                for s in simplex.iter_mut().skip(1) {
                    s.0 = best + 0.5 * (s.0 - best);
                    s.1 = obj(&s.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex[0].0
}

/// Locates a Hopf-Hopf point from a seed `(kappa1, omega1, kappa2, omega2)`.
///
/// The result is ordered so that `omega1 > omega2`.
pub fn find_hopf_hopf(template: &Parameters, seed: (f64, f64, f64, f64)) -> Result<HopfHopfPoint> {
    let (k1, w1, k2, w2) = seed;
    if (w1 - w2).abs() < 1e-8 {
        return Err(Error::InvalidParameters(
            "Hopf-Hopf seed frequencies must be distinct".into(),
        ));
    }
    let x0 = Vector4::new(k1, k2, w1, w2);
    let (mut x, mut f) = newton(template, x0);
    if f >= HH_ACCEPT || !distinct(&x) {
        log::debug!("newton stalled at |f| = {f:e}; falling back to simplex search");
        let (xs, fs) = newton(template, nelder_mead(template, x0));
        if fs < f {
            x = xs;
            f = fs;
        }
    }
    if f >= HH_ACCEPT || !distinct(&x) {
        return Err(Error::NoConvergence {
            iterations: 60,
            residual: f,
        });
    }
    let (omega1, omega2) = if x[2] > x[3] {
        (x[2], x[3])
    } else {
        (x[3], x[2])
    };
    let (margin, k, l) = resonance_margin(omega1, omega2);
    if margin <= RESONANCE_TOL {
        return Err(Error::StrongResonance { k, l, margin });
    }
    Ok(HopfHopfPoint {
        kappa1: x[0],
        kappa2: x[1],
        omega1,
        omega2,
    })
}

fn distinct(x: &Vector4<f64>) -> bool {
    x[2] > 1e-8 && x[3] > 1e-8 && (x[2] - x[3]).abs() > 1e-6
}

/// Grid of frequencies used to seed the secondary-root search.
fn root_seeds() -> impl Iterator<Item = Complex64> {
    (1..=64).map(|i| Complex64::new(0.0, 0.25 * i as f64))
}

/// Characteristic roots near the imaginary axis other than the traced pair.
fn secondary_roots(p: &Parameters, omega: f64) -> Vec<Complex64> {
    let mut roots: Vec<Complex64> = Vec::new();
    for s in root_seeds() {
        if let Some(r) = find_root(p, s) {
            if r.im > 0.05
                && r.re.abs() < 1.0
                && (r - Complex64::new(0.0, omega)).norm() > 1e-3
                && roots.iter().all(|q| (q - r).norm() > 1e-6)
            {
                roots.push(r);
            }
        }
    }
    roots
}

/// Hopf-Hopf points along a traced curve, found where another characteristic
/// root crosses the imaginary axis, then polished with [`find_hopf_hopf`].
pub fn detect_hopf_hopf(template: &Parameters, curve: &[HopfPoint]) -> Vec<HopfHopfPoint> {
    let mut found: Vec<HopfHopfPoint> = Vec::new();
    for pair in curve.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let pa = (*template).set_kappa(a.kappa1, a.kappa2);
        let pb = (*template).set_kappa(b.kappa1, b.kappa2);
        for r in secondary_roots(&pa, a.omega) {
            let Some(rb) = find_root(&pb, r) else {
                continue;
            };
            if (rb - r).norm() > 0.5 || r.re.signum() == rb.re.signum() {
                continue;
            }
            let seed = (a.kappa1, a.omega, a.kappa2, r.im);
            match find_hopf_hopf(template, seed) {
                Ok(hh) => {
                    let dup = found.iter().any(|f| {
                        (f.kappa1 - hh.kappa1).abs() < 1e-8 && (f.kappa2 - hh.kappa2).abs() < 1e-8
                    });
                    if !dup {
                        found.push(hh);
                    }
                }
                Err(e) => log::debug!(
                    "crossing near ({}, {}) not polished: {e}",
                    a.kappa1,
                    a.kappa2
                ),
            }
        }
    }
    found
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resonance_margin_examples() {
        let (m, k, l) = resonance_margin(3.0, 1.0);
        assert!(m < 1e-15 && k == 1 && l == 3);
        assert!(resonance_margin(2.487102830659818, 1.582152129599611).0 > 1e-3);
        // k = 0 or l = 0 just measures the frequencies themselves
        assert_eq!(resonance_margin(10.0, 0.5).0, 0.5);
    }

    #[test]
    fn equal_frequency_seed_rejected() {
        let p = Parameters::default();
        assert!(find_hopf_hopf(&p, (2.0, 2.0, 3.0, 2.0)).is_err());
    }

    #[test]
    fn swapped_is_involution() {
        let hh = HopfHopfPoint {
            kappa1: 1.0,
            kappa2: 2.0,
            omega1: 3.0,
            omega2: 4.0,
        };
        assert_eq!(hh.swapped().swapped(), hh);
    }
}
