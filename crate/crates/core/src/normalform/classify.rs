use super::coeffs::Amplitude;
use crate::error::{Error, Result};
use crate::spectral::{
    map_mu_to_kappa, resonance_margin, HopfHopfPoint, MuJacobian, RESONANCE_TOL,
};
use nalgebra::Vector2;
use serde::{Deserialize, Serialize};
use std::fmt;

const SIGN_TOL: f64 = 1e-12;

/// Subcases of the simple case, by the signs of `theta`, `delta`, `theta delta - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subcase {
    I,
    II,
    III,
    /// `delta > 0 > theta`: subcase III with the two modes exchanged.
    IIISwapped,
    IV,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseLabel {
    /// `p11 < 0`, `p22 < 0`.
    Simple(Subcase),
    /// `p11 > 0`, `p22 > 0`: the simple case after reversing time.
    ReversedSimple(Subcase),
    DifficultCase,
    BoundaryDegenerate,
}

impl fmt::Display for Subcase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Subcase::I => "I",
            Subcase::II => "II",
            Subcase::III => "III",
            Subcase::IIISwapped => "III (swapped)",
            Subcase::IV => "IV",
            Subcase::V => "V",
        })
    }
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CaseLabel::Simple(s) => write!(f, "{s}"),
            CaseLabel::ReversedSimple(s) => write!(f, "{s} (time-reversed)"),
            CaseLabel::DifficultCase => f.write_str("DifficultCase"),
            CaseLabel::BoundaryDegenerate => f.write_str("BoundaryDegenerate"),
        }
    }
}

impl CaseLabel {
    pub fn is_case_iii(&self) -> bool {
        matches!(self, CaseLabel::Simple(Subcase::III))
    }
}

fn near_zero(x: f64) -> bool {
    x.abs() <= SIGN_TOL
}

pub fn classify(a: &Amplitude) -> CaseLabel {
    if [a.p11, a.p22, a.theta, a.delta].into_iter().any(near_zero)
        || near_zero(a.theta * a.delta - 1.0)
    {
        return CaseLabel::BoundaryDegenerate;
    }
    let sub = simple_subcase(a.theta, a.delta);
    match (a.p11 < 0.0, a.p22 < 0.0) {
        (true, true) => CaseLabel::Simple(sub),
        (false, false) => CaseLabel::ReversedSimple(sub),
        _ => CaseLabel::DifficultCase,
    }
}

fn simple_subcase(theta: f64, delta: f64) -> Subcase {
    let prod = theta * delta;
    match (theta > 0.0, delta > 0.0) {
        (true, true) if prod > 1.0 => Subcase::I,
        (true, true) => Subcase::II,
        (true, false) => Subcase::III,
        (false, true) => Subcase::IIISwapped,
        (false, false) if prod < 1.0 => Subcase::IV,
        (false, false) => Subcase::V,
    }
}

/// A half-line of torus bifurcation, in unfolding and in parameter coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusRay {
    pub name: String,
    /// Direction in `(mu1, mu2)`.
    pub mu_direction: [f64; 2],
    /// `d mu2 / d mu1` along the ray.
    pub mu_slope: f64,
    pub kappa_anchor: [f64; 2],
    /// `J^{-1}` applied to `mu_direction`.
    pub kappa_direction: [f64; 2],
}

impl TorusRay {
    fn new(name: &str, dir: [f64; 2], hh: &HopfHopfPoint, jac: &MuJacobian) -> Self {
        let k = jac.inverse * Vector2::new(dir[0], dir[1]);
        TorusRay {
            name: name.to_string(),
            mu_direction: dir,
            mu_slope: dir[1] / dir[0],
            kappa_anchor: [hh.kappa1, hh.kappa2],
            kappa_direction: [k[0], k[1]],
        }
    }

    /// Point at distance parameter `s >= 0` along the ray, in `(kappa1, kappa2)`.
    pub fn kappa_at(&self, hh: &HopfHopfPoint, jac: &MuJacobian, s: f64) -> (f64, f64) {
        map_mu_to_kappa(
            hh,
            jac,
            (s * self.mu_direction[0], s * self.mu_direction[1]),
        )
    }

    /// `n` samples with `s` from 0 to `length`: rows `(s, mu1, mu2, kappa1, kappa2)`.
    pub fn sample(&self, n: usize, length: f64) -> Vec<[f64; 5]> {
        (0..n)
            .map(|i| {
                let s = if n > 1 {
                    length * i as f64 / (n - 1) as f64
                } else {
                    0.0
                };
                [
                    s,
                    s * self.mu_direction[0],
                    s * self.mu_direction[1],
                    self.kappa_anchor[0] + s * self.kappa_direction[0],
                    self.kappa_anchor[1] + s * self.kappa_direction[1],
                ]
            })
            .collect()
    }
}

/// `T1`: `mu2 = delta mu1, mu1 > 0`. `T2`: `mu1 = theta mu2, mu2 > 0`.
pub fn torus_rays(
    hh: &HopfHopfPoint,
    a: &Amplitude,
    jac: &MuJacobian,
) -> Result<(TorusRay, TorusRay)> {
    let case = classify(a);
    if !case.is_case_iii() {
        return Err(Error::WrongCase(case.to_string()));
    }
    Ok((
        TorusRay::new("T1", [1.0, a.delta], hh, jac),
        TorusRay::new("T2", [a.theta, 1.0], hh, jac),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub value: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Nondegeneracy {
    pub conditions: Vec<Condition>,
}

impl Nondegeneracy {
    pub fn all_pass(&self) -> bool {
        self.conditions.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

/// Evaluates HH0..HH6 from plain values so that synthetic inputs can be checked.
///
/// HH0 is the resonance margin, HH1..HH4 are `p11, p12, p21, p22`, HH5 is
/// `det J` and HH6 is `det (p_jk)`.
pub fn nondegeneracy(omega1: f64, omega2: f64, p: [[f64; 2]; 2], det_j: f64) -> Nondegeneracy {
    let tol = 1e-12;
    let (margin, _, _) = resonance_margin(omega1.max(omega2), omega1.min(omega2));
    let det_p = p[0][0] * p[1][1] - p[0][1] * p[1][0];
    let mut conditions = vec![Condition {
        name: "HH0".into(),
        value: margin,
        pass: margin > RESONANCE_TOL,
    }];
    for (i, v) in [p[0][0], p[0][1], p[1][0], p[1][1]].into_iter().enumerate() {
        conditions.push(Condition {
            name: format!("HH{}", i + 1),
            value: v,
            pass: v.abs() > tol,
        });
    }
    conditions.push(Condition {
        name: "HH5".into(),
        value: det_j,
        pass: det_j.abs() > tol,
    });
    conditions.push(Condition {
        name: "HH6".into(),
        value: det_p,
        pass: det_p.abs() > tol,
    });
    Nondegeneracy { conditions }
}
