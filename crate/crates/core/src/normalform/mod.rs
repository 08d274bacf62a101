//! Double-Hopf normal form on the four-dimensional center manifold.

mod basis;
mod classify;
mod coeffs;
mod forms;

pub use basis::{bilinear, build_basis, EigBasis};
pub use classify::{
    classify, nondegeneracy, torus_rays, CaseLabel, Condition, Nondegeneracy, Subcase, TorusRay,
};
pub use coeffs::{
    amplitude_parameters, cubic_g, g_coefficients, quadratic_closed_form, quadratic_g,
    w_coefficients, Amplitude, CubicCoeffs, GCoeffs, Quad, QuadraticCoeffs, ScaledCubic, WCoeffs,
    WSolution, W_KEYS,
};
pub use forms::{MultilinearForms, Taylor, Truncated};

pub use crate::expsum::ExpSum;

use crate::error::{Error, Result};
use crate::params::Parameters;
use crate::spectral::{mu_jacobian, HopfHopfPoint, MuJacobian};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Every intermediate of the computation at one Hopf-Hopf point.
#[derive(Debug, Clone)]
pub struct NormalForm {
    pub params: Parameters,
    pub hh: HopfHopfPoint,
    pub forms: &'static str,
    pub basis: EigBasis,
    pub quadratic: QuadraticCoeffs,
    pub w: WCoeffs,
    pub cubic: CubicCoeffs,
    pub scaled: ScaledCubic,
    pub g: GCoeffs,
    pub amplitude: Amplitude,
    pub jacobian: MuJacobian,
    pub case: CaseLabel,
    pub nondegeneracy: Nondegeneracy,
    pub rays: Option<(TorusRay, TorusRay)>,
}

/// Runs the whole pipeline. Frequencies are used in the order given.
pub fn analyze(
    template: &Parameters,
    hh: &HopfHopfPoint,
    forms: &dyn MultilinearForms,
) -> Result<NormalForm> {
    let residual = hh.residual(template);
    if !(residual < 1e-10) {
        return Err(Error::InvalidParameters(format!(
            "not a Hopf-Hopf point: residual {residual:e}"
        )));
    }
    let p = hh.parameters(template);
    let basis = build_basis(template, hh)?;
    let quadratic = quadratic_g(&p, &basis, forms);
    let w = w_coefficients(&p, hh, &basis, &quadratic, forms)?;
    let cubic = cubic_g(&p, &basis, &w, forms);
    let scaled = ScaledCubic::from(cubic);
    let g = g_coefficients(hh, &quadratic, &scaled)?;
    let amplitude = amplitude_parameters(&g)?;
    let jacobian = mu_jacobian(template, hh)?;
    let case = classify(&amplitude);
    let a = &amplitude;
    let nondegeneracy = nondegeneracy(
        hh.omega1,
        hh.omega2,
        [[a.p11, a.p12], [a.p21, a.p22]],
        jacobian.det(),
    );
    let rays = torus_rays(hh, &amplitude, &jacobian).ok();
    Ok(NormalForm {
        params: p,
        hh: *hh,
        forms: forms.name(),
        basis,
        quadratic,
        w,
        cubic,
        scaled,
        g,
        amplitude,
        jacobian,
        case,
        nondegeneracy,
        rays,
    })
}

pub(crate) mod complex_obj {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct ReIm {
        re: f64,
        im: f64,
    }

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        ReIm { re: z.re, im: z.im }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let v = ReIm::deserialize(d)?;
        Ok(Complex64::new(v.re, v.im))
    }
}

/// Serializable summary; complex values are written as `{"re": .., "im": ..}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalFormReport {
    #[serde(flatten)]
    pub hh: HopfHopfPoint,
    pub forms: String,
    #[serde(with = "complex_obj")]
    pub gt2100_1: Complex64,
    #[serde(with = "complex_obj")]
    pub gt1011_1: Complex64,
    #[serde(with = "complex_obj")]
    pub gt1110_2: Complex64,
    #[serde(with = "complex_obj")]
    pub gt0021_2: Complex64,
    #[serde(rename = "G2100_1", with = "complex_obj")]
    pub big_g2100_1: Complex64,
    #[serde(rename = "G1011_1", with = "complex_obj")]
    pub big_g1011_1: Complex64,
    #[serde(rename = "G1110_2", with = "complex_obj")]
    pub big_g1110_2: Complex64,
    #[serde(rename = "G0021_2", with = "complex_obj")]
    pub big_g0021_2: Complex64,
    #[serde(with = "complex_obj")]
    pub g_trailing_2100_1: Complex64,
    #[serde(with = "complex_obj")]
    pub g_trailing_1011_1: Complex64,
    #[serde(with = "complex_obj")]
    pub g_trailing_1110_2: Complex64,
    #[serde(with = "complex_obj")]
    pub g_trailing_0021_2: Complex64,
    pub p11: f64,
    pub p12: f64,
    pub p21: f64,
    pub p22: f64,
    pub theta: f64,
    pub delta: f64,
    #[serde(rename = "case")]
    pub case_label: String,
    pub hh_flags: Vec<Condition>,
    pub det_j: f64,
    pub t1_ray: Option<TorusRay>,
    pub t2_ray: Option<TorusRay>,
}

impl NormalForm {
    pub fn report(&self) -> NormalFormReport {
        let (t1, t2) = match &self.rays {
            Some((a, b)) => (Some(a.clone()), Some(b.clone())),
            None => (None, None),
        };
        let a = &self.amplitude;
        NormalFormReport {
            hh: self.hh,
            forms: self.forms.to_string(),
            gt2100_1: self.scaled.gt2100_1,
            gt1011_1: self.scaled.gt1011_1,
            gt1110_2: self.scaled.gt1110_2,
            gt0021_2: self.scaled.gt0021_2,
            big_g2100_1: self.g.g2100_1,
            big_g1011_1: self.g.g1011_1,
            big_g1110_2: self.g.g1110_2,
            big_g0021_2: self.g.g0021_2,
            g_trailing_2100_1: self.g.trailing[0],
            g_trailing_1011_1: self.g.trailing[1],
            g_trailing_1110_2: self.g.trailing[2],
            g_trailing_0021_2: self.g.trailing[3],
            p11: a.p11,
            p12: a.p12,
            p21: a.p21,
            p22: a.p22,
            theta: a.theta,
            delta: a.delta,
            case_label: self.case.to_string(),
            hh_flags: self.nondegeneracy.conditions.clone(),
            det_j: self.jacobian.det(),
            t1_ray: t1,
            t2_ray: t2,
        }
    }
}
