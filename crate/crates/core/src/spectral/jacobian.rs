use super::char_fn_derivative;
use super::double_hopf::HopfHopfPoint;
use crate::error::{Error, Result};
use crate::params::Parameters;
use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

/// `d lambda / d kappa_j = -e^{-a_j lambda} / Delta'(lambda)` along a simple root.
pub fn dlambda_dkappa(p: &Parameters, lambda: Complex64, j: usize) -> Result<Complex64> {
    let denom = char_fn_derivative(p, lambda);
    if denom.norm() < 1e-12 {
        return Err(Error::CharacteristicDegenerate(denom.norm()));
    }
    Ok(-(-p.delay(j) * lambda).exp() / denom)
}

/// `J_ij = Re d lambda / d kappa_j` at `lambda = i omega_i`, mapping `kappa` offsets to unfolding parameters `mu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuJacobian {
    pub j: Matrix2<f64>,
    pub inverse: Matrix2<f64>,
}

impl MuJacobian {
    pub fn det(&self) -> f64 {
        self.j.determinant()
    }

    pub fn from_matrix(j: Matrix2<f64>) -> Result<Self> {
        let det = j.determinant();
        if !(det.abs() > 1e-12) {
            return Err(Error::RegularityViolated(det));
        }
        let inverse = j.try_inverse().ok_or(Error::RegularityViolated(det))?;
        Ok(Self { j, inverse })
    }

    /// `mu = J (kappa - kappa*)`.
    pub fn kappa_to_mu(&self, dkappa: (f64, f64)) -> (f64, f64) {
        let m = self.j * Vector2::new(dkappa.0, dkappa.1);
        (m[0], m[1])
    }
}

pub fn mu_jacobian(template: &Parameters, hh: &HopfHopfPoint) -> Result<MuJacobian> {
    let p = hh.parameters(template);
    let mut j = Matrix2::zeros();
    for (i, w) in [hh.omega1, hh.omega2].into_iter().enumerate() {
        for k in 0..2 {
            j[(i, k)] = dlambda_dkappa(&p, Complex64::new(0.0, w), k + 1)?.re;
        }
    }
    MuJacobian::from_matrix(j)
}

/// Leading-order back-transform `kappa = kappa* + J^{-1} mu`.
pub fn map_mu_to_kappa(hh: &HopfHopfPoint, jac: &MuJacobian, mu: (f64, f64)) -> (f64, f64) {
    let d = jac.inverse * Vector2::new(mu.0, mu.1);
    (hh.kappa1 + d[0], hh.kappa2 + d[1])
}
