use crate::error::{Error, Result};
use crate::expsum::ExpSum;
use crate::params::Parameters;
use crate::spectral::HopfHopfPoint;
use num_complex::Complex64;

/// `∫_{-a}^0 e^{rate s} ds`, with the limit `a` at vanishing rate.
fn integral_to_zero(rate: Complex64, a: f64) -> Complex64 {
    if rate.norm() < 1e-12 {
        Complex64::new(a, 0.0)
    } else {
        (Complex64::new(1.0, 0.0) - (-rate * a).exp()) / rate
    }
}

/// `<psi, phi> = conj(psi(0)) phi(0) - sum_i kappa_i ∫_{-a_i}^0 conj(psi(s + a_i)) phi(s) ds`.
pub fn bilinear(p: &Parameters, psi: &ExpSum, phi: &ExpSum) -> Complex64 {
    let mut out = psi.eval(0.0).conj() * phi.eval(0.0);
    for (kappa, a) in [(p.kappa1, p.a1), (p.kappa2, p.a2)] {
        if kappa == 0.0 {
            continue;
        }
        for &(c1, r1) in psi.terms() {
            for &(c2, r2) in phi.terms() {
                let shift = c1.conj() * (r1.conj() * a).exp();
                out -= kappa * shift * c2 * integral_to_zero(r1.conj() + r2, a);
            }
        }
    }
    out
}

/// Center eigenfunctions `q_j`, adjoint eigenfunctions `p_j = D_j e^{i omega_j s}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigBasis {
    pub q1: ExpSum,
    pub q2: ExpSum,
    pub p1: ExpSum,
    pub p2: ExpSum,
    pub d1: Complex64,
    pub d2: Complex64,
}

impl EigBasis {
    pub fn q(&self, j: usize) -> &ExpSum {
        if j == 1 {
            &self.q1
        } else {
            &self.q2
        }
    }

    pub fn p(&self, j: usize) -> &ExpSum {
        if j == 1 {
            &self.p1
        } else {
            &self.p2
        }
    }

    pub fn d(&self, j: usize) -> Complex64 {
        if j == 1 {
            self.d1
        } else {
            self.d2
        }
    }
}

/// Normalizes `p_j` against `q_j` with the bilinear form.
pub fn build_basis(template: &Parameters, hh: &HopfHopfPoint) -> Result<EigBasis> {
    let p = hh.parameters(template);
    let mut q = Vec::new();
    let mut adj = Vec::new();
    let mut d = Vec::new();
    for w in [hh.omega1, hh.omega2] {
        let e = ExpSum::mode(w);
        let n = bilinear(&p, &e, &e);
        if n.norm() < 1e-12 {
            return Err(Error::NormalizationDegenerate(n.norm()));
        }
        let dj = 1.0 / n.conj();
        adj.push(e.scale(dj));
        q.push(e);
        d.push(dj);
    }
    Ok(EigBasis {
        q1: q[0].clone(),
        q2: q[1].clone(),
        p1: adj[0].clone(),
        p2: adj[1].clone(),
        d1: d[0],
        d2: d[1],
    })
}
