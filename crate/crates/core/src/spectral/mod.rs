//! The characteristic equation of the linearization at `u = 0` and the
//! objects derived from it.

mod continuation;
mod double_hopf;
mod jacobian;

pub use continuation::{
    builtin_seed, solve_hopf, trace_hopf_curve, Branch, BranchSeed, FreeKappa, HopfPoint, TraceBox,
};
pub use double_hopf::{
    detect_hopf_hopf, find_hopf_hopf, resonance_margin, HopfHopfPoint, RESONANCE_ORDER,
    RESONANCE_TOL,
};
pub use jacobian::{dlambda_dkappa, map_mu_to_kappa, mu_jacobian, MuJacobian};

use crate::params::Parameters;
use num_complex::Complex64;

/// `Delta(lambda) = lambda + gamma + kappa1 e^{-a1 lambda} + kappa2 e^{-a2 lambda}`.
pub fn char_fn(p: &Parameters, lambda: Complex64) -> Complex64 {
    lambda + p.gamma + p.kappa1 * (-p.a1 * lambda).exp() + p.kappa2 * (-p.a2 * lambda).exp()
}

/// `Delta'(lambda) = 1 - a1 kappa1 e^{-a1 lambda} - a2 kappa2 e^{-a2 lambda}`.
pub fn char_fn_derivative(p: &Parameters, lambda: Complex64) -> Complex64 {
    Complex64::new(1.0, 0.0)
        - p.a1 * p.kappa1 * (-p.a1 * lambda).exp()
        - p.a2 * p.kappa2 * (-p.a2 * lambda).exp()
}

/// `Delta(i omega)`; vanishes exactly when `±i omega` are characteristic roots.
pub fn hopf_residual(p: &Parameters, omega: f64) -> Complex64 {
    char_fn(p, Complex64::new(0.0, omega))
}

/// Newton iteration for a characteristic root near `seed` at fixed parameters.
pub fn find_root(p: &Parameters, seed: Complex64) -> Option<Complex64> {
    let mut z = seed;
    for _ in 0..60 {
        let f = char_fn(p, z);
        let df = char_fn_derivative(p, z);
        if df.norm() < 1e-14 || !f.is_finite() {
            return None;
        }
        let step = f / df;
        // keep wild steps from jumping into the far left half-plane
        let step = if step.norm() > 2.0 {
            step * (2.0 / step.norm())
        } else {
            step
        };
        z -= step;
        if step.norm() < 1e-13 * (1.0 + z.norm()) {
            return (char_fn(p, z).norm() < 1e-9).then_some(z);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::golden::HOPF_HOPF;
    use rand::{Rng, SeedableRng};

    #[test]
    fn zero_feedback_root() {
        let p = Parameters::with_kappa(0.0, 0.0);
        assert_eq!(char_fn(&p, Complex64::new(-p.gamma, 0.0)).norm(), 0.0);
    }

    #[test]
    fn conjugate_symmetry() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..1000 {
            let p = Parameters::with_kappa(rng.gen_range(0.0..14.0), rng.gen_range(0.0..4.7));
            let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-15.0..15.0));
            let lhs = char_fn(&p, z.conj());
            let rhs = char_fn(&p, z).conj();
            assert!((lhs - rhs).norm() <= 1e-14 * (1.0 + lhs.norm()));
        }
    }

    #[test]
    fn table_points_are_double_imaginary_roots() {
        for hh in HOPF_HOPF.iter() {
            let p = Parameters::with_kappa(hh.kappa1, hh.kappa2);
            assert!(hopf_residual(&p, hh.omega1).norm() < 1e-12);
            assert!(hopf_residual(&p, hh.omega2).norm() < 1e-12);
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let p = Parameters::with_kappa(3.0, 2.0);
        let z = Complex64::new(0.1, 2.3);
        let h = 1e-6;
        let fd = (char_fn(&p, z + h) - char_fn(&p, z - h)) / (2.0 * h);
        assert!((fd - char_fn_derivative(&p, z)).norm() < 1e-7);
    }

    #[test]
    fn root_finder_recovers_real_root() {
        let p = Parameters::with_kappa(0.0, 0.0);
        let r = find_root(&p, Complex64::new(-4.0, 0.1)).unwrap();
        assert!((r - Complex64::new(-4.75, 0.0)).norm() < 1e-12);
    }
}
