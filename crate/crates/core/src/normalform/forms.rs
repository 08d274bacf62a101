//! Second and third derivatives of the nonlinearity at zero, as interchangeable strategies.

use crate::expsum::ExpSum;
use crate::params::Parameters;
use num_complex::Complex64;

/// Multilinear forms `F2`, `F3` of the nonlinear part of the equation at `u = 0`.
pub trait MultilinearForms: Send + Sync {
    fn name(&self) -> &'static str;

    fn description(&self) -> &'static str;

    fn f2(&self, p: &Parameters, a: &ExpSum, b: &ExpSum) -> Complex64;

    fn f3(&self, p: &Parameters, a: &ExpSum, b: &ExpSum, c: &ExpSum) -> Complex64;
}

fn permutations<'a>(a: &'a ExpSum, b: &'a ExpSum, c: &'a ExpSum) -> [[&'a ExpSum; 3]; 6] {
    [
        [a, b, c],
        [a, c, b],
        [b, a, c],
        [b, c, a],
        [c, a, b],
        [c, b, a],
    ]
}

/// Derivatives of the state-dependent nonlinearity: `u(-a - c u(0))` expanded in `u(0)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Taylor;

impl MultilinearForms for Taylor {
    fn name(&self) -> &'static str {
        "taylor"
    }

    fn description(&self) -> &'static str {
        "derivatives of the state-dependent delay terms"
    }

    fn f2(&self, p: &Parameters, a: &ExpSum, b: &ExpSum) -> Complex64 {
        [(p.kappa1, p.a1), (p.kappa2, p.a2)]
            .iter()
            .map(|&(k, d)| {
                k * p.c
                    * (a.eval(0.0) * b.eval_derivative(-d, 1)
                        + b.eval(0.0) * a.eval_derivative(-d, 1))
            })
            .sum()
    }

    fn f3(&self, p: &Parameters, a: &ExpSum, b: &ExpSum, c: &ExpSum) -> Complex64 {
        let s: Complex64 = permutations(a, b, c)
            .iter()
            .map(|[x, y, z]| {
                x.eval(0.0)
                    * y.eval(0.0)
                    * (p.kappa1 * z.eval_derivative(-p.a1, 2)
                        + p.kappa2 * z.eval_derivative(-p.a2, 2))
            })
            .sum();
        -0.5 * p.c * p.c * s
    }
}

/// Derivatives of the constant-delay cubic truncation, written with the operator `L`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Truncated;

impl MultilinearForms for Truncated {
    fn name(&self) -> &'static str {
        "truncated"
    }

    fn description(&self) -> &'static str {
        "derivatives of the cubic constant-delay truncation"
    }

    fn f2(&self, p: &Parameters, a: &ExpSum, b: &ExpSum) -> Complex64 {
        [(p.kappa1, p.a1), (p.kappa2, p.a2)]
            .iter()
            .map(|&(k, d)| {
                k * p.c * (a.eval(0.0) * b.apply_l(p, -d) + b.eval(0.0) * a.apply_l(p, -d))
            })
            .sum()
    }

    fn f3(&self, p: &Parameters, a: &ExpSum, b: &ExpSum, c: &ExpSum) -> Complex64 {
        let kd = [(p.kappa1, p.a1), (p.kappa2, p.a2)];
        let c2 = p.c * p.c;
        permutations(a, b, c)
            .iter()
            .map(|[x, y, z]| {
                let (x0, y0) = (x.eval(0.0), y.eval(0.0));
                let mut s = Complex64::new(0.0, 0.0);
                for &(ki, ai) in &kd {
                    for &(kj, aj) in &kd {
                        s += ki * kj * c2 * x0 * y.eval(-ai) * z.apply_l(p, -ai - aj);
                    }
                    s -= 0.5 * c2 * x0 * y0 * ki * z.apply_l2(p, -ai);
                }
                s
            })
            .sum()
    }
}
