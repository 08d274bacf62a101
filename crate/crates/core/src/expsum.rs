//! Finite sums `theta -> sum_k c_k e^{r_k theta}` with exact calculus.

use crate::params::Parameters;
use num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};

const MERGE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExpSum {
    terms: Vec<(Complex64, Complex64)>,
}

impl ExpSum {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `coeff * e^{rate theta}`.
    pub fn exp(coeff: Complex64, rate: Complex64) -> Self {
        let mut s = Self::zero();
        s.push(coeff, rate);
        s
    }

    /// `e^{i omega theta}`.
    pub fn mode(omega: f64) -> Self {
        Self::exp(Complex64::new(1.0, 0.0), Complex64::new(0.0, omega))
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Complex64, Complex64)>) -> Self {
        let mut s = Self::zero();
        for (c, r) in terms {
            s.push(c, r);
        }
        s
    }

    /// Adds a term, merging it into an existing one with the same rate.
    pub fn push(&mut self, coeff: Complex64, rate: Complex64) {
        if let Some(t) = self
            .terms
            .iter_mut()
            .find(|t| (t.1 - rate).norm() <= MERGE_TOL * (1.0 + rate.norm()))
        {
            t.0 += coeff;
        } else {
            self.terms.push((coeff, rate));
        }
    }

    pub fn terms(&self) -> &[(Complex64, Complex64)] {
        &self.terms
    }

    pub fn eval(&self, theta: f64) -> Complex64 {
        self.eval_complex(Complex64::new(theta, 0.0))
    }

    /// Evaluation at a complex argument.
    pub fn eval_complex(&self, theta: Complex64) -> Complex64 {
        self.terms.iter().map(|(c, r)| c * (r * theta).exp()).sum()
    }

    /// `n`-th derivative evaluated at `theta`.
    pub fn eval_derivative(&self, theta: f64, n: u32) -> Complex64 {
        self.terms
            .iter()
            .map(|(c, r)| c * r.powu(n) * (r * theta).exp())
            .sum()
    }

    pub fn derivative(&self) -> Self {
        Self::from_terms(self.terms.iter().map(|&(c, r)| (c * r, r)))
    }

    /// Pointwise complex conjugate `theta -> conj(f(theta))` for real `theta`.
    pub fn conj(&self) -> Self {
        Self::from_terms(self.terms.iter().map(|(c, r)| (c.conj(), r.conj())))
    }

    pub fn scale(&self, k: Complex64) -> Self {
        Self::from_terms(self.terms.iter().map(|&(c, r)| (k * c, r)))
    }

    /// `L f(theta) = -gamma f(theta) - kappa1 f(theta - a1) - kappa2 f(theta - a2)`.
    ///
    /// Each term is scaled by its multiplier `-gamma - kappa1 e^{-a1 r} - kappa2 e^{-a2 r}`.
    pub fn apply_l(&self, p: &Parameters, theta: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|(c, r)| c * l_multiplier(p, *r) * (r * theta).exp())
            .sum()
    }

    /// `L` applied twice, at `theta`.
    pub fn apply_l2(&self, p: &Parameters, theta: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|(c, r)| c * l_multiplier(p, *r).powu(2) * (r * theta).exp())
            .sum()
    }

    /// Real part as a plain function of time, shifted so that `theta = t`.
    pub fn real_part(&self) -> impl Fn(f64) -> f64 + Send + Sync + 'static {
        let s = self.clone();
        move |t| s.eval(t).re
    }
}

fn l_multiplier(p: &Parameters, r: Complex64) -> Complex64 {
    -p.gamma - p.kappa1 * (-p.a1 * r).exp() - p.kappa2 * (-p.a2 * r).exp()
}

impl Add for &ExpSum {
    type Output = ExpSum;
    fn add(self, rhs: &ExpSum) -> ExpSum {
        let mut out = self.clone();
        for &(c, r) in &rhs.terms {
            out.push(c, r);
        }
        out
    }
}

impl Add for ExpSum {
    type Output = ExpSum;
    fn add(self, rhs: ExpSum) -> ExpSum {
        &self + &rhs
    }
}

impl Neg for &ExpSum {
    type Output = ExpSum;
    fn neg(self) -> ExpSum {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Sub for &ExpSum {
    type Output = ExpSum;
    fn sub(self, rhs: &ExpSum) -> ExpSum {
        self + &(-rhs)
    }
}

impl Mul<Complex64> for &ExpSum {
    type Output = ExpSum;
    fn mul(self, k: Complex64) -> ExpSum {
        self.scale(k)
    }
}

impl Mul<f64> for &ExpSum {
    type Output = ExpSum;
    fn mul(self, k: f64) -> ExpSum {
        self.scale(Complex64::new(k, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn equal_rates_merge() {
        let s = ExpSum::from_terms([(c(1.0, 0.0), c(0.0, 2.0)), (c(0.5, 1.0), c(0.0, 2.0))]);
        assert_eq!(s.terms().len(), 1);
        assert_eq!(s.terms()[0].0, c(1.5, 1.0));
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let s = ExpSum::from_terms([(c(1.0, -0.3), c(0.2, 2.0)), (c(0.4, 0.0), c(-1.0, 0.0))]);
        let h = 1e-6;
        let fd = (s.eval(-0.7 + h) - s.eval(-0.7 - h)) / (2.0 * h);
        assert!((fd - s.eval_derivative(-0.7, 1)).norm() < 1e-8);
        assert!((s.derivative().eval(-0.7) - s.eval_derivative(-0.7, 1)).norm() < 1e-14);
        assert!((s.derivative().derivative().eval(0.3) - s.eval_derivative(0.3, 2)).norm() < 1e-13);
    }

    #[test]
    fn conj_is_pointwise() {
        let s = ExpSum::from_terms([(c(1.0, -0.3), c(0.2, 2.0)), (c(0.0, 2.0), c(0.0, -1.5))]);
        for t in [-3.0, -0.5, 0.0] {
            assert!((s.conj().eval(t) - s.eval(t).conj()).norm() < 1e-15);
        }
    }

    #[test]
    fn l_matches_shifted_evaluation() {
        let p = Parameters::with_kappa(2.0, 3.0);
        let s = ExpSum::from_terms([(c(1.0, -0.3), c(0.2, 2.0)), (c(0.4, 0.0), c(-1.0, 0.0))]);
        for t in [0.0, -1.3, -7.0] {
            let direct =
                -p.gamma * s.eval(t) - p.kappa1 * s.eval(t - p.a1) - p.kappa2 * s.eval(t - p.a2);
            assert!((s.apply_l(&p, t) - direct).norm() < 1e-12 * (1.0 + direct.norm()));
            let nested = -p.gamma * s.apply_l(&p, t)
                - p.kappa1 * s.apply_l(&p, t - p.a1)
                - p.kappa2 * s.apply_l(&p, t - p.a2);
            assert!((s.apply_l2(&p, t) - nested).norm() < 1e-11 * (1.0 + nested.norm()));
        }
    }

    #[test]
    fn l_of_zero_is_zero() {
        let p = Parameters::with_kappa(2.0, 3.0);
        assert_eq!(ExpSum::zero().apply_l(&p, 0.0), c(0.0, 0.0));
    }

    proptest! {
        #[test]
        fn sum_evaluates_linearly(a in -2.0f64..2.0, b in -2.0f64..2.0, w in 0.1f64..10.0, t in -18.0f64..0.0) {
            let f = ExpSum::exp(c(a, b), c(0.0, w));
            let g = ExpSum::exp(c(b, a), c(-0.1, -w));
            let lhs = (&f + &g).eval(t);
            let rhs = f.eval(t) + g.eval(t);
            prop_assert!((lhs - rhs).norm() < 1e-13);
            let d = (&f - &f).eval(t);
            prop_assert!(d.norm() < 1e-15);
        }
    }
}
