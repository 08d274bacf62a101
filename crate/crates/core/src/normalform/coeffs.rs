use super::basis::EigBasis;
use super::forms::MultilinearForms;
use crate::error::{Error, Result};
use crate::expsum::ExpSum;
use crate::params::Parameters;
use crate::spectral::{char_fn, resonance_margin, HopfHopfPoint, RESONANCE_TOL};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Index `(l, s, r, k)` of the monomial `z1^l conj(z1)^s z2^r conj(z2)^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quad {
    K2000,
    K0200,
    K1100,
    K0020,
    K0002,
    K0011,
    K1010,
    K0101,
    K1001,
    K0110,
}

impl Quad {
    pub const ALL: [Quad; 10] = [
        Quad::K2000,
        Quad::K0200,
        Quad::K1100,
        Quad::K0020,
        Quad::K0002,
        Quad::K0011,
        Quad::K1010,
        Quad::K0101,
        Quad::K1001,
        Quad::K0110,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Quad::K2000 => "2000",
            Quad::K0200 => "0200",
            Quad::K1100 => "1100",
            Quad::K0020 => "0020",
            Quad::K0002 => "0002",
            Quad::K0011 => "0011",
            Quad::K1010 => "1010",
            Quad::K0101 => "0101",
            Quad::K1001 => "1001",
            Quad::K0110 => "0110",
        }
    }

    /// Key of the conjugate monomial (`l <-> s`, `r <-> k`).
    pub fn conjugate(self) -> Quad {
        match self {
            Quad::K2000 => Quad::K0200,
            Quad::K0200 => Quad::K2000,
            Quad::K1100 => Quad::K1100,
            Quad::K0020 => Quad::K0002,
            Quad::K0002 => Quad::K0020,
            Quad::K0011 => Quad::K0011,
            Quad::K1010 => Quad::K0101,
            Quad::K0101 => Quad::K1010,
            Quad::K1001 => Quad::K0110,
            Quad::K0110 => Quad::K1001,
        }
    }

    /// Key after exchanging the roles of `z1` and `z2`.
    pub fn swapped(self) -> Quad {
        match self {
            Quad::K2000 => Quad::K0020,
            Quad::K0200 => Quad::K0002,
            Quad::K1100 => Quad::K0011,
            Quad::K0020 => Quad::K2000,
            Quad::K0002 => Quad::K0200,
            Quad::K0011 => Quad::K1100,
            Quad::K1010 => Quad::K1010,
            Quad::K0101 => Quad::K0101,
            Quad::K1001 => Quad::K0110,
            Quad::K0110 => Quad::K1001,
        }
    }

    /// The pair of basis functions whose `F2` gives this coefficient.
    fn pair(self, b: &EigBasis) -> (ExpSum, ExpSum) {
        let (q1, q2) = (b.q1.clone(), b.q2.clone());
        let (q1b, q2b) = (b.q1.conj(), b.q2.conj());
        match self {
            Quad::K2000 => (q1.clone(), q1),
            Quad::K0200 => (q1b.clone(), q1b),
            Quad::K1100 => (q1, q1b),
            Quad::K0020 => (q2.clone(), q2),
            Quad::K0002 => (q2b.clone(), q2b),
            Quad::K0011 => (q2, q2b),
            Quad::K1010 => (q1, q2),
            Quad::K0101 => (q1b, q2b),
            Quad::K1001 => (q1, q2b),
            Quad::K0110 => (q1b, q2),
        }
    }

    /// `l! s! r! k!`.
    pub fn factorial(self) -> f64 {
        match self {
            Quad::K2000 | Quad::K0200 | Quad::K0020 | Quad::K0002 => 2.0,
            _ => 1.0,
        }
    }
}

/// Quadratic coefficients `g^j_{lsrk}` of the flow on the center manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticCoeffs {
    g: [[Complex64; 10]; 2],
}

impl QuadraticCoeffs {
    pub fn get(&self, j: usize, key: Quad) -> Complex64 {
        let idx = Quad::ALL.iter().position(|&k| k == key).unwrap();
        self.g[j - 1][idx]
    }

    /// `g / (l! s! r! k!)`.
    pub fn scaled(&self, j: usize, key: Quad) -> Complex64 {
        self.get(j, key) / key.factorial()
    }
}

/// `g^j = conj(D_j) F2(pair)` for every quadratic monomial.
pub fn quadratic_g(
    p: &Parameters,
    basis: &EigBasis,
    forms: &dyn MultilinearForms,
) -> QuadraticCoeffs {
    let mut g = [[Complex64::new(0.0, 0.0); 10]; 2];
    for (idx, key) in Quad::ALL.iter().enumerate() {
        let (x, y) = key.pair(basis);
        let f = forms.f2(p, &x, &y);
        for j in 1..=2 {
            g[j - 1][idx] = basis.d(j).conj() * f;
        }
    }
    QuadraticCoeffs { g }
}

/// Closed forms of `F2` on basis pairs, valid where both `±i omega_j` are roots.
pub fn quadratic_closed_form(p: &Parameters, hh: &HopfHopfPoint, key: Quad) -> Complex64 {
    let (w1, w2, g, c) = (hh.omega1, hh.omega2, p.gamma, p.c);
    let s = w1 * w1 + w2 * w2;
    match key {
        Quad::K2000 => 2.0 * c * I * w1 * (-g - I * w1),
        Quad::K0200 => -2.0 * c * I * w1 * (-g + I * w1),
        Quad::K0020 => 2.0 * c * I * w2 * (-g - I * w2),
        Quad::K0002 => -2.0 * c * I * w2 * (-g + I * w2),
        Quad::K1100 => Complex64::new(2.0 * c * w1 * w1, 0.0),
        Quad::K0011 => Complex64::new(2.0 * c * w2 * w2, 0.0),
        Quad::K1010 => c * (s - I * g * (w1 + w2)),
        Quad::K0101 => c * (s + I * g * (w1 + w2)),
        Quad::K1001 => c * (s - I * g * (w1 - w2)),
        Quad::K0110 => c * (s + I * g * (w1 - w2)),
    }
}

/// The second-order center-manifold coefficients that enter the cubic terms.
pub const W_KEYS: [Quad; 6] = [
    Quad::K2000,
    Quad::K1100,
    Quad::K1010,
    Quad::K1001,
    Quad::K0020,
    Quad::K0011,
];

/// Solution of one `w` equation: `w' = lambda w + forcing`, with its boundary condition.
#[derive(Debug, Clone, PartialEq)]
pub struct WSolution {
    pub key: Quad,
    pub lambda: Complex64,
    /// Inhomogeneous terms `(A, mu)` meaning `A e^{mu theta}`.
    pub forcing: Vec<(Complex64, Complex64)>,
    /// `F2` of the basis pair, entering the boundary condition.
    pub f2: Complex64,
    pub w: ExpSum,
    pub e: Complex64,
}

impl WSolution {
    /// `w'(theta) - lambda w(theta) - forcing(theta)`.
    pub fn ode_residual(&self, theta: f64) -> Complex64 {
        let forcing: Complex64 = self
            .forcing
            .iter()
            .map(|(a, mu)| a * (mu * theta).exp())
            .sum();
        self.w.eval_derivative(theta, 1) - self.lambda * self.w.eval(theta) - forcing
    }

    /// `L w - lambda w(0) - sum A + F2`.
    pub fn boundary_residual(&self, p: &Parameters) -> Complex64 {
        let sum_a: Complex64 = self.forcing.iter().map(|(a, _)| a).sum();
        self.w.apply_l(p, 0.0) - self.lambda * self.w.eval(0.0) - sum_a + self.f2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WCoeffs {
    pub solutions: Vec<WSolution>,
}

impl WCoeffs {
    pub fn get(&self, key: Quad) -> ExpSum {
        if let Some(s) = self.solutions.iter().find(|s| s.key == key) {
            return s.w.clone();
        }
        // the remaining ones follow by conjugation
        let s = self
            .solutions
            .iter()
            .find(|s| s.key == key.conjugate())
            .expect("w coefficient not computed");
        s.w.conj()
    }

    pub fn e(&self, key: Quad) -> Option<Complex64> {
        self.solutions.iter().find(|s| s.key == key).map(|s| s.e)
    }

    /// Largest ODE residual over `samples` points in `[-3 a2, 0]` and boundary residual.
    pub fn max_residuals(&self, p: &Parameters, samples: usize) -> (f64, f64) {
        let mut ode: f64 = 0.0;
        let mut bnd: f64 = 0.0;
        for s in &self.solutions {
            for i in 0..samples {
                let theta = -3.0 * p.a2 * i as f64 / (samples.max(2) - 1) as f64;
                ode = ode.max(s.ode_residual(theta).norm());
            }
            bnd = bnd.max(s.boundary_residual(p).norm());
        }
        (ode, bnd)
    }
}

fn w_lambda(hh: &HopfHopfPoint, key: Quad) -> Complex64 {
    let (w1, w2) = (hh.omega1, hh.omega2);
    match key {
        Quad::K2000 => I * (2.0 * w1),
        Quad::K1010 => I * (w1 + w2),
        Quad::K1001 => I * (w1 - w2),
        Quad::K0020 => I * (2.0 * w2),
        Quad::K1100 | Quad::K0011 => Complex64::new(0.0, 0.0),
        other => panic!("no w equation solved for {}", other.label()),
    }
}

const DENOM_TOL: f64 = 1e-10;

pub fn w_coefficients(
    p: &Parameters,
    hh: &HopfHopfPoint,
    basis: &EigBasis,
    qg: &QuadraticCoeffs,
    forms: &dyn MultilinearForms,
) -> Result<WCoeffs> {
    let mut solutions = Vec::new();
    for key in W_KEYS {
        let lambda = w_lambda(hh, key);
        let ck = key.conjugate();
        let forcing = vec![
            (qg.get(1, key), I * hh.omega1),
            (qg.get(1, ck).conj(), -I * hh.omega1),
            (qg.get(2, key), I * hh.omega2),
            (qg.get(2, ck).conj(), -I * hh.omega2),
        ];
        let mut particular = ExpSum::zero();
        for &(a, mu) in &forcing {
            let d = mu - lambda;
            if d.norm() < DENOM_TOL {
                return Err(Error::ResonantDenominator {
                    what: format!("w{} frequency difference", key.label()),
                    value: d.norm(),
                });
            }
            particular.push(a / d, mu);
        }
        let delta = char_fn(p, lambda);
        if delta.norm() < DENOM_TOL {
            return Err(Error::ResonantDenominator {
                what: format!("characteristic function for w{}", key.label()),
                value: delta.norm(),
            });
        }
        let (x, y) = key.pair(basis);
        let f2 = forms.f2(p, &x, &y);
        let sum_a: Complex64 = forcing.iter().map(|(a, _)| a).sum();
        let lp = particular.apply_l(p, 0.0);
        let p0 = particular.eval(0.0);
        let e = (sum_a - f2 - (lp - lambda * p0)) / (-delta);
        let mut w = particular;
        w.push(e, lambda);
        solutions.push(WSolution {
            key,
            lambda,
            forcing,
            f2,
            w,
            e,
        });
    }
    Ok(WCoeffs { solutions })
}

/// The four cubic coefficients the amplitude equations need.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicCoeffs {
    pub g2100_1: Complex64,
    pub g1011_1: Complex64,
    pub g1110_2: Complex64,
    pub g0021_2: Complex64,
}

pub fn cubic_g(
    p: &Parameters,
    basis: &EigBasis,
    w: &WCoeffs,
    forms: &dyn MultilinearForms,
) -> CubicCoeffs {
    let (q1, q2) = (&basis.q1, &basis.q2);
    let (q1b, q2b) = (basis.q1.conj(), basis.q2.conj());
    let f2 = |a: &ExpSum, b: &ExpSum| forms.f2(p, a, b);
    let f3 = |a: &ExpSum, b: &ExpSum, c: &ExpSum| forms.f3(p, a, b, c);
    let (w2000, w1100, w1010, w1001, w0020, w0011, w0110) = (
        w.get(Quad::K2000),
        w.get(Quad::K1100),
        w.get(Quad::K1010),
        w.get(Quad::K1001),
        w.get(Quad::K0020),
        w.get(Quad::K0011),
        w.get(Quad::K0110),
    );
    let c2100 = f3(q1, q1, &q1b) + 2.0 * f2(q1, &w1100) + f2(&q1b, &w2000);
    let c1011 = f3(q1, q2, &q2b) + f2(q1, &w0011) + f2(q2, &w1001) + f2(&q2b, &w1010);
    let c1110 = f3(q1, &q1b, q2) + f2(q1, &w0110) + f2(q2, &w1100) + f2(&q1b, &w1010);
    let c0021 = f3(q2, q2, &q2b) + 2.0 * f2(q2, &w0011) + f2(&q2b, &w0020);
    CubicCoeffs {
        g2100_1: basis.d1.conj() * c2100,
        g1011_1: basis.d1.conj() * c1011,
        g1110_2: basis.d2.conj() * c1110,
        g0021_2: basis.d2.conj() * c0021,
    }
}

/// Cubic coefficients divided by `l! s! r! k!`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledCubic {
    pub gt2100_1: Complex64,
    pub gt1011_1: Complex64,
    pub gt1110_2: Complex64,
    pub gt0021_2: Complex64,
}

impl From<CubicCoeffs> for ScaledCubic {
    fn from(c: CubicCoeffs) -> Self {
        Self {
            gt2100_1: c.g2100_1 / 2.0,
            gt1011_1: c.g1011_1,
            gt1110_2: c.g1110_2,
            gt0021_2: c.g0021_2 / 2.0,
        }
    }
}

/// Normal-form coefficients at zero unfolding.
///
/// `trailing` holds the purely imaginary `|g|^2` terms, kept apart so that
/// `value + trailing` is the complete expression.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GCoeffs {
    pub g2100_1: Complex64,
    pub g1011_1: Complex64,
    pub g1110_2: Complex64,
    pub g0021_2: Complex64,
    pub trailing: [Complex64; 4],
}

pub fn g_coefficients(
    hh: &HopfHopfPoint,
    qg: &QuadraticCoeffs,
    cubic: &ScaledCubic,
) -> Result<GCoeffs> {
    let (w1, w2) = (hh.omega1, hh.omega2);
    let (margin, k, l) = resonance_margin(w1.max(w2), w1.min(w2));
    if margin <= RESONANCE_TOL {
        return Err(Error::StrongResonance { k, l, margin });
    }
    let t = |j: usize, key: Quad| qg.scaled(j, key);
    let tb = |j: usize, key: Quad| qg.scaled(j, key).conj();
    let abs2 = |z: Complex64| z.norm_sqr();
    use Quad::*;

    let g2100 = cubic.gt2100_1
        + I / w1 * t(1, K1100) * t(1, K2000)
        + I / w2 * (t(1, K1010) * t(2, K1100) - t(1, K1001) * tb(2, K1100))
        - I / (2.0 * w1 + w2) * t(1, K0101) * tb(2, K0200)
        - I / (2.0 * w1 - w2) * t(1, K0110) * t(2, K2000);
    let tr2100 = -I / w1 * abs2(t(1, K1100)) - 2.0 * I / (3.0 * w1) * abs2(t(1, K0200));

    let g1011 = cubic.gt1011_1
        + I / w2 * (t(1, K1010) * t(2, K0011) - t(1, K1001) * tb(2, K0011))
        + I / w1
            * (2.0 * t(1, K2000) * t(1, K0011)
                - t(1, K1100) * tb(1, K0011)
                - t(2, K1010) * t(1, K0011)
                - t(1, K0011) * tb(2, K0110))
        - 2.0 * I / (w1 + 2.0 * w2) * t(1, K0002) * tb(2, K0101)
        - 2.0 * I / (w1 - 2.0 * w2) * t(1, K0020) * t(2, K1001);
    let tr1011 = -I / (2.0 * w1 - w2) * abs2(t(1, K0110)) - I / (2.0 * w1 + w2) * abs2(t(1, K0101));

    let g1110 = cubic.gt1110_2
        + I / w1 * (t(1, K1100) * t(2, K1010) - t(2, K0110) * tb(1, K1100))
        + I / w2
            * (2.0 * t(2, K0020) * t(2, K1100)
                - t(2, K0011) * tb(2, K1100)
                - t(1, K1010) * t(2, K1100)
                - t(2, K1100) * tb(1, K1001))
        - 2.0 * I / (2.0 * w1 + w2) * t(2, K0200) * tb(1, K0101)
        + 2.0 * I / (2.0 * w1 - w2) * t(2, K2000) * t(1, K0110);
    let tr1110 = I / (w1 - 2.0 * w2) * abs2(t(2, K1001)) - I / (w1 + 2.0 * w2) * abs2(t(2, K0101));

    let g0021 = cubic.gt0021_2
        + I / w2 * t(2, K0011) * t(2, K0020)
        + I / w1 * (t(2, K1010) * t(1, K0011) - t(2, K0110) * tb(1, K0011))
        - I / (2.0 * w2 + w1) * t(2, K0101) * tb(1, K0002)
        - I / (2.0 * w2 - w1) * t(2, K1001) * t(1, K0020);
    let tr0021 = -I / w2 * abs2(t(2, K0011)) - 2.0 * I / (3.0 * w2) * abs2(t(2, K0002));

    Ok(GCoeffs {
        g2100_1: g2100,
        g1011_1: g1011,
        g1110_2: g1110,
        g0021_2: g0021,
        trailing: [tr2100, tr1011, tr1110, tr0021],
    })
}

/// `p_jk = Re G` and the scaled amplitude parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Amplitude {
    pub p11: f64,
    pub p12: f64,
    pub p21: f64,
    pub p22: f64,
    pub theta: f64,
    pub delta: f64,
}

pub fn amplitude_parameters(g: &GCoeffs) -> Result<Amplitude> {
    let (p11, p12, p21, p22) = (g.g2100_1.re, g.g1011_1.re, g.g1110_2.re, g.g0021_2.re);
    if p11.abs() < 1e-12 || p22.abs() < 1e-12 {
        return Err(Error::DegenerateCubic { p11, p22 });
    }
    Ok(Amplitude {
        p11,
        p12,
        p21,
        p22,
        theta: p12 / p22,
        delta: p21 / p11,
    })
}
