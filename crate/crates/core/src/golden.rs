//! Published reference values at the three Hopf-Hopf points on the default parameters.

use crate::spectral::HopfHopfPoint;
use num_complex::Complex64;

const fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub const HOPF_HOPF: [HopfHopfPoint; 3] = [
    HopfHopfPoint {
        kappa1: 2.080920227069894,
        kappa2: 3.786800923405767,
        omega1: 2.487102830659818,
        omega2: 1.582152129599611,
    },
    HopfHopfPoint {
        kappa1: 5.608_860_749_294_63,
        kappa2: 2.643352614515402,
        omega1: 6.608351858283422,
        omega2: 1.765757669232216,
    },
    HopfHopfPoint {
        kappa1: 9.284_862_308_872_76,
        kappa2: 4.403906490530705,
        omega1: 10.930_732_246_611_03,
        omega2: 1.952009077103193,
    },
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenNormalForm {
    pub name: &'static str,
    pub hh: HopfHopfPoint,
    /// Seed `(kappa1, omega1, kappa2, omega2)` inside the Newton basin.
    pub seed: (f64, f64, f64, f64),
    pub gt2100_1: Complex64,
    pub gt1011_1: Complex64,
    pub gt1110_2: Complex64,
    pub gt0021_2: Complex64,
    pub g2100_1: Complex64,
    pub g1011_1: Complex64,
    pub g1110_2: Complex64,
    pub g0021_2: Complex64,
    pub p11: f64,
    pub p12: f64,
    pub p21: f64,
    pub p22: f64,
    pub theta: f64,
    pub delta: f64,
}

pub const TABLE: [GoldenNormalForm; 3] = [
    GoldenNormalForm {
        name: "HH1",
        hh: HOPF_HOPF[0],
        seed: (2.1, 2.5, 3.8, 1.6),
        gt2100_1: c(-0.814176652897697, -0.004070875580656),
        gt1011_1: c(-0.725636150423584, 0.266993791853270),
        gt1110_2: c(-0.453023941909892, -0.299979228722909),
        gt0021_2: c(-0.134059249130964, -0.299061458302696),
        g2100_1: c(-0.698716133454478, -0.282573302492288),
        g1011_1: c(-0.515730558790600, -0.232479686193008),
        g1110_2: c(0.015574083096157, -0.461179932732848),
        g0021_2: c(-0.097472252054214, -0.227852689753873),
        p11: -0.698716133454477,
        p12: -0.515730558790600,
        p21: 0.015574083096158,
        p22: -0.097472252054214,
        theta: 5.291_049_995_477_2,
        delta: -0.022289571330147,
    },
    GoldenNormalForm {
        name: "HH2",
        hh: HOPF_HOPF[1],
        seed: (5.6, 6.6, 2.6, 1.8),
        gt2100_1: c(-8.598217033379171, -10.340_256_200_151_92),
        gt1011_1: c(-4.145122624265354, -0.485081427768031),
        gt1110_2: c(1.749820767058454, -7.928663884389642),
        gt0021_2: c(-1.429815044056368, -0.229519235629436),
        g2100_1: c(-7.506095827847942, -4.150813104539677),
        g1011_1: c(-5.263_258_815_778_85, 0.051756309540828),
        g1110_2: c(5.559_560_941_739_46, -2.015360724708596),
        g0021_2: c(-0.656772770545076, -0.201855984151354),
        p11: -7.506095827847883,
        p12: -5.263258815778782,
        p21: 5.559560941739119,
        p22: -0.656772770545075,
        theta: 8.013_820_078_762_78,
        delta: -0.740672790388973,
    },
    GoldenNormalForm {
        name: "HH3",
        hh: HOPF_HOPF[2],
        seed: (9.3, 10.9, 4.4, 2.0),
        gt2100_1: c(8.257859609402708, -81.839_209_240_317_91),
        gt1011_1: c(-20.285023260567193, 11.474545426007372),
        gt1110_2: c(31.031_474_769_824, -74.356_734_487_707_91),
        gt0021_2: c(-0.260545787811855, -0.380718170546475),
        g2100_1: c(-16.853477387548306, -28.024385352455454),
        g1011_1: c(-21.383472731029173, 12.487872482305509),
        g1110_2: c(50.366_602_528_818_38, -66.526_202_469_092_75),
        g0021_2: c(-0.203835036817261, 0.190324374649657),
        p11: -16.853477387548608,
        p12: -21.383472731028913,
        p21: 50.366_602_528_819_49,
        p22: -0.203_835_036_817_263_3,
        theta: 104.90577608695922,
        delta: -2.988_499_131_106_941,
    },
];

/// Number of significant digits to which `got` agrees with `want`.
pub fn agreeing_digits(got: f64, want: f64) -> f64 {
    if got == want {
        return 17.0;
    }
    let rel = (got - want).abs() / want.abs().max(f64::MIN_POSITIVE);
    (-rel.log10()).clamp(0.0, 17.0)
}

/// Digits of agreement of a complex value, relative to its modulus.
pub fn agreeing_digits_complex(got: Complex64, want: Complex64) -> f64 {
    if got == want {
        return 17.0;
    }
    let rel = (got - want).norm() / want.norm().max(f64::MIN_POSITIVE);
    (-rel.log10()).clamp(0.0, 17.0)
}
