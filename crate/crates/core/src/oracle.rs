//! Closed-form reference values used to audit the continuation: the Riemann
//! zeta function by Euler–Maclaurin summation, and the exact zeta functions
//! of the interval and the geometric toy spectrum.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::model::FractalModel;

/// `B_{2k} / (2k)!` for `k = 1..=12`.
const BERNOULLI_OVER_FACTORIAL: [f64; 12] = [
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40_320.0,
    5.0 / 66.0 / 3_628_800.0,
    -691.0 / 2730.0 / 479_001_600.0,
    7.0 / 6.0 / 87_178_291_200.0,
    -3617.0 / 510.0 / 20_922_789_888_000.0,
    43_867.0 / 798.0 / 6_402_373_705_728_000.0,
    -174_611.0 / 330.0 / 2_432_902_008_176_640_000.0,
    854_513.0 / 138.0 / 1.124_000_727_777_607_7e21,
    -236_364_091.0 / 2730.0 / 6.204_484_017_332_394e23,
];

/// Riemann zeta `ζ_R(s)` for `s ≠ 1`, with an estimate of the truncation error.
pub fn riemann_zeta(s: Complex64) -> (Complex64, f64) {
    let n = (30.0f64).max(s.norm().ceil() + 20.0) as u32;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 1..n {
        sum += (-s * (k as f64).ln()).exp();
    }
    let big_n = n as f64;
    let ln_n = big_n.ln();
    let n_pow = (-s * ln_n).exp();
    sum += n_pow * big_n / (s - 1.0) + 0.5 * n_pow;
    // Rising factorial s (s+1) ... (s+2k-2) times N^{-s-2k+1}.
    let mut rising = s;
    let mut power = n_pow / big_n;
    let mut last = 0.0;
    for (k, &b) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        if k > 0 {
            let j = 2.0 * k as f64;
            rising *= (s + j - 1.0) * (s + j);
            power /= big_n * big_n;
        }
        let term = b * rising * power;
        sum += term;
        last = term.norm();
    }
    (sum, last)
}

/// `ζ(s, 0) = π^{-s} ζ_R(s)` for the Dirichlet interval spectrum `(πn)²`.
pub fn interval_zeta(s: Complex64) -> Complex64 {
    (-s * PI.ln()).exp() * riemann_zeta(s).0
}

/// `ζ(s, 0) = 1 / (1 - N τ^{-s/2})` for the toy spectrum `τ^k` with multiplicity `N^k`.
pub fn toy_zeta(model: &FractalModel, s: Complex64) -> Complex64 {
    let n = f64::from(model.n_cells);
    1.0 / (1.0 - n * (-0.5 * s * model.tau.ln()).exp())
}

/// Residue of the toy zeta function at each of its poles, `2 / log τ`.
pub fn toy_residue(model: &FractalModel) -> f64 {
    2.0 / model.tau.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn riemann_zeta_known_values() {
        let cases = [
            (2.0, PI * PI / 6.0),
            (4.0, PI.powi(4) / 90.0),
            (3.0, 1.202_056_903_159_594_2),
            (0.5, -1.460_354_508_809_586_8),
            (0.0, -0.5),
            (-1.0, -1.0 / 12.0),
        ];
        for (s, expected) in cases {
            let (v, err) = riemann_zeta(c(s, 0.0));
            // Direct-sum round-off grows like N^{1-s} eps.
            assert!((v.re - expected).abs() < 1e-12 * expected.abs().max(1.0), "s={s}: {v}");
            assert!(v.im.abs() < 1e-15 && err < 1e-14);
        }
    }

    #[test]
    fn riemann_zeta_first_zero() {
        let (v, _) = riemann_zeta(c(0.5, 14.134_725_141_734_693));
        assert!(v.norm() < 1e-13, "{v}");
    }

    #[test]
    fn riemann_zeta_laurent_at_one() {
        // ζ(s) = 1/(s-1) + γ_E + O(s-1)
        let s = 1.0 + 1e-6;
        let (v, _) = riemann_zeta(c(s, 0.0));
        assert!((v.re - 1.0 / (s - 1.0) - 0.577_215_664_901_532_9).abs() < 1e-6);
    }

    #[test]
    fn interval_and_toy_closed_forms() {
        assert!((interval_zeta(c(2.0, 0.0)).re - 1.0 / 6.0).abs() < 1e-15);
        assert!((interval_zeta(c(4.0, 0.0)).re - 1.0 / 90.0).abs() < 1e-16);
        let m = FractalModel::toy(3, 5.0).unwrap();
        assert!((toy_zeta(&m, c(4.0, 0.0)).re - 1.0 / 0.88).abs() < 1e-14);
        assert!((toy_residue(&m) - 1.242_669_8).abs() < 1e-7);
    }
}
