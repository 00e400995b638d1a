//! Spectral zeta function `ζ(s, γ) = Σ m (λ + γ)^{-s/2}`.
//!
//! [`zeta_direct`] sums the series where it converges absolutely;
//! [`continuation::Continuation`] continues it through the Mellin transform
//! of the heat trace; [`poles`] predicts and locates its poles.

pub mod continuation;
pub mod poles;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::CompensatedSum;
use crate::spectrum::SpectrumBatch;

pub use continuation::{Continuation, ContinuationDomain, ContinuationOptions, I1Mode, MellinSplit, Mode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Direct,
    Continued,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Direct => "direct",
            Method::Continued => "continued",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZetaPoint {
    pub s: Complex64,
    pub gamma: f64,
    pub value: Complex64,
    pub method: Method,
    pub error_bound: f64,
}

/// Real `s` gives a real value; the imaginary round-off is checked and dropped.
pub(crate) fn realify(s: Complex64, value: Complex64, error_bound: f64) -> Result<Complex64> {
    if s.im != 0.0 {
        return Ok(value);
    }
    if value.im.abs() > 1e-8 * value.re.abs().max(1.0) + error_bound {
        return Err(Error::NonConvergence(format!(
            "zeta at real s = {} has imaginary part {:.3e}",
            s.re, value.im
        )));
    }
    Ok(Complex64::new(value.re, 0.0))
}

pub(crate) fn check_shift(batch: &SpectrumBatch, gamma: f64) -> Result<()> {
    let smallest = batch
        .smallest()
        .ok_or_else(|| Error::Spectrum("zeta of an empty batch".into()))?;
    if !(gamma.is_finite() && gamma > -smallest) {
        return Err(Error::Domain(format!(
            "gamma = {gamma} must exceed -lambda_min = {}: λ + γ would leave the positive axis",
            -smallest
        )));
    }
    Ok(())
}

/// `Σ_{λ > Λ} (λ + γ)^{-x}` bounded through `#{λ_l <= λ} <= C λ^p`.
fn direct_tail(batch: &SpectrumBatch, x: f64, gamma: f64) -> f64 {
    if batch.tail.is_complete() {
        return 0.0;
    }
    let (c, p) = (batch.tail.constant, batch.tail.exponent);
    let lam = batch.cutoff;
    let shift = if gamma < 0.0 {
        (1.0 + gamma / lam).powf(-x - 1.0)
    } else {
        1.0
    };
    c * x * lam.powf(p - x) / (x - p) * shift
}

pub fn zeta_direct(batch: &SpectrumBatch, s: Complex64, gamma: f64) -> Result<ZetaPoint> {
    check_shift(batch, gamma)?;
    let d_s = batch.model.d_s;
    if s.re <= d_s {
        return Err(Error::Domain(format!(
            "Re(s) = {} <= d_S = {d_s}: the series diverges; use the continuation",
            s.re
        )));
    }
    let x = 0.5 * s.re;
    if !batch.tail.is_complete() && x <= batch.tail.exponent {
        return Err(Error::Domain(format!(
            "Re(s)/2 = {x} does not exceed the tail exponent {}",
            batch.tail.exponent
        )));
    }
    let half = 0.5 * s;
    let mut re = CompensatedSum::default();
    let mut im = CompensatedSum::default();
    let mut magnitude = 0.0;
    for p in batch.pairs() {
        let term = p.multiplicity as f64 * (-half * (p.value + gamma).ln()).exp();
        re.add(term.re);
        im.add(term.im);
        magnitude += term.norm();
    }
    let value = Complex64::new(re.value(), im.value());
    let error_bound = direct_tail(batch, x, gamma) + 8.0 * f64::EPSILON * magnitude;
    Ok(ZetaPoint {
        s,
        gamma,
        value: realify(s, value, error_bound)?,
        method: Method::Direct,
        error_bound,
    })
}

/// Central-difference audit of the `γ`-derivative of `ζ(s, γ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalEquationResidual {
    pub s: Complex64,
    pub gamma: f64,
    /// Richardson-extrapolated `∂ζ/∂γ`.
    pub derivative: Complex64,
    /// `|D + γ ζ(s+2, γ)|`.
    pub paper_form: f64,
    /// `|D + (s/2) ζ(s+2, γ)|`.
    pub direct_form: f64,
    /// `|D(h) - D(h/2)|`.
    pub richardson_change: f64,
}

/// Default finite-difference step in `γ`.
pub const FD_STEP: f64 = 1e-4;

/// Both residuals of the `γ`-derivative relation, with `zeta` evaluating `ζ(s, γ)`.
pub fn functional_eq_residual_with<F>(zeta: F, s: Complex64, gamma: f64, h: f64) -> Result<FunctionalEquationResidual>
where
    F: Fn(Complex64, f64) -> Result<Complex64>,
{
    if !(h > 0.0) {
        return Err(Error::Domain(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    let diff =
        |step: f64| -> Result<Complex64> { Ok((zeta(s, gamma + step)? - zeta(s, gamma - step)?) / (2.0 * step)) };
    let coarse = diff(h)?;
    let fine = diff(0.5 * h)?;
    let derivative = (4.0 * fine - coarse) / 3.0;
    let richardson_change = (coarse - fine).norm();
    if richardson_change > 1e-4 * derivative.norm() + 1e-9 {
        return Err(Error::NonConvergence(format!(
            "step h = {h} too large: D(h) and D(h/2) differ by {richardson_change:.3e}"
        )));
    }
    let shifted = zeta(s + 2.0, gamma)?;
    Ok(FunctionalEquationResidual {
        s,
        gamma,
        derivative,
        paper_form: (derivative + gamma * shifted).norm(),
        direct_form: (derivative + 0.5 * s * shifted).norm(),
        richardson_change,
    })
}

/// [`functional_eq_residual_with`] on direct sums of `batch`.
pub fn functional_eq_residual(
    batch: &SpectrumBatch,
    s: Complex64,
    gamma: f64,
    h: f64,
) -> Result<FunctionalEquationResidual> {
    check_shift(batch, gamma - h)?;
    functional_eq_residual_with(|s, g| zeta_direct(batch, s, g).map(|p| p.value), s, gamma, h)
}

/// `ζ(s, γ)` from one spectrum, by direct summation or continuation,
/// whichever carries the smaller error bound.
#[derive(Debug, Clone)]
pub struct ZetaFunction {
    pub batch: SpectrumBatch,
    pub continuation: Option<Continuation>,
}

impl ZetaFunction {
    pub fn direct_only(batch: SpectrumBatch) -> Self {
        ZetaFunction {
            batch,
            continuation: None,
        }
    }

    pub fn new(batch: SpectrumBatch, continuation: Continuation) -> Self {
        ZetaFunction {
            batch,
            continuation: Some(continuation),
        }
    }

    pub fn evaluate(&self, s: Complex64, gamma: f64) -> Result<ZetaPoint> {
        let direct = if s.re > self.batch.model.d_s {
            zeta_direct(&self.batch, s, gamma).ok()
        } else {
            None
        };
        let continued = match &self.continuation {
            Some(c) => match c.evaluate(s, gamma) {
                Ok(p) => Some(p),
                Err(e) if direct.is_none() => return Err(e),
                Err(_) => None,
            },
            None => None,
        };
        match (direct, continued) {
            (Some(d), Some(c)) => Ok(if c.error_bound < d.error_bound { c } else { d }),
            (Some(d), None) => Ok(d),
            (None, Some(c)) => Ok(c),
            (None, None) => zeta_direct(&self.batch, s, gamma),
        }
    }

    /// Values at `points`, skipping those within `exclusion` of a predicted pole.
    pub fn evaluate_grid(&self, points: &[Complex64], gamma: f64, exclusion: f64) -> Result<Vec<ZetaPoint>> {
        let poles: Vec<Complex64> = match (&self.continuation, points.is_empty()) {
            (Some(c), false) => {
                let re = points
                    .iter()
                    .map(|s| s.re)
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
                let im = points
                    .iter()
                    .map(|s| s.im)
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
                let region = poles::Region::new(
                    (re.0 - 2.0 * exclusion, re.1 + exclusion),
                    (im.0 - exclusion, im.1 + exclusion),
                );
                c.predicted_poles(&region, gamma)
                    .into_iter()
                    .map(|p| p.position)
                    .collect()
            }
            _ => Vec::new(),
        };
        points
            .iter()
            .filter(|s| poles.iter().all(|p| (*s - p).norm() >= exclusion))
            .map(|&s| self.evaluate(s, gamma))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::model::FractalModel;
    use crate::oracle::riemann_zeta;
    use crate::spectrum::{interval_spectrum, toy_geometric_spectrum, EigenvaluePair};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn single(value: f64) -> SpectrumBatch {
        SpectrumBatch::complete(FractalModel::interval(), vec![EigenvaluePair::new(value, 1)]).unwrap()
    }

    #[test]
    fn single_term() {
        let p = zeta_direct(&single(4.0), c(2.0, 0.0), 0.0).unwrap();
        assert_eq!(p.value, c(0.25, 0.0));
        assert_eq!(p.method, Method::Direct);
    }

    #[test]
    fn interval_basel_and_quartic() {
        let b = interval_spectrum(10_000).unwrap();
        let p = zeta_direct(&b, c(2.0, 0.0), 0.0).unwrap();
        assert!((p.value.re - 1.0 / 6.0).abs() <= p.error_bound);
        assert!(p.error_bound < 1e-4);
        let p = zeta_direct(&b, c(4.0, 0.0), 0.0).unwrap();
        let oracle = riemann_zeta(c(4.0, 0.0)).0.re / PI.powi(4);
        assert!((p.value.re - oracle).abs() <= p.error_bound + 1e-16);
        assert!((p.value.re - 1.0 / 90.0).abs() < 1e-12);
    }

    #[test]
    fn refuses_outside_convergence() {
        let b = interval_spectrum(100).unwrap();
        let err = zeta_direct(&b, c(1.0, 0.0), 0.0).unwrap_err();
        assert!(err.to_string().contains("continuation"));
        assert!(zeta_direct(&b, c(3.0, 0.0), -PI * PI).is_err());
    }

    #[test]
    fn toy_direct_matches_closed_form() {
        let m = FractalModel::toy(3, 5.0).unwrap();
        let b = toy_geometric_spectrum(&m, 40).unwrap();
        for &s in &[c(m.d_s + 0.5, 0.0), c(4.0, 3.0), c(2.5, -7.0)] {
            let p = zeta_direct(&b, s, 0.0).unwrap();
            let exact = crate::oracle::toy_zeta(&m, s);
            let diff = (p.value - exact).norm();
            assert!(diff <= p.error_bound + 1e-14 && p.error_bound < 1e-6, "s={s}: {diff:e}");
        }
    }

    #[test]
    fn single_eigenvalue_functional_equation() {
        let r = functional_eq_residual(&single(1.0), c(3.0, 0.0), 0.5, FD_STEP).unwrap();
        assert!(r.direct_form < 1e-8, "{}", r.direct_form);
        assert!((r.paper_form - 1.5f64.powf(-2.5)).abs() < 1e-8);
    }

    #[test]
    fn interval_functional_equation() {
        let b = interval_spectrum(20_000).unwrap();
        let r = functional_eq_residual(&b, c(3.0, 0.0), 1.0, FD_STEP).unwrap();
        assert!(r.direct_form < 1e-6, "{}", r.direct_form);
    }

    #[test]
    fn oversized_step_is_rejected() {
        let err = functional_eq_residual(&single(1.0), c(3.0, 0.0), 0.5, 0.4).unwrap_err();
        assert!(matches!(err, Error::NonConvergence(_)));
    }
}
