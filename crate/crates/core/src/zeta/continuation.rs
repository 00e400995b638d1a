//! Meromorphic continuation of `ζ(s, γ)` through the Mellin transform
//!
//! ```text
//! ζ(s, γ) Γ(σ) = ∫_0^∞ t^{σ-1} Z(t) e^{-γt} dt,    σ = s/2,
//! ```
//!
//! split at `t = 1`. On `(0, 1)` the fitted expansion terms
//! `t^{-a_k} G_k(log_τ 1/t) = Σ_n g_n t^{-a_k - iω_n}` integrate in closed form
//! and carry every pole; what is left of `Z` is integrated numerically down to
//! the fit scale `t_c` and bounded below it. The piece on `(1, ∞)` is entire.
//!
//! Two modes differ in what is treated analytically:
//! - `Lemma`: only the leading term. Below `t_c` the rest of `Z` is modeled by
//!   the midpoint of the certified band `c1 t^{-b} <= leading - Z <= c2 t^{-b}`,
//!   `b = d_∂/d_w`, which continues to `Re s > 2b`.
//! - `Expbounds`: every term of the expansion. The remainder must fit a
//!   certificate `|R(t)| <= A exp(-c t^{-β})`, `β = 1/(d_w - 1)`; then the
//!   continuation is valid in the whole plane.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::poles::{predicted_poles_towers, Region};
use super::{check_shift, realify, Method, ZetaPoint};
use crate::error::{Error, Result};
use crate::model::FractalModel;
use crate::partition::{
    asymptotic_certificate, fit_expansion, partition_value, tail_certificate, AsymptoticCertificate,
    OscillationProfile, TailCertificate, Window,
};
use crate::special::{rgamma, rgamma_rel_error, GaussLegendre};
use crate::spectrum::SpectrumBatch;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Lemma,
    Expbounds,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Lemma => "lemma",
            Mode::Expbounds => "expbounds",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lemma" => Ok(Mode::Lemma),
            "expbounds" => Ok(Mode::Expbounds),
            other => Err(Error::Config(format!(
                "unknown mode '{other}' (expected lemma or expbounds)"
            ))),
        }
    }
}

/// Half-plane `Re s > half_plane_bound` where continued values are produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuationDomain {
    pub half_plane_bound: f64,
    /// Width of an extension beyond the bound, when one is known.
    pub epsilon: Option<f64>,
}

impl ContinuationDomain {
    pub fn contains(&self, s: Complex64) -> bool {
        s.re > self.half_plane_bound
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuationOptions {
    pub mode: Mode,
    pub n_max: usize,
    /// Fit window; chosen automatically when absent.
    pub window: Option<Window>,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        ContinuationOptions {
            mode: Mode::Lemma,
            n_max: 8,
            window: None,
        }
    }
}

/// `|R(t)| <= amplitude · exp(-rate · t^{-beta})` on `(0, window.1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemainderCertificate {
    pub amplitude: f64,
    pub rate: f64,
    pub beta: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum I1Mode {
    ClosedFormFromG,
    Numeric,
}

/// The three pieces of `ζ(2σ, γ) Γ(σ) = I1 + I2 + I3`, not divided by `Γ(σ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MellinSplit {
    pub i1: Complex64,
    pub i2: Complex64,
    pub i3: Complex64,
    pub gamma: f64,
    pub s_half: Complex64,
    pub i1_mode: I1Mode,
    /// Bound on the error of `I1 + I2 + I3`.
    pub error_bound: f64,
}

impl MellinSplit {
    pub fn zeta(&self) -> Complex64 {
        (self.i1 + self.i2 + self.i3) * rgamma(self.s_half)
    }
}

/// Quadrature node in `u = log t`.
#[derive(Debug, Clone, Copy)]
struct Node {
    u: f64,
    t: f64,
    weight: f64,
    /// Integrand factor (remainder on `(t_c, 1)`, `Z` on `(1, ∞)`).
    value: f64,
    truncation: f64,
    magnitude: f64,
}

/// Noise floor, relative to `Z`, below which the remainder is not fitted.
const REMAINDER_FLOOR: f64 = 1e-13;
const REMAINDER_SAMPLES: usize = 200;
const REMAINDER_MIN_POINTS: usize = 20;
const REMAINDER_R2: f64 = 0.99;
/// Shrink factor applied to the fitted decay rate.
const RATE_SHRINK: f64 = 0.9;
/// Continued values are refused this close to a predicted pole.
pub const POLE_EXCLUSION: f64 = 1e-6;
/// Window search accepts samples whose truncation error is below this fraction of `Z`.
const WINDOW_ACCURACY: f64 = 1e-14;
const VALIDATION_SAMPLES: usize = 64;
const MAX_WINDOW_CANDIDATES: usize = 64;
const PANEL_WIDTH: f64 = 0.25;
const GL_ORDER: usize = 16;

#[derive(Debug, Clone)]
pub struct Continuation {
    pub model: FractalModel,
    pub mode: Mode,
    pub domain: ContinuationDomain,
    pub window: Window,
    pub t_c: f64,
    /// Fitted profiles of every expansion term, leading first.
    pub profiles: Vec<OscillationProfile>,
    /// Number of leading profiles integrated in closed form.
    pub analytic_terms: usize,
    /// Max `|Z - Σ_k terms|` on the period just above the fitted ones.
    pub validation_residual: f64,
    /// Error bound on each `G_k` as a function.
    pub profile_errors: Vec<f64>,
    pub tail: TailCertificate,
    pub deviation: Option<AsymptoticCertificate>,
    pub remainder: Option<RemainderCertificate>,
    lambda_min: f64,
    i2_nodes: Vec<Node>,
    i3_nodes: Vec<Node>,
    i3_end: f64,
}

fn analytic_sum(profiles: &[OscillationProfile], t: f64) -> f64 {
    profiles.iter().map(|p| p.term(t)).sum()
}

fn log_grid(lo: f64, hi: f64, points: usize) -> impl Iterator<Item = f64> {
    let step = (hi / lo).ln() / (points - 1) as f64;
    (0..points).map(move |i| lo * (step * i as f64).exp())
}

/// Max `|Z - Σ_k terms|` on `[lo, hi]`.
fn validation_residual(batch: &SpectrumBatch, profiles: &[OscillationProfile], lo: f64, hi: f64) -> Result<f64> {
    let mut worst = 0.0f64;
    for t in log_grid(lo, hi, VALIDATION_SAMPLES) {
        let z = partition_value(batch, t)?.value;
        worst = worst.max((z - analytic_sum(profiles, t)).abs());
    }
    Ok(worst)
}

/// `Σ_j (-γ)^j / (j! (z + j))`, skipping the index `skip`.
fn e_series(z: Complex64, gamma: f64, skip: Option<usize>) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut coeff = 1.0;
    for j in 0..1000usize {
        if j > 0 {
            coeff *= -gamma / j as f64;
        }
        if coeff == 0.0 {
            break;
        }
        if Some(j) != skip {
            let term = coeff / (z + j as f64);
            sum += term;
            if j as f64 > gamma.abs() && term.norm() <= 1e-17 * sum.norm() {
                break;
            }
        }
    }
    sum
}

/// `∫_0^{t0} t^{z-1} e^{-γt} dt`, continued in `z`.
fn e_partial(z: Complex64, gamma: f64, t0: f64) -> Complex64 {
    e_partial_skip(z, gamma, t0, None)
}

fn e_partial_skip(z: Complex64, gamma: f64, t0: f64, skip: Option<usize>) -> Complex64 {
    (z * t0.ln()).exp() * e_series(z, gamma * t0, skip)
}

fn sigma_removable(sigma: Complex64) -> Option<i64> {
    let m = (-sigma.re).round();
    (m >= 0.0 && sigma.im == 0.0 && (sigma.re + m).abs() < 0.25).then_some(m as i64)
}

/// `Π_{i<m} (σ + i) / Γ(σ + m + 1)`, equal to `1 / (Γ(σ) (σ + m))` off `σ = -m`.
fn removable_factor(sigma: Complex64, m: i64) -> Complex64 {
    let mut p = Complex64::new(1.0, 0.0);
    for i in 0..m {
        p *= sigma + i as f64;
    }
    p * rgamma(sigma + (m + 1) as f64)
}

impl Continuation {
    pub fn new(batch: &SpectrumBatch, options: ContinuationOptions) -> Result<Self> {
        let model = batch.model.clone();
        if batch.is_empty() || batch.tail.is_complete() {
            return Err(Error::Domain(
                "continuation needs an infinite spectrum with a tail bound; a finite batch has an entire zeta".into(),
            ));
        }
        if batch.has_zero_eigenvalue() {
            return Err(Error::Spectrum(
                "continuation needs the zero eigenvalue excluded".into(),
            ));
        }
        let exponents = model.expansion_exponents();
        let terms = exponents.len();
        let tau = model.tau;
        let tail = tail_certificate(batch, 20.0)?;

        let (window, profiles, validation) = match options.window {
            Some(w) => {
                let profiles = fit_expansion(batch, &model, options.n_max, w)?;
                let lo = w.t_lo * tau.powi(terms as i32);
                let v = validation_residual(batch, &profiles, lo, lo * tau)?;
                (w, profiles, v)
            }
            None => Self::choose_window(batch, &model, options.n_max)?,
        };
        let t_c = window.t_lo;
        let t_v = t_c * tau.powi(terms as i32 + 1);
        let profile_errors: Vec<f64> = profiles
            .iter()
            .map(|p| p.fit_residual + p.coefficient_change + validation * t_v.powf(p.exponent))
            .collect();

        let analytic_terms = match options.mode {
            Mode::Lemma => 1,
            Mode::Expbounds => terms,
        };
        let analytic = &profiles[..analytic_terms];

        let (domain, deviation, remainder) = match options.mode {
            Mode::Lemma => {
                let dev = asymptotic_certificate(batch, &model, &profiles[0], (t_c, tau * t_c))?;
                let domain = ContinuationDomain {
                    half_plane_bound: 2.0 * model.d_boundary / model.d_w,
                    epsilon: None,
                };
                (domain, Some(dev), None)
            }
            Mode::Expbounds => {
                let cert = Self::fit_remainder(batch, &model, analytic, t_c * tau.powi(terms as i32 + 1))?;
                let domain = ContinuationDomain {
                    half_plane_bound: f64::NEG_INFINITY,
                    epsilon: None,
                };
                (domain, None, Some(cert))
            }
        };

        let gl = GaussLegendre::new(GL_ORDER);
        let mut i2_nodes = Vec::new();
        let u_lo = t_c.ln();
        let panels = (-u_lo / PANEL_WIDTH).ceil().max(1.0) as usize;
        let width = -u_lo / panels as f64;
        for i in 0..panels {
            let a = u_lo + width * i as f64;
            for (u, w) in gl.mapped(a, a + width) {
                let t = u.exp();
                let s = partition_value(batch, t)?;
                i2_nodes.push(Node {
                    u,
                    t,
                    weight: w,
                    value: s.value - analytic_sum(analytic, t),
                    truncation: s.truncation_error,
                    magnitude: s.value,
                });
            }
        }

        let mut i3_nodes = Vec::new();
        let c4 = tail.c4;
        let i3_end = (745.0 + tail.c3.ln().max(0.0)) / c4;
        let mut a = 0.0f64;
        while a.exp() < i3_end && i3_nodes.len() < 400_000 {
            let width = PANEL_WIDTH.min(2.0 / (c4 * a.exp()));
            for (u, w) in gl.mapped(a, a + width) {
                let t = u.exp();
                let s = partition_value(batch, t)?;
                i3_nodes.push(Node {
                    u,
                    t,
                    weight: w,
                    value: s.value,
                    truncation: s.truncation_error,
                    magnitude: s.value,
                });
            }
            a += width;
        }
        let i3_end = a.exp();

        Ok(Continuation {
            model,
            mode: options.mode,
            domain,
            window,
            t_c,
            profiles,
            analytic_terms,
            validation_residual: validation,
            profile_errors,
            tail,
            deviation,
            remainder,
            lambda_min: batch.lambda_min,
            i2_nodes,
            i3_nodes,
            i3_end,
        })
    }

    /// Among periods `τ^i t_acc` above the deepest accurate scale `t_acc`,
    /// pick the one whose fit best predicts `Z` on the next, unfitted period.
    fn choose_window(
        batch: &SpectrumBatch,
        model: &FractalModel,
        n_max: usize,
    ) -> Result<(Window, Vec<OscillationProfile>, f64)> {
        let tau = model.tau;
        let terms = model.expansion_exponents().len() as i32;
        let accurate = |t: f64| -> Result<bool> {
            let s = partition_value(batch, t)?;
            Ok(s.truncation_error <= WINDOW_ACCURACY * s.value)
        };
        let mut j = 0i32;
        while accurate(tau.powi(-(j + 1)))? && j < 1000 {
            j += 1;
        }
        let t_acc = tau.powi(-j);
        let mut best: Option<(f64, Window, Vec<OscillationProfile>, f64)> = None;
        for i in 0..MAX_WINDOW_CANDIDATES as i32 {
            let t_lo = t_acc * tau.powi(i);
            if t_lo * tau.powi(terms + 1) > 1.0 {
                break;
            }
            let window = Window::new(t_lo, t_lo * tau);
            let Ok(profiles) = fit_expansion(batch, model, n_max, window) else {
                continue;
            };
            if profiles.iter().any(|p| !p.warnings.is_empty()) {
                continue;
            }
            let lo = t_lo * tau.powi(terms);
            let v = validation_residual(batch, &profiles, lo, lo * tau)?;
            let score = v + 10.0 * f64::EPSILON * partition_value(batch, t_lo)?.value;
            if best.as_ref().is_none_or(|b| score < b.0) {
                best = Some((score, window, profiles, v));
            }
        }
        best.map(|(_, w, p, v)| (w, p, v)).ok_or_else(|| {
            Error::NonConvergence(format!(
                "no clean fit window between t = {t_acc:.3e} and 1; extend the spectrum"
            ))
        })
    }

    fn fit_remainder(
        batch: &SpectrumBatch,
        model: &FractalModel,
        analytic: &[OscillationProfile],
        t_lo: f64,
    ) -> Result<RemainderCertificate> {
        if model.d_w <= 1.0 {
            return Err(Error::Domain("exp remainder certificate needs d_w > 1".into()));
        }
        let beta = 1.0 / (model.d_w - 1.0);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for t in log_grid(t_lo, 1.0, REMAINDER_SAMPLES) {
            let z = partition_value(batch, t)?.value;
            let r = (z - analytic_sum(analytic, t)).abs();
            if r > REMAINDER_FLOOR * z {
                xs.push(t.powf(-beta));
                ys.push(r.ln());
            }
        }
        let refuse = |why: String| {
            Error::NonConvergence(format!(
                "remainder is not O(exp(-c t^-{beta:.4})): {why}; expbounds continuation refused"
            ))
        };
        if xs.len() < REMAINDER_MIN_POINTS {
            return Err(refuse(format!("only {} samples above the noise floor", xs.len())));
        }
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
        let slope = sxy / sxx;
        let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 0.0 };
        if !(slope < 0.0) || r_squared < REMAINDER_R2 {
            return Err(refuse(format!(
                "log-linear fit has slope {slope:.3e}, R² {r_squared:.4}"
            )));
        }
        let rate = -RATE_SHRINK * slope;
        let amplitude = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| y + rate * x)
            .fold(f64::NEG_INFINITY, f64::max)
            .exp();
        Ok(RemainderCertificate {
            amplitude,
            rate,
            beta,
            r_squared,
            window: (t_lo, 1.0),
            samples: xs.len(),
        })
    }

    fn check(&self, s: Complex64, gamma: f64) -> Result<()> {
        if !(gamma.is_finite() && gamma > -self.tail.c4 && gamma > -self.lambda_min) {
            return Err(Error::Domain(format!(
                "gamma = {gamma} must exceed -c4 = {}",
                -self.tail.c4
            )));
        }
        if !self.domain.contains(s) {
            return Err(Error::Domain(format!(
                "s = {s} lies outside the continuation domain Re(s) > {} ({} mode)",
                self.domain.half_plane_bound, self.mode
            )));
        }
        let region = Region::new(
            (s.re - 2.0 * POLE_EXCLUSION, s.re + 2.0 * POLE_EXCLUSION),
            (s.im - POLE_EXCLUSION, s.im + POLE_EXCLUSION),
        );
        let towers = Some(self.analytic_terms);
        if let Some(p) = predicted_poles_towers(&self.model, &region, gamma, towers)
            .into_iter()
            .find(|p| (p.position - s).norm() < POLE_EXCLUSION)
        {
            return Err(Error::Domain(format!(
                "s = {s} is within {POLE_EXCLUSION:e} of the predicted pole {}",
                p.position
            )));
        }
        Ok(())
    }

    pub fn evaluate(&self, s: Complex64, gamma: f64) -> Result<ZetaPoint> {
        self.check(s, gamma)?;
        let sigma = 0.5 * s;
        let removable_m = sigma_removable(sigma);

        let mut regular = Complex64::new(0.0, 0.0);
        let mut regular_error = 0.0;
        let mut special = Complex64::new(0.0, 0.0);
        let mut special_error = 0.0;
        let mut rounding = 0.0;

        for (profile, &eps) in self.profiles[..self.analytic_terms].iter().zip(&self.profile_errors) {
            let a = profile.exponent;
            for (n, g) in profile.modes() {
                let z = sigma - a - Complex64::new(0.0, self.model.mode_frequency(n));
                // Index j at which 1/(z + j) meets a zero of 1/Γ(σ).
                let skip = match removable_m {
                    Some(m) if n == 0 && (a - a.round()).abs() < 1e-12 && m + a.round() as i64 >= 0 => {
                        Some((m + a.round() as i64) as usize)
                    }
                    _ => None,
                };
                let series = e_series(z, gamma, skip);
                regular += g * series;
                rounding += (g * series).norm();
                regular_error += eps * e_partial_skip(z, gamma, self.t_c, skip).norm();
                if let (Some(j), Some(m)) = (skip, removable_m) {
                    let mut coeff = 1.0;
                    for i in 1..=j {
                        coeff *= -gamma / i as f64;
                    }
                    let factor = removable_factor(sigma, m);
                    special += g * coeff * factor;
                    special_error += eps * coeff.abs() * self.t_c.powf(j as f64 + z.re) * factor.norm();
                }
            }
        }

        let (i2, i2_error) = self.i2(sigma, gamma);
        let (i3, i3_error) = self.i3(sigma, gamma)?;
        let bracket = regular + i2 + i3;
        let bracket_error = regular_error + i2_error + i3_error + 8.0 * f64::EPSILON * rounding;
        let inv_gamma = rgamma(sigma);
        let value = inv_gamma * bracket + special;
        let error_bound = inv_gamma.norm() * (bracket_error + rgamma_rel_error(sigma) * bracket.norm())
            + special_error
            + 8.0 * f64::EPSILON * special.norm();
        if !error_bound.is_finite() || !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::NonConvergence(format!("continued value at s = {s} overflowed")));
        }
        Ok(ZetaPoint {
            s,
            gamma,
            value: realify(s, value, error_bound)?,
            method: Method::Continued,
            error_bound,
        })
    }

    /// `∫_{t_c}^1 t^{σ-1} R e^{-γt} dt` plus the modeled part on `(0, t_c)`,
    /// with its error bound.
    fn i2(&self, sigma: Complex64, gamma: f64) -> (Complex64, f64) {
        let mut sum = Complex64::new(0.0, 0.0);
        let mut truncation = 0.0;
        let mut magnitude = 0.0;
        for node in &self.i2_nodes {
            let kernel = node.weight * (sigma * node.u - gamma * node.t).exp();
            sum += kernel * node.value;
            let k = kernel.norm();
            truncation += k * node.truncation;
            magnitude += k * node.magnitude;
        }
        let mut error = truncation + 8.0 * f64::EPSILON * magnitude;
        let x = sigma.re;
        match (&self.deviation, &self.remainder) {
            (Some(dev), _) => {
                let b = self.model.d_boundary / self.model.d_w;
                sum -= 0.5 * (dev.c1 + dev.c2) * e_partial(sigma - b, gamma, self.t_c);
                error += 0.5 * (dev.c2 - dev.c1) * self.t_c.powf(x - b) / (x - b) * (-gamma * self.t_c).exp().max(1.0);
            }
            (None, Some(cert)) => error += self.remainder_bound(cert, x, gamma),
            (None, None) => unreachable!("continuation carries a remainder model"),
        }
        (sum, error)
    }

    /// `∫_0^{t_c} t^{x-1} A exp(-c t^{-β}) e^{max(0,-γ) t} dt`.
    fn remainder_bound(&self, cert: &RemainderCertificate, x: f64, gamma: f64) -> f64 {
        let g = (-gamma).max(0.0);
        let exponent = |u: f64| x * u + cert.amplitude.ln() - cert.rate * (-cert.beta * u).exp() + g * u.exp();
        let gl = GaussLegendre::new(GL_ORDER);
        let mut total = 0.0;
        let mut hi = self.t_c.ln();
        for _ in 0..100_000 {
            let lo = hi - PANEL_WIDTH;
            let panel: f64 = gl.mapped(lo, hi).map(|(u, w)| w * exponent(u).exp()).sum();
            total += panel;
            // Past the peak the integrand falls double-exponentially.
            let falling = x + cert.rate * cert.beta * (-cert.beta * lo).exp() > 0.0;
            if falling && panel <= 1e-18 * total {
                break;
            }
            hi = lo;
        }
        total
    }

    /// `∫_1^∞ t^{σ-1} Z e^{-γt} dt` with the tail beyond the last node bounded.
    fn i3(&self, sigma: Complex64, gamma: f64) -> Result<(Complex64, f64)> {
        let mut sum = Complex64::new(0.0, 0.0);
        let mut magnitude = 0.0;
        let mut truncation = 0.0;
        for node in &self.i3_nodes {
            let kernel = node.weight * (sigma * node.u - gamma * node.t).exp();
            sum += kernel * node.value;
            let k = kernel.norm();
            magnitude += k * node.magnitude;
            truncation += k * node.truncation;
        }
        let kappa = self.tail.c4 + gamma;
        let x = sigma.re;
        let t_end = self.i3_end;
        // ∫_{t_end}^∞ t^{x-1} c3 e^{-κt} dt
        let ln_tail = if x <= 1.0 {
            self.tail.c3.ln() + (x - 1.0) * t_end.ln() - kappa * t_end - kappa.ln()
        } else {
            self.tail.c3.ln() - x * kappa.ln() + crate::special::ln_upper_incomplete_gamma(x, kappa * t_end)
        };
        Ok((sum, ln_tail.exp() + truncation + 8.0 * f64::EPSILON * magnitude))
    }

    /// The Mellin pieces at `σ = s/2` (no pole-proximity or domain checks for
    /// the numeric route beyond convergence of its integrals).
    pub fn split(&self, s_half: Complex64, gamma: f64, i1_mode: I1Mode) -> Result<MellinSplit> {
        let s = 2.0 * s_half;
        let (i1, i1_error) = match i1_mode {
            I1Mode::ClosedFormFromG => {
                self.check(s, gamma)?;
                let mut i1 = Complex64::new(0.0, 0.0);
                let mut err = 0.0;
                for (profile, &eps) in self.profiles[..self.analytic_terms].iter().zip(&self.profile_errors) {
                    for (n, g) in profile.modes() {
                        let z = s_half - profile.exponent - Complex64::new(0.0, self.model.mode_frequency(n));
                        i1 += g * e_series(z, gamma, None);
                        err += eps * e_partial(z, gamma, self.t_c).norm();
                    }
                }
                (i1, err)
            }
            I1Mode::Numeric => self.i1_numeric(s_half, gamma)?,
        };
        let (i2, i2_error) = self.i2(s_half, gamma);
        let (i3, i3_error) = self.i3(s_half, gamma)?;
        Ok(MellinSplit {
            i1,
            i2,
            i3,
            gamma,
            s_half,
            i1_mode,
            error_bound: i1_error + i2_error + i3_error,
        })
    }

    /// `∫_0^1 t^{σ-1} (analytic terms) e^{-γt} dt` by quadrature; needs `Re σ` above every exponent.
    fn i1_numeric(&self, sigma: Complex64, gamma: f64) -> Result<(Complex64, f64)> {
        check_shift_value(self.lambda_min, gamma)?;
        let analytic = &self.profiles[..self.analytic_terms];
        let gap = analytic
            .iter()
            .map(|p| sigma.re - p.exponent)
            .fold(f64::INFINITY, f64::min);
        if !(gap > 0.0) {
            return Err(Error::Domain(format!(
                "numeric I1 needs Re(s) > d_S (Re σ = {} )",
                sigma.re
            )));
        }
        // t^{gap} < 1e-17 below u_min.
        let u_min = -39.2 / gap;
        let panels = (-u_min / PANEL_WIDTH).ceil() as usize;
        let width = -u_min / panels as f64;
        let gl = GaussLegendre::new(GL_ORDER);
        let mut sum = Complex64::new(0.0, 0.0);
        let mut magnitude = 0.0;
        for i in 0..panels {
            let a = u_min + width * i as f64;
            for (u, w) in gl.mapped(a, a + width) {
                let t = u.exp();
                let term = w * (sigma * u - gamma * t).exp() * analytic_sum(analytic, t);
                sum += term;
                magnitude += term.norm();
            }
        }
        let mut err = 8.0 * f64::EPSILON * magnitude;
        // Profile errors, as in the closed form, and the neglected (0, e^{u_min}).
        for (profile, &eps) in analytic.iter().zip(&self.profile_errors) {
            let b = sigma.re - profile.exponent;
            let g_abs: f64 = profile.modes().map(|(_, g)| g.norm()).sum();
            err += eps * self.t_c.powf(b) / b + g_abs * u_min.exp().powf(b) / b;
        }
        Ok((sum, err))
    }

    /// Every pole of the continued function inside `region`, by tower.
    pub fn predicted_poles(&self, region: &Region, gamma: f64) -> Vec<super::poles::PoleEstimate> {
        predicted_poles_towers(&self.model, region, gamma, Some(self.analytic_terms))
    }
}

fn check_shift_value(lambda_min: f64, gamma: f64) -> Result<()> {
    if !(gamma > -lambda_min) {
        return Err(Error::Domain(format!(
            "gamma = {gamma} must exceed -lambda_min = {}",
            -lambda_min
        )));
    }
    Ok(())
}

/// `ζ(s, γ)` by continuation with default options in the given mode.
pub fn zeta_continued(batch: &SpectrumBatch, s: Complex64, gamma: f64, mode: Mode) -> Result<ZetaPoint> {
    check_shift(batch, gamma)?;
    let options = ContinuationOptions {
        mode,
        ..ContinuationOptions::default()
    };
    Continuation::new(batch, options)?.evaluate(s, gamma)
}

/// The Mellin pieces at `s_half` with the leading term integrated numerically.
pub fn mellin_split_numeric(batch: &SpectrumBatch, s_half: Complex64, gamma: f64) -> Result<MellinSplit> {
    check_shift(batch, gamma)?;
    if 2.0 * s_half.re <= batch.model.d_s {
        return Err(Error::Domain(format!(
            "numeric Mellin split needs Re(2 s_half) > d_S, got {}",
            2.0 * s_half.re
        )));
    }
    Continuation::new(batch, ContinuationOptions::default())?.split(s_half, gamma, I1Mode::Numeric)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{interval_zeta, toy_zeta};
    use crate::spectrum::{interval_spectrum, toy_geometric_spectrum};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn options(mode: Mode) -> ContinuationOptions {
        ContinuationOptions {
            mode,
            ..ContinuationOptions::default()
        }
    }

    #[test]
    fn interval_lemma_matches_riemann() {
        let b = interval_spectrum(2000).unwrap();
        let cont = Continuation::new(&b, options(Mode::Lemma)).unwrap();
        for &s in &[c(0.5, 0.0), c(0.3, 4.0), c(1.5, -2.0), c(2.0, 0.0)] {
            let p = cont.evaluate(s, 0.0).unwrap();
            let exact = interval_zeta(s);
            let diff = (p.value - exact).norm();
            assert!(
                diff <= p.error_bound && p.error_bound < 1e-6,
                "s={s}: diff {diff:e} bound {:e}",
                p.error_bound
            );
        }
        let half = cont.evaluate(c(0.5, 0.0), 0.0).unwrap();
        assert_eq!(half.value.im, 0.0);
        assert!((half.value.re + 0.823_916_802_157_369).abs() < 1e-6);
    }

    #[test]
    fn interval_expbounds_reaches_left_half_plane() {
        let b = interval_spectrum(2000).unwrap();
        let cont = Continuation::new(&b, options(Mode::Expbounds)).unwrap();
        assert!(cont.remainder.unwrap().r_squared > 0.99);
        for &s in &[c(-1.0, 0.0), c(-2.0, 0.0), c(-0.5, 3.0), c(0.0, 0.0)] {
            let p = cont.evaluate(s, 0.0).unwrap();
            let exact = interval_zeta(s);
            let diff = (p.value - exact).norm();
            // The oracle itself carries ~1e-11 of summation error.
            assert!(
                diff <= p.error_bound + 1e-10 && p.error_bound < 1e-6,
                "s={s}: diff {diff:e} bound {:e}",
                p.error_bound
            );
        }
    }

    #[test]
    fn toy_lemma_matches_closed_form() {
        let m = FractalModel::toy(3, 5.0).unwrap();
        let b = toy_geometric_spectrum(&m, 40).unwrap();
        let cont = Continuation::new(&b, options(Mode::Lemma)).unwrap();
        for &s in &[c(m.d_s - 0.5, 0.0), c(m.d_s + 0.5, 3.0), c(1.0, -5.0), c(m.d_s, 1.0)] {
            let p = cont.evaluate(s, 0.0).unwrap();
            let exact = toy_zeta(&m, s);
            let diff = (p.value - exact).norm();
            assert!(
                diff <= p.error_bound && p.error_bound < 1e-6,
                "s={s}: diff {diff:e} bound {:e}",
                p.error_bound
            );
        }
    }

    #[test]
    fn toy_expbounds_is_refused() {
        let m = FractalModel::toy(3, 5.0).unwrap();
        let b = toy_geometric_spectrum(&m, 40).unwrap();
        let err = Continuation::new(&b, options(Mode::Expbounds)).unwrap_err();
        assert!(matches!(err, Error::NonConvergence(_)), "{err}");
    }

    #[test]
    fn refusals() {
        let b = interval_spectrum(2000).unwrap();
        let cont = Continuation::new(&b, options(Mode::Lemma)).unwrap();
        assert!(cont.evaluate(c(1.0 + 1e-8, 0.0), 0.0).is_err());
        assert!(cont.evaluate(c(-0.5, 0.0), 0.0).is_err());
        assert!(cont.evaluate(c(0.5, 0.0), -20.0).is_err());
        assert!("sideways".parse::<Mode>().is_err());
        assert_eq!("expbounds".parse::<Mode>().unwrap(), Mode::Expbounds);
    }

    #[test]
    fn numeric_split_agrees_with_closed_form() {
        let b = interval_spectrum(2000).unwrap();
        let sigma = c(1.4, 0.7);
        let numeric = mellin_split_numeric(&b, sigma, 0.5).unwrap();
        let cont = Continuation::new(&b, ContinuationOptions::default()).unwrap();
        let closed = cont.split(sigma, 0.5, I1Mode::ClosedFormFromG).unwrap();
        assert!(
            (numeric.i1 - closed.i1).norm() < 1e-8,
            "{} vs {}",
            numeric.i1,
            closed.i1
        );
        assert_eq!(numeric.i2, closed.i2);
        let direct = super::super::zeta_direct(&b, 2.0 * sigma, 0.5).unwrap();
        assert!((numeric.zeta() - direct.value).norm() < 1e-6);
        assert!(mellin_split_numeric(&b, c(0.4, 0.0), 0.0).is_err());
    }

    #[test]
    fn shifted_interval_against_direct_sum() {
        let b = interval_spectrum(2000).unwrap();
        let cont = Continuation::new(&b, options(Mode::Lemma)).unwrap();
        let s = c(3.0, 1.0);
        let p = cont.evaluate(s, 2.0).unwrap();
        let d = super::super::zeta_direct(&b, s, 2.0).unwrap();
        assert!((p.value - d.value).norm() <= p.error_bound + d.error_bound);
    }
}
