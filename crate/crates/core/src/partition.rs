//! Heat trace `Z(t) = Σ m e^{-λt}` with certified truncation error, the Weyl
//! ratio, log-periodic Fourier profiles and large/small-time certificates.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::FractalModel;
use crate::special::{ln_upper_incomplete_gamma, CompensatedSum};
use crate::spectrum::SpectrumBatch;

/// A sample is accepted when its truncation error is below this fraction of its value.
pub const ACCEPT_RELATIVE: f64 = 1e-6;

/// Terms with `λt` beyond this are exactly zero in double precision for any
/// `u64` multiplicity.
const NEGLIGIBLE_EXPONENT: f64 = 800.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionSample {
    pub t: f64,
    pub value: f64,
    /// Upper bound on the contribution of eigenvalues beyond the batch cutoff.
    pub truncation_error: f64,
    pub reliable: bool,
}

/// `Σ_{λ > Λ} e^{-λt} <= C t^{-p} Γ(p + 1, Λt)` when `#{λ_l <= λ} <= C λ^p` for `λ >= Λ`.
pub fn truncation_bound(batch: &SpectrumBatch, t: f64) -> f64 {
    if batch.tail.is_complete() {
        return 0.0;
    }
    let p = batch.tail.exponent;
    let x = batch.cutoff * t;
    (batch.tail.constant.ln() - p * t.ln() + ln_upper_incomplete_gamma(p + 1.0, x)).exp()
}

/// `Σ m e^{-(λ - shift)t}` over the batch.
fn shifted_sum(batch: &SpectrumBatch, t: f64, shift: f64) -> f64 {
    let mut sum = CompensatedSum::default();
    for p in batch.pairs() {
        let x = (p.value - shift) * t;
        if x > NEGLIGIBLE_EXPONENT {
            break;
        }
        sum.add(p.multiplicity as f64 * (-x).exp());
    }
    sum.value()
}

pub fn partition_value(batch: &SpectrumBatch, t: f64) -> Result<PartitionSample> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::Domain(format!("partition function needs t > 0, got {t}")));
    }
    if batch.is_empty() {
        return Err(Error::Spectrum("partition function of an empty batch".into()));
    }
    let value = shifted_sum(batch, t, 0.0);
    let truncation_error = truncation_bound(batch, t);
    Ok(PartitionSample {
        t,
        value,
        truncation_error,
        reliable: truncation_error < ACCEPT_RELATIVE * value,
    })
}

/// `W(t) = Z(t) t^{d_f/d_w}`.
pub fn weyl_ratio(batch: &SpectrumBatch, t: f64) -> Result<f64> {
    let s = partition_value(batch, t)?;
    Ok(s.value * t.powf(batch.model.leading_exponent()))
}

/// Samples on a logarithmic grid, checked to be strictly decreasing.
pub fn trace_grid(batch: &SpectrumBatch, t_lo: f64, t_hi: f64, points: usize) -> Result<Vec<PartitionSample>> {
    if !(t_lo > 0.0 && t_hi > t_lo) || points < 2 {
        return Err(Error::Domain(format!(
            "trace grid needs 0 < t_lo < t_hi and >= 2 points, got ({t_lo}, {t_hi}), {points}"
        )));
    }
    let step = (t_hi / t_lo).ln() / (points - 1) as f64;
    let samples = (0..points)
        .map(|i| partition_value(batch, t_lo * (step * i as f64).exp()))
        .collect::<Result<Vec<_>>>()?;
    if let Some(w) = samples
        .windows(2)
        .find(|w| !(w[1].value < w[0].value || (w[1].value == 0.0 && w[0].value == 0.0)))
    {
        return Err(Error::Spectrum(format!(
            "partition function not strictly decreasing between t = {} and t = {}",
            w[0].t, w[1].t
        )));
    }
    Ok(samples)
}

/// One multiplicative period `(t_lo, τ t_lo)` of the small-time regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub t_lo: f64,
    pub t_hi: f64,
}

impl Window {
    pub fn new(t_lo: f64, t_hi: f64) -> Self {
        Window { t_lo, t_hi }
    }

    /// The period `(τ^{-(j+1)}, τ^{-j})`.
    pub fn period(model: &FractalModel, j: i32) -> Self {
        Window::new(model.tau.powi(-(j + 1)), model.tau.powi(-j))
    }

    fn check_period(&self, tau: f64) -> Result<()> {
        if !(self.t_lo > 0.0 && self.t_hi <= 1.0) {
            return Err(Error::Domain(format!(
                "fit window ({}, {}) must lie in (0, 1]",
                self.t_lo, self.t_hi
            )));
        }
        if ((self.t_hi / self.t_lo) / tau - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!(
                "fit window ({}, {}) is not one period: t_hi/t_lo must equal tau = {tau}",
                self.t_lo, self.t_hi
            )));
        }
        Ok(())
    }
}

/// Fourier coefficients of the periodic factor `G_k` of the term
/// `t^{-d_k/d_w} G_k(log_τ(1/t))` of the heat-trace expansion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillationProfile {
    pub k_index: usize,
    /// `d_k / d_w`.
    pub exponent: f64,
    /// `log τ`.
    pub period: f64,
    pub n_max: usize,
    /// `g_{-n_max}, ..., g_{n_max}`.
    coefficients: Vec<Complex64>,
    pub fit_window: (f64, f64),
    /// Max deviation of the reconstructed series from samples on a grid twice as fine.
    pub fit_residual: f64,
    pub samples_per_period: usize,
    /// Largest coefficient change in the last sample doubling.
    pub coefficient_change: f64,
    pub warnings: Vec<String>,
}

impl OscillationProfile {
    /// Profile from `g_0, ..., g_{n_max}`; negative modes are the conjugates.
    pub fn from_nonnegative(k_index: usize, exponent: f64, period: f64, nonnegative: &[Complex64]) -> Result<Self> {
        let Some(first) = nonnegative.first() else {
            return Err(Error::Domain("profile needs at least g_0".into()));
        };
        let n_max = nonnegative.len() - 1;
        let mut coefficients = Vec::with_capacity(2 * n_max + 1);
        coefficients.extend(nonnegative[1..].iter().rev().map(|g| g.conj()));
        coefficients.push(Complex64::new(first.re, 0.0));
        coefficients.extend_from_slice(&nonnegative[1..]);
        Ok(OscillationProfile {
            k_index,
            exponent,
            period,
            n_max,
            coefficients,
            fit_window: (0.0, 0.0),
            fit_residual: 0.0,
            samples_per_period: 0,
            coefficient_change: 0.0,
            warnings: Vec::new(),
        })
    }

    /// `g_n`, zero for `|n| > n_max`.
    pub fn coefficient(&self, n: i64) -> Complex64 {
        if n.unsigned_abs() as usize > self.n_max {
            return Complex64::new(0.0, 0.0);
        }
        self.coefficients[(n + self.n_max as i64) as usize]
    }

    /// `(n, g_n)` for `n = -n_max..=n_max`.
    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let n_max = self.n_max as i64;
        self.coefficients
            .iter()
            .enumerate()
            .map(move |(i, &g)| (i as i64 - n_max, g))
    }

    /// `Σ g_n e^{2πinT}`.
    pub fn evaluate(&self, big_t: f64) -> f64 {
        self.modes()
            .map(|(n, g)| (g * Complex64::from_polar(1.0, 2.0 * PI * n as f64 * big_t)).re)
            .sum()
    }

    /// The term `t^{-exponent} G(log_τ(1/t))`.
    pub fn term(&self, t: f64) -> f64 {
        t.powf(-self.exponent) * self.evaluate(-t.ln() / self.period)
    }
}

/// Sampled periodic factors `G_0(T_i), ..., G_{J-1}(T_i)` with sample reliability.
struct JointSamples {
    values: Vec<Vec<f64>>,
    unreliable: usize,
}

/// Per sample `T`, solve `W(T - j) = Σ_k τ^{-(a_0 - a_k)(T - j)} G_k(T)`, `j = 0..J`,
/// which isolates every term of the expansion at once.
fn joint_samples(batch: &SpectrumBatch, exponents: &[f64], tau: f64, t0: f64, samples: usize) -> Result<JointSamples> {
    let terms = exponents.len();
    let a0 = exponents[0];
    let mut values = vec![Vec::with_capacity(samples); terms];
    let mut unreliable = 0;
    for i in 0..samples {
        let big_t = t0 + i as f64 / samples as f64;
        let mut m = DMatrix::<f64>::zeros(terms, terms);
        let mut rhs = DVector::<f64>::zeros(terms);
        for j in 0..terms {
            let shifted = big_t - j as f64;
            let t = tau.powf(-shifted);
            let s = partition_value(batch, t)?;
            if !s.reliable {
                unreliable += 1;
            }
            rhs[j] = s.value * t.powf(a0);
            for (k, &a) in exponents.iter().enumerate() {
                // Columns scaled by τ^{(a_0 - a_k) T} to keep the system O(1).
                m[(j, k)] = tau.powf((a0 - a) * j as f64);
            }
        }
        let sol = m
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::NonConvergence("singular period-shift system".into()))?;
        for (k, &a) in exponents.iter().enumerate() {
            values[k].push(sol[k] * tau.powf((a0 - a) * big_t));
        }
    }
    Ok(JointSamples { values, unreliable })
}

fn dft(samples: &[f64], t0: f64, n_max: usize) -> Vec<Complex64> {
    let s = samples.len();
    (0..=n_max)
        .map(|n| {
            let mut re = CompensatedSum::default();
            let mut im = CompensatedSum::default();
            for (i, &v) in samples.iter().enumerate() {
                let big_t = t0 + i as f64 / s as f64;
                let (sin, cos) = (2.0 * PI * n as f64 * big_t).sin_cos();
                re.add(v * cos);
                im.add(-v * sin);
            }
            Complex64::new(re.value(), im.value()) / s as f64
        })
        .collect()
}

const INITIAL_SAMPLES: usize = 256;
const MAX_SAMPLES: usize = 8192;
const COEFFICIENT_TOL: f64 = 1e-8;

/// Fit every term of the expansion over one period.
pub fn fit_expansion(
    batch: &SpectrumBatch,
    model: &FractalModel,
    n_max: usize,
    window: Window,
) -> Result<Vec<OscillationProfile>> {
    window.check_period(model.tau)?;
    if batch.is_empty() {
        return Err(Error::Spectrum("cannot fit an empty batch".into()));
    }
    if 2 * n_max >= INITIAL_SAMPLES {
        return Err(Error::Domain(format!(
            "n_max = {n_max} too large for {INITIAL_SAMPLES} samples"
        )));
    }
    let exponents = model.expansion_exponents();
    let tau = model.tau;
    let t0 = -window.t_hi.ln() / tau.ln();

    let mut samples = INITIAL_SAMPLES;
    let mut current = joint_samples(batch, &exponents, tau, t0, samples)?;
    let mut coeffs: Vec<Vec<Complex64>> = current.values.iter().map(|v| dft(v, t0, n_max)).collect();
    let mut warnings = Vec::new();
    let mut change = f64::INFINITY;
    loop {
        if samples >= MAX_SAMPLES {
            warnings.push(format!(
                "Fourier coefficients still moving at {samples} samples per period; sampled G is not periodic"
            ));
            break;
        }
        let finer = joint_samples(batch, &exponents, tau, t0, 2 * samples)?;
        let finer_coeffs: Vec<Vec<Complex64>> = finer.values.iter().map(|v| dft(v, t0, n_max)).collect();
        let moved = coeffs
            .iter()
            .flatten()
            .zip(finer_coeffs.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        samples *= 2;
        current = finer;
        coeffs = finer_coeffs;
        change = moved;
        if moved < COEFFICIENT_TOL {
            break;
        }
    }

    // Reconstruction audit on a grid twice as fine as the fit.
    let audit = joint_samples(batch, &exponents, tau, t0, 2 * samples)?;
    let mut profiles = Vec::with_capacity(exponents.len());
    for (k, &a) in exponents.iter().enumerate() {
        let mut profile = OscillationProfile::from_nonnegative(k, a, tau.ln(), &coeffs[k])?;
        profile.fit_window = (window.t_lo, window.t_hi);
        profile.samples_per_period = samples;
        profile.coefficient_change = change;
        profile.warnings = warnings.clone();
        profile.fit_residual = audit.values[k]
            .iter()
            .enumerate()
            .map(|(i, &v)| (profile.evaluate(t0 + i as f64 / (2 * samples) as f64) - v).abs())
            .fold(0.0, f64::max);
        if current.unreliable + audit.unreliable > 0 {
            profile.warnings.push(format!(
                "{} samples exceed the truncation acceptance bound; extend the spectrum",
                current.unreliable + audit.unreliable
            ));
        }
        let scale = coeffs[0][0].re.abs().max(f64::MIN_POSITIVE);
        if profile.fit_residual > 1e-3 * scale {
            profile.warnings.push(format!(
                "reconstruction residual {:.3e} exceeds 1e-3 of g_0; window likely outside the asymptotic regime",
                profile.fit_residual
            ));
        }
        profiles.push(profile);
    }
    if profiles[0].coefficient(0).re <= 0.0 {
        profiles[0].warnings.push("leading g_0 is not positive".into());
    }
    Ok(profiles)
}

/// Profile of the `k_index`-th term.
pub fn fit_oscillation(
    batch: &SpectrumBatch,
    model: &FractalModel,
    k_index: usize,
    n_max: usize,
    window: Window,
) -> Result<OscillationProfile> {
    let terms = model.expansion_exponents().len();
    if k_index >= terms {
        return Err(Error::Domain(format!(
            "k_index {k_index} out of range: model has {terms} terms"
        )));
    }
    Ok(fit_expansion(batch, model, n_max, window)?.swap_remove(k_index))
}

/// `Z(t) <= c3 e^{-c4 t}` on `[1, t_max]`, and `-c5 e^{-c6 t} <= Z(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailCertificate {
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub c6: f64,
    pub fit_window: (f64, f64),
    pub verified: bool,
}

pub const TAIL_AUDIT_POINTS: usize = 100;

pub fn tail_certificate(batch: &SpectrumBatch, t_max: f64) -> Result<TailCertificate> {
    if batch.is_empty() {
        return Err(Error::Spectrum("tail certificate of an empty batch".into()));
    }
    if batch.has_zero_eigenvalue() {
        return Err(Error::Spectrum(
            "tail certificate needs a Dirichlet spectrum (zero eigenvalue present)".into(),
        ));
    }
    if !(t_max > 1.0) {
        return Err(Error::Domain(format!("tail certificate needs t_max > 1, got {t_max}")));
    }
    let c4 = batch.lambda_min;
    // Z(t) e^{λ_min t} including the truncation bound, computed without underflow.
    let scaled = |t: f64| shifted_sum(batch, t, c4) + truncation_bound(batch, t) * (c4 * t).exp();
    let grid: Vec<f64> = (0..TAIL_AUDIT_POINTS)
        .map(|i| 1.0 + (t_max - 1.0) * i as f64 / (TAIL_AUDIT_POINTS - 1) as f64)
        .collect();
    let c3 = grid.iter().map(|&t| scaled(t)).fold(0.0, f64::max);
    let verified = grid.iter().all(|&t| scaled(t) <= c3 * (1.0 + 1e-12));
    Ok(TailCertificate {
        c3,
        c4,
        // Z is a sum of positive terms.
        c5: 0.0,
        c6: c4,
        fit_window: (1.0, t_max),
        verified,
    })
}

/// Bounds `c1 <= (leading - Z) t^{d_∂/d_w} <= c2` over a window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticCertificate {
    pub c1: f64,
    pub c2: f64,
    pub window: (f64, f64),
    pub samples: usize,
    /// The deviation changes sign (or vanishes) somewhere in the window.
    pub sign_change: bool,
    /// `max |deviation|` is at round-off level: no subleading term is visible.
    pub degenerate: bool,
}

pub const ASYMPTOTIC_SAMPLES: usize = 129;

pub fn asymptotic_certificate(
    batch: &SpectrumBatch,
    model: &FractalModel,
    profile: &OscillationProfile,
    window: (f64, f64),
) -> Result<AsymptoticCertificate> {
    let (t_lo, t_hi) = window;
    if profile.k_index != 0 {
        return Err(Error::Domain(
            "asymptotic certificate needs the leading-term profile".into(),
        ));
    }
    if !(t_lo > 0.0 && t_hi > t_lo && t_hi <= 1.0) {
        return Err(Error::Domain(format!("invalid certificate window ({t_lo}, {t_hi})")));
    }
    let scale = model.d_boundary / model.d_w;
    let step = (t_hi / t_lo).ln() / (ASYMPTOTIC_SAMPLES - 1) as f64;
    let mut c1 = f64::INFINITY;
    let mut c2 = f64::NEG_INFINITY;
    let mut largest_term = 0.0f64;
    for i in 0..ASYMPTOTIC_SAMPLES {
        let t = t_lo * (step * i as f64).exp();
        let s = partition_value(batch, t)?;
        if !s.reliable {
            return Err(Error::Domain(format!(
                "t = {t} is outside the validated regime: truncation error {:.3e} vs value {:.3e}",
                s.truncation_error, s.value
            )));
        }
        let leading = profile.term(t);
        largest_term = largest_term.max(leading.abs());
        let deviation = (leading - s.value) * t.powf(scale);
        c1 = c1.min(deviation);
        c2 = c2.max(deviation);
    }
    let floor = 1e-10 * largest_term * t_lo.powf(scale).max(t_hi.powf(scale));
    Ok(AsymptoticCertificate {
        c1,
        c2,
        window,
        samples: ASYMPTOTIC_SAMPLES,
        sign_change: c1 <= 0.0 && c2 >= 0.0,
        degenerate: c1.abs().max(c2.abs()) <= floor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{interval_spectrum, toy_geometric_spectrum, EigenvaluePair, TailBound};

    fn single() -> SpectrumBatch {
        SpectrumBatch::complete(FractalModel::interval(), vec![EigenvaluePair::new(1.0, 1)]).unwrap()
    }

    #[test]
    fn single_term() {
        let s = partition_value(&single(), 1.0).unwrap();
        assert!((s.value - (-1f64).exp()).abs() < 1e-16);
        assert_eq!(s.truncation_error, 0.0);
        assert!(partition_value(&single(), 0.0).is_err());
        assert!(partition_value(&single(), -1.0).is_err());
    }

    #[test]
    fn interval_values() {
        let b = interval_spectrum(2000).unwrap();
        // 1/(2√(πt)) - 1/2 up to e^{-1/t} corrections.
        let s = partition_value(&b, 0.01).unwrap();
        assert!((s.value - 2.320_947_917_738_78).abs() < 1e-12);
        assert!(s.reliable);
        let s = partition_value(&b, 1.0).unwrap();
        assert!((s.value - (-PI * PI).exp()).abs() < 1e-9);
    }

    #[test]
    fn truncation_bound_dominates_omitted_terms() {
        let short = interval_spectrum(30).unwrap();
        let long = interval_spectrum(5000).unwrap();
        for &t in &[1e-4, 1e-3, 1e-2] {
            let omitted = partition_value(&long, t).unwrap().value - partition_value(&short, t).unwrap().value;
            let bound = truncation_bound(&short, t);
            assert!(omitted <= bound, "t={t}: {omitted} > {bound}");
        }
    }

    #[test]
    fn weyl_ratio_interval() {
        let b = interval_spectrum(3000).unwrap();
        let w = weyl_ratio(&b, 1e-4).unwrap();
        assert!((w + 0.5 * 1e-2 - 0.5 / PI.sqrt()).abs() < 1e-10);
        // W(t) - W(t/4) = -√t/4 exactly up to e^{-1/t} terms.
        for &t in &[1e-3, 1e-4, 1e-5] {
            let d = weyl_ratio(&b, t).unwrap() - weyl_ratio(&b, t / 4.0).unwrap();
            assert!((d + 0.25 * t.sqrt()).abs() < 1e-12, "t={t}: {d}");
        }
        assert!((weyl_ratio(&b, 1e-5).unwrap() - weyl_ratio(&b, 2.5e-6).unwrap()).abs() < 1e-3);
    }

    #[test]
    fn trace_grid_is_decreasing() {
        let b = interval_spectrum(500).unwrap();
        let g = trace_grid(&b, 1e-3, 10.0, 50).unwrap();
        assert_eq!(g.len(), 50);
        assert!((g[0].t - 1e-3).abs() < 1e-15 && (g[49].t - 10.0).abs() < 1e-12);
    }

    #[test]
    fn window_must_be_one_period() {
        let b = interval_spectrum(500).unwrap();
        let m = FractalModel::interval();
        let err = fit_oscillation(&b, &m, 0, 4, Window::new(1e-3, 3e-3)).unwrap_err();
        assert!(err.to_string().contains("one period"));
    }

    #[test]
    fn interval_profiles() {
        let b = interval_spectrum(2000).unwrap();
        let m = FractalModel::interval();
        let profiles = fit_expansion(&b, &m, 4, Window::period(&m, 5)).unwrap();
        let g0 = profiles[0].coefficient(0);
        assert!((g0.re - 0.5 / PI.sqrt()).abs() < 1e-10, "{g0}");
        assert_eq!(g0.im, 0.0);
        for n in 1..=4 {
            assert!(profiles[0].coefficient(n).norm() < 1e-4);
            assert_eq!(profiles[0].coefficient(-n), profiles[0].coefficient(n).conj());
        }
        assert!((profiles[1].coefficient(0).re + 0.5).abs() < 1e-9);
        assert!(profiles.iter().all(|p| p.warnings.is_empty()));
    }

    #[test]
    fn toy_leading_mode_is_exact() {
        let m = FractalModel::toy(3, 5.0).unwrap();
        let b = toy_geometric_spectrum(&m, 40).unwrap();
        let p = fit_oscillation(&b, &m, 0, 6, Window::period(&m, 9)).unwrap();
        // g_n = Γ(a + iω_n) / log τ.
        let a = m.leading_exponent();
        let expected = crate::special::gamma(Complex64::new(a, 0.0)).re / m.tau.ln();
        assert!((p.coefficient(0).re - expected).abs() < 1e-9);
        let g1 = crate::special::gamma(Complex64::new(a, m.mode_frequency(1))) / m.tau.ln();
        assert!((p.coefficient(1) - g1).norm() < 1e-9);
    }

    #[test]
    fn tail_certificates() {
        let c = tail_certificate(&single(), 20.0).unwrap();
        assert!((c.c3 - 1.0).abs() < 1e-15 && c.c4 == 1.0 && c.verified);

        let c = tail_certificate(&interval_spectrum(200).unwrap(), 20.0).unwrap();
        assert!((c.c4 - PI * PI).abs() < 1e-12);
        assert!(c.c3 >= 1.0 && c.c3 <= 1.1 && c.verified);

        let zero = SpectrumBatch::complete(
            FractalModel::interval(),
            vec![EigenvaluePair::new(0.0, 1), EigenvaluePair::new(1.0, 1)],
        )
        .unwrap();
        assert!(tail_certificate(&zero, 20.0).is_err());
    }

    #[test]
    fn interval_asymptotic_certificate() {
        let b = interval_spectrum(2000).unwrap();
        let m = FractalModel::interval();
        let p = fit_oscillation(&b, &m, 0, 4, Window::period(&m, 3)).unwrap();
        let c = asymptotic_certificate(&b, &m, &p, (1e-5, 4e-5)).unwrap();
        assert!((c.c1 - 0.5).abs() < 1e-2 && (c.c2 - 0.5).abs() < 1e-2);
        assert!(!c.sign_change && !c.degenerate);
    }

    #[test]
    fn toy_deviation_is_one_half() {
        // The periodic term sums τ^k over all k ∈ Z; the missing k < 0 part tends to Σ 3^{-k} = 1/2.
        let m = FractalModel::toy(3, 5.0).unwrap();
        let b = toy_geometric_spectrum(&m, 40).unwrap();
        let p = fit_oscillation(&b, &m, 0, 6, Window::period(&m, 9)).unwrap();
        let c = asymptotic_certificate(&b, &m, &p, (1e-8, 5e-8)).unwrap();
        assert!((c.c1 - 0.5).abs() < 1e-5 && (c.c2 - 0.5).abs() < 1e-5, "{c:?}");
        assert!(!c.degenerate);
    }

    #[test]
    fn unreliable_window_is_refused() {
        let b = interval_spectrum(20).unwrap();
        let m = FractalModel::interval();
        let p = fit_oscillation(&b, &m, 0, 2, Window::period(&m, 1)).unwrap();
        assert!(!p.warnings.is_empty());
        assert!(asymptotic_certificate(&b, &m, &p, (1e-6, 4e-6)).is_err());
    }

    #[test]
    fn incomplete_batch_reports_truncation() {
        let b = SpectrumBatch::new(
            FractalModel::interval(),
            vec![EigenvaluePair::new(1.0, 1)],
            None,
            TailBound {
                exponent: 0.5,
                constant: 1.0,
            },
        )
        .unwrap();
        let s = partition_value(&b, 1e-3).unwrap();
        assert!(!s.reliable && s.truncation_error > s.value);
    }
}
