//! Spectral decimation: graph spectra generated as preimages of a polynomial
//! map, and the renormalized limits `λ = lim τ^m z^{(m)}` that define the
//! fractal spectrum.
//!
//! The multiplicity bookkeeping is table-driven:
//! - a continued eigenvalue keeps its ancestor's multiplicity on every
//!   preimage branch, except for `(ancestor, branch)` pairs listed as blocked;
//! - eigenvalues born at level `m` get multiplicity `(base^(m+offset) + add) / div`.
//!
//! Nothing here is trusted on its own: the gasket preset is checked against
//! the dense eigensolve in [`super::graph`].

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_rational::Rational64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{EigenvaluePair, LimitCertificate, SpectrumBatch, TailBound};
use crate::error::{Error, Result};
use crate::model::FractalModel;

/// An exact rational read from configuration as `"p/q"` or an integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rational(pub Rational64);

impl Rational {
    pub fn new(numer: i64, denom: i64) -> Self {
        Rational(Rational64::new(numer, denom))
    }

    pub fn integer(v: i64) -> Self {
        Rational(Rational64::from_integer(v))
    }

    pub fn to_f64(self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self.0.denom() == 1 {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse = |x: &str| {
            x.trim()
                .parse::<i64>()
                .map_err(|_| Error::Config(format!("'{s}' is not an exact rational (expected p or p/q)")))
        };
        match s.split_once('/') {
            Some((p, q)) => {
                let q = parse(q)?;
                if q == 0 {
                    return Err(Error::Config(format!("'{s}' has a zero denominator")));
                }
                Ok(Rational(Rational64::new(parse(p)?, q)))
            }
            None => Ok(Rational::integer(parse(s)?)),
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Int(v) => Ok(Rational::integer(v)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Multiplicity `(base^(level + offset) + add) / div` of eigenvalues born at `level`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiplicityFormula {
    pub base: u64,
    #[serde(default)]
    pub offset: i32,
    #[serde(default)]
    pub add: i64,
    #[serde(default = "one")]
    pub div: u64,
}

fn one() -> u64 {
    1
}

impl MultiplicityFormula {
    pub fn eval(&self, level: u32) -> Result<u64> {
        let exp = i64::from(level) + i64::from(self.offset);
        let overflow = || Error::Resource(format!("birth multiplicity overflows at level {level}"));
        if exp < 0 || self.div == 0 {
            return Err(Error::Decimation(format!(
                "multiplicity formula undefined at level {level}"
            )));
        }
        let power = self.base.checked_pow(exp as u32).ok_or_else(overflow)?;
        let total = i128::from(power) + i128::from(self.add);
        if total < 0 || total % i128::from(self.div) != 0 {
            return Err(Error::Decimation(format!(
                "multiplicity formula gives non-integer or negative value at level {level}"
            )));
        }
        u64::try_from(total / i128::from(self.div)).map_err(|_| overflow())
    }
}

/// Eigenvalues appearing fresh at every level `>= from_level`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Birth {
    pub value: Rational,
    pub from_level: u32,
    pub multiplicity: MultiplicityFormula,
}

/// An `(ancestor, branch)` continuation that produces no eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockedBranch {
    pub ancestor: Rational,
    pub branch: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialPair {
    pub value: Rational,
    pub multiplicity: u64,
}

fn default_limit_tolerance() -> f64 {
    1e-14
}

fn default_max_iterations() -> u32 {
    200
}

/// Spectral decimation data for one graph sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecimationConfig {
    /// Coefficients of `R`, lowest degree first.
    pub polynomial: Vec<Rational>,
    pub renorm_factor: Rational,
    /// Index, among the real preimages in ascending order, of the branch tending to 0.
    pub branch: usize,
    pub exceptional: Vec<Rational>,
    pub initial_level: u32,
    pub initial_spectrum: Vec<InitialPair>,
    #[serde(default)]
    pub births: Vec<Birth>,
    #[serde(default)]
    pub blocked: Vec<BlockedBranch>,
    /// Relative step size at which a renormalized limit counts as converged.
    #[serde(default = "default_limit_tolerance")]
    pub limit_tolerance: f64,
    #[serde(default = "default_max_iterations")]
    pub max_limit_iterations: u32,
}

const MATCH_TOL: f64 = 1e-12;

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= MATCH_TOL * a.abs().max(b.abs()).max(1.0)
}

impl DecimationConfig {
    /// Dirichlet gasket with the combinatorial Laplacian: `R(z) = z(5 - z)`.
    pub fn gasket() -> Self {
        DecimationConfig {
            polynomial: vec![Rational::integer(0), Rational::integer(5), Rational::integer(-1)],
            renorm_factor: Rational::integer(5),
            branch: 0,
            exceptional: vec![Rational::integer(2), Rational::integer(5), Rational::integer(6)],
            initial_level: 1,
            initial_spectrum: vec![
                InitialPair {
                    value: Rational::integer(2),
                    multiplicity: 1,
                },
                InitialPair {
                    value: Rational::integer(5),
                    multiplicity: 2,
                },
            ],
            births: vec![
                Birth {
                    value: Rational::integer(5),
                    from_level: 2,
                    multiplicity: MultiplicityFormula {
                        base: 3,
                        offset: -1,
                        add: 3,
                        div: 2,
                    },
                },
                Birth {
                    value: Rational::integer(6),
                    from_level: 2,
                    multiplicity: MultiplicityFormula {
                        base: 3,
                        offset: 0,
                        add: -3,
                        div: 2,
                    },
                },
            ],
            // φ₋(6) = 2 is exceptional.
            blocked: vec![BlockedBranch {
                ancestor: Rational::integer(6),
                branch: 0,
            }],
            limit_tolerance: default_limit_tolerance(),
            max_limit_iterations: default_max_iterations(),
        }
    }

    fn coeffs(&self) -> Vec<f64> {
        self.polynomial.iter().map(|c| c.to_f64()).collect()
    }

    fn degree(&self) -> usize {
        self.polynomial.iter().rposition(|c| *c.0.numer() != 0).unwrap_or(0)
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.coeffs().iter().rev().fold(0.0, |acc, &c| acc * z + c)
    }

    /// Check the config against its model.
    pub fn validate(&self, model: &FractalModel) -> Result<()> {
        let degree = self.degree();
        if degree < 1 {
            return Err(Error::Decimation("decimation map must be nonconstant".into()));
        }
        if *self.polynomial[0].0.numer() != 0 {
            return Err(Error::Decimation("decimation map must fix 0 (R(0) = 0)".into()));
        }
        if self.branch >= degree {
            return Err(Error::Decimation(format!(
                "branch index {} out of range for a degree-{degree} map",
                self.branch
            )));
        }
        if self.branch_preimage(0.0)?.abs() > 1e-14 {
            return Err(Error::Decimation("the selected branch does not fix 0".into()));
        }
        let renorm = self.renorm_factor.to_f64();
        if !same(renorm, model.tau) {
            return Err(Error::Decimation(format!(
                "renorm_factor {} differs from model tau {}",
                self.renorm_factor, model.tau
            )));
        }
        if self.initial_level < 1 {
            return Err(Error::Decimation("initial_level must be >= 1".into()));
        }
        let init: Vec<f64> = self.initial_spectrum.iter().map(|p| p.value.to_f64()).collect();
        if init.windows(2).any(|w| w[1] <= w[0]) || init.iter().any(|&v| v <= 0.0) {
            return Err(Error::Decimation(
                "initial spectrum must be positive and strictly increasing".into(),
            ));
        }
        if self.initial_spectrum.iter().any(|p| p.multiplicity == 0) {
            return Err(Error::Decimation("initial multiplicities must be positive".into()));
        }
        if self.births.iter().any(|b| b.from_level <= self.initial_level) {
            return Err(Error::Decimation("births must start after the initial level".into()));
        }
        if !(self.limit_tolerance > 0.0) {
            return Err(Error::Decimation("limit_tolerance must be positive".into()));
        }
        Ok(())
    }

    /// All preimages `R(z) = w`, ascending. Errors if any is non-real.
    pub fn preimages(&self, w: f64) -> Result<Vec<f64>> {
        let c = self.coeffs();
        let degree = self.degree();
        let roots = match degree {
            1 => vec![(w - c[0]) / c[1]],
            2 => {
                let (a, b, cc) = (c[2], c[1], c[0] - w);
                let disc = b * b - 4.0 * a * cc;
                if disc < 0.0 {
                    return Err(Error::Decimation(format!("preimage of {w} is not real")));
                }
                // Stable pair: q = -(b + sign(b)√disc)/2, roots q/a and cc/q.
                let q = -0.5 * (b + b.signum() * disc.sqrt());
                let mut r = if q == 0.0 { vec![0.0, 0.0] } else { vec![q / a, cc / q] };
                r.sort_by(f64::total_cmp);
                r
            }
            _ => self.polynomial_roots(w)?,
        };
        Ok(roots)
    }

    fn polynomial_roots(&self, w: f64) -> Result<Vec<f64>> {
        let mut c = self.coeffs();
        c.truncate(self.degree() + 1);
        c[0] -= w;
        let lead = *c.last().unwrap();
        let monic: Vec<f64> = c.iter().map(|x| x / lead).collect();
        let n = monic.len() - 1;
        let eval = |z: Complex64| monic.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &k| acc * z + k);
        // Durand–Kerner.
        let seed = Complex64::new(0.4, 0.9);
        let mut roots: Vec<Complex64> = (0..n).map(|i| seed.powu(i as u32)).collect();
        for _ in 0..500 {
            let mut moved = 0.0f64;
            for i in 0..n {
                let mut denom = Complex64::new(1.0, 0.0);
                for j in 0..n {
                    if i != j {
                        denom *= roots[i] - roots[j];
                    }
                }
                let delta = eval(roots[i]) / denom;
                roots[i] -= delta;
                moved = moved.max(delta.norm());
            }
            if moved < 1e-15 {
                break;
            }
        }
        let scale = roots.iter().map(|r| r.norm()).fold(1.0, f64::max);
        let mut real = Vec::with_capacity(n);
        for r in roots {
            if r.im.abs() > 1e-9 * scale {
                return Err(Error::Decimation(format!("preimage of {w} is not real")));
            }
            // Newton polish on the real axis.
            let mut x = r.re;
            for _ in 0..5 {
                let (mut p, mut dp) = (0.0, 0.0);
                for &k in monic.iter().rev() {
                    dp = dp * x + p;
                    p = p * x + k;
                }
                if dp == 0.0 {
                    break;
                }
                x -= p / dp;
            }
            real.push(x);
        }
        real.sort_by(f64::total_cmp);
        Ok(real)
    }

    pub fn branch_preimage(&self, w: f64) -> Result<f64> {
        Ok(self.preimages(w)?[self.branch])
    }

    fn is_blocked(&self, ancestor: f64, branch: usize) -> bool {
        self.blocked
            .iter()
            .any(|b| b.branch == branch && same(b.ancestor.to_f64(), ancestor))
    }

    fn exceptional_hit(&self, value: f64) -> Option<Rational> {
        self.exceptional.iter().copied().find(|e| same(e.to_f64(), value))
    }

    /// `lim_k τ^k φ^k(x)` along the configured branch.
    fn renormalized_limit(&self, x: f64, level: u32) -> std::result::Result<(f64, LimitCertificate), f64> {
        let tau = self.renorm_factor.to_f64();
        let mut scale = tau.powi(level as i32);
        let mut z = x;
        let mut value = scale * z;
        let mut last_step = f64::INFINITY;
        for k in 1..=self.max_limit_iterations {
            z = match self.branch_preimage(z) {
                Ok(v) => v,
                Err(_) => return Err(last_step),
            };
            scale *= tau;
            let next = scale * z;
            last_step = (next - value).abs();
            value = next;
            if last_step <= self.limit_tolerance * value.abs() {
                return Ok((
                    value,
                    LimitCertificate {
                        index: 0,
                        iterations: k,
                        last_step,
                    },
                ));
            }
        }
        Err(last_step)
    }

    /// Lower bound on the renormalized value, in units of `τ^{level}`, of any
    /// eigenvalue that is not a branch continuation of a level-`level` value.
    fn unseen_multiplier(&self) -> Result<f64> {
        if self.branch != 0 {
            return Err(Error::Decimation(
                "completeness cutoff is only certified for branch 0".into(),
            ));
        }
        let tau = self.renorm_factor.to_f64();
        // Non-branch preimages lie above the smallest positive critical point of R.
        let c = self.coeffs();
        let derivative: Vec<f64> = c.iter().enumerate().skip(1).map(|(i, &k)| i as f64 * k).collect();
        let critical = smallest_positive_root(&derivative)
            .ok_or_else(|| Error::Decimation("decimation map has no positive critical point".into()))?;
        let phi = |x: f64, lvl: u32| {
            self.renormalized_limit(x, lvl)
                .map(|(v, _)| v)
                .map_err(|_| Error::NonConvergence(format!("limit from {x} did not converge")))
        };
        let mut best = phi(critical, 0)?;
        for birth in &self.births {
            let v = birth.value.to_f64();
            let m = if self.is_blocked(v, self.branch) {
                tau * best
            } else {
                phi(v, 0)?
            };
            best = best.min(m);
        }
        Ok(best)
    }
}

fn smallest_positive_root(coeffs: &[f64]) -> Option<f64> {
    // Scan then bisect; R' is a low-degree polynomial.
    let eval = |x: f64| coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c);
    let mut lo = 0.0;
    let mut f_lo = eval(lo);
    let step = 1e-3;
    let mut x = step;
    while x < 1e6 {
        let f = eval(x);
        if f == 0.0 {
            return Some(x);
        }
        if f.signum() != f_lo.signum() {
            let (mut a, mut b) = (lo, x);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if eval(m).signum() == f_lo.signum() {
                    a = m;
                } else {
                    b = m;
                }
            }
            return Some(0.5 * (a + b));
        }
        lo = x;
        f_lo = f;
        x += step * x.max(1.0);
    }
    None
}

fn merge_sorted(mut pairs: Vec<(f64, u64)>) -> Result<Vec<(f64, u64)>> {
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, u64)> = Vec::with_capacity(pairs.len());
    for (v, m) in pairs {
        match out.last_mut() {
            Some(last) if same(last.0, v) => {
                last.1 = last
                    .1
                    .checked_add(m)
                    .ok_or_else(|| Error::Resource("multiplicity overflow while merging".into()))?;
            }
            _ => out.push((v, m)),
        }
    }
    Ok(out)
}

/// Graph spectrum at `level` generated by decimation.
pub fn decimation_graph_spectrum(model: &FractalModel, config: &DecimationConfig, level: u32) -> Result<SpectrumBatch> {
    let pairs = decimation_levels(model, config, level)?;
    let pairs = pairs.into_iter().map(|(v, m)| EigenvaluePair::new(v, m)).collect();
    SpectrumBatch::complete(model.clone(), pairs)
}

fn decimation_levels(model: &FractalModel, config: &DecimationConfig, level: u32) -> Result<Vec<(f64, u64)>> {
    config.validate(model)?;
    if level < config.initial_level {
        return Err(Error::Decimation(format!(
            "level {level} is below the initial level {}",
            config.initial_level
        )));
    }
    let mut current: Vec<(f64, u64)> = config
        .initial_spectrum
        .iter()
        .map(|p| (p.value.to_f64(), p.multiplicity))
        .collect();
    for m in config.initial_level + 1..=level {
        let mut next = Vec::with_capacity(current.len() * 2 + config.births.len());
        for &(z, mu) in &current {
            let pre = config.preimages(z)?;
            for (branch, &x) in pre.iter().enumerate() {
                if config.is_blocked(z, branch) {
                    continue;
                }
                if let Some(e) = config.exceptional_hit(x) {
                    return Err(Error::Decimation(format!(
                        "level {m}: branch {branch} of ancestor {z} hits exceptional value {e}"
                    )));
                }
                next.push((x, mu));
            }
        }
        for birth in config.births.iter().filter(|b| b.from_level <= m) {
            let mu = birth.multiplicity.eval(m)?;
            if mu > 0 {
                next.push((birth.value.to_f64(), mu));
            }
        }
        current = merge_sorted(next)?;
    }
    Ok(current)
}

/// Renormalized-limit spectrum certified complete below `τ^{levels+1} · m*`,
/// where `m*` bounds every eigenvalue not continued from level `levels`.
///
/// With `count = Some(m)` only the first `m` eigenvalues are returned.
pub fn fractal_spectrum(
    model: &FractalModel,
    config: &DecimationConfig,
    levels: u32,
    count: Option<usize>,
) -> Result<SpectrumBatch> {
    let graph = decimation_levels(model, config, levels)?;
    let tau = config.renorm_factor.to_f64();
    let cutoff = tau.powi(levels as i32 + 1) * config.unseen_multiplier()?;

    let mut found: Vec<(f64, u64, LimitCertificate)> = Vec::with_capacity(graph.len());
    for (i, &(z, mu)) in graph.iter().enumerate() {
        if config.is_blocked(z, config.branch) {
            continue;
        }
        let (value, cert) = config.renormalized_limit(z, levels).map_err(|last| {
            Error::NonConvergence(format!(
                "eigenvalue index {i} (graph value {z}) did not converge within {} iterations (last step {last})",
                config.max_limit_iterations
            ))
        })?;
        if value < cutoff {
            found.push((value, mu, cert));
        }
    }
    found.sort_by(|a, b| a.0.total_cmp(&b.0));
    if let Some(m) = count {
        if m == 0 {
            return Err(Error::Spectrum("fractal spectrum needs M >= 1".into()));
        }
        if m > found.len() {
            return Err(Error::NonConvergence(format!(
                "eigenvalue index {} lies above the certified cutoff {cutoff:.6e} at level {levels}; increase levels",
                found.len()
            )));
        }
        found.truncate(m);
    }
    let exponent = model.d_s / 2.0;
    let mut running = 0u128;
    let mut constant = 0.0f64;
    for &(v, mu, _) in &found {
        running += u128::from(mu);
        constant = constant.max(running as f64 / v.powf(exponent));
    }
    let certificates = found
        .iter()
        .enumerate()
        .map(|(index, (_, _, c))| LimitCertificate { index, ..*c })
        .collect();
    let pairs = found.into_iter().map(|(v, m, _)| EigenvaluePair::new(v, m)).collect();
    let cutoff = if count.is_some() { None } else { Some(cutoff) };
    let mut batch = SpectrumBatch::new(
        model.clone(),
        pairs,
        cutoff,
        TailBound {
            exponent,
            // Sup of the Weyl ratio of the counting function over the generated
            // range, with a margin for the periodic factor beyond it.
            constant: 1.05 * constant,
        },
    )?;
    batch.certificates = Some(certificates);
    Ok(batch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::graph::{dense_graph_spectrum, DEFAULT_LEVEL_CAP};

    fn gasket() -> (FractalModel, DecimationConfig) {
        (FractalModel::gasket(), DecimationConfig::gasket())
    }

    #[test]
    fn rational_parsing() {
        assert_eq!("5/3".parse::<Rational>().unwrap(), Rational::new(5, 3));
        assert_eq!("-1".parse::<Rational>().unwrap(), Rational::integer(-1));
        assert!("1.5".parse::<Rational>().is_err());
        assert!("1/0".parse::<Rational>().is_err());
    }

    #[test]
    fn gasket_preimages_are_stable_near_zero() {
        let c = DecimationConfig::gasket();
        let pre = c.preimages(1e-20).unwrap();
        assert!((pre[0] / 2e-21 - 1.0).abs() < 1e-12);
        assert!((pre[1] - 5.0).abs() < 1e-12);
        for &w in &[0.3, 2.0, 6.0] {
            for x in c.preimages(w).unwrap() {
                assert!((c.eval(x) - w).abs() < 1e-12);
            }
        }
        assert!(c.preimages(7.0).is_err());
    }

    #[test]
    fn cubic_map_roots_via_durand_kerner() {
        let mut c = DecimationConfig::gasket();
        // R(z) = z(1 - z)(4 - z) = 4z - 5z² + z³
        c.polynomial = vec![
            Rational::integer(0),
            Rational::integer(4),
            Rational::integer(-5),
            Rational::integer(1),
        ];
        let roots = c.preimages(0.0).unwrap();
        assert_eq!(roots.len(), 3);
        for (r, e) in roots.iter().zip([0.0, 1.0, 4.0]) {
            assert!((r - e).abs() < 1e-12, "{roots:?}");
        }
    }

    #[test]
    fn decimation_matches_dense_eigensolve() {
        let (m, c) = gasket();
        for level in 1..=5 {
            let dec = decimation_graph_spectrum(&m, &c, level).unwrap();
            let dense = dense_graph_spectrum(level, DEFAULT_LEVEL_CAP).unwrap();
            assert_eq!(dec.pairs().len(), dense.pairs().len(), "level {level}");
            for (a, b) in dec.pairs().iter().zip(dense.pairs()) {
                assert!(
                    (a.value - b.value).abs() < 1e-9,
                    "level {level}: {} vs {}",
                    a.value,
                    b.value
                );
                assert_eq!(a.multiplicity, b.multiplicity, "level {level} at {}", a.value);
            }
        }
    }

    #[test]
    fn first_fractal_eigenvalue() {
        let (m, c) = gasket();
        let b = fractal_spectrum(&m, &c, 4, Some(1)).unwrap();
        assert!((b.pairs()[0].value - 11.210_665_926).abs() < 1e-8);
    }

    #[test]
    fn interior_counts_match_through_level_ten() {
        let (m, c) = gasket();
        for level in 1..=10u32 {
            let b = decimation_graph_spectrum(&m, &c, level).unwrap();
            assert_eq!(b.total_count(), (3u128.pow(level + 1) - 3) / 2, "level {level}");
        }
    }

    #[test]
    fn renorm_factor_must_equal_tau() {
        let (m, mut c) = gasket();
        c.renorm_factor = Rational::integer(4);
        let err = decimation_graph_spectrum(&m, &c, 2).unwrap_err();
        assert!(matches!(err, Error::Decimation(_)));
    }

    #[test]
    fn map_must_fix_zero() {
        let (m, mut c) = gasket();
        c.polynomial[0] = Rational::integer(1);
        assert!(c.validate(&m).is_err());
    }

    #[test]
    fn exceptional_collision_is_reported() {
        let (m, mut c) = gasket();
        c.blocked.clear();
        let err = decimation_graph_spectrum(&m, &c, 3).unwrap_err();
        assert!(err.to_string().contains("exceptional value 2"), "{err}");
    }

    #[test]
    fn multiplicity_formula() {
        let f = MultiplicityFormula {
            base: 3,
            offset: -1,
            add: 3,
            div: 2,
        };
        assert_eq!(f.eval(1).unwrap(), 2);
        assert_eq!(f.eval(4).unwrap(), 15);
        let bad = MultiplicityFormula {
            base: 3,
            offset: 0,
            add: 0,
            div: 2,
        };
        assert!(bad.eval(2).is_err());
    }

    #[test]
    fn fractal_spectrum_is_positive_and_certified() {
        let (m, c) = gasket();
        let b = fractal_spectrum(&m, &c, 6, Some(20)).unwrap();
        assert_eq!(b.pairs().len(), 20);
        assert!(b.lambda_min > 0.0);
        assert!(b.pairs().windows(2).all(|w| w[0].value < w[1].value));
        let certs = b.certificates.as_ref().unwrap();
        assert!(certs.iter().all(|c| c.last_step <= 1e-14 * b.pairs()[c.index].value));
    }

    #[test]
    fn fractal_spectrum_levels_agree() {
        let (m, c) = gasket();
        let a = fractal_spectrum(&m, &c, 5, Some(40)).unwrap();
        let b = fractal_spectrum(&m, &c, 6, Some(40)).unwrap();
        for (x, y) in a.pairs().iter().zip(b.pairs()) {
            assert!((x.value - y.value).abs() <= 1e-12 * x.value);
            assert_eq!(x.multiplicity, y.multiplicity);
        }
    }

    #[test]
    fn fractal_spectrum_reports_uncertified_index() {
        let (m, c) = gasket();
        let err = fractal_spectrum(&m, &c, 2, Some(10_000)).unwrap_err();
        assert!(matches!(err, Error::NonConvergence(_)));
        assert!(err.to_string().contains("eigenvalue index"));
    }
}
