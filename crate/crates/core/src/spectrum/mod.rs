//! Eigenvalue spectra with explicit multiplicities.
//!
//! Generators:
//! - [`interval_spectrum`]: Dirichlet spectrum of the unit interval, `(πn)²`.
//! - [`toy_geometric_spectrum`]: eigenvalues `τ^k` with multiplicity `N^k`.
//! - [`graph::dense_graph_spectrum`]: exact eigensolve of gasket graph Laplacians.
//! - [`decimation::decimation_graph_spectrum`] / [`decimation::fractal_spectrum`]:
//!   spectral decimation and its renormalized limit.

pub mod decimation;
pub mod graph;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::FractalModel;

/// One eigenvalue together with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenvaluePair {
    pub value: f64,
    pub multiplicity: u64,
}

impl EigenvaluePair {
    pub fn new(value: f64, multiplicity: u64) -> Self {
        EigenvaluePair { value, multiplicity }
    }
}

/// Bound on the eigenvalue counting function of the omitted part of a
/// spectrum: `#{λ_l <= λ} <= constant * λ^exponent` for every `λ >= cutoff`.
///
/// A zero constant marks a complete (finite) spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBound {
    pub exponent: f64,
    pub constant: f64,
}

impl TailBound {
    pub const COMPLETE: TailBound = TailBound {
        exponent: 0.0,
        constant: 0.0,
    };

    pub fn is_complete(&self) -> bool {
        self.constant == 0.0
    }
}

/// Convergence record of one renormalized decimation limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitCertificate {
    pub index: usize,
    /// Number of branch iterations performed past the generating level.
    pub iterations: u32,
    /// Last change `|τ^{m+1} z^{(m+1)} - τ^m z^{(m)}|`.
    pub last_step: f64,
}

/// Sorted eigenvalue/multiplicity pairs of one spectrum source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumBatch {
    pub model: FractalModel,
    pairs: Vec<EigenvaluePair>,
    /// Smallest positive eigenvalue (0 for an empty batch).
    pub lambda_min: f64,
    /// Largest eigenvalue below which the batch is complete.
    pub cutoff: f64,
    pub tail: TailBound,
    pub certificates: Option<Vec<LimitCertificate>>,
}

impl SpectrumBatch {
    /// Build a batch, checking ordering, signs and multiplicities.
    ///
    /// `cutoff` defaults to the largest eigenvalue.
    pub fn new(model: FractalModel, pairs: Vec<EigenvaluePair>, cutoff: Option<f64>, tail: TailBound) -> Result<Self> {
        for p in &pairs {
            if !(p.value.is_finite() && p.value >= 0.0) {
                return Err(Error::Spectrum(format!(
                    "eigenvalue {} is not a nonnegative real",
                    p.value
                )));
            }
            if p.multiplicity == 0 {
                return Err(Error::Spectrum(format!("eigenvalue {} has zero multiplicity", p.value)));
            }
        }
        if pairs.windows(2).any(|w| w[1].value <= w[0].value) {
            return Err(Error::Spectrum("eigenvalues must be strictly increasing".into()));
        }
        let largest = pairs.last().map_or(0.0, |p| p.value);
        let cutoff = cutoff.unwrap_or(largest);
        if cutoff < largest {
            return Err(Error::Spectrum(format!(
                "cutoff {cutoff} below largest eigenvalue {largest}"
            )));
        }
        if !tail.is_complete() && !(tail.exponent > 0.0 && tail.constant > 0.0) {
            return Err(Error::Spectrum(
                "tail bound needs positive exponent and constant".into(),
            ));
        }
        let lambda_min = pairs.iter().map(|p| p.value).find(|&v| v > 0.0).unwrap_or(0.0);
        Ok(SpectrumBatch {
            model,
            pairs,
            lambda_min,
            cutoff,
            tail,
            certificates: None,
        })
    }

    /// A complete finite spectrum with no tail.
    pub fn complete(model: FractalModel, pairs: Vec<EigenvaluePair>) -> Result<Self> {
        Self::new(model, pairs, None, TailBound::COMPLETE)
    }

    pub fn pairs(&self) -> &[EigenvaluePair] {
        &self.pairs
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Number of eigenvalues counted with multiplicity.
    pub fn total_count(&self) -> u128 {
        self.pairs.iter().map(|p| u128::from(p.multiplicity)).sum()
    }

    pub fn has_zero_eigenvalue(&self) -> bool {
        self.pairs.first().is_some_and(|p| p.value == 0.0)
    }

    /// Smallest eigenvalue, zero included.
    pub fn smallest(&self) -> Option<f64> {
        self.pairs.first().map(|p| p.value)
    }

    /// Counting function `#{λ_l <= λ}` over the batch.
    pub fn counting(&self, lambda: f64) -> u128 {
        self.pairs
            .iter()
            .take_while(|p| p.value <= lambda)
            .map(|p| u128::from(p.multiplicity))
            .sum()
    }

    /// Keep only the first `m` pairs.
    pub fn truncated(&self, m: usize) -> SpectrumBatch {
        let mut out = self.clone();
        if m < out.pairs.len() {
            out.pairs.truncate(m);
            if let Some(c) = &mut out.certificates {
                c.truncate(m);
            }
        }
        out
    }
}

/// Dirichlet spectrum of the unit interval: `λ_n = (πn)²`, `n = 1..=m`.
pub fn interval_spectrum(m: usize) -> Result<SpectrumBatch> {
    if m < 1 {
        return Err(Error::Spectrum("interval spectrum needs M >= 1".into()));
    }
    let pairs = (1..=m)
        .map(|n| EigenvaluePair::new((PI * n as f64).powi(2), 1))
        .collect();
    // #{n : (πn)² <= λ} = floor(√λ / π)
    let tail = TailBound {
        exponent: 0.5,
        constant: 1.0 / PI,
    };
    SpectrumBatch::new(FractalModel::interval(), pairs, None, tail)
}

/// Exactly self-similar toy spectrum: `τ^k` with multiplicity `N^k`, `k = 0..=depth`.
///
/// Its zeta function is `1/(1 - N τ^{-s/2})` in closed form.
pub fn toy_geometric_spectrum(model: &FractalModel, depth: u32) -> Result<SpectrumBatch> {
    let n = u64::from(model.n_cells);
    if n.checked_pow(depth).is_none() {
        return Err(Error::Resource(format!(
            "multiplicity N^K overflows u64 for N = {n}, K = {depth}"
        )));
    }
    let pairs = (0..=depth)
        .map(|k| EigenvaluePair::new(model.tau.powi(k as i32), n.pow(k)))
        .collect();
    // Σ_{k <= k*} N^k <= N/(N-1) N^{k*} <= N/(N-1) λ^{log N / log τ}
    let tail = TailBound {
        exponent: (n as f64).ln() / model.tau.ln(),
        constant: n as f64 / (n as f64 - 1.0),
    };
    SpectrumBatch::new(model.clone(), pairs, None, tail)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_closed_form() {
        let b = interval_spectrum(1).unwrap();
        assert_eq!(b.pairs().len(), 1);
        assert!((b.pairs()[0].value - 9.869_604_4).abs() < 1e-7);
        let b = interval_spectrum(3).unwrap();
        let v: Vec<f64> = b.pairs().iter().map(|p| p.value / (PI * PI)).collect();
        assert!((v[0] - 1.0).abs() < 1e-14 && (v[1] - 4.0).abs() < 1e-14 && (v[2] - 9.0).abs() < 1e-14);
        assert!(b.pairs().iter().all(|p| p.multiplicity == 1));
        assert_eq!(b.tail.exponent, 0.5);
        assert!(interval_spectrum(0).is_err());
    }

    #[test]
    fn interval_tail_bound_holds() {
        let b = interval_spectrum(50).unwrap();
        let full = interval_spectrum(5000).unwrap();
        let mut lambda = b.cutoff;
        while lambda < full.cutoff {
            assert!(full.counting(lambda) as f64 <= b.tail.constant * lambda.powf(b.tail.exponent) + 1e-9);
            lambda *= 1.07;
        }
    }

    #[test]
    fn toy_pairs() {
        let m = FractalModel::toy(3, 5.0).unwrap();
        let b = toy_geometric_spectrum(&m, 0).unwrap();
        assert_eq!(b.pairs(), &[EigenvaluePair::new(1.0, 1)]);
        let b = toy_geometric_spectrum(&m, 2).unwrap();
        assert_eq!(
            b.pairs(),
            &[
                EigenvaluePair::new(1.0, 1),
                EigenvaluePair::new(5.0, 3),
                EigenvaluePair::new(25.0, 9)
            ]
        );
    }

    #[test]
    fn toy_overflow_guard() {
        let m = FractalModel::toy(3, 5.0).unwrap();
        assert!(toy_geometric_spectrum(&m, 40).is_ok());
        assert!(matches!(toy_geometric_spectrum(&m, 41), Err(Error::Resource(_))));
    }

    #[test]
    fn toy_tail_bound_holds() {
        let m = FractalModel::toy(3, 5.0).unwrap();
        let b = toy_geometric_spectrum(&m, 4).unwrap();
        let full = toy_geometric_spectrum(&m, 20).unwrap();
        let mut lambda = b.cutoff;
        while lambda < full.cutoff {
            assert!(full.counting(lambda) as f64 <= b.tail.constant * lambda.powf(b.tail.exponent) * (1.0 + 1e-12));
            lambda *= 1.3;
        }
    }

    #[test]
    fn batch_rejects_unsorted_and_zero_multiplicity() {
        let m = FractalModel::interval();
        let unsorted = vec![EigenvaluePair::new(2.0, 1), EigenvaluePair::new(1.0, 1)];
        assert!(SpectrumBatch::complete(m.clone(), unsorted).is_err());
        assert!(SpectrumBatch::complete(m.clone(), vec![EigenvaluePair::new(1.0, 0)]).is_err());
        assert!(SpectrumBatch::complete(m, vec![EigenvaluePair::new(-1.0, 1)]).is_err());
    }

    #[test]
    fn generators_are_deterministic() {
        let a = interval_spectrum(100).unwrap();
        let b = interval_spectrum(100).unwrap();
        assert!(a
            .pairs()
            .iter()
            .zip(b.pairs())
            .all(|(x, y)| x.value.to_bits() == y.value.to_bits()));
    }
}
