//! Parameter bundles describing one self-similar Laplacian.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for the dimension identities.
const DIMENSION_TOL: f64 = 1e-12;

/// Scaling data of a self-similar Laplacian.
///
/// `tau = rho_f * n_cells` is the time (eigenvalue) scaling factor, so
/// eigenvalues grow by `tau` per refinement level while the number of cells
/// grows by `n_cells`. Everything else is derived from those two numbers and
/// the walk dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractalModel {
    pub name: String,
    pub n_cells: u32,
    pub rho_f: f64,
    pub tau: f64,
    pub d_s: f64,
    pub d_f: f64,
    pub d_w: f64,
    pub d_boundary: f64,
    /// Face dimensions `d_0 > d_1 > ... > d_d` with `d_0 = d_f`.
    pub d_k: Option<Vec<f64>>,
}

impl FractalModel {
    /// Build a model from the cell count, energy scaling, walk dimension and
    /// boundary dimension, deriving `tau`, `d_S` and `d_f`.
    pub fn new(
        name: impl Into<String>,
        n_cells: u32,
        rho_f: f64,
        d_w: f64,
        d_boundary: f64,
        d_k: Option<Vec<f64>>,
    ) -> Result<Self> {
        if !(rho_f.is_finite() && rho_f > 0.0) {
            return Err(Error::Model(format!("rho_F must be positive, got {rho_f}")));
        }
        let tau = f64::from(n_cells) * rho_f;
        if tau <= 1.0 {
            return Err(Error::Model(format!("tau <= 1 (tau = N * rho_F = {tau})")));
        }
        if n_cells < 2 {
            return Err(Error::Model(format!("N must be >= 2, got {n_cells}")));
        }
        if !(d_w.is_finite() && d_w > 0.0) {
            return Err(Error::Model(format!("d_w must be positive, got {d_w}")));
        }
        let d_s = 2.0 * f64::from(n_cells).ln() / tau.ln();
        let d_f = d_s * d_w / 2.0;
        let model = FractalModel {
            name: name.into(),
            n_cells,
            rho_f,
            tau,
            d_s,
            d_f,
            d_w,
            d_boundary,
            d_k,
        };
        model.validate()?;
        Ok(model)
    }

    /// Re-check every invariant; used after deserialization.
    pub fn validate(&self) -> Result<()> {
        let close = |a: f64, b: f64| (a - b).abs() <= DIMENSION_TOL * a.abs().max(b.abs()).max(1.0);
        if self.n_cells < 2 {
            return Err(Error::Model("N must be >= 2".into()));
        }
        if self.tau != f64::from(self.n_cells) * self.rho_f {
            return Err(Error::Model("tau must equal rho_F * N".into()));
        }
        if self.tau <= 1.0 {
            return Err(Error::Model(format!("tau <= 1 (tau = {})", self.tau)));
        }
        if !close(self.d_s, 2.0 * f64::from(self.n_cells).ln() / self.tau.ln()) {
            return Err(Error::Model("d_S must equal 2 log N / log tau".into()));
        }
        if !close(self.d_s, 2.0 * self.d_f / self.d_w) {
            return Err(Error::Model("d_S must equal 2 d_f / d_w".into()));
        }
        if !(self.d_boundary >= 0.0) {
            return Err(Error::Model(format!(
                "d_boundary must be nonnegative, got {}",
                self.d_boundary
            )));
        }
        if self.d_boundary >= self.d_f {
            return Err(Error::Model(format!(
                "d_boundary >= d_f ({} >= {})",
                self.d_boundary, self.d_f
            )));
        }
        if let Some(dk) = &self.d_k {
            if dk.is_empty() {
                return Err(Error::Model("d_k list must not be empty".into()));
            }
            if !close(dk[0], self.d_f) {
                return Err(Error::Model(format!(
                    "d_k[0] = {} must equal d_f = {}",
                    dk[0], self.d_f
                )));
            }
            if dk.windows(2).any(|w| w[1] >= w[0]) || dk.iter().any(|&d| d < 0.0) {
                return Err(Error::Model(
                    "d_k list must be strictly decreasing and nonnegative".into(),
                ));
            }
        }
        Ok(())
    }

    /// Spacing of the pole lattice in the imaginary direction, `4π / log τ`.
    pub fn lattice_spacing(&self) -> f64 {
        4.0 * PI / self.tau.ln()
    }

    /// Angular frequency `2π n / log τ` of the n-th Fourier mode in the Mellin variable `s/2`.
    pub fn mode_frequency(&self, n: i64) -> f64 {
        2.0 * PI * n as f64 / self.tau.ln()
    }

    /// Heat-trace exponents `d_k / d_w` in decreasing order. Without an
    /// explicit face list this is `[d_f, d_boundary] / d_w`.
    pub fn expansion_exponents(&self) -> Vec<f64> {
        match &self.d_k {
            Some(dk) => dk.iter().map(|d| d / self.d_w).collect(),
            None => vec![self.d_f / self.d_w, self.d_boundary / self.d_w],
        }
    }

    /// Exponent of the leading heat-trace term, `d_f / d_w = d_S / 2`.
    pub fn leading_exponent(&self) -> f64 {
        self.d_f / self.d_w
    }

    /// Unit interval with Dirichlet conditions: `N = 2`, `rho_F = 2`, `d_w = 2`.
    pub fn interval() -> Self {
        Self::new("interval", 2, 2.0, 2.0, 0.0, Some(vec![1.0, 0.0])).expect("interval preset")
    }

    /// Sierpinski gasket with the standard energy scaling `5/3`.
    pub fn gasket() -> Self {
        let d_w = 5f64.ln() / 2f64.ln();
        let d_f = 3f64.ln() / 2f64.ln();
        Self::new("gasket", 3, 5.0 / 3.0, d_w, 0.0, Some(vec![d_f, 0.0])).expect("gasket preset")
    }

    /// Exactly self-similar toy with eigenvalues `tau^k` of multiplicity `N^k`.
    pub fn toy(n_cells: u32, tau: f64) -> Result<Self> {
        let rho_f = tau / f64::from(n_cells);
        let probe = Self::new(format!("toy({n_cells},{tau})"), n_cells, rho_f, 2.0, 0.0, None)?;
        let d_f = probe.d_f;
        Self::new(probe.name, n_cells, rho_f, 2.0, 0.0, Some(vec![d_f, 0.0]))
    }

    /// Standard Sierpinski carpet as a parameter bundle only. The energy
    /// scaling is a numerical estimate; no spectrum source exists for it.
    pub fn carpet() -> Self {
        let rho_f: f64 = 1.251;
        let d_w = (8.0 * rho_f).ln() / 3f64.ln();
        let d_f = 8f64.ln() / 3f64.ln();
        Self::new("carpet", 8, rho_f, d_w, 1.0, Some(vec![d_f, 1.0, 0.0])).expect("carpet preset")
    }
}
