//! Poles of `ζ(s, γ)`: predicted on the lattice
//! `s = 2a_k - 2m + 2iω_n`, and located numerically by contour integrals.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::FractalModel;
use crate::partition::OscillationProfile;
use crate::special::{rgamma, GaussLegendre};

/// Slack on the closed imaginary bounds.
const IM_SLACK: f64 = 1e-12;

/// Rectangle `re.0 < Re s <= re.1`, `im.0 <= Im s <= im.1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub re: (f64, f64),
    pub im: (f64, f64),
}

impl Region {
    pub fn new(re: (f64, f64), im: (f64, f64)) -> Self {
        Region { re, im }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |(a, b): (f64, f64)| a.is_finite() && b.is_finite() && a < b;
        if !ok(self.re) || !ok(self.im) {
            return Err(Error::Domain(format!(
                "region needs finite increasing bounds, got re {:?} im {:?}",
                self.re, self.im
            )));
        }
        Ok(())
    }

    pub fn contains(&self, s: Complex64) -> bool {
        s.re > self.re.0 && s.re <= self.re.1 && s.im >= self.im.0 - IM_SLACK && s.im <= self.im.1 + IM_SLACK
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoleSource {
    Predicted,
    Located,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoleEstimate {
    pub position: Complex64,
    /// Shift index from the `e^{-γt}` expansion.
    pub m: u32,
    /// Fourier mode.
    pub n: i64,
    /// Expansion term, 0 for the leading one.
    pub k_index: usize,
    pub residue: Option<Complex64>,
    pub source: PoleSource,
    /// Distance from a located pole to the predicted one it was matched with.
    pub match_distance: Option<f64>,
}

/// Lattice points of every expansion term inside `region`.
pub fn predicted_poles(model: &FractalModel, region: &Region, gamma: f64) -> Vec<PoleEstimate> {
    predicted_poles_towers(model, region, gamma, None)
}

/// As [`predicted_poles`], restricted to the first `towers` expansion terms.
pub fn predicted_poles_towers(
    model: &FractalModel,
    region: &Region,
    gamma: f64,
    towers: Option<usize>,
) -> Vec<PoleEstimate> {
    let exponents = model.expansion_exponents();
    let towers = towers.unwrap_or(exponents.len()).min(exponents.len());
    let spacing = model.lattice_spacing();
    let n_lo = ((region.im.0 - IM_SLACK) / spacing).ceil() as i64;
    let n_hi = ((region.im.1 + IM_SLACK) / spacing).floor() as i64;
    let mut out = Vec::new();
    for (k, &a) in exponents.iter().enumerate().take(towers) {
        for m in 0u32.. {
            let sigma = a - f64::from(m);
            if 2.0 * sigma <= region.re.0 || (gamma == 0.0 && m > 0) {
                break;
            }
            if 2.0 * sigma > region.re.1 {
                continue;
            }
            // The 1/Γ(σ) zeros cancel real poles at σ = 0, -1, -2, ...
            let removable = sigma <= 0.0 && (sigma - sigma.round()).abs() < 1e-12;
            for n in n_lo..=n_hi {
                if n == 0 && removable {
                    continue;
                }
                let position = Complex64::new(2.0 * sigma, 2.0 * model.mode_frequency(n));
                out.push(PoleEstimate {
                    position,
                    m,
                    n,
                    k_index: k,
                    residue: None,
                    source: PoleSource::Predicted,
                    match_distance: None,
                });
            }
        }
    }
    out
}

/// The `m = 0` pole of mode `n` with residue `2 g_n / Γ(a + iω_n)`, or `None`
/// when `g_n` is not distinguishable from the fit noise.
pub fn residue_from_oscillation(profile: &OscillationProfile, model: &FractalModel, n: i64) -> Option<PoleEstimate> {
    let g = profile.coefficient(n);
    if g.norm() < (10.0 * profile.fit_residual).max(1e-10) {
        return None;
    }
    let sigma = Complex64::new(profile.exponent, model.mode_frequency(n));
    Some(PoleEstimate {
        position: 2.0 * sigma,
        m: 0,
        n,
        k_index: profile.k_index,
        residue: Some(2.0 * g * rgamma(sigma)),
        source: PoleSource::Predicted,
        match_distance: None,
    })
}

/// Largest cell side.
pub const CELL_SIZE: f64 = 0.5;
const EDGE_POINTS: usize = 32;
const CIRCLE_POINTS: usize = 128;
const MAX_GRID_SHIFTS: usize = 3;
/// Predicted poles closer than this fraction of a cell to a grid line trigger a shift.
const EDGE_CLEARANCE: f64 = 0.1;
/// Located poles closer than this to each other are merged.
const MERGE_DISTANCE: f64 = 1e-3;

fn grid_lines(lo: f64, hi: f64, offset: f64) -> Vec<f64> {
    let cells = ((hi - lo) / CELL_SIZE).ceil().max(1.0) as usize;
    let h = (hi - lo) / cells as f64;
    let mut lines = vec![lo];
    let mut x = lo + offset * h;
    while x < hi - 1e-9 {
        if x > lo + 1e-9 {
            lines.push(x);
        }
        x += h;
    }
    lines.push(hi);
    lines
}

fn near_line(x: f64, lines: &[f64]) -> bool {
    lines.iter().any(|&l| (x - l).abs() < EDGE_CLEARANCE * CELL_SIZE)
}

struct CellIntegral {
    m0: Complex64,
    m1: Complex64,
    winding: i64,
    scale: f64,
}

fn cell_integral<F>(zeta: &F, gl: &GaussLegendre, corners: [Complex64; 4]) -> Result<CellIntegral>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let mut m0 = Complex64::new(0.0, 0.0);
    let mut m1 = Complex64::new(0.0, 0.0);
    let mut arg = 0.0;
    let mut previous: Option<Complex64> = None;
    let mut first: Option<Complex64> = None;
    let mut scale = 0.0f64;
    for e in 0..4 {
        let (a, b) = (corners[e], corners[(e + 1) % 4]);
        let d = b - a;
        for (x, w) in gl.mapped(0.0, 1.0) {
            let s = a + x * d;
            let f = zeta(s)?;
            m0 += w * f * d;
            m1 += w * f * s * d;
            scale = scale.max(f.norm() * d.norm());
            if let Some(p) = previous {
                arg += (f / p).arg();
            }
            first.get_or_insert(f);
            previous = Some(f);
        }
    }
    if let (Some(p), Some(f)) = (previous, first) {
        arg += (f / p).arg();
    }
    let i2pi = Complex64::new(0.0, 2.0 * PI);
    Ok(CellIntegral {
        m0: m0 / i2pi,
        m1: m1 / i2pi,
        winding: (arg / (2.0 * PI)).round() as i64,
        scale,
    })
}

/// `(M0, M1)` on the circle `|s - center| = radius`.
fn circle_moments<F>(zeta: &F, center: Complex64, radius: f64) -> Result<(Complex64, Complex64)>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let mut m0 = Complex64::new(0.0, 0.0);
    let mut m1 = Complex64::new(0.0, 0.0);
    for j in 0..CIRCLE_POINTS {
        let e = Complex64::from_polar(radius, 2.0 * PI * j as f64 / CIRCLE_POINTS as f64);
        let s = center + e;
        let f = zeta(s)? * e;
        m0 += f;
        m1 += f * s;
    }
    let n = CIRCLE_POINTS as f64;
    Ok((m0 / n, m1 / n))
}

/// Poles of `zeta` in `region`, found by contour integration over a grid of
/// cells. `zeta` must be defined on the closed region away from its poles.
/// `predicted` keeps grid lines clear of expected poles, centers the
/// refinement circles and labels the result.
pub fn locate_poles<F>(zeta: F, region: &Region, predicted: &[PoleEstimate]) -> Result<Vec<PoleEstimate>>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    region.validate()?;
    let inside: Vec<Complex64> = predicted
        .iter()
        .map(|p| p.position)
        .filter(|&p| {
            p.re >= region.re.0 && p.re <= region.re.1 && p.im >= region.im.0 - 0.5 && p.im <= region.im.1 + 0.5
        })
        .collect();
    // Pad the closed imaginary bounds so poles on them fall inside a cell.
    let pad = 0.25 * CELL_SIZE;
    let (im_lo, im_hi) = (region.im.0 - pad, region.im.1 + pad);
    let mut lines = None;
    for shift in 0..=MAX_GRID_SHIFTS {
        let offset = 1.0 - shift as f64 / (MAX_GRID_SHIFTS + 1) as f64;
        let re = grid_lines(region.re.0, region.re.1, offset);
        let im = grid_lines(im_lo, im_hi, offset);
        let clear = inside
            .iter()
            .all(|p| !near_line(p.re, &re[1..re.len() - 1]) && !near_line(p.im, &im));
        if clear || shift == MAX_GRID_SHIFTS {
            lines = Some((re, im));
            break;
        }
    }
    let (re_lines, im_lines) = lines.expect("grid chosen");

    let gl = GaussLegendre::new(EDGE_POINTS);
    let mut centers: Vec<Complex64> = Vec::new();
    for re in re_lines.windows(2) {
        for im in im_lines.windows(2) {
            let corners = [
                Complex64::new(re[0], im[0]),
                Complex64::new(re[1], im[0]),
                Complex64::new(re[1], im[1]),
                Complex64::new(re[0], im[1]),
            ];
            let cell = cell_integral(&zeta, &gl, corners)?;
            let flagged = cell.winding < 0 || cell.m0.norm() > 1e-8 * (1.0 + cell.scale);
            if !flagged {
                continue;
            }
            let in_cell: Vec<Complex64> = inside
                .iter()
                .copied()
                .filter(|p| p.re > re[0] && p.re <= re[1] && p.im >= im[0] && p.im <= im[1])
                .collect();
            if in_cell.is_empty() {
                if cell.m0.norm() > 0.0 {
                    centers.push(cell.m1 / cell.m0);
                }
            } else {
                centers.extend(in_cell);
            }
        }
    }

    // A pole near a cell edge flags both neighbours.
    let mut unique: Vec<Complex64> = Vec::new();
    for c in centers {
        if unique.iter().all(|u| (u - c).norm() > EDGE_CLEARANCE * CELL_SIZE) {
            unique.push(c);
        }
    }
    let centers = unique;
    let mut located: Vec<PoleEstimate> = Vec::new();
    for (i, &c) in centers.iter().enumerate() {
        let nearest = centers
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &o)| (o - c).norm())
            .fold(f64::INFINITY, f64::min);
        let radius = 0.45f64.min(0.45 * nearest);
        let (m0, m1) = circle_moments(&zeta, c, radius)?;
        if m0.norm() <= 1e-10 {
            continue;
        }
        let position = m1 / m0;
        // A pole outside the circle aliases into the trapezoid sums.
        if (position - c).norm() >= 0.9 * radius {
            continue;
        }
        if !region.contains(position) || located.iter().any(|p| (p.position - position).norm() < MERGE_DISTANCE) {
            continue;
        }
        let matched = predicted
            .iter()
            .map(|p| (p, (p.position - position).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        let (m, n, k_index, match_distance) = match matched {
            Some((p, d)) if d < radius => (p.m, p.n, p.k_index, Some(d)),
            _ => (0, 0, 0, None),
        };
        located.push(PoleEstimate {
            position,
            m,
            n,
            k_index,
            residue: Some(m0),
            source: PoleSource::Located,
            match_distance,
        });
    }
    located.sort_by(|a, b| {
        a.position
            .re
            .total_cmp(&b.position.re)
            .then(a.position.im.total_cmp(&b.position.im))
    });
    Ok(located)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{toy_residue, toy_zeta};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn toy_lattice() {
        let m = FractalModel::toy(3, 5.0).unwrap();
        let region = Region::new((0.0, 2.0), (-8.0, 8.0));
        let poles = predicted_poles(&m, &region, 0.0);
        let spacing = m.lattice_spacing();
        // Leading tower only: the boundary tower sits at Re s = 0, outside the open bound.
        assert_eq!(poles.len(), 3);
        for p in &poles {
            assert!((p.position.re - m.d_s).abs() < 1e-12);
            assert!((p.position.im - spacing * p.n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn shift_adds_towers_and_removes_integers() {
        let m = FractalModel::interval();
        let region = Region::new((-5.0, 2.0), (-1.0, 1.0));
        let unshifted = predicted_poles(&m, &region, 0.0);
        assert_eq!(unshifted.len(), 1);
        assert!((unshifted[0].position - c(1.0, 0.0)).norm() < 1e-12);
        let shifted = predicted_poles(&m, &region, 1.0);
        let re: Vec<f64> = shifted.iter().map(|p| p.position.re).collect();
        // 1, -1, -3 from the leading tower; the boundary tower at 0, -2, -4 is removable.
        assert_eq!(re, vec![1.0, -1.0, -3.0]);
    }

    #[test]
    fn region_bounds() {
        let r = Region::new((0.0, 1.0), (0.0, 1.0));
        assert!(!r.contains(c(0.0, 0.5)));
        assert!(r.contains(c(1.0, 0.5)));
        assert!(r.contains(c(0.5, 1.0 + 1e-13)));
        assert!(Region::new((1.0, 0.0), (0.0, 1.0)).validate().is_err());
    }

    #[test]
    fn locates_toy_poles_from_closed_form() {
        let m = FractalModel::toy(3, 5.0).unwrap();
        let region = Region::new((0.5, 2.5), (-9.0, 9.0));
        let predicted = predicted_poles(&m, &region, 0.0);
        let located = locate_poles(|s| Ok(toy_zeta(&m, s)), &region, &predicted).unwrap();
        assert_eq!(located.len(), predicted.len());
        for p in &located {
            assert!(p.match_distance.unwrap() < 1e-10, "{p:?}");
            assert!((p.residue.unwrap() - toy_residue(&m)).norm() < 1e-10);
        }
    }

    #[test]
    fn finds_unpredicted_pole() {
        let region = Region::new((-1.0, 1.0), (-1.0, 1.0));
        let pole = c(0.3, -0.2);
        let located = locate_poles(|s| Ok(2.0 / (s - pole) + s), &region, &[]).unwrap();
        assert_eq!(located.len(), 1, "{located:?}");
        assert!((located[0].position - pole).norm() < 1e-10);
        assert!((located[0].residue.unwrap() - 2.0).norm() < 1e-10);
        assert_eq!(located[0].match_distance, None);
    }
}
