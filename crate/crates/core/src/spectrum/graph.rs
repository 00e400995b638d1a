//! Level-m Sierpinski gasket graphs and their exact Dirichlet spectra.
//!
//! The Laplacian is combinatorial (vertex degree on the diagonal, `-1` per
//! edge) with the rows and columns of the three corner vertices removed.

use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};

use super::{EigenvaluePair, SpectrumBatch};
use crate::error::{Error, Result};
use crate::model::FractalModel;

/// Default level cap for the dense eigensolve.
pub const DEFAULT_LEVEL_CAP: u32 = 6;

/// Eigenvalues closer than this (absolute) are merged into one multiplicity.
pub const CLUSTER_TOL: f64 = 1e-9;

/// Vertices and edges of the level-`level` gasket graph.
#[derive(Debug, Clone)]
pub struct GasketGraph {
    /// Integer lattice coordinates of each vertex.
    pub vertices: Vec<(i64, i64)>,
    pub edges: Vec<(usize, usize)>,
    /// Indices of the three corner (boundary) vertices.
    pub boundary: [usize; 3],
}

impl GasketGraph {
    pub fn new(level: u32) -> Self {
        let side = 1i64 << level;
        let corners = [(0, 0), (side, 0), (0, side)];
        let mut builder = Builder::default();
        builder.subdivide(corners[0], corners[1], corners[2], level);
        let boundary = corners.map(|c| builder.index[&c]);
        let mut edges: Vec<(usize, usize)> = builder.edges.into_iter().collect();
        edges.sort_unstable();
        GasketGraph {
            vertices: builder.vertices,
            edges,
            boundary,
        }
    }

    /// Number of non-corner vertices, `(3^{m+1} - 3) / 2`.
    pub fn interior_count(&self) -> usize {
        self.vertices.len() - 3
    }

    /// Combinatorial Laplacian restricted to interior vertices.
    pub fn dirichlet_laplacian(&self) -> DMatrix<f64> {
        let n = self.vertices.len();
        let mut interior = vec![usize::MAX; n];
        let mut next = 0;
        for (i, slot) in interior.iter_mut().enumerate() {
            if !self.boundary.contains(&i) {
                *slot = next;
                next += 1;
            }
        }
        let mut lap = DMatrix::<f64>::zeros(next, next);
        for &(a, b) in &self.edges {
            for (u, v) in [(a, b), (b, a)] {
                if interior[u] != usize::MAX {
                    lap[(interior[u], interior[u])] += 1.0;
                    if interior[v] != usize::MAX {
                        lap[(interior[u], interior[v])] -= 1.0;
                    }
                }
            }
        }
        lap
    }
}

#[derive(Default)]
struct Builder {
    vertices: Vec<(i64, i64)>,
    index: HashMap<(i64, i64), usize>,
    edges: std::collections::BTreeSet<(usize, usize)>,
}

impl Builder {
    fn vertex(&mut self, p: (i64, i64)) -> usize {
        if let Some(&i) = self.index.get(&p) {
            return i;
        }
        let i = self.vertices.len();
        self.vertices.push(p);
        self.index.insert(p, i);
        i
    }

    fn subdivide(&mut self, a: (i64, i64), b: (i64, i64), c: (i64, i64), level: u32) {
        if level == 0 {
            let (ia, ib, ic) = (self.vertex(a), self.vertex(b), self.vertex(c));
            for (u, v) in [(ia, ib), (ib, ic), (ia, ic)] {
                self.edges.insert((u.min(v), u.max(v)));
            }
            return;
        }
        let mid = |p: (i64, i64), q: (i64, i64)| ((p.0 + q.0) / 2, (p.1 + q.1) / 2);
        let (ab, bc, ac) = (mid(a, b), mid(b, c), mid(a, c));
        self.subdivide(a, ab, ac, level - 1);
        self.subdivide(ab, b, bc, level - 1);
        self.subdivide(ac, bc, c, level - 1);
    }
}

/// Sorted eigenvalues of a symmetric matrix grouped into multiplicities.
pub fn dense_laplacian_spectrum(matrix: DMatrix<f64>) -> Result<Vec<EigenvaluePair>> {
    if matrix.nrows() != matrix.ncols() {
        return Err(Error::Spectrum("Laplacian must be square".into()));
    }
    if matrix.nrows() == 0 {
        return Ok(Vec::new());
    }
    let mut values: Vec<f64> = SymmetricEigen::new(matrix).eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(cluster(&values, CLUSTER_TOL))
}

/// Group sorted values whose consecutive gaps are at most `tol`.
pub fn cluster(sorted: &[f64], tol: f64) -> Vec<EigenvaluePair> {
    let mut out: Vec<EigenvaluePair> = Vec::new();
    let mut start = 0;
    for i in 1..=sorted.len() {
        if i == sorted.len() || sorted[i] - sorted[i - 1] > tol {
            let group = &sorted[start..i];
            let mean = group.iter().sum::<f64>() / group.len() as f64;
            // Dirichlet Laplacians are positive definite; clamp eigensolver noise.
            out.push(EigenvaluePair::new(mean.max(0.0), group.len() as u64));
            start = i;
        }
    }
    out
}

/// Exact Dirichlet spectrum of the level-`level` gasket graph.
pub fn dense_graph_spectrum(level: u32, level_cap: u32) -> Result<SpectrumBatch> {
    if level > level_cap {
        return Err(Error::Resource(format!(
            "dense gasket eigensolve at level {level} exceeds the cap {level_cap}"
        )));
    }
    let graph = GasketGraph::new(level);
    let pairs = dense_laplacian_spectrum(graph.dirichlet_laplacian())?;
    SpectrumBatch::complete(FractalModel::gasket(), pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertex_and_interior_counts() {
        for level in 0..5u32 {
            let g = GasketGraph::new(level);
            let three = 3usize.pow(level + 1);
            assert_eq!(g.vertices.len(), (three + 3) / 2);
            assert_eq!(g.interior_count(), (three - 3) / 2);
            assert_eq!(g.edges.len(), 3usize.pow(level + 1));
        }
    }

    #[test]
    fn level_zero_is_empty() {
        let b = dense_graph_spectrum(0, DEFAULT_LEVEL_CAP).unwrap();
        assert!(b.is_empty());
    }

    #[test]
    fn path_graph_sanity() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]);
        let pairs = dense_laplacian_spectrum(m).unwrap();
        assert_eq!(pairs.len(), 2);
        assert!((pairs[0].value - 1.0).abs() < 1e-12 && (pairs[1].value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn level_one_spectrum() {
        // Interior vertices form a triangle with degree 4: 4I - A has {2, 5, 5}.
        let b = dense_graph_spectrum(1, DEFAULT_LEVEL_CAP).unwrap();
        assert_eq!(b.pairs().len(), 2);
        assert!((b.pairs()[0].value - 2.0).abs() < 1e-12);
        assert_eq!(b.pairs()[0].multiplicity, 1);
        assert!((b.pairs()[1].value - 5.0).abs() < 1e-12);
        assert_eq!(b.pairs()[1].multiplicity, 2);
    }

    #[test]
    fn level_cap_enforced() {
        assert!(matches!(
            dense_graph_spectrum(7, DEFAULT_LEVEL_CAP),
            Err(Error::Resource(_))
        ));
    }
}
