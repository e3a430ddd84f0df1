//! Electrical (and, by Assumption of identical structure, communication)
//! network: weighted undirected graph with incidence and Laplacian views.
//!
//! Public constructors take 1-based node indices; everything stored and
//! returned internally is 0-based.

use std::collections::HashSet;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// An oriented, weighted edge. `tail` carries `+sqrt(w)` in the incidence
/// column and `head` carries `-sqrt(w)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    pub weight: f64,
}

/// Connected weighted graph on `n` buses.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGraph {
    n: usize,
    edges: Vec<Edge>,
}

impl NetworkGraph {
    /// Path `1 - 2 - ... - n` with uniform weight.
    pub fn build_path(n: usize, weight: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize(
                "path graph needs at least one node".into(),
            ));
        }
        let edges: Vec<_> = (1..n).map(|i| (i, i + 1, weight)).collect();
        Self::build_from_edges(n, &edges)
    }

    /// Validates and builds a graph from 1-based `(i, j, weight)` triples.
    /// The orientation of each edge is `i -> j` as given.
    pub fn build_from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize("graph needs at least one node".into()));
        }
        let mut seen = HashSet::new();
        let mut stored = Vec::with_capacity(edges.len());
        for &(i, j, weight) in edges {
            for idx in [i, j] {
                if idx == 0 || idx > n {
                    return Err(Error::NodeOutOfRange { index: idx, n });
                }
            }
            if i == j {
                return Err(Error::SelfLoop(i));
            }
            if !(weight > 0.0) || !weight.is_finite() {
                return Err(Error::NonPositiveWeight { i, j, weight });
            }
            if !seen.insert((i.min(j), i.max(j))) {
                return Err(Error::DuplicateEdge {
                    i: i.min(j),
                    j: i.max(j),
                });
            }
            stored.push(Edge {
                tail: i - 1,
                head: j - 1,
                weight,
            });
        }
        let g = NetworkGraph { n, edges: stored };
        let components = g.component_count();
        if components != 1 {
            return Err(Error::Disconnected { components });
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Always true for a constructed graph; kept as a queryable flag.
    pub fn is_connected(&self) -> bool {
        self.component_count() == 1
    }

    /// A connected graph is a tree iff it has exactly `n - 1` edges.
    pub fn is_acyclic(&self) -> bool {
        self.edges.len() + 1 == self.n
    }

    /// Same graph with every weight multiplied by `factor` (> 0).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "scale factor {factor} must be positive"
            )));
        }
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                weight: e.weight * factor,
                ..*e
            })
            .collect();
        Ok(NetworkGraph { n: self.n, edges })
    }

    /// Same graph with the orientation of edge `index` (0-based) reversed.
    pub fn with_reversed_edge(&self, index: usize) -> Self {
        let mut g = self.clone();
        let e = &mut g.edges[index];
        std::mem::swap(&mut e.tail, &mut e.head);
        g
    }

    /// Weighted incidence matrix (n x |E|): column `e` holds `+sqrt(w)` at the
    /// tail and `-sqrt(w)` at the head, so `E E^T = L`.
    pub fn incidence(&self) -> DMatrix<f64> {
        let mut e = DMatrix::zeros(self.n, self.edges.len());
        for (col, edge) in self.edges.iter().enumerate() {
            let s = edge.weight.sqrt();
            e[(edge.tail, col)] = s;
            e[(edge.head, col)] = -s;
        }
        e
    }

    /// Weighted adjacency matrix.
    pub fn adjacency(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for edge in &self.edges {
            a[(edge.tail, edge.head)] = edge.weight;
            a[(edge.head, edge.tail)] = edge.weight;
        }
        a
    }

    /// `L = diag(A 1) - A`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let mut l = DMatrix::zeros(self.n, self.n);
        for edge in &self.edges {
            let (i, j, w) = (edge.tail, edge.head, edge.weight);
            l[(i, i)] += w;
            l[(j, j)] += w;
            l[(i, j)] -= w;
            l[(j, i)] -= w;
        }
        l
    }

    /// Laplacian eigenvalues in ascending order.
    pub fn spectrum(&self) -> Vec<f64> {
        let mut eig: Vec<f64> = SymmetricEigen::new(self.laplacian())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        eig.sort_by(|a, b| a.total_cmp(b));
        eig
    }

    fn component_count(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut components = self.n;
        for edge in &self.edges {
            let (a, b) = (find(&mut parent, edge.tail), find(&mut parent, edge.head));
            if a != b {
                parent[a] = b;
                components -= 1;
            }
        }
        components
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs(m: &DMatrix<f64>) -> f64 {
        m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    #[test]
    fn path_two() {
        let g = NetworkGraph::build_path(2, 1.0).unwrap();
        assert_eq!(
            g.edges(),
            &[Edge {
                tail: 0,
                head: 1,
                weight: 1.0
            }]
        );
        let e = g.incidence();
        assert_eq!(e, DMatrix::from_column_slice(2, 1, &[1.0, -1.0]));
        assert_eq!(
            &e * e.transpose(),
            DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0])
        );
    }

    #[test]
    fn incidence_scales_with_sqrt_weight() {
        let g = NetworkGraph::build_path(2, 4.0).unwrap();
        assert_eq!(
            g.incidence(),
            DMatrix::from_column_slice(2, 1, &[2.0, -2.0])
        );
        let b = 2.5;
        let l = NetworkGraph::build_path(2, b).unwrap().laplacian();
        assert_eq!(l, DMatrix::from_row_slice(2, 2, &[b, -b, -b, b]));
    }

    #[test]
    fn single_node() {
        let g = NetworkGraph::build_path(1, 1.0).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.laplacian(), DMatrix::zeros(1, 1));
        assert_eq!(g.spectrum(), vec![0.0]);
        assert!(g.is_acyclic());
    }

    #[test]
    fn zero_nodes_rejected() {
        assert!(matches!(
            NetworkGraph::build_path(0, 1.0),
            Err(Error::InvalidSize(_))
        ));
    }

    #[test]
    fn path_three_laplacian() {
        let g = NetworkGraph::build_from_edges(3, &[(1, 2, 1.0), (2, 3, 1.0)]).unwrap();
        assert!(g.is_acyclic());
        let expected =
            DMatrix::from_row_slice(3, 3, &[1.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 1.0]);
        assert_eq!(g.laplacian(), expected);
    }

    #[test]
    fn triangle_spectrum() {
        let g =
            NetworkGraph::build_from_edges(3, &[(1, 2, 1.0), (2, 3, 1.0), (1, 3, 1.0)]).unwrap();
        assert!(!g.is_acyclic());
        let s = g.spectrum();
        for (got, want) in s.iter().zip([0.0, 3.0, 3.0]) {
            assert!((got - want).abs() < 1e-12, "{s:?}");
        }
    }

    #[test]
    fn path_five_spectrum_matches_cosine_formula() {
        let s = NetworkGraph::build_path(5, 1.0).unwrap().spectrum();
        for (k, got) in s.iter().enumerate() {
            let want = 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / 5.0).cos();
            assert!((got - want).abs() < 1e-12);
        }
        for (got, want) in s.iter().zip([0.0, 0.382, 1.382, 2.618, 3.618]) {
            assert!((got - want).abs() < 1e-3);
        }
        assert!(s[0].abs() < 1e-10);
    }

    #[test]
    fn validation_errors() {
        assert!(matches!(
            NetworkGraph::build_from_edges(3, &[(1, 2, 1.0)]),
            Err(Error::Disconnected { components: 2 })
        ));
        assert!(matches!(
            NetworkGraph::build_from_edges(2, &[(1, 2, 0.0)]),
            Err(Error::NonPositiveWeight { .. })
        ));
        assert!(matches!(
            NetworkGraph::build_from_edges(2, &[(1, 2, -1.0)]),
            Err(Error::NonPositiveWeight { .. })
        ));
        assert!(matches!(
            NetworkGraph::build_from_edges(2, &[(1, 2, 1.0), (2, 1, 1.0)]),
            Err(Error::DuplicateEdge { i: 1, j: 2 })
        ));
        assert!(matches!(
            NetworkGraph::build_from_edges(2, &[(1, 1, 1.0)]),
            Err(Error::SelfLoop(1))
        ));
        assert!(matches!(
            NetworkGraph::build_from_edges(2, &[(1, 3, 1.0)]),
            Err(Error::NodeOutOfRange { index: 3, n: 2 })
        ));
    }

    #[test]
    fn weighted_incidence_reproduces_laplacian() {
        let g = NetworkGraph::build_from_edges(
            4,
            &[
                (1, 2, 0.5),
                (2, 3, 2.0),
                (3, 4, 3.0),
                (4, 1, 1.5),
                (1, 3, 0.25),
            ],
        )
        .unwrap();
        let e = g.incidence();
        assert!(max_abs(&(&e * e.transpose() - g.laplacian())) <= 1e-12);
        let ones = DMatrix::from_element(4, 1, 1.0);
        assert!(max_abs(&(g.laplacian() * ones)) < 1e-15);
    }

    #[test]
    fn scaling_weights_scales_spectrum() {
        let g =
            NetworkGraph::build_from_edges(4, &[(1, 2, 1.0), (2, 3, 2.0), (2, 4, 0.5)]).unwrap();
        let gamma = 3.7;
        let base = g.spectrum();
        let scaled = g.scaled(gamma).unwrap().spectrum();
        for (a, b) in base.iter().zip(&scaled) {
            assert!((a * gamma - b).abs() < 1e-12);
        }
    }
}
