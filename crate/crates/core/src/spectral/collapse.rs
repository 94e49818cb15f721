use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{InstanceLayout, MultiGraph};
use crate::linalg::{Operator, SymTridiagonal};

/// Weighted path obtained by restricting an instance to uniform cluster
/// superpositions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapsedPath {
    /// `hop_weights[c]` couples clusters `c` and `c + 1`.
    pub hop_weights: Vec<f64>,
    pub diagonal_weights: Vec<f64>,
}

impl CollapsedPath {
    pub fn new(hop_weights: Vec<f64>, diagonal_weights: Vec<f64>) -> Result<Self> {
        if diagonal_weights.is_empty() || hop_weights.len() + 1 != diagonal_weights.len() {
            return Err(Error::invalid("collapsed path needs len(hops) = len(diagonal) - 1 >= 0"));
        }
        if hop_weights
            .iter()
            .chain(&diagonal_weights)
            .any(|w| !w.is_finite() || *w < 0.0)
        {
            return Err(Error::invalid("collapsed path weights must be finite and non-negative"));
        }
        Ok(CollapsedPath {
            hop_weights,
            diagonal_weights,
        })
    }

    /// Path on `ell` sites with constant hop weight and zero diagonal.
    pub fn uniform(ell: usize, weight: f64) -> Self {
        CollapsedPath {
            hop_weights: vec![weight; ell.saturating_sub(1)],
            diagonal_weights: vec![0.0; ell],
        }
    }

    /// `m A_ell + 2m I`, the collapse of any undecorated instance with
    /// branching scale `m`.
    pub fn obfuscated(ell: usize, m: usize) -> Self {
        let m = m as f64;
        CollapsedPath {
            hop_weights: vec![m; ell.saturating_sub(1)],
            diagonal_weights: vec![2.0 * m; ell],
        }
    }

    pub fn len(&self) -> usize {
        self.diagonal_weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diagonal_weights.is_empty()
    }

    pub fn operator(&self) -> SymTridiagonal {
        SymTridiagonal::new(self.diagonal_weights.clone(), self.hop_weights.clone())
    }
}

impl Operator for CollapsedPath {
    fn dim(&self) -> usize {
        self.len()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.len();
        for i in 0..n {
            let mut acc = self.diagonal_weights[i] * x[i];
            if i > 0 {
                acc += self.hop_weights[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.hop_weights[i] * x[i + 1];
            }
            y[i] = acc;
        }
    }
}

/// Collapses the original (non-decoration) part of an instance onto its
/// clusters: hop `M_{c,c+1} / sqrt(|C_c| |C_{c+1}|)` and diagonal
/// `(2 * internal edges + loops) / |C_c|`.
pub fn collapse_clusters(g: &MultiGraph, layout: &InstanceLayout) -> Result<CollapsedPath> {
    if layout.vertex_count() != g.vertex_count() {
        return Err(Error::InvalidInput(format!(
            "layout has {} vertices, graph has {}",
            layout.vertex_count(),
            g.vertex_count()
        )));
    }
    let ell = layout.ell();
    if ell == 0 {
        return Err(Error::InvalidInput("layout has no clusters".into()));
    }
    let mut size = vec![0usize; ell];
    let mut internal = vec![0usize; ell];
    let mut forward = vec![0usize; ell.saturating_sub(1)];
    for v in 0..g.vertex_count() {
        let Some(c) = layout.cluster_of(v) else {
            continue;
        };
        size[c] += 1;
        for &u in g.neighbors(v) {
            let Some(cu) = layout.cluster_of(u) else {
                continue;
            };
            if cu == c {
                internal[c] += 1;
            } else if cu == c + 1 {
                forward[c] += 1;
            } else if cu + 1 != c {
                return Err(Error::ConstructionViolation(format!(
                    "edge {v}-{u} joins non-adjacent clusters {c} and {cu}"
                )));
            }
        }
    }
    if let Some(c) = size.iter().position(|&s| s == 0) {
        return Err(Error::ConstructionViolation(format!("cluster {c} is empty")));
    }
    let hop_weights = (0..ell - 1)
        .map(|c| forward[c] as f64 / ((size[c] * size[c + 1]) as f64).sqrt())
        .collect();
    let diagonal_weights = (0..ell).map(|c| internal[c] as f64 / size[c] as f64).collect();
    CollapsedPath::new(hop_weights, diagonal_weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{obfuscate, BuildParams};
    use crate::rng::stream_rng;

    #[test]
    fn two_clusters_formula() {
        let mut g = MultiGraph::new(6);
        for (u, v) in [(0, 2), (0, 3), (1, 4), (1, 5)] {
            g.add_edge(u, v);
        }
        let layout = InstanceLayout::obfuscated(2, 0, 0, &[2, 4]);
        let p = collapse_clusters(&g, &layout).unwrap();
        assert!((p.hop_weights[0] - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(p.diagonal_weights, vec![0.0, 0.0]);
    }

    #[test]
    fn undecorated_collapse_is_m_path_plus_2m() {
        for (m, k, ell) in [(2, 2, 7), (3, 1, 5), (4, 2, 9)] {
            let p = BuildParams::new(m, k, ell, 1).undecorated().unconditioned();
            let inst = obfuscate(&p, &mut stream_rng(2, 0)).unwrap();
            let c = collapse_clusters(&inst.graph, &inst.layout).unwrap();
            assert_eq!(c, CollapsedPath::obfuscated(ell, m));
        }
    }

    #[test]
    fn skipping_edge_is_a_violation() {
        let mut g = MultiGraph::new(3);
        g.add_edge(0, 2);
        let layout = InstanceLayout::path(3);
        assert!(matches!(
            collapse_clusters(&g, &layout),
            Err(Error::ConstructionViolation(_))
        ));
    }
}
