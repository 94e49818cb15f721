//! Eigenstructure of paths, collapsed instances, decorated graphs and the
//! adiabatic interpolation.

mod adiabatic;
mod collapse;
mod decoration;
mod quasimomenta;

pub use adiabatic::{
    adiabatic_spectrum, adiabatic_sweep, certify_decorated_gaps, decoration_norm, s_grid,
    AdiabaticOperator, GapCertificate, GapPoint, Terminal,
};
pub use collapse::{collapse_clusters, CollapsedPath};
pub use decoration::{
    decoration_fixed_point, level_operator, phi_vector, predict_decorated_eigenpair,
    weight_report, DecoratedPrediction, FixedPoint, LevelWeight, PhiVector, WeightReport,
};
pub use quasimomenta::{
    f_ell, hyperbolic_ratio, path_gap, path_operator, solve_quasimomenta, top_mode, FEll,
    HyperbolicMode, QuasimomentaSolution, TopMode, ROOT_ITER_CAP, ROOT_TOL,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::MultiGraph;
use crate::linalg::{self, lanczos_top, normalize_sign, LanczosOptions, DENSE_CEILING};

/// Top eigenvalue with a unit eigenvector and its residual.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
}

/// Top eigenpair of the tridiagonal collapsed operator.
pub fn top_eigenpair_path(path: &CollapsedPath) -> Result<Eigenpair> {
    let op = path.operator();
    let eig = op.eigen()?;
    let (value, mut vector) = eig.top();
    normalize_sign(&mut vector);
    let residual = linalg::residual(&op, value, &vector);
    Ok(Eigenpair {
        value,
        vector,
        residual,
    })
}

/// Top eigenpair of `g` restricted to the component of `root` (the whole
/// graph when `root` is `None`). Dense for components up to 2048 vertices,
/// Lanczos above. The returned vector lives on all of `g` and vanishes off
/// the component.
pub fn top_eigenpair(g: &MultiGraph, root: Option<usize>, tol: f64) -> Result<Eigenpair> {
    let n = g.vertex_count();
    if n == 0 {
        return Err(Error::invalid("empty graph"));
    }
    let (sub, members) = match root {
        Some(r) => {
            let mut members = g.component_of(r);
            if members.len() == n {
                (None, (0..n).collect())
            } else {
                members.sort_unstable();
                (Some(induced(g, &members)), members)
            }
        }
        None => (None, (0..n).collect::<Vec<_>>()),
    };
    let h = sub.as_ref().unwrap_or(g);
    let (value, local) = if h.vertex_count() <= DENSE_CEILING {
        let (vals, vecs) = linalg::dense_eigen(h.to_dense());
        (vals[0], vecs.column(0).iter().copied().collect::<Vec<_>>())
    } else {
        let opts = LanczosOptions {
            tol,
            ..Default::default()
        };
        let pair = lanczos_top(h, &[], None, &opts)?.remove(0);
        (pair.value, pair.vector)
    };
    let mut vector = vec![0.0; n];
    for (i, &v) in members.iter().enumerate() {
        vector[v] = local[i];
    }
    normalize_sign(&mut vector);
    let residual = linalg::residual(g, value, &vector);
    if residual > tol.max(1e-12) {
        return Err(Error::numeric("top eigenpair", residual));
    }
    Ok(Eigenpair {
        value,
        vector,
        residual,
    })
}

/// Subgraph induced on sorted `members`, reindexed `0..members.len()`.
pub fn induced(g: &MultiGraph, members: &[usize]) -> MultiGraph {
    let mut index = vec![usize::MAX; g.vertex_count()];
    for (i, &v) in members.iter().enumerate() {
        index[v] = i;
    }
    let mut h = MultiGraph::new(members.len());
    for (i, &v) in members.iter().enumerate() {
        for &u in g.neighbors(v) {
            let j = index[u];
            if j != usize::MAX && (j > i || (j == i && u == v)) {
                h.add_edge(i, j);
            }
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_path;

    #[test]
    fn path_top() {
        let g = build_path(5).unwrap();
        let p = top_eigenpair(&g, Some(0), 1e-10).unwrap();
        assert!((p.value - 3f64.sqrt()).abs() < 1e-12);
        assert!(p.vector.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn component_selection() {
        let mut g = MultiGraph::new(5);
        g.add_edge(0, 1);
        g.add_edge(2, 3);
        g.add_edge(3, 4);
        g.add_edge(2, 4);
        let p = top_eigenpair(&g, Some(0), 1e-10).unwrap();
        assert!((p.value - 1.0).abs() < 1e-12);
        assert_eq!(&p.vector[2..], &[0.0, 0.0, 0.0]);
        let q = top_eigenpair(&g, None, 1e-10).unwrap();
        assert!((q.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn induced_keeps_loops_and_multiedges() {
        let mut g = MultiGraph::new(3);
        g.add_edge(0, 0);
        g.add_edge(0, 2);
        g.add_edge(0, 2);
        g.add_edge(1, 2);
        let h = induced(&g, &[0, 2]);
        assert_eq!(h.self_loops(0), 1);
        assert_eq!(h.multiplicity(0, 1), 2);
        assert_eq!(h.edge_count(), 3);
    }
}
