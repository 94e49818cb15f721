use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::collapse::CollapsedPath;
use super::top_eigenpair;
use crate::error::{Error, Result};
use crate::graph::{Instance, MultiGraph};
use crate::linalg::{self, lanczos_top, LanczosOptions, Operator, SymTridiagonal, DENSE_CEILING};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Terminal {
    Entrance,
    Exit,
}

/// `-H(s) = (1 - |s|) A + |s| w |T><T|` with `T` the ENTRANCE for `s < 0` and
/// the EXIT for `s > 0`.
#[derive(Clone, Copy)]
pub enum AdiabaticOperator<'a> {
    Path {
        path: &'a CollapsedPath,
        s: f64,
        weight: f64,
    },
    Graph {
        graph: &'a MultiGraph,
        entrance: usize,
        exit: usize,
        s: f64,
        weight: f64,
    },
}

impl AdiabaticOperator<'_> {
    pub fn s(&self) -> f64 {
        match *self {
            AdiabaticOperator::Path { s, .. } | AdiabaticOperator::Graph { s, .. } => s,
        }
    }

    fn weight(&self) -> f64 {
        match *self {
            AdiabaticOperator::Path { weight, .. } | AdiabaticOperator::Graph { weight, .. } => {
                weight
            }
        }
    }

    /// Index carrying the projector term (none at `s = 0`).
    pub fn projector_site(&self) -> Option<usize> {
        let s = self.s();
        let (entrance, exit) = match *self {
            AdiabaticOperator::Path { path, .. } => (0, path.len() - 1),
            AdiabaticOperator::Graph { entrance, exit, .. } => (entrance, exit),
        };
        if s < 0.0 {
            Some(entrance)
        } else if s > 0.0 {
            Some(exit)
        } else {
            None
        }
    }

    /// Tridiagonal form, available for the path variant.
    pub fn tridiagonal(&self) -> Option<SymTridiagonal> {
        let AdiabaticOperator::Path { path, s, weight } = *self else {
            return None;
        };
        let a = 1.0 - s.abs();
        let mut diag: Vec<f64> = path.diagonal_weights.iter().map(|d| a * d).collect();
        if let Some(t) = self.projector_site() {
            diag[t] += s.abs() * weight;
        }
        Some(SymTridiagonal::new(
            diag,
            path.hop_weights.iter().map(|h| a * h).collect(),
        ))
    }

    /// Upper bound on the spectral norm.
    pub fn norm_bound(&self) -> f64 {
        let a = 1.0 - self.s().abs();
        let base = match *self {
            AdiabaticOperator::Path { path, .. } => (0..path.len())
                .map(|i| {
                    path.diagonal_weights[i].abs()
                        + if i > 0 { path.hop_weights[i - 1] } else { 0.0 }
                        + path.hop_weights.get(i).copied().unwrap_or(0.0)
                })
                .fold(0.0, f64::max),
            AdiabaticOperator::Graph { graph, .. } => graph.max_degree() as f64,
        };
        a * base + self.s().abs() * self.weight()
    }
}

impl Operator for AdiabaticOperator<'_> {
    fn dim(&self) -> usize {
        match *self {
            AdiabaticOperator::Path { path, .. } => path.len(),
            AdiabaticOperator::Graph { graph, .. } => graph.vertex_count(),
        }
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        match *self {
            AdiabaticOperator::Path { path, .. } => path.apply(x, y),
            AdiabaticOperator::Graph { graph, .. } => graph.apply(x, y),
        }
        let a = 1.0 - self.s().abs();
        y.iter_mut().for_each(|v| *v *= a);
        if let Some(t) = self.projector_site() {
            y[t] += self.s().abs() * self.weight() * x[t];
        }
    }

    fn apply_complex(&self, x: &[Complex64], y: &mut [Complex64]) {
        match *self {
            AdiabaticOperator::Path { path, .. } => path.apply_complex(x, y),
            AdiabaticOperator::Graph { graph, .. } => graph.apply_complex(x, y),
        }
        let a = 1.0 - self.s().abs();
        y.iter_mut().for_each(|v| *v *= a);
        if let Some(t) = self.projector_site() {
            y[t] += x[t] * (self.s().abs() * self.weight());
        }
    }
}

/// Two largest eigenvalues of `-H(s)` and their difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapPoint {
    pub s: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub gap: f64,
}

pub fn adiabatic_spectrum(op: &AdiabaticOperator<'_>) -> Result<GapPoint> {
    let s = op.s();
    if !(-1.0..=1.0).contains(&s) {
        return Err(Error::invalid(format!("s = {s} outside [-1, 1]")));
    }
    let n = op.dim();
    if n < 2 {
        return Err(Error::invalid("need at least two sites for a gap"));
    }
    let (l1, l2) = if let Some(t) = op.tridiagonal() {
        let v = t.eigenvalues()?;
        (v[n - 1], v[n - 2])
    } else if n <= DENSE_CEILING {
        let v = linalg::dense_eigenvalues(linalg::to_dense(op));
        (v[0], v[1])
    } else {
        let pairs = lanczos_top(
            op,
            &[],
            None,
            &LanczosOptions {
                count: 2,
                tol: 1e-9,
                ..Default::default()
            },
        )?;
        (pairs[0].value, pairs[1].value)
    };
    Ok(GapPoint {
        s,
        lambda1: l1,
        lambda2: l2,
        gap: l1 - l2,
    })
}

/// `points` equally spaced values from -1 to 1 inclusive.
pub fn s_grid(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points)
            .map(|i| -1.0 + 2.0 * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// Gap of `-H(s)` over a grid, in grid order.
pub fn adiabatic_sweep<'a, F>(grid: &[f64], make: F) -> Result<Vec<GapPoint>>
where
    F: Fn(f64) -> AdiabaticOperator<'a> + Sync,
{
    grid.par_iter()
        .map(|&s| adiabatic_spectrum(&make(s)))
        .collect()
}

/// Spectral norm of the decoration part `A_D`: all edges with at least one
/// decoration endpoint.
pub fn decoration_norm(instance: &Instance) -> Result<f64> {
    let g = &instance.graph;
    let layout = &instance.layout;
    let mut forest = MultiGraph::new(g.vertex_count());
    for (u, v) in g.edges() {
        if !layout.is_original(u) || !layout.is_original(v) {
            forest.add_edge(u, v);
        }
    }
    if forest.edge_count() == 0 {
        return Ok(0.0);
    }
    // every original vertex carries an isomorphic decoration component
    let root = (0..g.vertex_count())
        .find(|&v| layout.is_original(v) && forest.degree(v) > 0)
        .unwrap_or(0);
    Ok(top_eigenpair(&forest, Some(root), 1e-10)?.value)
}

/// Perturbation certificate at one grid point: if `gap >= 3 eps` with
/// `eps = (1 - |s|) ‖A_D‖`, the decorated gap is at least `gap / 3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapCertificate {
    pub s: f64,
    pub undecorated_gap: f64,
    pub perturbation: f64,
    pub certified_gap: Option<f64>,
}

pub fn certify_decorated_gaps(sweep: &[GapPoint], decoration_norm: f64) -> Vec<GapCertificate> {
    sweep
        .iter()
        .map(|p| {
            let eps = (1.0 - p.s.abs()) * decoration_norm;
            GapCertificate {
                s: p.s,
                undecorated_gap: p.gap,
                perturbation: eps,
                certified_gap: (p.gap >= 3.0 * eps && p.gap > 0.0).then_some(p.gap / 3.0),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_and_middle() {
        let path = CollapsedPath::uniform(5, 1.0);
        let p = adiabatic_spectrum(&AdiabaticOperator::Path {
            path: &path,
            s: -1.0,
            weight: 3.0,
        })
        .unwrap();
        assert_eq!((p.lambda1, p.lambda2), (3.0, 0.0));
        let p = adiabatic_spectrum(&AdiabaticOperator::Path {
            path: &path,
            s: 0.0,
            weight: 3.0,
        })
        .unwrap();
        assert!((p.lambda1 - 3f64.sqrt()).abs() < 1e-12);
        assert!((p.lambda2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn graph_variant_matches_path() {
        let g = crate::graph::build_path(6).unwrap();
        let path = CollapsedPath::uniform(6, 1.0);
        for &s in &[-0.7, -0.2, 0.0, 0.4, 0.95] {
            let a = adiabatic_spectrum(&AdiabaticOperator::Path {
                path: &path,
                s,
                weight: 2.0,
            })
            .unwrap();
            let b = adiabatic_spectrum(&AdiabaticOperator::Graph {
                graph: &g,
                entrance: 0,
                exit: 5,
                s,
                weight: 2.0,
            })
            .unwrap();
            assert!((a.gap - b.gap).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_endpoints() {
        let g = s_grid(201);
        assert_eq!(g.len(), 201);
        assert_eq!((g[0], g[100], g[200]), (-1.0, 0.0, 1.0));
    }
}
