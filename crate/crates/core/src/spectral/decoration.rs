use serde::{Deserialize, Serialize};

use super::quasimomenta::{sinh_ratio, top_mode, TopMode};
use super::{induced, top_eigenpair};
use crate::error::{Error, Result};
use crate::graph::{forecast_decoration, DecorationSchedule, Instance, InstanceLayout, TreeSpec};
use crate::linalg::{self, SymTridiagonal};

/// Level operator of a complete `b`-ary tree of depth `D` with an extra
/// diagonal weight `gamma` at the root: `(D+1)` sites, root first, hops `sqrt(b)`.
pub fn level_operator(gamma: f64, tree: TreeSpec) -> SymTridiagonal {
    let mut diag = vec![0.0; tree.depth + 1];
    diag[0] = gamma;
    SymTridiagonal::new(diag, vec![(tree.arity as f64).sqrt(); tree.depth])
}

/// Top eigenvalue of [`level_operator`] via the quasimomentum equation of the
/// reversed path `sqrt(b) A_{D+1}(gamma / sqrt(b))`.
fn lambda_t(gamma: f64, tree: TreeSpec) -> Result<(f64, TopMode)> {
    let sb = (tree.arity as f64).sqrt();
    let mode = top_mode(tree.depth + 1, gamma / sb)?;
    Ok((sb * mode.eigenvalue(), mode))
}

/// Solution of `lambda_G + k / gamma = lambda_T(gamma)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub gamma: f64,
    /// Decorated top eigenvalue `lambda_T(gamma)`.
    pub lambda: f64,
    /// Hyperbolic parameter of the tree mode, when `lambda > 2 sqrt(b)`.
    pub x: Option<f64>,
    /// Quasimomentum of the tree mode otherwise.
    pub p: Option<f64>,
}

pub fn decoration_fixed_point(lambda_g: f64, k: usize, tree: TreeSpec) -> Result<FixedPoint> {
    if tree.arity == 0 {
        return Err(Error::invalid("tree arity must be positive"));
    }
    let kf = k as f64;
    let f = |g: f64| -> Result<f64> { Ok(lambda_t(g, tree)?.0 - lambda_g - kf / g) };
    // lambda_T(gamma) >= gamma, so F(hi) > 0 once hi > max(lambda_G, 0) + k
    let mut hi = lambda_g.max(0.0) + kf + 1.0;
    let mut guard = 0;
    while f(hi)? <= 0.0 {
        hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(Error::numeric("decoration fixed point: no upper bracket", hi));
        }
    }
    let mut lo = hi / 2.0;
    guard = 0;
    while f(lo)? >= 0.0 {
        lo /= 2.0;
        guard += 1;
        if guard > 200 || lo < 1e-300 {
            return Err(Error::numeric("decoration fixed point: no lower bracket", lo));
        }
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let gamma = 0.5 * (lo + hi);
    let (lambda, mode) = lambda_t(gamma, tree)?;
    let (x, p) = match mode {
        TopMode::Hyper { x } => (Some(x), None),
        TopMode::Trig { p } => (None, Some(p)),
    };
    Ok(FixedPoint { gamma, lambda, x, p })
}

/// Tree eigenvector on level superpositions, root amplitude 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhiVector {
    /// Amplitude of the unit level-`t` superposition, `t = 0..=D`.
    pub levels: Vec<f64>,
    /// `sqrt(sum_t levels[t]^2)`.
    pub l2: f64,
    /// `sum_t levels[t] * b^(t/2)`: the per-vertex ℓ¹ mass of the tree.
    pub l1: f64,
}

impl PhiVector {
    /// Amplitude carried by a single vertex on level `t`.
    pub fn vertex_amplitude(&self, t: usize, arity: usize) -> f64 {
        (self.levels[t].ln() - 0.5 * t as f64 * (arity as f64).ln()).exp()
    }
}

fn log_component(mode: TopMode, j: usize, ell: usize) -> f64 {
    match mode {
        TopMode::Trig { p } => ((j as f64 * p).sin() / (ell as f64 * p).sin()).ln(),
        TopMode::Hyper { x } if x > 0.0 => {
            let (jf, lf) = (j as f64, ell as f64);
            (jf - lf) * x + ((-2.0 * jf * x).exp_m1() / (-2.0 * lf * x).exp_m1()).ln()
        }
        TopMode::Hyper { x } => sinh_ratio(j, ell, x).ln(),
    }
}

pub fn phi_vector(gamma: f64, tree: TreeSpec) -> Result<PhiVector> {
    if !(gamma > 0.0) {
        return Err(Error::invalid("gamma must be positive"));
    }
    let depth = tree.depth;
    let ell = depth + 1;
    let (_, mode) = lambda_t(gamma, tree)?;
    let half_log_b = 0.5 * (tree.arity as f64).ln();
    let mut levels = Vec::with_capacity(ell);
    let mut l2sq = 0.0;
    let mut l1 = 0.0;
    for t in 0..=depth {
        let lc = log_component(mode, ell - t, ell);
        if !lc.is_finite() && lc != f64::NEG_INFINITY {
            return Err(Error::numeric("phi vector amplitude", f64::NAN));
        }
        let c = lc.exp();
        levels.push(c);
        l2sq += c * c;
        l1 += (lc + t as f64 * half_log_b).exp();
    }
    Ok(PhiVector {
        levels,
        l2: l2sq.sqrt(),
        l1,
    })
}

/// Predicted top eigenpair of a decorated instance, verified by residual.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecoratedPrediction {
    pub base_lambda: f64,
    pub lambda: f64,
    /// One fixed point per round, in application order.
    pub fixed_points: Vec<FixedPoint>,
    /// Unit vector in the instance's vertex order.
    pub vector: Vec<f64>,
    pub residual: f64,
}

/// Assembles `psi' = psi ⊕ (psi_v / gamma) phi(gamma)` round by round on top
/// of the undecorated part of `instance`, and checks the residual against the
/// actual adjacency.
pub fn predict_decorated_eigenpair(
    instance: &Instance,
    schedule: &DecorationSchedule,
    tol: f64,
) -> Result<DecoratedPrediction> {
    let g = &instance.graph;
    let layout = &instance.layout;
    let n0 = layout.original_count();
    if (0..n0).any(|v| !layout.is_original(v)) {
        return Err(Error::InvalidInput(
            "original vertices must precede decoration vertices".into(),
        ));
    }
    let base = induced(g, &(0..n0).collect::<Vec<_>>());
    let fc = forecast_decoration(
        n0 as u128,
        base.edge_count() as u128,
        base.max_degree() as u128,
        schedule,
    );
    if fc.vertices != g.vertex_count() as u128 {
        return Err(Error::InvalidInput(format!(
            "schedule predicts {} vertices, instance has {}",
            fc.vertices,
            g.vertex_count()
        )));
    }
    let entrance = (layout.entrance() < n0).then_some(layout.entrance());
    let psi = top_eigenpair(&base, entrance, 1e-12)?;
    let mut vector = psi.vector;
    vector.reserve(g.vertex_count() - n0);
    let mut lambda = psi.value;
    let mut fixed_points = Vec::with_capacity(schedule.rounds());
    for lvl in schedule.application_order() {
        let fp = decoration_fixed_point(lambda, lvl.trees, lvl.tree)?;
        let phi = phi_vector(fp.gamma, lvl.tree)?;
        let mut amps = Vec::new();
        for t in 0..=lvl.tree.depth {
            let a = phi.vertex_amplitude(t, lvl.tree.arity) / fp.gamma;
            let width = lvl.tree.level_size(t).unwrap() as usize;
            amps.extend(std::iter::repeat_n(a, width));
        }
        let before = vector.len();
        for v in 0..before {
            let pv = vector[v];
            for _ in 0..lvl.trees {
                vector.extend(amps.iter().map(|a| pv * a));
            }
        }
        lambda = fp.lambda;
        fixed_points.push(fp);
    }
    let nrm = linalg::norm(&vector);
    vector.iter_mut().for_each(|x| *x /= nrm);
    let residual = linalg::residual(g, lambda, &vector);
    if !(residual <= tol) {
        return Err(Error::PredictionMismatch {
            residual,
            tolerance: tol,
        });
    }
    Ok(DecoratedPrediction {
        base_lambda: psi.value,
        lambda,
        fixed_points,
        vector,
        residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelWeight {
    pub level: u16,
    pub vertices: usize,
    pub l2_fraction: f64,
    pub l1_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightReport {
    pub l2_fraction_on_original: f64,
    pub l1_fraction_on_original: f64,
    /// Decoration mass by level, level 1 first.
    pub levels: Vec<LevelWeight>,
}

/// Splits the ℓ¹ and ℓ² mass of `vector` between original and decoration
/// vertices.
pub fn weight_report(vector: &[f64], layout: &InstanceLayout) -> Result<WeightReport> {
    if vector.len() != layout.vertex_count() {
        return Err(Error::InvalidInput(format!(
            "vector has {} entries, layout {}",
            vector.len(),
            layout.vertex_count()
        )));
    }
    let top = layout.top_level() as usize;
    let mut l1 = vec![0.0; top + 1];
    let mut l2 = vec![0.0; top + 1];
    let mut count = vec![0usize; top + 1];
    for (v, &x) in vector.iter().enumerate() {
        let lvl = if layout.is_original(v) {
            0
        } else {
            layout.decoration_level(v) as usize
        };
        l1[lvl] += x.abs();
        l2[lvl] += x * x;
        count[lvl] += 1;
    }
    let t1: f64 = l1.iter().sum();
    let t2: f64 = l2.iter().sum();
    if !(t1 > 0.0) {
        return Err(Error::InvalidInput("zero vector".into()));
    }
    Ok(WeightReport {
        l2_fraction_on_original: l2[0] / t2,
        l1_fraction_on_original: l1[0] / t1,
        levels: (1..=top)
            .map(|j| LevelWeight {
                level: j as u16,
                vertices: count[j],
                l2_fraction: l2[j] / t2,
                l1_fraction: l1[j] / t1,
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_zero_is_quadratic() {
        for &(lg, k) in &[(2.0, 1usize), (5.0, 3), (0.5, 7)] {
            let fp = decoration_fixed_point(lg, k, TreeSpec::new(3, 0)).unwrap();
            let expect = (lg + (lg * lg + 4.0 * k as f64).sqrt()) / 2.0;
            assert!((fp.gamma - expect).abs() < 1e-12);
            assert!((fp.lambda - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn no_trees_keeps_lambda() {
        let fp = decoration_fixed_point(8.0, 0, TreeSpec::new(4, 3)).unwrap();
        assert!((fp.lambda - 8.0).abs() < 1e-12);
    }

    #[test]
    fn lambda_t_matches_ql() {
        for &(g, b, d) in &[(0.3, 3usize, 4usize), (2.0, 4, 7), (9.0, 5, 30), (3.0, 9, 2)] {
            let tree = TreeSpec::new(b, d);
            let (l, _) = lambda_t(g, tree).unwrap();
            let q = level_operator(g, tree).largest_eigenvalue().unwrap();
            assert!((l - q).abs() < 1e-10, "{g} {b} {d}: {l} vs {q}");
        }
    }

    #[test]
    fn phi_is_level_eigenvector() {
        for &(g, b, d) in &[(1.0, 3usize, 5usize), (6.0, 4, 8), (12.0, 10, 40)] {
            let tree = TreeSpec::new(b, d);
            let phi = phi_vector(g, tree).unwrap();
            assert_eq!(phi.levels[0], 1.0);
            let (l, _) = lambda_t(g, tree).unwrap();
            let r = linalg::residual(&level_operator(g, tree), l, &phi.levels);
            assert!(r < 1e-10 * phi.l2.max(1.0), "residual {r}");
        }
        let single = phi_vector(2.0, TreeSpec::new(3, 0)).unwrap();
        assert_eq!((single.l1, single.l2), (1.0, 1.0));
    }

    #[test]
    fn deep_phi_is_finite() {
        let phi = phi_vector(10.0, TreeSpec::new(12, 1000)).unwrap();
        assert!(phi.l1.is_finite() && phi.l2.is_finite());
        assert!(phi.l1 > 1e10);
    }
}
