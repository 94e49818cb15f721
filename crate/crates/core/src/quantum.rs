//! Continuous-time quantum walk and adiabatic evolution on collapsed paths
//! and small full instances, simulated with exact propagators.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Instance, MultiGraph};
use crate::linalg::{self, check_dense, Operator, SymTridiagonal, DENSE_CEILING};
use crate::spectral::{AdiabaticOperator, CollapsedPath};

/// Largest tolerated deviation of the state norm from 1.
pub const NORM_TOLERANCE: f64 = 1e-6;
/// Default number of frozen-Hamiltonian steps for an adiabatic run.
pub const DEFAULT_ADIABATIC_STEPS: usize = 10_000;

const TAYLOR_STEP: f64 = 0.5;
const TAYLOR_MAX_TERMS: usize = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    pub amplitudes: Vec<Complex64>,
    pub time: f64,
}

impl StateVector {
    pub fn basis(dim: usize, site: usize) -> Result<Self> {
        if site >= dim {
            return Err(Error::invalid(format!("site {site} outside dimension {dim}")));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[site] = Complex64::new(1.0, 0.0);
        Ok(StateVector {
            amplitudes,
            time: 0.0,
        })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probability(&self, site: usize) -> f64 {
        self.amplitudes[site].norm_sqr()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    fn check_norm(&self, context: &str) -> Result<()> {
        let drift = (self.norm() - 1.0).abs();
        if drift > NORM_TOLERANCE || !drift.is_finite() {
            return Err(Error::numeric(context, drift));
        }
        Ok(())
    }
}

/// Walk Hamiltonian: the adjacency operator of a collapsed path (ENTRANCE
/// at site 0, EXIT at the last site) or of a full graph.
#[derive(Debug, Clone, Copy)]
pub enum Hamiltonian<'a> {
    Path(&'a CollapsedPath),
    Graph {
        graph: &'a MultiGraph,
        entrance: usize,
        exit: usize,
    },
}

impl<'a> Hamiltonian<'a> {
    pub fn for_instance(instance: &'a Instance) -> Result<Self> {
        let exit = instance
            .layout
            .exit()
            .ok_or_else(|| Error::InvalidInput("instance has no EXIT".into()))?;
        Ok(Hamiltonian::Graph {
            graph: &instance.graph,
            entrance: instance.layout.entrance(),
            exit,
        })
    }

    pub fn dim(&self) -> usize {
        match *self {
            Hamiltonian::Path(p) => p.len(),
            Hamiltonian::Graph { graph, .. } => graph.vertex_count(),
        }
    }

    pub fn entrance(&self) -> usize {
        match *self {
            Hamiltonian::Path(_) => 0,
            Hamiltonian::Graph { entrance, .. } => entrance,
        }
    }

    pub fn exit(&self) -> usize {
        match *self {
            Hamiltonian::Path(p) => p.len() - 1,
            Hamiltonian::Graph { exit, .. } => exit,
        }
    }

    fn operator(&self) -> &'a dyn Operator {
        match *self {
            Hamiltonian::Path(p) => p,
            Hamiltonian::Graph { graph, .. } => graph,
        }
    }

    fn norm_bound(&self) -> f64 {
        self.adiabatic(0.0, 0.0).norm_bound()
    }

    /// `-H(s)` of the interpolation towards this Hamiltonian's terminals.
    pub fn adiabatic(&self, s: f64, weight: f64) -> AdiabaticOperator<'a> {
        match *self {
            Hamiltonian::Path(path) => AdiabaticOperator::Path { path, s, weight },
            Hamiltonian::Graph {
                graph,
                entrance,
                exit,
            } => AdiabaticOperator::Graph {
                graph,
                entrance,
                exit,
                s,
                weight,
            },
        }
    }
}

/// Options for [`ct_walk`] and [`exit_scan`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkOptions {
    /// Allow the Taylor integrator above the dense ceiling.
    pub integrator: bool,
}

/// Spectral decomposition with eigenvectors stored row-major.
struct Decomposition {
    values: Vec<f64>,
    vectors: Vec<f64>,
    n: usize,
}

impl Decomposition {
    fn of_tridiagonal(t: &SymTridiagonal) -> Result<Self> {
        check_dense(t.dim())?;
        let e = t.eigen()?;
        let n = e.dim();
        let mut vectors = vec![0.0; n * n];
        for r in 0..n {
            for j in 0..n {
                vectors[r * n + j] = e.component(r, j);
            }
        }
        Ok(Decomposition {
            values: e.values,
            vectors,
            n,
        })
    }

    fn of_operator(op: &dyn Operator) -> Result<Self> {
        check_dense(op.dim())?;
        let (values, v) = linalg::dense_eigen(linalg::to_dense(op));
        let n = values.len();
        let mut vectors = vec![0.0; n * n];
        for r in 0..n {
            for j in 0..n {
                vectors[r * n + j] = v[(r, j)];
            }
        }
        Ok(Decomposition { values, vectors, n })
    }

    fn of_hamiltonian(h: &Hamiltonian<'_>) -> Result<Self> {
        match h {
            Hamiltonian::Path(p) => Self::of_tridiagonal(&p.operator()),
            Hamiltonian::Graph { graph, .. } => Self::of_operator(*graph),
        }
    }

    #[inline]
    fn v(&self, r: usize, j: usize) -> f64 {
        self.vectors[r * self.n + j]
    }

    /// `exp(-i A t) psi`.
    fn propagate(&self, psi: &[Complex64], t: f64) -> Vec<Complex64> {
        let n = self.n;
        let mut coeff = vec![Complex64::new(0.0, 0.0); n];
        for (r, &p) in psi.iter().enumerate() {
            if p.re == 0.0 && p.im == 0.0 {
                continue;
            }
            let row = &self.vectors[r * n..(r + 1) * n];
            for (c, &v) in coeff.iter_mut().zip(row) {
                *c += p * v;
            }
        }
        for (c, &l) in coeff.iter_mut().zip(&self.values) {
            *c *= Complex64::from_polar(1.0, -l * t);
        }
        (0..n)
            .map(|r| {
                let row = &self.vectors[r * n..(r + 1) * n];
                row.iter().zip(&coeff).map(|(&v, &c)| c * v).sum()
            })
            .collect()
    }

    /// `<to| exp(-i A t) |from>`.
    fn amplitude(&self, from: usize, to: usize, t: f64) -> Complex64 {
        (0..self.n)
            .map(|j| Complex64::from_polar(self.v(from, j) * self.v(to, j), -self.values[j] * t))
            .sum()
    }
}

/// `psi <- exp(-i A t) psi` by Taylor series on substeps with
/// `norm_bound * dt <= 1/2`, each series summed to machine precision.
fn taylor_propagate(op: &dyn Operator, norm_bound: f64, psi: &mut [Complex64], t: f64) {
    if t == 0.0 {
        return;
    }
    let n = psi.len();
    let substeps = ((norm_bound * t.abs()) / TAYLOR_STEP).ceil().max(1.0) as usize;
    let h = t / substeps as f64;
    let mut term = vec![Complex64::new(0.0, 0.0); n];
    let mut next = vec![Complex64::new(0.0, 0.0); n];
    for _ in 0..substeps {
        term.copy_from_slice(psi);
        for k in 1..=TAYLOR_MAX_TERMS {
            op.apply_complex(&term, &mut next);
            let factor = Complex64::new(0.0, -h / k as f64);
            let mut size = 0.0;
            for i in 0..n {
                term[i] = next[i] * factor;
                psi[i] += term[i];
                size += term[i].norm_sqr();
            }
            if size.sqrt() < 1e-17 {
                break;
            }
        }
    }
}

/// `exp(-i A t) |start>`. Dense or tridiagonal eigendecomposition up to the
/// dense ceiling; above it the Taylor integrator when `opts.integrator`.
pub fn ct_walk(h: Hamiltonian<'_>, start: usize, t: f64, opts: WalkOptions) -> Result<StateVector> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid("walk time must be finite and non-negative"));
    }
    let mut state = StateVector::basis(h.dim(), start)?;
    state.time = t;
    if t == 0.0 {
        return Ok(state);
    }
    if h.dim() <= DENSE_CEILING {
        let d = Decomposition::of_hamiltonian(&h)?;
        state.amplitudes = d.propagate(&state.amplitudes, t);
    } else if opts.integrator {
        taylor_propagate(h.operator(), h.norm_bound(), &mut state.amplitudes, t);
    } else {
        return Err(Error::TooLarge {
            dim: h.dim(),
            ceiling: DENSE_CEILING,
        });
    }
    state.check_norm("continuous-time walk")?;
    Ok(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub t: f64,
    pub exit_probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExitScan {
    pub best_t: f64,
    pub best_probability: f64,
    pub curve: Vec<ScanPoint>,
}

/// EXIT probability of the walk from `start` at `samples` equally spaced
/// times `t_i = t_max * i / (samples - 1)`, with the earliest maximizer.
pub fn exit_scan(
    h: Hamiltonian<'_>,
    start: usize,
    t_max: f64,
    samples: usize,
    opts: WalkOptions,
) -> Result<ExitScan> {
    if samples < 2 {
        return Err(Error::invalid("exit scan needs at least two samples"));
    }
    if !(t_max >= 0.0 && t_max.is_finite()) {
        return Err(Error::invalid("t_max must be finite and non-negative"));
    }
    let n = h.dim();
    if start >= n {
        return Err(Error::invalid(format!("site {start} outside dimension {n}")));
    }
    let exit = h.exit();
    let times: Vec<f64> = (0..samples)
        .map(|i| t_max * i as f64 / (samples - 1) as f64)
        .collect();
    let probs: Vec<f64> = if n <= DENSE_CEILING {
        let d = Decomposition::of_hamiltonian(&h)?;
        times
            .par_iter()
            .map(|&t| d.amplitude(start, exit, t).norm_sqr())
            .collect()
    } else if opts.integrator {
        let op = h.operator();
        let bound = h.norm_bound();
        let mut psi = StateVector::basis(n, start)?.amplitudes;
        let mut now = 0.0;
        let mut out = Vec::with_capacity(samples);
        for &t in &times {
            taylor_propagate(op, bound, &mut psi, t - now);
            now = t;
            out.push(psi[exit].norm_sqr());
        }
        let drift: f64 = (psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt() - 1.0).abs();
        if drift > NORM_TOLERANCE {
            return Err(Error::numeric("exit scan", drift));
        }
        out
    } else {
        return Err(Error::TooLarge {
            dim: n,
            ceiling: DENSE_CEILING,
        });
    };
    let mut best = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > probs[best] {
            best = i;
        }
    }
    Ok(ExitScan {
        best_t: times[best],
        best_probability: probs[best],
        curve: times
            .into_iter()
            .zip(probs)
            .map(|(t, exit_probability)| ScanPoint { t, exit_probability })
            .collect(),
    })
}

/// Linear sweep of `s` from -1 at `t = 0` through 0 at `T/2` to 1 at `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub total_time: f64,
}

impl Schedule {
    pub fn new(total_time: f64) -> Result<Self> {
        if !(total_time >= 0.0 && total_time.is_finite()) {
            return Err(Error::invalid("total time must be finite and non-negative"));
        }
        Ok(Schedule { total_time })
    }

    pub fn s(&self, t: f64) -> f64 {
        if self.total_time == 0.0 {
            return if t > 0.0 { 1.0 } else { -1.0 };
        }
        let half = self.total_time / 2.0;
        let t = t.clamp(0.0, self.total_time);
        if t <= half {
            -1.0 + t / half
        } else {
            (t - half) / half
        }
    }
}

/// Integrates `i d/dt psi = H(s(t)) psi` from the ENTRANCE basis state with
/// `steps` piecewise-constant steps, each using the exact propagator of
/// `H` frozen at the step midpoint. Collapsed paths diagonalize each frozen
/// Hamiltonian; graphs use the Taylor propagator.
pub fn adiabatic_evolve(
    h: Hamiltonian<'_>,
    schedule: Schedule,
    steps: usize,
    endpoint_weight: f64,
) -> Result<StateVector> {
    if steps == 0 {
        return Err(Error::invalid("steps must be positive"));
    }
    if !(endpoint_weight >= 0.0 && endpoint_weight.is_finite()) {
        return Err(Error::invalid("endpoint weight must be finite and non-negative"));
    }
    let mut state = StateVector::basis(h.dim(), h.entrance())?;
    let total = schedule.total_time;
    state.time = total;
    if total == 0.0 {
        return Ok(state);
    }
    let dt = total / steps as f64;
    for j in 0..steps {
        let op = h.adiabatic(schedule.s((j as f64 + 0.5) * dt), endpoint_weight);
        // exp(-i H dt) = exp(i (-H) dt)
        match op.tridiagonal() {
            Some(t) => {
                let d = Decomposition::of_tridiagonal(&t)?;
                state.amplitudes = d.propagate(&state.amplitudes, -dt);
            }
            None => taylor_propagate(&op, op.norm_bound(), &mut state.amplitudes, -dt),
        }
    }
    state.check_norm("adiabatic evolution")?;
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn two_site_rabi() {
        let p = CollapsedPath::uniform(2, 1.0);
        for &t in &[0.0, 0.3, 1.1, 2.5] {
            let s = ct_walk(Hamiltonian::Path(&p), 0, t, WalkOptions::default()).unwrap();
            assert!((s.probability(1) - t.sin().powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn scan_two_sites() {
        let p = CollapsedPath::uniform(2, 1.0);
        let scan = exit_scan(Hamiltonian::Path(&p), 0, PI, 3, WalkOptions::default()).unwrap();
        assert!((scan.best_t - PI / 2.0).abs() < 1e-12);
        assert!((scan.best_probability - 1.0).abs() < 1e-12);
    }

    #[test]
    fn taylor_matches_eigen() {
        let p = CollapsedPath::obfuscated(7, 3);
        let d = Decomposition::of_tridiagonal(&p.operator()).unwrap();
        let mut psi = StateVector::basis(7, 0).unwrap().amplitudes;
        let exact = d.propagate(&psi, 4.2);
        taylor_propagate(&p, 12.0, &mut psi, 4.2);
        for (a, b) in psi.iter().zip(&exact) {
            assert!((a - b).norm() < 1e-11);
        }
    }

    #[test]
    fn schedule_shape() {
        let s = Schedule::new(10.0).unwrap();
        assert_eq!(s.s(0.0), -1.0);
        assert_eq!(s.s(5.0), 0.0);
        assert_eq!(s.s(10.0), 1.0);
        assert!((s.s(2.5) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn sudden_limit_stays_at_entrance() {
        let p = CollapsedPath::uniform(2, 1.0);
        let s = adiabatic_evolve(Hamiltonian::Path(&p), Schedule::new(0.01).unwrap(), 100, 1.0).unwrap();
        assert!(s.probability(1) <= 0.01);
    }

    #[test]
    fn graph_adiabatic_matches_path() {
        let mut g = MultiGraph::new(3);
        g.add_edge(0, 1);
        g.add_edge(1, 2);
        let p = CollapsedPath::uniform(3, 1.0);
        let h = Hamiltonian::Graph {
            graph: &g,
            entrance: 0,
            exit: 2,
        };
        let sch = Schedule::new(20.0).unwrap();
        let a = adiabatic_evolve(h, sch, 400, 1.0).unwrap();
        let b = adiabatic_evolve(Hamiltonian::Path(&p), sch, 400, 1.0).unwrap();
        assert!((a.probability(2) - b.probability(2)).abs() < 1e-10);
    }
}
