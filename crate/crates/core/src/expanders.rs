//! Random regular multigraphs as unions of uniformly random Hamiltonian
//! cycles, and rejection sampling on the second adjacency eigenvalue.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::MultiGraph;
use crate::linalg::{self, lanczos_top, LanczosOptions};

/// Largest size handled by a dense eigensolve in [`second_eigenvalue`].
pub const DENSE_LAMBDA2_CEILING: usize = 512;

/// Slack on `lambda2 <= threshold` absorbing eigensolver round-off.
pub const LAMBDA2_SLACK: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct RegularSample {
    pub graph: MultiGraph,
    pub attempts: usize,
    /// Second-largest eigenvalue; `None` when no conditioning was requested.
    pub lambda2: Option<f64>,
}

/// Summary of an acceptance-rate calibration run.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CalibrationStats {
    pub n: usize,
    pub degree: usize,
    pub threshold: f64,
    pub samples: usize,
    pub accepted: usize,
    pub lambda2_min: f64,
    pub lambda2_mean: f64,
    pub lambda2_max: f64,
}

/// Cycle through all `n` vertices in uniformly random order.
pub fn sample_cycle<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<MultiGraph> {
    if n < 3 {
        return Err(Error::invalid(format!("a cycle needs n >= 3, got {n}")));
    }
    let mut g = MultiGraph::new(n);
    add_cycle(&mut g, rng);
    Ok(g)
}

fn add_cycle<R: Rng + ?Sized>(g: &mut MultiGraph, rng: &mut R) {
    let n = g.vertex_count();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    for i in 0..n {
        g.add_edge(order[i], order[(i + 1) % n]);
    }
}

/// `H_{n,d}`: union of `d/2` independent random cycles, multi-edges kept.
pub fn sample_regular<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<MultiGraph> {
    if n < 3 {
        return Err(Error::invalid(format!("need n >= 3, got {n}")));
    }
    if d < 2 || d % 2 == 1 {
        return Err(Error::invalid(format!("degree must be even and >= 2, got {d}")));
    }
    let mut g = MultiGraph::new(n);
    for _ in 0..d / 2 {
        add_cycle(&mut g, rng);
    }
    Ok(g)
}

/// Second-largest adjacency eigenvalue (by value, multiplicities respected).
///
/// Dense for `n <= 512`; otherwise Lanczos deflated against the top
/// eigenvector (the constant vector when the graph is regular).
pub fn second_eigenvalue(g: &MultiGraph) -> Result<f64> {
    let n = g.vertex_count();
    if n == 0 {
        return Err(Error::invalid("empty graph"));
    }
    if n == 1 {
        return Ok(f64::NEG_INFINITY);
    }
    if n <= DENSE_LAMBDA2_CEILING {
        return Ok(linalg::dense_eigenvalues(g.to_dense())[1]);
    }
    let opts = LanczosOptions {
        tol: 1e-9,
        ..Default::default()
    };
    let d = g.degree(0);
    let top = if g.is_regular(d) {
        vec![1.0 / (n as f64).sqrt(); n]
    } else {
        lanczos_top(g, &[], None, &opts)?.remove(0).vector
    };
    Ok(lanczos_top(g, &[top], None, &opts)?[0].value)
}

/// Rejection-samples `H_{n,2m}` until `lambda2 <= threshold`.
///
/// An infinite threshold accepts the first sample without an eigensolve.
pub fn sample_conditioned<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    threshold: f64,
    max_attempts: usize,
    rng: &mut R,
) -> Result<RegularSample> {
    if max_attempts == 0 {
        return Err(Error::invalid("max_attempts must be positive"));
    }
    if threshold == f64::INFINITY {
        return Ok(RegularSample {
            graph: sample_regular(n, 2 * m, rng)?,
            attempts: 1,
            lambda2: None,
        });
    }
    let mut best = f64::INFINITY;
    for attempt in 1..=max_attempts {
        let graph = sample_regular(n, 2 * m, rng)?;
        let l2 = second_eigenvalue(&graph)?;
        if l2 <= threshold + LAMBDA2_SLACK {
            return Ok(RegularSample {
                graph,
                attempts: attempt,
                lambda2: Some(l2),
            });
        }
        best = best.min(l2);
    }
    Err(Error::ConditioningFailed {
        attempts: max_attempts,
        best_lambda2: best,
        threshold,
    })
}

/// Draws `samples` graphs from `H_{n,d}` and tallies `lambda2 <= threshold`.
pub fn calibrate<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    threshold: f64,
    samples: usize,
    rng: &mut R,
) -> Result<CalibrationStats> {
    let mut values = Vec::with_capacity(samples);
    for _ in 0..samples {
        values.push(second_eigenvalue(&sample_regular(n, d, rng)?)?);
    }
    let accepted = values.iter().filter(|&&v| v <= threshold + LAMBDA2_SLACK).count();
    let mean = if samples == 0 {
        f64::NAN
    } else {
        values.iter().sum::<f64>() / samples as f64
    };
    Ok(CalibrationStats {
        n,
        degree: d,
        threshold,
        samples,
        accepted,
        lambda2_min: values.iter().copied().fold(f64::INFINITY, f64::min),
        lambda2_mean: mean,
        lambda2_max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}
