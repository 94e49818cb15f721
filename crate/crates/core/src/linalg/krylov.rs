use rand::Rng;

use super::tridiag::SymTridiagonal;
use super::{dot, norm, residual, Operator};
use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Approximate eigenpair with its true residual `‖A v − θ v‖`.
#[derive(Debug, Clone)]
pub struct RitzPair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct LanczosOptions {
    /// Number of top eigenpairs wanted.
    pub count: usize,
    /// Residual tolerance on every returned pair.
    pub tol: f64,
    pub max_basis: usize,
    pub restarts: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            count: 1,
            tol: 1e-10,
            max_basis: 300,
            restarts: 40,
        }
    }
}

fn project_out(w: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let c = dot(w, b);
        w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
    }
}

fn scaled(v: &mut [f64]) -> f64 {
    let n = norm(v);
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Pseudo-random start vector, fixed per dimension.
fn default_start(n: usize) -> Vec<f64> {
    let mut rng = stream_rng(0x5EED_1A2C, n as u64);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Top `opts.count` eigenpairs of `op` on the orthogonal complement of
/// `deflate` (which must be orthonormal), by Lanczos with full
/// reorthogonalisation and explicit restarts.
pub fn lanczos_top<A: Operator + ?Sized>(
    op: &A,
    deflate: &[Vec<f64>],
    start: Option<&[f64]>,
    opts: &LanczosOptions,
) -> Result<Vec<RitzPair>> {
    let n = op.dim();
    let mut v = match start {
        Some(s) => s.to_vec(),
        None => default_start(n),
    };
    project_out(&mut v, deflate);
    if scaled(&mut v) == 0.0 {
        v = default_start(n);
        project_out(&mut v, deflate);
        scaled(&mut v);
    }
    let want = opts.count.max(1);
    let mut best_res = f64::INFINITY;

    for _ in 0..=opts.restarts {
        let mut basis: Vec<Vec<f64>> = vec![v.clone()];
        let mut alphas = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let mut w = vec![0.0; n];
        let limit = opts.max_basis.min(n.saturating_sub(deflate.len())).max(1);
        loop {
            let j = basis.len() - 1;
            op.apply(&basis[j], &mut w);
            project_out(&mut w, deflate);
            let a = dot(&w, &basis[j]);
            alphas.push(a);
            // two passes of Gram-Schmidt against the whole basis
            for _ in 0..2 {
                project_out(&mut w, &basis);
            }
            let b = norm(&w);
            let size = alphas.len();
            let done = size >= limit || b < 1e-13 * (1.0 + a.abs());
            if done || (size >= want && size % 10 == 0) {
                let t = SymTridiagonal::new(alphas.clone(), betas.clone());
                let eig = t.eigen()?;
                let k = want.min(size);
                let converged = (0..k).all(|i| {
                    let idx = size - 1 - i;
                    (b * eig.component(size - 1, idx)).abs() <= opts.tol * 0.1
                });
                if converged || done {
                    let mut pairs = Vec::with_capacity(k);
                    for i in 0..k {
                        let idx = size - 1 - i;
                        let mut y = vec![0.0; n];
                        for (r, q) in basis.iter().enumerate() {
                            let c = eig.component(r, idx);
                            y.iter_mut().zip(q).for_each(|(x, qq)| *x += c * qq);
                        }
                        scaled(&mut y);
                        let theta = eig.values[idx];
                        let res = residual(op, theta, &y);
                        pairs.push(RitzPair {
                            value: theta,
                            vector: y,
                            residual: res,
                        });
                    }
                    let worst = pairs.iter().map(|p| p.residual).fold(0.0, f64::max);
                    best_res = best_res.min(worst);
                    if worst <= opts.tol || (pairs.len() == want && b < 1e-13 && worst <= opts.tol * 1e3) {
                        return Ok(pairs);
                    }
                    // restart from the sum of the wanted Ritz vectors
                    v = vec![0.0; n];
                    for p in &pairs {
                        v.iter_mut().zip(&p.vector).for_each(|(x, y)| *x += y);
                    }
                    project_out(&mut v, deflate);
                    if scaled(&mut v) == 0.0 {
                        v = pairs[0].vector.clone();
                    }
                    break;
                }
            }
            w.iter_mut().for_each(|x| *x /= b);
            betas.push(b);
            basis.push(w.clone());
        }
    }
    Err(Error::numeric("Lanczos eigensolver", best_res))
}

/// Power iteration on `A + shift I`, reporting the Rayleigh quotient of `A`.
pub fn power_iteration<A: Operator + ?Sized>(
    op: &A,
    shift: f64,
    start: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<RitzPair> {
    let n = op.dim();
    let mut x = start.map_or_else(|| default_start(n).iter().map(|v| v.abs()).collect(), <[f64]>::to_vec);
    scaled(&mut x);
    let mut y = vec![0.0; n];
    let mut last_res = f64::INFINITY;
    for it in 0..max_iter {
        op.apply(&x, &mut y);
        let theta = dot(&x, &y);
        if it % 8 == 0 {
            last_res = y
                .iter()
                .zip(&x)
                .map(|(a, b)| (a - theta * b).powi(2))
                .sum::<f64>()
                .sqrt();
            if last_res <= tol {
                return Ok(RitzPair {
                    value: theta,
                    vector: x,
                    residual: last_res,
                });
            }
        }
        y.iter_mut().zip(&x).for_each(|(a, b)| *a += shift * b);
        scaled(&mut y);
        std::mem::swap(&mut x, &mut y);
    }
    Err(Error::numeric("power iteration", last_res))
}
