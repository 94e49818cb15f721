use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SymTridiagonal;

/// Bisection tolerance on `p` and `x`.
pub const ROOT_TOL: f64 = 1e-12;
/// Bisection iteration cap.
pub const ROOT_ITER_CAP: usize = 200;

/// Value of `f_ell(p) = sin((ell+1)p) / sin(ell p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FEll {
    Value(f64),
    /// `sin(ell p) = 0` with a nonzero numerator; `sign` is the numerator's sign.
    Pole { sign: f64 },
}

impl FEll {
    pub fn value(self) -> Option<f64> {
        match self {
            FEll::Value(v) => Some(v),
            FEll::Pole { .. } => None,
        }
    }
}

pub fn f_ell(p: f64, ell: usize) -> FEll {
    let l = ell as f64;
    let turns = (l * p / PI).round();
    if (l * p - turns * PI).abs() <= 1e-13 * (1.0 + l * p.abs()) {
        let i = turns as i64;
        if i.rem_euclid(ell as i64) == 0 {
            // removable point p = (i / ell) pi, a multiple of pi
            let q = i / ell as i64;
            let sign = if q.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            return FEll::Value(sign * (l + 1.0) / l);
        }
        return FEll::Pole {
            sign: ((l + 1.0) * p).sin().signum(),
        };
    }
    FEll::Value(((l + 1.0) * p).sin() / (l * p).sin())
}

/// `sinh((ell+1)x) / sinh(ell x)` for `x > 0`, overflow-free.
pub fn hyperbolic_ratio(x: f64, ell: usize) -> f64 {
    let l = ell as f64;
    if x == 0.0 {
        return (l + 1.0) / l;
    }
    x.exp() * (-2.0 * (l + 1.0) * x).exp_m1() / (-2.0 * l * x).exp_m1()
}

/// `sinh(j x) / sinh(ell x)`, overflow-free; `x = 0` gives `j / ell`.
pub fn sinh_ratio(j: usize, ell: usize, x: f64) -> f64 {
    if x == 0.0 {
        return j as f64 / ell as f64;
    }
    let (j, l) = (j as f64, ell as f64);
    ((j - l) * x).exp() * (-2.0 * j * x).exp_m1() / (-2.0 * l * x).exp_m1()
}

/// The mode outside the trigonometric band, present when `|alpha| >= (ell+1)/ell`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicMode {
    /// `x >= 0`; `x = 0` is the linear mode with components `j`.
    pub x: f64,
    /// True for the branch below the band (`alpha <= -(ell+1)/ell`).
    pub negative: bool,
}

impl HyperbolicMode {
    pub fn eigenvalue(&self) -> f64 {
        let v = 2.0 * self.x.cosh();
        if self.negative {
            -v
        } else {
            v
        }
    }
}

/// Eigensystem of `A_ell(alpha)`: the path on `ell` sites with a loop of
/// weight `alpha` on the last site.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuasimomentaSolution {
    pub alpha: f64,
    pub ell: usize,
    /// Ascending quasimomenta in `(0, pi)`.
    pub trig_roots: Vec<f64>,
    pub hyper: Option<HyperbolicMode>,
    /// Descending eigenvalues.
    pub eigenvalues: Vec<f64>,
    /// Unit eigenvectors aligned with `eigenvalues`; index `j - 1` holds site `j`.
    pub eigenvectors: Vec<Vec<f64>>,
}

impl QuasimomentaSolution {
    pub fn top(&self) -> (f64, &[f64]) {
        (self.eigenvalues[0], &self.eigenvectors[0])
    }

    pub fn gap(&self) -> f64 {
        self.eigenvalues[0] - self.eigenvalues[1]
    }

    /// Largest `‖A v − λ v‖` over all returned pairs.
    pub fn max_residual(&self) -> f64 {
        let a = path_operator(self.ell, self.alpha);
        self.eigenvalues
            .iter()
            .zip(&self.eigenvectors)
            .map(|(&l, v)| crate::linalg::residual(&a, l, v))
            .fold(0.0, f64::max)
    }
}

/// `A_ell(alpha)` as a tridiagonal operator.
pub fn path_operator(ell: usize, alpha: f64) -> SymTridiagonal {
    let mut diag = vec![0.0; ell];
    if ell > 0 {
        diag[ell - 1] = alpha;
    }
    SymTridiagonal::new(diag, vec![1.0; ell.saturating_sub(1)])
}

/// Bisection for a decreasing function with `g(lo) > 0 > g(hi)` (signs
/// evaluated strictly inside the bracket). Runs to machine resolution; fails
/// only if the cap is hit before the bracket is narrower than `ROOT_TOL`.
fn bisect_decreasing(mut lo: f64, mut hi: f64, g: impl Fn(f64) -> f64) -> Result<f64> {
    for _ in 0..ROOT_ITER_CAP {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if hi - lo <= ROOT_TOL {
        Ok(0.5 * (lo + hi))
    } else {
        Err(Error::numeric("quasimomentum bisection", hi - lo))
    }
}

fn trig_root(ell: usize, alpha: f64, interval: usize) -> Result<f64> {
    let w = PI / ell as f64;
    let lo = (interval - 1) as f64 * w;
    let hi = interval as f64 * w;
    bisect_decreasing(lo, hi, |p| match f_ell(p, ell) {
        FEll::Value(v) => v - alpha,
        // only the bracket ends are poles: +inf on the left, -inf on the right
        FEll::Pole { .. } => {
            if p - lo < hi - p {
                1.0
            } else {
                -1.0
            }
        }
    })
}

/// Solves `sinh((ell+1)x)/sinh(ell x) = a` for `a > (ell+1)/ell`.
fn hyper_root(ell: usize, a: f64) -> Result<f64> {
    // the ratio exceeds e^x, so the root lies below ln a
    let hi = a.ln();
    bisect_decreasing(0.0, hi, |x| a - hyperbolic_ratio(x, ell))
}

fn normalized(mut v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
    v
}

fn trig_vector(ell: usize, p: f64) -> Vec<f64> {
    normalized((1..=ell).map(|j| (j as f64 * p).sin()).collect())
}

fn hyper_vector(ell: usize, mode: HyperbolicMode) -> Vec<f64> {
    normalized(
        (1..=ell)
            .map(|j| {
                let s = sinh_ratio(j, ell, mode.x);
                if mode.negative && j % 2 == 1 {
                    -s
                } else {
                    s
                }
            })
            .collect(),
    )
}

/// Full eigensystem of `A_ell(alpha)` from the quasimomentum equation.
pub fn solve_quasimomenta(ell: usize, alpha: f64) -> Result<QuasimomentaSolution> {
    if ell < 2 {
        return Err(Error::invalid("quasimomenta need ell >= 2"));
    }
    if !alpha.is_finite() {
        return Err(Error::invalid("alpha must be finite"));
    }
    let edge = (ell + 1) as f64 / ell as f64;
    let mut trig_roots = Vec::with_capacity(ell);
    let mut hyper = None;
    let first = if alpha < edge { 1 } else { 2 };
    let last = if alpha > -edge { ell } else { ell - 1 };
    for interval in first..=last {
        trig_roots.push(trig_root(ell, alpha, interval)?);
    }
    if alpha >= edge {
        let x = if alpha == edge { 0.0 } else { hyper_root(ell, alpha)? };
        hyper = Some(HyperbolicMode { x, negative: false });
    } else if alpha <= -edge {
        let x = if alpha == -edge { 0.0 } else { hyper_root(ell, -alpha)? };
        hyper = Some(HyperbolicMode { x, negative: true });
    }

    let mut eigenvalues = Vec::with_capacity(ell);
    let mut eigenvectors = Vec::with_capacity(ell);
    if let Some(h) = hyper.filter(|h| !h.negative) {
        eigenvalues.push(h.eigenvalue());
        eigenvectors.push(hyper_vector(ell, h));
    }
    for &p in &trig_roots {
        eigenvalues.push(2.0 * p.cos());
        eigenvectors.push(trig_vector(ell, p));
    }
    if let Some(h) = hyper.filter(|h| h.negative) {
        eigenvalues.push(h.eigenvalue());
        eigenvectors.push(hyper_vector(ell, h));
    }
    Ok(QuasimomentaSolution {
        alpha,
        ell,
        trig_roots,
        hyper,
        eigenvalues,
        eigenvectors,
    })
}

/// Top mode of `A_ell(alpha)` only; valid for `ell >= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TopMode {
    Trig { p: f64 },
    Hyper { x: f64 },
}

impl TopMode {
    pub fn eigenvalue(&self) -> f64 {
        match *self {
            TopMode::Trig { p } => 2.0 * p.cos(),
            TopMode::Hyper { x } => 2.0 * x.cosh(),
        }
    }

    /// Component at site `j` (1-based) divided by the component at site `ell`.
    pub fn component_ratio(&self, j: usize, ell: usize) -> f64 {
        match *self {
            TopMode::Trig { p } => (j as f64 * p).sin() / (ell as f64 * p).sin(),
            TopMode::Hyper { x } => sinh_ratio(j, ell, x),
        }
    }
}

pub fn top_mode(ell: usize, alpha: f64) -> Result<TopMode> {
    if ell == 0 {
        return Err(Error::invalid("ell must be positive"));
    }
    let edge = (ell + 1) as f64 / ell as f64;
    if alpha < edge {
        Ok(TopMode::Trig {
            p: trig_root(ell, alpha, 1)?,
        })
    } else if alpha == edge {
        Ok(TopMode::Hyper { x: 0.0 })
    } else {
        Ok(TopMode::Hyper {
            x: hyper_root(ell, alpha)?,
        })
    }
}

/// `(top eigenvalue, gap)` of `A_ell(alpha)`, cross-checked against the
/// tridiagonal QL eigenvalues.
pub fn path_gap(ell: usize, alpha: f64) -> Result<(f64, f64)> {
    let sol = solve_quasimomenta(ell, alpha)?;
    let dense = path_operator(ell, alpha).eigenvalues()?;
    let (d1, d2) = (dense[ell - 1], dense[ell - 2]);
    let err = (sol.eigenvalues[0] - d1).abs().max((sol.eigenvalues[1] - d2).abs());
    if err > 1e-9 {
        return Err(Error::numeric("path_gap cross-check", err));
    }
    Ok((sol.eigenvalues[0], sol.gap()))
}
