//! Small linear-algebra layer: a symmetric operator trait, a tridiagonal QL
//! solver, Lanczos for extremal eigenpairs, and dense wrappers over nalgebra.

mod krylov;
mod tridiag;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

pub use krylov::{lanczos_top, power_iteration, LanczosOptions, RitzPair};
pub use tridiag::{SymTridiagonal, TridiagEigen};

use crate::error::{Error, Result};
use crate::graph::MultiGraph;

/// Ceiling for dense eigensolves.
pub const DENSE_CEILING: usize = 2048;

/// Real symmetric linear operator.
pub trait Operator: Sync {
    fn dim(&self) -> usize;
    /// `y = A x`.
    fn apply(&self, x: &[f64], y: &mut [f64]);

    /// `y = A x` on complex vectors.
    fn apply_complex(&self, x: &[Complex64], y: &mut [Complex64]) {
        let re: Vec<f64> = x.iter().map(|z| z.re).collect();
        let im: Vec<f64> = x.iter().map(|z| z.im).collect();
        let mut ore = vec![0.0; x.len()];
        let mut oim = vec![0.0; x.len()];
        self.apply(&re, &mut ore);
        self.apply(&im, &mut oim);
        for ((yv, r), i) in y.iter_mut().zip(ore).zip(oim) {
            *yv = Complex64::new(r, i);
        }
    }
}

impl Operator for MultiGraph {
    fn dim(&self) -> usize {
        self.vertex_count()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        MultiGraph::apply(self, x, y)
    }
    fn apply_complex(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (v, yv) in y.iter_mut().enumerate() {
            *yv = self.neighbors(v).iter().map(|&u| x[u]).sum();
        }
    }
}

impl Operator for SymTridiagonal {
    fn dim(&self) -> usize {
        SymTridiagonal::dim(self)
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        SymTridiagonal::apply(self, x, y)
    }
}

/// `scale * A + diag(diagonal)`.
pub struct ShiftedOperator<'a, A: Operator + ?Sized> {
    pub inner: &'a A,
    pub scale: f64,
    pub diagonal: Vec<f64>,
}

impl<A: Operator + ?Sized> Operator for ShiftedOperator<'_, A> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.inner.apply(x, y);
        for ((yi, xi), di) in y.iter_mut().zip(x).zip(&self.diagonal) {
            *yi = self.scale * *yi + di * xi;
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `‖A v − λ v‖`.
pub fn residual<A: Operator + ?Sized>(op: &A, lambda: f64, v: &[f64]) -> f64 {
    let mut y = vec![0.0; v.len()];
    op.apply(v, &mut y);
    y.iter()
        .zip(v)
        .map(|(a, b)| (a - lambda * b).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Dense symmetric eigen-decomposition, eigenvalues in descending order and
/// eigenvectors as matching columns.
pub fn dense_eigen(a: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Dense matrix of an operator, filled column by column.
pub fn to_dense<A: Operator + ?Sized>(op: &A) -> DMatrix<f64> {
    let n = op.dim();
    let mut a = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        op.apply(&e, &mut col);
        e[j] = 0.0;
        a.set_column(j, &nalgebra::DVector::from_column_slice(&col));
    }
    a
}

/// Dense eigenvalues in descending order.
pub fn dense_eigenvalues(a: DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

pub(crate) fn check_dense(n: usize) -> Result<()> {
    if n > DENSE_CEILING {
        Err(Error::TooLarge {
            dim: n,
            ceiling: DENSE_CEILING,
        })
    } else {
        Ok(())
    }
}

/// Fixes the sign so that the entry of largest magnitude is positive.
pub fn normalize_sign(v: &mut [f64]) {
    let pivot = v
        .iter()
        .copied()
        .fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
    if pivot < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}
