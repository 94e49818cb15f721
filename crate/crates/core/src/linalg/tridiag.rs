use crate::error::{Error, Result};

/// Real symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    /// `off[i]` couples `i` and `i + 1`.
    pub off: Vec<f64>,
}

/// Eigen-decomposition with eigenvalues in ascending order.
#[derive(Debug, Clone)]
pub struct TridiagEigen {
    pub values: Vec<f64>,
    /// Row-major `n x n`; column `i` is the unit eigenvector of `values[i]`.
    vectors: Vec<f64>,
    n: usize,
}

impl TridiagEigen {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn vector(&self, i: usize) -> Vec<f64> {
        (0..self.n).map(|r| self.vectors[r * self.n + i]).collect()
    }

    #[inline]
    pub fn component(&self, row: usize, i: usize) -> f64 {
        self.vectors[row * self.n + i]
    }

    /// Largest eigenvalue and its eigenvector.
    pub fn top(&self) -> (f64, Vec<f64>) {
        (self.values[self.n - 1], self.vector(self.n - 1))
    }
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert!(
            off.len() + 1 == diag.len() || (diag.is_empty() && off.is_empty()),
            "off-diagonal must have length n - 1"
        );
        SymTridiagonal { diag, off }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.off[i] * x[i + 1];
            }
            y[i] = acc;
        }
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let n = self.dim();
        let mut a = nalgebra::DMatrix::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = self.diag[i];
            if i + 1 < n {
                a[(i, i + 1)] = self.off[i];
                a[(i + 1, i)] = self.off[i];
            }
        }
        a
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut d = self.diag.clone();
        let mut e = self.padded_off();
        tql(&mut d, &mut e, None)?;
        d.sort_by(f64::total_cmp);
        Ok(d)
    }

    pub fn largest_eigenvalue(&self) -> Result<f64> {
        Ok(*self.eigenvalues()?.last().expect("empty matrix"))
    }

    pub fn eigen(&self) -> Result<TridiagEigen> {
        let n = self.dim();
        let mut d = self.diag.clone();
        let mut e = self.padded_off();
        let mut z = vec![0.0; n * n];
        for i in 0..n {
            z[i * n + i] = 1.0;
        }
        tql(&mut d, &mut e, Some(&mut z))?;

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
        let values = order.iter().map(|&i| d[i]).collect();
        let mut vectors = vec![0.0; n * n];
        for r in 0..n {
            for (new, &old) in order.iter().enumerate() {
                vectors[r * n + new] = z[r * n + old];
            }
        }
        Ok(TridiagEigen { values, vectors, n })
    }

    fn padded_off(&self) -> Vec<f64> {
        let mut e = self.off.clone();
        e.push(0.0);
        e
    }
}

/// Implicit QL iteration (EISPACK `tql2` structure). `e[i]` couples `i, i+1`,
/// `e[n-1] = 0`. When `z` is supplied it must hold the identity and receives
/// the eigenvectors as columns.
fn tql(d: &mut [f64], e: &mut [f64], mut z: Option<&mut [f64]>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 100 {
                    return Err(Error::numeric("tridiagonal QL iteration", e[l].abs()));
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = z.as_deref_mut() {
                        for k in 0..n {
                            let row = k * n;
                            h = z[row + i + 1];
                            z[row + i + 1] = s * z[row + i] + c * h;
                            z[row + i] = c * z[row + i] - s * h;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}
