//! Small dense solvers used by the fits. Matrices here are at most a few
//! dozen rows on a side.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Pivots below this fraction of the largest diagonal entry count as zero.
pub const PIVOT_TOLERANCE: f64 = 1e-12;

/// Solves `a · x = rhs` for symmetric positive-definite `a` by Cholesky
/// factorization. Fails with [`Error::Solver`] when a pivot is numerically
/// zero.
pub fn cholesky_solve(a: &DMatrix<f64>, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    assert_eq!(a.ncols(), n);
    assert_eq!(rhs.nrows(), n);
    let scale = (0..n).map(|i| a[(i, i)].abs()).fold(0.0, f64::max);
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > PIVOT_TOLERANCE * scale) || !d.is_finite() {
            return Err(Error::Solver(format!(
                "normal matrix is singular (pivot {j} = {d:e}); use a positive ridge lambda"
            )));
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    let mut x = rhs.clone();
    for col in 0..x.ncols() {
        for i in 0..n {
            let mut s = x[(i, col)];
            for k in 0..i {
                s -= l[(i, k)] * x[(k, col)];
            }
            x[(i, col)] = s / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = x[(i, col)];
            for k in i + 1..n {
                s -= l[(k, i)] * x[(k, col)];
            }
            x[(i, col)] = s / l[(i, i)];
        }
    }
    Ok(x)
}

/// Eigen-decomposition of a symmetric matrix, eigenvalues descending.
/// Each eigenvector is signed so that its largest-magnitude entry (first on
/// ties) is positive.
pub fn sym_eigen_sorted(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(a.clone());
    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]).then(i.cmp(&j)));
    let mut vecs = DMatrix::<f64>::zeros(n, n);
    let mut vals = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        vals.push(eig.eigenvalues[src]);
        let col = eig.eigenvectors.column(src);
        let mut pivot = 0;
        for i in 1..n {
            if col[i].abs() > col[pivot].abs() {
                pivot = i;
            }
        }
        let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            vecs[(i, dst)] = sign * col[i];
        }
    }
    (vals, vecs)
}

/// Solves `a · x · c + lambda · x = r` for symmetric positive-semidefinite
/// `a` (m×m) and `c` (n×n). Diagonalizing both reduces it to an elementwise
/// division. With `lambda = 0` a numerically zero eigenvalue product is a
/// solver error.
pub fn solve_sylvester_spd(
    a: &DMatrix<f64>,
    c: &DMatrix<f64>,
    r: &DMatrix<f64>,
    lambda: f64,
) -> Result<DMatrix<f64>> {
    let (da, u) = sym_eigen_sorted(a);
    let (dc, v) = sym_eigen_sorted(c);
    let scale = da.first().copied().unwrap_or(0.0).abs() * dc.first().copied().unwrap_or(0.0).abs();
    let mut y = u.transpose() * r * &v;
    for i in 0..y.nrows() {
        for j in 0..y.ncols() {
            let d = da[i].max(0.0) * dc[j].max(0.0) + lambda;
            let singular = if lambda > 0.0 { !(d > 0.0) } else { !(d > PIVOT_TOLERANCE * scale) };
            if singular {
                return Err(Error::Solver(
                    "alternating step is singular; use a positive ridge lambda".into(),
                ));
            }
            y[(i, j)] /= d;
        }
    }
    Ok(u * y * v.transpose())
}
