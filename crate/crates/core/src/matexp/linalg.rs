use nalgebra::{DMatrix, SymmetricEigen};

use crate::matexp::Matrix;

/// Orthonormal basis (as columns of the returned vectors) of the kernel of
/// `a`, keeping singular values below `rel_tol · σ_max`.
pub fn null_space(a: &Matrix, rel_tol: f64) -> Vec<Vec<f64>> {
    let (m, n) = a.shape();
    if n == 0 {
        return vec![];
    }
    // Pad with zero rows so the SVD returns a full right factor.
    let rows = m.max(n);
    let mut padded = DMatrix::zeros(rows, n);
    padded.view_mut((0, 0), (m, n)).copy_from(a.as_dmatrix());
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested right singular vectors");
    let smax = svd.singular_values.max();
    let cut = rel_tol * smax.max(f64::MIN_POSITIVE);
    (0..n)
        .filter(|&i| svd.singular_values[i] <= cut || smax == 0.0)
        .map(|i| vt.row(i).iter().copied().collect())
        .collect()
}

/// Orthonormal basis of the column space of `a` as the columns of the result.
pub fn orthonormal_range(a: &Matrix, rel_tol: f64) -> Matrix {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Matrix::zeros(m, 0);
    }
    let svd = a.as_dmatrix().clone().svd(true, false);
    let u = svd.u.expect("requested left singular vectors");
    let smax = svd.singular_values.max();
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| smax > 0.0 && svd.singular_values[i] > rel_tol * smax)
        .collect();
    Matrix::from_fn(m, keep.len(), |r, c| u[(r, keep[c])])
}

/// Numerical rank with relative cutoff.
pub fn rank(a: &Matrix, rel_tol: f64) -> usize {
    if a.rows() == 0 || a.cols() == 0 {
        return 0;
    }
    let s = a.as_dmatrix().clone().singular_values();
    let smax = s.max();
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&v| v > rel_tol * smax).count()
}

/// Minimum-norm least-squares solution of `a x = b` and the residual norm.
pub fn least_squares(a: &Matrix, b: &Matrix) -> (Matrix, f64) {
    let (m, n) = a.shape();
    if n == 0 {
        return (Matrix::zeros(0, b.cols()), b.norm());
    }
    let rows = m.max(n);
    let mut padded = DMatrix::zeros(rows, n);
    padded.view_mut((0, 0), (m, n)).copy_from(a.as_dmatrix());
    let mut rhs = DMatrix::zeros(rows, b.cols());
    rhs.view_mut((0, 0), (m, b.cols())).copy_from(b.as_dmatrix());
    let svd = padded.svd(true, true);
    let eps = 1e-12 * svd.singular_values.max().max(f64::MIN_POSITIVE);
    let x = svd.solve(&rhs, eps).expect("both factors computed");
    let x = Matrix::from_dmatrix(x);
    let resid = (a * &x - b).norm();
    (x, resid)
}

/// Eigenvalues of the symmetric part of `p`, ascending, with eigenvectors as
/// matching columns.
pub fn symmetric_eigen(p: &Matrix) -> (Vec<f64>, Matrix) {
    let eig = SymmetricEigen::new(p.sym().into_dmatrix());
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let n = p.rows();
    let vectors = Matrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, idx[c])]);
    (values, vectors)
}

/// Columns of `a` stacked into one vector.
pub fn flatten(a: &Matrix) -> Vec<f64> {
    a.as_col_slice().to_vec()
}

/// Matrix whose columns are the flattened inputs.
pub fn columns_of(ms: &[Matrix]) -> Matrix {
    let len = ms.first().map(|m| m.rows() * m.cols()).unwrap_or(0);
    Matrix::from_fn(len, ms.len(), |r, c| ms[c].as_col_slice()[r])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_of_rank_one() {
        let a = Matrix::from_rows(&[[1.0, 1.0, 0.0]]);
        let ns = null_space(&a, 1e-10);
        assert_eq!(ns.len(), 2);
        for v in ns {
            assert!((v[0] + v[1]).abs() < 1e-14);
        }
        assert_eq!(rank(&a, 1e-10), 1);
    }

    #[test]
    fn least_squares_exact_and_inconsistent() {
        let a = Matrix::from_rows(&[[1.0, 0.0], [0.0, 2.0], [0.0, 0.0]]);
        let (x, r) = least_squares(&a, &Matrix::column(&[1.0, 4.0, 0.0]));
        assert!(x.distance(&Matrix::column(&[1.0, 2.0])).unwrap() < 1e-14);
        assert!(r < 1e-14);
        let (_, r) = least_squares(&a, &Matrix::column(&[1.0, 4.0, 3.0]));
        assert!((r - 3.0).abs() < 1e-14);
    }

    #[test]
    fn eigen_sorted() {
        let (vals, vecs) = symmetric_eigen(&Matrix::diagonal(&[3.0, -1.0, 2.0]));
        assert_eq!(vals, vec![-1.0, 2.0, 3.0]);
        assert!((vecs[(1, 0)].abs() - 1.0).abs() < 1e-15);
    }
}
