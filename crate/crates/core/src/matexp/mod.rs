//! Dense small-matrix kernels.
//!
//! The hat map follows the cross-product convention `hat(v)·w = v × w`.

mod expm;
mod linalg;
mod matrix;

use nalgebra::SymmetricEigen;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub use expm::{cayley, expm};
pub use linalg::{columns_of, flatten, least_squares, null_space, orthonormal_range, rank, symmetric_eigen};
pub use matrix::Matrix;

/// Absolute Frobenius tolerance for algebra membership tags.
pub const TAG_TOLERANCE: f64 = 1e-12;

/// Lie bracket `ab − ba`.
pub fn commutator(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if !a.is_square() || a.shape() != b.shape() {
        return Err(Error::Shape(format!(
            "commutator of {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(a * b - b * a)
}

/// Bracket for internal use where shapes are known to agree.
pub(crate) fn bracket(a: &Matrix, b: &Matrix) -> Matrix {
    a * b - b * a
}

pub fn hat(v: &[f64; 3]) -> Matrix {
    Matrix::from_rows(&[[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])
}

pub fn vee(m: &Matrix) -> Result<[f64; 3]> {
    if m.shape() != (3, 3) {
        return Err(Error::Shape(format!("vee of {}x{} matrix", m.rows(), m.cols())));
    }
    let defect = (m + &m.transpose()).norm();
    if defect > TAG_TOLERANCE {
        return Err(Error::NotInSet {
            what: "vee input".into(),
            expected: "skew-symmetric",
            defect,
        });
    }
    Ok([m[(2, 1)], m[(0, 2)], m[(1, 0)]])
}

/// Unique symmetric solution `ξ` of `pξ + ξp = rhs` for symmetric positive
/// definite `p`, computed in the eigenbasis of `p`.
pub fn solve_sylvester_spd(p: &Matrix, rhs: &Matrix) -> Result<Matrix> {
    if !p.is_square() || p.shape() != rhs.shape() {
        return Err(Error::Shape(format!(
            "sylvester with {}x{} and {}x{}",
            p.rows(),
            p.cols(),
            rhs.rows(),
            rhs.cols()
        )));
    }
    let scale = p.norm().max(1.0);
    let asym = (p - &p.transpose()).norm();
    if asym > 1e-10 * scale {
        return Err(Error::NotInSet {
            what: "sylvester coefficient".into(),
            expected: "symmetric",
            defect: asym,
        });
    }
    let rhs_asym = (rhs - &rhs.transpose()).norm();
    if rhs_asym > 1e-10 * rhs.norm().max(1.0) {
        return Err(Error::NotInSet {
            what: "sylvester right-hand side".into(),
            expected: "symmetric",
            defect: rhs_asym,
        });
    }
    let eig = SymmetricEigen::new(p.sym().into_dmatrix());
    let min = eig.eigenvalues.min();
    if min <= 1e-12 * scale {
        return Err(Error::NotInSet {
            what: "sylvester coefficient".into(),
            expected: "positive definite",
            defect: min,
        });
    }
    let v = Matrix::from_dmatrix(eig.eigenvectors.clone());
    let lam = &eig.eigenvalues;
    let rhs_eig = &(&v.transpose() * &rhs.sym()) * &v;
    let n = p.rows();
    let xi_eig = Matrix::from_fn(n, n, |i, j| rhs_eig[(i, j)] / (lam[i] + lam[j]));
    Ok((&(&v * &xi_eig) * &v.transpose()).sym())
}

/// Seeded Gaussian matrix.
pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Deterministic element of SO(d): QR of a seeded Gaussian matrix with the
/// signs of R's diagonal absorbed, then one column flipped if needed to make
/// the determinant +1.
pub fn random_special_orthogonal(d: usize, seed: u64) -> Matrix {
    let mut rng = seeded_rng(seed);
    special_orthogonal_from_rng(d, &mut rng)
}

pub(crate) fn special_orthogonal_from_rng(d: usize, rng: &mut ChaCha8Rng) -> Matrix {
    assert!(d >= 1, "SO(d) needs d >= 1");
    if d == 1 {
        return Matrix::identity(1);
    }
    let g = gaussian_matrix(d, d, rng).into_dmatrix();
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    Matrix::from_dmatrix(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn kron_sylvester_oracle(p: &Matrix, rhs: &Matrix) -> Matrix {
        // vec(Pξ + ξP) = (I⊗P + Pᵀ⊗I) vec(ξ), column-major vec.
        let n = p.rows();
        let big = Matrix::from_fn(n * n, n * n, |r, c| {
            let (i, j) = (r % n, r / n);
            let (k, l) = (c % n, c / n);
            let mut v = 0.0;
            if j == l {
                v += p[(i, k)];
            }
            if i == k {
                v += p[(l, j)];
            }
            v
        });
        let b = Matrix::column(rhs.as_col_slice());
        let x = big.solve(&b).unwrap();
        Matrix::from_fn(n, n, |i, j| x[(i + j * n, 0)])
    }

    #[test]
    fn commutator_examples() {
        let j = Matrix::from_rows(&[[0.0, -1.0], [1.0, 0.0]]);
        assert_eq!(commutator(&j, &Matrix::identity(2)).unwrap(), Matrix::zeros(2, 2));
        let e12 = Matrix::unit(2, 2, 0, 1);
        let e21 = Matrix::unit(2, 2, 1, 0);
        assert_eq!(commutator(&e12, &e21).unwrap(), Matrix::diagonal(&[1.0, -1.0]));
        let c = commutator(&hat(&[1.0, 0.0, 0.0]), &hat(&[0.0, 1.0, 0.0])).unwrap();
        assert_eq!(c, hat(&[0.0, 0.0, 1.0]));
        assert!(commutator(&j, &Matrix::identity(3)).is_err());
    }

    #[test]
    fn hat_examples() {
        let h = hat(&[0.0, 0.0, 1.0]);
        assert_eq!(h, Matrix::from_rows(&[[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]));
        // hat(v)·e1 = v × e1 = (0, 1, 0)
        let e1 = Matrix::column(&[1.0, 0.0, 0.0]);
        assert_eq!((&h * &e1).to_row_major(), vec![0.0, 1.0, 0.0]);
        assert_eq!(vee(&hat(&[1.0, 2.0, 3.0])).unwrap(), [1.0, 2.0, 3.0]);
        assert_eq!(hat(&[0.0; 3]), Matrix::zeros(3, 3));
        assert!(matches!(vee(&Matrix::identity(3)), Err(Error::NotInSet { .. })));
    }

    #[test]
    fn sylvester_examples() {
        let s = Matrix::from_rows(&[[1.0, 2.0], [2.0, -3.0]]);
        let xi = solve_sylvester_spd(&Matrix::identity(2), &s).unwrap();
        assert!(xi.distance(&s.scale(0.5)).unwrap() < 1e-15);

        let xi = solve_sylvester_spd(&Matrix::diagonal(&[1.0, 3.0]), &Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]])).unwrap();
        let expected = Matrix::from_rows(&[[0.0, 0.25], [0.25, 0.0]]);
        assert!(xi.distance(&expected).unwrap() < 1e-15);

        let xi = solve_sylvester_spd(&Matrix::diagonal(&[2.0, 2.0]), &Matrix::diagonal(&[4.0, 8.0])).unwrap();
        assert!(xi.distance(&Matrix::diagonal(&[1.0, 2.0])).unwrap() < 1e-15);
    }

    #[test]
    fn sylvester_rejects_indefinite() {
        let p = Matrix::diagonal(&[1.0, -1.0]);
        assert!(matches!(
            solve_sylvester_spd(&p, &Matrix::identity(2)),
            Err(Error::NotInSet { expected: "positive definite", .. })
        ));
    }

    #[test]
    fn sylvester_matches_kronecker_oracle() {
        let mut rng = seeded_rng(11);
        for n in 1..=6 {
            let a = gaussian_matrix(n, n, &mut rng);
            let p = &(&a * &a.transpose()) + &Matrix::identity(n).scale(0.5);
            let rhs = gaussian_matrix(n, n, &mut rng).sym();
            let xi = solve_sylvester_spd(&p, &rhs).unwrap();
            let oracle = kron_sylvester_oracle(&p, &rhs);
            assert!(xi.distance(&oracle).unwrap() < 1e-11 * oracle.norm().max(1.0), "n={n}");
            let residual = (&(&p * &xi) + &(&xi * &p) - &rhs).norm();
            assert!(residual <= 1e-11 * rhs.norm(), "n={n}: residual {residual:e}");
        }
    }

    #[test]
    fn special_orthogonal_samples() {
        assert_eq!(random_special_orthogonal(1, 4), Matrix::identity(1));
        let r = random_special_orthogonal(3, 0);
        assert!((&(&r.transpose() * &r) - &Matrix::identity(3)).norm() <= 1e-12);
        assert!((r.determinant() - 1.0).abs() < 1e-12);
        assert_eq!(random_special_orthogonal(5, 9), random_special_orthogonal(5, 9));
        assert_ne!(random_special_orthogonal(5, 9), random_special_orthogonal(5, 10));
    }

    fn small_matrix(n: usize, bound: f64) -> impl Strategy<Value = Matrix> {
        proptest::collection::vec(-1.0..1.0f64, n * n).prop_map(move |v| {
            let m = Matrix::from_row_slice(n, n, &v).unwrap();
            let norm = m.norm();
            if norm > 0.0 {
                m.scale(bound * v[0].abs() / norm)
            } else {
                m
            }
        })
    }

    proptest! {
        #[test]
        fn expm_inverse_pair(xi in (1usize..6).prop_flat_map(|n| small_matrix(n, 5.0))) {
            let n = xi.rows();
            let prod = &expm(&xi).unwrap() * &expm(&-&xi).unwrap();
            prop_assert!(prod.distance(&Matrix::identity(n)).unwrap() <= 1e-12 * expm(&xi).unwrap().norm().max(1.0).powi(2));
        }

        #[test]
        fn expm_of_skew_is_orthogonal(xi in (1usize..9).prop_flat_map(|n| small_matrix(n, 5.0))) {
            let n = xi.rows();
            let r = expm(&xi.skew()).unwrap();
            prop_assert!((&r.transpose() * &r).distance(&Matrix::identity(n)).unwrap() <= 1e-12);
        }

        #[test]
        fn expm_of_traceless_has_unit_determinant(xi in (1usize..9).prop_flat_map(|n| small_matrix(n, 2.0))) {
            let n = xi.rows();
            let t = &xi - &Matrix::identity(n).scale(xi.trace() / n as f64);
            let det = expm(&t).unwrap().determinant();
            prop_assert!((det - 1.0).abs() <= 1e-10);
        }

        #[test]
        fn cayley_is_odd_inverse(xi in (1usize..6).prop_flat_map(|n| small_matrix(n, 1.0))) {
            let n = xi.rows();
            let prod = &cayley(&xi).unwrap() * &cayley(&-&xi).unwrap();
            prop_assert!(prod.distance(&Matrix::identity(n)).unwrap() <= 1e-12);
            let r = cayley(&xi.skew()).unwrap();
            prop_assert!((&r.transpose() * &r).distance(&Matrix::identity(n)).unwrap() <= 1e-12);
        }

        #[test]
        fn vee_inverts_hat(v in proptest::array::uniform3(-1e3..1e3f64)) {
            let back = vee(&hat(&v)).unwrap();
            for k in 0..3 {
                prop_assert!((back[k] - v[k]).abs() <= 1e-15 * v[k].abs().max(1.0));
            }
        }
    }
}
