//! Oracles shared by unit tests: SVD-based rank and pseudoinverse solutions.

use crate::dense::Matrix;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

pub fn to_na(a: &Matrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(a.rows(), a.cols(), a.as_slice())
}

fn oracle_tol(a: &Matrix) -> f64 {
    1e-11 * a.rows().max(a.cols()).max(1) as f64 * a.max_abs()
}

pub fn oracle_rank(a: &Matrix) -> usize {
    if a.rows() == 0 || a.cols() == 0 {
        return 0;
    }
    let tol = oracle_tol(a).max(1e-12 * a.max_abs());
    to_na(a)
        .singular_values()
        .iter()
        .filter(|&&s| s > tol * 10.0)
        .count()
}

/// `A⁺b` through a truncated SVD.
///
/// nalgebra's SVD sometimes returns factors that do not reproduce `A` when a singular value is
/// exactly zero. Then the row space comes from a symmetric eigensolve of `AᵀA` instead, and
/// the solution from a QR least-squares solve in that basis.
pub fn oracle_min_norm(a: &Matrix, b: &[f64]) -> Vec<f64> {
    if a.rows() == 0 || a.cols() == 0 {
        return vec![0.0; a.cols()];
    }
    let na = to_na(a);
    let rhs = DVector::from_column_slice(b);
    let svd = na.clone().svd(true, true);
    let (u, vt) = (svd.u.as_ref().unwrap(), svd.v_t.as_ref().unwrap());
    let rebuilt = u * DMatrix::from_diagonal(&svd.singular_values) * vt;
    if (rebuilt - &na).amax() <= 1e-12 * a.rows().max(a.cols()) as f64 * a.max_abs() {
        let x = svd.solve(&rhs, oracle_tol(a) * 10.0).unwrap();
        return x.iter().copied().collect();
    }
    let eig = (na.transpose() * &na).symmetric_eigen();
    let top = eig.eigenvalues.amax();
    let keep: Vec<_> = (0..a.cols())
        .filter(|&j| eig.eigenvalues[j] > 1e-12 * top)
        .map(|j| eig.eigenvectors.column(j))
        .collect();
    if keep.is_empty() {
        return vec![0.0; a.cols()];
    }
    let basis = DMatrix::from_columns(&keep);
    let qr = (&na * &basis).qr();
    let z = qr
        .r()
        .solve_upper_triangular(&(qr.q().transpose() * rhs))
        .unwrap();
    (basis * z).iter().copied().collect()
}

pub fn random_matrix<R: Rng>(rng: &mut R, m: usize, n: usize) -> Matrix {
    let data: Vec<f64> = (0..m * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Matrix::from_row_slice(m, n, &data)
}

pub fn low_rank<R: Rng>(rng: &mut R, m: usize, n: usize, k: usize) -> Matrix {
    random_matrix(rng, m, k).matmul(&random_matrix(rng, k, n))
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}
