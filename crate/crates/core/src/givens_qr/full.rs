use super::{rank_tolerance, GivensRotation};
use crate::dense::Matrix;
use crate::error::{Error, Result};

/// `A = QR` for a full-column-rank `A` (m×n, m ≥ n) with `Q` stored explicitly.
#[derive(Clone, Debug)]
pub struct QrFactor {
    q: Matrix,
    r: Matrix,
    scale: f64,
}

/// Givens QR of a full-column-rank matrix.
///
/// Fails with [`Error::RankDeficient`] when a diagonal entry of `R1` falls under the rank
/// tolerance, which tells the caller to switch to [`qr_rotated`](super::qr_rotated).
pub fn qr_full(a: &Matrix) -> Result<QrFactor> {
    let (m, n) = a.shape();
    if m < n {
        return Err(Error::RankDeficient {
            rank: m,
            expected: n,
        });
    }
    let scale = a.max_abs();
    let tol = rank_tolerance(m, n, scale);
    let mut r = a.clone();
    let mut q = Matrix::identity(m);
    for j in 0..n {
        for i in j + 1..m {
            if let Some(g) = GivensRotation::zeroing_second(j, i, r[(j, j)], r[(i, j)]) {
                g.apply_rows_from(&mut r, j);
                g.apply_cols(&mut q);
                r[(i, j)] = 0.0;
            }
        }
        if r[(j, j)].abs() <= tol {
            return Err(Error::RankDeficient {
                rank: j,
                expected: n,
            });
        }
        if r[(j, j)] < 0.0 {
            for v in &mut r.row_mut(j)[j..] {
                *v = -*v;
            }
            q.negate_col(j);
        }
    }
    Ok(QrFactor { q, r, scale })
}

impl QrFactor {
    pub fn rows(&self) -> usize {
        self.r.rows()
    }

    pub fn cols(&self) -> usize {
        self.r.cols()
    }

    pub fn q(&self) -> &Matrix {
        &self.q
    }

    pub fn r(&self) -> &Matrix {
        &self.r
    }

    pub fn reconstruct(&self) -> Matrix {
        self.q.matmul(&self.r)
    }

    /// Unique least-squares solution of `min ‖b − Ax‖`: form `Q₁ᵀb`, then back-solve `R1`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (m, n) = (self.rows(), self.cols());
        assert_eq!(b.len(), m, "right-hand side length");
        let mut x = vec![0.0; n];
        for (r, &br) in b.iter().enumerate() {
            if br == 0.0 {
                continue;
            }
            for (xi, &qv) in x.iter_mut().zip(&self.q.row(r)[..n]) {
                *xi += qv * br;
            }
        }
        back_solve_upper(&self.r, 0, &mut x);
        x
    }

    /// Solves `AᵀA x = rhs` with `AᵀA = R1ᵀR1`.
    pub fn solve_normal(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.cols();
        assert_eq!(rhs.len(), n);
        let mut x = rhs.to_vec();
        for i in 0..n {
            let mut s = x[i];
            for k in 0..i {
                s -= self.r[(k, i)] * x[k];
            }
            x[i] = s / self.r[(i, i)];
        }
        back_solve_upper(&self.r, 0, &mut x);
        x
    }

    /// Inserts `w` so that it becomes row `pos` of the factored matrix.
    pub fn add_row(&mut self, pos: usize, w: &[f64]) -> Result<()> {
        let (m, n) = (self.rows(), self.cols());
        if w.len() != n || pos > m {
            return Err(Error::dim(format!(
                "add_row: row of length {} at {pos} into {m}x{n}",
                w.len()
            )));
        }
        self.scale = self
            .scale
            .max(w.iter().fold(0.0_f64, |a, v| a.max(v.abs())));
        self.q.insert_row(pos, &vec![0.0; m]);
        let mut e = vec![0.0; m + 1];
        e[pos] = 1.0;
        self.q.insert_col(0, &e);
        self.r.insert_row(0, w);
        for k in 0..n {
            if let Some(g) =
                GivensRotation::zeroing_second(k, k + 1, self.r[(k, k)], self.r[(k + 1, k)])
            {
                g.apply_rows_from(&mut self.r, k);
                g.apply_cols(&mut self.q);
                self.r[(k + 1, k)] = 0.0;
            }
        }
        Ok(())
    }

    /// Deletes row `pos`. Fails (leaving the factor untouched) if the rank would drop.
    pub fn remove_row(&mut self, pos: usize) -> Result<()> {
        let (m, n) = (self.rows(), self.cols());
        if pos >= m {
            return Err(Error::dim(format!("remove_row: {pos} out of {m} rows")));
        }
        if m - 1 < n {
            return Err(Error::RankDeficient {
                rank: m - 1,
                expected: n,
            });
        }
        let mut q = self.q.clone();
        let mut r = self.r.clone();
        for k in (1..m).rev() {
            if let Some(g) = GivensRotation::zeroing_second(k - 1, k, q[(pos, k - 1)], q[(pos, k)])
            {
                g.apply_cols(&mut q);
                if k <= n {
                    g.apply_rows(&mut r);
                }
                q[(pos, k)] = 0.0;
            }
        }
        q.remove_row(pos);
        q.remove_col(0);
        r.remove_row(0);
        let tol = rank_tolerance(m - 1, n, self.scale);
        for j in 0..n {
            if r[(j, j)].abs() <= tol {
                return Err(Error::RankDeficient {
                    rank: j,
                    expected: n,
                });
            }
        }
        self.q = q;
        self.r = r;
        Ok(())
    }

    /// Inserts column `a_col` at position `pos`. Fails (leaving the factor untouched) if the
    /// column lies in the span of the existing ones.
    pub fn add_col(&mut self, pos: usize, a_col: &[f64]) -> Result<()> {
        let (m, n) = (self.rows(), self.cols());
        if a_col.len() != m || pos > n {
            return Err(Error::dim(format!(
                "add_col: column of length {} at {pos} into {m}x{n}",
                a_col.len()
            )));
        }
        if n + 1 > m {
            return Err(Error::RankDeficient {
                rank: m,
                expected: n + 1,
            });
        }
        let scale = self
            .scale
            .max(a_col.iter().fold(0.0_f64, |a, v| a.max(v.abs())));
        let u = self.q.tr_mul_vec(a_col);
        let mut r = self.r.clone();
        let mut q = self.q.clone();
        r.insert_col(pos, &u);
        for i in (pos + 1..m).rev() {
            if let Some(g) = GivensRotation::zeroing_second(i - 1, i, r[(i - 1, pos)], r[(i, pos)])
            {
                g.apply_rows_from(&mut r, pos);
                g.apply_cols(&mut q);
                r[(i, pos)] = 0.0;
            }
        }
        if r[(pos, pos)].abs() <= rank_tolerance(m, n + 1, scale) {
            return Err(Error::RankDeficient {
                rank: n,
                expected: n + 1,
            });
        }
        self.q = q;
        self.r = r;
        self.scale = scale;
        Ok(())
    }

    /// Deletes column `pos`; always succeeds for a full-rank factor.
    pub fn remove_col(&mut self, pos: usize) -> Result<()> {
        let n = self.cols();
        if pos >= n {
            return Err(Error::dim(format!("remove_col: {pos} out of {n} columns")));
        }
        self.r.remove_col(pos);
        for c in pos..n - 1 {
            if let Some(g) =
                GivensRotation::zeroing_second(c, c + 1, self.r[(c, c)], self.r[(c + 1, c)])
            {
                g.apply_rows_from(&mut self.r, c);
                g.apply_cols(&mut self.q);
                self.r[(c + 1, c)] = 0.0;
            }
        }
        Ok(())
    }
}

/// Back-solves the upper-triangular block `R[0..k, off..off+k]` in place, with `k = x.len()`.
pub(crate) fn back_solve_upper(r: &Matrix, off: usize, x: &mut [f64]) {
    let k = x.len();
    for i in (0..k).rev() {
        let row = r.row(i);
        let mut s = x[i];
        for j in i + 1..k {
            s -= row[off + j] * x[j];
        }
        x[i] = s / row[off + i];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_support::{max_diff, oracle_min_norm, random_matrix};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn check(f: &QrFactor, a: &Matrix) {
        let m = f.rows();
        let qtq = f.q().transpose().matmul(f.q());
        assert!(qtq.max_abs_diff(&Matrix::identity(m)) <= 1e-10 * m as f64);
        assert!(f.reconstruct().max_abs_diff(a) <= 1e-10 * a.max_abs());
        for i in 0..m {
            for j in 0..f.cols().min(i) {
                assert_eq!(f.r()[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn identity_and_single_column() {
        let f = qr_full(&Matrix::identity(2)).unwrap();
        assert_eq!(f.q(), &Matrix::identity(2));
        assert_eq!(f.r(), &Matrix::identity(2));
        let a = Matrix::from_rows(&[vec![3.0], vec![4.0]], 1);
        let f = qr_full(&a).unwrap();
        assert!((f.r()[(0, 0)] - 5.0).abs() < 1e-14);
        assert!((f.q()[(0, 0)] - 0.6).abs() < 1e-14 && (f.q()[(1, 0)] - 0.8).abs() < 1e-14);
    }

    #[test]
    fn transposed_first_difference_diagonal() {
        let a = Matrix::from_rows(&[vec![-1.0, 0.0], vec![1.0, -1.0], vec![0.0, 1.0]], 2);
        let f = qr_full(&a).unwrap();
        check(&f, &a);
        // Gram-Schmidt by hand: ‖(−1,1,0)‖ = √2, residual of (0,−1,1) is (−1/2,−1/2,1).
        assert!((f.r()[(0, 0)] - 2f64.sqrt()).abs() < 1e-14);
        assert!((f.r()[(1, 1)] - 1.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn rank_deficiency_is_reported() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0], vec![0.0, 0.0]], 2);
        assert!(matches!(
            qr_full(&a),
            Err(Error::RankDeficient {
                rank: 1,
                expected: 2
            })
        ));
        assert!(qr_full(&Matrix::zeros(1, 2)).is_err());
    }

    #[test]
    fn unique_solutions() {
        let f = qr_full(&Matrix::identity(3)).unwrap();
        assert!(max_diff(&f.solve(&[1.0, -2.0, 5.0]), &[1.0, -2.0, 5.0]) < 1e-15);
        let f = qr_full(&Matrix::from_rows(&[vec![1.0], vec![1.0]], 1)).unwrap();
        assert!((f.solve(&[1.0, 3.0])[0] - 2.0).abs() < 1e-14);
        let a = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]], 2);
        let f = qr_full(&a).unwrap();
        assert!(max_diff(&f.solve(&[1.0, 1.0, 2.0]), &[1.0, 1.0]) < 1e-14);
        let x = f.solve_normal(&a.tr_mul_vec(&[1.0, 1.0, 2.0]));
        assert!(max_diff(&x, &[1.0, 1.0]) < 1e-13);
    }

    #[test]
    fn updates_match_fresh_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut a = random_matrix(&mut rng, 9, 4);
        let mut f = qr_full(&a).unwrap();
        for step in 0..30 {
            match step % 4 {
                0 if a.cols() < 7 => {
                    let c: Vec<f64> = (0..a.rows()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let pos = rng.gen_range(0..=a.cols());
                    f.add_col(pos, &c).unwrap();
                    a.insert_col(pos, &c);
                }
                1 if a.cols() > 1 => {
                    let pos = rng.gen_range(0..a.cols());
                    f.remove_col(pos).unwrap();
                    a.remove_col(pos);
                }
                2 => {
                    let w: Vec<f64> = (0..a.cols()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let pos = rng.gen_range(0..=a.rows());
                    f.add_row(pos, &w).unwrap();
                    a.insert_row(pos, &w);
                }
                _ if a.rows() > a.cols() + 1 => {
                    let pos = rng.gen_range(0..a.rows());
                    f.remove_row(pos).unwrap();
                    a.remove_row(pos);
                }
                _ => {}
            }
            check(&f, &a);
            let b: Vec<f64> = (0..a.rows()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            assert!(max_diff(&f.solve(&b), &oracle_min_norm(&a, &b)) <= 1e-10);
        }
    }

    #[test]
    fn dependent_updates_leave_factor_intact() {
        let a = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]], 2);
        let mut f = qr_full(&a).unwrap();
        assert!(f.add_col(2, &[1.0, 1.0, 0.0]).is_err());
        check(&f, &a);
        assert!(f.remove_row(1).is_err());
        check(&f, &a);
    }
}
