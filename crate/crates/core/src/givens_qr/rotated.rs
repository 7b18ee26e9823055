use super::{back_solve_upper, rank_tolerance, GivensRotation};
use crate::dense::{norm2, Matrix};
use crate::error::{Error, Result};

/// Column-pivoted QR `AP = QR` with `R = [R1 R2; 0 0]` and `R1` k×k upper triangular.
#[derive(Clone, Debug)]
pub struct PivotedQr {
    q: Matrix,
    r: Matrix,
    perm: Vec<usize>,
    rank: usize,
    scale: f64,
}

/// Greedy max-norm column pivoting; stops once every remaining column norm is under tolerance.
pub fn qr_pivoted(a: &Matrix) -> PivotedQr {
    let (m, n) = a.shape();
    let scale = a.max_abs();
    let tol = rank_tolerance(m, n, scale);
    let mut r = a.clone();
    let mut q = Matrix::identity(m);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut rank = 0;
    for j in 0..m.min(n) {
        let mut best = (j, -1.0);
        for c in j..n {
            let s: f64 = (j..m).map(|i| r[(i, c)] * r[(i, c)]).sum();
            if s > best.1 {
                best = (c, s);
            }
        }
        if best.1.sqrt() <= tol {
            break;
        }
        if best.0 != j {
            swap_cols(&mut r, j, best.0);
            perm.swap(j, best.0);
        }
        for i in j + 1..m {
            if let Some(g) = GivensRotation::zeroing_second(j, i, r[(j, j)], r[(i, j)]) {
                g.apply_rows_from(&mut r, j);
                g.apply_cols(&mut q);
                r[(i, j)] = 0.0;
            }
        }
        if r[(j, j)] < 0.0 {
            r.negate_row(j);
            q.negate_col(j);
        }
        rank = j + 1;
    }
    // The trailing block sits under the tolerance; drop it so R has the stated block form.
    for i in rank..m {
        r.row_mut(i).fill(0.0);
    }
    PivotedQr {
        q,
        r,
        perm,
        rank,
        scale,
    }
}

fn swap_cols(m: &mut Matrix, a: usize, b: usize) {
    for i in 0..m.rows() {
        let row = m.row_mut(i);
        row.swap(a, b);
    }
}

impl PivotedQr {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// Basic solution: the free block of `Pᵀx` is set to zero and `R1` is back-solved.
    pub fn solve_basic(&self, b: &[f64]) -> Vec<f64> {
        let n = self.r.cols();
        let k = self.rank;
        let mut z = self.q.tr_mul_vec(b);
        z.truncate(k);
        back_solve_upper(&self.r, 0, &mut z);
        let mut x = vec![0.0; n];
        for (j, &v) in z.iter().enumerate() {
            x[self.perm[j]] = v;
        }
        x
    }

    /// Rotates `[R1 R2]` from the right into `[0 R1']`, accumulating the rotations in `G`.
    pub fn into_rotated(self) -> RotatedQr {
        let PivotedQr {
            mut q,
            mut r,
            perm,
            rank: k,
            scale,
        } = self;
        let n = r.cols();
        let mut g = Matrix::identity(n);
        for i in (0..k).rev() {
            let t = n - k + i;
            for j in i..t {
                if let Some(rot) = GivensRotation::zeroing_first(j, t, r[(i, j)], r[(i, t)]) {
                    rot.apply_cols_rows(&mut r, 0, i + 1);
                    rot.apply_cols(&mut g);
                    r[(i, j)] = 0.0;
                }
            }
        }
        for i in 0..k {
            if r[(i, n - k + i)] < 0.0 {
                r.negate_row(i);
                q.negate_col(i);
            }
        }
        RotatedQr {
            q,
            r,
            perm,
            g,
            rank: k,
            scale,
            transposed: false,
        }
    }
}

/// Rotated QR `MPG = QR` with `R = [0 R1; 0 0]`, `R1` k×k upper triangular in the top-right
/// corner. When `transposed` is set the factored matrix is `A = Mᵀ`.
#[derive(Clone, Debug)]
pub struct RotatedQr {
    q: Matrix,
    r: Matrix,
    perm: Vec<usize>,
    g: Matrix,
    rank: usize,
    scale: f64,
    transposed: bool,
}

pub fn qr_rotated(a: &Matrix) -> RotatedQr {
    qr_pivoted(a).into_rotated()
}

/// Factors `aᵀ` and marks the factor as transposed, so solves and column updates refer to `a`.
pub fn qr_rotated_transposed(a: &Matrix) -> RotatedQr {
    let mut f = qr_rotated(&a.transpose());
    f.transposed = true;
    f
}

impl RotatedQr {
    /// Rows of the stored matrix `M`.
    pub fn rows(&self) -> usize {
        self.r.rows()
    }

    /// Columns of the stored matrix `M`.
    pub fn cols(&self) -> usize {
        self.r.cols()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_transposed(&self) -> bool {
        self.transposed
    }

    pub fn q(&self) -> &Matrix {
        &self.q
    }

    pub fn r(&self) -> &Matrix {
        &self.r
    }

    pub fn g(&self) -> &Matrix {
        &self.g
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn tolerance(&self) -> f64 {
        rank_tolerance(self.rows(), self.cols(), self.scale)
    }

    /// `QRGᵀPᵀ`, i.e. the stored matrix `M` (not `A` when transposed).
    pub fn reconstruct(&self) -> Matrix {
        let t = self.q.matmul(&self.r).matmul(&self.g.transpose());
        let mut out = Matrix::zeros(self.rows(), self.cols());
        for i in 0..self.rows() {
            for (j, &p) in self.perm.iter().enumerate() {
                out[(i, p)] = t[(i, j)];
            }
        }
        out
    }

    fn to_rotated_coords(&self, w: &[f64]) -> Vec<f64> {
        let pw: Vec<f64> = self.perm.iter().map(|&p| w[p]).collect();
        self.g.tr_mul_vec(&pw)
    }

    fn from_rotated_coords(&self, z: &[f64]) -> Vec<f64> {
        let t = self.g.mul_vec(z);
        let mut x = vec![0.0; t.len()];
        for (j, &p) in self.perm.iter().enumerate() {
            x[p] = t[j];
        }
        x
    }

    /// Minimum-norm minimizer of `‖b − Ax‖` where `A` is `M`, or `Mᵀ` for a transposed factor.
    pub fn solve_min_norm(&self, b: &[f64]) -> Vec<f64> {
        let (m, n, k) = (self.rows(), self.cols(), self.rank);
        if !self.transposed {
            assert_eq!(b.len(), m, "right-hand side length");
            let mut c = vec![0.0; k];
            for (r, &br) in b.iter().enumerate() {
                if br == 0.0 {
                    continue;
                }
                for (ci, &qv) in c.iter_mut().zip(&self.q.row(r)[..k]) {
                    *ci += qv * br;
                }
            }
            back_solve_upper(&self.r, n - k, &mut c);
            let mut z = vec![0.0; n];
            z[n - k..].copy_from_slice(&c);
            self.from_rotated_coords(&z)
        } else {
            assert_eq!(b.len(), n, "right-hand side length");
            let c = self.to_rotated_coords(b);
            let off = n - k;
            let mut z = c[off..].to_vec();
            for i in 0..k {
                let mut s = z[i];
                for j in 0..i {
                    s -= self.r[(j, off + i)] * z[j];
                }
                z[i] = s / self.r[(i, off + i)];
            }
            let mut x = vec![0.0; m];
            for (r, xr) in x.iter_mut().enumerate() {
                *xr = self.q.row(r)[..k].iter().zip(&z).map(|(a, b)| a * b).sum();
            }
            x
        }
    }

    /// Inserts `w` as row `pos` of the stored matrix.
    pub fn add_row(&mut self, pos: usize, w: &[f64]) -> Result<()> {
        let (m, n, k) = (self.rows(), self.cols(), self.rank);
        if w.len() != n || pos > m {
            return Err(Error::dim(format!(
                "add_row: row of length {} at {pos} into {m}x{n}",
                w.len()
            )));
        }
        self.scale = self
            .scale
            .max(w.iter().fold(0.0_f64, |a, v| a.max(v.abs())));
        let d = self.to_rotated_coords(w);
        self.q.insert_row(pos, &vec![0.0; m]);
        let mut e = vec![0.0; m + 1];
        e[pos] = 1.0;
        self.q.insert_col(0, &e);
        self.r.insert_row(0, &d);
        let tol = self.tolerance();
        let off = n - k;
        if norm2(&d[..off]) <= tol {
            self.r.row_mut(0)[..off].fill(0.0);
            for i in 0..k {
                let t = off + i;
                if let Some(g) =
                    GivensRotation::zeroing_second(i, i + 1, self.r[(i, t)], self.r[(i + 1, t)])
                {
                    g.apply_rows_from(&mut self.r, t);
                    g.apply_cols(&mut self.q);
                    self.r[(i + 1, t)] = 0.0;
                }
            }
        } else {
            let t = off - 1;
            for j in 0..t {
                if let Some(g) = GivensRotation::zeroing_first(j, t, self.r[(0, j)], self.r[(0, t)])
                {
                    g.apply_cols_rows(&mut self.r, 0, 1);
                    g.apply_cols(&mut self.g);
                    self.r[(0, j)] = 0.0;
                }
            }
            self.rank = k + 1;
        }
        Ok(())
    }

    /// Deletes row `pos` of the stored matrix, restoring the block form if the rank drops.
    pub fn remove_row(&mut self, pos: usize) -> Result<()> {
        let (m, n, k) = (self.rows(), self.cols(), self.rank);
        if pos >= m {
            return Err(Error::dim(format!("remove_row: {pos} out of {m} rows")));
        }
        let off = n - k;
        for j in (1..m).rev() {
            if let Some(g) =
                GivensRotation::zeroing_second(j - 1, j, self.q[(pos, j - 1)], self.q[(pos, j)])
            {
                g.apply_cols(&mut self.q);
                if j <= k {
                    g.apply_rows_from(&mut self.r, off);
                }
                self.q[(pos, j)] = 0.0;
            }
        }
        self.q.remove_row(pos);
        self.q.remove_col(0);
        self.r.remove_row(0);
        while let Some(q) = self.dropped_diagonal() {
            self.repair_rank(q);
        }
        Ok(())
    }

    /// Position of a zero diagonal in `R1` after a removal, if any.
    fn dropped_diagonal(&self) -> Option<usize> {
        let (m, n, k) = (self.rows(), self.cols(), self.rank);
        if k == 0 {
            return None;
        }
        if m < k {
            return Some(k - 1);
        }
        let tol = self.tolerance();
        let off = n - k;
        (0..k)
            .map(|i| (i, self.r[(i, off + i)].abs()))
            .filter(|&(_, v)| v <= tol)
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
    }

    /// Re-triangularizes `R1` around a zero diagonal at local position `q` and shrinks the rank.
    fn repair_rank(&mut self, q: usize) {
        let (m, n, k) = (self.rows(), self.cols(), self.rank);
        let off = n - k;
        if q < m {
            self.r[(q, off + q)] = 0.0;
        }
        for i in q..k.saturating_sub(1) {
            if i + 1 >= m {
                break;
            }
            let t = off + i + 1;
            if let Some(g) =
                GivensRotation::zeroing_second(i, i + 1, self.r[(i, t)], self.r[(i + 1, t)])
            {
                g.apply_rows_from(&mut self.r, off);
                g.apply_cols(&mut self.q);
                self.r[(i + 1, t)] = 0.0;
            }
        }
        let cq = off + q;
        for j in (0..q).rev() {
            let cj = off + j;
            if let Some(g) =
                GivensRotation::zeroing_second(cj, cq, self.r[(j, cj)], self.r[(j, cq)])
            {
                g.apply_cols_rows(&mut self.r, 0, j + 1);
                g.apply_cols(&mut self.g);
                self.r[(j, cq)] = 0.0;
            }
        }
        self.r.cycle_col_left_to(off, cq);
        self.g.cycle_col_left_to(off, cq);
        if k - 1 < m {
            self.r.row_mut(k - 1).fill(0.0);
        }
        self.rank = k - 1;
    }

    /// Inserts column `col` at position `pos` of `A`; only valid for a transposed factor.
    pub fn add_column(&mut self, pos: usize, col: &[f64]) -> Result<()> {
        self.require_transposed("add_column")?;
        self.add_row(pos, col)
    }

    /// Deletes column `pos` of `A`; only valid for a transposed factor.
    pub fn remove_column(&mut self, pos: usize) -> Result<()> {
        self.require_transposed("remove_column")?;
        self.remove_row(pos)
    }

    fn require_transposed(&self, op: &str) -> Result<()> {
        if self.transposed {
            Ok(())
        } else {
            Err(Error::Contract(format!(
                "{op} needs a factor of the transposed matrix"
            )))
        }
    }
}
