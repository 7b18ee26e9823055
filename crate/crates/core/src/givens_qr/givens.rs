use crate::dense::Matrix;

/// Plane rotation `G(i, j)` acting on coordinates `i < j`.
///
/// The matrix is the identity except for `G_ii = G_jj = c`, `G_ij = s`, `G_ji = -s`.
/// [`apply`](Self::apply) computes `Gᵀx`; row and column variants compute `GᵀM` and `MG`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GivensRotation {
    pub i: usize,
    pub j: usize,
    pub c: f64,
    pub s: f64,
}

/// Parameters `(c, s)` rotating `(a, b)` onto `(√(a²+b²), 0)`.
///
/// Returns `None` for the zero vector: there is nothing to rotate and the caller skips the step.
pub fn givens_for(a: f64, b: f64) -> Option<(f64, f64)> {
    if a == 0.0 && b == 0.0 {
        return None;
    }
    let d = a.hypot(b);
    Some((a / d, -b / d))
}

impl GivensRotation {
    /// Rotation that zeroes component `j` of a vector whose `(i, j)` components are `(xi, xj)`.
    pub fn zeroing_second(i: usize, j: usize, xi: f64, xj: f64) -> Option<Self> {
        debug_assert!(i < j);
        if xj == 0.0 {
            return None;
        }
        givens_for(xi, xj).map(|(c, s)| GivensRotation { i, j, c, s })
    }

    /// Rotation that zeroes component `i` and moves the mass onto `j`.
    pub fn zeroing_first(i: usize, j: usize, xi: f64, xj: f64) -> Option<Self> {
        debug_assert!(i < j);
        if xi == 0.0 {
            return None;
        }
        let d = xi.hypot(xj);
        Some(GivensRotation {
            i,
            j,
            c: xj / d,
            s: xi / d,
        })
    }

    /// Builds the rotation for indices given in either order: `keep` retains the norm, `kill` is zeroed.
    pub fn zeroing(keep: usize, kill: usize, x_keep: f64, x_kill: f64) -> Option<Self> {
        if keep < kill {
            Self::zeroing_second(keep, kill, x_keep, x_kill)
        } else {
            Self::zeroing_first(kill, keep, x_kill, x_keep)
        }
    }

    #[inline]
    fn rotate_pair(&self, xi: f64, xj: f64) -> (f64, f64) {
        (self.c * xi - self.s * xj, self.s * xi + self.c * xj)
    }

    /// `x ← Gᵀx`; only components `i` and `j` change.
    pub fn apply(&self, x: &mut [f64]) {
        let (a, b) = self.rotate_pair(x[self.i], x[self.j]);
        x[self.i] = a;
        x[self.j] = b;
    }

    /// `M ← GᵀM`, touching rows `i` and `j`.
    pub fn apply_rows(&self, m: &mut Matrix) {
        self.apply_rows_from(m, 0);
    }

    /// Same as [`apply_rows`](Self::apply_rows) but skips columns before `start`, which the
    /// caller knows to be zero in both rows.
    pub fn apply_rows_from(&self, m: &mut Matrix, start: usize) {
        let (ri, rj) = m.two_rows_mut(self.i, self.j);
        for (a, b) in ri[start..].iter_mut().zip(rj[start..].iter_mut()) {
            let (x, y) = self.rotate_pair(*a, *b);
            *a = x;
            *b = y;
        }
    }

    /// `M ← MG`, touching columns `i` and `j`.
    pub fn apply_cols(&self, m: &mut Matrix) {
        self.apply_cols_rows(m, 0, m.rows());
    }

    /// Column rotation restricted to rows `lo..hi`.
    pub fn apply_cols_rows(&self, m: &mut Matrix, lo: usize, hi: usize) {
        for r in lo..hi {
            let row = m.row_mut(r);
            let (x, y) = self.rotate_pair(row[self.i], row[self.j]);
            row[self.i] = x;
            row[self.j] = y;
        }
    }

    pub fn to_matrix(&self, n: usize) -> Matrix {
        let mut g = Matrix::identity(n);
        g[(self.i, self.i)] = self.c;
        g[(self.j, self.j)] = self.c;
        g[(self.i, self.j)] = self.s;
        g[(self.j, self.i)] = -self.s;
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rotate(a: f64, b: f64) -> (f64, f64, f64, f64) {
        let (c, s) = givens_for(a, b).unwrap();
        let g = GivensRotation { i: 0, j: 1, c, s };
        let mut x = [a, b];
        g.apply(&mut x);
        (c, s, x[0], x[1])
    }

    #[test]
    fn pythagorean_triple() {
        let (c, s, d, z) = rotate(3.0, 4.0);
        assert!((c - 0.6).abs() < 1e-15 && (s + 0.8).abs() < 1e-15);
        assert!((d - 5.0).abs() < 1e-14 && z.abs() < 1e-15);
    }

    #[test]
    fn identity_case() {
        let (c, s, d, z) = rotate(1.0, 0.0);
        assert_eq!((c, s, d, z), (1.0, 0.0, 1.0, 0.0));
    }

    #[test]
    fn quarter_turn() {
        let (c, s, d, z) = rotate(0.0, 2.0);
        assert_eq!((c, s), (0.0, -1.0));
        assert!((d - 2.0).abs() < 1e-15 && z.abs() < 1e-15);
    }

    #[test]
    fn zero_vector_rejected() {
        assert!(givens_for(0.0, 0.0).is_none());
    }

    #[test]
    fn zeroing_first_moves_mass_up() {
        let g = GivensRotation::zeroing(3, 1, 4.0, 3.0).unwrap();
        let mut x = [0.0, 3.0, 7.0, 4.0];
        g.apply(&mut x);
        assert!(x[1].abs() < 1e-15 && (x[3] - 5.0).abs() < 1e-14 && x[2] == 7.0);
    }

    #[test]
    fn matrix_forms_agree() {
        let g = GivensRotation::zeroing_second(0, 2, 1.0, 2.0).unwrap();
        let gm = g.to_matrix(3);
        let m = Matrix::from_rows(
            &[
                vec![1.0, 2.0, 3.0],
                vec![4.0, 5.0, 6.0],
                vec![7.0, 8.0, 10.0],
            ],
            3,
        );
        let mut rows = m.clone();
        g.apply_rows(&mut rows);
        assert!(rows.max_abs_diff(&gm.transpose().matmul(&m)) < 1e-14);
        let mut cols = m.clone();
        g.apply_cols(&mut cols);
        assert!(cols.max_abs_diff(&m.matmul(&gm)) < 1e-14);
    }

    proptest! {
        #[test]
        fn unit_norm_and_locality(a in -1e3..1e3f64, b in -1e3..1e3f64,
                                  xs in proptest::collection::vec(-1e3..1e3f64, 6)) {
            prop_assume!(a != 0.0 || b != 0.0);
            let (c, s) = givens_for(a, b).unwrap();
            prop_assert!((c * c + s * s - 1.0).abs() <= 1e-14);
            let g = GivensRotation { i: 1, j: 4, c, s };
            let mut y = xs.clone();
            g.apply(&mut y);
            for k in [0usize, 2, 3, 5] {
                prop_assert_eq!(y[k].to_bits(), xs[k].to_bits());
            }
        }
    }
}
