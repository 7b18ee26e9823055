use log::debug;

use super::InteriorSolver;
use crate::dense::Matrix;
use crate::error::{Error, Result};
use crate::givens_qr::{qr_full, qr_rotated_transposed, QrFactor, RotatedQr};

enum Factor {
    /// `D_{−B}ᵀ` has full column rank.
    Wide(QrFactor),
    /// Rank-revealing factor of `D_{−B}`, flagged transposed.
    Tall(RotatedQr),
}

/// Interior solver for any dense penalty, updating a Givens QR of `D_{−B}ᵀ` as rows move
/// between the interior and the boundary.
pub struct GenericQrSolver {
    d: Matrix,
    on_boundary: Vec<bool>,
    factor: Factor,
    offset: usize,
}

impl GenericQrSolver {
    /// `d` is `m×n`; `offset` is subtracted from `n − rank(D_{−B})` when reporting `df`.
    pub fn new(d: &Matrix, offset: usize) -> Self {
        let factor = Self::initial_factor(d);
        GenericQrSolver {
            d: d.clone(),
            on_boundary: vec![false; d.rows()],
            factor,
            offset,
        }
    }

    fn initial_factor(d: &Matrix) -> Factor {
        if d.rows() <= d.cols() {
            if let Ok(f) = qr_full(&d.transpose()) {
                return Factor::Wide(f);
            }
        }
        Factor::Tall(qr_rotated_transposed(&d.transpose()))
    }

    fn interior_position(&self, i: usize) -> usize {
        self.on_boundary[..i].iter().filter(|&&b| !b).count()
    }

    fn interior_matrix(&self) -> Matrix {
        let rows: Vec<usize> = (0..self.d.rows())
            .filter(|&i| !self.on_boundary[i])
            .collect();
        super::dense_rows(&self.d, &rows)
    }

    fn check(&self, i: usize, on_boundary: bool) -> Result<()> {
        if i >= self.d.rows() {
            return Err(Error::dim(format!(
                "row {i} out of range for {} rows",
                self.d.rows()
            )));
        }
        if self.on_boundary[i] != on_boundary {
            return Err(Error::Contract(format!(
                "row {i} is already {}",
                if on_boundary {
                    "interior"
                } else {
                    "on the boundary"
                }
            )));
        }
        Ok(())
    }

    /// True while the full-column-rank factor is in use.
    pub fn is_wide(&self) -> bool {
        matches!(self.factor, Factor::Wide(_))
    }
}

impl InteriorSolver for GenericQrSolver {
    fn num_dual(&self) -> usize {
        self.d.rows()
    }

    fn num_primal(&self) -> usize {
        self.d.cols()
    }

    fn add_boundary(&mut self, i: usize) -> Result<()> {
        self.check(i, false)?;
        let pos = self.interior_position(i);
        match &mut self.factor {
            Factor::Wide(f) => f.remove_col(pos)?,
            Factor::Tall(f) => f.remove_column(pos)?,
        }
        self.on_boundary[i] = true;
        Ok(())
    }

    fn remove_boundary(&mut self, i: usize) -> Result<()> {
        self.check(i, true)?;
        let pos = self.interior_position(i);
        let row = self.d.row(i).to_vec();
        let dependent = match &mut self.factor {
            Factor::Wide(f) => match f.add_col(pos, &row) {
                Ok(()) => false,
                Err(Error::RankDeficient { .. }) => true,
                Err(e) => return Err(e),
            },
            Factor::Tall(f) => {
                f.add_column(pos, &row)?;
                false
            }
        };
        self.on_boundary[i] = false;
        if dependent {
            debug!("interior rows became dependent; switching to the rank-revealing factor");
            self.factor = Factor::Tall(qr_rotated_transposed(&self.interior_matrix().transpose()));
        }
        Ok(())
    }

    fn solve(&mut self, rhs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let n = self.d.cols();
        let mut out = Vec::with_capacity(rhs.len());
        for r in rhs {
            if r.len() != n {
                return Err(Error::dim(format!(
                    "right-hand side has length {}, expected {n}",
                    r.len()
                )));
            }
            let x = match &self.factor {
                Factor::Wide(f) => f.solve(r),
                Factor::Tall(f) => f.solve_min_norm(r),
            };
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::numerical(
                    "least-squares solve produced non-finite values",
                ));
            }
            out.push(x);
        }
        Ok(out)
    }

    fn nullity(&self) -> usize {
        let rank = match &self.factor {
            Factor::Wide(f) => f.cols(),
            Factor::Tall(f) => f.rank(),
        };
        (self.d.cols() - rank).saturating_sub(self.offset)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{to_dense, PenaltySpec};
    use crate::test_support::{max_diff, oracle_min_norm, oracle_rank, random_matrix};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn check_against_oracle(s: &mut GenericQrSolver, d: &Matrix, rng: &mut ChaCha8Rng) {
        let rows: Vec<usize> = (0..d.rows()).filter(|&i| !s.on_boundary[i]).collect();
        let a = super::super::dense_rows(d, &rows).transpose();
        let r: Vec<f64> = (0..d.cols()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = s.solve(&[r.clone()]).unwrap().pop().unwrap();
        let want = oracle_min_norm(&a, &r);
        assert!(max_diff(&x, &want) < 1e-9 * (1.0 + crate::dense::norm_inf(&want)));
        assert_eq!(s.nullity(), d.cols() - oracle_rank(&a));
    }

    #[test]
    fn wide_and_tall_follow_boundary_changes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let cases = [
            to_dense(&PenaltySpec::trend_filter(1, 8).matrix()),
            random_matrix(&mut rng, 9, 5),
            to_dense(
                &PenaltySpec::fused(5, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 1)])
                    .unwrap()
                    .matrix(),
            ),
        ];
        for d in cases {
            let mut s = GenericQrSolver::new(&d, 0);
            check_against_oracle(&mut s, &d, &mut rng);
            for _ in 0..30 {
                let i = rng.gen_range(0..d.rows());
                if s.on_boundary[i] {
                    s.remove_boundary(i).unwrap();
                } else {
                    s.add_boundary(i).unwrap();
                }
                check_against_oracle(&mut s, &d, &mut rng);
            }
        }
    }

    #[test]
    fn rejects_repeated_moves() {
        let d = to_dense(&PenaltySpec::chain(4).matrix());
        let mut s = GenericQrSolver::new(&d, 0);
        assert!(s.is_wide());
        s.add_boundary(1).unwrap();
        assert!(matches!(s.add_boundary(1), Err(Error::Contract(_))));
        assert!(matches!(s.remove_boundary(0), Err(Error::Contract(_))));
    }
}
