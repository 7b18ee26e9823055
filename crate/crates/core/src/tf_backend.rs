//! Trend filtering with `X = I`: the Gram matrix of `D^(k+1)_{−B}` is banded with half-width
//! `k+1`, so each least-squares solve is a banded Cholesky in `O(r·k²)`. When the Gram matrix
//! is too ill-conditioned for that, a banded Givens QR of `D_{−B}ᵀ` takes over.

use log::warn;

use crate::error::{Error, Result};
use crate::operators::{diff_coefficients, BoundaryPartition};
use crate::path::InteriorSolver;

/// Condition estimates above this trigger a warning.
pub const CONDITION_WARNING: f64 = 1e12;

/// Cholesky factor `L` of a symmetric positive-definite band matrix, stored by rows:
/// entry `(i, w)` holds `L[i][i−w]` for `w = 0..=half`.
#[derive(Clone, Debug)]
pub struct BandedSpdFactor {
    n: usize,
    half: usize,
    l: Vec<f64>,
}

impl BandedSpdFactor {
    /// Factors the band matrix given in the same lower-band layout.
    ///
    /// A non-positive pivot is reported as a numerical failure.
    pub fn factor(band: &[f64], n: usize, half: usize) -> Result<Self> {
        let width = half + 1;
        assert_eq!(band.len(), n * width, "band storage length");
        let mut l = vec![0.0; n * width];
        for i in 0..n {
            for w in (0..=half.min(i)).rev() {
                let j = i - w;
                let mut s = band[i * width + w];
                let lo = i.saturating_sub(half);
                for t in lo..j {
                    s -= l[i * width + (i - t)] * l[j * width + (j - t)];
                }
                if w == 0 {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(Error::numerical(format!(
                            "banded Cholesky hit a non-positive pivot {s:e} at row {i}"
                        )));
                    }
                    l[i * width] = s.sqrt();
                } else {
                    l[i * width + w] = s / l[j * width];
                }
            }
        }
        Ok(BandedSpdFactor { n, half, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Full bandwidth of the factored matrix, `2·half + 1`.
    pub fn bandwidth(&self) -> usize {
        2 * self.half + 1
    }

    /// `L[i][j]` for `j ≤ i`, zero outside the band.
    pub fn l(&self, i: usize, j: usize) -> f64 {
        if j > i || i - j > self.half {
            0.0
        } else {
            self.l[i * (self.half + 1) + (i - j)]
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, h, width) = (self.n, self.half, self.half + 1);
        assert_eq!(b.len(), n);
        let mut x = b.to_vec();
        for i in 0..n {
            let mut s = x[i];
            for t in i.saturating_sub(h)..i {
                s -= self.l[i * width + (i - t)] * x[t];
            }
            x[i] = s / self.l[i * width];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for t in i + 1..(i + h + 1).min(n) {
                s -= self.l[t * width + (t - i)] * x[t];
            }
            x[i] = s / self.l[i * width];
        }
        x
    }

    /// Cheap estimate `(max L_ii / min L_ii)²` of the condition number.
    pub fn condition_estimate(&self) -> f64 {
        let width = self.half + 1;
        let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
        for i in 0..self.n {
            let d = self.l[i * width];
            lo = lo.min(d);
            hi = hi.max(d);
        }
        if self.n == 0 {
            1.0
        } else {
            (hi / lo).powi(2)
        }
    }
}

/// Lower band of `D_{−B} D_{−B}ᵀ` for the interior rows of `D^(k+1)`, half-width `k+1`.
pub fn gram_band(k: usize, interior: &[usize]) -> Vec<f64> {
    let coef = diff_coefficients(k);
    let half = k + 1;
    let width = half + 1;
    let overlap: Vec<f64> = (0..=half)
        .map(|d| (d..=half).map(|j| coef[j] * coef[j - d]).sum())
        .collect();
    let mut band = vec![0.0; interior.len() * width];
    for (l, &i2) in interior.iter().enumerate() {
        for w in 0..=half.min(l) {
            let delta = i2 - interior[l - w];
            if delta <= half {
                band[l * width + w] = overlap[delta];
            }
        }
    }
    band
}

fn apply_rows(coef: &[f64], interior: &[usize], x: &[f64]) -> Vec<f64> {
    interior
        .iter()
        .map(|&i| coef.iter().zip(&x[i..]).map(|(c, v)| c * v).sum())
        .collect()
}

fn factor_interior(k: usize, interior: &[usize]) -> Result<BandedSpdFactor> {
    BandedSpdFactor::factor(&gram_band(k, interior), interior.len(), k + 1)
}

fn warn_if_ill_conditioned(f: &BandedSpdFactor) -> bool {
    let cond = f.condition_estimate();
    if cond > CONDITION_WARNING {
        warn!(
            "trend-filter Gram matrix has estimated condition number {cond:.3e}; \
             it is the square of the condition number of D_(-B); using banded QR instead"
        );
        true
    } else {
        false
    }
}

/// Solves `D_{−B} D_{−B}ᵀ x = rhs` where `D_{−B}` holds the `interior` rows of `D^(k+1)`.
pub fn tf_solve(k: usize, interior: &[usize], rhs: &[f64]) -> Result<Vec<f64>> {
    if rhs.len() != interior.len() {
        return Err(Error::dim(format!(
            "{} interior rows but right-hand side of length {}",
            interior.len(),
            rhs.len()
        )));
    }
    let f = factor_interior(k, interior)?;
    warn_if_ill_conditioned(&f);
    Ok(f.solve(rhs))
}

/// Least squares `min ‖r − D_{−B}ᵀa‖` by Givens rotations over the rows of `D_{−B}ᵀ`.
///
/// This works with `D_{−B}` directly instead of its Gram matrix, so it survives cases where
/// the squared condition number defeats the banded Cholesky. `R` keeps upper bandwidth `k+1`
/// and each rhs costs `O(p·k²)`.
pub fn tf_lstsq_qr(
    k: usize,
    p: usize,
    interior: &[usize],
    rhs: &[Vec<f64>],
) -> Result<Vec<Vec<f64>>> {
    let coef = diff_coefficients(k);
    let half = k + 1;
    let width = half + 1;
    let nr = interior.len();
    let mut r = vec![0.0; nr * width];
    let mut z = vec![vec![0.0; nr]; rhs.len()];
    let mut filled = vec![false; nr];
    let mut win = vec![0.0; width];
    let mut rv = vec![0.0; rhs.len()];
    let mut lo = 0;
    for t in 0..p {
        while lo < nr && interior[lo] + half < t {
            lo += 1;
        }
        if lo >= nr || interior[lo] > t {
            continue;
        }
        let mut hi = lo;
        while hi + 1 < nr && interior[hi + 1] <= t {
            hi += 1;
        }
        win.fill(0.0);
        for j in lo..=hi {
            win[j - lo] = coef[t - interior[j]];
        }
        for (v, b) in rv.iter_mut().zip(rhs) {
            *v = b[t];
        }
        let mut c = lo;
        while c <= hi {
            let x = win[0];
            if x != 0.0 {
                let row = &mut r[c * width..(c + 1) * width];
                if !filled[c] {
                    row.copy_from_slice(&win);
                    for (zc, &v) in z.iter_mut().zip(&rv) {
                        zc[c] = v;
                    }
                    filled[c] = true;
                    break;
                }
                let rho = row[0].hypot(x);
                let (cs, sn) = (row[0] / rho, x / rho);
                for (rw, ww) in row.iter_mut().zip(win.iter_mut()) {
                    let (a, b) = (*rw, *ww);
                    *rw = cs * a + sn * b;
                    *ww = cs * b - sn * a;
                }
                for (zc, v) in z.iter_mut().zip(rv.iter_mut()) {
                    let (a, b) = (zc[c], *v);
                    zc[c] = cs * a + sn * b;
                    *v = cs * b - sn * a;
                }
            }
            win.rotate_left(1);
            win[width - 1] = 0.0;
            c += 1;
        }
    }
    if let Some(c) = filled.iter().position(|f| !f) {
        return Err(Error::numerical(format!(
            "difference rows are dependent: column {c} of D_(-B)ᵀ has no pivot"
        )));
    }
    for zc in &mut z {
        for j in (0..nr).rev() {
            let mut s = zc[j];
            for w in 1..width.min(nr - j) {
                s -= r[j * width + w] * zc[j + w];
            }
            zc[j] = s / r[j * width];
        }
        if zc.iter().any(|v| !v.is_finite()) {
            return Err(Error::numerical(
                "banded QR solve produced non-finite values",
            ));
        }
    }
    Ok(z)
}

/// `(â, b̂)` for trend filtering of order `k` at boundary `b`.
pub fn tf_step_quantities(
    y: &[f64],
    k: usize,
    b: &BoundaryPartition,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let p = y.len();
    let m = p.saturating_sub(k + 1);
    let mut solver = TfSolver::new(k, p);
    for &i in &b.indices {
        solver.add_boundary(i)?;
    }
    let coef = diff_coefficients(k);
    let mut dbs = vec![0.0; p];
    for (&i, &s) in b.indices.iter().zip(&b.signs) {
        for (j, c) in coef.iter().enumerate() {
            dbs[i + j] += c * s;
        }
    }
    debug_assert!(b.indices.iter().all(|&i| i < m));
    let mut out = solver.solve(&[y.to_vec(), dbs])?;
    let bhat = out.pop().unwrap();
    let ahat = out.pop().unwrap();
    Ok((ahat, bhat))
}

/// [`InteriorSolver`] for `D^(k+1)`.
#[derive(Clone, Debug)]
pub struct TfSolver {
    k: usize,
    p: usize,
    coef: Vec<f64>,
    on_boundary: Vec<bool>,
    boundary: usize,
    warned: bool,
}

impl TfSolver {
    pub fn new(k: usize, p: usize) -> Self {
        let m = p.saturating_sub(k + 1);
        TfSolver {
            k,
            p,
            coef: diff_coefficients(k),
            on_boundary: vec![false; m],
            boundary: 0,
            warned: false,
        }
    }

    pub fn order(&self) -> usize {
        self.k
    }

    fn interior(&self) -> Vec<usize> {
        (0..self.on_boundary.len())
            .filter(|&i| !self.on_boundary[i])
            .collect()
    }

    fn check_row(&self, i: usize) -> Result<()> {
        if i >= self.on_boundary.len() {
            Err(Error::input(format!(
                "row {i} out of range for {} difference rows",
                self.on_boundary.len()
            )))
        } else {
            Ok(())
        }
    }
}

impl InteriorSolver for TfSolver {
    fn num_dual(&self) -> usize {
        self.on_boundary.len()
    }

    fn num_primal(&self) -> usize {
        self.p
    }

    fn add_boundary(&mut self, i: usize) -> Result<()> {
        self.check_row(i)?;
        if !self.on_boundary[i] {
            self.on_boundary[i] = true;
            self.boundary += 1;
        }
        Ok(())
    }

    fn remove_boundary(&mut self, i: usize) -> Result<()> {
        self.check_row(i)?;
        if self.on_boundary[i] {
            self.on_boundary[i] = false;
            self.boundary -= 1;
        }
        Ok(())
    }

    fn solve(&mut self, rhs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        if let Some(r) = rhs.iter().find(|r| r.len() != self.p) {
            return Err(Error::dim(format!(
                "right-hand side of length {} for p = {}",
                r.len(),
                self.p
            )));
        }
        let interior = self.interior();
        let factor = match factor_interior(self.k, &interior) {
            Ok(f) if f.condition_estimate() <= CONDITION_WARNING => Some(f),
            Ok(f) => {
                if !self.warned {
                    self.warned = warn_if_ill_conditioned(&f);
                }
                None
            }
            Err(e) => {
                if !self.warned {
                    warn!("{e}; Gram matrix too ill-conditioned, switching to banded QR");
                    self.warned = true;
                }
                None
            }
        };
        match factor {
            Some(f) => Ok(rhs
                .iter()
                .map(|r| f.solve(&apply_rows(&self.coef, &interior, r)))
                .collect()),
            None => tf_lstsq_qr(self.k, self.p, &interior, rhs),
        }
    }

    fn nullity(&self) -> usize {
        if self.p < self.k + 1 {
            self.p
        } else {
            self.k + 1 + self.boundary
        }
    }
}
