//! Givens-rotation QR factorizations with one-row and one-column updates.
//!
//! [`QrFactor`] handles full-column-rank matrices. [`RotatedQr`] holds `APG = QR` with
//! `R = [0 R1; 0 0]` for matrices of any rank and supports minimum-norm least squares.

mod full;
mod givens;
mod rotated;

pub use full::{qr_full, QrFactor};
pub use givens::{givens_for, GivensRotation};
pub use rotated::{qr_pivoted, qr_rotated, qr_rotated_transposed, PivotedQr, RotatedQr};

pub(crate) use full::back_solve_upper;

/// A diagonal entry of `R1` is treated as zero when `|r_qq| ≤ 1e−11 · max(m, n) · max|A|`.
pub fn rank_tolerance(m: usize, n: usize, scale: f64) -> f64 {
    1e-11 * m.max(n).max(1) as f64 * scale
}
