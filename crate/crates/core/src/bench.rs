//! Timing the first steps of the path on seeded synthetic problems.
//!
//! `fl1d` and `tf` observe a two-period sine (`sin(4πi/n)`) plus `N(0, 0.5²)` noise. `fl2d-grid`
//! uses a `⌈√n⌉ × ⌈√n⌉` grid whose bottom-left quadrant has mean 1 and the rest mean 0, plus the
//! same noise. Each size draws from `ChaCha8Rng::seed_from_u64(seed ^ n)`.

use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::operators::PenaltySpec;
use crate::path::{solve_path, Backend, PathOptions};

pub const NOISE_SD: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BenchProblem {
    Fl1d,
    /// Trend filtering of the given order.
    Tf(usize),
    Fl2dGrid,
}

impl FromStr for BenchProblem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fl1d" => Ok(BenchProblem::Fl1d),
            "tf" => Ok(BenchProblem::Tf(3)),
            "fl2d-grid" => Ok(BenchProblem::Fl2dGrid),
            _ => Err(Error::input(format!("unknown benchmark problem {s:?}"))),
        }
    }
}

fn noise(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let d = Normal::new(0.0, NOISE_SD).unwrap();
    (0..n).map(|_| d.sample(rng)).collect()
}

/// Noisy two-period sine of length `n`.
pub fn sine_signal(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ n as u64);
    noise(&mut rng, n)
        .into_iter()
        .enumerate()
        .map(|(i, e)| (4.0 * std::f64::consts::PI * i as f64 / n as f64).sin() + e)
        .collect()
}

/// Edges of an `rows × cols` 4-neighbour grid, nodes numbered row by row.
pub fn grid_edges(rows: usize, cols: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::with_capacity(2 * rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let i = r * cols + c;
            if c + 1 < cols {
                edges.push((i, i + 1));
            }
            if r + 1 < rows {
                edges.push((i, i + cols));
            }
        }
    }
    edges
}

/// Side length and noisy observations of the grid problem with about `n` nodes.
pub fn grid_signal(n: usize, seed: u64) -> (usize, Vec<f64>) {
    let side = (n as f64).sqrt().ceil() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ n as u64);
    let y = noise(&mut rng, side * side)
        .into_iter()
        .enumerate()
        .map(|(i, e)| {
            let (r, c) = (i / side, i % side);
            let mean = if r >= side / 2 && c < side / 2 {
                1.0
            } else {
                0.0
            };
            mean + e
        })
        .collect();
    (side, y)
}

/// The problem instance of size `n`: response and penalty.
pub fn instance(problem: BenchProblem, n: usize, seed: u64) -> Result<(Vec<f64>, PenaltySpec)> {
    Ok(match problem {
        BenchProblem::Fl1d => (sine_signal(n, seed), PenaltySpec::trend_filter(0, n)),
        BenchProblem::Tf(k) => (sine_signal(n, seed), PenaltySpec::trend_filter(k, n)),
        BenchProblem::Fl2dGrid => {
            let (side, y) = grid_signal(n, seed);
            (y, PenaltySpec::fused(side * side, &grid_edges(side, side))?)
        }
    })
}

#[derive(Clone, Copy, Debug)]
pub struct Timing {
    /// Primal dimension actually used (grids round up to a square).
    pub n: usize,
    pub steps: usize,
    pub seconds: f64,
}

/// Wall time of the first `steps` path steps at each size.
pub fn run(problem: BenchProblem, sizes: &[usize], steps: usize, seed: u64) -> Result<Vec<Timing>> {
    let opts = PathOptions {
        max_steps: steps,
        record_segments: false,
        ..Default::default()
    };
    sizes
        .iter()
        .map(|&n| {
            let (y, spec) = instance(problem, n, seed)?;
            let start = Instant::now();
            let path = solve_path(&y, &spec, Backend::Auto, &opts)?;
            let seconds = start.elapsed().as_secs_f64();
            Ok(Timing {
                n: y.len(),
                steps: path.knots().len(),
                seconds,
            })
        })
        .collect()
}

/// Least-squares slope of `log(seconds)` against `log(n)`, with an intercept.
pub fn loglog_slope(timings: &[Timing]) -> Option<f64> {
    if timings.len() < 2 {
        return None;
    }
    let pts: Vec<(f64, f64)> = timings
        .iter()
        .map(|t| ((t.n as f64).ln(), t.seconds.max(1e-9).ln()))
        .collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_exact_power_law() {
        let t: Vec<Timing> = [100, 1000, 10000]
            .iter()
            .map(|&n| Timing {
                n,
                steps: 1,
                seconds: 3e-6 * (n as f64).powf(1.2),
            })
            .collect();
        assert!((loglog_slope(&t).unwrap() - 1.2).abs() < 1e-12);
        assert!(loglog_slope(&t[..1]).is_none());
    }

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(sine_signal(50, 7), sine_signal(50, 7));
        assert_ne!(sine_signal(50, 7), sine_signal(50, 8));
        let (side, y) = grid_signal(10, 1);
        assert_eq!((side, y.len()), (4, 16));
        assert_eq!(grid_edges(3, 3).len(), 12);
    }

    #[test]
    fn completes_requested_steps() {
        for p in [
            BenchProblem::Fl1d,
            BenchProblem::Tf(3),
            BenchProblem::Fl2dGrid,
        ] {
            let t = run(p, &[400], 20, 1).unwrap();
            assert_eq!(t[0].steps, 20);
        }
    }
}
