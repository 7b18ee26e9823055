//! The dual path algorithm: from `λ = ∞` down to 0, tracking which dual coordinates sit on the
//! boundary `|û_i| = λ` and recording `û(λ) = â − λb̂` between knots.

mod generic;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dense::{norm_inf, Matrix};
use crate::error::{Error, Result};
use crate::general_x::DesignMatrix;
use crate::graph_backend::GraphSolver;
use crate::operators::{mul_rows, tr_mul_rows, BoundaryPartition, PenaltySpec, SparseMatrix};
use crate::tf_backend::TfSolver;

pub use generic::GenericQrSolver;

/// Relative tolerance for tied hitting times and for clamping candidates just above `λ_k`.
pub const TIE_TOL: f64 = 1e-12;

/// Minimum-norm least squares `min ‖r − D_{−B}ᵀa‖` for the current boundary, with `X = I`.
///
/// Solutions are indexed by the interior rows of `D` in increasing order.
pub trait InteriorSolver {
    fn num_dual(&self) -> usize;
    fn num_primal(&self) -> usize;
    /// Moves row `i` of `D` onto the boundary.
    fn add_boundary(&mut self, i: usize) -> Result<()>;
    /// Returns row `i` of `D` to the interior.
    fn remove_boundary(&mut self, i: usize) -> Result<()>;
    fn solve(&mut self, rhs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>>;
    /// `dim null(D_{−B})`.
    fn nullity(&self) -> usize;
}

impl<T: InteriorSolver + ?Sized> InteriorSolver for Box<T> {
    fn num_dual(&self) -> usize {
        (**self).num_dual()
    }
    fn num_primal(&self) -> usize {
        (**self).num_primal()
    }
    fn add_boundary(&mut self, i: usize) -> Result<()> {
        (**self).add_boundary(i)
    }
    fn remove_boundary(&mut self, i: usize) -> Result<()> {
        (**self).remove_boundary(i)
    }
    fn solve(&mut self, rhs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        (**self).solve(rhs)
    }
    fn nullity(&self) -> usize {
        (**self).nullity()
    }
}

/// Everything one iteration needs: `â`, `b̂` on the interior rows, and for each boundary row
/// `c_i`, `d_i` with `s_i (D_B β(λ))_i = c_i − λ d_i`.
#[derive(Clone, Debug, Default)]
pub struct StepQuantities {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
}

/// Source of [`StepQuantities`] for a fixed problem as the boundary changes.
pub trait DualOracle {
    fn num_dual(&self) -> usize;
    fn add_boundary(&mut self, i: usize) -> Result<()>;
    fn remove_boundary(&mut self, i: usize) -> Result<()>;
    fn step(&mut self, b: &BoundaryPartition) -> Result<StepQuantities>;
    fn df(&self) -> usize;
}

/// [`DualOracle`] for `X = I`: primal `β(λ) = y − Dᵀû(λ)`.
pub struct IdentityDesign<S> {
    y: Vec<f64>,
    d: SparseMatrix,
    solver: S,
}

impl<S: InteriorSolver> IdentityDesign<S> {
    pub fn new(y: &[f64], d: SparseMatrix, solver: S) -> Result<Self> {
        if y.len() != d.cols() || solver.num_primal() != d.cols() || solver.num_dual() != d.rows() {
            return Err(Error::dim(format!(
                "y has length {}, D is {}x{}, solver expects {}x{}",
                y.len(),
                d.rows(),
                d.cols(),
                solver.num_dual(),
                solver.num_primal()
            )));
        }
        Ok(IdentityDesign {
            y: y.to_vec(),
            d,
            solver,
        })
    }
}

impl<S: InteriorSolver> DualOracle for IdentityDesign<S> {
    fn num_dual(&self) -> usize {
        self.d.rows()
    }

    fn add_boundary(&mut self, i: usize) -> Result<()> {
        self.solver.add_boundary(i)
    }

    fn remove_boundary(&mut self, i: usize) -> Result<()> {
        self.solver.remove_boundary(i)
    }

    fn step(&mut self, b: &BoundaryPartition) -> Result<StepQuantities> {
        let dbs = tr_mul_rows(&self.d, &b.indices, &b.signs);
        let mut sol = self.solver.solve(&[self.y.clone(), dbs.clone()])?;
        let bh = sol.pop().unwrap();
        let a = sol.pop().unwrap();
        if b.is_empty() {
            return Ok(StepQuantities {
                b: vec![0.0; a.len()],
                a,
                ..Default::default()
            });
        }
        let interior = b.interior(self.d.rows());
        let beta0: Vec<f64> = self
            .y
            .iter()
            .zip(tr_mul_rows(&self.d, &interior, &a))
            .map(|(y, v)| y - v)
            .collect();
        let beta1: Vec<f64> = dbs
            .iter()
            .zip(tr_mul_rows(&self.d, &interior, &bh))
            .map(|(s, v)| s - v)
            .collect();
        let mag0 = term_magnitude(&self.d, &interior, &a, &self.y);
        let mag1 = term_magnitude(&self.d, &interior, &bh, &dbs);
        let (c, d) = boundary_slopes(&self.d, b, (&beta0, &beta1), (&mag0, &mag1));
        Ok(StepQuantities { a, b: bh, c, d })
    }

    fn df(&self) -> usize {
        self.solver.nullity()
    }
}

/// Multiple of machine epsilon, times the rounding-error bound of `D_i β`, below which the
/// value is treated as zero.
const SLOPE_NOISE: f64 = 1e3 * f64::EPSILON;

/// `s∘(D_B β)`, with entries below the rounding-error bound `Σ_j |D_ij|·mag_j` set to zero.
///
/// `mag` bounds the terms summed to form each `β_j`. A boundary row in the span of the interior
/// rows (a cycle closed in a graph, say) has `D_i β ≡ 0`; left as noise, the ratio `c_i/d_i`
/// would produce a spurious leave. The bound follows the data, not `‖β‖`, because high-order
/// differences of a smooth `β` are legitimately tiny.
fn oriented_boundary(
    d: &SparseMatrix,
    b: &BoundaryPartition,
    beta: &[f64],
    mag: &[f64],
) -> Vec<f64> {
    b.indices
        .iter()
        .zip(&b.signs)
        .map(|(&r, &s)| {
            let Some(row) = d.outer_view(r) else {
                return 0.0;
            };
            let (v, bound) = row.iter().fold((0.0, 0.0), |(v, bound), (j, &x)| {
                (v + x * beta[j], bound + x.abs() * mag[j].max(beta[j].abs()))
            });
            if v.abs() <= SLOPE_NOISE * bound {
                0.0
            } else {
                v * s
            }
        })
        .collect()
}

/// `|D_S|ᵀ|u| + |r|`, the magnitude of the terms in `r − D_Sᵀu`.
pub(crate) fn term_magnitude(d: &SparseMatrix, rows: &[usize], u: &[f64], r: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = r.iter().map(|v| v.abs()).collect();
    for (&i, &ui) in rows.iter().zip(u) {
        if let Some(row) = d.outer_view(i) {
            for (j, &v) in row.iter() {
                out[j] += (v * ui).abs();
            }
        }
    }
    out
}

/// `c = s∘(D_B β₀)`, `d = s∘(D_B β₁)`; `mags` bound the terms each `β` was summed from.
pub(crate) fn boundary_slopes(
    d: &SparseMatrix,
    b: &BoundaryPartition,
    (beta0, beta1): (&[f64], &[f64]),
    (mag0, mag1): (&[f64], &[f64]),
) -> (Vec<f64>, Vec<f64>) {
    (
        oriented_boundary(d, b, beta0, mag0),
        oriented_boundary(d, b, beta1, mag1),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Event {
    /// `y` already lies in the fully regularized model; the path is a single point at `λ = 0`.
    Start,
    Hit {
        coordinate: usize,
        sign: f64,
    },
    Leave {
        coordinate: usize,
    },
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Start => write!(f, "start"),
            Event::Hit { coordinate, sign } => write!(f, "hit({coordinate}, {sign:+})"),
            Event::Leave { coordinate } => write!(f, "leave({coordinate})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathKnot {
    pub lambda: f64,
    pub event: Event,
    /// `dim null(D_{−B})` after the event.
    pub df: usize,
}

/// One linear piece of the dual path, valid for `λ ∈ [lambda_lo, lambda_hi]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualSegment {
    pub lambda_hi: f64,
    pub lambda_lo: f64,
    pub boundary: BoundaryPartition,
    /// On the interior rows (increasing), `û = a − λb`.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub df: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Termination {
    /// The path reached `λ = 0`.
    Completed,
    MaxSteps,
    MinLambda,
    MaxDf,
    /// A least-squares solve failed at iteration `step`; the path holds everything before it.
    Aborted {
        step: usize,
        message: String,
    },
}

#[derive(Clone, Debug)]
pub struct PathOptions {
    pub max_steps: usize,
    pub min_lambda: f64,
    /// Defaults to the primal dimension.
    pub max_df: Option<usize>,
    /// Segments take `O(m)` memory each; benchmarks can skip them.
    pub record_segments: bool,
}

impl Default for PathOptions {
    fn default() -> Self {
        PathOptions {
            max_steps: 2000,
            min_lambda: 0.0,
            max_df: None,
            record_segments: true,
        }
    }
}

/// Raw output of [`run_path`].
#[derive(Clone, Debug)]
pub struct PathRun {
    pub knots: Vec<PathKnot>,
    pub segments: Vec<DualSegment>,
    pub termination: Termination,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HitTime {
    pub lambda: f64,
    /// Position among the interior rows.
    pub position: usize,
    pub sign: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LeaveTime {
    pub lambda: f64,
    /// Position within the boundary set.
    pub position: usize,
}

/// Largest `λ ∈ (0, λ_k]` at which some `â_i − λb̂_i` reaches `±λ`; ties go to the lowest index.
pub fn hitting_times(a: &[f64], b: &[f64], lambda_k: f64) -> Option<HitTime> {
    hitting_times_excluding(a, b, lambda_k, None)
}

fn clamp_candidate(t: f64, lambda_k: f64) -> Option<f64> {
    if !t.is_finite() || t <= 0.0 || t > lambda_k * (1.0 + TIE_TOL) {
        None
    } else {
        Some(t.min(lambda_k))
    }
}

/// `just_left` is the interior position and sign of a coordinate that left at `λ_k`. Its
/// same-sign root `a_i/(b_i + s)` equals `λ_k` identically, so that candidate is dropped.
fn hitting_times_excluding(
    a: &[f64],
    b: &[f64],
    lambda_k: f64,
    just_left: Option<(usize, f64)>,
) -> Option<HitTime> {
    let mut cands: Vec<HitTime> = Vec::new();
    for (i, (&ai, &bi)) in a.iter().zip(b).enumerate() {
        for sign in [1.0, -1.0] {
            let den = bi + sign;
            if den == 0.0 {
                continue;
            }
            if just_left == Some((i, sign)) {
                continue;
            }
            if let Some(t) = clamp_candidate(ai / den, lambda_k) {
                cands.push(HitTime {
                    lambda: t,
                    position: i,
                    sign,
                });
            }
        }
    }
    let best = cands.iter().map(|h| h.lambda).fold(0.0_f64, f64::max);
    cands
        .into_iter()
        .find(|h| h.lambda >= best - TIE_TOL * lambda_k)
}

/// Largest `λ ∈ (0, λ_k]` at which a boundary coordinate must leave: `c_i/d_i` with
/// `c_i < 0` and `d_i < 0`.
pub fn leaving_times(c: &[f64], d: &[f64], lambda_k: f64) -> Option<LeaveTime> {
    leaving_times_excluding(c, d, lambda_k, None)
}

/// `just_hit` is the boundary position of a coordinate that hit at `λ_k`: `(Dβ)_i` vanishes
/// there, so its only root is `λ_k` itself and it is not a leave candidate.
fn leaving_times_excluding(
    c: &[f64],
    d: &[f64],
    lambda_k: f64,
    just_hit: Option<usize>,
) -> Option<LeaveTime> {
    let mut best: Option<LeaveTime> = None;
    for (i, (&ci, &di)) in c.iter().zip(d).enumerate() {
        if !(ci < 0.0 && di < 0.0) {
            continue;
        }
        if just_hit == Some(i) {
            continue;
        }
        let Some(t) = clamp_candidate(ci / di, lambda_k) else {
            continue;
        };
        if best.map_or(true, |l| t > l.lambda + TIE_TOL * lambda_k) {
            best = Some(LeaveTime {
                lambda: t,
                position: i,
            });
        }
    }
    best
}

fn finite(q: StepQuantities) -> Result<StepQuantities> {
    let ok = [&q.a, &q.b, &q.c, &q.d]
        .iter()
        .all(|v| v.iter().all(|x| x.is_finite()));
    if ok {
        Ok(q)
    } else {
        Err(Error::numerical(
            "step quantities overflowed or are undefined",
        ))
    }
}

/// Runs the dual path algorithm on `oracle`, whose boundary must start empty.
///
/// `num_primal` bounds the default `max_df`. A failed solve ends the run with
/// [`Termination::Aborted`] and keeps the knots and segments found so far.
pub fn run_path<O: DualOracle>(oracle: &mut O, num_primal: usize, opts: &PathOptions) -> PathRun {
    let m = oracle.num_dual();
    let max_df = opts.max_df.unwrap_or(num_primal);
    let mut knots = Vec::new();
    let mut segments = Vec::new();
    let mut bnd = BoundaryPartition::empty();

    let first = match oracle.step(&bnd).and_then(finite) {
        Ok(q) => q,
        Err(e) => {
            return PathRun {
                knots,
                segments,
                termination: Termination::Aborted {
                    step: 0,
                    message: e.to_string(),
                },
            }
        }
    };
    let lambda1 = norm_inf(&first.a);
    let df0 = oracle.df();
    if m == 0 || !(lambda1 > 0.0) {
        segments.push(DualSegment {
            lambda_hi: f64::INFINITY,
            lambda_lo: 0.0,
            boundary: bnd,
            b: vec![0.0; first.a.len()],
            a: first.a,
            df: df0,
        });
        knots.push(PathKnot {
            lambda: 0.0,
            event: Event::Start,
            df: df0,
        });
        return PathRun {
            knots,
            segments,
            termination: Termination::Completed,
        };
    }
    let i1 = first
        .a
        .iter()
        .position(|v| v.abs() >= lambda1 * (1.0 - TIE_TOL))
        .unwrap();
    let s1 = first.a[i1].signum();
    segments.push(DualSegment {
        lambda_hi: f64::INFINITY,
        lambda_lo: lambda1,
        boundary: bnd.clone(),
        b: vec![0.0; first.a.len()],
        a: first.a,
        df: df0,
    });

    let mut lambda_k = lambda1;
    let mut pending = Event::Hit {
        coordinate: i1,
        sign: s1,
    };
    let mut last: Option<Event>;
    let mut left_sign = 0.0;
    let termination = loop {
        // Apply the event found at `lambda_k`.
        match pending {
            Event::Hit { coordinate, sign } => {
                if let Err(e) = oracle.add_boundary(coordinate) {
                    break Termination::Aborted {
                        step: knots.len() + 1,
                        message: e.to_string(),
                    };
                }
                bnd.insert(coordinate, sign);
            }
            Event::Leave { coordinate } => {
                if let Err(e) = oracle.remove_boundary(coordinate) {
                    break Termination::Aborted {
                        step: knots.len() + 1,
                        message: e.to_string(),
                    };
                }
                left_sign = bnd.remove(coordinate).unwrap_or(0.0);
            }
            Event::Start => unreachable!(),
        }
        let df = oracle.df();
        knots.push(PathKnot {
            lambda: lambda_k,
            event: pending,
            df,
        });
        last = Some(pending);

        if df > max_df {
            break Termination::MaxDf;
        }
        if knots.len() >= opts.max_steps {
            break Termination::MaxSteps;
        }
        let q = match oracle.step(&bnd).and_then(finite) {
            Ok(q) => q,
            Err(e) => {
                break Termination::Aborted {
                    step: knots.len() + 1,
                    message: e.to_string(),
                }
            }
        };
        let interior = bnd.interior(m);
        let just_left = match last {
            Some(Event::Leave { coordinate }) => interior
                .binary_search(&coordinate)
                .ok()
                .map(|pos| (pos, left_sign)),
            _ => None,
        };
        let just_hit = match last {
            Some(Event::Hit { coordinate, .. }) => bnd.indices.binary_search(&coordinate).ok(),
            _ => None,
        };
        let hit = hitting_times_excluding(&q.a, &q.b, lambda_k, just_left);
        let leave = leaving_times_excluding(&q.c, &q.d, lambda_k, just_hit);
        let (next, event) = match (hit, leave) {
            (Some(h), Some(l)) if l.lambda > h.lambda + TIE_TOL * lambda_k => (
                l.lambda,
                Event::Leave {
                    coordinate: bnd.indices[l.position],
                },
            ),
            (Some(h), _) => (
                h.lambda,
                Event::Hit {
                    coordinate: interior[h.position],
                    sign: h.sign,
                },
            ),
            (None, Some(l)) => (
                l.lambda,
                Event::Leave {
                    coordinate: bnd.indices[l.position],
                },
            ),
            (None, None) => (0.0, Event::Start),
        };
        let next = if next <= f64::EPSILON * lambda1 {
            0.0
        } else {
            next
        };
        if opts.record_segments {
            segments.push(DualSegment {
                lambda_hi: lambda_k,
                lambda_lo: next,
                boundary: bnd.clone(),
                a: q.a,
                b: q.b,
                df,
            });
        } else {
            segments.truncate(0);
        }
        if next == 0.0 {
            break Termination::Completed;
        }
        if next < opts.min_lambda {
            break Termination::MinLambda;
        }
        lambda_k = next;
        pending = event;
    };
    PathRun {
        knots,
        segments,
        termination,
    }
}

/// The computed path together with the data needed to evaluate `β` at any covered `λ`.
#[derive(Clone, Debug)]
pub struct SolutionPath {
    y: Vec<f64>,
    penalty: SparseMatrix,
    design: Option<DesignMatrix>,
    knots: Vec<PathKnot>,
    segments: Vec<DualSegment>,
    termination: Termination,
}

impl SolutionPath {
    pub fn from_parts(
        y: Vec<f64>,
        penalty: SparseMatrix,
        design: Option<DesignMatrix>,
        run: PathRun,
    ) -> Result<Self> {
        let n = design.as_ref().map_or(penalty.cols(), |d| d.rows());
        if y.len() != n {
            return Err(Error::dim(format!(
                "y has length {} but the problem expects {n}",
                y.len()
            )));
        }
        if let Some(d) = &design {
            if d.cols() != penalty.cols() {
                return Err(Error::dim("design and penalty disagree on p"));
            }
        }
        for s in &run.segments {
            if s.a.len() + s.boundary.len() != penalty.rows() || s.b.len() != s.a.len() {
                return Err(Error::dim("segment does not match the penalty dimensions"));
            }
        }
        Ok(SolutionPath {
            y,
            penalty,
            design,
            knots: run.knots,
            segments: run.segments,
            termination: run.termination,
        })
    }

    pub fn knots(&self) -> &[PathKnot] {
        &self.knots
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.knots.iter().map(|k| k.lambda).collect()
    }

    pub fn segments(&self) -> &[DualSegment] {
        &self.segments
    }

    pub fn termination(&self) -> &Termination {
        &self.termination
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn penalty(&self) -> &SparseMatrix {
        &self.penalty
    }

    pub fn design(&self) -> Option<&DesignMatrix> {
        self.design.as_ref()
    }

    pub fn num_dual(&self) -> usize {
        self.penalty.rows()
    }

    pub fn num_primal(&self) -> usize {
        self.penalty.cols()
    }

    /// Smallest `λ` covered by the recorded segments.
    pub fn min_lambda(&self) -> Option<f64> {
        self.segments.last().map(|s| s.lambda_lo)
    }

    fn segment_index(&self, lambda: f64) -> Result<usize> {
        let min = self.min_lambda().ok_or(Error::OutOfRange {
            requested: lambda,
            min: f64::INFINITY,
        })?;
        if !(lambda >= min) {
            return Err(Error::OutOfRange {
                requested: lambda,
                min,
            });
        }
        Ok(self.segments.partition_point(|s| s.lambda_lo > lambda))
    }

    pub fn segment_at(&self, lambda: f64) -> Result<&DualSegment> {
        Ok(&self.segments[self.segment_index(lambda)?])
    }

    /// `û(λ)` over all rows of `D`.
    pub fn dual_at(&self, lambda: f64) -> Result<Vec<f64>> {
        Ok(segment_dual(
            self.segment_at(lambda)?,
            self.num_dual(),
            lambda,
        ))
    }

    /// `β(λ) = y − Dᵀû(λ)`, or the solution of `XᵀXβ = Xᵀy − Dᵀû(λ)` with a design.
    pub fn primal_at(&self, lambda: f64) -> Result<Vec<f64>> {
        let u = self.dual_at(lambda)?;
        let rows: Vec<usize> = (0..self.num_dual()).collect();
        let dtu = tr_mul_rows(&self.penalty, &rows, &u);
        Ok(match &self.design {
            None => self.y.iter().zip(&dtu).map(|(y, v)| y - v).collect(),
            Some(x) => x.primal(&self.y, &dtu),
        })
    }

    /// `df` of the segment containing `λ`.
    pub fn df_at(&self, lambda: f64) -> Result<usize> {
        Ok(self.segment_at(lambda)?.df)
    }

    /// Largest `λ` whose segment has exactly `df` degrees of freedom.
    pub fn lambda_for_df(&self, df: usize) -> Option<f64> {
        self.segments.iter().find(|s| s.df == df).map(|s| {
            if s.lambda_hi.is_finite() {
                s.lambda_hi
            } else {
                s.lambda_lo
            }
        })
    }

    /// Optimality diagnostics at `λ`.
    pub fn kkt(&self, lambda: f64) -> Result<KktReport> {
        let u = self.dual_at(lambda)?;
        let beta = self.primal_at(lambda)?;
        let rows: Vec<usize> = (0..self.num_dual()).collect();
        let dbeta = mul_rows(&self.penalty, &rows, &beta);
        let dual_excess = u
            .iter()
            .map(|v| v.abs() - lambda)
            .fold(f64::NEG_INFINITY, f64::max)
            .max(0.0);
        let mut sign_violation = 0.0_f64;
        for (ui, di) in u.iter().zip(&dbeta) {
            if di.abs() > KKT_ACTIVE_TOL {
                sign_violation = sign_violation.max((ui - lambda * di.signum()).abs());
            }
        }
        let dtu = tr_mul_rows(&self.penalty, &rows, &u);
        let fit: Vec<f64> = match &self.design {
            None => beta.iter().zip(&self.y).map(|(b, y)| b - y).collect(),
            Some(x) => x.gram_residual(&beta, &self.y),
        };
        let gradient = fit
            .iter()
            .zip(&dtu)
            .map(|(f, v)| f + v)
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt();
        Ok(KktReport {
            dual_excess,
            sign_violation,
            gradient,
        })
    }
}

/// Threshold on `|(Dβ)_i|` above which the sign condition is checked.
pub const KKT_ACTIVE_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug)]
pub struct KktReport {
    /// `max(0, ‖û‖_∞ − λ)`.
    pub dual_excess: f64,
    /// `max |û_i − λ·sign((Dβ)_i)|` over rows with `|(Dβ)_i| > 1e−7`.
    pub sign_violation: f64,
    /// `‖Xᵀ(Xβ − y) + Dᵀû‖`.
    pub gradient: f64,
}

fn segment_dual(s: &DualSegment, m: usize, lambda: f64) -> Vec<f64> {
    let mut u = vec![0.0; m];
    let mut next = 0;
    let mut bi = s.boundary.indices.iter().zip(&s.boundary.signs).peekable();
    for (i, ui) in u.iter_mut().enumerate() {
        if let Some(&(&j, &sg)) = bi.peek() {
            if j == i {
                *ui = lambda * sg;
                bi.next();
                continue;
            }
        }
        // On the first segment b = 0 and û is the constant Step-1 solution.
        *ui = if s.lambda_hi.is_infinite() {
            s.a[next]
        } else {
            s.a[next] - lambda * s.b[next]
        };
        next += 1;
    }
    u
}

/// Which least-squares oracle drives an `X = I` path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Backend {
    /// Trend filtering and graphs use their specialized solvers, custom penalties the QR one.
    #[default]
    Auto,
    /// Dense QR updating; works for any penalty.
    Generic,
    TrendFilter,
    Graph,
}

/// Builds the `X = I` interior solver for `spec`.
pub fn interior_solver(spec: &PenaltySpec, backend: Backend) -> Result<Box<dyn InteriorSolver>> {
    let backend = match (backend, spec) {
        (Backend::Auto, PenaltySpec::TrendFilter { .. }) => Backend::TrendFilter,
        (Backend::Auto, PenaltySpec::FusedGraph { .. })
        | (Backend::Auto, PenaltySpec::SparseFusedGraph { .. }) => Backend::Graph,
        (Backend::Auto, PenaltySpec::Custom { .. }) => Backend::Generic,
        (b, _) => b,
    };
    Ok(match backend {
        Backend::TrendFilter => match spec {
            PenaltySpec::TrendFilter { order, p } => Box::new(TfSolver::new(*order, *p)),
            PenaltySpec::FusedGraph { p, edges }
                if edges.len() + 1 == *p
                    && edges.iter().enumerate().all(|(l, &e)| e == (l, l + 1)) =>
            {
                Box::new(TfSolver::new(0, *p))
            }
            _ => {
                return Err(Error::Unsupported(
                    "trend-filter backend needs a difference operator or a chain graph".into(),
                ))
            }
        },
        Backend::Graph => Box::new(GraphSolver::new(spec)?),
        Backend::Generic | Backend::Auto => Box::new(GenericQrSolver::new(
            &crate::operators::to_dense(&spec.matrix()),
            0,
        )),
    })
}

/// Solution path of `min ½‖y − β‖² + λ‖Dβ‖₁`.
pub fn solve_path(
    y: &[f64],
    spec: &PenaltySpec,
    backend: Backend,
    opts: &PathOptions,
) -> Result<SolutionPath> {
    if y.len() != spec.p() {
        return Err(Error::dim(format!(
            "y has length {} but the penalty has {} columns",
            y.len(),
            spec.p()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("y contains non-finite values"));
    }
    let d = spec.matrix();
    let mut oracle = IdentityDesign::new(y, d.clone(), interior_solver(spec, backend)?)?;
    let run = run_path(&mut oracle, spec.p(), opts);
    SolutionPath::from_parts(y.to_vec(), d, None, run)
}

/// Dense helper used by the generic route on transformed problems.
pub(crate) fn dense_rows(d: &Matrix, rows: &[usize]) -> Matrix {
    Matrix::from_rows(
        &rows.iter().map(|&i| d.row(i).to_vec()).collect::<Vec<_>>(),
        d.cols(),
    )
}
