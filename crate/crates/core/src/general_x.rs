//! Paths for `min ½‖y − Xβ‖² + λ‖Dβ‖₁` with a full-column-rank design `X`.
//!
//! Two routes produce the same path: transforming to `(XX⁺y, DX⁺)` and running the generic
//! solver, or keeping the structured `D` and projecting through `X·null(D_{−B})` at each step.

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::dense::{cholesky_solve, Matrix};
use crate::error::{Error, Result};
use crate::givens_qr::{qr_full, QrFactor};
use crate::operators::{
    from_dense, null_basis, to_dense, tr_mul_rows, BoundaryPartition, PenaltySpec, SparseMatrix,
};
use crate::path::{
    boundary_slopes, interior_solver, run_path, Backend, DualOracle, GenericQrSolver,
    IdentityDesign, InteriorSolver, PathOptions, SolutionPath, StepQuantities,
};

/// An `n×p` design of rank `p`, with its QR factor.
#[derive(Debug)]
pub struct DesignMatrix {
    x: Matrix,
    qr: QrFactor,
    normal_solves: AtomicUsize,
}

impl Clone for DesignMatrix {
    fn clone(&self) -> Self {
        DesignMatrix {
            x: self.x.clone(),
            qr: self.qr.clone(),
            normal_solves: AtomicUsize::new(self.normal_solves()),
        }
    }
}

impl DesignMatrix {
    /// Fails with [`Error::RankDeficient`] unless `X` has full column rank; use
    /// [`ridge_augment`] in that case.
    pub fn new(x: Matrix) -> Result<Self> {
        if x.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::input("X contains non-finite values"));
        }
        let qr = qr_full(&x)?;
        Ok(DesignMatrix {
            x,
            qr,
            normal_solves: AtomicUsize::new(0),
        })
    }

    pub fn rows(&self) -> usize {
        self.x.rows()
    }

    pub fn cols(&self) -> usize {
        self.x.cols()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.x
    }

    /// Number of `p×p` normal-equation solves performed so far.
    pub fn normal_solves(&self) -> usize {
        self.normal_solves.load(Ordering::Relaxed)
    }

    /// Solves `XᵀXβ = Xᵀy − dtu`.
    pub fn primal(&self, y: &[f64], dtu: &[f64]) -> Vec<f64> {
        self.normal_solves.fetch_add(1, Ordering::Relaxed);
        let rhs: Vec<f64> = self
            .x
            .tr_mul_vec(y)
            .iter()
            .zip(dtu)
            .map(|(a, b)| a - b)
            .collect();
        self.qr.solve_normal(&rhs)
    }

    /// `Xᵀ(Xβ − y)`.
    pub fn gram_residual(&self, beta: &[f64], y: &[f64]) -> Vec<f64> {
        let r: Vec<f64> = self
            .x
            .mul_vec(beta)
            .iter()
            .zip(y)
            .map(|(a, b)| a - b)
            .collect();
        self.x.tr_mul_vec(&r)
    }

    /// `XX⁺y = Q₁Q₁ᵀy`.
    pub fn project(&self, y: &[f64]) -> Vec<f64> {
        let p = self.cols();
        let q = self.qr.q();
        let mut c = vec![0.0; p];
        for (r, &yr) in y.iter().enumerate() {
            for (ci, &qv) in c.iter_mut().zip(&q.row(r)[..p]) {
                *ci += qv * yr;
            }
        }
        (0..self.rows())
            .map(|r| q.row(r)[..p].iter().zip(&c).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `(X⁺)ᵀd = Q₁R₁⁻ᵀd`.
    pub fn pinv_transpose_apply(&self, d: &[f64]) -> Vec<f64> {
        let p = self.cols();
        let r = self.qr.r();
        let mut t = d.to_vec();
        for i in 0..p {
            let mut s = t[i];
            for k in 0..i {
                s -= r[(k, i)] * t[k];
            }
            t[i] = s / r[(i, i)];
        }
        let q = self.qr.q();
        (0..self.rows())
            .map(|row| q.row(row)[..p].iter().zip(&t).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// `(XX⁺y, DX⁺)` as an `m×n` dense matrix.
pub fn transform_generic(
    y: &[f64],
    x: &DesignMatrix,
    d: &SparseMatrix,
) -> Result<(Vec<f64>, Matrix)> {
    if y.len() != x.rows() || d.cols() != x.cols() {
        return Err(Error::dim(format!(
            "y has length {}, X is {}x{}, D has {} columns",
            y.len(),
            x.rows(),
            x.cols(),
            d.cols()
        )));
    }
    let dd = to_dense(d);
    let rows: Vec<Vec<f64>> = (0..dd.rows())
        .map(|i| x.pinv_transpose_apply(dd.row(i)))
        .collect();
    let dt = Matrix::from_rows(&rows, x.rows());
    if cfg!(debug_assertions) {
        // Xᵀ D̃ᵀ = Dᵀ holds only for full-column-rank X.
        for i in 0..dd.rows() {
            let back = x.matrix().tr_mul_vec(dt.row(i));
            let err = back
                .iter()
                .zip(dd.row(i))
                .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
            debug_assert!(err <= 1e-8 * (1.0 + dd.max_abs()), "XᵀD̃ᵀ ≠ Dᵀ: {err}");
        }
    }
    Ok((x.project(y), dt))
}

/// `[X; √(2ε)I]` and `y` padded with `p` zeros: adds `ε‖β‖²` to the criterion.
pub fn ridge_augment(y: &[f64], x: &Matrix, eps: f64) -> Result<(Vec<f64>, Matrix)> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::input(format!(
            "ridge parameter must be positive, got {eps}"
        )));
    }
    if y.len() != x.rows() {
        return Err(Error::dim(format!(
            "y has length {}, X has {} rows",
            y.len(),
            x.rows()
        )));
    }
    let (n, p) = x.shape();
    let mut xa = Matrix::zeros(n + p, p);
    for i in 0..n {
        xa.row_mut(i).copy_from_slice(x.row(i));
    }
    let s = (2.0 * eps).sqrt();
    for j in 0..p {
        xa[(n + j, j)] = s;
    }
    let mut ya = y.to_vec();
    ya.resize(n + p, 0.0);
    Ok((ya, xa))
}

/// `Hθ` with `(HᵀXᵀXH)θ = Hᵀg`, one `q×q` solve.
fn null_component(gram: &Matrix, h: &Matrix, g: &[f64]) -> Result<Vec<f64>> {
    let q = h.cols();
    if q == 0 {
        return Ok(vec![0.0; h.rows()]);
    }
    let gh = gram.matmul(h);
    let m = h.transpose().matmul(&gh);
    let theta = cholesky_solve(&m, &h.tr_mul_vec(g)).ok_or_else(|| {
        Error::Contract(
            "HᵀXᵀXH is singular: H is not independent or X loses rank on its span".into(),
        )
    })?;
    Ok(h.mul_vec(&theta))
}

/// `Xᵀc − XᵀXH(HᵀXᵀXH)⁻¹HᵀXᵀc`.
pub fn project_through_design(c: &[f64], x: &Matrix, h: &Matrix) -> Result<Vec<f64>> {
    if c.len() != x.rows() || h.rows() != x.cols() {
        return Err(Error::dim("project_through_design: incompatible shapes"));
    }
    let gram = x.transpose().matmul(x);
    let xtc = x.tr_mul_vec(c);
    let beta = null_component(&gram, h, &xtc)?;
    let gb = gram.mul_vec(&beta);
    Ok(xtc.iter().zip(&gb).map(|(a, b)| a - b).collect())
}

/// Sizes of the linear systems in `X` solved while the path runs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GramSolveStats {
    pub solves: usize,
    /// Largest `q` of any `q×q` system `HᵀXᵀXH`.
    pub largest: usize,
    /// Solves whose system was larger than the current `dim null(D_{−B})`.
    pub oversized: usize,
}

/// Oracle that keeps the structured `D`: each step projects through `X·null(D_{−B})` and hands
/// the resulting right-hand sides to the `X = I` backend.
pub struct SpecializedDesign<S> {
    spec: PenaltySpec,
    d: SparseMatrix,
    gram: Matrix,
    xty: Vec<f64>,
    solver: S,
    stats: GramSolveStats,
}

impl<S: InteriorSolver> SpecializedDesign<S> {
    pub fn new(y: &[f64], x: &Matrix, spec: &PenaltySpec, solver: S) -> Result<Self> {
        if y.len() != x.rows() || x.cols() != spec.p() {
            return Err(Error::dim(format!(
                "y has length {}, X is {}x{}, penalty has {} columns",
                y.len(),
                x.rows(),
                x.cols(),
                spec.p()
            )));
        }
        if matches!(spec, PenaltySpec::Custom { .. }) {
            return Err(Error::Unsupported(
                "the specialized route needs a trend-filter or graph penalty".into(),
            ));
        }
        Ok(SpecializedDesign {
            spec: spec.clone(),
            d: spec.matrix(),
            gram: x.transpose().matmul(x),
            xty: x.tr_mul_vec(y),
            solver,
            stats: GramSolveStats::default(),
        })
    }

    pub fn stats(&self) -> GramSolveStats {
        self.stats
    }

    fn null_part(&mut self, h: &Matrix, g: &[f64]) -> Result<Vec<f64>> {
        let q = h.cols();
        if q > 0 {
            self.stats.solves += 1;
            self.stats.largest = self.stats.largest.max(q);
            if q > self.solver.nullity() {
                self.stats.oversized += 1;
            }
        }
        null_component(&self.gram, h, g)
    }
}

impl<S: InteriorSolver> DualOracle for SpecializedDesign<S> {
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
        let h = null_basis(&self.spec, b)?;
        let dbs = tr_mul_rows(&self.d, &b.indices, &b.signs);
        // On the segment β(λ) = β₀ − λβ₁ lies in null(D_{−B}).
        let xty = self.xty.clone();
        let beta0 = self.null_part(&h, &xty)?;
        let beta1 = self.null_part(&h, &dbs)?;
        let g0 = self.gram.mul_vec(&beta0);
        let g1 = self.gram.mul_vec(&beta1);
        let v: Vec<f64> = self.xty.iter().zip(&g0).map(|(a, b)| a - b).collect();
        let w: Vec<f64> = dbs.iter().zip(&g1).map(|(a, b)| a - b).collect();
        let mut sol = self.solver.solve(&[v, w])?;
        let bh = sol.pop().unwrap();
        let a = sol.pop().unwrap();
        if b.is_empty() {
            return Ok(StepQuantities {
                b: vec![0.0; a.len()],
                a,
                ..Default::default()
            });
        }
        // `β = Hθ` with `H` built from exact indicator or polynomial columns: only the final
        // differencing rounds.
        let zeros = vec![0.0; beta0.len()];
        let (c, d) = boundary_slopes(&self.d, b, (&beta0, &beta1), (&zeros, &zeros));
        Ok(StepQuantities { a, b: bh, c, d })
    }

    fn df(&self) -> usize {
        self.solver.nullity()
    }
}

/// How a general-`X` path is computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Route {
    /// Specialized for trend-filter and graph penalties, transformed otherwise.
    #[default]
    Auto,
    /// Run the generic solver on `(XX⁺y, DX⁺)`.
    Transformed,
    /// Project through `X·null(D_{−B})` and reuse the structured `X = I` backend.
    Specialized,
}

/// Path through the transformed problem `(XX⁺y, DX⁺)`.
pub fn transformed_route(
    y: &[f64],
    design: DesignMatrix,
    spec: &PenaltySpec,
    opts: &PathOptions,
) -> Result<SolutionPath> {
    let d = spec.matrix();
    let (yt, dt) = transform_generic(y, &design, &d)?;
    let solver = GenericQrSolver::new(&dt, design.rows() - design.cols());
    let mut oracle = IdentityDesign::new(&yt, from_dense(&dt), solver)?;
    let run = run_path(&mut oracle, design.cols(), opts);
    SolutionPath::from_parts(y.to_vec(), d, Some(design), run)
}

/// Path through the structured route, with the sizes of the systems it solved.
pub fn specialized_route(
    y: &[f64],
    design: DesignMatrix,
    spec: &PenaltySpec,
    opts: &PathOptions,
) -> Result<(SolutionPath, GramSolveStats)> {
    let solver = interior_solver(spec, Backend::Auto)?;
    let mut oracle = SpecializedDesign::new(y, design.matrix(), spec, solver)?;
    let run = run_path(&mut oracle, design.cols(), opts);
    let stats = oracle.stats();
    Ok((
        SolutionPath::from_parts(y.to_vec(), spec.matrix(), Some(design), run)?,
        stats,
    ))
}

/// Solution path of `min ½‖y − Xβ‖² + λ‖Dβ‖₁`.
pub fn solve_path_with_design(
    y: &[f64],
    x: Matrix,
    spec: &PenaltySpec,
    route: Route,
    opts: &PathOptions,
) -> Result<SolutionPath> {
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("y contains non-finite values"));
    }
    if x.cols() != spec.p() || y.len() != x.rows() {
        return Err(Error::dim(format!(
            "y has length {}, X is {}x{}, penalty has {} columns",
            y.len(),
            x.rows(),
            x.cols(),
            spec.p()
        )));
    }
    let design = DesignMatrix::new(x)?;
    let route = match (route, spec) {
        (Route::Auto, PenaltySpec::Custom { .. }) => Route::Transformed,
        (Route::Auto, _) => Route::Specialized,
        (r, _) => r,
    };
    match route {
        Route::Specialized => specialized_route(y, design, spec, opts).map(|r| r.0),
        _ => transformed_route(y, design, spec, opts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::solve_path;
    use crate::test_support::{max_diff, oracle_min_norm, random_matrix, to_na};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pinv(x: &Matrix) -> Matrix {
        let p = to_na(x).pseudo_inverse(1e-14).unwrap();
        Matrix::from_row_slice(p.nrows(), p.ncols(), p.transpose().as_slice())
    }

    fn random_full_rank(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Matrix {
        loop {
            let x = random_matrix(rng, n, p);
            if qr_full(&x).is_ok() {
                return x;
            }
        }
    }

    #[test]
    fn transform_matches_pseudoinverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_full_rank(&mut rng, 8, 3);
        let d = PenaltySpec::trend_filter(0, 3).matrix();
        let y: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let dm = DesignMatrix::new(x.clone()).unwrap();
        let (yt, dt) = transform_generic(&y, &dm, &d).unwrap();
        let xp = pinv(&x);
        let want = to_dense(&d).matmul(&xp);
        assert!(dt.max_abs_diff(&want) < 1e-10);
        assert!(max_diff(&yt, &x.matmul(&xp).mul_vec(&y)) < 1e-10);
    }

    #[test]
    fn transform_identity_and_orthogonal() {
        let d = PenaltySpec::trend_filter(1, 4).matrix();
        let y = [1.0, -2.0, 0.5, 3.0];
        let (yt, dt) =
            transform_generic(&y, &DesignMatrix::new(Matrix::identity(4)).unwrap(), &d).unwrap();
        assert!(max_diff(&yt, &y) < 1e-14);
        assert!(dt.max_abs_diff(&to_dense(&d)) < 1e-14);

        let (c, s) = (0.6, 0.8);
        let q = Matrix::from_rows(
            &[
                vec![c, -s, 0.0, 0.0],
                vec![s, c, 0.0, 0.0],
                vec![0.0, 0.0, 0.0, 1.0],
                vec![0.0, 0.0, 1.0, 0.0],
            ],
            4,
        );
        let (_, dt) = transform_generic(&y, &DesignMatrix::new(q.clone()).unwrap(), &d).unwrap();
        assert!(dt.max_abs_diff(&to_dense(&d).matmul(&q.transpose())) < 1e-14);
    }

    #[test]
    fn rank_deficient_design_is_rejected() {
        let x = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0], vec![0.0, 0.0]], 2);
        assert!(matches!(
            DesignMatrix::new(x),
            Err(Error::RankDeficient { .. })
        ));
        assert!(ridge_augment(&[1.0], &Matrix::zeros(1, 1), 0.0).is_err());
        let (ya, xa) = ridge_augment(&[1.0, 2.0], &Matrix::zeros(2, 3), 0.5).unwrap();
        assert_eq!(ya, vec![1.0, 2.0, 0.0, 0.0, 0.0]);
        assert!(
            xa.max_abs_diff(&{
                let mut m = Matrix::zeros(5, 3);
                for j in 0..3 {
                    m[(2 + j, j)] = 1.0;
                }
                m
            }) == 0.0
        );
    }

    #[test]
    fn projection_examples() {
        let x = Matrix::from_rows(
            &[
                vec![1.0, 0.0, 0.0],
                vec![0.0, 2.0, 0.0],
                vec![0.0, 0.0, 3.0],
            ],
            3,
        );
        let c = [1.0, 1.0, 1.0];
        assert_eq!(
            project_through_design(&c, &x, &Matrix::zeros(3, 0)).unwrap(),
            x.tr_mul_vec(&c)
        );
        let h = Matrix::from_columns(&[vec![1.0; 3]], 3);
        let xh = x.matmul(&h);
        let m = xh.transpose().matmul(&xh);
        let proj = xh
            .matmul(&Matrix::from_row_slice(1, 1, &[1.0 / m[(0, 0)]]))
            .matmul(&xh.transpose());
        let resid: Vec<f64> = c.iter().zip(proj.mul_vec(&c)).map(|(a, b)| a - b).collect();
        let want = x.tr_mul_vec(&resid);
        assert!(max_diff(&project_through_design(&c, &x, &h).unwrap(), &want) < 1e-14);
        // X = I reduces to removing the mean.
        let got = project_through_design(&[1.0, 2.0, 6.0], &Matrix::identity(3), &h).unwrap();
        assert!(max_diff(&got, &[-2.0, -1.0, 3.0]) < 1e-14);
    }

    #[test]
    fn min_norm_solutions_agree_through_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..20 {
            let p = rng.gen_range(3..12);
            let n = p + rng.gen_range(0..6);
            let x = random_full_rank(&mut rng, n, p);
            let spec = if trial % 2 == 0 {
                PenaltySpec::trend_filter(trial % 3, p)
            } else {
                PenaltySpec::chain(p)
            };
            let d = to_dense(&spec.matrix());
            let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let dxp = d.matmul(&pinv(&x));
            let want = oracle_min_norm(&dxp.transpose(), &c);
            let h = null_basis(&spec, &BoundaryPartition::empty()).unwrap();
            let dv = project_through_design(&c, &x, &h).unwrap();
            let got = oracle_min_norm(&d.transpose(), &dv);
            assert!(max_diff(&got, &want) < 1e-8, "trial {trial}");
        }
    }

    fn assert_same_path(a: &SolutionPath, b: &SolutionPath, tol: f64) {
        assert_eq!(a.knots().len(), b.knots().len());
        for (ka, kb) in a.knots().iter().zip(b.knots()) {
            assert!(
                (ka.lambda - kb.lambda).abs() <= tol * (1.0 + ka.lambda),
                "{ka:?} vs {kb:?}"
            );
            assert_eq!(ka.event, kb.event);
            assert_eq!(ka.df, kb.df);
        }
    }

    #[test]
    fn routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for spec in [
            PenaltySpec::trend_filter(1, 6),
            PenaltySpec::chain(5),
            PenaltySpec::sparse_fused(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)], 0.7).unwrap(),
        ] {
            let p = spec.p();
            let n = 2 * p;
            let x = random_full_rank(&mut rng, n, p);
            let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let t = transformed_route(
                &y,
                DesignMatrix::new(x.clone()).unwrap(),
                &spec,
                &PathOptions::default(),
            )
            .unwrap();
            let (s, stats) = specialized_route(
                &y,
                DesignMatrix::new(x).unwrap(),
                &spec,
                &PathOptions::default(),
            )
            .unwrap();
            assert_same_path(&t, &s, 1e-8);
            assert_eq!(stats.oversized, 0);
            assert_eq!(s.design().unwrap().normal_solves(), 0);
            let lam = s.lambdas()[s.lambdas().len() / 2];
            assert!(max_diff(&t.primal_at(lam).unwrap(), &s.primal_at(lam).unwrap()) < 1e-7);
            let kkt = s.kkt(lam).unwrap();
            assert!(kkt.gradient < 1e-7 && kkt.sign_violation < 1e-7);
            assert_eq!(s.design().unwrap().normal_solves(), 2);
        }
    }

    #[test]
    fn identity_design_matches_plain_path() {
        let y = [0.3, 2.0, -1.0, 4.0, 4.5, 0.0, 1.0];
        let spec = PenaltySpec::trend_filter(1, 7);
        let plain = solve_path(&y, &spec, Backend::Auto, &PathOptions::default()).unwrap();
        for route in [Route::Transformed, Route::Specialized] {
            let px = solve_path_with_design(
                &y,
                Matrix::identity(7),
                &spec,
                route,
                &PathOptions::default(),
            )
            .unwrap();
            assert_same_path(&plain, &px, 1e-10);
        }
    }

    #[test]
    fn small_ridge_barely_moves_the_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = random_full_rank(&mut rng, 8, 5);
        let y: Vec<f64> = (0..8).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let spec = PenaltySpec::chain(5);
        let base =
            solve_path_with_design(&y, x.clone(), &spec, Route::Auto, &PathOptions::default())
                .unwrap();
        let (ya, xa) = ridge_augment(&y, &x, 1e-8).unwrap();
        let aug =
            solve_path_with_design(&ya, xa, &spec, Route::Auto, &PathOptions::default()).unwrap();
        assert_eq!(base.knots().len(), aug.knots().len());
        for (a, b) in base.lambdas().iter().zip(aug.lambdas()) {
            assert!((a - b).abs() < 1e-4);
        }
        let mut last = f64::INFINITY;
        for eps in [0.1, 1.0, 10.0, 100.0] {
            let (ya, xa) = ridge_augment(&y, &x, eps).unwrap();
            let p = solve_path_with_design(&ya, xa, &spec, Route::Auto, &PathOptions::default())
                .unwrap();
            let nb = crate::dense::norm2(&p.primal_at(0.0).unwrap());
            assert!(nb < last);
            last = nb;
        }
    }
}
