//! Python bindings. Indices are 0-based, as in the Rust library.

use ::dualpath::general_x::{solve_path_with_design, Route};
use ::dualpath::operators::PenaltySpec;
use ::dualpath::path::{
    solve_path as solve, Backend, Event, PathOptions, SolutionPath, Termination,
};
use ::dualpath::{Error, Matrix};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Dimension(_)
        | Error::Input(_)
        | Error::OutOfRange { .. }
        | Error::Unsupported(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// A computed solution path.
#[pyclass(name = "SolutionPath", frozen)]
struct PyPath(SolutionPath);

#[pymethods]
impl PyPath {
    /// Knot values, decreasing.
    #[getter]
    fn lambdas(&self) -> Vec<f64> {
        self.0.lambdas()
    }

    /// `(lambda, kind, coordinate, sign, df)` per knot; coordinate and sign are None for a start.
    fn knots(&self) -> Vec<(f64, &'static str, Option<usize>, Option<f64>, usize)> {
        self.0
            .knots()
            .iter()
            .map(|k| match k.event {
                Event::Start => (k.lambda, "start", None, None, k.df),
                Event::Hit { coordinate, sign } => {
                    (k.lambda, "hit", Some(coordinate), Some(sign), k.df)
                }
                Event::Leave { coordinate } => (k.lambda, "leave", Some(coordinate), None, k.df),
            })
            .collect()
    }

    #[getter]
    fn termination(&self) -> String {
        match self.0.termination() {
            Termination::Completed => "completed".into(),
            Termination::MaxSteps => "max_steps".into(),
            Termination::MinLambda => "min_lambda".into(),
            Termination::MaxDf => "max_df".into(),
            Termination::Aborted { step, message } => format!("aborted at step {step}: {message}"),
        }
    }

    fn primal_at(&self, lam: f64) -> PyResult<Vec<f64>> {
        self.0.primal_at(lam).map_err(to_py)
    }

    fn dual_at(&self, lam: f64) -> PyResult<Vec<f64>> {
        self.0.dual_at(lam).map_err(to_py)
    }

    fn df_at(&self, lam: f64) -> PyResult<usize> {
        self.0.df_at(lam).map_err(to_py)
    }

    /// Largest knot whose df equals `df`, or None.
    fn lambda_for_df(&self, df: usize) -> Option<f64> {
        self.0.lambda_for_df(df)
    }

    fn __len__(&self) -> usize {
        self.0.knots().len()
    }

    fn __repr__(&self) -> String {
        format!(
            "SolutionPath(knots={}, termination={:?})",
            self.0.knots().len(),
            self.termination()
        )
    }
}

/// Solution path of the generalized lasso.
///
/// `problem` is one of "fl1d", "tf", "flgraph", "sfl", "custom". `x`, when given, is a list of rows.
#[pyfunction]
#[pyo3(signature = (
    y, problem, *, order=None, edges=None, alpha=None, triplets=None, m=None, x=None,
    max_steps=2000, min_lambda=0.0, max_df=None
))]
#[allow(clippy::too_many_arguments)]
fn solve_path(
    py: Python<'_>,
    y: Vec<f64>,
    problem: &str,
    order: Option<usize>,
    edges: Option<Vec<(usize, usize)>>,
    alpha: Option<f64>,
    triplets: Option<Vec<(usize, usize, f64)>>,
    m: Option<usize>,
    x: Option<Vec<Vec<f64>>>,
    max_steps: usize,
    min_lambda: f64,
    max_df: Option<usize>,
) -> PyResult<PyPath> {
    let p = match &x {
        Some(rows) => rows.first().map_or(0, Vec::len),
        None => y.len(),
    };
    let need_edges = || {
        edges
            .clone()
            .ok_or_else(|| PyValueError::new_err(format!("{problem} needs edges")))
    };
    let spec = match problem {
        "fl1d" => PenaltySpec::trend_filter(0, p),
        "tf" => PenaltySpec::trend_filter(
            order.ok_or_else(|| PyValueError::new_err("tf needs order"))?,
            p,
        ),
        "flgraph" => PenaltySpec::fused(p, &need_edges()?).map_err(to_py)?,
        "sfl" => PenaltySpec::sparse_fused(
            p,
            &need_edges()?,
            alpha.ok_or_else(|| PyValueError::new_err("sfl needs alpha"))?,
        )
        .map_err(to_py)?,
        "custom" => {
            let t = triplets.ok_or_else(|| PyValueError::new_err("custom needs triplets"))?;
            let m = m.unwrap_or_else(|| t.iter().map(|&(i, _, _)| i + 1).max().unwrap_or(0));
            PenaltySpec::custom(m, p, &t).map_err(to_py)?
        }
        other => return Err(PyValueError::new_err(format!("unknown problem {other:?}"))),
    };
    let opts = PathOptions {
        max_steps,
        min_lambda,
        max_df,
        ..PathOptions::default()
    };
    let path = py.allow_threads(|| match x {
        None => solve(&y, &spec, Backend::Auto, &opts),
        Some(rows) => {
            if rows.iter().any(|r| r.len() != p) {
                return Err(Error::Dimension("rows of x differ in length".into()));
            }
            solve_path_with_design(&y, Matrix::from_rows(&rows, p), &spec, Route::Auto, &opts)
        }
    });
    path.map(PyPath).map_err(to_py)
}

#[pymodule]
#[pyo3(name = "dualpath")]
fn dualpath_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPath>()?;
    m.add_function(wrap_pyfunction!(solve_path, m)?)?;
    Ok(())
}
