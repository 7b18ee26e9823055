//! Exact solution paths of the generalized lasso by the dual path algorithm.

pub mod bench;
pub mod dense;
pub mod error;
pub mod general_x;
pub mod givens_qr;
pub mod graph_backend;
pub mod io;
pub mod operators;
pub mod path;
#[cfg(test)]
pub(crate) mod test_support;
pub mod tf_backend;

pub use dense::Matrix;
pub use error::{Error, Result};
