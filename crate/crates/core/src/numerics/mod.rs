//! Complex linear algebra and random sampling primitives.
//!
//! Everything here is small and dense: the matrices involved are at most a
//! few hundred entries, so the routines favor clarity and reproducibility
//! over BLAS-level throughput.

mod matrix;
mod rng;

pub use matrix::{kron_vec, ComplexMatrix};
pub use rng::{derive_seed, RngStream};

pub type Complex = num_complex::Complex64;

/// Errors raised by the linear algebra kernels.
#[derive(Debug, thiserror::Error)]
pub enum LinAlgError {
    #[error("dimension mismatch: left is {lhs_rows}x{lhs_cols}, right is {rhs_rows}x{rhs_cols}")]
    DimensionMismatch {
        lhs_rows: usize,
        lhs_cols: usize,
        rhs_rows: usize,
        rhs_cols: usize,
    },
    #[error("matrix is singular to working precision (pivot magnitude {pivot:.3e} at column {col})")]
    Singular { pivot: f64, col: usize },
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
}
