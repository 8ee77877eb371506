//! Optimal local conversion of bipartite pure states.
//!
//! * [`schmidt`]: Schmidt vectors, amplitude states, reduced density operators, majorization.
//! * [`monotones`]: the tail-sum monotones `E_k` and their spectral form `f_k`.
//! * [`conversion`]: optimal probability, breakpoints, intermediate state and filter.
//! * [`locc`]: executable protocols, exhaustive and Monte-Carlo runs, monotone audits.
//! * [`ordering`]: pairwise comparison, the three-state cycle, non-additivity search.
//! * [`descriptor`]: JSON state files, plan and report serialization.
//!
//! Vector-level arithmetic is generic over [`Scalar`], implemented for exact [`Rational`]
//! and `f64`.

pub mod conversion;
pub mod descriptor;
pub mod error;
pub mod exec;
pub mod locc;
pub mod monotones;
pub mod ordering;
pub mod sampling;
pub mod scalar;
pub mod schmidt;

pub use error::{Error, Result};
pub use exec::Execution;
pub use scalar::{Rational, Scalar, Tolerance};
pub use schmidt::{BipartiteState, CMatrix, DensityOperator, SchmidtVector};
