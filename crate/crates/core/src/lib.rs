//! Numerical fractional calculus on an interval.
//!
//! Riemann–Liouville integrals and derivatives, the Marchaud and Caputo
//! derivatives, and the functionals (L^p, total variation, SBV norm,
//! Gagliardo semi-norm, Hölder exponent) used to study how these operators
//! act on functions of bounded variation. The [`limits`] module packages
//! the `s → 0`, `s → 1` and `ε → 0` convergence experiments.

pub mod error;
pub mod funcspace;
pub mod limits;
pub mod norms;
pub mod operators;
pub mod quadrature;
pub mod special;

pub use error::{Error, Result};
pub use funcspace::{CorpusFunction, Grid, GridField, Jump, PowerTerm, SbvFunction, Side};
pub use operators::{AsField, FracParams, OperatorResult};
