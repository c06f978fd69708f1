//! Function representations on an interval `[a, b]`.
//!
//! * [`Grid`]: uniform partition carrying the resolution.
//! * [`SbvFunction`]: an absolutely continuous part sampled on the grid
//!   (piecewise linear between nodes) plus a finite list of jumps.
//! * [`GridField`]: the working representation shared by operators and
//!   norms, a piecewise-linear regular part plus analytic power terms
//!   `c·(x − x0)₊^γ` that carry jumps and endpoint singularities exactly.
//! * [`CorpusFunction`]: named analytic test functions with exact evaluators.

mod corpus;
mod field;
mod grid;
mod sbv;

pub use corpus::{cantor_vitali_eval, weierstrass_eval, CorpusFunction};
pub use field::{GridField, PowerTerm};
pub use grid::Grid;
pub use sbv::{Jump, SbvFunction};

use serde::{Deserialize, Serialize};

/// Which endpoint an operator (or a power term) is anchored to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Anchored at `a`, acting towards the right (`a+`).
    Left,
    /// Anchored at `b`, acting towards the left (`b−`).
    Right,
}

impl Side {
    pub fn flipped(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}
