use serde::{Deserialize, Serialize};

use super::{Grid, GridField, PowerTerm};
use crate::error::{Error, Result};

/// Signed jump `p_k = u⁺(x_k) − u⁻(x_k)` at an interior point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    #[serde(rename = "x")]
    pub location: f64,
    #[serde(rename = "p")]
    pub height: f64,
}

impl Jump {
    pub fn new(location: f64, height: f64) -> Self {
        Jump { location, height }
    }
}

/// Special function of bounded variation on a grid:
///
/// `u(x) = base_value + ℓ[ac](x) + Σ_{x_k ≤ x} p_k`
///
/// where `ℓ[ac]` is the piecewise-linear interpolant of `ac_values`
/// (pinned to zero at `a`) and jumps are right-continuous.
#[derive(Debug, Clone, PartialEq)]
pub struct SbvFunction {
    grid: Grid,
    ac_values: Vec<f64>,
    jumps: Vec<Jump>,
    base_value: f64,
}

#[derive(Serialize, Deserialize)]
struct SbvDocument {
    a: f64,
    b: f64,
    n: usize,
    ac_values: Vec<f64>,
    #[serde(default)]
    jumps: Vec<Jump>,
    base_value: f64,
}

impl SbvFunction {
    pub fn new(grid: Grid, ac_values: Vec<f64>, jumps: Vec<Jump>, base_value: f64) -> Result<Self> {
        if ac_values.len() != grid.n() + 1 {
            return Err(Error::invalid(format!("expected {} ac_values, got {}", grid.n() + 1, ac_values.len())));
        }
        if ac_values[0] != 0.0 {
            return Err(Error::invalid("ac_values[0] must be 0 (the AC part is pinned at a)"));
        }
        if ac_values.iter().any(|v| !v.is_finite()) || !base_value.is_finite() {
            return Err(Error::invalid("function values must be finite"));
        }
        for j in &jumps {
            if !(j.location > grid.a() && j.location < grid.b()) {
                return Err(Error::invalid(format!(
                    "jump location {} must lie strictly inside ({}, {})",
                    j.location,
                    grid.a(),
                    grid.b()
                )));
            }
            if j.height == 0.0 || !j.height.is_finite() {
                return Err(Error::invalid(format!("jump height at {} must be finite and non-zero", j.location)));
            }
        }
        if jumps.windows(2).any(|w| w[0].location >= w[1].location) {
            return Err(Error::invalid("jumps must be sorted by strictly increasing location"));
        }
        Ok(SbvFunction { grid, ac_values, jumps, base_value })
    }

    /// `u ≡ 0` on the grid.
    pub fn zero(grid: Grid) -> Self {
        SbvFunction { grid, ac_values: vec![0.0; grid.n() + 1], jumps: Vec::new(), base_value: 0.0 }
    }

    /// Continuous function from node samples (`values[0]` becomes the base value).
    pub fn from_samples(grid: Grid, values: &[f64]) -> Result<Self> {
        let base = *values.first().ok_or_else(|| Error::invalid("no samples"))?;
        let ac = values.iter().map(|v| v - base).collect();
        SbvFunction::new(grid, ac, Vec::new(), base)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn ac_values(&self) -> &[f64] {
        &self.ac_values
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    /// `u(a⁺)`.
    pub fn base_value(&self) -> f64 {
        self.base_value
    }

    pub fn eval(&self, x: f64) -> f64 {
        let c = self.grid.cell_of(x);
        let theta = (x - self.grid.node(c)) / self.grid.h();
        let ac = self.ac_values[c] + theta * (self.ac_values[c + 1] - self.ac_values[c]);
        let jumps: f64 = self.jumps.iter().filter(|j| j.location <= x).map(|j| j.height).sum();
        self.base_value + ac + jumps
    }

    pub fn node_values(&self) -> Vec<f64> {
        self.grid.nodes().into_iter().map(|x| self.eval(x)).collect()
    }

    /// Slope of the AC interpolant on each cell.
    pub fn slopes(&self) -> Vec<f64> {
        let h = self.grid.h();
        self.ac_values.windows(2).map(|w| (w[1] - w[0]) / h).collect()
    }

    pub fn to_field(&self) -> GridField {
        let nodes = self.ac_values.iter().map(|v| v + self.base_value).collect();
        let terms = self.jumps.iter().map(|j| PowerTerm::left(j.location, j.height, 0.0)).collect();
        GridField::from_parts(self.grid, nodes, terms)
    }

    pub fn scaled(&self, c: f64) -> SbvFunction {
        if c == 0.0 {
            return SbvFunction::zero(self.grid);
        }
        SbvFunction {
            grid: self.grid,
            ac_values: self.ac_values.iter().map(|v| c * v).collect(),
            jumps: self.jumps.iter().map(|j| Jump::new(j.location, c * j.height)).collect(),
            base_value: c * self.base_value,
        }
    }

    pub fn add(&self, other: &SbvFunction) -> Result<SbvFunction> {
        if self.grid != other.grid {
            return Err(Error::domain("functions live on different grids"));
        }
        let ac = self.ac_values.iter().zip(&other.ac_values).map(|(x, y)| x + y).collect();
        let mut jumps: Vec<Jump> = self.jumps.clone();
        for j in &other.jumps {
            match jumps.iter_mut().find(|k| k.location == j.location) {
                Some(k) => k.height += j.height,
                None => jumps.push(*j),
            }
        }
        jumps.retain(|j| j.height != 0.0);
        jumps.sort_by(|x, y| x.location.total_cmp(&y.location));
        SbvFunction::new(self.grid, ac, jumps, self.base_value + other.base_value)
    }

    /// `x ↦ u(a + b − x)` (jump points become left-continuous; values
    /// only differ from the exact mirror image at the jump points).
    pub fn reflected(&self) -> SbvFunction {
        let n = self.grid.n();
        let end = self.ac_values[n];
        let total_jump: f64 = self.jumps.iter().map(|j| j.height).sum();
        let ac = (0..=n).map(|j| self.ac_values[n - j] - end).collect();
        let mut jumps: Vec<Jump> =
            self.jumps.iter().map(|j| Jump::new(self.grid.mirror(j.location), -j.height)).collect();
        jumps.reverse();
        SbvFunction { grid: self.grid, ac_values: ac, jumps, base_value: self.base_value + end + total_jump }
    }

    pub fn to_json(&self) -> String {
        let doc = SbvDocument {
            a: self.grid.a(),
            b: self.grid.b(),
            n: self.grid.n(),
            ac_values: self.ac_values.clone(),
            jumps: self.jumps.clone(),
            base_value: self.base_value,
        };
        serde_json::to_string_pretty(&doc).expect("plain numeric document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SbvDocument = serde_json::from_str(text).map_err(|e| Error::invalid(format!("SBV JSON: {e}")))?;
        let grid = Grid::new(doc.a, doc.b, doc.n)?;
        SbvFunction::new(grid, doc.ac_values, doc.jumps, doc.base_value)
    }
}
