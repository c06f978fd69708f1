use serde::{Deserialize, Serialize};

use super::{Grid, Side};
use crate::error::{Error, Result};
use crate::quadrature::power_moment;
use crate::special::{gamma_pos, recip_gamma};

/// `coeff · d(x)^exponent` where `d(x) = x − origin` for [`Side::Left`]
/// and `origin − x` for [`Side::Right`], and zero where `d(x) < 0`.
///
/// At `d = 0` the term is `coeff` when `exponent == 0` (a right-continuous
/// step for left terms) and `0` otherwise; a singular term is never
/// evaluated at its own origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerTerm {
    pub origin: f64,
    pub coeff: f64,
    pub exponent: f64,
    pub side: Side,
}

impl PowerTerm {
    pub fn left(origin: f64, coeff: f64, exponent: f64) -> Self {
        PowerTerm { origin, coeff, exponent, side: Side::Left }
    }

    pub fn right(origin: f64, coeff: f64, exponent: f64) -> Self {
        PowerTerm { origin, coeff, exponent, side: Side::Right }
    }

    #[inline]
    pub fn distance(&self, x: f64) -> f64 {
        match self.side {
            Side::Left => x - self.origin,
            Side::Right => self.origin - x,
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let d = self.distance(x);
        if d > 0.0 {
            self.coeff * d.powf(self.exponent)
        } else if d == 0.0 && self.exponent == 0.0 {
            self.coeff
        } else {
            0.0
        }
    }

    pub fn is_singular(&self) -> bool {
        self.exponent < 0.0 && self.coeff != 0.0
    }

    /// Range of `d` covered by `[lo, hi]`, clipped to the support.
    #[inline]
    fn distance_range(&self, lo: f64, hi: f64) -> (f64, f64) {
        match self.side {
            Side::Left => ((lo - self.origin).max(0.0), (hi - self.origin).max(0.0)),
            Side::Right => ((self.origin - hi).max(0.0), (self.origin - lo).max(0.0)),
        }
    }

    /// `∫_lo^hi term(x) dx`.
    pub fn integral(&self, lo: f64, hi: f64) -> f64 {
        let (d0, d1) = self.distance_range(lo, hi);
        self.coeff * power_moment(d0, d1, self.exponent)
    }

    /// `∫_lo^hi term(x)·(alpha + beta·x) dx`.
    pub fn linear_moment(&self, lo: f64, hi: f64, alpha: f64, beta: f64) -> f64 {
        let (d0, d1) = self.distance_range(lo, hi);
        if d1 <= d0 {
            return 0.0;
        }
        let at_origin = alpha + beta * self.origin;
        let slope = match self.side {
            Side::Left => beta,
            Side::Right => -beta,
        };
        let m0 = power_moment(d0, d1, self.exponent);
        let m1 = if slope == 0.0 { 0.0 } else { power_moment(d0, d1, self.exponent + 1.0) };
        self.coeff * (at_origin * m0 + slope * m1)
    }

    /// Fractional integral of order `order` anchored at the term's own side.
    pub fn integrated(&self, order: f64) -> PowerTerm {
        let g = self.exponent + 1.0;
        PowerTerm { coeff: self.coeff * gamma_pos(g) / gamma_pos(g + order), exponent: self.exponent + order, ..*self }
    }

    /// Fractional derivative of order `s ∈ (0, 1)`; `None` when the closed
    /// form vanishes identically (the pole of `Γ` at zero).
    pub fn differentiated(&self, s: f64) -> Result<Option<PowerTerm>> {
        let g = self.exponent + 1.0;
        let exponent = self.exponent - s;
        let coeff = self.coeff * gamma_pos(g) * recip_gamma(g - s)?;
        if coeff == 0.0 {
            return Ok(None);
        }
        if exponent <= -1.0 {
            return Err(Error::domain(format!(
                "derivative of order {s} of a power {} is not integrable",
                self.exponent
            )));
        }
        Ok(Some(PowerTerm { coeff, exponent, ..*self }))
    }

    pub fn reflected(&self, grid: &Grid) -> PowerTerm {
        PowerTerm { origin: grid.mirror(self.origin), side: self.side.flipped(), ..*self }
    }

    fn same_shape(&self, other: &PowerTerm) -> bool {
        self.origin == other.origin && self.exponent == other.exponent && self.side == other.side
    }
}

/// A function on a grid: piecewise-linear regular part through `nodes`
/// plus a finite sum of [`PowerTerm`]s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    grid: Grid,
    nodes: Vec<f64>,
    terms: Vec<PowerTerm>,
}

impl GridField {
    pub fn new(grid: Grid, nodes: Vec<f64>, terms: Vec<PowerTerm>) -> Result<Self> {
        if nodes.len() != grid.n() + 1 {
            return Err(Error::invalid(format!("expected {} node values, got {}", grid.n() + 1, nodes.len())));
        }
        if nodes.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("node values must be finite"));
        }
        for t in &terms {
            if !(t.coeff.is_finite() && t.exponent.is_finite()) || t.exponent <= -1.0 {
                return Err(Error::invalid(format!("power term {t:?} is not integrable")));
            }
            if !grid.contains(t.origin) {
                return Err(Error::invalid(format!("power term origin {} outside the grid", t.origin)));
            }
        }
        Ok(GridField { grid, nodes, terms }.normalized())
    }

    pub fn zero(grid: Grid) -> Self {
        GridField { grid, nodes: vec![0.0; grid.n() + 1], terms: Vec::new() }
    }

    /// Piecewise-linear function through `nodes`, no analytic terms.
    pub fn from_nodes(grid: Grid, nodes: Vec<f64>) -> Result<Self> {
        GridField::new(grid, nodes, Vec::new())
    }

    pub(crate) fn from_parts(grid: Grid, nodes: Vec<f64>, terms: Vec<PowerTerm>) -> Self {
        debug_assert_eq!(nodes.len(), grid.n() + 1);
        GridField { grid, nodes, terms }.normalized()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Regular (piecewise-linear) part at the nodes.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn terms(&self) -> &[PowerTerm] {
        &self.terms
    }

    /// Piecewise-linear interpolant of the regular part.
    pub fn regular_at(&self, x: f64) -> f64 {
        let c = self.grid.cell_of(x);
        let x0 = self.grid.node(c);
        let theta = (x - x0) / self.grid.h();
        self.nodes[c] + theta * (self.nodes[c + 1] - self.nodes[c])
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.regular_at(x) + self.terms.iter().map(|t| t.eval(x)).sum::<f64>()
    }

    pub fn node_value(&self, j: usize) -> f64 {
        let x = self.grid.node(j);
        self.nodes[j] + self.terms.iter().map(|t| t.eval(x)).sum::<f64>()
    }

    pub fn node_values(&self) -> Vec<f64> {
        (0..=self.grid.n()).map(|j| self.node_value(j)).collect()
    }

    /// True when a singular term has its origin exactly at `x`.
    pub fn is_singular_at(&self, x: f64) -> bool {
        self.terms.iter().any(|t| t.is_singular() && t.origin == x)
    }

    pub fn scaled(&self, c: f64) -> GridField {
        GridField {
            grid: self.grid,
            nodes: self.nodes.iter().map(|v| c * v).collect(),
            terms: self.terms.iter().map(|t| PowerTerm { coeff: c * t.coeff, ..*t }).collect(),
        }
        .normalized()
    }

    pub fn add(&self, other: &GridField) -> Result<GridField> {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &GridField) -> Result<GridField> {
        self.combine(other, -1.0)
    }

    fn combine(&self, other: &GridField, sign: f64) -> Result<GridField> {
        if self.grid != other.grid {
            return Err(Error::domain("fields live on different grids"));
        }
        let nodes = self.nodes.iter().zip(&other.nodes).map(|(x, y)| x + sign * y).collect();
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().map(|t| PowerTerm { coeff: sign * t.coeff, ..*t }));
        Ok(GridField::from_parts(self.grid, nodes, terms))
    }

    /// `x ↦ f(a + b − x)`.
    pub fn reflected(&self) -> GridField {
        let mut nodes = self.nodes.clone();
        nodes.reverse();
        let terms = self.terms.iter().map(|t| t.reflected(&self.grid)).collect();
        GridField::from_parts(self.grid, nodes, terms)
    }

    /// Samples every term selected by `pred` into the regular part.
    ///
    /// A singular term whose origin is a node gets the node value that
    /// makes the adjacent cell's trapezoid integral exact.
    pub fn fold_terms<P: Fn(&PowerTerm) -> bool>(&self, pred: P) -> GridField {
        let mut nodes = self.nodes.clone();
        let mut kept = Vec::new();
        let h = self.grid.h();
        for t in &self.terms {
            if !pred(t) {
                kept.push(*t);
                continue;
            }
            for (j, v) in nodes.iter_mut().enumerate() {
                *v += t.eval(self.grid.node(j));
            }
            if t.exponent < 0.0 {
                if let Some(j0) = self.grid.node_index(t.origin) {
                    let neighbour = match t.side {
                        Side::Left if j0 < self.grid.n() => Some(j0 + 1),
                        Side::Right if j0 > 0 => Some(j0 - 1),
                        _ => None,
                    };
                    if let Some(j1) = neighbour {
                        let (lo, hi) = if j1 > j0 { (j0, j1) } else { (j1, j0) };
                        let exact = t.integral(self.grid.node(lo), self.grid.node(hi));
                        nodes[j0] += 2.0 * exact / h - t.eval(self.grid.node(j1));
                    }
                }
            }
        }
        GridField { grid: self.grid, nodes, terms: kept }
    }

    /// Merges like terms and drops vanishing ones.
    fn normalized(mut self) -> GridField {
        let mut merged: Vec<PowerTerm> = Vec::with_capacity(self.terms.len());
        for t in self.terms.drain(..) {
            match merged.iter_mut().find(|m| m.same_shape(&t)) {
                Some(m) => m.coeff += t.coeff,
                None => merged.push(t),
            }
        }
        merged.retain(|t| t.coeff != 0.0);
        merged.sort_by(|x, y| {
            x.origin
                .total_cmp(&y.origin)
                .then(x.exponent.total_cmp(&y.exponent))
                .then((x.side as u8).cmp(&(y.side as u8)))
        });
        self.terms = merged;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn term_evaluation_conventions() {
        let step = PowerTerm::left(0.5, 2.0, 0.0);
        assert_eq!(step.eval(0.5), 2.0);
        assert_eq!(step.eval(0.49), 0.0);
        let sing = PowerTerm::left(0.5, 1.0, -0.5);
        assert_eq!(sing.eval(0.5), 0.0);
        assert!((sing.eval(0.75) - 2.0).abs() < 1e-15);
        let right = PowerTerm::right(1.0, 1.0, 0.5);
        assert!((right.eval(0.75) - 0.5).abs() < 1e-15);
        assert_eq!(right.eval(1.0), 0.0);
    }

    #[test]
    fn term_integrals() {
        let t = PowerTerm::left(0.0, 3.0, -0.5);
        assert!((t.integral(0.0, 1.0) - 6.0).abs() < 1e-14);
        // ∫₀¹ x^{-1/2}(1 + 2x) dx = 2 + 4/3
        assert!((t.linear_moment(0.0, 1.0, 1.0, 2.0) - 3.0 * (2.0 + 4.0 / 3.0)).abs() < 1e-13);
        let r = PowerTerm::right(1.0, 1.0, 1.0);
        // ∫₀¹ (1 − x)·x dx = 1/6
        assert!((r.linear_moment(0.0, 1.0, 0.0, 1.0) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn derivative_of_critical_power_vanishes() {
        let t = PowerTerm::left(0.0, 1.0, -0.5);
        assert!(t.differentiated(0.5).unwrap().is_none());
    }

    #[test]
    fn like_terms_merge() {
        let g = Grid::unit(4).unwrap();
        let f = GridField::new(g, vec![0.0; 5], vec![PowerTerm::left(0.0, 1.0, 0.5), PowerTerm::left(0.0, -1.0, 0.5)])
            .unwrap();
        assert!(f.terms().is_empty());
    }

    #[test]
    fn reflection_is_an_involution() {
        let g = Grid::unit(4).unwrap();
        let f = GridField::new(g, vec![0.0, 1.0, 4.0, 9.0, 16.0], vec![PowerTerm::left(0.25, 2.0, 0.0)]).unwrap();
        assert_eq!(f.reflected().reflected(), f);
        let r = f.reflected();
        assert!((r.eval(0.1) - f.eval(0.9)).abs() < 1e-14);
    }
}
