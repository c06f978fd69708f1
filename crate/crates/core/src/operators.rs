//! Riemann–Liouville, Marchaud and Caputo operators on [`GridField`]s.
//!
//! Left operators act on the regular part numerically (product weights
//! for integrals, the piecewise-constant slope rule for derivatives) and
//! on left-anchored power terms in closed form. Right operators reflect
//! the input, apply the left operator and reflect the output.

use std::borrow::Cow;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspace::{Grid, GridField, PowerTerm, SbvFunction, Side};
use crate::quadrature::{power_diff, ProductRule};
use crate::special::gamma_pos;

/// Order `s ∈ (0, 1)` and the endpoint the operator is anchored to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FracParams {
    s: f64,
    side: Side,
}

impl FracParams {
    pub fn new(s: f64, side: Side) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::domain(format!("fractional order must lie in (0, 1), got {s}")));
        }
        Ok(FracParams { s, side })
    }

    pub fn left(s: f64) -> Result<Self> {
        FracParams::new(s, Side::Left)
    }

    pub fn right(s: f64) -> Result<Self> {
        FracParams::new(s, Side::Right)
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn side(&self) -> Side {
        self.side
    }
}

/// Output of an operator: the full field plus its node values.
///
/// When the field is singular at the base node (`a` for left operators,
/// `b` for right ones) that node carries the finite regular part only and
/// `singular_at_base` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorResult {
    field: GridField,
    side: Side,
    singular_at_base: bool,
    values: Vec<f64>,
}

impl OperatorResult {
    fn from_field(field: GridField, side: Side) -> Self {
        let base = base_index(field.grid(), side);
        let singular = field.is_singular_at(field.grid().node(base));
        OperatorResult::build(field, side, singular)
    }

    fn build(field: GridField, side: Side, singular_at_base: bool) -> Self {
        let base = base_index(field.grid(), side);
        let values = (0..=field.grid().n())
            .map(|j| if singular_at_base && j == base { field.nodes()[j] } else { field.node_value(j) })
            .collect();
        OperatorResult { field, side, singular_at_base, values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn field(&self) -> &GridField {
        &self.field
    }

    pub fn into_field(self) -> GridField {
        self.field
    }

    pub fn grid(&self) -> &Grid {
        self.field.grid()
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn singular_at_base(&self) -> bool {
        self.singular_at_base
    }

    /// Index of the node the operator is anchored at.
    pub fn base_index(&self) -> usize {
        base_index(self.grid(), self.side)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.field.eval(x)
    }
}

fn base_index(grid: &Grid, side: Side) -> usize {
    match side {
        Side::Left => 0,
        Side::Right => grid.n(),
    }
}

/// Anything the operators and functionals can consume.
pub trait AsField {
    fn as_field(&self) -> Cow<'_, GridField>;
}

impl AsField for GridField {
    fn as_field(&self) -> Cow<'_, GridField> {
        Cow::Borrowed(self)
    }
}

impl AsField for SbvFunction {
    fn as_field(&self) -> Cow<'_, GridField> {
        Cow::Owned(self.to_field())
    }
}

impl AsField for OperatorResult {
    fn as_field(&self) -> Cow<'_, GridField> {
        Cow::Borrowed(&self.field)
    }
}

fn sided<F>(u: &impl AsField, side: Side, op: F) -> Result<OperatorResult>
where
    F: Fn(&GridField) -> Result<(GridField, Option<bool>)>,
{
    let field = u.as_field();
    let (out, flag) = match side {
        Side::Left => op(&field)?,
        Side::Right => {
            let (out, flag) = op(&field.reflected())?;
            (out.reflected(), flag)
        }
    };
    Ok(match flag {
        Some(singular) => OperatorResult::build(out, side, singular),
        None => OperatorResult::from_field(out, side),
    })
}

/// `I^s u` with `s = p.s()` as the order of integration.
pub fn rl_integral(u: &impl AsField, p: FracParams) -> Result<OperatorResult> {
    sided(u, p.side, |f| Ok((integral_left(f, p.s)?, None)))
}

/// Riemann–Liouville derivative `D^s u = d/dx I^{1−s} u`.
pub fn rl_derivative(u: &impl AsField, p: FracParams) -> Result<OperatorResult> {
    sided(u, p.side, |f| Ok((derivative_left(f, p.s, false)?, None)))
}

/// Caputo derivative `I^{1−s}[u′]`; rejects jumps and non-integrable `u′`.
pub fn caputo_derivative(u: &impl AsField, p: FracParams) -> Result<OperatorResult> {
    sided(u, p.side, |f| Ok((derivative_left(f, p.s, true)?, None)))
}

/// Marchaud derivative truncated at `eps`, which must be a positive
/// multiple of the grid spacing. The function is extended by zero
/// outside the interval, and the base node is always flagged.
pub fn marchaud_derivative(u: &impl AsField, p: FracParams, eps: f64) -> Result<OperatorResult> {
    let field = u.as_field();
    let m_eps = eps_cells(field.grid(), eps)?;
    sided(u, p.side, |f| Ok((marchaud_left(f, p.s, m_eps)?, Some(true))))
}

pub fn rl_integral_right(u: &impl AsField, s: f64) -> Result<OperatorResult> {
    rl_integral(u, FracParams::right(s)?)
}

pub fn rl_derivative_right(u: &impl AsField, s: f64) -> Result<OperatorResult> {
    rl_derivative(u, FracParams::right(s)?)
}

/// `eps / h` as a whole number of cells.
pub fn eps_cells(grid: &Grid, eps: f64) -> Result<usize> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::domain(format!("eps must be positive, got {eps}")));
    }
    let m = eps / grid.h();
    let rounded = m.round();
    if rounded < 1.0 || (m - rounded).abs() > 1e-9 * rounded {
        return Err(Error::domain(format!("eps = {eps} is not a positive multiple of h = {}", grid.h())));
    }
    if rounded as usize >= grid.n() {
        return Err(Error::domain(format!("eps = {eps} must be shorter than the interval")));
    }
    Ok(rounded as usize)
}

/// Rewrites each right-sided step `c·1{x < x0}` as `c − c·1{x ≥ x0}` so
/// that jumps stay analytic after reflection.
fn flip_steps(f: &GridField) -> GridField {
    let mut shift = 0.0;
    let terms = f
        .terms()
        .iter()
        .map(|t| {
            if t.side == Side::Right && t.exponent == 0.0 {
                shift += t.coeff;
                PowerTerm::left(t.origin, -t.coeff, 0.0)
            } else {
                *t
            }
        })
        .collect();
    let nodes = f.nodes().iter().map(|v| v + shift).collect();
    GridField::from_parts(*f.grid(), nodes, terms)
}

fn integral_left(f: &GridField, order: f64) -> Result<GridField> {
    let grid = *f.grid();
    let f = flip_steps(f).fold_terms(|t| t.side != Side::Left);
    let base = f.nodes()[0];
    let shifted: Vec<f64> = f.nodes().iter().map(|v| v - base).collect();
    let rule = ProductRule::cached(&grid, order - 1.0)?;
    let scale = 1.0 / gamma_pos(order);
    let nodes = rule.apply(&shifted).into_iter().map(|v| v * scale).collect();
    let mut terms: Vec<PowerTerm> = f.terms().iter().map(|t| t.integrated(order)).collect();
    terms.push(PowerTerm::left(grid.a(), base, 0.0).integrated(order));
    Ok(GridField::from_parts(grid, nodes, terms))
}

fn derivative_left(f: &GridField, s: f64, caputo: bool) -> Result<GridField> {
    let grid = *f.grid();
    let f = flip_steps(f).fold_terms(|t| t.side != Side::Left);
    let n = grid.n();
    let h = grid.h();
    let slopes: Vec<f64> = f.nodes().windows(2).map(|w| (w[1] - w[0]) / h).collect();
    let scale = h.powf(1.0 - s) / gamma_pos(2.0 - s);
    let table: Vec<f64> =
        (0..=n).map(|m| if m == 0 { 0.0 } else { scale * power_diff((m - 1) as f64, m as f64, 1.0 - s) }).collect();
    let nodes: Vec<f64> =
        (0..=n).into_par_iter().map(|j| (0..j).map(|c| slopes[c] * table[j - c]).sum::<f64>()).collect();

    let mut terms = Vec::with_capacity(f.terms().len() + 1);
    for t in f.terms() {
        if caputo {
            if t.exponent == 0.0 && t.origin == grid.a() {
                continue;
            }
            if t.exponent == 0.0 {
                return Err(Error::domain(format!("Caputo derivative needs u' in L1, but u jumps at {}", t.origin)));
            }
            if t.exponent < 0.0 {
                return Err(Error::domain("Caputo derivative needs u' in L1, but u is unbounded at a term origin"));
            }
        }
        terms.extend(t.differentiated(s)?);
    }
    if !caputo {
        terms.extend(PowerTerm::left(grid.a(), f.nodes()[0], 0.0).differentiated(s)?);
    }
    Ok(GridField::from_parts(grid, nodes, terms))
}

fn marchaud_left(f: &GridField, s: f64, m_eps: usize) -> Result<GridField> {
    let grid = *f.grid();
    let f = flip_steps(f).fold_terms(|t| !(t.side == Side::Left && t.exponent == 0.0));
    let eps = m_eps as f64 * grid.h();
    let eps_s = eps.powf(-s);
    let rule = ProductRule::far_field(&grid, -1.0 - s, m_eps + 1)?;
    let inv_gamma = 1.0 / gamma_pos(1.0 - s);
    let u = f.nodes();
    let jumps = f.terms();
    let nodes = (0..=grid.n())
        .into_par_iter()
        .map(|j| {
            let x = grid.node(j);
            let mut acc = u[j] * eps_s - s * rule.integrate(u, j);
            for t in jumps {
                if x >= t.origin {
                    acc += t.coeff * eps_s;
                }
                if j >= m_eps && t.origin < grid.node(j - m_eps) {
                    acc -= t.coeff * (eps_s - (x - t.origin).powf(-s));
                }
            }
            acc * inv_gamma
        })
        .collect();
    Ok(GridField::from_parts(grid, nodes, Vec::new()))
}
