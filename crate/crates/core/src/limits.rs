//! Convergence experiments in the order `s` and the Marchaud truncation
//! `ε`, weak-* pairings against test functions, the integration-by-parts
//! residual, and report-only embedding and boundedness probes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspace::{Grid, GridField, SbvFunction};
use crate::norms::{gagliardo_seminorm, l1_distance, lp_norm, pairing, sbv_norm};
use crate::operators::{marchaud_derivative, rl_derivative, rl_integral, AsField, FracParams, OperatorResult};
use crate::quadrature::{gauss_legendre, gauss_on};

pub const S_TO_ZERO_DEFAULT: [f64; 4] = [0.5, 0.1, 0.01, 0.001];
pub const S_TO_ONE_DEFAULT: [f64; 5] = [0.5, 0.9, 0.99, 0.995, 0.999];
pub const BOUNDEDNESS_ORDERS: [f64; 4] = [0.25, 0.5, 0.75, 0.9];
pub const SWEEP_TOLERANCE: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParameter {
    S,
    Eps,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::S => "s",
            SweepParameter::Eps => "eps",
        }
    }
}

/// A second functional recorded along the same sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Auxiliary {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub target: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub parameter: SweepParameter,
    pub functional: String,
    pub points: Vec<(f64, f64)>,
    pub target: Option<f64>,
    pub tolerance: Option<f64>,
    pub converged: bool,
    pub auxiliary: Option<Auxiliary>,
    /// `‖D_ε u − f‖_{L¹}` at the smallest `ε` when a reference `f` is given.
    pub reference_distance: Option<f64>,
}

impl SweepReport {
    pub fn last(&self) -> Option<f64> {
        self.points.last().map(|p| p.1)
    }
}

fn check_order_list(list: &[f64], decreasing: bool) -> Result<()> {
    if list.is_empty() {
        return Err(Error::domain("empty parameter list"));
    }
    if list.iter().any(|s| !(*s > 0.0 && *s < 1.0)) {
        return Err(Error::domain("orders must lie in (0, 1)"));
    }
    let monotone = list.windows(2).all(|w| if decreasing { w[1] < w[0] } else { w[1] > w[0] });
    if !monotone {
        let dir = if decreasing { "decreasing" } else { "increasing" };
        return Err(Error::domain(format!("orders must be strictly {dir}")));
    }
    Ok(())
}

/// `‖I^s u − u‖_{L¹}` along a decreasing list of orders; target 0.
pub fn sweep_s_to_zero(u: &SbvFunction, s_list: &[f64]) -> Result<SweepReport> {
    check_order_list(s_list, true)?;
    let field = u.to_field();
    let points = s_list
        .par_iter()
        .map(|&s| {
            let r = rl_integral(&field, FracParams::left(s)?)?;
            Ok((s, l1_distance(&r, &field)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let last = points.last().map_or(f64::NAN, |p| p.1);
    Ok(SweepReport {
        parameter: SweepParameter::S,
        functional: "l1_distance(I^s u, u)".into(),
        points,
        target: Some(0.0),
        tolerance: Some(SWEEP_TOLERANCE),
        converged: last <= SWEEP_TOLERANCE,
        auxiliary: None,
        reference_distance: None,
    })
}

/// Classical derivative of the absolutely continuous part as a field,
/// node values averaged from the neighbouring cell slopes.
pub fn ac_derivative(u: &SbvFunction) -> GridField {
    let slopes = u.slopes();
    let n = slopes.len();
    let nodes = (0..=n)
        .map(|j| match j {
            0 => slopes[0],
            j if j == n => slopes[n - 1],
            j => 0.5 * (slopes[j - 1] + slopes[j]),
        })
        .collect();
    GridField::from_nodes(*u.grid(), nodes).expect("slopes are finite")
}

/// `‖D^s u‖_{L¹}` along an increasing list of orders. The target is the
/// SBV norm when `u(a⁺) = 0`; otherwise `‖u′ − D^s u‖_{L¹}` is recorded
/// as well, with target `|u(a⁺)|`.
pub fn sweep_s_to_one_norm(u: &SbvFunction, s_list: &[f64]) -> Result<SweepReport> {
    check_order_list(s_list, false)?;
    let field = u.to_field();
    let with_aux = u.base_value() != 0.0;
    let du = ac_derivative(u);
    let rows = s_list
        .par_iter()
        .map(|&s| {
            let d = rl_derivative(&field, FracParams::left(s)?)?;
            let norm = lp_norm(&d, 1.0)?.value;
            let aux = if with_aux { Some(l1_distance(&du, &d)?) } else { None };
            Ok((s, norm, aux))
        })
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.0, r.1)).collect();
    let target = (!with_aux).then(|| sbv_norm(u).value);
    let auxiliary = with_aux.then(|| Auxiliary {
        name: "l1_distance(u', D^s u)".into(),
        points: rows.iter().map(|r| (r.0, r.2.unwrap_or(f64::NAN))).collect(),
        target: Some(u.base_value().abs()),
    });
    let converged = match (&target, &auxiliary) {
        (Some(t), _) => (points.last().unwrap().1 - t).abs() <= SWEEP_TOLERANCE,
        (None, Some(aux)) => (aux.points.last().unwrap().1 - aux.target.unwrap()).abs() <= SWEEP_TOLERANCE,
        (None, None) => false,
    };
    Ok(SweepReport {
        parameter: SweepParameter::S,
        functional: "l1_norm(D^s u)".into(),
        points,
        target,
        tolerance: Some(SWEEP_TOLERANCE),
        converged,
        auxiliary,
        reference_distance: None,
    })
}

/// Smooth test functions for weak-* pairings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestFunction {
    One,
    X,
    X2,
    Cos,
}

impl TestFunction {
    pub const ALL: [TestFunction; 4] = [TestFunction::One, TestFunction::X, TestFunction::X2, TestFunction::Cos];

    pub fn eval(self, x: f64) -> f64 {
        match self {
            TestFunction::One => 1.0,
            TestFunction::X => x,
            TestFunction::X2 => x * x,
            TestFunction::Cos => x.cos(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TestFunction::One => "1",
            TestFunction::X => "x",
            TestFunction::X2 => "x^2",
            TestFunction::Cos => "cos(x)",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureTestResult {
    pub test_function: TestFunction,
    pub computed_pairing: f64,
    pub analytic_limit: f64,
    pub s_used: f64,
}

impl MeasureTestResult {
    pub fn error(&self) -> f64 {
        (self.computed_pairing - self.analytic_limit).abs()
    }
}

/// `∫ D^s u · φ` against `∫ u′φ + u(a⁺)φ(a) + Σ p_k φ(x_k)` for each φ.
pub fn weak_star_test(u: &SbvFunction, s: f64, phis: &[TestFunction]) -> Result<Vec<MeasureTestResult>> {
    if !(0.99..1.0).contains(&s) {
        return Err(Error::domain(format!("weak-* pairing needs s in [0.99, 1), got {s}")));
    }
    let d = rl_derivative(u, FracParams::left(s)?)?;
    let grid = *u.grid();
    let slopes = u.slopes();
    let rule = gauss_legendre(6);
    Ok(phis
        .iter()
        .map(|&phi| {
            let f = move |x: f64| phi.eval(x);
            let computed = pairing(&d, &f);
            let ac: f64 =
                slopes.iter().enumerate().map(|(c, g)| g * gauss_on(&rule, grid.node(c), grid.node(c + 1), f)).sum();
            let atoms: f64 = u.jumps().iter().map(|j| j.height * f(j.location)).sum();
            MeasureTestResult {
                test_function: phi,
                computed_pairing: computed,
                analytic_limit: ac + u.base_value() * f(grid.a()) + atoms,
                s_used: s,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IppReport {
    pub s: f64,
    /// `∫ (D^s_{a+} u) v`
    pub lhs: f64,
    /// `∫ (D^s_{b−} v) u + u(b) I^{1−s}_{b−}[v](b) − I^{1−s}_{a+}[u](a) v(a)`
    pub rhs: f64,
    pub boundary_b: f64,
    pub boundary_a: f64,
    pub residual: f64,
}

impl IppReport {
    /// `max(|lhs|, |rhs|, 1)`.
    pub fn scale(&self) -> f64 {
        self.lhs.abs().max(self.rhs.abs()).max(1.0)
    }
}

/// Both sides of the fractional integration-by-parts identity.
pub fn ipp_residual(u: &impl AsField, v: &impl AsField, s: f64) -> Result<IppReport> {
    let uf = u.as_field();
    let vf = v.as_field();
    if uf.grid() != vf.grid() {
        return Err(Error::domain("u and v live on different grids"));
    }
    let n = uf.grid().n();
    let du = rl_derivative(&*uf, FracParams::left(s)?)?;
    let dv = rl_derivative(&*vf, FracParams::right(s)?)?;
    let lhs = pairing(&du, &*vf);
    let inner = pairing(&dv, &*uf);
    let iv = rl_integral(&*vf, FracParams::right(1.0 - s)?)?;
    let iu = rl_integral(&*uf, FracParams::left(1.0 - s)?)?;
    let boundary_b = uf.node_value(n) * iv.values()[n];
    let boundary_a = iu.values()[0] * vf.node_value(0);
    let rhs = inner + boundary_b - boundary_a;
    Ok(IppReport { s, lhs, rhs, boundary_b, boundary_a, residual: (lhs - rhs).abs() })
}

/// `ε = 16h, 8h, 4h, 2h, h`.
pub fn default_eps_list(grid: &Grid) -> Vec<f64> {
    [16.0, 8.0, 4.0, 2.0, 1.0].iter().map(|m| m * grid.h()).collect()
}

/// Cauchy increments `‖D_{ε_i} u − D_{ε_{i+1}} u‖_{L¹}` of the truncated
/// Marchaud derivative. Converged when both the L¹ and the sup-norm
/// increments are non-increasing.
pub fn marchaud_eps_diagnostic(
    u: &impl AsField,
    s: f64,
    eps_list: &[f64],
    reference: Option<&GridField>,
) -> Result<SweepReport> {
    if eps_list.len() < 2 {
        return Err(Error::domain("the eps diagnostic needs at least two values"));
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::domain("eps values must be strictly decreasing"));
    }
    let field = u.as_field();
    let p = FracParams::left(s)?;
    let outs = eps_list
        .par_iter()
        .map(|&eps| marchaud_derivative(&*field, p, eps))
        .collect::<Result<Vec<OperatorResult>>>()?;
    let mut points = Vec::with_capacity(outs.len() - 1);
    let mut sup = Vec::with_capacity(outs.len() - 1);
    for (i, w) in outs.windows(2).enumerate() {
        points.push((eps_list[i + 1], l1_distance(&w[0], &w[1])?));
        let m = w[0].values().iter().zip(w[1].values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        sup.push((eps_list[i + 1], m));
    }
    let non_increasing = |v: &[(f64, f64)]| v.windows(2).all(|w| w[1].1 <= w[0].1);
    let converged = non_increasing(&points) && non_increasing(&sup);
    let reference_distance = match reference {
        Some(f) => Some(l1_distance(outs.last().unwrap(), f)?),
        None => None,
    };
    Ok(SweepReport {
        parameter: SweepParameter::Eps,
        functional: "l1_increment".into(),
        points,
        target: Some(0.0),
        tolerance: None,
        converged,
        auxiliary: Some(Auxiliary { name: "sup_increment".into(), points: sup, target: Some(0.0) }),
        reference_distance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub s: f64,
    pub s_prime: f64,
    /// `‖D^s u‖_{L¹}`
    pub lhs: f64,
    /// `‖u‖_{L¹} + [u]_{s′, 1}`
    pub rhs: f64,
    /// `lhs / rhs`, or 0 when both vanish.
    pub ratio: f64,
}

pub fn embedding_report(u: &SbvFunction, s: f64, s_prime: f64) -> Result<EmbeddingReport> {
    if !(s > 0.0 && s < s_prime && s_prime < 1.0) {
        return Err(Error::domain(format!("embedding report needs 0 < s < s' < 1, got s = {s}, s' = {s_prime}")));
    }
    let lhs = lp_norm(&rl_derivative(u, FracParams::left(s)?)?, 1.0)?.value;
    let rhs = lp_norm(u, 1.0)?.value + gagliardo_seminorm(u, s_prime, 1.0)?.value;
    let ratio = if rhs == 0.0 { 0.0 } else { lhs / rhs };
    Ok(EmbeddingReport { s, s_prime, lhs, rhs, ratio })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundednessPoint {
    pub s: f64,
    /// `max_{j ≥ 1} |D^s u(x_j)|`
    pub sup: f64,
}

/// Sup of the left RL derivative over the nodes `j ≥ 1`, per order.
pub fn boundedness_report(u: &SbvFunction, orders: &[f64]) -> Result<Vec<BoundednessPoint>> {
    orders
        .par_iter()
        .map(|&s| {
            let d = rl_derivative(u, FracParams::left(s)?)?;
            let sup = d.values()[1..].iter().fold(0.0, |m: f64, v| m.max(v.abs()));
            Ok(BoundednessPoint { s, sup })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::{CorpusFunction, Jump};
    use crate::special::gamma_pos;

    fn sample(spec: &str, n: usize) -> SbvFunction {
        spec.parse::<CorpusFunction>().unwrap().sample(&Grid::unit(n).unwrap()).unwrap()
    }

    #[test]
    fn s_to_zero_for_constant_matches_closed_form() {
        let r = sweep_s_to_zero(&sample("constant:1", 64), &S_TO_ZERO_DEFAULT).unwrap();
        for (s, v) in &r.points {
            // ∫₀¹ |1 − x^s/Γ(s+1)| dx, sign change at Γ(s+1)^{1/s}
            let anti = |x: f64| x - x.powf(s + 1.0) / gamma_pos(s + 2.0);
            let root = gamma_pos(s + 1.0).powf(1.0 / s).min(1.0);
            let want = 2.0 * anti(root) - anti(1.0);
            assert!((v - want).abs() < 1e-13, "s = {s}");
        }
        assert!(r.converged);
    }

    #[test]
    fn s_to_zero_rejects_bad_lists() {
        let u = sample("constant:1", 16);
        assert!(sweep_s_to_zero(&u, &[0.1, 0.5]).is_err());
        assert!(sweep_s_to_zero(&u, &[]).is_err());
        assert!(sweep_s_to_zero(&u, &[1.0, 0.5]).is_err());
    }

    #[test]
    fn s_to_one_step_matches_closed_form() {
        let r = sweep_s_to_one_norm(&sample("heaviside:0.25", 64), &S_TO_ONE_DEFAULT).unwrap();
        for (s, v) in &r.points {
            let want = 0.75f64.powf(1.0 - s) / gamma_pos(2.0 - s);
            assert!((v - want).abs() < 1e-8);
        }
        assert_eq!(r.target, Some(1.0));
        assert!(r.converged);
    }

    #[test]
    fn s_to_one_constant_records_auxiliary() {
        let r = sweep_s_to_one_norm(&sample("constant:1", 64), &S_TO_ONE_DEFAULT).unwrap();
        assert!(r.target.is_none());
        let aux = r.auxiliary.unwrap();
        assert_eq!(aux.target, Some(1.0));
        assert!((aux.points.last().unwrap().1 - 1.0).abs() < 1e-2);
    }

    #[test]
    fn weak_star_two_jumps() {
        let g = Grid::unit(256).unwrap();
        let u = SbvFunction::new(g, vec![0.0; 257], vec![Jump::new(0.3, 1.0), Jump::new(0.7, 2.0)], 0.0).unwrap();
        let res = weak_star_test(&u, 0.995, &[TestFunction::One]).unwrap();
        assert_eq!(res[0].analytic_limit, 3.0);
        assert!(res[0].error() < 2e-2);
        assert!(weak_star_test(&u, 0.5, &[TestFunction::One]).is_err());
    }

    #[test]
    fn ipp_trivial_pair() {
        let z = sample("constant:0", 32);
        let r = ipp_residual(&z, &z, 0.5).unwrap();
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn eps_diagnostic_of_zero() {
        let z = sample("constant:0", 64);
        let r = marchaud_eps_diagnostic(&z, 0.5, &default_eps_list(z.grid()), None).unwrap();
        assert!(r.points.iter().all(|p| p.1 == 0.0));
        assert!(r.converged);
    }

    #[test]
    fn eps_diagnostic_flags_nonzero_trace() {
        let u = sample("constant:1", 256);
        let r = marchaud_eps_diagnostic(&u, 0.5, &default_eps_list(u.grid()), None).unwrap();
        assert!(!r.converged);
    }

    #[test]
    fn embedding_of_zero() {
        let r = embedding_report(&sample("constant:0", 32), 0.3, 0.6).unwrap();
        assert_eq!(r.ratio, 0.0);
        assert!(embedding_report(&sample("power:1", 32), 0.6, 0.3).is_err());
    }
}
