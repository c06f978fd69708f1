//! The acceptance criteria as runnable checks.
//!
//! Each criterion evaluates at a caller-chosen grid size and returns its
//! measured value alongside the pinned tolerance. `n = 4096` is the
//! reference resolution; smaller grids run but may fail tolerance checks.

use fraccalc::limits::{
    boundedness_report, default_eps_list, embedding_report, marchaud_eps_diagnostic, sweep_s_to_one_norm,
    sweep_s_to_zero, weak_star_test, TestFunction, BOUNDEDNESS_ORDERS, S_TO_ONE_DEFAULT,
};
use fraccalc::norms::{holder_exponent, l1_distance, lp_norm, lp_norm_on, sbv_norm, total_variation};
use fraccalc::operators::{caputo_derivative, marchaud_derivative, rl_derivative, rl_integral};
use fraccalc::quadrature::ProductRule;
use fraccalc::special::try_gamma;
use fraccalc::{CorpusFunction, FracParams, Grid, Jump, Result, SbvFunction};
use rayon::prelude::*;

/// `1 − x²/2 + x⁴/24`.
pub const COS_LIKE: &str = "poly:1,0,-0.5,0,0.041666666666666664";

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: u32,
    pub key: &'static str,
    pub title: &'static str,
    pub passed: bool,
    pub measured: String,
}

pub struct Criterion {
    pub id: u32,
    pub key: &'static str,
    pub title: &'static str,
    run: fn(usize) -> Result<(bool, String)>,
}

impl Criterion {
    pub fn run(&self, n: usize) -> CriterionResult {
        let (passed, measured) = match (self.run)(n) {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        CriterionResult { id: self.id, key: self.key, title: self.title, passed, measured }
    }
}

fn unit(n: usize) -> Result<Grid> {
    Grid::unit(n)
}

fn sample(spec: &str, grid: &Grid) -> Result<SbvFunction> {
    spec.parse::<CorpusFunction>()?.sample(grid)
}

fn gamma(x: f64) -> f64 {
    try_gamma(x).expect("positive argument")
}

/// Jumps of height 1 at 0.3 and 2 at 0.7 on top of the AC part `ac`.
fn two_jumps(grid: &Grid, ac: &str) -> Result<SbvFunction> {
    let base = sample(ac, grid)?;
    SbvFunction::new(
        *grid,
        base.ac_values().to_vec(),
        vec![Jump::new(0.3, 1.0), Jump::new(0.7, 2.0)],
        base.base_value(),
    )
}

fn worst<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

fn power_closed_form(n: usize) -> Result<(bool, String)> {
    const TOL: f64 = 1e-3;
    let g = unit(n)?;
    let mut err: f64 = 0.0;
    for k in [1.0, 2.0] {
        let u = sample(&format!("power:{k}"), &g)?;
        for s in [0.25, 0.5, 0.75] {
            let d = rl_derivative(&u, FracParams::left(s)?)?;
            let c = gamma(k + 1.0) / gamma(k - s + 1.0);
            for (j, v) in d.values().iter().enumerate() {
                let x = g.node(j);
                if x >= 0.1 {
                    let exact = c * x.powf(k - s);
                    err = err.max(((v - exact) / exact).abs());
                }
            }
        }
    }
    Ok((err <= TOL, format!("max rel err {err:.3e} (tol {TOL:.0e})")))
}

fn null_derivative(n: usize) -> Result<(bool, String)> {
    const TOL: f64 = 5e-3;
    let s = 0.5;
    let g = unit(n)?;
    let u = sample(&format!("power:{}", s - 1.0), &g)?;
    let d = rl_derivative(&u, FracParams::left(s)?)?;
    let v = lp_norm_on(&d, 1.0, 0.1, 1.0)?.value;
    Ok((v <= TOL, format!("L1[0.1,1] = {v:.3e} (tol {TOL:.0e})")))
}

fn heaviside_norm(n: usize) -> Result<(bool, String)> {
    const TOL: f64 = 1e-8;
    let g = unit(n)?;
    let u = sample("heaviside:0.25", &g)?;
    let mut err: f64 = 0.0;
    for s in [0.25, 0.5, 0.9, 0.999] {
        let d = rl_derivative(&u, FracParams::left(s)?)?;
        let exact = 0.75f64.powf(1.0 - s) / gamma(2.0 - s);
        err = err.max((lp_norm(&d, 1.0)?.value - exact).abs());
    }
    Ok((err <= TOL, format!("max abs err {err:.3e} (tol {TOL:.0e})")))
}

fn strict_convergence(n: usize) -> Result<(bool, String)> {
    const TOL: f64 = 1e-2;
    let u = sample("heaviside:0.25", &unit(n)?)?;
    let r = sweep_s_to_one_norm(&u, &S_TO_ONE_DEFAULT)?;
    let v = r.last().unwrap_or(f64::NAN);
    let tv = total_variation(&u).value;
    let err = (v - tv).abs();
    Ok((err <= TOL, format!("|D^0.999 u|_1 = {v:.6}, TV = {tv} (tol {TOL:.0e})")))
}

fn sbv_limit(n: usize) -> Result<(bool, String)> {
    const TOL: f64 = 2e-2;
    let u = two_jumps(&unit(n)?, "power:1")?;
    let d = rl_derivative(&u, FracParams::left(0.999)?)?;
    let v = lp_norm(&d, 1.0)?.value;
    let target = sbv_norm(&u).value;
    let err = (v - target).abs();
    Ok((err <= TOL, format!("|D^0.999 u|_1 = {v:.6}, SBV = {target:.6} (tol {TOL:.0e})")))
}

fn s_to_zero(n: usize) -> Result<(bool, String)> {
    const TOL: f64 = 1e-2;
    let g = unit(n)?;
    let mut err: f64 = 0.0;
    for spec in ["power:1", "power:2", "heaviside:0.5"] {
        let r = sweep_s_to_zero(&sample(spec, &g)?, &[1e-3])?;
        err = err.max(r.last().unwrap_or(f64::NAN));
    }
    Ok((err <= TOL, format!("max |I^0.001 u - u|_1 = {err:.3e} (tol {TOL:.0e})")))
}

fn smooth_set(grid: &Grid) -> Result<Vec<SbvFunction>> {
    ["power:1", "power:2", COS_LIKE].iter().map(|s| sample(s, grid)).collect()
}

fn inversion(n: usize) -> Result<(bool, String)> {
    const TOL: f64 = 5e-3;
    let g = unit(n)?;
    let mut worst_ratio: f64 = 0.0;
    for f in smooth_set(&g)? {
        let norm = lp_norm(&f, 1.0)?.value;
        for s in [0.3, 0.5, 0.7] {
            let p = FracParams::left(s)?;
            let di = rl_derivative(&rl_integral(&f, p)?, p)?;
            worst_ratio = worst_ratio.max(l1_distance(&di, &f)? / norm);
        }
    }
    Ok((worst_ratio <= TOL, format!("max |D^s I^s f - f|_1/|f|_1 = {worst_ratio:.3e} (tol {TOL:.0e})")))
}

fn semigroup(n: usize) -> Result<(bool, String)> {
    const TOL: f64 = 5e-3;
    let g = unit(n)?;
    let mut worst_ratio: f64 = 0.0;
    for f in smooth_set(&g)? {
        let norm = lp_norm(&f, 1.0)?.value;
        let twice = rl_integral(&rl_integral(&f, FracParams::left(0.4)?)?, FracParams::left(0.3)?)?;
        let once = rl_integral(&f, FracParams::left(0.7)?)?;
        worst_ratio = worst_ratio.max(l1_distance(&twice, &once)? / norm);
    }
    Ok((worst_ratio <= TOL, format!("max ratio {worst_ratio:.3e} (tol {TOL:.0e})")))
}

fn caputo_relation(n: usize) -> Result<(bool, String)> {
    const TOL: f64 = 1e-6;
    let s = 0.5;
    let g = unit(n)?;
    let u = sample("poly:1,0,1", &g)?;
    let p = FracParams::left(s)?;
    let rl = rl_derivative(&u, p)?;
    let cap = caputo_derivative(&u, p)?;
    let ua = u.base_value();
    let res = worst((1..=n).map(|j| {
        let x = g.node(j);
        (rl.values()[j] - cap.values()[j] - ua * x.powf(-s) / gamma(1.0 - s)).abs()
    }));
    Ok((res <= TOL, format!("max node residual {res:.3e} (tol {TOL:.0e})")))
}

fn constant_anomaly(n: usize) -> Result<(bool, String)> {
    const TOL: f64 = 1e-2;
    let u = sample("constant:1", &unit(n)?)?;
    let r = sweep_s_to_one_norm(&u, &S_TO_ONE_DEFAULT)?;
    let v = r.last().unwrap_or(f64::NAN);
    let du = total_variation(&u).value;
    let ok = (v - 1.0).abs() <= TOL && du == 0.0;
    Ok((ok, format!("|D^0.999 1|_1 = {v:.6}, |u'|_1 = {du} (tol {TOL:.0e})")))
}

fn weak_star(n: usize) -> Result<(bool, String)> {
    const TOL: f64 = 2e-2;
    let g = unit(n)?;
    let corpus = vec![sample("constant:1", &g)?, sample("heaviside:0.5", &g)?, two_jumps(&g, "constant:0")?];
    let mut err: f64 = 0.0;
    for u in &corpus {
        for r in weak_star_test(u, 0.995, &TestFunction::ALL)? {
            err = err.max(r.error());
        }
    }
    Ok((err <= TOL, format!("max pairing err {err:.3e} (tol {TOL:.0e})")))
}

pub const IPP_PAIRS: [(&str, &str); 3] =
    [("power:2", "poly:1,-2,1"), ("poly:1,0,1", "power:1"), (COS_LIKE, "poly:1,-1")];

fn ipp(n: usize) -> Result<(bool, String)> {
    const TOL: f64 = 5e-3;
    let g = unit(n)?;
    let mut rel: f64 = 0.0;
    for (us, vs) in IPP_PAIRS {
        let (u, v) = (sample(us, &g)?, sample(vs, &g)?);
        for s in [0.3, 0.6] {
            let r = fraccalc::limits::ipp_residual(&u, &v, s)?;
            rel = rel.max(r.residual / r.scale());
        }
    }
    Ok((rel <= TOL, format!("max residual/scale {rel:.3e} (tol {TOL:.0e})")))
}

fn holder(n: usize) -> Result<(bool, String)> {
    const SLACK: f64 = 0.05;
    let u = sample("heaviside:0.5", &unit(n)?)?;
    let mut margin = f64::INFINITY;
    let mut parts = Vec::new();
    for s in [0.3, 0.5, 0.7] {
        let e = holder_exponent(&rl_integral(&u, FracParams::left(s)?)?).value;
        margin = margin.min(e - (s - SLACK));
        parts.push(format!("{s}:{e:.3}"));
    }
    Ok((margin >= 0.0, format!("exponents {} (need >= s - {SLACK})", parts.join(" "))))
}

fn cantor(n: usize) -> Result<(bool, String)> {
    const DRIFT: f64 = 0.2;
    const HOLDER_TOL: f64 = 0.05;
    let s = 0.4;
    let sup = |m: usize| -> Result<(f64, bool)> {
        let u = sample("cantor:12", &unit(m)?)?;
        let d = rl_derivative(&u, FracParams::left(s)?)?;
        let vals = &d.values()[1..];
        Ok((worst(vals.iter().map(|v| v.abs())), vals.iter().all(|v| v.is_finite())))
    };
    let (fine, fine_ok) = sup(n)?;
    let (coarse, coarse_ok) = sup(n / 2)?;
    let drift = (fine - coarse).abs() / fine;
    let e = holder_exponent(&sample("cantor:12", &unit(n)?)?).value;
    let target = 2f64.ln() / 3f64.ln();
    let ok = fine_ok && coarse_ok && drift <= DRIFT && (e - target).abs() <= HOLDER_TOL;
    Ok((ok, format!("sup {coarse:.4} -> {fine:.4} (drift {drift:.3}), holder {e:.4}")))
}

fn marchaud(n: usize) -> Result<(bool, String)> {
    const TOL: f64 = 1e-2;
    let g = unit(n)?;
    let f = sample("power:1", &g)?;
    let p = FracParams::left(0.5)?;
    let u = rl_integral(&f, p)?;
    let dist = l1_distance(&marchaud_derivative(&u, p, g.h())?, &f)?;
    let r = marchaud_eps_diagnostic(&u, 0.5, &default_eps_list(&g), None)?;
    let decreasing = r.points.windows(2).all(|w| w[1].1 < w[0].1);
    let ok = dist <= TOL && decreasing;
    Ok((ok, format!("|D_h u - f|_1 = {dist:.3e} (tol {TOL:.0e}), increments decreasing: {decreasing}")))
}

/// Error of the product rule for `∫₀¹ t³(1 − t)^{−1/2} dt = 32/35`.
pub fn product_rule_error(n: usize) -> Result<f64> {
    let g = unit(n)?;
    let rule = ProductRule::new(&g, -0.5)?;
    let vals: Vec<f64> = g.nodes().iter().map(|t| t.powi(3)).collect();
    Ok((rule.integrate(&vals, n) - 32.0 / 35.0).abs())
}

fn quadrature_order(_n: usize) -> Result<(bool, String)> {
    let (lo, hi) = (product_rule_error(256)?, product_rule_error(2048)?);
    let order = (lo / hi).ln() / 8f64.ln();
    Ok(((1.8..=2.2).contains(&order), format!("empirical order {order:.3} (need [1.8, 2.2])")))
}

pub const EMBEDDING_CORPUS: [&str; 5] = ["power:1", "power:2", "heaviside:0.5", COS_LIKE, "poly:0,1,-1"];

fn max_embedding_ratio(n: usize) -> Result<f64> {
    let g = unit(n)?;
    let mut m: f64 = 0.0;
    for spec in EMBEDDING_CORPUS {
        m = m.max(embedding_report(&sample(spec, &g)?, 0.3, 0.6)?.ratio);
    }
    Ok(m)
}

fn embedding(n: usize) -> Result<(bool, String)> {
    const DRIFT: f64 = 0.1;
    let (coarse, fine) = (max_embedding_ratio(n / 2)?, max_embedding_ratio(n)?);
    let drift = (fine - coarse).abs() / fine;
    Ok((fine.is_finite() && drift <= DRIFT, format!("max ratio {coarse:.4} -> {fine:.4} (drift {drift:.3})")))
}

fn weierstrass(n: usize) -> Result<(bool, String)> {
    let u = sample("weierstrass:2:20", &unit(n)?)?;
    let rep = boundedness_report(&u, &BOUNDEDNESS_ORDERS)?;
    let ok = rep.iter().all(|p| p.sup.is_finite());
    let parts: Vec<String> = rep.iter().map(|p| format!("{}:{:.3}", p.s, p.sup)).collect();
    Ok((ok, format!("sup |D^s W| {}", parts.join(" "))))
}

pub fn criteria() -> Vec<Criterion> {
    macro_rules! c {
        ($id:expr, $key:expr, $title:expr, $f:expr) => {
            Criterion { id: $id, key: $key, title: $title, run: $f }
        };
    }
    vec![
        c!(1, "power", "RL derivative of x^k vs closed form", power_closed_form),
        c!(2, "null", "RL derivative of x^(s-1) vanishes", null_derivative),
        c!(3, "heaviside", "L1 norm of D^s of a step", heaviside_norm),
        c!(4, "strict", "strict convergence to TV at s=0.999", strict_convergence),
        c!(5, "sbv", "L1 norm of D^s tends to SBV norm", sbv_limit),
        c!(6, "s-to-zero", "I^s u -> u as s -> 0", s_to_zero),
        c!(7, "inversion", "D^s I^s f = f", inversion),
        c!(8, "semigroup", "I^0.3 I^0.4 = I^0.7", semigroup),
        c!(9, "caputo", "RL - Caputo = u(a) x^-s / Gamma(1-s)", caputo_relation),
        c!(10, "constant", "constant function anomaly", constant_anomaly),
        c!(11, "weak-star", "weak-* pairings against test functions", weak_star),
        c!(12, "ipp", "fractional integration by parts", ipp),
        c!(13, "holder", "Holder regularisation of I^s", holder),
        c!(14, "cantor", "Cantor-Vitali derivative and exponent", cantor),
        c!(15, "marchaud", "Marchaud derivative recovers f", marchaud),
        c!(16, "quadrature", "product rule convergence order", quadrature_order),
        c!(17, "embedding", "embedding ratio stable under refinement", embedding),
        c!(18, "weierstrass", "Weierstrass derivatives bounded", weierstrass),
    ]
}

/// Runs every criterion whose key or id matches `only` (all when `None`),
/// in parallel; results keep the criterion order.
pub fn run(n: usize, only: Option<&str>) -> Vec<CriterionResult> {
    criteria()
        .into_par_iter()
        .filter(|c| only.is_none_or(|o| o == c.key || o == c.id.to_string()))
        .map(|c| c.run(n))
        .collect()
}

/// Fixed-width pass/fail table.
pub fn format_table(results: &[CriterionResult]) -> String {
    let mut out = String::new();
    for r in results {
        let verdict = if r.passed { "PASS" } else { "FAIL" };
        out.push_str(&format!("{verdict} {:>2} {:<11} {:<42} {}\n", r.id, r.key, r.title, r.measured));
    }
    let passed = results.iter().filter(|r| r.passed).count();
    out.push_str(&format!("{passed}/{} criteria passed\n", results.len()));
    out
}
