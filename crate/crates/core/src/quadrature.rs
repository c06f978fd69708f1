//! Product integration of piecewise-linear data against weakly singular
//! power kernels `(x − t)^σ`, plus the small set of generic rules the
//! functionals need.
//!
//! On a uniform grid the weight a node `x_k` receives when integrating up
//! to `x_j` only depends on `m = j − k`, so a [`ProductRule`] stores two
//! length-`n` tables (left and right hat contributions of one cell) and
//! every `KernelWeights` vector is assembled from them. Far cells use a
//! binomial series instead of the closed form, which would otherwise lose
//! `log10(m)` digits to cancellation.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::funcspace::Grid;

/// `hi^p − lo^p` for `0 ≤ lo ≤ hi`, accurate when `lo ≈ hi`.
pub fn power_diff(lo: f64, hi: f64, p: f64) -> f64 {
    debug_assert!(lo >= 0.0 && hi >= lo);
    if hi == lo {
        return 0.0;
    }
    if lo == 0.0 {
        return hi.powf(p);
    }
    -hi.powf(p) * (p * ((lo - hi) / hi).ln_1p()).exp_m1()
}

/// `∫_lo^hi y^μ dy` for `0 ≤ lo ≤ hi` (needs `lo > 0` when `μ ≤ −1`).
pub fn power_moment(lo: f64, hi: f64, mu: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    if mu == -1.0 {
        return ((hi - lo) / lo).ln_1p();
    }
    power_diff(lo, hi, mu + 1.0) / (mu + 1.0)
}

/// `∫_c^x (x − t)^σ dt = (x − c)^{σ+1}/(σ+1)`.
pub fn singular_moment(x: f64, c: f64, sigma: f64) -> Result<f64> {
    if !(sigma > -1.0 && sigma < 1.0) {
        return Err(Error::domain(format!("kernel exponent must lie in (-1, 1), got {sigma}")));
    }
    if c > x {
        return Err(Error::domain(format!("singular_moment needs c <= x, got c = {c}, x = {x}")));
    }
    if c == x {
        return Ok(0.0);
    }
    Ok((x - c).powf(sigma + 1.0) / (sigma + 1.0))
}

/// Quadrature weights for one evaluation node `x_j`:
/// `Σ_k node_weights[k]·u(x_k) = ∫_a^{x_j} ℓ[u](t)·(x_j − t)^σ dt`
/// for the piecewise-linear interpolant `ℓ[u]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelWeights {
    pub exponent: f64,
    pub node_weights: Vec<f64>,
}

impl KernelWeights {
    pub fn apply(&self, values: &[f64]) -> f64 {
        self.node_weights.iter().zip(values).map(|(w, u)| w * u).sum()
    }
}

/// Weights for node `j` (`1 ≤ j ≤ n`) and kernel exponent `σ ∈ (−1, 1) \ {0}`.
pub fn product_weights(grid: &Grid, j: usize, sigma: f64) -> Result<KernelWeights> {
    if sigma == 0.0 {
        return Err(Error::domain("sigma = 0 is the plain trapezoid rule; use ProductRule::trapezoid"));
    }
    if j == 0 || j > grid.n() {
        return Err(Error::domain(format!("node index must lie in 1..={}, got {j}", grid.n())));
    }
    let rule = ProductRule::cached(grid, sigma)?;
    Ok(KernelWeights { exponent: sigma, node_weights: rule.weights(j) })
}

/// Cell tables for the kernel `(x_j − t)^σ` on a uniform grid.
#[derive(Debug, Clone)]
pub struct ProductRule {
    sigma: f64,
    n: usize,
    /// Smallest admissible `m = j − c` (cells closer than this are skipped).
    m_min: usize,
    /// `left[m]`: weight of a cell's left node, cell `m` cells behind `x_j`.
    left: Vec<f64>,
    right: Vec<f64>,
}

const SERIES_FROM: usize = 16;

impl ProductRule {
    /// Exact rule for `σ ∈ (−1, 1)`; `σ = 0` gives the trapezoid rule.
    pub fn new(grid: &Grid, sigma: f64) -> Result<Self> {
        if !(sigma > -1.0 && sigma < 1.0) {
            return Err(Error::domain(format!("kernel exponent must lie in (-1, 1), got {sigma}")));
        }
        if sigma == 0.0 {
            return Ok(Self::trapezoid(grid));
        }
        Ok(Self::build(grid, sigma, 1))
    }

    pub fn trapezoid(grid: &Grid) -> Self {
        let h = grid.h();
        let mut left = vec![0.5 * h; grid.n() + 1];
        left[0] = 0.0;
        let right = left.clone();
        ProductRule { sigma: 0.0, n: grid.n(), m_min: 1, left, right }
    }

    /// Rule restricted to cells at least `m_min ≥ 2` cells behind the
    /// evaluation node, where any exponent (e.g. the hypersingular
    /// `−1 − s` of the Marchaud quotient) is integrable.
    pub fn far_field(grid: &Grid, sigma: f64, m_min: usize) -> Result<Self> {
        if m_min < 2 {
            return Err(Error::domain("far-field rule needs m_min >= 2"));
        }
        if !sigma.is_finite() || sigma == -1.0 || sigma == -2.0 {
            return Err(Error::domain(format!("unsupported far-field exponent {sigma}")));
        }
        Ok(Self::build(grid, sigma, m_min))
    }

    /// Shared rule from the process-wide cache.
    pub fn cached(grid: &Grid, sigma: f64) -> Result<Arc<Self>> {
        type Key = (u64, u64, usize, u64);
        static CACHE: OnceLock<RwLock<HashMap<Key, Arc<ProductRule>>>> = OnceLock::new();
        let key = (grid.a().to_bits(), grid.b().to_bits(), grid.n(), sigma.to_bits());
        let cache = CACHE.get_or_init(Default::default);
        if let Some(rule) = cache.read().expect("weight cache poisoned").get(&key) {
            return Ok(Arc::clone(rule));
        }
        let rule = Arc::new(ProductRule::new(grid, sigma)?);
        let mut guard = cache.write().expect("weight cache poisoned");
        if guard.len() >= 512 {
            guard.clear();
        }
        Ok(Arc::clone(guard.entry(key).or_insert(rule)))
    }

    fn build(grid: &Grid, sigma: f64, m_min: usize) -> Self {
        let n = grid.n();
        let scale = grid.h().powf(sigma + 1.0);
        let mut left = vec![0.0; n + 1];
        let mut right = vec![0.0; n + 1];
        for m in m_min.max(1)..=n {
            let (l, r) = unit_cell_weights(m, sigma);
            left[m] = scale * l;
            right[m] = scale * r;
        }
        ProductRule { sigma, n, m_min, left, right }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Dense weight vector for node `j`.
    pub fn weights(&self, j: usize) -> Vec<f64> {
        let mut w = vec![0.0; j + 1];
        for c in 0..j {
            let m = j - c;
            if m < self.m_min {
                continue;
            }
            w[c] += self.left[m];
            w[c + 1] += self.right[m];
        }
        w
    }

    /// `∫_a^{x_j} ℓ[u](t)(x_j − t)^σ dt` over the admissible cells.
    pub fn integrate(&self, values: &[f64], j: usize) -> f64 {
        debug_assert!(values.len() > j);
        let mut acc = 0.0;
        if j < self.m_min {
            return 0.0;
        }
        for c in 0..=(j - self.m_min) {
            let m = j - c;
            acc += values[c] * self.left[m] + values[c + 1] * self.right[m];
        }
        acc
    }

    /// [`Self::integrate`] for every node; entry 0 is zero.
    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        assert_eq!(values.len(), self.n + 1, "values must live on the rule's grid");
        (0..=self.n).into_par_iter().map(|j| self.integrate(values, j)).collect()
    }
}

/// `(∫₀¹ (1−θ)(m−θ)^σ dθ, ∫₀¹ θ(m−θ)^σ dθ)` for unit spacing.
fn unit_cell_weights(m: usize, sigma: f64) -> (f64, f64) {
    let mf = m as f64;
    if m < SERIES_FROM {
        let m0 = power_diff(mf - 1.0, mf, sigma + 1.0) / (sigma + 1.0);
        let m1 = power_diff(mf - 1.0, mf, sigma + 2.0) / (sigma + 2.0);
        let r = if m == 1 { 1.0 / ((sigma + 1.0) * (sigma + 2.0)) } else { mf * m0 - m1 };
        let l = if m == 1 { 1.0 / (sigma + 2.0) } else { m0 - r };
        return (l, r);
    }
    // (m − θ)^σ = m^σ Σ_i C(σ, i) (−θ/m)^i
    let mut binom = 1.0;
    let mut ratio_pow = 1.0;
    let mut l = 0.0;
    let mut r = 0.0;
    for i in 0..80 {
        let fi = i as f64;
        let term = binom * ratio_pow;
        let dl = term / ((fi + 1.0) * (fi + 2.0));
        let dr = term / (fi + 2.0);
        l += dl;
        r += dr;
        if dr.abs() < 1e-18 * r.abs() {
            break;
        }
        binom *= (sigma - fi) / (fi + 1.0);
        ratio_pow *= -1.0 / mf;
    }
    let lead = mf.powf(sigma);
    (lead * l, lead * r)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to `[lo, hi]`.
pub fn gauss_on<F: Fn(f64) -> f64>(rule: &(Vec<f64>, Vec<f64>), lo: f64, hi: f64, f: F) -> f64 {
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    rule.0.iter().zip(&rule.1).map(|(x, w)| w * f(mid + half * x)).sum::<f64>() * half
}

/// Tanh-sinh quadrature of `f` over `[0, 1]`.
///
/// `f` receives `(t, 1 − t)` with both computed to full relative accuracy,
/// so integrands singular at either end can measure the distance to it.
pub fn tanh_sinh<F: Fn(f64, f64) -> f64>(f: F, tol: f64) -> f64 {
    const U_MAX: f64 = 4.5;
    let eval = |u: f64| -> f64 {
        let v = 0.5 * PI * u.sinh();
        let t = 1.0 / (1.0 + (-2.0 * v).exp());
        let tc = 1.0 / (1.0 + (2.0 * v).exp());
        if t <= 0.0 || tc <= 0.0 {
            return 0.0;
        }
        let w = 2.0 * t * tc * 0.5 * PI * u.cosh();
        if w == 0.0 {
            return 0.0;
        }
        let y = f(t, tc);
        if y.is_finite() {
            w * y
        } else {
            0.0
        }
    };
    let mut step = 0.5;
    let mut sum = eval(0.0);
    let mut k = 1;
    while (k as f64) * step <= U_MAX {
        let u = k as f64 * step;
        sum += eval(u) + eval(-u);
        k += 1;
    }
    let mut estimate = sum * step;
    for _ in 0..8 {
        step *= 0.5;
        let mut extra = 0.0;
        let mut k = 1;
        while (k as f64) * step <= U_MAX {
            let u = k as f64 * step;
            extra += eval(u) + eval(-u);
            k += 2;
        }
        sum += extra;
        let next = sum * step;
        let done = (next - estimate).abs() <= tol * next.abs().max(1e-300);
        estimate = next;
        if done {
            break;
        }
    }
    estimate
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(n: usize) -> Grid {
        Grid::unit(n).unwrap()
    }

    #[test]
    fn singular_moment_examples() {
        assert!((singular_moment(1.0, 0.25, -0.5).unwrap() - 1.732_050_807_568_877_2).abs() < 1e-15);
        assert_eq!(singular_moment(0.3, 0.3, 0.2).unwrap(), 0.0);
        assert!((singular_moment(1.0, 0.0, 0.5).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(singular_moment(0.2, 0.3, 0.5).is_err());
        assert!(singular_moment(1.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn constant_and_linear_examples() {
        let g = unit(16);
        let w = product_weights(&g, 16, -0.5).unwrap();
        let ones = vec![1.0; 17];
        assert!((w.apply(&ones) - 2.0).abs() < 1e-13);
        let t: Vec<f64> = g.nodes();
        assert!((w.apply(&t) - 4.0 / 3.0).abs() < 1e-13);
    }

    // Reference: mpmath integral of the interpolant of t² against (1−t)^−0.3
    // on 64 cells, cell by cell at 40 digits.
    #[test]
    fn quadratic_reference_n64() {
        let g = unit(64);
        let w = product_weights(&g, 64, -0.3).unwrap();
        let u: Vec<f64> = g.nodes().iter().map(|t| t * t).collect();
        let got = w.apply(&u);
        assert!((got - 0.622_529_060_294_022_5).abs() < 1e-12, "{got}");
    }

    #[test]
    fn rejects_bad_arguments() {
        let g = unit(8);
        assert!(product_weights(&g, 0, -0.5).is_err());
        assert!(product_weights(&g, 9, -0.5).is_err());
        assert!(product_weights(&g, 4, 0.0).is_err());
        assert!(product_weights(&g, 4, -1.0).is_err());
        assert!(product_weights(&g, 4, 1.0).is_err());
    }

    #[test]
    fn weights_nonnegative_for_negative_sigma() {
        let g = unit(64);
        for sigma in [-0.95, -0.5, -0.05] {
            for j in [1, 17, 64] {
                let w = product_weights(&g, j, sigma).unwrap();
                assert!(w.node_weights.iter().all(|&x| x >= 0.0 && x.is_finite()));
            }
        }
    }

    #[test]
    fn series_and_closed_form_agree_at_switch() {
        for sigma in [-0.999, -0.7, -0.2, 0.3, 0.9, -1.4] {
            let m = SERIES_FROM;
            let (l_series, r_series) = unit_cell_weights(m, sigma);
            let mf = m as f64;
            let m0 = power_diff(mf - 1.0, mf, sigma + 1.0) / (sigma + 1.0);
            let m1 = power_diff(mf - 1.0, mf, sigma + 2.0) / (sigma + 2.0);
            let r = mf * m0 - m1;
            let l = m0 - r;
            assert!(((r - r_series) / r).abs() < 1e-12, "sigma {sigma}: {r} vs {r_series}");
            assert!(((l - l_series) / l).abs() < 1e-12, "sigma {sigma}: {l} vs {l_series}");
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let rule = gauss_legendre(5);
        let got = gauss_on(&rule, 0.0, 2.0, |x| x.powi(9));
        assert!((got - 2f64.powi(10) / 10.0).abs() < 1e-11);
    }

    #[test]
    fn tanh_sinh_handles_endpoint_singularity() {
        let got = tanh_sinh(|t, _| t.powf(-0.5), 1e-12);
        assert!((got - 2.0).abs() < 1e-9, "{got}");
        let got = tanh_sinh(|_, tc| tc.powf(-0.7), 1e-12);
        assert!((got - 1.0 / 0.3).abs() < 1e-7, "{got}");
    }
}
