use std::fmt;
use std::str::FromStr;

use super::{Grid, Jump, PowerTerm, SbvFunction, Side};
use crate::error::{Error, Result};

pub const DEFAULT_CANTOR_LEVEL: u32 = 12;
pub const DEFAULT_WEIERSTRASS_Q: f64 = 2.0;
pub const DEFAULT_WEIERSTRASS_TERMS: u32 = 20;

/// Analytic test functions addressable by name (`power:1.5`,
/// `heaviside:0.25`, `cantor:12`, `weierstrass:2:20`, ...).
#[derive(Debug, Clone, PartialEq)]
pub enum CorpusFunction {
    /// `x^k`, `k > −1`.
    Power {
        k: f64,
    },
    Constant {
        c: f64,
    },
    /// `χ_{[α, b]}`.
    Heaviside {
        alpha: f64,
    },
    /// `Σ coeffs[i]·x^i`.
    Polynomial {
        coeffs: Vec<f64>,
    },
    CantorVitali {
        level: u32,
    },
    /// Real part of `Σ_{n<terms} q^{−n}(e^{i qⁿ x} − e^{i qⁿ a})`.
    Weierstrass {
        q: f64,
        terms: u32,
    },
    /// `1/ln(x/2)`, extended by 0 at `x = 0`.
    LogReciprocal,
}

/// Cantor–Vitali staircase, `level` steps of the self-similar recursion
/// started from the identity.
pub fn cantor_vitali_eval(level: u32, x: f64) -> Result<f64> {
    if level < 1 {
        return Err(Error::domain("cantor level must be >= 1"));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!("cantor_vitali_eval needs x in [0, 1], got {x}")));
    }
    let third = 1.0 / 3.0;
    let mut x = x;
    let mut acc = 0.0;
    let mut weight = 1.0;
    for _ in 0..level {
        if x < third {
            x *= 3.0;
            weight *= 0.5;
        } else if x <= 2.0 * third {
            return Ok(acc + 0.5 * weight);
        } else {
            acc += 0.5 * weight;
            weight *= 0.5;
            x = 3.0 * x - 2.0;
        }
    }
    Ok(acc + weight * x)
}

pub fn weierstrass_eval(q: f64, terms: u32, a: f64, x: f64) -> Result<f64> {
    if !(q.is_finite() && q > 1.0) {
        return Err(Error::domain(format!("weierstrass needs q > 1, got {q}")));
    }
    if terms < 1 {
        return Err(Error::domain("weierstrass needs at least one term"));
    }
    let mut freq = 1.0;
    let mut amp = 1.0;
    let mut sum = 0.0;
    for _ in 0..terms {
        sum += amp * ((freq * x).cos() - (freq * a).cos());
        freq *= q;
        amp /= q;
    }
    Ok(sum)
}

fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Coefficients of `p(x0 + sign·y)` in powers of `y`.
fn poly_shift(coeffs: &[f64], x0: f64, sign: f64) -> Vec<f64> {
    let mut d = coeffs.to_vec();
    let n = d.len();
    // repeated synthetic division by (x − x0)
    for i in 0..n {
        for k in (i..n - 1).rev() {
            d[k] += x0 * d[k + 1];
        }
    }
    let mut s = 1.0;
    for v in d.iter_mut() {
        *v *= s;
        s *= sign;
    }
    d
}

impl CorpusFunction {
    /// Rejects parameters outside their declared range on `[a, b]`.
    pub fn validate(&self, a: f64, b: f64) -> Result<()> {
        match self {
            CorpusFunction::Power { k } => {
                if !(k.is_finite() && *k > -1.0) {
                    return Err(Error::domain(format!("power exponent must be > -1, got {k}")));
                }
                let integer = k.fract() == 0.0 && *k >= 0.0;
                if !integer && a < 0.0 {
                    return Err(Error::domain("non-integer power needs a >= 0"));
                }
                Ok(())
            }
            CorpusFunction::Constant { c } if !c.is_finite() => Err(Error::domain("constant must be finite")),
            CorpusFunction::Constant { .. } => Ok(()),
            CorpusFunction::Heaviside { alpha } => {
                if *alpha > a && *alpha < b {
                    Ok(())
                } else {
                    Err(Error::domain(format!("heaviside location {alpha} must lie in ({a}, {b})")))
                }
            }
            CorpusFunction::Polynomial { coeffs } => {
                if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
                    Err(Error::domain("polynomial needs finite coefficients"))
                } else {
                    Ok(())
                }
            }
            CorpusFunction::CantorVitali { level } => {
                if *level < 1 || *level > 60 {
                    return Err(Error::domain(format!("cantor level must lie in 1..=60, got {level}")));
                }
                if a < 0.0 || b > 1.0 {
                    return Err(Error::domain("cantor function lives on [0, 1]"));
                }
                Ok(())
            }
            CorpusFunction::Weierstrass { q, terms } => weierstrass_eval(*q, *terms, a, a).map(|_| ()),
            CorpusFunction::LogReciprocal => {
                if a < 0.0 || b >= 2.0 {
                    Err(Error::domain("log-reciprocal needs [a, b] inside [0, 2)"))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Pointwise value; `a` is the left end of the interval in use.
    pub fn eval(&self, a: f64, x: f64) -> f64 {
        match self {
            CorpusFunction::Power { k } => {
                if *k == 0.0 {
                    1.0
                } else if x == 0.0 && *k < 0.0 {
                    f64::INFINITY
                } else {
                    x.powf(*k)
                }
            }
            CorpusFunction::Constant { c } => *c,
            CorpusFunction::Heaviside { alpha } => {
                if x >= *alpha {
                    1.0
                } else {
                    0.0
                }
            }
            CorpusFunction::Polynomial { coeffs } => poly_eval(coeffs, x),
            CorpusFunction::CantorVitali { level } => cantor_vitali_eval(*level, x.clamp(0.0, 1.0)).unwrap_or(f64::NAN),
            CorpusFunction::Weierstrass { q, terms } => weierstrass_eval(*q, *terms, a, x).unwrap_or(f64::NAN),
            CorpusFunction::LogReciprocal => {
                if x == 0.0 {
                    0.0
                } else {
                    1.0 / (x / 2.0).ln()
                }
            }
        }
    }

    /// Samples the function on `grid`. Steps become symbolic jumps; a
    /// power with `−1 < k < 0` anchored at `a = 0` gets the endpoint value
    /// that makes the first cell's trapezoid integral exact.
    pub fn sample(&self, grid: &Grid) -> Result<SbvFunction> {
        self.validate(grid.a(), grid.b())?;
        let a = grid.a();
        match self {
            CorpusFunction::Heaviside { alpha } => {
                SbvFunction::new(*grid, vec![0.0; grid.n() + 1], vec![Jump::new(*alpha, 1.0)], 0.0)
            }
            CorpusFunction::Power { k } if *k < 0.0 && a == 0.0 => {
                let h = grid.h();
                let mut values: Vec<f64> = grid.nodes().iter().map(|&x| self.eval(a, x)).collect();
                values[0] = h.powf(*k) * (2.0 / (k + 1.0) - 1.0);
                SbvFunction::from_samples(*grid, &values)
            }
            _ => {
                let values: Vec<f64> = grid.nodes().iter().map(|&x| self.eval(a, x)).collect();
                SbvFunction::from_samples(*grid, &values)
            }
        }
    }

    /// Exact decomposition into power terms anchored on `side`, when one
    /// exists.
    pub fn power_expansion(&self, side: Side, a: f64, b: f64) -> Option<Vec<PowerTerm>> {
        let base = match side {
            Side::Left => a,
            Side::Right => b,
        };
        let term = |origin: f64, coeff: f64, exponent: f64| PowerTerm { origin, coeff, exponent, side };
        match self {
            CorpusFunction::Constant { c } => Some(vec![term(base, *c, 0.0)]),
            CorpusFunction::Heaviside { alpha } => match side {
                Side::Left => Some(vec![term(*alpha, 1.0, 0.0)]),
                Side::Right => Some(vec![term(b, 1.0, 0.0), term(*alpha, -1.0, 0.0)]),
            },
            CorpusFunction::Power { k } if k.fract() == 0.0 && *k >= 0.0 && !(side == Side::Left && a == 0.0) => {
                let mut coeffs = vec![0.0; *k as usize + 1];
                coeffs[*k as usize] = 1.0;
                CorpusFunction::Polynomial { coeffs }.power_expansion(side, a, b)
            }
            CorpusFunction::Power { k } => (side == Side::Left && a == 0.0).then(|| vec![term(0.0, 1.0, *k)]),
            CorpusFunction::Polynomial { coeffs } => {
                let sign = if side == Side::Left { 1.0 } else { -1.0 };
                let shifted = poly_shift(coeffs, base, sign);
                Some(
                    shifted
                        .iter()
                        .enumerate()
                        .filter(|(_, c)| **c != 0.0)
                        .map(|(i, c)| term(base, *c, i as f64))
                        .collect(),
                )
            }
            _ => None,
        }
    }

    /// Closed-form `I^order` on `side` at `x`.
    pub fn exact_integral(&self, side: Side, order: f64, a: f64, b: f64, x: f64) -> Option<f64> {
        let terms = self.power_expansion(side, a, b)?;
        Some(terms.iter().map(|t| t.integrated(order).eval(x)).sum())
    }

    /// Closed-form Riemann–Liouville `D^s` on `side` at `x`.
    pub fn exact_derivative(&self, side: Side, s: f64, a: f64, b: f64, x: f64) -> Option<f64> {
        let terms = self.power_expansion(side, a, b)?;
        let mut sum = 0.0;
        for t in &terms {
            if let Some(d) = t.differentiated(s).ok()? {
                sum += d.eval(x);
            }
        }
        Some(sum)
    }

    /// Closed-form Caputo derivative; `None` for discontinuous or
    /// non-absolutely-continuous members.
    pub fn exact_caputo(&self, side: Side, s: f64, a: f64, b: f64, x: f64) -> Option<f64> {
        match self {
            CorpusFunction::Heaviside { .. } => return None,
            CorpusFunction::Power { k } if *k > 0.0 && *k < 1.0 && a != 0.0 => return None,
            CorpusFunction::Power { k } if *k < 0.0 => return None,
            _ => {}
        }
        let terms = self.power_expansion(side, a, b)?;
        let mut sum = 0.0;
        for t in terms.iter().filter(|t| t.exponent != 0.0) {
            if let Some(d) = t.differentiated(s).ok()? {
                sum += d.eval(x);
            }
        }
        Some(sum)
    }
}

fn need<'a>(rest: Option<&'a str>, spec: &str) -> Result<&'a str> {
    rest.ok_or_else(|| Error::invalid(format!("function spec '{spec}' needs a parameter")))
}

impl FromStr for CorpusFunction {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (name, rest) = match spec.split_once(':') {
            Some((n, r)) => (n, Some(r)),
            None => (spec, None),
        };
        let num = |s: &str| -> Result<f64> {
            s.trim().parse::<f64>().map_err(|_| Error::invalid(format!("bad number '{s}' in function spec '{spec}'")))
        };
        let int = |s: &str| -> Result<u32> {
            s.trim().parse::<u32>().map_err(|_| Error::invalid(format!("bad integer '{s}' in function spec '{spec}'")))
        };
        let f = match name {
            "power" => CorpusFunction::Power { k: num(need(rest, spec)?)? },
            "constant" | "const" => CorpusFunction::Constant { c: num(need(rest, spec)?)? },
            "heaviside" | "step" => CorpusFunction::Heaviside { alpha: num(need(rest, spec)?)? },
            "poly" | "polynomial" => {
                let coeffs = need(rest, spec)?.split(',').map(num).collect::<Result<Vec<_>>>()?;
                CorpusFunction::Polynomial { coeffs }
            }
            "cantor" => {
                CorpusFunction::CantorVitali { level: rest.map(int).transpose()?.unwrap_or(DEFAULT_CANTOR_LEVEL) }
            }
            "weierstrass" => {
                let (q, terms) = match rest {
                    None => (DEFAULT_WEIERSTRASS_Q, DEFAULT_WEIERSTRASS_TERMS),
                    Some(r) => match r.split_once(':') {
                        Some((q, t)) => (num(q)?, int(t)?),
                        None => (num(r)?, DEFAULT_WEIERSTRASS_TERMS),
                    },
                };
                CorpusFunction::Weierstrass { q, terms }
            }
            "log-reciprocal" | "logrecip" if rest.is_none() => CorpusFunction::LogReciprocal,
            _ => return Err(Error::invalid(format!("unknown function spec '{spec}'"))),
        };
        Ok(f)
    }
}

impl fmt::Display for CorpusFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorpusFunction::Power { k } => write!(f, "power:{k}"),
            CorpusFunction::Constant { c } => write!(f, "constant:{c}"),
            CorpusFunction::Heaviside { alpha } => write!(f, "heaviside:{alpha}"),
            CorpusFunction::Polynomial { coeffs } => {
                let parts: Vec<String> = coeffs.iter().map(|c| c.to_string()).collect();
                write!(f, "poly:{}", parts.join(","))
            }
            CorpusFunction::CantorVitali { level } => write!(f, "cantor:{level}"),
            CorpusFunction::Weierstrass { q, terms } => write!(f, "weierstrass:{q}:{terms}"),
            CorpusFunction::LogReciprocal => write!(f, "log-reciprocal"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(n: usize) -> Grid {
        Grid::unit(n).unwrap()
    }

    #[test]
    fn sample_heaviside_is_a_symbolic_jump() {
        let u = CorpusFunction::Heaviside { alpha: 0.25 }.sample(&unit(8)).unwrap();
        assert_eq!(u.jumps(), &[Jump::new(0.25, 1.0)]);
        assert!(u.ac_values().iter().all(|v| *v == 0.0));
        assert_eq!(u.base_value(), 0.0);
    }

    #[test]
    fn sample_constant_and_identity() {
        let u = CorpusFunction::Constant { c: 1.0 }.sample(&unit(8)).unwrap();
        assert!(u.ac_values().iter().all(|v| *v == 0.0));
        assert_eq!(u.base_value(), 1.0);
        assert!(u.jumps().is_empty());
        let v = CorpusFunction::Power { k: 1.0 }.sample(&unit(4)).unwrap();
        assert_eq!(v.ac_values(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(v.base_value(), 0.0);
    }

    #[test]
    fn sample_rejects_out_of_range_parameters() {
        assert!(CorpusFunction::Heaviside { alpha: 1.0 }.sample(&unit(8)).is_err());
        assert!(CorpusFunction::Power { k: -1.0 }.sample(&unit(8)).is_err());
        assert!(CorpusFunction::Power { k: 0.5 }.sample(&Grid::new(-1.0, 1.0, 8).unwrap()).is_err());
        assert!(CorpusFunction::CantorVitali { level: 0 }.sample(&unit(8)).is_err());
        assert!(CorpusFunction::Weierstrass { q: 1.0, terms: 3 }.sample(&unit(8)).is_err());
    }

    #[test]
    fn singular_power_first_cell_mass_is_exact() {
        let g = unit(64);
        let u = CorpusFunction::Power { k: -0.5 }.sample(&g).unwrap();
        let vals = u.node_values();
        let trap = 0.5 * g.h() * (vals[0] + vals[1]);
        assert!((trap - 2.0 * g.h().sqrt()).abs() < 1e-13);
    }

    #[test]
    fn cantor_examples() {
        for level in [1, 5, 12] {
            assert_eq!(cantor_vitali_eval(level, 0.5).unwrap(), 0.5);
            assert!((cantor_vitali_eval(level, 1.0).unwrap() - 1.0).abs() < 1e-15);
            assert_eq!(cantor_vitali_eval(level, 0.0).unwrap(), 0.0);
        }
        assert!((cantor_vitali_eval(3, 1.0 / 9.0).unwrap() - 0.25).abs() < 1e-15);
        assert!(cantor_vitali_eval(3, 1.5).is_err());
    }

    #[test]
    fn weierstrass_examples() {
        assert_eq!(weierstrass_eval(2.0, 20, 0.0, 0.0).unwrap(), 0.0);
        assert!((weierstrass_eval(2.0, 1, 0.0, std::f64::consts::PI).unwrap() + 2.0).abs() < 1e-15);
        // mpmath, 40 digits
        assert!((weierstrass_eval(2.0, 20, 0.0, 0.5).unwrap() + 1.063_885_688_448_098_0).abs() < 1e-14);
        assert!(weierstrass_eval(0.5, 20, 0.0, 0.5).is_err());
    }

    #[test]
    fn parse_and_display() {
        for s in [
            "power:1.5",
            "constant:1",
            "heaviside:0.25",
            "poly:1,0,-0.5",
            "cantor:12",
            "weierstrass:2:20",
            "log-reciprocal",
        ] {
            let f: CorpusFunction = s.parse().unwrap();
            assert_eq!(f.to_string(), s);
        }
        assert_eq!("cantor".parse::<CorpusFunction>().unwrap(), CorpusFunction::CantorVitali { level: 12 });
        assert!("power".parse::<CorpusFunction>().is_err());
        assert!("power:x".parse::<CorpusFunction>().is_err());
        assert!("sine:1".parse::<CorpusFunction>().is_err());
    }

    #[test]
    fn polynomial_shift_round_trip() {
        let coeffs = [1.0, -2.0, 3.0, 0.5];
        let shifted = poly_shift(&coeffs, 0.7, -1.0);
        for x in [0.0, 0.3, 1.1] {
            let y = 0.7 - x;
            assert!((poly_eval(&coeffs, x) - poly_eval(&shifted, y)).abs() < 1e-13);
        }
    }

    #[test]
    fn exact_power_derivative() {
        let f = CorpusFunction::Power { k: 2.0 };
        let got = f.exact_derivative(Side::Left, 0.5, 0.0, 1.0, 0.64).unwrap();
        // Γ(3)/Γ(2.5)·0.64^{1.5}
        let want = 2.0 / 1.329_340_388_179_137 * 0.512;
        assert!((got - want).abs() < 1e-13);
        let null = CorpusFunction::Power { k: -0.5 };
        assert_eq!(null.exact_derivative(Side::Left, 0.5, 0.0, 1.0, 0.3).unwrap(), 0.0);
    }
}
