//! Gamma and Beta functions on the positive half-line.
//!
//! Every operator kernel is normalized by a Gamma value with a positive
//! argument, so the public surface only accepts [`PositiveReal`]. The one
//! exception is [`recip_gamma`], which extends `1/Γ` to `(-1, ∞)` so that
//! power-law closed forms can hit the pole at zero (where `1/Γ(0) = 0`).

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// A finite, strictly positive real number.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PositiveReal(f64);

impl PositiveReal {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 {
            Ok(PositiveReal(value))
        } else {
            Err(Error::domain(format!("expected a finite positive real, got {value}")))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for PositiveReal {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        PositiveReal::new(value)
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(x) for a positive argument.
pub fn gamma(x: PositiveReal) -> f64 {
    gamma_pos(x.0)
}

/// Γ(x), rejecting non-positive or non-finite arguments.
pub fn try_gamma(x: f64) -> Result<f64> {
    PositiveReal::new(x).map(gamma)
}

/// B(p, q) = Γ(p)Γ(q)/Γ(p+q).
pub fn beta(p: PositiveReal, q: PositiveReal) -> f64 {
    gamma_pos(p.0) * gamma_pos(q.0) / gamma_pos(p.0 + q.0)
}

/// 1/Γ(x) for x > -1, using 1/Γ(x) = x/Γ(x+1) below zero.
pub fn recip_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= -1.0 {
        return Err(Error::domain(format!("recip_gamma needs x > -1, got {x}")));
    }
    if x > 0.0 {
        Ok(1.0 / gamma_pos(x))
    } else if x == 0.0 {
        Ok(0.0)
    } else {
        Ok(x / gamma_pos(x + 1.0))
    }
}

/// Caller guarantees `x` is finite and positive.
pub(crate) fn gamma_pos(x: f64) -> f64 {
    debug_assert!(x > 0.0 && x.is_finite());
    if x < 0.5 {
        // Γ(x) = Γ(x+1)/x keeps the Lanczos sum on [0.5, ∞).
        return lanczos(x + 1.0) / x;
    }
    lanczos(x)
}

fn lanczos(x: f64) -> f64 {
    let z = x - 1.0;
    let mut sum = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        sum += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * ((z + 0.5) * t.ln() - t).exp() * sum
}
