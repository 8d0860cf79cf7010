//! Closed-form reference laws used by the goodness-of-fit checks.

use serde::Serialize;
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum ReferenceDensity {
    /// x e^{−x²/2} on [0, ∞).
    Rayleigh,
    /// Limit law of |core|/√n at surplus s: ∝ x^{3s−3} e^{−x²/2}.
    CoreSize { s: u32 },
    /// Marginal of the k-th arrival s_k of the rate-t Poisson process:
    /// s_k²/2 ~ Gamma(k, 1).
    Arrival { k: u32 },
    /// Gamma(shape, scale).
    Gamma { shape: f64, scale: f64 },
}

impl ReferenceDensity {
    pub fn name(&self) -> String {
        match self {
            ReferenceDensity::Rayleigh => "rayleigh".into(),
            ReferenceDensity::CoreSize { s } => format!("core_size(s={s})"),
            ReferenceDensity::Arrival { k } => format!("arrival(k={k})"),
            ReferenceDensity::Gamma { shape, scale } => format!("gamma(shape={shape},scale={scale})"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ReferenceDensity::CoreSize { s: 0 } => Err(Error::invalid("core-size law needs s ≥ 1")),
            ReferenceDensity::Arrival { k: 0 } => Err(Error::invalid("arrival index starts at 1")),
            ReferenceDensity::Gamma { shape, scale } if !(shape > 0.0 && scale > 0.0) => {
                Err(Error::invalid("gamma parameters must be positive"))
            }
            _ => Ok(()),
        }
    }

    /// Laws of the form x^{2a−1} e^{−x²/2} / (2^{a−1} Γ(a)), i.e. X²/2 ~ Gamma(a, 1).
    fn half_square_shape(&self) -> Option<f64> {
        match *self {
            ReferenceDensity::Rayleigh => Some(1.0),
            ReferenceDensity::CoreSize { s } => Some((3.0 * s as f64 - 2.0) / 2.0),
            ReferenceDensity::Arrival { k } => Some(k as f64),
            ReferenceDensity::Gamma { .. } => None,
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        match (self.half_square_shape(), *self) {
            (Some(a), _) => {
                if x == 0.0 {
                    return if a == 0.5 { (2.0 / std::f64::consts::PI).sqrt() } else { 0.0 };
                }
                let ln = (2.0 * a - 1.0) * x.ln() - x * x / 2.0 - (a - 1.0) * std::f64::consts::LN_2 - ln_gamma(a);
                ln.exp()
            }
            (None, ReferenceDensity::Gamma { shape, scale }) => {
                if x == 0.0 {
                    return if shape == 1.0 { 1.0 / scale } else { 0.0 };
                }
                ((shape - 1.0) * x.ln() - x / scale - ln_gamma(shape) - shape * scale.ln()).exp()
            }
            _ => unreachable!(),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match (self.half_square_shape(), *self) {
            (Some(a), _) => gamma_lr(a, x * x / 2.0),
            (None, ReferenceDensity::Gamma { shape, scale }) => gamma_lr(shape, x / scale),
            _ => unreachable!(),
        }
    }

    pub fn mean(&self) -> f64 {
        match (self.half_square_shape(), *self) {
            (Some(a), _) => std::f64::consts::SQRT_2 * (ln_gamma(a + 0.5) - ln_gamma(a)).exp(),
            (None, ReferenceDensity::Gamma { shape, scale }) => shape * scale,
            _ => unreachable!(),
        }
    }

    /// A point beyond which the remaining mass is below 1e-12.
    pub fn upper(&self) -> f64 {
        let mut x = 1.0;
        while 1.0 - self.cdf(x) > 1e-12 {
            x *= 1.5;
        }
        x
    }
}

/// Joint density of the first k arrivals: x_1⋯x_k e^{−x_k²/2} on the cone
/// 0 < x_1 < … < x_k, and 0 off it.
pub fn arrival_joint_density(xs: &[f64]) -> f64 {
    if xs.is_empty() || xs[0] <= 0.0 || xs.windows(2).any(|w| w[1] <= w[0]) {
        return 0.0;
    }
    let last = xs[xs.len() - 1];
    xs.iter().product::<f64>() * (-last * last / 2.0).exp()
}

/// Composite Simpson integral of `f` over [a, b] with `m` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let m = m + m % 2;
    let h = (b - a) / m as f64;
    let mut s = f(a) + f(b);
    for i in 1..m {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    s * h / 3.0
}
