//! Special functions: gamma, Bessel J of real order, Laguerre polynomials
//! and their monic and weighted variants.
//!
//! Everything here is a pure function of its arguments and safe to call
//! concurrently. Extended precision lives only in the test oracles; the
//! shipped code is plain `f64` with log-scaled representations where the
//! dynamic range demands it.

mod bessel;
mod gamma;
mod laguerre;

pub use bessel::{bessel_j, bessel_switch_point};
pub use gamma::{gamma, ln_gamma};
pub use laguerre::{
    laguerre, laguerre_derivative_check, laguerre_monic, laguerre_monic_log, laguerre_weighted,
};

use crate::error::{Error, Result};

/// The order parameter of the hard-edge family.
///
/// Valid orders satisfy `alpha > -1`; dynamics that rely on particles never
/// reaching the origin additionally require `alpha >= 1`, checked at the
/// call sites that need it via [`Order::require_non_hitting`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct Order(f64);

impl Order {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= -1.0 {
            return Err(Error::Domain(format!(
                "order alpha must be finite and > -1, got {alpha}"
            )));
        }
        Ok(Order(alpha))
    }

    #[inline]
    pub fn alpha(self) -> f64 {
        self.0
    }

    /// Orders below 1 let the leftmost particle reach the origin; the
    /// integrators refuse to run there.
    pub fn require_non_hitting(self) -> Result<()> {
        if self.0 < 1.0 {
            return Err(Error::Domain(format!(
                "dynamics requires alpha >= 1 (no origin hits); got alpha = {}",
                self.0
            )));
        }
        Ok(())
    }
}

impl std::fmt::Display for Order {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Polynomial degree. Non-negativity is carried by the type.
pub type PolyDegree = usize;

/// A real number stored as sign and log of absolute value.
///
/// Used wherever products of weights, polynomials, and gamma ratios would
/// overflow or underflow `f64` long before the final combination does.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    /// -1.0, 0.0, or 1.0
    pub sign: f64,
    /// ln |value|; `f64::NEG_INFINITY` when the value is zero
    pub ln_abs: f64,
}

impl SignedLog {
    pub const ZERO: SignedLog = SignedLog {
        sign: 0.0,
        ln_abs: f64::NEG_INFINITY,
    };

    pub fn new(sign: f64, ln_abs: f64) -> Self {
        if sign == 0.0 {
            Self::ZERO
        } else {
            SignedLog {
                sign: sign.signum(),
                ln_abs,
            }
        }
    }

    pub fn from_f64(v: f64) -> Self {
        if v == 0.0 {
            Self::ZERO
        } else {
            SignedLog {
                sign: v.signum(),
                ln_abs: v.abs().ln(),
            }
        }
    }

    pub fn to_f64(self) -> f64 {
        self.sign * self.ln_abs.exp()
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0.0
    }

    #[allow(clippy::should_implement_trait)]
    #[must_use]
    pub fn mul(self, other: SignedLog) -> SignedLog {
        if self.is_zero() || other.is_zero() {
            return Self::ZERO;
        }
        SignedLog {
            sign: self.sign * other.sign,
            ln_abs: self.ln_abs + other.ln_abs,
        }
    }

    /// Multiply by `exp(ln_factor)`.
    #[must_use]
    pub fn mul_exp(self, ln_factor: f64) -> SignedLog {
        if self.is_zero() {
            return Self::ZERO;
        }
        SignedLog {
            sign: self.sign,
            ln_abs: self.ln_abs + ln_factor,
        }
    }

    /// `a - b`, factoring out the larger magnitude so the subtraction happens
    /// at unit scale.
    #[must_use]
    pub fn diff(a: SignedLog, b: SignedLog) -> SignedLog {
        if a.is_zero() {
            return SignedLog::new(-b.sign, b.ln_abs);
        }
        if b.is_zero() {
            return a;
        }
        let m = a.ln_abs.max(b.ln_abs);
        let d = a.sign * (a.ln_abs - m).exp() - b.sign * (b.ln_abs - m).exp();
        if d == 0.0 {
            Self::ZERO
        } else {
            SignedLog {
                sign: d.signum(),
                ln_abs: m + d.abs().ln(),
            }
        }
    }
}

/// The Laguerre weight `w(x) = x^alpha e^{-x}` on `(0, inf)`.
pub fn weight(alpha: Order, x: f64) -> Result<f64> {
    if x <= 0.0 {
        return Err(Error::Domain(format!("weight requires x > 0, got {x}")));
    }
    Ok(log_weight(alpha, x)?.exp())
}

/// `ln w(x) = alpha ln x - x`, the underflow-safe companion of [`weight`].
pub fn log_weight(alpha: Order, x: f64) -> Result<f64> {
    if x <= 0.0 {
        return Err(Error::Domain(format!("log_weight requires x > 0, got {x}")));
    }
    Ok(alpha.alpha() * x.ln() - x)
}
