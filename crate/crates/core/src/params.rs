//! Physical constants of the polytropic gas, the inflow data and the
//! parameters of the initial temperature profile.
//!
//! The far-field specific volume is never supplied: it is derived from the
//! pressure-matching condition `R θ₋ / v₋ = R θ₊ / v₊` so that a contact
//! discontinuity between the two end states always exists.

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

/// Unvalidated user inputs for [`PhysParams::build`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawParams<T> {
    pub r: T,
    pub gamma: T,
    pub mu: T,
    pub kappa: T,
    pub theta_minus: T,
    pub theta_plus: T,
    pub v_minus: T,
    pub u_b: T,
}

impl<T: Scalar> Default for RawParams<T> {
    /// Big-jump regime: `|θ₊ − θ₋| = 2`.
    fn default() -> Self {
        Self {
            r: T::one(),
            gamma: lit(5.0 / 3.0),
            mu: lit(0.1),
            kappa: T::one(),
            theta_minus: T::one(),
            theta_plus: lit(3.0),
            v_minus: T::one(),
            u_b: T::one(),
        }
    }
}

/// Validated physical parameters together with the derived constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysParams<T> {
    raw: RawParams<T>,
    v_plus: T,
    p_plus: T,
    s: T,
    a: T,
    c_v: T,
}

impl<T: Scalar> PhysParams<T> {
    pub fn build(raw: RawParams<T>) -> Result<Self> {
        let positive: [(&'static str, T); 8] = [
            ("R", raw.r),
            ("gamma", raw.gamma),
            ("mu", raw.mu),
            ("kappa", raw.kappa),
            ("theta_minus", raw.theta_minus),
            ("theta_plus", raw.theta_plus),
            ("v_minus", raw.v_minus),
            ("u_b", raw.u_b),
        ];
        for (name, value) in positive {
            if !(value > T::zero()) || !value.is_finite() {
                return Err(Error::NonPositiveParameter(name));
            }
        }
        if !(raw.gamma > T::one()) {
            return Err(Error::GammaOutOfRange(
                raw.gamma.to_f64().unwrap_or(f64::NAN),
            ));
        }

        let p_plus = raw.r * raw.theta_minus / raw.v_minus;
        let v_plus = raw.r * raw.theta_plus / p_plus;
        let s = -raw.u_b / raw.v_minus;
        let a = raw.kappa * p_plus * (raw.gamma - T::one()) / (raw.gamma * raw.r * raw.r);
        let c_v = raw.r / (raw.gamma - T::one());
        Ok(Self {
            raw,
            v_plus,
            p_plus,
            s,
            a,
            c_v,
        })
    }

    /// Same gas and end states with a different heat conductivity.
    pub fn with_kappa(&self, kappa: T) -> Result<Self> {
        Self::build(RawParams { kappa, ..self.raw })
    }

    pub fn raw(&self) -> RawParams<T> {
        self.raw
    }
    pub fn r(&self) -> T {
        self.raw.r
    }
    pub fn gamma(&self) -> T {
        self.raw.gamma
    }
    pub fn mu(&self) -> T {
        self.raw.mu
    }
    pub fn kappa(&self) -> T {
        self.raw.kappa
    }
    pub fn theta_minus(&self) -> T {
        self.raw.theta_minus
    }
    pub fn theta_plus(&self) -> T {
        self.raw.theta_plus
    }
    pub fn v_minus(&self) -> T {
        self.raw.v_minus
    }
    pub fn u_b(&self) -> T {
        self.raw.u_b
    }
    /// Far-field specific volume `R θ₊ / p₊`.
    pub fn v_plus(&self) -> T {
        self.v_plus
    }
    /// Common pressure of both end states.
    pub fn p_plus(&self) -> T {
        self.p_plus
    }
    /// Shift speed `−u_b / v₋`; always negative.
    pub fn s(&self) -> T {
        self.s
    }
    /// Diffusion coefficient of the temperature equation.
    pub fn a(&self) -> T {
        self.a
    }
    /// Specific heat at constant volume `R / (γ − 1)`.
    pub fn c_v(&self) -> T {
        self.c_v
    }

    /// `κ(γ − 1)/(γR)`, the factor tying `U − u_b` to `(ln Θ)_x`.
    pub fn velocity_coefficient(&self) -> T {
        self.raw.kappa * (self.raw.gamma - T::one()) / (self.raw.gamma * self.raw.r)
    }

    pub fn theta_jump(&self) -> T {
        self.raw.theta_plus - self.raw.theta_minus
    }

    pub fn theta_min(&self) -> T {
        self.raw.theta_minus.min(self.raw.theta_plus)
    }

    pub fn theta_max(&self) -> T {
        self.raw.theta_minus.max(self.raw.theta_plus)
    }
}

/// Spatial scale `alpha` and stretched-exponential exponent `delta0` of the
/// initial temperature `Θ₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileParams<T> {
    alpha: T,
    delta0: T,
}

impl<T: Scalar> ProfileParams<T> {
    pub fn new(alpha: T, delta0: T) -> Result<Self> {
        if !(alpha > T::zero()) || !alpha.is_finite() {
            return Err(Error::InvalidProfileParameter {
                name: "alpha",
                reason: format!("must be > 0, got {alpha}"),
            });
        }
        if !(delta0 > T::zero() && delta0 <= T::one()) {
            return Err(Error::InvalidProfileParameter {
                name: "delta0",
                reason: format!("must lie in (0, 1], got {delta0}"),
            });
        }
        Ok(Self { alpha, delta0 })
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn delta0(&self) -> T {
        self.delta0
    }

    pub fn with_alpha(&self, alpha: T) -> Result<Self> {
        Self::new(alpha, self.delta0)
    }

    pub fn with_delta0(&self, delta0: T) -> Result<Self> {
        Self::new(self.alpha, delta0)
    }
}

impl<T: Scalar> Default for ProfileParams<T> {
    fn default() -> Self {
        Self {
            alpha: T::one(),
            delta0: lit(0.5),
        }
    }
}

/// How `alpha` follows `kappa` in the vanishing-conductivity study:
/// `alpha = kappa^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaCoupling<T> {
    pub exponent: T,
}

impl<T: Scalar> KappaCoupling<T> {
    pub fn alpha_for(&self, kappa: T) -> T {
        kappa.powf(self.exponent)
    }
}

impl<T: Scalar> Default for KappaCoupling<T> {
    fn default() -> Self {
        Self {
            exponent: lit(-2.0),
        }
    }
}
