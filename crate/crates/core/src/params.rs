//! Points of the slice: the multiplier `ρ` at the origin, the preferred
//! asymptotic value `λ` and the derived second asymptotic value `μ`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

/// Relative distance to `ρ/2` (or absolute distance to `0`) below which a
/// parameter is treated as singular.
pub const SINGULAR_TOL: f64 = 1e-12;

/// `μ = λρ/(ρ − 2λ)`, the unique value with `1/λ − 1/μ = 2/ρ`.
pub fn derive_mu(rho: C64, lambda: C64) -> Result<C64> {
    check_rho(rho)?;
    if lambda.norm() <= SINGULAR_TOL * rho.norm() {
        return Err(Error::SingularParameter("lambda = 0".into()));
    }
    let denom = rho - 2.0 * lambda;
    if denom.norm() <= SINGULAR_TOL * rho.norm() {
        return Err(Error::SingularParameter(
            "lambda = rho/2 (mu = infinity)".into(),
        ));
    }
    Ok(lambda * rho / denom)
}

/// The parameter involution `I(λ) = λ/(2λ/ρ − 1) = −μ`.
///
/// It swaps `M_λ` and `M_μ`, preserves the shift locus and fixes the circle
/// `|λ − ρ/2| = |ρ/2|` setwise.
pub fn inversion(rho: C64, lambda: C64) -> Result<C64> {
    Ok(-derive_mu(rho, lambda)?)
}

pub(crate) fn check_rho(rho: C64) -> Result<()> {
    let r = rho.norm();
    if !(r > 0.0 && r < 1.0) || !rho.re.is_finite() || !rho.im.is_finite() {
        return Err(Error::SingularParameter(format!(
            "rho = {rho} outside punctured unit disk"
        )));
    }
    Ok(())
}

/// Principal logarithm with imaginary part in `[−π, π)`.
pub fn principal_ln(z: C64) -> C64 {
    let mut arg = z.im.atan2(z.re);
    if arg >= PI {
        arg = -PI;
    }
    C64::new(z.norm().ln(), arg)
}

/// `Log(1 + x)` on the same branch as [`principal_ln`], accurate for small `x`.
pub fn principal_ln_1p(x: C64) -> C64 {
    let one_plus = C64::new(1.0 + x.re, x.im);
    let mut arg = x.im.atan2(1.0 + x.re);
    if arg >= PI {
        arg = -PI;
    }
    let re = if x.norm() < 0.5 {
        0.5 * (2.0 * x.re + x.norm_sqr()).ln_1p()
    } else {
        one_plus.norm().ln()
    };
    C64::new(re, arg)
}

/// One map `f_{λ,ρ}` of the slice, with the constants the evaluation needs.
///
/// Deserialization reads `rho` and `lambda` and recomputes everything else.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamWire")]
pub struct ParamPoint {
    #[serde(with = "crate::wire::complex")]
    pub rho: C64,
    #[serde(with = "crate::wire::complex")]
    pub lambda: C64,
    #[serde(with = "crate::wire::complex")]
    pub mu: C64,
    /// `λμ`
    #[serde(skip)]
    pub(crate) lm: C64,
    /// `μ − λ`
    #[serde(skip)]
    pub(crate) mu_minus_lambda: C64,
    /// `p_0(λ) = ½ Log((ρ − 2λ)/ρ)`
    #[serde(skip)]
    pub(crate) pole0: C64,
}

#[derive(Deserialize)]
struct ParamWire {
    #[serde(with = "crate::wire::complex")]
    rho: C64,
    #[serde(with = "crate::wire::complex")]
    lambda: C64,
}

impl TryFrom<ParamWire> for ParamPoint {
    type Error = Error;

    fn try_from(w: ParamWire) -> Result<Self> {
        Self::new(w.rho, w.lambda)
    }
}

impl ParamPoint {
    pub fn new(rho: C64, lambda: C64) -> Result<Self> {
        let mu = derive_mu(rho, lambda)?;
        let lm = lambda * mu;
        // e^{2 p_k} = (ρ − 2λ)/ρ = λ/μ
        let ratio = C64::new(1.0, 0.0) - 2.0 * lambda / rho;
        let pole0 = 0.5 * principal_ln(ratio);
        Ok(Self {
            rho,
            lambda,
            mu,
            lm,
            mu_minus_lambda: mu - lambda,
            pole0,
        })
    }

    /// Convenience constructor from real and imaginary parts.
    pub fn from_parts(rho: (f64, f64), lambda: (f64, f64)) -> Result<Self> {
        Self::new(C64::new(rho.0, rho.1), C64::new(lambda.0, lambda.1))
    }

    /// The parameter `I(λ)`, whose map is conjugate to this one by `z ↦ −z`.
    pub fn inverted(&self) -> Result<Self> {
        Self::new(self.rho, -self.mu)
    }

    /// Residual of `1/λ − 1/μ = 2/ρ`, relative to the size of its terms.
    pub fn relation_residual(&self) -> f64 {
        let terms = self.lambda.inv().norm() + self.mu.inv().norm() + 2.0 / self.rho.norm();
        (self.lambda.inv() - self.mu.inv() - 2.0 / self.rho).norm() / terms
    }

    /// `true` if `ρ` is real, so that `z ↦ −z̄` commutes with the map on `C_0`.
    pub fn rho_is_real(&self) -> bool {
        self.rho.im == 0.0
    }
}
