//! Closed-form deviation rates and iterated-logarithm constants.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::check_criticality;

/// Which closed-form constant to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RateDisplay {
    /// Deviation rate of l(n, 0) at scale λ n^p a(n/b_n)^{−d}.
    MdL0,
    /// Deviation rate of Σl² at scale λ n^{2p} a(n/b_n)^{−d}.
    MdL2,
    /// Deviation rate of Λ_n at scale λ n^{2p} a(n/b_n)^{−d}.
    MdLambda,
    /// limsup of n^{−p} a(n/loglog n)^d l(n, 0).
    LilL0,
    /// limsup of n^{−2p} a(n/loglog n)^d Σl².
    LilL2,
    /// limsup of n^{−2p} a(n/loglog n)^d Λ_n.
    LilLambda,
    /// Gaussian form of MdL0 at scale λ n^{(2p−d)/2} b_n^{d/2}.
    GaussMdL0,
    /// Gaussian form of MdL2 at scale λ n^{(4p−d)/2} b_n^{d/2}.
    GaussMdL2,
    /// Gaussian form of LilL0 with normalisation n^{(2p−d)/2} (loglog n)^{d/2}.
    GaussLilL0,
    /// Gaussian form of LilL2 with normalisation n^{(4p−d)/2} (loglog n)^{d/2}.
    GaussLilL2,
}

impl RateDisplay {
    pub const ALL: [RateDisplay; 10] = [
        RateDisplay::MdL0,
        RateDisplay::MdL2,
        RateDisplay::MdLambda,
        RateDisplay::LilL0,
        RateDisplay::LilL2,
        RateDisplay::LilLambda,
        RateDisplay::GaussMdL0,
        RateDisplay::GaussMdL2,
        RateDisplay::GaussLilL0,
        RateDisplay::GaussLilL2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RateDisplay::MdL0 => "md_l0",
            RateDisplay::MdL2 => "md_l2",
            RateDisplay::MdLambda => "md_lambda",
            RateDisplay::LilL0 => "lil_l0",
            RateDisplay::LilL2 => "lil_l2",
            RateDisplay::LilLambda => "lil_lambda",
            RateDisplay::GaussMdL0 => "gauss_md_l0",
            RateDisplay::GaussMdL2 => "gauss_md_l2",
            RateDisplay::GaussLilL0 => "gauss_lil_l0",
            RateDisplay::GaussLilL2 => "gauss_lil_l2",
        }
    }

    pub fn is_rate(self) -> bool {
        matches!(
            self,
            RateDisplay::MdL0 | RateDisplay::MdL2 | RateDisplay::MdLambda | RateDisplay::GaussMdL0 | RateDisplay::GaussMdL2
        )
    }
}

impl fmt::Display for RateDisplay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RateDisplay {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        RateDisplay::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown rate display `{s}`")))
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("λ must be positive, got {lambda}")));
    }
    Ok(())
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidParameter(format!("ρ must be positive, got {rho}")));
    }
    Ok(())
}

/// Constants for a walk in the domain of attraction of an α-stable law.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateConstants {
    pub alpha: f64,
    pub d: usize,
    pub p: usize,
    pub rho1: f64,
    pub rho2: f64,
}

impl RateConstants {
    pub fn new(alpha: f64, d: usize, p: usize, rho1: f64, rho2: f64) -> Result<Self> {
        check_criticality(d, alpha, p)?;
        check_rho(rho1)?;
        check_rho(rho2)?;
        Ok(Self { alpha, d, p, rho1, rho2 })
    }

    fn ratio(&self, q: usize) -> f64 {
        1.0 - self.d as f64 / (self.alpha * q as f64)
    }

    /// −(2π)^α (d/α) (1 − d/(αp))^{(αp−d)/d} (λ/ρ₁)^{α/d}
    pub fn md_l0(&self, lambda: f64) -> Result<f64> {
        check_lambda(lambda)?;
        let (a, d, p) = (self.alpha, self.d as f64, self.p as f64);
        Ok(-(2.0 * PI).powf(a) * (d / a) * self.ratio(self.p).powf((a * p - d) / d) * (lambda / self.rho1).powf(a / d))
    }

    /// −(2π)^α (d/(2α)) (1 − d/(2αp))^{(2αp−d)/d} (λ/ρ₂)^{α/d}
    pub fn md_l2(&self, lambda: f64) -> Result<f64> {
        check_lambda(lambda)?;
        let (a, d, p) = (self.alpha, self.d as f64, self.p as f64);
        Ok(-(2.0 * PI).powf(a)
            * (d / (2.0 * a))
            * self.ratio(2 * self.p).powf((2.0 * a * p - d) / d)
            * (lambda / self.rho2).powf(a / d))
    }

    /// Rate for Λ_n. Since Λ_n = (Σl² − (n+1)^p)/2 and the diagonal is
    /// negligible at this scale, {Λ_n ≥ λ·s} = {Σl² ≥ 2λ·s} asymptotically.
    pub fn md_lambda(&self, lambda: f64) -> Result<f64> {
        self.md_l2(2.0 * lambda)
    }

    /// The Λ_n rate with the prefactor 2^{−(α+d)/d} as commonly printed;
    /// differs from [`Self::md_lambda`] by the factor 4^{α/d}.
    pub fn md_lambda_as_printed(&self, lambda: f64) -> Result<f64> {
        check_lambda(lambda)?;
        let (a, d, p) = (self.alpha, self.d as f64, self.p as f64);
        Ok(-2f64.powf(-(a + d) / d)
            * (2.0 * PI).powf(a)
            * (d / a)
            * self.ratio(2 * self.p).powf((2.0 * a * p - d) / d)
            * (lambda / self.rho2).powf(a / d))
    }

    /// (2π)^{−d} (α/d)^{d/α} (1 − d/(αp))^{−(p − d/α)} ρ₁
    pub fn lil_l0(&self) -> f64 {
        let (a, d, p) = (self.alpha, self.d as f64, self.p as f64);
        (2.0 * PI).powf(-d) * (a / d).powf(d / a) * self.ratio(self.p).powf(-(p - d / a)) * self.rho1
    }

    /// (2π)^{−d} (2α/d)^{d/α} (1 − d/(2αp))^{−(2αp−d)/α} ρ₂
    pub fn lil_l2(&self) -> f64 {
        let (a, d, p) = (self.alpha, self.d as f64, self.p as f64);
        (2.0 * PI).powf(-d) * (2.0 * a / d).powf(d / a) * self.ratio(2 * self.p).powf(-(2.0 * a * p - d) / a) * self.rho2
    }

    /// Half of [`Self::lil_l2`], because Λ_n ~ Σl²/2.
    pub fn lil_lambda(&self) -> f64 {
        0.5 * self.lil_l2()
    }

    /// The Λ_n constant with prefactor 2 as commonly printed (4× [`Self::lil_lambda`]).
    pub fn lil_lambda_as_printed(&self) -> f64 {
        2.0 * self.lil_l2()
    }

    pub fn evaluate(&self, display: RateDisplay, lambda: Option<f64>) -> Result<f64> {
        let need = || lambda.ok_or_else(|| Error::InvalidParameter(format!("{display} needs λ")));
        match display {
            RateDisplay::MdL0 => self.md_l0(need()?),
            RateDisplay::MdL2 => self.md_l2(need()?),
            RateDisplay::MdLambda => self.md_lambda(need()?),
            RateDisplay::LilL0 => Ok(self.lil_l0()),
            RateDisplay::LilL2 => Ok(self.lil_l2()),
            RateDisplay::LilLambda => Ok(self.lil_lambda()),
            _ => Err(Error::InvalidParameter(format!("{display} needs Gaussian constants"))),
        }
    }
}

/// Constants for a square-integrable walk with covariance Γ, in terms of the
/// standard-Gaussian variational values ρ̄₁, ρ̄₂.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GaussianConstants {
    pub d: usize,
    pub p: usize,
    pub det_gamma: f64,
    pub rho1_bar: f64,
    pub rho2_bar: f64,
}

impl GaussianConstants {
    pub fn new(d: usize, p: usize, det_gamma: f64, rho1_bar: f64, rho2_bar: f64) -> Result<Self> {
        check_criticality(d, 2.0, p)?;
        check_rho(rho1_bar)?;
        check_rho(rho2_bar)?;
        if !(det_gamma > 0.0) {
            return Err(Error::InvalidParameter(format!("det Γ must be positive, got {det_gamma}")));
        }
        Ok(Self { d, p, det_gamma, rho1_bar, rho2_bar })
    }

    fn ratio(&self, q: usize) -> f64 {
        1.0 - self.d as f64 / (2.0 * q as f64)
    }

    /// −2dπ² (1 − d/(2p))^{(2p−d)/d} (det Γ)^{1/d} (λ/ρ̄₁)^{2/d}
    pub fn md_l0(&self, lambda: f64) -> Result<f64> {
        check_lambda(lambda)?;
        let (d, p) = (self.d as f64, self.p as f64);
        Ok(-2.0 * d * PI * PI
            * self.ratio(self.p).powf((2.0 * p - d) / d)
            * self.det_gamma.powf(1.0 / d)
            * (lambda / self.rho1_bar).powf(2.0 / d))
    }

    /// −dπ² (1 − d/(4p))^{(4p−d)/d} (det Γ)^{1/d} (λ/ρ̄₂)^{2/d}
    pub fn md_l2(&self, lambda: f64) -> Result<f64> {
        check_lambda(lambda)?;
        let (d, p) = (self.d as f64, self.p as f64);
        Ok(-d * PI * PI
            * self.ratio(2 * self.p).powf((4.0 * p - d) / d)
            * self.det_gamma.powf(1.0 / d)
            * (lambda / self.rho2_bar).powf(2.0 / d))
    }

    /// (√(2d) π)^{−d} (1 − d/(2p))^{−(2p−d)/2} ρ̄₁/√det Γ
    pub fn lil_l0(&self) -> f64 {
        let (d, p) = (self.d as f64, self.p as f64);
        ((2.0 * d).sqrt() * PI).powf(-d) * self.ratio(self.p).powf(-(2.0 * p - d) / 2.0) * self.rho1_bar
            / self.det_gamma.sqrt()
    }

    /// (√d π)^{−d} (1 − d/(4p))^{−(4p−d)/2} ρ̄₂/√det Γ
    pub fn lil_l2(&self) -> f64 {
        let (d, p) = (self.d as f64, self.p as f64);
        (d.sqrt() * PI).powf(-d) * self.ratio(2 * self.p).powf(-(4.0 * p - d) / 2.0) * self.rho2_bar / self.det_gamma.sqrt()
    }

    /// The same walk in the general parametrisation: α = 2, a(n) = √n,
    /// ρ = ρ̄/√det Γ.
    pub fn general(&self) -> RateConstants {
        let s = self.det_gamma.sqrt();
        RateConstants { alpha: 2.0, d: self.d, p: self.p, rho1: self.rho1_bar / s, rho2: self.rho2_bar / s }
    }

    pub fn evaluate(&self, display: RateDisplay, lambda: Option<f64>) -> Result<f64> {
        let need = || lambda.ok_or_else(|| Error::InvalidParameter(format!("{display} needs λ")));
        match display {
            RateDisplay::GaussMdL0 => self.md_l0(need()?),
            RateDisplay::GaussMdL2 => self.md_l2(need()?),
            RateDisplay::GaussLilL0 => Ok(self.lil_l0()),
            RateDisplay::GaussLilL2 => Ok(self.lil_l2()),
            other => self.general().evaluate(other, lambda),
        }
    }
}

/// ρ̄₁ for d = 1, p = 1: ∫ dλ/(1 + λ²/2) = π√2.
pub const RHO1_BAR_D1_P1: f64 = PI * std::f64::consts::SQRT_2;
