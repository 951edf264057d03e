//! Variational constants ρ₁, ρ₂ and the kernel value ρ(f).
//!
//! With w(λ) = (1 + Ψ(λ))^{-1/2} and H_g(λ) = ∫ g(λ+γ) g(γ) w(λ+γ) w(γ) dγ,
//!
//! ```text
//! ρ₁ = sup_{‖g‖₂=1} ∫ H_g^p,    ρ₂ = sup_{‖g‖₂=1} ∫ H_g^{2p},
//! ρ(f) = sup_{‖g‖₂=1} ∫∫ f(λ−γ) g(λ) w(λ) g(γ) w(γ) dλ dγ.
//! ```
//!
//! Everything is discretised on a midpoint grid over [−Λ, Λ]^d.

mod ascent;
mod fft;
mod kernel;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

pub use ascent::{functional, gradient, rho1, rho2, solve, AscentOptions, Objective};
pub use fft::Correlator;
pub use kernel::{
    dense_rho_of_f, indicator_test_f, indicator_test_fbar, spatial_identity_check, spatial_sup, rho_of_f, SpatialIdentityReport, KernelOptions,
};

/// Limit exponent Ψ used by the variational problems.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(into = "String")]
pub enum Psi {
    /// σ²|λ|²/2 (covariance σ²I).
    Gaussian { sigma: f64 },
    /// |λ|^α.
    Stable { alpha: f64 },
}

impl Psi {
    pub fn eval(&self, lambda: &[f64]) -> f64 {
        let r2: f64 = lambda.iter().map(|x| x * x).sum();
        match *self {
            Psi::Gaussian { sigma } => 0.5 * sigma * sigma * r2,
            Psi::Stable { alpha } => r2.powf(alpha / 2.0),
        }
    }

    pub fn alpha(&self) -> f64 {
        match *self {
            Psi::Gaussian { .. } => 2.0,
            Psi::Stable { alpha } => alpha,
        }
    }

    /// w(λ) = (1 + Ψ(λ))^{-1/2}.
    pub fn weight(&self, lambda: &[f64]) -> f64 {
        (1.0 + self.eval(lambda)).sqrt().recip()
    }
}

impl fmt::Display for Psi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Psi::Gaussian { sigma } if *sigma == 1.0 => write!(f, "gaussian"),
            Psi::Gaussian { sigma } => write!(f, "gaussian:{sigma}"),
            Psi::Stable { alpha } => write!(f, "stable:{alpha}"),
        }
    }
}

impl From<Psi> for String {
    fn from(p: Psi) -> String {
        p.to_string()
    }
}

impl FromStr for Psi {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("unknown psi `{s}` (gaussian[:sigma] or stable:<alpha>)"));
        if s == "gaussian" {
            return Ok(Psi::Gaussian { sigma: 1.0 });
        }
        if let Some(v) = s.strip_prefix("gaussian:") {
            let sigma: f64 = v.parse().map_err(|_| bad())?;
            if !(sigma > 0.0) {
                return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
            }
            return Ok(Psi::Gaussian { sigma });
        }
        if let Some(v) = s.strip_prefix("stable:") {
            let alpha: f64 = v.parse().map_err(|_| bad())?;
            if !(alpha > 0.0 && alpha < 2.0) {
                return Err(Error::AlphaOutOfRange(alpha));
            }
            return Ok(Psi::Stable { alpha });
        }
        Err(bad())
    }
}

/// Midpoint grid λ_j = −Λ + (j + ½)h per axis, h = 2Λ/N.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FrequencyGrid {
    pub d: usize,
    pub cutoff: f64,
    pub points: usize,
    pub h: f64,
}

impl FrequencyGrid {
    pub fn new(d: usize, cutoff: f64, points: usize) -> Result<Self> {
        if !(1..=2).contains(&d) {
            return Err(Error::UnsupportedDimension("variational solver", d));
        }
        if points < 2 || points % 2 != 0 {
            return Err(Error::InvalidParameter(format!("grid points must be even and ≥ 2, got {points}")));
        }
        if !(cutoff > 0.0 && cutoff.is_finite()) {
            return Err(Error::InvalidParameter(format!("cutoff must be positive, got {cutoff}")));
        }
        Ok(Self { d, cutoff, points, h: 2.0 * cutoff / points as f64 })
    }

    /// Same spacing, twice the cutoff.
    pub fn doubled_cutoff(&self) -> Self {
        Self { cutoff: 2.0 * self.cutoff, points: 2 * self.points, ..*self }
    }

    /// Same cutoff, twice the points.
    pub fn refined(&self) -> Self {
        Self { points: 2 * self.points, h: self.h / 2.0, ..*self }
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn node(&self, i: usize) -> f64 {
        -self.cutoff + (i as f64 + 0.5) * self.h
    }

    /// Coordinates of flat index `i` (axis 0 slowest).
    pub fn point(&self, i: usize) -> Vec<f64> {
        match self.d {
            1 => vec![self.node(i)],
            _ => vec![self.node(i / self.points), self.node(i % self.points)],
        }
    }

    /// Flat index of the mirror point −λ.
    pub fn mirror(&self, i: usize) -> usize {
        let n = self.points;
        match self.d {
            1 => n - 1 - i,
            _ => (n - 1 - i / n) * n + (n - 1 - i % n),
        }
    }

    /// Cell volume h^d.
    pub fn cell(&self) -> f64 {
        self.h.powi(self.d as i32)
    }

    pub fn weights(&self, psi: &Psi) -> Vec<f64> {
        (0..self.len()).map(|i| psi.weight(&self.point(i))).collect()
    }

    /// L² inner product h^d Σ a b.
    pub fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        self.cell() * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
    }

    pub fn normalize(&self, g: &mut [f64]) {
        let norm = self.dot(g, g).sqrt();
        for x in g.iter_mut() {
            *x /= norm;
        }
    }
}

/// Outcome of a variational solve.
#[derive(Clone, Debug, Serialize)]
pub struct VariationalResult {
    pub which: String,
    pub psi: String,
    pub p: usize,
    /// Reported estimate (cutoff-extrapolated when enabled).
    pub value: f64,
    /// Value on the requested grid.
    pub raw_value: f64,
    /// Value on the grid with doubled cutoff at the same spacing.
    pub doubled_value: Option<f64>,
    /// Relative change of the raw value under cutoff doubling.
    pub cutoff_delta: Option<f64>,
    pub cutoff_warning: bool,
    pub iterations: usize,
    pub grad_norm: f64,
    pub converged: bool,
    pub grid: FrequencyGrid,
    /// Objective after each accepted iteration (raw grid).
    pub trace: Vec<f64>,
    /// Maximiser on the raw grid, ‖g‖₂ = 1.
    #[serde(skip)]
    pub g: Vec<f64>,
}
