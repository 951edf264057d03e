//! Deviation rates, iterated-logarithm constants and the Monte Carlo
//! experiments that probe them.

mod constants;
mod lil;
mod online;
mod tails;
mod weak;

pub use constants::{GaussianConstants, RateConstants, RateDisplay, RHO1_BAR_D1_P1};
pub use lil::{geometric_schedule, lil_trace, LilRow, LilTrace};
pub use tails::{default_bn, tail_curve, wilson_interval, ExponentFit, TailCurve, TailRow, TailSpec, TailStatistic};
pub use weak::{ks_two_sample, weak_convergence_study, LevelSummary, WeakReport, QUANTILE_LEVELS};

use crate::error::{Error, Result};
use crate::model::WalkModel;
use crate::variational::{rho1, rho2, AscentOptions, FrequencyGrid, Psi};

/// Limit exponent Ψ matching a model's norming a(t).
pub fn psi_for_model(model: &WalkModel) -> Result<Psi> {
    match model.gamma() {
        Some(g) => {
            let d = model.dim();
            let s2 = g[0];
            let isotropic = (0..d).all(|i| (0..d).all(|j| g[i * d + j] == if i == j { s2 } else { 0.0 }));
            if !isotropic {
                return Err(Error::InvalidParameter("only isotropic covariances are supported".into()));
            }
            Ok(Psi::Gaussian { sigma: s2.sqrt() })
        }
        None => Ok(Psi::Stable { alpha: model.alpha() }),
    }
}

/// Rate constants for a model, with ρ₁ and ρ₂ from the variational solver
/// on `grid` (closed form for ρ₁ when d = p = 1 and α = 2).
pub fn model_constants(model: &WalkModel, p: usize, grid: FrequencyGrid) -> Result<RateConstants> {
    let psi = psi_for_model(model)?;
    let opts = AscentOptions::default();
    let r2 = rho2(&psi, p, grid, &opts)?.value;
    let r1 = match (psi, model.dim(), p) {
        (Psi::Gaussian { sigma }, 1, 1) => RHO1_BAR_D1_P1 / sigma,
        _ => rho1(&psi, p, grid, &opts)?.value,
    };
    RateConstants::new(model.alpha(), model.dim(), p, r1, r2)
}

/// Default solver grid for [`model_constants`].
pub fn default_grid(d: usize) -> Result<FrequencyGrid> {
    match d {
        1 => FrequencyGrid::new(1, 40.0, 512),
        _ => FrequencyGrid::new(d, 20.0, 128),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lazy_walk_constants() {
        let m = WalkModel::from_name("lazy-simple", 1).unwrap();
        let psi = psi_for_model(&m).unwrap();
        assert_eq!(psi, Psi::Gaussian { sigma: 0.5f64.sqrt() });
        let c = model_constants(&m, 1, default_grid(1).unwrap()).unwrap();
        assert!((c.lil_l0() - 2.0).abs() < 1e-12);
        let s = WalkModel::from_name("stable:1.5", 1).unwrap();
        assert_eq!(psi_for_model(&s).unwrap(), Psi::Stable { alpha: 1.5 });
    }

    #[test]
    fn solver_route_matches_closed_form() {
        let grid = FrequencyGrid::new(1, 40.0, 512).unwrap();
        let solved = rho1(&Psi::Gaussian { sigma: 1.0 }, 1, grid, &AscentOptions::default()).unwrap().value;
        let general = RateConstants::new(2.0, 1, 1, solved, 1.0).unwrap();
        let closed = GaussianConstants::new(1, 1, 1.0, RHO1_BAR_D1_P1, 1.0).unwrap();
        let (a, b) = (general.md_l0(1.0).unwrap(), closed.md_l0(1.0).unwrap());
        assert!((a - b).abs() <= 1e-2 * b.abs());
    }
}
