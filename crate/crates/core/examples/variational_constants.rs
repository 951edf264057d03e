// ρ₁ and ρ₂ by gradient ascent on the sphere, and the spatial-side identity
// for an indicator kernel.

use addwalk::variational::{
    indicator_test_f, indicator_test_fbar, spatial_identity_check, rho1, rho2, AscentOptions, FrequencyGrid, Psi,
};
use addwalk::Result;

pub fn run_example() -> Result<f64> {
    let psi = Psi::Gaussian { sigma: 1.0 };
    let grid = FrequencyGrid::new(1, 40.0, 512)?;
    let opts = AscentOptions::default();
    let r1 = rho1(&psi, 1, grid, &opts)?;
    println!("rho1(p=1) = {:.6}  (pi*sqrt2 = {:.6})", r1.value, std::f64::consts::PI * 2f64.sqrt());
    let r2 = rho2(&psi, 1, grid, &opts)?;
    println!("rho2(p=1) = {:.6} after {} iterations", r2.value, r2.iterations);
    let stable = rho1(&Psi::Stable { alpha: 1.5 }, 1, grid, &opts)?;
    println!("rho1 stable 1.5 = {:.5} (raw {:.5})", stable.value, stable.raw_value);
    let a1 = spatial_identity_check(&indicator_test_f, &indicator_test_fbar, &psi, FrequencyGrid::new(1, 40.0, 400)?)?;
    println!("rho(f) = {:.5}  M_f(1/rho) = {:.5}", a1.rho, a1.m_value);
    Ok(r1.value)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
