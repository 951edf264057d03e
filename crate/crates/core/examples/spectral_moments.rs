// E l(n, 0) and E l(n, 0)² by quadrature, checked against a Monte Carlo mean.

use addwalk::simulate::monte_carlo_moments;
use addwalk::spectral::{mean_local_time, second_moment_local_time, QuadratureSpec};
use addwalk::{Result, WalkModel};

pub fn run_example() -> Result<f64> {
    let model = WalkModel::from_name("lazy-simple", 1)?;
    let (n, p) = (40, 2);
    let quad = QuadratureSpec::exact_for(&model, n, p);
    let m1 = mean_local_time(&model, n, p, quad)?;
    let m2 = second_moment_local_time(&model, n, p, quad)?;
    let mc = monte_carlo_moments(&model, p, n, 20_000, 1)?;
    println!("E l    = {:.6} (delta {:.1e})  MC {:.4} ± {:.4}", m1.value, m1.refinement_delta, mc.first.mean, mc.first.std_err);
    println!("E l^2  = {:.6} (delta {:.1e})  MC {:.4} ± {:.4}", m2.value, m2.refinement_delta, mc.second.mean, mc.second.std_err);
    Ok(mc.first.z_score(m1.value))
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
