// Local time of three walks at the origin and the identities tying its
// square sum to the intersection count Λ_n.

use addwalk::occupation::{diagonal_count, l2_via_autocorrelation, local_time_field, OccupationMeasure};
use addwalk::{Result, WalkModel};

pub fn run_example() -> Result<(u64, u128, u128)> {
    let model = WalkModel::from_name("lazy-simple", 1)?;
    let (n, p) = (200, 3);
    let measures: Vec<OccupationMeasure> =
        (0..p).map(|j| OccupationMeasure::of(&model.sample_path(n, 100 + j as u64))).collect();
    let field = local_time_field(&measures)?;
    let diag = diagonal_count(n, p)?;
    assert_eq!(field.mass(), diag);
    assert_eq!(field.l2sum, 2 * field.lambda + diag);
    assert_eq!(l2_via_autocorrelation(&measures)?, field.l2sum);
    println!("l(n,0) = {}  sum l^2 = {}  Lambda_n = {}  sites = {}", field.l0, field.l2sum, field.lambda, field.values.len());
    Ok((field.l0, field.l2sum, field.lambda))
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
