// Exact rational moments by enumerating every path tuple, and the moment
// inequalities they must satisfy.

use addwalk::enumeration::{check_moment_bounds, check_block_submult, check_sign_weighted, enumerate_moments, ratio_string};
use addwalk::{Result, WalkModel};

pub fn run_example() -> Result<usize> {
    let model = WalkModel::from_name("lazy-simple", 1)?;
    let report = enumerate_moments(&model, 2, 4, 3)?;
    for m in 0..=3 {
        println!("E l(4,0)^{m} = {}", ratio_string(&report.l0[m]));
    }
    let mut verdicts = check_moment_bounds(&model, 2, 4, 3)?;
    verdicts.extend(check_block_submult(&model, 2, 1, 2, 3)?);
    verdicts.extend(check_sign_weighted(&model, 2, 4, 3)?);
    for v in &verdicts {
        println!("{:>10} m={} {:?}  margin {:.3e}", v.check, v.m, v.status, v.margin);
    }
    Ok(verdicts.iter().filter(|v| !v.holds()).count())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
