// Exponentially weighted local time L_n^0 next to l(n, 0) on the same paths.

use addwalk::poisson::{paired_mean_check, poissonized_local_time, Weights};
use addwalk::{Result, WalkModel};

pub fn run_example() -> Result<bool> {
    let model = WalkModel::from_name("lazy-simple", 1)?;
    let f = poissonized_local_time(&model, 2, 100, 5, 0, Weights::Exponential)?;
    println!("replica 0: L0 weighted {:.3}  l0 {}  diff {:+.3}", f.l0_weighted, f.l0, f.diff());
    let unit = poissonized_local_time(&model, 2, 100, 5, 0, Weights::Unit)?;
    assert_eq!(unit.l0_weighted, unit.l0 as f64);
    let report = paired_mean_check(&model, 2, &[64, 512], 400, 5)?;
    for l in &report.levels {
        println!("n = {:>4}  mean diff {:+.3} ± {:.3}  normalised sd {:.4}", l.n, l.diff.mean, l.diff.std_err, l.norm_sd);
    }
    Ok(report.spread_shrinks())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
