// KS distances between consecutive levels of a(n)^d n^{-p} l(n, 0).

use addwalk::rates::weak_convergence_study;
use addwalk::{Result, WalkModel};

pub fn run_example() -> Result<Vec<f64>> {
    let model = WalkModel::from_name("lazy-simple", 1)?;
    let levels = [64, 128, 256, 512];
    let report = weak_convergence_study(&model, 2, &levels, 2000, 11, false)?;
    for (l, ks) in report.levels.iter().skip(1).zip(&report.ks_l0) {
        println!("n = {:>4}  mean {:.4} ± {:.4}  KS vs previous {:.4}", l.n, l.l0.mean, l.l0.std_err, ks);
    }
    Ok(report.ks_l0)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
