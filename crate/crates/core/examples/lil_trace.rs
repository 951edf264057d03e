// Normalised l(n, 0) along one long path, with its running maximum.

use addwalk::rates::{default_grid, geometric_schedule, lil_trace, model_constants};
use addwalk::{Result, WalkModel};

pub fn run_example() -> Result<f64> {
    let model = WalkModel::from_name("lazy-simple", 1)?;
    let theory = model_constants(&model, 1, default_grid(1)?)?.lil_l0();
    let trace = lil_trace(&model, 1, &geometric_schedule(16, 200_000, 1)?, 2007, Some(theory))?;
    for r in &trace.rows {
        println!("n = {:>7}  stat = {:.4}  runmax = {:.4}", r.n, r.stat_l0, r.runmax_l0);
    }
    println!("theory {theory:.4}, corridor {:?}", trace.corridor());
    Ok(trace.rows.last().map(|r| r.runmax_l0).unwrap_or_default())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
