// Rate constants for the lazy walk and an empirical tail curve beside them.

use addwalk::rates::{default_grid, model_constants, tail_curve, TailSpec, TailStatistic};
use addwalk::{Result, WalkModel};

pub fn run_example() -> Result<usize> {
    let model = WalkModel::from_name("lazy-simple", 1)?;
    let c = model_constants(&model, 1, default_grid(1)?)?;
    println!("rho1 = {:.5}  rho2 = {:.5}  lil_l0 = {:.5}  lil_l2 = {:.5}", c.rho1, c.rho2, c.lil_l0(), c.lil_l2());
    let n = 2000;
    let lambdas = [0.1, 0.2, 0.3, 0.4, 0.5];
    let spec = TailSpec {
        model: &model,
        p: 1,
        n,
        b_n: (n as f64).ln(),
        statistic: TailStatistic::L0,
        lambdas: &lambdas,
        replicas: 5000,
        seed: 3,
    };
    let curve = tail_curve(&spec, Some(&c))?;
    for r in &curve.rows {
        println!("lambda {:.1}  P^ {:.4}  (1/b)log P^ {:+.3}  rate {:+.3}", r.lambda, r.p_hat, r.norm_logp, r.theory.unwrap_or(f64::NAN));
    }
    Ok(curve.rows.len())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
