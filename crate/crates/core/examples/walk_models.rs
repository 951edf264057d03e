// Builds each step law, samples a path and prints the norming a(n).

use addwalk::{Result, WalkModel};

pub fn run_example() -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for (name, d) in [("lazy-simple", 1), ("lazy-simple", 2), ("simple", 3), ("stable:1.5", 1)] {
        let model = WalkModel::from_name(name, d)?;
        let path = model.sample_path(20, 7);
        let a = model.norming(1000.0)?;
        println!("{name:>12} d={d}  alpha={}  a(1000)={a:.4}  S(20)={:?}", model.alpha(), path.site(20));
        out.push((format!("{name}/d{d}"), a));
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
