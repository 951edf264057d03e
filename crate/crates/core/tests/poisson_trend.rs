use addwalk::poisson::paired_mean_check;
use addwalk::WalkModel;

/// (L_n⁰ − l(n, 0)) at the deviation scale spreads less as n grows, and its
/// mean stays at zero.
#[test]
fn weighted_difference_vanishes_at_deviation_scale() {
    let m = WalkModel::from_name("lazy-simple", 1).unwrap();
    let r = paired_mean_check(&m, 2, &[1 << 8, 1 << 12], 1000, 2007).unwrap();
    assert!(r.centred(4.0), "{:?}", r.levels.iter().map(|l| l.diff).collect::<Vec<_>>());
    assert!(r.spread_shrinks());
    let ratio = r.levels[1].norm_sd / r.levels[0].norm_sd;
    assert!(ratio < 0.8, "normalised sd ratio {ratio}");
}
