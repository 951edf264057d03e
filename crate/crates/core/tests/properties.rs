use addwalk::enumeration::enumerate_moments;
use addwalk::model::check_criticality;
use addwalk::poisson::{poissonized_local_time, weighted_field, Weights};
use addwalk::rates::{tail_curve, TailSpec, TailStatistic};
use addwalk::spectral::{mean_local_time, QuadratureSpec};
use addwalk::WalkModel;
use num_traits::One;
use proptest::prelude::*;

fn models() -> impl Strategy<Value = WalkModel> {
    prop_oneof![
        (1usize..=3).prop_map(|d| WalkModel::from_name("lazy-simple", d).unwrap()),
        (1usize..=3).prop_map(|d| WalkModel::from_name("simple", d).unwrap()),
        (0.2f64..1.95).prop_map(|a| WalkModel::from_name(&format!("stable:{a}"), 1).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn psi_is_homogeneous(m in models(), r in 0.01f64..20.0, l in prop::collection::vec(-5.0f64..5.0, 3)) {
        let lam = &l[..m.dim()];
        let scaled: Vec<f64> = lam.iter().map(|x| r * x).collect();
        let lhs = m.psi(&scaled);
        let rhs = r.powf(m.alpha()) * m.psi(lam);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + m.psi(lam)) * r.powf(m.alpha()).max(1.0));
    }

    #[test]
    fn criticality_guard_matches_condition(d in 1usize..=3, alpha in 0.1f64..2.0, p in 1usize..=4) {
        prop_assert_eq!(check_criticality(d, alpha, p).is_ok(), (d as f64) < alpha * p as f64);
    }

    #[test]
    fn unit_weights_and_weighted_mass(d in 1usize..=2, p in 1usize..=3, n in 0usize..=60, seed in any::<u64>()) {
        let m = WalkModel::from_name("lazy-simple", d).unwrap();
        let unit = poissonized_local_time(&m, p, n, seed, 3, Weights::Unit).unwrap();
        prop_assert_eq!(unit.l0_weighted, unit.l0 as f64);
        let f = poissonized_local_time(&m, p, n, seed, 3, Weights::Exponential).unwrap();
        let field = weighted_field(&m, p, n, seed, 3, Weights::Exponential).unwrap();
        let mass: f64 = field.iter().map(|(_, w)| w).sum();
        let product: f64 = f.weight_totals.iter().product();
        prop_assert!((mass - product).abs() <= 1e-9 * product.max(1.0));
    }

    #[test]
    fn tail_curves_are_nested(seed in any::<u64>(), n in 50usize..400) {
        let m = WalkModel::from_name("lazy-simple", 1).unwrap();
        let lambdas = [0.05, 0.1, 0.2, 0.4, 0.8];
        let spec = TailSpec { model: &m, p: 1, n, b_n: (n as f64).ln(), statistic: TailStatistic::L0, lambdas: &lambdas, replicas: 200, seed };
        prop_assert!(tail_curve(&spec, None).unwrap().is_monotone());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn enumeration_is_a_distribution_and_matches_quadrature(d in 1usize..=2, p in 1usize..=2, n in 0usize..=5) {
        let m = WalkModel::from_name("lazy-simple", d).unwrap();
        let r = enumerate_moments(&m, p, n, 1).unwrap();
        prop_assert!(r.total_probability.is_one());
        let q = mean_local_time(&m, n, p, QuadratureSpec::exact_for(&m, n, p)).unwrap().value;
        prop_assert!((q - r.l0_f64(1)).abs() <= 1e-12 * r.l0_f64(1));
    }
}
