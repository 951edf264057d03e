//! Continuous-time embedding X(t) = S(N_t) and the exponentially weighted
//! local time
//!
//! ```text
//! L_n⁰ = Σ_{k₁..k_p ≤ n} τ¹_{k₁} ⋯ τᵖ_{k_p} 1{S₁(k₁) + … + S_p(k_p) = 0}
//! ```
//!
//! with i.i.d. unit exponentials τʲ_k. E τ = 1, so E L_n⁰ = E l(n, 0).

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::WalkModel;
use crate::occupation::{convolve_all, evaluate_at_zero, OccupationMeasure, Sparse};
use crate::rng::{exponential, SeedStreams, StreamTag};
use crate::simulate::{check_p, replica_path, MeanEstimate};

/// How the weights τ are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Weights {
    Exponential,
    /// τ ≡ 1, reproducing l(n, 0).
    Unit,
}

/// One replica: weighted and unweighted local time at 0 on the same paths.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PoissonizedField {
    pub replica: u64,
    pub n: usize,
    pub p: usize,
    pub l0_weighted: f64,
    pub l0: u64,
    /// Σ_k τʲ_k per walk.
    pub weight_totals: Vec<f64>,
}

impl PoissonizedField {
    pub fn diff(&self) -> f64 {
        self.l0_weighted - self.l0 as f64
    }
}

/// Weighted occupation measure Σ_k τ_k δ_{S(k)}, with site sums accumulated
/// in time order so results do not depend on hashing.
fn weighted_measure(positions: &[i64], weights: &[f64]) -> Sparse<f64> {
    let mut pairs: Vec<(i64, usize)> = positions.iter().enumerate().map(|(k, &x)| (x, k)).collect();
    pairs.sort_unstable();
    let mut out: Sparse<f64> = Vec::new();
    for (x, k) in pairs {
        match out.last_mut() {
            Some((site, w)) if *site == x => *w += weights[k],
            _ => out.push((x, weights[k])),
        }
    }
    out
}

fn replica_weights(streams: &SeedStreams, replica: u64, j: usize, n: usize, weights: Weights) -> Vec<f64> {
    match weights {
        Weights::Unit => vec![1.0; n + 1],
        Weights::Exponential => {
            let mut rng = streams.stream(replica, StreamTag::Weight(j as u8));
            (0..=n).map(|_| exponential(&mut rng)).collect()
        }
    }
}

fn replica_field(
    model: &WalkModel,
    p: usize,
    n: usize,
    streams: &SeedStreams,
    replica: u64,
    weights: Weights,
) -> Result<(PoissonizedField, Vec<Sparse<f64>>)> {
    let mut weighted = Vec::with_capacity(p);
    let mut plain = Vec::with_capacity(p);
    let mut totals = Vec::with_capacity(p);
    for j in 0..p {
        let path = replica_path(model, n, streams, replica, j);
        let tau = replica_weights(streams, replica, j, n, weights);
        totals.push(tau.iter().sum());
        weighted.push(weighted_measure(&path, &tau));
        plain.push(OccupationMeasure::from_positions(&path).wide());
    }
    let l0 = u64::try_from(evaluate_at_zero(&plain)).map_err(|_| Error::Overflow("l(n,0)"))?;
    let l0_weighted = evaluate_at_zero(&weighted);
    Ok((PoissonizedField { replica, n, p, l0_weighted, l0, weight_totals: totals }, weighted))
}

/// L_n⁰ and l(n, 0) for one replica of `seed`.
pub fn poissonized_local_time(model: &WalkModel, p: usize, n: usize, seed: u64, replica: u64, weights: Weights) -> Result<PoissonizedField> {
    check_p(p)?;
    model.check_range(n, p)?;
    Ok(replica_field(model, p, n, &SeedStreams::new(seed), replica, weights)?.0)
}

/// Full weighted field x ↦ L_n^x (small n only; used for mass checks).
pub fn weighted_field(model: &WalkModel, p: usize, n: usize, seed: u64, replica: u64, weights: Weights) -> Result<Sparse<f64>> {
    check_p(p)?;
    model.check_range(n, p)?;
    let (_, measures) = replica_field(model, p, n, &SeedStreams::new(seed), replica, weights)?;
    let refs: Vec<&[(i64, f64)]> = measures.iter().map(|m| m.as_slice()).collect();
    Ok(convolve_all(&refs))
}

/// Replicas `0..replicas` in order.
pub fn poissonized_replicas(model: &WalkModel, p: usize, n: usize, replicas: u64, seed: u64, weights: Weights) -> Result<Vec<PoissonizedField>> {
    check_p(p)?;
    model.check_range(n, p)?;
    let streams = SeedStreams::new(seed);
    (0..replicas)
        .into_par_iter()
        .map(|r| Ok(replica_field(model, p, n, &streams, r, weights)?.0))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairedLevel {
    pub n: usize,
    pub b_n: f64,
    /// n^p a(n/b_n)^{−d}, or 1 when n < 3.
    pub scale: f64,
    pub weighted: MeanEstimate,
    pub plain: MeanEstimate,
    pub diff: MeanEstimate,
    /// Standard deviation of (L_n⁰ − l(n, 0))/scale.
    pub norm_sd: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairedReport {
    pub model: String,
    pub p: usize,
    pub replicas: u64,
    pub seed: u64,
    pub levels: Vec<PairedLevel>,
}

impl PairedReport {
    /// Every level's mean difference lies within `z` standard errors of 0.
    pub fn centred(&self, z: f64) -> bool {
        self.levels.iter().all(|l| l.diff.z_score(0.0) <= z)
    }

    /// Normalised spread of the last level below that of the first.
    pub fn spread_shrinks(&self) -> bool {
        match (self.levels.first(), self.levels.last()) {
            (Some(a), Some(b)) if self.levels.len() >= 2 => b.norm_sd < a.norm_sd,
            _ => false,
        }
    }
}

/// Paired comparison of L_n⁰ and l(n, 0) across levels, normalised at the
/// deviation scale with b_n = (log n)².
pub fn paired_mean_check(model: &WalkModel, p: usize, levels: &[usize], replicas: u64, seed: u64) -> Result<PairedReport> {
    if replicas < 2 {
        return Err(Error::InvalidParameter("need at least 2 replicas".into()));
    }
    let d = model.dim() as i32;
    let mut out = Vec::with_capacity(levels.len());
    for &n in levels {
        let fields = poissonized_replicas(model, p, n, replicas, seed, Weights::Exponential)?;
        let nf = n as f64;
        let b_n = if n >= 3 { nf.ln().powi(2) } else { 1.0 };
        let scale = if n >= 3 && b_n < nf { nf.powi(p as i32) / model.norming(nf / b_n)?.powi(d) } else { 1.0 };
        let w: Vec<f64> = fields.iter().map(|f| f.l0_weighted).collect();
        let l: Vec<f64> = fields.iter().map(|f| f.l0 as f64).collect();
        let diff: Vec<f64> = fields.iter().map(PoissonizedField::diff).collect();
        let diff_est = MeanEstimate::from_samples(&diff);
        let norm_sd = diff_est.std_err * (replicas as f64).sqrt() / scale;
        out.push(PairedLevel {
            n,
            b_n,
            scale,
            weighted: MeanEstimate::from_samples(&w),
            plain: MeanEstimate::from_samples(&l),
            diff: diff_est,
            norm_sd,
        });
    }
    Ok(PairedReport { model: model.kind().to_string(), p, replicas, seed, levels: out })
}

/// N_t = max{k : τ₀ + … + τ_{k−1} ≤ t} from the clock stream of `replica`.
pub fn poisson_clock(seed: u64, replica: u64, t: f64) -> Result<u64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("t must be finite and ≥ 0, got {t}")));
    }
    let mut rng = SeedStreams::new(seed).stream(replica, StreamTag::Clock);
    let mut arrival = 0.0;
    let mut k = 0;
    loop {
        arrival += exponential(&mut rng);
        if arrival > t {
            return Ok(k);
        }
        k += 1;
    }
}

/// X(t) = S(N_t), with the walk drawn from the replica's first walk stream.
pub fn poisson_position(model: &WalkModel, seed: u64, replica: u64, t: f64) -> Result<i64> {
    let k = poisson_clock(seed, replica, t)? as usize;
    let path = replica_path(model, k, &SeedStreams::new(seed), replica, 0);
    Ok(path[k])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{mean_local_time, QuadratureSpec};

    fn lazy(d: usize) -> WalkModel {
        WalkModel::from_name("lazy-simple", d).unwrap()
    }

    #[test]
    fn unit_weights_reproduce_local_time() {
        for (d, p, n) in [(1, 1, 50), (1, 2, 40), (2, 2, 30), (1, 3, 12)] {
            for r in 0..5 {
                let f = poissonized_local_time(&lazy(d), p, n, 17, r, Weights::Unit).unwrap();
                assert_eq!(f.l0_weighted, f.l0 as f64);
            }
        }
    }

    #[test]
    fn horizon_zero_is_weight_product() {
        let f = poissonized_local_time(&lazy(1), 3, 0, 5, 0, Weights::Exponential).unwrap();
        let prod: f64 = f.weight_totals.iter().product();
        assert!(f.l0_weighted > 0.0);
        assert!((f.l0_weighted - prod).abs() < 1e-14 * prod);
        assert_eq!(f.l0, 1);
    }

    #[test]
    fn weighted_mass_is_product_of_totals() {
        let field = weighted_field(&lazy(2), 2, 25, 3, 1, Weights::Exponential).unwrap();
        let f = poissonized_local_time(&lazy(2), 2, 25, 3, 1, Weights::Exponential).unwrap();
        let mass: f64 = field.iter().map(|&(_, w)| w).sum();
        let prod: f64 = f.weight_totals.iter().product();
        assert!((mass - prod).abs() < 1e-10 * prod);
        assert!((crate::occupation::evaluate_at_zero(&[field]) - f.l0_weighted).abs() < 1e-10 * f.l0_weighted);
    }

    #[test]
    fn weighted_mean_matches_spectral() {
        for (p, n) in [(1, 1), (2, 8)] {
            let m = lazy(1);
            let fields = poissonized_replicas(&m, p, n, 40_000, 12, Weights::Exponential).unwrap();
            let est = MeanEstimate::from_samples(&fields.iter().map(|f| f.l0_weighted).collect::<Vec<_>>());
            let exact = mean_local_time(&m, n, p, QuadratureSpec::exact_for(&m, n, p)).unwrap().value;
            assert!(est.z_score(exact) < 4.0, "p={p} n={n}: {est:?} vs {exact}");
        }
    }

    #[test]
    fn clock_statistics() {
        assert_eq!(poisson_clock(1, 0, 0.0).unwrap(), 0);
        assert!(poisson_clock(1, 0, -1.0).is_err());
        let counts: Vec<f64> = (0..20_000).map(|r| poisson_clock(9, r, 10.0).unwrap() as f64).collect();
        let est = MeanEstimate::from_samples(&counts);
        assert!(est.z_score(10.0) < 4.0);
    }

    #[test]
    fn embedded_characteristic_function() {
        // E cos(λ X(t)) = exp(−t(1 − φ(λ)))
        let m = lazy(1);
        let (t, lam) = (5.0, 1.0);
        let vals: Vec<f64> = (0..20_000).map(|r| (lam * poisson_position(&m, 4, r, t).unwrap() as f64).cos()).collect();
        let est = MeanEstimate::from_samples(&vals);
        let target = (-t * (1.0 - m.char_fn(&[lam]))).exp();
        assert!(est.z_score(target) < 4.0, "{est:?} vs {target}");
    }

    #[test]
    fn paired_differences_centred() {
        let rep = paired_mean_check(&lazy(1), 1, &[0, 16, 64], 4000, 6).unwrap();
        assert!(rep.centred(4.0));
        assert_eq!(rep.levels[0].scale, 1.0);
    }
}
