//! Distributional convergence of the normalised local time across n.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{check_criticality, WalkModel};
use crate::rng::SeedStreams;
use crate::simulate::{check_p, MeanEstimate};

use super::online::OnlineTuple;

/// Two-sample Kolmogorov–Smirnov distance of sorted samples.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut best: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        best = best.max((i as f64 / na - j as f64 / nb).abs());
    }
    best
}

pub const QUANTILE_LEVELS: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 0.9];

/// Empirical quantile of a sorted sample (lower order statistic).
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let k = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[k - 1]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelSummary {
    pub n: usize,
    /// a(n)^d n^{−p}
    pub scale_l0: f64,
    pub l0: MeanEstimate,
    pub quantiles_l0: Vec<f64>,
    /// a(n)^d n^{−2p}
    pub scale_l2: Option<f64>,
    pub l2: Option<MeanEstimate>,
    pub quantiles_l2: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeakReport {
    pub model: String,
    pub d: usize,
    pub p: usize,
    pub replicas: u64,
    pub seed: u64,
    pub levels: Vec<LevelSummary>,
    /// KS distance between consecutive levels of the normalised l(n, 0).
    pub ks_l0: Vec<f64>,
    pub ks_l2: Option<Vec<f64>>,
}

impl WeakReport {
    /// Number of k with ks[k+1] > ks[k].
    pub fn inversions_l0(&self) -> usize {
        self.ks_l0.windows(2).filter(|w| w[1] > w[0]).count()
    }
}

/// Normalised l(n, 0) (and Σl²) at each level for `replicas` path tuples.
///
/// Every replica is one path tuple extended to the largest level, so the
/// levels are nested prefixes of the same paths.
pub fn weak_convergence_study(
    model: &WalkModel,
    p: usize,
    levels: &[usize],
    replicas: u64,
    seed: u64,
    with_l2: bool,
) -> Result<WeakReport> {
    check_p(p)?;
    check_criticality(model.dim(), model.alpha(), p)?;
    if levels.is_empty() || levels[0] == 0 || levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("levels must be positive and increasing".into()));
    }
    if replicas < 2 {
        return Err(Error::InvalidParameter("need at least 2 replicas".into()));
    }
    let n_max = *levels.last().unwrap();
    model.check_range(n_max, p)?;
    let streams = SeedStreams::new(seed);
    let per_replica: Vec<Vec<(u64, u128)>> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut tuple = OnlineTuple::new(model, p, &streams, r);
            let mut out = Vec::with_capacity(levels.len());
            let mut next = 0;
            for n in 1..=n_max {
                tuple.advance();
                if n == levels[next] {
                    out.push((tuple.l0()?, if with_l2 { tuple.l2sum()? } else { 0 }));
                    next += 1;
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let d = model.dim() as i32;
    let mut summaries = Vec::with_capacity(levels.len());
    let mut sorted_l0 = Vec::with_capacity(levels.len());
    let mut sorted_l2 = Vec::with_capacity(levels.len());
    for (k, &n) in levels.iter().enumerate() {
        let nf = n as f64;
        let an = model.norming(nf)?.powi(d);
        let scale_l0 = an / nf.powi(p as i32);
        let mut x: Vec<f64> = per_replica.iter().map(|v| v[k].0 as f64 * scale_l0).collect();
        let l0 = MeanEstimate::from_samples(&x);
        x.sort_by(f64::total_cmp);
        let quantiles_l0 = QUANTILE_LEVELS.iter().map(|&q| quantile(&x, q)).collect();
        let (scale_l2, l2, quantiles_l2) = if with_l2 {
            let s = an / nf.powi(2 * p as i32);
            let mut y: Vec<f64> = per_replica.iter().map(|v| v[k].1 as f64 * s).collect();
            let est = MeanEstimate::from_samples(&y);
            y.sort_by(f64::total_cmp);
            let qs = QUANTILE_LEVELS.iter().map(|&q| quantile(&y, q)).collect();
            sorted_l2.push(y);
            (Some(s), Some(est), Some(qs))
        } else {
            (None, None, None)
        };
        sorted_l0.push(x);
        summaries.push(LevelSummary { n, scale_l0, l0, quantiles_l0, scale_l2, l2, quantiles_l2 });
    }
    let ks = |s: &[Vec<f64>]| s.windows(2).map(|w| ks_two_sample(&w[0], &w[1])).collect::<Vec<f64>>();
    Ok(WeakReport {
        model: model.kind().to_string(),
        d: model.dim(),
        p,
        replicas,
        seed,
        levels: summaries,
        ks_l0: ks(&sorted_l0),
        ks_l2: with_l2.then(|| ks(&sorted_l2)),
    })
}
