//! Replica-parallel sampling of additive local times.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::WalkModel;
use crate::occupation::{lambda_from, local_time_scalars, OccupationMeasure};
use crate::rng::{SeedStreams, StreamTag};

fn walk_tag(j: usize) -> StreamTag {
    StreamTag::Walk(j as u8)
}

/// Positions of walk `j` in `replica`, times 0..=n.
pub fn replica_path(model: &WalkModel, n: usize, streams: &SeedStreams, replica: u64, j: usize) -> Vec<i64> {
    model.sample_path_with(n, streams.stream(replica, walk_tag(j)))
}

/// The p occupation measures of one replica.
pub fn replica_measures(model: &WalkModel, p: usize, n: usize, streams: &SeedStreams, replica: u64) -> Vec<OccupationMeasure> {
    (0..p).map(|j| OccupationMeasure::from_positions(&replica_path(model, n, streams, replica, j))).collect()
}

/// Scalar summaries of one simulated field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ReplicaScalars {
    pub replica: u64,
    pub n: usize,
    pub p: usize,
    pub l0: u64,
    pub l2sum: u128,
    pub lambda: u128,
}

pub(crate) fn check_p(p: usize) -> Result<()> {
    if p == 0 || p > 64 {
        return Err(Error::InvalidParameter(format!("p must be in 1..=64, got {p}")));
    }
    Ok(())
}

/// l(n, 0), Σl² and Λ_n for replicas `0..replicas`, in replica order.
pub fn simulate_scalars(model: &WalkModel, p: usize, n: usize, replicas: u64, seed: u64) -> Result<Vec<ReplicaScalars>> {
    check_p(p)?;
    model.check_range(n, p)?;
    let streams = SeedStreams::new(seed);
    (0..replicas)
        .into_par_iter()
        .map(|r| {
            let (l0, l2sum) = local_time_scalars(&replica_measures(model, p, n, &streams, r))?;
            Ok(ReplicaScalars { replica: r, n, p, l0, l2sum, lambda: lambda_from(l2sum, n, p)? })
        })
        .collect()
}

/// l(n, 0) only, for replicas `0..replicas` in replica order.
pub fn simulate_l0(model: &WalkModel, p: usize, n: usize, replicas: u64, seed: u64) -> Result<Vec<u64>> {
    check_p(p)?;
    model.check_range(n, p)?;
    let streams = SeedStreams::new(seed);
    (0..replicas)
        .into_par_iter()
        .map(|r| {
            if p == 1 {
                let path = replica_path(model, n, &streams, r, 0);
                return Ok(path.iter().filter(|&&x| x == 0).count() as u64);
            }
            let wide: Vec<_> = replica_measures(model, p, n, &streams, r).iter().map(|m| m.wide()).collect();
            u64::try_from(crate::occupation::evaluate_at_zero(&wide)).map_err(|_| Error::Overflow("l(n,0)"))
        })
        .collect()
}

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub samples: usize,
}

impl MeanEstimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let k = xs.len();
        let mean = xs.iter().sum::<f64>() / k as f64;
        let var = if k > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1) as f64 } else { 0.0 };
        Self { mean, std_err: (var / k as f64).sqrt(), samples: k }
    }

    /// |mean − target| in standard errors.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = (self.mean - target).abs();
        if self.std_err == 0.0 {
            if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            d / self.std_err
        }
    }
}

/// Monte Carlo estimates of E l(n, 0) and E l(n, 0)².
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MonteCarloMoments {
    pub first: MeanEstimate,
    pub second: MeanEstimate,
}

pub fn monte_carlo_moments(model: &WalkModel, p: usize, n: usize, replicas: u64, seed: u64) -> Result<MonteCarloMoments> {
    let l0 = simulate_l0(model, p, n, replicas, seed)?;
    let first: Vec<f64> = l0.iter().map(|&x| x as f64).collect();
    let second: Vec<f64> = first.iter().map(|x| x * x).collect();
    Ok(MonteCarloMoments { first: MeanEstimate::from_samples(&first), second: MeanEstimate::from_samples(&second) })
}
