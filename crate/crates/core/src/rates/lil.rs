//! Iterated-logarithm traces along one long path tuple.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::WalkModel;
use crate::occupation::lambda_from;
use crate::rng::SeedStreams;

use super::online::OnlineTuple;
use crate::simulate::check_p;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LilRow {
    pub n: usize,
    pub l0: u64,
    pub l2sum: u128,
    pub lambda: u128,
    /// n^{−p} a(n/loglog n)^d l(n, 0)
    pub stat_l0: f64,
    /// n^{−2p} a(n/loglog n)^d Σl²
    pub stat_l2: f64,
    /// n^{−2p} a(n/loglog n)^d Λ_n
    pub stat_lambda: f64,
    pub runmax_l0: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LilTrace {
    pub model: String,
    pub d: usize,
    pub p: usize,
    pub seed: u64,
    pub theory_l0: Option<f64>,
    pub rows: Vec<LilRow>,
}

impl LilTrace {
    pub fn runmax_nondecreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].runmax_l0 >= w[0].runmax_l0)
    }

    /// (min, max) of runmax_l0 / theory over the rows.
    pub fn corridor(&self) -> Option<(f64, f64)> {
        let t = self.theory_l0?;
        let ratios = self.rows.iter().map(|r| r.runmax_l0 / t);
        Some(ratios.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x))))
    }
}

/// Integer checkpoints ⌊start·2^{k/per_octave}⌋ up to `end`, deduplicated.
pub fn geometric_schedule(start: usize, end: usize, per_octave: usize) -> Result<Vec<usize>> {
    if start < 16 {
        return Err(Error::InvalidParameter(format!("schedule must start at n ≥ 16 (loglog n > 0), got {start}")));
    }
    if end < start || per_octave == 0 {
        return Err(Error::InvalidParameter(format!("bad schedule {start}..{end} per octave {per_octave}")));
    }
    let mut out: Vec<usize> = Vec::new();
    let mut k = 0u32;
    loop {
        let v = (start as f64 * 2f64.powf(k as f64 / per_octave as f64)).floor() as usize;
        if v > end {
            break;
        }
        if out.last() != Some(&v) {
            out.push(v);
        }
        k += 1;
    }
    if out.last() != Some(&end) {
        out.push(end);
    }
    Ok(out)
}

/// Extends one path tuple to the last checkpoint, recording the normalised
/// statistics at each checkpoint.
///
pub fn lil_trace(model: &WalkModel, p: usize, schedule: &[usize], seed: u64, theory_l0: Option<f64>) -> Result<LilTrace> {
    check_p(p)?;
    if schedule.is_empty() || schedule[0] < 16 || schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("schedule must be increasing and start at n ≥ 16".into()));
    }
    let n_max = *schedule.last().unwrap();
    model.check_range(n_max, p)?;
    let mut tuple = OnlineTuple::new(model, p, &SeedStreams::new(seed), 0);
    let d = model.dim() as i32;
    let mut rows = Vec::with_capacity(schedule.len());
    let mut runmax = f64::NEG_INFINITY;
    let mut next = 0;
    for n in 1..=n_max {
        tuple.advance();
        if n == schedule[next] {
            let (l0n, l2n) = (tuple.l0()?, tuple.l2sum()?);
            let lambda = lambda_from(l2n, n, p)?;
            let nf = n as f64;
            let a = model.norming(nf / nf.ln().ln())?.powi(d);
            let stat_l0 = a * l0n as f64 / nf.powi(p as i32);
            runmax = runmax.max(stat_l0);
            rows.push(LilRow {
                n,
                l0: l0n,
                l2sum: l2n,
                lambda,
                stat_l0,
                stat_l2: a * l2n as f64 / nf.powi(2 * p as i32),
                stat_lambda: a * lambda as f64 / nf.powi(2 * p as i32),
                runmax_l0: runmax,
            });
            next += 1;
        }
    }
    Ok(LilTrace { model: model.kind().to_string(), d: model.dim(), p, seed, theory_l0, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::occupation::{local_time_field, OccupationMeasure};
    use crate::rng::StreamTag;

    #[test]
    fn schedule_shape() {
        let s = geometric_schedule(16, 100, 4).unwrap();
        assert_eq!(s.first(), Some(&16));
        assert_eq!(s.last(), Some(&100));
        assert!(s.windows(2).all(|w| w[1] > w[0]));
        assert!(geometric_schedule(8, 100, 4).is_err());
    }

    fn check_against_batch(name: &str, d: usize, p: usize) {
        let m = WalkModel::from_name(name, d).unwrap();
        let schedule = geometric_schedule(16, 600, 2).unwrap();
        let trace = lil_trace(&m, p, &schedule, 21, None).unwrap();
        assert!(trace.runmax_nondecreasing());
        let streams = SeedStreams::new(21);
        for row in &trace.rows {
            let ms: Vec<OccupationMeasure> = (0..p)
                .map(|j| {
                    let path = m.sample_path_with(row.n, streams.stream(0, StreamTag::Walk(j as u8)));
                    OccupationMeasure::from_positions(&path)
                })
                .collect();
            let f = local_time_field(&ms).unwrap();
            assert_eq!((row.l0, row.l2sum, row.lambda), (f.l0, f.l2sum, f.lambda), "n = {}", row.n);
            assert_eq!(row.l2sum, 2 * row.lambda + (row.n as u128 + 1).pow(p as u32));
        }
    }

    #[test]
    fn online_updates_match_batch() {
        check_against_batch("lazy-simple", 1, 1);
        check_against_batch("lazy-simple", 1, 2);
        check_against_batch("simple", 2, 2);
        check_against_batch("lazy-simple", 1, 3);
    }

    #[test]
    fn normalisation_at_first_checkpoint() {
        let m = WalkModel::from_name("lazy-simple", 1).unwrap();
        let t = lil_trace(&m, 1, &[16], 3, Some(2.0)).unwrap();
        let r = &t.rows[0];
        let scale = (16.0 / (16f64).ln().ln()).sqrt() / 16.0;
        assert!((r.stat_l0 - scale * r.l0 as f64).abs() < 1e-12);
        assert!(t.corridor().is_some());
    }
}
