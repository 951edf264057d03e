//! Empirical tail curves of l(n, 0) and Σl² against the deviation rates.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::model::WalkModel;
use crate::simulate::{simulate_l0, simulate_scalars};

use super::constants::RateConstants;

/// Statistic whose upper tail is measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailStatistic {
    /// l(n, 0) ≥ λ n^p a(n/b_n)^{−d}
    L0,
    /// Σl² ≥ λ n^{2p} a(n/b_n)^{−d}
    L2,
}

/// Wilson score interval at two-sided level 1 − `level`.
pub fn wilson_interval(hits: u64, trials: u64, level: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = Normal::standard().inverse_cdf(1.0 - level / 2.0);
    let (k, m) = (hits as f64, trials as f64);
    let phat = k / m;
    let denom = 1.0 + z * z / m;
    let centre = (phat + z * z / (2.0 * m)) / denom;
    let half = z * (phat * (1.0 - phat) / m + z * z / (4.0 * m * m)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailRow {
    pub lambda: f64,
    pub threshold: f64,
    pub hits: u64,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// (1/b_n) log P̂, or the lower bound (1/b_n) log(1/(replicas+1)) when censored.
    pub norm_logp: f64,
    pub censored: bool,
    pub theory: Option<f64>,
}

/// Least-squares slope of log(−log P̂) against log λ.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub std_err: f64,
    pub points: usize,
    pub lambda_range: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailCurve {
    pub model: String,
    pub d: usize,
    pub p: usize,
    pub n: usize,
    pub b_n: f64,
    pub statistic: TailStatistic,
    /// Threshold per unit λ.
    pub scale: f64,
    pub replicas: u64,
    pub seed: u64,
    pub rows: Vec<TailRow>,
}

/// Default scale b_n = (log n)².
pub fn default_bn(n: usize) -> f64 {
    (n as f64).ln().powi(2)
}

pub struct TailSpec<'a> {
    pub model: &'a WalkModel,
    pub p: usize,
    pub n: usize,
    pub b_n: f64,
    pub statistic: TailStatistic,
    pub lambdas: &'a [f64],
    pub replicas: u64,
    pub seed: u64,
}

/// Simulates `replicas` fields and tabulates P̂{statistic ≥ λ·scale} over the λ grid.
pub fn tail_curve(spec: &TailSpec<'_>, theory: Option<&RateConstants>) -> Result<TailCurve> {
    let TailSpec { model, p, n, b_n, statistic, lambdas, replicas, seed } = *spec;
    if !(b_n > 1.0 && b_n < n as f64) {
        return Err(Error::InvalidParameter(format!("need 1 < b_n < n, got b_n = {b_n}, n = {n}")));
    }
    if replicas == 0 {
        return Err(Error::InvalidParameter("replicas must be positive".into()));
    }
    if lambdas.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::InvalidParameter("λ grid must be positive".into()));
    }
    let nf = n as f64;
    let a = model.norming(nf / b_n)?.powi(model.dim() as i32);
    let (scale, mut values): (f64, Vec<f64>) = match statistic {
        TailStatistic::L0 => {
            (nf.powi(p as i32) / a, simulate_l0(model, p, n, replicas, seed)?.into_iter().map(|x| x as f64).collect())
        }
        TailStatistic::L2 => (
            nf.powi(2 * p as i32) / a,
            simulate_scalars(model, p, n, replicas, seed)?.into_iter().map(|r| r.l2sum as f64).collect(),
        ),
    };
    values.sort_by(f64::total_cmp);
    let rows = lambdas
        .iter()
        .map(|&lambda| {
            let threshold = lambda * scale;
            let below = values.partition_point(|&v| v < threshold);
            let hits = (values.len() - below) as u64;
            let p_hat = hits as f64 / replicas as f64;
            let (ci_lo, ci_hi) = wilson_interval(hits, replicas, 0.05);
            let censored = hits == 0;
            let norm_logp = if censored { -((replicas + 1) as f64).ln() / b_n } else { p_hat.ln() / b_n };
            let theory = theory.map(|c| match statistic {
                TailStatistic::L0 => c.md_l0(lambda),
                TailStatistic::L2 => c.md_l2(lambda),
            });
            Ok(TailRow { lambda, threshold, hits, p_hat, ci_lo, ci_hi, norm_logp, censored, theory: theory.transpose()? })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TailCurve {
        model: model.kind().to_string(),
        d: model.dim(),
        p,
        n,
        b_n,
        statistic,
        scale,
        replicas,
        seed,
        rows,
    })
}

impl TailCurve {
    /// Slope of log(−log P̂) on log λ over uncensored rows with 0 < P̂ < 1
    /// and λ in `[lo, hi]`; `None` with fewer than 3 usable rows.
    pub fn fit_exponent(&self, lo: f64, hi: f64) -> Option<ExponentFit> {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.lambda >= lo && r.lambda <= hi && !r.censored && r.p_hat < 1.0)
            .map(|r| (r.lambda.ln(), (-r.p_hat.ln()).ln()))
            .collect();
        let k = pts.len();
        if k < 3 {
            return None;
        }
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k as f64;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k as f64;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let slope = sxy / sxx;
        let resid: f64 = pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum();
        let std_err = if k > 2 { (resid / (k - 2) as f64 / sxx).sqrt() } else { f64::NAN };
        Some(ExponentFit { slope, std_err, points: k, lambda_range: (lo, hi) })
    }

    /// P̂ nonincreasing along the λ grid sorted ascending.
    pub fn is_monotone(&self) -> bool {
        let mut rows: Vec<&TailRow> = self.rows.iter().collect();
        rows.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
        rows.windows(2).all(|w| w[1].p_hat <= w[0].p_hat)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lazy1() -> WalkModel {
        WalkModel::from_name("lazy-simple", 1).unwrap()
    }

    #[test]
    fn wilson_brackets_estimate() {
        let (lo, hi) = wilson_interval(30, 100, 0.05);
        assert!(lo < 0.3 && 0.3 < hi);
        assert!((lo - 0.2189).abs() < 1e-3 && (hi - 0.3958).abs() < 1e-3);
        let (lo, hi) = wilson_interval(0, 1000, 0.05);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.01);
    }

    #[test]
    fn tiny_threshold_gives_certainty_and_curves_are_nested() {
        let m = lazy1();
        let lambdas = [1e-6, 0.5, 1.0, 1.5, 2.0, 3.0];
        let spec = TailSpec {
            model: &m,
            p: 1,
            n: 400,
            b_n: (400f64).ln(),
            statistic: TailStatistic::L0,
            lambdas: &lambdas,
            replicas: 2000,
            seed: 4,
        };
        let c = tail_curve(&spec, None).unwrap();
        assert_eq!(c.rows[0].p_hat, 1.0);
        assert_eq!(c.rows[0].norm_logp, 0.0);
        assert!(c.is_monotone());
        let spec2 = TailSpec { statistic: TailStatistic::L2, p: 2, n: 60, b_n: 4.0, ..spec };
        let c2 = tail_curve(&spec2, None).unwrap();
        assert!(c2.is_monotone());
    }

    #[test]
    fn censored_rows_flagged() {
        let m = lazy1();
        let spec = TailSpec {
            model: &m,
            p: 1,
            n: 100,
            b_n: 10.0,
            statistic: TailStatistic::L0,
            lambdas: &[50.0],
            replicas: 100,
            seed: 1,
        };
        let c = tail_curve(&spec, None).unwrap();
        assert!(c.rows[0].censored);
        assert!((c.rows[0].norm_logp + (101f64).ln() / 10.0).abs() < 1e-12);
        assert!(c.fit_exponent(0.0, 100.0).is_none());
    }

    #[test]
    fn exponent_fit_recovers_power() {
        let rows = [1.0, 1.25, 1.5, 1.75, 2.0]
            .iter()
            .map(|&l: &f64| {
                let p = (-0.7 * l * l).exp();
                TailRow { lambda: l, threshold: l, hits: 1, p_hat: p, ci_lo: 0.0, ci_hi: 1.0, norm_logp: 0.0, censored: false, theory: None }
            })
            .collect();
        let c = TailCurve {
            model: "x".into(),
            d: 1,
            p: 1,
            n: 10,
            b_n: 2.0,
            statistic: TailStatistic::L0,
            scale: 1.0,
            replicas: 1,
            seed: 0,
            rows,
        };
        let fit = c.fit_exponent(1.0, 2.0).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
    }
}
