//! Fourier representations of local-time moments.
//!
//! With D_n(λ) = Σ_{l=0}^n φ(λ)^l,
//!
//! ```text
//! E l(n, 0)  = (2π)^{-d}  ∫ D_n(λ)^p dλ
//! E l(n, 0)² = (2π)^{-2d} ∫∫ E[Σ_{l₁,l₂} e^{i(λ₁·S(l₁) + λ₂·S(l₂))}]^p dλ₁ dλ₂
//! ```
//!
//! over the torus [−π, π]^d. Both integrands are trigonometric polynomials
//! for finite-support steps, so the periodic trapezoid rule with K points
//! per axis is exact once K exceeds their degree.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{check_criticality, WalkModel};

/// Periodic trapezoid rule on [−π, π]^d.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadratureSpec {
    /// Nodes per axis.
    pub points: usize,
    /// Relative refinement delta below which a non-exact result is accepted.
    pub tol: f64,
}

impl QuadratureSpec {
    pub fn new(points: usize) -> Result<Self> {
        if points < 16 {
            return Err(Error::InvalidParameter(format!("quadrature needs at least 16 points, got {points}")));
        }
        Ok(Self { points, tol: 1e-12 })
    }

    /// Smallest power of two above `n·p·reach`, at least 16.
    pub fn exact_for(model: &WalkModel, n: usize, p: usize) -> Self {
        let reach = model.finite_law().map(|l| l.max_norm() as usize).unwrap_or(1).max(1);
        let need = (n * p * reach + 1).max(16);
        Self { points: need.next_power_of_two(), tol: 1e-12 }
    }
}

/// Quadrature estimate plus refinement diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralMoment {
    pub value: f64,
    pub points: usize,
    /// Same integral with twice the nodes per axis.
    pub refined: f64,
    pub refinement_delta: f64,
    /// Trapezoid rule provably exact at `points`.
    pub exact: bool,
    /// Exact, or refinement delta within tolerance.
    pub converged: bool,
}

/// Pairwise (cascade) summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

const BLOCK: usize = 4096;

/// Mean of `f` over `0..count`, block-parallel with a fixed reduction tree.
fn node_mean<F>(count: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let blocks: Vec<f64> = (0..count.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let lo = b * BLOCK;
            let hi = (lo + BLOCK).min(count);
            let vals: Vec<f64> = (lo..hi).map(&f).collect();
            pairwise_sum(&vals)
        })
        .collect();
    pairwise_sum(&blocks) / count as f64
}

/// φ tabulated on the K^d torus grid, row-major with axis 0 slowest.
fn phi_table(model: &WalkModel, k: usize) -> Vec<f64> {
    let d = model.dim();
    let total = k.pow(d as u32);
    let node = |i: usize| -std::f64::consts::PI + 2.0 * std::f64::consts::PI * i as f64 / k as f64;
    (0..total)
        .into_par_iter()
        .map(|mut idx| {
            let mut lam = vec![0.0; d];
            for axis in (0..d).rev() {
                lam[axis] = node(idx % k);
                idx /= k;
            }
            model.char_fn(&lam)
        })
        .collect()
}

/// Index of the node λ₁ + λ₂ (mod 2π) on the K^d grid.
///
/// Node i sits at −π + 2πi/K, so the sum of nodes i and j is node
/// i + j − K/2 (mod K).
fn add_index(a: usize, b: usize, k: usize, d: usize) -> usize {
    let half = k / 2;
    let mut out = 0;
    let mut stride = 1;
    let (mut a, mut b) = (a, b);
    for _ in 0..d {
        let s = (a % k + b % k + k - half) % k;
        out += s * stride;
        stride *= k;
        a /= k;
        b /= k;
    }
    out
}

fn geometric(phi: f64, n: usize) -> f64 {
    // 1 + φ + … + φ^n, Horner form
    let mut acc = 1.0;
    for _ in 0..n {
        acc = 1.0 + phi * acc;
    }
    acc
}

fn check_points(points: usize) -> Result<()> {
    if points < 16 || points % 2 != 0 {
        return Err(Error::InvalidParameter(format!("quadrature points must be even and ≥ 16, got {points}")));
    }
    Ok(())
}

fn mean_at(model: &WalkModel, n: usize, p: usize, k: usize) -> f64 {
    let table = phi_table(model, k);
    node_mean(table.len(), |i| geometric(table[i], n).powi(p as i32))
}

fn second_at(model: &WalkModel, n: usize, p: usize, k: usize) -> f64 {
    let d = model.dim();
    let table = phi_table(model, k);
    let per = table.len();
    node_mean(per * per, |idx| {
        let (i1, i2) = (idx / per, idx % per);
        let a = table[add_index(i1, i2, k, d)];
        let b = table[i2];
        let c = table[i1];
        // Σ_l a^l [B(n−l) + C(n−l) − 1] with B, C the geometric sums of b, c
        let mut bs = vec![1.0; n + 1];
        let mut cs = vec![1.0; n + 1];
        let (mut bp, mut cp) = (1.0, 1.0);
        for m in 1..=n {
            bp *= b;
            cp *= c;
            bs[m] = bs[m - 1] + bp;
            cs[m] = cs[m - 1] + cp;
        }
        let mut inner = 0.0;
        let mut ap = 1.0;
        for l in 0..=n {
            inner += ap * (bs[n - l] + cs[n - l] - 1.0);
            ap *= a;
        }
        inner.powi(p as i32)
    })
}

fn finish(model: &WalkModel, n: usize, p: usize, quad: QuadratureSpec, value: f64, refined: f64) -> SpectralMoment {
    let exact = match model.finite_law() {
        Some(law) => quad.points > n * p * law.max_norm() as usize,
        None => n == 0,
    };
    let delta = (refined - value).abs();
    SpectralMoment {
        value,
        points: quad.points,
        refined,
        refinement_delta: delta,
        exact,
        converged: exact || delta <= quad.tol * value.abs().max(1.0),
    }
}

/// E l(n, 0) by the trapezoid rule, with a 2K refinement.
pub fn mean_local_time(model: &WalkModel, n: usize, p: usize, quad: QuadratureSpec) -> Result<SpectralMoment> {
    check_points(quad.points)?;
    if p == 0 {
        return Err(Error::InvalidParameter("p must be ≥ 1".into()));
    }
    let value = mean_at(model, n, p, quad.points);
    let refined = mean_at(model, n, p, 2 * quad.points);
    Ok(finish(model, n, p, quad, value, refined))
}

/// E l(n, 0)² by the 2d-dimensional trapezoid rule, with a 2K refinement.
pub fn second_moment_local_time(
    model: &WalkModel,
    n: usize,
    p: usize,
    quad: QuadratureSpec,
) -> Result<SpectralMoment> {
    check_points(quad.points)?;
    if p == 0 {
        return Err(Error::InvalidParameter("p must be ≥ 1".into()));
    }
    let value = second_at(model, n, p, quad.points);
    let refined = second_at(model, n, p, 2 * quad.points);
    Ok(finish(model, n, p, quad, value, refined))
}

/// a(n)^d / n^p, the multiplier turning l(n, 0) into its weak-limit scale.
pub fn weak_limit_scaling(model: &WalkModel, p: usize, n: usize) -> Result<f64> {
    check_criticality(model.dim(), model.alpha(), p)?;
    let nf = n as f64;
    Ok(model.norming(nf)?.powi(model.dim() as i32) / nf.powi(p as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn lazy(d: usize) -> WalkModel {
        WalkModel::from_name("lazy-simple", d).unwrap()
    }

    fn q(k: usize) -> QuadratureSpec {
        QuadratureSpec::new(k).unwrap()
    }

    #[test]
    fn mean_examples() {
        let m = lazy(1);
        assert_relative_eq!(mean_local_time(&m, 1, 1, q(16)).unwrap().value, 1.5, epsilon = 1e-14);
        assert_relative_eq!(mean_local_time(&m, 1, 2, q(16)).unwrap().value, 19.0 / 8.0, epsilon = 1e-14);
        for model in [lazy(1), lazy(2), WalkModel::from_name("stable:1.2", 1).unwrap()] {
            assert_relative_eq!(mean_local_time(&model, 0, 3, q(16)).unwrap().value, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn second_moment_small_cases() {
        let m = lazy(1);
        assert_relative_eq!(second_moment_local_time(&m, 0, 1, q(16)).unwrap().value, 1.0, epsilon = 1e-14);
        // l(1,0) = 2 w.p. ½ (held), 1 otherwise: E l² = 2 + ½ = 5/2
        assert_relative_eq!(second_moment_local_time(&m, 1, 1, q(16)).unwrap().value, 2.5, epsilon = 1e-14);
    }

    #[test]
    fn exactness_flag_and_refinement() {
        let m = lazy(1);
        let r = mean_local_time(&m, 20, 2, q(64)).unwrap();
        assert!(r.exact && r.converged);
        assert!(r.refinement_delta < 1e-12 * r.value);
        let coarse = mean_local_time(&m, 20, 2, q(16)).unwrap();
        assert!(!coarse.exact);
    }

    #[test]
    fn quadrature_spec_validation() {
        assert!(QuadratureSpec::new(8).is_err());
        assert_eq!(QuadratureSpec::exact_for(&lazy(1), 6, 2).points, 16);
        assert_eq!(QuadratureSpec::exact_for(&lazy(1), 100, 2).points, 256);
    }

    #[test]
    fn add_index_wraps() {
        // nodes at −π + 2πi/16: node 8 is 0, node 0 is −π ≡ π
        assert_eq!(add_index(8, 5, 16, 1), 5);
        assert_eq!(add_index(0, 0, 16, 1), 8);
        assert_eq!(add_index(12, 12, 16, 1), 0);
    }

    #[test]
    fn scaling_examples() {
        let g = lazy(1);
        assert_relative_eq!(weak_limit_scaling(&g, 1, 10_000).unwrap(), 1e-2, max_relative = 1e-14);
        assert_relative_eq!(weak_limit_scaling(&g, 2, 10_000).unwrap(), 1e-6, max_relative = 1e-14);
        let s = WalkModel::from_name("stable:1", 1).unwrap();
        let c = s.norming_constant();
        assert_relative_eq!(weak_limit_scaling(&s, 2, 1000).unwrap(), c * 1e3 / 1e6, max_relative = 1e-13);
        assert!(weak_limit_scaling(&s, 1, 1000).is_err());
        assert!(weak_limit_scaling(&lazy(2), 1, 1000).is_err());
    }

    #[test]
    fn pairwise_matches_naive() {
        let xs: Vec<f64> = (0..1000).map(|i| 1.0 / (1.0 + i as f64)).collect();
        assert_relative_eq!(pairwise_sum(&xs), xs.iter().sum::<f64>(), max_relative = 1e-14);
    }
}
