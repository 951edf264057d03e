//! ρ(f) by power iteration and the spatial-side check M_f(1/ρ(f)) = 1.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

use super::fft::Correlator;
use super::{FrequencyGrid, Psi, VariationalResult};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelOptions {
    pub max_iter: usize,
    /// Relative change of the Rayleigh quotient that ends the iteration.
    pub tol: f64,
}

impl Default for KernelOptions {
    fn default() -> Self {
        Self { max_iter: 100_000, tol: 1e-15 }
    }
}

/// ½^d on the open cube (−1, 1)^d, with half weight per axis on the boundary.
pub fn indicator_test_f(x: &[f64]) -> f64 {
    x.iter()
        .map(|&t| match t.abs() {
            a if a < 1.0 => 0.5,
            a if a == 1.0 => 0.25,
            _ => 0.0,
        })
        .product()
}

/// Spatial transform ∫ f(λ) e^{iλx} dλ of the d=1 indicator test function.
pub fn indicator_test_fbar(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

fn kernel_table(corr: &Correlator, grid: &FrequencyGrid, f: &dyn Fn(&[f64]) -> f64) -> Result<Vec<f64>> {
    let h = grid.h;
    let mut bad = false;
    let table = corr.difference_array(|k| {
        let x: Vec<f64> = k.iter().map(|&i| i as f64 * h).collect();
        let v = f(&x);
        if !(v >= 0.0) {
            bad = true;
        }
        v
    });
    if bad {
        return Err(Error::NotNonnegative);
    }
    Ok(table)
}

/// Top eigenvalue of g ↦ h^d w(λ) Σ_γ f(γ−λ) w(γ) g(γ) for f ≥ 0 symmetric.
pub fn rho_of_f(f: &dyn Fn(&[f64]) -> f64, psi: &Psi, grid: FrequencyGrid, opts: &KernelOptions) -> Result<VariationalResult> {
    let corr = Correlator::new(grid.d, grid.points);
    let table = kernel_table(&corr, &grid, f)?;
    let w = grid.weights(psi);
    let cell = grid.cell();
    let apply = |g: &[f64]| -> Vec<f64> {
        let u: Vec<f64> = g.iter().zip(&w).map(|(a, b)| a * b).collect();
        corr.apply(&table, &u).iter().zip(&w).map(|(a, b)| cell * a * b).collect()
    };
    let mut g = w.clone();
    grid.normalize(&mut g);
    let mut value = grid.dot(&g, &apply(&g));
    let mut trace = vec![value];
    let mut converged = false;
    let mut iterations = 0;
    let mut residual = f64::NAN;
    while iterations < opts.max_iter {
        let mut next = apply(&g);
        grid.normalize(&mut next);
        let ag = apply(&next);
        let q = grid.dot(&next, &ag);
        let r: Vec<f64> = ag.iter().zip(&next).map(|(a, b)| a - q * b).collect();
        residual = grid.dot(&r, &r).sqrt();
        iterations += 1;
        let gain = (q - value).abs() / q.abs();
        g = next;
        value = q.max(value);
        trace.push(value);
        if gain < opts.tol || residual <= opts.tol * q.abs() {
            converged = true;
            break;
        }
    }
    Ok(VariationalResult {
        which: "rho_f".into(),
        psi: psi.to_string(),
        p: 1,
        value,
        raw_value: value,
        doubled_value: None,
        cutoff_delta: None,
        cutoff_warning: false,
        iterations,
        grad_norm: residual,
        converged,
        grid,
        trace,
        g,
    })
}

fn axis_indices(grid: &FrequencyGrid, i: usize) -> Vec<usize> {
    match grid.d {
        1 => vec![i],
        _ => vec![i / grid.points, i % grid.points],
    }
}

/// Same eigenvalue from a dense symmetric eigensolve.
pub fn dense_rho_of_f(f: &dyn Fn(&[f64]) -> f64, psi: &Psi, grid: FrequencyGrid) -> Result<f64> {
    let n = grid.len();
    let w = grid.weights(psi);
    let cell = grid.cell();
    let mut bad = false;
    let m = DMatrix::from_fn(n, n, |i, j| {
        let (a, b) = (axis_indices(&grid, i), axis_indices(&grid, j));
        let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (*y as f64 - *x as f64) * grid.h).collect();
        let v = f(&diff);
        if !(v >= 0.0) {
            bad = true;
        }
        cell * w[i] * v * w[j]
    });
    if bad {
        return Err(Error::NotNonnegative);
    }
    Ok(m.symmetric_eigenvalues().max())
}

/// Spatial grid x_m = (m − N/2)Δx, Δx = 2π/(N h), dual to the frequency grid.
fn spatial_nodes(grid: &FrequencyGrid) -> (Vec<f64>, f64) {
    let n = grid.points;
    let dx = 2.0 * std::f64::consts::PI / (n as f64 * grid.h);
    ((0..n).map(|m| (m as f64 - n as f64 / 2.0) * dx).collect(), dx)
}

/// Kinetic matrix: multiplication by Ψ in frequency, seen on the spatial grid.
fn kinetic(psi: &Psi, grid: &FrequencyGrid) -> DMatrix<f64> {
    let n = grid.points;
    let (_, dx) = spatial_nodes(grid);
    let lam: Vec<f64> = (0..n).map(|j| grid.node(j)).collect();
    let coef: Vec<f64> = (0..n)
        .map(|r| lam.iter().map(|&l| psi.eval(&[l]) * (l * r as f64 * dx).cos()).sum::<f64>() / n as f64)
        .collect();
    DMatrix::from_fn(n, n, |a, b| coef[a.abs_diff(b)])
}

/// M_f(θ) = sup_{‖g‖₂=1} θ⟨g², f̄⟩ − ⟨|ĝ|², Ψ⟩ on the spatial grid (d = 1).
pub fn spatial_sup(fbar: &dyn Fn(f64) -> f64, psi: &Psi, grid: FrequencyGrid, theta: f64) -> Result<f64> {
    if grid.d != 1 {
        return Err(Error::UnsupportedDimension("spatial-side check", grid.d));
    }
    let (xs, _) = spatial_nodes(&grid);
    let mut m = -kinetic(psi, &grid);
    for (i, &x) in xs.iter().enumerate() {
        m[(i, i)] += theta * fbar(x);
    }
    Ok(m.symmetric_eigenvalues().max())
}

#[derive(Clone, Debug, Serialize)]
pub struct SpatialIdentityReport {
    pub rho: f64,
    pub rho_converged: bool,
    /// M_f(1/ρ(f)).
    pub m_value: f64,
    pub residual: f64,
    /// (θ, M_f(θ)) at θ ∈ {½, 1, 2}/ρ(f).
    pub scan: Vec<(f64, f64)>,
    pub monotone: bool,
    pub nonnegative: bool,
    pub grid: FrequencyGrid,
}

/// Checks M_f(1/ρ(f)) = 1 for a d=1 test function f with transform f̄.
pub fn spatial_identity_check(
    f: &dyn Fn(&[f64]) -> f64,
    fbar: &dyn Fn(f64) -> f64,
    psi: &Psi,
    grid: FrequencyGrid,
) -> Result<SpatialIdentityReport> {
    if grid.d != 1 {
        return Err(Error::UnsupportedDimension("spatial-side check", grid.d));
    }
    let r = rho_of_f(f, psi, grid, &KernelOptions::default())?;
    let rho = r.value;
    let m_value = spatial_sup(fbar, psi, grid, 1.0 / rho)?;
    let scan = [0.5, 1.0, 2.0]
        .iter()
        .map(|&c| Ok((c / rho, spatial_sup(fbar, psi, grid, c / rho)?)))
        .collect::<Result<Vec<_>>>()?;
    let monotone = scan.windows(2).all(|w| w[1].1 >= w[0].1);
    let nonnegative = scan.iter().all(|&(_, m)| m >= 0.0) && m_value >= 0.0;
    Ok(SpatialIdentityReport {
        rho,
        rho_converged: r.converged,
        m_value,
        residual: (m_value - 1.0).abs(),
        scan,
        monotone,
        nonnegative,
        grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::variational::{rho1, rho2, AscentOptions};
    use rand::{Rng, SeedableRng};

    fn gauss() -> Psi {
        Psi::Gaussian { sigma: 1.0 }
    }

    #[test]
    fn power_iteration_matches_dense() {
        let grid = FrequencyGrid::new(1, 20.0, 400).unwrap();
        let r = rho_of_f(&indicator_test_f, &gauss(), grid, &KernelOptions::default()).unwrap();
        let dense = dense_rho_of_f(&indicator_test_f, &gauss(), grid).unwrap();
        assert!(r.converged);
        assert!((r.value - dense).abs() <= 1e-8 * dense, "{} vs {}", r.value, dense);
        let grid2 = FrequencyGrid::new(2, 4.0, 12).unwrap();
        let f2 = |x: &[f64]| (-(x[0] * x[0] + x[1] * x[1])).exp();
        let r2 = rho_of_f(&f2, &gauss(), grid2, &KernelOptions::default()).unwrap();
        let d2 = dense_rho_of_f(&f2, &gauss(), grid2).unwrap();
        assert!((r2.value - d2).abs() <= 1e-8 * d2);
    }

    #[test]
    fn linear_in_f_and_rejects_negative() {
        let grid = FrequencyGrid::new(1, 10.0, 128).unwrap();
        let a = rho_of_f(&indicator_test_f, &gauss(), grid, &KernelOptions::default()).unwrap().value;
        let b = rho_of_f(&|x: &[f64]| 3.5 * indicator_test_f(x), &gauss(), grid, &KernelOptions::default()).unwrap().value;
        assert!((b - 3.5 * a).abs() < 1e-10 * b);
        assert!(rho_of_f(&|x: &[f64]| x[0].cos(), &gauss(), grid, &KernelOptions::default()).is_err());
    }

    #[test]
    fn constant_kernel_matches_p1_ascent() {
        let grid = FrequencyGrid::new(1, 40.0, 512).unwrap();
        let opts = AscentOptions { extrapolate: false, ..Default::default() };
        let asc = rho1(&gauss(), 1, grid, &opts).unwrap();
        let ker = rho_of_f(&|_: &[f64]| 1.0, &gauss(), grid, &KernelOptions::default()).unwrap();
        let w = grid.weights(&gauss());
        let w2 = grid.dot(&w, &w);
        assert!((asc.value - w2).abs() < 1e-6 * w2);
        assert!((ker.value - w2).abs() < 1e-6 * w2);
    }

    #[test]
    fn kernel_values_bounded_by_rho2() {
        let grid = FrequencyGrid::new(1, 12.0, 192).unwrap();
        let opts = AscentOptions { extrapolate: false, ..Default::default() };
        let r2 = rho2(&gauss(), 1, grid, &opts).unwrap().value;
        let bound = r2.sqrt();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let corr_len = 2 * grid.points;
        for _ in 0..20 {
            // random symmetric f ≥ 0 with ‖f‖₂ = 1 on the difference grid, times a symmetric 0 ≤ h ≤ 1
            let width = rng.random_range(0.3..6.0);
            let amp: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..1.0)).collect();
            let shape = move |x: f64| {
                let t = x / width;
                (-t * t).exp() * (amp[0] + amp[1] * (t * 1.3).cos().powi(2) + amp[2] * (1.0 + t * t).recip())
            };
            let h_cut = rng.random_range(0.5..8.0);
            let hk = move |x: f64| if x.abs() <= h_cut { 1.0 } else { 0.3 };
            let step = grid.h;
            let norm2: f64 = (0..corr_len as i64).map(|k| k - grid.points as i64).map(|k| shape(k as f64 * step).powi(2)).sum::<f64>() * step;
            let c = norm2.sqrt().recip();
            let f = move |x: &[f64]| c * shape(x[0]) * hk(x[0]);
            let rho = rho_of_f(&f, &gauss(), grid, &KernelOptions::default()).unwrap().value;
            assert!(rho <= bound * (1.0 + 1e-9), "{rho} > {bound}");
        }
    }

    #[test]
    fn spatial_identity_holds() {
        let grid = FrequencyGrid::new(1, 40.0, 1000).unwrap();
        let rep = spatial_identity_check(&indicator_test_f, &indicator_test_fbar, &gauss(), grid).unwrap();
        assert!(rep.residual <= 5e-3, "{rep:?}");
        assert!(rep.monotone && rep.nonnegative);
    }
}
