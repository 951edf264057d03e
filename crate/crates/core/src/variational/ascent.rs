//! Riemannian gradient ascent on the unit sphere for ρ₁ and ρ₂.

use crate::error::{Error, Result};
use crate::model::check_criticality;

use super::fft::Correlator;
use super::{FrequencyGrid, Psi, VariationalResult};

/// Which functional to maximise.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    /// ∫ H_g^p
    Rho1,
    /// ∫ H_g^{2p}
    Rho2,
}

impl Objective {
    fn exponent(self, p: usize) -> i32 {
        match self {
            Objective::Rho1 => p as i32,
            Objective::Rho2 => 2 * p as i32,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Objective::Rho1 => "rho1",
            Objective::Rho2 => "rho2",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AscentOptions {
    pub max_iter: usize,
    /// Stop when the relative objective gain drops below this.
    pub tol: f64,
    /// Repeat the solve with doubled cutoff and extrapolate the truncation
    /// error, assumed ∝ Λ^{d−α}.
    pub extrapolate: bool,
}

impl Default for AscentOptions {
    fn default() -> Self {
        Self { max_iter: 10_000, tol: 1e-10, extrapolate: true }
    }
}

struct Problem {
    grid: FrequencyGrid,
    w: Vec<f64>,
    corr: Correlator,
    e: i32,
}

impl Problem {
    fn new(grid: FrequencyGrid, psi: &Psi, e: i32) -> Self {
        Self { grid, w: grid.weights(psi), corr: Correlator::new(grid.d, grid.points), e }
    }

    fn u(&self, g: &[f64]) -> Vec<f64> {
        g.iter().zip(&self.w).map(|(a, b)| a * b).collect()
    }

    /// (F, H) with H in difference-grid layout, already scaled by h^d.
    fn value(&self, g: &[f64]) -> (f64, Vec<f64>) {
        let cell = self.grid.cell();
        let h: Vec<f64> = self.corr.autocorrelation(&self.u(g)).into_iter().map(|x| x * cell).collect();
        let f = cell * h.iter().map(|x| x.powi(self.e)).sum::<f64>();
        (f, h)
    }

    /// L² gradient 2e h^d w_j Σ_k H_k^{e−1} u_{j+k}.
    fn gradient(&self, g: &[f64], h: &[f64]) -> Vec<f64> {
        let cell = self.grid.cell();
        let he: Vec<f64> = h.iter().map(|x| x.powi(self.e - 1)).collect();
        let v = self.corr.apply(&he, &self.u(g));
        let c = 2.0 * self.e as f64 * cell;
        v.iter().zip(&self.w).map(|(a, b)| c * a * b).collect()
    }
}

/// F(g) on the grid (no normalisation of g).
pub fn functional(which: Objective, psi: &Psi, p: usize, grid: FrequencyGrid, g: &[f64]) -> f64 {
    Problem::new(grid, psi, which.exponent(p)).value(g).0
}

/// L² gradient of F at g.
pub fn gradient(which: Objective, psi: &Psi, p: usize, grid: FrequencyGrid, g: &[f64]) -> Vec<f64> {
    let prob = Problem::new(grid, psi, which.exponent(p));
    let (_, h) = prob.value(g);
    prob.gradient(g, &h)
}

struct Ascent {
    value: f64,
    g: Vec<f64>,
    iterations: usize,
    grad_norm: f64,
    converged: bool,
    trace: Vec<f64>,
}

fn ascend(prob: &Problem, opts: &AscentOptions) -> Ascent {
    let grid = &prob.grid;
    let mut g = prob.w.clone();
    grid.normalize(&mut g);
    let (mut f, mut h) = prob.value(&g);
    let mut trace = vec![f];
    let mut converged = false;
    let mut grad_norm = f64::NAN;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        let grad = prob.gradient(&g, &h);
        let radial = grid.dot(&grad, &g);
        let tangent: Vec<f64> = grad.iter().zip(&g).map(|(a, b)| a - radial * b).collect();
        let tn2 = grid.dot(&tangent, &tangent);
        grad_norm = tn2.sqrt();
        if grad_norm <= 1e-12 * f.abs().max(1e-300) {
            converged = true;
            break;
        }
        let mut step = 1.0;
        let mut accepted = None;
        while step > 1e-20 {
            let mut trial: Vec<f64> = g.iter().zip(&tangent).map(|(a, b)| a + step * b).collect();
            grid.normalize(&mut trial);
            let (ft, ht) = prob.value(&trial);
            // Armijo sufficient increase
            if ft >= f + 1e-4 * step * tn2 && ft > f {
                accepted = Some((trial, ft, ht));
                break;
            }
            step *= 0.5;
        }
        let Some((trial, ft, ht)) = accepted else {
            converged = true;
            break;
        };
        let gain = (ft - f) / f.abs();
        g = trial;
        f = ft;
        h = ht;
        trace.push(f);
        iterations += 1;
        if gain < opts.tol {
            converged = true;
            break;
        }
    }
    Ascent { value: f, g, iterations, grad_norm, converged, trace }
}

/// Maximises the selected functional; see [`AscentOptions`] for the
/// cutoff extrapolation.
pub fn solve(which: Objective, psi: &Psi, p: usize, grid: FrequencyGrid, opts: &AscentOptions) -> Result<VariationalResult> {
    if p == 0 {
        return Err(Error::InvalidParameter("p must be ≥ 1".into()));
    }
    check_criticality(grid.d, psi.alpha(), p)?;
    let e = which.exponent(p);
    let base = ascend(&Problem::new(grid, psi, e), opts);
    let q = psi.alpha() - grid.d as f64;
    let (value, doubled, delta) = if opts.extrapolate {
        let big = ascend(&Problem::new(grid.doubled_cutoff(), psi, e), opts);
        let delta = (big.value - base.value).abs() / big.value.abs();
        let r = 2f64.powf(q);
        let extrapolated = if q > 0.0 { (r * big.value - base.value) / (r - 1.0) } else { big.value };
        (extrapolated, Some(big.value), Some(delta))
    } else {
        (base.value, None, None)
    };
    Ok(VariationalResult {
        which: which.name().into(),
        psi: psi.to_string(),
        p,
        value,
        raw_value: base.value,
        doubled_value: doubled,
        cutoff_delta: delta,
        cutoff_warning: delta.is_some_and(|d| d > 5e-3),
        iterations: base.iterations,
        grad_norm: base.grad_norm,
        converged: base.converged,
        grid,
        trace: base.trace,
        g: base.g,
    })
}

pub fn rho1(psi: &Psi, p: usize, grid: FrequencyGrid, opts: &AscentOptions) -> Result<VariationalResult> {
    solve(Objective::Rho1, psi, p, grid, opts)
}

pub fn rho2(psi: &Psi, p: usize, grid: FrequencyGrid, opts: &AscentOptions) -> Result<VariationalResult> {
    solve(Objective::Rho2, psi, p, grid, opts)
}
