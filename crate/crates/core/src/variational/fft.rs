//! Zero-padded linear correlations on d-dimensional grids via FFT.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

/// Linear correlation engine for N^d grids (d ≤ 2), padded to (2N)^d.
///
/// Difference-grid arrays hold offsets k ∈ [−(N−1), N−1]^d stored at
/// index k mod 2N per axis.
#[derive(Clone)]
pub struct Correlator {
    d: usize,
    n: usize,
    m: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Correlator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Correlator").field("d", &self.d).field("n", &self.n).finish()
    }
}

impl Correlator {
    pub fn new(d: usize, n: usize) -> Self {
        assert!(d == 1 || d == 2, "correlator supports d ≤ 2");
        let m = 2 * n;
        let mut planner = FftPlanner::new();
        Self { d, n, m, forward: planner.plan_fft_forward(m), inverse: planner.plan_fft_inverse(m) }
    }

    pub fn padded_len(&self) -> usize {
        self.m.pow(self.d as u32)
    }

    fn transform(&self, data: &mut [Complex<f64>], inverse: bool) {
        let plan = if inverse { &self.inverse } else { &self.forward };
        let m = self.m;
        if self.d == 1 {
            plan.process(data);
            return;
        }
        for row in data.chunks_exact_mut(m) {
            plan.process(row);
        }
        let mut col = vec![Complex::new(0.0, 0.0); m];
        for c in 0..m {
            for r in 0..m {
                col[r] = data[r * m + c];
            }
            plan.process(&mut col);
            for r in 0..m {
                data[r * m + c] = col[r];
            }
        }
    }

    /// Copies an N^d grid into the zero-padded (2N)^d layout.
    fn pad(&self, u: &[f64]) -> Vec<Complex<f64>> {
        let (n, m) = (self.n, self.m);
        let mut out = vec![Complex::new(0.0, 0.0); self.padded_len()];
        if self.d == 1 {
            for (o, &x) in out.iter_mut().zip(u) {
                o.re = x;
            }
        } else {
            for r in 0..n {
                for c in 0..n {
                    out[r * m + c].re = u[r * n + c];
                }
            }
        }
        out
    }

    fn unpad(&self, v: &[Complex<f64>]) -> Vec<f64> {
        let (n, m) = (self.n, self.m);
        let scale = 1.0 / self.padded_len() as f64;
        if self.d == 1 {
            v[..n].iter().map(|z| z.re * scale).collect()
        } else {
            (0..n * n).map(|i| v[(i / n) * m + i % n].re * scale).collect()
        }
    }

    /// H_k = Σ_j u_{j+k} u_j, returned in difference-grid layout.
    pub fn autocorrelation(&self, u: &[f64]) -> Vec<f64> {
        let mut buf = self.pad(u);
        self.transform(&mut buf, false);
        for z in buf.iter_mut() {
            *z = Complex::new(z.norm_sqr(), 0.0);
        }
        self.transform(&mut buf, true);
        let scale = 1.0 / self.padded_len() as f64;
        buf.iter().map(|z| z.re * scale).collect()
    }

    /// v_j = Σ_k G_k u_{j+k} for a symmetric difference-grid array G.
    pub fn apply(&self, g: &[f64], u: &[f64]) -> Vec<f64> {
        let mut gh: Vec<Complex<f64>> = g.iter().map(|&x| Complex::new(x, 0.0)).collect();
        self.transform(&mut gh, false);
        let mut uh = self.pad(u);
        self.transform(&mut uh, false);
        for (a, b) in uh.iter_mut().zip(&gh) {
            *a *= b.conj();
        }
        self.transform(&mut uh, true);
        self.unpad(&uh)
    }

    /// Fills a difference-grid array from f(offset index vector).
    pub fn difference_array(&self, mut f: impl FnMut(&[i64]) -> f64) -> Vec<f64> {
        let (n, m) = (self.n as i64, self.m);
        let wrap = |k: i64| k.rem_euclid(m as i64) as usize;
        let mut out = vec![0.0; self.padded_len()];
        if self.d == 1 {
            for k in -(n - 1)..n {
                out[wrap(k)] = f(&[k]);
            }
        } else {
            for a in -(n - 1)..n {
                for b in -(n - 1)..n {
                    out[wrap(a) * m + wrap(b)] = f(&[a, b]);
                }
            }
        }
        out
    }

    /// Offset of difference-grid slot `i`, if it is a valid offset.
    pub fn offset_of(&self, i: usize) -> Option<Vec<i64>> {
        let (n, m) = (self.n as i64, self.m as i64);
        let unwrap = |x: i64| if x < m / 2 { x } else { x - m };
        let axis = |x: usize| {
            let k = unwrap(x as i64);
            (k.abs() < n).then_some(k)
        };
        if self.d == 1 {
            axis(i).map(|k| vec![k])
        } else {
            let (r, c) = (i / self.m, i % self.m);
            Some(vec![axis(r)?, axis(c)?])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn autocorrelation_matches_direct_1d() {
        let u = [1.0, 2.0, -0.5, 3.0];
        let c = Correlator::new(1, 4);
        let h = c.autocorrelation(&u);
        for k in -3i64..=3 {
            let direct: f64 = (0..4i64)
                .filter(|j| (0..4).contains(&(j + k)))
                .map(|j| u[(j + k) as usize] * u[j as usize])
                .sum();
            assert!((h[k.rem_euclid(8) as usize] - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn apply_matches_direct_2d() {
        let n = 3;
        let c = Correlator::new(2, n);
        let u: Vec<f64> = (0..9).map(|i| (i as f64 * 0.7).sin()).collect();
        let g = c.difference_array(|k| 1.0 / (1.0 + (k[0] * k[0] + k[1] * k[1]) as f64));
        let v = c.apply(&g, &u);
        for j0 in 0..3i64 {
            for j1 in 0..3i64 {
                let mut direct = 0.0;
                for a in 0..3i64 {
                    for b in 0..3i64 {
                        let (k0, k1) = (a - j0, b - j1);
                        direct += u[(a * 3 + b) as usize] / (1.0 + (k0 * k0 + k1 * k1) as f64);
                    }
                }
                assert!((v[(j0 * 3 + j1) as usize] - direct).abs() < 1e-12);
            }
        }
        assert_eq!(c.offset_of(7), Some(vec![1, 1]));
        assert_eq!(c.offset_of(3), None);
        assert_eq!(c.offset_of(5), Some(vec![0, -1]));
    }
}
