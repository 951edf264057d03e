//! Special functions needed by the heavy-tailed step law.

use std::f64::consts::PI;

/// Bernoulli numbers B₂, B₄, …, B₁₆.
const BERNOULLI_EVEN: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

/// Riemann zeta ζ(s) for real s > 1 by Euler–Maclaurin summation.
pub fn zeta(s: f64) -> f64 {
    assert!(s > 1.0, "zeta(s) requires s > 1");
    const N: usize = 24;
    let n = N as f64;
    let head: f64 = (1..N).map(|k| (k as f64).powf(-s)).sum();
    let mut tail = n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s);
    // rising factorial s(s+1)…(s+2j-2) and (2j)!
    let mut rising = s;
    let mut fact = 2.0;
    let mut npow = n.powf(-s - 1.0);
    for (j, b) in BERNOULLI_EVEN.iter().enumerate() {
        tail += b / fact * rising * npow;
        let k = 2.0 * (j as f64 + 1.0);
        rising *= (s + k - 1.0) * (s + k);
        fact *= (k + 1.0) * (k + 2.0);
        npow /= n * n;
    }
    head + tail
}

/// ∫₀^∞ u^{-1-α} (1 − cos u) du for α ∈ (0, 2).
pub fn one_minus_cos_moment(alpha: f64) -> f64 {
    PI / (2.0 * statrs::function::gamma::gamma(1.0 + alpha) * (PI * alpha / 2.0).sin())
}

/// Re ∫_X^∞ v^{-s} e^{iv} dv by its large-X asymptotic series.
fn cos_tail(s: f64, x: f64) -> f64 {
    // i e^{iX} X^{-s} Σ_m (-i)^m (s)_m X^{-m}
    let (sin_x, cos_x) = x.sin_cos();
    let mut re = 0.0;
    let mut im = 0.0;
    let mut coef: f64 = 1.0;
    let mut prev = f64::INFINITY;
    for m in 0..40 {
        if coef.abs() > prev {
            break;
        }
        // (-i)^m
        let (pr, pi) = match m % 4 {
            0 => (1.0, 0.0),
            1 => (0.0, -1.0),
            2 => (-1.0, 0.0),
            _ => (0.0, 1.0),
        };
        re += coef * pr;
        im += coef * pi;
        prev = coef.abs();
        coef *= (s + m as f64) / x;
        if coef.abs() < 1e-18 {
            break;
        }
    }
    // i (cos X + i sin X) (re + i im), real part
    let scale = x.powf(-s);
    let (ar, ai) = (-sin_x, cos_x);
    scale * (ar * re - ai * im)
}

/// ∫₀^X v^{-s} (1 − cos v) dv by its power series (X ≲ 2).
fn cos_head(s: f64, x: f64) -> f64 {
    // 1 − cos v = Σ_{m≥1} (−1)^{m+1} v^{2m} / (2m)!
    let mut total = 0.0;
    let mut term = 1.0; // X^{2m} / (2m)!
    for m in 1..30 {
        let k = 2.0 * m as f64;
        term *= x * x / ((k - 1.0) * k);
        let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
        let piece = sign * term * x.powf(1.0 - s) / (k - s + 1.0);
        total += piece;
        if piece.abs() < 1e-18 * total.abs() {
            break;
        }
    }
    total
}

/// Σ_{k≥1} k^{-s} (1 − cos kθ) with s = 1 + α, for θ ∈ [0, π].
///
/// Direct sum up to a cut K, then the midpoint Euler–Maclaurin tail (with
/// its first derivative correction)
/// ∫_{K-½}^∞ u^{-s}(1 − cos uθ) du = θ^{s-1}∫_X^∞ v^{-s}(1 − cos v) dv with
/// X = (K − ½)θ. Large X uses the asymptotic series; small θ keeps K = 32
/// so X is small and the head of the integral comes from its power series.
pub fn stable_deficit(alpha: f64, theta: f64) -> f64 {
    let s = 1.0 + alpha;
    let theta = theta.abs();
    if theta == 0.0 {
        return 0.0;
    }
    let small = 31.5 * theta <= 2.0;
    let k_cut = if small { 32 } else { ((40.0 / theta).ceil() as usize).max(32) };
    let head: f64 = (1..k_cut)
        .map(|k| {
            let kf = k as f64;
            kf.powf(-s) * (1.0 - (kf * theta).cos())
        })
        .sum();
    let x = (k_cut as f64 - 0.5) * theta;
    let tail_scaled = if small {
        one_minus_cos_moment(alpha) - cos_head(s, x)
    } else {
        x.powf(1.0 - s) / (s - 1.0) - cos_tail(s, x)
    };
    // midpoint Euler–Maclaurin: Σ_{k≥K} f(k) = ∫_{K-½}^∞ f + f'/24 − 7f⁽³⁾/5760 + 31f⁽⁵⁾/967680
    let u = k_cut as f64 - 0.5;
    let correction = deficit_derivative(s, theta, u, 1) / 24.0 - 7.0 * deficit_derivative(s, theta, u, 3) / 5760.0
        + 31.0 * deficit_derivative(s, theta, u, 5) / 967_680.0;
    head + theta.powf(s - 1.0) * tail_scaled + correction
}

/// m-th derivative of u ↦ u^{-s}(1 − cos uθ) by the Leibniz rule.
fn deficit_derivative(s: f64, theta: f64, u: f64, m: u32) -> f64 {
    // d^j u^{-s} = (−1)^j (s)_j u^{-s-j}
    let power = |j: u32| {
        let rising: f64 = (0..j).map(|i| s + i as f64).product();
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        sign * rising * u.powf(-s - j as f64)
    };
    // Re[d^m (u^{-s} e^{iθu})] = Σ_j C(m,j) d^j u^{-s} · Re[(iθ)^{m-j} e^{iθu}]
    let (sin_t, cos_t) = (theta * u).sin_cos();
    let mut osc = 0.0;
    let mut binom = 1.0;
    for j in 0..=m {
        let k = m - j;
        let re = match k % 4 {
            0 => cos_t,
            1 => -sin_t,
            2 => -cos_t,
            _ => sin_t,
        } * theta.powi(k as i32);
        osc += binom * power(j) * re;
        binom *= (m - j) as f64 / (j + 1) as f64;
    }
    power(m) - osc
}
