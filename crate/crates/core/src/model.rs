//! Symmetric lattice step laws.
//!
//! A [`WalkModel`] bundles a step law on ℤ^d with everything the rest of
//! the crate needs to know about it: the characteristic function φ, the
//! stable index α, the norming function a(t), the limit exponent Ψ, and
//! the step covariance Γ when α = 2.
//!
//! Built-in families:
//!
//! * `lazy-simple`: hold with probability ½, otherwise a nearest-neighbour
//!   move. φ(λ) = ½ + (1/2d) Σᵢ cos λᵢ ≥ 0, Γ = I/(2d), a(t) = √t.
//! * `simple`: nearest-neighbour moves. φ(λ) = (1/d) Σᵢ cos λᵢ, Γ = I/d.
//! * `stable:<α>` (d = 1): P(S₁ = ±k) = k^{-1-α} / (2ζ(1+α)), k ≥ 1, with
//!   a(t) = c·t^{1/α} normalised so that t(1 − φ(λ/a(t))) → |λ|^α.

use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use rand_distr::{Distribution, Zeta};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::rng::{BitSource, SeedStreams, StreamTag};
use crate::special;

/// Family selector, parsed from `lazy-simple`, `simple` or `stable:<alpha>`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum ModelKind {
    LazySimple,
    Simple,
    Stable { alpha: f64 },
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKind::LazySimple => write!(f, "lazy-simple"),
            ModelKind::Simple => write!(f, "simple"),
            ModelKind::Stable { alpha } => write!(f, "stable:{alpha}"),
        }
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lazy-simple" => Ok(ModelKind::LazySimple),
            "simple" => Ok(ModelKind::Simple),
            _ => {
                let alpha = s
                    .strip_prefix("stable:")
                    .and_then(|a| a.parse::<f64>().ok())
                    .ok_or_else(|| Error::UnknownModel(s.to_string()))?;
                Ok(ModelKind::Stable { alpha })
            }
        }
    }
}

impl From<ModelKind> for String {
    fn from(k: ModelKind) -> String {
        k.to_string()
    }
}

impl TryFrom<String> for ModelKind {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// One atom of a finite step law: probability `weight / denom`.
#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub site: Vec<i64>,
    pub key: i64,
    pub weight: u64,
}

/// Finite step law with exact rational weights over a common denominator.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteLaw {
    pub atoms: Vec<Atom>,
    pub denom: u64,
    /// Sampling table: outcome `u ∈ 0..denom` maps to `table[u]`.
    table: Vec<i64>,
    bits: u32,
}

impl FiniteLaw {
    fn new(atoms: Vec<Atom>) -> Self {
        let denom: u64 = atoms.iter().map(|a| a.weight).sum();
        let table = atoms
            .iter()
            .flat_map(|a| std::iter::repeat_n(a.key, a.weight as usize))
            .collect();
        let bits = 64 - (denom - 1).leading_zeros();
        Self { atoms, denom, table, bits: bits.max(1) }
    }

    pub fn is_dyadic(&self) -> bool {
        self.denom.is_power_of_two()
    }

    pub fn max_norm(&self) -> i64 {
        self.atoms
            .iter()
            .map(|a| a.site.iter().map(|c| c.abs()).max().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum StepLaw {
    Finite(FiniteLaw),
    /// P(±k) = k^{-s} / (2ζ(s)), s = 1 + α.
    Zeta { alpha: f64, zeta_s: f64 },
}

/// Immutable description of a symmetric ℤ^d random walk.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkModel {
    kind: ModelKind,
    lattice: Lattice,
    law: StepLaw,
    alpha: f64,
    /// Row-major d×d covariance of one step (α = 2 only).
    gamma: Option<Vec<f64>>,
    norming_const: f64,
    cf_nonneg: bool,
}

/// Rejects `(d, α, p)` outside the regime `d < αp`.
pub fn check_criticality(d: usize, alpha: f64, p: usize) -> Result<()> {
    if (d as f64) < alpha * p as f64 {
        Ok(())
    } else {
        Err(Error::Criticality { d, alpha, p })
    }
}

/// Norming constant c of a(t) = c t^{1/α} for the zeta step law.
pub fn stable_norming_constant(alpha: f64) -> f64 {
    let k = special::one_minus_cos_moment(alpha) / special::zeta(1.0 + alpha);
    k.powf(1.0 / alpha)
}

impl WalkModel {
    pub fn build(kind: ModelKind, d: usize) -> Result<Self> {
        let lattice = Lattice::new(d)?;
        match kind {
            ModelKind::LazySimple | ModelKind::Simple => {
                let lazy = kind == ModelKind::LazySimple;
                let mut atoms = Vec::with_capacity(2 * d + 1);
                if lazy {
                    atoms.push(Atom { site: vec![0; d], key: 0, weight: 2 * d as u64 });
                }
                for axis in 0..d {
                    for s in [1i64, -1] {
                        let mut site = vec![0; d];
                        site[axis] = s;
                        atoms.push(Atom { key: lattice.unit(axis, s), site, weight: 1 });
                    }
                }
                let var = if lazy { 1.0 / (2 * d) as f64 } else { 1.0 / d as f64 };
                let mut gamma = vec![0.0; d * d];
                for i in 0..d {
                    gamma[i * d + i] = var;
                }
                Ok(Self {
                    kind,
                    lattice,
                    law: StepLaw::Finite(FiniteLaw::new(atoms)),
                    alpha: 2.0,
                    gamma: Some(gamma),
                    norming_const: 1.0,
                    cf_nonneg: lazy,
                })
            }
            ModelKind::Stable { alpha } => {
                if !(alpha > 0.0 && alpha < 2.0) {
                    return Err(Error::AlphaOutOfRange(alpha));
                }
                if d != 1 {
                    return Err(Error::UnsupportedDimension("stable", d));
                }
                Ok(Self {
                    kind,
                    lattice,
                    law: StepLaw::Zeta { alpha, zeta_s: special::zeta(1.0 + alpha) },
                    alpha,
                    gamma: None,
                    norming_const: stable_norming_constant(alpha),
                    cf_nonneg: false,
                })
            }
        }
    }

    /// Parses a model name as accepted by `--model`.
    pub fn from_name(name: &str, d: usize) -> Result<Self> {
        Self::build(name.parse()?, d)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }
    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }
    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }
    pub fn law(&self) -> &StepLaw {
        &self.law
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn gamma(&self) -> Option<&[f64]> {
        self.gamma.as_deref()
    }
    pub fn cf_nonneg(&self) -> bool {
        self.cf_nonneg
    }

    /// Finite step law, if the support is finite.
    pub fn finite_law(&self) -> Option<&FiniteLaw> {
        match &self.law {
            StepLaw::Finite(f) => Some(f),
            StepLaw::Zeta { .. } => None,
        }
    }

    /// det Γ (α = 2 models).
    pub fn det_gamma(&self) -> Option<f64> {
        let g = self.gamma.as_ref()?;
        let d = self.dim();
        // built-in covariances are diagonal
        Some((0..d).map(|i| g[i * d + i]).product())
    }

    /// φ(λ) = Σₓ P(x) cos(λ·x).
    pub fn char_fn(&self, lambda: &[f64]) -> f64 {
        debug_assert_eq!(lambda.len(), self.dim());
        match &self.law {
            StepLaw::Finite(law) => {
                let total: f64 = law
                    .atoms
                    .iter()
                    .map(|a| {
                        let phase: f64 = a.site.iter().zip(lambda).map(|(&x, &l)| x as f64 * l).sum();
                        a.weight as f64 * phase.cos()
                    })
                    .sum();
                total / law.denom as f64
            }
            StepLaw::Zeta { alpha, zeta_s } => {
                let theta = lambda[0].rem_euclid(2.0 * std::f64::consts::PI);
                let theta = if theta > std::f64::consts::PI {
                    2.0 * std::f64::consts::PI - theta
                } else {
                    theta
                };
                1.0 - special::stable_deficit(*alpha, theta) / zeta_s
            }
        }
    }

    /// Limit exponent Ψ(λ): ½ λ·Γλ for α = 2, |λ|^α for the stable family.
    pub fn psi(&self, lambda: &[f64]) -> f64 {
        match &self.gamma {
            Some(g) => {
                let d = self.dim();
                let mut q = 0.0;
                for i in 0..d {
                    for j in 0..d {
                        q += lambda[i] * g[i * d + j] * lambda[j];
                    }
                }
                0.5 * q
            }
            None => lambda[0].abs().powf(self.alpha),
        }
    }

    /// Norming function a(t) = c·t^{1/α}.
    pub fn norming(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::InvalidParameter(format!("norming requires t > 0, got {t}")));
        }
        Ok(self.norming_const * t.powf(1.0 / self.alpha))
    }

    pub fn norming_constant(&self) -> f64 {
        self.norming_const
    }

    /// Step sampler driven by `rng`.
    pub fn sampler<R: RngCore>(&self, rng: R) -> StepSampler<'_, R> {
        let zeta = match &self.law {
            StepLaw::Zeta { alpha, .. } => Some(Zeta::new(1.0 + alpha).expect("valid zeta exponent")),
            StepLaw::Finite(_) => None,
        };
        StepSampler { model: self, bits: BitSource::new(rng), zeta }
    }

    /// Path S(0..=n) from an explicit random source.
    pub fn sample_path_with<R: RngCore>(&self, n: usize, rng: R) -> Vec<i64> {
        let mut sampler = self.sampler(rng);
        let mut positions = Vec::with_capacity(n + 1);
        let mut pos = 0i64;
        positions.push(pos);
        for _ in 0..n {
            pos += sampler.next_step();
            positions.push(pos);
        }
        positions
    }

    /// Deterministic path for `(n, seed)`.
    pub fn sample_path(&self, n: usize, seed: u64) -> PathSample {
        let rng = SeedStreams::new(seed).stream(0, StreamTag::Walk(0));
        PathSample { n, positions: self.sample_path_with(n, rng), seed, lattice: self.lattice }
    }

    /// Checks that p paths of horizon n cannot leave the packing range.
    pub fn check_range(&self, n: usize, p: usize) -> Result<()> {
        if let Some(law) = self.finite_law() {
            let reach = (law.max_norm() as i128) * (n as i128) * (p.max(1) as i128) * 2;
            let lim = self.lattice.coord_limit() as i128;
            if reach > lim {
                return Err(Error::PackingRange(reach.min(i64::MAX as i128) as i64, lim as i64));
            }
        }
        Ok(())
    }
}

/// Draws i.i.d. packed increments from a model's step law.
pub struct StepSampler<'a, R> {
    model: &'a WalkModel,
    bits: BitSource<R>,
    zeta: Option<Zeta<f64>>,
}

impl<R: RngCore> StepSampler<'_, R> {
    #[inline]
    pub fn next_step(&mut self) -> i64 {
        match &self.model.law {
            StepLaw::Finite(law) => loop {
                let u = self.bits.take(law.bits);
                if u < law.denom {
                    return law.table[u as usize];
                }
            },
            StepLaw::Zeta { .. } => {
                let z = self.zeta.as_ref().expect("zeta sampler");
                let k = z.sample(self.bits.inner_mut());
                let k = if k >= 4.0e15 { 4_000_000_000_000_000i64 } else { k as i64 };
                if self.bits.take(1) == 0 {
                    k
                } else {
                    -k
                }
            }
        }
    }
}

/// One sampled path S(0), …, S(n) with packed coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct PathSample {
    pub n: usize,
    pub positions: Vec<i64>,
    pub seed: u64,
    pub lattice: Lattice,
}

impl PathSample {
    pub fn site(&self, k: usize) -> Vec<i64> {
        self.lattice.unpack(self.positions[k])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;
    use std::f64::consts::PI;

    fn lazy1() -> WalkModel {
        WalkModel::build(ModelKind::LazySimple, 1).unwrap()
    }

    #[test]
    fn lazy_char_fn_closed_form() {
        let m = lazy1();
        for &l in &[0.0, 0.3, PI / 2.0, 2.0, PI] {
            assert_relative_eq!(m.char_fn(&[l]), (1.0 + l.cos()) / 2.0, epsilon = 1e-15);
        }
        assert_eq!(m.char_fn(&[0.0]), 1.0);
        assert!(m.char_fn(&[PI]).abs() < 1e-15);
        assert_relative_eq!(m.char_fn(&[PI / 2.0]), 0.5, epsilon = 1e-15);
        assert_eq!(m.gamma().unwrap(), &[0.5]);
        assert_eq!(m.norming(2.25).unwrap(), 1.5);
        assert!(m.cf_nonneg());
    }

    #[test]
    fn simple_2d_char_fn_at_corner() {
        let m = WalkModel::build(ModelKind::Simple, 2).unwrap();
        assert_relative_eq!(m.char_fn(&[PI, PI]), -1.0, epsilon = 1e-15);
        assert!(!m.cf_nonneg());
    }

    #[test]
    fn lazy_empirical_char_fn() {
        // 10⁶ sampled steps against the closed form; SE ≤ 1/√n.
        let m = lazy1();
        let mut s = m.sampler(SeedStreams::new(11).stream(0, StreamTag::Walk(0)));
        let n = 1_000_000;
        let steps: Vec<i64> = (0..n).map(|_| s.next_step()).collect();
        for &l in &[0.5, 1.0, PI] {
            let emp = steps.iter().map(|&x| (l * x as f64).cos()).sum::<f64>() / n as f64;
            assert!((emp - m.char_fn(&[l])).abs() < 4.0 / (n as f64).sqrt());
        }
    }

    #[test]
    fn build_errors() {
        assert!(matches!("walk".parse::<ModelKind>(), Err(Error::UnknownModel(_))));
        assert!(matches!(WalkModel::from_name("stable:2.5", 1), Err(Error::AlphaOutOfRange(_))));
        assert!(matches!(WalkModel::from_name("stable:0", 1), Err(Error::AlphaOutOfRange(_))));
        assert!(matches!(WalkModel::from_name("stable:1.2", 2), Err(Error::UnsupportedDimension(..))));
        assert!(lazy1().norming(0.0).is_err());
        assert!(lazy1().norming(-1.0).is_err());
    }

    #[test]
    fn norming_ratios() {
        let g = lazy1();
        assert_relative_eq!(g.norming(4.0).unwrap() / g.norming(1.0).unwrap(), 2.0, epsilon = 1e-15);
        let s = WalkModel::from_name("stable:1", 1).unwrap();
        assert_relative_eq!(s.norming(8.0).unwrap() / s.norming(1.0).unwrap(), 8.0, epsilon = 1e-14);
    }

    #[test]
    fn model_invariants_hold_for_builtins() {
        let models = [
            WalkModel::from_name("lazy-simple", 1).unwrap(),
            WalkModel::from_name("lazy-simple", 2).unwrap(),
            WalkModel::from_name("lazy-simple", 3).unwrap(),
            WalkModel::from_name("simple", 1).unwrap(),
            WalkModel::from_name("simple", 3).unwrap(),
            WalkModel::from_name("stable:0.8", 1).unwrap(),
            WalkModel::from_name("stable:1.5", 1).unwrap(),
        ];
        let mut rng = SeedStreams::new(5).stream(0, StreamTag::Clock);
        for m in &models {
            let d = m.dim();
            if let Some(law) = m.finite_law() {
                // symmetric: every atom has its mirror with equal weight
                for a in &law.atoms {
                    assert!(law.atoms.iter().any(|b| b.key == -a.key && b.weight == a.weight));
                }
            }
            assert_relative_eq!(m.char_fn(&vec![0.0; d]), 1.0, epsilon = 1e-12);
            for _ in 0..100 {
                let lam: Vec<f64> = (0..d).map(|_| rng.random_range(-5.0..5.0)).collect();
                let r: f64 = rng.random_range(0.01..10.0);
                let phi = m.char_fn(&lam);
                assert!(phi.abs() <= 1.0 + 1e-12);
                let neg: Vec<f64> = lam.iter().map(|x| -x).collect();
                assert_relative_eq!(phi, m.char_fn(&neg), epsilon = 1e-12);
                let scaled: Vec<f64> = lam.iter().map(|x| r * x).collect();
                let lhs = m.psi(&scaled);
                let rhs = r.powf(m.alpha()) * m.psi(&lam);
                assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + m.psi(&lam)) * r.powf(m.alpha()).max(1.0));
            }
            if m.cf_nonneg() {
                let k = 64;
                let grid = |i: usize| -PI + 2.0 * PI * i as f64 / k as f64;
                let min = match d {
                    1 => (0..k).map(|i| m.char_fn(&[grid(i)])).fold(f64::INFINITY, f64::min),
                    2 => (0..k * k).map(|i| m.char_fn(&[grid(i / k), grid(i % k)])).fold(f64::INFINITY, f64::min),
                    _ => (0..k * k * k)
                        .map(|i| m.char_fn(&[grid(i / (k * k)), grid((i / k) % k), grid(i % k)]))
                        .fold(f64::INFINITY, f64::min),
                };
                assert!(min >= -1e-12, "min φ = {min}");
            }
        }
    }

    #[test]
    fn gaussian_psi_is_quadratic_form() {
        let m = WalkModel::from_name("lazy-simple", 2).unwrap();
        let l = [0.7, -1.3];
        assert_relative_eq!(m.psi(&l), 0.5 * 0.25 * (0.49 + 1.69), epsilon = 1e-15);
    }

    #[test]
    fn lazy_characteristic_exponent_limit() {
        let m = lazy1();
        let n = 1e6;
        for &l in &[0.5, 1.0, 2.0] {
            let lim = n * (1.0 - m.char_fn(&[l / m.norming(n).unwrap()]));
            let psi = m.psi(&[l]);
            assert!((lim - psi).abs() / psi < 0.01, "{l}: {lim} vs {psi}");
        }
    }

    #[test]
    fn stable_norming_matches_numeric_limit() {
        // t(1 − φ(λ/a(t))) → |λ|^α, checked at t = 10¹⁰
        for &alpha in &[0.6, 1.0, 1.4] {
            let m = WalkModel::build(ModelKind::Stable { alpha }, 1).unwrap();
            let t = 1e10;
            let a = m.norming(t).unwrap();
            let got = t * (1.0 - m.char_fn(&[1.0 / a]));
            assert!((got - 1.0).abs() < 5e-3, "alpha {alpha}: {got}");
        }
    }

    #[test]
    fn sample_path_basics() {
        let m = lazy1();
        let p = m.sample_path(0, 3);
        assert_eq!(p.positions, vec![0]);
        let a = m.sample_path(50, 9);
        assert_eq!(a, m.sample_path(50, 9));
        assert!(a.positions.windows(2).all(|w| (w[1] - w[0]).abs() <= 1));
        assert_eq!(a.site(0), vec![0]);
    }

    #[test]
    fn lazy_path_step_statistics() {
        let m = lazy1();
        let n = 1_000_000usize;
        let path = m.sample_path(n, 77);
        let incs: Vec<i64> = path.positions.windows(2).map(|w| w[1] - w[0]).collect();
        let mean = incs.iter().sum::<i64>() as f64 / n as f64;
        let sigma = 0.5f64.sqrt();
        assert!(mean.abs() <= 3.0 * sigma / (n as f64).sqrt());
        let p0 = incs.iter().filter(|&&x| x == 0).count() as f64 / n as f64;
        assert!((p0 - 0.5).abs() <= 3.0 * (0.25 / n as f64).sqrt());
    }

    #[test]
    fn criticality_guard() {
        assert!(check_criticality(1, 2.0, 1).is_ok());
        assert!(check_criticality(2, 2.0, 1).is_err());
        assert!(check_criticality(1, 1.0, 1).is_err());
        assert!(check_criticality(1, 1.0, 2).is_ok());
    }
}
