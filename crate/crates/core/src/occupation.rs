//! Occupation measures, additive local times and self-intersection counts.
//!
//! For p independent paths S₁, …, S_p over times 0..=n the additive local
//! time is
//!
//! ```text
//! l(n, x) = #{(k₁, …, k_p) ∈ {0..n}^p : S₁(k₁) + … + S_p(k_p) = x}
//! ```
//!
//! which is the p-fold convolution of the per-path occupation measures.
//! Σₓ l² = 2Λ_n + (n+1)^p where Λ_n counts unordered pairs of distinct index
//! tuples landing on the same site.

use std::collections::HashMap;
use std::ops::{Add, Mul};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::model::PathSample;

/// Sparse measure: `(packed site, mass)` sorted by site, no zero entries.
pub type Sparse<W> = Vec<(i64, W)>;

/// Visit counts of one path over times 0..=n.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OccupationMeasure {
    n: usize,
    counts: Sparse<u64>,
}

impl OccupationMeasure {
    /// Counts visits of `positions` (packed sites S(0), …, S(n)).
    pub fn from_positions(positions: &[i64]) -> Self {
        assert!(!positions.is_empty(), "a path has at least S(0)");
        let n = positions.len() - 1;
        let (lo, hi) = positions.iter().fold((i64::MAX, i64::MIN), |(l, h), &x| (l.min(x), h.max(x)));
        let span = (hi as i128 - lo as i128 + 1) as u128;
        let counts = if span <= 4 * positions.len() as u128 + 64 {
            let mut dense = vec![0u64; span as usize];
            for &x in positions {
                dense[(x - lo) as usize] += 1;
            }
            dense
                .into_iter()
                .enumerate()
                .filter(|&(_, c)| c > 0)
                .map(|(i, c)| (lo + i as i64, c))
                .collect()
        } else {
            let mut sorted = positions.to_vec();
            sorted.sort_unstable();
            let mut out: Sparse<u64> = Vec::new();
            for x in sorted {
                match out.last_mut() {
                    Some((k, c)) if *k == x => *c += 1,
                    _ => out.push((x, 1)),
                }
            }
            out
        };
        Self { n, counts }
    }

    pub fn of(path: &PathSample) -> Self {
        Self::from_positions(&path.positions)
    }

    pub fn horizon(&self) -> usize {
        self.n
    }

    pub fn counts(&self) -> &[(i64, u64)] {
        &self.counts
    }

    pub fn get(&self, site: i64) -> u64 {
        self.counts
            .binary_search_by_key(&site, |&(k, _)| k)
            .map(|i| self.counts[i].1)
            .unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&(_, c)| c).sum()
    }

    pub fn support_len(&self) -> usize {
        self.counts.len()
    }

    /// Counts widened to `u128`.
    pub fn wide(&self) -> Sparse<u128> {
        self.counts.iter().map(|&(k, c)| (k, u128::from(c))).collect()
    }
}

/// Sparse convolution `(a * b)(x) = Σ_y a(y) b(x − y)`.
///
/// Uses a dense accumulator when the key span is comparable to the work,
/// otherwise a hash map. Output is sorted by key with zero entries removed.
pub fn convolve<W>(a: &[(i64, W)], b: &[(i64, W)]) -> Sparse<W>
where
    W: Copy + Zero + Add<Output = W> + Mul<Output = W> + PartialEq,
{
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let lo = a[0].0 + b[0].0;
    let hi = a[a.len() - 1].0 + b[b.len() - 1].0;
    let span = (hi as i128 - lo as i128 + 1) as u128;
    let work = (a.len() * b.len()) as u128;
    if span <= (4 * work).max(1 << 12) && span <= 1 << 26 {
        let mut dense = vec![W::zero(); span as usize];
        for &(ka, va) in a {
            let base = (ka + b[0].0 - lo) as usize;
            let b0 = b[0].0;
            for &(kb, vb) in b {
                let slot = &mut dense[base + (kb - b0) as usize];
                *slot = *slot + va * vb;
            }
        }
        dense
            .into_iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(i, v)| (lo + i as i64, v))
            .collect()
    } else {
        let mut acc: HashMap<i64, W> = HashMap::with_capacity(a.len().max(b.len()) * 4);
        for &(ka, va) in a {
            for &(kb, vb) in b {
                let e = acc.entry(ka + kb).or_insert_with(W::zero);
                *e = *e + va * vb;
            }
        }
        let mut out: Sparse<W> = acc.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        out.sort_unstable_by_key(|&(k, _)| k);
        out
    }
}

/// `ν(y) = Σ_z μ(z) μ(z + y)`, the autocorrelation of a sparse measure.
pub fn autocorrelation<W>(m: &[(i64, W)]) -> Sparse<W>
where
    W: Copy + Zero + Add<Output = W> + Mul<Output = W> + PartialEq,
{
    let reflected: Sparse<W> = m.iter().rev().map(|&(k, v)| (-k, v)).collect();
    convolve(&reflected, m)
}

/// p-fold convolution, smallest supports first.
pub fn convolve_all<W>(measures: &[&[(i64, W)]]) -> Sparse<W>
where
    W: Copy + Zero + One + Add<Output = W> + Mul<Output = W> + PartialEq,
{
    let mut order: Vec<&[(i64, W)]> = measures.to_vec();
    order.sort_by_key(|m| m.len());
    let mut iter = order.into_iter();
    let mut acc: Sparse<W> = match iter.next() {
        Some(first) => first.to_vec(),
        None => return vec![(0, W::one())],
    };
    for m in iter {
        acc = convolve(&acc, m);
    }
    acc
}

fn lookup<W: Copy + Zero>(m: &[(i64, W)], key: i64) -> W {
    m.binary_search_by_key(&key, |&(k, _)| k).map(|i| m[i].1).unwrap_or_else(|_| W::zero())
}

/// Local time field of p paths: l(n, ·) with its scalar summaries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalTimeField {
    pub n: usize,
    pub p: usize,
    pub values: Sparse<u64>,
    pub l0: u64,
    pub l2sum: u128,
    pub lambda: u128,
}

impl LocalTimeField {
    pub fn get(&self, site: i64) -> u64 {
        lookup(&self.values, site)
    }

    pub fn mass(&self) -> u128 {
        self.values.iter().map(|&(_, v)| u128::from(v)).sum()
    }
}

/// `(n+1)^p`, the number of index tuples; must fit in `u64`.
pub fn diagonal_count(n: usize, p: usize) -> Result<u128> {
    let mut acc: u64 = 1;
    for _ in 0..p {
        acc = acc.checked_mul(n as u64 + 1).ok_or(Error::Overflow("(n+1)^p"))?;
    }
    Ok(u128::from(acc))
}

fn common_horizon(measures: &[OccupationMeasure]) -> Result<usize> {
    let first = measures
        .first()
        .ok_or_else(|| Error::InvalidParameter("need at least one occupation measure".into()))?;
    for m in &measures[1..] {
        if m.n != first.n {
            return Err(Error::HorizonMismatch(first.n, m.n));
        }
    }
    Ok(first.n)
}

/// Λ_n = (Σl² − (n+1)^p)/2.
pub fn lambda_from(l2sum: u128, n: usize, p: usize) -> Result<u128> {
    let diagonal = diagonal_count(n, p)?;
    if l2sum < diagonal || (l2sum - diagonal) % 2 != 0 {
        return Err(Error::Parity { l2sum, diagonal });
    }
    Ok((l2sum - diagonal) / 2)
}

/// Builds l(n, ·) as the convolution μ₁ * … * μ_p.
pub fn local_time_field(measures: &[OccupationMeasure]) -> Result<LocalTimeField> {
    let n = common_horizon(measures)?;
    let p = measures.len();
    diagonal_count(n, p)?;
    let wide: Vec<Sparse<u128>> = measures.iter().map(OccupationMeasure::wide).collect();
    let refs: Vec<&[(i64, u128)]> = wide.iter().map(|m| m.as_slice()).collect();
    let full = convolve_all(&refs);
    let mut values = Vec::with_capacity(full.len());
    let mut l2sum: u128 = 0;
    for (k, v) in full {
        l2sum = l2sum.checked_add(v.checked_mul(v).ok_or(Error::Overflow("l²"))?).ok_or(Error::Overflow("Σl²"))?;
        values.push((k, u64::try_from(v).map_err(|_| Error::Overflow("l(n,x)"))?));
    }
    let l0 = lookup(&values, 0);
    let lambda = lambda_from(l2sum, n, p)?;
    Ok(LocalTimeField { n, p, values, l0, l2sum, lambda })
}

/// Σₓ l² as (ν₁ * … * ν_p)(0) with νⱼ the autocorrelation of μⱼ.
pub fn l2_via_autocorrelation(measures: &[OccupationMeasure]) -> Result<u128> {
    let n = common_horizon(measures)?;
    diagonal_count(n, measures.len())?;
    let nus: Vec<Sparse<u128>> = measures.iter().map(|m| autocorrelation(&m.wide())).collect();
    Ok(evaluate_at_zero(&nus))
}

/// (m₁ * … * m_p)(0), convolving all but the largest measure and pairing
/// the result with the reflection of the last one.
pub fn evaluate_at_zero<W>(measures: &[Sparse<W>]) -> W
where
    W: Copy + Zero + Add<Output = W> + Mul<Output = W> + PartialEq + One,
{
    match measures.len() {
        0 => W::one(),
        1 => lookup(&measures[0], 0),
        _ => {
            let mut order: Vec<&[(i64, W)]> = measures.iter().map(|m| m.as_slice()).collect();
            order.sort_by_key(|m| m.len());
            let last = order.pop().unwrap();
            let head = convolve_all(&order);
            let mut total = W::zero();
            for &(k, v) in &head {
                let w = lookup(last, -k);
                if !w.is_zero() {
                    total = total + v * w;
                }
            }
            total
        }
    }
}

/// l(n, 0) and Σl² without materialising the field.
pub fn local_time_scalars(measures: &[OccupationMeasure]) -> Result<(u64, u128)> {
    let n = common_horizon(measures)?;
    diagonal_count(n, measures.len())?;
    let wide: Vec<Sparse<u128>> = measures.iter().map(OccupationMeasure::wide).collect();
    let l0 = u64::try_from(evaluate_at_zero(&wide)).map_err(|_| Error::Overflow("l(n,0)"))?;
    let l2 = l2_via_autocorrelation(measures)?;
    Ok((l0, l2))
}

/// Λ_n of an existing field, re-derived from its Σl².
pub fn lambda_n(field: &LocalTimeField) -> Result<u128> {
    lambda_from(field.l2sum, field.n, field.p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice;
    use crate::model::WalkModel;
    use crate::rng::{SeedStreams, StreamTag};
    use proptest::prelude::*;

    fn occ(path: &[i64]) -> OccupationMeasure {
        OccupationMeasure::from_positions(path)
    }

    /// Direct O((n+1)^p) count of l(n, x), p ≤ 2.
    fn brute_force(paths: &[Vec<i64>]) -> HashMap<i64, u64> {
        let mut out = HashMap::new();
        match paths.len() {
            1 => {
                for &x in &paths[0] {
                    *out.entry(x).or_insert(0) += 1;
                }
            }
            2 => {
                for &x in &paths[0] {
                    for &y in &paths[1] {
                        *out.entry(x + y).or_insert(0) += 1;
                    }
                }
            }
            _ => unreachable!(),
        }
        out
    }

    fn random_paths(d: usize, p: usize, n: usize, seed: u64) -> Vec<Vec<i64>> {
        let model = WalkModel::from_name("lazy-simple", d).unwrap();
        let streams = SeedStreams::new(seed);
        (0..p).map(|j| model.sample_path_with(n, streams.stream(0, StreamTag::Walk(j as u8)))).collect()
    }

    #[test]
    fn occupation_examples() {
        assert_eq!(occ(&[0]).counts(), &[(0, 1)]);
        assert_eq!(occ(&[0, 1, 0]).counts(), &[(0, 2), (1, 1)]);
        let model = WalkModel::from_name("lazy-simple", 1).unwrap();
        let path = model.sample_path(10_000, 1);
        assert_eq!(OccupationMeasure::of(&path).total(), 10_001);
    }

    #[test]
    fn sparse_branch_for_packed_keys() {
        let lat = Lattice::new(2).unwrap();
        let keys = [lat.pack(&[0, 0]).unwrap(), lat.pack(&[0, 1]).unwrap(), lat.pack(&[0, 0]).unwrap()];
        let m = occ(&keys);
        assert_eq!(m.counts(), &[(0, 2), (lat.pack(&[0, 1]).unwrap(), 1)]);
    }

    #[test]
    fn field_examples() {
        let f = local_time_field(&[occ(&[0, 1])]).unwrap();
        assert_eq!((f.get(0), f.get(1), f.l2sum, f.lambda), (1, 1, 2, 0));
        let held = local_time_field(&[occ(&[0, 0]), occ(&[0, 0])]).unwrap();
        assert_eq!((held.l0, held.l2sum, held.lambda), (4, 16, 6));
        let trivial = local_time_field(&[occ(&[0]), occ(&[0])]).unwrap();
        assert_eq!(trivial.l0, 1);
        assert_eq!(l2_via_autocorrelation(&[occ(&[0, 1])]).unwrap(), 2);
        assert_eq!(l2_via_autocorrelation(&[occ(&[0]), occ(&[0]), occ(&[0])]).unwrap(), 1);
        assert_eq!(lambda_n(&held).unwrap(), 6);
    }

    #[test]
    fn lambda_by_direct_pair_enumeration() {
        for seed in 0..10 {
            let paths = random_paths(1, 2, 6, seed);
            let tuples: Vec<i64> = paths[0].iter().flat_map(|&x| paths[1].iter().map(move |&y| x + y)).collect();
            let mut pairs = 0u128;
            for i in 0..tuples.len() {
                for j in i + 1..tuples.len() {
                    pairs += u128::from(tuples[i] == tuples[j]);
                }
            }
            let ms: Vec<_> = paths.iter().map(|p| occ(p)).collect();
            assert_eq!(local_time_field(&ms).unwrap().lambda, pairs);
        }
    }

    #[test]
    fn mismatched_horizons() {
        assert!(matches!(local_time_field(&[occ(&[0]), occ(&[0, 1])]), Err(Error::HorizonMismatch(0, 1))));
    }

    #[test]
    fn parity_violation_is_reported() {
        assert!(matches!(lambda_from(3, 1, 1), Err(Error::Parity { .. })));
        assert!(matches!(lambda_from(1, 1, 1), Err(Error::Parity { .. })));
    }

    #[test]
    fn p2_routes_agree_at_n100() {
        for seed in 0..20 {
            let paths = random_paths(1, 2, 100, seed);
            let ms: Vec<_> = paths.iter().map(|p| occ(p)).collect();
            let f = local_time_field(&ms).unwrap();
            assert_eq!(f.l2sum, l2_via_autocorrelation(&ms).unwrap());
            assert_eq!(local_time_scalars(&ms).unwrap(), (f.l0, f.l2sum));
        }
    }

    #[test]
    fn weighted_convolution_conserves_mass() {
        let a = vec![(-1i64, 0.5f64), (2, 1.5)];
        let b = vec![(0i64, 2.0f64), (3, 0.25)];
        let c = convolve(&a, &b);
        let mass: f64 = c.iter().map(|x| x.1).sum();
        assert!((mass - 2.0 * 2.25).abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn routes_and_mass_agree(d in 1usize..=2, p in 1usize..=3, n in 0usize..=200, seed in any::<u64>()) {
            let paths = random_paths(d, p, n, seed);
            let ms: Vec<_> = paths.iter().map(|x| occ(x)).collect();
            for m in &ms {
                prop_assert_eq!(m.total(), n as u64 + 1);
                prop_assert!(m.counts().iter().all(|&(_, c)| c >= 1));
            }
            let f = local_time_field(&ms).unwrap();
            prop_assert_eq!(f.mass(), diagonal_count(n, p).unwrap());
            prop_assert_eq!(f.l2sum, 2 * f.lambda + diagonal_count(n, p).unwrap());
            prop_assert_eq!(f.l2sum, l2_via_autocorrelation(&ms).unwrap());
        }

        #[test]
        fn matches_brute_force(d in 1usize..=2, p in 1usize..=2, n in 0usize..=12, seed in any::<u64>()) {
            let paths = random_paths(d, p, n, seed);
            let ms: Vec<_> = paths.iter().map(|x| occ(x)).collect();
            let f = local_time_field(&ms).unwrap();
            let bf = brute_force(&paths);
            prop_assert_eq!(bf.len(), f.values.len());
            for (k, v) in bf {
                prop_assert_eq!(f.get(k), v);
            }
        }
    }
}
