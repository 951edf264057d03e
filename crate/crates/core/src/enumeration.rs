//! Exact enumeration of local-time moments for tiny horizons.
//!
//! Every step sequence of each walk is enumerated and grouped by its
//! occupation measure, so the expensive part runs over tuples of distinct
//! measures rather than raw sequences. Probabilities are integer weights
//! over a common denominator and every moment is an exact rational.
//!
//! The inequality checks compare p-th roots of rationals. For p = 1 the
//! comparison is exact; otherwise each root is bracketed by integer
//! `nth_root` at 2^-128 resolution and a verdict is only issued when the
//! brackets separate (or coincide exactly).

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::WalkModel;
use crate::occupation::{autocorrelation, convolve_all, Sparse};

/// Cap on aggregated outcome tuples (product of distinct per-walk outcomes).
pub const DEFAULT_BUDGET: u128 = 100_000_000;

/// Cap on raw step sequences enumerated per walk.
const RAW_BUDGET: u128 = 100_000_000;

/// `a/b` with both parts printed, even when b = 1.
pub fn ratio_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn ser_ratio<S: Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&ratio_string(r))
}

fn ser_ratios<S: Serializer>(rs: &[BigRational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(rs.iter().map(ratio_string))
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// One walk outcome after grouping: a (possibly signed) occupation measure.
#[derive(Clone, Debug)]
struct Outcome {
    measure: Sparse<i64>,
    reflected: Sparse<i64>,
    nu: Sparse<i64>,
    weight: u128,
}

impl Outcome {
    fn new(measure: Sparse<i64>, weight: u128) -> Self {
        let reflected = measure.iter().rev().map(|&(k, v)| (-k, v)).collect();
        let nu = autocorrelation(&measure);
        Self { measure, reflected, nu, weight }
    }
}

/// Distribution of one walk's occupation measure, with its denominator.
struct WalkOutcomes {
    outcomes: Vec<Outcome>,
    denom: u128,
}

fn walk_outcomes(model: &WalkModel, n: usize) -> Result<WalkOutcomes> {
    let law = model.finite_law().ok_or(Error::InfiniteSupport)?;
    let atoms = &law.atoms;
    let raw = (atoms.len() as u128).checked_pow(n as u32).ok_or(Error::Overflow("raw outcome count"))?;
    if raw > RAW_BUDGET {
        return Err(Error::BudgetExceeded { outcomes: raw, budget: RAW_BUDGET });
    }
    let denom = u128::from(law.denom).checked_pow(n as u32).ok_or(Error::Overflow("denominator"))?;
    let mut groups: HashMap<Sparse<i64>, u128> = HashMap::new();
    let mut digits = vec![0usize; n];
    let mut positions = vec![0i64; n + 1];
    loop {
        let mut w: u128 = 1;
        for (k, &a) in digits.iter().enumerate() {
            positions[k + 1] = positions[k] + atoms[a].key;
            w *= u128::from(atoms[a].weight);
        }
        let mut sorted = positions.clone();
        sorted.sort_unstable();
        let mut measure: Sparse<i64> = Vec::new();
        for x in sorted {
            match measure.last_mut() {
                Some((k, c)) if *k == x => *c += 1,
                _ => measure.push((x, 1)),
            }
        }
        *groups.entry(measure).or_insert(0) += w;
        // odometer
        let mut i = 0;
        while i < n {
            digits[i] += 1;
            if digits[i] < atoms.len() {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
    }
    let mut list: Vec<(Sparse<i64>, u128)> = groups.into_iter().collect();
    list.sort();
    Ok(WalkOutcomes { outcomes: list.into_iter().map(|(m, w)| Outcome::new(m, w)).collect(), denom })
}

fn binomial(n: u64, k: u64) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    acc
}

/// Attaches independent ±1 weights to every time index: a site visited c
/// times carries c − 2j with multiplicity C(c, j).
fn signed_outcomes(base: &WalkOutcomes, n: usize) -> Result<WalkOutcomes> {
    let mut groups: HashMap<Sparse<i64>, u128> = HashMap::new();
    for o in &base.outcomes {
        let mut partial: Vec<(Sparse<i64>, u128)> = vec![(Vec::new(), o.weight)];
        for &(site, c) in &o.measure {
            let mut next = Vec::with_capacity(partial.len() * (c as usize + 1));
            for (m, w) in &partial {
                for j in 0..=c {
                    let v = c - 2 * j;
                    let mut m2 = m.clone();
                    if v != 0 {
                        m2.push((site, v));
                    }
                    next.push((m2, w * binomial(c as u64, j as u64)));
                }
            }
            partial = next;
            if partial.len() as u128 > RAW_BUDGET {
                return Err(Error::BudgetExceeded { outcomes: partial.len() as u128, budget: RAW_BUDGET });
            }
        }
        for (m, w) in partial {
            *groups.entry(m).or_insert(0) += w;
        }
    }
    let denom = base.denom.checked_mul(1u128 << (n + 1)).ok_or(Error::Overflow("denominator"))?;
    let mut list: Vec<(Sparse<i64>, u128)> = groups.into_iter().collect();
    list.sort();
    Ok(WalkOutcomes { outcomes: list.into_iter().map(|(m, w)| Outcome::new(m, w)).collect(), denom })
}

fn dot(a: &[(i64, i64)], b: &[(i64, i64)]) -> i64 {
    let (mut i, mut j, mut acc) = (0, 0, 0i64);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

fn lookup(m: &[(i64, i64)], key: i64) -> i64 {
    m.binary_search_by_key(&key, |&(k, _)| k).map(|i| m[i].1).unwrap_or(0)
}

/// Σ weight·value^k for k = 0..=kmax of the two statistics l(n,0) and Σl².
#[derive(Clone)]
struct PowerSums {
    l0: Vec<i128>,
    l2: Vec<i128>,
}

impl PowerSums {
    fn zero(kmax: usize) -> Self {
        Self { l0: vec![0; kmax + 1], l2: vec![0; kmax + 1] }
    }

    fn add(&mut self, w: u128, l0: i64, l2: i64) -> Result<()> {
        let ovf = || Error::Overflow("moment accumulator");
        let w = i128::try_from(w).map_err(|_| ovf())?;
        let (mut a, mut b) = (w, w);
        for k in 0..self.l0.len() {
            self.l0[k] = self.l0[k].checked_add(a).ok_or_else(ovf)?;
            self.l2[k] = self.l2[k].checked_add(b).ok_or_else(ovf)?;
            a = a.checked_mul(i128::from(l0)).ok_or_else(ovf)?;
            b = b.checked_mul(i128::from(l2)).ok_or_else(ovf)?;
        }
        Ok(())
    }

    fn merge(mut self, other: &PowerSums) -> Result<Self> {
        for k in 0..self.l0.len() {
            self.l0[k] = self.l0[k].checked_add(other.l0[k]).ok_or(Error::Overflow("moment accumulator"))?;
            self.l2[k] = self.l2[k].checked_add(other.l2[k]).ok_or(Error::Overflow("moment accumulator"))?;
        }
        Ok(self)
    }
}

fn tuple_count(k: usize, p: usize) -> u128 {
    (k as u128).checked_pow(p as u32).unwrap_or(u128::MAX)
}

/// Power sums over all p-tuples of outcomes, plus the total weight.
fn tuple_power_sums(w: &WalkOutcomes, p: usize, kmax: usize, budget: u128) -> Result<PowerSums> {
    let outs = &w.outcomes;
    let k = outs.len();
    let tuples = tuple_count(k, p);
    if tuples > budget {
        return Err(Error::BudgetExceeded { outcomes: tuples, budget });
    }
    match p {
        1 => {
            let mut acc = PowerSums::zero(kmax);
            for o in outs {
                acc.add(o.weight, lookup(&o.measure, 0), lookup(&o.nu, 0))?;
            }
            Ok(acc)
        }
        2 => {
            // unordered pairs, off-diagonal counted twice
            let parts: Vec<Result<PowerSums>> = (0..k)
                .into_par_iter()
                .map(|i| {
                    let mut acc = PowerSums::zero(kmax);
                    let a = &outs[i];
                    for (j, b) in outs.iter().enumerate().skip(i) {
                        let mult = if i == j { 1 } else { 2 };
                        let l0 = dot(&a.measure, &b.reflected);
                        let l2 = dot(&a.nu, &b.nu);
                        acc.add(mult * a.weight * b.weight, l0, l2)?;
                    }
                    Ok(acc)
                })
                .collect();
            parts.into_iter().try_fold(PowerSums::zero(kmax), |acc, part| acc.merge(&part?))
        }
        _ => {
            let parts: Vec<Result<PowerSums>> = (0..k)
                .into_par_iter()
                .map(|first| {
                    let mut acc = PowerSums::zero(kmax);
                    let mut idx = vec![0usize; p - 1];
                    loop {
                        let mut w = outs[first].weight;
                        let mut ms: Vec<&[(i64, i64)]> = vec![&outs[first].measure];
                        let mut nus: Vec<&[(i64, i64)]> = vec![&outs[first].nu];
                        for &i in &idx {
                            w *= outs[i].weight;
                            ms.push(&outs[i].measure);
                            nus.push(&outs[i].nu);
                        }
                        let field = convolve_all(&ms);
                        let nu_all = convolve_all(&nus);
                        acc.add(w, lookup(&field, 0), lookup(&nu_all, 0))?;
                        let mut t = 0;
                        while t < idx.len() {
                            idx[t] += 1;
                            if idx[t] < k {
                                break;
                            }
                            idx[t] = 0;
                            t += 1;
                        }
                        if t == idx.len() {
                            break;
                        }
                    }
                    Ok(acc)
                })
                .collect();
            parts.into_iter().try_fold(PowerSums::zero(kmax), |acc, part| acc.merge(&part?))
        }
    }
}

fn rational(num: i128, den: &BigInt) -> BigRational {
    BigRational::new(BigInt::from(num), den.clone())
}

/// Exact moments of l(n, 0), Σl² and Λ_n.
#[derive(Clone, Debug, Serialize)]
pub struct ExactReport {
    pub model: String,
    pub d: usize,
    pub p: usize,
    pub n: usize,
    pub m_max: usize,
    /// Distinct per-walk occupation measures after grouping.
    pub distinct_outcomes: usize,
    #[serde(serialize_with = "ser_ratio")]
    pub total_probability: BigRational,
    /// E l(n,0)^m for m = 0..=m_max.
    #[serde(serialize_with = "ser_ratios")]
    pub l0: Vec<BigRational>,
    /// E (Σl²)^m.
    #[serde(serialize_with = "ser_ratios")]
    pub l2sum: Vec<BigRational>,
    /// E Λ_n^m.
    #[serde(serialize_with = "ser_ratios")]
    pub lambda: Vec<BigRational>,
}

impl ExactReport {
    pub fn l0_f64(&self, m: usize) -> f64 {
        to_f64(&self.l0[m])
    }
    pub fn l2sum_f64(&self, m: usize) -> f64 {
        to_f64(&self.l2sum[m])
    }
}

/// Enumerates all p·n steps and returns exact moments up to order `m_max`.
pub fn enumerate_moments(model: &WalkModel, p: usize, n: usize, m_max: usize) -> Result<ExactReport> {
    enumerate_moments_with_budget(model, p, n, m_max, DEFAULT_BUDGET)
}

pub fn enumerate_moments_with_budget(
    model: &WalkModel,
    p: usize,
    n: usize,
    m_max: usize,
    budget: u128,
) -> Result<ExactReport> {
    if p == 0 {
        return Err(Error::InvalidParameter("p must be ≥ 1".into()));
    }
    let walks = walk_outcomes(model, n)?;
    let sums = tuple_power_sums(&walks, p, m_max, budget)?;
    let den = BigInt::from(walks.denom).pow(p as u32);
    let l0: Vec<BigRational> = sums.l0.iter().map(|&s| rational(s, &den)).collect();
    let l2sum: Vec<BigRational> = sums.l2.iter().map(|&s| rational(s, &den)).collect();
    // Λ = (Σl² − D)/2, D = (n+1)^p; expand E Λ^m binomially
    let diag = BigRational::from_integer(BigInt::from(n as u64 + 1).pow(p as u32));
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let lambda = (0..=m_max)
        .map(|m| {
            let mut acc = BigRational::zero();
            for j in 0..=m {
                let c = BigRational::from_integer(BigInt::from(binomial(m as u64, j as u64)));
                let sign = if (m - j) % 2 == 0 { BigRational::one() } else { -BigRational::one() };
                acc += c * sign * l2sum[j].clone() * num_traits::pow(diag.clone(), m - j);
            }
            acc * num_traits::pow(half.clone(), m)
        })
        .collect();
    Ok(ExactReport {
        model: model.kind().to_string(),
        d: model.dim(),
        p,
        n,
        m_max,
        distinct_outcomes: walks.outcomes.len(),
        total_probability: l0[0].clone(),
        l0,
        l2sum,
        lambda,
    })
}

/// Outcome of one inequality comparison `lhs ≤ rhs`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Holds,
    Violated,
    /// Brackets overlap at the working precision.
    Tight,
    /// Not evaluated: outside the enumeration budget.
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub check: String,
    pub m: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub split: Option<(usize, usize)>,
    /// Exact rational sides when no root is involved, else decimal.
    pub lhs: String,
    pub rhs: String,
    /// rhs − lhs.
    pub margin: f64,
    pub status: Status,
}

impl Verdict {
    pub fn holds(&self) -> bool {
        self.status == Status::Holds
    }
}

/// Closed interval bracketing a nonnegative real.
#[derive(Clone, Debug)]
struct Bracket {
    lo: BigRational,
    hi: BigRational,
}

impl Bracket {
    fn exact(x: BigRational) -> Self {
        Self { lo: x.clone(), hi: x }
    }
    fn add(&self, o: &Bracket) -> Bracket {
        Bracket { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi }
    }
    fn scale(&self, c: &BigRational) -> Bracket {
        Bracket { lo: &self.lo * c, hi: &self.hi * c }
    }
    fn mid(&self) -> f64 {
        0.5 * (to_f64(&self.lo) + to_f64(&self.hi))
    }
}

const ROOT_BITS: usize = 128;

/// x^{1/p} for rational x ≥ 0, bracketed at 2^-128 resolution.
fn root_bracket(x: &BigRational, p: usize) -> Bracket {
    if p == 1 {
        return Bracket::exact(x.clone());
    }
    let scale = BigInt::one() << ROOT_BITS;
    let scaled = x * BigRational::from_integer(num_traits::pow(scale.clone(), p));
    let y: BigUint = scaled.floor().to_integer().to_biguint().expect("nonnegative");
    let r = y.nth_root(p as u32);
    let exact = scaled.is_integer() && num_traits::pow(r.clone(), p) == y;
    let lo = BigRational::new(BigInt::from(r.clone()), scale.clone());
    let hi = if exact { lo.clone() } else { BigRational::new(BigInt::from(r + 1u32), scale) };
    Bracket { lo, hi }
}

fn compare(check: &str, m: usize, split: Option<(usize, usize)>, lhs: Bracket, rhs: Bracket, exact: bool) -> Verdict {
    let status = if lhs.hi <= rhs.lo {
        Status::Holds
    } else if lhs.lo > rhs.hi {
        Status::Violated
    } else {
        Status::Tight
    };
    let show = |b: &Bracket| if exact { ratio_string(&b.lo) } else { format!("{:.17e}", b.mid()) };
    Verdict {
        check: check.to_string(),
        m,
        split,
        lhs: show(&lhs),
        rhs: show(&rhs),
        margin: rhs.mid() - lhs.mid(),
        status,
    }
}

fn factorial(m: usize) -> BigInt {
    (1..=m as u64).fold(BigInt::one(), |a, k| a * BigInt::from(k))
}

fn require_nonneg(model: &WalkModel) -> Result<()> {
    if model.cf_nonneg() {
        Ok(())
    } else {
        Err(Error::NotNonnegative)
    }
}

/// E l^m ≤ (m!)^p (E l)^m and E(Σl²)^m ≤ (m!)^{2p} (EΣl²)^m for m ≤ m_max.
pub fn check_moment_bounds(model: &WalkModel, p: usize, n: usize, m_max: usize) -> Result<Vec<Verdict>> {
    require_nonneg(model)?;
    let r = enumerate_moments(model, p, n, m_max)?;
    Ok(moment_bound_verdicts(&r))
}

fn moment_bound_verdicts(r: &ExactReport) -> Vec<Verdict> {
    let mut out = Vec::new();
    for m in 1..=r.m_max {
        let f = factorial(m);
        let c1 = BigRational::from_integer(num_traits::pow(f.clone(), r.p));
        let rhs = c1 * num_traits::pow(r.l0[1].clone(), m);
        out.push(compare("l41_l0", m, None, Bracket::exact(r.l0[m].clone()), Bracket::exact(rhs), true));
        let c2 = BigRational::from_integer(num_traits::pow(f, 2 * r.p));
        let rhs = c2 * num_traits::pow(r.l2sum[1].clone(), m);
        out.push(compare("l41_l2", m, None, Bracket::exact(r.l2sum[m].clone()), Bracket::exact(rhs), true));
    }
    out
}

fn binom_big(m: usize, k: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(binomial(m as u64, k as u64)))
}

/// [E l(n₁+n₂+1, 0)^m]^{1/p} ≤ Σ_k C(m,k) [E l(n₁,0)^k]^{1/p} [E l(n₂,0)^{m−k}]^{1/p}
/// for m = 0..=m_max, with blocks {0..n₁} and {n₁+1..n₁+n₂+1}.
pub fn check_block_submult(model: &WalkModel, p: usize, n1: usize, n2: usize, m_max: usize) -> Result<Vec<Verdict>> {
    require_nonneg(model)?;
    let whole = enumerate_moments(model, p, n1 + n2 + 1, m_max)?;
    let a = enumerate_moments(model, p, n1, m_max)?;
    let b = enumerate_moments(model, p, n2, m_max)?;
    let mut out = Vec::new();
    for m in 0..=m_max {
        let lhs = root_bracket(&whole.l0[m], p);
        let mut rhs = Bracket::exact(BigRational::zero());
        for k in 0..=m {
            let prod = &a.l0[k] * &b.l0[m - k];
            rhs = rhs.add(&root_bracket(&prod, p).scale(&binom_big(m, k)));
        }
        out.push(compare("l42", m, Some((n1, n2)), lhs, rhs, p == 1));
    }
    Ok(out)
}

/// Moments E ξ(n,0)^k, k = 0..=kmax, by enumerating steps and signs.
fn xi_moments(model: &WalkModel, p: usize, n: usize, kmax: usize) -> Result<Vec<BigRational>> {
    let base = walk_outcomes(model, n)?;
    let signed = signed_outcomes(&base, n)?;
    let sums = tuple_power_sums(&signed, p, kmax, DEFAULT_BUDGET)?;
    let den = BigInt::from(signed.denom).pow(p as u32);
    Ok(sums.l0.iter().map(|&s| rational(s, &den)).collect())
}

/// E (ε₁ + … + ε_c)^{2j} for Rademacher ε, j = 1, 2, 3.
fn rademacher_even(c: i128) -> [i128; 3] {
    [c, 3 * c * c - 2 * c, 15 * c * c * c - 30 * c * c + 16 * c]
}

/// E (Σ_y Z_y)^{2j}, j = 1, 2, 3, for independent symmetric Z_y with even
/// moments `a[y] = [EZ², EZ⁴, EZ⁶]`.
fn independent_even(a: &[[i128; 3]]) -> [i128; 3] {
    let s = |f: &dyn Fn(&[i128; 3]) -> i128| a.iter().map(f).sum::<i128>();
    let p1 = s(&|x| x[0]);
    let p2 = s(&|x| x[0] * x[0]);
    let p3 = s(&|x| x[0] * x[0] * x[0]);
    let q4 = s(&|x| x[1]);
    let q6 = s(&|x| x[2]);
    let q42 = s(&|x| x[1] * x[0]);
    [p1, q4 + 3 * (p1 * p1 - p2), q6 + 15 * (q4 * p1 - q42) + 15 * (p1 * p1 * p1 - 3 * p1 * p2 + 2 * p3)]
}

/// Even moments E ξ(n,0)^{2j}, j = 0..=3, for p ≤ 2 by conditioning on the
/// unsigned occupation measures. Given μ₁, μ₂ the sum ξ(n,0) = Σ_y X_y Y_{−y}
/// has independent symmetric summands, X_y a sum of μ₁(y) signs.
fn xi_even_conditional(model: &WalkModel, p: usize, n: usize) -> Result<Vec<BigRational>> {
    let base = walk_outcomes(model, n)?;
    let outs = &base.outcomes;
    let k = outs.len();
    let tuples = tuple_count(k, p);
    if tuples > DEFAULT_BUDGET {
        return Err(Error::BudgetExceeded { outcomes: tuples, budget: DEFAULT_BUDGET });
    }
    let ovf = || Error::Overflow("moment accumulator");
    let mut acc = [0i128; 4];
    let push = |acc: &mut [i128; 4], w: u128, m: [i128; 3]| -> Result<()> {
        let w = i128::try_from(w).map_err(|_| ovf())?;
        acc[0] = acc[0].checked_add(w).ok_or_else(ovf)?;
        for j in 0..3 {
            acc[j + 1] = acc[j + 1].checked_add(w.checked_mul(m[j]).ok_or_else(ovf)?).ok_or_else(ovf)?;
        }
        Ok(())
    };
    match p {
        1 => {
            for o in outs {
                push(&mut acc, o.weight, rademacher_even(i128::from(lookup(&o.measure, 0))))?;
            }
        }
        2 => {
            let parts: Vec<Result<[i128; 4]>> = (0..k)
                .into_par_iter()
                .map(|i| {
                    let mut part = [0i128; 4];
                    let a = &outs[i];
                    let mut sites = Vec::new();
                    for (j, b) in outs.iter().enumerate().skip(i) {
                        sites.clear();
                        let (mut x, mut y) = (0, 0);
                        while x < a.measure.len() && y < b.reflected.len() {
                            match a.measure[x].0.cmp(&b.reflected[y].0) {
                                std::cmp::Ordering::Less => x += 1,
                                std::cmp::Ordering::Greater => y += 1,
                                std::cmp::Ordering::Equal => {
                                    let ra = rademacher_even(i128::from(a.measure[x].1));
                                    let rb = rademacher_even(i128::from(b.reflected[y].1));
                                    sites.push([ra[0] * rb[0], ra[1] * rb[1], ra[2] * rb[2]]);
                                    x += 1;
                                    y += 1;
                                }
                            }
                        }
                        let mult = if i == j { 1 } else { 2 };
                        push(&mut part, mult * a.weight * b.weight, independent_even(&sites))?;
                    }
                    Ok(part)
                })
                .collect();
            for part in parts {
                let part = part?;
                for j in 0..4 {
                    acc[j] = acc[j].checked_add(part[j]).ok_or_else(ovf)?;
                }
            }
        }
        _ => return Err(Error::InvalidParameter("conditional ξ moments need p ≤ 2".into())),
    }
    let den = BigInt::from(base.denom).pow(p as u32);
    Ok(acc.iter().map(|&s| rational(s, &den)).collect())
}

/// Even moments E ξ^{2j}, j = 0..=m_max, by the cheapest exact route.
fn xi_even_moments(model: &WalkModel, p: usize, n: usize, m_max: usize) -> Result<Vec<BigRational>> {
    if p <= 2 && m_max <= 3 {
        let mut v = xi_even_conditional(model, p, n)?;
        v.truncate(m_max + 1);
        return Ok(v);
    }
    let all = xi_moments(model, p, n, 2 * m_max)?;
    Ok(all.into_iter().step_by(2).collect())
}

/// Odd moments E ξ^{2m−1}(n, 0) = 0 at horizon n, and for every split
/// n = n₁ + n₂ + 1 the bound
/// [E ξ^{2m}(n,0)]^{1/p} ≤ Σ_k C(2m,2k) [E ξ^{2k}(n₁,0)]^{1/p} [E ξ^{2m−2k}(n₂,0)]^{1/p}.
///
/// Odd moments need the full sign enumeration and are skipped (with a
/// `budget` verdict) when it does not fit; even moments always fit for p ≤ 2.
pub fn check_sign_weighted(model: &WalkModel, p: usize, n: usize, m_max: usize) -> Result<Vec<Verdict>> {
    require_nonneg(model)?;
    let mut out = Vec::new();
    match xi_moments(model, p, n, 2 * m_max - 1) {
        Ok(all) => {
            for m in 1..=m_max {
                let odd = &all[2 * m - 1];
                let status = if odd.is_zero() { Status::Holds } else { Status::Violated };
                out.push(Verdict {
                    check: "l44_odd".into(),
                    m,
                    split: None,
                    lhs: ratio_string(odd),
                    rhs: "0/1".into(),
                    margin: -to_f64(odd).abs(),
                    status,
                });
            }
        }
        Err(Error::BudgetExceeded { .. }) => {
            for m in 1..=m_max {
                out.push(Verdict {
                    check: "l44_odd".into(),
                    m,
                    split: None,
                    lhs: "budget".into(),
                    rhs: "0/1".into(),
                    margin: f64::NAN,
                    status: Status::Skipped,
                });
            }
        }
        Err(e) => return Err(e),
    }
    let whole = xi_even_moments(model, p, n, m_max)?;
    let mut cache: HashMap<usize, Vec<BigRational>> = HashMap::new();
    for n1 in 0..n {
        let n2 = n - 1 - n1;
        for h in [n1, n2] {
            if let std::collections::hash_map::Entry::Vacant(e) = cache.entry(h) {
                e.insert(xi_even_moments(model, p, h, m_max)?);
            }
        }
        let (a, b) = (&cache[&n1], &cache[&n2]);
        for m in 1..=m_max {
            let lhs = root_bracket(&whole[m], p);
            let mut rhs = Bracket::exact(BigRational::zero());
            for k in 0..=m {
                let prod = &a[k] * &b[m - k];
                rhs = rhs.add(&root_bracket(&prod, p).scale(&binom_big(2 * m, 2 * k)));
            }
            out.push(compare("l44_submult", m, Some((n1, n2)), lhs, rhs, p == 1));
        }
    }
    Ok(out)
}
