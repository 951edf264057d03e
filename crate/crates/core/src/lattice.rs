//! Packing of ℤ^d sites into single `i64` keys.
//!
//! Keys are balanced base-B expansions `x₀ + x₁·B + x₂·B²`, so packing is
//! additive: `pack(x) + pack(y) == pack(x + y)` and `-pack(x) == pack(-x)`
//! as long as every coordinate stays inside `±B/2`. Sparse measures and
//! their convolutions therefore work directly on keys.

use crate::error::{Error, Result};

/// Packing scheme for one dimension `d ∈ {1, 2, 3}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Lattice {
    d: usize,
    base: i64,
}

impl Lattice {
    pub fn new(d: usize) -> Result<Self> {
        let base = match d {
            1 => 0,
            2 => 1i64 << 31,
            3 => 1i64 << 21,
            _ => return Err(Error::DimensionOutOfRange(d)),
        };
        Ok(Self { d, base })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Largest admissible absolute coordinate.
    pub fn coord_limit(&self) -> i64 {
        if self.d == 1 {
            i64::MAX / 4
        } else {
            self.base / 2 - 1
        }
    }

    pub fn pack(&self, x: &[i64]) -> Result<i64> {
        debug_assert_eq!(x.len(), self.d);
        let lim = self.coord_limit();
        if let Some(&bad) = x.iter().find(|c| c.abs() > lim) {
            return Err(Error::PackingRange(bad, lim));
        }
        Ok(self.pack_unchecked(x))
    }

    #[inline]
    pub fn pack_unchecked(&self, x: &[i64]) -> i64 {
        if self.d == 1 {
            return x[0];
        }
        x.iter().rev().fold(0i64, |acc, &c| acc * self.base + c)
    }

    pub fn unpack(&self, key: i64) -> Vec<i64> {
        if self.d == 1 {
            return vec![key];
        }
        let half = self.base / 2;
        let mut rest = key;
        let mut out = Vec::with_capacity(self.d);
        for _ in 0..self.d {
            let r = (rest + half).rem_euclid(self.base) - half;
            out.push(r);
            rest = (rest - r) / self.base;
        }
        out
    }

    /// Unit vector along axis `i` with sign `s`.
    pub fn unit(&self, axis: usize, s: i64) -> i64 {
        let mut x = vec![0i64; self.d];
        x[axis] = s;
        self.pack_unchecked(&x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn packing_is_additive(d in 1usize..=3, a in prop::collection::vec(-400_000i64..400_000, 3),
                               b in prop::collection::vec(-400_000i64..400_000, 3)) {
            let lat = Lattice::new(d).unwrap();
            let (a, b) = (&a[..d], &b[..d]);
            let sum: Vec<i64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
            let ka = lat.pack(a).unwrap();
            let kb = lat.pack(b).unwrap();
            prop_assert_eq!(ka + kb, lat.pack(&sum).unwrap());
            prop_assert_eq!(lat.unpack(ka), a.to_vec());
            prop_assert_eq!(-ka, lat.pack(&a.iter().map(|c| -c).collect::<Vec<_>>()).unwrap());
        }
    }

    #[test]
    fn rejects_out_of_range() {
        let lat = Lattice::new(3).unwrap();
        assert!(lat.pack(&[0, 1 << 21, 0]).is_err());
        assert!(Lattice::new(4).is_err());
    }
}
