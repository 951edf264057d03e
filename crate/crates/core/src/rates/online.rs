//! Path tuples extended one step at a time.

use std::collections::HashMap;

use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::model::{StepSampler, WalkModel};
use crate::occupation::{evaluate_at_zero, l2_via_autocorrelation, OccupationMeasure};
use crate::rng::{SeedStreams, StreamTag};

/// One walk with hashed visit counts.
struct OnlineWalk<'a> {
    pos: i64,
    counts: HashMap<i64, u64>,
    sampler: StepSampler<'a, ChaCha8Rng>,
    history: Option<Vec<i64>>,
}

impl<'a> OnlineWalk<'a> {
    fn new(model: &'a WalkModel, streams: &SeedStreams, replica: u64, j: usize, keep: bool) -> Self {
        let mut counts = HashMap::new();
        counts.insert(0, 1);
        Self {
            pos: 0,
            counts,
            sampler: model.sampler(streams.stream(replica, StreamTag::Walk(j as u8))),
            history: keep.then(|| vec![0]),
        }
    }

    fn count(&self, x: i64) -> u64 {
        self.counts.get(&x).copied().unwrap_or(0)
    }

    /// Advances one step; returns the visit count at the new site before the visit.
    fn step(&mut self) -> u64 {
        self.pos += self.sampler.next_step();
        if let Some(h) = self.history.as_mut() {
            h.push(self.pos);
        }
        let c = self.counts.entry(self.pos).or_insert(0);
        let before = *c;
        *c += 1;
        before
    }

    fn measure(&self) -> OccupationMeasure {
        OccupationMeasure::from_positions(self.history.as_ref().expect("history kept"))
    }
}

/// p walks advanced in lockstep, with the same streams as
/// [`crate::simulate::replica_path`].
///
/// l(n, 0) is maintained in O(1) per step for p ≤ 2 and Σl² for p = 1;
/// anything else is recomputed from the stored prefix on request.
pub(crate) struct OnlineTuple<'a> {
    p: usize,
    n: usize,
    walks: Vec<OnlineWalk<'a>>,
    l0: u64,
    l2: u128,
}

impl<'a> OnlineTuple<'a> {
    pub fn new(model: &'a WalkModel, p: usize, streams: &SeedStreams, replica: u64) -> Self {
        let keep = p >= 2;
        let walks = (0..p).map(|j| OnlineWalk::new(model, streams, replica, j, keep)).collect();
        Self { p, n: 0, walks, l0: 1, l2: 1 }
    }

    pub fn advance(&mut self) {
        self.n += 1;
        match self.p {
            1 => {
                let before = self.walks[0].step();
                self.l2 += 2 * u128::from(before) + 1;
                if self.walks[0].pos == 0 {
                    self.l0 += 1;
                }
            }
            2 => {
                // new tuples (n, k₂ < n) and (k₁ ≤ n, n)
                self.walks[0].step();
                let from_first = self.walks[1].count(-self.walks[0].pos);
                self.walks[1].step();
                self.l0 += from_first + self.walks[0].count(-self.walks[1].pos);
            }
            _ => {
                for w in self.walks.iter_mut() {
                    w.step();
                }
            }
        }
    }

    pub fn l0(&self) -> Result<u64> {
        if self.p <= 2 {
            return Ok(self.l0);
        }
        let wide: Vec<_> = self.walks.iter().map(|w| w.measure().wide()).collect();
        u64::try_from(evaluate_at_zero(&wide)).map_err(|_| crate::error::Error::Overflow("l(n,0)"))
    }

    pub fn l2sum(&self) -> Result<u128> {
        if self.p == 1 {
            return Ok(self.l2);
        }
        let ms: Vec<OccupationMeasure> = self.walks.iter().map(OnlineWalk::measure).collect();
        l2_via_autocorrelation(&ms)
    }
}
