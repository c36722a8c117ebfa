//! Greedy selection of the final collection.
use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashSet};

use super::{Candidate, Context};
use crate::sequence::Occurrence;

/// Selected candidates and the occurrences left as residuals.
#[derive(Clone, Debug)]
pub struct Selection {
    pub patterns: Vec<Candidate>,
    pub residuals: Vec<Occurrence>,
    pub total: f64,
}

#[derive(PartialEq)]
struct Entry {
    ratio: f64,
    cost: f64,
    idx: usize,
    gain: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, o: &Self) -> Ordering {
        self.ratio.total_cmp(&o.ratio).then(self.cost.total_cmp(&o.cost)).then(self.idx.cmp(&o.idx))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

struct State<'a> {
    pool: &'a [Candidate],
    ctx: &'a Context<'a>,
    covered: HashSet<Occurrence>,
    chosen: Vec<usize>,
}

impl State<'_> {
    fn fresh(&self, i: usize) -> impl Iterator<Item = &Occurrence> {
        self.pool[i].cover.iter().filter(|o| !self.covered.contains(o))
    }

    /// Adds candidate `i` if it is cheaper than the residuals it would remove.
    fn try_take(&mut self, i: usize) -> bool {
        let saved = self.ctx.residual_sum(self.fresh(i));
        if self.pool[i].cost < saved {
            self.covered.extend(self.pool[i].cover.iter().copied());
            self.chosen.push(i);
            true
        } else {
            false
        }
    }

    fn run(&mut self) {
        let mut heap: BinaryHeap<Reverse<Entry>> = BinaryHeap::new();
        for i in 0..self.pool.len() {
            if !self.chosen.contains(&i) {
                let gain = self.fresh(i).count();
                heap.push(Reverse(entry(&self.pool[i], i, gain)));
            }
        }
        while let Some(Reverse(top)) = heap.pop() {
            let gain = self.fresh(top.idx).count();
            if gain != top.gain {
                if gain > 0 {
                    heap.push(Reverse(entry(&self.pool[top.idx], top.idx, gain)));
                }
                continue;
            }
            if gain == 0 || !self.try_take(top.idx) {
                break;
            }
        }
    }

    fn finish(self) -> Selection {
        let mut residuals: Vec<Occurrence> =
            self.ctx.seq.pairs().iter().filter(|o| !self.covered.contains(o)).copied().collect();
        residuals.sort_unstable();
        let patterns: Vec<Candidate> = self.chosen.iter().map(|&i| self.pool[i].clone()).collect();
        let total = patterns.iter().fold(0.0, |a, c| a + c.cost) + self.ctx.residual_sum(residuals.iter());
        Selection { patterns, residuals, total }
    }
}

fn entry(c: &Candidate, idx: usize, gain: usize) -> Entry {
    let ratio = if gain == 0 { f64::INFINITY } else { c.cost / gain as f64 };
    Entry { ratio, cost: c.cost, idx, gain }
}

fn greedy(pool: &[Candidate], ctx: &Context, seed: Option<usize>) -> Selection {
    let mut st = State { pool, ctx, covered: HashSet::new(), chosen: Vec::new() };
    if let Some(i) = seed {
        st.try_take(i);
    }
    st.run();
    st.finish()
}

/// Greedy weighted cover: repeatedly takes the candidate with the lowest
/// cost per still-uncovered occurrence while it beats those residuals.
///
/// A second pass seeded with the best single candidate is also run and the
/// cheaper result returned, so the outcome is never worse than keeping any
/// one candidate alone.
pub fn greedy_cover(pool: &[Candidate], ctx: &Context) -> Selection {
    let mut pool = pool.to_vec();
    pool.sort_by(|a, b| a.pattern.cmp(&b.pattern));
    pool.dedup_by(|a, b| a.pattern == b.pattern);
    let plain = greedy(&pool, ctx, None);
    let best_single = (0..pool.len())
        .map(|i| (pool[i].cost - ctx.residual_sum(pool[i].cover.iter()), i))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    match best_single {
        Some((_, i)) if !plain.patterns.first().is_some_and(|c| c.pattern == pool[i].pattern) => {
            let seeded = greedy(&pool, ctx, Some(i));
            if seeded.total < plain.total {
                seeded
            } else {
                plain
            }
        }
        _ => plain,
    }
}
