//! Initial single-event cycles: optimal segmentation and chained triples.
use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use crate::codec::{self, SeqStats};
use crate::pattern::{fit_cycle, Cycle};
use crate::sequence::{EventId, Timestamp};

/// Running upper median of a multiset with the sums needed for the total
/// absolute deviation from it.
#[derive(Default)]
struct RunningMedian {
    lower: BinaryHeap<i64>,
    upper: BinaryHeap<Reverse<i64>>,
    sum_lower: i64,
    sum_upper: i64,
}

impl RunningMedian {
    fn push(&mut self, x: i64) {
        if self.upper.peek().is_some_and(|&Reverse(m)| x >= m) {
            self.upper.push(Reverse(x));
            self.sum_upper += x;
        } else {
            self.lower.push(x);
            self.sum_lower += x;
        }
        if self.lower.len() > self.upper.len() {
            let v = self.lower.pop().unwrap();
            self.sum_lower -= v;
            self.upper.push(Reverse(v));
            self.sum_upper += v;
        } else if self.upper.len() > self.lower.len() + 1 {
            let Reverse(v) = self.upper.pop().unwrap();
            self.sum_upper -= v;
            self.lower.push(v);
            self.sum_lower += v;
        }
    }

    fn median(&self) -> i64 {
        self.upper.peek().unwrap().0
    }

    fn abs_deviation(&self) -> i64 {
        let m = self.median();
        (self.sum_upper - m * self.upper.len() as i64) + (m * self.lower.len() as i64 - self.sum_lower)
    }
}

/// Splits `ts` into consecutive segments, each either one residual or a
/// cycle of at least three occurrences, minimizing the summed cost.
/// Returns the cycles of the optimal split and its cost.
pub fn segment(ts: &[Timestamp], event: EventId, stats: &SeqStats) -> (Vec<Cycle>, f64) {
    let n = ts.len();
    let Ok(residual) = codec::residual_cost::<f64>(stats, event) else {
        return (Vec::new(), 0.0);
    };
    let mut best = vec![f64::INFINITY; n + 1];
    // `from[j]` is the start of the segment ending before `j`.
    let mut from = vec![0usize; n + 1];
    best[0] = 0.0;
    for i in 0..n {
        let base = best[i];
        if base + residual < best[i + 1] {
            best[i + 1] = base + residual;
            from[i + 1] = i;
        }
        let mut med = RunningMedian::default();
        for j in i + 1..n {
            med.push(ts[j] - ts[j - 1]);
            if j - i < 2 {
                continue;
            }
            let len = (j - i + 1) as i64;
            let p = med.median();
            let drift = ts[j] - ts[i] - (len - 1) * p;
            let Ok(cost) = codec::simple_cycle_cost::<f64>(stats, event, len, p, drift, med.abs_deviation()) else {
                continue;
            };
            let total = base + cost.total();
            if total < best[j + 1] {
                best[j + 1] = total;
                from[j + 1] = i;
            }
        }
    }
    let mut cycles = Vec::new();
    let mut j = n;
    while j > 0 {
        let i = from[j];
        if j - i >= 3 {
            cycles.push(fit_cycle(&ts[i..j], event).expect("segment of three or more"));
        }
        j = i;
    }
    cycles.reverse();
    (cycles, best[n])
}

/// Cycles of the optimal segmentation of one event's timestamps.
pub fn extract_cycles_dp(ts: &[Timestamp], event: EventId, stats: &SeqStats) -> Vec<Cycle> {
    if ts.len() < 3 {
        return Vec::new();
    }
    let Ok(res) = codec::residual_cost::<f64>(stats, event) else {
        return Vec::new();
    };
    segment(ts, event, stats)
        .0
        .into_iter()
        .filter(|c| codec::cycle_cost::<f64>(c, stats).is_ok_and(|cost| cost < res * c.length as f64))
        .collect()
}

/// Chains of triples whose two gaps differ by at most `margin`.
///
/// Every admissible triple not yet part of a chain starts one, which is then
/// extended step by step with the continuation closest to the expected
/// timestamp (the earlier one on ties) until none is admissible or the next
/// triple already belongs to a chain. Chains may share occurrences.
pub fn extract_cycles_tri(ts: &[Timestamp], event: EventId, margin: f64) -> Vec<Cycle> {
    let n = ts.len();
    if n < 3 || margin < 0.0 {
        return Vec::new();
    }
    let slack = margin.floor() as i64;
    // Admissible continuations of (a, b), best first.
    let options = |a: usize, b: usize| -> Vec<usize> {
        let want = 2 * ts[b] - ts[a];
        let lo = ts[b + 1..].partition_point(|&t| t < want - slack) + b + 1;
        let hi = ts[b + 1..].partition_point(|&t| t <= want + slack) + b + 1;
        let mut v: Vec<usize> = (lo..hi).collect();
        v.sort_by_key(|&c| ((ts[c] - want).abs(), c));
        v
    };
    let mut used: HashSet<(u32, u32, u32)> = HashSet::new();
    let key = |a: usize, b: usize, c: usize| (a as u32, b as u32, c as u32);
    let mut out = Vec::new();
    for a in 0..n - 2 {
        for b in a + 1..n - 1 {
            if ts[b] - ts[a] > ts[n - 1] - ts[b] + slack {
                break;
            }
            for c in options(a, b) {
                if !used.insert(key(a, b, c)) {
                    continue;
                }
                let mut chain = vec![a, b, c];
                let (mut x, mut y) = (b, c);
                while y + 1 < n {
                    let Some(&z) = options(x, y).first() else { break };
                    if !used.insert(key(x, y, z)) {
                        break;
                    }
                    chain.push(z);
                    (x, y) = (y, z);
                }
                let times: Vec<Timestamp> = chain.iter().map(|&i| ts[i]).collect();
                out.push(fit_cycle(&times, event).expect("chain of three or more"));
            }
        }
    }
    out
}
