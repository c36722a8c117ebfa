use crate::error::{domain, Error, Result};
use crate::sequence::{EventId, Timestamp};

/// One event repeating `length` times every `period` steps, starting at
/// `start`, with per-step shift corrections.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cycle {
    pub event: EventId,
    pub length: i64,
    pub period: i64,
    pub start: Timestamp,
    pub corrections: Vec<i64>,
}

impl Cycle {
    pub fn new(event: EventId, length: i64, period: i64, start: Timestamp, corrections: Vec<i64>) -> Self {
        Cycle { event, length, period, start, corrections }
    }

    /// Sum of the corrections.
    pub fn drift(&self) -> i64 {
        self.corrections.iter().sum()
    }

    pub fn span(&self) -> i64 {
        (self.length - 1) * self.period + self.drift()
    }

    /// Reconstructed timestamps.
    pub fn cover(&self) -> Result<Vec<Timestamp>> {
        if self.length < 2 || self.period < 1 || self.start < 0 {
            return Err(Error::InvalidCycle(format!(
                "length {} period {} start {}",
                self.length, self.period, self.start
            )));
        }
        if self.corrections.len() as i64 != self.length - 1 {
            return Err(Error::InvalidCycle(format!(
                "{} corrections for length {}",
                self.corrections.len(),
                self.length
            )));
        }
        let mut out = Vec::with_capacity(self.length as usize);
        let mut t = self.start;
        out.push(t);
        for (k, &e) in self.corrections.iter().enumerate() {
            let next = t + self.period + e;
            if next <= t {
                return Err(Error::InvalidCycle(format!("occurrence {} does not advance ({} -> {})", k + 2, t, next)));
            }
            t = next;
            out.push(t);
        }
        Ok(out)
    }
}

/// `Σ|d - p|` over the gaps.
fn deviation(gaps: &[i64], p: i64) -> i64 {
    gaps.iter().map(|g| (g - p).abs()).sum()
}

/// Period minimizing the absolute corrections: the median gap. With an even
/// number of gaps both middle values are tried and the larger wins ties.
pub fn median_period(gaps: &[i64]) -> i64 {
    let mut sorted = gaps.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();
    if n % 2 == 1 {
        return sorted[n / 2];
    }
    let (lo, hi) = (sorted[n / 2 - 1], sorted[n / 2]);
    if deviation(gaps, lo) < deviation(gaps, hi) {
        lo
    } else {
        hi
    }
}

/// Fits a cycle to strictly increasing timestamps.
pub fn fit_cycle(timestamps: &[Timestamp], event: EventId) -> Result<Cycle> {
    if timestamps.len() < 2 {
        return Err(domain("a cycle needs at least two timestamps"));
    }
    let gaps: Vec<i64> = timestamps.windows(2).map(|w| w[1] - w[0]).collect();
    if gaps.iter().any(|&g| g <= 0) {
        return Err(domain("timestamps must be strictly increasing"));
    }
    let p = median_period(&gaps);
    Ok(Cycle {
        event,
        length: timestamps.len() as i64,
        period: p,
        start: timestamps[0],
        corrections: gaps.iter().map(|g| g - p).collect(),
    })
}
