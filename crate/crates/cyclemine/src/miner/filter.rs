use std::cmp::Ordering;
use std::collections::HashMap;

use super::Candidate;
use crate::sequence::Occurrence;

/// Ranking used everywhere candidates compete: efficiency, then cost, then
/// the pattern itself.
pub(crate) fn rank(a: &Candidate, b: &Candidate) -> Ordering {
    a.efficiency.total_cmp(&b.efficiency).then(a.cost.total_cmp(&b.cost)).then_with(|| a.pattern.cmp(&b.pattern))
}

/// Keeps the candidates ranked among the `k` best for at least one
/// occurrence they cover. Input order is preserved.
pub fn filter_candidates(pool: Vec<Candidate>, k: usize) -> Vec<Candidate> {
    if k == 0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.sort_by(|&a, &b| rank(&pool[a], &pool[b]));
    let mut seen: HashMap<Occurrence, usize> = HashMap::new();
    let mut keep = vec![false; pool.len()];
    for &i in &order {
        for o in pool[i].cover.iter() {
            let slot = seen.entry(*o).or_insert(0);
            if *slot < k {
                *slot += 1;
                keep[i] = true;
            }
        }
    }
    pool.into_iter().zip(keep).filter_map(|(c, k)| k.then_some(c)).collect()
}
