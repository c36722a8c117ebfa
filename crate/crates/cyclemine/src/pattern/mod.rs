//! Cycles, pattern trees and occurrence reconstruction.
mod cycle;
mod grow;
mod notation;
mod tree;

pub use cycle::{fit_cycle, median_period, Cycle};
pub use grow::{factorize, grow_horizontally, grow_vertically};
pub use notation::{format_pattern, format_tree, parse_pattern, parse_patterns, parse_tree};
pub use tree::{classify_tree, Block, Expansion, LeafId, Node, PatternTree, ShapeClass, TreeShape};

pub(crate) use tree::Walk;

use crate::error::{Error, Result};
use crate::sequence::{Occurrence, Timestamp};

/// A pattern tree anchored at `start`, with one correction per occurrence
/// after the first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern {
    pub tree: PatternTree,
    pub start: Timestamp,
    pub corrections: Vec<i64>,
}

impl Pattern {
    pub fn new(tree: PatternTree, start: Timestamp, corrections: Vec<i64>) -> Result<Self> {
        let n = tree.occurrence_count();
        if corrections.len() + 1 != n {
            return Err(Error::Domain(format!(
                "tree has {n} occurrences but {} corrections were given",
                corrections.len()
            )));
        }
        Ok(Pattern { tree, start, corrections })
    }

    pub fn from_cycle(c: &Cycle) -> Result<Self> {
        Pattern::new(PatternTree::cycle(c.event, c.length, c.period)?, c.start, c.corrections.clone())
    }

    /// Pattern with the same tree and all-zero corrections.
    pub fn perfect(tree: PatternTree, start: Timestamp) -> Self {
        let n = tree.occurrence_count();
        Pattern { tree, start, corrections: vec![0; n - 1] }
    }

    pub fn occurrence_count(&self) -> usize {
        self.tree.occurrence_count()
    }

    pub(crate) fn walk(&self) -> Walk<'static> {
        let mut w = Walk::with_corrections(&self.corrections);
        w.block(&self.tree.root, 0, 0);
        w
    }

    /// Corrected occurrences in traversal order (may contain collisions).
    pub fn occurrence_list(&self) -> Vec<Occurrence> {
        let w = self.walk();
        w.times.iter().zip(&w.offsets).zip(&w.events).map(|((t, o), e)| (self.start + t + o, *e)).collect()
    }

    /// Solves the corrections placing each occurrence of `tree` (in
    /// traversal order) at the matching target timestamp.
    pub fn fit_to(tree: PatternTree, targets: &[Timestamp]) -> Result<Self> {
        let n = tree.occurrence_count();
        if targets.len() != n {
            return Err(Error::Domain(format!("{} targets for {n} occurrences", targets.len())));
        }
        let start = targets[0];
        let rel: Vec<i64> = targets.iter().map(|t| t - start).collect();
        let mut w = Walk::solving(&rel);
        w.block(&tree.root, 0, 0);
        debug_assert!(!w.failed());
        Ok(Pattern { tree, start, corrections: w.corrections })
    }
}

/// Cumulative offset of every occurrence, in traversal order.
pub fn accumulate_corrections(p: &Pattern) -> Result<Vec<i64>> {
    if p.corrections.len() + 1 != p.tree.occurrence_count() {
        return Err(Error::Domain("correction count does not match the tree".into()));
    }
    Ok(p.walk().offsets)
}

/// Sorted, de-duplicated set of corrected occurrences.
pub fn pattern_occurrences(p: &Pattern) -> Result<Vec<Occurrence>> {
    if p.corrections.len() + 1 != p.tree.occurrence_count() {
        return Err(Error::Domain("correction count does not match the tree".into()));
    }
    let mut occ = p.occurrence_list();
    if let Some(o) = occ.iter().find(|o| o.0 < 0) {
        return Err(Error::InvalidPattern(format!("occurrence at negative time {}", o.0)));
    }
    occ.sort_unstable();
    occ.dedup();
    Ok(occ)
}
