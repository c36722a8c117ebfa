//! Building larger patterns out of smaller ones.
use super::{fit_cycle, Block, Node, Pattern, PatternTree};
use crate::error::{domain, Result};
use crate::sequence::{EventId, Timestamp};

/// Nests repeated instances of one tree under a new outer cycle fitted to
/// their starting points.
pub fn grow_vertically(instances: &[Pattern]) -> Result<Pattern> {
    if instances.len() < 2 {
        return Err(domain("vertical growth needs at least two instances"));
    }
    let tree = &instances[0].tree;
    if instances.iter().any(|p| &p.tree != tree) {
        return Err(domain("vertical growth over different trees"));
    }
    let starts: Vec<Timestamp> = instances.iter().map(|p| p.start).collect();
    let outer = fit_cycle(&starts, EventId(0))?;
    let mut corrections = instances[0].corrections.clone();
    for (inst, e) in instances[1..].iter().zip(&outer.corrections) {
        corrections.push(*e);
        corrections.extend_from_slice(&inst.corrections);
    }
    let root = Block::new(outer.length, outer.period, vec![Node::Block(tree.root.clone())], vec![]);
    Pattern::new(PatternTree::new(root)?, outer.start, corrections)
}

/// Splits a pattern's corrected occurrences into one slice per root
/// repetition.
fn by_repetition(p: &Pattern) -> Vec<Vec<Timestamp>> {
    let per = p.tree.root.occurrences_per_rep();
    let times: Vec<Timestamp> = p.occurrence_list().iter().map(|o| o.0).collect();
    times.chunks(per).map(<[Timestamp]>::to_vec).collect()
}

/// Concatenates instances ordered by start under a root with the shortest
/// instance length and the period of the earliest one. Repetitions beyond
/// that length are dropped.
pub fn grow_horizontally(instances: &[Pattern]) -> Result<Pattern> {
    if instances.len() < 2 {
        return Err(domain("horizontal growth needs at least two instances"));
    }
    if instances.windows(2).any(|w| w[1].start < w[0].start) {
        return Err(domain("instances must be ordered by start"));
    }
    let length = instances.iter().map(|p| p.tree.root.length).min().unwrap();
    let period = instances[0].tree.root.period;
    let mut children = Vec::new();
    let mut distances = Vec::new();
    for (i, inst) in instances.iter().enumerate() {
        if i > 0 {
            let prev = &instances[i - 1];
            let gap = inst.start - prev.start - prev.tree.root.distance_sum();
            if gap < 0 {
                return Err(domain("instances overlap their predecessor's inner layout"));
            }
            distances.push(gap);
        }
        children.extend(inst.tree.root.children.iter().cloned());
        distances.extend_from_slice(&inst.tree.root.distances);
    }
    let slices: Vec<Vec<Vec<Timestamp>>> = instances.iter().map(by_repetition).collect();
    let mut targets = Vec::new();
    for k in 0..length as usize {
        for s in &slices {
            targets.extend_from_slice(&s[k]);
        }
    }
    let tree = PatternTree::new(Block::new(length, period, children, distances))?;
    Pattern::fit_to(tree, &targets)
}

/// Rewrites `[r0,p0]([r1,p1](A) d [r1,p1](B) ...)` as
/// `[r0,p0]([r1,p1](A d' B ...))`, keeping the same occurrences.
pub fn factorize(p: &Pattern) -> Option<Pattern> {
    let root = &p.tree.root;
    if root.children.len() < 2 {
        return None;
    }
    let inner: Vec<&Block> = root
        .children
        .iter()
        .map(|c| match c {
            Node::Block(b) => Some(b),
            Node::Leaf(_) => None,
        })
        .collect::<Option<_>>()?;
    let (r1, p1) = (inner[0].length, inner[0].period);
    if inner.iter().any(|b| b.length != r1 || b.period != p1) {
        return None;
    }
    let mut children = Vec::new();
    let mut distances = Vec::new();
    for (i, b) in inner.iter().enumerate() {
        if i > 0 {
            let gap = root.distances[i - 1] - inner[i - 1].distance_sum();
            if gap < 0 {
                return None;
            }
            distances.push(gap);
        }
        children.extend(b.children.iter().cloned());
        distances.extend_from_slice(&b.distances);
    }
    let merged = Block::new(r1, p1, children, distances);
    let tree = PatternTree::new(Block::new(root.length, root.period, vec![Node::Block(merged)], vec![])).ok()?;

    // Old order per root repetition: child, then its repetitions. New order:
    // inner repetition, then child.
    let per_child: Vec<usize> = inner.iter().map(|b| b.occurrences_per_rep()).collect();
    let mut targets = Vec::with_capacity(p.occurrence_count());
    for rep in by_repetition(p) {
        let mut segments = Vec::new();
        let mut at = 0;
        for (c, &n) in per_child.iter().enumerate() {
            segments.push(&rep[at..at + n * r1 as usize]);
            at += n * r1 as usize;
            debug_assert!(c < per_child.len());
        }
        for j in 0..r1 as usize {
            for (c, seg) in segments.iter().enumerate() {
                let n = per_child[c];
                targets.extend_from_slice(&seg[j * n..(j + 1) * n]);
            }
        }
    }
    Pattern::fit_to(tree, &targets).ok()
}
