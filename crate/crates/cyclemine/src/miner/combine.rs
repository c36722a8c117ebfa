//! Vertical and horizontal combination rounds.
use std::collections::{BTreeMap, BTreeSet, HashSet};

use rayon::prelude::*;

use super::cliques::{components, greedy_cliques, maximal_cliques, Graph};
use super::cycles::extract_cycles_tri;
use super::filter::filter_candidates;
use super::{Candidate, Context, Provenance};
use crate::pattern::{factorize, grow_horizontally, grow_vertically, Pattern, PatternTree};
use crate::sequence::{EventId, Occurrence};

fn sum_costs<'a>(items: impl IntoIterator<Item = &'a Candidate>) -> f64 {
    items.into_iter().fold(0.0, |acc, c| acc + c.cost)
}

/// Unique candidates from both lists, new ones first.
fn merged<'a>(new: &'a [Candidate], pool: &'a [Candidate]) -> Vec<(&'a Candidate, bool)> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (c, fresh) in new.iter().map(|c| (c, true)).chain(pool.iter().map(|c| (c, false))) {
        if seen.insert(&c.pattern) {
            out.push((c, fresh));
        }
    }
    out
}

fn dedup(mut out: Vec<Candidate>) -> Vec<Candidate> {
    out.sort_by(|a, b| a.pattern.cmp(&b.pattern).then(a.cost.total_cmp(&b.cost)));
    out.dedup_by(|a, b| a.pattern == b.pattern);
    out
}

/// Nests same-tree candidates whose starting points form a cycle.
pub fn combine_vertically(new: &[Candidate], pool: &[Candidate], ctx: &Context, k: usize) -> Vec<Candidate> {
    let trees: BTreeSet<&PatternTree> = new.iter().map(|c| &c.pattern.tree).collect();
    let all = merged(new, pool);
    let mut out = Vec::new();
    for tree in trees {
        // Cheapest candidate per starting point.
        let mut by_start: BTreeMap<i64, &Candidate> = BTreeMap::new();
        for (c, _) in all.iter().filter(|(c, _)| &c.pattern.tree == tree) {
            by_start
                .entry(c.pattern.start)
                .and_modify(|cur| {
                    if (c.cost, &c.pattern) < (cur.cost, &cur.pattern) {
                        *cur = c;
                    }
                })
                .or_insert(c);
        }
        if by_start.len() < 3 {
            continue;
        }
        let starts: Vec<i64> = by_start.keys().copied().collect();
        let Some(margin) = ctx.cost_of(&Pattern::perfect(tree.clone(), starts[0])) else {
            continue;
        };
        for cyc in extract_cycles_tri(&starts, EventId(0), margin) {
            let Ok(times) = cyc.cover() else { continue };
            let members: Vec<&Candidate> = times.iter().map(|t| by_start[t]).collect();
            let instances: Vec<Pattern> = members.iter().map(|c| c.pattern.clone()).collect();
            let Ok(grown) = grow_vertically(&instances) else { continue };
            let Some(cand) = ctx.candidate(grown, Provenance::Vertical) else { continue };
            if cand.cost < sum_costs(members.iter().copied()) {
                out.push(cand);
            }
        }
    }
    filter_candidates(dedup(out), k)
}

/// Root length and the sum of the corrections on the first occurrence of
/// every root repetition after the first.
fn boundary_shift(p: &Pattern, length: i64) -> i64 {
    let per = p.tree.root.occurrences_per_rep();
    (1..length as usize).map(|m| p.corrections[m * per - 1].abs()).sum()
}

/// Whether the later pattern's period is close enough to the earlier one's
/// not to inflate corrections beyond those it already has.
fn periods_compatible(a: &Pattern, b: &Pattern) -> bool {
    let r = a.tree.root.length.min(b.tree.root.length);
    let gap = (a.tree.root.period - b.tree.root.period).abs();
    // gap <= 2 / (r (r-1)) * shift, in integers.
    gap * r * (r - 1) <= 2 * boundary_shift(b, r)
}

fn disjoint(a: &[Occurrence], b: &[Occurrence]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return false,
        }
    }
    true
}

/// Concatenation of `members` (ordered by start), or its factorized form
/// when that is cheaper.
fn concatenate(members: &[&Candidate], ctx: &Context) -> Option<Candidate> {
    let instances: Vec<Pattern> = members.iter().map(|c| c.pattern.clone()).collect();
    let grown = grow_horizontally(&instances).ok()?;
    let flat = ctx.candidate(grown.clone(), Provenance::Horizontal);
    let folded = factorize(&grown).and_then(|f| ctx.candidate(f, Provenance::Factorized));
    match (flat, folded) {
        (Some(a), Some(b)) => Some(if b.cost < a.cost { b } else { a }),
        (a, b) => a.or(b),
    }
}

/// Code length of `members` replaced by `k`, over the members' union cover.
fn replacement_cost(k: &Candidate, members: &[&Candidate], ctx: &Context) -> f64 {
    let kept: HashSet<&Occurrence> = k.cover.iter().collect();
    let mut union: Vec<Occurrence> = members.iter().flat_map(|c| c.cover.iter().copied()).collect();
    union.sort_unstable();
    union.dedup();
    k.cost + ctx.residual_sum(union.iter().filter(|o| !kept.contains(o)))
}

/// Concatenates candidates starting within one period of each other.
pub fn combine_horizontally(
    new: &[Candidate],
    pool: &[Candidate],
    ctx: &Context,
    k: usize,
    clique_node_cap: usize,
) -> Vec<Candidate> {
    let mut nodes = merged(new, pool);
    nodes.sort_by(|(a, _), (b, _)| (a.pattern.start, &a.pattern).cmp(&(b.pattern.start, &b.pattern)));
    let mut pairs = Vec::new();
    for i in 0..nodes.len() {
        let (a, a_new) = nodes[i];
        let reach = a.pattern.start + a.pattern.tree.root.period;
        for (j, &(b, b_new)) in nodes.iter().enumerate().skip(i + 1) {
            if b.pattern.start > reach {
                break;
            }
            if (a_new || b_new) && periods_compatible(&a.pattern, &b.pattern) && disjoint(&a.cover, &b.cover) {
                pairs.push((i, j));
            }
        }
    }
    let evaluated: Vec<(usize, usize, Candidate)> = pairs
        .par_iter()
        .filter_map(|&(i, j)| {
            let members = [nodes[i].0, nodes[j].0];
            let cand = concatenate(&members, ctx)?;
            (replacement_cost(&cand, &members, ctx) < sum_costs(members)).then_some((i, j, cand))
        })
        .collect();

    let mut graph: Graph = vec![BTreeSet::new(); nodes.len()];
    let mut out = Vec::new();
    for (i, j, cand) in evaluated {
        graph[i].insert(j);
        graph[j].insert(i);
        out.push(cand);
    }
    let mut cliques = Vec::new();
    for comp in components(&graph) {
        if comp.len() > clique_node_cap {
            cliques.extend(greedy_cliques(&graph, &comp));
        } else {
            cliques.extend(maximal_cliques(&graph, &comp));
        }
    }
    let grown: Vec<Candidate> = cliques
        .par_iter()
        .filter(|c| c.len() >= 3)
        .filter_map(|clique| {
            let members: Vec<&Candidate> = clique.iter().map(|&v| nodes[v].0).collect();
            concatenate(&members, ctx)
        })
        .collect();
    out.extend(grown);
    filter_candidates(dedup(out), k)
}
