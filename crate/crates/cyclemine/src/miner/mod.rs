//! Mining pipeline: initial cycles, combination rounds, greedy selection.
mod cliques;
mod combine;
mod cover;
mod cycles;
mod filter;

use std::collections::HashSet;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

pub use cliques::{greedy_cliques, maximal_cliques, Graph};
pub use combine::{combine_horizontally, combine_vertically};
pub use cover::{greedy_cover, Selection};
pub use cycles::{extract_cycles_dp, extract_cycles_tri, segment};
pub use filter::filter_candidates;

use crate::codec::{self, CodecOptions, CollectionReport, SeqStats};
use crate::pattern::{pattern_occurrences, Pattern};
use crate::sequence::{EventSequence, Occurrence};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Dp,
    Tri,
    Vertical,
    Horizontal,
    Factorized,
}

/// A scored pattern with its cached cover.
#[derive(Clone, Debug)]
pub struct Candidate {
    pub pattern: Pattern,
    /// Sorted covered pairs.
    pub cover: Arc<[Occurrence]>,
    pub cost: f64,
    pub efficiency: f64,
    pub provenance: Provenance,
}

/// Everything candidate scoring depends on.
pub struct Context<'a> {
    pub seq: &'a EventSequence,
    pub stats: SeqStats,
    pub opts: CodecOptions,
    residual: Vec<f64>,
}

impl<'a> Context<'a> {
    pub fn new(seq: &'a EventSequence, stats: SeqStats, opts: CodecOptions) -> Self {
        let residual = (0..stats.counts.len())
            .map(|e| codec::residual_cost::<f64>(&stats, crate::EventId(e as u32)).unwrap_or(f64::INFINITY))
            .collect();
        Context { seq, stats, opts, residual }
    }

    pub fn residual_sum<'o>(&self, occ: impl IntoIterator<Item = &'o Occurrence>) -> f64 {
        occ.into_iter().fold(0.0, |acc, o| acc + self.residual[o.1.index()])
    }

    pub fn cost_of(&self, p: &Pattern) -> Option<f64> {
        codec::pattern_cost_with::<f64>(p, &self.stats, &self.opts).ok().map(|c| c.total())
    }

    /// Scores `p`; `None` unless it is codable and lies within the sequence.
    pub fn score(&self, p: Pattern, provenance: Provenance) -> Option<Candidate> {
        let cover = pattern_occurrences(&p).ok()?;
        if !cover.iter().all(|o| self.seq.contains(o)) {
            return None;
        }
        let cost = self.cost_of(&p)?;
        let efficiency = cost / cover.len() as f64;
        Some(Candidate { pattern: p, cover: cover.into(), cost, efficiency, provenance })
    }

    /// Like [`Context::score`], also requiring `p` to be cost-effective for
    /// its own cover.
    pub fn candidate(&self, p: Pattern, provenance: Provenance) -> Option<Candidate> {
        self.score(p, provenance).filter(|c| c.cost < self.residual_sum(c.cover.iter()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MiningConfig {
    /// Candidates kept per occurrence after each filtering step.
    pub k: usize,
    pub max_rounds: usize,
    pub allow_interleaving: bool,
    /// Components of the combination graph larger than this use a greedy
    /// clique cover instead of full enumeration.
    pub clique_node_cap: usize,
    /// Stop after the initial cycles.
    pub cycles_only: bool,
}

impl Default for MiningConfig {
    fn default() -> Self {
        MiningConfig { k: 3, max_rounds: 10, allow_interleaving: true, clique_node_cap: 64, cycles_only: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Stage {
    /// Simple cycles only.
    #[serde(rename = "S")]
    Cycles,
    /// Cycles and the first vertical round.
    #[serde(rename = "V")]
    Vertical,
    /// Cycles and the first horizontal round.
    #[serde(rename = "H")]
    Horizontal,
    /// Cycles and both first rounds.
    #[serde(rename = "V+H")]
    FirstRound,
    /// Every candidate produced.
    #[serde(rename = "F")]
    Final,
}

impl Stage {
    pub fn label(self) -> &'static str {
        match self {
            Stage::Cycles => "S",
            Stage::Vertical => "V",
            Stage::Horizontal => "H",
            Stage::FirstRound => "V+H",
            Stage::Final => "F",
        }
    }
}

#[derive(Clone, Debug)]
pub struct StageResult {
    pub stage: Stage,
    pub pool_size: usize,
    pub selection: Selection,
    pub report: CollectionReport<f64>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Timings {
    pub cycles: Duration,
    pub combination: Duration,
    pub selection: Duration,
}

#[derive(Clone, Debug)]
pub struct MiningResult {
    /// Stage whose selection is returned.
    pub best: Stage,
    pub stages: Vec<StageResult>,
    pub rounds: usize,
    /// Every candidate produced, deduplicated.
    pub pool: Vec<Candidate>,
    pub timings: Timings,
}

impl MiningResult {
    pub fn selection(&self) -> &Selection {
        &self.best_stage().selection
    }

    pub fn best_stage(&self) -> &StageResult {
        self.stages.iter().find(|s| s.stage == self.best).expect("best stage present")
    }

    pub fn stage(&self, s: Stage) -> Option<&StageResult> {
        self.stages.iter().find(|r| r.stage == s)
    }
}

fn dedup_candidates(mut v: Vec<Candidate>) -> Vec<Candidate> {
    v.sort_by(|a, b| a.pattern.cmp(&b.pattern).then(a.provenance.cmp(&b.provenance)));
    v.dedup_by(|a, b| a.pattern == b.pattern);
    v
}

/// Cost-effective simple cycles of every event, filtered to the `k` best
/// per occurrence.
pub fn extract_cycles(ctx: &Context, k: usize) -> Vec<Candidate> {
    let margin = codec::extension_margin::<f64>(&ctx.stats);
    let events: Vec<_> = ctx.seq.events().collect();
    let found: Vec<Vec<Candidate>> = events
        .par_iter()
        .map(|&e| {
            let ts = ctx.seq.occurrences_of(e);
            let dp = extract_cycles_dp(ts, e, &ctx.stats).into_iter().map(|c| (c, Provenance::Dp));
            let tri = extract_cycles_tri(ts, e, margin).into_iter().map(|c| (c, Provenance::Tri));
            dp.chain(tri).filter_map(|(c, prov)| ctx.candidate(Pattern::from_cycle(&c).ok()?, prov)).collect()
        })
        .collect();
    filter_candidates(dedup_candidates(found.into_iter().flatten().collect()), k)
}

fn select(stage: Stage, pool: Vec<Candidate>, ctx: &Context) -> StageResult {
    let selection = greedy_cover(&pool, ctx);
    let patterns: Vec<Pattern> = selection.patterns.iter().map(|c| c.pattern.clone()).collect();
    let report = codec::collection_cost::<f64>(&patterns, ctx.seq, &ctx.stats, &ctx.opts)
        .expect("selected candidates are codable");
    StageResult { stage, pool_size: pool.len(), selection, report }
}

/// Runs the full pipeline with statistics taken from `seq` itself.
pub fn mine(seq: &EventSequence, cfg: &MiningConfig) -> MiningResult {
    mine_with(seq, SeqStats::of(seq), cfg)
}

pub fn mine_with(seq: &EventSequence, stats: SeqStats, cfg: &MiningConfig) -> MiningResult {
    let ctx = Context::new(seq, stats, CodecOptions::interleaving(cfg.allow_interleaving));
    let mut timings = Timings::default();
    let t0 = Instant::now();
    let initial = if seq.is_empty() { Vec::new() } else { extract_cycles(&ctx, cfg.k) };
    timings.cycles = t0.elapsed();

    let t1 = Instant::now();
    let mut pool: Vec<Candidate> = Vec::new();
    let mut seen: HashSet<Pattern> = initial.iter().map(|c| c.pattern.clone()).collect();
    let (mut vert, mut horiz) = (initial.clone(), initial.clone());
    let (mut first_v, mut first_h) = (Vec::new(), Vec::new());
    let mut rounds = 0;
    while !cfg.cycles_only && (!vert.is_empty() || !horiz.is_empty()) && rounds < cfg.max_rounds {
        let next_v: Vec<Candidate> = combine_vertically(&horiz, &pool, &ctx, cfg.k)
            .into_iter()
            .filter(|c| seen.insert(c.pattern.clone()))
            .collect();
        let next_h: Vec<Candidate> = combine_horizontally(&vert, &pool, &ctx, cfg.k, cfg.clique_node_cap)
            .into_iter()
            .filter(|c| seen.insert(c.pattern.clone()))
            .collect();
        if rounds == 0 {
            first_v = next_v.clone();
            first_h = next_h.clone();
        }
        pool.extend(horiz);
        pool.extend(vert);
        pool = dedup_candidates(pool);
        vert = next_v;
        horiz = next_h;
        rounds += 1;
    }
    pool.extend(horiz);
    pool.extend(vert);
    pool.extend(initial.iter().cloned());
    let pool = dedup_candidates(pool);
    timings.combination = t1.elapsed();

    let t2 = Instant::now();
    let with = |extra: &[&[Candidate]]| -> Vec<Candidate> {
        let mut v = initial.clone();
        for e in extra {
            v.extend(e.iter().cloned());
        }
        dedup_candidates(v)
    };
    let mut stages = vec![select(Stage::Cycles, initial.clone(), &ctx)];
    if !cfg.cycles_only {
        stages.push(select(Stage::Vertical, with(&[&first_v]), &ctx));
        stages.push(select(Stage::Horizontal, with(&[&first_h]), &ctx));
        stages.push(select(Stage::FirstRound, with(&[&first_v, &first_h]), &ctx));
        stages.push(select(Stage::Final, pool.clone(), &ctx));
    }
    timings.selection = t2.elapsed();

    // Later stages win ties.
    let best = stages.iter().rev().min_by(|a, b| a.report.total.total_cmp(&b.report.total)).map(|s| s.stage).unwrap();
    MiningResult { best, stages, rounds, pool, timings }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::EventId;

    fn ctx(seq: &EventSequence) -> Context<'_> {
        Context::new(seq, SeqStats::of(seq), CodecOptions::default())
    }

    fn with_cost(mut c: Candidate, cost: f64) -> Candidate {
        c.cost = cost;
        c.efficiency = cost / c.cover.len() as f64;
        c
    }

    #[test]
    fn filter_same_cover() {
        let seq = EventSequence::from_labeled(&[0, 10, 20, 30].map(|t| (t, "a"))).unwrap();
        let ctx = ctx(&seq);
        let p = Pattern::from_cycle(&crate::Cycle::new(EventId(0), 4, 10, 0, vec![0; 3])).unwrap();
        let a = with_cost(ctx.candidate(p.clone(), Provenance::Dp).unwrap(), 10.0);
        let mut b = with_cost(a.clone(), 12.0);
        b.pattern = Pattern::new(p.tree.clone(), 0, vec![0, 0, 0]).unwrap();
        b.pattern.tree.root.period = 10;
        b.provenance = Provenance::Tri;
        let kept = filter_candidates(vec![b, a], 1);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].cost, 10.0);
    }

    #[test]
    fn filter_disjoint() {
        let seq =
            EventSequence::from_labeled(&[(0, "a"), (10, "a"), (20, "a"), (1, "b"), (6, "b"), (11, "b")]).unwrap();
        let ctx = ctx(&seq);
        let a = ctx
            .score(Pattern::from_cycle(&crate::Cycle::new(EventId(0), 3, 10, 0, vec![0; 2])).unwrap(), Provenance::Dp);
        let b = ctx
            .score(Pattern::from_cycle(&crate::Cycle::new(EventId(1), 3, 5, 1, vec![0; 2])).unwrap(), Provenance::Dp);
        let (a, b) = (with_cost(a.unwrap(), 5.0), with_cost(b.unwrap(), 50.0));
        assert_eq!(filter_candidates(vec![a, b], 1).len(), 2);
    }

    #[test]
    fn perfect_single_event() {
        let seq = EventSequence::from_labeled(&(0..20).map(|i| (7 * i, "a")).collect::<Vec<_>>()).unwrap();
        let res = mine(&seq, &MiningConfig::default());
        let sel = res.selection();
        assert_eq!(sel.patterns.len(), 1);
        assert!(sel.residuals.is_empty());
        assert!(res.best_stage().report.percent_l < 50.0);
    }

    #[test]
    fn empty_pool_selects_nothing() {
        let seq = EventSequence::from_labeled(&[(0, "a"), (5, "b")]).unwrap();
        let ctx = ctx(&seq);
        let sel = greedy_cover(&[], &ctx);
        assert!(sel.patterns.is_empty());
        assert_eq!(sel.residuals.len(), 2);
        assert_eq!(sel.total, ctx.residual_sum(seq.pairs()));
    }
}
