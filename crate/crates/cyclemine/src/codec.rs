//! Code lengths of residual occurrences, patterns and whole collections.
use std::collections::BTreeSet;

use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::error::{domain, uncodable, Result};
use crate::pattern::{pattern_occurrences, Block, Cycle, Node, Pattern, ShapeClass};
use crate::scalar::Bits;
use crate::sequence::{EventId, EventSequence, Occurrence, Timestamp};

/// Sequence-level quantities every cost depends on. Passed explicitly so a
/// caller can score against an enclosing context window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeqStats {
    pub len: i64,
    pub t_start: Timestamp,
    pub t_end: Timestamp,
    pub counts: Vec<i64>,
}

impl SeqStats {
    pub fn new(len: i64, t_start: Timestamp, t_end: Timestamp, counts: Vec<i64>) -> Result<Self> {
        if t_end < t_start {
            return Err(domain("context ends before it starts"));
        }
        Ok(SeqStats { len, t_start, t_end, counts })
    }

    pub fn of(seq: &EventSequence) -> Self {
        SeqStats {
            len: seq.len() as i64,
            t_start: seq.t_start(),
            t_end: seq.t_end(),
            counts: seq.events().map(|e| seq.count(e) as i64).collect(),
        }
    }

    /// Same counts over a wider (or narrower) time window.
    pub fn with_window(&self, t_start: Timestamp, t_end: Timestamp) -> Result<Self> {
        SeqStats::new(self.len, t_start, t_end, self.counts.clone())
    }

    pub fn span(&self) -> i64 {
        self.t_end - self.t_start
    }

    pub fn count(&self, e: EventId) -> Result<i64> {
        match self.counts.get(e.index()) {
            Some(&c) if c > 0 => Ok(c),
            _ => Err(domain(format!("event {} has no occurrences", e.0))),
        }
    }
}

/// How inter-block distances are charged.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DistanceCoding {
    /// `log2(w + 1)`: a distance takes one of the values `0..=w`.
    #[default]
    Range,
    /// `log2(w)`, zero when `w <= 1`.
    Width,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CodecOptions {
    pub allow_interleaving: bool,
    pub distance_coding: DistanceCoding,
}

impl Default for CodecOptions {
    fn default() -> Self {
        CodecOptions { allow_interleaving: true, distance_coding: DistanceCoding::Range }
    }
}

impl CodecOptions {
    pub fn interleaving(allow: bool) -> Self {
        CodecOptions { allow_interleaving: allow, ..Default::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DTermKind {
    /// Width of one root repetition.
    Width,
    /// Period of an inner block.
    Period,
    /// Inter-block distance.
    Distance,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DTerm<F> {
    pub kind: DTermKind,
    pub value: i64,
    pub bits: F,
}

/// Per-component code length of one pattern.
#[derive(Clone, Debug, PartialEq)]
pub struct CostBreakdown<F> {
    pub a: F,
    pub r: F,
    pub p0: F,
    pub d: F,
    pub tau: F,
    pub e: F,
    /// Itemized terms making up `d`, in tree order.
    pub d_terms: Vec<DTerm<F>>,
}

impl<F: Bits> CostBreakdown<F> {
    pub fn total(&self) -> F {
        self.a + self.r + self.p0 + self.d + self.tau + self.e
    }
}

impl<F: Bits> Serialize for CostBreakdown<F> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("CostBreakdown", 7)?;
        st.serialize_field("A", &self.a)?;
        st.serialize_field("R", &self.r)?;
        st.serialize_field("p0", &self.p0)?;
        st.serialize_field("D", &self.d)?;
        st.serialize_field("tau", &self.tau)?;
        st.serialize_field("E", &self.e)?;
        st.serialize_field("total", &self.total())?;
        st.end()
    }
}

fn log3<F: Bits>() -> F {
    F::lg(3)
}

/// Code length of one event symbol inside a pattern's event string.
fn pattern_event_code<F: Bits>(stats: &SeqStats, e: EventId) -> Result<F> {
    let c = stats.count(e)?;
    Ok(F::lg(3 * stats.len) - F::lg(c))
}

/// `log2(Δ+1) - log2(|S[α]| / |S|)`.
pub fn residual_cost<F: Bits>(stats: &SeqStats, e: EventId) -> Result<F> {
    let c = stats.count(e)?;
    Ok(F::lg(stats.span() + 1) + (F::lg(stats.len) - F::lg(c)))
}

/// `2|E| + Σ|e|`.
pub fn corrections_cost<F: Bits>(corrections: &[i64]) -> F {
    F::of(2 * corrections.len() as i64 + corrections.iter().map(|e| e.abs()).sum::<i64>())
}

/// Cost of a single-event cycle from its summary numbers. Both the
/// segmentation search and [`pattern_cost`] go through here so the two
/// agree to the last bit.
pub(crate) fn simple_cycle_cost<F: Bits>(
    stats: &SeqStats,
    event: EventId,
    length: i64,
    period: i64,
    drift: i64,
    abs_sum: i64,
) -> Result<CostBreakdown<F>> {
    let count = stats.count(event)?;
    if length > count {
        return Err(uncodable(format!("cycle of length {length} over an event seen {count} times")));
    }
    let delta = stats.span();
    let bound = (delta - drift).div_euclid(length - 1);
    if bound < 1 || period > bound {
        return Err(uncodable(format!("period {period} outside 1..={bound}")));
    }
    let tau_range = delta - drift - (length - 1) * period + 1;
    if tau_range < 1 {
        return Err(uncodable("cycle longer than the sequence"));
    }
    Ok(CostBreakdown {
        a: log3::<F>() + log3::<F>() + pattern_event_code(stats, event)?,
        r: F::lg(count),
        p0: F::lg(bound),
        d: F::zero(),
        tau: F::lg(tau_range),
        e: F::of(2 * (length - 1) + abs_sum),
        d_terms: Vec::new(),
    })
}

fn event_string_cost<F: Bits>(b: &Block, stats: &SeqStats) -> Result<F> {
    let mut bits = log3::<F>() + log3::<F>();
    for c in &b.children {
        bits = bits
            + match c {
                Node::Leaf(e) => pattern_event_code(stats, *e)?,
                Node::Block(inner) => event_string_cost(inner, stats)?,
            };
    }
    Ok(bits)
}

/// Smallest count among the leaves under `b`.
fn rarest(b: &Block, stats: &SeqStats) -> Result<i64> {
    let mut m = i64::MAX;
    for c in &b.children {
        m = m.min(match c {
            Node::Leaf(e) => stats.count(*e)?,
            Node::Block(inner) => rarest(inner, stats)?,
        });
    }
    Ok(m)
}

fn lengths_cost<F: Bits>(b: &Block, stats: &SeqStats) -> Result<F> {
    let rho = rarest(b, stats)?;
    if b.length > rho {
        return Err(uncodable(format!("block length {} exceeds {rho} occurrences", b.length)));
    }
    let mut bits = F::lg(rho);
    for c in &b.children {
        if let Node::Block(inner) = c {
            bits = bits + lengths_cost(inner, stats)?;
        }
    }
    Ok(bits)
}

fn distance_bits<F: Bits>(w: i64, coding: DistanceCoding) -> F {
    match coding {
        DistanceCoding::Range => F::lg(w + 1),
        DistanceCoding::Width if w <= 1 => F::zero(),
        DistanceCoding::Width => F::lg(w),
    }
}

/// Charges the distances and inner periods of `b`, given the maximum width
/// `w` one of its repetitions may take.
fn block_layout_cost<F: Bits>(b: &Block, w: i64, opts: &CodecOptions, terms: &mut Vec<DTerm<F>>) -> Result<()> {
    if b.distance_sum() > w {
        return Err(uncodable(format!("distances sum past the repetition width {w}")));
    }
    for &d in &b.distances {
        terms.push(DTerm { kind: DTermKind::Distance, value: d, bits: distance_bits(w, opts.distance_coding) });
    }
    let mut before = 0;
    for (i, c) in b.children.iter().enumerate() {
        if i > 0 {
            before += b.distances[i - 1];
        }
        let Node::Block(inner) = c else { continue };
        let budget = if opts.allow_interleaving {
            w - before
        } else if i + 1 < b.children.len() {
            b.distances[i]
        } else {
            w - b.distance_sum()
        };
        let bound = budget.div_euclid(inner.length - 1);
        if bound < 1 || inner.period > bound {
            return Err(uncodable(format!("inner period {} outside 1..={bound}", inner.period)));
        }
        terms.push(DTerm { kind: DTermKind::Period, value: inner.period, bits: F::lg(bound) });
        let inner_w = if opts.allow_interleaving {
            budget - inner.length + 1
        } else {
            inner.period.min(budget.div_euclid(inner.length))
        };
        if inner_w < 0 {
            return Err(uncodable("no room left for an inner repetition"));
        }
        block_layout_cost(inner, inner_w, opts, terms)?;
    }
    Ok(())
}

/// Full code length of a pattern.
pub fn pattern_cost_with<F: Bits>(p: &Pattern, stats: &SeqStats, opts: &CodecOptions) -> Result<CostBreakdown<F>> {
    let n = p.occurrence_count();
    if p.corrections.len() + 1 != n {
        return Err(domain("correction count does not match the tree"));
    }
    if let Some(event) = p.tree.as_simple() {
        let drift = p.corrections.iter().sum();
        let abs_sum = p.corrections.iter().map(|e| e.abs()).sum();
        return simple_cycle_cost(stats, event, p.tree.root.length, p.tree.root.period, drift, abs_sum);
    }
    let root = &p.tree.root;
    let (r0, p0) = (root.length, root.period);
    let a = event_string_cost::<F>(root, stats)?;
    let r = lengths_cost::<F>(root, stats)?;
    let e = corrections_cost::<F>(&p.corrections);

    let x = p.tree.expand();
    let cume = crate::pattern::accumulate_corrections(p)?;
    let last_rep = (r0 as usize - 1) * (n / r0 as usize);
    let anchor_drift = cume[last_rep];

    let delta = stats.span();
    let bound = (delta - anchor_drift).div_euclid(r0 - 1);
    if bound < 1 || p0 > bound {
        return Err(uncodable(format!("period {p0} outside 1..={bound}")));
    }
    let tau_range = delta - anchor_drift - (r0 - 1) * p0 + 1;
    if tau_range < 1 {
        return Err(uncodable("pattern longer than the sequence"));
    }

    let width = root.rep_width();
    if !opts.allow_interleaving && width > p0 {
        return Err(uncodable("repetitions overlap but interleaving is disabled"));
    }
    // Latest perfect occurrence; among ties the smallest offset.
    let latest = *x.times.iter().max().unwrap();
    let end_drift = (0..n).filter(|&i| x.times[i] == latest).map(|i| cume[i]).min().unwrap();
    let max_width = stats.t_end - end_drift - (r0 - 1) * p0 - p.start;
    if width > max_width {
        return Err(uncodable(format!("repetition width {width} exceeds {max_width}")));
    }
    let mut terms = vec![DTerm { kind: DTermKind::Width, value: width, bits: F::lg(max_width + 1) }];
    block_layout_cost(root, width, opts, &mut terms)?;
    let d = terms.iter().fold(F::zero(), |acc, t| acc + t.bits);

    Ok(CostBreakdown { a, r, p0: F::lg(bound), d, tau: F::lg(tau_range), e, d_terms: terms })
}

pub fn pattern_cost<F: Bits>(p: &Pattern, stats: &SeqStats, allow_interleaving: bool) -> Result<CostBreakdown<F>> {
    pattern_cost_with(p, stats, &CodecOptions::interleaving(allow_interleaving))
}

pub fn cycle_cost<F: Bits>(c: &Cycle, stats: &SeqStats) -> Result<F> {
    c.cover()?;
    simple_cycle_cost(stats, c.event, c.length, c.period, c.drift(), c.corrections.iter().map(|e| e.abs()).sum())
        .map(|b| b.total())
}

/// Residual code length of every pair, summed in order.
pub fn residual_total<F: Bits>(pairs: &[Occurrence], stats: &SeqStats) -> Result<F> {
    let mut bits = F::zero();
    for &(_, e) in pairs {
        bits = bits + residual_cost::<F>(stats, e)?;
    }
    Ok(bits)
}

/// Cost-effective: cheaper than encoding `pairs` as residuals.
pub fn is_cost_effective<F: Bits>(
    p: &Pattern,
    pairs: &[Occurrence],
    stats: &SeqStats,
    opts: &CodecOptions,
) -> Result<bool> {
    let cost = pattern_cost_with::<F>(p, stats, opts)?.total();
    Ok(cost < residual_total::<F>(pairs, stats)?)
}

/// Bits per covered occurrence.
pub fn efficiency<F: Bits>(p: &Pattern, stats: &SeqStats, opts: &CodecOptions) -> Result<F> {
    let cost = pattern_cost_with::<F>(p, stats, opts)?.total();
    Ok(cost / F::of(pattern_occurrences(p)?.len() as i64))
}

/// Largest total absolute correction below which a `k`-cycle over `e` is
/// guaranteed to beat its residuals.
///
/// The structural overhead counts both delimiters and the extra `log2(3)`
/// an event symbol costs inside a pattern relative to a residual.
pub fn w_threshold<F: Bits>(k: i64, e: EventId, stats: &SeqStats) -> Result<F> {
    if k < 3 {
        return Err(domain("threshold defined for k >= 3"));
    }
    let count = stats.count(e)?;
    let event_code = F::lg(stats.len) - F::lg(count);
    let overhead = log3::<F>() * F::of(3);
    Ok(F::of(k - 2) * F::lg(stats.span() + 1) + F::of(k - 1) * event_code - overhead - F::lg(count) + F::lg(k - 1)
        - F::of(2 * k)
        + F::of(2))
}

/// Largest shift a triple may show and still extend a cycle profitably.
pub fn extension_margin<F: Bits>(stats: &SeqStats) -> F {
    F::lg(stats.span() + 1) - F::of(2)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct ShapeCounts {
    pub s: usize,
    pub v: usize,
    pub h: usize,
    pub m: usize,
}

impl ShapeCounts {
    pub fn add(&mut self, c: ShapeClass) {
        match c {
            ShapeClass::Simple => self.s += 1,
            ShapeClass::Vertical => self.v += 1,
            ShapeClass::Horizontal => self.h += 1,
            ShapeClass::Mixed => self.m += 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
#[serde(bound = "F: Bits")]
pub struct CollectionReport<F> {
    pub total: F,
    pub pattern_bits: F,
    pub residual_bits: F,
    pub residual_count: usize,
    pub baseline: F,
    /// `100 * (total / baseline)`; the ratio is taken first so a total
    /// equal to the baseline gives exactly 100.
    pub percent_l: F,
    /// Share of the total spent on residuals.
    pub lr: F,
    pub shapes: ShapeCounts,
    pub max_cover: usize,
    pub costs: Vec<CostBreakdown<F>>,
}

/// Scores a pattern collection against a sequence.
pub fn collection_cost<F: Bits>(
    patterns: &[Pattern],
    seq: &EventSequence,
    stats: &SeqStats,
    opts: &CodecOptions,
) -> Result<CollectionReport<F>> {
    let mut covered = BTreeSet::new();
    let mut costs = Vec::with_capacity(patterns.len());
    let mut shapes = ShapeCounts::default();
    let mut max_cover = 0;
    let mut pattern_bits = F::zero();
    for p in patterns {
        let occ = pattern_occurrences(p)?;
        if let Some(o) = occ.iter().find(|o| !seq.contains(o)) {
            return Err(domain(format!("pattern covers ({}, {}) which is not in the sequence", o.0, o.1 .0)));
        }
        max_cover = max_cover.max(occ.len());
        covered.extend(occ);
        let c = pattern_cost_with::<F>(p, stats, opts)?;
        pattern_bits = pattern_bits + c.total();
        costs.push(c);
        shapes.add(p.tree.classify().class);
    }
    let residuals: Vec<Occurrence> = seq.pairs().iter().filter(|o| !covered.contains(o)).copied().collect();
    let residual_bits = residual_total::<F>(&residuals, stats)?;
    let baseline = residual_total::<F>(seq.pairs(), stats)?;
    let total = pattern_bits + residual_bits;
    let hundred = F::of(100);
    let (percent_l, lr) = if baseline > F::zero() {
        (hundred * (total / baseline), if total > F::zero() { residual_bits / total } else { F::one() })
    } else {
        (hundred, F::one())
    };
    Ok(CollectionReport {
        total,
        pattern_bits,
        residual_bits,
        residual_count: residuals.len(),
        baseline,
        percent_l,
        lr,
        shapes,
        max_cover,
        costs,
    })
}
