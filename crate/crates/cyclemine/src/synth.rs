//! Synthetic sequences with planted patterns, shift and additive noise,
//! and recovery scoring.
use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;
use std::ops::RangeInclusive;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codec::{collection_cost, CodecOptions, SeqStats};
use crate::error::{domain, Error, Result};
use crate::pattern::{format_pattern, pattern_occurrences, Block, Node, Pattern, PatternTree};
use crate::sequence::{Alphabet, EventId, EventSequence, Occurrence, Timestamp};

/// Innermost repeated unit of a plant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    /// `(a)`
    Single,
    /// `(a [d=4] b)`
    Pair,
    /// `(a [d=1] c [d=2] d)`
    Quad,
}

impl Basis {
    fn parts(self) -> (&'static [&'static str], &'static [i64]) {
        match self {
            Basis::Single => (&["a"], &[]),
            Basis::Pair => (&["a", "b"], &[4]),
            Basis::Quad => (&["a", "c", "d"], &[1, 2]),
        }
    }

    fn parse(s: &str) -> Option<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace() && !"()[]=d".contains(*c)).collect();
        match compact.as_str() {
            "a" => Some(Basis::Single),
            "a4b" => Some(Basis::Pair),
            "a1c2" => Some(Basis::Quad),
            _ => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Basis::Single => "a",
            Basis::Pair => "a4b",
            Basis::Quad => "a1c2d",
        }
    }
}

/// Parameters of a synthetic plant. Ranges are inclusive and sampled
/// uniformly.
#[derive(Clone, Debug, PartialEq)]
pub struct PlantSpec {
    pub basis: Basis,
    /// Number of nested cycle levels, 1 to 3.
    pub depth: usize,
    pub inner_period: RangeInclusive<i64>,
    pub inner_length: RangeInclusive<i64>,
    pub outer_length: RangeInclusive<i64>,
    /// Idle time between outer repetitions of non-interleaved plants.
    pub outer_gap: RangeInclusive<i64>,
    pub start: RangeInclusive<i64>,
    /// Largest absolute displacement.
    pub shift_level: i64,
    /// Fraction of occurrences (after the first) displaced.
    pub shift_density: f64,
    /// Spurious `a` occurrences, as a fraction of the planted `a` count.
    pub additive_density: f64,
    /// Outer repetitions may start before the previous one ends.
    pub interleaving: bool,
    /// Number of independent plants merged into one sequence, each over
    /// its own labels.
    pub patterns: usize,
    /// Merged plants share the same time window instead of following each
    /// other.
    pub overlap: bool,
    pub seed: u64,
}

impl Default for PlantSpec {
    fn default() -> Self {
        PlantSpec {
            basis: Basis::Single,
            depth: 1,
            inner_period: 5..=9,
            inner_length: 5..=10,
            outer_length: 3..=5,
            outer_gap: 1..=10,
            start: 0..=10,
            shift_level: 0,
            shift_density: 0.0,
            additive_density: 0.0,
            interleaving: false,
            patterns: 1,
            overlap: false,
            seed: 0,
        }
    }
}

fn parse_range(v: &str) -> Option<RangeInclusive<i64>> {
    match v.split_once("..") {
        Some((a, b)) => Some(a.trim().parse().ok()?..=b.trim().parse().ok()?),
        None => {
            let x = v.trim().parse().ok()?;
            Some(x..=x)
        }
    }
}

fn show_range(r: &RangeInclusive<i64>) -> String {
    format!("{}..{}", r.start(), r.end())
}

impl PlantSpec {
    /// Reads `key = value` lines; `#` starts a comment. Unset keys keep
    /// their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut s = PlantSpec::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: &str| Error::Parse { line: no + 1, msg: msg.to_string() };
            let (k, v) = line.split_once('=').ok_or_else(|| bad("expected key = value"))?;
            let v = v.trim();
            let range = || parse_range(v).ok_or_else(|| bad("expected an integer or lo..hi"));
            let num = || v.parse::<f64>().map_err(|_| bad("expected a number"));
            let int = || v.parse::<u64>().map_err(|_| bad("expected a non-negative integer"));
            let flag = || v.parse::<bool>().map_err(|_| bad("expected true or false"));
            match k.trim() {
                "basis" => s.basis = Basis::parse(v).ok_or_else(|| bad("unknown basis"))?,
                "depth" => s.depth = int()? as usize,
                "inner_period" => s.inner_period = range()?,
                "inner_length" => s.inner_length = range()?,
                "outer_length" => s.outer_length = range()?,
                "outer_gap" => s.outer_gap = range()?,
                "start" => s.start = range()?,
                "shift_level" => s.shift_level = int()? as i64,
                "shift_density" => s.shift_density = num()?,
                "additive_density" => s.additive_density = num()?,
                "interleaving" => s.interleaving = flag()?,
                "patterns" => s.patterns = int()? as usize,
                "overlap" => s.overlap = flag()?,
                "seed" => s.seed = int()?,
                other => return Err(bad(&format!("unknown key {other:?}"))),
            }
        }
        s.validate()?;
        Ok(s)
    }

    pub fn to_config(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "basis = {}", self.basis.name());
        let _ = writeln!(out, "depth = {}", self.depth);
        let _ = writeln!(out, "inner_period = {}", show_range(&self.inner_period));
        let _ = writeln!(out, "inner_length = {}", show_range(&self.inner_length));
        let _ = writeln!(out, "outer_length = {}", show_range(&self.outer_length));
        let _ = writeln!(out, "outer_gap = {}", show_range(&self.outer_gap));
        let _ = writeln!(out, "start = {}", show_range(&self.start));
        let _ = writeln!(out, "shift_level = {}", self.shift_level);
        let _ = writeln!(out, "shift_density = {}", self.shift_density);
        let _ = writeln!(out, "additive_density = {}", self.additive_density);
        let _ = writeln!(out, "interleaving = {}", self.interleaving);
        let _ = writeln!(out, "patterns = {}", self.patterns);
        let _ = writeln!(out, "overlap = {}", self.overlap);
        let _ = writeln!(out, "seed = {}", self.seed);
        out
    }

    pub fn validate(&self) -> Result<()> {
        let density = |d: f64| (0.0..=1.0).contains(&d);
        if !(1..=3).contains(&self.depth) {
            return Err(domain("depth must be 1, 2 or 3"));
        }
        if !density(self.shift_density) || !density(self.additive_density) {
            return Err(domain("densities must lie in [0, 1]"));
        }
        if self.shift_level < 0 || (self.shift_level == 0 && self.shift_density > 0.0) {
            return Err(domain("shift noise needs a positive level"));
        }
        if self.patterns == 0 {
            return Err(domain("at least one pattern"));
        }
        for (name, r, min) in [
            ("inner_period", &self.inner_period, 1),
            ("inner_length", &self.inner_length, 2),
            ("outer_length", &self.outer_length, 2),
            ("outer_gap", &self.outer_gap, 1),
            ("start", &self.start, 0),
        ] {
            if r.is_empty() || *r.start() < min {
                return Err(domain(format!("{name} range must be non-empty with values >= {min}")));
            }
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        PlantSpec { seed, ..self.clone() }
    }
}

/// Planted patterns and the sequences they generate.
#[derive(Clone, Debug)]
pub struct GroundTruth {
    /// Plants before shift noise.
    pub planted_clean: Vec<Pattern>,
    /// Plants with corrections absorbing the shift noise.
    pub planted: Vec<Pattern>,
    /// Union of the clean plant covers.
    pub clean: EventSequence,
    /// Shifted plants plus spurious occurrences.
    pub perturbed: EventSequence,
}

struct Plant {
    clean: Pattern,
    noisy: Pattern,
    spurious: Vec<Occurrence>,
}

fn build_tree(spec: &PlantSpec, rng: &mut ChaCha8Rng, ids: &[EventId]) -> Result<PatternTree> {
    let (_, dists) = spec.basis.parts();
    let leaves = ids.iter().map(|&e| Node::Leaf(e)).collect();
    let mut block = Block::new(
        rng.gen_range(spec.inner_length.clone()),
        rng.gen_range(spec.inner_period.clone()),
        leaves,
        dists.to_vec(),
    );
    for _ in 1..spec.depth {
        let extent = Node::Block(block.clone()).extent();
        let length = rng.gen_range(spec.outer_length.clone());
        let mut outer = None;
        for _ in 0..100 {
            let period = if spec.interleaving {
                rng.gen_range(1..=extent.max(1))
            } else {
                extent + rng.gen_range(spec.outer_gap.clone())
            };
            let b = Block::new(length, period, vec![Node::Block(block.clone())], vec![]);
            let tree = PatternTree::new(b.clone())?;
            if !tree.classify().overlaps {
                outer = Some(b);
                break;
            }
        }
        block = outer.ok_or_else(|| domain("could not place outer repetitions without collisions"))?;
    }
    PatternTree::new(block)
}

fn plant(spec: &PlantSpec, rng: &mut ChaCha8Rng, ids: &[EventId], offset: i64) -> Result<Plant> {
    let tree = build_tree(spec, rng, ids)?;
    let start = offset + rng.gen_range(spec.start.clone());
    let clean = Pattern::perfect(tree.clone(), start);
    let mut occ = clean.occurrence_list();
    let n = occ.len();

    let mut taken: HashSet<Occurrence> = occ.iter().copied().collect();
    let shifts = (spec.shift_density * (n - 1) as f64).ceil() as usize;
    if shifts > 0 {
        // Per-event neighbours in time bound where a displaced occurrence may go.
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| occ[i]);
        let mut moved = 0;
        let mut pool: Vec<usize> = sample(rng, n - 1, n - 1).into_iter().map(|i| i + 1).collect();
        pool.reverse();
        while moved < shifts {
            let i = pool.pop().ok_or_else(|| domain("not enough room to displace occurrences"))?;
            let (t, e) = occ[i];
            let same: Vec<Timestamp> = {
                let mut v: Vec<Timestamp> = occ.iter().filter(|o| o.1 == e).map(|o| o.0).collect();
                v.sort_unstable();
                v
            };
            let pos = same.binary_search(&t).unwrap();
            let lo = if pos == 0 { 0 } else { same[pos - 1] + 1 };
            let hi = same.get(pos + 1).map_or(i64::MAX, |&x| x - 1);
            for _ in 0..20 {
                let mut d = rng.gen_range(-spec.shift_level..=spec.shift_level - 1);
                if d >= 0 {
                    d += 1;
                }
                let nt = t + d;
                if nt >= lo && nt <= hi && nt >= 0 && !taken.contains(&(nt, e)) {
                    taken.remove(&(t, e));
                    taken.insert((nt, e));
                    occ[i].0 = nt;
                    moved += 1;
                    break;
                }
            }
        }
    }
    let targets: Vec<Timestamp> = occ.iter().map(|o| o.0).collect();
    let noisy = Pattern::fit_to(tree, &targets)?;

    let a = ids[0];
    let count_a = occ.iter().filter(|o| o.1 == a).count();
    let extra = (spec.additive_density * count_a as f64).ceil() as usize;
    let (t0, t1) = (targets.iter().min().copied().unwrap(), targets.iter().max().copied().unwrap());
    let free: Vec<Timestamp> = (t0..=t1).filter(|&t| !taken.contains(&(t, a))).collect();
    if free.len() < extra {
        return Err(domain("not enough free timestamps for additive noise"));
    }
    let mut spurious: Vec<Occurrence> = sample(rng, free.len(), extra).into_iter().map(|i| (free[i], a)).collect();
    spurious.sort_unstable();
    Ok(Plant { clean, noisy, spurious })
}

/// Generates the plants described by `spec`. Deterministic in the seed.
pub fn generate(spec: &PlantSpec) -> Result<GroundTruth> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (labels, _) = spec.basis.parts();
    let mut alphabet = Alphabet::new();
    let mut plants = Vec::with_capacity(spec.patterns);
    let mut offset = 0;
    for k in 0..spec.patterns {
        let ids: Vec<EventId> = labels
            .iter()
            .map(|l| alphabet.intern(&if spec.patterns == 1 { l.to_string() } else { format!("{l}{k}") }))
            .collect();
        let p = plant(spec, &mut rng, &ids, offset)?;
        if !spec.overlap {
            let end = pattern_occurrences(&p.noisy)?.last().map_or(0, |o| o.0);
            let spur_end = p.spurious.last().map_or(0, |o| o.0);
            offset = end.max(spur_end) + 1;
        }
        plants.push(p);
    }
    let mut clean_pairs = Vec::new();
    let mut noisy_pairs = Vec::new();
    for p in &plants {
        clean_pairs.extend(pattern_occurrences(&p.clean)?);
        noisy_pairs.extend(pattern_occurrences(&p.noisy)?);
        noisy_pairs.extend(p.spurious.iter().copied());
    }
    Ok(GroundTruth {
        planted_clean: plants.iter().map(|p| p.clean.clone()).collect(),
        planted: plants.iter().map(|p| p.noisy.clone()).collect(),
        clean: EventSequence::from_pairs(alphabet.clone(), clean_pairs)?,
        perturbed: EventSequence::from_pairs(alphabet, noisy_pairs)?,
    })
}

impl GroundTruth {
    /// Sequence text and the planted patterns in notation, one per line.
    pub fn export(&self) -> (String, String) {
        let al = self.perturbed.alphabet();
        let mut patterns = String::new();
        for p in &self.planted {
            let _ = writeln!(patterns, "{}", format_pattern(p, al));
        }
        (self.perturbed.to_text(), patterns)
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct Evaluation {
    pub exact_recovery: bool,
    pub percent_l_found: f64,
    pub percent_l_planted: f64,
    /// `percent_l_found - percent_l_planted`.
    pub diff: f64,
}

/// Compares a found collection with the plants, both scored against `seq`.
pub fn evaluate(
    found: &[Pattern],
    planted: &[Pattern],
    seq: &EventSequence,
    opts: &CodecOptions,
) -> Result<Evaluation> {
    let stats = SeqStats::of(seq);
    let key = |ps: &[Pattern]| -> Result<Vec<(PatternTree, Vec<Occurrence>)>> {
        let mut v = ps.iter().map(|p| Ok((p.tree.clone(), pattern_occurrences(p)?))).collect::<Result<Vec<_>>>()?;
        v.sort();
        Ok(v)
    };
    let exact_recovery = key(found)? == key(planted)?;
    let f = collection_cost::<f64>(found, seq, &stats, opts)?.percent_l;
    let h = collection_cost::<f64>(planted, seq, &stats, opts)?.percent_l;
    Ok(Evaluation { exact_recovery, percent_l_found: f, percent_l_planted: h, diff: f - h })
}

/// Distinct labels used by a spec's plants.
pub fn labels(truth: &GroundTruth) -> BTreeSet<String> {
    truth.perturbed.alphabet().labels().iter().cloned().collect()
}
