//! Event sequences: ingestion, projections and summary statistics.
use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::BufRead;

use serde::Serialize;

use crate::error::{domain, Error, Result};

pub type Timestamp = i64;

/// Dense event identifier, assigned in order of first appearance in time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct EventId(pub u32);

impl EventId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A `(timestamp, event)` pair.
pub type Occurrence = (Timestamp, EventId);

/// Label used for events folded together by rare-event aggregation.
pub const OTHER_LABEL: &str = "<other>";

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Alphabet {
    labels: Vec<String>,
    index: HashMap<String, EventId>,
}

impl Alphabet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_labels<S: AsRef<str>>(labels: &[S]) -> Self {
        let mut a = Self::new();
        for l in labels {
            a.intern(l.as_ref());
        }
        a
    }

    pub fn intern(&mut self, label: &str) -> EventId {
        if let Some(&id) = self.index.get(label) {
            return id;
        }
        let id = EventId(self.labels.len() as u32);
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), id);
        id
    }

    pub fn get(&self, label: &str) -> Option<EventId> {
        self.index.get(label).copied()
    }

    pub fn label(&self, id: EventId) -> &str {
        &self.labels[id.index()]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Separator {
    /// Tab if the line has one, comma otherwise.
    #[default]
    Auto,
    Tab,
    Comma,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IngestOptions {
    pub separator: Separator,
    pub granularity: i64,
    pub succession: bool,
    pub rare_threshold: Option<usize>,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions { separator: Separator::Auto, granularity: 1, succession: false, rare_threshold: None }
    }
}

/// Sorted set of `(t, e)` pairs with per-event projections.
#[derive(Clone, Debug)]
pub struct EventSequence {
    pairs: Vec<Occurrence>,
    alphabet: Alphabet,
    per_event: Vec<Vec<Timestamp>>,
    duplicates_collapsed: usize,
}

// The collapsed-duplicate counter is ingestion metadata, not content.
impl PartialEq for EventSequence {
    fn eq(&self, other: &Self) -> bool {
        self.pairs == other.pairs && self.alphabet == other.alphabet
    }
}

impl Eq for EventSequence {}

impl EventSequence {
    /// Builds a sequence over `alphabet`. Pairs are sorted and exact
    /// duplicates dropped.
    pub fn from_pairs(alphabet: Alphabet, pairs: impl IntoIterator<Item = Occurrence>) -> Result<Self> {
        let mut pairs: Vec<Occurrence> = pairs.into_iter().collect();
        for &(t, e) in &pairs {
            if t < 0 {
                return Err(domain(format!("negative timestamp {t}")));
            }
            if e.index() >= alphabet.len() {
                return Err(domain(format!("event id {} outside alphabet", e.0)));
            }
        }
        let before = pairs.len();
        pairs.sort_unstable();
        pairs.dedup();
        let mut per_event = vec![Vec::new(); alphabet.len()];
        for &(t, e) in &pairs {
            per_event[e.index()].push(t);
        }
        Ok(EventSequence { duplicates_collapsed: before - pairs.len(), pairs, alphabet, per_event })
    }

    /// Builds a sequence from labelled pairs, assigning ids by first
    /// appearance in time (ties keep input order).
    pub fn from_labeled<S: AsRef<str>>(pairs: &[(Timestamp, S)]) -> Result<Self> {
        let mut order: Vec<usize> = (0..pairs.len()).collect();
        order.sort_by_key(|&i| pairs[i].0);
        let mut alphabet = Alphabet::new();
        for &i in &order {
            alphabet.intern(pairs[i].1.as_ref());
        }
        let ids: Vec<Occurrence> = pairs.iter().map(|(t, l)| (*t, alphabet.get(l.as_ref()).unwrap())).collect();
        Self::from_pairs(alphabet, ids)
    }

    pub fn pairs(&self) -> &[Occurrence] {
        &self.pairs
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn occurrences_of(&self, e: EventId) -> &[Timestamp] {
        &self.per_event[e.index()]
    }

    pub fn count(&self, e: EventId) -> usize {
        self.per_event.get(e.index()).map_or(0, Vec::len)
    }

    pub fn events(&self) -> impl Iterator<Item = EventId> + '_ {
        (0..self.alphabet.len()).map(|i| EventId(i as u32))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn t_start(&self) -> Timestamp {
        self.pairs.first().map_or(0, |p| p.0)
    }

    pub fn t_end(&self) -> Timestamp {
        self.pairs.last().map_or(0, |p| p.0)
    }

    pub fn span(&self) -> Timestamp {
        self.t_end() - self.t_start()
    }

    pub fn duplicates_collapsed(&self) -> usize {
        self.duplicates_collapsed
    }

    pub fn contains(&self, o: &Occurrence) -> bool {
        self.pairs.binary_search(o).is_ok()
    }

    /// Serialized form: one `t<TAB>label` line per pair, sorted.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for &(t, e) in &self.pairs {
            let _ = writeln!(s, "{t}\t{}", self.alphabet.label(e));
        }
        s
    }

    pub fn stats(&self) -> SequenceSummary {
        let counts: Vec<usize> = self.per_event.iter().map(Vec::len).collect();
        let mut sorted = counts.clone();
        sorted.sort_unstable();
        let median = match sorted.len() {
            0 => 0.0,
            n if n % 2 == 1 => sorted[n / 2] as f64,
            n => (sorted[n / 2 - 1] + sorted[n / 2]) as f64 / 2.0,
        };
        SequenceSummary {
            len: self.len(),
            span: self.span(),
            t_start: self.t_start(),
            t_end: self.t_end(),
            alphabet_size: self.alphabet.len(),
            per_event_counts: self.alphabet.labels().iter().cloned().zip(counts.iter().copied()).collect(),
            median_count: median,
            max_count: sorted.last().copied().unwrap_or(0),
            duplicates_collapsed: self.duplicates_collapsed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SequenceSummary {
    pub len: usize,
    pub span: Timestamp,
    pub t_start: Timestamp,
    pub t_end: Timestamp,
    pub alphabet_size: usize,
    pub per_event_counts: Vec<(String, usize)>,
    pub median_count: f64,
    pub max_count: usize,
    pub duplicates_collapsed: usize,
}

fn split_line(line: &str, sep: Separator) -> Option<(&str, &str)> {
    let c = match sep {
        Separator::Tab => '\t',
        Separator::Comma => ',',
        Separator::Auto if line.contains('\t') => '\t',
        Separator::Auto => ',',
    };
    line.split_once(c)
}

/// Reads `t<sep>label` lines. Lines starting with `#` are skipped.
pub fn load_sequence<R: BufRead>(source: R, opts: &IngestOptions) -> Result<EventSequence> {
    if opts.granularity < 1 {
        return Err(domain("granularity must be at least 1"));
    }
    let mut raw: Vec<(Timestamp, String)> = Vec::new();
    for (no, line) in source.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let lineno = no + 1;
        let (ts, label) = split_line(line, opts.separator)
            .ok_or_else(|| Error::Parse { line: lineno, msg: "missing separator".into() })?;
        let t: i64 = ts
            .trim()
            .parse()
            .map_err(|_| Error::Parse { line: lineno, msg: format!("bad timestamp {:?}", ts.trim()) })?;
        if t < 0 {
            return Err(domain(format!("line {lineno}: negative timestamp {t}")));
        }
        let label = label.trim();
        if label.is_empty() {
            return Err(Error::Parse { line: lineno, msg: "empty event label".into() });
        }
        raw.push((t, label.to_string()));
    }
    if raw.is_empty() {
        return Err(Error::EmptySequence);
    }
    for (rank, r) in raw.iter_mut().enumerate() {
        r.0 = if opts.succession { rank as i64 } else { r.0.div_euclid(opts.granularity) };
    }
    if let Some(threshold) = opts.rare_threshold {
        let mut distinct = raw.clone();
        distinct.sort();
        distinct.dedup();
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for (_, l) in &distinct {
            *counts.entry(l.as_str()).or_default() += 1;
        }
        let rare: Vec<String> =
            counts.into_iter().filter(|&(_, c)| c < threshold).map(|(l, _)| l.to_string()).collect();
        for r in raw.iter_mut() {
            if rare.contains(&r.1) {
                r.1 = OTHER_LABEL.to_string();
            }
        }
    }
    EventSequence::from_labeled(&raw)
}

/// Convenience wrapper over [`load_sequence`] for in-memory text.
pub fn parse_sequence(text: &str, opts: &IngestOptions) -> Result<EventSequence> {
    load_sequence(text.as_bytes(), opts)
}
