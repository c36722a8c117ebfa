use serde::Serialize;

use crate::error::{Error, Result};
use crate::sequence::EventId;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Leaf(EventId),
    Block(Block),
}

/// Interior node: its children, separated by `distances`, repeat
/// `length` times every `period` steps.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Block {
    pub length: i64,
    pub period: i64,
    pub children: Vec<Node>,
    /// `distances[i]` separates child `i` from child `i + 1`.
    pub distances: Vec<i64>,
}

impl Block {
    pub fn new(length: i64, period: i64, children: Vec<Node>, distances: Vec<i64>) -> Self {
        Block { length, period, children, distances }
    }

    pub fn leaf_cycle(event: EventId, length: i64, period: i64) -> Self {
        Block::new(length, period, vec![Node::Leaf(event)], vec![])
    }

    fn validate(&self) -> Result<()> {
        if self.length < 2 || self.period < 1 {
            return Err(Error::InvalidPattern(format!("block with length {} and period {}", self.length, self.period)));
        }
        if self.children.is_empty() {
            return Err(Error::InvalidPattern("block without children".into()));
        }
        if self.distances.len() + 1 != self.children.len() || self.distances.iter().any(|&d| d < 0) {
            return Err(Error::InvalidPattern("bad inter-block distances".into()));
        }
        for c in &self.children {
            if let Node::Block(b) = c {
                b.validate()?;
            }
        }
        Ok(())
    }

    /// Occurrences produced by one repetition.
    pub fn occurrences_per_rep(&self) -> usize {
        self.children.iter().map(Node::occurrence_count).sum()
    }

    /// Largest relative perfect timestamp within one repetition.
    pub fn rep_width(&self) -> i64 {
        let mut offset = 0;
        let mut width = 0;
        for (i, c) in self.children.iter().enumerate() {
            if i > 0 {
                offset += self.distances[i - 1];
            }
            width = width.max(offset + c.extent());
        }
        width
    }

    pub fn distance_sum(&self) -> i64 {
        self.distances.iter().sum()
    }
}

impl Node {
    pub fn occurrence_count(&self) -> usize {
        match self {
            Node::Leaf(_) => 1,
            Node::Block(b) => b.length as usize * b.occurrences_per_rep(),
        }
    }

    /// Largest relative perfect timestamp of the node's expansion.
    pub fn extent(&self) -> i64 {
        match self {
            Node::Leaf(_) => 0,
            Node::Block(b) => (b.length - 1) * b.period + b.rep_width(),
        }
    }

    fn height(&self) -> usize {
        match self {
            Node::Leaf(_) => 0,
            Node::Block(b) => 1 + b.children.iter().map(Node::height).max().unwrap_or(0),
        }
    }

    fn leaves(&self, out: &mut Vec<EventId>) {
        match self {
            Node::Leaf(e) => out.push(*e),
            Node::Block(b) => b.children.iter().for_each(|c| c.leaves(out)),
        }
    }
}

/// Position of an occurrence in the expansion tree: child indices from the
/// root down to the leaf, and the (1-based) repetition taken at each block.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LeafId {
    pub path: Vec<usize>,
    pub reps: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expansion {
    pub times: Vec<i64>,
    pub events: Vec<EventId>,
    pub leaves: Vec<LeafId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PatternTree {
    pub root: Block,
}

impl PatternTree {
    pub fn new(root: Block) -> Result<Self> {
        root.validate()?;
        Ok(PatternTree { root })
    }

    pub fn cycle(event: EventId, length: i64, period: i64) -> Result<Self> {
        Self::new(Block::leaf_cycle(event, length, period))
    }

    pub fn occurrence_count(&self) -> usize {
        self.root.length as usize * self.root.occurrences_per_rep()
    }

    pub fn height(&self) -> usize {
        Node::Block(self.root.clone()).height()
    }

    /// Leaf events, left to right.
    pub fn leaves(&self) -> Vec<EventId> {
        let mut out = Vec::new();
        self.root.children.iter().for_each(|c| c.leaves(&mut out));
        out
    }

    pub fn width(&self) -> usize {
        self.leaves().len()
    }

    /// Whether the tree is a plain cycle over a single event.
    pub fn as_simple(&self) -> Option<EventId> {
        match self.root.children.as_slice() {
            [Node::Leaf(e)] => Some(*e),
            _ => None,
        }
    }

    /// Perfect occurrences, in traversal order (repetition-major, depth
    /// first, left to right), with their expansion-tree positions.
    pub fn expand(&self) -> Expansion {
        let n = self.occurrence_count();
        let mut x =
            Expansion { times: Vec::with_capacity(n), events: Vec::with_capacity(n), leaves: Vec::with_capacity(n) };
        let mut path = Vec::new();
        let mut reps = Vec::new();
        expand_block(&self.root, 0, &mut path, &mut reps, &mut x);
        x
    }

    /// Perfect relative timestamps only.
    pub fn perfect_times(&self) -> Vec<i64> {
        let mut w = Walk::perfect(self.occurrence_count());
        w.block(&self.root, 0, 0);
        w.times
    }

    pub fn classify(&self) -> TreeShape {
        let times = self.perfect_times();
        let interleaved = times.windows(2).any(|w| w[1] < w[0]);
        let mut sorted = times;
        sorted.sort_unstable();
        let overlaps = sorted.windows(2).any(|w| w[0] == w[1]);
        let (height, width) = (self.height(), self.width());
        let class = match (width, height) {
            (1, 1) => ShapeClass::Simple,
            (1, _) => ShapeClass::Vertical,
            (_, 1) => ShapeClass::Horizontal,
            _ => ShapeClass::Mixed,
        };
        TreeShape { height, width, interleaved, overlaps, class }
    }
}

fn expand_block(b: &Block, base: i64, path: &mut Vec<usize>, reps: &mut Vec<i64>, x: &mut Expansion) {
    for k in 0..b.length {
        reps.push(k + 1);
        let mut offset = 0;
        for (i, c) in b.children.iter().enumerate() {
            if i > 0 {
                offset += b.distances[i - 1];
            }
            path.push(i);
            let t = base + k * b.period + offset;
            match c {
                Node::Leaf(e) => {
                    x.times.push(t);
                    x.events.push(*e);
                    x.leaves.push(LeafId { path: path.clone(), reps: reps.clone() });
                }
                Node::Block(inner) => expand_block(inner, t, path, reps, x),
            }
            path.pop();
        }
        reps.pop();
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeClass {
    Simple,
    Vertical,
    Horizontal,
    Mixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TreeShape {
    pub height: usize,
    pub width: usize,
    pub interleaved: bool,
    pub overlaps: bool,
    pub class: ShapeClass,
}

pub fn classify_tree(tree: &PatternTree) -> TreeShape {
    tree.classify()
}

/// Depth-first traversal accumulating correction offsets.
///
/// For every occurrence, the offset is its own correction plus those of the
/// left-most leaves of earlier siblings and earlier repetitions, up the tree.
/// With `targets` set, corrections are solved so that occurrences land on
/// the targets instead of being read.
pub(crate) struct Walk<'a> {
    pub corrections: Vec<i64>,
    targets: Option<&'a [i64]>,
    pub times: Vec<i64>,
    pub offsets: Vec<i64>,
    pub events: Vec<EventId>,
    next: usize,
    mismatch: bool,
}

impl<'a> Walk<'a> {
    pub fn perfect(n: usize) -> Self {
        Walk {
            corrections: vec![0; n.saturating_sub(1)],
            targets: None,
            times: Vec::with_capacity(n),
            offsets: Vec::with_capacity(n),
            events: Vec::with_capacity(n),
            next: 0,
            mismatch: false,
        }
    }

    pub fn with_corrections(corrections: &[i64]) -> Self {
        let mut w = Walk::perfect(corrections.len() + 1);
        w.corrections.copy_from_slice(corrections);
        w
    }

    /// `targets` are relative to the start, in traversal order.
    pub fn solving(targets: &'a [i64]) -> Self {
        let mut w = Walk::perfect(targets.len());
        w.targets = Some(targets);
        w
    }

    pub fn failed(&self) -> bool {
        self.mismatch
    }

    fn corr(&self, idx: usize) -> i64 {
        if idx == 0 {
            0
        } else {
            self.corrections[idx - 1]
        }
    }

    pub fn block(&mut self, b: &Block, base: i64, inherited: i64) {
        let mut earlier_reps = 0;
        for k in 0..b.length {
            let rep_first = self.next;
            let mut earlier_siblings = 0;
            let mut offset = 0;
            for (i, c) in b.children.iter().enumerate() {
                if i > 0 {
                    offset += b.distances[i - 1];
                }
                let first = self.next;
                let carried = inherited + earlier_reps + earlier_siblings;
                let t = base + k * b.period + offset;
                match c {
                    Node::Leaf(e) => self.leaf(t, *e, carried),
                    Node::Block(inner) => self.block(inner, t, carried),
                }
                earlier_siblings += self.corr(first);
            }
            earlier_reps += self.corr(rep_first);
        }
    }

    fn leaf(&mut self, t: i64, e: EventId, carried: i64) {
        let idx = self.next;
        if let Some(targets) = self.targets {
            let own = targets[idx] - t - carried;
            if idx == 0 {
                self.mismatch |= own != 0;
            } else {
                self.corrections[idx - 1] = own;
            }
        }
        self.times.push(t);
        self.offsets.push(self.corr(idx) + carried);
        self.events.push(e);
        self.next += 1;
    }
}
