//! Mining nested periodic patterns from timestamped event logs.
//!
//! A pattern is a tree of cyclic blocks anchored at a start time, with a
//! shift correction per occurrence. Patterns are scored by their code length
//! and the miner searches for a collection that compresses the log.
pub mod codec;
pub mod error;
pub mod miner;
pub mod pattern;
pub mod scalar;
pub mod sequence;
pub mod synth;

pub use error::{Error, Result};
pub use pattern::{Block, Cycle, Node, Pattern, PatternTree, ShapeClass, TreeShape};
pub use scalar::Bits;
pub use sequence::{
    load_sequence, parse_sequence, Alphabet, EventId, EventSequence, IngestOptions, Occurrence, Timestamp,
};

pub type CostBreakdown = codec::CostBreakdown<f64>;
pub type CollectionReport = codec::CollectionReport<f64>;
