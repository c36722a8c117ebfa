//! Invariants over random inputs.
use cyclemine::codec::{collection_cost, pattern_cost, CodecOptions, SeqStats};
use cyclemine::miner::{mine, segment, MiningConfig};
use cyclemine::pattern::{format_pattern, parse_pattern, pattern_occurrences, Block, Node, PatternTree};
use cyclemine::{Alphabet, EventId, EventSequence, Pattern};
use proptest::prelude::*;

fn tree() -> impl Strategy<Value = PatternTree> {
    let leaf = (0u32..3).prop_map(|e| Node::Leaf(EventId(e)));
    let inner = (2i64..5, 1i64..6, leaf.clone()).prop_map(|(r, p, l)| Node::Block(Block::new(r, p, vec![l], vec![])));
    let child = prop_oneof![leaf, inner];
    (2i64..5, 1i64..40, proptest::collection::vec((child, 0i64..6), 1..4)).prop_filter_map(
        "valid tree",
        |(r, p, kids)| {
            let distances = kids.iter().skip(1).map(|(_, d)| *d).collect();
            let children = kids.into_iter().map(|(c, _)| c).collect();
            PatternTree::new(Block::new(r, p, children, distances)).ok()
        },
    )
}

fn pattern() -> impl Strategy<Value = Pattern> {
    (tree(), 0i64..30, any::<u64>()).prop_map(|(t, start, seed)| {
        let n = t.occurrence_count() - 1;
        let mut s = seed;
        let corrections = (0..n)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (s >> 60) as i64 % 3 - 1
            })
            .collect();
        Pattern::new(t, start, corrections).unwrap()
    })
}

fn abc() -> Alphabet {
    Alphabet::from_labels(&["a", "b", "c"])
}

fn sequence_for(p: &Pattern) -> Option<EventSequence> {
    let occ = pattern_occurrences(p).ok()?;
    EventSequence::from_pairs(abc(), occ).ok()
}

proptest! {
    #[test]
    fn notation_round_trip(p in pattern()) {
        let al = abc();
        let text = format_pattern(&p, &al);
        prop_assert_eq!(parse_pattern(&text, &al).unwrap(), p);
    }

    #[test]
    fn fitting_recovers_corrections(p in pattern()) {
        let x = p.tree.expand();
        let occ = p.occurrence_list();
        prop_assume!(occ.len() == x.times.len());
        let targets: Vec<i64> = occ.iter().map(|o| o.0).collect();
        let fitted = Pattern::fit_to(p.tree.clone(), &targets).unwrap();
        prop_assert_eq!(fitted.occurrence_list(), occ);
    }

    #[test]
    fn cost_is_translation_invariant(p in pattern(), shift in 1i64..500) {
        let Some(seq) = sequence_for(&p) else { return Ok(()) };
        let stats = SeqStats::of(&seq);
        let moved = Pattern::new(p.tree.clone(), p.start + shift, p.corrections.clone()).unwrap();
        let moved_stats = SeqStats::new(stats.len, stats.t_start + shift, stats.t_end + shift, stats.counts.clone()).unwrap();
        for inter in [true, false] {
            let a = pattern_cost::<f64>(&p, &stats, inter).ok().map(|c| c.total());
            let b = pattern_cost::<f64>(&moved, &moved_stats, inter).ok().map(|c| c.total());
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn covering_pattern_reports_no_residuals(p in pattern()) {
        let Some(seq) = sequence_for(&p) else { return Ok(()) };
        let stats = SeqStats::of(&seq);
        if let Ok(r) = collection_cost::<f64>(std::slice::from_ref(&p), &seq, &stats, &CodecOptions::default()) {
            prop_assert_eq!(r.residual_count, 0);
            prop_assert!((r.total - r.pattern_bits).abs() < 1e-9);
        }
    }

    #[test]
    fn segmentation_never_loses_to_residuals(gaps in proptest::collection::vec(1i64..20, 1..40), extra in 0i64..50) {
        let mut ts = vec![0];
        for g in gaps {
            ts.push(ts[ts.len() - 1] + g);
        }
        let n = ts.len() as i64;
        let stats = SeqStats::new(n, 0, ts[ts.len() - 1] + extra, vec![n]).unwrap();
        let (cycles, cost) = segment(&ts, EventId(0), &stats);
        let res = cyclemine::codec::residual_cost::<f64>(&stats, EventId(0)).unwrap();
        prop_assert!(cost <= res * n as f64 + 1e-9);
        let covered: i64 = cycles.iter().map(|c| c.length).sum();
        prop_assert!(covered <= n);
        prop_assert!(cycles.iter().all(|c| c.length >= 3));
    }

    #[test]
    fn mining_never_exceeds_baseline(pairs in proptest::collection::vec((0i64..200, 0u32..3), 1..60)) {
        let seq = EventSequence::from_pairs(abc(), pairs.into_iter().map(|(t, e)| (t, EventId(e)))).unwrap();
        let res = mine(&seq, &MiningConfig::default());
        let best = res.best_stage();
        prop_assert!(best.report.total <= best.report.baseline);
        prop_assert!(best.report.percent_l <= 100.0);
        for c in &best.selection.patterns {
            prop_assert!(c.cover.iter().all(|o| seq.contains(o)));
        }
    }
}
