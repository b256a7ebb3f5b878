use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::splits::TreeSplits;
use crate::error::{Error, Result};
use crate::model::{Aggregation, Link};
use crate::stats::PairwiseSum;

/// Crossing parameters closer than this (relative, absolute near zero) are
/// treated as one breakpoint.
pub const ALPHA_REL_TOL: f64 = 1e-12;
pub const ALPHA_ABS_TOL: f64 = 1e-15;

#[inline]
pub fn coincident(a: f64, b: f64) -> bool {
    (a - b).abs() <= (ALPHA_REL_TOL * a.abs().max(b.abs())).max(ALPHA_ABS_TOL)
}

/// Piecewise-constant ensemble margin along a path.
///
/// Segment `k` spans `(breakpoints[k-1], breakpoints[k])`; the first starts
/// at α = 0 and the last ends at α = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentList {
    pub breakpoints: Vec<f64>,
    /// Sorted features crossing at each breakpoint; more than one marks a corner.
    pub crossing_features: Vec<Vec<usize>>,
    /// Aggregated margin on each segment, before the link.
    pub segment_values: Vec<f64>,
    pub link: Link,
}

impl SegmentList {
    pub fn len(&self) -> usize {
        self.segment_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segment_values.is_empty()
    }

    /// Linked score on segment `k`.
    pub fn score(&self, k: usize) -> f64 {
        self.link.apply(self.segment_values[k])
    }

    pub fn is_corner(&self, breakpoint: usize) -> bool {
        self.crossing_features[breakpoint].len() > 1
    }
}

struct Head {
    alpha: f64,
    tree: usize,
    pos: usize,
}

impl PartialEq for Head {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Head {}

impl Ord for Head {
    // reversed: BinaryHeap is a max-heap and we want the smallest alpha
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .alpha
            .total_cmp(&self.alpha)
            .then_with(|| other.tree.cmp(&self.tree))
    }
}

impl PartialOrd for Head {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// k-way heap merge of per-tree split lists into ensemble segments.
///
/// Costs `O(n_α log n_trees)`: each event is pushed and popped once, and the
/// running margin is kept in a [`PairwiseSum`] so every segment value is
/// bit-identical to evaluating the ensemble directly at a point inside it.
pub fn merge_ensemble_splits(
    per_tree: &[TreeSplits],
    aggregation: Aggregation,
    link: Link,
) -> Result<SegmentList> {
    for (t, s) in per_tree.iter().enumerate() {
        if s.events.windows(2).any(|w| w[1].alpha < w[0].alpha) {
            return Err(Error::InvalidInput(format!(
                "split events of tree {t} are not sorted"
            )));
        }
    }
    Ok(merge_unchecked(per_tree, aggregation, link))
}

pub(crate) fn merge_unchecked(per_tree: &[TreeSplits], aggregation: Aggregation, link: Link) -> SegmentList {
    let n_trees = per_tree.len();
    let initial: Vec<f64> = per_tree.iter().map(TreeSplits::initial_value).collect();
    let mut sum = PairwiseSum::new(&initial);
    let mut heap: BinaryHeap<Head> = per_tree
        .iter()
        .enumerate()
        .filter_map(|(tree, s)| {
            s.events.first().map(|e| Head {
                alpha: e.alpha,
                tree,
                pos: 0,
            })
        })
        .collect();

    let mut out = SegmentList {
        breakpoints: Vec::new(),
        crossing_features: Vec::new(),
        segment_values: vec![aggregation.finish(sum.total(), n_trees)],
        link,
    };

    let advance = |head: Head, heap: &mut BinaryHeap<Head>, sum: &mut PairwiseSum| {
        let splits = &per_tree[head.tree];
        sum.set(head.tree, splits.value_after(head.pos));
        if let Some(next) = splits.events.get(head.pos + 1) {
            heap.push(Head {
                alpha: next.alpha,
                tree: head.tree,
                pos: head.pos + 1,
            });
        }
        splits.events[head.pos].feature
    };

    while let Some(head) = heap.pop() {
        let alpha = head.alpha;
        let mut features = vec![advance(head, &mut heap, &mut sum)];
        while heap.peek().is_some_and(|h| coincident(h.alpha, alpha)) {
            let h = heap.pop().expect("peeked");
            features.push(advance(h, &mut heap, &mut sum));
        }
        features.sort_unstable();
        features.dedup();
        out.breakpoints.push(alpha);
        out.crossing_features.push(features);
        out.segment_values.push(aggregation.finish(sum.total(), n_trees));
    }
    out
}
