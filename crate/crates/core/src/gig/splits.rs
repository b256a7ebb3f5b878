use crate::error::{check_dim, Error, Result};
use crate::model::Tree;

/// A discontinuity met along a straight path through one tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitEvent {
    /// Path parameter of the crossing.
    pub alpha: f64,
    /// Feature of the split that produced the crossing.
    pub feature: usize,
    /// Leaf value on the segment that ends at `alpha`.
    pub value_before: f64,
}

/// Events along the path in ascending `alpha`, plus the leaf value on the
/// final segment `(last alpha, 1]`.
///
/// Two splits met at the same point (a corner inside one tree) yield
/// consecutive events with equal `alpha`; the value recorded between them
/// belongs to the corner point itself and is not a region of the path.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeSplits {
    pub events: Vec<SplitEvent>,
    pub terminal_value: f64,
}

impl TreeSplits {
    /// Leaf value on the first segment, starting at `alpha = 0`.
    pub fn initial_value(&self) -> f64 {
        self.events.first().map_or(self.terminal_value, |e| e.value_before)
    }

    /// Value on the segment following event `i`.
    pub fn value_after(&self, i: usize) -> f64 {
        self.events.get(i + 1).map_or(self.terminal_value, |e| e.value_before)
    }
}

struct Walker<'a> {
    tree: &'a Tree,
    start: &'a [f64],
    end: &'a [f64],
    events: Vec<SplitEvent>,
    terminal: Option<f64>,
}

impl Walker<'_> {
    /// Coordinate `feature` at `alpha`; exact at both endpoints.
    #[inline]
    fn coord(&self, feature: usize, alpha: f64) -> f64 {
        let (s, e) = (self.start[feature], self.end[feature]);
        if alpha == 0.0 {
            s
        } else if alpha == 1.0 {
            e
        } else {
            s + alpha * (e - s)
        }
    }

    fn walk(&mut self, a_min: f64, a_max: f64, mut node: usize, upper: Option<usize>) {
        loop {
            if self.tree.is_leaf(node) {
                let value = self.tree.value(node);
                match upper {
                    Some(feature) => self.events.push(SplitEvent {
                        alpha: a_max,
                        feature,
                        value_before: value,
                    }),
                    None => self.terminal = Some(value),
                }
                return;
            }
            let feature = self.tree.feature(node);
            let lo = self.tree.route(node, self.coord(feature, a_min));
            let hi = self.tree.route(node, self.coord(feature, a_max));
            if lo == hi {
                node = lo;
                continue;
            }
            let (s, e) = (self.start[feature], self.end[feature]);
            let mid = ((self.tree.threshold(node) - s) / (e - s)).clamp(a_min, a_max);
            self.walk(a_min, mid, lo, Some(feature));
            self.walk(mid, a_max, hi, upper);
            return;
        }
    }
}

/// Crossings of the straight path `start → end` with the splits of `tree`,
/// with the constant leaf value between consecutive crossings.
///
/// Recursive descent: at each internal node the path segment is routed at both
/// ends; if the ends fall on different sides the segment is cut at the
/// crossing and each part descends its own child, lower α first. Each leaf is
/// visited at most once per path segment that reaches it.
pub fn find_path_tree_splits(tree: &Tree, start: &[f64], end: &[f64]) -> Result<TreeSplits> {
    check_dim(start.len(), end.len())?;
    if start.iter().chain(end).any(|v| v.is_nan()) {
        return Err(Error::InvalidInput("NaN in path endpoint".into()));
    }
    if let Some(f) = tree.max_feature() {
        if f >= start.len() {
            return Err(Error::DimensionMismatch {
                expected: f + 1,
                got: start.len(),
            });
        }
    }
    Ok(find_splits_unchecked(tree, start, end))
}

pub(crate) fn find_splits_unchecked(tree: &Tree, start: &[f64], end: &[f64]) -> TreeSplits {
    let mut w = Walker {
        tree,
        start,
        end,
        events: Vec::new(),
        terminal: None,
    };
    w.walk(0.0, 1.0, 0, None);
    TreeSplits {
        events: w.events,
        terminal_value: w.terminal.expect("final segment always reaches a leaf"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stump_crossing() {
        let t = Tree::stump(0, 0.5, 0.0, 1.0);
        let s = find_path_tree_splits(&t, &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!(
            s.events,
            vec![SplitEvent {
                alpha: 0.5,
                feature: 0,
                value_before: 0.0
            }]
        );
        assert_eq!(s.terminal_value, 1.0);
    }

    #[test]
    fn path_inside_one_region() {
        let t = Tree::stump(0, 0.5, 0.0, 1.0);
        let s = find_path_tree_splits(&t, &[0.6, 0.0], &[0.9, 1.0]).unwrap();
        assert!(s.events.is_empty());
        assert_eq!(s.terminal_value, 1.0);
        let zero = find_path_tree_splits(&t, &[0.2, 0.0], &[0.2, 0.0]).unwrap();
        assert!(zero.events.is_empty());
        assert_eq!(zero.terminal_value, 0.0);
    }

    #[test]
    fn descending_path() {
        let t = Tree::stump(1, 0.25, -1.0, 2.0);
        let s = find_path_tree_splits(&t, &[0.0, 1.0], &[0.0, 0.0]).unwrap();
        assert_eq!(s.events.len(), 1);
        assert_eq!(s.events[0].alpha, 0.75);
        assert_eq!(s.events[0].value_before, 2.0);
        assert_eq!(s.terminal_value, -1.0);
    }

    #[test]
    fn rejects_nan_and_short_points() {
        let t = Tree::stump(1, 0.5, 0.0, 1.0);
        assert!(matches!(
            find_path_tree_splits(&t, &[f64::NAN, 0.0], &[1.0, 1.0]),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            find_path_tree_splits(&t, &[0.0], &[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn corner_inside_one_tree() {
        // root on x0 at 0.5, both children on x1 at 0.5
        let t = Tree::new(
            vec![0, 1, 1, 0, 0, 0, 0],
            vec![0.5, 0.5, 0.5, 0.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0, 2.0, 3.0, 4.0],
            vec![1, 3, 5, -1, -1, -1, -1],
            vec![2, 4, 6, -1, -1, -1, -1],
        )
        .unwrap();
        let s = find_path_tree_splits(&t, &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let alphas: Vec<f64> = s.events.iter().map(|e| e.alpha).collect();
        assert_eq!(alphas, vec![0.5, 0.5]);
        assert_eq!(s.initial_value(), 1.0);
        assert_eq!(s.terminal_value, 4.0);
        let mut feats: Vec<usize> = s.events.iter().map(|e| e.feature).collect();
        feats.sort();
        assert_eq!(feats, vec![0, 1]);
    }
}
