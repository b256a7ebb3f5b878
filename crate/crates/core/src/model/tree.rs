use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::stats::pairwise_sum;

/// Child index marking a leaf. A node is a leaf iff `left == right == LEAF`.
pub const LEAF: i32 = -1;

/// A binary decision tree stored as parallel arrays.
///
/// Nodes are topologically ordered: every child index is strictly greater
/// than its parent's, so traversal from node 0 terminates in at most
/// `len()` steps. Routing is `x[feature] < threshold` → left, otherwise right.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    feature: Vec<usize>,
    threshold: Vec<f64>,
    value: Vec<f64>,
    left: Vec<i32>,
    right: Vec<i32>,
}

impl Tree {
    pub fn new(
        feature: Vec<usize>,
        threshold: Vec<f64>,
        value: Vec<f64>,
        left: Vec<i32>,
        right: Vec<i32>,
    ) -> Result<Self> {
        let tree = Tree {
            feature,
            threshold,
            value,
            left,
            right,
        };
        tree.validate("tree")?;
        Ok(tree)
    }

    pub(crate) fn from_parts(
        feature: Vec<usize>,
        threshold: Vec<f64>,
        value: Vec<f64>,
        left: Vec<i32>,
        right: Vec<i32>,
    ) -> Self {
        Tree {
            feature,
            threshold,
            value,
            left,
            right,
        }
    }

    /// Single-leaf tree with a constant value.
    pub fn constant(value: f64) -> Self {
        Tree {
            feature: vec![0],
            threshold: vec![0.0],
            value: vec![value],
            left: vec![LEAF],
            right: vec![LEAF],
        }
    }

    /// Depth-one tree: `x[feature] < threshold` scores `below`, else `above`.
    pub fn stump(feature: usize, threshold: f64, below: f64, above: f64) -> Self {
        Tree {
            feature: vec![feature, 0, 0],
            threshold: vec![threshold, 0.0, 0.0],
            value: vec![0.5 * (below + above), below, above],
            left: vec![1, LEAF, LEAF],
            right: vec![2, LEAF, LEAF],
        }
    }

    pub(crate) fn validate(&self, at: &str) -> Result<()> {
        let n = self.feature.len();
        if n == 0 {
            return Err(Error::schema(at, "tree has no nodes"));
        }
        for (name, len) in [
            ("threshold", self.threshold.len()),
            ("value", self.value.len()),
            ("left", self.left.len()),
            ("right", self.right.len()),
        ] {
            if len != n {
                return Err(Error::schema(
                    format!("{at}.{name}"),
                    format!("length {len} differs from feature length {n}"),
                ));
            }
        }
        for node in 0..n {
            let (l, r) = (self.left[node], self.right[node]);
            if l == r {
                if l != LEAF {
                    return Err(Error::schema(
                        format!("{at}.left[{node}]"),
                        format!("leaf sentinel must be {LEAF}, found {l}"),
                    ));
                }
                continue;
            }
            for (name, child) in [("left", l), ("right", r)] {
                if child <= node as i32 || child as usize >= n {
                    return Err(Error::schema(
                        format!("{at}.{name}[{node}]"),
                        format!("child index {child} out of range ({node}, {n})"),
                    ));
                }
            }
            if self.threshold[node].is_nan() {
                return Err(Error::schema(
                    format!("{at}.threshold[{node}]"),
                    "threshold is NaN",
                ));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.feature.len()
    }

    pub fn is_empty(&self) -> bool {
        self.feature.is_empty()
    }

    #[inline]
    pub fn is_leaf(&self, node: usize) -> bool {
        self.left[node] == self.right[node]
    }

    #[inline]
    pub fn feature(&self, node: usize) -> usize {
        self.feature[node]
    }

    #[inline]
    pub fn threshold(&self, node: usize) -> f64 {
        self.threshold[node]
    }

    #[inline]
    pub fn value(&self, node: usize) -> f64 {
        self.value[node]
    }

    /// Child reached from internal `node` by a feature value `v`.
    #[inline]
    pub fn route(&self, node: usize, v: f64) -> usize {
        if v < self.threshold[node] {
            self.left[node] as usize
        } else {
            self.right[node] as usize
        }
    }

    pub fn leaf_index(&self, x: &[f64]) -> usize {
        let mut node = 0;
        while !self.is_leaf(node) {
            node = self.route(node, x[self.feature[node]]);
        }
        node
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.value[self.leaf_index(x)]
    }

    /// Largest feature index used by an internal node.
    pub fn max_feature(&self) -> Option<usize> {
        (0..self.len())
            .filter(|&i| !self.is_leaf(i))
            .map(|i| self.feature[i])
            .max()
    }

    /// `(feature, threshold)` of every internal node.
    pub fn splits(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        (0..self.len())
            .filter(|&i| !self.is_leaf(i))
            .map(|i| (self.feature[i], self.threshold[i]))
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &Tree, node: usize) -> usize {
            if t.is_leaf(node) {
                0
            } else {
                1 + walk(t, t.left[node] as usize).max(walk(t, t.right[node] as usize))
            }
        }
        walk(self, 0)
    }

    pub fn n_leaves(&self) -> usize {
        (0..self.len()).filter(|&i| self.is_leaf(i)).count()
    }

    pub(crate) fn arrays(&self) -> (&[usize], &[f64], &[f64], &[i32], &[i32]) {
        (
            &self.feature,
            &self.threshold,
            &self.value,
            &self.left,
            &self.right,
        )
    }

    pub(crate) fn map_thresholds(
        &self,
        feature: usize,
        f: impl Fn(f64) -> f64,
        swap_children: bool,
    ) -> Tree {
        let mut out = self.clone();
        for node in 0..out.len() {
            if !out.is_leaf(node) && out.feature[node] == feature {
                out.threshold[node] = f(out.threshold[node]);
                if swap_children {
                    std::mem::swap(&mut out.left[node], &mut out.right[node]);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Link {
    #[default]
    Identity,
    Logistic,
}

impl Link {
    #[inline]
    pub fn apply(self, margin: f64) -> f64 {
        match self {
            Link::Identity => margin,
            Link::Logistic => 1.0 / (1.0 + (-margin).exp()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    #[default]
    Sum,
    Mean,
}

impl Aggregation {
    /// Combine an already-summed total of `n_trees` leaf values.
    #[inline]
    pub fn finish(self, total: f64, n_trees: usize) -> f64 {
        match self {
            Aggregation::Sum => total,
            Aggregation::Mean => total / n_trees as f64,
        }
    }
}

/// Additive ensemble of trees: `score(x) = link(aggregate(leaf values))`.
///
/// Leaf values are summed with [`pairwise_sum`] in tree order; the attribution
/// engine reproduces the same rounding when it tracks margins along a path.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeEnsemble {
    trees: Vec<Tree>,
    n_features: usize,
    link: Link,
    aggregation: Aggregation,
}

impl TreeEnsemble {
    pub fn new(
        trees: Vec<Tree>,
        n_features: usize,
        link: Link,
        aggregation: Aggregation,
    ) -> Result<Self> {
        let ensemble = TreeEnsemble {
            trees,
            n_features,
            link,
            aggregation,
        };
        ensemble.validate()?;
        Ok(ensemble)
    }

    pub(crate) fn from_parts(
        trees: Vec<Tree>,
        n_features: usize,
        link: Link,
        aggregation: Aggregation,
    ) -> Self {
        TreeEnsemble {
            trees,
            n_features,
            link,
            aggregation,
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.trees.is_empty() {
            return Err(Error::schema("trees", "ensemble needs at least one tree"));
        }
        if self.n_features == 0 {
            return Err(Error::schema("n_features", "must be positive"));
        }
        for (t, tree) in self.trees.iter().enumerate() {
            let at = format!("trees[{t}]");
            tree.validate(&at)?;
            for node in 0..tree.len() {
                if !tree.is_leaf(node) && tree.feature[node] >= self.n_features {
                    return Err(Error::schema(
                        format!("{at}.feature[{node}]"),
                        format!(
                            "feature {} >= n_features {}",
                            tree.feature[node], self.n_features
                        ),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn link(&self) -> Link {
        self.link
    }

    pub fn aggregation(&self) -> Aggregation {
        self.aggregation
    }

    /// Aggregated leaf values before the link function.
    pub fn margin(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.n_features, x.len())?;
        Ok(self.margin_unchecked(x))
    }

    pub(crate) fn margin_unchecked(&self, x: &[f64]) -> f64 {
        let leaves: Vec<f64> = self.trees.iter().map(|t| t.predict(x)).collect();
        self.aggregation
            .finish(pairwise_sum(&leaves), self.trees.len())
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        Ok(self.link.apply(self.margin(x)?))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        self.link.apply(self.margin_unchecked(x))
    }

    pub(crate) fn with_trees(&self, trees: Vec<Tree>) -> TreeEnsemble {
        TreeEnsemble {
            trees,
            ..self.clone()
        }
    }
}
