//! Deterministic summation and running moment helpers.

/// Pairwise (cascade) summation with a fixed split shape: the left half is
/// `len / 2` elements. [`PairwiseSum`] reproduces exactly the same rounding.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        len => {
            let mid = len / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

/// Incrementally updatable pairwise sum.
///
/// Internal nodes mirror the recursion of [`pairwise_sum`], so after any
/// sequence of updates `total()` is bit-identical to `pairwise_sum` of the
/// current values. Updates cost `O(log n)`.
#[derive(Debug, Clone)]
pub struct PairwiseSum {
    nodes: Vec<f64>,
    parent: Vec<usize>,
    children: Vec<Option<(usize, usize)>>,
    leaf_node: Vec<usize>,
}

impl PairwiseSum {
    pub fn new(values: &[f64]) -> Self {
        let mut tree = PairwiseSum {
            nodes: Vec::with_capacity(2 * values.len()),
            parent: Vec::with_capacity(2 * values.len()),
            children: Vec::with_capacity(2 * values.len()),
            leaf_node: vec![0; values.len()],
        };
        if !values.is_empty() {
            tree.build(values, 0, usize::MAX);
        }
        tree
    }

    fn build(&mut self, values: &[f64], offset: usize, parent: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(0.0);
        self.parent.push(parent);
        self.children.push(None);
        if values.len() == 1 {
            self.nodes[id] = values[0];
            self.leaf_node[offset] = id;
        } else {
            let mid = values.len() / 2;
            let l = self.build(&values[..mid], offset, id);
            let r = self.build(&values[mid..], offset + mid, id);
            self.children[id] = Some((l, r));
            self.nodes[id] = self.nodes[l] + self.nodes[r];
        }
        id
    }

    pub fn total(&self) -> f64 {
        self.nodes.first().copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, index: usize, value: f64) {
        let mut id = self.leaf_node[index];
        self.nodes[id] = value;
        while self.parent[id] != usize::MAX {
            id = self.parent[id];
            let (l, r) = self.children[id].expect("internal node");
            self.nodes[id] = self.nodes[l] + self.nodes[r];
        }
    }
}

/// Weighted running mean/variance per component (West's algorithm).
#[derive(Debug, Clone)]
pub(crate) struct RunningMoments {
    count: usize,
    weight_sum: f64,
    weight_sq_sum: f64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl RunningMoments {
    pub fn new(dim: usize) -> Self {
        RunningMoments {
            count: 0,
            weight_sum: 0.0,
            weight_sq_sum: 0.0,
            mean: vec![0.0; dim],
            m2: vec![0.0; dim],
        }
    }

    pub fn push(&mut self, x: &[f64], weight: f64) {
        self.count += 1;
        self.weight_sum += weight;
        self.weight_sq_sum += weight * weight;
        for ((m, s), &v) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(x) {
            let delta = v - *m;
            *m += delta * weight / self.weight_sum;
            *s += weight * delta * (v - *m);
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Standard error of the weighted mean; `None` below two samples.
    pub fn stderr(&self) -> Option<Vec<f64>> {
        weighted_stderr(
            self.count,
            self.weight_sum,
            self.weight_sq_sum,
            self.m2.iter().copied(),
        )
    }
}

/// Unbiased (reliability-weighted) standard error of the mean, given
/// per-component weighted sums of squared deviations. With unit weights this
/// is the sample standard deviation over `sqrt(n)`.
pub(crate) fn weighted_stderr(
    count: usize,
    weight_sum: f64,
    weight_sq_sum: f64,
    sq_dev: impl Iterator<Item = f64>,
) -> Option<Vec<f64>> {
    if count < 2 {
        return None;
    }
    let denom = weight_sum - weight_sq_sum / weight_sum;
    let n_eff = weight_sum * weight_sum / weight_sq_sum;
    Some(
        sq_dev
            .map(|s| {
                if denom > 0.0 {
                    ((s / denom).max(0.0) / n_eff).sqrt()
                } else {
                    0.0
                }
            })
            .collect(),
    )
}
