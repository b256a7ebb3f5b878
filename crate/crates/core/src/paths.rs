//! Integration paths from a reference point to an explanation point, and the
//! feature-subset masking used by the interventional lift.

use crate::error::{check_dim, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum PathKind {
    /// `x_a + α (x_b - x_a)`.
    StraightLine,
    /// Every feature advances at the same absolute rate until it reaches its
    /// end value, then stops.
    SerialCostSharing,
    /// Corner-to-corner tour changing one feature at a time in `order`; each
    /// of the n legs gets an equal `1/n` share of α, even zero-length legs.
    AxisPermutation(Vec<usize>),
    /// Straight legs through the given interior waypoints, equal α per leg.
    PiecewiseLinear(Vec<Vec<f64>>),
}

/// A piecewise-linear curve with `point_at(0) == start` and
/// `point_at(1) == end` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    kind: PathKind,
    alphas: Vec<f64>,
    vertices: Vec<Vec<f64>>,
}

fn check_point(name: &str, x: &[f64]) -> Result<()> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("{name} has non-finite coordinates")));
    }
    Ok(())
}

impl Path {
    pub fn new(kind: PathKind, start: &[f64], end: &[f64]) -> Result<Self> {
        check_dim(start.len(), end.len())?;
        check_point("start", start)?;
        check_point("end", end)?;
        let n = start.len();
        let (alphas, vertices) = match &kind {
            PathKind::StraightLine => (vec![0.0, 1.0], vec![start.to_vec(), end.to_vec()]),
            PathKind::SerialCostSharing => serial_vertices(start, end),
            PathKind::AxisPermutation(order) => {
                let mut seen = vec![false; n];
                if order.len() != n || order.iter().any(|&f| f >= n || std::mem::replace(&mut seen[f], true)) {
                    return Err(Error::InvalidInput(format!(
                        "{order:?} is not a permutation of 0..{n}"
                    )));
                }
                let mut vertices = vec![start.to_vec()];
                let mut cur = start.to_vec();
                for &f in order {
                    cur[f] = end[f];
                    vertices.push(cur.clone());
                }
                (uniform_alphas(n.max(1)), vertices)
            }
            PathKind::PiecewiseLinear(waypoints) => {
                let mut vertices = vec![start.to_vec()];
                for w in waypoints {
                    check_dim(n, w.len())?;
                    check_point("waypoint", w)?;
                    vertices.push(w.clone());
                }
                vertices.push(end.to_vec());
                (uniform_alphas(vertices.len() - 1), vertices)
            }
        };
        let (alphas, vertices) = if vertices.len() == 1 {
            // zero-dimensional axis tour
            (vec![0.0, 1.0], vec![start.to_vec(), end.to_vec()])
        } else {
            (alphas, vertices)
        };
        Ok(Path {
            kind,
            alphas,
            vertices,
        })
    }

    pub fn straight(start: &[f64], end: &[f64]) -> Result<Self> {
        Path::new(PathKind::StraightLine, start, end)
    }

    pub fn kind(&self) -> &PathKind {
        &self.kind
    }

    pub fn start(&self) -> &[f64] {
        &self.vertices[0]
    }

    pub fn end(&self) -> &[f64] {
        self.vertices.last().expect("path has vertices")
    }

    pub fn dim(&self) -> usize {
        self.start().len()
    }

    /// Corner points including both endpoints, in traversal order.
    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    /// α value of each vertex.
    pub fn vertex_alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// Consecutive straight legs `(from, to)`.
    pub fn segments(&self) -> impl Iterator<Item = (&[f64], &[f64])> {
        self.vertices
            .windows(2)
            .map(|w| (w[0].as_slice(), w[1].as_slice()))
    }

    pub fn point_at(&self, alpha: f64) -> Result<Vec<f64>> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidInput(format!("α = {alpha} outside [0, 1]")));
        }
        // index of the last vertex with alpha_k <= alpha
        let k = self.alphas.partition_point(|&a| a <= alpha) - 1;
        if k + 1 == self.alphas.len() {
            return Ok(self.end().to_vec());
        }
        let (a0, a1) = (self.alphas[k], self.alphas[k + 1]);
        let t = (alpha - a0) / (a1 - a0);
        let (p, q) = (&self.vertices[k], &self.vertices[k + 1]);
        Ok(p.iter().zip(q).map(|(a, b)| a + t * (b - a)).collect())
    }

    /// The tour visiting the same corners backwards (axis paths only).
    pub fn inverse_ordering(&self) -> Option<Path> {
        match &self.kind {
            PathKind::AxisPermutation(order) => {
                let rev: Vec<usize> = order.iter().rev().copied().collect();
                Path::new(PathKind::AxisPermutation(rev), self.start(), self.end()).ok()
            }
            _ => None,
        }
    }

    /// Every axis-permutation path between two points, in lexicographic
    /// order of the feature orderings.
    pub fn all_axis_permutations(start: &[f64], end: &[f64]) -> Result<Vec<Path>> {
        permutations(start.len())
            .into_iter()
            .map(|order| Path::new(PathKind::AxisPermutation(order), start, end))
            .collect()
    }
}

fn uniform_alphas(legs: usize) -> Vec<f64> {
    (0..=legs)
        .map(|k| if k == legs { 1.0 } else { k as f64 / legs as f64 })
        .collect()
}

fn serial_vertices(start: &[f64], end: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let spans: Vec<f64> = start.iter().zip(end).map(|(a, b)| (b - a).abs()).collect();
    let total = spans.iter().fold(0.0f64, |m, &d| m.max(d));
    if total == 0.0 {
        return (vec![0.0, 1.0], vec![start.to_vec(), end.to_vec()]);
    }
    let mut stops: Vec<f64> = spans.iter().copied().filter(|&d| d > 0.0).collect();
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    let mut alphas = vec![0.0];
    let mut vertices = vec![start.to_vec()];
    for &d in &stops {
        alphas.push(if d == total { 1.0 } else { d / total });
        vertices.push(
            start
                .iter()
                .zip(end)
                .zip(&spans)
                .map(|((&a, &b), &s)| {
                    if s <= d {
                        b
                    } else {
                        a + (b - a).signum() * d
                    }
                })
                .collect(),
        );
    }
    (alphas, vertices)
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        out.push(perm.clone());
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| perm[i - 1] < perm[i]) else {
            break;
        };
        let j = (i..n).rev().find(|&j| perm[j] > perm[i - 1]).expect("successor");
        perm.swap(i - 1, j);
        perm[i..].reverse();
    }
    out
}

/// A set of feature indices stored as a bitmask (n ≤ 64).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct FeatureSubset(u64);

impl FeatureSubset {
    pub const fn empty() -> Self {
        FeatureSubset(0)
    }

    pub fn full(n: usize) -> Self {
        assert!(n <= 64, "feature subsets hold at most 64 features");
        FeatureSubset(if n == 64 { u64::MAX } else { (1u64 << n) - 1 })
    }

    pub const fn from_bits(bits: u64) -> Self {
        FeatureSubset(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, i: usize) -> bool {
        i < 64 && self.0 >> i & 1 == 1
    }

    pub fn with(self, i: usize) -> Self {
        FeatureSubset(self.0 | 1 << i)
    }

    pub fn without(self, i: usize) -> Self {
        FeatureSubset(self.0 & !(1 << i))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..64).filter(move |&i| self.contains(i))
    }
}

impl FromIterator<usize> for FeatureSubset {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        iter.into_iter().fold(FeatureSubset::empty(), FeatureSubset::with)
    }
}

/// Interventional lift: features in `subset` come from `x`, the rest from
/// `reference`.
pub fn masked_point(x: &[f64], reference: &[f64], subset: FeatureSubset) -> Result<Vec<f64>> {
    check_dim(x.len(), reference.len())?;
    Ok(masked_point_unchecked(x, reference, subset))
}

pub(crate) fn masked_point_unchecked(x: &[f64], reference: &[f64], subset: FeatureSubset) -> Vec<f64> {
    x.iter()
        .zip(reference)
        .enumerate()
        .map(|(i, (&v, &r))| if subset.contains(i) { v } else { r })
        .collect()
}
