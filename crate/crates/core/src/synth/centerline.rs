use super::data::LabeledSample;
use crate::error::{Error, Result};

pub const DEFAULT_K: usize = 20;
pub const DEFAULT_BAND: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct CenterlineSelection {
    pub points: Vec<[f64; 2]>,
    /// Indices into the input data, parallel to `points`.
    pub indices: Vec<usize>,
    /// Set when fewer than `k` candidates were available.
    pub short: bool,
}

/// Class-2 samples within `band` of the line `x2 = x1`, spread along it by
/// greedy farthest-point selection seeded with the sample closest to the
/// line. The result is ordered along the line.
pub fn select_centerline_points(data: &[LabeledSample], k: usize, band: f64) -> Result<CenterlineSelection> {
    if k == 0 || !(band > 0.0) {
        return Err(Error::InvalidInput("k must be positive and band > 0".into()));
    }
    let off_line = |s: &LabeledSample| (s.x[0] - s.x[1]).abs();
    let candidates: Vec<usize> = (0..data.len())
        .filter(|&i| data[i].label == 2 && off_line(&data[i]) < band)
        .collect();
    let short = candidates.len() < k;
    let mut chosen: Vec<usize> = Vec::with_capacity(k.min(candidates.len()));
    if let Some(&first) = candidates
        .iter()
        .min_by(|&&a, &&b| off_line(&data[a]).total_cmp(&off_line(&data[b])))
    {
        chosen.push(first);
    }
    let dist2 = |a: usize, b: usize| {
        let (p, q) = (data[a].x, data[b].x);
        (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)
    };
    let mut nearest: Vec<f64> = candidates.iter().map(|&c| chosen.first().map_or(0.0, |&f| dist2(c, f))).collect();
    while chosen.len() < k.min(candidates.len()) {
        let (pos, _) = nearest
            .iter()
            .enumerate()
            .fold((usize::MAX, -1.0), |best, (p, &d)| if d > best.1 { (p, d) } else { best });
        let next = candidates[pos];
        chosen.push(next);
        for (d, &c) in nearest.iter_mut().zip(&candidates) {
            *d = d.min(dist2(c, next));
        }
    }
    chosen.sort_by(|&a, &b| (data[a].x[0] + data[a].x[1]).total_cmp(&(data[b].x[0] + data[b].x[1])).then(a.cmp(&b)));
    Ok(CenterlineSelection {
        points: chosen.iter().map(|&i| data[i].x).collect(),
        indices: chosen,
        short,
    })
}
