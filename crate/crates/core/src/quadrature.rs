//! Adaptive Gauss–Legendre quadrature for vector-valued integrands.

use std::sync::OnceLock;

use crate::error::Result;

pub const GAUSS_NODES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Panel halves must agree with the whole-panel estimate to this relative
    /// tolerance, per component.
    pub rel_tol: f64,
    /// Absolute floor per unit of panel width, for near-zero components.
    pub abs_tol: f64,
    pub max_depth: u32,
    /// Hard cap on the number of panels evaluated.
    pub max_panels: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_depth: 40,
            max_panels: 1 << 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature {
    pub value: Vec<f64>,
    /// Sum over accepted panels of the largest `|halves - whole|` component.
    pub error_estimate: f64,
    pub converged: bool,
    pub panels: usize,
}

/// Nodes and weights on `[-1, 1]`, ascending nodes.
pub fn gauss_legendre() -> &'static ([f64; GAUSS_NODES], [f64; GAUSS_NODES]) {
    static RULE: OnceLock<([f64; GAUSS_NODES], [f64; GAUSS_NODES])> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GAUSS_NODES;
        let mut nodes = [0.0; GAUSS_NODES];
        let mut weights = [0.0; GAUSS_NODES];
        for i in 0..n.div_ceil(2) {
            // Newton on P_n from the Chebyshev-like initial guess
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        (nodes, weights)
    })
}

fn panel<F>(f: &mut F, a: f64, b: f64, dim: usize) -> Result<Vec<f64>>
where
    F: FnMut(f64) -> Result<Vec<f64>>,
{
    let (nodes, weights) = gauss_legendre();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = vec![0.0; dim];
    for (x, w) in nodes.iter().zip(weights) {
        let v = f(mid + half * x)?;
        for (s, vi) in acc.iter_mut().zip(&v) {
            *s += w * vi;
        }
    }
    acc.iter_mut().for_each(|s| *s *= half);
    Ok(acc)
}

/// Integrate a `dim`-component function over `[a, b]`, bisecting panels until
/// every component passes the tolerance test or `max_depth` is reached.
pub fn integrate<F>(mut f: F, dim: usize, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<Quadrature>
where
    F: FnMut(f64) -> Result<Vec<f64>>,
{
    let mut total = vec![0.0; dim];
    let mut error_estimate = 0.0;
    let mut converged = true;
    let mut panels = 1;
    let whole = panel(&mut f, a, b, dim)?;
    let mut stack = vec![(a, b, whole, 0u32)];
    while let Some((lo, hi, est, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = panel(&mut f, lo, mid, dim)?;
        let right = panel(&mut f, mid, hi, dim)?;
        panels += 2;
        let width = hi - lo;
        let mut worst: f64 = 0.0;
        let mut ok = true;
        for k in 0..dim {
            let refined = left[k] + right[k];
            let diff = (refined - est[k]).abs();
            worst = worst.max(diff);
            if diff > (cfg.rel_tol * refined.abs()).max(cfg.abs_tol * width) {
                ok = false;
            }
        }
        let exhausted = depth + 1 >= cfg.max_depth || panels >= cfg.max_panels;
        if ok || exhausted {
            if !ok {
                converged = false;
            }
            error_estimate += worst;
            for k in 0..dim {
                total[k] += left[k] + right[k];
            }
        } else {
            // right pushed first so panels are summed left to right
            stack.push((mid, hi, right, depth + 1));
            stack.push((lo, mid, left, depth + 1));
        }
    }
    Ok(Quadrature {
        value: total,
        error_estimate,
        converged,
        panels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_is_normalised_and_symmetric() {
        let (x, w) = gauss_legendre();
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        for i in 0..GAUSS_NODES {
            assert!((x[i] + x[GAUSS_NODES - 1 - i]).abs() < 1e-15);
        }
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn exact_for_degree_31() {
        let (x, w) = gauss_legendre();
        for deg in 0..=31 {
            let got: f64 = x.iter().zip(w).map(|(x, w)| w * x.powi(deg)).sum();
            let want = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((got - want).abs() < 1e-14, "degree {deg}: {got} vs {want}");
        }
    }

    #[test]
    fn adaptive_handles_steep_integrand() {
        // ∫_0^1 (1/2 + 1/2 tanh(50(x - 0.3))) dx, closed form via log cosh
        let cfg = QuadratureConfig::default();
        let q = integrate(|x| Ok(vec![0.5 + 0.5 * (50.0 * (x - 0.3)).tanh(), 0.0]), 2, 0.0, 1.0, &cfg).unwrap();
        let lc = |u: f64| u.abs() + (1.0 + (-2.0 * u.abs()).exp()).ln() - std::f64::consts::LN_2;
        let exact = 0.5 + (lc(50.0 * 0.7) - lc(-50.0 * 0.3)) / 100.0;
        assert!(q.converged);
        assert!((q.value[0] - exact).abs() < 1e-12, "{} vs {exact}", q.value[0]);
        assert_eq!(q.value[1], 0.0);
    }

    #[test]
    fn reports_non_convergence() {
        let cfg = QuadratureConfig {
            max_depth: 3,
            ..Default::default()
        };
        let q = integrate(|x| Ok(vec![if x < 0.3 { 0.0 } else { 1.0 }]), 1, 0.0, 1.0, &cfg).unwrap();
        assert!(!q.converged);
        assert!((q.value[0] - 0.7).abs() < 0.1);
    }
}
