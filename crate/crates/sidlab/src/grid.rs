//! Discretization of continuous spectral axes.
//!
//! Every spectral integral in the kernel formalism is realized as a finite
//! weighted sum over the nodes of a [`SpectralGrid`]. Grids are immutable
//! after construction and cheap to clone and share.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Quadrature rule used to place nodes and weights on an interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadRule {
    /// Composite trapezoid on uniformly spaced nodes. Default.
    Trapezoid,
    /// Gauss-Legendre nodes and weights mapped onto the interval.
    GaussLegendre,
    /// Uniform nodes with full weights, the right endpoint excluded:
    /// the natural rule on one period of a torus axis (Fourier-conjugate
    /// momentum grids).
    UniformPeriodic,
    /// Integer label axis: nodes 0..n-1, unit weights. Used for
    /// eigen-index ("pointer") axes where the continuum delta becomes a
    /// Kronecker delta.
    Index,
}

/// One discretized spectral axis: interval of support, strictly
/// increasing nodes inside it, and positive quadrature weights.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralGrid {
    support: (f64, f64),
    nodes: Vec<f64>,
    weights: Vec<f64>,
    label: String,
    rule: QuadRule,
}

impl SpectralGrid {
    /// Build a grid with `n` nodes on `support` using `rule`.
    pub fn new(support: (f64, f64), n: usize, rule: QuadRule, label: &str) -> Result<Self> {
        let (a, b) = support;
        if !a.is_finite() || !b.is_finite() || b <= a {
            return Err(Error::invalid(format!(
                "degenerate interval [{a}, {b}] for axis {label}"
            )));
        }
        if n < 2 && rule != QuadRule::Index {
            return Err(Error::invalid(format!(
                "need at least 2 nodes for axis {label}, got {n}"
            )));
        }
        if n == 0 {
            return Err(Error::invalid(format!("empty grid for axis {label}")));
        }
        let (nodes, weights) = match rule {
            QuadRule::Trapezoid => trapezoid_rule(a, b, n),
            QuadRule::GaussLegendre => gauss_legendre_rule(a, b, n),
            QuadRule::UniformPeriodic => {
                let h = (b - a) / n as f64;
                ((0..n).map(|k| a + k as f64 * h).collect(), vec![h; n])
            }
            QuadRule::Index => ((0..n).map(|k| k as f64).collect(), vec![1.0; n]),
        };
        Ok(SpectralGrid {
            support,
            nodes,
            weights,
            label: label.to_string(),
            rule,
        })
    }

    /// Index axis with `n` unit-weight nodes 0, 1, ..., n-1.
    pub fn index(n: usize, label: &str) -> Result<Self> {
        let top = if n > 1 { (n - 1) as f64 } else { 1.0 };
        Self::new((0.0, top.max(1.0)), n, QuadRule::Index, label)
    }

    /// Single-node axis carrying a trivial label (weight 1).
    pub fn trivial(label: &str) -> Self {
        SpectralGrid {
            support: (0.0, 1.0),
            nodes: vec![0.0],
            weights: vec![1.0],
            label: label.to_string(),
            rule: QuadRule::Index,
        }
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn rule(&self) -> QuadRule {
        self.rule
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Uniform spacing for trapezoid/index grids, minimum spacing otherwise.
    pub fn spacing(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// Length of the support interval.
    pub fn extent(&self) -> f64 {
        self.support.1 - self.support.0
    }

    /// Two grids are compatible when nodes and weights coincide.
    pub fn same_as(&self, other: &SpectralGrid) -> bool {
        self.nodes.len() == other.nodes.len()
            && self
                .nodes
                .iter()
                .zip(&other.nodes)
                .all(|(a, b)| (a - b).abs() <= 1e-14 * (1.0 + a.abs()))
            && self
                .weights
                .iter()
                .zip(&other.weights)
                .all(|(a, b)| (a - b).abs() <= 1e-14 * (1.0 + a.abs()))
    }

    /// Index of the node closest to `x`.
    pub fn nearest(&self, x: f64) -> usize {
        let mut best = 0;
        let mut dist = f64::INFINITY;
        for (i, &n) in self.nodes.iter().enumerate() {
            let d = (n - x).abs();
            if d < dist {
                dist = d;
                best = i;
            }
        }
        best
    }

    /// Linear interpolation weights for an off-node coordinate: the pair of
    /// bracketing indices and the fraction assigned to the upper one.
    /// Coordinates at or beyond the ends clamp to the end node.
    pub fn bracket(&self, x: f64) -> (usize, usize, f64) {
        let n = self.nodes.len();
        if x <= self.nodes[0] {
            return (0, 0, 0.0);
        }
        if x >= self.nodes[n - 1] {
            return (n - 1, n - 1, 0.0);
        }
        let mut hi = match self
            .nodes
            .binary_search_by(|v| v.partial_cmp(&x).expect("finite node"))
        {
            Ok(i) => return (i, i, 0.0),
            Err(i) => i,
        };
        if hi == 0 {
            hi = 1;
        }
        let lo = hi - 1;
        let t = (x - self.nodes[lo]) / (self.nodes[hi] - self.nodes[lo]);
        (lo, hi, t)
    }
}

/// Weighted sum realizing the integral of `values` sampled on `grid`.
pub fn quad_integrate(values: &[Complex64], grid: &SpectralGrid) -> Result<Complex64> {
    if values.len() != grid.len() {
        return Err(Error::invalid(format!(
            "quad_integrate: {} values on a {}-node grid",
            values.len(),
            grid.len()
        )));
    }
    Ok(values
        .iter()
        .zip(grid.weights())
        .map(|(v, w)| v * w)
        .sum())
}

/// Real-valued convenience wrapper over [`quad_integrate`].
pub fn quad_integrate_re(values: &[f64], grid: &SpectralGrid) -> Result<f64> {
    if values.len() != grid.len() {
        return Err(Error::invalid(format!(
            "quad_integrate: {} values on a {}-node grid",
            values.len(),
            grid.len()
        )));
    }
    Ok(values
        .iter()
        .zip(grid.weights())
        .map(|(v, w)| v * w)
        .sum())
}

fn trapezoid_rule(a: f64, b: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let h = (b - a) / (n - 1) as f64;
    let nodes = (0..n).map(|k| a + k as f64 * h).collect();
    let mut weights = vec![h; n];
    weights[0] = 0.5 * h;
    weights[n - 1] = 0.5 * h;
    (nodes, weights)
}

/// Gauss-Legendre nodes/weights by Newton iteration on the Legendre
/// recurrence, mapped from [-1, 1] onto [a, b].
fn gauss_legendre_rule(a: f64, b: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess for the i-th root of P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    for i in 0..n {
        nodes[i] = mid + half * nodes[i];
        weights[i] *= half;
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
