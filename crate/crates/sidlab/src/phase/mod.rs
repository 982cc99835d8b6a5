//! Phase-space symbol calculus: charts, grid-sampled symbols, the exact
//! polynomial backend, Wigner/Weyl transforms, and star products.

pub mod fourier;
pub mod poly;
pub mod star_grid;
pub mod wigner;

use ndarray::{Array2, ArrayD, IxDyn};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::grid::{QuadRule, SpectralGrid};

pub use poly::{moyal_poly, star_order_term, star_poly, weyl_quantize_poly, DiffOp, PolySymbol};
pub use star_grid::{commuting_product_check, star_product, ScalingReport, SymbolRep};
pub use wigner::{weyl_quantize_grid, wigner_symbol, OperatorKernel, SymbolKind};

/// Flat phase space: per-axis grids and the standard symplectic
/// structure in `(q..., p...)` coordinate ordering.
#[derive(Debug, Clone)]
pub struct PhaseSpaceChart {
    q_grids: Vec<SpectralGrid>,
    p_grids: Vec<SpectralGrid>,
    /// Optional descriptor of the conjugate action-angle style variables.
    pub note: Option<String>,
}

impl PhaseSpaceChart {
    pub fn new(q_grids: Vec<SpectralGrid>, p_grids: Vec<SpectralGrid>) -> Result<Self> {
        if q_grids.is_empty() || q_grids.len() != p_grids.len() {
            return Err(Error::invalid(
                "chart needs matching, non-empty q and p grid lists",
            ));
        }
        Ok(PhaseSpaceChart {
            q_grids,
            p_grids,
            note: None,
        })
    }

    /// One degree of freedom with the momentum grid Fourier-conjugate to
    /// the position grid: spacing `2 pi hbar / (n dx)`, centered at
    /// `p_center`.
    pub fn conjugate_1d(x_grid: &SpectralGrid, hbar: f64, p_center: f64) -> Result<Self> {
        let p = conjugate_momentum_grid(x_grid, hbar, p_center)?;
        Self::new(vec![x_grid.clone()], vec![p])
    }

    /// Number of degrees of freedom (N + 1).
    pub fn dof(&self) -> usize {
        self.q_grids.len()
    }

    pub fn q_grid(&self, i: usize) -> &SpectralGrid {
        &self.q_grids[i]
    }

    pub fn p_grid(&self, i: usize) -> &SpectralGrid {
        &self.p_grids[i]
    }

    /// Axis grids in flat coordinate order (q..., p...).
    pub fn axis_grids(&self) -> Vec<&SpectralGrid> {
        self.q_grids.iter().chain(self.p_grids.iter()).collect()
    }

    /// Lower-index symplectic form: [[0, -I], [I, 0]].
    pub fn symplectic_form(&self) -> Array2<i32> {
        let n = self.dof();
        let mut m = Array2::zeros((2 * n, 2 * n));
        for i in 0..n {
            m[(i, n + i)] = -1;
            m[(n + i, i)] = 1;
        }
        m
    }

    /// Upper-index Poisson tensor: [[0, I], [-I, 0]], the inverse of the
    /// symplectic form. Contracting two gradients with it gives the
    /// canonical Poisson bracket.
    pub fn poisson_tensor(&self) -> Array2<i32> {
        let n = self.dof();
        let mut m = Array2::zeros((2 * n, 2 * n));
        for i in 0..n {
            m[(i, n + i)] = 1;
            m[(n + i, i)] = -1;
        }
        m
    }

    /// Shape of a grid-sampled symbol.
    pub fn shape(&self) -> Vec<usize> {
        self.axis_grids().iter().map(|g| g.len()).collect()
    }

    /// Quadrature weight of the multi-indexed cell.
    pub fn weight(&self, idx: &[usize]) -> f64 {
        self.axis_grids()
            .iter()
            .zip(idx)
            .map(|(g, &i)| g.weights()[i])
            .product()
    }

    /// Coordinates of the multi-indexed point, `(q..., p...)`.
    pub fn point(&self, idx: &[usize]) -> Vec<f64> {
        self.axis_grids()
            .iter()
            .zip(idx)
            .map(|(g, &i)| g.nodes()[i])
            .collect()
    }

    /// Iterate all multi-indices of the chart in row-major order.
    pub fn indices(&self) -> GridIndexIter {
        GridIndexIter {
            shape: self.shape(),
            next: Some(vec![0; 2 * self.dof()]),
        }
    }

    /// Whether `phi` lies inside every axis support.
    pub fn contains(&self, phi: &[f64]) -> bool {
        self.axis_grids().iter().zip(phi).all(|(g, &x)| {
            let (a, b) = g.support();
            x >= a - 1e-12 && x <= b + 1e-12
        })
    }
}

/// Row-major iterator over multi-indices.
pub struct GridIndexIter {
    shape: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl Iterator for GridIndexIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.clone()?;
        let mut bump = current.clone();
        let mut axis = bump.len();
        loop {
            if axis == 0 {
                self.next = None;
                break;
            }
            axis -= 1;
            bump[axis] += 1;
            if bump[axis] < self.shape[axis] {
                self.next = Some(bump);
                break;
            }
            bump[axis] = 0;
        }
        Some(current)
    }
}

/// Momentum grid Fourier-conjugate to a uniform position grid.
pub fn conjugate_momentum_grid(x_grid: &SpectralGrid, hbar: f64, center: f64) -> Result<SpectralGrid> {
    let n = x_grid.len();
    let dx = uniform_spacing(x_grid)?;
    let dp = 2.0 * std::f64::consts::PI * hbar / (n as f64 * dx);
    let lo = center - (n as f64 / 2.0) * dp;
    SpectralGrid::new((lo, lo + n as f64 * dp), n, QuadRule::UniformPeriodic, "p")
}

/// Spacing of a grid that must be uniform (trapezoid or periodic rule).
pub fn uniform_spacing(grid: &SpectralGrid) -> Result<f64> {
    let nodes = grid.nodes();
    if nodes.len() < 2 {
        return Err(Error::invalid("grid too small for a spacing"));
    }
    let h = nodes[1] - nodes[0];
    for w in nodes.windows(2) {
        if ((w[1] - w[0]) - h).abs() > 1e-10 * h {
            return Err(Error::invalid(format!(
                "axis {} is not uniformly spaced",
                grid.label()
            )));
        }
    }
    Ok(h)
}

/// Complex-valued function sampled on the chart's tensor grid. The value
/// array's axes follow the chart's flat ordering `(q..., p...)`.
#[derive(Debug, Clone)]
pub struct PhaseSpaceFunction {
    pub chart: PhaseSpaceChart,
    pub values: ArrayD<C64>,
    pub hbar: f64,
}

impl PhaseSpaceFunction {
    pub fn new(chart: PhaseSpaceChart, values: ArrayD<C64>, hbar: f64) -> Result<Self> {
        if values.shape() != chart.shape().as_slice() {
            return Err(Error::invalid(format!(
                "value shape {:?} does not match chart {:?}",
                values.shape(),
                chart.shape()
            )));
        }
        if !(hbar > 0.0) {
            return Err(Error::invalid("hbar must be positive"));
        }
        Ok(PhaseSpaceFunction { chart, values, hbar })
    }

    pub fn from_fn(chart: &PhaseSpaceChart, hbar: f64, f: impl Fn(&[f64]) -> C64) -> Result<Self> {
        let mut values = ArrayD::zeros(IxDyn(&chart.shape()));
        for idx in chart.indices() {
            values[IxDyn(&idx)] = f(&chart.point(&idx));
        }
        Self::new(chart.clone(), values, hbar)
    }

    /// Quadrature integral over the whole grid.
    pub fn integral(&self) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for idx in self.chart.indices() {
            acc += self.values[IxDyn(&idx)] * self.chart.weight(&idx);
        }
        acc
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Pointwise product with another symbol on the same chart.
    pub fn pointwise_mul(&self, other: &PhaseSpaceFunction) -> Result<PhaseSpaceFunction> {
        if self.values.shape() != other.values.shape() {
            return Err(Error::invalid("shape mismatch in pointwise product"));
        }
        Ok(PhaseSpaceFunction {
            chart: self.chart.clone(),
            values: &self.values * &other.values,
            hbar: self.hbar,
        })
    }

    pub fn add(&self, other: &PhaseSpaceFunction) -> Result<PhaseSpaceFunction> {
        if self.values.shape() != other.values.shape() {
            return Err(Error::invalid("shape mismatch in sum"));
        }
        Ok(PhaseSpaceFunction {
            chart: self.chart.clone(),
            values: &self.values + &other.values,
            hbar: self.hbar,
        })
    }

    pub fn scale(&self, factor: C64) -> PhaseSpaceFunction {
        PhaseSpaceFunction {
            chart: self.chart.clone(),
            values: self.values.mapv(|z| z * factor),
            hbar: self.hbar,
        }
    }

    /// Multilinear interpolation at an arbitrary in-domain point.
    pub fn interp(&self, phi: &[f64]) -> Result<C64> {
        if !self.chart.contains(phi) {
            return Err(Error::OutOfDomain(format!("point {phi:?} outside chart")));
        }
        let grids = self.chart.axis_grids();
        let brackets: Vec<(usize, usize, f64)> =
            grids.iter().zip(phi).map(|(g, &x)| g.bracket(x)).collect();
        let dims = brackets.len();
        let mut acc = C64::new(0.0, 0.0);
        for corner in 0..(1usize << dims) {
            let mut idx = Vec::with_capacity(dims);
            let mut w = 1.0;
            for (axis, &(lo, hi, t)) in brackets.iter().enumerate() {
                if corner >> axis & 1 == 1 {
                    idx.push(hi);
                    w *= t;
                } else {
                    idx.push(lo);
                    w *= 1.0 - t;
                }
            }
            if w != 0.0 {
                acc += self.values[IxDyn(&idx)] * w;
            }
        }
        Ok(acc)
    }
}
