//! Wigner transform of position-basis kernels and its inverse.
//!
//! The transform is computed through the midpoint form
//! `W(q, p) = integral K(q + s/2, q - s/2) exp(-i p s / hbar) ds`,
//! with the kernel trigonometrically upsampled to the half-step lattice
//! so the s-sum runs over every available separation. With a momentum
//! grid at the Fourier-conjugate spacing `2 pi hbar / (n dx)` the
//! transform and [`weyl_quantize_grid`] invert each other up to the mass
//! the kernel carries near the domain edge.

use ndarray::{Array1, Array2, ArrayD, IxDyn};
use num_complex::Complex64 as C64;

use super::fourier::{upsample2, upsample2_square};
use super::{uniform_spacing, PhaseSpaceChart, PhaseSpaceFunction};
use crate::error::{Error, Result};
use crate::grid::SpectralGrid;

/// Normalization convention: operator symbols are bare; state symbols
/// divide by `(2 pi hbar)^dof`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    Observable,
    State,
}

/// Position-basis operator kernel on a uniform grid: a dense part
/// `K(x, x')` plus an optional delta-diagonal part `d(x) delta(x - x')`.
#[derive(Debug, Clone)]
pub struct OperatorKernel {
    pub x_grid: SpectralGrid,
    pub matrix: Array2<C64>,
    pub diagonal: Option<Array1<C64>>,
}

impl OperatorKernel {
    pub fn new(x_grid: SpectralGrid, matrix: Array2<C64>) -> Result<Self> {
        let (r, c) = matrix.dim();
        if r != c || r != x_grid.len() {
            return Err(Error::invalid(format!(
                "kernel must be square on the position grid: {r}x{c} vs {} nodes",
                x_grid.len()
            )));
        }
        uniform_spacing(&x_grid)?;
        Ok(OperatorKernel {
            x_grid,
            matrix,
            diagonal: None,
        })
    }

    /// Rank-one projector `psi(x) conj(psi(x'))`.
    pub fn projector(x_grid: SpectralGrid, psi: &[C64]) -> Result<Self> {
        if psi.len() != x_grid.len() {
            return Err(Error::invalid("wavefunction length does not match grid"));
        }
        let n = psi.len();
        let matrix = Array2::from_shape_fn((n, n), |(i, j)| psi[i] * psi[j].conj());
        Self::new(x_grid, matrix)
    }

    /// Delta-diagonal multiplication operator `d(x) delta(x - x')`.
    pub fn diagonal_multiplier(x_grid: SpectralGrid, d: Array1<C64>) -> Result<Self> {
        if d.len() != x_grid.len() {
            return Err(Error::invalid("diagonal length does not match grid"));
        }
        let n = x_grid.len();
        let mut k = Self::new(x_grid, Array2::zeros((n, n)))?;
        k.diagonal = Some(d);
        Ok(k)
    }

    /// Quadrature trace of the dense part.
    pub fn trace(&self) -> C64 {
        self.matrix
            .diag()
            .iter()
            .zip(self.x_grid.weights())
            .map(|(z, w)| z * w)
            .sum()
    }

    /// Scale so the dense-part trace is one.
    pub fn normalize_trace(&self) -> Result<OperatorKernel> {
        let t = self.trace();
        if t.norm() < 1e-300 {
            return Err(Error::DegenerateState("kernel has zero trace".into()));
        }
        let mut out = self.clone();
        out.matrix.mapv_inplace(|z| z / t);
        if let Some(d) = &mut out.diagonal {
            d.mapv_inplace(|z| z / t);
        }
        Ok(out)
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let n = self.matrix.nrows();
        let mut res: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                res = res.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        if let Some(d) = &self.diagonal {
            for z in d.iter() {
                res = res.max(z.im.abs());
            }
        }
        res
    }
}

/// Wigner transform of a position-basis kernel onto the chart's
/// `(q, p)` grid. The chart must have one degree of freedom with its
/// position grid equal to the kernel grid.
pub fn wigner_symbol(
    kernel: &OperatorKernel,
    chart: &PhaseSpaceChart,
    hbar: f64,
    kind: SymbolKind,
) -> Result<PhaseSpaceFunction> {
    if chart.dof() != 1 {
        return Err(Error::invalid(
            "grid Wigner transform is implemented for one degree of freedom",
        ));
    }
    if !chart.q_grid(0).same_as(&kernel.x_grid) {
        return Err(Error::invalid("chart position grid differs from kernel grid"));
    }
    let n = kernel.x_grid.len();
    let dx = uniform_spacing(&kernel.x_grid)?;
    let p_nodes = chart.p_grid(0).nodes();
    let np = p_nodes.len();

    let up = upsample2_square(&kernel.matrix);
    let mut values = ArrayD::<C64>::zeros(IxDyn(&[n, np]));
    for j in 0..n {
        let reach = (2 * j).min(2 * (n - 1) - 2 * j);
        // Gather K(q + s/2, q - s/2) along the anti-diagonal through 2j.
        let slice: Vec<C64> = (0..=2 * reach)
            .map(|t| {
                let k = t as isize - reach as isize;
                up[((2 * j as isize + k) as usize, (2 * j as isize - k) as usize)]
            })
            .collect();
        for (m, &p) in p_nodes.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (t, &kv) in slice.iter().enumerate() {
                let s = (t as isize - reach as isize) as f64 * dx;
                acc += kv * C64::from_polar(dx, -p * s / hbar);
            }
            values[IxDyn(&[j, m])] = acc;
        }
    }
    if let Some(d) = &kernel.diagonal {
        for j in 0..n {
            for m in 0..np {
                values[IxDyn(&[j, m])] += d[j];
            }
        }
    }
    if kind == SymbolKind::State {
        let divisor = 2.0 * std::f64::consts::PI * hbar;
        values.mapv_inplace(|z| z / divisor);
    }
    PhaseSpaceFunction::new(chart.clone(), values, hbar)
}

/// Inverse of [`wigner_symbol`]: build the position-basis kernel
/// `K(x, x') = (2 pi hbar)^-1 integral f((x + x')/2, p)
///             exp(i p (x - x') / hbar) dp`,
/// the midpoint evaluated by trigonometric interpolation.
pub fn weyl_quantize_grid(f: &PhaseSpaceFunction, kind: SymbolKind) -> Result<OperatorKernel> {
    if f.chart.dof() != 1 {
        return Err(Error::invalid(
            "grid Weyl quantization is implemented for one degree of freedom",
        ));
    }
    let x_grid = f.chart.q_grid(0).clone();
    let n = x_grid.len();
    let dx = uniform_spacing(&x_grid)?;
    let p_grid = f.chart.p_grid(0);
    let np = p_grid.len();

    // Upsample each momentum column along the position axis.
    let mut f_up = Array2::<C64>::zeros((2 * n, np));
    for m in 0..np {
        let col: Vec<C64> = (0..n).map(|j| f.values[IxDyn(&[j, m])]).collect();
        for (u, z) in upsample2(&col).into_iter().enumerate() {
            f_up[(u, m)] = z;
        }
    }

    let factor = match kind {
        SymbolKind::Observable => 1.0 / (2.0 * std::f64::consts::PI * f.hbar),
        SymbolKind::State => 1.0,
    };
    let mut matrix = Array2::<C64>::zeros((n, n));
    for a in 0..n {
        for b in 0..n {
            let mid = a + b;
            let sep = (a as isize - b as isize) as f64 * dx;
            let mut acc = C64::new(0.0, 0.0);
            for (m, (&p, &w)) in p_grid.nodes().iter().zip(p_grid.weights()).enumerate() {
                acc += f_up[(mid, m)] * C64::from_polar(w, p * sep / f.hbar);
            }
            matrix[(a, b)] = acc * factor;
        }
    }
    OperatorKernel::new(x_grid, matrix)
}
