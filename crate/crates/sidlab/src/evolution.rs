//! Liouvillian dynamics of kernels and the decohered long-time limit.
//!
//! The generalized eigenbasis diagonalizes the Liouvillian: singular
//! kernels are frozen and regular kernels pick up the entrywise phase
//! `exp(i (w - w') t / hbar)`. Mean values therefore split into a
//! t-invariant term and a fluctuating oscillatory-integral term whose
//! modulus decays for integrable kernels; the surviving functional is the
//! singular component.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::algebra::{pair_regular, pair_singular, Observable, StateFunctional};
use crate::error::{Error, Result};

/// Time-evolution parameters: the action scale and the sample times.
#[derive(Debug, Clone)]
pub struct EvolutionParams {
    pub hbar: f64,
    pub times: Vec<f64>,
}

impl EvolutionParams {
    pub fn new(hbar: f64, times: Vec<f64>) -> Result<Self> {
        if !(hbar > 0.0) {
            return Err(Error::invalid(format!("hbar must be positive, got {hbar}")));
        }
        if times.windows(2).any(|w| w[1] < w[0]) || times.iter().any(|t| *t < 0.0) {
            return Err(Error::invalid("times must be non-negative and ascending"));
        }
        Ok(EvolutionParams { hbar, times })
    }

    /// Uniformly sampled window [0, t_max].
    pub fn uniform(hbar: f64, t_max: f64, n: usize) -> Result<Self> {
        let times = (0..n).map(|k| t_max * k as f64 / (n - 1).max(1) as f64).collect();
        Self::new(hbar, times)
    }
}

/// One row of the fluctuating-part trace.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TracePoint {
    pub t: f64,
    pub re: f64,
    pub im: f64,
    pub modulus: f64,
}

/// Result of the operational decoherence-time scan.
#[derive(Debug, Clone, Serialize)]
pub struct DecoherenceReport {
    /// First sampled time after which the fluctuating modulus stays below
    /// `epsilon` times its initial value; `None` if it never does.
    pub t_decoherence: Option<f64>,
    pub epsilon: f64,
    /// Centroid of `|w - w'|` weighted by the fluctuating kernel product.
    pub characteristic_energy: Option<f64>,
    /// Heuristic scale `hbar * sqrt(2 ln(1/epsilon)) / spread`.
    pub heuristic_timescale: Option<f64>,
    /// Grid-induced revival time `2 pi hbar / min spacing(w)`; sampled
    /// windows should stay below it.
    pub revival_time: f64,
    pub fluct_trace: Vec<TracePoint>,
}

/// Heisenberg evolution: singular kernel unchanged, regular kernel gets
/// the entrywise phase `exp(i (w - w') t / hbar)`.
pub fn evolve_observable(a: &Observable, t: f64, params: &EvolutionParams) -> Result<Observable> {
    if !t.is_finite() {
        return Err(Error::invalid("evolution time must be finite"));
    }
    let mut out = a.clone();
    apply_phase(&mut out.regular, a.grid_w.nodes(), t, params.hbar);
    Ok(out)
}

/// Dual evolution of a state: the same entrywise phase on the regular
/// kernel, singular part frozen.
pub fn evolve_state(rho: &StateFunctional, t: f64, params: &EvolutionParams) -> Result<StateFunctional> {
    if !t.is_finite() {
        return Err(Error::invalid("evolution time must be finite"));
    }
    let mut out = rho.clone();
    apply_phase(&mut out.regular, rho.grid_w.nodes(), t, params.hbar);
    Ok(out)
}

fn apply_phase(regular: &mut ndarray::Array4<C64>, nodes: &[f64], t: f64, hbar: f64) {
    let (nw, _, no, _) = regular.dim();
    for i in 0..nw {
        for j in 0..nw {
            let phase = C64::from_polar(1.0, (nodes[i] - nodes[j]) * t / hbar);
            for k in 0..no {
                for l in 0..no {
                    regular[(i, j, k, l)] *= phase;
                }
            }
        }
    }
}

/// The fluctuating kernel product reduced over the extra labels:
/// `B(w,w') = sum_{o,o'} w_o w_o' rho_R(w,w',o,o') A_R(w,w',o,o')`.
fn reduced_fluctuation(rho: &StateFunctional, a: &Observable) -> ndarray::Array2<C64> {
    let (nw, _, no, _) = rho.regular.dim();
    let wo = rho.grid_o.weights();
    ndarray::Array2::from_shape_fn((nw, nw), |(i, j)| {
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..no {
            for l in 0..no {
                acc += rho.regular[(i, j, k, l)] * a.regular[(i, j, k, l)] * (wo[k] * wo[l]);
            }
        }
        acc
    })
}

fn fluctuation_at(b: &ndarray::Array2<C64>, nodes: &[f64], ww: &[f64], t: f64, hbar: f64) -> C64 {
    let nw = nodes.len();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..nw {
        for j in 0..nw {
            acc += b[(i, j)] * C64::from_polar(ww[i] * ww[j], (nodes[i] - nodes[j]) * t / hbar);
        }
    }
    acc
}

/// Mean value `(rho | A(t))`: invariant singular term plus fluctuating
/// regular term. Identical to pairing the evolved state with `A`.
pub fn mean_value(rho: &StateFunctional, a: &Observable, t: f64, params: &EvolutionParams) -> Result<C64> {
    let invariant = pair_singular(rho, a)?;
    let b = reduced_fluctuation(rho, a);
    let fluct = fluctuation_at(&b, rho.grid_w.nodes(), rho.grid_w.weights(), t, params.hbar);
    Ok(invariant + fluct)
}

/// The weak long-time limit: the state with its regular part removed.
pub fn decohered_state(rho: &StateFunctional) -> StateFunctional {
    rho.decohered()
}

/// Scan the fluctuating term over the sampled times and locate the
/// epsilon-threshold crossing. Also estimates the characteristic energy
/// of the kernel product and the grid revival time.
pub fn decoherence_time(
    rho: &StateFunctional,
    a: &Observable,
    params: &EvolutionParams,
    epsilon: f64,
) -> Result<DecoherenceReport> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid(format!("epsilon must lie in (0,1), got {epsilon}")));
    }
    // Grid mismatch surfaces through the pairing used below.
    pair_singular(rho, a)?;
    let nodes = rho.grid_w.nodes();
    let ww = rho.grid_w.weights();
    let b = reduced_fluctuation(rho, a);
    let revival_time = 2.0 * std::f64::consts::PI * params.hbar / rho.grid_w.spacing();

    let trace: Vec<TracePoint> = params
        .times
        .iter()
        .map(|&t| {
            let v = fluctuation_at(&b, nodes, ww, t, params.hbar);
            TracePoint {
                t,
                re: v.re,
                im: v.im,
                modulus: v.norm(),
            }
        })
        .collect();

    // |w - w'| centroid and spread of the reduced kernel product.
    let mut mass = 0.0;
    let mut first = 0.0;
    for i in 0..nodes.len() {
        for j in 0..nodes.len() {
            let m = b[(i, j)].norm() * ww[i] * ww[j];
            mass += m;
            first += m * (nodes[i] - nodes[j]).abs();
        }
    }
    let (characteristic_energy, heuristic_timescale) = if mass > 0.0 {
        let e_char = first / mass;
        let mut second = 0.0;
        for i in 0..nodes.len() {
            for j in 0..nodes.len() {
                let m = b[(i, j)].norm() * ww[i] * ww[j];
                second += m * ((nodes[i] - nodes[j]).abs() - e_char).powi(2);
            }
        }
        let spread = (second / mass).sqrt();
        let heuristic = if spread > 0.0 {
            Some(params.hbar * (2.0 * (1.0 / epsilon).ln()).sqrt() / spread)
        } else {
            None
        };
        (Some(e_char), heuristic)
    } else {
        (None, None)
    };

    let f0 = trace.first().map(|p| p.modulus).unwrap_or(0.0);
    let t_decoherence = if f0 == 0.0 {
        Some(0.0)
    } else {
        let threshold = epsilon * f0;
        let mut result = None;
        for (idx, p) in trace.iter().enumerate() {
            if p.modulus <= threshold && trace[idx..].iter().all(|q| q.modulus <= threshold) {
                result = Some(p.t);
                break;
            }
        }
        result
    };

    Ok(DecoherenceReport {
        t_decoherence,
        epsilon,
        characteristic_energy,
        heuristic_timescale,
        revival_time,
        fluct_trace: trace,
    })
}

/// Residual of the duality identity `(rho | A(t)) = (rho(t) | A)`.
pub fn duality_residual(
    rho: &StateFunctional,
    a: &Observable,
    t: f64,
    params: &EvolutionParams,
) -> Result<f64> {
    let lhs = {
        let at = evolve_observable(a, t, params)?;
        pair_singular(rho, &at)? + pair_regular(rho, &at)?
    };
    let rhs = {
        let rt = evolve_state(rho, t, params)?;
        pair_singular(&rt, a)? + pair_regular(&rt, a)?
    };
    Ok((lhs - rhs).norm())
}
