//! Observables and states as kernel pairs over spectral grids.
//!
//! An operator is carried by a singular kernel `A(w, o, o')` supported on
//! the energy diagonal plus a regular kernel `A(w, w', o, o')`. States are
//! elements of the dual space with the same kernel split; their action on
//! an observable is the bilinear pairing [`pair`]. The singular and
//! regular sectors never mix under the pairing.

use ndarray::{Array2, Array3, Array4};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::SpectralGrid;
use crate::linalg::hermitian_eigen_min;

/// Singular kernel of an operator: either a dense `A(w,o,o')` or the
/// delta-diagonal form `d(w,o) * delta(o-o')` of operators that commute
/// with the full CSCO (the identity, H, O themselves).
#[derive(Debug, Clone)]
pub enum SingularKernel {
    Full(Array3<C64>),
    DiagonalDelta(Array2<C64>),
}

impl SingularKernel {
    /// Embed the delta-diagonal form on the grid: the continuum delta
    /// becomes `kron(o,o') / w_o`.
    pub fn to_full(&self, grid_o: &SpectralGrid) -> Array3<C64> {
        match self {
            SingularKernel::Full(a) => a.clone(),
            SingularKernel::DiagonalDelta(d) => {
                let (nw, no) = d.dim();
                let mut full = Array3::zeros((nw, no, no));
                for iw in 0..nw {
                    for io in 0..no {
                        full[(iw, io, io)] = d[(iw, io)] / grid_o.weights()[io];
                    }
                }
                full
            }
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            SingularKernel::Full(a) => a.iter().all(|z| z.norm() == 0.0),
            SingularKernel::DiagonalDelta(d) => d.iter().all(|z| z.norm() == 0.0),
        }
    }
}

/// An element of the operator algebra over `(grid_w, grid_o)`.
#[derive(Debug, Clone)]
pub struct Observable {
    pub grid_w: SpectralGrid,
    pub grid_o: SpectralGrid,
    pub singular: SingularKernel,
    /// `A(w, w', o, o')` indexed `[iw, iw', io, io']`.
    pub regular: Array4<C64>,
}

/// Weighted point mass `(eta, s, s')` of a distributional singular state.
#[derive(Debug, Clone, Copy)]
pub struct PointMass {
    pub omega: f64,
    pub o: f64,
    pub o_conj: f64,
    pub weight: C64,
}

/// Singular part of a state: a grid kernel or a finite point-mass list.
#[derive(Debug, Clone)]
pub enum StateSingular {
    Kernel(Array3<C64>),
    PointMasses(Vec<PointMass>),
}

/// A state functional over `(grid_w, grid_o)`.
#[derive(Debug, Clone)]
pub struct StateFunctional {
    pub grid_w: SpectralGrid,
    pub grid_o: SpectralGrid,
    pub singular: StateSingular,
    /// `rho(w, w', o, o')` indexed `[iw, iw', io, io']`.
    pub regular: Array4<C64>,
}

/// Diagnostics from [`check_state`].
#[derive(Debug, Clone, Serialize)]
pub struct StateDiagnostics {
    /// Max deviation from kernel Hermiticity over both kernels.
    pub hermiticity_residual: f64,
    /// Min eigenvalue over the per-energy weighted singular matrices.
    pub min_eigenvalue: f64,
    /// `|pair(rho, identity) - 1|`.
    pub normalization_residual: f64,
}

impl StateDiagnostics {
    pub fn passes(&self, tol_herm: f64, tol_eig: f64, tol_norm: f64) -> bool {
        self.hermiticity_residual <= tol_herm
            && self.min_eigenvalue >= -tol_eig
            && self.normalization_residual <= tol_norm
    }
}

impl Observable {
    pub fn zero(grid_w: &SpectralGrid, grid_o: &SpectralGrid) -> Self {
        let nw = grid_w.len();
        let no = grid_o.len();
        Observable {
            grid_w: grid_w.clone(),
            grid_o: grid_o.clone(),
            singular: SingularKernel::DiagonalDelta(Array2::zeros((nw, no))),
            regular: Array4::zeros((nw, nw, no, no)),
        }
    }

    /// The identity: `delta(o-o')` on the energy diagonal, no regular part.
    pub fn identity(grid_w: &SpectralGrid, grid_o: &SpectralGrid) -> Self {
        let mut a = Self::zero(grid_w, grid_o);
        a.singular =
            SingularKernel::DiagonalDelta(Array2::from_elem((grid_w.len(), grid_o.len()), C64::new(1.0, 0.0)));
        a
    }

    /// Sample kernels from closures.
    pub fn from_fns(
        grid_w: &SpectralGrid,
        grid_o: &SpectralGrid,
        singular: impl Fn(f64, f64, f64) -> C64,
        regular: impl Fn(f64, f64, f64, f64) -> C64,
    ) -> Self {
        let nw = grid_w.len();
        let no = grid_o.len();
        let ws = grid_w.nodes();
        let os = grid_o.nodes();
        let sing = Array3::from_shape_fn((nw, no, no), |(i, j, k)| singular(ws[i], os[j], os[k]));
        let reg = Array4::from_shape_fn((nw, nw, no, no), |(i, j, k, l)| {
            regular(ws[i], ws[j], os[k], os[l])
        });
        Observable {
            grid_w: grid_w.clone(),
            grid_o: grid_o.clone(),
            singular: SingularKernel::Full(sing),
            regular: reg,
        }
    }

    /// Split into singular and regular components; recombining with
    /// [`Observable::plus`] reproduces the original.
    pub fn split(&self) -> (Observable, Observable) {
        let mut sing = self.clone();
        sing.regular.fill(C64::new(0.0, 0.0));
        let mut reg = self.clone();
        reg.singular = SingularKernel::DiagonalDelta(Array2::zeros((self.grid_w.len(), self.grid_o.len())));
        (sing, reg)
    }

    pub fn plus(&self, other: &Observable) -> Result<Observable> {
        check_same_grids(&self.grid_w, &other.grid_w, &self.grid_o, &other.grid_o)?;
        let singular = match (&self.singular, &other.singular) {
            (SingularKernel::Full(a), SingularKernel::Full(b)) => SingularKernel::Full(a + b),
            (SingularKernel::DiagonalDelta(a), SingularKernel::DiagonalDelta(b)) => {
                SingularKernel::DiagonalDelta(a + b)
            }
            (a, b) => {
                if a.is_zero() {
                    b.clone()
                } else if b.is_zero() {
                    a.clone()
                } else {
                    SingularKernel::Full(&a.to_full(&self.grid_o) + &b.to_full(&self.grid_o))
                }
            }
        };
        Ok(Observable {
            grid_w: self.grid_w.clone(),
            grid_o: self.grid_o.clone(),
            singular,
            regular: &self.regular + &other.regular,
        })
    }

    pub fn scaled(&self, factor: C64) -> Observable {
        let singular = match &self.singular {
            SingularKernel::Full(a) => SingularKernel::Full(a.mapv(|z| z * factor)),
            SingularKernel::DiagonalDelta(d) => SingularKernel::DiagonalDelta(d.mapv(|z| z * factor)),
        };
        Observable {
            grid_w: self.grid_w.clone(),
            grid_o: self.grid_o.clone(),
            singular,
            regular: self.regular.mapv(|z| z * factor),
        }
    }

    /// Max deviation from self-adjointness over both kernels.
    pub fn self_adjointness_residual(&self) -> f64 {
        let mut res: f64 = 0.0;
        match &self.singular {
            SingularKernel::Full(a) => {
                let (nw, no, _) = a.dim();
                for i in 0..nw {
                    for j in 0..no {
                        for k in 0..no {
                            res = res.max((a[(i, j, k)] - a[(i, k, j)].conj()).norm());
                        }
                    }
                }
            }
            SingularKernel::DiagonalDelta(d) => {
                for z in d.iter() {
                    res = res.max(z.im.abs());
                }
            }
        }
        let (nw, _, no, _) = self.regular.dim();
        for i in 0..nw {
            for j in 0..nw {
                for k in 0..no {
                    for l in 0..no {
                        res = res
                            .max((self.regular[(i, j, k, l)] - self.regular[(j, i, l, k)].conj()).norm());
                    }
                }
            }
        }
        res
    }
}

impl StateFunctional {
    pub fn zero(grid_w: &SpectralGrid, grid_o: &SpectralGrid) -> Self {
        let nw = grid_w.len();
        let no = grid_o.len();
        StateFunctional {
            grid_w: grid_w.clone(),
            grid_o: grid_o.clone(),
            singular: StateSingular::Kernel(Array3::zeros((nw, no, no))),
            regular: Array4::zeros((nw, nw, no, no)),
        }
    }

    pub fn from_fns(
        grid_w: &SpectralGrid,
        grid_o: &SpectralGrid,
        singular: impl Fn(f64, f64, f64) -> C64,
        regular: impl Fn(f64, f64, f64, f64) -> C64,
    ) -> Self {
        let nw = grid_w.len();
        let no = grid_o.len();
        let ws = grid_w.nodes();
        let os = grid_o.nodes();
        let sing = Array3::from_shape_fn((nw, no, no), |(i, j, k)| singular(ws[i], os[j], os[k]));
        let reg = Array4::from_shape_fn((nw, nw, no, no), |(i, j, k, l)| {
            regular(ws[i], ws[j], os[k], os[l])
        });
        StateFunctional {
            grid_w: grid_w.clone(),
            grid_o: grid_o.clone(),
            singular: StateSingular::Kernel(sing),
            regular: reg,
        }
    }

    /// Distributional state from weighted point masses; regular part zero.
    pub fn from_point_masses(
        grid_w: &SpectralGrid,
        grid_o: &SpectralGrid,
        masses: Vec<PointMass>,
    ) -> Result<Self> {
        let (wa, wb) = grid_w.support();
        let (oa, ob) = grid_o.support();
        for m in &masses {
            if m.omega < wa - 1e-12 || m.omega > wb + 1e-12 {
                return Err(Error::invalid(format!(
                    "point mass energy {} outside support [{wa}, {wb}]",
                    m.omega
                )));
            }
            for o in [m.o, m.o_conj] {
                if o < oa - 1e-12 || o > ob + 1e-12 {
                    return Err(Error::invalid(format!(
                        "point mass label {o} outside support [{oa}, {ob}]"
                    )));
                }
            }
        }
        let nw = grid_w.len();
        let no = grid_o.len();
        Ok(StateFunctional {
            grid_w: grid_w.clone(),
            grid_o: grid_o.clone(),
            singular: StateSingular::PointMasses(masses),
            regular: Array4::zeros((nw, nw, no, no)),
        })
    }

    /// Zero the regular part: the weak long-time limit of the evolution.
    pub fn decohered(&self) -> StateFunctional {
        let mut out = self.clone();
        out.regular.fill(C64::new(0.0, 0.0));
        out
    }

    pub fn has_regular_part(&self) -> bool {
        self.regular.iter().any(|z| z.norm() > 0.0)
    }

    pub fn plus(&self, other: &StateFunctional) -> Result<StateFunctional> {
        check_same_grids(&self.grid_w, &other.grid_w, &self.grid_o, &other.grid_o)?;
        let singular = match (&self.singular, &other.singular) {
            (StateSingular::Kernel(a), StateSingular::Kernel(b)) => StateSingular::Kernel(a + b),
            (StateSingular::PointMasses(a), StateSingular::PointMasses(b)) => {
                let mut all = a.clone();
                all.extend_from_slice(b);
                StateSingular::PointMasses(all)
            }
            _ => {
                return Err(Error::invalid(
                    "cannot add grid-kernel and point-mass singular parts",
                ))
            }
        };
        Ok(StateFunctional {
            grid_w: self.grid_w.clone(),
            grid_o: self.grid_o.clone(),
            singular,
            regular: &self.regular + &other.regular,
        })
    }

    pub fn scaled(&self, factor: C64) -> StateFunctional {
        let singular = match &self.singular {
            StateSingular::Kernel(a) => StateSingular::Kernel(a.mapv(|z| z * factor)),
            StateSingular::PointMasses(ms) => StateSingular::PointMasses(
                ms.iter()
                    .map(|m| PointMass {
                        weight: m.weight * factor,
                        ..*m
                    })
                    .collect(),
            ),
        };
        StateFunctional {
            grid_w: self.grid_w.clone(),
            grid_o: self.grid_o.clone(),
            singular,
            regular: self.regular.mapv(|z| z * factor),
        }
    }

    /// Rescale so the pairing with the identity is exactly 1.
    pub fn normalize(&self) -> Result<StateFunctional> {
        let identity = Observable::identity(&self.grid_w, &self.grid_o);
        let trace = pair(self, &identity)?;
        if trace.norm() < 1e-300 {
            return Err(Error::DegenerateState(
                "state has zero trace, cannot normalize".into(),
            ));
        }
        Ok(self.scaled(C64::new(1.0, 0.0) / trace))
    }
}

fn check_same_grids(
    wa: &SpectralGrid,
    wb: &SpectralGrid,
    oa: &SpectralGrid,
    ob: &SpectralGrid,
) -> Result<()> {
    if !wa.same_as(wb) || !oa.same_as(ob) {
        return Err(Error::invalid("grid mismatch between state and observable"));
    }
    Ok(())
}

/// Multilinear interpolation of a dense singular kernel at an off-node
/// point; exact at the nodes.
fn interp_singular(a: &Array3<C64>, gw: &SpectralGrid, go: &SpectralGrid, w: f64, o: f64, oc: f64) -> C64 {
    let (i0, i1, ti) = gw.bracket(w);
    let (j0, j1, tj) = go.bracket(o);
    let (k0, k1, tk) = go.bracket(oc);
    let mut acc = C64::new(0.0, 0.0);
    for (i, wi) in [(i0, 1.0 - ti), (i1, ti)] {
        if wi == 0.0 {
            continue;
        }
        for (j, wj) in [(j0, 1.0 - tj), (j1, tj)] {
            if wj == 0.0 {
                continue;
            }
            for (k, wk) in [(k0, 1.0 - tk), (k1, tk)] {
                if wk == 0.0 {
                    continue;
                }
                acc += a[(i, j, k)] * (wi * wj * wk);
            }
        }
    }
    acc
}

fn interp_diag(d: &Array2<C64>, gw: &SpectralGrid, go: &SpectralGrid, w: f64, o: f64) -> C64 {
    let (i0, i1, ti) = gw.bracket(w);
    let (j0, j1, tj) = go.bracket(o);
    let mut acc = C64::new(0.0, 0.0);
    for (i, wi) in [(i0, 1.0 - ti), (i1, ti)] {
        for (j, wj) in [(j0, 1.0 - tj), (j1, tj)] {
            if wi * wj != 0.0 {
                acc += d[(i, j)] * (wi * wj);
            }
        }
    }
    acc
}

/// Pairing of the singular sectors only.
pub fn pair_singular(rho: &StateFunctional, a: &Observable) -> Result<C64> {
    check_same_grids(&rho.grid_w, &a.grid_w, &rho.grid_o, &a.grid_o)?;
    let ww = rho.grid_w.weights();
    let wo = rho.grid_o.weights();
    Ok(match (&rho.singular, &a.singular) {
        (StateSingular::Kernel(r), SingularKernel::Full(k)) => {
            let (nw, no, _) = r.dim();
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..nw {
                for j in 0..no {
                    for l in 0..no {
                        acc += r[(i, j, l)] * k[(i, j, l)] * (ww[i] * wo[j] * wo[l]);
                    }
                }
            }
            acc
        }
        (StateSingular::Kernel(r), SingularKernel::DiagonalDelta(d)) => {
            let (nw, no, _) = r.dim();
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..nw {
                for j in 0..no {
                    acc += r[(i, j, j)] * d[(i, j)] * (ww[i] * wo[j]);
                }
            }
            acc
        }
        (StateSingular::PointMasses(ms), SingularKernel::Full(k)) => ms
            .iter()
            .map(|m| m.weight * interp_singular(k, &rho.grid_w, &rho.grid_o, m.omega, m.o, m.o_conj))
            .sum(),
        (StateSingular::PointMasses(ms), SingularKernel::DiagonalDelta(d)) => ms
            .iter()
            .filter(|m| (m.o - m.o_conj).abs() <= 1e-12)
            .map(|m| m.weight * interp_diag(d, &rho.grid_w, &rho.grid_o, m.omega, m.o))
            .sum(),
    })
}

/// Pairing of the regular sectors only.
pub fn pair_regular(rho: &StateFunctional, a: &Observable) -> Result<C64> {
    check_same_grids(&rho.grid_w, &a.grid_w, &rho.grid_o, &a.grid_o)?;
    let ww = rho.grid_w.weights();
    let wo = rho.grid_o.weights();
    let (nw, _, no, _) = rho.regular.dim();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..nw {
        for j in 0..nw {
            let wij = ww[i] * ww[j];
            for k in 0..no {
                for l in 0..no {
                    acc += rho.regular[(i, j, k, l)] * a.regular[(i, j, k, l)] * (wij * wo[k] * wo[l]);
                }
            }
        }
    }
    Ok(acc)
}

/// The bilinear action of the state on the observable: the weighted sum
/// over the singular kernels plus the weighted sum over the regular
/// kernels. Singular states never see regular kernels and vice versa.
pub fn pair(rho: &StateFunctional, a: &Observable) -> Result<C64> {
    Ok(pair_singular(rho, a)? + pair_regular(rho, a)?)
}

/// Hermiticity, per-energy positivity, and normalization diagnostics.
pub fn check_state(rho: &StateFunctional) -> Result<StateDiagnostics> {
    let mut herm: f64 = 0.0;
    let mut min_eig = f64::INFINITY;
    match &rho.singular {
        StateSingular::Kernel(r) => {
            let (nw, no, _) = r.dim();
            let wo = rho.grid_o.weights();
            for i in 0..nw {
                let mut m = nalgebra::DMatrix::<C64>::zeros(no, no);
                for j in 0..no {
                    for k in 0..no {
                        herm = herm.max((r[(i, j, k)] - r[(i, k, j)].conj()).norm());
                        m[(j, k)] = r[(i, j, k)] * C64::new((wo[j] * wo[k]).sqrt(), 0.0);
                    }
                }
                min_eig = min_eig.min(hermitian_eigen_min(&m));
            }
        }
        StateSingular::PointMasses(ms) => {
            // Hermiticity: every off-diagonal mass needs its mirror with
            // conjugate weight; diagonal masses need real weights.
            for m in ms {
                if (m.o - m.o_conj).abs() <= 1e-12 {
                    herm = herm.max(m.weight.im.abs());
                    min_eig = min_eig.min(m.weight.re);
                } else {
                    let mirror: C64 = ms
                        .iter()
                        .filter(|n| {
                            (n.omega - m.omega).abs() <= 1e-12
                                && (n.o - m.o_conj).abs() <= 1e-12
                                && (n.o_conj - m.o).abs() <= 1e-12
                        })
                        .map(|n| n.weight)
                        .sum();
                    herm = herm.max((m.weight - mirror.conj()).norm());
                }
            }
        }
    }
    let (nw, _, no, _) = rho.regular.dim();
    for i in 0..nw {
        for j in 0..nw {
            for k in 0..no {
                for l in 0..no {
                    herm = herm.max((rho.regular[(i, j, k, l)] - rho.regular[(j, i, l, k)].conj()).norm());
                }
            }
        }
    }
    if min_eig == f64::INFINITY {
        min_eig = 0.0;
    }
    let identity = Observable::identity(&rho.grid_w, &rho.grid_o);
    let normalization_residual = (pair(rho, &identity)? - C64::new(1.0, 0.0)).norm();
    Ok(StateDiagnostics {
        hermiticity_residual: herm,
        min_eigenvalue: min_eig,
        normalization_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{quad_integrate_re, QuadRule};
    use approx::assert_abs_diff_eq;

    fn grids() -> (SpectralGrid, SpectralGrid) {
        let gw = SpectralGrid::new((0.0, 6.0), 48, QuadRule::GaussLegendre, "omega").unwrap();
        let go = SpectralGrid::new((-1.0, 1.0), 12, QuadRule::GaussLegendre, "o").unwrap();
        (gw, go)
    }

    fn gaussian_state(gw: &SpectralGrid, go: &SpectralGrid) -> StateFunctional {
        let rho = StateFunctional::from_fns(
            gw,
            go,
            |w, o, oc| C64::new((-(w - 3.0).powi(2) - o * o - oc * oc).exp(), 0.0),
            |w, wc, o, oc| {
                C64::new(
                    (-(w - 3.0).powi(2) - (wc - 3.0).powi(2) - 0.5 * (o * o + oc * oc)).exp(),
                    0.0,
                ) * C64::new(0.0, 0.3 * (w - wc)).exp()
            },
        );
        rho.normalize().unwrap()
    }

    #[test]
    fn point_mass_pairing_evaluates_kernel() {
        let (gw, go) = grids();
        let a = Observable::from_fns(
            &gw,
            &go,
            |w, o, oc| C64::new(w * o * oc + 1.0, 0.2 * (o - oc)),
            |_, _, _, _| C64::new(0.0, 0.0),
        );
        // On-node point mass: exact kernel evaluation.
        let w0 = gw.nodes()[10];
        let s = go.nodes()[3];
        let rho = StateFunctional::from_point_masses(
            &gw,
            &go,
            vec![PointMass {
                omega: w0,
                o: s,
                o_conj: s,
                weight: C64::new(1.0, 0.0),
            }],
        )
        .unwrap();
        let got = pair(&rho, &a).unwrap();
        let want = C64::new(w0 * s * s + 1.0, 0.0);
        assert_abs_diff_eq!(got.re, want.re, epsilon = 1e-12);
        assert_abs_diff_eq!(got.im, want.im, epsilon = 1e-12);
    }

    #[test]
    fn gaussian_state_pairs_to_one_with_identity() {
        let (gw, go) = grids();
        let rho = gaussian_state(&gw, &go);
        let identity = Observable::identity(&gw, &go);
        let v = pair(&rho, &identity).unwrap();
        assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn pairing_matches_dense_quadrature_oracle() {
        // Oracle: the same continuum integrals evaluated from closures on
        // independent high-order Gauss-Legendre reference grids.
        let (gw, go) = grids();
        let fs = |w: f64, o: f64, oc: f64| {
            C64::new((-(w - 3.0).powi(2) - o * o - oc * oc).exp(), 0.0)
        };
        let fr = |w: f64, wc: f64, o: f64, oc: f64| {
            C64::new(
                (-(w - 3.0).powi(2) - (wc - 3.0).powi(2) - 0.5 * (o * o + oc * oc)).exp(),
                0.0,
            ) * C64::new(0.0, 0.3 * (w - wc)).exp()
        };
        let gs = |w: f64, o: f64, oc: f64| C64::new(0.1 * w * o + 0.2 * oc * oc, 0.0);
        let gr = |w: f64, wc: f64, o: f64, oc: f64| C64::new(0.05 * (w + wc), 0.1 * (o - oc));

        let rho = StateFunctional::from_fns(&gw, &go, fs, fr);
        let a = Observable::from_fns(&gw, &go, gs, gr);
        let got = pair(&rho, &a).unwrap();

        let rw = SpectralGrid::new((0.0, 6.0), 160, QuadRule::GaussLegendre, "w").unwrap();
        let ro = SpectralGrid::new((-1.0, 1.0), 40, QuadRule::GaussLegendre, "o").unwrap();
        let mut want = C64::new(0.0, 0.0);
        for (i, &w) in rw.nodes().iter().enumerate() {
            for (j, &o) in ro.nodes().iter().enumerate() {
                for (k, &oc) in ro.nodes().iter().enumerate() {
                    want += fs(w, o, oc)
                        * gs(w, o, oc)
                        * (rw.weights()[i] * ro.weights()[j] * ro.weights()[k]);
                }
            }
        }
        for (i, &w) in rw.nodes().iter().enumerate() {
            for (j, &wc) in rw.nodes().iter().enumerate() {
                for (k, &o) in ro.nodes().iter().enumerate() {
                    for (l, &oc) in ro.nodes().iter().enumerate() {
                        want += fr(w, wc, o, oc)
                            * gr(w, wc, o, oc)
                            * (rw.weights()[i] * rw.weights()[j] * ro.weights()[k] * ro.weights()[l]);
                    }
                }
            }
        }
        assert!((got - want).norm() < 1e-10, "got {got}, want {want}");
    }

    #[test]
    fn split_roundtrip_and_linearity() {
        let (gw, go) = grids();
        let a = Observable::from_fns(
            &gw,
            &go,
            |w, o, oc| C64::new(w + o * oc, 0.1 * (o - oc)),
            |w, wc, o, oc| C64::new(0.3 * w * wc, 0.2 * (o + oc)),
        );
        let (a_s, a_r) = a.split();
        assert!(matches!(&a_s.singular, SingularKernel::Full(_)));
        assert!(a_s.regular.iter().all(|z| z.norm() == 0.0));
        assert!(a_r.singular.is_zero());

        let rho = gaussian_state(&gw, &go);
        let whole = pair(&rho, &a).unwrap();
        let parts = pair(&rho, &a_s).unwrap() + pair(&rho, &a_r).unwrap();
        assert!((whole - parts).norm() < 1e-12);

        let recombined = a_s.plus(&a_r).unwrap();
        let again = pair(&rho, &recombined).unwrap();
        assert!((whole - again).norm() < 1e-13);
    }

    #[test]
    fn split_of_one_sided_observables() {
        let (gw, go) = grids();
        let pure_s = Observable::from_fns(
            &gw,
            &go,
            |w, _, _| C64::new(w, 0.0),
            |_, _, _, _| C64::new(0.0, 0.0),
        );
        let (s, r) = pure_s.split();
        assert!(!s.singular.is_zero());
        assert!(r.singular.is_zero() && r.regular.iter().all(|z| z.norm() == 0.0));

        let pure_r = Observable::from_fns(
            &gw,
            &go,
            |_, _, _| C64::new(0.0, 0.0),
            |w, wc, _, _| C64::new(w + wc, 0.0),
        );
        let (s, r) = pure_r.split();
        assert!(s.singular.is_zero() && s.regular.iter().all(|z| z.norm() == 0.0));
        assert!(r.regular.iter().any(|z| z.norm() > 0.0));
    }

    #[test]
    fn check_state_flags_negated_diagonal() {
        let (gw, go) = grids();
        let good = gaussian_state(&gw, &go);
        let d = check_state(&good).unwrap();
        assert!(d.min_eigenvalue >= -1e-12, "min eig {}", d.min_eigenvalue);
        assert!(d.normalization_residual < 1e-10);

        let mut bad = good.clone();
        if let StateSingular::Kernel(k) = &mut bad.singular {
            let v = k[(5, 2, 2)];
            k[(5, 2, 2)] = -v;
        }
        let d = check_state(&bad).unwrap();
        assert!(d.min_eigenvalue < 0.0);
    }

    #[test]
    fn psd_by_construction_passes() {
        use rand::{Rng, SeedableRng};
        let (gw, go) = grids();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let no = go.len();
        let nw = gw.len();
        let mut sing = Array3::<C64>::zeros((nw, no, no));
        for i in 0..nw {
            // B * B^dagger per energy node is PSD by construction.
            let b = nalgebra::DMatrix::<C64>::from_fn(no, no, |_, _| {
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let m = &b * b.adjoint();
            for j in 0..no {
                for k in 0..no {
                    sing[(i, j, k)] = m[(j, k)];
                }
            }
        }
        let rho = StateFunctional {
            grid_w: gw.clone(),
            grid_o: go.clone(),
            singular: StateSingular::Kernel(sing),
            regular: Array4::zeros((nw, nw, no, no)),
        }
        .normalize()
        .unwrap();
        let d = check_state(&rho).unwrap();
        assert!(d.min_eigenvalue >= -1e-12);
        assert!(d.hermiticity_residual < 1e-12);
        assert!(d.normalization_residual < 1e-12);
    }

    #[test]
    fn normalize_scales_and_is_idempotent() {
        let (gw, go) = grids();
        let rho = gaussian_state(&gw, &go);
        let doubled = rho.scaled(C64::new(2.0, 0.0));
        let back = doubled.normalize().unwrap();
        let identity = Observable::identity(&gw, &go);
        assert!((pair(&back, &identity).unwrap() - C64::new(1.0, 0.0)).norm() < 1e-12);

        let again = back.normalize().unwrap();
        if let (StateSingular::Kernel(a), StateSingular::Kernel(b)) = (&back.singular, &again.singular) {
            let diff = a
                .iter()
                .zip(b.iter())
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max);
            assert!(diff < 1e-15);
        } else {
            panic!("expected kernel representation");
        }
    }

    #[test]
    fn zero_trace_state_cannot_normalize() {
        let (gw, go) = grids();
        let rho = StateFunctional::zero(&gw, &go);
        assert!(matches!(rho.normalize(), Err(Error::DegenerateState(_))));
    }

    #[test]
    fn pairing_is_bilinear() {
        let (gw, go) = grids();
        let rho1 = gaussian_state(&gw, &go);
        let rho2 = StateFunctional::from_fns(
            &gw,
            &go,
            |w, o, oc| C64::new((-(w - 2.0).powi(2)).exp() * (1.0 + o * oc), 0.0),
            |w, wc, o, oc| C64::new(0.1 * (-(w - wc).powi(2)).exp(), 0.05 * (o - oc)),
        );
        let a = Observable::from_fns(
            &gw,
            &go,
            |w, o, _| C64::new(w * w + o, 0.0),
            |w, wc, o, oc| C64::new(w + wc, o - oc),
        );
        let alpha = C64::new(0.7, -0.2);
        let beta = C64::new(-1.3, 0.4);
        let combo = rho1.scaled(alpha).plus(&rho2.scaled(beta)).unwrap();
        let lhs = pair(&combo, &a).unwrap();
        let rhs = alpha * pair(&rho1, &a).unwrap() + beta * pair(&rho2, &a).unwrap();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn singular_regular_orthogonality() {
        let (gw, go) = grids();
        let pure_singular = gaussian_state(&gw, &go).decohered();
        let pure_regular_obs = Observable::from_fns(
            &gw,
            &go,
            |_, _, _| C64::new(0.0, 0.0),
            |w, wc, o, oc| C64::new(w * wc + o * oc, w - wc),
        );
        let v = pair(&pure_singular, &pure_regular_obs).unwrap();
        assert_eq!(v, C64::new(0.0, 0.0));

        let pure_regular_state = {
            let mut s = gaussian_state(&gw, &go);
            s.singular = StateSingular::Kernel(Array3::zeros((gw.len(), go.len(), go.len())));
            s
        };
        let pure_singular_obs = Observable::from_fns(
            &gw,
            &go,
            |w, o, oc| C64::new(w + o + oc, 0.0),
            |_, _, _, _| C64::new(0.0, 0.0),
        );
        let v = pair(&pure_regular_state, &pure_singular_obs).unwrap();
        assert_eq!(v, C64::new(0.0, 0.0));
    }

    #[test]
    fn hermitian_pairings_are_real() {
        let (gw, go) = grids();
        let rho = gaussian_state(&gw, &go);
        // Self-adjoint observable: symmetric singular kernel, regular
        // kernel with the conjugate-transpose symmetry.
        let a = Observable::from_fns(
            &gw,
            &go,
            |w, o, oc| C64::new(w * (o * oc + 1.0), 0.4 * (o - oc)),
            |w, wc, o, oc| C64::new((w * wc).cos() * (o + oc), 0.3 * (w - wc) + 0.1 * (o - oc)),
        );
        assert!(a.self_adjointness_residual() < 1e-12);
        let d = check_state(&rho).unwrap();
        assert!(d.hermiticity_residual < 1e-12);
        let v = pair(&rho, &a).unwrap();
        assert!(v.im.abs() < 1e-12, "imaginary pairing {v}");
    }

    #[test]
    fn truncation_mass_diagnostic() {
        // The energy support is truncated; the state carries negligible
        // mass near the cut. Report the boundary row mass as a check.
        let (gw, go) = grids();
        let rho = gaussian_state(&gw, &go);
        if let StateSingular::Kernel(k) = &rho.singular {
            let nw = gw.len();
            let edge: f64 = (0..go.len())
                .map(|j| k[(nw - 1, j, j)].norm())
                .sum::<f64>();
            assert!(edge < 1e-3, "state mass at the truncation edge: {edge}");
        }
        let vals: Vec<f64> = gw.nodes().iter().map(|&w| (-(w - 3.0f64).powi(2)).exp()).collect();
        let mass = quad_integrate_re(&vals, &gw).unwrap();
        assert!(mass > 0.0);
    }
}
