//! Pointer-basis construction: the energy-preserving unitary change of
//! the extra labels that diagonalizes the decohered singular state.
//!
//! Each energy node carries an independent Hermitian eigenproblem for the
//! weighted kernel matrix; the eigenvector kernels assemble the unitary
//! `U(w, p, o)` and the eigenvalues the fully diagonal state `rho(w, p)`.
//! The eigen-index axis `p` is an integer grid with unit weights, so the
//! continuum delta normalization becomes a Kronecker delta.

use ndarray::{Array2, Array3, Array4};
use num_complex::Complex64 as C64;

use crate::algebra::{check_state, Observable, SingularKernel, StateFunctional, StateSingular};
use crate::error::{Error, Result};
use crate::grid::SpectralGrid;
use crate::linalg::hermitian_eigen_sorted;

/// The unitary kernel `U(w, p, o)` of the basis change, per energy node.
#[derive(Debug, Clone)]
pub struct PointerMap {
    pub grid_w: SpectralGrid,
    pub grid_o: SpectralGrid,
    pub grid_p: SpectralGrid,
    /// Indexed `[iw, ip, io]`.
    pub kernel: Array3<C64>,
}

/// The decohered state written in its eigenbasis: `rho(w, p) >= 0` with
/// unit quadrature mass.
#[derive(Debug, Clone)]
pub struct DiagonalState {
    pub grid_w: SpectralGrid,
    pub grid_p: SpectralGrid,
    pub values: Array2<f64>,
}

impl PointerMap {
    /// Identity map on the given grids (p = index axis of the same size).
    pub fn identity(grid_w: &SpectralGrid, grid_o: &SpectralGrid) -> Result<Self> {
        let no = grid_o.len();
        let grid_p = SpectralGrid::index(no, "p")?;
        let mut kernel = Array3::zeros((grid_w.len(), no, no));
        for iw in 0..grid_w.len() {
            for io in 0..no {
                kernel[(iw, io, io)] = C64::new(1.0 / grid_o.weights()[io].sqrt(), 0.0);
            }
        }
        Ok(PointerMap {
            grid_w: grid_w.clone(),
            grid_o: grid_o.clone(),
            grid_p,
            kernel,
        })
    }

    /// Max deviation of `sum_o w_o U(w,p,o) U*(w,p',o)` from the
    /// Kronecker delta, over all energies and index pairs.
    pub fn unitarity_residual(&self) -> f64 {
        let (nw, np, no) = self.kernel.dim();
        let wo = self.grid_o.weights();
        let mut res: f64 = 0.0;
        for iw in 0..nw {
            for p in 0..np {
                for q in 0..np {
                    let mut acc = C64::new(0.0, 0.0);
                    for o in 0..no {
                        acc += self.kernel[(iw, p, o)] * self.kernel[(iw, q, o)].conj() * wo[o];
                    }
                    let target = if p == q { 1.0 } else { 0.0 };
                    res = res.max((acc - C64::new(target, 0.0)).norm());
                }
            }
        }
        res
    }

    /// Rebuild the singular kernel from its eigenbasis representation.
    pub fn reconstruct_singular(&self, diag: &DiagonalState) -> Result<StateFunctional> {
        if !diag.grid_w.same_as(&self.grid_w) || !diag.grid_p.same_as(&self.grid_p) {
            return Err(Error::invalid("diagonal state grids do not match pointer map"));
        }
        let (nw, np, no) = self.kernel.dim();
        let mut sing = Array3::<C64>::zeros((nw, no, no));
        for iw in 0..nw {
            for o in 0..no {
                for oc in 0..no {
                    let mut acc = C64::new(0.0, 0.0);
                    for p in 0..np {
                        acc += self.kernel[(iw, p, o)]
                            * self.kernel[(iw, p, oc)].conj()
                            * diag.values[(iw, p)];
                    }
                    sing[(iw, o, oc)] = acc;
                }
            }
        }
        Ok(StateFunctional {
            grid_w: self.grid_w.clone(),
            grid_o: self.grid_o.clone(),
            singular: StateSingular::Kernel(sing),
            regular: Array4::zeros((nw, nw, no, no)),
        })
    }
}

impl DiagonalState {
    /// Quadrature mass `sum_w w_w sum_p rho(w,p)`.
    pub fn mass(&self) -> f64 {
        let ww = self.grid_w.weights();
        let wp = self.grid_p.weights();
        let mut acc = 0.0;
        for (iw, &w) in ww.iter().enumerate() {
            for (ip, &p) in wp.iter().enumerate() {
                acc += self.values[(iw, ip)] * w * p;
            }
        }
        acc
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Diagonalize a decohered state: per-energy eigendecomposition of the
/// weighted Hermitian kernel matrix.
///
/// Within each energy, eigenvalues are sorted descending; degenerate
/// blocks are ordered by the deterministic eigenvector convention of the
/// underlying eigensolver, and each eigenvector's phase is fixed with its
/// largest-modulus component real positive.
pub fn find_pointer_basis(rho_star: &StateFunctional) -> Result<(PointerMap, DiagonalState)> {
    if rho_star.has_regular_part() {
        return Err(Error::Precondition(
            "pointer basis requires a decohered state (zero regular part)".into(),
        ));
    }
    let kernel = match &rho_star.singular {
        StateSingular::Kernel(k) => k,
        StateSingular::PointMasses(_) => {
            return Err(Error::invalid(
                "pointer basis requires a grid kernel; point masses are already diagonal",
            ))
        }
    };
    let diag = check_state(rho_star)?;
    if diag.hermiticity_residual > 1e-10 {
        return Err(Error::InvalidState(format!(
            "kernel not Hermitian: residual {}",
            diag.hermiticity_residual
        )));
    }

    let (nw, no, _) = kernel.dim();
    let wo = rho_star.grid_o.weights();
    let grid_p = SpectralGrid::index(no, "p")?;
    let mut u = Array3::<C64>::zeros((nw, no, no));
    let mut values = Array2::<f64>::zeros((nw, no));
    let mut min_eig = f64::INFINITY;
    let mut max_eig = 0.0f64;
    for iw in 0..nw {
        let m = nalgebra::DMatrix::<C64>::from_fn(no, no, |j, k| {
            kernel[(iw, j, k)] * C64::new((wo[j] * wo[k]).sqrt(), 0.0)
        });
        let (eigvals, eigvecs) = hermitian_eigen_sorted(&m);
        for (p, &lambda) in eigvals.iter().enumerate() {
            min_eig = min_eig.min(lambda);
            max_eig = max_eig.max(lambda.abs());
            values[(iw, p)] = lambda;
            for o in 0..no {
                u[(iw, p, o)] = eigvecs[(o, p)] / C64::new(wo[o].sqrt(), 0.0);
            }
        }
    }
    if min_eig < -1e-10 * max_eig.max(1.0) {
        return Err(Error::InvalidState(format!(
            "kernel not positive semidefinite: min eigenvalue {min_eig}"
        )));
    }

    let map = PointerMap {
        grid_w: rho_star.grid_w.clone(),
        grid_o: rho_star.grid_o.clone(),
        grid_p,
        kernel: u,
    };
    let state = DiagonalState {
        grid_w: rho_star.grid_w.clone(),
        grid_p: map.grid_p.clone(),
        values,
    };
    Ok((map, state))
}

/// Forward transform of an observable into the eigen-index coordinates:
/// `A(w,p,p') = sum w_o w_o' U(w,p,o) A(w,o,o') U*(w,p',o')`, and per
/// energy pair on the regular kernel.
pub fn transform_observable(a: &Observable, u: &PointerMap) -> Result<Observable> {
    if !a.grid_w.same_as(&u.grid_w) || !a.grid_o.same_as(&u.grid_o) {
        return Err(Error::invalid("observable grids do not match pointer map"));
    }
    let (nw, np, no) = u.kernel.dim();
    let wo = a.grid_o.weights();

    let mut sing = Array3::<C64>::zeros((nw, np, np));
    match &a.singular {
        SingularKernel::Full(k) => {
            for iw in 0..nw {
                for p in 0..np {
                    for q in 0..np {
                        let mut acc = C64::new(0.0, 0.0);
                        for o in 0..no {
                            for oc in 0..no {
                                acc += u.kernel[(iw, p, o)]
                                    * k[(iw, o, oc)]
                                    * u.kernel[(iw, q, oc)].conj()
                                    * (wo[o] * wo[oc]);
                            }
                        }
                        sing[(iw, p, q)] = acc;
                    }
                }
            }
        }
        SingularKernel::DiagonalDelta(d) => {
            // The grid delta collapses one label sum.
            for iw in 0..nw {
                for p in 0..np {
                    for q in 0..np {
                        let mut acc = C64::new(0.0, 0.0);
                        for o in 0..no {
                            acc += u.kernel[(iw, p, o)]
                                * d[(iw, o)]
                                * u.kernel[(iw, q, o)].conj()
                                * wo[o];
                        }
                        sing[(iw, p, q)] = acc;
                    }
                }
            }
        }
    }

    let mut reg = Array4::<C64>::zeros((nw, nw, np, np));
    for iw in 0..nw {
        for jw in 0..nw {
            for p in 0..np {
                for q in 0..np {
                    let mut acc = C64::new(0.0, 0.0);
                    for o in 0..no {
                        for oc in 0..no {
                            acc += u.kernel[(iw, p, o)]
                                * a.regular[(iw, jw, o, oc)]
                                * u.kernel[(jw, q, oc)].conj()
                                * (wo[o] * wo[oc]);
                        }
                    }
                    reg[(iw, jw, p, q)] = acc;
                }
            }
        }
    }

    Ok(Observable {
        grid_w: a.grid_w.clone(),
        grid_o: u.grid_p.clone(),
        singular: SingularKernel::Full(sing),
        regular: reg,
    })
}

/// Dual transform of a state; the conjugate placement mirrors
/// [`transform_observable`] so that pairings are preserved.
pub fn transform_state(rho: &StateFunctional, u: &PointerMap) -> Result<StateFunctional> {
    if !rho.grid_w.same_as(&u.grid_w) || !rho.grid_o.same_as(&u.grid_o) {
        return Err(Error::invalid("state grids do not match pointer map"));
    }
    let kernel = match &rho.singular {
        StateSingular::Kernel(k) => k,
        StateSingular::PointMasses(_) => {
            return Err(Error::invalid("state transform requires a grid kernel"))
        }
    };
    let (nw, np, no) = u.kernel.dim();
    let wo = rho.grid_o.weights();

    let mut sing = Array3::<C64>::zeros((nw, np, np));
    for iw in 0..nw {
        for p in 0..np {
            for q in 0..np {
                let mut acc = C64::new(0.0, 0.0);
                for o in 0..no {
                    for oc in 0..no {
                        acc += u.kernel[(iw, p, o)].conj()
                            * kernel[(iw, o, oc)]
                            * u.kernel[(iw, q, oc)]
                            * (wo[o] * wo[oc]);
                    }
                }
                sing[(iw, p, q)] = acc;
            }
        }
    }

    let mut reg = Array4::<C64>::zeros((nw, nw, np, np));
    for iw in 0..nw {
        for jw in 0..nw {
            for p in 0..np {
                for q in 0..np {
                    let mut acc = C64::new(0.0, 0.0);
                    for o in 0..no {
                        for oc in 0..no {
                            acc += u.kernel[(iw, p, o)].conj()
                                * rho.regular[(iw, jw, o, oc)]
                                * u.kernel[(jw, q, oc)]
                                * (wo[o] * wo[oc]);
                        }
                    }
                    reg[(iw, jw, p, q)] = acc;
                }
            }
        }
    }

    Ok(StateFunctional {
        grid_w: rho.grid_w.clone(),
        grid_o: u.grid_p.clone(),
        singular: StateSingular::Kernel(sing),
        regular: reg,
    })
}

/// Frobenius mass of the off-diagonal entries of the singular kernel,
/// weighted over energies.
pub fn off_diagonal_mass(rho: &StateFunctional) -> f64 {
    let kernel = match &rho.singular {
        StateSingular::Kernel(k) => k,
        StateSingular::PointMasses(ms) => {
            return ms
                .iter()
                .filter(|m| (m.o - m.o_conj).abs() > 1e-12)
                .map(|m| m.weight.norm_sqr())
                .sum::<f64>()
                .sqrt()
        }
    };
    let (nw, no, _) = kernel.dim();
    let ww = rho.grid_w.weights();
    let mut acc = 0.0;
    for iw in 0..nw {
        for o in 0..no {
            for oc in 0..no {
                if o != oc {
                    acc += ww[iw] * kernel[(iw, o, oc)].norm_sqr();
                }
            }
        }
    }
    acc.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::pair;
    use crate::grid::QuadRule;
    use ndarray::Array4;
    use rand::{Rng, SeedableRng};

    fn grids() -> (SpectralGrid, SpectralGrid) {
        let gw = SpectralGrid::new((0.0, 4.0), 12, QuadRule::Trapezoid, "omega").unwrap();
        let go = SpectralGrid::new((-1.0, 1.0), 6, QuadRule::GaussLegendre, "o").unwrap();
        (gw, go)
    }

    fn random_psd_state(seed: u64, gw: &SpectralGrid, go: &SpectralGrid) -> StateFunctional {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let (nw, no) = (gw.len(), go.len());
        let mut sing = Array3::<C64>::zeros((nw, no, no));
        for iw in 0..nw {
            let b = nalgebra::DMatrix::<C64>::from_fn(no, no, |_, _| {
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let m = &b * b.adjoint();
            for j in 0..no {
                for k in 0..no {
                    sing[(iw, j, k)] = m[(j, k)];
                }
            }
        }
        StateFunctional {
            grid_w: gw.clone(),
            grid_o: go.clone(),
            singular: StateSingular::Kernel(sing),
            regular: Array4::zeros((nw, nw, no, no)),
        }
        .normalize()
        .unwrap()
    }

    #[test]
    fn already_diagonal_kernel_gives_diagonal_values() {
        let (gw, go) = grids();
        let diag_vals = [0.9, 0.7, 0.5, 0.3, 0.2, 0.1];
        let rho = StateFunctional::from_fns(
            &gw,
            &go,
            |_, o, oc| {
                if (o - oc).abs() < 1e-12 {
                    let idx = (o * 10.0) as i32;
                    C64::new(0.5 + 0.01 * idx as f64, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            },
            |_, _, _, _| C64::new(0.0, 0.0),
        );
        // Overwrite with explicit per-label values so the expected
        // eigenvalues are known exactly.
        let mut rho = rho;
        if let StateSingular::Kernel(k) = &mut rho.singular {
            for iw in 0..gw.len() {
                for (io, &v) in diag_vals.iter().enumerate() {
                    k[(iw, io, io)] = C64::new(v, 0.0);
                }
            }
        }
        let rho = rho.normalize().unwrap();
        let (map, diag) = find_pointer_basis(&rho).unwrap();
        assert!(map.unitarity_residual() < 1e-10);
        // Eigenvalues per energy: the weighted diagonal entries, sorted
        // descending.
        if let StateSingular::Kernel(k) = &rho.singular {
            for iw in 0..gw.len() {
                let mut expect: Vec<f64> = (0..go.len())
                    .map(|io| (k[(iw, io, io)] * go.weights()[io]).re)
                    .collect();
                expect.sort_by(|a, b| b.partial_cmp(a).unwrap());
                for (p, &e) in expect.iter().enumerate() {
                    assert!((diag.values[(iw, p)] - e).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn rank_one_kernel_has_single_eigenvalue() {
        let (gw, go) = grids();
        let v = |o: f64| C64::new((-o * o).exp(), 0.3 * o);
        let rho = StateFunctional::from_fns(
            &gw,
            &go,
            |w, o, oc| v(o) * v(oc).conj() * C64::new((-(w - 2.0f64).powi(2)).exp(), 0.0),
            |_, _, _, _| C64::new(0.0, 0.0),
        )
        .normalize()
        .unwrap();
        let (map, diag) = find_pointer_basis(&rho).unwrap();
        assert!(map.unitarity_residual() < 1e-10);
        // Weighted norm of v per energy is the only nonzero eigenvalue.
        if let StateSingular::Kernel(k) = &rho.singular {
            for iw in 0..gw.len() {
                let norm2: f64 = (0..go.len())
                    .map(|io| k[(iw, io, io)].re * go.weights()[io])
                    .sum();
                assert!((diag.values[(iw, 0)] - norm2).abs() < 1e-12 * (1.0 + norm2));
                for p in 1..go.len() {
                    assert!(diag.values[(iw, p)].abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn random_psd_roundtrip_and_diagonality() {
        let (gw, go) = grids();
        for seed in [3, 17, 23] {
            let rho = random_psd_state(seed, &gw, &go);
            let (map, diag) = find_pointer_basis(&rho).unwrap();
            assert!(map.unitarity_residual() < 1e-10, "seed {seed}");
            assert!(diag.min_value() >= -1e-12, "seed {seed}");
            assert!((diag.mass() - 1.0).abs() < 1e-10, "seed {seed}");

            let transformed = transform_state(&rho, &map).unwrap();
            assert!(off_diagonal_mass(&transformed) < 1e-10, "seed {seed}");

            let rebuilt = map.reconstruct_singular(&diag).unwrap();
            if let (StateSingular::Kernel(a), StateSingular::Kernel(b)) =
                (&rho.singular, &rebuilt.singular)
            {
                let err = a
                    .iter()
                    .zip(b.iter())
                    .map(|(x, y)| (x - y).norm())
                    .fold(0.0, f64::max);
                assert!(err < 1e-10, "seed {seed}: reconstruction error {err}");
            }
        }
    }

    #[test]
    fn identity_map_is_neutral_and_identity_observable_stays_identity() {
        let (gw, go) = grids();
        let u = PointerMap::identity(&gw, &go).unwrap();
        assert!(u.unitarity_residual() < 1e-12);

        let identity = Observable::identity(&gw, &go);
        let moved = transform_observable(&identity, &u).unwrap();
        // In index coordinates the identity kernel is the Kronecker delta.
        if let SingularKernel::Full(k) = &moved.singular {
            for iw in 0..gw.len() {
                for p in 0..go.len() {
                    for q in 0..go.len() {
                        let want = if p == q { 1.0 } else { 0.0 };
                        assert!((k[(iw, p, q)] - C64::new(want, 0.0)).norm() < 1e-12);
                    }
                }
            }
        }

        let rho = random_psd_state(5, &gw, &go);
        let (map, _) = find_pointer_basis(&rho).unwrap();
        let id_moved = transform_observable(&Observable::identity(&gw, &go), &map).unwrap();
        if let SingularKernel::Full(k) = &id_moved.singular {
            for iw in 0..gw.len() {
                for p in 0..go.len() {
                    for q in 0..go.len() {
                        let want = if p == q { 1.0 } else { 0.0 };
                        assert!((k[(iw, p, q)] - C64::new(want, 0.0)).norm() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn pairing_invariant_under_simultaneous_transform() {
        let (gw, go) = grids();
        let rho_full = {
            let mut rho = random_psd_state(29, &gw, &go);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
            let (nw, no) = (gw.len(), go.len());
            let mut reg = Array4::<C64>::zeros((nw, nw, no, no));
            for i in 0..nw {
                for j in 0..=i {
                    for k in 0..no {
                        for l in 0..no {
                            let z = C64::new(rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1));
                            reg[(i, j, k, l)] = z;
                            reg[(j, i, l, k)] = z.conj();
                        }
                    }
                }
            }
            rho.regular = reg;
            rho
        };
        let a = Observable::from_fns(
            &gw,
            &go,
            |w, o, oc| C64::new(w * (1.0 + o * oc), 0.2 * (o - oc)),
            |w, wc, o, oc| C64::new((w - wc) * o, 0.1 * (w + wc) * (o - oc)),
        );
        let (map, _) = find_pointer_basis(&rho_full.decohered()).unwrap();
        let rho_t = transform_state(&rho_full, &map).unwrap();
        let a_t = transform_observable(&a, &map).unwrap();
        let before = pair(&rho_full, &a).unwrap();
        let after = pair(&rho_t, &a_t).unwrap();
        assert!(
            (before - after).norm() < 1e-10,
            "pairing drifted: {before} -> {after}"
        );

        // Normalization is preserved.
        let id_p = Observable::identity(&gw, &map.grid_p);
        let rho_star_t = transform_state(&rho_full.decohered(), &map).unwrap();
        assert!((pair(&rho_star_t, &id_p).unwrap() - C64::new(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn state_built_from_map_diagonalizes_back() {
        let (gw, go) = grids();
        let rho = random_psd_state(41, &gw, &go);
        let (map, diag) = find_pointer_basis(&rho).unwrap();
        let rebuilt = map.reconstruct_singular(&diag).unwrap();
        let transformed = transform_state(&rebuilt, &map).unwrap();
        if let StateSingular::Kernel(k) = &transformed.singular {
            for iw in 0..gw.len() {
                for p in 0..go.len() {
                    for q in 0..go.len() {
                        if p != q {
                            assert!(k[(iw, p, q)].norm() < 1e-10);
                        } else {
                            assert!((k[(iw, p, q)].re - diag.values[(iw, p)]).abs() < 1e-10);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn spectrum_invariant_under_pre_rotation() {
        // Eigenvalues of the weighted matrix do not change when the state
        // is conjugated by any unitary in the o basis.
        let (gw, go) = grids();
        let rho = random_psd_state(53, &gw, &go);
        let haar = {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(59);
            let no = go.len();
            let b = nalgebra::DMatrix::<C64>::from_fn(no, no, |_, _| {
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let qr = b.qr();
            qr.q()
        };
        // Rotate: rho'(o,o') = sum Q*(o,a) M(a,b) Q(o',b) on the weighted
        // matrix, pushed back through the weight scaling.
        let (nw, no) = (gw.len(), go.len());
        let wo = go.weights();
        let mut rotated = rho.clone();
        if let (StateSingular::Kernel(orig), StateSingular::Kernel(dst)) =
            (&rho.singular, &mut rotated.singular)
        {
            for iw in 0..nw {
                let m = nalgebra::DMatrix::<C64>::from_fn(no, no, |j, k| {
                    orig[(iw, j, k)] * C64::new((wo[j] * wo[k]).sqrt(), 0.0)
                });
                let m2 = &haar * &m * haar.adjoint();
                for j in 0..no {
                    for k in 0..no {
                        dst[(iw, j, k)] = m2[(j, k)] / C64::new((wo[j] * wo[k]).sqrt(), 0.0);
                    }
                }
            }
        }
        let (_, d1) = find_pointer_basis(&rho).unwrap();
        let (_, d2) = find_pointer_basis(&rotated).unwrap();
        let err = d1
            .values
            .iter()
            .zip(d2.values.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "spectra differ by {err}");
    }

    #[test]
    fn energy_diagonal_structure_is_preserved() {
        // An observable with zero regular kernel stays zero there: the
        // transform never mixes energies.
        let (gw, go) = grids();
        let rho = random_psd_state(61, &gw, &go);
        let (map, _) = find_pointer_basis(&rho).unwrap();
        let a = Observable::from_fns(
            &gw,
            &go,
            |w, o, oc| C64::new(w + o * oc, 0.1 * (o - oc)),
            |_, _, _, _| C64::new(0.0, 0.0),
        );
        let moved = transform_observable(&a, &map).unwrap();
        assert!(moved.regular.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn rejects_undecohered_and_nonpositive_input() {
        let (gw, go) = grids();
        let mut rho = random_psd_state(67, &gw, &go);
        rho.regular[(0, 1, 0, 0)] = C64::new(0.5, 0.0);
        assert!(matches!(find_pointer_basis(&rho), Err(Error::Precondition(_))));

        let mut bad = random_psd_state(71, &gw, &go);
        if let StateSingular::Kernel(k) = &mut bad.singular {
            for io in 0..go.len() {
                k[(3, io, io)] = C64::new(-1.0, 0.0);
            }
        }
        assert!(matches!(find_pointer_basis(&bad), Err(Error::InvalidState(_))));
    }
}
