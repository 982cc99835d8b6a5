//! Small dense Hermitian eigendecomposition helpers with deterministic
//! ordering and phase conventions, backed by nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

/// Minimum eigenvalue of a Hermitian matrix (input symmetrized first).
pub fn hermitian_eigen_min(m: &DMatrix<C64>) -> f64 {
    let h = hermitize(m);
    let eig = h.symmetric_eigen();
    eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Full eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues are returned in descending order. Each eigenvector's phase
/// is fixed by making its largest-modulus component real positive; exact
/// ties in the eigenvalues are broken by lexicographic order of the
/// eigenvector phase-normalized on its first nonzero component, so
/// repeated runs produce identical output.
pub fn hermitian_eigen_sorted(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let n = m.nrows();
    let h = hermitize(m);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    let scale = eig
        .eigenvalues
        .iter()
        .map(|v| v.abs())
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let tie = 1e-12 * scale;
    let tie_key: Vec<Vec<(f64, f64)>> = (0..n)
        .map(|k| {
            let v = eig.eigenvectors.column(k);
            let first = v.iter().find(|z| z.norm() > 1e-14);
            let phase = match first {
                Some(z) => z.conj() / z.norm(),
                None => C64::new(1.0, 0.0),
            };
            v.iter()
                .map(|z| {
                    let w = phase * z;
                    (w.re, w.im)
                })
                .collect()
        })
        .collect();
    order.sort_by(|&a, &b| {
        let la = eig.eigenvalues[a];
        let lb = eig.eigenvalues[b];
        if (la - lb).abs() > tie {
            lb.partial_cmp(&la).expect("finite eigenvalues")
        } else {
            lex_cmp(&tie_key[a], &tie_key[b])
        }
    });
    let mut values = Vec::with_capacity(n);
    let mut vectors = DMatrix::<C64>::zeros(n, n);
    for (slot, &k) in order.iter().enumerate() {
        values.push(eig.eigenvalues[k]);
        let col = eig.eigenvectors.column(k);
        // Gauge: largest-modulus component real positive.
        let mut best = 0;
        let mut best_mod = -1.0;
        for (i, z) in col.iter().enumerate() {
            if z.norm() > best_mod + 1e-14 {
                best_mod = z.norm();
                best = i;
            }
        }
        let phase = if best_mod > 1e-300 {
            col[best].conj() / col[best].norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..n {
            vectors[(i, slot)] = phase * col[i];
        }
    }
    (values, vectors)
}

fn hermitize(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()).scale(0.5)
}

fn lex_cmp(a: &[(f64, f64)], b: &[(f64, f64)]) -> std::cmp::Ordering {
    for ((ar, ai), (br, bi)) in a.iter().zip(b.iter()) {
        match ar.partial_cmp(br).expect("finite components") {
            std::cmp::Ordering::Equal => {}
            other => return other,
        }
        match ai.partial_cmp(bi).expect("finite components") {
            std::cmp::Ordering::Equal => {}
            other => return other,
        }
    }
    std::cmp::Ordering::Equal
}
