//! DFT-based spectral differentiation and trigonometric upsampling for
//! grid-sampled symbols. Samples are treated as one period of length
//! `n * spacing`; the corpus of decaying kernels makes the periodic
//! extension harmless.

use ndarray::{ArrayD, Axis};
use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

fn fft_inplace(data: &mut [C64], inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(data.len())
    } else {
        planner.plan_fft_forward(data.len())
    };
    fft.process(data);
    if inverse {
        let scale = 1.0 / data.len() as f64;
        for z in data.iter_mut() {
            *z *= scale;
        }
    }
}

/// Signed wavenumber index for bin `j` of an `n`-point DFT.
fn signed_freq(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// `order`-th spectral derivative along `axis`; `period` is the axis
/// period `n * spacing`.
pub fn spectral_derivative_axis(
    values: &ArrayD<C64>,
    axis: usize,
    period: f64,
    order: u32,
) -> ArrayD<C64> {
    if order == 0 {
        return values.clone();
    }
    let n = values.shape()[axis];
    let base = 2.0 * std::f64::consts::PI / period;
    let mut out = values.clone();
    for mut lane in out.lanes_mut(Axis(axis)) {
        let mut buf: Vec<C64> = lane.iter().copied().collect();
        fft_inplace(&mut buf, false);
        for (j, z) in buf.iter_mut().enumerate() {
            let mut k = signed_freq(j, n);
            // The unpaired Nyquist mode has no well-defined odd
            // derivative; drop it there.
            if n % 2 == 0 && j == n / 2 && order % 2 == 1 {
                k = 0;
                *z = C64::new(0.0, 0.0);
            }
            let ik = C64::new(0.0, k as f64 * base);
            *z *= ik.powu(order);
        }
        fft_inplace(&mut buf, true);
        for (dst, src) in lane.iter_mut().zip(buf.iter()) {
            *dst = *src;
        }
    }
    out
}

/// Trigonometric 2x upsampling of a 1D sequence: returns `2n` samples on
/// the same period with the originals at even indices.
pub fn upsample2(data: &[C64]) -> Vec<C64> {
    let n = data.len();
    let mut spec: Vec<C64> = data.to_vec();
    fft_inplace(&mut spec, false);
    let mut padded = vec![C64::new(0.0, 0.0); 2 * n];
    for (j, z) in spec.iter().enumerate() {
        let k = signed_freq(j, n);
        if n % 2 == 0 && j == n / 2 {
            // Split the Nyquist bin symmetrically.
            let half = *z * 0.5;
            padded[n / 2] = half;
            padded[2 * n - n / 2] = half;
        } else {
            let idx = if k >= 0 { k as usize } else { 2 * n - (-k) as usize };
            padded[idx] = *z;
        }
    }
    fft_inplace(&mut padded, true);
    // The inverse scaled by 1/(2n); the forward gathered n samples.
    for z in padded.iter_mut() {
        *z *= 2.0;
    }
    padded
}

/// 2x upsampling of a square matrix along both axes (rows then columns).
pub fn upsample2_square(m: &ndarray::Array2<C64>) -> ndarray::Array2<C64> {
    let (nr, nc) = m.dim();
    let mut rows = ndarray::Array2::<C64>::zeros((nr, 2 * nc));
    for (i, row) in m.outer_iter().enumerate() {
        let v: Vec<C64> = row.iter().copied().collect();
        for (j, z) in upsample2(&v).into_iter().enumerate() {
            rows[(i, j)] = z;
        }
    }
    let mut out = ndarray::Array2::<C64>::zeros((2 * nr, 2 * nc));
    for j in 0..2 * nc {
        let col: Vec<C64> = (0..nr).map(|i| rows[(i, j)]).collect();
        for (i, z) in upsample2(&col).into_iter().enumerate() {
            out[(i, j)] = z;
        }
    }
    out
}
