//! Exact sparse-polynomial symbols and their star algebra.
//!
//! Polynomials carry the identities that must hold exactly: the star
//! product terminates, the Moyal bracket is assembled from the odd
//! bidifferential terms only (no cancellation of rounded even terms),
//! and 1-dof symbols can be Weyl-quantized into normal-ordered
//! differential operators for independent operator-composition checks.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Sparse polynomial on phase space: exponent vector (q powers, then p
/// powers; length `2 * dof`) to complex coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct PolySymbol {
    dof: usize,
    terms: BTreeMap<Vec<u32>, C64>,
}

const TRIM: f64 = 0.0;

impl PolySymbol {
    pub fn zero(dof: usize) -> Self {
        PolySymbol {
            dof,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dof: usize, c: C64) -> Self {
        let mut s = Self::zero(dof);
        if c.norm() > TRIM {
            s.terms.insert(vec![0; 2 * dof], c);
        }
        s
    }

    /// The coordinate `q_i`.
    pub fn q(dof: usize, i: usize) -> Self {
        let mut e = vec![0; 2 * dof];
        e[i] = 1;
        Self::monomial(dof, e, C64::new(1.0, 0.0))
    }

    /// The coordinate `p_i`.
    pub fn p(dof: usize, i: usize) -> Self {
        let mut e = vec![0; 2 * dof];
        e[dof + i] = 1;
        Self::monomial(dof, e, C64::new(1.0, 0.0))
    }

    pub fn monomial(dof: usize, exponents: Vec<u32>, c: C64) -> Self {
        assert_eq!(exponents.len(), 2 * dof);
        let mut s = Self::zero(dof);
        if c.norm() > TRIM {
            s.terms.insert(exponents, c);
        }
        s
    }

    pub fn dof(&self) -> usize {
        self.dof
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &C64)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// Largest coefficient modulus.
    pub fn coeff_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn insert(&mut self, e: Vec<u32>, c: C64) {
        if c.norm() == 0.0 {
            return;
        }
        let v = self.terms.get(&e).copied().unwrap_or(C64::new(0.0, 0.0)) + c;
        if v.norm() == 0.0 {
            // Keep the map sparse when terms cancel exactly.
            self.terms.remove(&e);
        } else {
            self.terms.insert(e, v);
        }
    }

    pub fn add(&self, other: &PolySymbol) -> PolySymbol {
        assert_eq!(self.dof, other.dof);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert(e.clone(), *c);
        }
        out
    }

    pub fn sub(&self, other: &PolySymbol) -> PolySymbol {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, factor: C64) -> PolySymbol {
        let mut out = Self::zero(self.dof);
        for (e, c) in &self.terms {
            let v = c * factor;
            if v.norm() > TRIM {
                out.terms.insert(e.clone(), v);
            }
        }
        out
    }

    /// Pointwise (commutative) product.
    pub fn mul(&self, other: &PolySymbol) -> PolySymbol {
        assert_eq!(self.dof, other.dof);
        let mut out = Self::zero(self.dof);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.insert(e, ca * cb);
            }
        }
        out
    }

    pub fn powi(&self, n: u32) -> PolySymbol {
        let mut out = Self::constant(self.dof, C64::new(1.0, 0.0));
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Partial derivative along flat axis index (0..dof = q, dof..2dof = p).
    pub fn deriv(&self, axis: usize) -> PolySymbol {
        let mut out = Self::zero(self.dof);
        for (e, c) in &self.terms {
            if e[axis] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[axis] -= 1;
            out.insert(e2, c * e[axis] as f64);
        }
        out
    }

    fn deriv_multi(&self, alpha_q: &[u32], beta_p: &[u32]) -> PolySymbol {
        let mut out = self.clone();
        for (i, &a) in alpha_q.iter().enumerate() {
            for _ in 0..a {
                out = out.deriv(i);
            }
        }
        for (i, &b) in beta_p.iter().enumerate() {
            for _ in 0..b {
                out = out.deriv(self.dof + i);
            }
        }
        out
    }

    /// Evaluate at the phase-space point `(q..., p...)`.
    pub fn eval(&self, phi: &[f64]) -> C64 {
        assert_eq!(phi.len(), 2 * self.dof);
        let mut acc = C64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut m = 1.0;
            for (x, &k) in phi.iter().zip(e.iter()) {
                m *= x.powi(k as i32);
            }
            acc += c * m;
        }
        acc
    }

    /// Gradient with respect to all 2*dof coordinates at a point.
    pub fn grad(&self, phi: &[f64]) -> Vec<f64> {
        (0..2 * self.dof).map(|a| self.deriv(a).eval(phi).re).collect()
    }

    /// Canonical Poisson bracket `sum_i (df/dq_i dg/dp_i - df/dp_i dg/dq_i)`.
    pub fn poisson(&self, other: &PolySymbol) -> PolySymbol {
        assert_eq!(self.dof, other.dof);
        let mut out = Self::zero(self.dof);
        for i in 0..self.dof {
            out = out.add(&self.deriv(i).mul(&other.deriv(self.dof + i)));
            out = out.sub(&self.deriv(self.dof + i).mul(&other.deriv(i)));
        }
        out
    }

    /// Whether every monomial involves only q's or only p's (separable
    /// Hamiltonian `T(p) + V(q)`).
    pub fn is_separable(&self) -> bool {
        self.terms.keys().all(|e| {
            let dq: u32 = e[..self.dof].iter().sum();
            let dp: u32 = e[self.dof..].iter().sum();
            dq == 0 || dp == 0
        })
    }
}

/// All multi-indices over `dof` slots with total weight `total`.
pub(crate) fn multi_indices(dof: usize, total: u32) -> Vec<Vec<u32>> {
    if dof == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for head in 0..=total {
        for mut tail in multi_indices(dof - 1, total - head) {
            let mut v = Vec::with_capacity(dof);
            v.push(head);
            v.append(&mut tail);
            out.push(v);
        }
    }
    out
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(|x| x as f64).product()
}

fn multi_factorial(e: &[u32]) -> f64 {
    e.iter().map(|&k| factorial(k)).product()
}

/// The r-th bidifferential term of the star expansion, normalized so
/// `f * g = sum_r hbar^r P^r(f, g)`:
/// `P^r = sum_{|a|+|b|=r} (i/2)^{|a|} (-i/2)^{|b|} / (a! b!)
///        (d_q^a d_p^b f) (d_p^a d_q^b g)`.
pub fn star_order_term(f: &PolySymbol, g: &PolySymbol, r: u32) -> PolySymbol {
    assert_eq!(f.dof(), g.dof());
    let dof = f.dof();
    let half_i = C64::new(0.0, 0.5);
    let mut out = PolySymbol::zero(dof);
    for na in 0..=r {
        let nb = r - na;
        for alpha in multi_indices(dof, na) {
            let df_base: Vec<u32> = alpha.clone();
            for beta in multi_indices(dof, nb) {
                let df = f.deriv_multi(&df_base, &beta);
                if df.is_zero() {
                    continue;
                }
                let dg = g.deriv_multi(&beta, &alpha);
                if dg.is_zero() {
                    continue;
                }
                let coeff = half_i.powu(na) * (-half_i).powu(nb)
                    / (multi_factorial(&alpha) * multi_factorial(&beta));
                out = out.add(&df.mul(&dg).scale(coeff));
            }
        }
    }
    out
}

/// Exact star product of polynomial symbols (the expansion terminates at
/// the total degree).
pub fn star_poly(f: &PolySymbol, g: &PolySymbol, hbar: f64) -> PolySymbol {
    star_poly_truncated(f, g, hbar, f.total_degree() + g.total_degree())
}

/// Star product truncated at order `max_order` in hbar.
pub fn star_poly_truncated(f: &PolySymbol, g: &PolySymbol, hbar: f64, max_order: u32) -> PolySymbol {
    let mut out = PolySymbol::zero(f.dof());
    for r in 0..=max_order {
        let term = star_order_term(f, g, r);
        if term.is_zero() {
            // Higher orders only lose more derivatives once both degrees
            // are exhausted.
            if r > f.total_degree().min(g.total_degree()) {
                break;
            }
            continue;
        }
        out = out.add(&term.scale(C64::new(hbar.powi(r as i32), 0.0)));
    }
    out
}

/// Exact Moyal bracket, assembled from the odd star terms:
/// `{f,g}_mb = (2/i) sum_{r odd} hbar^(r-1) P^r(f,g)`.
/// Reduces to the Poisson bracket exactly when all higher odd terms
/// vanish (total degree <= 2).
pub fn moyal_poly(f: &PolySymbol, g: &PolySymbol, hbar: f64) -> PolySymbol {
    let mut out = PolySymbol::zero(f.dof());
    let two_over_i = C64::new(0.0, -2.0);
    let max_order = f.total_degree() + g.total_degree();
    let mut r = 1;
    while r <= max_order {
        let term = star_order_term(f, g, r);
        if !term.is_zero() {
            out = out.add(&term.scale(two_over_i * hbar.powi(r as i32 - 1)));
        }
        r += 2;
    }
    out
}

/// Normal-ordered differential operator on the line: terms
/// `c * x^a d^b` with all multiplications left of all derivatives.
/// Produced by Weyl quantization of 1-dof polynomial symbols; the
/// hbar factors of momentum are baked into the coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffOp {
    terms: BTreeMap<(u32, u32), C64>,
}

impl DiffOp {
    pub fn zero() -> Self {
        DiffOp {
            terms: BTreeMap::new(),
        }
    }

    pub fn identity() -> Self {
        let mut terms = BTreeMap::new();
        terms.insert((0, 0), C64::new(1.0, 0.0));
        DiffOp { terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &C64)> {
        self.terms.iter()
    }

    fn insert(&mut self, key: (u32, u32), c: C64) {
        if c.norm() == 0.0 {
            return;
        }
        let v = self.terms.get(&key).copied().unwrap_or(C64::new(0.0, 0.0)) + c;
        if v.norm() == 0.0 {
            self.terms.remove(&key);
        } else {
            self.terms.insert(key, v);
        }
    }

    pub fn add(&self, other: &DiffOp) -> DiffOp {
        let mut out = self.clone();
        for (&k, &c) in &other.terms {
            out.insert(k, c);
        }
        out
    }

    pub fn scale(&self, factor: C64) -> DiffOp {
        let mut out = DiffOp::zero();
        for (&k, &c) in &self.terms {
            out.insert(k, c * factor);
        }
        out
    }

    /// Operator composition (self after other), normal-ordering the
    /// result via `d^b x^a2 = sum_k C(b,k) (a2)_k x^(a2-k) d^(b-k)`.
    pub fn compose(&self, other: &DiffOp) -> DiffOp {
        let mut out = DiffOp::zero();
        for (&(a1, b1), &c1) in &self.terms {
            for (&(a2, b2), &c2) in &other.terms {
                for k in 0..=b1.min(a2) {
                    let binom = binomial(b1, k);
                    let falling: f64 = (0..k).map(|j| (a2 - j) as f64).product();
                    out.insert((a1 + a2 - k, b1 - k + b2), c1 * c2 * binom * falling);
                }
            }
        }
        out
    }

    pub fn commutator(&self, other: &DiffOp) -> DiffOp {
        self.compose(other).add(&other.compose(self).scale(C64::new(-1.0, 0.0)))
    }

    pub fn coeff_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Apply to a wavefunction sampled on a uniform grid, derivatives
    /// taken spectrally.
    pub fn apply(&self, psi: &[C64], x0: f64, dx: f64) -> Vec<C64> {
        use super::fourier::spectral_derivative_axis;
        let n = psi.len();
        let period = n as f64 * dx;
        let arr = ndarray::ArrayD::from_shape_vec(vec![n], psi.to_vec()).unwrap();
        let max_b = self.terms.keys().map(|&(_, b)| b).max().unwrap_or(0);
        let mut derivs = Vec::with_capacity(max_b as usize + 1);
        derivs.push(arr.clone());
        for b in 1..=max_b {
            derivs.push(spectral_derivative_axis(&arr, 0, period, b));
        }
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (&(a, b), &c) in &self.terms {
            for (j, o) in out.iter_mut().enumerate() {
                let x = x0 + j as f64 * dx;
                *o += c * x.powi(a as i32) * derivs[b as usize][[j]];
            }
        }
        out
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    let mut acc = 1.0;
    for j in 0..k {
        acc *= (n - j) as f64 / (j + 1) as f64;
    }
    acc
}

/// Weyl (symmetric-ordering) quantization of a 1-dof polynomial symbol
/// into a normal-ordered differential operator: each monomial `q^m p^n`
/// maps to the symmetrized `2^-m sum_k C(m,k) x^k P^n x^(m-k)` with
/// `P = -i hbar d/dx`.
pub fn weyl_quantize_poly(f: &PolySymbol, hbar: f64) -> Result<DiffOp> {
    if f.dof() != 1 {
        return Err(Error::invalid(
            "polynomial Weyl quantization is implemented for one degree of freedom",
        ));
    }
    let mut out = DiffOp::zero();
    let mihbar = C64::new(0.0, -hbar);
    for (e, &c) in f.terms() {
        let (m, n) = (e[0], e[1]);
        let p_factor = mihbar.powu(n);
        for k in 0..=m {
            let pre = c * p_factor * binomial(m, k) / 2.0f64.powi(m as i32);
            // Normal-order x^k d^n x^(m-k).
            for j in 0..=n.min(m - k) {
                let falling: f64 = (0..j).map(|t| (m - k - t) as f64).product();
                out.insert((m - j, n - j), pre * binomial(n, j) * falling);
            }
        }
    }
    Ok(out)
}
