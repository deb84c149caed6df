//! Spectral tools for symmetric tridiagonal matrices.

use serde::{Deserialize, Serialize};

use crate::ensembles::{householder_tridiagonalize, DenseSymmetric, SymTridiagonal};
use crate::error::{Error, Result};
use crate::stochastics::splitmix64;

/// Finite measure given by atoms `(location, weight)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedPointMeasure {
    pub atoms: Vec<(f64, f64)>,
}

impl WeightedPointMeasure {
    /// Checks strictly increasing locations, nonnegative weights summing to 1.
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::invalid("measure needs at least one atom"));
        }
        if atoms.windows(2).any(|w| !(w[0].0 < w[1].0)) {
            return Err(Error::invalid("atom locations must be strictly increasing"));
        }
        if atoms.iter().any(|a| !(a.1 >= 0.0) || !a.0.is_finite()) {
            return Err(Error::invalid("atoms need finite locations and nonnegative weights"));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(format!("weights sum to {total}, not 1")));
        }
        Ok(WeightedPointMeasure { atoms })
    }

    pub fn moment(&self, k: u32) -> f64 {
        self.atoms.iter().map(|(x, q)| q * x.powi(k as i32)).sum()
    }

    pub fn locations(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.0).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.1).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
}

/// Number of eigenvalues strictly below `x`.
pub fn sturm_count(t: &SymTridiagonal, x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for i in 0..t.n() {
        let b2 = if i > 0 { t.offdiag[i - 1] * t.offdiag[i - 1] } else { 0.0 };
        d = t.diag[i] - x - if b2 == 0.0 { 0.0 } else { b2 / d };
        if d == 0.0 {
            // x is an eigenvalue of this leading minor: evaluate just below it
            d = f64::MIN_POSITIVE;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

fn bisect_index(t: &SymTridiagonal, k: usize, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    // invariant: count(lo) <= k < count(hi)
    loop {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            return mid;
        }
        if sturm_count(t, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
}

fn bracket(t: &SymTridiagonal) -> (f64, f64) {
    let (lo, hi) = t.gershgorin();
    let pad = 1e-12 * (lo.abs().max(hi.abs()).max(1.0));
    (lo - pad, hi + pad)
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    Ok(())
}

/// The `k`-th smallest eigenvalue (0-based), bracketed to width `tol`.
pub fn eigenvalue_by_index(t: &SymTridiagonal, k: usize, tol: f64) -> Result<f64> {
    check_tol(tol)?;
    if k >= t.n() {
        return Err(Error::OutOfRange(format!("eigenvalue index {k} >= order {}", t.n())));
    }
    let (lo, hi) = bracket(t);
    Ok(bisect_index(t, k, lo, hi, tol))
}

pub fn largest_eigenvalue(t: &SymTridiagonal, tol: f64) -> Result<f64> {
    eigenvalue_by_index(t, t.n() - 1, tol)
}

/// Smallest `k` eigenvalues in ascending order.
pub fn bottom_eigenvalues(t: &SymTridiagonal, k: usize, tol: f64) -> Result<Vec<f64>> {
    check_tol(tol)?;
    if k > t.n() {
        return Err(Error::OutOfRange(format!("requested {k} eigenvalues of an order-{} matrix", t.n())));
    }
    let (lo, hi) = bracket(t);
    let mut out = vec![0.0; k];
    split(t, lo, hi, 0, sturm_count(t, hi).min(k), tol, &mut out);
    Ok(out)
}

/// All eigenvalues ascending, each bracketed to width `tol`.
pub fn eigenvalues(t: &SymTridiagonal, tol: f64) -> Result<Vec<f64>> {
    bottom_eigenvalues(t, t.n(), tol)
}

// Finds eigenvalues with indices in [c_lo, c_hi) inside (lo, hi], sharing
// bisection steps between neighbours.
fn split(t: &SymTridiagonal, lo: f64, hi: f64, c_lo: usize, c_hi: usize, tol: f64, out: &mut [f64]) {
    if c_lo >= c_hi {
        return;
    }
    if c_hi - c_lo == 1 {
        out[c_lo] = bisect_index(t, c_lo, lo, hi, tol);
        return;
    }
    let mid = 0.5 * (lo + hi);
    if hi - lo <= tol || mid <= lo || mid >= hi {
        for v in &mut out[c_lo..c_hi] {
            *v = mid;
        }
        return;
    }
    let c_mid = sturm_count(t, mid).clamp(c_lo, c_hi);
    split(t, lo, mid, c_lo, c_mid, tol, out);
    split(t, mid, hi, c_mid, c_hi, tol, out);
}

// Solves (T - σ) x = rhs in place with partial pivoting; tiny pivots are
// replaced by `floor` so the solve never divides by zero.
fn shifted_solve(t: &SymTridiagonal, sigma: f64, rhs: &mut [f64], floor: f64) {
    let n = t.n();
    if n == 1 {
        let p = t.diag[0] - sigma;
        rhs[0] /= if p.abs() < floor { floor } else { p };
        return;
    }
    // rows stored as (d, u1, u2) after elimination; l multipliers and swaps
    let mut d = vec![0.0; n];
    let mut u1 = vec![0.0; n];
    let mut u2 = vec![0.0; n];
    let mut l = vec![0.0; n];
    let mut swap = vec![false; n];
    let mut cur_d = t.diag[0] - sigma;
    let mut cur_u = t.offdiag[0];
    for i in 0..n - 1 {
        let below = t.offdiag[i];
        let next_d = t.diag[i + 1] - sigma;
        let next_u = if i + 2 < n { t.offdiag[i + 1] } else { 0.0 };
        if cur_d.abs() >= below.abs() {
            let piv = if cur_d.abs() < floor { floor.copysign(cur_d) } else { cur_d };
            let m = below / piv;
            d[i] = piv;
            u1[i] = cur_u;
            u2[i] = 0.0;
            l[i] = m;
            cur_d = next_d - m * cur_u;
            cur_u = next_u;
        } else {
            swap[i] = true;
            let m = cur_d / below;
            d[i] = below;
            u1[i] = next_d;
            u2[i] = next_u;
            l[i] = m;
            cur_d = cur_u - m * next_d;
            cur_u = -m * next_u;
        }
    }
    d[n - 1] = if cur_d.abs() < floor { floor.copysign(if cur_d == 0.0 { 1.0 } else { cur_d }) } else { cur_d };
    for i in 0..n - 1 {
        if swap[i] {
            rhs.swap(i, i + 1);
        }
        rhs[i + 1] -= l[i] * rhs[i];
    }
    rhs[n - 1] /= d[n - 1];
    if n >= 2 {
        rhs[n - 2] = (rhs[n - 2] - u1[n - 2] * rhs[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        rhs[i] = (rhs[i] - u1[i] * rhs[i + 1] - u2[i] * rhs[i + 2]) / d[i];
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    norm
}

fn fix_sign(v: &mut [f64]) {
    let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(first) = v.iter().find(|x| x.abs() > f64::EPSILON * vmax) {
        if *first < 0.0 {
            for x in v.iter_mut() {
                *x = -*x;
            }
        }
    }
}

/// Unit eigenvector for an eigenvalue approximation `lambda`, by inverse
/// iteration. The returned value is the Rayleigh quotient.
pub fn eigenvector(t: &SymTridiagonal, lambda: f64, tol: f64) -> Result<EigenPair> {
    check_tol(tol)?;
    let n = t.n();
    let norm = t.norm_inf().max(f64::MIN_POSITIVE);
    let tol = tol.max(64.0 * f64::EPSILON);
    let sigma = lambda * (1.0 + 1e-12) + if lambda == 0.0 { 1e-14 * norm } else { 0.0 };
    let floor = f64::EPSILON * norm;
    let mut v: Vec<f64> = (0..n)
        .map(|i| {
            let u = splitmix64(0xE16E_u64 ^ i as u64);
            0.5 + (u >> 11) as f64 / (1u64 << 53) as f64
        })
        .collect();
    normalize(&mut v);
    for _ in 0..50 {
        shifted_solve(t, sigma, &mut v, floor);
        if !v.iter().all(|x| x.is_finite()) || normalize(&mut v) == 0.0 {
            return Err(Error::NumericalFailure("inverse iteration produced a non-finite vector".into()));
        }
        let tv = t.matvec(&v);
        let rq: f64 = tv.iter().zip(&v).map(|(a, b)| a * b).sum();
        let res = tv.iter().zip(&v).map(|(a, b)| (a - rq * b).abs()).fold(0.0, f64::max);
        if res <= tol * norm {
            fix_sign(&mut v);
            return Ok(EigenPair { value: rq, vector: v });
        }
    }
    Err(Error::NumericalFailure(format!(
        "inverse iteration at {lambda} did not converge in 50 iterations"
    )))
}

/// Spectral measure at the first coordinate: atoms at eigenvalues, weights the
/// squared first components of the unit eigenvectors.
pub fn spectral_measure(t: &SymTridiagonal, tol: f64) -> Result<WeightedPointMeasure> {
    let eigs = eigenvalues(t, tol)?;
    for w in eigs.windows(2) {
        if w[1] - w[0] <= 2.0 * tol {
            return Err(Error::DegenerateSpectrum(w[0], w[1]));
        }
    }
    let mut atoms = Vec::with_capacity(eigs.len());
    for &lam in &eigs {
        let pair = eigenvector(t, lam, 1e-12)?;
        atoms.push((lam, pair.vector[0] * pair.vector[0]));
    }
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    for a in &mut atoms {
        a.1 /= total;
    }
    WeightedPointMeasure::new(atoms)
}

/// (T^k)_{11} for k = 0..=kmax.
pub fn root_moments(t: &SymTridiagonal, kmax: usize) -> Vec<f64> {
    let mut v = vec![0.0; t.n()];
    v[0] = 1.0;
    let mut out = Vec::with_capacity(kmax + 1);
    out.push(1.0);
    for _ in 0..kmax {
        v = t.matvec(&v);
        out.push(v[0]);
    }
    out
}

/// Jacobi matrix whose spectral measure at the first coordinate is `mu`:
/// rebuilds a dense matrix U diag(λ) Uᵗ with first row (√q_i) and reduces it.
pub fn jacobi_from_measure(mu: &WeightedPointMeasure) -> Result<SymTridiagonal> {
    let n = mu.atoms.len();
    let u: Vec<f64> = mu.atoms.iter().map(|a| a.1.sqrt()).collect();
    // Householder reflector H with H e_1 = u
    let mut w = u.clone();
    w[0] -= 1.0;
    let ww: f64 = w.iter().map(|x| x * x).sum();
    let h = |i: usize, j: usize| -> f64 {
        let id = if i == j { 1.0 } else { 0.0 };
        if ww == 0.0 {
            id
        } else {
            id - 2.0 * w[i] * w[j] / ww
        }
    };
    let mut a = DenseSymmetric::zeros(n);
    for i in 0..n {
        for j in i..n {
            let s: f64 = (0..n).map(|k| h(i, k) * mu.atoms[k].0 * h(k, j)).sum();
            a.set(i, j, s);
        }
    }
    householder_tridiagonalize(&a)
}

/// p_0(x), …, p_n(x) for the orthonormal polynomials of T's spectral measure,
/// with the convention b_{n-1} = 1 for the last step so p_n is a positive
/// multiple of det(x − T).
pub fn orthopoly_eval(t: &SymTridiagonal, x: f64) -> Result<Vec<f64>> {
    let n = t.n();
    if let Some(k) = t.offdiag.iter().position(|&b| b == 0.0) {
        return Err(Error::DegenerateInput(format!("zero off-diagonal at {k}")));
    }
    let mut p = Vec::with_capacity(n + 1);
    p.push(1.0);
    for k in 0..n {
        let prev = if k > 0 { t.offdiag[k - 1] * p[k - 1] } else { 0.0 };
        let bk = if k + 1 < n { t.offdiag[k] } else { 1.0 };
        p.push(((x - t.diag[k]) * p[k] - prev) / bk);
    }
    Ok(p)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemicircleDiagnostics {
    pub ks_distance: f64,
    /// Empirical moments m_1..m_8.
    pub moments: Vec<f64>,
}

/// CDF of the semicircle law on [−2, 2].
pub fn semicircle_cdf(x: f64) -> f64 {
    if x <= -2.0 {
        return 0.0;
    }
    if x >= 2.0 {
        return 1.0;
    }
    0.5 + x * (4.0 - x * x).sqrt() / (4.0 * std::f64::consts::PI) + (x / 2.0).asin() / std::f64::consts::PI
}

pub fn semicircle_diagnostics(eigs: &[f64]) -> Result<SemicircleDiagnostics> {
    let e = crate::statkit::Ecdf::new(eigs.to_vec())?;
    let ks = crate::statkit::ks_against(&e, semicircle_cdf);
    let n = eigs.len() as f64;
    let moments = (1..=8).map(|k| eigs.iter().map(|x| x.powi(k)).sum::<f64>() / n).collect();
    Ok(SemicircleDiagnostics {
        ks_distance: ks,
        moments,
    })
}
