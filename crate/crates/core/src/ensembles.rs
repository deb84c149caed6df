//! Finite-n random matrix models: β-Hermite, nested Jacobi, (spiked) GOE,
//! circular β through Verblunsky coefficients, and the critical 1-d random
//! Schrödinger matrix.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stochastics::{beta_variate, chi, RngStream};

/// Symmetric tridiagonal matrix stored by its diagonal and off-diagonal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || offdiag.len() + 1 != diag.len() {
            return Err(Error::invalid(format!(
                "tridiagonal shape mismatch: {} diagonal, {} off-diagonal entries",
                diag.len(),
                offdiag.len()
            )));
        }
        if diag.iter().chain(&offdiag).any(|x| !x.is_finite()) {
            return Err(Error::invalid("tridiagonal entries must be finite"));
        }
        Ok(SymTridiagonal { diag, offdiag })
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    /// True when every off-diagonal entry is strictly positive.
    pub fn is_jacobi(&self) -> bool {
        self.offdiag.iter().all(|&b| b > 0.0)
    }

    /// Top-left `k × k` principal submatrix.
    pub fn leading_minor(&self, k: usize) -> Result<SymTridiagonal> {
        if k == 0 || k > self.n() {
            return Err(Error::invalid(format!("minor order {k} outside 1..={}", self.n())));
        }
        Ok(SymTridiagonal {
            diag: self.diag[..k].to_vec(),
            offdiag: self.offdiag[..k - 1].to_vec(),
        })
    }

    pub fn scaled(&self, c: f64) -> SymTridiagonal {
        SymTridiagonal {
            diag: self.diag.iter().map(|x| x * c).collect(),
            offdiag: self.offdiag.iter().map(|x| x * c).collect(),
        }
    }

    /// Same matrix with the index order reversed.
    pub fn reversed(&self) -> SymTridiagonal {
        SymTridiagonal {
            diag: self.diag.iter().rev().copied().collect(),
            offdiag: self.offdiag.iter().rev().copied().collect(),
        }
    }

    /// Gershgorin interval containing the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.n();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.offdiag[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.offdiag[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        let n = self.n();
        (0..n)
            .map(|i| {
                self.diag[i].abs()
                    + if i > 0 { self.offdiag[i - 1].abs() } else { 0.0 }
                    + if i + 1 < n { self.offdiag[i].abs() } else { 0.0 }
            })
            .fold(0.0, f64::max)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.offdiag[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.offdiag[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    pub fn to_dense(&self) -> DenseSymmetric {
        let n = self.n();
        let mut a = DenseSymmetric::zeros(n);
        for i in 0..n {
            a.set(i, i, self.diag[i]);
            if i + 1 < n {
                a.set(i, i + 1, self.offdiag[i]);
            }
        }
        a
    }
}

/// Dense symmetric matrix, row-major. `set` writes both triangles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseSymmetric {
    n: usize,
    entries: Vec<f64>,
}

impl DenseSymmetric {
    pub fn zeros(n: usize) -> Self {
        DenseSymmetric {
            n,
            entries: vec![0.0; n * n],
        }
    }

    /// Builds from row-major data; rejects asymmetric input.
    pub fn from_row_major(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n || n == 0 {
            return Err(Error::invalid("dense matrix needs n*n entries, n >= 1"));
        }
        for i in 0..n {
            for j in 0..i {
                if entries[i * n + j] != entries[j * n + i] {
                    return Err(Error::invalid(format!("matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(DenseSymmetric { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.n + j] = v;
        self.entries[j * self.n + i] = v;
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                self.entries[i * self.n..(i + 1) * self.n]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Verblunsky coefficients of a finite unitary's spectral measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerblunskyCoeffs {
    pub alpha: Vec<Complex64>,
}

impl VerblunskyCoeffs {
    /// Checks |α_k| ≤ 1 and |α_{n-1}| = 1 (to 1e-12).
    pub fn new(alpha: Vec<Complex64>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::invalid("need at least one Verblunsky coefficient"));
        }
        if alpha.iter().any(|a| !(a.norm() <= 1.0 + 1e-12)) {
            return Err(Error::invalid("Verblunsky coefficients must lie in the closed unit disk"));
        }
        if (alpha.last().unwrap().norm() - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("last Verblunsky coefficient must be unimodular"));
        }
        Ok(VerblunskyCoeffs { alpha })
    }

    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    /// Multiplies every coefficient by e^{iθ}.
    pub fn rotated(&self, theta: f64) -> VerblunskyCoeffs {
        let r = Complex64::from_polar(1.0, theta);
        VerblunskyCoeffs {
            alpha: self.alpha.iter().map(|a| a * r).collect(),
        }
    }

    /// α_k ↦ e^{−i(k+1)θ} α_k, which turns every eigenangle by +θ.
    pub fn spectrally_rotated(&self, theta: f64) -> VerblunskyCoeffs {
        VerblunskyCoeffs {
            alpha: self
                .alpha
                .iter()
                .enumerate()
                .map(|(k, a)| a * Complex64::from_polar(1.0, -((k + 1) as f64) * theta))
                .collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OmegaDist {
    Gaussian,
    Rademacher,
    /// Uniform on [−√3, √3].
    Uniform,
}

impl std::str::FromStr for OmegaDist {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(OmegaDist::Gaussian),
            "rademacher" => Ok(OmegaDist::Rademacher),
            "uniform" => Ok(OmegaDist::Uniform),
            _ => Err(Error::invalid(format!("unknown omega distribution '{s}'"))),
        }
    }
}

/// H_n: unit off-diagonals, diagonal σω_k/√n.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchrodingerMatrix {
    pub matrix: SymTridiagonal,
    pub sigma: f64,
    pub n: usize,
    pub omega: OmegaDist,
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0) {
        return Err(Error::invalid(format!("beta must be positive, got {beta}")));
    }
    Ok(())
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("matrix order must be at least 1"));
    }
    Ok(())
}

/// Tridiagonal β-Hermite matrix scaled so the spectrum fills [−2, 2].
///
/// `beta = ∞` gives the deterministic limit (zero diagonal, offdiag √((n−i)/n)).
pub fn sample_beta_hermite(n: usize, beta: f64, stream: &mut RngStream) -> Result<SymTridiagonal> {
    check_n(n)?;
    check_beta(beta)?;
    let nf = n as f64;
    if beta.is_infinite() {
        return Ok(SymTridiagonal {
            diag: vec![0.0; n],
            offdiag: (1..n).map(|i| ((n - i) as f64 / nf).sqrt()).collect(),
        });
    }
    let sd = (2.0 / (nf * beta)).sqrt();
    let diag = (0..n).map(|_| sd * stream.standard_normal()).collect();
    let scale = 1.0 / (nf * beta).sqrt();
    let offdiag = (1..n)
        .map(|i| chi(stream, (n - i) as f64 * beta).map(|c| c * scale))
        .collect::<Result<_>>()?;
    Ok(SymTridiagonal { diag, offdiag })
}

/// Leading `n_max × n_max` block of the semi-infinite nested Jacobi matrix:
/// diagonal N(0, 2/β), off-diagonal k (1-based) distributed as χ_{kβ}/√β.
///
/// The order-n minor divided by √n has the law of `sample_beta_hermite(n, β)`
/// with the index order reversed (the χ degrees grow down the diagonal here and
/// shrink there); the two have the same spectral law. The top-left corner is
/// the root shared by all minors.
pub fn sample_nested_jacobi(n_max: usize, beta: f64, stream: &mut RngStream) -> Result<SymTridiagonal> {
    check_n(n_max)?;
    check_beta(beta)?;
    if beta.is_infinite() {
        return Ok(SymTridiagonal {
            diag: vec![0.0; n_max],
            offdiag: (1..n_max).map(|k| (k as f64).sqrt()).collect(),
        });
    }
    let sd = (2.0 / beta).sqrt();
    let diag = (0..n_max).map(|_| sd * stream.standard_normal()).collect();
    let scale = 1.0 / beta.sqrt();
    let offdiag = (1..n_max)
        .map(|k| chi(stream, k as f64 * beta).map(|c| c * scale))
        .collect::<Result<_>>()?;
    Ok(SymTridiagonal { diag, offdiag })
}

/// GOE matrix (M + Mᵗ)/√2 with a mean shift μ/√n on every entry.
///
/// The mean shift is the rank-one matrix μ√n·uuᵗ with u = 1/√n; by orthogonal
/// invariance it is added as μ√n on the (0, 0) entry, which has the same
/// spectral law. With `spike_mu = 0` nothing is added.
pub fn sample_goe(n: usize, spike_mu: f64, stream: &mut RngStream) -> Result<DenseSymmetric> {
    check_n(n)?;
    if !spike_mu.is_finite() {
        return Err(Error::invalid("spike must be finite"));
    }
    let m: Vec<f64> = (0..n * n).map(|_| stream.standard_normal()).collect();
    let mut a = DenseSymmetric::zeros(n);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n {
        for j in i..n {
            a.set(i, j, (m[i * n + j] + m[j * n + i]) * s);
        }
    }
    if spike_mu != 0.0 {
        let v = a.get(0, 0) + spike_mu * (n as f64).sqrt();
        a.set(0, 0, v);
    }
    Ok(a)
}

/// Householder reduction fixing the first coordinate, off-diagonals made
/// nonnegative.
pub fn householder_tridiagonalize(a: &DenseSymmetric) -> Result<SymTridiagonal> {
    let n = a.n();
    let mut m = a.entries().to_vec();
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut diag = vec![0.0; n];
    let mut offdiag = vec![0.0; n.saturating_sub(1)];
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    for k in 0..n.saturating_sub(1) {
        let len = n - k - 1;
        let col = |m: &Vec<f64>, i: usize| m[(k + 1 + i) * n + k];
        let norm = (0..len).map(|i| col(&m, i).powi(2)).sum::<f64>().sqrt();
        if norm <= 1e-14 * scale {
            return Err(Error::DegenerateInput(format!(
                "first coordinate is not cyclic: zero column below row {k}"
            )));
        }
        let x0 = col(&m, 0);
        let tail = norm * norm - x0 * x0;
        diag[k] = m[k * n + k];
        if tail <= (1e-300f64).max(1e-30 * norm * norm) {
            // already reduced in this column
            offdiag[k] = x0;
            continue;
        }
        let alpha = if x0 >= 0.0 { -norm } else { norm };
        for i in 0..len {
            v[i] = col(&m, i);
        }
        v[0] -= alpha;
        let vv: f64 = v[..len].iter().map(|x| x * x).sum();
        // trailing block B ← H B H, H = I − 2vvᵗ/vᵗv
        for i in 0..len {
            let row = (k + 1 + i) * n + k + 1;
            p[i] = 2.0 * m[row..row + len].iter().zip(&v[..len]).map(|(a, b)| a * b).sum::<f64>() / vv;
        }
        let kk = p[..len].iter().zip(&v[..len]).map(|(a, b)| a * b).sum::<f64>() / vv;
        for i in 0..len {
            p[i] -= kk * v[i];
        }
        for i in 0..len {
            let row = (k + 1 + i) * n + k + 1;
            for j in 0..len {
                m[row + j] -= v[i] * p[j] + p[i] * v[j];
            }
        }
        offdiag[k] = alpha;
        for i in 0..len {
            m[(k + 1 + i) * n + k] = if i == 0 { alpha } else { 0.0 };
            m[k * n + k + 1 + i] = if i == 0 { alpha } else { 0.0 };
        }
    }
    diag[n - 1] = m[(n - 1) * n + n - 1];
    for b in &mut offdiag {
        *b = b.abs();
    }
    if offdiag.iter().any(|&b| b == 0.0) {
        return Err(Error::DegenerateInput("zero off-diagonal after reduction".into()));
    }
    Ok(SymTridiagonal { diag, offdiag })
}

/// Circular β ensemble in Verblunsky form: |α_k|² ~ Beta(1, (n−k−1)β/2) with
/// uniform phases, α_{n−1} uniform on the circle.
pub fn sample_circular_beta(n: usize, beta: f64, stream: &mut RngStream) -> Result<VerblunskyCoeffs> {
    check_n(n)?;
    check_beta(beta)?;
    let mut alpha = Vec::with_capacity(n);
    for k in 0..n {
        let phase = std::f64::consts::TAU * stream.uniform();
        let modulus = if k + 1 == n {
            1.0
        } else if beta.is_infinite() {
            0.0
        } else {
            beta_variate(stream, 1.0, (n - k - 1) as f64 * beta / 2.0)?.sqrt()
        };
        alpha.push(Complex64::from_polar(modulus, phase));
    }
    Ok(VerblunskyCoeffs { alpha })
}

pub fn sample_omega(dist: OmegaDist, stream: &mut RngStream) -> f64 {
    match dist {
        OmegaDist::Gaussian => stream.standard_normal(),
        OmegaDist::Rademacher => {
            if stream.next_u64() >> 63 == 1 {
                1.0
            } else {
                -1.0
            }
        }
        OmegaDist::Uniform => 3f64.sqrt() * (2.0 * stream.uniform() - 1.0),
    }
}

pub fn sample_schrodinger(
    n: usize,
    sigma: f64,
    omega: OmegaDist,
    stream: &mut RngStream,
) -> Result<SchrodingerMatrix> {
    check_n(n)?;
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
    }
    let scale = sigma / (n as f64).sqrt();
    let diag = (0..n).map(|_| scale * sample_omega(omega, stream)).collect();
    Ok(SchrodingerMatrix {
        matrix: SymTridiagonal {
            diag,
            offdiag: vec![1.0; n - 1],
        },
        sigma,
        n,
        omega,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statkit::{ks_two_sample, mean_variance, Ecdf};

    #[test]
    fn beta_hermite_n1_and_invalid() {
        let mut s = RngStream::new(1, 0);
        let t = sample_beta_hermite(1, 2.0, &mut s).unwrap();
        assert_eq!(t.n(), 1);
        assert!(t.offdiag.is_empty());
        assert!(sample_beta_hermite(0, 2.0, &mut s).is_err());
        assert!(sample_beta_hermite(3, -1.0, &mut s).is_err());
    }

    #[test]
    fn beta_hermite_n2_offdiag_is_exponential() {
        let mut s = RngStream::new(2, 0);
        let m = (0..100_000)
            .map(|_| {
                let t = sample_beta_hermite(2, 2.0, &mut s).unwrap();
                t.offdiag[0].powi(2) * 4.0
            })
            .sum::<f64>()
            / 1e5;
        assert!((m - 2.0).abs() / 2.0 < 0.02, "mean {m}");
    }

    #[test]
    fn beta_hermite_large_beta_is_deterministic() {
        let mut s = RngStream::new(3, 0);
        let n = 6;
        let t = sample_beta_hermite(n, 1e10, &mut s).unwrap();
        for (i, b) in t.offdiag.iter().enumerate() {
            let want = ((n - i - 1) as f64 / n as f64).sqrt();
            assert!((b - want).abs() < 1e-4);
        }
        assert!(t.diag.iter().all(|d| d.abs() < 1e-4));
        let t = sample_beta_hermite(n, f64::INFINITY, &mut s).unwrap();
        assert!((t.offdiag[0] - (5.0f64 / 6.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn beta_hermite_entries_uncorrelated() {
        let mut s = RngStream::new(4, 0);
        let draws: Vec<SymTridiagonal> =
            (0..100_000).map(|_| sample_beta_hermite(4, 1.0, &mut s).unwrap()).collect();
        let corr = |f: &dyn Fn(&SymTridiagonal) -> f64, g: &dyn Fn(&SymTridiagonal) -> f64| {
            let x: Vec<f64> = draws.iter().map(f).collect();
            let y: Vec<f64> = draws.iter().map(g).collect();
            let (mx, vx) = mean_variance(&x);
            let (my, vy) = mean_variance(&y);
            let c = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / (x.len() as f64 - 1.0);
            c / (vx * vy).sqrt()
        };
        assert!(corr(&|t| t.diag[0], &|t| t.diag[1]).abs() <= 0.01);
        assert!(corr(&|t| t.diag[1], &|t| t.offdiag[1]).abs() <= 0.01);
        assert!(corr(&|t| t.offdiag[0], &|t| t.offdiag[2]).abs() <= 0.01);
    }

    #[test]
    fn nested_deterministic_entries() {
        let mut s = RngStream::new(5, 0);
        let t = sample_nested_jacobi(5, f64::INFINITY, &mut s).unwrap();
        assert!(t.diag.iter().all(|&d| d == 0.0));
        for (k, b) in t.offdiag.iter().enumerate() {
            assert_eq!(*b, ((k + 1) as f64).sqrt());
        }
    }

    #[test]
    fn nested_minor_matches_hermite_law() {
        let base = RngStream::new(6, 0);
        let n = 5;
        let mut nested: Vec<Vec<f64>> = vec![Vec::new(); 2 * n - 1];
        let mut direct: Vec<Vec<f64>> = vec![Vec::new(); 2 * n - 1];
        for i in 0..10_000 {
            let mut s = base.substream(i);
            let m = sample_nested_jacobi(8, 2.0, &mut s)
                .unwrap()
                .leading_minor(n)
                .unwrap()
                .scaled(1.0 / (n as f64).sqrt())
                .reversed();
            let mut s = base.substream(1_000_000 + i);
            let h = sample_beta_hermite(n, 2.0, &mut s).unwrap();
            for (k, v) in m.diag.iter().chain(&m.offdiag).enumerate() {
                nested[k].push(*v);
            }
            for (k, v) in h.diag.iter().chain(&h.offdiag).enumerate() {
                direct[k].push(*v);
            }
        }
        for (a, b) in nested.into_iter().zip(direct) {
            let d = ks_two_sample(&Ecdf::new(a).unwrap(), &Ecdf::new(b).unwrap());
            assert!(d <= 0.02, "entrywise ks {d}");
        }
    }

    #[test]
    fn goe_variances_and_spike() {
        let mut s = RngStream::new(7, 0);
        let (mut d, mut o) = (Vec::new(), Vec::new());
        for _ in 0..20_000 {
            let a = sample_goe(2, 0.0, &mut s).unwrap();
            d.push(a.get(0, 0));
            o.push(a.get(0, 1));
        }
        let (_, vd) = mean_variance(&d);
        let (_, vo) = mean_variance(&o);
        assert!((vd - 2.0).abs() < 0.08 && (vo - 1.0).abs() < 0.04);

        let a = sample_goe(5, 0.0, &mut RngStream::new(8, 1)).unwrap();
        let b = sample_goe(5, 0.0, &mut RngStream::new(8, 1)).unwrap();
        assert_eq!(a, b);
        let c = sample_goe(5, 2.0, &mut RngStream::new(8, 1)).unwrap();
        assert!((c.get(0, 0) - a.get(0, 0) - 2.0 * 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn goe_trace_mean() {
        let mut s = RngStream::new(9, 0);
        let tr: Vec<f64> = (0..10_000).map(|_| sample_goe(10, 0.0, &mut s).unwrap().trace()).collect();
        let (m, v) = mean_variance(&tr);
        assert!(m.abs() <= 5.0 * (v / 1e4).sqrt());
    }

    #[test]
    fn householder_keeps_jacobi_and_2x2() {
        let t = SymTridiagonal::new(vec![1.0, -2.0, 0.5, 3.0], vec![0.7, 1.5, 0.2]).unwrap();
        let back = householder_tridiagonalize(&t.to_dense()).unwrap();
        for (a, b) in back.diag.iter().zip(&t.diag).chain(back.offdiag.iter().zip(&t.offdiag)) {
            assert!((a - b).abs() < 1e-12);
        }
        let a = DenseSymmetric::from_row_major(2, vec![1.0, -3.0, -3.0, 2.0]).unwrap();
        let t = householder_tridiagonalize(&a).unwrap();
        assert_eq!(t.diag, vec![1.0, 2.0]);
        assert_eq!(t.offdiag, vec![3.0]);
        let d = DenseSymmetric::from_row_major(2, vec![1.0, 0.0, 0.0, 2.0]).unwrap();
        assert!(matches!(householder_tridiagonalize(&d), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn circular_beta_laws() {
        let mut s = RngStream::new(10, 0);
        let phases: Vec<f64> = (0..100_000)
            .map(|_| {
                let a = sample_circular_beta(1, 2.0, &mut s).unwrap().alpha[0];
                assert!((a.norm() - 1.0).abs() < 1e-12);
                a.arg().rem_euclid(std::f64::consts::TAU)
            })
            .collect();
        let e = Ecdf::new(phases).unwrap();
        let ks = crate::statkit::ks_against(&e, |x| x / std::f64::consts::TAU);
        assert!(ks <= 0.01);
        let m = (0..100_000)
            .map(|_| {
                let v = sample_circular_beta(3, 2.0, &mut s).unwrap();
                assert!(v.alpha.iter().all(|a| a.norm() <= 1.0 + 1e-15));
                v.alpha[0].norm_sqr()
            })
            .sum::<f64>()
            / 1e5;
        assert!((m - 1.0 / 3.0).abs() / (1.0 / 3.0) < 0.02);
    }

    #[test]
    fn schrodinger_diag_laws() {
        let mut s = RngStream::new(11, 0);
        let h = sample_schrodinger(10_000, 1.5, OmegaDist::Gaussian, &mut s).unwrap();
        let scaled: Vec<f64> = h.matrix.diag.iter().map(|v| v * 100.0).collect();
        let (_, v) = mean_variance(&scaled);
        assert!((v - 2.25).abs() / 2.25 < 0.03);
        let h = sample_schrodinger(100, 0.3, OmegaDist::Rademacher, &mut s).unwrap();
        assert!(h.matrix.diag.iter().all(|v| (v.abs() - 0.03).abs() < 1e-15));
        assert!(h.matrix.offdiag.iter().all(|&b| b == 1.0));
        let h = sample_schrodinger(100_000, 1.0, OmegaDist::Uniform, &mut s).unwrap();
        let scaled: Vec<f64> = h.matrix.diag.iter().map(|v| v * 100_000f64.sqrt()).collect();
        let (_, v) = mean_variance(&scaled);
        assert!((v - 1.0).abs() < 0.02);
        assert!(sample_schrodinger(10, 0.0, OmegaDist::Gaussian, &mut s).is_err());
    }
}
