//! The unitary side: Szegő recursion, eigenangles, b-coordinates, the finite-n
//! Dirac operator and the hyperbolic random-walk coupling.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::carousel::{hyperbolic_bm, hyperbolic_distance, DiskPath, HbmMode};
use crate::ensembles::VerblunskyCoeffs;
use crate::error::{Error, Result};
use crate::stochastics::{beta_variate, RngStream};

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

type M2 = [[Complex64; 2]; 2];
type V2 = [Complex64; 2];

fn mul(a: &M2, b: &M2) -> M2 {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

fn apply(a: &M2, v: &V2) -> V2 {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

/// Inverse up to the determinant, which projective use ignores.
fn adjugate(a: &M2) -> M2 {
    [[a[1][1], -a[0][1]], [-a[1][0], a[0][0]]]
}

fn rescale(a: &mut M2) {
    let s = a.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    if s > 0.0 && s.is_finite() {
        for z in a.iter_mut().flatten() {
            *z /= s;
        }
    }
}

fn vnorm(v: &V2) -> f64 {
    (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
}

/// 𝓟(x, y) = x/y, refusing a vanishing denominator.
fn projective(v: &V2) -> Result<Complex64> {
    let scale = vnorm(v);
    if !(v[1].norm() > 1e-300 * scale.max(1e-300)) || !scale.is_finite() {
        return Err(Error::DegenerateInput("projective point at infinity (|b| → 1)".into()));
    }
    Ok(v[0] / v[1])
}

/// [[1, ᾱ], [α, 1]] ∝ A^{-1}.
fn a_inverse(alpha: Complex64) -> M2 {
    [[ONE, alpha.conj()], [alpha, ONE]]
}

/// Φ_k and Φ*_k as ascending coefficient lists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyPair {
    pub phi: Vec<Complex64>,
    pub phi_star: Vec<Complex64>,
}

impl PolyPair {
    pub fn degree(&self) -> usize {
        self.phi.len() - 1
    }

    pub fn eval(&self, z: Complex64) -> (Complex64, Complex64) {
        let horner = |c: &[Complex64]| c.iter().rev().fold(ZERO, |acc, &a| acc * z + a);
        (horner(&self.phi), horner(&self.phi_star))
    }
}

/// Coefficients of (Φ_k, Φ*_k) for k = 0..n.
pub fn szego_polynomials(alpha: &VerblunskyCoeffs) -> Vec<PolyPair> {
    let mut out = vec![PolyPair {
        phi: vec![ONE],
        phi_star: vec![ONE],
    }];
    for &a in &alpha.alpha {
        let prev = out.last().unwrap();
        let k = prev.phi.len();
        let mut phi = vec![ZERO; k + 1];
        let mut star = vec![ZERO; k + 1];
        for i in 0..k {
            // Φ_{k+1} = zΦ_k − ᾱΦ*_k,  Φ*_{k+1} = −αzΦ_k + Φ*_k
            phi[i + 1] += prev.phi[i];
            phi[i] -= a.conj() * prev.phi_star[i];
            star[i + 1] -= a * prev.phi[i];
            star[i] += prev.phi_star[i];
        }
        out.push(PolyPair { phi, phi_star: star });
    }
    out
}

/// Values (Φ_k(z), Φ*_k(z)) for k = 0..n.
pub fn szego_recursion(alpha: &VerblunskyCoeffs, z: Complex64) -> Vec<(Complex64, Complex64)> {
    let mut out = Vec::with_capacity(alpha.n() + 1);
    let (mut p, mut q) = (ONE, ONE);
    out.push((p, q));
    for &a in &alpha.alpha {
        let zp = z * p;
        (p, q) = (zp - a.conj() * q, q - a * zp);
        out.push((p, q));
    }
    out
}

/// u = Φ_k/Φ*_k at z = e^{iθ} and du/dθ, carried as a point on the circle
/// through the Möbius steps u ↦ (zu − ᾱ)/(1 − αzu), which stays accurate
/// where |α| is close to 1.
fn circle_ratio(alpha: &[Complex64], theta: f64) -> (Complex64, Complex64) {
    let z = Complex64::from_polar(1.0, theta);
    let i = Complex64::i();
    let (mut u, mut du) = (ONE, ZERO);
    for &a in alpha {
        let (w, dw) = (z * u, z * (i * u + du));
        let den = ONE - a * w;
        u = (w - a.conj()) / den;
        du = dw * (1.0 - a.norm_sqr()) / (den * den);
        let r = u.norm();
        u /= r;
        du /= r;
    }
    (u, du)
}

/// How far Z(Φ_{n−1}, Φ*_{n−1}) at z = e^{iθ} is from parallel to (ᾱ_{n−1}, 1),
/// as the sine of the angle between the two vectors.
pub fn eigen_criterion_defect(alpha: &VerblunskyCoeffs, theta: f64) -> f64 {
    let n = alpha.n();
    let z = Complex64::from_polar(1.0, theta);
    let (u, _) = circle_ratio(&alpha.alpha[..n - 1], theta);
    let last = alpha.alpha[n - 1];
    let v = [z * u, ONE];
    let w = [last.conj(), ONE];
    (v[0] * w[1] - v[1] * w[0]).norm() / (vnorm(&v) * vnorm(&w))
}

/// arg of e^{iθ}Φ_{n−1}/Φ*_{n−1} · α_{n−1}; a Blaschke product of degree n, so
/// its argument winds n times and strictly increases.
fn winding_point(alpha: &[Complex64], theta: f64) -> Complex64 {
    let n = alpha.len();
    let z = Complex64::from_polar(1.0, theta);
    let (u, _) = circle_ratio(&alpha[..n - 1], theta);
    let r = z * u * alpha[n - 1];
    r / r.norm()
}

/// Φ_n(z) and Φ_n'(z) from the recursion differentiated in z.
fn paraorthogonal(alpha: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let (mut p, mut q, mut dp, mut dq) = (ONE, ONE, ZERO, ZERO);
    for &a in alpha {
        let (zp, dzp) = (z * p, p + z * dp);
        (p, q, dp, dq) = (zp - a.conj() * q, q - a * zp, dzp - a.conj() * dq, dq - a * dzp);
    }
    (p, dp)
}

/// Aberth estimates of the zeros of Φ_n, which lie on the circle.
fn root_estimates(alpha: &[Complex64]) -> Vec<f64> {
    let n = alpha.len();
    let mut z: Vec<Complex64> =
        (0..n).map(|k| Complex64::from_polar(1.0, TAU * (k as f64 + 0.3) / n as f64)).collect();
    for _ in 0..200 {
        let mut worst = 0.0f64;
        for k in 0..n {
            let (p, dp) = paraorthogonal(alpha, z[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repel: Complex64 = (0..n).filter(|&j| j != k).map(|j| ONE / (z[k] - z[j])).sum();
            let step = ratio / (ONE - ratio * repel);
            if step.is_finite() {
                z[k] -= step;
                worst = worst.max(step.norm());
            }
        }
        if worst < 1e-15 {
            break;
        }
    }
    z.iter().filter(|w| w.is_finite()).map(|w| w.arg().rem_euclid(TAU)).collect()
}

/// Angle in [0, 2π) of a relative turn; the phase only increases, so tiny
/// negative angles are rounding.
fn forward_turn(r: Complex64) -> f64 {
    let t = r.arg();
    if t < -1e-9 {
        t + TAU
    } else {
        t.max(0.0)
    }
}

/// Uniform samples plus, around each root estimate, offsets 2^{-j} for
/// j = 1..50 so that phase jumps from near-unimodular coefficients are resolved.
fn phase_grid(alpha: &[Complex64], m: usize) -> Vec<f64> {
    let mut grid: Vec<f64> = (0..=m).map(|j| TAU * j as f64 / m as f64).collect();
    for t in root_estimates(alpha) {
        grid.push(t);
        for j in 1..=50 {
            let d = 0.5f64.powi(j);
            grid.extend([t - d, t + d].into_iter().filter(|x| *x > 0.0 && *x < TAU));
        }
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// The n eigenangles in [0, 2π), sorted, each bracketed to width `tol`.
/// The count is certified by the winding number of the phase. The criterion
/// defect is not used as a gate: with |α_k| near 1 it is ill-conditioned
/// even at correctly rounded angles.
pub fn eigenangles(alpha: &VerblunskyCoeffs, tol: f64) -> Result<Vec<f64>> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let n = alpha.n();
    let a = &alpha.alpha;
    let mut m = 8 * n;
    let (grid, lifted) = loop {
        let grid = phase_grid(a, m);
        let pts: Vec<Complex64> = grid.iter().map(|&t| winding_point(a, t)).collect();
        let mut lifted = vec![pts[0].arg()];
        for j in 1..grid.len() {
            lifted.push(lifted[j - 1] + forward_turn(pts[j] * pts[j - 1].conj()));
        }
        let total = lifted[grid.len() - 1] - lifted[0];
        if (total - TAU * n as f64).abs() < 1e-6 {
            break (grid, lifted);
        }
        if m > 8 * n * 64 {
            return Err(Error::NumericalFailure(format!(
                "phase winds {:.6} turns, expected {n}",
                total / TAU
            )));
        }
        m *= 2;
    };
    let m = grid.len() - 1;
    let mut out = Vec::with_capacity(n);
    if lifted[0] == 0.0 {
        out.push(0.0);
    }
    for j in 0..m {
        let lo_level = (lifted[j] / TAU).floor();
        let hi_level = (lifted[j + 1] / TAU).floor();
        let crosses = hi_level > lo_level && !(j + 1 == m && lifted[m] == TAU * hi_level);
        if !crosses {
            continue;
        }
        let level = TAU * hi_level;
        let base = winding_point(a, grid[j]);
        let phase = |t: f64| lifted[j] + forward_turn(winding_point(a, t) * base.conj());
        let (mut lo, mut hi) = (grid[j], grid[j + 1]);
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if phase(mid) < level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        out.push(0.5 * (lo + hi));
    }
    if out.len() != n {
        return Err(Error::NumericalFailure(format!("found {} eigenangles, expected {n}", out.len())));
    }
    Ok(out)
}

/// b-coordinates: b_k for k = 0..n−1 and the boundary datum b_*.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BPath {
    pub b: Vec<Complex64>,
    pub b_star: Complex64,
}

impl BPath {
    pub fn n(&self) -> usize {
        self.b.len()
    }
}

/// b_k = 𝓟 A_0^{-1}⋯A_{k−1}^{-1}(0, 1)ᵗ and b_* from (ᾱ_{n−1}, 1)ᵗ.
pub fn b_path(alpha: &VerblunskyCoeffs) -> Result<BPath> {
    let n = alpha.n();
    let mut c: M2 = [[ONE, ZERO], [ZERO, ONE]];
    let mut b = Vec::with_capacity(n);
    for k in 0..n {
        let bk = projective(&apply(&c, &[ZERO, ONE]))?;
        if !(bk.norm() < 1.0) {
            return Err(Error::DegenerateInput(format!("b_{k} left the open disk")));
        }
        b.push(bk);
        if k + 1 < n {
            c = mul(&c, &a_inverse(alpha.alpha[k]));
            rescale(&mut c);
        }
    }
    let b_star = projective(&apply(&c, &[alpha.alpha[n - 1].conj(), ONE]))?;
    Ok(BPath { b, b_star })
}

/// Invert [`b_path`]: ᾱ_k is b_{k+1} pulled back by the first k Möbius steps.
pub fn alpha_from_bpath(path: &BPath) -> Result<VerblunskyCoeffs> {
    let n = path.n();
    if n == 0 || path.b[0].norm() > 1e-15 {
        return Err(Error::invalid("a b-path starts at b_0 = 0"));
    }
    let mut c: M2 = [[ONE, ZERO], [ZERO, ONE]];
    let mut alpha = Vec::with_capacity(n);
    for k in 0..n {
        let target = if k + 1 < n { path.b[k + 1] } else { path.b_star };
        let abar = projective(&apply(&adjugate(&c), &[target, ONE]))?;
        let mut a = abar.conj();
        if k + 1 == n {
            a /= a.norm();
        }
        alpha.push(a);
        c = mul(&c, &a_inverse(a));
        rescale(&mut c);
    }
    VerblunskyCoeffs::new(alpha)
}

/// X_b = (1 − |b|²)^{-1/2} [[1, b], [b̄, 1]].
fn x_matrix(b: Complex64) -> (M2, M2) {
    let s = 1.0 / (1.0 - b.norm_sqr()).sqrt();
    let x = [[ONE * s, b * s], [b.conj() * s, ONE * s]];
    let xinv = [[ONE * s, -b * s], [-b.conj() * s, ONE * s]];
    (x, xinv)
}

/// Γ(1) for the Dirac operator at spectral parameter λ/2, propagated cell by
/// cell in closed form: on [k/n, (k+1)/n) the flow is X_k e^{−(λ/2n)J} X_k^{-1}.
fn dirac_gamma(path: &BPath, lambda: f64) -> Vec<V2> {
    let n = path.n();
    let e = Complex64::from_polar(1.0, lambda / (2.0 * n as f64));
    let rot: M2 = [[e, ZERO], [ZERO, e.conj()]];
    let mut g = [ONE, ONE];
    let mut out = Vec::with_capacity(n + 1);
    out.push(g);
    for &b in &path.b {
        let (x, xinv) = x_matrix(b);
        let m = mul(&x, &mul(&rot, &xinv));
        g = apply(&m, &g);
        out.push(g);
    }
    out
}

/// Γ_k = Z^{A_{k−1}⋯A_0} Γ_{k−1}, with Z^{P} = P^{-1} Z P, straight from α.
fn discrete_gamma(alpha: &VerblunskyCoeffs, lambda: f64) -> Vec<V2> {
    let n = alpha.n();
    let z = Complex64::from_polar(1.0, lambda / n as f64);
    let zm: M2 = [[z, ZERO], [ZERO, ONE]];
    let mut p: M2 = [[ONE, ZERO], [ZERO, ONE]];
    let mut g = [ONE, ONE];
    let mut out = Vec::with_capacity(n + 1);
    out.push(g);
    for k in 0..n {
        let step = mul(&adjugate(&p), &mul(&zm, &p));
        let det = p[0][0] * p[1][1] - p[0][1] * p[1][0];
        g = apply(&step, &g).map(|v| v / det);
        out.push(g);
        if k + 1 < n {
            let a = alpha.alpha[k];
            p = mul(&[[ONE, -a.conj()], [-a, ONE]], &p);
            rescale(&mut p);
        }
    }
    out
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiracReport {
    pub n: usize,
    pub tol: f64,
    pub lambdas: Vec<f64>,
    /// sin∠(Γ(1), (b_*, 1)) per λ.
    pub boundary_defects: Vec<f64>,
    /// max_k ‖Γ(k/n) − e^{−iλk/2n} Γ_k‖ / ‖Γ_k‖ per λ.
    pub identity_defects: Vec<f64>,
    pub worst_index: usize,
    pub worst_defect: f64,
    pub passed: bool,
}

/// Check that each λ/2 in `lambdas` is an eigenvalue of the Dirac operator
/// built from `path`, and that the continuous flow matches the discrete Γ_k.
pub fn dirac_spectrum_check(path: &BPath, n: usize, lambdas: &[f64], tol: f64) -> Result<DiracReport> {
    if path.n() != n {
        return Err(Error::invalid(format!("b-path has {} cells, expected {n}", path.n())));
    }
    if lambdas.is_empty() || !(tol > 0.0) {
        return Err(Error::invalid("need angles and a positive tolerance"));
    }
    let alpha = alpha_from_bpath(path)?;
    let target = [path.b_star, ONE];
    let mut boundary = Vec::with_capacity(lambdas.len());
    let mut identity = Vec::with_capacity(lambdas.len());
    for &l in lambdas {
        let cont = dirac_gamma(path, l);
        let disc = discrete_gamma(&alpha, l);
        let mut worst: f64 = 0.0;
        for (k, (c, d)) in cont.iter().zip(&disc).enumerate() {
            let ph = Complex64::from_polar(1.0, -l * k as f64 / (2.0 * n as f64));
            let diff = [c[0] - ph * d[0], c[1] - ph * d[1]];
            worst = worst.max(vnorm(&diff) / vnorm(d));
        }
        identity.push(worst);
        let g = cont[n];
        boundary.push((g[0] * target[1] - g[1] * target[0]).norm() / (vnorm(&g) * vnorm(&target)));
    }
    let (worst_index, worst_defect) = boundary
        .iter()
        .zip(&identity)
        .map(|(a, b)| a.max(*b))
        .enumerate()
        .fold((0, 0.0), |best, (i, d)| if d > best.1 { (i, d) } else { best });
    Ok(DiracReport {
        n,
        tol,
        lambdas: lambdas.to_vec(),
        boundary_defects: boundary,
        identity_defects: identity,
        worst_index,
        worst_defect,
        passed: worst_defect <= tol,
    })
}

/// Eigenangles counted by oscillation: the number of times 𝓟Γ(1) at spectral
/// parameter nθ passes b_* while θ runs over [θ_a, θ_b).
pub fn oscillation_count(path: &BPath, theta_a: f64, theta_b: f64, grid: usize) -> usize {
    let n = path.n() as f64;
    let point = |t: f64| {
        let g = dirac_gamma(path, n * t)[path.n()];
        let w = g[0] / g[1] * path.b_star.conj();
        w / w.norm()
    };
    // passes of b_* are passes of the rotated point through 1
    let mut prev = point(theta_a);
    let start = prev.arg().rem_euclid(TAU);
    let mut lifted = start;
    for j in 1..=grid {
        let t = theta_a + (theta_b - theta_a) * j as f64 / grid as f64;
        let p = point(t);
        lifted += (p * prev.conj()).arg().rem_euclid(TAU);
        prev = p;
    }
    ((lifted / TAU).ceil() - (start / TAU).ceil()) as usize
}

/// Hyperbolic distance between two disk points.
pub fn hyperbolic_dist(z: Complex64, w: Complex64) -> f64 {
    hyperbolic_distance((z - w) / (ONE - w.conj() * z))
}

/// Step radii d_{k+1} = dist(0, |α_k|), |α_k|² ~ Beta(1, (n−k−1)β/2), k < n−1.
pub fn kn_radii(n: usize, beta: f64, stream: &mut RngStream) -> Result<Vec<f64>> {
    if n == 0 || !(beta > 0.0) {
        return Err(Error::invalid("need n >= 1 and beta > 0"));
    }
    (0..n.saturating_sub(1))
        .map(|k| {
            let r = beta_variate(stream, 1.0, (n - k - 1) as f64 * beta / 2.0)?.sqrt();
            Ok(hyperbolic_distance(Complex64::new(r, 0.0)))
        })
        .collect()
}

/// A random walk read off a disk path at successive hyperbolic exit times.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KnWalk {
    pub b: Vec<Complex64>,
    pub hit_times: Vec<f64>,
    pub hit_index: Vec<usize>,
    /// max dist(𝓑_t, b_k) for t between the k-th and (k+1)-th hit.
    pub excursions: Vec<f64>,
}

/// b_0 = 𝓑(0); b_{k+1} = 𝓑(t_{k+1}), t_{k+1} the first path time with
/// dist(𝓑, b_k) ≥ d_{k+1}.
pub fn kn_coupling(bm: &DiskPath, radii: &[f64]) -> Result<KnWalk> {
    if bm.is_empty() {
        return Err(Error::invalid("empty disk path"));
    }
    if radii.iter().any(|d| !(*d >= 0.0)) {
        return Err(Error::invalid("radii must be nonnegative"));
    }
    let mut idx = 0;
    let mut b = vec![bm.points[0]];
    let mut hit_times = vec![bm.times[0]];
    let mut hit_index = vec![0];
    let mut excursions = Vec::with_capacity(radii.len());
    for (k, &d) in radii.iter().enumerate() {
        let centre = b[k];
        let mut sup: f64 = 0.0;
        loop {
            let dist = hyperbolic_dist(bm.points[idx], centre);
            sup = sup.max(dist);
            if dist >= d {
                break;
            }
            idx += 1;
            if idx == bm.len() {
                return Err(Error::OutOfRange(format!(
                    "disk path ended before hit {} of {}",
                    k + 1,
                    radii.len()
                )));
            }
        }
        b.push(bm.points[idx]);
        hit_times.push(bm.times[idx]);
        hit_index.push(idx);
        excursions.push(sup);
    }
    Ok(KnWalk {
        b,
        hit_times,
        hit_index,
        excursions,
    })
}

/// Largest excursion of one coupled walk over its first ⌊(n−1)·fraction⌋
/// steps, on a fresh sine-mode disk path (β-scaled, run to time 1 − 1e−4).
pub fn kn_excursion_sup(n: usize, beta: f64, fraction: f64, dt: f64, stream: &mut RngStream) -> Result<f64> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::invalid(format!("fraction must lie in (0, 1], got {fraction}")));
    }
    let radii = kn_radii(n, beta, stream)?;
    let m = ((n.saturating_sub(1)) as f64 * fraction).floor() as usize;
    let bm = hyperbolic_bm(HbmMode::SineBeta(beta), 1.0 - 1e-4, dt, stream)?;
    let walk = kn_coupling(&bm, &radii[..m])?;
    Ok(walk.excursions.iter().copied().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::sample_circular_beta;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn draw(n: usize, beta: f64, seed: u64) -> VerblunskyCoeffs {
        sample_circular_beta(n, beta, &mut RngStream::new(seed, 0)).unwrap()
    }

    #[test]
    fn first_polynomial() {
        let a = VerblunskyCoeffs::new(vec![c(0.6, 0.8)]).unwrap();
        let z = c(0.3, -1.7);
        let v = szego_recursion(&a, z);
        assert!((v[1].0 - (z - a.alpha[0].conj())).norm() < 1e-15);
        let ang = eigenangles(&a, 1e-12).unwrap();
        assert!((ang[0] - a.alpha[0].conj().arg().rem_euclid(TAU)).abs() < 1e-12);
    }

    #[test]
    fn star_has_equal_modulus_on_circle() {
        let a = draw(9, 2.0, 1);
        for j in 0..50 {
            let z = Complex64::from_polar(1.0, 0.37 * j as f64);
            for (p, q) in szego_recursion(&a, z) {
                assert!((p.norm() - q.norm()).abs() < 1e-12);
            }
        }
        let polys = szego_polynomials(&a);
        let z = c(0.2, 0.9);
        for (k, (p, q)) in szego_recursion(&a, z).into_iter().enumerate() {
            let (pp, qq) = polys[k].eval(z);
            assert!((p - pp).norm() < 1e-12 && (q - qq).norm() < 1e-12);
            assert_eq!(polys[k].degree(), k);
            assert_eq!(polys[k].phi[k], ONE);
        }
    }

    #[test]
    fn characteristic_polynomial_from_roots() {
        let a = draw(5, 2.0, 2);
        let ang = eigenangles(&a, 1e-10).unwrap();
        let mut coeffs = vec![ONE];
        for t in &ang {
            let r = Complex64::from_polar(1.0, *t);
            let mut next = vec![ZERO; coeffs.len() + 1];
            for (i, &cf) in coeffs.iter().enumerate() {
                next[i + 1] += cf;
                next[i] -= r * cf;
            }
            coeffs = next;
        }
        let phi = &szego_polynomials(&a)[5].phi;
        for (x, y) in phi.iter().zip(&coeffs) {
            assert!((x - y).norm() < 1e-10);
        }
    }

    #[test]
    fn roots_count_for_hard_draws() {
        for (n, beta) in [(1, 2.0), (7, 0.7), (40, 2.0), (25, 30.0)] {
            for seed in 0..5 {
                let ang = eigenangles(&draw(n, beta, seed), 1e-8).unwrap();
                assert_eq!(ang.len(), n);
                assert!(ang.windows(2).all(|w| w[0] < w[1]));
                assert!(ang.iter().all(|t| (0.0..TAU).contains(t)));
            }
        }
    }

    #[test]
    fn unimodular_interior_coefficient_is_degenerate() {
        let alpha = vec![c(0.1, 0.2), c(0.0, 1.0), c(0.3, 0.0), c(1.0, 0.0)];
        let a = VerblunskyCoeffs::new(alpha).unwrap();
        assert!(matches!(eigenangles(&a, 1e-8), Err(Error::NumericalFailure(_))));
        assert!(b_path(&a).is_err());
    }

    #[test]
    fn circular_repulsion_beats_poisson() {
        let n = 20;
        let small = 0.1 * TAU / n as f64;
        let draws = 2000;
        let mut hits = 0;
        for s in 0..draws {
            let ang = eigenangles(&draw(n, 2.0, 1000 + s), 1e-6).unwrap();
            let mut gaps: Vec<f64> = ang.windows(2).map(|w| w[1] - w[0]).collect();
            gaps.push(ang[0] + TAU - ang[n - 1]);
            hits += gaps.iter().filter(|&&g| g < small).count();
        }
        let p = hits as f64 / (draws as usize * n) as f64;
        // Poisson spacings: P(s < 0.1) = 1 − e^{−0.1}
        assert!(p < 0.2 * (1.0 - (-0.1f64).exp()), "{p}");
    }

    #[test]
    fn zero_coefficients_give_zero_path() {
        let mut alpha = vec![ZERO; 6];
        alpha[5] = c(0.0, 1.0);
        let p = b_path(&VerblunskyCoeffs::new(alpha).unwrap()).unwrap();
        assert!(p.b.iter().all(|b| *b == ZERO));
    }

    #[test]
    fn round_trip_through_b() {
        for seed in 0..10 {
            let a = draw(12, 1.0 + seed as f64, seed);
            let p = b_path(&a).unwrap();
            assert_eq!(p.b[0], ZERO);
            assert!(p.b.iter().all(|b| b.norm() < 1.0));
            assert!((p.b_star.norm() - 1.0).abs() < 1e-10);
            let back = alpha_from_bpath(&p).unwrap();
            let err = a.alpha.iter().zip(&back.alpha).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            assert!(err < 1e-10, "{err}");
        }
    }

    #[test]
    fn dirac_trivial_path() {
        let a = VerblunskyCoeffs::new(vec![Complex64::from_polar(1.0, -0.8)]).unwrap();
        let ang = eigenangles(&a, 1e-12).unwrap();
        let p = b_path(&a).unwrap();
        let r = dirac_spectrum_check(&p, 1, &[ang[0]], 1e-10).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn dirac_accepts_eigenangles_and_rejects_midpoints() {
        let n = 6;
        let a = draw(n, 2.0, 3);
        let ang = eigenangles(&a, 1e-10).unwrap();
        let p = b_path(&a).unwrap();
        let lambdas: Vec<f64> = ang.iter().map(|t| n as f64 * t).collect();
        let r = dirac_spectrum_check(&p, n, &lambdas, 1e-6).unwrap();
        assert!(r.passed, "{r:?}");
        let shifted: Vec<f64> = lambdas.iter().map(|l| l + TAU * n as f64).collect();
        assert!(dirac_spectrum_check(&p, n, &shifted, 1e-6).unwrap().passed);
        let mids: Vec<f64> = (0..n)
            .map(|i| {
                let next = if i + 1 < n { ang[i + 1] } else { ang[0] + TAU };
                0.5 * n as f64 * (ang[i] + next)
            })
            .collect();
        let r = dirac_spectrum_check(&p, n, &mids, 1e-6).unwrap();
        assert!(r.boundary_defects.iter().all(|d| *d > 1e-3), "{r:?}");
        assert!(r.identity_defects.iter().all(|d| *d < 1e-10));
    }

    #[test]
    fn oscillation_count_matches_roots() {
        let n = 10;
        let a = draw(n, 2.0, 4);
        let ang = eigenangles(&a, 1e-10).unwrap();
        let p = b_path(&a).unwrap();
        for (lo, hi) in [(0.0, TAU), (0.5, 2.5), (1.0, 4.0), (3.3, 6.0)] {
            let direct = ang.iter().filter(|&&t| t >= lo && t < hi).count();
            assert_eq!(oscillation_count(&p, lo, hi, 4000), direct, "arc [{lo}, {hi})");
        }
    }

    #[test]
    fn coupling_constant_for_zero_radii() {
        let bm = hyperbolic_bm(HbmMode::Homogeneous, 1.0, 0.01, &mut RngStream::new(5, 0)).unwrap();
        let w = kn_coupling(&bm, &[0.0; 8]).unwrap();
        assert!(w.b.iter().all(|b| *b == ZERO));
        assert!(w.hit_times.iter().all(|t| *t == 0.0));
    }

    #[test]
    fn coupled_walk_sits_on_path() {
        let mut s = RngStream::new(6, 0);
        let bm = hyperbolic_bm(HbmMode::SineBeta(2.0), 0.99, 1e-4, &mut s).unwrap();
        let radii = kn_radii(50, 2.0, &mut s).unwrap();
        let w = kn_coupling(&bm, &radii[..25]).unwrap();
        for (k, &i) in w.hit_index.iter().enumerate() {
            assert_eq!(w.b[k], bm.points[i]);
            assert_eq!(w.hit_times[k], bm.times[i]);
        }
        for k in 0..25 {
            assert!(hyperbolic_dist(w.b[k + 1], w.b[k]) >= radii[k]);
        }
        assert!(kn_coupling(&bm, &[50.0]).is_err());
    }

    #[test]
    fn excursions_shrink_with_n() {
        let med = |n: usize| {
            let v: Vec<f64> = (0..40u64)
                .map(|p| kn_excursion_sup(n, 2.0, 0.5, 1e-4, &mut RngStream::new(8, p)).unwrap())
                .collect();
            crate::statkit::median(&v)
        };
        let (small, large) = (med(50), med(400));
        assert!(large < 0.8 * small, "{small} -> {large}");
        assert!(kn_excursion_sup(10, 2.0, 0.0, 1e-3, &mut RngStream::new(0, 0)).is_err());
    }

    proptest! {
        #[test]
        fn rotation_covariance(seed in 0u64..500, theta in 0.0f64..TAU) {
            let a = draw(8, 2.0, seed);
            let ang = eigenangles(&a, 1e-9).unwrap();
            let mut turned: Vec<f64> = ang.iter().map(|t| (t + theta).rem_euclid(TAU)).collect();
            turned.sort_by(f64::total_cmp);
            let got = eigenangles(&a.spectrally_rotated(theta), 1e-9).unwrap();
            for (x, y) in got.iter().zip(&turned) {
                let d = (x - y).rem_euclid(TAU);
                prop_assert!(d.min(TAU - d) < 1e-9);
            }
        }

        #[test]
        fn bpath_round_trip(seed in 0u64..1000, n in 1usize..30) {
            let a = draw(n, 2.0, seed);
            let back = alpha_from_bpath(&b_path(&a).unwrap()).unwrap();
            for (x, y) in a.alpha.iter().zip(&back.alpha) {
                prop_assert!((x - y).norm() < 1e-9);
            }
        }
    }
}
