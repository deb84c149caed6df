//! The stochastic Airy operator: finite-difference discretization, Riccati
//! diffusion Monte Carlo for Tracy–Widom laws, the PDE for the boundary-
//! deformed laws, Weyl asymptotics and tail formulas.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::SymTridiagonal;
use crate::error::{Error, Result};
use crate::painleve::airy_zero;
use crate::statkit::{wilson_interval, CdfMeta, CdfTable};
use crate::stochastics::{ExplosionPolicy, RngStream, SdeConfig, StepEngine};
use crate::tridiag::bottom_eigenvalues;

pub use crate::statkit::CdfTable as TwTable;

/// Left boundary condition: Dirichlet f(0) = 0, or Robin f′(0) = w f(0).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Boundary {
    Dirichlet,
    Robin(f64),
}

impl Boundary {
    /// `+∞` maps to Dirichlet.
    pub fn from_w(w: f64) -> Result<Self> {
        if w == f64::INFINITY {
            Ok(Boundary::Dirichlet)
        } else if w.is_finite() {
            Ok(Boundary::Robin(w))
        } else {
            Err(Error::invalid(format!("boundary parameter {w} must be finite or +inf")))
        }
    }

    pub fn w(&self) -> f64 {
        match self {
            Boundary::Dirichlet => f64::INFINITY,
            Boundary::Robin(w) => *w,
        }
    }

    fn meta_w(&self) -> Option<f64> {
        match self {
            Boundary::Dirichlet => None,
            Boundary::Robin(w) => Some(*w),
        }
    }
}

/// Finite-difference matrix of −d²/dt² + t + (2/√β) b′ on [0, L].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SaoDiscretization {
    pub matrix: SymTridiagonal,
    pub grid_step: f64,
    pub beta: f64,
    pub boundary: Boundary,
    pub domain_length: f64,
    /// Grid position t_j of each matrix row.
    pub nodes: Vec<f64>,
    pub seed: u64,
    pub stream_id: u64,
}

/// Nodes t_j = j h. Dirichlet drops t_0; Robin keeps it with a half-cell row,
/// symmetrized through the lumped mass matrix diag(1/2, 1, …, 1). The right
/// end is always Dirichlet. `beta = ∞` switches the noise off.
pub fn discretize_sao(
    beta: f64,
    boundary: Boundary,
    length: f64,
    h: f64,
    stream: &mut RngStream,
) -> Result<SaoDiscretization> {
    if !(beta > 0.0) || !(length > 0.0) || !(h > 0.0) || !length.is_finite() {
        return Err(Error::invalid(format!(
            "discretize_sao needs beta, L, h > 0 (got {beta}, {length}, {h})"
        )));
    }
    let cells = (length / h).round() as usize;
    if cells < 3 {
        return Err(Error::invalid("grid step too coarse for the domain"));
    }
    let inv_h2 = 1.0 / (h * h);
    let noise_sd = if beta.is_infinite() { 0.0 } else { (4.0 / (beta * h)).sqrt() };
    let first = match boundary {
        Boundary::Dirichlet => 1,
        Boundary::Robin(_) => 0,
    };
    let nodes: Vec<f64> = (first..cells).map(|j| j as f64 * h).collect();
    let mut diag = Vec::with_capacity(nodes.len());
    for (k, &t) in nodes.iter().enumerate() {
        let z = if noise_sd > 0.0 { stream.standard_normal() } else { 0.0 };
        let d = match boundary {
            Boundary::Robin(w) if k == 0 => 2.0 * inv_h2 + 2.0 * w / h + t + std::f64::consts::SQRT_2 * noise_sd * z,
            _ => 2.0 * inv_h2 + t + noise_sd * z,
        };
        diag.push(d);
    }
    let mut offdiag = vec![-inv_h2; nodes.len() - 1];
    if let Boundary::Robin(_) = boundary {
        offdiag[0] = -std::f64::consts::SQRT_2 * inv_h2;
    }
    Ok(SaoDiscretization {
        matrix: SymTridiagonal { diag, offdiag },
        grid_step: h,
        beta,
        boundary,
        domain_length: cells as f64 * h,
        nodes,
        seed: stream.seed(),
        stream_id: stream.stream_id(),
    })
}

/// Bottom `k` eigenvalues Λ₀ < … < Λ_{k−1} of the discretized operator.
pub fn sao_bottom_eigs(d: &SaoDiscretization, k: usize) -> Result<Vec<f64>> {
    if k == 0 || k > d.matrix.n() {
        return Err(Error::OutOfRange(format!(
            "requested {k} eigenvalues of an order-{} discretization",
            d.matrix.n()
        )));
    }
    bottom_eigenvalues(&d.matrix, k, 1e-10)
}

/// Discrete Riccati count: shoots the eigenvalue recursion at `lambda` from the
/// left boundary and counts the times the ratio f_{j+1}/f_j turns negative
/// (the discrete analogue of an explosion), including the right wall.
pub fn discrete_riccati_explosions(d: &SaoDiscretization, lambda: f64) -> usize {
    let a = &d.matrix;
    let n = a.n();
    let wall = -1.0 / (d.grid_step * d.grid_step);
    // r_j = f_{j+1} / f_j for the solution of (A − λ) f = 0 with f_{-1} = 0
    let mut count = 0;
    let mut r = f64::INFINITY;
    for j in 0..n {
        let back = if j > 0 { a.offdiag[j - 1] / r } else { 0.0 };
        let bj = if j + 1 < n { a.offdiag[j] } else { wall };
        r = -((a.diag[j] - lambda) + back) / bj;
        if r == 0.0 {
            r = f64::MIN_POSITIVE;
        }
        if r < 0.0 {
            count += 1;
        }
    }
    count
}

/// Integration settings for the Riccati diffusion.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RiccatiConfig {
    pub dt: f64,
    /// Certification window: stop once t > λ + t_safe with W above √(t − λ).
    pub t_safe: f64,
    pub blow_threshold: f64,
}

impl Default for RiccatiConfig {
    fn default() -> Self {
        RiccatiConfig {
            dt: 0.001,
            t_safe: 10.0,
            blow_threshold: 1e4,
        }
    }
}

fn noise_scale(beta: f64) -> f64 {
    if beta.is_infinite() {
        0.0
    } else {
        2.0 / beta.sqrt()
    }
}

fn check_riccati(beta: f64, cfg: &RiccatiConfig) -> Result<()> {
    if !(beta > 0.0) {
        return Err(Error::invalid(format!("beta must be positive, got {beta}")));
    }
    if !(cfg.dt > 0.0) || !(cfg.t_safe > 0.0) || !(cfg.blow_threshold > 1.0) {
        return Err(Error::invalid("invalid Riccati configuration"));
    }
    Ok(())
}

fn start_value(boundary: Boundary, blow: f64) -> f64 {
    match boundary {
        Boundary::Dirichlet => blow,
        Boundary::Robin(w) => w,
    }
}

/// For one noise path, whether W_λ explodes at least once, for every λ in
/// `lambdas`. All λ share the same Brownian path. Results are made monotone in
/// λ (an explosion at λ implies one at every larger λ, as for the exact
/// diffusion).
pub fn riccati_explodes(
    beta: f64,
    boundary: Boundary,
    lambdas: &[f64],
    cfg: &RiccatiConfig,
    stream: &mut RngStream,
) -> Result<Vec<bool>> {
    check_riccati(beta, cfg)?;
    let sigma = noise_scale(beta);
    let sde_cfg = SdeConfig {
        blow_threshold: cfg.blow_threshold,
        ..SdeConfig::default()
    };
    let engine = StepEngine::from_config(stream.key(), ExplosionPolicy::RestartFromPlusInfinity, &sde_cfg);
    let m = lambdas.len();
    let mut x = vec![start_value(boundary, cfg.blow_threshold); m];
    let mut exploded = vec![false; m];
    let mut active: Vec<usize> = (0..m).collect();
    let h = cfg.dt;
    let sqrt_h = h.sqrt();
    let cap = lambdas.iter().fold(0.0f64, |a, &l| a.max(l)).max(0.0) + 4.0 * cfg.t_safe;
    let mut step = 0u64;
    while !active.is_empty() {
        let t = step as f64 * h;
        if t > cap {
            break;
        }
        let dw = sqrt_h * stream.standard_normal();
        active.retain(|&i| {
            let lam = lambdas[i];
            let drift = move |s: f64, w: f64| s - lam - w * w;
            let noise = |_: f64, _: f64| sigma;
            let mut hit = false;
            engine.advance(&mut x[i], t, h, dw, step, &drift, &noise, &mut |_| {
                hit = true;
                false
            });
            if hit {
                exploded[i] = true;
                return false;
            }
            let tn = t + h;
            !(tn > lam + cfg.t_safe && x[i] > (tn - lam).max(0.0).sqrt())
        });
        step += 1;
    }
    // enforce the coupling order
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| lambdas[a].total_cmp(&lambdas[b]));
    let mut seen = false;
    for &i in &order {
        seen |= exploded[i];
        exploded[i] = seen;
    }
    Ok(exploded)
}

/// Number of explosions of W_λ on one noise path (at most `max_count`),
/// integrating until the path is certified explosion-free.
pub fn riccati_explosion_count(
    beta: f64,
    boundary: Boundary,
    lambda: f64,
    max_count: usize,
    cfg: &RiccatiConfig,
    stream: &mut RngStream,
) -> Result<usize> {
    check_riccati(beta, cfg)?;
    let sigma = noise_scale(beta);
    let sde_cfg = SdeConfig {
        blow_threshold: cfg.blow_threshold,
        ..SdeConfig::default()
    };
    let engine = StepEngine::from_config(stream.key(), ExplosionPolicy::RestartFromPlusInfinity, &sde_cfg);
    let mut x = start_value(boundary, cfg.blow_threshold);
    let h = cfg.dt;
    let sqrt_h = h.sqrt();
    let cap = lambda.max(0.0) + 4.0 * cfg.t_safe;
    let drift = move |s: f64, w: f64| s - lambda - w * w;
    let noise = |_: f64, _: f64| sigma;
    let mut count = 0usize;
    let mut step = 0u64;
    loop {
        let t = step as f64 * h;
        if t > cap || count >= max_count {
            return Ok(count);
        }
        let dw = sqrt_h * stream.standard_normal();
        engine.advance(&mut x, t, h, dw, step, &drift, &noise, &mut |_| {
            count += 1;
            true
        });
        let tn = t + h;
        if tn > lambda + cfg.t_safe && x > (tn - lambda).max(0.0).sqrt() {
            return Ok(count);
        }
        step += 1;
    }
}

/// Monte Carlo table of P(TW_β ≤ a) = P(Λ₀ ≥ −a) = P(W_{−a} never explodes).
pub fn riccati_tw_cdf(
    beta: f64,
    boundary: Boundary,
    a_grid: &[f64],
    paths: usize,
    stream: &RngStream,
) -> Result<CdfTable> {
    riccati_tw_cdf_with(beta, boundary, a_grid, paths, stream, &RiccatiConfig::default())
}

pub fn riccati_tw_cdf_with(
    beta: f64,
    boundary: Boundary,
    a_grid: &[f64],
    paths: usize,
    stream: &RngStream,
    cfg: &RiccatiConfig,
) -> Result<CdfTable> {
    if a_grid.is_empty() || a_grid.windows(2).any(|w| !(w[0] < w[1])) || a_grid.iter().any(|a| !a.is_finite()) {
        return Err(Error::invalid("a_grid must be finite and strictly increasing"));
    }
    if paths == 0 {
        return Err(Error::invalid("need at least one path"));
    }
    check_riccati(beta, cfg)?;
    let lambdas: Vec<f64> = a_grid.iter().map(|a| -a).collect();
    let per_path: Vec<Vec<bool>> = (0..paths as u64)
        .into_par_iter()
        .map(|p| riccati_explodes(beta, boundary, &lambdas, cfg, &mut stream.substream(p)))
        .collect::<Result<_>>()?;
    let mut survive = vec![0u64; a_grid.len()];
    for path in &per_path {
        for (i, &e) in path.iter().enumerate() {
            if !e {
                survive[i] += 1;
            }
        }
    }
    let values: Vec<f64> = survive.iter().map(|&s| s as f64 / paths as f64).collect();
    let ci = survive
        .iter()
        .map(|&s| wilson_interval(s, paths as u64, 0.95).map(|(lo, hi)| 0.5 * (hi - lo)))
        .collect::<Result<Vec<_>>>()?;
    let mut table = CdfTable::new(
        a_grid.to_vec(),
        values,
        CdfMeta {
            beta: Some(beta),
            w: boundary.meta_w(),
            method: "riccati".into(),
            paths: Some(paths),
            grid_resolution: Some(cfg.dt),
            seed: Some(stream.seed()),
        },
    )?;
    table.ci_halfwidth = Some(ci);
    Ok(table)
}

/// Solution of the backward equation on a (t, w) grid, row-major in t.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PdeTable {
    pub beta: f64,
    pub t_grid: Vec<f64>,
    pub w_grid: Vec<f64>,
    /// values[i * w_grid.len() + j] = F(t_i, w_j)
    pub values: Vec<f64>,
}

impl PdeTable {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.w_grid.len() + j]
    }

    /// Bilinear interpolation inside the grid.
    pub fn eval(&self, t: f64, w: f64) -> Result<f64> {
        let (tg, wg) = (&self.t_grid, &self.w_grid);
        if t < tg[0] || t > *tg.last().unwrap() || w < wg[0] || w > *wg.last().unwrap() {
            return Err(Error::OutOfRange(format!("({t}, {w}) outside the PDE grid")));
        }
        let i = (tg.partition_point(|&x| x <= t).max(1) - 1).min(tg.len() - 2);
        let j = (wg.partition_point(|&x| x <= w).max(1) - 1).min(wg.len() - 2);
        let s = (t - tg[i]) / (tg[i + 1] - tg[i]);
        let r = (w - wg[j]) / (wg[j + 1] - wg[j]);
        Ok((1.0 - s) * ((1.0 - r) * self.at(i, j) + r * self.at(i, j + 1))
            + s * ((1.0 - r) * self.at(i + 1, j) + r * self.at(i + 1, j + 1)))
    }
}

/// Grid for [`tw_pde_solve`]. The terminal time `t_max` should be large
/// (≥ 8): the terminal data is the β-independent limit F = 1{w > −√t}.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PdeGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub w_min: f64,
    pub w_max: f64,
    pub dw: f64,
    pub dt: f64,
    /// Store every `store_every`-th time level.
    pub store_every: usize,
}

impl PdeGrid {
    /// Largest stable explicit step for this w-grid.
    pub fn stable_dt(&self, beta: f64) -> f64 {
        let diff = 2.0 / beta;
        let bmax = self.w_min.abs().max(self.w_max.abs()).powi(2) + self.t_min.abs().max(self.t_max.abs());
        0.9 / (2.0 * diff / (self.dw * self.dw) + bmax / self.dw)
    }
}

/// Solves ∂_t F + (2/β) ∂²_w F + (t − w²) ∂_w F = 0 backward from `t_max`.
///
/// Scheme: explicit, centered diffusion, upwinded transport (centered where
/// the cell Péclet number allows), F = 0 at `w_min`, one-sided outflow at
/// `w_max` where the drift points into the domain.
pub fn tw_pde_solve(beta: f64, grid: &PdeGrid) -> Result<PdeTable> {
    if !(beta > 0.0) || beta.is_infinite() {
        return Err(Error::invalid(format!("PDE needs finite beta > 0, got {beta}")));
    }
    let g = grid;
    if !(g.t_min < g.t_max) || !(g.w_min < g.w_max) || !(g.dw > 0.0) || !(g.dt > 0.0) || g.store_every == 0 {
        return Err(Error::invalid("invalid PDE grid"));
    }
    if g.w_max * g.w_max < g.t_max {
        return Err(Error::invalid("w_max must exceed sqrt(t_max) so the top boundary is outflow"));
    }
    let limit = g.stable_dt(beta) / 0.9;
    if g.dt > limit {
        return Err(Error::StepSize(format!(
            "dt = {} exceeds the explicit stability bound {limit:.3e}",
            g.dt
        )));
    }
    let nw = ((g.w_max - g.w_min) / g.dw).round() as usize + 1;
    let dw = (g.w_max - g.w_min) / (nw - 1) as f64;
    let w: Vec<f64> = (0..nw).map(|j| g.w_min + j as f64 * dw).collect();
    let nt = ((g.t_max - g.t_min) / g.dt).ceil() as usize;
    let dt = (g.t_max - g.t_min) / nt as f64;
    let diff = 2.0 / beta;
    let mut f: Vec<f64> = w
        .iter()
        .map(|&x| if x > -g.t_max.sqrt() { 1.0 } else { 0.0 })
        .collect();
    f[0] = 0.0;
    let mut next = f.clone();
    let mut t_store = vec![g.t_max];
    let mut rows = vec![f.clone()];
    for step in 0..nt {
        let t = g.t_max - step as f64 * dt;
        for j in 1..nw {
            let b = t - w[j] * w[j];
            let fm = f[j - 1];
            let f0 = f[j];
            let (fww, fw) = if j + 1 < nw {
                let fp = f[j + 1];
                let fww = (fp - 2.0 * f0 + fm) / (dw * dw);
                let fw = if b.abs() * dw <= 2.0 * diff {
                    (fp - fm) / (2.0 * dw)
                } else if b > 0.0 {
                    (fp - f0) / dw
                } else {
                    (f0 - fm) / dw
                };
                (fww, fw)
            } else {
                // outflow row: transport only, from the interior side
                (0.0, (f0 - fm) / dw)
            };
            next[j] = (f0 + dt * (diff * fww + b * fw)).clamp(0.0, 1.0);
        }
        next[0] = 0.0;
        std::mem::swap(&mut f, &mut next);
        if (step + 1) % g.store_every == 0 || step + 1 == nt {
            t_store.push(t - dt);
            rows.push(f.clone());
        }
    }
    t_store.reverse();
    rows.reverse();
    Ok(PdeTable {
        beta,
        t_grid: t_store,
        w_grid: w,
        values: rows.into_iter().flatten().collect(),
    })
}

/// Leading-order tail exponents (−log of the probability).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailFormulas {
    pub beta: f64,
    pub a: f64,
    /// −log P(TW_β < −a) ≈ β a³ / 24.
    pub left_exponent: f64,
    /// −log P(TW_β > a) ≈ (2/3) β a^{3/2}.
    pub right_exponent: f64,
    /// Power of a in the right-tail prefactor, −3β/4.
    pub right_polynomial_power: f64,
}

pub fn tail_formulas(beta: f64, a: f64) -> Result<TailFormulas> {
    if !(beta > 0.0) || !(a > 0.0) {
        return Err(Error::invalid("tail formulas need beta > 0 and a > 0"));
    }
    Ok(TailFormulas {
        beta,
        a,
        left_exponent: beta * a.powi(3) / 24.0,
        right_exponent: 2.0 / 3.0 * beta * a.powf(1.5),
        right_polynomial_power: -0.75 * beta,
    })
}

/// Shapes of the finite-n edge envelopes with a caller-chosen constant `c`:
/// (e^{−βnε^{3/2}/c}, c^β e^{−βn²ε³/c}) for the upper and lower deviations of
/// the top eigenvalue of the scaled β-Hermite matrix from 2(1+ε).
pub fn ledoux_rider_upper(beta: f64, n: usize, eps: f64, c: f64) -> Result<(f64, f64)> {
    if !(beta > 0.0) || n == 0 || !(eps > 0.0) || !(c > 0.0) {
        return Err(Error::invalid("envelope needs beta, n, eps, c > 0"));
    }
    let nf = n as f64;
    Ok((
        (-beta * nf * eps.powf(1.5) / c).exp(),
        c.powf(beta) * (-beta * nf * nf * eps.powi(3) / c).exp(),
    ))
}

/// (3π/2)^{2/3}, the limit of Λ_k / k^{2/3}.
pub fn weyl_constant() -> f64 {
    (1.5 * std::f64::consts::PI).powf(2.0 / 3.0)
}

/// Λ_k / k^{2/3} for the deterministic Airy operator, Λ_k = |a_{k+1}|.
pub fn weyl_check(k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("weyl_check needs k >= 1"));
    }
    Ok(-airy_zero(k + 1)? / (k as f64).powf(2.0 / 3.0))
}

/// Trial function (x√a) ∧ √((a−x)⁺) ∧ (a−x)⁺ used for the left-tail bound.
pub fn left_tail_trial(a: f64, x: f64) -> f64 {
    let r = (a - x).max(0.0);
    (x * a.sqrt()).min(r.sqrt()).min(r).max(0.0)
}

/// (‖f‖², ‖√x f‖², ‖f‖₄⁴, ‖f′‖²) of the trial function, by midpoint quadrature.
pub fn trial_norms(a: f64, cells: usize) -> (f64, f64, f64, f64) {
    let h = a / cells as f64;
    let (mut n2, mut nx, mut n4, mut d2) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..cells {
        let x = (i as f64 + 0.5) * h;
        let f = left_tail_trial(a, x);
        n2 += f * f * h;
        nx += x * f * f * h;
        n4 += f.powi(4) * h;
        let df = (left_tail_trial(a, x + 0.5 * h) - left_tail_trial(a, x - 0.5 * h).max(0.0)) / h;
        d2 += df * df * h;
    }
    (n2, nx, n4, d2)
}

/// Quadratic form ⟨f, A f⟩·h of the discretized operator on samples of f at
/// the grid nodes, and the same form without noise.
pub fn sao_quadratic_form(d: &SaoDiscretization, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let v: Vec<f64> = d.nodes.iter().map(|&t| f(t)).collect();
    let av = d.matrix.matvec(&v);
    let h = d.grid_step;
    let full: f64 = v.iter().zip(&av).map(|(a, b)| a * b).sum::<f64>() * h;
    let inv_h2 = 1.0 / (h * h);
    let clean: f64 = d
        .nodes
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let left = if j > 0 { v[j - 1] } else { 0.0 };
            let right = if j + 1 < v.len() { v[j + 1] } else { 0.0 };
            v[j] * ((2.0 * v[j] - left - right) * inv_h2 + t * v[j])
        })
        .sum::<f64>()
        * h;
    (full, clean)
}
