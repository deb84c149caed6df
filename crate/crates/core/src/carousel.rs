//! Bulk limits through the Brownian carousel: hyperbolic Brownian motion in
//! the Poincaré disk, the phase SDE that counts Sine_β points, gap and CLT
//! statistics, and the Schrödinger bulk process Sch_τ.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{sample_schrodinger, OmegaDist};
use crate::error::{Error, Result};
use crate::statkit::wilson_interval;
use crate::stochastics::RngStream;
use crate::tridiag::{eigenvalue_by_index, eigenvector};

/// Noise scale of the time-homogeneous disk motion, chosen so the hyperbolic
/// distance from the origin has quadratic variation t/2.
pub const HOMOGENEOUS_SIGMA: f64 = 0.353_553_390_593_273_8; // 1/(2√2)

/// A time-stamped path in the open unit disk.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiskPath {
    pub times: Vec<f64>,
    pub points: Vec<Complex64>,
}

impl DiskPath {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Complex64 {
        *self.points.last().expect("paths hold at least the start point")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum HbmMode {
    /// Logarithmic-time motion on [0, 1) with noise 1/√(β(1−t)).
    SineBeta(f64),
    Homogeneous,
}

/// Hyperbolic distance from the origin.
pub fn hyperbolic_distance(z: Complex64) -> f64 {
    let r = z.norm();
    ((1.0 + r) / (1.0 - r)).ln()
}

/// Möbius map sending 0 to `b`: z ↦ (z + b)/(1 + b̄z).
#[inline]
pub(crate) fn mobius_from_origin(b: Complex64, z: Complex64) -> Complex64 {
    (z + b) / (Complex64::new(1.0, 0.0) + b.conj() * z)
}

/// Möbius map sending `b` to 0.
#[inline]
pub(crate) fn mobius_to_origin(b: Complex64, z: Complex64) -> Complex64 {
    (z - b) / (Complex64::new(1.0, 0.0) - b.conj() * z)
}

/// One step of d𝓑 = σ(1 − |𝓑|²) dZ: a Gaussian step at the origin carried
/// to 𝓑 by the disk automorphism, so the result always stays inside.
#[inline]
pub(crate) fn hbm_step(b: Complex64, sd: f64, stream: &mut RngStream) -> Complex64 {
    let mut delta = stream.complex_normal() * sd;
    let r = delta.norm();
    if r >= 1.0 {
        delta *= (1.0 - 1e-12) / r;
    }
    mobius_from_origin(b, delta)
}

fn check_step(variance: f64) -> Result<()> {
    // a step with σ²h above 1/16 overshoots the disk too often to be useful
    if variance > 1.0 / 16.0 {
        return Err(Error::StepSize(format!(
            "disk step variance {variance:.3} exceeds 1/16; refine dt"
        )));
    }
    Ok(())
}

/// Simulate hyperbolic Brownian motion started at the origin.
///
/// In `SineBeta` mode the step shrinks geometrically, h_k = dt·(1 − t_k),
/// and `horizon` must lie in (0, 1). `β = ∞` gives the constant path.
pub fn hyperbolic_bm(mode: HbmMode, horizon: f64, dt: f64, stream: &mut RngStream) -> Result<DiskPath> {
    if !(dt > 0.0) || !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::invalid(format!("need dt > 0 and a finite horizon > 0, got dt={dt}, horizon={horizon}")));
    }
    let mut times = vec![0.0];
    let mut points = vec![Complex64::new(0.0, 0.0)];
    let mut t = 0.0;
    let mut b = points[0];
    match mode {
        HbmMode::SineBeta(beta) => {
            if !(beta > 0.0) {
                return Err(Error::invalid(format!("beta must be positive, got {beta}")));
            }
            if horizon >= 1.0 {
                return Err(Error::invalid("sine_beta mode lives on [0, 1); horizon must be < 1"));
            }
            check_step(dt / beta)?;
            while t < horizon {
                let h = (dt * (1.0 - t)).min(horizon - t);
                if beta.is_finite() {
                    let sd = (h / (beta * (1.0 - t))).sqrt();
                    b = hbm_step(b, sd, stream);
                }
                t = if horizon - t <= h { horizon } else { t + h };
                times.push(t);
                points.push(b);
            }
        }
        HbmMode::Homogeneous => {
            check_step(HOMOGENEOUS_SIGMA * HOMOGENEOUS_SIGMA * dt)?;
            let steps = (horizon / dt).ceil() as usize;
            let h = horizon / steps as f64;
            let sd = HOMOGENEOUS_SIGMA * h.sqrt();
            for k in 1..=steps {
                b = hbm_step(b, sd, stream);
                t = if k == steps { horizon } else { k as f64 * h };
                times.push(t);
                points.push(b);
            }
        }
    }
    Ok(DiskPath { times, points })
}

/// Rotation-speed profile of the carousel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Driver {
    /// f(t) = (β/4)e^{−βt/4} on [0, ∞).
    SineBeta(f64),
    /// f ≡ 1/τ on [0, τ], driven by the homogeneous disk motion.
    Homogeneous(f64),
}

impl Driver {
    fn validate(&self) -> Result<()> {
        let p = match self {
            Driver::SineBeta(b) => b,
            Driver::Homogeneous(tau) => tau,
        };
        if !(*p > 0.0) || !p.is_finite() {
            return Err(Error::invalid(format!("driver parameter must be finite and positive: {self:?}")));
        }
        Ok(())
    }
}

/// Lifted phase of one carousel run. For the homogeneous driver `alpha` is the
/// angle of the rotating boundary point seen from the disk centre.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PhaseTrajectory {
    pub times: Vec<f64>,
    pub alpha: Vec<f64>,
    pub lambda: f64,
    pub driver: Driver,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountSample {
    pub lambda: f64,
    pub count: u64,
    /// Time at which the phase was read off.
    pub horizon: f64,
    /// The run was continued to twice its stopping time as a lock check.
    pub certified: bool,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CarouselConfig {
    /// Largest time step.
    pub dt: f64,
    /// Cap on the drift increment λ f h of a single step.
    pub max_rotation: f64,
    /// Stop once the remaining drift is below this many full turns ...
    pub drift_budget: f64,
    /// ... and every phase sits this close to a multiple of 2π.
    pub lock_tol: f64,
    /// Horizon doublings allowed before giving up on locking.
    pub max_extensions: u32,
    /// Re-run past the stopping time on streams with id ≡ 0 mod 100.
    pub certify: bool,
}

impl Default for CarouselConfig {
    fn default() -> Self {
        CarouselConfig {
            dt: 0.005,
            max_rotation: 0.05,
            drift_budget: 0.01,
            lock_tol: 1e-3,
            max_extensions: 3,
            certify: true,
        }
    }
}

impl CarouselConfig {
    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.max_rotation > 0.0 && self.drift_budget > 0.0 && self.lock_tol > 0.0) {
            return Err(Error::invalid(format!("carousel config must be positive: {self:?}")));
        }
        Ok(())
    }
}

fn check_lambdas(lambdas: &[f64]) -> Result<()> {
    if lambdas.is_empty() {
        return Err(Error::invalid("no lambda values given"));
    }
    if lambdas.iter().any(|l| !(*l >= 0.0) || !l.is_finite()) {
        return Err(Error::invalid("lambda values must be finite and nonnegative"));
    }
    Ok(())
}

fn near_multiple(alpha: f64, tol: f64) -> bool {
    (alpha - TAU * (alpha / TAU).round()).abs() < tol
}

/// Integrate dα = λ f dt + 2 sin(α/2) dW for several λ on one noise path.
///
/// All λ share one time grid, fixed by the largest λ. Increments are clipped
/// to |dW| ≤ 1, which keeps the one-step map increasing in α, so the phases
/// stay ordered in λ and never drop below a multiple of 2π they have passed.
fn sine_phases(
    beta: f64,
    lambdas: &[f64],
    cfg: &CarouselConfig,
    stream: &mut RngStream,
    mut record: Option<&mut (Vec<f64>, Vec<f64>)>,
) -> Result<Vec<CountSample>> {
    let q = beta / 4.0;
    let lmax = lambdas.iter().cloned().fold(0.0, f64::max);
    let budget = cfg.drift_budget * TAU;
    let t_drift = if lmax > budget { (lmax / budget).ln() / q } else { 0.0 };
    let mut alpha = vec![0.0; lambdas.len()];
    let mut floor = vec![0.0; lambdas.len()];
    let mut t = 0.0;
    let mut limit = t_drift + 50.0;
    let mut extensions = 0;
    let certify = cfg.certify && stream.stream_id() % 100 == 0;
    let mut stop_at: Option<f64> = None;
    if let Some(r) = record.as_deref_mut() {
        r.0.push(0.0);
        r.1.push(0.0);
    }
    loop {
        let locked = t >= t_drift && alpha.iter().all(|&a| near_multiple(a, cfg.lock_tol));
        if locked {
            match stop_at {
                None if certify => stop_at = Some(2.0 * t.max(1.0)),
                None => break,
                Some(s) if t >= s => break,
                Some(_) => {}
            }
        }
        if t > limit {
            if extensions >= cfg.max_extensions {
                return Err(Error::NumericalFailure(format!(
                    "carousel phase failed to lock by t = {t:.1}"
                )));
            }
            extensions += 1;
            limit *= 2.0;
        }
        let decay = (-q * t).exp();
        let rate = lmax * q * decay;
        let h = if rate > 0.0 { cfg.dt.min(cfg.max_rotation / rate) } else { cfg.dt };
        let dw = (h.sqrt() * stream.standard_normal()).clamp(-1.0, 1.0);
        // exact drift integral over the step
        let push = decay * (-(-q * h).exp_m1());
        for ((a, fl), &l) in alpha.iter_mut().zip(floor.iter_mut()).zip(lambdas) {
            let next = *a + l * push + 2.0 * (0.5 * *a).sin() * dw;
            *a = next.max(*fl);
            let passed = TAU * (*a / TAU).floor();
            if passed > *fl {
                *fl = passed;
            }
        }
        t += h;
        if let Some(r) = record.as_deref_mut() {
            r.0.push(t);
            r.1.push(alpha[alpha.len() - 1]);
        }
    }
    Ok(lambdas
        .iter()
        .zip(&alpha)
        .map(|(&l, &a)| CountSample {
            lambda: l,
            count: (a / TAU).round().max(0.0) as u64,
            horizon: t,
            certified: certify,
        })
        .collect())
}

/// Rotate the boundary point e^{iγ} about the disk centre `b` by angle `phi`
/// (measured at `b`) and return the lifted increment of γ.
#[inline]
fn rotate_about(gamma_point: Complex64, b: Complex64, phi: f64) -> (Complex64, f64) {
    let w = mobius_to_origin(b, gamma_point) * Complex64::from_polar(1.0, phi);
    let mut z = mobius_from_origin(b, w);
    z /= z.norm();
    let step = (z * gamma_point.conj()).arg().rem_euclid(TAU);
    (z, step)
}

/// Homogeneous carousel on [0, τ]: the boundary point rotates about the disk
/// motion at speed λ/τ; points are counted as passes of a uniformly placed
/// end target θ* ∈ (0, 2π].
fn homogeneous_phases(
    tau: f64,
    lambdas: &[f64],
    dt: f64,
    stream: &mut RngStream,
    mut record: Option<&mut (Vec<f64>, Vec<f64>)>,
) -> Result<Vec<CountSample>> {
    check_step(HOMOGENEOUS_SIGMA * HOMOGENEOUS_SIGMA * dt)?;
    let target = TAU * (1.0 - stream.uniform());
    let steps = (tau / dt).ceil().max(1.0) as usize;
    let h = tau / steps as f64;
    let sd = HOMOGENEOUS_SIGMA * h.sqrt();
    let mut b = Complex64::new(0.0, 0.0);
    let mut points = vec![Complex64::new(1.0, 0.0); lambdas.len()];
    let mut gamma = vec![0.0; lambdas.len()];
    if let Some(r) = record.as_deref_mut() {
        r.0.push(0.0);
        r.1.push(0.0);
    }
    for k in 1..=steps {
        for ((p, g), &l) in points.iter_mut().zip(gamma.iter_mut()).zip(lambdas) {
            if l > 0.0 {
                let (z, step) = rotate_about(*p, b, l * h / tau);
                *p = z;
                *g += step;
            }
        }
        b = hbm_step(b, sd, stream);
        if let Some(r) = record.as_deref_mut() {
            r.0.push(k as f64 * h);
            r.1.push(gamma[gamma.len() - 1]);
        }
    }
    Ok(lambdas
        .iter()
        .zip(&gamma)
        .map(|(&l, &g)| CountSample {
            lambda: l,
            count: if g >= target { ((g - target) / TAU).floor() as u64 + 1 } else { 0 },
            horizon: tau,
            certified: false,
        })
        .collect())
}

/// Counts N(λ) for every λ in `lambdas`, all driven by one noise realization,
/// so the counts are non-decreasing in λ.
pub fn carousel_counts(
    lambdas: &[f64],
    driver: Driver,
    cfg: &CarouselConfig,
    stream: &mut RngStream,
) -> Result<Vec<CountSample>> {
    check_lambdas(lambdas)?;
    driver.validate()?;
    cfg.validate()?;
    match driver {
        Driver::SineBeta(beta) => sine_phases(beta, lambdas, cfg, stream, None),
        Driver::Homogeneous(tau) => homogeneous_phases(tau, lambdas, cfg.dt, stream, None),
    }
}

/// One draw of the number of points in [0, λ].
pub fn carousel_count(lambda: f64, driver: Driver, dt: f64, stream: &mut RngStream) -> Result<CountSample> {
    let cfg = CarouselConfig {
        dt,
        ..Default::default()
    };
    Ok(carousel_counts(&[lambda], driver, &cfg, stream)?[0])
}

/// Like [`carousel_count`] but keeps the whole phase path.
pub fn phase_trajectory(
    lambda: f64,
    driver: Driver,
    cfg: &CarouselConfig,
    stream: &mut RngStream,
) -> Result<(PhaseTrajectory, CountSample)> {
    check_lambdas(&[lambda])?;
    driver.validate()?;
    cfg.validate()?;
    let mut rec = (Vec::new(), Vec::new());
    let count = match driver {
        Driver::SineBeta(beta) => sine_phases(beta, &[lambda], cfg, stream, Some(&mut rec))?,
        Driver::Homogeneous(tau) => homogeneous_phases(tau, &[lambda], cfg.dt, stream, Some(&mut rec))?,
    }[0];
    Ok((
        PhaseTrajectory {
            times: rec.0,
            alpha: rec.1,
            lambda,
            driver,
        },
        count,
    ))
}

/// Counts for `paths` independent noise realizations, path p on substream p.
pub fn parallel_counts(
    lambdas: &[f64],
    driver: Driver,
    cfg: &CarouselConfig,
    paths: usize,
    stream: &RngStream,
) -> Result<Vec<Vec<CountSample>>> {
    if paths == 0 {
        return Err(Error::invalid("need at least one path"));
    }
    (0..paths as u64)
        .into_par_iter()
        .map(|p| carousel_counts(lambdas, driver, cfg, &mut stream.substream(p)))
        .collect()
}

/// γ_β in the polynomial prefactor of the Sine_β gap probability.
pub fn gap_gamma(beta: f64) -> f64 {
    0.25 * (beta / 2.0 + 2.0 / beta - 3.0)
}

/// −βλ²/64 + (β/8 − 1/4)λ.
pub fn gap_exponent(beta: f64, lambda: f64) -> f64 {
    -beta * lambda * lambda / 64.0 + (beta / 8.0 - 0.25) * lambda
}

/// ‖(β/4)e^{−βt/4}‖²₂ by composite Simpson on [0, 200/β].
pub fn sine_driver_norm_sq(beta: f64) -> f64 {
    let f = |t: f64| 0.25 * beta * (-0.25 * beta * t).exp();
    let upper = 200.0 / beta;
    let n = 20_000;
    let h = upper / n as f64;
    let mut s = f(0.0).powi(2) + f(upper).powi(2);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(i as f64 * h).powi(2);
    }
    s * h / 3.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GapTheory {
    /// −βλ²/64 + (β/8 − 1/4)λ
    pub exponent: f64,
    pub gamma_beta: f64,
    /// λ^γ exp(exponent), the asymptotic up to the unknown constant.
    pub leading: f64,
    /// −λ²‖f‖²/8 for the general-driver bound.
    pub ggap_exponent: f64,
    /// ‖f‖²/8 by quadrature ...
    pub f_norm_sq_over_8: f64,
    /// ... and in closed form, β/64.
    pub beta_over_64: f64,
}

impl GapTheory {
    pub fn new(beta: f64, lambda: f64) -> Self {
        let exponent = gap_exponent(beta, lambda);
        let gamma_beta = gap_gamma(beta);
        let norm8 = sine_driver_norm_sq(beta) / 8.0;
        GapTheory {
            exponent,
            gamma_beta,
            leading: lambda.powf(gamma_beta) * exponent.exp(),
            ggap_exponent: -lambda * lambda * norm8,
            f_norm_sq_over_8: norm8,
            beta_over_64: beta / 64.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GapRecord {
    pub beta: f64,
    pub lambda: f64,
    pub k: u64,
    pub paths: usize,
    pub hits: u64,
    pub mc_estimate: f64,
    /// Wilson 95% interval.
    pub ci: (f64, f64),
    pub theory_leading: GapTheory,
}

/// Monte Carlo P(Sine_β[0, λ] ≤ k) with the asymptotic theory alongside.
pub fn gap_probability(beta: f64, lambda: f64, k: u64, paths: usize, stream: &RngStream) -> Result<GapRecord> {
    gap_probability_with(beta, lambda, k, paths, stream, &CarouselConfig::default())
}

pub fn gap_probability_with(
    beta: f64,
    lambda: f64,
    k: u64,
    paths: usize,
    stream: &RngStream,
    cfg: &CarouselConfig,
) -> Result<GapRecord> {
    Ok(gap_probabilities(beta, &[lambda], k, paths, stream, cfg)?.remove(0))
}

/// [`gap_probability_with`] for several λ on shared noise paths.
pub fn gap_probabilities(
    beta: f64,
    lambdas: &[f64],
    k: u64,
    paths: usize,
    stream: &RngStream,
    cfg: &CarouselConfig,
) -> Result<Vec<GapRecord>> {
    let counts = parallel_counts(lambdas, Driver::SineBeta(beta), cfg, paths, stream)?;
    lambdas
        .iter()
        .enumerate()
        .map(|(i, &lambda)| {
            let hits = counts.iter().filter(|c| c[i].count <= k).count() as u64;
            Ok(GapRecord {
                beta,
                lambda,
                k,
                paths,
                hits,
                mc_estimate: hits as f64 / paths as f64,
                ci: wilson_interval(hits, paths as u64, 0.95)?,
                theory_leading: GapTheory::new(beta, lambda),
            })
        })
        .collect()
}

/// Variance of the CLT limit, 2/(βπ²).
pub fn clt_variance(beta: f64) -> f64 {
    2.0 / (beta * PI * PI)
}

/// `reps` draws of (N(λ) − λ/2π)/√(log λ).
pub fn clt_statistic(beta: f64, lambda: f64, reps: usize, stream: &RngStream) -> Result<Vec<f64>> {
    clt_statistic_with(beta, lambda, reps, stream, &CarouselConfig::default())
}

pub fn clt_statistic_with(
    beta: f64,
    lambda: f64,
    reps: usize,
    stream: &RngStream,
    cfg: &CarouselConfig,
) -> Result<Vec<f64>> {
    if !(lambda > 1.0) {
        return Err(Error::invalid(format!("CLT normalization needs lambda > 1, got {lambda}")));
    }
    let counts = parallel_counts(&[lambda], Driver::SineBeta(beta), cfg, reps, stream)?;
    let norm = lambda.ln().sqrt();
    Ok(counts
        .iter()
        .map(|c| (c[0].count as f64 - lambda / TAU) / norm)
        .collect())
}

/// 4exp(−(log(2π/ε) − τ − 1)²/τ), or 1 where the bracket is negative.
pub fn repulsion_bound(tau: f64, eps: f64) -> f64 {
    let r = (TAU / eps).ln() - tau - 1.0;
    if r < 0.0 {
        1.0
    } else {
        4.0 * (-r * r / tau).exp()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SchRecord {
    pub tau: f64,
    pub lambda: f64,
    pub eps: f64,
    pub paths: usize,
    /// Sch_τ[0, λ] per path.
    pub counts: Vec<u64>,
    /// Fraction of paths with Sch_τ[0, ε] ≥ 2.
    pub repulsion_mc: f64,
    pub repulsion_ci: (f64, f64),
    pub repulsion_bound: f64,
}

pub fn sch_statistics(tau: f64, lambda: f64, eps: f64, paths: usize, stream: &RngStream) -> Result<SchRecord> {
    sch_statistics_with(tau, lambda, eps, paths, stream, 1e-3)
}

pub fn sch_statistics_with(
    tau: f64,
    lambda: f64,
    eps: f64,
    paths: usize,
    stream: &RngStream,
    dt: f64,
) -> Result<SchRecord> {
    if !(eps > 0.0) {
        return Err(Error::invalid(format!("eps must be positive, got {eps}")));
    }
    let cfg = CarouselConfig {
        dt,
        ..Default::default()
    };
    let runs = parallel_counts(&[eps, lambda], Driver::Homogeneous(tau), &cfg, paths, stream)?;
    let hits = runs.iter().filter(|r| r[0].count >= 2).count() as u64;
    Ok(SchRecord {
        tau,
        lambda,
        eps,
        paths,
        counts: runs.iter().map(|r| r[1].count).collect(),
        repulsion_mc: hits as f64 / paths as f64,
        repulsion_ci: wilson_interval(hits, paths as u64, 0.95)?,
        repulsion_bound: repulsion_bound(tau, eps),
    })
}

/// CDF of the arcsine law on [−2, 2].
pub fn arcsine_cdf(x: f64) -> f64 {
    if x <= -2.0 {
        0.0
    } else if x >= 2.0 {
        1.0
    } else {
        0.5 + (x / 2.0).asin() / PI
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EigenvectorProfile {
    /// The uniformly chosen eigenvalue.
    pub energy: f64,
    pub index: usize,
    /// |ψ_k|², total mass 1.
    pub profile: Vec<f64>,
    /// Fitted decay rate of the log-profile in rescaled time t = k/n.
    pub fitted_decay_rate: f64,
    /// Fitted peak location in [0, 1].
    pub peak: f64,
    /// σ²/(1 − E²/4)/4
    pub tau_e: f64,
    /// τ_E/2
    pub theory_rate: f64,
}

/// Fit ψ² ≈ C·exp(B(τs) − τ|s|/2), s = t − U, by maximum likelihood on block
/// increments of the log Prüfer amplitude. Returns (τ̂, Û).
fn fit_profile(psi: &[f64], energy: f64, blocks: usize) -> Result<(f64, f64)> {
    let n = psi.len();
    let s2 = 1.0 - energy * energy / 4.0;
    if !(s2 > 1e-8) {
        return Err(Error::NumericalFailure(format!("energy {energy} outside the bulk; profile fit degenerate")));
    }
    // R² is constant along free solutions at this energy
    let amp = |k: usize| (psi[k] * psi[k] + psi[k - 1] * psi[k - 1] - energy * psi[k] * psi[k - 1]) / s2;
    let m = ((n - 1) / blocks).max(1);
    let idx: Vec<usize> = (1..n).step_by(m).collect();
    if idx.len() < 3 {
        return Err(Error::NumericalFailure("profile too short to fit".into()));
    }
    let logs: Vec<f64> = idx.iter().map(|&k| amp(k).max(f64::MIN_POSITIVE).ln()).collect();
    let dt = m as f64 / n as f64;
    let x: Vec<f64> = logs.windows(2).map(|w| w[1] - w[0]).collect();
    let j = x.len() as f64;
    let a: f64 = x.iter().map(|v| v * v).sum();
    // increments ~ N(−sgn(t−U) τΔ/2, τΔ): the τ score equation has this root
    // whatever U is
    let tau = 2.0 / dt * ((1.0 + a / j).sqrt() - 1.0);
    // U maximizes −Σ sgn(t−U) x, i.e. sits at the running maximum
    let (peak_block, _) = logs
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
    let peak = idx[peak_block] as f64 / n as f64;
    if !tau.is_finite() || tau <= 0.0 {
        return Err(Error::NumericalFailure("profile fit produced no positive rate".into()));
    }
    Ok((tau, peak))
}

/// Pick a uniform eigenvalue of the critical Schrödinger matrix and fit the
/// shape of its eigenvector.
pub fn eigenvector_profile(n: usize, sigma: f64, stream: &mut RngStream) -> Result<EigenvectorProfile> {
    if n < 16 {
        return Err(Error::invalid(format!("eigenvector profile needs n >= 16, got {n}")));
    }
    let h = sample_schrodinger(n, sigma, OmegaDist::Gaussian, stream)?;
    let index = (stream.uniform() * n as f64) as usize;
    let index = index.min(n - 1);
    let energy = eigenvalue_by_index(&h.matrix, index, 1e-13)?;
    let pair = eigenvector(&h.matrix, energy, 1e-12)?;
    let profile: Vec<f64> = pair.vector.iter().map(|v| v * v).collect();
    let tau_e = sigma * sigma / (1.0 - energy * energy / 4.0) / 4.0;
    let (tau, peak) = fit_profile(&pair.vector, energy, 200)?;
    Ok(EigenvectorProfile {
        energy,
        index,
        profile,
        fitted_decay_rate: tau / 2.0,
        peak,
        tau_e,
        theory_rate: tau_e / 2.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statkit::{ks_against, mean_variance, median, Ecdf};

    #[test]
    fn infinite_beta_path_is_constant() {
        let p = hyperbolic_bm(HbmMode::SineBeta(f64::INFINITY), 0.9, 0.01, &mut RngStream::new(1, 0)).unwrap();
        assert!(p.points.iter().all(|z| *z == Complex64::new(0.0, 0.0)));
        assert!((p.times.last().unwrap() - 0.9).abs() < 1e-15);
    }

    #[test]
    fn paths_stay_in_disk() {
        let mut s = RngStream::new(2, 0);
        let p = hyperbolic_bm(HbmMode::Homogeneous, 30.0, 0.05, &mut s).unwrap();
        assert!(p.points.iter().all(|z| z.norm() < 1.0));
        assert!(hyperbolic_bm(HbmMode::SineBeta(2.0), 1.0, 0.01, &mut s).is_err());
        assert!(hyperbolic_bm(HbmMode::SineBeta(1.0), 0.5, 0.5, &mut s).is_err());
    }

    #[test]
    fn radial_drift_at_two() {
        // start on the circle q = 2 and strip the first-order noise, which is
        // 2Re(δ e^{−iφ}) at the point; the remainder estimates coth(q)/4·h
        let r = 1f64.tanh();
        let h: f64 = 0.01;
        let sd = HOMOGENEOUS_SIGMA * h.sqrt();
        let mut s = RngStream::new(3, 0);
        let mut acc = 0.0;
        let n = 100_000;
        for i in 0..n {
            let phi = TAU * i as f64 / n as f64;
            let b = Complex64::from_polar(r, phi);
            let mut probe = s.clone();
            let delta = probe.complex_normal() * sd;
            let next = hbm_step(b, sd, &mut s);
            let lin = 2.0 * (delta * Complex64::from_polar(1.0, -phi)).re;
            acc += hyperbolic_distance(next) - 2.0 - lin;
        }
        let drift = acc / (n as f64 * h);
        let want = 1.0 / 2f64.tanh() / 4.0;
        assert!((drift / want - 1.0).abs() < 0.1, "{drift} vs {want}");
    }

    /// Radial part of the log-time motion by itself: dq = dW + coth(q)/2 du,
    /// u the carousel clock. Returns P(q(u_end) ≥ q_min).
    fn radial_oracle(u_end: f64, q_min: f64, paths: usize, s: &RngStream) -> f64 {
        let du: f64 = 1e-3;
        let hits: usize = (0..paths as u64)
            .into_par_iter()
            .map(|p| {
                let mut st = s.substream(p);
                let mut q: f64 = 0.0;
                let mut u = 0.0;
                while u < u_end {
                    let step = du.min(u_end - u);
                    // reflecting at 0 where the coth drift is singular
                    let drift = if q > 1e-6 { 0.5 / q.tanh() } else { 0.0 };
                    q = (q + drift * step + step.sqrt() * st.standard_normal()).abs();
                    u += step;
                }
                usize::from(q >= q_min)
            })
            .sum();
        hits as f64 / paths as f64
    }

    #[test]
    fn sine_mode_reaches_boundary() {
        let beta = 2.0;
        let horizon = 1.0 - 1e-4;
        let paths = 4000;
        let s = RngStream::new(4, 0);
        let near: usize = (0..paths as u64)
            .into_par_iter()
            .map(|p| {
                let path = hyperbolic_bm(HbmMode::SineBeta(beta), horizon, 0.01, &mut s.substream(p)).unwrap();
                usize::from(path.last().norm() >= 0.99)
            })
            .sum();
        let frac = near as f64 / paths as f64;
        // carousel clock u = (4/β) log(1/(1−t))
        let u_end = 4.0 / beta * (1e4f64).ln();
        let want = radial_oracle(u_end, (1.99f64 / 0.01).ln(), 4000, &RngStream::new(5, 0));
        assert!((frac - want).abs() < 0.04, "{frac} vs {want}");
        assert!(frac > 0.75);
    }

    #[test]
    fn zero_lambda_counts_nothing() {
        let mut s = RngStream::new(6, 0);
        let c = carousel_count(0.0, Driver::SineBeta(2.0), 0.01, &mut s).unwrap();
        assert_eq!(c.count, 0);
        let c = carousel_count(0.0, Driver::Homogeneous(1.0), 0.01, &mut s).unwrap();
        assert_eq!(c.count, 0);
        assert!(carousel_count(-1.0, Driver::SineBeta(2.0), 0.01, &mut s).is_err());
    }

    #[test]
    fn counts_monotone_in_lambda() {
        let lambdas = [0.5, 2.0, 5.0, 5.5, 9.0, 20.0, 40.0];
        for driver in [Driver::SineBeta(1.0), Driver::SineBeta(4.0), Driver::Homogeneous(1.5)] {
            for p in 0..60 {
                let c = carousel_counts(&lambdas, driver, &CarouselConfig::default(), &mut RngStream::new(7, p)).unwrap();
                assert!(c.windows(2).all(|w| w[0].count <= w[1].count), "{driver:?} {c:?}");
            }
        }
    }

    #[test]
    fn intensity_matches_translation_invariance() {
        let lambda = 100.0;
        let runs = parallel_counts(&[lambda], Driver::SineBeta(2.0), &CarouselConfig::default(), 2000, &RngStream::new(8, 0)).unwrap();
        let xs: Vec<f64> = runs.iter().map(|r| r[0].count as f64).collect();
        let (m, _) = mean_variance(&xs);
        assert!((m / (lambda / TAU) - 1.0).abs() < 0.02, "{m}");
        assert!(runs.iter().any(|r| r[0].certified));
    }

    #[test]
    fn additive_in_mean() {
        let cfg = CarouselConfig::default();
        let s = RngStream::new(9, 0);
        let runs = parallel_counts(&[7.0, 13.0, 20.0], Driver::SineBeta(1.0), &cfg, 3000, &s).unwrap();
        let mean = |i: usize| runs.iter().map(|r| r[i].count as f64).sum::<f64>() / runs.len() as f64;
        // separate paths for each summand would be cleaner; shared paths only
        // correlate the error, the means are still unbiased
        assert!((mean(2) - mean(0) - mean(1)).abs() < 0.1);
    }

    #[test]
    fn martingale_part_obeys_gaussian_tail() {
        // fixed steps: λ small enough that dt is never cut
        let cfg = CarouselConfig {
            dt: 0.01,
            certify: false,
            ..Default::default()
        };
        let beta = 2.0;
        let lambda = 3.0;
        let t_end = 2.0;
        let k = (t_end / cfg.dt).round() as usize;
        let s = RngStream::new(10, 0);
        let xs: Vec<f64> = (0..20_000u64)
            .into_par_iter()
            .map(|p| {
                let (tr, _) = phase_trajectory(lambda, Driver::SineBeta(beta), &cfg, &mut s.substream(p)).unwrap();
                let t = tr.times[k];
                tr.alpha[k] - lambda * (1.0 - (-beta * t / 4.0).exp())
            })
            .collect();
        for a in [1.0, 2.0, 3.0, 4.0] {
            let p = xs.iter().filter(|&&x| x >= a).count() as f64 / xs.len() as f64;
            let bound = (-a * a / (8.0 * t_end)).exp();
            assert!(p <= bound + 0.01, "a={a}: {p} > {bound}");
        }
    }

    #[test]
    fn gap_theory_record() {
        for beta in [0.5, 1.0, 2.0, 4.0, 7.0] {
            let th = GapTheory::new(beta, 10.0);
            assert!((th.f_norm_sq_over_8 - th.beta_over_64).abs() < 1e-10);
        }
        assert_eq!(gap_gamma(2.0), -0.25);
        assert_eq!(gap_gamma(1.0), -0.125);
        assert_eq!(gap_gamma(4.0), -0.125);
        assert!((gap_exponent(2.0, 12.0) + 4.5).abs() < 1e-12);
    }

    fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
        let mut x = vec![0.0; m];
        let mut w = vec![0.0; m];
        for i in 0..m {
            let mut z = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
            loop {
                let (mut p0, mut p1) = (1.0, z);
                for k in 2..=m {
                    let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let dp = m as f64 * (z * p1 - p0) / (z * z - 1.0);
                let dz = p1 / dp;
                z -= dz;
                if dz.abs() < 1e-15 {
                    x[i] = z;
                    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
                    break;
                }
            }
        }
        (x, w)
    }

    /// det(I − K_sine) on an interval holding λ/2π expected points, by
    /// Nyström discretization; the exact β = 2 gap probability.
    fn sine2_gap(lambda: f64) -> f64 {
        let m = 40;
        let s = lambda / TAU;
        let (x, w) = gauss_legendre(m);
        let x: Vec<f64> = x.iter().map(|v| 0.5 * s * (v + 1.0)).collect();
        let w: Vec<f64> = w.iter().map(|v| 0.5 * s * v).collect();
        let mut a = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                let d = PI * (x[i] - x[j]);
                let k = if d == 0.0 { 1.0 } else { d.sin() / d };
                a[i * m + j] = f64::from(u8::from(i == j)) - (w[i] * w[j]).sqrt() * k;
            }
        }
        let mut det = 1.0;
        for c in 0..m {
            let p = (c..m).max_by(|&i, &j| a[i * m + c].abs().total_cmp(&a[j * m + c].abs())).unwrap();
            if p != c {
                for k in 0..m {
                    a.swap(c * m + k, p * m + k);
                }
                det = -det;
            }
            det *= a[c * m + c];
            for r in c + 1..m {
                let f = a[r * m + c] / a[c * m + c];
                for k in c..m {
                    a[r * m + k] -= f * a[c * m + k];
                }
            }
        }
        det
    }

    #[test]
    fn sine2_gap_oracle_sanity() {
        // small intervals: 1 − s + O(s⁴)
        let lambda: f64 = 0.3;
        assert!((sine2_gap(lambda) - (1.0 - lambda / TAU)).abs() < 1e-5);
        assert!((sine2_gap(8.0) - 0.074_114_961).abs() < 1e-8);
    }

    #[test]
    fn gap_probability_beta_two() {
        let lambda = 8.0;
        let want = sine2_gap(lambda);
        let rec = gap_probability(2.0, lambda, 0, 20_000, &RngStream::new(11, 0)).unwrap();
        assert!((rec.mc_estimate / want - 1.0).abs() < 0.08, "{} vs {want}", rec.mc_estimate);
        assert!(rec.ci.0 <= rec.mc_estimate && rec.mc_estimate <= rec.ci.1);
    }

    #[test]
    fn repulsion_bound_values() {
        let b = repulsion_bound(1.0, 0.1);
        let want = 4.0 * (-((20.0 * PI).ln() - 2.0).powi(2)).exp();
        assert!((b - want).abs() < 1e-15);
        assert_eq!(repulsion_bound(1.0, 10.0), 1.0);
    }

    #[test]
    fn sch_counts_and_repulsion() {
        let rec = sch_statistics(1.0, 12.0, 0.5, 4000, &RngStream::new(12, 0)).unwrap();
        let xs: Vec<f64> = rec.counts.iter().map(|&c| c as f64).collect();
        let (m, _) = mean_variance(&xs);
        assert!((m / (12.0 / TAU) - 1.0).abs() < 0.05, "{m}");
        assert!(rec.repulsion_ci.0 <= rec.repulsion_bound);
    }

    #[test]
    fn sch_gap_grows_quadratically() {
        let s = RngStream::new(13, 0);
        let cfg = CarouselConfig {
            dt: 2e-3,
            ..Default::default()
        };
        let paths = 100_000;
        let runs = parallel_counts(&[6.0, 12.0], Driver::Homogeneous(1.0), &cfg, paths, &s).unwrap();
        let hits = |i: usize| runs.iter().filter(|r| r[i].count == 0).count() as u64;
        let p6 = hits(0) as f64 / paths as f64;
        // λ = 12 gaps are too rare to estimate; use the Wilson upper end
        let (_, p12_hi) = wilson_interval(hits(1), paths as u64, 0.95).unwrap();
        let ratio = p12_hi.ln() / p6.ln();
        assert!(ratio >= 3.0, "ratio {ratio} from {p6} {p12_hi}");
    }

    #[test]
    fn clt_normalized_counts() {
        let xs = clt_statistic(2.0, 1000.0, 1000, &RngStream::new(14, 0)).unwrap();
        let (m, v) = mean_variance(&xs);
        assert!(m.abs() < 3.0 * (v / xs.len() as f64).sqrt() + 0.05, "mean {m}");
        // finite-λ variance is (log λ + 1.58)/π² per log λ at β = 2
        let want = (1000f64.ln() + 1.5772) / (PI * PI) / 1000f64.ln();
        assert!((v / want - 1.0).abs() < 0.15, "{v} vs {want}");
    }

    #[test]
    fn eigenvector_profile_shape() {
        let mut s = RngStream::new(15, 0);
        let mut energies = Vec::new();
        let mut ratios = Vec::new();
        for _ in 0..40 {
            match eigenvector_profile(1000, 1.0, &mut s) {
                Ok(p) => {
                    assert!((p.profile.iter().sum::<f64>() - 1.0).abs() < 1e-10);
                    assert!((0.0..=1.0).contains(&p.peak));
                    energies.push(p.energy);
                    ratios.push(p.fitted_decay_rate / p.theory_rate);
                }
                Err(Error::NumericalFailure(_)) => {}
                Err(e) => panic!("{e}"),
            }
        }
        assert!(energies.len() >= 35);
        let ks = ks_against(&Ecdf::new(energies).unwrap(), arcsine_cdf);
        assert!(ks < 0.25, "{ks}");
        // the log-profile drifts at the Lyapunov rate τ_E (twice the quoted
        // rate) with quadratic variation 2τ_E
        let r = median(&ratios);
        assert!((1.4..2.8).contains(&r), "median ratio {r}");
    }
}
