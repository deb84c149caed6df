//! Reproducible random primitives: streams, scalar laws, Brownian paths and an
//! Euler–Maruyama integrator that understands explosions to −∞.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A standard normal that is a pure function of `(key, counter)`.
///
/// Used for Brownian-bridge refinement, where the draw must not depend on the
/// order in which sub-intervals are visited.
pub fn counter_normal(key: u64, counter: u64) -> f64 {
    let a = splitmix64(key ^ splitmix64(counter));
    let b = splitmix64(a ^ GOLDEN);
    let u1 = ((a >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64);
    let u2 = (b >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// One independent random stream, identified by `(seed, stream_id)`.
///
/// Backed by ChaCha8 with the stream id mapped onto ChaCha's 64-bit stream
/// counter, so two streams with the same seed never overlap.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Child stream for Monte Carlo path `index`. Depends only on the parent's
    /// identity, never on how many draws the parent has made.
    pub fn substream(&self, index: u64) -> RngStream {
        let id = splitmix64(self.stream_id ^ splitmix64(index.wrapping_add(1)));
        RngStream::new(self.seed, id)
    }

    /// A 64-bit key identifying this stream, for counter-based draws.
    pub fn key(&self) -> u64 {
        splitmix64(self.seed ^ splitmix64(self.stream_id ^ 0x5EED))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// Complex normal with independent standard real and imaginary parts.
    #[inline]
    pub fn complex_normal(&mut self) -> num_complex::Complex64 {
        let re = self.standard_normal();
        let im = self.standard_normal();
        num_complex::Complex64::new(re, im)
    }

    pub(crate) fn gamma_unit_scale(&mut self, shape: f64) -> f64 {
        // shape > 0 is checked by callers
        Gamma::new(shape, 1.0)
            .expect("positive shape")
            .sample(&mut self.rng)
    }
}

/// One draw of `N(mean, variance)`.
pub fn gaussian(stream: &mut RngStream, mean: f64, variance: f64) -> Result<f64> {
    if !(variance >= 0.0) || !variance.is_finite() || !mean.is_finite() {
        return Err(Error::invalid(format!(
            "gaussian needs finite mean and variance >= 0, got ({mean}, {variance})"
        )));
    }
    if variance == 0.0 {
        return Ok(mean);
    }
    Ok(mean + variance.sqrt() * stream.standard_normal())
}

/// One draw of the χ law with `k` degrees of freedom (`k` need not be an integer).
pub fn chi(stream: &mut RngStream, k: f64) -> Result<f64> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::invalid(format!("chi needs k > 0, got {k}")));
    }
    Ok((2.0 * stream.gamma_unit_scale(0.5 * k)).sqrt())
}

/// One draw of `Beta(a, b)`.
pub fn beta_variate(stream: &mut RngStream, a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::invalid(format!(
            "beta needs positive parameters, got ({a}, {b})"
        )));
    }
    let law = Beta::new(a, b).map_err(|e| Error::invalid(e.to_string()))?;
    Ok(law.sample(&mut stream.rng))
}

/// A sampled scalar path on a time grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BrownianPath {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub diffusion_coefficient: f64,
}

impl BrownianPath {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn quadratic_variation(&self) -> f64 {
        self.values.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum()
    }
}

/// Brownian motion with variance `diffusion` per unit time, sampled on the
/// uniform grid over `[t0, t1]` with step at most `dt`.
pub fn brownian_path(
    stream: &mut RngStream,
    t0: f64,
    t1: f64,
    dt: f64,
    diffusion: f64,
    start: f64,
) -> Result<BrownianPath> {
    if !(t1 > t0) || !(dt > 0.0) || !(diffusion > 0.0) {
        return Err(Error::invalid(format!(
            "brownian_path needs t0 < t1, dt > 0, diffusion > 0 (got {t0}, {t1}, {dt}, {diffusion})"
        )));
    }
    let steps = ((t1 - t0) / dt - 1e-9).ceil().max(1.0) as usize;
    let h = (t1 - t0) / steps as f64;
    let sd = (diffusion * h).sqrt();
    let mut times = Vec::with_capacity(steps + 1);
    let mut values = Vec::with_capacity(steps + 1);
    times.push(t0);
    values.push(start);
    let mut x = start;
    for i in 1..=steps {
        x += sd * stream.standard_normal();
        times.push(if i == steps { t1 } else { t0 + i as f64 * h });
        values.push(x);
    }
    Ok(BrownianPath {
        times,
        values,
        diffusion_coefficient: diffusion,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExplosionPolicy {
    None,
    /// Circle compactification: leaving through −∞ re-enters at +∞.
    RestartFromPlusInfinity,
}

/// Tuning of the explosion-aware integrator.
#[derive(Clone, Copy, Debug)]
pub struct SdeConfig {
    /// |x| beyond which the state is treated as being at ±∞.
    pub blow_threshold: f64,
    /// Maximum number of halvings of the coarse step (2^10 = dt/1024).
    pub max_refinement: u32,
    /// Refine while |drift·h| exceeds this fraction of max(|x|, 1) (or the
    /// noise increment exceeds five times it).
    pub relative_step: f64,
    pub record_path: bool,
}

impl Default for SdeConfig {
    fn default() -> Self {
        SdeConfig {
            blow_threshold: 1e4,
            max_refinement: 10,
            relative_step: 0.1,
            record_path: true,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SdeResult {
    pub path: BrownianPath,
    pub exploded: bool,
    pub explosion_times: Vec<f64>,
    pub final_value: f64,
}

/// Euler–Maruyama stepping over one coarse interval, with Brownian-bridge
/// refinement near the blow-up region. The refinement draws are counter-based,
/// so every caller sharing `key` and the coarse increments sees the same
/// Brownian path regardless of how finely it subdivides.
#[derive(Clone, Copy, Debug)]
pub(crate) struct StepEngine {
    pub key: u64,
    pub blow: f64,
    pub max_level: u32,
    pub relative_step: f64,
    pub restart: bool,
}

impl StepEngine {
    pub(crate) fn from_config(key: u64, policy: ExplosionPolicy, config: &SdeConfig) -> Self {
        StepEngine {
            key,
            blow: config.blow_threshold,
            max_level: config.max_refinement,
            relative_step: config.relative_step,
            restart: policy == ExplosionPolicy::RestartFromPlusInfinity,
        }
    }

    /// Advances `x` from `t` to `t + h` driven by the increment `dw`. Explosion
    /// times are passed to `on_explosion`; returning `false` from it stops the
    /// integration early (the function then returns `false`).
    #[allow(clippy::too_many_arguments)]
    #[inline]
    pub(crate) fn advance<D, N, E>(
        &self,
        x: &mut f64,
        t: f64,
        h: f64,
        dw: f64,
        step: u64,
        drift: &D,
        noise: &N,
        on_explosion: &mut E,
    ) -> bool
    where
        D: Fn(f64, f64) -> f64,
        N: Fn(f64, f64) -> f64,
        E: FnMut(f64) -> bool,
    {
        self.go(x, t, h, dw, step, 0, 0, drift, noise, on_explosion)
    }

    #[allow(clippy::too_many_arguments)]
    fn go<D, N, E>(
        &self,
        x: &mut f64,
        t: f64,
        h: f64,
        dw: f64,
        step: u64,
        level: u32,
        pos: u64,
        drift: &D,
        noise: &N,
        on_explosion: &mut E,
    ) -> bool
    where
        D: Fn(f64, f64) -> f64,
        N: Fn(f64, f64) -> f64,
        E: FnMut(f64) -> bool,
    {
        let d = drift(t, *x);
        let s = noise(t, *x);
        let scale = x.abs().max(1.0);
        let tol = self.relative_step * scale;
        if level < self.max_level && ((d * h).abs() > tol || (s * dw).abs() > 5.0 * tol) {
            let counter = splitmix64(step) ^ splitmix64(((level as u64) << 40) | pos);
            let half = 0.5 * h;
            let left = 0.5 * dw + 0.5 * h.sqrt() * counter_normal(self.key, counter);
            let right = dw - left;
            if !self.go(
                x, t, half, left, step, level + 1, 2 * pos, drift, noise, on_explosion,
            ) {
                return false;
            }
            return self.go(
                x,
                t + half,
                half,
                right,
                step,
                level + 1,
                2 * pos + 1,
                drift,
                noise,
                on_explosion,
            );
        }
        *x += d * h + s * dw;
        if self.restart && (*x < -self.blow || x.is_nan()) {
            *x = self.blow;
            return on_explosion(t + h);
        }
        true
    }
}

/// Integrates `dX = drift(t, X) dt + noise(t, X) dW` on `[0, horizon]`.
///
/// Under [`ExplosionPolicy::RestartFromPlusInfinity`] the start value may be
/// `+∞`; the state re-enters at the blow-up threshold after each explosion.
#[allow(clippy::too_many_arguments)]
pub fn integrate_sde<D, N>(
    drift: D,
    noise: N,
    x0: f64,
    horizon: f64,
    dt: f64,
    policy: ExplosionPolicy,
    stream: &mut RngStream,
) -> Result<SdeResult>
where
    D: Fn(f64, f64) -> f64,
    N: Fn(f64, f64) -> f64,
{
    integrate_sde_with(drift, noise, x0, horizon, dt, policy, stream, &SdeConfig::default())
}

#[allow(clippy::too_many_arguments)]
pub fn integrate_sde_with<D, N>(
    drift: D,
    noise: N,
    x0: f64,
    horizon: f64,
    dt: f64,
    policy: ExplosionPolicy,
    stream: &mut RngStream,
    config: &SdeConfig,
) -> Result<SdeResult>
where
    D: Fn(f64, f64) -> f64,
    N: Fn(f64, f64) -> f64,
{
    if !(dt > 0.0) {
        return Err(Error::invalid(format!("dt must be positive, got {dt}")));
    }
    if !(horizon > 0.0) {
        return Err(Error::invalid(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let mut x = match (x0, policy) {
        (v, ExplosionPolicy::RestartFromPlusInfinity) if v == f64::INFINITY => {
            config.blow_threshold
        }
        (v, _) if v.is_finite() => v,
        (v, _) => return Err(Error::invalid(format!("unsupported start value {v}"))),
    };
    let engine = StepEngine::from_config(stream.key(), policy, config);
    let steps = (horizon / dt - 1e-9).ceil().max(1.0) as usize;
    let h = horizon / steps as f64;
    let sqrt_h = h.sqrt();
    let mut times = Vec::new();
    let mut values = Vec::new();
    if config.record_path {
        times.reserve(steps + 1);
        values.reserve(steps + 1);
        times.push(0.0);
        values.push(x);
    }
    let mut explosions = Vec::new();
    for i in 0..steps {
        let t = i as f64 * h;
        let dw = sqrt_h * stream.standard_normal();
        engine.advance(&mut x, t, h, dw, i as u64, &drift, &noise, &mut |te| {
            explosions.push(te);
            true
        });
        if !x.is_finite() {
            return Err(Error::NumericalFailure(format!(
                "state left the finite range at t = {}",
                t + h
            )));
        }
        if config.record_path {
            times.push(if i + 1 == steps { horizon } else { t + h });
            values.push(x);
        }
    }
    Ok(SdeResult {
        path: BrownianPath {
            times,
            values,
            diffusion_coefficient: 1.0,
        },
        exploded: !explosions.is_empty(),
        explosion_times: explosions,
        final_value: x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, v)
    }

    fn ks_against(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = xs.len() as f64;
        xs.iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn same_stream_same_draws() {
        let mut a = RngStream::new(7, 3);
        let mut b = RngStream::new(7, 3);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        let mut c = RngStream::new(7, 4);
        assert_ne!(RngStream::new(7, 3).next_u64(), c.next_u64());
    }

    #[test]
    fn substream_ignores_parent_position() {
        let a = RngStream::new(1, 0);
        let mut b = RngStream::new(1, 0);
        b.next_u64();
        assert_eq!(a.substream(5).next_u64(), b.substream(5).next_u64());
        assert_ne!(a.substream(5).next_u64(), a.substream(6).next_u64());
    }

    #[test]
    fn gaussian_degenerate_and_invalid() {
        let mut s = RngStream::new(0, 0);
        assert_eq!(gaussian(&mut s, 1.25, 0.0).unwrap(), 1.25);
        assert!(matches!(
            gaussian(&mut s, 0.0, -1.0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn gaussian_moments() {
        let mut s = RngStream::new(11, 0);
        let xs: Vec<f64> = (0..1_000_000)
            .map(|_| gaussian(&mut s, 0.0, 1.0).unwrap())
            .collect();
        let (m, v) = mean_var(&xs);
        assert!(m.abs() < 4.0 / 1000.0, "mean {m}");
        assert!((v - 1.0).abs() < 0.02, "variance {v}");
    }

    #[test]
    fn chi_second_moment_non_integer_k() {
        let mut s = RngStream::new(12, 0);
        let k = 3.7;
        let m2 = (0..1_000_000)
            .map(|_| chi(&mut s, k).unwrap().powi(2))
            .sum::<f64>()
            / 1e6;
        assert!((m2 - k).abs() / k < 0.01, "E chi^2 = {m2}");
        assert!(chi(&mut s, 0.0).is_err());
    }

    #[test]
    fn chi_four_matches_norm_of_four_normals() {
        let mut s = RngStream::new(13, 0);
        let a: Vec<f64> = (0..100_000).map(|_| chi(&mut s, 4.0).unwrap()).collect();
        // chi_4 CDF: 1 - exp(-x^2/2)(1 + x^2/2)
        let ks = ks_against(a, |x| 1.0 - (-0.5 * x * x).exp() * (1.0 + 0.5 * x * x));
        assert!(ks <= 0.01, "ks {ks}");
        // and the direct-norm construction agrees with the same closed form
        let mut s2 = RngStream::new(14, 0);
        let b: Vec<f64> = (0..100_000)
            .map(|_| {
                (0..4)
                    .map(|_| s2.standard_normal().powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        let ks = ks_against(b, |x| 1.0 - (-0.5 * x * x).exp() * (1.0 + 0.5 * x * x));
        assert!(ks <= 0.01, "ks {ks}");
    }

    #[test]
    fn chi_large_k_concentrates_at_sqrt_k() {
        let mut s = RngStream::new(15, 0);
        let k: f64 = 400.0;
        let m = (0..100_000)
            .map(|_| chi(&mut s, k).unwrap() - k.sqrt())
            .sum::<f64>()
            / 1e5;
        assert!(m.abs() < 0.05, "mean offset {m}");
    }

    #[test]
    fn beta_uniform_mean_and_tail() {
        let mut s = RngStream::new(16, 0);
        let u: Vec<f64> = (0..100_000)
            .map(|_| beta_variate(&mut s, 1.0, 1.0).unwrap())
            .collect();
        assert!(ks_against(u, |x| x.clamp(0.0, 1.0)) <= 0.01);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| beta_variate(&mut s, 1.0, 5.0).unwrap())
            .collect();
        let (m, _) = mean_var(&xs);
        assert!((m - 1.0 / 6.0).abs() / (1.0 / 6.0) < 0.02);
        let tail = (0..100_000)
            .filter(|_| beta_variate(&mut s, 1.0, 3.0).unwrap() > 0.5)
            .count() as f64
            / 1e5;
        assert!((tail - 0.125).abs() < 0.01, "tail {tail}");
        assert!(beta_variate(&mut s, 0.0, 1.0).is_err());
    }

    #[test]
    fn brownian_single_step_and_quadratic_variation() {
        let mut s = RngStream::new(17, 0);
        let p = brownian_path(&mut s, 0.0, 1.0, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(p.len(), 2);
        let p = brownian_path(&mut s, 0.0, 1.0, 1e-4, 2.5, 0.0).unwrap();
        let qv = p.quadratic_variation();
        assert!((qv - 2.5).abs() / 2.5 < 0.05, "qv {qv}");
        assert!(brownian_path(&mut s, 1.0, 0.0, 0.1, 1.0, 0.0).is_err());
    }

    #[test]
    fn brownian_endpoint_law_independent_of_step() {
        let base = RngStream::new(18, 0);
        let ends = |dt: f64| -> Vec<f64> {
            (0..10_000)
                .map(|i| {
                    let mut s = base.substream(i);
                    *brownian_path(&mut s, 0.0, 1.0, dt, 1.0, 0.0)
                        .unwrap()
                        .values
                        .last()
                        .unwrap()
                })
                .collect()
        };
        let phi = |x: f64| 0.5 * crate::statkit::erfc(-x / std::f64::consts::SQRT_2);
        assert!(ks_against(ends(0.01), phi) <= 0.02);
        assert!(ks_against(ends(0.005), phi) <= 0.02);
    }

    #[test]
    fn sde_constant_path() {
        let mut s = RngStream::new(19, 0);
        let r = integrate_sde(
            |_, _| 0.0,
            |_, _| 0.0,
            0.3,
            2.0,
            0.01,
            ExplosionPolicy::RestartFromPlusInfinity,
            &mut s,
        )
        .unwrap();
        assert!(!r.exploded);
        assert!(r.path.values.iter().all(|&v| v == 0.3));
    }

    #[test]
    fn sde_deterministic_blow_up_time() {
        // x' = -x^2, x(0) = -1 solves to -1/(1 - t), exploding at t = 1.
        let mut s = RngStream::new(20, 0);
        let r = integrate_sde(
            |_, x| -x * x,
            |_, _| 0.0,
            -1.0,
            1.5,
            1e-3,
            ExplosionPolicy::RestartFromPlusInfinity,
            &mut s,
        )
        .unwrap();
        assert!(r.exploded);
        let te = r.explosion_times[0];
        assert!((te - 1.0).abs() < 0.05, "explosion at {te}");
        assert!(r.explosion_times.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn sde_errors() {
        let mut s = RngStream::new(0, 0);
        let f = |_: f64, _: f64| 0.0;
        assert!(integrate_sde(f, f, 0.0, 1.0, 0.0, ExplosionPolicy::None, &mut s).is_err());
        assert!(integrate_sde(f, f, 0.0, -1.0, 0.1, ExplosionPolicy::None, &mut s).is_err());
    }

    #[test]
    fn riccati_noiseless_from_infinity_does_not_explode_at_zero_lambda() {
        // lambda = 0 lies below the bottom Airy eigenvalue 2.338..., so the
        // deterministic Riccati flow from +inf never reaches -inf.
        let mut s = RngStream::new(21, 0);
        let r = integrate_sde(
            |t, w| t - w * w,
            |_, _| 0.0,
            f64::INFINITY,
            20.0,
            1e-3,
            ExplosionPolicy::RestartFromPlusInfinity,
            &mut s,
        )
        .unwrap();
        assert!(!r.exploded);
        // and above the bottom eigenvalue it explodes exactly once
        let r = integrate_sde(
            |t, w| t - 3.0 - w * w,
            |_, _| 0.0,
            f64::INFINITY,
            20.0,
            1e-3,
            ExplosionPolicy::RestartFromPlusInfinity,
            &mut s,
        )
        .unwrap();
        assert_eq!(r.explosion_times.len(), 1);
    }

    #[test]
    fn explosion_count_monotone_in_horizon_and_lambda() {
        let noise = |_: f64, _: f64| 2.0f64.sqrt();
        let count = |lambda: f64, horizon: f64| {
            let mut s = RngStream::new(22, 1);
            integrate_sde(
                move |t, w| t - lambda - w * w,
                noise,
                f64::INFINITY,
                horizon,
                1e-3,
                ExplosionPolicy::RestartFromPlusInfinity,
                &mut s,
            )
            .unwrap()
            .explosion_times
            .len()
        };
        let mut prev = 0;
        for horizon in [2.0, 4.0, 6.0, 8.0] {
            let c = count(4.0, horizon);
            assert!(c >= prev);
            prev = c;
        }
        let mut prev = 0;
        for lambda in [-2.0, 0.0, 2.0, 4.0, 6.0, 8.0] {
            let c = count(lambda, 12.0);
            assert!(c >= prev, "lambda {lambda}: {c} < {prev}");
            prev = c;
        }
        assert!(prev >= 2);
    }
}
