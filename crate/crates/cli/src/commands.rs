use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde_json::json;

use rmtlab::airy::{riccati_tw_cdf_with, tw_pde_solve, Boundary, PdeGrid, RiccatiConfig};
use rmtlab::carousel::{
    clt_statistic_with, clt_variance, eigenvector_profile, gap_probabilities, parallel_counts, sch_statistics_with,
    CarouselConfig, Driver,
};
use rmtlab::ensembles::{
    householder_tridiagonalize, sample_beta_hermite, sample_circular_beta, sample_goe, sample_nested_jacobi,
    sample_schrodinger, OmegaDist, SymTridiagonal, VerblunskyCoeffs,
};
use rmtlab::io::{self, Cell, Manifest, Table};
use rmtlab::painleve::{deformed_tw, tw2_cdf, tw2_cdf_clamped};
use rmtlab::statkit::{mean_variance, median, wilson_interval, CdfMeta, CdfTable};
use rmtlab::stochastics::RngStream;
use rmtlab::szego::{b_path, dirac_spectrum_check, eigenangles};
use rmtlab::tridiag::{eigenvalues, semicircle_diagnostics, spectral_measure};
use rmtlab::verify::{run_suite, Scale, CRITERIA};
use rmtlab::{Error, Result};

use crate::RunOutput;

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("--{name} must be positive and finite, got {x}")))
    }
}

fn at_least_one(name: &str, n: usize) -> Result<()> {
    if n >= 1 {
        Ok(())
    } else {
        Err(invalid(format!("--{name} must be at least 1")))
    }
}

/// `a:b:step` (inclusive) or a comma-separated list.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let num = |s: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| invalid(format!("bad number '{s}' in grid '{spec}'")))
    };
    let parts: Vec<&str> = spec.split(':').collect();
    let grid = match parts.as_slice() {
        [a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if !(step > 0.0) || b < a {
                return Err(invalid(format!("grid '{spec}' needs start <= end and step > 0")));
            }
            let count = ((b - a) / step + 1e-9).floor() as usize + 1;
            if count > 100_000 {
                return Err(invalid(format!("grid '{spec}' has more than 1e5 points")));
            }
            (0..count).map(|i| a + i as f64 * step).collect()
        }
        [list] => list.split(',').map(num).collect::<Result<Vec<f64>>>()?,
        _ => return Err(invalid(format!("grid '{spec}' must be a:b:step or a list"))),
    };
    if grid.is_empty() || grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(invalid(format!("grid '{spec}' must be nonempty and increasing")));
    }
    Ok(grid)
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq)]
pub enum Model {
    BetaHermite,
    NestedJacobi,
    Goe,
    Circular,
    Schrodinger,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[arg(long, value_enum, default_value_t = Model::BetaHermite)]
    model: Model,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    /// Mean shift μ of the GOE model.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    spike: f64,
    /// Disorder strength of the Schrödinger model.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value = "gaussian")]
    omega: String,
}

enum Draw {
    Jacobi(SymTridiagonal),
    Circle(VerblunskyCoeffs),
}

fn draw(a: &SampleArgs, seed: u64) -> Result<Draw> {
    at_least_one("n", a.n)?;
    let mut s = RngStream::new(seed, 0);
    Ok(match a.model {
        Model::BetaHermite => Draw::Jacobi(sample_beta_hermite(a.n, a.beta, &mut s)?),
        Model::NestedJacobi => Draw::Jacobi(sample_nested_jacobi(a.n, a.beta, &mut s)?),
        Model::Goe => Draw::Jacobi(householder_tridiagonalize(&sample_goe(a.n, a.spike, &mut s)?)?),
        Model::Circular => Draw::Circle(sample_circular_beta(a.n, a.beta, &mut s)?),
        Model::Schrodinger => {
            let omega: OmegaDist = a.omega.parse()?;
            Draw::Jacobi(sample_schrodinger(a.n, a.sigma, omega, &mut s)?.matrix)
        }
    })
}

fn sample_params(a: &SampleArgs) -> serde_json::Value {
    json!({"model": format!("{:?}", a.model), "n": a.n, "beta": a.beta, "spike": a.spike,
           "sigma": a.sigma, "omega": a.omega})
}

pub fn sample(a: &SampleArgs, seed: u64) -> Result<RunOutput> {
    let table = match draw(a, seed)? {
        Draw::Jacobi(t) => io::tridiagonal_table(&t),
        Draw::Circle(alpha) => io::verblunsky_table(&alpha),
    };
    Ok(RunOutput {
        tables: vec![table],
        parameters: sample_params(a),
        headline: None,
        passed: None,
    })
}

pub fn spectrum(a: &SampleArgs, seed: u64) -> Result<RunOutput> {
    let (tables, headline) = match draw(a, seed)? {
        Draw::Jacobi(t) => {
            let mu = spectral_measure(&t, 1e-12)?;
            let headline = if a.model == Model::BetaHermite {
                let d = semicircle_diagnostics(&eigenvalues(&t, 1e-12)?)?;
                Some(("semicircle_ks".to_string(), d.ks_distance))
            } else {
                None
            };
            (vec![io::measure_table(&mu)], headline)
        }
        Draw::Circle(alpha) => {
            let ang = eigenangles(&alpha, 1e-12)?;
            (vec![io::values_table("eigenangles", "angle", &ang)], None)
        }
    };
    Ok(RunOutput {
        tables,
        parameters: sample_params(a),
        headline,
        passed: None,
    })
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq)]
pub enum TwMethod {
    Riccati,
    Painleve,
    Pde,
}

#[derive(Args, Debug)]
pub struct TwArgs {
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    #[arg(long, value_enum, default_value_t = TwMethod::Riccati)]
    method: TwMethod,
    #[arg(long, default_value_t = 10_000)]
    paths: usize,
    /// a:b:step or a comma list.
    #[arg(long, default_value = "-5:2:0.25", allow_hyphen_values = true)]
    grid: String,
    /// Riccati time step.
    #[arg(long, default_value_t = 0.001)]
    dt: f64,
}

fn pde_column(beta: f64, grid: &[f64], w: f64) -> Result<Vec<f64>> {
    let t_max = grid[grid.len() - 1].max(8.0);
    let mut g = PdeGrid {
        t_min: grid[0],
        t_max,
        w_min: (-6.0f64).min(w - 1.0),
        w_max: 6.0f64.max(t_max.sqrt() + 1.0).max(w),
        dw: 0.05,
        dt: 0.0,
        store_every: 1,
    };
    g.dt = g.stable_dt(beta);
    let table = tw_pde_solve(beta, &g)?;
    let w = w.min(g.w_max);
    let mut out = grid.iter().map(|&t| table.eval(t, w)).collect::<Result<Vec<_>>>()?;
    // scheme noise below the 1e-12 level can break monotonicity in t
    for i in 1..out.len() {
        out[i] = out[i].max(out[i - 1]);
    }
    Ok(out)
}

fn sup_dev(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn cdf_run(
    beta: f64,
    boundary: Boundary,
    method: &str,
    grid: &[f64],
    paths: usize,
    dt: f64,
    seed: u64,
) -> Result<CdfTable> {
    let cfg = RiccatiConfig { dt, ..Default::default() };
    riccati_tw_cdf_with(beta, boundary, grid, paths, &RngStream::new(seed, 0), &cfg).map(|mut t| {
        t.meta.method = method.to_string();
        t
    })
}

pub fn tw(a: &TwArgs, seed: u64) -> Result<RunOutput> {
    positive("beta", a.beta)?;
    positive("dt", a.dt)?;
    at_least_one("paths", a.paths)?;
    let grid = parse_grid(&a.grid)?;
    let meta = |method: &str| CdfMeta {
        beta: Some(a.beta),
        w: None,
        method: method.to_string(),
        ..Default::default()
    };
    let table = match a.method {
        TwMethod::Riccati => cdf_run(a.beta, Boundary::Dirichlet, "riccati", &grid, a.paths, a.dt, seed)?,
        TwMethod::Painleve => {
            if a.beta != 2.0 {
                return Err(invalid("the Painlevé formula is for beta = 2"));
            }
            let v = grid.iter().map(|&t| tw2_cdf(t)).collect::<Result<Vec<_>>>()?;
            CdfTable::new(grid.clone(), v, meta("painleve"))?
        }
        TwMethod::Pde => CdfTable::new(grid.clone(), pde_column(a.beta, &grid, f64::INFINITY)?, meta("pde"))?,
    };
    let headline = (a.beta == 2.0 && a.method != TwMethod::Painleve).then(|| {
        let exact: Vec<f64> = grid.iter().map(|&t| tw2_cdf_clamped(t)).collect();
        ("sup_dev_vs_painleve".to_string(), sup_dev(&table.values, &exact))
    });
    Ok(RunOutput {
        tables: vec![io::cdf_table(&table)],
        parameters: json!({"beta": a.beta, "method": format!("{:?}", a.method), "paths": a.paths,
                           "grid": a.grid, "dt": a.dt}),
        headline,
        passed: None,
    })
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq)]
pub enum SpikedMethod {
    Riccati,
    Lax,
    Pde,
}

#[derive(Args, Debug)]
pub struct SpikedArgs {
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    /// Boundary parameter f'(0) = w f(0).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    w: f64,
    #[arg(long, value_enum, default_value_t = SpikedMethod::Riccati)]
    method: SpikedMethod,
    #[arg(long, default_value_t = 10_000)]
    paths: usize,
    #[arg(long, default_value = "-5:2:0.25", allow_hyphen_values = true)]
    grid: String,
    #[arg(long, default_value_t = 0.002)]
    dt: f64,
}

pub fn spiked_tw(a: &SpikedArgs, seed: u64) -> Result<RunOutput> {
    positive("beta", a.beta)?;
    positive("dt", a.dt)?;
    at_least_one("paths", a.paths)?;
    if !a.w.is_finite() {
        return Err(invalid("--w must be finite"));
    }
    let grid = parse_grid(&a.grid)?;
    let meta = |method: &str| CdfMeta {
        beta: Some(a.beta),
        w: Some(a.w),
        method: method.to_string(),
        ..Default::default()
    };
    let lax = || grid.iter().map(|&t| deformed_tw(t, a.w)).collect::<Result<Vec<_>>>();
    let table = match a.method {
        SpikedMethod::Riccati => cdf_run(a.beta, Boundary::Robin(a.w), "riccati", &grid, a.paths, a.dt, seed)?,
        SpikedMethod::Lax => {
            if a.beta != 2.0 {
                return Err(invalid("the Lax-pair formula is for beta = 2"));
            }
            let mut v = lax()?;
            for i in 1..v.len() {
                v[i] = v[i].max(v[i - 1]);
            }
            CdfTable::new(grid.clone(), v, meta("lax"))?
        }
        SpikedMethod::Pde => CdfTable::new(grid.clone(), pde_column(a.beta, &grid, a.w)?, meta("pde"))?,
    };
    let headline = if a.beta == 2.0 && a.method != SpikedMethod::Lax {
        Some(("sup_dev_vs_lax".to_string(), sup_dev(&table.values, &lax()?)))
    } else {
        None
    };
    Ok(RunOutput {
        tables: vec![io::cdf_table(&table)],
        parameters: json!({"beta": a.beta, "w": a.w, "method": format!("{:?}", a.method),
                           "paths": a.paths, "grid": a.grid, "dt": a.dt}),
        headline,
        passed: None,
    })
}

#[derive(Args, Debug)]
pub struct SineArgs {
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    /// Interval lengths, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "100")]
    lambda: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    paths: usize,
    #[arg(long, default_value_t = 0.005)]
    dt: f64,
}

pub fn sine(a: &SineArgs, seed: u64) -> Result<RunOutput> {
    positive("beta", a.beta)?;
    positive("dt", a.dt)?;
    at_least_one("paths", a.paths)?;
    let cfg = CarouselConfig {
        dt: a.dt,
        ..Default::default()
    };
    let counts = parallel_counts(&a.lambda, Driver::SineBeta(a.beta), &cfg, a.paths, &RngStream::new(seed, 0))?;
    let mean = counts.iter().map(|c| c[0].count as f64).sum::<f64>() / a.paths as f64;
    let ratio = mean / (a.lambda[0] / std::f64::consts::TAU);
    Ok(RunOutput {
        tables: vec![io::counts_table(&counts)],
        parameters: json!({"beta": a.beta, "lambda": a.lambda, "paths": a.paths, "dt": a.dt}),
        headline: Some(("mean_count_over_intensity".to_string(), ratio)),
        passed: None,
    })
}

#[derive(Args, Debug)]
pub struct GapArgs {
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    #[arg(long, value_delimiter = ',', default_value = "8,12")]
    lambda: Vec<f64>,
    /// Count at most k points.
    #[arg(long, default_value_t = 0)]
    k: u64,
    #[arg(long, default_value_t = 10_000)]
    paths: usize,
    #[arg(long, default_value_t = 0.005)]
    dt: f64,
}

pub fn gap(a: &GapArgs, seed: u64) -> Result<RunOutput> {
    positive("beta", a.beta)?;
    positive("dt", a.dt)?;
    at_least_one("paths", a.paths)?;
    let cfg = CarouselConfig {
        dt: a.dt,
        ..Default::default()
    };
    let recs = gap_probabilities(a.beta, &a.lambda, a.k, a.paths, &RngStream::new(seed, 0), &cfg)?;
    let last = &recs[recs.len() - 1];
    let ratio = -last.mc_estimate.ln() / (a.beta * last.lambda * last.lambda / 64.0);
    Ok(RunOutput {
        tables: vec![io::gap_table(&recs)],
        parameters: json!({"beta": a.beta, "lambda": a.lambda, "k": a.k, "paths": a.paths, "dt": a.dt}),
        headline: Some(("neg_log_p_over_leading_rate".to_string(), ratio)),
        passed: None,
    })
}

#[derive(Args, Debug)]
pub struct CltArgs {
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    #[arg(long, default_value_t = 10_000.0)]
    lambda: f64,
    #[arg(long, default_value_t = 500)]
    reps: usize,
    #[arg(long, default_value_t = 0.005)]
    dt: f64,
}

pub fn clt(a: &CltArgs, seed: u64) -> Result<RunOutput> {
    positive("beta", a.beta)?;
    positive("dt", a.dt)?;
    at_least_one("reps", a.reps)?;
    let cfg = CarouselConfig {
        dt: a.dt,
        ..Default::default()
    };
    let stats = clt_statistic_with(a.beta, a.lambda, a.reps, &RngStream::new(seed, 0), &cfg)?;
    let (_, var) = mean_variance(&stats);
    Ok(RunOutput {
        tables: vec![io::values_table("clt", "statistic", &stats)],
        parameters: json!({"beta": a.beta, "lambda": a.lambda, "reps": a.reps, "dt": a.dt}),
        headline: Some(("variance_over_theory".to_string(), var / clt_variance(a.beta))),
        passed: None,
    })
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq)]
pub enum SchMode {
    Carousel,
    Eigenvector,
}

#[derive(Args, Debug)]
pub struct SchArgs {
    #[arg(long, value_enum, default_value_t = SchMode::Carousel)]
    mode: SchMode,
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    #[arg(long, default_value_t = 6.0)]
    lambda: f64,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value_t = 10_000)]
    paths: usize,
    #[arg(long, default_value_t = 0.001)]
    dt: f64,
    /// Matrix size for eigenvector mode.
    #[arg(long, default_value_t = 2000)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
}

pub fn schrodinger(a: &SchArgs, seed: u64) -> Result<RunOutput> {
    at_least_one("paths", a.paths)?;
    let stream = RngStream::new(seed, 0);
    match a.mode {
        SchMode::Carousel => {
            positive("tau", a.tau)?;
            positive("dt", a.dt)?;
            let rec = sch_statistics_with(a.tau, a.lambda, a.eps, a.paths, &stream, a.dt)?;
            let mut rep = Table::new("repulsion", vec!["eps", "p_mc", "ci_lo", "ci_hi", "bound"]);
            rep.push(vec![
                a.eps.into(),
                rec.repulsion_mc.into(),
                rec.repulsion_ci.0.into(),
                rec.repulsion_ci.1.into(),
                rec.repulsion_bound.into(),
            ]);
            let gaps = rec.counts.iter().filter(|&&c| c == 0).count() as u64;
            let (lo, hi) = wilson_interval(gaps, a.paths as u64, 0.95)?;
            rep.push(vec![Cell::Empty, (gaps as f64 / a.paths as f64).into(), lo.into(), hi.into(), Cell::Empty]);
            Ok(RunOutput {
                tables: vec![io::count_histogram(&rec.counts), rep],
                parameters: json!({"mode": "carousel", "tau": a.tau, "lambda": a.lambda, "eps": a.eps,
                                   "paths": a.paths, "dt": a.dt}),
                headline: Some(("repulsion_p".to_string(), rec.repulsion_mc)),
                passed: Some(rec.repulsion_ci.0 <= rec.repulsion_bound),
            })
        }
        SchMode::Eigenvector => {
            let mut tab = Table::new(
                "eigenvector_fits",
                vec!["draw", "energy", "fitted_rate", "theory_rate", "peak"],
            );
            let mut ratios = Vec::new();
            for p in 0..a.paths as u64 {
                match eigenvector_profile(a.n, a.sigma, &mut stream.substream(p)) {
                    Ok(f) => {
                        ratios.push(f.fitted_decay_rate / f.theory_rate);
                        tab.push(vec![
                            p.into(),
                            f.energy.into(),
                            f.fitted_decay_rate.into(),
                            f.theory_rate.into(),
                            f.peak.into(),
                        ]);
                    }
                    Err(Error::NumericalFailure(_)) => {}
                    Err(e) => return Err(e),
                }
            }
            Ok(RunOutput {
                tables: vec![tab],
                parameters: json!({"mode": "eigenvector", "n": a.n, "sigma": a.sigma, "draws": a.paths}),
                headline: Some(("median_rate_ratio".to_string(), median(&ratios))),
                passed: None,
            })
        }
    }
}

#[derive(Args, Debug)]
pub struct SzegoArgs {
    #[arg(long, default_value_t = 6)]
    n: usize,
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

pub fn szego_check(a: &SzegoArgs, seed: u64) -> Result<RunOutput> {
    at_least_one("n", a.n)?;
    positive("tol", a.tol)?;
    let alpha = sample_circular_beta(a.n, a.beta, &mut RngStream::new(seed, 0))?;
    let angles = eigenangles(&alpha, 1e-13)?;
    let path = b_path(&alpha)?;
    let lambdas: Vec<f64> = angles.iter().map(|t| a.n as f64 * t).collect();
    let report = dirac_spectrum_check(&path, a.n, &lambdas, a.tol)?;
    Ok(RunOutput {
        tables: vec![
            io::dirac_table(&report),
            io::verblunsky_table(&alpha),
            io::values_table("eigenangles", "angle", &angles),
            io::bpath_table(&path),
        ],
        parameters: json!({"n": a.n, "beta": a.beta, "tol": a.tol}),
        headline: Some(("worst_defect".to_string(), report.worst_defect)),
        passed: Some(report.passed),
    })
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq)]
pub enum Suite {
    /// Full sample sizes.
    Acceptance,
    /// Reduced sample sizes.
    Quick,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::Acceptance)]
    suite: Suite,
    /// Criterion ids to run, comma separated (default all).
    #[arg(long, value_delimiter = ',')]
    criteria: Vec<u32>,
}

pub fn verify(a: &VerifyArgs, seed: u64) -> Result<RunOutput> {
    let ids: Vec<u32> = if a.criteria.is_empty() {
        CRITERIA.iter().map(|c| c.0).collect()
    } else {
        a.criteria.clone()
    };
    if let Some(bad) = ids.iter().find(|id| !CRITERIA.iter().any(|c| c.0 == **id)) {
        return Err(invalid(format!("unknown criterion {bad}")));
    }
    let scale = match a.suite {
        Suite::Acceptance => Scale::Full,
        Suite::Quick => Scale::Quick,
    };
    let results = run_suite(&ids, scale, seed, |r| println!("{}", r.line()));
    let mut tab = Table::new("verify", vec!["id", "name", "passed", "wall_time_s", "detail"]);
    for r in &results {
        tab.push(vec![
            (r.id as usize).into(),
            r.name.as_str().into(),
            r.passed.into(),
            r.wall_time_s.into(),
            r.detail.as_str().into(),
        ]);
    }
    let passed = results.iter().filter(|r| r.passed).count();
    Ok(RunOutput {
        tables: vec![tab],
        parameters: json!({"suite": format!("{:?}", a.suite), "criteria": ids,
                           "results": serde_json::to_value(&results).unwrap_or_default()}),
        headline: Some(("criteria_passed".to_string(), passed as f64)),
        passed: Some(passed == results.len()),
    })
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Manifest files, or directories searched for *.json manifests.
    manifests: Vec<PathBuf>,
}

fn collect_manifests(paths: &[PathBuf]) -> Result<Vec<Manifest>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut entries: Vec<PathBuf> = std::fs::read_dir(p)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|q| q.extension().is_some_and(|x| x == "json") && !q.to_string_lossy().ends_with(".data.json"))
                .collect();
            entries.sort();
            for q in entries {
                out.push(io::read_manifest(&q).map_err(|e| Error::Io(format!("{}: {e}", q.display())))?);
            }
        } else {
            out.push(io::read_manifest(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?);
        }
    }
    Ok(out)
}

pub fn report_table(manifests: &mut [Manifest]) -> Table {
    manifests.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
    let mut tab = Table::new("report", vec!["timestamp", "command", "seed", "headline", "value", "passed"]);
    for m in manifests.iter() {
        let (h, v) = m
            .headline
            .as_ref()
            .map_or((Cell::Empty, Cell::Empty), |(h, v)| (h.as_str().into(), (*v).into()));
        let passed = m.passed.map_or(Cell::Empty, |p| if p { "pass" } else { "fail" }.into());
        tab.push(vec![
            m.timestamp.into(),
            m.command.as_str().into(),
            Cell::Text(m.seed.to_string()),
            h,
            v,
            passed,
        ]);
    }
    tab
}

pub fn report(a: &ReportArgs) -> Result<()> {
    let mut manifests = collect_manifests(&a.manifests)?;
    report_table(&mut manifests).write_csv(std::io::stdout().lock())
}
