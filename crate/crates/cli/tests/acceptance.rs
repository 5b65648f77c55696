//! End-to-end acceptance checks, one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (no libtest harness) so the report is printed
//! even when every check passes. Exits non-zero if any criterion fails.

use std::f64::consts::{LN_2, PI, SQRT_2};
use std::time::{Duration, Instant};

use anyhow::{anyhow, Result};
use ginibre_cli::{cmd_ystar, YstarArgs};
use ginibre_core::analysis::{axis_gap, complex_support, ks_distance, real_histogram, semicircle_cdf};
use ginibre_core::gasdyn::{evolve, relax, EvolveOptions, Mode, RelaxParams};
use ginibre_core::mcmc::{sample_chain, ChainOptions};
use ginibre_core::oracle::{conditional_ensemble, estimate_pnk};
use ginibre_core::potential::{grad_energy, total_energy};
use ginibre_core::ratefn::{minimum_estimate, rate_function};
use ginibre_core::rng::{stream, Domain};
use ginibre_core::*;
use rand::Rng;

/// `I` of the constrained minimiser at α = 1.
const QUARTER_LOG_2: f64 = 0.25 * LN_2;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn run(id: usize, name: &str, budget: Duration, check: impl FnOnce() -> Result<Outcome>) -> bool {
    let start = Instant::now();
    let result = check();
    let elapsed = start.elapsed();
    let (pass, detail) = match result {
        Ok(o) => (o.pass, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    let in_time = elapsed <= budget;
    let verdict = if pass && in_time { "PASS" } else { "FAIL" };
    let late = if in_time { String::new() } else { format!(" over budget of {:.0} s", budget.as_secs_f64()) };
    println!("criterion {id:>2} {verdict}  {name}: {detail} [{:.1} s{late}]", elapsed.as_secs_f64());
    pass && in_time
}

fn minutes(m: u64) -> Duration {
    Duration::from_secs(60 * m)
}

fn ystar() -> Result<Outcome> {
    let dir = std::env::temp_dir().join(format!("ginibre-acceptance-{}", std::process::id()));
    let summary = cmd_ystar(&YstarArgs { quadrature: 200, out: Some(dir.clone()) }, &dir).map_err(|e| anyhow!("{e}"))?;
    let _ = std::fs::remove_dir_all(&dir);
    let y = summary["ystar"].as_f64().unwrap_or(f64::NAN);
    Ok(outcome((y - 0.5).abs() <= 1e-6, format!("y* = {y:.10}")))
}

/// Equal-area rings of conjugate pairs, none on the axis.
fn disk(m: usize) -> Result<EmpiricalMeasure> {
    let rings = ((m as f64 / PI).sqrt().round() as usize).max(1);
    let mut upper = Vec::new();
    let mut placed = 0;
    for r in 0..rings {
        let (a, b) = (r as f64 / rings as f64, (r + 1) as f64 / rings as f64);
        let radius = ((a * a + b * b) / 2.0).sqrt();
        let share = ((b * b - a * a) * (m / 2) as f64).round() as usize;
        let count = if r + 1 == rings { m / 2 - placed } else { share.min(m / 2 - placed) };
        for j in 0..count {
            let theta = PI * (j as f64 + 0.5) / count as f64;
            upper.push((Complex64::from_polar(radius, theta), 1.0));
        }
        placed += count;
    }
    Ok(EmpiricalMeasure::from_halves(&[], &upper)?)
}

/// Midpoint quantiles of the semicircle on `[−√2, √2]`, by bisection.
fn semicircle(m: usize) -> Result<EmpiricalMeasure> {
    let atoms: Vec<(f64, f64)> = (0..m)
        .map(|i| {
            let q = (i as f64 + 0.5) / m as f64;
            let (mut lo, mut hi) = (-SQRT_2, SQRT_2);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if semicircle_cdf(mid) < q {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            (0.5 * (lo + hi), 1.0)
        })
        .collect();
    Ok(EmpiricalMeasure::from_halves(&atoms, &[])?)
}

fn anchors() -> Result<Outcome> {
    let disk = rate_function(&disk(4000)?)?;
    let semi = rate_function(&semicircle(4000)?)?;
    let pass = disk.rate_value.abs() <= 0.01 && (semi.rate_value - QUARTER_LOG_2).abs() <= 0.01;
    Ok(outcome(pass, format!("I(disk) = {:.5}, I(semicircle) = {:.5} vs {QUARTER_LOG_2:.5}", disk.rate_value, semi.rate_value)))
}

fn alpha_one_minimum() -> Result<Outcome> {
    let m = minimum_estimate(1.0, 1000, RelaxParams::default(), 1)?;
    let histogram = real_histogram(std::slice::from_ref(&m.config), 30, Some((-1.5, 1.5)))?;
    let sup = histogram.sup_distance(semicircle_cdf, 1.0);
    let value = m.report.rate_value;
    let pass = (value - QUARTER_LOG_2).abs() <= 0.015 && sup <= 0.05;
    Ok(outcome(pass, format!("I = {value:.5} ± {:.5}, density sup distance {sup:.4}", m.report.stderr)))
}

fn alpha_scan() -> Result<Outcome> {
    let alphas = [0.0, 0.25, 0.5, 0.75, 1.0];
    let mut points = Vec::new();
    for &a in &alphas {
        let m = minimum_estimate(a, 500, RelaxParams::default(), 1)?;
        points.push((m.report.rate_value, m.report.stderr));
    }
    let pass = points.windows(2).all(|p| p[1].0 >= p[0].0 - (p[0].1 + p[1].1));
    let listing: Vec<String> = alphas.iter().zip(&points).map(|(a, (v, e))| format!("{a}: {v:.4}±{e:.4}")).collect();
    Ok(outcome(pass, listing.join(", ")))
}

fn two_by_two() -> Result<Outcome> {
    let pmf = estimate_pnk(2, 1_000_000, 1)?;
    let (p, se) = (pmf.probability(2), pmf.stderr(2));
    let exact = 0.5f64.sqrt();
    let even = pmf.counts.keys().all(|k| k % 2 == 0);
    let pass = (p - exact).abs() <= 3.0 * se && even;
    Ok(outcome(pass, format!("p(2 real) = {p:.5} ± {se:.5} vs {exact:.5}, observed k {:?}", pmf.counts.keys().collect::<Vec<_>>())))
}

/// Integrated autocorrelation time by summing lags until the correlation
/// drops below 0.05.
fn autocorrelation_time(series: &[f64]) -> f64 {
    let len = series.len();
    let mean = series.iter().sum::<f64>() / len as f64;
    let var = series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / len as f64;
    let mut tau = 1.0;
    for lag in 1..len / 10 {
        let r = series.windows(lag + 1).map(|w| (w[0] - mean) * (w[lag] - mean)).sum::<f64>() / ((len - lag) as f64 * var);
        if r < 0.05 {
            break;
        }
        tau += 2.0 * r;
    }
    tau
}

fn mcmc_matches_oracle() -> Result<Outcome> {
    let reals = |e: &[SpectralConfiguration]| e.iter().flat_map(|c| c.reals().to_vec()).collect::<Vec<f64>>();
    let moduli = |e: &[SpectralConfiguration]| e.iter().flat_map(|c| c.uppers().iter().map(|z| z.norm())).collect::<Vec<f64>>();
    let mut pass = true;
    let mut parts = Vec::new();
    for k in [2, 4] {
        let oracle = conditional_ensemble(4, k, 100_000, 100_000_000, 1)?.configurations()?;
        let chain = sample_chain(4, k, ChainOptions::new(4_000_000, 20_000, 20, 1))?.samples;
        let radius: Vec<f64> = chain.iter().map(|c| c.points().iter().map(|z| z.norm_sqr()).sum()).collect();
        let ess = chain.len() as f64 / autocorrelation_time(&radius);
        let ks_real = ks_distance(&reals(&oracle), &reals(&chain));
        // k = n leaves no complex pairs to compare
        let ks_mod = (k < 4).then(|| ks_distance(&moduli(&oracle), &moduli(&chain)));
        pass &= ess >= 1e5 && oracle.len() >= 100_000 && ks_real <= 0.05 && ks_mod.is_none_or(|d| d <= 0.05);
        let modulus = ks_mod.map_or("n/a".to_string(), |d| format!("{d:.4}"));
        parts.push(format!("(4,{k}) KS real {ks_real:.4} modulus {modulus}, ESS {ess:.0}"));
    }
    Ok(outcome(pass, parts.join("; ")))
}

fn gap_and_flatness() -> Result<Outcome> {
    let n = 2000;
    let k = round_to_parity(0.5, n)?;
    let init = initial_configuration(n, k, &mut stream(1, Domain::Init, 0))?;
    let relaxed = relax(&init, RelaxParams::default())?;
    let ensemble = [relaxed.config];
    let gap = axis_gap(&ensemble)?;
    let flatness = complex_support(&ensemble, 4)?.flatness;
    Ok(outcome(gap > 0.05 && flatness <= 0.1, format!("axis gap {gap:.4}, flatness {flatness:.5}")))
}

fn conditioned_sample() -> Result<Outcome> {
    let samples = sample_chain(50, 26, ChainOptions::new(200_000, 20_000, 100, 1))?.samples;
    let counts_exact = samples.iter().all(|c| c.k() == 26 && 2 * c.l() == 24);
    let min_y = samples.iter().flat_map(|c| c.uppers().iter().map(|z| z.im)).fold(f64::INFINITY, f64::min);
    let (lo, hi) = samples
        .iter()
        .flat_map(|c| c.reals().iter().copied())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
    let pass = counts_exact && min_y > 0.02 && lo >= -1.6 && hi <= 1.6;
    Ok(outcome(
        pass,
        format!("{} samples, every one with 26 reals: {counts_exact}, min y {min_y:.4}, reals in [{lo:.3}, {hi:.3}]", samples.len()),
    ))
}

fn separated(n: usize, k: usize, rng: &mut impl Rng) -> Result<SpectralConfiguration> {
    const MIN_SEPARATION: f64 = 0.05;
    let mut points: Vec<Complex64> = Vec::new();
    let far =
        |z: Complex64, pts: &[Complex64]| pts.iter().all(|p| (z - p).norm() >= MIN_SEPARATION && (z - p.conj()).norm() >= MIN_SEPARATION);
    let (mut reals, mut uppers) = (Vec::new(), Vec::new());
    while reals.len() < k {
        let z = Complex64::new(rng.random_range(-1.5..1.5), 0.0);
        if far(z, &points) {
            points.push(z);
            reals.push(z.re);
        }
    }
    while uppers.len() < (n - k) / 2 {
        let z = Complex64::new(rng.random_range(-1.5..1.5), rng.random_range(0.5 * MIN_SEPARATION..1.5));
        if far(z, &points) {
            points.push(z);
            uppers.push(z);
        }
    }
    Ok(make_configuration(reals, uppers)?)
}

fn gradient() -> Result<Outcome> {
    let h = 1e-5;
    let mut rng = stream(7, Domain::Misc, 0);
    let mut worst: f64 = 0.0;
    let energy = |r: &[f64], u: &[Complex64]| -> Result<f64> { Ok(total_energy(&make_configuration(r.to_vec(), u.to_vec())?)?.total) };
    for _ in 0..100 {
        let n = rng.random_range(2..=40usize);
        let k = (rng.random_range(0..=n / 2) * 2 + n % 2).min(n);
        let c = separated(n, k, &mut rng)?;
        let g = grad_energy(&c)?;
        let scale = g.reals.iter().map(|v| v.abs()).chain(g.uppers.iter().map(|v| v.norm())).fold(f64::MIN_POSITIVE, f64::max);
        let (r, u) = (c.reals().to_vec(), c.uppers().to_vec());
        for a in 0..r.len() {
            let (mut rp, mut rm) = (r.clone(), r.clone());
            rp[a] += h;
            rm[a] -= h;
            let fd = (energy(&rp, &u)? - energy(&rm, &u)?) / (2.0 * h);
            worst = worst.max((g.reals[a] - fd).abs() / scale);
        }
        for b in 0..u.len() {
            for (dir, analytic) in [(Complex64::new(h, 0.0), g.uppers[b].re), (Complex64::new(0.0, h), g.uppers[b].im)] {
                let (mut up, mut um) = (u.clone(), u.clone());
                up[b] += dir;
                um[b] -= dir;
                let fd = (energy(&r, &up)? - energy(&r, &um)?) / (2.0 * h);
                worst = worst.max((analytic - fd).abs() / scale);
            }
        }
    }
    Ok(outcome(worst < 1e-6, format!("worst relative error {worst:.2e} over 100 configurations")))
}

fn stress() -> Result<Outcome> {
    let n = 200;
    let steps = 1_000_000;
    let mut trips = 0;
    let mut runs = 0;
    for (seed, alpha) in [(1u64, 0.0), (2, 0.25), (3, 0.5), (4, 0.75), (5, 1.0)] {
        let k = round_to_parity(alpha, n)?;
        let init = initial_configuration(n, k, &mut stream(seed, Domain::Init, 0))?;
        for (mode, sigma) in [(Mode::Deterministic, 0.0), (Mode::Stochastic, SQRT_2)] {
            let params = GasParams::new(n, k, sigma, 0.05, steps, seed)?;
            let traj = evolve(&init, &params, EvolveOptions::new(mode).stride(steps).keep(false), |_| {})?;
            trips += traj.guard_trips;
            runs += 1;
        }
    }
    Ok(outcome(trips == 0, format!("{runs} runs of {steps} steps at n = {n}, {trips} guard trips")))
}

fn main() {
    // libtest flags such as --list or a name filter are not meaningful here
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let results = [
        run(1, "y* equation", Duration::from_secs(1), ystar),
        run(2, "rate function anchors", Duration::from_secs(60), anchors),
        run(3, "constrained minimum at alpha = 1", minutes(10), alpha_one_minimum),
        run(4, "monotone alpha scan", minutes(45), alpha_scan),
        run(5, "two-by-two real count", minutes(2), two_by_two),
        run(6, "MCMC against rejection oracle", minutes(20), mcmc_matches_oracle),
        run(7, "axis gap and flat density", minutes(15), gap_and_flatness),
        run(8, "conditioned n = 50, k = 26 sample", minutes(10), conditioned_sample),
        run(9, "gradient against central differences", minutes(1), gradient),
        run(10, "no-collision stress", minutes(30), stress),
    ];
    let failed = results.iter().filter(|&&p| !p).count();
    println!("acceptance: {} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
