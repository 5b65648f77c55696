//! The rate functional
//! `I[μ] = ½(∫|z|² dμ − ∫∫ log|z − w| dμ(z) dμ(w)) − 3/8`
//! on discrete measures, its constrained minimum by gas relaxation, the
//! pair-height equation for `y*`, variational residuals and the
//! next-order energy expansion.
//!
//! The discrete double integral runs over ordered pairs `i ≠ j`. Dropping
//! the diagonal leaves an `O(log N / N)` self-energy bias, which is reported
//! rather than corrected.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{initial_configuration, round_to_parity, SpectralConfiguration};
use crate::error::{Error, Result};
use crate::gasdyn::{relax, RelaxParams};
use crate::measure::{to_measure, EmpiricalMeasure};
use crate::rng::{stream, Domain};
use crate::sum::{compensated_sum, Neumaier};

/// The constant `K` making the unconstrained minimum zero.
pub const K: f64 = 3.0 / 8.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    /// On-axis mass of the evaluated measure.
    pub alpha: f64,
    pub rate_value: f64,
    /// Discretisation error bar; zero for a plain evaluation.
    pub stderr: f64,
    pub self_energy_excluded: bool,
    pub n_atoms: usize,
}

/// `I[μ]` with weights renormalised to total mass one.
pub fn rate_function(measure: &EmpiricalMeasure) -> Result<RateReport> {
    let atoms = measure.atoms();
    if atoms.len() < 2 {
        return Err(Error::Degenerate(format!("rate function needs at least two atoms, got {}", atoms.len())));
    }
    let total = measure.total_mass();
    let w: Vec<f64> = atoms.iter().map(|a| a.weight / total).collect();
    let z: Vec<Complex64> = atoms.iter().map(|a| a.point).collect();

    let second: f64 = compensated_sum(&z.iter().zip(&w).map(|(p, wi)| wi * p.norm_sqr()).collect::<Vec<_>>());
    // one partial sum per row over j > i, reduced in row order
    let rows: Vec<Option<f64>> = (0..z.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = Neumaier::new();
            for j in i + 1..z.len() {
                let d2 = (z[i] - z[j]).norm_sqr();
                if d2 == 0.0 {
                    return None;
                }
                acc.add(w[j] * d2.ln());
            }
            Some(w[i] * acc.value())
        })
        .collect();
    let mut log_sum = Neumaier::new();
    for (i, r) in rows.into_iter().enumerate() {
        match r {
            Some(v) => log_sum.add(v),
            None => return Err(Error::Degenerate(format!("atom {i} coincides with a later atom"))),
        }
    }
    // Σ_{i≠j} w_i w_j log|z_i − z_j| = 2 Σ_{i<j} w_i w_j · ½ log|z_i − z_j|²
    let interaction = log_sum.value();
    Ok(RateReport {
        alpha: measure.on_axis_mass() / total,
        rate_value: 0.5 * (second - interaction) - K,
        stderr: 0.0,
        self_energy_excluded: true,
        n_atoms: atoms.len(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimumEstimate {
    /// Value at `n_particles`, with the Richardson error bar in `stderr`.
    pub report: RateReport,
    /// Value at `n_particles / 2`.
    pub coarse_value: f64,
    /// The relaxed configuration at `n_particles`.
    pub config: SpectralConfiguration,
    pub relax_steps: usize,
}

fn relaxed_rate(alpha: f64, n: usize, relax_params: RelaxParams, seed: u64) -> Result<(RateReport, SpectralConfiguration, usize)> {
    let k = round_to_parity(alpha, n)?;
    let init = initial_configuration(n, k, &mut stream(seed, Domain::Init, n as u64))?;
    let relaxed = relax(&init, relax_params)?;
    let report = rate_function(&to_measure(&relaxed.config))?;
    Ok((report, relaxed.config, relaxed.steps))
}

/// `I[μ_α]` from zero-temperature relaxations at `n_particles` and
/// `n_particles / 2`. The reported value is the finer one; the error bar
/// is the difference between the two.
pub fn minimum_estimate(alpha: f64, n_particles: usize, relax_params: RelaxParams, seed: u64) -> Result<MinimumEstimate> {
    if n_particles < 4 {
        return Err(Error::InvalidParameter(format!("n_particles = {n_particles} is too small")));
    }
    let (fine, coarse) =
        rayon::join(|| relaxed_rate(alpha, n_particles, relax_params, seed), || relaxed_rate(alpha, n_particles / 2, relax_params, seed));
    let (mut report, config, relax_steps) = fine?;
    let coarse_value = coarse?.0.rate_value;
    report.stderr = (report.rate_value - coarse_value).abs();
    Ok(MinimumEstimate { report, coarse_value, config, relax_steps })
}

/// The leading-order prediction `log p ≈ −n² I`.
pub fn log_pnk_asymptotic(alpha: f64, n: usize, rate_value: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must lie in [0, 1]")));
    }
    let nf = n as f64;
    Ok(-nf * nf * rate_value)
}

/// Scan results as CSV `alpha,I,stderr,n_atoms`.
pub fn write_reports_csv<W: Write>(reports: &[RateReport], mut w: W) -> Result<()> {
    writeln!(w, "alpha,I,stderr,n_atoms")?;
    for r in reports {
        writeln!(w, "{},{},{},{}", r.alpha, r.rate_value, r.stderr, r.n_atoms)?;
    }
    Ok(())
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    let mf = m as f64;
    for i in 0..m.div_ceil(2) {
        let mut t = (PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for j in 2..=m {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * t * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            if m == 1 {
                p0 = 1.0;
                p1 = t;
            }
            dp = mf * (t * p1 - p0) / (t * t - 1.0);
            let dt = p1 / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -t;
        x[m - 1 - i] = t;
        w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
        w[m - 1 - i] = w[i];
    }
    (x, w)
}

/// `∫ dμ_sc(x) / (x² + y²)` for the semicircle on `[−√2, √2]`, with
/// `x = √2 sin θ` so the density folds into a smooth integrand.
pub fn semicircle_pair_integral(y: f64, quadrature_points: usize) -> f64 {
    let (x, w) = gauss_legendre(quadrature_points);
    let half = 0.5 * PI;
    let terms: Vec<f64> = x
        .iter()
        .zip(&w)
        .map(|(&u, &wi)| {
            let th = half * u;
            let (s, c) = th.sin_cos();
            wi * half * 2.0 * c * c / (PI * (2.0 * s * s + y * y))
        })
        .collect();
    compensated_sum(&terms)
}

/// Height of a lone conjugate pair above the semicircle: the root of
/// `∫ dμ_sc / (x² + y²) = 2`, by bisection on `[0.01, 2]`.
pub fn solve_ystar(quadrature_points: usize) -> Result<f64> {
    if quadrature_points < 100 {
        return Err(Error::InvalidParameter(format!("{quadrature_points} quadrature points; at least 100 needed")));
    }
    let f = |y: f64| semicircle_pair_integral(y, quadrature_points) - 2.0;
    let (mut lo, mut hi) = (0.01, 2.0);
    let (flo, fhi) = (f(lo), f(hi));
    if !(flo > 0.0 && fhi < 0.0) {
        return Err(Error::NoSignChange(format!("f(0.01) = {flo}, f(2) = {fhi}")));
    }
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Clone, Debug, Serialize)]
pub struct StationarityReport {
    /// One entry per probe; `None` for probes flagged outside the support.
    pub residuals: Vec<Option<f64>>,
    /// Fitted constant of the real-axis equation.
    pub real_constant: Option<f64>,
    /// Fitted constant of the planar equation.
    pub complex_constant: Option<f64>,
    /// Largest max−min residual range over the two equations.
    pub spread: f64,
    pub flagged: Vec<usize>,
}

/// The first variation `½|z|² − ∫ log|z − w| dμ(w)` at `z`.
pub fn first_variation(measure: &EmpiricalMeasure, z: Complex64) -> f64 {
    let total = measure.total_mass();
    let mut acc = Neumaier::new();
    for a in measure.atoms() {
        let d2 = (z - a.point).norm_sqr();
        if d2 > 0.0 {
            acc.add(a.weight * 0.5 * d2.ln());
        }
    }
    0.5 * z.norm_sqr() - acc.value() / total
}

/// Residuals of the minimiser equations at the probes: the first variation
/// must be constant on the real support and, separately, on the planar
/// support. Each constant is fitted by least squares (the mean) over its
/// probes. Real-axis probes beyond the extreme on-axis atoms, and planar
/// probes farther than three typical spacings from any off-axis atom, are
/// flagged and left out.
pub fn stationarity_residual(measure: &EmpiricalMeasure, alpha: f64, probes: &[Complex64]) -> Result<StationarityReport> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must lie in [0, 1]")));
    }
    let on_axis: Vec<f64> = measure.atoms().iter().filter(|a| a.point.im == 0.0).map(|a| a.point.re).collect();
    let off_axis: Vec<Complex64> = measure.atoms().iter().filter(|a| a.point.im != 0.0).map(|a| a.point).collect();
    let (rmin, rmax) = on_axis.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let spacing = typical_spacing(&off_axis);

    let mut flagged = Vec::new();
    let mut values: Vec<Option<(bool, f64)>> = Vec::with_capacity(probes.len());
    for (i, &p) in probes.iter().enumerate() {
        let inside = if p.im == 0.0 {
            alpha > 0.0 && p.re >= rmin && p.re <= rmax
        } else {
            alpha < 1.0 && off_axis.iter().any(|w| (w - p).norm() <= 3.0 * spacing)
        };
        if inside {
            values.push(Some((p.im == 0.0, first_variation(measure, p))));
        } else {
            flagged.push(i);
            values.push(None);
        }
    }
    let fit = |real: bool| {
        let v: Vec<f64> = values.iter().flatten().filter(|(r, _)| *r == real).map(|(_, x)| *x).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    };
    let (real_constant, complex_constant) = (fit(true), fit(false));
    let residuals: Vec<Option<f64>> =
        values.iter().map(|v| v.map(|(real, x)| x - if real { real_constant.unwrap() } else { complex_constant.unwrap() })).collect();
    let range = |real: bool| {
        let v: Vec<f64> = values.iter().zip(&residuals).filter_map(|(v, r)| v.filter(|(rr, _)| *rr == real).and(*r)).collect();
        if v.is_empty() {
            0.0
        } else {
            v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - v.iter().cloned().fold(f64::INFINITY, f64::min)
        }
    };
    let spread = range(true).max(range(false));
    Ok(StationarityReport { residuals, real_constant, complex_constant, spread, flagged })
}

fn typical_spacing(points: &[Complex64]) -> f64 {
    if points.len() < 2 {
        return f64::INFINITY;
    }
    let mut nn: Vec<f64> = points
        .iter()
        .enumerate()
        .map(|(i, p)| points.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, q)| (p - q).norm()).fold(f64::INFINITY, f64::min))
        .collect();
    nn.sort_by(f64::total_cmp);
    nn[nn.len() / 2]
}

/// Inputs of the next-order energy expansion. The constants `κ₁`, `κ₂`
/// have no known values and are supplied by the caller.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionInputs {
    pub kappa1: f64,
    pub kappa2: f64,
    /// `∫ ρ log ρ` of the normalised real density.
    pub entropy_real: f64,
    /// `∫ ρ log ρ` of the normalised planar density.
    pub entropy_complex: f64,
}

/// `n² I − ((1+α)/2) n log n + n[(1−α) κ₂/(2π) + α κ₁/π]
///  − n[(1−α) S_C + α S_R]`.
pub fn renormalized_expansion(n: usize, alpha: f64, rate_value: f64, inputs: ExpansionInputs) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must lie in [0, 1]")));
    }
    if !(inputs.entropy_real.is_finite() && inputs.entropy_complex.is_finite()) {
        return Err(Error::InvalidParameter("entropies must be finite".into()));
    }
    let nf = n as f64;
    Ok(nf * nf * rate_value - 0.5 * (1.0 + alpha) * nf * nf.ln()
        + nf * ((1.0 - alpha) * inputs.kappa2 / (2.0 * PI) + alpha * inputs.kappa1 / PI)
        - nf * ((1.0 - alpha) * inputs.entropy_complex + alpha * inputs.entropy_real))
}

/// `∫ ρ log ρ` of the normalised density of `samples`, by a histogram
/// with `bins` equal bins spanning the samples.
pub fn entropy_1d(samples: &[f64], bins: usize) -> Result<f64> {
    if samples.len() < 2 || bins == 0 {
        return Err(Error::Degenerate("entropy needs at least two samples and one bin".into()));
    }
    let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return Err(Error::Degenerate("samples span no interval".into()));
    }
    let h = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in samples {
        counts[(((x - lo) / h) as usize).min(bins - 1)] += 1;
    }
    Ok(histogram_entropy(&counts, samples.len(), h))
}

/// `∫ ρ log ρ` of the normalised planar density of `points`, by square
/// cells of side `cell`.
pub fn entropy_2d(points: &[Complex64], cell: f64) -> Result<f64> {
    if points.len() < 2 || !(cell > 0.0) {
        return Err(Error::Degenerate("entropy needs at least two points and a positive cell".into()));
    }
    let mut counts = std::collections::BTreeMap::<(i64, i64), usize>::new();
    for p in points {
        *counts.entry(((p.re / cell).floor() as i64, (p.im / cell).floor() as i64)).or_insert(0) += 1;
    }
    let c: Vec<usize> = counts.into_values().collect();
    Ok(histogram_entropy(&c, points.len(), cell * cell))
}

fn histogram_entropy(counts: &[usize], total: usize, cell_measure: f64) -> f64 {
    let t = total as f64;
    let terms: Vec<f64> = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / t;
            p * (p / cell_measure).ln()
        })
        .collect();
    compensated_sum(&terms)
}
