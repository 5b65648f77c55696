//! Observables of ensembles of configurations: real-axis histograms,
//! planar support boundaries, the gap between the planar phase and the
//! axis, and nearest-neighbour statistics of the real phase.

mod support;

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::config::SpectralConfiguration;
use crate::error::{Error, Result};

pub use support::{complex_support, SupportEstimate};

/// Semicircle density `(1/π)√(2 − x²)` on `[−√2, √2]`.
pub fn semicircle_density(x: f64) -> f64 {
    let r = 2.0 - x * x;
    if r > 0.0 {
        r.sqrt() / PI
    } else {
        0.0
    }
}

/// Distribution function of the semicircle on `[−√2, √2]`.
pub fn semicircle_cdf(x: f64) -> f64 {
    let s = (x / 2f64.sqrt()).clamp(-1.0, 1.0);
    0.5 + (s * (1.0 - s * s).sqrt() + s.asin()) / PI
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Histogram {
    pub bin_left: Vec<f64>,
    pub bin_right: Vec<f64>,
    /// Per unit length, normalised by the total particle count so the
    /// integral is the on-axis fraction.
    pub density: Vec<f64>,
}

impl Histogram {
    pub fn is_empty(&self) -> bool {
        self.density.is_empty()
    }

    pub fn integral(&self) -> f64 {
        self.bin_left.iter().zip(&self.bin_right).zip(&self.density).map(|((l, r), d)| (r - l) * d).sum()
    }

    /// Largest deviation from the bin averages of a reference measure given
    /// by its distribution function, scaled by `mass`.
    pub fn sup_distance(&self, cdf: impl Fn(f64) -> f64, mass: f64) -> f64 {
        self.bin_left
            .iter()
            .zip(&self.bin_right)
            .zip(&self.density)
            .map(|((&l, &r), &d)| (d - mass * (cdf(r) - cdf(l)) / (r - l)).abs())
            .fold(0.0, f64::max)
    }

    /// CSV `bin_left,bin_right,density`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "bin_left,bin_right,density")?;
        for ((l, r), d) in self.bin_left.iter().zip(&self.bin_right).zip(&self.density) {
            writeln!(w, "{l},{r},{d}")?;
        }
        Ok(())
    }
}

/// Histogram of the real particles pooled over the ensemble. `range`
/// defaults to the span of the data. An ensemble without real particles
/// gives an empty table.
pub fn real_histogram(ensemble: &[SpectralConfiguration], bins: usize, range: Option<(f64, f64)>) -> Result<Histogram> {
    if ensemble.is_empty() {
        return Err(Error::Degenerate("empty ensemble".into()));
    }
    if bins == 0 {
        return Err(Error::InvalidParameter("bins must be positive".into()));
    }
    let total: usize = ensemble.iter().map(|c| c.n()).sum();
    let xs: Vec<f64> = ensemble.iter().flat_map(|c| c.reals().iter().copied()).collect();
    if xs.is_empty() {
        return Ok(Histogram { bin_left: vec![], bin_right: vec![], density: vec![] });
    }
    let (lo, hi) = match range {
        Some((lo, hi)) if hi > lo => (lo, hi),
        Some(_) => return Err(Error::InvalidParameter("empty histogram range".into())),
        None => {
            let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let pad = 1e-9 * (hi - lo).max(1.0);
            (lo - pad, hi + pad)
        }
    };
    let h = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for x in xs {
        if x >= lo && x <= hi {
            counts[(((x - lo) / h) as usize).min(bins - 1)] += 1;
        }
    }
    let bin_left: Vec<f64> = (0..bins).map(|i| lo + i as f64 * h).collect();
    let bin_right: Vec<f64> = (0..bins).map(|i| if i + 1 == bins { hi } else { lo + (i + 1) as f64 * h }).collect();
    let density = counts.iter().zip(bin_left.iter().zip(&bin_right)).map(|(&c, (l, r))| c as f64 / (total as f64 * (r - l))).collect();
    Ok(Histogram { bin_left, bin_right, density })
}

/// Ensemble average of the smallest imaginary part among the upper
/// particles of each configuration.
pub fn axis_gap(ensemble: &[SpectralConfiguration]) -> Result<f64> {
    let mins: Vec<f64> =
        ensemble.iter().filter(|c| c.l() > 0).map(|c| c.uppers().iter().map(|z| z.im).fold(f64::INFINITY, f64::min)).collect();
    if mins.is_empty() {
        return Err(Error::Degenerate("no off-axis particles in the ensemble".into()));
    }
    Ok(mins.iter().sum::<f64>() / mins.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapStatistics {
    /// Gaps between consecutive sorted real coordinates.
    pub gaps: Vec<f64>,
    pub mean: f64,
    /// Standard deviation over mean of the raw gaps.
    pub cv: f64,
    /// The same after dividing each gap by the mean of its neighbours
    /// within [`UNFOLD_WINDOW`] positions, which removes the slow variation
    /// of the macroscopic density.
    pub unfolded_cv: f64,
}

pub const UNFOLD_WINDOW: usize = 5;

fn coefficient_of_variation(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64;
    var.sqrt() / m
}

/// Nearest-neighbour gaps of the real phase.
pub fn gap_statistics(config: &SpectralConfiguration) -> Result<GapStatistics> {
    if config.k() < 3 {
        return Err(Error::Degenerate(format!("gap statistics need k >= 3, got {}", config.k())));
    }
    let mut xs = config.reals().to_vec();
    xs.sort_by(f64::total_cmp);
    let gaps: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    let unfolded: Vec<f64> = (0..gaps.len())
        .map(|i| {
            let lo = i.saturating_sub(UNFOLD_WINDOW);
            let hi = (i + UNFOLD_WINDOW + 1).min(gaps.len());
            let local = gaps[lo..hi].iter().sum::<f64>() / (hi - lo) as f64;
            gaps[i] / local
        })
        .collect();
    Ok(GapStatistics { cv: coefficient_of_variation(&gaps), unfolded_cv: coefficient_of_variation(&unfolded), mean, gaps })
}

/// Symmetric Hausdorff distance between two finite point sets.
pub fn hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let directed = |p: &[Complex64], q: &[Complex64]| {
        p.iter().map(|x| q.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}
