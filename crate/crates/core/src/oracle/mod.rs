//! Brute-force ground truth: real Ginibre matrices with variance-`1/n`
//! entries, their spectra, and empirical real-eigenvalue statistics.
//!
//! Trial `t` draws its matrix from stream `t` of the oracle domain, so
//! results do not depend on how trials are split across threads.

mod schur;

use std::collections::BTreeMap;
use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::SpectralConfiguration;
use crate::error::{Error, Result};
use crate::rng::{stream, Domain};

pub use schur::{DEFLATION_TOL, ITERATIONS_PER_DIM};

/// Largest dimension the dense solver accepts.
pub const MAX_DIM: usize = 400;
/// Realness threshold relative to the spectral radius.
pub const REAL_TOL: f64 = 1e-8;

/// A dense row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct RealMatrix {
    n: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParameter("matrix must be square".into()));
        }
        Ok(RealMatrix { n, data: rows.concat() })
    }

    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::InvalidParameter(format!("{} entries do not form a {n}x{n} matrix", data.len())));
        }
        Ok(RealMatrix { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// An `n×n` matrix of independent `N(0, 1/n)` entries.
pub fn sample_ginibre<R: Rng + ?Sized>(n: usize, rng: &mut R) -> RealMatrix {
    let s = 1.0 / (n as f64).sqrt();
    let data = (0..n * n)
        .map(|_| {
            let g: f64 = StandardNormal.sample(&mut *rng);
            s * g
        })
        .collect();
    RealMatrix { n, data }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    /// Largest neglected subdiagonal entry relative to `‖M‖_F`.
    pub residual: f64,
}

impl Spectrum {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// The default realness threshold, `REAL_TOL · ρ(M)`.
    pub fn default_tolerance(&self) -> f64 {
        REAL_TOL * self.spectral_radius().max(f64::MIN_POSITIVE)
    }

    /// Splits into reals and upper particles using [`classify`]; eigenvalues
    /// below the axis are dropped as the conjugate halves.
    pub fn to_configuration(&self, tol: f64) -> Result<SpectralConfiguration> {
        let real = classify(&self.eigenvalues, tol);
        let reals = self.eigenvalues.iter().zip(&real).filter(|(_, &r)| r).map(|(z, _)| z.re).collect();
        let uppers = self.eigenvalues.iter().zip(&real).filter(|(z, &r)| !r && z.im > 0.0).map(|(z, _)| *z).collect();
        crate::config::make_configuration(reals, uppers)
    }
}

/// All `n` eigenvalues, conjugate pairs adjacent.
pub fn eigenvalues(m: &RealMatrix) -> Result<Spectrum> {
    if m.n > MAX_DIM {
        return Err(Error::InvalidParameter(format!("n = {} exceeds the dense solver limit {MAX_DIM}", m.n)));
    }
    if m.data.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("matrix has non-finite entries".into()));
    }
    let (eigenvalues, neglected) = schur::eigenvalues_of(m)?;
    let fro = m.frobenius_norm();
    let residual = if fro > 0.0 { neglected / fro } else { 0.0 };
    Ok(Spectrum { eigenvalues, residual })
}

/// Realness flags: `|Im λ| ≤ tol`, then, if the count has the wrong parity,
/// the eigenvalue whose `|Im λ|` is nearest to `tol` switches class.
pub fn classify(eigenvalues: &[Complex64], tol: f64) -> Vec<bool> {
    let mut real: Vec<bool> = eigenvalues.iter().map(|z| z.im.abs() <= tol).collect();
    let k = real.iter().filter(|&&r| r).count();
    if !(eigenvalues.len() - k).is_multiple_of(2) {
        let i = (0..eigenvalues.len())
            .min_by(|&a, &b| {
                let da = (eigenvalues[a].im.abs() - tol).abs();
                let db = (eigenvalues[b].im.abs() - tol).abs();
                da.total_cmp(&db)
            })
            .expect("odd count needs at least one eigenvalue");
        real[i] = !real[i];
    }
    real
}

/// Number of real eigenvalues, with the parity of `n`.
pub fn count_real(spectrum: &Spectrum, tol: f64) -> usize {
    classify(&spectrum.eigenvalues, tol).into_iter().filter(|&r| r).count()
}

/// Empirical distribution of the number of real eigenvalues.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealCountPMF {
    pub n: usize,
    pub counts: BTreeMap<usize, u64>,
    pub trials: u64,
}

impl RealCountPMF {
    pub fn probability(&self, k: usize) -> f64 {
        self.counts.get(&k).copied().unwrap_or(0) as f64 / self.trials as f64
    }

    /// Binomial standard error of [`probability`](Self::probability).
    pub fn stderr(&self, k: usize) -> f64 {
        let p = self.probability(k);
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    pub fn mean(&self) -> f64 {
        self.counts.iter().map(|(&k, &c)| k as f64 * c as f64).sum::<f64>() / self.trials as f64
    }

    /// Standard error of [`mean`](Self::mean).
    pub fn mean_stderr(&self) -> f64 {
        let m = self.mean();
        let var = self.counts.iter().map(|(&k, &c)| (k as f64 - m).powi(2) * c as f64).sum::<f64>() / self.trials as f64;
        (var / self.trials as f64).sqrt()
    }

    /// CSV `k,count,probability,stderr`, one row per observed `k`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "k,count,probability,stderr")?;
        for (&k, &c) in &self.counts {
            writeln!(w, "{k},{c},{},{}", self.probability(k), self.stderr(k))?;
        }
        Ok(())
    }
}

fn trial_spectrum(n: usize, seed: u64, t: u64) -> Result<Spectrum> {
    let mut rng = stream(seed, Domain::OracleTrial, t);
    eigenvalues(&sample_ginibre(n, &mut rng))
}

/// Counts real eigenvalues over `trials` independent matrices.
pub fn estimate_pnk(n: usize, trials: u64, seed: u64) -> Result<RealCountPMF> {
    if n == 0 || n > MAX_DIM {
        return Err(Error::InvalidParameter(format!("n = {n} outside 1..={MAX_DIM}")));
    }
    let counts = (0..trials)
        .into_par_iter()
        .map(|t| {
            let s = trial_spectrum(n, seed, t)?;
            Ok(count_real(&s, s.default_tolerance()))
        })
        .try_fold(BTreeMap::new, |mut acc: BTreeMap<usize, u64>, k: Result<usize>| {
            *acc.entry(k?).or_insert(0) += 1;
            Ok::<_, Error>(acc)
        })
        .try_reduce(BTreeMap::new, |mut a, b| {
            for (k, c) in b {
                *a.entry(k).or_insert(0) += c;
            }
            Ok(a)
        })?;
    Ok(RealCountPMF { n, counts, trials })
}

#[derive(Clone, Debug)]
pub struct ConditionalEnsemble {
    pub spectra: Vec<Spectrum>,
    pub trials: u64,
}

impl ConditionalEnsemble {
    pub fn acceptance(&self) -> f64 {
        self.spectra.len() as f64 / self.trials as f64
    }

    pub fn configurations(&self) -> Result<Vec<SpectralConfiguration>> {
        self.spectra.iter().map(|s| s.to_configuration(s.default_tolerance())).collect()
    }
}

const BATCH: u64 = 4096;

/// Spectra of matrices with exactly `k` real eigenvalues, by rejection.
/// Stops at `target` accepted matrices or `trials_cap` trials, whichever
/// comes first; accepted spectra are kept in trial order.
pub fn conditional_ensemble(n: usize, k: usize, target: usize, trials_cap: u64, seed: u64) -> Result<ConditionalEnsemble> {
    crate::config::check_counts(n, k)?;
    if n == 0 || n > MAX_DIM {
        return Err(Error::InvalidParameter(format!("n = {n} outside 1..={MAX_DIM}")));
    }
    let mut spectra = Vec::new();
    let mut trials = 0u64;
    while trials < trials_cap && spectra.len() < target {
        let end = (trials + BATCH).min(trials_cap);
        let batch: Vec<Option<Spectrum>> = (trials..end)
            .into_par_iter()
            .map(|t| {
                let s = trial_spectrum(n, seed, t)?;
                Ok((count_real(&s, s.default_tolerance()) == k).then_some(s))
            })
            .collect::<Result<_>>()?;
        for s in batch.into_iter().flatten() {
            if spectra.len() < target {
                spectra.push(s);
            }
        }
        trials = end;
    }
    if spectra.is_empty() {
        return Err(Error::Infeasible { n, k, accepted: 0, trials: trials as usize });
    }
    Ok(ConditionalEnsemble { spectra, trials })
}

/// Spectra as JSON lines.
pub fn write_spectra_jsonl<W: Write>(spectra: &[Spectrum], mut w: W) -> Result<()> {
    for s in spectra {
        serde_json::to_writer(&mut w, s)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}
