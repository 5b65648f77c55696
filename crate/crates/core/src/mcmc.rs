//! Metropolis–Hastings on the joint eigenvalue density at fixed `(n, k)`.
//!
//! The target is `exp(−nΦ)`, the eigenvalue density of real Ginibre
//! matrices with variance-`1/n` entries up to its normalisation. A move
//! displaces one represented particle by a Gaussian step: 1d for reals, 2d
//! for upper particles, which are folded back into the upper half-plane
//! (the fold keeps the proposal symmetric). The two step sizes are tuned
//! toward [`TARGET_ACCEPTANCE`] during burn-in and frozen afterwards.
//!
//! The log target is updated incrementally from the moved particle's local
//! terms and recomputed from scratch every [`RECOMPUTE_EVERY`] steps.

use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{check_counts, initial_configuration, SpectralConfiguration};
use crate::error::{Error, Result};
use crate::potential::{energy_parts, log_erfc};
use crate::rng::{stream, Domain, StreamRng};

pub const TARGET_ACCEPTANCE: f64 = 0.4;
pub const RECOMPUTE_EVERY: usize = 10_000;
const TUNE_WINDOW: u64 = 100;

/// `log` of the joint density up to an additive constant: `−n·Φ`.
pub fn log_target_density(config: &SpectralConfiguration) -> Result<f64> {
    let n = config.n();
    energy_parts(config.reals(), config.uppers(), n)
        .map(|e| -(n as f64) * e.total)
        .ok_or_else(|| crate::potential::total_energy(config).unwrap_err())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProposalScales {
    pub real: f64,
    pub complex: f64,
}

impl ProposalScales {
    /// A starting guess of the order of the interparticle distance.
    pub fn initial(n: usize) -> Self {
        let s = 1.0 / (n as f64).sqrt();
        ProposalScales { real: s, complex: s }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct MoveCounts {
    pub proposed: u64,
    pub accepted: u64,
}

impl MoveCounts {
    pub fn rate(&self) -> f64 {
        if self.proposed == 0 {
            f64::NAN
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }
}

#[derive(Clone, Debug)]
pub struct ChainState {
    n: usize,
    reals: Vec<f64>,
    uppers: Vec<Complex64>,
    log_target: f64,
    pub real_moves: MoveCounts,
    pub complex_moves: MoveCounts,
    rng: StreamRng,
}

impl ChainState {
    pub fn new(config: &SpectralConfiguration, rng: StreamRng) -> Result<Self> {
        let log_target = log_target_density(config)?;
        Ok(ChainState {
            n: config.n(),
            reals: config.reals().to_vec(),
            uppers: config.uppers().to_vec(),
            log_target,
            real_moves: MoveCounts::default(),
            complex_moves: MoveCounts::default(),
            rng,
        })
    }

    pub fn log_target(&self) -> f64 {
        self.log_target
    }

    pub fn configuration(&self) -> SpectralConfiguration {
        SpectralConfiguration::from_parts_unchecked(self.reals.clone(), self.uppers.clone())
    }

    pub fn acceptance_rate(&self) -> f64 {
        let p = self.real_moves.proposed + self.complex_moves.proposed;
        let a = self.real_moves.accepted + self.complex_moves.accepted;
        if p == 0 {
            f64::NAN
        } else {
            a as f64 / p as f64
        }
    }

    /// Recomputes the log target from scratch and returns how far the
    /// incremental value had drifted.
    pub fn resync(&mut self) -> f64 {
        let fresh = energy_parts(&self.reals, &self.uppers, self.n)
            .map(|e| -(self.n as f64) * e.total)
            .expect("chain states never hold coincident points");
        let drift = (fresh - self.log_target).abs();
        self.log_target = fresh;
        drift
    }

    fn local_real(&self, a: usize, x: f64) -> f64 {
        let mut s = 0.0;
        for (i, &xi) in self.reals.iter().enumerate() {
            if i != a {
                s += (x - xi).abs().ln();
            }
        }
        for z in &self.uppers {
            let du = z.re - x;
            s += (du * du + z.im * z.im).ln();
        }
        s - 0.5 * self.n as f64 * x * x
    }

    fn local_upper(&self, b: usize, z: Complex64) -> f64 {
        let nf = self.n as f64;
        let mut s = 0.0;
        for &x in &self.reals {
            let du = z.re - x;
            s += (du * du + z.im * z.im).ln();
        }
        for (j, w) in self.uppers.iter().enumerate() {
            if j != b {
                let du = z.re - w.re;
                let dv = z.im - w.im;
                let sv = z.im + w.im;
                s += (du * du + dv * dv).ln() + (du * du + sv * sv).ln();
            }
        }
        s + (2.0 * z.im).ln() - nf * (z.re * z.re - z.im * z.im) + log_erfc(z.im * (2.0 * nf).sqrt())
    }

    fn accept(&mut self, delta: f64) -> bool {
        if delta.is_nan() {
            return false;
        }
        delta >= 0.0 || self.rng.random::<f64>() < delta.exp()
    }
}

/// One Metropolis–Hastings transition. Returns whether the move was
/// accepted; `k` never changes.
pub fn mh_step(state: &mut ChainState, scales: ProposalScales) -> bool {
    let k = state.reals.len();
    let m = k + state.uppers.len();
    if m == 0 {
        return false;
    }
    let i = state.rng.random_range(0..m);
    if i < k {
        let old = state.reals[i];
        let xi: f64 = StandardNormal.sample(&mut state.rng);
        let new = old + scales.real * xi;
        state.real_moves.proposed += 1;
        let delta = state.local_real(i, new) - state.local_real(i, old);
        // a coincidence makes the new local term −∞, so delta is −∞ or NaN
        if delta.is_finite() && state.accept(delta) {
            state.reals[i] = new;
            state.log_target += delta;
            state.real_moves.accepted += 1;
            return true;
        }
    } else {
        let b = i - k;
        let old = state.uppers[b];
        let xu: f64 = StandardNormal.sample(&mut state.rng);
        let xv: f64 = StandardNormal.sample(&mut state.rng);
        let mut new = old + Complex64::new(xu, xv) * scales.complex;
        new.im = new.im.abs();
        state.complex_moves.proposed += 1;
        if new.im > 0.0 {
            let delta = state.local_upper(b, new) - state.local_upper(b, old);
            if delta.is_finite() && state.accept(delta) {
                state.uppers[b] = new;
                state.log_target += delta;
                state.complex_moves.accepted += 1;
                return true;
            }
        }
    }
    false
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ChainOptions {
    pub steps: usize,
    pub burn_in: usize,
    pub thinning: usize,
    pub seed: u64,
    pub chain: u64,
    /// Trace records every this many steps.
    pub trace_every: usize,
}

impl ChainOptions {
    pub fn new(steps: usize, burn_in: usize, thinning: usize, seed: u64) -> Self {
        ChainOptions { steps, burn_in, thinning, seed, chain: 0, trace_every: 10_000 }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TracePoint {
    pub chain: u64,
    pub step: usize,
    pub log_target: f64,
    pub accept_rate: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainStats {
    pub chain: u64,
    pub scales: ProposalScales,
    /// Acceptance after burn-in.
    pub real_moves: MoveCounts,
    pub complex_moves: MoveCounts,
    pub max_drift: f64,
}

#[derive(Clone, Debug)]
pub struct ChainOutput {
    pub samples: Vec<SpectralConfiguration>,
    pub trace: Vec<TracePoint>,
    pub stats: ChainStats,
}

/// Runs one chain from the default initial data. Returns
/// `(steps − burn_in) / thinning` configurations, taken after every
/// `thinning`-th post-burn-in step.
pub fn sample_chain(n: usize, k: usize, options: ChainOptions) -> Result<ChainOutput> {
    check_counts(n, k)?;
    check_options(&options)?;
    let mut rng = stream(options.seed, Domain::Chain, options.chain);
    let init = initial_configuration(n, k, &mut rng)?;
    run_chain(&init, rng, options)
}

/// As [`sample_chain`], started from a given configuration instead of a
/// random one.
pub fn sample_chain_from(init: &SpectralConfiguration, options: ChainOptions) -> Result<ChainOutput> {
    check_options(&options)?;
    run_chain(init, stream(options.seed, Domain::Chain, options.chain), options)
}

fn check_options(options: &ChainOptions) -> Result<()> {
    if options.thinning == 0 {
        return Err(Error::InvalidParameter("thinning must be at least 1".into()));
    }
    if options.burn_in > options.steps {
        return Err(Error::InvalidParameter(format!("burn-in {} exceeds steps {}", options.burn_in, options.steps)));
    }
    Ok(())
}

fn run_chain(init: &SpectralConfiguration, rng: StreamRng, options: ChainOptions) -> Result<ChainOutput> {
    let n = init.n();
    let mut state = ChainState::new(init, rng)?;
    let mut scales = ProposalScales::initial(n);
    let mut window = (MoveCounts::default(), MoveCounts::default());
    let mut samples = Vec::with_capacity((options.steps - options.burn_in) / options.thinning);
    let mut trace = Vec::new();
    let mut max_drift: f64 = 0.0;
    let trace_every = options.trace_every.max(1);

    for step in 1..=options.steps {
        mh_step(&mut state, scales);
        if step <= options.burn_in {
            tune(&mut scales, &state, &mut window);
            if step == options.burn_in {
                state.real_moves = MoveCounts::default();
                state.complex_moves = MoveCounts::default();
            }
        } else if (step - options.burn_in).is_multiple_of(options.thinning) {
            samples.push(state.configuration());
        }
        if step % RECOMPUTE_EVERY == 0 {
            max_drift = max_drift.max(state.resync());
        }
        if step % trace_every == 0 || step == options.steps {
            trace.push(TracePoint { chain: options.chain, step, log_target: state.log_target, accept_rate: state.acceptance_rate() });
        }
    }
    Ok(ChainOutput {
        samples,
        trace,
        stats: ChainStats { chain: options.chain, scales, real_moves: state.real_moves, complex_moves: state.complex_moves, max_drift },
    })
}

/// Multiplicative adaptation over fixed windows of proposals per class.
fn tune(scales: &mut ProposalScales, state: &ChainState, window: &mut (MoveCounts, MoveCounts)) {
    let adjust = |scale: &mut f64, now: MoveCounts, last: &mut MoveCounts| {
        let proposed = now.proposed - last.proposed;
        if proposed >= TUNE_WINDOW {
            let rate = (now.accepted - last.accepted) as f64 / proposed as f64;
            *scale *= (rate - TARGET_ACCEPTANCE).exp();
            *last = now;
        }
    };
    adjust(&mut scales.real, state.real_moves, &mut window.0);
    adjust(&mut scales.complex, state.complex_moves, &mut window.1);
}

/// Independent chains `0..chains`, run in parallel, in chain order.
pub fn sample_chains(n: usize, k: usize, options: ChainOptions, chains: u64) -> Result<Vec<ChainOutput>> {
    (0..chains).into_par_iter().map(|c| sample_chain(n, k, ChainOptions { chain: c, ..options })).collect()
}

/// Samples as JSON lines, one configuration per line.
pub fn write_samples_jsonl<W: Write>(samples: &[SpectralConfiguration], mut w: W) -> Result<()> {
    for s in samples {
        serde_json::to_writer(&mut w, s)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Trace as CSV `chain,step,log_target,accept_rate`.
pub fn write_trace_csv<W: Write>(trace: &[TracePoint], mut w: W) -> Result<()> {
    writeln!(w, "chain,step,log_target,accept_rate")?;
    for t in trace {
        writeln!(w, "{},{},{},{}", t.chain, t.step, t.log_target, t.accept_rate)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::make_configuration;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn two_real_hand_value() {
        for a in [0.1, 0.5, 1.3] {
            let cfg = make_configuration(vec![-a, a], vec![]).unwrap();
            let v = log_target_density(&cfg).unwrap();
            assert!((v - ((2.0 * a).ln() - 2.0 * a * a)).abs() < 1e-14);
        }
    }

    #[test]
    fn relabelling_and_mirror_invariance() {
        let cfg = make_configuration(vec![0.1, -0.4, 0.9], vec![c(0.3, 0.2), c(-0.5, 0.7)]).unwrap();
        let swapped = make_configuration(vec![0.9, 0.1, -0.4], vec![c(-0.5, 0.7), c(0.3, 0.2)]).unwrap();
        let v = log_target_density(&cfg).unwrap();
        assert!((v - log_target_density(&swapped).unwrap()).abs() < 1e-12);
        assert!((v - log_target_density(&cfg.mirrored()).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn zero_scale_always_accepts() {
        let cfg = make_configuration(vec![0.1, -0.4], vec![c(0.3, 0.2)]).unwrap();
        let mut st = ChainState::new(&cfg, stream(3, Domain::Chain, 0)).unwrap();
        for _ in 0..1000 {
            assert!(mh_step(&mut st, ProposalScales { real: 0.0, complex: 0.0 }));
        }
        assert_eq!(st.configuration(), cfg);
    }

    #[test]
    fn incremental_target_tracks_full_recompute() {
        let mut rng = stream(5, Domain::Chain, 1);
        let cfg = initial_configuration(12, 4, &mut rng).unwrap();
        let mut st = ChainState::new(&cfg, rng).unwrap();
        for _ in 0..RECOMPUTE_EVERY {
            mh_step(&mut st, ProposalScales::initial(12));
        }
        assert!(st.resync() < 1e-7);
        assert_eq!(st.configuration().k(), 4);
    }

    #[test]
    fn sample_count_and_parity() {
        let out = sample_chain(6, 2, ChainOptions::new(1000, 200, 8, 1)).unwrap();
        assert_eq!(out.samples.len(), 100);
        assert!(out.samples.iter().all(|s| s.k() == 2 && s.n() == 6));
        assert!(sample_chain(6, 2, ChainOptions::new(1000, 0, 1000, 1)).unwrap().samples.len() <= 1);
        assert!(matches!(sample_chain(4, 3, ChainOptions::new(10, 0, 1, 1)), Err(Error::Parity { .. })));
    }

    #[test]
    fn tuned_acceptance_is_moderate() {
        let out = sample_chain(10, 4, ChainOptions::new(200_000, 50_000, 100, 2)).unwrap();
        let r = out.stats.real_moves.rate();
        let z = out.stats.complex_moves.rate();
        assert!(r > 0.2 && r < 0.6, "{r}");
        assert!(z > 0.2 && z < 0.6, "{z}");
    }
}
