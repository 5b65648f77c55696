//! Time integration of the two-phase gas `dλ = (σ/√n) dB − ∇Φ dt` and of
//! its zero-temperature limit.
//!
//! Two schemes are available.
//!
//! * [`Scheme::Explicit`]: Euler–Maruyama on the full force. Upper
//!   particles that cross the axis are reflected, `y -> |y|`.
//! * [`Scheme::SplitImplicit`] (default): the two repulsions that are
//!   exactly critical at `σ² = 2`, between neighbouring reals and between
//!   an upper particle and its own conjugate, are taken drift-implicitly
//!   (a proximal step on their log barrier); everything else is
//!   Euler–Maruyama. The implicit part keeps reals ordered and uppers off
//!   the axis for any step size.
//!
//! Every step is capped by the stability rule
//! `dt ≤ DT_SAFE_FACTOR · d² · n`, where `d` is the closest distance among
//! the explicitly integrated pairs (all pairs for the explicit scheme): the
//! stiffest such force is `1/(n·d)`, so the explicit update stays a small
//! fraction of `d`. A step that still ends with two particles closer than
//! [`COLLISION_EPS`], a particle on the axis or a non-finite coordinate is a
//! guard trip: it is discarded and replaced by two half steps, up to
//! [`MAX_HALVINGS`] levels deep.
//!
//! Noise comes from one stream per particle (reals `0..k`, uppers
//! `k..k+l`), drawn in step order. The split scheme keeps the reals sorted,
//! so real stream `i` follows the `i`-th real from the left.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::config::SpectralConfiguration;
use crate::error::{Error, Result};
use crate::params::GasParams;
use crate::potential::{closest_pair, energy_parts, gradient_and_separations, gradient_into};
use crate::rng::{stream, Domain, StreamRng};

pub const DT_SAFE_FACTOR: f64 = 0.1;
pub const COLLISION_EPS: f64 = 1e-10;
pub const MAX_HALVINGS: u32 = 20;
/// Coordinates beyond this radius count as an explosion.
pub const EXPLOSION_RADIUS: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Stochastic,
    Deterministic,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stochastic" => Ok(Mode::Stochastic),
            "deterministic" => Ok(Mode::Deterministic),
            other => Err(Error::InvalidParameter(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Explicit,
    #[default]
    SplitImplicit,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "explicit" => Ok(Scheme::Explicit),
            "split-implicit" | "split_implicit" => Ok(Scheme::SplitImplicit),
            other => Err(Error::InvalidParameter(format!("unknown scheme {other:?}"))),
        }
    }
}

/// The largest step allowed at a given closest distance.
pub fn dt_safe(min_separation: f64, n: usize) -> f64 {
    DT_SAFE_FACTOR * min_separation * min_separation * n as f64
}

/// Smallest distance between any two of the `n` particles, counting each
/// upper particle against its own conjugate at `2y`. Infinite for `n < 2`.
pub fn min_separation(config: &SpectralConfiguration) -> f64 {
    closest_pair(config.reals(), config.uppers()).map_or(f64::INFINITY, |(_, _, d)| d)
}

/// An integrator owning its state and work buffers.
pub struct Integrator {
    n: usize,
    sigma: f64,
    dt_max: f64,
    reals: Vec<f64>,
    uppers: Vec<Complex64>,
    g_reals: Vec<f64>,
    g_uppers: Vec<Complex64>,
    min_r2: f64,
    /// Squared closest distance over pairs with an off-axis member, own
    /// conjugates excluded.
    planar_r2: f64,
    scheme: Scheme,
    trial_reals: Vec<f64>,
    trial_uppers: Vec<Complex64>,
    trial_g_reals: Vec<f64>,
    trial_g_uppers: Vec<Complex64>,
    noise: Vec<StreamRng>,
    enforce_descent: bool,
    energy: Option<f64>,
    time: f64,
    steps: usize,
    guard_trips: usize,
    descent_retries: usize,
}

#[derive(PartialEq, Eq)]
enum Attempt {
    Accepted,
    /// Collision, axis contact or explosion.
    Guard,
    /// Deterministic step that raised the energy.
    Ascent,
}

impl Integrator {
    /// A stochastic integrator when `sigma > 0`, deterministic otherwise.
    /// `seed` keys the per-particle noise streams.
    pub fn new(config: &SpectralConfiguration, sigma: f64, dt_max: f64, seed: u64) -> Result<Self> {
        if !(dt_max > 0.0 && dt_max.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt = {dt_max} must be positive")));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma = {sigma} must be nonnegative")));
        }
        let (k, l) = (config.k(), config.l());
        let noise = if sigma > 0.0 { (0..(k + l) as u64).map(|i| stream(seed, Domain::GasNoise, i)).collect() } else { Vec::new() };
        let mut it = Integrator {
            n: config.n(),
            sigma,
            dt_max,
            reals: config.reals().to_vec(),
            uppers: config.uppers().to_vec(),
            g_reals: vec![0.0; k],
            g_uppers: vec![Complex64::new(0.0, 0.0); l],
            min_r2: f64::INFINITY,
            planar_r2: f64::INFINITY,
            scheme: Scheme::default(),
            trial_reals: vec![0.0; k],
            trial_uppers: vec![Complex64::new(0.0, 0.0); l],
            trial_g_reals: vec![0.0; k],
            trial_g_uppers: vec![Complex64::new(0.0, 0.0); l],
            noise,
            enforce_descent: false,
            energy: None,
            time: 0.0,
            steps: 0,
            guard_trips: 0,
            descent_retries: 0,
        };
        it.reals.sort_by(f64::total_cmp);
        (it.min_r2, it.planar_r2) = gradient_and_separations(&it.reals, &it.uppers, it.n, &mut it.g_reals, &mut it.g_uppers);
        if it.min_r2.sqrt() < COLLISION_EPS {
            let (a, b, separation) = closest_pair(&it.reals, &it.uppers).expect("two particles");
            return Err(Error::Collision { a, b, separation });
        }
        Ok(it)
    }

    pub fn scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    /// In deterministic mode, also treat any energy increase beyond
    /// `1e-12·|Φ|` as a guard trip. Costs one energy evaluation per step.
    pub fn enforce_descent(mut self, on: bool) -> Self {
        self.enforce_descent = on && self.sigma == 0.0;
        self.energy = if self.enforce_descent { energy_parts(&self.reals, &self.uppers, self.n).map(|e| e.total) } else { None };
        self
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Steps halved because of a collision, axis contact or explosion.
    pub fn guard_trips(&self) -> usize {
        self.guard_trips
    }

    /// Steps halved only because descent enforcement rejected them.
    pub fn descent_retries(&self) -> usize {
        self.descent_retries
    }

    pub fn min_separation(&self) -> f64 {
        self.min_r2.sqrt()
    }

    pub fn rms_gradient(&self) -> f64 {
        let dof = self.reals.len() + 2 * self.uppers.len();
        if dof == 0 {
            return 0.0;
        }
        let s = self.g_reals.iter().map(|g| g * g).sum::<f64>() + self.g_uppers.iter().map(|g| g.norm_sqr()).sum::<f64>();
        (s / dof as f64).sqrt()
    }

    pub fn energy(&self) -> f64 {
        energy_parts(&self.reals, &self.uppers, self.n).map_or(f64::NAN, |e| e.total)
    }

    pub fn configuration(&self) -> SpectralConfiguration {
        SpectralConfiguration::from_parts_unchecked(self.reals.clone(), self.uppers.clone())
    }

    /// Closest distance among the pairs the scheme integrates explicitly.
    pub fn explicit_separation(&self) -> f64 {
        match self.scheme {
            Scheme::Explicit => self.min_separation(),
            Scheme::SplitImplicit => {
                let skip = self.reals.windows(3).map(|w| w[2] - w[0]).fold(f64::INFINITY, f64::min);
                self.planar_r2.sqrt().min(skip)
            }
        }
    }

    /// The step the stability rule allows from the current state.
    pub fn next_dt(&self) -> f64 {
        self.dt_max.min(dt_safe(self.explicit_separation(), self.n))
    }

    /// Advances by one step of size [`next_dt`](Self::next_dt).
    pub fn step(&mut self) -> Result<()> {
        let h = self.next_dt();
        self.advance(h, 0)?;
        self.steps += 1;
        Ok(())
    }

    fn advance(&mut self, h: f64, depth: u32) -> Result<()> {
        match self.attempt(h) {
            Attempt::Accepted => Ok(()),
            rejected => {
                if rejected == Attempt::Guard {
                    self.guard_trips += 1;
                } else {
                    self.descent_retries += 1;
                }
                if depth >= MAX_HALVINGS {
                    let (a, b, separation) = closest_pair(&self.trial_reals, &self.trial_uppers).expect("two particles");
                    return Err(Error::GuardTrip { step: self.steps, halvings: depth, a, b, separation });
                }
                self.advance(0.5 * h, depth + 1)?;
                self.advance(0.5 * h, depth + 1)
            }
        }
    }

    fn attempt(&mut self, h: f64) -> Attempt {
        let amp = self.sigma * (h / self.n as f64).sqrt();
        let inv_n = 1.0 / self.n as f64;
        let split = self.scheme == Scheme::SplitImplicit;
        let k = self.reals.len();
        for a in 0..k {
            let mut g = self.g_reals[a];
            if split {
                // drop the neighbour terms; the proximal step below adds them back
                if a + 1 < k {
                    g -= inv_n / (self.reals[a + 1] - self.reals[a]);
                }
                if a > 0 {
                    g += inv_n / (self.reals[a] - self.reals[a - 1]);
                }
            }
            let mut x = self.reals[a] - h * g;
            if amp > 0.0 {
                let xi: f64 = StandardNormal.sample(&mut self.noise[a]);
                x += amp * xi;
            }
            self.trial_reals[a] = x;
        }
        if split && k > 1 && !prox_ordered(&mut self.trial_reals, &self.reals, h * inv_n) {
            return Attempt::Guard;
        }
        let mut on_axis = false;
        for b in 0..self.uppers.len() {
            let mut g = self.g_uppers[b];
            if split {
                g.im += inv_n / self.uppers[b].im;
            }
            let mut z = self.uppers[b] - g * h;
            if amp > 0.0 {
                let rng = &mut self.noise[k + b];
                let xu: f64 = StandardNormal.sample(rng);
                let xv: f64 = StandardNormal.sample(rng);
                z += Complex64::new(xu, xv) * amp;
            }
            z.im = if split { prox_log(z.im, h * inv_n) } else { z.im.abs() };
            on_axis |= !(z.im > 0.0);
            self.trial_uppers[b] = z;
        }
        let finite = self.trial_reals.iter().all(|x| x.abs() < EXPLOSION_RADIUS)
            && self.trial_uppers.iter().all(|z| z.re.abs() < EXPLOSION_RADIUS && z.im < EXPLOSION_RADIUS);
        if on_axis || !finite {
            return Attempt::Guard;
        }
        let (min_r2, planar_r2) =
            gradient_and_separations(&self.trial_reals, &self.trial_uppers, self.n, &mut self.trial_g_reals, &mut self.trial_g_uppers);
        if !(min_r2.sqrt() >= COLLISION_EPS) {
            return Attempt::Guard;
        }
        if let Some(e0) = self.energy {
            match energy_parts(&self.trial_reals, &self.trial_uppers, self.n) {
                Some(e1) if e1.total <= e0 + 1e-12 * e0.abs() => self.energy = Some(e1.total),
                _ => return Attempt::Ascent,
            }
        }
        std::mem::swap(&mut self.reals, &mut self.trial_reals);
        std::mem::swap(&mut self.uppers, &mut self.trial_uppers);
        std::mem::swap(&mut self.g_reals, &mut self.trial_g_reals);
        std::mem::swap(&mut self.g_uppers, &mut self.trial_g_uppers);
        self.min_r2 = min_r2;
        self.planar_r2 = planar_r2;
        self.time += h;
        Attempt::Accepted
    }
}

/// The positive root of `y² − t·y − w = 0`: the minimiser of
/// `½(y − t)² − w log y`.
fn prox_log(t: f64, w: f64) -> f64 {
    let r = (t * t + 4.0 * w).sqrt();
    if t >= 0.0 {
        0.5 * (t + r)
    } else {
        2.0 * w / (r - t)
    }
}

const PROX_MAX_ITERATIONS: usize = 100;
/// Newton stops once its step is below this, relative to the coordinates.
const PROX_TOLERANCE: f64 = 1e-14;
/// A step this small that no longer halves is taken as the roundoff floor.
const PROX_FLOOR: f64 = 1e-9;
/// Largest fraction of any gap a single Newton step may close.
const PROX_BOUNDARY: f64 = 0.5;

/// Minimises `½|x − t|² − w Σ log(x[i+1] − x[i])` over increasing `x` by
/// Newton with a tridiagonal Hessian, damped so no gap shrinks by more than
/// half per iteration. On entry `x` holds `t`; `start` is an increasing
/// fallback used when `t` is not. Returns false if Newton fails to converge.
fn prox_ordered(x: &mut [f64], start: &[f64], w: f64) -> bool {
    let k = x.len();
    let t = x.to_vec();
    if !x.windows(2).all(|p| p[1] > p[0]) {
        x.copy_from_slice(start);
    }
    let mut grad = vec![0.0; k];
    let mut diag = vec![0.0; k];
    let mut off = vec![0.0; k.saturating_sub(1)];
    let mut delta = vec![0.0; k];
    let mut previous = f64::INFINITY;
    for _ in 0..PROX_MAX_ITERATIONS {
        for i in 0..k {
            grad[i] = x[i] - t[i];
            diag[i] = 1.0;
        }
        for i in 0..k - 1 {
            let gap = x[i + 1] - x[i];
            let c = w / (gap * gap);
            grad[i] += w / gap;
            grad[i + 1] -= w / gap;
            diag[i] += c;
            diag[i + 1] += c;
            off[i] = -c;
        }
        // Thomas algorithm on the symmetric positive definite Hessian
        delta.iter_mut().zip(&grad).for_each(|(di, g)| *di = -g);
        for i in 1..k {
            let m = off[i - 1] / diag[i - 1];
            diag[i] -= m * off[i - 1];
            delta[i] -= m * delta[i - 1];
        }
        delta[k - 1] /= diag[k - 1];
        for i in (0..k - 1).rev() {
            delta[i] = (delta[i] - off[i] * delta[i + 1]) / diag[i];
        }
        let scale = x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let step = delta.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if step <= PROX_TOLERANCE * scale || (step <= PROX_FLOOR * scale && step > 0.5 * previous) {
            return true;
        }
        previous = step;
        let mut lambda = 1.0f64;
        for i in 0..k - 1 {
            let closing = delta[i] - delta[i + 1];
            if closing > 0.0 {
                lambda = lambda.min(PROX_BOUNDARY * (x[i + 1] - x[i]) / closing);
            }
        }
        for i in 0..k {
            x[i] += lambda * delta[i];
        }
    }
    false
}

/// One explicit Euler–Maruyama step from `config` with noise keyed by
/// `params.seed`. Equivalent to the first step of an explicit
/// [`Integrator`].
pub fn step_stochastic(config: &SpectralConfiguration, params: &GasParams) -> Result<SpectralConfiguration> {
    params.validate()?;
    let mut it = Integrator::new(config, params.sigma, params.dt, params.seed)?.scheme(Scheme::Explicit);
    it.step()?;
    Ok(it.configuration())
}

/// One explicit gradient-flow step of size at most `dt`.
pub fn step_deterministic(config: &SpectralConfiguration, dt: f64) -> Result<SpectralConfiguration> {
    let mut it = Integrator::new(config, 0.0, dt, 0)?.scheme(Scheme::Explicit).enforce_descent(true);
    it.step()?;
    Ok(it.configuration())
}

/// One recorded state of a run.
#[derive(Clone, Debug, Serialize)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    pub energy: f64,
    pub min_separation: f64,
    pub config: SpectralConfiguration,
}

#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub guard_trips: usize,
    pub descent_retries: usize,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.time).collect()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.energy).collect()
    }

    pub fn min_separations(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.min_separation).collect()
    }

    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("a trajectory holds at least the initial state")
    }

    /// The snapshots in the final `fraction` of the run, by time.
    pub fn tail(&self, fraction: f64) -> &[Snapshot] {
        let t_end = self.last().time;
        let t_start = self.snapshots[0].time;
        let cut = t_end - fraction.clamp(0.0, 1.0) * (t_end - t_start);
        let i = self.snapshots.partition_point(|s| s.time < cut);
        &self.snapshots[i.min(self.snapshots.len() - 1)..]
    }

    /// Snapshots as JSON lines, one configuration with its step and time per line.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for s in &self.snapshots {
            serde_json::to_writer(&mut w, &SnapshotLine { step: s.step, time: s.time, config: &s.config })?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Diagnostics as CSV `step,time,energy,min_sep`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "step,time,energy,min_sep")?;
        for s in &self.snapshots {
            writeln!(w, "{},{},{},{}", s.step, s.time, s.energy, s.min_separation)?;
        }
        Ok(())
    }

    pub fn save(&self, jsonl: impl AsRef<Path>, csv: impl AsRef<Path>) -> Result<()> {
        self.write_jsonl(std::io::BufWriter::new(std::fs::File::create(jsonl)?))?;
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(csv)?))
    }
}

#[derive(Serialize)]
struct SnapshotLine<'a> {
    step: usize,
    time: f64,
    config: &'a SpectralConfiguration,
}

#[derive(Clone, Copy, Debug)]
pub struct EvolveOptions {
    pub mode: Mode,
    /// Record every `stride`-th step (the initial and final states are
    /// always recorded).
    pub stride: usize,
    /// Keep recorded snapshots in the returned trajectory; otherwise only
    /// the observer sees them.
    pub keep: bool,
    /// Reject deterministic steps that raise the energy.
    pub enforce_descent: bool,
    pub scheme: Scheme,
}

impl EvolveOptions {
    pub fn new(mode: Mode) -> Self {
        EvolveOptions { mode, stride: 1, keep: true, enforce_descent: false, scheme: Scheme::default() }
    }

    pub fn scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn stride(mut self, stride: usize) -> Self {
        self.stride = stride.max(1);
        self
    }

    pub fn keep(mut self, keep: bool) -> Self {
        self.keep = keep;
        self
    }

    pub fn enforce_descent(mut self, on: bool) -> Self {
        self.enforce_descent = on;
        self
    }
}

/// Runs `params.steps` steps. Deterministic mode ignores `params.sigma`.
pub fn evolve(
    config: &SpectralConfiguration,
    params: &GasParams,
    options: EvolveOptions,
    mut observer: impl FnMut(&Snapshot),
) -> Result<Trajectory> {
    params.validate()?;
    if config.n() != params.n || config.k() != params.k {
        return Err(Error::InvalidParameter(format!(
            "configuration has (n, k) = ({}, {}), parameters ({}, {})",
            config.n(),
            config.k(),
            params.n,
            params.k
        )));
    }
    let sigma = match options.mode {
        Mode::Stochastic => params.sigma,
        Mode::Deterministic => 0.0,
    };
    let mut it = Integrator::new(config, sigma, params.dt, params.seed)?.scheme(options.scheme).enforce_descent(options.enforce_descent);
    let mut traj = Trajectory::default();
    let mut record = |it: &Integrator, traj: &mut Trajectory| {
        let snap = Snapshot {
            step: it.steps(),
            time: it.time(),
            energy: it.energy(),
            min_separation: it.min_separation(),
            config: it.configuration(),
        };
        observer(&snap);
        if options.keep || traj.snapshots.is_empty() {
            traj.snapshots.push(snap);
        } else {
            traj.snapshots[0] = snap;
        }
    };
    record(&it, &mut traj);
    for s in 1..=params.steps {
        it.step()?;
        if s % options.stride == 0 || s == params.steps {
            record(&it, &mut traj);
        }
    }
    traj.guard_trips = it.guard_trips();
    traj.descent_retries = it.descent_retries();
    Ok(traj)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelaxMethod {
    /// Plain gradient flow with the stability-capped step.
    GradientFlow,
    /// Gradient flow with inertia and adaptive steps (FIRE). Reaches the
    /// same minimiser far faster when soft planar modes dominate.
    Fire,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RelaxParams {
    pub method: RelaxMethod,
    pub dt_max: f64,
    /// Converged once the rms gradient is at most this.
    pub tolerance: f64,
    pub max_steps: usize,
}

impl Default for RelaxParams {
    fn default() -> Self {
        RelaxParams { method: RelaxMethod::Fire, dt_max: 0.05, tolerance: 1e-5, max_steps: 2_000_000 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Relaxed {
    pub config: SpectralConfiguration,
    pub steps: usize,
    pub rms_gradient: f64,
    pub energy: f64,
}

/// Zero-temperature relaxation until the rms gradient drops below the
/// tolerance.
pub fn relax(config: &SpectralConfiguration, params: RelaxParams) -> Result<Relaxed> {
    match params.method {
        RelaxMethod::GradientFlow => relax_gradient_flow(config, params),
        RelaxMethod::Fire => relax_fire(config, params),
    }
}

fn relax_gradient_flow(config: &SpectralConfiguration, params: RelaxParams) -> Result<Relaxed> {
    let mut it = Integrator::new(config, 0.0, params.dt_max, 0)?;
    while it.rms_gradient() > params.tolerance {
        if it.steps() >= params.max_steps {
            return Err(Error::RelaxationStalled { steps: it.steps(), rms_gradient: it.rms_gradient(), tolerance: params.tolerance });
        }
        it.step()?;
    }
    Ok(Relaxed { steps: it.steps(), rms_gradient: it.rms_gradient(), energy: it.energy(), config: it.configuration() })
}

const FIRE_N_MIN: usize = 5;
const FIRE_GROW: f64 = 1.1;
const FIRE_SHRINK: f64 = 0.5;
const FIRE_ALPHA0: f64 = 0.1;
const FIRE_ALPHA_DECAY: f64 = 0.99;
/// No particle moves more than this fraction of the closest distance per step.
const FIRE_MAX_MOVE: f64 = 0.2;

fn relax_fire(config: &SpectralConfiguration, params: RelaxParams) -> Result<Relaxed> {
    let n = config.n();
    let (k, l) = (config.k(), config.l());
    let dof = (k + 2 * l).max(1) as f64;
    let mut xr = config.reals().to_vec();
    let mut xu = config.uppers().to_vec();
    let mut gr = vec![0.0; k];
    let mut gu = vec![Complex64::new(0.0, 0.0); l];
    let mut vr = vec![0.0; k];
    let mut vu = vec![Complex64::new(0.0, 0.0); l];
    let (mut tr, mut tu) = (xr.clone(), xu.clone());
    let mut min_r2 = gradient_into(&xr, &xu, n, &mut gr, &mut gu);
    if min_r2.sqrt() < COLLISION_EPS {
        return Err(crate::potential::total_energy(config).unwrap_err());
    }
    let rms = |gr: &[f64], gu: &[Complex64]| {
        ((gr.iter().map(|g| g * g).sum::<f64>() + gu.iter().map(|g| g.norm_sqr()).sum::<f64>()) / dof).sqrt()
    };
    let mut dt = dt_safe(min_r2.sqrt(), n).min(params.dt_max);
    let mut alpha = FIRE_ALPHA0;
    let mut positive = 0usize;
    let mut steps = 0usize;
    loop {
        let g_rms = rms(&gr, &gu);
        if g_rms <= params.tolerance {
            let cfg = SpectralConfiguration::from_parts_unchecked(xr, xu);
            let energy = energy_parts(cfg.reals(), cfg.uppers(), n).map_or(f64::NAN, |e| e.total);
            return Ok(Relaxed { config: cfg, steps, rms_gradient: g_rms, energy });
        }
        if steps >= params.max_steps {
            return Err(Error::RelaxationStalled { steps, rms_gradient: g_rms, tolerance: params.tolerance });
        }
        steps += 1;

        // power of the force on the current velocity, and the velocity mix
        let power = -(vr.iter().zip(&gr).map(|(v, g)| v * g).sum::<f64>()
            + vu.iter().zip(&gu).map(|(v, g)| v.re * g.re + v.im * g.im).sum::<f64>());
        if power > 0.0 {
            let vnorm = (vr.iter().map(|v| v * v).sum::<f64>() + vu.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt();
            let fnorm = (g_rms * g_rms * dof).sqrt();
            let c = alpha * vnorm / fnorm;
            for (v, g) in vr.iter_mut().zip(&gr) {
                *v = (1.0 - alpha) * *v - c * g;
            }
            for (v, g) in vu.iter_mut().zip(&gu) {
                *v = *v * (1.0 - alpha) - g * c;
            }
            positive += 1;
            if positive > FIRE_N_MIN {
                dt = (dt * FIRE_GROW).min(params.dt_max);
                alpha *= FIRE_ALPHA_DECAY;
            }
        } else {
            vr.iter_mut().for_each(|v| *v = 0.0);
            vu.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            dt *= FIRE_SHRINK;
            alpha = FIRE_ALPHA0;
            positive = 0;
        }

        // semi-implicit Euler, with the displacement capped by the closest distance
        let sep = min_r2.sqrt();
        loop {
            let mut max_move: f64 = 0.0;
            for a in 0..k {
                let v = vr[a] - dt * gr[a];
                max_move = max_move.max((v * dt).abs());
            }
            for b in 0..l {
                let v = vu[b] - gu[b] * dt;
                max_move = max_move.max((v * dt).norm());
            }
            if max_move <= FIRE_MAX_MOVE * sep {
                break;
            }
            dt *= FIRE_SHRINK;
        }
        for a in 0..k {
            vr[a] -= dt * gr[a];
            tr[a] = xr[a] + dt * vr[a];
        }
        for b in 0..l {
            vu[b] -= gu[b] * dt;
            tu[b] = xu[b] + vu[b] * dt;
            tu[b].im = tu[b].im.abs();
        }
        let mut tgr = std::mem::take(&mut gr);
        let mut tgu = std::mem::take(&mut gu);
        let r2 = gradient_into(&tr, &tu, n, &mut tgr, &mut tgu);
        if !(r2.sqrt() >= COLLISION_EPS) || tu.iter().any(|z| z.im == 0.0) {
            // discard the move and restart from rest with a smaller step
            gradient_into(&xr, &xu, n, &mut tgr, &mut tgu);
            gr = tgr;
            gu = tgu;
            vr.iter_mut().for_each(|v| *v = 0.0);
            vu.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            dt *= FIRE_SHRINK;
            continue;
        }
        gr = tgr;
        gu = tgu;
        std::mem::swap(&mut xr, &mut tr);
        std::mem::swap(&mut xu, &mut tu);
        min_r2 = r2;
    }
}
