//! The gas energy `Φ = Σ_{i≠j} V(λ_i, λ_j)/(2n) + Σ_i U(λ_i)` with
//! `V = −log|λ_i − λ_j|` and the erfc-corrected confinement `U`.
//!
//! Sums run over all `n` particles, implicit conjugates included. In the
//! half representation the unordered pairs are organised as
//!
//! * real–real,
//! * real–upper, counted twice (the conjugate is at the same distance),
//! * upper–upper, as `2 log|z − w| + 2 log|z − w*|`,
//! * each upper with its own conjugate, at distance `2y`,
//!
//! and the confinement of an upper particle is counted twice. Loops always
//! run in this order with compensated accumulation, so energies are
//! reproducible bit for bit.

mod erfc;

pub use erfc::{dlog_erfc, erfc, erfcx, log_erfc};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::SpectralConfiguration;
use crate::error::{Error, ParticleRef, Result};
use crate::sum::Neumaier;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub interaction: f64,
    pub confinement: f64,
    pub total: f64,
}

/// `∇Φ` in the half representation. Real particles only carry an
/// x-component; upper entries pack `(∂Φ/∂x, ∂Φ/∂y)` as `re`/`im`, and
/// include the pull through the implicit conjugate.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradient {
    pub reals: Vec<f64>,
    pub uppers: Vec<Complex64>,
}

impl Gradient {
    pub fn zeros(k: usize, l: usize) -> Self {
        Gradient { reals: vec![0.0; k], uppers: vec![Complex64::new(0.0, 0.0); l] }
    }

    /// Root mean square over all represented coordinates.
    pub fn rms(&self) -> f64 {
        let dof = self.reals.len() + 2 * self.uppers.len();
        if dof == 0 {
            return 0.0;
        }
        let s: f64 = self.reals.iter().map(|g| g * g).sum::<f64>() + self.uppers.iter().map(|g| g.norm_sqr()).sum::<f64>();
        (s / dof as f64).sqrt()
    }
}

/// Single-particle confinement `U(λ)` for a gas of `n` particles.
///
/// On the axis this is `x²/2`; off the axis
/// `x²/2 − y²/2 − log erfc(|y|√(2n)) / (2n)`, which tends to `x²/2` as
/// `y → 0` and is used as the continuous extension there.
pub fn confinement(point: Complex64, n: usize) -> f64 {
    let x = point.re;
    let y = point.im;
    if y == 0.0 {
        return 0.5 * x * x;
    }
    let nf = n as f64;
    0.5 * x * x - 0.5 * y * y - log_erfc(y.abs() * (2.0 * nf).sqrt()) / (2.0 * nf)
}

/// `∂U/∂y` for `y > 0`.
pub(crate) fn confinement_dy(y: f64, n: usize) -> f64 {
    let nf = n as f64;
    let s = (2.0 * nf).sqrt();
    -y + s * dlog_erfc(y * s) * (-1.0 / (2.0 * nf))
}

/// Energy from raw parts; `None` when two points coincide.
pub(crate) fn energy_parts(reals: &[f64], uppers: &[Complex64], n: usize) -> Option<EnergyBreakdown> {
    let inv_n = 1.0 / n as f64;
    let mut pairs = Neumaier::new();
    for (a, &xa) in reals.iter().enumerate() {
        for &xb in &reals[a + 1..] {
            let d2 = (xa - xb) * (xa - xb);
            if d2 == 0.0 {
                return None;
            }
            pairs.add(-0.5 * d2.ln());
        }
    }
    for &x in reals {
        for z in uppers {
            let du = z.re - x;
            let r2 = du * du + z.im * z.im;
            pairs.add(-r2.ln());
        }
    }
    for (b, zb) in uppers.iter().enumerate() {
        for zc in &uppers[b + 1..] {
            let du = zb.re - zc.re;
            let dv = zb.im - zc.im;
            let s = zb.im + zc.im;
            let r2a = du * du + dv * dv;
            if r2a == 0.0 {
                return None;
            }
            let r2b = du * du + s * s;
            pairs.add(-(r2a.ln() + r2b.ln()));
        }
    }
    for z in uppers {
        pairs.add(-(2.0 * z.im).ln());
    }
    let interaction = inv_n * pairs.value();

    let mut conf = Neumaier::new();
    for &x in reals {
        conf.add(0.5 * x * x);
    }
    for z in uppers {
        conf.add(2.0 * confinement(*z, n));
    }
    let confinement = conf.value();
    Some(EnergyBreakdown { interaction, confinement, total: interaction + confinement })
}

/// Writes `∇Φ` into `gr`/`gu` and returns the smallest squared distance
/// between any two of the `n` particles.
pub(crate) fn gradient_into(reals: &[f64], uppers: &[Complex64], n: usize, gr: &mut [f64], gu: &mut [Complex64]) -> f64 {
    gradient_and_separations(reals, uppers, n, gr, gu).0
}

/// As [`gradient_into`], also returning the smallest squared distance over
/// pairs with at least one off-axis member, excluding each upper particle
/// with its own conjugate.
pub(crate) fn gradient_and_separations(reals: &[f64], uppers: &[Complex64], n: usize, gr: &mut [f64], gu: &mut [Complex64]) -> (f64, f64) {
    let k = reals.len();
    let l = uppers.len();
    debug_assert_eq!(gr.len(), k);
    debug_assert_eq!(gu.len(), l);
    let inv_n = 1.0 / n as f64;
    let two_inv_n = 2.0 * inv_n;
    let mut min_r2 = f64::INFINITY;
    let mut min_planar = f64::INFINITY;

    for (g, &x) in gr.iter_mut().zip(reals) {
        *g = x;
    }
    for (g, z) in gu.iter_mut().zip(uppers) {
        *g = Complex64::new(2.0 * z.re, 2.0 * confinement_dy(z.im, n) - inv_n / z.im);
        min_r2 = min_r2.min(4.0 * z.im * z.im);
    }

    for a in 0..k {
        let xa = reals[a];
        let mut acc = 0.0;
        for b in a + 1..k {
            let d = xa - reals[b];
            let d2 = d * d;
            if d2 < min_r2 {
                min_r2 = d2;
            }
            let f = inv_n / d;
            acc -= f;
            gr[b] += f;
        }
        gr[a] += acc;
    }

    for a in 0..k {
        let x = reals[a];
        let mut acc = 0.0;
        for (g, z) in gu.iter_mut().zip(uppers) {
            let du = z.re - x;
            let v = z.im;
            let r2 = du * du + v * v;
            min_planar = min_planar.min(r2);
            let c = two_inv_n / r2;
            acc += c * du;
            g.re -= c * du;
            g.im -= c * v;
        }
        gr[a] += acc;
    }

    for b in 0..l {
        let zb = uppers[b];
        let mut acc_u = 0.0;
        let mut acc_v = 0.0;
        for c in b + 1..l {
            let zc = uppers[c];
            let du = zb.re - zc.re;
            let dv = zb.im - zc.im;
            let s = zb.im + zc.im;
            let r2a = du * du + dv * dv;
            min_planar = min_planar.min(r2a);
            let r2b = du * du + s * s;
            let ia = two_inv_n / r2a;
            let ib = two_inv_n / r2b;
            let fu = du * (ia + ib);
            acc_u -= fu;
            acc_v -= dv * ia + s * ib;
            gu[c].re += fu;
            gu[c].im += dv * ia - s * ib;
        }
        gu[b].re += acc_u;
        gu[b].im += acc_v;
    }
    (min_r2.min(min_planar), min_planar)
}

/// The closest pair among all `n` particles, conjugates included.
pub(crate) fn closest_pair(reals: &[f64], uppers: &[Complex64]) -> Option<(ParticleRef, ParticleRef, f64)> {
    let mut best: Option<(ParticleRef, ParticleRef, f64)> = None;
    let mut consider = |a: ParticleRef, b: ParticleRef, d: f64| {
        if best.is_none_or(|(_, _, bd)| d < bd) {
            best = Some((a, b, d));
        }
    };
    for (a, &xa) in reals.iter().enumerate() {
        for (b, &xb) in reals.iter().enumerate().skip(a + 1) {
            consider(ParticleRef::Real(a), ParticleRef::Real(b), (xa - xb).abs());
        }
        for (b, z) in uppers.iter().enumerate() {
            consider(ParticleRef::Real(a), ParticleRef::Upper(b), (z - xa).norm());
        }
    }
    for (b, zb) in uppers.iter().enumerate() {
        consider(ParticleRef::Upper(b), ParticleRef::Conjugate(b), 2.0 * zb.im);
        for (c, zc) in uppers.iter().enumerate().skip(b + 1) {
            consider(ParticleRef::Upper(b), ParticleRef::Upper(c), (zb - zc).norm());
        }
    }
    best
}

fn collision_error(config: &SpectralConfiguration) -> Error {
    let (a, b, separation) = closest_pair(config.reals(), config.uppers()).expect("a collision needs at least two particles");
    Error::Collision { a, b, separation }
}

/// `Φ` split into interaction and confinement.
pub fn total_energy(config: &SpectralConfiguration) -> Result<EnergyBreakdown> {
    energy_parts(config.reals(), config.uppers(), config.n()).ok_or_else(|| collision_error(config))
}

/// `∇Φ` for every represented particle.
pub fn grad_energy(config: &SpectralConfiguration) -> Result<Gradient> {
    let mut g = Gradient::zeros(config.k(), config.l());
    let min_r2 = gradient_into(config.reals(), config.uppers(), config.n(), &mut g.reals, &mut g.uppers);
    if min_r2 == 0.0 {
        return Err(collision_error(config));
    }
    Ok(g)
}
