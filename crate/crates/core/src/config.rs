//! Conjugate-symmetric particle configurations.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `k` real particles and `l` upper-half-plane particles; the conjugate of
/// every upper particle is implicit, so `n = k + 2l`.
///
/// Values are validated on construction: every coordinate is finite, every
/// upper particle has `y > 0`, and no two represented points coincide.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfiguration", into = "RawConfiguration")]
pub struct SpectralConfiguration {
    reals: Vec<f64>,
    uppers: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct RawConfiguration {
    reals: Vec<f64>,
    uppers: Vec<[f64; 2]>,
}

impl TryFrom<RawConfiguration> for SpectralConfiguration {
    type Error = Error;

    fn try_from(raw: RawConfiguration) -> Result<Self> {
        let uppers = raw.uppers.iter().map(|p| Complex64::new(p[0], p[1])).collect();
        make_configuration(raw.reals, uppers)
    }
}

impl From<SpectralConfiguration> for RawConfiguration {
    fn from(c: SpectralConfiguration) -> Self {
        RawConfiguration { uppers: c.uppers.iter().map(|z| [z.re, z.im]).collect(), reals: c.reals }
    }
}

/// Validates and builds a configuration.
pub fn make_configuration(reals: Vec<f64>, uppers: Vec<Complex64>) -> Result<SpectralConfiguration> {
    if let Some(x) = reals.iter().find(|x| !x.is_finite()) {
        return Err(Error::MalformedConfiguration(format!("non-finite real coordinate {x}")));
    }
    if let Some(z) = uppers.iter().find(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::MalformedConfiguration(format!("non-finite upper coordinate {z}")));
    }
    if let Some(z) = uppers.iter().find(|z| z.im <= 0.0) {
        return Err(Error::MalformedConfiguration(format!("upper particle {z} must have strictly positive imaginary part")));
    }
    let mut seen = HashSet::with_capacity(reals.len());
    for x in &reals {
        // +0.0 and -0.0 are the same point
        if !seen.insert((x + 0.0).to_bits()) {
            return Err(Error::MalformedConfiguration(format!("duplicate real coordinate {x}")));
        }
    }
    let mut seen = HashSet::with_capacity(uppers.len());
    for z in &uppers {
        if !seen.insert(((z.re + 0.0).to_bits(), z.im.to_bits())) {
            return Err(Error::MalformedConfiguration(format!("duplicate upper point {z}")));
        }
    }
    Ok(SpectralConfiguration { reals, uppers })
}

impl SpectralConfiguration {
    pub fn reals(&self) -> &[f64] {
        &self.reals
    }

    pub fn uppers(&self) -> &[Complex64] {
        &self.uppers
    }

    /// Number of real particles.
    pub fn k(&self) -> usize {
        self.reals.len()
    }

    /// Number of represented upper particles (conjugate pairs).
    pub fn l(&self) -> usize {
        self.uppers.len()
    }

    /// Total particle count including implicit conjugates.
    pub fn n(&self) -> usize {
        self.reals.len() + 2 * self.uppers.len()
    }

    /// All `n` points, conjugates materialized: reals, then uppers, then
    /// their conjugates in the same order.
    pub fn points(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.n());
        out.extend(self.reals.iter().map(|&x| Complex64::new(x, 0.0)));
        out.extend_from_slice(&self.uppers);
        out.extend(self.uppers.iter().map(|z| z.conj()));
        out
    }

    /// The configuration reflected through the imaginary axis, `z -> -z*`.
    pub fn mirrored(&self) -> SpectralConfiguration {
        SpectralConfiguration {
            reals: self.reals.iter().map(|x| -x).collect(),
            uppers: self.uppers.iter().map(|z| Complex64::new(-z.re, z.im)).collect(),
        }
    }

    /// Builds from raw parts the caller has already checked. Integrators use
    /// this to avoid re-hashing every coordinate at each snapshot.
    pub(crate) fn from_parts_unchecked(reals: Vec<f64>, uppers: Vec<Complex64>) -> Self {
        debug_assert!(uppers.iter().all(|z| z.im > 0.0));
        SpectralConfiguration { reals, uppers }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// The closest integer to `alpha * n` with the parity of `n`.
pub fn round_to_parity(alpha: f64, n: usize) -> Result<usize> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must lie in [0, 1]")));
    }
    let target = alpha * n as f64;
    let candidates = (0..=n).filter(|k| (n - k).is_multiple_of(2));
    // ties go to the smaller k
    let k = candidates
        .min_by(|a, b| {
            let da = (*a as f64 - target).abs();
            let db = (*b as f64 - target).abs();
            da.partial_cmp(&db).unwrap().then(a.cmp(b))
        })
        .expect("n >= 0 always has a parity-compatible k");
    Ok(k)
}

/// Default starting data: reals i.i.d. uniform on `[-1, 1]`, upper particles
/// uniform on the half-disk of radius 1 restricted to `y >= 0.05`.
pub fn initial_configuration<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<SpectralConfiguration> {
    check_counts(n, k)?;
    let l = (n - k) / 2;
    let reals: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut uppers = Vec::with_capacity(l);
    while uppers.len() < l {
        let r = rng.random::<f64>().sqrt();
        let theta = PI * rng.random::<f64>();
        let z = Complex64::from_polar(r, theta);
        if z.im >= 0.05 {
            uppers.push(z);
        }
    }
    make_configuration(reals, uppers)
}

pub fn check_counts(n: usize, k: usize) -> Result<()> {
    if k > n {
        return Err(Error::InvalidParameter(format!("k = {k} exceeds n = {n}")));
    }
    if !(n - k).is_multiple_of(2) {
        return Err(Error::Parity { n, k });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Domain};

    #[test]
    fn counting_identities() {
        let c = make_configuration(vec![0.0], vec![]).unwrap();
        assert_eq!((c.n(), c.k()), (1, 1));
        let c = make_configuration(vec![], vec![Complex64::new(0.0, 1.0)]).unwrap();
        assert_eq!((c.n(), c.k()), (2, 0));
        let c = make_configuration(vec![-1.0, 1.0], vec![Complex64::new(0.0, 0.5)]).unwrap();
        assert_eq!((c.n(), c.k(), c.l()), (4, 2, 1));
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(make_configuration(vec![], vec![Complex64::new(0.0, 0.0)]).is_err());
        assert!(make_configuration(vec![], vec![Complex64::new(0.0, -1.0)]).is_err());
        assert!(make_configuration(vec![1.0, 1.0], vec![]).is_err());
        assert!(make_configuration(vec![0.0, -0.0], vec![]).is_err());
        assert!(make_configuration(vec![f64::NAN], vec![]).is_err());
        assert!(make_configuration(vec![], vec![Complex64::new(f64::INFINITY, 1.0)]).is_err());
        let z = Complex64::new(0.3, 0.2);
        assert!(make_configuration(vec![], vec![z, z]).is_err());
    }

    #[test]
    fn json_format() {
        let c = make_configuration(vec![-1.0, 1.0], vec![Complex64::new(0.0, 0.5)]).unwrap();
        assert_eq!(c.to_json().unwrap(), r#"{"reals":[-1.0,1.0],"uppers":[[0.0,0.5]]}"#);
        let back = SpectralConfiguration::from_json(r#"{"reals":[-1,1],"uppers":[[0,0.5]]}"#).unwrap();
        assert_eq!(back, c);
        assert!(SpectralConfiguration::from_json(r#"{"reals":[],"uppers":[[0,-0.5]]}"#).is_err());
    }

    #[test]
    fn parity_rounding() {
        assert_eq!(round_to_parity(0.5, 100).unwrap(), 50);
        assert_eq!(round_to_parity(0.5, 50).unwrap(), 24); // 25 has the wrong parity; tie -> smaller
        assert_eq!(round_to_parity(0.52, 50).unwrap(), 26);
        assert_eq!(round_to_parity(1.0, 7).unwrap(), 7);
        assert_eq!(round_to_parity(0.0, 7).unwrap(), 1);
        assert!(round_to_parity(1.5, 10).is_err());
    }

    #[test]
    fn initial_data_respects_counts() {
        let mut rng = stream(1, Domain::Init, 0);
        let c = initial_configuration(21, 7, &mut rng).unwrap();
        assert_eq!((c.n(), c.k(), c.l()), (21, 7, 7));
        assert!(c.uppers().iter().all(|z| z.im >= 0.05 && z.norm() <= 1.0));
        assert!(c.reals().iter().all(|x| x.abs() <= 1.0));
        assert!(matches!(initial_configuration(21, 6, &mut rng), Err(Error::Parity { .. })));
    }
}
