//! Weighted, conjugate-symmetric point measures on the plane.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::SpectralConfiguration;
use crate::error::{Error, Result};
use crate::sum::Neumaier;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub point: Complex64,
    pub weight: f64,
}

/// A finite weighted point set closed under conjugation.
///
/// Every off-axis atom has its mirror with a bit-identical weight, and
/// `total_mass` is the compensated sum of the weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    atoms: Vec<Atom>,
    total_mass: f64,
}

impl EmpiricalMeasure {
    /// Builds a measure from on-axis atoms and upper-half-plane atoms; the
    /// lower half is materialized by conjugation.
    pub fn from_halves(on_axis: &[(f64, f64)], upper: &[(Complex64, f64)]) -> Result<Self> {
        let mut atoms = Vec::with_capacity(on_axis.len() + 2 * upper.len());
        for &(x, w) in on_axis {
            atoms.push(Atom { point: Complex64::new(x, 0.0), weight: w });
        }
        for &(z, w) in upper {
            if z.im <= 0.0 {
                return Err(Error::MalformedConfiguration(format!("upper atom {z} is not above the axis")));
            }
            atoms.push(Atom { point: z, weight: w });
        }
        for &(z, w) in upper {
            atoms.push(Atom { point: z.conj(), weight: w });
        }
        Self::from_atoms(atoms)
    }

    /// Validates an explicit atom list: finite points, positive weights and
    /// exact conjugate symmetry.
    pub fn from_atoms(atoms: Vec<Atom>) -> Result<Self> {
        for a in &atoms {
            if !(a.point.re.is_finite() && a.point.im.is_finite()) {
                return Err(Error::MalformedConfiguration(format!("non-finite atom {}", a.point)));
            }
            if !(a.weight > 0.0 && a.weight.is_finite()) {
                return Err(Error::MalformedConfiguration(format!("atom weight {} must be positive", a.weight)));
            }
        }
        let key = |z: Complex64, w: f64| ((z.re + 0.0).to_bits(), (z.im + 0.0).to_bits(), w.to_bits());
        let mut off: Vec<_> = atoms.iter().filter(|a| a.point.im != 0.0).map(|a| key(a.point, a.weight)).collect();
        let mut mirrored: Vec<_> = atoms.iter().filter(|a| a.point.im != 0.0).map(|a| key(a.point.conj(), a.weight)).collect();
        off.sort_unstable();
        mirrored.sort_unstable();
        if off != mirrored {
            return Err(Error::MalformedConfiguration("measure is not conjugate-symmetric".into()));
        }
        let total_mass = atoms.iter().map(|a| a.weight).collect::<Neumaier>().value();
        Ok(EmpiricalMeasure { atoms, total_mass })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Mass carried by atoms on the real axis.
    pub fn on_axis_mass(&self) -> f64 {
        self.atoms.iter().filter(|a| a.point.im == 0.0).map(|a| a.weight).collect::<Neumaier>().value()
    }

    pub fn on_axis_count(&self) -> usize {
        self.atoms.iter().filter(|a| a.point.im == 0.0).count()
    }

    /// `t·self + (1-t)·other`. Coincident atoms are kept separate.
    pub fn mix(&self, other: &EmpiricalMeasure, t: f64) -> Result<EmpiricalMeasure> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidParameter(format!("mixing weight {t} outside [0, 1]")));
        }
        let a = self.total_mass;
        let b = other.total_mass;
        let atoms = self
            .atoms
            .iter()
            .map(|x| Atom { point: x.point, weight: t * x.weight / a })
            .chain(other.atoms.iter().map(|x| Atom { point: x.point, weight: (1.0 - t) * x.weight / b }))
            .filter(|x| x.weight > 0.0)
            .collect();
        EmpiricalMeasure::from_atoms(atoms)
    }

    /// Reflection through the real axis. Returns the same atom set reordered.
    pub fn conjugated(&self) -> EmpiricalMeasure {
        EmpiricalMeasure {
            atoms: self.atoms.iter().map(|a| Atom { point: a.point.conj(), weight: a.weight }).collect(),
            total_mass: self.total_mass,
        }
    }

    /// Reflection through the imaginary axis, `z -> -z*`.
    pub fn mirrored(&self) -> EmpiricalMeasure {
        EmpiricalMeasure {
            atoms: self.atoms.iter().map(|a| Atom { point: Complex64::new(-a.point.re, a.point.im), weight: a.weight }).collect(),
            total_mass: self.total_mass,
        }
    }

    /// CSV with header `re,im,weight`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "re,im,weight")?;
        for a in &self.atoms {
            writeln!(w, "{},{},{}", a.point.re, a.point.im, a.weight)?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_csv(f)
    }
}

/// The empirical measure `(1/n) Σ δ(λ_i)` with conjugates materialized.
pub fn to_measure(config: &SpectralConfiguration) -> EmpiricalMeasure {
    let n = config.n();
    let w = 1.0 / n as f64;
    let atoms = config.points().into_iter().map(|point| Atom { point, weight: w }).collect::<Vec<_>>();
    let total_mass = atoms.iter().map(|a| a.weight).collect::<Neumaier>().value();
    EmpiricalMeasure { atoms, total_mass }
}

/// `Σ w |z|² / Σ w`.
pub fn second_moment(measure: &EmpiricalMeasure) -> Result<f64> {
    if measure.is_empty() || measure.total_mass() <= 0.0 {
        return Err(Error::Degenerate("second moment of an empty measure".into()));
    }
    let s = measure.atoms().iter().map(|a| a.weight * a.point.norm_sqr()).collect::<Neumaier>();
    Ok(s.value() / measure.total_mass())
}
