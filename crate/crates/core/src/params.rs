use serde::{Deserialize, Serialize};

use crate::config::check_counts;
use crate::error::{Error, Result};

/// Parameters of the gas dynamics `dλ = (σ/√n) dB − ∇Φ dt`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GasParams {
    pub n: usize,
    pub k: usize,
    /// Noise amplitude; `√2` gives the Ginibre stationary law.
    pub sigma: f64,
    /// Upper bound on the time step; the integrator may take smaller ones.
    pub dt: f64,
    pub steps: usize,
    pub seed: u64,
}

impl GasParams {
    pub fn new(n: usize, k: usize, sigma: f64, dt: f64, steps: usize, seed: u64) -> Result<Self> {
        let p = GasParams { n, k, sigma, dt, steps, seed };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_counts(self.n, self.k)?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma = {} must be nonnegative", self.sigma)));
        }
        Ok(())
    }

    /// Noise beyond `σ² = 2` is outside the regime where collisions are
    /// ruled out.
    pub fn is_supercritical(&self) -> bool {
        self.sigma * self.sigma > 2.0 + 1e-12
    }
}
