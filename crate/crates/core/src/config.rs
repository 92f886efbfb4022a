use crate::error::{domain, Result};

/// Numerical tolerances and randomness controls shared by every routine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceConfig {
    /// Relative tolerance for algebraic identity checks.
    pub algebraic_tol: f64,
    /// Relative tolerance for optimisation gaps and convergence.
    pub opt_tol: f64,
    /// Relative singular-value cutoff for supports and pseudo-inverses.
    pub rank_cutoff: f64,
    /// Number of optimiser restarts.
    pub restarts: usize,
    /// Seed for every randomized routine.
    pub seed: u64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            algebraic_tol: 1e-9,
            opt_tol: 1e-6,
            rank_cutoff: 1e-10,
            restarts: 3,
            seed: 0,
        }
    }
}

impl ToleranceConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.algebraic_tol) || !positive(self.opt_tol) || !positive(self.rank_cutoff) {
            return Err(domain!("tolerances must be finite and > 0"));
        }
        if self.restarts == 0 {
            return Err(domain!("restarts must be at least 1"));
        }
        Ok(())
    }

    /// Seed for the `index`-th independent stream derived from this config.
    pub fn derived_seed(&self, index: u64) -> u64 {
        // splitmix64 step
        let mut z = self.seed.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index + 1));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        ToleranceConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_zero_restarts_and_bad_tolerances() {
        let cfg = ToleranceConfig { restarts: 0, ..Default::default() };
        assert!(cfg.validate().is_err());
        let cfg = ToleranceConfig { opt_tol: 0.0, ..Default::default() };
        assert!(cfg.validate().is_err());
        let cfg = ToleranceConfig { rank_cutoff: f64::NAN, ..Default::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn derived_seeds_differ() {
        let cfg = ToleranceConfig::default();
        assert_ne!(cfg.derived_seed(0), cfg.derived_seed(1));
        assert_eq!(cfg.derived_seed(3), cfg.derived_seed(3));
    }
}
