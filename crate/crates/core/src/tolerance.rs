use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical tolerances shared by every check in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Absolute tolerance on matrix entries, traces and overlaps.
    pub abs_tol: f64,
    /// Singular values at or below `rank_rel_tol * sigma_max` count as zero.
    pub rank_rel_tol: f64,
    /// Residual below which a nonnegative weight system is feasible.
    pub nnls_residual_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { abs_tol: 1e-9, rank_rel_tol: 1e-8, nnls_residual_tol: 1e-7 }
    }
}

impl Tolerances {
    pub fn new(abs_tol: f64, rank_rel_tol: f64, nnls_residual_tol: f64) -> Result<Self> {
        let t = Tolerances { abs_tol, rank_rel_tol, nnls_residual_tol };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("abs_tol", self.abs_tol),
            ("rank_rel_tol", self.rank_rel_tol),
            ("nnls_residual_tol", self.nnls_residual_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidModel(format!("tolerance {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_positive() {
        assert!(Tolerances::default().validate().is_ok());
        assert!(Tolerances::new(0.0, 1e-8, 1e-7).is_err());
        assert!(Tolerances::new(1e-9, f64::NAN, 1e-7).is_err());
    }
}
