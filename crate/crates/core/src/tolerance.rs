use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical tolerances shared by every residual check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    pub eq_tol: f64,
    pub root_sep_tol: f64,
    pub fd_step: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            eq_tol: 1e-9,
            root_sep_tol: 1e-8,
            fd_step: 1e-6,
        }
    }
}

impl ToleranceConfig {
    pub fn new(eq_tol: f64, root_sep_tol: f64, fd_step: f64) -> Result<Self> {
        for (name, v) in [("eq_tol", eq_tol), ("root_sep_tol", root_sep_tol), ("fd_step", fd_step)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be finite and positive")));
            }
        }
        Ok(Self {
            eq_tol,
            root_sep_tol,
            fd_step,
        })
    }

    /// Same config with a different `eq_tol`.
    pub fn with_eq_tol(self, eq_tol: f64) -> Result<Self> {
        Self::new(eq_tol, self.root_sep_tol, self.fd_step)
    }
}

/// Relative discrepancy: `|diff| / max(1, scale)`.
pub fn rel(diff: f64, scale: f64) -> f64 {
    diff / scale.max(1.0)
}
