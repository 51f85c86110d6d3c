use crate::error::{Error, Result};

/// Interior-point settings. Tolerances are absolute on `μ` and relative to
/// `1 + ‖b‖` on the residual norms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub eps_feas: f64,
    pub eps_gap: f64,
    pub max_iters: usize,
    /// Fraction-to-boundary factor.
    pub gamma: f64,
    /// Centering factor `δ = σ_c μ`.
    pub sigma_c: f64,
    /// Start with `δ = μ0` (pure centering) instead of `σ_c μ0`.
    pub center_first: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { eps_feas: 1e-8, eps_gap: 1e-8, max_iters: 100, gamma: 0.95, sigma_c: 0.4, center_first: true }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidOptions(m.into()));
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad("gamma must lie in (0, 1)");
        }
        if !(self.sigma_c > 0.0 && self.sigma_c < 1.0) {
            return bad("sigma_c must lie in (0, 1)");
        }
        if !(self.eps_feas > 0.0 && self.eps_gap > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1");
        }
        Ok(())
    }
}
