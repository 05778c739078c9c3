use crate::error::{Result, WgError};

/// Uniform partition of `[0, T]` into `M` steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_final: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(t_final: f64, steps: usize) -> Result<Self> {
        if !(t_final.is_finite() && t_final > 0.0) || steps == 0 {
            return Err(WgError::Config(format!(
                "time grid needs T > 0 and at least one step (T = {t_final}, M = {steps})"
            )));
        }
        Ok(TimeGrid { t_final, steps })
    }

    /// Grid with step `tau`; `T / tau` must be an integer up to round-off.
    pub fn from_tau(t_final: f64, tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(WgError::Config(format!("time step must be positive, got {tau}")));
        }
        let m = (t_final / tau).round();
        if m < 1.0 || ((m * tau - t_final) / t_final).abs() > 1e-9 {
            return Err(WgError::Config(format!(
                "T = {t_final} is not an integer multiple of tau = {tau}"
            )));
        }
        Self::new(t_final, m as usize)
    }

    pub fn tau(&self) -> f64 {
        self.t_final / self.steps as f64
    }

    /// `t_n = n τ`, with `t_M = T` exactly.
    pub fn node(&self, n: usize) -> f64 {
        if n == self.steps {
            self.t_final
        } else {
            n as f64 * self.t_final / self.steps as f64
        }
    }
}
