use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The model triple (β, α, d) of a generalized grey Brownian motion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub beta: f64,
    pub alpha: f64,
    pub d: usize,
}

impl ModelParams {
    /// Validates 0 < β ≤ 1, 0 < α ≤ 2 and d ≥ 1.
    pub fn new(beta: f64, alpha: f64, d: usize) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::domain(format!("requires 0 < beta <= 1 (got beta = {beta})")));
        }
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::domain(format!("requires 0 < alpha <= 2 (got alpha = {alpha})")));
        }
        if d == 0 {
            return Err(Error::domain("requires dim >= 1"));
        }
        Ok(Self { beta, alpha, d })
    }

    /// Hurst index of the underlying fractional Brownian motion.
    pub fn hurst(&self) -> f64 {
        0.5 * self.alpha
    }

    /// Classical Brownian motion: β = α = 1.
    pub fn is_brownian(&self) -> bool {
        self.beta == 1.0 && self.alpha == 1.0
    }

    pub fn green_exists(&self) -> bool {
        self.check_green().is_ok()
    }

    /// Ok when the Green measure exists: dα > 2 with 1 < α ≤ 2, or the
    /// Brownian case in d ≥ 3. Otherwise the error names the first
    /// inequality that fails.
    pub fn check_green(&self) -> Result<()> {
        if self.is_brownian() {
            return if self.d >= 3 {
                Ok(())
            } else {
                Err(Error::domain(format!(
                    "requires d*alpha > 2 (got d*alpha = {})",
                    self.d as f64 * self.alpha
                )))
            };
        }
        if self.alpha <= 1.0 {
            return Err(Error::domain(format!(
                "requires alpha > 1 (got alpha = {})",
                self.alpha
            )));
        }
        if self.d as f64 * self.alpha <= 2.0 {
            return Err(Error::domain(format!(
                "requires d*alpha > 2 (got d*alpha = {})",
                self.d as f64 * self.alpha
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn green_flags() {
        assert!(ModelParams::new(0.5, 1.5, 2).unwrap().green_exists());
        assert!(ModelParams::new(1.0, 1.0, 3).unwrap().green_exists());
        assert!(!ModelParams::new(1.0, 1.0, 2).unwrap().green_exists());
        assert!(!ModelParams::new(0.5, 1.5, 1).unwrap().green_exists());
        let e = ModelParams::new(0.5, 1.0, 3).unwrap().check_green().unwrap_err();
        assert!(e.to_string().contains("alpha > 1"));
        let e = ModelParams::new(0.5, 1.9, 1).unwrap().check_green().unwrap_err();
        assert!(e.to_string().contains("d*alpha > 2"));
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(ModelParams::new(0.0, 1.0, 1).is_err());
        assert!(ModelParams::new(1.1, 1.0, 1).is_err());
        assert!(ModelParams::new(0.5, 2.5, 1).is_err());
        assert!(ModelParams::new(0.5, 1.0, 0).is_err());
    }
}
