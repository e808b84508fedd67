//! Shared numeric policy for grid scans and verdicts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_GRID: usize = 1001;
pub const MIN_GRID: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSettings {
    /// Points per axis, endpoints included.
    pub grid_n: usize,
    /// Iterations of the cell-confined polish after the grid pass.
    pub refine_iters: usize,
    /// Slack allowed before a condition is declared violated.
    pub tol_condition: f64,
    /// Slack used when comparing extrema (e.g. interior vs boundary maximum).
    pub tol_extremum: f64,
}

impl Default for ScanSettings {
    fn default() -> Self {
        Self {
            grid_n: DEFAULT_GRID,
            refine_iters: 60,
            tol_condition: 1e-9,
            tol_extremum: 1e-10,
        }
    }
}

impl ScanSettings {
    pub fn new(
        grid_n: usize,
        refine_iters: usize,
        tol_condition: f64,
        tol_extremum: f64,
    ) -> Result<Self> {
        let s = Self {
            grid_n,
            refine_iters,
            tol_condition,
            tol_extremum,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_grid(grid_n: usize) -> Result<Self> {
        Self {
            grid_n,
            ..Self::default()
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_n < MIN_GRID {
            return Err(Error::InvalidSettings(format!(
                "grid_n = {} is below {MIN_GRID}",
                self.grid_n
            )));
        }
        for (name, tol) in [
            ("tol_condition", self.tol_condition),
            ("tol_extremum", self.tol_extremum),
        ] {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(Error::InvalidSettings(format!("{name} = {tol} must be positive")));
            }
        }
        Ok(())
    }

    /// Spacing of the uniform grid.
    pub fn step(&self) -> f64 {
        1.0 / (self.grid_n - 1) as f64
    }
}
