//! Uniform time grids, discrete Brownian trajectories and solver output paths.

use crate::error::{Error, Result};

/// Uniform partition of `[0, horizon]` into `steps` cells (`steps + 1` nodes).
///
/// Nodes are computed, not stored, so the type is `Copy` and cheap to pass
/// around; `node(steps)` returns the horizon exactly.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn uniform(horizon: f64, steps: usize) -> Result<Self> {
        if !horizon.is_finite() || horizon <= 0.0 {
            return Err(Error::invalid(format!("horizon must be positive, got {horizon}")));
        }
        if steps < 2 {
            return Err(Error::invalid(format!("grid needs at least 2 steps, got {steps}")));
        }
        Ok(TimeGrid { horizon, steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Number of cells; the grid has `steps() + 1` nodes.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    /// Node `i`, exact at both endpoints.
    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i <= self.steps);
        self.horizon * i as f64 / self.steps as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps).map(move |i| self.node(i))
    }

    /// Index of a time that must sit on the grid (relative slack 1e-9).
    pub fn index_of(&self, t: f64) -> Result<usize> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::domain(format!("time {t} outside [0, {}]", self.horizon)));
        }
        let i = (t / self.horizon * self.steps as f64).round() as usize;
        let i = i.min(self.steps);
        if (t - self.node(i)).abs() > 1e-9 * self.horizon.max(1.0) {
            return Err(Error::domain(format!("time {t} is not a grid node")));
        }
        Ok(i)
    }

    /// Grid with the same horizon and `factor` times fewer cells.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 || self.steps % factor != 0 {
            return Err(Error::invalid(format!(
                "cannot coarsen {} steps by factor {factor}",
                self.steps
            )));
        }
        TimeGrid::uniform(self.horizon, self.steps / factor)
    }
}

/// A discrete Brownian trajectory sampled on a [`TimeGrid`], `w[0] = 0`.
#[derive(Debug, Clone)]
pub struct BrownianPath {
    pub grid: TimeGrid,
    pub w: Vec<f64>,
}

impl BrownianPath {
    pub fn new(grid: TimeGrid, w: Vec<f64>) -> Result<Self> {
        if w.len() != grid.steps() + 1 {
            return Err(Error::invalid(format!(
                "path has {} values for a grid with {} nodes",
                w.len(),
                grid.steps() + 1
            )));
        }
        if w[0] != 0.0 {
            return Err(Error::invalid(format!("Brownian path must start at 0, got {}", w[0])));
        }
        Ok(BrownianPath { grid, w })
    }

    pub fn terminal(&self) -> f64 {
        *self.w.last().unwrap()
    }

    pub fn increment(&self, i: usize) -> f64 {
        self.w[i + 1] - self.w[i]
    }

    /// Keep every `stride`-th node; the result is again an exact Brownian
    /// sample on the coarser grid (used by refinement studies).
    pub fn subsample(&self, stride: usize) -> Result<BrownianPath> {
        let grid = self.grid.coarsen(stride)?;
        let w = self.w.iter().step_by(stride).copied().collect();
        BrownianPath::new(grid, w)
    }
}

/// Discrete `(Y, Z)` solution produced by a solver. `y` has one value per
/// node; `z` is defined on the cells, so it has one value fewer (the control
/// is undefined at the terminal node).
#[derive(Debug, Clone)]
pub struct SolutionPath {
    pub grid: TimeGrid,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
}

impl SolutionPath {
    pub fn terminal(&self) -> f64 {
        *self.y.last().unwrap()
    }

    pub fn validate_finite(&self) -> Result<()> {
        if self.y.iter().chain(self.z.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("solution path contains NaN or infinity".into()));
        }
        Ok(())
    }
}
