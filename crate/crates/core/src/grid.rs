use crate::error::{Error, Result};

/// Uniform partition of [0, T] into `n` cells (`n + 1` nodes).
///
/// Nodes are computed as `i * T / n` on demand so that `t_0 = 0` and
/// `t_n = T` hold exactly in floating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    n: usize,
    horizon: f64,
}

impl TimeGrid {
    pub fn new(n: usize, horizon: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("grid needs at least one cell".into()));
        }
        if !horizon.is_finite() || horizon <= 0.0 {
            return Err(Error::Domain(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        Ok(Self { n, horizon })
    }

    /// Number of cells; the grid has `n() + 1` nodes.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Cell width T / n.
    pub fn dt(&self) -> f64 {
        self.horizon / self.n as f64
    }

    /// Node t_i = T (i/n), valid for i in 0..=n. The quotient is formed
    /// first so node(n) is exactly T and file round trips are idempotent.
    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i <= self.n);
        self.horizon * (i as f64 / self.n as f64)
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|i| self.node(i)).collect()
    }
}

/// Real-valued function sampled on a [`TimeGrid`]: `values[i]` is the value
/// at node `t_i`. All values are finite by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl SampledPath {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() + 1 {
            return Err(Error::Size(format!(
                "path needs {} values for a {}-cell grid, got {}",
                grid.n() + 1,
                grid.n(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("non-finite path value {v}")));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..=grid.n()).map(|i| f(grid.node(i))).collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: TimeGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.n() + 1],
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// Increments value[i+1] - value[i], length n.
    pub fn increments(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub(crate) fn require_starts_at(&self, v0: f64, what: &str) -> Result<()> {
        if self.values[0] != v0 {
            return Err(Error::Precondition(format!(
                "{what} must start at {v0}, got {}",
                self.values[0]
            )));
        }
        Ok(())
    }

    pub(crate) fn require_same_grid(&self, grid: &TimeGrid) -> Result<()> {
        if self.grid != *grid {
            return Err(Error::Precondition("paths are on different grids".into()));
        }
        Ok(())
    }
}
