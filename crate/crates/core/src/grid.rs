use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Slack used when snapping times to cell boundaries, in units of one step.
const SNAP_SLACK: f64 = 1e-9;

/// Uniform discretization of `[0, horizon)` into `cells` half-open cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid", into = "RawGrid")]
pub struct Grid {
    horizon: f64,
    cells: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    #[serde(rename = "T")]
    horizon: f64,
    #[serde(rename = "M")]
    cells: usize,
}

impl TryFrom<RawGrid> for Grid {
    type Error = crate::error::ChaosError;

    fn try_from(raw: RawGrid) -> Result<Self> {
        Grid::new(raw.horizon, raw.cells)
    }
}

impl From<Grid> for RawGrid {
    fn from(g: Grid) -> Self {
        RawGrid {
            horizon: g.horizon,
            cells: g.cells,
        }
    }
}

impl Grid {
    pub fn new(horizon: f64, cells: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(invalid!("grid horizon must be positive and finite, got {horizon}"));
        }
        if cells == 0 {
            return Err(invalid!("grid needs at least one cell"));
        }
        if cells > u32::MAX as usize {
            return Err(invalid!("too many cells: {cells}"));
        }
        Ok(Grid { horizon, cells })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn step(&self) -> f64 {
        self.horizon / self.cells as f64
    }

    /// Index of the cell `[i·step, (i+1)·step)` containing `t`.
    pub fn cell_of(&self, t: f64) -> Result<usize> {
        if !(t >= 0.0 && t < self.horizon) {
            return Err(invalid!("time {t} outside [0, {})", self.horizon));
        }
        let i = (t / self.step()).floor() as usize;
        Ok(i.min(self.cells - 1))
    }

    pub fn cell_start(&self, i: usize) -> f64 {
        i as f64 * self.step()
    }

    /// Number of whole cells in `[0, t)`, i.e. `t` snapped down to a boundary.
    pub fn boundary_below(&self, t: f64) -> Result<usize> {
        if !(t >= 0.0 && t <= self.horizon * (1.0 + SNAP_SLACK)) {
            return Err(invalid!("time {t} outside [0, {}]", self.horizon));
        }
        let b = (t / self.step() + SNAP_SLACK).floor() as usize;
        Ok(b.min(self.cells))
    }

    /// Boundary index of `t` when `t` lies on a cell boundary.
    pub fn aligned_boundary(&self, t: f64) -> Option<usize> {
        let b = self.boundary_below(t).ok()?;
        let x = t / self.step();
        ((x - b as f64).abs() <= SNAP_SLACK * x.max(1.0)).then_some(b)
    }

    /// Cell range `[a, b)` after snapping both endpoints down; errors when empty.
    pub fn cell_range(&self, a: f64, b: f64) -> Result<std::ops::Range<usize>> {
        let lo = self.boundary_below(a)?;
        let hi = self.boundary_below(b)?;
        if lo >= hi {
            return Err(invalid!("interval [{a}, {b}) is empty after snapping to the grid"));
        }
        Ok(lo..hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_and_lookup() {
        let g = Grid::new(1.0, 8).unwrap();
        assert_eq!(g.step(), 0.125);
        assert_eq!(g.cell_of(0.3).unwrap(), 2);
        assert_eq!((g.step() * g.cells() as f64), g.horizon());

        let g = Grid::new(2.0, 1).unwrap();
        assert_eq!(g.step(), 2.0);
        assert_eq!(g.cell_of(1.99).unwrap(), 0);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(1.0, 0).is_err());
        assert!(Grid::new(0.0, 4).is_err());
        assert!(Grid::new(-1.0, 4).is_err());
        assert!(Grid::new(f64::NAN, 4).is_err());
    }

    #[test]
    fn lookup_is_total_on_horizon() {
        let g = Grid::new(1.0, 10).unwrap();
        for k in 0..1000 {
            let t = k as f64 / 1000.0;
            let i = g.cell_of(t).unwrap();
            assert!(g.cell_start(i) <= t + 1e-12 && t < g.cell_start(i + 1) + 1e-12);
        }
        assert!(g.cell_of(1.0).is_err());
        assert!(g.cell_of(-0.1).is_err());
    }

    #[test]
    fn snapping() {
        let g = Grid::new(1.0, 10).unwrap();
        assert_eq!(g.boundary_below(0.3).unwrap(), 3);
        assert_eq!(g.boundary_below(0.35).unwrap(), 3);
        assert_eq!(g.aligned_boundary(0.3), Some(3));
        assert_eq!(g.aligned_boundary(0.35), None);
        assert_eq!(g.cell_range(0.0, 1.0).unwrap(), 0..10);
        assert!(g.cell_range(0.31, 0.39).is_err());
    }

    #[test]
    fn json_shape() {
        let g = Grid::new(1.0, 8).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"T":1.0,"M":8}"#);
        let back: Grid = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<Grid>(r#"{"T":1.0,"M":0}"#).is_err());
    }
}
