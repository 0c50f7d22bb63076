use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Aabb, ConfigSpace};
use crate::models::RbfOccupancyField;
use crate::occupancy::OccupancyGrid;

/// Alternating blocks on the unit square. Block cells are the ones with odd
/// `row + col` (row 0 at the bottom); each block is shrunk by half the gap
/// on every side, so neighbouring free cells meet through square openings
/// of side `gap_fraction * cell` at the shared corners.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckerboardSpec {
    pub rows: usize,
    pub cols: usize,
    pub gap_fraction: f64,
    /// Raster pixels per board cell along each axis.
    #[serde(default = "default_cell_pixels")]
    pub cell_pixels: usize,
    /// Spacing of the RBF feature lattice in world units.
    #[serde(default = "default_feature_spacing")]
    pub feature_spacing: f64,
    #[serde(default = "default_ridge")]
    pub ridge: f64,
}

fn default_cell_pixels() -> usize {
    32
}

fn default_feature_spacing() -> f64 {
    1.0 / 64.0
}

fn default_ridge() -> f64 {
    RbfOccupancyField::DEFAULT_RIDGE
}

impl Default for CheckerboardSpec {
    fn default() -> Self {
        CheckerboardSpec {
            rows: 4,
            cols: 4,
            gap_fraction: 0.08,
            cell_pixels: default_cell_pixels(),
            feature_spacing: default_feature_spacing(),
            ridge: default_ridge(),
        }
    }
}

impl CheckerboardSpec {
    pub fn validate(&self) -> Result<()> {
        if self.rows < 2 || self.cols < 2 {
            return Err(Error::Config("checkerboard needs at least 2 rows and 2 cols".into()));
        }
        if !(self.gap_fraction > 0.0 && self.gap_fraction < 0.5) {
            return Err(Error::Config(format!("gap_fraction must lie in (0, 0.5), got {}", self.gap_fraction)));
        }
        if self.cell_pixels < 4 {
            return Err(Error::Config("cell_pixels must be >= 4".into()));
        }
        if !(self.feature_spacing > 0.0) {
            return Err(Error::Config("feature_spacing must be > 0".into()));
        }
        Ok(())
    }

    pub fn cell_size(&self) -> [f64; 2] {
        [1.0 / self.cols as f64, 1.0 / self.rows as f64]
    }

    pub fn blocks(&self) -> Vec<Aabb> {
        let [cw, ch] = self.cell_size();
        let (gx, gy) = (0.5 * self.gap_fraction * cw, 0.5 * self.gap_fraction * ch);
        let mut out = Vec::new();
        for r in 0..self.rows {
            for c in 0..self.cols {
                if (r + c) % 2 == 1 {
                    let (x0, y0) = (c as f64 * cw, r as f64 * ch);
                    out.push(Aabb { min: [x0 + gx, y0 + gy], max: [x0 + cw - gx, y0 + ch - gy] });
                }
            }
        }
        out
    }

    /// Corner openings between diagonally adjacent free cells.
    pub fn gap_centers(&self) -> Vec<[f64; 2]> {
        let [cw, ch] = self.cell_size();
        let mut out = Vec::new();
        for r in 1..self.rows {
            for c in 1..self.cols {
                out.push([c as f64 * cw, r as f64 * ch]);
            }
        }
        out
    }

    /// Centres of the bottom-left and top-right cells, which are both free
    /// when the board has an odd `rows + cols` parity of zero at the corners.
    pub fn corner_query(&self) -> ([f64; 2], [f64; 2]) {
        let [cw, ch] = self.cell_size();
        let top = (self.rows - 1, self.cols - 1);
        let goal_cell = if (top.0 + top.1).is_multiple_of(2) { top } else { (top.0, top.1 - 1) };
        ([0.5 * cw, 0.5 * ch], [(goal_cell.1 as f64 + 0.5) * cw, (goal_cell.0 as f64 + 0.5) * ch])
    }

    pub fn space(&self) -> ConfigSpace {
        ConfigSpace::cube(2, 0.0, 1.0).expect("unit square")
    }

    pub fn grid(&self) -> OccupancyGrid {
        let blocks = self.blocks();
        OccupancyGrid::from_fn(self.cols * self.cell_pixels, self.rows * self.cell_pixels, [0.0, 0.0, 1.0, 1.0], |p| {
            blocks.iter().any(|b| b.signed_distance(p).0 < 0.0)
        })
    }
}

#[derive(Clone, Debug)]
pub struct Checkerboard {
    pub spec: CheckerboardSpec,
    pub grid: OccupancyGrid,
    pub field: RbfOccupancyField,
}

/// Rasterises the board and fits a field to it. The board is fully
/// determined by `spec`.
pub fn gen_checkerboard(spec: &CheckerboardSpec) -> Result<Checkerboard> {
    spec.validate()?;
    let grid = spec.grid();
    let field = RbfOccupancyField::fit_grid(&grid, spec.feature_spacing, spec.ridge)?;
    Ok(Checkerboard { spec: spec.clone(), grid, field })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parity() {
        let spec = CheckerboardSpec { rows: 2, cols: 2, ..Default::default() };
        assert_eq!(spec.blocks().len(), 2);
        assert_eq!(CheckerboardSpec::default().blocks().len(), 8);
    }

    #[test]
    fn bad_params() {
        for spec in [
            CheckerboardSpec { rows: 1, ..Default::default() },
            CheckerboardSpec { gap_fraction: 0.5, ..Default::default() },
            CheckerboardSpec { gap_fraction: 0.0, ..Default::default() },
        ] {
            assert!(spec.validate().is_err());
        }
    }

    #[test]
    fn corner_query_is_free() {
        let spec = CheckerboardSpec::default();
        let (s, g) = spec.corner_query();
        assert_eq!((s, g), ([0.125, 0.125], [0.875, 0.875]));
        let grid = spec.grid();
        assert!(!grid.occupied_at(s) && !grid.occupied_at(g));
    }
}
