use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::LatLon;
use crate::network::{MetroNetwork, RoadGraph, ZoneId};

/// Uniform rows x cols partition of the bounding box of all stops and
/// stations. Zone ids are row-major, row 0 at the southern edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneGrid {
    pub min_lat: f64,
    pub max_lat: f64,
    pub min_lon: f64,
    pub max_lon: f64,
    pub rows: u32,
    pub cols: u32,
}

pub fn build_grid(road: &RoadGraph, metro: &MetroNetwork, rows: u32, cols: u32) -> Result<ZoneGrid> {
    let positions: Vec<LatLon> = road
        .stops()
        .map(|n| n.position())
        .chain(metro.stations.iter().map(|s| s.position()))
        .collect();
    ZoneGrid::covering(&positions, rows, cols)
}

impl ZoneGrid {
    pub fn covering(positions: &[LatLon], rows: u32, cols: u32) -> Result<Self> {
        if rows < 1 || cols < 1 {
            return Err(Error::InvalidInput(format!(
                "grid needs at least one row and column, got {rows}x{cols}"
            )));
        }
        let Some(first) = positions.first() else {
            return Err(Error::InvalidInput("cannot build a grid without stops".into()));
        };
        let mut grid = ZoneGrid {
            min_lat: first.lat,
            max_lat: first.lat,
            min_lon: first.lon,
            max_lon: first.lon,
            rows,
            cols,
        };
        for p in positions {
            grid.min_lat = grid.min_lat.min(p.lat);
            grid.max_lat = grid.max_lat.max(p.lat);
            grid.min_lon = grid.min_lon.min(p.lon);
            grid.max_lon = grid.max_lon.max(p.lon);
        }
        Ok(grid)
    }

    pub fn zone_count(&self) -> usize {
        (self.rows * self.cols) as usize
    }

    pub fn contains_zone(&self, zone: ZoneId) -> bool {
        zone.index() < self.zone_count()
    }

    /// Cell of a position; points on the upper edges belong to the last
    /// row/column and points outside the box are clamped onto it.
    pub fn zone_of(&self, p: LatLon) -> ZoneId {
        let row = cell(p.lat, self.min_lat, self.max_lat, self.rows);
        let col = cell(p.lon, self.min_lon, self.max_lon, self.cols);
        ZoneId(row * self.cols + col)
    }

    pub fn row_col(&self, zone: ZoneId) -> (u32, u32) {
        (zone.0 / self.cols, zone.0 % self.cols)
    }

    /// Geometric center of a cell.
    pub fn center(&self, zone: ZoneId) -> LatLon {
        let (row, col) = self.row_col(zone);
        let dlat = (self.max_lat - self.min_lat) / self.rows as f64;
        let dlon = (self.max_lon - self.min_lon) / self.cols as f64;
        LatLon::new(
            self.min_lat + (row as f64 + 0.5) * dlat,
            self.min_lon + (col as f64 + 0.5) * dlon,
        )
    }

    pub fn diagonal_m(&self) -> f64 {
        LatLon::new(self.min_lat, self.min_lon).distance_m(&LatLon::new(self.max_lat, self.max_lon))
    }
}

fn cell(x: f64, min: f64, max: f64, n: u32) -> u32 {
    let extent = max - min;
    if !(extent > 0.0) {
        return 0;
    }
    let k = ((x - min) / extent * n as f64).floor();
    (k.max(0.0) as u32).min(n - 1)
}
