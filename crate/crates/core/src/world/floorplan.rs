//! Cafe floor plan and its JSON file format.
//!
//! ```json
//! {
//!   "bounds": { "width_m": 10.0, "height_m": 8.0 },
//!   "counter": [0.5, 4.0],
//!   "tables": [ { "id": 1, "position": [3.5, 2.0], "seat_count": 4 } ],
//!   "stations": [ { "id": 1, "position": [1.2, 3.4] } ],
//!   "line_paths": [ { "id": "s1-t1", "waypoints": [[1.2, 3.4], [3.5, 3.4], [3.5, 2.4]], "target_label": "table-1" } ],
//!   "obstacles": [ { "min": [4.5, 0.0], "max": [5.0, 0.5] } ]
//! }
//! ```
//!
//! Coordinates are metres, origin at the south-west corner. Stations are
//! where mobile robots dock at the counter; `obstacles` is optional.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::robot::{LinePath, CAPTURE_DISTANCE_M};

use super::{WorldError, PICKUP_RANGE_M, SERVICE_RANGE_M};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub width_m: f64,
    pub height_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub id: u32,
    pub position: [f64; 2],
    pub seat_count: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Station {
    pub id: u32,
    pub position: [f64; 2],
}

/// Axis-aligned static obstacle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloorPlan {
    pub bounds: Bounds,
    pub counter: [f64; 2],
    pub tables: Vec<Table>,
    pub stations: Vec<Station>,
    pub line_paths: Vec<LinePath>,
    #[serde(default)]
    pub obstacles: Vec<Obstacle>,
}

const TABLE_COLUMNS_X: [f64; 3] = [3.5, 6.0, 8.5];
const SOUTH_ROW_Y: f64 = 2.0;
const NORTH_ROW_Y: f64 = 6.0;
const STATION_Y: [f64; 3] = [3.4, 4.0, 4.6];
const STATION_X: f64 = 1.2;
/// Robots stop this far short of the table centre.
const APPROACH_M: f64 = 0.4;

pub fn table_label(id: u32) -> String {
    format!("table-{id}")
}

pub fn station_label(id: u32) -> String {
    format!("station-{id}")
}

impl FloorPlan {
    /// 10 m x 8 m room, six four-seat tables on a 2 x 3 grid, a counter on
    /// the west wall with three docking stations, and one outbound and one
    /// return line per (station, table) pair. Each station has its own
    /// east-west lane; lines leave the lane at the table's column.
    pub fn reference() -> Self {
        let mut tables = Vec::new();
        for (row, y) in [SOUTH_ROW_Y, NORTH_ROW_Y].into_iter().enumerate() {
            for (col, x) in TABLE_COLUMNS_X.into_iter().enumerate() {
                tables.push(Table {
                    id: (row * 3 + col + 1) as u32,
                    position: [x, y],
                    seat_count: 4,
                });
            }
        }
        let stations: Vec<Station> = STATION_Y
            .into_iter()
            .enumerate()
            .map(|(i, y)| Station {
                id: i as u32 + 1,
                position: [STATION_X, y],
            })
            .collect();
        let mut line_paths = Vec::new();
        for s in &stations {
            for t in &tables {
                let [tx, ty] = t.position;
                let approach_y = if ty < s.position[1] { ty + APPROACH_M } else { ty - APPROACH_M };
                let out = vec![s.position, [tx, s.position[1]], [tx, approach_y]];
                let back: Vec<_> = out.iter().rev().copied().collect();
                line_paths.push(LinePath {
                    id: format!("s{}-t{}", s.id, t.id),
                    waypoints: out,
                    target_label: table_label(t.id),
                });
                line_paths.push(LinePath {
                    id: format!("t{}-s{}", t.id, s.id),
                    waypoints: back,
                    target_label: station_label(s.id),
                });
            }
        }
        Self {
            bounds: Bounds {
                width_m: 10.0,
                height_m: 8.0,
            },
            counter: [0.5, 4.0],
            tables,
            stations,
            line_paths,
            obstacles: Vec::new(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, WorldError> {
        let text = std::fs::read_to_string(path).map_err(|e| WorldError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, WorldError> {
        let plan: FloorPlan = serde_json::from_str(text).map_err(|e| WorldError::FloorPlan(e.to_string()))?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("floor plan serializes")
    }

    pub fn table(&self, id: u32) -> Option<&Table> {
        self.tables.iter().find(|t| t.id == id)
    }

    pub fn station(&self, id: u32) -> Option<&Station> {
        self.stations.iter().find(|s| s.id == id)
    }

    pub fn inside(&self, p: [f64; 2]) -> bool {
        (0.0..=self.bounds.width_m).contains(&p[0]) && (0.0..=self.bounds.height_m).contains(&p[1])
    }

    pub fn validate(&self) -> Result<(), WorldError> {
        let bad = |m: String| Err(WorldError::FloorPlan(m));
        if !(self.bounds.width_m > 0.0 && self.bounds.height_m > 0.0) {
            return bad("bounds must be positive".into());
        }
        let mut ids = BTreeSet::new();
        for t in &self.tables {
            if !ids.insert(t.id) {
                return bad(format!("duplicate table id {}", t.id));
            }
            if !(1..=4).contains(&t.seat_count) {
                return bad(format!("table {} has {} seats (1..=4)", t.id, t.seat_count));
            }
            if !self.inside(t.position) {
                return bad(format!("table {} is outside the room", t.id));
            }
        }
        let mut ids = BTreeSet::new();
        for s in &self.stations {
            if !ids.insert(s.id) {
                return bad(format!("duplicate station id {}", s.id));
            }
        }
        let mut ids = BTreeSet::new();
        for p in &self.line_paths {
            p.validate().map_err(|e| WorldError::FloorPlan(e.to_string()))?;
            if !ids.insert(p.id.as_str()) {
                return bad(format!("duplicate path id {}", p.id));
            }
            if p.waypoints.iter().any(|w| !self.inside(*w)) {
                return bad(format!("path {} leaves the room", p.id));
            }
        }
        for t in &self.tables {
            let reachable = self.line_paths.iter().any(|p| {
                p.target_label == table_label(t.id)
                    && super::dist(p.start(), self.counter) <= PICKUP_RANGE_M + CAPTURE_DISTANCE_M
                    && super::dist(p.end(), t.position) <= SERVICE_RANGE_M
            });
            if !reachable {
                return bad(format!("table {} has no line from the counter", t.id));
            }
        }
        Ok(())
    }
}
