//! Preset line paths and the lookahead follower that drives along them.

use serde::{Deserialize, Serialize};

use super::RobotError;

/// Distance ahead of the projected position that the follower steers to.
pub const LOOKAHEAD_M: f64 = 0.3;
/// How far the robot may be from a path's first waypoint when tracing starts.
pub const CAPTURE_DISTANCE_M: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinePath {
    pub id: String,
    pub waypoints: Vec<[f64; 2]>,
    pub target_label: String,
}

impl LinePath {
    pub fn new(
        id: impl Into<String>,
        waypoints: Vec<[f64; 2]>,
        target_label: impl Into<String>,
    ) -> Result<Self, RobotError> {
        let path = Self {
            id: id.into(),
            waypoints,
            target_label: target_label.into(),
        };
        path.validate()?;
        Ok(path)
    }

    pub fn validate(&self) -> Result<(), RobotError> {
        if self.waypoints.len() < 2 {
            return Err(RobotError::InvalidPath(format!(
                "{}: needs at least 2 waypoints",
                self.id
            )));
        }
        if self.waypoints.iter().flatten().any(|c| !c.is_finite()) {
            return Err(RobotError::InvalidPath(format!("{}: non-finite waypoint", self.id)));
        }
        if self.waypoints.windows(2).any(|w| w[0] == w[1]) {
            return Err(RobotError::InvalidPath(format!(
                "{}: consecutive waypoints coincide",
                self.id
            )));
        }
        Ok(())
    }

    pub fn start(&self) -> [f64; 2] {
        self.waypoints[0]
    }

    pub fn end(&self) -> [f64; 2] {
        self.waypoints[self.waypoints.len() - 1]
    }

    pub fn length(&self) -> f64 {
        self.waypoints.windows(2).map(|w| dist(w[0], w[1])).sum()
    }

    /// Shortest distance from `p` to any segment of the polyline.
    pub fn distance_to(&self, p: [f64; 2]) -> f64 {
        self.waypoints
            .windows(2)
            .map(|w| dist(p, closest_on_segment(p, w[0], w[1]).0))
            .fold(f64::INFINITY, f64::min)
    }
}

pub(crate) fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Closest point on segment `a`-`b` and its parameter in [0, 1].
fn closest_on_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> ([f64; 2], f64) {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0);
    ([a[0] + t * dx, a[1] + t * dy], t)
}

/// Follower state for one active trace.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Tracer {
    pub path: LinePath,
    cumulative: Vec<f64>,
    /// Arc position of the robot's projection; never decreases.
    pub progress_m: f64,
}

pub(crate) struct TraceStep {
    pub position: [f64; 2],
    pub arrived: bool,
}

impl Tracer {
    pub fn new(path: LinePath) -> Self {
        let mut cumulative = Vec::with_capacity(path.waypoints.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in path.waypoints.windows(2) {
            acc += dist(w[0], w[1]);
            cumulative.push(acc);
        }
        Self {
            path,
            cumulative,
            progress_m: 0.0,
        }
    }

    pub fn length(&self) -> f64 {
        self.cumulative[self.cumulative.len() - 1]
    }

    pub fn point_at(&self, s: f64) -> [f64; 2] {
        let s = s.clamp(0.0, self.length());
        let i = match self.cumulative.iter().rposition(|&c| c <= s) {
            Some(i) if i + 1 < self.cumulative.len() => i,
            _ => return self.path.end(),
        };
        let (a, b) = (self.path.waypoints[i], self.path.waypoints[i + 1]);
        let seg = self.cumulative[i + 1] - self.cumulative[i];
        let f = (s - self.cumulative[i]) / seg;
        [a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1])]
    }

    /// Arc position of the point closest to `p` with arc position in
    /// `[lo, hi]`. Ties go to the larger arc position.
    fn project_window(&self, p: [f64; 2], lo: f64, hi: f64) -> f64 {
        let mut best = (f64::INFINITY, lo);
        for i in 0..self.path.waypoints.len() - 1 {
            let (s0, s1) = (self.cumulative[i], self.cumulative[i + 1]);
            if s1 < lo || s0 > hi {
                continue;
            }
            let a = self.point_at(s0.max(lo));
            let b = self.point_at(s1.min(hi));
            let (q, s) = if a == b {
                (a, s0.max(lo))
            } else {
                let (q, t) = closest_on_segment(p, a, b);
                (q, s0.max(lo) + t * (s1.min(hi) - s0.max(lo)))
            };
            let d = dist(p, q);
            if d < best.0 - 1e-12 || (d <= best.0 + 1e-12 && s > best.1) {
                best = (d, s);
            }
        }
        best.1
    }

    /// Moves from `position` by at most `budget_m` toward the lookahead
    /// point. Reaching the lookahead point before the budget is spent
    /// advances progress to it and keeps going.
    pub fn advance(&mut self, position: [f64; 2], budget_m: f64) -> TraceStep {
        let length = self.length();
        let mut pos = position;
        let mut budget = budget_m;
        // Each pass either exhausts the budget or reaches a carrot that lies
        // LOOKAHEAD_M further along, so the loop is bounded by the budget.
        loop {
            let hi = (self.progress_m + LOOKAHEAD_M).min(length);
            let projected = self.project_window(pos, self.progress_m, hi);
            self.progress_m = self.progress_m.max(projected);
            let carrot_s = (self.progress_m + LOOKAHEAD_M).min(length);
            let carrot = self.point_at(carrot_s);
            let d = dist(pos, carrot);
            if d <= budget {
                pos = carrot;
                budget -= d;
                self.progress_m = carrot_s;
                if carrot_s >= length {
                    return TraceStep {
                        position: self.path.end(),
                        arrived: true,
                    };
                }
                if budget <= 1e-12 {
                    break;
                }
            } else {
                let f = budget / d;
                pos = [pos[0] + f * (carrot[0] - pos[0]), pos[1] + f * (carrot[1] - pos[1])];
                break;
            }
        }
        TraceStep {
            position: pos,
            arrived: false,
        }
    }
}
