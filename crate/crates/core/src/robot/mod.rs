//! State machine of a single avatar robot.
//!
//! A robot is either idle, playing one prepared motion, driving a timed
//! locomotion primitive, or following a preset line. The modes are mutually
//! exclusive: a new activity is rejected with [`RobotError::Busy`] until the
//! current one completes or is stopped.

mod catalog;
mod joints;
mod path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use catalog::{ArmMotion, Direction, HeadMotion, Motion, MotionCatalog};
pub use joints::{ArmAngles, JointState, NeckAngles, ARM_LIMIT_RAD, NECK_LIMIT_RAD};
pub use path::{LinePath, CAPTURE_DISTANCE_M, LOOKAHEAD_M};

use path::{dist, Tracer};

/// Battery driving time of a full charge, in seconds (6 h).
pub const BATTERY_CAPACITY_S: f64 = 21_600.0;
pub const MAX_SPEED_KMH: f64 = 0.72;
/// `MAX_SPEED_KMH` in m/s, written out so the cap is exact.
pub const MAX_SPEED_MPS: f64 = 0.2;
/// In-place turn rate for the turn primitives. With a 0.4 m track this keeps
/// wheel speed at the translational cap.
pub const TURN_RATE_RADPS: f64 = 1.0;

const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RobotError {
    #[error("unknown motion id `{0}`")]
    UnknownMotion(String),
    #[error("robot is busy")]
    Busy,
    #[error("robot cannot move")]
    NotMobile,
    #[error("path start is {distance_m:.3} m away (capture distance {CAPTURE_DISTANCE_M} m)")]
    PathUnreachable { distance_m: f64 },
    #[error("battery empty")]
    BatteryEmpty,
    #[error("time step must be positive and finite, got {0}")]
    InvalidTimestep(f64),
    #[error("duration must be positive and finite, got {0}")]
    InvalidDuration(f64),
    #[error("invalid path: {0}")]
    InvalidPath(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RobotKind {
    /// Floor-standing robot with wheels and arms.
    Mobile,
    /// Tabletop robot, moved between tables by staff.
    Stationary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotSpec {
    pub length_m: f64,
    pub width_m: f64,
    pub height_m: f64,
    pub mass_kg: f64,
    pub max_speed_mps: f64,
    pub battery_capacity_s: f64,
    pub kind: RobotKind,
}

impl RobotSpec {
    pub fn new(kind: RobotKind) -> Self {
        Self {
            length_m: 0.50,
            width_m: 0.40,
            height_m: 1.18,
            mass_kg: 20.0,
            max_speed_mps: MAX_SPEED_MPS,
            battery_capacity_s: BATTERY_CAPACITY_S,
            kind,
        }
    }

    pub fn mobile() -> Self {
        Self::new(RobotKind::Mobile)
    }

    pub fn stationary() -> Self {
        Self::new(RobotKind::Stationary)
    }

    pub fn is_mobile(&self) -> bool {
        self.kind == RobotKind::Mobile
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub x_m: f64,
    pub y_m: f64,
    pub heading_rad: f64,
}

impl Pose {
    pub fn new(x_m: f64, y_m: f64, heading_rad: f64) -> Self {
        Self { x_m, y_m, heading_rad }
    }

    pub fn position(&self) -> [f64; 2] {
        [self.x_m, self.y_m]
    }

    pub fn distance_to(&self, p: [f64; 2]) -> f64 {
        dist(self.position(), p)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Idle,
    ExecutingMotion { motion: Motion, elapsed_s: f64 },
    Locomoting { direction: Direction, remaining_s: f64 },
    LineTracing { path_id: String, arc_position_m: f64 },
}

impl Mode {
    pub fn is_idle(&self) -> bool {
        matches!(self, Mode::Idle)
    }

    pub fn is_moving(&self) -> bool {
        matches!(self, Mode::Locomoting { .. } | Mode::LineTracing { .. })
    }
}

/// What finished during a step, if anything.
#[derive(Debug, Clone, PartialEq)]
pub enum Completion {
    Motion(Motion),
    Locomotion(Direction),
    LineTrace { path_id: String, target_label: String },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StepReport {
    pub completed: Option<Completion>,
    /// Seconds of this step the robot had power for.
    pub powered_s: f64,
    /// Battery reached zero during this step.
    pub depleted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobotState {
    pub spec: RobotSpec,
    pub catalog: MotionCatalog,
    pub pose: Pose,
    pub joints: JointState,
    pub battery_s: f64,
    pub mode: Mode,
    motion_origin: JointState,
    tracer: Option<Tracer>,
}

impl RobotState {
    pub fn new(spec: RobotSpec, pose: Pose) -> Self {
        Self {
            spec,
            catalog: MotionCatalog::default(),
            pose,
            joints: JointState::default(),
            battery_s: spec.battery_capacity_s,
            mode: Mode::Idle,
            motion_origin: JointState::default(),
            tracer: None,
        }
    }

    pub fn with_catalog(mut self, catalog: MotionCatalog) -> Self {
        self.catalog = catalog;
        self
    }

    fn ready(&self) -> Result<(), RobotError> {
        if self.battery_s <= 0.0 {
            return Err(RobotError::BatteryEmpty);
        }
        if !self.mode.is_idle() {
            return Err(RobotError::Busy);
        }
        Ok(())
    }

    fn ready_to_move(&self) -> Result<(), RobotError> {
        if !self.spec.is_mobile() {
            return Err(RobotError::NotMobile);
        }
        self.ready()
    }

    /// Starts a prepared head or arm motion given by its wire id.
    pub fn start_motion_id(&mut self, id: &str) -> Result<Motion, RobotError> {
        let motion = self.catalog.lookup(id)?;
        self.start_motion(motion)?;
        Ok(motion)
    }

    pub fn start_motion(&mut self, motion: Motion) -> Result<(), RobotError> {
        self.ready()?;
        self.motion_origin = self.joints;
        self.mode = Mode::ExecutingMotion {
            motion,
            elapsed_s: 0.0,
        };
        Ok(())
    }

    pub fn locomote(&mut self, direction: Direction, duration_s: f64) -> Result<(), RobotError> {
        self.ready_to_move()?;
        if !(duration_s.is_finite() && duration_s > 0.0) {
            return Err(RobotError::InvalidDuration(duration_s));
        }
        self.mode = Mode::Locomoting {
            direction,
            remaining_s: duration_s,
        };
        Ok(())
    }

    pub fn start_line_trace(&mut self, path: &LinePath) -> Result<(), RobotError> {
        self.ready_to_move()?;
        path.validate()?;
        let d = self.pose.distance_to(path.start());
        if d > CAPTURE_DISTANCE_M {
            return Err(RobotError::PathUnreachable { distance_m: d });
        }
        self.tracer = Some(Tracer::new(path.clone()));
        self.mode = Mode::LineTracing {
            path_id: path.id.clone(),
            arc_position_m: 0.0,
        };
        Ok(())
    }

    /// Aborts the current activity. A motion in progress leaves the joints
    /// where they are.
    pub fn stop(&mut self) -> Mode {
        self.tracer = None;
        std::mem::take(&mut self.mode)
    }

    /// Path being traced, if any.
    pub fn active_path(&self) -> Option<&LinePath> {
        self.tracer.as_ref().map(|t| &t.path)
    }

    /// Advances the robot by `dt_s` seconds. The battery drains one second
    /// per powered second; once empty the robot is frozen.
    pub fn step(&mut self, dt_s: f64) -> Result<StepReport, RobotError> {
        if !(dt_s.is_finite() && dt_s > 0.0) {
            return Err(RobotError::InvalidTimestep(dt_s));
        }
        if self.battery_s <= 0.0 {
            return Err(RobotError::BatteryEmpty);
        }
        let powered = dt_s.min(self.battery_s);
        self.battery_s = (self.battery_s - dt_s).max(0.0);
        let mut report = StepReport {
            completed: self.advance_activity(powered),
            powered_s: powered,
            depleted: false,
        };
        if self.battery_s <= 0.0 {
            report.depleted = true;
            if report.completed.is_none() && !self.mode.is_idle() {
                self.stop();
            }
        }
        Ok(report)
    }

    fn advance_activity(&mut self, t: f64) -> Option<Completion> {
        match &mut self.mode {
            Mode::Idle => None,
            Mode::ExecutingMotion { motion, elapsed_s } => {
                let motion = *motion;
                let duration = self.catalog.duration_s(motion);
                *elapsed_s += t;
                let elapsed = *elapsed_s;
                if elapsed + TIME_EPS >= duration {
                    self.joints = sample_motion(&self.motion_origin, motion, 1.0);
                    self.mode = Mode::Idle;
                    Some(Completion::Motion(motion))
                } else {
                    self.joints = sample_motion(&self.motion_origin, motion, elapsed / duration);
                    None
                }
            }
            Mode::Locomoting {
                direction,
                remaining_s,
            } => {
                let direction = *direction;
                let run = t.min(*remaining_s);
                *remaining_s -= run;
                let done = *remaining_s <= TIME_EPS;
                let v = self.spec.max_speed_mps;
                let h = self.pose.heading_rad;
                match direction {
                    Direction::Forward => {
                        self.pose.x_m += v * run * h.cos();
                        self.pose.y_m += v * run * h.sin();
                    }
                    Direction::Backward => {
                        self.pose.x_m -= v * run * h.cos();
                        self.pose.y_m -= v * run * h.sin();
                    }
                    Direction::TurnLeft => self.pose.heading_rad = wrap_angle(h + TURN_RATE_RADPS * run),
                    Direction::TurnRight => self.pose.heading_rad = wrap_angle(h - TURN_RATE_RADPS * run),
                }
                if done {
                    self.mode = Mode::Idle;
                    Some(Completion::Locomotion(direction))
                } else {
                    None
                }
            }
            Mode::LineTracing { arc_position_m, .. } => {
                let tracer = self.tracer.as_mut().expect("line tracing without tracer");
                let from = self.pose.position();
                let step = tracer.advance(from, self.spec.max_speed_mps * t);
                *arc_position_m = tracer.progress_m;
                let (dx, dy) = (step.position[0] - from[0], step.position[1] - from[1]);
                if dx.hypot(dy) > 1e-12 {
                    self.pose.heading_rad = dy.atan2(dx);
                }
                self.pose.x_m = step.position[0];
                self.pose.y_m = step.position[1];
                if step.arrived {
                    let path = self.tracer.take().expect("tracer").path;
                    self.mode = Mode::Idle;
                    Some(Completion::LineTrace {
                        path_id: path.id,
                        target_label: path.target_label,
                    })
                } else {
                    None
                }
            }
        }
    }
}

fn sample_motion(origin: &JointState, motion: Motion, f: f64) -> JointState {
    let frames = catalog::keyframes(motion);
    let mut from = *origin;
    let mut from_at = 0.0;
    for k in &frames {
        let mut to = from;
        k.apply(&mut to);
        if f <= k.at() {
            let span = k.at() - from_at;
            return from.lerp(&to, ((f - from_at) / span).clamp(0.0, 1.0));
        }
        from = to;
        from_at = k.at();
    }
    from
}

pub(crate) fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let w = (a + PI).rem_euclid(TAU) - PI;
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}
