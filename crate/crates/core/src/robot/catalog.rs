//! The closed set of prepared motion primitives an operator can select.
//!
//! Head and arm primitives are played back as short joint trajectories;
//! locomotion primitives are timed drives handled by the robot stepper.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::joints::{ArmAngles, JointState};
use super::RobotError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadMotion {
    LookUp,
    LookDown,
    LookRight,
    LookLeft,
    NodOnce,
    ShakeHead,
    NodTwice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArmMotion {
    RaiseOneHand,
    ByeBye,
    HoldUpFists,
    PowerPose,
}

/// Direct drive commands. Forward and backward translate along the heading,
/// turns rotate in place.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
    TurnLeft,
    TurnRight,
}

/// A playable (non-locomotion) primitive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "part", content = "id", rename_all = "snake_case")]
pub enum Motion {
    Head(HeadMotion),
    Arm(ArmMotion),
}

impl HeadMotion {
    pub const ALL: [HeadMotion; 7] = [
        HeadMotion::LookUp,
        HeadMotion::LookDown,
        HeadMotion::LookRight,
        HeadMotion::LookLeft,
        HeadMotion::NodOnce,
        HeadMotion::ShakeHead,
        HeadMotion::NodTwice,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            HeadMotion::LookUp => "look_up",
            HeadMotion::LookDown => "look_down",
            HeadMotion::LookRight => "look_right",
            HeadMotion::LookLeft => "look_left",
            HeadMotion::NodOnce => "nod_once",
            HeadMotion::ShakeHead => "shake_head",
            HeadMotion::NodTwice => "nod_twice",
        }
    }
}

impl ArmMotion {
    pub const ALL: [ArmMotion; 4] = [
        ArmMotion::RaiseOneHand,
        ArmMotion::ByeBye,
        ArmMotion::HoldUpFists,
        ArmMotion::PowerPose,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ArmMotion::RaiseOneHand => "raise_one_hand",
            ArmMotion::ByeBye => "bye_bye",
            ArmMotion::HoldUpFists => "hold_up_fists",
            ArmMotion::PowerPose => "power_pose",
        }
    }
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::Forward,
        Direction::Backward,
        Direction::TurnLeft,
        Direction::TurnRight,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
            Direction::TurnLeft => "turn_left",
            Direction::TurnRight => "turn_right",
        }
    }
}

impl Motion {
    pub fn as_str(self) -> &'static str {
        match self {
            Motion::Head(m) => m.as_str(),
            Motion::Arm(m) => m.as_str(),
        }
    }
}

impl fmt::Display for Motion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for HeadMotion {
    type Err = RobotError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        HeadMotion::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| RobotError::UnknownMotion(s.to_owned()))
    }
}

impl FromStr for ArmMotion {
    type Err = RobotError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ArmMotion::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| RobotError::UnknownMotion(s.to_owned()))
    }
}

impl FromStr for Direction {
    type Err = RobotError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Direction::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| RobotError::UnknownMotion(s.to_owned()))
    }
}

impl FromStr for Motion {
    type Err = RobotError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse::<HeadMotion>()
            .map(Motion::Head)
            .or_else(|_| s.parse::<ArmMotion>().map(Motion::Arm))
    }
}

/// Playback timing for the prepared motions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionCatalog {
    pub head_duration_s: f64,
    pub arm_duration_s: f64,
}

impl Default for MotionCatalog {
    fn default() -> Self {
        Self {
            head_duration_s: 1.5,
            arm_duration_s: 2.5,
        }
    }
}

impl MotionCatalog {
    pub fn new(head_duration_s: f64, arm_duration_s: f64) -> Result<Self, RobotError> {
        for d in [head_duration_s, arm_duration_s] {
            if !(d.is_finite() && d > 0.0) {
                return Err(RobotError::InvalidDuration(d));
            }
        }
        Ok(Self {
            head_duration_s,
            arm_duration_s,
        })
    }

    /// Resolves a wire id to a playable head or arm primitive.
    pub fn lookup(&self, id: &str) -> Result<Motion, RobotError> {
        id.parse()
    }

    pub fn lookup_head(&self, id: &str) -> Result<HeadMotion, RobotError> {
        id.parse()
    }

    pub fn lookup_arm(&self, id: &str) -> Result<ArmMotion, RobotError> {
        id.parse()
    }

    pub fn duration_s(&self, motion: Motion) -> f64 {
        match motion {
            Motion::Head(_) => self.head_duration_s,
            Motion::Arm(_) => self.arm_duration_s,
        }
    }

    pub fn head(&self) -> &'static [HeadMotion] {
        &HeadMotion::ALL
    }

    pub fn arm(&self) -> &'static [ArmMotion] {
        &ArmMotion::ALL
    }

    pub fn locomotion(&self) -> &'static [Direction] {
        &Direction::ALL
    }

    /// Wire ids of all 15 primitives in catalog order: head, arm, locomotion.
    pub fn primitive_ids(&self) -> impl Iterator<Item = &'static str> {
        HeadMotion::ALL
            .iter()
            .map(|m| m.as_str())
            .chain(ArmMotion::ALL.iter().map(|m| m.as_str()))
            .chain(Direction::ALL.iter().map(|d| d.as_str()))
    }
}

/// One keyframe of a primitive: normalized time in (0, 1] and the target it
/// reaches at that time. Head motions only touch the neck, arm motions only
/// the arms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Keyframe {
    Neck { at: f64, pitch: f64, yaw: f64 },
    Arms { at: f64, left: ArmAngles, right: ArmAngles },
}

impl Keyframe {
    pub(crate) fn at(&self) -> f64 {
        match self {
            Keyframe::Neck { at, .. } | Keyframe::Arms { at, .. } => *at,
        }
    }

    pub(crate) fn apply(&self, joints: &mut JointState) {
        match *self {
            Keyframe::Neck { pitch, yaw, .. } => {
                joints.neck.pitch_rad = pitch;
                joints.neck.yaw_rad = yaw;
            }
            Keyframe::Arms { left, right, .. } => {
                joints.arm_left = left;
                joints.arm_right = right;
            }
        }
    }
}

const NEUTRAL_ARM: ArmAngles = ArmAngles([0.0; 6]);

fn neck(at: f64, pitch: f64, yaw: f64) -> Keyframe {
    Keyframe::Neck { at, pitch, yaw }
}

fn arms(at: f64, left: [f64; 6], right: [f64; 6]) -> Keyframe {
    Keyframe::Arms {
        at,
        left: ArmAngles(left),
        right: ArmAngles(right),
    }
}

// Arm axis order: shoulder pitch, shoulder roll, upper-arm yaw, elbow pitch,
// wrist yaw, wrist roll.
pub(crate) fn keyframes(motion: Motion) -> Vec<Keyframe> {
    const Z: [f64; 6] = NEUTRAL_ARM.0;
    match motion {
        Motion::Head(HeadMotion::LookUp) => vec![neck(1.0, 0.35, 0.0)],
        Motion::Head(HeadMotion::LookDown) => vec![neck(1.0, -0.35, 0.0)],
        Motion::Head(HeadMotion::LookRight) => vec![neck(1.0, 0.0, -0.7)],
        Motion::Head(HeadMotion::LookLeft) => vec![neck(1.0, 0.0, 0.7)],
        Motion::Head(HeadMotion::NodOnce) => vec![neck(0.5, -0.3, 0.0), neck(1.0, 0.0, 0.0)],
        Motion::Head(HeadMotion::ShakeHead) => vec![
            neck(0.25, 0.0, 0.4),
            neck(0.75, 0.0, -0.4),
            neck(1.0, 0.0, 0.0),
        ],
        Motion::Head(HeadMotion::NodTwice) => vec![
            neck(0.25, -0.3, 0.0),
            neck(0.5, 0.0, 0.0),
            neck(0.75, -0.3, 0.0),
            neck(1.0, 0.0, 0.0),
        ],
        Motion::Arm(ArmMotion::RaiseOneHand) => {
            let up = [2.6, 0.2, 0.0, 0.3, 0.0, 0.0];
            vec![arms(0.4, Z, up), arms(0.7, Z, up), arms(1.0, Z, Z)]
        }
        Motion::Arm(ArmMotion::ByeBye) => {
            let a = [2.2, 0.3, 0.0, 1.2, 0.0, 0.6];
            let b = [2.2, 0.3, 0.0, 1.2, 0.0, -0.6];
            vec![
                arms(0.25, Z, a),
                arms(0.45, Z, b),
                arms(0.65, Z, a),
                arms(0.8, Z, b),
                arms(1.0, Z, Z),
            ]
        }
        Motion::Arm(ArmMotion::HoldUpFists) => {
            let fist = [1.5, 0.0, 0.0, 1.6, 0.0, 0.0];
            vec![arms(0.4, fist, fist), arms(0.75, fist, fist), arms(1.0, Z, Z)]
        }
        Motion::Arm(ArmMotion::PowerPose) => {
            let left = [0.4, 0.9, -0.5, 1.9, 0.0, 0.0];
            let right = [0.4, -0.9, 0.5, 1.9, 0.0, 0.0];
            vec![arms(0.35, left, right), arms(0.8, left, right), arms(1.0, Z, Z)]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_sizes_are_fixed() {
        let c = MotionCatalog::default();
        assert_eq!(c.head().len(), 7);
        assert_eq!(c.arm().len(), 4);
        assert_eq!(c.locomotion().len(), 4);
        assert_eq!(c.primitive_ids().count(), 15);
    }

    #[test]
    fn ids_round_trip_through_lookup() {
        let c = MotionCatalog::default();
        for m in HeadMotion::ALL {
            assert_eq!(c.lookup(m.as_str()).unwrap(), Motion::Head(m));
        }
        for m in ArmMotion::ALL {
            assert_eq!(c.lookup(m.as_str()).unwrap(), Motion::Arm(m));
        }
        for d in Direction::ALL {
            assert_eq!(d.as_str().parse::<Direction>().unwrap(), d);
        }
    }

    #[test]
    fn unknown_and_locomotion_ids_are_not_playable() {
        let c = MotionCatalog::default();
        assert!(matches!(c.lookup("moonwalk"), Err(RobotError::UnknownMotion(_))));
        assert!(matches!(c.lookup("forward"), Err(RobotError::UnknownMotion(_))));
        assert!(matches!(c.lookup_head("bye_bye"), Err(RobotError::UnknownMotion(_))));
        assert!(matches!(c.lookup_arm("nod_once"), Err(RobotError::UnknownMotion(_))));
    }

    #[test]
    fn keyframes_stay_inside_joint_limits() {
        for m in HeadMotion::ALL
            .into_iter()
            .map(Motion::Head)
            .chain(ArmMotion::ALL.into_iter().map(Motion::Arm))
        {
            let mut j = JointState::default();
            let frames = keyframes(m);
            let mut last = 0.0;
            for k in &frames {
                assert!(k.at() > last && k.at() <= 1.0);
                last = k.at();
                k.apply(&mut j);
                assert!(j.within_limits(), "{m} leaves limits");
            }
            assert_eq!(last, 1.0);
        }
    }
}
