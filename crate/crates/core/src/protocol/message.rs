use serde::{Deserialize, Serialize};

use crate::robot::{Direction, Mode, Pose, RobotKind};
use crate::session::Phase;
use crate::RobotId;

use super::ProtocolError;

/// Longest utterance a client may send, in characters.
pub const MAX_TEXT_CHARS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VoiceMode {
    Synthesized,
    Live,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CommandKind {
    /// Motion ids travel as strings so that ids outside the catalog reach the
    /// service and are rejected there.
    SelectHeadMotion { motion: String },
    SelectArmMotion { motion: String },
    Locomote { direction: Direction, duration_s: f64 },
    StartLineTrace { target: String },
    Speak { text: String, voice: VoiceMode },
    SmileTag { on: bool },
    Stop,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorCommand {
    pub seq: u64,
    pub robot_id: RobotId,
    pub kind: CommandKind,
}

impl OperatorCommand {
    pub fn new(seq: u64, robot_id: RobotId, kind: CommandKind) -> Self {
        Self { seq, robot_id, kind }
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        match &self.kind {
            CommandKind::Speak { text, .. } if text.chars().count() > MAX_TEXT_CHARS => {
                Err(ProtocolError::InvalidMessage(format!(
                    "utterance longer than {MAX_TEXT_CHARS} characters"
                )))
            }
            CommandKind::Locomote { duration_s, .. } if !(duration_s.is_finite() && *duration_s > 0.0) => {
                Err(ProtocolError::InvalidMessage(format!(
                    "locomotion duration must be positive, got {duration_s}"
                )))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    UnknownRobot,
    UnknownMotion,
    Busy,
    NotMobile,
    PathUnreachable,
    UnknownTarget,
    BatteryEmpty,
    InvalidArgument,
    SequenceOutOfOrder,
    TextTooLong,
    SmileTagState,
    DayOver,
}

/// Compact per-robot state sent to operators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotDigest {
    pub id: RobotId,
    pub kind: RobotKind,
    pub pose: Pose,
    pub mode: Mode,
    pub battery_s: f64,
    pub smiling: bool,
    /// Tables of the drinks currently carried.
    pub carrying: Vec<u32>,
    /// Table the robot is engaged with or sits on.
    pub table: Option<u32>,
}

/// Plan-view snapshot standing in for the head camera stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldView {
    pub clock_ms: u64,
    pub session: Option<usize>,
    pub phase: Option<Phase>,
    pub phase_remaining_s: f64,
    pub robots: Vec<RobotDigest>,
    pub occupied_tables: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotSummary {
    pub id: RobotId,
    pub kind: RobotKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RobotEvent {
    Welcome { protocol_version: u8, robots: Vec<RobotSummary> },
    WorldViewFrame { view: WorldView },
    StateUpdate { robot: RobotDigest },
    CustomerUtterance { table: u32, text: String },
    PhaseChange { session: usize, phase: Phase },
    Ack { seq: u64 },
    Reject { seq: u64, reason: RejectReason },
    BatteryWarning { robot_id: RobotId, battery_s: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "msg", rename_all = "snake_case")]
pub enum Message {
    /// First frame from a client. `robot_id` is the robot the operator drives.
    Hello { client: String, robot_id: Option<RobotId> },
    Command(OperatorCommand),
    Event(RobotEvent),
}

impl Message {
    pub fn validate(&self) -> Result<(), ProtocolError> {
        match self {
            Message::Command(c) => c.validate(),
            _ => Ok(()),
        }
    }
}

impl From<OperatorCommand> for Message {
    fn from(c: OperatorCommand) -> Self {
        Message::Command(c)
    }
}

impl From<RobotEvent> for Message {
    fn from(e: RobotEvent) -> Self {
        Message::Event(e)
    }
}
