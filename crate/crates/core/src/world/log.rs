//! Event log records and their JSON Lines encoding.
//!
//! One record per line. Fields are written in a fixed order: `t_ms`, then
//! `robot` and `table` when present, then `kind` and the kind's own fields in
//! declaration order. Floats use the shortest round-trip representation, so
//! identical runs produce identical bytes.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::protocol::VoiceMode;
use crate::session::Phase;
use crate::RobotId;

use super::WorldError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    PhaseChange { session: usize, phase: Phase },
    SessionEnd { session: usize },
    CustomersSeated { session: usize, party_size: u8 },
    CustomersLeft { session: usize },
    OrderTaken { drink: u32 },
    DrinkPickedUp { drink: u32 },
    DrinkDelivered { drink: u32 },
    /// Spoken text. Without a robot the speaker is the customer party at
    /// `table`.
    Utterance {
        text: String,
        duration_ms: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        voice: Option<VoiceMode>,
    },
    SmileTagOn,
    SmileTagOff,
    MotionPlayed { motion: String },
    /// Emitted when a drive or line trace ends.
    MoveSegment {
        start_ms: u64,
        from: [f64; 2],
        to: [f64; 2],
        halted: bool,
    },
    /// Robot started serving the table within service range.
    EngageStart,
    EngageEnd,
    Collision {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        other: Option<RobotId>,
    },
    /// Staff carried a tabletop robot to `table`.
    StaffMove {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        from_table: Option<u32>,
    },
    BatteryWarning { battery_s: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceEvent {
    pub t_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub robot: Option<RobotId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<u32>,
    #[serde(flatten)]
    pub kind: EventKind,
}

impl ServiceEvent {
    pub fn new(t_ms: u64, kind: EventKind) -> Self {
        Self {
            t_ms,
            robot: None,
            table: None,
            kind,
        }
    }

    pub fn robot(mut self, id: RobotId) -> Self {
        self.robot = Some(id);
        self
    }

    pub fn table(mut self, id: u32) -> Self {
        self.table = Some(id);
        self
    }

    pub fn t_s(&self) -> f64 {
        self.t_ms as f64 / 1000.0
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("event serializes")
    }

    pub fn is_phase_transition(&self) -> bool {
        matches!(self.kind, EventKind::PhaseChange { .. } | EventKind::SessionEnd { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EventLog {
    pub events: Vec<ServiceEvent>,
}

impl EventLog {
    pub fn new(events: Vec<ServiceEvent>) -> Self {
        Self { events }
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn push(&mut self, e: ServiceEvent) {
        self.events.push(e);
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&e.to_json_line());
            out.push('\n');
        }
        out
    }

    pub fn write_jsonl(&self, mut w: impl Write) -> std::io::Result<()> {
        for e in &self.events {
            writeln!(w, "{}", e.to_json_line())?;
        }
        Ok(())
    }

    /// Parses JSON Lines; blank lines are skipped.
    pub fn from_jsonl(r: impl BufRead) -> Result<Self, WorldError> {
        let mut events = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line.map_err(|e| WorldError::LogParse {
                line: i + 1,
                message: e.to_string(),
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let e = serde_json::from_str(&line).map_err(|e| WorldError::LogParse {
                line: i + 1,
                message: e.to_string(),
            })?;
            events.push(e);
        }
        Ok(Self { events })
    }

    pub fn from_jsonl_str(s: &str) -> Result<Self, WorldError> {
        Self::from_jsonl(s.as_bytes())
    }

    /// SHA-256 of the JSON Lines bytes, hex encoded.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for e in &self.events {
            h.update(e.to_json_line().as_bytes());
            h.update(b"\n");
        }
        hex::encode(h.finalize())
    }

    pub fn robots(&self) -> BTreeSet<RobotId> {
        self.events.iter().filter_map(|e| e.robot).collect()
    }

    /// Keeps events of one robot plus everything robot-independent.
    pub fn for_robot(&self, robot: RobotId) -> EventLog {
        EventLog::new(
            self.events
                .iter()
                .filter(|e| e.robot.is_none_or(|r| r == robot))
                .cloned()
                .collect(),
        )
    }

    /// Keeps only events that fall inside the listed sessions, including their
    /// boundary markers.
    pub fn for_sessions(&self, sessions: &[usize]) -> EventLog {
        let wanted: BTreeSet<usize> = sessions.iter().copied().collect();
        let mut current: Option<usize> = None;
        let mut out = Vec::new();
        for e in &self.events {
            match e.kind {
                EventKind::PhaseChange { session, .. } => current = Some(session),
                EventKind::SessionEnd { session } => {
                    if wanted.contains(&session) {
                        out.push(e.clone());
                    }
                    current = None;
                    continue;
                }
                _ => {}
            }
            let session = match e.kind {
                EventKind::CustomersSeated { session, .. } | EventKind::CustomersLeft { session } => Some(session),
                _ => current,
            };
            if session.is_some_and(|s| wanted.contains(&s)) {
                out.push(e.clone());
            }
        }
        EventLog::new(out)
    }

    pub fn count_by_kind(&self) -> std::collections::BTreeMap<&'static str, usize> {
        let mut m = std::collections::BTreeMap::new();
        for e in &self.events {
            *m.entry(kind_name(&e.kind)).or_default() += 1;
        }
        m
    }
}

pub fn kind_name(kind: &EventKind) -> &'static str {
    match kind {
        EventKind::PhaseChange { .. } => "phase_change",
        EventKind::SessionEnd { .. } => "session_end",
        EventKind::CustomersSeated { .. } => "customers_seated",
        EventKind::CustomersLeft { .. } => "customers_left",
        EventKind::OrderTaken { .. } => "order_taken",
        EventKind::DrinkPickedUp { .. } => "drink_picked_up",
        EventKind::DrinkDelivered { .. } => "drink_delivered",
        EventKind::Utterance { .. } => "utterance",
        EventKind::SmileTagOn => "smile_tag_on",
        EventKind::SmileTagOff => "smile_tag_off",
        EventKind::MotionPlayed { .. } => "motion_played",
        EventKind::MoveSegment { .. } => "move_segment",
        EventKind::EngageStart => "engage_start",
        EventKind::EngageEnd => "engage_end",
        EventKind::Collision { .. } => "collision",
        EventKind::StaffMove { .. } => "staff_move",
        EventKind::BatteryWarning { .. } => "battery_warning",
    }
}
