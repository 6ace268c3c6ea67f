//! The cafe's hourly service cycle, the day schedule, and pilot shifts.
//!
//! One business hour is a fixed sequence of phases:
//!
//! | phase              | duration | actor               |
//! |--------------------|----------|---------------------|
//! | opening talk       | 300 s    | owner               |
//! | order confirmation | 600 s    | mobile robot        |
//! | drink serving      | 600 s    | mobile robot        |
//! | free talk          | 1200 s   | any robot           |
//! | ending talk        | 300 s    | owner               |
//! | break              | 300 s    | none                |
//! | entry              | 300 s    | none                |
//!
//! Everything except the break counts as working time, 3300 s per hour.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::RobotId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    OpeningTalk,
    OrderConfirmation,
    DrinkServing,
    FreeTalk,
    EndingTalk,
    Break,
    Entry,
}

impl Phase {
    pub const ALL: [Phase; 7] = [
        Phase::OpeningTalk,
        Phase::OrderConfirmation,
        Phase::DrinkServing,
        Phase::FreeTalk,
        Phase::EndingTalk,
        Phase::Break,
        Phase::Entry,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::OpeningTalk => "opening_talk",
            Phase::OrderConfirmation => "order_confirmation",
            Phase::DrinkServing => "drink_serving",
            Phase::FreeTalk => "free_talk",
            Phase::EndingTalk => "ending_talk",
            Phase::Break => "break",
            Phase::Entry => "entry",
        }
    }

    /// Customers are seated and being served.
    pub fn is_customer_facing(self) -> bool {
        !matches!(self, Phase::Break | Phase::Entry)
    }

    /// Phases in which the robots themselves serve tables.
    pub fn is_robot_service(self) -> bool {
        matches!(
            self,
            Phase::OrderConfirmation | Phase::DrinkServing | Phase::FreeTalk
        )
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Actor {
    Owner,
    MobileRobot,
    AnyRobot,
    Nobody,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseSpec {
    pub phase: Phase,
    pub duration_s: u32,
    pub actor: Actor,
    pub working: bool,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SessionError {
    #[error("time {0} s is outside the session cycle")]
    OutOfRange(f64),
    #[error("interval [{0}, {1}) is not inside the day schedule")]
    IntervalOutOfSchedule(f64, f64),
    #[error("a day has 3 or 4 sessions, got {0}")]
    InvalidSessionCount(usize),
    #[error("session {session}: robot {robot} has no available pilot")]
    Unstaffable { session: usize, robot: RobotId },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionPlan {
    pub phases: Vec<PhaseSpec>,
}

impl Default for SessionPlan {
    fn default() -> Self {
        Self::standard()
    }
}

impl SessionPlan {
    pub fn standard() -> Self {
        let p = |phase, duration_s, actor, working| PhaseSpec {
            phase,
            duration_s,
            actor,
            working,
        };
        Self {
            phases: vec![
                p(Phase::OpeningTalk, 300, Actor::Owner, true),
                p(Phase::OrderConfirmation, 600, Actor::MobileRobot, true),
                p(Phase::DrinkServing, 600, Actor::MobileRobot, true),
                p(Phase::FreeTalk, 1200, Actor::AnyRobot, true),
                p(Phase::EndingTalk, 300, Actor::Owner, true),
                p(Phase::Break, 300, Actor::Nobody, false),
                p(Phase::Entry, 300, Actor::Nobody, true),
            ],
        }
    }

    pub fn cycle_s(&self) -> u32 {
        self.phases.iter().map(|p| p.duration_s).sum()
    }

    pub fn customer_facing_s(&self) -> u32 {
        self.phases
            .iter()
            .filter(|p| p.phase.is_customer_facing())
            .map(|p| p.duration_s)
            .sum()
    }

    pub fn working_s_per_cycle(&self) -> u32 {
        self.phases.iter().filter(|p| p.working).map(|p| p.duration_s).sum()
    }

    pub fn spec(&self, phase: Phase) -> Option<&PhaseSpec> {
        self.phases.iter().find(|p| p.phase == phase)
    }

    pub fn is_working(&self, phase: Phase) -> bool {
        self.spec(phase).is_some_and(|p| p.working)
    }

    /// Start offsets of each phase within the cycle, in order.
    pub fn boundaries_s(&self) -> Vec<(u32, Phase)> {
        let mut t = 0;
        self.phases
            .iter()
            .map(|p| {
                let start = t;
                t += p.duration_s;
                (start, p.phase)
            })
            .collect()
    }

    /// Phase containing `t_s` seconds into the cycle.
    pub fn phase_at(&self, t_s: f64) -> Result<Phase, SessionError> {
        if !(t_s >= 0.0 && t_s < f64::from(self.cycle_s())) {
            return Err(SessionError::OutOfRange(t_s));
        }
        let mut end = 0.0;
        for p in &self.phases {
            end += f64::from(p.duration_s);
            if t_s < end {
                return Ok(p.phase);
            }
        }
        unreachable!("t_s < cycle length")
    }

    /// Phase and seconds left in it, `t_s` into the cycle.
    pub fn phase_remaining(&self, t_s: f64) -> Result<(Phase, f64), SessionError> {
        let phase = self.phase_at(t_s)?;
        let mut end = 0.0;
        for p in &self.phases {
            end += f64::from(p.duration_s);
            if p.phase == phase {
                break;
            }
        }
        Ok((phase, end - t_s))
    }

    /// Working seconds in `[start_s, end_s)` where times are measured from the
    /// start of the first session and the cycle repeats back to back.
    pub fn working_seconds(&self, start_s: f64, end_s: f64) -> f64 {
        if end_s <= start_s {
            return 0.0;
        }
        let cycle = f64::from(self.cycle_s());
        let first = (start_s / cycle).floor() as i64;
        let last = (end_s / cycle).ceil() as i64;
        let mut total = 0.0;
        for k in first..last {
            let base = k as f64 * cycle;
            let mut t = base;
            for p in &self.phases {
                let (a, b) = (t, t + f64::from(p.duration_s));
                t = b;
                if p.working {
                    total += (b.min(end_s) - a.max(start_s)).max(0.0);
                }
            }
        }
        total
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DaySchedule {
    pub date: String,
    /// Session start offsets in seconds from opening.
    pub session_starts_s: Vec<u32>,
}

impl DaySchedule {
    pub fn new(date: impl Into<String>, n_sessions: usize, plan: &SessionPlan) -> Result<Self, SessionError> {
        if !(3..=4).contains(&n_sessions) {
            return Err(SessionError::InvalidSessionCount(n_sessions));
        }
        Ok(Self::back_to_back(date, n_sessions, plan))
    }

    /// Any number of back-to-back sessions; used for fixtures and tests that
    /// need shorter days than the cafe ran.
    pub fn back_to_back(date: impl Into<String>, n_sessions: usize, plan: &SessionPlan) -> Self {
        let cycle = plan.cycle_s();
        Self {
            date: date.into(),
            session_starts_s: (0..n_sessions as u32).map(|k| k * cycle).collect(),
        }
    }

    pub fn standard(date: impl Into<String>) -> Self {
        Self::back_to_back(date, 4, &SessionPlan::standard())
    }

    /// The opening day ran three sessions.
    pub fn first_day(date: impl Into<String>) -> Self {
        Self::back_to_back(date, 3, &SessionPlan::standard())
    }

    pub fn n_sessions(&self) -> usize {
        self.session_starts_s.len()
    }

    pub fn span_s(&self, plan: &SessionPlan) -> u32 {
        self.session_starts_s
            .last()
            .map_or(0, |s| s + plan.cycle_s())
    }

    /// Working seconds in `[start_s, end_s)` of this day.
    pub fn working_seconds(&self, plan: &SessionPlan, start_s: f64, end_s: f64) -> Result<f64, SessionError> {
        if start_s < 0.0 || end_s > f64::from(self.span_s(plan)) || end_s < start_s {
            return Err(SessionError::IntervalOutOfSchedule(start_s, end_s));
        }
        let cycle = f64::from(plan.cycle_s());
        Ok(self
            .session_starts_s
            .iter()
            .map(|&s| {
                let s = f64::from(s);
                let (a, b) = (start_s.max(s), end_s.min(s + cycle));
                if b > a {
                    plan.working_seconds(a - s, b - s)
                } else {
                    0.0
                }
            })
            .sum())
    }

    pub fn total_working_s(&self, plan: &SessionPlan) -> f64 {
        f64::from(plan.working_s_per_cycle()) * self.n_sessions() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputMethod {
    HandMouse,
    Gaze,
    MouthMouse,
    HandAndMouth,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pilot {
    pub id: String,
    pub input_method: InputMethod,
    /// Session indices (0-based, within the day) the pilot cannot work.
    #[serde(default)]
    pub unavailable_sessions: BTreeSet<usize>,
}

impl Pilot {
    pub fn new(id: impl Into<String>, input_method: InputMethod) -> Self {
        Self {
            id: id.into(),
            input_method,
            unavailable_sessions: BTreeSet::new(),
        }
    }

    pub fn available(&self, session: usize) -> bool {
        !self.unavailable_sessions.contains(&session)
    }
}

/// The ten pilots and their computer operation methods.
pub fn reference_roster() -> Vec<Pilot> {
    use InputMethod::*;
    [
        HandMouse, Gaze, Gaze, HandMouse, MouthMouse, HandMouse, HandAndMouth, HandMouse, HandMouse, Gaze,
    ]
    .into_iter()
    .enumerate()
    .map(|(i, m)| Pilot::new(format!("P{:02}", i + 1), m))
    .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shift {
    pub pilot_id: String,
    pub robot_id: RobotId,
    pub sessions: Vec<usize>,
    pub input_method: InputMethod,
}

/// Staffs every robot in every session. Within a session robots are filled in
/// id order; each takes the available pilot with the fewest slots so far,
/// ties broken by pilot id.
pub fn assign_shifts(
    pilots: &[Pilot],
    schedule: &DaySchedule,
    robots: &[RobotId],
) -> Result<Vec<Shift>, SessionError> {
    let mut sorted: Vec<&Pilot> = pilots.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    sorted.dedup_by(|a, b| a.id == b.id);
    let mut robots = robots.to_vec();
    robots.sort();

    let mut load: BTreeMap<&str, usize> = BTreeMap::new();
    let mut slots: BTreeMap<(&str, RobotId), Vec<usize>> = BTreeMap::new();
    for session in 0..schedule.n_sessions() {
        let mut busy = BTreeSet::new();
        for &robot in &robots {
            let pick = sorted
                .iter()
                .filter(|p| p.available(session) && !busy.contains(p.id.as_str()))
                .min_by_key(|p| (load.get(p.id.as_str()).copied().unwrap_or(0), p.id.as_str()))
                .ok_or(SessionError::Unstaffable { session, robot })?;
            busy.insert(pick.id.as_str());
            *load.entry(pick.id.as_str()).or_default() += 1;
            slots.entry((pick.id.as_str(), robot)).or_default().push(session);
        }
    }
    let method: BTreeMap<&str, InputMethod> = sorted.iter().map(|p| (p.id.as_str(), p.input_method)).collect();
    Ok(slots
        .into_iter()
        .map(|((pilot, robot), sessions)| Shift {
            pilot_id: pilot.to_owned(),
            robot_id: robot,
            sessions,
            input_method: method[pilot],
        })
        .collect())
}

/// Roster file: `{ "pilots": [ { "id": "P01", "input_method": "gaze",
/// "unavailable_sessions": [2] } ] }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Roster {
    pub pilots: Vec<Pilot>,
}

impl Roster {
    pub fn reference() -> Self {
        Self {
            pilots: reference_roster(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("roster serializes")
    }
}
