//! Discrete-time cafe world.
//!
//! All robots, customers and drinks advance together on a fixed tick. Operator
//! commands are queued in arrival order and applied at the start of the next
//! tick; every command gets exactly one `Ack` or `Reject`. Robot failures never
//! escape a tick: they become rejects or log events.

mod floorplan;
mod geometry;
mod log;

use std::collections::{BTreeMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::protocol::{
    CommandKind, OperatorCommand, RejectReason, RobotDigest, RobotEvent, RobotSummary, WorldView, PROTOCOL_VERSION,
};
use crate::robot::{Completion, Mode, Motion, Pose, RobotError, RobotKind, RobotSpec, RobotState};
use crate::session::{DaySchedule, Phase, SessionPlan};
use crate::RobotId;

pub use floorplan::{station_label, table_label, Bounds, FloorPlan, Obstacle, Station, Table};
pub use log::{kind_name, EventKind, EventLog, ServiceEvent};

pub const DEFAULT_TICK_MS: u64 = 100;
/// A robot this close to the counter picks up waiting drinks when it starts a
/// line trace.
pub const PICKUP_RANGE_M: f64 = 1.0;
/// Engagement and delivery distance to a table centre.
pub const SERVICE_RANGE_M: f64 = 0.6;
pub const BATTERY_WARNING_S: f64 = 1800.0;
pub const MAX_PARTY_SIZE: u8 = 4;
/// Customer utterance gap bounds.
pub const UTTERANCE_GAP_MS: (u64, u64) = (20_000, 90_000);

const CUSTOMER_LINES: [&str; 6] = [
    "Hello!",
    "Could we see the menu?",
    "Where are you working from today?",
    "This is delicious, thank you.",
    "Can you wave to us?",
    "How long have you been doing this job?",
];

pub(crate) fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Speaking time for an utterance: twelve characters per second, at least one
/// second.
pub fn speech_duration_ms(text: &str) -> u64 {
    (text.chars().count() as u64 * 1000 / 12).max(1000)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorldError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("floor plan: {0}")]
    FloorPlan(String),
    #[error("capacity exceeded: {0}")]
    CapacityExceeded(String),
    #[error("customers can only be seated during Entry or before opening")]
    NotEntryPhase,
    #[error("event log line {line}: {message}")]
    LogParse { line: usize, message: String },
    #[error("robot setup: {0}")]
    RobotSetup(String),
    #[error("staff move: {0}")]
    StaffMove(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConnId(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "at", content = "id", rename_all = "snake_case")]
pub enum DrinkLocation {
    Counter,
    Robot(RobotId),
    Table(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Drink {
    pub id: u32,
    pub table: u32,
    pub session: usize,
    pub location: DrinkLocation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Party {
    pub session: usize,
    pub table: u32,
    pub size: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotSetup {
    pub id: RobotId,
    pub kind: RobotKind,
    pub pose: Pose,
    /// Table a stationary robot sits on.
    #[serde(default)]
    pub table: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldConfig {
    pub plan: FloorPlan,
    pub session_plan: SessionPlan,
    pub schedule: DaySchedule,
    pub robots: Vec<RobotSetup>,
    /// Party sizes per session, seated at the preceding Entry.
    pub parties: Vec<Vec<u8>>,
    pub seed: u64,
    pub tick_ms: u64,
}

impl WorldConfig {
    /// Reference plan and day: mobile robots 1-3 docked at stations 1-3,
    /// stationary robots 4 and 5 on tables 2 and 5, no customers.
    pub fn reference(seed: u64) -> Self {
        let plan = FloorPlan::reference();
        Self {
            robots: reference_robots(&plan),
            plan,
            session_plan: SessionPlan::standard(),
            schedule: DaySchedule::standard("reference"),
            parties: Vec::new(),
            seed,
            tick_ms: DEFAULT_TICK_MS,
        }
    }
}

pub fn reference_robots(plan: &FloorPlan) -> Vec<RobotSetup> {
    let mut robots: Vec<RobotSetup> = plan
        .stations
        .iter()
        .take(3)
        .enumerate()
        .map(|(i, s)| RobotSetup {
            id: RobotId(i as u32 + 1),
            kind: RobotKind::Mobile,
            pose: Pose::new(s.position[0], s.position[1], 0.0),
            table: None,
        })
        .collect();
    for (id, table) in [(4, 2), (5, 5)] {
        if let Some(t) = plan.table(table) {
            robots.push(RobotSetup {
                id: RobotId(id),
                kind: RobotKind::Stationary,
                pose: Pose::new(t.position[0], t.position[1], 0.0),
                table: Some(table),
            });
        }
    }
    robots
}

#[derive(Debug, Clone, PartialEq)]
pub enum Recipient {
    Conn(ConnId),
    All,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outbound {
    pub to: Recipient,
    pub event: RobotEvent,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TickOutput {
    pub clock_ms: u64,
    pub events: Vec<ServiceEvent>,
    pub outbound: Vec<Outbound>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldRobot {
    pub id: RobotId,
    pub state: RobotState,
    pub smiling: bool,
    pub engaged: Option<u32>,
    /// Table a stationary robot sits on.
    pub home_table: Option<u32>,
    segment: Option<Segment>,
    battery_warned: bool,
}

#[derive(Debug, Clone, PartialEq)]
struct Segment {
    start_ms: u64,
    from: [f64; 2],
    table: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Marker {
    End(usize),
    Start(usize, Phase),
}

#[derive(Debug, Clone, PartialEq)]
enum Queued {
    Command(ConnId, OperatorCommand),
    StaffMove(RobotId, u32),
}

#[derive(Debug, Clone, PartialEq)]
struct UtteranceClock {
    next_ms: u64,
    count: usize,
}

#[derive(Debug, Clone)]
pub struct WorldState {
    config: WorldConfig,
    clock_ms: u64,
    robots: Vec<WorldRobot>,
    parties: Vec<Party>,
    drinks: Vec<Drink>,
    next_drink: u32,
    ordered: Vec<(usize, u32)>,
    current: Option<(usize, Phase)>,
    markers: Vec<(u64, Marker)>,
    cursor: usize,
    day_end_ms: u64,
    queue: VecDeque<Queued>,
    last_seq: BTreeMap<ConnId, u64>,
    utterances: BTreeMap<u32, UtteranceClock>,
    pending: Vec<ServiceEvent>,
    rng: ChaCha8Rng,
}

impl WorldState {
    pub fn new(config: WorldConfig) -> Result<Self, WorldError> {
        config.plan.validate()?;
        if config.tick_ms == 0 {
            return Err(WorldError::RobotSetup("tick must be positive".into()));
        }
        let mut robots: Vec<WorldRobot> = Vec::new();
        for r in &config.robots {
            if robots.iter().any(|o| o.id == r.id) {
                return Err(WorldError::RobotSetup(format!("duplicate robot id {}", r.id)));
            }
            if let Some(t) = r.table {
                if config.plan.table(t).is_none() {
                    return Err(WorldError::RobotSetup(format!("{} sits on unknown table {t}", r.id)));
                }
            }
            robots.push(WorldRobot {
                id: r.id,
                state: RobotState::new(RobotSpec::new(r.kind), r.pose),
                smiling: false,
                engaged: None,
                home_table: r.table,
                segment: None,
                battery_warned: false,
            });
        }
        robots.sort_by_key(|r| r.id);
        for (s, parties) in config.parties.iter().enumerate() {
            check_parties(parties, config.plan.tables.len())
                .map_err(|e| WorldError::CapacityExceeded(format!("session {s}: {e}")))?;
        }

        let cycle_ms = u64::from(config.session_plan.cycle_s()) * 1000;
        let mut markers = Vec::new();
        for (s, &start) in config.schedule.session_starts_s.iter().enumerate() {
            let start = u64::from(start) * 1000;
            for (offset, phase) in config.session_plan.boundaries_s() {
                markers.push((start + u64::from(offset) * 1000, Marker::Start(s, phase)));
            }
            markers.push((start + cycle_ms, Marker::End(s)));
        }
        // ends sort before starts at the same instant
        markers.sort_by_key(|&(t, m)| (t, matches!(m, Marker::Start(..))));
        let day_end_ms = markers.last().map_or(0, |m| m.0);

        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
            clock_ms: 0,
            robots,
            parties: Vec::new(),
            drinks: Vec::new(),
            next_drink: 1,
            ordered: Vec::new(),
            current: None,
            markers,
            cursor: 0,
            day_end_ms,
            queue: VecDeque::new(),
            last_seq: BTreeMap::new(),
            utterances: BTreeMap::new(),
            pending: Vec::new(),
        })
    }

    pub fn reference(seed: u64) -> Self {
        Self::new(WorldConfig::reference(seed)).expect("reference config is valid")
    }

    pub fn config(&self) -> &WorldConfig {
        &self.config
    }

    pub fn plan(&self) -> &FloorPlan {
        &self.config.plan
    }

    pub fn clock_ms(&self) -> u64 {
        self.clock_ms
    }

    pub fn clock_s(&self) -> f64 {
        self.clock_ms as f64 / 1000.0
    }

    pub fn day_end_ms(&self) -> u64 {
        self.day_end_ms
    }

    pub fn is_day_over(&self) -> bool {
        self.clock_ms >= self.day_end_ms && self.cursor >= self.markers.len()
    }

    pub fn current_phase(&self) -> Option<(usize, Phase)> {
        self.current
    }

    pub fn robots(&self) -> &[WorldRobot] {
        &self.robots
    }

    pub fn robot(&self, id: RobotId) -> Option<&WorldRobot> {
        self.robots.iter().find(|r| r.id == id)
    }

    pub fn parties(&self) -> &[Party] {
        &self.parties
    }

    pub fn drinks(&self) -> &[Drink] {
        &self.drinks
    }

    pub fn occupied_tables(&self) -> Vec<u32> {
        let mut t: Vec<u32> = self.parties.iter().map(|p| p.table).collect();
        t.sort_unstable();
        t
    }

    pub fn carried_by(&self, id: RobotId) -> Vec<&Drink> {
        self.drinks
            .iter()
            .filter(|d| d.location == DrinkLocation::Robot(id))
            .collect()
    }

    /// Queues a command for the next tick.
    pub fn submit(&mut self, conn: ConnId, cmd: OperatorCommand) {
        self.queue.push_back(Queued::Command(conn, cmd));
    }

    /// Queues a staff move of a stationary robot onto `table`.
    pub fn schedule_staff_move(&mut self, robot: RobotId, table: u32) -> Result<(), WorldError> {
        let r = self
            .robot(robot)
            .ok_or_else(|| WorldError::StaffMove(format!("unknown robot {robot}")))?;
        if r.state.spec.is_mobile() {
            return Err(WorldError::StaffMove(format!("{robot} drives itself")));
        }
        if self.plan().table(table).is_none() {
            return Err(WorldError::StaffMove(format!("unknown table {table}")));
        }
        self.queue.push_back(Queued::StaffMove(robot, table));
        Ok(())
    }

    /// Seats parties at the lowest free table ids. Allowed during Entry (for
    /// the next session) or before opening (for the first). Events appear in
    /// the next tick's output.
    pub fn seat_customers(&mut self, parties: &[u8]) -> Result<(), WorldError> {
        let session = match self.current {
            None if self.cursor == 0 => 0,
            Some((s, Phase::Entry)) => s + 1,
            _ => return Err(WorldError::NotEntryPhase),
        };
        let events = self.seat(session, parties, self.clock_ms)?;
        self.pending.extend(events);
        Ok(())
    }

    fn seat(&mut self, session: usize, sizes: &[u8], t: u64) -> Result<Vec<ServiceEvent>, WorldError> {
        let free: Vec<u32> = self
            .config
            .plan
            .tables
            .iter()
            .map(|t| t.id)
            .filter(|id| !self.parties.iter().any(|p| p.table == *id))
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        check_parties(sizes, free.len()).map_err(WorldError::CapacityExceeded)?;
        for (&size, &table) in sizes.iter().zip(&free) {
            let seats = self.config.plan.table(table).map_or(MAX_PARTY_SIZE, |t| t.seat_count);
            if size > seats {
                return Err(WorldError::CapacityExceeded(format!(
                    "party of {size} at table {table} with {seats} seats"
                )));
            }
        }
        let mut events = Vec::new();
        for (&size, &table) in sizes.iter().zip(&free) {
            self.parties.push(Party { session, table, size });
            events.push(ServiceEvent::new(t, EventKind::CustomersSeated { session, party_size: size }).table(table));
        }
        Ok(events)
    }

    /// Advances the world by one tick.
    pub fn tick(&mut self) -> TickOutput {
        let t0 = self.clock_ms;
        let mut out = TickOutput::default();
        out.events.append(&mut self.pending);
        self.process_markers(t0, &mut out);
        self.fire_utterances(t0, &mut out);
        while let Some(q) = self.queue.pop_front() {
            match q {
                Queued::Command(conn, cmd) => {
                    let seq = cmd.seq;
                    match self.apply(conn, cmd, t0) {
                        Ok(events) => {
                            out.events.extend(events);
                            out.outbound.push(Outbound {
                                to: Recipient::Conn(conn),
                                event: RobotEvent::Ack { seq },
                            });
                        }
                        Err(reason) => out.outbound.push(Outbound {
                            to: Recipient::Conn(conn),
                            event: RobotEvent::Reject { seq, reason },
                        }),
                    }
                }
                Queued::StaffMove(robot, table) => self.staff_move(robot, table, t0, &mut out),
            }
        }

        let t1 = t0 + self.config.tick_ms;
        let dt = self.config.tick_ms as f64 / 1000.0;
        for i in 0..self.robots.len() {
            self.step_robot(i, dt, t1, &mut out);
        }
        self.clock_ms = t1;
        self.process_markers(t1, &mut out);
        self.update_engagement(t1, &mut out);
        out.clock_ms = t1;
        out
    }

    fn process_markers(&mut self, upto: u64, out: &mut TickOutput) {
        while let Some(&(t, marker)) = self.markers.get(self.cursor) {
            if t > upto {
                break;
            }
            self.cursor += 1;
            match marker {
                Marker::Start(session, phase) => {
                    if session == 0 && phase == Phase::OpeningTalk {
                        if let Some(sizes) = self.config.parties.first().cloned() {
                            let seated = self.seat(0, &sizes, t).expect("parties validated at construction");
                            out.events.extend(seated);
                        }
                    }
                    self.current = Some((session, phase));
                    out.events.push(ServiceEvent::new(t, EventKind::PhaseChange { session, phase }));
                    out.outbound.push(Outbound {
                        to: Recipient::All,
                        event: RobotEvent::PhaseChange { session, phase },
                    });
                    if !phase.is_robot_service() {
                        self.end_all_engagements(t, out);
                    }
                    match phase {
                        Phase::Break => {
                            let mut leaving: Vec<Party> = std::mem::take(&mut self.parties);
                            leaving.sort_by_key(|p| p.table);
                            for p in leaving {
                                out.events.push(
                                    ServiceEvent::new(t, EventKind::CustomersLeft { session: p.session }).table(p.table),
                                );
                            }
                            self.drinks.clear();
                            self.utterances.clear();
                        }
                        Phase::Entry => {
                            if let Some(sizes) = self.config.parties.get(session + 1).cloned() {
                                match self.seat(session + 1, &sizes, t) {
                                    Ok(seated) => out.events.extend(seated),
                                    Err(_) => unreachable!("parties validated at construction"),
                                }
                            }
                        }
                        _ => {}
                    }
                    if phase.is_customer_facing() {
                        for table in self.occupied_tables() {
                            if !self.utterances.contains_key(&table) {
                                let gap = self.rng.random_range(UTTERANCE_GAP_MS.0..=UTTERANCE_GAP_MS.1);
                                self.utterances.insert(table, UtteranceClock { next_ms: t + gap, count: 0 });
                            }
                        }
                    }
                }
                Marker::End(session) => {
                    for r in &mut self.robots {
                        if r.smiling {
                            r.smiling = false;
                            out.events.push(ServiceEvent::new(t, EventKind::SmileTagOff).robot(r.id));
                        }
                    }
                    self.end_all_engagements(t, out);
                    out.events.push(ServiceEvent::new(t, EventKind::SessionEnd { session }));
                    self.current = None;
                }
            }
        }
    }

    fn fire_utterances(&mut self, t: u64, out: &mut TickOutput) {
        if !self.current.is_some_and(|(_, p)| p.is_customer_facing()) {
            return;
        }
        let due: Vec<u32> = self
            .utterances
            .iter()
            .filter(|(_, c)| c.next_ms <= t)
            .map(|(&table, _)| table)
            .collect();
        for table in due {
            let gap = self.rng.random_range(UTTERANCE_GAP_MS.0..=UTTERANCE_GAP_MS.1);
            let clock = self.utterances.get_mut(&table).expect("due table");
            let text = CUSTOMER_LINES[clock.count % CUSTOMER_LINES.len()];
            clock.count += 1;
            clock.next_ms = t + gap;
            out.events.push(
                ServiceEvent::new(
                    t,
                    EventKind::Utterance {
                        text: text.to_owned(),
                        duration_ms: speech_duration_ms(text),
                        voice: None,
                    },
                )
                .table(table),
            );
            out.outbound.push(Outbound {
                to: Recipient::All,
                event: RobotEvent::CustomerUtterance {
                    table,
                    text: text.to_owned(),
                },
            });
        }
    }

    fn apply(&mut self, conn: ConnId, cmd: OperatorCommand, t: u64) -> Result<Vec<ServiceEvent>, RejectReason> {
        if self.last_seq.get(&conn).is_some_and(|&last| cmd.seq <= last) {
            return Err(RejectReason::SequenceOutOfOrder);
        }
        self.last_seq.insert(conn, cmd.seq);
        if self.is_day_over() {
            return Err(RejectReason::DayOver);
        }
        let idx = self
            .robots
            .iter()
            .position(|r| r.id == cmd.robot_id)
            .ok_or(RejectReason::UnknownRobot)?;
        if cmd.validate().is_err() {
            return Err(match cmd.kind {
                CommandKind::Speak { .. } => RejectReason::TextTooLong,
                _ => RejectReason::InvalidArgument,
            });
        }
        let id = cmd.robot_id;
        let mut events = Vec::new();
        match cmd.kind {
            CommandKind::SelectHeadMotion { motion } => {
                let m = self.robots[idx].state.catalog.lookup_head(&motion).map_err(reject)?;
                self.robots[idx].state.start_motion(Motion::Head(m)).map_err(reject)?;
                events.push(ServiceEvent::new(t, EventKind::MotionPlayed { motion }).robot(id));
            }
            CommandKind::SelectArmMotion { motion } => {
                let m = self.robots[idx].state.catalog.lookup_arm(&motion).map_err(reject)?;
                self.robots[idx].state.start_motion(Motion::Arm(m)).map_err(reject)?;
                events.push(ServiceEvent::new(t, EventKind::MotionPlayed { motion }).robot(id));
            }
            CommandKind::Locomote { direction, duration_s } => {
                let r = &mut self.robots[idx];
                r.state.locomote(direction, duration_s).map_err(reject)?;
                r.segment = Some(Segment {
                    start_ms: t,
                    from: r.state.pose.position(),
                    table: None,
                });
            }
            CommandKind::StartLineTrace { target } => {
                let pos = self.robots[idx].state.pose.position();
                let path = self
                    .config
                    .plan
                    .line_paths
                    .iter()
                    .filter(|p| p.target_label == target)
                    .min_by(|a, b| dist(a.start(), pos).total_cmp(&dist(b.start(), pos)))
                    .cloned()
                    .ok_or(RejectReason::UnknownTarget)?;
                self.robots[idx].state.start_line_trace(&path).map_err(reject)?;
                let table = self.config.plan.tables.iter().find(|tb| table_label(tb.id) == target).map(|tb| tb.id);
                self.robots[idx].segment = Some(Segment {
                    start_ms: t,
                    from: pos,
                    table,
                });
                if let Some(table) = table {
                    if dist(pos, self.config.plan.counter) <= PICKUP_RANGE_M {
                        for d in &mut self.drinks {
                            if d.table == table && d.location == DrinkLocation::Counter {
                                d.location = DrinkLocation::Robot(id);
                                events.push(
                                    ServiceEvent::new(t, EventKind::DrinkPickedUp { drink: d.id })
                                        .robot(id)
                                        .table(table),
                                );
                            }
                        }
                    }
                }
            }
            CommandKind::Speak { text, voice } => {
                let r = &self.robots[idx];
                if r.state.battery_s <= 0.0 {
                    return Err(RejectReason::BatteryEmpty);
                }
                let table = r.engaged;
                let mobile = r.state.spec.is_mobile();
                let mut e = ServiceEvent::new(
                    t,
                    EventKind::Utterance {
                        duration_ms: speech_duration_ms(&text),
                        text,
                        voice: Some(voice),
                    },
                )
                .robot(id);
                e.table = table;
                events.push(e);
                if let (Some(table), Some((session, Phase::OrderConfirmation)), true) = (table, self.current, mobile) {
                    if !self.ordered.contains(&(session, table)) {
                        self.ordered.push((session, table));
                        let drink = self.next_drink;
                        self.next_drink += 1;
                        self.drinks.push(Drink {
                            id: drink,
                            table,
                            session,
                            location: DrinkLocation::Counter,
                        });
                        events.push(ServiceEvent::new(t, EventKind::OrderTaken { drink }).robot(id).table(table));
                    }
                }
            }
            CommandKind::SmileTag { on } => {
                let r = &mut self.robots[idx];
                if r.smiling == on {
                    return Err(RejectReason::SmileTagState);
                }
                r.smiling = on;
                let kind = if on { EventKind::SmileTagOn } else { EventKind::SmileTagOff };
                events.push(ServiceEvent::new(t, kind).robot(id));
            }
            CommandKind::Stop => {
                let was = self.robots[idx].state.stop();
                if was.is_moving() {
                    self.finish_segment(idx, t, true, &mut events);
                    self.deliver(idx, t, &mut events);
                }
            }
        }
        Ok(events)
    }

    fn staff_move(&mut self, robot: RobotId, table: u32, t: u64, out: &mut TickOutput) {
        let Some(idx) = self.robots.iter().position(|r| r.id == robot) else {
            return;
        };
        let Some(pos) = self.config.plan.table(table).map(|tb| tb.position) else {
            return;
        };
        let r = &mut self.robots[idx];
        let from_table = r.home_table;
        r.state.pose.x_m = pos[0];
        r.state.pose.y_m = pos[1];
        r.home_table = Some(table);
        out.events.push(
            ServiceEvent::new(t, EventKind::StaffMove { from_table })
                .robot(robot)
                .table(table),
        );
    }

    fn step_robot(&mut self, i: usize, dt: f64, t1: u64, out: &mut TickOutput) {
        let before = self.robots[i].state.pose;
        let report = match self.robots[i].state.step(dt) {
            Ok(r) => r,
            Err(RobotError::BatteryEmpty) => return,
            Err(e) => unreachable!("fixed tick is valid: {e}"),
        };
        let id = self.robots[i].id;
        let moved = self.robots[i].state.pose != before;
        if moved && self.robots[i].state.spec.is_mobile() {
            if let Some(hit) = self.collision(i) {
                let r = &mut self.robots[i];
                r.state.pose = before;
                r.state.stop();
                out.events.push(ServiceEvent::new(t1, EventKind::Collision { other: hit }).robot(id));
                self.finish_segment(i, t1, true, &mut out.events);
                self.deliver(i, t1, &mut out.events);
                return;
            }
        }
        match report.completed {
            Some(Completion::Locomotion(_)) | Some(Completion::LineTrace { .. }) => {
                self.finish_segment(i, t1, false, &mut out.events);
                self.deliver(i, t1, &mut out.events);
            }
            _ if report.depleted && self.robots[i].segment.is_some() => {
                self.finish_segment(i, t1, true, &mut out.events);
                self.deliver(i, t1, &mut out.events);
            }
            _ => {}
        }
        let r = &mut self.robots[i];
        if !r.battery_warned && r.state.battery_s <= BATTERY_WARNING_S {
            r.battery_warned = true;
            let battery_s = r.state.battery_s;
            out.events.push(ServiceEvent::new(t1, EventKind::BatteryWarning { battery_s }).robot(id));
            out.outbound.push(Outbound {
                to: Recipient::All,
                event: RobotEvent::BatteryWarning { robot_id: id, battery_s },
            });
        }
    }

    /// Returns `Some(other)` when robot `i` overlaps something; `other` is the
    /// robot hit, if any.
    fn collision(&self, i: usize) -> Option<Option<RobotId>> {
        let r = &self.robots[i];
        let spec = &r.state.spec;
        let fp = geometry::footprint(&r.state.pose, spec.length_m, spec.width_m);
        if fp.iter().any(|c| !self.config.plan.inside(*c)) {
            return Some(None);
        }
        for o in &self.config.plan.obstacles {
            if geometry::overlaps(&fp, &geometry::aabb(o.min, o.max)) {
                return Some(None);
            }
        }
        for (j, other) in self.robots.iter().enumerate() {
            if j == i || !other.state.spec.is_mobile() {
                continue;
            }
            let ofp = geometry::footprint(&other.state.pose, other.state.spec.length_m, other.state.spec.width_m);
            if geometry::overlaps(&fp, &ofp) {
                return Some(Some(other.id));
            }
        }
        None
    }

    fn finish_segment(&mut self, i: usize, t: u64, halted: bool, events: &mut Vec<ServiceEvent>) {
        let r = &mut self.robots[i];
        if let Some(seg) = r.segment.take() {
            let mut e = ServiceEvent::new(
                t,
                EventKind::MoveSegment {
                    start_ms: seg.start_ms,
                    from: seg.from,
                    to: r.state.pose.position(),
                    halted,
                },
            )
            .robot(r.id);
            e.table = seg.table;
            events.push(e);
        }
    }

    fn deliver(&mut self, i: usize, t: u64, events: &mut Vec<ServiceEvent>) {
        let id = self.robots[i].id;
        let pos = self.robots[i].state.pose.position();
        for d in &mut self.drinks {
            if d.location != DrinkLocation::Robot(id) {
                continue;
            }
            let Some(table) = self.config.plan.table(d.table) else {
                continue;
            };
            if dist(pos, table.position) <= SERVICE_RANGE_M {
                d.location = DrinkLocation::Table(d.table);
                events.push(
                    ServiceEvent::new(t, EventKind::DrinkDelivered { drink: d.id })
                        .robot(id)
                        .table(d.table),
                );
            }
        }
    }

    fn engagement_target(&self, r: &WorldRobot) -> Option<u32> {
        if !self.current.is_some_and(|(_, p)| p.is_robot_service()) {
            return None;
        }
        let pos = r.state.pose.position();
        self.parties
            .iter()
            .filter_map(|p| self.config.plan.table(p.table))
            .map(|tb| (dist(pos, tb.position), tb.id))
            .filter(|(d, _)| *d <= SERVICE_RANGE_M)
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .map(|(_, id)| id)
    }

    fn update_engagement(&mut self, t: u64, out: &mut TickOutput) {
        for i in 0..self.robots.len() {
            let target = self.engagement_target(&self.robots[i]);
            let r = &mut self.robots[i];
            if r.engaged == target {
                continue;
            }
            if let Some(old) = r.engaged {
                out.events.push(ServiceEvent::new(t, EventKind::EngageEnd).robot(r.id).table(old));
            }
            if let Some(new) = target {
                out.events.push(ServiceEvent::new(t, EventKind::EngageStart).robot(r.id).table(new));
            }
            r.engaged = target;
        }
    }

    fn end_all_engagements(&mut self, t: u64, out: &mut TickOutput) {
        for r in &mut self.robots {
            if let Some(old) = r.engaged.take() {
                out.events.push(ServiceEvent::new(t, EventKind::EngageEnd).robot(r.id).table(old));
            }
        }
    }

    pub fn digest(&self, r: &WorldRobot) -> RobotDigest {
        RobotDigest {
            id: r.id,
            kind: r.state.spec.kind,
            pose: r.state.pose,
            mode: r.state.mode.clone(),
            battery_s: r.state.battery_s,
            smiling: r.smiling,
            carrying: self.carried_by(r.id).iter().map(|d| d.table).collect(),
            table: r.engaged.or(r.home_table),
        }
    }

    pub fn view(&self) -> WorldView {
        let (session, phase, remaining) = match self.current {
            Some((s, _)) => {
                let start = u64::from(self.config.schedule.session_starts_s[s]) * 1000;
                let into = (self.clock_ms.saturating_sub(start)) as f64 / 1000.0;
                match self.config.session_plan.phase_remaining(into) {
                    Ok((p, rem)) => (Some(s), Some(p), rem),
                    Err(_) => (Some(s), None, 0.0),
                }
            }
            None => (None, None, 0.0),
        };
        WorldView {
            clock_ms: self.clock_ms,
            session,
            phase,
            phase_remaining_s: remaining,
            robots: self.robots.iter().map(|r| self.digest(r)).collect(),
            occupied_tables: self.occupied_tables(),
        }
    }

    pub fn welcome(&self) -> RobotEvent {
        RobotEvent::Welcome {
            protocol_version: PROTOCOL_VERSION,
            robots: self
                .robots
                .iter()
                .map(|r| RobotSummary {
                    id: r.id,
                    kind: r.state.spec.kind,
                })
                .collect(),
        }
    }

    /// Robot state for tests and tools.
    pub fn robot_mode(&self, id: RobotId) -> Option<&Mode> {
        self.robot(id).map(|r| &r.state.mode)
    }
}

fn reject(e: RobotError) -> RejectReason {
    match e {
        RobotError::UnknownMotion(_) => RejectReason::UnknownMotion,
        RobotError::Busy => RejectReason::Busy,
        RobotError::NotMobile => RejectReason::NotMobile,
        RobotError::PathUnreachable { .. } => RejectReason::PathUnreachable,
        RobotError::BatteryEmpty => RejectReason::BatteryEmpty,
        RobotError::InvalidTimestep(_) | RobotError::InvalidDuration(_) | RobotError::InvalidPath(_) => {
            RejectReason::InvalidArgument
        }
    }
}

fn check_parties(sizes: &[u8], tables: usize) -> Result<(), String> {
    if sizes.len() > tables {
        return Err(format!("{} parties for {tables} free tables", sizes.len()));
    }
    if let Some(s) = sizes.iter().find(|s| !(1..=MAX_PARTY_SIZE).contains(s)) {
        return Err(format!("party size {s} outside 1..={MAX_PARTY_SIZE}"));
    }
    Ok(())
}
