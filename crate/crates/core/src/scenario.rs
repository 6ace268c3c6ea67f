//! Scripted headless runs.
//!
//! A scenario script is a JSON document:
//!
//! ```json
//! {
//!   "name": "canned-day",
//!   "floorplan": null,
//!   "roster": null,
//!   "schedule": { "date": "12/3", "sessions": 4 },
//!   "seed": 7,
//!   "customers": [[3, 2, 4, 1, 2, 3]],
//!   "operators": [
//!     { "pilot": "P01", "robot": 1, "commands": [
//!       { "t_ms": 300000, "type": "start_line_trace", "target": "table-1" }
//!     ] }
//!   ],
//!   "staff_moves": [ { "t_ms": 1500000, "robot": 4, "table": 3 } ]
//! }
//! ```
//!
//! `floorplan` and `roster` are paths relative to the script; a missing plan
//! means the reference plan. Each operator is one connection and its commands
//! get sequence numbers 1, 2, ... in list order.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::protocol::{CommandKind, OperatorCommand, RejectReason, RobotEvent, VoiceMode};
use crate::robot::{Direction, MAX_SPEED_MPS};
use crate::session::{DaySchedule, Pilot, Roster, SessionPlan};
use crate::world::{
    reference_robots, station_label, table_label, ConnId, EventLog, FloorPlan, Recipient, WorldConfig, WorldError,
    WorldState, DEFAULT_TICK_MS,
};
use crate::RobotId;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error("scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    World(#[from] WorldError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSpec {
    pub date: String,
    pub sessions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedCommand {
    pub t_ms: u64,
    #[serde(flatten)]
    pub kind: CommandKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorScript {
    #[serde(default)]
    pub pilot: Option<String>,
    pub robot: RobotId,
    pub commands: Vec<TimedCommand>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaffMoveScript {
    pub t_ms: u64,
    pub robot: RobotId,
    pub table: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioScript {
    pub name: String,
    #[serde(default)]
    pub floorplan: Option<String>,
    #[serde(default)]
    pub roster: Option<String>,
    pub schedule: ScheduleSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub customers: Vec<Vec<u8>>,
    #[serde(default)]
    pub operators: Vec<OperatorScript>,
    #[serde(default)]
    pub staff_moves: Vec<StaffMoveScript>,
    /// Directory relative references resolve against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub log: EventLog,
    pub acks: usize,
    pub rejects: Vec<(RobotId, u64, RejectReason)>,
    pub working_time_s: u64,
}

impl ScenarioScript {
    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let mut s = Self::from_json(&text)?;
        s.base_dir = path.parent().map(Path::to_path_buf);
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        serde_json::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    fn resolve(&self, rel: &str) -> PathBuf {
        match &self.base_dir {
            Some(dir) => dir.join(rel),
            None => PathBuf::from(rel),
        }
    }

    pub fn floor_plan(&self) -> Result<FloorPlan, ScenarioError> {
        match &self.floorplan {
            None => Ok(FloorPlan::reference()),
            Some(p) => Ok(FloorPlan::load(&self.resolve(p))?),
        }
    }

    pub fn load_roster(&self) -> Result<Option<Vec<Pilot>>, ScenarioError> {
        let Some(p) = &self.roster else { return Ok(None) };
        let path = self.resolve(p);
        let text = std::fs::read_to_string(&path).map_err(|e| ScenarioError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let roster = Roster::from_json(&text).map_err(|e| ScenarioError::Parse(format!("roster: {e}")))?;
        Ok(Some(roster.pilots))
    }

    /// World configuration for this script with `seed`.
    pub fn world_config(&self, seed: u64) -> Result<WorldConfig, ScenarioError> {
        let plan = self.floor_plan()?;
        let session_plan = SessionPlan::standard();
        if self.schedule.sessions == 0 {
            return Err(ScenarioError::Invalid("a day needs at least one session".into()));
        }
        let schedule = DaySchedule::back_to_back(self.schedule.date.clone(), self.schedule.sessions, &session_plan);
        if self.customers.len() > self.schedule.sessions {
            return Err(ScenarioError::Invalid(format!(
                "customers listed for {} sessions, day has {}",
                self.customers.len(),
                self.schedule.sessions
            )));
        }
        Ok(WorldConfig {
            robots: reference_robots(&plan),
            plan,
            session_plan,
            schedule,
            parties: self.customers.clone(),
            seed,
            tick_ms: DEFAULT_TICK_MS,
        })
    }

    fn validate(&self, world: &WorldState) -> Result<(), ScenarioError> {
        let day_end = world.day_end_ms();
        let pilots = self.load_roster()?;
        for (i, op) in self.operators.iter().enumerate() {
            if world.robot(op.robot).is_none() {
                return Err(ScenarioError::Invalid(format!("operator {i}: unknown robot {}", op.robot)));
            }
            if let (Some(pilots), Some(id)) = (&pilots, &op.pilot) {
                if !pilots.iter().any(|p| &p.id == id) {
                    return Err(ScenarioError::Invalid(format!("operator {i}: pilot {id} not in roster")));
                }
            }
            if let Some(c) = op.commands.iter().find(|c| c.t_ms >= day_end) {
                return Err(ScenarioError::Invalid(format!(
                    "operator {i}: command at {} ms is after the day ends ({day_end} ms)",
                    c.t_ms
                )));
            }
        }
        if let Some(m) = self.staff_moves.iter().find(|m| m.t_ms >= day_end) {
            return Err(ScenarioError::Invalid(format!("staff move at {} ms is after the day ends", m.t_ms)));
        }
        Ok(())
    }
}

enum Action<'a> {
    Command(usize, u64, &'a TimedCommand),
    Staff(&'a StaffMoveScript),
}

/// Runs the script headless with `seed` and returns the outcome.
pub fn run_scenario(script: &ScenarioScript, seed: u64) -> Result<RunOutcome, ScenarioError> {
    let config = script.world_config(seed)?;
    let plan = config.session_plan.clone();
    let n_sessions = config.schedule.n_sessions() as u64;
    let mut world = WorldState::new(config)?;
    script.validate(&world)?;

    let mut actions: Vec<(u64, usize, Action)> = Vec::new();
    for (op, s) in script.operators.iter().enumerate() {
        for (k, c) in s.commands.iter().enumerate() {
            actions.push((c.t_ms, actions.len(), Action::Command(op, k as u64 + 1, c)));
        }
    }
    for m in &script.staff_moves {
        actions.push((m.t_ms, actions.len(), Action::Staff(m)));
    }
    actions.sort_by_key(|a| (a.0, a.1));

    let mut log = EventLog::default();
    let mut acks = 0;
    let mut rejects = Vec::new();
    let mut next = 0;
    while !world.is_day_over() {
        while let Some((t, _, action)) = actions.get(next) {
            if *t > world.clock_ms() {
                break;
            }
            match action {
                Action::Command(op, seq, c) => {
                    let robot = script.operators[*op].robot;
                    world.submit(ConnId(*op as u64), OperatorCommand::new(*seq, robot, c.kind.clone()));
                }
                Action::Staff(m) => world.schedule_staff_move(m.robot, m.table)?,
            }
            next += 1;
        }
        let out = world.tick();
        log.events.extend(out.events);
        for o in out.outbound {
            if let Recipient::Conn(ConnId(op)) = o.to {
                match o.event {
                    RobotEvent::Ack { .. } => acks += 1,
                    RobotEvent::Reject { seq, reason } => {
                        rejects.push((script.operators[op as usize].robot, seq, reason));
                    }
                    _ => {}
                }
            }
        }
    }
    Ok(RunOutcome {
        log,
        acks,
        rejects,
        working_time_s: u64::from(plan.working_s_per_cycle()) * n_sessions,
    })
}

/// Byte-identical event log for identical `(script, seed)`.
pub fn reproducible_run(script: &ScenarioScript, seed: u64) -> Result<EventLog, ScenarioError> {
    run_scenario(script, seed).map(|o| o.log)
}

/// Script with no commands and no customers.
pub fn empty_scenario(sessions: usize) -> ScenarioScript {
    ScenarioScript {
        name: "empty".into(),
        floorplan: None,
        roster: None,
        schedule: ScheduleSpec {
            date: "empty".into(),
            sessions,
        },
        seed: 0,
        customers: Vec::new(),
        operators: Vec::new(),
        staff_moves: Vec::new(),
        base_dir: None,
    }
}

const PARTY_ROTATION: [[u8; 6]; 4] = [[3, 2, 4, 1, 2, 3], [2, 4, 3, 2, 1, 4], [4, 1, 2, 3, 4, 2], [1, 3, 2, 4, 3, 2]];

/// Party sizes for `sessions` sessions with every table taken.
pub fn default_parties(sessions: usize) -> Vec<Vec<u8>> {
    (0..sessions).map(|s| PARTY_ROTATION[s % PARTY_ROTATION.len()].to_vec()).collect()
}

/// Seconds a robot is given to finish a line of `length_m`.
fn travel_budget_s(length_m: f64) -> u64 {
    (length_m / MAX_SPEED_MPS * 1.1).ceil() as u64 + 2
}

struct Ops {
    commands: Vec<TimedCommand>,
}

impl Ops {
    fn at(&mut self, t_s: u64, kind: CommandKind) {
        self.commands.push(TimedCommand { t_ms: t_s * 1000, kind });
    }

    fn say(&mut self, t_s: u64, text: &str) {
        self.at(
            t_s,
            CommandKind::Speak {
                text: text.into(),
                voice: VoiceMode::Synthesized,
            },
        );
    }

    fn smile(&mut self, t_s: u64, on: bool) {
        self.at(t_s, CommandKind::SmileTag { on });
    }

    fn trace(&mut self, t_s: u64, target: String) {
        self.at(t_s, CommandKind::StartLineTrace { target });
    }

    fn head(&mut self, t_s: u64, id: &str) {
        self.at(t_s, CommandKind::SelectHeadMotion { motion: id.into() });
    }

    fn arm(&mut self, t_s: u64, id: &str) {
        self.at(t_s, CommandKind::SelectArmMotion { motion: id.into() });
    }
}

/// Full service day on the reference plan. Robot 1 serves the south tables
/// and robot 3 the north tables, each from its own lane; in free talk robots
/// 1, 2 and 3 visit tables 1, 2 and 6 while staff carry the tabletop robots
/// to tables 3 and 4.
pub fn canned_day(sessions: usize, seed: u64) -> ScenarioScript {
    let plan = FloorPlan::reference();
    let cycle = u64::from(SessionPlan::standard().cycle_s());
    let budget = |station: u32, table: u32| {
        let id = format!("s{station}-t{table}");
        let p = plan.line_paths.iter().find(|p| p.id == id).expect("reference path");
        travel_budget_s(p.length())
    };
    let mut ops: Vec<Ops> = (0..5).map(|_| Ops { commands: Vec::new() }).collect();
    let mut staff = Vec::new();

    for s in 0..sessions as u64 {
        let base = s * cycle;
        for (i, op) in ops.iter_mut().enumerate().take(3) {
            let t = base + 20 + i as u64 * 5;
            op.say(t, "Welcome to the avatar robot cafe!");
            op.arm(t + 5, "raise_one_hand");
        }

        // order round and drink round for the two serving robots
        for (round, start) in [(0, base + 300), (1, base + 900)] {
            for (op_idx, station, tables) in [(0usize, 1u32, [1u32, 2, 3]), (2, 3, [4, 5, 6])] {
                let op = &mut ops[op_idx];
                let mut t = start + 5;
                for table in tables {
                    let travel = budget(station, table);
                    op.trace(t, table_label(table));
                    t += travel;
                    op.smile(t, true);
                    if round == 0 {
                        op.say(t + 1, "Hello! What would you like to drink today?");
                        op.head(t + 8, "nod_once");
                    } else {
                        op.say(t + 1, "Here is your drink. Please enjoy!");
                        op.arm(t + 8, "bye_bye");
                    }
                    op.smile(t + 20, false);
                    op.trace(t + 22, station_label(station));
                    t += 22 + travel;
                }
            }
        }

        // free talk
        let free = base + 1500;
        for (op_idx, station, table) in [(0usize, 1u32, 1u32), (1, 2, 2), (2, 3, 6)] {
            let op = &mut ops[op_idx];
            let travel = budget(station, table);
            let arrive = free + 5 + travel;
            op.trace(free + 5, table_label(table));
            op.smile(arrive, true);
            for k in 0..8 {
                let t = arrive + 10 + k * 120;
                op.say(t, "Thank you for coming. Where are you from?");
                op.head(t + 30, if k % 2 == 0 { "nod_once" } else { "nod_twice" });
            }
            op.smile(arrive + 1000, false);
            op.trace(base + 2600 + op_idx as u64 * 20, station_label(station));
        }
        for (robot, table, home) in [(4u32, 3u32, 2u32), (5, 4, 5)] {
            staff.push(StaffMoveScript {
                t_ms: free * 1000,
                robot: RobotId(robot),
                table,
            });
            staff.push(StaffMoveScript {
                t_ms: (base + 3000) * 1000,
                robot: RobotId(robot),
                table: home,
            });
            let op = &mut ops[robot as usize - 1];
            op.smile(free + 30, true);
            for k in 0..5 {
                op.say(free + 40 + k * 200, "Nice to meet you!");
                op.head(free + 60 + k * 200, "look_right");
            }
            op.smile(free + 1000, false);
        }

        for op in ops.iter_mut().take(3) {
            op.say(base + 2720, "Thank you very much. Please come again!");
            op.arm(base + 2730, "bye_bye");
        }
    }

    ScenarioScript {
        name: format!("canned-day-{sessions}"),
        floorplan: None,
        roster: None,
        schedule: ScheduleSpec {
            date: if sessions == 3 { "11/26".into() } else { "12/3".into() },
            sessions,
        },
        seed,
        customers: default_parties(sessions),
        operators: ops
            .into_iter()
            .enumerate()
            .map(|(i, o)| OperatorScript {
                pilot: None,
                robot: RobotId(i as u32 + 1),
                commands: o.commands,
            })
            .collect(),
        staff_moves: staff,
        base_dir: None,
    }
}

/// Script that drives each robot with a fixed command per direction; used in
/// tests that need movement without service.
pub fn drive_only(robot: RobotId, directions: &[(Direction, f64)]) -> ScenarioScript {
    let mut s = empty_scenario(1);
    let mut t = 1000;
    let commands = directions
        .iter()
        .map(|&(direction, duration_s)| {
            let c = TimedCommand {
                t_ms: t,
                kind: CommandKind::Locomote { direction, duration_s },
            };
            t += (duration_s * 1000.0).ceil() as u64 + 200;
            c
        })
        .collect();
    s.operators.push(OperatorScript {
        pilot: None,
        robot,
        commands,
    });
    s
}
