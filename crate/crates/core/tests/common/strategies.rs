//! Generators and per-case checks used by both the property tests and the
//! acceptance runner.

use std::collections::BTreeMap;

use avatar_core::protocol::{
    transmit, ChannelModel, CommandKind, Message, OperatorCommand, RejectReason, RobotEvent, RobotSummary, VoiceMode,
    MAX_TEXT_CHARS,
};
use avatar_core::robot::{
    Completion, Direction, LinePath, MotionCatalog, Pose, RobotKind, RobotSpec, RobotState, MAX_SPEED_MPS,
};
use avatar_core::session::Phase;
use avatar_core::world::{ConnId, FloorPlan, Recipient, WorldState};
use avatar_core::RobotId;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub const DT: f64 = 0.1;
pub const SPEED_EPS: f64 = 1e-9;

#[derive(Debug, Clone)]
pub enum Op {
    Drive(Direction, f64),
    Motion(&'static str),
    Trace(Vec<[f64; 2]>),
    Stop,
    Wait(u32),
}

pub fn op() -> impl Strategy<Value = Op> {
    let ids: Vec<&'static str> = MotionCatalog::default().primitive_ids().collect();
    prop_oneof![
        (0..4usize, 0.05..6.0f64).prop_map(|(d, s)| Op::Drive(Direction::ALL[d], s)),
        prop::sample::select(ids).prop_map(Op::Motion),
        prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64), 1..5)
            .prop_map(|v| Op::Trace(v.into_iter().map(|(x, y)| [x, y]).collect())),
        Just(Op::Stop),
        (1..40u32).prop_map(Op::Wait),
    ]
}

pub fn apply(r: &mut RobotState, op: &Op) {
    match op {
        Op::Drive(d, s) => {
            let _ = r.locomote(*d, *s);
        }
        Op::Motion(id) => {
            let _ = r.start_motion_id(id);
        }
        Op::Trace(offsets) => {
            let p = r.pose.position();
            let mut pts = vec![[p[0] + 0.1, p[1]]];
            pts.extend(offsets.iter().map(|o| [p[0] + o[0], p[1] + o[1]]));
            pts.dedup();
            if let Ok(path) = LinePath::new("rand", pts, "x") {
                let _ = r.start_line_trace(&path);
            }
        }
        Op::Stop => {
            r.stop();
        }
        Op::Wait(_) => {}
    }
}

pub fn speed_script() -> impl Strategy<Value = ((f64, f64, f64), Vec<Op>)> {
    ((-5.0..5.0f64, -5.0..5.0f64, -3.2..3.2f64), prop::collection::vec(op(), 1..12))
}

/// Runs a script on a fresh mobile robot and checks every tick's displacement.
pub fn check_speed_cap(start: (f64, f64, f64), ops: &[Op]) -> Result<(), TestCaseError> {
    let mut r = RobotState::new(RobotSpec::mobile(), Pose::new(start.0, start.1, start.2));
    for o in ops {
        apply(&mut r, o);
        let ticks = if let Op::Wait(n) = o { *n } else { 5 };
        for _ in 0..ticks {
            let before = r.pose.position();
            let rep = r.step(DT).unwrap();
            let after = r.pose.position();
            let d = (after[0] - before[0]).hypot(after[1] - before[1]);
            prop_assert!(d <= MAX_SPEED_MPS * rep.powered_s + SPEED_EPS, "moved {} m in one tick", d);
        }
    }
    Ok(())
}

pub fn plan_polyline() -> impl Strategy<Value = Vec<[f64; 2]>> {
    let b = FloorPlan::reference().bounds;
    let (w, h) = (b.width_m, b.height_m);
    prop::collection::vec((0.3..w - 0.3, 0.3..h - 0.3), 2..7)
        .prop_map(|v| v.into_iter().map(|(x, y)| [x, y]).collect::<Vec<_>>())
        .prop_filter("segments of at least 5 cm", |pts: &Vec<[f64; 2]>| {
            pts.windows(2).all(|s| (s[1][0] - s[0][0]).hypot(s[1][1] - s[0][1]) >= 0.05)
        })
}

/// Traces the polyline from its first point; arrival within 1.5 x L / v and
/// ending within 5 cm of the last waypoint.
pub fn check_line_trace(pts: &[[f64; 2]]) -> Result<(), TestCaseError> {
    let path = LinePath::new("p", pts.to_vec(), "goal").unwrap();
    let limit_s = 1.5 * path.length() / MAX_SPEED_MPS;
    let mut r = RobotState::new(RobotSpec::mobile(), Pose::new(pts[0][0], pts[0][1], 0.0));
    r.start_line_trace(&path).unwrap();
    let mut t = 0.0;
    loop {
        let rep = r.step(DT).unwrap();
        t += DT;
        if let Some(Completion::LineTrace { .. }) = rep.completed {
            break;
        }
        prop_assert!(t <= limit_s + DT, "not arrived after {:.1} s (limit {:.1} s)", t, limit_s);
    }
    prop_assert!(t <= limit_s + 1e-9, "arrived after {:.1} s, limit {:.1} s", t, limit_s);
    let err = r.pose.distance_to(path.end());
    prop_assert!(err <= 0.05, "terminal error {}", err);
    Ok(())
}

const PHASES: [Phase; 7] = [
    Phase::OpeningTalk,
    Phase::OrderConfirmation,
    Phase::DrinkServing,
    Phase::FreeTalk,
    Phase::EndingTalk,
    Phase::Break,
    Phase::Entry,
];

const REASONS: [RejectReason; 12] = [
    RejectReason::UnknownRobot,
    RejectReason::UnknownMotion,
    RejectReason::Busy,
    RejectReason::NotMobile,
    RejectReason::PathUnreachable,
    RejectReason::UnknownTarget,
    RejectReason::BatteryEmpty,
    RejectReason::InvalidArgument,
    RejectReason::SequenceOutOfOrder,
    RejectReason::TextTooLong,
    RejectReason::SmileTagState,
    RejectReason::DayOver,
];

fn command_kind() -> impl Strategy<Value = CommandKind> {
    prop_oneof![
        "[a-z_]{0,12}".prop_map(|motion| CommandKind::SelectHeadMotion { motion }),
        "[a-z_]{0,12}".prop_map(|motion| CommandKind::SelectArmMotion { motion }),
        (0..4usize, 0.001..1e6f64).prop_map(|(d, duration_s)| CommandKind::Locomote {
            direction: Direction::ALL[d],
            duration_s
        }),
        "[a-z0-9-]{0,12}".prop_map(|target| CommandKind::StartLineTrace { target }),
        (any::<String>(), any::<bool>()).prop_map(|(text, live)| CommandKind::Speak {
            text: text.chars().take(MAX_TEXT_CHARS).collect(),
            voice: if live { VoiceMode::Live } else { VoiceMode::Synthesized },
        }),
        any::<bool>().prop_map(|on| CommandKind::SmileTag { on }),
        Just(CommandKind::Stop),
    ]
}

fn event() -> impl Strategy<Value = RobotEvent> {
    prop_oneof![
        any::<u64>().prop_map(|seq| RobotEvent::Ack { seq }),
        (any::<u64>(), 0..REASONS.len()).prop_map(|(seq, r)| RobotEvent::Reject { seq, reason: REASONS[r] }),
        (0..8usize, 0..PHASES.len()).prop_map(|(session, p)| RobotEvent::PhaseChange { session, phase: PHASES[p] }),
        (1..7u32, ".{0,40}").prop_map(|(table, text)| RobotEvent::CustomerUtterance { table, text }),
        (any::<u32>(), 0.0..21_600.0f64).prop_map(|(r, battery_s)| RobotEvent::BatteryWarning {
            robot_id: RobotId(r),
            battery_s
        }),
        prop::collection::vec((any::<u32>(), any::<bool>()), 0..6).prop_map(|rs| RobotEvent::Welcome {
            protocol_version: 1,
            robots: rs
                .into_iter()
                .map(|(id, m)| RobotSummary {
                    id: RobotId(id),
                    kind: if m { RobotKind::Mobile } else { RobotKind::Stationary },
                })
                .collect(),
        }),
    ]
}

pub fn message() -> impl Strategy<Value = Message> {
    prop_oneof![
        (".{0,20}", prop::option::of(any::<u32>())).prop_map(|(client, r)| Message::Hello {
            client,
            robot_id: r.map(RobotId)
        }),
        (any::<u64>(), any::<u32>(), command_kind())
            .prop_map(|(seq, r, k)| Message::Command(OperatorCommand::new(seq, RobotId(r), k))),
        event().prop_map(Message::Event),
    ]
}

/// Motion ids for world command streams: some real, some not.
pub static MOTION_IDS: [&str; 6] = ["look_up", "nod_once", "bye_bye", "power_pose", "moonwalk", ""];

fn world_command() -> impl Strategy<Value = (u32, CommandKind)> {
    let kind = prop_oneof![
        prop::sample::select(&MOTION_IDS[..]).prop_map(|m| CommandKind::SelectHeadMotion { motion: m.into() }),
        prop::sample::select(&MOTION_IDS[..]).prop_map(|m| CommandKind::SelectArmMotion { motion: m.into() }),
        (0..4usize, 0.1..3.0f64)
            .prop_map(|(d, s)| CommandKind::Locomote { direction: Direction::ALL[d], duration_s: s }),
        prop::sample::select(vec!["table-1", "table-6", "station-2", "nowhere"])
            .prop_map(|t| CommandKind::StartLineTrace { target: t.into() }),
        Just(CommandKind::Speak { text: "hello".into(), voice: VoiceMode::Synthesized }),
        any::<bool>().prop_map(|on| CommandKind::SmileTag { on }),
        Just(CommandKind::Stop),
    ];
    (0..7u32, kind)
}

/// (connection, sequence step, ticks to wait, robot, command). A step of 0
/// repeats the last sequence number.
pub type WorldCmd = (u64, u64, u32, u32, CommandKind);

pub fn command_stream() -> impl Strategy<Value = (Vec<WorldCmd>, u64)> {
    (
        prop::collection::vec((0..3u64, 0..4u64, 0..30u32, world_command()), 1..60)
            .prop_map(|v| v.into_iter().map(|(c, s, w, (r, k))| (c, s, w, r, k)).collect()),
        any::<u64>(),
    )
}

/// Every submitted command gets exactly one Ack or Reject, addressed to the
/// connection that sent it.
pub fn check_ack_completeness(cmds: &[WorldCmd], seed: u64) -> Result<(), TestCaseError> {
    let mut world = WorldState::reference(seed);
    let mut seqs: BTreeMap<u64, u64> = BTreeMap::new();
    let mut sent: BTreeMap<(u64, u64), usize> = BTreeMap::new();
    let mut replies: BTreeMap<(u64, u64), usize> = BTreeMap::new();
    for (conn, step, wait, robot, kind) in cmds.iter().cloned() {
        let last = seqs.entry(conn).or_insert(0);
        let seq = *last + step;
        *last = seq;
        world.submit(ConnId(conn), OperatorCommand::new(seq, RobotId(robot), kind));
        *sent.entry((conn, seq)).or_default() += 1;
        for _ in 0..=wait {
            for o in world.tick().outbound {
                let seq = match o.event {
                    RobotEvent::Ack { seq } | RobotEvent::Reject { seq, .. } => seq,
                    _ => continue,
                };
                match o.to {
                    Recipient::Conn(c) => *replies.entry((c.0, seq)).or_default() += 1,
                    Recipient::All => prop_assert!(false, "reply {} broadcast to everyone", seq),
                }
            }
        }
    }
    prop_assert_eq!(sent, replies);
    Ok(())
}

pub fn send_schedule() -> impl Strategy<Value = (Vec<(u64, u64)>, u64)> {
    (prop::collection::vec((0..4u64, 0..150u64), 1..300), any::<u64>()).prop_map(|(gaps, seed)| {
        let mut t = 0;
        (gaps.into_iter().map(|(s, g)| {
            t += g;
            (s, t)
        }).collect(), seed)
    })
}

/// Per sender, surviving messages arrive in the order sent, at loss 0.3 and
/// jitter 100 ms.
pub fn check_order(msgs: &[(u64, u64)], seed: u64) -> Result<(), TestCaseError> {
    let model = ChannelModel::new(50, 100, 0.3, seed).unwrap();
    let mut d: Vec<_> = transmit(&model, msgs).into_iter().filter(|d| d.delivered_ms.is_some()).collect();
    d.sort_by_key(|d| (d.delivered_ms, d.index));
    let mut last: BTreeMap<u64, usize> = BTreeMap::new();
    for x in &d {
        if let Some(&i) = last.get(&x.sender) {
            prop_assert!(i < x.index, "sender {} message {} overtook {}", x.sender, x.index, i);
        }
        last.insert(x.sender, x.index);
    }
    Ok(())
}
