//! Fixture builders shared by the integration tests.
//!
//! These construct inputs from the published table values alone, without
//! going through the simulator, so they double as an oracle for telemetry.
//! Set `AVATAR_REGEN_FIXTURES=1` to rewrite the files under `fixtures/`.

#![allow(dead_code)]

pub mod strategies;

use std::path::PathBuf;

use avatar_core::scenario::canned_day;
use avatar_core::session::{Phase, Roster};
use avatar_core::world::{EventKind, EventLog, FloorPlan, ServiceEvent};
use avatar_core::RobotId;

pub fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn fixtures_dir() -> PathBuf {
    workspace_root().join("fixtures")
}

/// One published day: working seconds, rates and customer count.
#[derive(Debug, Clone, Copy)]
pub struct DayRow {
    pub file: &'static str,
    pub sessions: u64,
    pub working_s: u64,
    pub smile_pct: u32,
    pub service_pct: u32,
    pub customers: u32,
}

pub const DAYS: [DayRow; 5] = [
    DayRow { file: "11-29", sessions: 2, working_s: 6600, smile_pct: 31, service_pct: 25, customers: 21 },
    DayRow { file: "12-3", sessions: 2, working_s: 6600, smile_pct: 49, service_pct: 32, customers: 38 },
    DayRow { file: "12-4", sessions: 2, working_s: 6600, smile_pct: 17, service_pct: 33, customers: 21 },
    DayRow { file: "12-6", sessions: 2, working_s: 6600, smile_pct: 23, service_pct: 17, customers: 24 },
    DayRow { file: "12-7", sessions: 1, working_s: 3300, smile_pct: 10, service_pct: 18, customers: 19 },
];

/// Phase offsets within one hour-long session, in seconds.
const SESSION_PHASES: [(u64, Phase); 7] = [
    (0, Phase::OpeningTalk),
    (300, Phase::OrderConfirmation),
    (900, Phase::DrinkServing),
    (1500, Phase::FreeTalk),
    (2700, Phase::EndingTalk),
    (3000, Phase::Break),
    (3300, Phase::Entry),
];
const SESSION_S: u64 = 3600;

const ROBOT: RobotId = RobotId(1);
const WALK_MS: u64 = 30_000;

/// `total` split over `n` parts, earlier parts taking the remainder.
fn split(total: u64, n: u64) -> Vec<u64> {
    (0..n).map(|i| total / n + u64::from(i < total % n)).collect()
}

/// Party sizes of at most four that add up to `customers`.
fn parties(customers: u64) -> Vec<u8> {
    let k = customers.div_ceil(4);
    split(customers, k).into_iter().map(|s| s as u8).collect()
}

/// A single-robot log whose smile and service seconds are the published
/// percentages of its working time.
pub fn day_log(day: &DayRow) -> EventLog {
    let smile_ms = day.working_s * 1000 * u64::from(day.smile_pct) / 100;
    let service_ms = day.working_s * 1000 * u64::from(day.service_pct) / 100;
    let smiles = split(smile_ms, day.sessions);
    let services = split(service_ms, day.sessions);
    let crowds = split(u64::from(day.customers), day.sessions);

    let mut events = Vec::new();
    for s in 0..day.sessions {
        let base = s * SESSION_S * 1000;
        let session = s as usize;
        let seated = parties(crowds[s as usize]);
        let mut ev = Vec::new();
        for (i, &size) in seated.iter().enumerate() {
            ev.push(ServiceEvent::new(base, EventKind::CustomersSeated { session, party_size: size }).table(i as u32 + 1));
        }
        for (off, phase) in SESSION_PHASES {
            ev.push(ServiceEvent::new(base + off * 1000, EventKind::PhaseChange { session, phase }));
        }
        ev.push(ServiceEvent::new(base + SESSION_S * 1000, EventKind::SessionEnd { session }));
        for i in 0..seated.len() {
            ev.push(ServiceEvent::new(base + 3_000_000, EventKind::CustomersLeft { session }).table(i as u32 + 1));
        }

        // Visits back to back from the start of order confirmation, each
        // preceded by a walk.
        let mut t = base + 300_000;
        for (i, len) in split(services[s as usize], seated.len() as u64).into_iter().enumerate() {
            let table = i as u32 + 1;
            let from = [1.0 + i as f64, 1.0];
            let to = [1.0 + i as f64, 3.0];
            ev.push(
                ServiceEvent::new(t + WALK_MS, EventKind::MoveSegment { start_ms: t, from, to, halted: false })
                    .robot(ROBOT),
            );
            t += WALK_MS;
            ev.push(ServiceEvent::new(t, EventKind::EngageStart).robot(ROBOT).table(table));
            t += len;
            ev.push(ServiceEvent::new(t, EventKind::EngageEnd).robot(ROBOT).table(table));
        }

        // Smiles in two stretches inside the session's working time.
        let mut t = base + 310_000;
        for len in split(smiles[s as usize], 2) {
            ev.push(ServiceEvent::new(t, EventKind::SmileTagOn).robot(ROBOT));
            t += len;
            ev.push(ServiceEvent::new(t, EventKind::SmileTagOff).robot(ROBOT));
            t += 60_000;
        }
        ev.sort_by_key(|e| e.t_ms);
        events.extend(ev);
    }
    EventLog::new(events)
}

/// One pilot's column: duty days, dates without a pre answer and (rises, falls) for mood, fatigue and fulfilling.
pub struct FacePilot {
    pub id: &'static str,
    pub duty_days: usize,
    pub skip_first: bool,
    pub missing_pre: &'static [&'static str],
    pub counts: [(u32, u32); 3],
}

pub const FACE_PILOTS: [FacePilot; 3] = [
    FacePilot { id: "A", duty_days: 9, skip_first: true, missing_pre: &[], counts: [(5, 2), (1, 4), (5, 2)] },
    FacePilot { id: "B", duty_days: 10, skip_first: false, missing_pre: &["11/26"], counts: [(2, 2), (0, 8), (2, 2)] },
    FacePilot { id: "C", duty_days: 9, skip_first: false, missing_pre: &[], counts: [(1, 2), (2, 4), (2, 1)] },
];
pub const FACE_TOTALS: [(u32, u32); 3] = [(8, 6), (3, 16), (9, 5)];
pub const DECLARED_DUTY_DAYS: u32 = 29;

const CAFE_DATES: [&str; 10] = ["11/26", "11/27", "11/28", "11/29", "11/30", "12/3", "12/4", "12/5", "12/6", "12/7"];

/// Face-scale CSV reproducing the per-pilot counts.
pub fn facescale_csv() -> String {
    let mut out = format!("# declared_total_days={DECLARED_DUTY_DAYS}\npilot_id,date,moment,mood,fatigue,fullness\n");
    for p in &FACE_PILOTS {
        let dates: Vec<&str> = if p.skip_first {
            CAFE_DATES[1..].to_vec()
        } else {
            CAFE_DATES[..p.duty_days].to_vec()
        };
        assert_eq!(dates.len(), p.duty_days);
        let paired: Vec<&str> = dates.iter().copied().filter(|d| !p.missing_pre.contains(d)).collect();
        // Per scale, a sign for each paired day, rotated so scales differ.
        let signs: Vec<Vec<i8>> = p
            .counts
            .iter()
            .enumerate()
            .map(|(k, &(pos, neg))| {
                let mut v: Vec<i8> = std::iter::repeat_n(1, pos as usize)
                    .chain(std::iter::repeat_n(-1, neg as usize))
                    .chain(std::iter::repeat_n(0, paired.len() - (pos + neg) as usize))
                    .collect();
                v.rotate_left(k * 2 % paired.len());
                v
            })
            .collect();
        let pre_base = [5i8, 6, 5];
        for d in &dates {
            if let Some(i) = paired.iter().position(|x| x == d) {
                let pre: Vec<i8> = (0..3).map(|k| pre_base[k] + (i % 3) as i8 - 1).collect();
                let post: Vec<i8> = (0..3).map(|k| pre[k] + signs[k][i] * (1 + (i % 2) as i8)).collect();
                out.push_str(&format!("{},{d},pre,{},{},{}\n", p.id, pre[0], pre[1], pre[2]));
                out.push_str(&format!("{},{d},post,{},{},{}\n", p.id, post[0], post[1], post[2]));
            } else {
                out.push_str(&format!("{},{d},pre,,,\n", p.id));
                out.push_str(&format!("{},{d},post,9,3,8\n", p.id));
            }
        }
    }
    out
}

pub const SURVEY: [[u8; 9]; 5] = [
    [5, 5, 5, 5, 5, 5, 4, 4, 2],
    [5, 5, 5, 4, 4, 4, 5, 5, 2],
    [4, 4, 5, 4, 5, 4, 4, 5, 4],
    [5, 5, 5, 5, 5, 4, 5, 4, 4],
    [5, 5, 5, 5, 4, 5, 5, 5, 5],
];

pub fn survey_csv() -> String {
    let mut out = String::from("pilot_id,i,ii,iii,iv,v\n");
    for r in 0..9 {
        let items: Vec<String> = SURVEY.iter().map(|col| col[r].to_string()).collect();
        out.push_str(&format!("P{:02},{}\n", r + 1, items.join(",")));
    }
    out
}

/// Mean of `xs` to one decimal, as tenths, halves rounded up.
pub fn mean_tenths(xs: &[u8]) -> u32 {
    let sum: u32 = xs.iter().map(|&x| u32::from(x)).sum();
    let n = xs.len() as u32;
    (20 * sum + n) / (2 * n)
}

fn scenario_file(sessions: usize, date: &str, name: &str) -> String {
    let mut s = canned_day(sessions, 7);
    s.name = name.into();
    s.schedule.date = date.into();
    s.floorplan = Some("floorplan.json".into());
    s.roster = Some("roster.json".into());
    s.to_json() + "\n"
}

/// Every fixture file, relative to `fixtures/`, with its expected contents.
pub fn fixture_files() -> Vec<(String, String)> {
    let mut files = vec![
        ("floorplan.json".to_string(), FloorPlan::reference().to_json() + "\n"),
        ("roster.json".to_string(), Roster::reference().to_json() + "\n"),
        ("canned-day.json".to_string(), scenario_file(4, "12/3", "canned-day")),
        ("first-day.json".to_string(), scenario_file(3, "11/26", "first-day")),
        ("facescale.csv".to_string(), facescale_csv()),
        ("survey.csv".to_string(), survey_csv()),
    ];
    for day in &DAYS {
        files.push((format!("days/{}.jsonl", day.file), day_log(day).to_jsonl()));
    }
    files
}

pub mod modality {
    use avatar_core::protocol::{
        dwell_select, gaze_script, scan_script, scan_select, PaletteItem, Selection, DEFAULT_DWELL_MS,
        DEFAULT_SCAN_INTERVAL_MS,
    };
    use avatar_core::robot::{ArmMotion, Direction, HeadMotion};
    use avatar_core::scenario::{empty_scenario, run_scenario, OperatorScript, RunOutcome, TimedCommand};
    use avatar_core::RobotId;

    /// A short greeting at a table: turn, approach, wave, nod with a smile,
    /// back off.
    pub fn service_sequence() -> Vec<PaletteItem> {
        vec![
            PaletteItem::Head(HeadMotion::LookRight),
            PaletteItem::Drive(Direction::TurnLeft),
            PaletteItem::Drive(Direction::Forward),
            PaletteItem::Drive(Direction::Forward),
            PaletteItem::SmileOn,
            PaletteItem::Arm(ArmMotion::ByeBye),
            PaletteItem::Head(HeadMotion::NodOnce),
            PaletteItem::SmileOff,
            PaletteItem::Drive(Direction::Backward),
            PaletteItem::Drive(Direction::TurnRight),
        ]
    }

    fn indices(seq: &[PaletteItem]) -> Vec<usize> {
        let page = PaletteItem::full_page();
        seq.iter().map(|i| page.iter().position(|p| p == i).unwrap()).collect()
    }

    /// Clicks at irregular times.
    pub fn pointer(seq: &[PaletteItem]) -> Vec<Selection<usize>> {
        indices(seq)
            .into_iter()
            .enumerate()
            .map(|(k, target)| Selection { t_ms: 500 + k as u64 * 2_100 + (k as u64 * 373) % 900, target })
            .collect()
    }

    pub fn dwell(seq: &[PaletteItem]) -> Vec<Selection<usize>> {
        dwell_select(&gaze_script(&indices(seq), DEFAULT_DWELL_MS, 0, 2_000), DEFAULT_DWELL_MS)
    }

    pub fn scan(seq: &[PaletteItem]) -> Vec<Selection<usize>> {
        let page = PaletteItem::full_page().len();
        let presses = scan_script(&indices(seq), DEFAULT_SCAN_INTERVAL_MS, 0);
        scan_select(page, &presses, DEFAULT_SCAN_INTERVAL_MS, 0)
    }

    /// Gap between normalized selections, long enough for any palette action.
    pub const SLOT_MS: u64 = 4_000;
    const FIRST_MS: u64 = 10_000;

    /// Runs selections on robot 1 with each timestamp replaced by its rank.
    pub fn execute(selections: &[Selection<usize>]) -> RunOutcome {
        let page = PaletteItem::full_page();
        let mut script = empty_scenario(1);
        script.operators.push(OperatorScript {
            pilot: None,
            robot: RobotId(1),
            commands: selections
                .iter()
                .enumerate()
                .map(|(k, s)| TimedCommand { t_ms: FIRST_MS + k as u64 * SLOT_MS, kind: page[s.target].command() })
                .collect(),
        });
        run_scenario(&script, 0).unwrap()
    }

    /// Robot 1 events as JSON lines.
    pub fn trajectory(out: &RunOutcome) -> Vec<String> {
        out.log
            .events
            .iter()
            .filter(|e| e.robot == Some(RobotId(1)))
            .map(|e| e.to_json_line())
            .collect()
    }
}
