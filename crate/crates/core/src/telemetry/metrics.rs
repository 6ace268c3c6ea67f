use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::session::{Phase, SessionPlan};
use crate::world::{EventKind, EventLog};
use crate::RobotId;

use super::intervals::IntervalSet;
use super::{pct, TelemetryError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseSpan {
    pub session: usize,
    pub phase: Phase,
    pub start_ms: u64,
    pub end_ms: u64,
}

/// Phase spans delimited by `PhaseChange` and `SessionEnd` events.
pub fn phase_spans(log: &EventLog) -> Result<Vec<PhaseSpan>, TelemetryError> {
    let mut spans = Vec::new();
    let mut open: Option<(usize, Phase, u64)> = None;
    for e in &log.events {
        match e.kind {
            EventKind::PhaseChange { session, phase } => {
                if let Some((s, p, start)) = open {
                    if s != session {
                        return Err(TelemetryError::IncompleteLog(format!(
                            "session {s} has no end before session {session} starts"
                        )));
                    }
                    spans.push(PhaseSpan { session: s, phase: p, start_ms: start, end_ms: e.t_ms });
                }
                open = Some((session, phase, e.t_ms));
            }
            EventKind::SessionEnd { session } => match open.take() {
                Some((s, p, start)) if s == session => {
                    spans.push(PhaseSpan { session: s, phase: p, start_ms: start, end_ms: e.t_ms });
                }
                _ => {
                    return Err(TelemetryError::IncompleteLog(format!(
                        "session {session} ends without having started"
                    )))
                }
            },
            _ => {}
        }
    }
    if let Some((s, _, _)) = open {
        return Err(TelemetryError::IncompleteLog(format!("session {s} never ends")));
    }
    Ok(spans)
}

fn span_set(spans: &[PhaseSpan], keep: impl Fn(Phase) -> bool) -> IntervalSet {
    IntervalSet::new(
        spans
            .iter()
            .filter(|s| keep(s.phase))
            .map(|s| (s.start_ms, s.end_ms))
            .collect(),
    )
}

/// The single robot a metric is computed for.
fn subject(log: &EventLog) -> Result<Option<RobotId>, TelemetryError> {
    let robots = log.robots();
    if robots.len() > 1 {
        return Err(TelemetryError::MultipleRobots(robots.into_iter().collect()));
    }
    Ok(robots.into_iter().next())
}

fn smile_set(log: &EventLog) -> Result<IntervalSet, TelemetryError> {
    let mut on: Option<u64> = None;
    let mut spans = Vec::new();
    for e in &log.events {
        match e.kind {
            EventKind::SmileTagOn => {
                if on.is_some() {
                    return Err(TelemetryError::UnpairedSmileTag { t_ms: e.t_ms });
                }
                on = Some(e.t_ms);
            }
            EventKind::SmileTagOff => {
                let start = on.take().ok_or(TelemetryError::UnpairedSmileTag { t_ms: e.t_ms })?;
                spans.push((start, e.t_ms));
            }
            _ => {}
        }
    }
    if let Some(t_ms) = on {
        return Err(TelemetryError::UnpairedSmileTag { t_ms });
    }
    Ok(IntervalSet::new(spans))
}

fn engaged_set(log: &EventLog) -> IntervalSet {
    let mut open: BTreeMap<u32, u64> = BTreeMap::new();
    let mut spans = Vec::new();
    for e in &log.events {
        match (&e.kind, e.table) {
            (EventKind::EngageStart, Some(t)) => {
                open.entry(t).or_insert(e.t_ms);
            }
            (EventKind::EngageEnd, Some(t)) => {
                if let Some(start) = open.remove(&t) {
                    spans.push((start, e.t_ms));
                }
            }
            _ => {}
        }
    }
    let end = log.events.last().map_or(0, |e| e.t_ms);
    spans.extend(open.into_values().map(|s| (s, end)));
    IntervalSet::new(spans)
}

/// Robot speech intervals; `addressed` keeps only speech aimed at a table.
fn speech_set(log: &EventLog, addressed: bool) -> IntervalSet {
    IntervalSet::new(
        log.events
            .iter()
            .filter(|e| e.robot.is_some() && (!addressed || e.table.is_some()))
            .filter_map(|e| match e.kind {
                EventKind::Utterance { duration_ms, .. } => Some((e.t_ms, e.t_ms + duration_ms)),
                _ => None,
            })
            .collect(),
    )
}

fn movement_set(log: &EventLog) -> IntervalSet {
    IntervalSet::new(
        log.events
            .iter()
            .filter_map(|e| match e.kind {
                EventKind::MoveSegment { start_ms, .. } => Some((start_ms, e.t_ms)),
                _ => None,
            })
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct SessionMetrics {
    pub working_time_s: u64,
    pub smile_time_rate_pct: u32,
    pub customer_service_time_pct: u32,
    pub n_customers: u32,
    pub working_ms: u64,
    pub smile_ms: u64,
    pub service_ms: u64,
}

struct Sets {
    working: IntervalSet,
    service: IntervalSet,
}

fn sets(log: &EventLog, plan: &SessionPlan) -> Result<(Vec<PhaseSpan>, Sets), TelemetryError> {
    subject(log)?;
    let spans = phase_spans(log)?;
    let working = span_set(&spans, |p| plan.is_working(p));
    let facing = span_set(&spans, Phase::is_customer_facing);
    let service = engaged_set(log).union(&speech_set(log, true)).intersect(&facing).intersect(&working);
    Ok((spans, Sets { working, service }))
}

/// Working time, smile and service rates and customers served, for a log of
/// one robot.
pub fn session_metrics(log: &EventLog, plan: &SessionPlan) -> Result<SessionMetrics, TelemetryError> {
    let (spans, s) = sets(log, plan)?;
    let smile = smile_set(log)?.intersect(&s.working);
    let working_ms = s.working.measure();
    let smile_ms = smile.measure();
    let service_ms = s.service.measure();

    let session_of = |t: u64| {
        spans
            .iter()
            .find(|sp| sp.start_ms <= t && t < sp.end_ms)
            .map(|sp| sp.session)
    };
    let mut sizes: BTreeMap<(usize, u32), u8> = BTreeMap::new();
    let mut served: BTreeSet<(usize, u32)> = BTreeSet::new();
    for e in &log.events {
        match (&e.kind, e.table) {
            (EventKind::CustomersSeated { session, party_size }, Some(t)) => {
                sizes.insert((*session, t), *party_size);
            }
            (EventKind::EngageStart, Some(t)) => {
                if let Some(s) = session_of(e.t_ms) {
                    served.insert((s, t));
                }
            }
            _ => {}
        }
    }
    let n_customers = served.iter().filter_map(|k| sizes.get(k)).map(|&n| u32::from(n)).sum();

    Ok(SessionMetrics {
        working_time_s: working_ms / 1000,
        smile_time_rate_pct: pct(smile_ms, working_ms),
        customer_service_time_pct: pct(service_ms, working_ms),
        n_customers,
        working_ms,
        smile_ms,
        service_ms,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct WorkBreakdown {
    pub working_ms: u64,
    pub service_ms: u64,
    pub movement_ms: u64,
    pub speaking_ms: u64,
    pub idle_ms: u64,
    pub service_pct: u32,
    pub movement_pct: u32,
    pub speaking_pct: u32,
    pub idle_pct: u32,
}

impl WorkBreakdown {
    /// Service plus movement.
    pub fn active_pct(&self) -> u32 {
        pct(self.service_ms + self.movement_ms, self.working_ms)
    }
}

/// Splits working time into service, movement, speaking and idle. Each
/// millisecond goes to the first matching category in that order.
pub fn work_breakdown(log: &EventLog, plan: &SessionPlan) -> Result<WorkBreakdown, TelemetryError> {
    let (_, s) = sets(log, plan)?;
    let service = s.service;
    let taken = service.clone();
    let movement = movement_set(log).intersect(&s.working).subtract(&taken);
    let taken = taken.union(&movement);
    let speaking = speech_set(log, false).intersect(&s.working).subtract(&taken);
    let taken = taken.union(&speaking);
    let idle = s.working.subtract(&taken);

    let ms = [service.measure(), movement.measure(), speaking.measure(), idle.measure()];
    let working_ms = s.working.measure();
    debug_assert_eq!(ms.iter().sum::<u64>(), working_ms);
    let p = largest_remainder(&ms, working_ms);
    Ok(WorkBreakdown {
        working_ms,
        service_ms: ms[0],
        movement_ms: ms[1],
        speaking_ms: ms[2],
        idle_ms: ms[3],
        service_pct: p[0],
        movement_pct: p[1],
        speaking_pct: p[2],
        idle_pct: p[3],
    })
}

/// Integer percentages summing to exactly 100: floor each share, then hand
/// the leftover points to the largest remainders (earlier category on ties).
fn largest_remainder(parts: &[u64; 4], total: u64) -> [u32; 4] {
    if total == 0 {
        return [0; 4];
    }
    let total = u128::from(total);
    let mut out = [0u32; 4];
    let mut rems = [(0u128, 0usize); 4];
    for (i, &p) in parts.iter().enumerate() {
        let scaled = u128::from(p) * 100;
        out[i] = (scaled / total) as u32;
        rems[i] = (scaled % total, i);
    }
    let left = 100 - out.iter().sum::<u32>();
    rems.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, i) in rems.iter().take(left as usize) {
        out[i] += 1;
    }
    out
}
