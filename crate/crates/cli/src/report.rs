use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use avatar_core::session::SessionPlan;
use avatar_core::telemetry::{
    parse_survey_csv, session_metrics, survey_summary, work_breakdown, FaceScaleFile, FaceScaleReport,
    SessionMetrics, SurveySummary, WorkBreakdown, LOW_RESPONSE,
};
use avatar_core::world::EventLog;
use avatar_core::RobotId;
use clap::Args;

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Event log (JSON Lines); repeat for several days.
    #[arg(long = "log")]
    pub logs: Vec<PathBuf>,
    /// Survey responses CSV.
    #[arg(long)]
    pub survey: Option<PathBuf>,
    /// Face-scale entries CSV.
    #[arg(long)]
    pub facescale: Option<PathBuf>,
    /// Only this robot's events.
    #[arg(long)]
    pub robot: Option<u32>,
    /// Only these sessions (0-based, comma separated).
    #[arg(long, value_delimiter = ',')]
    pub sessions: Vec<usize>,
}

#[derive(Debug, Default)]
pub struct ReportOutput {
    pub stdout: String,
    pub stderr: String,
    pub ok: bool,
}

pub const METRICS_HEADER: &str = "day,robot,working_time_s,smile_time_rate_pct,customer_service_time_pct,n_customers,service_pct,movement_pct,speaking_pct,idle_pct";

struct Row {
    day: String,
    robot: Option<RobotId>,
    m: SessionMetrics,
    b: WorkBreakdown,
}

fn day_name(path: &Path) -> String {
    let name = path.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
    name.strip_suffix(".events.jsonl")
        .or_else(|| name.strip_suffix(".jsonl"))
        .unwrap_or(&name)
        .to_owned()
}

pub fn run(args: &ReportArgs) -> ReportOutput {
    let mut out = ReportOutput {
        ok: true,
        ..Default::default()
    };
    let err = |out: &mut ReportOutput, msg: String| {
        let _ = writeln!(out.stderr, "error: {msg}");
        out.ok = false;
    };
    let plan = SessionPlan::standard();
    let mut rows = Vec::new();

    for path in &args.logs {
        let day = day_name(path);
        let log = match std::fs::read_to_string(path) {
            Ok(text) => match EventLog::from_jsonl_str(&text) {
                Ok(log) => log,
                Err(e) => {
                    err(&mut out, format!("{}: {e}", path.display()));
                    continue;
                }
            },
            Err(e) => {
                err(&mut out, format!("{}: {e}", path.display()));
                continue;
            }
        };
        let log = if args.sessions.is_empty() { log } else { log.for_sessions(&args.sessions) };
        let robots: Vec<Option<RobotId>> = match args.robot {
            Some(r) => vec![Some(RobotId(r))],
            None => {
                let all = log.robots();
                if all.is_empty() {
                    vec![None]
                } else {
                    all.into_iter().map(Some).collect()
                }
            }
        };
        if !log.events.iter().any(|e| e.is_phase_transition()) {
            let _ = writeln!(
                out.stderr,
                "warning: {}: log has no sessions; metrics are zero",
                path.display()
            );
        }
        for robot in robots {
            let view = match robot {
                Some(r) => log.for_robot(r),
                None => log.clone(),
            };
            match session_metrics(&view, &plan).and_then(|m| Ok((m, work_breakdown(&view, &plan)?))) {
                Ok((m, b)) => rows.push(Row {
                    day: day.clone(),
                    robot,
                    m,
                    b,
                }),
                Err(e) => err(
                    &mut out,
                    format!("{} {}: {e}", path.display(), robot.map_or("-".into(), |r| r.to_string())),
                ),
            }
        }
    }

    let facescale = args.facescale.as_ref().and_then(|path| {
        let parsed = std::fs::read_to_string(path)
            .map_err(|e| e.to_string())
            .and_then(|t| FaceScaleFile::parse(&t).map_err(|e| e.to_string()))
            .and_then(|f| f.report().map_err(|e| e.to_string()));
        match parsed {
            Ok(r) => Some(r),
            Err(e) => {
                err(&mut out, format!("{}: {e}", path.display()));
                None
            }
        }
    });

    let survey = args.survey.as_ref().and_then(|path| {
        let parsed = std::fs::read_to_string(path)
            .map_err(|e| e.to_string())
            .and_then(|t| parse_survey_csv(&t).map_err(|e| e.to_string()))
            .and_then(|r| survey_summary(&r).map_err(|e| e.to_string()));
        match parsed {
            Ok(s) => Some(s),
            Err(e) => {
                err(&mut out, format!("{}: {e}", path.display()));
                None
            }
        }
    });

    render(&mut out.stdout, &rows, facescale.as_ref(), survey.as_ref());
    if let Some(f) = &facescale {
        for note in &f.notes {
            let _ = writeln!(out.stderr, "note: {note}");
        }
    }
    out
}

fn render(s: &mut String, rows: &[Row], face: Option<&FaceScaleReport>, survey: Option<&SurveySummary>) {
    let mut sections = Vec::new();
    if !rows.is_empty() {
        let mut t = format!("{METRICS_HEADER}\n");
        for r in rows {
            let _ = writeln!(
                t,
                "{},{},{},{},{},{},{},{},{},{}",
                r.day,
                r.robot.map_or("-".into(), |r| r.to_string()),
                r.m.working_time_s,
                r.m.smile_time_rate_pct,
                r.m.customer_service_time_pct,
                r.m.n_customers,
                r.b.service_pct,
                r.b.movement_pct,
                r.b.speaking_pct,
                r.b.idle_pct
            );
        }
        sections.push(t);
    }
    if let Some(f) = face {
        let mut t = String::from("pilot,duty_days,paired_days,mood_pos,mood_neg,fatigue_pos,fatigue_neg,fullness_pos,fullness_neg\n");
        for (name, p) in f.pilots.iter().chain(std::iter::once((&"total".to_string(), &f.total))) {
            let _ = writeln!(
                t,
                "{name},{},{},{},{},{},{},{},{}",
                p.duty_days,
                p.paired_days,
                p.mood.positive,
                p.mood.negative,
                p.fatigue.positive,
                p.fatigue.negative,
                p.fullness.positive,
                p.fullness.negative
            );
        }
        sections.push(t);
    }
    if let Some(sv) = survey {
        let mut t = String::from("item,mean,min,low_responses\n");
        for i in &sv.items {
            let _ = writeln!(t, "{},{},{},{}", i.item, i.mean_str(), i.min, i.low_responses);
        }
        sections.push(t);
    }

    let mut summary = String::from("Summary\n");
    if rows.is_empty() && face.is_none() && survey.is_none() {
        summary.push_str("  nothing to report\n");
    }
    for r in rows {
        let _ = writeln!(
            summary,
            "  {} {}: {} s working, smile {}%, service {}%, {} customers, active {}%",
            r.day,
            r.robot.map_or("-".into(), |r| r.to_string()),
            r.m.working_time_s,
            r.m.smile_time_rate_pct,
            r.m.customer_service_time_pct,
            r.m.n_customers,
            r.b.active_pct()
        );
    }
    if let Some(f) = face {
        let t = &f.total;
        let _ = writeln!(
            summary,
            "  face scale: {} pilots, {} duty days; rises/falls mood {}/{}, fatigue {}/{}, fullness {}/{}",
            f.pilots.len(),
            t.duty_days,
            t.mood.positive,
            t.mood.negative,
            t.fatigue.positive,
            t.fatigue.negative,
            t.fullness.positive,
            t.fullness.negative
        );
        for note in &f.notes {
            let _ = writeln!(summary, "  data note: {note}");
        }
    }
    if let Some(sv) = survey {
        let means: Vec<String> = sv.items.iter().map(|i| format!("{} {}", i.item, i.mean_str())).collect();
        let _ = writeln!(
            summary,
            "  survey: {} responses; means {}; all items >= 4.0: {}",
            sv.n_responses,
            means.join(", "),
            if sv.all_items_at_least_4 { "yes" } else { "no" }
        );
        for i in sv.items.iter().filter(|i| i.flagged()) {
            let _ = writeln!(
                summary,
                "  flagged: item {} has {} response(s) <= {LOW_RESPONSE}",
                i.item, i.low_responses
            );
        }
    }
    sections.push(summary);
    s.push_str(&sections.join("\n"));
}
