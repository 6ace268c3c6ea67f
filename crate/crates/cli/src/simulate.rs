use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use avatar_core::scenario::{canned_day, empty_scenario, run_scenario, ScenarioError, ScenarioScript};
use avatar_core::session::SessionPlan;
use avatar_core::telemetry::phase_spans;

use crate::CliError;

pub fn run(script_path: &Path, seed: Option<u64>, out: Option<PathBuf>) -> Result<()> {
    let script = ScenarioScript::load(script_path).map_err(|e| match e {
        ScenarioError::Io { path, message } => CliError::Config { path, message }.into(),
        other => anyhow::Error::new(other).context(format!("{}", script_path.display())),
    })?;
    let seed = seed.unwrap_or(script.seed);
    let outcome = run_scenario(&script, seed).with_context(|| format!("{}", script_path.display()))?;

    let plan = SessionPlan::standard();
    let spans = phase_spans(&outcome.log)?;
    let working_ms: u64 = spans
        .iter()
        .filter(|s| plan.is_working(s.phase))
        .map(|s| s.end_ms - s.start_ms)
        .sum();

    let out = out.unwrap_or_else(|| {
        let stem = script_path.file_stem().map_or("scenario".into(), |s| s.to_string_lossy());
        PathBuf::from(format!("{stem}.events.jsonl"))
    });
    let file = File::create(&out).with_context(|| format!("cannot create {}", out.display()))?;
    let mut w = BufWriter::new(file);
    outcome.log.write_jsonl(&mut w)?;
    w.flush()?;

    println!("scenario {} ({} sessions, seed {seed})", script.name, script.schedule.sessions);
    println!("working_time_s {}", working_ms / 1000);
    println!("events {}", outcome.log.len());
    for (kind, n) in outcome.log.count_by_kind() {
        println!("  {kind} {n}");
    }
    println!("acks {} rejects {}", outcome.acks, outcome.rejects.len());
    for (robot, seq, reason) in &outcome.rejects {
        eprintln!("reject: {robot} seq {seq}: {reason:?}");
    }
    println!("log sha256 {}", outcome.log.digest());
    println!("log written to {}", out.display());
    Ok(())
}

pub fn print_builtin(kind: &str, sessions: usize, seed: u64) -> Result<()> {
    let mut script = match kind {
        "canned" => canned_day(sessions, seed),
        "empty" => empty_scenario(sessions),
        other => return Err(CliError::Usage(format!("unknown scenario `{other}` (canned, empty)")).into()),
    };
    script.seed = seed;
    println!("{}", script.to_json());
    Ok(())
}
