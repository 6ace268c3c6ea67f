//! Work metrics replayed from event logs, face-scale files and surveys.
//!
//! Every computation is integer milliseconds until the final rounding, which
//! is half up: percentages to whole points, survey means to tenths.

mod facescale;
mod intervals;
mod metrics;
mod survey;

use thiserror::Error;

use crate::RobotId;

pub use facescale::{face_scale_deltas, FaceScaleEntry, FaceScaleFile, FaceScaleReport, Moment, PilotDeltas, RiseFall};
pub use intervals::IntervalSet;
pub use metrics::{phase_spans, session_metrics, work_breakdown, PhaseSpan, SessionMetrics, WorkBreakdown};
pub use survey::{parse_survey_csv, survey_summary, ItemSummary, SurveyResponse, SurveySummary, ITEMS, LOW_RESPONSE};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TelemetryError {
    #[error("smile tag at {t_ms} ms has no partner")]
    UnpairedSmileTag { t_ms: u64 },
    #[error("incomplete log: {0}")]
    IncompleteLog(String),
    #[error("log holds several robots ({}); pick one", .0.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(", "))]
    MultipleRobots(Vec<RobotId>),
    #[error("survey has no responses")]
    EmptySurvey,
    #[error("{0}")]
    InvalidScore(String),
    #[error("csv line {line}: {message}")]
    Csv { line: u64, message: String },
}

pub(crate) fn csv_error(e: csv::Error) -> TelemetryError {
    TelemetryError::Csv {
        line: e.position().map_or(0, |p| p.line()),
        message: e.to_string(),
    }
}

/// `100 * num / den` rounded half up; zero when `den` is zero.
pub fn pct(num: u64, den: u64) -> u32 {
    if den == 0 {
        return 0;
    }
    let (num, den) = (u128::from(num), u128::from(den));
    ((200 * num + den) / (2 * den)) as u32
}

#[cfg(test)]
mod tests {
    use super::pct;

    #[test]
    fn pct_rounds_half_up() {
        assert_eq!(pct(2046, 6600), 31);
        assert_eq!(pct(594, 3300), 18);
        assert_eq!(pct(1, 200), 1);
        assert_eq!(pct(1, 201), 0);
        assert_eq!(pct(5, 0), 0);
        assert_eq!(pct(7, 7), 100);
    }
}
