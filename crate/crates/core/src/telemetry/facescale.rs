//! Face-scale rise/fall counts.
//!
//! CSV columns: `pilot_id,date,moment,mood,fatigue,fullness`, with `moment`
//! either `pre` or `post` and scores in 1..=10 (10 = positive pole). An empty
//! score cell means the scale was not answered. Lines starting with `#` are
//! comments; `# declared_total_days=N` records the number of duty days the
//! source claims, which is checked against the entries.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::TelemetryError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Moment {
    Pre,
    Post,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceScaleEntry {
    pub pilot_id: String,
    pub date: String,
    pub moment: Moment,
    pub mood: Option<u8>,
    pub fatigue: Option<u8>,
    #[serde(alias = "fulfilling")]
    pub fullness: Option<u8>,
}

impl FaceScaleEntry {
    fn scores(&self) -> [Option<u8>; 3] {
        [self.mood, self.fatigue, self.fullness]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct RiseFall {
    pub positive: u32,
    pub negative: u32,
}

impl RiseFall {
    fn add(&mut self, other: RiseFall) {
        self.positive += other.positive;
        self.negative += other.negative;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct PilotDeltas {
    /// Dates with any entry.
    pub duty_days: u32,
    /// Dates with both a pre and a post entry.
    pub paired_days: u32,
    pub mood: RiseFall,
    pub fatigue: RiseFall,
    pub fullness: RiseFall,
}

impl PilotDeltas {
    fn scales_mut(&mut self) -> [&mut RiseFall; 3] {
        [&mut self.mood, &mut self.fatigue, &mut self.fullness]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct FaceScaleReport {
    pub pilots: BTreeMap<String, PilotDeltas>,
    pub total: PilotDeltas,
    /// (pilot, date) pairs left out because pre or post is missing.
    pub excluded: Vec<(String, String)>,
    pub notes: Vec<String>,
}

/// Counts, per pilot and scale, days where the post score rose above (positive)
/// or fell below (negative) the pre score. Ties count as neither; days missing
/// a pre or post answer, or with that row left blank, are excluded.
pub fn face_scale_deltas(entries: &[FaceScaleEntry]) -> Result<FaceScaleReport, TelemetryError> {
    let mut days: BTreeMap<(&str, &str), [Option<&FaceScaleEntry>; 2]> = BTreeMap::new();
    for e in entries {
        if let Some(bad) = e.scores().into_iter().flatten().find(|s| !(1..=10).contains(s)) {
            return Err(TelemetryError::InvalidScore(format!(
                "{} {}: face-scale score {bad} outside 1..=10",
                e.pilot_id, e.date
            )));
        }
        let slot = &mut days.entry((&e.pilot_id, &e.date)).or_default()[e.moment as usize];
        if slot.is_some() {
            return Err(TelemetryError::InvalidScore(format!(
                "{} {}: duplicate {:?} entry",
                e.pilot_id, e.date, e.moment
            )));
        }
        // a row with every cell empty records an unanswered sheet
        if e.scores().iter().any(Option::is_some) {
            *slot = Some(e);
        }
    }

    let mut report = FaceScaleReport::default();
    for ((pilot, date), [pre, post]) in days {
        let p = report.pilots.entry(pilot.to_owned()).or_default();
        p.duty_days += 1;
        let (Some(pre), Some(post)) = (pre, post) else {
            report.excluded.push((pilot.to_owned(), date.to_owned()));
            continue;
        };
        p.paired_days += 1;
        for ((a, b), slot) in pre.scores().into_iter().zip(post.scores()).zip(p.scales_mut()) {
            if let (Some(a), Some(b)) = (a, b) {
                slot.add(RiseFall {
                    positive: u32::from(b > a),
                    negative: u32::from(b < a),
                });
            }
        }
    }
    for p in report.pilots.values() {
        report.total.duty_days += p.duty_days;
        report.total.paired_days += p.paired_days;
        report.total.mood.add(p.mood);
        report.total.fatigue.add(p.fatigue);
        report.total.fullness.add(p.fullness);
    }
    for (pilot, date) in &report.excluded {
        report
            .notes
            .push(format!("{pilot} {date}: pre or post answer missing, day excluded"));
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FaceScaleFile {
    pub entries: Vec<FaceScaleEntry>,
    pub declared_total_days: Option<u32>,
}

impl FaceScaleFile {
    pub fn parse(text: &str) -> Result<Self, TelemetryError> {
        let mut declared = None;
        for line in text.lines() {
            if let Some(v) = line.trim().strip_prefix('#').and_then(|c| c.trim().strip_prefix("declared_total_days=")) {
                declared = Some(v.trim().parse().map_err(|_| TelemetryError::Csv {
                    line: 0,
                    message: format!("bad declared_total_days `{v}`"),
                })?);
            }
        }
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut entries = Vec::new();
        for row in rdr.deserialize() {
            entries.push(row.map_err(super::csv_error)?);
        }
        Ok(Self {
            entries,
            declared_total_days: declared,
        })
    }

    /// Deltas plus a note when the declared day count disagrees with the
    /// entries.
    pub fn report(&self) -> Result<FaceScaleReport, TelemetryError> {
        let mut r = face_scale_deltas(&self.entries)?;
        if let Some(declared) = self.declared_total_days {
            if declared != r.total.duty_days {
                r.notes.push(format!(
                    "declared total of {declared} duty days, but per-pilot duty days sum to {}",
                    r.total.duty_days
                ));
            }
        }
        Ok(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(pilot: &str, date: &str, moment: Moment, s: [Option<u8>; 3]) -> FaceScaleEntry {
        FaceScaleEntry {
            pilot_id: pilot.into(),
            date: date.into(),
            moment,
            mood: s[0],
            fatigue: s[1],
            fullness: s[2],
        }
    }

    #[test]
    fn rise_fall_and_ties() {
        let r = face_scale_deltas(&[
            entry("A", "d1", Moment::Pre, [Some(7), Some(5), Some(5)]),
            entry("A", "d1", Moment::Post, [Some(9), Some(5), Some(3)]),
        ])
        .unwrap();
        let a = &r.pilots["A"];
        assert_eq!(a.mood, RiseFall { positive: 1, negative: 0 });
        assert_eq!(a.fatigue, RiseFall::default());
        assert_eq!(a.fullness, RiseFall { positive: 0, negative: 1 });
    }

    #[test]
    fn missing_pre_is_excluded_but_counted_as_duty() {
        let r = face_scale_deltas(&[entry("B", "11/26", Moment::Post, [Some(9), Some(2), Some(8)])]).unwrap();
        assert_eq!(r.pilots["B"].duty_days, 1);
        assert_eq!(r.pilots["B"].paired_days, 0);
        assert_eq!(r.excluded, vec![("B".to_string(), "11/26".to_string())]);
        assert_eq!(r.total.mood, RiseFall::default());
    }

    #[test]
    fn blank_row_counts_as_missing() {
        let r = face_scale_deltas(&[
            entry("B", "11/26", Moment::Pre, [None, None, None]),
            entry("B", "11/26", Moment::Post, [Some(9), Some(2), Some(8)]),
        ])
        .unwrap();
        assert_eq!(r.pilots["B"].duty_days, 1);
        assert_eq!(r.excluded.len(), 1);
    }

    #[test]
    fn empty_cell_skips_only_that_scale() {
        let r = face_scale_deltas(&[
            entry("C", "d", Moment::Pre, [None, Some(5), Some(5)]),
            entry("C", "d", Moment::Post, [Some(3), Some(6), Some(5)]),
        ])
        .unwrap();
        assert_eq!(r.total.mood, RiseFall::default());
        assert_eq!(r.total.fatigue.positive, 1);
    }

    #[test]
    fn bad_scores() {
        assert!(face_scale_deltas(&[entry("A", "d", Moment::Pre, [Some(11), None, None])]).is_err());
        assert!(face_scale_deltas(&[
            entry("A", "d", Moment::Pre, [Some(1), None, None]),
            entry("A", "d", Moment::Pre, [Some(1), None, None]),
        ])
        .is_err());
    }

    #[test]
    fn csv_with_declared_total() {
        let text = "# declared_total_days=2\npilot_id,date,moment,mood,fatigue,fullness\nA,d1,pre,5,5,5\nA,d1,post,6,4,5\n";
        let f = FaceScaleFile::parse(text).unwrap();
        assert_eq!(f.declared_total_days, Some(2));
        let r = f.report().unwrap();
        assert_eq!(r.total.mood.positive, 1);
        assert_eq!(r.total.fatigue.negative, 1);
        assert_eq!(r.notes.len(), 1);
        assert!(r.notes[0].contains("declared total of 2"));
    }

    #[test]
    fn csv_empty_cells_and_alias() {
        let text = "pilot_id,date,moment,mood,fatigue,fulfilling\nB,d,pre,,3,\n";
        let f = FaceScaleFile::parse(text).unwrap();
        assert_eq!(f.entries[0].mood, None);
        assert_eq!(f.entries[0].fatigue, Some(3));
    }
}
