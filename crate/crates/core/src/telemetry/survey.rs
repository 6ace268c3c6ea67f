//! Five-item survey means.
//!
//! CSV columns: `pilot_id,i,ii,iii,iv,v`, each item scored 1..=5.

use serde::{Deserialize, Serialize};

use super::TelemetryError;

pub const ITEMS: [&str; 5] = ["i", "ii", "iii", "iv", "v"];
/// Responses at or below this are flagged.
pub const LOW_RESPONSE: u8 = 2;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveyResponse {
    pub pilot_id: String,
    pub i: u8,
    pub ii: u8,
    pub iii: u8,
    pub iv: u8,
    pub v: u8,
}

impl SurveyResponse {
    pub fn items(&self) -> [u8; 5] {
        [self.i, self.ii, self.iii, self.iv, self.v]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ItemSummary {
    pub item: &'static str,
    /// Mean in tenths, rounded half up.
    pub mean_tenths: u32,
    pub min: u8,
    pub low_responses: u32,
}

impl ItemSummary {
    pub fn mean(&self) -> f64 {
        f64::from(self.mean_tenths) / 10.0
    }

    pub fn flagged(&self) -> bool {
        self.low_responses > 0
    }

    /// Mean formatted with one decimal.
    pub fn mean_str(&self) -> String {
        format!("{}.{}", self.mean_tenths / 10, self.mean_tenths % 10)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SurveySummary {
    pub n_responses: usize,
    pub items: Vec<ItemSummary>,
    /// Every item mean is at least 4.0.
    pub all_items_at_least_4: bool,
}

pub fn survey_summary(responses: &[SurveyResponse]) -> Result<SurveySummary, TelemetryError> {
    if responses.is_empty() {
        return Err(TelemetryError::EmptySurvey);
    }
    for r in responses {
        if let Some(bad) = r.items().into_iter().find(|s| !(1..=5).contains(s)) {
            return Err(TelemetryError::InvalidScore(format!(
                "{}: survey score {bad} outside 1..=5",
                r.pilot_id
            )));
        }
    }
    let n = responses.len() as u64;
    let items: Vec<ItemSummary> = ITEMS
        .iter()
        .enumerate()
        .map(|(k, &item)| {
            let scores = responses.iter().map(|r| r.items()[k]);
            let sum: u64 = scores.clone().map(u64::from).sum();
            ItemSummary {
                item,
                mean_tenths: ((20 * sum + n) / (2 * n)) as u32,
                min: scores.clone().min().unwrap_or(0),
                low_responses: scores.filter(|&s| s <= LOW_RESPONSE).count() as u32,
            }
        })
        .collect();
    Ok(SurveySummary {
        n_responses: responses.len(),
        all_items_at_least_4: items.iter().all(|i| i.mean_tenths >= 40),
        items,
    })
}

pub fn parse_survey_csv(text: &str) -> Result<Vec<SurveyResponse>, TelemetryError> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    rdr.deserialize()
        .map(|r| r.map_err(super::csv_error))
        .collect()
}
