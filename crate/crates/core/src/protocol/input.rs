//! Accessibility input adapters.
//!
//! Each adapter turns a raw gesture stream into a sequence of [`Selection`]s
//! over a palette page. The same selections yield the same commands whatever
//! device produced them; only their timing differs.

use serde::{Deserialize, Serialize};

use crate::robot::{ArmMotion, Direction, HeadMotion};
use crate::session::InputMethod;

use super::message::CommandKind;
use super::ProtocolError;

pub const DEFAULT_DWELL_MS: u64 = 800;
pub const DEFAULT_SCAN_INTERVAL_MS: u64 = 1500;
pub const MIN_DWELL_MS: u64 = 100;
pub const MIN_SCAN_INTERVAL_MS: u64 = 300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InputModality {
    Pointer,
    GazeDwell { dwell_ms: u64 },
    SwitchScan { interval_ms: u64 },
}

impl InputModality {
    pub fn gaze() -> Self {
        InputModality::GazeDwell {
            dwell_ms: DEFAULT_DWELL_MS,
        }
    }

    pub fn scan() -> Self {
        InputModality::SwitchScan {
            interval_ms: DEFAULT_SCAN_INTERVAL_MS,
        }
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        match *self {
            InputModality::GazeDwell { dwell_ms } if dwell_ms < MIN_DWELL_MS => Err(ProtocolError::InvalidMessage(
                format!("dwell must be at least {MIN_DWELL_MS} ms"),
            )),
            InputModality::SwitchScan { interval_ms } if interval_ms < MIN_SCAN_INTERVAL_MS => {
                Err(ProtocolError::InvalidMessage(format!(
                    "scan interval must be at least {MIN_SCAN_INTERVAL_MS} ms"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Default modality for a pilot's computer operation method. Mouth
    /// operation maps to single-switch scanning.
    pub fn for_input_method(method: InputMethod) -> Self {
        match method {
            InputMethod::HandMouse | InputMethod::HandAndMouth => InputModality::Pointer,
            InputMethod::Gaze => Self::gaze(),
            InputMethod::MouthMouse => Self::scan(),
        }
    }
}

/// One selectable target on the operator's palette.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "item", content = "id", rename_all = "snake_case")]
pub enum PaletteItem {
    Head(HeadMotion),
    Arm(ArmMotion),
    Drive(Direction),
    SmileOn,
    SmileOff,
    Stop,
}

/// Seconds of driving issued by one press of a drive target.
pub const DRIVE_STEP_S: f64 = 1.0;

impl PaletteItem {
    /// The 15 prepared motion targets in catalog order.
    pub fn motions() -> Vec<PaletteItem> {
        HeadMotion::ALL
            .into_iter()
            .map(PaletteItem::Head)
            .chain(ArmMotion::ALL.into_iter().map(PaletteItem::Arm))
            .chain(Direction::ALL.into_iter().map(PaletteItem::Drive))
            .collect()
    }

    /// Motion targets followed by smile tagging and stop.
    pub fn full_page() -> Vec<PaletteItem> {
        let mut page = Self::motions();
        page.extend([PaletteItem::SmileOn, PaletteItem::SmileOff, PaletteItem::Stop]);
        page
    }

    pub fn command(self) -> CommandKind {
        match self {
            PaletteItem::Head(m) => CommandKind::SelectHeadMotion {
                motion: m.as_str().to_owned(),
            },
            PaletteItem::Arm(m) => CommandKind::SelectArmMotion {
                motion: m.as_str().to_owned(),
            },
            PaletteItem::Drive(direction) => CommandKind::Locomote {
                direction,
                duration_s: DRIVE_STEP_S,
            },
            PaletteItem::SmileOn => CommandKind::SmileTag { on: true },
            PaletteItem::SmileOff => CommandKind::SmileTag { on: false },
            PaletteItem::Stop => CommandKind::Stop,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Selection<T> {
    pub t_ms: u64,
    pub target: T,
}

/// Gaze dwell selection.
///
/// Each sample `(t, target)` holds until the next sample; `None` means the
/// gaze is on no target. A selection fires `dwell_ms` after the gaze settles
/// on a target, stamped at that instant. Changing target resets the timer,
/// and after a selection the timer restarts so that a held gaze selects again
/// only after another full dwell. The stream ends at its last sample.
pub fn dwell_select<T: Clone + PartialEq>(samples: &[(u64, Option<T>)], dwell_ms: u64) -> Vec<Selection<T>> {
    let mut out = Vec::new();
    let mut current: Option<(T, u64)> = None;
    let fire = |target: &T, since: &mut u64, until: u64, out: &mut Vec<Selection<T>>| {
        while *since + dwell_ms <= until {
            *since += dwell_ms;
            out.push(Selection {
                t_ms: *since,
                target: target.clone(),
            });
        }
    };
    for (t, target) in samples {
        if let Some((held, since)) = current.as_mut() {
            fire(held, since, *t, &mut out);
            if target.as_ref() == Some(&*held) {
                continue;
            }
        }
        current = target.clone().map(|g| (g, *t));
    }
    out
}

/// Single-switch scanning over a page of `page_len` items.
///
/// Starting at `start_ms` the highlight rests on item 0 and advances every
/// `interval_ms`, wrapping at the end of the page. A press selects the
/// highlighted item and restarts the scan at item 0.
pub fn scan_select(page_len: usize, presses: &[u64], interval_ms: u64, start_ms: u64) -> Vec<Selection<usize>> {
    if page_len == 0 || interval_ms == 0 {
        return Vec::new();
    }
    let mut origin = start_ms;
    let mut out = Vec::new();
    for &t in presses {
        if t < origin {
            continue;
        }
        let idx = ((t - origin) / interval_ms) as usize % page_len;
        out.push(Selection { t_ms: t, target: idx });
        origin = t;
    }
    out
}

/// Gaze samples that select each index of `sequence` in turn, one every
/// `slot_ms`, starting at `start_ms`.
pub fn gaze_script(sequence: &[usize], dwell_ms: u64, start_ms: u64, slot_ms: u64) -> Vec<(u64, Option<usize>)> {
    assert!(slot_ms > dwell_ms + dwell_ms / 2, "slot must leave room to look away");
    let mut samples = Vec::new();
    for (k, &target) in sequence.iter().enumerate() {
        let t0 = start_ms + k as u64 * slot_ms;
        samples.push((t0, Some(target)));
        // look away before a second dwell could complete
        samples.push((t0 + dwell_ms + dwell_ms / 2, None));
    }
    samples
}

/// Switch presses that select each index of `sequence` in turn.
pub fn scan_script(sequence: &[usize], interval_ms: u64, start_ms: u64) -> Vec<u64> {
    let mut t = start_ms;
    sequence
        .iter()
        .map(|&idx| {
            t += idx as u64 * interval_ms + interval_ms / 2;
            t
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn palette_has_fifteen_motion_targets() {
        assert_eq!(PaletteItem::motions().len(), 15);
        assert_eq!(PaletteItem::full_page().len(), 18);
    }

    #[test]
    fn modality_bounds() {
        assert!(InputModality::gaze().validate().is_ok());
        assert!(InputModality::GazeDwell { dwell_ms: 99 }.validate().is_err());
        assert!(InputModality::SwitchScan { interval_ms: 299 }.validate().is_err());
        assert!(InputModality::SwitchScan { interval_ms: 300 }.validate().is_ok());
    }

    #[test]
    fn dwell_single_selection_at_threshold() {
        let s = dwell_select(&[(0, Some('A')), (1000, None)], 800);
        assert_eq!(s, vec![Selection { t_ms: 800, target: 'A' }]);
    }

    #[test]
    fn dwell_sub_threshold() {
        assert!(dwell_select(&[(0, Some('A')), (500, None), (2000, None)], 800).is_empty());
    }

    #[test]
    fn dwell_two_targets() {
        let s = dwell_select(&[(0, Some('A')), (900, Some('B')), (1800, None)], 800);
        assert_eq!(
            s,
            vec![
                Selection { t_ms: 800, target: 'A' },
                Selection { t_ms: 1700, target: 'B' }
            ]
        );
    }

    #[test]
    fn dwell_dense_samples_equal_sparse() {
        let dense: Vec<_> = (0..=100).map(|i| (i * 10, Some('A'))).collect();
        assert_eq!(
            dwell_select(&dense, 800),
            vec![Selection { t_ms: 800, target: 'A' }]
        );
    }

    #[test]
    fn dwell_held_gaze_repeats_after_refractory() {
        let s = dwell_select(&[(0, Some('A')), (1700, None)], 800);
        assert_eq!(s.iter().map(|s| s.t_ms).collect::<Vec<_>>(), vec![800, 1600]);
    }

    #[test]
    fn scan_press_picks_highlight() {
        assert_eq!(scan_select(5, &[1600], 1500, 0), vec![Selection { t_ms: 1600, target: 1 }]);
        assert_eq!(scan_select(5, &[700], 1500, 0), vec![Selection { t_ms: 700, target: 0 }]);
        assert!(scan_select(5, &[], 1500, 0).is_empty());
        assert_eq!(scan_select(3, &[3 * 1500 + 10], 1500, 0)[0].target, 0);
    }

    #[test]
    fn scan_restarts_after_selection() {
        let s = scan_select(5, &[1600, 1600 + 3100], 1500, 0);
        assert_eq!(s[1].target, 2);
    }

    #[test]
    fn scripts_decode_to_their_sequence() {
        let seq = [3, 0, 14, 7, 7];
        let dw: Vec<_> = dwell_select(&gaze_script(&seq, 800, 0, 2000), 800)
            .into_iter()
            .map(|s| s.target)
            .collect();
        assert_eq!(dw, seq);
        let sc: Vec<_> = scan_select(15, &scan_script(&seq, 1500, 0), 1500, 0)
            .into_iter()
            .map(|s| s.target)
            .collect();
        assert_eq!(sc, seq);
    }
}
