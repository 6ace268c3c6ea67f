//! Wire protocol between operator clients and the cafe service.

mod channel;
mod codec;
mod input;
mod message;

use thiserror::Error;

pub use channel::{transmit, ChannelModel, Delivery, ImpairedChannel};
pub use codec::{decode, decode_payload, encode, frame_len, FrameBuffer, HEADER_LEN, MAX_FRAME_LEN, PROTOCOL_VERSION};
pub use input::{
    dwell_select, gaze_script, scan_script, scan_select, InputModality, PaletteItem, Selection, DEFAULT_DWELL_MS,
    DEFAULT_SCAN_INTERVAL_MS, DRIVE_STEP_S, MIN_DWELL_MS, MIN_SCAN_INTERVAL_MS,
};
pub use message::{
    CommandKind, Message, OperatorCommand, RejectReason, RobotDigest, RobotEvent, RobotSummary, VoiceMode, WorldView,
    MAX_TEXT_CHARS,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("malformed frame: {0}")]
    MalformedFrame(&'static str),
    #[error("unsupported protocol version {0}")]
    UnsupportedVersion(u8),
    #[error("invalid message: {0}")]
    InvalidMessage(String),
    #[error("invalid channel model: {0}")]
    InvalidChannel(String),
}
