//! Frame layout (all integers big-endian):
//!
//! ```text
//!  0               4       5
//! +---------------+-------+---------------------------------+
//! | length: u32   | ver   | body: UTF-8 JSON, length-1 bytes |
//! +---------------+-------+---------------------------------+
//! ```
//!
//! `length` counts the version byte and the body. The only accepted version
//! is [`PROTOCOL_VERSION`]; the version is checked before the body is parsed.

use super::message::Message;
use super::ProtocolError;

pub const PROTOCOL_VERSION: u8 = 1;
pub const HEADER_LEN: usize = 4;
/// Upper bound on `length`.
pub const MAX_FRAME_LEN: usize = 1 << 20;

pub fn encode(msg: &Message) -> Result<Vec<u8>, ProtocolError> {
    msg.validate()?;
    let body = serde_json::to_vec(msg).map_err(|e| ProtocolError::InvalidMessage(e.to_string()))?;
    let len = body.len() + 1;
    if len > MAX_FRAME_LEN {
        return Err(ProtocolError::InvalidMessage(format!("frame of {len} bytes exceeds limit")));
    }
    let mut out = Vec::with_capacity(HEADER_LEN + len);
    out.extend_from_slice(&(len as u32).to_be_bytes());
    out.push(PROTOCOL_VERSION);
    out.extend_from_slice(&body);
    Ok(out)
}

/// Decodes exactly one complete frame.
pub fn decode(frame: &[u8]) -> Result<Message, ProtocolError> {
    let len = frame_len(frame)?.ok_or(ProtocolError::MalformedFrame("truncated header"))?;
    match frame.len() - HEADER_LEN {
        n if n < len => Err(ProtocolError::MalformedFrame("truncated body")),
        n if n > len => Err(ProtocolError::MalformedFrame("trailing bytes")),
        _ => decode_payload(&frame[HEADER_LEN..]),
    }
}

/// Decodes the part of a frame after the length prefix.
pub fn decode_payload(payload: &[u8]) -> Result<Message, ProtocolError> {
    let (&version, body) = payload
        .split_first()
        .ok_or(ProtocolError::MalformedFrame("empty payload"))?;
    if version != PROTOCOL_VERSION {
        return Err(ProtocolError::UnsupportedVersion(version));
    }
    let msg: Message =
        serde_json::from_slice(body).map_err(|_| ProtocolError::MalformedFrame("body is not a valid message"))?;
    msg.validate()
        .map_err(|_| ProtocolError::MalformedFrame("message violates protocol limits"))?;
    Ok(msg)
}

/// Reads the length prefix. `Ok(None)` means fewer than four bytes.
pub fn frame_len(buf: &[u8]) -> Result<Option<usize>, ProtocolError> {
    let Some(head) = buf.get(..HEADER_LEN) else {
        return Ok(None);
    };
    let len = u32::from_be_bytes(head.try_into().expect("4 bytes")) as usize;
    if len == 0 {
        return Err(ProtocolError::MalformedFrame("zero length"));
    }
    if len > MAX_FRAME_LEN {
        return Err(ProtocolError::MalformedFrame("length exceeds limit"));
    }
    Ok(Some(len))
}

/// Accumulates bytes from a stream and yields complete frames.
#[derive(Debug, Default)]
pub struct FrameBuffer {
    buf: Vec<u8>,
}

impl FrameBuffer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn extend(&mut self, bytes: &[u8]) {
        self.buf.extend_from_slice(bytes);
    }

    /// Next complete message, if one is buffered. A framing error poisons the
    /// stream: the caller should drop the connection.
    pub fn next_message(&mut self) -> Option<Result<Message, ProtocolError>> {
        let len = match frame_len(&self.buf) {
            Ok(Some(len)) => len,
            Ok(None) => return None,
            Err(e) => return Some(Err(e)),
        };
        if self.buf.len() < HEADER_LEN + len {
            return None;
        }
        let frame: Vec<u8> = self.buf.drain(..HEADER_LEN + len).collect();
        Some(decode_payload(&frame[HEADER_LEN..]))
    }

    pub fn buffered(&self) -> usize {
        self.buf.len()
    }
}
