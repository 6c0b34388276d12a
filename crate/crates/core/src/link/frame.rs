use alloc::vec::Vec;

use super::crc::crc8;

pub const SOF: u8 = 0xAA;
pub const BRAKE_CMD_TYPE: u8 = 0x10;
pub const HEARTBEAT_TYPE: u8 = 0x11;
pub const ACK_TYPE: u8 = 0x20;
pub const MAX_PAYLOAD: usize = 16;

/// Messages exchanged between the supervisor and the actuator node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Message {
    BrakeCmd {
        seq: u8,
        active: bool,
        duty_percent: u8,
        freq_decihertz: u8,
    },
    Heartbeat {
        seq: u8,
        time_ms: u32,
    },
    Ack {
        seq: u8,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum EncodeError {
    #[error("duty_percent {0} exceeds 100")]
    DutyOutOfRange(u8),
}

/// Reasons a candidate frame is rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum FrameError {
    #[error("unknown frame type {0:#04x}")]
    UnknownType(u8),
    #[error("length {len} invalid for type {ty:#04x}")]
    BadLength { ty: u8, len: u8 },
    #[error("crc mismatch")]
    Crc,
    #[error("payload field out of range")]
    BadPayload,
}

impl Message {
    pub fn seq(&self) -> u8 {
        match *self {
            Message::BrakeCmd { seq, .. } | Message::Heartbeat { seq, .. } | Message::Ack { seq } => seq,
        }
    }

    pub fn type_code(&self) -> u8 {
        match self {
            Message::BrakeCmd { .. } => BRAKE_CMD_TYPE,
            Message::Heartbeat { .. } => HEARTBEAT_TYPE,
            Message::Ack { .. } => ACK_TYPE,
        }
    }

    /// Payload length carried by frames of type `ty`, if the type is known.
    pub fn payload_len(ty: u8) -> Option<usize> {
        match ty {
            BRAKE_CMD_TYPE => Some(4),
            HEARTBEAT_TYPE => Some(5),
            ACK_TYPE => Some(1),
            _ => None,
        }
    }

    /// Appends the encoded frame to `out`.
    pub fn encode_into(&self, out: &mut Vec<u8>) -> Result<(), EncodeError> {
        let start = out.len();
        out.push(SOF);
        out.push(self.type_code());
        match *self {
            Message::BrakeCmd {
                seq,
                active,
                duty_percent,
                freq_decihertz,
            } => {
                if duty_percent > 100 {
                    out.truncate(start);
                    return Err(EncodeError::DutyOutOfRange(duty_percent));
                }
                out.extend_from_slice(&[4, seq, u8::from(active), duty_percent, freq_decihertz]);
            }
            Message::Heartbeat { seq, time_ms } => {
                out.extend_from_slice(&[5, seq]);
                out.extend_from_slice(&time_ms.to_le_bytes());
            }
            Message::Ack { seq } => out.extend_from_slice(&[1, seq]),
        }
        let crc = crc8(&out[start + 1..]);
        out.push(crc);
        Ok(())
    }

    pub fn encode(&self) -> Result<Vec<u8>, EncodeError> {
        let mut out = Vec::with_capacity(4 + 5);
        self.encode_into(&mut out)?;
        Ok(out)
    }

    /// Parses one complete frame. `frame` must start at the SOF byte and
    /// contain exactly one frame.
    pub fn decode(frame: &[u8]) -> Result<Message, FrameError> {
        debug_assert!(frame.len() >= 4 && frame[0] == SOF);
        let ty = frame[1];
        let len = frame[2];
        let expected = Self::payload_len(ty).ok_or(FrameError::UnknownType(ty))?;
        if usize::from(len) != expected || frame.len() != 4 + expected {
            return Err(FrameError::BadLength { ty, len });
        }
        let body = &frame[1..3 + expected];
        if crc8(body) != frame[3 + expected] {
            return Err(FrameError::Crc);
        }
        let p = &frame[3..3 + expected];
        match ty {
            BRAKE_CMD_TYPE => {
                if p[1] > 1 || p[2] > 100 {
                    return Err(FrameError::BadPayload);
                }
                Ok(Message::BrakeCmd {
                    seq: p[0],
                    active: p[1] == 1,
                    duty_percent: p[2],
                    freq_decihertz: p[3],
                })
            }
            HEARTBEAT_TYPE => Ok(Message::Heartbeat {
                seq: p[0],
                time_ms: u32::from_le_bytes([p[1], p[2], p[3], p[4]]),
            }),
            _ => Ok(Message::Ack { seq: p[0] }),
        }
    }
}

/// Free-function form of [`Message::encode`].
pub fn encode_frame(msg: &Message) -> Result<Vec<u8>, EncodeError> {
    msg.encode()
}
