//! Wire protocol between the supervisor and actuator nodes.
//!
//! Frame layout, all single bytes except the payload:
//!
//! ```text
//! 0xAA | type | length | payload[length] | crc8(type, length, payload)
//! ```
//!
//! CRC-8 uses polynomial 0x07, zero init, no reflection and no final xor.

mod channel;
pub mod crc;
mod decoder;
mod frame;
pub mod harness;

pub use channel::{Channel, ChannelModel};
pub use crc::crc8;
pub use decoder::{decode_stream, DecodeOutput, StreamDecoder};
pub use frame::{
    encode_frame, EncodeError, FrameError, Message, ACK_TYPE, BRAKE_CMD_TYPE, HEARTBEAT_TYPE, MAX_PAYLOAD, SOF,
};
