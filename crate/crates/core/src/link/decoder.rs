use alloc::vec::Vec;

use super::frame::{Message, MAX_PAYLOAD, SOF};

/// Result of feeding bytes to a [`StreamDecoder`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DecodeOutput {
    pub messages: Vec<Message>,
    /// Candidate frames rejected in this call.
    pub errors: usize,
    /// Bytes removed from the accumulator in this call, frames and noise alike.
    pub consumed: usize,
}

/// Resynchronizing frame decoder.
///
/// Bytes are accumulated until a complete candidate frame is available. A
/// candidate that fails any check costs exactly one byte (its SOF) and the
/// scan restarts at the next 0xAA, so a genuine frame hidden behind a false
/// start is never swallowed unless the false start itself passes the CRC.
#[derive(Debug, Clone, Default)]
pub struct StreamDecoder {
    buf: Vec<u8>,
}

impl StreamDecoder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Bytes held back waiting for the rest of a frame.
    pub fn pending(&self) -> &[u8] {
        &self.buf
    }

    pub fn push(&mut self, incoming: &[u8]) -> DecodeOutput {
        self.buf.extend_from_slice(incoming);
        let mut out = DecodeOutput::default();
        let mut pos = 0;
        let len = self.buf.len();
        loop {
            match self.buf[pos..].iter().position(|&b| b == SOF) {
                Some(offset) => pos += offset,
                None => {
                    pos = len;
                    break;
                }
            }
            if len - pos < 3 {
                break;
            }
            let ty = self.buf[pos + 1];
            let declared = usize::from(self.buf[pos + 2]);
            if declared > MAX_PAYLOAD || Message::payload_len(ty) != Some(declared) {
                out.errors += 1;
                pos += 1;
                continue;
            }
            let frame_len = 4 + declared;
            if len - pos < frame_len {
                break;
            }
            match Message::decode(&self.buf[pos..pos + frame_len]) {
                Ok(msg) => {
                    out.messages.push(msg);
                    pos += frame_len;
                }
                Err(_) => {
                    out.errors += 1;
                    pos += 1;
                }
            }
        }
        self.buf.drain(..pos);
        out.consumed = pos;
        out
    }
}

/// Stateless form: decodes `accumulator ++ incoming` and returns the leftover
/// bytes alongside the output.
pub fn decode_stream(accumulator: &[u8], incoming: &[u8]) -> (DecodeOutput, Vec<u8>) {
    let mut dec = StreamDecoder {
        buf: Vec::from(accumulator),
    };
    let out = dec.push(incoming);
    (out, dec.buf)
}
