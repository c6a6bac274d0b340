//! Wire frames: `"PIR1"`, a type byte, a big-endian `u32` payload length and
//! the payload.

use std::io::{self, Read, Write};

use thiserror::Error;

pub const MAGIC: &[u8; 4] = b"PIR1";
pub const HEADER_LEN: usize = 9;
/// Largest accepted payload.
pub const MAX_PAYLOAD: u32 = 1 << 24;

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("bad magic {0:02x?}")]
    BadMagic(Vec<u8>),
    #[error("unknown frame type 0x{0:02x}")]
    UnknownType(u8),
    #[error("payload of {0} bytes exceeds the limit")]
    TooLarge(u32),
    #[error("stream ended inside a frame ({0} bytes buffered)")]
    Truncated(usize),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameType {
    Query = 0x01,
    Answer = 0x02,
    Error = 0x03,
    Hello = 0x04,
}

impl FrameType {
    pub fn from_byte(b: u8) -> Result<Self, FrameError> {
        Ok(match b {
            0x01 => FrameType::Query,
            0x02 => FrameType::Answer,
            0x03 => FrameType::Error,
            0x04 => FrameType::Hello,
            other => return Err(FrameError::UnknownType(other)),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            FrameType::Query => "query",
            FrameType::Answer => "answer",
            FrameType::Error => "error",
            FrameType::Hello => "hello",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub kind: FrameType,
    pub payload: Vec<u8>,
}

impl Frame {
    pub fn new(kind: FrameType, payload: impl Into<Vec<u8>>) -> Self {
        Frame {
            kind,
            payload: payload.into(),
        }
    }

    pub fn text(kind: FrameType, text: &str) -> Self {
        Self::new(kind, text.as_bytes())
    }

    /// Payload as UTF-8, lossy.
    pub fn payload_text(&self) -> String {
        String::from_utf8_lossy(&self.payload).into_owned()
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.payload.len());
        out.extend_from_slice(MAGIC);
        out.push(self.kind as u8);
        out.extend_from_slice(&(self.payload.len() as u32).to_be_bytes());
        out.extend_from_slice(&self.payload);
        out
    }
}

/// Buffers partial input until whole frames are available.
#[derive(Debug, Default)]
pub struct FrameDecoder {
    buf: Vec<u8>,
}

impl FrameDecoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, bytes: &[u8]) {
        self.buf.extend_from_slice(bytes);
    }

    pub fn buffered(&self) -> usize {
        self.buf.len()
    }

    /// The next complete frame, or `None` if more bytes are needed. Header
    /// errors are reported as soon as the offending byte arrives.
    pub fn next_frame(&mut self) -> Result<Option<Frame>, FrameError> {
        let seen = self.buf.len().min(4);
        if self.buf[..seen] != MAGIC[..seen] {
            return Err(FrameError::BadMagic(self.buf[..seen].to_vec()));
        }
        if self.buf.len() < 5 {
            return Ok(None);
        }
        let kind = FrameType::from_byte(self.buf[4])?;
        if self.buf.len() < HEADER_LEN {
            return Ok(None);
        }
        let len = u32::from_be_bytes(self.buf[5..9].try_into().unwrap());
        if len > MAX_PAYLOAD {
            return Err(FrameError::TooLarge(len));
        }
        let end = HEADER_LEN + len as usize;
        if self.buf.len() < end {
            return Ok(None);
        }
        let payload = self.buf[HEADER_LEN..end].to_vec();
        self.buf.drain(..end);
        Ok(Some(Frame { kind, payload }))
    }
}

/// Reads one frame; `None` on a clean end of stream between frames.
pub fn read_frame<R: Read>(reader: &mut R, decoder: &mut FrameDecoder) -> Result<Option<Frame>, FrameError> {
    let mut chunk = [0u8; 4096];
    loop {
        if let Some(f) = decoder.next_frame()? {
            return Ok(Some(f));
        }
        let n = reader.read(&mut chunk)?;
        if n == 0 {
            return match decoder.buffered() {
                0 => Ok(None),
                b => Err(FrameError::Truncated(b)),
            };
        }
        decoder.push(&chunk[..n]);
    }
}

pub fn write_frame<W: Write>(writer: &mut W, frame: &Frame) -> Result<(), FrameError> {
    writer.write_all(&frame.encode())?;
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hello_is_nine_bytes() {
        let f = Frame::new(FrameType::Hello, Vec::new());
        assert_eq!(f.encode(), b"PIR1\x04\x00\x00\x00\x00");
    }

    #[test]
    fn roundtrip_with_partial_reads() {
        let frames = [
            Frame::text(FrameType::Query, "2 3 1"),
            Frame::text(FrameType::Answer, "0 1"),
        ];
        let bytes: Vec<u8> = frames.iter().flat_map(Frame::encode).collect();
        let mut dec = FrameDecoder::new();
        let mut got = Vec::new();
        for b in bytes.chunks(3) {
            dec.push(b);
            while let Some(f) = dec.next_frame().unwrap() {
                got.push(f);
            }
        }
        assert_eq!(got, frames);
        assert_eq!(got[0].payload, b"2 3 1");
    }

    #[test]
    fn header_errors() {
        let mut dec = FrameDecoder::new();
        dec.push(b"PIX1");
        assert!(matches!(dec.next_frame(), Err(FrameError::BadMagic(_))));
        let mut dec = FrameDecoder::new();
        dec.push(b"PIR1\x07");
        assert!(matches!(dec.next_frame(), Err(FrameError::UnknownType(7))));
        let mut dec = FrameDecoder::new();
        dec.push(b"PIR1\x01\xff\xff\xff\xff");
        assert!(matches!(dec.next_frame(), Err(FrameError::TooLarge(_))));
    }

    #[test]
    fn truncated_stream() {
        let bytes = Frame::text(FrameType::Query, "1 2").encode();
        let mut r = &bytes[..bytes.len() - 1];
        assert!(matches!(
            read_frame(&mut r, &mut FrameDecoder::new()),
            Err(FrameError::Truncated(11))
        ));
        let mut empty: &[u8] = &[];
        assert!(read_frame(&mut empty, &mut FrameDecoder::new()).unwrap().is_none());
    }
}
