use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    VerifierToProver,
    ProverToVerifier,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[repr(u8)]
pub enum MessageKind {
    HashKey = 1,
    EncryptedQuestion = 2,
    Commitment = 3,
    SaokRoots = 4,
    Challenge = 5,
    Openings = 6,
    PlainQuestion = 7,
    SecretKey = 8,
}

impl MessageKind {
    fn from_u8(b: u8) -> Result<Self> {
        use MessageKind::*;
        Ok(match b {
            1 => HashKey,
            2 => EncryptedQuestion,
            3 => Commitment,
            4 => SaokRoots,
            5 => Challenge,
            6 => Openings,
            7 => PlainQuestion,
            8 => SecretKey,
            _ => return Err(Error::MalformedFrame(format!("unknown frame kind {b}"))),
        })
    }

    pub fn direction(self) -> Direction {
        use MessageKind::*;
        match self {
            HashKey | EncryptedQuestion | Challenge | PlainQuestion | SecretKey => Direction::VerifierToProver,
            Commitment | SaokRoots | Openings => Direction::ProverToVerifier,
        }
    }
}

/// A message: kind byte, big-endian `u32` length, payload.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub kind: MessageKind,
    pub payload: Vec<u8>,
}

pub const FRAME_HEADER: usize = 5;

impl Frame {
    pub fn new(kind: MessageKind, payload: Vec<u8>) -> Self {
        Frame { kind, payload }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(FRAME_HEADER + self.payload.len());
        out.push(self.kind as u8);
        out.extend_from_slice(&(self.payload.len() as u32).to_be_bytes());
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn wire_len(&self) -> usize {
        FRAME_HEADER + self.payload.len()
    }

    /// Reads one frame, returning it and the remaining bytes.
    pub fn decode(bytes: &[u8]) -> Result<(Frame, &[u8])> {
        if bytes.len() < FRAME_HEADER {
            return Err(Error::MalformedFrame("truncated frame header".into()));
        }
        let kind = MessageKind::from_u8(bytes[0])?;
        let len = u32::from_be_bytes(bytes[1..5].try_into().unwrap()) as usize;
        if bytes.len() < FRAME_HEADER + len {
            return Err(Error::MalformedFrame("truncated frame payload".into()));
        }
        Ok((Frame { kind, payload: bytes[5..5 + len].to_vec() }, &bytes[5 + len..]))
    }
}

/// Byte count of one message, for the accounting reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageRecord {
    pub phase: u8,
    pub kind: MessageKind,
    pub direction: Direction,
    pub bytes: usize,
}

/// Appends `u32`-length-prefixed fields.
#[derive(Default)]
pub struct FieldWriter(Vec<u8>);

impl FieldWriter {
    pub fn new() -> Self {
        FieldWriter(Vec::new())
    }

    pub fn field(mut self, data: &[u8]) -> Self {
        self.0.extend_from_slice(&(data.len() as u32).to_be_bytes());
        self.0.extend_from_slice(data);
        self
    }

    pub fn finish(self) -> Vec<u8> {
        self.0
    }
}

pub struct FieldReader<'a>(&'a [u8]);

impl<'a> FieldReader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        FieldReader(data)
    }

    pub fn field(&mut self) -> Result<&'a [u8]> {
        if self.0.len() < 4 {
            return Err(Error::MalformedFrame("truncated field length".into()));
        }
        let len = u32::from_be_bytes(self.0[..4].try_into().unwrap()) as usize;
        if self.0.len() < 4 + len {
            return Err(Error::MalformedFrame("truncated field".into()));
        }
        let out = &self.0[4..4 + len];
        self.0 = &self.0[4 + len..];
        Ok(out)
    }

    pub fn finish(self) -> Result<()> {
        if self.0.is_empty() {
            Ok(())
        } else {
            Err(Error::MalformedFrame("trailing bytes".into()))
        }
    }
}
